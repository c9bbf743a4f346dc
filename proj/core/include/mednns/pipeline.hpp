#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mednns/dataio.hpp"
#include "mednns/encoding.hpp"
#include "mednns/metaspace.hpp"
#include "mednns/retrieval.hpp"
#include "mednns/supernet.hpp"
#include "mednns/zoo.hpp"

namespace mednns {

// Everything needed to run the end-to-end leave-one-dataset-out benchmark.
struct LooConfig {
    FamilyConfig family;
    SearchSpace space;
    TrainSchedule schedule;
    ZooPolicy zoo_policy = ZooPolicy::Sample;
    std::size_t subnets_per_dataset = 24;
    std::size_t n_img = 256;       // images sampled per dataset encoding
    std::size_t probe_n = 8;       // functional probe batch
    std::size_t extractor_hidden = 64;
    std::size_t feature_dim = 32;  // frozen extractor output d_f
    std::uint64_t frozen_seed = 99;  // probe + extractor, shared across runs
    MetaSpaceConfig metaspace;
    std::size_t finetune_epochs = 1;
    std::size_t finetune_batch = 16;
    AdamConfig finetune_adam{3e-3f, 0.9f, 0.999f, 1e-8f};
    std::vector<std::size_t> topk{1, 5, 10};
    std::string out_dir;  // empty -> keep everything in memory
};

// Raw encodings plus trainer inputs for one zoo; dataset row order is the
// order of first appearance in the manifest.
struct ZooEncodings {
    MetaTrainData data;
    std::vector<GaussianStats> dataset_stats;  // aligned with data.dataset_ids
};

ZooEncodings encode_zoo(const ZooManifest& manifest,
                        const std::map<std::string, const SupernetCheckpoint*>& supernets,
                        const std::map<std::string, const DatasetDescriptor*>& datasets,
                        const FrozenExtractor& extractor, const FunctionalProbe& probe,
                        std::size_t n_img, std::uint64_t encode_seed);

// One leave-one-out run: supernets on every source dataset, zoo, meta-space,
// query with the held-out dataset, T1/T5/T10 fine-tune protocol.
struct LooRun {
    std::string heldout_id;
    std::uint64_t seed = 0;
    std::vector<double> topk_acc;       // aligned with LooConfig::topk
    std::string t1_source;              // source dataset of the T1 pick
    double t1_cosine = 0.0;
    std::vector<std::string> fid_order;  // source ids, ascending FID to query
};

LooRun run_loo(const LooConfig& cfg, std::size_t heldout_index, std::uint64_t seed);

struct LooReport {
    std::vector<LooRun> runs;  // one per (dataset, seed)
    std::vector<std::size_t> topk;
};

// Holds out every family dataset in turn, `n_seeds` seeds each
// (seed_base, seed_base+1, ...).
LooReport eval_loo(const LooConfig& cfg, std::size_t n_seeds, std::uint64_t seed_base);

// Aligned text table: one row per dataset, T-columns averaged over seeds.
std::string render_loo_table(const LooReport& report);
// One row per run with full detail.
std::string render_loo_csv(const LooReport& report);

}  // namespace mednns
