#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mednns/dataio.hpp"
#include "mednns/encoding.hpp"
#include "mednns/metaspace.hpp"
#include "mednns/supernet.hpp"
#include "mednns/zoo.hpp"

namespace mednns {

// Unit model embeddings in zoo-manifest row order.
struct ModelIndex {
    Tensor embeddings;  // [N, d_e], unit rows
    std::uint64_t zoo_fingerprint = 0;
};

// model_inputs rows must align with manifest entry order.
ModelIndex build_index(const MetaSpaceParams& params, const ZooManifest& manifest,
                       const Tensor& model_inputs);

// MNNSW001 embedding matrix plus fingerprint sidecar; load refuses an index
// built against a different zoo.
void save_index(const std::string& path, const ModelIndex& index);
ModelIndex load_index(const std::string& path, const ZooManifest& manifest);

struct ScoredEntry {
    std::size_t manifest_index = 0;
    double score = 0.0;  // cosine similarity
};

struct QueryResult {
    std::vector<ScoredEntry> ranked;  // non-increasing score, ties by index
    bool clamped = false;             // k exceeded the index size
};

QueryResult query(const ModelIndex& index, const Tensor& d_emb, std::size_t k);

// encode_dataset -> E_d -> normalize; [d_e] row.
Tensor embed_new_dataset(const DatasetDescriptor& ds, const FrozenExtractor& extractor,
                         const MetaSpaceParams& params, std::size_t n_img, Rng rng);

struct FineTuneOutcome {
    std::size_t manifest_index = 0;
    double cosine = 0.0;
    double val_acc = 0.0;
    ConvNet net;  // post-fine-tune weights (compact layout)
};

struct SelectionResult {
    std::size_t chosen = 0;  // index into outcomes
    std::vector<FineTuneOutcome> outcomes;  // candidate order of the query
};

// T1/T5/T10 protocol: materialize each candidate as a standalone compact
// network with inherited weights, fine-tune `finetune_epochs` on the
// target's train split, evaluate on its val split, pick the max val
// accuracy (tie -> higher cosine, then lower manifest index). Fine-tune
// randomness is keyed to the candidate identity, never its rank, so T1,
// T5 and T10 see identical per-candidate results.
SelectionResult topk_select(const QueryResult& candidates, const ZooManifest& manifest,
                            const std::map<std::string, const SupernetCheckpoint*>& supernets,
                            const DatasetDescriptor& target, const Splits& target_splits,
                            std::size_t finetune_epochs, std::size_t batch_size,
                            const AdamConfig& adam, std::uint64_t seed);

}  // namespace mednns
