#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mednns/dataio.hpp"
#include "mednns/optim.hpp"
#include "mednns/resnet.hpp"
#include "mednns/rng.hpp"

namespace mednns {

struct SearchSpace {
    std::size_t stages = 3;
    std::vector<std::size_t> depth_options{1, 2};
    std::vector<float> width_options{0.5f, 1.0f};
    std::vector<float> expansion_options{0.5f, 1.0f};
    std::size_t base_channels = 16;
    std::size_t in_channels = 1;
    std::size_t in_h = 16;
    std::size_t in_w = 16;
    std::size_t num_classes = 4;

    void validate() const;
    std::size_t max_depth() const;
    std::size_t num_configs() const;
    NetDims maximal_dims() const;

    std::size_t active_channels(float width_fraction) const;
    std::size_t hidden_channels(float expansion_fraction) const;

    std::string to_json() const;
    static SearchSpace from_json(const std::string& text);
};

struct StageChoice {
    std::size_t depth = 1;
    float width = 1.0f;
    float expansion = 1.0f;
    bool operator==(const StageChoice&) const = default;
};

struct ArchitectureConfig {
    std::vector<StageChoice> stages;
    bool operator==(const ArchitectureConfig&) const = default;
    std::string fingerprint() const;   // e.g. "d2w1.00e0.50|..."
    static ArchitectureConfig parse(const std::string& fingerprint);
};

// Enumeration order used by the "all" zoo policy: mixed radix over
// (stage, depth, width, expansion), depth fastest.
ArchitectureConfig config_at(const SearchSpace& space, std::size_t index);
std::size_t config_index(const SearchSpace& space, const ArchitectureConfig& cfg);

bool config_valid(const SearchSpace& space, const ArchitectureConfig& cfg);

// Binary masks aligned with the supernet parameter layout.
using Mask = std::vector<Tensor>;

Mask config_to_mask(const SearchSpace& space, const ArchitectureConfig& cfg);
ArchitectureConfig mask_to_config(const SearchSpace& space, const Mask& mask);

// Strict-fairness sampler: per (stage, dimension) every option is emitted
// exactly once before any repeats (fresh random permutation per round).
class FairnessSampler {
public:
    FairnessSampler(const SearchSpace& space, Rng rng);
    ArchitectureConfig next();
    std::vector<ArchitectureConfig> sample(std::size_t n);

private:
    struct Pool {
        std::vector<std::size_t> order;
        std::size_t pos = 0;
    };
    std::size_t draw(Pool& pool, std::size_t option_count);
    const SearchSpace space_;
    Rng rng_;
    std::vector<std::array<Pool, 3>> pools_;  // per stage: depth, width, expansion
};

ConvNet make_supernet(const SearchSpace& space, Rng& rng);

// Weights with the mask applied (m * Theta), same maximal layout.
ConvNet masked_net(const ConvNet& supernet, const Mask& mask);

Tensor subnet_forward(const ConvNet& supernet, const Mask& mask, const Tensor& x);

// Standalone compact network: channel-prefix slices of the supernet weights.
ConvNet extract_compact(const ConvNet& supernet, const SearchSpace& space,
                        const ArchitectureConfig& cfg);

struct TrainSchedule {
    std::size_t stage1_epochs = 4;
    std::size_t stage2_epochs = 6;
    std::size_t subnets_per_batch = 4;
    std::size_t batch_size = 16;
    AdamConfig adam{3e-3f, 0.9f, 0.999f, 1e-8f};
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    std::uint64_t optimizer_steps = 0;
};

// Two-stage supernet training: stage 1 trains the maximal network, stage 2
// averages the loss of fairly sampled subnetworks per batch. Masked
// parameters receive exactly zero gradient.
TrainLog train_supernet(ConvNet& net, const SearchSpace& space, const DatasetDescriptor& dataset,
                        const Splits& splits, const TrainSchedule& schedule, Rng rng);

// Plain training of a fixed architecture (used for scratch baselines and
// fine-tuning); operates on any ConvNet.
TrainLog train_net(ConvNet& net, const DatasetDescriptor& dataset,
                   const std::vector<std::size_t>& train_indices,
                   const std::vector<std::size_t>& val_indices, std::size_t epochs,
                   std::size_t batch_size, const AdamConfig& adam, Rng rng);

// Accuracy of the masked subnet on the given indices (typically val split).
double estimate_performance(const ConvNet& supernet, const Mask& mask,
                            const DatasetDescriptor& dataset,
                            const std::vector<std::size_t>& indices);

double evaluate_accuracy(const ConvNet& net, const DatasetDescriptor& dataset,
                         const std::vector<std::size_t>& indices);

// Checkpoint: MNNSW001 weights at `path`, JSON manifest at `path.json`
// (search space, seed, schedule, per-epoch log).
void save_supernet(const std::string& path, const ConvNet& net, const SearchSpace& space,
                   std::uint64_t seed, const TrainSchedule& schedule, const TrainLog& log);

struct SupernetCheckpoint {
    ConvNet net;
    SearchSpace space;
    std::uint64_t seed = 0;
    TrainSchedule schedule;
    TrainLog log;
};
SupernetCheckpoint load_supernet(const std::string& path);

}  // namespace mednns
