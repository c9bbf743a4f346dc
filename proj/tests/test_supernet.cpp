#include <set>

#include "doctest.h"
#include "mednns/dataio.hpp"
#include "mednns/errors.hpp"
#include "mednns/supernet.hpp"

using namespace mednns;

namespace {

SearchSpace small_space() {
    SearchSpace space;
    space.stages = 2;
    space.base_channels = 8;
    space.num_classes = 2;
    return space;
}

ArchitectureConfig maximal_config(const SearchSpace& space) {
    ArchitectureConfig cfg;
    for (std::size_t s = 0; s < space.stages; ++s)
        cfg.stages.push_back({space.depth_options.back(), space.width_options.back(),
                              space.expansion_options.back()});
    return cfg;
}

DatasetDescriptor toy_dataset(std::size_t classes, std::size_t n, std::uint64_t seed) {
    SyntheticFamilySpec spec;
    spec.classes = classes;
    spec.class_params = default_class_params(classes, 7);
    return gen_synthetic(spec, n, Rng(seed), "toy");
}

}  // namespace

TEST_SUITE_BEGIN("supernet");

TEST_CASE("config_to_mask: maximal config gives all-ones mask") {
    SearchSpace space;
    Mask m = config_to_mask(space, maximal_config(space));
    for (const Tensor& t : m)
        for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == 1.0f);
}

TEST_CASE("config_to_mask: depth 1 zeroes the second block entirely") {
    SearchSpace space;
    ArchitectureConfig cfg = maximal_config(space);
    cfg.stages[0].depth = 1;
    Mask m = config_to_mask(space, cfg);
    Rng rng(0);
    ConvNet net = make_supernet(space, rng);
    const Tensor& w1 = m[net.block_w1_index(0, 1)];
    const Tensor& w2 = m[net.block_w2_index(0, 1)];
    for (std::size_t i = 0; i < w1.size(); ++i) CHECK(w1[i] == 0.0f);
    for (std::size_t i = 0; i < w2.size(); ++i) CHECK(w2[i] == 0.0f);
}

TEST_CASE("config_to_mask: width 0.5 at base 16 keeps the first 8 channels") {
    SearchSpace space;  // base_channels 16
    ArchitectureConfig cfg = maximal_config(space);
    cfg.stages[0].width = 0.5f;
    Mask m = config_to_mask(space, cfg);
    Rng rng(0);
    ConvNet net = make_supernet(space, rng);
    const Tensor& down = m[net.down_index(0)];  // [oc, ic, 3, 3]
    std::size_t oc = down.dim(0);
    CHECK(oc == 16);
    std::size_t per_out = down.size() / oc;
    for (std::size_t o = 0; o < oc; ++o) {
        float expect = o < 8 ? 1.0f : 0.0f;
        for (std::size_t i = 0; i < per_out; ++i) CHECK(down[o * per_out + i] == expect);
    }
}

TEST_CASE("config_to_mask: invalid config rejected") {
    SearchSpace space;
    ArchitectureConfig cfg = maximal_config(space);
    cfg.stages[0].width = 0.3f;  // not an option
    CHECK(!config_valid(space, cfg));
    CHECK_THROWS_AS(config_to_mask(space, cfg), DataError);
}

TEST_CASE("mask round-trip is identity over the full default space") {
    SearchSpace space;
    CHECK(space.num_configs() == 512);
    for (std::size_t i = 0; i < space.num_configs(); ++i) {
        ArchitectureConfig cfg = config_at(space, i);
        CHECK(config_index(space, cfg) == i);
        CHECK(mask_to_config(space, config_to_mask(space, cfg)) == cfg);
    }
}

TEST_CASE("architecture fingerprint parses back to the same config") {
    SearchSpace space;
    for (std::size_t i = 0; i < space.num_configs(); i += 37) {
        ArchitectureConfig cfg = config_at(space, i);
        CHECK(ArchitectureConfig::parse(cfg.fingerprint()) == cfg);
    }
}

TEST_CASE("subnet_forward: all-ones mask equals plain supernet forward") {
    SearchSpace space = small_space();
    Rng rng(1);
    ConvNet net = make_supernet(space, rng);
    Mask m = config_to_mask(space, maximal_config(space));
    Tensor x({2, 1, 16, 16}, Rng(2).normal_vec(2 * 16 * 16));
    CHECK(max_abs_diff(subnet_forward(net, m, x), net.forward(x)) == 0.0f);
}

TEST_CASE("subnet_forward: fully masked block is an exact identity") {
    SearchSpace space = small_space();
    Rng rng(1);
    ConvNet net = make_supernet(space, rng);
    ArchitectureConfig cfg = maximal_config(space);
    cfg.stages[1].depth = 1;  // second block of stage 1 masked out
    Mask m = config_to_mask(space, cfg);
    // Zeroing the block weights by hand must give the same output.
    ConvNet manual = net;
    manual.params()[net.block_w1_index(1, 1)].fill(0.0f);
    manual.params()[net.block_w2_index(1, 1)].fill(0.0f);
    Tensor x({2, 1, 16, 16}, Rng(3).normal_vec(2 * 16 * 16));
    CHECK(max_abs_diff(subnet_forward(net, m, x), manual.forward(x)) == 0.0f);
}

TEST_CASE("weight sharing: subnet_forward equals extracted standalone net") {
    SearchSpace space;
    space.num_classes = 3;
    Rng rng(10);
    ConvNet net = make_supernet(space, rng);
    Rng pick(20);
    for (int trial = 0; trial < 10; ++trial) {
        ArchitectureConfig cfg =
            config_at(space, static_cast<std::size_t>(pick.uniform_index(space.num_configs())));
        Mask m = config_to_mask(space, cfg);
        ConvNet compact = extract_compact(net, space, cfg);
        Tensor x({2, 1, 16, 16}, pick.normal_vec(2 * 16 * 16));
        CHECK(max_abs_diff(subnet_forward(net, m, x), compact.forward(x)) < 1e-6f);
    }
}

TEST_CASE("fairness: every option used exactly once per round") {
    SearchSpace space;  // 2 options per dimension
    FairnessSampler sampler(space, Rng(5));
    auto round = sampler.sample(2);
    for (std::size_t s = 0; s < space.stages; ++s) {
        CHECK(round[0].stages[s].depth != round[1].stages[s].depth);
        CHECK(round[0].stages[s].width != round[1].stages[s].width);
        CHECK(round[0].stages[s].expansion != round[1].stages[s].expansion);
    }
}

TEST_CASE("fairness: exact per-option counts over 20 rounds") {
    SearchSpace space;
    FairnessSampler sampler(space, Rng(6));
    auto configs = sampler.sample(40);  // 20 rounds of length 2
    for (std::size_t s = 0; s < space.stages; ++s) {
        std::size_t d1 = 0, w_half = 0, e_half = 0;
        for (const auto& c : configs) {
            if (c.stages[s].depth == 1) ++d1;
            if (c.stages[s].width == 0.5f) ++w_half;
            if (c.stages[s].expansion == 0.5f) ++e_half;
        }
        CHECK(d1 == 20);
        CHECK(w_half == 20);
        CHECK(e_half == 20);
    }
}

TEST_CASE("train_supernet: learns separable 2-class data") {
    SearchSpace space = small_space();
    DatasetDescriptor ds = toy_dataset(2, 160, 30);
    Splits splits = make_splits(ds, 1);
    Rng rng(8);
    ConvNet net = make_supernet(space, rng);
    TrainSchedule schedule;
    schedule.stage1_epochs = 10;
    schedule.stage2_epochs = 5;
    TrainLog log = train_supernet(net, space, ds, splits, schedule, Rng(9));
    CHECK(log.epochs.size() == 15);
    Mask m = config_to_mask(space, maximal_config(space));
    CHECK(estimate_performance(net, m, ds, splits.val) >= 0.95);
}

TEST_CASE("masked parameters receive exactly zero gradient") {
    // y = x + W2 relu(W1 x) with bias-free blocks: zeroed weights cut both
    // the forward activations and the backward paths, so the gradient at
    // every masked entry is exactly zero even before the trainer re-applies
    // the mask.
    SearchSpace space;
    space.num_classes = 3;
    Rng rng(12);
    ConvNet net = make_supernet(space, rng);
    Rng pick(13);
    for (int trial = 0; trial < 5; ++trial) {
        ArchitectureConfig cfg =
            config_at(space, static_cast<std::size_t>(pick.uniform_index(space.num_configs())));
        Mask m = config_to_mask(space, cfg);
        ConvNet sub = masked_net(net, m);
        Tensor x({2, 1, 16, 16}, pick.normal_vec(2 * 16 * 16));
        std::vector<std::uint16_t> labels{0, 2};
        ConvNet::Cache cache;
        Tensor logits = sub.forward(x, cache);
        CeResult ce = softmax_cross_entropy(logits, labels);
        std::vector<Tensor> grads = sub.zero_grads();
        sub.backward(cache, ce.dlogits, grads);
        bool any_masked = false, any_live = false;
        for (std::size_t p = 0; p < grads.size(); ++p) {
            for (std::size_t i = 0; i < grads[p].size(); ++i) {
                if (m[p][i] == 0.0f) {
                    any_masked = true;
                    CHECK(grads[p][i] == 0.0f);
                } else if (grads[p][i] != 0.0f) {
                    any_live = true;
                }
            }
        }
        if (cfg != maximal_config(space)) CHECK(any_masked);
        CHECK(any_live);
    }
}

TEST_CASE("estimate_performance: deterministic on repeat") {
    SearchSpace space = small_space();
    Rng rng(14);
    ConvNet net = make_supernet(space, rng);
    DatasetDescriptor ds = toy_dataset(2, 80, 32);
    Splits splits = make_splits(ds, 1);
    Mask m = config_to_mask(space, maximal_config(space));
    CHECK(estimate_performance(net, m, ds, splits.val) ==
          estimate_performance(net, m, ds, splits.val));
    CHECK_THROWS_AS(estimate_performance(net, m, ds, {}), DataError);
}

TEST_CASE("supernet checkpoint round-trips weights and metadata") {
    SearchSpace space = small_space();
    Rng rng(15);
    ConvNet net = make_supernet(space, rng);
    TrainSchedule schedule;
    TrainLog log;
    log.epochs.push_back({0, 0.5, 0.6, 0.7});
    log.optimizer_steps = 42;
    const std::string path = "test_sn_roundtrip.ckpt";
    save_supernet(path, net, space, 77, schedule, log);
    SupernetCheckpoint loaded = load_supernet(path);
    CHECK(loaded.seed == 77);
    CHECK(loaded.space.base_channels == space.base_channels);
    CHECK(loaded.log.optimizer_steps == 42);
    REQUIRE(loaded.net.params().size() == net.params().size());
    for (std::size_t p = 0; p < net.params().size(); ++p)
        CHECK(max_abs_diff(loaded.net.params()[p], net.params()[p]) == 0.0f);
}

TEST_SUITE_END();
