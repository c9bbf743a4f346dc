#include <set>

#include "doctest.h"
#include "mednns/dataio.hpp"
#include "mednns/errors.hpp"
#include "mednns/supernet.hpp"
#include "mednns/zoo.hpp"

using namespace mednns;

namespace {

struct Fixture {
    SearchSpace space;
    std::vector<DatasetDescriptor> datasets;
    std::vector<Splits> splits;
    std::vector<ConvNet> nets;
    std::vector<ZooSource> sources;

    explicit Fixture(std::size_t n_datasets) {
        space.stages = 2;
        space.base_channels = 8;
        space.num_classes = 2;
        SyntheticFamilySpec spec;
        spec.classes = 2;
        spec.class_params = default_class_params(2, 7);
        for (std::size_t i = 0; i < n_datasets; ++i) {
            datasets.push_back(gen_synthetic(spec, 80, Rng(100 + i), "ds" + std::to_string(i)));
            splits.push_back(make_splits(datasets.back(), 1));
            Rng rng(200 + i);
            nets.push_back(make_supernet(space, rng));
        }
        for (std::size_t i = 0; i < n_datasets; ++i)
            sources.push_back({datasets[i].id, &nets[i], &datasets[i], &splits[i],
                               "mem:" + datasets[i].id});
    }
};

}  // namespace

TEST_SUITE_BEGIN("zoo");

TEST_CASE("build_zoo: 'all' policy enumerates datasets x configs") {
    Fixture fx(3);
    ZooManifest manifest = build_zoo(fx.sources, fx.space, ZooPolicy::All, 0, 5);
    CHECK(manifest.entries.size() == 3 * fx.space.num_configs());
    CHECK(manifest.subnets_per_dataset == fx.space.num_configs());
}

TEST_CASE("build_zoo: sampling yields distinct (dataset, arch) pairs") {
    Fixture fx(2);
    ZooManifest manifest = build_zoo(fx.sources, fx.space, ZooPolicy::Sample, 12, 5);
    CHECK(manifest.entries.size() == 24);
    std::set<std::string> keys;
    for (const ZooEntry& e : manifest.entries)
        keys.insert(e.dataset_id + "|" + e.arch.fingerprint());
    CHECK(keys.size() == manifest.entries.size());
}

TEST_CASE("build_zoo: extraction performs zero weight updates") {
    Fixture fx(1);
    const std::vector<Tensor> before = fx.nets[0].params();
    build_zoo(fx.sources, fx.space, ZooPolicy::Sample, 8, 5);
    for (std::size_t p = 0; p < before.size(); ++p)
        CHECK(max_abs_diff(before[p], fx.nets[0].params()[p]) == 0.0f);
}

TEST_CASE("build_zoo: rebuilding with the same seed is byte-identical") {
    Fixture fx(2);
    ZooManifest a = build_zoo(fx.sources, fx.space, ZooPolicy::Sample, 10, 9);
    ZooManifest b = build_zoo(fx.sources, fx.space, ZooPolicy::Sample, 10, 9);
    CHECK(serialize_zoo(a) == serialize_zoo(b));
}

TEST_CASE("zoo manifest: serialize -> parse -> serialize is byte-identical") {
    Fixture fx(2);
    ZooManifest manifest = build_zoo(fx.sources, fx.space, ZooPolicy::Sample, 6, 3);
    manifest.entries[1].scratch_perf = 0.625;
    const std::string text = serialize_zoo(manifest);
    CHECK(serialize_zoo(parse_zoo(text)) == text);
}

TEST_CASE("zoo manifest: corrupt schema line rejected") {
    CHECK_THROWS_AS(parse_zoo("{\"schema\":\"wrong/9\"}\n"), DataError);
}

TEST_CASE("audit_rank: k below 3 is a usage error") {
    Fixture fx(1);
    ZooManifest manifest = build_zoo(fx.sources, fx.space, ZooPolicy::Sample, 8, 3);
    CHECK_THROWS_AS(
        audit_rank(manifest, fx.sources, fx.space, 2, 1, 16, AdamConfig{}, 1),
        UsageError);
}

TEST_CASE("audit_rank: fills scratch_perf and reports per-dataset rho") {
    Fixture fx(1);
    ZooManifest manifest = build_zoo(fx.sources, fx.space, ZooPolicy::Sample, 6, 3);
    auto audits = audit_rank(manifest, fx.sources, fx.space, 4, 1, 16,
                             AdamConfig{1e-3f, 0.9f, 0.999f, 1e-8f}, 1);
    REQUIRE(audits.size() == 1);
    CHECK(audits[0].k == 4);
    std::size_t filled = 0;
    for (const ZooEntry& e : manifest.entries)
        if (e.scratch_perf.has_value()) ++filled;
    CHECK(filled == 4);
}

TEST_SUITE_END();
