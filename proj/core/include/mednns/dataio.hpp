#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mednns/rng.hpp"
#include "mednns/tensor.hpp"

namespace mednns {

struct DatasetDescriptor {
    std::string id;
    std::size_t num_classes = 0;
    std::size_t channels = 1;
    std::size_t height = 16;
    std::size_t width = 16;
    std::vector<std::uint8_t> images;   // n * c * h * w, row-major
    std::vector<std::uint16_t> labels;  // n entries in [0, num_classes)

    std::size_t size() const { return labels.size(); }
    std::size_t image_bytes() const { return channels * height * width; }
};

// Stratified, disjoint, exhaustive 0.7/0.15/0.15 split.
struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};
Splits make_splits(const DatasetDescriptor& ds, std::uint64_t split_seed);

// Per-class image generator parameters shared across a dataset family.
struct ClassGen {
    float center_x = 0.5f;  // blob center in [0,1] image coords
    float center_y = 0.5f;
    float tex_freq = 2.0f;  // sinusoidal texture frequency
    float tex_angle = 0.0f;
};

struct SyntheticFamilySpec {
    std::size_t classes = 4;
    std::vector<ClassGen> class_params;  // one per class
    float delta = 0.0f;                  // inter-dataset distribution shift
    std::size_t height = 16;
    std::size_t width = 16;
};

// Deterministic class parameter layout for a given class count and seed.
std::vector<ClassGen> default_class_params(std::size_t classes, std::uint64_t seed);

// Balanced (within +-1 per class) synthetic dataset; deterministic under rng.
DatasetDescriptor gen_synthetic(const SyntheticFamilySpec& spec, std::size_t n, Rng rng,
                                const std::string& id = "synthetic");

// Dataset file: magic "MNNSDS01"; version u16, classes u16, n u32, c u8,
// h u16, w u16; images u8 row-major then labels u16; little-endian.
void write_dataset(const std::string& path, const DatasetDescriptor& ds);
DatasetDescriptor read_dataset(const std::string& path);

// [k, c, h, w] float batch with pixels scaled to [0, 1].
Tensor to_float_batch(const DatasetDescriptor& ds, const std::vector<std::size_t>& indices);

// Family description consumed by gen-data and eval-loo.
struct FamilyDatasetSpec {
    std::string id;
    float delta = 0.0f;
    std::uint64_t seed = 0;
};

struct FamilyConfig {
    std::size_t classes = 4;
    std::size_t n_per_dataset = 240;
    std::uint64_t class_seed = 7;
    std::vector<FamilyDatasetSpec> datasets;
};

FamilyConfig default_family();
FamilyConfig parse_family_config(const std::string& json_text);
std::string dump_family_config(const FamilyConfig& cfg);

DatasetDescriptor gen_family_dataset(const FamilyConfig& family, std::size_t index,
                                     std::uint64_t extra_seed = 0);

}  // namespace mednns
