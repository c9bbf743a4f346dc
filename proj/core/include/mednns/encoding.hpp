#pragma once

#include <map>
#include <string>
#include <vector>

#include "mednns/dataio.hpp"
#include "mednns/mlp.hpp"
#include "mednns/stats.hpp"
#include "mednns/supernet.hpp"

namespace mednns {

// Fixed noise batch shared by every model encoding; drawn once per seed,
// never regenerated per model.
struct FunctionalProbe {
    Tensor z;  // [n_z, c, h, w]
    std::uint64_t seed = 0;
};
FunctionalProbe make_probe(std::size_t n_z, std::size_t channels, std::size_t h, std::size_t w,
                           std::uint64_t seed);

// Frozen random feature extractor shared across all datasets; stands in for
// a pretrained embedding network at desk scale. Never trained.
class FrozenExtractor {
public:
    FrozenExtractor() = default;
    FrozenExtractor(std::size_t in_dim, std::size_t hidden, std::size_t feature_dim,
                    std::uint64_t seed);

    std::size_t feature_dim() const { return net_.output_dim(); }
    std::size_t input_dim() const { return net_.input_dim(); }

    // [n, d_f] features for the given sample indices.
    Tensor features(const DatasetDescriptor& ds, const std::vector<std::size_t>& indices) const;

private:
    Mlp net_;
};

// Flattened config: [d1, w1, e1, d2, w2, e2, ...].
Tensor encode_architecture(const SearchSpace& space, const ArchitectureConfig& cfg);

// Mean penultimate response to the fixed probe; masked channels are exact
// zeros, length = penultimate width of the maximal architecture.
Tensor encode_functional(const ConvNet& supernet, const Mask& mask, const FunctionalProbe& probe);

struct RawDatasetEncoding {
    Tensor mean;         // [d_f]
    GaussianStats stats; // reused for FID
    std::size_t n_used = 0;
};

// Samples min(n_img, |dataset|) images without replacement, extracts frozen
// features and returns their mean plus fitted Gaussian moments.
RawDatasetEncoding encode_dataset(const DatasetDescriptor& ds, const FrozenExtractor& extractor,
                                  std::size_t n_img, Rng rng);

// Binary sidecar cache: MNNSW001 container plus a .keys text file, keyed by
// "dataset:<id>" or "model:<dataset>|<arch fingerprint>".
using EncodingCache = std::map<std::string, Tensor>;
void save_encoding_cache(const std::string& path, const EncodingCache& cache);
EncodingCache load_encoding_cache(const std::string& path);

}  // namespace mednns
