#include "mednns/encoding.hpp"

#include <algorithm>
#include <numeric>

#include "mednns/errors.hpp"
#include "mednns/io.hpp"

namespace mednns {

FunctionalProbe make_probe(std::size_t n_z, std::size_t channels, std::size_t h, std::size_t w,
                           std::uint64_t seed) {
    FunctionalProbe probe;
    probe.seed = seed;
    Rng rng = Rng(seed).fork(fnv1a64("functional-probe"));
    probe.z = Tensor({n_z, channels, h, w}, rng.normal_vec(n_z * channels * h * w));
    return probe;
}

FrozenExtractor::FrozenExtractor(std::size_t in_dim, std::size_t hidden, std::size_t feature_dim,
                                 std::uint64_t seed) {
    Rng rng = Rng(seed).fork(fnv1a64("frozen-extractor"));
    net_ = Mlp({in_dim, hidden, feature_dim}, Activation::ReLU, Activation::Identity, rng);
}

Tensor FrozenExtractor::features(const DatasetDescriptor& ds,
                                 const std::vector<std::size_t>& indices) const {
    if (indices.empty()) throw DataError("FrozenExtractor::features: no samples");
    if (ds.image_bytes() != input_dim())
        throw DataError("FrozenExtractor::features: image size mismatch");
    Tensor flat({indices.size(), input_dim()});
    const std::size_t stride = ds.image_bytes();
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::uint8_t* img = ds.images.data() + indices[k] * stride;
        for (std::size_t i = 0; i < stride; ++i)
            flat[k * stride + i] = static_cast<float>(img[i]) / 255.0f;
    }
    return net_.forward(flat);
}

Tensor encode_architecture(const SearchSpace& space, const ArchitectureConfig& cfg) {
    if (!config_valid(space, cfg))
        throw DataError("encode_architecture: config not in search space");
    Tensor v({cfg.stages.size() * 3});
    for (std::size_t s = 0; s < cfg.stages.size(); ++s) {
        v[3 * s] = static_cast<float>(cfg.stages[s].depth);
        v[3 * s + 1] = cfg.stages[s].width;
        v[3 * s + 2] = cfg.stages[s].expansion;
    }
    return v;
}

Tensor encode_functional(const ConvNet& supernet, const Mask& mask, const FunctionalProbe& probe) {
    const ConvNet sub = masked_net(supernet, mask);
    const Tensor feats = sub.penultimate(probe.z);  // [n_z, C]
    const std::size_t n_z = feats.dim(0), c = feats.dim(1);
    Tensor mean({c});
    for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n_z; ++i) acc += feats.at(i, ch);
        mean[ch] = static_cast<float>(acc / static_cast<double>(n_z));
    }
    return mean;
}

RawDatasetEncoding encode_dataset(const DatasetDescriptor& ds, const FrozenExtractor& extractor,
                                  std::size_t n_img, Rng rng) {
    if (ds.size() == 0) throw DataError("encode_dataset: empty dataset");
    std::vector<std::size_t> indices(ds.size());
    std::iota(indices.begin(), indices.end(), 0);
    if (n_img < ds.size()) {
        Rng sample_rng = rng.fork(fnv1a64("encode-sample:" + ds.id));
        sample_rng.shuffle(indices);
        indices.resize(n_img);
        std::sort(indices.begin(), indices.end());
    }
    const Tensor feats = extractor.features(ds, indices);
    RawDatasetEncoding enc;
    enc.n_used = indices.size();
    enc.stats = fit_gaussian(feats);
    enc.mean = enc.stats.mean;
    return enc;
}

void save_encoding_cache(const std::string& path, const EncodingCache& cache) {
    std::vector<const Tensor*> tensors;
    std::string keys;
    for (const auto& [key, tensor] : cache) {
        tensors.push_back(&tensor);
        keys += key + "\n";
    }
    save_tensors(path, tensors);
    write_text_file(path + ".keys", keys);
}

EncodingCache load_encoding_cache(const std::string& path) {
    std::vector<Tensor> tensors = load_tensors(path);
    const std::string keys_text = read_text_file(path + ".keys");
    std::vector<std::string> keys;
    std::string cur;
    for (char ch : keys_text) {
        if (ch == '\n') {
            if (!cur.empty()) keys.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (keys.size() != tensors.size())
        throw DataError("encoding cache: key count does not match tensor count in " + path);
    EncodingCache cache;
    for (std::size_t i = 0; i < keys.size(); ++i) cache[keys[i]] = std::move(tensors[i]);
    return cache;
}

}  // namespace mednns
