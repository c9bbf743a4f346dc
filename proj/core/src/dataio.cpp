#include "mednns/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mednns/errors.hpp"
#include "mednns/io.hpp"

namespace mednns {

namespace {
constexpr char kDatasetMagic[8] = {'M', 'N', 'N', 'S', 'D', 'S', '0', '1'};
constexpr std::uint16_t kDatasetVersion = 1;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

Splits make_splits(const DatasetDescriptor& ds, std::uint64_t split_seed) {
    const std::size_t n = ds.size();
    if (n == 0) throw DataError("make_splits: empty dataset");
    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t i = 0; i < n; ++i) by_class[ds.labels[i]].push_back(i);

    Rng rng = Rng(split_seed).fork(fnv1a64("split:" + ds.id));
    Splits s;
    for (auto& members : by_class) {
        rng.shuffle(members);
        const std::size_t m = members.size();
        const std::size_t n_train = static_cast<std::size_t>(std::floor(0.7 * static_cast<double>(m)));
        const std::size_t n_val = static_cast<std::size_t>(std::floor(0.15 * static_cast<double>(m)));
        const std::size_t n_test = m - n_train - n_val;
        if (n_train < 2 || n_val < 2 || n_test < 2)
            throw DataError("make_splits: fewer than 2 samples per class in a split for dataset " + ds.id);
        for (std::size_t i = 0; i < m; ++i) {
            if (i < n_train)
                s.train.push_back(members[i]);
            else if (i < n_train + n_val)
                s.val.push_back(members[i]);
            else
                s.test.push_back(members[i]);
        }
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

std::vector<ClassGen> default_class_params(std::size_t classes, std::uint64_t seed) {
    Rng rng = Rng(seed).fork(fnv1a64("class-params"));
    std::vector<ClassGen> params(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        // Centers on a circle so classes are distinct but overlapping.
        const double angle = 2.0 * kPi * static_cast<double>(c) / static_cast<double>(classes);
        params[c].center_x = static_cast<float>(0.5 + 0.22 * std::cos(angle) + rng.normal(0.0, 0.02));
        params[c].center_y = static_cast<float>(0.5 + 0.22 * std::sin(angle) + rng.normal(0.0, 0.02));
        params[c].tex_freq = static_cast<float>(1.5 + 1.2 * static_cast<double>(c) + rng.uniform(0.0, 0.4));
        params[c].tex_angle = static_cast<float>(rng.uniform(0.0, kPi));
    }
    return params;
}

DatasetDescriptor gen_synthetic(const SyntheticFamilySpec& spec, std::size_t n, Rng rng,
                                const std::string& id) {
    if (spec.classes == 0) throw DataError("gen_synthetic: zero classes");
    if (spec.class_params.size() != spec.classes)
        throw DataError("gen_synthetic: class_params must have one entry per class");
    if (n < spec.classes * 20)
        throw DataError("gen_synthetic: need at least 20 samples per class");

    DatasetDescriptor ds;
    ds.id = id;
    ds.num_classes = spec.classes;
    ds.channels = 1;
    ds.height = spec.height;
    ds.width = spec.width;
    ds.images.resize(n * ds.image_bytes());
    ds.labels.resize(n);

    const float delta = spec.delta;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % spec.classes;  // balanced within +-1
        ds.labels[i] = static_cast<std::uint16_t>(c);
        const ClassGen& g = spec.class_params[c];
        const double jx = rng.normal(0.0, 0.05);
        const double jy = rng.normal(0.0, 0.05);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        const double amp = 0.55 + rng.normal(0.0, 0.08);
        const double tex_amp = 0.16 + rng.normal(0.0, 0.03);
        const double freq = g.tex_freq + 0.10 * delta;
        std::uint8_t* img = ds.images.data() + i * ds.image_bytes();
        for (std::size_t y = 0; y < ds.height; ++y) {
            for (std::size_t x = 0; x < ds.width; ++x) {
                const double fx = (static_cast<double>(x) + 0.5) / static_cast<double>(ds.width);
                const double fy = (static_cast<double>(y) + 0.5) / static_cast<double>(ds.height);
                const double dx = fx - (g.center_x + jx);
                const double dy = fy - (g.center_y + jy);
                const double blob = amp * std::exp(-(dx * dx + dy * dy) / (2.0 * 0.03));
                const double axis = fx * std::cos(g.tex_angle) + fy * std::sin(g.tex_angle);
                const double tex = tex_amp * std::sin(2.0 * kPi * freq * axis + phase);
                // Dataset-level shift: a fixed additive pattern scaled by delta.
                const double shift = 0.13 * delta * std::sin(2.0 * kPi * fx + 1.3) +
                                     0.09 * delta * std::cos(2.0 * kPi * fy + 0.4);
                const double noise = rng.normal(0.0, 0.06);
                double v = 0.30 + blob + tex + shift + noise;
                v = std::clamp(v, 0.0, 1.0);
                img[y * ds.width + x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        }
    }
    return ds;
}

void write_dataset(const std::string& path, const DatasetDescriptor& ds) {
    if (ds.images.size() != ds.size() * ds.image_bytes())
        throw DataError("write_dataset: image buffer size mismatch");
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write(kDatasetMagic, sizeof(kDatasetMagic));
    write_u16(out, kDatasetVersion);
    write_u16(out, static_cast<std::uint16_t>(ds.num_classes));
    write_u32(out, static_cast<std::uint32_t>(ds.size()));
    write_u8(out, static_cast<std::uint8_t>(ds.channels));
    write_u16(out, static_cast<std::uint16_t>(ds.height));
    write_u16(out, static_cast<std::uint16_t>(ds.width));
    out.write(reinterpret_cast<const char*>(ds.images.data()),
              static_cast<std::streamsize>(ds.images.size()));
    for (std::uint16_t label : ds.labels) write_u16(out, label);
    if (!out) throw DataError("write failed: " + path);
}

DatasetDescriptor read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (in.gcount() != 8 || std::memcmp(magic, kDatasetMagic, 8) != 0)
        throw DataError("bad magic in dataset file: " + path);
    const std::uint16_t version = read_u16(in, "version");
    if (version != kDatasetVersion)
        throw DataError("unsupported dataset version " + std::to_string(version) + " in " + path);
    DatasetDescriptor ds;
    ds.num_classes = read_u16(in, "classes");
    const std::uint32_t n = read_u32(in, "sample count");
    ds.channels = read_u8(in, "channels");
    ds.height = read_u16(in, "height");
    ds.width = read_u16(in, "width");
    ds.images.resize(static_cast<std::size_t>(n) * ds.image_bytes());
    in.read(reinterpret_cast<char*>(ds.images.data()),
            static_cast<std::streamsize>(ds.images.size()));
    if (in.gcount() != static_cast<std::streamsize>(ds.images.size()))
        throw DataError("truncated image payload at offset " +
                        std::to_string(static_cast<long long>(in.tellg())) + " in " + path);
    ds.labels.resize(n);
    for (auto& label : ds.labels) {
        label = read_u16(in, "label");
        if (label >= ds.num_classes)
            throw DataError("label out of range in " + path);
    }
    // id from filename stem
    const auto slash = path.find_last_of("/\\");
    std::string stem = (slash == std::string::npos) ? path : path.substr(slash + 1);
    const auto dotpos = stem.find_last_of('.');
    if (dotpos != std::string::npos) stem = stem.substr(0, dotpos);
    ds.id = stem;
    return ds;
}

Tensor to_float_batch(const DatasetDescriptor& ds, const std::vector<std::size_t>& indices) {
    Tensor batch({indices.size(), ds.channels, ds.height, ds.width});
    const std::size_t stride = ds.image_bytes();
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::uint8_t* img = ds.images.data() + indices[k] * stride;
        for (std::size_t i = 0; i < stride; ++i)
            batch[k * stride + i] = static_cast<float>(img[i]) / 255.0f;
    }
    return batch;
}

FamilyConfig default_family() {
    FamilyConfig cfg;
    cfg.classes = 4;
    cfg.n_per_dataset = 240;
    cfg.class_seed = 7;
    const float deltas[] = {0.0f, 0.4f, 0.8f, 1.4f, 2.0f};
    for (std::size_t k = 0; k < 5; ++k) {
        FamilyDatasetSpec d;
        d.id = "synth" + std::to_string(k);
        d.delta = deltas[k];
        d.seed = 1000 + k;
        cfg.datasets.push_back(d);
    }
    return cfg;
}

FamilyConfig parse_family_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("family config parse error: ") + e.what());
    }
    FamilyConfig cfg = default_family();
    cfg.datasets.clear();
    if (!j.is_object()) throw DataError("family config: top level must be an object");
    for (auto& [key, value] : j.items()) {
        if (key == "classes")
            cfg.classes = value.get<std::size_t>();
        else if (key == "n_per_dataset")
            cfg.n_per_dataset = value.get<std::size_t>();
        else if (key == "class_seed")
            cfg.class_seed = value.get<std::uint64_t>();
        else if (key == "datasets") {
            for (const auto& dj : value) {
                FamilyDatasetSpec d;
                d.id = dj.at("id").get<std::string>();
                d.delta = dj.at("delta").get<float>();
                d.seed = dj.at("seed").get<std::uint64_t>();
                cfg.datasets.push_back(d);
            }
        } else {
            throw DataError("family config: unknown key '" + key + "'");
        }
    }
    if (cfg.datasets.empty()) throw DataError("family config: no datasets");
    return cfg;
}

std::string dump_family_config(const FamilyConfig& cfg) {
    nlohmann::json j;
    j["classes"] = cfg.classes;
    j["n_per_dataset"] = cfg.n_per_dataset;
    j["class_seed"] = cfg.class_seed;
    j["datasets"] = nlohmann::json::array();
    for (const auto& d : cfg.datasets)
        j["datasets"].push_back({{"id", d.id}, {"delta", d.delta}, {"seed", d.seed}});
    return j.dump(2) + "\n";
}

DatasetDescriptor gen_family_dataset(const FamilyConfig& family, std::size_t index,
                                     std::uint64_t extra_seed) {
    if (index >= family.datasets.size()) throw DataError("gen_family_dataset: index out of range");
    const FamilyDatasetSpec& d = family.datasets[index];
    SyntheticFamilySpec spec;
    spec.classes = family.classes;
    spec.class_params = default_class_params(family.classes, family.class_seed);
    spec.delta = d.delta;
    Rng rng = Rng(d.seed + extra_seed * 0x9e3779b9ULL).fork(fnv1a64("gen:" + d.id));
    return gen_synthetic(spec, family.n_per_dataset, rng, d.id);
}

}  // namespace mednns
