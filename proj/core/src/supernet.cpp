#include "mednns/supernet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mednns/errors.hpp"
#include "mednns/io.hpp"

namespace mednns {

void SearchSpace::validate() const {
    if (stages == 0) throw DataError("search space: need at least one stage");
    if (depth_options.empty() || width_options.empty() || expansion_options.empty())
        throw DataError("search space: option lists must be non-empty");
    for (std::size_t d : depth_options)
        if (d == 0) throw DataError("search space: depth options must be >= 1");
    auto check_fractions = [this](const std::vector<float>& opts, const char* what) {
        std::vector<std::size_t> counts;
        for (float f : opts) {
            if (!(f > 0.0f && f <= 1.0f))
                throw DataError(std::string("search space: ") + what + " fractions must be in (0,1]");
            counts.push_back(static_cast<std::size_t>(
                std::ceil(f * static_cast<double>(base_channels))));
        }
        std::sort(counts.begin(), counts.end());
        if (std::adjacent_find(counts.begin(), counts.end()) != counts.end())
            throw DataError(std::string("search space: ") + what +
                            " options collide after channel rounding");
    };
    check_fractions(width_options, "width");
    check_fractions(expansion_options, "expansion");
    if (base_channels == 0 || num_classes < 2)
        throw DataError("search space: invalid base_channels/num_classes");
}

std::size_t SearchSpace::max_depth() const {
    return *std::max_element(depth_options.begin(), depth_options.end());
}

std::size_t SearchSpace::num_configs() const {
    std::size_t per_stage = depth_options.size() * width_options.size() * expansion_options.size();
    std::size_t total = 1;
    for (std::size_t s = 0; s < stages; ++s) total *= per_stage;
    return total;
}

NetDims SearchSpace::maximal_dims() const {
    NetDims dims;
    dims.in_channels = in_channels;
    dims.in_h = in_h;
    dims.in_w = in_w;
    dims.num_classes = num_classes;
    dims.stem_channels = base_channels;
    dims.stages.assign(stages, StageDims{base_channels, base_channels, max_depth()});
    return dims;
}

std::size_t SearchSpace::active_channels(float width_fraction) const {
    return static_cast<std::size_t>(std::ceil(width_fraction * static_cast<double>(base_channels)));
}

std::size_t SearchSpace::hidden_channels(float expansion_fraction) const {
    return static_cast<std::size_t>(
        std::ceil(expansion_fraction * static_cast<double>(base_channels)));
}

std::string SearchSpace::to_json() const {
    nlohmann::json j;
    j["stages"] = stages;
    j["depth_options"] = depth_options;
    j["width_options"] = width_options;
    j["expansion_options"] = expansion_options;
    j["base_channels"] = base_channels;
    j["in_channels"] = in_channels;
    j["in_h"] = in_h;
    j["in_w"] = in_w;
    j["num_classes"] = num_classes;
    return j.dump();
}

SearchSpace SearchSpace::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("search space parse error: ") + e.what());
    }
    SearchSpace s;
    s.stages = j.at("stages").get<std::size_t>();
    s.depth_options = j.at("depth_options").get<std::vector<std::size_t>>();
    s.width_options = j.at("width_options").get<std::vector<float>>();
    s.expansion_options = j.at("expansion_options").get<std::vector<float>>();
    s.base_channels = j.at("base_channels").get<std::size_t>();
    s.in_channels = j.at("in_channels").get<std::size_t>();
    s.in_h = j.at("in_h").get<std::size_t>();
    s.in_w = j.at("in_w").get<std::size_t>();
    s.num_classes = j.at("num_classes").get<std::size_t>();
    s.validate();
    return s;
}

std::string ArchitectureConfig::fingerprint() const {
    std::ostringstream os;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "d%zuw%.2fe%.2f", stages[s].depth,
                      static_cast<double>(stages[s].width),
                      static_cast<double>(stages[s].expansion));
        os << (s ? "|" : "") << buf;
    }
    return os.str();
}

ArchitectureConfig ArchitectureConfig::parse(const std::string& fp) {
    ArchitectureConfig cfg;
    std::stringstream ss(fp);
    std::string part;
    while (std::getline(ss, part, '|')) {
        // Split positionally; sscanf's %f would swallow the 'e' separator
        // as a float exponent.
        const std::size_t pos_w = part.find('w');
        const std::size_t pos_e = part.rfind('e');
        if (part.empty() || part[0] != 'd' || pos_w == std::string::npos ||
            pos_e == std::string::npos || pos_e <= pos_w)
            throw DataError("bad architecture fingerprint: " + fp);
        StageChoice c;
        try {
            c.depth = std::stoul(part.substr(1, pos_w - 1));
            c.width = std::stof(part.substr(pos_w + 1, pos_e - pos_w - 1));
            c.expansion = std::stof(part.substr(pos_e + 1));
        } catch (const std::exception&) {
            throw DataError("bad architecture fingerprint: " + fp);
        }
        cfg.stages.push_back(c);
    }
    if (cfg.stages.empty()) throw DataError("bad architecture fingerprint: " + fp);
    return cfg;
}

ArchitectureConfig config_at(const SearchSpace& space, std::size_t index) {
    if (index >= space.num_configs()) throw DataError("config_at: index out of range");
    ArchitectureConfig cfg;
    std::size_t rem = index;
    for (std::size_t s = 0; s < space.stages; ++s) {
        StageChoice c;
        c.depth = space.depth_options[rem % space.depth_options.size()];
        rem /= space.depth_options.size();
        c.width = space.width_options[rem % space.width_options.size()];
        rem /= space.width_options.size();
        c.expansion = space.expansion_options[rem % space.expansion_options.size()];
        rem /= space.expansion_options.size();
        cfg.stages.push_back(c);
    }
    return cfg;
}

namespace {

template <typename T>
std::size_t option_index(const std::vector<T>& options, T value, const char* what) {
    for (std::size_t i = 0; i < options.size(); ++i)
        if (options[i] == value) return i;
    throw DataError(std::string("architecture choice not in search space: ") + what);
}

}  // namespace

std::size_t config_index(const SearchSpace& space, const ArchitectureConfig& cfg) {
    if (cfg.stages.size() != space.stages) throw DataError("config_index: stage count mismatch");
    std::size_t index = 0, radix = 1;
    for (std::size_t s = 0; s < space.stages; ++s) {
        index += radix * option_index(space.depth_options, cfg.stages[s].depth, "depth");
        radix *= space.depth_options.size();
        index += radix * option_index(space.width_options, cfg.stages[s].width, "width");
        radix *= space.width_options.size();
        index += radix * option_index(space.expansion_options, cfg.stages[s].expansion, "expansion");
        radix *= space.expansion_options.size();
    }
    return index;
}

bool config_valid(const SearchSpace& space, const ArchitectureConfig& cfg) {
    if (cfg.stages.size() != space.stages) return false;
    for (const StageChoice& c : cfg.stages) {
        if (std::find(space.depth_options.begin(), space.depth_options.end(), c.depth) ==
            space.depth_options.end())
            return false;
        if (std::find(space.width_options.begin(), space.width_options.end(), c.width) ==
            space.width_options.end())
            return false;
        if (std::find(space.expansion_options.begin(), space.expansion_options.end(),
                      c.expansion) == space.expansion_options.end())
            return false;
    }
    return true;
}

Mask config_to_mask(const SearchSpace& space, const ArchitectureConfig& cfg) {
    if (!config_valid(space, cfg))
        throw DataError("config_to_mask: config not in search space");
    const std::size_t C = space.base_channels;
    const std::size_t max_depth = space.max_depth();
    Mask mask;
    // Stem: always fully active.
    mask.emplace_back(Tensor::full({C, space.in_channels, 3, 3}, 1.0f));
    std::size_t prev_active = C;
    for (std::size_t s = 0; s < space.stages; ++s) {
        const std::size_t active = space.active_channels(cfg.stages[s].width);
        const std::size_t hidden = space.hidden_channels(cfg.stages[s].expansion);
        Tensor down({C, C, 3, 3});
        for (std::size_t o = 0; o < active; ++o)
            for (std::size_t i = 0; i < prev_active; ++i)
                for (std::size_t k = 0; k < 9; ++k) down[(o * C + i) * 9 + k] = 1.0f;
        mask.push_back(std::move(down));
        for (std::size_t b = 0; b < max_depth; ++b) {
            Tensor w1({C, C, 3, 3});
            Tensor w2({C, C, 3, 3});
            if (b < cfg.stages[s].depth) {
                for (std::size_t o = 0; o < hidden; ++o)
                    for (std::size_t i = 0; i < active; ++i)
                        for (std::size_t k = 0; k < 9; ++k) w1[(o * C + i) * 9 + k] = 1.0f;
                for (std::size_t o = 0; o < active; ++o)
                    for (std::size_t i = 0; i < hidden; ++i)
                        for (std::size_t k = 0; k < 9; ++k) w2[(o * C + i) * 9 + k] = 1.0f;
            }
            mask.push_back(std::move(w1));
            mask.push_back(std::move(w2));
        }
        prev_active = active;
    }
    Tensor head_w({space.num_classes, C});
    for (std::size_t k = 0; k < space.num_classes; ++k)
        for (std::size_t i = 0; i < prev_active; ++i) head_w.at(k, i) = 1.0f;
    mask.push_back(std::move(head_w));
    mask.emplace_back(Tensor::full({space.num_classes}, 1.0f));
    return mask;
}

namespace {

std::size_t nonzero_rows(const Tensor& t) {
    const std::size_t rows = t.dim(0);
    const std::size_t stride = t.size() / rows;
    std::size_t count = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        bool nz = false;
        for (std::size_t i = 0; i < stride && !nz; ++i) nz = t[r * stride + i] != 0.0f;
        if (nz) ++count;
    }
    return count;
}

float fraction_from_count(const std::vector<float>& options, std::size_t count,
                          const SearchSpace& space, bool hidden) {
    for (float f : options) {
        const std::size_t c = hidden ? space.hidden_channels(f) : space.active_channels(f);
        if (c == count) return f;
    }
    throw DataError("mask_to_config: channel count matches no option");
}

}  // namespace

ArchitectureConfig mask_to_config(const SearchSpace& space, const Mask& mask) {
    const std::size_t max_depth = space.max_depth();
    ArchitectureConfig cfg;
    std::size_t idx = 1;  // skip stem
    for (std::size_t s = 0; s < space.stages; ++s) {
        StageChoice c;
        const std::size_t active = nonzero_rows(mask[idx]);
        c.width = fraction_from_count(space.width_options, active, space, false);
        ++idx;
        std::size_t depth = 0;
        std::size_t hidden = 0;
        for (std::size_t b = 0; b < max_depth; ++b) {
            const std::size_t h = nonzero_rows(mask[idx]);
            if (h > 0) {
                depth = b + 1;
                hidden = h;
            }
            idx += 2;
        }
        if (depth == 0) throw DataError("mask_to_config: stage with zero depth");
        c.depth = depth;
        c.expansion = fraction_from_count(space.expansion_options, hidden, space, true);
        cfg.stages.push_back(c);
    }
    if (!config_valid(space, cfg)) throw DataError("mask_to_config: decoded config invalid");
    return cfg;
}

FairnessSampler::FairnessSampler(const SearchSpace& space, Rng rng)
    : space_(space), rng_(rng.fork(fnv1a64("fairness-sampler"))) {
    pools_.resize(space.stages);
}

std::size_t FairnessSampler::draw(Pool& pool, std::size_t option_count) {
    if (pool.pos >= pool.order.size()) {
        pool.order.resize(option_count);
        std::iota(pool.order.begin(), pool.order.end(), 0);
        rng_.shuffle(pool.order);
        pool.pos = 0;
    }
    return pool.order[pool.pos++];
}

ArchitectureConfig FairnessSampler::next() {
    ArchitectureConfig cfg;
    for (std::size_t s = 0; s < space_.stages; ++s) {
        StageChoice c;
        c.depth = space_.depth_options[draw(pools_[s][0], space_.depth_options.size())];
        c.width = space_.width_options[draw(pools_[s][1], space_.width_options.size())];
        c.expansion = space_.expansion_options[draw(pools_[s][2], space_.expansion_options.size())];
        cfg.stages.push_back(c);
    }
    return cfg;
}

std::vector<ArchitectureConfig> FairnessSampler::sample(std::size_t n) {
    if (n == 0) throw DataError("sample_fair: n must be >= 1");
    std::vector<ArchitectureConfig> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(next());
    return out;
}

ConvNet make_supernet(const SearchSpace& space, Rng& rng) {
    space.validate();
    return ConvNet(space.maximal_dims(), rng);
}

ConvNet masked_net(const ConvNet& supernet, const Mask& mask) {
    if (mask.size() != supernet.params().size())
        throw DataError("masked_net: mask not aligned with parameters");
    std::vector<Tensor> params = supernet.params();
    for (std::size_t i = 0; i < params.size(); ++i) mul_inplace(params[i], mask[i]);
    return ConvNet(supernet.net_dims(), std::move(params));
}

Tensor subnet_forward(const ConvNet& supernet, const Mask& mask, const Tensor& x) {
    return masked_net(supernet, mask).forward(x);
}

ConvNet extract_compact(const ConvNet& supernet, const SearchSpace& space,
                        const ArchitectureConfig& cfg) {
    if (!config_valid(space, cfg)) throw DataError("extract_compact: config not in search space");
    const std::size_t C = space.base_channels;
    NetDims dims;
    dims.in_channels = space.in_channels;
    dims.in_h = space.in_h;
    dims.in_w = space.in_w;
    dims.num_classes = space.num_classes;
    dims.stem_channels = C;
    for (const StageChoice& c : cfg.stages)
        dims.stages.push_back(StageDims{space.active_channels(c.width),
                                        space.hidden_channels(c.expansion), c.depth});

    auto slice4 = [](const Tensor& t, std::size_t out_c, std::size_t in_c) {
        Tensor s({out_c, in_c, 3, 3});
        const std::size_t t_in = t.dim(1);
        for (std::size_t o = 0; o < out_c; ++o)
            for (std::size_t i = 0; i < in_c; ++i)
                for (std::size_t k = 0; k < 9; ++k)
                    s[(o * in_c + i) * 9 + k] = t[(o * t_in + i) * 9 + k];
        return s;
    };

    std::vector<Tensor> params;
    params.push_back(supernet.params()[supernet.stem_index()]);
    std::size_t prev = C;
    for (std::size_t s = 0; s < space.stages; ++s) {
        const std::size_t active = dims.stages[s].channels;
        const std::size_t hidden = dims.stages[s].hidden;
        params.push_back(slice4(supernet.params()[supernet.down_index(s)], active, prev));
        for (std::size_t b = 0; b < cfg.stages[s].depth; ++b) {
            params.push_back(slice4(supernet.params()[supernet.block_w1_index(s, b)], hidden, active));
            params.push_back(slice4(supernet.params()[supernet.block_w2_index(s, b)], active, hidden));
        }
        prev = active;
    }
    const Tensor& head_w = supernet.params()[supernet.head_w_index()];
    Tensor hw({space.num_classes, prev});
    for (std::size_t k = 0; k < space.num_classes; ++k)
        for (std::size_t i = 0; i < prev; ++i) hw.at(k, i) = head_w.at(k, i);
    params.push_back(std::move(hw));
    params.push_back(supernet.params()[supernet.head_b_index()]);
    return ConvNet(dims, std::move(params));
}

namespace {

std::vector<std::vector<std::size_t>> make_batches(std::vector<std::size_t> indices,
                                                   std::size_t batch_size, Rng& rng) {
    rng.shuffle(indices);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < indices.size(); i += batch_size) {
        const std::size_t end = std::min(i + batch_size, indices.size());
        batches.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(i),
                             indices.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

}  // namespace

double evaluate_accuracy(const ConvNet& net, const DatasetDescriptor& dataset,
                         const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw DataError("evaluate_accuracy: empty split");
    std::size_t correct = 0;
    const std::size_t chunk = 64;
    for (std::size_t i = 0; i < indices.size(); i += chunk) {
        const std::size_t end = std::min(i + chunk, indices.size());
        std::vector<std::size_t> part(indices.begin() + static_cast<std::ptrdiff_t>(i),
                                      indices.begin() + static_cast<std::ptrdiff_t>(end));
        const Tensor logits = net.forward(to_float_batch(dataset, part));
        for (std::size_t b = 0; b < part.size(); ++b) {
            std::size_t argmax = 0;
            for (std::size_t k = 1; k < logits.dim(1); ++k)
                if (logits.at(b, k) > logits.at(b, argmax)) argmax = k;
            correct += argmax == dataset.labels[part[b]];
        }
    }
    return static_cast<double>(correct) / static_cast<double>(indices.size());
}

double estimate_performance(const ConvNet& supernet, const Mask& mask,
                            const DatasetDescriptor& dataset,
                            const std::vector<std::size_t>& indices) {
    return evaluate_accuracy(masked_net(supernet, mask), dataset, indices);
}

TrainLog train_supernet(ConvNet& net, const SearchSpace& space, const DatasetDescriptor& dataset,
                        const Splits& splits, const TrainSchedule& schedule, Rng rng) {
    if (dataset.size() == 0) throw DataError("train_supernet: empty dataset");
    if (schedule.stage1_epochs < 1 || schedule.subnets_per_batch < 1)
        throw DataError("train_supernet: invalid schedule");
    Rng batch_rng = rng.fork(fnv1a64("batches"));
    FairnessSampler sampler(space, rng.fork(fnv1a64("fair")));
    AdamState adam(net.param_ptrs(), schedule.adam);
    TrainLog log;

    const std::size_t total_epochs = schedule.stage1_epochs + schedule.stage2_epochs;
    for (std::size_t epoch = 0; epoch < total_epochs; ++epoch) {
        const bool stage2 = epoch >= schedule.stage1_epochs;
        double loss_sum = 0.0, acc_sum = 0.0;
        std::size_t batch_count = 0;
        for (const auto& batch : make_batches(splits.train, schedule.batch_size, batch_rng)) {
            const Tensor x = to_float_batch(dataset, batch);
            std::vector<std::uint16_t> labels(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) labels[i] = dataset.labels[batch[i]];

            std::vector<Tensor> grads = net.zero_grads();
            double batch_loss = 0.0, batch_acc = 0.0;
            if (!stage2) {
                ConvNet::Cache cache;
                const Tensor logits = net.forward(x, cache);
                const CeResult ce = softmax_cross_entropy(logits, labels);
                net.backward(cache, ce.dlogits, grads);
                batch_loss = ce.loss;
                batch_acc = ce.accuracy;
            } else {
                const auto configs = sampler.sample(schedule.subnets_per_batch);
                const float inv = 1.0f / static_cast<float>(configs.size());
                for (const ArchitectureConfig& cfg : configs) {
                    const Mask mask = config_to_mask(space, cfg);
                    ConvNet sub = masked_net(net, mask);
                    ConvNet::Cache cache;
                    const Tensor logits = sub.forward(x, cache);
                    const CeResult ce = softmax_cross_entropy(logits, labels);
                    std::vector<Tensor> sub_grads = sub.zero_grads();
                    sub.backward(cache, ce.dlogits, sub_grads);
                    // d/dTheta of f(m * Theta) = m * grad; masked entries stay 0.
                    for (std::size_t t = 0; t < grads.size(); ++t) {
                        mul_inplace(sub_grads[t], mask[t]);
                        add_inplace(grads[t], sub_grads[t], inv);
                    }
                    batch_loss += ce.loss * inv;
                    batch_acc += ce.accuracy * inv;
                }
            }
            if (!std::isfinite(batch_loss))
                throw NumericError("train_supernet: non-finite loss at epoch " +
                                   std::to_string(epoch));
            std::vector<const Tensor*> grad_ptrs;
            for (const Tensor& g : grads) grad_ptrs.push_back(&g);
            adam.step(net.param_ptrs(), grad_ptrs);
            loss_sum += batch_loss;
            acc_sum += batch_acc;
            ++batch_count;
        }
        EpochLog e;
        e.epoch = epoch;
        e.train_loss = loss_sum / static_cast<double>(batch_count);
        e.train_acc = acc_sum / static_cast<double>(batch_count);
        e.val_acc = evaluate_accuracy(net, dataset, splits.val);
        log.epochs.push_back(e);
    }
    log.optimizer_steps = adam.step_count();
    return log;
}

TrainLog train_net(ConvNet& net, const DatasetDescriptor& dataset,
                   const std::vector<std::size_t>& train_indices,
                   const std::vector<std::size_t>& val_indices, std::size_t epochs,
                   std::size_t batch_size, const AdamConfig& adam_cfg, Rng rng) {
    Rng batch_rng = rng.fork(fnv1a64("batches"));
    AdamState adam(net.param_ptrs(), adam_cfg);
    TrainLog log;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        double loss_sum = 0.0, acc_sum = 0.0;
        std::size_t batch_count = 0;
        for (const auto& batch : make_batches(train_indices, batch_size, batch_rng)) {
            const Tensor x = to_float_batch(dataset, batch);
            std::vector<std::uint16_t> labels(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) labels[i] = dataset.labels[batch[i]];
            ConvNet::Cache cache;
            const Tensor logits = net.forward(x, cache);
            const CeResult ce = softmax_cross_entropy(logits, labels);
            std::vector<Tensor> grads = net.zero_grads();
            net.backward(cache, ce.dlogits, grads);
            std::vector<const Tensor*> grad_ptrs;
            for (const Tensor& g : grads) grad_ptrs.push_back(&g);
            adam.step(net.param_ptrs(), grad_ptrs);
            loss_sum += ce.loss;
            acc_sum += ce.accuracy;
            ++batch_count;
        }
        EpochLog e;
        e.epoch = epoch;
        e.train_loss = batch_count ? loss_sum / static_cast<double>(batch_count) : 0.0;
        e.train_acc = batch_count ? acc_sum / static_cast<double>(batch_count) : 0.0;
        e.val_acc = val_indices.empty() ? 0.0 : evaluate_accuracy(net, dataset, val_indices);
        log.epochs.push_back(e);
    }
    log.optimizer_steps = adam.step_count();
    return log;
}

namespace {

nlohmann::json schedule_to_json(const TrainSchedule& s) {
    return {{"stage1_epochs", s.stage1_epochs},
            {"stage2_epochs", s.stage2_epochs},
            {"subnets_per_batch", s.subnets_per_batch},
            {"batch_size", s.batch_size},
            {"lr", s.adam.lr},
            {"beta1", s.adam.beta1},
            {"beta2", s.adam.beta2},
            {"eps", s.adam.eps}};
}

TrainSchedule schedule_from_json(const nlohmann::json& j) {
    TrainSchedule s;
    s.stage1_epochs = j.at("stage1_epochs").get<std::size_t>();
    s.stage2_epochs = j.at("stage2_epochs").get<std::size_t>();
    s.subnets_per_batch = j.at("subnets_per_batch").get<std::size_t>();
    s.batch_size = j.at("batch_size").get<std::size_t>();
    s.adam.lr = j.at("lr").get<float>();
    s.adam.beta1 = j.at("beta1").get<float>();
    s.adam.beta2 = j.at("beta2").get<float>();
    s.adam.eps = j.at("eps").get<float>();
    return s;
}

}  // namespace

void save_supernet(const std::string& path, const ConvNet& net, const SearchSpace& space,
                   std::uint64_t seed, const TrainSchedule& schedule, const TrainLog& log) {
    std::vector<const Tensor*> tensors;
    for (const Tensor& t : net.params()) tensors.push_back(&t);
    save_tensors(path, tensors);
    nlohmann::json j;
    j["space"] = nlohmann::json::parse(space.to_json());
    j["seed"] = seed;
    j["schedule"] = schedule_to_json(schedule);
    j["optimizer_steps"] = log.optimizer_steps;
    j["epochs"] = nlohmann::json::array();
    for (const EpochLog& e : log.epochs)
        j["epochs"].push_back({{"epoch", e.epoch},
                               {"train_loss", e.train_loss},
                               {"train_acc", e.train_acc},
                               {"val_acc", e.val_acc}});
    write_text_file(path + ".json", j.dump(2) + "\n");
}

SupernetCheckpoint load_supernet(const std::string& path) {
    SupernetCheckpoint ckpt;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path + ".json"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("supernet manifest parse error: ") + e.what());
    }
    ckpt.space = SearchSpace::from_json(j.at("space").dump());
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    ckpt.schedule = schedule_from_json(j.at("schedule"));
    ckpt.log.optimizer_steps = j.at("optimizer_steps").get<std::uint64_t>();
    for (const auto& ej : j.at("epochs")) {
        EpochLog e;
        e.epoch = ej.at("epoch").get<std::size_t>();
        e.train_loss = ej.at("train_loss").get<double>();
        e.train_acc = ej.at("train_acc").get<double>();
        e.val_acc = ej.at("val_acc").get<double>();
        ckpt.log.epochs.push_back(e);
    }
    ckpt.net = ConvNet(ckpt.space.maximal_dims(), load_tensors(path));
    return ckpt;
}

}  // namespace mednns
