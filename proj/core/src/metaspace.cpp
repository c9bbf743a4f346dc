#include "mednns/metaspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "mednns/errors.hpp"
#include "mednns/io.hpp"
#include "mednns/optim.hpp"

namespace mednns {

namespace {

void check_unit_rows(const Tensor& embs, const char* what) {
    const std::size_t n = embs.rank() == 1 ? 1 : embs.dim(0);
    const std::size_t d = embs.rank() == 1 ? embs.dim(0) : embs.dim(1);
    for (std::size_t r = 0; r < n; ++r) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double v = embs[r * d + i];
            nrm += v * v;
        }
        if (std::fabs(std::sqrt(nrm) - 1.0) > 1e-3)
            throw NumericError(std::string(what) + ": embedding row is not unit-norm");
    }
}

double sigmoid_d(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double row_dot(const Tensor& a, std::size_t row_a, const Tensor& b, std::size_t row_b,
               std::size_t d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        acc += static_cast<double>(a[row_a * d + i]) * b[row_b * d + i];
    return acc;
}

}  // namespace

MetaSpaceParams init_metaspace(std::size_t model_in_dim, std::size_t dataset_in_dim,
                               const MetaSpaceConfig& cfg, Rng rng) {
    MetaSpaceParams p;
    p.cfg = cfg;
    std::vector<std::size_t> em_dims{model_in_dim};
    em_dims.insert(em_dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    em_dims.push_back(cfg.embed_dim);
    std::vector<std::size_t> ed_dims{dataset_in_dim};
    ed_dims.insert(ed_dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    ed_dims.push_back(cfg.embed_dim);
    std::vector<std::size_t> phi_dims{2 * cfg.embed_dim};
    phi_dims.insert(phi_dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    phi_dims.push_back(1);
    Rng em_rng = rng.fork(1), ed_rng = rng.fork(2), phi_rng = rng.fork(3);
    p.model_encoder = Mlp(em_dims, Activation::ReLU, Activation::Identity, em_rng);
    p.dataset_encoder = Mlp(ed_dims, Activation::ReLU, Activation::Identity, ed_rng);
    p.predictor = Mlp(phi_dims, Activation::ReLU, Activation::Sigmoid, phi_rng);
    p.sigma_fid = cfg.sigma_fid > 0.0f ? cfg.sigma_fid : 1.0f;
    return p;
}

double loss_perf(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.empty()) throw DataError("loss_perf: empty batch");
    if (pred.size() != target.size()) throw DataError("loss_perf: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        acc += (pred[i] - target[i]) * (pred[i] - target[i]);
    return acc / static_cast<double>(pred.size());
}

double loss_rank(const Tensor& d_emb, const Tensor& model_embs,
                 const std::vector<RankPair>& pairs, double beta) {
    if (pairs.empty()) return 0.0;
    check_unit_rows(d_emb, "loss_rank");
    check_unit_rows(model_embs, "loss_rank");
    const std::size_t d = d_emb.size();
    double acc = 0.0;
    for (const RankPair& p : pairs) {
        const double gap =
            row_dot(model_embs, p.better, d_emb, 0, d) - row_dot(model_embs, p.worse, d_emb, 0, d);
        acc += -std::log(sigmoid_d(beta * gap));
    }
    return acc / static_cast<double>(pairs.size());
}

void loss_rank_grad(const Tensor& d_emb, const Tensor& model_embs,
                    const std::vector<RankPair>& pairs, double beta, double weight,
                    Tensor& d_demb, Tensor& d_membs) {
    if (pairs.empty()) return;
    const std::size_t d = d_emb.size();
    const double inv = weight / static_cast<double>(pairs.size());
    for (const RankPair& p : pairs) {
        const double gap =
            row_dot(model_embs, p.better, d_emb, 0, d) - row_dot(model_embs, p.worse, d_emb, 0, d);
        // d/dgap of -log sigmoid(beta*gap) = -beta * (1 - sigmoid(beta*gap))
        const double g = -beta * (1.0 - sigmoid_d(beta * gap)) * inv;
        for (std::size_t i = 0; i < d; ++i) {
            d_demb[i] += static_cast<float>(g * (model_embs[p.better * d + i] -
                                                 model_embs[p.worse * d + i]));
            d_membs[p.better * d + i] += static_cast<float>(g * d_emb[i]);
            d_membs[p.worse * d + i] -= static_cast<float>(g * d_emb[i]);
        }
    }
}

double loss_fid(const Tensor& dataset_embs, const Tensor& fid_matrix, double sigma) {
    if (sigma <= 0.0) throw DataError("loss_fid: sigma must be positive");
    const std::size_t k = dataset_embs.dim(0), d = dataset_embs.dim(1);
    if (fid_matrix.rank() != 2 || fid_matrix.dim(0) != k || fid_matrix.dim(1) != k)
        throw DataError("loss_fid: fid matrix shape mismatch");
    if (k < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double w = std::exp(-static_cast<double>(fid_matrix.at(i, j)) / sigma);
            double dist2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff =
                    static_cast<double>(dataset_embs.at(i, c)) - dataset_embs.at(j, c);
                dist2 += diff * diff;
            }
            acc += w * dist2;
        }
    }
    return acc / static_cast<double>(k * (k - 1));
}

void loss_fid_grad(const Tensor& dataset_embs, const Tensor& fid_matrix, double sigma,
                   double weight, Tensor& d_dembs) {
    const std::size_t k = dataset_embs.dim(0), d = dataset_embs.dim(1);
    if (k < 2) return;
    const double inv = weight / static_cast<double>(k * (k - 1));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double w = std::exp(-static_cast<double>(fid_matrix.at(i, j)) / sigma);
            for (std::size_t c = 0; c < d; ++c) {
                const double diff =
                    static_cast<double>(dataset_embs.at(i, c)) - dataset_embs.at(j, c);
                // ordered pair (i,j): d/d e_i = 2 w (e_i - e_j)
                d_dembs.at(i, c) += static_cast<float>(inv * 2.0 * w * diff);
                d_dembs.at(j, c) -= static_cast<float>(inv * 2.0 * w * diff);
            }
        }
    }
}

double loss_contrastive(const Tensor& d_emb, const Tensor& model_embs,
                        const std::vector<std::size_t>& positives, double tau) {
    if (positives.empty()) throw DataError("loss_contrastive: empty positive set");
    const std::size_t n = model_embs.dim(0), d = model_embs.dim(1);
    double max_logit = -1e300;
    std::vector<double> logits(n);
    for (std::size_t m = 0; m < n; ++m) {
        logits[m] = row_dot(model_embs, m, d_emb, 0, d) / tau;
        max_logit = std::max(max_logit, logits[m]);
    }
    double z_all = 0.0;
    for (std::size_t m = 0; m < n; ++m) z_all += std::exp(logits[m] - max_logit);
    double z_pos = 0.0;
    for (std::size_t p : positives) z_pos += std::exp(logits[p] - max_logit);
    return -std::log(z_pos / z_all);
}

void loss_contrastive_grad(const Tensor& d_emb, const Tensor& model_embs,
                           const std::vector<std::size_t>& positives, double tau, double weight,
                           Tensor& d_demb, Tensor& d_membs) {
    const std::size_t n = model_embs.dim(0), d = model_embs.dim(1);
    std::vector<double> logits(n);
    double max_logit = -1e300;
    for (std::size_t m = 0; m < n; ++m) {
        logits[m] = row_dot(model_embs, m, d_emb, 0, d) / tau;
        max_logit = std::max(max_logit, logits[m]);
    }
    double z_all = 0.0, z_pos = 0.0;
    std::vector<bool> is_pos(n, false);
    for (std::size_t p : positives) is_pos[p] = true;
    for (std::size_t m = 0; m < n; ++m) z_all += std::exp(logits[m] - max_logit);
    for (std::size_t p : positives) z_pos += std::exp(logits[p] - max_logit);
    for (std::size_t m = 0; m < n; ++m) {
        const double a = std::exp(logits[m] - max_logit) / z_all;
        const double b = is_pos[m] ? std::exp(logits[m] - max_logit) / z_pos : 0.0;
        const double dl = weight * (a - b) / tau;  // d loss / d (d.e_m)
        for (std::size_t i = 0; i < d; ++i) {
            d_membs[m * d + i] += static_cast<float>(dl * d_emb[i]);
            d_demb[i] += static_cast<float>(dl * model_embs[m * d + i]);
        }
    }
}

Tensor embed_models(const MetaSpaceParams& params, const Tensor& model_inputs) {
    return l2_normalize_rows(params.model_encoder.forward(model_inputs));
}

Tensor embed_datasets(const MetaSpaceParams& params, const Tensor& dataset_inputs) {
    return l2_normalize_rows(params.dataset_encoder.forward(dataset_inputs));
}

std::vector<double> predict_performance(const MetaSpaceParams& params, const Tensor& model_embs,
                                        const Tensor& dataset_embs,
                                        const std::vector<std::size_t>& model_dataset) {
    const std::size_t n = model_embs.dim(0), d = model_embs.dim(1);
    Tensor phi_in({n, 2 * d});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            phi_in.at(i, c) = model_embs.at(i, c);
            phi_in.at(i, d + c) = dataset_embs.at(model_dataset[i], c);
        }
    }
    const Tensor out = params.predictor.forward(phi_in);
    std::vector<double> pred(n);
    for (std::size_t i = 0; i < n; ++i) pred[i] = out.at(i, 0);
    return pred;
}

namespace {

std::vector<std::vector<std::size_t>> group_by_dataset(const MetaTrainData& data) {
    std::vector<std::vector<std::size_t>> groups(data.dataset_ids.size());
    for (std::size_t i = 0; i < data.model_dataset.size(); ++i)
        groups.at(data.model_dataset[i]).push_back(i);
    return groups;
}

double resolve_sigma(const MetaSpaceConfig& cfg, const Tensor& fid_matrix) {
    if (cfg.sigma_fid > 0.0f) return cfg.sigma_fid;
    const std::size_t k = fid_matrix.dim(0);
    std::vector<double> off;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) off.push_back(fid_matrix.at(i, j));
    if (off.empty()) return 1.0;
    std::sort(off.begin(), off.end());
    const double median = off.size() % 2 ? off[off.size() / 2]
                                         : 0.5 * (off[off.size() / 2 - 1] + off[off.size() / 2]);
    return std::max(median, 1e-6);
}

// Up to `limit` pairs with target gap > min_gap, better first.
std::vector<RankPair> sample_rank_pairs(const std::vector<std::size_t>& group,
                                        const std::vector<double>& targets, std::size_t limit,
                                        double min_gap, Rng& rng) {
    std::vector<RankPair> pairs;
    const std::size_t g = group.size();
    if (g < 2) return pairs;
    const std::size_t all_pairs = g * (g - 1) / 2;
    if (all_pairs <= limit) {
        for (std::size_t a = 0; a < g; ++a)
            for (std::size_t b = a + 1; b < g; ++b) {
                const double gap = targets[group[a]] - targets[group[b]];
                if (std::fabs(gap) <= min_gap) continue;
                pairs.push_back(gap > 0 ? RankPair{group[a], group[b]}
                                        : RankPair{group[b], group[a]});
            }
        return pairs;
    }
    const std::size_t attempts = limit * 8;
    for (std::size_t t = 0; t < attempts && pairs.size() < limit; ++t) {
        const std::size_t a = rng.uniform_index(g);
        const std::size_t b = rng.uniform_index(g);
        if (a == b) continue;
        const double gap = targets[group[a]] - targets[group[b]];
        if (std::fabs(gap) <= min_gap) continue;
        pairs.push_back(gap > 0 ? RankPair{group[a], group[b]} : RankPair{group[b], group[a]});
    }
    return pairs;
}

std::vector<std::size_t> top_quantile(const std::vector<std::size_t>& group,
                                      const std::vector<double>& targets, double q) {
    std::vector<std::size_t> sorted = group;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](std::size_t a, std::size_t b) { return targets[a] > targets[b]; });
    const std::size_t count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(q * static_cast<double>(group.size()))));
    sorted.resize(count);
    return sorted;
}

}  // namespace

MetaTrainResult train_metaspace(MetaSpaceParams& params, const MetaTrainData& data, Rng rng) {
    const std::size_t n = data.model_inputs.dim(0);
    const std::size_t k = data.dataset_ids.size();
    if (n == 0 || k == 0) throw DataError("train_metaspace: empty zoo");
    if (data.model_dataset.size() != n || data.targets.size() != n)
        throw DataError("train_metaspace: inconsistent training data");
    const MetaSpaceConfig& cfg = params.cfg;
    params.dataset_ids = data.dataset_ids;
    params.sigma_fid = static_cast<float>(resolve_sigma(cfg, data.fid_matrix));

    const auto groups = group_by_dataset(data);
    const std::size_t d_e = cfg.embed_dim;

    std::vector<Tensor*> all_params;
    for (Tensor* t : params.model_encoder.params()) all_params.push_back(t);
    for (Tensor* t : params.dataset_encoder.params()) all_params.push_back(t);
    for (Tensor* t : params.predictor.params()) all_params.push_back(t);
    AdamState adam(all_params, AdamConfig{cfg.lr, 0.9f, 0.999f, 1e-8f});

    Rng pair_rng = rng.fork(fnv1a64("rank-pairs"));

    MetaTrainResult result;
    result.fid_skipped = (k < 2) || cfg.lambda_fid == 0.0f;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Mlp::Cache em_cache, ed_cache;
        const Tensor raw_m = params.model_encoder.forward(data.model_inputs, em_cache);
        const Tensor raw_d = params.dataset_encoder.forward(data.dataset_inputs, ed_cache);
        const Tensor m_embs = l2_normalize_rows(raw_m);
        const Tensor d_embs = l2_normalize_rows(raw_d);

        Tensor d_m = Tensor::zeros(m_embs.shape());
        Tensor d_d = Tensor::zeros(d_embs.shape());

        // Performance prediction term.
        Tensor phi_in({n, 2 * d_e});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d_e; ++c) {
                phi_in.at(i, c) = m_embs.at(i, c);
                phi_in.at(i, d_e + c) = d_embs.at(data.model_dataset[i], c);
            }
        Mlp::Cache phi_cache;
        const Tensor yhat = params.predictor.forward(phi_in, phi_cache);
        std::vector<double> pred(n);
        for (std::size_t i = 0; i < n; ++i) pred[i] = yhat.at(i, 0);
        const double l_perf = loss_perf(pred, data.targets);

        std::vector<Tensor> phi_grads = params.predictor.zero_grads();
        Tensor dyhat({n, 1});
        for (std::size_t i = 0; i < n; ++i)
            dyhat.at(i, 0) = static_cast<float>(cfg.lambda_perf * 2.0 *
                                                (pred[i] - data.targets[i]) /
                                                static_cast<double>(n));
        const Tensor dphi_in = params.predictor.backward(phi_cache, dyhat, phi_grads);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d_e; ++c) {
                d_m.at(i, c) += dphi_in.at(i, c);
                d_d.at(data.model_dataset[i], c) += dphi_in.at(i, d_e + c);
            }

        // Rank term, averaged over datasets with at least one pair.
        double l_rank = 0.0;
        if (cfg.lambda_rank > 0.0f) {
            std::vector<std::pair<std::size_t, std::vector<RankPair>>> per_dataset;
            for (std::size_t ds = 0; ds < k; ++ds) {
                auto pairs = sample_rank_pairs(groups[ds], data.targets,
                                               cfg.rank_pairs_per_dataset, cfg.min_rank_gap,
                                               pair_rng);
                if (!pairs.empty()) per_dataset.emplace_back(ds, std::move(pairs));
            }
            if (!per_dataset.empty()) {
                const double w = static_cast<double>(cfg.lambda_rank) /
                                 static_cast<double>(per_dataset.size());
                for (auto& [ds, pairs] : per_dataset) {
                    Tensor d_row({d_e});
                    for (std::size_t c = 0; c < d_e; ++c) d_row[c] = d_embs.at(ds, c);
                    l_rank += loss_rank(d_row, m_embs, pairs, cfg.beta) /
                              static_cast<double>(per_dataset.size());
                    Tensor d_drow = Tensor::zeros({d_e});
                    loss_rank_grad(d_row, m_embs, pairs, cfg.beta, w, d_drow, d_m);
                    for (std::size_t c = 0; c < d_e; ++c) d_d.at(ds, c) += d_drow[c];
                }
            }
        }

        // FID alignment term.
        double l_fid = 0.0;
        if (!result.fid_skipped) {
            l_fid = loss_fid(d_embs, data.fid_matrix, params.sigma_fid);
            loss_fid_grad(d_embs, data.fid_matrix, params.sigma_fid, cfg.lambda_fid, d_d);
        }

        // Contrastive baseline (ablation only).
        double l_con = 0.0;
        if (cfg.lambda_contrastive > 0.0f) {
            const double w = static_cast<double>(cfg.lambda_contrastive) / static_cast<double>(k);
            for (std::size_t ds = 0; ds < k; ++ds) {
                if (groups[ds].empty()) continue;
                const auto positives = top_quantile(groups[ds], data.targets, cfg.contrastive_top_q);
                Tensor d_row({d_e});
                for (std::size_t c = 0; c < d_e; ++c) d_row[c] = d_embs.at(ds, c);
                l_con += loss_contrastive(d_row, m_embs, positives, cfg.contrastive_tau) /
                         static_cast<double>(k);
                Tensor d_drow = Tensor::zeros({d_e});
                loss_contrastive_grad(d_row, m_embs, positives, cfg.contrastive_tau, w, d_drow, d_m);
                for (std::size_t c = 0; c < d_e; ++c) d_d.at(ds, c) += d_drow[c];
            }
        }

        // Backward through normalization and encoders.
        std::vector<Tensor> em_grads = params.model_encoder.zero_grads();
        std::vector<Tensor> ed_grads = params.dataset_encoder.zero_grads();
        params.model_encoder.backward(em_cache, l2_normalize_rows_backward(raw_m, d_m), em_grads);
        params.dataset_encoder.backward(ed_cache, l2_normalize_rows_backward(raw_d, d_d), ed_grads);

        std::vector<const Tensor*> grad_ptrs;
        for (const Tensor& g : em_grads) grad_ptrs.push_back(&g);
        for (const Tensor& g : ed_grads) grad_ptrs.push_back(&g);
        for (const Tensor& g : phi_grads) grad_ptrs.push_back(&g);
        adam.step(all_params, grad_ptrs);

        const double total = cfg.lambda_perf * l_perf + cfg.lambda_rank * l_rank +
                             cfg.lambda_fid * l_fid + cfg.lambda_contrastive * l_con;
        if (!std::isfinite(total))
            throw NumericError("train_metaspace: non-finite loss at epoch " + std::to_string(epoch));
        result.total.push_back(total);
        result.perf.push_back(l_perf);
        result.rank.push_back(l_rank);
        result.fid.push_back(l_fid);
        result.contrastive.push_back(l_con);
    }
    return result;
}

void save_metaspace(const std::string& path, const MetaSpaceParams& params) {
    std::vector<const Tensor*> tensors;
    for (const Tensor* t : params.model_encoder.params()) tensors.push_back(t);
    for (const Tensor* t : params.dataset_encoder.params()) tensors.push_back(t);
    for (const Tensor* t : params.predictor.params()) tensors.push_back(t);
    save_tensors(path, tensors);

    nlohmann::json j;
    j["embed_dim"] = params.cfg.embed_dim;
    j["hidden"] = params.cfg.hidden;
    j["beta"] = params.cfg.beta;
    j["sigma_fid"] = params.sigma_fid;
    j["lambda_perf"] = params.cfg.lambda_perf;
    j["lambda_rank"] = params.cfg.lambda_rank;
    j["lambda_fid"] = params.cfg.lambda_fid;
    j["lambda_contrastive"] = params.cfg.lambda_contrastive;
    j["contrastive_tau"] = params.cfg.contrastive_tau;
    j["contrastive_top_q"] = params.cfg.contrastive_top_q;
    j["rank_pairs_per_dataset"] = params.cfg.rank_pairs_per_dataset;
    j["min_rank_gap"] = params.cfg.min_rank_gap;
    j["epochs"] = params.cfg.epochs;
    j["lr"] = params.cfg.lr;
    j["model_in_dim"] = params.model_encoder.input_dim();
    j["dataset_in_dim"] = params.dataset_encoder.input_dim();
    j["dataset_ids"] = params.dataset_ids;
    j["zoo_fingerprint"] = params.zoo_fingerprint;
    write_text_file(path + ".json", j.dump(2) + "\n");
}

MetaSpaceParams load_metaspace(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path + ".json"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("metaspace header parse error: ") + e.what());
    }
    MetaSpaceConfig cfg;
    cfg.embed_dim = j.at("embed_dim").get<std::size_t>();
    cfg.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    cfg.beta = j.at("beta").get<float>();
    cfg.sigma_fid = j.at("sigma_fid").get<float>();
    cfg.lambda_perf = j.at("lambda_perf").get<float>();
    cfg.lambda_rank = j.at("lambda_rank").get<float>();
    cfg.lambda_fid = j.at("lambda_fid").get<float>();
    cfg.lambda_contrastive = j.at("lambda_contrastive").get<float>();
    cfg.contrastive_tau = j.at("contrastive_tau").get<float>();
    cfg.contrastive_top_q = j.at("contrastive_top_q").get<float>();
    cfg.rank_pairs_per_dataset = j.at("rank_pairs_per_dataset").get<std::size_t>();
    cfg.min_rank_gap = j.at("min_rank_gap").get<float>();
    cfg.epochs = j.at("epochs").get<std::size_t>();
    cfg.lr = j.at("lr").get<float>();

    MetaSpaceParams p = init_metaspace(j.at("model_in_dim").get<std::size_t>(),
                                       j.at("dataset_in_dim").get<std::size_t>(), cfg, Rng(0));
    p.sigma_fid = j.at("sigma_fid").get<float>();
    p.dataset_ids = j.at("dataset_ids").get<std::vector<std::string>>();
    p.zoo_fingerprint = j.at("zoo_fingerprint").get<std::uint64_t>();

    std::vector<Tensor> tensors = load_tensors(path);
    std::vector<Tensor*> slots;
    for (Tensor* t : p.model_encoder.params()) slots.push_back(t);
    for (Tensor* t : p.dataset_encoder.params()) slots.push_back(t);
    for (Tensor* t : p.predictor.params()) slots.push_back(t);
    if (slots.size() != tensors.size())
        throw DataError("metaspace checkpoint: tensor count mismatch in " + path);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]->same_shape(tensors[i]))
            throw DataError("metaspace checkpoint: tensor shape mismatch in " + path);
        *slots[i] = std::move(tensors[i]);
    }
    return p;
}

}  // namespace mednns
