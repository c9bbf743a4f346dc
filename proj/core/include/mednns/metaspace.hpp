#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mednns/mlp.hpp"
#include "mednns/rng.hpp"
#include "mednns/tensor.hpp"

namespace mednns {

struct MetaSpaceConfig {
    std::size_t embed_dim = 64;
    std::vector<std::size_t> hidden{128};
    float beta = 10.0f;       // rank-loss scale
    float sigma_fid = 0.0f;   // <= 0 resolves to median pairwise FID
    float lambda_perf = 1.0f;
    float lambda_rank = 1.0f;
    float lambda_fid = 1.0f;
    float lambda_contrastive = 0.0f;  // ablation baseline, off by default
    float contrastive_tau = 0.1f;
    float contrastive_top_q = 0.2f;
    std::size_t rank_pairs_per_dataset = 64;
    float min_rank_gap = 1e-4f;
    std::size_t epochs = 300;
    float lr = 1e-2f;
};

// Everything the trainer needs, decoupled from where encodings came from.
struct MetaTrainData {
    std::vector<std::string> dataset_ids;  // K
    Tensor dataset_inputs;                 // [K, d_f] raw dataset encodings
    Tensor fid_matrix;                     // [K, K] symmetric, zero diagonal
    Tensor model_inputs;                   // [N, arch+func] raw model encodings
    std::vector<std::size_t> model_dataset;  // [N] row index into datasets
    std::vector<double> targets;           // [N] P-hat in [0, 1]
};

struct MetaSpaceParams {
    Mlp model_encoder;    // E_m
    Mlp dataset_encoder;  // E_d
    Mlp predictor;        // phi, sigmoid head
    MetaSpaceConfig cfg;
    float sigma_fid = 1.0f;  // resolved bandwidth
    std::vector<std::string> dataset_ids;
    std::uint64_t zoo_fingerprint = 0;
};

MetaSpaceParams init_metaspace(std::size_t model_in_dim, std::size_t dataset_in_dim,
                               const MetaSpaceConfig& cfg, Rng rng);

// ---- losses (float tensors in, float64 arithmetic inside) ----

// Mean squared error between predictions and targets.
double loss_perf(const std::vector<double>& pred, const std::vector<double>& target);

struct RankPair {
    std::size_t better = 0;  // index of the higher-P model embedding row
    std::size_t worse = 0;
};

// (1/|P|) sum -log sigmoid(beta * (d.e_better - d.e_worse)). Embeddings must
// be unit rows (checked to 1e-3). Empty pair list -> 0.
double loss_rank(const Tensor& d_emb, const Tensor& model_embs,
                 const std::vector<RankPair>& pairs, double beta);
void loss_rank_grad(const Tensor& d_emb, const Tensor& model_embs,
                    const std::vector<RankPair>& pairs, double beta, double weight,
                    Tensor& d_demb, Tensor& d_membs);

// (1/(K(K-1))) sum_{i != j} exp(-FID_ij / sigma) ||e_i - e_j||^2.
double loss_fid(const Tensor& dataset_embs, const Tensor& fid_matrix, double sigma);
void loss_fid_grad(const Tensor& dataset_embs, const Tensor& fid_matrix, double sigma,
                   double weight, Tensor& d_dembs);

// -log( sum_pos exp(d.e_p / tau) / sum_all exp(d.e_m / tau) ).
double loss_contrastive(const Tensor& d_emb, const Tensor& model_embs,
                        const std::vector<std::size_t>& positives, double tau);
void loss_contrastive_grad(const Tensor& d_emb, const Tensor& model_embs,
                           const std::vector<std::size_t>& positives, double tau, double weight,
                           Tensor& d_demb, Tensor& d_membs);

// ---- training ----

struct MetaTrainResult {
    std::vector<double> total;
    std::vector<double> perf;
    std::vector<double> rank;
    std::vector<double> fid;
    std::vector<double> contrastive;
    bool fid_skipped = false;  // single-dataset zoo or lambda_fid == 0
};

MetaTrainResult train_metaspace(MetaSpaceParams& params, const MetaTrainData& data, Rng rng);

// Unit-norm embeddings.
Tensor embed_models(const MetaSpaceParams& params, const Tensor& model_inputs);
Tensor embed_datasets(const MetaSpaceParams& params, const Tensor& dataset_inputs);

// phi(E_m, E_d) for each model row paired with its dataset row.
std::vector<double> predict_performance(const MetaSpaceParams& params, const Tensor& model_embs,
                                        const Tensor& dataset_embs,
                                        const std::vector<std::size_t>& model_dataset);

// Checkpoint: MNNSW001 weights plus JSON header at path + ".json".
void save_metaspace(const std::string& path, const MetaSpaceParams& params);
MetaSpaceParams load_metaspace(const std::string& path);

}  // namespace mednns
