#pragma once

#include <cstdint>
#include <vector>

#include "mednns/rng.hpp"
#include "mednns/tensor.hpp"

namespace mednns {

// 3x3 convolution, zero padding 1. Input [n, ic, h, w], weight [oc, ic, 3, 3].
Tensor conv2d(const Tensor& input, const Tensor& weight, std::size_t stride);
Tensor conv2d_backward_input(const Tensor& dout, const Tensor& weight, std::size_t stride,
                             std::size_t in_h, std::size_t in_w);
void conv2d_backward_weight(const Tensor& input, const Tensor& dout, std::size_t stride,
                            Tensor& dweight);

struct StageDims {
    std::size_t channels = 16;  // stage feature-map channels
    std::size_t hidden = 16;    // block bottleneck channels
    std::size_t depth = 2;      // residual blocks in the stage
};

struct NetDims {
    std::size_t in_channels = 1;
    std::size_t in_h = 16;
    std::size_t in_w = 16;
    std::size_t num_classes = 4;
    std::size_t stem_channels = 16;
    std::vector<StageDims> stages;

    std::size_t penult_channels() const { return stages.back().channels; }
};

// ResNet-like classifier: stem conv + per-stage stride-2 downsample and
// bias-free residual blocks y = x + W2 relu(W1 x), global average pool,
// linear head. Bias-free blocks make a fully zeroed block an exact identity.
class ConvNet {
public:
    ConvNet() = default;
    ConvNet(NetDims dims, Rng& rng);                      // He-initialized
    ConvNet(NetDims dims, std::vector<Tensor> params);    // from existing weights

    const NetDims& net_dims() const { return dims_; }

    // Parameter order: stem, then per stage [down, (w1, w2) x depth],
    // then head weight, head bias.
    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }
    std::vector<Tensor*> param_ptrs();
    std::vector<Tensor> zero_grads() const;

    std::size_t stem_index() const { return 0; }
    std::size_t down_index(std::size_t stage) const;
    std::size_t block_w1_index(std::size_t stage, std::size_t block) const;
    std::size_t block_w2_index(std::size_t stage, std::size_t block) const;
    std::size_t head_w_index() const { return params_.size() - 2; }
    std::size_t head_b_index() const { return params_.size() - 1; }

    struct Cache {
        Tensor input;
        Tensor stem_out;                          // post-ReLU
        std::vector<Tensor> down_out;             // per stage, post-ReLU
        std::vector<std::vector<Tensor>> block_hidden;  // per stage/block, post-ReLU
        std::vector<std::vector<Tensor>> block_out;     // per stage/block (after residual add)
        Tensor pooled;                            // [n, penult]
    };

    Tensor forward(const Tensor& x) const;
    Tensor forward(const Tensor& x, Cache& cache) const;
    // Post-pool, pre-head features.
    Tensor penultimate(const Tensor& x) const;

    // Accumulates parameter grads (aligned with params order).
    void backward(const Cache& cache, const Tensor& dlogits, std::vector<Tensor>& grads) const;

private:
    NetDims dims_;
    std::vector<Tensor> params_;
    void check_layout() const;
};

struct CeResult {
    double loss = 0.0;
    double accuracy = 0.0;
    Tensor dlogits;  // gradient of mean cross-entropy
};
CeResult softmax_cross_entropy(const Tensor& logits, const std::vector<std::uint16_t>& labels);

double batch_accuracy(const Tensor& logits, const std::vector<std::uint16_t>& labels);

}  // namespace mednns
