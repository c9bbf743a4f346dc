#pragma once

#include <vector>

#include "mednns/rng.hpp"
#include "mednns/tensor.hpp"

namespace mednns {

enum class Activation { Identity, ReLU, Sigmoid };

struct MlpLayer {
    Tensor weight;  // [out, in]
    Tensor bias;    // [out]
    Activation act = Activation::ReLU;
};

// Small fully-connected network with hand-derived reverse-mode gradients.
class Mlp {
public:
    Mlp() = default;
    // dims = {in, h1, ..., out}; hidden layers use `hidden_act`, the last
    // layer uses `out_act`.
    Mlp(const std::vector<std::size_t>& dims, Activation hidden_act, Activation out_act, Rng& rng);

    std::size_t input_dim() const;
    std::size_t output_dim() const;

    // x: [n, in] -> [n, out]
    Tensor forward(const Tensor& x) const;

    struct Cache {
        Tensor input;
        std::vector<Tensor> post;  // activations after each layer
    };
    Tensor forward(const Tensor& x, Cache& cache) const;

    // dout: [n, out]; accumulates parameter grads and returns dinput.
    Tensor backward(const Cache& cache, const Tensor& dout, std::vector<Tensor>& grads) const;

    std::vector<Tensor*> params();
    std::vector<const Tensor*> params() const;
    std::vector<Tensor> zero_grads() const;

    std::vector<MlpLayer> layers;
};

// Row-wise L2 normalization with backward pass; rows with near-zero norm
// are a numeric error.
Tensor l2_normalize_rows(const Tensor& x);
Tensor l2_normalize_rows_backward(const Tensor& x, const Tensor& dnorm);

float sigmoid(float x);

}  // namespace mednns
