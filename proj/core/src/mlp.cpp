#include "mednns/mlp.hpp"

#include <cmath>

#include "mednns/errors.hpp"

namespace mednns {

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

static float apply_act(Activation a, float v) {
    switch (a) {
        case Activation::Identity: return v;
        case Activation::ReLU: return v > 0.0f ? v : 0.0f;
        case Activation::Sigmoid: return sigmoid(v);
    }
    return v;
}

// Derivative expressed through the post-activation value.
static float act_grad_from_output(Activation a, float y) {
    switch (a) {
        case Activation::Identity: return 1.0f;
        case Activation::ReLU: return y > 0.0f ? 1.0f : 0.0f;
        case Activation::Sigmoid: return y * (1.0f - y);
    }
    return 1.0f;
}

Mlp::Mlp(const std::vector<std::size_t>& dims, Activation hidden_act, Activation out_act, Rng& rng) {
    if (dims.size() < 2) throw DataError("mlp: need at least input and output dims");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        MlpLayer layer;
        layer.weight = Tensor({dims[l + 1], dims[l]});
        layer.bias = Tensor({dims[l + 1]});
        const float std = std::sqrt(2.0f / static_cast<float>(dims[l]));
        for (std::size_t i = 0; i < layer.weight.size(); ++i)
            layer.weight[i] = static_cast<float>(rng.normal(0.0, std));
        layer.act = (l + 2 == dims.size()) ? out_act : hidden_act;
        layers.push_back(std::move(layer));
    }
}

std::size_t Mlp::input_dim() const { return layers.front().weight.dim(1); }
std::size_t Mlp::output_dim() const { return layers.back().weight.dim(0); }

Tensor Mlp::forward(const Tensor& x) const {
    Cache cache;
    return forward(x, cache);
}

Tensor Mlp::forward(const Tensor& x, Cache& cache) const {
    if (x.rank() != 2 || x.dim(1) != input_dim())
        throw DataError("mlp: input shape mismatch " + x.shape_str());
    cache.input = x;
    cache.post.clear();
    const Tensor* cur = &x;
    for (const MlpLayer& layer : layers) {
        const std::size_t n = cur->dim(0), in = layer.weight.dim(1), out = layer.weight.dim(0);
        Tensor y({n, out});
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t o = 0; o < out; ++o) {
                double acc = layer.bias[o];
                for (std::size_t i = 0; i < in; ++i)
                    acc += static_cast<double>(cur->at(r, i)) * layer.weight.at(o, i);
                y.at(r, o) = apply_act(layer.act, static_cast<float>(acc));
            }
        }
        cache.post.push_back(std::move(y));
        cur = &cache.post.back();
    }
    return cache.post.back();
}

Tensor Mlp::backward(const Cache& cache, const Tensor& dout, std::vector<Tensor>& grads) const {
    if (grads.size() != 2 * layers.size())
        throw DataError("mlp backward: grads must align with params()");
    Tensor delta = dout;
    for (std::size_t li = layers.size(); li-- > 0;) {
        const MlpLayer& layer = layers[li];
        const Tensor& y = cache.post[li];
        const Tensor& in = (li == 0) ? cache.input : cache.post[li - 1];
        const std::size_t n = y.dim(0), out = y.dim(1), d_in = in.dim(1);
        // through activation
        Tensor dpre({n, out});
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t o = 0; o < out; ++o)
                dpre.at(r, o) = delta.at(r, o) * act_grad_from_output(layer.act, y.at(r, o));
        Tensor& dw = grads[2 * li];
        Tensor& db = grads[2 * li + 1];
        for (std::size_t o = 0; o < out; ++o) {
            double bacc = db[o];
            for (std::size_t r = 0; r < n; ++r) bacc += dpre.at(r, o);
            db[o] = static_cast<float>(bacc);
            for (std::size_t i = 0; i < d_in; ++i) {
                double acc = dw.at(o, i);
                for (std::size_t r = 0; r < n; ++r)
                    acc += static_cast<double>(dpre.at(r, o)) * in.at(r, i);
                dw.at(o, i) = static_cast<float>(acc);
            }
        }
        Tensor din({n, d_in});
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t i = 0; i < d_in; ++i) {
                double acc = 0.0;
                for (std::size_t o = 0; o < out; ++o)
                    acc += static_cast<double>(dpre.at(r, o)) * layer.weight.at(o, i);
                din.at(r, i) = static_cast<float>(acc);
            }
        delta = std::move(din);
    }
    return delta;
}

std::vector<Tensor*> Mlp::params() {
    std::vector<Tensor*> p;
    for (MlpLayer& layer : layers) {
        p.push_back(&layer.weight);
        p.push_back(&layer.bias);
    }
    return p;
}

std::vector<const Tensor*> Mlp::params() const {
    std::vector<const Tensor*> p;
    for (const MlpLayer& layer : layers) {
        p.push_back(&layer.weight);
        p.push_back(&layer.bias);
    }
    return p;
}

std::vector<Tensor> Mlp::zero_grads() const {
    std::vector<Tensor> g;
    for (const MlpLayer& layer : layers) {
        g.emplace_back(Tensor::zeros(layer.weight.shape()));
        g.emplace_back(Tensor::zeros(layer.bias.shape()));
    }
    return g;
}

Tensor l2_normalize_rows(const Tensor& x) {
    if (x.rank() != 2) throw DataError("l2_normalize_rows: expected matrix");
    Tensor out = x;
    const std::size_t n = x.dim(0), d = x.dim(1);
    for (std::size_t r = 0; r < n; ++r) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < d; ++i) nrm += static_cast<double>(x.at(r, i)) * x.at(r, i);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw NumericError("l2_normalize_rows: zero-norm row");
        for (std::size_t i = 0; i < d; ++i) out.at(r, i) = static_cast<float>(x.at(r, i) / nrm);
    }
    return out;
}

Tensor l2_normalize_rows_backward(const Tensor& x, const Tensor& dnorm) {
    const std::size_t n = x.dim(0), d = x.dim(1);
    Tensor dx({n, d});
    for (std::size_t r = 0; r < n; ++r) {
        double nrm2 = 0.0, xy = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            nrm2 += static_cast<double>(x.at(r, i)) * x.at(r, i);
            xy += static_cast<double>(x.at(r, i)) * dnorm.at(r, i);
        }
        const double nrm = std::sqrt(nrm2);
        // d/dx (x/|x|) = (I - u u^T)/|x| with u = x/|x|
        for (std::size_t i = 0; i < d; ++i)
            dx.at(r, i) = static_cast<float>(dnorm.at(r, i) / nrm -
                                             x.at(r, i) * xy / (nrm2 * nrm));
    }
    return dx;
}

}  // namespace mednns
