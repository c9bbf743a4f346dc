// Double-precision reference forwards used as independent oracles for the
// finite-difference gradient checks. The production networks run in float32,
// whose rounding noise (~1e-7 per op) would swamp a central difference taken
// at small eps; these mirrors evaluate the same math exactly in float64 from
// the stored float32 parameters.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mednns/mlp.hpp"
#include "mednns/resnet.hpp"
#include "mednns/tensor.hpp"

namespace mednns::refd {

using DVec = std::vector<double>;

// [n, c, h, w] stored flat.
struct DImage {
    std::size_t n = 0, c = 0, h = 0, w = 0;
    DVec data;
    double& at(std::size_t b, std::size_t ch, std::size_t y, std::size_t x) {
        return data[((b * c + ch) * h + y) * w + x];
    }
    double at(std::size_t b, std::size_t ch, std::size_t y, std::size_t x) const {
        return data[((b * c + ch) * h + y) * w + x];
    }
};

inline DImage from_tensor4(const Tensor& t) {
    DImage img;
    img.n = t.dim(0);
    img.c = t.dim(1);
    img.h = t.dim(2);
    img.w = t.dim(3);
    img.data.assign(t.data(), t.data() + t.size());
    return img;
}

// 3x3 convolution, zero padding 1, matching mednns::conv2d.
inline DImage conv2d(const DImage& in, const Tensor& weight, std::size_t stride) {
    const std::size_t oc = weight.dim(0), ic = weight.dim(1);
    DImage out;
    out.n = in.n;
    out.c = oc;
    out.h = (in.h + 2 - 3) / stride + 1;
    out.w = (in.w + 2 - 3) / stride + 1;
    out.data.assign(out.n * out.c * out.h * out.w, 0.0);
    for (std::size_t b = 0; b < in.n; ++b)
        for (std::size_t o = 0; o < oc; ++o)
            for (std::size_t oy = 0; oy < out.h; ++oy)
                for (std::size_t ox = 0; ox < out.w; ++ox) {
                    double acc = 0.0;
                    const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * stride) - 1;
                    const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * stride) - 1;
                    for (std::size_t i = 0; i < ic; ++i)
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const std::ptrdiff_t y = y0 + static_cast<std::ptrdiff_t>(ky);
                            if (y < 0 || y >= static_cast<std::ptrdiff_t>(in.h)) continue;
                            for (std::size_t kx = 0; kx < 3; ++kx) {
                                const std::ptrdiff_t x = x0 + static_cast<std::ptrdiff_t>(kx);
                                if (x < 0 || x >= static_cast<std::ptrdiff_t>(in.w)) continue;
                                acc += in.at(b, i, static_cast<std::size_t>(y),
                                             static_cast<std::size_t>(x)) *
                                       static_cast<double>(
                                           weight[((o * ic + i) * 3 + ky) * 3 + kx]);
                            }
                        }
                    out.at(b, o, oy, ox) = acc;
                }
    return out;
}

inline void relu(DImage& img) {
    for (double& v : img.data) v = v > 0.0 ? v : 0.0;
}

// Mean softmax cross-entropy of the ConvNet on x/labels, all in float64.
inline double convnet_ce_loss(const ConvNet& net, const Tensor& x,
                              const std::vector<std::uint16_t>& labels) {
    const NetDims& dims = net.net_dims();
    DImage cur = conv2d(from_tensor4(x), net.params()[net.stem_index()], 1);
    relu(cur);
    for (std::size_t s = 0; s < dims.stages.size(); ++s) {
        DImage down = conv2d(cur, net.params()[net.down_index(s)], 2);
        relu(down);
        cur = std::move(down);
        for (std::size_t b = 0; b < dims.stages[s].depth; ++b) {
            DImage hidden = conv2d(cur, net.params()[net.block_w1_index(s, b)], 1);
            relu(hidden);
            DImage f = conv2d(hidden, net.params()[net.block_w2_index(s, b)], 1);
            for (std::size_t i = 0; i < cur.data.size(); ++i) cur.data[i] += f.data[i];
        }
    }
    // Global average pool + linear head.
    const Tensor& hw = net.params()[net.head_w_index()];
    const Tensor& hb = net.params()[net.head_b_index()];
    const std::size_t n = cur.n, c = cur.c, sp = cur.h * cur.w;
    double loss = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
        DVec pooled(c, 0.0);
        for (std::size_t ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (std::size_t i = 0; i < sp; ++i) acc += cur.data[(b * c + ch) * sp + i];
            pooled[ch] = acc / static_cast<double>(sp);
        }
        DVec logits(dims.num_classes, 0.0);
        double max_logit = -1e300;
        for (std::size_t k = 0; k < dims.num_classes; ++k) {
            double acc = hb[k];
            for (std::size_t ch = 0; ch < c; ++ch)
                acc += pooled[ch] * static_cast<double>(hw.at(k, ch));
            logits[k] = acc;
            max_logit = std::max(max_logit, acc);
        }
        double denom = 0.0;
        for (double l : logits) denom += std::exp(l - max_logit);
        loss += -(logits[labels[b]] - max_logit - std::log(denom));
    }
    return loss / static_cast<double>(n);
}

// MLP forward in float64 (affine + activation per layer), matching Mlp.
inline DVec mlp_forward(const Mlp& net, const DVec& x_rows, std::size_t n) {
    DVec cur = x_rows;
    std::size_t cur_dim = net.input_dim();
    for (const MlpLayer& layer : net.layers) {
        const std::size_t out_dim = layer.weight.dim(0);
        DVec next(n * out_dim, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t o = 0; o < out_dim; ++o) {
                double acc = layer.bias[o];
                for (std::size_t i = 0; i < cur_dim; ++i)
                    acc += cur[r * cur_dim + i] * static_cast<double>(layer.weight.at(o, i));
                switch (layer.act) {
                    case Activation::ReLU: acc = acc > 0.0 ? acc : 0.0; break;
                    case Activation::Sigmoid: acc = 1.0 / (1.0 + std::exp(-acc)); break;
                    case Activation::Identity: break;
                }
                next[r * out_dim + o] = acc;
            }
        cur = std::move(next);
        cur_dim = out_dim;
    }
    return cur;
}

// Row-wise L2 normalization in float64.
inline DVec l2_normalize_rows(const DVec& x, std::size_t n, std::size_t d) {
    DVec out(x.size());
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += x[r * d + c] * x[r * d + c];
        const double nrm = std::sqrt(s);
        for (std::size_t c = 0; c < d; ++c) out[r * d + c] = x[r * d + c] / nrm;
    }
    return out;
}

}  // namespace mednns::refd
