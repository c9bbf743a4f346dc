#include "mednns/resnet.hpp"

#include <cmath>

#include "mednns/errors.hpp"

namespace mednns {

namespace {

std::size_t out_dim(std::size_t in, std::size_t stride) { return (in - 1) / stride + 1; }

bool all_zero(const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] != 0.0f) return false;
    return true;
}

void relu_inplace(Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] < 0.0f) t[i] = 0.0f;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, std::size_t stride) {
    if (input.rank() != 4 || weight.rank() != 4)
        throw DataError("conv2d: expected 4-D input and weight");
    const std::size_t n = input.dim(0), ic = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::size_t oc = weight.dim(0);
    if (weight.dim(1) != ic || weight.dim(2) != 3 || weight.dim(3) != 3)
        throw DataError("conv2d: weight shape mismatch " + weight.shape_str());
    const std::size_t oh = out_dim(h, stride), ow = out_dim(w, stride);
    Tensor out({n, oc, oh, ow});
    const std::size_t in_img = ic * h * w, out_img = oc * oh * ow;
    for (std::size_t b = 0; b < n; ++b) {
        const float* in_p = input.data() + b * in_img;
        float* out_p = out.data() + b * out_img;
        for (std::size_t o = 0; o < oc; ++o) {
            const float* w_oc = weight.data() + o * ic * 9;
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    double acc = 0.0;
                    const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * stride) - 1;
                    const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * stride) - 1;
                    for (std::size_t i = 0; i < ic; ++i) {
                        const float* in_c = in_p + i * h * w;
                        const float* w_c = w_oc + i * 9;
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const std::ptrdiff_t y = y0 + static_cast<std::ptrdiff_t>(ky);
                            if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t kx = 0; kx < 3; ++kx) {
                                const std::ptrdiff_t x = x0 + static_cast<std::ptrdiff_t>(kx);
                                if (x < 0 || x >= static_cast<std::ptrdiff_t>(w)) continue;
                                acc += static_cast<double>(in_c[y * static_cast<std::ptrdiff_t>(w) + x]) *
                                       w_c[ky * 3 + kx];
                            }
                        }
                    }
                    out_p[o * oh * ow + oy * ow + ox] = static_cast<float>(acc);
                }
            }
        }
    }
    return out;
}

Tensor conv2d_backward_input(const Tensor& dout, const Tensor& weight, std::size_t stride,
                             std::size_t in_h, std::size_t in_w) {
    const std::size_t n = dout.dim(0), oc = dout.dim(1), oh = dout.dim(2), ow = dout.dim(3);
    const std::size_t ic = weight.dim(1);
    Tensor din({n, ic, in_h, in_w});
    for (std::size_t b = 0; b < n; ++b) {
        float* din_p = din.data() + b * ic * in_h * in_w;
        const float* dout_p = dout.data() + b * oc * oh * ow;
        for (std::size_t o = 0; o < oc; ++o) {
            const float* w_oc = weight.data() + o * ic * 9;
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    const float g = dout_p[o * oh * ow + oy * ow + ox];
                    if (g == 0.0f) continue;
                    const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * stride) - 1;
                    const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * stride) - 1;
                    for (std::size_t i = 0; i < ic; ++i) {
                        float* din_c = din_p + i * in_h * in_w;
                        const float* w_c = w_oc + i * 9;
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const std::ptrdiff_t y = y0 + static_cast<std::ptrdiff_t>(ky);
                            if (y < 0 || y >= static_cast<std::ptrdiff_t>(in_h)) continue;
                            for (std::size_t kx = 0; kx < 3; ++kx) {
                                const std::ptrdiff_t x = x0 + static_cast<std::ptrdiff_t>(kx);
                                if (x < 0 || x >= static_cast<std::ptrdiff_t>(in_w)) continue;
                                din_c[y * static_cast<std::ptrdiff_t>(in_w) + x] += g * w_c[ky * 3 + kx];
                            }
                        }
                    }
                }
            }
        }
    }
    return din;
}

void conv2d_backward_weight(const Tensor& input, const Tensor& dout, std::size_t stride,
                            Tensor& dweight) {
    const std::size_t n = input.dim(0), ic = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::size_t oc = dout.dim(1), oh = dout.dim(2), ow = dout.dim(3);
    if (dweight.dim(0) != oc || dweight.dim(1) != ic)
        throw DataError("conv2d_backward_weight: dweight shape mismatch");
    for (std::size_t o = 0; o < oc; ++o) {
        for (std::size_t i = 0; i < ic; ++i) {
            for (std::size_t ky = 0; ky < 3; ++ky) {
                for (std::size_t kx = 0; kx < 3; ++kx) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b < n; ++b) {
                        const float* in_c = input.data() + (b * ic + i) * h * w;
                        const float* dout_c = dout.data() + (b * oc + o) * oh * ow;
                        for (std::size_t oy = 0; oy < oh; ++oy) {
                            const std::ptrdiff_t y =
                                static_cast<std::ptrdiff_t>(oy * stride) + static_cast<std::ptrdiff_t>(ky) - 1;
                            if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t ox = 0; ox < ow; ++ox) {
                                const std::ptrdiff_t x =
                                    static_cast<std::ptrdiff_t>(ox * stride) + static_cast<std::ptrdiff_t>(kx) - 1;
                                if (x < 0 || x >= static_cast<std::ptrdiff_t>(w)) continue;
                                acc += static_cast<double>(in_c[y * static_cast<std::ptrdiff_t>(w) + x]) *
                                       dout_c[oy * ow + ox];
                            }
                        }
                    }
                    dweight[((o * ic + i) * 3 + ky) * 3 + kx] += static_cast<float>(acc);
                }
            }
        }
    }
}

ConvNet::ConvNet(NetDims dims, Rng& rng) : dims_(std::move(dims)) {
    if (dims_.stages.empty()) throw DataError("ConvNet: no stages");
    auto he_init = [&rng](Tensor& t, std::size_t fan_in) {
        const float std = std::sqrt(2.0f / static_cast<float>(fan_in));
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = static_cast<float>(rng.normal(0.0, std));
    };
    params_.emplace_back(Tensor({dims_.stem_channels, dims_.in_channels, 3, 3}));
    he_init(params_.back(), dims_.in_channels * 9);
    std::size_t prev = dims_.stem_channels;
    for (const StageDims& st : dims_.stages) {
        params_.emplace_back(Tensor({st.channels, prev, 3, 3}));
        he_init(params_.back(), prev * 9);
        for (std::size_t b = 0; b < st.depth; ++b) {
            params_.emplace_back(Tensor({st.hidden, st.channels, 3, 3}));
            he_init(params_.back(), st.channels * 9);
            params_.emplace_back(Tensor({st.channels, st.hidden, 3, 3}));
            he_init(params_.back(), st.hidden * 9);
        }
        prev = st.channels;
    }
    params_.emplace_back(Tensor({dims_.num_classes, prev}));
    he_init(params_.back(), prev);
    params_.emplace_back(Tensor({dims_.num_classes}));
}

ConvNet::ConvNet(NetDims dims, std::vector<Tensor> params)
    : dims_(std::move(dims)), params_(std::move(params)) {
    check_layout();
}

void ConvNet::check_layout() const {
    std::size_t expected = 1;
    for (const StageDims& st : dims_.stages) expected += 1 + 2 * st.depth;
    expected += 2;
    if (params_.size() != expected)
        throw DataError("ConvNet: parameter count does not match dims");
}

std::size_t ConvNet::down_index(std::size_t stage) const {
    std::size_t idx = 1;
    for (std::size_t s = 0; s < stage; ++s) idx += 1 + 2 * dims_.stages[s].depth;
    return idx;
}

std::size_t ConvNet::block_w1_index(std::size_t stage, std::size_t block) const {
    return down_index(stage) + 1 + 2 * block;
}

std::size_t ConvNet::block_w2_index(std::size_t stage, std::size_t block) const {
    return block_w1_index(stage, block) + 1;
}

std::vector<Tensor*> ConvNet::param_ptrs() {
    std::vector<Tensor*> p;
    for (Tensor& t : params_) p.push_back(&t);
    return p;
}

std::vector<Tensor> ConvNet::zero_grads() const {
    std::vector<Tensor> g;
    for (const Tensor& t : params_) g.emplace_back(Tensor::zeros(t.shape()));
    return g;
}

Tensor ConvNet::forward(const Tensor& x) const {
    Cache cache;
    return forward(x, cache);
}

Tensor ConvNet::forward(const Tensor& x, Cache& cache) const {
    if (x.rank() != 4 || x.dim(1) != dims_.in_channels || x.dim(2) != dims_.in_h ||
        x.dim(3) != dims_.in_w)
        throw DataError("ConvNet::forward: input shape mismatch " + x.shape_str());
    cache.input = x;
    cache.stem_out = conv2d(x, params_[stem_index()], 1);
    relu_inplace(cache.stem_out);
    cache.down_out.clear();
    cache.block_hidden.assign(dims_.stages.size(), {});
    cache.block_out.assign(dims_.stages.size(), {});

    const Tensor* cur = &cache.stem_out;
    for (std::size_t s = 0; s < dims_.stages.size(); ++s) {
        const StageDims& st = dims_.stages[s];
        Tensor down = conv2d(*cur, params_[down_index(s)], 2);
        relu_inplace(down);
        cache.down_out.push_back(std::move(down));
        cur = &cache.down_out.back();
        for (std::size_t b = 0; b < st.depth; ++b) {
            const Tensor& w1 = params_[block_w1_index(s, b)];
            const Tensor& w2 = params_[block_w2_index(s, b)];
            if (all_zero(w1) && all_zero(w2)) {
                // Masked-out block: exact identity.
                cache.block_hidden[s].push_back(Tensor::zeros(
                    {cur->dim(0), st.hidden, cur->dim(2), cur->dim(3)}));
                cache.block_out[s].push_back(*cur);
                cur = &cache.block_out[s].back();
                continue;
            }
            Tensor hidden = conv2d(*cur, w1, 1);
            relu_inplace(hidden);
            Tensor f = conv2d(hidden, w2, 1);
            Tensor y = add(*cur, f);
            cache.block_hidden[s].push_back(std::move(hidden));
            cache.block_out[s].push_back(std::move(y));
            cur = &cache.block_out[s].back();
        }
    }

    // Global average pool.
    const std::size_t n = cur->dim(0), c = cur->dim(1), sp = cur->dim(2) * cur->dim(3);
    cache.pooled = Tensor({n, c});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            const float* p = cur->data() + (b * c + ch) * sp;
            for (std::size_t i = 0; i < sp; ++i) acc += p[i];
            cache.pooled.at(b, ch) = static_cast<float>(acc / static_cast<double>(sp));
        }

    const Tensor& hw = params_[head_w_index()];
    const Tensor& hb = params_[head_b_index()];
    Tensor logits({n, dims_.num_classes});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t k = 0; k < dims_.num_classes; ++k) {
            double acc = hb[k];
            for (std::size_t ch = 0; ch < c; ++ch)
                acc += static_cast<double>(cache.pooled.at(b, ch)) * hw.at(k, ch);
            logits.at(b, k) = static_cast<float>(acc);
        }
    return logits;
}

Tensor ConvNet::penultimate(const Tensor& x) const {
    Cache cache;
    forward(x, cache);
    return cache.pooled;
}

void ConvNet::backward(const Cache& cache, const Tensor& dlogits, std::vector<Tensor>& grads) const {
    if (grads.size() != params_.size())
        throw DataError("ConvNet::backward: grads must align with params");
    const std::size_t n = dlogits.dim(0);
    const Tensor& hw = params_[head_w_index()];
    const std::size_t c = hw.dim(1);

    // Head.
    Tensor& dhw = grads[head_w_index()];
    Tensor& dhb = grads[head_b_index()];
    for (std::size_t k = 0; k < dims_.num_classes; ++k) {
        double bacc = dhb[k];
        for (std::size_t b = 0; b < n; ++b) bacc += dlogits.at(b, k);
        dhb[k] = static_cast<float>(bacc);
        for (std::size_t ch = 0; ch < c; ++ch) {
            double acc = dhw.at(k, ch);
            for (std::size_t b = 0; b < n; ++b)
                acc += static_cast<double>(dlogits.at(b, k)) * cache.pooled.at(b, ch);
            dhw.at(k, ch) = static_cast<float>(acc);
        }
    }
    Tensor dpool({n, c});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (std::size_t k = 0; k < dims_.num_classes; ++k)
                acc += static_cast<double>(dlogits.at(b, k)) * hw.at(k, ch);
            dpool.at(b, ch) = static_cast<float>(acc);
        }

    // Un-pool.
    const std::size_t last = dims_.stages.size() - 1;
    const Tensor& last_map = dims_.stages[last].depth > 0 ? cache.block_out[last].back()
                                                          : cache.down_out[last];
    const std::size_t oh = last_map.dim(2), ow = last_map.dim(3), sp = oh * ow;
    Tensor dcur({n, c, oh, ow});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch) {
            const float g = dpool.at(b, ch) / static_cast<float>(sp);
            float* p = dcur.data() + (b * c + ch) * sp;
            for (std::size_t i = 0; i < sp; ++i) p[i] = g;
        }

    // Stages in reverse.
    for (std::size_t s = dims_.stages.size(); s-- > 0;) {
        const StageDims& st = dims_.stages[s];
        for (std::size_t b = st.depth; b-- > 0;) {
            const Tensor& w1 = params_[block_w1_index(s, b)];
            const Tensor& w2 = params_[block_w2_index(s, b)];
            if (all_zero(w1) && all_zero(w2)) continue;  // identity block: dcur flows through
            const Tensor& block_in = (b == 0) ? cache.down_out[s] : cache.block_out[s][b - 1];
            const Tensor& hidden = cache.block_hidden[s][b];
            // y = x + w2*relu(w1*x)
            Tensor dhidden = conv2d_backward_input(dcur, w2, 1, hidden.dim(2), hidden.dim(3));
            conv2d_backward_weight(hidden, dcur, 1, grads[block_w2_index(s, b)]);
            for (std::size_t i = 0; i < dhidden.size(); ++i)
                if (hidden[i] <= 0.0f) dhidden[i] = 0.0f;
            Tensor dx = conv2d_backward_input(dhidden, w1, 1, block_in.dim(2), block_in.dim(3));
            conv2d_backward_weight(block_in, dhidden, 1, grads[block_w1_index(s, b)]);
            add_inplace(dcur, dx);
        }
        // Downsample conv (post-ReLU output cached).
        const Tensor& down = cache.down_out[s];
        Tensor ddown = dcur;
        for (std::size_t i = 0; i < ddown.size(); ++i)
            if (down[i] <= 0.0f) ddown[i] = 0.0f;
        const Tensor& stage_in = (s == 0) ? cache.stem_out : (dims_.stages[s - 1].depth > 0
                                      ? cache.block_out[s - 1].back()
                                      : cache.down_out[s - 1]);
        conv2d_backward_weight(stage_in, ddown, 2, grads[down_index(s)]);
        dcur = conv2d_backward_input(ddown, params_[down_index(s)], 2, stage_in.dim(2), stage_in.dim(3));
    }

    // Stem.
    Tensor dstem = dcur;
    for (std::size_t i = 0; i < dstem.size(); ++i)
        if (cache.stem_out[i] <= 0.0f) dstem[i] = 0.0f;
    conv2d_backward_weight(cache.input, dstem, 1, grads[stem_index()]);
}

CeResult softmax_cross_entropy(const Tensor& logits, const std::vector<std::uint16_t>& labels) {
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    if (labels.size() != n) throw DataError("softmax_cross_entropy: label count mismatch");
    CeResult res;
    res.dlogits = Tensor({n, k});
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t b = 0; b < n; ++b) {
        double mx = logits.at(b, 0);
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (logits.at(b, j) > mx) {
                mx = logits.at(b, j);
                argmax = j;
            }
        if (argmax == labels[b]) ++correct;
        double z = 0.0;
        for (std::size_t j = 0; j < k; ++j) z += std::exp(static_cast<double>(logits.at(b, j)) - mx);
        const double logz = std::log(z) + mx;
        loss += logz - logits.at(b, labels[b]);
        for (std::size_t j = 0; j < k; ++j) {
            const double p = std::exp(static_cast<double>(logits.at(b, j)) - logz);
            res.dlogits.at(b, j) = static_cast<float>((p - (j == labels[b] ? 1.0 : 0.0)) /
                                                      static_cast<double>(n));
        }
    }
    res.loss = loss / static_cast<double>(n);
    res.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (!std::isfinite(res.loss)) throw NumericError("softmax_cross_entropy: non-finite loss");
    return res;
}

double batch_accuracy(const Tensor& logits, const std::vector<std::uint16_t>& labels) {
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    std::size_t correct = 0;
    for (std::size_t b = 0; b < n; ++b) {
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (logits.at(b, j) > logits.at(b, argmax)) argmax = j;
        if (argmax == labels[b]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace mednns
