#include "mednns/optim.hpp"

#include <cmath>

#include "mednns/errors.hpp"

namespace mednns {

AdamState::AdamState(const std::vector<Tensor*>& params, AdamConfig cfg) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor* p : params) {
        m_.emplace_back(Tensor::zeros(p->shape()));
        v_.emplace_back(Tensor::zeros(p->shape()));
    }
}

void AdamState::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw DataError("adam: parameter/gradient count mismatch");
    step_ += 1;
    const double bc1 = 1.0 - std::pow(static_cast<double>(cfg_.beta1), static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(static_cast<double>(cfg_.beta2), static_cast<double>(step_));
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor& p = *params[t];
        const Tensor& g = *grads[t];
        if (!p.same_shape(g) || !p.same_shape(m_[t]))
            throw DataError("adam: gradient shape mismatch " + p.shape_str() + " vs " + g.shape_str());
        if (!g.all_finite()) throw NumericError("adam: non-finite gradient");
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g[i];
            m_[t][i] = static_cast<float>(cfg_.beta1 * m_[t][i] + (1.0 - cfg_.beta1) * gi);
            v_[t][i] = static_cast<float>(cfg_.beta2 * v_[t][i] + (1.0 - cfg_.beta2) * gi * gi);
            const double mhat = m_[t][i] / bc1;
            const double vhat = v_[t][i] / bc2;
            p[i] = static_cast<float>(p[i] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
        }
    }
}

}  // namespace mednns
