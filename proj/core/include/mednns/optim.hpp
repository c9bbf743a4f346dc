#pragma once

#include <cstdint>
#include <vector>

#include "mednns/tensor.hpp"

namespace mednns {

struct AdamConfig {
    float lr = 1e-2f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

// Bias-corrected Adam over a set of parameter tensors.
class AdamState {
public:
    AdamState() = default;
    AdamState(const std::vector<Tensor*>& params, AdamConfig cfg);

    // One update; grads must align with the params passed at construction.
    void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads);

    std::uint64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::uint64_t step_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace mednns
