#pragma once

#include <functional>
#include <vector>

#include "mednns/tensor.hpp"

namespace mednns {

// Central-difference check of an analytic gradient.
//
// f evaluates the scalar objective at the current parameter values;
// analytic_grads are the gradients to verify, aligned with params.
// Returns max over entries of |analytic - numeric| / max(1, |numeric|).
double grad_check(const std::function<double()>& f,
                  const std::vector<Tensor*>& params,
                  const std::vector<const Tensor*>& analytic_grads,
                  double eps = 1e-4);

}  // namespace mednns
