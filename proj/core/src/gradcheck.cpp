#include "mednns/gradcheck.hpp"

#include <cmath>

#include "mednns/errors.hpp"

namespace mednns {

double grad_check(const std::function<double()>& f,
                  const std::vector<Tensor*>& params,
                  const std::vector<const Tensor*>& analytic_grads,
                  double eps) {
    if (params.size() != analytic_grads.size())
        throw DataError("grad_check: params/grads count mismatch");
    double worst = 0.0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor& p = *params[t];
        const Tensor& g = *analytic_grads[t];
        if (!p.same_shape(g)) throw DataError("grad_check: gradient shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            const float saved = p[i];
            p[i] = static_cast<float>(saved + eps);
            const double xp = p[i];
            const double fp = f();
            p[i] = static_cast<float>(saved - eps);
            const double xm = p[i];
            const double fm = f();
            p[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw NumericError("grad_check: non-finite objective");
            // Divide by the step actually realized after float32 rounding.
            const double numeric = (fp - fm) / (xp - xm);
            const double err = std::fabs(static_cast<double>(g[i]) - numeric) /
                               std::max(1.0, std::fabs(numeric));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace mednns
