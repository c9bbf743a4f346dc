#include "mednns/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mednns/errors.hpp"

namespace mednns {

GaussianStats fit_gaussian(const Tensor& features, float eps) {
    if (features.rank() != 2) throw DataError("fit_gaussian: expected n x d matrix");
    const std::size_t n = features.dim(0), d = features.dim(1);
    if (n < 2) throw DataError("fit_gaussian: need at least 2 samples");
    GaussianStats g;
    g.count = n;
    g.mean = Tensor({d});
    for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += features.at(i, j);
        g.mean[j] = static_cast<float>(acc / static_cast<double>(n));
    }
    g.cov = Tensor({d, d});
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = j; k < d; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += (static_cast<double>(features.at(i, j)) - g.mean[j]) *
                       (static_cast<double>(features.at(i, k)) - g.mean[k]);
            const float c = static_cast<float>(acc / static_cast<double>(n - 1));
            g.cov.at(j, k) = c;
            g.cov.at(k, j) = c;
        }
    }
    for (std::size_t j = 0; j < d; ++j) g.cov.at(j, j) += eps;
    return g;
}

EigenDecomposition jacobi_eigh(const Tensor& sym, double tol, int max_sweeps) {
    if (sym.rank() != 2 || sym.dim(0) != sym.dim(1))
        throw DataError("jacobi_eigh: expected a square matrix");
    const std::size_t d = sym.dim(0);
    std::vector<double> a(d * d);
    for (std::size_t i = 0; i < d * d; ++i) a[i] = sym[i];
    std::vector<double> v(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
        if (std::sqrt(off) < tol) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double app = a[p * d + p], aqq = a[q * d + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = a[k * d + p], akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a[p * d + k], aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = v[k * d + p], vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
        if (std::sqrt(off) >= tol)
            throw NumericError("jacobi_eigh: no convergence after max sweeps");
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i * d + i] < a[j * d + j]; });

    EigenDecomposition out;
    out.values.resize(d);
    out.vectors = Tensor({d, d});
    for (std::size_t col = 0; col < d; ++col) {
        out.values[col] = a[order[col] * d + order[col]];
        for (std::size_t row = 0; row < d; ++row)
            out.vectors.at(row, col) = static_cast<float>(v[row * d + order[col]]);
    }
    return out;
}

namespace {

// B = sqrt(A) for symmetric PSD A (negative eigenvalues clamped to 0),
// computed in double precision.
std::vector<double> sqrtm_psd(const std::vector<double>& a, std::size_t d) {
    Tensor at({d, d});
    for (std::size_t i = 0; i < d * d; ++i) at[i] = static_cast<float>(a[i]);
    // Symmetrize against float rounding before decomposition.
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const float m = 0.5f * (at.at(i, j) + at.at(j, i));
            at.at(i, j) = m;
            at.at(j, i) = m;
        }
    const EigenDecomposition eig = jacobi_eigh(at);
    std::vector<double> out(d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        const double lam = std::max(0.0, eig.values[k]);
        const double s = std::sqrt(lam);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                out[i * d + j] += s * eig.vectors.at(i, k) * eig.vectors.at(j, k);
    }
    return out;
}

std::vector<double> matmul_d(const std::vector<double>& a, const std::vector<double>& b, std::size_t d) {
    std::vector<double> c(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const double aik = a[i * d + k];
            for (std::size_t j = 0; j < d; ++j) c[i * d + j] += aik * b[k * d + j];
        }
    return c;
}

}  // namespace

double fid(const GaussianStats& a, const GaussianStats& b) {
    const std::size_t d = a.mean.size();
    if (b.mean.size() != d) throw DataError("fid: dimension mismatch");
    double mean_term = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = static_cast<double>(a.mean[i]) - b.mean[i];
        mean_term += diff * diff;
    }
    std::vector<double> sa(d * d), sb(d * d);
    for (std::size_t i = 0; i < d * d; ++i) {
        sa[i] = a.cov[i];
        sb[i] = b.cov[i];
    }
    // Symmetrized form: tr((Sa^1/2 Sb Sa^1/2)^1/2) equals tr((Sa Sb)^1/2)
    // but stays within symmetric eigensolver territory.
    const std::vector<double> ra = sqrtm_psd(sa, d);
    const std::vector<double> inner = matmul_d(matmul_d(ra, sb, d), ra, d);
    const std::vector<double> cross = sqrtm_psd(inner, d);
    double tr = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        tr += sa[i * d + i] + sb[i * d + i] - 2.0 * cross[i * d + i];
    return std::max(0.0, mean_term + tr);
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DataError("spearman: length mismatch");
    if (x.size() < 3) throw DataError("spearman: need at least 3 points");
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace mednns
