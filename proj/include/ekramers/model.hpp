#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ekramers/error.hpp"
#include "ekramers/linalg.hpp"

namespace ekramers {

/// out = f(x). Implementations must not resize `out`.
using FieldFn = std::function<void(const Vec& x, Vec& out)>;
using ScalarFn = std::function<double(const Vec& x)>;
using MatrixFn = std::function<void(const Vec& x, Mat& out)>;

enum class DerivativeMode { analytic, central_difference };
enum class FieldKind { drift, fluctuation };

/// Exact transverse decomposition b = -a grad U + l with <grad U, l> = 0.
/// Only `potential` and `transverse_field` are required; the remaining hooks
/// are analytic derivatives used when the model's derivative mode allows.
struct TransversePair {
    ScalarFn potential;
    FieldFn transverse_field;
    FieldFn potential_gradient;
    MatrixFn potential_hessian;
    MatrixFn transverse_jacobian;
    ScalarFn transverse_divergence;
};

/// A diffusion dX = b(X) dt + sqrt(2 eps) sigma(X) dW in R^d.
struct ModelSpec {
    int dim = 1;
    int noise_dim = 1;
    FieldFn drift;
    MatrixFn sigma;
    /// Optional; defaults to sigma sigma^T.
    MatrixFn diffusion;
    /// Optional analytic Db.
    MatrixFn drift_jacobian;
    /// Optional analytic A_i = sum_j d_j a_ij.
    FieldFn diffusion_divergence;
    /// sigma does not depend on x (A vanishes, Monte Carlo may cache sigma).
    bool constant_noise = false;
    std::optional<TransversePair> transverse;
    DerivativeMode derivative_mode = DerivativeMode::analytic;
    /// Central-difference step; 0 selects max(1e-6, 1e-6 |x_i|).
    double difference_step = 0.0;
    /// Sampling and integration box.
    Vec box_lo;
    Vec box_hi;

    bool has_transverse() const { return transverse.has_value(); }

    bool in_box(const Vec& x) const {
        return ((x.array() >= box_lo.array()) && (x.array() <= box_hi.array())).all();
    }

    double step_for(double xi) const { return difference_step > 0.0 ? difference_step : fd_step(xi); }

    bool use_analytic() const { return derivative_mode == DerivativeMode::analytic; }

    const TransversePair& require_transverse(const char* op) const {
        if (!transverse) fail(ErrorKind::MissingTransverse, std::string(op) + " needs a transverse pair (U, l)");
        return *transverse;
    }

    Vec b(const Vec& x) const {
        Vec out(dim);
        drift(x, out);
        return out;
    }

    Mat sig(const Vec& x) const {
        Mat out(dim, noise_dim);
        sigma(x, out);
        return out;
    }

    Mat a(const Vec& x) const {
        Mat out(dim, dim);
        if (diffusion) {
            diffusion(x, out);
        } else {
            const Mat s = sig(x);
            out.noalias() = s * s.transpose();
        }
        return out;
    }

    double U(const Vec& x) const { return require_transverse("U").potential(x); }

    Vec ell(const Vec& x) const {
        Vec out(dim);
        require_transverse("l").transverse_field(x, out);
        return out;
    }

    Vec grad_U(const Vec& x) const {
        const auto& t = require_transverse("grad U");
        Vec g(dim);
        if (use_analytic() && t.potential_gradient) {
            t.potential_gradient(x, g);
            return g;
        }
        Vec xp = x;
        for (int i = 0; i < dim; ++i) {
            const double h = step_for(x[i]);
            xp[i] = x[i] + h;
            const double up = t.potential(xp);
            xp[i] = x[i] - h;
            const double um = t.potential(xp);
            xp[i] = x[i];
            g[i] = (up - um) / (2.0 * h);
        }
        return g;
    }

    Mat hess_U(const Vec& x) const {
        const auto& t = require_transverse("Hess U");
        Mat hm(dim, dim);
        if (use_analytic() && t.potential_hessian) {
            t.potential_hessian(x, hm);
            return hm;
        }
        const double h = kSecondDerivativeStep;
        Vec y = x;
        for (int i = 0; i < dim; ++i) {
            for (int j = i; j < dim; ++j) {
                auto eval = [&](double si, double sj) {
                    y = x;
                    y[i] += si * h;
                    y[j] += sj * h;
                    return t.potential(y);
                };
                const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * h * h);
                hm(i, j) = v;
                hm(j, i) = v;
            }
        }
        return hm;
    }

    /// Fluctuation field a grad U + l.
    Vec fluctuation(const Vec& x) const { return a(x) * grad_U(x) + ell(x); }
};

namespace detail {

/// Central-difference Jacobian (Df)_ij = d_j f_i.
inline Mat fd_jacobian(const ModelSpec& m, const std::function<Vec(const Vec&)>& f, const Vec& x) {
    Mat jac(m.dim, m.dim);
    Vec xp = x;
    for (int j = 0; j < m.dim; ++j) {
        const double h = m.step_for(x[j]);
        xp[j] = x[j] + h;
        const Vec fp = f(xp);
        xp[j] = x[j] - h;
        const Vec fm = f(xp);
        xp[j] = x[j];
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

inline void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) fail(ErrorKind::NonFiniteValue, std::string(what) + " evaluated to a non-finite value");
}

}  // namespace detail

/// A_i(x) = sum_j d_j a_ij(x).
inline Vec diffusion_divergence(const ModelSpec& m, const Vec& x) {
    Vec out = Vec::Zero(m.dim);
    if (m.constant_noise) return out;
    if (m.use_analytic() && m.diffusion_divergence) {
        m.diffusion_divergence(x, out);
        return out;
    }
    Vec xp = x;
    for (int j = 0; j < m.dim; ++j) {
        const double h = m.step_for(x[j]);
        xp[j] = x[j] + h;
        const Mat ap = m.a(xp);
        xp[j] = x[j] - h;
        const Mat am = m.a(xp);
        xp[j] = x[j];
        out += (ap.col(j) - am.col(j)) / (2.0 * h);
    }
    return out;
}

/// Jacobian of the drift b or of the fluctuation field a grad U + l.
inline Mat jacobian(const ModelSpec& m, FieldKind field, const Vec& x) {
    if (field == FieldKind::drift) {
        detail::require_finite(m.b(x), "drift");
        if (m.use_analytic() && m.drift_jacobian) {
            Mat out(m.dim, m.dim);
            m.drift_jacobian(x, out);
            return out;
        }
        return detail::fd_jacobian(m, [&](const Vec& y) { return m.b(y); }, x);
    }
    const auto& t = m.require_transverse("fluctuation Jacobian");
    detail::require_finite(m.fluctuation(x), "fluctuation field");
    // a Hess U + Dl + (d_k a) grad U in column k; Hess U falls back to nested
    // differences, so grad U is never differentiated numerically a second time.
    Mat dl(m.dim, m.dim);
    if (m.use_analytic() && t.transverse_jacobian) t.transverse_jacobian(x, dl);
    else dl = detail::fd_jacobian(m, [&](const Vec& y) { return m.ell(y); }, x);
    Mat out = m.a(x) * m.hess_U(x) + dl;
    if (!m.constant_noise) {
        const Vec g = m.grad_U(x);
        Vec xp = x;
        for (int k = 0; k < m.dim; ++k) {
            const double h = m.step_for(x[k]);
            xp[k] = x[k] + h;
            const Mat ap = m.a(xp);
            xp[k] = x[k] - h;
            const Mat am = m.a(xp);
            xp[k] = x[k];
            out.col(k) += (ap - am) * g / (2.0 * h);
        }
    }
    return out;
}

/// Divergence of the transverse field l.
inline double transverse_divergence(const ModelSpec& m, const Vec& x) {
    const auto& t = m.require_transverse("div l");
    if (m.use_analytic() && t.transverse_divergence) return t.transverse_divergence(x);
    if (m.use_analytic() && t.transverse_jacobian) {
        Mat dl(m.dim, m.dim);
        t.transverse_jacobian(x, dl);
        return dl.trace();
    }
    return detail::fd_jacobian(m, [&](const Vec& y) { return m.ell(y); }, x).trace();
}

struct TransverseReport {
    double decomposition_residual = 0.0;  ///< max |b + a grad U - l|
    double orthogonality_residual = 0.0;  ///< max |<grad U, l>|
    bool passed = true;
};

inline constexpr double kTransverseTolerance = 1e-9;

inline TransverseReport check_transverse(const ModelSpec& m, const std::vector<Vec>& points) {
    m.require_transverse("check_transverse");
    TransverseReport r;
    for (const auto& x : points) {
        const Vec g = m.grad_U(x);
        const Vec l = m.ell(x);
        r.decomposition_residual = std::max(r.decomposition_residual, (m.b(x) + m.a(x) * g - l).norm());
        r.orthogonality_residual = std::max(r.orthogonality_residual, std::abs(g.dot(l)));
    }
    r.passed = r.decomposition_residual <= kTransverseTolerance && r.orthogonality_residual <= kTransverseTolerance;
    return r;
}

struct DiffusionReport {
    double symmetry_residual = 0.0;
    double min_eigenvalue = 0.0;
    bool passed = true;
};

/// Symmetry and positive definiteness of a(x) over a point set.
inline DiffusionReport check_diffusion(const ModelSpec& m, const std::vector<Vec>& points) {
    DiffusionReport r;
    r.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& x : points) {
        const Mat ax = m.a(x);
        r.symmetry_residual = std::max(r.symmetry_residual, (ax - ax.transpose()).cwiseAbs().maxCoeff());
        r.min_eigenvalue = std::min(r.min_eigenvalue, symmetric_eigenvalues(ax).minCoeff());
    }
    r.passed = r.symmetry_residual <= 1e-12 && r.min_eigenvalue > 0.0;
    return r;
}

/// Uniform random points in the model's box.
inline std::vector<Vec> random_cloud(const ModelSpec& m, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec> pts;
    pts.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Vec x(m.dim);
        for (int i = 0; i < m.dim; ++i) x[i] = m.box_lo[i] + (m.box_hi[i] - m.box_lo[i]) * unit(gen);
        pts.push_back(std::move(x));
    }
    return pts;
}

}  // namespace ekramers
