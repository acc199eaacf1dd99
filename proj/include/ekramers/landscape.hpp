#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include "ekramers/dynamics.hpp"
#include "ekramers/error.hpp"
#include "ekramers/lyapunov.hpp"
#include "ekramers/model.hpp"
#include "ekramers/ode.hpp"
#include "ekramers/path.hpp"

namespace ekramers {

/// V(x_bar, x) = U(x) - U(x_bar).
inline double quasipotential(const ModelSpec& m, const Vec& attractor, const Vec& x) {
    return m.U(x) - m.U(attractor);
}

/// <grad U, a grad U> + <b, grad U>; vanishes for a valid transverse pair.
inline double hj_residual(const ModelSpec& m, const Vec& x) {
    const Vec g = m.grad_U(x);
    return g.dot(m.a(x) * g) + m.b(x).dot(g);
}

/// Non-Gibbsianness F = div l + <A, grad U>.
inline double f_function(const ModelSpec& m, const Vec& x) {
    m.require_transverse("F");
    return transverse_divergence(m, x) + diffusion_divergence(m, x).dot(m.grad_U(x));
}

/// Integral of F over the path's time grid. On flow segments of fluctuation
/// and instanton paths the trapezoid gets the Hermite end correction
/// h^2/12 (F'_a - F'_b) with F' = <grad F, a grad U + l>; the unit-time
/// attachment segments at the endpoints use the plain trapezoid.
inline double f_integral_along(const ModelSpec& m, const Path& p) {
    p.validate();
    const bool flow = p.kind == PathKind::fluctuation || p.kind == PathKind::instanton;
    auto rate = [&](const Vec& x) {
        const double h = 1e-5;
        Vec g(m.dim);
        Vec y = x;
        for (int i = 0; i < m.dim; ++i) {
            y[i] = x[i] + h;
            const double fp = f_function(m, y);
            y[i] = x[i] - h;
            const double fm = f_function(m, y);
            y[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        return g.dot(m.fluctuation(x));
    };
    double acc = 0.0;
    double f_prev = f_function(m, p.points.front());
    double r_prev = flow ? rate(p.points.front()) : 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        const double dt = p.times[k] - p.times[k - 1];
        const double f = f_function(m, p.points[k]);
        const double r = flow ? rate(p.points[k]) : 0.0;
        acc += 0.5 * (f + f_prev) * dt;
        if (flow && dt <= kFlowMaxStep * (1.0 + 1e-9)) acc += dt * dt / 12.0 * (r_prev - r);
        f_prev = f;
        r_prev = r;
    }
    return acc;
}

struct PrefactorData {
    double c_at_attractor = 0.0;
    double f_integral = 0.0;
    double c_value = 0.0;
    Mat attractor_hessian;
    Path fluctuation_path;  ///< attractor -> x (two samples when x is the attractor)
};

struct ReachabilityOptions {
    double time_cap = 1e3;
    double arrival_tol = 1e-6;  ///< reachability criterion
    double landing_tol = 1e-10; ///< where the ray is truncated when reachable
    double integrator_tol = 1e-12;
};

/// Fluctuation trajectory from the attractor terminated at x, obtained by
/// running the fluctuation field backward from x. UnreachablePoint if the
/// backward flow does not settle on the attractor.
inline Path fluctuation_ray(const ModelSpec& m, const Vec& attractor, const Vec& x, const ReachabilityOptions& opt = {}) {
    m.require_transverse("fluctuation_ray");
    if ((x - attractor).norm() <= opt.landing_tol) {
        return Path{{0.0, 1.0}, {attractor, x}, PathKind::fluctuation};
    }
    ode::Options o;
    o.rtol = o.atol = opt.integrator_tol;
    o.h_max = kFlowMaxStep;
    bool escaped = false;
    auto rhs = [&](const Vec& y, Vec& out) { out = -m.fluctuation(y); };
    auto stop = [&](double, const Vec& y, const Vec& f) {
        if (!y.allFinite() || !m.in_box(y)) {
            escaped = true;
            return true;
        }
        return (y - attractor).norm() <= opt.landing_tol || f.norm() < 1e-14;
    };
    ode::Solution sol = ode::integrate(rhs, x, 0.0, opt.time_cap, o, stop);
    const double gap = (sol.x.back() - attractor).norm();
    if (escaped || !(gap <= opt.arrival_tol))
        fail(ErrorKind::UnreachablePoint, "no fluctuation trajectory from the attractor reaches this point");
    Path p;
    p.kind = PathKind::fluctuation;
    const double total = sol.t.back();
    p.times.push_back(0.0);
    p.points.push_back(attractor);
    for (std::size_t k = sol.t.size(); k-- > 0;) {
        p.times.push_back(1.0 + total - sol.t[k]);
        p.points.push_back(sol.x[k]);
    }
    return p;
}

/// sqrt(det H / (2 pi)^d).
inline double laplace_normalization(const Mat& h) {
    const double d = static_cast<double>(h.rows());
    return std::sqrt(h.determinant() / std::pow(2.0 * std::numbers::pi, d));
}

/// C_st(x) = C_st(x_bar) exp(-int F) along the fluctuation ray ending at x.
/// `attractor_hessian` may be supplied to skip the Lyapunov solve.
inline PrefactorData stationary_prefactor(const ModelSpec& m, const Vec& attractor, const Vec& x,
                                          const std::optional<Mat>& attractor_hessian = std::nullopt,
                                          const ReachabilityOptions& opt = {}) {
    m.require_transverse("stationary_prefactor");
    PrefactorData p;
    p.attractor_hessian =
        attractor_hessian ? *attractor_hessian : quasipotential_hessian(m, attractor, EquilibriumKind::attractor).h;
    p.c_at_attractor = laplace_normalization(p.attractor_hessian);
    p.fluctuation_path = fluctuation_ray(m, attractor, x, opt);
    p.f_integral = p.fluctuation_path.size() > 2 ? f_integral_along(m, p.fluctuation_path) : 0.0;
    p.c_value = p.c_at_attractor * std::exp(-p.f_integral);
    return p;
}

/// C_st(x) eps^{-d/2} exp(-V(x_bar, x) / eps).
inline double ensemble_density(const ModelSpec& m, const Vec& attractor, const Vec& x, double epsilon,
                               const std::optional<Mat>& attractor_hessian = std::nullopt) {
    if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
    const PrefactorData p = stationary_prefactor(m, attractor, x, attractor_hessian);
    return p.c_value / std::pow(epsilon, 0.5 * m.dim) * std::exp(-quasipotential(m, attractor, x) / epsilon);
}

struct FpeResidual {
    double residual = 0.0;
    double scale = 0.0;  ///< p times the sum of absolute values of the expanded terms
};

/// Stationary Fokker-Planck operator eps d_ij(a_ij p) - d_i(b_i p) applied
/// to p = exp(-U / eps). Expanded as
///   p [eps div A - div(a grad U) - <grad U, A> + <grad U, a grad U>/eps - div b + <b, grad U>/eps].
inline FpeResidual gibbs_fpe_residual(const ModelSpec& m, const Vec& x, double epsilon) {
    m.require_transverse("gibbs_fpe_residual");
    if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
    const Vec g = m.grad_U(x);
    const Mat a = m.a(x);
    const Vec A = diffusion_divergence(m, x);
    const double div_b = jacobian(m, FieldKind::drift, x).trace();
    // div(a grad U) = a : Hess U + sum_ij (d_j a_ij) d_i U
    const double div_agu = (a.cwiseProduct(m.hess_U(x))).sum() + A.dot(g);
    double div_A = 0.0;
    if (!m.constant_noise) {
        Vec xp = x;
        for (int i = 0; i < m.dim; ++i) {
            const double h = kSecondDerivativeStep;
            xp[i] = x[i] + h;
            const double ap = diffusion_divergence(m, xp)[i];
            xp[i] = x[i] - h;
            const double am = diffusion_divergence(m, xp)[i];
            xp[i] = x[i];
            div_A += (ap - am) / (2.0 * h);
        }
    }
    const double p = std::exp(-m.U(x) / epsilon);
    const double terms[] = {epsilon * div_A, -div_agu, -g.dot(A), g.dot(a * g) / epsilon, -div_b,
                            m.b(x).dot(g) / epsilon};
    FpeResidual r;
    for (double t : terms) {
        r.residual += t;
        r.scale += std::abs(t);
    }
    r.residual *= p;
    r.scale *= p;
    return r;
}

/// Residual of the transport equation
///   <grad C, b + 2 a grad U> + C (div b + a : Hess U + 2 <A, grad U>)
/// with grad C from central differences of independently integrated rays.
inline double transport_residual(const ModelSpec& m, const Vec& attractor, const Vec& x, const Mat& attractor_hessian,
                                 double h = 1e-4) {
    const double c = stationary_prefactor(m, attractor, x, attractor_hessian).c_value;
    Vec grad_c(m.dim);
    Vec xp = x;
    for (int i = 0; i < m.dim; ++i) {
        xp[i] = x[i] + h;
        const double cp = stationary_prefactor(m, attractor, xp, attractor_hessian).c_value;
        xp[i] = x[i] - h;
        const double cm = stationary_prefactor(m, attractor, xp, attractor_hessian).c_value;
        xp[i] = x[i];
        grad_c[i] = (cp - cm) / (2.0 * h);
    }
    const Vec g = m.grad_U(x);
    const Mat a = m.a(x);
    const double div_b = jacobian(m, FieldKind::drift, x).trace();
    const double coef = div_b + a.cwiseProduct(m.hess_U(x)).sum() + 2.0 * diffusion_divergence(m, x).dot(g);
    return grad_c.dot(m.b(x) + 2.0 * a * g) + c * coef;
}

}  // namespace ekramers
