#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ekramers/dynamics.hpp"
#include "ekramers/error.hpp"
#include "ekramers/landscape.hpp"
#include "ekramers/linalg.hpp"
#include "ekramers/lyapunov.hpp"
#include "ekramers/model.hpp"
#include "ekramers/saddle_data.hpp"

namespace ekramers {

namespace detail {

/// Unit vector spanning the (numerical) kernel of a square matrix.
inline Vec null_vector(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
    return svd.matrixV().col(a.cols() - 1).normalized();
}

/// Nested central-difference Hessian of U, independent of analytic hooks.
inline Mat fd_potential_hessian(const ModelSpec& m, const Vec& x) {
    const auto& t = m.require_transverse("Hess U");
    const double h = kSecondDerivativeStep;
    Mat out(m.dim, m.dim);
    Vec y = x;
    for (int i = 0; i < m.dim; ++i) {
        for (int j = i; j < m.dim; ++j) {
            auto eval = [&](double si, double sj) {
                y = x;
                y[i] += si * h;
                y[j] += sj * h;
                return t.potential(y);
            };
            out(i, j) = out(j, i) = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * h * h);
        }
    }
    return out;
}

inline int count_unstable(const Mat& j) {
    const Eigen::EigenSolver<Mat> es(j, false);
    return static_cast<int>((es.eigenvalues().real().array() > 0.0).count());
}

}  // namespace detail

inline constexpr double kSaddleResidual = 1e-12;

/// Damped Newton iteration on b(x) = 0; the zero must have exactly one
/// unstable direction.
inline Vec find_saddle(const ModelSpec& m, const Vec& guess) {
    if (guess.size() != m.dim) fail(ErrorKind::InvalidArgument, "guess has the wrong dimension");
    if (!m.in_box(guess)) fail(ErrorKind::InvalidArgument, "guess lies outside the domain box");
    Vec x = guess;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        const Vec b = m.b(x);
        const double nb = b.norm();
        if (nb <= kSaddleResidual) {
            converged = true;
            break;
        }
        const Vec dx = jacobian(m, FieldKind::drift, x).fullPivLu().solve(-b);
        double t = 1.0;
        while (t > 1e-6 && !(m.b(x + t * dx).norm() < nb)) t *= 0.5;
        x += t * dx;
    }
    if (!converged && m.b(x).norm() <= kSaddleResidual) converged = true;
    if (!converged) fail(ErrorKind::NoConvergence, "Newton iteration did not converge in 100 iterations");
    const int unstable = detail::count_unstable(jacobian(m, FieldKind::drift, x));
    if (unstable != 1)
        fail(ErrorKind::NotASaddle, "zero of b has " + std::to_string(unstable) + " unstable directions");
    return x;
}

/// Spectral geometry at a saddle. `toward` (the target attractor) fixes the
/// sign of v+; without it the largest component of v+ is made positive.
inline SaddleData saddle_geometry(const ModelSpec& m, const Vec& x_star, const std::optional<Vec>& toward = std::nullopt) {
    SaddleData s;
    s.x_star = x_star;
    s.m_star = jacobian(m, FieldKind::drift, x_star);
    const int d = m.dim;
    const Eigen::EigenSolver<Mat> es(s.m_star, false);
    const Eigen::VectorXcd ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    int unstable = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i].real() <= 0.0) continue;
        if (std::abs(ev[i].imag()) > 1e-12 * scale)
            fail(ErrorKind::ComplexUnstableEigenvalue, "unstable eigenvalue of Db(x*) is not real");
        ++unstable;
        s.lambda_plus = ev[i].real();
    }
    if (unstable != 1) fail(ErrorKind::NotASaddle, "Db(x*) has " + std::to_string(unstable) + " unstable eigenvalues");

    const Mat id = Mat::Identity(d, d);
    s.v_plus = detail::null_vector(s.m_star - s.lambda_plus * id);
    if (toward) {
        if (s.v_plus.dot(*toward - x_star) < 0.0) s.v_plus = -s.v_plus;
    } else {
        Eigen::Index k;
        s.v_plus.cwiseAbs().maxCoeff(&k);
        if (s.v_plus[k] < 0.0) s.v_plus = -s.v_plus;
    }
    s.n_star = detail::null_vector(s.m_star.transpose() - s.lambda_plus * id);
    if (s.n_star.dot(s.v_plus) < 0.0) s.n_star = -s.n_star;
    s.cos_theta = s.n_star.dot(s.v_plus);

    s.a_star = m.a(x_star);
    const HessianResult hr = quasipotential_hessian(m, x_star, EquilibriumKind::saddle);
    s.h_star = hr.h;
    s.hessian_source = hr.source;
    const Vec hev = symmetric_eigenvalues(s.h_star);
    if (!(hev.cwiseAbs().minCoeff() > 1e-10 * hev.cwiseAbs().maxCoeff()))
        fail(ErrorKind::DegenerateHessian, "H* is singular");
    s.d_star = s.m_star + s.a_star * s.h_star;
    s.n_matrix = s.a_star * s.h_star + s.d_star;
    s.v_prime_plus = detail::null_vector(s.n_matrix + s.lambda_plus * id);
    // Direction of travel: from the x_bar_1 side (<., n*> < 0) into x*.
    if (s.v_prime_plus.dot(s.n_star) < 0.0) s.v_prime_plus = -s.v_prime_plus;
    return s;
}

struct SaddleInvariants {
    double left_eigenvector = 0.0;   ///< |M*^T n* - lambda n*|
    double hd_antisymmetry = 0.0;    ///< |H* D* + D*^T H*|
    double n_on_hinv_n = 0.0;        ///< |N* H*^{-1} n* + lambda H*^{-1} n*| / |H*^{-1} n*|
    double n_on_vprime = 0.0;        ///< |N* v'+ + lambda v'+|
    double lyapunov = 0.0;           ///< |M* X + X M*^T + 2 a*|, X = H*^{-1}
    double hessian_crosscheck = std::numeric_limits<double>::quiet_NaN();  ///< vs FD Hess U
    int negative_eigenvalues = 0;

    double max_identity() const {
        return std::max({left_eigenvector, hd_antisymmetry, n_on_hinv_n, n_on_vprime, lyapunov});
    }
};

inline SaddleInvariants saddle_invariants(const ModelSpec& m, const SaddleData& s) {
    SaddleInvariants r;
    const double lam = s.lambda_plus;
    r.left_eigenvector = (s.m_star.transpose() * s.n_star - lam * s.n_star).norm();
    r.hd_antisymmetry = (s.h_star * s.d_star + s.d_star.transpose() * s.h_star).cwiseAbs().maxCoeff();
    const Mat hinv = s.h_star.inverse();
    const Vec w = hinv * s.n_star;
    r.n_on_hinv_n = (s.n_matrix * w + lam * w).norm() / w.norm();
    r.n_on_vprime = (s.n_matrix * s.v_prime_plus + lam * s.v_prime_plus).norm();
    r.lyapunov = lyapunov_residual(s.m_star, hinv, s.a_star);
    r.negative_eigenvalues = count_negative(symmetric_eigenvalues(s.h_star));
    if (m.has_transverse()) {
        const Mat fd = detail::fd_potential_hessian(m, s.x_star);
        r.hessian_crosscheck = (s.h_star - fd).cwiseAbs().maxCoeff() / std::max(1.0, s.h_star.cwiseAbs().maxCoeff());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Boundary layer and quasistationary exit rate

struct BoundaryConditions {
    double drift_normal = 0.0;      ///< <-a grad U + l, n>, must be < 0
    double potential_normal = 0.0;  ///< <grad U, n>, must be > 0
    bool ok() const { return drift_normal < 0.0 && potential_normal > 0.0; }
};

inline BoundaryConditions boundary_conditions(const ModelSpec& m, const Vec& y, const Vec& n) {
    return {m.b(y).dot(n), m.grad_U(y).dot(n)};
}

/// mu(y) = <a grad U + l, n> / <n, a n>.
inline double boundary_mu(const ModelSpec& m, const Vec& y, const Vec& n) {
    m.require_transverse("boundary_mu");
    if (!boundary_conditions(m, y, n).ok())
        fail(ErrorKind::CharacteristicPoint, "boundary conditions <b, n> < 0 and <grad U, n> > 0 fail at y");
    return m.fluctuation(y).dot(n) / n.dot(m.a(y) * n);
}

/// C_bl(y, r) = C_st(y) (1 - exp(-mu(y) r)).
inline double boundary_layer_profile(const ModelSpec& m, const Vec& attractor, const Vec& y, const Vec& n, double r,
                                     const std::optional<Mat>& attractor_hessian = std::nullopt) {
    const double mu = boundary_mu(m, y, n);
    const double c = stationary_prefactor(m, attractor, y, attractor_hessian).c_value;
    return c * -std::expm1(-mu * r);
}

struct BoundarySample {
    Vec y;
    Vec n;          ///< outward unit normal
    double weight;  ///< quadrature weight (surface element)
};

struct DomainSpec {
    std::vector<BoundarySample> boundary;
    Vec attractor_inside;
    /// Exit predicate for simulation.
    std::function<bool(const Vec&)> outside;
};

/// Sublevel set {U - U(x_bar) < level} around a 2D attractor, boundary sampled
/// at n_quad equally spaced polar angles (periodic trapezoid rule).
inline DomainSpec level_set_domain(const ModelSpec& m, const Vec& attractor, double level, int n_quad) {
    m.require_transverse("level_set_domain");
    if (m.dim != 2) fail(ErrorKind::InvalidArgument, "level-set domains are implemented for d = 2");
    if (!(level > 0.0)) fail(ErrorKind::InvalidArgument, "level must be positive");
    if (n_quad < 8) fail(ErrorKind::InvalidArgument, "n_quad must be at least 8");
    const double u0 = m.U(attractor);
    DomainSpec dom;
    dom.attractor_inside = attractor;
    dom.outside = [&m, u0, level](const Vec& x) { return m.U(x) - u0 >= level; };
    const double dtheta = 2.0 * std::numbers::pi / n_quad;
    for (int k = 0; k < n_quad; ++k) {
        const double th = k * dtheta;
        Vec e(2), ep(2);
        e << std::cos(th), std::sin(th);
        ep << -std::sin(th), std::cos(th);
        auto g = [&](double r) { return m.U(attractor + r * e) - u0 - level; };
        double lo = 0.0, hi = 0.05;
        while (g(hi) <= 0.0) {
            lo = hi;
            hi *= 1.5;
            if (!m.in_box(attractor + hi * e))
                fail(ErrorKind::InvalidArgument, "level set is not contained in the domain box");
        }
        boost::uintmax_t iters = 200;
        const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(52),
                                                              iters);
        const double r = 0.5 * (a + b);
        const Vec y = attractor + r * e;
        const Vec gu = m.grad_U(y);
        const double rp = -r * gu.dot(ep) / gu.dot(e);
        dom.boundary.push_back({y, gu.normalized(), (rp * e + r * ep).norm() * dtheta});
    }
    return dom;
}

/// Boundary consisting of isolated points (d = 1 intervals).
inline DomainSpec point_boundary_domain(const Vec& attractor, std::vector<BoundarySample> samples,
                                        std::function<bool(const Vec&)> outside = {}) {
    DomainSpec dom;
    dom.attractor_inside = attractor;
    dom.boundary = std::move(samples);
    dom.outside = std::move(outside);
    return dom;
}

struct ExitRateReport {
    double rate = 0.0;
    int samples = 0;
    int characteristic = 0;  ///< samples skipped because a boundary condition fails
    int unreachable = 0;     ///< samples skipped because no fluctuation ray reaches them
};

/// lambda_qst = sum over boundary samples of <a grad U + l, n> p_ens(y) dS.
inline ExitRateReport quasistationary_exit_rate(const ModelSpec& m, const DomainSpec& dom, double epsilon,
                                                const std::optional<Mat>& attractor_hessian = std::nullopt) {
    m.require_transverse("quasistationary_exit_rate");
    if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
    const Mat hbar = attractor_hessian ? *attractor_hessian
                                       : quasipotential_hessian(m, dom.attractor_inside, EquilibriumKind::attractor).h;
    ExitRateReport r;
    r.samples = static_cast<int>(dom.boundary.size());
    for (const auto& s : dom.boundary) {
        if (!boundary_conditions(m, s.y, s.n).ok()) {
            ++r.characteristic;
            continue;
        }
        double p = 0.0;
        try {
            p = ensemble_density(m, dom.attractor_inside, s.y, epsilon, hbar);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::UnreachablePoint) throw;
            ++r.unreachable;
            continue;
        }
        r.rate += m.fluctuation(s.y).dot(s.n) * p * s.weight;
    }
    if (r.characteristic + r.unreachable == r.samples)
        fail(ErrorKind::UnreachableBoundary, "no boundary sample contributes to the exit rate");
    return r;
}

// ---------------------------------------------------------------------------
// Saddle-local analysis

/// zeta+(y) = <y - x*, n*> / cos(theta).
inline double zeta_plus(const SaddleData& s, const Vec& y) { return (y - s.x_star).dot(s.n_star) / s.cos_theta; }

/// Scale factor k with committor = Phi(k zeta+).
inline double committor_scale(const SaddleData& s, double epsilon) {
    return std::sqrt(s.lambda_plus * s.cos_theta * s.cos_theta / (epsilon * s.ann()));
}

inline double committor(const SaddleData& s, const Vec& y, double epsilon) {
    if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
    return normal_cdf(zeta_plus(s, y) * committor_scale(s, epsilon));
}

struct SurfaceFactors {
    Vec y_bar;                       ///< minimizer of the quadratic potential on S_eta, eta = 1
    double det_h = 0.0;              ///< det of H* restricted to n*-perp
    double det_identity_residual = 0.0;  ///< |det H* + lambda det h / <a n, n>|, relative
    double eigen_residual = 0.0;     ///< |N* (y_bar - x*) + lambda (y_bar - x*)|, relative
    double alignment_angle = 0.0;    ///< angle between y_bar - x* and the v'+ line
};

inline SurfaceFactors surface_integral_factors(const SaddleData& s) {
    SurfaceFactors f;
    const double lam = s.lambda_plus, ann = s.ann();
    Eigen::FullPivLU<Mat> lu(s.h_star);
    if (!lu.isInvertible()) fail(ErrorKind::DegenerateHessian, "H* is singular");
    const Vec w = lu.solve(s.n_star);
    const Vec dy = lam * s.cos_theta / ann * w;
    f.y_bar = s.x_star + dy;
    const Mat e = orthogonal_complement(s.n_star);
    const Mat h = e.transpose() * s.h_star * e;
    f.det_h = s.dim() > 1 ? h.determinant() : 1.0;
    const double det_hs = s.h_star.determinant();
    f.det_identity_residual = std::abs(det_hs + lam * f.det_h / ann) / std::max(1.0, std::abs(det_hs));
    f.eigen_residual = (s.n_matrix * dy + lam * dy).norm() / dy.norm();
    const Vec u = dy.normalized();
    const double along = u.dot(s.v_prime_plus);
    f.alignment_angle = std::atan2((u - along * s.v_prime_plus).norm(), std::abs(along));
    return f;
}

/// sin of the angle between the instanton direction v'+ and the stable
/// eigenvector v- of M* (d = 2).
inline double instanton_angle_sin(const SaddleData& s) {
    if (s.dim() != 2) fail(ErrorKind::InvalidArgument, "instanton angle is defined for d = 2");
    const Eigen::EigenSolver<Mat> es(s.m_star, false);
    double lam_minus = 0.0;
    for (Eigen::Index i = 0; i < 2; ++i)
        if (es.eigenvalues()[i].real() < 0.0) lam_minus = es.eigenvalues()[i].real();
    const Vec vm = detail::null_vector(s.m_star - lam_minus * Mat::Identity(2, 2));
    const Vec vp = s.v_prime_plus.normalized();
    return std::abs(vp[0] * vm[1] - vp[1] * vm[0]);
}

/// lambda_{1->2} = C_st(x*) e^{-dV/eps} lambda+ sqrt((2 pi)^{d-2} / |det H*|).
inline double closed_form_crossing_rate(const SaddleData& s, double c_star, double delta_v, double epsilon) {
    const double d = s.dim();
    return c_star * std::exp(-delta_v / epsilon) * s.lambda_plus *
           std::sqrt(std::pow(2.0 * std::numbers::pi, d - 2.0) / std::abs(s.h_star.determinant()));
}

struct EtaPoint {
    double eta_over_sqrt_eps = 0.0;
    double eta = 0.0;
    double committor = 0.0;       ///< Phi(-eta k), exact
    double surface_integral = 0.0;  ///< I_eta by quadrature over S_eta
    double rate = 0.0;            ///< explicit pipeline, exact Phi
    double rate_asymptotic = 0.0; ///< same with Phi replaced by its r -> -inf equivalent
};

struct EtaCancellation {
    double closed_form = 0.0;
    std::vector<EtaPoint> points;
    double spread = 0.0;             ///< (max - min) / closed form, exact Phi
    double max_deviation = 0.0;      ///< max |rate / closed - 1|, exact Phi
    double asymptotic_spread = 0.0;  ///< same spread with asymptotic Phi
};

/// I_eta = int_{S_eta} exp(-<y-x*, H*(y-x*)>/(2 eps)) <N*(y-x*), n*> dS.
/// Quadrature along the line for d = 2; Gaussian closed form otherwise.
inline double surface_integral(const SaddleData& s, double eta, double epsilon) {
    const double lam = s.lambda_plus, ann = s.ann(), ct = s.cos_theta;
    const SurfaceFactors f = surface_integral_factors(s);
    if (s.dim() != 2) {
        return lam * eta * ct * std::sqrt(std::pow(2.0 * std::numbers::pi * epsilon, s.dim() - 1) / f.det_h) *
               std::exp(lam * eta * eta * ct * ct / (2.0 * epsilon * ann));
    }
    const Vec e = orthogonal_complement(s.n_star).col(0);
    const Vec base = -eta * s.v_plus;
    const Vec ybar = eta * (f.y_bar - s.x_star);
    const double centre = (ybar - base).dot(e);
    const double width = std::sqrt(epsilon / f.det_h);
    auto integrand = [&](double u) {
        const Vec y = base + (centre + u * width) * e;
        return std::exp(-y.dot(s.h_star * y) / (2.0 * epsilon)) * (s.n_matrix * y).dot(s.n_star) * width;
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -14.0, 14.0, 8, 1e-14, &err);
}

/// Recomputes the crossing rate through the explicit S_eta pipeline at each
/// eta / sqrt(eps) and compares with the closed form where eta cancels.
inline EtaCancellation eta_cancellation(const SaddleData& s, double c_star, double delta_v, double epsilon,
                                        const std::vector<double>& ratios = {3.0, 5.0, 8.0}) {
    EtaCancellation out;
    out.closed_form = closed_form_crossing_rate(s, c_star, delta_v, epsilon);
    const double k = committor_scale(s, epsilon);
    const double pre = c_star / std::pow(epsilon, 0.5 * s.dim()) * std::exp(-delta_v / epsilon);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, alo = lo, ahi = -lo;
    for (double r : ratios) {
        EtaPoint p;
        p.eta_over_sqrt_eps = r;
        p.eta = r * std::sqrt(epsilon);
        const double z = -p.eta * k;
        p.committor = normal_cdf(z);
        const double phi_asym = std::exp(-0.5 * z * z) / (std::abs(z) * std::sqrt(2.0 * std::numbers::pi));
        p.surface_integral = surface_integral(s, p.eta, epsilon);
        p.rate = pre * p.committor * p.surface_integral;
        p.rate_asymptotic = pre * phi_asym * p.surface_integral;
        const double q = p.rate / out.closed_form, qa = p.rate_asymptotic / out.closed_form;
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        alo = std::min(alo, qa);
        ahi = std::max(ahi, qa);
        out.max_deviation = std::max(out.max_deviation, std::abs(q - 1.0));
        out.points.push_back(p);
    }
    out.spread = hi - lo;
    out.asymptotic_spread = ahi - alo;
    return out;
}

// ---------------------------------------------------------------------------
// Rate assembly

struct RateReport {
    double delta_v = 0.0;
    double lambda_plus = 0.0;
    double hessian_ratio = 0.0;
    double f_integral = 0.0;
    double f_correction = 1.0;
    double prefactor = 0.0;
    double epsilon = 0.0;
    double mean_time = 0.0;
    double rate = 0.0;
    double c_star = 0.0;  ///< C_st(x*) as the limit along the instanton, C_st(x_bar) e^{-int F}
    // diagnostics
    Vec saddle;
    double det_h_star = 0.0;
    double det_h_bar = 0.0;
    double instanton_action = 0.0;
    std::array<double, 2> endpoint_gaps{};
    double max_identity_residual = 0.0;
    double hessian_crosscheck = 0.0;
    std::string hessian_source;
    InstantonResult instanton;
    SaddleData saddle_data;
};

struct RateOptions {
    std::optional<Vec> saddle_guess;
    InstantonOptions instanton;
};

inline constexpr double kSmoothnessTolerance = 1e-6;
inline constexpr double kHessianCrosscheckTolerance = 1e-5;

/// Mean transition time x1 -> x2:
///   (2 pi / lambda+) sqrt(|det H*| / det H_bar) exp(int F(rho_t) dt) exp(dV / eps).
inline RateReport transition_rate(const ModelSpec& m, const Vec& x1, const Vec& x2, double epsilon,
                                  const RateOptions& opt = {}) {
    m.require_transverse("transition_rate");
    if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
    RateReport r;
    r.epsilon = epsilon;
    const Vec guess = opt.saddle_guess ? *opt.saddle_guess : Vec(0.5 * (x1 + x2));
    r.saddle = find_saddle(m, guess);
    r.saddle_data = saddle_geometry(m, r.saddle, x2);
    const SaddleData& s = r.saddle_data;
    const HessianResult hbar = quasipotential_hessian(m, x1, EquilibriumKind::attractor);
    r.det_h_star = s.h_star.determinant();
    r.det_h_bar = hbar.h.determinant();
    r.hessian_source = s.hessian_source;

    const SaddleInvariants inv = saddle_invariants(m, s);
    const SurfaceFactors sf = surface_integral_factors(s);
    r.max_identity_residual = std::max({inv.max_identity(), sf.det_identity_residual, sf.eigen_residual});
    r.hessian_crosscheck = inv.hessian_crosscheck;

    r.instanton = compute_instanton(m, s, x1, opt.instanton);
    r.instanton_action = r.instanton.action;
    r.endpoint_gaps = r.instanton.endpoint_gaps;
    if (std::max(r.endpoint_gaps[0], r.endpoint_gaps[1]) > kSmoothnessTolerance ||
        r.max_identity_residual > kSmoothnessTolerance ||
        (std::isfinite(r.hessian_crosscheck) && r.hessian_crosscheck > kHessianCrosscheckTolerance))
        fail(ErrorKind::NonSmoothQuasipotential, "instanton or saddle identities violate the smoothness tolerance");

    r.delta_v = quasipotential(m, x1, r.saddle);
    r.lambda_plus = s.lambda_plus;
    r.hessian_ratio = std::sqrt(std::abs(r.det_h_star) / r.det_h_bar);
    r.f_integral = f_integral_along(m, r.instanton.path);
    r.f_correction = std::exp(r.f_integral);
    r.c_star = laplace_normalization(hbar.h) / r.f_correction;
    r.prefactor = 2.0 * std::numbers::pi / r.lambda_plus * r.hessian_ratio * r.f_correction;
    r.mean_time = r.prefactor * std::exp(r.delta_v / epsilon);
    r.rate = 1.0 / r.mean_time;
    return r;
}

/// Classical reversible formula from Hess U alone (a = I gradient systems):
///   (2 pi / |mu_-|) sqrt(|det Hess U(x*)| / det Hess U(x1)) exp(dV / eps),
/// with mu_- the negative eigenvalue of Hess U(x*).
inline double classical_eyring_kramers(const ModelSpec& m, const Vec& x1, const Vec& x_star, double epsilon) {
    const Mat hs = m.hess_U(x_star);
    const Mat h1 = m.hess_U(x1);
    const double mu_minus = symmetric_eigenvalues(hs).minCoeff();
    if (!(mu_minus < 0.0)) fail(ErrorKind::NotASaddle, "Hess U(x*) has no negative eigenvalue");
    return 2.0 * std::numbers::pi / std::abs(mu_minus) * std::sqrt(std::abs(hs.determinant()) / h1.determinant()) *
           std::exp((m.U(x_star) - m.U(x1)) / epsilon);
}

}  // namespace ekramers
