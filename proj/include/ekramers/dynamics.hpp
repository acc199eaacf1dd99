#pragma once

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include "ekramers/error.hpp"
#include "ekramers/model.hpp"
#include "ekramers/ode.hpp"
#include "ekramers/path.hpp"
#include "ekramers/saddle_data.hpp"

namespace ekramers {

/// Speed below which a deterministic flow is considered to sit at an
/// equilibrium.
inline constexpr double kEquilibriumSpeed = 1e-10;

/// Largest integrator step for recorded flows. Keeps the midpoint action
/// quadrature accurate on the returned grids.
inline constexpr double kFlowMaxStep = 0.01;

namespace detail {

template <class Field>
Path integrate_flow(const ModelSpec& m, Field&& field, const Vec& x0, double t_end, double tol, PathKind kind) {
    if (!(t_end > 0.0)) fail(ErrorKind::InvalidArgument, "t_end must be positive");
    if (!(tol > 0.0)) fail(ErrorKind::InvalidArgument, "tol must be positive");
    if (x0.size() != m.dim) fail(ErrorKind::InvalidArgument, "start point has the wrong dimension");
    ode::Options opt;
    opt.rtol = opt.atol = tol;
    opt.h_max = kFlowMaxStep;
    bool escaped = false;
    auto rhs = [&](const Vec& x, Vec& out) { out = field(x); };
    auto stop = [&](double, const Vec& x, const Vec& f) {
        if (!x.allFinite() || !m.in_box(x) || !f.allFinite()) {
            escaped = true;
            return true;
        }
        return f.norm() < kEquilibriumSpeed;
    };
    ode::Solution sol = ode::integrate(rhs, x0, 0.0, t_end, opt, stop);
    if (escaped) fail(ErrorKind::BlowUp, "trajectory left the domain box");
    if (sol.status == ode::Status::step_underflow || sol.status == ode::Status::too_many_steps)
        fail(ErrorKind::NoConvergence, "integrator could not reach t_end");
    Path p{std::move(sol.t), std::move(sol.x), kind};
    if (p.size() == 1) {
        // Started at an equilibrium.
        p.times.push_back(t_end);
        p.points.push_back(x0);
    }
    return p;
}

}  // namespace detail

/// Solves x' = b(x) on [0, t_end], stopping early at an equilibrium.
inline Path integrate_relaxation(const ModelSpec& m, const Vec& x0, double t_end, double tol = 1e-10) {
    return detail::integrate_flow(m, [&](const Vec& x) { return m.b(x); }, x0, t_end, tol, PathKind::relaxation);
}

/// Solves x' = a grad U + l forward for t_end. Read right to left this is the
/// fluctuation trajectory terminated at x0's image.
inline Path integrate_fluctuation(const ModelSpec& m, const Vec& x0, double t_end, double tol = 1e-10) {
    m.require_transverse("integrate_fluctuation");
    return detail::integrate_flow(m, [&](const Vec& x) { return m.fluctuation(x); }, x0, t_end, tol,
                                  PathKind::fluctuation);
}

namespace detail {

/// Factorization of a(x) with a singularity check.
inline Eigen::LDLT<Mat> factor_diffusion(const ModelSpec& m, const Vec& x) {
    const Mat ax = m.a(x);
    const Vec ev = symmetric_eigenvalues(ax);
    if (!(ev.minCoeff() > 1e-12 * std::max(1.0, ev.maxCoeff())))
        fail(ErrorKind::SingularDiffusion, "a(x) is numerically singular along the path");
    return Eigen::LDLT<Mat>(ax);
}

}  // namespace detail

/// Freidlin-Wentzell action (1/4) int <phi' - b, a^{-1} (phi' - b)> dt,
/// midpoint rule with finite-difference velocities.
inline double action(const ModelSpec& m, const Path& p) {
    p.validate();
    Eigen::LDLT<Mat> w;
    bool have_w = false;
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        const double dt = p.times[k + 1] - p.times[k];
        const Vec mid = 0.5 * (p.points[k] + p.points[k + 1]);
        const Vec r = (p.points[k + 1] - p.points[k]) / dt - m.b(mid);
        if (!have_w || !m.constant_noise) {
            w = detail::factor_diffusion(m, mid);
            have_w = true;
        }
        s += 0.25 * dt * r.dot(w.solve(r));
    }
    return s;
}

struct InstantonOptions {
    double delta = 1e-4;           ///< offset from x* along v'+
    double tol = 1e-7;             ///< endpoint truncation tolerance
    double integrator_tol = 1e-11;
    double time_cap = 1e3;
};

struct InstantonResult {
    Path path;
    double action = 0.0;
    std::array<double, 2> endpoint_gaps{};  ///< to the attractor, to x*
    Vec incoming_direction;                 ///< v'+, direction of travel into x*
};

/// Instanton from `attractor` to the saddle, built by integrating the reversed
/// fluctuation field from x* - delta v'+ until it lands on the attractor.
inline InstantonResult compute_instanton(const ModelSpec& m, const SaddleData& s, const Vec& attractor,
                                         const InstantonOptions& opt = {}) {
    m.require_transverse("compute_instanton");
    if (!(opt.delta > 0.0 && opt.delta <= 1e-2)) fail(ErrorKind::InvalidArgument, "delta must lie in (0, 1e-2]");
    if (!(opt.tol > 0.0)) fail(ErrorKind::InvalidArgument, "tol must be positive");

    Vec v = s.v_prime_plus.normalized();
    if (v.dot(attractor - s.x_star) > 0.0) v = -v;
    const Vec start = s.x_star - opt.delta * v;

    ode::Options o;
    o.rtol = o.atol = opt.integrator_tol;
    o.h_max = kFlowMaxStep;
    enum class Outcome { running, arrived, escaped, stalled } outcome = Outcome::running;
    auto rhs = [&](const Vec& x, Vec& out) { out = -m.fluctuation(x); };
    auto stop = [&](double, const Vec& x, const Vec& f) {
        if (!x.allFinite() || !m.in_box(x)) {
            outcome = Outcome::escaped;
            return true;
        }
        if ((x - attractor).norm() <= opt.tol) {
            outcome = Outcome::arrived;
            return true;
        }
        if (f.norm() < kEquilibriumSpeed) {
            outcome = Outcome::stalled;
            return true;
        }
        return false;
    };
    ode::Solution sol = ode::integrate(rhs, start, 0.0, opt.time_cap, o, stop);
    if (outcome == Outcome::escaped) fail(ErrorKind::WrongBasin, "reverse fluctuation flow left the domain box");
    if (outcome == Outcome::stalled)
        fail(ErrorKind::WrongBasin, "reverse fluctuation flow converged to an equilibrium other than the attractor");
    if (outcome != Outcome::arrived)
        fail(ErrorKind::NoConvergence, "instanton did not reach the attractor within the time cap");

    InstantonResult r;
    r.incoming_direction = v;
    Path& p = r.path;
    p.kind = PathKind::instanton;
    const double total = sol.t.back();
    p.times.push_back(0.0);
    p.points.push_back(attractor);
    for (std::size_t k = sol.t.size(); k-- > 0;) {
        p.times.push_back(1.0 + total - sol.t[k]);
        p.points.push_back(sol.x[k]);
    }
    r.endpoint_gaps[0] = (sol.x.back() - attractor).norm();

    // Linearized approach x* - delta v e^{-lambda s} on the incoming direction.
    const double lam = s.lambda_plus;
    double t = p.times.back();
    double offset = opt.delta;
    while (offset > opt.tol) {
        t += kFlowMaxStep;
        offset *= std::exp(-lam * kFlowMaxStep);
        p.times.push_back(t);
        p.points.push_back(s.x_star - offset * v);
    }
    r.endpoint_gaps[1] = (p.points.back() - s.x_star).norm();
    p.times.push_back(t + 1.0);
    p.points.push_back(s.x_star);
    r.action = action(m, p);
    return r;
}

struct ActionMinimum {
    Path path;
    double action = 0.0;
    int iterations = 0;
    double gradient_max_norm = 0.0;
    bool no_decrease = false;  ///< line search stalled before the gradient tolerance
    std::string termination;
};

struct LinearInit {};
using PathInit = std::variant<LinearInit, Path>;

namespace detail {

class DiscreteAction final : public ceres::FirstOrderFunction {
public:
    DiscreteAction(const ModelSpec& m, Vec from, Vec to, double dt, int n_steps)
        : m_(m), from_(std::move(from)), to_(std::move(to)), dt_(dt), n_(n_steps), d_(m.dim) {}

    int NumParameters() const override { return (n_ - 1) * d_; }

    std::vector<Vec> unpack(const double* p) const {
        std::vector<Vec> x(static_cast<std::size_t>(n_ + 1));
        x[0] = from_;
        x[static_cast<std::size_t>(n_)] = to_;
        for (int k = 1; k < n_; ++k) x[static_cast<std::size_t>(k)] = Eigen::Map<const Vec>(p + (k - 1) * d_, d_);
        return x;
    }

    bool Evaluate(const double* p, double* cost, double* grad) const override {
        const auto x = unpack(p);
        std::vector<Vec> g;
        if (grad) g.assign(static_cast<std::size_t>(n_ + 1), Vec::Zero(d_));
        double s = 0.0;
        Eigen::LDLT<Mat> w;
        bool have_w = false;
        for (int k = 0; k < n_; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            const Vec mid = 0.5 * (x[uk] + x[uk + 1]);
            const Vec r = (x[uk + 1] - x[uk]) / dt_ - m_.b(mid);
            if (!r.allFinite()) return false;
            if (!have_w || !m_.constant_noise) {
                w = factor_diffusion(m_, mid);
                have_w = true;
            }
            const Vec wr = w.solve(r);
            s += 0.25 * dt_ * r.dot(wr);
            if (!grad) continue;
            const Mat jb = jacobian(m_, FieldKind::drift, mid);
            Vec common = -0.25 * dt_ * (jb.transpose() * wr);
            if (!m_.constant_noise) {
                // d/dmid of r^T a^{-1} r = -wr^T (d_j a) wr
                Vec xp = mid;
                for (int j = 0; j < d_; ++j) {
                    const double h = m_.step_for(mid[j]);
                    xp[j] = mid[j] + h;
                    const Mat ap = m_.a(xp);
                    xp[j] = mid[j] - h;
                    const Mat am = m_.a(xp);
                    xp[j] = mid[j];
                    common[j] -= 0.125 * dt_ * wr.dot((ap - am) * wr) / (2.0 * h);
                }
            }
            g[uk] += -0.5 * wr + common;
            g[uk + 1] += 0.5 * wr + common;
        }
        *cost = s;
        if (grad) {
            for (int k = 1; k < n_; ++k)
                Eigen::Map<Vec>(grad + (k - 1) * d_, d_) = g[static_cast<std::size_t>(k)];
        }
        return true;
    }

private:
    const ModelSpec& m_;
    Vec from_, to_;
    double dt_;
    int n_, d_;
};

inline Vec sample_path_at(const Path& p, double t) {
    if (t <= p.times.front()) return p.points.front();
    if (t >= p.times.back()) return p.points.back();
    const auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - p.times.begin()) - 1;
    const double s = (t - p.times[k]) / (p.times[k + 1] - p.times[k]);
    return (1.0 - s) * p.points[k] + s * p.points[k + 1];
}

}  // namespace detail

/// Minimizes the discretized action over the interior points of a path with
/// fixed endpoints on a uniform grid of n_steps segments over [0, T].
/// A Path initializer is rescaled in time onto [0, T] and linearly resampled.
inline ActionMinimum minimize_action(const ModelSpec& m, const Vec& x_from, const Vec& x_to, double T, int n_steps,
                                     const PathInit& init = LinearInit{}) {
    if (n_steps < 16) fail(ErrorKind::InvalidArgument, "n_steps must be at least 16");
    if (!(T > 0.0)) fail(ErrorKind::InvalidArgument, "T must be positive");
    if (x_from.size() != m.dim || x_to.size() != m.dim)
        fail(ErrorKind::InvalidArgument, "endpoints have the wrong dimension");
    const int d = m.dim;
    const double dt = T / n_steps;
    std::vector<double> params(static_cast<std::size_t>((n_steps - 1) * d));
    for (int k = 1; k < n_steps; ++k) {
        const double frac = static_cast<double>(k) / n_steps;
        Vec x;
        if (const auto* seed = std::get_if<Path>(&init)) {
            seed->validate();
            x = detail::sample_path_at(*seed, seed->times.front() + frac * seed->duration());
        } else {
            x = (1.0 - frac) * x_from + frac * x_to;
        }
        Eigen::Map<Vec>(params.data() + (k - 1) * d, d) = x;
    }

    auto* fn = new detail::DiscreteAction(m, x_from, x_to, dt, n_steps);
    ceres::GradientProblem problem(fn);  // takes ownership
    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::LBFGS;
    options.max_lbfgs_rank = 20;
    options.max_num_iterations = 10000;
    options.gradient_tolerance = 1e-6;
    options.function_tolerance = 0.0;
    options.parameter_tolerance = 0.0;
    options.logging_type = ceres::SILENT;
    options.minimizer_progress_to_stdout = false;
    ceres::GradientProblemSolver::Summary summary;
    if (!params.empty()) ceres::Solve(options, problem, params.data(), &summary);

    ActionMinimum out;
    const auto pts = fn->unpack(params.data());
    out.path.kind = PathKind::generic;
    for (int k = 0; k <= n_steps; ++k) {
        out.path.times.push_back(k * dt);
        out.path.points.push_back(pts[static_cast<std::size_t>(k)]);
    }
    std::vector<double> grad(params.size());
    double cost = 0.0;
    fn->Evaluate(params.data(), &cost, grad.data());
    out.action = cost;
    out.gradient_max_norm = 0.0;
    for (double gi : grad) out.gradient_max_norm = std::max(out.gradient_max_norm, std::abs(gi));
    out.iterations = static_cast<int>(summary.iterations.size());
    out.termination = ceres::TerminationTypeToString(summary.termination_type);
    out.no_decrease = summary.termination_type == ceres::FAILURE && out.gradient_max_norm > 1e-6;
    return out;
}

}  // namespace ekramers
