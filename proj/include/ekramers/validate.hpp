#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ekramers/dynamics.hpp"
#include "ekramers/error.hpp"
#include "ekramers/json.hpp"
#include "ekramers/landscape.hpp"
#include "ekramers/lyapunov.hpp"
#include "ekramers/registry.hpp"
#include "ekramers/saddle.hpp"

namespace ekramers {

struct Check {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string note;
};

struct ValidationReport {
    std::string model;
    std::vector<Check> checks;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }

    std::vector<std::string> failing() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.passed) out.push_back(c.name);
        return out;
    }

    const Check* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }

    Json to_json() const {
        Json arr = Json::array();
        for (const auto& c : checks) {
            Json j{{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"passed", c.passed}};
            if (!c.note.empty()) j["note"] = c.note;
            arr.push_back(j);
        }
        return Json{{"model", model}, {"checks", arr}, {"all_passed", all_passed()}};
    }
};

inline constexpr double kIdentityTolerance = 1e-8;
inline constexpr double kEtaSpreadTolerance = 0.02;
inline constexpr double kActionTolerance = 1e-3;

/// Eigenvalue formula for the linear saddle
///   lambda+ = [-mu (1 - rho) + mu (1 + rho) sqrt(1 + 4 rho alpha^2 / (mu^2 (1 + rho)^2))] / 2.
inline double saddle2d_lambda_plus(double mu, double rho, double alpha) {
    return 0.5 * (-mu * (1.0 - rho) + mu * (1.0 + rho) * std::sqrt(1.0 + 4.0 * rho * alpha * alpha / (mu * mu * (1.0 + rho) * (1.0 + rho))));
}

inline double saddle2d_sin_gamma(double mu, double alpha) { return 1.0 / std::sqrt(1.0 + (alpha / mu) * (alpha / mu)); }

struct GridResiduals {
    double eigenvalue = 0.0;
    double sin_gamma = 0.0;
    double det_h_identity = 0.0;
    double identities = 0.0;
    int points = 0;
};

inline const std::vector<double>& grid_mu() {
    static const std::vector<double> v{0.5, 1.0, 1.5, 2.0, 3.0};
    return v;
}
inline const std::vector<double>& grid_rho() {
    static const std::vector<double> v{0.25, 0.5, 0.75, 1.5, 2.0};
    return v;
}
inline const std::vector<double>& grid_alpha() {
    static const std::vector<double> v{0.0, 0.5, 1.0, 2.0, 3.0};
    return v;
}

/// Sweeps the 5x5x5 (mu, rho, alpha) grid of the linear saddle model.
inline GridResiduals saddle2d_grid() {
    GridResiduals g;
    const Vec origin = Vec::Zero(2);
    for (double mu : grid_mu())
        for (double rho : grid_rho())
            for (double alpha : grid_alpha()) {
                const ModelSpec m = models::linear_saddle_2d(mu, rho, alpha);
                const SaddleData s = saddle_geometry(m, origin);
                const double lam = saddle2d_lambda_plus(mu, rho, alpha);
                g.eigenvalue = std::max(g.eigenvalue, std::abs(s.lambda_plus - lam) / lam);
                g.sin_gamma = std::max(g.sin_gamma, std::abs(instanton_angle_sin(s) - saddle2d_sin_gamma(mu, alpha)));
                g.det_h_identity = std::max(g.det_h_identity, surface_integral_factors(s).det_identity_residual);
                g.identities = std::max(g.identities, saddle_invariants(m, s).max_identity());
                ++g.points;
            }
    return g;
}

namespace detail {

struct SuiteBuilder {
    ValidationReport& report;

    void add(std::string name, double residual, double tol, std::string note = {}) {
        const bool ok = std::isfinite(residual) && residual <= tol;
        report.checks.push_back({std::move(name), residual, tol, ok, std::move(note)});
    }

    /// Runs a group; an exception is recorded as a failed check named after the group.
    void guarded(const std::string& group, const std::function<void()>& body) {
        try {
            body();
        } catch (const Error& e) {
            report.checks.push_back({group, std::numeric_limits<double>::infinity(), 0.0, false,
                                     std::string(to_string(e.kind())) + ": " + e.what()});
        }
    }
};

}  // namespace detail

/// Runs every invariant applicable to the model. Failures are report entries,
/// never exceptions.
inline ValidationReport validate_suite(const ModelSpec& m, const std::optional<KnownFacts>& facts, std::string label,
                                       double epsilon = 0.1) {
    ValidationReport report;
    report.model = std::move(label);
    detail::SuiteBuilder sb{report};
    const std::vector<Vec> cloud = random_cloud(m, 200, 20240917);

    sb.guarded("model.diffusion", [&] {
        const DiffusionReport d = check_diffusion(m, cloud);
        sb.add("model.diffusion_symmetry", d.symmetry_residual, 1e-12);
        sb.add("model.diffusion_positive", d.min_eigenvalue > 0.0 ? 0.0 : 1.0, 0.0,
               "min eigenvalue " + format_double(d.min_eigenvalue));
    });
    if (!m.has_transverse()) return report;

    sb.guarded("model.transverse", [&] {
        const TransverseReport t = check_transverse(m, cloud);
        sb.add("model.decomposition", t.decomposition_residual, kTransverseTolerance);
        sb.add("model.orthogonality", t.orthogonality_residual, kTransverseTolerance);
    });
    sb.guarded("landscape.hj", [&] {
        double worst = 0.0;
        for (const auto& x : cloud) {
            const Vec g = m.grad_U(x);
            const double scale = 1.0 + std::abs(g.dot(m.a(x) * g)) + std::abs(m.b(x).dot(g));
            worst = std::max(worst, std::abs(hj_residual(m, x)) / scale);
        }
        sb.add("landscape.hj_residual", worst, kIdentityTolerance, "relative, 200 random points");
    });

    std::optional<Vec> saddle_point;
    if (facts && facts->saddle) saddle_point = *facts->saddle;
    const bool has_attractors = facts && facts->attractor1 && facts->attractor2;

    sb.guarded("landscape.f_endpoints", [&] {
        if (has_attractors) {
            sb.add("landscape.f_at_attractor1", std::abs(f_function(m, *facts->attractor1)), kIdentityTolerance);
            sb.add("landscape.f_at_attractor2", std::abs(f_function(m, *facts->attractor2)), kIdentityTolerance);
        }
        if (saddle_point) sb.add("landscape.f_at_saddle", std::abs(f_function(m, *saddle_point)), kIdentityTolerance);
    });
    if (has_attractors) {
        sb.guarded("lyapunov.attractor", [&] {
            const HessianResult h = quasipotential_hessian(m, *facts->attractor1, EquilibriumKind::attractor);
            sb.add("lyapunov.attractor_residual", h.lyapunov_residual, 1e-10, h.source);
            sb.add("lyapunov.attractor_vs_hess_u",
                   (h.h - detail::fd_potential_hessian(m, *facts->attractor1)).cwiseAbs().maxCoeff() /
                       std::max(1.0, h.h.cwiseAbs().maxCoeff()),
                   kHessianCrosscheckTolerance);
        });
    }
    if (!saddle_point) return report;

    sb.guarded("saddle.geometry", [&] {
        const Vec xs = find_saddle(m, *saddle_point);
        sb.add("saddle.located", (xs - *saddle_point).norm(), 1e-10);
        const SaddleData s =
            saddle_geometry(m, xs, has_attractors ? std::optional<Vec>(*facts->attractor2) : std::nullopt);
        const SaddleInvariants inv = saddle_invariants(m, s);
        const HessianResult hs = quasipotential_hessian(m, xs, EquilibriumKind::saddle);
        sb.add("lyapunov.saddle_residual", hs.lyapunov_residual, 1e-10, hs.source);
        sb.add("saddle.left_eigenvector", inv.left_eigenvector, kIdentityTolerance);
        sb.add("saddle.hd_antisymmetry", inv.hd_antisymmetry, kIdentityTolerance);
        sb.add("saddle.n_on_hinv_n", inv.n_on_hinv_n, kIdentityTolerance);
        sb.add("saddle.n_on_vprime", inv.n_on_vprime, kIdentityTolerance);
        sb.add("saddle.signature", std::abs(inv.negative_eigenvalues - 1), 0.0);
        if (std::isfinite(inv.hessian_crosscheck))
            sb.add("saddle.hessian_crosscheck", inv.hessian_crosscheck, kHessianCrosscheckTolerance);
        const SurfaceFactors sf = surface_integral_factors(s);
        sb.add("saddle.det_h_identity", sf.det_identity_residual, kIdentityTolerance);
        sb.add("saddle.ybar_eigen", sf.eigen_residual, kIdentityTolerance);
        sb.add("saddle.ybar_alignment", sf.alignment_angle, kIdentityTolerance);

        const EtaCancellation eta = eta_cancellation(s, 1.0, 0.0, epsilon);
        sb.add("saddle.eta_cancellation", eta.spread, kEtaSpreadTolerance,
               "asymptotic-Phi spread " + format_double(eta.asymptotic_spread));

        if (has_attractors) {
            const InstantonResult inst = compute_instanton(m, s, *facts->attractor1);
            const double dv = quasipotential(m, *facts->attractor1, xs);
            sb.add("instanton.endpoint_gaps", std::max(inst.endpoint_gaps[0], inst.endpoint_gaps[1]), kSmoothnessTolerance);
            sb.add("instanton.action_vs_delta_v", std::abs(inst.action - dv), kActionTolerance);
        }
    });
    return report;
}

inline ValidationReport validate_suite(const ModelInstance& mi, double epsilon = 0.1) {
    ValidationReport r = validate_suite(mi.spec, mi.entry.known_facts, mi.label(), epsilon);
    if (mi.entry.name == "saddle2d") {
        detail::SuiteBuilder sb{r};
        sb.guarded("saddle2d.formulas", [&] {
            const double mu = mi.parameters.at("mu"), rho = mi.parameters.at("rho"), alpha = mi.parameters.at("alpha");
            const SaddleData s = saddle_geometry(mi.spec, Vec::Zero(2));
            const double lam = saddle2d_lambda_plus(mu, rho, alpha);
            sb.add("saddle2d.eigenvalue_formula", std::abs(s.lambda_plus - lam) / lam, 1e-10);
            sb.add("saddle2d.sin_gamma", std::abs(instanton_angle_sin(s) - saddle2d_sin_gamma(mu, alpha)), kIdentityTolerance);
            const GridResiduals g = saddle2d_grid();
            sb.add("saddle2d.grid_eigenvalue", g.eigenvalue, kIdentityTolerance);
            sb.add("saddle2d.grid_sin_gamma", g.sin_gamma, kIdentityTolerance);
            sb.add("saddle2d.grid_det_h_identity", g.det_h_identity, kIdentityTolerance);
            sb.add("saddle2d.grid_identities", g.identities, kIdentityTolerance);
        });
    }
    return r;
}

}  // namespace ekramers
