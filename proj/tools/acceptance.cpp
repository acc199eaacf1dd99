// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "ekramers/ekramers.hpp"

using namespace ekramers;

namespace {

constexpr double kGradientRelTol = 1e-10;
constexpr double kReversibleMcTol = 0.25;
constexpr double kIrreversibleMcTol = 0.30;
constexpr double kArrheniusSlopeTol = 0.03;
constexpr double kIdentityTol = 1e-8;
constexpr double kCommittorAnalyticTol = 5e-8;
constexpr double kEtaSpreadTol = 0.02;
constexpr double kActionVsDeltaV = 1e-3;
constexpr double kActionVsMinimizer = 5e-3;
constexpr double kExitRateTol = 0.30;

constexpr std::uint64_t kSeed = 20240917;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const Error& e) {
        o = {false, std::string("error ") + std::string(to_string(e.kind())) + ": " + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s | %s | %.1fs\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int hardware_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

RateReport rate_for(const ModelInstance& mi, double eps) {
    const auto& f = mi.facts();
    RateOptions ro;
    ro.saddle_guess = f.saddle;
    return transition_rate(mi.spec, *f.attractor1, *f.attractor2, eps, ro);
}

McEstimate simulate(const ModelInstance& mi, double eps, int n, int workers) {
    McConfig cfg;
    cfg.epsilon = eps;
    cfg.dt = 1e-3;
    cfg.n_samples = n;
    cfg.seed = kSeed;
    cfg.workers = workers;
    const auto& f = mi.facts();
    return sample_transition_times(mi.spec, cfg, *f.attractor1, *f.attractor2);
}

Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string detail;
    bool ok = true;
    for (const char* name : {"dw1d", "dw2d"}) {
        const ModelInstance mi = instantiate(name);
        const auto& f = mi.facts();
        const RateReport r = rate_for(mi, 0.1);
        const double classical = classical_eyring_kramers(mi.spec, *f.attractor1, r.saddle, 0.1);
        const double rel = std::abs(r.mean_time - classical) / classical;
        const double pref_err = std::abs(r.prefactor - 2.0 * std::numbers::pi / std::numbers::sqrt2);
        worst = std::max(worst, rel);
        ok = ok && rel < kGradientRelTol && pref_err < 1e-10 && std::abs(r.delta_v - 0.25) < 1e-12;
        detail += fmt("%s prefactor=%.12f dV=%.6f ", name, r.prefactor, r.delta_v);
    }
    const double secs = elapsed_since(t0);
    return {ok && secs < 1.0, detail + fmt("max rel err=%.2e runtime=%.3fs", worst, secs)};
}

Outcome criterion2() {
    const ModelInstance mi = instantiate("dw1d");
    const double target = 2.0 * std::numbers::pi / std::numbers::sqrt2 * std::exp(2.5);
    const auto t0 = std::chrono::steady_clock::now();
    const McEstimate e = simulate(mi, 0.1, 2000, 1);
    const double secs = elapsed_since(t0);
    const double rel = std::abs(e.mean - target) / target;
    return {rel < kReversibleMcTol && secs < 120.0 && e.censored == 0,
            fmt("mean=%.3f +- %.3f target=%.3f rel=%.3f censored=%d single-thread %.1fs", e.mean, e.stderr_, target, rel,
                e.censored, secs)};
}

Outcome criterion3() {
    const ModelInstance mi = instantiate("dw2d-rot(c=1)");
    const RateReport r = rate_for(mi, 0.1);
    const double target = std::numbers::pi * std::exp(2.5);
    const auto t0 = std::chrono::steady_clock::now();
    const McEstimate e = simulate(mi, 0.1, 2000, 1);
    const double secs = elapsed_since(t0);
    const double rel = std::abs(e.mean - target) / target;
    const bool formula = std::abs(r.mean_time - target) / target < 1e-8 && std::abs(r.lambda_plus - std::numbers::sqrt2) < 1e-10 &&
                         std::abs(r.f_correction - 1.0) < 1e-12;
    return {rel < kIrreversibleMcTol && formula && secs < 300.0,
            fmt("mean=%.3f +- %.3f predicted=%.3f (lambda+=%.10f, F-corr=%.12f) rel=%.3f %.1fs", e.mean, e.stderr_,
                r.mean_time, r.lambda_plus, r.f_correction, rel, secs)};
}

Outcome criterion4() {
    const ModelInstance mi = instantiate("dw2d-shear(kappa=0.5)");
    const RateReport r = rate_for(mi, 0.1);
    const double without = r.mean_time / r.f_correction;
    const auto t0 = std::chrono::steady_clock::now();
    const McEstimate e = simulate(mi, 0.1, 2000, 1);
    const double secs = elapsed_since(t0);
    const double rel = std::abs(e.mean - r.mean_time) / r.mean_time;
    const double rel_without = std::abs(e.mean - without) / without;
    const bool better = std::abs(r.f_integral) <= 0.1 || std::abs(std::log(e.mean / r.mean_time)) < std::abs(std::log(e.mean / without));
    return {rel < kIrreversibleMcTol && better && secs < 600.0,
            fmt("mean=%.3f +- %.3f with F=%.3f (int F=%.5f, rel=%.3f) without F=%.3f (rel=%.3f) %.1fs", e.mean, e.stderr_,
                r.mean_time, r.f_integral, rel, without, rel_without, secs)};
}

Outcome criterion5() {
    const ModelInstance mi = instantiate("dw1d");
    const auto& f = mi.facts();
    McConfig tmpl;
    tmpl.dt = 1e-3;
    tmpl.n_samples = 3000;
    tmpl.seed = kSeed;
    tmpl.workers = hardware_workers();
    const ArrheniusResult a = arrhenius_fit(mi.spec, *f.attractor1, *f.attractor2, {0.07, 0.09, 0.12}, tmpl);
    return {std::abs(a.fit.delta_v_hat - 0.25) <= kArrheniusSlopeTol,
            fmt("slope=%.4f intercept=%.4f r2=%.5f means=%.2f/%.2f/%.2f", a.fit.delta_v_hat, a.fit.log_prefactor_hat, a.fit.r2,
                a.estimates[0].mean, a.estimates[1].mean, a.estimates[2].mean)};
}

Outcome criterion6() {
    const std::vector<std::string> names{"hd_antisymmetry", "left_eigenvector", "n_on_vprime",  "det_h_identity",
                                         "hj_residual",     "f_at_attractor1",  "f_at_attractor2", "f_at_saddle",
                                         "attractor_residual", "saddle_residual"};
    double worst = 0.0;
    bool ok = true;
    std::string missing;
    for (const auto& entry : builtin_models()) {
        const ValidationReport r = validate_suite(instantiate(entry.name));
        for (const auto& c : r.checks) {
            if (c.residual == std::numeric_limits<double>::infinity()) {
                ok = false;
                missing += entry.name + ":" + c.name + " ";
            }
            for (const auto& n : names)
                if (c.name.ends_with(n)) {
                    worst = std::max(worst, c.residual);
                    ok = ok && c.residual <= kIdentityTol;
                }
        }
    }
    const GridResiduals g = saddle2d_grid();
    ok = ok && g.eigenvalue <= kIdentityTol && g.sin_gamma <= kIdentityTol && g.det_h_identity <= kIdentityTol &&
         g.identities <= kIdentityTol && g.points == 125;
    return {ok, fmt("max model residual=%.2e; grid(%d): eigen=%.2e sin_gamma=%.2e det_h=%.2e identities=%.2e %s", worst,
                    g.points, g.eigenvalue, g.sin_gamma, g.det_h_identity, g.identities, missing.c_str())};
}

Outcome criterion7() {
    const ModelInstance mi = instantiate("dw2d");
    const auto& f = mi.facts();
    const SaddleData s = saddle_geometry(mi.spec, find_saddle(mi.spec, *f.saddle), f.attractor2);
    const double eps = 0.01;
    const double analytic = committor(s, s.x_star - 0.3 * s.v_plus, eps);
    bool ok = std::abs(analytic - 0.0013498980316301) < kCommittorAnalyticTol;
    std::string detail = fmt("Phi(-3)=%.7f;", analytic);
    McConfig cfg;
    cfg.epsilon = eps;
    cfg.dt = 1e-4;
    cfg.n_samples = 2000;
    cfg.seed = kSeed;
    cfg.workers = hardware_workers();
    for (double r : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
        const Vec y = s.x_star + r * std::sqrt(eps) * s.v_plus;
        const double q = committor(s, y, eps);
        const CommittorEstimate c = empirical_committor(mi.spec, s, y, cfg, 1.0);
        const bool in = c.ci_low <= q && q <= c.ci_high;
        ok = ok && in && c.censored == 0;
        detail += fmt(" r=%+.0f q=%.4f emp=%.4f [%.4f,%.4f]%s", r, q, c.fraction, c.ci_low, c.ci_high, in ? "" : "!");
    }
    return {ok, detail};
}

Outcome criterion8() {
    double worst = 0.0, worst_asym = 0.0;
    std::string detail;
    for (const char* name : {"dw2d", "dw2d-rot(c=1)", "dw2d-shear(kappa=0.5)"}) {
        const ModelInstance mi = instantiate(name);
        const RateReport r = rate_for(mi, 0.1);
        const EtaCancellation e = eta_cancellation(r.saddle_data, r.c_star, r.delta_v, 0.1);
        worst = std::max(worst, e.spread);
        worst_asym = std::max(worst_asym, e.asymptotic_spread);
        detail += fmt("%s ratios=", name);
        for (const auto& pt : e.points) detail += fmt("%.5f/", pt.rate / e.closed_form);
        detail += fmt(" closed*E[tau]=%.12f; ", e.closed_form * r.mean_time);
    }
    return {worst < kEtaSpreadTol,
            detail + fmt("spread(exact Phi)=%.4f; auxiliary spread(asymptotic Phi)=%.1e", worst, worst_asym)};
}

Outcome criterion9() {
    bool ok = true;
    std::string detail;
    for (const auto& entry : builtin_models()) {
        const ModelInstance mi = instantiate(entry.name);
        if (mi.spec.dim != 2 || !entry.known_facts || !entry.known_facts->attractor1) continue;
        const auto& f = mi.facts();
        const Vec xs = find_saddle(mi.spec, *f.saddle);
        const SaddleData s = saddle_geometry(mi.spec, xs, f.attractor2);
        const InstantonResult inst = compute_instanton(mi.spec, s, *f.attractor1);
        const double dv = quasipotential(mi.spec, *f.attractor1, xs);
        const ActionMinimum am = minimize_action(mi.spec, *f.attractor1, xs, 20.0, 1000);
        const double e1 = std::abs(inst.action - dv), e2 = std::abs(inst.action - am.action);
        ok = ok && e1 < kActionVsDeltaV && e2 < kActionVsMinimizer;
        detail += fmt("%s S=%.7f |S-dV|=%.1e |S-Smin|=%.1e; ", entry.name.c_str(), inst.action, e1, e2);
    }
    return {ok, detail};
}

Outcome criterion10() {
    const ModelInstance mi = instantiate("dw2d");
    const Vec x1 = *mi.facts().attractor1;
    const double eps = 0.1;
    const DomainSpec dom = level_set_domain(mi.spec, x1, 0.15, 256);
    const ExitRateReport q = quasistationary_exit_rate(mi.spec, dom, eps);
    McConfig cfg;
    cfg.epsilon = eps;
    cfg.dt = 1e-3;
    cfg.n_samples = 4000;
    cfg.seed = kSeed;
    cfg.workers = hardware_workers();
    const McEstimate e = sample_exit_times(mi.spec, cfg, x1, dom.outside);
    const double rel = std::abs(q.rate - e.exp_fit_rate) / e.exp_fit_rate;
    return {rel < kExitRateTol,
            fmt("lambda_qst=%.4f exp-fit rate=%.4f rel=%.3f; auxiliary 1/mean=%.4f ks=%.3f skipped=%d/%d", q.rate,
                e.exp_fit_rate, rel, 1.0 / e.mean, e.ks_pvalue_proxy, q.characteristic + q.unreachable, q.samples)};
}

}  // namespace

int main() {
    run(1, "gradient reduction", criterion1);
    run(2, "MC reversible dw1d", criterion2);
    run(3, "MC divergence-free dw2d-rot", criterion3);
    run(4, "MC nonzero F dw2d-shear", criterion4);
    run(5, "Arrhenius slope", criterion5);
    run(6, "identity suite", criterion6);
    run(7, "committor", criterion7);
    run(8, "eta cancellation", criterion8);
    run(9, "instanton action", criterion9);
    run(10, "exit-rate oracle", criterion10);
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
