#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ekramers/error.hpp"
#include "ekramers/linalg.hpp"
#include "ekramers/model.hpp"
#include "ekramers/random.hpp"
#include "ekramers/saddle_data.hpp"

namespace ekramers {

struct McConfig {
    double epsilon = 0.1;
    double dt = 1e-3;
    int n_samples = 1000;
    std::uint64_t seed = 1;
    double stop_radius = 0.2;
    std::int64_t max_steps = 10'000'000;
    int workers = 1;

    void validate() const {
        if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
        if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
        if (dt > epsilon / 10.0 || dt > 1e-2)
            fail(ErrorKind::InvalidArgument, "dt must satisfy dt <= epsilon/10 and dt <= 1e-2");
        if (n_samples < 1) fail(ErrorKind::InvalidArgument, "n_samples must be at least 1");
        if (!(stop_radius > 0.0)) fail(ErrorKind::InvalidArgument, "stop_radius must be positive");
        if (max_steps < 1) fail(ErrorKind::InvalidArgument, "max_steps must be at least 1");
        if (workers < 1) fail(ErrorKind::InvalidArgument, "workers must be at least 1");
    }
};

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int n = 0;
    int censored = 0;
    double median = 0.0;
    double exp_fit_rate = 0.0;
    double ks_pvalue_proxy = 0.0;
    std::vector<double> times;  ///< completed passage times, trajectory order
};

namespace stats {

/// Pairwise (cascade) summation; the result depends only on the order of `v`.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

inline double mean(std::span<const double> v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Maximum-likelihood exponential rate of the tail beyond the median,
/// n_tail / sum(t - t_median).
inline double tail_exponential_rate(const std::vector<double>& v) {
    const double tc = median(v);
    std::vector<double> excess;
    for (double t : v)
        if (t > tc) excess.push_back(t - tc);
    if (excess.empty()) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(excess.size()) / pairwise_sum(excess);
}

/// Wilson score interval for k successes in n trials at normal quantile z.
inline std::pair<double, double> wilson_interval(int k, int n, double z) {
    const double nn = n, p = k / nn, z2 = z * z;
    const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace stats

/// sup_t |F_emp(t) - (1 - exp(-t / mean))|.
inline double exit_time_distribution_check(const std::vector<double>& times) {
    if (times.size() < 500) fail(ErrorKind::InvalidArgument, "need at least 500 samples");
    std::vector<double> v = times;
    std::sort(v.begin(), v.end());
    const double mu = stats::mean(v);
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = 1.0 - std::exp(-v[i] / mu);
        d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return d;
}

namespace detail {

/// Runs `job(k)` for k in [0, n) on `workers` threads. Jobs write only their
/// own slot, so the outcome does not depend on scheduling.
inline void parallel_for(int n, int workers, const std::function<void(int)>& job) {
    if (workers <= 1 || n <= 1) {
        for (int k = 0; k < n; ++k) job(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n); ++w) {
        pool.emplace_back([&] {
            for (int k = next++; k < n; k = next++) job(k);
        });
    }
    for (auto& t : pool) t.join();
}

/// Euler-Maruyama for dX = b dt + sqrt(2 eps) sigma dW until `done(x)`.
/// Returns the passage time, or nullopt if censored or non-finite.
inline std::optional<double> euler_maruyama_passage(const ModelSpec& m, const McConfig& cfg, const Vec& x0,
                                                    std::uint64_t stream, const std::function<bool(const Vec&)>& done) {
    Philox4x32 eng(cfg.seed, stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int d = m.dim, q = m.noise_dim;
    Vec x = x0, bx(d), xi(q), kick(d);
    Mat sig(d, q);
    m.sigma(x, sig);
    const double scale = std::sqrt(2.0 * cfg.epsilon * cfg.dt);
    for (std::int64_t step = 1; step <= cfg.max_steps; ++step) {
        m.drift(x, bx);
        for (int i = 0; i < q; ++i) xi[i] = normal(eng);
        if (!m.constant_noise) m.sigma(x, sig);
        kick.noalias() = sig * xi;
        x += cfg.dt * bx + scale * kick;
        if (!x.allFinite()) return std::nullopt;
        if (done(x)) return static_cast<double>(step) * cfg.dt;
    }
    return std::nullopt;
}

inline McEstimate summarize(const std::vector<std::optional<double>>& raw) {
    McEstimate e;
    for (const auto& t : raw) {
        if (t) e.times.push_back(*t);
        else ++e.censored;
    }
    e.n = static_cast<int>(e.times.size());
    if (e.n == 0) fail(ErrorKind::AllCensored, "every trajectory was censored");
    e.mean = stats::mean(e.times);
    if (e.n > 1) {
        std::vector<double> dev;
        dev.reserve(e.times.size());
        for (double t : e.times) dev.push_back((t - e.mean) * (t - e.mean));
        e.stderr_ = std::sqrt(stats::pairwise_sum(dev) / (e.n - 1)) / std::sqrt(static_cast<double>(e.n));
    }
    e.median = stats::median(e.times);
    e.exp_fit_rate = stats::tail_exponential_rate(e.times);
    e.ks_pvalue_proxy = e.n >= 500 ? exit_time_distribution_check(e.times) : std::numeric_limits<double>::quiet_NaN();
    return e;
}

}  // namespace detail

/// First-passage times from `from` into the ball of radius stop_radius around `to`.
inline McEstimate sample_transition_times(const ModelSpec& m, const McConfig& cfg, const Vec& from, const Vec& to) {
    cfg.validate();
    if ((from - to).norm() <= cfg.stop_radius)
        fail(ErrorKind::InvalidArgument, "start point already lies inside the target ball");
    const double r2 = cfg.stop_radius * cfg.stop_radius;
    auto done = [&](const Vec& x) { return (x - to).squaredNorm() <= r2; };
    std::vector<std::optional<double>> raw(static_cast<std::size_t>(cfg.n_samples));
    detail::parallel_for(cfg.n_samples, cfg.workers, [&](int k) {
        raw[static_cast<std::size_t>(k)] = detail::euler_maruyama_passage(m, cfg, from, static_cast<std::uint64_t>(k), done);
    });
    return detail::summarize(raw);
}

/// First exit times from a domain described by `outside(x)`.
inline McEstimate sample_exit_times(const ModelSpec& m, const McConfig& cfg, const Vec& from,
                                    const std::function<bool(const Vec&)>& outside) {
    cfg.validate();
    if (outside(from)) fail(ErrorKind::InvalidArgument, "start point lies outside the domain");
    std::vector<std::optional<double>> raw(static_cast<std::size_t>(cfg.n_samples));
    detail::parallel_for(cfg.n_samples, cfg.workers, [&](int k) {
        raw[static_cast<std::size_t>(k)] =
            detail::euler_maruyama_passage(m, cfg, from, static_cast<std::uint64_t>(k), outside);
    });
    return detail::summarize(raw);
}

inline constexpr double kWilsonZ99 = 2.5758293035489;

struct CommittorEstimate {
    double fraction = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int hits = 0;
    int n = 0;
    int censored = 0;
};

/// Fraction of linearized trajectories dX = M*(X - x*) dt + sqrt(2 eps) sigma(x*) dW
/// started at y that reach zeta+ = +z_cap before -z_cap.
inline CommittorEstimate empirical_committor(const ModelSpec& m, const SaddleData& s, const Vec& y, const McConfig& cfg,
                                             double z_cap) {
    cfg.validate();
    if (!(z_cap > 0.0)) fail(ErrorKind::InvalidArgument, "z_cap must be positive");
    const Mat sig = m.sig(s.x_star);
    const Mat mstar = s.m_star;
    auto zeta = [&](const Vec& x) { return (x - s.x_star).dot(s.n_star) / s.cos_theta; };
    if (std::abs(zeta(y)) >= z_cap) fail(ErrorKind::InvalidArgument, "z_cap must exceed |zeta+(y)|");

    ModelSpec lin;
    lin.dim = m.dim;
    lin.noise_dim = m.noise_dim;
    lin.drift = [&](const Vec& x, Vec& out) { out.noalias() = mstar * (x - s.x_star); };
    lin.sigma = [&](const Vec&, Mat& out) { out = sig; };
    lin.constant_noise = true;

    CommittorEstimate c;
    std::vector<int> side(static_cast<std::size_t>(cfg.n_samples), -1);
    detail::parallel_for(cfg.n_samples, cfg.workers, [&](int k) {
        int hit = -1;
        detail::euler_maruyama_passage(lin, cfg, y, static_cast<std::uint64_t>(k), [&](const Vec& x) {
            const double z = zeta(x);
            if (z >= z_cap) hit = 1;
            else if (z <= -z_cap) hit = 0;
            return hit >= 0;
        });
        side[static_cast<std::size_t>(k)] = hit;
    });
    for (int v : side) {
        if (v < 0) ++c.censored;
        else {
            ++c.n;
            c.hits += v;
        }
    }
    if (c.n == 0) fail(ErrorKind::AllCensored, "every committor trajectory was censored");
    c.fraction = static_cast<double>(c.hits) / c.n;
    std::tie(c.ci_low, c.ci_high) = stats::wilson_interval(c.hits, c.n, kWilsonZ99);
    return c;
}

struct ArrheniusFit {
    double delta_v_hat = 0.0;
    double log_prefactor_hat = 0.0;
    double r2 = 0.0;
};

/// Least squares of log(mean time) against 1/eps.
inline ArrheniusFit arrhenius_regression(const std::vector<double>& epsilons, const std::vector<double>& mean_times) {
    if (epsilons.size() != mean_times.size() || epsilons.size() < 2)
        fail(ErrorKind::InvalidArgument, "need at least two (epsilon, mean time) pairs");
    const std::size_t n = epsilons.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(epsilons[i] > 0.0) || !(mean_times[i] > 0.0))
            fail(ErrorKind::InvalidArgument, "epsilons and mean times must be positive");
        xs[i] = 1.0 / epsilons[i];
        ys[i] = std::log(mean_times[i]);
    }
    const double mx = stats::mean(xs), my = stats::mean(ys);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    ArrheniusFit f;
    f.delta_v_hat = sxy / sxx;
    f.log_prefactor_hat = my - f.delta_v_hat * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (f.log_prefactor_hat + f.delta_v_hat * xs[i]);
        ss_res += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

/// Slowest deterministic relaxation time 1 / min |Re lambda(Db(x))| at an attractor.
inline double relaxation_time(const ModelSpec& m, const Vec& attractor) {
    const Eigen::EigenSolver<Mat> es(jacobian(m, FieldKind::drift, attractor), false);
    return 1.0 / es.eigenvalues().real().cwiseAbs().minCoeff();
}

struct ArrheniusResult {
    ArrheniusFit fit;
    std::vector<McEstimate> estimates;
    double relaxation_time = 0.0;
};

/// Simulates mean transition times at each epsilon (dt from the template)
/// and regresses. Every epsilon must be metastable: mean >= 50 relaxation times.
inline ArrheniusResult arrhenius_fit(const ModelSpec& m, const Vec& from, const Vec& to,
                                     const std::vector<double>& epsilons, const McConfig& tmpl) {
    if (epsilons.size() < 3) fail(ErrorKind::InvalidArgument, "need at least three epsilon values");
    ArrheniusResult r;
    r.relaxation_time = relaxation_time(m, from);
    std::vector<double> means;
    for (double eps : epsilons) {
        McConfig cfg = tmpl;
        cfg.epsilon = eps;
        r.estimates.push_back(sample_transition_times(m, cfg, from, to));
        if (r.estimates.back().mean < 50.0 * r.relaxation_time)
            fail(ErrorKind::InsufficientRegime, "mean transition time at epsilon=" + std::to_string(eps) +
                                                    " is below 50 relaxation times");
        means.push_back(r.estimates.back().mean);
    }
    r.fit = arrhenius_regression(epsilons, means);
    return r;
}

}  // namespace ekramers
