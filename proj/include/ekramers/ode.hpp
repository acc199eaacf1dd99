#pragma once

// Explicit adaptive Dormand-Prince 5(4) integrator with cubic Hermite dense
// output. Autonomous systems only; the deterministic flows in this library
// never depend on time explicitly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "ekramers/linalg.hpp"

namespace ekramers::ode {

struct Options {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_init = 0.0;  ///< 0 selects an automatic initial step
    double h_max = std::numeric_limits<double>::infinity();
    double h_min = 1e-14;
    std::size_t max_steps = 5'000'000;
};

enum class Status { reached_end, stopped, step_underflow, too_many_steps };

struct Solution {
    std::vector<double> t;
    std::vector<Vec> x;
    std::vector<Vec> f;  ///< right-hand side at each sample
    Status status = Status::reached_end;
    std::size_t rejected = 0;

    const Vec& back() const { return x.back(); }

    /// Cubic Hermite interpolation on the accepted-step grid; clamps outside.
    Vec interpolate(double tq) const {
        if (tq <= t.front()) return x.front();
        if (tq >= t.back()) return x.back();
        const auto it = std::upper_bound(t.begin(), t.end(), tq);
        const std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
        const double h = t[k + 1] - t[k];
        const double s = (tq - t[k]) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        return h00 * x[k] + h10 * h * f[k] + h01 * x[k + 1] + h11 * h * f[k + 1];
    }
};

namespace detail {

inline double error_norm(const Vec& err, const Vec& x0, const Vec& x1, const Options& opt) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = opt.atol + opt.rtol * std::max(std::abs(x0[i]), std::abs(x1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

template <class Rhs>
double initial_step(Rhs& rhs, const Vec& x0, const Vec& f0, const Options& opt) {
    Vec sc = (opt.atol + opt.rtol * x0.array().abs()).matrix();
    const double d0 = std::sqrt((x0.array() / sc.array()).square().mean());
    const double d1 = std::sqrt((f0.array() / sc.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, opt.h_max);
    Vec x1 = x0 + h0 * f0;
    Vec f1(x0.size());
    rhs(x1, f1);
    const double d2 = std::sqrt((((f1 - f0).array() / sc.array()).square()).mean()) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, opt.h_max});
}

}  // namespace detail

/// Integrates x' = rhs(x) from t0 to t_end. `stop(t, x, f)` is consulted at
/// the initial point and after every accepted step; returning true ends the
/// integration with Status::stopped.
template <class Rhs, class Stop>
Solution integrate(Rhs&& rhs, const Vec& x0, double t0, double t_end, const Options& opt, Stop&& stop) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2, (void)c3, (void)c4, (void)c5;

    const auto n = x0.size();
    Solution sol;
    Vec x = x0;
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xs(n), xn(n), err(n);
    rhs(x, k1);
    double t = t0;
    sol.t.push_back(t);
    sol.x.push_back(x);
    sol.f.push_back(k1);
    if (stop(t, x, k1)) {
        sol.status = Status::stopped;
        return sol;
    }
    if (!(t_end > t0)) return sol;

    double h = opt.h_init > 0.0 ? opt.h_init : detail::initial_step(rhs, x, k1, opt);
    std::size_t steps = 0;
    while (t < t_end) {
        if (++steps > opt.max_steps) {
            sol.status = Status::too_many_steps;
            return sol;
        }
        h = std::min({h, opt.h_max, t_end - t});
        if (h < opt.h_min) {
            sol.status = Status::step_underflow;
            return sol;
        }
        xs = x + h * a21 * k1;
        rhs(xs, k2);
        xs = x + h * (a31 * k1 + a32 * k2);
        rhs(xs, k3);
        xs = x + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(xs, k4);
        xs = x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(xs, k5);
        xs = x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(xs, k6);
        xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(xn, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = detail::error_norm(err, x, xn, opt);
        if (!std::isfinite(en)) en = 1e10;
        if (en <= 1.0) {
            t = (t_end - t - h <= 1e-14 * std::max(1.0, std::abs(t_end))) ? t_end : t + h;
            x = xn;
            k1 = k7;  // FSAL
            sol.t.push_back(t);
            sol.x.push_back(x);
            sol.f.push_back(k1);
            if (stop(t, x, k1)) {
                sol.status = Status::stopped;
                return sol;
            }
            const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            h *= fac;
        } else {
            ++sol.rejected;
            h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
        }
    }
    sol.status = Status::reached_end;
    return sol;
}

template <class Rhs>
Solution integrate(Rhs&& rhs, const Vec& x0, double t0, double t_end, const Options& opt) {
    return integrate(std::forward<Rhs>(rhs), x0, t0, t_end, opt, [](double, const Vec&, const Vec&) { return false; });
}

}  // namespace ekramers::ode
