#pragma once

#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ekramers/error.hpp"
#include "ekramers/model.hpp"

namespace ekramers {

using Params = std::map<std::string, double>;

/// Equilibria known in closed form for a registered model.
struct KnownFacts {
    std::optional<Vec> attractor1;
    std::optional<Vec> attractor2;
    std::optional<Vec> saddle;
    std::optional<double> delta_v;
};

struct RegisteredModel {
    std::string name;
    std::string description;
    Params parameters;  ///< defaults
    std::function<ModelSpec(const Params&)> spec_factory;
    std::optional<KnownFacts> known_facts;
};

namespace models {

inline ModelSpec with_unit_noise(ModelSpec m) {
    const int d = m.dim;
    m.noise_dim = d;
    m.sigma = [d](const Vec&, Mat& out) { out = Mat::Identity(d, d); };
    m.diffusion = [d](const Vec&, Mat& out) { out = Mat::Identity(d, d); };
    m.constant_noise = true;
    m.box_lo = Vec::Constant(d, -3.0);
    m.box_hi = Vec::Constant(d, 3.0);
    return m;
}

/// U = x^4/4 - x^2/2, b = -U'.
inline ModelSpec double_well_1d() {
    ModelSpec m;
    m.dim = 1;
    m.drift = [](const Vec& x, Vec& out) { out[0] = x[0] - x[0] * x[0] * x[0]; };
    m.drift_jacobian = [](const Vec& x, Mat& out) { out(0, 0) = 1.0 - 3.0 * x[0] * x[0]; };
    TransversePair t;
    t.potential = [](const Vec& x) {
        const double x2 = x[0] * x[0];
        return 0.25 * x2 * x2 - 0.5 * x2;
    };
    t.transverse_field = [](const Vec&, Vec& out) { out[0] = 0.0; };
    t.potential_gradient = [](const Vec& x, Vec& out) { out[0] = x[0] * x[0] * x[0] - x[0]; };
    t.potential_hessian = [](const Vec& x, Mat& out) { out(0, 0) = 3.0 * x[0] * x[0] - 1.0; };
    t.transverse_jacobian = [](const Vec&, Mat& out) { out(0, 0) = 0.0; };
    t.transverse_divergence = [](const Vec&) { return 0.0; };
    m.transverse = std::move(t);
    return with_unit_noise(std::move(m));
}

/// U = x^4/4 - x^2/2 + y^2/2 with l = g(x, y) J grad U, J = [[0,-1],[1,0]].
/// `g` and its gradient define the transverse strength; g == 0 is the
/// gradient system.
inline ModelSpec double_well_2d(std::function<double(double, double)> g,
                                std::function<std::pair<double, double>(double, double)> grad_g) {
    ModelSpec m;
    m.dim = 2;
    auto grad = [](double x, double y) { return std::pair{x * x * x - x, y}; };
    m.drift = [=](const Vec& p, Vec& out) {
        const auto [gx, gy] = grad(p[0], p[1]);
        const double s = g(p[0], p[1]);
        out[0] = -gx - s * gy;
        out[1] = -gy + s * gx;
    };
    // Dl = g J Hess U + (J grad U)(grad g)^T
    auto dl = [=](const Vec& p, Mat& out) {
        const double x = p[0], y = p[1];
        const auto [gx, gy] = grad(x, y);
        const double s = g(x, y);
        const auto [sx, sy] = grad_g(x, y);
        const double hxx = 3.0 * x * x - 1.0;
        out(0, 0) = -gy * sx;
        out(0, 1) = -s - gy * sy;
        out(1, 0) = s * hxx + gx * sx;
        out(1, 1) = gx * sy;
    };
    m.drift_jacobian = [=](const Vec& p, Mat& out) {
        dl(p, out);
        out(0, 0) -= 3.0 * p[0] * p[0] - 1.0;
        out(1, 1) -= 1.0;
    };
    TransversePair t;
    t.potential = [](const Vec& p) {
        const double x2 = p[0] * p[0];
        return 0.25 * x2 * x2 - 0.5 * x2 + 0.5 * p[1] * p[1];
    };
    t.transverse_field = [=](const Vec& p, Vec& out) {
        const auto [gx, gy] = grad(p[0], p[1]);
        const double s = g(p[0], p[1]);
        out[0] = -s * gy;
        out[1] = s * gx;
    };
    t.potential_gradient = [=](const Vec& p, Vec& out) {
        const auto [gx, gy] = grad(p[0], p[1]);
        out[0] = gx;
        out[1] = gy;
    };
    t.potential_hessian = [](const Vec& p, Mat& out) {
        out << 3.0 * p[0] * p[0] - 1.0, 0.0, 0.0, 1.0;
    };
    t.transverse_jacobian = dl;
    // g tr(J Hess U) vanishes; only <grad g, J grad U> remains.
    t.transverse_divergence = [=](const Vec& p) {
        const auto [gx, gy] = grad(p[0], p[1]);
        const auto [sx, sy] = grad_g(p[0], p[1]);
        return -sx * gy + sy * gx;
    };
    m.transverse = std::move(t);
    return with_unit_noise(std::move(m));
}

/// Linear saddle: U = x^T H x / 2, l = D x with H = diag(-rho mu, mu),
/// D = [[0, alpha], [alpha rho, 0]], a = I.
inline ModelSpec linear_saddle_2d(double mu, double rho, double alpha) {
    if (!(mu > 0.0) || !(rho > 0.0)) fail(ErrorKind::InvalidArgument, "saddle2d needs mu > 0 and rho > 0");
    Mat h(2, 2);
    h << -rho * mu, 0.0, 0.0, mu;
    Mat d(2, 2);
    d << 0.0, alpha, alpha * rho, 0.0;
    const Mat mstar = -h + d;
    ModelSpec m;
    m.dim = 2;
    m.drift = [mstar](const Vec& x, Vec& out) { out.noalias() = mstar * x; };
    m.drift_jacobian = [mstar](const Vec&, Mat& out) { out = mstar; };
    TransversePair t;
    t.potential = [h](const Vec& x) { return 0.5 * x.dot(h * x); };
    t.transverse_field = [d](const Vec& x, Vec& out) { out.noalias() = d * x; };
    t.potential_gradient = [h](const Vec& x, Vec& out) { out.noalias() = h * x; };
    t.potential_hessian = [h](const Vec&, Mat& out) { out = h; };
    t.transverse_jacobian = [d](const Vec&, Mat& out) { out = d; };
    t.transverse_divergence = [d](const Vec&) { return d.trace(); };
    m.transverse = std::move(t);
    return with_unit_noise(std::move(m));
}

inline Vec point(std::initializer_list<double> values) {
    Vec v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

}  // namespace models

inline std::vector<RegisteredModel> builtin_models() {
    std::vector<RegisteredModel> out;
    const KnownFacts dw2d_facts{models::point({-1.0, 0.0}), models::point({1.0, 0.0}), models::point({0.0, 0.0}), 0.25};

    out.push_back({"dw1d", "1D quartic double well, U = x^4/4 - x^2/2", {},
                   [](const Params&) { return models::double_well_1d(); },
                   KnownFacts{models::point({-1.0}), models::point({1.0}), models::point({0.0}), 0.25}});
    out.push_back({"dw2d", "2D gradient double well, U = x^4/4 - x^2/2 + y^2/2", {},
                   [](const Params&) {
                       return models::double_well_2d([](double, double) { return 0.0; },
                                                     [](double, double) { return std::pair{0.0, 0.0}; });
                   },
                   dw2d_facts});
    out.push_back({"dw2d-rot", "dw2d with divergence-free rotation l = c J grad U", {{"c", 1.0}},
                   [](const Params& p) {
                       const double c = p.at("c");
                       return models::double_well_2d([c](double, double) { return c; },
                                                     [](double, double) { return std::pair{0.0, 0.0}; });
                   },
                   dw2d_facts});
    out.push_back({"dw2d-shear", "dw2d with sheared rotation l = (1 + kappa x) J grad U (F = -kappa y)",
                   {{"kappa", 0.5}},
                   [](const Params& p) {
                       const double k = p.at("kappa");
                       return models::double_well_2d([k](double x, double) { return 1.0 + k * x; },
                                                     [k](double, double) { return std::pair{k, 0.0}; });
                   },
                   dw2d_facts});
    out.push_back({"saddle2d", "linear saddle with H = diag(-rho mu, mu), D = [[0, alpha], [alpha rho, 0]]",
                   {{"mu", 1.0}, {"rho", 0.5}, {"alpha", 1.0}},
                   [](const Params& p) { return models::linear_saddle_2d(p.at("mu"), p.at("rho"), p.at("alpha")); },
                   KnownFacts{std::nullopt, std::nullopt, models::point({0.0, 0.0}), std::nullopt}});
    return out;
}

inline RegisteredModel find_model(std::string_view name) {
    for (auto& m : builtin_models()) {
        if (m.name == name) return m;
    }
    fail(ErrorKind::NotFound, "no registered model named '" + std::string(name) + "'");
}

struct ModelRequest {
    std::string name;
    Params overrides;
};

/// Parses `name` or `name(k1=v1,k2=v2)`.
inline ModelRequest parse_model_request(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    ModelRequest req;
    const auto open = text.find('(');
    if (open == std::string_view::npos) {
        req.name = std::string(text);
    } else {
        if (text.back() != ')') fail(ErrorKind::InvalidArgument, "model string must end with ')'");
        req.name = std::string(trim(text.substr(0, open)));
        std::string_view body = text.substr(open + 1, text.size() - open - 2);
        while (!trim(body).empty()) {
            const auto comma = body.find(',');
            const std::string_view item = trim(body.substr(0, comma));
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) fail(ErrorKind::InvalidArgument, "expected key=value in model string");
            const std::string key(trim(item.substr(0, eq)));
            const std::string_view val = trim(item.substr(eq + 1));
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
            if (ec != std::errc() || ptr != val.data() + val.size() || key.empty())
                fail(ErrorKind::InvalidArgument, "bad parameter '" + std::string(item) + "'");
            req.overrides[key] = v;
            if (comma == std::string_view::npos) break;
            body.remove_prefix(comma + 1);
        }
    }
    if (req.name.empty()) fail(ErrorKind::InvalidArgument, "empty model name");
    return req;
}

struct ModelInstance {
    RegisteredModel entry;
    Params parameters;
    ModelSpec spec;

    const KnownFacts& facts() const {
        if (!entry.known_facts) fail(ErrorKind::NotFound, entry.name + " has no known equilibria");
        return *entry.known_facts;
    }

    /// `name(k1=v1,...)` with every parameter, values in shortest round-trip form.
    std::string label() const {
        if (parameters.empty()) return entry.name;
        std::string s = entry.name + "(";
        bool first = true;
        for (const auto& [k, v] : parameters) {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            s += (first ? "" : ",") + k + "=" + std::string(buf, res.ptr);
            first = false;
        }
        return s + ")";
    }
};

inline ModelInstance instantiate(std::string_view text) {
    const ModelRequest req = parse_model_request(text);
    RegisteredModel entry = find_model(req.name);
    Params params = entry.parameters;
    for (const auto& [k, v] : req.overrides) {
        if (!params.contains(k)) fail(ErrorKind::InvalidArgument, "model '" + req.name + "' has no parameter '" + k + "'");
        params[k] = v;
    }
    ModelSpec spec = entry.spec_factory(params);
    return {std::move(entry), std::move(params), std::move(spec)};
}

}  // namespace ekramers
