#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ekramers/ekramers.hpp"

namespace ekramers::cli {
namespace {

constexpr double kActionDisagreement = 5e-3;

struct Options {
    std::string model;
    double epsilon = 0.1;
    double dt = 1e-3;
    int n = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::optional<double> tol;
    std::string emit_instanton;
    std::string dump_times;
    std::string grid;
    std::string point;
    double zeta = 0.0;
    double zcap = 0.5;
    std::string action = "list";
};

struct GridAxis {
    double lo, hi;
    int n;
};

std::vector<GridAxis> parse_grid(const std::string& text, int dim) {
    std::vector<GridAxis> axes;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::vector<std::string> parts;
        std::stringstream is(item);
        std::string p;
        while (std::getline(is, p, ':')) parts.push_back(p);
        if (parts.size() != 4 || parts[0] != "x" + std::to_string(axes.size() + 1))
            fail(ErrorKind::InvalidArgument, "grid axis must read xK:lo:hi:n, got '" + item + "'");
        GridAxis a{};
        try {
            a = {std::stod(parts[1]), std::stod(parts[2]), std::stoi(parts[3])};
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidArgument, "bad number in grid axis '" + item + "'");
        }
        if (a.n < 1 || !(a.hi >= a.lo)) fail(ErrorKind::InvalidArgument, "grid axis needs n >= 1 and hi >= lo");
        axes.push_back(a);
    }
    if (static_cast<int>(axes.size()) != dim)
        fail(ErrorKind::InvalidArgument, "grid has " + std::to_string(axes.size()) + " axes, model dimension is " +
                                             std::to_string(dim));
    return axes;
}

std::vector<Vec> grid_points(const std::vector<GridAxis>& axes) {
    std::vector<Vec> pts{Vec(0)};
    for (const auto& a : axes) {
        std::vector<Vec> next;
        for (const auto& base : pts)
            for (int k = 0; k < a.n; ++k) {
                Vec x(base.size() + 1);
                x.head(base.size()) = base;
                x[base.size()] = a.n == 1 ? a.lo : a.lo + (a.hi - a.lo) * k / (a.n - 1);
                next.push_back(std::move(x));
            }
        pts = std::move(next);
    }
    return pts;
}

Json config_block(const std::string& command, const Options& o, std::initializer_list<const char*> keys) {
    Json c{{"command", command}};
    for (const std::string k : keys) {
        if (k == "model") c["model"] = o.model;
        else if (k == "epsilon") c["epsilon"] = o.epsilon;
        else if (k == "dt") c["dt"] = o.dt;
        else if (k == "n") c["n"] = o.n;
        else if (k == "seed") c["seed"] = o.seed;
        else if (k == "workers") c["workers"] = o.workers;
        else if (k == "tol") c["tol"] = o.tol.value_or(InstantonOptions{}.tol);
        else if (k == "emit-instanton" && !o.emit_instanton.empty()) c["emit-instanton"] = o.emit_instanton;
        else if (k == "dump-times" && !o.dump_times.empty()) c["dump-times"] = o.dump_times;
        else if (k == "grid" && !o.grid.empty()) c["grid"] = o.grid;
        else if (k == "point" && !o.point.empty()) c["point"] = o.point;
        else if (k == "zeta") c["zeta"] = o.zeta;
        else if (k == "zcap") c["zcap"] = o.zcap;
        else if (k == "action") c["action"] = o.action;
    }
    return c;
}

void emit(std::ostream& out, const Json& config, const Json& result) {
    out << to_canonical_json(Json{{"config", config}, {"result", result}}) << '\n';
}

void write_path(const std::string& file, const Path& p) {
    std::ofstream os(file);
    if (!os) fail(ErrorKind::InvalidArgument, "cannot open '" + file + "' for writing");
    write_csv(os, p);
}

McConfig mc_config(const Options& o) {
    McConfig c;
    c.epsilon = o.epsilon;
    c.dt = o.dt;
    c.n_samples = o.n;
    c.seed = o.seed;
    c.workers = o.workers;
    return c;
}

Json model_json(const RegisteredModel& r) {
    Json params = Json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    Json j{{"name", r.name}, {"description", r.description}, {"parameters", params}};
    if (r.known_facts) {
        const auto& f = *r.known_facts;
        Json facts = Json::object();
        if (f.attractor1) facts["attractor1"] = to_json(*f.attractor1);
        if (f.attractor2) facts["attractor2"] = to_json(*f.attractor2);
        if (f.saddle) facts["saddle"] = to_json(*f.saddle);
        if (f.delta_v) facts["delta_v"] = *f.delta_v;
        j["known_facts"] = facts;
    }
    return j;
}

Json estimate_json(const McEstimate& e) {
    return Json{{"mean", e.mean},     {"stderr", e.stderr_},         {"n", e.n},
                {"censored", e.censored}, {"median", e.median}, {"exp_fit_rate", e.exp_fit_rate},
                {"ks_pvalue_proxy", e.ks_pvalue_proxy}};
}

Json rate_json(const RateReport& r) {
    return Json{{"delta_v", r.delta_v},
                {"lambda_plus", r.lambda_plus},
                {"hessian_ratio", r.hessian_ratio},
                {"f_integral", r.f_integral},
                {"f_correction", r.f_correction},
                {"prefactor", r.prefactor},
                {"epsilon", r.epsilon},
                {"mean_time", r.mean_time},
                {"rate", r.rate},
                {"c_star", r.c_star},
                {"diagnostics",
                 {{"saddle", to_json(r.saddle)},
                  {"det_h_star", r.det_h_star},
                  {"det_h_bar", r.det_h_bar},
                  {"instanton_action", r.instanton_action},
                  {"endpoint_gaps", {r.endpoint_gaps[0], r.endpoint_gaps[1]}},
                  {"max_identity_residual", r.max_identity_residual},
                  {"hessian_crosscheck", r.hessian_crosscheck},
                  {"hessian_source", r.hessian_source}}}};
}

InstantonOptions instanton_options(const Options& o) {
    InstantonOptions io;
    if (o.tol) io.tol = *o.tol;
    return io;
}

int cmd_models(const Options& o, std::ostream& out) {
    if (o.action == "list") {
        Json arr = Json::array();
        for (const auto& r : builtin_models()) arr.push_back(model_json(r));
        emit(out, config_block("models", o, {"action"}), arr);
        return kOk;
    }
    if (o.action == "show") {
        if (o.model.empty()) fail(ErrorKind::InvalidArgument, "models show needs --model");
        const ModelInstance mi = instantiate(o.model);
        Json j = model_json(mi.entry);
        Json params = Json::object();
        for (const auto& [k, v] : mi.parameters) params[k] = v;
        j["parameters"] = params;
        j["dim"] = mi.spec.dim;
        j["noise_dim"] = mi.spec.noise_dim;
        j["box_lo"] = to_json(mi.spec.box_lo);
        j["box_hi"] = to_json(mi.spec.box_hi);
        j["has_transverse"] = mi.spec.has_transverse();
        emit(out, config_block("models", o, {"action", "model"}), j);
        return kOk;
    }
    fail(ErrorKind::InvalidArgument, "models action must be 'list' or 'show'");
}

int cmd_instanton(const Options& o, std::ostream& out) {
    const ModelInstance mi = instantiate(o.model);
    const KnownFacts& f = mi.facts();
    if (!f.attractor1 || !f.saddle) fail(ErrorKind::NotFound, mi.entry.name + " has no attractor/saddle pair");
    const Vec xs = find_saddle(mi.spec, *f.saddle);
    const SaddleData s = saddle_geometry(mi.spec, xs, f.attractor2);
    const InstantonResult r = compute_instanton(mi.spec, s, *f.attractor1, instanton_options(o));
    if (!o.emit_instanton.empty()) write_path(o.emit_instanton, r.path);
    // A second, independent construction; the two are reported, not reconciled.
    const ActionMinimum am = minimize_action(mi.spec, *f.attractor1, xs, 20.0, 1000);
    Json j{{"saddle", to_json(xs)},
           {"action", r.action},
           {"action_minimized", am.action},
           {"disagreement", std::abs(r.action - am.action) > kActionDisagreement},
           {"delta_v", quasipotential(mi.spec, *f.attractor1, xs)},
           {"f_integral", f_integral_along(mi.spec, r.path)},
           {"endpoint_gaps", {r.endpoint_gaps[0], r.endpoint_gaps[1]}},
           {"incoming_direction", to_json(r.incoming_direction)},
           {"samples", r.path.size()}};
    emit(out, config_block("instanton", o, {"model", "tol", "emit-instanton"}), j);
    return kOk;
}

Json landscape_record(const ModelInstance& mi, const Vec& attractor, const Vec& x, double eps) {
    Json j{{"x", to_json(x)}, {"V", quasipotential(mi.spec, attractor, x)}, {"F", f_function(mi.spec, x)}};
    try {
        const PrefactorData p = stationary_prefactor(mi.spec, attractor, x);
        j["reachable"] = true;
        j["C_st"] = p.c_value;
        j["ensemble_density"] =
            p.c_value / std::pow(eps, 0.5 * mi.spec.dim) * std::exp(-quasipotential(mi.spec, attractor, x) / eps);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::UnreachablePoint) throw;
        j["reachable"] = false;
        j["C_st"] = nullptr;
        j["ensemble_density"] = nullptr;
    }
    return j;
}

int cmd_landscape(const Options& o, std::ostream& out) {
    if (o.point.empty() == o.grid.empty()) fail(ErrorKind::InvalidArgument, "landscape eval needs exactly one of --point or --grid");
    const ModelInstance mi = instantiate(o.model);
    const KnownFacts& f = mi.facts();
    if (!f.attractor1) fail(ErrorKind::NotFound, mi.entry.name + " has no attractor");
    const Json config = config_block("landscape", o, {"action", "model", "epsilon", "point", "grid"});
    if (!o.point.empty()) {
        Json p;
        try {
            p = Json::parse(o.point);
        } catch (const Json::exception&) {
            fail(ErrorKind::InvalidArgument, "--point must be a JSON array of numbers");
        }
        if (!p.is_array() || static_cast<int>(p.size()) != mi.spec.dim)
            fail(ErrorKind::InvalidArgument, "--point must have one entry per dimension");
        for (const auto& v : p)
            if (!v.is_number()) fail(ErrorKind::InvalidArgument, "--point must be a JSON array of numbers");
        emit(out, config, landscape_record(mi, *f.attractor1, vec_from_json(p), o.epsilon));
        return kOk;
    }
    const auto points = grid_points(parse_grid(o.grid, mi.spec.dim));
    out << "# config " << to_canonical_json(config, -1) << '\n';
    for (int i = 0; i < mi.spec.dim; ++i) out << 'x' << i + 1 << ',';
    out << "V,F,Cst\n";
    for (const auto& x : points) {
        const Json r = landscape_record(mi, *f.attractor1, x, o.epsilon);
        for (int i = 0; i < mi.spec.dim; ++i) out << format_double(x[i]) << ',';
        out << format_double(r["V"].get<double>()) << ',' << format_double(r["F"].get<double>()) << ','
            << (r["C_st"].is_null() ? std::string("nan") : format_double(r["C_st"].get<double>())) << '\n';
    }
    return kOk;
}

int cmd_rate(const Options& o, std::ostream& out) {
    const ModelInstance mi = instantiate(o.model);
    const KnownFacts& f = mi.facts();
    if (!f.attractor1 || !f.attractor2) fail(ErrorKind::NotFound, mi.entry.name + " has no pair of attractors");
    RateOptions ro;
    ro.saddle_guess = f.saddle;
    ro.instanton = instanton_options(o);
    const RateReport r = transition_rate(mi.spec, *f.attractor1, *f.attractor2, o.epsilon, ro);
    if (!o.emit_instanton.empty()) write_path(o.emit_instanton, r.instanton.path);
    emit(out, config_block("rate", o, {"model", "epsilon", "tol", "emit-instanton"}), rate_json(r));
    return kOk;
}

int cmd_mc_exit(const Options& o, std::ostream& out, std::ostream& err) {
    const ModelInstance mi = instantiate(o.model);
    const KnownFacts& f = mi.facts();
    if (!f.attractor1 || !f.attractor2) fail(ErrorKind::NotFound, mi.entry.name + " has no pair of attractors");
    const McEstimate e = sample_transition_times(mi.spec, mc_config(o), *f.attractor1, *f.attractor2);
    if (!o.dump_times.empty()) {
        std::ofstream os(o.dump_times);
        if (!os) fail(ErrorKind::InvalidArgument, "cannot open '" + o.dump_times + "' for writing");
        for (double t : e.times) os << format_double(t) << '\n';
    }
    Json j = estimate_json(e);
    try {
        RateOptions ro;
        ro.saddle_guess = f.saddle;
        j["predicted_mean_time"] = transition_rate(mi.spec, *f.attractor1, *f.attractor2, o.epsilon, ro).mean_time;
    } catch (const Error& ex) {
        err << "prediction unavailable: " << ex.what() << '\n';
        j["predicted_mean_time"] = nullptr;
    }
    if (e.censored > 0) err << e.censored << " trajectories censored at max_steps\n";
    emit(out, config_block("mc-exit", o, {"model", "epsilon", "dt", "n", "seed", "workers", "dump-times"}), j);
    return kOk;
}

int cmd_mc_committor(const Options& o, std::ostream& out) {
    const ModelInstance mi = instantiate(o.model);
    const KnownFacts& f = mi.facts();
    if (!f.saddle) fail(ErrorKind::NotFound, mi.entry.name + " has no saddle");
    const Vec xs = find_saddle(mi.spec, *f.saddle);
    const SaddleData s = saddle_geometry(mi.spec, xs, f.attractor2);
    const Vec y = xs + o.zeta * s.v_plus;
    const CommittorEstimate c = empirical_committor(mi.spec, s, y, mc_config(o), o.zcap);
    Json j{{"y", to_json(y)},
           {"zeta", zeta_plus(s, y)},
           {"fraction", c.fraction},
           {"ci_low", c.ci_low},
           {"ci_high", c.ci_high},
           {"hits", c.hits},
           {"n", c.n},
           {"censored", c.censored},
           {"analytic", committor(s, y, o.epsilon)}};
    emit(out, config_block("mc-committor", o, {"model", "epsilon", "dt", "n", "seed", "workers", "zeta", "zcap"}), j);
    return kOk;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    const ModelInstance mi = instantiate(o.model);
    const ValidationReport r = validate_suite(mi, o.epsilon);
    for (const auto& name : r.failing()) err << "check failed: " << name << '\n';
    emit(out, config_block("validate", o, {"model", "epsilon"}), r.to_json());
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Irreversible Eyring-Kramers rates: instantons, prefactors and Monte Carlo checks"};
    app.require_subcommand(1);
    Options o;

    auto positive = CLI::PositiveNumber;
    auto add_model = [&](CLI::App* s, bool required = true) {
        auto* opt = s->add_option("--model", o.model, "model, e.g. dw2d-shear(kappa=0.5)");
        if (required) opt->required();
    };
    auto add_eps = [&](CLI::App* s) { s->add_option("--epsilon", o.epsilon, "noise intensity")->check(positive); };
    auto add_mc = [&](CLI::App* s) {
        add_eps(s);
        s->add_option("--dt", o.dt, "Euler-Maruyama step")->check(positive);
        s->add_option("--n", o.n, "number of trajectories")->check(positive);
        s->add_option("--seed", o.seed, "64-bit seed");
        s->add_option("--workers", o.workers, "worker threads (results do not depend on it)")->check(positive);
    };
    auto add_tol = [&](CLI::App* s) { s->add_option("--tol", o.tol, "instanton endpoint tolerance")->check(positive); };

    auto* models = app.add_subcommand("models", "list registered models or show one");
    models->add_option("action", o.action, "list | show")->check(CLI::IsMember({"list", "show"}));
    add_model(models, false);

    auto* instanton = app.add_subcommand("instanton", "construct the instanton into the saddle");
    add_model(instanton);
    add_tol(instanton);
    instanton->add_option("--emit-instanton", o.emit_instanton, "write the path as CSV");

    auto* landscape = app.add_subcommand("landscape", "evaluate V, F, C_st and the ensemble density");
    landscape->add_option("action", o.action, "eval")->required()->check(CLI::IsMember({"eval"}));
    add_model(landscape);
    add_eps(landscape);
    landscape->add_option("--point", o.point, "JSON array, e.g. [0.5,0.2]");
    landscape->add_option("--grid", o.grid, "x1:lo:hi:n,x2:lo:hi:n");

    auto* rate = app.add_subcommand("rate", "Eyring-Kramers mean transition time");
    add_model(rate);
    add_eps(rate);
    add_tol(rate);
    rate->add_option("--emit-instanton", o.emit_instanton, "write the instanton as CSV");

    auto* mc_exit = app.add_subcommand("mc-exit", "simulated transition times between the attractors");
    add_model(mc_exit);
    add_mc(mc_exit);
    mc_exit->add_option("--dump-times", o.dump_times, "write passage times, one per line");

    auto* mc_comm = app.add_subcommand("mc-committor", "empirical committor of the linearized dynamics");
    add_model(mc_comm);
    add_mc(mc_comm);
    mc_comm->add_option("--zeta", o.zeta, "start point x* + zeta v+");
    mc_comm->add_option("--zcap", o.zcap, "absorbing levels zeta = +-zcap")->check(positive);

    auto* validate = app.add_subcommand("validate", "run the invariant suite");
    add_model(validate);
    add_eps(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream so, se;
        const int code = app.exit(e, so, se);
        out << so.str();
        err << se.str();
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*models) return cmd_models(o, out);
        if (*instanton) return cmd_instanton(o, out);
        if (*landscape) return cmd_landscape(o, out);
        if (*rate) return cmd_rate(o, out);
        if (*mc_exit) return cmd_mc_exit(o, out, err);
        if (*mc_comm) return cmd_mc_committor(o, out);
        if (*validate) return cmd_validate(o, out, err);
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::NotFound) {
            err << app.help();
            return kUsage;
        }
        return is_assumption_failure(e.kind()) ? kAssumption : kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}

}  // namespace ekramers::cli
