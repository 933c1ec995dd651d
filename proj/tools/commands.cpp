#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "ehrhard/errors.hpp"
#include "ehrhard/measure_lab.hpp"
#include "ehrhard/necessity.hpp"
#include "ehrhard/obstacle.hpp"
#include "ehrhard/parallel.hpp"
#include "ehrhard/pdi.hpp"
#include "ehrhard/supconv.hpp"
#include "ehrhard/surface.hpp"
#include "ehrhard/version.hpp"

namespace ehrhard::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

namespace {

template <class T>
T take(const Json& v, const std::string& key, const char* form) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "': expected " + form + ", got " + v.dump());
    }
}

template <std::size_t N>
std::optional<std::array<double, N>> take_array(const Json& v, const std::string& key, const char* form) {
    if (v.is_null()) return std::nullopt;
    auto vec = take<std::vector<double>>(v, key, form);
    if (vec.size() != N) throw ConfigError("config key '" + key + "': expected " + form);
    std::array<double, N> out{};
    std::copy(vec.begin(), vec.end(), out.begin());
    return out;
}

}  // namespace

void apply_config(RunConfig& c, const Json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    using Setter = std::function<void(const Json&, const std::string&)>;
    const std::map<std::string, Setter> table = {
        {"command", [&](const Json& v, const std::string& k) { c.command = take<std::string>(v, k, "a command name"); }},
        {"surface", [&](const Json& v, const std::string& k) { c.surface = take<std::string>(v, k, "a surface id"); }},
        {"weights", [&](const Json& v, const std::string& k) { c.weights = take_array<2>(v, k, "[a, b]"); }},
        {"measure", [&](const Json& v, const std::string& k) { c.measure = take<std::string>(v, k, "a measure spec"); }},
        {"f", [&](const Json& v, const std::string& k) { c.f = take<std::string>(v, k, "a function spec or CSV path"); }},
        {"g", [&](const Json& v, const std::string& k) { c.g = take<std::string>(v, k, "a function spec or CSV path"); }},
        {"grid_n", [&](const Json& v, const std::string& k) { c.grid_n = take<int>(v, k, "an integer"); }},
        {"grid_lo", [&](const Json& v, const std::string& k) { c.grid_lo = take<double>(v, k, "a number"); }},
        {"grid_hi", [&](const Json& v, const std::string& k) { c.grid_hi = take<double>(v, k, "a number"); }},
        {"nx", [&](const Json& v, const std::string& k) { c.nx = take<int>(v, k, "an integer"); }},
        {"ny", [&](const Json& v, const std::string& k) { c.ny = take<int>(v, k, "an integer"); }},
        {"rect", [&](const Json& v, const std::string& k) { c.rect = take_array<4>(v, k, "[x0, x1, y0, y1]"); }},
        {"tol", [&](const Json& v, const std::string& k) { c.tol = take<double>(v, k, "a number"); }},
        {"gap_tol", [&](const Json& v, const std::string& k) { c.gap_tol = take<double>(v, k, "a number"); }},
        {"R", [&](const Json& v, const std::string& k) { c.R = take<double>(v, k, "a number"); }},
        {"alpha", [&](const Json& v, const std::string& k) { c.alpha = take<double>(v, k, "a number"); }},
        {"beta", [&](const Json& v, const std::string& k) { c.beta = take<double>(v, k, "a number"); }},
        {"block_r",
         [&](const Json& v, const std::string& k) {
             c.block_r = v.is_null() ? std::nullopt : std::optional<double>(take<double>(v, k, "a number or null"));
         }},
        {"family", [&](const Json& v, const std::string& k) { c.family = take<std::string>(v, k, "a family name"); }},
        {"budget", [&](const Json& v, const std::string& k) { c.budget = take<long>(v, k, "an integer"); }},
        {"seed", [&](const Json& v, const std::string& k) { c.seed = take<std::uint64_t>(v, k, "a nonnegative integer"); }},
        {"potential", [&](const Json& v, const std::string& k) { c.potential = take<std::string>(v, k, "a potential name"); }},
        {"n", [&](const Json& v, const std::string& k) { c.n = take<int>(v, k, "an integer"); }},
        {"smoothing", [&](const Json& v, const std::string& k) { c.smoothing = take<double>(v, k, "a number"); }},
        {"edges", [&](const Json& v, const std::string& k) { c.edges = take<std::string>(v, k, "frozen or pinned"); }},
        {"strict", [&](const Json& v, const std::string& k) { c.strict = take<bool>(v, k, "true or false"); }},
        {"max_sweeps", [&](const Json& v, const std::string& k) { c.max_sweeps = take<int>(v, k, "an integer"); }},
        {"abort_on_violation",
         [&](const Json& v, const std::string& k) { c.abort_on_violation = take<bool>(v, k, "true or false"); }},
        {"out", [&](const Json& v, const std::string& k) { c.out = take<std::string>(v, k, "a directory path"); }},
        {"threads", [&](const Json& v, const std::string& k) { c.threads = take<int>(v, k, "an integer"); }},
    };
    for (const auto& [key, value] : j.items()) {
        auto it = table.find(key);
        if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(value, key);
    }
}

Json config_to_json(const RunConfig& c) {
    Json j;
    j["command"] = c.command;
    j["surface"] = c.surface;
    j["weights"] = c.weights ? Json(*c.weights) : Json(nullptr);
    j["measure"] = c.measure;
    j["f"] = c.f;
    j["g"] = c.g;
    j["grid_n"] = c.grid_n;
    j["grid_lo"] = c.grid_lo;
    j["grid_hi"] = c.grid_hi;
    j["nx"] = c.nx;
    j["ny"] = c.ny;
    j["rect"] = c.rect ? Json(*c.rect) : Json(nullptr);
    j["tol"] = c.tol;
    j["gap_tol"] = c.gap_tol;
    j["R"] = c.R;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["block_r"] = c.block_r ? Json(*c.block_r) : Json(nullptr);
    j["family"] = c.family;
    j["budget"] = c.budget;
    j["seed"] = c.seed;
    j["potential"] = c.potential;
    j["n"] = c.n;
    j["smoothing"] = c.smoothing;
    j["edges"] = c.edges;
    j["strict"] = c.strict;
    j["max_sweeps"] = c.max_sweeps;
    j["abort_on_violation"] = c.abort_on_violation;
    j["out"] = c.out;
    j["threads"] = c.threads;
    return j;
}

// ---------------------------------------------------------------- inputs

namespace {

Weights resolve_weights(const RunConfig& c) {
    std::optional<Weights> given;
    if (c.weights) given = Weights{(*c.weights)[0], (*c.weights)[1]};
    if (!c.surface.empty()) {
        auto embedded = weights_in_id(c.surface);
        if (embedded && given &&
            (std::abs(embedded->a - given->a) > 1e-12 || std::abs(embedded->b - given->b) > 1e-12))
            throw ConfigError("weights in surface id '" + c.surface + "' conflict with --weights");
        if (embedded && !given) return *embedded;
    }
    return given.value_or(Weights{0.5, 0.5});
}

Surface need_surface(const RunConfig& c, Weights w) {
    if (c.surface.empty()) throw ConfigError("command '" + c.command + "' needs --surface");
    return surface_from_id(c.surface, w);
}

Measure make_measure(const std::string& spec) {
    SurfaceId id = parse_surface_id(spec);
    auto get = [&](const char* k, double d) {
        auto it = id.params.find(k);
        return it == id.params.end() ? d : it->second;
    };
    if (id.family == "standard") return Measure::standard(1);
    if (id.family == "gaussian") {
        double m = get("mean", 0.0), v = get("var", 1.0);
        if (!(v > 0.0)) throw ParameterError("gaussian measure needs var > 0");
        return Measure::gaussian_normalized({0.5 / v}, {m / v});
    }
    auto colon = spec.find(':');
    if (id.family == "potential" && colon != std::string::npos)
        return to_measure(potential_by_name(spec.substr(colon + 1)));
    throw ConfigError("unknown measure '" + spec + "' (expected standard, gaussian:mean=..,var=.. or potential:NAME)");
}

GridFunction make_function(const std::string& spec, Grid1D grid) {
    if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".csv") {
        std::ifstream in(spec);
        if (!in) throw ConfigError("cannot read grid function file '" + spec + "'");
        return GridFunction::read_csv(in);
    }
    SurfaceId id = parse_surface_id(spec);
    auto get = [&](const char* k, double d) {
        auto it = id.params.find(k);
        return it == id.params.end() ? d : it->second;
    };
    if (id.family == "bump") {
        double wd = get("width", 1.0), lo = get("lo", 0.05), hi = get("hi", 0.95);
        return GridFunction::sample([=](double x) { return lo + (hi - lo) * std::exp(-(x / wd) * (x / wd)); },
                                    grid);
    }
    if (id.family == "const") return GridFunction::constant(get("value", 0.5), grid);
    if (id.family == "logistic") {
        double lo = get("lo", 0.05), hi = get("hi", 0.95), k = get("slope", 1.0), c0 = get("center", 0.0);
        return GridFunction::sample([=](double x) { return lo + (hi - lo) / (1.0 + std::exp(-k * (x - c0))); }, grid);
    }
    if (id.family == "probit") {
        double k = get("k", 1.0), c0 = get("c", 0.0);
        return GridFunction::sample([=](double x) { return normal_cdf(k * x + c0); }, grid);
    }
    throw ConfigError("unknown function spec '" + spec + "' (expected a .csv path, bump, const, logistic or probit)");
}

Grid1D make_grid(const RunConfig& c) {
    if (c.grid_n < 2 || !(c.grid_hi > c.grid_lo)) throw ConfigError("grid needs grid_n >= 2 and grid_hi > grid_lo");
    return Grid1D{c.grid_lo, c.grid_hi, c.grid_n};
}

Json weights_json(Weights w) { return Json{{"a", w.a}, {"b", w.b}, {"regime", to_string(w.regime())}}; }

Json gap_json(const GapResult& r) {
    return Json{{"lhs", r.lhs},
                {"rhs", r.rhs},
                {"gap", r.gap},
                {"quadrature_error", r.quadrature_error},
                {"grid_resolution", {{"f", r.grid_resolution.f_nodes}, {"g", r.grid_resolution.g_nodes},
                                     {"t", r.grid_resolution.t_nodes}}},
                {"f_mean", r.f_mean},
                {"g_mean", r.g_mean},
                {"extrapolated", r.extrapolated}};
}

fs::path out_dir(const RunConfig& c) {
    fs::path p(c.out);
    fs::create_directories(p);
    return p;
}

void write_pair(const fs::path& dir, const GridFunction& f, const GridFunction& g, Json& files) {
    std::ofstream(dir / "witness_f.csv") << [&] {
        std::ostringstream os;
        f.write_csv(os);
        return os.str();
    }();
    std::ofstream(dir / "witness_g.csv") << [&] {
        std::ostringstream os;
        g.write_csv(os);
        return os.str();
    }();
    files["f"] = (dir / "witness_f.csv").string();
    files["g"] = (dir / "witness_g.csv").string();
}

// ---------------------------------------------------------------- commands

int cmd_check_pdi(const RunConfig& c, Json& res) {
    Weights w = resolve_weights(c);
    Surface H = need_surface(c, w);
    res["surface"] = H.label();
    res["weights"] = weights_json(w);
    if (w.regime() == Regime::infeasible) {
        res["feasible"] = false;
        res["reason"] = "weights violate |1-a^2-b^2| <= 2ab";
        return kViolation;
    }
    GridSpec spec;
    spec.nx = c.nx;
    spec.ny = c.ny;
    if (c.rect) spec.rect = Rect{(*c.rect)[0], (*c.rect)[1], (*c.rect)[2], (*c.rect)[3]};
    PdiReport r = check_pdi_grid(H, w, spec, c.tol, c.threads);
    res["pdi"] = Json{{"min_value", r.min_value},
                      {"argmin", {r.arg_x, r.arg_y}},
                      {"feasible", r.feasible},
                      {"samples", r.samples},
                      {"violations", r.violations},
                      {"degenerate", r.degenerate},
                      {"tolerance", r.tolerance}};
    res["feasible"] = r.feasible;
    if (c.block_r) {
        BlockSmoothing sm = w.regime() == Regime::parabolic ? BlockSmoothing::growth(c.alpha, c.beta)
                                                            : BlockSmoothing::shift(1.0);
        Rect d = spec.rect.value_or(H.domain());
        Json pts = Json::array();
        long fails = 0;
        for (int i = 1; i <= 5; ++i)
            for (int k = 1; k <= 5; ++k) {
                double x = d.x0 + d.width() * i / 6.0, y = d.y0 + d.height() * k / 6.0;
                try {
                    BlockReport b = block_condition(H, w, *c.block_r, sm, x, y);
                    if (!b.ok) ++fails;
                    pts.push_back({{"x", x}, {"y", y}, {"ok", b.ok}, {"minors", b.minors}});
                } catch (const PreconditionError& e) {
                    pts.push_back({{"x", x}, {"y", y}, {"skipped", e.what()}});
                }
            }
        res["block"] = Json{{"R", *c.block_r}, {"failures", fails}, {"points", pts}};
    }
    return r.feasible ? kOk : kViolation;
}

int cmd_verify_ineq(const RunConfig& c, Json& res) {
    Weights w = resolve_weights(c);
    Surface H = need_surface(c, w);
    Grid1D grid = make_grid(c);
    GridFunction f = make_function(c.f, grid), g = make_function(c.g, grid);
    Measure mu = make_measure(c.measure);
    SupConvOptions so;
    so.threads = c.threads;
    GapResult r = inequality_gap(H, f, g, w, mu, so);
    double scale = image_scale(H, f, g);
    bool ok = r.gap >= -c.gap_tol * scale;
    res["surface"] = H.label();
    res["weights"] = weights_json(w);
    res["gap"] = gap_json(r);
    res["scale"] = scale;
    res["holds"] = ok;
    if (!ok) {
        Json files;
        write_pair(out_dir(c), f, g, files);
        res["witness_files"] = files;
    }
    return ok ? kOk : kViolation;
}

int cmd_smooth_lhs(const RunConfig& c, Json& res) {
    Weights w = resolve_weights(c);
    Surface H = need_surface(c, w);
    Grid1D grid = make_grid(c);
    GridFunction f = make_function(c.f, grid), g = make_function(c.g, grid);
    LpOptions lo;
    lo.threads = c.threads;
    LpResult lp = lp_smoothed_lhs(H, f, g, w, c.R, c.alpha, c.beta, lo);
    SupConvOptions so;
    so.threads = c.threads;
    GapResult gr = inequality_gap(H, f, g, w, Measure::standard(1), so);
    res["surface"] = H.label();
    res["weights"] = weights_json(w);
    res["smoothed_lhs"] = lp.value;
    res["normalized_lhs"] = lp.normalized_value;
    res["grid_lhs"] = gr.lhs;
    res["relative_difference"] = lp.value / gr.lhs - 1.0;
    res["p"] = lp.p;
    res["q"] = lp.q;
    res["a_of_r"] = lp.a_of_r;
    return kOk;
}

int cmd_find_counterexample(const RunConfig& c, Json& res) {
    Weights w = resolve_weights(c);
    Surface H = need_surface(c, w);
    Measure mu = make_measure(c.measure);
    SearchOptions so;
    so.budget = c.budget;
    so.seed = c.seed;
    so.grid = make_grid(c);
    so.threads = c.threads;
    SearchReport r = counterexample_search(H, w, mu, parse_family(c.family), so);
    res["surface"] = H.label();
    res["weights"] = weights_json(w);
    res["family"] = to_string(r.family);
    res["evaluations"] = r.evaluations;
    res["best_ratio"] = r.best_ratio;
    res["found"] = r.found.has_value();
    if (!r.found) return kOk;
    Json files;
    write_pair(out_dir(c), r.found->f, r.found->g, files);
    Json params(r.found->params);
    res["counterexample"] = Json{{"gap", gap_json(r.found->gap)}, {"scale", r.found->scale}, {"params", params},
                                 {"files", files}};
    return kViolation;
}

Json sub_json(const SubadditivityReport& s) {
    return Json{{"pass", s.pass},          {"worst_margin", s.worst_margin}, {"witness", {s.witness_x, s.witness_y}},
                {"max_abs_margin", s.max_abs_margin}, {"scale", s.scale}, {"samples", s.samples}};
}

int cmd_audit_measure(const RunConfig& c, Json& res) {
    Potential pot = potential_by_name(c.potential);
    AuditReport a = audit_measure(pot, Grid2Spec{}, 20.0, c.threads);
    res["potential"] = a.label;
    res["scope"] = "necessary conditions only";
    res["normalization"] = Json{{"ok", a.potential.ok},
                                {"mass_error", a.potential.mass_error},
                                {"derivative_error", a.potential.derivative_error},
                                {"log_normalizer", a.potential.log_normalizer}};
    Json subs = Json::array();
    for (const auto& [w, s] : a.subadditivity) {
        Json e = sub_json(s);
        e["weights"] = weights_json(w);
        subs.push_back(e);
    }
    res["subadditivity"] = subs;
    if (a.convexity) {
        Json cj{{"convex", a.convexity->convex},
                {"min_second_difference", a.convexity->min_second_difference},
                {"witness", a.convexity->witness},
                {"admissible", a.convexity->admissible}};
        cj["c_minus"] = a.convexity->c_minus ? Json(*a.convexity->c_minus) : Json(nullptr);
        cj["c_plus"] = a.convexity->c_plus ? Json(*a.convexity->c_plus) : Json(nullptr);
        res["convexity"] = cj;
    } else {
        res["convexity"] = Json{{"error", a.convexity_error}};
    }
    res["rigidity"] = a.rigidity ? Json{{"deviation", a.rigidity->deviation}, {"witness", a.rigidity->witness}}
                                 : Json{{"even", false}};
    res["epigraph"] = Json{{"pass", a.epigraph.pass},
                           {"worst_margin", a.epigraph.worst_margin},
                           {"witness", {a.epigraph.witness_x, a.epigraph.witness_s}}};
    res["mean"] = a.mean;
    res["second_moment"] = a.second_moment;
    res["mean_constraint"] = a.mean_zero;
    res["pass"] = a.pass;
    return a.pass ? kOk : kViolation;
}

int cmd_solve_obstacle(const RunConfig& c, Json& res) {
    ObstacleProblem p;
    p.w = resolve_weights(c);
    p.n = c.n;
    p.max_sweeps = c.max_sweeps;
    p.strict = c.strict;
    p.abort_on_violation = c.abort_on_violation;
    p.threads = c.threads;
    if (c.edges == "frozen")
        p.edges = EdgeMode::frozen;
    else if (c.edges == "pinned")
        p.edges = EdgeMode::pinned;
    else
        throw ConfigError("edges must be frozen or pinned, got '" + c.edges + "'");
    GridSurface init = feasible_init(p, c.smoothing);
    SolveResult r = solve(p, init);
    fs::path dir = out_dir(c);
    {
        std::ofstream os(dir / "surface.csv");
        r.surface.write_csv(os);
    }
    {
        std::ofstream os(dir / "convergence.jsonl");
        write_log_jsonl(os, r.log);
    }
    res["weights"] = weights_json(p.w);
    res["n"] = p.n;
    res["sweeps"] = r.sweeps;
    res["converged"] = r.converged;
    res["aborted"] = r.aborted;
    res["diagnostic"] = r.diagnostic;
    res["center"] = r.surface.nearest(0.5, 0.5);
    res["corner_11"] = r.surface.at(p.n - 1, p.n - 1);
    res["dominance"] = Json{{"ok", r.dominance.ok},
                            {"worst_margin", r.dominance.worst_margin},
                            {"witness", {r.dominance.witness_u, r.dominance.witness_v}},
                            {"worst_over_iterates", r.worst_dominance},
                            {"first_violation", r.first_violation}};
    res["files"] = Json{{"surface", (dir / "surface.csv").string()}, {"log", (dir / "convergence.jsonl").string()}};
    if (r.first_violation >= 0) return kViolation;
    return r.converged ? kOk : kPrecision;
}

int cmd_catalog(const RunConfig&, Json& res) {
    Json list = Json::array();
    for (const std::string& id : catalog_examples()) {
        Surface s = surface_from_id(id);
        const Rect& d = s.domain();
        list.push_back({{"id", id}, {"label", s.label()}, {"domain", {d.x0, d.x1, d.y0, d.y1}}});
    }
    res["surfaces"] = list;
    res["measures"] = {"standard", "gaussian:mean=M,var=V", "potential:gaussian", "potential:quartic",
                       "potential:blend", "potential:near_gaussian"};
    res["functions"] = {"bump[:width=W,lo=L,hi=U]", "const:value=V", "logistic:lo=L,hi=U,slope=K,center=C",
                        "probit:k=K,c=C", "<path>.csv"};
    return kOk;
}

}  // namespace

int run(const RunConfig& c) {
    static const std::map<std::string, std::function<int(const RunConfig&, Json&)>> commands = {
        {"check-pdi", cmd_check_pdi},         {"verify-ineq", cmd_verify_ineq},
        {"smooth-lhs", cmd_smooth_lhs},       {"find-counterexample", cmd_find_counterexample},
        {"audit-measure", cmd_audit_measure}, {"solve-obstacle", cmd_solve_obstacle},
        {"catalog", cmd_catalog}};
    Json report;
    report["schema"] = "v1";
    report["tool"] = "ehrhard-lab";
    report["version"] = kVersion;
    report["command"] = c.command;
    report["config"] = config_to_json(c);
    int code;
    Json res = Json::object();
    auto it = commands.find(c.command);
    if (it == commands.end()) {
        code = kUsage;
        res["error"] = "unknown command '" + c.command + "'";
    } else {
        if (c.threads > 0) set_default_threads(c.threads);
        try {
            code = it->second(c, res);
        } catch (const ConfigError& e) {
            code = kUsage;
            res["error"] = e.what();
        } catch (const ParameterError& e) {
            code = kUsage;
            res["error"] = e.what();
        } catch (const DomainError& e) {
            code = kUsage;
            res["error"] = e.what();
        } catch (const PrecisionError& e) {
            code = kPrecision;
            res["error"] = e.what();
        } catch (const EvaluationError& e) {
            code = kPrecision;
            res["error"] = e.what();
        } catch (const PreconditionError& e) {
            code = kUsage;
            res["error"] = e.what();
        }
    }
    report["result"] = res;
    report["exit_code"] = code;
    std::string text = report.dump(2);
    try {
        fs::path dir = out_dir(c);
        std::ofstream(dir / (c.command.empty() ? std::string("report") : c.command) += ".json") << text << '\n';
    } catch (const std::exception& e) {
        std::cerr << "warning: could not write report: " << e.what() << '\n';
    }
    std::cout << text << '\n';
    return code;
}

}  // namespace ehrhard::cli
