#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ehrhard/version.hpp"

using namespace ehrhard::cli;

namespace {

struct Binding {
    CLI::Option* opt;
    std::function<void(RunConfig&)> copy;
};

struct Sub {
    CLI::App* app;
    RunConfig given;
    std::vector<double> weights, rect;
    std::vector<Binding> bound;
    std::string config_path;
    bool emit = false;
};

template <class T>
void add(Sub& s, const std::string& flag, T RunConfig::*field, const std::string& help) {
    CLI::Option* o = s.app->add_option(flag, s.given.*field, help);
    s.bound.push_back({o, [&s, field](RunConfig& c) { c.*field = s.given.*field; }});
}

void add_common(Sub& s, const std::set<std::string>& keys) {
    auto has = [&](const char* k) { return keys.count(k) > 0; };
    if (has("surface")) add(s, "--surface", &RunConfig::surface, "surface id, e.g. ehrhard:a=0.6,b=0.8");
    if (has("weights")) {
        CLI::Option* o = s.app->add_option("--weights", s.weights, "weights a,b")->delimiter(',')->expected(2);
        s.bound.push_back({o, [&s](RunConfig& c) { c.weights = std::array<double, 2>{s.weights[0], s.weights[1]}; }});
    }
    if (has("measure")) add(s, "--measure", &RunConfig::measure, "standard | gaussian:mean=M,var=V | potential:NAME");
    if (has("fg")) {
        add(s, "--f", &RunConfig::f, "first test function spec or CSV path");
        add(s, "--g", &RunConfig::g, "second test function spec or CSV path");
    }
    if (has("grid")) {
        add(s, "--grid-n", &RunConfig::grid_n, "nodes of the 1-D grid");
        add(s, "--grid-lo", &RunConfig::grid_lo, "left end of the 1-D grid");
        add(s, "--grid-hi", &RunConfig::grid_hi, "right end of the 1-D grid");
    }
    if (has("pdi")) {
        add(s, "--nx", &RunConfig::nx, "samples along x");
        add(s, "--ny", &RunConfig::ny, "samples along y");
        add(s, "--tol", &RunConfig::tol, "PDI tolerance");
        CLI::Option* o = s.app->add_option("--rect", s.rect, "x0,x1,y0,y1")->delimiter(',')->expected(4);
        s.bound.push_back({o, [&s](RunConfig& c) {
                               c.rect = std::array<double, 4>{s.rect[0], s.rect[1], s.rect[2], s.rect[3]};
                           }});
        CLI::Option* b = s.app->add_option("--block-r", s.given.block_r, "also test the block condition at this R");
        s.bound.push_back({b, [&s](RunConfig& c) { c.block_r = s.given.block_r; }});
    }
    if (has("gap")) add(s, "--gap-tol", &RunConfig::gap_tol, "relative tolerance on a negative gap");
    if (has("smooth")) {
        add(s, "--R", &RunConfig::R, "smoothing exponent");
        add(s, "--alpha", &RunConfig::alpha, "growth exponent of a(R)");
        add(s, "--beta", &RunConfig::beta, "growth exponent of p and q");
    }
    if (has("alpha_beta")) {
        add(s, "--alpha", &RunConfig::alpha, "growth exponent of a(R)");
        add(s, "--beta", &RunConfig::beta, "growth exponent of p and q");
    }
    if (has("search")) {
        add(s, "--family", &RunConfig::family, "perturbative | step | random");
        add(s, "--budget", &RunConfig::budget, "maximum gap evaluations");
        add(s, "--seed", &RunConfig::seed, "random seed");
    }
    if (has("potential")) add(s, "--potential", &RunConfig::potential, "gaussian | quartic | blend | near_gaussian");
    if (has("obstacle")) {
        add(s, "--n", &RunConfig::n, "grid size");
        add(s, "--smoothing", &RunConfig::smoothing, "width of the initial softplus");
        add(s, "--edges", &RunConfig::edges, "frozen | pinned");
        add(s, "--max-sweeps", &RunConfig::max_sweeps, "sweep limit");
        CLI::Option* st = s.app->add_flag("--strict", s.given.strict, "bisect every raise for feasibility");
        s.bound.push_back({st, [&s](RunConfig& c) { c.strict = s.given.strict; }});
        CLI::Option* ab = s.app->add_option("--abort-on-violation", s.given.abort_on_violation,
                                            "stop at the first dominance violation (true/false)");
        s.bound.push_back({ab, [&s](RunConfig& c) { c.abort_on_violation = s.given.abort_on_violation; }});
    }
    add(s, "--out", &RunConfig::out, "output directory");
    s.app->add_option("--config", s.config_path, "JSON config file; command-line options take precedence");
    s.app->add_flag("--emit-config", s.emit, "print the resolved config and exit");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for Ehrhard-type functional inequalities", "ehrhard-lab"};
    app.set_version_flag("--version", std::string(ehrhard::kVersion));
    int threads = 0;
    CLI::Option* threads_opt =
        app.add_option("--threads", threads, "worker threads (default: EHRHARD_LAB_THREADS or hardware)");
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::set<std::string>>> specs = {
        {"check-pdi", {"surface", "weights", "pdi", "alpha_beta"}},
        {"verify-ineq", {"surface", "weights", "measure", "fg", "grid", "gap"}},
        {"smooth-lhs", {"surface", "weights", "fg", "grid", "smooth"}},
        {"find-counterexample", {"surface", "weights", "measure", "grid", "search"}},
        {"audit-measure", {"potential"}},
        {"solve-obstacle", {"weights", "obstacle"}},
        {"catalog", {}},
    };
    const std::map<std::string, std::string> about = {
        {"check-pdi", "check the PDI on a grid"},
        {"verify-ineq", "evaluate both sides of the inequality for a pair of functions"},
        {"smooth-lhs", "compare the L^R-smoothed left side with the grid value"},
        {"find-counterexample", "search for a pair that violates the inequality"},
        {"audit-measure", "check necessary conditions on a log-concave measure"},
        {"solve-obstacle", "iterate the discrete obstacle problem on [0,1]^2"},
        {"catalog", "list the built-in surfaces and input specs"},
    };
    std::vector<std::unique_ptr<Sub>> subs;
    for (const auto& [name, keys] : specs) {
        auto s = std::make_unique<Sub>();
        s->app = app.add_subcommand(name, about.at(name));
        add_common(*s, keys);
        subs.push_back(std::move(s));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    for (auto& s : subs) {
        if (!s->app->parsed()) continue;
        RunConfig cfg;
        try {
            if (!s->config_path.empty()) {
                std::ifstream in(s->config_path);
                if (!in) throw ConfigError("cannot read config file '" + s->config_path + "'");
                Json j;
                try {
                    j = Json::parse(in);
                } catch (const nlohmann::json::parse_error& e) {
                    throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
                }
                apply_config(cfg, j);
                if (!cfg.command.empty() && cfg.command != s->app->get_name())
                    throw ConfigError("config is for command '" + cfg.command + "', not '" + s->app->get_name() + "'");
            }
            cfg.command = s->app->get_name();
            for (const Binding& b : s->bound)
                if (b.opt->count() > 0) b.copy(cfg);
            if (threads_opt->count() > 0) cfg.threads = threads;
        } catch (const ConfigError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kUsage;
        }
        if (s->emit) {
            std::cout << config_to_json(cfg).dump(2) << '\n';
            return kOk;
        }
        return run(cfg);
    }
    return kUsage;
}
