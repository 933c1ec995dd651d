#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace ehrhard::cli {

enum Exit { kOk = 0, kViolation = 1, kUsage = 2, kPrecision = 3 };

// Usage or configuration problem; maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string surface;
    std::optional<std::array<double, 2>> weights;
    std::string measure = "standard";
    std::string f = "bump";
    std::string g = "bump";
    int grid_n = 801;
    double grid_lo = -8.0, grid_hi = 8.0;
    int nx = 200, ny = 200;
    std::optional<std::array<double, 4>> rect;
    double tol = 1e-9;
    double gap_tol = 1e-6;
    double R = 1e4, alpha = 0.9, beta = 0.2;
    std::optional<double> block_r;
    std::string family = "perturbative";
    long budget = 100000;
    std::uint64_t seed = 1;
    std::string potential = "gaussian";
    int n = 101;
    double smoothing = 0.02;
    std::string edges = "frozen";
    bool strict = false;
    int max_sweeps = 100000;
    bool abort_on_violation = true;
    std::string out = ".";
    int threads = 0;
};

using Json = nlohmann::ordered_json;

// Reads keys into cfg; unknown keys and mistyped values raise ConfigError.
void apply_config(RunConfig& cfg, const Json& j);
Json config_to_json(const RunConfig& cfg);

// Runs one command and returns its exit code. Writes the JSON report to
// <out>/<command>.json and prints it.
int run(const RunConfig& cfg);

}  // namespace ehrhard::cli
