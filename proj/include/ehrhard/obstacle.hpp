#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ehrhard/pdi.hpp"
#include "ehrhard/supconv.hpp"
#include "ehrhard/weights.hpp"

namespace ehrhard {

// Uniform n x n samples on [0,1]^2; index (i, j) is (u_i, v_j).
class GridSurface {
public:
    GridSurface() = default;
    GridSurface(int n, double inset = 0.01);
    GridSurface(int n, std::vector<double> values, double inset = 0.01);

    int n() const { return n_; }
    double h() const { return 1.0 / (n_ - 1); }
    double coord(int i) const { return i == n_ - 1 ? 1.0 : i * h(); }
    double inset() const { return inset_; }
    double& at(int i, int j) { return v_[static_cast<std::size_t>(i) * n_ + j]; }
    double at(int i, int j) const { return v_[static_cast<std::size_t>(i) * n_ + j]; }
    const std::vector<double>& values() const { return v_; }
    // Node nearest to (u, v).
    double nearest(double u, double v) const;
    bool effective(int i, int j) const;

    // Row-major "u,v,value".
    void write_csv(std::ostream& os) const;
    static GridSurface read_csv(std::istream& is, double inset = 0.01);

private:
    int n_ = 0;
    double inset_ = 0.01;
    std::vector<double> v_;
};

enum class EdgeMode {
    frozen,  // boundary rows keep their initial values
    pinned,  // boundary rows set to 0 on u=0 or v=0 and to 1 on u=1 or v=1
};

struct ObstacleProblem {
    Weights w{0.5, 0.5};
    double corner_00 = 0.0, corner_01 = 0.0, corner_10 = 0.0, corner_11 = 1.0;
    int n = 101;
    double pdi_tol = 1e-9;
    int max_sweeps = 100000;
    double stop_increase = 1e-7;
    double max_step = 0.1;
    double inset = 0.01;
    double dominance_tol = 1e-6;
    bool abort_on_violation = true;
    // Every raise is bisected so that the discrete PDI stays >= -pdi_tol on
    // the 3x3 neighbourhood.
    bool strict = false;
    EdgeMode edges = EdgeMode::frozen;
    int threads = 0;
};

GridSurface feasible_init(const ObstacleProblem& prob, double smoothing_width);

// Central-difference PDI at an interior node; nodes with a first difference
// below 1e-8 use the smallest of a^2 Hxx, b^2 Hyy and the weighted Hessian
// determinant.
double discrete_pdi(const GridSurface& s, Weights w, int i, int j);

struct DiscretePdiReport {
    double min_value = 0.0;
    int arg_i = 0, arg_j = 0;
    long nodes = 0;
};
DiscretePdiReport discrete_pdi_report(const GridSurface& s, Weights w);

struct DominanceReport {
    bool ok = true;
    double worst_margin = 0.0;  // max of candidate - Ehrhard over effective nodes
    double witness_u = 0.0, witness_v = 0.0;
    long nodes = 0;
};

DominanceReport dominance_check(const GridSurface& cand, Weights w, double tol = 1e-6);

struct SweepLog {
    int sweep = 0;
    double max_increase = 0.0;
    double center = 0.0;
    double dominance_margin = 0.0;
    double seconds = 0.0;
};

struct SolveResult {
    GridSurface surface;
    std::vector<SweepLog> log;
    int sweeps = 0;
    bool converged = false;
    bool aborted = false;
    std::string diagnostic;
    DominanceReport dominance;     // final iterate
    double worst_dominance = 0.0;  // largest margin seen over all iterates
    int first_violation = -1;      // sweep of the first dominance violation
};

// Raise-only Gauss-Seidel sweeps: each interior node moves toward the value
// that zeroes its own discrete PDI, capped by max_step. Nodes are visited in
// 3x3 colour classes so that one class can be updated in parallel.
SolveResult solve(const ObstacleProblem& prob, const GridSurface& init,
                  const std::function<void(const SweepLog&)>& on_sweep = {});

// Wall-clock seconds are left out unless requested, so logs are reproducible.
void write_log_jsonl(std::ostream& os, const std::vector<SweepLog>& log, bool with_time = false);

struct CertificateReport {
    bool ok = false;
    double gap = 0.0;
    double scale = 1.0;
    GapResult detail;
};

// Throws PreconditionError when H fails the PDI grid check.
CertificateReport lower_bound_certificate(const Surface& H, const GridFunction& f, const GridFunction& g, Weights w,
                                          const Measure& mu);

}  // namespace ehrhard
