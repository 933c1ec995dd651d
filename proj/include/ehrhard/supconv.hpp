#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "ehrhard/gaussian.hpp"
#include "ehrhard/surface.hpp"
#include "ehrhard/weights.hpp"

namespace ehrhard {

struct Grid1D {
    double lo = -8.0;
    double hi = 8.0;
    int n = 4001;

    double step() const { return (hi - lo) / (n - 1); }
    double node(int i) const { return i == n - 1 ? hi : lo + step() * i; }
    std::vector<double> nodes() const;
};

inline constexpr Grid1D kDefaultGrid{-8.0, 8.0, 4001};

// Uniformly sampled function with a declared value range. Outside its grid
// the function is constant at the end values.
class GridFunction {
public:
    GridFunction() = default;
    // Throws ParameterError if a value escapes [range_lo, range_hi].
    GridFunction(Grid1D grid, std::vector<double> values, double range_lo, double range_hi);
    // Range taken as [min, max] of the values.
    GridFunction(Grid1D grid, std::vector<double> values);

    static GridFunction sample(const Fn1& f, Grid1D grid = kDefaultGrid);
    static GridFunction constant(double c, Grid1D grid = kDefaultGrid);

    double operator()(double x) const;
    bool outside(double x) const { return x < grid_.lo || x > grid_.hi; }

    const Grid1D& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double range_lo() const { return range_lo_; }
    double range_hi() const { return range_hi_; }

    // "node,value" header then one row per node.
    void write_csv(std::ostream& os) const;
    static GridFunction read_csv(std::istream& is);

private:
    Grid1D grid_{};
    std::vector<double> values_;
    double range_lo_ = 0.0, range_hi_ = 0.0;
};

// Row-major samples f(x1_i, x2_k) at index i * x2.n + k.
class GridFunction2D {
public:
    GridFunction2D(Grid1D g1, Grid1D g2, std::vector<double> values);
    static GridFunction2D sample(const Fn2& f, Grid1D g1, Grid1D g2);

    const Grid1D& grid1() const { return g1_; }
    const Grid1D& grid2() const { return g2_; }
    double at(int i, int k) const { return values_[static_cast<std::size_t>(i) * g2_.n + k]; }
    // Slice along the first axis at second-axis node k.
    GridFunction slice(int k) const;
    double range_lo() const { return range_lo_; }
    double range_hi() const { return range_hi_; }

private:
    Grid1D g1_, g2_;
    std::vector<double> values_;
    double range_lo_ = 0.0, range_hi_ = 0.0;
};

struct SupConvOptions {
    std::optional<Grid1D> t_grid;  // defaults to the grid of f
    bool refine = false;           // golden-section polish around the best node
    int threads = 0;
};

struct SupConvResult {
    GridFunction h;
    std::vector<double> argmax;  // maximizing x per t node
    long extrapolated = 0;       // t nodes whose line misses the grid of g
};

// h(t) = max over the nodes x of f's grid of H(f(x), g((t - a x) / b)).
SupConvResult sup_convolve(const Surface& H, const GridFunction& f, const GridFunction& g, Weights w,
                           const SupConvOptions& opt = {});

// Integral of a grid function against a one-dimensional measure: Simpson
// weights on the grid plus the tail masses times the end values.
Quadrature integrate_grid(const GridFunction& h, const Measure& mu);

struct GridResolution {
    int f_nodes = 0, g_nodes = 0, t_nodes = 0;
};

struct GapResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
    double quadrature_error = 0.0;
    GridResolution grid_resolution;
    double f_mean = 0.0, g_mean = 0.0;
    long extrapolated = 0;
};

GapResult inequality_gap(const Surface& H, const GridFunction& f, const GridFunction& g, Weights w,
                         const Measure& mu, const SupConvOptions& opt = {});

// Lower envelope int H(f(x), g(x)) dmu used by the diagonal comparison.
double diagonal_lhs(const Surface& H, const GridFunction& f, const GridFunction& g, const Measure& mu);

struct LpOptions {
    int inner_nodes = 4001;
    double inner_width = 10.0;  // inner grid half-width in standard deviations
    int outer_nodes = 96;
    int threads = 0;
};

struct LpResult {
    double value = 0.0;
    // Same functional with the outer exponent 1/R instead of 1/a(R).
    double normalized_value = 0.0;
    double p = 0.0, q = 0.0, a_of_r = 0.0;
};

// int ( int H^R(f((x-y)/a), g(y/b)) dgamma_{p,q,x}(y) )^(1/(R-R^alpha)) dgamma(x)
// with p = R^beta and q = -b R^beta (a = |1-b|) or b R^beta (a = 1+b).
LpResult lp_smoothed_lhs(const Surface& H, const GridFunction& f, const GridFunction& g, Weights w, double R,
                         double alpha, double beta, const LpOptions& opt = {});

// Two-dimensional gap computed one axis at a time under the standard
// Gaussian on R^2.
GapResult tensorize_gap(const Surface& H, const GridFunction2D& f, const GridFunction2D& g, Weights w,
                        int threads = 0);

}  // namespace ehrhard
