#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>

#include "ehrhard/surface.hpp"
#include "ehrhard/weights.hpp"

namespace ehrhard {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Ratio form a^2 Hxx/Hx^2 + (1-a^2-b^2) Hxy/(Hx Hy) + b^2 Hyy/Hy^2.
// Throws DegeneratePointError when a first partial vanishes.
double pdi_value(const Surface& H, Weights w, double x, double y);
double pdi_from_jet(const Jet& j, Weights w);
// Polynomial form a^2 Hxx Hy^2 + (1-a^2-b^2) Hxy Hx Hy + b^2 Hyy Hx^2.
double pdi_numerator(const Jet& j, Weights w);

struct GridSpec {
    int nx = 200;
    int ny = 200;
    std::optional<Rect> rect;  // defaults to the surface domain
};

struct PdiReport {
    double min_value = 0.0;
    double arg_x = 0.0, arg_y = 0.0;
    bool feasible = true;
    long samples = 0;
    long violations = 0;
    long degenerate = 0;
    double tolerance = 1e-9;
};

PdiReport check_pdi_grid(const Surface& H, Weights w, const GridSpec& grid, double tol = 1e-9, int threads = 0);

Regime weight_constraint(Weights w);

// Nonzero gradient: numerator >= 0. Zero gradient: the 2x2 weighted Hessian
// is positive semidefinite.
bool check_degenerate(const Surface& H, Weights w, double x, double y);

std::pair<double, double> elliptic_params(Weights w);

struct BlockSmoothing {
    bool parabolic = true;
    double alpha = 0.9, beta = 0.2;  // parabolic growth exponents
    double c = 1.0;                  // elliptic shift a(R) = R - c

    static BlockSmoothing growth(double alpha, double beta) { return {true, alpha, beta, 0.0}; }
    static BlockSmoothing shift(double c) { return {false, 0.0, 0.0, c}; }
};

struct BlockReport {
    bool ok = true;
    std::array<double, 3> minors{};
    std::array<double, 3> scales{};
    int failed_minor = -1;  // 0-based index of the first negative minor
    Mat3 kernel{};          // Gram matrix of the column vectors under C
    Mat3 t{};               // second-order matrix built from H
    double p = 0.0, q = 0.0, a_of_r = 0.0, n = 0.0, inv_m = 0.0;
};

// Gram kernel, (p,q) and a(R) for the given smoothing schedule.
struct BlockKernel {
    Mat3 gram{};
    double p = 0.0, q = 0.0, a_of_r = 0.0;
};
BlockKernel block_kernel(Weights w, double R, const BlockSmoothing& s);
Mat3 block_t(const Jet& j, double R, double a_of_r);
// R H^(R-2) z^(1-a(R)) S T S with S = diag(1, 1, (1-a(R)) H / z).
Mat3 hess_b_factored(const Jet& j, double R, double a_of_r, double z);

BlockReport block_condition(const Surface& H, Weights w, double R, const BlockSmoothing& s, double x, double y);

enum class HomogeneousClass { convex, pl_classic, pl_a_minus_b, pl_b_minus_a, mixed };
std::string to_string(HomogeneousClass c);

struct HomogeneousFit {
    HomogeneousClass cls = HomogeneousClass::mixed;
    double a = 0.0, b = 0.0;  // recovered exponents of x and y
    double residual = 0.0;
    double min_curvature = 0.0, max_curvature = 0.0;
};

HomogeneousFit classify_homogeneous(const Surface& H);

struct MaReport {
    bool ok = true;
    std::string reason;
    double x = 0.0, y = 0.0;
};

MaReport concave_ma_check(const Surface& H, Weights w, const GridSpec& grid);

}  // namespace ehrhard
