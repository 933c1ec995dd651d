#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ehrhard/gaussian.hpp"
#include "ehrhard/weights.hpp"

namespace ehrhard {

// Potential V of a density proportional to exp(-V) on a support interval.
struct Potential {
    std::string label;
    Fn1 V, dV, d2V;
    double lo = -1e300, hi = 1e300;
};

Potential gaussian_potential(double mean = 0.0, double variance = 1.0);
Potential quartic_potential();
// V' = 1.5 x + sqrt(x^2 + s^2)/2: slope 1 on the left, 2 on the right.
Potential softplus_blend_potential(double s = 1.0);
// x^2/2 + amp cos x.
Potential near_gaussian_potential(double amp = 1e-3);
Potential potential_by_name(const std::string& name);

Measure to_measure(const Potential& pot);

struct PotentialCheck {
    bool ok = true;
    double mass_error = 0.0;       // |int exp(-V + log Z) - 1|
    double derivative_error = 0.0; // worst relative mismatch of V'' against differences of V'
    double log_normalizer = 0.0;
};
PotentialCheck validate_potential(const Potential& pot);

struct Grid2Spec {
    double lo = -5.0, hi = 5.0;
    int n = 201;
    double node(int i) const { return lo + (hi - lo) * i / (n - 1); }
};

struct SubadditivityReport {
    bool pass = true;
    double worst_margin = 0.0;  // min of a V'(x) + b V'(y) - V'(ax + by)
    double witness_x = 0.0, witness_y = 0.0;
    double max_abs_margin = 0.0;
    double scale = 1.0;
    long samples = 0;
};

SubadditivityReport vprime_subadditive(const Potential& pot, Weights w, const Grid2Spec& grid = {}, int threads = 0);
// Margin at a single point.
double subadditive_margin(const Potential& pot, Weights w, double x, double y);

struct ConvexityReport {
    bool convex = true;
    double min_second_difference = 0.0;
    double witness = 0.0;
    std::optional<double> c_minus, c_plus;
    bool admissible = false;  // convex with 0 < c_minus <= c_plus
};

// Throws PreconditionError when the slope windows disagree by more than 1e-3.
ConvexityReport vprime_convexity_and_slopes(const Potential& pot, double radius = 20.0);

struct RigidityReport {
    double deviation = 0.0;
    double witness = 0.0;
};

// Throws PreconditionError with the asymmetry witness when V is not even.
RigidityReport even_rigidity_check(const Potential& pot, Weights w, const Grid2Spec& grid = {});

// phi(Phi^-1(p)) for the measure's own distribution and density.
double isoperimetric_profile(const Measure& mu, double p);

struct EpigraphReport {
    bool pass = true;
    double worst_margin = 0.0;  // min of s V'(x) - V'(s x)
    double witness_x = 0.0, witness_s = 1.0;
};
EpigraphReport epigraph_rays(const Potential& pot, const Grid2Spec& grid = {});

std::vector<Weights> audit_weight_set();

struct AuditReport {
    std::string label;
    PotentialCheck potential;
    std::vector<std::pair<Weights, SubadditivityReport>> subadditivity;
    bool subadditive_all = true;
    std::optional<ConvexityReport> convexity;
    std::string convexity_error;
    std::optional<RigidityReport> rigidity;
    EpigraphReport epigraph;
    double mean = 0.0, second_moment = 0.0;
    bool mean_zero = true;
    bool pass = true;  // necessary conditions only
};

AuditReport audit_measure(const Potential& pot, const Grid2Spec& grid = {}, double radius = 20.0, int threads = 0);

}  // namespace ehrhard
