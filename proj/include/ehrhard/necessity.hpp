#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "ehrhard/gaussian.hpp"
#include "ehrhard/supconv.hpp"
#include "ehrhard/surface.hpp"
#include "ehrhard/weights.hpp"

namespace ehrhard {

// Normalized second-order ratios of H at a base point:
// A = Huu/Hu^2, B = Huv/(Hu Hv), C = Hvv/Hv^2.
struct Ratios {
    double A = 0.0, B = 0.0, C = 0.0;
    static Ratios of(const Jet& j);
};

// A + p - 2B + C + q; the admissible half-plane is where this is negative.
double half_plane_value(const Jet& j, double p, double q);

double clamp_phi(double t, double eps, double delta, double alpha);

struct PerturbationParams {
    double u = 0.5, v = 0.5;
    double p = -1.0, q = -1.0;
    double eps = 1e-2;
    double delta = 2.0;
    double alpha = 0.32;
};

// (A+p) s^2 - 2B s + C + q < 0 for every s in [1/delta, delta].
bool delta_admissible(const Jet& j, double p, double q, double delta);
// Largest delta <= 10 passing delta_admissible, by bisection.
double choose_delta(const Jet& j, double p, double q);

// f(x) = u + eps phi(a x)/Hu + eps^2 p phi(a x)^2/Hu and the same for g
// with (v, q, b, Hv). Throws ParameterError when the image leaves H's domain.
std::pair<GridFunction, GridFunction> perturbed_pair(const Surface& H, const PerturbationParams& prm, Weights w,
                                                     Grid1D grid = kDefaultGrid);

// Coefficient K of the envelope maximum K t^2.
double psi_coefficient(const Jet& j, double p, double q);
double psi_closed_form(const Jet& j, double p, double q, double t);
// Maximizer of the envelope along x + y = t.
double argmax_x0(const Jet& j, double p, double q, double t);
// Envelope (A+p) X^2 + 2B X Y + (C+q) Y^2.
double envelope(const Jet& j, double p, double q, double X, double Y);

// K - (p a^2 + q b^2).
double quad_form_margin(const Jet& j, Weights w, double p, double q);
bool quad_form_necessity(const Jet& j, Weights w, double p, double q);

bool mean_constraint_check(const Measure& mu, Weights w);

// Leading gap of the perturbed pair, eps^2 beta (K(2p,2q)/2 - p a^2 - q b^2)
// with beta the second moment of mu.
double predicted_gap(const Jet& j, Weights w, double p, double q, double eps, double beta);

enum class SearchFamily { perturbative, step, random };
std::string to_string(SearchFamily f);
SearchFamily parse_family(const std::string& s);

struct SearchOptions {
    long budget = 100000;        // inequality_gap evaluations
    std::uint64_t seed = 1;
    Grid1D grid{-8.0, 8.0, 801};
    double threshold = 1e-4;     // relative to the scale of H on the image
    int random_candidates = 256;
    int threads = 0;
};

struct Counterexample {
    GridFunction f, g;
    GapResult gap;
    double scale = 1.0;
    std::map<std::string, double> params;
};

struct SearchReport {
    std::optional<Counterexample> found;
    long evaluations = 0;
    double best_ratio = 0.0;  // most negative gap / scale seen
    SearchFamily family = SearchFamily::perturbative;
};

// Median |H| over a sample of the image of (f, g).
double image_scale(const Surface& H, const GridFunction& f, const GridFunction& g);

SearchReport counterexample_search(const Surface& H, Weights w, const Measure& mu, SearchFamily family,
                                   const SearchOptions& opt = {});

}  // namespace ehrhard
