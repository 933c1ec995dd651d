#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ehrhard/weights.hpp"

namespace ehrhard {

struct Rect {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

// Value and partials up to second order at a point.
struct Jet {
    double h = 0.0;
    double hx = 0.0, hy = 0.0;
    double hxx = 0.0, hxy = 0.0, hyy = 0.0;
};

// Twice differentiable surface on a closed rectangle with analytic partials.
class Surface {
public:
    using JetFn = std::function<Jet(double, double)>;
    using ValueFn = std::function<double(double, double)>;

    Surface() = default;
    Surface(std::string label, Rect domain, JetFn fn);

    double operator()(double x, double y) const { return value_ ? value_(x, y) : fn_(x, y).h; }
    Jet jet(double x, double y) const { return fn_(x, y); }
    std::array<double, 2> grad(double x, double y) const;
    std::array<double, 3> hess(double x, double y) const;

    const std::string& label() const { return label_; }
    const Rect& domain() const { return domain_; }
    Surface on(Rect domain) const;
    // Cheaper value-only evaluator used by the hot loops.
    Surface& with_value(ValueFn fn) {
        value_ = std::move(fn);
        return *this;
    }

    // Free-form numeric metadata (exponents, corner values and so on).
    std::map<std::string, double> meta;

private:
    std::string label_;
    Rect domain_;
    JetFn fn_;
    ValueFn value_;
};

inline constexpr Rect kPositiveRect{0.05, 10.0, 0.05, 10.0};

Surface make_ehrhard(Weights w, double inset = 0.01);

// classic: x^a y^(1-a), a in (0,1)
// a_minus_b: -x^a y^-(a-1), a > 1
// b_minus_a: -x^-a y^(a+1), a < 0 (corollary convention, convex surface)
// b_minus_a_positive: -x^-a y^(a+1), a > 0 (Monge-Ampere convention, concave)
enum class PlCase { classic, a_minus_b, b_minus_a, b_minus_a_positive };

Surface make_pl_family(double exponent, PlCase c, Rect domain = kPositiveRect);

// coef * x^alpha * y^beta
Surface make_monomial(double coef, double alpha, double beta, Rect domain = kPositiveRect);

Surface make_young(double p, double q, Rect domain = kPositiveRect);
double young_value(double p, double q, Weights w);
bool young_valid(double p, double q, Weights w);

Surface make_minkowski(double p, double q, double r, Rect domain = kPositiveRect);
bool minkowski_valid(double p, double q, double r, Weights w);

Surface make_mp_mean(double p, Weights w, Rect domain = {0.0, 10.0, 0.0, 10.0});

// -x^4, constant in y.
Surface make_neg_quartic(Rect domain = {-2.0, 2.0, -2.0, 2.0});
// Quadratic form 0.5*(cxx x^2 + 2 cxy x y + cyy y^2).
Surface make_quadratic(double cxx, double cxy, double cyy, Rect domain = {-1.0, 1.0, -1.0, 1.0});
// Pointwise maximum; partials come from the active branch.
Surface make_max(const Surface& h1, const Surface& h2);

struct SurfaceId {
    std::string family;
    std::map<std::string, double> params;
};

// "ehrhard:a=0.5,b=0.5", "pl:a=0.4,case=classic", "young:p=2,q=2",
// "minkowski:p=1,q=1,r=1", "mp:p=2,a=0.5,b=0.5", "power:alpha=0.3",
// "quartic". Throws ParameterError on malformed ids.
SurfaceId parse_surface_id(const std::string& id);
// Builds a catalog surface. Weights embedded in the id must agree with
// `weights` when both are given.
Surface surface_from_id(const std::string& id, std::optional<Weights> weights = std::nullopt);
// Weights implied by an id (ehrhard, mp), if any.
std::optional<Weights> weights_in_id(const std::string& id);
std::vector<std::string> catalog_examples();

}  // namespace ehrhard
