#include <cmath>

#include "doctest.h"
#include "ehrhard/errors.hpp"
#include "ehrhard/gaussian.hpp"
#include "ehrhard/surface.hpp"

using namespace ehrhard;

namespace {

// Central differences of the value against the analytic jet.
void check_jet(const Surface& s, double x, double y) {
    const double h = 1e-4;
    Jet j = s.jet(x, y);
    double fx = (s(x + h, y) - s(x - h, y)) / (2 * h);
    double fy = (s(x, y + h) - s(x, y - h)) / (2 * h);
    double fxx = (s(x + h, y) - 2 * s(x, y) + s(x - h, y)) / (h * h);
    double fyy = (s(x, y + h) - 2 * s(x, y) + s(x, y - h)) / (h * h);
    double fxy = (s(x + h, y + h) - s(x + h, y - h) - s(x - h, y + h) + s(x - h, y - h)) / (4 * h * h);
    auto close = [](double num, double ana, double scale) { return std::abs(num - ana) <= 1e-5 * scale; };
    double gs = std::max({1.0, std::abs(j.hx), std::abs(j.hy)});
    double hs = std::max({1.0, std::abs(j.hxx), std::abs(j.hyy), std::abs(j.hxy)});
    INFO(s.label() << " at (" << x << ", " << y << ")");
    CHECK(close(fx, j.hx, gs));
    CHECK(close(fy, j.hy, gs));
    CHECK(std::abs(fxx - j.hxx) <= 1e-3 * hs);
    CHECK(std::abs(fyy - j.hyy) <= 1e-3 * hs);
    CHECK(std::abs(fxy - j.hxy) <= 1e-3 * hs);
    CHECK(std::isfinite(j.h));
    CHECK(j.h == doctest::Approx(s(x, y)).epsilon(1e-13));
}

}  // namespace

TEST_CASE("ehrhard surface values") {
    Surface e = make_ehrhard({0.5, 0.5});
    CHECK(std::abs(e(0.5, 0.5) - 0.5) < 1e-15);
    CHECK(std::abs(e(0.5, normal_cdf(1.0)) - 0.6914625) < 1e-6);
    Surface e2 = make_ehrhard({0.3, 0.7});
    for (double u : {0.05, 0.3, 0.77}) CHECK(std::abs(e2(u, u) - u) < 1e-12);
}

TEST_CASE("power family values") {
    CHECK(make_pl_family(0.5, PlCase::classic)(4, 9) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(make_pl_family(2.0, PlCase::a_minus_b)(2, 1) == doctest::Approx(-4.0).epsilon(1e-14));
    CHECK_THROWS_AS(make_pl_family(1.5, PlCase::classic), ParameterError);
    CHECK_THROWS_AS(make_pl_family(0.5, PlCase::a_minus_b), ParameterError);
}

TEST_CASE("young surface") {
    CHECK(make_young(2, 2)(4, 4) == doctest::Approx(4.0));
    CHECK(make_young(2, -2)(4, 4) == doctest::Approx(1.0));
    Surface y = make_young(1 / 0.3, 1 / 0.7);
    Surface pl = make_pl_family(0.3, PlCase::classic);
    for (double x : {0.2, 1.0, 3.5})
        for (double z : {0.4, 2.0, 7.0}) CHECK(y(x, z) == doctest::Approx(pl(x, z)).epsilon(1e-12));
    CHECK(young_valid(2, 2, {0.5, 0.5}));
    CHECK(young_value(2, 2, {0.5, 0.5}) == doctest::Approx(1.0));
    CHECK_FALSE(young_valid(4, 4, {0.5, 0.5}));
    CHECK(young_value(4, 4, {0.5, 0.5}) == doctest::Approx(2.0));
    CHECK(young_valid(1 / 0.3, 1 / 0.7, {0.3, 0.7}));
}

TEST_CASE("minkowski surface") {
    CHECK(make_minkowski(1, 1, 1)(1, 2) == doctest::Approx(3.0));
    CHECK(make_minkowski(0.5, 0.5, 1)(4, 9) == doctest::Approx(97.0));
    Surface m = make_minkowski(0.7, 0.4, 1.3);
    for (double x : {0.1, 1.0, 5.0})
        for (double y : {0.3, 2.0, 8.0}) {
            Jet j = m.jet(x, y);
            CHECK(j.hx > 0.0);
            CHECK(j.hy > 0.0);
        }
    CHECK(minkowski_valid(1, 1, 1, {0.5, 0.5}));
    CHECK(minkowski_valid(1, 1, 3, {0.5, 0.5}));
    CHECK_FALSE(minkowski_valid(1, 1, 0.9, {0.5, 0.5}));
    CHECK(minkowski_valid(0.75, 0.75, 0.75, {0.5, 0.5}));
    CHECK_FALSE(minkowski_valid(0.75, 0.75, 0.74, {0.5, 0.5}));
    // a sqrt(1-p) + b sqrt(1-q) = 1 with a = b = 1, p = q = 3/4
    CHECK(minkowski_valid(0.75, 0.75, 0.01, {1.0, 1.0}));
}

TEST_CASE("power means") {
    CHECK(make_mp_mean(1, {0.5, 0.5})(2, 2) == doctest::Approx(2.0));
    CHECK(make_mp_mean(2, {0.5, 0.5})(0, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    Surface m = make_mp_mean(3, {0.3, 0.7});
    for (double x : {0.5, 1.5, 3.0})
        for (double y : {0.2, 1.0, 4.0}) CHECK(std::abs(m(2 * x, 2 * y) - 2 * m(x, y)) < 1e-12);
}

TEST_CASE("analytic partials match finite differences") {
    std::vector<Surface> all = {make_ehrhard({0.5, 0.5}),
                                make_ehrhard({0.6, 0.8}),
                                make_pl_family(0.4, PlCase::classic),
                                make_pl_family(2.0, PlCase::a_minus_b),
                                make_pl_family(-0.5, PlCase::b_minus_a),
                                make_pl_family(0.5, PlCase::b_minus_a_positive),
                                make_monomial(1.0, 0.3, 0.3),
                                make_young(2.4, 2.4),
                                make_minkowski(0.5, 0.7, 1.5),
                                make_mp_mean(2, {0.5, 0.5}),
                                make_neg_quartic(),
                                make_quadratic(1.0, 0.3, 2.0)};
    for (const Surface& s : all) {
        const Rect& d = s.domain();
        for (double fx : {0.25, 0.5, 0.8})
            for (double fy : {0.3, 0.6}) check_jet(s, d.x0 + fx * d.width(), d.y0 + fy * d.height());
    }
}

TEST_CASE("surface ids") {
    SurfaceId id = parse_surface_id("ehrhard:a=0.3,b=0.7");
    CHECK(id.family == "ehrhard");
    CHECK(id.params.at("a") == 0.3);
    CHECK(weights_in_id("ehrhard:a=0.3,b=0.7")->b == 0.7);
    CHECK_FALSE(weights_in_id("quartic").has_value());
    CHECK_THROWS_AS(surface_from_id("ehrhard:a=0.3,b=0.7", Weights{0.5, 0.5}), ParameterError);
    CHECK_THROWS_AS(surface_from_id("nosuch"), ParameterError);
    CHECK_THROWS_AS(parse_surface_id("ehrhard:a=x"), ParameterError);
    for (const std::string& s : catalog_examples()) CHECK_NOTHROW(surface_from_id(s));
}

TEST_CASE("max of surfaces") {
    Surface a = make_pl_family(0.4, PlCase::classic), b = make_pl_family(0.6, PlCase::classic);
    Surface m = make_max(a, b);
    CHECK(m(2, 3) == doctest::Approx(std::max(a(2, 3), b(2, 3))));
    CHECK(m(3, 2) == doctest::Approx(std::max(a(3, 2), b(3, 2))));
    CHECK(a(2, 3) > b(2, 3));
    CHECK(m.jet(2, 3).hx == doctest::Approx(a.jet(2, 3).hx));
    CHECK(m.jet(3, 2).hx == doctest::Approx(b.jet(3, 2).hx));
}
