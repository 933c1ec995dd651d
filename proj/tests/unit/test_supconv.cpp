#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ehrhard/errors.hpp"
#include "ehrhard/supconv.hpp"

using namespace ehrhard;

namespace {

const Rect kClosedPositive{0.0, 10.0, 0.0, 10.0};

}  // namespace

TEST_CASE("grid function basics") {
    Grid1D g{-1, 1, 5};
    GridFunction f(g, {0, 1, 2, 3, 4});
    CHECK(f(0.25) == doctest::Approx(2.5));
    CHECK(f(-5) == 0.0);
    CHECK(f(5) == 4.0);
    CHECK(f.range_lo() == 0.0);
    CHECK_THROWS_AS(GridFunction(g, {0, 1, 2, 3, 4}, 0.0, 3.5), ParameterError);
    CHECK_THROWS_AS(GridFunction(g, {0, 1}), ParameterError);
    std::stringstream ss;
    f.write_csv(ss);
    GridFunction back = GridFunction::read_csv(ss);
    CHECK(back.values() == f.values());
    CHECK(back.grid().n == 5);
    std::stringstream bad("node,value\n0,1\n1,2\n3,3\n");
    CHECK_THROWS_AS(GridFunction::read_csv(bad), ParameterError);
}

TEST_CASE("sup-convolution of constants") {
    Surface h = make_pl_family(0.5, PlCase::classic);
    Grid1D g{-4, 4, 201};
    SupConvResult r = sup_convolve(h, GridFunction::constant(2, g), GridFunction::constant(3, g), {0.5, 0.5});
    for (double v : r.h.values()) CHECK(v == doctest::Approx(h(2, 3)).epsilon(1e-15));
}

TEST_CASE("sup-convolution of gaussian bumps") {
    Surface h = make_monomial(1, 0.5, 0.5, kClosedPositive);
    Grid1D g{-6, 6, 2001};
    auto bump = GridFunction::sample([](double x) { return std::exp(-x * x); }, g);
    SupConvResult r = sup_convolve(h, bump, bump, {0.5, 0.5});
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) worst = std::max(worst, std::abs(r.h.values()[i] - std::exp(-g.node(i) * g.node(i))));
    CHECK(worst < 1e-4);
}

TEST_CASE("sup-convolution is monotone") {
    Surface h = make_pl_family(0.4, PlCase::classic, kClosedPositive);
    Grid1D g{-5, 5, 301};
    auto f1 = GridFunction::sample([](double x) { return std::exp(-x * x / 2); }, g);
    auto f2 = GridFunction::sample([](double x) { return 1.2 * std::exp(-x * x / 3); }, g);
    auto gg = GridFunction::sample([](double x) { return 1.0 / (1.0 + x * x); }, g);
    Weights w{0.4, 0.6};
    auto h1 = sup_convolve(h, f1, gg, w).h, h2 = sup_convolve(h, f2, gg, w).h;
    for (int i = 0; i < g.n; ++i) CHECK(h1.values()[i] <= h2.values()[i]);
}

TEST_CASE("sup-convolution does not depend on the worker count") {
    Surface h = make_ehrhard({0.6, 0.8});
    Grid1D g{-6, 6, 401};
    auto f = GridFunction::sample([](double x) { return 0.1 + 0.8 * normal_cdf(x); }, g);
    auto gg = GridFunction::sample([](double x) { return 0.2 + 0.6 * std::exp(-x * x); }, g);
    SupConvOptions one, many;
    one.threads = 1;
    many.threads = 7;
    auto r1 = sup_convolve(h, f, gg, {0.6, 0.8}, one), r2 = sup_convolve(h, f, gg, {0.6, 0.8}, many);
    CHECK(r1.h.values() == r2.h.values());
    CHECK(r1.argmax == r2.argmax);
}

TEST_CASE("range outside the surface domain") {
    Grid1D g{-3, 3, 51};
    CHECK_THROWS_AS(sup_convolve(make_ehrhard({0.5, 0.5}), GridFunction::constant(1.0, g), GridFunction::constant(0.5, g),
                                 {0.5, 0.5}),
                    PreconditionError);
}

TEST_CASE("grid integration") {
    Measure mu = Measure::standard(1);
    Grid1D g{-8, 8, 801};
    CHECK(integrate_grid(GridFunction::constant(0.37, g), mu).value == doctest::Approx(0.37).epsilon(1e-15));
    auto bump = GridFunction::sample([](double x) { return std::exp(-x * x); }, g);
    CHECK(std::abs(integrate_grid(bump, mu).value - 1.0 / std::sqrt(3.0)) < 1e-8);
    // f(x) = x^2 integrated against a shifted gaussian: 1 + 1
    Measure shifted = Measure::gaussian_normalized({0.5}, {1.0});
    Grid1D wide{-9, 11, 2001};
    auto sq = GridFunction::sample([](double x) { return x * x; }, wide);
    CHECK(std::abs(integrate_grid(sq, shifted).value - 2.0) < 1e-4);
}

TEST_CASE("inequality gap") {
    Measure mu = Measure::standard(1);
    Grid1D g{-8, 8, 801};
    Surface pl = make_pl_family(0.5, PlCase::classic, kClosedPositive);
    GapResult c = inequality_gap(pl, GridFunction::constant(0.3, g), GridFunction::constant(2.0, g), {0.5, 0.5}, mu);
    CHECK(c.gap == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> C(-1.5, 1.5), S(0.3, 2.0), A(0.2, 3.0);
    for (int k = 0; k < 10; ++k) {
        double c1 = C(rng), s1 = S(rng), a1 = A(rng), c2 = C(rng), s2 = S(rng), a2 = A(rng);
        auto f = GridFunction::sample([=](double x) { return a1 * std::exp(-(x - c1) * (x - c1) / (2 * s1 * s1)); }, g);
        auto gg = GridFunction::sample([=](double x) { return a2 * std::exp(-(x - c2) * (x - c2) / (2 * s2 * s2)); }, g);
        CHECK(inequality_gap(pl, f, gg, {0.5, 0.5}, mu).gap >= -1e-6);
    }
}

TEST_CASE("probit pairs are equality cases of the gaussian surface") {
    Measure mu = Measure::standard(1);
    // g lives on a grid that holds every line t = (x + y)/2 so nothing is clamped
    Grid1D gf{-8, 8, 4001}, gg_grid{-24, 24, 12001};
    Surface e = make_ehrhard({0.5, 0.5}, 1e-6);
    for (auto [k, c1, c2] : {std::tuple{0.18, 0.3, -0.4}, std::tuple{0.15, 0.0, 0.0}, std::tuple{0.18, -0.5, 0.2}}) {
        auto f = GridFunction::sample([=](double x) { return normal_cdf(k * x + c1); }, gf);
        auto gg = GridFunction::sample([=](double x) { return normal_cdf(k * x + c2); }, gg_grid);
        GapResult r = inequality_gap(e, f, gg, {0.5, 0.5}, mu);
        // E Phi(k X + c) = Phi(c / sqrt(1 + k^2))
        CHECK(std::abs(r.f_mean - normal_cdf(c1 / std::sqrt(1 + k * k))) < 1e-7);
        CHECK(std::abs(r.gap) < 1e-5);
    }
}

TEST_CASE("smoothed left side") {
    Grid1D g{-8, 8, 401};
    Surface pl = make_pl_family(0.5, PlCase::classic, kClosedPositive);
    auto f = GridFunction::constant(0.6, g), gg = GridFunction::constant(1.7, g);
    for (double R : {1e3, 1e4}) {
        LpResult r = lp_smoothed_lhs(pl, f, gg, {0.5, 0.5}, R, 0.9, 0.2);
        double expect = std::pow(pl(0.6, 1.7), R / (R - std::pow(R, 0.9)));
        CHECK(r.value == doctest::Approx(expect).epsilon(1e-9));
        CHECK(r.normalized_value == doctest::Approx(pl(0.6, 1.7)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(lp_smoothed_lhs(pl, f, gg, {0.5, 0.5}, 1e3, 0.5, 0.4), ParameterError);
    CHECK_THROWS_AS(lp_smoothed_lhs(pl, f, gg, {0.6, 0.8}, 1e3, 0.9, 0.2), RegimeError);

    Grid1D fine{-8, 8, 2001};
    auto bump = GridFunction::sample([](double x) { return std::exp(-x * x); }, fine);
    Surface h = make_monomial(1, 0.5, 0.5, {1e-300, 10, 1e-300, 10});
    double grid_lhs = inequality_gap(h, bump, bump, {0.5, 0.5}, Measure::standard(1)).lhs;
    double d3 = std::abs(lp_smoothed_lhs(h, bump, bump, {0.5, 0.5}, 1e3, 0.9, 0.2).value - grid_lhs);
    double d4 = std::abs(lp_smoothed_lhs(h, bump, bump, {0.5, 0.5}, 1e4, 0.9, 0.2).value - grid_lhs);
    CHECK(d4 < d3);
}

TEST_CASE("tensorized gap") {
    Grid1D g{-8, 8, 161}, g2{-4, 4, 21};
    Surface pl = make_pl_family(0.5, PlCase::classic, kClosedPositive);
    Weights w{0.5, 0.5};
    auto c = GridFunction2D::sample([](double, double) { return 0.8; }, g, g2);
    CHECK(std::abs(tensorize_gap(pl, c, c, w).gap) < 1e-14);

    auto f1 = [](double x) { return std::exp(-(x - 0.5) * (x - 0.5)); };
    auto g1 = [](double x) { return 0.5 * std::exp(-x * x / 3); };
    auto fs = GridFunction2D::sample([&](double x, double) { return f1(x); }, g, g2);
    auto gs = GridFunction2D::sample([&](double x, double) { return g1(x); }, g, g2);
    GapResult two = tensorize_gap(pl, fs, gs, w);
    GapResult one = inequality_gap(pl, GridFunction::sample(f1, g), GridFunction::sample(g1, g), w, Measure::standard(1));
    CHECK(std::abs(two.gap - one.gap) <= one.quadrature_error + two.quadrature_error + 1e-12);

    auto f2 = GridFunction2D::sample([](double x, double y) { return std::exp(-(x * x + x * y + y * y) / 2); }, g, g2);
    auto g2d = GridFunction2D::sample([](double x, double y) { return 2 * std::exp(-((x - 1) * (x - 1) + y * y)); }, g, g2);
    CHECK(tensorize_gap(pl, f2, g2d, w).gap >= -1e-5);
}
