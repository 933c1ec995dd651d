#include <cmath>
#include <random>

#include "doctest.h"
#include "ehrhard/errors.hpp"
#include "ehrhard/pdi.hpp"

using namespace ehrhard;

TEST_CASE("weight regimes") {
    CHECK(weight_constraint({0.5, 0.5}) == Regime::parabolic);
    CHECK(weight_constraint({1.0, 1.0}) == Regime::elliptic);
    CHECK(weight_constraint({0.2, 0.2}) == Regime::infeasible);
    CHECK(weight_constraint({2.0, 1.0}) == Regime::parabolic);
    CHECK(weight_constraint({0.6, 0.8}) == Regime::elliptic);
    CHECK(to_string(Regime::elliptic) == "elliptic");
}

TEST_CASE("pdi vanishes on the gaussian surface") {
    for (Weights w : {Weights{0.5, 0.5}, Weights{0.3, 0.7}, Weights{1.0, 1.0}, Weights{0.6, 0.8}}) {
        Surface e = make_ehrhard(w);
        double worst = 0.0;
        for (double x = 0.03; x < 0.98; x += 0.07)
            for (double y = 0.02; y < 0.98; y += 0.09) worst = std::max(worst, std::abs(pdi_value(e, w, x, y)));
        CHECK(worst < 1e-7);
    }
}

TEST_CASE("pdi of the product family") {
    for (double a : {0.2, 0.5, 0.8}) {
        Surface h = make_pl_family(a, PlCase::classic);
        for (double x : {0.1, 1.0, 7.0})
            for (double y : {0.2, 3.0}) CHECK(std::abs(pdi_value(h, {a, 1 - a}, x, y)) < 1e-9);
    }
}

TEST_CASE("power law value at the unit point") {
    for (double al : {0.1, 0.3, 0.45, 0.6, 0.9}) {
        Surface h = make_monomial(1.0, al, al);
        CHECK(std::abs(pdi_value(h, {0.5, 0.5}, 1, 1) - (2 * al - 1) / (2 * al)) < 1e-9);
    }
    CHECK(std::abs(pdi_value(make_monomial(1, 0.3, 0.3), {0.5, 0.5}, 1, 1) + 2.0 / 3.0) < 1e-9);
}

TEST_CASE("pdi scales inversely under affine maps") {
    Surface h = make_minkowski(0.6, 0.8, 1.2);
    const double c = 3.5, d = -2.0;
    Surface g("affine", h.domain(), [h, c, d](double x, double y) {
        Jet j = h.jet(x, y);
        return Jet{c * j.h + d, c * j.hx, c * j.hy, c * j.hxx, c * j.hxy, c * j.hyy};
    });
    for (double x : {0.3, 2.0})
        for (double y : {0.5, 4.0})
            CHECK(pdi_value(g, {0.5, 0.5}, x, y) == doctest::Approx(pdi_value(h, {0.5, 0.5}, x, y) / c).epsilon(1e-12));
}

TEST_CASE("grid check") {
    GridSpec grid;
    grid.rect = Rect{0.02, 0.98, 0.02, 0.98};
    for (Weights w : {Weights{0.3, 0.7}, Weights{0.5, 0.5}}) {
        PdiReport r = check_pdi_grid(make_ehrhard(w), w, grid);
        CHECK(r.feasible);
        CHECK(r.min_value >= -1e-7);
        CHECK(r.samples == 200 * 200);
    }
    PdiReport bad = check_pdi_grid(make_monomial(1, 0.3, 0.3), {0.5, 0.5}, GridSpec{});
    CHECK_FALSE(bad.feasible);
    CHECK(bad.violations > 0);
    CHECK(pdi_value(make_monomial(1, 0.3, 0.3), {0.5, 0.5}, bad.arg_x, bad.arg_y) == doctest::Approx(bad.min_value));
    CHECK(check_pdi_grid(make_minkowski(0.5, 0.5, 0.5), {0.5, 0.5}, GridSpec{}).feasible);
    CHECK_THROWS_AS(check_pdi_grid(make_ehrhard({0.5, 0.5}), {0.2, 0.2}, grid), RegimeError);
}

TEST_CASE("degenerate points") {
    Surface quartic = make_neg_quartic();
    for (double x : {-1.5, -0.2, 0.0, 0.7})
        for (double y : {-1.0, 0.5}) CHECK(check_degenerate(quartic, {0.5, 0.5}, x, y));
    CHECK(check_degenerate(make_quadratic(2, 0, 2), {0.5, 0.5}, 0, 0));
    CHECK_FALSE(check_degenerate(make_quadratic(-2, 0, -2), {0.5, 0.5}, 0, 0));
    CHECK_THROWS_AS(pdi_value(make_quadratic(2, 0, 2), {0.5, 0.5}, 0, 0), DegeneratePointError);
}

TEST_CASE("elliptic parameters") {
    auto [p, q] = elliptic_params({1.0, 1.0});
    CHECK(p == 4.0 / 3.0);
    CHECK(q == -2.0 / 3.0);
    CHECK(std::abs(1 / p + q * q / (p * p) - 1.0) < 1e-15);
    CHECK_THROWS_AS(elliptic_params({0.5, 0.5}), RegimeError);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.05, 3.0);
    int checked = 0;
    while (checked < 1000) {
        Weights w{U(rng), U(rng)};
        if (w.regime() != Regime::elliptic) continue;
        auto [pp, qq] = elliptic_params(w);
        CHECK(std::abs(1 / pp + qq * qq / (pp * pp) - w.b * w.b) < 1e-10);
        CHECK(std::abs(1 + 1 / pp + 2 * qq / pp + qq * qq / (pp * pp) - w.a * w.a) < 1e-10);
        ++checked;
    }
}

TEST_CASE("block condition") {
    auto sm = BlockSmoothing::growth(0.9, 0.2);
    Surface e = make_ehrhard({0.5, 0.5});
    CHECK(block_condition(e, {0.5, 0.5}, 1e6, sm, 0.4, 0.6).ok);
    BlockReport bad = block_condition(make_monomial(1, 0.3, 0.3), {0.5, 0.5}, 1e4, sm, 1.0, 1.0);
    CHECK_FALSE(bad.ok);
    CHECK(bad.failed_minor == 2);
    CHECK_FALSE(block_condition(make_monomial(1, 0.3, 0.3), {0.5, 0.5}, 1e6, sm, 1.0, 1.0).ok);
    CHECK_THROWS_AS(block_condition(e, {0.5, 0.5}, 1e6, BlockSmoothing::growth(0.5, 0.4), 0.4, 0.6),
                    ParameterError);
    CHECK_THROWS_AS(block_condition(e, {0.5, 0.5}, 1e6, BlockSmoothing::shift(1.0), 0.4, 0.6), ParameterError);
    CHECK_THROWS_AS(block_condition(make_quadratic(-1, 0, -1), {0.5, 0.5}, 1e6, sm, 0.5, 0.5), PreconditionError);
}

TEST_CASE("block factorization matches direct hessian") {
    Surface h = make_minkowski(0.7, 0.9, 1.1);
    Jet j = h.jet(1.3, 0.8);
    const double R = 6.0, A = 3.5, z = 1.0;
    Mat3 f = hess_b_factored(j, R, A, z);
    // B = H^R z^(1-A)
    double hr = std::pow(j.h, R), zp = std::pow(z, 1 - A);
    Mat3 d{};
    d[0][0] = zp * (R * (R - 1) * std::pow(j.h, R - 2) * j.hx * j.hx + R * std::pow(j.h, R - 1) * j.hxx);
    d[0][1] = zp * (R * (R - 1) * std::pow(j.h, R - 2) * j.hx * j.hy + R * std::pow(j.h, R - 1) * j.hxy);
    d[1][1] = zp * (R * (R - 1) * std::pow(j.h, R - 2) * j.hy * j.hy + R * std::pow(j.h, R - 1) * j.hyy);
    d[0][2] = R * std::pow(j.h, R - 1) * j.hx * (1 - A) * std::pow(z, -A);
    d[1][2] = R * std::pow(j.h, R - 1) * j.hy * (1 - A) * std::pow(z, -A);
    d[2][2] = hr * (1 - A) * (-A) * std::pow(z, -A - 1);
    d[1][0] = d[0][1];
    d[2][0] = d[0][2];
    d[2][1] = d[1][2];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(std::abs(f[r][c] - d[r][c]) <= 1e-8 * std::abs(d[r][c]));
}

TEST_CASE("block condition agrees with grid check at large R") {
    std::mt19937_64 rng(11);
    struct Case {
        Surface h;
        Weights w;
        BlockSmoothing s;
    };
    std::vector<Case> cases = {{make_ehrhard({0.5, 0.5}, 0.05), {0.5, 0.5}, BlockSmoothing::growth(0.9, 0.2)},
                               {make_ehrhard({0.3, 0.7}, 0.05), {0.3, 0.7}, BlockSmoothing::growth(0.9, 0.2)},
                               {make_pl_family(0.4, PlCase::classic, {0.2, 5, 0.2, 5}), {0.4, 0.6},
                                BlockSmoothing::growth(0.9, 0.2)},
                               {make_monomial(1, 0.8, 0.8, {0.2, 5, 0.2, 5}), {0.5, 0.5},
                                BlockSmoothing::growth(0.9, 0.2)}};
    for (const Case& c : cases) {
        REQUIRE(check_pdi_grid(c.h, c.w, GridSpec{40, 40, std::nullopt}).feasible);
        const Rect& d = c.h.domain();
        std::uniform_real_distribution<double> X(d.x0, d.x1), Y(d.y0, d.y1);
        int fails = 0;
        for (int k = 0; k < 50; ++k) fails += block_condition(c.h, c.w, 1e6, c.s, X(rng), Y(rng)).ok ? 0 : 1;
        INFO(c.h.label());
        CHECK(fails == 0);
    }
}

TEST_CASE("homogeneous classification") {
    HomogeneousFit pl = classify_homogeneous(make_pl_family(0.4, PlCase::classic));
    CHECK(pl.cls == HomogeneousClass::pl_classic);
    CHECK(std::abs(pl.a - 0.4) < 1e-6);
    CHECK(std::abs(pl.b - 0.6) < 1e-6);
    CHECK(classify_homogeneous(make_minkowski(0.5, 0.5, 0.5)).cls == HomogeneousClass::convex);
    HomogeneousFit amb = classify_homogeneous(make_pl_family(2.0, PlCase::a_minus_b));
    CHECK(amb.cls == HomogeneousClass::pl_a_minus_b);
    CHECK(std::abs(amb.a - 2.0) < 1e-6);
    CHECK(classify_homogeneous(make_pl_family(-0.5, PlCase::b_minus_a)).cls == HomogeneousClass::convex);
    HomogeneousFit bma = classify_homogeneous(make_pl_family(0.5, PlCase::b_minus_a_positive));
    CHECK(bma.cls == HomogeneousClass::pl_b_minus_a);
    CHECK(std::abs(bma.b - 1.5) < 1e-6);
    CHECK_THROWS_AS(classify_homogeneous(make_monomial(1, 0.3, 0.3)), PreconditionError);
}

TEST_CASE("concave monge-ampere check") {
    GridSpec g{40, 40, Rect{0.2, 5, 0.2, 5}};
    CHECK(concave_ma_check(make_pl_family(0.5, PlCase::classic), {0.5, 0.5}, g).ok);
    CHECK(concave_ma_check(make_pl_family(1.5, PlCase::a_minus_b), {1.5, 0.5}, g).ok);
    CHECK_FALSE(concave_ma_check(make_pl_family(0.5, PlCase::classic), {1.0, 1.0}, g).ok);
    CHECK_FALSE(concave_ma_check(make_pl_family(0.5, PlCase::classic), {0.3, 0.7}, g).ok);
    CHECK_FALSE(concave_ma_check(make_pl_family(1.5, PlCase::a_minus_b), {0.5, 0.5}, g).ok);
    CHECK_THROWS_AS(concave_ma_check(make_minkowski(0.5, 0.5, 1.0), {0.5, 0.5}, g), PreconditionError);
}
