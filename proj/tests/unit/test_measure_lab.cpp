#include <cmath>

#include "doctest.h"
#include "ehrhard/errors.hpp"
#include "ehrhard/measure_lab.hpp"

using namespace ehrhard;

TEST_CASE("potential normalization") {
    for (const char* name : {"gaussian", "quartic", "blend", "near_gaussian"}) {
        Potential p = potential_by_name(name);
        PotentialCheck c = validate_potential(p);
        INFO(name);
        CHECK(c.ok);
        CHECK(c.mass_error < 1e-8);
        CHECK(c.derivative_error < 1e-5);
    }
    CHECK(validate_potential(gaussian_potential()).log_normalizer ==
          doctest::Approx(0.5 * std::log(2 * M_PI)).epsilon(1e-10));
    CHECK_THROWS_AS(potential_by_name("cauchy"), ParameterError);
}

TEST_CASE("subadditivity of the derivative") {
    for (Weights w : {Weights{0.5, 0.5}, Weights{0.2, 0.8}}) {
        SubadditivityReport g = vprime_subadditive(gaussian_potential(), w);
        CHECK(g.pass);
        CHECK(g.max_abs_margin <= 1e-12);
        SubadditivityReport s = vprime_subadditive(gaussian_potential(1.3, 1.0), w);
        CHECK(s.pass);
    }
    CHECK(subadditive_margin(quartic_potential(), {0.5, 0.5}, -2, 0) == doctest::Approx(-3.0));
    SubadditivityReport q = vprime_subadditive(quartic_potential(), {0.5, 0.5});
    CHECK_FALSE(q.pass);
    CHECK(q.worst_margin < 0.0);
}

TEST_CASE("convexity of the derivative and slopes") {
    ConvexityReport g = vprime_convexity_and_slopes(gaussian_potential());
    CHECK(g.convex);
    CHECK(g.admissible);
    CHECK(*g.c_minus == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*g.c_plus == doctest::Approx(1.0).epsilon(1e-12));
    ConvexityReport b = vprime_convexity_and_slopes(softplus_blend_potential());
    CHECK(b.convex);
    CHECK(std::abs(*b.c_minus - 1.0) < 1e-3);
    CHECK(std::abs(*b.c_plus - 2.0) < 1e-3);
    ConvexityReport q = vprime_convexity_and_slopes(quartic_potential());
    CHECK_FALSE(q.convex);
    CHECK(q.witness < 0.0);
    CHECK_FALSE(q.c_plus.has_value());
}

TEST_CASE("rigidity of even potentials") {
    CHECK(even_rigidity_check(gaussian_potential(), {0.5, 0.5}).deviation <= 1e-10);
    RigidityReport q = even_rigidity_check(quartic_potential(), {0.5, 0.5});
    CHECK(q.deviation == doctest::Approx(3.0 * 25.0));
    RigidityReport n = even_rigidity_check(near_gaussian_potential(1e-3), {0.5, 0.5});
    CHECK(std::abs(n.deviation - 2e-3) < 1e-5);
    CHECK_THROWS_AS(even_rigidity_check(gaussian_potential(1.0, 1.0), {0.5, 0.5}), PreconditionError);
}

TEST_CASE("isoperimetric profile") {
    Measure g = Measure::standard(1);
    CHECK(isoperimetric_profile(g, 0.5) == doctest::Approx(0.3989423).epsilon(1e-7));
    Measure q = to_measure(quartic_potential());
    Measure gd = to_measure(gaussian_potential());
    CHECK(isoperimetric_profile(gd, 0.5) == doctest::Approx(0.3989422804).epsilon(1e-8));
    for (int k = 1; k <= 9; ++k) {
        double p = 0.1 * k;
        CHECK(isoperimetric_profile(q, p) == doctest::Approx(isoperimetric_profile(q, 1 - p)).epsilon(1e-8));
        CHECK(isoperimetric_profile(g, p) == doctest::Approx(isoperimetric_profile(g, 1 - p)).epsilon(1e-12));
    }
    CHECK(isoperimetric_profile(q, 1e-4) < isoperimetric_profile(q, 1e-3));
    CHECK(isoperimetric_profile(g, 1e-4) < isoperimetric_profile(g, 1e-3));
    CHECK_THROWS_AS(isoperimetric_profile(g, 1.0), DomainError);
}

TEST_CASE("measure audit") {
    AuditReport g = audit_measure(gaussian_potential());
    CHECK(g.pass);
    CHECK(g.mean_zero);
    AuditReport q = audit_measure(quartic_potential());
    CHECK_FALSE(q.pass);
    CHECK_FALSE(q.subadditive_all);
    AuditReport s = audit_measure(gaussian_potential(1.0, 1.0));
    CHECK_FALSE(s.mean_zero);
    CHECK_FALSE(s.rigidity.has_value());
}
