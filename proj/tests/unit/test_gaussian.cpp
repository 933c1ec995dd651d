#include <cmath>

#include "doctest.h"
#include "ehrhard/errors.hpp"
#include "ehrhard/gaussian.hpp"

using namespace ehrhard;

namespace {

// Maclaurin series of erf in long double; converges fast for |x| < 3.
long double erf_series(long double x) {
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        long double add = term / (2 * n + 1);
        sum += add;
        if (std::fabs(add) < 1e-22L) break;
    }
    return sum * 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
}

double cdf_oracle(double x) { return static_cast<double>(0.5L + 0.5L * erf_series(x / std::sqrt(2.0L))); }

}  // namespace

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(2.0) == doctest::Approx(1.0 - normal_cdf(-2.0)).epsilon(1e-15));
    CHECK(std::abs(normal_cdf(1.959964) - 0.975) < 1e-6);
    for (double x = -2.9; x < 3.0; x += 0.37) CHECK(std::abs(normal_cdf(x) - cdf_oracle(x)) < 1e-14);
    CHECK(normal_sf(10.0) > 0.0);
    CHECK(normal_sf(10.0) == doctest::Approx(normal_cdf(-10.0)).epsilon(1e-12));
}

TEST_CASE("normal quantile") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(std::abs(normal_quantile(normal_cdf(1.3)) - 1.3) < 1e-11);
    // Newton refinement against the cdf oracle
    double z = 1.96;
    for (int k = 0; k < 20; ++k) z -= (cdf_oracle(z) - 0.975) / normal_pdf(z);
    CHECK(std::abs(normal_quantile(0.975) - z) < 1e-6);
    CHECK(std::abs(normal_quantile(0.975) - 1.959964) < 1e-6);
    for (double p : {1e-300, 1e-20, 1e-5, 0.3, 0.9999}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
    CHECK_THROWS_AS(normal_quantile(-0.1), DomainError);
}

TEST_CASE("gaussian moments") {
    Measure mu = Measure::standard(1);
    CHECK(std::abs(integrate([](double) { return 1.0; }, mu).value - 1.0) < 1e-12);
    CHECK(std::abs(integrate([](double x) { return x * x; }, mu).value - 1.0) < 1e-10);
    CHECK(std::abs(integrate([](double x) { return x * x * x * x; }, mu).value - 3.0) < 1e-9);
    // (2k-1)!! for k = 3
    CHECK(std::abs(integrate([](double x) { return std::pow(x, 6); }, mu).value - 15.0) < 1e-8);
    auto [tau, beta] = mean_and_second_moment(mu);
    CHECK(std::abs(tau) < 1e-14);
    CHECK(std::abs(beta - 1.0) < 1e-12);
}

TEST_CASE("general gaussian") {
    // exp(-x^2/2 + x + c): completing the square gives mean 1
    Measure mu = Measure::gaussian_normalized({0.5}, {1.0});
    CHECK(std::abs(mu.mean() - 1.0) < 1e-12);
    CHECK(std::abs(mu.stddev() - 1.0) < 1e-12);
    CHECK(std::abs(integrate([](double) { return 1.0; }, mu).value - 1.0) < 1e-9);
    CHECK_THROWS_AS(Measure::gaussian({-1.0}, {0.0}, 0.0), ParameterError);

    Measure mu2 = Measure::standard(2);
    CHECK(std::abs(integrate2([](double x, double y) { return x * x + y * y; }, mu2).value - 2.0) < 1e-10);
}

TEST_CASE("density measure") {
    Measure mu = Measure::from_potential([](double x) { return x * x * x * x / 4.0; },
                                         [](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; });
    CHECK(std::abs(integrate([](double) { return 1.0; }, mu).value - 1.0) < 1e-9);
    CHECK(std::abs(mu.mean()) < 1e-12);
    // E x^4 = 1 under exp(-x^4/4) by integration by parts
    CHECK(std::abs(integrate([](double x) { return x * x * x * x; }, mu).value - 1.0) < 1e-8);
    CHECK(mu.tail_mass() < 1e-8);
}
