#pragma once

#include <array>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace ehrhard {

double normal_pdf(double x);
double normal_cdf(double x);
// Upper tail 1 - cdf(x) without cancellation.
double normal_sf(double x);
// Throws DomainError for p outside (0,1).
double normal_quantile(double p);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Probabilists' Gauss-Hermite rule: sum w_i f(x_i) ~ E f(Z), Z ~ N(0,1).
// Rules are cached; the returned reference stays valid for the program.
const QuadratureRule& gauss_hermite(int n);
// Gauss-Legendre on [-1, 1].
const QuadratureRule& gauss_legendre(int n);

struct Quadrature {
    double value = 0.0;
    double error = 0.0;
    int nodes = 0;
};

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

enum class MeasureKind { standard_gaussian, general_gaussian, density };

// Probability measure on R or R^2.
//  - standard_gaussian: product of N(0,1).
//  - general_gaussian: density exp(-x A x^T + b x^T + c).
//  - density: exp(-V) on R, normalized internally.
class Measure {
public:
    static Measure standard(int dim = 1);
    // A is row-major dim x dim. Throws ParameterError when A is not positive
    // definite or the total mass is off by more than 1e-9.
    static Measure gaussian(std::vector<double> A, std::vector<double> b, double c);
    // Same, with c chosen so that the mass is exactly one.
    static Measure gaussian_normalized(std::vector<double> A, std::vector<double> b);
    static double normalizing_constant(const std::vector<double>& A, const std::vector<double>& b);
    static Measure from_potential(Fn1 V, Fn1 dV, Fn1 d2V, double support_lo = -1e300,
                                  double support_hi = 1e300);

    MeasureKind kind() const { return kind_; }
    int dim() const { return dim_; }

    // One-dimensional density, distribution function and tail bounds.
    double pdf(double x) const;
    double cdf(double x) const;
    double mean(int axis = 0) const;
    double stddev(int axis = 0) const;

    // Gaussian kinds: covariance row-major.
    const std::array<double, 4>& covariance() const { return cov_; }

    // Density kind.
    double potential(double x) const;
    double potential_d1(double x) const;
    double potential_d2(double x) const;
    double log_normalizer() const { return log_z_; }
    double truncation_lo() const { return t_lo_; }
    double truncation_hi() const { return t_hi_; }
    double tail_mass() const { return tail_mass_; }
    double tail_fifth_moment() const { return tail_m5_; }
    double support_lo() const { return sup_lo_; }
    double support_hi() const { return sup_hi_; }

    const std::vector<double>& matrix() const { return A_; }
    const std::vector<double>& linear() const { return b_; }
    double constant() const { return c_; }

private:
    Measure() = default;
    void setup_gaussian();
    void setup_density();

    MeasureKind kind_ = MeasureKind::standard_gaussian;
    int dim_ = 1;
    std::vector<double> A_, b_;
    double c_ = 0.0;
    std::array<double, 2> mean_{0.0, 0.0};
    std::array<double, 4> cov_{1.0, 0.0, 0.0, 1.0};
    std::array<double, 4> chol_{1.0, 0.0, 0.0, 1.0};

    std::shared_ptr<const Fn1> V_, dV_, d2V_;
    double sup_lo_ = -1e300, sup_hi_ = 1e300;
    double log_z_ = 0.0, v_ref_ = 0.0;
    double t_lo_ = 0.0, t_hi_ = 0.0;
    double tail_mass_ = 0.0, tail_m5_ = 0.0;
    std::shared_ptr<const std::vector<double>> cdf_table_;
    double cdf_step_ = 0.0;
};

// E_mu f with an error estimate from doubling the node count. Gaussian kinds
// use Gauss-Hermite, densities use composite Gauss-Legendre on the
// truncation interval. Throws EvaluationError on a non-finite sample.
Quadrature integrate(const Fn1& f, const Measure& mu, int nodes = 64);
Quadrature integrate2(const Fn2& f, const Measure& mu, int nodes = 48);

// (tau, beta) = (int x dmu, int x^2 dmu) for a one-dimensional measure.
std::pair<double, double> mean_and_second_moment(const Measure& mu);

}  // namespace ehrhard
