#include "ehrhard/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "ehrhard/errors.hpp"

namespace ehrhard {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kSqrt2 = std::numbers::sqrt2;

// Acklam's rational approximation of the lower quantile, p in (0, 0.5].
double acklam_lower(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double lower_quantile(double p) {
    double x = acklam_lower(p);
    for (int k = 0; k < 2; ++k) {
        double dens = normal_pdf(x);
        if (dens <= 0.0) break;
        x -= (normal_cdf(x) - p) / dens;
    }
    return x;
}

QuadratureRule build_hermite(int n) {
    // Physicists' rule by Newton on the orthonormal recurrence, then rescaled
    // to the standard normal weight.
    std::vector<double> x(n), w(n);
    const double pim4 = 0.7511255444649425;
    int m = (n + 1) / 2;
    double z = 0.0, pp = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(double(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];
        for (int it = 0; it < 200; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        r.nodes[n - 1 - i] = kSqrt2 * x[i];
        r.weights[n - 1 - i] = w[i] / std::sqrt(std::numbers::pi);
        total += r.weights[n - 1 - i];
    }
    for (auto& wi : r.weights) wi /= total;
    return r;
}

QuadratureRule build_legendre(int n) {
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-16) break;
        }
        r.nodes[i] = -z;
        r.nodes[n - 1 - i] = z;
        r.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        r.weights[n - 1 - i] = r.weights[i];
    }
    return r;
}

const QuadratureRule& cached_rule(std::map<int, QuadratureRule>& cache, std::mutex& mu, int n,
                                  QuadratureRule (*build)(int)) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build(n)).first;
    return it->second;
}

// Composite 16-point Gauss-Legendre of f over [lo, hi].
template <class F>
double composite_gl(const F& f, double lo, double hi, int panels) {
    const auto& gl = gauss_legendre(16);
    double h = (hi - lo) / panels, sum = 0.0;
    for (int k = 0; k < panels; ++k) {
        double mid = lo + (k + 0.5) * h, part = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i)
            part += gl.weights[i] * f(mid + 0.5 * h * gl.nodes[i]);
        sum += 0.5 * h * part;
    }
    return sum;
}

double checked(double v, double at) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite integrand sample at x=" << at;
        throw EvaluationError(os.str(), at);
    }
    return v;
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream os;
        os << "quantile argument outside (0,1): " << p;
        throw DomainError(os.str(), p);
    }
    if (p <= 0.5) return lower_quantile(p);
    return -lower_quantile(1.0 - p);
}

const QuadratureRule& gauss_hermite(int n) {
    static std::map<int, QuadratureRule> cache;
    static std::mutex mu;
    if (n < 1) throw ParameterError("Gauss-Hermite rule needs n >= 1");
    return cached_rule(cache, mu, n, &build_hermite);
}

const QuadratureRule& gauss_legendre(int n) {
    static std::map<int, QuadratureRule> cache;
    static std::mutex mu;
    if (n < 1) throw ParameterError("Gauss-Legendre rule needs n >= 1");
    return cached_rule(cache, mu, n, &build_legendre);
}

// ---------------------------------------------------------------- Measure

Measure Measure::standard(int dim) {
    if (dim != 1 && dim != 2) throw ParameterError("measure dimension must be 1 or 2");
    Measure m;
    m.kind_ = MeasureKind::standard_gaussian;
    m.dim_ = dim;
    return m;
}

double Measure::normalizing_constant(const std::vector<double>& A, const std::vector<double>& b) {
    if (A.size() == 1 && b.size() == 1) {
        if (!(A[0] > 0.0)) throw ParameterError("Gaussian matrix must be positive definite");
        return -b[0] * b[0] / (4.0 * A[0]) - 0.5 * std::log(std::numbers::pi / A[0]);
    }
    if (A.size() == 4 && b.size() == 2) {
        double det = A[0] * A[3] - A[1] * A[2];
        if (!(A[0] > 0.0 && det > 0.0)) throw ParameterError("Gaussian matrix must be positive definite");
        double i00 = A[3] / det, i01 = -A[1] / det, i11 = A[0] / det;
        double quad = b[0] * (i00 * b[0] + i01 * b[1]) + b[1] * (i01 * b[0] + i11 * b[1]);
        return -0.25 * quad - std::log(std::numbers::pi) + 0.5 * std::log(det);
    }
    throw ParameterError("Gaussian parameters must be 1x1/1 or 2x2/2");
}

Measure Measure::gaussian(std::vector<double> A, std::vector<double> b, double c) {
    Measure m;
    m.kind_ = MeasureKind::general_gaussian;
    m.dim_ = b.size() == 2 ? 2 : 1;
    m.A_ = std::move(A);
    m.b_ = std::move(b);
    m.c_ = c;
    m.setup_gaussian();
    return m;
}

Measure Measure::gaussian_normalized(std::vector<double> A, std::vector<double> b) {
    double c = normalizing_constant(A, b);
    return gaussian(std::move(A), std::move(b), c);
}

void Measure::setup_gaussian() {
    if (dim_ == 1) {
        if (A_.size() != 1 || b_.size() != 1) throw ParameterError("1-D Gaussian needs A 1x1 and b of size 1");
        if (!(A_[0] > 0.0)) throw ParameterError("Gaussian matrix must be positive definite");
        double var = 0.5 / A_[0];
        mean_ = {b_[0] * var, 0.0};
        cov_ = {var, 0.0, 0.0, 0.0};
        chol_ = {std::sqrt(var), 0.0, 0.0, 0.0};
    } else {
        if (A_.size() != 4) throw ParameterError("2-D Gaussian needs a 2x2 matrix");
        if (std::abs(A_[1] - A_[2]) > 1e-12 * (std::abs(A_[1]) + 1.0))
            throw ParameterError("Gaussian matrix must be symmetric");
        double det = A_[0] * A_[3] - A_[1] * A_[2];
        double tr = A_[0] + A_[3];
        double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
        if (!(0.5 * tr - disc > 0.0)) throw ParameterError("Gaussian matrix must be positive definite");
        double i00 = A_[3] / det, i01 = -A_[1] / det, i11 = A_[0] / det;
        cov_ = {0.5 * i00, 0.5 * i01, 0.5 * i01, 0.5 * i11};
        mean_ = {cov_[0] * b_[0] + cov_[1] * b_[1], cov_[2] * b_[0] + cov_[3] * b_[1]};
        double l00 = std::sqrt(cov_[0]);
        double l10 = cov_[2] / l00;
        double l11 = std::sqrt(cov_[3] - l10 * l10);
        chol_ = {l00, 0.0, l10, l11};
    }
    double log_mass = c_ - normalizing_constant(A_, b_);
    if (std::abs(std::expm1(log_mass)) > 1e-9) {
        std::ostringstream os;
        os << "Gaussian total mass " << std::exp(log_mass) << " differs from 1 by more than 1e-9";
        throw ParameterError(os.str());
    }
}

Measure Measure::from_potential(Fn1 V, Fn1 dV, Fn1 d2V, double support_lo, double support_hi) {
    if (!(support_hi > support_lo)) throw ParameterError("empty support interval");
    Measure m;
    m.kind_ = MeasureKind::density;
    m.dim_ = 1;
    m.V_ = std::make_shared<const Fn1>(std::move(V));
    m.dV_ = std::make_shared<const Fn1>(std::move(dV));
    m.d2V_ = std::make_shared<const Fn1>(std::move(d2V));
    m.sup_lo_ = support_lo;
    m.sup_hi_ = support_hi;
    m.setup_density();
    return m;
}

void Measure::setup_density() {
    const Fn1& V = *V_;
    double lo = std::max(sup_lo_, -80.0), hi = std::min(sup_hi_, 80.0);
    double vmin = 1e300;
    for (int k = 0; k <= 16000; ++k) {
        double x = lo + (hi - lo) * k / 16000.0;
        double v = V(x);
        if (std::isfinite(v)) vmin = std::min(vmin, v);
    }
    if (!std::isfinite(vmin)) throw ParameterError("potential is not finite on its support");
    v_ref_ = vmin;
    auto rel = [&](double x) { return std::exp(-(V(x) - v_ref_)); };

    // Smallest radius on each side where the unnormalized density is below 1e-17.
    auto radius = [&](double sign, double bound) {
        double t = 0.25;
        while (t < 80.0) {
            double x = sign * t;
            if ((sign > 0 && x >= bound) || (sign < 0 && x <= bound)) return bound;
            if (rel(x) < 1e-17) return x;
            t += 0.25;
        }
        return sign * 80.0;
    };
    t_hi_ = radius(1.0, sup_hi_);
    t_lo_ = radius(-1.0, sup_lo_);
    double z = composite_gl(rel, t_lo_, t_hi_, 400);
    log_z_ = std::log(z) - v_ref_;

    auto dens = [&](double x) { return std::exp(-V(x) - log_z_); };
    tail_mass_ = 0.0;
    tail_m5_ = 0.0;
    if (t_hi_ < sup_hi_) {
        double far = std::min(sup_hi_, 2.0 * std::abs(t_hi_) + 40.0);
        tail_mass_ += composite_gl(dens, t_hi_, far, 200);
        tail_m5_ += composite_gl([&](double x) { return std::pow(std::abs(x), 5) * dens(x); }, t_hi_, far, 200);
    }
    if (t_lo_ > sup_lo_) {
        double far = std::max(sup_lo_, -2.0 * std::abs(t_lo_) - 40.0);
        tail_mass_ += composite_gl(dens, far, t_lo_, 200);
        tail_m5_ += composite_gl([&](double x) { return std::pow(std::abs(x), 5) * dens(x); }, far, t_lo_, 200);
    }
    if (!(tail_mass_ < 1e-12) || !(tail_m5_ < 1e-8)) {
        std::ostringstream os;
        os << "density tail beyond truncation [" << t_lo_ << ", " << t_hi_ << "] too heavy: mass "
           << tail_mass_ << ", fifth moment " << tail_m5_;
        throw PrecisionError(os.str());
    }

    const int cells = 4096;
    cdf_step_ = (t_hi_ - t_lo_) / cells;
    auto table = std::make_shared<std::vector<double>>(cells + 1, 0.0);
    const auto& gl = gauss_legendre(16);
    for (int k = 0; k < cells; ++k) {
        double a0 = t_lo_ + k * cdf_step_, mid = a0 + 0.5 * cdf_step_, part = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i)
            part += gl.weights[i] * dens(mid + 0.5 * cdf_step_ * gl.nodes[i]);
        (*table)[k + 1] = (*table)[k] + 0.5 * cdf_step_ * part;
    }
    cdf_table_ = table;
}

double Measure::pdf(double x) const {
    switch (kind_) {
        case MeasureKind::standard_gaussian:
            return normal_pdf(x);
        case MeasureKind::general_gaussian: {
            double s = std::sqrt(cov_[0]);
            return normal_pdf((x - mean_[0]) / s) / s;
        }
        case MeasureKind::density:
            if (x < sup_lo_ || x > sup_hi_) return 0.0;
            return std::exp(-(*V_)(x) - log_z_);
    }
    return 0.0;
}

double Measure::cdf(double x) const {
    switch (kind_) {
        case MeasureKind::standard_gaussian:
            return normal_cdf(x);
        case MeasureKind::general_gaussian:
            return normal_cdf((x - mean_[0]) / std::sqrt(cov_[0]));
        case MeasureKind::density: {
            if (x <= t_lo_) return 0.0;
            if (x >= t_hi_) return 1.0;
            std::size_t k = std::min<std::size_t>(static_cast<std::size_t>((x - t_lo_) / cdf_step_),
                                                  cdf_table_->size() - 2);
            double a0 = t_lo_ + k * cdf_step_;
            const auto& gl = gauss_legendre(16);
            double h = x - a0, mid = a0 + 0.5 * h, part = 0.0;
            for (std::size_t i = 0; i < gl.nodes.size(); ++i)
                part += gl.weights[i] * pdf(mid + 0.5 * h * gl.nodes[i]);
            return std::clamp((*cdf_table_)[k] + 0.5 * h * part, 0.0, 1.0);
        }
    }
    return 0.0;
}

double Measure::mean(int axis) const { return mean_.at(axis); }

double Measure::stddev(int axis) const { return std::sqrt(cov_.at(axis == 0 ? 0 : 3)); }

double Measure::potential(double x) const {
    if (kind_ == MeasureKind::density) return (*V_)(x) + log_z_;
    double s2 = cov_[0];
    return 0.5 * (x - mean_[0]) * (x - mean_[0]) / s2 + 0.5 * std::log(2.0 * std::numbers::pi * s2);
}

double Measure::potential_d1(double x) const {
    if (kind_ == MeasureKind::density) return (*dV_)(x);
    return (x - mean_[0]) / cov_[0];
}

double Measure::potential_d2(double x) const {
    if (kind_ == MeasureKind::density) return (*d2V_)(x);
    return 1.0 / cov_[0];
}

// ---------------------------------------------------------------- integrate

namespace {

double integrate_once(const Fn1& f, const Measure& mu, int nodes) {
    if (mu.kind() == MeasureKind::density) {
        int panels = std::max(1, nodes / 16);
        return composite_gl([&](double x) { return checked(f(x), x) * mu.pdf(x); }, mu.truncation_lo(),
                            mu.truncation_hi(), panels);
    }
    const auto& gh = gauss_hermite(nodes);
    double m = mu.mean(0), s = mu.stddev(0), sum = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        double x = m + s * gh.nodes[i];
        sum += gh.weights[i] * checked(f(x), x);
    }
    return sum;
}

double integrate2_once(const Fn2& f, const Measure& mu, int nodes) {
    const auto& gh = gauss_hermite(nodes);
    double m0 = 0.0, m1 = 0.0, l00 = 1.0, l10 = 0.0, l11 = 1.0;
    if (mu.kind() == MeasureKind::general_gaussian) {
        const auto& c = mu.covariance();
        m0 = mu.mean(0);
        m1 = mu.mean(1);
        l00 = std::sqrt(c[0]);
        l10 = c[2] / l00;
        l11 = std::sqrt(c[3] - l10 * l10);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
            double x = m0 + l00 * gh.nodes[i];
            double y = m1 + l10 * gh.nodes[i] + l11 * gh.nodes[j];
            row += gh.weights[j] * checked(f(x, y), x);
        }
        sum += gh.weights[i] * row;
    }
    return sum;
}

}  // namespace

Quadrature integrate(const Fn1& f, const Measure& mu, int nodes) {
    if (nodes < 2) throw ParameterError("integrate needs at least 2 nodes");
    if (mu.dim() != 1) throw ParameterError("integrate expects a one-dimensional measure");
    double coarse = integrate_once(f, mu, nodes);
    double fine = integrate_once(f, mu, 2 * nodes);
    Quadrature q;
    q.value = fine;
    q.error = std::abs(fine - coarse);
    if (mu.kind() == MeasureKind::density)
        q.error += mu.tail_mass() * (std::abs(f(mu.truncation_lo())) + std::abs(f(mu.truncation_hi())));
    q.nodes = 2 * nodes;
    return q;
}

Quadrature integrate2(const Fn2& f, const Measure& mu, int nodes) {
    if (nodes < 2) throw ParameterError("integrate2 needs at least 2 nodes");
    if (mu.dim() != 2) throw ParameterError("integrate2 expects a two-dimensional measure");
    if (mu.kind() == MeasureKind::density) throw ParameterError("2-D density measures are not supported");
    double coarse = integrate2_once(f, mu, nodes);
    double fine = integrate2_once(f, mu, 2 * nodes);
    return {fine, std::abs(fine - coarse), 2 * nodes};
}

std::pair<double, double> mean_and_second_moment(const Measure& mu) {
    if (mu.dim() != 1) throw ParameterError("moments are defined here for 1-D measures");
    if (mu.kind() != MeasureKind::density) {
        double m = mu.mean(0), s = mu.stddev(0);
        return {m, s * s + m * m};
    }
    if (!(mu.tail_fifth_moment() < 1e-8)) throw PrecisionError("density tail not integrable at truncation radius");
    auto q1 = integrate([](double x) { return x; }, mu, 512);
    auto q2 = integrate([](double x) { return x * x; }, mu, 512);
    if (q1.error > 1e-9 || q2.error > 1e-9) {
        std::ostringstream os;
        os << "moment quadrature did not settle: errors " << q1.error << ", " << q2.error;
        throw PrecisionError(os.str());
    }
    return {q1.value, q2.value};
}

}  // namespace ehrhard
