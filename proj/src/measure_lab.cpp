#include "ehrhard/measure_lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ehrhard/errors.hpp"
#include "ehrhard/parallel.hpp"

namespace ehrhard {

Potential gaussian_potential(double mean, double variance) {
    if (!(variance > 0.0)) throw ParameterError("variance must be positive");
    Potential p;
    std::ostringstream os;
    os << "gaussian:mean=" << mean << ",var=" << variance;
    p.label = os.str();
    p.V = [=](double x) { return 0.5 * (x - mean) * (x - mean) / variance; };
    p.dV = [=](double x) { return (x - mean) / variance; };
    p.d2V = [=](double) { return 1.0 / variance; };
    return p;
}

Potential quartic_potential() {
    Potential p;
    p.label = "quartic";
    p.V = [](double x) { return 0.25 * x * x * x * x; };
    p.dV = [](double x) { return x * x * x; };
    p.d2V = [](double x) { return 3.0 * x * x; };
    return p;
}

Potential softplus_blend_potential(double s) {
    if (!(s > 0.0)) throw ParameterError("blend width must be positive");
    Potential p;
    std::ostringstream os;
    os << "blend:s=" << s;
    p.label = os.str();
    p.V = [s](double x) {
        double r = std::sqrt(x * x + s * s);
        return 0.75 * x * x + 0.25 * (x * r + s * s * std::asinh(x / s));
    };
    p.dV = [s](double x) { return 1.5 * x + 0.5 * std::sqrt(x * x + s * s); };
    p.d2V = [s](double x) { return 1.5 + 0.5 * x / std::sqrt(x * x + s * s); };
    return p;
}

Potential near_gaussian_potential(double amp) {
    Potential p;
    std::ostringstream os;
    os << "near_gaussian:amp=" << amp;
    p.label = os.str();
    p.V = [amp](double x) { return 0.5 * x * x + amp * std::cos(x); };
    p.dV = [amp](double x) { return x - amp * std::sin(x); };
    p.d2V = [amp](double x) { return 1.0 - amp * std::cos(x); };
    return p;
}

Potential potential_by_name(const std::string& name) {
    if (name == "gaussian") return gaussian_potential();
    if (name == "quartic") return quartic_potential();
    if (name == "blend") return softplus_blend_potential();
    if (name == "near_gaussian") return near_gaussian_potential();
    throw ParameterError("unknown potential '" + name + "' (expected gaussian, quartic, blend or near_gaussian)");
}

Measure to_measure(const Potential& pot) { return Measure::from_potential(pot.V, pot.dV, pot.d2V, pot.lo, pot.hi); }

PotentialCheck validate_potential(const Potential& pot) {
    Measure mu = to_measure(pot);
    PotentialCheck c;
    c.log_normalizer = mu.log_normalizer();
    c.mass_error = std::abs(integrate([](double) { return 1.0; }, mu, 256).value - 1.0);
    double lo = std::max(mu.truncation_lo(), pot.lo), hi = std::min(mu.truncation_hi(), pot.hi);
    const double h = 1e-5;
    for (int i = 1; i < 200; ++i) {
        double x = lo + (hi - lo) * i / 200.0;
        double fd = (pot.dV(x + h) - pot.dV(x - h)) / (2.0 * h);
        double an = pot.d2V(x);
        double rel = std::abs(fd - an) / std::max(1.0, std::abs(an));
        c.derivative_error = std::max(c.derivative_error, rel);
    }
    c.ok = c.mass_error <= 1e-8 && c.derivative_error <= 1e-5;
    return c;
}

namespace {

void in_support(const Potential& pot, double x) {
    if (x < pot.lo || x > pot.hi) {
        std::ostringstream os;
        os << "point " << x << " outside the support of " << pot.label;
        throw DomainError(os.str(), x);
    }
}

}  // namespace

double subadditive_margin(const Potential& pot, Weights w, double x, double y) {
    double z = w.a * x + w.b * y;
    in_support(pot, x);
    in_support(pot, y);
    in_support(pot, z);
    return w.a * pot.dV(x) + w.b * pot.dV(y) - pot.dV(z);
}

SubadditivityReport vprime_subadditive(const Potential& pot, Weights w, const Grid2Spec& grid, int threads) {
    if (grid.n < 2) throw ParameterError("grid needs at least two nodes");
    const int n = grid.n;
    std::vector<double> rmin(n), rmax_abs(n), rscale(n);
    std::vector<int> rarg(n);
    parallel_chunks(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double x = grid.node(int(i));
            double mn = INFINITY, mx = 0.0, sc = 0.0;
            int arg = 0;
            for (int k = 0; k < n; ++k) {
                double y = grid.node(k);
                double m = subadditive_margin(pot, w, x, y);
                sc = std::max({sc, std::abs(pot.dV(x)), std::abs(pot.dV(y))});
                mx = std::max(mx, std::abs(m));
                if (m < mn) {
                    mn = m;
                    arg = k;
                }
            }
            rmin[i] = mn;
            rmax_abs[i] = mx;
            rscale[i] = sc;
            rarg[i] = arg;
        }
    });
    SubadditivityReport r;
    r.worst_margin = INFINITY;
    r.scale = 1.0;
    for (int i = 0; i < n; ++i) {
        r.scale = std::max(r.scale, rscale[i]);
        r.max_abs_margin = std::max(r.max_abs_margin, rmax_abs[i]);
        if (rmin[i] < r.worst_margin) {
            r.worst_margin = rmin[i];
            r.witness_x = grid.node(i);
            r.witness_y = grid.node(rarg[i]);
        }
    }
    r.samples = static_cast<long>(n) * n;
    r.pass = r.worst_margin >= -1e-9 * r.scale;
    return r;
}

ConvexityReport vprime_convexity_and_slopes(const Potential& pot, double radius) {
    if (!(radius > 0.0)) throw ParameterError("radius must be positive");
    in_support(pot, -radius);
    in_support(pot, radius);
    ConvexityReport r;
    const int N = 2001;
    const double h = 2.0 * radius / (N - 1);
    double scale = 1.0;
    for (int i = 0; i < N; ++i) scale = std::max(scale, std::abs(pot.d2V(-radius + h * i)) / radius);
    r.min_second_difference = INFINITY;
    for (int i = 1; i < N - 1; ++i) {
        double x = -radius + h * i;
        double d = (pot.dV(x + h) - 2.0 * pot.dV(x) + pot.dV(x - h)) / (h * h);
        if (d < r.min_second_difference) {
            r.min_second_difference = d;
            r.witness = x;
        }
    }
    r.convex = r.min_second_difference >= -1e-8 * scale;
    if (!r.convex) return r;

    auto window = [&](double from, double to) {
        const int m = 101;
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            double x = from + (to - from) * i / (m - 1);
            acc += pot.dV(x) / x;
        }
        return acc / m;
    };
    double p8 = window(0.8 * radius, radius), p9 = window(0.9 * radius, radius);
    double m8 = window(-radius, -0.8 * radius), m9 = window(-radius, -0.9 * radius);
    if (std::abs(p8 - p9) > 1e-3 || std::abs(m8 - m9) > 1e-3) {
        std::ostringstream os;
        os << "slope windows disagree (right " << p8 << " vs " << p9 << ", left " << m8 << " vs " << m9
           << "); asymptote not reached at radius " << radius;
        throw PreconditionError(os.str());
    }
    r.c_plus = p9;
    r.c_minus = m9;
    r.admissible = *r.c_minus > 0.0 && *r.c_minus <= *r.c_plus;
    return r;
}

RigidityReport even_rigidity_check(const Potential& pot, Weights, const Grid2Spec& grid) {
    for (int i = 0; i < grid.n; ++i) {
        double x = grid.node(i);
        double d = std::abs(pot.V(x) - pot.V(-x));
        if (d > 1e-9 * std::max(1.0, std::abs(pot.V(x)))) {
            std::ostringstream os;
            os << "potential is not even: |V(" << x << ") - V(" << -x << ")| = " << d;
            throw PreconditionError(os.str());
        }
    }
    RigidityReport r;
    double base = pot.d2V(0.0);
    for (int i = 0; i < grid.n; ++i) {
        double x = grid.node(i);
        double d = std::abs(pot.d2V(x) - base);
        if (d > r.deviation) {
            r.deviation = d;
            r.witness = x;
        }
    }
    return r;
}

double isoperimetric_profile(const Measure& mu, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("isoperimetric profile needs p in (0,1)", p);
    if (mu.dim() != 1) throw ParameterError("isoperimetric profile needs a one-dimensional measure");
    if (mu.kind() != MeasureKind::density) {
        double s = mu.stddev();
        return normal_pdf(normal_quantile(p)) / s;
    }
    double lo = mu.truncation_lo(), hi = mu.truncation_hi();
    if (p <= mu.cdf(lo)) return mu.pdf(lo);
    if (p >= mu.cdf(hi)) return mu.pdf(hi);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        (mu.cdf(mid) < p ? lo : hi) = mid;
    }
    return mu.pdf(0.5 * (lo + hi));
}

EpigraphReport epigraph_rays(const Potential& pot, const Grid2Spec& grid) {
    EpigraphReport r;
    r.worst_margin = INFINITY;
    for (int i = 0; i < grid.n; ++i) {
        double x = grid.node(i);
        for (double s : {1.0, 1.5, 2.0}) {
            in_support(pot, s * x);
            double m = s * pot.dV(x) - pot.dV(s * x);
            if (m < r.worst_margin) {
                r.worst_margin = m;
                r.witness_x = x;
                r.witness_s = s;
            }
        }
    }
    double scale = 1.0;
    for (int i = 0; i < grid.n; ++i) scale = std::max(scale, std::abs(pot.dV(2.0 * grid.node(i))));
    r.pass = r.worst_margin >= -1e-9 * scale;
    return r;
}

std::vector<Weights> audit_weight_set() {
    std::vector<Weights> ws;
    for (int i = 1; i <= 9; ++i) ws.push_back({0.1 * i, 1.0 - 0.1 * i});
    ws.push_back({1.0, 1.0});
    ws.push_back({1.5, 0.6});
    return ws;
}

AuditReport audit_measure(const Potential& pot, const Grid2Spec& grid, double radius, int threads) {
    AuditReport r;
    r.label = pot.label;
    r.potential = validate_potential(pot);
    Measure mu = to_measure(pot);
    auto [tau, beta] = mean_and_second_moment(mu);
    r.mean = tau;
    r.second_moment = beta;
    for (const Weights& w : audit_weight_set()) {
        SubadditivityReport s = vprime_subadditive(pot, w, grid, threads);
        r.subadditive_all = r.subadditive_all && s.pass;
        r.subadditivity.emplace_back(w, s);
        if (w.a + w.b > 1.0 + 1e-12 && std::abs(tau) > 1e-8) r.mean_zero = false;
    }
    try {
        r.convexity = vprime_convexity_and_slopes(pot, radius);
    } catch (const PreconditionError& e) {
        r.convexity_error = e.what();
    }
    try {
        r.rigidity = even_rigidity_check(pot, Weights{0.5, 0.5}, grid);
    } catch (const PreconditionError&) {
    }
    r.epigraph = epigraph_rays(pot, grid);
    r.pass = r.potential.ok && r.subadditive_all && r.convexity && r.convexity->admissible && r.epigraph.pass &&
             r.mean_zero;
    return r;
}

}  // namespace ehrhard
