#include "ehrhard/supconv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "ehrhard/errors.hpp"
#include "ehrhard/parallel.hpp"

namespace ehrhard {

std::vector<double> Grid1D::nodes() const {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = node(i);
    return out;
}

namespace {

void check_grid(const Grid1D& g) {
    if (g.n < 2 || !(g.hi > g.lo)) throw ParameterError("grid needs n >= 2 and hi > lo");
}

double interp(const Grid1D& g, const std::vector<double>& v, double x) {
    if (x <= g.lo) return v.front();
    if (x >= g.hi) return v.back();
    double s = (x - g.lo) / g.step();
    int i = static_cast<int>(s);
    if (i >= g.n - 1) return v.back();
    double t = s - i;
    return v[i] + t * (v[i + 1] - v[i]);
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

GridFunction::GridFunction(Grid1D grid, std::vector<double> values, double range_lo, double range_hi)
    : grid_(grid), values_(std::move(values)), range_lo_(range_lo), range_hi_(range_hi) {
    check_grid(grid_);
    if (static_cast<int>(values_.size()) != grid_.n) throw ParameterError("value count does not match the grid");
    if (!(range_lo_ <= range_hi_)) throw ParameterError("empty declared range");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        double v = values_[i];
        if (!(v >= range_lo_ && v <= range_hi_))
            throw ParameterError("value " + num(v) + " at node " + std::to_string(i) + " outside declared range [" +
                                 num(range_lo_) + ", " + num(range_hi_) + "]");
    }
}

GridFunction::GridFunction(Grid1D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    check_grid(grid_);
    if (static_cast<int>(values_.size()) != grid_.n) throw ParameterError("value count does not match the grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw ParameterError("grid function values must be finite");
    auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    range_lo_ = *lo;
    range_hi_ = *hi;
}

GridFunction GridFunction::sample(const Fn1& f, Grid1D grid) {
    check_grid(grid);
    std::vector<double> v(grid.n);
    for (int i = 0; i < grid.n; ++i) v[i] = f(grid.node(i));
    return GridFunction(grid, std::move(v));
}

GridFunction GridFunction::constant(double c, Grid1D grid) {
    return GridFunction(grid, std::vector<double>(grid.n, c), c, c);
}

double GridFunction::operator()(double x) const { return interp(grid_, values_, x); }

void GridFunction::write_csv(std::ostream& os) const {
    os << "node,value\n";
    os.precision(17);
    for (int i = 0; i < grid_.n; ++i) os << grid_.node(i) << ',' << values_[i] << '\n';
}

GridFunction GridFunction::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("node,value", 0) != 0)
        throw ParameterError("grid CSV must start with the header node,value");
    std::vector<double> xs, vs;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw ParameterError("malformed CSV row: " + line);
        try {
            xs.push_back(std::stod(line.substr(0, comma)));
            vs.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ParameterError("malformed CSV row: " + line);
        }
    }
    if (xs.size() < 2) throw ParameterError("grid CSV needs at least two rows");
    Grid1D g{xs.front(), xs.back(), static_cast<int>(xs.size())};
    for (int i = 0; i < g.n; ++i)
        if (std::abs(xs[i] - g.node(i)) > 1e-9 * std::max(1.0, std::abs(g.hi - g.lo)))
            throw ParameterError("grid CSV nodes are not uniformly spaced");
    return GridFunction(g, std::move(vs));
}

GridFunction2D::GridFunction2D(Grid1D g1, Grid1D g2, std::vector<double> values)
    : g1_(g1), g2_(g2), values_(std::move(values)) {
    check_grid(g1_);
    check_grid(g2_);
    if (values_.size() != static_cast<std::size_t>(g1_.n) * g2_.n)
        throw ParameterError("value count does not match the 2-D grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw ParameterError("grid function values must be finite");
    auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    range_lo_ = *lo;
    range_hi_ = *hi;
}

GridFunction2D GridFunction2D::sample(const Fn2& f, Grid1D g1, Grid1D g2) {
    std::vector<double> v(static_cast<std::size_t>(g1.n) * g2.n);
    for (int i = 0; i < g1.n; ++i)
        for (int k = 0; k < g2.n; ++k) v[static_cast<std::size_t>(i) * g2.n + k] = f(g1.node(i), g2.node(k));
    return GridFunction2D(g1, g2, std::move(v));
}

GridFunction GridFunction2D::slice(int k) const {
    std::vector<double> v(g1_.n);
    for (int i = 0; i < g1_.n; ++i) v[i] = at(i, k);
    return GridFunction(g1_, std::move(v));
}

// ---------------------------------------------------------------- sup-convolution

namespace {

void check_ranges(const Surface& H, const GridFunction& f, const GridFunction& g) {
    const Rect& d = H.domain();
    if (f.range_lo() < d.x0 || f.range_hi() > d.x1)
        throw PreconditionError("range of f [" + num(f.range_lo()) + ", " + num(f.range_hi()) +
                                "] leaves the first side of the domain of " + H.label());
    if (g.range_lo() < d.y0 || g.range_hi() > d.y1)
        throw PreconditionError("range of g [" + num(g.range_lo()) + ", " + num(g.range_hi()) +
                                "] leaves the second side of the domain of " + H.label());
}

}  // namespace

SupConvResult sup_convolve(const Surface& H, const GridFunction& f, const GridFunction& g, Weights w,
                           const SupConvOptions& opt) {
    if (!(w.a > 0.0 && w.b > 0.0)) throw ParameterError("weights must be positive");
    check_ranges(H, f, g);
    const Grid1D tg = opt.t_grid.value_or(f.grid());
    check_grid(tg);
    const Grid1D& fg = f.grid();
    const Grid1D& gg = g.grid();
    const std::vector<double>& fv = f.values();
    const std::vector<double>& gv = g.values();
    const double a = w.a, b = w.b;

    std::vector<double> h(tg.n), arg(tg.n);
    std::vector<char> missed(tg.n, 0);
    parallel_chunks(tg.n, opt.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            double t = tg.node(int(j));
            double best = -std::numeric_limits<double>::infinity();
            int bi = 0;
            for (int i = 0; i < fg.n; ++i) {
                double x = fg.node(i);
                double v = H(fv[i], interp(gg, gv, (t - a * x) / b));
                if (!std::isfinite(v)) throw EvaluationError("non-finite surface value on the sup line", t);
                if (v > best) {
                    best = v;
                    bi = i;
                }
            }
            double bx = fg.node(bi);
            if (opt.refine && fg.n > 2) {
                auto obj = [&](double x) { return H(f(x), interp(gg, gv, (t - a * x) / b)); };
                double l = fg.node(std::max(0, bi - 1)), r = fg.node(std::min(fg.n - 1, bi + 1));
                const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
                double c = r - ratio * (r - l), d = l + ratio * (r - l);
                double fc = obj(c), fd = obj(d);
                for (int it = 0; it < 60 && r - l > 1e-13 * std::max(1.0, std::abs(bx)); ++it) {
                    if (fc >= fd) {
                        r = d;
                        d = c;
                        fd = fc;
                        c = r - ratio * (r - l);
                        fc = obj(c);
                    } else {
                        l = c;
                        c = d;
                        fc = fd;
                        d = l + ratio * (r - l);
                        fd = obj(d);
                    }
                }
                double xm = fc >= fd ? c : d, vm = std::max(fc, fd);
                if (vm > best) {
                    best = vm;
                    bx = xm;
                }
            }
            h[j] = best;
            arg[j] = bx;
            double y_hi = (t - a * fg.lo) / b, y_lo = (t - a * fg.hi) / b;
            missed[j] = (y_hi < gg.lo || y_lo > gg.hi) ? 1 : 0;
        }
    });
    SupConvResult out;
    out.h = GridFunction(tg, std::move(h));
    out.argmax = std::move(arg);
    for (char m : missed) out.extrapolated += m;
    return out;
}

// ---------------------------------------------------------------- integrals

Quadrature integrate_grid(const GridFunction& h, const Measure& mu) {
    if (mu.dim() != 1) throw ParameterError("grid integrals need a one-dimensional measure");
    const Grid1D& g = h.grid();
    const std::vector<double>& v = h.values();
    const int n = g.n;
    const double dx = g.step();
    std::vector<double> simpson(n, 0.0), trap(n, 0.0);
    int last = (n % 2 == 1) ? n - 1 : n - 2;
    for (int i = 0; i <= last; ++i) simpson[i] = (i == 0 || i == last) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (int i = 0; i <= last; ++i) simpson[i] *= dx / 3.0;
    if (last != n - 1) {
        simpson[n - 2] += 0.5 * dx;
        simpson[n - 1] += 0.5 * dx;
    }
    for (int i = 0; i < n; ++i) trap[i] = (i == 0 || i == n - 1) ? 0.5 * dx : dx;

    const double left = mu.cdf(g.lo), right = 1.0 - mu.cdf(g.hi);
    // Centered sums make constants integrate exactly.
    const double ref = v[0];
    auto total = [&](const std::vector<double>& q) {
        double mass = left + right, acc = right * (v[n - 1] - ref);
        for (int i = 0; i < n; ++i) {
            double wi = q[i] * mu.pdf(g.node(i));
            mass += wi;
            acc += wi * (v[i] - ref);
        }
        return ref + acc / mass;
    };
    Quadrature out;
    out.value = total(simpson);
    out.error = std::abs(out.value - total(trap));
    out.nodes = n;
    return out;
}

namespace {

Grid1D default_t_grid(const GridFunction& f, const Measure& mu) {
    double lo, hi;
    if (mu.kind() == MeasureKind::density) {
        lo = mu.truncation_lo();
        hi = mu.truncation_hi();
    } else {
        lo = mu.mean() - 8.0 * mu.stddev();
        hi = mu.mean() + 8.0 * mu.stddev();
    }
    const Grid1D& fg = f.grid();
    if (fg.lo <= lo && fg.hi >= hi) return fg;
    return Grid1D{lo, hi, fg.n};
}

}  // namespace

GapResult inequality_gap(const Surface& H, const GridFunction& f, const GridFunction& g, Weights w,
                         const Measure& mu, const SupConvOptions& opt) {
    if (mu.dim() != 1) throw ParameterError("inequality_gap needs a one-dimensional measure");
    check_ranges(H, f, g);
    Quadrature qf = integrate_grid(f, mu), qg = integrate_grid(g, mu);
    const Rect& d = H.domain();
    if (qf.value < d.x0 || qf.value > d.x1)
        throw DomainError("mean of f " + num(qf.value) + " (mean of g " + num(qg.value) + ") outside the domain of " +
                              H.label(),
                          qf.value);
    if (qg.value < d.y0 || qg.value > d.y1)
        throw DomainError("mean of g " + num(qg.value) + " (mean of f " + num(qf.value) + ") outside the domain of " +
                              H.label(),
                          qg.value);
    SupConvOptions o = opt;
    if (!o.t_grid) o.t_grid = default_t_grid(f, mu);
    SupConvResult sc = sup_convolve(H, f, g, w, o);
    Quadrature ql = integrate_grid(sc.h, mu);
    Jet j = H.jet(qf.value, qg.value);

    GapResult r;
    r.lhs = ql.value;
    r.rhs = j.h;
    r.gap = r.lhs - r.rhs;
    double slope = std::isfinite(j.hx) && std::isfinite(j.hy) ? std::abs(j.hx) * qf.error + std::abs(j.hy) * qg.error
                                                              : 0.0;
    r.quadrature_error = ql.error + slope;
    r.grid_resolution = {f.grid().n, g.grid().n, o.t_grid->n};
    r.f_mean = qf.value;
    r.g_mean = qg.value;
    r.extrapolated = sc.extrapolated;
    return r;
}

double diagonal_lhs(const Surface& H, const GridFunction& f, const GridFunction& g, const Measure& mu) {
    check_ranges(H, f, g);
    const Grid1D& fg = f.grid();
    std::vector<double> v(fg.n);
    for (int i = 0; i < fg.n; ++i) v[i] = H(f.values()[i], g(fg.node(i)));
    return integrate_grid(GridFunction(fg, std::move(v)), mu).value;
}

// ---------------------------------------------------------------- L^p smoothing

LpResult lp_smoothed_lhs(const Surface& H, const GridFunction& f, const GridFunction& g, Weights w, double R,
                         double alpha, double beta, const LpOptions& opt) {
    if (w.regime() != Regime::parabolic) throw RegimeError("L^p smoothing needs parabolic weights");
    if (!(alpha < 1.0 && alpha > beta && beta > 0.0 && alpha + beta > 1.0))
        throw ParameterError("smoothing exponents need 1 > alpha > beta > 0 and alpha + beta > 1");
    if (!(R > 1.0)) throw ParameterError("smoothing needs R > 1");
    check_ranges(H, f, g);
    if (opt.inner_nodes < 3 || opt.outer_nodes < 2) throw ParameterError("too few smoothing nodes");

    LpResult res;
    res.p = std::pow(R, beta);
    bool lower = std::abs(w.a - std::abs(1.0 - w.b)) <= 1e-12;
    res.q = lower ? -w.b * res.p : w.b * res.p;
    res.a_of_r = R - std::pow(R, alpha);
    if (!(res.a_of_r > 0.0)) throw ParameterError("R - R^alpha must be positive");

    const double a = w.a, b = w.b, p = res.p, q = res.q;
    const double sd = 1.0 / std::sqrt(p);
    const int n = opt.inner_nodes | 1;
    const double W = opt.inner_width, dz = 2.0 * W / (n - 1);
    std::vector<double> logw(n);
    for (int j = 0; j < n; ++j) {
        double z = -W + dz * j;
        double s = (j == 0 || j == n - 1) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        logw[j] = std::log(s * dz / 3.0) - 0.5 * z * z - 0.5 * std::log(2.0 * M_PI);
    }
    const QuadratureRule& gh = gauss_hermite(opt.outer_nodes);
    std::vector<double> phi(gh.nodes.size()), phin(gh.nodes.size());
    parallel_chunks(gh.nodes.size(), opt.threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> e(n);
        for (std::size_t k = lo; k < hi; ++k) {
            double x = gh.nodes[k];
            double m = -q * x / p;
            double emax = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) {
                double y = m + sd * (-W + dz * j);
                double hv = H(f((x - y) / a), g(y / b));
                if (!(hv > 0.0)) throw PreconditionError("L^p smoothing needs H > 0; got " + num(hv));
                e[j] = logw[j] + R * std::log(hv);
                emax = std::max(emax, e[j]);
            }
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += std::exp(e[j] - emax);
            double L = emax + std::log(acc);
            phi[k] = std::exp(L / res.a_of_r);
            phin[k] = std::exp(L / R);
        }
    });
    for (std::size_t k = 0; k < phi.size(); ++k) {
        res.value += gh.weights[k] * phi[k];
        res.normalized_value += gh.weights[k] * phin[k];
    }
    return res;
}

// ---------------------------------------------------------------- two dimensions

GapResult tensorize_gap(const Surface& H, const GridFunction2D& f, const GridFunction2D& g, Weights w, int threads) {
    const Rect& d = H.domain();
    if (f.range_lo() < d.x0 || f.range_hi() > d.x1 || g.range_lo() < d.y0 || g.range_hi() > d.y1)
        throw PreconditionError("2-D ranges leave the domain of " + H.label());
    const Measure mu = Measure::standard(1);
    const int n2f = f.grid2().n, n2g = g.grid2().n;

    // First axis: inner functional at every pair of second-axis nodes.
    std::vector<GridFunction> fs, gs;
    for (int k = 0; k < n2f; ++k) fs.push_back(f.slice(k));
    for (int k = 0; k < n2g; ++k) gs.push_back(g.slice(k));
    std::vector<double> K(static_cast<std::size_t>(n2f) * n2g);
    double kerr = 0.0;
    std::vector<double> errs(K.size());
    SupConvOptions inner;
    inner.threads = 1;
    parallel_chunks(K.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t idx = lo; idx < hi; ++idx) {
            int i2 = int(idx / n2g), k2 = int(idx % n2g);
            Quadrature qq = integrate_grid(sup_convolve(H, fs[i2], gs[k2], w, inner).h, mu);
            K[idx] = qq.value;
            errs[idx] = qq.error;
        }
    });
    for (double e : errs) kerr = std::max(kerr, e);

    // Second axis: sup over the line in (x2, y2) of the inner values.
    const Grid1D& f2 = f.grid2();
    const Grid1D& g2 = g.grid2();
    const Grid1D tg = f2;
    std::vector<double> h2(tg.n);
    std::vector<double> row(n2g);
    for (int j = 0; j < tg.n; ++j) {
        double t = tg.node(j), best = -std::numeric_limits<double>::infinity();
        for (int i2 = 0; i2 < n2f; ++i2) {
            for (int k2 = 0; k2 < n2g; ++k2) row[k2] = K[static_cast<std::size_t>(i2) * n2g + k2];
            double v = interp(g2, row, (t - w.a * f2.node(i2)) / w.b);
            best = std::max(best, v);
        }
        h2[j] = best;
    }
    Quadrature ql = integrate_grid(GridFunction(tg, h2), mu);

    std::vector<double> F(n2f), G(n2g);
    for (int k = 0; k < n2f; ++k) F[k] = integrate_grid(fs[k], mu).value;
    for (int k = 0; k < n2g; ++k) G[k] = integrate_grid(gs[k], mu).value;
    Quadrature qf = integrate_grid(GridFunction(f2, F), mu), qg = integrate_grid(GridFunction(g2, G), mu);
    if (!d.contains(qf.value, qg.value))
        throw DomainError("means (" + num(qf.value) + ", " + num(qg.value) + ") outside the domain of " + H.label(),
                          qf.value);

    GapResult r;
    r.lhs = ql.value;
    r.rhs = H(qf.value, qg.value);
    r.gap = r.lhs - r.rhs;
    r.quadrature_error = ql.error + kerr + qf.error + qg.error;
    r.grid_resolution = {f.grid1().n * n2f, g.grid1().n * n2g, tg.n};
    r.f_mean = qf.value;
    r.g_mean = qg.value;
    return r;
}

}  // namespace ehrhard
