#include "ehrhard/obstacle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ehrhard/errors.hpp"
#include "ehrhard/necessity.hpp"
#include "ehrhard/parallel.hpp"

namespace ehrhard {

GridSurface::GridSurface(int n, double inset) : GridSurface(n, std::vector<double>(std::size_t(n) * n, 0.0), inset) {}

GridSurface::GridSurface(int n, std::vector<double> values, double inset)
    : n_(n), inset_(inset), v_(std::move(values)) {
    if (n_ < 3) throw ParameterError("grid surface needs at least 3 nodes per side");
    if (v_.size() != static_cast<std::size_t>(n_) * n_) throw ParameterError("value count does not match the grid");
    if (!(inset_ >= 0.0 && inset_ < 0.5)) throw ParameterError("inset must lie in [0, 1/2)");
    for (double x : v_)
        if (!std::isfinite(x)) throw ParameterError("grid surface values must be finite");
}

double GridSurface::nearest(double u, double v) const {
    int i = std::clamp(static_cast<int>(std::lround(u * (n_ - 1))), 0, n_ - 1);
    int j = std::clamp(static_cast<int>(std::lround(v * (n_ - 1))), 0, n_ - 1);
    return at(i, j);
}

bool GridSurface::effective(int i, int j) const {
    const double e = 1e-12;
    double u = coord(i), v = coord(j);
    return i > 0 && j > 0 && i < n_ - 1 && j < n_ - 1 && u >= inset_ - e && u <= 1.0 - inset_ + e &&
           v >= inset_ - e && v <= 1.0 - inset_ + e;
}

void GridSurface::write_csv(std::ostream& os) const {
    os << "u,v,value\n";
    os.precision(17);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) os << coord(i) << ',' << coord(j) << ',' << at(i, j) << '\n';
}

GridSurface GridSurface::read_csv(std::istream& is, double inset) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("u,v,value", 0) != 0)
        throw ParameterError("surface CSV must start with the header u,v,value");
    std::vector<double> vals;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto c2 = line.rfind(',');
        if (c2 == std::string::npos) throw ParameterError("malformed CSV row: " + line);
        try {
            vals.push_back(std::stod(line.substr(c2 + 1)));
        } catch (const std::exception&) {
            throw ParameterError("malformed CSV row: " + line);
        }
    }
    int n = static_cast<int>(std::lround(std::sqrt(double(vals.size()))));
    if (static_cast<std::size_t>(n) * n != vals.size()) throw ParameterError("surface CSV is not a square grid");
    return GridSurface(n, std::move(vals), inset);
}

GridSurface feasible_init(const ObstacleProblem& prob, double s) {
    if (!(s > 0.0)) throw ParameterError("smoothing width must be positive");
    if (prob.w.regime() == Regime::infeasible) throw RegimeError("obstacle problem needs feasible weights");
    GridSurface g(prob.n, prob.inset);
    const double shift = s * std::log(2.0);
    for (int i = 0; i < prob.n; ++i)
        for (int j = 0; j < prob.n; ++j) {
            double z = (g.coord(i) + g.coord(j) - 1.0) / s;
            double sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            g.at(i, j) = s * sp - shift;
        }
    return g;
}

namespace {

struct Diffs {
    double hx, hy, hxx, hyy, hxy;
};

inline Diffs diffs(const GridSurface& s, int i, int j) {
    const double h = s.h();
    double c = s.at(i, j);
    return {(s.at(i + 1, j) - s.at(i - 1, j)) / (2 * h), (s.at(i, j + 1) - s.at(i, j - 1)) / (2 * h),
            (s.at(i + 1, j) - 2 * c + s.at(i - 1, j)) / (h * h), (s.at(i, j + 1) - 2 * c + s.at(i, j - 1)) / (h * h),
            (s.at(i + 1, j + 1) - s.at(i + 1, j - 1) - s.at(i - 1, j + 1) + s.at(i - 1, j - 1)) / (4 * h * h)};
}

inline double own_target(const GridSurface& s, Weights w, int i, int j) {
    Diffs d = diffs(s, i, j);
    const double h = s.h();
    double e = s.at(i + 1, j), wst = s.at(i - 1, j), nn = s.at(i, j + 1), ss = s.at(i, j - 1);
    if (std::abs(d.hx) < 1e-8 || std::abs(d.hy) < 1e-8) return std::min(0.5 * (e + wst), 0.5 * (nn + ss));
    double wx = w.a * w.a / (d.hx * d.hx), wy = w.b * w.b / (d.hy * d.hy);
    return (wx * (e + wst) + wy * (nn + ss) + w.mix() * h * h * d.hxy / (d.hx * d.hy)) / (2.0 * (wx + wy));
}

bool neighbourhood_feasible(const GridSurface& s, Weights w, int i, int j, double tol) {
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
            int k = i + di, l = j + dj;
            if (s.effective(k, l) && discrete_pdi(s, w, k, l) < -tol) return false;
        }
    return true;
}

double ehrhard_value(Weights w, double u, double v) {
    return normal_cdf(w.a * normal_quantile(u) + w.b * normal_quantile(v));
}

}  // namespace

double discrete_pdi(const GridSurface& s, Weights w, int i, int j) {
    if (i <= 0 || j <= 0 || i >= s.n() - 1 || j >= s.n() - 1) throw ParameterError("discrete PDI needs an interior node");
    Diffs d = diffs(s, i, j);
    const double a2 = w.a * w.a, b2 = w.b * w.b, c = w.mix();
    if (std::abs(d.hx) < 1e-8 || std::abs(d.hy) < 1e-8) {
        double m11 = a2 * d.hxx, m22 = b2 * d.hyy, m12 = 0.5 * c * d.hxy;
        return std::min({m11, m22, m11 * m22 - m12 * m12});
    }
    return a2 * d.hxx / (d.hx * d.hx) + c * d.hxy / (d.hx * d.hy) + b2 * d.hyy / (d.hy * d.hy);
}

DiscretePdiReport discrete_pdi_report(const GridSurface& s, Weights w) {
    DiscretePdiReport r;
    r.min_value = INFINITY;
    for (int i = 1; i < s.n() - 1; ++i)
        for (int j = 1; j < s.n() - 1; ++j) {
            if (!s.effective(i, j)) continue;
            double v = discrete_pdi(s, w, i, j);
            ++r.nodes;
            if (v < r.min_value) {
                r.min_value = v;
                r.arg_i = i;
                r.arg_j = j;
            }
        }
    return r;
}

DominanceReport dominance_check(const GridSurface& cand, Weights w, double tol) {
    DominanceReport r;
    r.worst_margin = -INFINITY;
    for (int i = 0; i < cand.n(); ++i)
        for (int j = 0; j < cand.n(); ++j) {
            if (!cand.effective(i, j)) continue;
            double m = cand.at(i, j) - ehrhard_value(w, cand.coord(i), cand.coord(j));
            ++r.nodes;
            if (m > r.worst_margin) {
                r.worst_margin = m;
                r.witness_u = cand.coord(i);
                r.witness_v = cand.coord(j);
            }
        }
    r.ok = r.nodes == 0 || r.worst_margin <= tol;
    return r;
}

SolveResult solve(const ObstacleProblem& prob, const GridSurface& init,
                  const std::function<void(const SweepLog&)>& on_sweep) {
    if (prob.w.regime() == Regime::infeasible) throw RegimeError("obstacle problem needs feasible weights");
    const int n = init.n();
    DiscretePdiReport r0 = discrete_pdi_report(init, prob.w);
    if (r0.nodes > 0 && r0.min_value < -prob.pdi_tol) {
        std::ostringstream os;
        os << "initial surface violates the discrete PDI at node (" << r0.arg_i << "," << r0.arg_j
           << "), value " << r0.min_value;
        throw PreconditionError(os.str());
    }
    const Weights w = prob.w;
    SolveResult res;
    GridSurface s = init;

    // Corners move up to the obstacle; edges per the edge mode.
    auto raise = [](double& x, double to) { x = std::max(x, to); };
    const double corners[4][3] = {{0, 0, prob.corner_00}, {0, double(n - 1), prob.corner_01},
                                  {double(n - 1), 0, prob.corner_10}, {double(n - 1), double(n - 1), prob.corner_11}};
    for (const auto& k : corners) {
        double& x = s.at(int(k[0]), int(k[1]));
        if (x > k[2] + 1e-12) throw PreconditionError("initial surface exceeds a corner obstacle");
        x = k[2];
    }
    if (prob.edges == EdgeMode::pinned) {
        for (int k = 1; k < n - 1; ++k) {
            raise(s.at(0, k), 0.0);
            raise(s.at(k, 0), 0.0);
            raise(s.at(n - 1, k), 1.0);
            raise(s.at(k, n - 1), 1.0);
        }
    }

    std::vector<double> ref(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (s.effective(i, j)) ref[std::size_t(i) * n + j] = ehrhard_value(w, s.coord(i), s.coord(j));
    auto margin = [&](const GridSurface& g, int& wi, int& wj) {
        double m = -INFINITY;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (g.effective(i, j)) {
                    double d = g.at(i, j) - ref[std::size_t(i) * n + j];
                    if (d > m) {
                        m = d;
                        wi = i;
                        wj = j;
                    }
                }
        return m;
    };

    const auto t0 = std::chrono::steady_clock::now();
    const int c = n / 2;
    res.worst_dominance = -INFINITY;
    std::vector<double> rowmax(n);
    for (int sweep = 1; sweep <= prob.max_sweeps; ++sweep) {
        std::fill(rowmax.begin(), rowmax.end(), 0.0);
        for (int ci = 0; ci < 3; ++ci) {
            for (int cj = 0; cj < 3; ++cj) {
                int rows = 0;
                for (int i = 1 + ci; i < n - 1; i += 3) ++rows;
                parallel_chunks(rows, prob.threads, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t r = lo; r < hi; ++r) {
                        int i = 1 + ci + 3 * int(r);
                        for (int j = 1 + cj; j < n - 1; j += 3) {
                            double d = own_target(s, w, i, j) - s.at(i, j);
                            if (!(d > 0.0)) continue;
                            d = std::min(d, prob.max_step);
                            double v0 = s.at(i, j);
                            s.at(i, j) = v0 + d;
                            if (prob.strict && !neighbourhood_feasible(s, w, i, j, prob.pdi_tol)) {
                                double lo2 = 0.0, hi2 = d;
                                for (int it = 0; it < 40; ++it) {
                                    double m = 0.5 * (lo2 + hi2);
                                    s.at(i, j) = v0 + m;
                                    (neighbourhood_feasible(s, w, i, j, prob.pdi_tol) ? lo2 : hi2) = m;
                                }
                                d = lo2;
                                s.at(i, j) = v0 + d;
                            }
                            rowmax[i] = std::max(rowmax[i], d);
                        }
                    }
                });
            }
        }
        double mx = *std::max_element(rowmax.begin(), rowmax.end());
        int wi = 0, wj = 0;
        double dm = margin(s, wi, wj);
        SweepLog lg{sweep, mx, s.at(c, c), dm,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
        res.log.push_back(lg);
        if (on_sweep) on_sweep(lg);
        res.sweeps = sweep;
        res.worst_dominance = std::max(res.worst_dominance, dm);
        if (dm > prob.dominance_tol && res.first_violation < 0) {
            res.first_violation = sweep;
            std::ostringstream os;
            os << "sweep " << sweep << ": iterate exceeds the Ehrhard surface by " << dm << " at (" << s.coord(wi)
               << "," << s.coord(wj) << ")";
            res.diagnostic = os.str();
            if (prob.abort_on_violation) {
                res.aborted = true;
                break;
            }
        }
        if (mx < prob.stop_increase) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged && !res.aborted && res.diagnostic.empty())
        res.diagnostic = "sweep limit reached before the increase fell below the stopping threshold";
    res.dominance = dominance_check(s, w, prob.dominance_tol);
    res.surface = std::move(s);
    return res;
}

void write_log_jsonl(std::ostream& os, const std::vector<SweepLog>& log, bool with_time) {
    os.precision(17);
    for (const SweepLog& l : log) {
        os << "{\"sweep\":" << l.sweep << ",\"max_increase\":" << l.max_increase << ",\"center\":" << l.center
           << ",\"dominance_margin\":" << l.dominance_margin;
        if (with_time) os << ",\"seconds\":" << l.seconds;
        os << "}\n";
    }
}

CertificateReport lower_bound_certificate(const Surface& H, const GridFunction& f, const GridFunction& g, Weights w,
                                          const Measure& mu) {
    GridSpec spec;
    spec.nx = spec.ny = 60;
    PdiReport pr = check_pdi_grid(H, w, spec);
    if (!pr.feasible) {
        std::ostringstream os;
        os << H.label() << " fails the PDI check: min " << pr.min_value << " at (" << pr.arg_x << "," << pr.arg_y
           << ")";
        throw PreconditionError(os.str());
    }
    CertificateReport r;
    r.detail = inequality_gap(H, f, g, w, mu);
    r.gap = r.detail.gap;
    r.scale = image_scale(H, f, g);
    r.ok = r.gap >= -1e-6 * r.scale;
    return r;
}

}  // namespace ehrhard
