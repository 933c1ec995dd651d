#include "ehrhard/necessity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ehrhard/errors.hpp"
#include "ehrhard/pdi.hpp"

namespace ehrhard {

Ratios Ratios::of(const Jet& j) {
    if (j.hx == 0.0 || j.hy == 0.0) throw DegeneratePointError("envelope needs nonvanishing first partials", 0, 0);
    return {j.hxx / (j.hx * j.hx), j.hxy / (j.hx * j.hy), j.hyy / (j.hy * j.hy)};
}

double half_plane_value(const Jet& j, double p, double q) {
    Ratios r = Ratios::of(j);
    return r.A + p - 2.0 * r.B + r.C + q;
}

double clamp_phi(double t, double eps, double delta, double alpha) {
    double top = std::pow(eps, -alpha);
    return std::clamp(t, -delta * top, top);
}

bool delta_admissible(const Jet& j, double p, double q, double delta) {
    Ratios r = Ratios::of(j);
    double c2 = r.A + p, c1 = -2.0 * r.B, c0 = r.C + q;
    auto quad = [&](double s) { return (c2 * s + c1) * s + c0; };
    double lo = 1.0 / delta, hi = delta;
    double m = std::max(quad(lo), quad(hi));
    if (c2 < 0.0) {
        double s = -c1 / (2.0 * c2);
        if (s > lo && s < hi) m = std::max(m, quad(s));
    }
    return m < 0.0;
}

double choose_delta(const Jet& j, double p, double q) {
    if (!(half_plane_value(j, p, q) < 0.0)) throw PreconditionError("(p, q) outside the admissible half-plane");
    if (delta_admissible(j, p, q, 10.0)) return 10.0;
    double lo = 1.0, hi = 10.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (delta_admissible(j, p, q, mid) ? lo : hi) = mid;
    }
    if (!(lo > 1.0)) throw PreconditionError("no delta > 1 satisfies the interval condition");
    return lo;
}

std::pair<GridFunction, GridFunction> perturbed_pair(const Surface& H, const PerturbationParams& prm, Weights w,
                                                     Grid1D grid) {
    if (!(prm.eps >= 0.0 && prm.eps < 1.0)) throw ParameterError("eps must lie in [0, 1)");
    if (!(prm.delta > 1.0)) throw ParameterError("delta must exceed 1");
    if (!(prm.alpha > 0.0 && prm.alpha < 1.0 / 3.0)) throw ParameterError("alpha must lie in (0, 1/3)");
    Jet j = H.jet(prm.u, prm.v);
    if (j.hx == 0.0 || j.hy == 0.0) throw DegeneratePointError("perturbation needs nonvanishing first partials", prm.u, prm.v);
    std::vector<double> fv(grid.n), gv(grid.n);
    const double e = prm.eps;
    for (int i = 0; i < grid.n; ++i) {
        double x = grid.node(i);
        double px = e == 0.0 ? 0.0 : clamp_phi(w.a * x, e, prm.delta, prm.alpha);
        double py = e == 0.0 ? 0.0 : clamp_phi(w.b * x, e, prm.delta, prm.alpha);
        fv[i] = prm.u + e * px / j.hx + e * e * prm.p * px * px / j.hx;
        gv[i] = prm.v + e * py / j.hy + e * e * prm.q * py * py / j.hy;
    }
    GridFunction f(grid, std::move(fv)), g(grid, std::move(gv));
    const Rect& d = H.domain();
    if (f.range_lo() < d.x0 || f.range_hi() > d.x1 || g.range_lo() < d.y0 || g.range_hi() > d.y1)
        throw ParameterError("perturbed pair leaves the domain of " + H.label() + "; use a smaller eps");
    return {std::move(f), std::move(g)};
}

double psi_coefficient(const Jet& j, double p, double q) {
    Ratios r = Ratios::of(j);
    double D = r.A + p - 2.0 * r.B + r.C + q;
    if (!(D < 0.0)) throw PreconditionError("(p, q) outside the admissible half-plane");
    return ((r.A + p) * (r.C + q) - r.B * r.B) / D;
}

double psi_closed_form(const Jet& j, double p, double q, double t) { return psi_coefficient(j, p, q) * t * t; }

double argmax_x0(const Jet& j, double p, double q, double t) {
    Ratios r = Ratios::of(j);
    double D = r.A + p - 2.0 * r.B + r.C + q;
    if (!(D < 0.0)) throw PreconditionError("(p, q) outside the admissible half-plane");
    return (r.C + q - r.B) * t / D;
}

double envelope(const Jet& j, double p, double q, double X, double Y) {
    Ratios r = Ratios::of(j);
    return (r.A + p) * X * X + 2.0 * r.B * X * Y + (r.C + q) * Y * Y;
}

double quad_form_margin(const Jet& j, Weights w, double p, double q) {
    return psi_coefficient(j, p, q) - (p * w.a * w.a + q * w.b * w.b);
}

bool quad_form_necessity(const Jet& j, Weights w, double p, double q) { return quad_form_margin(j, w, p, q) >= 0.0; }

bool mean_constraint_check(const Measure& mu, Weights w) {
    if (w.a + w.b > 1.0 + 1e-12) return std::abs(mean_and_second_moment(mu).first) <= 1e-8;
    return true;
}

double predicted_gap(const Jet& j, Weights w, double p, double q, double eps, double beta) {
    return eps * eps * beta * (0.5 * psi_coefficient(j, 2.0 * p, 2.0 * q) - p * w.a * w.a - q * w.b * w.b);
}

// ---------------------------------------------------------------- search

std::string to_string(SearchFamily f) {
    switch (f) {
        case SearchFamily::perturbative: return "perturbative";
        case SearchFamily::step: return "step";
        case SearchFamily::random: return "random";
    }
    return "?";
}

SearchFamily parse_family(const std::string& s) {
    if (s == "perturbative") return SearchFamily::perturbative;
    if (s == "step") return SearchFamily::step;
    if (s == "random") return SearchFamily::random;
    throw ParameterError("unknown search family '" + s + "' (expected perturbative, step or random)");
}

double image_scale(const Surface& H, const GridFunction& f, const GridFunction& g) {
    const auto& fv = f.values();
    const auto& gv = g.values();
    const int k = 24;
    std::vector<double> hs;
    hs.reserve(k * k);
    for (int i = 0; i < k; ++i)
        for (int m = 0; m < k; ++m)
            hs.push_back(std::abs(H(fv[(fv.size() - 1) * i / (k - 1)], gv[(gv.size() - 1) * m / (k - 1)])));
    std::nth_element(hs.begin(), hs.begin() + hs.size() / 2, hs.end());
    double med = hs[hs.size() / 2];
    if (med > 0.0) return med;
    double mx = *std::max_element(hs.begin(), hs.end());
    return mx > 0.0 ? mx : 1.0;
}

namespace {

double median_of(const Measure& mu) {
    if (mu.kind() != MeasureKind::density) return mu.mean();
    double lo = mu.truncation_lo(), hi = mu.truncation_hi();
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        (mu.cdf(mid) < 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct Searcher {
    const Surface& H;
    Weights w;
    const Measure& mu;
    const SearchOptions& opt;
    SearchReport rep;

    bool exhausted() const { return rep.evaluations >= opt.budget; }

    // Evaluates one candidate; true once a reproducible violation is found.
    bool try_pair(GridFunction f, GridFunction g, std::map<std::string, double> params) {
        if (exhausted()) return false;
        SupConvOptions so;
        so.threads = opt.threads;
        GapResult r;
        try {
            r = inequality_gap(H, f, g, w, mu, so);
        } catch (const PreconditionError&) {
            return false;
        } catch (const DomainError&) {
            return false;
        }
        ++rep.evaluations;
        double scale = image_scale(H, f, g);
        rep.best_ratio = std::min(rep.best_ratio, r.gap / scale);
        if (r.gap < -opt.threshold * scale && -r.gap > r.quadrature_error) {
            rep.found = Counterexample{std::move(f), std::move(g), r, scale, std::move(params)};
            return true;
        }
        return false;
    }

    std::vector<std::pair<double, double>> base_points() const {
        const Rect& d = H.domain();
        std::vector<std::pair<double, double>> pts;
        const double fr[] = {0.1, 0.3, 0.5, 0.7, 0.9};
        for (double s : fr)
            for (double t : fr) pts.emplace_back(d.x0 + s * d.width(), d.y0 + t * d.height());
        if (d.contains(1.0, 1.0) && d.x0 < 1.0 && d.x1 > 1.0 && d.y0 < 1.0 && d.y1 > 1.0) pts.emplace_back(1.0, 1.0);
        return pts;
    }

    void perturbative() {
        struct Base {
            double u, v, pdi;
        };
        std::vector<Base> bases;
        for (auto [u, v] : base_points()) {
            Jet j = H.jet(u, v);
            if (!(std::isfinite(j.hx) && std::isfinite(j.hy)) || std::abs(j.hx) < 1e-10 || std::abs(j.hy) < 1e-10) continue;
            bases.push_back({u, v, pdi_from_jet(j, w)});
        }
        std::stable_sort(bases.begin(), bases.end(), [](const Base& l, const Base& r) { return l.pdi < r.pdi; });
        const double beta = mean_and_second_moment(mu).second;
        for (const Base& b : bases) {
            Jet j = H.jet(b.u, b.v);
            // Screen (P, Q) = (2p, 2q) with the closed form; see predicted_gap.
            double bestP = 0.0, bestQ = 0.0, bestScore = INFINITY;
            for (int ip = -60; ip <= 60; ++ip) {
                for (int iq = -60; iq <= 60; ++iq) {
                    double P = 0.5 * ip, Q = 0.5 * iq;
                    if (!(half_plane_value(j, P, Q) < -1e-3)) continue;
                    double m = psi_coefficient(j, P, Q) - P * w.a * w.a - Q * w.b * w.b;
                    double score = m / (1.0 + P * P + Q * Q);
                    if (score < bestScore) {
                        bestScore = score;
                        bestP = P;
                        bestQ = Q;
                    }
                }
            }
            if (!std::isfinite(bestScore)) continue;
            double delta;
            try {
                delta = choose_delta(j, bestP, bestQ);
            } catch (const PreconditionError&) {
                continue;
            }
            for (double eps : {0.2, 0.1, 0.05, 0.02, 0.01}) {
                if (exhausted()) return;
                PerturbationParams prm{b.u, b.v, 0.5 * bestP, 0.5 * bestQ, eps, delta, 0.32};
                std::pair<GridFunction, GridFunction> fg;
                try {
                    fg = perturbed_pair(H, prm, w, opt.grid);
                } catch (const ParameterError&) {
                    continue;
                }
                std::map<std::string, double> params{{"u", prm.u},         {"v", prm.v},       {"p", prm.p},
                                                     {"q", prm.q},         {"eps", prm.eps},   {"delta", prm.delta},
                                                     {"alpha", prm.alpha}, {"pdi", b.pdi},
                                                     {"predicted_gap", predicted_gap(j, w, prm.p, prm.q, eps, beta)}};
                if (try_pair(std::move(fg.first), std::move(fg.second), std::move(params))) return;
            }
        }
    }

    void step() {
        const Rect& d = H.domain();
        const double tau = median_of(mu);
        const Grid1D& grid = opt.grid;
        auto stepfn = [&](double base, double amp) {
            std::vector<double> v(grid.n);
            for (int i = 0; i < grid.n; ++i) v[i] = base + (grid.node(i) <= tau ? -amp : amp);
            return GridFunction(grid, std::move(v));
        };
        for (auto [u, v] : base_points()) {
            double ru = std::min(u - d.x0, d.x1 - u), rv = std::min(v - d.y0, d.y1 - v);
            for (double kappa : {0.5, 0.25, 0.1}) {
                for (int sigma : {0, 1, -1}) {
                    for (int flip : {1, -1}) {
                        if (exhausted()) return;
                        double au = flip * kappa * ru, av = sigma * kappa * rv;
                        std::map<std::string, double> params{
                            {"u", u}, {"v", v}, {"amp_f", au}, {"amp_g", av}, {"split", tau}};
                        if (try_pair(stepfn(u, au), stepfn(v, av), std::move(params))) return;
                    }
                }
            }
        }
    }

    void random() {
        const Rect& d = H.domain();
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const Grid1D& grid = opt.grid;
        auto side = [&](double lo, double hi, std::map<std::string, double>& params, const std::string& tag) {
            double in = 0.01 * (hi - lo);
            double l = lo + in + unit(rng) * (hi - lo - 2 * in);
            double r = lo + in + unit(rng) * (hi - lo - 2 * in);
            double k = (0.3 + 3.7 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
            double c = -2.0 + 4.0 * unit(rng);
            params[tag + "_lo"] = l;
            params[tag + "_hi"] = r;
            params[tag + "_slope"] = k;
            params[tag + "_center"] = c;
            std::vector<double> v(grid.n);
            for (int i = 0; i < grid.n; ++i) v[i] = l + (r - l) * normal_cdf(k * (grid.node(i) - c));
            return GridFunction(grid, std::move(v), lo, hi);
        };
        for (int it = 0; it < opt.random_candidates && !exhausted(); ++it) {
            std::map<std::string, double> params{{"draw", double(it)}, {"seed", double(opt.seed)}};
            GridFunction f = side(d.x0, d.x1, params, "f");
            GridFunction g = side(d.y0, d.y1, params, "g");
            if (try_pair(std::move(f), std::move(g), std::move(params))) return;
        }
    }
};

}  // namespace

SearchReport counterexample_search(const Surface& H, Weights w, const Measure& mu, SearchFamily family,
                                   const SearchOptions& opt) {
    if (opt.budget < 1) throw ParameterError("search budget must be at least 1");
    if (mu.dim() != 1) throw ParameterError("counterexample search needs a one-dimensional measure");
    Searcher s{H, w, mu, opt, {}};
    s.rep.family = family;
    switch (family) {
        case SearchFamily::perturbative: s.perturbative(); break;
        case SearchFamily::step: s.step(); break;
        case SearchFamily::random: s.random(); break;
    }
    return s.rep;
}

}  // namespace ehrhard
