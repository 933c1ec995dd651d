#include "ehrhard/pdi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ehrhard/errors.hpp"
#include "ehrhard/parallel.hpp"

namespace ehrhard {

double pdi_from_jet(const Jet& j, Weights w) {
    return w.a * w.a * j.hxx / (j.hx * j.hx) + w.mix() * j.hxy / (j.hx * j.hy) + w.b * w.b * j.hyy / (j.hy * j.hy);
}

double pdi_numerator(const Jet& j, Weights w) {
    return w.a * w.a * j.hxx * j.hy * j.hy + w.mix() * j.hxy * j.hx * j.hy + w.b * w.b * j.hyy * j.hx * j.hx;
}

double pdi_value(const Surface& H, Weights w, double x, double y) {
    Jet j = H.jet(x, y);
    if (j.hx == 0.0 || j.hy == 0.0 || !std::isfinite(j.hx) || !std::isfinite(j.hy)) {
        std::ostringstream os;
        os << "vanishing first partial at (" << x << "," << y << "); use check_degenerate";
        throw DegeneratePointError(os.str(), x, y);
    }
    return pdi_from_jet(j, w);
}

Regime weight_constraint(Weights w) {
    if (!(w.a > 0.0 && w.b > 0.0)) throw ParameterError("weights must be positive");
    return w.regime();
}

PdiReport check_pdi_grid(const Surface& H, Weights w, const GridSpec& grid, double tol, int threads) {
    if (w.regime() == Regime::infeasible) throw RegimeError("check_pdi_grid needs feasible weights");
    if (grid.nx < 1 || grid.ny < 1) throw ParameterError("grid needs at least one node per axis");
    Rect r = grid.rect.value_or(H.domain());
    const int nx = grid.nx, ny = grid.ny;
    auto node = [](double lo, double hi, int n, int i) { return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1); };

    std::vector<Jet> jets(static_cast<std::size_t>(nx) * ny);
    parallel_chunks(nx, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            for (int k = 0; k < ny; ++k)
                jets[i * ny + k] = H.jet(node(r.x0, r.x1, nx, int(i)), node(r.y0, r.y1, ny, k));
    });

    std::vector<double> gnorm(jets.size());
    for (std::size_t i = 0; i < jets.size(); ++i) gnorm[i] = std::hypot(jets[i].hx, jets[i].hy);
    std::nth_element(gnorm.begin(), gnorm.begin() + gnorm.size() / 2, gnorm.end());
    double thresh = 1e-10 * gnorm[gnorm.size() / 2];

    PdiReport rep;
    rep.tolerance = tol;
    rep.min_value = INFINITY;
    for (int i = 0; i < nx; ++i) {
        for (int k = 0; k < ny; ++k) {
            const Jet& j = jets[static_cast<std::size_t>(i) * ny + k];
            if (std::abs(j.hx) <= thresh || std::abs(j.hy) <= thresh) {
                ++rep.degenerate;
                continue;
            }
            double v = pdi_from_jet(j, w);
            ++rep.samples;
            if (v < -tol) ++rep.violations;
            if (v < rep.min_value || std::isnan(v)) {
                rep.min_value = v;
                rep.arg_x = node(r.x0, r.x1, nx, i);
                rep.arg_y = node(r.y0, r.y1, ny, k);
            }
        }
    }
    rep.feasible = rep.samples > 0 && rep.min_value >= -tol;
    return rep;
}

bool check_degenerate(const Surface& H, Weights w, double x, double y) {
    Jet j = H.jet(x, y);
    double c = w.mix();
    if (std::hypot(j.hx, j.hy) > 1e-10) return pdi_numerator(j, w) >= -1e-12;
    double m11 = w.a * w.a * j.hxx, m22 = w.b * w.b * j.hyy, m12 = 0.5 * c * j.hxy;
    double scale = std::max({std::abs(m11), std::abs(m22), std::abs(m12), 1e-300});
    return m11 >= -1e-12 * scale && m22 >= -1e-12 * scale && m11 * m22 - m12 * m12 >= -1e-12 * scale * scale;
}

std::pair<double, double> elliptic_params(Weights w) {
    if (w.regime() != Regime::elliptic) throw RegimeError("elliptic_params needs elliptic weights, got " + to_string(w.regime()));
    double a = w.a, b = w.b;
    double den = (1.0 - (a - b) * (a - b)) * ((a + b) * (a + b) - 1.0);
    return {4.0 / den, 2.0 * (a * a - b * b - 1.0) / den};
}

// ---------------------------------------------------------------- block condition

BlockKernel block_kernel(Weights w, double R, const BlockSmoothing& s) {
    if (!(R > 1.0)) throw PreconditionError("block condition needs R > 1");
    Regime reg = w.regime();
    BlockKernel k;
    if (s.parabolic) {
        if (reg != Regime::parabolic) throw ParameterError("growth schedule needs parabolic weights");
        if (!(s.alpha < 1.0 && s.alpha > s.beta && s.beta > 0.0 && s.alpha + s.beta > 1.0))
            throw ParameterError("growth schedule needs 1 > alpha > beta > 0 and alpha + beta > 1");
        double eps = std::pow(R, -s.beta);
        k.p = 1.0 / eps;
        bool lower = std::abs(w.a - std::abs(1.0 - w.b)) <= 1e-12;
        k.q = lower ? -w.b / eps : w.b / eps;
        k.a_of_r = R - std::pow(R, s.alpha);
    } else {
        if (reg != Regime::elliptic) throw ParameterError("shift schedule needs elliptic weights");
        auto [p, q] = elliptic_params(w);
        k.p = p;
        k.q = q;
        k.a_of_r = R - s.c;
    }
    if (!(k.a_of_r > 1.0)) throw PreconditionError("a(R) must exceed 1; increase R");
    const double c00 = 1.0, c01 = -k.q / k.p, c11 = 1.0 / k.p + k.q * k.q / (k.p * k.p);
    const double cols[3][2] = {{1.0 / w.a, -1.0 / w.a}, {0.0, -1.0 / w.b}, {1.0, 0.0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double* u = cols[i];
            const double* v = cols[j];
            k.gram[i][j] = u[0] * (c00 * v[0] + c01 * v[1]) + u[1] * (c01 * v[0] + c11 * v[1]);
        }
    return k;
}

Mat3 block_t(const Jet& j, double R, double a_of_r) {
    double n = R - 1.0;
    double inv_m = a_of_r / (R * (a_of_r - 1.0));
    Mat3 t{};
    t[0][0] = j.hxx * j.h + n * j.hx * j.hx;
    t[0][1] = t[1][0] = j.hxy * j.h + n * j.hx * j.hy;
    t[1][1] = j.hyy * j.h + n * j.hy * j.hy;
    t[0][2] = t[2][0] = j.hx;
    t[1][2] = t[2][1] = j.hy;
    t[2][2] = inv_m;
    return t;
}

Mat3 hess_b_factored(const Jet& j, double R, double a_of_r, double z) {
    Mat3 t = block_t(j, R, a_of_r);
    double s[3] = {1.0, 1.0, (1.0 - a_of_r) * j.h / z};
    double pre = R * std::pow(j.h, R - 2.0) * std::pow(z, 1.0 - a_of_r);
    Mat3 out{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) out[i][k] = pre * s[i] * t[i][k] * s[k];
    return out;
}

BlockReport block_condition(const Surface& H, Weights w, double R, const BlockSmoothing& s, double x, double y) {
    BlockKernel k = block_kernel(w, R, s);
    Jet j = H.jet(x, y);
    if (!(j.h > 0.0)) throw PreconditionError("block condition needs H > 0");
    if (j.hx == 0.0 || j.hy == 0.0) throw PreconditionError("block condition needs nonvanishing first partials");
    BlockReport rep;
    rep.kernel = k.gram;
    rep.t = block_t(j, R, k.a_of_r);
    rep.p = k.p;
    rep.q = k.q;
    rep.a_of_r = k.a_of_r;
    rep.n = R - 1.0;
    rep.inv_m = rep.t[2][2];
    long double m[3][3];
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) m[i][c] = static_cast<long double>(k.gram[i][c]) * rep.t[i][c];
    long double d1 = m[0][0];
    long double d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    long double d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // Sum of absolute expansion terms bounds the cancellation error of each minor.
    long double s2 = std::fabs(m[0][0] * m[1][1]) + std::fabs(m[0][1] * m[1][0]);
    long double s3 = 0.0L;
    const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perm) s3 += std::fabs(m[0][p[0]] * m[1][p[1]] * m[2][p[2]]);
    rep.minors = {double(d1), double(d2), double(d3)};
    rep.scales = {double(std::fabs(m[0][0])), double(s2), double(s3)};
    for (int i = 0; i < 3; ++i) {
        if (rep.minors[i] < -1e-12 * std::max(rep.scales[i], 1e-300)) {
            rep.ok = false;
            rep.failed_minor = i;
            break;
        }
    }
    return rep;
}

// ---------------------------------------------------------------- homogeneous classification

std::string to_string(HomogeneousClass c) {
    switch (c) {
        case HomogeneousClass::convex: return "convex";
        case HomogeneousClass::pl_classic: return "pl_classic";
        case HomogeneousClass::pl_a_minus_b: return "pl_a_minus_b";
        case HomogeneousClass::pl_b_minus_a: return "pl_b_minus_a";
        case HomogeneousClass::mixed: return "mixed";
    }
    return "?";
}

HomogeneousFit classify_homogeneous(const Surface& H) {
    const Rect& d = H.domain();
    double lo = std::max({d.x0, d.y0, 1e-6}) * 2.0;
    double hi = std::min(d.x1, d.y1) / 2.0;
    if (!(hi > lo)) throw PreconditionError("domain too small for the homogeneity probe");
    const int k = 12;
    for (int i = 0; i < k; ++i) {
        for (int m = 0; m < k; ++m) {
            double x = lo * std::pow(hi / lo, double(i) / (k - 1));
            double y = lo * std::pow(hi / lo, double(m) / (k - 1));
            double base = H(x, y);
            for (double lam : {0.5, 2.0}) {
                double dev = std::abs(H(lam * x, lam * y) - lam * base);
                if (dev > 1e-8 * std::max(1.0, std::abs(lam * base))) {
                    std::ostringstream os;
                    os << "surface is not 1-homogeneous at (" << x << "," << y << "), lambda=" << lam << ", deviation "
                       << dev;
                    throw PreconditionError(os.str());
                }
            }
        }
    }

    // Profile h(t) = H(1, t); 1-homogeneity reduces everything to h.
    double t0 = std::max(d.y0 * 1.01, 0.1), t1 = std::min(d.y1 * 0.99, 5.0);
    if (!(d.x0 <= 1.0 && d.x1 >= 1.0)) throw PreconditionError("profile needs x = 1 inside the domain");
    const int n = 201;
    std::vector<double> lt(n), lh(n), curv(n), hv(n);
    double cmin = INFINITY, cmax = -INFINITY, cscale = 0.0;
    for (int i = 0; i < n; ++i) {
        double t = t0 * std::pow(t1 / t0, double(i) / (n - 1));
        Jet j = H.jet(1.0, t);
        hv[i] = j.h;
        curv[i] = j.hyy;
        cmin = std::min(cmin, j.hyy);
        cmax = std::max(cmax, j.hyy);
        cscale = std::max(cscale, std::abs(j.hyy));
        lt[i] = std::log(t);
    }
    HomogeneousFit fit;
    fit.min_curvature = cmin;
    fit.max_curvature = cmax;
    double tol = 1e-8 * std::max(cscale, 1e-300);
    if (cmin >= -tol) {
        fit.cls = HomogeneousClass::convex;
        return fit;
    }
    if (cmax > tol) {
        fit.cls = HomogeneousClass::mixed;
        return fit;
    }
    // Concave profile: fit |h| = C t^e in log-log coordinates.
    bool pos = hv[0] > 0.0;
    for (int i = 0; i < n; ++i) {
        if ((hv[i] > 0.0) != pos || hv[i] == 0.0) {
            fit.cls = HomogeneousClass::mixed;
            return fit;
        }
        lh[i] = std::log(std::abs(hv[i]));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += lt[i];
        sy += lh[i];
        sxx += lt[i] * lt[i];
        sxy += lt[i] * lh[i];
    }
    double e = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double c0 = (sy - e * sx) / n;
    double rss = 0.0;
    for (int i = 0; i < n; ++i) rss += std::pow(lh[i] - c0 - e * lt[i], 2);
    fit.residual = std::sqrt(rss / n);
    if (fit.residual >= 1e-6) {
        fit.cls = HomogeneousClass::mixed;
        return fit;
    }
    fit.a = 1.0 - e;
    fit.b = e;
    if (pos && e > 0.0 && e < 1.0)
        fit.cls = HomogeneousClass::pl_classic;
    else if (!pos && e < 0.0)
        fit.cls = HomogeneousClass::pl_a_minus_b;
    else if (!pos && e > 1.0)
        fit.cls = HomogeneousClass::pl_b_minus_a;
    else
        fit.cls = HomogeneousClass::mixed;
    return fit;
}

// ---------------------------------------------------------------- concave Monge-Ampere

MaReport concave_ma_check(const Surface& H, Weights w, const GridSpec& grid) {
    Rect r = grid.rect.value_or(H.domain());
    auto node = [](double lo, double hi, int n, int i) { return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1); };
    const double a2 = w.a * w.a, b2 = w.b * w.b, c = w.mix();
    for (int i = 0; i < grid.nx; ++i) {
        for (int k = 0; k < grid.ny; ++k) {
            double x = node(r.x0, r.x1, grid.nx, i), y = node(r.y0, r.y1, grid.ny, k);
            Jet j = H.jet(x, y);
            double hs = std::max({std::abs(j.hxx), std::abs(j.hyy), std::abs(j.hxy), 1e-300});
            double det = j.hxx * j.hyy - j.hxy * j.hxy;
            if (j.hxx > 1e-8 * hs || j.hyy > 1e-8 * hs || det < -1e-8 * hs * hs) {
                std::ostringstream os;
                os << "surface is not concave at (" << x << "," << y << ")";
                throw PreconditionError(os.str());
            }
            if (j.hx == 0.0 || j.hy == 0.0) {
                std::ostringstream os;
                os << "vanishing first partial at (" << x << "," << y << ")";
                throw PreconditionError(os.str());
            }
        }
    }
    MaReport rep;
    if (std::abs(std::abs(c) - 2.0 * w.a * w.b) > 1e-10) {
        rep.ok = false;
        rep.reason = "weights are not parabolic";
        return rep;
    }
    for (int i = 0; i < grid.nx; ++i) {
        for (int k = 0; k < grid.ny; ++k) {
            double x = node(r.x0, r.x1, grid.nx, i), y = node(r.y0, r.y1, grid.ny, k);
            Jet j = H.jet(x, y);
            double det = j.hxx * j.hyy - j.hxy * j.hxy;
            double det_scale = std::max({std::abs(j.hxx * j.hyy), j.hxy * j.hxy, 1e-300});
            double lx = a2 * j.hxx / (j.hx * j.hx), ly = b2 * j.hyy / (j.hy * j.hy);
            double l_scale = std::max({std::abs(lx), std::abs(ly), 1e-300});
            double cross = c * j.hxy * (j.hx * j.hy > 0.0 ? 1.0 : -1.0);
            const char* fail = nullptr;
            if (std::abs(det) > 1e-7 * det_scale)
                fail = "Hessian determinant does not vanish";
            else if (std::abs(lx - ly) > 1e-7 * l_scale)
                fail = "weighted second-derivative ratios differ";
            else if (cross < -1e-7 * std::abs(c * j.hxy))
                fail = "mixed term has the wrong sign";
            if (fail) {
                rep.ok = false;
                rep.reason = fail;
                rep.x = x;
                rep.y = y;
                return rep;
            }
        }
    }
    return rep;
}

}  // namespace ehrhard
