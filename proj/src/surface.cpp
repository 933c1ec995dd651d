#include "ehrhard/surface.hpp"

#include <cmath>
#include <sstream>

#include "ehrhard/errors.hpp"
#include "ehrhard/gaussian.hpp"

namespace ehrhard {

std::string to_string(Regime r) {
    switch (r) {
        case Regime::parabolic: return "parabolic";
        case Regime::elliptic: return "elliptic";
        case Regime::infeasible: return "infeasible";
    }
    return "?";
}

Regime Weights::regime() const {
    if (!(a > 0.0 && b > 0.0)) return Regime::infeasible;
    double lhs = std::abs(mix()), rhs = 2.0 * a * b;
    if (std::abs(lhs - rhs) <= 1e-12) return Regime::parabolic;
    return lhs < rhs ? Regime::elliptic : Regime::infeasible;
}

Surface::Surface(std::string label, Rect domain, JetFn fn)
    : label_(std::move(label)), domain_(domain), fn_(std::move(fn)) {}

std::array<double, 2> Surface::grad(double x, double y) const {
    Jet j = fn_(x, y);
    return {j.hx, j.hy};
}

std::array<double, 3> Surface::hess(double x, double y) const {
    Jet j = fn_(x, y);
    return {j.hxx, j.hxy, j.hyy};
}

Surface Surface::on(Rect domain) const {
    Surface s = *this;
    s.domain_ = domain;
    return s;
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

Surface make_ehrhard(Weights w, double inset) {
    if (!(inset > 0.0 && inset < 0.5)) throw ParameterError("Ehrhard inset must lie in (0, 1/2)");
    const double a = w.a, b = w.b;
    auto fn = [a, b](double x, double y) {
        double xi = normal_quantile(x), eta = normal_quantile(y);
        double px = normal_pdf(xi), py = normal_pdf(eta);
        double dxi = 1.0 / px, deta = 1.0 / py;
        double dxi2 = xi / (px * px), deta2 = eta / (py * py);
        double s = a * xi + b * eta, ps = normal_pdf(s);
        Jet j;
        j.h = normal_cdf(s);
        j.hx = ps * a * dxi;
        j.hy = ps * b * deta;
        j.hxx = -s * ps * a * a * dxi * dxi + ps * a * dxi2;
        j.hyy = -s * ps * b * b * deta * deta + ps * b * deta2;
        j.hxy = -s * ps * a * b * dxi * deta;
        return j;
    };
    Surface s("ehrhard:a=" + num(a) + ",b=" + num(b), {inset, 1.0 - inset, inset, 1.0 - inset}, fn);
    s.with_value([a, b](double x, double y) { return normal_cdf(a * normal_quantile(x) + b * normal_quantile(y)); });
    s.meta["a"] = a;
    s.meta["b"] = b;
    s.meta["inset"] = inset;
    s.meta["corner_00"] = 0.0;
    s.meta["corner_01"] = 0.0;
    s.meta["corner_10"] = 0.0;
    s.meta["corner_11"] = 1.0;
    return s;
}

Surface make_monomial(double coef, double alpha, double beta, Rect domain) {
    auto fn = [coef, alpha, beta](double x, double y) {
        Jet j;
        j.h = coef * std::pow(x, alpha) * std::pow(y, beta);
        j.hx = alpha * j.h / x;
        j.hy = beta * j.h / y;
        j.hxx = alpha * (alpha - 1.0) * j.h / (x * x);
        j.hyy = beta * (beta - 1.0) * j.h / (y * y);
        j.hxy = alpha * beta * j.h / (x * y);
        return j;
    };
    Surface s(num(coef) + "*x^" + num(alpha) + "*y^" + num(beta), domain, fn);
    s.with_value([coef, alpha, beta](double x, double y) { return coef * std::pow(x, alpha) * std::pow(y, beta); });
    s.meta["coef"] = coef;
    s.meta["alpha"] = alpha;
    s.meta["beta"] = beta;
    return s;
}

Surface make_pl_family(double e, PlCase c, Rect domain) {
    switch (c) {
        case PlCase::classic: {
            if (!(e > 0.0 && e < 1.0)) throw ParameterError("classic family needs exponent in (0,1)");
            Surface s = make_monomial(1.0, e, 1.0 - e, domain);
            s.meta["case"] = 0;
            return s;
        }
        case PlCase::a_minus_b: {
            if (!(e > 1.0)) throw ParameterError("a_minus_b family needs exponent in (1,inf)");
            Surface s = make_monomial(-1.0, e, -(e - 1.0), domain);
            s.meta["case"] = 1;
            return s;
        }
        case PlCase::b_minus_a: {
            if (!(e < 0.0)) throw ParameterError("b_minus_a family needs exponent in (-inf,0)");
            Surface s = make_monomial(-1.0, -e, e + 1.0, domain);
            s.meta["case"] = 2;
            return s;
        }
        case PlCase::b_minus_a_positive: {
            if (!(e > 0.0)) throw ParameterError("b_minus_a_positive family needs exponent in (0,inf)");
            Surface s = make_monomial(-1.0, -e, e + 1.0, domain);
            s.meta["case"] = 3;
            return s;
        }
    }
    throw ParameterError("unknown family case");
}

Surface make_young(double p, double q, Rect domain) {
    if (p == 0.0 || q == 0.0) throw ParameterError("Young exponents must be nonzero");
    Surface s = make_monomial(1.0, 1.0 / p, 1.0 / q, domain);
    s.meta["p"] = p;
    s.meta["q"] = q;
    return s;
}

double young_value(double p, double q, Weights w) { return p * w.a * w.a + q * w.b * w.b; }

bool young_valid(double p, double q, Weights w) { return young_value(p, q, w) <= 1.0 + 1e-12; }

Surface make_minkowski(double p, double q, double r, Rect domain) {
    if (!(p > 0.0 && q > 0.0 && r > 0.0)) throw ParameterError("Minkowski parameters must be positive");
    auto fn = [p, q, r](double x, double y) {
        double ip = 1.0 / p, iq = 1.0 / q;
        double sx = ip * std::pow(x, ip - 1.0), sy = iq * std::pow(y, iq - 1.0);
        double sxx = ip * (ip - 1.0) * std::pow(x, ip - 2.0), syy = iq * (iq - 1.0) * std::pow(y, iq - 2.0);
        double s = std::pow(x, ip) + std::pow(y, iq);
        double f1 = r * std::pow(s, r - 1.0), f2 = r * (r - 1.0) * std::pow(s, r - 2.0);
        Jet j;
        j.h = std::pow(s, r);
        j.hx = f1 * sx;
        j.hy = f1 * sy;
        j.hxx = f2 * sx * sx + f1 * sxx;
        j.hyy = f2 * sy * sy + f1 * syy;
        j.hxy = f2 * sx * sy;
        return j;
    };
    Surface s("minkowski:p=" + num(p) + ",q=" + num(q) + ",r=" + num(r), domain, fn);
    s.meta["p"] = p;
    s.meta["q"] = q;
    s.meta["r"] = r;
    return s;
}

bool minkowski_valid(double p, double q, double r, Weights w) {
    if (!(p > 0.0 && p <= 1.0 && q > 0.0 && q <= 1.0 && r > 0.0)) return false;
    double m = w.a * std::sqrt(1.0 - p) + w.b * std::sqrt(1.0 - q);
    return r >= 1.0 - m * m - 1e-12;
}

Surface make_mp_mean(double p, Weights w, Rect domain) {
    if (!(p >= 1.0)) throw ParameterError("power mean needs p >= 1");
    if (std::abs(w.a + w.b - 1.0) > 1e-12) throw ParameterError("power mean needs a + b = 1");
    const double a = w.a, b = w.b;
    auto fn = [p, a, b](double x, double y) {
        double s = a * std::pow(x, p) + b * std::pow(y, p);
        double sx = a * p * std::pow(x, p - 1.0), sy = b * p * std::pow(y, p - 1.0);
        double sxx = a * p * (p - 1.0) * std::pow(x, p - 2.0), syy = b * p * (p - 1.0) * std::pow(y, p - 2.0);
        double r = 1.0 / p;
        double f1 = r * std::pow(s, r - 1.0), f2 = r * (r - 1.0) * std::pow(s, r - 2.0);
        Jet j;
        j.h = std::pow(s, r);
        j.hx = f1 * sx;
        j.hy = f1 * sy;
        j.hxx = f2 * sx * sx + f1 * sxx;
        j.hyy = f2 * sy * sy + f1 * syy;
        j.hxy = f2 * sx * sy;
        return j;
    };
    Surface s("mp:p=" + num(p) + ",a=" + num(a) + ",b=" + num(b), domain, fn);
    s.meta["p"] = p;
    s.meta["a"] = a;
    s.meta["b"] = b;
    return s;
}

Surface make_neg_quartic(Rect domain) {
    return Surface("quartic", domain, [](double x, double) {
        Jet j;
        j.h = -x * x * x * x;
        j.hx = -4.0 * x * x * x;
        j.hxx = -12.0 * x * x;
        return j;
    });
}

Surface make_quadratic(double cxx, double cxy, double cyy, Rect domain) {
    return Surface("quadratic", domain, [=](double x, double y) {
        Jet j;
        j.h = 0.5 * (cxx * x * x + 2.0 * cxy * x * y + cyy * y * y);
        j.hx = cxx * x + cxy * y;
        j.hy = cxy * x + cyy * y;
        j.hxx = cxx;
        j.hxy = cxy;
        j.hyy = cyy;
        return j;
    });
}

Surface make_max(const Surface& h1, const Surface& h2) {
    Rect d1 = h1.domain(), d2 = h2.domain();
    Rect d{std::max(d1.x0, d2.x0), std::min(d1.x1, d2.x1), std::max(d1.y0, d2.y0), std::min(d1.y1, d2.y1)};
    return Surface("max(" + h1.label() + "," + h2.label() + ")", d, [h1, h2](double x, double y) {
        Jet j1 = h1.jet(x, y), j2 = h2.jet(x, y);
        return j1.h >= j2.h ? j1 : j2;
    }).with_value([h1, h2](double x, double y) { return std::max(h1(x, y), h2(x, y)); });
}

// ---------------------------------------------------------------- ids

SurfaceId parse_surface_id(const std::string& id) {
    SurfaceId out;
    auto colon = id.find(':');
    out.family = id.substr(0, colon);
    if (out.family.empty()) throw ParameterError("surface id '" + id + "' has no family");
    if (colon == std::string::npos) return out;
    std::string rest = id.substr(colon + 1);
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParameterError("surface id '" + id + "': expected key=value, got '" + item + "'");
        std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        if (key == "case") {
            static const std::map<std::string, double> cases{
                {"classic", 0}, {"a_minus_b", 1}, {"b_minus_a", 2}, {"b_minus_a_positive", 3}};
            auto it = cases.find(val);
            if (it == cases.end()) throw ParameterError("surface id '" + id + "': unknown case '" + val + "'");
            out.params[key] = it->second;
            continue;
        }
        try {
            std::size_t used = 0;
            double v = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
            out.params[key] = v;
        } catch (const std::exception&) {
            throw ParameterError("surface id '" + id + "': value of '" + key + "' is not a number");
        }
    }
    return out;
}

namespace {

double need(const SurfaceId& s, const std::string& key) {
    auto it = s.params.find(key);
    if (it == s.params.end()) throw ParameterError("surface family '" + s.family + "' needs parameter '" + key + "'");
    return it->second;
}

double opt(const SurfaceId& s, const std::string& key, double fallback) {
    auto it = s.params.find(key);
    return it == s.params.end() ? fallback : it->second;
}

void only_keys(const SurfaceId& s, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : s.params) {
        bool ok = false;
        for (const char* allowed : keys) ok = ok || k == allowed;
        if (!ok) throw ParameterError("surface family '" + s.family + "' does not take parameter '" + k + "'");
    }
}

}  // namespace

std::optional<Weights> weights_in_id(const std::string& id) {
    SurfaceId s = parse_surface_id(id);
    if ((s.family == "ehrhard" || s.family == "mp") && s.params.count("a") && s.params.count("b"))
        return Weights{s.params.at("a"), s.params.at("b")};
    return std::nullopt;
}

Surface surface_from_id(const std::string& id, std::optional<Weights> weights) {
    SurfaceId s = parse_surface_id(id);
    if (auto embedded = weights_in_id(id); embedded && weights) {
        if (std::abs(embedded->a - weights->a) > 1e-12 || std::abs(embedded->b - weights->b) > 1e-12) {
            std::ostringstream os;
            os << "weights in surface id (" << embedded->a << "," << embedded->b << ") conflict with given weights ("
               << weights->a << "," << weights->b << ")";
            throw ParameterError(os.str());
        }
    }
    if (s.family == "ehrhard") {
        only_keys(s, {"a", "b", "inset"});
        Weights w = weights.value_or(Weights{opt(s, "a", 0.5), opt(s, "b", 0.5)});
        if (s.params.count("a")) w = {need(s, "a"), need(s, "b")};
        return make_ehrhard(w, opt(s, "inset", 0.01));
    }
    if (s.family == "pl") {
        only_keys(s, {"a", "case"});
        return make_pl_family(need(s, "a"), static_cast<PlCase>(static_cast<int>(opt(s, "case", 0))));
    }
    if (s.family == "young") {
        only_keys(s, {"p", "q"});
        return make_young(need(s, "p"), need(s, "q"));
    }
    if (s.family == "minkowski") {
        only_keys(s, {"p", "q", "r"});
        return make_minkowski(need(s, "p"), need(s, "q"), need(s, "r"));
    }
    if (s.family == "mp") {
        only_keys(s, {"p", "a", "b"});
        Weights w = weights.value_or(Weights{opt(s, "a", 0.5), opt(s, "b", 0.5)});
        if (s.params.count("a")) w = {need(s, "a"), need(s, "b")};
        return make_mp_mean(need(s, "p"), w);
    }
    if (s.family == "power") {
        only_keys(s, {"alpha"});
        double al = need(s, "alpha");
        return make_monomial(1.0, al, al);
    }
    if (s.family == "monomial") {
        only_keys(s, {"c", "alpha", "beta"});
        return make_monomial(opt(s, "c", 1.0), need(s, "alpha"), need(s, "beta"));
    }
    if (s.family == "quartic") {
        only_keys(s, {});
        return make_neg_quartic();
    }
    throw ParameterError("unknown surface family '" + s.family + "'");
}

std::vector<std::string> catalog_examples() {
    return {"ehrhard:a=0.5,b=0.5",       "ehrhard:a=0.3,b=0.7",   "pl:a=0.4,case=classic",
            "pl:a=2,case=a_minus_b",     "pl:a=-0.5,case=b_minus_a", "pl:a=0.5,case=b_minus_a_positive",
            "young:p=2,q=2",             "minkowski:p=1,q=1,r=1", "mp:p=2,a=0.5,b=0.5",
            "power:alpha=0.3",           "monomial:c=1,alpha=0.5,beta=0.5", "quartic"};
}

}  // namespace ehrhard
