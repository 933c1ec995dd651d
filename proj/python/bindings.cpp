#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ehrhard/errors.hpp"
#include "ehrhard/gaussian.hpp"
#include "ehrhard/measure_lab.hpp"
#include "ehrhard/necessity.hpp"
#include "ehrhard/obstacle.hpp"
#include "ehrhard/pdi.hpp"
#include "ehrhard/supconv.hpp"
#include "ehrhard/surface.hpp"
#include "ehrhard/version.hpp"

namespace py = pybind11;
using namespace ehrhard;

namespace {

Weights to_weights(std::pair<double, double> w) { return {w.first, w.second}; }

GridFunction to_grid_function(const std::vector<double>& values, double lo, double hi) {
    if (values.size() < 2) throw ParameterError("a grid function needs at least two values");
    return GridFunction(Grid1D{lo, hi, static_cast<int>(values.size())}, values);
}

Measure measure_from(const std::string& name) {
    if (name == "standard") return Measure::standard(1);
    return to_measure(potential_by_name(name));
}

py::dict gap_dict(const GapResult& r) {
    py::dict d;
    d["lhs"] = r.lhs;
    d["rhs"] = r.rhs;
    d["gap"] = r.gap;
    d["quadrature_error"] = r.quadrature_error;
    d["f_mean"] = r.f_mean;
    d["g_mean"] = r.g_mean;
    d["extrapolated"] = r.extrapolated;
    return d;
}

py::tuple jet_tuple(const Jet& j) { return py::make_tuple(j.h, j.hx, j.hy, j.hxx, j.hxy, j.hyy); }

Jet to_jet(const std::array<double, 6>& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Numerical lab for Ehrhard-type functional inequalities";
    m.attr("__version__") = std::string(kVersion);

    auto param = py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<RegimeError>(m, "RegimeError", param.ptr());
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);
    py::register_exception<PrecisionError>(m, "PrecisionError", PyExc_RuntimeError);
    py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_RuntimeError);
    py::register_exception<DegeneratePointError>(m, "DegeneratePointError", PyExc_RuntimeError);

    m.def("normal_cdf", &normal_cdf);
    m.def("normal_quantile", &normal_quantile);
    m.def("regime", [](std::pair<double, double> w) { return to_string(to_weights(w).regime()); }, py::arg("weights"));
    m.def("elliptic_params", [](std::pair<double, double> w) { return elliptic_params(to_weights(w)); },
          py::arg("weights"));

    py::class_<Surface>(m, "Surface")
        .def(py::init([](const std::string& id) { return surface_from_id(id); }), py::arg("id"))
        .def_property_readonly("label", &Surface::label)
        .def_property_readonly("domain",
                               [](const Surface& s) {
                                   const Rect& r = s.domain();
                                   return py::make_tuple(r.x0, r.x1, r.y0, r.y1);
                               })
        .def("on", [](const Surface& s, double x0, double x1, double y0, double y1) { return s.on({x0, x1, y0, y1}); },
             py::arg("x0"), py::arg("x1"), py::arg("y0"), py::arg("y1"), "same surface on another domain")
        .def("__call__", [](const Surface& s, double x, double y) { return s(x, y); })
        .def("jet", [](const Surface& s, double x, double y) { return jet_tuple(s.jet(x, y)); },
             "(H, Hx, Hy, Hxx, Hxy, Hyy) at a point")
        .def("__repr__", [](const Surface& s) { return "<Surface " + s.label() + ">"; });
    m.def("surface", [](const std::string& id) { return surface_from_id(id); }, py::arg("id"));
    m.def("max_surface", &make_max);
    m.def("catalog", &catalog_examples);

    m.def("pdi_value",
          [](const Surface& s, std::pair<double, double> w, double x, double y) {
              return pdi_value(s, to_weights(w), x, y);
          },
          py::arg("surface"), py::arg("weights"), py::arg("x"), py::arg("y"));
    m.def("check_pdi",
          [](const Surface& s, std::pair<double, double> w, int nx, int ny, double tol) {
              PdiReport r = check_pdi_grid(s, to_weights(w), GridSpec{nx, ny, std::nullopt}, tol);
              py::dict d;
              d["feasible"] = r.feasible;
              d["min_value"] = r.min_value;
              d["argmin"] = py::make_tuple(r.arg_x, r.arg_y);
              d["samples"] = r.samples;
              d["violations"] = r.violations;
              d["degenerate"] = r.degenerate;
              return d;
          },
          py::arg("surface"), py::arg("weights"), py::arg("nx") = 200, py::arg("ny") = 200, py::arg("tol") = 1e-9);
    m.def("block_condition",
          [](const Surface& s, std::pair<double, double> w, double R, double x, double y, double alpha, double beta) {
              Weights ww = to_weights(w);
              BlockSmoothing sm = ww.regime() == Regime::parabolic ? BlockSmoothing::growth(alpha, beta)
                                                                   : BlockSmoothing::shift(1.0);
              BlockReport r = block_condition(s, ww, R, sm, x, y);
              py::dict d;
              d["ok"] = r.ok;
              d["failed_minor"] = r.failed_minor;
              d["minors"] = r.minors;
              return d;
          },
          py::arg("surface"), py::arg("weights"), py::arg("R"), py::arg("x"), py::arg("y"), py::arg("alpha") = 0.9,
          py::arg("beta") = 0.2);
    m.def("classify_homogeneous",
          [](const Surface& s) {
              HomogeneousFit f = classify_homogeneous(s);
              return py::make_tuple(to_string(f.cls), f.a, f.b);
          },
          py::arg("surface"));

    m.def("sup_convolve",
          [](const Surface& s, const std::vector<double>& f, const std::vector<double>& g, double lo, double hi,
             std::pair<double, double> w) {
              SupConvResult r = sup_convolve(s, to_grid_function(f, lo, hi), to_grid_function(g, lo, hi), to_weights(w));
              return py::make_tuple(r.h.grid().lo, r.h.grid().hi, r.h.values());
          },
          py::arg("surface"), py::arg("f"), py::arg("g"), py::arg("lo"), py::arg("hi"), py::arg("weights"),
          "sup over lines of H(f(x), g(y)); returns (lo, hi, values) of the output grid");
    m.def("inequality_gap",
          [](const Surface& s, const std::vector<double>& f, const std::vector<double>& g, double lo, double hi,
             std::pair<double, double> w, const std::string& measure) {
              return gap_dict(inequality_gap(s, to_grid_function(f, lo, hi), to_grid_function(g, lo, hi),
                                             to_weights(w), measure_from(measure)));
          },
          py::arg("surface"), py::arg("f"), py::arg("g"), py::arg("lo"), py::arg("hi"), py::arg("weights"),
          py::arg("measure") = "standard");
    m.def("lp_smoothed_lhs",
          [](const Surface& s, const std::vector<double>& f, const std::vector<double>& g, double lo, double hi,
             std::pair<double, double> w, double R, double alpha, double beta) {
              LpResult r = lp_smoothed_lhs(s, to_grid_function(f, lo, hi), to_grid_function(g, lo, hi),
                                           to_weights(w), R, alpha, beta);
              return py::make_tuple(r.value, r.normalized_value);
          },
          py::arg("surface"), py::arg("f"), py::arg("g"), py::arg("lo"), py::arg("hi"), py::arg("weights"),
          py::arg("R"), py::arg("alpha") = 0.9, py::arg("beta") = 0.2);

    m.def("psi_closed_form",
          [](std::array<double, 6> jet, double p, double q, double t) { return psi_closed_form(to_jet(jet), p, q, t); },
          py::arg("jet"), py::arg("p"), py::arg("q"), py::arg("t"));
    m.def("argmax_x0",
          [](std::array<double, 6> jet, double p, double q, double t) { return argmax_x0(to_jet(jet), p, q, t); },
          py::arg("jet"), py::arg("p"), py::arg("q"), py::arg("t"));
    m.def("find_counterexample",
          [](const Surface& s, std::pair<double, double> w, const std::string& family, long budget,
             std::uint64_t seed, const std::string& measure) -> py::object {
              SearchOptions o;
              o.budget = budget;
              o.seed = seed;
              SearchReport r = counterexample_search(s, to_weights(w), measure_from(measure), parse_family(family), o);
              py::dict d;
              d["evaluations"] = r.evaluations;
              d["best_ratio"] = r.best_ratio;
              d["found"] = r.found.has_value();
              if (r.found) {
                  d["gap"] = gap_dict(r.found->gap);
                  d["scale"] = r.found->scale;
                  d["params"] = r.found->params;
                  d["f"] = r.found->f.values();
                  d["g"] = r.found->g.values();
                  d["grid"] = py::make_tuple(r.found->f.grid().lo, r.found->f.grid().hi);
              }
              return std::move(d);
          },
          py::arg("surface"), py::arg("weights"), py::arg("family") = "perturbative", py::arg("budget") = 100000,
          py::arg("seed") = 1, py::arg("measure") = "standard");

    m.def("audit_measure",
          [](const std::string& potential) {
              AuditReport r = audit_measure(potential_by_name(potential));
              py::dict d;
              d["label"] = r.label;
              d["pass"] = r.pass;
              d["subadditive"] = r.subadditive_all;
              d["convex"] = r.convexity.has_value() && r.convexity->convex;
              if (r.convexity) {
                  d["convexity_witness"] = r.convexity->witness;
                  d["slopes"] = py::make_tuple(r.convexity->c_minus.value_or(NAN), r.convexity->c_plus.value_or(NAN));
              }
              d["rigidity"] = r.rigidity ? py::cast(r.rigidity->deviation) : py::none();
              py::list worst;
              for (const auto& [w, s] : r.subadditivity)
                  worst.append(py::make_tuple(w.a, w.b, s.worst_margin, s.witness_x, s.witness_y));
              d["subadditivity"] = worst;
              return d;
          },
          py::arg("potential"));

    m.def("solve_obstacle",
          [](int n, std::pair<double, double> w, const std::string& edges, int max_sweeps, double smoothing,
             bool abort_on_violation) {
              ObstacleProblem p;
              p.n = n;
              p.w = to_weights(w);
              if (edges == "frozen")
                  p.edges = EdgeMode::frozen;
              else if (edges == "pinned")
                  p.edges = EdgeMode::pinned;
              else
                  throw ParameterError("edges must be frozen or pinned");
              p.max_sweeps = max_sweeps;
              p.abort_on_violation = abort_on_violation;
              SolveResult r = solve(p, feasible_init(p, smoothing));
              py::array_t<double> grid({n, n});
              std::copy(r.surface.values().begin(), r.surface.values().end(), grid.mutable_data());
              py::dict d;
              d["surface"] = grid;
              d["sweeps"] = r.sweeps;
              d["converged"] = r.converged;
              d["aborted"] = r.aborted;
              d["center"] = r.surface.nearest(0.5, 0.5);
              d["worst_dominance"] = r.worst_dominance;
              d["first_violation"] = r.first_violation;
              return d;
          },
          py::arg("n") = 101, py::arg("weights") = std::make_pair(0.5, 0.5), py::arg("edges") = "frozen",
          py::arg("max_sweeps") = 100000, py::arg("smoothing") = 0.02, py::arg("abort_on_violation") = true);
}
