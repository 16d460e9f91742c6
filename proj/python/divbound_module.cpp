#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "divbound/bounds.hpp"
#include "divbound/cgf.hpp"
#include "divbound/divergence.hpp"
#include "divbound/errors.hpp"
#include "divbound/measure.hpp"
#include "divbound/vajda.hpp"

namespace py = pybind11;
using namespace divbound;

namespace {

DiscreteMeasure measure_from_dict(const std::map<std::string, double>& weights,
                                  const std::string& universe) {
  std::vector<DiscreteMeasure::Atom> atoms;
  atoms.reserve(weights.size());
  for (const auto& [id, w] : weights) atoms.push_back({id, w});
  return DiscreteMeasure(std::move(atoms), universe);
}

FunctionOnSupport function_from_dict(const std::map<std::string, double>& values) {
  FunctionOnSupport g;
  g.values = std::map<std::string, double>(values.begin(), values.end());
  return g;
}

PushforwardDist dist_from_lists(const std::vector<double>& xs, const std::vector<double>& ws) {
  if (xs.size() != ws.size()) throw BadParameter("points and weights differ in length");
  PushforwardDist d;
  d.points.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) d.points.emplace_back(xs[i], ws[i]);
  std::sort(d.points.begin(), d.points.end());
  d.source = "python";
  return d;
}

}  // namespace

PYBIND11_MODULE(_divbound, m) {
  m.doc() = "Optimal divergence lower bounds from integral probability metrics";

  py::register_exception<Error>(m, "DivboundError");

  py::class_<PhiSpec>(m, "PhiSpec")
      .def_readonly("name", &PhiSpec::name)
      .def_property_readonly("alpha",
                             [](const PhiSpec& s) { return s.alpha; })
      .def_property_readonly("slope_inf",
                             [](const PhiSpec& s) { return s.slope_inf.as_double(); })
      .def("phi", [](const PhiSpec& s, double x) { return s.phi(x).as_double(); })
      .def("phi_star", [](const PhiSpec& s, double y) { return s.phi_star(y).as_double(); })
      .def("psi_star", [](const PhiSpec& s, double y) { return s.psi_star(y).as_double(); })
      .def("to_json", &phi_spec_to_json)
      .def("__repr__", [](const PhiSpec& s) { return "<PhiSpec " + s.name + ">"; });

  m.def("make_divergence", &make_divergence, py::arg("name"),
        py::arg("alpha") = std::nullopt);
  m.def("spec_from_json", &phi_spec_from_json, py::arg("text"));
  m.def("csiszar_dual", &csiszar_dual, py::arg("spec"));

  m.def(
      "divergence",
      [](const std::map<std::string, double>& mu, const std::map<std::string, double>& nu,
         const PhiSpec& spec) {
        const auto v =
            divergence(measure_from_dict(mu, "py"), measure_from_dict(nu, "py"), spec);
        return py::make_tuple(v.value.as_double(), v.continuous_part, v.singular_plus,
                              v.singular_minus);
      },
      py::arg("mu"), py::arg("nu"), py::arg("spec"),
      "Returns (value, continuous_part, singular_plus, singular_minus)");

  m.def(
      "restricted_conjugate",
      [](const PhiSpec& spec, const std::map<std::string, double>& nu,
         const std::map<std::string, double>& g, std::optional<double> range_hi) {
        const auto r = restricted_conjugate(spec, measure_from_dict(nu, "py"),
                                            function_from_dict(g), range_hi);
        return py::make_tuple(r.value, r.lambda_opt);
      },
      py::arg("spec"), py::arg("nu"), py::arg("g"), py::arg("range_hi") = std::nullopt);

  m.def(
      "variational_gap",
      [](const PhiSpec& spec, const std::map<std::string, double>& mu,
         const std::map<std::string, double>& nu, const std::map<std::string, double>& g) {
        return variational_gap(spec, measure_from_dict(mu, "py"), measure_from_dict(nu, "py"),
                               function_from_dict(g));
      },
      py::arg("spec"), py::arg("mu"), py::arg("nu"), py::arg("g"));

  m.def(
      "cgf",
      [](const PhiSpec& spec, const std::vector<double>& xs, const std::vector<double>& ws,
         double t, std::optional<std::pair<double, double>> range_override) {
        const CgfValue v = cgf(CgfQuery(spec, dist_from_lists(xs, ws), range_override), t);
        return py::make_tuple(v.k.as_double(), v.lambda_opt);
      },
      py::arg("spec"), py::arg("points"), py::arg("weights"), py::arg("t"),
      py::arg("range_override") = std::nullopt);

  m.def(
      "cgf_curve",
      [](const PhiSpec& spec, const std::vector<double>& xs, const std::vector<double>& ws,
         const std::vector<double>& ts, std::optional<std::pair<double, double>> range_override) {
        const CgfCurve c = cgf_curve(CgfQuery(spec, dist_from_lists(xs, ws), range_override), ts);
        std::vector<py::tuple> out;
        out.reserve(c.samples.size());
        for (const auto& s : c.samples) {
          out.push_back(py::make_tuple(s.t, s.k.as_double(), s.lambda_opt));
        }
        return out;
      },
      py::arg("spec"), py::arg("points"), py::arg("weights"), py::arg("ts"),
      py::arg("range_override") = std::nullopt);

  m.def(
      "lower_bound_curve",
      [](const PhiSpec& spec, const std::vector<double>& xs, const std::vector<double>& ws,
         const std::vector<double>& ts, const std::vector<double>& eps) {
        const CgfQuery q(spec, dist_from_lists(xs, ws));
        const BoundCurve b = lower_bound_curve(q, cgf_curve(q, ts), eps);
        std::vector<py::tuple> out;
        out.reserve(b.samples.size());
        for (const auto& s : b.samples) {
          out.push_back(py::make_tuple(s.eps, s.L.as_double(), s.boundary));
        }
        return out;
      },
      py::arg("spec"), py::arg("points"), py::arg("weights"), py::arg("ts"), py::arg("eps"));

  m.def(
      "oracle_lower_bound",
      [](const PhiSpec& spec, const std::map<std::string, double>& nu,
         const std::map<std::string, double>& g, double eps, int support_cap,
         std::optional<double> g_singular) {
        return oracle_lower_bound(spec, measure_from_dict(nu, "py"), function_from_dict(g), eps,
                                  support_cap, g_singular)
            .as_double();
      },
      py::arg("spec"), py::arg("nu"), py::arg("g"), py::arg("eps"), py::arg("support_cap") = 4,
      py::arg("g_singular") = std::nullopt);

  m.def(
      "hcr_bound",
      [](const std::vector<double>& xs, const std::vector<double>& ws, double eps) {
        return hcr_bound(dist_from_lists(xs, ws), eps);
      },
      py::arg("points"), py::arg("weights"), py::arg("eps"));

  m.def(
      "quadrature_dist",
      [](const std::string& family, double a, double b, int order) {
        QuadratureFamily fam;
        if (family == "gaussian") {
          fam = GaussianFamily{a, b};
        } else if (family == "gamma") {
          fam = GammaFamily{a, b};
        } else if (family == "uniform") {
          fam = UniformFamily{a, b};
        } else {
          throw BadFamily("family must be gaussian|gamma|uniform");
        }
        const PushforwardDist d = quadrature_dist(fam, order);
        std::vector<double> xs, ws;
        for (const auto& [x, w] : d.points) {
          xs.push_back(x);
          ws.push_back(w);
        }
        return py::make_tuple(xs, ws);
      },
      py::arg("family"), py::arg("a"), py::arg("b"), py::arg("order"));

  m.def("sublevel_width", &sublevel_width, py::arg("spec"), py::arg("h"));
  m.def(
      "height",
      [](const PhiSpec& spec, double w) {
        const HeightValue v = height(spec, w);
        return py::make_tuple(v.h.as_double(), v.lambda_w);
      },
      py::arg("spec"), py::arg("w"));
  m.def(
      "vajda_bound",
      [](const PhiSpec& spec, double eps) { return vajda_bound(spec, eps).as_double(); },
      py::arg("spec"), py::arg("eps"));
  m.def(
      "pinsker_check",
      [](const PhiSpec& spec, const std::string& kind, const std::vector<double>& z_grid) {
        const PinskerReport r = pinsker_check(spec, pinsker_kind_from_string(kind), z_grid);
        py::dict d;
        d["kind"] = to_string(r.kind);
        d["holds"] = r.holds;
        d["constant"] = r.constant;
        d["violating_z"] = r.violating_z ? py::cast(*r.violating_z) : py::none();
        return d;
      },
      py::arg("spec"), py::arg("kind"), py::arg("z_grid"));
  m.def(
      "hoeffding_bound",
      [](double lo, double hi, double t) {
        const HoeffdingBound b = hoeffding_bound(lo, hi, t);
        return py::make_tuple(b.refined, b.classical);
      },
      py::arg("m"), py::arg("M"), py::arg("t"), "Returns (refined, classical)");
}
