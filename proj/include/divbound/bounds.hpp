#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "divbound/cgf.hpp"
#include "divbound/divergence.hpp"
#include "divbound/measure.hpp"

namespace divbound {

enum class BoundProvenance { ConjugateOfCgf, Oracle, ClosedForm };

const char* to_string(BoundProvenance p);

struct BoundSample {
  double eps = 0.0;
  ExtReal L = ExtReal(0.0);
  bool boundary = false;  // eps at or beyond the edge of the achievable range
};

struct BoundCurve {
  std::vector<BoundSample> samples;
  BoundProvenance provenance = BoundProvenance::ConjugateOfCgf;
  std::string spec_name;
};

// L(eps) = sup_t { t eps - K(t) } over the curve's finite samples, sharpened
// by local refinement with fresh evaluations of K near the maximizing t.
// Values on the boundary of the achievable range are flagged, not asserted.
using CgfEvaluator = std::function<ExtReal(double)>;

BoundCurve conjugate_cgf_curve(const CgfCurve& curve, const CgfEvaluator& fresh_k,
                               const std::vector<double>& eps_grid,
                               std::optional<std::pair<double, double>> eps_interior =
                                   std::nullopt);

// Convenience wrapper: the evaluator and achievable range come from the query.
BoundCurve lower_bound_curve(const CgfQuery& query, const CgfCurve& curve,
                             const std::vector<double>& eps_grid);

// min{L_g(eps), L_g(-eps)} for eps >= 0, from the curves of g and -g.
BoundCurve abs_lower_bound(const CgfQuery& query_plus, const CgfCurve& curve_plus,
                           const CgfQuery& query_minus, const CgfCurve& curve_minus,
                           const std::vector<double>& eps_grid);

// Pointwise supremum of member cumulant curves; its conjugate is the best
// bound valid jointly across the family.
CgfCurve ipm_cgf(const PhiSpec& spec, const std::vector<PushforwardDist>& dists,
                 const std::vector<double>& ts);

BoundCurve ipm_lower_bound(const PhiSpec& spec, const std::vector<PushforwardDist>& dists,
                           const std::vector<double>& ts, const std::vector<double>& eps_grid);

// Brute-force constrained minimum of D(mu || nu) over probability vectors on
// nu's support (plus one synthetic singular atom when phi'(inf) is finite)
// with mu(g) - nu(g) = eps. Grid search over the free coordinates after
// eliminating the two linear constraints; +inf when infeasible.
ExtReal oracle_lower_bound(const PhiSpec& spec, const DiscreteMeasure& nu,
                           const FunctionOnSupport& g, double eps, int support_cap = 4,
                           std::optional<double> g_singular = std::nullopt);

// chi^2 bound eps^2 / Var(dist).
double hcr_bound(const PushforwardDist& dist, double eps);

// True iff K(t) <= sigma2 t^2 / 2 at every finite sample.
bool subgaussian_certificate(const CgfCurve& curve, double sigma2);

// Smallest sigma2 certified by the sampled curve; +inf when some K is
// infinite at t != 0.
ExtReal subgaussian_sigma2_min(const CgfCurve& curve);

void write_bound_csv(std::ostream& out, const BoundCurve& curve);
std::string bound_summary_json(const CgfCurve& cgf, const BoundCurve& bound);

}  // namespace divbound
