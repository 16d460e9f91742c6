#include "divbound/vajda.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "divbound/convex.hpp"
#include "divbound/errors.hpp"
#include "divbound/util.hpp"

namespace divbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// psi_star is non-negative with minimum 0 at 0 and grows on both sides of its
// minimizing set. Finds the edge of {psi_star <= h} in the given direction by
// doubling then bisection; the right edge respects dom psi_star.
double sublevel_edge(const ScalarConvexFunction& psi_star, double h, int dir) {
  auto inside = [&](double x) { return psi_star(x) <= ExtReal(h); };
  double in = 0.0;
  double out = dir * 1.0;
  if (dir > 0 && psi_star.dom_hi().is_finite()) {
    const double edge = psi_star.dom_hi().value();
    if (inside(edge)) return edge;
    out = std::min(out, edge);
    if (out <= in) out = edge;
  }
  int guard = 0;
  while (inside(out) && guard++ < 80) {
    in = out;
    out *= 2;
    if (dir > 0 && psi_star.dom_hi().is_finite()) {
      out = std::min(out, psi_star.dom_hi().value());
      if (out == in) return in;
    }
    if (std::fabs(out) > 1e12) return out;
  }
  for (int i = 0; i < 200 && std::fabs(out - in) > 1e-13 * (1.0 + std::fabs(in)); ++i) {
    const double mid = 0.5 * (in + out);
    (inside(mid) ? in : out) = mid;
  }
  return in;
}

}  // namespace

double sublevel_width(const PhiSpec& spec, double h) {
  if (h < 0) throw BadParameter("sublevel_width: level must be >= 0");
  const double r = sublevel_edge(spec.psi_star, h, +1);
  const double l = sublevel_edge(spec.psi_star, h, -1);
  return r - l;
}

HeightValue height(const PhiSpec& spec, double w) {
  if (w < 0) throw BadParameter("height: width must be >= 0");
  const ScalarConvexFunction psi_star = spec.psi_star;
  if (w == 0.0) return {ExtReal(0.0), 0.0};

  // Flat-bottomed psi_star (kinked generators such as total variation) may
  // have a whole interval of equal-height shifts; minimize the max directly
  // and let the tie-break land on the midpoint.
  const bool flat_min = sublevel_width(spec, 0.0) > 1e-10;
  if (flat_min) {
    auto objective = [&psi_star, w](double lam) {
      return max(psi_star(lam + w / 2), psi_star(lam - w / 2));
    };
    MinimizeOptions mo;
    mo.tol = 1e-11 * (1.0 + w);
    const MinimizeResult r = minimize_1d(objective, -1.0 - w, 1.0 + w, mo);
    // Report the shift only when it genuinely equalizes the two branches.
    const ExtReal left = psi_star(r.argmin - w / 2);
    const ExtReal right = psi_star(r.argmin + w / 2);
    std::optional<double> lambda_w;
    if (left.is_finite() && right.is_finite() &&
        std::fabs(left.value() - right.value()) <=
            1e-6 * (1.0 + std::fabs(r.min.as_double()))) {
      lambda_w = r.argmin;
    }
    return {r.min, lambda_w};
  }

  // Equal-height equation: d(lambda) = psi_star(lambda + w/2) -
  // psi_star(lambda - w/2) is non-decreasing, negative for very negative
  // lambda and positive once the right branch climbs.
  auto diff = [&psi_star, w](double lam) -> ExtReal {
    const ExtReal hi = psi_star(lam + w / 2);
    const ExtReal lo = psi_star(lam - w / 2);
    if (hi.is_pos_inf()) return ExtReal::pos_inf();
    return hi - lo;
  };
  double lo = -w;
  int guard = 0;
  while (diff(lo) >= ExtReal(0.0) && guard++ < 100) lo = lo * 2 - 1;
  double hi;
  if (psi_star.dom_hi().is_finite()) {
    hi = psi_star.dom_hi().value() - w / 2;
    if (diff(hi) < ExtReal(0.0)) {
      // Right branch never catches up inside the domain: the best segment
      // leans on the domain edge.
      const ExtReal h_at = max(psi_star(hi + w / 2), psi_star(hi - w / 2));
      return {h_at, std::nullopt};
    }
  } else {
    hi = w;
    guard = 0;
    while (diff(hi) <= ExtReal(0.0) && guard++ < 100) hi = hi * 2 + 1;
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-13 * (1.0 + std::fabs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (diff(mid) < ExtReal(0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lambda_w = 0.5 * (lo + hi);
  const ExtReal h = max(psi_star(lambda_w + w / 2), psi_star(lambda_w - w / 2));
  return {h, lambda_w};
}

HeightCurve height_curve(const PhiSpec& spec, const std::vector<double>& w_grid) {
  HeightCurve curve;
  curve.spec_name = spec.name;
  curve.samples.resize(w_grid.size());
  parallel_for(w_grid.size(), [&](std::size_t i) {
    const HeightValue v = height(spec, w_grid[i]);
    curve.samples[i] = {w_grid[i], v.h, v.lambda_w};
  });
  return curve;
}

ExtReal vajda_bound(const PhiSpec& spec, double eps) {
  if (eps < 0) throw BadParameter("vajda_bound: eps must be >= 0");
  if (eps == 0.0) return ExtReal(0.0);
  const double s = eps / 2.0;

  // sup_w { s w - H(w) }: geometric sweep until the slope of H overtakes s,
  // then a golden-section polish around the best width.
  auto h_at = [&spec](double w) { return height(spec, w).h; };
  double best = 0.0, best_w = 0.0;
  double prev_w = 0.0;
  ExtReal prev_h(0.0);
  bool still_rising = true;
  int stalled = 0;
  double w = 1.0 / 64.0;
  for (int k = 0; k < 80; ++k) {
    const ExtReal h = h_at(w);
    if (!h.is_finite()) {
      still_rising = false;
      break;
    }
    const double obj = s * w - h.value();
    if (obj > best + 1e-12 * (1.0 + std::fabs(best))) {
      best = obj;
      best_w = w;
      stalled = 0;
    } else {
      if (obj > best) {
        best = obj;
        best_w = w;
      }
      if (++stalled >= 8) {  // objective plateaued: the supremum is attained
        still_rising = false;
        break;
      }
    }
    const double slope = (h.value() - prev_h.value()) / (w - prev_w);
    if (slope > s + 1e-12) {
      still_rising = false;
      break;
    }
    prev_w = w;
    prev_h = h;
    w *= 1.5;
    if (w > 1e7) break;
  }
  if (still_rising && w > 1e7) return ExtReal::pos_inf();

  auto neg = [&](double ww) -> ExtReal {
    if (ww < 0) return ExtReal::pos_inf();
    const ExtReal h = h_at(ww);
    if (!h.is_finite()) return ExtReal::pos_inf();
    return h - ExtReal(s * ww);
  };
  MinimizeOptions mo;
  mo.tol = 1e-9 * (1.0 + best_w);
  mo.hard_lo = 0.0;
  const MinimizeResult r = minimize_1d(neg, std::max(0.0, best_w / 2), best_w * 2 + 1.0, mo);
  if (r.min.is_finite()) best = std::max(best, -r.min.value());
  return ExtReal(std::max(best, 0.0));
}

PinskerKind pinsker_kind_from_string(const std::string& s) {
  if (s == "crude") return PinskerKind::Crude;
  if (s == "optimal") return PinskerKind::Optimal;
  if (s == "concave") return PinskerKind::Concave;
  throw BadParameter("pinsker kind must be crude|optimal|concave");
}

const char* to_string(PinskerKind k) {
  switch (k) {
    case PinskerKind::Crude: return "crude";
    case PinskerKind::Optimal: return "optimal";
    default: return "concave";
  }
}

namespace {

// phi'' via closed form when registered, otherwise Richardson-extrapolated
// central second differences. Returns +inf outside the domain interior, where
// the quadratic conditions hold vacuously.
class SecondDerivative {
 public:
  explicit SecondDerivative(const PhiSpec& spec) : spec_(spec) {}

  double at(double x) const {
    const double dom_lo =
        spec_.phi_at_zero.is_finite() ? -kInf : 0.0;  // phi(0) = inf means open at 0
    if (x <= dom_lo || !spec_.phi(x).is_finite()) return kInf;
    if (spec_.d2) {
      const double v = spec_.d2(x);
      return v < 0 ? kInf : v;
    }
    return numeric(x);
  }

  double numeric(double x) const {
    const auto second_diff = [&](double h) -> double {
      const ExtReal a = spec_.phi(x + h), b = spec_.phi(x), c = spec_.phi(x - h);
      if (!a.is_finite() || !b.is_finite() || !c.is_finite()) return kInf;
      return (a.value() - 2 * b.value() + c.value()) / (h * h);
    };
    const double h = 1e-4 * std::max(1.0, std::fabs(x));
    const double d_h = second_diff(h);
    const double d_h2 = second_diff(h / 2);
    const double d_h4 = second_diff(h / 4);
    if (!std::isfinite(d_h) || !std::isfinite(d_h2) || !std::isfinite(d_h4)) return kInf;
    // A kink makes the estimate diverge like 1/h (growth per halving >= ~1.4);
    // smooth generators stabilize. Oscillating signs also flag a kink.
    const double g1 = d_h2 / (std::fabs(d_h) + 1e-300);
    const double g2 = d_h4 / (std::fabs(d_h2) + 1e-300);
    if (g1 > 1.3 || g2 > 1.3 || (d_h > 0) != (d_h2 > 0) || (d_h2 > 0) != (d_h4 > 0)) {
      throw NotTwiceDifferentiable("second differences unstable");
    }
    return (4 * d_h4 - d_h2) / 3;
  }

 private:
  const PhiSpec& spec_;
};

double third_derivative_at_one(const PhiSpec& spec) {
  if (spec.d3) return spec.d3(1.0);
  auto d3_est = [&](double h) -> double {
    const auto f = [&](double x) { return spec.phi(x).value(); };
    return (f(1 + 2 * h) - 2 * f(1 + h) + 2 * f(1 - h) - f(1 - 2 * h)) / (2 * h * h * h);
  };
  const double a = d3_est(1e-3);
  const double b = d3_est(5e-4);
  if (!std::isfinite(a) || !std::isfinite(b) || std::fabs(b - a) > 0.5 * std::fabs(b) + 1e-2) {
    throw NotTwiceDifferentiable("third difference unstable at 1");
  }
  return (4 * b - a) / 3;
}

}  // namespace

PinskerReport pinsker_check(const PhiSpec& spec, PinskerKind kind,
                            const std::vector<double>& z_grid) {
  if (z_grid.empty()) throw BadParameter("pinsker_check: empty z grid");
  PinskerReport report;
  report.kind = kind;
  report.z_lo = z_grid.front();
  report.z_hi = z_grid.back();

  SecondDerivative d2(spec);
  const double c2 = spec.d2 ? spec.d2(1.0) : d2.numeric(1.0);
  if (!std::isfinite(c2) || c2 < 0) throw NotTwiceDifferentiable("phi''(1) unavailable");

  if (kind == PinskerKind::Crude) {
    report.constant = c2 / 8.0;
    // Verify monotonicity of phi'' across the grid (either direction).
    std::vector<double> vals;
    for (double z : z_grid) {
      const double v = d2.at(1.0 + z);
      if (std::isfinite(v)) vals.push_back(v);
    }
    bool nondec = true, noninc = true;
    for (std::size_t i = 1; i < vals.size(); ++i) {
      const double tol = 1e-9 * (1.0 + std::fabs(vals[i]));
      if (vals[i] < vals[i - 1] - tol) nondec = false;
      if (vals[i] > vals[i - 1] + tol) noninc = false;
    }
    report.holds = nondec || noninc;
    if (!report.holds) report.violating_z = z_grid.front();
    return report;
  }

  if (kind == PinskerKind::Optimal) {
    report.constant = c2 / 2.0;
    const double c3 = third_derivative_at_one(spec);
    report.holds = true;
    for (double z : z_grid) {
      const double r = 3.0 - z * c3 / c2;
      const double rhs = d2.at(1.0 + z);
      double lhs;
      if (r > 1e-12) {
        lhs = 27.0 * c2 / (r * r * r);
      } else if (r < -1e-12) {
        lhs = -kInf;  // negative cube: the condition is vacuous
      } else {
        lhs = kInf;  // needs phi''(1+z) = inf
      }
      const bool ok = std::isinf(rhs) ? true
                                      : (std::isinf(lhs) ? lhs < 0
                                                         : lhs <= rhs + 1e-9 * (1.0 + rhs));
      if (!ok) {
        report.holds = false;
        report.violating_z = z;
        break;
      }
    }
    return report;
  }

  // Concave: midpoint concavity of 1 / phi'' on consecutive grid pairs.
  report.constant = c2 / 2.0;
  report.holds = true;
  auto u = [&](double z) -> double {
    const double v = d2.at(1.0 + z);
    return std::isinf(v) ? 0.0 : 1.0 / v;
  };
  for (std::size_t i = 0; i + 1 < z_grid.size(); ++i) {
    const double a = z_grid[i], b = z_grid[i + 1];
    if (!spec.phi(1.0 + a).is_finite() || !spec.phi(1.0 + b).is_finite()) continue;
    const double mid = u(0.5 * (a + b));
    const double chord = 0.5 * (u(a) + u(b));
    if (mid < chord - 1e-9 * (1.0 + std::fabs(chord))) {
      report.holds = false;
      report.violating_z = 0.5 * (a + b);
      break;
    }
  }
  return report;
}

double kl_height_closed_form(double w) {
  if (w < 0) throw BadParameter("kl_height_closed_form: width must be >= 0");
  if (w < 1e-4) {
    const double w2 = w * w;
    return w2 / 8.0 - w2 * w2 / 576.0;
  }
  const double u = w / 2.0;
  const double coth_u = 1.0 + 2.0 / std::expm1(2.0 * u);
  // log(2 sinh(u) / w) = u + log(-expm1(-2u)) - log(w)
  const double log_term = u + std::log(-std::expm1(-2.0 * u)) - std::log(w);
  return -1.0 + u * coth_u + log_term;
}

HoeffdingBound hoeffding_bound(double m, double M, double t) {
  if (!(m < M)) throw DegenerateInterval("hoeffding_bound: need m < M");
  const double w = (M - m) * std::fabs(t);
  HoeffdingBound out;
  out.classical = w * w / 8.0;
  out.refined = w == 0.0 ? 0.0 : kl_height_closed_form(w);
  return out;
}

void write_height_csv(std::ostream& out, const HeightCurve& curve) {
  out << "w,H,lambda_w\n";
  for (const HeightSample& s : curve.samples) {
    out << fmt_g12(s.w) << "," << fmt_g12(s.h) << ","
        << (s.lambda_w ? fmt_g12(*s.lambda_w) : std::string("")) << "\n";
  }
}

std::string pinsker_report_json(const PinskerReport& report) {
  nlohmann::json j;
  j["kind"] = to_string(report.kind);
  j["holds"] = report.holds;
  j["constant"] = report.constant;
  if (report.violating_z) {
    j["violating_z"] = *report.violating_z;
  } else {
    j["violating_z"] = nullptr;
  }
  j["z_verified"] = {report.z_lo, report.z_hi};
  return j.dump();
}

}  // namespace divbound
