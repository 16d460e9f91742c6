#include "divbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "divbound/errors.hpp"
#include "divbound/util.hpp"

namespace divbound {

const char* to_string(BoundProvenance p) {
  switch (p) {
    case BoundProvenance::ConjugateOfCgf: return "conjugate-of-cgf";
    case BoundProvenance::Oracle: return "oracle";
    default: return "closed-form";
  }
}

namespace {

struct FinitePoint {
  double t;
  double k;
};

// sup_t { t eps - K(t) } from samples, then two refinement rounds of fresh K
// evaluations bracketing the running maximizer, with outward expansion when
// the maximizer sits on the sampled edge.
ExtReal conjugate_at(const std::vector<FinitePoint>& pts, const CgfEvaluator& fresh_k,
                     double eps, bool* ran_off_edge) {
  double best_t = pts.front().t;
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](double t, ExtReal k) {
    if (!k.is_finite()) return;
    const double v = t * eps - k.value();
    if (v > best) {
      best = v;
      best_t = t;
    }
  };
  for (const FinitePoint& p : pts) consider(p.t, ExtReal(p.k));

  // Bracket around the best sample.
  double lo = pts.front().t, hi = pts.back().t;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].t == best_t) {
      lo = pts[i == 0 ? 0 : i - 1].t;
      hi = pts[std::min(pts.size() - 1, i + 1)].t;
      break;
    }
  }

  // Expand while the objective keeps improving on the sampled edge. Hitting
  // the expansion cap means t eps - K(t) grows without bound (eps beyond the
  // closure of the achievable deviations), so the supremum is +inf.
  if (ran_off_edge) *ran_off_edge = false;
  for (int dir : {-1, +1}) {
    if ((dir < 0 && best_t > pts.front().t) || (dir > 0 && best_t < pts.back().t)) continue;
    double step = std::max(1.0, hi - lo);
    double t = best_t;
    int moves = 0;
    while (moves < 48) {
      const double next = t + dir * step;
      const ExtReal k = fresh_k(next);
      const bool improves = k.is_finite() && next * eps - k.value() > best;
      // The maximizer sits between the last improving probe and the first
      // non-improving one, so the bracket always absorbs `next`.
      if (dir < 0) lo = std::min(lo, next);
      if (dir > 0) hi = std::max(hi, next);
      if (!improves) break;
      consider(next, k);
      t = next;
      step *= 2;
      ++moves;
    }
    if (moves >= 48) {
      if (ran_off_edge) *ran_off_edge = true;
      return ExtReal::pos_inf();
    }
  }

  for (int round = 0; round < 2; ++round) {
    const double l = std::max(lo, best_t - (hi - lo) / 2);
    const double h = std::min(hi, best_t + (hi - lo) / 2);
    const int n = 17;
    for (int i = 0; i < n; ++i) {
      const double t = l + (h - l) * static_cast<double>(i) / (n - 1);
      consider(t, fresh_k(t));
    }
    const double span = (h - l) / (n - 1);
    lo = best_t - span;
    hi = best_t + span;
  }
  // Final parabolic-free polish: golden section on the last bracket.
  {
    auto neg = [&](double t) -> ExtReal {
      const ExtReal k = fresh_k(t);
      if (!k.is_finite()) return ExtReal::pos_inf();
      return ExtReal(k.value() - t * eps);
    };
    MinimizeOptions mo;
    mo.tol = 1e-10 * (1.0 + std::fabs(best_t));
    mo.hard_lo = lo;  // the sweep above already located the maximizer
    mo.hard_hi = hi;
    try {
      const MinimizeResult r = minimize_1d(neg, lo, hi, mo);
      if (r.min.is_finite() && -r.min.value() > best) best = -r.min.value();
    } catch (const AllInfinite&) {
    } catch (const UnboundedBelow&) {
    }
  }
  if (best < 0 && best > -1e-9) best = 0.0;
  return best;
}

}  // namespace

BoundCurve conjugate_cgf_curve(const CgfCurve& curve, const CgfEvaluator& fresh_k,
                               const std::vector<double>& eps_grid,
                               std::optional<std::pair<double, double>> eps_interior) {
  std::vector<FinitePoint> pts;
  for (const CgfSample& s : curve.samples) {
    if (s.k.is_finite()) pts.push_back({s.t, s.k.value()});
  }
  if (pts.size() < 3) {
    throw InsufficientSamples("conjugate_cgf_curve: need at least 3 finite samples");
  }

  BoundCurve out;
  out.provenance = BoundProvenance::ConjugateOfCgf;
  out.spec_name = curve.spec_name;
  out.samples.resize(eps_grid.size());
  parallel_for(eps_grid.size(), [&](std::size_t i) {
    const double eps = eps_grid[i];
    bool off_edge = false;
    const ExtReal L = conjugate_at(pts, fresh_k, eps, &off_edge);
    bool boundary = off_edge;
    if (eps_interior) {
      const double tol = 1e-9 * (1.0 + std::fabs(eps));
      if (eps <= eps_interior->first + tol || eps >= eps_interior->second - tol) boundary = true;
    }
    out.samples[i] = {eps, L, boundary};
  });
  return out;
}

BoundCurve lower_bound_curve(const CgfQuery& query, const CgfCurve& curve,
                             const std::vector<double>& eps_grid) {
  const double mean = query.dist.mean();
  const std::pair<double, double> interior{query.range_lo() - mean, query.range_hi() - mean};
  auto fresh = [query](double t) { return cgf(query, t).k; };
  return conjugate_cgf_curve(curve, fresh, eps_grid, interior);
}

BoundCurve abs_lower_bound(const CgfQuery& query_plus, const CgfCurve& curve_plus,
                           const CgfQuery& query_minus, const CgfCurve& curve_minus,
                           const std::vector<double>& eps_grid) {
  for (double e : eps_grid) {
    if (e < 0) throw BadParameter("abs_lower_bound: eps grid must be non-negative");
  }
  const BoundCurve plus = lower_bound_curve(query_plus, curve_plus, eps_grid);
  const BoundCurve minus = lower_bound_curve(query_minus, curve_minus, eps_grid);
  BoundCurve out;
  out.provenance = BoundProvenance::ConjugateOfCgf;
  out.spec_name = curve_plus.spec_name;
  out.samples.resize(eps_grid.size());
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const bool use_plus = plus.samples[i].L <= minus.samples[i].L;
    out.samples[i] = use_plus ? plus.samples[i] : minus.samples[i];
  }
  return out;
}

CgfCurve ipm_cgf(const PhiSpec& spec, const std::vector<PushforwardDist>& dists,
                 const std::vector<double>& ts) {
  if (dists.empty()) throw BadParameter("ipm_cgf: empty family");
  std::vector<CgfCurve> members;
  members.reserve(dists.size());
  for (const PushforwardDist& d : dists) members.push_back(cgf_curve(CgfQuery(spec, d), ts));

  CgfCurve out;
  out.spec_name = spec.name;
  std::ostringstream digest;
  for (const CgfCurve& m : members) digest << m.dist_digest << ";";
  out.dist_digest = fnv1a_hex(digest.str());
  out.samples.resize(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CgfSample s{ts[i], ExtReal::neg_inf(), std::nullopt};
    for (const CgfCurve& m : members) {
      if (m.samples[i].k > s.k) {
        s.k = m.samples[i].k;
        s.lambda_opt = members.size() == 1 ? m.samples[i].lambda_opt : std::nullopt;
      }
    }
    out.samples[i] = s;
  }
  return out;
}

BoundCurve ipm_lower_bound(const PhiSpec& spec, const std::vector<PushforwardDist>& dists,
                           const std::vector<double>& ts, const std::vector<double>& eps_grid) {
  const CgfCurve curve = ipm_cgf(spec, dists, ts);
  std::vector<CgfQuery> queries;
  queries.reserve(dists.size());
  for (const PushforwardDist& d : dists) queries.emplace_back(spec, d);
  auto fresh = [queries](double t) {
    ExtReal k = ExtReal::neg_inf();
    for (const CgfQuery& q : queries) k = max(k, cgf(q, t).k);
    return k;
  };
  return conjugate_cgf_curve(curve, fresh, eps_grid);
}

namespace {

struct OracleProblem {
  std::vector<double> nu_w;  // support weights
  std::vector<double> g;     // g on support, plus the singular atom if present
  bool has_singular = false;
  double slope_inf = 0.0;  // only read when has_singular
  const PhiSpec* spec = nullptr;
  double target = 0.0;  // sum_i mu_i g_i must equal nu(g) + eps

  std::size_t dims() const { return g.size(); }

  // D(mu || nu) for a full coordinate vector (support masses + singular).
  ExtReal value(const std::vector<double>& v) const {
    ExtReal acc(0.0);
    for (std::size_t i = 0; i < nu_w.size(); ++i) {
      if (v[i] < 0) return ExtReal::pos_inf();
      acc += ExtReal(nu_w[i]) * spec->phi(v[i] / nu_w[i]);
      if (acc.is_pos_inf()) return acc;
    }
    if (has_singular) {
      const double m = v.back();
      if (m < 0) return ExtReal::pos_inf();
      acc += ExtReal(m) * ExtReal(slope_inf);
    }
    return acc;
  }
};

// Solves the two equality constraints for coordinates (ia, ib) given the
// others; returns false when the pair is degenerate or the solution is
// negative beyond rounding.
bool solve_pair(const OracleProblem& p, std::vector<double>& v, std::size_t ia, std::size_t ib) {
  double rest_mass = 0.0, rest_dot = 0.0;
  for (std::size_t i = 0; i < p.dims(); ++i) {
    if (i == ia || i == ib) continue;
    rest_mass += v[i];
    rest_dot += v[i] * p.g[i];
  }
  const double det = p.g[ib] - p.g[ia];
  if (std::fabs(det) < 1e-14) return false;
  const double m = 1.0 - rest_mass;           // v[ia] + v[ib]
  const double d = p.target - rest_dot;       // g[ia] v[ia] + g[ib] v[ib]
  const double vb = (d - p.g[ia] * m) / det;
  const double va = m - vb;
  if (va < -1e-12 || vb < -1e-12) return false;
  v[ia] = std::max(va, 0.0);
  v[ib] = std::max(vb, 0.0);
  return true;
}

}  // namespace

ExtReal oracle_lower_bound(const PhiSpec& spec, const DiscreteMeasure& nu,
                           const FunctionOnSupport& g, double eps, int support_cap,
                           std::optional<double> g_singular) {
  std::vector<double> w, gv;
  for (const auto& a : nu.atoms()) {
    if (a.weight <= 0) continue;
    w.push_back(a.weight);
    gv.push_back(g.at(a.id));
  }
  if (static_cast<int>(w.size()) > support_cap) {
    throw SupportTooLarge("oracle_lower_bound: support exceeds cap");
  }
  double nu_g = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) nu_g += w[i] * gv[i];

  OracleProblem p;
  p.nu_w = w;
  p.g = gv;
  p.spec = &spec;
  p.target = nu_g + eps;
  if (spec.slope_inf.is_finite()) {
    p.has_singular = true;
    p.slope_inf = spec.slope_inf.value();
    p.g.push_back(g_singular.value_or(*std::max_element(gv.begin(), gv.end())));
  }
  if (p.dims() > 4) {
    // Two coordinates are eliminated by the constraints; the grid search
    // handles at most two free ones.
    throw SupportTooLarge("oracle_lower_bound: support plus singular atom exceeds 4");
  }

  const std::size_t n = p.dims();
  // Pick the two solved coordinates with the widest g separation.
  std::size_t ia = 0, ib = 0;
  double best_sep = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sep = std::fabs(p.g[j] - p.g[i]);
      if (sep > best_sep) {
        best_sep = sep;
        ia = i;
        ib = j;
      }
    }
  }
  if (best_sep < 1e-14) {
    // g is constant: the mean constraint is satisfiable only at eps = 0.
    if (std::fabs(eps) < 1e-14) return 0.0;
    return ExtReal::pos_inf();
  }

  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != ia && i != ib) free_idx.push_back(i);
  }

  ExtReal best = ExtReal::pos_inf();
  std::vector<double> v(n, 0.0), best_v(n, 0.0);
  auto eval_at = [&](const std::vector<double>& free_vals) {
    for (std::size_t k = 0; k < free_idx.size(); ++k) v[free_idx[k]] = free_vals[k];
    if (!solve_pair(p, v, ia, ib)) return;
    const ExtReal d = p.value(v);
    if (d < best) {
      best = d;
      best_v = v;
    }
  };

  const int kGridPoints = 64;
  if (free_idx.empty()) {
    eval_at({});
  } else {
    std::vector<double> center(free_idx.size(), 0.5);
    double width = 1.0;
    for (int pass = 0; pass < 4; ++pass) {
      std::vector<double> free_vals(free_idx.size());
      if (free_idx.size() == 1) {
        for (int i = 0; i <= kGridPoints; ++i) {
          const double x = center[0] - width / 2 + width * i / kGridPoints;
          if (x < 0 || x > 1) continue;
          free_vals[0] = x;
          eval_at(free_vals);
        }
      } else {
        for (int i = 0; i <= kGridPoints; ++i) {
          const double x = center[0] - width / 2 + width * i / kGridPoints;
          if (x < 0 || x > 1) continue;
          for (int j = 0; j <= kGridPoints; ++j) {
            const double y = center[1] - width / 2 + width * j / kGridPoints;
            if (y < 0 || y > 1) continue;
            free_vals[0] = x;
            free_vals[1] = y;
            eval_at(free_vals);
          }
        }
      }
      if (!best.is_finite()) break;
      for (std::size_t k = 0; k < free_idx.size(); ++k) center[k] = best_v[free_idx[k]];
      width *= 3.0 / kGridPoints;
    }
  }
  return best;
}

double hcr_bound(const PushforwardDist& dist, double eps) {
  const double var = dist.variance();
  if (var <= 1e-14) throw ZeroVariance("hcr_bound: distribution has zero variance");
  return eps * eps / var;
}

bool subgaussian_certificate(const CgfCurve& curve, double sigma2) {
  for (const CgfSample& s : curve.samples) {
    if (!s.k.is_finite()) continue;
    if (s.k.value() > sigma2 * s.t * s.t / 2 + 1e-12) return false;
  }
  return true;
}

ExtReal subgaussian_sigma2_min(const CgfCurve& curve) {
  double worst = 0.0;
  for (const CgfSample& s : curve.samples) {
    if (s.t == 0.0) continue;
    if (!s.k.is_finite()) return ExtReal::pos_inf();
    worst = std::max(worst, 2.0 * s.k.value() / (s.t * s.t));
  }
  return worst;
}

void write_bound_csv(std::ostream& out, const BoundCurve& curve) {
  out << "eps,L,boundary,provenance\n";
  for (const BoundSample& s : curve.samples) {
    out << fmt_g12(s.eps) << "," << fmt_g12(s.L) << "," << (s.boundary ? 1 : 0) << ","
        << to_string(curve.provenance) << "\n";
  }
}

std::string bound_summary_json(const CgfCurve& cgf_curve, const BoundCurve& bound) {
  nlohmann::json j;
  j["spec"] = cgf_curve.spec_name;
  j["dist_digest"] = cgf_curve.dist_digest;
  const ExtReal s2 = subgaussian_sigma2_min(cgf_curve);
  j["subgaussian_sigma2_min"] = s2.is_finite() ? nlohmann::json(s2.value())
                                               : nlohmann::json("inf");
  j["rows"] = bound.samples.size();
  return j.dump();
}

}  // namespace divbound
