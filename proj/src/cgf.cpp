#include "divbound/cgf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "divbound/convex.hpp"
#include "divbound/errors.hpp"
#include "divbound/util.hpp"

namespace divbound {

CgfQuery::CgfQuery(PhiSpec s, PushforwardDist d, std::optional<std::pair<double, double>> ro)
    : spec(std::move(s)), dist(std::move(d)), range_override(ro) {
  if (dist.points.empty()) throw BadParameter("cgf: empty distribution");
  double total = 0.0;
  for (const auto& [x, w] : dist.points) {
    if (w < 0) throw BadParameter("cgf: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw BadParameter("cgf: weights must sum to 1");
  if (range_override) {
    if (range_override->first > dist.min_x() || range_override->second < dist.max_x()) {
      throw BadParameter("cgf: range override tighter than the support range");
    }
  }
}

double CgfQuery::range_lo() const {
  return range_override ? range_override->first : dist.min_x();
}
double CgfQuery::range_hi() const {
  return range_override ? range_override->second : dist.max_x();
}

namespace {

CgfValue kl_fast_path(const PushforwardDist& dist, double t) {
  const double m = dist.mean();
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& [x, w] : dist.points) {
    if (w > 0) shift = std::max(shift, t * (x - m));
  }
  double acc = 0.0;
  for (const auto& [x, w] : dist.points) {
    if (w > 0) acc += w * std::exp(t * (x - m) - shift);
  }
  const double k = std::log(acc) + shift;
  // Same lambda as the generic objective: the minimizer of
  // sum w e^{t x + lambda} - lambda is -log sum w e^{t x}.
  const double lambda = -(k + t * m);
  return {std::max(k, 0.0), lambda};
}

}  // namespace

CgfValue cgf(const CgfQuery& query, double t) {
  if (t == 0.0) return {ExtReal(0.0), 0.0};
  if (query.spec.kl_fast_path && !query.range_override) return kl_fast_path(query.dist, t);

  const double ess_sup_tg = t >= 0 ? t * query.range_hi() : t * query.range_lo();
  std::optional<double> lambda_max;
  if (query.spec.slope_inf.is_finite()) {
    if (std::isinf(ess_sup_tg)) return {ExtReal::pos_inf(), std::nullopt};
    lambda_max = query.spec.slope_inf.value() - ess_sup_tg;
  }

  const ScalarConvexFunction psi_star = query.spec.psi_star;
  const auto& pts = query.dist.points;
  auto objective = [&pts, &psi_star, t](double lam) -> ExtReal {
    ExtReal acc(0.0);
    for (const auto& [x, w] : pts) {
      if (w == 0.0) continue;
      acc += ExtReal(w) * psi_star(t * x + lam);
      if (acc.is_pos_inf()) return acc;
    }
    return acc;
  };

  const double spread = query.dist.max_x() - query.dist.min_x();
  const double center = -t * query.dist.mean();
  const double half = 4.0 * std::fabs(t) * spread + 1.0;
  double lo = center - half;
  double hi = center + half;
  if (lambda_max) {
    hi = std::min(hi, *lambda_max);
    if (lo > hi) lo = hi - 2.0 * half;
  }
  MinimizeOptions mo;
  mo.tol = 1e-10 * (1.0 + half);
  mo.max_width = 1e8 * (1.0 + half);
  mo.hard_hi = lambda_max;
  try {
    const MinimizeResult r = minimize_1d(objective, lo, hi, mo);
    if (!r.min.is_finite()) return {ExtReal::pos_inf(), std::nullopt};
    double k = r.min.value();
    if (k < 0 && k > -1e-9) k = 0.0;
    return {ExtReal(k), r.argmin};
  } catch (const AllInfinite&) {
    return {ExtReal::pos_inf(), std::nullopt};
  }
}

CgfCurve cgf_curve(const CgfQuery& query, const std::vector<double>& ts) {
  if (!std::is_sorted(ts.begin(), ts.end())) throw BadParameter("cgf_curve: grid must be sorted");
  if (std::none_of(ts.begin(), ts.end(), [](double t) { return t == 0.0; })) {
    throw BadParameter("cgf_curve: grid must contain 0");
  }
  CgfCurve curve;
  curve.spec_name = query.spec.name;
  curve.dist_digest = dist_digest(query.dist);
  curve.samples.resize(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    const CgfValue v = cgf(query, ts[i]);
    curve.samples[i] = {ts[i], v.k, v.lambda_opt};
  });
  return curve;
}

std::string dist_digest(const PushforwardDist& dist) {
  std::ostringstream os;
  for (const auto& [x, w] : dist.points) os << fmt_g12(x) << "," << fmt_g12(w) << ";";
  return fnv1a_hex(os.str());
}

const char* to_string(SubexpClass c) {
  switch (c) {
    case SubexpClass::LooksStronglySubexponential: return "looks-strongly-subexponential";
    case SubexpClass::LooksSubexponential: return "looks-subexponential";
    case SubexpClass::BoundedOnlyRegime: return "bounded-only-regime";
    default: return "inconclusive";
  }
}

SubexpReport subexponential_probe(const CgfQuery& query) {
  SubexpReport report;
  std::vector<double> grid;
  for (int k = -12; k <= 14; ++k) grid.push_back(std::ldexp(1.0, k));
  std::vector<double> ts;
  for (double g : grid) ts.push_back(-g);
  ts.push_back(0.0);
  ts.insert(ts.end(), grid.begin(), grid.end());
  std::sort(ts.begin(), ts.end());

  std::vector<char> finite(ts.size(), 0);
  parallel_for(ts.size(), [&](std::size_t i) {
    finite[i] = cgf(query, ts[i]).k.is_finite() ? 1 : 0;
  });
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (finite[i]) report.finite_ts.push_back(ts[i]);
  }
  double sym = 0.0;
  for (double g : grid) {
    const auto lo = std::find(ts.begin(), ts.end(), -g) - ts.begin();
    const auto hi = std::find(ts.begin(), ts.end(), g) - ts.begin();
    if (finite[static_cast<std::size_t>(lo)] && finite[static_cast<std::size_t>(hi)]) {
      sym = std::max(sym, g);
    } else {
      break;
    }
  }
  report.largest_symmetric_t = sym;

  const bool unbounded_override =
      query.range_override &&
      (std::isinf(query.range_override->first) || std::isinf(query.range_override->second));
  if (query.spec.slope_inf.is_finite() && unbounded_override) {
    report.classification = SubexpClass::BoundedOnlyRegime;
  } else if (!query.spec.slope_inf.is_finite() && !unbounded_override) {
    // Bounded support and phi'(inf) = inf: K is finite everywhere.
    report.classification = SubexpClass::LooksStronglySubexponential;
  } else if (report.finite_ts.size() == ts.size()) {
    report.classification = SubexpClass::LooksStronglySubexponential;
  } else if (sym > 0.0) {
    report.classification = SubexpClass::LooksSubexponential;
  } else if (report.finite_ts.size() <= 1) {
    report.classification = SubexpClass::BoundedOnlyRegime;
  } else {
    report.classification = SubexpClass::Inconclusive;
  }
  return report;
}

void write_cgf_csv(std::ostream& out, const CgfCurve& curve) {
  out << "t,K,lambda_opt,finite\n";
  for (const CgfSample& s : curve.samples) {
    out << fmt_g12(s.t) << "," << fmt_g12(s.k) << ","
        << (s.lambda_opt ? fmt_g12(*s.lambda_opt) : std::string(""))
        << "," << (s.k.is_finite() ? 1 : 0) << "\n";
  }
}

}  // namespace divbound
