#include "divbound/convex.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "divbound/errors.hpp"
#include "divbound/util.hpp"

namespace divbound {

ScalarConvexFunction ScalarConvexFunction::closed_form(Eval eval, ExtReal dom_lo, ExtReal dom_hi,
                                                       Config cfg) {
  ScalarConvexFunction f;
  f.eval_ = std::move(eval);
  f.dom_lo_ = dom_lo;
  f.dom_hi_ = dom_hi;
  f.kind_ = FnKind::ClosedForm;
  f.slope_pos_ = cfg.slope_pos;
  f.slope_neg_ = cfg.slope_neg;
  f.subgrad_ = std::move(cfg.subgrad);
  f.conj_eval_ = std::move(cfg.conjugate_eval);
  f.conj_argmax_ = std::move(cfg.conjugate_argmax);
  return f;
}

ScalarConvexFunction ScalarConvexFunction::sampled(Eval eval, ExtReal dom_lo, ExtReal dom_hi) {
  ScalarConvexFunction f;
  f.eval_ = std::move(eval);
  f.dom_lo_ = dom_lo;
  f.dom_hi_ = dom_hi;
  f.kind_ = FnKind::Sampled;
  return f;
}

ExtReal ScalarConvexFunction::operator()(double x) const {
  if (ExtReal(x) < dom_lo_ || ExtReal(x) > dom_hi_) return ExtReal::pos_inf();
  return eval_(x);
}

SubgradInterval ScalarConvexFunction::subgrad(double x) const {
  if (subgrad_) return subgrad_(x);
  const ExtReal fx = (*this)(x);
  if (!fx.is_finite()) return {0.0, 0.0};
  const double scale = std::max(1.0, std::fabs(x));
  // Difference quotients at two step sizes, Richardson-combined. For a convex
  // function the one-sided quotients bracket the one-sided derivatives.
  auto quotient = [&](double h) -> SubgradInterval {
    const ExtReal fp = (*this)(x + h);
    const ExtReal fm = (*this)(x - h);
    const double up = fp.is_finite() ? (fp.value() - fx.value()) / h
                                     : std::numeric_limits<double>::infinity();
    const double dn = fm.is_finite() ? (fx.value() - fm.value()) / h
                                     : -std::numeric_limits<double>::infinity();
    return {dn, up};
  };
  const double h1 = 1e-6 * scale;
  const SubgradInterval a = quotient(h1);
  const SubgradInterval b = quotient(h1 / 2);
  auto extrap = [](double coarse, double fine) {
    if (!std::isfinite(coarse) || !std::isfinite(fine)) return fine;
    return 2 * fine - coarse;
  };
  double lo = extrap(a.lo, b.lo);
  double hi = extrap(a.hi, b.hi);
  // Collapse numerically indistinguishable kinks.
  if (std::isfinite(lo) && std::isfinite(hi) && hi - lo < 1e-5 * std::max(1.0, std::fabs(hi))) {
    lo = hi = 0.5 * (lo + hi);
  }
  return {lo, hi};
}

namespace {

// Largest finite magnitudes probed by the slope extrapolation.
constexpr double kSlopeProbeLimit = 1e12;

ExtReal numeric_slope(const ScalarConvexFunction& f, int side) {
  const double sgn = side >= 0 ? 1.0 : -1.0;
  // A bounded domain on this side forces f = +inf beyond it, so f(x)/x tends
  // to sgn * inf.
  if (side >= 0 && f.dom_hi().is_finite()) return ExtReal::pos_inf();
  if (side < 0 && f.dom_lo().is_finite()) return ExtReal::neg_inf();

  // Find a finite seed.
  double x0 = sgn;
  bool found = false;
  for (int k = 0; k < 60; ++k) {
    if (f(x0).is_finite()) {
      found = true;
      break;
    }
    x0 = (x0 + sgn) * 2;
  }
  if (!found) return side >= 0 ? ExtReal::pos_inf() : ExtReal::neg_inf();

  // Secant slopes on a geometric grid converge monotonically for convex f.
  // A non-contracting increment ratio means the limit is infinite; a
  // geometric tail is finished off with one Aitken step.
  std::vector<double> s;
  double x_prev = x0;
  ExtReal f_prev = f(x_prev);
  double x = x0 * 2 + sgn;
  for (int k = 0; k < 60 && std::fabs(x) < kSlopeProbeLimit; ++k) {
    const ExtReal fx = f(x);
    if (!fx.is_finite()) return side >= 0 ? ExtReal::pos_inf() : ExtReal::neg_inf();
    s.push_back((fx.value() - f_prev.value()) / (x - x_prev));
    x_prev = x;
    f_prev = fx;
    x *= 2;
    if (s.size() >= 2) {
      const double cur = s[s.size() - 1];
      const double prev = s[s.size() - 2];
      if (std::fabs(cur - prev) <= 1e-12 * std::max(1.0, std::fabs(cur))) return cur;
    }
  }
  const ExtReal diverged = side >= 0 ? ExtReal::pos_inf() : ExtReal::neg_inf();
  if (s.size() < 3) return s.empty() ? diverged : ExtReal(s.back());
  const double s0 = s[s.size() - 3], s1 = s[s.size() - 2], s2 = s[s.size() - 1];
  if (std::fabs(s2) > 1e12 || !std::isfinite(s2)) return diverged;
  const double d1 = s1 - s0, d2 = s2 - s1;
  if (std::fabs(d1) < 1e-300) return s2;
  const double q = d2 / d1;
  if (q >= 0.9) return diverged;  // increments not contracting
  const double denom = d2 - d1;
  double est = s2;
  if (std::fabs(denom) > 1e-300) est = s2 - d2 * d2 / denom;
  if (!std::isfinite(est)) return diverged;
  return est;
}

}  // namespace

ExtReal slope_at_infinity(const ScalarConvexFunction& f, int side) {
  if (const auto s = f.registered_slope(side)) return *s;
  return numeric_slope(f, side);
}

namespace {

struct Probe {
  double x;
  ExtReal v;
};

// Uniform scan used to seed golden section; returns index of the best probe.
std::vector<Probe> scan(const std::function<ExtReal(double)>& h, double lo, double hi, int n) {
  std::vector<Probe> p;
  p.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    p.push_back({x, h(x)});
  }
  return p;
}

std::size_t best_index(const std::vector<Probe>& p) {
  std::size_t b = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i].v < p[b].v) b = i;
  }
  return b;
}

}  // namespace

MinimizeResult minimize_1d(const std::function<ExtReal(double)>& h, double lo, double hi,
                           const MinimizeOptions& opts) {
  if (opts.hard_lo) lo = std::max(lo, *opts.hard_lo);
  if (opts.hard_hi) hi = std::min(hi, *opts.hard_hi);
  if (!(lo <= hi)) std::swap(lo, hi);
  if (hi - lo < opts.tol) {
    const double x = 0.5 * (lo + hi);
    return {x, min(h(x), min(h(lo), h(hi)))};
  }

  // Locate a finite value; refine the scan a few times before giving up.
  std::vector<Probe> probes;
  for (int n : {33, 129, 513}) {
    probes = scan(h, lo, hi, n);
    if (std::any_of(probes.begin(), probes.end(), [](const Probe& p) { return p.v.is_finite(); }))
      break;
  }
  std::size_t bi = best_index(probes);
  if (!probes[bi].v.is_finite()) throw AllInfinite("minimize_1d: no finite value on bracket");

  // Expand when the minimum sits at an unclamped scan edge.
  auto expand = [&](int dir) {
    double step = std::max(hi - lo, opts.tol);
    double edge = dir > 0 ? hi : lo;
    ExtReal edge_v = probes[bi].v;
    while (true) {
      double next = edge + dir * step;
      if (opts.hard_lo && next < *opts.hard_lo) next = *opts.hard_lo;
      if (opts.hard_hi && next > *opts.hard_hi) next = *opts.hard_hi;
      if (next == edge) return;  // pinned at a hard bound
      const ExtReal v = h(next);
      if (std::fabs(next - probes[bi].x) > opts.max_width) {
        if (v < edge_v) throw UnboundedBelow("minimize_1d: still decreasing at max width");
        if (dir > 0) hi = next; else lo = next;
        return;
      }
      if (dir > 0) hi = next; else lo = next;
      if (!(v < edge_v)) return;  // passed the minimum (or flat)
      edge = next;
      edge_v = v;
      step *= 2;
    }
  };
  const bool at_left = probes[bi].x <= lo + (hi - lo) * 1e-9;
  const bool at_right = probes[bi].x >= hi - (hi - lo) * 1e-9;
  if (at_left) expand(-1);
  if (at_right) expand(+1);

  // Golden-section; +inf compares as an ordered value. When both inner points
  // are infinite the domain lies strictly between them, so keep the middle.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - (b - a) * inv_phi;
  double d = a + (b - a) * inv_phi;
  ExtReal fc = h(c), fd = h(d);
  double best_x = probes[bi].x;
  ExtReal best_v = probes[bi].v;
  auto consider = [&](double x, ExtReal v) {
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  };
  consider(c, fc);
  consider(d, fd);
  for (int it = 0; it < 400 && (b - a) > opts.tol; ++it) {
    if (!fc.is_finite() && !fd.is_finite() && best_v < fc) {
      // Both probes infinite: the effective domain is an interval, so it
      // sits entirely on the side of the best finite point seen so far.
      if (best_x > d) {
        a = d;
      } else if (best_x < c) {
        b = c;
      } else {
        a = c;
        b = d;
      }
      c = b - (b - a) * inv_phi;
      d = a + (b - a) * inv_phi;
      fc = h(c);
      fd = h(d);
      consider(c, fc);
      consider(d, fd);
      continue;
    }
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * inv_phi;
      fc = h(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * inv_phi;
      fd = h(d);
      consider(d, fd);
    }
  }

  // Ties over a flat region resolve to the midpoint of the optimal interval.
  if (best_v.is_finite()) {
    const double flat_eps = 1e-12 * (1.0 + std::fabs(best_v.value()));
    const ExtReal cutoff = best_v + flat_eps;
    auto inside = [&](double x) { return h(x) <= cutoff; };
    auto edge_of_flat = [&](int dir) {
      double step = std::max(opts.tol, 1e-9 * std::max(1.0, std::fabs(best_x)));
      double in = best_x;
      double out = best_x + dir * step;
      if (opts.hard_lo) out = std::max(out, *opts.hard_lo);
      if (opts.hard_hi) out = std::min(out, *opts.hard_hi);
      int guard = 0;
      while (inside(out) && guard++ < 60) {
        in = out;
        step *= 2;
        double next = out + dir * step;
        if (opts.hard_lo && next < *opts.hard_lo) next = *opts.hard_lo;
        if (opts.hard_hi && next > *opts.hard_hi) next = *opts.hard_hi;
        if (next == out) return out;  // flat up to a hard bound
        out = next;
      }
      for (int i = 0; i < 60 && std::fabs(out - in) > opts.tol; ++i) {
        const double mid = 0.5 * (in + out);
        (inside(mid) ? in : out) = mid;
      }
      return in;
    };
    const double l = edge_of_flat(-1);
    const double r = edge_of_flat(+1);
    const double mid = 0.5 * (l + r);
    const ExtReal vm = h(mid);
    if (vm <= cutoff) {
      best_x = mid;
      best_v = min(best_v, vm);
    }
  }
  return {best_x, best_v};
}

namespace {

// Log-spaced coverage of [lo, hi]: dense near zero and near both edges.
std::vector<double> log_spaced_box(double lo, double hi, int n) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n) + 4);
  auto push = [&](double x) {
    if (x >= lo && x <= hi) xs.push_back(x);
  };
  push(lo);
  push(hi);
  if (lo < 0 && hi > 0) push(0.0);
  const int half = n / 2;
  const double mag = std::max(std::fabs(lo), std::fabs(hi));
  const double tiny = std::max(1e-9, mag * 1e-12);
  for (int i = 0; i < half; ++i) {
    const double m = tiny * std::pow(mag / tiny, static_cast<double>(i) / (half - 1));
    push(m);
    push(-m);
  }
  // A uniform backbone keeps gaps bounded even for skewed boxes.
  for (int i = 1; i < half; ++i) push(lo + (hi - lo) * static_cast<double>(i) / half);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

void convexity_spot_check(const ScalarConvexFunction& f, double lo, double hi) {
  Rng rng(0x5eedc0ffee115ull);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 40; ++trial) {
    const double a = rng.uniform(lo, hi);
    const double b = rng.uniform(lo, hi);
    const double th = rng.uniform(0.0, 1.0);
    const ExtReal fa = f(a), fb = f(b);
    if (!fa.is_finite() || !fb.is_finite()) continue;
    const ExtReal fm = f(th * a + (1 - th) * b);
    const double rhs = th * fa.value() + (1 - th) * fb.value();
    const double tol = 1e-7 * (1.0 + std::fabs(rhs));
    if (fm > ExtReal(rhs + tol)) {
      throw NonConvexInput("conjugate: convexity spot-check failed");
    }
    ++checked;
  }
}

}  // namespace

ConjugateResult conjugate(const ScalarConvexFunction& f, const GridPolicy& policy) {
  if (f.dom_hi() < f.dom_lo()) throw EmptyDomain("conjugate: empty domain");

  const ExtReal s_neg = slope_at_infinity(f, -1);
  const ExtReal s_pos = slope_at_infinity(f, +1);

  if (f.has_registered_conjugate()) {
    auto eval = [f](double y) { return f.registered_conjugate(y); };
    ScalarConvexFunction star = ScalarConvexFunction::closed_form(eval, s_neg, s_pos);
    std::function<double(double)> argmax;
    if (f.has_registered_argmax()) {
      argmax = [f](double y) { return f.registered_argmax(y); };
    } else {
      argmax = [](double) { return 0.0; };
    }
    return {std::move(star), std::move(argmax), ConjugateMethod::ClosedForm, s_neg, s_pos};
  }

  // Probe box for the sweep; expanded on demand by the evaluator.
  const double box_lo =
      f.dom_lo().is_finite() ? f.dom_lo().value() : -policy.span;
  const double box_hi = f.dom_hi().is_finite() ? f.dom_hi().value() : policy.span;
  if (!(box_lo <= box_hi)) throw EmptyDomain("conjugate: empty probe box");
  convexity_spot_check(f, box_lo, box_hi);
  {
    const auto xs = log_spaced_box(box_lo, box_hi, policy.coarse_points);
    if (std::none_of(xs.begin(), xs.end(), [&](double x) { return f(x).is_finite(); })) {
      throw EmptyDomain("conjugate: no finite value found on probe grid");
    }
  }

  auto sup_core = [f, policy, box_lo, box_hi](double y, double* argmax_out) -> ExtReal {
    double lo = box_lo, hi = box_hi;
    const bool open_lo = !f.dom_lo().is_finite();
    const bool open_hi = !f.dom_hi().is_finite();
    std::vector<double> round_bests;
    for (int expansions = 0;; ++expansions) {
      const auto xs = log_spaced_box(lo, hi, policy.coarse_points);
      double best_x = xs.front();
      ExtReal best = ExtReal::neg_inf();
      auto consider = [&](double x) {
        const ExtReal fx = f(x);
        if (!fx.is_finite()) return;
        const ExtReal v = ExtReal(x * y) - fx;
        if (v > best) {
          best = v;
          best_x = x;
        }
      };
      for (double x : xs) consider(x);
      if (!best.is_finite()) return ExtReal::pos_inf();

      const bool at_hi = open_hi && best_x >= hi - (hi - lo) * 1e-12;
      const bool at_lo = open_lo && best_x <= lo + (hi - lo) * 1e-12;
      if (at_hi || at_lo) {
        round_bests.push_back(best.value());
        if (expansions >= 8) {
          // Gains per 4x widening decide between a diverging supremum and a
          // constant attained only in the limit; geometric decay of the
          // gains is finished off by summing the tail.
          const auto n = round_bests.size();
          if (n < 3) return ExtReal::pos_inf();
          const double d1 = round_bests[n - 2] - round_bests[n - 3];
          const double d2 = round_bests[n - 1] - round_bests[n - 2];
          const double scale = 1.0 + std::fabs(best.value());
          if (d2 <= 1e-12 * scale) {
            if (argmax_out) *argmax_out = best_x;
            return best;  // already stalled
          }
          if (d1 <= 0 || d2 / d1 >= 0.9) return ExtReal::pos_inf();
          const double q = d2 / d1;
          if (argmax_out) *argmax_out = best_x;
          return best.value() + d2 * q / (1.0 - q);
        }
        const double width = hi - lo;
        if (at_hi) hi += 4 * width;
        if (at_lo) lo -= 4 * width;
        if (std::max(std::fabs(lo), std::fabs(hi)) > 1e12) return ExtReal::pos_inf();
        continue;
      }

      // Local refinement around the running maximizer.
      double span = (hi - lo) / (policy.coarse_points - 1);
      for (int round = 0; round < policy.refine_rounds; ++round) {
        const double rl = std::max(lo, best_x - span);
        const double rh = std::min(hi, best_x + span);
        for (int i = 0; i < policy.refine_points; ++i) {
          consider(rl + (rh - rl) * static_cast<double>(i) / (policy.refine_points - 1));
        }
        span = 2 * (rh - rl) / (policy.refine_points - 1);
      }
      if (policy.polish) {
        const double rl = std::max(lo, best_x - span);
        const double rh = std::min(hi, best_x + span);
        auto neg = [&](double x) -> ExtReal {
          const ExtReal fx = f(x);
          if (!fx.is_finite()) return ExtReal::pos_inf();
          return fx - ExtReal(x * y);
        };
        MinimizeOptions mo;
        mo.tol = 1e-11 * (1.0 + std::fabs(best_x));
        mo.hard_lo = lo;
        mo.hard_hi = hi;
        try {
          const MinimizeResult r = minimize_1d(neg, rl, rh, mo);
          if ((-r.min) > best) {
            best = -r.min;
            best_x = r.argmin;
          }
        } catch (const AllInfinite&) {
        }
      }
      if (argmax_out) *argmax_out = best_x;
      return best;
    }
  };

  auto sup_at = [sup_core](double y) { return sup_core(y, nullptr); };
  ScalarConvexFunction star = ScalarConvexFunction::sampled(sup_at, s_neg, s_pos);
  auto argmax = [sup_core](double y) {
    double xm = 0.0;
    sup_core(y, &xm);
    return xm;
  };
  return {std::move(star), std::move(argmax), ConjugateMethod::Numeric, s_neg, s_pos};
}

bool on_conjugate_boundary(const ConjugateResult& r, double y, double tol) {
  const ExtReal ey(y);
  if (r.dom_interior_lo.is_finite() &&
      std::fabs(y - r.dom_interior_lo.value()) <= tol) return true;
  if (r.dom_interior_hi.is_finite() &&
      std::fabs(y - r.dom_interior_hi.value()) <= tol) return true;
  return ey < r.dom_interior_lo || ey > r.dom_interior_hi;
}

}  // namespace divbound
