// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "divbound/bounds.hpp"
#include "divbound/cgf.hpp"
#include "divbound/divergence.hpp"
#include "divbound/measure.hpp"
#include "divbound/util.hpp"
#include "divbound/vajda.hpp"

using namespace divbound;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  int id;
  std::string name;
  std::function<Outcome()> fn;
};

PushforwardDist random_dist(Rng& rng, int max_atoms, double min_weight = 0.05) {
  const int n = 2 + static_cast<int>(rng.below(static_cast<std::size_t>(max_atoms - 1)));
  PushforwardDist d;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = rng.uniform(min_weight, 1.0);
    d.points.emplace_back(rng.uniform(-2.0, 2.0) + 0.35 * i, w);
    total += w;
  }
  for (auto& [x, w] : d.points) w /= total;
  std::sort(d.points.begin(), d.points.end());
  d.source = "random";
  return d;
}

struct Instance {
  DiscreteMeasure nu;
  FunctionOnSupport g;
  PushforwardDist dist;
};

Instance random_instance(Rng& rng, int max_atoms) {
  const int n = 2 + static_cast<int>(rng.below(static_cast<std::size_t>(max_atoms - 1)));
  std::vector<DiscreteMeasure::Atom> atoms;
  FunctionOnSupport g;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::string id = "p" + std::to_string(i);
    const double w = rng.uniform(0.08, 1.0);
    atoms.push_back({id, w});
    g.values[id] = rng.uniform(-2.0, 2.0) + 0.4 * i;
    total += w;
  }
  for (auto& a : atoms) a.weight /= total;
  PushforwardDist d;
  for (const auto& a : atoms) d.points.emplace_back(g.values[a.id], a.weight);
  std::sort(d.points.begin(), d.points.end());
  d.source = "random";
  return {DiscreteMeasure::probability(atoms, "u"), std::move(g), std::move(d)};
}

Outcome check_kl_closed_forms() {
  Rng rng(101);
  const PhiSpec kl = make_divergence("kl");
  PhiSpec generic = kl;
  generic.kl_fast_path = false;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const PushforwardDist d = random_dist(rng, 6, 0.02);
    const double m = d.mean();
    for (int ti = -5; ti <= 5; ++ti) {
      const double t = ti;
      double acc = 0.0;
      for (const auto& [x, w] : d.points) acc += w * std::exp(t * (x - m));
      const double closed = std::log(acc);
      const double numeric = cgf(CgfQuery(generic, d), t).k.value();
      worst = std::max(worst, std::fabs(closed - numeric));
    }
  }
  return {worst <= 1e-8, "worst |generic - closed| = " + fmt_g12(worst)};
}

Outcome check_figure_heights() {
  const PhiSpec kl = make_divergence("kl");
  const double h1 = height(kl, 1.0).h.value();
  const double h3 = height(kl, 3.0).h.value();
  bool pass = h1 >= 0.115 && h1 <= 0.125 && h3 >= 1.005 && h3 <= 1.015;
  double worst = 0.0;
  for (double w = 0.05; w <= 10.0; w += 0.05) {
    worst = std::max(worst,
                     std::fabs(height(kl, w).h.value() - kl_height_closed_form(w)));
  }
  pass = pass && worst <= 1e-8;
  std::ostringstream os;
  os << "H(1) = " << fmt_g12(h1) << ", H(3) = " << fmt_g12(h3)
     << ", closed-form mismatch " << fmt_g12(worst);
  return {pass, os.str()};
}

Outcome check_fht_formula() {
  const PhiSpec kl = make_divergence("kl");
  double worst = 0.0;
  for (double t : {0.25, 0.5, 1.0, 2.0, 3.0}) {
    const double sh = std::sinh(t);
    const double eps = 2.0 / std::tanh(t) - t / (sh * sh) - 1.0 / t;
    const double expected = std::log(t / sh) + t / std::tanh(t) - t * t / (sh * sh);
    const double got = vajda_bound(kl, eps).value();
    worst = std::max(worst, std::fabs(got - expected));
  }
  return {worst <= 1e-6, "worst |L(V(t)) - closed| = " + fmt_g12(worst)};
}

Outcome check_pinsker_constants() {
  const auto z_grid = make_grid(-1.0, 8.0, 0.01);
  bool pass = true;
  std::ostringstream os;
  for (double a : {-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0}) {
    const PhiSpec spec = make_divergence("alpha", a);
    const PinskerReport r = pinsker_check(spec, PinskerKind::Optimal, z_grid);
    if (!r.holds || std::fabs(r.constant - 0.5) > 1e-12) {
      pass = false;
      os << "optimal fails at alpha " << a << "; ";
      continue;
    }
    for (double eps = 0.0; eps <= 1.9 + 1e-9; eps += 0.1) {
      const double v = vajda_bound(spec, eps).as_double();
      if (v < 0.5 * eps * eps - 1e-6) {
        pass = false;
        os << "quadratic violated at alpha " << a << ", eps " << eps << "; ";
        break;
      }
    }
  }
  for (double a : {2.5, 3.0, 4.0}) {
    const PinskerReport r =
        pinsker_check(make_divergence("alpha", a), PinskerKind::Crude, z_grid);
    if (!r.holds || std::fabs(r.constant - 0.125) > 1e-12) {
      pass = false;
      os << "crude fails at alpha " << a << "; ";
    }
  }
  if (os.str().empty()) os << "optimal 1/2 on [-1,2], crude 1/8 on {2.5,3,4}";
  return {pass, os.str()};
}

Outcome check_hcr_tightness() {
  Rng rng(505);
  const PhiSpec chi2 = make_divergence("chi2");
  double worst_eq = 0.0;
  bool dominated = true;
  for (int trial = 0; trial < 20; ++trial) {
    PushforwardDist d = random_dist(rng, 4);
    while (d.variance() < 0.05) d = random_dist(rng, 4);
    const double sd = std::sqrt(d.variance());
    const CgfQuery q(chi2, d);
    const CgfCurve curve = cgf_curve(q, make_grid(-8.0, 8.0, 0.5));
    std::vector<double> eps_grid;
    for (double f : {0.05, 0.1, 0.15, 0.2}) eps_grid.push_back(f * sd);
    const double mean = d.mean();
    const double hi = d.max_x() - mean;
    for (double f : {0.3, 0.5, 0.7}) eps_grid.push_back(f * hi);
    const BoundCurve b = lower_bound_curve(q, curve, eps_grid);
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
      const double eps = eps_grid[i];
      const double L = b.samples[i].L.as_double();
      if (eps <= 0.2 * sd + 1e-12) {
        worst_eq = std::max(worst_eq, std::fabs(L - eps * eps / d.variance()));
      }
      if (L < hcr_bound(d, eps) - 1e-8) dominated = false;
    }
  }
  std::ostringstream os;
  os << "worst |L - eps^2/Var| = " << fmt_g12(worst_eq)
     << (dominated ? ", dominates everywhere" : ", domination VIOLATED");
  return {worst_eq <= 1e-6 && dominated, os.str()};
}

Outcome check_oracle_equivalence() {
  const std::vector<std::pair<std::string, std::optional<double>>> specs = {
      {"kl", std::nullopt},
      {"chi2", std::nullopt},
      {"squared_hellinger", std::nullopt},
      {"alpha", 1.5},
      {"jensen_shannon", std::nullopt}};
  double worst = 0.0;
  std::string worst_spec;
  for (const auto& [name, alpha] : specs) {
    const PhiSpec spec = make_divergence(name, alpha);
    Rng rng(606);
    for (int trial = 0; trial < 50; ++trial) {
      const Instance inst = random_instance(rng, 3);
      const double mean = inst.dist.mean();
      const double lo = inst.dist.min_x() - mean;
      const double hi = inst.dist.max_x() - mean;
      const double eps = rng.uniform(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo));
      const CgfQuery q(spec, inst.dist);
      const CgfCurve curve = cgf_curve(q, make_grid(-8.0, 8.0, 0.5));
      const BoundCurve b = lower_bound_curve(q, curve, {eps});
      const ExtReal oracle = oracle_lower_bound(spec, inst.nu, inst.g, eps);
      const double diff = std::fabs(b.samples[0].L.as_double() - oracle.as_double());
      if (diff > worst) {
        worst = diff;
        worst_spec = name;
      }
    }
  }
  std::ostringstream os;
  os << "5 specs x 50 instances, worst |conjugate - oracle| = " << fmt_g12(worst)
     << " (" << worst_spec << ")";
  return {worst <= 1e-4, os.str()};
}

Outcome check_dv_witness() {
  Rng rng(707);
  const PhiSpec kl = make_divergence("kl");
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(3));
    std::vector<DiscreteMeasure::Atom> ma, na;
    FunctionOnSupport witness;
    double sm = 0.0, sn = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::string id = "p" + std::to_string(i);
      const double wm = rng.uniform(0.05, 1.0);
      const double wn = rng.uniform(0.05, 1.0);
      ma.push_back({id, wm});
      na.push_back({id, wn});
      sm += wm;
      sn += wn;
    }
    for (auto& a : ma) a.weight /= sm;
    for (auto& a : na) a.weight /= sn;
    for (int i = 0; i < n; ++i) {
      witness.values[ma[i].id] = std::log(ma[i].weight / na[i].weight);
    }
    const auto mu = DiscreteMeasure::probability(ma, "u");
    const auto nu = DiscreteMeasure::probability(na, "u");
    worst = std::max(worst, std::fabs(variational_gap(kl, mu, nu, witness)));
  }
  return {worst <= 1e-10, "worst |gap| = " + fmt_g12(worst)};
}

Outcome check_hoeffding() {
  Rng rng(808);
  bool pass = true;
  for (int trial = 0; trial < 200; ++trial) {
    const double m = rng.uniform(-3.0, 2.0);
    const double M = m + rng.uniform(0.05, 5.0);
    const double t = rng.uniform(-4.0, 4.0);
    const HoeffdingBound b = hoeffding_bound(m, M, t);
    if (b.refined > b.classical + 1e-12) pass = false;
  }
  const HoeffdingBound small = hoeffding_bound(0.0, 1.0, 1e-3);
  const double ratio = small.refined / small.classical;
  pass = pass && std::fabs(ratio - 1.0) <= 1e-3;
  return {pass, "refined <= classical at 200 draws, ratio(1e-3) = " + fmt_g12(ratio)};
}

Outcome check_property_suites() {
  std::ostringstream os;
  bool pass = true;
  auto fail = [&](const std::string& what) {
    pass = false;
    os << what << "; ";
  };

  // psi_star invariants for every catalog generator.
  const std::vector<std::pair<std::string, std::optional<double>>> catalog = {
      {"kl", std::nullopt},          {"reverse_kl", std::nullopt},
      {"alpha", 1.5},                {"chi2", std::nullopt},
      {"squared_hellinger", std::nullopt}, {"jeffreys", std::nullopt},
      {"chi_alpha", 3.0},            {"total_variation", std::nullopt},
      {"jensen_shannon", std::nullopt},    {"triangular", std::nullopt}};
  for (const auto& [name, alpha] : catalog) {
    const PhiSpec spec = make_divergence(name, alpha);
    if (std::fabs(spec.psi_star(0.0).as_double()) > 1e-7) fail(name + ": psi*(0) != 0");
    for (double x = -6.0; x <= 6.0; x += 0.2) {
      const ExtReal v = spec.psi_star(x);
      if (!v.is_finite()) continue;
      if (v.value() < -1e-7) fail(name + ": psi* negative");
      if (x <= 0 && v.value() > -x + 1e-7) fail(name + ": psi* above -x");
    }
  }

  // Shift invariance and scaling covariance of the cumulant.
  Rng rng(909);
  const PhiSpec js = make_divergence("jensen_shannon");
  for (int trial = 0; trial < 10; ++trial) {
    const PushforwardDist d = random_dist(rng, 4);
    const double t = rng.uniform(-2.0, 2.0);
    const double c = rng.uniform(0.4, 2.0);
    const double base = cgf(CgfQuery(js, d), t).k.as_double();
    PushforwardDist shifted = d;
    for (auto& [x, w] : shifted.points) x += c;
    if (std::fabs(cgf(CgfQuery(js, shifted), t).k.as_double() - base) > 1e-10) {
      fail("shift invariance");
    }
    PushforwardDist scaled = d;
    for (auto& [x, w] : scaled.points) x *= c;
    const double cov = cgf(CgfQuery(js, d), c * t).k.as_double();
    if (std::fabs(cgf(CgfQuery(js, scaled), t).k.as_double() - cov) > 1e-10) {
      fail("scaling covariance");
    }
  }

  // Dagger symmetry of height curves.
  const std::vector<std::pair<PhiSpec, PhiSpec>> pairs = []() {
    std::vector<std::pair<PhiSpec, PhiSpec>> out;
    out.emplace_back(make_divergence("kl"), make_divergence("reverse_kl"));
    out.emplace_back(make_divergence("alpha", 1.5), make_divergence("alpha", -0.5));
    out.emplace_back(make_divergence("chi2"), csiszar_dual(make_divergence("chi2")));
    return out;
  }();
  for (const auto& [a, b] : pairs) {
    for (double w = 0.25; w <= 6.0; w += 0.25) {
      if (std::fabs(height(a, w).h.as_double() - height(b, w).h.as_double()) > 1e-8) {
        fail("dagger symmetry " + a.name);
        break;
      }
    }
  }

  // Data processing under random binnings, and joint convexity.
  auto random_prob = [&](int n) {
    std::vector<DiscreteMeasure::Atom> atoms;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = rng.uniform(0.02, 1.0);
      atoms.push_back({"p" + std::to_string(i), w});
      total += w;
    }
    for (auto& a : atoms) a.weight /= total;
    return DiscreteMeasure::probability(atoms, "u");
  };
  for (const auto& name : {"kl", "jensen_shannon", "total_variation"}) {
    const PhiSpec spec = make_divergence(name);
    for (int trial = 0; trial < 10; ++trial) {
      const auto mu = random_prob(4);
      const auto nu = random_prob(4);
      std::map<std::string, double> macc, nacc;
      for (int i = 0; i < 4; ++i) {
        const std::string bin = rng.below(2) == 0 ? "x" : "y";
        macc[bin] += mu.atoms()[i].weight;
        nacc[bin] += nu.atoms()[i].weight;
      }
      std::vector<DiscreteMeasure::Atom> mb, nb;
      for (const auto& [id, w] : macc) mb.push_back({id, w});
      for (const auto& [id, w] : nacc) nb.push_back({id, w});
      const double full = divergence(mu, nu, spec).value.as_double();
      const double merged =
          divergence(DiscreteMeasure::probability(mb, "u"),
                     DiscreteMeasure::probability(nb, "u"), spec)
              .value.as_double();
      if (merged > full + 1e-9) fail(std::string(name) + ": data processing");

      const auto mu2 = random_prob(4);
      const auto nu2 = random_prob(4);
      const double th = rng.uniform(0.0, 1.0);
      std::vector<DiscreteMeasure::Atom> mm, nn;
      for (int i = 0; i < 4; ++i) {
        mm.push_back({mu.atoms()[i].id,
                      th * mu.atoms()[i].weight + (1 - th) * mu2.atoms()[i].weight});
        nn.push_back({nu.atoms()[i].id,
                      th * nu.atoms()[i].weight + (1 - th) * nu2.atoms()[i].weight});
      }
      const double mixed =
          divergence(DiscreteMeasure::probability(mm, "u"),
                     DiscreteMeasure::probability(nn, "u"), spec)
              .value.as_double();
      const double rhs = th * full + (1 - th) * divergence(mu2, nu2, spec).value.as_double();
      if (mixed > rhs + 1e-9) fail(std::string(name) + ": joint convexity");
    }
  }

  // Subexponential probe smoke tests.
  if (subexponential_probe(CgfQuery(make_divergence("kl"),
                                    quadrature_dist(GaussianFamily{0.0, 1.0}, 20)))
          .classification != SubexpClass::LooksStronglySubexponential) {
    fail("probe: gaussian quadrature");
  }
  PushforwardDist rad;
  rad.points = {{-1.0, 0.5}, {1.0, 0.5}};
  rad.source = "probe";
  if (subexponential_probe(
          CgfQuery(make_divergence("total_variation"), rad,
                   std::pair{-1.0, std::numeric_limits<double>::infinity()}))
          .classification != SubexpClass::BoundedOnlyRegime) {
    fail("probe: bounded-only regime");
  }

  if (pass) os << "psi* grid, K shift/scale, dagger heights, binning, convexity, probes";
  return {pass, os.str()};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Check> checks = {
      {1, "KL closed forms (generic vs centered log-MGF, 1e-8)", check_kl_closed_forms},
      {2, "height reference values and closed form (1e-8)", check_figure_heights},
      {3, "tight TV bound matches the parametric closed form (1e-6)", check_fht_formula},
      {4, "Pinsker constants (optimal 1/2, crude 1/8)", check_pinsker_constants},
      {5, "HCR tightness for chi2 (1e-6 near zero)", check_hcr_tightness},
      {6, "conjugate bound vs brute-force oracle (1e-4)", check_oracle_equivalence},
      {7, "Donsker-Varadhan witness gap (1e-10)", check_dv_witness},
      {8, "Hoeffding refinement dominated by the quadratic", check_hoeffding},
      {9, "property suites (invariants, symmetry, processing)", check_property_suites},
  };
  int failures = 0;
  for (const auto& c : checks) {
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s — %s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), o.detail.c_str());
  }
  const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  std::printf("%d/%zu criteria passed in %.1fs\n", static_cast<int>(checks.size()) - failures,
              checks.size(), dt / 1000.0);
  return failures;
}
