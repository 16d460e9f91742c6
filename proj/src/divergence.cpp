#include "divbound/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "divbound/errors.hpp"
#include "divbound/util.hpp"

namespace divbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

// Core of the alpha family, normalized so phi(1) = 0 and phi'(1) = 0:
//   phi_a(x) = (x^a - a(x-1) - 1) / (a(a-1)),  with the KL / reverse-KL
// limits at a = 1 and a = 0. The whole family shares phi''(x) = x^(a-2).
struct AlphaCore {
  double a = 1.0;

  ExtReal phi(double x) const {
    if (x < 0) return ExtReal::pos_inf();
    if (a == 1.0) return xlogx(x) - x + 1.0;
    if (a == 0.0) return x == 0.0 ? ExtReal::pos_inf() : ExtReal(x - 1.0 - std::log(x));
    if (x == 0.0) return a > 0 ? ExtReal(1.0 / a) : ExtReal::pos_inf();
    return (std::pow(x, a) - a * (x - 1.0) - 1.0) / (a * (a - 1.0));
  }

  ExtReal slope_inf() const { return a >= 1.0 ? ExtReal::pos_inf() : ExtReal(1.0 / (1.0 - a)); }

  // Conjugate of the restriction to x >= 0.
  ExtReal phi_star(double y) const {
    if (a == 1.0) return std::expm1(y);
    if (a == 0.0) return y < 1.0 ? ExtReal(-std::log1p(-y)) : ExtReal::pos_inf();
    const double s = 1.0 + (a - 1.0) * y;
    if (a > 1.0) {
      if (s <= 0.0) return -1.0 / a;
      return (std::pow(s, a / (a - 1.0)) - 1.0) / a;
    }
    // a < 1, a != 0: domain ends at y = 1/(1-a) where s hits 0.
    if (a > 0.0) {
      if (s <= 0.0) return ExtReal::pos_inf();
      return (std::pow(s, a / (a - 1.0)) - 1.0) / a;
    }
    if (s < 0.0) return ExtReal::pos_inf();
    if (s == 0.0) return -1.0 / a;
    return (std::pow(s, a / (a - 1.0)) - 1.0) / a;
  }

  double argmax(double y) const {
    if (a == 1.0) return std::exp(y);
    if (a == 0.0) return y < 1.0 ? 1.0 / (1.0 - y) : 1e300;
    const double s = 1.0 + (a - 1.0) * y;
    if (s <= 0.0) return a > 1.0 ? 0.0 : 1e300;
    return std::pow(s, 1.0 / (a - 1.0));
  }

  double d1(double x) const {
    if (a == 1.0) return std::log(x);
    if (a == 0.0) return 1.0 - 1.0 / x;
    return (std::pow(x, a - 1.0) - 1.0) / (a - 1.0);
  }
  double d2(double x) const { return std::pow(x, a - 2.0); }
  double d3(double x) const { return (a - 2.0) * std::pow(x, a - 3.0); }
};

ScalarConvexFunction wrap_phi(std::function<ExtReal(double)> eval, ExtReal dom_lo,
                              ExtReal slope_inf, ScalarConvexFunction::Config cfg) {
  cfg.slope_pos = slope_inf;
  cfg.slope_neg = ExtReal::neg_inf();  // restricted generators are +inf below 0
  return ScalarConvexFunction::closed_form(std::move(eval), dom_lo, ExtReal::pos_inf(),
                                           std::move(cfg));
}

ScalarConvexFunction wrap_phi_star(std::function<ExtReal(double)> eval, ExtReal slope_inf,
                                   std::function<ExtReal(double)> biconj) {
  ScalarConvexFunction::Config cfg;
  cfg.slope_neg = ExtReal(0.0);  // inf dom of the restricted generator
  cfg.slope_pos = ExtReal::pos_inf();
  cfg.conjugate_eval = std::move(biconj);
  return ScalarConvexFunction::closed_form(std::move(eval), ExtReal::neg_inf(), slope_inf,
                                           std::move(cfg));
}

ScalarConvexFunction wrap_psi_star(std::function<ExtReal(double)> eval, ExtReal slope_inf,
                                   std::function<ExtReal(double)> psi) {
  ScalarConvexFunction::Config cfg;
  cfg.slope_neg = ExtReal(-1.0);  // dom psi starts at -1
  cfg.slope_pos = ExtReal::pos_inf();
  cfg.conjugate_eval = std::move(psi);
  return ScalarConvexFunction::closed_form(std::move(eval), ExtReal::neg_inf(), slope_inf,
                                           std::move(cfg));
}

PhiSpec from_alpha_core(const AlphaCore& core, std::string name) {
  PhiSpec spec;
  spec.name = std::move(name);
  spec.alpha = core.a;
  spec.slope_inf = core.slope_inf();
  spec.phi_at_zero = core.phi(0.0);
  spec.kl_fast_path = core.a == 1.0;
  spec.closed_form_conjugate = true;
  spec.d1 = [core](double x) { return core.d1(x); };
  spec.d2 = [core](double x) { return core.d2(x); };
  spec.d3 = [core](double x) { return core.d3(x); };

  ScalarConvexFunction::Config phi_cfg;
  phi_cfg.subgrad = [core](double x) -> SubgradInterval {
    const double d = core.d1(x);
    return {d, d};
  };
  phi_cfg.conjugate_eval = [core](double y) { return core.phi_star(y); };
  phi_cfg.conjugate_argmax = [core](double y) { return core.argmax(y); };
  spec.phi = wrap_phi([core](double x) { return core.phi(x); }, ExtReal(0.0), spec.slope_inf,
                      std::move(phi_cfg));

  auto phi_eval = [core](double x) { return core.phi(x); };
  spec.phi_star = wrap_phi_star([core](double y) { return core.phi_star(y); }, spec.slope_inf,
                                phi_eval);
  spec.psi_star = wrap_psi_star([core](double y) { return core.phi_star(y) - ExtReal(y); },
                                spec.slope_inf,
                                [core](double x) { return core.phi(x + 1.0); });
  return spec;
}

// c * phi for c > 0; conjugates rescale as (c f)^*(y) = c f^*(y / c).
PhiSpec scale_spec(const PhiSpec& base, double c, std::string name) {
  PhiSpec spec;
  spec.name = std::move(name);
  spec.alpha = base.alpha;
  spec.slope_inf = ExtReal(c) * base.slope_inf;
  spec.phi_at_zero = ExtReal(c) * base.phi_at_zero;
  spec.kl_fast_path = false;
  spec.closed_form_conjugate = base.closed_form_conjugate;
  if (base.d1) spec.d1 = [base, c](double x) { return c * base.d1(x); };
  if (base.d2) spec.d2 = [base, c](double x) { return c * base.d2(x); };
  if (base.d3) spec.d3 = [base, c](double x) { return c * base.d3(x); };

  const ScalarConvexFunction phi0 = base.phi;
  const ScalarConvexFunction ps0 = base.phi_star;
  ScalarConvexFunction::Config phi_cfg;
  phi_cfg.subgrad = [phi0, c](double x) {
    const SubgradInterval s = phi0.subgrad(x);
    return SubgradInterval{c * s.lo, c * s.hi};
  };
  phi_cfg.conjugate_eval = [ps0, c](double y) { return ExtReal(c) * ps0(y / c); };
  if (phi0.has_registered_argmax()) {
    phi_cfg.conjugate_argmax = [phi0, c](double y) { return phi0.registered_argmax(y / c); };
  }
  spec.phi = wrap_phi([phi0, c](double x) { return ExtReal(c) * phi0(x); }, phi0.dom_lo(),
                      spec.slope_inf, std::move(phi_cfg));
  spec.phi_star = wrap_phi_star([ps0, c](double y) { return ExtReal(c) * ps0(y / c); },
                                spec.slope_inf,
                                [phi0, c](double x) { return ExtReal(c) * phi0(x); });
  spec.psi_star = wrap_psi_star(
      [ps0, c](double y) { return ExtReal(c) * ps0(y / c) - ExtReal(y); }, spec.slope_inf,
      [phi0, c](double x) { return ExtReal(c) * phi0(x + 1.0); });
  return spec;
}

PhiSpec make_total_variation() {
  PhiSpec spec;
  spec.name = "total_variation";
  spec.slope_inf = 1.0;
  spec.phi_at_zero = 1.0;
  spec.closed_form_conjugate = true;

  auto phi_eval = [](double x) -> ExtReal {
    return x < 0 ? ExtReal::pos_inf() : ExtReal(std::fabs(x - 1.0));
  };
  auto star_eval = [](double y) -> ExtReal {
    if (y > 1.0) return ExtReal::pos_inf();
    return y < -1.0 ? ExtReal(-1.0) : ExtReal(y);
  };
  ScalarConvexFunction::Config phi_cfg;
  phi_cfg.subgrad = [](double x) -> SubgradInterval {
    if (std::fabs(x - 1.0) < 1e-12) return {-1.0, 1.0};
    return x > 1.0 ? SubgradInterval{1.0, 1.0} : SubgradInterval{-1.0, -1.0};
  };
  phi_cfg.conjugate_eval = star_eval;
  phi_cfg.conjugate_argmax = [](double y) { return y < -1.0 ? 0.0 : 1.0; };
  spec.phi = wrap_phi(phi_eval, ExtReal(0.0), spec.slope_inf, std::move(phi_cfg));
  spec.phi_star = wrap_phi_star(star_eval, spec.slope_inf, phi_eval);
  spec.psi_star = wrap_psi_star(
      [](double y) -> ExtReal {
        if (y > 1.0) return ExtReal::pos_inf();
        return y < -1.0 ? ExtReal(-1.0 - y) : ExtReal(0.0);
      },
      spec.slope_inf, [phi_eval](double x) { return phi_eval(x + 1.0); });
  return spec;
}

PhiSpec make_jensen_shannon() {
  PhiSpec spec;
  spec.name = "jensen_shannon";
  const double log2 = std::log(2.0);
  spec.slope_inf = log2;
  spec.phi_at_zero = log2;
  spec.closed_form_conjugate = true;
  spec.d1 = [](double x) { return std::log(2.0 * x / (1.0 + x)); };
  spec.d2 = [](double x) { return 1.0 / (x * (1.0 + x)); };
  spec.d3 = [](double x) { return -1.0 / (x * x) + 1.0 / ((1.0 + x) * (1.0 + x)); };

  auto phi_eval = [](double x) -> ExtReal {
    if (x < 0) return ExtReal::pos_inf();
    return xlogx(x) - (1.0 + x) * std::log((1.0 + x) / 2.0);
  };
  auto star_eval = [log2](double y) -> ExtReal {
    if (y >= log2) return ExtReal::pos_inf();
    // -log(2 - e^y) = -log 2 - log(1 - e^{y - log 2}), stable near the edge
    return -log2 - std::log(-std::expm1(y - log2));
  };
  ScalarConvexFunction::Config phi_cfg;
  phi_cfg.subgrad = [spec_d1 = spec.d1](double x) -> SubgradInterval {
    const double d = spec_d1(x);
    return {d, d};
  };
  phi_cfg.conjugate_eval = star_eval;
  phi_cfg.conjugate_argmax = [](double y) {
    const double e = std::exp(y);
    return e < 2.0 ? e / (2.0 - e) : 1e300;
  };
  spec.phi = wrap_phi(phi_eval, ExtReal(0.0), spec.slope_inf, std::move(phi_cfg));
  spec.phi_star = wrap_phi_star(star_eval, spec.slope_inf, phi_eval);
  spec.psi_star = wrap_psi_star(
      [star_eval](double y) { return star_eval(y) - ExtReal(y); }, spec.slope_inf,
      [phi_eval](double x) { return phi_eval(x + 1.0); });
  return spec;
}

PhiSpec make_triangular() {
  PhiSpec spec;
  spec.name = "triangular";
  spec.slope_inf = 1.0;
  spec.phi_at_zero = 1.0;
  spec.closed_form_conjugate = true;
  spec.d1 = [](double x) { return (x - 1.0) * (x + 3.0) / ((x + 1.0) * (x + 1.0)); };
  spec.d2 = [](double x) { const double u = 1.0 + x; return 8.0 / (u * u * u); };
  spec.d3 = [](double x) { const double u = 1.0 + x; return -24.0 / (u * u * u * u); };

  auto phi_eval = [](double x) -> ExtReal {
    if (x < 0) return ExtReal::pos_inf();
    return (x - 1.0) * (x - 1.0) / (x + 1.0);
  };
  auto star_eval = [](double y) -> ExtReal {
    if (y > 1.0) return ExtReal::pos_inf();
    if (y < -3.0) return -1.0;
    return 4.0 - y - 4.0 * std::sqrt(1.0 - y);
  };
  ScalarConvexFunction::Config phi_cfg;
  phi_cfg.subgrad = [spec_d1 = spec.d1](double x) -> SubgradInterval {
    const double d = spec_d1(x);
    return {d, d};
  };
  phi_cfg.conjugate_eval = star_eval;
  phi_cfg.conjugate_argmax = [](double y) {
    if (y >= 1.0) return 1e300;
    if (y <= -3.0) return 0.0;
    return 2.0 / std::sqrt(1.0 - y) - 1.0;
  };
  spec.phi = wrap_phi(phi_eval, ExtReal(0.0), spec.slope_inf, std::move(phi_cfg));
  spec.phi_star = wrap_phi_star(star_eval, spec.slope_inf, phi_eval);
  spec.psi_star = wrap_psi_star(
      [star_eval](double y) { return star_eval(y) - ExtReal(y); }, spec.slope_inf,
      [phi_eval](double x) { return phi_eval(x + 1.0); });
  return spec;
}

// Generators without a registered conjugate fall back to numeric conjugation.
PhiSpec from_numeric_phi(ScalarConvexFunction phi, std::string name, ExtReal slope_inf,
                         ExtReal phi_at_zero) {
  PhiSpec spec;
  spec.name = std::move(name);
  spec.slope_inf = slope_inf;
  spec.phi_at_zero = phi_at_zero;
  spec.closed_form_conjugate = false;
  spec.phi = std::move(phi);
  ConjugateResult conj = conjugate(spec.phi);
  spec.phi_star = conj.function;
  const ScalarConvexFunction star = conj.function;
  spec.psi_star = ScalarConvexFunction::sampled(
      [star](double y) { return star(y) - ExtReal(y); }, ExtReal::neg_inf(), slope_inf);
  return spec;
}

PhiSpec make_jeffreys() {
  auto phi_eval = [](double x) -> ExtReal {
    if (x <= 0) return ExtReal::pos_inf();
    return (x - 1.0) * std::log(x);
  };
  ScalarConvexFunction::Config cfg;
  cfg.subgrad = [](double x) -> SubgradInterval {
    const double d = std::log(x) + 1.0 - 1.0 / x;
    return {d, d};
  };
  ScalarConvexFunction phi =
      wrap_phi(phi_eval, ExtReal(0.0), ExtReal::pos_inf(), std::move(cfg));
  PhiSpec spec = from_numeric_phi(std::move(phi), "jeffreys", ExtReal::pos_inf(),
                                  ExtReal::pos_inf());
  spec.d1 = [](double x) { return std::log(x) + 1.0 - 1.0 / x; };
  spec.d2 = [](double x) { return 1.0 / x + 1.0 / (x * x); };
  spec.d3 = [](double x) { return -1.0 / (x * x) - 2.0 / (x * x * x); };
  return spec;
}

PhiSpec make_chi_alpha(double a) {
  if (a < 1.0) throw BadParameter("chi_alpha requires alpha >= 1");
  if (a == 1.0) return make_total_variation();
  auto phi_eval = [a](double x) -> ExtReal {
    if (x < 0) return ExtReal::pos_inf();
    return std::pow(std::fabs(x - 1.0), a);
  };
  ScalarConvexFunction::Config cfg;
  cfg.subgrad = [a](double x) -> SubgradInterval {
    const double d = a * std::copysign(std::pow(std::fabs(x - 1.0), a - 1.0), x - 1.0);
    return {d, d};
  };
  ScalarConvexFunction phi =
      wrap_phi(phi_eval, ExtReal(0.0), ExtReal::pos_inf(), std::move(cfg));
  PhiSpec spec = from_numeric_phi(std::move(phi), "chi_alpha", ExtReal::pos_inf(), ExtReal(1.0));
  spec.alpha = a;
  spec.d1 = [a](double x) {
    return a * std::copysign(std::pow(std::fabs(x - 1.0), a - 1.0), x - 1.0);
  };
  if (a >= 2.0) {
    spec.d2 = [a](double x) { return a * (a - 1.0) * std::pow(std::fabs(x - 1.0), a - 2.0); };
  }
  if (a == 2.0 || a >= 3.0) {
    spec.d3 = [a](double x) {
      if (a == 2.0) return 0.0;
      return a * (a - 1.0) * (a - 2.0) *
             std::copysign(std::pow(std::fabs(x - 1.0), a - 3.0), x - 1.0);
    };
  }
  return spec;
}

}  // namespace

PhiSpec make_divergence(const std::string& name, std::optional<double> alpha) {
  if (name == "kl") return from_alpha_core({1.0}, "kl");
  if (name == "reverse_kl") return from_alpha_core({0.0}, "reverse_kl");
  if (name == "alpha") {
    if (!alpha) throw BadParameter("alpha divergence requires a parameter");
    if (!std::isfinite(*alpha)) throw BadParameter("alpha must be finite");
    return from_alpha_core({*alpha}, "alpha");
  }
  if (name == "chi2") return scale_spec(from_alpha_core({2.0}, "alpha"), 2.0, "chi2");
  if (name == "squared_hellinger") {
    return scale_spec(from_alpha_core({0.5}, "alpha"), 0.5, "squared_hellinger");
  }
  if (name == "jeffreys") return make_jeffreys();
  if (name == "chi_alpha") {
    if (!alpha) throw BadParameter("chi_alpha requires a parameter");
    return make_chi_alpha(*alpha);
  }
  if (name == "total_variation") return make_total_variation();
  if (name == "jensen_shannon") return make_jensen_shannon();
  if (name == "triangular") return make_triangular();
  throw UnknownName("unknown divergence '" + name + "'");
}

ScalarConvexFunction normalize(const ScalarConvexFunction& phi_raw) {
  const ExtReal at_one = phi_raw(1.0);
  if (!at_one.is_finite() || std::fabs(at_one.value()) > 1e-9) {
    throw NotZeroAtOne("normalize: phi(1) must be 0");
  }
  const SubgradInterval s = phi_raw.subgrad(1.0);
  const double c = -s.midpoint();
  if (c == 0.0) return phi_raw;
  ScalarConvexFunction::Config cfg;
  const auto sp = phi_raw.registered_slope(+1);
  const auto sn = phi_raw.registered_slope(-1);
  if (sp) cfg.slope_pos = *sp + ExtReal(c);
  if (sn) cfg.slope_neg = *sn + ExtReal(c);
  cfg.subgrad = [phi_raw, c](double x) {
    SubgradInterval g = phi_raw.subgrad(x);
    return SubgradInterval{g.lo + c, g.hi + c};
  };
  if (phi_raw.has_registered_conjugate()) {
    // (f + c(x-1))^*(y) = f^*(y - c) + c.
    cfg.conjugate_eval = [phi_raw, c](double y) {
      return phi_raw.registered_conjugate(y - c) + ExtReal(c);
    };
    if (phi_raw.has_registered_argmax()) {
      cfg.conjugate_argmax = [phi_raw, c](double y) { return phi_raw.registered_argmax(y - c); };
    }
  }
  auto eval = [phi_raw, c](double x) { return phi_raw(x) + ExtReal(c * (x - 1.0)); };
  if (phi_raw.kind() == FnKind::ClosedForm) {
    return ScalarConvexFunction::closed_form(eval, phi_raw.dom_lo(), phi_raw.dom_hi(),
                                             std::move(cfg));
  }
  return ScalarConvexFunction::sampled(eval, phi_raw.dom_lo(), phi_raw.dom_hi());
}

PhiSpec csiszar_dual(const PhiSpec& spec) {
  // Catalog members with known duals keep their closed forms.
  if (spec.name == "kl") return make_divergence("reverse_kl");
  if (spec.name == "reverse_kl") return make_divergence("kl");
  if (spec.name == "alpha") return make_divergence("alpha", 1.0 - *spec.alpha);
  if (spec.name == "chi2") {
    return scale_spec(from_alpha_core({-1.0}, "alpha"), 2.0, "chi2_dagger");
  }
  if (spec.name == "squared_hellinger" || spec.name == "jensen_shannon" ||
      spec.name == "triangular" || spec.name == "jeffreys" ||
      spec.name == "total_variation") {
    return make_divergence(spec.name);  // symmetric divergences are self-dual
  }

  const ScalarConvexFunction base = spec.phi;
  const ExtReal dual_at_zero = spec.slope_inf;
  auto phi_eval = [base, dual_at_zero](double x) -> ExtReal {
    if (x < 0) return ExtReal::pos_inf();
    if (x == 0.0) return dual_at_zero;
    return ExtReal(x) * base(1.0 / x);
  };
  ScalarConvexFunction::Config cfg;
  cfg.subgrad = [base](double x) -> SubgradInterval {
    const double inv = 1.0 / x;
    const SubgradInterval g = base.subgrad(inv);
    const ExtReal fx = base(inv);
    if (!fx.is_finite()) return {0.0, 0.0};
    return {fx.value() - inv * g.hi, fx.value() - inv * g.lo};
  };
  ScalarConvexFunction phi =
      wrap_phi(phi_eval, ExtReal(0.0), spec.phi_at_zero, std::move(cfg));
  PhiSpec dual = from_numeric_phi(normalize(phi), spec.name + "_dagger", spec.phi_at_zero,
                                  spec.slope_inf);
  if (spec.d2) {
    dual.d2 = [spec_d2 = spec.d2](double x) { return spec_d2(1.0 / x) / (x * x * x); };
  }
  if (spec.d2 && spec.d3) {
    dual.d3 = [d2 = spec.d2, d3 = spec.d3](double x) {
      const double x4 = x * x * x * x;
      return -d3(1.0 / x) / (x4 * x) - 3.0 * d2(1.0 / x) / x4;
    };
  }
  return dual;
}

DivergenceValue divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const PhiSpec& spec) {
  if (mu.universe() != nu.universe()) {
    throw MismatchedUniverse("divergence: measures live on different universes");
  }
  for (const auto& a : nu.atoms()) {
    if (a.weight < 0) throw NegativeNu("divergence: nu must be non-negative");
  }

  ExtReal continuous(0.0);
  for (const auto& a : nu.atoms()) {
    if (a.weight == 0.0) continue;
    const double ratio = mu.weight_of(a.id) / a.weight;
    continuous += ExtReal(a.weight) * spec.phi(ratio);
  }

  double mass_plus = 0.0, mass_minus = 0.0;
  for (const auto& a : mu.atoms()) {
    if (nu.weight_of(a.id) != 0.0) continue;
    if (a.weight > 0) mass_plus += a.weight;
    if (a.weight < 0) mass_minus -= a.weight;
  }

  DivergenceValue out;
  const ExtReal plus_term = ExtReal(mass_plus) * spec.slope_inf;
  const ExtReal minus_term = ExtReal(mass_minus) * ExtReal::neg_inf();  // phi'(-inf) = -inf
  out.value = continuous + plus_term - minus_term;
  out.continuous_part = continuous.as_double();
  out.singular_plus = plus_term.as_double();
  out.singular_minus = minus_term.as_double();
  return out;
}

namespace {

void require_probability(const DiscreteMeasure& nu, const char* who) {
  double total = 0.0;
  for (const auto& a : nu.atoms()) {
    if (a.weight < 0) throw BadParameter(std::string(who) + ": nu must be a probability measure");
    total += a.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw BadParameter(std::string(who) + ": nu weights must sum to 1");
  }
}

}  // namespace

RestrictedConjugate restricted_conjugate(const PhiSpec& spec, const DiscreteMeasure& nu,
                                         const FunctionOnSupport& g,
                                         std::optional<double> range_hi) {
  require_probability(nu, "restricted_conjugate");
  std::vector<std::pair<double, double>> support;  // (weight, g value)
  double g_min = kInf, g_max = -kInf;
  for (const auto& a : nu.atoms()) {
    if (a.weight <= 0) continue;
    const double gv = g.at(a.id);
    support.emplace_back(a.weight, gv);
    g_min = std::min(g_min, gv);
    g_max = std::max(g_max, gv);
  }
  const double hi = range_hi.value_or(g_max);
  if (hi < g_max) throw BadParameter("restricted_conjugate: range override below support max");

  if (spec.kl_fast_path) {
    double acc = 0.0;
    for (const auto& [w, gv] : support) acc += w * std::exp(gv - g_max);
    const double value = std::log(acc) + g_max;
    return {value, -value};
  }

  std::optional<double> lambda_max;
  if (spec.slope_inf.is_finite()) {
    if (std::isinf(hi)) {
      throw InfeasibleConstraint("restricted_conjugate: unbounded range with finite phi'(inf)");
    }
    lambda_max = spec.slope_inf.value() - hi;
  }

  const ScalarConvexFunction phi_star = spec.phi_star;
  auto objective = [&support, &phi_star](double lam) -> ExtReal {
    ExtReal acc(-lam);
    for (const auto& [w, gv] : support) acc += ExtReal(w) * phi_star(gv + lam);
    return acc;
  };
  const double spread = g_max - g_min;
  double lo = -g_max - 1.0 - spread;
  double hi_b = -g_min + 1.0 + spread;
  if (lambda_max) {
    hi_b = std::min(hi_b, *lambda_max);
    lo = std::min(lo, hi_b - (2.0 + 2.0 * spread));
  }
  MinimizeOptions mo;
  mo.tol = 1e-11 * (1.0 + spread);
  mo.max_width = 1e8 * (1.0 + spread);
  mo.hard_hi = lambda_max;
  const MinimizeResult r = minimize_1d(objective, lo, hi_b, mo);
  if (!r.min.is_finite()) {
    throw InfeasibleConstraint("restricted_conjugate: objective infinite on feasible set");
  }
  return {r.min.value(), r.argmin};
}

double variational_gap(const PhiSpec& spec, const DiscreteMeasure& mu,
                       const DiscreteMeasure& nu, const FunctionOnSupport& g) {
  const DivergenceValue d = divergence(mu, nu, spec);
  double mu_g = 0.0;
  for (const auto& a : mu.atoms()) mu_g += a.weight * g.at(a.id);
  const RestrictedConjugate rc = restricted_conjugate(spec, nu, g);
  return d.value.as_double() - (mu_g - rc.value);
}

namespace {

using nlohmann::json;

PhiSpec custom_from_json(const json& j) {
  const auto bp = j.at("breakpoints").get<std::vector<double>>();
  const auto vals = j.at("values").get<std::vector<double>>();
  const double sl = j.at("left_slope").get<double>();
  const double sr = j.at("right_slope").get<double>();
  const double quad = j.value("quad", 0.0);
  if (bp.size() != vals.size() || bp.size() < 1) {
    throw ParseError("custom phi: breakpoints/values size mismatch");
  }
  for (std::size_t i = 1; i < bp.size(); ++i) {
    if (!(bp[i] > bp[i - 1])) throw ParseError("custom phi: breakpoints must increase");
  }
  if (quad < 0) throw ParseError("custom phi: quad must be >= 0");
  std::vector<double> slopes;
  slopes.push_back(sl);
  for (std::size_t i = 1; i < bp.size(); ++i) {
    slopes.push_back((vals[i] - vals[i - 1]) / (bp[i] - bp[i - 1]));
  }
  slopes.push_back(sr);
  for (std::size_t i = 1; i < slopes.size(); ++i) {
    if (slopes[i] < slopes[i - 1] - 1e-12) throw NonConvexInput("custom phi is not convex");
  }

  auto piecewise = [bp, vals, sl, sr, quad](double x) -> ExtReal {
    double base;
    if (x <= bp.front()) {
      base = vals.front() + sl * (x - bp.front());
    } else if (x >= bp.back()) {
      base = vals.back() + sr * (x - bp.back());
    } else {
      const auto it = std::upper_bound(bp.begin(), bp.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - bp.begin());
      const double th = (x - bp[i - 1]) / (bp[i] - bp[i - 1]);
      base = vals[i - 1] + th * (vals[i] - vals[i - 1]);
    }
    return base + quad * (x - 1.0) * (x - 1.0);
  };
  ScalarConvexFunction raw = ScalarConvexFunction::closed_form(
      piecewise, ExtReal::neg_inf(), ExtReal::pos_inf(), {});
  ScalarConvexFunction norm = normalize(raw);
  const ExtReal slope_inf = quad > 0 ? ExtReal::pos_inf() : slope_at_infinity(norm, +1);
  auto restricted = [norm](double x) {
    return x < 0 ? ExtReal::pos_inf() : norm(x);
  };
  ScalarConvexFunction phi = wrap_phi(restricted, ExtReal(0.0), slope_inf, {});
  return from_numeric_phi(std::move(phi), "custom", slope_inf, restricted(0.0));
}

}  // namespace

std::string phi_spec_to_json(const PhiSpec& spec) {
  json j;
  j["name"] = spec.name;
  if (spec.alpha) {
    j["params"] = {{"alpha", *spec.alpha}};
  } else {
    j["params"] = nullptr;
  }
  j["normalized"] = true;
  return j.dump();
}

PhiSpec phi_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("phi spec json: ") + e.what());
  }
  if (j.contains("breakpoints")) return custom_from_json(j);
  if (!j.contains("name")) throw ParseError("phi spec json: need 'name' or 'breakpoints'");
  std::optional<double> alpha;
  if (j.contains("params") && j["params"].is_object() && j["params"].contains("alpha")) {
    alpha = j["params"]["alpha"].get<double>();
  }
  return make_divergence(j["name"].get<std::string>(), alpha);
}

}  // namespace divbound
