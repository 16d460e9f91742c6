#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "divbound/convex.hpp"
#include "divbound/ext_real.hpp"
#include "divbound/measure.hpp"

namespace divbound {

// A divergence generator phi, normalized so that phi(1) = 0 and 0 is a
// subgradient at 1, restricted to the non-negative reals, together with its
// conjugate machinery:
//   phi_star = (phi + indicator of x >= 0)^*        (the restricted conjugate)
//   psi_star(x) = phi_star(x) - x                   (conjugate of phi(1 + .))
//   slope_inf = phi'(inf), the cost per unit of singular mass.
struct PhiSpec {
  std::string name;
  std::optional<double> alpha;

  ScalarConvexFunction phi;
  ScalarConvexFunction phi_star;
  ScalarConvexFunction psi_star;
  ExtReal slope_inf = ExtReal::pos_inf();
  ExtReal phi_at_zero = ExtReal::pos_inf();

  bool kl_fast_path = false;   // centered log-MGF shortcut applies
  bool closed_form_conjugate = false;

  // Derivatives on the interior of dom phi, when known in closed form.
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::function<double(double)> d3;
};

// Catalog: kl, reverse_kl, alpha, chi2, squared_hellinger, jeffreys,
// chi_alpha, total_variation, jensen_shannon, triangular. The alpha family
// resolves alpha in {0, 1} to the reverse-KL / KL limits.
PhiSpec make_divergence(const std::string& name, std::optional<double> alpha = std::nullopt);

// Affine renormalization phi(x) + c (x - 1) with c = -midpoint of the
// subgradient interval at 1, so that 0 lands in the subdifferential at 1.
// Divergence values between probability measures are unchanged.
ScalarConvexFunction normalize(const ScalarConvexFunction& phi_raw);

// Csiszar dual x -> x phi(1/x); swaps the divergence's arguments.
PhiSpec csiszar_dual(const PhiSpec& spec);

struct DivergenceValue {
  ExtReal value = ExtReal(0.0);
  double continuous_part = 0.0;
  double singular_plus = 0.0;   // positive singular mass times phi'(inf)
  double singular_minus = 0.0;  // negative singular mass times phi'(-inf), sign kept positive
};

// D(mu || nu) with the singular parts priced at the asymptotic slopes; the
// restriction to x >= 0 makes negative singular mass infinitely expensive.
DivergenceValue divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const PhiSpec& spec);

struct RestrictedConjugate {
  double value = 0.0;
  double lambda_opt = 0.0;
};

// Conjugate of the probability-restricted divergence at g:
//   inf over lambda of <nu, phi_star(g + lambda)> - lambda
// subject to lambda + esssup g <= phi'(inf). The essential sup defaults to
// the max over nu's support; range_hi overrides it.
RestrictedConjugate restricted_conjugate(const PhiSpec& spec, const DiscreteMeasure& nu,
                                         const FunctionOnSupport& g,
                                         std::optional<double> range_hi = std::nullopt);

// D(mu || nu) - [ mu(g) - restricted_conjugate(nu, g) ]; non-negative, zero
// exactly at optimal witnesses.
double variational_gap(const PhiSpec& spec, const DiscreteMeasure& mu,
                       const DiscreteMeasure& nu, const FunctionOnSupport& g);

// JSON serialization: catalog specs as {"name": ..., "params": ...,
// "normalized": true}; custom generators as a piecewise-linear-plus-quadratic
// description (see README for the schema).
std::string phi_spec_to_json(const PhiSpec& spec);
PhiSpec phi_spec_from_json(const std::string& text);

}  // namespace divbound
