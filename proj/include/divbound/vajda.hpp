#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divbound/divergence.hpp"

namespace divbound {

// Total-variation specialization. Widths and heights describe the epigraph of
// psi_star: sublevel_width(h) is the length of {psi_star <= h}, and height(w)
// the minimal level at which a horizontal segment of length w fits.
//
// All epsilons follow the [-1, 1]-function convention, so the total variation
// between probability measures ranges over [0, 2].

double sublevel_width(const PhiSpec& spec, double h);

struct HeightValue {
  ExtReal h = ExtReal(0.0);
  std::optional<double> lambda_w;  // equal-height shift, when it exists
};

// height(w) = inf over lambda of max{psi_star(lambda + w/2),
// psi_star(lambda - w/2)}; solved by bisection on the equal-height equation,
// with a direct minimization fallback for flat-bottomed psi_star.
HeightValue height(const PhiSpec& spec, double w);

struct HeightSample {
  double w = 0.0;
  ExtReal h = ExtReal(0.0);
  std::optional<double> lambda_w;
};

struct HeightCurve {
  std::vector<HeightSample> samples;
  std::string spec_name;
};

HeightCurve height_curve(const PhiSpec& spec, const std::vector<double>& w_grid);

// Tight lower bound of the divergence in terms of the total variation:
// the conjugate of the height curve evaluated at eps / 2.
ExtReal vajda_bound(const PhiSpec& spec, double eps);

enum class PinskerKind { Crude, Optimal, Concave };

PinskerKind pinsker_kind_from_string(const std::string& s);
const char* to_string(PinskerKind k);

struct PinskerReport {
  PinskerKind kind = PinskerKind::Crude;
  bool holds = false;
  double constant = 0.0;  // c in D >= c TV^2 when holds
  std::optional<double> violating_z;
  double z_lo = 0.0, z_hi = 0.0;  // range actually verified
};

// Quadratic relaxations of the height function.
//   crude:   phi'' monotone            -> constant phi''(1) / 8
//   optimal: 27 phi''(1) / (3 - z phi'''(1)/phi''(1))^3 <= phi''(1+z) on grid
//            -> constant phi''(1) / 2
//   concave: 1 / phi'' midpoint-concave -> constant phi''(1) / 2
PinskerReport pinsker_check(const PhiSpec& spec, PinskerKind kind,
                            const std::vector<double>& z_grid);

struct HoeffdingBound {
  double refined = 0.0;    // height-function bound at (M - m) |t|
  double classical = 0.0;  // (M - m)^2 t^2 / 8
};

// Sharp bound on the centered log-MGF of a function with values in [m, M];
// never exceeds the classical quadratic bound.
HoeffdingBound hoeffding_bound(double m, double M, double t);

// Closed form of the KL height function, exposed for reuse.
double kl_height_closed_form(double w);

void write_height_csv(std::ostream& out, const HeightCurve& curve);
std::string pinsker_report_json(const PinskerReport& report);

}  // namespace divbound
