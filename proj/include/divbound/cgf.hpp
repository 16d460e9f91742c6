#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divbound/divergence.hpp"
#include "divbound/measure.hpp"

namespace divbound {

// Inputs for the cumulant generating function
//   K(t) = inf over lambda of sum_i w_i psi_star(t x_i + lambda)
// subject to lambda + esssup(t x) <= phi'(inf). The essential range defaults
// to the support range of the distribution; range_override widens it.
struct CgfQuery {
  PhiSpec spec;
  PushforwardDist dist;
  std::optional<std::pair<double, double>> range_override;

  CgfQuery(PhiSpec s, PushforwardDist d,
           std::optional<std::pair<double, double>> ro = std::nullopt);

  double range_lo() const;
  double range_hi() const;
};

struct CgfSample {
  double t = 0.0;
  ExtReal k = ExtReal(0.0);
  std::optional<double> lambda_opt;
};

struct CgfCurve {
  std::vector<CgfSample> samples;
  std::string spec_name;
  std::string dist_digest;
};

struct CgfValue {
  ExtReal k = ExtReal(0.0);
  std::optional<double> lambda_opt;
};

// Single evaluation. Infeasibility is a value (+inf with no lambda), never an
// error. The KL generator short-circuits to the centered log-MGF.
CgfValue cgf(const CgfQuery& query, double t);

// Samples K over a sorted grid containing 0; grid points evaluate in
// parallel, gathered by index.
CgfCurve cgf_curve(const CgfQuery& query, const std::vector<double>& ts);

// Content digest of a distribution, stable across CSV round-trips.
std::string dist_digest(const PushforwardDist& dist);

enum class SubexpClass {
  LooksStronglySubexponential,
  LooksSubexponential,
  BoundedOnlyRegime,
  Inconclusive,
};

const char* to_string(SubexpClass c);

struct SubexpReport {
  std::vector<double> finite_ts;
  double largest_symmetric_t = 0.0;
  SubexpClass classification = SubexpClass::Inconclusive;
};

// Evaluates K on a symmetric geometric grid and reports the largest symmetric
// interval of finiteness together with a coarse classification.
SubexpReport subexponential_probe(const CgfQuery& query);

void write_cgf_csv(std::ostream& out, const CgfCurve& curve);

}  // namespace divbound
