#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "divbound/ext_real.hpp"

namespace divbound {

// Finite signed measure as a list of weighted atoms. The universe is a tag,
// not a set object: operations only require the atoms actually present.
class DiscreteMeasure {
 public:
  struct Atom {
    std::string id;
    double weight = 0.0;
  };

  DiscreteMeasure(std::vector<Atom> atoms, std::string universe, bool probability = false);

  // Probability refinement: weights >= 0 and summing to 1 within 1e-12.
  static DiscreteMeasure probability(std::vector<Atom> atoms, std::string universe);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::string& universe() const { return universe_; }
  bool is_probability() const { return probability_; }

  double weight_of(const std::string& id) const;  // 0 for absent atoms
  double total_mass() const;

 private:
  std::vector<Atom> atoms_;
  std::string universe_;
  bool probability_ = false;
};

// Real-valued function given by its values on atoms.
struct FunctionOnSupport {
  std::map<std::string, double> values;

  double at(const std::string& id) const;  // throws MissingValue
};

// Distribution on the real line: the image of a measure under a function, or
// a quadrature approximation of a continuous pushforward.
struct PushforwardDist {
  std::vector<std::pair<double, double>> points;  // (x, weight), sorted by x
  std::string source;

  double mean() const;
  double variance() const;
  double min_x() const;
  double max_x() const;
};

// Pushforward nu o g^{-1}; atoms mapping to exactly equal values merge.
PushforwardDist pushforward(const DiscreteMeasure& nu, const FunctionOnSupport& g);

struct GaussianFamily { double mean = 0.0, sigma = 1.0; };
struct GammaFamily { double shape = 1.0, scale = 1.0; };
struct UniformFamily { double lo = 0.0, hi = 1.0; };
using QuadratureFamily = std::variant<GaussianFamily, GammaFamily, UniformFamily>;

// Gauss-Hermite / Gauss-Laguerre / Gauss-Legendre nodes and weights,
// normalized to a probability vector.
PushforwardDist quadrature_dist(const QuadratureFamily& family, int order);

// <mu, g> - <nu, g> on a shared universe.
double mean_deviation(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const FunctionOnSupport& g);

// CSV interfaces. Measures: columns point_id,weight. Functions:
// point_id,value. Strict parse; NaN and negative probability weights rejected.
DiscreteMeasure read_measure_csv(std::istream& in, const std::string& universe,
                                 bool probability);
FunctionOnSupport read_function_csv(std::istream& in);
void write_pushforward_csv(std::ostream& out, const PushforwardDist& dist);

}  // namespace divbound
