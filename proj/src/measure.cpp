#include "divbound/measure.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "divbound/errors.hpp"
#include "divbound/util.hpp"

namespace divbound {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms, std::string universe, bool probability)
    : atoms_(std::move(atoms)), universe_(std::move(universe)), probability_(probability) {
  std::set<std::string> seen;
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (std::isnan(a.weight)) throw ParseError("measure weight is NaN");
    if (!seen.insert(a.id).second) {
      throw ParseError("duplicate point_id '" + a.id + "' in measure");
    }
    if (probability_ && a.weight < 0) {
      throw ParseError("negative weight in probability measure");
    }
    total += a.weight;
  }
  if (probability_ && std::fabs(total - 1.0) > 1e-12 * std::max(1.0, std::fabs(total)) + 1e-12) {
    throw ParseError("probability weights sum to " + fmt_g12(total) + ", expected 1");
  }
}

DiscreteMeasure DiscreteMeasure::probability(std::vector<Atom> atoms, std::string universe) {
  return DiscreteMeasure(std::move(atoms), std::move(universe), true);
}

double DiscreteMeasure::weight_of(const std::string& id) const {
  for (const Atom& a : atoms_) {
    if (a.id == id) return a.weight;
  }
  return 0.0;
}

double DiscreteMeasure::total_mass() const {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.weight;
  return s;
}

double FunctionOnSupport::at(const std::string& id) const {
  const auto it = values.find(id);
  if (it == values.end()) throw MissingValue("function has no value for point '" + id + "'");
  return it->second;
}

double PushforwardDist::mean() const {
  double s = 0.0;
  for (const auto& [x, w] : points) s += x * w;
  return s;
}

double PushforwardDist::variance() const {
  const double m = mean();
  double s = 0.0;
  for (const auto& [x, w] : points) s += w * (x - m) * (x - m);
  return s;
}

double PushforwardDist::min_x() const { return points.front().first; }
double PushforwardDist::max_x() const { return points.back().first; }

PushforwardDist pushforward(const DiscreteMeasure& nu, const FunctionOnSupport& g) {
  std::map<double, double> acc;  // exact-equality merge
  for (const auto& a : nu.atoms()) acc[g.at(a.id)] += a.weight;
  PushforwardDist out;
  out.points.assign(acc.begin(), acc.end());
  out.source = "discrete";
  return out;
}

namespace {

// Nodes and weights by Newton iteration on the recurrence-evaluated
// orthogonal polynomials.

void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15 * std::max(1.0, std::fabs(z))) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  // Physicists' convention: sum of weights is sqrt(pi).
}

void gauss_laguerre(int n, double alf, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      z = (1.0 + alf) * (3.0 + 0.92 * alf) / (1.0 + 2.4 * n + 1.8 * alf);
    } else if (i == 1) {
      z += (15.0 + 6.25 * alf) / (1.0 + 0.9 * alf + 2.5 * n);
    } else {
      const double ai = i - 1;
      z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alf / (1.0 + 3.5 * ai)) * (z - x[i - 2]) /
           (1.0 + 0.3 * alf);
    }
    double p2 = 0.0, pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = 1.0;
      p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1 + alf - z) * p2 - (j + alf) * p3) / (j + 1);
      }
      pp = (n * p1 - (n + alf) * p2) / z;
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-14 * std::max(1.0, std::fabs(z))) break;
    }
    x[i] = z;
    w[i] = -std::exp(std::lgamma(alf + n) - std::lgamma(static_cast<double>(n))) / (pp * n * p2);
  }
  // Weights integrate against x^alf e^{-x}; their sum is Gamma(alf + 1).
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

PushforwardDist normalized(std::vector<double> xs, std::vector<double> ws,
                           const std::string& source) {
  double total = 0.0;
  for (double w : ws) total += w;
  PushforwardDist out;
  out.points.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out.points.emplace_back(xs[i], ws[i] / total);
  std::sort(out.points.begin(), out.points.end());
  out.source = source;
  return out;
}

}  // namespace

PushforwardDist quadrature_dist(const QuadratureFamily& family, int order) {
  if (order < 2 || order > 512) throw BadOrder("quadrature order must be in [2, 512]");
  std::vector<double> x, w;
  if (const auto* g = std::get_if<GaussianFamily>(&family)) {
    if (!(g->sigma > 0) || !std::isfinite(g->mean)) throw BadFamily("gaussian needs sigma > 0");
    gauss_hermite(order, x, w);
    for (double& xi : x) xi = g->mean + std::sqrt(2.0) * g->sigma * xi;
    return normalized(std::move(x), std::move(w),
                      "quadrature(gaussian," + std::to_string(order) + ")");
  }
  if (const auto* g = std::get_if<GammaFamily>(&family)) {
    if (!(g->shape > 0) || !(g->scale > 0)) throw BadFamily("gamma needs shape, scale > 0");
    gauss_laguerre(order, g->shape - 1.0, x, w);
    for (double& xi : x) xi *= g->scale;
    return normalized(std::move(x), std::move(w),
                      "quadrature(gamma," + std::to_string(order) + ")");
  }
  const auto& u = std::get<UniformFamily>(family);
  if (!(u.hi > u.lo)) throw BadFamily("uniform needs hi > lo");
  gauss_legendre(order, x, w);
  for (double& xi : x) xi = u.lo + (u.hi - u.lo) * (xi + 1.0) / 2.0;
  return normalized(std::move(x), std::move(w),
                    "quadrature(uniform," + std::to_string(order) + ")");
}

double mean_deviation(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const FunctionOnSupport& g) {
  if (mu.universe() != nu.universe()) {
    throw MismatchedUniverse("mean_deviation: measures live on different universes");
  }
  double a = 0.0, b = 0.0;
  for (const auto& atom : mu.atoms()) a += atom.weight * g.at(atom.id);
  for (const auto& atom : nu.atoms()) b += atom.weight * g.at(atom.id);
  return a - b;
}

namespace {

std::vector<std::pair<std::string, std::string>> parse_two_column_csv(std::istream& in,
                                                                      const char* what) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(std::string(what) + ": expected two columns");
    std::string a = line.substr(0, comma);
    std::string b = line.substr(comma + 1);
    if (first && !b.empty() && !(std::isdigit(static_cast<unsigned char>(b[0])) ||
                                 b[0] == '-' || b[0] == '+' || b[0] == '.')) {
      first = false;  // header row
      continue;
    }
    first = false;
    rows.emplace_back(std::move(a), std::move(b));
  }
  return rows;
}

double parse_strict_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError(std::string(what) + ": bad number '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size()) throw ParseError(std::string(what) + ": bad number '" + s + "'");
  if (std::isnan(v)) throw ParseError(std::string(what) + ": NaN rejected");
  return v;
}

}  // namespace

DiscreteMeasure read_measure_csv(std::istream& in, const std::string& universe,
                                 bool probability) {
  std::vector<DiscreteMeasure::Atom> atoms;
  for (auto& [id, text] : parse_two_column_csv(in, "measure csv")) {
    atoms.push_back({id, parse_strict_double(text, "measure csv")});
  }
  if (atoms.empty()) throw ParseError("measure csv: no rows");
  return DiscreteMeasure(std::move(atoms), universe, probability);
}

FunctionOnSupport read_function_csv(std::istream& in) {
  FunctionOnSupport g;
  for (auto& [id, text] : parse_two_column_csv(in, "function csv")) {
    if (!g.values.emplace(id, parse_strict_double(text, "function csv")).second) {
      throw ParseError("function csv: duplicate point_id '" + id + "'");
    }
  }
  if (g.values.empty()) throw ParseError("function csv: no rows");
  return g;
}

void write_pushforward_csv(std::ostream& out, const PushforwardDist& dist) {
  out << "point_id,weight\n";
  for (const auto& [x, w] : dist.points) out << fmt_g12(x) << "," << fmt_g12(w) << "\n";
}

}  // namespace divbound
