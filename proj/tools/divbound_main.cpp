#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "divbound/bounds.hpp"
#include "divbound/cgf.hpp"
#include "divbound/divergence.hpp"
#include "divbound/errors.hpp"
#include "divbound/measure.hpp"
#include "divbound/util.hpp"
#include "divbound/vajda.hpp"

using namespace divbound;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitCheckFailed = 2;

struct SpecOptions {
  std::string spec = "kl";
  std::optional<double> alpha;
};

PhiSpec resolve_spec(const SpecOptions& o) {
  if (o.spec.size() > 5 && o.spec.substr(o.spec.size() - 5) == ".json") {
    std::ifstream in(o.spec);
    if (!in) throw ParseError("cannot open spec file '" + o.spec + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return phi_spec_from_json(ss.str());
  }
  return make_divergence(o.spec, o.alpha);
}

std::vector<double> split_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
    } else if (item == "-inf") {
      out.push_back(-std::numeric_limits<double>::infinity());
    } else {
      out.push_back(std::stod(item));
    }
  }
  return out;
}

// Inline families:
//   uniform:x1,x2,...        equal weights on the listed points
//   atoms:x1=w1,x2=w2,...    explicit weights
//   gauss:mu,sigma[,order]   Gauss-Hermite quadrature
//   gamma:k,theta[,order]    Gauss-Laguerre quadrature
//   box:a,b[,order]          Gauss-Legendre quadrature on [a, b]
// Anything else is a measure CSV path, combined with --g.
PushforwardDist resolve_dist(const std::string& dist, const std::string& g_path) {
  const auto colon = dist.find(':');
  const std::string head = colon == std::string::npos ? "" : dist.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : dist.substr(colon + 1);
  if (head == "uniform") {
    const auto xs = split_numbers(tail, ',');
    if (xs.empty()) throw ParseError("uniform: needs at least one point");
    PushforwardDist d;
    for (double x : xs) d.points.emplace_back(x, 1.0 / static_cast<double>(xs.size()));
    std::sort(d.points.begin(), d.points.end());
    d.source = "inline";
    return d;
  }
  if (head == "atoms") {
    PushforwardDist d;
    std::stringstream ss(tail);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ParseError("atoms: entries must be x=w");
      d.points.emplace_back(std::stod(item.substr(0, eq)), std::stod(item.substr(eq + 1)));
    }
    if (d.points.empty()) throw ParseError("atoms: needs at least one entry");
    std::sort(d.points.begin(), d.points.end());
    d.source = "inline";
    return d;
  }
  if (head == "gauss" || head == "gamma" || head == "box") {
    const auto p = split_numbers(tail, ',');
    if (p.size() < 2) throw ParseError(head + ": needs two parameters");
    const int order = p.size() > 2 ? static_cast<int>(p[2]) : 40;
    if (head == "gauss") return quadrature_dist(GaussianFamily{p[0], p[1]}, order);
    if (head == "gamma") return quadrature_dist(GammaFamily{p[0], p[1]}, order);
    return quadrature_dist(UniformFamily{p[0], p[1]}, order);
  }
  // CSV measure plus CSV function.
  std::ifstream min(dist);
  if (!min) throw ParseError("cannot open measure csv '" + dist + "'");
  const DiscreteMeasure nu = read_measure_csv(min, "csv", true);
  if (g_path.empty()) throw ParseError("a measure csv needs --g with the function csv");
  std::ifstream gin(g_path);
  if (!gin) throw ParseError("cannot open function csv '" + g_path + "'");
  return pushforward(nu, read_function_csv(gin));
}

std::optional<std::pair<double, double>> resolve_override(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto vals = split_numbers(text, ',');
  if (vals.size() != 2) throw ParseError("--range-override needs lo,hi");
  return std::pair{vals[0], vals[1]};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'");
  return out;
}

struct RandomOracleInstance {
  DiscreteMeasure nu;
  FunctionOnSupport g;
  PushforwardDist dist;
};

RandomOracleInstance random_oracle_instance(Rng& rng, int max_atoms) {
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

int run_oracle_check(const PhiSpec& spec, std::uint64_t seed, int trials) {
  Rng rng(seed);
  int agreed = 0;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const RandomOracleInstance inst = random_oracle_instance(rng, 3);
    const double mean = inst.dist.mean();
    const double lo = inst.dist.min_x() - mean;
    const double hi = inst.dist.max_x() - mean;
    const double eps = rng.uniform(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo));
    const CgfQuery q(spec, inst.dist);
    const CgfCurve curve = cgf_curve(q, make_grid(-8.0, 8.0, 0.5));
    const BoundCurve b = lower_bound_curve(q, curve, {eps});
    const ExtReal oracle = oracle_lower_bound(spec, inst.nu, inst.g, eps);
    const double diff = std::fabs(b.samples[0].L.as_double() - oracle.as_double());
    worst = std::max(worst, diff);
    if (diff <= 1e-4) ++agreed;
  }
  std::cout << "oracle-check " << spec.name << ": " << agreed << "/" << trials
            << " agreements within 1e-4, worst " << fmt_g12(worst) << ", seed " << seed
            << "\n";
  return agreed == trials ? kExitOk : kExitCheckFailed;
}

int run_varrep_check(const PhiSpec& spec, std::uint64_t seed, int trials) {
  Rng rng(seed);
  int passed = 0;
  const bool smooth = static_cast<bool>(spec.d1);
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(3));
    std::vector<DiscreteMeasure::Atom> ma, na;
    FunctionOnSupport g;
    double sm = 0.0, sn = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::string id = "p" + std::to_string(i);
      const double wm = rng.uniform(0.05, 1.0);
      const double wn = rng.uniform(0.05, 1.0);
      ma.push_back({id, wm});
      na.push_back({id, wn});
      g.values[id] = rng.uniform(-2.0, 2.0);
      sm += wm;
      sn += wn;
    }
    for (auto& a : ma) a.weight /= sm;
    for (auto& a : na) a.weight /= sn;
    const auto mu = DiscreteMeasure::probability(ma, "u");
    const auto nu = DiscreteMeasure::probability(na, "u");

    bool ok = variational_gap(spec, mu, nu, g) >= -1e-8;
    if (ok && smooth) {
      FunctionOnSupport witness;
      for (const auto& a : na) {
        witness.values[a.id] = spec.d1(mu.weight_of(a.id) / a.weight);
      }
      ok = std::fabs(variational_gap(spec, mu, nu, witness)) <= 1e-6;
    }
    if (ok) ++passed;
  }
  std::cout << "varrep-check " << spec.name << ": " << passed << "/" << trials
            << " instances sound" << (smooth ? " with tight witnesses" : "") << ", seed "
            << seed << "\n";
  return passed == trials ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal lower bounds of divergences in terms of mean deviations"};
  app.require_subcommand(1);

  SpecOptions spec_opts;
  std::string dist_text, g_path, t_text, eps_text, w_text, z_text;
  std::string out_path, height_out, format = "csv", override_text, kind_text = "optimal";
  std::uint64_t seed = 1;
  int trials = 50;

  auto add_spec = [&](CLI::App* cmd) {
    cmd->add_option("--spec", spec_opts.spec,
                    "catalog name or a .json spec file (default kl)");
    cmd->add_option("--alpha", spec_opts.alpha, "parameter for alpha / chi_alpha");
  };

  CLI::App* cgf_cmd = app.add_subcommand("cgf", "sample the cumulant generating function");
  add_spec(cgf_cmd);
  cgf_cmd->add_option("--dist", dist_text, "inline family or measure csv path")->required();
  cgf_cmd->add_option("--g", g_path, "function csv (with a measure csv)");
  cgf_cmd->add_option("--t", t_text, "t grid lo:hi:step")->required();
  cgf_cmd->add_option("--range-override", override_text, "essential range lo,hi");
  cgf_cmd->add_option("--out", out_path, "output csv")->required();

  CLI::App* bound_cmd =
      app.add_subcommand("bound", "conjugate the cumulant curve into a lower bound");
  add_spec(bound_cmd);
  bound_cmd->add_option("--dist", dist_text, "inline family or measure csv path")->required();
  bound_cmd->add_option("--g", g_path, "function csv (with a measure csv)");
  bound_cmd->add_option("--t", t_text, "t grid lo:hi:step")->required();
  bound_cmd->add_option("--eps", eps_text, "eps grid lo:hi:step")->required();
  bound_cmd->add_option("--range-override", override_text, "essential range lo,hi");
  bound_cmd->add_option("--format", format, "csv or json (default csv)");
  bound_cmd->add_option("--out", out_path, "output file")->required();

  CLI::App* vajda_cmd =
      app.add_subcommand("vajda", "tight total-variation lower bound curve");
  add_spec(vajda_cmd);
  vajda_cmd->add_option("--eps", eps_text, "eps grid lo:hi:step")->required();
  vajda_cmd->add_option("--out", out_path, "output csv")->required();
  vajda_cmd->add_option("--w", w_text, "width grid for --height-out (default 0:8:0.1)");
  vajda_cmd->add_option("--height-out", height_out, "also write the height curve csv");

  CLI::App* pinsker_cmd =
      app.add_subcommand("pinsker", "verify a quadratic relaxation of the height curve");
  add_spec(pinsker_cmd);
  pinsker_cmd->add_option("--kind", kind_text, "crude | optimal | concave");
  pinsker_cmd->add_option("--z", z_text, "z grid lo:hi:step (default -1:8:0.01)");
  pinsker_cmd->add_option("--out", out_path, "output json (default stdout)");

  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check", "conjugate bound vs brute-force oracle on random instances");
  add_spec(oracle_cmd);
  oracle_cmd->add_option("--seed", seed, "rng seed");
  oracle_cmd->add_option("--trials", trials, "number of instances");

  CLI::App* varrep_cmd = app.add_subcommand(
      "varrep-check", "variational representation soundness on random instances");
  add_spec(varrep_cmd);
  varrep_cmd->add_option("--seed", seed, "rng seed");
  varrep_cmd->add_option("--trials", trials, "number of instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInputError;
  }

  try {
    const PhiSpec spec = resolve_spec(spec_opts);

    if (cgf_cmd->parsed()) {
      const CgfQuery query(spec, resolve_dist(dist_text, g_path),
                           resolve_override(override_text));
      const CgfCurve curve = cgf_curve(query, parse_grid(t_text));
      auto out = open_out(out_path);
      write_cgf_csv(out, curve);
      std::size_t finite = 0;
      ExtReal k_max(0.0);
      for (const auto& s : curve.samples) {
        if (s.k.is_finite()) ++finite;
        k_max = max(k_max, s.k);
      }
      std::cout << "cgf " << spec.name << ": " << curve.samples.size() << " rows, K max "
                << fmt_g12(k_max) << ", finite " << finite << "/" << curve.samples.size()
                << " -> " << out_path << "\n";
      return kExitOk;
    }

    if (bound_cmd->parsed()) {
      const CgfQuery query(spec, resolve_dist(dist_text, g_path),
                           resolve_override(override_text));
      const CgfCurve curve = cgf_curve(query, parse_grid(t_text));
      const BoundCurve bound = lower_bound_curve(query, curve, parse_grid(eps_text));
      auto out = open_out(out_path);
      if (format == "json") {
        out << bound_summary_json(curve, bound) << "\n";
      } else {
        write_bound_csv(out, bound);
      }
      std::size_t flagged = 0;
      for (const auto& s : bound.samples) flagged += s.boundary ? 1 : 0;
      std::cout << "bound " << spec.name << ": " << bound.samples.size() << " rows, L max "
                << fmt_g12(bound.samples.back().L) << ", boundary-flagged " << flagged
                << " -> " << out_path << "\n";
      return kExitOk;
    }

    if (vajda_cmd->parsed()) {
      const auto eps = parse_grid(eps_text);
      std::vector<ExtReal> values(eps.size());
      parallel_for(eps.size(), [&](std::size_t i) { values[i] = vajda_bound(spec, eps[i]); });
      auto out = open_out(out_path);
      out << "eps,L\n";
      for (std::size_t i = 0; i < eps.size(); ++i) {
        out << fmt_g12(eps[i]) << "," << fmt_g12(values[i]) << "\n";
      }
      if (!height_out.empty()) {
        const auto ws = parse_grid(w_text.empty() ? "0:8:0.1" : w_text);
        const HeightCurve hc = height_curve(spec, ws);
        auto hout = open_out(height_out);
        write_height_csv(hout, hc);
      }
      std::cout << "vajda " << spec.name << ": " << eps.size() << " rows, L("
                << fmt_g12(eps.back()) << ") = " << fmt_g12(values.back()) << " -> "
                << out_path << "\n";
      return kExitOk;
    }

    if (pinsker_cmd->parsed()) {
      const auto z_grid = parse_grid(z_text.empty() ? "-1:8:0.01" : z_text);
      const PinskerReport report =
          pinsker_check(spec, pinsker_kind_from_string(kind_text), z_grid);
      const std::string json = pinsker_report_json(report);
      if (out_path.empty()) {
        std::cout << json << "\n";
      } else {
        auto out = open_out(out_path);
        out << json << "\n";
        std::cout << "pinsker " << spec.name << " " << kind_text << ": "
                  << (report.holds ? "holds" : "fails") << ", constant "
                  << fmt_g12(report.constant) << " -> " << out_path << "\n";
      }
      return report.holds ? kExitOk : kExitCheckFailed;
    }

    if (oracle_cmd->parsed()) return run_oracle_check(spec, seed, trials);
    if (varrep_cmd->parsed()) return run_varrep_check(spec, seed, trials);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
