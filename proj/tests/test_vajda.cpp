#include <doctest.h>

#include <cmath>
#include <sstream>

#include "divbound/bounds.hpp"
#include "divbound/errors.hpp"
#include "divbound/util.hpp"
#include "divbound/vajda.hpp"

using namespace divbound;

namespace {

double fht_eps(double t) {
  const double sh = std::sinh(t);
  return 2.0 / std::tanh(t) - t / (sh * sh) - 1.0 / t;
}

double fht_bound(double t) {
  const double sh = std::sinh(t);
  return std::log(t / sh) + t / std::tanh(t) - t * t / (sh * sh);
}

}  // namespace

TEST_CASE("sublevel widths") {
  const PhiSpec kl = make_divergence("kl");
  CHECK(sublevel_width(kl, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
  const double h1 = height(kl, 1.0).h.value();
  CHECK(sublevel_width(kl, h1) == doctest::Approx(1.0).epsilon(1e-4));
  const PhiSpec chi2 = make_divergence("chi2");
  CHECK(sublevel_width(chi2, 0.25) == doctest::Approx(2.0).epsilon(1e-9));
  // Flat-bottomed conjugate: the zero sublevel set is already wide.
  const PhiSpec tv = make_divergence("total_variation");
  CHECK(sublevel_width(tv, 0.0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(sublevel_width(tv, 0.5) == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("height of the entropy conjugate") {
  const PhiSpec kl = make_divergence("kl");
  SUBCASE("reference values") {
    const HeightValue h1 = height(kl, 1.0);
    CHECK(h1.h.value() > 0.115);
    CHECK(h1.h.value() < 0.125);
    const HeightValue h3 = height(kl, 3.0);
    CHECK(h3.h.value() > 1.005);
    CHECK(h3.h.value() < 1.015);
    CHECK(height(kl, 0.0).h.value() == 0.0);
  }
  SUBCASE("closed form matches the equal-height solver") {
    for (double w = 0.25; w <= 10.0; w += 0.25) {
      const HeightValue hv = height(kl, w);
      CHECK(hv.h.value() == doctest::Approx(kl_height_closed_form(w)).epsilon(1e-8));
      REQUIRE(hv.lambda_w.has_value());
      // The registered shift equalizes both branches.
      const double lw = *hv.lambda_w;
      const double left = kl.psi_star(lw - w / 2).value();
      const double right = kl.psi_star(lw + w / 2).value();
      CHECK(left == doctest::Approx(right).epsilon(1e-7));
      CHECK(lw == doctest::Approx(-std::log(2.0 * std::sinh(w / 2) / w)).epsilon(1e-7));
    }
  }
  SUBCASE("total variation has the piecewise-linear height") {
    const PhiSpec tv = make_divergence("total_variation");
    CHECK(height(tv, 1.0).h.value() == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(height(tv, 2.0).h.value() == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(height(tv, 3.0).h.value() == doctest::Approx(1.0).epsilon(1e-6));
    const HeightValue flat = height(tv, 1.0);
    REQUIRE(flat.lambda_w.has_value());
    CHECK(*flat.lambda_w == doctest::Approx(0.0).epsilon(1e-6));
  }
}

TEST_CASE("inverse consistency between width and height") {
  for (const char* name : {"kl", "chi2", "jensen_shannon", "squared_hellinger"}) {
    CAPTURE(name);
    const PhiSpec spec = make_divergence(name);
    for (double w : {0.5, 1.0, 2.0, 4.0}) {
      const double h = height(spec, w).h.value();
      CHECK(sublevel_width(spec, h) >= w - 1e-6);
    }
    for (double h : {0.1, 0.5, 1.5}) {
      const double w = sublevel_width(spec, h);
      CHECK(height(spec, w).h.value() <= h + 1e-6);
    }
  }
}

TEST_CASE("dagger symmetry of height curves") {
  const auto w_grid = make_grid(0.25, 6.0, 0.25);
  auto check_pair = [&](const PhiSpec& a, const PhiSpec& b, double tol) {
    for (double w : w_grid) {
      CHECK(height(a, w).h.value() == doctest::Approx(height(b, w).h.value()).epsilon(tol));
    }
  };
  check_pair(make_divergence("kl"), make_divergence("reverse_kl"), 1e-8);
  check_pair(make_divergence("alpha", 1.5), make_divergence("alpha", -0.5), 1e-8);
  check_pair(make_divergence("chi2"), csiszar_dual(make_divergence("chi2")), 1e-8);
  check_pair(make_divergence("jensen_shannon"),
             csiszar_dual(make_divergence("jensen_shannon")), 1e-8);
}

TEST_CASE("vajda bound") {
  const PhiSpec kl = make_divergence("kl");
  SUBCASE("zero at zero") { CHECK(vajda_bound(kl, 0.0).value() == 0.0); }
  SUBCASE("parametric closed form for the entropy generator") {
    for (double t : {0.25, 0.5, 1.0, 2.0, 3.0}) {
      const double eps = fht_eps(t);
      CHECK(vajda_bound(kl, eps).value() == doctest::Approx(fht_bound(t)).epsilon(1e-6));
    }
  }
  SUBCASE("chi2 is exactly quadratic up to one") {
    const PhiSpec chi2 = make_divergence("chi2");
    for (double eps : {0.1, 0.4, 0.7, 1.0}) {
      CHECK(vajda_bound(chi2, eps).value() == doctest::Approx(eps * eps).epsilon(1e-7));
    }
    // Independent check on the two-point space: the minimal divergence at
    // total variation eps is the oracle minimum over tilted pairs.
    const auto nu = DiscreteMeasure::probability({{"m", 0.5}, {"p", 0.5}}, "u");
    const FunctionOnSupport id{{{"m", -1.0}, {"p", 1.0}}};
    for (double eps : {0.2, 0.6}) {
      const double o = oracle_lower_bound(chi2, nu, id, eps).value();
      CHECK(vajda_bound(chi2, eps).value() <= o + 1e-6);
    }
  }
  SUBCASE("total variation bounds itself") {
    const PhiSpec tv = make_divergence("total_variation");
    for (double eps : {0.0, 0.5, 1.0, 1.7, 2.0}) {
      CHECK(vajda_bound(tv, eps).value() == doctest::Approx(eps).epsilon(1e-6));
    }
  }
  SUBCASE("binary-family aggregation agrees with the height conjugate") {
    std::vector<PushforwardDist> family;
    for (int i = 0; i <= 500; ++i) {
      const double p = i / 500.0;
      PushforwardDist d;
      if (p == 0.0) {
        d.points = {{-1.0, 1.0}};
      } else if (p == 1.0) {
        d.points = {{1.0, 1.0}};
      } else {
        d.points = {{-1.0, 1.0 - p}, {1.0, p}};
      }
      d.source = "binary";
      family.push_back(std::move(d));
    }
    const auto ts = make_grid(-6.0, 6.0, 0.25);
    for (double eps : {0.3, 0.8, 1.3}) {
      const BoundCurve b = ipm_lower_bound(kl, family, ts, {eps});
      CHECK(b.samples[0].L.value() ==
            doctest::Approx(vajda_bound(kl, eps).value()).epsilon(1e-5));
    }
  }
}

TEST_CASE("entropy bound dominates the fourth-order quadratic refinement") {
  // Classical refinement: with TV in [0, 2], the entropy generator satisfies
  // L(eps) >= eps^2/2 + eps^4/36.
  const PhiSpec kl = make_divergence("kl");
  for (double eps = 0.0; eps <= 1.9 + 1e-9; eps += 0.1) {
    const double refined = eps * eps / 2.0 + std::pow(eps, 4) / 36.0;
    CHECK(vajda_bound(kl, eps).as_double() >= refined - 1e-6);
  }
  // The bounded generator saturates: its bound tends to the maximal value.
  const PhiSpec js = make_divergence("jensen_shannon");
  const double max_js = 2.0 * std::log(2.0);
  CHECK(vajda_bound(js, 1.999).as_double() <= max_js + 1e-6);
  CHECK(vajda_bound(js, 1.0).as_double() < vajda_bound(js, 1.8).as_double());
}

TEST_CASE("vajda bound equals the binary-pair infimum") {
  // The optimal TV bound is attained on measures supported on two points, so
  // a dense search over tilted binary pairs is an independent oracle for the
  // whole width/height/conjugation pipeline.
  auto binary_infimum = [](const PhiSpec& spec, double eps) {
    double best = std::numeric_limits<double>::infinity();
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
      const double q = static_cast<double>(i) / n;
      for (double p : {q + eps / 2, q - eps / 2}) {
        if (p < 0.0 || p > 1.0) continue;
        const auto mu = DiscreteMeasure::probability({{"a", p}, {"b", 1 - p}}, "u");
        const auto nu = DiscreteMeasure::probability({{"a", q}, {"b", 1 - q}}, "u");
        best = std::min(best, divergence(mu, nu, spec).value.as_double());
      }
    }
    return best;
  };
  for (const char* name :
       {"kl", "chi2", "squared_hellinger", "jensen_shannon", "triangular",
        "total_variation"}) {
    CAPTURE(name);
    const PhiSpec spec = make_divergence(name);
    for (double eps : {0.3, 0.9, 1.5}) {
      CAPTURE(eps);
      const double direct = binary_infimum(spec, eps);
      const double via_heights = vajda_bound(spec, eps).as_double();
      CHECK(via_heights == doctest::Approx(direct).epsilon(2e-5));
    }
  }
  // jeffreys runs the pipeline with no closed-form conjugate anywhere.
  const PhiSpec jeffreys = make_divergence("jeffreys");
  CHECK(vajda_bound(jeffreys, 0.9).as_double() ==
        doctest::Approx(binary_infimum(jeffreys, 0.9)).epsilon(2e-5));
}

TEST_CASE("pinsker checks") {
  const auto z_grid = make_grid(-1.0, 8.0, 0.01);
  SUBCASE("optimal constant half for the alpha family") {
    for (double a : {-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0}) {
      CAPTURE(a);
      const PinskerReport r =
          pinsker_check(make_divergence("alpha", a), PinskerKind::Optimal, z_grid);
      CHECK(r.holds);
      CHECK(r.constant == doctest::Approx(0.5));
    }
  }
  SUBCASE("optimal condition fails beyond the known range") {
    const PinskerReport r =
        pinsker_check(make_divergence("alpha", 3.0), PinskerKind::Optimal, z_grid);
    CHECK_FALSE(r.holds);
    CHECK(r.violating_z.has_value());
  }
  SUBCASE("crude constant an eighth everywhere in the family") {
    for (double a : {2.5, 3.0, 4.0}) {
      CAPTURE(a);
      const PinskerReport r =
          pinsker_check(make_divergence("alpha", a), PinskerKind::Crude, z_grid);
      CHECK(r.holds);
      CHECK(r.constant == doctest::Approx(0.125));
    }
  }
  SUBCASE("concave criterion for the middle of the family") {
    const PinskerReport r =
        pinsker_check(make_divergence("alpha", 1.5), PinskerKind::Concave, z_grid);
    CHECK(r.holds);
    CHECK(r.constant == doctest::Approx(0.5));
  }
  SUBCASE("kinked generators are rejected") {
    CHECK_THROWS_AS(
        pinsker_check(make_divergence("total_variation"), PinskerKind::Optimal, z_grid),
        NotTwiceDifferentiable);
  }
  SUBCASE("soundness of the certified quadratic") {
    const PhiSpec spec = make_divergence("alpha", 1.5);
    const PinskerReport r = pinsker_check(spec, PinskerKind::Optimal, z_grid);
    REQUIRE(r.holds);
    for (double eps = 0.0; eps <= 1.9; eps += 0.19) {
      CHECK(vajda_bound(spec, eps).value() >= r.constant * eps * eps - 1e-6);
    }
  }
  SUBCASE("report serialization") {
    const PinskerReport r =
        pinsker_check(make_divergence("kl"), PinskerKind::Optimal, z_grid);
    const std::string j = pinsker_report_json(r);
    CHECK(j.find("\"holds\":true") != std::string::npos);
    CHECK(j.find("\"constant\":0.5") != std::string::npos);
  }
}

TEST_CASE("hoeffding refinement") {
  SUBCASE("fixed points") {
    CHECK(hoeffding_bound(-1.0, 1.0, 0.0).refined == 0.0);
    const HoeffdingBound b = hoeffding_bound(-1.0, 1.0, 1.0);  // width 2 at t = 1
    const double expected = -1.0 + 1.0 / std::tanh(1.0) + std::log(std::sinh(1.0));
    CHECK(b.refined == doctest::Approx(expected).epsilon(1e-10));
    CHECK(b.classical == doctest::Approx(0.5));
    CHECK(b.refined < b.classical);
    CHECK(b.refined == doctest::Approx(height(make_divergence("kl"), 2.0).h.value())
                           .epsilon(1e-8));
  }
  SUBCASE("small-argument ratio tends to one") {
    const HoeffdingBound b = hoeffding_bound(0.0, 1.0, 1e-3);
    CHECK(b.refined / b.classical == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("never exceeds the classical bound") {
    Rng rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
      const double m = rng.uniform(-3.0, 2.0);
      const double M = m + rng.uniform(0.05, 5.0);
      const double t = rng.uniform(-4.0, 4.0);
      const HoeffdingBound b = hoeffding_bound(m, M, t);
      CHECK(b.refined <= b.classical + 1e-12);
    }
  }
  SUBCASE("degenerate interval") {
    CHECK_THROWS_AS(hoeffding_bound(1.0, 1.0, 0.5), DegenerateInterval);
  }
}

TEST_CASE("height curve csv") {
  const HeightCurve c = height_curve(make_divergence("kl"), make_grid(0.0, 2.0, 0.5));
  std::ostringstream os;
  write_height_csv(os, c);
  CHECK(os.str().find("w,H,lambda_w") == 0);
  CHECK(c.samples.size() == 5);
}
