#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "divbound/ext_real.hpp"

namespace divbound {

// One-sided derivatives at a point; lo == hi away from kinks.
struct SubgradInterval {
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
};

enum class FnKind { ClosedForm, Sampled };

// An extended-real-valued convex function of one variable. Values are
// immutable after construction and safe to share across threads.
//
// Evaluation returns +inf strictly outside [dom_lo, dom_hi]; the endpoints
// themselves are forwarded to the underlying evaluator, which decides whether
// the domain is closed there.
class ScalarConvexFunction {
 public:
  using Eval = std::function<ExtReal(double)>;
  using Subgrad = std::function<SubgradInterval(double)>;

  struct Config {
    std::optional<ExtReal> slope_pos;  // f'(+inf), when known in closed form
    std::optional<ExtReal> slope_neg;  // f'(-inf)
    Subgrad subgrad;
    Eval conjugate_eval;                        // registered closed-form f*
    std::function<double(double)> conjugate_argmax;  // maximizer of xy - f(x)
  };

  // Default-constructed functions are identically +inf (empty domain).
  ScalarConvexFunction() = default;

  static ScalarConvexFunction closed_form(Eval eval, ExtReal dom_lo, ExtReal dom_hi,
                                          Config cfg = {});
  static ScalarConvexFunction sampled(Eval eval, ExtReal dom_lo, ExtReal dom_hi);

  ExtReal operator()(double x) const;

  ExtReal dom_lo() const { return dom_lo_; }
  ExtReal dom_hi() const { return dom_hi_; }
  FnKind kind() const { return kind_; }

  bool has_registered_slopes() const { return slope_pos_.has_value() && slope_neg_.has_value(); }
  std::optional<ExtReal> registered_slope(int side) const {
    return side >= 0 ? slope_pos_ : slope_neg_;
  }

  // One-sided derivatives; numeric differences when no closed form is set.
  SubgradInterval subgrad(double x) const;

  bool has_registered_conjugate() const { return static_cast<bool>(conj_eval_); }
  ExtReal registered_conjugate(double y) const { return conj_eval_(y); }
  bool has_registered_argmax() const { return static_cast<bool>(conj_argmax_); }
  double registered_argmax(double y) const { return conj_argmax_(y); }

 private:
  Eval eval_ = [](double) { return ExtReal::pos_inf(); };
  ExtReal dom_lo_ = ExtReal::neg_inf();
  ExtReal dom_hi_ = ExtReal::pos_inf();
  FnKind kind_ = FnKind::Sampled;
  std::optional<ExtReal> slope_pos_;
  std::optional<ExtReal> slope_neg_;
  Subgrad subgrad_;
  Eval conj_eval_;
  std::function<double(double)> conj_argmax_;
};

// Asymptotic slope lim f(x)/x for side = +1 or -1. Exact for functions that
// register it, secant extrapolation on a geometric grid otherwise.
ExtReal slope_at_infinity(const ScalarConvexFunction& f, int side);

struct MinimizeOptions {
  double tol = 1e-10;          // width of the final interval of optimality
  double max_width = 1e9;      // expansion budget before UnboundedBelow
  std::optional<double> hard_lo;  // never search below/above these
  std::optional<double> hard_hi;
};

struct MinimizeResult {
  double argmin = 0.0;
  ExtReal min = ExtReal::pos_inf();
};

// Golden-section minimization of a convex extended-real-valued callable with
// automatic bracket expansion. +inf is an ordered value, so implicit domain
// constraints are handled by the objective itself. Flat-bottomed objectives
// resolve to the midpoint of the detected optimal interval.
MinimizeResult minimize_1d(const std::function<ExtReal(double)>& h, double lo, double hi,
                           const MinimizeOptions& opts = {});

struct GridPolicy {
  int coarse_points = 129;   // first log-spaced sweep
  int refine_rounds = 3;     // local grids around the running maximizer
  int refine_points = 33;
  double span = 50.0;        // initial box half-width for unbounded domains
  bool polish = true;        // final golden-section pass on the last bracket
};

enum class ConjugateMethod { ClosedForm, Numeric };

struct ConjugateResult {
  ScalarConvexFunction function;                // f*
  std::function<double(double)> argmax_map;     // y -> maximizer of xy - f(x)
  ConjugateMethod method = ConjugateMethod::Numeric;
  ExtReal dom_interior_lo = ExtReal::neg_inf();  // f'(-inf)
  ExtReal dom_interior_hi = ExtReal::pos_inf();  // f'(+inf)
};

// Convex conjugate f*(y) = sup_x { x y - f(x) }. Uses the registered closed
// form when available, otherwise a coarse log-spaced sweep with local
// refinement around the running maximizer. int(dom f*) = (f'(-inf), f'(+inf)).
ConjugateResult conjugate(const ScalarConvexFunction& f, const GridPolicy& policy = {});

// True when y sits within tol of an endpoint of int(dom f*); values there are
// limits rather than certified closed values.
bool on_conjugate_boundary(const ConjugateResult& r, double y, double tol = 1e-9);

}  // namespace divbound
