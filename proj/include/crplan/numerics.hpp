#ifndef CRPLAN_NUMERICS_HPP
#define CRPLAN_NUMERICS_HPP

#include <functional>
#include <vector>

namespace crplan {

/// Lower quantile of the standard normal distribution: returns x with
/// Phi(x) = p, accurate to better than 1e-9 in absolute terms.
/// Throws std::invalid_argument unless 0 < p < 1.
double normal_quantile(double p);

/// Standard normal CDF (erfc-based, close to machine precision).
double normal_cdf(double x);

/// Adaptive Gauss-Kronrod (G7,K15) quadrature of f over the finite
/// interval [a, b]. Subdivides until the estimated absolute error is
/// <= abs_tol; throws std::runtime_error if the refinement budget is
/// exhausted first. Integrable endpoint singularities at a are fine:
/// nodes are interior, so f is never evaluated at the endpoints.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

/// Right-continuous step function: value(t) = values[i] on
/// [breakpoints[i], breakpoints[i+1]), and initial_value for
/// t < breakpoints[0]. Breakpoints must be strictly ascending.
class StepFunction {
 public:
  StepFunction() : initial_(1.0) {}
  StepFunction(std::vector<double> breakpoints, std::vector<double> values,
               double initial_value);

  double operator()(double t) const;
  /// Value just before t, i.e. the limit from the left.
  double left_limit(double t) const;

  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }
  double initial_value() const { return initial_; }

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
  double initial_;
};

inline double step_eval(const StepFunction& s, double t) { return s(t); }

}  // namespace crplan

#endif  // CRPLAN_NUMERICS_HPP
