#include "crplan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

namespace crplan {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Acklam's rational approximation to the normal quantile,
// |relative error| < 1.15e-9 over (0,1).
double acklam_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie in (0,1), got " +
                                std::to_string(p));
  }
  double x = acklam_quantile(p);
  // Newton refinement on Phi(x) - p; two steps take the rational
  // approximation down to machine precision wherever the density is
  // representable.
  for (int i = 0; i < 2; ++i) {
    double density = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    if (density <= 0.0) break;
    x -= (normal_cdf(x) - p) / density;
  }
  return x;
}

namespace {

// 15-point Kronrod abscissae on [-1,1] (positive half) and weights,
// with the embedded 7-point Gauss weights on the odd-indexed nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// Single Gauss-Kronrod panel with the QUADPACK-style error estimate.
Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double center = 0.5 * (a + b);

  double fv[15];
  const double fc = f(center);
  double resg = kWg[3] * fc;
  double resk = kWgk[7] * fc;
  double resabs = kWgk[7] * std::abs(fc);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv[j] = f(center - dx);
    fv[j + 8] = f(center + dx);
    const double sum = fv[j] + fv[j + 8];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(fv[j]) + std::abs(fv[j + 8]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv[j] - reskh) + std::abs(fv[j + 8] - reskh));
  }

  double err = std::abs((resk - resg) * half);
  resasc *= std::abs(half);
  resabs *= std::abs(half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(eps * 50.0 * resabs, err);
  }
  return Segment{a, b, resk * half, err};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
  if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
  if (a == b) return 0.0;

  constexpr int kMaxSegments = 4096;

  std::priority_queue<Segment> queue;
  Segment s0 = gk15(f, a, b);
  if (!std::isfinite(s0.value) || !std::isfinite(s0.error)) {
    throw std::runtime_error("integrate: integrand produced a non-finite value");
  }
  double total = s0.value;
  double total_err = s0.error;
  queue.push(s0);
  int segments = 1;

  while (total_err > abs_tol) {
    if (segments >= kMaxSegments) {
      throw std::runtime_error(
          "integrate: failed to reach abs_tol=" + std::to_string(abs_tol) +
          " within the refinement budget (estimated error " +
          std::to_string(total_err) + ")");
    }
    Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval is at floating-point resolution; accept its estimate.
      total_err = std::max(0.0, total_err - worst.error);
      continue;
    }
    Segment left = gk15(f, worst.a, mid);
    Segment right = gk15(f, mid, worst.b);
    if (!std::isfinite(left.value + left.error) ||
        !std::isfinite(right.value + right.error)) {
      throw std::runtime_error("integrate: integrand produced a non-finite value");
    }
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++segments;
  }
  return total;
}

StepFunction::StepFunction(std::vector<double> breakpoints,
                           std::vector<double> values, double initial_value)
    : breaks_(std::move(breakpoints)),
      values_(std::move(values)),
      initial_(initial_value) {
  if (breaks_.size() != values_.size()) {
    throw std::invalid_argument(
        "StepFunction: breakpoints and values must have equal length");
  }
  for (std::size_t i = 1; i < breaks_.size(); ++i) {
    if (!(breaks_[i - 1] < breaks_[i])) {
      throw std::invalid_argument(
          "StepFunction: breakpoints must be strictly ascending");
    }
  }
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  if (it == breaks_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
  auto it = std::lower_bound(breaks_.begin(), breaks_.end(), t);
  if (it == breaks_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

}  // namespace crplan
