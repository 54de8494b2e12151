#include "crplan/design.hpp"

#include <cmath>
#include <stdexcept>

#include "crplan/numerics.hpp"

namespace crplan {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

std::int64_t ceil_to_int(double x) {
  return static_cast<std::int64_t>(std::ceil(x));
}

// Sub-distribution density of the event of interest in group x, written
// in the transformed variable v = u^{k1} (which removes the u^{k1-1}
// endpoint singularity for k1 < 1):
//   psi(v) = eta q lambda e^{-lambda v} {1 - q(1 - e^{-lambda v})}^{eta-1}
//            * e^{-phi v^{1/k1}},
// where eta = delta1 for group 1 and 1 for group 0, and q = 1 in
// single-event mode. For q = 1 the bracket collapses to e^{-lambda v
// (eta-1)}, handled separately to avoid 0^negative at large v.
struct SubDensity {
  double lambda, k, q, eta, phi;

  double in_v(double v) const {
    const double cens = phi > 0.0 ? std::exp(-phi * std::pow(v, 1.0 / k)) : 1.0;
    if (q >= 1.0) {
      return eta * lambda * std::exp(-eta * lambda * v) * cens;
    }
    const double ev = std::exp(-lambda * v);
    const double base = 1.0 - q * (1.0 - ev);
    return eta * q * lambda * ev * std::pow(base, eta - 1.0) * cens;
  }

  double in_u(double u) const {
    const double v = std::pow(u, k);
    const double cens = phi > 0.0 ? std::exp(-phi * u) : 1.0;
    const double jac = k * std::pow(u, k - 1.0);
    if (q >= 1.0) {
      return jac * eta * lambda * std::exp(-eta * lambda * v) * cens;
    }
    const double ev = std::exp(-lambda * v);
    const double base = 1.0 - q * (1.0 - ev);
    return jac * eta * q * lambda * ev * std::pow(base, eta - 1.0) * cens;
  }
};

}  // namespace

void validate(const DesignParams& p) {
  require(p.lambda01 > 0.0, "lambda01 must be > 0");
  require(p.k1 > 0.0, "k1 must be > 0");
  require(p.lambda2 >= 0.0, "lambda2 must be >= 0");
  require(p.k2 > 0.0, "k2 must be > 0");
  require(p.q01 >= 0.0 && p.q01 <= 1.0, "q01 must lie in [0,1]");
  require(p.phi >= 0.0, "phi must be >= 0");
  require(p.tf > 0.0, "tf must be > 0");
  require(p.r >= 0.0, "r must be >= 0");
  require(p.delta0 > 0.0, "delta0 must be > 0");
  require(p.delta1 > 0.0, "delta1 must be > 0");
  require(p.delta1 < p.delta0, "delta1 must be < delta0");
  require(p.alpha > 0.0 && p.alpha < 1.0, "alpha must lie in (0,1)");
  require(p.power > 0.0 && p.power < 1.0, "power must lie in (0,1)");
  require(p.p0 > 0.0 && p.p0 < 1.0, "p0 must lie in (0,1)");
  require(p.p1 > 0.0 && p.p1 < 1.0, "p1 must lie in (0,1)");
  require(std::abs(p.p0 + p.p1 - 1.0) <= 1e-12, "p0 + p1 must equal 1");
}

double compute_w_group(const DesignParams& params, int group, SizingMode mode,
                       double abs_tol) {
  if (group != 0 && group != 1) {
    throw std::invalid_argument("group must be 0 or 1");
  }
  validate(params);
  const double q = mode == SizingMode::sdh ? params.q01 : 1.0;
  if (q == 0.0) return 0.0;

  const SubDensity density{params.lambda01, params.k1, q,
                           group == 1 ? params.delta1 : 1.0, params.phi};
  const double tf = params.tf;
  const double r = params.r;

  // fun integrates the density over [0, tf] plus the accrual-weighted
  // tail over [tf, tf+r]; for k1 < 1 the same integrals are evaluated in
  // v = u^{k1}, where the integrand is bounded at 0.
  if (params.k1 >= 1.0) {
    auto f = [&](double u) { return density.in_u(u); };
    double w = integrate(f, 0.0, tf, abs_tol);
    if (r > 0.0) {
      auto tail = [&](double u) { return (tf + r - u) * density.in_u(u); };
      w += integrate(tail, tf, tf + r, abs_tol) / r;
    }
    return w;
  }
  const double inv_k = 1.0 / params.k1;
  auto f = [&](double v) { return density.in_v(v); };
  double w = integrate(f, 0.0, std::pow(tf, params.k1), abs_tol);
  if (r > 0.0) {
    auto tail = [&](double v) {
      return (tf + r - std::pow(v, inv_k)) * density.in_v(v);
    };
    w += integrate(tail, std::pow(tf, params.k1), std::pow(tf + r, params.k1),
                   abs_tol) /
         r;
  }
  return w;
}

EventsResult required_events(const DesignParams& params) {
  if (params.delta0 == params.delta1) {
    throw std::invalid_argument(
        "delta0 and delta1 coincide: no finite trial separates the hypotheses");
  }
  validate(params);
  const double z_alpha = normal_quantile(1.0 - params.alpha / 2.0);
  const double z_power = normal_quantile(params.power);
  const double log_gap = std::log(params.delta0) - std::log(params.delta1);
  EventsResult out;
  out.events_fractional = (z_alpha + z_power) * (z_alpha + z_power) /
                          (log_gap * log_gap) / (params.p0 * params.p1);
  out.events_per_group[0] = ceil_to_int(out.events_fractional * params.p0);
  out.events_per_group[1] = ceil_to_int(out.events_fractional * params.p1);
  out.events_total = out.events_per_group[0] + out.events_per_group[1];
  return out;
}

SampleSizeResult sample_size(const DesignParams& params, SizingMode mode,
                             double abs_tol) {
  SampleSizeResult out;
  out.method = mode;
  out.events = required_events(params);
  out.w = params.p0 * compute_w_group(params, 0, mode, abs_tol) +
          params.p1 * compute_w_group(params, 1, mode, abs_tol);
  if (!(out.w > 0.0)) {
    throw degenerate_design_error(
        "pooled incidence rate w is zero: no events of interest can be "
        "observed, so no finite sample size exists");
  }
  // Variance of the Wald statistic at the alternative:
  //   V(b1) = (p0 + p1 delta1)^2 / (p0 p1 delta1 w),
  // which is 1/(p0 p1 w) at delta1 = 1; the leading factor drops out of
  // the events term and scales N in the superiority mode.
  const double d1 = params.delta1;
  const double variance_factor =
      (params.p0 + params.p1 * d1) * (params.p0 + params.p1 * d1) / d1;
  const double n_fractional =
      static_cast<double>(out.events.events_total) * variance_factor / out.w;
  out.n_per_group[0] = ceil_to_int(n_fractional * params.p0);
  out.n_per_group[1] = ceil_to_int(n_fractional * params.p1);
  out.n_total = out.n_per_group[0] + out.n_per_group[1];
  return out;
}

double scale_from_median(double median, double k) {
  if (!(median > 0.0)) throw std::invalid_argument("median must be > 0");
  if (!(k > 0.0)) throw std::invalid_argument("k must be > 0");
  return -std::log(0.5) / std::pow(median, k);
}

double scale_from_survival(double t, double s, double k) {
  if (!(t > 0.0)) throw std::invalid_argument("t must be > 0");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
  if (!(k > 0.0)) throw std::invalid_argument("k must be > 0");
  return -std::log(s) / std::pow(t, k);
}

double q1_for_group1(double q01, double delta1) {
  if (!(q01 > 0.0 && q01 <= 1.0)) {
    throw std::invalid_argument("q01 must lie in (0,1]");
  }
  if (!(delta1 > 0.0)) throw std::invalid_argument("delta1 must be > 0");
  return 1.0 - std::pow(1.0 - q01, delta1);
}

}  // namespace crplan
