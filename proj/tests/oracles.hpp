// Independent reference implementations used only by tests. Everything
// here is deliberately written from the defining formulas (series,
// closed-form antiderivatives, O(n^2) risk sets, grid search) so it does
// not share code paths with the library it checks.
#ifndef CRPLAN_TESTS_ORACLES_HPP
#define CRPLAN_TESTS_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "crplan/finegray.hpp"
#include "crplan/simgen.hpp"

namespace oracles {

/// erf via the positive-term scaled Maclaurin series in long double:
/// erf(z) = (2/sqrt(pi)) e^{-z^2} sum_n z^{2n+1} 2^n / (1*3*...*(2n+1)).
long double erf_series(long double z);

/// Standard normal CDF built on erf_series.
double phi(double x);

/// Standard normal quantile by bisection on phi.
double quantile_by_bisection(double p);

/// Incidence rate of the event of interest for exponential event times
/// (shape 1) with dropout hazard phi, follow-up tf, accrual r:
///   w = q * lam/(lam+phi) * [1 - (e^{-a tf} - e^{-a(tf+r)}) / (a r)],
/// a = lam + phi; the no-accrual limit for r = 0.
double w_exponential(double lam, double q, double phi, double tf, double r);

/// Incidence rate for shape 1/2 and no dropout, via the substitution
/// v = sqrt(u) and the antiderivative of v^2 e^{-lam v}.
double w_sqrt_shape(double lam, double q, double tf, double r);

/// Weighted risk-set sums (Y0, Y1) at time t computed directly from the
/// definition: each subject contributes its weight, where a competing
/// event subject keeps Ghat(t-)/Ghat(T_i-) (IPCW) or its known-censoring
/// indicator (oracle mode). O(n^2) overall.
void naive_risk_sums(const std::vector<crplan::SubjectRecord>& data,
                     crplan::WeightMode mode, double t, double& y0, double& y1);

/// Log partial likelihood evaluated from the naive risk sums.
double naive_log_partial_likelihood(const std::vector<crplan::SubjectRecord>& data,
                                    crplan::WeightMode mode, double b);

/// Grid-search maximizer of the log partial likelihood over [-5, 5],
/// refined to a 1e-7 grid (the likelihood is concave in b).
double grid_search_bhat(const std::vector<crplan::SubjectRecord>& data,
                        crplan::WeightMode mode);

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Small random competing-risks datasets for property tests; uses its
/// own generator, unrelated to the library RNG.
std::vector<crplan::SubjectRecord> random_small_dataset(std::uint64_t seed,
                                                        int max_n = 12);

}  // namespace oracles

#endif  // CRPLAN_TESTS_ORACLES_HPP
