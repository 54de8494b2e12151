#ifndef CRPLAN_FINEGRAY_HPP
#define CRPLAN_FINEGRAY_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "crplan/numerics.hpp"
#include "crplan/simgen.hpp"

namespace crplan {

enum class WeightMode { ipcw_km, oracle };

enum class Decision { non_inferior, not_shown };

struct FineGrayFit {
  double b_hat = 0.0;     // estimated log SDH ratio
  double se = 0.0;        // model-based standard error, 1/sqrt(I_n(b_hat))
  double ci_lower = 0.0;  // two-sided CI on the SDH-ratio scale
  double ci_upper = 0.0;
  int iterations = 0;
  bool converged = false;
  WeightMode mode = WeightMode::ipcw_km;
};

/// Kaplan-Meier estimate of the censoring survival function G, pooled
/// over groups: status 0 is the "event", statuses 1 and 2 are censored
/// for G. Right-continuous with G(0) = 1.
StepFunction km_censoring(const std::vector<SubjectRecord>& data);

/// Membership weights of the sub-distribution risk set. A subject still
/// event-free and under observation at t has weight 1; a censored subject
/// has weight 0 past its censoring; a competing-event subject at t > T_i
/// keeps weight G(t-)/G(T_i-) (IPCW mode) or the indicator that its known
/// censoring time has not passed (oracle mode). Weighted group risk sums
/// at each event of interest are precomputed for the score loop.
class RiskSetWeights {
 public:
  struct EventTerm {
    double time;
    int group;  // group of the subject whose event this is
    double y0;  // weighted size of the group-0 risk set at time
    double y1;
  };

  static RiskSetWeights build(const std::vector<SubjectRecord>& data,
                              WeightMode mode);

  double weight(std::size_t subject, double t) const;
  const std::vector<EventTerm>& event_terms() const { return terms_; }
  const StepFunction& censoring_survival() const { return ghat_; }
  WeightMode mode() const { return mode_; }
  std::size_t subject_count() const { return time_.size(); }

 private:
  WeightMode mode_ = WeightMode::ipcw_km;
  StepFunction ghat_;
  std::vector<EventTerm> terms_;
  std::vector<double> time_;
  std::vector<double> censor_;
  std::vector<int> status_;
};

/// Weighted score and information of the partial likelihood at b:
///   s(b) = sum over events [x_i - Y1 e^b / (Y0 + Y1 e^b)],
///   I(b) = sum over events  Y0 Y1 e^b / (Y0 + Y1 e^b)^2.
/// Throws std::invalid_argument when the data contain no events of
/// interest (the likelihood carries no information on b).
std::pair<double, double> score_and_information(double b,
                                                const std::vector<SubjectRecord>& data,
                                                const RiskSetWeights& weights);

/// Newton-Raphson maximization of the partial likelihood from b = 0 with
/// step halving; declares convergence when both |s| < 1e-8 and the last
/// step is < 1e-10, gives up past |b| > 20 (monotone likelihood) or 50
/// iterations. alpha is the two-sided level of the reported CI.
FineGrayFit fit(const std::vector<SubjectRecord>& data, WeightMode mode,
                double alpha = 0.05);

/// Non-inferiority is shown iff the CI upper limit stays strictly below
/// the margin. Throws std::invalid_argument on an unconverged fit.
Decision noninferiority_decision(const FineGrayFit& fit, double delta0);

/// JSON object with keys b_hat, se, ci_lower, ci_upper, converged,
/// iterations, mode.
std::string fit_json(const FineGrayFit& fit);

}  // namespace crplan

#endif  // CRPLAN_FINEGRAY_HPP
