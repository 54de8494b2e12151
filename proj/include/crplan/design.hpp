#ifndef CRPLAN_DESIGN_HPP
#define CRPLAN_DESIGN_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace crplan {

/// Raised when a design admits no finite answer (e.g. a pooled incidence
/// rate of zero, which would require infinitely many subjects).
class degenerate_design_error : public std::runtime_error {
 public:
  explicit degenerate_design_error(const std::string& what)
      : std::runtime_error(what) {}
};

/// All planning inputs. Event-of-interest times are Weibull(lambda01, k1)
/// in the control group; the competing event is Weibull(lambda2, k2) in
/// both groups; dropout is exponential with hazard phi; enrollment is
/// uniform over [0, r] with follow-up tf after the last enrollment.
struct DesignParams {
  double lambda01 = 0.0;  // Weibull scale, event of interest, control group
  double k1 = 1.0;        // Weibull shape, event of interest (both groups)
  double lambda2 = 0.0;   // Weibull scale, competing event
  double k2 = 1.0;        // Weibull shape, competing event
  double q01 = 0.0;       // P(event is the event of interest | any event), control
  double phi = 0.0;       // exponential dropout hazard
  double tf = 0.0;        // follow-up period
  double r = 0.0;         // accrual period (0 = instant accrual)
  double delta0 = 0.0;    // non-inferiority margin for the SDH ratio
  double delta1 = 0.0;    // SDH ratio under the alternative
  double alpha = 0.05;    // two-sided type I error
  double power = 0.8;     // 1 - beta
  double p0 = 0.5;        // allocation proportion, control
  double p1 = 0.5;        // allocation proportion, experimental
};

/// Throws std::invalid_argument naming the offending field.
void validate(const DesignParams& params);

enum class SizingMode { sdh, single_event };

struct EventsResult {
  double events_fractional = 0.0;
  std::array<std::int64_t, 2> events_per_group{0, 0};
  std::int64_t events_total = 0;
};

struct SampleSizeResult {
  SizingMode method = SizingMode::sdh;
  double w = 0.0;  // pooled incidence rate of the event of interest
  EventsResult events;
  std::array<std::int64_t, 2> n_per_group{0, 0};
  std::int64_t n_total = 0;
};

/// Probability that a subject in the given group has an observed event of
/// interest during the study, accounting for staggered uniform accrual,
/// exponential dropout and administrative censoring.
///
/// In sdh mode the integrand is the sub-distribution density of the event
/// of interest (group 1 uses the proportional-SDH density with ratio
/// delta1). In single_event mode the competing cause is removed entirely:
/// the latent Weibull density is integrated against censoring alone, which
/// is the incidence rate used by the single-event comparator formula.
double compute_w_group(const DesignParams& params, int group, SizingMode mode,
                       double abs_tol = 1e-10);

/// Events needed in the two groups:
///   (z_{1-alpha/2} + z_{power})^2 / (ln delta0 - ln delta1)^2 / (p0 p1),
/// rounded up per group.
EventsResult required_events(const DesignParams& params);

/// Total sample size N = events_total * (p0 + p1 delta1)^2 / (delta1 w),
/// rounded up per group; the variance factor is 1 at delta1 = 1, giving
/// the plain N = events_total / w.
SampleSizeResult sample_size(const DesignParams& params, SizingMode mode,
                             double abs_tol = 1e-10);

/// Weibull scale such that the median event time equals `median`.
double scale_from_median(double median, double k);

/// Weibull scale such that survival at time t equals s.
double scale_from_survival(double t, double s, double k);

/// Cause-of-interest probability in group 1 implied by the proportional
/// sub-distribution hazard model: 1 - (1 - q01)^delta1.
double q1_for_group1(double q01, double delta1);

}  // namespace crplan

#endif  // CRPLAN_DESIGN_HPP
