#ifndef CRPLAN_POWER_HPP
#define CRPLAN_POWER_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "crplan/design.hpp"

namespace crplan {

enum class Hypothesis { null_margin, alternative };

/// One Monte Carlo study cell: design inputs plus replication control.
/// Data are generated with b = ln(delta0) under the null hypothesis and
/// b = ln(delta1) under the alternative. Group sizes default to the SDH
/// sample-size formula unless n_override is given.
struct PowerScenario {
  DesignParams design;
  std::int64_t replications = 1;
  Hypothesis hypothesis = Hypothesis::alternative;
  std::optional<std::array<std::int64_t, 2>> n_override;
};

void validate(const PowerScenario& s);

struct PowerStudyResult {
  PowerScenario scenario;
  std::array<std::int64_t, 2> n_per_group{0, 0};
  double rejection_rate = 0.0;
  double mc_stderr = 0.0;
  double mean_frac_censored = 0.0;
  double mean_frac_event1 = 0.0;
  double mean_frac_event2 = 0.0;
  std::int64_t unconverged_count = 0;
  std::uint64_t seed = 0;
};

/// Run one scenario: per replication, generate a dataset with the
/// hypothesis-dependent b, fit the Fine-Gray model (IPCW weights) and
/// test the CI upper limit against delta0. Unconverged fits count as
/// failures to show non-inferiority. Replication r draws its seed from
/// (seed, r), so the result is independent of n_threads.
PowerStudyResult run_scenario(const PowerScenario& s, std::uint64_t seed,
                              int n_threads = 1);

/// The 120-combination simulation grid: q01 in {0.3, 0.5, 0.8},
/// (k1,k2) in {(0.5,0.5),(1,1),(2,2),(0.5,1.5),(1.5,0.5)}, lambda01 in
/// {1,2}, lambda2 in {0.15,0.5}, phi in {0,0.1}, margin 1.3 vs 1.0 at
/// two-sided alpha 0.05 and target power 0.8 with 1:1 allocation.
std::vector<PowerScenario> table1_grid(double tf, double r_accrual,
                                       Hypothesis hypothesis = Hypothesis::alternative);

/// Run every scenario (reps_per_scenario overrides each scenario's
/// replication count when > 0). Scenario i derives its seed from
/// (seed, i); output order equals grid order for any parallelism degree.
std::vector<PowerStudyResult> run_grid(const std::vector<PowerScenario>& grid,
                                       std::int64_t reps_per_scenario,
                                       std::uint64_t seed, int parallelism);

/// CSV export with one row per scenario.
void write_power_csv(std::ostream& out,
                     const std::vector<PowerStudyResult>& results);

}  // namespace crplan

#endif  // CRPLAN_POWER_HPP
