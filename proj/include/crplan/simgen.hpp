#ifndef CRPLAN_SIMGEN_HPP
#define CRPLAN_SIMGEN_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "crplan/rng.hpp"

namespace crplan {

/// One simulated trial arm-pair configuration. b is the true log SDH
/// ratio used to generate the data (0 under proportional hazards equal
/// groups, ln(delta) otherwise).
struct GenScenario {
  double lambda01 = 0.0;
  double k1 = 1.0;
  double lambda2 = 0.0;
  double k2 = 1.0;
  double q01 = 0.0;
  double phi = 0.0;
  double tf = 0.0;
  double r = 0.0;
  double b = 0.0;
  std::int64_t n0 = 0;
  std::int64_t n1 = 0;
  std::uint64_t seed = 0;
};

void validate(const GenScenario& scen);

/// One observed subject. censor_time is the generated censoring time
/// min(dropout, administrative); it is NaN for imported datasets that do
/// not carry the oracle column.
struct SubjectRecord {
  double time = 0.0;    // observed time from entry
  int status = 0;       // 0 censored, 1 event of interest, 2 competing event
  int group = 0;        // 0 control, 1 experimental
  double entry = 0.0;   // enrollment time in [0, r]
  double censor_time = 0.0;

  bool operator==(const SubjectRecord&) const = default;
};

bool has_censor_times(const std::vector<SubjectRecord>& data);

/// Inverse of the conditional cause-1 CDF: given u in [0,1), the latent
/// event time t with CIF1(t|x) = u * P(cause 1 | x).
double latent_cause1_time(double u, const GenScenario& scen, int group);

/// Inverse of the conditional cause-2 CDF.
double latent_cause2_time(double u, const GenScenario& scen, int group);

/// Draw (cause, latent event time) for one subject of the given group.
/// Consumes exactly two uniforms: cause, then conditional time.
std::pair<int, double> sample_latent_event(rng::Stream& stream, int group,
                                           const GenScenario& scen);

/// Generate the full trial: n0 control + n1 experimental subjects with
/// uniform enrollment over [0, r], exponential dropout and administrative
/// censoring at tf + r - entry. Subject i draws from the substream keyed
/// by (scen.seed, i), so the output is a pure function of the scenario.
std::vector<SubjectRecord> generate_dataset(const GenScenario& scen);

struct EventMix {
  double frac_event1 = 0.0;
  double frac_event2 = 0.0;
  double frac_censored = 0.0;
};

struct DatasetSummary {
  std::array<EventMix, 2> by_group{};
  std::array<std::int64_t, 2> n_by_group{0, 0};
  EventMix pooled;
};

DatasetSummary summarize_dataset(const std::vector<SubjectRecord>& data);

/// CSV export: header `id,group,entry,time,status`, ids starting at 1,
/// times as shortest round-trip decimal literals. with_censor_times adds
/// the oracle `censor_time` column.
void write_dataset_csv(std::ostream& out, const std::vector<SubjectRecord>& data,
                       bool with_censor_times);

/// CSV import; accepts both header variants. Malformed input raises
/// std::invalid_argument with the 1-based line number.
std::vector<SubjectRecord> read_dataset_csv(std::istream& in);

}  // namespace crplan

#endif  // CRPLAN_SIMGEN_HPP
