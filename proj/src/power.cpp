#include "crplan/power.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "crplan/finegray.hpp"
#include "crplan/rng.hpp"
#include "crplan/simgen.hpp"

namespace crplan {

namespace {

struct RepOutcome {
  bool rejected = false;
  bool converged = false;
  double frac_censored = 0.0;
  double frac_event1 = 0.0;
  double frac_event2 = 0.0;
};

RepOutcome run_one(const PowerScenario& s, const GenScenario& base,
                   std::uint64_t rep_seed) {
  GenScenario scen = base;
  scen.seed = rep_seed;
  const auto data = generate_dataset(scen);
  const auto summary = summarize_dataset(data);

  RepOutcome out;
  out.frac_censored = summary.pooled.frac_censored;
  out.frac_event1 = summary.pooled.frac_event1;
  out.frac_event2 = summary.pooled.frac_event2;
  try {
    const auto fg = fit(data, WeightMode::ipcw_km, s.design.alpha);
    out.converged = fg.converged;
    if (fg.converged) {
      out.rejected = noninferiority_decision(fg, s.design.delta0) ==
                     Decision::non_inferior;
    }
  } catch (const std::invalid_argument&) {
    // A replication can come up with no events of interest at all; the
    // likelihood is flat, so it cannot show non-inferiority.
    out.converged = false;
  }
  return out;
}

void append_double(std::string& line, double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  line.append(buf, ptr);
}

}  // namespace

void validate(const PowerScenario& s) {
  validate(s.design);
  if (s.replications < 1) {
    throw std::invalid_argument("replications must be >= 1");
  }
  if (s.n_override && ((*s.n_override)[0] < 1 || (*s.n_override)[1] < 1)) {
    throw std::invalid_argument("n_override group sizes must be >= 1");
  }
}

PowerStudyResult run_scenario(const PowerScenario& s, std::uint64_t seed,
                              int n_threads) {
  validate(s);

  PowerStudyResult out;
  out.scenario = s;
  out.seed = seed;
  out.n_per_group = s.n_override
                        ? *s.n_override
                        : sample_size(s.design, SizingMode::sdh).n_per_group;

  GenScenario base;
  base.lambda01 = s.design.lambda01;
  base.k1 = s.design.k1;
  base.lambda2 = s.design.lambda2;
  base.k2 = s.design.k2;
  base.q01 = s.design.q01;
  base.phi = s.design.phi;
  base.tf = s.design.tf;
  base.r = s.design.r;
  base.b = std::log(s.hypothesis == Hypothesis::null_margin ? s.design.delta0
                                                            : s.design.delta1);
  base.n0 = out.n_per_group[0];
  base.n1 = out.n_per_group[1];

  const auto reps = static_cast<std::size_t>(s.replications);
  std::vector<RepOutcome> outcomes(reps);

  const int workers = std::max(1, n_threads);
  if (workers == 1 || reps == 1) {
    for (std::size_t rep = 0; rep < reps; ++rep) {
      outcomes[rep] = run_one(s, base, rng::derive(seed, rep));
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t rep = next.fetch_add(1);
        if (rep >= reps) return;
        outcomes[rep] = run_one(s, base, rng::derive(seed, rep));
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Reduce in replication order so the result does not depend on thread
  // scheduling.
  std::int64_t rejected = 0;
  for (const auto& o : outcomes) {
    rejected += o.rejected ? 1 : 0;
    out.unconverged_count += o.converged ? 0 : 1;
    out.mean_frac_censored += o.frac_censored;
    out.mean_frac_event1 += o.frac_event1;
    out.mean_frac_event2 += o.frac_event2;
  }
  const auto n_reps = static_cast<double>(reps);
  out.rejection_rate = static_cast<double>(rejected) / n_reps;
  out.mc_stderr =
      std::sqrt(out.rejection_rate * (1.0 - out.rejection_rate) / n_reps);
  out.mean_frac_censored /= n_reps;
  out.mean_frac_event1 /= n_reps;
  out.mean_frac_event2 /= n_reps;
  return out;
}

std::vector<PowerScenario> table1_grid(double tf, double r_accrual,
                                       Hypothesis hypothesis) {
  if (!(tf > 0.0)) throw std::invalid_argument("tf must be > 0");
  if (!(r_accrual >= 0.0)) throw std::invalid_argument("r must be >= 0");

  static constexpr double kQ01[] = {0.3, 0.5, 0.8};
  static constexpr std::pair<double, double> kShapes[] = {
      {0.5, 0.5}, {1.0, 1.0}, {2.0, 2.0}, {0.5, 1.5}, {1.5, 0.5}};
  static constexpr double kLambda01[] = {1.0, 2.0};
  static constexpr double kLambda2[] = {0.15, 0.5};
  static constexpr double kPhi[] = {0.0, 0.1};

  std::vector<PowerScenario> grid;
  grid.reserve(120);
  for (double q01 : kQ01) {
    for (auto [k1, k2] : kShapes) {
      for (double lambda01 : kLambda01) {
        for (double lambda2 : kLambda2) {
          for (double phi : kPhi) {
            PowerScenario s;
            s.design.lambda01 = lambda01;
            s.design.k1 = k1;
            s.design.lambda2 = lambda2;
            s.design.k2 = k2;
            s.design.q01 = q01;
            s.design.phi = phi;
            s.design.tf = tf;
            s.design.r = r_accrual;
            s.design.delta0 = 1.3;
            s.design.delta1 = 1.0;
            s.design.alpha = 0.05;
            s.design.power = 0.8;
            s.design.p0 = 0.5;
            s.design.p1 = 0.5;
            s.replications = 10000;
            s.hypothesis = hypothesis;
            grid.push_back(s);
          }
        }
      }
    }
  }
  return grid;
}

std::vector<PowerStudyResult> run_grid(const std::vector<PowerScenario>& grid,
                                       std::int64_t reps_per_scenario,
                                       std::uint64_t seed, int parallelism) {
  if (grid.empty()) throw std::invalid_argument("run_grid: empty grid");
  std::vector<PowerStudyResult> results;
  results.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    PowerScenario s = grid[i];
    if (reps_per_scenario > 0) s.replications = reps_per_scenario;
    results.push_back(run_scenario(s, rng::derive(seed, i), parallelism));
  }
  return results;
}

void write_power_csv(std::ostream& out,
                     const std::vector<PowerStudyResult>& results) {
  out << "q01,k1,k2,lambda01,lambda2,phi,delta0,delta1,hypothesis,n0,n1,reps,"
         "rejection_rate,mc_stderr,frac_censored,frac_event1,frac_event2,"
         "unconverged,seed\n";
  std::string line;
  for (const auto& res : results) {
    const auto& d = res.scenario.design;
    line.clear();
    append_double(line, d.q01);
    line.push_back(',');
    append_double(line, d.k1);
    line.push_back(',');
    append_double(line, d.k2);
    line.push_back(',');
    append_double(line, d.lambda01);
    line.push_back(',');
    append_double(line, d.lambda2);
    line.push_back(',');
    append_double(line, d.phi);
    line.push_back(',');
    append_double(line, d.delta0);
    line.push_back(',');
    append_double(line, d.delta1);
    line.push_back(',');
    line += res.scenario.hypothesis == Hypothesis::null_margin ? "NULL" : "ALT";
    line.push_back(',');
    line += std::to_string(res.n_per_group[0]);
    line.push_back(',');
    line += std::to_string(res.n_per_group[1]);
    line.push_back(',');
    line += std::to_string(res.scenario.replications);
    line.push_back(',');
    append_double(line, res.rejection_rate);
    line.push_back(',');
    append_double(line, res.mc_stderr);
    line.push_back(',');
    append_double(line, res.mean_frac_censored);
    line.push_back(',');
    append_double(line, res.mean_frac_event1);
    line.push_back(',');
    append_double(line, res.mean_frac_event2);
    line.push_back(',');
    line += std::to_string(res.unconverged_count);
    line.push_back(',');
    line += std::to_string(res.seed);
    line.push_back('\n');
    out << line;
  }
}

}  // namespace crplan
