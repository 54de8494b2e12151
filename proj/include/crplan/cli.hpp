#ifndef CRPLAN_CLI_HPP
#define CRPLAN_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crplan/power.hpp"

namespace crplan::cli {

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitNoConvergence = 5;

/// Flat configuration document. Every key is optional at this layer;
/// each command checks for the keys it needs and reports missing ones by
/// name. Unknown keys in a config file are rejected.
struct RunConfig {
  std::optional<double> lambda01, k1, lambda2, k2, q01, phi, tf, r;
  std::optional<double> delta0, delta1, alpha, power, p0, p1;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> replications, n0, n1;
  std::optional<std::string> hypothesis;  // "null" | "alt"
  std::optional<std::string> mode;        // "sdh" | "single-event"

  bool operator==(const RunConfig&) const = default;
};

/// Parse a JSON config document; throws std::invalid_argument on unknown
/// keys or ill-typed values.
RunConfig parse_config_json(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Compact one-line JSON with exactly the keys that are set.
std::string config_json(const RunConfig& config);

/// Overlay flag-provided values on top of file-provided ones.
void merge_overrides(RunConfig& base, const RunConfig& overrides);

// Command implementations. Each returns an exit code and writes human
// output to `out`, diagnostics to `err`.

int cmd_size(const RunConfig& config, std::ostream& out, std::ostream& err,
             const std::string& json_out_path = "");

int cmd_reproduce_table2(std::ostream& out, std::ostream& err,
                         const std::string& out_path = "");

int cmd_simulate(const RunConfig& config, const std::string& out_path,
                 bool with_censor_times, std::ostream& out, std::ostream& err);

int cmd_fit(const std::string& dataset_path, const RunConfig& config,
            bool oracle, std::ostream& out, std::ostream& err,
            const std::string& json_out_path = "");

struct PowerInvocation {
  RunConfig config;
  bool grid_table1 = false;  // grid mode takes tf/r from the config keys
                             // (defaults 1 and 0.5) and ignores the rest
  std::string out_csv;
  std::string plot_path;     // optional SVG
  int threads = 1;
};

int cmd_power(const PowerInvocation& inv, std::ostream& out, std::ostream& err);

/// Scatter of rejection rate against mean censoring fraction with a
/// dashed reference line at the target (power or alpha/2) per hypothesis.
void write_power_svg(std::ostream& out,
                     const std::vector<PowerStudyResult>& results);

}  // namespace crplan::cli

#endif  // CRPLAN_CLI_HPP
