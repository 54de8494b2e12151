#include "crplan/simgen.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace crplan {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void append_double(std::string& line, double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  line.append(buf, ptr);
}

double parse_double(std::string_view field, std::size_t line_no,
                    const char* name) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::invalid_argument("line " + std::to_string(line_no) +
                                ": cannot parse " + name + " value '" +
                                std::string(field) + "'");
  }
  return out;
}

}  // namespace

void validate(const GenScenario& s) {
  require(s.lambda01 > 0.0, "lambda01 must be > 0");
  require(s.k1 > 0.0, "k1 must be > 0");
  require(s.k2 > 0.0, "k2 must be > 0");
  require(s.q01 >= 0.0 && s.q01 <= 1.0, "q01 must lie in [0,1]");
  require(s.lambda2 > 0.0 || s.q01 >= 1.0,
          "lambda2 must be > 0 when q01 < 1 (the competing cause has mass)");
  require(s.lambda2 >= 0.0, "lambda2 must be >= 0");
  require(s.phi >= 0.0, "phi must be >= 0");
  require(s.tf > 0.0, "tf must be > 0");
  require(s.r >= 0.0, "r must be >= 0");
  require(std::isfinite(s.b), "b must be finite");
  require(s.n0 >= 1 && s.n1 >= 1, "n0 and n1 must be >= 1");
}

bool has_censor_times(const std::vector<SubjectRecord>& data) {
  for (const auto& rec : data) {
    if (std::isnan(rec.censor_time)) return false;
  }
  return true;
}

double latent_cause1_time(double u, const GenScenario& scen, int group) {
  const double eta = group == 1 ? std::exp(scen.b) : 1.0;
  const double mass = 1.0 - std::pow(1.0 - scen.q01, eta);
  const double target = u * mass;  // CIF1 value to invert
  const double w = (1.0 - std::pow(1.0 - target, 1.0 / eta)) / scen.q01;
  return std::pow(-std::log1p(-w) / scen.lambda01, 1.0 / scen.k1);
}

double latent_cause2_time(double u, const GenScenario& scen, int group) {
  const double eta = group == 1 ? std::exp(scen.b) : 1.0;
  return std::pow(-std::log1p(-u) / (scen.lambda2 * eta), 1.0 / scen.k2);
}

std::pair<int, double> sample_latent_event(rng::Stream& stream, int group,
                                           const GenScenario& scen) {
  const double eta = group == 1 ? std::exp(scen.b) : 1.0;
  const double mass1 = 1.0 - std::pow(1.0 - scen.q01, eta);
  const double u_cause = stream.next_uniform();
  const double u_time = stream.next_uniform();
  if (u_cause < mass1) {
    return {1, latent_cause1_time(u_time, scen, group)};
  }
  return {2, latent_cause2_time(u_time, scen, group)};
}

std::vector<SubjectRecord> generate_dataset(const GenScenario& scen) {
  validate(scen);
  const std::int64_t n = scen.n0 + scen.n1;
  std::vector<SubjectRecord> data(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    auto stream = rng::Stream::keyed(scen.seed, static_cast<std::uint64_t>(i));
    const int group = i < scen.n0 ? 0 : 1;
    const auto [cause, latent_time] = sample_latent_event(stream, group, scen);
    const double entry = scen.r > 0.0 ? stream.next_uniform() * scen.r : 0.0;
    const double dropout = stream.next_exponential(scen.phi);
    const double censor = std::min(dropout, scen.tf + scen.r - entry);

    auto& rec = data[static_cast<std::size_t>(i)];
    rec.group = group;
    rec.entry = entry;
    rec.censor_time = censor;
    if (latent_time <= censor) {
      rec.time = latent_time;
      rec.status = cause;
    } else {
      rec.time = censor;
      rec.status = 0;
    }
  }
  return data;
}

DatasetSummary summarize_dataset(const std::vector<SubjectRecord>& data) {
  if (data.empty()) {
    throw std::invalid_argument("summarize_dataset: empty dataset");
  }
  DatasetSummary out;
  std::array<std::array<std::int64_t, 3>, 2> counts{};
  for (const auto& rec : data) {
    counts[static_cast<std::size_t>(rec.group)]
          [static_cast<std::size_t>(rec.status)]++;
  }
  std::array<std::int64_t, 3> pooled{};
  for (int g = 0; g < 2; ++g) {
    const auto& c = counts[static_cast<std::size_t>(g)];
    const std::int64_t n = c[0] + c[1] + c[2];
    out.n_by_group[static_cast<std::size_t>(g)] = n;
    if (n > 0) {
      auto& mix = out.by_group[static_cast<std::size_t>(g)];
      mix.frac_censored = static_cast<double>(c[0]) / static_cast<double>(n);
      mix.frac_event1 = static_cast<double>(c[1]) / static_cast<double>(n);
      mix.frac_event2 = static_cast<double>(c[2]) / static_cast<double>(n);
    }
    for (int s = 0; s < 3; ++s) pooled[static_cast<std::size_t>(s)] += c[static_cast<std::size_t>(s)];
  }
  const auto n = static_cast<double>(data.size());
  out.pooled.frac_censored = static_cast<double>(pooled[0]) / n;
  out.pooled.frac_event1 = static_cast<double>(pooled[1]) / n;
  out.pooled.frac_event2 = static_cast<double>(pooled[2]) / n;
  return out;
}

void write_dataset_csv(std::ostream& out, const std::vector<SubjectRecord>& data,
                       bool with_censor_times) {
  std::string line = with_censor_times ? "id,group,entry,time,status,censor_time"
                                       : "id,group,entry,time,status";
  line.push_back('\n');
  out << line;
  std::size_t id = 0;
  for (const auto& rec : data) {
    line.clear();
    line += std::to_string(++id);
    line.push_back(',');
    line += std::to_string(rec.group);
    line.push_back(',');
    append_double(line, rec.entry);
    line.push_back(',');
    append_double(line, rec.time);
    line.push_back(',');
    line += std::to_string(rec.status);
    if (with_censor_times) {
      line.push_back(',');
      append_double(line, rec.censor_time);
    }
    line.push_back('\n');
    out << line;
  }
}

std::vector<SubjectRecord> read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("line 1: missing CSV header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_censor;
  if (line == "id,group,entry,time,status") {
    with_censor = false;
  } else if (line == "id,group,entry,time,status,censor_time") {
    with_censor = true;
  } else {
    throw std::invalid_argument(
        "line 1: expected header 'id,group,entry,time,status[,censor_time]', "
        "got '" + line + "'");
  }

  std::vector<SubjectRecord> data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::array<std::string_view, 6> fields;
    const std::size_t expected = with_censor ? 6 : 5;
    std::string_view rest = line;
    std::size_t count = 0;
    while (count < expected) {
      const std::size_t comma = rest.find(',');
      if (comma == std::string_view::npos) {
        fields[count++] = rest;
        rest = {};
        break;
      }
      fields[count++] = rest.substr(0, comma);
      rest = rest.substr(comma + 1);
    }
    if (count != expected || !rest.empty()) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(expected) +
                                  " comma-separated fields");
    }

    SubjectRecord rec;
    parse_double(fields[0], line_no, "id");
    const double group = parse_double(fields[1], line_no, "group");
    if (group != 0.0 && group != 1.0) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": group must be 0 or 1");
    }
    rec.group = static_cast<int>(group);
    rec.entry = parse_double(fields[2], line_no, "entry");
    rec.time = parse_double(fields[3], line_no, "time");
    const double status = parse_double(fields[4], line_no, "status");
    if (status != 0.0 && status != 1.0 && status != 2.0) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": status must be 0, 1 or 2");
    }
    rec.status = static_cast<int>(status);
    if (rec.time < 0.0) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": time must be >= 0");
    }
    rec.censor_time = with_censor
                          ? parse_double(fields[5], line_no, "censor_time")
                          : kNaN;
    if (with_censor && rec.censor_time < rec.time) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": censor_time must be >= time");
    }
    data.push_back(rec);
  }
  return data;
}

}  // namespace crplan
