#include "crplan/finegray.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace crplan {

namespace {

std::vector<std::size_t> order_by_time(const std::vector<SubjectRecord>& data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (data[a].time != data[b].time) return data[a].time < data[b].time;
    return a < b;
  });
  return idx;
}

}  // namespace

StepFunction km_censoring(const std::vector<SubjectRecord>& data) {
  if (data.empty()) {
    throw std::invalid_argument("km_censoring: empty dataset");
  }
  const auto idx = order_by_time(data);
  std::vector<double> breaks;
  std::vector<double> values;
  double surv = 1.0;
  const std::size_t n = data.size();
  std::size_t i = 0;
  while (i < n) {
    const double t = data[idx[i]].time;
    std::size_t censored = 0;
    std::size_t j = i;
    while (j < n && data[idx[j]].time == t) {
      if (data[idx[j]].status == 0) ++censored;
      ++j;
    }
    if (censored > 0) {
      const auto at_risk = static_cast<double>(n - i);
      surv *= 1.0 - static_cast<double>(censored) / at_risk;
      breaks.push_back(t);
      values.push_back(surv);
    }
    i = j;
  }
  return StepFunction(std::move(breaks), std::move(values), 1.0);
}

RiskSetWeights RiskSetWeights::build(const std::vector<SubjectRecord>& data,
                                     WeightMode mode) {
  if (mode == WeightMode::oracle && !has_censor_times(data)) {
    throw std::invalid_argument(
        "RiskSetWeights: ORACLE mode requires the censor_time column on "
        "every record");
  }
  RiskSetWeights out;
  out.mode_ = mode;
  out.time_.reserve(data.size());
  out.censor_.reserve(data.size());
  out.status_.reserve(data.size());
  for (const auto& rec : data) {
    out.time_.push_back(rec.time);
    out.censor_.push_back(rec.censor_time);
    out.status_.push_back(rec.status);
  }

  // Exit time per subject: when its risk-set membership stops being the
  // plain "still observed" indicator. Oracle mode keeps competing-event
  // subjects until their known censoring time; IPCW mode keeps them with
  // weight G(t-)/G(T_i-) forever, handled through prefix sums below.
  std::array<std::vector<double>, 2> observed;  // per group, sorted
  std::array<std::vector<double>, 2> comp_times;
  std::array<std::vector<double>, 2> comp_cum;  // cumulative 1/G(T-)

  if (mode == WeightMode::ipcw_km) {
    out.ghat_ = km_censoring(data);
  }

  for (const auto& rec : data) {
    auto g = static_cast<std::size_t>(rec.group);
    if (mode == WeightMode::oracle && rec.status == 2) {
      observed[g].push_back(rec.censor_time);
    } else {
      observed[g].push_back(rec.time);
    }
  }
  for (auto& v : observed) std::sort(v.begin(), v.end());

  if (mode == WeightMode::ipcw_km) {
    std::array<std::vector<std::pair<double, double>>, 2> comp;
    for (const auto& rec : data) {
      if (rec.status != 2) continue;
      const double g_at_event = out.ghat_.left_limit(rec.time);
      const double inv = g_at_event > 0.0 ? 1.0 / g_at_event : 0.0;
      comp[static_cast<std::size_t>(rec.group)].emplace_back(rec.time, inv);
    }
    for (int g = 0; g < 2; ++g) {
      auto& c = comp[static_cast<std::size_t>(g)];
      std::sort(c.begin(), c.end());
      auto& times = comp_times[static_cast<std::size_t>(g)];
      auto& cum = comp_cum[static_cast<std::size_t>(g)];
      cum.push_back(0.0);
      double acc = 0.0;
      for (const auto& [t, inv] : c) {
        times.push_back(t);
        acc += inv;
        cum.push_back(acc);
      }
    }
  }

  const auto idx = order_by_time(data);
  for (std::size_t i : idx) {
    if (data[i].status != 1) continue;
    const double t = data[i].time;
    EventTerm term{t, data[i].group, 0.0, 0.0};
    for (int g = 0; g < 2; ++g) {
      const auto gi = static_cast<std::size_t>(g);
      const auto& obs = observed[gi];
      const auto alive = static_cast<double>(
          obs.end() - std::lower_bound(obs.begin(), obs.end(), t));
      double y = alive;
      if (mode == WeightMode::ipcw_km) {
        const auto& times = comp_times[gi];
        const auto k = static_cast<std::size_t>(
            std::lower_bound(times.begin(), times.end(), t) - times.begin());
        if (k > 0) y += out.ghat_.left_limit(t) * comp_cum[gi][k];
      }
      (g == 0 ? term.y0 : term.y1) = y;
    }
    out.terms_.push_back(term);
  }
  return out;
}

double RiskSetWeights::weight(std::size_t subject, double t) const {
  const double own_time = time_[subject];
  if (t <= own_time) return 1.0;
  if (status_[subject] != 2) return 0.0;
  if (mode_ == WeightMode::oracle) {
    return censor_[subject] >= t ? 1.0 : 0.0;
  }
  const double g_event = ghat_.left_limit(own_time);
  if (g_event <= 0.0) return 0.0;
  return ghat_.left_limit(t) / g_event;
}

namespace {

void score_info_terms(const std::vector<RiskSetWeights::EventTerm>& terms,
                      double b, double& score, double& info) {
  const double eb = std::exp(b);
  score = 0.0;
  info = 0.0;
  for (const auto& term : terms) {
    const double r1 = term.y1 * eb;
    const double denom = term.y0 + r1;
    score += static_cast<double>(term.group) - r1 / denom;
    info += term.y0 * r1 / (denom * denom);
  }
}

}  // namespace

std::pair<double, double> score_and_information(
    double b, const std::vector<SubjectRecord>& data,
    const RiskSetWeights& weights) {
  if (weights.subject_count() != data.size()) {
    throw std::invalid_argument(
        "score_and_information: weights were built from a different dataset");
  }
  if (weights.event_terms().empty()) {
    throw std::invalid_argument(
        "score_and_information: no events of interest (status=1); the partial "
        "likelihood is flat");
  }
  double s = 0.0, info = 0.0;
  score_info_terms(weights.event_terms(), b, s, info);
  return {s, info};
}

FineGrayFit fit(const std::vector<SubjectRecord>& data, WeightMode mode,
                double alpha) {
  if (data.empty()) throw std::invalid_argument("fit: empty dataset");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("fit: alpha must lie in (0,1)");
  }
  bool has_g0 = false, has_g1 = false;
  std::size_t events = 0;
  for (const auto& rec : data) {
    has_g0 |= rec.group == 0;
    has_g1 |= rec.group == 1;
    events += rec.status == 1 ? 1u : 0u;
  }
  if (!has_g0 || !has_g1) {
    throw std::invalid_argument("fit: both groups must be present");
  }
  if (events == 0) {
    throw std::invalid_argument("fit: no events of interest (status=1)");
  }
  if (mode == WeightMode::oracle && !has_censor_times(data)) {
    throw std::invalid_argument(
        "fit: ORACLE mode requires the censor_time column on every record");
  }

  const auto weights = RiskSetWeights::build(data, mode);
  const auto& terms = weights.event_terms();

  FineGrayFit out;
  out.mode = mode;

  double b = 0.0;
  double s, info;
  score_info_terms(terms, b, s, info);
  while (out.iterations < 50) {
    if (!std::isfinite(s) || info <= 0.0) break;
    double step = s / info;
    double b_next = b + step;
    double s_next, info_next;
    score_info_terms(terms, b_next, s_next, info_next);
    for (int halvings = 0;
         halvings < 10 && std::abs(s_next) > std::abs(s); ++halvings) {
      step *= 0.5;
      b_next = b + step;
      score_info_terms(terms, b_next, s_next, info_next);
    }
    ++out.iterations;
    const double delta = b_next - b;
    b = b_next;
    s = s_next;
    info = info_next;
    if (std::abs(b) > 20.0) break;
    if (std::abs(s) < 1e-8 && std::abs(delta) < 1e-10) {
      out.converged = true;
      break;
    }
  }

  out.b_hat = b;
  out.se = info > 0.0 ? 1.0 / std::sqrt(info)
                      : std::numeric_limits<double>::quiet_NaN();
  const double z = normal_quantile(1.0 - alpha / 2.0);
  out.ci_lower = std::exp(b - z * out.se);
  out.ci_upper = std::exp(b + z * out.se);
  return out;
}

Decision noninferiority_decision(const FineGrayFit& fit, double delta0) {
  if (!fit.converged) {
    throw std::invalid_argument(
        "noninferiority_decision: fit did not converge");
  }
  if (!(delta0 > 0.0)) {
    throw std::invalid_argument("noninferiority_decision: delta0 must be > 0");
  }
  return fit.ci_upper < delta0 ? Decision::non_inferior : Decision::not_shown;
}

std::string fit_json(const FineGrayFit& fit) {
  nlohmann::json j;
  j["b_hat"] = fit.b_hat;
  j["se"] = fit.se;
  j["ci_lower"] = fit.ci_lower;
  j["ci_upper"] = fit.ci_upper;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["mode"] = fit.mode == WeightMode::ipcw_km ? "IPCW_KM" : "ORACLE";
  return j.dump();
}

}  // namespace crplan
