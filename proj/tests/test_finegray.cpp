#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"

#include "crplan/finegray.hpp"
#include "crplan/simgen.hpp"
#include "oracles.hpp"

using crplan::Decision;
using crplan::FineGrayFit;
using crplan::GenScenario;
using crplan::RiskSetWeights;
using crplan::SubjectRecord;
using crplan::WeightMode;
using crplan::fit;
using crplan::generate_dataset;
using crplan::km_censoring;
using crplan::noninferiority_decision;
using crplan::score_and_information;

namespace {

// time, status, group, entry, censor_time
SubjectRecord rec(double time, int status, int group, double censor = 100.0) {
  return SubjectRecord{time, status, group, 0.0, status == 0 ? time : censor};
}

// The four-subject worked example: one competing event stays in the risk
// set after its event.
std::vector<SubjectRecord> four_subjects() {
  return {rec(1.0, 1, 0), rec(2.0, 1, 1), rec(3.0, 2, 0), rec(4.0, 1, 1)};
}

std::vector<SubjectRecord> mirrored(const std::vector<SubjectRecord>& data) {
  std::vector<SubjectRecord> out = data;
  for (auto r2 : data) {
    r2.group = 1 - r2.group;
    out.push_back(r2);
  }
  return out;
}

std::vector<SubjectRecord> flipped(const std::vector<SubjectRecord>& data) {
  std::vector<SubjectRecord> out = data;
  for (auto& r2 : out) r2.group = 1 - r2.group;
  return out;
}

GenScenario sim_scenario(std::int64_t n_per_group, double b,
                         std::uint64_t seed) {
  GenScenario s;
  s.lambda01 = 1.0;
  s.k1 = 1.0;
  s.lambda2 = 0.15;
  s.k2 = 1.0;
  s.q01 = 0.5;
  s.phi = 0.1;
  s.tf = 1.0;
  s.r = 0.5;
  s.b = b;
  s.n0 = s.n1 = n_per_group;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("km_censoring: product-limit examples") {
  // No censoring anywhere: G stays 1.
  const auto g_flat = km_censoring(four_subjects());
  CHECK(g_flat(0.0) == 1.0);
  CHECK(g_flat(100.0) == 1.0);

  // One censoring among two subjects.
  const auto g = km_censoring({rec(1.0, 0, 0), rec(2.0, 1, 1)});
  CHECK(g(0.5) == 1.0);
  CHECK(g(1.0) == 0.5);
  CHECK(g(5.0) == 0.5);

  // Everyone censored at distinct times depletes G to zero.
  const auto g0 = km_censoring(
      {rec(1.0, 0, 0), rec(2.0, 0, 1), rec(3.0, 0, 0), rec(4.0, 0, 1)});
  CHECK(g0(4.0) == 0.0);
  CHECK(g0(3.5) > 0.0);

  CHECK_THROWS_AS(km_censoring({}), std::invalid_argument);
}

TEST_CASE("score_and_information: four-subject worked example") {
  const auto data = four_subjects();
  const auto weights = RiskSetWeights::build(data, WeightMode::ipcw_km);
  const auto [s, info] = score_and_information(0.0, data, weights);
  CHECK(std::abs(s - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(info - (0.25 + 2.0 / 9.0 + 0.25)) < 1e-12);
}

TEST_CASE("score_and_information: mirror antisymmetry and single group") {
  const auto data = four_subjects();
  const auto w1 = RiskSetWeights::build(data, WeightMode::ipcw_km);
  const auto [s1, i1] = score_and_information(0.0, data, w1);
  const auto flip = flipped(data);
  const auto w2 = RiskSetWeights::build(flip, WeightMode::ipcw_km);
  const auto [s2, i2] = score_and_information(0.0, flip, w2);
  CHECK(std::abs(s1 + s2) < 1e-14);
  CHECK(std::abs(i1 - i2) < 1e-14);

  std::vector<SubjectRecord> lone = {rec(1.0, 1, 0), rec(2.0, 2, 0),
                                     rec(3.0, 1, 0)};
  const auto w3 = RiskSetWeights::build(lone, WeightMode::ipcw_km);
  for (double b : {-1.0, 0.0, 2.0}) {
    const auto [s3, i3] = score_and_information(b, lone, w3);
    CHECK(s3 == 0.0);
    CHECK(i3 == 0.0);
  }

  std::vector<SubjectRecord> no_events = {rec(1.0, 0, 0), rec(2.0, 2, 1)};
  const auto w4 = RiskSetWeights::build(no_events, WeightMode::ipcw_km);
  CHECK_THROWS_AS(score_and_information(0.0, no_events, w4),
                  std::invalid_argument);
}

TEST_CASE("RiskSetWeights: weights follow the definition") {
  // Censorings at 1 and 2.5 shape G; the competing event at 1.5 keeps a
  // G(t-)/G(1.5-) weight afterwards.
  std::vector<SubjectRecord> data = {rec(1.0, 0, 0), rec(1.5, 2, 0),
                                     rec(2.5, 0, 1), rec(4.0, 1, 1),
                                     rec(5.0, 1, 0)};
  const auto w = RiskSetWeights::build(data, WeightMode::ipcw_km);
  CHECK(w.weight(1, 1.0) == 1.0);  // before its own event
  CHECK(w.weight(1, 1.5) == 1.0);  // at its event time
  CHECK(std::abs(w.weight(1, 4.0) - (0.8 * 2.0 / 3.0) / 0.8) < 1e-12);
  CHECK(w.weight(0, 2.0) == 0.0);  // censored subject left
  CHECK(w.weight(0, 1.0) == 1.0);  // still under observation
  CHECK(w.weight(3, 4.0) == 1.0);  // its own event time
  CHECK(w.weight(3, 4.5) == 0.0);  // event-of-interest subject leaves

  // Oracle mode uses the recorded censoring time instead.
  const auto wo = RiskSetWeights::build(data, WeightMode::oracle);
  CHECK(wo.weight(1, 4.0) == 1.0);  // censor_time 100
  data[1].censor_time = 3.0;
  const auto wo2 = RiskSetWeights::build(data, WeightMode::oracle);
  CHECK(wo2.weight(1, 2.9) == 1.0);
  CHECK(wo2.weight(1, 3.0) == 1.0);
  CHECK(wo2.weight(1, 3.1) == 0.0);
}

TEST_CASE("RiskSetWeights: risk sums match the naive definition") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto data = oracles::random_small_dataset(seed);
    for (auto mode : {WeightMode::ipcw_km, WeightMode::oracle}) {
      const auto w = RiskSetWeights::build(data, mode);
      for (const auto& term : w.event_terms()) {
        double y0, y1;
        oracles::naive_risk_sums(data, mode, term.time, y0, y1);
        CHECK(std::abs(term.y0 - y0) < 1e-12);
        CHECK(std::abs(term.y1 - y1) < 1e-12);
      }
    }
  }
}

TEST_CASE("fit: mirrored data estimate is exactly zero") {
  const auto data = mirrored(four_subjects());
  const auto res = fit(data, WeightMode::ipcw_km, 0.05);
  CHECK(res.converged);
  CHECK(res.b_hat == 0.0);
  CHECK(res.se > 0.0);
  CHECK(noninferiority_decision(res, 10.0) == Decision::non_inferior);
}

TEST_CASE("fit: matches grid search on the worked example") {
  const auto data = four_subjects();
  const auto res = fit(data, WeightMode::ipcw_km, 0.05);
  REQUIRE(res.converged);
  const double oracle = oracles::grid_search_bhat(data, WeightMode::ipcw_km);
  CHECK(std::abs(res.b_hat - oracle) < 1e-6);
}

TEST_CASE("fit: matches grid search on random small datasets") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto data = oracles::random_small_dataset(seed);
    for (auto mode : {WeightMode::ipcw_km, WeightMode::oracle}) {
      const auto res = fit(data, mode, 0.05);
      if (!res.converged) continue;
      if (std::abs(res.b_hat) > 4.5) continue;  // outside the oracle window
      const double oracle = oracles::grid_search_bhat(data, mode);
      CAPTURE(seed);
      CHECK(std::abs(res.b_hat - oracle) < 1e-6);
    }
  }
}

TEST_CASE("fit: group flip negates the estimate") {
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    const auto data = oracles::random_small_dataset(seed, 40);
    const auto a = fit(data, WeightMode::ipcw_km, 0.05);
    const auto b = fit(flipped(data), WeightMode::ipcw_km, 0.05);
    if (!a.converged || !b.converged) continue;
    CHECK(std::abs(a.b_hat + b.b_hat) < 1e-10);
    CHECK(std::abs(a.se - b.se) < 1e-10);
  }
}

TEST_CASE("score derivative: information matches a central difference") {
  const double h = 1e-5;
  for (std::uint64_t seed = 500; seed < 510; ++seed) {
    const auto data = oracles::random_small_dataset(seed, 30);
    const auto w = RiskSetWeights::build(data, WeightMode::ipcw_km);
    for (double b : {-0.7, 0.0, 0.9}) {
      const auto [s_plus, unused1] = score_and_information(b + h, data, w);
      const auto [s_minus, unused2] = score_and_information(b - h, data, w);
      const auto [s0, info] = score_and_information(b, data, w);
      (void)s0;
      (void)unused1;
      (void)unused2;
      const double fd = -(s_plus - s_minus) / (2.0 * h);
      CHECK(std::abs(fd - info) < 1e-6 * (1.0 + std::abs(info)));
    }
  }
}

TEST_CASE("fit: invariant under a common time rescaling") {
  const auto data = oracles::random_small_dataset(77, 60);
  const auto a = fit(data, WeightMode::ipcw_km, 0.05);
  auto scaled = data;
  for (auto& r2 : scaled) {
    r2.time *= 37.5;
    r2.censor_time *= 37.5;
  }
  const auto b = fit(scaled, WeightMode::ipcw_km, 0.05);
  CHECK(a.b_hat == b.b_hat);
  CHECK(a.se == b.se);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("fit: IPCW and oracle weights agree on simulated data") {
  const auto data =
      generate_dataset(sim_scenario(10000, std::log(1.3), 424242));
  const auto ipcw = fit(data, WeightMode::ipcw_km, 0.05);
  const auto orac = fit(data, WeightMode::oracle, 0.05);
  REQUIRE(ipcw.converged);
  REQUIRE(orac.converged);
  CHECK(std::abs(ipcw.b_hat - orac.b_hat) < 0.02);
}

TEST_CASE("fit: consistency at the generating coefficient") {
  auto scen = sim_scenario(20000, std::log(1.3), 20260809);
  scen.q01 = 0.8;
  scen.phi = 0.0;
  scen.tf = 5.0;
  const auto data = generate_dataset(scen);
  const auto res = fit(data, WeightMode::ipcw_km, 0.05);
  REQUIRE(res.converged);
  CHECK(std::abs(res.b_hat - std::log(1.3)) < 0.03);
}

TEST_CASE("fit: reduces to the Cox estimate without competing events") {
  // Single-cause data with no censoring: the SDH risk set is the
  // classical one, so the maximizer equals the Cox two-group estimate
  // from the explicit likelihood.
  GenScenario scen = sim_scenario(60, 0.4, 31);
  scen.q01 = 1.0;
  scen.lambda2 = 0.0;
  scen.phi = 0.0;
  scen.tf = 400.0;
  scen.r = 0.0;
  const auto data = generate_dataset(scen);
  for (const auto& r2 : data) REQUIRE(r2.status == 1);
  const auto res = fit(data, WeightMode::ipcw_km, 0.05);
  REQUIRE(res.converged);
  const double cox = oracles::grid_search_bhat(data, WeightMode::ipcw_km);
  CHECK(std::abs(res.b_hat - cox) < 1e-6);
}

TEST_CASE("fit: monotone likelihood is flagged, not thrown") {
  // All events of interest in group 1 while group 0 only contributes
  // risk: the score stays positive and b escapes.
  std::vector<SubjectRecord> data = {rec(5.0, 0, 0), rec(6.0, 0, 0),
                                     rec(1.0, 1, 1), rec(2.0, 1, 1)};
  const auto res = fit(data, WeightMode::ipcw_km, 0.05);
  CHECK_FALSE(res.converged);
  CHECK_THROWS_AS(noninferiority_decision(res, 1.5), std::invalid_argument);
}

TEST_CASE("fit: input validation") {
  CHECK_THROWS_AS(fit({}, WeightMode::ipcw_km, 0.05), std::invalid_argument);

  std::vector<SubjectRecord> one_group = {rec(1.0, 1, 0), rec(2.0, 1, 0)};
  CHECK_THROWS_AS(fit(one_group, WeightMode::ipcw_km, 0.05),
                  std::invalid_argument);

  std::vector<SubjectRecord> no_events = {rec(1.0, 0, 0), rec(2.0, 2, 1)};
  CHECK_THROWS_AS(fit(no_events, WeightMode::ipcw_km, 0.05),
                  std::invalid_argument);

  auto data = four_subjects();
  data[2].censor_time = std::numeric_limits<double>::quiet_NaN();
  try {
    fit(data, WeightMode::oracle, 0.05);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("censor_time") != std::string::npos);
  }
  CHECK_NOTHROW(fit(data, WeightMode::ipcw_km, 0.05));
}

TEST_CASE("noninferiority_decision: margin comparisons") {
  const double z = crplan::normal_quantile(0.975);
  const auto make = [&](double b_hat, double se) {
    FineGrayFit f;
    f.b_hat = b_hat;
    f.se = se;
    f.ci_lower = std::exp(b_hat - z * se);
    f.ci_upper = std::exp(b_hat + z * se);
    f.converged = true;
    return f;
  };
  CHECK(noninferiority_decision(make(0.0, 0.1), 1.5) == Decision::non_inferior);
  CHECK(std::abs(make(0.0, 0.1).ci_upper - 1.2166) < 1e-3);
  CHECK(noninferiority_decision(make(std::log(1.5), 0.2), 1.5) ==
        Decision::not_shown);
  const auto superiority = make(-0.5, 0.05);
  CHECK(std::abs(superiority.ci_upper - 0.669) < 1e-3);
  CHECK(noninferiority_decision(superiority, 1.0) == Decision::non_inferior);
}

TEST_CASE("fit_json: carries the full fit") {
  const auto res = fit(four_subjects(), WeightMode::ipcw_km, 0.05);
  const std::string j = crplan::fit_json(res);
  for (const char* key : {"b_hat", "se", "ci_lower", "ci_upper", "converged",
                          "iterations", "mode"}) {
    CHECK(j.find(key) != std::string::npos);
  }
  CHECK(j.find("IPCW_KM") != std::string::npos);
}
