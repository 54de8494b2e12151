#include "crplan/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "crplan/design.hpp"
#include "crplan/finegray.hpp"
#include "crplan/simgen.hpp"

namespace crplan::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 12345;

double need(const std::optional<double>& field, const char* name) {
  if (!field) {
    throw std::invalid_argument(std::string("missing required config key: ") +
                                name);
  }
  return *field;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Hypothesis parse_hypothesis(const std::string& text) {
  const std::string h = lower(text);
  if (h == "null") return Hypothesis::null_margin;
  if (h == "alt") return Hypothesis::alternative;
  throw std::invalid_argument("hypothesis must be 'null' or 'alt', got '" +
                              text + "'");
}

SizingMode parse_mode(const std::string& text) {
  const std::string m = lower(text);
  if (m == "sdh") return SizingMode::sdh;
  if (m == "single-event" || m == "single_event") return SizingMode::single_event;
  throw std::invalid_argument("mode must be 'sdh' or 'single-event', got '" +
                              text + "'");
}

DesignParams design_from_config(const RunConfig& c, bool require_competing) {
  DesignParams p;
  p.lambda01 = need(c.lambda01, "lambda01");
  p.k1 = need(c.k1, "k1");
  if (require_competing) {
    p.lambda2 = need(c.lambda2, "lambda2");
    p.k2 = need(c.k2, "k2");
  } else {
    p.lambda2 = c.lambda2.value_or(0.0);
    p.k2 = c.k2.value_or(1.0);
  }
  p.q01 = need(c.q01, "q01");
  p.phi = need(c.phi, "phi");
  p.tf = need(c.tf, "tf");
  p.r = need(c.r, "r");
  p.delta0 = need(c.delta0, "delta0");
  p.delta1 = need(c.delta1, "delta1");
  p.alpha = need(c.alpha, "alpha");
  p.power = need(c.power, "power");
  if (c.p0) {
    p.p0 = *c.p0;
    p.p1 = c.p1.value_or(1.0 - p.p0);
  } else if (c.p1) {
    p.p1 = *c.p1;
    p.p0 = 1.0 - p.p1;
  }
  validate(p);
  return p;
}

/// Map exceptions onto the documented exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const degenerate_design_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const io_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  return out;
}

std::string format3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string shortest(double x) {
  if (x == std::floor(x) && std::abs(x) < 1e15) {
    return std::to_string(static_cast<long long>(x));
  }
  json j = x;
  return j.dump();
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  if (!doc.is_object()) {
    throw std::invalid_argument("config must be a JSON object");
  }

  RunConfig c;
  const auto as_double = [](const json& v, const std::string& key) {
    if (!v.is_number()) {
      throw std::invalid_argument("config key '" + key + "' must be a number");
    }
    return v.get<double>();
  };
  for (const auto& [key, value] : doc.items()) {
    if (key == "lambda01") c.lambda01 = as_double(value, key);
    else if (key == "k1") c.k1 = as_double(value, key);
    else if (key == "lambda2") c.lambda2 = as_double(value, key);
    else if (key == "k2") c.k2 = as_double(value, key);
    else if (key == "q01") c.q01 = as_double(value, key);
    else if (key == "phi") c.phi = as_double(value, key);
    else if (key == "tf") c.tf = as_double(value, key);
    else if (key == "r") c.r = as_double(value, key);
    else if (key == "delta0") c.delta0 = as_double(value, key);
    else if (key == "delta1") c.delta1 = as_double(value, key);
    else if (key == "alpha") c.alpha = as_double(value, key);
    else if (key == "power") c.power = as_double(value, key);
    else if (key == "p0") c.p0 = as_double(value, key);
    else if (key == "p1") c.p1 = as_double(value, key);
    else if (key == "seed") {
      if (!value.is_number_unsigned()) {
        throw std::invalid_argument("config key 'seed' must be a non-negative integer");
      }
      c.seed = value.get<std::uint64_t>();
    } else if (key == "replications") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 1) {
        throw std::invalid_argument("config key 'replications' must be a positive integer");
      }
      c.replications = value.get<std::int64_t>();
    } else if (key == "n0" || key == "n1") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 1) {
        throw std::invalid_argument("config key '" + key + "' must be a positive integer");
      }
      (key == "n0" ? c.n0 : c.n1) = value.get<std::int64_t>();
    } else if (key == "hypothesis") {
      if (!value.is_string()) {
        throw std::invalid_argument("config key 'hypothesis' must be a string");
      }
      c.hypothesis = value.get<std::string>();
      parse_hypothesis(*c.hypothesis);
    } else if (key == "mode") {
      if (!value.is_string()) {
        throw std::invalid_argument("config key 'mode' must be a string");
      }
      c.mode = value.get<std::string>();
      parse_mode(*c.mode);
    } else {
      throw std::invalid_argument("unknown config key: '" + key + "'");
    }
  }
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_json(const RunConfig& c) {
  json j = json::object();
  const auto put = [&](const char* key, const auto& field) {
    if (field) j[key] = *field;
  };
  put("lambda01", c.lambda01);
  put("k1", c.k1);
  put("lambda2", c.lambda2);
  put("k2", c.k2);
  put("q01", c.q01);
  put("phi", c.phi);
  put("tf", c.tf);
  put("r", c.r);
  put("delta0", c.delta0);
  put("delta1", c.delta1);
  put("alpha", c.alpha);
  put("power", c.power);
  put("p0", c.p0);
  put("p1", c.p1);
  put("seed", c.seed);
  put("replications", c.replications);
  put("n0", c.n0);
  put("n1", c.n1);
  put("hypothesis", c.hypothesis);
  put("mode", c.mode);
  return j.dump();
}

void merge_overrides(RunConfig& base, const RunConfig& overrides) {
  const auto lay = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  lay(base.lambda01, overrides.lambda01);
  lay(base.k1, overrides.k1);
  lay(base.lambda2, overrides.lambda2);
  lay(base.k2, overrides.k2);
  lay(base.q01, overrides.q01);
  lay(base.phi, overrides.phi);
  lay(base.tf, overrides.tf);
  lay(base.r, overrides.r);
  lay(base.delta0, overrides.delta0);
  lay(base.delta1, overrides.delta1);
  lay(base.alpha, overrides.alpha);
  lay(base.power, overrides.power);
  lay(base.p0, overrides.p0);
  lay(base.p1, overrides.p1);
  lay(base.seed, overrides.seed);
  lay(base.replications, overrides.replications);
  lay(base.n0, overrides.n0);
  lay(base.n1, overrides.n1);
  lay(base.hypothesis, overrides.hypothesis);
  lay(base.mode, overrides.mode);
}

int cmd_size(const RunConfig& config, std::ostream& out, std::ostream& err,
             const std::string& json_out_path) {
  return guarded(err, [&] {
    RunConfig effective = config;
    if (!effective.mode) effective.mode = "sdh";
    const SizingMode mode = parse_mode(*effective.mode);
    const DesignParams params = design_from_config(effective, false);
    const SampleSizeResult res = sample_size(params, mode);

    out << "config: " << config_json(effective) << "\n";
    out << "method: " << (mode == SizingMode::sdh ? "SDH" : "SINGLE_EVENT")
        << "\n";
    out << "events required: " << res.events.events_total << " total ("
        << res.events.events_per_group[0] << " control + "
        << res.events.events_per_group[1] << " experimental; fractional "
        << res.events.events_fractional << ")\n";
    out << "pooled incidence rate w: " << res.w << "\n";
    out << "sample size: " << res.n_total << " total ("
        << res.n_per_group[0] << " control + " << res.n_per_group[1]
        << " experimental)\n";

    if (!json_out_path.empty()) {
      json j;
      j["method"] = mode == SizingMode::sdh ? "SDH" : "SINGLE_EVENT";
      j["w"] = res.w;
      j["events_fractional"] = res.events.events_fractional;
      j["events_per_group"] = res.events.events_per_group;
      j["events_total"] = res.events.events_total;
      j["n_per_group"] = res.n_per_group;
      j["n_total"] = res.n_total;
      auto f = open_output(json_out_path);
      f << j.dump(2) << "\n";
    }
    return kExitOk;
  });
}

int cmd_reproduce_table2(std::ostream& out, std::ostream& err,
                         const std::string& out_path) {
  return guarded(err, [&] {
    // Planning inputs of the worked prostate-cancer example: median time
    // to the event of interest 9.45, competing-event survival 0.9 at 5.1,
    // q01 = 0.737, margin 1.5 vs 1, alpha 0.05, power 0.85, follow-up 7.5
    // after a 12-unit accrual window.
    DesignParams base;
    base.q01 = 0.737;
    base.tf = 7.5;
    base.r = 12.0;
    base.delta0 = 1.5;
    base.delta1 = 1.0;
    base.alpha = 0.05;
    base.power = 0.85;
    base.p0 = base.p1 = 0.5;

    std::ostringstream csv;
    csv << "k1,lambda1,lambda2,delta0,phi,events,N_CR,N_SE\n";
    for (double k : {0.5, 1.0, 2.0}) {
      const double lambda1_exact = scale_from_median(9.45, k);
      // The published table was computed with the scale of the event of
      // interest rounded to the 3 decimals it displays; the single-event
      // column used the unrounded value. Both reproduce exactly.
      const double lambda1_3dp = std::round(lambda1_exact * 1000.0) / 1000.0;
      const double lambda2_display = scale_from_survival(5.1, 0.9, k);
      for (double phi : {0.0, 0.02}) {
        DesignParams p_cr = base;
        p_cr.lambda01 = lambda1_3dp;
        p_cr.k1 = k;
        p_cr.phi = phi;
        const SampleSizeResult cr = sample_size(p_cr, SizingMode::sdh);

        DesignParams p_se = base;
        p_se.lambda01 = lambda1_exact;
        p_se.k1 = k;
        p_se.phi = phi;
        const SampleSizeResult se = sample_size(p_se, SizingMode::single_event);

        csv << shortest(k) << ',' << format3(lambda1_3dp) << ','
            << format3(lambda2_display) << ',' << shortest(base.delta0) << ','
            << shortest(phi) << ',' << cr.events.events_total << ','
            << cr.n_total << ',' << se.n_total << '\n';
      }
    }

    out << csv.str();
    if (!out_path.empty()) {
      auto f = open_output(out_path);
      f << csv.str();
    }
    return kExitOk;
  });
}

namespace {

GenScenario scenario_from_config(RunConfig& c) {
  GenScenario s;
  s.lambda01 = need(c.lambda01, "lambda01");
  s.k1 = need(c.k1, "k1");
  s.lambda2 = need(c.lambda2, "lambda2");
  s.k2 = need(c.k2, "k2");
  s.q01 = need(c.q01, "q01");
  s.phi = need(c.phi, "phi");
  s.tf = need(c.tf, "tf");
  s.r = need(c.r, "r");

  if (!c.hypothesis) c.hypothesis = "alt";
  const Hypothesis hyp = parse_hypothesis(*c.hypothesis);
  s.b = std::log(hyp == Hypothesis::null_margin ? need(c.delta0, "delta0")
                                                : need(c.delta1, "delta1"));

  if (c.n0 || c.n1) {
    if (!c.n0 || !c.n1) {
      throw std::invalid_argument("n0 and n1 must be given together");
    }
    s.n0 = *c.n0;
    s.n1 = *c.n1;
  } else {
    const DesignParams params = design_from_config(c, true);
    const auto sized = sample_size(params, SizingMode::sdh);
    s.n0 = sized.n_per_group[0];
    s.n1 = sized.n_per_group[1];
    c.n0 = s.n0;
    c.n1 = s.n1;
  }
  if (!c.seed) c.seed = kDefaultSeed;
  s.seed = *c.seed;
  return s;
}

void print_mix(std::ostream& out, const char* label, const EventMix& mix) {
  out << label << ": frac_event1=" << mix.frac_event1
      << " frac_event2=" << mix.frac_event2
      << " frac_censored=" << mix.frac_censored << "\n";
}

}  // namespace

int cmd_simulate(const RunConfig& config, const std::string& out_path,
                 bool with_censor_times, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig effective = config;
    const GenScenario scen = scenario_from_config(effective);
    const auto data = generate_dataset(scen);

    auto file = open_output(out_path);
    write_dataset_csv(file, data, with_censor_times);
    file.flush();
    if (!file) throw io_error("failed writing dataset to '" + out_path + "'");

    out << "config: " << config_json(effective) << "\n";
    out << "seed: " << scen.seed << "\n";
    out << "wrote " << data.size() << " subjects to " << out_path << "\n";
    const auto summary = summarize_dataset(data);
    print_mix(out, "group 0", summary.by_group[0]);
    print_mix(out, "group 1", summary.by_group[1]);
    print_mix(out, "pooled", summary.pooled);
    return kExitOk;
  });
}

int cmd_fit(const std::string& dataset_path, const RunConfig& config,
            bool oracle, std::ostream& out, std::ostream& err,
            const std::string& json_out_path) {
  return guarded(err, [&] {
    std::ifstream in(dataset_path);
    if (!in) throw io_error("cannot open dataset '" + dataset_path + "'");
    const auto data = read_dataset_csv(in);

    const double alpha = config.alpha.value_or(0.05);
    const double delta0 = need(config.delta0, "delta0");
    const WeightMode mode = oracle ? WeightMode::oracle : WeightMode::ipcw_km;

    const FineGrayFit res = fit(data, mode, alpha);
    out << "fit: " << fit_json(res) << "\n";
    out << "log SDH ratio b_hat: " << res.b_hat << " (se " << res.se << ")\n";
    out << "SDH ratio: " << std::exp(res.b_hat) << "  "
        << 100.0 * (1.0 - alpha) << "% CI [" << res.ci_lower << ", "
        << res.ci_upper << "]\n";

    const char* verdict =
        res.converged && noninferiority_decision(res, delta0) == Decision::non_inferior
            ? "non_inferior"
            : "not_shown";
    out << "decision vs delta0=" << delta0 << ": " << verdict;
    if (!res.converged) out << " (fit did not converge)";
    out << "\n";

    if (!json_out_path.empty()) {
      auto f = open_output(json_out_path);
      f << fit_json(res) << "\n";
    }
    return res.converged ? kExitOk : kExitNoConvergence;
  });
}

int cmd_power(const PowerInvocation& inv, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig effective = inv.config;
    std::vector<PowerScenario> grid;

    if (inv.grid_table1) {
      if (!effective.hypothesis) effective.hypothesis = "alt";
      if (!effective.tf) effective.tf = 1.0;
      if (!effective.r) effective.r = 0.5;
      grid = table1_grid(*effective.tf, *effective.r,
                         parse_hypothesis(*effective.hypothesis));
      if (effective.replications) {
        for (auto& s : grid) s.replications = *effective.replications;
      }
    } else {
      PowerScenario s;
      s.design = design_from_config(effective, true);
      if (!effective.replications) {
        throw std::invalid_argument("missing required config key: replications");
      }
      s.replications = *effective.replications;
      if (!effective.hypothesis) effective.hypothesis = "alt";
      s.hypothesis = parse_hypothesis(*effective.hypothesis);
      if (effective.n0 || effective.n1) {
        if (!effective.n0 || !effective.n1) {
          throw std::invalid_argument("n0 and n1 must be given together");
        }
        s.n_override = {{*effective.n0, *effective.n1}};
      }
      grid.push_back(s);
    }

    if (!effective.seed) effective.seed = kDefaultSeed;
    const std::uint64_t seed = *effective.seed;

    out << "config: " << config_json(effective) << "\n";
    out << "seed: " << seed << "\n";
    out << "scenarios: " << grid.size() << ", threads: " << inv.threads << "\n";

    const auto results = run_grid(grid, 0, seed, inv.threads);

    auto file = open_output(inv.out_csv);
    write_power_csv(file, results);
    file.flush();
    if (!file) throw io_error("failed writing results to '" + inv.out_csv + "'");
    out << "wrote " << results.size() << " rows to " << inv.out_csv << "\n";

    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      out << "scenario " << i << ": rejection_rate=" << r.rejection_rate
          << " (mc_stderr " << r.mc_stderr
          << "), frac_censored=" << r.mean_frac_censored
          << ", unconverged=" << r.unconverged_count << "\n";
    }

    if (!inv.plot_path.empty()) {
      auto plot = open_output(inv.plot_path);
      write_power_svg(plot, results);
      out << "wrote plot to " << inv.plot_path << "\n";
    }
    return kExitOk;
  });
}

void write_power_svg(std::ostream& out,
                     const std::vector<PowerStudyResult>& results) {
  const double width = 640, height = 440;
  const double left = 70, right = 20, top = 20, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double y_min = 1.0, y_max = 0.0;
  std::vector<double> targets;
  for (const auto& r : results) {
    y_min = std::min(y_min, r.rejection_rate);
    y_max = std::max(y_max, r.rejection_rate);
    const double target = r.scenario.hypothesis == Hypothesis::null_margin
                              ? r.scenario.design.alpha / 2.0
                              : r.scenario.design.power;
    if (std::find(targets.begin(), targets.end(), target) == targets.end()) {
      targets.push_back(target);
    }
    y_min = std::min(y_min, target);
    y_max = std::max(y_max, target);
  }
  y_min = std::max(0.0, y_min - 0.05);
  y_max = std::min(1.0, y_max + 0.05);
  if (y_max <= y_min) y_max = y_min + 0.1;

  const auto sx = [&](double x) { return left + x * plot_w; };
  const auto sy = [&](double y) {
    return top + (y_max - y) / (y_max - y_min) * plot_h;
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g stroke=\"black\" fill=\"none\"><path d=\"M" << left << " " << top
      << " V" << top + plot_h << " H" << left + plot_w << "\"/></g>\n";

  for (int i = 0; i <= 5; ++i) {
    const double fx = static_cast<double>(i) / 5.0;
    char label[32];
    std::snprintf(label, sizeof label, "%.1f", fx);
    out << "<line x1=\"" << sx(fx) << "\" y1=\"" << top + plot_h << "\" x2=\""
        << sx(fx) << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>";
    out << "<text x=\"" << sx(fx) << "\" y=\"" << top + plot_h + 20
        << "\" font-size=\"12\" text-anchor=\"middle\">" << label << "</text>\n";
    const double fy = y_min + fx * (y_max - y_min);
    std::snprintf(label, sizeof label, "%.3f", fy);
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(fy) << "\" x2=\""
        << left << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>";
    out << "<text x=\"" << left - 8 << "\" y=\"" << sy(fy) + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << label << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" font-size=\"13\" text-anchor=\"middle\">censoring fraction</text>\n";
  out << "<text x=\"16\" y=\"" << top + plot_h / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + plot_h / 2 << ")\">rejection rate</text>\n";

  for (double target : targets) {
    out << "<line x1=\"" << left << "\" y1=\"" << sy(target) << "\" x2=\""
        << left + plot_w << "\" y2=\"" << sy(target)
        << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (const auto& r : results) {
    const bool null_hyp = r.scenario.hypothesis == Hypothesis::null_margin;
    out << "<circle cx=\"" << sx(r.mean_frac_censored) << "\" cy=\""
        << sy(r.rejection_rate) << "\" r=\"3.5\" fill=\""
        << (null_hyp ? "#d62728" : "#1f77b4") << "\" fill-opacity=\"0.8\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace crplan::cli
