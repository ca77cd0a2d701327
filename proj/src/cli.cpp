#include "tagbell/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tagbell/report.hpp"

namespace tagbell {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 1;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("write failed for " + path);
}

std::string fmt(double v, const char* spec = "%.1f") {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct AnalysisFlags {
  std::string config_path;
  std::string method = "moving";
  TimePs tau = 0;
  TimePs tau1 = 0;
  TimePs tau2 = 0;
  TimePs tau3 = 0;
  TimePs offset = 0;
  std::size_t subsets = 30;
  std::string singles = "averaged";
  bool no_normalize = false;
};

void add_analysis_flags(CLI::App* cmd, AnalysisFlags& f) {
  cmd->add_option("--config", f.config_path, "Analysis config JSON (flags override it)");
  cmd->add_option("--method", f.method, "moving|slots|winsum");
  cmd->add_option("--tau", f.tau, "Window or slot size in ps (even)");
  cmd->add_option("--tau1", f.tau1, "Window-sum a1b1 window in ps");
  cmd->add_option("--tau2", f.tau2, "Window-sum a1b2 window in ps");
  cmd->add_option("--tau3", f.tau3, "Window-sum a2b1 window in ps");
  cmd->add_option("--offset", f.offset, "Slot grid offset in ps");
  cmd->add_option("--subsets", f.subsets, "Number of blocks for sigma");
  cmd->add_option("--singles", f.singles, "averaged|first");
  cmd->add_flag("--no-normalize", f.no_normalize, "Do not rescale counts to the mean exposure");
}

JOptions j_options(const AnalysisFlags& f) {
  JOptions o;
  if (f.singles == "averaged")
    o.singles = SinglesMode::averaged;
  else if (f.singles == "first")
    o.singles = SinglesMode::first_combination;
  else
    throw ValidationError("unknown singles mode '" + f.singles + "'");
  o.normalize_exposure = !f.no_normalize;
  return o;
}

// Config file first, then explicitly given flags.
AnalysisConfig analysis_config(const AnalysisFlags& f, CLI::App* cmd) {
  AnalysisConfig c;
  if (!f.config_path.empty()) {
    const json j = load_json(f.config_path);
    c.method = parse_method(j.value("method", std::string("moving")));
    c.tau_ps = j.value("tau_ps", TimePs{0});
    c.slot_offset_ps = j.value("slot_offset_ps", TimePs{0});
    c.tau1_ps = j.value("tau1_ps", c.tau_ps);
    c.tau2_ps = j.value("tau2_ps", c.tau_ps);
    c.tau3_ps = j.value("tau3_ps", c.tau_ps);
  }
  auto given = [cmd](const char* name) { return cmd->count(name) > 0; };
  if (given("--method") || f.config_path.empty()) c.method = parse_method(f.method);
  if (given("--tau")) c.tau_ps = f.tau;
  if (given("--offset")) c.slot_offset_ps = f.offset;
  if (c.method == Method::window_sum) {
    if (given("--tau")) c.tau1_ps = c.tau2_ps = c.tau3_ps = f.tau;
    if (given("--tau1")) c.tau1_ps = f.tau1;
    if (given("--tau2")) c.tau2_ps = f.tau2;
    if (given("--tau3")) c.tau3_ps = f.tau3;
  }
  c.validate();
  return c;
}

std::vector<TimePs> parse_grid(const std::string& text) {
  std::vector<TimePs> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("malformed grid value '" + item + "'");
    }
  }
  if (grid.empty()) throw ValidationError("empty tau grid");
  return grid;
}

Run simulate_from_config(const json& cfg, std::optional<std::uint64_t> seed_override) {
  const std::string kind = cfg.value("kind", std::string("spdc"));
  if (kind == "spdc") {
    SpdcConfig c = spdc_config_from_json(cfg);
    if (seed_override) c.seed = *seed_override;
    return simulate_spdc(c);
  }
  if (kind != "lhv") throw ValidationError("unknown simulation kind '" + kind + "'");
  LhvModel model;
  const json& m = cfg.contains("model") ? cfg.at("model") : json("exploit");
  if (m.is_string()) {
    const auto name = m.get<std::string>();
    if (name == "exploit") {
      model = build_exploit_model(cfg.value("delta_ps", kExploitDeltaPs), cfg.value("tau_design_ps", kExploitTauPs));
    } else {
      bool found = false;
      for (auto& candidate : shipped_models())
        if (candidate.name == name) {
          model = candidate;
          found = true;
        }
      if (!found) throw ValidationError("unknown model '" + name + "'");
    }
  } else {
    model = lhv_model_from_json(m);
  }
  const auto n_trials = cfg.value("n_trials", std::size_t{1'000'000});
  const auto spacing = cfg.value("trial_spacing_ps", kExploitSpacingPs);
  const auto per_block = cfg.value("trials_per_block", std::size_t{1});
  const auto guard = cfg.value("guard_ps", TimePs{0});
  const std::uint64_t seed = seed_override ? *seed_override : cfg.value("seed", kDefaultSeed);
  // Settings and hidden variables draw from separate streams of the one seed.
  const auto schedule = random_trial_schedule(n_trials, spacing, per_block, seed ^ 0x5e771465ULL);
  return simulate_lhv(model, n_trials, spacing, schedule, seed, guard);
}

}  // namespace

ExploitDemoResult run_exploit_demo(std::size_t n_trials, std::uint64_t seed, TimePs delta_ps, TimePs tau_ps,
                                   std::size_t n_subsets) {
  const LhvModel model = build_exploit_model(delta_ps, tau_ps);
  const auto schedule = random_trial_schedule(n_trials, kExploitSpacingPs, 1, seed ^ 0x5e771465ULL);
  const Run run = simulate_lhv(model, n_trials, kExploitSpacingPs, schedule, seed, 3 * tau_ps);
  return {sigma_estimate(run, AnalysisConfig::moving(tau_ps), n_subsets),
          sigma_estimate(run, AnalysisConfig::slots(tau_ps, 0), n_subsets),
          sigma_estimate(run, AnalysisConfig::window_sum(tau_ps, tau_ps, tau_ps), n_subsets)};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coincidence-time-loophole-free Bell analysis of time-tag data", "tagbell"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string tags_path;
  AnalysisFlags flags;
  std::string pairs_path;
  std::vector<std::string> sweep_methods;
  std::string grid_text;
  std::size_t n_models = 100'000;
  std::size_t max_lambdas = 64;
  std::size_t n_trials = 1'000'000;
  TimePs delta = kExploitDeltaPs;
  TimePs demo_tau = kExploitTauPs;

  auto* simulate = app.add_subcommand("simulate", "Write a simulated tag file and schedule sidecar");
  simulate->add_option("--config", config_path, "Simulation config JSON")->required();
  simulate->add_option("--out", out_path, "Output tag file (.csv for CSV, otherwise binary)")->required();
  simulate->add_option("--seed", seed, "Override the config seed");

  auto* analyze = app.add_subcommand("analyze", "Count coincidences and estimate J with sigma");
  analyze->add_option("tags", tags_path, "Tag file")->required();
  add_analysis_flags(analyze, flags);
  analyze->add_option("--out", out_path, "Output JSON (stdout if omitted)");
  analyze->add_option("--pairs", pairs_path, "Optional audit CSV of matched pairs");

  auto* sweep = app.add_subcommand("sweep", "J(tau) over a grid of windows");
  sweep->add_option("tags", tags_path, "Tag file")->required();
  sweep->add_option("--method", sweep_methods, "moving|slots|winsum (repeatable; default all)");
  sweep->add_option("--grid", grid_text, "Comma-separated ascending tau values in ps")->required();
  sweep->add_option("--offset", flags.offset, "Slot grid offset in ps");
  sweep->add_option("--subsets", flags.subsets, "Number of blocks for sigma");
  sweep->add_option("--out", out_path, "Output CSV (stdout if omitted)");

  auto* verify = app.add_subcommand("verify", "Exact margins over random finite hidden-variable models");
  verify->add_option("--models", n_models, "Number of random models");
  verify->add_option("--max-lambdas", max_lambdas, "Largest hidden-variable space (<= 64)");
  verify->add_option("--seed", seed, "Search seed");
  verify->add_option("--out", out_path, "Output JSON (stdout if omitted)");

  auto* demo = app.add_subcommand("exploit-demo", "Simulate the exploit model and analyse it three ways");
  demo->add_option("--trials", n_trials, "Number of trials");
  demo->add_option("--delta", delta, "Setting-dependent delay in ps");
  demo->add_option("--tau", demo_tau, "Design window in ps");
  demo->add_option("--subsets", flags.subsets, "Number of blocks for sigma");
  demo->add_option("--seed", seed, "Simulation seed");

  std::vector<const char*> argv{"tagbell"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) {
      const Run run = simulate_from_config(load_json(config_path), seed);
      write_tags(run, out_path, format_for(out_path));
      err << "wrote " << run.a.events.size() << " A tags and " << run.b.events.size() << " B tags to " << out_path
          << '\n';
    } else if (analyze->parsed()) {
      const auto config = analysis_config(flags, analyze);
      const auto options = j_options(flags);
      const Run run = read_tags(tags_path, format_for(tags_path));
      std::vector<MatchedPair> pairs;
      const auto counts = count_coincidences(run, config, pairs_path.empty() ? nullptr : &pairs);
      std::optional<JStatistic> stat;
      try {
        stat = sigma_estimate(run, config, flags.subsets, options);
      } catch (const InsufficientDataError& e) {
        err << "sigma unavailable: " << e.what() << '\n';
      }
      write_text(out_path, to_json(counts, j_statistic(counts, options), stat).dump(2) + "\n", out);
      if (!pairs_path.empty()) write_text(pairs_path, pairs_csv(pairs), out);
    } else if (sweep->parsed()) {
      const auto grid = parse_grid(grid_text);
      if (sweep_methods.empty()) sweep_methods = {"moving", "slots", "winsum"};
      const Run run = read_tags(tags_path, format_for(tags_path));
      std::vector<SweepResult> results;
      for (const auto& m : sweep_methods)
        results.push_back(sweep_tau(run, parse_method(m), grid, flags.offset, flags.subsets));
      write_text(out_path, sweep_csv(results), out);
    } else if (verify->parsed()) {
      SearchBounds bounds;
      bounds.max_lambdas = max_lambdas;
      const auto worst = random_model_search(n_models, bounds, seed.value_or(kDefaultSeed));
      json report = json::array();
      for (const auto& w : worst) report.push_back(to_json(w));
      write_text(out_path, report.dump(2) + "\n", out);
    } else if (demo->parsed()) {
      const auto r = run_exploit_demo(n_trials, seed.value_or(kDefaultSeed), delta, demo_tau, flags.subsets);
      for (const auto* s : {&r.moving, &r.slots, &r.window_sum})
        out << method_name(s->config.method) << "  J=" << fmt(s->j) << "  sigma=" << fmt(s->sigma)
            << "  z=" << fmt(s->z(), "%.2f") << '\n';
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad config: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace tagbell
