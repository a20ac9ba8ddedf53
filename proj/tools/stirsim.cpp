// stirsim: command-line front end for the stirring experiments.
//
// Exit codes: 0 when every enabled check passes, 1 when a check fails,
// 2 for usage or configuration errors.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stir/coupling.hpp"
#include "stir/limit_process.hpp"
#include "stir/report.hpp"
#include "stir/returns.hpp"
#include "stir/stationary.hpp"
#include "stir/stirring.hpp"

#ifndef STIR_VERSION
#define STIR_VERSION "0.1.0"
#endif

namespace {

using stir::format_real;
using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 42;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> n;
  std::optional<double> horizon;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> steps;
  std::string seed;
  std::optional<double> eps;
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
  std::string model = "direct";
  std::string trajectory;
};

// Resolved configuration of one run. Only fields that influence results are
// echoed into the manifest, so outputs do not depend on --threads or paths.
struct Run {
  std::string command;
  std::vector<std::int64_t> n;
  double horizon = 2.0;
  std::size_t reps = 0;
  std::size_t steps = 0;
  std::uint64_t seed = kDefaultSeed;
  double eps = stir::kDefaultTruncation;
  unsigned threads = 0;
  std::string format;
  std::string model;
  stir::Manifest manifest;
};

std::vector<std::int64_t> parse_n(const std::vector<std::string>& items) {
  std::vector<std::int64_t> out;
  for (const auto& raw : items) {
    std::stringstream ss(raw);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        throw UsageError("--n: not an integer: " + tok);
      }
      if (used != tok.size() || v < 1) throw UsageError("--n: expected positive integers, got " + tok);
      out.push_back(v);
    }
  }
  return out;
}

std::uint64_t parse_seed(const std::string& text) {
  if (text.empty()) return kDefaultSeed;
  if (text == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw UsageError("--seed: expected an unsigned integer or 'random'");
  }
  if (used != text.size() || text.front() == '-') throw UsageError("--seed: expected an unsigned integer or 'random'");
  return v;
}

std::string join_n(const std::vector<std::int64_t>& n) {
  std::string s;
  for (std::size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
  return s;
}

Run resolve(const std::string& command, const Options& o) {
  Run r;
  r.command = command;
  r.seed = parse_seed(o.seed);
  r.threads = o.threads;
  r.format = o.format;
  r.model = o.model;
  r.n = parse_n(o.n);
  r.horizon = o.horizon.value_or(2.0);
  r.eps = o.eps.value_or(stir::kDefaultTruncation);

  std::vector<std::pair<std::string, std::string>> cfg;
  if (command == "returns-limit") {
    if (r.n.empty()) r.n = {10000};
    r.reps = o.reps.value_or(100000);
    cfg = {{"n", join_n(r.n)}, {"T", format_real(r.horizon)}, {"reps", std::to_string(r.reps)},
           {"model", r.model}};
  } else if (command == "limit-sim") {
    r.reps = o.reps.value_or(1000);
    cfg = {{"T", format_real(r.horizon)}, {"reps", std::to_string(r.reps)}};
  } else if (command == "couple") {
    if (r.n.empty()) r.n = {100, 1000, 10000};
    r.reps = o.reps.value_or(1000);
    cfg = {{"n", join_n(r.n)}, {"T", format_real(r.horizon)}, {"reps", std::to_string(r.reps)}};
  } else if (command == "stationarity") {
    r.reps = o.reps.value_or(100000);
    r.steps = o.steps.value_or(50);
    cfg = {{"reps", std::to_string(r.reps)}, {"steps", std::to_string(r.steps)},
           {"eps", format_real(r.eps)}};
  } else {  // exact-check
    if (r.n.empty()) r.n = {3};
    r.steps = o.steps.value_or(2);
    cfg = {{"n", join_n(r.n)}, {"steps", std::to_string(r.steps)}};
  }
  if (command != "couple" && r.n.size() > 1) throw UsageError("--n: a single value is expected for " + command);
  cfg.emplace_back("format", r.format);
  r.manifest = stir::Manifest{"stirsim", STIR_VERSION, command, r.seed, std::move(cfg)};
  return r;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open output file: " + path);
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path);
}

ordered_json manifest_object(const stir::Manifest& m) {
  return ordered_json::parse(stir::manifest_json(m));
}

ordered_json gof_json(const stir::GofResult& g) {
  return {{"statistic", g.statistic},       {"threshold", g.threshold},
          {"degrees_of_freedom", g.degrees_of_freedom}, {"n_samples", g.n_samples},
          {"pass", g.pass}};
}

std::string gof_row(const std::string& name, const stir::GofResult& g) {
  return name + "," + format_real(g.statistic) + "," + format_real(g.threshold) + "," +
         std::to_string(g.degrees_of_freedom) + "," + std::to_string(g.n_samples) + "," +
         (g.pass ? "true" : "false") + "\n";
}

// ---------------------------------------------------------------------------

std::string trajectory_dump(const Run& r) {
  const std::int64_t n = r.n.front();
  std::string out = stir::manifest_comment(r.manifest) + stir::trajectory_csv_header();
  if (r.model == "direct") {
    stir::Stream rng = stir::make_stream(r.seed, 0, stir::Purpose::kDiscreteChain);
    stir::DirectPermutation p(n);
    const auto steps = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(n)) * r.horizon));
    for (std::int64_t i = 1; i <= steps; ++i) {
      const stir::EventKind ev = p.step(rng);
      out += stir::trajectory_csv_row({i, p.returns(), ev, p.cycle_vector()});
    }
  } else {
    const stir::CouplingDriver driver(n, r.horizon, r.seed, 0);
    const auto traj = stir::evolve_coupled_discrete(driver, stir::build_discrete_returns(driver));
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
      out += stir::trajectory_csv_row({static_cast<std::int64_t>(i), traj.returns[i], traj.events[i - 1],
                                       traj.states[i]});
    }
  }
  return out;
}

int run_returns_limit(const Run& r, const std::string& out_path, const std::string& trajectory_path) {
  const auto model = r.model == "direct" ? stir::ReturnModel::kDirect : stir::ReturnModel::kCoupled;
  const stir::ReturnSamples s = stir::sample_returns(r.n.front(), r.horizon, r.reps, r.seed, model, r.threads);
  const stir::ReturnsLimitReport rep = stir::returns_limit_test(s);
  const bool pass = rep.pass() && s.mass_identity_failures == 0;
  const double correction_rate = static_cast<double>(s.runs_with_correction) / static_cast<double>(r.reps);

  std::string text;
  if (r.format == "json") {
    ordered_json doc{{"manifest", manifest_object(r.manifest)},
                     {"steps", s.steps},
                     {"mid_step", s.mid_step},
                     {"marginal_poisson", gof_json(rep.marginal)},
                     {"joint_poisson", gof_json(rep.joint)},
                     {"lambda_mid", rep.lambda_mid},
                     {"lambda_increment", rep.lambda_increment},
                     {"mean_V", rep.end_moments.mean},
                     {"variance_V", rep.end_moments.variance},
                     {"correction_rate", correction_rate},
                     {"mass_identity_failures", s.mass_identity_failures},
                     {"pass", pass}};
    text = doc.dump(2) + "\n";
  } else {
    text = stir::manifest_comment(r.manifest);
    text += "check,statistic,threshold,degrees_of_freedom,n_samples,pass\n";
    text += gof_row("marginal_poisson", rep.marginal);
    text += gof_row("joint_poisson", rep.joint);
    text += "# steps: " + std::to_string(s.steps) + "\n# mid_step: " + std::to_string(s.mid_step) + "\n";
    text += "# mean_V: " + format_real(rep.end_moments.mean) +
            "\n# variance_V: " + format_real(rep.end_moments.variance) + "\n";
    text += "# correction_rate: " + format_real(correction_rate) + "\n";
    text += "# mass_identity_failures: " + std::to_string(s.mass_identity_failures) + "\n";
  }
  write_output(out_path, text);
  if (!trajectory_path.empty()) write_output(trajectory_path, trajectory_dump(r));
  return pass ? 0 : kExitCheckFailed;
}

int run_limit_sim(const Run& r, const std::string& out_path) {
  struct Sim {
    stir::LimitTrajectory traj;
    bool ok = true;
  };
  const auto sims = [&] {
    std::vector<Sim> v(r.reps);
    for (std::size_t rep = 0; rep < r.reps; ++rep) {
      stir::Stream clock_rng = stir::make_stream(r.seed, rep, stir::Purpose::kClock);
      const stir::Stream u = stir::make_stream(r.seed, rep, stir::Purpose::kSplitMergeUniforms);
      const stir::JumpClock clock = stir::sample_jump_times(r.horizon, clock_rng);
      std::vector<double> us(clock.count());
      for (std::size_t k = 0; k < us.size(); ++k) us[k] = u.at(k);
      Sim s{stir::evolve_limit(clock, us), true};
      for (const auto& ev : s.traj.events) {
        s.ok &= ev.after.valid() && std::abs(ev.after.total() - ev.time) <= 1e-9 * ev.time;
      }
      if (!s.traj.events.empty()) s.ok &= s.traj.events.front().kind == stir::JumpKind::kSplit;
      for (int g = 0; g <= 100; ++g) {
        const double t = r.horizon * g / 100.0;
        s.ok &= std::abs(s.traj.state_at(t).total() - t) <= 1e-9 * t;
      }
      v[rep] = std::move(s);
    }
    return v;
  }();
  std::size_t failures = 0, jumps = 0;
  for (const auto& s : sims) {
    failures += !s.ok;
    jumps += s.traj.events.size();
  }
  const bool pass = failures == 0;

  std::string text;
  if (r.format == "json") {
    ordered_json events = ordered_json::array();
    for (std::size_t rep = 0; rep < sims.size(); ++rep) {
      for (const auto& ev : sims[rep].traj.events) {
        events.push_back({{"replication", rep},
                          {"k", ev.k},
                          {"tau", ev.time},
                          {"U", ev.uniform},
                          {"kind", ev.kind == stir::JumpKind::kSplit ? "split" : "merge"},
                          {"merged", ev.merged},
                          {"active_after", ev.after.active},
                          {"tail_after", ev.after.tail}});
      }
    }
    ordered_json doc{{"manifest", manifest_object(r.manifest)},
                     {"events", events},
                     {"total_jumps", jumps},
                     {"invariant_failures", failures},
                     {"pass", pass}};
    text = doc.dump(2) + "\n";
  } else {
    text = stir::manifest_comment(r.manifest) + stir::event_log_csv_header();
    for (std::size_t rep = 0; rep < sims.size(); ++rep) text += stir::event_log_csv_rows(rep, sims[rep].traj);
    text += "# total_jumps: " + std::to_string(jumps) + "\n# invariant_failures: " + std::to_string(failures) + "\n";
  }
  write_output(out_path, text);
  return pass ? 0 : kExitCheckFailed;
}

int run_couple(const Run& r, const std::string& out_path) {
  for (std::int64_t n : r.n) {
    if (n < 4) throw UsageError("couple: every n must be >= 4");
    if (std::floor(std::sqrt(static_cast<double>(n)) * r.horizon) > static_cast<double>(n))
      throw UsageError("couple: floor(sqrt(n) T) exceeds n for n = " + std::to_string(n));
  }
  const stir::ConvergenceResult res = stir::convergence_experiment(r.n, r.horizon, r.reps, r.seed, r.threads);
  bool pass = true;
  for (const auto& row : res.rows) pass &= row.mass_identity_rate == 1.0;
  write_output(out_path, r.format == "json" ? stir::convergence_json(res, r.manifest)
                                            : stir::convergence_csv(res, r.manifest));
  return pass ? 0 : kExitCheckFailed;
}

int run_stationarity(const Run& r, const std::string& out_path) {
  if (r.reps < 100) throw UsageError("stationarity: --reps must be at least 100");
  const stir::StationarityReport rep = stir::stationarity_experiment(r.reps, r.steps, r.seed, r.eps, r.threads);
  write_output(out_path, r.format == "json" ? stir::stationarity_json(rep, r.manifest)
                                            : stir::stationarity_csv(rep, r.manifest));
  return rep.all_pass() ? 0 : kExitCheckFailed;
}

int run_exact_check(const Run& r, const std::string& out_path) {
  constexpr double kTolerance = 1e-12;
  const std::int64_t n = r.n.front();
  const auto steps = static_cast<std::int64_t>(r.steps);
  stir::Distribution direct;
  try {
    direct = stir::enumerate_exact(n, steps);
  } catch (const std::length_error& e) {
    throw UsageError(std::string("exact-check: ") + e.what());
  }
  const stir::Distribution reduced = stir::reduced_chain_distribution(n, steps);
  const double tv = stir::total_variation(direct, reduced);
  const bool pass = tv <= kTolerance;

  stir::Distribution states = direct;
  for (const auto& [s, p] : reduced) states.emplace(s, 0.0);
  auto prob = [](const stir::Distribution& d, const stir::IntVector& s) {
    const auto it = d.find(s);
    return it == d.end() ? 0.0 : it->second;
  };

  std::string text;
  if (r.format == "json") {
    ordered_json outcomes = ordered_json::array();
    for (const auto& [s, unused] : states) {
      outcomes.push_back({{"state", stir::to_string(s)},
                          {"active", s.active},
                          {"tail", s.tail},
                          {"direct", prob(direct, s)},
                          {"reduced", prob(reduced, s)}});
    }
    ordered_json doc{{"manifest", manifest_object(r.manifest)},
                     {"outcomes", outcomes},
                     {"total_variation", tv},
                     {"tolerance", kTolerance},
                     {"pass", pass}};
    text = doc.dump(2) + "\n";
  } else {
    text = stir::manifest_comment(r.manifest) + "state,direct,reduced\n";
    for (const auto& [s, unused] : states) {
      text += "\"" + stir::to_string(s) + "\"," + format_real(prob(direct, s)) + "," +
              format_real(prob(reduced, s)) + "\n";
    }
    text += "# total_variation: " + format_real(tv) + "\n# pass: " + (pass ? "true" : "false") + "\n";
  }
  write_output(out_path, text);
  return pass ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random stirring experiments: return counts, limit process, coupling, stationarity"};
  app.set_version_flag("--version", STIR_VERSION);
  app.set_config("--config", "", "Config file with `flag = value` lines; flags on the command line win");
  app.require_subcommand(1);

  Options o;
  app.add_option("--n", o.n, "Population size; comma-separated list for couple")->delimiter(',');
  app.add_option("--T", o.horizon, "Time horizon")->check(CLI::PositiveNumber);
  app.add_option("--reps", o.reps, "Replications")->check(CLI::PositiveNumber);
  app.add_option("--steps", o.steps, "Chain steps (stationarity, exact-check)")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Master seed, or 'random'");
  app.add_option("--eps", o.eps, "Stick-breaking truncation")->check(CLI::Range(0.0, 1.0) & CLI::PositiveNumber);
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  app.add_option("--out", o.out, "Output file (default stdout)");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--model", o.model, "returns-limit: direct or coupled")->check(CLI::IsMember({"direct", "coupled"}));
  app.add_option("--trajectory", o.trajectory, "returns-limit: dump replication 0 step by step to this file");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"returns-limit", "Return counts against their Poisson limit"},
      {"limit-sim", "Limit-process event logs with invariant checks"},
      {"couple", "Coupled convergence table"},
      {"stationarity", "Split-merge invariance of the stationary measure"},
      {"exact-check", "Exact laws of the direct and reduced chains"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const Run r = resolve(command, o);
    if (command == "returns-limit") return run_returns_limit(r, o.out, o.trajectory);
    if (command == "limit-sim") return run_limit_sim(r, o.out);
    if (command == "couple") return run_couple(r, o.out);
    if (command == "stationarity") return run_stationarity(r, o.out);
    return run_exact_check(r, o.out);
  } catch (const UsageError& e) {
    std::cerr << "stirsim: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "stirsim: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "stirsim: error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
