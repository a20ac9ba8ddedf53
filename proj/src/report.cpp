#include "stir/report.hpp"

#include <cstdio>

#include <json.hpp>

namespace stir {

using ordered_json = nlohmann::ordered_json;

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

ordered_json manifest_object(const Manifest& m) {
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : m.config) config[k] = v;
  return ordered_json{{"tool", m.tool},
                      {"version", m.version},
                      {"command", m.command},
                      {"seed", m.seed},
                      {"config", config}};
}

template <typename Mass, typename Fmt>
std::string join_tail(const std::vector<Mass>& tail, Fmt fmt) {
  std::string out;
  for (std::size_t j = 0; j < tail.size(); ++j) {
    if (j) out += ';';
    out += fmt(tail[j]);
  }
  return out;
}

std::string_view kind_name(JumpKind k) { return k == JumpKind::kSplit ? "split" : "merge"; }

}  // namespace

std::string manifest_comment(const Manifest& m) {
  std::string out = "# tool: " + m.tool + "\n# version: " + m.version + "\n# command: " + m.command +
                    "\n# seed: " + std::to_string(m.seed) + "\n";
  for (const auto& [k, v] : m.config) out += "# config." + k + ": " + v + "\n";
  return out;
}

std::string manifest_json(const Manifest& m) { return manifest_object(m).dump(2); }

std::string trajectory_csv_header() { return "step,V,active,tail,event\n"; }

std::string trajectory_csv_row(const StepRecord& r) {
  return std::to_string(r.step) + "," + std::to_string(r.returns) + "," +
         std::to_string(r.state.active) + "," +
         join_tail(r.state.tail, [](std::int64_t m) { return std::to_string(m); }) + "," +
         std::string(to_string(r.event)) + "\n";
}

std::string event_log_csv_header() {
  return "replication,k,tau,U,kind,merged,active_after,tail_after\n";
}

std::string event_log_csv_rows(std::size_t replication, const LimitTrajectory& traj) {
  std::string out;
  for (const auto& ev : traj.events) {
    out += std::to_string(replication) + "," + std::to_string(ev.k) + "," + format_real(ev.time) +
           "," + format_real(ev.uniform) + "," + std::string(kind_name(ev.kind)) + "," +
           std::to_string(ev.merged) + "," + format_real(ev.after.active) + "," +
           join_tail(ev.after.tail, format_real) + "\n";
  }
  return out;
}

std::string convergence_csv(const ConvergenceResult& result, const Manifest& m) {
  std::string out = manifest_comment(m);
  out += "n,replications,T,q50,q90,q99,correction_rate,fictive_rate,jump_match_rate,seed\n";
  for (const auto& r : result.rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.replications) + "," + format_real(r.horizon) +
           "," + format_real(r.q50) + "," + format_real(r.q90) + "," + format_real(r.q99) + "," +
           format_real(r.correction_rate) + "," + format_real(r.fictive_rate) + "," +
           format_real(r.jump_match_rate) + "," + std::to_string(r.seed) + "\n";
  }
  const bool fitted = result.rows.size() >= 3;
  auto fit = [&](double x) { return fitted ? format_real(x) : std::string("n/a"); };
  out += "# slope: " + fit(result.slope) + "\n# intercept: " + fit(result.intercept) +
         "\n# r_squared: " + fit(result.r_squared) + "\n";
  out += "# matched_slope: " + fit(result.matched_slope) + "\n";
  for (const auto& r : result.rows) {
    out += "# diagnostics n=" + std::to_string(r.n) + " matched_q50=" + format_real(r.matched_q50) +
           " matched_q90=" + format_real(r.matched_q90) + " matched_q99=" + format_real(r.matched_q99) +
           " below_log_rate=" + format_real(r.below_log_rate) +
           " matched_below_log_rate=" + format_real(r.matched_below_log_rate) +
           " mass_identity_rate=" + format_real(r.mass_identity_rate) + "\n";
  }
  return out;
}

std::string convergence_json(const ConvergenceResult& result, const Manifest& m) {
  ordered_json rows = ordered_json::array();
  ordered_json diagnostics = ordered_json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"n", r.n},
                    {"replications", r.replications},
                    {"T", r.horizon},
                    {"q50", r.q50},
                    {"q90", r.q90},
                    {"q99", r.q99},
                    {"correction_rate", r.correction_rate},
                    {"fictive_rate", r.fictive_rate},
                    {"jump_match_rate", r.jump_match_rate},
                    {"seed", r.seed}});
    diagnostics.push_back({{"n", r.n},
                           {"matched_q50", r.matched_q50},
                           {"matched_q90", r.matched_q90},
                           {"matched_q99", r.matched_q99},
                           {"below_log_rate", r.below_log_rate},
                           {"matched_below_log_rate", r.matched_below_log_rate},
                           {"mass_identity_rate", r.mass_identity_rate},
                           {"max_relative_mass_error", r.max_relative_mass_error}});
  }
  ordered_json doc{{"manifest", manifest_object(m)},
                   {"rows", rows},
                   {"fit", result.rows.size() >= 3
                               ? ordered_json{{"slope", result.slope},
                                              {"intercept", result.intercept},
                                              {"r_squared", result.r_squared},
                                              {"matched_slope", result.matched_slope},
                                              {"matched_intercept", result.matched_intercept},
                                              {"matched_r_squared", result.matched_r_squared}}
                               : ordered_json(nullptr)},
                   {"diagnostics", diagnostics}};
  return doc.dump(2) + "\n";
}

std::string stationarity_csv(const StationarityReport& report, const Manifest& m) {
  std::string out = manifest_comment(m);
  out += "name,n_samples,ks_stat,threshold,pass\n";
  for (const auto& s : report.statistics) {
    out += s.name + "," + std::to_string(s.n_samples) + "," + format_real(s.ks_stat) + "," +
           format_real(s.threshold) + "," + (s.pass ? "true" : "false") + "\n";
  }
  out += "# remainder_hits: " + std::to_string(report.remainder_hits) + "\n";
  out += "# fresh_largest_mean: " + format_real(report.fresh_largest.mean) +
         "\n# fresh_largest_variance: " + format_real(report.fresh_largest.variance) +
         "\n# evolved_largest_mean: " + format_real(report.evolved_largest.mean) +
         "\n# evolved_largest_variance: " + format_real(report.evolved_largest.variance) + "\n";
  return out;
}

std::string stationarity_json(const StationarityReport& report, const Manifest& m) {
  ordered_json stats = ordered_json::array();
  for (const auto& s : report.statistics) {
    stats.push_back({{"name", s.name},
                     {"n_samples", s.n_samples},
                     {"ks_stat", s.ks_stat},
                     {"threshold", s.threshold},
                     {"pass", s.pass}});
  }
  ordered_json doc{{"manifest", manifest_object(m)},
                   {"statistics", stats},
                   {"remainder_hits", report.remainder_hits},
                   {"seed", report.seed},
                   {"chain_steps", report.chain_steps},
                   {"largest_component",
                    {{"fresh_mean", report.fresh_largest.mean},
                     {"fresh_variance", report.fresh_largest.variance},
                     {"evolved_mean", report.evolved_largest.mean},
                     {"evolved_variance", report.evolved_largest.variance}}}};
  return doc.dump(2) + "\n";
}

}  // namespace stir
