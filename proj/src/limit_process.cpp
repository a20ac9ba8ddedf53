#include "stir/limit_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace stir {

std::size_t JumpClock::count_until(double t) const {
  return static_cast<std::size_t>(
      std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin());
}

JumpClock clock_from_unit_arrivals(std::span<const double> unit_arrivals, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("jump clock: horizon must be positive");
  JumpClock clock{horizon, {}};
  for (double gamma : unit_arrivals) {
    const double tau = std::sqrt(2.0 * gamma);
    if (tau > horizon) break;
    clock.jump_times.push_back(tau);
  }
  return clock;
}

JumpClock sample_jump_times(double horizon, Stream& rng) {
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_jump_times: horizon must be positive");
  // Lambda(t) = t^2 / 2; the k-th jump sits at Lambda^{-1}(Gamma_k).
  const double cap = 0.5 * horizon * horizon;
  JumpClock clock{horizon, {}};
  double gamma = rng.exponential();
  while (gamma <= cap) {
    clock.jump_times.push_back(std::sqrt(2.0 * gamma));
    gamma += rng.exponential();
  }
  return clock;
}

std::pair<JumpKind, std::size_t> apply_limit_jump(RealVector& state, double u) {
  const auto [j, scaled] = select_component_scaled(state, u);
  if (j >= 1) {
    merge_into_active(state, j);
    return {JumpKind::kMerge, j};
  }
  const double fragment = state.active - scaled;
  state.active = scaled;
  insert_ranked_inplace(state, std::max(fragment, 0.0));
  return {JumpKind::kSplit, 0};
}

LimitTrajectory evolve_limit(const JumpClock& clock, std::span<const double> uniforms) {
  if (uniforms.size() < clock.count())
    throw std::invalid_argument("evolve_limit: fewer uniforms than jumps");
  LimitTrajectory traj{clock, {}};
  traj.events.reserve(clock.count());
  RealVector state;
  double last = 0.0;
  for (std::size_t k = 0; k < clock.count(); ++k) {
    const double tau = clock.jump_times[k];
    state.active += tau - last;
    last = tau;
    JumpEvent ev;
    ev.k = k + 1;
    ev.time = tau;
    ev.uniform = uniforms[k];
    std::tie(ev.kind, ev.merged) = apply_limit_jump(state, ev.uniform);
    ev.after = state;
    traj.events.push_back(std::move(ev));
  }
  return traj;
}

namespace {

void check_time(const JumpClock& clock, double t) {
  if (!(t >= 0.0 && t <= clock.horizon))
    throw std::out_of_range("limit trajectory: time outside [0, horizon]");
}

RealVector drifted(const std::vector<JumpEvent>& events, std::size_t applied, double t) {
  if (applied == 0) return RealVector{t, {}};
  const JumpEvent& ev = events[applied - 1];
  RealVector out = ev.after;
  out.active += t - ev.time;
  return out;
}

}  // namespace

RealVector LimitTrajectory::state_at(double t) const {
  check_time(clock, t);
  return drifted(events, clock.count_until(t), t);
}

RealVector LimitTrajectory::state_before(double t) const {
  check_time(clock, t);
  const auto applied = static_cast<std::size_t>(
      std::lower_bound(clock.jump_times.begin(), clock.jump_times.end(), t) -
      clock.jump_times.begin());
  return drifted(events, applied, t);
}

}  // namespace stir
