#include "onramp/env/merge_env.hpp"

#include <cmath>
#include <stdexcept>

namespace onramp::env {

const char* terminal_kind_name(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::kMerged: return "merged";
    case TerminalKind::kCrashed: return "crashed";
    case TerminalKind::kTimeout: return "timeout";
  }
  return "unknown";
}

MergeEnv::MergeEnv(const MergeEnvConfig& config) : config_(config) {}

void MergeEnv::reset(std::uint64_t seed, std::span<double> obs) {
  sim::ScenarioConfig scenario = config_.scenario;
  scenario.seed = seed;
  scenario.auto_spawn_ego = false;
  sim_ = std::make_unique<sim::Simulation>(sim::build_network(), scenario);

  const long warmup_steps =
      std::lround(config_.warmup_seconds / sim::Simulation::kDt);
  sim_->set_event_logging(false);
  for (long i = 0; i < warmup_steps; ++i) sim_->step_humans();
  sim_->set_event_logging(true);
  sim_->clear_event_log();
  sim_->insert_ego();

  active_ = true;
  outcome_.reset();
  parallel_entry_clock_ = -1.0;
  fill(obs, observe());
}

Observation MergeEnv::observe() const {
  if (!sim_) throw std::logic_error("MergeEnv: reset() before observe()");
  return env::observe(*sim_);
}

MergeEnv::StepResult MergeEnv::step(int action, std::span<double> obs) {
  if (!active_) throw std::logic_error("MergeEnv: step() on a finished episode");

  const double accel = action_acceleration(action);
  const auto events = sim_->step(accel, is_lane_change(action));
  const double r = reward(*sim_, events, config_.reward);

  if (parallel_entry_clock_ < 0.0) {
    const sim::Vehicle* ego = sim_->find_vehicle(sim_->episode_ego_id());
    if (ego && (ego->lane != sim::kRampLane ||
                ego->x >= sim_->network().parallel_start_x())) {
      parallel_entry_clock_ = sim_->clock();
    }
  }

  std::optional<TerminalKind> terminal;
  for (const auto& ev : events) {
    if (ev.kind == sim::EventKind::kCollision) {
      for (const int id : ev.vehicle_ids) {
        if (id == sim_->episode_ego_id()) terminal = TerminalKind::kCrashed;
      }
    } else if (ev.kind == sim::EventKind::kEgoMerged && !terminal) {
      terminal = TerminalKind::kMerged;
    } else if (ev.kind == sim::EventKind::kEgoTimeout && !terminal) {
      terminal = TerminalKind::kTimeout;
    }
  }

  if (terminal) {
    active_ = false;
    EpisodeOutcome out;
    out.terminal = *terminal;
    out.ego_id = sim_->episode_ego_id();
    out.parallel_entry_clock = parallel_entry_clock_;
    out.end_clock = sim_->clock();
    if (*terminal == TerminalKind::kMerged) {
      out.merge_clock = sim_->clock();
      const MergeContext ctx = merge_context(*sim_);
      MergeSnapshot snap;
      snap.v_ego = ctx.v_ego;
      snap.v_t1 = ctx.v_t1_eff;
      snap.v_l1 = ctx.v_l1_eff;
      snap.g_t1 = ctx.tail_gap;
      snap.g_l1 = ctx.head_gap;
      snap.g0 = ctx.g0;
      snap.gc = ctx.gc;
      snap.t1_id = ctx.t1 ? ctx.t1->id : -1;
      snap.l1_id = ctx.l1 ? ctx.l1->id : -1;
      out.merge_snapshot = snap;
    }
    outcome_ = out;
  }

  fill(obs, observe());
  return StepResult{r, terminal.has_value()};
}

void MergeEnv::coast(double seconds,
                     const std::function<void(const sim::Simulation&)>& observer) {
  if (!outcome_ || outcome_->terminal != TerminalKind::kMerged) return;
  const long steps = std::lround(seconds / sim::Simulation::kDt);
  for (long i = 0; i < steps; ++i) {
    const auto events = sim_->step_humans();
    if (observer) observer(*sim_);
    bool collided = false;
    for (const auto& ev : events) {
      if (ev.kind == sim::EventKind::kCollision) collided = true;
    }
    if (collided) break;
  }
}

void MergeEnv::fill(std::span<double> out, const Observation& obs) const {
  if (out.size() < static_cast<std::size_t>(kObservationSize)) {
    throw std::invalid_argument("observation buffer too small");
  }
  for (int i = 0; i < kObservationSize; ++i) out[i] = obs.values[i];
}

}  // namespace onramp::env
