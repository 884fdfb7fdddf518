#include "onramp/eval/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "onramp/eval/metrics.hpp"
#include "onramp/rl/checkpoint.hpp"
#include "onramp/rl/ppo.hpp"
#include "onramp/util/thread_pool.hpp"

namespace onramp::eval {

namespace {

constexpr long kMaxEpisodeSteps = 2000;  // timeout fires at 1500

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

MergeRecord run_episode(const rl::PolicyNetwork& policy,
                        const EvaluationOptions& options, std::uint64_t seed) {
  env::MergeEnvConfig cfg;
  cfg.scenario.inflow_right = options.density.right_probability();
  cfg.scenario.inflow_left = options.density.left_probability();
  cfg.scenario.uncooperative_fraction = options.uncooperative_fraction;
  cfg.reward.phi = options.svo_phi;
  env::MergeEnv env(cfg);

  std::vector<double> obs(env.observation_size());
  env.reset(seed, obs);
  for (long t = 0; t < kMaxEpisodeSteps; ++t) {
    const int action = rl::greedy_action(policy, obs);
    if (env.step(action, obs).done) break;
  }
  if (env.episode_active()) {
    throw std::runtime_error("evaluation episode failed to terminate");
  }
  const env::EpisodeOutcome& outcome = *env.outcome();
  if (outcome.terminal == env::TerminalKind::kMerged) {
    env.coast(kConflictWindowAfterMerge);
  }

  MergeRecord rec;
  rec.outcome = env::terminal_kind_name(outcome.terminal);
  rec.episode_seed = seed;
  rec.conflict = detect_conflict(env.simulation().event_log(), outcome);
  if (outcome.merge_snapshot) {
    const auto& snap = *outcome.merge_snapshot;
    rec.merge_velocity = snap.v_ego;
    rec.ttc_l1 = ttc_leading(snap.g_l1, snap.v_ego, snap.v_l1);
    rec.ttc_t1 = ttc_trailing(snap.g_t1, snap.v_t1, snap.v_ego);
    rec.gap_ratio = gap_ratio(snap.gc, snap.g0);
  }
  return rec;
}

}  // namespace

DensityConfig density_preset(const std::string& name) {
  if (name == "easy") return DensityConfig{"easy", 405.0, 90.0};
  if (name == "medium") return DensityConfig{"medium", 810.0, 180.0};
  if (name == "hard") return DensityConfig{"hard", 1013.0, 225.0};
  throw std::invalid_argument("unknown density preset: " + name);
}

DensityConfig training_density() {
  return DensityConfig{"training", 1080.0, 360.0};
}

EvaluationResult run_evaluation(const rl::PolicyNetwork& policy,
                                const EvaluationOptions& options) {
  EvaluationResult result;
  result.records.resize(options.n_episodes);

  util::ThreadPool pool(std::max(1, options.n_threads));
  pool.run(options.n_episodes, [&](int i) {
    result.records[i] =
        run_episode(policy, options, options.seed0 + static_cast<std::uint64_t>(i));
  });

  result.summary = summarize(result.records);
  return result;
}

EvaluationSummary summarize(const std::vector<MergeRecord>& records) {
  EvaluationSummary s;
  s.n_episodes = static_cast<int>(records.size());
  int crashes = 0;
  int conflicts = 0;
  int ttc_l1_low = 0;
  int ttc_t1_low = 0;
  int gap_high = 0;
  double velocity_sum = 0.0;
  for (const auto& r : records) {
    if (r.outcome == "merged") ++s.n_merges;
    if (r.outcome == "crashed") ++crashes;
    if (r.outcome == "timeout") ++s.n_timeouts;
    if (r.conflict) ++conflicts;
    if (r.merge_velocity) velocity_sum += *r.merge_velocity;
    if (r.ttc_l1 && *r.ttc_l1 > 0.0 && *r.ttc_l1 < kTtcThreshold) ++ttc_l1_low;
    if (r.ttc_t1 && *r.ttc_t1 > 0.0 && *r.ttc_t1 < kTtcThreshold) ++ttc_t1_low;
    if (r.gap_ratio && *r.gap_ratio > kGapRatioThreshold) ++gap_high;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.collision_pct = s.n_episodes > 0 ? 100.0 * crashes / s.n_episodes : nan;
  s.conflict_pct = s.n_episodes > 0 ? 100.0 * conflicts / s.n_episodes : nan;
  s.mean_merge_velocity = s.n_merges > 0 ? velocity_sum / s.n_merges : nan;
  s.pct_ttc_l1_below_10s = s.n_merges > 0 ? 100.0 * ttc_l1_low / s.n_merges : nan;
  s.pct_ttc_t1_below_10s = s.n_merges > 0 ? 100.0 * ttc_t1_low / s.n_merges : nan;
  s.pct_gap_ratio_above_half = s.n_merges > 0 ? 100.0 * gap_high / s.n_merges : nan;
  return s;
}

std::string records_to_csv(const std::vector<MergeRecord>& records) {
  std::string out = "outcome,merge_velocity,ttc_l1,ttc_t1,gap_ratio,conflict,episode_seed\n";
  for (const auto& r : records) {
    out += r.outcome;
    out += ',';
    if (r.merge_velocity) out += format_double(*r.merge_velocity);
    out += ',';
    if (r.ttc_l1) out += format_double(*r.ttc_l1);
    out += ',';
    if (r.ttc_t1) out += format_double(*r.ttc_t1);
    out += ',';
    if (r.gap_ratio) out += format_double(*r.gap_ratio);
    out += ',';
    out += r.conflict ? '1' : '0';
    out += ',';
    out += std::to_string(r.episode_seed);
    out += '\n';
  }
  return out;
}

std::vector<MergeRecord> records_from_csv(const std::string& csv) {
  std::vector<MergeRecord> records;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    while (fields.size() < 7) fields.emplace_back();
    MergeRecord r;
    r.outcome = fields[0];
    if (!fields[1].empty()) r.merge_velocity = std::strtod(fields[1].c_str(), nullptr);
    if (!fields[2].empty()) r.ttc_l1 = std::strtod(fields[2].c_str(), nullptr);
    if (!fields[3].empty()) r.ttc_t1 = std::strtod(fields[3].c_str(), nullptr);
    if (!fields[4].empty()) r.gap_ratio = std::strtod(fields[4].c_str(), nullptr);
    r.conflict = fields[5] == "1";
    r.episode_seed = std::stoull(fields[6]);
    records.push_back(r);
  }
  return records;
}

std::string summary_to_json(const EvaluationSummary& s) {
  nlohmann::json j;
  j["n_episodes"] = s.n_episodes;
  j["n_merges"] = s.n_merges;
  j["n_timeouts"] = s.n_timeouts;
  j["collision_pct"] = s.collision_pct;
  j["conflict_pct"] = s.conflict_pct;
  j["mean_merge_velocity"] = s.mean_merge_velocity;
  j["pct_ttc_l1_below_10s"] = s.pct_ttc_l1_below_10s;
  j["pct_ttc_t1_below_10s"] = s.pct_ttc_t1_below_10s;
  j["pct_gap_ratio_above_half"] = s.pct_gap_ratio_above_half;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string svo_sweep(const std::vector<SweepEntry>& entries,
                      const EvaluationOptions& base_options,
                      std::vector<std::string>* errors) {
  std::string csv =
      "phi,n_episodes,n_merges,n_timeouts,collision_pct,conflict_pct,"
      "mean_merge_velocity,pct_ttc_l1_below_10s,pct_ttc_t1_below_10s,"
      "pct_gap_ratio_above_half\n";
  for (const auto& entry : entries) {
    rl::Checkpoint ckpt;
    try {
      ckpt = rl::load_checkpoint(entry.checkpoint_path);
    } catch (const std::exception& e) {
      if (errors) errors->push_back(e.what());
      continue;
    }
    EvaluationOptions options = base_options;
    options.svo_phi = entry.phi;
    const EvaluationResult res = run_evaluation(ckpt.net, options);
    const auto& s = res.summary;
    csv += format_double(entry.phi);
    csv += ',' + std::to_string(s.n_episodes);
    csv += ',' + std::to_string(s.n_merges);
    csv += ',' + std::to_string(s.n_timeouts);
    csv += ',' + format_double(s.collision_pct);
    csv += ',' + format_double(s.conflict_pct);
    csv += ',' + format_double(s.mean_merge_velocity);
    csv += ',' + format_double(s.pct_ttc_l1_below_10s);
    csv += ',' + format_double(s.pct_ttc_t1_below_10s);
    csv += ',' + format_double(s.pct_gap_ratio_above_half);
    csv += '\n';
  }
  return csv;
}

}  // namespace onramp::eval
