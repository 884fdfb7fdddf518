#pragma once

#include <optional>
#include <string>
#include <vector>

#include "onramp/env/merge_env.hpp"
#include "onramp/rl/network.hpp"

namespace onramp::eval {

// Traffic density presets for model testing (vehicles/hr per lane).
struct DensityConfig {
  std::string name = "medium";
  double right_inflow = 810.0;
  double left_inflow = 180.0;

  double right_probability() const { return right_inflow / 3600.0; }
  double left_probability() const { return left_inflow / 3600.0; }
};

DensityConfig density_preset(const std::string& name);  // easy | medium | hard

// Per-second training inflows (0.3 / 0.1) expressed in the same units.
DensityConfig training_density();

struct MergeRecord {
  std::string outcome;  // merged | crashed | timeout
  // Present iff outcome == merged.
  std::optional<double> merge_velocity;
  std::optional<double> ttc_l1;
  std::optional<double> ttc_t1;
  std::optional<double> gap_ratio;
  bool conflict = false;
  std::uint64_t episode_seed = 0;
};

struct EvaluationSummary {
  int n_episodes = 0;
  int n_merges = 0;
  int n_timeouts = 0;
  double collision_pct = 0.0;       // over all episodes
  double conflict_pct = 0.0;        // over all episodes
  double mean_merge_velocity = 0.0; // over merged episodes (NaN when none)
  double pct_ttc_l1_below_10s = 0.0;   // over merged episodes
  double pct_ttc_t1_below_10s = 0.0;
  double pct_gap_ratio_above_half = 0.0;
};

struct EvaluationOptions {
  DensityConfig density;
  double uncooperative_fraction = 0.25;
  double svo_phi = 0.0;  // reward shaping only; greedy behaviour is unaffected
  int n_episodes = 100;
  std::uint64_t seed0 = 0;
  int n_threads = 1;
};

struct EvaluationResult {
  EvaluationSummary summary;
  std::vector<MergeRecord> records;
};

// Runs n complete episodes with greedy action selection (episode i uses seed
// seed0 + i) and aggregates the social-safety metrics.
EvaluationResult run_evaluation(const rl::PolicyNetwork& policy,
                                const EvaluationOptions& options);

// Plain aggregation of records into the summary (index order).
EvaluationSummary summarize(const std::vector<MergeRecord>& records);

std::string records_to_csv(const std::vector<MergeRecord>& records);
std::vector<MergeRecord> records_from_csv(const std::string& csv);
std::string summary_to_json(const EvaluationSummary& summary);

void write_text_file(const std::string& path, const std::string& content);

// Table IV style sweep: one checkpoint per phi value; missing checkpoints
// are reported and skipped. Returns CSV with one row per phi.
struct SweepEntry {
  double phi = 0.0;
  std::string checkpoint_path;
};
std::string svo_sweep(const std::vector<SweepEntry>& entries,
                      const EvaluationOptions& base_options,
                      std::vector<std::string>* errors = nullptr);

}  // namespace onramp::eval
