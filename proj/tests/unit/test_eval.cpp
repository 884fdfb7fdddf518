#include <doctest.h>

#include <cmath>
#include <limits>

#include "onramp/eval/metrics.hpp"
#include "onramp/eval/runner.hpp"
#include "onramp/util/rng.hpp"

using namespace onramp;
using eval::MergeRecord;

namespace {

env::EpisodeOutcome merged_outcome(double entry, double merge_clock, int ego_id,
                                   int t1_id, int l1_id) {
  env::EpisodeOutcome out;
  out.terminal = env::TerminalKind::kMerged;
  out.merge_clock = merge_clock;
  out.parallel_entry_clock = entry;
  out.end_clock = merge_clock;
  out.ego_id = ego_id;
  env::MergeSnapshot snap;
  snap.t1_id = t1_id;
  snap.l1_id = l1_id;
  out.merge_snapshot = snap;
  return out;
}

sim::StepEvent hard_brake(int id, double clock) {
  return {sim::EventKind::kHardBrake, {id}, clock};
}

}  // namespace

TEST_CASE("ttc worked examples") {
  CHECK(eval::ttc_trailing(50.0, 28.0, 26.0) == doctest::Approx(25.0));
  CHECK(eval::ttc_trailing(15.0, 29.0, 26.0) == doctest::Approx(5.0));
  CHECK(eval::ttc_trailing(30.0, 20.0, 26.0) < 0.0);  // opening: safe
  CHECK(std::isinf(eval::ttc_trailing(30.0, 26.0, 26.0)));
  CHECK(eval::ttc_leading(40.0, 28.0, 26.0) == doctest::Approx(20.0));
  CHECK(eval::ttc_leading(9.0, 27.0, 26.0) == doctest::Approx(9.0));
  CHECK(eval::ttc_leading(40.0, 24.0, 26.0) < 0.0);
  CHECK(std::isinf(eval::ttc_leading(40.0, 26.0, 26.0)));
}

TEST_CASE("gap ratio") {
  CHECK(eval::gap_ratio(0.0, 50.0) == doctest::Approx(0.0));
  CHECK(eval::gap_ratio(30.0, 50.0) == doctest::Approx(0.6));
  CHECK(eval::gap_ratio(10.0, 80.0) == doctest::Approx(0.125));
  CHECK_THROWS_AS(eval::gap_ratio(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("conflict detection windows and parties") {
  const auto outcome = merged_outcome(10.0, 30.0, 1, 2, 3);

  SUBCASE("ego hard brake in the zone") {
    const std::vector<sim::StepEvent> log = {hard_brake(1, 15.0)};
    CHECK(eval::detect_conflict(log, outcome));
  }
  SUBCASE("trailer brake within 5 s of the merge") {
    const std::vector<sim::StepEvent> log = {hard_brake(2, 34.5)};
    CHECK(eval::detect_conflict(log, outcome));
  }
  SUBCASE("trailer brake after the window closes") {
    const std::vector<sim::StepEvent> log = {hard_brake(2, 35.5)};
    CHECK(!eval::detect_conflict(log, outcome));
  }
  SUBCASE("brake before the ego reached the parallel section") {
    const std::vector<sim::StepEvent> log = {hard_brake(1, 9.5)};
    CHECK(!eval::detect_conflict(log, outcome));
  }
  SUBCASE("uninvolved vehicle does not count") {
    const std::vector<sim::StepEvent> log = {hard_brake(77, 20.0)};
    CHECK(!eval::detect_conflict(log, outcome));
  }
  SUBCASE("no events, no conflict") {
    CHECK(!eval::detect_conflict({}, outcome));
  }
  SUBCASE("unmerged episode: only the ego counts, up to the episode end") {
    env::EpisodeOutcome out;
    out.terminal = env::TerminalKind::kTimeout;
    out.parallel_entry_clock = 10.0;
    out.end_clock = 160.0;
    out.ego_id = 1;
    const std::vector<sim::StepEvent> in = {hard_brake(1, 100.0)};
    CHECK(eval::detect_conflict(in, out));
    const std::vector<sim::StepEvent> other = {hard_brake(2, 100.0)};
    CHECK(!eval::detect_conflict(other, out));
  }
}

TEST_CASE("summary aggregation matches an independent recomputation") {
  util::Rng rng(77);
  std::vector<MergeRecord> records;
  for (int i = 0; i < 250; ++i) {
    MergeRecord r;
    const double u = rng.uniform01();
    r.outcome = u < 0.7 ? "merged" : (u < 0.85 ? "crashed" : "timeout");
    r.conflict = rng.bernoulli(0.1);
    r.episode_seed = 1000 + i;
    if (r.outcome == "merged") {
      r.merge_velocity = rng.uniform(15.0, 28.0);
      r.ttc_l1 = rng.uniform(-20.0, 40.0);
      r.ttc_t1 = rng.uniform(-20.0, 40.0);
      r.gap_ratio = rng.uniform(0.0, 1.2);
    }
    records.push_back(r);
  }
  const eval::EvaluationSummary s = eval::summarize(records);

  // brute-force recount, same index order
  int merges = 0, crashes = 0, timeouts = 0, conflicts = 0;
  int l1_low = 0, t1_low = 0, gap_high = 0;
  double vsum = 0.0;
  for (const auto& r : records) {
    if (r.outcome == "merged") ++merges;
    if (r.outcome == "crashed") ++crashes;
    if (r.outcome == "timeout") ++timeouts;
    if (r.conflict) ++conflicts;
    if (r.merge_velocity) vsum += *r.merge_velocity;
    if (r.ttc_l1 && *r.ttc_l1 > 0.0 && *r.ttc_l1 < 10.0) ++l1_low;
    if (r.ttc_t1 && *r.ttc_t1 > 0.0 && *r.ttc_t1 < 10.0) ++t1_low;
    if (r.gap_ratio && *r.gap_ratio > 0.5) ++gap_high;
  }
  const int n = static_cast<int>(records.size());
  REQUIRE(s.n_episodes == n);
  REQUIRE(s.n_merges == merges);
  REQUIRE(s.n_timeouts == timeouts);
  // exact equality: identical arithmetic on identical inputs
  CHECK(s.collision_pct == 100.0 * crashes / n);
  CHECK(s.conflict_pct == 100.0 * conflicts / n);
  CHECK(s.mean_merge_velocity == vsum / merges);
  CHECK(s.pct_ttc_l1_below_10s == 100.0 * l1_low / merges);
  CHECK(s.pct_ttc_t1_below_10s == 100.0 * t1_low / merges);
  CHECK(s.pct_gap_ratio_above_half == 100.0 * gap_high / merges);
}

TEST_CASE("merge records survive the CSV round trip exactly") {
  std::vector<MergeRecord> records;
  MergeRecord a;
  a.outcome = "merged";
  a.merge_velocity = 24.125;
  a.ttc_l1 = std::numeric_limits<double>::infinity();
  a.ttc_t1 = -3.5;
  a.gap_ratio = 0.3333333333333333;
  a.conflict = false;
  a.episode_seed = 42;
  records.push_back(a);
  MergeRecord b;
  b.outcome = "timeout";
  b.conflict = true;
  b.episode_seed = 43;
  records.push_back(b);

  const std::string csv = eval::records_to_csv(records);
  const auto back = eval::records_from_csv(csv);
  REQUIRE(back.size() == records.size());
  CHECK(back[0].outcome == "merged");
  CHECK(*back[0].merge_velocity == *a.merge_velocity);
  CHECK(std::isinf(*back[0].ttc_l1));
  CHECK(*back[0].ttc_t1 == *a.ttc_t1);
  CHECK(*back[0].gap_ratio == *a.gap_ratio);
  CHECK(back[0].conflict == false);
  CHECK(back[0].episode_seed == 42);
  CHECK(back[1].outcome == "timeout");
  CHECK(!back[1].merge_velocity.has_value());
  CHECK(back[1].conflict == true);
  // summaries of original and round-tripped records agree exactly
  const auto s1 = eval::summarize(records);
  const auto s2 = eval::summarize(back);
  CHECK(s1.collision_pct == s2.collision_pct);
  CHECK(s1.mean_merge_velocity == s2.mean_merge_velocity);
}

TEST_CASE("density presets") {
  const auto easy = eval::density_preset("easy");
  CHECK(easy.right_inflow == 405.0);
  CHECK(easy.left_inflow == 90.0);
  const auto medium = eval::density_preset("medium");
  CHECK(medium.right_inflow == 810.0);
  CHECK(medium.left_inflow == 180.0);
  const auto hard = eval::density_preset("hard");
  CHECK(hard.right_inflow == 1013.0);
  CHECK(hard.left_inflow == 225.0);
  CHECK(medium.right_probability() == doctest::Approx(810.0 / 3600.0));
  CHECK_THROWS_AS(eval::density_preset("impossible"), std::invalid_argument);
}

TEST_CASE("ttc sign convention holds on simulated merges") {
  // For every merged episode: ttc_trailing <= 0 iff v_t1 <= v_ego.
  util::Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const double g = rng.uniform(0.1, 80.0);
    const double vt = rng.uniform(0.0, 30.0);
    const double ve = rng.uniform(0.0, 30.0);
    const double ttc = eval::ttc_trailing(g, vt, ve);
    if (vt < ve) CHECK(ttc <= 0.0);
    if (vt > ve) CHECK(ttc > 0.0);
    const double ttc_l = eval::ttc_leading(g, ve, vt);
    if (ve < vt) CHECK(ttc_l <= 0.0);
    if (ve > vt) CHECK(ttc_l > 0.0);
  }
}
