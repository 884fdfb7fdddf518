#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "onramp/sim/idm.hpp"
#include "onramp/sim/network.hpp"
#include "onramp/sim/simulation.hpp"
#include "onramp/util/rng.hpp"

using namespace onramp;
using sim::DriverParams;
using sim::EventKind;
using sim::RoadNetwork;
using sim::ScenarioConfig;
using sim::Simulation;
using sim::Vehicle;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DriverParams test_driver(double desired = 26.0, bool cooperative = true) {
  DriverParams p;
  p.desired_speed = desired;
  p.cooperative = cooperative;
  return p;
}

ScenarioConfig quiet_scenario(std::uint64_t seed = 1) {
  ScenarioConfig cfg;
  cfg.inflow_left = 0.0;
  cfg.inflow_right = 0.0;
  cfg.seed = seed;
  return cfg;
}

// Places a human vehicle directly into the state (tests construct scenes).
int place_vehicle(Simulation& s, int lane, double x, double speed,
                  const DriverParams& p) {
  static int synth_id = 100000;
  Vehicle v;
  v.id = ++synth_id;
  v.lane = lane;
  v.x = x;
  v.speed = speed;
  v.params = p;
  s.vehicles_mut().push_back(v);
  return v.id;
}

}  // namespace

TEST_CASE("network geometry") {
  const RoadNetwork net = sim::build_network();
  CHECK(net.parallel_length == 200.0);
  CHECK(net.taper_length == 75.0);
  CHECK(net.highway_lane_count == 2);
  CHECK(net.merge_end_x - net.ramp_entry_x() == doctest::Approx(275.0));
  CHECK(net.upstream_highway_length == 150.0);
  CHECK(net.downstream_highway_length == 150.0);
  CHECK(net.highway_end_x() == doctest::Approx(500.0));
  CHECK(net.in_parallel_section(150.0));
  CHECK(!net.in_parallel_section(149.999));
  CHECK(!net.in_parallel_section(350.0));
}

TEST_CASE("idm free-flow equilibrium and standstill") {
  const DriverParams p = test_driver();
  // at desired speed with no leader the acceleration is zero
  CHECK(sim::idm_acceleration(26.0, 0.0, kInf, p) == doctest::Approx(0.0).epsilon(1e-12));
  // standstill on a free road accelerates at max_accel
  CHECK(sim::idm_acceleration(0.0, 0.0, kInf, p) == doctest::Approx(p.max_accel));
}

TEST_CASE("idm hand-evaluated interaction point") {
  // v = v_leader = desired = 26, gap = 2*s*(26,26):
  // s* = 2.5 + 26*1.0 + 0 = 28.5, so a = 2.6*(1 - 1 - 0.25) = -0.65
  const DriverParams p = test_driver();
  const double s_star = p.min_gap + 26.0 * p.time_headway;
  CHECK(s_star == doctest::Approx(28.5));
  const double a = sim::idm_acceleration(26.0, 26.0, 2.0 * s_star, p);
  CHECK(a == doctest::Approx(-0.25 * p.max_accel).epsilon(1e-12));
}

TEST_CASE("idm rejects non-positive gaps") {
  const DriverParams p = test_driver();
  CHECK_THROWS_AS(sim::idm_acceleration(10.0, 10.0, 0.0, p), std::invalid_argument);
  CHECK_THROWS_AS(sim::idm_acceleration(10.0, 10.0, -1.0, p), std::invalid_argument);
}

TEST_CASE("idm clamps to the braking floor") {
  const DriverParams p = test_driver();
  const double a = sim::idm_acceleration(26.0, 0.0, 0.5, p);
  CHECK(a == doctest::Approx(-9.0));
}

TEST_CASE("effective_leader yield rule") {
  Simulation s(sim::build_network(), quiet_scenario());
  s.insert_ego();
  // drive the ego into the parallel section
  while (s.ego()->x < s.network().parallel_start_x() + 10.0) s.step(3.0, false);
  const double ego_x = s.ego()->x;

  SUBCASE("cooperative right-lane vehicle adopts the ego as virtual leader") {
    const int vid = place_vehicle(s, sim::kRightLane, ego_x - 20.0, 26.0, test_driver());
    place_vehicle(s, sim::kRightLane, ego_x + 100.0, 26.0, test_driver());
    const auto lead = s.effective_leader(*s.find_vehicle(vid));
    REQUIRE(lead.has_value());
    CHECK(lead->id == s.ego()->id);
    CHECK(lead->gap == doctest::Approx(20.0 - s.ego()->length));
  }
  SUBCASE("uncooperative vehicle ignores the unmerged ego") {
    const int vid =
        place_vehicle(s, sim::kRightLane, ego_x - 20.0, 26.0, test_driver(26.0, false));
    const int lead_id =
        place_vehicle(s, sim::kRightLane, ego_x + 100.0, 26.0, test_driver());
    const auto lead = s.effective_leader(*s.find_vehicle(vid));
    REQUIRE(lead.has_value());
    CHECK(lead->id == lead_id);
  }
  SUBCASE("left-lane vehicle only sees its in-lane leader") {
    const int vid = place_vehicle(s, sim::kLeftLane, ego_x - 20.0, 26.0, test_driver());
    const int lead_id =
        place_vehicle(s, sim::kLeftLane, ego_x + 40.0, 26.0, test_driver());
    const auto lead = s.effective_leader(*s.find_vehicle(vid));
    REQUIRE(lead.has_value());
    CHECK(lead->id == lead_id);
    CHECK(lead->gap == doctest::Approx(60.0 - 5.0));
  }
  SUBCASE("virtual leader only when it closes the smaller gap") {
    const int vid = place_vehicle(s, sim::kRightLane, ego_x - 60.0, 26.0, test_driver());
    const int near_id =
        place_vehicle(s, sim::kRightLane, ego_x - 30.0, 26.0, test_driver());
    const auto lead = s.effective_leader(*s.find_vehicle(vid));
    REQUIRE(lead.has_value());
    CHECK(lead->id == near_id);  // 25 m to the in-lane car beats 55 m to the ego
  }
}

TEST_CASE("mobil lane change rule") {
  Simulation s(sim::build_network(), quiet_scenario());

  SUBCASE("lone vehicle stays put") {
    const int vid = place_vehicle(s, sim::kRightLane, 100.0, 26.0, test_driver());
    s.lane_change_tick();
    CHECK(s.find_vehicle(vid)->lane == sim::kRightLane);
  }
  SUBCASE("vehicle blocked by a slow leader overtakes on the left") {
    const int vid = place_vehicle(s, sim::kRightLane, 60.0, 26.0, test_driver());
    const int slow_id = place_vehicle(s, sim::kRightLane, 125.0, 16.0, test_driver(16.0));
    // fast left-lane traffic keeps the slow car from courteously moving aside
    place_vehicle(s, sim::kLeftLane, 110.0, 30.0, test_driver(30.0));
    s.lane_change_tick();
    CHECK(s.find_vehicle(vid)->lane == sim::kLeftLane);
    CHECK(s.find_vehicle(slow_id)->lane == sim::kRightLane);
  }
  SUBCASE("slow leader courteously vacates the lane for a blocked follower") {
    place_vehicle(s, sim::kRightLane, 100.0, 26.0, test_driver());
    const int slow_id = place_vehicle(s, sim::kRightLane, 130.0, 16.0, test_driver(16.0));
    s.lane_change_tick();
    CHECK(s.find_vehicle(slow_id)->lane == sim::kLeftLane);
  }
  SUBCASE("safety veto: change would force the new follower to brake hard") {
    const int vid = place_vehicle(s, sim::kRightLane, 100.0, 26.0, test_driver());
    place_vehicle(s, sim::kRightLane, 130.0, 16.0, test_driver(16.0));
    // fast follower right behind the landing spot
    const int fid = place_vehicle(s, sim::kLeftLane, 93.0, 35.0, test_driver(35.0));
    s.lane_change_tick();
    CHECK(s.find_vehicle(vid)->lane == sim::kRightLane);
    CHECK(s.find_vehicle(fid)->lane == sim::kLeftLane);
  }
  SUBCASE("overlap veto") {
    const int vid = place_vehicle(s, sim::kRightLane, 100.0, 26.0, test_driver());
    place_vehicle(s, sim::kRightLane, 130.0, 16.0, test_driver(16.0));
    place_vehicle(s, sim::kLeftLane, 102.0, 26.0, test_driver());  // alongside
    s.lane_change_tick();
    CHECK(s.find_vehicle(vid)->lane == sim::kRightLane);
  }
}

TEST_CASE("spawn inserts at 26 m/s and suppresses unsafe arrivals") {
  ScenarioConfig cfg;
  cfg.inflow_right = 1.0;  // force an arrival every tick
  cfg.inflow_left = 0.0;
  cfg.seed = 7;
  Simulation s(sim::build_network(), cfg);

  SUBCASE("clear road accepts the arrival") {
    s.spawn_tick();
    REQUIRE(s.vehicles().size() == 1);
    CHECK(s.vehicles()[0].speed == doctest::Approx(26.0));
    CHECK(s.vehicles()[0].x == doctest::Approx(0.0));
    CHECK(s.spawn_stats().right_attempts == 1);
    CHECK(s.spawn_stats().right_inserted == 1);
  }
  SUBCASE("blocked entry discards the arrival") {
    place_vehicle(s, sim::kRightLane, 8.0, 0.0, test_driver());  // stopped near entry
    s.spawn_tick();
    CHECK(s.spawn_stats().right_attempts == 1);
    CHECK(s.spawn_stats().right_inserted == 0);
  }
}

TEST_CASE("auto mode inserts an ego at the ramp entry at 13 m/s") {
  ScenarioConfig cfg = quiet_scenario(3);
  cfg.auto_spawn_ego = true;
  Simulation s(sim::build_network(), cfg);
  for (int i = 0; i < Simulation::kStepsPerSecond; ++i) s.step_humans();
  REQUIRE(s.has_ego());
  CHECK(s.ego()->speed == doctest::Approx(13.0));
  CHECK(s.ego()->x == doctest::Approx(s.network().ramp_entry_x()));
  CHECK(s.ego()->lane == sim::kRampLane);
}

TEST_CASE("ego acceleration integrates at 10 Hz") {
  Simulation s(sim::build_network(), quiet_scenario());
  s.insert_ego();
  for (int i = 0; i < 10; ++i) s.step(3.0, false);
  CHECK(s.ego()->speed == doctest::Approx(16.0).epsilon(1e-9));
  CHECK(s.clock() == doctest::Approx(1.0));
}

TEST_CASE("ego command clamped to +-3") {
  Simulation s(sim::build_network(), quiet_scenario());
  s.insert_ego();
  s.step(50.0, false);
  CHECK(s.ego()->last_accel == doctest::Approx(3.0));
}

TEST_CASE("speed never goes negative") {
  Simulation s(sim::build_network(), quiet_scenario());
  s.insert_ego();
  for (int i = 0; i < 60; ++i) {
    s.step(-3.0, false);
    CHECK(s.ego()->speed >= 0.0);
  }
  CHECK(s.ego()->speed == doctest::Approx(0.0));
}

TEST_CASE("lane change manoeuvre merges at the boundary crossing") {
  Simulation s(sim::build_network(), quiet_scenario());
  s.insert_ego();
  while (s.ego()->x < s.network().parallel_start_x() + 5.0) s.step(3.0, false);
  const int ego_id = s.episode_ego_id();

  auto events = s.step(0.0, true);  // accept the lane change
  CHECK(s.lane_change_active());
  CHECK(s.lane_change_used());

  bool merged = false;
  double y_before_cross = 0.0;
  for (int i = 0; i < Simulation::kLaneChangeSteps && !merged; ++i) {
    const Vehicle* v = s.find_vehicle(ego_id);
    if (v->lane == sim::kRampLane) y_before_cross = v->y_offset;
    events = s.step(0.0, false);
    for (const auto& ev : events) {
      if (ev.kind == EventKind::kEgoMerged) merged = true;
    }
  }
  CHECK(merged);
  CHECK(s.ego_merged());
  CHECK(!s.has_ego());
  const Vehicle* v = s.find_vehicle(ego_id);
  REQUIRE(v != nullptr);
  CHECK(v->lane == sim::kRightLane);
  CHECK(!v->is_ego);
  // centre crossed: lateral offset was approaching half a lane width
  CHECK(y_before_cross > 0.4 * s.network().lane_width);
  // the manoeuvre finishes centred in the target lane
  for (int i = 0; i < Simulation::kLaneChangeSteps; ++i) s.step_humans();
  CHECK(s.find_vehicle(ego_id)->y_offset == doctest::Approx(0.0));
}

TEST_CASE("running off the merging lane end is a crash") {
  Simulation s(sim::build_network(), quiet_scenario());
  s.insert_ego();
  bool crashed = false;
  for (int i = 0; i < 3000 && !crashed; ++i) {
    const auto events = s.step(3.0, false);  // full throttle, never merge
    for (const auto& ev : events) {
      if (ev.kind == EventKind::kCollision) crashed = true;
    }
  }
  CHECK(crashed);
}

TEST_CASE("timeout fires after 150 s unmerged") {
  Simulation s(sim::build_network(), quiet_scenario());
  s.insert_ego();
  // brake to a stop on the taper and wait
  bool timed_out = false;
  long steps = 0;
  while (!timed_out && steps < 2000) {
    const auto events = s.step(-3.0, false);
    ++steps;
    for (const auto& ev : events) {
      if (ev.kind == EventKind::kEgoTimeout) timed_out = true;
    }
  }
  CHECK(timed_out);
  CHECK(steps == Simulation::kTimeoutSteps);
}

TEST_CASE("determinism: same seed and actions give identical trajectories") {
  auto run = [](std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    Simulation s(sim::build_network(), cfg);
    util::Rng actions(42);
    for (int i = 0; i < 600; ++i) s.step_humans();
    s.insert_ego();
    std::vector<double> trace;
    for (int i = 0; i < 400; ++i) {
      if (!s.has_ego()) break;
      const double a = actions.uniform(-3.0, 3.0);
      const bool lc = actions.bernoulli(0.02);
      s.step(a, lc);
      for (const auto& v : s.vehicles()) {
        trace.push_back(v.x);
        trace.push_back(v.speed);
        trace.push_back(static_cast<double>(v.lane));
      }
    }
    trace.push_back(static_cast<double>(s.event_log().size()));
    return trace;
  };
  const auto a = run(2024);
  const auto b = run(2024);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i] == b[i]);  // bit-identical
  }
  const auto c = run(2025);
  CHECK(a != c);
}

TEST_CASE("human-only traffic is collision free (short horizon)") {
  ScenarioConfig cfg;
  cfg.inflow_right = 1013.0 / 3600.0;
  cfg.inflow_left = 225.0 / 3600.0;
  cfg.seed = 99;
  Simulation s(sim::build_network(), cfg);
  s.set_event_logging(false);
  long collisions = 0;
  for (long i = 0; i < 36000; ++i) {  // one simulated hour
    const auto events = s.step_humans();
    for (const auto& ev : events) {
      if (ev.kind == EventKind::kCollision) ++collisions;
    }
    for (const auto& v : s.vehicles()) REQUIRE(v.speed >= 0.0);
  }
  CHECK(collisions == 0);
  CHECK(s.spawn_stats().right_inserted > 0);
}

TEST_CASE("single ego invariant") {
  ScenarioConfig cfg = quiet_scenario(11);
  cfg.auto_spawn_ego = true;
  cfg.inflow_right = 0.3;
  cfg.inflow_left = 0.1;
  Simulation s(sim::build_network(), cfg);
  util::Rng actions(7);
  for (long i = 0; i < 8000; ++i) {
    if (s.has_ego()) {
      s.step(actions.uniform(-3.0, 3.0), actions.bernoulli(0.05));
    } else {
      s.step_humans();
    }
    int egos = 0;
    for (const auto& v : s.vehicles()) {
      if (v.is_ego) ++egos;
    }
    CHECK(egos <= 1);
  }
}
