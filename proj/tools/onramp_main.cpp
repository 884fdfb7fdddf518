// Command-line entry points: train, eval, sweep, replay.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "onramp/env/merge_env.hpp"
#include "onramp/eval/runner.hpp"
#include "onramp/rl/checkpoint.hpp"
#include "onramp/rl/dqn.hpp"
#include "onramp/rl/ppo.hpp"
#include "onramp/sim/trajectory.hpp"
#include "onramp/util/config.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace onramp;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

struct CommonOptions {
  std::string config_file;
  double svo_phi = std::numbers::pi / 4.0;
  std::string density;  // empty = training inflows
  double inflow_right = -1.0;
  double inflow_left = -1.0;
  double uncoop = -1.0;
  std::uint64_t seed = 1;
  std::string out_dir = "runs/out";
  int threads = 1;
};

// Precedence: command-line flags > config file > defaults.
void apply_config_file(CommonOptions& opt, const CLI::App& cmd) {
  if (opt.config_file.empty()) return;
  const auto cfg = util::KeyValueConfig::from_file(opt.config_file);
  if (cmd.count("--svo") == 0) opt.svo_phi = cfg.get_double("svo_phi", opt.svo_phi);
  if (cmd.count("--inflow-right") == 0)
    opt.inflow_right = cfg.get_double("inflow_right", opt.inflow_right);
  if (cmd.count("--inflow-left") == 0)
    opt.inflow_left = cfg.get_double("inflow_left", opt.inflow_left);
  if (cmd.count("--uncoop") == 0)
    opt.uncoop = cfg.get_double("uncooperative_fraction", opt.uncoop);
  if (cmd.count("--seed") == 0) opt.seed = cfg.get_uint("seed", opt.seed);
}

eval::DensityConfig resolve_density(const CommonOptions& opt) {
  eval::DensityConfig density =
      opt.density.empty() ? eval::training_density() : eval::density_preset(opt.density);
  if (opt.inflow_right >= 0.0) density.right_inflow = opt.inflow_right * 3600.0;
  if (opt.inflow_left >= 0.0) density.left_inflow = opt.inflow_left * 3600.0;
  return density;
}

json common_manifest(const std::string& command, const CommonOptions& opt,
                     const eval::DensityConfig& density, double uncoop) {
  json m;
  m["command"] = command;
  m["svo_phi"] = opt.svo_phi;
  m["density"] = density.name;
  m["inflow_right_per_s"] = density.right_probability();
  m["inflow_left_per_s"] = density.left_probability();
  m["uncooperative_fraction"] = uncoop;
  m["seed"] = opt.seed;
  m["threads"] = opt.threads;
  m["checkpoint_format_version"] = rl::kCheckpointFormatVersion;
  m["out_dir"] = opt.out_dir;
  return m;
}

void write_manifest(const json& manifest, const std::string& out_dir) {
  std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + out_dir);
  out << manifest.dump(2) << "\n";
}

double json_safe(double v) { return v; }  // nlohmann maps non-finite to null

// Greedy evaluation used during training: mean episode reward under the
// training reward and the collision percentage, over a fixed episode count.
rl::EvalResult greedy_training_eval(const rl::PolicyNetwork& net, double phi,
                                    const eval::DensityConfig& density,
                                    double uncoop, int episodes,
                                    std::uint64_t seed0) {
  env::MergeEnvConfig cfg;
  cfg.scenario.inflow_right = density.right_probability();
  cfg.scenario.inflow_left = density.left_probability();
  cfg.scenario.uncooperative_fraction = uncoop;
  cfg.reward.phi = phi;
  env::MergeEnv env(cfg);
  std::vector<double> obs(env.observation_size());

  double reward_sum = 0.0;
  int collisions = 0;
  for (int i = 0; i < episodes; ++i) {
    env.reset(util::split_seed(seed0, static_cast<std::uint64_t>(i)), obs);
    double episode_reward = 0.0;
    for (int t = 0; t < 2000; ++t) {
      const auto r = env.step(rl::greedy_action(net, obs), obs);
      episode_reward += r.reward;
      if (r.done) break;
    }
    reward_sum += episode_reward;
    if (env.outcome() && env.outcome()->terminal == env::TerminalKind::kCrashed) {
      ++collisions;
    }
  }
  rl::EvalResult res;
  res.mean_episode_reward = reward_sum / episodes;
  res.collision_pct = 100.0 * collisions / episodes;
  return res;
}

int cmd_train(const CommonOptions& opt, long total_steps, int n_envs,
              const std::string& algo, bool resume) {
  const eval::DensityConfig density = resolve_density(opt);
  const double train_uncoop = opt.uncoop >= 0.0 ? opt.uncoop : 0.5;
  const double eval_uncoop = 0.25;

  fs::create_directories(opt.out_dir);
  json manifest = common_manifest("train", opt, density, train_uncoop);
  manifest["algo"] = algo;
  manifest["total_timesteps"] = total_steps;
  manifest["n_envs"] = n_envs;
  manifest["eval_uncooperative_fraction"] = eval_uncoop;
  manifest["eval_episodes"] = 50;
  manifest["seed_scheme"] =
      "split_seed domains: 1=env episodes, 2=action sampling, 3=shuffle, "
      "4=init, 5..8=dqn, 9=train-time eval";
  write_manifest(manifest, opt.out_dir);

  const std::string log_path = (fs::path(opt.out_dir) / "training_log.jsonl").string();
  std::ofstream log(log_path, resume ? std::ios::app : std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + log_path);
  const std::string curves_train = (fs::path(opt.out_dir) / "curves_train.csv").string();
  const std::string curves_eval = (fs::path(opt.out_dir) / "curves_eval.csv").string();
  std::ofstream ct(curves_train, resume ? std::ios::app : std::ios::trunc);
  std::ofstream ce(curves_eval, resume ? std::ios::app : std::ios::trunc);
  if (!resume) {
    ct << "timestep,mean_episode_reward\n";
    ce << "timestep,eval_mean_episode_reward,eval_collision_pct\n";
  }

  const fs::path latest = fs::path(opt.out_dir) / "ckpt_latest.txt";
  const std::uint64_t eval_seed_domain = util::split_seed(opt.seed, 9);
  long eval_round = 0;

  rl::TrainCallbacks callbacks;
  callbacks.on_update = [&](const rl::UpdateRecord& rec) {
    json j;
    j["type"] = "update";
    j["timestep"] = rec.timestep;
    j["update"] = rec.update_index;
    j["episodes"] = rec.episodes;
    j["mean_episode_reward"] = json_safe(rec.mean_episode_reward);
    j["actor_objective"] = rec.stats.actor_objective;
    j["value_mse"] = rec.stats.value_mse;
    j["entropy"] = rec.stats.entropy;
    j["approx_kl"] = rec.stats.approx_kl;
    j["clip_fraction"] = rec.stats.clip_fraction;
    log << j.dump() << "\n";
    log.flush();
    if (rec.episodes > 0) {
      char line[64];
      std::snprintf(line, sizeof(line), "%ld,%.17g\n", rec.timestep,
                    rec.mean_episode_reward);
      ct << line;
      ct.flush();
    }
  };
  callbacks.evaluate = [&](const rl::PolicyNetwork& net, long timestep) {
    (void)timestep;
    const auto res = greedy_training_eval(
        net, opt.svo_phi, density, eval_uncoop, 50,
        util::split_seed(eval_seed_domain, static_cast<std::uint64_t>(eval_round++)));
    return res;
  };
  callbacks.on_eval = [&](long timestep, const rl::EvalResult& res) {
    json j;
    j["type"] = "eval";
    j["timestep"] = timestep;
    j["eval_mean_episode_reward"] = json_safe(res.mean_episode_reward);
    j["eval_collision_pct"] = res.collision_pct;
    log << j.dump() << "\n";
    log.flush();
    char line[96];
    std::snprintf(line, sizeof(line), "%ld,%.17g,%.17g\n", timestep,
                  res.mean_episode_reward, res.collision_pct);
    ce << line;
    ce.flush();
    std::cout << "eval @ " << timestep
              << ": mean_episode_reward=" << res.mean_episode_reward
              << " collision_pct=" << res.collision_pct << std::endl;
  };

  if (algo == "dqn") {
    rl::DQNConfig cfg;
    cfg.total_timesteps = total_steps;
    cfg.seed = opt.seed;
    callbacks.on_checkpoint = [&](const rl::PolicyNetwork& net,
                                  const rl::AdamState& adam, long timestep) {
      rl::Checkpoint ckpt{"qnet", net, adam, timestep};
      const fs::path path =
          fs::path(opt.out_dir) / ("ckpt_" + std::to_string(timestep) + ".txt");
      rl::save_checkpoint(ckpt, path.string());
      rl::save_checkpoint(ckpt, latest.string());
    };
    env::MergeEnvConfig env_cfg;
    env_cfg.scenario.inflow_right = density.right_probability();
    env_cfg.scenario.inflow_left = density.left_probability();
    env_cfg.scenario.uncooperative_fraction = train_uncoop;
    env_cfg.reward.phi = opt.svo_phi;
    env::MergeEnv env(env_cfg);
    rl::DQNState state =
        make_dqn_state(cfg, env.observation_size(), env.action_count());
    if (resume && fs::exists(latest)) {
      const rl::Checkpoint ckpt = rl::load_checkpoint(latest.string());
      state.qnet = ckpt.net;
      state.target = ckpt.net;
      if (ckpt.adam) state.adam = *ckpt.adam;
      state.timestep = ckpt.timestep;
    }
    rl::dqn_train(state, env, cfg, callbacks);
    return 0;
  }

  rl::PPOConfig cfg;
  cfg.total_timesteps = total_steps;
  cfg.n_envs = n_envs;
  cfg.seed = opt.seed;
  cfg.n_threads = opt.threads;

  std::vector<std::unique_ptr<env::MergeEnv>> env_storage;
  std::vector<env::Env*> envs;
  for (int e = 0; e < n_envs; ++e) {
    env::MergeEnvConfig env_cfg;
    env_cfg.scenario.inflow_right = density.right_probability();
    env_cfg.scenario.inflow_left = density.left_probability();
    env_cfg.scenario.uncooperative_fraction = train_uncoop;
    env_cfg.reward.phi = opt.svo_phi;
    env_storage.push_back(std::make_unique<env::MergeEnv>(env_cfg));
    envs.push_back(env_storage.back().get());
  }

  rl::TrainState state = rl::make_train_state(cfg, env::kObservationSize, env::kActionCount);
  if (resume && fs::exists(latest)) {
    const rl::Checkpoint ckpt = rl::load_checkpoint(latest.string());
    if (ckpt.kind != "policy") {
      throw std::runtime_error("resume: checkpoint kind '" + ckpt.kind +
                               "' is not a policy checkpoint");
    }
    state.net = ckpt.net;
    if (ckpt.adam) state.adam = *ckpt.adam;
    state.timestep = ckpt.timestep;
    std::cout << "resuming from " << latest << " at timestep " << state.timestep
              << std::endl;
  }

  callbacks.on_checkpoint = [&](const rl::PolicyNetwork& net,
                                const rl::AdamState& adam, long timestep) {
    rl::Checkpoint ckpt{"policy", net, adam, timestep};
    const fs::path path =
        fs::path(opt.out_dir) / ("ckpt_" + std::to_string(timestep) + ".txt");
    rl::save_checkpoint(ckpt, path.string());
    rl::save_checkpoint(ckpt, latest.string());
  };

  rl::ppo_train(state, envs, cfg, callbacks);
  std::cout << "training finished at timestep " << state.timestep << std::endl;
  return 0;
}

int cmd_eval(const CommonOptions& opt, const std::string& checkpoint, int merges) {
  const eval::DensityConfig density = resolve_density(opt);
  const double uncoop = opt.uncoop >= 0.0 ? opt.uncoop : 0.25;

  const rl::Checkpoint ckpt = rl::load_checkpoint(checkpoint);
  eval::EvaluationOptions options;
  options.density = density;
  options.uncooperative_fraction = uncoop;
  options.svo_phi = opt.svo_phi;
  options.n_episodes = merges;
  options.seed0 = opt.seed;
  options.n_threads = opt.threads;

  const eval::EvaluationResult result = eval::run_evaluation(ckpt.net, options);

  fs::create_directories(opt.out_dir);
  json manifest = common_manifest("eval", opt, density, uncoop);
  manifest["checkpoint"] = checkpoint;
  manifest["merges"] = merges;
  write_manifest(manifest, opt.out_dir);
  eval::write_text_file((fs::path(opt.out_dir) / "merges.csv").string(),
                        eval::records_to_csv(result.records));
  eval::write_text_file((fs::path(opt.out_dir) / "summary.json").string(),
                        eval::summary_to_json(result.summary));
  std::cout << eval::summary_to_json(result.summary);
  return 0;
}

int cmd_sweep(const CommonOptions& opt, const std::vector<std::string>& checkpoints,
              const std::vector<double>& phis, int merges) {
  if (checkpoints.size() != phis.size()) {
    throw std::runtime_error("--checkpoints and --phis must have the same length");
  }
  const eval::DensityConfig density = resolve_density(opt);
  const double uncoop = opt.uncoop >= 0.0 ? opt.uncoop : 0.25;

  eval::EvaluationOptions options;
  options.density = density;
  options.uncooperative_fraction = uncoop;
  options.n_episodes = merges;
  options.seed0 = opt.seed;
  options.n_threads = opt.threads;

  std::vector<eval::SweepEntry> entries;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    entries.push_back({phis[i], checkpoints[i]});
  }
  std::vector<std::string> errors;
  const std::string csv = eval::svo_sweep(entries, options, &errors);
  for (const auto& e : errors) std::cerr << "onramp: warning: " << e << "\n";

  fs::create_directories(opt.out_dir);
  json manifest = common_manifest("sweep", opt, density, uncoop);
  manifest["checkpoints"] = checkpoints;
  manifest["phis"] = phis;
  manifest["merges"] = merges;
  write_manifest(manifest, opt.out_dir);
  eval::write_text_file((fs::path(opt.out_dir) / "sweep.csv").string(), csv);
  std::cout << csv;
  return errors.size() == entries.size() && !entries.empty() ? 1 : 0;
}

int cmd_replay(const CommonOptions& opt, const std::string& checkpoint) {
  const eval::DensityConfig density = resolve_density(opt);
  const double uncoop = opt.uncoop >= 0.0 ? opt.uncoop : 0.25;
  const rl::Checkpoint ckpt = rl::load_checkpoint(checkpoint);

  env::MergeEnvConfig cfg;
  cfg.scenario.inflow_right = density.right_probability();
  cfg.scenario.inflow_left = density.left_probability();
  cfg.scenario.uncooperative_fraction = uncoop;
  cfg.reward.phi = opt.svo_phi;
  env::MergeEnv env(cfg);

  std::vector<double> obs(env.observation_size());
  env.reset(opt.seed, obs);
  sim::TrajectoryRecorder recorder;
  recorder.record(env.simulation());
  for (int t = 0; t < 2000; ++t) {
    const auto r = env.step(rl::greedy_action(ckpt.net, obs), obs);
    recorder.record(env.simulation());
    if (r.done) break;
  }
  // run the manoeuvre and the traffic reaction out for the plot
  if (env.outcome() && env.outcome()->terminal == env::TerminalKind::kMerged) {
    env.coast(eval::kConflictWindowAfterMerge,
              [&](const sim::Simulation& s) { recorder.record(s); });
  }

  fs::create_directories(opt.out_dir);
  json manifest = common_manifest("replay", opt, density, uncoop);
  manifest["checkpoint"] = checkpoint;
  manifest["outcome"] =
      env.outcome() ? env::terminal_kind_name(env.outcome()->terminal) : "unfinished";
  write_manifest(manifest, opt.out_dir);
  recorder.write((fs::path(opt.out_dir) / "trajectory.csv").string());
  std::cout << "replay outcome: " << manifest["outcome"].get<std::string>()
            << ", trajectory written to " << opt.out_dir << "/trajectory.csv"
            << std::endl;
  return 0;
}

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_file, "key-value config file");
  cmd->add_option("--svo", opt.svo_phi, "social value orientation angle, rad")
      ->check(CLI::Range(0.0, kHalfPi));
  cmd->add_option("--density", opt.density, "traffic density preset")
      ->check(CLI::IsMember({"easy", "medium", "hard"}));
  cmd->add_option("--inflow-right", opt.inflow_right,
                  "right-lane arrival probability per second")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--inflow-left", opt.inflow_left,
                  "left-lane arrival probability per second")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--uncoop", opt.uncoop, "uncooperative fraction of right-lane traffic")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", opt.seed, "master seed");
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 256));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"social on-ramp merging lab"};
  app.require_subcommand(1);
  app.failure_message([](const CLI::App* a, const CLI::Error& e) {
    return std::string("onramp: error: ") + e.what() + "\n";
  });

  CommonOptions train_opt, eval_opt, sweep_opt, replay_opt;

  auto* train = app.add_subcommand("train", "train a merging policy");
  long steps = 15'000'000;
  int envs = 20;
  std::string algo = "ppo";
  bool resume = false;
  add_common(train, train_opt);
  train->add_option("--steps", steps, "total environment timesteps")
      ->check(CLI::PositiveNumber);
  train->add_option("--envs", envs, "parallel environments")->check(CLI::Range(1, 256));
  train->add_option("--algo", algo, "learning algorithm")
      ->check(CLI::IsMember({"ppo", "dqn"}));
  train->add_flag("--resume", resume, "continue from ckpt_latest.txt in --out");

  auto* evalc = app.add_subcommand("eval", "evaluate a checkpoint over complete merges");
  std::string eval_ckpt;
  int merges = 100;
  add_common(evalc, eval_opt);
  evalc->add_option("--checkpoint", eval_ckpt, "policy checkpoint")->required();
  evalc->add_option("--merges", merges, "number of evaluation episodes")
      ->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "evaluate checkpoints across SVO values");
  std::vector<std::string> sweep_ckpts;
  std::vector<double> sweep_phis;
  int sweep_merges = 100;
  add_common(sweep, sweep_opt);
  sweep->add_option("--checkpoints", sweep_ckpts, "one checkpoint per phi")->required();
  sweep->add_option("--phis", sweep_phis, "SVO angles, rad")->required();
  sweep->add_option("--merges", sweep_merges, "episodes per phi")
      ->check(CLI::PositiveNumber);

  auto* replay = app.add_subcommand("replay", "re-simulate one episode and dump the trajectory");
  std::string replay_ckpt;
  add_common(replay, replay_opt);
  replay->add_option("--checkpoint", replay_ckpt, "policy checkpoint")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      apply_config_file(train_opt, *train);
      return cmd_train(train_opt, steps, envs, algo, resume);
    }
    if (evalc->parsed()) {
      apply_config_file(eval_opt, *evalc);
      return cmd_eval(eval_opt, eval_ckpt, merges);
    }
    if (sweep->parsed()) {
      apply_config_file(sweep_opt, *sweep);
      return cmd_sweep(sweep_opt, sweep_ckpts, sweep_phis, sweep_merges);
    }
    if (replay->parsed()) {
      apply_config_file(replay_opt, *replay);
      return cmd_replay(replay_opt, replay_ckpt);
    }
  } catch (const std::exception& e) {
    std::cerr << "onramp: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
