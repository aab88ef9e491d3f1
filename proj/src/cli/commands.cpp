#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include "tru/cli.hpp"
#include "tru/error.hpp"

namespace tru {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kConfigError, "cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUnknownArtifact, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ojson metrics_doc(const EpisodeMetrics& m, const std::string& hash) {
  ojson doc = ojson::parse(metrics_to_json(m));
  doc["config_hash"] = hash;
  return doc;
}

std::string toh_header(const HypothesisTree& tree) {
  std::ostringstream out;
  out << "# toh c1=" << tree.goals.size() << " c2=";
  for (auto it = tree.locations.begin(); it != tree.locations.end(); ++it) {
    out << (it == tree.locations.begin() ? "" : ",") << it->first << ':' << it->second.size();
  }
  if (tree.locations.empty()) out << '-';
  out << " c3=" << tree.particle_count << '\n';
  return out.str();
}

struct Stat {
  double mean = 0.0;
  double se = 0.0;
};

Stat summarize(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double var = 0.0;
    for (double x : xs) var += (x - s.mean) * (x - s.mean);
    var /= static_cast<double>(xs.size() - 1);
    s.se = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return s;
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

}  // namespace

int cmd_run(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const fs::path out_dir = cfg.out_dir;
  fs::create_directories(out_dir);
  const auto hash = config_hash(cfg);
  ojson config = ojson::parse(config_json(cfg));
  config["config_hash"] = hash;
  write_file(out_dir / "config.json", config.dump(2) + "\n");

  const TaskSpec task = resolve_task(cfg);
  auto gen = make_generator(cfg, task);
  AgentConfig agent = agent_config(cfg);
  if (cfg.dump_belief) {
    agent.observer = [&](int step, const ParticleBelief& b, const HypothesisTree* tree) {
      std::string text = "# config_hash " + hash + "\n";
      if (tree) text += toh_header(*tree);
      text += dump(b);
      write_file(out_dir / ("belief_step" + std::to_string(step) + ".txt"), text);
    };
  }
  const auto m = run_episode(task, agent, episode_limits(cfg, task), reward_preset(cfg.reward_preset), *gen);
  const ojson doc = metrics_doc(m, hash);
  write_file(out_dir / "metrics.json", doc.dump(2) + "\n");
  std::ostringstream steps;
  for (const auto& entry : doc["log"]) {
    ojson line = entry;
    line["config_hash"] = hash;
    steps << line.dump() << '\n';
  }
  write_file(out_dir / "steps.jsonl", steps.str());
  log << (m.success ? "success" : "failure") << " steps=" << m.steps << " reward=" << fmt(m.cumulative_reward)
      << " planning_time=" << fmt(m.planning_time) << "s";
  if (!m.success) log << " (" << m.failure_reason << ")";
  log << " config_hash=" << hash << '\n';
  return m.success ? exit_code::kSuccess : exit_code::kTaskFailure;
}

int cmd_bench(const RunConfig& cfg, int n, const std::vector<Difficulty>& difficulties, std::ostream& log) {
  if (n < 1) throw Error(ErrorCode::kConfigError, "bench needs at least one task per difficulty");
  if (difficulties.empty()) throw Error(ErrorCode::kConfigError, "bench needs at least one difficulty");
  RunConfig base = cfg;
  base.task_file.reset();
  base.generate = difficulties.front();
  validate(base);
  const fs::path out_dir = cfg.out_dir;
  fs::create_directories(out_dir);
  const auto hash = config_hash(base);

  std::ofstream episodes(out_dir / "episodes.jsonl");
  std::ostringstream aggregate;
  aggregate << "config_hash,difficulty,episodes,success_rate,reward_mean,reward_se,steps_mean,steps_se,"
               "planning_time_mean,planning_time_se,prompt_tokens_mean,completion_tokens_mean,queries_mean\n";
  std::ostringstream plot;
  plot << "config_hash,difficulty,reward_mean,reward_se,success_pct,success_se_pct,steps_mean,steps_se,step_limit\n";

  bool all_ok = true;
  for (const auto d : difficulties) {
    std::vector<double> reward, success, steps, time, prompt, completion, queries;
    int limit = 0;
    for (int i = 0; i < n; ++i) {
      RunConfig one = base;
      one.generate = d;
      one.seed = cfg.seed + static_cast<std::uint64_t>(i);
      EpisodeRun run;
      try {
        run = run_once(one);
      } catch (const Error& e) {
        log << to_string(d) << " #" << i << " crashed: " << e.what() << '\n';
        all_ok = false;
        continue;
      }
      const auto& m = run.metrics;
      limit = episode_limits(one, run.task).step_limit;
      ojson record = metrics_doc(m, hash);
      record["difficulty"] = to_string(d);
      record["task_seed"] = one.seed;
      record["episode"] = i;
      episodes << record.dump() << '\n';
      reward.push_back(m.cumulative_reward);
      success.push_back(m.success ? 1.0 : 0.0);
      steps.push_back(m.steps);
      time.push_back(m.planning_time);
      prompt.push_back(static_cast<double>(m.generator_usage.prompt_tokens));
      completion.push_back(static_cast<double>(m.generator_usage.completion_tokens));
      queries.push_back(static_cast<double>(m.generator_usage.query_count));
      all_ok = all_ok && m.success;
      log << to_string(d) << " #" << i << (m.success ? " success" : " failure") << " steps=" << m.steps << '\n';
    }
    const auto r = summarize(reward), s = summarize(success), st = summarize(steps), tm = summarize(time);
    aggregate << hash << ',' << to_string(d) << ',' << reward.size() << ',' << fmt(s.mean) << ',' << fmt(r.mean)
              << ',' << fmt(r.se) << ',' << fmt(st.mean) << ',' << fmt(st.se) << ',' << fmt(tm.mean) << ','
              << fmt(tm.se) << ',' << fmt(summarize(prompt).mean) << ',' << fmt(summarize(completion).mean) << ','
              << fmt(summarize(queries).mean) << '\n';
    plot << hash << ',' << to_string(d) << ',' << fmt(r.mean) << ',' << fmt(r.se) << ',' << fmt(100.0 * s.mean)
         << ',' << fmt(100.0 * s.se) << ',' << fmt(st.mean) << ',' << fmt(st.se) << ',' << limit << '\n';
  }
  write_file(out_dir / "aggregate.csv", aggregate.str());
  write_file(out_dir / "plot_data.csv", plot.str());
  log << "wrote " << (out_dir / "aggregate.csv").string() << " config_hash=" << hash << '\n';
  return all_ok ? exit_code::kSuccess : exit_code::kTaskFailure;
}

int cmd_generate(const std::string& kitchen, Difficulty difficulty, std::uint64_t seed, const std::string& out,
                 std::ostream& log) {
  const auto task = generate_task(kitchen, difficulty, seed);
  const auto text = serialize_task(task) + "\n";
  if (out.empty()) {
    log << text;
  } else {
    write_file(out, text);
  }
  return exit_code::kSuccess;
}

std::string cmd_inspect(const fs::path& artifact) {
  const auto text = read_file(artifact);
  std::ostringstream out;
  if (text.find("# belief particles=") != std::string::npos) {
    struct Row {
      double weight;
      std::string goal;
      std::string held;
    };
    std::vector<Row> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("# toh ", 0) == 0) out << "tree of hypotheses: " << line.substr(6) << '\n';
      if (line.rfind("particle ", 0) == 0) {
        rows.push_back(Row{std::stod(line.substr(line.find("weight=") + 7)), "", ""});
      } else if (!rows.empty() && line.rfind("  goal: ", 0) == 0) {
        rows.back().goal = line.substr(8);
      } else if (!rows.empty() && line.rfind("  held: ", 0) == 0) {
        rows.back().held = line.substr(8);
      }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.weight > b.weight; });
    double total = 0.0;
    out << "particles: " << rows.size() << '\n';
    out << "  weight          held         goal\n";
    for (const auto& r : rows) {
      char w[32];
      std::snprintf(w, sizeof(w), "%.10f", r.weight);
      out << "  " << w << "  " << std::left << std::setw(12) << r.held << ' ' << r.goal << '\n';
      total += r.weight;
    }
    char w[32];
    std::snprintf(w, sizeof(w), "%.10f", total);
    out << "total weight: " << w << '\n';
    return out.str();
  }

  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::exception&) {
    throw Error(ErrorCode::kUnknownArtifact, "unrecognized artifact " + artifact.string());
  }
  if (doc.is_object() && doc.contains("placement") && doc.contains("task")) {
    const auto task = load_task(text);
    const auto kitchen = load_kitchen(task.kitchen);
    out << "task in kitchen " << task.kitchen;
    if (task.difficulty) out << " (" << to_string(*task.difficulty) << ")";
    out << "\ninstruction: " << task.instruction << '\n';
    out << "objects: " << task.placements.size() << ", robot at " << task.robot_location << '\n';
    out << "goal set: " << task.goal_set.size() << " goals\n";
    for (std::size_t i = 0; i < task.goal_set.size(); ++i) {
      const bool ok = goal_achievable(task, kitchen, task.goal_set[i]);
      out << "  " << i + 1 << ". " << to_string(task.goal_set[i]) << (ok ? "  [achievable]" : "  [NOT achievable]")
          << '\n';
    }
    return out.str();
  }
  if (doc.is_object() && doc.contains("log") && doc["log"].is_array()) {
    out << "episode: " << (doc.value("success", false) ? "success" : "failure") << ", steps "
        << doc.value("steps", 0) << ", reward " << fmt(doc.value("cumulative_reward", 0.0)) << '\n';
    if (doc.contains("config_hash")) out << "config hash: " << doc["config_hash"].get<std::string>() << '\n';
    out << "step  action                                    expansions  root_lower  root_upper\n";
    for (const auto& s : doc["log"]) {
      const auto& plan = s["plan"];
      out << std::left << std::setw(6) << s.value("step", 0) << std::setw(42) << s.value("action", std::string{})
          << std::right << std::setw(10) << plan.value("expansions", 0) << std::setw(12)
          << fmt(plan.value("root_lower", 0.0)) << std::setw(12) << fmt(plan.value("root_upper", 0.0)) << std::left
          << '\n';
    }
    return out.str();
  }
  throw Error(ErrorCode::kUnknownArtifact, "unrecognized artifact " + artifact.string());
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Task planner for object rearrangement under open-ended uncertainty"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string generate;
  std::string api_key_env = cfg.llm.api_key_env;

  auto add_run_options = [&](CLI::App* cmd, bool with_task) {
    cmd->add_option("--kitchen", cfg.kitchen, "Kitchen layout id")->capture_default_str();
    if (with_task) {
      cmd->add_option("--task", cfg.task_file, "Task JSON file");
      cmd->add_option("--generate", generate, "Generate a task of this difficulty (easy|medium|hard)");
    }
    cmd->add_option("--generator", cfg.generator, "Hypothesis generator (mock|llm)")->capture_default_str();
    cmd->add_option("--reward-preset", cfg.reward_preset, "Evaluation rewards (model-default|experiment)")
        ->capture_default_str();
    cmd->add_option("--planner-reward-preset", cfg.planner_reward_preset, "Rewards the planner optimizes")
        ->capture_default_str();
    cmd->add_option("--scenarios", cfg.planner.num_scenarios, "Scenarios per search")->capture_default_str();
    cmd->add_option("--max-depth", cfg.planner.max_depth, "Search depth")->capture_default_str();
    cmd->add_option("--rollout-depth", cfg.planner.rollout_depth, "Rollout depth")->capture_default_str();
    cmd->add_option("--discount", cfg.planner.discount, "Discount factor")->capture_default_str();
    cmd->add_option("--plan-time", cfg.planner.time_budget, "Wall-clock budget per plan call, seconds")
        ->capture_default_str();
    cmd->add_option("--max-trials", cfg.planner.max_trials, "Trial cap per plan call (0 = none)")->capture_default_str();
    cmd->add_option("--threads", cfg.planner.threads, "Planner worker threads")->capture_default_str();
    cmd->add_option("--epsilon", cfg.belief.epsilon, "Supplementation threshold")->capture_default_str();
    cmd->add_option("--c1", cfg.c1, "Goal candidates")->capture_default_str();
    cmd->add_option("--c2", cfg.c2, "Location candidates per object")->capture_default_str();
    cmd->add_flag("--collapse-belief", cfg.collapse_belief, "Plan on the heaviest particle only");
    cmd->add_option("--seed", cfg.seed, "Seed")->capture_default_str();
    cmd->add_option("--step-limit", cfg.step_limit, "Step limit (default by difficulty)");
    cmd->add_option("--time-limit", cfg.time_limit, "Total planning time limit, seconds")->capture_default_str();
    cmd->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--true-goal-weight", cfg.mock.true_goal_weight, "Mock: weight of the intended goal")
        ->capture_default_str();
    cmd->add_option("--true-location-weight", cfg.mock.true_location_weight, "Mock: weight of true locations")
        ->capture_default_str();
    cmd->add_option("--llm-endpoint", cfg.llm.endpoint, "Chat-completions URL")->capture_default_str();
    cmd->add_option("--llm-model", cfg.llm.model, "Model name")->capture_default_str();
    cmd->add_option("--api-key-env", api_key_env, "Environment variable holding the API key")->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "Run one episode");
  add_run_options(run, true);
  run->add_flag("--dump-belief", cfg.dump_belief, "Write the belief seen at each step");

  auto* bench = app.add_subcommand("bench", "Run seeded tasks per difficulty and aggregate");
  add_run_options(bench, false);
  int n = 5;
  std::vector<std::string> levels{"easy", "medium", "hard"};
  bench->add_option("-n,--tasks", n, "Tasks per difficulty")->capture_default_str();
  bench->add_option("--difficulties", levels, "Difficulties to run")->capture_default_str();

  auto* gen = app.add_subcommand("generate", "Generate a task file");
  std::string gen_kitchen = "one_wall", gen_difficulty = "easy", gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kitchen", gen_kitchen, "Kitchen layout id")->capture_default_str();
  gen->add_option("--difficulty", gen_difficulty, "easy|medium|hard")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output file (stdout when omitted)");

  auto* inspect = app.add_subcommand("inspect", "Summarize a belief dump, task file or metrics file");
  std::string artifact;
  inspect->add_option("artifact", artifact, "Path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_code::kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return exit_code::kConfigError;
  }

  try {
    cfg.llm.api_key_env = api_key_env;
    if (*run) {
      if (!generate.empty()) cfg.generate = parse_difficulty(generate);
      return cmd_run(cfg, out);
    }
    if (*bench) {
      std::vector<Difficulty> ds;
      for (const auto& l : levels) ds.push_back(parse_difficulty(l));
      return cmd_bench(cfg, n, ds, out);
    }
    if (*gen) return cmd_generate(gen_kitchen, parse_difficulty(gen_difficulty), gen_seed, gen_out, out);
    if (*inspect) {
      out << cmd_inspect(artifact);
      return exit_code::kSuccess;
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code::kConfigError;
  }
  return exit_code::kConfigError;
}

}  // namespace tru
