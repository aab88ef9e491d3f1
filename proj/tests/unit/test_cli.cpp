#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tru/cli.hpp"
#include "tru/error.hpp"

using namespace tru;
namespace fs = std::filesystem;

namespace {

struct Cli {
  int code = 0;
  std::string out;
  std::string err;
};

Cli invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "trupomdp");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Cli r;
  r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("trupomdp_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const std::vector<std::string> kFast{"--max-trials", "200"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("run with the mock generator") {
  const auto dir = scratch("run");
  const auto r = invoke(with({"run", "--generate", "easy", "--seed", "3", "--dump-belief", "--out", dir.string()}, kFast));
  CHECK(r.code == exit_code::kSuccess);
  const auto metrics = nlohmann::json::parse(slurp(dir / "metrics.json"));
  CHECK(metrics["success"] == true);
  const std::string hash = metrics["config_hash"];
  CHECK(hash.size() == 16);
  CHECK(nlohmann::json::parse(slurp(dir / "config.json"))["config_hash"] == hash);
  std::istringstream steps(slurp(dir / "steps.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(steps, line)) {
    CHECK(nlohmann::json::parse(line)["config_hash"] == hash);
    ++lines;
  }
  CHECK(lines == metrics["steps"].get<int>());
  const auto dump = dir / "belief_step0.txt";
  REQUIRE(fs::exists(dump));
  CHECK(slurp(dump).find("# config_hash " + hash) == 0);
  const auto summary = cmd_inspect(dump);
  CHECK(summary.find("total weight") != std::string::npos);
  CHECK(cmd_inspect(dir / "metrics.json").find("step") != std::string::npos);
}

TEST_CASE("metrics are reproducible apart from timing") {
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  const std::vector<std::string> args{"run", "--kitchen", "galley", "--generate", "medium", "--seed", "11"};
  CHECK(invoke(with(with(args, kFast), {"--out", a.string()})).code == 0);
  CHECK(invoke(with(with(args, kFast), {"--out", b.string()})).code == 0);
  auto strip = [](nlohmann::json j) {
    j.erase("planning_time");
    j["generator_usage"].erase("wall_time");
    for (auto& s : j["log"]) {
      s.erase("decision_time");
      s["plan"].erase("wall_time");
    }
    return j.dump();
  };
  CHECK(strip(nlohmann::json::parse(slurp(a / "metrics.json"))) ==
        strip(nlohmann::json::parse(slurp(b / "metrics.json"))));
  CHECK(slurp(a / "config.json") == slurp(b / "config.json"));
}

TEST_CASE("configuration errors exit with code 2") {
  ::unsetenv("TRU_TEST_MISSING_KEY");
  const auto dir = scratch("llm");
  CHECK(invoke({"run", "--generator", "llm", "--api-key-env", "TRU_TEST_MISSING_KEY", "--out", dir.string()}).code ==
        exit_code::kConfigError);
  CHECK(invoke({"run", "--generate", "extreme"}).code == exit_code::kConfigError);
  CHECK(invoke({"run", "--kitchen", "garage", "--generate", "easy"}).code == exit_code::kConfigError);
  CHECK(invoke({"run", "--epsilon", "1.5", "--generate", "easy"}).code == exit_code::kConfigError);
  CHECK(invoke({"run", "--reward-preset", "generous", "--generate", "easy"}).code == exit_code::kConfigError);
  CHECK(invoke({"run", "--no-such-flag"}).code == exit_code::kConfigError);
}

TEST_CASE("experiment reward preset") {
  const auto dir = scratch("exp");
  const auto r = invoke(with({"run", "--generate", "easy", "--seed", "5", "--reward-preset", "experiment", "--out",
                              dir.string()},
                             kFast));
  CHECK(r.code == 0);
  const auto metrics = nlohmann::json::parse(slurp(dir / "metrics.json"));
  // One completion bonus and only costs otherwise.
  CHECK(metrics["cumulative_reward"].get<double>() <= 1000.0);
  CHECK(metrics["cumulative_reward"].get<double>() > 500.0);
}

TEST_CASE("bench aggregates per difficulty") {
  const auto dir = scratch("bench");
  const auto r = invoke(with({"bench", "-n", "2", "--difficulties", "easy", "medium", "--out", dir.string()}, kFast));
  CHECK(r.code == 0);
  std::istringstream episodes(slurp(dir / "episodes.jsonl"));
  std::string line;
  int count = 0;
  while (std::getline(episodes, line)) ++count;
  CHECK(count == 4);
  std::istringstream agg(slurp(dir / "aggregate.csv"));
  std::getline(agg, line);
  CHECK(line.find("success_rate") != std::string::npos);
  CHECK(line.find("prompt_tokens_mean") != std::string::npos);
  int rows = 0;
  while (std::getline(agg, line)) {
    ++rows;
    CHECK(line.find(",2,") != std::string::npos);
    // Mock generators use no tokens.
    CHECK(line.find(",0,0,") != std::string::npos);
  }
  CHECK(rows == 2);
  CHECK(fs::exists(dir / "plot_data.csv"));
}

TEST_CASE("generate and inspect a task") {
  const auto dir = scratch("gen");
  fs::create_directories(dir);
  const auto file = dir / "task.json";
  CHECK(invoke({"generate", "--kitchen", "l_shaped", "--difficulty", "hard", "--seed", "2", "--out", file.string()}).code ==
        0);
  const auto text = cmd_inspect(file);
  CHECK(text.find("[achievable]") != std::string::npos);
  CHECK(text.find("NOT achievable") == std::string::npos);
  const auto stdout_run = invoke({"generate", "--kitchen", "l_shaped", "--difficulty", "hard", "--seed", "2"});
  CHECK(nlohmann::json::parse(stdout_run.out) == nlohmann::json::parse(slurp(file)));

  const auto junk = dir / "junk.txt";
  std::ofstream(junk) << "hello\n";
  try {
    cmd_inspect(junk);
    FAIL("expected unknown-artifact");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownArtifact);
  }
  CHECK(invoke({"inspect", junk.string()}).code == exit_code::kConfigError);
}
