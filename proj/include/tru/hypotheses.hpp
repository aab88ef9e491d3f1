#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tru/belief.hpp"

namespace tru {

struct GoalCandidate {
  PlacementGoal goal;
  double confidence = 0.0;
};

struct LocationCandidate {
  std::string area;
  double confidence = 0.0;
};

struct QueryContext {
  std::string instruction;
  Observation observation;
  std::vector<PlacementGoal> failed_goals;
  std::vector<std::string> satisfied_objects;
  std::string history;  // optional action/observation log
};

struct GeneratorUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t query_count = 0;
  double wall_time = 0.0;

  GeneratorUsage& operator+=(const GeneratorUsage& other);
};

GeneratorUsage operator-(const GeneratorUsage& a, const GeneratorUsage& b);

/// Source of raw hypotheses. Implementations must tolerate concurrent
/// propose_locations calls. Output is validated by query_goals and
/// query_location, so generators may return anything.
class HypothesisGenerator {
 public:
  virtual ~HypothesisGenerator() = default;
  virtual std::vector<GoalCandidate> propose_goals(const QueryContext& ctx, int c1) = 0;
  virtual std::vector<LocationCandidate> propose_locations(const QueryContext& ctx, const std::string& object,
                                                           int c2) = 0;
  virtual GeneratorUsage usage() const = 0;
};

/// Observation text fed to the generator.
std::string textualize(const Observation& z, const std::vector<PlacementGoal>& failed_goals,
                       const std::vector<std::string>& satisfied_objects);
std::string textualize(const QueryContext& ctx);

/// Validated goal candidates, at most c1. Invalid candidates are dropped and
/// described in `warnings` when given. Throws Error(kEmptyResult) when none
/// survive, Error(kGeneratorFailure) when the generator fails.
std::vector<GoalCandidate> query_goals(HypothesisGenerator& gen, const QueryContext& ctx, int c1,
                                       std::vector<std::string>* warnings = nullptr);

/// Candidate areas for `object`, confidences summing to 1. A visible object
/// gets its observed area with confidence 1 without asking the generator.
std::vector<LocationCandidate> query_location(HypothesisGenerator& gen, const QueryContext& ctx,
                                              const std::string& object, int c2,
                                              std::vector<std::string>* warnings = nullptr);

struct HypothesisTree {
  std::vector<GoalCandidate> goals;
  std::map<std::string, std::vector<LocationCandidate>> locations;  // hidden objects only
  std::size_t particle_count = 0;                                   // C3
};

struct LlmBelief {
  ParticleBelief belief;  // normalized, or empty when every branch was pruned
  HypothesisTree tree;
  std::vector<std::string> warnings;
};

/// Builds the tree of hypotheses for ctx and flattens it into particles.
LlmBelief build_llm_belief(const QueryContext& ctx, HypothesisGenerator& gen, int c1, int c2);

/// Known answers used by MockGenerator: the task's goal set and where every
/// real object actually is.
struct MockTruth {
  std::vector<PlacementGoal> goal_set;
  std::map<std::string, std::string> locations;
};

struct MockProfile {
  double true_goal_weight = 0.5;
  double true_location_weight = 0.5;
  bool include_true_goal = true;
  bool include_true_location = true;
  /// Probability that a decoy substitutes an invented object rather than a
  /// real distractor.
  double phantom_probability = 0.25;
};

/// Deterministic stand-in for an LLM. The intended goal is one member of the
/// goal set picked by seed; decoy goals swap one of its objects for another.
class MockGenerator final : public HypothesisGenerator {
 public:
  MockGenerator(MockTruth truth, std::uint64_t seed, MockProfile profile = {});

  std::vector<GoalCandidate> propose_goals(const QueryContext& ctx, int c1) override;
  std::vector<LocationCandidate> propose_locations(const QueryContext& ctx, const std::string& object,
                                                   int c2) override;
  GeneratorUsage usage() const override;

 private:
  MockTruth truth_;
  std::uint64_t seed_;
  MockProfile profile_;
  std::atomic<std::int64_t> queries_{0};
};

struct LlmConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4.1";
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.1;
  double timeout_seconds = 120.0;
  int max_retries = 3;
  int max_concurrent = 4;
  std::string prompt_dir;  // defaults to <data dir>/prompts
};

/// Throws Error(kConfigError) when the key variable is unset or empty.
void validate(const LlmConfig& cfg);

/// Chat-completion client driven by the goal and location system prompts.
class LlmGenerator final : public HypothesisGenerator {
 public:
  explicit LlmGenerator(LlmConfig cfg);
  ~LlmGenerator() override;

  std::vector<GoalCandidate> propose_goals(const QueryContext& ctx, int c1) override;
  std::vector<LocationCandidate> propose_locations(const QueryContext& ctx, const std::string& object,
                                                   int c2) override;
  GeneratorUsage usage() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Extracts the last ```json fenced block, or the whole text when there is
/// none, and parses it. Throws Error(kSchemaError) on malformed JSON.
std::vector<GoalCandidate> parse_goal_answer(const std::string& reply);
std::vector<LocationCandidate> parse_location_answer(const std::string& reply);

}  // namespace tru
