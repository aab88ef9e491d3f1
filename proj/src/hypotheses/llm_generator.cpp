#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "tru/error.hpp"
#include "tru/hypotheses.hpp"
#include "tru/kitchen.hpp"

namespace tru {

using nlohmann::json;

namespace {

json extract_json(const std::string& reply) {
  static constexpr std::string_view kFence = "```json";
  std::string body = reply;
  if (const auto start = reply.rfind(kFence); start != std::string::npos) {
    const auto from = start + kFence.size();
    const auto end = reply.find("```", from);
    body = reply.substr(from, end == std::string::npos ? std::string::npos : end - from);
  }
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("answer is not valid JSON: ") + e.what());
  }
}

const json& answer_array(const json& doc) {
  if (!doc.is_object() || !doc.contains("answer") || !doc["answer"].is_array()) {
    throw Error(ErrorCode::kSchemaError, "expected an object with an \"answer\" array");
  }
  return doc["answer"];
}

template <typename T>
T field(const json& item, const char* key, const std::string& where) {
  if (!item.is_object() || !item.contains(key)) throw Error(ErrorCode::kSchemaError, where + ": missing \"" + key + "\"");
  try {
    return item.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kSchemaError, where + ": \"" + key + "\" has the wrong type");
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read prompt file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<GoalCandidate> parse_goal_answer(const std::string& reply) {
  const auto doc = extract_json(reply);
  std::vector<GoalCandidate> out;
  std::size_t i = 0;
  for (const auto& item : answer_array(doc)) {
    const std::string where = "answer[" + std::to_string(i++) + "]";
    const auto objects = field<json>(item, "objects", where);
    if (!objects.is_array()) throw Error(ErrorCode::kSchemaError, where + ".objects: expected an array");
    std::vector<GoalPair> pairs;
    for (const auto& o : objects) {
      pairs.push_back(GoalPair{field<std::string>(o, "object", where + ".objects"),
                               field<std::string>(o, "target_area", where + ".objects")});
    }
    out.push_back(GoalCandidate{PlacementGoal(std::move(pairs)), field<double>(item, "probability", where)});
  }
  return out;
}

std::vector<LocationCandidate> parse_location_answer(const std::string& reply) {
  const auto doc = extract_json(reply);
  std::vector<LocationCandidate> out;
  std::size_t i = 0;
  for (const auto& item : answer_array(doc)) {
    const std::string where = "answer[" + std::to_string(i++) + "]";
    out.push_back(LocationCandidate{field<std::string>(item, "initial_area", where),
                                    field<double>(item, "probability", where)});
  }
  return out;
}

void validate(const LlmConfig& cfg) {
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (!key || !*key) throw Error(ErrorCode::kConfigError, "environment variable " + cfg.api_key_env + " is not set");
  if (cfg.endpoint.rfind("http://", 0) != 0 && cfg.endpoint.rfind("https://", 0) != 0) {
    throw Error(ErrorCode::kConfigError, "endpoint must be an http(s) URL");
  }
  if (cfg.max_retries < 1 || cfg.max_concurrent < 1) throw Error(ErrorCode::kConfigError, "retries and concurrency must be positive");
}

struct LlmGenerator::Impl {
  LlmConfig cfg;
  std::string api_key;
  std::string origin;  // scheme://host[:port]
  std::string path;
  std::string goal_prompt;
  std::string location_prompt;

  mutable std::mutex mutex;
  std::condition_variable slots_cv;
  int in_flight = 0;
  GeneratorUsage totals;

  explicit Impl(LlmConfig c) : cfg(std::move(c)) {
    validate(cfg);
    api_key = std::getenv(cfg.api_key_env.c_str());
    const auto scheme_end = cfg.endpoint.find("://") + 3;
    const auto slash = cfg.endpoint.find('/', scheme_end);
    origin = cfg.endpoint.substr(0, slash);
    path = slash == std::string::npos ? "/" : cfg.endpoint.substr(slash);
    const std::string dir = cfg.prompt_dir.empty() ? (default_data_dir() / "prompts").string() : cfg.prompt_dir;
    goal_prompt = read_text(dir + "/goal_hypotheses_system.txt");
    location_prompt = read_text(dir + "/location_hypotheses_system.txt");
  }

  // One chat round trip; returns the assistant text.
  std::string chat(const json& messages) {
    {
      std::unique_lock lock(mutex);
      slots_cv.wait(lock, [&] { return in_flight < cfg.max_concurrent; });
      ++in_flight;
    }
    struct Release {
      Impl* self;
      ~Release() {
        std::lock_guard lock(self->mutex);
        --self->in_flight;
        self->slots_cv.notify_one();
      }
    } release{this};

    const auto start = std::chrono::steady_clock::now();
    httplib::Client client(origin);
    const auto seconds = static_cast<time_t>(cfg.timeout_seconds);
    client.set_connection_timeout(seconds);
    client.set_read_timeout(seconds);
    client.set_bearer_token_auth(api_key);
    const json body{{"model", cfg.model}, {"temperature", cfg.temperature}, {"messages", messages}};
    auto res = client.Post(path, body.dump(), "application/json");
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    {
      std::lock_guard lock(mutex);
      ++totals.query_count;
      totals.wall_time += elapsed;
    }
    if (!res) throw Error(ErrorCode::kGeneratorFailure, "request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw Error(ErrorCode::kGeneratorFailure, "endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
      const auto doc = json::parse(res->body);
      if (doc.contains("usage")) {
        std::lock_guard lock(mutex);
        totals.prompt_tokens += doc["usage"].value("prompt_tokens", 0);
        totals.completion_tokens += doc["usage"].value("completion_tokens", 0);
      }
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kGeneratorFailure, std::string("malformed completion response: ") + e.what());
    }
  }

  template <typename Parse>
  auto ask(const std::string& system, const std::string& user, Parse parse) -> decltype(parse(std::string{})) {
    json messages = json::array({{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", user}}});
    std::string last_error;
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
      std::string reply;
      try {
        reply = chat(messages);
      } catch (const Error& e) {
        last_error = e.what();
        continue;
      }
      try {
        return parse(reply);
      } catch (const Error& e) {
        last_error = e.what();
        messages.push_back({{"role", "assistant"}, {"content", reply}});
        messages.push_back({{"role", "user"},
                            {"content", std::string("Your final answer could not be parsed (") + e.what() +
                                            "). Give the final answer again as a ```json block in the required format."}});
      }
    }
    throw Error(ErrorCode::kGeneratorFailure, "no usable answer after " + std::to_string(cfg.max_retries) +
                                                  " attempts: " + last_error);
  }
};

LlmGenerator::LlmGenerator(LlmConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
LlmGenerator::~LlmGenerator() = default;

std::vector<GoalCandidate> LlmGenerator::propose_goals(const QueryContext& ctx, int c1) {
  std::string user = "Instruction: " + ctx.instruction + "\n" + textualize(ctx);
  if (!ctx.history.empty()) user += "\nAction history:\n" + ctx.history + "\n";
  user += "\nk = " + std::to_string(c1) + "\n";
  return impl_->ask(impl_->goal_prompt, user, parse_goal_answer);
}

std::vector<LocationCandidate> LlmGenerator::propose_locations(const QueryContext& ctx, const std::string& object,
                                                               int c2) {
  std::string user = "Instruction: " + ctx.instruction + "\n" + textualize(ctx);
  user += "\nThe object of interest is: " + object + "\nk = " + std::to_string(c2) + "\n";
  return impl_->ask(impl_->location_prompt, user, parse_location_answer);
}

GeneratorUsage LlmGenerator::usage() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->totals;
}

}  // namespace tru
