#include <algorithm>
#include <cmath>
#include <numeric>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tru/environment.hpp"
#include "tru/error.hpp"

namespace tru {

using ojson = nlohmann::ordered_json;

std::string to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy: return "easy";
    case Difficulty::kMedium: return "medium";
    case Difficulty::kHard: return "hard";
  }
  return "easy";
}

Difficulty parse_difficulty(std::string_view text) {
  if (text == "easy") return Difficulty::kEasy;
  if (text == "medium") return Difficulty::kMedium;
  if (text == "hard") return Difficulty::kHard;
  throw Error(ErrorCode::kInvalidDifficulty, "unknown difficulty '" + std::string(text) + "'");
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, path + ": " + what);
}

const ojson& member(const ojson& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "/" + key, "missing");
  return *it;
}

std::string string_member(const ojson& obj, const char* key, const std::string& path) {
  const auto& v = member(obj, key, path);
  if (!v.is_string()) schema_error(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

const ojson& array_member(const ojson& obj, const char* key, const std::string& path) {
  const auto& v = member(obj, key, path);
  if (!v.is_array()) schema_error(path + "/" + key, "expected an array");
  return v;
}

std::set<std::string> referenced_areas(const TaskSpec& t) {
  std::set<std::string> out;
  for (const auto& p : t.placements) out.insert(p.area);
  out.insert(t.robot_location);
  for (const auto& g : t.goal_set) {
    for (const auto& p : g.pairs()) out.insert(p.target);
  }
  return out;
}

std::string infer_kitchen(const TaskSpec& t, const std::filesystem::path& data_dir) {
  const auto needed = referenced_areas(t);
  for (const auto& id : kitchen_ids()) {
    const auto k = load_kitchen(id, data_dir);
    if (std::all_of(needed.begin(), needed.end(), [&](const auto& a) { return k.catalog->find(a).has_value(); })) {
      return id;
    }
  }
  for (const auto& a : needed) {
    const bool known = std::any_of(kitchen_ids().begin(), kitchen_ids().end(),
                                   [&](const auto& id) { return load_kitchen(id, data_dir).catalog->find(a).has_value(); });
    if (!known) throw Error(ErrorCode::kUnknownArea, "unknown area: " + a);
  }
  throw Error(ErrorCode::kUnknownKitchen, "no shipped kitchen contains every area the task references");
}

// Built-in vocabulary for generated tasks.
const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "apple",          "banana",        "orange",        "lemon",          "bell_pepper",   "tomato",
      "cucumber",       "carrot",        "onion",         "garlic",         "potato",        "avocado",
      "milk_carton",    "yogurt_cup",    "butter_block",  "cheese_wedge",   "egg_carton",    "orange_juice",
      "flour_bag",      "sugar_jar",     "salt_shaker",   "pepper_mill",    "olive_oil",     "soy_sauce",
      "honey_jar",      "peanut_butter", "strawberry_jam", "oatmeal",       "granola_bar",   "rice_jar",
      "pasta_box",      "cereal_box",    "coffee_beans",  "tea_tin",        "cocoa_powder",  "baking_soda",
      "dinner_plate",   "salad_bowl",    "coffee_mug",    "wine_glass",     "water_bottle",  "tea_cup",
      "fork",           "spoon",         "chef_knife",    "butter_knife",   "whisk",         "spatula",
      "ladle",          "rolling_pin",   "measuring_cup", "cutting_board",  "frying_pan",    "sauce_pot",
      "baking_tray",    "muffin_tin",    "mixing_bowl",   "colander",       "can_opener",    "wine_opener",
      "egg_timer",      "oven_mitt",     "dish_towel",    "dish_soap",      "sponge",        "paper_towels",
      "trash_bags",     "foil_roll",     "cling_film",    "lunch_box",      "thermos",       "ice_tray",
      "frozen_peas",    "ice_cream_tub", "leftover_container", "cookbook",  "scented_candle", "decorative_vase",
      "napkin_holder",  "toaster",       "blender",       "kettle",
  };
  return words;
}

const char* const kInstructionTemplates[] = {
    "We are getting the kitchen ready for guests, could you sort out the {objects}?",
    "Please tidy up so that the {objects} end up where they should be.",
    "Before dinner starts, make sure the {objects} are put in their proper places.",
    "I'd like to get organized for tomorrow morning, please handle the {objects}.",
};

std::string join_objects(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += (i + 1 == names.size()) ? " and " : ", ";
    std::string pretty = names[i];
    std::replace(pretty.begin(), pretty.end(), '_', ' ');
    out += pretty;
  }
  return out;
}

std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

}  // namespace

bool goal_achievable(const TaskSpec& task, const Kitchen& kitchen, const PlacementGoal& goal) {
  if (!is_well_formed(goal)) return false;
  for (const auto& p : goal.pairs()) {
    const bool exists = std::any_of(task.placements.begin(), task.placements.end(),
                                    [&](const Placement& pl) { return pl.object == p.object; }) ||
                        task.object_in_hand == p.object;
    const auto target = kitchen.catalog->find(p.target);
    if (!exists || !target || *target == kitchen.catalog->robot_hand()) return false;
  }
  return true;
}

void validate(const TaskSpec& task, const Kitchen& kitchen) {
  const auto& catalog = *kitchen.catalog;
  auto require_area = [&](const std::string& area, const std::string& path) {
    if (!catalog.find(area)) throw Error(ErrorCode::kUnknownArea, path + ": unknown area '" + area + "'");
  };
  std::set<std::string> objects;
  for (std::size_t i = 0; i < task.placements.size(); ++i) {
    const auto& p = task.placements[i];
    const std::string path = "/placement/" + std::to_string(i);
    require_area(p.area, path + "/area");
    if (catalog.find(p.area) == catalog.robot_hand()) schema_error(path + "/area", "objects cannot start in the robot hand");
    if (p.object.empty()) schema_error(path + "/placed_object", "empty object name");
    if (catalog.find(p.object)) schema_error(path + "/placed_object", "object name collides with an area");
    if (!objects.insert(p.object).second) schema_error(path + "/placed_object", "duplicate object '" + p.object + "'");
  }
  require_area(task.robot_location, "/robot/location");
  if (task.object_in_hand && !objects.insert(*task.object_in_hand).second) {
    schema_error("/robot/object_in_hand", "object is also placed in the scene");
  }
  if (task.goal_set.empty()) schema_error("/task/goal_set", "must not be empty");
  bool any_achievable = false;
  for (std::size_t i = 0; i < task.goal_set.size(); ++i) {
    const auto& goal = task.goal_set[i];
    const std::string path = "/task/goal_set/" + std::to_string(i);
    if (goal.empty()) schema_error(path, "goal must not be empty");
    for (std::size_t j = 0; j < goal.pairs().size(); ++j) {
      require_area(goal.pairs()[j].target, path + "/" + std::to_string(j) + "/target_area");
    }
    any_achievable = any_achievable || goal_achievable(task, kitchen, goal);
  }
  if (!any_achievable) schema_error("/task/goal_set", "no goal is achievable");
}

TaskSpec load_task(std::string_view json_text, const std::filesystem::path& data_dir) {
  ojson doc;
  try {
    doc = ojson::parse(json_text);
  } catch (const ojson::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("task is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("", "expected an object");
  TaskSpec t;
  const auto& placement = array_member(doc, "placement", "");
  for (std::size_t i = 0; i < placement.size(); ++i) {
    const std::string path = "/placement/" + std::to_string(i);
    t.placements.push_back(
        Placement{string_member(placement[i], "area", path), string_member(placement[i], "placed_object", path)});
  }
  const auto& robot = member(doc, "robot", "");
  if (robot.contains("name")) t.robot_name = string_member(robot, "name", "/robot");
  t.robot_location = string_member(robot, "location", "/robot");
  if (robot.contains("object_in_hand") && !robot["object_in_hand"].is_null()) {
    auto held = string_member(robot, "object_in_hand", "/robot");
    if (!held.empty()) t.object_in_hand = std::move(held);
  }
  const auto& task = member(doc, "task", "");
  t.instruction = string_member(task, "instruction", "/task");
  const auto& goal_set = array_member(task, "goal_set", "/task");
  for (std::size_t i = 0; i < goal_set.size(); ++i) {
    const std::string path = "/task/goal_set/" + std::to_string(i);
    if (!goal_set[i].is_array()) schema_error(path, "expected an array");
    std::vector<GoalPair> pairs;
    for (std::size_t j = 0; j < goal_set[i].size(); ++j) {
      const std::string pair_path = path + "/" + std::to_string(j);
      pairs.push_back(GoalPair{string_member(goal_set[i][j], "placed_object", pair_path),
                               string_member(goal_set[i][j], "target_area", pair_path)});
    }
    t.goal_set.emplace_back(std::move(pairs));
  }
  t.emit_meta = doc.contains("meta");
  if (t.emit_meta) {
    const auto& meta = doc["meta"];
    if (!meta.is_object()) schema_error("/meta", "expected an object");
    if (meta.contains("kitchen")) t.kitchen = string_member(meta, "kitchen", "/meta");
    if (meta.contains("difficulty")) t.difficulty = parse_difficulty(string_member(meta, "difficulty", "/meta"));
    if (meta.contains("seed")) {
      if (!meta["seed"].is_number_unsigned()) schema_error("/meta/seed", "expected an unsigned integer");
      t.seed = meta["seed"].get<std::uint64_t>();
    }
  }
  if (t.goal_set.empty()) schema_error("/task/goal_set", "must not be empty");
  if (t.kitchen.empty()) t.kitchen = infer_kitchen(t, data_dir);
  validate(t, load_kitchen(t.kitchen, data_dir));
  return t;
}

TaskSpec load_task_file(const std::filesystem::path& path, const std::filesystem::path& data_dir) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read task file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_task(ss.str(), data_dir);
}

std::string serialize_task(const TaskSpec& task) {
  ojson doc;
  doc["placement"] = ojson::array();
  for (const auto& p : task.placements) doc["placement"].push_back({{"area", p.area}, {"placed_object", p.object}});
  doc["robot"] = {{"name", task.robot_name},
                  {"location", task.robot_location},
                  {"object_in_hand", task.object_in_hand.value_or("")}};
  ojson goals = ojson::array();
  for (const auto& g : task.goal_set) {
    ojson pairs = ojson::array();
    for (const auto& p : g.pairs()) pairs.push_back({{"target_area", p.target}, {"placed_object", p.object}});
    goals.push_back(std::move(pairs));
  }
  doc["task"] = {{"instruction", task.instruction}, {"goal_set", std::move(goals)}};
  if (task.emit_meta) {
    ojson meta = {{"kitchen", task.kitchen}};
    if (task.difficulty) meta["difficulty"] = to_string(*task.difficulty);
    if (task.seed) meta["seed"] = *task.seed;
    doc["meta"] = std::move(meta);
  }
  return doc.dump(4);
}

TaskSpec generate_task(std::string_view kitchen_id, Difficulty difficulty, std::uint64_t seed,
                       const GenerateOptions& options, const std::filesystem::path& data_dir) {
  const Kitchen kitchen = load_kitchen(kitchen_id, data_dir);
  const auto& catalog = *kitchen.catalog;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(difficulty), static_cast<std::uint32_t>(name_hash(kitchen_id))};
  std::mt19937_64 rng(seq);

  std::vector<std::string> open_areas, closed_areas, targets_pool;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& a = catalog[i];
    if (a.kind == AreaKind::kRobotHand) continue;
    targets_pool.push_back(a.id);
    if (a.kind == AreaKind::kHumanHand) continue;
    (a.initially_open ? open_areas : closed_areas).push_back(a.id);
  }

  int n_targets = 2;
  if (difficulty == Difficulty::kMedium) n_targets = 3;
  if (difficulty == Difficulty::kHard) n_targets = std::uniform_int_distribution<int>(4, 8)(rng);
  const int total = std::max(options.total_objects, n_targets);

  auto words = vocabulary();
  std::shuffle(words.begin(), words.end(), rng);
  words.resize(static_cast<std::size_t>(std::min<int>(total, static_cast<int>(words.size()))));

  TaskSpec t;
  t.kitchen = std::string(kitchen_id);
  t.difficulty = difficulty;
  t.seed = seed;

  const int hidden = closed_areas.empty()
                         ? 0
                         : static_cast<int>(std::lround(std::clamp(options.hidden_fraction, 0.0, 1.0) * n_targets));
  std::vector<int> order(static_cast<std::size_t>(n_targets));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_hidden(static_cast<std::size_t>(n_targets), false);
  for (int i = 0; i < hidden; ++i) is_hidden[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  std::vector<GoalPair> main_goal;
  std::vector<std::string> target_names;
  for (int i = 0; i < n_targets; ++i) {
    const auto& object = words[static_cast<std::size_t>(i)];
    const auto& area = is_hidden[static_cast<std::size_t>(i)] ? pick(closed_areas, rng) : pick(open_areas, rng);
    t.placements.push_back(Placement{area, object});
    std::string target;
    do {
      target = pick(targets_pool, rng);
    } while (target == area);
    main_goal.push_back(GoalPair{object, target});
    target_names.push_back(object);
  }
  std::vector<std::string> anywhere = open_areas;
  anywhere.insert(anywhere.end(), closed_areas.begin(), closed_areas.end());
  for (std::size_t i = static_cast<std::size_t>(n_targets); i < words.size(); ++i) {
    t.placements.push_back(Placement{pick(anywhere, rng), words[i]});
  }
  std::shuffle(t.placements.begin(), t.placements.end(), rng);

  t.goal_set.emplace_back(main_goal);
  const int n_goals = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int attempt = 0; static_cast<int>(t.goal_set.size()) < n_goals && attempt < 50; ++attempt) {
    auto pairs = main_goal;
    auto& changed = pairs[std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng)];
    const auto start = std::find_if(t.placements.begin(), t.placements.end(),
                                    [&](const Placement& p) { return p.object == changed.object; })->area;
    const auto target = pick(targets_pool, rng);
    if (target == start || target == changed.target) continue;
    changed.target = target;
    PlacementGoal alt(std::move(pairs));
    if (std::find(t.goal_set.begin(), t.goal_set.end(), alt) == t.goal_set.end()) t.goal_set.push_back(std::move(alt));
  }

  t.robot_location = pick(open_areas, rng);
  std::string instruction = kInstructionTemplates[std::uniform_int_distribution<std::size_t>(
      0, std::size(kInstructionTemplates) - 1)(rng)];
  instruction.replace(instruction.find("{objects}"), 9, join_objects(target_names));
  t.instruction = std::move(instruction);
  validate(t, kitchen);
  return t;
}

SceneGraph initial_scene(const TaskSpec& task, const Kitchen& kitchen) {
  SceneGraph g = empty_scene(kitchen);
  for (const auto& p : task.placements) g = g.with_object(p.object, p.area);
  if (task.object_in_hand) g = g.with_object(*task.object_in_hand, AreaCatalog::kRobotHandId);
  return g.with_robot_at(task.robot_location);
}

MockTruth mock_truth(const TaskSpec& task) {
  MockTruth truth{task.goal_set, {}};
  for (const auto& p : task.placements) truth.locations[p.object] = p.area;
  if (task.object_in_hand) truth.locations[*task.object_in_hand] = std::string(AreaCatalog::kRobotHandId);
  return truth;
}

}  // namespace tru
