#include <algorithm>
#include <sstream>

#include "tru/hypotheses.hpp"

namespace tru {

std::string textualize(const Observation& z, const std::vector<PlacementGoal>& failed_goals,
                       const std::vector<std::string>& satisfied_objects) {
  const auto& g = z.graph;
  const auto& catalog = g.catalog();
  std::ostringstream out;
  out << "Current Observation: \n";
  out << "The closed areas are: ";
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (i != catalog.robot_hand() && !g.is_open(i)) out << catalog[i].id << ", ";
  }
  out << "\nThe open areas are: ";
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (i != catalog.robot_hand() && g.is_open(i)) out << catalog[i].id << ", ";
  }
  out << "\nThe observed objects and their initial areas are: ";
  for (const auto& o : g.objects()) {
    if (g.is_open(o.parent)) out << o.id << " is in " << g.area_id(o.parent) << ", ";
  }
  out << "\n\nThe wrong goal states are: \n";
  int n = 1;
  for (const auto& goal : failed_goals) out << n++ << ". " << to_string(goal) << ".\n";
  auto satisfied = satisfied_objects;
  std::sort(satisfied.begin(), satisfied.end());
  satisfied.erase(std::unique(satisfied.begin(), satisfied.end()), satisfied.end());
  out << "\nObjects already in target areas: ";
  for (const auto& o : satisfied) out << o << ", ";
  out << '\n';
  return out.str();
}

std::string textualize(const QueryContext& ctx) {
  return textualize(ctx.observation, ctx.failed_goals, ctx.satisfied_objects);
}

}  // namespace tru
