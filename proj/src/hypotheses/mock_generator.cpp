#include <algorithm>
#include <set>

#include "tru/hypotheses.hpp"

namespace tru {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

class Hasher {
 public:
  explicit Hasher(std::uint64_t seed) { add(seed); }
  Hasher& add(std::string_view s) {
    for (unsigned char c : s) mix(c);
    mix(0xff);
    return *this;
  }
  Hasher& add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(v >> (8 * i)));
    return *this;
  }
  std::uint64_t value() const { return h_; }
  double unit() const { return static_cast<double>(h_ >> 11) / static_cast<double>(1ull << 53); }

 private:
  void mix(unsigned char c) {
    h_ ^= c;
    h_ *= kFnvPrime;
  }
  std::uint64_t h_ = kFnvOffset;
};

const char* const kPhantomPrefixes[] = {"spare", "extra", "small", "large", "fresh", "old"};

}  // namespace

MockGenerator::MockGenerator(MockTruth truth, std::uint64_t seed, MockProfile profile)
    : truth_(std::move(truth)), seed_(seed), profile_(profile) {}

std::vector<GoalCandidate> MockGenerator::propose_goals(const QueryContext& ctx, int c1) {
  ++queries_;
  std::vector<GoalCandidate> out;
  if (truth_.goal_set.empty() || c1 < 1) return out;
  const auto& z = ctx.observation.graph;

  const std::size_t n = truth_.goal_set.size();
  std::optional<PlacementGoal> intended;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = truth_.goal_set[(seed_ + i) % n];
    if (std::find(ctx.failed_goals.begin(), ctx.failed_goals.end(), g) == ctx.failed_goals.end()) {
      intended = g;
      break;
    }
  }
  const PlacementGoal base = intended ? *intended : truth_.goal_set[seed_ % n];
  const bool with_truth = profile_.include_true_goal && intended.has_value();
  const int decoys = with_truth ? c1 - 1 : c1;

  std::set<std::string> used;
  for (const auto& p : base.pairs()) used.insert(p.object);
  std::vector<std::string> distractors;
  for (const auto& o : z.objects()) {
    if (!used.count(o.id)) distractors.push_back(o.id);
  }

  std::vector<GoalCandidate> decoy_goals;
  for (int j = 0; j < decoys; ++j) {
    Hasher h(seed_);
    h.add("decoy").add(static_cast<std::uint64_t>(j)).add(static_cast<std::uint64_t>(ctx.failed_goals.size()));
    auto pairs = base.pairs();
    const std::size_t k = h.value() % pairs.size();
    std::string substitute;
    const bool phantom = Hasher(h.value()).add("phantom").unit() < profile_.phantom_probability;
    if (!phantom) {
      for (std::size_t t = 0; t < distractors.size(); ++t) {
        const auto& cand = distractors[(h.value() / 7 + t) % distractors.size()];
        if (!used.count(cand)) {
          substitute = cand;
          break;
        }
      }
    }
    if (substitute.empty()) {
      for (std::size_t t = 0; substitute.empty() || used.count(substitute); ++t) {
        substitute = std::string(kPhantomPrefixes[(h.value() + t) % std::size(kPhantomPrefixes)]) + "_" +
                     pairs[k].object + (t >= std::size(kPhantomPrefixes) ? "_" + std::to_string(t) : "");
      }
    }
    used.insert(substitute);
    pairs[k].object = substitute;
    decoy_goals.push_back(GoalCandidate{PlacementGoal(std::move(pairs)), 0.0});
  }

  if (with_truth) {
    out.push_back(GoalCandidate{base, decoys > 0 ? profile_.true_goal_weight : 1.0});
    for (auto& d : decoy_goals) d.confidence = (1.0 - profile_.true_goal_weight) / decoys;
  } else {
    for (auto& d : decoy_goals) d.confidence = 1.0 / decoys;
  }
  for (auto& d : decoy_goals) out.push_back(std::move(d));
  return out;
}

std::vector<LocationCandidate> MockGenerator::propose_locations(const QueryContext& ctx, const std::string& object,
                                                                int c2) {
  ++queries_;
  const auto& z = ctx.observation.graph;
  const auto& catalog = z.catalog();
  std::vector<std::string> closed;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (!z.is_open(i)) closed.push_back(catalog[i].id);
  }
  std::vector<LocationCandidate> out;
  if (closed.empty() || c2 < 1) return out;

  std::optional<std::string> truth;
  if (auto it = truth_.locations.find(object); it != truth_.locations.end() && profile_.include_true_location &&
                                                std::find(closed.begin(), closed.end(), it->second) != closed.end()) {
    truth = it->second;
  }
  std::vector<std::pair<std::uint64_t, std::string>> ranked;
  for (const auto& a : closed) {
    if (truth && a == *truth) continue;
    ranked.emplace_back(Hasher(seed_).add(object).add(a).value(), a);
  }
  std::sort(ranked.begin(), ranked.end());
  const std::size_t decoys = std::min(ranked.size(), static_cast<std::size_t>(truth ? c2 - 1 : c2));
  if (truth) out.push_back(LocationCandidate{*truth, decoys > 0 ? profile_.true_location_weight : 1.0});
  for (std::size_t i = 0; i < decoys; ++i) {
    const double w = truth ? (1.0 - profile_.true_location_weight) / decoys : 1.0 / decoys;
    out.push_back(LocationCandidate{ranked[i].second, w});
  }
  return out;
}

GeneratorUsage MockGenerator::usage() const { return GeneratorUsage{0, 0, queries_.load(), 0.0}; }

}  // namespace tru
