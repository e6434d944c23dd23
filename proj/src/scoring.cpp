#include "cotg/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "cotg/error.hpp"

namespace cotg {

double redundancy_score(std::size_t review_count, std::size_t node_count, double length,
                        double group_mean_length) {
  if (node_count == 0) throw Error(ErrorCode::DivisionDomain, "node_count is zero");
  if (!(group_mean_length > 0.0)) {
    throw Error(ErrorCode::DivisionDomain, "group mean length must be positive");
  }
  return static_cast<double>(review_count) / static_cast<double>(node_count) +
         length / group_mean_length;
}

double mean_length(std::span<const ScoredTrajectory> group) {
  if (group.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : group) sum += static_cast<double>(t.length);
  return sum / static_cast<double>(group.size());
}

void score_group(std::span<ScoredTrajectory> group) {
  const double mean = mean_length(group);
  for (auto& t : group) {
    t.redundancy =
        redundancy_score(t.review_count, t.node_count, static_cast<double>(t.length), mean);
  }
}

std::optional<DpoPair> build_dpo_pairs(std::span<const ScoredTrajectory> group) {
  std::vector<const ScoredTrajectory*> ok;
  for (const auto& t : group) {
    if (t.correct) ok.push_back(&t);
  }
  if (ok.size() < 2) return std::nullopt;
  auto key = [](const ScoredTrajectory* t) { return std::tie(t->redundancy, t->trajectory_id); };
  auto [lo, hi] = std::minmax_element(ok.begin(), ok.end(),
                                      [&](auto* a, auto* b) { return key(a) < key(b); });
  if (*lo == *hi) return std::nullopt;
  return DpoPair{**lo, **hi};
}

void RewardParams::check() const {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::ConfigError, "lambda must be >= 0");
  if (!(delta >= 0.0)) throw Error(ErrorCode::ConfigError, "delta must be >= 0");
  if (!(gamma >= 1.0)) throw Error(ErrorCode::ConfigError, "gamma must be >= 1");
}

std::optional<std::size_t> shortest_correct_length(std::span<const ScoredTrajectory> group) {
  std::optional<std::size_t> best;
  for (const auto& t : group) {
    if (t.correct && (!best || t.length < *best)) best = t.length;
  }
  return best;
}

std::vector<RewardRecord> grpo_rewards(std::span<const ScoredTrajectory> group,
                                       const RewardParams& params) {
  params.check();
  const auto l_star = shortest_correct_length(group);
  std::vector<RewardRecord> out;
  out.reserve(group.size());
  for (const auto& t : group) {
    RewardRecord r;
    r.trajectory_id = t.trajectory_id;
    r.correct = t.correct;
    r.length = t.length;
    r.l_star = l_star;
    if (t.correct) {
      const double budget = static_cast<double>(*l_star) + params.delta;
      const double excess = std::max(static_cast<double>(t.length) - budget, 0.0);
      // L* = 0 with a zero margin would divide by zero; count the budget as one token.
      r.delta = excess / std::max(budget, 1.0);
      r.r_length = std::pow(r.delta, params.gamma);
      r.reward = 1.0 - params.lambda * r.r_length;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cotg
