#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cotg {

/// A sampled trajectory with the quantities its ranking and reward need.
/// `question` and `cot` ride along so pairs can be emitted as text.
struct ScoredTrajectory {
  std::string trajectory_id;
  std::string question_id;
  std::size_t length = 0;  // L(y), reasoning tokens
  std::size_t review_count = 0;
  std::size_t node_count = 0;
  bool correct = false;
  double redundancy = 0.0;
  std::string question;
  std::string cot;

  bool operator==(const ScoredTrajectory&) const = default;
};

/// review_count / node_count + length / group_mean_length.
/// Throws Error(DivisionDomain) when either denominator is zero.
double redundancy_score(std::size_t review_count, std::size_t node_count, double length,
                        double group_mean_length);

/// Mean length over the whole group, correct and incorrect alike.
double mean_length(std::span<const ScoredTrajectory> group);

/// Fills `redundancy` for each member using the group's mean length.
void score_group(std::span<ScoredTrajectory> group);

struct DpoPair {
  ScoredTrajectory preferred;
  ScoredTrajectory dispreferred;
};

/// Among correct trajectories ordered by (redundancy, trajectory_id), the
/// first is preferred and the last dispreferred. Nothing when fewer than two
/// are correct.
std::optional<DpoPair> build_dpo_pairs(std::span<const ScoredTrajectory> group);

struct RewardParams {
  double lambda = 0.5;   ///< penalty weight, >= 0
  double delta = 256.0;  ///< tolerance margin in tokens, >= 0
  double gamma = 2.0;    ///< sharpness, >= 1

  /// Throws Error(ConfigError) when out of range.
  void check() const;
};

struct RewardRecord {
  std::string trajectory_id;
  bool correct = false;
  std::size_t length = 0;
  std::optional<std::size_t> l_star;
  double delta = 0.0;     ///< normalized excess length
  double r_length = 0.0;  ///< delta^gamma
  double reward = 0.0;

  bool operator==(const RewardRecord&) const = default;
};

/// Shortest correct length in the group, if any trajectory is correct.
std::optional<std::size_t> shortest_correct_length(std::span<const ScoredTrajectory> group);

/// Length-penalised correctness reward for each member, in input order:
/// reward = V - lambda * [V = 1] * delta^gamma with
/// delta = max(L - L* - margin, 0) / (L* + margin).
std::vector<RewardRecord> grpo_rewards(std::span<const ScoredTrajectory> group,
                                       const RewardParams& params);

}  // namespace cotg
