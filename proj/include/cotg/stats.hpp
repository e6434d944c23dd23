#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cotg/graph.hpp"
#include "cotg/trace.hpp"

namespace cotg {

/// One trace before and after pruning.
struct GraphPair {
  ReasoningGraph full;
  ReasoningGraph pruned;
  std::string full_cot;
  std::string pruned_cot;
};

struct VariantStats {
  double avg_nodes = 0.0;
  double avg_review_nodes = 0.0;
  double avg_tokens = 0.0;
};

struct DatasetStats {
  std::size_t total_samples = 0;
  VariantStats full;
  VariantStats pruned;
  /// 1 - (review nodes kept / review nodes before), over the whole corpus.
  double review_removed_fraction = 0.0;
};

/// Throws Error(EmptyDataset) on an empty collection.
DatasetStats dataset_stats(std::span<const GraphPair> pairs,
                           const TokenCounter& count = default_token_counter());

std::string format_stats_table(const DatasetStats& stats);

const std::vector<std::string>& default_keywords();

/// Case-insensitive occurrences of `keyword` bounded by non-word characters.
std::size_t count_keyword(std::string_view text, std::string_view keyword);

struct KeywordFrequency {
  std::string keyword;
  double mean_per_response = 0.0;
};

std::vector<KeywordFrequency> keyword_frequencies(std::span<const std::string> responses,
                                                  std::span<const std::string> keywords);

struct ClassMetrics {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // no predictions of this class
  bool recall_undefined = false;     // no gold rows of this class
};

/// Harmonic mean; 0 when p + r = 0.
double f1_score(double precision, double recall);

struct LabelMetrics {
  std::size_t samples = 0;
  ClassMetrics progress;
  ClassMetrics review;
  std::optional<double> atomicity_rate;  // fraction flagged atomic
  std::optional<double> valid_rate;      // type correct and atomic
};

/// Per-class precision/recall/F1 with each class taken as positive in turn.
/// Throws Error(LengthMismatch) when the lists differ in length.
LabelMetrics label_metrics(std::span<const NodeType> predicted, std::span<const NodeType> gold,
                           std::optional<std::span<const bool>> atomic = std::nullopt);

}  // namespace cotg
