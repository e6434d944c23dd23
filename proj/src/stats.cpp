#include "cotg/stats.hpp"

#include <cctype>
#include <iomanip>
#include <sstream>

#include "cotg/error.hpp"

namespace cotg {
namespace {

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_';
}

char fold(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

ClassMetrics class_metrics(std::span<const NodeType> predicted, std::span<const NodeType> gold,
                           NodeType positive) {
  ClassMetrics m;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    bool p = predicted[i] == positive;
    bool g = gold[i] == positive;
    if (p && g) ++m.true_positives;
    if (p && !g) ++m.false_positives;
    if (!p && g) ++m.false_negatives;
  }
  auto predicted_pos = m.true_positives + m.false_positives;
  auto gold_pos = m.true_positives + m.false_negatives;
  m.precision_undefined = predicted_pos == 0;
  m.recall_undefined = gold_pos == 0;
  m.precision = m.precision_undefined ? 0.0 : double(m.true_positives) / double(predicted_pos);
  m.recall = m.recall_undefined ? 0.0 : double(m.true_positives) / double(gold_pos);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

}  // namespace

DatasetStats dataset_stats(std::span<const GraphPair> pairs, const TokenCounter& count) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyDataset, "no samples");
  DatasetStats s;
  s.total_samples = pairs.size();
  double review_full = 0.0;
  double review_pruned = 0.0;
  for (const auto& p : pairs) {
    s.full.avg_nodes += double(p.full.size());
    s.pruned.avg_nodes += double(p.pruned.size());
    review_full += double(p.full.review_count());
    review_pruned += double(p.pruned.review_count());
    s.full.avg_tokens += double(count(p.full_cot));
    s.pruned.avg_tokens += double(count(p.pruned_cot));
  }
  const double n = double(pairs.size());
  s.full.avg_review_nodes = review_full / n;
  s.pruned.avg_review_nodes = review_pruned / n;
  for (auto* v : {&s.full, &s.pruned}) {
    v->avg_nodes /= n;
    v->avg_tokens /= n;
  }
  s.review_removed_fraction = review_full > 0.0 ? 1.0 - review_pruned / review_full : 0.0;
  return s;
}

std::string format_stats_table(const DatasetStats& s) {
  std::ostringstream os;
  os << std::left << std::setw(22) << "Statistic" << std::right << std::setw(12) << "Full CoT"
     << std::setw(12) << "Pruned CoT" << '\n';
  os << std::string(46, '-') << '\n';
  os << std::left << std::setw(22) << "Total Samples" << std::right << std::setw(12)
     << s.total_samples << std::setw(12) << s.total_samples << '\n';
  os << std::fixed << std::setprecision(1);
  auto row = [&](const char* name, double a, double b) {
    os << std::left << std::setw(22) << name << std::right << std::setw(12) << a << std::setw(12)
       << b << '\n';
  };
  row("Avg. Nodes", s.full.avg_nodes, s.pruned.avg_nodes);
  row("Avg. Review Nodes", s.full.avg_review_nodes, s.pruned.avg_review_nodes);
  row("Avg. Tokens", s.full.avg_tokens, s.pruned.avg_tokens);
  os << std::left << std::setw(22) << "Review Removed" << std::right << std::setw(24)
     << std::setprecision(3) << s.review_removed_fraction << '\n';
  return os.str();
}

const std::vector<std::string>& default_keywords() {
  static const std::vector<std::string> kKeywords = {"wait",  "but",   "hmm",
                                                     "maybe", "check", "therefore"};
  return kKeywords;
}

std::size_t count_keyword(std::string_view text, std::string_view keyword) {
  if (keyword.empty() || keyword.size() > text.size()) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + keyword.size() <= text.size(); ++i) {
    if (i > 0 && is_word_byte(text[i - 1])) continue;
    bool eq = true;
    for (std::size_t j = 0; j < keyword.size() && eq; ++j) eq = fold(text[i + j]) == fold(keyword[j]);
    if (!eq) continue;
    auto end = i + keyword.size();
    if (end < text.size() && is_word_byte(text[end])) continue;
    ++n;
    i = end - 1;
  }
  return n;
}

std::vector<KeywordFrequency> keyword_frequencies(std::span<const std::string> responses,
                                                  std::span<const std::string> keywords) {
  std::vector<KeywordFrequency> out;
  for (const auto& k : keywords) {
    double total = 0.0;
    for (const auto& r : responses) total += double(count_keyword(r, k));
    out.push_back({k, responses.empty() ? 0.0 : total / double(responses.size())});
  }
  return out;
}

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

LabelMetrics label_metrics(std::span<const NodeType> predicted, std::span<const NodeType> gold,
                           std::optional<std::span<const bool>> atomic) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predicted.size()) + " predictions vs " +
                                               std::to_string(gold.size()) + " gold labels");
  }
  if (atomic && atomic->size() != gold.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(atomic->size()) + " atomicity flags vs " +
                                               std::to_string(gold.size()) + " gold labels");
  }
  LabelMetrics m;
  m.samples = gold.size();
  m.progress = class_metrics(predicted, gold, NodeType::Progress);
  m.review = class_metrics(predicted, gold, NodeType::Review);
  if (atomic && !gold.empty()) {
    std::size_t atomic_n = 0;
    std::size_t valid_n = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if ((*atomic)[i]) {
        ++atomic_n;
        if (predicted[i] == gold[i]) ++valid_n;
      }
    }
    m.atomicity_rate = double(atomic_n) / double(gold.size());
    m.valid_rate = double(valid_n) / double(gold.size());
  }
  return m;
}

}  // namespace cotg
