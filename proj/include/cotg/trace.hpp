#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cotg {

/// A problem, its reasoning text, final answer and an externally supplied
/// correctness verdict.
struct RawTrace {
  std::string trace_id;
  std::string question;
  std::string cot;
  std::string answer;
  std::optional<bool> correct;

  bool operator==(const RawTrace&) const = default;
};

struct Chunk {
  std::size_t index = 0;
  std::string text;
  std::optional<std::string> trigger;

  bool operator==(const Chunk&) const = default;
};

/// A trace plus its step-level partition. Concatenating `chunks` in order
/// reproduces `trace.cot` exactly.
struct ChunkedTrace {
  RawTrace trace;
  std::vector<Chunk> chunks;

  bool operator==(const ChunkedTrace&) const = default;
};

/// Split markers, in the order they were published.
const std::vector<std::string>& default_triggers();

/// Subset of the split markers that open reflective (review) content.
const std::vector<std::string>& reflective_triggers();

bool is_reflective_trigger(std::string_view trigger);

/// Partition `cot` at trigger occurrences. A boundary is placed before a
/// case-sensitive trigger match that sits on word boundaries at both ends;
/// at one position the longest trigger wins and scanning resumes after it.
/// Text before the first trigger becomes chunk 0. Empty input yields one
/// empty chunk.
std::vector<Chunk> split_cot(std::string_view cot, std::span<const std::string> triggers);
std::vector<Chunk> split_cot(std::string_view cot);

ChunkedTrace chunk_trace(RawTrace trace, std::span<const std::string> triggers);

/// One trigger per line; blank lines are skipped, surrounding whitespace is
/// not trimmed beyond the line terminator.
std::vector<std::string> load_triggers(const std::filesystem::path& path);

using TokenCounter = std::function<std::size_t(std::string_view)>;

/// Whitespace-delimited word count.
std::size_t token_count(std::string_view text);

const TokenCounter& default_token_counter();

/// First `max_words` whitespace-delimited words joined by single spaces.
std::string first_words(std::string_view text, std::size_t max_words);

}  // namespace cotg
