#include "cotg/trace.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "cotg/error.hpp"

namespace cotg {
namespace {

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  // UTF-8 continuation and lead bytes count as word characters.
  return u >= 0x80 || std::isalnum(u) || c == '_';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

const std::vector<std::string>& default_triggers() {
  static const std::vector<std::string> kTriggers = {
      "Wait",          "Alternatively", "Another angle", "Another approach",
      "But wait",      "Hold on",       "Hmm",           "Maybe",
      "Looking back",  "Okay",          "Let me",        "First",
      "Then",          "Alright",       "Compute",       "Correct",
      "Good",          "Got it",        "I don't see any errors",
      "I think",       "Let me double-check",            "Let's see",
      "Now",           "Remember",      "Seems solid",   "Similarly",
      "So",            "Starting",      "That's correct",
      "That seems right",               "Therefore",     "Thus"};
  return kTriggers;
}

const std::vector<std::string>& reflective_triggers() {
  static const std::vector<std::string> kReflective = {
      "Wait",  "But wait",            "Hold on",      "Hmm",
      "Maybe", "Let me double-check", "Looking back", "Alternatively",
      "Another angle", "Another approach"};
  return kReflective;
}

bool is_reflective_trigger(std::string_view trigger) {
  const auto& r = reflective_triggers();
  return std::find(r.begin(), r.end(), trigger) != r.end();
}

std::vector<Chunk> split_cot(std::string_view cot, std::span<const std::string> triggers) {
  std::vector<const std::string*> by_length;
  by_length.reserve(triggers.size());
  for (const auto& t : triggers) {
    if (!t.empty()) by_length.push_back(&t);
  }
  std::stable_sort(by_length.begin(), by_length.end(),
                   [](const std::string* a, const std::string* b) { return a->size() > b->size(); });

  auto match_at = [&](std::size_t pos) -> const std::string* {
    if (pos > 0 && is_word_byte(cot[pos - 1])) return nullptr;
    for (const std::string* t : by_length) {
      if (cot.compare(pos, t->size(), *t) != 0) continue;
      std::size_t end = pos + t->size();
      if (end < cot.size() && is_word_byte(cot[end]) && is_word_byte(t->back())) continue;
      return t;
    }
    return nullptr;
  };

  std::vector<Chunk> chunks;
  std::size_t start = 0;
  std::optional<std::string> open_trigger;
  std::size_t pos = 0;
  while (pos < cot.size()) {
    const std::string* t = match_at(pos);
    if (t == nullptr) {
      ++pos;
      continue;
    }
    if (pos > start) {
      chunks.push_back({chunks.size(), std::string(cot.substr(start, pos - start)), open_trigger});
    }
    start = pos;
    open_trigger = *t;
    pos += t->size();
  }
  if (start < cot.size() || chunks.empty()) {
    chunks.push_back({chunks.size(), std::string(cot.substr(start)), open_trigger});
  }
  return chunks;
}

std::vector<Chunk> split_cot(std::string_view cot) { return split_cot(cot, default_triggers()); }

ChunkedTrace chunk_trace(RawTrace trace, std::span<const std::string> triggers) {
  auto chunks = split_cot(trace.cot, triggers);
  return {std::move(trace), std::move(chunks)};
}

std::vector<std::string> load_triggers(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open trigger file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(line);
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "trigger file " + path.string() + " is empty");
  return out;
}

std::size_t token_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

const TokenCounter& default_token_counter() {
  static const TokenCounter kCounter = [](std::string_view s) { return token_count(s); };
  return kCounter;
}

std::string first_words(std::string_view text, std::size_t max_words) {
  std::string out;
  std::size_t words = 0;
  std::size_t i = 0;
  while (i < text.size() && words < max_words) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (!out.empty()) out += ' ';
    out.append(text.substr(i, j - i));
    ++words;
    i = j;
  }
  return out;
}

}  // namespace cotg
