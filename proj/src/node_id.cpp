#include "cotg/node_id.hpp"

#include <algorithm>

#include "cotg/error.hpp"

namespace cotg {

bool NodeId::is_valid(std::string_view label) noexcept {
  return !label.empty() &&
         std::all_of(label.begin(), label.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

NodeId NodeId::parse(std::string_view label) {
  if (!is_valid(label)) {
    throw Error(ErrorCode::SchemaViolation, "invalid node id '" + std::string(label) + "'");
  }
  return NodeId(std::string(label));
}

NodeId NodeId::from_ordinal(std::size_t ordinal) {
  // Bijective base-26.
  std::string s;
  std::size_t n = ordinal + 1;
  while (n > 0) {
    --n;
    s.push_back(static_cast<char>('A' + n % 26));
    n /= 26;
  }
  std::reverse(s.begin(), s.end());
  return NodeId(std::move(s));
}

std::size_t NodeId::ordinal() const {
  std::size_t n = 0;
  for (char c : label_) n = n * 26 + static_cast<std::size_t>(c - 'A' + 1);
  return n - 1;
}

}  // namespace cotg
