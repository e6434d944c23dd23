#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace cotg {

/// Spreadsheet-style node label: A..Z, AA..AZ, BA.., ordered by
/// (length, lexicographic) so that Z < AA.
class NodeId {
 public:
  NodeId() = default;

  /// Throws Error(SchemaViolation) unless `label` is nonempty uppercase ASCII.
  static NodeId parse(std::string_view label);
  static bool is_valid(std::string_view label) noexcept;

  /// 0 -> A, 25 -> Z, 26 -> AA.
  static NodeId from_ordinal(std::size_t ordinal);
  std::size_t ordinal() const;
  NodeId next() const { return from_ordinal(ordinal() + 1); }

  const std::string& str() const noexcept { return label_; }
  bool empty() const noexcept { return label_.empty(); }

  friend bool operator==(const NodeId&, const NodeId&) = default;
  friend std::strong_ordering operator<=>(const NodeId& a, const NodeId& b) {
    if (auto c = a.label_.size() <=> b.label_.size(); c != 0) return c;
    return a.label_.compare(b.label_) <=> 0;
  }

 private:
  explicit NodeId(std::string label) : label_(std::move(label)) {}
  std::string label_;
};

}  // namespace cotg

template <>
struct std::hash<cotg::NodeId> {
  std::size_t operator()(const cotg::NodeId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
