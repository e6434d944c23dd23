#pragma once

#include <cstddef>
#include <set>
#include <string_view>
#include <vector>

#include "cotg/graph.hpp"

namespace cotg {

/// Thresholds for the two redundancy criteria on review nodes.
struct PruneParams {
  std::size_t k = 2;  ///< branch: prune when descendant count < k
  double m = 0.9;     ///< depth: prune when depth / terminal depth > m

  /// Throws Error(ConfigError) unless k >= 1 and 0 < m <= 1.
  void check() const;
};

struct PruneReport {
  std::set<NodeId> branch_pruned;
  std::set<NodeId> depth_pruned;
  std::set<NodeId> cascade_removed;
  std::vector<Edge> bypass_edges_added;

  std::set<NodeId> removed() const;
  bool empty() const {
    return branch_pruned.empty() && depth_pruned.empty() && cascade_removed.empty();
  }
  bool operator==(const PruneReport&) const = default;
};

struct PruneResult {
  ReasoningGraph graph;
  PruneReport report;
};

inline constexpr std::string_view kBypassLabel = "pruned-bypass";

/// Review nodes (terminal excluded) with fewer than `k` descendants.
std::set<NodeId> find_branch_redundant(const ReasoningGraph& g, std::size_t k);

/// Review nodes (terminal excluded) whose depth relative to the terminal's
/// exceeds `m`. Empty when the terminal sits at depth 0. Throws NoTerminal.
std::set<NodeId> find_depth_redundant(const ReasoningGraph& g, double m);

/// Single pass: both criteria are evaluated on `g`, the flagged nodes are
/// removed together with everything reachable from the sources only
/// through them (the terminal excepted), and a survivor left without
/// incoming edges is re-attached to the surviving predecessors of the
/// removed region it hung from.
PruneResult prune(const ReasoningGraph& g, const PruneParams& params = {});

}  // namespace cotg
