#include "cotg/pruner.hpp"

#include <algorithm>

#include "cotg/error.hpp"

namespace cotg {

void PruneParams::check() const {
  if (k < 1) throw Error(ErrorCode::ConfigError, "k must be >= 1");
  if (!(m > 0.0 && m <= 1.0)) throw Error(ErrorCode::ConfigError, "m must lie in (0, 1]");
}

std::set<NodeId> PruneReport::removed() const {
  std::set<NodeId> all = branch_pruned;
  all.insert(depth_pruned.begin(), depth_pruned.end());
  all.insert(cascade_removed.begin(), cascade_removed.end());
  return all;
}

namespace {

bool is_prunable(const ReasoningGraph& g, const Node& n) {
  return n.type == NodeType::Review && !(g.terminal() && *g.terminal() == n.id);
}

}  // namespace

std::set<NodeId> find_branch_redundant(const ReasoningGraph& g, std::size_t k) {
  std::set<NodeId> out;
  for (const auto& [id, n] : g.nodes()) {
    if (is_prunable(g, n) && descendant_count(g, id) < k) out.insert(id);
  }
  return out;
}

std::set<NodeId> find_depth_redundant(const ReasoningGraph& g, double m) {
  std::size_t d_max = max_depth(g);
  std::set<NodeId> out;
  if (d_max == 0) return out;
  auto d = depths(g);
  for (const auto& [id, n] : g.nodes()) {
    if (!is_prunable(g, n)) continue;
    auto it = d.find(id);
    if (it == d.end()) continue;
    if (static_cast<double>(it->second) / static_cast<double>(d_max) > m) out.insert(id);
  }
  return out;
}

PruneResult prune(const ReasoningGraph& g, const PruneParams& params) {
  params.check();
  if (!g.terminal()) throw Error(ErrorCode::NoTerminal, "graph has no terminal node");
  const NodeId& terminal = *g.terminal();

  PruneReport report;
  report.branch_pruned = find_branch_redundant(g, params.k);
  report.depth_pruned = find_depth_redundant(g, params.m);
  std::set<NodeId> flagged = report.branch_pruned;
  flagged.insert(report.depth_pruned.begin(), report.depth_pruned.end());

  // Nodes still reachable from a surviving source without passing a flagged node.
  std::set<NodeId> reached;
  std::vector<NodeId> stack;
  for (auto& s : g.sources()) {
    if (!flagged.contains(s)) stack.push_back(s);
  }
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    if (!reached.insert(u).second) continue;
    for (const auto& w : g.successors(u)) {
      if (!flagged.contains(w) && !reached.contains(w)) stack.push_back(w);
    }
  }
  for (const auto& [id, _] : g.nodes()) {
    if (!flagged.contains(id) && !reached.contains(id) && id != terminal) {
      report.cascade_removed.insert(id);
    }
  }

  auto removed = report.removed();
  auto survives = [&](const NodeId& id) { return !removed.contains(id); };

  PruneResult result;
  ReasoningGraph& out = result.graph;
  for (const auto& [id, node] : g.nodes()) {
    if (!survives(id)) continue;
    std::vector<Edge> incoming;
    for (const auto& p : g.predecessors(id)) {
      if (survives(p)) incoming.push_back(*g.find_edge(p, id));
    }
    if (incoming.empty() && !g.predecessors(id).empty()) {
      // Walk back through the removed region that fed this node.
      std::set<NodeId> anchors;
      std::set<NodeId> visited;
      std::vector<NodeId> walk(g.predecessors(id).begin(), g.predecessors(id).end());
      while (!walk.empty()) {
        NodeId r = walk.back();
        walk.pop_back();
        if (!visited.insert(r).second) continue;
        for (const auto& p : g.predecessors(r)) {
          if (survives(p)) {
            anchors.insert(p);
          } else {
            walk.push_back(p);
          }
        }
      }
      if (anchors.empty() && id == terminal && !out.empty()) anchors.insert(*out.max_id());
      for (const auto& a : anchors) {
        incoming.push_back({a, id, std::string(kBypassLabel)});
        report.bypass_edges_added.push_back(incoming.back());
      }
    }
    out.insert_node(node, incoming);
  }
  out.set_terminal(terminal);
  result.report = std::move(report);
  return result;
}

}  // namespace cotg
