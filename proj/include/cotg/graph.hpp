#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cotg/node_id.hpp"

namespace cotg {

enum class NodeType { Progress, Review };

std::string_view to_string(NodeType type);
/// Accepts "progress"/"review" in any letter case.
std::optional<NodeType> parse_node_type(std::string_view text);

inline constexpr std::string_view kTerminalSummary = "final answer";

struct Node {
  NodeId id;
  std::string summary;
  NodeType type = NodeType::Progress;
  std::vector<std::size_t> chunk_indices;  // sorted, unique

  bool operator==(const Node&) const = default;
};

struct Edge {
  NodeId from;
  NodeId to;
  std::string label;

  bool operator==(const Edge&) const = default;
};

/// Dependency DAG over reasoning steps. Acyclicity follows from requiring
/// every edge to point from a smaller id to a larger one; the mutating
/// members keep that and the other structural invariants.
class ReasoningGraph {
 public:
  ReasoningGraph() = default;

  /// Builds a graph without checking any invariant; run `validate` on the
  /// result. Used for deserialization of untrusted input.
  static ReasoningGraph from_parts(std::vector<Node> nodes, std::vector<Edge> edges,
                                   std::optional<NodeId> terminal);

  /// Adds `node`, whose id must exceed every existing id, together with
  /// edges into it. Strong exception guarantee.
  void insert_node(Node node, std::span<const Edge> incoming = {});

  /// Replaces the target's summary and records `chunk_index` on it.
  void merge_into(const NodeId& target, std::string updated_summary, std::size_t chunk_index);

  void update_summary(const NodeId& id, std::string summary);

  /// Adds an edge between existing nodes (from < to).
  void add_edge(Edge edge);

  void set_terminal(const NodeId& id);

  bool contains(const NodeId& id) const { return nodes_.contains(id); }
  const Node& node(const NodeId& id) const;
  bool has_edge(const NodeId& from, const NodeId& to) const;
  /// nullptr when absent.
  const Edge* find_edge(const NodeId& from, const NodeId& to) const;

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  /// Sorted by (from, to).
  const std::vector<Edge>& edges() const { return edges_; }
  const std::optional<NodeId>& terminal() const { return terminal_; }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::optional<NodeId> max_id() const;

  const std::vector<NodeId>& successors(const NodeId& id) const;
  const std::vector<NodeId>& predecessors(const NodeId& id) const;
  std::vector<NodeId> sources() const;

  std::size_t review_count() const;

  /// Structural equality: same nodes, edges and terminal.
  friend bool operator==(const ReasoningGraph& a, const ReasoningGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.terminal_ == b.terminal_;
  }

 private:
  void check_edge(const Edge& e, const NodeId* pending) const;
  void link(Edge e);

  std::map<NodeId, Node> nodes_;
  std::vector<Edge> edges_;
  std::map<NodeId, std::vector<NodeId>> out_;
  std::map<NodeId, std::vector<NodeId>> in_;
  std::optional<NodeId> terminal_;
};

/// Nodes reachable from `v`, excluding `v`.
std::set<NodeId> descendants(const ReasoningGraph& g, const NodeId& v);
std::size_t descendant_count(const ReasoningGraph& g, const NodeId& v);

/// Shortest edge count from any in-degree-0 node, for every reachable node.
std::map<NodeId, std::size_t> depths(const ReasoningGraph& g);
std::size_t depth(const ReasoningGraph& g, const NodeId& v);
/// Depth of the terminal. Throws NoTerminal when none is set.
std::size_t max_depth(const ReasoningGraph& g);

std::vector<NodeId> topological_order(const ReasoningGraph& g);

enum class ViolationKind {
  EdgeDirectionViolation,
  SelfEdge,
  DanglingEndpoint,
  DuplicateEdge,
  EmptySummary,
  MissingTerminal,
  TerminalNameViolation,
  TerminalHasOutEdges,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

/// Every broken structural rule; empty means valid.
std::vector<Violation> validate(const ReasoningGraph& g);

}  // namespace cotg
