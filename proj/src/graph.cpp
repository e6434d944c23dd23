#include "cotg/graph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

#include "cotg/error.hpp"

namespace cotg {
namespace {

const std::vector<NodeId> kNoNeighbours;

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

bool edge_less(const Edge& a, const Edge& b) {
  if (a.from != b.from) return a.from < b.from;
  return a.to < b.to;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(NodeType type) {
  return type == NodeType::Review ? "review" : "progress";
}

std::optional<NodeType> parse_node_type(std::string_view text) {
  auto s = lower(text);
  if (s == "progress") return NodeType::Progress;
  if (s == "review") return NodeType::Review;
  return std::nullopt;
}

ReasoningGraph ReasoningGraph::from_parts(std::vector<Node> nodes, std::vector<Edge> edges,
                                          std::optional<NodeId> terminal) {
  ReasoningGraph g;
  for (auto& n : nodes) {
    NodeId id = n.id;
    g.nodes_.insert_or_assign(std::move(id), std::move(n));
  }
  std::stable_sort(edges.begin(), edges.end(), edge_less);
  for (auto& e : edges) {
    g.out_[e.from].push_back(e.to);
    g.in_[e.to].push_back(e.from);
    g.edges_.push_back(std::move(e));
  }
  g.terminal_ = std::move(terminal);
  return g;
}

const Node& ReasoningGraph::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::UnknownNode, "no node " + id.str());
  return it->second;
}

bool ReasoningGraph::has_edge(const NodeId& from, const NodeId& to) const {
  auto it = out_.find(from);
  if (it == out_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), to) != it->second.end();
}

const Edge* ReasoningGraph::find_edge(const NodeId& from, const NodeId& to) const {
  Edge probe{from, to, {}};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), probe, edge_less);
  if (it == edges_.end() || it->from != from || it->to != to) return nullptr;
  return &*it;
}

std::optional<NodeId> ReasoningGraph::max_id() const {
  if (nodes_.empty()) return std::nullopt;
  return nodes_.rbegin()->first;
}

const std::vector<NodeId>& ReasoningGraph::successors(const NodeId& id) const {
  auto it = out_.find(id);
  return it == out_.end() ? kNoNeighbours : it->second;
}

const std::vector<NodeId>& ReasoningGraph::predecessors(const NodeId& id) const {
  auto it = in_.find(id);
  return it == in_.end() ? kNoNeighbours : it->second;
}

std::vector<NodeId> ReasoningGraph::sources() const {
  std::vector<NodeId> out;
  for (const auto& [id, _] : nodes_) {
    if (predecessors(id).empty()) out.push_back(id);
  }
  return out;
}

std::size_t ReasoningGraph::review_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& kv) {
    return kv.second.type == NodeType::Review;
  }));
}

void ReasoningGraph::check_edge(const Edge& e, const NodeId* pending) const {
  auto known = [&](const NodeId& id) { return contains(id) || (pending && *pending == id); };
  if (!known(e.from) || !known(e.to)) {
    throw Error(ErrorCode::UnknownEndpoint, "edge " + e.from.str() + "->" + e.to.str());
  }
  if (!(e.from < e.to)) {
    throw Error(ErrorCode::IdOrderViolation,
                "edge " + e.from.str() + "->" + e.to.str() + " does not increase in id");
  }
  if (has_edge(e.from, e.to)) {
    throw Error(ErrorCode::DuplicateEdge, "edge " + e.from.str() + "->" + e.to.str());
  }
  if (terminal_ && e.from == *terminal_) {
    throw Error(ErrorCode::TerminalOutEdge, "terminal " + e.from.str() + " cannot have out-edges");
  }
}

void ReasoningGraph::link(Edge e) {
  out_[e.from].push_back(e.to);
  in_[e.to].push_back(e.from);
  auto pos = std::upper_bound(edges_.begin(), edges_.end(), e, edge_less);
  edges_.insert(pos, std::move(e));
}

void ReasoningGraph::insert_node(Node node, std::span<const Edge> incoming) {
  if (!NodeId::is_valid(node.id.str())) {
    throw Error(ErrorCode::IdOrderViolation, "invalid node id '" + node.id.str() + "'");
  }
  if (auto top = max_id(); top && !(*top < node.id)) {
    throw Error(ErrorCode::IdOrderViolation,
                "node id " + node.id.str() + " is not greater than " + top->str());
  }
  if (blank(node.summary)) throw Error(ErrorCode::EmptySummary, "node " + node.id.str());
  for (std::size_t i = 0; i < incoming.size(); ++i) {
    const Edge& e = incoming[i];
    if (e.to != node.id) {
      throw Error(ErrorCode::UnknownEndpoint,
                  "incoming edge " + e.from.str() + "->" + e.to.str() + " does not target " +
                      node.id.str());
    }
    check_edge(e, &node.id);
    for (std::size_t j = 0; j < i; ++j) {
      if (incoming[j].from == e.from) {
        throw Error(ErrorCode::DuplicateEdge, "edge " + e.from.str() + "->" + e.to.str());
      }
    }
  }
  std::sort(node.chunk_indices.begin(), node.chunk_indices.end());
  node.chunk_indices.erase(std::unique(node.chunk_indices.begin(), node.chunk_indices.end()),
                           node.chunk_indices.end());
  NodeId id = node.id;
  nodes_.emplace(id, std::move(node));
  for (const Edge& e : incoming) link(e);
}

void ReasoningGraph::merge_into(const NodeId& target, std::string updated_summary,
                                std::size_t chunk_index) {
  auto it = nodes_.find(target);
  if (it == nodes_.end()) throw Error(ErrorCode::UnknownNode, "no node " + target.str());
  if (blank(updated_summary)) throw Error(ErrorCode::EmptySummary, "merge into " + target.str());
  auto& chunks = it->second.chunk_indices;
  auto pos = std::lower_bound(chunks.begin(), chunks.end(), chunk_index);
  if (pos == chunks.end() || *pos != chunk_index) chunks.insert(pos, chunk_index);
  it->second.summary = std::move(updated_summary);
}

void ReasoningGraph::update_summary(const NodeId& id, std::string summary) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::UnknownNode, "no node " + id.str());
  if (blank(summary)) throw Error(ErrorCode::EmptySummary, "node " + id.str());
  it->second.summary = std::move(summary);
}

void ReasoningGraph::add_edge(Edge edge) {
  check_edge(edge, nullptr);
  link(std::move(edge));
}

void ReasoningGraph::set_terminal(const NodeId& id) {
  if (!contains(id)) throw Error(ErrorCode::UnknownNode, "no node " + id.str());
  if (!successors(id).empty()) {
    throw Error(ErrorCode::TerminalOutEdge, "terminal " + id.str() + " has out-edges");
  }
  terminal_ = id;
}

std::set<NodeId> descendants(const ReasoningGraph& g, const NodeId& v) {
  if (!g.contains(v)) throw Error(ErrorCode::UnknownNode, "no node " + v.str());
  std::set<NodeId> seen;
  std::vector<NodeId> stack(g.successors(v).begin(), g.successors(v).end());
  while (!stack.empty()) {
    NodeId u = std::move(stack.back());
    stack.pop_back();
    if (u == v || !seen.insert(u).second) continue;
    for (const auto& w : g.successors(u)) stack.push_back(w);
  }
  return seen;
}

std::size_t descendant_count(const ReasoningGraph& g, const NodeId& v) {
  return descendants(g, v).size();
}

std::map<NodeId, std::size_t> depths(const ReasoningGraph& g) {
  std::map<NodeId, std::size_t> dist;
  std::deque<NodeId> queue;
  for (auto& s : g.sources()) {
    dist.emplace(s, 0);
    queue.push_back(s);
  }
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    std::size_t du = dist.at(u);
    for (const auto& w : g.successors(u)) {
      if (dist.emplace(w, du + 1).second) queue.push_back(w);
    }
  }
  return dist;
}

std::size_t depth(const ReasoningGraph& g, const NodeId& v) {
  if (!g.contains(v)) throw Error(ErrorCode::UnknownNode, "no node " + v.str());
  auto d = depths(g);
  auto it = d.find(v);
  if (it == d.end()) throw Error(ErrorCode::Unreachable, "node " + v.str() + " has no source");
  return it->second;
}

std::size_t max_depth(const ReasoningGraph& g) {
  if (!g.terminal()) throw Error(ErrorCode::NoTerminal, "graph has no terminal node");
  return depth(g, *g.terminal());
}

std::vector<NodeId> topological_order(const ReasoningGraph& g) {
  std::map<NodeId, std::size_t> indeg;
  for (const auto& [id, _] : g.nodes()) indeg[id] = 0;
  for (const auto& e : g.edges()) {
    if (indeg.contains(e.to) && indeg.contains(e.from)) ++indeg[e.to];
  }
  std::set<NodeId> ready;
  for (const auto& [id, d] : indeg) {
    if (d == 0) ready.insert(id);
  }
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId u = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(u);
    for (const auto& w : g.successors(u)) {
      auto it = indeg.find(w);
      if (it != indeg.end() && --it->second == 0) ready.insert(w);
    }
  }
  if (order.size() != g.size()) throw Error(ErrorCode::Unreachable, "graph contains a cycle");
  return order;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::EdgeDirectionViolation: return "EdgeDirectionViolation";
    case ViolationKind::SelfEdge: return "SelfEdge";
    case ViolationKind::DanglingEndpoint: return "DanglingEndpoint";
    case ViolationKind::DuplicateEdge: return "DuplicateEdge";
    case ViolationKind::EmptySummary: return "EmptySummary";
    case ViolationKind::MissingTerminal: return "MissingTerminal";
    case ViolationKind::TerminalNameViolation: return "TerminalNameViolation";
    case ViolationKind::TerminalHasOutEdges: return "TerminalHasOutEdges";
  }
  return "Unknown";
}

std::vector<Violation> validate(const ReasoningGraph& g) {
  std::vector<Violation> out;
  auto edge_name = [](const Edge& e) { return e.from.str() + "->" + e.to.str(); };

  for (const auto& [id, n] : g.nodes()) {
    if (blank(n.summary)) out.push_back({ViolationKind::EmptySummary, id.str()});
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& e : g.edges()) {
    if (!g.contains(e.from) || !g.contains(e.to)) {
      out.push_back({ViolationKind::DanglingEndpoint, edge_name(e)});
    }
    if (e.from == e.to) {
      out.push_back({ViolationKind::SelfEdge, edge_name(e)});
    } else if (!(e.from < e.to)) {
      out.push_back({ViolationKind::EdgeDirectionViolation, edge_name(e)});
    }
    if (!seen.emplace(e.from, e.to).second) {
      out.push_back({ViolationKind::DuplicateEdge, edge_name(e)});
    }
  }

  const auto& t = g.terminal();
  if (!t || !g.contains(*t)) {
    out.push_back({ViolationKind::MissingTerminal, t ? t->str() : std::string("unset")});
  } else {
    if (g.node(*t).summary != kTerminalSummary) {
      out.push_back({ViolationKind::TerminalNameViolation, g.node(*t).summary});
    }
    if (!g.successors(*t).empty()) out.push_back({ViolationKind::TerminalHasOutEdges, t->str()});
  }
  return out;
}

}  // namespace cotg
