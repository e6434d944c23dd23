#pragma once

// Raw oracle responses with the exact graph or error each must produce when
// parsed and applied to `golden_base()` for the given chunk.

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cotg/constructor.hpp"
#include "cotg/error.hpp"
#include "cotg/graph.hpp"

namespace golden {

using cotg::Edge;
using cotg::Node;
using cotg::NodeId;
using cotg::NodeType;

inline NodeId id(const char* s) { return NodeId::parse(s); }

/// A (progress, chunk 0) -> B (review, chunk 1); no terminal yet.
inline std::vector<Node> base_nodes() {
  return {{id("A"), "x = 3 + 4 = 7", NodeType::Progress, {0}},
          {id("B"), "re-check x = 7", NodeType::Review, {1}}};
}
inline std::vector<Edge> base_edges() { return {{id("A"), id("B"), "checks"}}; }

inline cotg::ReasoningGraph golden_base() {
  return cotg::ReasoningGraph::from_parts(base_nodes(), base_edges(), std::nullopt);
}

inline cotg::Chunk reflective_chunk() { return {2, "Wait, is x really 7? Yes. ", "Wait"}; }
inline cotg::Chunk progress_chunk() { return {2, "So y = 2x = 14. ", "So"}; }

struct Case {
  std::string name;
  std::string raw;
  cotg::Chunk chunk;
  std::optional<cotg::ReasoningGraph> expected_graph;
  std::optional<cotg::ErrorCode> expected_error;
  std::string expected_field;  // SchemaViolation key path, when relevant
};

inline cotg::ReasoningGraph with_node(Node n, std::vector<Edge> extra) {
  auto nodes = base_nodes();
  nodes.push_back(std::move(n));
  auto edges = base_edges();
  edges.insert(edges.end(), extra.begin(), extra.end());
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  return cotg::ReasoningGraph::from_parts(std::move(nodes), std::move(edges), std::nullopt);
}

inline cotg::ReasoningGraph with_b(std::string summary, std::vector<std::size_t> chunks) {
  auto nodes = base_nodes();
  nodes[1].summary = std::move(summary);
  nodes[1].chunk_indices = std::move(chunks);
  return cotg::ReasoningGraph::from_parts(std::move(nodes), base_edges(), std::nullopt);
}

inline Case ok(std::string name, std::string raw, cotg::Chunk chunk, cotg::ReasoningGraph g) {
  return {std::move(name), std::move(raw), std::move(chunk), std::move(g), std::nullopt, ""};
}

inline Case fails(std::string name, std::string raw, cotg::Chunk chunk, cotg::ErrorCode code,
                  std::string field = "") {
  return {std::move(name), std::move(raw), std::move(chunk), std::nullopt, code, std::move(field)};
}

inline std::vector<Case> cases() {
  using cotg::ErrorCode;
  const auto R = reflective_chunk();
  const auto P = progress_chunk();
  return {
      ok("insert progress with one edge",
         R"({"decision":"Insert","target_node":"","new_node":{"id":"C","description":"y = 2x = 14","type":"progress"},"edges":[{"from":"A","to":"C","label":"uses x"}],"updated_node_description":""})",
         P, with_node({id("C"), "y = 2x = 14", NodeType::Progress, {2}}, {{id("A"), id("C"), "uses x"}})),
      ok("insert review with two edges",
         R"({"decision":"Insert","target_node":"","new_node":{"id":"C","description":"doubt x","type":"review"},"edges":[{"from":"A","to":"C","label":"doubts"},{"from":"B","to":"C","label":"continues"}],"updated_node_description":""})",
         R, with_node({id("C"), "doubt x", NodeType::Review, {2}},
                      {{id("A"), id("C"), "doubts"}, {id("B"), id("C"), "continues"}})),
      ok("insert with case-insensitive decision and type",
         R"({"decision":"insert","new_node":{"id":"C","description":"doubt x","type":"Review"},"edges":[]})",
         R, with_node({id("C"), "doubt x", NodeType::Review, {2}}, {})),
      ok("insert with null optional fields",
         R"({"decision":"Insert","target_node":null,"new_node":{"id":"C","description":"y","type":"progress"},"edges":null,"updated_node_description":null})",
         P, with_node({id("C"), "y", NodeType::Progress, {2}}, {})),
      ok("json-fenced insert",
         "```json\n{\"decision\":\"Insert\",\"target_node\":\"\",\"new_node\":{\"id\":\"C\",\"description\":\"y\",\"type\":\"progress\"},\"edges\":[{\"from\":\"B\",\"to\":\"C\",\"label\":\"\"}],\"updated_node_description\":\"\"}\n```",
         P, with_node({id("C"), "y", NodeType::Progress, {2}}, {{id("B"), id("C"), ""}})),
      ok("bare-fenced merge",
         "```\n{\"decision\":\"Merge\",\"target_node\":\"B\",\"new_node\":{\"id\":\"\",\"description\":\"\",\"type\":\"\"},\"edges\":[],\"updated_node_description\":\"re-check x = 7 twice\"}\n```",
         R, with_b("re-check x = 7 twice", {1, 2})),
      ok("merge review into review",
         R"({"decision":"Merge","target_node":"B","new_node":{"id":"","description":"","type":"review"},"edges":[],"updated_node_description":"x = 7 confirmed"})",
         R, with_b("x = 7 confirmed", {1, 2})),
      ok("merge with an edge already present",
         R"({"decision":"Merge","target_node":"B","new_node":{"id":"","description":"","type":""},"edges":[{"from":"A","to":"B","label":"checks"}],"updated_node_description":"x = 7 confirmed"})",
         R, with_b("x = 7 confirmed", {1, 2})),
      fails("forbidden merge of reflective chunk into progress",
            R"({"decision":"Merge","target_node":"A","new_node":{"id":"","description":"","type":""},"edges":[],"updated_node_description":"x = 7, checked"})",
            R, ErrorCode::MergeConstraintViolation),
      fails("forbidden merge of declared review into progress",
            R"({"decision":"Merge","target_node":"A","new_node":{"id":"","description":"","type":"review"},"edges":[],"updated_node_description":"x = 7, checked"})",
            P, ErrorCode::MergeConstraintViolation),
      fails("malformed json", R"({"decision":"Insert", "new_node": {)", P, ErrorCode::MalformedJson),
      fails("top-level array", R"([{"decision":"Insert"}])", P, ErrorCode::SchemaViolation, "$"),
      fails("unknown top-level key",
            R"({"decision":"Insert","confidence":0.9,"new_node":{"id":"C","description":"y","type":"progress"},"edges":[]})",
            P, ErrorCode::SchemaViolation, "confidence"),
      fails("unknown decision",
            R"({"decision":"Delete","new_node":{"id":"C","description":"y","type":"progress"},"edges":[]})",
            P, ErrorCode::SchemaViolation, "decision"),
      fails("missing decision", R"({"new_node":{"id":"C","description":"y","type":"progress"},"edges":[]})",
            P, ErrorCode::SchemaViolation, "decision"),
      fails("invalid node id",
            R"({"decision":"Insert","new_node":{"id":"c1","description":"y","type":"progress"},"edges":[]})",
            P, ErrorCode::SchemaViolation, "new_node.id"),
      fails("invalid node type",
            R"({"decision":"Insert","new_node":{"id":"C","description":"y","type":"conclusion"},"edges":[]})",
            P, ErrorCode::SchemaViolation, "new_node.type"),
      fails("insert missing description",
            R"({"decision":"Insert","new_node":{"id":"C","description":"","type":"progress"},"edges":[]})",
            P, ErrorCode::SchemaViolation, "new_node.description"),
      fails("edges not an array",
            R"({"decision":"Insert","new_node":{"id":"C","description":"y","type":"progress"},"edges":{"from":"A","to":"C"}})",
            P, ErrorCode::SchemaViolation, "edges"),
      fails("edge missing endpoint",
            R"({"decision":"Insert","new_node":{"id":"C","description":"y","type":"progress"},"edges":[{"to":"C","label":"x"}]})",
            P, ErrorCode::SchemaViolation, "edges[0].from"),
      fails("insert carrying a merge target",
            R"({"decision":"Insert","target_node":"B","new_node":{"id":"C","description":"y","type":"progress"},"edges":[]})",
            P, ErrorCode::InconsistentDecision),
      fails("insert edge aimed elsewhere",
            R"({"decision":"Insert","new_node":{"id":"C","description":"y","type":"progress"},"edges":[{"from":"A","to":"B","label":"x"}]})",
            P, ErrorCode::InconsistentDecision),
      fails("insert reusing an id",
            R"({"decision":"Insert","new_node":{"id":"B","description":"y","type":"progress"},"edges":[]})",
            P, ErrorCode::IdOrderViolation),
      fails("insert edge from a missing node",
            R"({"decision":"Insert","new_node":{"id":"D","description":"y","type":"progress"},"edges":[{"from":"E","to":"D","label":"x"}]})",
            P, ErrorCode::UnknownEndpoint),
      fails("merge into unknown node",
            R"({"decision":"Merge","target_node":"Q","new_node":{"id":"","description":"","type":""},"edges":[],"updated_node_description":"z"})",
            R, ErrorCode::UnknownNode),
  };
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

/// Parses and applies one case to a fresh base graph and compares against
/// the expectation.
inline Outcome run(const Case& c) {
  auto g = golden_base();
  const auto before = g;
  try {
    auto op = cotg::parse_graph_op(c.raw);
    cotg::apply_op(g, op, c.chunk, cotg::chunk_type_hint(c.chunk, op));
  } catch (const cotg::Error& e) {
    if (!c.expected_error) return {false, std::string("unexpected error: ") + e.what()};
    if (e.code() != *c.expected_error) return {false, std::string("wrong error: ") + e.what()};
    if (!c.expected_field.empty()) {
      auto* sv = dynamic_cast<const cotg::SchemaViolation*>(&e);
      if (sv == nullptr || sv->field() != c.expected_field) {
        return {false, "wrong field for: " + std::string(e.what())};
      }
    }
    if (!(g == before)) return {false, "graph modified by a failed op"};
    return {true, ""};
  }
  if (c.expected_error) {
    return {false, "expected " + std::string(cotg::to_string(*c.expected_error)) + ", got success"};
  }
  if (!(g == *c.expected_graph)) return {false, "graph differs from expectation"};
  return {true, ""};
}

}  // namespace golden
