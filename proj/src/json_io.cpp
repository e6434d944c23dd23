#include "cotg/json_io.hpp"

#include "cotg/error.hpp"

namespace cotg {
namespace {

std::string req_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw SchemaViolation(key, "expected a string");
  return it->get<std::string>();
}

std::string opt_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw SchemaViolation(key, "expected a string");
  return it->get<std::string>();
}

NodeId req_id(const Json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string() || !NodeId::is_valid(it->get<std::string>())) {
    throw SchemaViolation(path + key, "expected a node id");
  }
  return NodeId::parse(it->get<std::string>());
}

Json class_json(const ClassMetrics& m) {
  return Json{{"precision", m.precision},
              {"recall", m.recall},
              {"f1", m.f1},
              {"true_positives", m.true_positives},
              {"false_positives", m.false_positives},
              {"false_negatives", m.false_negatives},
              {"precision_undefined", m.precision_undefined},
              {"recall_undefined", m.recall_undefined}};
}

Json ids(const std::set<NodeId>& s) {
  Json a = Json::array();
  for (const auto& id : s) a.push_back(id.str());
  return a;
}

}  // namespace

Json to_json(const RawTrace& t) {
  Json j{{"trace_id", t.trace_id}, {"question", t.question}, {"cot", t.cot}, {"answer", t.answer}};
  if (t.correct) j["correct"] = *t.correct;
  return j;
}

RawTrace raw_trace_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaViolation("$", "expected an object");
  RawTrace t;
  t.trace_id = req_string(j, "trace_id");
  if (t.trace_id.empty()) throw SchemaViolation("trace_id", "must be nonempty");
  t.cot = req_string(j, "cot");
  t.question = opt_string(j, "question");
  t.answer = opt_string(j, "answer");
  if (auto it = j.find("correct"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw SchemaViolation("correct", "expected a boolean");
    t.correct = it->get<bool>();
  }
  return t;
}

Json to_json(const Chunk& c) {
  Json j{{"index", c.index}, {"text", c.text}};
  j["trigger"] = c.trigger ? Json(*c.trigger) : Json(nullptr);
  return j;
}

Json to_json(const ChunkedTrace& t) {
  Json j = to_json(t.trace);
  Json chunks = Json::array();
  for (const auto& c : t.chunks) chunks.push_back(to_json(c));
  j["chunks"] = std::move(chunks);
  return j;
}

ChunkedTrace chunked_trace_from_json(const Json& j, std::span<const std::string> triggers) {
  RawTrace t = raw_trace_from_json(j);
  auto it = j.find("chunks");
  if (it == j.end() || it->is_null()) return chunk_trace(std::move(t), triggers);
  if (!it->is_array()) throw SchemaViolation("chunks", "expected an array");
  ChunkedTrace ct{std::move(t), {}};
  std::string joined;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& c = (*it)[i];
    auto path = "chunks[" + std::to_string(i) + "]";
    if (!c.is_object() || !c.contains("text") || !c["text"].is_string()) {
      throw SchemaViolation(path + ".text", "expected a string");
    }
    Chunk chunk{i, c["text"].get<std::string>(), std::nullopt};
    if (c.contains("index") && (!c["index"].is_number_unsigned() || c["index"].get<std::size_t>() != i)) {
      throw SchemaViolation(path + ".index", "chunk indices must be 0..n-1 in order");
    }
    if (auto tr = c.find("trigger"); tr != c.end() && !tr->is_null()) {
      if (!tr->is_string()) throw SchemaViolation(path + ".trigger", "expected a string");
      chunk.trigger = tr->get<std::string>();
    }
    joined += chunk.text;
    ct.chunks.push_back(std::move(chunk));
  }
  if (joined != ct.trace.cot) throw SchemaViolation("chunks", "chunk texts do not concatenate to cot");
  if (ct.chunks.empty()) ct.chunks.push_back({0, "", std::nullopt});
  return ct;
}

Json to_json(const ReasoningGraph& g) {
  Json nodes = Json::array();
  for (const auto& [id, n] : g.nodes()) {
    nodes.push_back(Json{{"id", id.str()},
                         {"summary", n.summary},
                         {"type", std::string(to_string(n.type))},
                         {"chunk_indices", n.chunk_indices}});
  }
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    edges.push_back(Json{{"from", e.from.str()}, {"to", e.to.str()}, {"label", e.label}});
  }
  Json j{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  j["terminal"] = g.terminal() ? Json(g.terminal()->str()) : Json(nullptr);
  return j;
}

ReasoningGraph graph_from_json(const Json& j, bool require_valid) {
  if (!j.is_object()) throw SchemaViolation("graph", "expected an object");
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::optional<NodeId> terminal;
  auto n_it = j.find("nodes");
  if (n_it == j.end() || !n_it->is_array()) throw SchemaViolation("nodes", "expected an array");
  for (std::size_t i = 0; i < n_it->size(); ++i) {
    const auto& n = (*n_it)[i];
    auto path = "nodes[" + std::to_string(i) + "].";
    if (!n.is_object()) throw SchemaViolation(path, "expected an object");
    Node node;
    node.id = req_id(n, "id", path);
    if (!n.contains("summary") || !n["summary"].is_string()) {
      throw SchemaViolation(path + "summary", "expected a string");
    }
    node.summary = n["summary"].get<std::string>();
    auto type = n.contains("type") && n["type"].is_string()
                    ? parse_node_type(n["type"].get<std::string>())
                    : std::nullopt;
    if (!type) throw SchemaViolation(path + "type", "expected progress or review");
    node.type = *type;
    if (auto c = n.find("chunk_indices"); c != n.end() && !c->is_null()) {
      if (!c->is_array()) throw SchemaViolation(path + "chunk_indices", "expected an array");
      for (const auto& v : *c) {
        if (!v.is_number_unsigned()) {
          throw SchemaViolation(path + "chunk_indices", "expected unsigned integers");
        }
        node.chunk_indices.push_back(v.get<std::size_t>());
      }
    }
    nodes.push_back(std::move(node));
  }
  if (auto e_it = j.find("edges"); e_it != j.end() && !e_it->is_null()) {
    if (!e_it->is_array()) throw SchemaViolation("edges", "expected an array");
    for (std::size_t i = 0; i < e_it->size(); ++i) {
      const auto& e = (*e_it)[i];
      auto path = "edges[" + std::to_string(i) + "].";
      if (!e.is_object()) throw SchemaViolation(path, "expected an object");
      edges.push_back({req_id(e, "from", path), req_id(e, "to", path), opt_string(e, "label")});
    }
  }
  if (auto t = j.find("terminal"); t != j.end() && !t->is_null()) terminal = req_id(j, "terminal", "");

  auto g = ReasoningGraph::from_parts(std::move(nodes), std::move(edges), std::move(terminal));
  if (require_valid) {
    if (auto v = validate(g); !v.empty()) {
      throw Error(ErrorCode::InvalidGraph,
                  std::string(to_string(v.front().kind)) + " " + v.front().detail);
    }
  }
  return g;
}

Json to_json(const PruneReport& r) {
  Json bypass = Json::array();
  for (const auto& e : r.bypass_edges_added) {
    bypass.push_back(Json{{"from", e.from.str()}, {"to", e.to.str()}, {"label", e.label}});
  }
  return Json{{"branch_pruned", ids(r.branch_pruned)},
              {"depth_pruned", ids(r.depth_pruned)},
              {"cascade_removed", ids(r.cascade_removed)},
              {"bypass_edges_added", std::move(bypass)}};
}

Json to_json(const SftRecord& r) {
  return Json{{"trace_id", r.trace_id},         {"question", r.question},
              {"pruned_cot", r.pruned_cot},     {"answer", r.answer},
              {"tokens_before", r.tokens_before}, {"tokens_after", r.tokens_after}};
}

Json to_json(const ScoredTrajectory& t) {
  return Json{{"trajectory_id", t.trajectory_id},
              {"question_id", t.question_id},
              {"question", t.question},
              {"cot", t.cot},
              {"correct", t.correct},
              {"length", t.length},
              {"review_count", t.review_count},
              {"node_count", t.node_count},
              {"redundancy", t.redundancy}};
}

Json to_json(const RewardRecord& r) {
  Json j{{"trajectory_id", r.trajectory_id}, {"correct", r.correct}, {"length", r.length}};
  j["l_star"] = r.l_star ? Json(*r.l_star) : Json(nullptr);
  j["delta"] = r.delta;
  j["r_length"] = r.r_length;
  j["reward"] = r.reward;
  return j;
}

Json to_json(const DpoPair& p) {
  return Json{{"question_id", p.preferred.question_id},
              {"question", p.preferred.question},
              {"preferred_cot", p.preferred.cot},
              {"dispreferred_cot", p.dispreferred.cot},
              {"r_preferred", p.preferred.redundancy},
              {"r_dispreferred", p.dispreferred.redundancy},
              {"preferred_id", p.preferred.trajectory_id},
              {"dispreferred_id", p.dispreferred.trajectory_id}};
}

Json to_json(const DatasetStats& s) {
  auto variant = [](const VariantStats& v) {
    return Json{{"avg_nodes", v.avg_nodes},
                {"avg_review_nodes", v.avg_review_nodes},
                {"avg_tokens", v.avg_tokens}};
  };
  return Json{{"total_samples", s.total_samples},
              {"full", variant(s.full)},
              {"pruned", variant(s.pruned)},
              {"review_removed_fraction", s.review_removed_fraction}};
}

Json to_json(const LabelMetrics& m) {
  Json j{{"samples", m.samples}, {"progress", class_json(m.progress)}, {"review", class_json(m.review)}};
  j["atomicity_rate"] = m.atomicity_rate ? Json(*m.atomicity_rate) : Json(nullptr);
  j["valid_rate"] = m.valid_rate ? Json(*m.valid_rate) : Json(nullptr);
  return j;
}

Json to_json(const BuildDiagnostics& d) {
  return Json{{"oracle_calls", d.oracle_calls},
              {"rejected_responses", d.rejected_responses},
              {"fallback_inserts", d.fallback_inserts},
              {"terminal_appended", d.terminal_appended}};
}

Json parse_json_line(std::string_view line) {
  try {
    return Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
}

}  // namespace cotg
