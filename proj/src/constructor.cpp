#include "cotg/constructor.hpp"

#include <algorithm>
#include <cctype>

#include "cotg/error.hpp"
#include "cotg/mermaid.hpp"
#include "cotg/prompt.hpp"
#include "json.hpp"

namespace cotg {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

// Absent, null and "" all map to nullopt.
std::optional<std::string> optional_string(const json& obj, const std::string& key,
                                           const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaViolation(path, "expected a string");
  auto s = it->get<std::string>();
  if (trim(s).empty()) return std::nullopt;
  return s;
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& prefix) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaViolation(prefix + key, "unknown key");
    }
  }
}

NodeId parse_id(const std::string& text, const std::string& path) {
  auto t = std::string(trim(text));
  if (!NodeId::is_valid(t)) throw SchemaViolation(path, "invalid node id '" + text + "'");
  return NodeId::parse(t);
}

Error inconsistent(const std::string& what) { return Error(ErrorCode::InconsistentDecision, what); }

}  // namespace

std::string_view strip_code_fence(std::string_view raw) {
  auto s = trim(raw);
  if (!s.starts_with("```")) return s;
  auto nl = s.find('\n');
  if (nl == std::string_view::npos) return s;
  s.remove_prefix(nl + 1);
  s = trim(s);
  if (s.ends_with("```")) s.remove_suffix(3);
  return trim(s);
}

GraphOp parse_graph_op(std::string_view raw) {
  json j;
  try {
    j = json::parse(strip_code_fence(raw));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  if (!j.is_object()) throw SchemaViolation("$", "expected a JSON object");
  reject_unknown_keys(j, {"decision", "target_node", "new_node", "edges", "updated_node_description"},
                      "");

  GraphOp op;
  auto decision = optional_string(j, "decision", "decision");
  if (!decision) throw SchemaViolation("decision", "missing");
  auto d = lower(trim(*decision));
  if (d == "insert") {
    op.decision = Decision::Insert;
  } else if (d == "merge") {
    op.decision = Decision::Merge;
  } else {
    throw SchemaViolation("decision", "expected Insert or Merge, got '" + *decision + "'");
  }

  if (auto t = optional_string(j, "target_node", "target_node")) {
    op.target_node = parse_id(*t, "target_node");
  }

  std::optional<NodeId> new_id;
  std::optional<std::string> new_desc;
  if (auto it = j.find("new_node"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw SchemaViolation("new_node", "expected an object");
    reject_unknown_keys(*it, {"id", "description", "type"}, "new_node.");
    if (auto id = optional_string(*it, "id", "new_node.id")) new_id = parse_id(*id, "new_node.id");
    new_desc = optional_string(*it, "description", "new_node.description");
    if (auto type = optional_string(*it, "type", "new_node.type")) {
      op.declared_type = parse_node_type(trim(*type));
      if (!op.declared_type) throw SchemaViolation("new_node.type", "expected progress or review");
    }
  }

  if (auto it = j.find("edges"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaViolation("edges", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& e = (*it)[i];
      auto path = "edges[" + std::to_string(i) + "]";
      if (!e.is_object()) throw SchemaViolation(path, "expected an object");
      reject_unknown_keys(e, {"from", "to", "label"}, path + ".");
      auto from = optional_string(e, "from", path + ".from");
      auto to = optional_string(e, "to", path + ".to");
      if (!from) throw SchemaViolation(path + ".from", "missing");
      if (!to) throw SchemaViolation(path + ".to", "missing");
      auto label = optional_string(e, "label", path + ".label");
      op.edges.push_back(
          {parse_id(*from, path + ".from"), parse_id(*to, path + ".to"), label.value_or("")});
    }
  }

  op.updated_node_description =
      optional_string(j, "updated_node_description", "updated_node_description");

  if (op.decision == Decision::Insert) {
    if (op.target_node) throw inconsistent("insert must leave target_node empty");
    if (op.updated_node_description) {
      throw inconsistent("insert must leave updated_node_description empty");
    }
    if (!new_id) throw SchemaViolation("new_node.id", "insert requires a node id");
    if (!new_desc) throw SchemaViolation("new_node.description", "insert requires a description");
    if (!op.declared_type) throw SchemaViolation("new_node.type", "insert requires a node type");
    op.new_node = NewNodeSpec{*new_id, *new_desc, *op.declared_type};
    for (const auto& e : op.edges) {
      if (e.to != *new_id) {
        throw inconsistent("insert edge " + e.from.str() + "->" + e.to.str() +
                           " must target the new node " + new_id->str());
      }
    }
  } else {
    if (new_id || new_desc) throw inconsistent("merge must leave new_node id and description empty");
    if (!op.target_node) throw SchemaViolation("target_node", "merge requires a target node");
    if (!op.updated_node_description) {
      throw SchemaViolation("updated_node_description", "merge requires an updated description");
    }
    for (const auto& e : op.edges) {
      if (e.to != *op.target_node) {
        throw inconsistent("merge edge " + e.from.str() + "->" + e.to.str() +
                           " must target the merge target " + op.target_node->str());
      }
    }
  }
  return op;
}

std::string serialize_graph_op(const GraphOp& op) {
  ordered_json j;
  j["decision"] = op.decision == Decision::Insert ? "Insert" : "Merge";
  j["target_node"] = op.target_node ? op.target_node->str() : "";
  ordered_json node;
  node["id"] = op.new_node ? op.new_node->id.str() : "";
  node["description"] = op.new_node ? op.new_node->description : "";
  node["type"] = op.declared_type ? std::string(to_string(*op.declared_type)) : "";
  j["new_node"] = std::move(node);
  j["edges"] = ordered_json::array();
  for (const auto& e : op.edges) {
    j["edges"].push_back({{"from", e.from.str()}, {"to", e.to.str()}, {"label", e.label}});
  }
  j["updated_node_description"] = op.updated_node_description.value_or("");
  return j.dump();
}

NodeType chunk_type_hint(const Chunk& chunk, const GraphOp& op) {
  if (chunk.trigger && is_reflective_trigger(*chunk.trigger)) return NodeType::Review;
  return op.declared_type.value_or(NodeType::Progress);
}

void apply_op(ReasoningGraph& g, const GraphOp& op, const Chunk& chunk, NodeType hint) {
  ReasoningGraph next = g;
  if (op.decision == Decision::Insert) {
    if (!op.new_node) throw inconsistent("insert without new_node");
    Node node{op.new_node->id, op.new_node->description, op.new_node->type, {chunk.index}};
    next.insert_node(std::move(node), op.edges);
  } else {
    if (!op.target_node || !op.updated_node_description) {
      throw inconsistent("merge without target_node or updated_node_description");
    }
    const Node& target = next.node(*op.target_node);
    if (hint == NodeType::Review && target.type == NodeType::Progress) {
      throw Error(ErrorCode::MergeConstraintViolation,
                  "review content cannot be merged into progress node " + target.id.str());
    }
    next.merge_into(*op.target_node, *op.updated_node_description, chunk.index);
    for (const auto& e : op.edges) {
      if (!next.has_edge(e.from, e.to)) next.add_edge(e);
    }
  }
  g = std::move(next);
}

GraphOp heuristic_op(const ReasoningGraph& g, const Chunk& chunk) {
  NodeType type = chunk.trigger && is_reflective_trigger(*chunk.trigger) ? NodeType::Review
                                                                         : NodeType::Progress;
  auto summary = first_words(chunk.text, kSummaryWords);
  if (summary.empty()) summary = "(empty step)";
  GraphOp op;
  op.decision = Decision::Insert;
  auto top = g.max_id();
  NodeId id = top ? top->next() : NodeId::from_ordinal(0);
  op.new_node = NewNodeSpec{id, std::move(summary), type};
  op.declared_type = type;
  if (top) op.edges.push_back({*top, id, "follows"});
  return op;
}

std::string heuristic_oracle(std::string_view graph_mermaid, const Chunk& chunk) {
  return serialize_graph_op(heuristic_op(from_mermaid(graph_mermaid), chunk));
}

Oracle make_heuristic_oracle() {
  return [](const OracleRequest& req) { return serialize_graph_op(heuristic_op(req.graph, req.chunk)); };
}

namespace {

void close_with_terminal(ReasoningGraph& g, BuildDiagnostics& diag) {
  if (auto top = g.max_id()) {
    const Node& last = g.node(*top);
    if (lower(trim(last.summary)) == kTerminalSummary) {
      if (last.summary != kTerminalSummary) g.update_summary(*top, std::string(kTerminalSummary));
      g.set_terminal(*top);
      return;
    }
  }
  auto top = g.max_id();
  NodeId id = top ? top->next() : NodeId::from_ordinal(0);
  std::vector<Edge> in;
  if (top) in.push_back({*top, id, "concludes"});
  g.insert_node(Node{id, std::string(kTerminalSummary), NodeType::Progress, {}}, in);
  g.set_terminal(id);
  diag.terminal_appended = true;
}

}  // namespace

ReasoningGraph build_graph(const ChunkedTrace& trace, const Oracle& oracle,
                           const OracleConfig& config, BuildDiagnostics* diagnostics) {
  BuildDiagnostics local;
  BuildDiagnostics& diag = diagnostics ? *diagnostics : local;
  const std::string& tmpl =
      config.prompt_template.empty() ? default_prompt_template() : config.prompt_template;

  ReasoningGraph g;
  for (const Chunk& chunk : trace.chunks) {
    MermaidOptions prompt_view{.metadata = false};
    std::string mermaid = to_mermaid(g, prompt_view);
    std::string base_prompt = render_prompt(tmpl, mermaid, chunk.text);
    std::vector<std::string> errors;
    bool applied = false;

    for (std::size_t attempt = 0; attempt <= config.max_retries && !applied; ++attempt) {
      OracleRequest req{g, mermaid, chunk, append_retry_feedback(base_prompt, errors), attempt};
      ++diag.oracle_calls;
      try {
        GraphOp op = parse_graph_op(oracle(req));
        apply_op(g, op, chunk, chunk_type_hint(chunk, op));
        applied = true;
      } catch (const Error& e) {
        // Bad credentials will not fix themselves on retry.
        if (e.code() == ErrorCode::AuthError) throw;
        ++diag.rejected_responses;
        errors.emplace_back(e.what());
      } catch (const std::exception& e) {
        ++diag.rejected_responses;
        errors.emplace_back(e.what());
      }
    }
    if (applied) continue;

    diag.errors.insert(diag.errors.end(), errors.begin(), errors.end());
    if (config.on_exhausted == ExhaustionPolicy::Fail) {
      throw Error(ErrorCode::OracleUnavailable,
                  "trace " + trace.trace.trace_id + " chunk " + std::to_string(chunk.index) +
                      ": no usable response after " + std::to_string(config.max_retries + 1) +
                      " attempts; last error: " + (errors.empty() ? "none" : errors.back()));
    }
    GraphOp fallback = heuristic_op(g, chunk);
    apply_op(g, fallback, chunk, chunk_type_hint(chunk, fallback));
    ++diag.fallback_inserts;
  }

  close_with_terminal(g, diag);
  if (auto v = validate(g); !v.empty()) {
    throw Error(ErrorCode::InvalidGraph, "trace " + trace.trace.trace_id + ": " +
                                             std::string(to_string(v.front().kind)) + " " +
                                             v.front().detail);
  }
  return g;
}

}  // namespace cotg
