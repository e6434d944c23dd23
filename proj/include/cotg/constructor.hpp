#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotg/graph.hpp"
#include "cotg/trace.hpp"

namespace cotg {

enum class Decision { Insert, Merge };

struct NewNodeSpec {
  NodeId id;
  std::string description;
  NodeType type = NodeType::Progress;

  bool operator==(const NewNodeSpec&) const = default;
};

/// One insert/merge decision, field-for-field the oracle's JSON schema.
/// `declared_type` is the `new_node.type` value, which a merge response may
/// fill even though `new_node` is otherwise empty.
struct GraphOp {
  Decision decision = Decision::Insert;
  std::optional<NodeId> target_node;
  std::optional<NewNodeSpec> new_node;
  std::vector<Edge> edges;
  std::optional<std::string> updated_node_description;
  std::optional<NodeType> declared_type;

  bool operator==(const GraphOp&) const = default;
};

/// Removes a surrounding ``` / ```json fence and outer whitespace.
std::string_view strip_code_fence(std::string_view raw);

/// Strict parse of an oracle response. Empty strings count as absent.
/// Throws Error(MalformedJson), SchemaViolation, Error(InconsistentDecision).
GraphOp parse_graph_op(std::string_view raw);
std::string serialize_graph_op(const GraphOp& op);

/// Review when the chunk opens with a reflective trigger, otherwise the
/// op's declared type (progress when undeclared).
NodeType chunk_type_hint(const Chunk& chunk, const GraphOp& op);

/// Applies `op` for `chunk`. Merging review content into a progress node
/// throws Error(MergeConstraintViolation); graph errors pass through.
/// Strong exception guarantee.
void apply_op(ReasoningGraph& g, const GraphOp& op, const Chunk& chunk, NodeType chunk_type_hint);

struct OracleRequest {
  const ReasoningGraph& graph;
  std::string graph_mermaid;
  const Chunk& chunk;
  std::string prompt;
  std::size_t attempt = 0;
};

/// Returns the raw response text for one request; may throw.
using Oracle = std::function<std::string(const OracleRequest&)>;

enum class OracleBackend { Llm, Heuristic };
enum class ExhaustionPolicy { FallbackInsert, Fail };

struct OracleConfig {
  OracleBackend backend = OracleBackend::Heuristic;
  std::size_t max_retries = 2;
  ExhaustionPolicy on_exhausted = ExhaustionPolicy::FallbackInsert;
  std::string prompt_template;  // empty selects the built-in template
};

/// Deterministic offline oracle: always inserts a node summarised by the
/// chunk's first 12 words, typed review for reflective triggers, with one
/// edge from the current maximum id.
std::string heuristic_oracle(std::string_view graph_mermaid, const Chunk& chunk);
Oracle make_heuristic_oracle();

/// The insert op `heuristic_oracle` would emit for `g`.
GraphOp heuristic_op(const ReasoningGraph& g, const Chunk& chunk);

struct BuildDiagnostics {
  std::size_t oracle_calls = 0;
  std::size_t rejected_responses = 0;
  std::size_t fallback_inserts = 0;
  bool terminal_appended = false;
  std::vector<std::string> errors;
};

/// Folds the chunks into a graph one oracle decision at a time, retrying
/// rejected responses with their errors appended to the prompt, and closes
/// the graph with a "final answer" terminal.
ReasoningGraph build_graph(const ChunkedTrace& trace, const Oracle& oracle,
                           const OracleConfig& config, BuildDiagnostics* diagnostics = nullptr);

inline constexpr std::size_t kSummaryWords = 12;

}  // namespace cotg
