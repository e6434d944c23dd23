#pragma once

#include <string>
#include <string_view>

#include "cotg/graph.hpp"

namespace cotg {

struct MermaidOptions {
  /// Emit `%% chunks` / `%% terminal` comment lines so that `from_mermaid`
  /// can restore chunk provenance and the terminal. Prompts omit them.
  bool metadata = true;
};

/// `graph TD` flowchart: one `ID["summary"]:::type` line per node, one
/// `A -->|label| B` line per edge. Text is entity-escaped (`#quot;`,
/// `#124;`, `#35;`, `#10;`, `#13;`).
std::string to_mermaid(const ReasoningGraph& g, const MermaidOptions& options = {});

/// Parses the dialect emitted by `to_mermaid`. Throws ParseError carrying
/// the 1-based line of the first problem.
ReasoningGraph from_mermaid(std::string_view text);

std::string mermaid_escape(std::string_view text);
std::string mermaid_unescape(std::string_view text);

}  // namespace cotg
