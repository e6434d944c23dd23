#include "cotg/prompt.hpp"

namespace cotg {

const std::string& default_prompt_template() {
  static const std::string kTemplate = R"PROMPT(You are a chain-of-thought graph structure analysis and update module.
Given an existing `graph` and the current text segment `current_step`, you must incorporate `current_step` into the graph by choosing exactly one operation: Insert or Merge, and output strict JSON.

1. Inputs
- `graph`: an existing partial reasoning graph (Mermaid code).
- `current_step`: the current reasoning text segment (continuous content from the CoT).

2. Node Definition (Reasoning Unit)
- A node represents an abstract reasoning unit with:
  - Semantic completeness: a clear intent and its reasoning product (e.g., introducing a constraint, deriving a conclusion, setting a sub-goal, establishing a framework).
  - Abstraction: do not record low-level arithmetic/symbolic manipulation.
  - Dependability: its product can be referenced by later reasoning and creates dependencies.
- Forbidden: purely operational steps (substitution, expansion, simplification, step-by-step calculations) cannot be standalone nodes.

3. Independence Criteria
Treat `current_step` as a new reasoning unit (prefer Insert) if it satisfies any of:
- Goal introduction: introduces a new intermediate goal/subproblem.
- Product generation: yields a key conclusion/property/constraint/equivalence used later.
- Method switch: changes the reasoning strategy or framework.
- Structural advancement: adds structure (case split, construction, invariant/lemma framework).
- Branch initiation: starts a new attempt path (even if it fails); branch from still-valid ancestors.
If it only continues the same goal with minor details/restatement and produces no new product/structure, prefer Merge.

5. Update Operations
- Merge: Allowed only if `current_step` can be integrated into exactly one existing node while keeping it abstract and single-purpose.
  Hard constraints: Review content cannot be merged into a progress node; Do not merge if it causes one node to mix "advance" and "reflect" as major functions.
  Must specify `target_node` and `updated_node_description`.
- Insert: Required if `current_step` meets independence criteria, introduces a new branch/framework, or Merge would harm abstraction/readability.
  Must create a new node and add necessary dependency edges.

6. Edge Construction Rules
- Dependency principle: if node B uses products from node A, add edge A -> B with a clear dependency label.
- Branch origin principle: new attempts must branch from still-valid ancestor products, not from negated/dead-end nodes.
- Ordering constraints:
  - Node IDs increase lexicographically: A-Z, AA-AZ, BA-BZ, ...
  - Edges must go from lexicographically smaller IDs to larger IDs.
  - The final node must be named final answer.

7. Output Format (Strict JSON)
{
  "decision": "Insert or Merge",
  "target_node": "(If Merge, the node ID to merge into; if Insert, leave empty)",
  "new_node": {
    "id": "(If Insert, a unique ID; if Merge, leave empty)",
    "description": "(If Insert, a concise description of the new node; if Merge, leave empty)",
    "type": "progress or review"
  },
  "edges": [
    {
      "from": "source node ID",
      "to": "target node ID",
      "label": "meaning of the edge"
    }
  ],
  "updated_node_description": "(If Merge, the new description; if Insert, leave empty)"
}

Your Turn:
Existing Graph: {{ graph }}
Current Step: {{ current_step }}
Your Response:
)PROMPT";
  return kTemplate;
}

namespace {

std::string_view trim_spaces(std::string_view s) {
  auto b = s.find_first_not_of(' ');
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(' ') - b + 1);
}

}  // namespace

std::string render_prompt(std::string_view prompt_template, std::string_view graph_mermaid,
                          std::string_view current_step) {
  std::string out;
  std::size_t pos = 0;
  while (pos < prompt_template.size()) {
    auto open = prompt_template.find("{{", pos);
    if (open == std::string_view::npos) break;
    auto close = prompt_template.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    auto name = trim_spaces(prompt_template.substr(open + 2, close - open - 2));
    out.append(prompt_template.substr(pos, open - pos));
    if (name == "graph") {
      out.append(graph_mermaid);
    } else if (name == "current_step") {
      out.append(current_step);
    } else {
      out.append(prompt_template.substr(open, close + 2 - open));
    }
    pos = close + 2;
  }
  if (pos < prompt_template.size()) out.append(prompt_template.substr(pos));
  return out;
}

std::string append_retry_feedback(std::string prompt, std::span<const std::string> errors) {
  if (errors.empty()) return prompt;
  prompt += "\nYour previous response was rejected:\n";
  for (const auto& e : errors) {
    prompt += "- ";
    prompt += e;
    prompt += '\n';
  }
  prompt += "Respond again with a single strict JSON object that fixes these problems.\n";
  return prompt;
}

}  // namespace cotg
