#include "cotg/relinearize.hpp"

#include <set>

#include "cotg/error.hpp"

namespace cotg {

std::string relinearize(const ReasoningGraph& g, const ChunkedTrace& trace) {
  std::set<std::size_t> kept;
  for (const auto& [id, node] : g.nodes()) {
    for (auto c : node.chunk_indices) {
      if (c >= trace.chunks.size()) {
        throw Error(ErrorCode::DanglingChunkIndex,
                    "node " + id.str() + " references chunk " + std::to_string(c) + " of " +
                        std::to_string(trace.chunks.size()));
      }
      kept.insert(c);
    }
  }
  std::string out;
  for (auto c : kept) out += trace.chunks[c].text;
  return out;
}

SftRecord build_sft_record(const ChunkedTrace& trace, const ReasoningGraph& pruned,
                           const TokenCounter& count) {
  SftRecord r;
  r.trace_id = trace.trace.trace_id;
  r.question = trace.trace.question;
  r.pruned_cot = relinearize(pruned, trace);
  r.answer = trace.trace.answer;
  r.tokens_before = count(trace.trace.cot);
  r.tokens_after = count(r.pruned_cot);
  return r;
}

}  // namespace cotg
