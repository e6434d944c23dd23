#pragma once

#include <cstddef>
#include <string>

#include "cotg/graph.hpp"
#include "cotg/trace.hpp"

namespace cotg {

/// Original text of every chunk still held by a node of `g`, in ascending
/// chunk order. Throws Error(DanglingChunkIndex) for an index outside the
/// trace.
std::string relinearize(const ReasoningGraph& g, const ChunkedTrace& trace);

struct SftRecord {
  std::string trace_id;
  std::string question;
  std::string pruned_cot;
  std::string answer;
  std::size_t tokens_before = 0;
  std::size_t tokens_after = 0;

  bool operator==(const SftRecord&) const = default;
};

SftRecord build_sft_record(const ChunkedTrace& trace, const ReasoningGraph& pruned,
                           const TokenCounter& count = default_token_counter());

}  // namespace cotg
