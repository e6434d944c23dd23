#pragma once

#include <optional>
#include <string>

#include "cotg/constructor.hpp"
#include "cotg/graph.hpp"
#include "cotg/pruner.hpp"
#include "cotg/relinearize.hpp"
#include "cotg/scoring.hpp"
#include "cotg/stats.hpp"
#include "cotg/trace.hpp"
#include "json.hpp"

namespace cotg {

/// Insertion-ordered so emitted records keep a stable, readable key order.
using Json = nlohmann::ordered_json;

Json to_json(const RawTrace& t);
/// Requires trace_id and cot; question/answer default to "", correct may be
/// absent or null. Throws SchemaViolation.
RawTrace raw_trace_from_json(const Json& j);

Json to_json(const Chunk& c);
Json to_json(const ChunkedTrace& t);  // trace fields plus "chunks"
/// Uses the record's "chunks" when present, otherwise splits with `triggers`.
ChunkedTrace chunked_trace_from_json(const Json& j, std::span<const std::string> triggers);

Json to_json(const ReasoningGraph& g);
/// Throws SchemaViolation on shape errors and Error(InvalidGraph) when the
/// decoded graph fails `validate` (unless `require_valid` is false).
ReasoningGraph graph_from_json(const Json& j, bool require_valid = true);

Json to_json(const PruneReport& r);
Json to_json(const SftRecord& r);
Json to_json(const ScoredTrajectory& t);
Json to_json(const RewardRecord& r);
Json to_json(const DpoPair& p);
Json to_json(const DatasetStats& s);
Json to_json(const LabelMetrics& m);
Json to_json(const BuildDiagnostics& d);

/// Parses one JSONL line; throws Error(MalformedJson).
Json parse_json_line(std::string_view line);

}  // namespace cotg
