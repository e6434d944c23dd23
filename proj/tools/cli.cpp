#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "cotg/constructor.hpp"
#include "cotg/error.hpp"
#include "cotg/json_io.hpp"
#include "cotg/llm_backend.hpp"
#include "cotg/mermaid.hpp"
#include "cotg/pruner.hpp"
#include "cotg/relinearize.hpp"
#include "cotg/scoring.hpp"
#include "cotg/stats.hpp"

namespace cotg::cli {
namespace {

constexpr std::size_t kBatchLines = 4096;

struct Settings {
  std::string triggers = "default";
  PruneParams prune;
  RewardParams reward;
  std::string backend = "heuristic";
  std::size_t oracle_retries = 2;
  std::string on_exhausted = "fallback_insert";
  std::string prompt_template;
  BackendConfig llm;
  std::string cache;
  std::size_t jobs = 1;
  bool skip_errors = false;
  std::string keywords;
};

struct IoArgs {
  std::string input;
  std::string out = "-";
};

std::string dump(const Json& j) {
  return j.dump(-1, ' ', false, nlohmann::detail::error_handler_t::replace);
}

std::string record_label(const Json& j) {
  for (const char* key : {"trace_id", "trajectory_id", "node_ref", "question_id"}) {
    if (j.is_object() && j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  }
  return {};
}

/// Output sink: a file, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorCode::IoError, "cannot write " + path);
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }
  std::string sidecar() const { return path_ == "-" ? "cotg.errors.jsonl" : path_ + ".errors.jsonl"; }

 private:
  std::string path_;
  std::ofstream file_;
};

/// Failed records, one JSON object per line, opened on first use.
class ErrorLog {
 public:
  explicit ErrorLog(std::string path) : path_(std::move(path)) {}
  void write(std::size_t line, const std::string& label, const std::string& message) {
    if (!file_.is_open()) {
      file_.open(path_, std::ios::trunc);
      if (!file_) throw Error(ErrorCode::IoError, "cannot write " + path_);
    }
    file_ << dump(Json{{"line", line}, {"record", label}, {"error", message}}) << '\n';
    ++count_;
  }
  std::size_t count() const { return count_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream file_;
  std::size_t count_ = 0;
};

struct Failure {
  std::string message;
};
using Outcome = std::variant<std::string, Failure>;

/// Runs `fn` over [0, n) on up to `jobs` threads; results keep index order.
template <class Fn>
std::vector<Outcome> parallel_map(std::size_t n, std::size_t jobs, Fn&& fn) {
  std::vector<Outcome> out(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (const std::exception& e) {
        out[i] = Failure{e.what()};
      }
    }
  };
  std::size_t threads = std::min(std::max<std::size_t>(jobs, 1), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  return out;
}

std::istream& open_input(const std::string& path, std::ifstream& file) {
  if (path == "-") return std::cin;
  file.open(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoError, "cannot read " + path);
  return file;
}

struct Line {
  std::size_t number;
  std::string text;
};

std::vector<Line> read_all_lines(const std::string& path) {
  std::ifstream file;
  std::istream& in = open_input(path, file);
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back({number, std::move(text)});
  }
  return lines;
}

/// Shared state for one invocation.
class Context {
 public:
  Context(const Settings& s, std::ostream& log) : settings(s), log(log) {}

  void prepare() {
    settings.prune.check();
    settings.reward.check();
    triggers = settings.triggers == "default" ? default_triggers() : load_triggers(settings.triggers);
    oracle_config.max_retries = settings.oracle_retries;
    oracle_config.on_exhausted = settings.on_exhausted == "fail" ? ExhaustionPolicy::Fail
                                                                 : ExhaustionPolicy::FallbackInsert;
    if (!settings.prompt_template.empty()) {
      std::ifstream in(settings.prompt_template);
      if (!in) throw Error(ErrorCode::IoError, "cannot read " + settings.prompt_template);
      std::ostringstream ss;
      ss << in.rdbuf();
      oracle_config.prompt_template = ss.str();
    }
    if (settings.backend == "llm") {
      oracle_config.backend = OracleBackend::Llm;
      BackendConfig cfg = settings.llm;
      if (!settings.cache.empty()) cfg.cache_path = settings.cache;
      client = std::make_unique<LlmClient>(cfg);
      oracle = make_llm_oracle(*client);
    } else {
      oracle = make_heuristic_oracle();
    }
  }

  void report_usage() const {
    if (!client) return;
    auto u = client->usage();
    log << "llm usage: " << u.requests << " requests, " << u.input_tokens << " input tokens, "
        << u.output_tokens << " output tokens, cost " << u.cost
        << (u.estimated ? " (estimated)" : "") << '\n';
  }

  ChunkedTrace chunked(const Json& rec) const { return chunked_trace_from_json(rec, triggers); }

  ReasoningGraph build(const ChunkedTrace& t, BuildDiagnostics* diag = nullptr) const {
    return build_graph(t, oracle, oracle_config, diag);
  }

  Settings settings;
  std::ostream& log;
  std::vector<std::string> triggers;
  OracleConfig oracle_config;
  std::unique_ptr<LlmClient> client;
  Oracle oracle;
};

/// Line-wise transform with batching, ordered output and the skip policy.
int run_records(Context& ctx, const IoArgs& io,
                const std::function<std::string(const Json&)>& transform) {
  std::ifstream file;
  std::istream& in = open_input(io.input, file);
  Output out(io.out);
  ErrorLog errors(out.sidecar());

  std::size_t number = 0;
  std::string text;
  bool eof = false;
  while (!eof) {
    std::vector<Line> batch;
    while (batch.size() < kBatchLines) {
      if (!std::getline(in, text)) {
        eof = true;
        break;
      }
      ++number;
      if (!text.empty() && text.back() == '\r') text.pop_back();
      if (text.find_first_not_of(" \t") == std::string::npos) continue;
      batch.push_back({number, std::move(text)});
    }
    auto results = parallel_map(batch.size(), ctx.settings.jobs, [&](std::size_t i) {
      return transform(parse_json_line(batch[i].text));
    });
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (auto* ok = std::get_if<std::string>(&results[i])) {
        out.stream() << *ok;
        continue;
      }
      const auto& msg = std::get<Failure>(results[i]).message;
      std::string label;
      try {
        label = record_label(parse_json_line(batch[i].text));
      } catch (const Error&) {
      }
      if (!ctx.settings.skip_errors) {
        ctx.log << "error: line " << batch[i].number << (label.empty() ? "" : " (" + label + ")")
                << ": " << msg << '\n';
        out.stream().flush();
        return 1;
      }
      errors.write(batch[i].number, label, msg);
    }
  }
  out.stream().flush();
  if (errors.count() > 0) {
    ctx.log << errors.count() << " record(s) failed; see " << errors.path() << '\n';
  }
  ctx.report_usage();
  return 0;
}

// --- trajectories -----------------------------------------------------------

struct TrajectoryInput {
  std::size_t line;
  Json record;
};

/// Flattens plain trajectory lines and {question_id, trajectories:[...]} lines.
std::vector<TrajectoryInput> read_trajectories(const std::string& path) {
  std::vector<TrajectoryInput> out;
  for (auto& line : read_all_lines(path)) {
    Json j = parse_json_line(line.text);
    if (j.is_object() && j.contains("trajectories")) {
      if (!j["trajectories"].is_array()) {
        throw SchemaViolation("trajectories", "expected an array (line " + std::to_string(line.number) + ")");
      }
      for (auto t : j["trajectories"]) {
        if (t.is_object() && !t.contains("question_id") && j.contains("question_id")) {
          t["question_id"] = j["question_id"];
        }
        if (t.is_object() && !t.contains("question") && j.contains("question")) {
          t["question"] = j["question"];
        }
        out.push_back({line.number, std::move(t)});
      }
    } else {
      out.push_back({line.number, std::move(j)});
    }
  }
  return out;
}

ScoredTrajectory trajectory_basics(const Json& j) {
  if (!j.is_object()) throw SchemaViolation("$", "expected an object");
  auto str = [&](const char* key, bool required) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) throw SchemaViolation(key, "missing");
      return {};
    }
    if (!it->is_string()) throw SchemaViolation(key, "expected a string");
    return it->get<std::string>();
  };
  ScoredTrajectory t;
  t.trajectory_id = str("trajectory_id", true);
  t.question_id = str("question_id", true);
  t.question = str("question", false);
  t.cot = str("cot", false);
  auto c = j.find("correct");
  if (c == j.end() || !c->is_boolean()) throw SchemaViolation("correct", "expected a boolean");
  t.correct = c->get<bool>();
  if (auto l = j.find("length"); l != j.end() && !l->is_null()) {
    if (!l->is_number_unsigned()) throw SchemaViolation("length", "expected a token count");
    t.length = l->get<std::size_t>();
  } else if (j.contains("cot")) {
    t.length = token_count(t.cot);
  } else {
    throw SchemaViolation("length", "need length or cot");
  }
  return t;
}

/// Fills review/node counts by building the trajectory's graph unless the
/// record already carries them.
void attach_graph_counts(const Context& ctx, const Json& j, ScoredTrajectory& t) {
  if (j.contains("review_count") && j.contains("node_count")) {
    t.review_count = j["review_count"].get<std::size_t>();
    t.node_count = j["node_count"].get<std::size_t>();
    return;
  }
  RawTrace raw{t.trajectory_id, t.question, t.cot, "", t.correct};
  auto g = ctx.build(chunk_trace(std::move(raw), ctx.triggers));
  t.review_count = g.review_count();
  t.node_count = g.size();
}

struct Group {
  std::string question_id;
  std::vector<std::size_t> members;  // indices into the flat list
};

std::vector<Group> group_by_question(const std::vector<ScoredTrajectory>& all) {
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto [it, fresh] = index.emplace(all[i].question_id, groups.size());
    if (fresh) groups.push_back({all[i].question_id, {}});
    groups[it->second].members.push_back(i);
  }
  return groups;
}

/// Loads trajectories and, when `need_scores`, computes graph counts and
/// redundancy for every group. Record failures follow the skip policy.
std::optional<std::vector<ScoredTrajectory>> load_scored(Context& ctx, const IoArgs& io,
                                                         ErrorLog& errors, bool need_scores) {
  auto inputs = read_trajectories(io.input);
  std::vector<std::optional<ScoredTrajectory>> parsed(inputs.size());
  auto results = parallel_map(inputs.size(), ctx.settings.jobs, [&](std::size_t i) {
    const Json& j = inputs[i].record;
    ScoredTrajectory t = trajectory_basics(j);
    if (need_scores) attach_graph_counts(ctx, j, t);
    parsed[i] = std::move(t);
    return std::string();
  });
  std::vector<ScoredTrajectory> all;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (auto* f = std::get_if<Failure>(&results[i])) {
      if (!ctx.settings.skip_errors) {
        ctx.log << "error: line " << inputs[i].line << ": " << f->message << '\n';
        return std::nullopt;
      }
      errors.write(inputs[i].line, record_label(inputs[i].record), f->message);
      continue;
    }
    all.push_back(std::move(*parsed[i]));
  }
  if (need_scores) {
    for (auto& g : group_by_question(all)) {
      std::vector<ScoredTrajectory> members;
      for (auto i : g.members) members.push_back(all[i]);
      score_group(members);
      for (std::size_t k = 0; k < members.size(); ++k) {
        all[g.members[k]].redundancy = members[k].redundancy;
      }
    }
  }
  return all;
}

int finish(Context& ctx, const ErrorLog& errors) {
  if (errors.count() > 0) {
    ctx.log << errors.count() << " record(s) failed; see " << errors.path() << '\n';
  }
  ctx.report_usage();
  return 0;
}

int cmd_score(Context& ctx, const IoArgs& io) {
  Output out(io.out);
  ErrorLog errors(out.sidecar());
  auto all = load_scored(ctx, io, errors, true);
  if (!all) return 1;
  for (const auto& t : *all) out.stream() << dump(to_json(t)) << '\n';
  return finish(ctx, errors);
}

int cmd_dpo(Context& ctx, const IoArgs& io) {
  Output out(io.out);
  ErrorLog errors(out.sidecar());
  auto all = load_scored(ctx, io, errors, true);
  if (!all) return 1;
  for (const auto& g : group_by_question(*all)) {
    std::vector<ScoredTrajectory> members;
    for (auto i : g.members) members.push_back((*all)[i]);
    if (auto pair = build_dpo_pairs(members)) out.stream() << dump(to_json(*pair)) << '\n';
  }
  return finish(ctx, errors);
}

int cmd_grpo(Context& ctx, const IoArgs& io) {
  Output out(io.out);
  ErrorLog errors(out.sidecar());
  auto all = load_scored(ctx, io, errors, false);
  if (!all) return 1;
  std::vector<std::optional<RewardRecord>> records(all->size());
  for (const auto& g : group_by_question(*all)) {
    std::vector<ScoredTrajectory> members;
    for (auto i : g.members) members.push_back((*all)[i]);
    auto rewards = grpo_rewards(members, ctx.settings.reward);
    for (std::size_t k = 0; k < rewards.size(); ++k) records[g.members[k]] = std::move(rewards[k]);
  }
  for (const auto& r : records) out.stream() << dump(to_json(*r)) << '\n';
  return finish(ctx, errors);
}

// --- line-wise commands -----------------------------------------------------

ReasoningGraph graph_field(const Json& rec, const char* key) {
  if (!rec.contains(key)) throw SchemaViolation(key, "record has no graph");
  return graph_from_json(rec[key]);
}

Json with(Json rec, const char* key, Json value) {
  rec[key] = std::move(value);
  return rec;
}

GraphPair stats_pair(const Context& ctx, const Json& rec) {
  if (rec.contains("nodes")) throw SchemaViolation("$", "stats needs trace records, not bare graphs");
  ChunkedTrace trace = ctx.chunked(rec);
  ReasoningGraph full = rec.contains("graph") ? graph_field(rec, "graph") : ctx.build(trace);
  ReasoningGraph pruned = rec.contains("pruned_graph") ? graph_field(rec, "pruned_graph")
                                                       : prune(full, ctx.settings.prune).graph;
  std::string pruned_cot = relinearize(pruned, trace);
  return {std::move(full), std::move(pruned), trace.trace.cot, std::move(pruned_cot)};
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(' ');
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(' ') - b + 1));
  }
  return out;
}

int cmd_stats(Context& ctx, const IoArgs& io) {
  Output out(io.out);
  ErrorLog errors(out.sidecar());
  auto lines = read_all_lines(io.input);
  std::vector<std::optional<GraphPair>> pairs(lines.size());
  std::vector<std::string> failures(lines.size());
  auto results = parallel_map(lines.size(), ctx.settings.jobs, [&](std::size_t i) {
    pairs[i] = stats_pair(ctx, parse_json_line(lines[i].text));
    return std::string();
  });
  std::vector<GraphPair> ok;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (auto* f = std::get_if<Failure>(&results[i])) {
      if (!ctx.settings.skip_errors) {
        ctx.log << "error: line " << lines[i].number << ": " << f->message << '\n';
        return 1;
      }
      errors.write(lines[i].number, "", f->message);
      continue;
    }
    ok.push_back(std::move(*pairs[i]));
  }
  auto stats = dataset_stats(ok);
  Json j = to_json(stats);

  std::vector<std::string> keywords =
      ctx.settings.keywords.empty() ? default_keywords() : split_csv(ctx.settings.keywords);
  std::vector<std::string> full_texts, pruned_texts;
  for (const auto& p : ok) {
    full_texts.push_back(p.full_cot);
    pruned_texts.push_back(p.pruned_cot);
  }
  auto freq_json = [](const std::vector<KeywordFrequency>& f) {
    Json o = Json::object();
    for (const auto& k : f) o[k.keyword] = k.mean_per_response;
    return o;
  };
  auto kf_full = keyword_frequencies(full_texts, keywords);
  auto kf_pruned = keyword_frequencies(pruned_texts, keywords);
  j["keywords"] = Json{{"full", freq_json(kf_full)}, {"pruned", freq_json(kf_pruned)}};

  out.stream() << dump(j) << '\n';
  ctx.log << format_stats_table(stats);
  ctx.log << "Keyword mean per response (full -> pruned):\n";
  for (std::size_t k = 0; k < keywords.size(); ++k) {
    ctx.log << "  " << keywords[k] << ": " << kf_full[k].mean_per_response << " -> "
            << kf_pruned[k].mean_per_response << '\n';
  }
  return finish(ctx, errors);
}

std::pair<std::string, std::string> split_node_ref(const std::string& ref) {
  auto pos = ref.find_last_of("/:");
  if (pos == std::string::npos || pos + 1 >= ref.size()) {
    throw SchemaViolation("node_ref", "expected <trace_id>/<node id>, got '" + ref + "'");
  }
  return {ref.substr(0, pos), ref.substr(pos + 1)};
}

int cmd_eval_labels(Context& ctx, const IoArgs& io, const std::string& graphs_path) {
  Output out(io.out);
  ErrorLog errors(out.sidecar());
  std::map<std::string, ReasoningGraph> graphs;
  if (!graphs_path.empty()) {
    for (auto& line : read_all_lines(graphs_path)) {
      Json rec = parse_json_line(line.text);
      if (!rec.contains("trace_id") || !rec.contains("graph")) continue;
      graphs.emplace(rec["trace_id"].get<std::string>(), graph_field(rec, "graph"));
    }
  }
  std::vector<NodeType> predicted, gold;
  std::vector<char> atomic;
  bool all_atomic_given = true;
  for (auto& line : read_all_lines(io.input)) {
    try {
      Json rec = parse_json_line(line.text);
      auto gold_type = rec.contains("gold_type") && rec["gold_type"].is_string()
                           ? parse_node_type(rec["gold_type"].get<std::string>())
                           : std::nullopt;
      if (!gold_type) throw SchemaViolation("gold_type", "expected progress or review");
      std::optional<NodeType> pred;
      if (rec.contains("predicted_type")) {
        pred = parse_node_type(rec["predicted_type"].get<std::string>());
        if (!pred) throw SchemaViolation("predicted_type", "expected progress or review");
      } else {
        if (!rec.contains("node_ref") || !rec["node_ref"].is_string()) {
          throw SchemaViolation("node_ref", "missing");
        }
        auto [trace_id, node] = split_node_ref(rec["node_ref"].get<std::string>());
        auto g = graphs.find(trace_id);
        if (g == graphs.end()) throw Error(ErrorCode::UnknownNode, "no graph for trace " + trace_id);
        pred = g->second.node(NodeId::parse(node)).type;
      }
      bool is_atomic = false;
      if (rec.contains("atomic") && rec["atomic"].is_boolean()) {
        is_atomic = rec["atomic"].get<bool>();
      } else {
        all_atomic_given = false;
      }
      predicted.push_back(*pred);
      gold.push_back(*gold_type);
      atomic.push_back(is_atomic ? 1 : 0);
    } catch (const std::exception& e) {
      if (!ctx.settings.skip_errors) {
        ctx.log << "error: line " << line.number << ": " << e.what() << '\n';
        return 1;
      }
      errors.write(line.number, "", e.what());
    }
  }
  std::unique_ptr<bool[]> flags(new bool[atomic.size()]);
  std::copy(atomic.begin(), atomic.end(), flags.get());
  std::optional<std::span<const bool>> atomic_span;
  if (all_atomic_given) atomic_span = std::span<const bool>(flags.get(), atomic.size());
  auto m = label_metrics(predicted, gold, atomic_span);
  out.stream() << dump(to_json(m)) << '\n';
  ctx.log << "class     precision  recall  f1\n";
  ctx.log << "review    " << m.review.precision << "  " << m.review.recall << "  " << m.review.f1 << '\n';
  ctx.log << "progress  " << m.progress.precision << "  " << m.progress.recall << "  "
          << m.progress.f1 << '\n';
  if (m.atomicity_rate) ctx.log << "atomicity valid: " << *m.atomicity_rate << '\n';
  return finish(ctx, errors);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& log) {
  Settings s;
  CLI::App app{"Reasoning-trace graph construction, pruning and reward tooling", "cotg"};
  app.set_config("--config", "", "Flat key = value file mirroring the long flags");
  app.require_subcommand(1);

  app.add_option("--triggers", s.triggers, "'default' or a file with one trigger per line")
      ->capture_default_str();
  app.add_option("--k", s.prune.k, "Branch threshold: prune review nodes with fewer descendants")
      ->capture_default_str();
  app.add_option("--m", s.prune.m, "Depth threshold on depth / terminal depth")->capture_default_str();
  app.add_option("--lambda", s.reward.lambda, "Length penalty weight")->capture_default_str();
  app.add_option("--delta", s.reward.delta, "Length tolerance margin in tokens")->capture_default_str();
  app.add_option("--gamma", s.reward.gamma, "Length penalty sharpness")->capture_default_str();
  app.add_option("--backend", s.backend, "Operation oracle")
      ->check(CLI::IsMember({"heuristic", "llm"}))
      ->capture_default_str();
  app.add_option("--oracle-retries", s.oracle_retries, "Retries per chunk after a rejected response")
      ->capture_default_str();
  app.add_option("--on-exhausted", s.on_exhausted, "Policy when retries run out")
      ->check(CLI::IsMember({"fallback_insert", "fail"}))
      ->capture_default_str();
  app.add_option("--prompt-template", s.prompt_template, "Override the graph-update prompt");
  app.add_option("--endpoint", s.llm.endpoint_url, "Chat-completion URL")->capture_default_str();
  app.add_option("--model", s.llm.model_name, "Model name")->capture_default_str();
  app.add_option("--api-key-env", s.llm.api_key_env_var, "Environment variable holding the API key")
      ->capture_default_str();
  app.add_option("--timeout", s.llm.timeout_seconds, "Request timeout in seconds")->capture_default_str();
  app.add_option("--max-concurrent", s.llm.max_concurrent_requests, "In-flight request bound")
      ->capture_default_str();
  app.add_option("--http-retries", s.llm.max_retries, "Retries on 429/5xx")->capture_default_str();
  app.add_option("--price-in", s.llm.price_per_1k_input_tokens, "Price per 1k input tokens");
  app.add_option("--price-out", s.llm.price_per_1k_output_tokens, "Price per 1k output tokens");
  app.add_option("--cache", s.cache, "On-disk response cache (JSONL)");
  app.add_option("--jobs", s.jobs, "Records processed in parallel")->capture_default_str();
  app.add_flag("--skip-errors", s.skip_errors, "Log failed records to <out>.errors.jsonl and continue");
  app.add_option("--keywords", s.keywords, "Comma-separated keywords for stats");

  IoArgs io;
  std::string which = "auto";
  std::string graphs_path;
  auto add_io = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("input", io.input, "Input JSONL ('-' for stdin)")->required();
    sub->add_option("--out,-o", io.out, "Output path ('-' for stdout)")->capture_default_str();
    return sub;
  };
  auto* chunk_cmd = add_io("chunk", "Split traces into step chunks");
  auto* build_cmd = add_io("build-graph", "Build a dependency graph per trace");
  auto* prune_cmd = add_io("prune", "Prune redundant review nodes");
  auto* relin_cmd = add_io("relinearize", "Emit SFT records from pruned graphs");
  auto* sft_cmd = add_io("make-sft", "chunk, build-graph, prune and relinearize in one pass");
  auto* score_cmd = add_io("score", "Redundancy score per sampled trajectory");
  auto* dpo_cmd = add_io("make-dpo-pairs", "Preference pairs from scored trajectories");
  auto* grpo_cmd = add_io("grpo-reward", "Length-penalised rewards per trajectory");
  auto* stats_cmd = add_io("stats", "Node/token statistics before and after pruning");
  auto* eval_cmd = add_io("eval-labels", "Node-type precision/recall/F1 against gold labels");
  eval_cmd->add_option("--graphs", graphs_path, "build-graph output used to resolve node_ref");
  auto* mermaid_cmd = add_io("export-mermaid", "Render graphs as Mermaid flowcharts");
  mermaid_cmd->add_option("--which", which, "Graph to render")
      ->check(CLI::IsMember({"auto", "full", "pruned"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, log, log);
    return code == 0 ? 0 : 2;
  }

  Context ctx(s, log);
  try {
    ctx.prepare();

    if (chunk_cmd->parsed()) {
      return run_records(ctx, io, [&](const Json& rec) { return dump(to_json(ctx.chunked(rec))) + "\n"; });
    }
    if (build_cmd->parsed()) {
      return run_records(ctx, io, [&](const Json& rec) {
        ChunkedTrace t = ctx.chunked(rec);
        BuildDiagnostics diag;
        auto g = ctx.build(t, &diag);
        Json outrec = to_json(t);
        outrec["graph"] = to_json(g);
        outrec["build"] = to_json(diag);
        return dump(outrec) + "\n";
      });
    }
    if (prune_cmd->parsed()) {
      return run_records(ctx, io, [&](const Json& rec) {
        if (rec.contains("nodes")) {
          auto r = prune(graph_from_json(rec), ctx.settings.prune);
          return dump(Json{{"pruned_graph", to_json(r.graph)}, {"prune_report", to_json(r.report)}}) + "\n";
        }
        auto r = prune(graph_field(rec, "graph"), ctx.settings.prune);
        Json outrec = with(rec, "pruned_graph", to_json(r.graph));
        outrec["prune_report"] = to_json(r.report);
        return dump(outrec) + "\n";
      });
    }
    if (relin_cmd->parsed()) {
      return run_records(ctx, io, [&](const Json& rec) {
        ChunkedTrace t = ctx.chunked(rec);
        auto g = rec.contains("pruned_graph") ? graph_field(rec, "pruned_graph") : graph_field(rec, "graph");
        return dump(to_json(build_sft_record(t, g))) + "\n";
      });
    }
    if (sft_cmd->parsed()) {
      return run_records(ctx, io, [&](const Json& rec) {
        ChunkedTrace t = ctx.chunked(rec);
        auto pruned = prune(ctx.build(t), ctx.settings.prune).graph;
        return dump(to_json(build_sft_record(t, pruned))) + "\n";
      });
    }
    if (mermaid_cmd->parsed()) {
      return run_records(ctx, io, [&](const Json& rec) {
        ReasoningGraph g;
        if (rec.contains("nodes")) {
          g = graph_from_json(rec);
        } else if (which == "full" || (which == "auto" && !rec.contains("pruned_graph"))) {
          g = graph_field(rec, "graph");
        } else {
          g = graph_field(rec, "pruned_graph");
        }
        std::string text;
        if (auto label = record_label(rec); !label.empty()) text += "%% trace_id: " + label + "\n";
        return text + to_mermaid(g) + "\n";
      });
    }
    if (score_cmd->parsed()) return cmd_score(ctx, io);
    if (dpo_cmd->parsed()) return cmd_dpo(ctx, io);
    if (grpo_cmd->parsed()) return cmd_grpo(ctx, io);
    if (stats_cmd->parsed()) return cmd_stats(ctx, io);
    if (eval_cmd->parsed()) return cmd_eval_labels(ctx, io, graphs_path);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace cotg::cli
