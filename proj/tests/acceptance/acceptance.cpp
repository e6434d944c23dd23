// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Reference values come from the independent oracles in
// tests/support, never from the code under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "cotg/constructor.hpp"
#include "cotg/error.hpp"
#include "cotg/llm_backend.hpp"
#include "cotg/pruner.hpp"
#include "cotg/relinearize.hpp"
#include "cotg/scoring.hpp"
#include "cotg/stats.hpp"
#include "golden_ops.hpp"
#include "oracles.hpp"
#include "stub_server.hpp"

using namespace cotg;
using namespace std::chrono_literals;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

NodeId nth(std::size_t i) { return NodeId::from_ordinal(i); }

std::string str(const std::set<NodeId>& s) {
  std::string out = "{";
  for (const auto& v : s) out += (out.size() > 1 ? "," : "") + v.str();
  return out + "}";
}

ReasoningGraph make(const std::string& types, std::vector<std::pair<int, int>> edges) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < types.size(); ++i) {
    bool last = i + 1 == types.size();
    nodes.push_back({nth(i), last ? "final answer" : "s" + std::to_string(i),
                     types[i] == 'R' ? NodeType::Review : NodeType::Progress,
                     last ? std::vector<std::size_t>{} : std::vector<std::size_t>{i}});
  }
  std::vector<Edge> es;
  for (auto [a, b] : edges) es.push_back({nth(a), nth(b), "e"});
  std::sort(es.begin(), es.end(), [](const Edge& x, const Edge& y) {
    return std::tie(x.from, x.to) < std::tie(y.from, y.to);
  });
  return ReasoningGraph::from_parts(nodes, es, nth(types.size() - 1));
}

// 1 ---------------------------------------------------------------------------
Verdict chunking_losslessness() {
  Verdict v;
  std::mt19937_64 rng(1001);
  auto t0 = std::chrono::steady_clock::now();
  std::size_t chunks = 0;
  for (int i = 0; i < 1000; ++i) {
    auto cot = oracle::random_cot(rng, rng() % 120);
    auto parts = split_cot(cot);
    std::string joined;
    for (const auto& c : parts) joined += c.text;
    chunks += parts.size();
    if (joined != cot) v.fail("case " + std::to_string(i) + " not lossless");
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 5.0) v.fail("took " + std::to_string(secs) + " s");
  if (v.pass) {
    std::ostringstream os;
    os << "1000 traces, " << chunks << " chunks, " << secs << " s";
    v.detail = os.str();
  }
  return v;
}

// 2 ---------------------------------------------------------------------------
Verdict graph_query_oracle() {
  Verdict v;
  std::size_t compared = 0;
  for (int seed = 0; seed < 500; ++seed) {
    std::mt19937_64 rng(seed);
    auto g = oracle::random_graph(rng, {1, 8, 0.35, 0.5});
    if (!validate(g).empty()) v.fail("generator produced an invalid graph");
    auto d = oracle::depths(g);
    for (const auto& [id, n] : g.nodes()) {
      auto brute = oracle::descendants(g, id);
      if (descendants(g, id) != brute) v.fail("descendants(" + id.str() + ") seed " + std::to_string(seed));
      if (descendant_count(g, id) != brute.size()) v.fail("descendant_count seed " + std::to_string(seed));
      if (depth(g, id) != d.at(id)) v.fail("depth(" + id.str() + ") seed " + std::to_string(seed));
      ++compared;
    }
    if (max_depth(g) != d.at(*g.terminal())) v.fail("max_depth seed " + std::to_string(seed));
  }
  if (v.pass) v.detail = "500 seeds, " + std::to_string(compared) + " nodes compared";
  return v;
}

// 3 ---------------------------------------------------------------------------
Verdict pruning_boundaries() {
  Verdict v;
  const PruneParams defaults;
  if (defaults.k != 2 || defaults.m != 0.9) v.fail("defaults are not k=2, m=0.9");

  auto expect = [&](const char* name, const ReasoningGraph& g, std::set<NodeId> removed) {
    if (!validate(g).empty()) return v.fail(std::string(name) + ": fixture invalid");
    auto r = prune(g, defaults);
    if (r.report.removed() != removed) {
      v.fail(std::string(name) + ": removed " + str(r.report.removed()) + ", expected " + str(removed));
    }
    if (!validate(r.graph).empty()) v.fail(std::string(name) + ": output invalid");
  };

  // Branch boundary: review with exactly two descendants (B=2) survives; a
  // review leaf beside the chain (B=0) goes.
  expect("branch B=2", make("PRPP", {{0, 1}, {1, 2}, {2, 3}}), {});
  expect("branch leaf", make("PRPP", {{0, 1}, {0, 2}, {2, 3}}), {nth(1)});

  // Depth boundary on a chain with d_max = 20: a review at d=18 (0.90) stays.
  std::string types(21, 'P');
  std::vector<std::pair<int, int>> chain;
  for (int i = 1; i <= 20; ++i) chain.push_back({i - 1, i});
  auto at18 = types;
  at18[18] = 'R';
  expect("depth 0.90", make(at18, chain), {});

  // A review at d=19 with two descendants is caught by depth alone (0.95).
  std::string t22(22, 'P');
  t22[19] = 'R';
  std::vector<std::pair<int, int>> deep;
  for (int i = 1; i <= 19; ++i) deep.push_back({i - 1, i});
  deep.push_back({19, 20});
  deep.push_back({19, 21});
  deep.push_back({18, 20});
  deep.push_back({20, 21});
  auto g19 = make(t22, deep);
  if (find_branch_redundant(g19, 2).contains(nth(19))) v.fail("depth 0.95 fixture also trips branch");
  if (max_depth(g19) != 20 || depth(g19, nth(19)) != 19) v.fail("depth 0.95 fixture has wrong depths");
  expect("depth 0.95", g19, {nth(19)});

  // Bypass example: A -> R -> C(terminal) loses R and gains A -> C.
  auto bypass = make("PRP", {{0, 1}, {1, 2}});
  expect("bypass", bypass, {nth(1)});
  auto r = prune(bypass, defaults);
  if (!r.graph.has_edge(nth(0), nth(2))) v.fail("bypass edge A->C missing");

  if (v.pass) v.detail = "5 fixtures, removal sets exact";
  return v;
}

// 4 ---------------------------------------------------------------------------
Verdict pruning_safety() {
  Verdict v;
  std::mt19937_64 rng(4004);
  std::size_t removed_total = 0;
  for (int i = 0; i < 500; ++i) {
    auto g = oracle::random_graph(rng, {1, 12, 0.3, 0.5});
    auto r = prune(g);
    const std::string tag = " (graph " + std::to_string(i) + ")";
    if (auto viol = validate(r.graph); !viol.empty()) v.fail("validate: " + viol.front().detail + tag);
    if (r.graph.terminal() != g.terminal()) v.fail("terminal changed" + tag);
    bool reachable = false;
    for (const auto& s : r.graph.sources()) reachable |= oracle::reaches(r.graph, s, *g.terminal());
    if (!reachable) v.fail("terminal unreachable" + tag);

    auto flagged = oracle::branch_redundant(g, 2);
    auto deep = oracle::depth_redundant(g, 0.9);
    flagged.insert(deep.begin(), deep.end());
    for (const auto& id : r.report.removed()) {
      ++removed_total;
      if (r.graph.contains(id)) v.fail("removed node still present" + tag);
      if (g.node(id).type == NodeType::Review) continue;
      if (!oracle::only_through(g, id, flagged)) {
        v.fail("progress node " + id.str() + " removed but reachable around pruned reviews" + tag);
      }
    }
    for (const auto& [id, n] : g.nodes()) {
      if (!r.report.removed().contains(id) && !r.graph.contains(id)) v.fail("node vanished" + tag);
    }
  }
  if (v.pass) v.detail = "500 graphs, " + std::to_string(removed_total) + " removals checked";
  return v;
}

// 5 ---------------------------------------------------------------------------
Verdict relinearization_round_trip() {
  Verdict v;
  std::mt19937_64 rng(5005);
  for (int i = 0; i < 200; ++i) {
    auto cot = i % 2 ? oracle::random_sentences(rng, rng() % 40) : oracle::random_cot(rng, rng() % 60);
    auto t = chunk_trace({"t" + std::to_string(i), "q", cot, "a", true}, default_triggers());
    auto g = build_graph(t, make_heuristic_oracle(), {});
    if (relinearize(g, t) != cot) v.fail("trace " + std::to_string(i) + " differs");
  }
  if (v.pass) v.detail = "200 traces byte-identical";
  return v;
}

ScoredTrajectory traj(std::string id, bool correct, std::size_t length) {
  ScoredTrajectory t;
  t.trajectory_id = std::move(id);
  t.question_id = "q";
  t.correct = correct;
  t.length = length;
  return t;
}

// 6 ---------------------------------------------------------------------------
Verdict grpo_formula() {
  Verdict v;
  std::vector<ScoredTrajectory> worked = {traj("shortest", true, 1000), traj("y", true, 1650)};
  auto r = grpo_rewards(worked, {0.5, 100, 2});
  if (std::abs(r[1].reward - 0.875) > 1e-12) v.fail("worked example gave " + std::to_string(r[1].reward));
  if (std::abs(r[1].delta - 0.5) > 1e-12 || std::abs(r[1].r_length - 0.25) > 1e-12) v.fail("delta/r_length off");

  std::mt19937_64 rng(6006);
  for (int i = 0; i < 1000; ++i) {
    std::vector<ScoredTrajectory> g;
    std::size_t n = 1 + rng() % 10;
    for (std::size_t k = 0; k < n; ++k) g.push_back(traj(std::to_string(k), rng() % 3 != 0, rng() % 5000));
    RewardParams p{double(rng() % 101) / 100.0, double(rng() % 500), 1.0 + double(rng() % 40) / 10.0};
    auto rw = grpo_rewards(g, p);
    auto lstar = shortest_correct_length(g);
    for (std::size_t k = 0; k < n; ++k) {
      if (!g[k].correct) {
        if (rw[k].reward != 0.0) v.fail("gate violated");
        continue;
      }
      if (double(g[k].length) <= double(*lstar) + p.delta && rw[k].reward != 1.0) v.fail("plateau violated");
      for (std::size_t j = 0; j < n; ++j) {
        if (g[j].correct && g[j].length > g[k].length && rw[j].reward > rw[k].reward) {
          v.fail("reward increases with length");
        }
      }
    }
  }
  if (v.pass) v.detail = "reward 0.875 exact; gate, plateau, monotonicity on 1000 groups";
  return v;
}

// 7 ---------------------------------------------------------------------------
Verdict redundancy_and_pairs() {
  Verdict v;
  if (redundancy_score(4, 10, 1200, 1000) != 1.6) v.fail("(4,10,1200,1000) != 1.6");
  if (redundancy_score(0, 5, 1000, 1000) != 1.0) v.fail("(0,5,1000,1000) != 1.0");
  if (redundancy_score(5, 5, 500, 1000) != 1.5) v.fail("(5,5,500,1000) != 1.5");

  std::mt19937_64 rng(7007);
  std::size_t pairs = 0, silent = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<ScoredTrajectory> g;
    std::size_t n = 1 + rng() % 8;
    for (std::size_t k = 0; k < n; ++k) {
      auto t = traj("t" + std::to_string(rng() % 50), rng() % 2, 1 + rng() % 3000);
      t.node_count = 1 + rng() % 30;
      t.review_count = rng() % (t.node_count + 1);
      g.push_back(t);
    }
    score_group(g);
    std::size_t correct = 0;
    for (const auto& t : g) correct += t.correct;
    auto p = build_dpo_pairs(g);
    if (correct < 2) {
      if (p) v.fail("pair emitted with fewer than 2 correct");
      ++silent;
      continue;
    }
    if (!p) continue;
    ++pairs;
    if (!p->preferred.correct || !p->dispreferred.correct) v.fail("pair member not correct");
    if (p->preferred.redundancy > p->dispreferred.redundancy) v.fail("R(y+) > R(y-)");
  }
  if (v.pass) {
    v.detail = "worked examples exact; " + std::to_string(pairs) + " pairs ordered, " +
               std::to_string(silent) + " small groups silent";
  }
  return v;
}

// 8 ---------------------------------------------------------------------------
Verdict metric_consistency() {
  Verdict v;
  double f1 = f1_score(0.9048, 0.9661);
  if (std::abs(f1 - 0.9344) > 5e-5) v.fail("F1 = " + std::to_string(f1));
  if (v.pass) {
    std::ostringstream os;
    os.precision(6);
    os << "F1 = " << f1;
    v.detail = os.str();
  }
  return v;
}

// 9 ---------------------------------------------------------------------------
Verdict compression_direction() {
  Verdict v;
  std::mt19937_64 rng(9009);
  std::vector<GraphPair> pairs;
  std::size_t pruned_traces = 0;
  for (int i = 0; i < 300; ++i) {
    auto t = chunk_trace({"t", "q", oracle::random_sentences(rng, 5 + rng() % 40, 0.4), "a", true},
                         default_triggers());
    auto full = build_graph(t, make_heuristic_oracle(), {});
    auto r = prune(full);
    auto full_text = relinearize(full, t);
    auto pruned_text = relinearize(r.graph, t);
    if (!r.report.empty()) {
      ++pruned_traces;
      if (!(token_count(pruned_text) < token_count(full_text))) v.fail("pruning did not reduce tokens");
    }
    pairs.push_back({full, r.graph, full_text, pruned_text});
  }
  auto s = dataset_stats(pairs);
  if (!(s.pruned.avg_nodes < s.full.avg_nodes)) v.fail("avg nodes not reduced");
  if (!(s.pruned.avg_review_nodes < s.full.avg_review_nodes)) v.fail("avg review nodes not reduced");
  if (pruned_traces > 0 && !(s.pruned.avg_tokens < s.full.avg_tokens)) v.fail("avg tokens not reduced");
  if (v.pass) {
    std::ostringstream os;
    os.precision(4);
    os << "nodes " << s.full.avg_nodes << " -> " << s.pruned.avg_nodes << ", review "
       << s.full.avg_review_nodes << " -> " << s.pruned.avg_review_nodes << ", tokens "
       << s.full.avg_tokens << " -> " << s.pruned.avg_tokens;
    v.detail = os.str();
  }
  return v;
}

// 10 --------------------------------------------------------------------------
Verdict protocol_conformance() {
  Verdict v;
  auto cases = golden::cases();
  if (cases.size() < 20) v.fail("only " + std::to_string(cases.size()) + " golden cases");
  std::size_t ok = 0;
  for (const auto& c : cases) {
    auto outcome = golden::run(c);
    if (outcome.passed) ++ok;
    else v.fail(c.name + ": " + outcome.detail);
  }
  if (v.pass) v.detail = std::to_string(ok) + "/" + std::to_string(cases.size()) + " golden responses";
  return v;
}

// 11 --------------------------------------------------------------------------
Verdict backend_robustness() {
  Verdict v;
  ::setenv("COTG_ACCEPTANCE_KEY", "sk-local", 1);
  auto base = [](const stub::Server& s) {
    BackendConfig c;
    c.endpoint_url = s.url();
    c.api_key_env_var = "COTG_ACCEPTANCE_KEY";
    c.timeout_seconds = 5;
    c.backoff_initial_seconds = 0.05;
    c.backoff_max_seconds = 0.5;
    return c;
  };

  {  // 429 and 5xx retried with growing waits, then success.
    stub::Server s({stub::status(429), stub::status(503), stub::completion("ok", 5, 2)});
    LlmClient client(base(s));
    auto t0 = std::chrono::steady_clock::now();
    auto c = client.complete("p");
    auto waited = std::chrono::steady_clock::now() - t0;
    if (c.text != "ok") v.fail("retry sequence did not succeed");
    if (s.request_count() != 3) v.fail("expected 3 attempts, saw " + std::to_string(s.request_count()));
    if (waited < 150ms) v.fail("no backoff between retries");
  }
  {  // In-flight bound and ledger totals.
    stub::Server s({stub::completion("r", 7, 3, 50ms)});
    auto cfg = base(s);
    cfg.max_concurrent_requests = 3;
    cfg.price_per_1k_input_tokens = 1.5;
    cfg.price_per_1k_output_tokens = 4.0;
    LlmClient client(cfg);
    std::vector<UsageDelta> deltas(16);
    {
      std::vector<std::jthread> pool;
      for (std::size_t i = 0; i < deltas.size(); ++i) {
        pool.emplace_back([&, i] { deltas[i] = client.complete("p" + std::to_string(i)).usage; });
      }
    }
    if (s.peak_in_flight() > 3) v.fail("peak in flight " + std::to_string(s.peak_in_flight()) + " > 3");
    UsageDelta sum;
    for (const auto& d : deltas) sum += d;
    auto total = client.usage();
    if (total.requests != sum.requests || total.input_tokens != sum.input_tokens ||
        total.output_tokens != sum.output_tokens || std::abs(total.cost - sum.cost) > 1e-12) {
      v.fail("ledger differs from the sum of per-request deltas");
    }
    if (total.requests != 16) v.fail("ledger counted " + std::to_string(total.requests) + " requests");
    if (v.pass) {
      v.detail = "retries with backoff; peak in flight " + std::to_string(s.peak_in_flight()) +
                 "/3; ledger = sum of 16 deltas";
    }
  }
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {"chunking losslessness", chunking_losslessness},
      {"graph-query oracle equivalence", graph_query_oracle},
      {"pruning defaults and strictness", pruning_boundaries},
      {"pruning safety", pruning_safety},
      {"relinearization round trip", relinearization_round_trip},
      {"GRPO reward formula", grpo_formula},
      {"redundancy score and DPO pairing", redundancy_and_pairs},
      {"F1 metric consistency", metric_consistency},
      {"compression direction", compression_direction},
      {"protocol conformance", protocol_conformance},
      {"backend robustness", backend_robustness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].check();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].name;
    if (!v.detail.empty()) std::cout << ": " << v.detail;
    std::cout << '\n';
    failed += v.pass ? 0 : 1;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
