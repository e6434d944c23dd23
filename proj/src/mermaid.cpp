#include "cotg/mermaid.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <sstream>

#include "cotg/error.hpp"

namespace cotg {
namespace {

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Leading run of uppercase letters.
std::string_view take_id(std::string_view& s) {
  std::size_t n = 0;
  while (n < s.size() && s[n] >= 'A' && s[n] <= 'Z') ++n;
  auto id = s.substr(0, n);
  s.remove_prefix(n);
  return id;
}

struct PendingEdge {
  Edge edge;
  int line;
};

}  // namespace

std::string mermaid_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '#': out += "#35;"; break;
      case '"': out += "#quot;"; break;
      case '|': out += "#124;"; break;
      case '\n': out += "#10;"; break;
      case '\r': out += "#13;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string mermaid_unescape(std::string_view text) {
  static const std::map<std::string_view, char> kNamed = {{"quot", '"'}, {"amp", '&'},
                                                         {"lt", '<'},    {"gt", '>'}};
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '#') {
      auto semi = text.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 6) {
        auto body = text.substr(i + 1, semi - i - 1);
        if (auto it = kNamed.find(body); it != kNamed.end()) {
          out += it->second;
          i = semi;
          continue;
        }
        unsigned code = 0;
        auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), code);
        if (ec == std::errc() && p == body.data() + body.size() && !body.empty() && code < 128) {
          out += static_cast<char>(code);
          i = semi;
          continue;
        }
      }
    }
    out += text[i];
  }
  return out;
}

std::string to_mermaid(const ReasoningGraph& g, const MermaidOptions& options) {
  std::ostringstream os;
  os << "graph TD\n";
  for (const auto& [id, n] : g.nodes()) {
    os << "    " << id.str() << "[\"" << mermaid_escape(n.summary) << "\"]:::" << to_string(n.type)
       << '\n';
  }
  for (const auto& e : g.edges()) {
    os << "    " << e.from.str();
    if (e.label.empty()) {
      os << " --> ";
    } else {
      os << " -->|" << mermaid_escape(e.label) << "| ";
    }
    os << e.to.str() << '\n';
  }
  if (options.metadata) {
    for (const auto& [id, n] : g.nodes()) {
      if (n.chunk_indices.empty()) continue;
      os << "%% chunks " << id.str();
      for (auto c : n.chunk_indices) os << ' ' << c;
      os << '\n';
    }
    if (g.terminal()) os << "%% terminal " << g.terminal()->str() << '\n';
  }
  return os.str();
}

ReasoningGraph from_mermaid(std::string_view text) {
  std::map<NodeId, std::pair<Node, int>> nodes;
  std::vector<PendingEdge> edges;
  std::map<NodeId, std::pair<std::vector<std::size_t>, int>> chunks;
  std::optional<std::pair<NodeId, int>> terminal;
  bool header = false;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;

    if (line.starts_with("%%")) {
      auto body = trim(line.substr(2));
      std::istringstream is{std::string(body)};
      std::string kind, id;
      is >> kind;
      if (kind != "chunks" && kind != "terminal") continue;
      if (!(is >> id) || !NodeId::is_valid(id)) throw ParseError(line_no, "bad node id in metadata");
      if (kind == "terminal") {
        terminal.emplace(NodeId::parse(id), line_no);
        continue;
      }
      std::vector<std::size_t> idx;
      std::string tok;
      while (is >> tok) {
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) {
          throw ParseError(line_no, "bad chunk index '" + tok + "'");
        }
        idx.push_back(v);
      }
      chunks[NodeId::parse(id)] = {std::move(idx), line_no};
      continue;
    }

    if (!header) {
      if (line != "graph TD" && line != "flowchart TD") {
        throw ParseError(line_no, "expected 'graph TD' header");
      }
      header = true;
      continue;
    }

    std::string_view rest = line;
    auto first = take_id(rest);
    if (first.empty()) throw ParseError(line_no, "expected a node id");

    if (rest.starts_with("[\"")) {
      auto close = rest.rfind("\"]:::");
      if (close == std::string_view::npos || close < 2) {
        throw ParseError(line_no, "malformed node line");
      }
      auto summary = mermaid_unescape(rest.substr(2, close - 2));
      auto type = parse_node_type(trim(rest.substr(close + 5)));
      if (!type) throw ParseError(line_no, "unknown node class");
      NodeId id = NodeId::parse(first);
      if (nodes.contains(id)) throw ParseError(line_no, "duplicate node " + id.str());
      if (summary.empty()) throw ParseError(line_no, "empty summary");
      nodes.emplace(id, std::make_pair(Node{id, std::move(summary), *type, {}}, line_no));
      continue;
    }

    rest = trim(rest);
    if (!rest.starts_with("-->")) throw ParseError(line_no, "expected node or edge");
    rest.remove_prefix(3);
    std::string label;
    if (rest.starts_with("|")) {
      auto bar = rest.find('|', 1);
      if (bar == std::string_view::npos) throw ParseError(line_no, "unterminated edge label");
      label = mermaid_unescape(rest.substr(1, bar - 1));
      rest.remove_prefix(bar + 1);
    }
    rest = trim(rest);
    auto second = take_id(rest);
    if (second.empty() || !trim(rest).empty()) throw ParseError(line_no, "malformed edge line");
    edges.push_back({Edge{NodeId::parse(first), NodeId::parse(second), std::move(label)}, line_no});
  }
  if (!header) throw ParseError(line_no, "missing 'graph TD' header");

  std::map<NodeId, std::vector<Edge>> incoming;
  for (auto& pe : edges) {
    const Edge& e = pe.edge;
    if (!nodes.contains(e.from) || !nodes.contains(e.to)) {
      throw ParseError(pe.line, "edge references an undeclared node");
    }
    if (!(e.from < e.to)) throw ParseError(pe.line, "edge must go from a smaller to a larger id");
    auto& in = incoming[e.to];
    if (std::any_of(in.begin(), in.end(), [&](const Edge& x) { return x.from == e.from; })) {
      throw ParseError(pe.line, "duplicate edge");
    }
    in.push_back(e);
  }
  for (auto& [id, entry] : chunks) {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw ParseError(entry.second, "chunks for undeclared node " + id.str());
    it->second.first.chunk_indices = std::move(entry.first);
  }

  ReasoningGraph g;
  for (auto& [id, entry] : nodes) {
    auto in = incoming.find(id);
    if (in == incoming.end()) {
      g.insert_node(std::move(entry.first));
    } else {
      g.insert_node(std::move(entry.first), in->second);
    }
  }
  if (terminal) {
    if (!g.contains(terminal->first)) throw ParseError(terminal->second, "unknown terminal");
    if (!g.successors(terminal->first).empty()) {
      throw ParseError(terminal->second, "terminal has out-edges");
    }
    g.set_terminal(terminal->first);
  }
  return g;
}

}  // namespace cotg
