#pragma once
//
// Instance readers and writers.
//
// Native format (1-based node ids, '#' starts a comment):
//
//   p mcf <nodes> <edges> <commodities>
//   a <tail> <head> <cost> <capacity>      (one per edge)
//   d <source> <sink> <demand>             (one per commodity)
//
// TNTP: the `_net.tntp` / `_trips.tntp` pair of the transportation-networks
// collection. Free-flow time becomes the edge cost, the capacity field the
// edge capacity, and every OD flow is divided by a scaling coefficient.
//

#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mcf/errors.hpp"
#include "mcf/instance.hpp"

namespace mcf {

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column = 0;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(b, i - b), b + 1});
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> to_integer(std::string_view s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InternalError("format_double failed");
  return std::string(buf, p);
}

}  // namespace detail

inline Instance parse_native(std::istream& in, const std::string& name = "instance") {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  long long n = 0, m = 0, k = 0;
  std::vector<Edge> edges;
  std::vector<Commodity> commodities;
  std::size_t last_line = 0;

  auto fail = [&](std::size_t col, const std::string& msg) -> ParseError { return ParseError(name, lineno, col, msg); };
  auto integer = [&](const detail::Token& t, const char* what) {
    const auto v = detail::to_integer(t.text);
    if (!v) throw fail(t.column, std::string("expected integer ") + what + ", got '" + std::string(t.text) + "'");
    return *v;
  };
  auto number = [&](const detail::Token& t, const char* what) {
    const auto v = detail::to_double(t.text);
    if (!v) throw fail(t.column, std::string("expected number ") + what + ", got '" + std::string(t.text) + "'");
    return *v;
  };
  auto node = [&](const detail::Token& t) {
    const long long id = integer(t, "node id");
    if (id < 1 || id > n) {
      throw fail(t.column, "node " + std::to_string(id) + " outside 1.." + std::to_string(n));
    }
    return static_cast<NodeId>(id - 1);
  };

  while (std::getline(in, line)) {
    ++lineno;
    last_line = lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = detail::tokenize(view);
    if (tok.empty()) continue;
    const std::string_view kind = tok[0].text;
    if (kind == "p") {
      if (have_header) throw fail(tok[0].column, "duplicate header");
      if (tok.size() != 5 || tok[1].text != "mcf") throw fail(tok[0].column, "malformed header, expected 'p mcf <nodes> <edges> <commodities>'");
      n = integer(tok[2], "node count");
      m = integer(tok[3], "edge count");
      k = integer(tok[4], "commodity count");
      if (n < 1) throw fail(tok[2].column, "node count must be positive");
      if (m < 0) throw fail(tok[3].column, "edge count must be nonnegative");
      if (k < 0) throw fail(tok[4].column, "commodity count must be nonnegative");
      have_header = true;
    } else if (kind == "a") {
      if (!have_header) throw fail(tok[0].column, "edge line before header");
      if (tok.size() != 5) throw fail(tok[0].column, "edge line needs 'a <tail> <head> <cost> <capacity>'");
      Edge e;
      e.tail = node(tok[1]);
      e.head = node(tok[2]);
      e.cost = number(tok[3], "cost");
      e.capacity = number(tok[4], "capacity");
      if (e.cost < 0) throw fail(tok[3].column, "negative cost");
      if (e.capacity < 0) throw fail(tok[4].column, "negative capacity");
      if (static_cast<long long>(edges.size()) == m) throw fail(tok[0].column, "more edge lines than the header declares");
      edges.push_back(e);
    } else if (kind == "d") {
      if (!have_header) throw fail(tok[0].column, "demand line before header");
      if (tok.size() != 4) throw fail(tok[0].column, "demand line needs 'd <source> <sink> <demand>'");
      Commodity c;
      c.source = node(tok[1]);
      c.sink = node(tok[2]);
      c.demand = number(tok[3], "demand");
      if (c.demand < 0) throw fail(tok[3].column, "negative demand");
      if (c.demand == 0) throw fail(tok[3].column, "demand must be positive");
      if (c.source == c.sink) throw fail(tok[2].column, "source and sink coincide");
      if (static_cast<long long>(commodities.size()) == k) throw fail(tok[0].column, "more demand lines than the header declares");
      commodities.push_back(c);
    } else {
      throw fail(tok[0].column, "unknown line type '" + std::string(kind) + "'");
    }
  }
  lineno = last_line + 1;
  if (!have_header) throw fail(1, "missing 'p mcf' header");
  if (static_cast<long long>(edges.size()) != m) {
    throw fail(1, "header declares " + std::to_string(m) + " edges, found " + std::to_string(edges.size()));
  }
  if (commodities.empty()) throw fail(1, "no commodities");
  if (static_cast<long long>(commodities.size()) != k) {
    throw fail(1, "header declares " + std::to_string(k) + " commodities, found " + std::to_string(commodities.size()));
  }
  return Instance(name, Network(static_cast<NodeId>(n), std::move(edges)), std::move(commodities));
}

inline Instance parse_native(const std::string& text, const std::string& name = "instance") {
  std::istringstream in(text);
  return parse_native(in, name);
}

inline void write_native(std::ostream& out, const Instance& inst) {
  const Network& net = inst.network();
  out << "# " << inst.name() << "\n";
  out << "p mcf " << net.node_count() << ' ' << net.edge_count() << ' ' << inst.commodity_count() << "\n";
  for (const Edge& e : net.edges()) {
    out << "a " << e.tail + 1 << ' ' << e.head + 1 << ' ' << detail::format_double(e.cost) << ' '
        << detail::format_double(e.capacity) << "\n";
  }
  for (const Commodity& c : inst.commodities()) {
    out << "d " << c.source + 1 << ' ' << c.sink + 1 << ' ' << detail::format_double(c.demand) << "\n";
  }
}

inline std::string write_native(const Instance& inst) {
  std::ostringstream out;
  write_native(out, inst);
  return out.str();
}

/// Demand scaling coefficients for the transportation networks.
inline std::optional<double> tntp_coefficient(std::string_view network_name) {
  static const std::map<std::string_view, double> table = {
      {"Austin", 6.0},          {"Barcelona", 5050.0}, {"BerlinCenter", 0.5},
      {"Birmingham", 0.9},      {"ChicagoRegional", 4.1}, {"ChicagoSketch", 2.4},
      {"Philadelphia", 7.0},    {"Sydney", 1.9},       {"Winnipeg", 2000.0},
  };
  const auto it = table.find(network_name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

namespace detail {

struct TntpMetadata {
  std::map<std::string, std::string> tags;
  std::optional<long long> integer(const std::string& key) const {
    const auto it = tags.find(key);
    if (it == tags.end()) return std::nullopt;
    return to_integer(it->second);
  }
};

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Returns true if the line was a metadata tag (and records it).
inline bool read_tag(std::string_view line, TntpMetadata& meta) {
  const std::string t = trim(line);
  if (t.empty() || t[0] != '<') return false;
  const auto close = t.find('>');
  if (close == std::string::npos) return false;
  meta.tags[t.substr(1, close - 1)] = trim(std::string_view(t).substr(close + 1));
  return true;
}

}  // namespace detail

inline Instance parse_tntp(std::istream& net_in, std::istream& trips_in, double coefficient,
                           const std::string& name = "tntp") {
  if (!(coefficient > 0.0) || !std::isfinite(coefficient)) throw InputError("tntp: coefficient must be positive");
  const std::string net_src = name + "_net";
  const std::string trips_src = name + "_trips";
  InstanceNotes notes;

  // Network file.
  detail::TntpMetadata net_meta;
  std::vector<Edge> edges;
  long long max_node = 0;
  std::string line;
  std::size_t lineno = 0;
  bool in_meta = true;
  while (std::getline(net_in, line)) {
    ++lineno;
    std::string_view view(line);
    if (in_meta && detail::read_tag(view, net_meta)) {
      if (net_meta.tags.count("END OF METADATA")) in_meta = false;
      continue;
    }
    if (const auto tilde = view.find('~'); tilde != std::string_view::npos) view = view.substr(0, tilde);
    std::string cleaned(view);
    for (char& ch : cleaned) {
      if (ch == ';') ch = ' ';
    }
    const auto tok = detail::tokenize(cleaned);
    if (tok.empty()) continue;
    in_meta = false;
    if (tok.size() < 5) throw ParseError(net_src, lineno, tok[0].column, "link line needs at least 5 fields");
    auto num = [&](std::size_t i, const char* what) {
      const auto v = detail::to_double(tok[i].text);
      if (!v) throw ParseError(net_src, lineno, tok[i].column, std::string("non-numeric ") + what + " '" + std::string(tok[i].text) + "'");
      return *v;
    };
    const double init = num(0, "init node");
    const double term = num(1, "term node");
    const double cap = num(2, "capacity");
    const double fft = num(4, "free flow time");
    if (init < 1 || term < 1 || init != std::floor(init) || term != std::floor(term)) {
      throw ParseError(net_src, lineno, tok[0].column, "node ids must be positive integers");
    }
    if (cap < 0) throw ParseError(net_src, lineno, tok[2].column, "negative capacity");
    if (fft < 0) throw ParseError(net_src, lineno, tok[4].column, "negative free flow time");
    max_node = std::max({max_node, static_cast<long long>(init), static_cast<long long>(term)});
    edges.push_back({static_cast<NodeId>(init) - 1, static_cast<NodeId>(term) - 1, fft, cap});
  }
  long long nodes = max_node;
  if (const auto declared = net_meta.integer("NUMBER OF NODES")) {
    if (*declared < max_node) throw ParseError(net_src, 1, 1, "link references node " + std::to_string(max_node) + " beyond <NUMBER OF NODES> " + std::to_string(*declared));
    nodes = *declared;
  }
  if (const auto links = net_meta.integer("NUMBER OF LINKS"); links && *links != static_cast<long long>(edges.size())) {
    throw ParseError(net_src, 1, 1, "<NUMBER OF LINKS> " + std::to_string(*links) + " but " + std::to_string(edges.size()) + " links read");
  }
  if (const auto ftn = net_meta.integer("FIRST THRU NODE")) notes.first_thru_node = static_cast<int>(*ftn);
  if (net_meta.tags.count("NUMBER OF NODES") == 0) notes.warnings.push_back("net file has no <NUMBER OF NODES>; using largest node id");
  if (nodes < 1) throw ParseError(net_src, 1, 1, "network has no nodes");
  Network network(static_cast<NodeId>(nodes), std::move(edges));

  // Trips file.
  detail::TntpMetadata trip_meta;
  std::vector<Commodity> commodities;
  long long origin = -1;
  lineno = 0;
  in_meta = true;
  while (std::getline(trips_in, line)) {
    ++lineno;
    std::string_view view(line);
    if (in_meta && detail::read_tag(view, trip_meta)) {
      if (trip_meta.tags.count("END OF METADATA")) in_meta = false;
      continue;
    }
    if (const auto tilde = view.find('~'); tilde != std::string_view::npos) view = view.substr(0, tilde);
    const auto head = detail::tokenize(view);
    if (head.empty()) continue;
    in_meta = false;
    if (head[0].text == "Origin") {
      if (head.size() < 2) throw ParseError(trips_src, lineno, head[0].column, "Origin without node id");
      const auto o = detail::to_integer(head[1].text);
      if (!o || *o < 1 || *o > nodes) throw ParseError(trips_src, lineno, head[1].column, "origin '" + std::string(head[1].text) + "' is not a node of the network");
      origin = *o;
      continue;
    }
    if (origin < 0) throw ParseError(trips_src, lineno, head[0].column, "OD entries before any Origin line");
    std::string cleaned(view);
    for (char& ch : cleaned) {
      if (ch == ':' || ch == ';') ch = ' ';
    }
    const auto tok = detail::tokenize(cleaned);
    if (tok.size() % 2 != 0) throw ParseError(trips_src, lineno, tok.back().column, "dangling destination without flow");
    for (std::size_t i = 0; i < tok.size(); i += 2) {
      const auto d = detail::to_integer(tok[i].text);
      const auto flow = detail::to_double(tok[i + 1].text);
      if (!d) throw ParseError(trips_src, lineno, tok[i].column, "non-numeric destination '" + std::string(tok[i].text) + "'");
      if (!flow) throw ParseError(trips_src, lineno, tok[i + 1].column, "non-numeric flow '" + std::string(tok[i + 1].text) + "'");
      if (*d < 1 || *d > nodes) throw ParseError(trips_src, lineno, tok[i].column, "destination " + std::to_string(*d) + " is not a node of the network");
      if (*flow < 0) throw ParseError(trips_src, lineno, tok[i + 1].column, "negative flow");
      if (*flow == 0) {
        ++notes.dropped_zero_demand;
        continue;
      }
      if (*d == origin) {
        ++notes.dropped_self_pairs;
        continue;
      }
      commodities.push_back({static_cast<NodeId>(origin - 1), static_cast<NodeId>(*d - 1), *flow / coefficient});
    }
  }
  const auto trip_zones = trip_meta.integer("NUMBER OF ZONES");
  const auto net_zones = net_meta.integer("NUMBER OF ZONES");
  if (trip_zones && *trip_zones > nodes) {
    throw ParseError(trips_src, 1, 1, "<NUMBER OF ZONES> " + std::to_string(*trip_zones) + " exceeds network node count " + std::to_string(nodes));
  }
  if (trip_zones && net_zones && *trip_zones != *net_zones) {
    throw ParseError(trips_src, 1, 1, "zone count " + std::to_string(*trip_zones) + " differs from network zone count " + std::to_string(*net_zones));
  }

  // Unreachable pairs cannot be routed at any cost.
  std::map<NodeId, std::vector<char>> reach;
  std::vector<Commodity> kept;
  kept.reserve(commodities.size());
  for (const Commodity& c : commodities) {
    auto it = reach.find(c.source);
    if (it == reach.end()) it = reach.emplace(c.source, detail::reachable_from(network, c.source)).first;
    if (it->second[static_cast<std::size_t>(c.sink)]) {
      kept.push_back(c);
    } else {
      ++notes.dropped_unreachable;
    }
  }
  if (notes.dropped_unreachable > 0) {
    notes.warnings.push_back("dropped " + std::to_string(notes.dropped_unreachable) + " unreachable OD pairs");
  }
  if (kept.empty()) throw ParseError(trips_src, lineno, 1, "no commodities");
  return Instance(name, std::move(network), std::move(kept), std::move(notes));
}

}  // namespace mcf
