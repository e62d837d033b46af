#pragma once
//
// Run records, instance loading and the benchmark harness: per-run CSV plus
// the derived tables behind performance profiles, cactus plots, tree/path
// scatter plots and the speed-up heatmap.
//

#include <sys/resource.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcf/colgen.hpp"
#include "mcf/errors.hpp"
#include "mcf/instance.hpp"
#include "mcf/io.hpp"

namespace mcf {

/// Peak resident set size of this process in bytes (0 where unavailable).
inline std::size_t peak_rss_bytes() {
  rusage u{};
  if (getrusage(RUSAGE_SELF, &u) != 0) return 0;
  return static_cast<std::size_t>(u.ru_maxrss) * 1024;
}

struct RunRecord {
  std::string instance;
  std::string formulation;
  std::string strategy;
  std::string status;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> lower_bound;
  double gap = std::numeric_limits<double>::infinity();
  double wall_seconds = 0.0;
  std::size_t peak_memory_bytes = 0;
  std::size_t iterations = 0;
  std::size_t columns_generated = 0;
  std::size_t rows_activated = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t commodities = 0;
  std::size_t sources = 0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

inline RunRecord make_record(const Instance& inst, const SolveReport& rep) {
  RunRecord r;
  r.instance = inst.name();
  r.formulation = to_string(rep.formulation);
  r.strategy = to_string(rep.strategy);
  r.status = to_string(rep.status);
  r.objective = rep.objective;
  r.lower_bound = rep.lower_bound;
  r.gap = rep.gap;
  r.wall_seconds = rep.wall_seconds;
  r.peak_memory_bytes = peak_rss_bytes();
  r.iterations = rep.iterations.size();
  r.columns_generated = rep.peak_columns;
  r.rows_activated = static_cast<std::size_t>(rep.final_active_rows);
  r.nodes = static_cast<std::size_t>(inst.network().node_count());
  r.edges = static_cast<std::size_t>(inst.network().edge_count());
  r.commodities = inst.commodity_count();
  r.sources = inst.source_count();
  return r;
}

namespace detail {

inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_num(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InputError("csv: bad number '" + std::string(s) + "'");
  return v;
}

inline std::size_t parse_count(std::string_view s) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InputError("csv: bad count '" + std::string(s) + "'");
  return v;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

inline constexpr std::string_view kRunCsvHeader =
    "instance,formulation,strategy,status,objective,lower_bound,gap,wall_seconds,peak_memory_bytes,"
    "iterations,columns_generated,rows_activated,nodes,edges,commodities,sources";

inline std::string to_csv_row(const RunRecord& r) {
  using detail::fmt_num;
  std::ostringstream o;
  o << detail::csv_field(r.instance) << ',' << r.formulation << ',' << r.strategy << ',' << r.status << ','
    << fmt_num(r.objective) << ',' << (r.lower_bound ? fmt_num(*r.lower_bound) : "") << ',' << fmt_num(r.gap) << ','
    << fmt_num(r.wall_seconds) << ',' << r.peak_memory_bytes << ',' << r.iterations << ',' << r.columns_generated
    << ',' << r.rows_activated << ',' << r.nodes << ',' << r.edges << ',' << r.commodities << ',' << r.sources;
  return o.str();
}

inline RunRecord parse_csv_row(std::string_view line) {
  const auto f = detail::split_csv(line);
  if (f.size() != 16) throw InputError("csv: expected 16 fields, got " + std::to_string(f.size()));
  RunRecord r;
  r.instance = f[0];
  r.formulation = f[1];
  r.strategy = f[2];
  r.status = f[3];
  r.objective = detail::parse_num(f[4]);
  if (!f[5].empty()) r.lower_bound = detail::parse_num(f[5]);
  r.gap = detail::parse_num(f[6]);
  r.wall_seconds = detail::parse_num(f[7]);
  r.peak_memory_bytes = detail::parse_count(f[8]);
  r.iterations = detail::parse_count(f[9]);
  r.columns_generated = detail::parse_count(f[10]);
  r.rows_activated = detail::parse_count(f[11]);
  r.nodes = detail::parse_count(f[12]);
  r.edges = detail::parse_count(f[13]);
  r.commodities = detail::parse_count(f[14]);
  r.sources = detail::parse_count(f[15]);
  return r;
}

inline std::vector<RunRecord> read_runs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRunCsvHeader) throw InputError("csv: missing or unexpected header");
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_csv_row(line));
  }
  return out;
}

inline void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << kRunCsvHeader << '\n';
  for (const RunRecord& r : runs) out << to_csv_row(r) << '\n';
}

inline nlohmann::json to_json(const RunRecord& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return detail::fmt_num(v);
  };
  nlohmann::json j;
  j["instance"] = r.instance;
  j["formulation"] = r.formulation;
  j["strategy"] = r.strategy;
  j["status"] = r.status;
  j["objective"] = num(r.objective);
  j["lower_bound"] = r.lower_bound ? num(*r.lower_bound) : nlohmann::json(nullptr);
  j["gap"] = num(r.gap);
  j["wall_seconds"] = r.wall_seconds;
  j["peak_memory_bytes"] = r.peak_memory_bytes;
  j["iterations"] = r.iterations;
  j["columns_generated"] = r.columns_generated;
  j["rows_activated"] = r.rows_activated;
  j["nodes"] = r.nodes;
  j["edges"] = r.edges;
  j["commodities"] = r.commodities;
  j["sources"] = r.sources;
  return j;
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v) {
    return v.is_string() ? detail::parse_num(v.get<std::string>()) : v.get<double>();
  };
  RunRecord r;
  r.instance = j.at("instance").get<std::string>();
  r.formulation = j.at("formulation").get<std::string>();
  r.strategy = j.at("strategy").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.objective = num(j.at("objective"));
  if (!j.at("lower_bound").is_null()) r.lower_bound = num(j.at("lower_bound"));
  r.gap = num(j.at("gap"));
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.peak_memory_bytes = j.at("peak_memory_bytes").get<std::size_t>();
  r.iterations = j.at("iterations").get<std::size_t>();
  r.columns_generated = j.at("columns_generated").get<std::size_t>();
  r.rows_activated = j.at("rows_activated").get<std::size_t>();
  r.nodes = j.at("nodes").get<std::size_t>();
  r.edges = j.at("edges").get<std::size_t>();
  r.commodities = j.at("commodities").get<std::size_t>();
  r.sources = j.at("sources").get<std::size_t>();
  return r;
}

// ---- derived tables --------------------------------------------------------

/// Time used for comparisons: wall time if optimal, else the cap.
inline double effective_time(const RunRecord& r, double cap) {
  return r.status == "optimal" ? r.wall_seconds : cap;
}

/// Performance profile: for each tau, the fraction of instances each
/// formulation solves within tau times the best time on that instance.
inline void write_profile_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
  std::set<std::string> solvers;
  std::map<std::string, std::map<std::string, const RunRecord*>> by_instance;
  for (const RunRecord& r : runs) {
    solvers.insert(r.formulation);
    by_instance[r.instance][r.formulation] = &r;
  }
  std::map<std::string, std::vector<double>> ratios;
  for (const auto& [inst, per] : by_instance) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [s, r] : per) {
      if (r->status == "optimal") best = std::min(best, std::max(r->wall_seconds, 1e-9));
    }
    for (const std::string& s : solvers) {
      const auto it = per.find(s);
      const bool ok = it != per.end() && it->second->status == "optimal" && std::isfinite(best);
      ratios[s].push_back(ok ? std::max(it->second->wall_seconds, 1e-9) / best : std::numeric_limits<double>::infinity());
    }
  }
  std::set<double> taus{1.0};
  for (const auto& [s, v] : ratios) {
    for (double x : v) {
      if (std::isfinite(x)) taus.insert(x);
    }
  }
  out << "tau";
  for (const std::string& s : solvers) out << ',' << s;
  out << '\n';
  const double n = static_cast<double>(by_instance.size());
  for (double tau : taus) {
    out << detail::fmt_num(tau);
    for (const std::string& s : solvers) {
      const auto& v = ratios[s];
      const auto hit = std::count_if(v.begin(), v.end(), [tau](double x) { return x <= tau; });
      out << ',' << detail::fmt_num(n > 0 ? static_cast<double>(hit) / n : 0.0);
    }
    out << '\n';
  }
}

/// Cactus data: per formulation, runs sorted by time; unsolved runs sit at the cap.
inline void write_cactus_csv(std::ostream& out, const std::vector<RunRecord>& runs, double cap) {
  std::map<std::string, std::vector<std::pair<double, bool>>> per;
  for (const RunRecord& r : runs) per[r.formulation].emplace_back(effective_time(r, cap), r.status == "optimal");
  out << "formulation,rank,seconds,solved\n";
  for (auto& [s, v] : per) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << s << ',' << i + 1 << ',' << detail::fmt_num(v[i].first) << ',' << (v[i].second ? 1 : 0) << '\n';
    }
  }
}

/// Tree time against path time per instance.
inline void write_scatter_csv(std::ostream& out, const std::vector<RunRecord>& runs, double cap) {
  std::map<std::string, std::pair<const RunRecord*, const RunRecord*>> per;
  for (const RunRecord& r : runs) {
    if (r.formulation == "tree") per[r.instance].first = &r;
    if (r.formulation == "path") per[r.instance].second = &r;
  }
  out << "instance,tree_seconds,path_seconds,tree_status,path_status\n";
  for (const auto& [inst, p] : per) {
    if (!p.first || !p.second) continue;
    out << detail::csv_field(inst) << ',' << detail::fmt_num(effective_time(*p.first, cap)) << ','
        << detail::fmt_num(effective_time(*p.second, cap)) << ',' << p.first->status << ',' << p.second->status << '\n';
  }
}

/// |K|, shared-source fraction 1 - |S|/|K| and path/tree speed-up per instance.
inline void write_heatmap_csv(std::ostream& out, const std::vector<RunRecord>& runs, double cap) {
  std::map<std::string, std::pair<const RunRecord*, const RunRecord*>> per;
  for (const RunRecord& r : runs) {
    if (r.formulation == "tree") per[r.instance].first = &r;
    if (r.formulation == "path") per[r.instance].second = &r;
  }
  out << "instance,commodities,shared_source_fraction,speedup\n";
  for (const auto& [inst, p] : per) {
    if (!p.first || !p.second) continue;
    const double k = static_cast<double>(p.first->commodities);
    const double share = k > 0 ? 1.0 - static_cast<double>(p.first->sources) / k : 0.0;
    const double t_tree = std::max(effective_time(*p.first, cap), 1e-9);
    const double t_path = std::max(effective_time(*p.second, cap), 1e-9);
    out << detail::csv_field(inst) << ',' << p.first->commodities << ',' << detail::fmt_num(share) << ','
        << detail::fmt_num(t_path / t_tree) << '\n';
  }
}

// ---- instance loading ------------------------------------------------------

/// `gen:n=20,m=60,k=30,s=5,seed=1,cap=mixed[,tight=0.5][,round=1]`
inline GeneratorParams parse_generator_spec(std::string_view spec) {
  if (spec.substr(0, 4) != "gen:") throw InputError("generator spec must start with 'gen:'");
  GeneratorParams p;
  std::string body(spec.substr(4));
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("generator spec: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    auto integer = [&]() {
      const auto v = detail::to_integer(val);
      if (!v || *v < 0) throw InputError("generator spec: bad value for " + key);
      return *v;
    };
    if (key == "n") p.nodes = static_cast<NodeId>(integer());
    else if (key == "m") p.edges = static_cast<EdgeId>(integer());
    else if (key == "k") p.commodities = static_cast<std::size_t>(integer());
    else if (key == "s") p.sources = static_cast<std::size_t>(integer());
    else if (key == "seed") p.seed = static_cast<std::uint64_t>(integer());
    else if (key == "round") p.round_values = integer() != 0;
    else if (key == "tight") {
      const auto v = detail::to_double(val);
      if (!v) throw InputError("generator spec: bad value for tight");
      p.tight_fraction = *v;
    } else if (key == "cap") {
      if (val == "loose") p.capacity = CapacityMode::Loose;
      else if (val == "tight") p.capacity = CapacityMode::Tight;
      else if (val == "mixed") p.capacity = CapacityMode::Mixed;
      else throw InputError("generator spec: cap must be loose, tight or mixed");
    } else {
      throw InputError("generator spec: unknown key '" + key + "'");
    }
  }
  return p;
}

/// Loads a native `.mcf` file, a TNTP pair given by its `_net.tntp` file, or a
/// `gen:` spec. TNTP demand coefficients default to the built-in table.
inline Instance load_instance(const std::string& spec, std::optional<double> coefficient = std::nullopt) {
  namespace fs = std::filesystem;
  if (spec.rfind("gen:", 0) == 0) {
    Instance inst = generate_random(parse_generator_spec(spec));
    return Instance(spec, inst.network(), std::vector<Commodity>(inst.commodities().begin(), inst.commodities().end()),
                    inst.notes());
  }
  const fs::path path(spec);
  if (!fs::exists(path)) throw InputError("instance file not found: " + spec);
  const std::string file = path.filename().string();
  const std::string suffix = "_net.tntp";
  if (file.size() > suffix.size() && file.compare(file.size() - suffix.size(), suffix.size(), suffix) == 0) {
    const std::string base = file.substr(0, file.size() - suffix.size());
    const fs::path trips = path.parent_path() / (base + "_trips.tntp");
    if (!fs::exists(trips)) throw InputError("trip table not found: " + trips.string());
    const auto coef = coefficient ? coefficient : tntp_coefficient(base);
    if (!coef) throw InputError("no demand coefficient known for '" + base + "'; pass one explicitly");
    std::ifstream net_in(path), trips_in(trips);
    return parse_tntp(net_in, trips_in, *coef, base);
  }
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + spec);
  return parse_native(in, path.stem().string());
}

// ---- harness ---------------------------------------------------------------

struct BenchEntry {
  std::string name;
  std::string spec;  // file path or gen: spec
  std::optional<double> coefficient;
};

struct BenchManifest {
  std::vector<BenchEntry> instances;
  std::vector<Formulation> formulations{Formulation::Tree, Formulation::Path};
  SolverConfig config;
};

/// Manifest layout:
///   {"timeout": 60, "tol": 1e-4, "strategy": "auto", "pricing": "full",
///    "formulations": ["tree", "path"],
///    "instances": [{"name": "g1", "path": "grid1.mcf"}, {"spec": "gen:n=20,..."}]}
/// Relative paths are resolved against `base_dir`.
inline BenchManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  BenchManifest m;
  if (j.contains("timeout")) m.config.timeout_seconds = j.at("timeout").get<double>();
  if (j.contains("tol")) m.config.rel_tol = j.at("tol").get<double>();
  if (j.contains("threads")) m.config.threads = j.at("threads").get<int>();
  if (j.contains("strategy")) {
    const auto s = parse_strategy(j.at("strategy").get<std::string>());
    if (!s) throw InputError("manifest: unknown strategy");
    m.config.strategy = *s;
  }
  if (j.contains("pricing")) {
    const auto p = parse_pricing(j.at("pricing").get<std::string>());
    if (!p) throw InputError("manifest: unknown pricing strategy");
    m.config.pricing = *p;
  }
  if (j.contains("heuristic")) {
    const auto h = parse_heuristic(j.at("heuristic").get<std::string>());
    if (!h) throw InputError("manifest: unknown heuristic scope");
    m.config.heuristic = *h;
  }
  if (j.contains("formulations")) {
    m.formulations.clear();
    for (const auto& f : j.at("formulations")) {
      const auto v = parse_formulation(f.get<std::string>());
      if (!v) throw InputError("manifest: unknown formulation");
      m.formulations.push_back(*v);
    }
  }
  for (const auto& e : j.at("instances")) {
    BenchEntry b;
    if (e.contains("spec")) {
      b.spec = e.at("spec").get<std::string>();
    } else {
      const std::filesystem::path p(e.at("path").get<std::string>());
      b.spec = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
    }
    b.name = e.contains("name") ? e.at("name").get<std::string>() : b.spec;
    if (e.contains("coefficient")) b.coefficient = e.at("coefficient").get<double>();
    m.instances.push_back(std::move(b));
  }
  return m;
}

struct BenchResult {
  std::vector<RunRecord> runs;
  std::vector<std::string> skipped;  // instances that could not be loaded
};

/// Runs every instance under every formulation and writes runs.csv,
/// profile.csv, cactus.csv, scatter.csv and heatmap.csv into `out_dir`.
inline BenchResult run_bench(const BenchManifest& m, const std::filesystem::path& out_dir, std::ostream& log = std::cerr) {
  std::filesystem::create_directories(out_dir);
  BenchResult res;
  for (const BenchEntry& e : m.instances) {
    std::optional<Instance> inst;
    try {
      Instance loaded = load_instance(e.spec, e.coefficient);
      inst.emplace(e.name, loaded.network(),
                   std::vector<Commodity>(loaded.commodities().begin(), loaded.commodities().end()), loaded.notes());
    } catch (const std::exception& ex) {
      log << "warning: skipping " << e.name << ": " << ex.what() << '\n';
      res.skipped.push_back(e.name);
      continue;
    }
    for (Formulation f : m.formulations) {
      SolverConfig cfg = m.config;
      cfg.formulation = f;
      RunRecord rec;
      try {
        const SolveReport rep = solve(*inst, cfg);
        rec = make_record(*inst, rep);
      } catch (const CapacityError& ex) {
        log << "warning: " << e.name << " / " << to_string(f) << ": " << ex.what() << '\n';
        rec = make_record(*inst, SolveReport{});
        rec.formulation = to_string(f);
        rec.status = "timeout";
      }
      log << e.name << ' ' << rec.formulation << ' ' << rec.status << ' ' << detail::fmt_num(rec.objective) << ' '
          << detail::fmt_num(rec.wall_seconds) << "s\n";
      res.runs.push_back(std::move(rec));
    }
  }
  const double cap = m.config.timeout_seconds;
  auto write = [&](const char* name, const std::function<void(std::ostream&)>& fn) {
    std::ofstream out(out_dir / name);
    if (!out) throw InputError(std::string("cannot write ") + (out_dir / name).string());
    fn(out);
  };
  write("runs.csv", [&](std::ostream& o) { write_runs_csv(o, res.runs); });
  write("profile.csv", [&](std::ostream& o) { write_profile_csv(o, res.runs); });
  write("cactus.csv", [&](std::ostream& o) { write_cactus_csv(o, res.runs, cap); });
  write("scatter.csv", [&](std::ostream& o) { write_scatter_csv(o, res.runs, cap); });
  write("heatmap.csv", [&](std::ostream& o) { write_heatmap_csv(o, res.runs, cap); });
  return res;
}

}  // namespace mcf
