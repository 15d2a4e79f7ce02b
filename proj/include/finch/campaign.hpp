// Copyright 2026 The Finch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Campaign configuration and on-disk layout.
//
//   <out>/pareto/<hash>            current min-Pareto seeds, raw bytes
//   <out>/crashes/bug_<id>_<hash>  one exemplar per bug id
//   <out>/stats.csv                one row per generation
//   <out>/config.resolved          key=value, every field spelled out
//   <out>/objectives.txt           final objective site ids
//   <out>/tmp/gen_<n>/<hash>       mutants, only with dump_tmp

#ifndef FINCH_CAMPAIGN_HPP_
#define FINCH_CAMPAIGN_HPP_

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "finch/common.hpp"
#include "finch/engine.hpp"
#include "finch/pareto.hpp"
#include "finch/targets.hpp"

namespace finch {

namespace fs = std::filesystem;

inline constexpr std::string_view kStatsHeader =
    "wall_seconds,execs,edges_covered,pool_size,objective_count,"
    "training_seconds_cum,crashes_unique";

struct CampaignConfig {
  std::string target_name = "fig1";
  fs::path seeds_dir;
  fs::path out_dir;
  Budget budget = Budget::Execs(100'000);
  std::uint64_t campaign_seed = 0;
  Mode mode = Mode::Finch;
  std::uint64_t max_distance = kDefaultMaxDistance;
  DistanceMode distance_mode = DistanceMode::Abs;
  NormMode normalization = NormMode::Linear;
  std::size_t hidden_width = 512;
  std::size_t epochs = 200;
  double havoc_ratio = 0.25;
  std::size_t mutant_budget = kDefaultMutantBudget;
  std::uint32_t map_size = kDefaultMapSize;
  bool dump_tmp = false;

  EngineConfig engine() const {
    EngineConfig e;
    e.campaign_seed = campaign_seed;
    e.run.max_distance = max_distance;
    e.run.distance_mode = distance_mode;
    e.run.map_size = map_size;
    e.norm = normalization;
    e.model.hidden = hidden_width;
    e.model.epochs = epochs;
    e.havoc_ratio = havoc_ratio;
    e.mutant_budget = mutant_budget;
    e.clock = budget.timed ? ClockMode::Wall : ClockMode::Virtual;
    return e;
  }

  friend bool operator==(const CampaignConfig& a, const CampaignConfig& b) {
    return a.to_text() == b.to_text();
  }

  std::string to_text() const {
    std::ostringstream os;
    char ratio[64];
    std::snprintf(ratio, sizeof ratio, "%.17g", havoc_ratio);
    os << "target=" << target_name << '\n'
       << "seeds=" << seeds_dir.string() << '\n'
       << "out=" << out_dir.string() << '\n';
    if (budget.timed) {
      char secs[64];
      std::snprintf(secs, sizeof secs, "%.17g", budget.seconds);
      os << "seconds=" << secs << '\n';
    } else {
      os << "execs=" << budget.execs << '\n';
    }
    os << "seed=" << campaign_seed << '\n'
       << "mode=" << to_string(mode) << '\n'
       << "k=" << max_distance << '\n'
       << "distance=" << to_string(distance_mode) << '\n'
       << "norm=" << to_string(normalization) << '\n'
       << "hidden=" << hidden_width << '\n'
       << "epochs=" << epochs << '\n'
       << "havoc_ratio=" << ratio << '\n'
       << "mutant_budget=" << mutant_budget << '\n'
       << "map_size=" << map_size << '\n'
       << "dump_tmp=" << (dump_tmp ? "true" : "false") << '\n';
    return os.str();
  }

  // Applies one key=value setting. Unknown keys and bad values throw
  // ConfigError.
  void set(std::string_view key, const std::string& value) {
    try {
      if (key == "target") target_name = value;
      else if (key == "seeds") seeds_dir = value;
      else if (key == "out") out_dir = value;
      else if (key == "execs") budget = Budget::Execs(std::stoull(value));
      else if (key == "seconds") budget = Budget::Seconds(std::stod(value));
      else if (key == "seed") campaign_seed = std::stoull(value);
      else if (key == "mode") mode = parse_mode(value);
      else if (key == "k") max_distance = std::stoull(value);
      else if (key == "distance") distance_mode = parse_distance_mode(value);
      else if (key == "norm") normalization = parse_norm_mode(value);
      else if (key == "hidden") hidden_width = std::stoull(value);
      else if (key == "epochs") epochs = std::stoull(value);
      else if (key == "havoc_ratio") havoc_ratio = std::stod(value);
      else if (key == "mutant_budget") mutant_budget = std::stoull(value);
      else if (key == "map_size") map_size = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "dump_tmp") dump_tmp = (value == "true" || value == "1");
      else throw ConfigError("unknown config key: " + std::string(key));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("bad value for " + std::string(key) + ": " + value);
    }
  }

  // Rejects settings the engine cannot run with.
  void validate() const {
    if (map_size == 0 || !std::has_single_bit(map_size)) {
      throw ConfigError("map_size must be a power of two");
    }
    if (max_distance == 0) throw ConfigError("k must be positive");
    if (hidden_width == 0) throw ConfigError("hidden must be positive");
    if (!(havoc_ratio >= 0.0)) throw ConfigError("havoc_ratio must be >= 0");
    if (budget.timed && !(budget.seconds >= 0.0)) {
      throw ConfigError("seconds must be >= 0");
    }
  }

  static Mode parse_mode(std::string_view s) {
    if (s == "finch") return Mode::Finch;
    if (s == "baseline") return Mode::Baseline;
    throw ConfigError("unknown mode: " + std::string(s));
  }

  // Reads key=value lines; blank lines and '#' comments are ignored.
  void load(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("malformed config line: " + line);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  static CampaignConfig parse(const std::string& text) {
    CampaignConfig c;
    std::istringstream in(text);
    c.load(in);
    return c;
  }
};

inline std::string format_stats_row(const StatsRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f,%" PRIu64 ",%zu,%zu,%zu,%.6f,%zu",
                r.wall_seconds, r.execs, r.edges_covered, r.pool_size,
                r.objective_count, r.training_seconds_cum, r.crashes_unique);
  return buf;
}

inline std::optional<StatsRow> parse_stats_row(const std::string& line) {
  StatsRow r;
  char tail = 0;
  const int n = std::sscanf(line.c_str(), "%lf,%" SCNu64 ",%zu,%zu,%zu,%lf,%zu%c",
                            &r.wall_seconds, &r.execs, &r.edges_covered,
                            &r.pool_size, &r.objective_count,
                            &r.training_seconds_cum, &r.crashes_unique, &tail);
  if (n != 7) return std::nullopt;
  return r;
}

inline std::optional<Bytes> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

inline bool write_file(const fs::path& p, const Bytes& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  return static_cast<bool>(out);
}

// Regular files of `dir` in name order.
inline std::vector<fs::path> list_files(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline void print_targets(std::ostream& os) {
  for (const auto& t : builtin_targets()) {
    os << "  " << t.name << "  " << t.description << '\n';
  }
}

// Exit codes: 0 success, 2 bad input (unknown target, no seeds), 3 output
// directory not writable.
inline int run_campaign(const CampaignConfig& cfg, std::ostream& log = std::cerr) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return 2;
  }
  const auto target = find_target(cfg.target_name);
  if (!target) {
    log << "unknown target '" << cfg.target_name << "'; available:\n";
    print_targets(log);
    return 2;
  }
  std::vector<Bytes> corpus;
  std::error_code ec;
  if (fs::is_directory(cfg.seeds_dir, ec)) {
    for (const auto& p : list_files(cfg.seeds_dir)) {
      if (auto data = read_file(p)) corpus.push_back(std::move(*data));
    }
  }
  if (corpus.empty()) {
    log << "no readable seed files in '" << cfg.seeds_dir.string() << "'\n";
    return 2;
  }

  const fs::path pareto_dir = cfg.out_dir / "pareto";
  const fs::path crash_dir = cfg.out_dir / "crashes";
  fs::create_directories(pareto_dir, ec);
  if (!ec) fs::create_directories(crash_dir, ec);
  std::ofstream stats(cfg.out_dir / "stats.csv", std::ios::trunc);
  if (ec || !stats) {
    log << "cannot write to '" << cfg.out_dir.string() << "'\n";
    return 3;
  }
  for (const auto& dir : {pareto_dir, crash_dir}) {
    for (const auto& p : list_files(dir)) fs::remove(p, ec);
  }
  {
    std::ofstream resolved(cfg.out_dir / "config.resolved", std::ios::trunc);
    resolved << cfg.to_text();
  }

  stats << kStatsHeader << '\n';
  EngineHooks hooks;
  hooks.on_stats = [&](const StatsRow& r) {
    stats << format_stats_row(r) << '\n';
    stats.flush();
  };
  if (cfg.dump_tmp) {
    hooks.on_mutant = [&](std::size_t gen, const Bytes& m) {
      const fs::path dir = cfg.out_dir / "tmp" / ("gen_" + std::to_string(gen));
      std::error_code mk;
      fs::create_directories(dir, mk);
      write_file(dir / hex16(content_hash(m)), m);
    };
  }

  const CampaignResult res =
      fuzz(cfg.mode, *target, corpus, cfg.budget, cfg.engine(), hooks);

  for (const auto& s : res.seed_pool) {
    write_file(pareto_dir / hex16(content_hash(s.input)), s.input);
  }
  for (const auto& c : res.crash_pool) {
    write_file(crash_dir / ("bug_" + std::to_string(c.bug) + "_" +
                            hex16(content_hash(c.input))),
               c.input);
  }
  {
    std::ofstream obj(cfg.out_dir / "objectives.txt", std::ios::trunc);
    for (SiteId s : res.objectives) obj << s << '\n';
  }
  if (!stats) {
    log << "write error on stats.csv\n";
    return 3;
  }
  log << "done: " << res.execs << " execs, " << res.coverage.popcount()
      << " edges, " << res.crash_pool.size() << " unique bugs, pool "
      << res.seed_pool.size() << '\n';
  return 0;
}

struct ReportSummary {
  std::uint64_t execs = 0;
  std::size_t edges = 0;
  std::size_t unique_bugs = 0;
  std::size_t pool_size = 0;
  double training_seconds = 0.0;
  std::size_t rows = 0;
  std::size_t skipped_rows = 0;
};

// Re-executes every pareto/ file and checks that none is dominated by another
// over the recorded objectives. Returns the number of violations.
inline std::size_t verify_pareto(const fs::path& out_dir, std::ostream& out) {
  std::ifstream conf(out_dir / "config.resolved");
  if (!conf) {
    out << "verify: missing config.resolved\n";
    return 1;
  }
  CampaignConfig cfg;
  cfg.load(conf);
  const auto target = find_target(cfg.target_name);
  if (!target) {
    out << "verify: unknown target " << cfg.target_name << '\n';
    return 1;
  }
  std::vector<SiteId> objectives;
  {
    std::ifstream obj(out_dir / "objectives.txt");
    SiteId s;
    while (obj >> s) objectives.push_back(s);
  }
  Executor exec(*target, cfg.engine().run);
  std::vector<std::pair<fs::path, std::vector<std::uint64_t>>> scored;
  std::size_t bad = 0;
  for (const auto& p : list_files(out_dir / "pareto")) {
    const auto data = read_file(p);
    if (!data) continue;
    const ExecutionResult& r = exec.run(*data);
    auto f = project(r.distances, objectives);
    if (!objectives.empty() && all_unvisited(f, cfg.max_distance)) {
      out << "verify: " << p.filename().string() << " reaches no objective\n";
      ++bad;
    }
    scored.emplace_back(p, std::move(f));
  }
  for (const auto& [pa, fa] : scored) {
    for (const auto& [pb, fb] : scored) {
      if (dominates(fb, fa)) {
        out << "verify: " << pa.filename().string() << " is dominated by "
            << pb.filename().string() << '\n';
        ++bad;
        break;
      }
    }
  }
  out << "verify: " << scored.size() << " pareto seeds, " << bad
      << " violations\n";
  return bad;
}

// Prints a summary and writes coverage_over_time.tsv and training_time.tsv.
// Exit codes: 0 ok, 1 verification failed, 2 no stats.csv.
inline int report(const fs::path& out_dir, std::ostream& out = std::cout,
                  std::ostream& warn = std::cerr, bool verify = false,
                  ReportSummary* summary_out = nullptr) {
  std::ifstream in(out_dir / "stats.csv");
  if (!in) {
    warn << "no stats.csv in '" << out_dir.string() << "'\n";
    return 2;
  }
  std::vector<StatsRow> rows;
  ReportSummary sum;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line == kStatsHeader || line.empty()) continue;
    if (auto r = parse_stats_row(line)) {
      rows.push_back(*r);
    } else {
      warn << "stats.csv:" << lineno << ": skipping malformed row\n";
      ++sum.skipped_rows;
    }
  }
  sum.rows = rows.size();
  if (!rows.empty()) {
    sum.execs = rows.back().execs;
    sum.edges = rows.back().edges_covered;
    sum.unique_bugs = rows.back().crashes_unique;
    sum.pool_size = rows.back().pool_size;
    sum.training_seconds = rows.back().training_seconds_cum;
  }
  std::vector<std::string> bugs;
  for (const auto& p : list_files(out_dir / "crashes")) {
    bugs.push_back(p.filename().string());
  }
  sum.unique_bugs = std::max(sum.unique_bugs, bugs.size());

  out << "execs:            " << sum.execs << '\n'
      << "edges covered:    " << sum.edges << '\n'
      << "unique bugs:      " << sum.unique_bugs << '\n'
      << "final pool size:  " << sum.pool_size << '\n';
  char secs[64];
  std::snprintf(secs, sizeof secs, "%.6f", sum.training_seconds);
  out << "training seconds: " << secs << '\n';
  for (const auto& b : bugs) out << "  " << b << '\n';

  {
    std::ofstream cov(out_dir / "coverage_over_time.tsv", std::ios::trunc);
    std::ofstream trn(out_dir / "training_time.tsv", std::ios::trunc);
    cov << "wall_seconds\tedges_covered\n";
    trn << "wall_seconds\ttraining_seconds_cum\n";
    for (const auto& r : rows) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.6f\t%zu\n", r.wall_seconds, r.edges_covered);
      cov << buf;
      std::snprintf(buf, sizeof buf, "%.6f\t%.6f\n", r.wall_seconds,
                    r.training_seconds_cum);
      trn << buf;
    }
  }
  if (summary_out) *summary_out = sum;
  if (verify && verify_pareto(out_dir, out) > 0) return 1;
  return 0;
}

}  // namespace finch

#endif  // FINCH_CAMPAIGN_HPP_
