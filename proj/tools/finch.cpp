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

// finch: command-line front end.
//
//   finch run --target <name> --seeds <dir> --out <dir> [options]
//   finch report <out_dir> [--verify]
//   finch targets

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "finch/campaign.hpp"

namespace {

template <class T>
void override_if(CLI::Option* opt, finch::CampaignConfig& cfg,
                 const char* key, const T& value) {
  if (opt->count() > 0) cfg.set(key, value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch-distance guided greybox fuzzer"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a fuzzing campaign");
  std::string config_file, target, seeds, out, mode, distance, norm;
  std::string execs, seconds, seed, k, hidden, epochs, ratio, map_size, budget;
  bool dump_tmp = false;
  run->add_option("--config", config_file, "key=value config file")
      ->check(CLI::ExistingFile);
  auto* o_target = run->add_option("--target", target, "Built-in target name");
  auto* o_seeds = run->add_option("--seeds", seeds, "Initial corpus directory");
  auto* o_out = run->add_option("--out", out, "Output directory");
  auto* o_execs = run->add_option("--execs", execs, "Execution budget");
  auto* o_seconds = run->add_option("--seconds", seconds, "Wall-clock budget");
  o_execs->excludes(o_seconds);
  auto* o_mode = run->add_option("--mode", mode, "finch | baseline")
                     ->check(CLI::IsMember({"finch", "baseline"}));
  auto* o_seed = run->add_option("--seed", seed, "Campaign RNG seed");
  auto* o_k = run->add_option("--k", k, "Maximum branch distance K");
  auto* o_distance = run->add_option("--distance", distance, "abs | xor")
                         ->check(CLI::IsMember({"abs", "xor"}));
  auto* o_norm = run->add_option("--norm", norm, "linear | log")
                     ->check(CLI::IsMember({"linear", "log"}));
  auto* o_hidden = run->add_option("--hidden", hidden, "Hidden layer width");
  auto* o_epochs = run->add_option("--epochs", epochs, "Training epochs");
  auto* o_ratio = run->add_option("--havoc-ratio", ratio,
                                  "Havoc mutants per hot-byte mutant");
  auto* o_budget = run->add_option("--mutant-budget", budget,
                                   "Hot-byte mutants per seed and generation");
  auto* o_map = run->add_option("--map-size", map_size, "Edge bitmap size");
  auto* o_dump = run->add_flag("--dump-tmp", dump_tmp,
                               "Write every mutant under <out>/tmp/");

  // report
  auto* rep = app.add_subcommand("report", "Summarize a campaign directory");
  std::string report_dir;
  bool verify = false;
  rep->add_option("out_dir", report_dir, "Campaign output directory")->required();
  rep->add_flag("--verify", verify,
                "Re-execute pareto/ and check that it is non-dominated");

  auto* list = app.add_subcommand("targets", "List built-in targets");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    finch::print_targets(std::cout);
    return 0;
  }
  if (rep->parsed()) return finch::report(report_dir, std::cout, std::cerr, verify);

  finch::CampaignConfig cfg;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      cfg.load(in);
    }
    override_if(o_target, cfg, "target", target);
    override_if(o_seeds, cfg, "seeds", seeds);
    override_if(o_out, cfg, "out", out);
    override_if(o_execs, cfg, "execs", execs);
    override_if(o_seconds, cfg, "seconds", seconds);
    override_if(o_mode, cfg, "mode", mode);
    override_if(o_seed, cfg, "seed", seed);
    override_if(o_k, cfg, "k", k);
    override_if(o_distance, cfg, "distance", distance);
    override_if(o_norm, cfg, "norm", norm);
    override_if(o_hidden, cfg, "hidden", hidden);
    override_if(o_epochs, cfg, "epochs", epochs);
    override_if(o_ratio, cfg, "havoc_ratio", ratio);
    override_if(o_budget, cfg, "mutant_budget", budget);
    override_if(o_map, cfg, "map_size", map_size);
    if (o_dump->count() > 0) cfg.dump_tmp = dump_tmp;
    if (cfg.seeds_dir.empty() || cfg.out_dir.empty()) {
      std::cerr << "run: --seeds and --out are required\n";
      return 2;
    }
    return finch::run_campaign(cfg);
  } catch (const finch::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}
