#include <CLI11.hpp>
#include <iostream>

#include "idemc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Uniform sampling of small implausibility-defined regions"};
  app.require_subcommand(1);

  idemc::CommandOptions options;
  std::uint64_t seed = 0;
  std::string out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config, "configuration file")->required();
    sub->add_option("--seed", seed, "overrides run.seed");
    sub->add_option("--out", out, "overrides output.dir");
  };

  CLI::App* run = app.add_subcommand("run", "burn in (or load a ladder) and sample");
  add_common(run);
  run->add_option("--ladder", options.ladder, "ladder file from a previous `ladder` run");
  CLI::App* ladder = app.add_subcommand("ladder", "burn in only and save the ladder");
  add_common(ladder);
  CLI::App* eff = app.add_subcommand("eff", "evaluation-count model and cost table");
  add_common(eff);
  CLI::App* oracle = app.add_subcommand("oracle", "reference samples by rejection or direct draws");
  add_common(oracle);

  CLI11_PARSE(app, argc, argv);

  auto finish = [&](CLI::App* sub) {
    if (sub->count("--seed")) options.seed = seed;
    if (sub->count("--out")) options.out = out;
  };
  if (run->parsed()) {
    finish(run);
    return idemc::cmd_run(options, std::cout, std::cerr);
  }
  if (ladder->parsed()) {
    finish(ladder);
    return idemc::cmd_ladder(options, std::cout, std::cerr);
  }
  if (eff->parsed()) {
    finish(eff);
    return idemc::cmd_eff(options, std::cout, std::cerr);
  }
  finish(oracle);
  return idemc::cmd_oracle(options, std::cout, std::cerr);
}
