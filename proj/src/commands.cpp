#include "idemc/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>

#include "idemc/efficiency.hpp"
#include "idemc/errors.hpp"
#include "idemc/external_evaluator.hpp"
#include "idemc/oracle.hpp"
#include "idemc/persistence.hpp"

namespace idemc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSamplingStream = 0x5A3D;
constexpr std::uint64_t kOracleStream = 0x0AC1;
constexpr std::size_t kTraceStride = 10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RunConfig resolve(const CommandOptions& options) {
  RunConfig config = load_config(options.config);
  if (options.seed) config.seed = *options.seed;
  if (options.out) config.output.dir = *options.out;
  config.ladder.seed = config.seed;
  config.ladder.threads = config.threads;
  return config;
}

std::string path_in(const RunConfig& config, const std::string& name) {
  return (fs::path(config.output.dir) / name).string();
}

void prepare_dir(const RunConfig& config) { fs::create_directories(config.output.dir); }

int guarded(std::ostream& err, const std::function<int()>& body) {
  auto report = [&](const char* kind, const std::string& message, json extra, int code) {
    extra["error"] = kind;
    extra["message"] = message;
    err << extra.dump() << '\n';
    return code;
  };
  try {
    return body();
  } catch (const ParseError& e) {
    return report("parse", e.what(), {{"key", e.key()}, {"line", e.line()}}, 1);
  } catch (const InfeasibleError& e) {
    return report("infeasible", e.what(), {{"volume_upper_bound", e.volume_upper_bound()}}, 2);
  } catch (const EmptyRegionError& e) {
    return report("empty_region", e.what(), {{"rung_trajectory", e.rung_trajectory()}}, 2);
  } catch (const TransportError& e) {
    return report("transport", e.what(), {{"offending_line", e.offending_line()}}, 1);
  } catch (const InvariantViolation& e) {
    return report("invariant", e.what(), json::object(), 1);
  } catch (const ContractError& e) {
    return report("contract", e.what(), json::object(), 1);
  } catch (const DomainError& e) {
    return report("domain", e.what(), json::object(), 1);
  } catch (const std::exception& e) {
    return report("internal", e.what(), json::object(), 1);
  }
}

json base_report(const RunConfig& config, const Membership& membership) {
  return {{"seed", config.seed},
          {"config", config_echo(config)},
          {"problem",
           {{"name", membership.function().name()},
            {"dimension", membership.dimension()},
            {"waves", membership.waves()},
            {"cutoffs", membership.cutoffs()}}}};
}

}  // namespace

SamplingOutcome sample_phase(const Membership& membership, BurnInResult& burn_in,
                             const RunConfig& config) {
  Sampler sampler(membership, config.sampling_moves(),
                  derive_seed(config.seed, kSamplingStream), config.threads);
  sampler.set_kernels(burn_in.kernels);
  Population& population = burn_in.population;
  population.reset_tallies();

  SamplingOutcome out;
  out.levels.resize(population.size());
  const std::size_t T = config.output.T;
  const std::uint64_t start = membership.evaluation_count();
  out.target = sampler.run(population, config.output.N, T,
                           [&](std::size_t t, const Population& pop) {
                             if (t % T != 0) return;
                             const std::size_t r = t / T;
                             for (std::size_t i = 0; i < pop.size(); ++i) {
                               out.levels[i].push_back(pop[i].x, pop[i].values);
                               if (i == pop.levels() || r % kTraceStride == 0) {
                                 out.trace.push_back({r, i, pop[i].x, pop[i].values});
                               }
                             }
                           });
  out.stats = PhaseStats{population.tallies(), population.exchange_tallies(),
                         membership.evaluation_count() - start, config.output.N * T};
  return out;
}

int cmd_run(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = resolve(options);
    const Membership membership = make_membership(config.problem);
    json report = base_report(config, membership);

    const auto burn_start = Clock::now();
    const bool resumed = !options.ladder.empty();
    BurnInResult burn_in = resumed ? load_ladder(options.ladder, membership, config.ladder)
                                   : build_multiwave_ladder(membership, config.ladder);
    const double burn_seconds = seconds_since(burn_start);
    log << "ladder: " << burn_in.ladder.chromosomes() << " chromosomes"
        << (resumed ? " (loaded)" : "") << '\n';
    json ladder_file = resumed ? json() : ladder_to_json(burn_in, config.problem.name);

    const auto sample_start = Clock::now();
    SamplingOutcome outcome = sample_phase(membership, burn_in, config);
    const double sample_seconds = seconds_since(sample_start);

    report["ladder"] = ladder_summary(burn_in.ladder);
    report["ladder_resumed"] = resumed;
    if (!resumed) report["burn_in"] = phase_to_json(burn_in.stats);
    report["sampling"] = phase_to_json(outcome.stats);
    report["evaluations"] = {{"burn_in", burn_in.stats.evaluations},
                             {"sampling", outcome.stats.evaluations},
                             {"total", membership.evaluation_count()}};
    report["wall_clock_seconds"] = {{"burn_in", burn_seconds}, {"sampling", sample_seconds}};
    report["samples"] = outcome.target.size();

    prepare_dir(config);
    const std::size_t d = membership.dimension();
    const std::size_t m = membership.waves();
    write_samples_csv(path_in(config, "samples.csv"), outcome.target, d, m);
    for (std::size_t i = 0; i < outcome.levels.size(); ++i) {
      write_samples_csv(path_in(config, "level_" + std::to_string(i) + ".csv"),
                        outcome.levels[i], d, m);
    }
    {
      std::ofstream trace(path_in(config, "trace.csv"));
      trace << "retained,level," << csv_header(d, m) << '\n';
      for (const auto& row : outcome.trace) {
        trace << row.retained << ',' << row.level << ',';
        write_csv_row(trace, row.x, row.values);
      }
    }
    if (!resumed) write_json(path_in(config, "ladder.json"), ladder_file);
    write_json(path_in(config, "report.json"), report);
    log << "wrote " << outcome.target.size() << " samples to " << config.output.dir << '\n';
    return 0;
  });
}

int cmd_ladder(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = resolve(options);
    const Membership membership = make_membership(config.problem);
    json report = base_report(config, membership);
    const auto start = Clock::now();
    BurnInResult burn_in = build_multiwave_ladder(membership, config.ladder);
    report["ladder"] = ladder_summary(burn_in.ladder);
    report["burn_in"] = phase_to_json(burn_in.stats);
    report["evaluations"] = {{"burn_in", burn_in.stats.evaluations},
                             {"total", membership.evaluation_count()}};
    report["wall_clock_seconds"] = {{"burn_in", seconds_since(start)}};

    prepare_dir(config);
    save_ladder(path_in(config, "ladder.json"), burn_in, config.problem.name);
    write_json(path_in(config, "report.json"), report);
    log << "ladder: " << burn_in.ladder.chromosomes() << " chromosomes, volume estimate "
        << estimate_volume(burn_in.ladder).realized << '\n';
    return 0;
  });
}

int cmd_eff(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = resolve(options);
    CostParams params;
    params.N = static_cast<double>(config.output.N);
    params.T = static_cast<double>(config.output.T);
    params.p = config.ladder.p;
    params.s = static_cast<double>(config.ladder.s);
    params.s_n = static_cast<double>(config.ladder.s_n);
    params.M = static_cast<double>(config.ladder.moves.mutations_per_step);
    params.pm_burn = config.ladder.moves.mutation_probability;
    params.pm_samp = config.pm_samp;
    params.chromosomes = config.eff.chromosomes;
    if (config.eff.volume) params.V_T = *config.eff.volume;

    json report = {{"config", config_echo(config)}};
    const auto old_precision = log.precision(15);
    if (config.eff.volume || config.eff.chromosomes) {
      const std::size_t n = params.chromosomes ? *params.chromosomes
                                               : expected_chromosomes(params.V_T, params.p);
      report["chromosomes"] = n;
      report["expected_evals_idemc"] = expected_evals_idemc(params);
      log << "chromosomes: " << n << '\n';
      log << "expected IDEMC evaluations: " << expected_evals_idemc(params) << '\n';
    }
    if (config.eff.volume) {
      report["expected_evals_rejection"] = expected_evals_rejection(params.N, params.V_T);
      log << "expected rejection evaluations: " << expected_evals_rejection(params.N, params.V_T)
          << '\n';
    }
    params.chromosomes.reset();
    const double crossover = cost_crossover(params, config.eff.grid_lo, config.eff.grid_hi);
    report["crossover_volume"] = crossover;
    log << "rejection becomes dearer below V_T = " << crossover << '\n';
    log.precision(old_precision);

    const auto rows =
        cost_table(params, log_grid(config.eff.grid_lo, config.eff.grid_hi, config.eff.per_decade));
    prepare_dir(config);
    {
      std::ofstream table(path_in(config, "cost_table.csv"));
      write_cost_table(table, rows);
    }
    write_json(path_in(config, "report.json"), report);
    return 0;
  });
}

int cmd_oracle(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = resolve(options);
    const Membership membership = make_membership(config.problem);
    json report = base_report(config, membership);
    Rng rng(derive_seed(config.seed, kOracleStream));
    SampleSet samples;
    if (config.oracle.method == "direct") {
      const auto ellipsoids = target_ellipsoids(membership);
      samples = union_ellipsoid_sample(ellipsoids, membership.cutoffs().front(), membership.box(),
                                       config.output.N, rng);
      for (std::size_t k = 0; k < samples.size(); ++k) {
        samples.values[k] = membership.evaluate_uncounted(samples.points[k]);
      }
      report["method"] = "direct";
    } else {
      RejectionResult result =
          rejection_sample(membership, config.output.N, rng, config.oracle.max_attempts);
      report["method"] = "rejection";
      report["attempts"] = result.attempts;
      report["acceptance"] = result.acceptance();
      samples = std::move(result.samples);
    }
    prepare_dir(config);
    write_samples_csv(path_in(config, "oracle_samples.csv"), samples, membership.dimension(),
                      membership.waves());
    write_json(path_in(config, "report.json"), report);
    log << "wrote " << samples.size() << " oracle samples to " << config.output.dir << '\n';
    return 0;
  });
}

}  // namespace idemc
