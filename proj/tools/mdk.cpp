// mdk: train, simulate, infer, benchmark and prior-scan front end.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numeric failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "mdk/cli/app.hpp"
#include "mdk/cli/bench.hpp"
#include "mdk/md/simulation.hpp"
#include "mdk/priors/dimer_scan.hpp"
#include "mdk/train/checkpoint.hpp"

namespace {

using namespace mdk;

struct Options {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> paths;
};

RunConfig load_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : parse_config_file(o.config);
  if (o.seed) c.train.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  c.bench.seed = c.train.seed;
  c.bench.threads = c.threads;
  c.bench.cutoff = c.train.model.cutoff_upper;
  c.bench.max_num_neighbors = c.train.model.max_num_neighbors;
  return c;
}

/// Stream for --output, or stdout without one.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw InputError("cannot write " + path);
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int cmd_train(const Options& o) {
  const RunConfig c = load_config(o);
  const Dataset data = load_dataset(o.paths.empty() ? c.dataset : o.paths[0]);
  PriorStack priors = build_priors(c.priors, species_of(data));
  TrainHooks hooks;
  hooks.on_epoch = [](const EpochRecord& r) {
    std::cout << "epoch " << r.epoch << " lr " << r.lr << " train_loss " << r.train_loss << " val_loss " << r.val_loss
              << (r.decayed ? " (lr decayed)" : "") << '\n';
  };
  const Checkpoint ckpt = train(c.train, data, priors, hooks);
  const std::string path = o.output.empty() ? "checkpoint.mdk" : o.output;
  save_checkpoint(ckpt, path);
  for (const auto& [k, v] : ckpt.test_metrics) std::cout << "test " << k << ' ' << v << '\n';
  std::cout << "checkpoint written to " << path << '\n';
  return 0;
}

int cmd_infer(const Options& o) {
  if (o.paths.size() != 2) throw ConfigError("infer expects: <checkpoint> <structures.xyz>");
  const RunConfig c = load_config(o);
  const Checkpoint ckpt = load_checkpoint(o.paths[0]);
  ComposedPotential pot = ckpt.potential();
  pot.derivative = c.derivative;
  const Dataset data = load_dataset(o.paths[1], false);
  Output out(o.output);
  for (const Frame& f : data.frames) {
    const System s = frame_system(f);
    const EnergyForces ef = evaluate(pot, s, pot.neighbor_spec(s.size(), c.train.model.max_num_neighbors));
    Frame result = f;
    result.energy = ef.energy[0];
    if (pot.derivative) {
      result.forces = ef.forces;
    } else {
      result.forces.reset();
    }
    write_extxyz_frame(out.get(), result);
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  if (o.paths.empty() || o.paths.size() > 2) throw ConfigError("simulate expects: <structure.xyz> [checkpoint]");
  const RunConfig c = load_config(o);
  const Dataset start = load_dataset(o.paths[0], false);
  if (start.frames.empty()) throw InputError(o.paths[0] + ": no frames");
  const Frame& frame = start.frames.front();
  ComposedPotential pot;
  if (o.paths.size() == 2) {
    pot = load_checkpoint(o.paths[1]).potential();
  } else {
    pot.priors = build_priors(c.priors, {frame.species.begin(), frame.species.end()});
    pot.cutoff_upper = c.train.model.cutoff_upper;
    pot.cutoff_lower = c.train.model.cutoff_lower;
  }
  MDState state = make_state(frame_system(frame), pot, c.md.langevin.temperature, c.train.seed);
  const SimulationResult r = run_simulation(state, pot, c.md.steps, c.md.langevin, c.md.stride);
  const std::string path = o.output.empty() ? "trajectory.xyz" : o.output;
  {
    std::ofstream traj(path);
    if (!traj) throw InputError("cannot write " + path);
    write_trajectory(traj, r.trajectory, state.system);
    std::ofstream meta(path + ".meta");
    write_run_metadata(meta, r, state.size());
  }
  std::cout << "steps " << c.md.steps << " wall_seconds " << r.wall_seconds << " msteps_per_day "
            << r.rate.msteps_per_day << " ns_per_day " << r.rate.ns_per_day << '\n';
  return 0;
}

int cmd_bench_neighbors(const Options& o) {
  const RunConfig c = load_config(o);
  const auto rows = bench_neighbors(c.bench);
  Output out(o.output);
  write_neighbor_csv(out.get(), rows);
  if (o.output.empty()) {
    write_capacity_csv(std::cerr, rows);
  } else {
    std::ofstream cap(o.output + ".capacity.csv");
    write_capacity_csv(cap, rows);
  }
  return 0;
}

int cmd_bench_model(const Options& o) {
  if (o.paths.empty()) throw ConfigError("bench-model expects one or more structure files");
  const RunConfig c = load_config(o);
  std::vector<std::pair<std::string, System>> structures;
  for (const auto& p : o.paths) {
    const Dataset d = load_dataset(p, false);
    if (d.frames.empty()) throw InputError(p + ": no frames");
    const auto slash = p.find_last_of('/');
    structures.emplace_back(p.substr(slash == std::string::npos ? 0 : slash + 1), frame_system(d.frames.front()));
  }
  const auto rows = bench_model(c.train.model, c.bench, structures);
  Output out(o.output);
  out.get() << "million steps per day (energy + forces)\n";
  write_model_table(out.get(), rows, c.bench.layers);
  return 0;
}

int cmd_scan_prior(const Options& o) {
  const RunConfig c = load_config(o);
  if (c.scan_species.size() != 2) throw ConfigError("scan_species needs two atomic numbers");
  if (!c.scan_charges.empty() && c.scan_charges.size() != 2) throw ConfigError("scan_charges needs zero or two values");
  if (c.scan_points < 2) throw ConfigError("scan_points must be >= 2");
  if (!(c.scan_min > 0.0 && c.scan_min < c.train.model.cutoff_upper)) {
    throw ConfigError("scan_min must lie in (0, cutoff_upper)");
  }
  const PriorStack priors = build_priors(c.priors, {c.scan_species[0], c.scan_species[1]});
  if (priors.empty()) throw ConfigError("scan-prior needs at least one prior_model entry");
  std::vector<double> distances(c.scan_points);
  const double ru = c.train.model.cutoff_upper;
  for (std::size_t k = 0; k < c.scan_points; ++k) {
    distances[k] = c.scan_min + (ru - c.scan_min) * static_cast<double>(k) / static_cast<double>(c.scan_points - 1);
  }
  std::optional<double> qi, qj;
  if (!c.scan_charges.empty()) qi = c.scan_charges[0], qj = c.scan_charges[1];
  std::vector<PairEnergyProfile> profiles;
  for (const auto& term : priors.terms) {
    profiles.push_back(dimer_scan(term, c.scan_species[0], c.scan_species[1], qi, qj, distances, ru));
  }
  Output out(o.output);
  std::ostream& os = out.get();
  os << "distance_angstrom";
  for (const auto& name : c.priors.prior_model) os << ',' << name << "_ev";
  os << '\n';
  os.precision(17);
  for (std::size_t k = 0; k < distances.size(); ++k) {
    os << distances[k];
    for (const auto& p : profiles) os << ',' << p.energies[k];
    os << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdk: neural network potentials with physical priors"};
  app.require_subcommand(1);
  Options o;
  const auto common = [&](CLI::App* sub, const std::string& paths_help) {
    sub->add_option("--config", o.config, "flat key: value configuration file");
    sub->add_option("--output", o.output, "output path");
    sub->add_option("--seed", o.seed, "override the configured seed");
    sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
    if (!paths_help.empty()) sub->add_option("paths", o.paths, paths_help);
    return sub;
  };
  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> commands{
      {common(app.add_subcommand("train", "train a network"), "dataset (.xyz or binary container)"), cmd_train},
      {common(app.add_subcommand("simulate", "Langevin dynamics"), "structure.xyz [checkpoint]"), cmd_simulate},
      {common(app.add_subcommand("infer", "energies and forces"), "checkpoint structures.xyz"), cmd_infer},
      {common(app.add_subcommand("bench-neighbors", "neighbor search timings"), ""), cmd_bench_neighbors},
      {common(app.add_subcommand("bench-model", "model throughput"), "structure files"), cmd_bench_model},
      {common(app.add_subcommand("scan-prior", "pair energy profiles"), ""), cmd_scan_prior},
  };
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    for (const auto& [sub, run] : commands) {
      if (sub->parsed()) return run(o);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const OverflowError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
