// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "md_systems.hpp"
#include "mdk/cli/bench.hpp"
#include "mdk/model/graph_network.hpp"
#include "mdk/neighbors/pullback.hpp"
#include "mdk/train/synthetic.hpp"
#include "mdk/train/trainer.hpp"
#include "support.hpp"

using namespace mdk;

namespace {

/// Collects failed checks; `detail` is printed after the verdict.
struct Outcome {
  std::vector<std::string> failures;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------- 1

/// O(N^2) reference over wrapped positions and the 27 neighboring images.
std::vector<CanonicalPair> reference_pairs(const System& s, double lower, double upper) {
  std::vector<Vec3> wrapped(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) wrapped[i] = s.box.wrap(s.positions[i]);
  std::vector<CanonicalPair> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s.batch[i] != s.batch[j]) continue;
      const double d = norm(check::exhaustive_image(wrapped[i] - wrapped[j], s.box, 1));
      if (d > lower && d <= upper) out.push_back({Pair{static_cast<std::int64_t>(i), static_cast<std::int64_t>(j)}, d});
    }
  }
  return out;
}

void neighbor_oracle(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  const int instances = 1000;
  double worst = 0.0;
  int mismatches = 0;
  for (int trial = 0; trial < instances; ++trial) {
    const BoxKind kind = static_cast<BoxKind>(trial % 3);
    const double upper = check::uniform(rng, 1.5, 3.0);
    const Box box = check::random_box(rng, kind, 2.0 * upper + 0.5, 5.0 * upper);
    const auto n = static_cast<std::size_t>(check::uniform_int(rng, 1, 256));
    const int batches = std::min<int>(static_cast<int>(n), check::uniform_int(rng, 1, 8));
    const System s = check::random_system(rng, n, box, batches, 4.0 * upper);
    NeighborSpec spec;
    spec.cutoff_upper = upper;
    spec.cutoff_lower = (trial / 3) % 2 ? 0.3 * upper : 0.0;
    spec.full_list = (trial / 6) % 2;
    spec.capacity = n * n + 1;
    spec.threads = 1;
    spec.strategy = Strategy::brute;
    const auto brute = canonicalize(build_neighbor_list(s, spec));
    spec.strategy = Strategy::cell;
    const auto cell = canonicalize(build_neighbor_list(s, spec));
    const auto ref = reference_pairs(s, spec.cutoff_lower, upper);
    bool same = brute.size() == ref.size() && cell.size() == ref.size();
    for (std::size_t k = 0; same && k < ref.size(); ++k) {
      same = brute[k].pair == ref[k].pair && cell[k].pair == ref[k].pair;
      worst = std::max({worst, std::abs(brute[k].distance - ref[k].distance), std::abs(cell[k].distance - ref[k].distance)});
    }
    if (!same) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  o.require(mismatches == 0, std::to_string(mismatches) + " instances disagree");
  o.require(worst <= 1e-10, "distance error " + fmt(worst));
  o.require(elapsed < 60.0, "runtime " + fmt(elapsed) + " s");
  o.detail << instances << " instances, max distance error " << fmt(worst) << ", " << fmt(elapsed) << " s";
}

// ---------------------------------------------------------------- 2

void pbc_exactness(Outcome& o) {
  std::mt19937_64 rng(77);
  const int draws = 10000;
  double worst = 0.0;
  for (int trial = 0; trial < draws; ++trial) {
    const BoxKind kind = trial % 2 ? BoxKind::triclinic : BoxKind::orthorhombic;
    const Box box = check::random_box(rng, kind, 4.0, 12.0);
    const Vec3 frac{check::uniform(rng, -1.5, 1.5), check::uniform(rng, -1.5, 1.5), check::uniform(rng, -1.5, 1.5)};
    const Vec3 delta = box.from_fractional(frac);
    // Shifts up to +-4 cover the 27 images of every delta drawn here.
    const double exhaustive = norm(check::exhaustive_image(delta, box, 4));
    worst = std::max(worst, std::abs(norm(minimum_image(delta, box)) - exhaustive));
  }
  o.require(worst <= 1e-12, "max deviation " + fmt(worst));
  o.detail << draws << " draws, max deviation " << fmt(worst) << " A";
}

// ---------------------------------------------------------------- 3

GNConfig tiny_config(std::size_t f, std::size_t k, std::size_t layers, double ru = 5.0) {
  GNConfig c;
  c.embedding_dimension = f;
  c.num_rbf = k;
  c.num_layers = layers;
  c.cutoff_upper = ru;
  c.max_z = 10;
  c.mean = 0.3;
  c.std = 1.7;
  return c;
}

NeighborSpec full_spec(double ru, std::size_t capacity = 1024) {
  NeighborSpec spec;
  spec.cutoff_upper = ru;
  spec.full_list = true;
  spec.capacity = capacity;
  spec.strategy = Strategy::brute;
  spec.threads = 1;
  return spec;
}

EnergyForces graph_eval(const GNParams& p, const GNConfig& c, const System& s, bool derivative = true) {
  return graph_energy_forces(p, c, s, build_neighbor_list(s, full_spec(c.cutoff_upper)), derivative);
}

/// Cluster with no two atoms closer than `min_sep` and random partial charges.
System cluster(std::mt19937_64& rng, std::size_t n, double extent, double min_sep) {
  std::vector<Vec3> pos;
  while (pos.size() < n) {
    const Vec3 p{check::uniform(rng, 0, extent), check::uniform(rng, 0, extent), check::uniform(rng, 0, extent)};
    bool ok = true;
    for (const auto& q : pos) ok = ok && norm(p - q) >= min_sep;
    if (ok) pos.push_back(p);
  }
  std::vector<int> z(n);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = std::vector<int>{1, 6, 7, 8}[rng() % 4];
    q[i] = check::uniform(rng, -1, 1);
  }
  return build_system(std::move(pos), std::move(z), std::nullopt, std::nullopt, q);
}

std::vector<std::pair<std::string, PriorTerm>> all_priors() {
  Atomref atomref;
  atomref.table = {{1, -0.5}, {6, -37.8}, {7, -54.6}, {8, -75.0}};
  D2 d2;
  d2.s6 = 1.0;
  return {{"Atomref", atomref}, {"Coulomb", Coulomb{1.5}}, {"ZBL", ZBL{}}, {"D2", d2}};
}

EnergyForces prior_eval(const PriorTerm& term, const System& s, double ru, std::size_t capacity = 256) {
  NeighborSpec spec = full_spec(ru, capacity);
  spec.full_list = false;
  return evaluate_prior(s, build_neighbor_list(s, spec), term);
}

void gradient_suite(Outcome& o) {
  std::mt19937_64 rng(31);
  const double h = 1e-4;
  double worst_prior = 0.0, worst_graph = 0.0, worst_second = 0.0, worst_param = 0.0;
  for (const auto& [name, term] : all_priors()) {
    for (int trial = 0; trial < 5; ++trial) {
      const System s = cluster(rng, 8, 3.0, 0.9);
      const auto fd = check::finite_difference_forces(
          s, [&](const System& t) { return prior_eval(term, t, 6.0).energy[0]; }, h);
      const double err = check::relative_error(prior_eval(term, s, 6.0).forces, fd);
      worst_prior = std::max(worst_prior, err);
      o.require(err < 1e-6, name + " forces rel err " + fmt(err));
    }
  }
  for (const std::size_t layers : {0u, 1u, 2u}) {
    for (int trial = 0; trial < 3; ++trial) {
      const GNConfig c = tiny_config(8, 8, layers);
      const GNParams p = GNParams::initialize(c, static_cast<std::uint64_t>(trial + 1));
      const Box box = trial == 2 ? Box::triclinic({11, 0, 0}, {2, 10.5, 0}, {-1, 3, 12}) : Box::none();
      const System s = check::random_system(rng, 10, box, 1, 4.5);
      const auto fd = check::finite_difference_forces(
          s, [&](const System& t) { return graph_eval(p, c, t, false).energy[0]; }, h);
      const double err = check::relative_error(graph_eval(p, c, s).forces, fd);
      worst_graph = std::max(worst_graph, err);
      o.require(err < 1e-6, std::to_string(layers) + "-layer network forces rel err " + fmt(err));
    }
  }
  // Directional derivative of the distance pullback.
  for (int trial = 0; trial < 3; ++trial) {
    const System s = check::random_system(rng, 25, Box::orthorhombic(7, 7, 7));
    NeighborSpec spec = full_spec(3.0, 4000);
    spec.full_list = false;
    const NeighborList list = build_neighbor_list(s, spec);
    std::vector<double> g(list.capacity(), 0.0);
    for (std::size_t k = 0; k < list.count; ++k) g[k] = check::uniform(rng, -1, 1);
    std::vector<Vec3> tangent(s.size());
    for (auto& v : tangent) v = {check::uniform(rng, -1, 1), check::uniform(rng, -1, 1), check::uniform(rng, -1, 1)};
    const auto relist = [&](double step) {
      NeighborList out = list;
      for (std::size_t k = 0; k < out.count; ++k) {
        const auto [i, j] = out.pairs[k];
        out.deltas[k] = minimum_image(s.positions[i] + tangent[i] * step - s.positions[j] - tangent[j] * step, s.box);
        out.distances[k] = norm(out.deltas[k]);
      }
      return out;
    };
    const double eps = 1e-5;
    const auto gp = distance_pullback(relist(eps), g, s.size());
    const auto gm = distance_pullback(relist(-eps), g, s.size());
    std::vector<Vec3> fd(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) fd[i] = (gp[i] - gm[i]) / (2 * eps);
    const double err = check::relative_error(distance_pullback_second(list, g, tangent).first, fd);
    worst_second = std::max(worst_second, err);
    o.require(err < 1e-6, "second pullback rel err " + fmt(err));
  }
  // Parameter gradients of a tiny two-sample model.
  GNConfig c = tiny_config(3, 3, 2);
  c.trainable_rbf = true;
  GNParams p = GNParams::initialize(c, 9);
  p.for_each([&](const std::string& name, Tensor& t) {
    if (name.find("_b") != std::string::npos) {
      for (auto& v : t.data) v = check::uniform(rng, -0.5, 0.5);
    }
  });
  const System s = build_system({Vec3{0, 0, 0}, Vec3{1.2, 0.3, 0}, Vec3{0.2, 1.4, -0.5}, Vec3{5, 5, 5},
                                 Vec3{5.9, 5.4, 5.2}},
                                {1, 6, 8, 7, 1}, std::vector<int>{0, 0, 0, 1, 1});
  const std::vector<double> upstream{0.7, -1.3};
  const NeighborList list = build_neighbor_list(s, full_spec(c.cutoff_upper));
  const auto objective = [&] {
    ForwardCache cache;
    const auto e = graph_forward(p, c, s, list, cache).energy;
    return upstream[0] * e[0] + upstream[1] * e[1];
  };
  ForwardCache cache;
  graph_forward(p, c, s, list, cache);
  const GNParams grad = graph_backward_params(p, c, s, list, cache, upstream);
  std::vector<std::pair<std::string, Tensor*>> tensors;
  p.for_each([&](const std::string& name, Tensor& t) { tensors.emplace_back(name, &t); });
  std::vector<const Tensor*> grads;
  grad.for_each([&](const std::string&, const Tensor& t) { grads.push_back(&t); });
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    Tensor& t = *tensors[ti].second;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double orig = t.data[k];
      t.data[k] = orig + 1e-5;
      const double up = objective();
      t.data[k] = orig - 1e-5;
      const double down = objective();
      t.data[k] = orig;
      const double fd = (up - down) / 2e-5;
      num += (grads[ti]->data[k] - fd) * (grads[ti]->data[k] - fd);
      den += fd * fd;
    }
    const double err = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    worst_param = std::max(worst_param, err);
    o.require(err < 1e-5, tensors[ti].first + " parameter gradient rel err " + fmt(err));
  }
  o.detail << "max rel err: priors " << fmt(worst_prior) << ", network forces " << fmt(worst_graph)
           << ", second pullback " << fmt(worst_second) << ", parameters " << fmt(worst_param);
}

// ---------------------------------------------------------------- 4

void static_shape_inertness(Outcome& o) {
  std::mt19937_64 rng(41);
  GNConfig c = tiny_config(8, 6, 2);
  c.static_shapes = true;
  const GNParams p = GNParams::initialize(c, 6);
  const auto priors = all_priors();
  double worst = 0.0;
  const int systems = 100;
  for (int trial = 0; trial < systems; ++trial) {
    const auto n = static_cast<std::size_t>(check::uniform_int(rng, 2, 24));
    const int batches = std::min<int>(static_cast<int>(n), check::uniform_int(rng, 1, 3));
    Box box = Box::none();
    while (trial % 4 == 3 && !(box.periodic() && box.min_perpendicular_width() >= 2.0 * c.cutoff_upper)) {
      box = check::random_box(rng, BoxKind::triclinic, 11.0, 14.0);
    }
    System s = check::random_system(rng, n, box, batches, 5.0);
    std::vector<double> q(n);
    for (auto& v : q) v = check::uniform(rng, -1, 1);
    s.charges = q;
    const NeighborList exact = build_neighbor_list(s, full_spec(c.cutoff_upper, n * n + 1));
    const std::size_t count = std::max<std::size_t>(1, exact.count);
    const NeighborList tight = build_neighbor_list(s, full_spec(c.cutoff_upper, count));
    const NeighborList roomy = build_neighbor_list(s, full_spec(c.cutoff_upper, 4 * count));
    const auto compare = [&](const EnergyForces& a, const EnergyForces& b, const std::string& what) {
      double err = 0.0;
      for (std::size_t k = 0; k < a.energy.size(); ++k) err = std::max(err, std::abs(a.energy[k] - b.energy[k]));
      for (std::size_t i = 0; i < s.size(); ++i) err = std::max(err, norm(a.forces[i] - b.forces[i]));
      worst = std::max(worst, err);
      if (err > 1e-12) o.require(false, what + " deviates by " + fmt(err) + " on system " + std::to_string(trial));
    };
    const EnergyForces plain = graph_energy_forces(p, c, s, tight);
    const PaddedInput padded = pad_static(s, roomy, c);
    const EnergyForces ghosted = graph_energy_forces(p, c, padded.system, padded.neighbors);
    compare(plain, ghosted, "network");
    if (ghosted.forces.back() != Vec3{}) o.require(false, "ghost atom feels a force");
    for (const auto& [name, term] : priors) {
      const EnergyForces reference = evaluate_prior(s, tight, term);
      compare(reference, evaluate_prior(s, roomy, term), name);
      compare(reference, evaluate_prior(padded.system, padded.neighbors, term), name + " (ghost atom)");
    }
  }
  o.detail << systems << " systems, capacity 4x pair count, network and priors, max deviation " << fmt(worst);
}

// ---------------------------------------------------------------- 5

/// Largest |E(r + eps) - E(r)| while atom `moving` steps across r_u.
double sweep_jump(const std::function<double(double)>& energy_at, double ru, double eps) {
  double worst = 0.0, prev = energy_at(ru - 10 * eps);
  for (int k = -9; k <= 10; ++k) {
    const double e = energy_at(ru + k * eps);
    worst = std::max(worst, std::abs(e - prev));
    prev = e;
  }
  return worst;
}

void cutoff_continuity(Outcome& o) {
  const double ru = 5.0;
  std::vector<std::pair<std::string, std::function<double(double)>>> curves;
  const GNConfig c = tiny_config(8, 8, 2, ru);
  const GNParams p = GNParams::initialize(c, 10);
  curves.emplace_back("network", [&](double d) {
    return graph_eval(p, c, build_system({Vec3{0, 0, 0}, Vec3{0.9, 0.5, 0}, Vec3{d, 0, 0}}, {1, 6, 8}), false).energy[0];
  });
  for (const auto& [name, term] : all_priors()) {
    if (name != "ZBL" && name != "D2") continue;  // the envelope-protected pair terms
    curves.emplace_back(name, [&, t = term](double d) {
      return prior_eval(t, build_system({Vec3{0, 0, 0}, Vec3{d, 0, 0}}, {6, 8}), ru).energy[0];
    });
  }
  for (const auto& [name, curve] : curves) {
    o.detail << name << ":";
    double prev_slope = 0.0;
    for (const double eps : {1e-3, 1e-4, 1e-5}) {
      const double jump = sweep_jump(curve, ru, eps);
      const double slope = jump / eps;
      o.detail << " " << fmt(jump);
      o.require(slope <= 1.0, name + " |dE| " + fmt(jump) + " at eps " + fmt(eps) + " exceeds eps * 1 eV/A");
      // At least proportional to eps: |dE|/eps may not grow as eps shrinks.
      if (eps < 1e-3) o.require(slope <= 1.05 * prev_slope + 1e-12, name + " |dE|/eps grows at eps " + fmt(eps));
      prev_slope = slope;
    }
    o.detail << "; ";
  }
}

// ---------------------------------------------------------------- 6

void symmetry_suite(Outcome& o) {
  std::mt19937_64 rng(61);
  const GNConfig c = tiny_config(8, 8, 2);
  const GNParams p = GNParams::initialize(c, 7);
  std::vector<std::pair<std::string, std::function<EnergyForces(const System&)>>> models;
  models.emplace_back("network", [&](const System& s) { return graph_eval(p, c, s); });
  for (const auto& [name, term] : all_priors()) {
    models.emplace_back(name, [t = term](const System& s) { return prior_eval(t, s, 5.0); });
  }
  double worst_e = 0.0, worst_f = 0.0, worst_pair = 0.0;
  const Mat3 r = check::rotation(1.1, 0.3, -2.0);
  for (const auto& [name, model] : models) {
    for (int trial = 0; trial < 5; ++trial) {
      const System s = cluster(rng, 12, 5.0, 0.8);
      const EnergyForces base = model(s);
      const double scale = std::max(1.0, std::abs(base.energy[0]));
      System rotated = s, shifted = s, permuted = s;
      for (auto& x : rotated.positions) x = matvec(r, x);
      for (auto& x : shifted.positions) x += Vec3{3.3, -7.1, 0.25};
      std::vector<std::size_t> perm(s.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t i = 0; i < s.size(); ++i) {
        permuted.positions[i] = s.positions[perm[i]];
        permuted.species[i] = s.species[perm[i]];
        (*permuted.charges)[i] = (*s.charges)[perm[i]];
      }
      const EnergyForces er = model(rotated), et = model(shifted), ep = model(permuted);
      for (const double e : {er.energy[0], et.energy[0], ep.energy[0]}) {
        const double dev = std::abs(e - base.energy[0]) / scale;
        worst_e = std::max(worst_e, dev);
        o.require(dev <= 1e-10, name + " energy changes by " + fmt(dev));
      }
      Vec3 total{};
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double dev = std::max({norm(er.forces[i] - matvec(r, base.forces[i])), norm(et.forces[i] - base.forces[i]),
                                     norm(ep.forces[i] - base.forces[perm[i]])});
        worst_f = std::max(worst_f, dev);
        o.require(dev <= 1e-10, name + " force covariance off by " + fmt(dev));
        total += base.forces[i];
      }
      worst_pair = std::max(worst_pair, norm(total));
      o.require(norm(total) <= 1e-10, name + " net force " + fmt(norm(total)));
    }
    // Each pair on its own: equal and opposite.
    const System s = cluster(rng, 6, 4.0, 0.8);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        const System pair = build_system({s.positions[i], s.positions[j]}, {s.species[i], s.species[j]}, std::nullopt,
                                         std::nullopt, std::vector<double>{(*s.charges)[i], (*s.charges)[j]});
        const EnergyForces f = model(pair);
        const double dev = norm(f.forces[0] + f.forces[1]);
        worst_pair = std::max(worst_pair, dev);
        o.require(dev <= 1e-12, name + " pair forces not opposite by " + fmt(dev));
      }
    }
  }
  o.detail << "max deviation: energy " << fmt(worst_e) << ", forces " << fmt(worst_f) << ", Newton " << fmt(worst_pair);
}

// ---------------------------------------------------------------- 7

TrainConfig dimer_config() {
  TrainConfig c;
  c.model.embedding_dimension = 32;
  c.model.num_layers = 1;
  c.model.num_rbf = 16;
  c.model.max_z = 10;
  c.schedule.lr = 1e-3;
  c.schedule.lr_warmup_steps = 50;
  c.schedule.lr_factor = 0.5;
  c.schedule.lr_patience = 5;
  c.schedule.lr_min = 1e-6;
  c.schedule.early_stopping_patience = 30;
  c.batch_size = 32;
  c.ema_alpha_y = 0.5;
  return c;
}

void training(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset d = make_dimer_dataset(1000, 1, 1, 0.7, 3.0, ZBL{}, 5.0, 7);
  TrainConfig c = dimer_config();
  c.num_epochs = 50;
  const Checkpoint ck = train(c, d);
  Targets t;
  const EnergyForces pred = evaluate_frames(ck.potential(), d, ck.split.val, 64, false, &t);
  const double ratio = loss_and_metrics(pred, t, 1, 0, Stage::val).at("mse_y") / ck.initial_val_metrics.at("mse_y");
  const double elapsed = seconds_since(start);
  o.require(ratio <= 1e-2, "validation MSE ratio " + fmt(ratio));
  o.require(elapsed < 300.0, "training took " + fmt(elapsed) + " s");

  // Manufactured stream through the scheduler alone.
  LRSchedule sc;
  sc.lr = 1e-3;
  sc.lr_factor = 0.5;
  sc.lr_patience = 3;
  sc.lr_min = 1.5e-4;
  sc.early_stopping_patience = 20;
  Scheduler s(sc);
  std::vector<std::uint64_t> decays;
  std::uint64_t stop = 0;
  for (std::uint64_t epoch = 1; epoch <= 100 && !stop; ++epoch) {
    const EpochDecision dec = s.end_epoch(1.0);
    if (dec.decayed) decays.push_back(epoch);
    if (dec.stop) stop = epoch;
  }
  o.require(decays == std::vector<std::uint64_t>{4, 7, 10} && stop == 21, "scheduler decay/stop epochs");

  // And through the training loop.
  const Dataset small = make_dimer_dataset(40, 1, 1, 0.8, 3.0, ZBL{}, 5.0, 9);
  TrainConfig m = dimer_config();
  m.model.embedding_dimension = 4;
  m.num_epochs = 200;
  m.schedule.lr_patience = 4;
  m.schedule.lr_min = 1e-4;
  m.schedule.early_stopping_patience = 15;
  TrainHooks hooks;
  hooks.val_loss = [](std::uint64_t epoch, double) { return epoch <= 3 ? 1.0 / static_cast<double>(epoch) : 1.0; };
  const Checkpoint mk = train(m, small, {}, hooks);
  std::vector<std::uint64_t> loop_decays;
  for (const auto& r : mk.history) {
    if (r.decayed) loop_decays.push_back(r.epoch);
  }
  o.require(loop_decays == std::vector<std::uint64_t>{7, 11, 15} && mk.history.size() == 18,
            "training loop decay/stop epochs");
  o.detail << "val MSE ratio " << fmt(ratio) << " in " << fmt(elapsed) << " s; decays at 4,7,10 stop 21 (scheduler), "
           << "7,11,15 stop 18 (training loop)";
}

// ---------------------------------------------------------------- 8

void scaling(Outcome& o) {
  BenchConfig c;
  c.particles = {1024, 4096, 16384, 65536};
  c.batches = {1};
  c.mean_neighbors = 64;
  c.repetitions = 2;
  c.warmup_repetitions = 1;
  c.threads = 1;
  const auto start = std::chrono::steady_clock::now();
  const auto rows = bench_neighbors(c);
  const double elapsed = seconds_since(start);
  std::vector<double> n, cell, brute;
  for (const auto& r : rows) {
    n.push_back(static_cast<double>(r.particles));
    cell.push_back(r.cell->mean_ms);
    brute.push_back(r.brute->mean_ms);
    o.require(r.cell->consistent && r.brute->consistent && r.cell->pairs == r.brute->pairs,
              "inconsistent pair sets at N=" + std::to_string(r.particles));
  }
  const double cell_slope = loglog_slope(n, cell);
  const double brute_slope = loglog_slope({n.begin() + 1, n.end()}, {brute.begin() + 1, brute.end()});
  o.require(cell_slope <= 1.4, "cell slope " + fmt(cell_slope));
  o.require(brute_slope >= 1.7, "brute slope " + fmt(brute_slope));
  o.require(cell.back() < brute.back(), "cell not faster at 64k");
  o.require(elapsed < 600.0, "runtime " + fmt(elapsed) + " s");
  o.detail << "cell slope " << fmt(cell_slope) << ", brute slope " << fmt(brute_slope) << " (upper three), 64k: cell "
           << fmt(cell.back()) << " ms, brute " << fmt(brute.back()) << " ms, " << fmt(elapsed) << " s";
}

// ---------------------------------------------------------------- 9

void md_suite(Outcome& o) {
  const toy::Setup cluster_setup = toy::nve_cluster();
  const double dt = 0.1;
  MDState s = make_state(cluster_setup.system, cluster_setup.potential, 298.5, 3);
  const double e0 = s.potential_energy + synchronous_kinetic_energy(s, dt);
  double drift = 0.0;
  run_simulation(s, cluster_setup.potential, 10000, {dt, 298.5, 0.0}, 10000, [&](const MDState& st) {
    drift = std::max(drift, std::abs(st.potential_energy + synchronous_kinetic_energy(st, dt) - e0));
  });
  drift /= static_cast<double>(cluster_setup.system.size());
  o.require(drift < 1e-3, "NVE drift " + fmt(drift) + " eV/atom");

  const toy::Setup lattice = toy::tethered_lattice();
  const LangevinParams params{1.0, 298.5, 1.0};
  MDState t = make_state(lattice.system, lattice.potential, params.temperature, 1);
  run_simulation(t, lattice.potential, 10000, params, 10000);
  double sum = 0.0;
  std::size_t count = 0;
  run_simulation(t, lattice.potential, 100000, params, 100000, [&](const MDState& st) {
    sum += kinetic_temperature(st);
    ++count;
  });
  const double temperature = sum / static_cast<double>(count);
  const double rel = std::abs(temperature / params.temperature - 1.0);
  o.require(rel <= 0.03, "NVT mean temperature " + fmt(temperature) + " K");

  const auto run = [&](std::uint64_t seed) {
    MDState st = make_state(cluster_setup.system, cluster_setup.potential, 298.5, seed);
    return run_simulation(st, cluster_setup.potential, 500, params, 10).trajectory;
  };
  const Trajectory a = run(4);
  o.require(a == run(4), "same seed gives a different trajectory");
  o.require(!(a == run(5)), "different seeds give the same trajectory");
  o.detail << "NVE drift " << fmt(drift) << " eV/atom over 1e4 steps; NVT " << fmt(temperature) << " K over 1e5 steps ("
           << lattice.system.size() << " atoms); seeded runs bit-identical";
}

// ---------------------------------------------------------------- 10

void unit_conversion(Outcome& o) {
  const Throughput t = throughput(1e6, 86400.0, 1.0);
  o.require(t.msteps_per_day == 1.0 && t.ns_per_day == 1.0, "1 Msteps/day at 1 fs is not exactly 1 ns/day");
  o.require(msteps_per_day_from_ms(86.4) == 1.0, "86.4 ms per step is not exactly 1 Msteps/day");
  std::mt19937_64 rng(101);
  for (int k = 0; k < 1000; ++k) {
    const Throughput r = throughput(check::uniform(rng, 1, 1e7), check::uniform(rng, 1e-3, 1e5), 1.0);
    if (r.ns_per_day != r.msteps_per_day) {
      o.require(false, "ns/day differs from Msteps/day at 1 fs");
      break;
    }
  }
  o.detail << "throughput(1e6 steps, 86400 s, 1 fs) = " << t.msteps_per_day << " Msteps/day = " << t.ns_per_day
           << " ns/day";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"neighbor oracle equivalence", neighbor_oracle},
      {"PBC exactness", pbc_exactness},
      {"gradient suite", gradient_suite},
      {"static-shape inertness", static_shape_inertness},
      {"cutoff continuity", cutoff_continuity},
      {"symmetry suite", symmetry_suite},
      {"training", training},
      {"neighbor scaling", scaling},
      {"MD suite", md_suite},
      {"unit conversion exactness", unit_conversion},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool pass = o.failures.empty();
    failed += pass ? 0 : 1;
    std::printf("[%s] %zu %s (%.1f s): %s\n", pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                seconds_since(start), o.detail.str().c_str());
    for (std::size_t f = 0; f < std::min<std::size_t>(o.failures.size(), 5); ++f) {
      std::printf("       %s\n", o.failures[f].c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
