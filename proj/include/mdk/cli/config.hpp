#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mdk/core/error.hpp"
#include "mdk/md/integrator.hpp"
#include "mdk/train/trainer.hpp"

namespace mdk {

/// Prior terms selected by name (Atomref, Coulomb, D2, ZBL) and their parameters.
struct PriorConfig {
  std::vector<std::string> prior_model;
  double coulomb_switch_radius = 1.0;
  double d2_s6 = 0.75;
};

struct MDConfig {
  LangevinParams langevin;
  std::uint64_t steps = 1000;
  std::uint64_t stride = 10;
};

struct BenchConfig {
  std::vector<std::size_t> particles{1024, 4096, 16384, 65536};
  std::vector<std::size_t> batches{1};
  double mean_neighbors = 64.0;
  double cutoff = 5.0;
  std::size_t repetitions = 50;
  std::size_t warmup_repetitions = 3;
  std::uint64_t seed = 1;
  std::vector<std::string> strategies{"cell", "brute"};
  std::vector<std::size_t> layers{0, 1, 2};
  std::size_t max_num_neighbors = 64;
  unsigned threads = 0;

  void validate() const {
    if (particles.empty() || batches.empty()) throw ConfigError("particles and batches must be non-empty");
    for (const auto n : particles) {
      if (n < 1) throw ConfigError("particle counts must be >= 1");
    }
    for (const auto b : batches) {
      if (b < 1) throw ConfigError("batch counts must be >= 1");
    }
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (!(mean_neighbors > 0.0)) throw ConfigError("mean_neighbors must be positive");
    if (!(cutoff > 0.0)) throw ConfigError("cutoff_upper must be positive");
    for (const auto& s : strategies) {
      if (s != "cell" && s != "brute") throw ConfigError("unknown strategy '" + s + "' (expected cell or brute)");
    }
  }
};

/// Everything a CLI run can be configured with. Keys mirror the training
/// hyperparameter vocabulary; see `config_keys()` for the full list.
struct RunConfig {
  TrainConfig train;
  PriorConfig priors;
  MDConfig md;
  BenchConfig bench;
  std::string dataset;
  bool derivative = true;
  std::string rbf_type = "expnorm";
  bool vector_cutoff = true;
  std::vector<int> scan_species{1, 1};
  std::vector<double> scan_charges;
  double scan_min = 0.1;
  std::size_t scan_points = 200;
  unsigned threads = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("type error: " + key + " expects " + (std::is_floating_point_v<T> ? "a number" : "an integer") +
                      ", got '" + text + "'");
  }
  return value;
}

inline std::vector<std::string> split_list(std::string text) {
  text = trim(text);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw ConfigError("type error: unterminated list '" + text + "'");
    text = text.substr(1, text.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (item.size() >= 2 && (item.front() == '"' || item.front() == '\'') && item.back() == item.front()) {
      item = item.substr(1, item.size() - 2);
    }
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
void assign(T& target, const std::string& text, const std::string& key) {
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "True") {
      target = true;
    } else if (text == "false" || text == "False") {
      target = false;
    } else {
      throw ConfigError("type error: " + key + " expects true or false, got '" + text + "'");
    }
  } else if constexpr (std::is_same_v<T, std::string>) {
    target = text;
    if (target.size() >= 2 && (target.front() == '"' || target.front() == '\'') && target.back() == target.front()) {
      target = target.substr(1, target.size() - 2);
    }
  } else if constexpr (std::is_arithmetic_v<T>) {
    if constexpr (std::is_unsigned_v<T>) {
      if (!text.empty() && text.front() == '-') {
        throw ConfigError("type error: " + key + " expects a non-negative integer, got '" + text + "'");
      }
    }
    target = parse_number<T>(text, key);
  } else {
    T items;
    for (const auto& item : split_list(text)) {
      typename T::value_type v{};
      assign(v, item, key);
      items.push_back(v);
    }
    target = items;
  }
}

template <typename T>
std::string show(const T& value) {
  if constexpr (std::is_same_v<T, bool>) {
    return value ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return value;
  } else if constexpr (std::is_floating_point_v<T>) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
  } else if constexpr (std::is_arithmetic_v<T>) {
    return std::to_string(value);
  } else {
    std::string out = "[";
    for (std::size_t k = 0; k < value.size(); ++k) out += (k ? ", " : "") + show(value[k]);
    return out + "]";
  }
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace detail

struct ConfigKey {
  std::string name;
  std::string type;
  std::string description;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

namespace detail {

template <typename Access>
ConfigKey make_key(std::string name, std::string type, std::string description, Access access) {
  const std::string key = name;
  return ConfigKey{std::move(name), std::move(type), std::move(description),
                   [access, key](RunConfig& c, const std::string& text) { assign(access(c), text, key); },
                   [access](const RunConfig& c) { return show(access(const_cast<RunConfig&>(c))); }};
}

}  // namespace detail

/// The recognized keys, in documentation order.
inline const std::vector<ConfigKey>& config_keys() {
  using detail::make_key;
  static const std::vector<ConfigKey> keys{
      // model
      make_key("embedding_dimension", "int", "feature width F", [](RunConfig& c) -> auto& { return c.train.model.embedding_dimension; }),
      make_key("num_layers", "int", "interaction layers L", [](RunConfig& c) -> auto& { return c.train.model.num_layers; }),
      make_key("num_rbf", "int", "radial basis functions K", [](RunConfig& c) -> auto& { return c.train.model.num_rbf; }),
      make_key("rbf_type", "string", "radial basis family (expnorm only)", [](RunConfig& c) -> auto& { return c.rbf_type; }),
      make_key("trainable_rbf", "bool", "learn RBF centers and widths", [](RunConfig& c) -> auto& { return c.train.model.trainable_rbf; }),
      make_key("activation", "string", "activation function (silu only)", [](RunConfig& c) -> auto& { return c.train.model.activation; }),
      make_key("cutoff_lower", "real", "lower cutoff r_l, Angstrom", [](RunConfig& c) -> auto& { return c.train.model.cutoff_lower; }),
      make_key("cutoff_upper", "real", "upper cutoff r_u, Angstrom", [](RunConfig& c) -> auto& { return c.train.model.cutoff_upper; }),
      make_key("max_z", "int", "largest atomic number embedded", [](RunConfig& c) -> auto& { return c.train.model.max_z; }),
      make_key("max_num_neighbors", "int", "neighbor capacity per atom", [](RunConfig& c) -> auto& { return c.train.model.max_num_neighbors; }),
      make_key("static_shapes", "bool", "pad neighbor lists to fixed capacity", [](RunConfig& c) -> auto& { return c.train.model.static_shapes; }),
      make_key("vector_cutoff", "bool", "cutoff envelope on edge features (always on)", [](RunConfig& c) -> auto& { return c.vector_cutoff; }),
      make_key("derivative", "bool", "compute forces as -dE/dr", [](RunConfig& c) -> auto& { return c.derivative; }),
      // training
      make_key("dataset", "string", "extended XYZ or binary container path", [](RunConfig& c) -> auto& { return c.dataset; }),
      make_key("num_epochs", "int", "maximum training epochs", [](RunConfig& c) -> auto& { return c.train.num_epochs; }),
      make_key("batch_size", "int", "training batch size", [](RunConfig& c) -> auto& { return c.train.batch_size; }),
      make_key("inference_batch_size", "int", "validation/test/infer batch size", [](RunConfig& c) -> auto& { return c.train.inference_batch_size; }),
      make_key("lr", "real", "peak learning rate", [](RunConfig& c) -> auto& { return c.train.schedule.lr; }),
      make_key("lr_warmup_steps", "int", "linear warmup steps", [](RunConfig& c) -> auto& { return c.train.schedule.lr_warmup_steps; }),
      make_key("lr_factor", "real", "plateau decay factor", [](RunConfig& c) -> auto& { return c.train.schedule.lr_factor; }),
      make_key("lr_patience", "int", "epochs without improvement before decay", [](RunConfig& c) -> auto& { return c.train.schedule.lr_patience; }),
      make_key("lr_min", "real", "learning rate floor", [](RunConfig& c) -> auto& { return c.train.schedule.lr_min; }),
      make_key("early_stopping_patience", "int", "epochs without improvement before stopping", [](RunConfig& c) -> auto& { return c.train.schedule.early_stopping_patience; }),
      make_key("y_weight", "real", "energy loss weight", [](RunConfig& c) -> auto& { return c.train.y_weight; }),
      make_key("neg_dy_weight", "real", "force loss weight (must be 0 for training)", [](RunConfig& c) -> auto& { return c.train.neg_dy_weight; }),
      make_key("ema_alpha_y", "real", "EMA factor for energy losses", [](RunConfig& c) -> auto& { return c.train.ema_alpha_y; }),
      make_key("ema_alpha_neg_dy", "real", "EMA factor for force losses", [](RunConfig& c) -> auto& { return c.train.ema_alpha_neg_dy; }),
      make_key("train_size", "real", "training split (fraction if < 1, else count)", [](RunConfig& c) -> auto& { return c.train.train_size; }),
      make_key("val_size", "real", "validation split (fraction if < 1, else count)", [](RunConfig& c) -> auto& { return c.train.val_size; }),
      make_key("standardize", "bool", "fit per-atom energy mean/std on the training split", [](RunConfig& c) -> auto& { return c.train.standardize; }),
      make_key("seed", "int", "seed for splits, initialization, dynamics and clouds", [](RunConfig& c) -> auto& { return c.train.seed; }),
      // priors
      make_key("prior_model", "list", "prior terms: Atomref, Coulomb, D2, ZBL", [](RunConfig& c) -> auto& { return c.priors.prior_model; }),
      make_key("coulomb_switch_radius", "real", "Coulomb short-range switch radius, Angstrom", [](RunConfig& c) -> auto& { return c.priors.coulomb_switch_radius; }),
      make_key("d2_s6", "real", "D2 global scaling s6", [](RunConfig& c) -> auto& { return c.priors.d2_s6; }),
      make_key("scan_species", "list", "atomic numbers of the scanned pair", [](RunConfig& c) -> auto& { return c.scan_species; }),
      make_key("scan_charges", "list", "partial charges of the scanned pair (empty: none)", [](RunConfig& c) -> auto& { return c.scan_charges; }),
      make_key("scan_min", "real", "first scan distance, Angstrom", [](RunConfig& c) -> auto& { return c.scan_min; }),
      make_key("scan_points", "int", "number of scan distances up to cutoff_upper", [](RunConfig& c) -> auto& { return c.scan_points; }),
      // dynamics
      make_key("timestep", "real", "integration time step, fs", [](RunConfig& c) -> auto& { return c.md.langevin.dt; }),
      make_key("temperature", "real", "thermostat temperature, K", [](RunConfig& c) -> auto& { return c.md.langevin.temperature; }),
      make_key("friction", "real", "Langevin friction, 1/ps", [](RunConfig& c) -> auto& { return c.md.langevin.friction; }),
      make_key("steps", "int", "dynamics steps", [](RunConfig& c) -> auto& { return c.md.steps; }),
      make_key("stride", "int", "steps between trajectory frames", [](RunConfig& c) -> auto& { return c.md.stride; }),
      // benchmarks
      make_key("particles", "list", "benchmark particle counts", [](RunConfig& c) -> auto& { return c.bench.particles; }),
      make_key("batches", "list", "benchmark batch counts", [](RunConfig& c) -> auto& { return c.bench.batches; }),
      make_key("mean_neighbors", "real", "target mean neighbors per particle", [](RunConfig& c) -> auto& { return c.bench.mean_neighbors; }),
      make_key("repetitions", "int", "timed repetitions per measurement", [](RunConfig& c) -> auto& { return c.bench.repetitions; }),
      make_key("warmup_repetitions", "int", "untimed repetitions before measuring", [](RunConfig& c) -> auto& { return c.bench.warmup_repetitions; }),
      make_key("strategies", "list", "neighbor strategies to time: cell, brute", [](RunConfig& c) -> auto& { return c.bench.strategies; }),
      make_key("layers", "list", "layer counts for bench-model", [](RunConfig& c) -> auto& { return c.bench.layers; }),
      make_key("threads", "int", "worker threads (0: all cores)", [](RunConfig& c) -> auto& { return c.threads; }),
  };
  return keys;
}

/// Keys from related model families that this implementation does not provide.
inline const std::map<std::string, std::string>& unsupported_keys() {
  static const std::map<std::string, std::string> keys{
      {"attn_activation", "attention layers are not implemented"},
      {"num_heads", "attention layers are not implemented"},
      {"distance_influence", "attention layers are not implemented"},
      {"equivariance_invariance_group", "tensor representations are not implemented"},
      {"gradient_clipping", "gradient clipping is not implemented"},
      {"remove_ref_energy", "use prior_model: Atomref instead"},
  };
  return keys;
}

/// Closest recognized key within a small edit distance, or "".
inline std::string suggest_key(const std::string& unknown) {
  std::string best;
  std::size_t best_d = std::max<std::size_t>(2, unknown.size() / 3) + 1;
  for (const auto& k : config_keys()) {
    const std::size_t d = detail::edit_distance(unknown, k.name);
    if (d < best_d) best_d = d, best = k.name;
  }
  return best;
}

/// Applies one `key: value` setting.
inline void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  if (const auto it = unsupported_keys().find(key); it != unsupported_keys().end()) {
    throw ConfigError("unsupported key '" + key + "': " + it->second);
  }
  const std::string hint = suggest_key(key);
  throw ConfigError("unknown key '" + key + "'" + (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
}

/// Parses flat `key: value` lines. `#` starts a comment; blank lines are ignored.
inline RunConfig parse_config(std::istream& in, const std::string& name = "<config>") {
  RunConfig config;
  std::map<std::string, std::size_t> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    const std::string where = name + ":" + std::to_string(lineno) + ": ";
    if (colon == std::string::npos) throw ConfigError(where + "expected 'key: value', got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, colon));
    const std::string value = detail::trim(line.substr(colon + 1));
    if (const auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(where + "duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
    }
    seen[key] = lineno;
    try {
      set_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (config.rbf_type != "expnorm") throw ConfigError(name + ": unsupported rbf_type '" + config.rbf_type + "' (only expnorm)");
  if (!config.vector_cutoff) {
    throw ConfigError(name + ": vector_cutoff: false is not supported; the cutoff envelope is always applied");
  }
  return config;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  return parse_config(in, path);
}

/// Writes every key with its current value; parsing the output reproduces `config`.
inline void write_config(std::ostream& os, const RunConfig& config) {
  for (const auto& k : config_keys()) os << k.name << ": " << k.get(config) << '\n';
}

}  // namespace mdk
