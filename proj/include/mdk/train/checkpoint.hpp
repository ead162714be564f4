#pragma once

// Checkpoint file: magic "MDKC", u32 little-endian format version, then an
// array section in the dataset-container encoding. Scalars are rank-1 arrays
// of length 1; absent optionals have length 0.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mdk/core/error.hpp"
#include "mdk/train/container.hpp"
#include "mdk/train/trainer.hpp"

namespace mdk {

inline constexpr char checkpoint_magic[4] = {'M', 'D', 'K', 'C'};

namespace detail {

class ArrayWriter {
 public:
  void real(const std::string& name, double v) { arrays.push_back(NamedArray::real(name, {1}, {v})); }
  void integer(const std::string& name, std::int64_t v) { arrays.push_back(NamedArray::integer(name, {1}, {v})); }
  void maybe(const std::string& name, const std::optional<double>& v) {
    arrays.push_back(v ? NamedArray::real(name, {1}, {*v}) : NamedArray::real(name, {0}, {}));
  }
  void reals(const std::string& name, std::vector<double> v) {
    const std::uint64_t n = v.size();
    arrays.push_back(NamedArray::real(name, {n}, std::move(v)));
  }
  template <typename Int>
  void integers(const std::string& name, const std::vector<Int>& v) {
    arrays.push_back(NamedArray::integer(name, {v.size()}, std::vector<std::int64_t>(v.begin(), v.end())));
  }
  void tensor(const std::string& name, const Tensor& t) {
    arrays.push_back(NamedArray::real(name, {t.rows, t.cols}, t.data));
  }

  std::vector<NamedArray> arrays;
};

class ArrayReader {
 public:
  explicit ArrayReader(const std::vector<ArrayView>& views) {
    for (const auto& v : views) map_.emplace(v.name, &v);
  }

  bool has(const std::string& name) const { return map_.contains(name); }

  const ArrayView& get(const std::string& name, DType dtype) const {
    const auto it = map_.find(name);
    if (it == map_.end()) throw InputError("corrupt checkpoint: missing '" + name + "'");
    if (it->second->dtype != dtype) throw InputError("corrupt checkpoint: '" + name + "' has the wrong dtype");
    return *it->second;
  }
  double real(const std::string& name) const { return scalar(get(name, DType::f64)).f64(0); }
  std::int64_t integer(const std::string& name) const { return scalar(get(name, DType::i64)).i64(0); }
  std::optional<double> maybe(const std::string& name) const {
    const ArrayView& v = get(name, DType::f64);
    if (v.elements() == 0) return std::nullopt;
    return scalar(v).f64(0);
  }
  std::vector<double> reals(const std::string& name) const { return get(name, DType::f64).to_f64(); }
  std::vector<std::int64_t> integers(const std::string& name) const { return get(name, DType::i64).to_i64(); }
  Tensor tensor(const std::string& name, std::size_t rows, std::size_t cols) const {
    const ArrayView& v = get(name, DType::f64);
    if (v.shape != std::vector<std::uint64_t>{rows, cols}) {
      throw InputError("corrupt checkpoint: '" + name + "' does not match the model configuration");
    }
    Tensor t(rows, cols);
    t.data = v.to_f64();
    return t;
  }

 private:
  static const ArrayView& scalar(const ArrayView& v) {
    if (v.elements() != 1) throw InputError("corrupt checkpoint: '" + v.name + "' is not a scalar");
    return v;
  }
  std::map<std::string, const ArrayView*> map_;
};

template <typename T>
std::vector<T> cast_all(const std::vector<std::int64_t>& v) {
  return std::vector<T>(v.begin(), v.end());
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, std::ostream& os) {
  detail::ArrayWriter w;
  const TrainConfig& c = ckpt.config;
  const GNConfig& m = c.model;
  w.integer("model.embedding_dimension", static_cast<std::int64_t>(m.embedding_dimension));
  w.integer("model.num_layers", static_cast<std::int64_t>(m.num_layers));
  w.integer("model.num_rbf", static_cast<std::int64_t>(m.num_rbf));
  w.real("model.cutoff_lower", m.cutoff_lower);
  w.real("model.cutoff_upper", m.cutoff_upper);
  w.integer("model.max_z", m.max_z);
  w.integer("model.trainable_rbf", m.trainable_rbf);
  w.integer("model.static_shapes", m.static_shapes);
  w.integer("model.max_num_neighbors", static_cast<std::int64_t>(m.max_num_neighbors));
  w.real("model.mean", m.mean);
  w.real("model.std", m.std);
  w.real("train.lr", c.schedule.lr);
  w.integer("train.lr_warmup_steps", static_cast<std::int64_t>(c.schedule.lr_warmup_steps));
  w.real("train.lr_factor", c.schedule.lr_factor);
  w.integer("train.lr_patience", static_cast<std::int64_t>(c.schedule.lr_patience));
  w.real("train.lr_min", c.schedule.lr_min);
  w.integer("train.early_stopping_patience", static_cast<std::int64_t>(c.schedule.early_stopping_patience));
  w.integer("train.num_epochs", static_cast<std::int64_t>(c.num_epochs));
  w.integer("train.batch_size", static_cast<std::int64_t>(c.batch_size));
  w.integer("train.inference_batch_size", static_cast<std::int64_t>(c.inference_batch_size));
  w.real("train.y_weight", c.y_weight);
  w.real("train.neg_dy_weight", c.neg_dy_weight);
  w.real("train.ema_alpha_y", c.ema_alpha_y);
  w.real("train.ema_alpha_neg_dy", c.ema_alpha_neg_dy);
  w.real("train.train_size", c.train_size);
  w.real("train.val_size", c.val_size);
  w.integer("train.seed", static_cast<std::int64_t>(c.seed));
  w.integer("train.standardize", c.standardize);

  ckpt.params.for_each([&](const std::string& name, const Tensor& t) { w.tensor("param." + name, t); });

  std::vector<std::int64_t> kinds;
  for (std::size_t k = 0; k < ckpt.priors.terms.size(); ++k) {
    const auto& term = ckpt.priors.terms[k];
    const std::string pre = "prior." + std::to_string(k) + ".";
    kinds.push_back(static_cast<std::int64_t>(term.index()));
    if (const auto* a = std::get_if<Atomref>(&term)) {
      std::vector<std::int64_t> z;
      std::vector<double> e;
      for (const auto& [zz, ee] : a->table) {
        z.push_back(zz);
        e.push_back(ee);
      }
      w.integers(pre + "z", z);
      w.reals(pre + "energy", e);
      w.integer(pre + "learnable", a->learnable);
    } else if (const auto* q = std::get_if<Coulomb>(&term)) {
      w.real(pre + "switch_radius", q->switch_radius);
    } else if (const auto* d = std::get_if<D2>(&term)) {
      w.real(pre + "s6", d->s6);
      w.real(pre + "d_steep", d->d_steep);
      std::vector<std::int64_t> z;
      std::vector<double> c6, r;
      for (const auto& [zz, el] : d->elements) {
        z.push_back(zz);
        c6.push_back(el.c6);
        r.push_back(el.radius);
      }
      w.integers(pre + "z", z);
      w.reals(pre + "c6", c6);
      w.reals(pre + "radius", r);
    } else if (std::holds_alternative<CustomPrior>(term)) {
      throw ConfigError("custom prior '" + prior_name(term) + "' cannot be saved in a checkpoint");
    }
  }
  w.integers("prior.kinds", kinds);

  const TrainerState& s = ckpt.state;
  w.integer("state.step", static_cast<std::int64_t>(s.step));
  w.integer("state.epoch", static_cast<std::int64_t>(s.epoch));
  w.integer("state.adam.t", static_cast<std::int64_t>(s.adam.t));
  w.real("state.adam.beta1", s.adam.beta1);
  w.real("state.adam.beta2", s.adam.beta2);
  w.real("state.adam.eps", s.adam.eps);
  w.reals("state.adam.m", s.adam.m);
  w.reals("state.adam.v", s.adam.v);
  w.real("state.schedule.lr", s.schedule.lr);
  w.maybe("state.schedule.best", s.schedule.best);
  w.integer("state.schedule.bad_epochs", static_cast<std::int64_t>(s.schedule.bad_epochs));
  w.integer("state.schedule.epochs_since_best", static_cast<std::int64_t>(s.schedule.epochs_since_best));
  w.integer("state.schedule.epoch", static_cast<std::int64_t>(s.schedule.epoch));
  w.maybe("state.ema_train_y", s.ema_train_y);
  w.maybe("state.ema_val_y", s.ema_val_y);
  w.maybe("state.ema_val_neg_dy", s.ema_val_neg_dy);
  w.maybe("state.best_val", s.best_val);

  w.integers("split.train", ckpt.split.train);
  w.integers("split.val", ckpt.split.val);
  w.integers("split.test", ckpt.split.test);

  std::vector<std::int64_t> h_epoch, h_decayed;
  std::vector<double> h_lr, h_train, h_ema, h_val;
  for (const auto& r : ckpt.history) {
    h_epoch.push_back(static_cast<std::int64_t>(r.epoch));
    h_decayed.push_back(r.decayed);
    h_lr.push_back(r.lr);
    h_train.push_back(r.train_loss);
    h_ema.push_back(r.train_ema);
    h_val.push_back(r.val_loss);
  }
  w.integers("history.epoch", h_epoch);
  w.integers("history.decayed", h_decayed);
  w.reals("history.lr", h_lr);
  w.reals("history.train_loss", h_train);
  w.reals("history.train_ema", h_ema);
  w.reals("history.val_loss", h_val);
  for (const auto& [name, value] : ckpt.initial_val_metrics) w.real("initial." + name, value);
  for (const auto& [name, value] : ckpt.test_metrics) w.real("metric." + name, value);

  os.write(checkpoint_magic, 4);
  detail::store_le(os, ckpt.version, 4);
  encode_arrays(os, w.arrays);
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  save_checkpoint(ckpt, out);
  if (!out) throw InputError("write failed: " + path);
}

inline Checkpoint load_checkpoint_bytes(const unsigned char* data, std::size_t size, const std::string& what) {
  if (size < 8 || std::memcmp(data, checkpoint_magic, 4) != 0) throw InputError(what + ": not a checkpoint");
  const auto version = static_cast<std::uint32_t>(detail::load_le(data + 4, 4));
  if (version != Checkpoint::current_version) {
    throw InputError(what + ": unsupported version " + std::to_string(version) + " (expected " +
                     std::to_string(Checkpoint::current_version) + ")");
  }
  const std::vector<ArrayView> views = decode_arrays(data, size, 8, what);
  const detail::ArrayReader r(views);
  Checkpoint ckpt;
  ckpt.version = version;
  TrainConfig& c = ckpt.config;
  GNConfig& m = c.model;
  m.embedding_dimension = static_cast<std::size_t>(r.integer("model.embedding_dimension"));
  m.num_layers = static_cast<std::size_t>(r.integer("model.num_layers"));
  m.num_rbf = static_cast<std::size_t>(r.integer("model.num_rbf"));
  m.cutoff_lower = r.real("model.cutoff_lower");
  m.cutoff_upper = r.real("model.cutoff_upper");
  m.max_z = static_cast<int>(r.integer("model.max_z"));
  m.trainable_rbf = r.integer("model.trainable_rbf") != 0;
  m.static_shapes = r.integer("model.static_shapes") != 0;
  m.max_num_neighbors = static_cast<std::size_t>(r.integer("model.max_num_neighbors"));
  m.mean = r.real("model.mean");
  m.std = r.real("model.std");
  c.schedule.lr = r.real("train.lr");
  c.schedule.lr_warmup_steps = static_cast<std::uint64_t>(r.integer("train.lr_warmup_steps"));
  c.schedule.lr_factor = r.real("train.lr_factor");
  c.schedule.lr_patience = static_cast<std::uint64_t>(r.integer("train.lr_patience"));
  c.schedule.lr_min = r.real("train.lr_min");
  c.schedule.early_stopping_patience = static_cast<std::uint64_t>(r.integer("train.early_stopping_patience"));
  c.num_epochs = static_cast<std::uint64_t>(r.integer("train.num_epochs"));
  c.batch_size = static_cast<std::size_t>(r.integer("train.batch_size"));
  c.inference_batch_size = static_cast<std::size_t>(r.integer("train.inference_batch_size"));
  c.y_weight = r.real("train.y_weight");
  c.neg_dy_weight = r.real("train.neg_dy_weight");
  c.ema_alpha_y = r.real("train.ema_alpha_y");
  c.ema_alpha_neg_dy = r.real("train.ema_alpha_neg_dy");
  c.train_size = r.real("train.train_size");
  c.val_size = r.real("train.val_size");
  c.seed = static_cast<std::uint64_t>(r.integer("train.seed"));
  c.standardize = r.integer("train.standardize") != 0;
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw InputError(what + ": corrupt model configuration: " + e.what());
  }

  ckpt.params = GNParams::zeros(m);
  ckpt.params.for_each([&](const std::string& name, Tensor& t) { t = r.tensor("param." + name, t.rows, t.cols); });

  const auto kinds = r.integers("prior.kinds");
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const std::string pre = "prior." + std::to_string(k) + ".";
    switch (kinds[k]) {
      case 0: {
        Atomref a;
        const auto z = r.integers(pre + "z");
        const auto e = r.reals(pre + "energy");
        if (z.size() != e.size()) throw InputError(what + ": corrupt Atomref table");
        for (std::size_t i = 0; i < z.size(); ++i) a.table[static_cast<int>(z[i])] = e[i];
        a.learnable = r.integer(pre + "learnable") != 0;
        ckpt.priors.terms.emplace_back(a);
        break;
      }
      case 1:
        ckpt.priors.terms.emplace_back(Coulomb{r.real(pre + "switch_radius")});
        break;
      case 2: {
        D2 d;
        d.s6 = r.real(pre + "s6");
        d.d_steep = r.real(pre + "d_steep");
        d.elements.clear();
        const auto z = r.integers(pre + "z");
        const auto c6 = r.reals(pre + "c6");
        const auto rad = r.reals(pre + "radius");
        if (z.size() != c6.size() || z.size() != rad.size()) throw InputError(what + ": corrupt D2 table");
        for (std::size_t i = 0; i < z.size(); ++i) d.elements[static_cast<int>(z[i])] = {c6[i], rad[i]};
        ckpt.priors.terms.emplace_back(d);
        break;
      }
      case 3:
        ckpt.priors.terms.emplace_back(ZBL{});
        break;
      default:
        throw InputError(what + ": unknown prior kind " + std::to_string(kinds[k]));
    }
  }

  TrainerState& s = ckpt.state;
  s.step = static_cast<std::uint64_t>(r.integer("state.step"));
  s.epoch = static_cast<std::uint64_t>(r.integer("state.epoch"));
  s.adam.t = static_cast<std::uint64_t>(r.integer("state.adam.t"));
  s.adam.beta1 = r.real("state.adam.beta1");
  s.adam.beta2 = r.real("state.adam.beta2");
  s.adam.eps = r.real("state.adam.eps");
  s.adam.m = r.reals("state.adam.m");
  s.adam.v = r.reals("state.adam.v");
  s.schedule.lr = r.real("state.schedule.lr");
  s.schedule.best = r.maybe("state.schedule.best");
  s.schedule.bad_epochs = static_cast<std::uint64_t>(r.integer("state.schedule.bad_epochs"));
  s.schedule.epochs_since_best = static_cast<std::uint64_t>(r.integer("state.schedule.epochs_since_best"));
  s.schedule.epoch = static_cast<std::uint64_t>(r.integer("state.schedule.epoch"));
  s.ema_train_y = r.maybe("state.ema_train_y");
  s.ema_val_y = r.maybe("state.ema_val_y");
  s.ema_val_neg_dy = r.maybe("state.ema_val_neg_dy");
  s.best_val = r.maybe("state.best_val");

  ckpt.split.train = detail::cast_all<std::size_t>(r.integers("split.train"));
  ckpt.split.val = detail::cast_all<std::size_t>(r.integers("split.val"));
  ckpt.split.test = detail::cast_all<std::size_t>(r.integers("split.test"));

  const auto h_epoch = r.integers("history.epoch");
  const auto h_decayed = r.integers("history.decayed");
  const auto h_lr = r.reals("history.lr");
  const auto h_train = r.reals("history.train_loss");
  const auto h_ema = r.reals("history.train_ema");
  const auto h_val = r.reals("history.val_loss");
  for (std::size_t i = 0; i < h_epoch.size(); ++i) {
    ckpt.history.push_back({static_cast<std::uint64_t>(h_epoch.at(i)), h_lr.at(i), h_train.at(i), h_ema.at(i),
                            h_val.at(i), h_decayed.at(i) != 0});
  }
  for (const auto& v : views) {
    if (v.name.rfind("metric.", 0) == 0) ckpt.test_metrics[v.name.substr(7)] = r.real(v.name);
    if (v.name.rfind("initial.", 0) == 0) ckpt.initial_val_metrics[v.name.substr(8)] = r.real(v.name);
  }
  return ckpt;
}

inline Checkpoint load_checkpoint(const std::string& path) {
  const MappedFile file(path);
  return load_checkpoint_bytes(file.data(), file.size(), path);
}

}  // namespace mdk
