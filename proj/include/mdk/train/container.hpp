#pragma once

// MDK1 binary dataset container and the array encoding shared with checkpoints.
//
//   magic "MDK1" | u32 array count | per array:
//     u16 name length, name bytes, u8 dtype (0 = f64, 1 = i64), u8 rank,
//     rank x u64 shape, raw little-endian data
//
// Arrays: pos [T,N,3] or [sum N,3] with frame_offsets [T+1]; z [N], [T,N] or
// [sum N]; energy [T]; optional forces shaped like pos; optional box [T,3,3].

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mdk/core/error.hpp"
#include "mdk/train/dataset.hpp"

namespace mdk {

enum class DType : std::uint8_t { f64 = 0, i64 = 1 };

/// An owned array ready for encoding.
struct NamedArray {
  std::string name;
  DType dtype = DType::f64;
  std::vector<std::uint64_t> shape;
  std::vector<double> f64;
  std::vector<std::int64_t> i64;

  static NamedArray real(std::string name, std::vector<std::uint64_t> shape, std::vector<double> values) {
    return {std::move(name), DType::f64, std::move(shape), std::move(values), {}};
  }
  static NamedArray integer(std::string name, std::vector<std::uint64_t> shape, std::vector<std::int64_t> values) {
    return {std::move(name), DType::i64, std::move(shape), {}, std::move(values)};
  }
};

/// A non-owning view into an encoded array (typically inside a mapping).
struct ArrayView {
  std::string name;
  DType dtype = DType::f64;
  std::vector<std::uint64_t> shape;
  const unsigned char* data = nullptr;

  std::uint64_t elements() const {
    std::uint64_t n = 1;
    for (const auto s : shape) n *= s;
    return n;
  }

  double f64(std::uint64_t i) const;
  std::int64_t i64(std::uint64_t i) const;
  std::vector<double> to_f64() const;
  std::vector<std::int64_t> to_i64() const;
};

namespace detail {

inline std::uint64_t load_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int b = bytes - 1; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

inline void store_le(std::ostream& os, std::uint64_t v, int bytes) {
  char buf[8];
  for (int b = 0; b < bytes; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  os.write(buf, bytes);
}

}  // namespace detail

inline double ArrayView::f64(std::uint64_t i) const {
  return std::bit_cast<double>(detail::load_le(data + 8 * i, 8));
}

inline std::int64_t ArrayView::i64(std::uint64_t i) const {
  return static_cast<std::int64_t>(detail::load_le(data + 8 * i, 8));
}

inline std::vector<double> ArrayView::to_f64() const {
  if (dtype != DType::f64) throw InputError("array '" + name + "' is not f64");
  std::vector<double> out(elements());
  for (std::uint64_t i = 0; i < out.size(); ++i) out[i] = f64(i);
  return out;
}

inline std::vector<std::int64_t> ArrayView::to_i64() const {
  if (dtype != DType::i64) throw InputError("array '" + name + "' is not i64");
  std::vector<std::int64_t> out(elements());
  for (std::uint64_t i = 0; i < out.size(); ++i) out[i] = i64(i);
  return out;
}

/// Writes the array count followed by every array.
inline void encode_arrays(std::ostream& os, const std::vector<NamedArray>& arrays) {
  detail::store_le(os, arrays.size(), 4);
  for (const auto& a : arrays) {
    if (a.name.size() > 0xffff) throw InputError("array name too long: " + a.name);
    std::uint64_t n = 1;
    for (const auto s : a.shape) n *= s;
    const std::size_t have = a.dtype == DType::f64 ? a.f64.size() : a.i64.size();
    if (have != n) throw InputError("array '" + a.name + "' has " + std::to_string(have) + " values for its shape");
    detail::store_le(os, a.name.size(), 2);
    os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    detail::store_le(os, static_cast<std::uint8_t>(a.dtype), 1);
    detail::store_le(os, a.shape.size(), 1);
    for (const auto s : a.shape) detail::store_le(os, s, 8);
    if (a.dtype == DType::f64) {
      for (const double v : a.f64) detail::store_le(os, std::bit_cast<std::uint64_t>(v), 8);
    } else {
      for (const auto v : a.i64) detail::store_le(os, static_cast<std::uint64_t>(v), 8);
    }
  }
}

/// Parses an array section starting at `offset`. Every length is bounds-checked.
inline std::vector<ArrayView> decode_arrays(const unsigned char* base, std::size_t size, std::size_t offset,
                                            const std::string& what) {
  const auto need = [&](std::size_t bytes) {
    if (offset + bytes > size || offset + bytes < offset) throw InputError(what + ": truncated at byte " + std::to_string(offset));
  };
  need(4);
  const auto count = detail::load_le(base + offset, 4);
  offset += 4;
  std::vector<ArrayView> out;
  for (std::uint64_t a = 0; a < count; ++a) {
    ArrayView v;
    need(2);
    const auto len = detail::load_le(base + offset, 2);
    offset += 2;
    need(len);
    v.name.assign(reinterpret_cast<const char*>(base + offset), len);
    offset += len;
    need(2);
    const auto dtype = base[offset];
    const auto rank = base[offset + 1];
    offset += 2;
    if (dtype > 1) throw InputError(what + ": array '" + v.name + "' has unknown dtype " + std::to_string(dtype));
    v.dtype = static_cast<DType>(dtype);
    need(8ull * rank);
    std::uint64_t n = 1;
    for (int r = 0; r < rank; ++r) {
      v.shape.push_back(detail::load_le(base + offset, 8));
      offset += 8;
      n *= v.shape.back();
    }
    if (n > (size - offset) / 8) throw InputError(what + ": truncated array '" + v.name + "'");
    v.data = base + offset;
    offset += 8 * n;
    out.push_back(std::move(v));
  }
  return out;
}

/// Read-only memory mapping of a whole file.
class MappedFile {
 public:
  explicit MappedFile(const std::string& path) {
    const int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw InputError("cannot open " + path);
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
      ::close(fd);
      throw InputError("cannot stat " + path);
    }
    size_ = static_cast<std::size_t>(st.st_size);
    if (size_ > 0) {
      void* p = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
      if (p == MAP_FAILED) {
        ::close(fd);
        throw InputError("cannot map " + path);
      }
      data_ = static_cast<const unsigned char*>(p);
    }
    ::close(fd);
  }
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;
  ~MappedFile() {
    if (data_) ::munmap(const_cast<unsigned char*>(data_), size_);
  }

  const unsigned char* data() const { return data_; }
  std::size_t size() const { return size_; }

 private:
  const unsigned char* data_ = nullptr;
  std::size_t size_ = 0;
};

inline constexpr char container_magic[4] = {'M', 'D', 'K', '1'};

/// Lazy reader: frames are decoded from the mapping on request.
class ContainerReader {
 public:
  explicit ContainerReader(const std::string& path) : path_(path), file_(path) {
    if (file_.size() < 4 || std::memcmp(file_.data(), container_magic, 4) != 0) {
      throw InputError("not a dataset container: " + path);
    }
    for (auto& v : decode_arrays(file_.data(), file_.size(), 4, path)) {
      const std::string name = v.name;
      arrays_.emplace(name, std::move(v));
    }
    index();
  }

  std::size_t size() const { return frames_; }
  const std::map<std::string, ArrayView>& arrays() const { return arrays_; }

  Frame frame(std::size_t t) const {
    if (t >= frames_) throw InputError("frame index " + std::to_string(t) + " out of range");
    const std::uint64_t begin = offsets_[t], end = offsets_[t + 1];
    Frame f;
    f.energy = energy_->f64(t);
    for (std::uint64_t a = begin; a < end; ++a) {
      f.positions.push_back({pos_->f64(3 * a), pos_->f64(3 * a + 1), pos_->f64(3 * a + 2)});
      const std::uint64_t zi = shared_z_ ? a - begin : a;
      f.species.push_back(static_cast<int>(z_->i64(zi)));
    }
    if (forces_) {
      f.forces.emplace();
      for (std::uint64_t a = begin; a < end; ++a) {
        f.forces->push_back({forces_->f64(3 * a), forces_->f64(3 * a + 1), forces_->f64(3 * a + 2)});
      }
    }
    if (box_) {
      Mat3 m{};
      for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) m[r][c] = box_->f64(9 * t + 3 * r + c);
      }
      const bool zero = m[0] == Vec3{} && m[1] == Vec3{} && m[2] == Vec3{};
      const bool ortho = m[0].y == 0 && m[0].z == 0 && m[1].x == 0 && m[1].z == 0 && m[2].x == 0 && m[2].y == 0;
      f.box = zero ? Box::none() : Box{ortho ? BoxKind::orthorhombic : BoxKind::triclinic, m};
    }
    return f;
  }

 private:
  const ArrayView& require(const std::string& name, DType dtype) const {
    const auto it = arrays_.find(name);
    if (it == arrays_.end()) throw InputError(path_ + ": missing array '" + name + "'");
    if (it->second.dtype != dtype) throw InputError(path_ + ": array '" + name + "' has the wrong dtype");
    return it->second;
  }

  const ArrayView* optional(const std::string& name, DType dtype) const {
    return arrays_.contains(name) ? &require(name, dtype) : nullptr;
  }

  [[noreturn]] void shape_error(const std::string& msg) const { throw InputError(path_ + ": shape error: " + msg); }

  void index() {
    pos_ = &require("pos", DType::f64);
    z_ = &require("z", DType::i64);
    energy_ = &require("energy", DType::f64);
    forces_ = optional("forces", DType::f64);
    box_ = optional("box", DType::f64);
    const ArrayView* offsets = optional("frame_offsets", DType::i64);
    if (energy_->shape.size() != 1) shape_error("energy must be rank 1");
    std::uint64_t frames = 0;
    if (offsets) {
      if (offsets->shape.size() != 1 || offsets->shape[0] < 1) shape_error("frame_offsets must be rank 1, length T+1");
      frames = offsets->shape[0] - 1;
      for (std::uint64_t t = 0; t <= frames; ++t) offsets_.push_back(static_cast<std::uint64_t>(offsets->i64(t)));
      if (offsets_[0] != 0) shape_error("frame_offsets must start at 0");
      for (std::uint64_t t = 0; t < frames; ++t) {
        if (offsets_[t + 1] <= offsets_[t]) shape_error("frame_offsets must be strictly increasing");
      }
      const std::uint64_t atoms = offsets_.back();
      if (pos_->shape != std::vector<std::uint64_t>{atoms, 3}) shape_error("pos must be [sum N, 3] with frame_offsets");
      if (z_->shape != std::vector<std::uint64_t>{atoms}) shape_error("z must be [sum N] with frame_offsets");
    } else {
      if (pos_->shape.size() != 3 || pos_->shape[2] != 3) shape_error("pos must be [T, N, 3] without frame_offsets");
      frames = pos_->shape[0];
      const std::uint64_t n = pos_->shape[1];
      if (n == 0) shape_error("frames need at least one atom");
      for (std::uint64_t t = 0; t <= frames; ++t) offsets_.push_back(t * n);
      if (z_->shape == std::vector<std::uint64_t>{n}) {
        shared_z_ = true;
      } else if (z_->shape != std::vector<std::uint64_t>{frames, n}) {
        shape_error("z must be [N] or [T, N]");
      }
    }
    if (energy_->shape[0] != frames) {
      shape_error("energy has " + std::to_string(energy_->shape[0]) + " entries for " + std::to_string(frames) +
                  " frames");
    }
    if (forces_ && forces_->shape != pos_->shape) shape_error("forces must match pos");
    if (box_ && box_->shape != std::vector<std::uint64_t>{frames, 3, 3}) shape_error("box must be [T, 3, 3]");
    frames_ = frames;
  }

  std::string path_;
  MappedFile file_;
  std::map<std::string, ArrayView> arrays_;
  const ArrayView* pos_ = nullptr;
  const ArrayView* z_ = nullptr;
  const ArrayView* energy_ = nullptr;
  const ArrayView* forces_ = nullptr;
  const ArrayView* box_ = nullptr;
  std::vector<std::uint64_t> offsets_;
  bool shared_z_ = false;
  std::size_t frames_ = 0;
};

inline Dataset load_binary_container(const std::string& path) {
  const ContainerReader reader(path);
  Dataset data;
  data.source = path;
  data.frames.reserve(reader.size());
  for (std::size_t t = 0; t < reader.size(); ++t) data.frames.push_back(reader.frame(t));
  return data;
}

/// Writes frames as [T,N,3] with shared z when every frame has the same
/// species sequence, otherwise as ragged arrays with frame_offsets.
inline void write_binary_container(std::ostream& os, const Dataset& data) {
  if (data.frames.empty()) throw InputError("cannot write an empty dataset");
  const Frame& first = data.frames[0];
  bool uniform = true, periodic = false;
  for (const auto& f : data.frames) {
    uniform = uniform && f.species == first.species;
    periodic = periodic || f.box.periodic();
  }
  const bool forces = data.has_forces();
  const std::uint64_t frames = data.frames.size();
  std::vector<double> pos, frc, energy, box;
  std::vector<std::int64_t> z, offsets{0};
  for (const auto& f : data.frames) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      for (std::size_t d = 0; d < 3; ++d) {
        pos.push_back(f.positions[i][d]);
        if (forces) frc.push_back((*f.forces)[i][d]);
      }
      if (!uniform) z.push_back(f.species[i]);
    }
    offsets.push_back(offsets.back() + static_cast<std::int64_t>(f.size()));
    energy.push_back(f.energy);
    if (periodic) {
      for (const auto& v : f.box.vectors) box.insert(box.end(), {v.x, v.y, v.z});
    }
  }
  const std::uint64_t atoms = pos.size() / 3;
  std::vector<std::uint64_t> pos_shape;
  std::vector<NamedArray> arrays;
  if (uniform) {
    z.assign(first.species.begin(), first.species.end());
    pos_shape = {frames, first.size(), 3};
    arrays.push_back(NamedArray::real("pos", pos_shape, std::move(pos)));
    arrays.push_back(NamedArray::integer("z", {first.size()}, std::move(z)));
  } else {
    pos_shape = {atoms, 3};
    arrays.push_back(NamedArray::real("pos", pos_shape, std::move(pos)));
    arrays.push_back(NamedArray::integer("z", {atoms}, std::move(z)));
    arrays.push_back(NamedArray::integer("frame_offsets", {frames + 1}, std::move(offsets)));
  }
  arrays.push_back(NamedArray::real("energy", {frames}, std::move(energy)));
  if (forces) arrays.push_back(NamedArray::real("forces", pos_shape, std::move(frc)));
  if (periodic) arrays.push_back(NamedArray::real("box", {frames, 3, 3}, std::move(box)));
  os.write(container_magic, 4);
  encode_arrays(os, arrays);
}

inline void write_binary_container(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  write_binary_container(out, data);
  if (!out) throw InputError("write failed: " + path);
}

}  // namespace mdk
