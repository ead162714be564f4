#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mdk/core/box.hpp"
#include "mdk/core/elements.hpp"
#include "mdk/core/error.hpp"
#include "mdk/core/system.hpp"

namespace mdk {

/// One labelled configuration.
struct Frame {
  std::vector<Vec3> positions;
  std::vector<int> species;
  double energy = 0.0;
  std::optional<std::vector<Vec3>> forces;
  Box box;

  std::size_t size() const { return positions.size(); }
  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Dataset {
  std::vector<Frame> frames;
  std::string source = "memory";

  std::size_t size() const { return frames.size(); }
  bool has_forces() const {
    if (frames.empty()) return false;
    for (const auto& f : frames) {
      if (!f.forces) return false;
    }
    return true;
  }
};

/// Concatenation of frames into one System, one batch code per frame, with
/// the matching targets.
struct Batch {
  System system;
  std::vector<double> energy;
  std::optional<std::vector<Vec3>> forces;
};

inline Batch assemble_batch(const Dataset& data, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw InputError("cannot assemble an empty batch");
  std::vector<Vec3> pos;
  std::vector<int> z;
  std::vector<int> batch;
  Batch out;
  bool forces = true;
  const Box box = data.frames.at(indices[0]).box;
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const Frame& f = data.frames.at(indices[b]);
    if (f.box != box) {
      throw InputError("frames in one batch must share the same box");
    }
    pos.insert(pos.end(), f.positions.begin(), f.positions.end());
    z.insert(z.end(), f.species.begin(), f.species.end());
    batch.insert(batch.end(), f.size(), static_cast<int>(b));
    out.energy.push_back(f.energy);
    forces = forces && f.forces.has_value();
  }
  if (forces) {
    out.forces.emplace();
    for (const auto i : indices) {
      const auto& f = *data.frames[i].forces;
      out.forces->insert(out.forces->end(), f.begin(), f.end());
    }
  }
  out.system = build_system(std::move(pos), std::move(z), std::move(batch), box);
  return out;
}

namespace detail {

/// Splits an extended-XYZ comment line into key=value pairs; values may be
/// double-quoted and contain spaces.
inline std::vector<std::pair<std::string, std::string>> parse_info_line(const std::string& line) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t i = 0;
  const auto skip = [&] {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  };
  while (true) {
    skip();
    if (i >= line.size()) break;
    std::size_t key_start = i;
    while (i < line.size() && line[i] != '=' && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::string key = line.substr(key_start, i - key_start);
    std::string value;
    if (i < line.size() && line[i] == '=') {
      ++i;
      if (i < line.size() && line[i] == '"') {
        const std::size_t close = line.find('"', i + 1);
        if (close == std::string::npos) throw InputError("unterminated quote");
        value = line.substr(i + 1, close - i - 1);
        i = close + 1;
      } else {
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        value = line.substr(start, i - start);
      }
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline double parse_double(const std::string& token, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw InputError(where + ": cannot parse number '" + token + "'");
  }
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Parses concatenated extended-XYZ frames. Line 1 holds the atom count,
/// line 2 key=value pairs including a mandatory `energy=` (eV) and an
/// optional `Lattice="ax ay az bx by bz cx cy cz"`, then one
/// `symbol x y z [fx fy fz]` line per atom. Unlabelled structures (for
/// inference or dynamics) may skip `energy=` when `require_energy` is false.
inline Dataset parse_extxyz(std::istream& in, const std::string& name = "<stream>", bool require_energy = true) {
  Dataset data;
  data.source = name;
  std::string line;
  std::size_t lineno = 0;
  const auto where = [&](std::size_t n) { return name + ":" + std::to_string(n); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    long count = -1;
    {
      std::istringstream ls(line);
      std::string extra;
      if (!(ls >> count) || (ls >> extra) || count <= 0) {
        throw InputError(where(lineno) + ": malformed atom count '" + line + "'");
      }
    }
    if (!std::getline(in, line)) throw InputError(where(lineno + 1) + ": missing comment line");
    ++lineno;
    Frame frame;
    bool have_energy = false;
    std::vector<std::pair<std::string, std::string>> info;
    try {
      info = detail::parse_info_line(line);
    } catch (const InputError& e) {
      throw InputError(where(lineno) + ": " + e.what());
    }
    for (const auto& [key, value] : info) {
      if (key == "energy") {
        frame.energy = detail::parse_double(value, where(lineno));
        if (!std::isfinite(frame.energy)) throw InputError(where(lineno) + ": non-finite energy");
        have_energy = true;
      } else if (key == "Lattice") {
        std::istringstream ls(value);
        Mat3 m{};
        for (auto& v : m) {
          if (!(ls >> v.x >> v.y >> v.z)) throw InputError(where(lineno) + ": Lattice needs 9 numbers");
        }
        frame.box = Box{BoxKind::triclinic, m};
        if (m[0].y == 0 && m[0].z == 0 && m[1].x == 0 && m[1].z == 0 && m[2].x == 0 && m[2].y == 0) {
          frame.box.kind = BoxKind::orthorhombic;
        }
      }
    }
    if (!have_energy && require_energy) throw InputError(where(lineno) + ": missing required key energy=");
    std::optional<bool> with_forces;
    for (long a = 0; a < count; ++a) {
      if (!std::getline(in, line)) {
        throw InputError(where(lineno + 1) + ": expected " + std::to_string(count) + " atom lines");
      }
      ++lineno;
      std::istringstream ls(line);
      std::vector<std::string> tok;
      for (std::string t; ls >> t;) tok.push_back(t);
      if (tok.size() != 4 && tok.size() != 7) {
        throw InputError(where(lineno) + ": atom line needs 4 or 7 columns, got " + std::to_string(tok.size()));
      }
      const bool f = tok.size() == 7;
      if (with_forces && *with_forces != f) throw InputError(where(lineno) + ": inconsistent force columns");
      with_forces = f;
      const auto z = atomic_number(tok[0]);
      if (!z) throw InputError(where(lineno) + ": bad element symbol '" + tok[0] + "'");
      frame.species.push_back(*z);
      const Vec3 r{detail::parse_double(tok[1], where(lineno)), detail::parse_double(tok[2], where(lineno)),
                   detail::parse_double(tok[3], where(lineno))};
      if (!is_finite(r)) throw InputError(where(lineno) + ": non-finite position");
      frame.positions.push_back(r);
      if (f) {
        if (!frame.forces) frame.forces.emplace();
        frame.forces->push_back({detail::parse_double(tok[4], where(lineno)),
                                 detail::parse_double(tok[5], where(lineno)),
                                 detail::parse_double(tok[6], where(lineno))});
      }
    }
    try {
      frame.box.validate();
    } catch (const GeometryError& e) {
      throw InputError(where(lineno) + ": " + e.what());
    }
    data.frames.push_back(std::move(frame));
  }
  return data;
}

inline Dataset load_extxyz(const std::string& path, bool require_energy = true) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_extxyz(in, path, require_energy);
}

/// Writes one frame. `extra` key=value pairs follow energy= on the comment line.
inline void write_extxyz_frame(std::ostream& os, const Frame& frame,
                               const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  os << frame.size() << '\n';
  os << "energy=" << detail::format_double(frame.energy);
  if (frame.box.periodic()) {
    os << " Lattice=\"";
    for (std::size_t k = 0; k < 3; ++k) {
      const Vec3& v = frame.box.vectors[k];
      os << (k ? " " : "") << detail::format_double(v.x) << ' ' << detail::format_double(v.y) << ' '
         << detail::format_double(v.z);
    }
    os << "\" pbc=\"T T T\"";
  }
  for (const auto& [key, value] : extra) os << ' ' << key << '=' << value;
  os << " Properties=species:S:1:pos:R:3" << (frame.forces ? ":forces:R:3" : "") << '\n';
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const Vec3& r = frame.positions[i];
    os << element_symbol(frame.species[i]) << ' ' << detail::format_double(r.x) << ' '
       << detail::format_double(r.y) << ' ' << detail::format_double(r.z);
    if (frame.forces) {
      const Vec3& f = (*frame.forces)[i];
      os << ' ' << detail::format_double(f.x) << ' ' << detail::format_double(f.y) << ' '
         << detail::format_double(f.z);
    }
    os << '\n';
  }
}

inline void save_extxyz(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& f : data.frames) write_extxyz_frame(out, f);
}

}  // namespace mdk
