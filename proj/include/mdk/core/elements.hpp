#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace mdk {

inline constexpr std::array<std::string_view, 119> element_symbols{
    "X",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu",
    "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac",
    "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf",
    "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

/// Atomic number for a chemical symbol (case-sensitive, e.g. "Cl").
inline std::optional<int> atomic_number(std::string_view symbol) {
  for (std::size_t z = 1; z < element_symbols.size(); ++z) {
    if (element_symbols[z] == symbol) return static_cast<int>(z);
  }
  return std::nullopt;
}

inline std::string element_symbol(int z) {
  if (z <= 0 || z >= static_cast<int>(element_symbols.size())) return "X";
  return std::string(element_symbols[static_cast<std::size_t>(z)]);
}

/// Standard atomic masses (amu) for the light elements; 2 * Z otherwise.
inline double atomic_mass(int z) {
  static constexpr std::array<double, 19> masses{
      1.0,    1.008,  4.0026, 6.94,   9.0122, 10.81,  12.011, 14.007, 15.999, 18.998,
      20.180, 22.990, 24.305, 26.982, 28.085, 30.974, 32.06,  35.45,  39.948};
  if (z > 0 && z < static_cast<int>(masses.size())) return masses[static_cast<std::size_t>(z)];
  return 2.0 * z;
}

}  // namespace mdk
