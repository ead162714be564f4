#pragma once

// Internal unit system: Angstrom, eV, eV/Angstrom, amu, fs, K, elementary charge.

namespace mdk::units {

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Coulomb constant k_e in eV*Angstrom/e^2.
inline constexpr double coulomb = 14.399645;

/// Boltzmann constant in eV/K.
inline constexpr double boltzmann = 8.617333262e-5;

/// Bohr radius in Angstrom.
inline constexpr double bohr = 0.529177;

/// Converts eV/(Angstrom*amu) into Angstrom/fs^2.
/// 1.602176634e-19 J / (1e-10 m * 1.66053906660e-27 kg) = 9.64853321e17 m/s^2.
inline constexpr double accel = 9.64853321233100e-3;

/// 1 J nm^6 mol^-1 expressed in eV Angstrom^6 (1e6 / 96485.33212).
inline constexpr double j_nm6_per_mol = 1.0e6 / 96485.33212;

/// Friction given in 1/ps to 1/fs.
inline constexpr double per_ps = 1.0e-3;

}  // namespace mdk::units
