#!/usr/bin/env python3
"""Writes the desk-scale benchmark structures in data/structures/.

Geometries are idealized: all-trans alkanes with tetrahedral hydrogens and a
water cluster on a 3.1 A grid with random orientations. They exist to time
the model at realistic sizes and densities, not to be physically relaxed.
"""
import pathlib
import sys

import numpy as np

CC, CH = 1.54, 1.09
TETRA = np.deg2rad(109.47)


def alkane(n):
    """C_nH_{2n+2} zigzag in the xy plane."""
    half = TETRA / 2
    carbons = [np.array([i * CC * np.sin(half), (i % 2) * CC * np.cos(half), 0.0]) for i in range(n)]
    atoms = [("C", c) for c in carbons]
    for i, c in enumerate(carbons):
        # Bisector pointing away from the chain neighbors, hydrogens above and below the plane.
        away = np.array([0.0, -1.0 if i % 2 == 0 else 1.0, 0.0])
        for sz in (1.0, -1.0):
            d = np.cos(half) * away + np.array([0.0, 0.0, sz * np.sin(half)])
            atoms.append(("H", c + CH * d / np.linalg.norm(d)))
        if i in (0, n - 1):
            d = np.array([-1.0 if i == 0 else 1.0, 0.0, 0.0]) * np.sin(half) + away * np.cos(half) * -0.35
            atoms.append(("H", c + CH * d / np.linalg.norm(d)))
    return atoms


def water_cluster(count, seed=7):
    rng = np.random.default_rng(seed)
    side = int(np.ceil(count ** (1 / 3)))
    grid = [np.array([i, j, k]) * 3.1 for i in range(side) for j in range(side) for k in range(side)][:count]
    angle = np.deg2rad(104.52)
    local = np.array([[0.0, 0.0, 0.0],
                      [0.9572, 0.0, 0.0],
                      [0.9572 * np.cos(angle), 0.9572 * np.sin(angle), 0.0]])
    atoms = []
    for o in grid:
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        for sym, r in zip("OHH", local @ q.T):
            atoms.append((sym, o + r))
    return atoms


def write(path, name, atoms):
    with open(path, "w") as f:
        f.write(f"{len(atoms)}\nname={name}\n")
        for sym, r in atoms:
            f.write(f"{sym} {r[0]:.6f} {r[1]:.6f} {r[2]:.6f}\n")


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/structures")
    out.mkdir(parents=True, exist_ok=True)
    write(out / "heptane.xyz", "heptane", alkane(7))
    write(out / "hexadecane.xyz", "hexadecane", alkane(16))
    write(out / "water_cluster_56.xyz", "water_cluster_56", water_cluster(56))


if __name__ == "__main__":
    main()
