"""Low-lying spectrum of a truncated lattice Hamiltonian as the cutoff grows.

Prints one line per (tree, j_max) with the basis size, dropped couplings and
the lowest eigenvalues.  Different coupling trees give different truncations;
their ground energies should approach each other as j_max increases.

    python3 scripts/cutoff_convergence.py --links 3 --plaquette 1 2 -3 --plaquette 3 -1
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass
from fractions import Fraction

from recouple.gauge import LatticeModel, assemble_hamiltonian, spectrum
from recouple.trees import all_trees


@dataclass
class Config:
    links: int
    plaquettes: list[list[int]]
    g: float
    delta: float
    jmax: Fraction
    levels: int


def parse_args() -> Config:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--links", type=int, default=3)
    ap.add_argument("--plaquette", type=int, nargs="+", action="append",
                    help="signed link word, repeatable (default: 1 2 -3 and 3 -1)")
    ap.add_argument("--g", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--jmax", type=Fraction, default=Fraction(3, 2), help="largest cutoff, e.g. 3/2")
    ap.add_argument("--levels", type=int, default=3, help="eigenvalues to print per line")
    a = ap.parse_args()
    plaqs = a.plaquette or [[1, 2, -3], [3, -1]]
    return Config(a.links, plaqs, a.g, a.delta, a.jmax, a.levels)


def main() -> None:
    cfg = parse_args()
    model = LatticeModel(cfg.links, tuple(map(tuple, cfg.plaquettes)), cfg.g, cfg.delta)
    trees = all_trees(cfg.links)
    cutoffs = [Fraction(k, 2) for k in range(1, int(2 * cfg.jmax) + 1)]
    print(f"model {model.to_json()}")
    print(f"{'tree':<16}{'jmax':>6}{'size':>7}{'dropped':>9}  levels")
    for jm in cutoffs:
        grounds = []
        for t in trees:
            t0 = time.perf_counter()
            sp = assemble_hamiltonian(model, t, jm)
            ev = spectrum(sp, vectors=False).eigenvalues
            grounds.append(ev[0])
            lv = " ".join(f"{x:.6f}" for x in ev[:cfg.levels])
            print(f"{str(t):<16}{str(jm):>6}{sp.size:>7}{sp.dropped_couplings:>9}  {lv}"
                  f"  ({time.perf_counter() - t0:.1f}s)")
        print(f"{'':<16}{str(jm):>6}  ground-energy spread across trees {max(grounds) - min(grounds):.4f}")


if __name__ == "__main__":
    main()
