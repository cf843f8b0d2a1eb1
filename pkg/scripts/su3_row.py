"""One row of an SU(3) stratum-relation multiplication operator.

For a source quasicharacter on two links, prints every nonzero entry
<e_t, r e_source> in the normalised basis together with its value divided by
the power of z = exp(4 hbar beta^2 / 3) that the norm ratio contributes.

    python3 scripts/su3_row.py --relation r1 --source 01,00,01
"""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass

from recouple.quasichar import NormParams
from recouple.su3 import STRATUM_RELATIONS, Su3QuasicharIndex, su3_expand_invariant, su3_operator_row, su3_zeta


@dataclass
class Config:
    relation: str
    source: str
    hbar: float
    beta: float


def parse_args() -> Config:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--relation", choices=sorted(STRATUM_RELATIONS), default="r1")
    ap.add_argument("--source", default="01,00,01", help="labels r1,r2,r as Dynkin pairs")
    ap.add_argument("--hbar", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=1.0)
    a = ap.parse_args()
    return Config(a.relation, a.source, a.hbar, a.beta)


def main() -> None:
    cfg = parse_args()
    p = NormParams(cfg.hbar, cfg.beta)
    src = Su3QuasicharIndex.parse(cfg.source)
    op = su3_expand_invariant(STRATUM_RELATIONS[cfg.relation])
    print(f"{cfg.relation} = " + " + ".join(f"({c.real:+.6g})*chi[{q}]" for q, c in sorted(op.items())))
    z = 4 * p.hbar * p.beta ** 2 / 3
    print(f"{'target':<12}{'entry':>16}{'z-power':>9}{'coefficient':>14}")
    for t, v in su3_operator_row(op, src, p).items():
        # norms carry exp(hbar beta^2 (zeta_1 + zeta_2)) and zeta is a multiple of 1/3
        power = (su3_zeta(t.r1) + su3_zeta(t.r2) - su3_zeta(src.r1) - su3_zeta(src.r2)) * 3 / 4
        print(f"{str(t):<12}{v.real:>16.8g}{str(power):>9}{v.real / math.exp(float(power) * z):>14.8f}")


if __name__ == "__main__":
    main()
