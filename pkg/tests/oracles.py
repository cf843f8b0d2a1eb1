"""Independent floating-point references used to check the exact code.

Nothing here imports the symbol routines under test.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def spin_ops(tj: int):
    """J_z and J_- for spin tj/2, basis ordered m = j, j-1, ..., -j."""
    j = tj / 2
    ms = [j - i for i in range(tj + 1)]
    jz = np.diag(ms)
    jm = np.zeros((tj + 1, tj + 1))
    for i, m in enumerate(ms[:-1]):
        jm[i + 1, i] = math.sqrt(j * (j + 1) - m * (m - 1))
    return jz, jm


def cg_table(tj1: int, tj2: int) -> dict:
    """{(tj, tm): vector over the product basis} built by lowering from the top.

    Each highest-weight vector spans ker J_+ inside its weight space; the
    sign is fixed so that the m1 = j1 component is positive.
    """
    z1, m1 = spin_ops(tj1)
    z2, m2 = spin_ops(tj2)
    i1, i2 = np.eye(tj1 + 1), np.eye(tj2 + 1)
    Jz = np.kron(z1, i2) + np.kron(i1, z2)
    Jm = np.kron(m1, i2) + np.kron(i1, m2)
    Jp = Jm.T
    w = np.diag(Jz)
    out = {}
    for tj in range(tj1 + tj2, abs(tj1 - tj2) - 1, -2):
        idx = np.flatnonzero(np.isclose(w, tj / 2))
        A = Jp[:, idx]
        _, s, vh = np.linalg.svd(A)
        null = vh[np.sum(s > 1e-10):]
        # remove components along higher-J states already built
        cands = []
        for v in null:
            full = np.zeros(len(w))
            full[idx] = v
            cands.append(full)
        v = cands[0]
        for (tjj, tm), u in out.items():
            if tm == tj:
                v = v - (u @ v) * u
        v /= np.linalg.norm(v)
        # m1 = j1 block is the first tj2+1 entries
        lead = next(x for x in v[: tj2 + 1] if abs(x) > 1e-12)
        v *= np.sign(lead)
        tm = tj
        while tm >= -tj:
            out[(tj, tm)] = v
            if tm > -tj:
                v = Jm @ v
                v /= np.linalg.norm(v)
            tm -= 2
    return out


def cg_float(j1, m1, j2, m2, j, m) -> float:
    tj1, tj2, tj = int(round(2 * j1)), int(round(2 * j2)), int(round(2 * j))
    tab = cg_table(tj1, tj2)
    key = (tj, int(round(2 * m)))
    if key not in tab:
        return 0.0
    a = int(round(j1 - m1))
    b = int(round(j2 - m2))
    if not (0 <= a <= tj1 and 0 <= b <= tj2):
        return 0.0
    return float(tab[key][a * (tj2 + 1) + b])


def sixj_float(a, b, c, d, e, f) -> float:
    """{a b c; d e f} from the overlap of two coupling orders of three spins.

    <(a b) c, d; e | a, (b d) f; e> = (-1)^{a+b+d+e} sqrt(d_c d_f) {a b c; d e f}
    """
    m = e
    val = 0.0
    for ma in np.arange(-a, a + 1):
        for mb in np.arange(-b, b + 1):
            md = m - ma - mb
            if abs(md) > d + 1e-9:
                continue
            left = cg_float(a, ma, b, mb, c, ma + mb) * cg_float(c, ma + mb, d, md, e, m)
            right = cg_float(b, mb, d, md, f, mb + md) * cg_float(a, ma, f, mb + md, e, m)
            val += left * right
    phase = (-1) ** int(round(a + b + d + e))
    return phase * val / math.sqrt((2 * c + 1) * (2 * f + 1))


def triad(a, b, c) -> bool:
    return abs(a - b) <= c <= a + b and float(a + b + c).is_integer()


def nine_lambda_float(rows) -> float:
    """Six-CG contraction of a 9-lambda symbol at top root projection.

    Rows (a b x), (c d y), (e f z); rows couple left to right, columns
    top to bottom.
    """
    (a, b, x), (c, d, y), (e, f, z) = rows
    trip = [(a, b, x), (c, d, y), (e, f, z), (a, c, e), (b, d, f), (x, y, z)]
    if not all(triad(*t) for t in trip):
        return 0.0
    mz = z
    val = 0.0

    def rng(j):
        return np.arange(-j, j + 1)

    for ma, mb, mc in itertools.product(rng(a), rng(b), rng(c)):
        for md in rng(d):
            if abs(ma + mb + mc + md - mz) > 1e-9:
                continue
            mx, my, me, mf = ma + mb, mc + md, ma + mc, mb + md
            if abs(mx) > x or abs(my) > y or abs(me) > e or abs(mf) > f:
                continue
            rowwise = cg_float(a, ma, b, mb, x, mx) * cg_float(c, mc, d, md, y, my) * cg_float(x, mx, y, my, z, mz)
            colwise = cg_float(a, ma, c, mc, e, me) * cg_float(b, mb, d, md, f, mf) * cg_float(e, me, f, mf, z, mz)
            val += rowwise * colwise
    return val
