"""Independent oracles shared by the test modules.

Everything here is computed straight from definitions, sharing no code
with the package: the entry rule is applied index tuple by index tuple
and the contraction loops over all 3^m terms. Agreement between these
oracles and the package's grouped-power fast paths is therefore real
evidence, not a tautology.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence, Tuple


def entry_for_index(d, u, c, idx: Sequence[int]):
    """Entry value from the number of distinct values in the index tuple."""
    k = len(set(idx))
    if k == 1:
        return d
    if k == 2:
        return u
    return c


def brute_force_eval(m: int, d, u, c, x: Sequence):
    """Dense contraction sum_{i1..im} a_{i1..im} x_{i1} ... x_{im}."""
    total = 0
    for idx in itertools.product((0, 1, 2), repeat=m):
        term = entry_for_index(d, u, c, idx)
        for i in idx:
            term = term * x[i]
        total = total + term
    return total


def brute_force_apply(m: int, d, u, c, x: Sequence) -> Tuple:
    """Dense contraction over all but the first slot: (A x^{m-1})_i."""
    out = []
    for i in range(3):
        total = 0
        for rest in itertools.product((0, 1, 2), repeat=m - 1):
            term = entry_for_index(d, u, c, (i,) + rest)
            for j in rest:
                term = term * x[j]
            total = total + term
        out.append(total)
    return tuple(out)


def brute_force_offdiagonal_row_sum(m: int, u, c):
    """Sum of |entry| over the off-diagonal part of one tensor row."""
    total = 0
    for rest in itertools.product((0, 1, 2), repeat=m - 1):
        idx = (0,) + rest
        if len(set(idx)) == 1:
            continue
        total = total + abs(entry_for_index(0, u, c, idx))
    return total


def orbit_distance(m: int, x: Sequence[float], target: Sequence[float]) -> float:
    """Max-norm distance from x to the symmetry orbit of target.

    The form is invariant under coordinate permutations and, for even m,
    under global sign flip, so a minimizer is only defined up to that
    orbit. The target is rescaled to the unit m-norm sphere first.
    """
    scale = sum(abs(float(t)) ** m for t in target) ** (1.0 / m)
    base = tuple(float(t) / scale for t in target)
    best = math.inf
    for perm in itertools.permutations(base):
        for sign in (1.0, -1.0):
            cand = max(abs(float(a) - sign * b) for a, b in zip(x, perm))
            best = min(best, cand)
    return best
