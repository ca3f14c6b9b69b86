"""Morrey norms on sampled grids and discrete coefficient norms.

The Morrey functional of exponents ``0 < q <= lam`` is

    sup_Q |Q|^(1/lam - 1/q) * (integral_Q |f|^q)^(1/q),

with the supremum over a declared cube family rather than all cubes; every
norm value here is relative to the family that was passed in.  Coefficient
fields indexed by dyadic cubes carry the matching sequence-space norm

    sup_J ( |J|^(q/lam - 1) * sum_{Q <= J} (|Q|^(1/q - 1/lam) |s_Q|)^q )^(1/q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Cube,
    CubeFamily,
    DyadicCube,
    Grid,
    GridFunction,
    cube_index_ranges,
)

__all__ = [
    "MorreyParams",
    "CoefficientField",
    "morrey_norm",
    "coefficient_norm",
    "check_embedding",
]


@dataclass(frozen=True)
class MorreyParams:
    """Exponent pair ``0 < q <= lam`` for a Morrey-type norm.

    ``moment_order(n)`` gives the number of vanishing moments
    ``floor(n * (1/q - 1))`` required of smooth atoms in dimension ``n``.
    """

    q: float
    lam: float

    def __post_init__(self) -> None:
        if not (0 < self.q <= self.lam):
            raise ValueError(
                f"need 0 < q <= lam, got q={self.q}, lam={self.lam}"
            )
        if not math.isfinite(self.lam):
            raise ValueError("lam must be finite")

    def moment_order(self, n: int) -> int:
        return math.floor(n * (1.0 / self.q - 1.0))


@dataclass
class CoefficientField:
    """Finitely supported complex coefficients indexed by dyadic cubes."""

    coeffs: dict[DyadicCube, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for q, v in self.coeffs.items():
            if not isinstance(q, DyadicCube):
                raise TypeError(f"keys must be DyadicCube, got {type(q)}")
            if not np.isfinite(complex(v)):
                raise ValueError(f"coefficient at {q} is not finite")

    def support(self) -> list[DyadicCube]:
        return [q for q, v in self.coeffs.items() if v != 0]

    def __getitem__(self, q: DyadicCube) -> complex:
        return self.coeffs.get(q, 0.0)

    def __len__(self) -> int:
        return len(self.coeffs)


def _prefix_table(values: np.ndarray) -> np.ndarray:
    """Summed-area table with a zero border: ``P[i] = sum(values[:i])`` per axis."""
    P = values
    for ax in range(values.ndim):
        P = np.cumsum(P, axis=ax)
    pad = [(1, 0)] * values.ndim
    return np.pad(P, pad)


def _box_sums(P: np.ndarray, ranges: np.ndarray) -> np.ndarray:
    """Sums over index boxes from a prefix table.

    ``ranges`` has shape (m, n, 2) holding clipped per-axis ``[lo, hi)``.
    """
    n = P.ndim
    lo = ranges[..., 0]
    hi = np.maximum(ranges[..., 1], lo)
    if n == 1:
        return P[hi[:, 0]] - P[lo[:, 0]]
    s = (
        P[hi[:, 0], hi[:, 1]]
        - P[lo[:, 0], hi[:, 1]]
        - P[hi[:, 0], lo[:, 1]]
        + P[lo[:, 0], lo[:, 1]]
    )
    return s


def _family_ranges(grid: Grid, cubes: list[Cube]) -> np.ndarray:
    out = np.empty((len(cubes), grid.n, 2), dtype=np.int64)
    for i, q in enumerate(cubes):
        rr = cube_index_ranges(grid, q)
        for ax, (lo, hi) in enumerate(rr):
            out[i, ax, 0] = lo
            out[i, ax, 1] = hi
    return out


def morrey_norm(f: GridFunction, p: MorreyParams, family: CubeFamily) -> float:
    """Morrey functional of ``f`` over the given cube family.

    Parameters
    ----------
    f : GridFunction
    p : MorreyParams
        Exponents ``(q, lam)``.
    family : CubeFamily
        Cubes over which the supremum is taken.  Cubes that capture no cell
        centers contribute zero.

    Returns
    -------
    float
        ``max_Q |Q|^(1/lam - 1/q) (h^n sum_{cells in Q} |f|^q)^(1/q)``.
    """
    g = f.grid
    if family.grid != g:
        raise ValueError("family was built for a different grid")
    w = np.abs(f.values) ** p.q * g.h**g.n
    P = _prefix_table(w)
    ranges = _family_ranges(g, list(family.cubes))
    sums = np.clip(_box_sums(P, ranges), 0.0, None)
    vols = np.array([q.volume for q in family.cubes])
    vals = vols ** (1.0 / p.lam - 1.0 / p.q) * sums ** (1.0 / p.q)
    return float(np.max(vals))


def coefficient_norm(
    s: CoefficientField, p: MorreyParams, cubes: list[DyadicCube]
) -> float:
    """Sequence-space norm of a dyadic coefficient field.

    Parameters
    ----------
    s : CoefficientField
    p : MorreyParams
    cubes : list of DyadicCube
        Dyadic cubes ``J`` over which the outer supremum runs.  Every cube
        in the support of ``s`` must be contained in at least one ``J``;
        otherwise the supremum cannot see part of the mass and the call
        raises ``ValueError``.
    """
    if not cubes:
        raise ValueError("need at least one dyadic cube for the supremum")
    support = s.support()
    for q in support:
        if not any(J.contains(q) for J in cubes):
            raise ValueError(
                f"support cube {q} is not contained in any supremum cube"
            )
    best = 0.0
    for J in cubes:
        acc = 0.0
        for q in support:
            if J.contains(q):
                acc += (q.volume ** (1.0 / p.q - 1.0 / p.lam) * abs(s[q])) ** p.q
        if acc > 0:
            val = (J.volume ** (p.q / p.lam - 1.0) * acc) ** (1.0 / p.q)
            best = max(best, val)
    return best


def check_embedding(
    f: GridFunction, p1: MorreyParams, p2: MorreyParams, family: CubeFamily
) -> dict:
    """Check the Hoelder embedding between two Morrey norms on one family.

    Requires ``q2 <= q1`` and ``q2/lam2 == q1/lam1`` (same scaling line); the
    per-cube Hoelder inequality then forces
    ``morrey_norm(f, p2) <= morrey_norm(f, p1)`` up to roundoff.

    Returns a report with both norms, their ratio and a boolean verdict at
    slack ``1e-9``.
    """
    if p2.q > p1.q:
        raise ValueError(f"embedding needs q2 <= q1, got q2={p2.q} > q1={p1.q}")
    if abs(p2.q / p2.lam - p1.q / p1.lam) > 1e-12:
        raise ValueError(
            "embedding needs q2/lam2 == q1/lam1, got "
            f"{p2.q / p2.lam} vs {p1.q / p1.lam}"
        )
    n1 = morrey_norm(f, p1, family)
    n2 = morrey_norm(f, p2, family)
    ratio = n2 / n1 if n1 > 0 else (0.0 if n2 == 0 else math.inf)
    return {
        "norm_coarse": n1,
        "norm_fine": n2,
        "ratio": ratio,
        "holds": bool(ratio <= 1.0 + 1e-9),
    }
