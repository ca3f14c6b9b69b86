"""Sampled grids, cubes and dyadic cube families.

Everything downstream works on a uniform grid over the half-open box
``[-L, L)^n`` with ``N`` samples per axis, ``x_k = -L + k*h`` for
``h = 2L/N``.  Cubes are half-open, ``[c - l/2, c + l/2)`` per axis, and a
grid cell belongs to a cube exactly when its center (the sample point)
does.  Integrals are midpoint sums ``h^n * sum(f)`` over member cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "Cube",
    "DyadicCube",
    "CubeFamily",
    "make_grid",
    "sample",
    "integrate",
    "enumerate_dyadic_cubes",
    "dyadic_family",
    "translate_cube_family",
    "cube_index_ranges",
]

#: Relative slack used when snapping cube edges onto the sample lattice, so
#: that edges which are exactly representable do not fall on the wrong side
#: of a cell center through rounding noise.
_SNAP = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform sample grid on the box ``[-L, L)^n``.

    Parameters
    ----------
    n : int
        Dimension, 1 or 2.
    L : float
        Half side of the box; samples cover ``[-L, L)``.
    N : int
        Samples per axis; power of two, at least 8.
    """

    n: int
    L: float
    N: int

    @property
    def h(self) -> float:
        """Grid spacing ``2L/N``."""
        return 2.0 * self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    def axis(self) -> np.ndarray:
        """Sample coordinates along one axis, ``x_k = -L + k*h``."""
        return -self.L + self.h * np.arange(self.N)

    def coords(self) -> list[np.ndarray]:
        """Per-axis coordinate arrays shaped for broadcasting."""
        ax = self.axis()
        if self.n == 1:
            return [ax]
        return [ax[:, None], ax[None, :]]

    def freq_axis(self) -> np.ndarray:
        """Dual lattice ``xi_m = m / (2L)`` for ``m = -N/2 .. N/2 - 1``."""
        return (np.arange(self.N) - self.N // 2) / (2.0 * self.L)


@dataclass
class GridFunction:
    """Values of a function sampled on a :class:`Grid`.

    ``values`` has shape ``grid.shape`` (C order along axes) and must be
    finite everywhere; real or complex dtype.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )
        if self.values.dtype.kind not in "fc":
            self.values = self.values.astype(float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function values must be finite")

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())


@dataclass(frozen=True)
class Cube:
    """Axis-aligned half-open cube ``prod_i [c_i - l/2, c_i + l/2)``."""

    center: tuple[float, ...]
    sidelength: float

    def __post_init__(self) -> None:
        if not self.sidelength > 0:
            raise ValueError(f"cube sidelength must be positive, got {self.sidelength}")

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return self.sidelength**self.n

    def lo(self) -> tuple[float, ...]:
        return tuple(c - self.sidelength / 2.0 for c in self.center)

    def hi(self) -> tuple[float, ...]:
        return tuple(c + self.sidelength / 2.0 for c in self.center)

    def intersects_box(self, grid: Grid) -> bool:
        return all(
            lo < grid.L and hi > -grid.L for lo, hi in zip(self.lo(), self.hi())
        )

    def dilate(self, factor: float) -> "Cube":
        """Concentric cube with sidelength scaled by ``factor``."""
        return Cube(self.center, self.sidelength * factor)


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic cube ``2^{-j} (k + [0,1)^n)`` with integer level and index."""

    level: int
    index: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.index)

    @property
    def sidelength(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def volume(self) -> float:
        return self.sidelength**self.n

    def as_cube(self) -> Cube:
        s = self.sidelength
        return Cube(tuple(s * (k + 0.5) for k in self.index), s)

    def contains(self, other: "DyadicCube") -> bool:
        """Whether ``other`` is contained in this cube (integer-exact).

        Python's right shift is a floor division, so this is correct for
        negative indices as well.
        """
        if other.n != self.n or other.level < self.level:
            return False
        shift = other.level - self.level
        return all((ko >> shift) == k for ko, k in zip(other.index, self.index))


@dataclass
class CubeFamily:
    """Nonempty collection of cubes, each intersecting the grid box."""

    cubes: list[Cube]
    grid: Grid = field(repr=False)

    def __post_init__(self) -> None:
        if not self.cubes:
            raise ValueError("cube family must be nonempty")
        for q in self.cubes:
            if q.n != self.grid.n:
                raise ValueError("cube dimension does not match grid")
            if not q.intersects_box(self.grid):
                raise ValueError(f"cube {q} does not intersect the grid box")

    def __len__(self) -> int:
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)


def make_grid(n: int, L: float, N: int) -> Grid:
    """Construct a grid, validating dimension, box size and resolution.

    Parameters
    ----------
    n : int
        Dimension; only 1 and 2 are supported.
    L : float
        Positive half side of the box.
    N : int
        Samples per axis; must be a power of two and at least 8.
    """
    if n not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {n}")
    if not L > 0:
        raise ValueError(f"box half-side L must be positive, got {L}")
    if N < 8 or (N & (N - 1)) != 0:
        raise ValueError(f"N must be a power of two >= 8, got {N}")
    return Grid(n, float(L), int(N))


def sample(grid: Grid, fn) -> GridFunction:
    """Sample a callable on the grid.

    ``fn`` receives one coordinate array per axis (broadcastable) and must
    return finite values; non-finite samples raise ``ValueError``.
    """
    vals = np.asarray(fn(*grid.coords()))
    vals = np.broadcast_to(vals, grid.shape).copy()
    if not np.all(np.isfinite(vals)):
        bad = int(np.sum(~np.isfinite(vals)))
        raise ValueError(f"sampled values contain {bad} non-finite entries")
    return GridFunction(grid, vals)


def _snap_ceil(v: float) -> int:
    """Smallest integer >= v, snapping values within ``_SNAP`` of an integer."""
    r = round(v)
    if abs(v - r) < _SNAP:
        return int(r)
    return int(math.ceil(v))


def _snap_floor(v: float) -> int:
    """Largest integer <= v, snapping values within ``_SNAP`` of an integer."""
    r = round(v)
    if abs(v - r) < _SNAP:
        return int(r)
    return int(math.floor(v))


def cube_index_ranges(grid: Grid, cube: Cube) -> tuple[tuple[int, int], ...]:
    """Per-axis index ranges ``[i_lo, i_hi)`` of cells whose centers lie in the cube.

    Ranges are clipped to the grid; an empty intersection yields ``i_lo >= i_hi``.
    """
    out = []
    for lo, hi in zip(cube.lo(), cube.hi()):
        i_lo = _snap_ceil((lo + grid.L) / grid.h)
        i_hi = _snap_ceil((hi + grid.L) / grid.h)
        out.append((max(i_lo, 0), min(i_hi, grid.N)))
    return tuple(out)


def integrate(f: GridFunction, cube: Cube | None = None):
    """Midpoint-rule integral ``h^n * sum`` of ``f``, optionally over a cube.

    Cells belong to the cube when their centers do; a cube that captures no
    cell centers integrates to zero.
    """
    g = f.grid
    if cube is None:
        return f.values.sum() * g.h**g.n
    ranges = cube_index_ranges(g, cube)
    if any(lo >= hi for lo, hi in ranges):
        return 0.0 * f.values.flat[0]
    sl = tuple(slice(lo, hi) for lo, hi in ranges)
    return f.values[sl].sum() * g.h**g.n


def enumerate_dyadic_cubes(grid: Grid, j_min: int, j_max: int) -> list[DyadicCube]:
    """All dyadic cubes with level in ``[j_min, j_max]`` contained in the box.

    Each qualifying cube appears exactly once.  Levels whose cubes are too
    large to fit inside ``[-L, L)^n`` contribute nothing.
    """
    if j_max < j_min:
        raise ValueError(f"empty level range [{j_min}, {j_max}]")
    if 2.0 ** (-j_min) > 2.0 * grid.L:
        raise ValueError(
            f"level {j_min} cubes (side {2.0**-j_min}) exceed the box size {2 * grid.L}"
        )
    out: list[DyadicCube] = []
    for j in range(j_min, j_max + 1):
        s = 2.0**-j
        # contained in the box: k*s >= -L and (k+1)*s <= L
        k_lo = _snap_ceil(-grid.L / s)
        k_hi = _snap_floor(grid.L / s) - 1
        ks = range(k_lo, k_hi + 1)
        if k_hi < k_lo:
            continue
        if grid.n == 1:
            out.extend(DyadicCube(j, (k,)) for k in ks)
        else:
            out.extend(DyadicCube(j, (k1, k2)) for k1 in ks for k2 in ks)
    return out


def dyadic_family(grid: Grid, j_min: int, j_max: int) -> CubeFamily:
    """Dyadic cubes of :func:`enumerate_dyadic_cubes` packaged as a family."""
    cubes = [q.as_cube() for q in enumerate_dyadic_cubes(grid, j_min, j_max)]
    return CubeFamily(cubes, grid)


def translate_cube_family(
    grid: Grid, sidelengths, offsets_per_sidelength: int = 4
) -> CubeFamily:
    """Translated cubes of the given sidelengths with centers on a uniform lattice.

    For each sidelength ``l`` the centers run over the lattice of spacing
    ``l / offsets_per_sidelength`` containing the origin; cubes that do not
    intersect the box are dropped, and duplicates are not produced.

    Parameters
    ----------
    grid : Grid
    sidelengths : iterable of float
        Positive cube sidelengths.
    offsets_per_sidelength : int
        Number of center offsets per sidelength along each axis.
    """
    if offsets_per_sidelength < 1:
        raise ValueError("offsets_per_sidelength must be >= 1")
    cubes: list[Cube] = []
    for ell in sidelengths:
        if not ell > 0:
            raise ValueError(f"sidelength must be positive, got {ell}")
        step = ell / offsets_per_sidelength
        m_lo = math.floor((-grid.L - ell / 2.0) / step) + 1
        m_hi = math.ceil((grid.L + ell / 2.0) / step) - 1
        centers = [step * m for m in range(m_lo, m_hi + 1)]
        if grid.n == 1:
            pts = [(c,) for c in centers]
        else:
            pts = [(c1, c2) for c1 in centers for c2 in centers]
        for c in pts:
            q = Cube(c, float(ell))
            if q.intersects_box(grid):
                cubes.append(q)
    return CubeFamily(cubes, grid)
