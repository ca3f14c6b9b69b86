"""Atom and block constructors with machine-checkable certificates.

Smooth atoms are seeded bump-times-polynomial profiles on a cube, projected
so their low-order moments vanish and normalized so the sup bound
``|Q|^{-1/lam}`` is attained.  Rough blocks skip the moment projection and
are only admitted on cubes of sidelength at least one.  Oscillating atoms
with a prescribed number of vanishing moments are built spectrally from an
explicit closed-form transform, which makes the frequency-side comparison
with :func:`hml.fourier.hkp_closed_form` exact.  The module also provides
the two special mollifier profiles used throughout (a compactly supported
cutoff whose transform dominates 1 on the unit ball, and a flat-spectrum
unit whose moments of every order vanish), a moment-projection routine, a
lattice dilation, and the explicit block decomposition of a mollified
function over the unit-cube tiling.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .fourier import (
    SpectrumFunction,
    dual_grid,
    fourier,
    hkp_support_radius,
    hkp_time_profile,
    inverse_fourier,
)
from .grid import (
    Cube,
    CubeFamily,
    DyadicCube,
    Grid,
    GridFunction,
    cube_index_ranges,
    enumerate_dyadic_cubes,
    make_grid,
)
from .maximal import (
    ScaleLadder,
    hm_local_norm,
    hm_norm,
    mollify,
    nontangential_maximal,
)
from .morrey import CoefficientField, MorreyParams

__all__ = [
    "Atom",
    "CutoffPair",
    "bump_profile",
    "make_suitable_cutoff",
    "make_moment_unit",
    "make_cutoff_pair",
    "project_moments",
    "make_smooth_atom",
    "make_rough_block",
    "make_hkp_atom",
    "dilate_atom",
    "rough_block_decompose",
    "global_local_gap",
    "verify_atom",
    "atom_to_json",
    "atom_from_json",
]

_KINDS = ("smooth", "rough", "hkp")


@dataclass
class Atom:
    """A certified atom or block sampled on a grid.

    Parameters
    ----------
    kind : str
        One of ``"smooth"``, ``"rough"``, ``"hkp"``.
    cube : Cube
        Cube that carries the profile (for the spectrally constructed
        oscillating kind, the box that carries all but the ringing tails).
    data : GridFunction
        Sampled values.
    moment_order : int
        Largest order of vanishing discrete moments; ``-1`` means none.
    params : MorreyParams
        Exponents the normalization refers to.
    evaluator : callable, optional
        Analytic evaluator ``f(X, ...) -> values`` agreeing with ``data``
        on the lattice; enables exact off-lattice dilation.
    aux : dict
        Construction bookkeeping (not serialized, not compared).
    """

    kind: str
    cube: Cube
    data: GridFunction
    moment_order: int
    params: MorreyParams
    evaluator: Optional[Callable[..., np.ndarray]] = field(
        default=None, repr=False, compare=False
    )
    aux: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if self.moment_order < -1:
            raise ValueError("moment_order must be >= -1")


@dataclass(frozen=True)
class CutoffPair:
    """A cutoff/moment-unit profile pair with measured certificates.

    ``phi`` is compactly supported in the unit ball with transform >= 1
    there; ``psi`` has a flat unit spectrum near the origin, so its
    integral is one and all its moments vanish.
    """

    phi: GridFunction
    psi: GridFunction
    phi_hat_min: float
    psi_flat_radius: float
    psi_hat_error: float


def bump_profile(u: np.ndarray) -> np.ndarray:
    """Smooth compactly supported bump ``exp(-1/(1-u^2))`` on ``|u| < 1``.

    Parameters
    ----------
    u : ndarray
        Evaluation points (any shape).

    Returns
    -------
    ndarray
        Bump values, identically zero for ``|u| >= 1``.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def _smooth_ramp(u: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for u <= 0, 1 for u >= 1, monotone between."""
    u = np.asarray(u, dtype=float)
    a = np.zeros_like(u)
    pos = u > 0
    a[pos] = np.exp(-1.0 / u[pos])
    b = np.zeros_like(u)
    neg = u < 1
    b[neg] = np.exp(-1.0 / (1.0 - u[neg]))
    return a / (a + b)


def _radius_grid(g: Grid) -> np.ndarray:
    x = g.axis()
    if g.n == 1:
        return np.abs(x)
    return np.sqrt(x[:, None] ** 2 + x[None, :] ** 2)


def _freq_radius_grid(g: Grid) -> np.ndarray:
    xi = g.freq_axis()
    if g.n == 1:
        return np.abs(xi)
    return np.sqrt(xi[:, None] ** 2 + xi[None, :] ** 2)


def _self_convolve(g: Grid, vals: np.ndarray) -> np.ndarray:
    """Zero-padded FFT self-convolution ``h^n * (vals * vals)``."""
    P = 2 * g.N
    pad = np.zeros((P,) * g.n, dtype=float)
    pad[(slice(0, g.N),) * g.n] = vals
    spec = np.fft.fftn(pad)
    conv = np.fft.ifftn(spec * spec).real * g.h**g.n
    # input sample i sits at x_i = -L + i h, so the linear-convolution value
    # for grid point x_t lives at padded index t + N/2
    idx = np.arange(g.N) + g.N // 2
    if g.n == 1:
        return conv[idx]
    return conv[np.ix_(idx, idx)]


def make_suitable_cutoff(g: Grid) -> GridFunction:
    """Cutoff supported in the unit ball whose transform dominates 1 there.

    The profile is ``phi(x) = c1^n c2 (eta*eta)(c1 x)`` for a fixed radial
    bump ``eta`` supported in the ball of radius 1/2, with ``c1 = 2`` and
    ``c2`` calibrated so the measured minimum of ``phihat`` over frequency
    samples with ``|xi| <= 1`` lands at 1.05.  Being a squared transform,
    ``phihat`` is real and nonnegative.

    Parameters
    ----------
    g : Grid
        Target grid; must resolve the unit ball with >= 32 samples per
        axis and contain it.

    Returns
    -------
    GridFunction
        The calibrated cutoff.

    Raises
    ------
    ValueError
        If the grid is too coarse, too small, or calibration fails.
    """
    if 2.0 / g.h < 32:
        raise ValueError("grid must resolve B(0,1) with at least 32 samples per axis")
    if g.L < 1.0:
        raise ValueError("grid box must contain the unit ball")
    eta = bump_profile(_radius_grid(g) / 0.475)
    psi = _self_convolve(g, eta)  # supported in B(0, 0.95)
    c1 = 2
    idx = np.arange(g.N)
    src = c1 * idx - (c1 - 1) * (g.N // 2)
    ok = (src >= 0) & (src < g.N)
    take = np.clip(src, 0, g.N - 1)
    if g.n == 1:
        vals = np.where(ok, psi[take], 0.0)
    else:
        vals = np.where(np.logical_and.outer(ok, ok), psi[np.ix_(take, take)], 0.0)
    vals = float(c1) ** g.n * vals
    spec = fourier(GridFunction(g, vals.copy()))
    sel = _freq_radius_grid(g) <= 1.0 + 1e-12
    base = float(np.min(spec.values.real[sel]))
    if base <= 0.0:
        raise ValueError("cutoff calibration failed: transform not positive on the unit ball")
    c2 = 1.05 / base
    if not np.isfinite(c2) or c2 > 1e6:
        raise ValueError("cutoff calibration failed: required amplitude out of bounds")
    return GridFunction(g, vals * c2)


def _moment_indices(n: int, order: int) -> list[tuple[int, ...]]:
    """All moment multi-indices of order 1..order."""
    if n == 1:
        return [(p,) for p in range(1, order + 1)]
    return [(a, s - a) for s in range(1, order + 1) for a in range(s + 1)]


def _moment_of(g: Grid, vals: np.ndarray, alpha: tuple[int, ...]) -> float:
    x = g.axis()
    if g.n == 1:
        mono = x ** alpha[0]
    else:
        mono = np.outer(x ** alpha[0], x ** alpha[1])
    return float(np.sum(mono * vals) * g.h**g.n)


def make_moment_unit(g: Grid, r: float, order: int = 8) -> GridFunction:
    """Profile with unit integral and vanishing moments of every order.

    Realized as the inverse transform of a smooth radial plateau equal to
    1 on ``|xi| <= r`` and 0 for ``|xi| >= 2r``; the infinitely many moment
    conditions become spectral flatness at the origin.  Odd lattice moments
    vanish by symmetry; the even ones pick up a small trigonometric
    interpolation coupling, which is removed exactly by a smooth radial
    correction supported on the ramp annulus (the plateau itself is never
    touched, so the unit integral and flat-spectrum certificates are
    unaffected).

    Parameters
    ----------
    g : Grid
        Target grid.
    r : float
        Flat radius; requires ``0 < r < Nyquist/2``.
    order : int, optional
        Highest moment order targeted by the correction (default 8).  When
        the frequency lattice resolves the ramp annulus the residuals land
        at rounding level; on coarse ramps the least-squares solve reduces
        them as far as the available rank allows.

    Returns
    -------
    GridFunction
        The sampled profile (real, rapidly decaying).
    """
    nyq = g.N / (4.0 * g.L)
    if not 0.0 < r < nyq / 2.0:
        raise ValueError("flat radius must satisfy 0 < r < Nyquist/2")
    rho = _freq_radius_grid(g)
    plateau = _smooth_ramp((2.0 * r - rho) / r)
    alphas = _moment_indices(g.n, order)
    t = (rho - 1.5 * r) / (0.5 * r)  # ramp annulus mapped to [-1, 1]
    window = bump_profile(t)
    radial = [window * np.polynomial.chebyshev.Chebyshev.basis(j)(np.clip(t, -1, 1))
              for j in range(len(alphas) if g.n == 1 else 6)]
    if g.n == 1:
        basis = radial
    else:
        # Moments of radial profiles nearly factor through |xi|-moments, so
        # angular harmonics are needed for the system to gain row rank.
        xi = dual_grid(g).axis()
        theta = np.arctan2.outer(xi, xi).T
        angular = [np.ones_like(theta)]
        for mh in range(1, 5):
            angular.append(np.cos(2 * mh * theta))
            angular.append(np.sin(2 * mh * theta))
        basis = [rad * ang for rad in radial for ang in angular]
    spatial = [
        np.real(inverse_fourier(SpectrumFunction(g, b.astype(complex))).values) for b in basis
    ]
    A = np.array([[_moment_of(g, s, a) for s in spatial] for a in alphas])
    base = np.real(inverse_fourier(SpectrumFunction(g, plateau.astype(complex))).values)
    row = 1.0 / np.maximum(np.max(np.abs(A), axis=1), 1e-300)
    lhs = A * row[:, None]
    vals = base
    for _ in range(3):  # least-squares annihilation with iterative refinement
        m = np.array([_moment_of(g, vals, a) for a in alphas])
        coef = np.linalg.lstsq(lhs, m * row, rcond=1e-12)[0]
        vals = vals - sum(c * s for c, s in zip(coef, spatial))
    return GridFunction(g, vals)


def make_cutoff_pair(g: Grid, r: float = 0.25) -> CutoffPair:
    """Build the cutoff/moment-unit pair with measured certificates.

    Parameters
    ----------
    g : Grid
        Target grid.
    r : float, optional
        Flat-spectrum radius passed to :func:`make_moment_unit`.

    Returns
    -------
    CutoffPair
    """
    phi = make_suitable_cutoff(g)
    psi = make_moment_unit(g, r)
    sel = _freq_radius_grid(g) <= 1.0 + 1e-12
    phi_min = float(np.min(fourier(phi).values.real[sel]))
    spec_psi = fourier(psi)
    near = _freq_radius_grid(g) <= r + 1e-12
    psi_err = float(np.max(np.abs(spec_psi.values[near] - 1.0)))
    return CutoffPair(phi, psi, phi_min, r, psi_err)


def _monomial_indices(n: int, order: int) -> list[tuple[int, ...]]:
    if n == 1:
        return [(a,) for a in range(order + 1)]
    return [(a, b) for a in range(order + 1) for b in range(order + 1 - a)]


def _scaled_monomials(g: Grid, Q: Cube, alphas: Sequence[tuple[int, ...]]) -> np.ndarray:
    x = g.axis()
    slabs = []
    for alpha in alphas:
        if g.n == 1:
            u = (x - Q.center[0]) / Q.sidelength
            slabs.append(u ** alpha[0])
        else:
            u = (x - Q.center[0]) / Q.sidelength
            v = (x - Q.center[1]) / Q.sidelength
            slabs.append(np.outer(u ** alpha[0], v ** alpha[1]))
    return np.stack(slabs)


def _cube_weight(g: Grid, Q: Cube, margin: float = 0.95) -> np.ndarray:
    x = g.axis()
    half = Q.sidelength / 2.0
    w1 = bump_profile((x - Q.center[0]) / (half * margin))
    if g.n == 1:
        return w1
    w2 = bump_profile((x - Q.center[1]) / (half * margin))
    return np.outer(w1, w2)


def _moment_system(g: Grid, Q: Cube, order: int):
    """Scaled monomials, weighted basis and Gram matrix for Q."""
    alphas = _monomial_indices(g.n, order)
    monos = _scaled_monomials(g, Q, alphas)
    basis = monos * _cube_weight(g, Q)[None]
    quad = g.h**g.n
    axes = (tuple(range(1, monos.ndim)),) * 2
    gram = np.tensordot(monos, basis, axes=axes) * quad
    return alphas, monos, basis, gram


def project_moments(f: GridFunction, Q: Cube, order: int) -> GridFunction:
    """Remove all discrete moments of order <= ``order`` from ``f``.

    Subtracts the combination of bump-weighted scaled monomials on ``Q``
    that matches the moments of ``f``, so the output stays supported in
    ``Q`` and its moments through ``order`` vanish.

    Parameters
    ----------
    f : GridFunction
        Input, supported in ``Q``.
    Q : Cube
        Carrier cube.
    order : int
        Highest moment order to annihilate (>= 0).

    Returns
    -------
    GridFunction
        The moment-free remainder.

    Raises
    ------
    ValueError
        If the moment Gram system is too ill-conditioned (cube unresolved
        by the grid).
    """
    if order < 0:
        raise ValueError("moment order must be >= 0")
    g = f.grid
    alphas, monos, basis, gram = _moment_system(g, Q, order)
    cond = np.linalg.cond(gram)
    if cond > 1e10:
        raise ValueError(f"moment system ill-conditioned (cond={cond:.2e}); refine the grid")
    axes = (tuple(range(1, monos.ndim)), tuple(range(f.values.ndim)))
    m = np.tensordot(monos, f.values, axes=axes) * g.h**g.n
    coef = np.linalg.solve(gram, m)
    out = f.values - np.tensordot(coef, basis, axes=(0, 0))
    return GridFunction(g, out)


def _require_inside(g: Grid, Q: Cube) -> None:
    for c in Q.center:
        if abs(c) + Q.sidelength / 2.0 > g.L + 1e-12:
            raise ValueError("cube does not fit inside the grid box")


def _seeded_profile(g: Grid, Q: Cube, seed: int, degree: int):
    """Random polynomial-times-bump profile on Q and its analytic closure."""
    rng = np.random.default_rng(seed)
    alphas = _monomial_indices(g.n, degree)
    coeffs = rng.normal(size=len(alphas))
    center = Q.center
    side = Q.sidelength
    half = side / 2.0

    def evaluate(*pts):
        us = [(np.asarray(p, dtype=float) - center[d]) / side for d, p in enumerate(pts)]
        w = np.ones_like(us[0])
        for d, p in enumerate(pts):
            w = w * bump_profile((np.asarray(p, dtype=float) - center[d]) / (half * 0.95))
        poly = np.zeros_like(us[0])
        for c, alpha in zip(coeffs, alphas):
            term = np.ones_like(us[0])
            for d, a in enumerate(alpha):
                term = term * us[d] ** a
            poly = poly + c * term
        return poly * w

    return _grid_eval(g, evaluate), evaluate


def _grid_eval(g: Grid, evaluate: Callable[..., np.ndarray]) -> np.ndarray:
    x = g.axis()
    if g.n == 1:
        return evaluate(x)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return evaluate(X, Y)


def make_smooth_atom(p: MorreyParams, Q: Cube, seed: int, g: Grid) -> Atom:
    """Seeded smooth atom on ``Q``: moment-free and sup-normalized.

    Parameters
    ----------
    p : MorreyParams
        Exponents; requires ``q <= 1``.
    Q : Cube
        Carrier cube, inside the grid box.
    seed : int
        Seed for the random profile.
    g : Grid
        Target grid.

    Returns
    -------
    Atom
        Atom with ``sup|a| * |Q|^{1/lam} = 1`` exactly on the lattice and
        vanishing moments through order ``floor(n(1/q - 1))``.

    Raises
    ------
    ValueError
        If ``q > 1``, the cube overflows the box, or ten reseeds in a row
        produce a degenerate (projected-to-zero) profile.
    """
    if p.q > 1.0:
        raise ValueError("smooth atoms require q <= 1")
    _require_inside(g, Q)
    order = p.moment_order(g.n)
    last_err: Optional[Exception] = None
    for trial in range(10):
        vals, evaluate = _seeded_profile(g, Q, seed + 1013 * trial, order + 2)
        alphas, monos, basis, gram = _moment_system(g, Q, order)
        cond = np.linalg.cond(gram)
        if cond > 1e10:
            raise ValueError(f"moment system ill-conditioned (cond={cond:.2e}); refine the grid")
        axes = (tuple(range(1, monos.ndim)), tuple(range(vals.ndim)))
        m = np.tensordot(monos, vals, axes=axes) * g.h**g.n
        coef = np.linalg.solve(gram, m)
        projected = vals - np.tensordot(coef, basis, axes=(0, 0))
        sup = float(np.max(np.abs(projected)))
        if sup <= 1e-12 * max(1.0, float(np.max(np.abs(vals)))):
            last_err = ValueError("profile degenerate after moment projection")
            continue
        scale = Q.volume ** (-1.0 / p.lam) / sup
        center = Q.center
        side = Q.sidelength
        half = side / 2.0

        def atom_eval(*pts, _ev=evaluate, _coef=coef, _alphas=alphas, _scale=scale):
            us = [(np.asarray(pt, dtype=float) - center[d]) / side for d, pt in enumerate(pts)]
            w = np.ones_like(us[0])
            for d, pt in enumerate(pts):
                w = w * bump_profile((np.asarray(pt, dtype=float) - center[d]) / (half * 0.95))
            corr = np.zeros_like(us[0])
            for c, alpha in zip(_coef, _alphas):
                term = np.ones_like(us[0])
                for d, a in enumerate(alpha):
                    term = term * us[d] ** a
                corr = corr + c * term
            return _scale * (_ev(*pts) - corr * w)

        data = GridFunction(g, projected * scale)
        return Atom("smooth", Q, data, order, p, atom_eval)
    raise ValueError("could not build a nondegenerate smooth atom in 10 attempts") from last_err


def make_rough_block(p: MorreyParams, Q: Cube, seed: int, g: Grid) -> Atom:
    """Seeded bounded block on a cube of sidelength >= 1 (no moments).

    Parameters
    ----------
    p : MorreyParams
        Exponents.
    Q : Cube
        Carrier cube with ``sidelength >= 1``.
    seed : int
        Seed for the profile.
    g : Grid
        Target grid.

    Returns
    -------
    Atom
        Block with ``sup|a| = |Q|^{-1/lam}`` and ``moment_order = -1``.
    """
    if Q.sidelength < 1.0:
        raise ValueError("rough blocks require sidelength >= 1")
    _require_inside(g, Q)
    vals, evaluate = _seeded_profile(g, Q, seed, 2)
    w = _cube_weight(g, Q)
    vals = vals + 3.0 * w  # bias so the block has robustly nonzero mean
    sup = float(np.max(np.abs(vals)))
    if sup == 0.0:
        raise ValueError("degenerate block profile")
    scale = Q.volume ** (-1.0 / p.lam) / sup
    center = Q.center
    half = Q.sidelength / 2.0

    def block_eval(*pts, _ev=evaluate, _scale=scale):
        w = np.ones_like(np.asarray(pts[0], dtype=float))
        for d, pt in enumerate(pts):
            w = w * bump_profile((np.asarray(pt, dtype=float) - center[d]) / (half * 0.95))
        return _scale * (_ev(*pts) + 3.0 * w)

    return Atom("rough", Q, GridFunction(g, vals * scale), -1, p, block_eval)


def _axis_grid(g: Grid) -> Grid:
    return make_grid(1, g.L, g.N) if g.n == 2 else g


def _default_transverse(g1: Grid) -> np.ndarray:
    """Unit-integral even bump supported in [-1/2, 1/2) for the x' factor."""
    vals = bump_profile(g1.axis() / 0.475)
    return vals / (vals.sum() * g1.h)


def _semidiscrete_transform(g1: Grid, vals: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """h * sum_k vals_k exp(-2 pi i x_k xi) at arbitrary frequencies."""
    x = g1.axis()
    return (vals[None, :] * np.exp(-2j * np.pi * np.outer(xi, x))).sum(axis=1) * g1.h


def _hkp_spectrum(
    g: Grid, k: int, lam: float, eps: float, psi_vals: Optional[np.ndarray]
) -> np.ndarray:
    """Frequency samples of the dilated closed form on the grid lattice."""
    g1 = _axis_grid(g)
    xi = g1.freq_axis()
    profile = hkp_time_profile(k, eps * xi)
    profile[0] = 0.0  # unpaired lowest bin: keep the samples exactly real
    amp = eps ** (g.n * (1.0 - 1.0 / lam))
    if g.n == 1:
        return amp * profile
    cross = _semidiscrete_transform(g1, psi_vals, eps * xi)
    cross[0] = 0.0
    return amp * np.outer(cross, profile)


def make_hkp_atom(
    k: int, lam: float, g: Grid, psi_profile: Optional[np.ndarray] = None
) -> Atom:
    """Oscillating atom with ``k`` vanishing moments, built spectrally.

    The last-axis factor is the inverse transform of the closed-form
    spectrum ``((1-cos 2 pi xi)/(i pi xi)) (-i)^k prod_j sin(2 pi j xi)``;
    in two dimensions it is tensored with a unit-integral bump in the first
    coordinate.  The forward transform of the result reproduces the closed
    form exactly on the frequency lattice (away from the unpaired lowest
    bin), which is the self-consistency the frequency-side experiments
    rely on.

    Parameters
    ----------
    k : int
        Number of vanishing moments (>= 1).
    lam : float
        Integrability exponent stored with the atom.
    g : Grid
        Target grid; the box must contain the support radius
        ``1 + k(k+1)/2``.
    psi_profile : ndarray, optional
        Transverse profile samples with unit discrete integral (n=2 only);
        defaults to an even unit bump on ``[-1/2, 1/2)``.

    Returns
    -------
    Atom
        Atom of kind ``"hkp"`` with ``moment_order = k - 1``.
    """
    if k < 1:
        raise ValueError("need at least one vanishing moment")
    R = hkp_support_radius(k)
    if R > g.L:
        raise ValueError("grid box too small for the atom support")
    g1 = _axis_grid(g)
    psi_vals: Optional[np.ndarray] = None
    if g.n == 2:
        psi_vals = _default_transverse(g1) if psi_profile is None else np.asarray(psi_profile, float)
        if psi_vals.shape != (g.N,):
            raise ValueError("transverse profile must have one sample per axis point")
    spec = _hkp_spectrum(g, k, lam, 1.0, psi_vals)
    data = np.real(inverse_fourier(SpectrumFunction(g, spec.astype(complex))).values)
    q = g.n / (g.n + k - 0.5)  # puts floor(n(1/q-1)) exactly at k-1
    params = MorreyParams(q, lam)
    cube = Cube((0.0,) * g.n, 2.0 * R)
    aux = {"k": k, "eps": 1.0, "psi": psi_vals}
    return Atom("hkp", cube, GridFunction(g, data), k - 1, params, None, aux)


def dilate_atom(a: Atom, eps: float) -> Atom:
    """Dilate an atom: ``a_eps(x) = eps^{-n/lam} a(x/eps)``.

    Shrinking (``eps <= 1``) maps the lattice into itself and resamples
    directly; stretching uses the atom's analytic evaluator, or, for the
    spectrally defined oscillating kind, rebuilds from the closed form so
    the frequency-side identity stays exact.

    Parameters
    ----------
    a : Atom
        Input atom.
    eps : float
        Dilation scale; must be a power of two and keep the support inside
        the grid box.

    Returns
    -------
    Atom
        The dilated atom (same kind, moment order and exponents).
    """
    j = math.log2(eps) if eps > 0 else None
    if j is None or abs(j - round(j)) > 1e-9:
        raise ValueError("dilation scale must be a power of two")
    if eps == 1.0:
        return Atom(a.kind, a.cube, GridFunction(a.data.grid, a.data.values.copy()),
                    a.moment_order, a.params, a.evaluator, dict(a.aux))
    g = a.data.grid
    new_cube = a.cube.dilate(eps)
    _require_inside(g, new_cube)
    n_over_lam = g.n / a.params.lam
    if a.kind == "hkp":
        k = a.moment_order + 1
        eps_total = a.aux.get("eps", 1.0) * eps
        spec = _hkp_spectrum(g, k, a.params.lam, eps_total, a.aux.get("psi"))
        vals = np.real(inverse_fourier(SpectrumFunction(g, spec.astype(complex))).values)
        aux = dict(a.aux)
        aux["eps"] = eps_total
        return Atom("hkp", new_cube, GridFunction(g, vals), a.moment_order, a.params, None, aux)
    scale = eps ** (-n_over_lam)
    if a.evaluator is not None:
        x = g.axis() / eps
        if g.n == 1:
            vals = scale * a.evaluator(x)
        else:
            X, Y = np.meshgrid(x, x, indexing="ij")
            vals = scale * a.evaluator(X, Y)
        new_eval = _dilated_evaluator(a.evaluator, eps, scale)
        return Atom(a.kind, new_cube, GridFunction(g, vals), a.moment_order, a.params, new_eval)
    if eps > 1.0:
        raise ValueError("stretching a sampled atom requires an analytic evaluator")
    s = int(round(1.0 / eps))
    idx = np.arange(g.N)
    src = s * idx - (s - 1) * (g.N // 2)
    ok = (src >= 0) & (src < g.N)
    take = np.clip(src, 0, g.N - 1)
    if g.n == 1:
        vals = np.where(ok, a.data.values[take], 0.0)
    else:
        vals = np.where(np.logical_and.outer(ok, ok), a.data.values[np.ix_(take, take)], 0.0)
    return Atom(a.kind, new_cube, GridFunction(g, scale * vals), a.moment_order, a.params, None)


def _dilated_evaluator(ev: Callable[..., np.ndarray], eps: float, scale: float):
    def dilated(*pts):
        return scale * ev(*(np.asarray(p, dtype=float) / eps for p in pts))

    return dilated


def rough_block_decompose(
    f: GridFunction, psi: GridFunction, p: MorreyParams, ladder: ScaleLadder
) -> tuple[CoefficientField, list[Atom]]:
    """Split ``psi * f`` into normalized blocks over the unit-cube tiling.

    Each unit cube ``Q`` receives the coefficient
    ``s_Q = |Q|^{1/lam - 1/q} ||m* f||_{L^q(Q)}`` (the truncated
    non-tangential maximal function of ``f``), lifted if needed so the
    normalized block obeys the sup bound; ``sum_Q s_Q b_Q`` reproduces
    ``psi * f`` exactly at every grid point.

    Parameters
    ----------
    f : GridFunction
        Input function.
    psi : GridFunction
        Moment-unit mollifier (unit integral).
    p : MorreyParams
        Exponents.
    ladder : ScaleLadder
        Truncated ladder whose top scale must be 1 (so the mollification
        at scale one is dominated by the maximal function).

    Returns
    -------
    (CoefficientField, list of Atom)
        Coefficients keyed by level-0 dyadic cubes, and the blocks in the
        same order as ``sorted`` cube enumeration.
    """
    g = f.grid
    if abs(g.L - round(g.L)) > 1e-12 or g.L < 1:
        raise ValueError("unit-cube tiling requires an integer box radius L >= 1")
    if not ladder.truncated or ladder.scales[0] != 1.0:
        raise ValueError("ladder must be truncated with top scale 1")
    cubes = enumerate_dyadic_cubes(g, 0, 0)
    if len(cubes) != round((2 * g.L) ** g.n):
        raise ValueError("unit-cube lattice does not tile the grid box")
    smoothed = mollify(f, psi, 1.0)
    mstar = nontangential_maximal(f, psi, ladder).values
    quad = g.h**g.n
    coeffs: dict[DyadicCube, complex] = {}
    blocks: list[Atom] = []
    for dq in cubes:
        Q = dq.as_cube()
        ranges = cube_index_ranges(g, Q)
        sl = tuple(slice(lo, hi) for lo, hi in ranges)
        local_max = mstar[sl]
        s_q = float((np.sum(local_max**p.q) * quad) ** (1.0 / p.q))
        s_q *= Q.volume ** (1.0 / p.lam - 1.0 / p.q)
        piece = np.zeros_like(smoothed.values)
        piece[sl] = smoothed.values[sl]
        sup_piece = float(np.max(np.abs(piece)))
        s_q = max(s_q, Q.volume ** (1.0 / p.lam) * sup_piece)
        if s_q == 0.0:
            coeffs[dq] = 0.0
            block_vals = np.zeros_like(piece)
        else:
            coeffs[dq] = s_q
            block_vals = piece / s_q
        blocks.append(Atom("rough", Q, GridFunction(g, block_vals), -1, p))
    return CoefficientField(coeffs), blocks


def global_local_gap(
    f: GridFunction,
    psi: GridFunction,
    p: MorreyParams,
    ladder: ScaleLadder,
    family: CubeFamily,
) -> float:
    """Ratio ``||f - psi*f||_HM / ||f||_hm`` (full vs truncated ladder).

    Parameters
    ----------
    f : GridFunction
        Input function.
    psi : GridFunction
        Moment-unit mollifier.
    p : MorreyParams
        Exponents.
    ladder : ScaleLadder
        Truncated ladder for the denominator.
    family : CubeFamily
        Cube family for both Morrey norms.

    Returns
    -------
    float
        The measured ratio.

    Raises
    ------
    ValueError
        If the denominator vanishes.
    """
    g = f.grid
    den = hm_local_norm(f, p, psi, ladder, family)
    if den == 0.0:
        raise ValueError("zero local norm: the gap ratio is undefined")
    t_max = 2.0 ** math.floor(math.log2(g.L))
    scales = []
    t = t_max
    while t >= min(ladder.scales) - 1e-15:
        scales.append(t)
        t /= 2.0
    wide = ScaleLadder(tuple(scales))
    diff = GridFunction(g, f.values - mollify(f, psi, 1.0).values)
    num = hm_norm(diff, p, psi, wide, family)
    return num / den


def _outside_mask(g: Grid, Q: Cube) -> np.ndarray:
    ranges = cube_index_ranges(g, Q)
    mask = np.ones(g.shape, dtype=bool)
    sl = tuple(slice(lo, hi) for lo, hi in ranges)
    mask[sl] = False
    return mask


def _extract_last_axis_factor(a: Atom) -> np.ndarray:
    """Recover the oscillating factor from an hkp atom's samples.

    For the tensor construction with a unit-integral transverse profile,
    integrating out the first axis returns the last-axis factor exactly.
    """
    if a.data.grid.n == 1:
        return a.data.values
    return a.data.values.sum(axis=0) * a.data.grid.h


def verify_atom(a: Atom) -> dict:
    """Mechanically check an atom's defining properties.

    Smooth atoms must vanish outside their cube, obey the sup bound
    ``|Q|^{-1/lam}`` and have vanishing moments through their declared
    order.  Rough blocks skip the moment check but must sit on a cube of
    sidelength >= 1.  For the spectrally built oscillating kind the
    support check is replaced by a measured ringing-tail ratio and the sup
    bound by the unit bound on the oscillating factor.

    Parameters
    ----------
    a : Atom
        Atom to check.

    Returns
    -------
    dict
        Report with per-check entries and an overall ``"passed"`` flag;
        failures are reported, never raised.
    """
    g = a.data.grid
    vals = a.data.values
    sup = float(np.max(np.abs(vals)))
    report: dict = {"kind": a.kind, "moment_order": a.moment_order, "checks": {}}
    checks = report["checks"]

    if a.kind == "hkp":
        # The band-limited construction carries the jump mid-value on the
        # boundary sample and rings just beyond it; measure the tail a few
        # cells out so the certificate reflects genuine leakage.
        margin = Cube(a.cube.center, a.cube.sidelength + 4.0 * g.h)
        outside = _outside_mask(g, margin)
        leak = float(np.max(np.abs(vals[outside]))) if outside.any() else 0.0
        leak_ratio = leak / sup if sup > 0 else 0.0
        checks["support"] = {"tail_ratio": leak_ratio, "passed": leak_ratio <= 0.1}
    else:
        outside = _outside_mask(g, a.cube)
        leak = float(np.max(np.abs(vals[outside]))) if outside.any() else 0.0
        leak_ratio = leak / sup if sup > 0 else 0.0
        checks["support"] = {"leak_ratio": leak_ratio, "passed": leak_ratio <= 1e-12}

    if a.kind == "hkp":
        factor = _extract_last_axis_factor(a)
        k = a.moment_order + 1
        fsup = float(np.max(np.abs(factor)))
        amp = a.aux.get("eps", 1.0) ** (-1.0 / a.params.lam) if a.aux else 1.0
        checks["sup_bound"] = {
            "factor_sup": fsup,
            "bound": amp,
            "passed": fsup <= amp * (1.0 + 1e-6),
        }
        g1 = _axis_grid(g)
        x = g1.axis()
        ell = a.cube.sidelength
        moments = []
        for order in range(k):
            resid = abs(float(np.sum(factor * x**order) * g1.h))
            # The spectrum is pinned to the closed form, so lattice moments
            # carry a small trigonometric interpolation coupling rather than
            # vanishing to machine precision; the threshold reflects that.
            tol = 1e-7 * fsup * ell ** (order + 1)
            moments.append({"order": order, "residual": resid, "tolerance": tol,
                            "passed": resid <= tol})
        checks["moments"] = moments
    else:
        slack = sup * a.cube.volume ** (1.0 / a.params.lam)
        checks["sup_bound"] = {"slack": slack, "passed": slack <= 1.0 + 1e-9}
        if a.kind == "rough":
            checks["sidelength"] = {"value": a.cube.sidelength,
                                    "passed": a.cube.sidelength >= 1.0}
        if a.kind == "smooth" and a.moment_order >= 0:
            x = g.axis()
            ell = a.cube.sidelength
            moments = []
            for alpha in _monomial_indices(g.n, a.moment_order):
                if g.n == 1:
                    mono = (x - a.cube.center[0]) ** alpha[0]
                else:
                    mono = np.outer((x - a.cube.center[0]) ** alpha[0],
                                    (x - a.cube.center[1]) ** alpha[1])
                resid = abs(float(np.sum(mono * vals) * g.h**g.n))
                tol = 1e-10 * sup * ell ** (sum(alpha) + g.n)
                moments.append({"alpha": alpha, "residual": resid, "tolerance": tol,
                                "passed": resid <= tol})
            checks["moments"] = moments

    def _all_passed(node) -> bool:
        if isinstance(node, dict):
            return all(_all_passed(v) for v in node.values()) and node.get("passed", True)
        if isinstance(node, list):
            return all(_all_passed(v) for v in node)
        return True

    report["passed"] = _all_passed(checks)
    return report


def atom_to_json(a: Atom) -> str:
    """Serialize an atom to a self-describing JSON string (bit exact).

    Parameters
    ----------
    a : Atom
        Atom to serialize; the analytic evaluator is not preserved.

    Returns
    -------
    str
        JSON document with base64-encoded raw samples.
    """
    g = a.data.grid
    arr = np.ascontiguousarray(a.data.values)
    doc = {
        "kind": a.kind,
        "cube": {"center": list(a.cube.center), "sidelength": a.cube.sidelength},
        "grid": {"n": g.n, "L": g.L, "N": g.N},
        "moment_order": a.moment_order,
        "params": {"q": a.params.q, "lam": a.params.lam},
        "dtype": str(arr.dtype),
        "shape": list(arr.shape),
        "values": base64.b64encode(arr.tobytes()).decode("ascii"),
    }
    return json.dumps(doc, sort_keys=True)


def atom_from_json(text: str) -> Atom:
    """Rebuild an atom serialized by :func:`atom_to_json`.

    Parameters
    ----------
    text : str
        JSON document.

    Returns
    -------
    Atom
        The reconstructed atom (without an analytic evaluator).
    """
    doc = json.loads(text)
    g = make_grid(doc["grid"]["n"], doc["grid"]["L"], doc["grid"]["N"])
    raw = base64.b64decode(doc["values"].encode("ascii"))
    vals = np.frombuffer(raw, dtype=np.dtype(doc["dtype"])).reshape(doc["shape"]).copy()
    cube = Cube(tuple(doc["cube"]["center"]), doc["cube"]["sidelength"])
    params = MorreyParams(doc["params"]["q"], doc["params"]["lam"])
    return Atom(doc["kind"], cube, GridFunction(g, vals), doc["moment_order"], params)
