"""Mollification and maximal operators on sampled grids.

``mollify`` realizes ``phi_t * f`` with ``phi_t(x) = t^{-n} phi(x/t)`` as a
zero-padded FFT convolution (always at least double length per axis, so the
circular product equals the linear convolution for supports that fit the
box).  For ``t <= 1`` with ``1/t`` an integer the rescaled kernel is sampled
exactly on the lattice; for integer ``t > 1`` the rescaled kernel is applied
on the frequency side, where the lattice of the padded transform contains
the stretched frequencies exactly.  Smooth, truncated and non-tangential
maximal functions are pointwise maxima of mollifications over a dyadic
scale ladder.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import CubeFamily, GridFunction
from .morrey import MorreyParams, morrey_norm

__all__ = [
    "ScaleLadder",
    "make_ladder",
    "mollify",
    "smooth_maximal",
    "truncated_maximal",
    "nontangential_maximal",
    "hardy_littlewood",
    "hm_norm",
    "hm_local_norm",
    "regularization_check",
]


@dataclass(frozen=True)
class ScaleLadder:
    """Descending dyadic scales ``t = 2^{-j}``, ``j`` running upward.

    A ladder is *truncated* when every scale is ``<= 1``; local norms
    require a truncated ladder.
    """

    scales: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.scales:
            raise ValueError("scale ladder must be nonempty")
        for t in self.scales:
            if not t > 0:
                raise ValueError(f"scales must be positive, got {t}")
            if abs(math.log2(t) - round(math.log2(t))) > 1e-12:
                raise ValueError(f"scales must be powers of two, got {t}")
        if any(a <= b for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly descending")

    @property
    def truncated(self) -> bool:
        return self.scales[0] <= 1.0

    def __iter__(self):
        return iter(self.scales)


def make_ladder(j_lo: int, j_hi: int) -> ScaleLadder:
    """Ladder ``t = 2^{-j}`` for ``j = j_lo .. j_hi`` (descending in t)."""
    if j_hi < j_lo:
        raise ValueError(f"empty ladder range [{j_lo}, {j_hi}]")
    return ScaleLadder(tuple(2.0**-j for j in range(j_lo, j_hi + 1)))


def _as_int(x: float) -> int | None:
    r = round(x)
    return int(r) if abs(x - r) < 1e-9 and r >= 1 else None


def _embed(values: np.ndarray, P: int) -> np.ndarray:
    out = np.zeros((P,) * values.ndim, dtype=complex)
    out[tuple(slice(0, s) for s in values.shape)] = values
    return out


def _kernel_spectrum_subsample(phi: GridFunction, s: int, P: int) -> np.ndarray:
    """FFT of the lattice-sampled kernel ``t^{-n} phi(x/t)`` for ``t = 1/s``.

    ``x_d/t = x-lattice point with index N/2 + d*s``; indices outside the
    grid carry the (compactly supported) kernel's zero tail.
    """
    g = phi.grid
    N = g.N
    d = np.arange(-N, N)
    src = N // 2 + d * s
    valid = (src >= 0) & (src < N)
    k = np.zeros((P,) * g.n, dtype=complex)
    pos = d % P
    if g.n == 1:
        k[pos[valid]] = phi.values[src[valid]]
    else:
        vi = np.ix_(pos[valid], pos[valid])
        k[vi] = phi.values[np.ix_(src[valid], src[valid])]
    return np.fft.fftn(k) * float(s) ** g.n


def _kernel_spectrum_stretch(phi: GridFunction, s: int, P: int) -> np.ndarray:
    """Frequency-side kernel spectrum for integer stretch ``t = s >= 1``.

    Returns ``F[m] = (1/h^n) phihat_sd(t nu_m)`` on the padded index lattice,
    where ``phihat_sd`` is the semidiscrete transform of the sampled ``phi``
    and ``nu_m`` the padded FFT frequencies; stretched frequencies beyond the
    padded Nyquist range are dropped (smooth kernels carry no mass there).
    """
    g = phi.grid
    N = g.N
    F = np.fft.fftn(_embed(phi.values, P))
    w = np.rint(np.fft.fftfreq(P, d=1.0 / P)).astype(np.int64)
    idx = s * w
    valid = np.abs(idx) <= P // 2
    phase1 = np.exp(1j * np.pi * N * s * w / P)
    if g.n == 1:
        vals = np.where(valid, F[idx % P], 0.0) * phase1
        return vals
    gath = F[np.ix_(idx % P, idx % P)]
    mask = valid[:, None] & valid[None, :]
    return np.where(mask, gath, 0.0) * phase1[:, None] * phase1[None, :]


def mollify(f: GridFunction, phi: GridFunction, t: float) -> GridFunction:
    """Convolution ``phi_t * f`` with ``phi_t(x) = t^{-n} phi(x/t)``.

    Parameters
    ----------
    f, phi : GridFunction
        On the same grid; ``phi`` should be supported well inside the box.
    t : float
        Dilation scale; ``t`` or ``1/t`` must be a positive integer (dyadic
        ladders satisfy this), and ``t <= L`` so the stretched kernel's
        linear convolution still fits the padded box.  ``t < h`` is allowed
        but degenerate (the kernel is undersampled) and raises a warning.
    """
    g = f.grid
    if phi.grid != g:
        raise ValueError("f and phi must share a grid")
    if not t > 0:
        raise ValueError(f"scale must be positive, got {t}")
    if t > g.L:
        raise ValueError(f"scale {t} exceeds box half-side {g.L}")
    if t < g.h:
        warnings.warn(
            f"scale t={t} below grid spacing h={g.h}; kernel is undersampled",
            RuntimeWarning,
            stacklevel=2,
        )
    P = 2 * g.N
    s_inv = _as_int(1.0 / t)
    s_dir = _as_int(t)
    if s_inv is not None:
        K = _kernel_spectrum_subsample(phi, s_inv, P)
    elif s_dir is not None:
        K = _kernel_spectrum_stretch(phi, s_dir, P)
    else:
        raise ValueError(f"scale {t} is not lattice-compatible (t or 1/t integer)")
    F = np.fft.fftn(_embed(f.values, P))
    out = np.fft.ifftn(F * K) * g.h**g.n
    out = out[tuple(slice(0, g.N) for _ in range(g.n))]
    if f.values.dtype.kind != "c" and phi.values.dtype.kind != "c":
        out = out.real
    return GridFunction(g, np.ascontiguousarray(out))


def smooth_maximal(f: GridFunction, phi: GridFunction, ladder: ScaleLadder) -> GridFunction:
    """Pointwise maximum of ``|phi_t * f|`` over the ladder scales."""
    acc = None
    for t in ladder:
        m = np.abs(mollify(f, phi, t).values)
        acc = m if acc is None else np.maximum(acc, m)
    return GridFunction(f.grid, acc)


def truncated_maximal(f: GridFunction, phi: GridFunction, ladder: ScaleLadder) -> GridFunction:
    """Maximal function over scales ``t <= 1`` only (local variant)."""
    if not ladder.truncated:
        raise ValueError(
            f"truncated maximal function needs scales <= 1, ladder starts at {ladder.scales[0]}"
        )
    return smooth_maximal(f, phi, ladder)


def _window_halfwidth(t: float, h: float) -> int:
    """Largest integer offset with ``|d|*h < t``."""
    return max(int(math.ceil(t / h)) - 1, 0)


def nontangential_maximal(
    f: GridFunction, phi: GridFunction, ladder: ScaleLadder
) -> GridFunction:
    """Non-tangential maximal function ``sup_{t, |x-y| < t} |phi_t * f(y)|``.

    The inner supremum runs over grid points ``y`` within Euclidean distance
    ``t`` of ``x``; it is realized as a sliding-window maximum.
    """
    g = f.grid
    acc = None
    for t in ladder:
        m = np.abs(mollify(f, phi, t).values)
        w = _window_halfwidth(t, g.h)
        if w > 0:
            if g.n == 1:
                m = ndimage.maximum_filter1d(m, size=2 * w + 1, mode="constant", cval=0.0)
            else:
                d = np.arange(-w, w + 1)
                foot = (d[:, None] ** 2 + d[None, :] ** 2) * g.h**2 < t**2
                m = ndimage.maximum_filter(m, footprint=foot, mode="constant", cval=0.0)
        acc = m if acc is None else np.maximum(acc, m)
    return GridFunction(g, acc)


def hardy_littlewood(f: GridFunction) -> GridFunction:
    """Cube-centered Hardy-Littlewood maximal function.

    Averages of ``|f|`` (extended by zero outside the box) over cubes
    ``[x - l/2, x + l/2)`` with dyadic sidelengths ``l = h, 2h, ..., 2L``,
    maximized pointwise.  The half-open window of even size ``w`` covers
    offsets ``[-w/2, w/2)``, matching the cube convention.
    """
    g = f.grid
    a = np.abs(f.values)
    acc = a.copy()
    w = 2
    while w <= g.N:
        if g.n == 1:
            m = ndimage.uniform_filter1d(a, size=w, mode="constant", cval=0.0)
        else:
            m = ndimage.uniform_filter(a, size=w, mode="constant", cval=0.0)
        np.maximum(acc, m, out=acc)
        w *= 2
    return GridFunction(g, acc)


def _check_unit_mass(phi: GridFunction) -> None:
    g = phi.grid
    total = phi.values.sum() * g.h**g.n
    scale = np.abs(phi.values).sum() * g.h**g.n
    if abs(total) < 1e-12 * max(scale, 1e-300):
        raise ValueError("mollifier has vanishing mean; maximal norms need nonzero mass")


def hm_norm(
    f: GridFunction,
    p: MorreyParams,
    phi: GridFunction,
    ladder: ScaleLadder,
    family: CubeFamily,
) -> float:
    """Hardy-Morrey functional: Morrey norm of the smooth maximal function."""
    _check_unit_mass(phi)
    return morrey_norm(smooth_maximal(f, phi, ladder), p, family)


def hm_local_norm(
    f: GridFunction,
    p: MorreyParams,
    phi: GridFunction,
    ladder: ScaleLadder,
    family: CubeFamily,
) -> float:
    """Local Hardy-Morrey functional: Morrey norm of the truncated maximal function."""
    _check_unit_mass(phi)
    return morrey_norm(truncated_maximal(f, phi, ladder), p, family)


def regularization_check(
    f: GridFunction,
    p: MorreyParams,
    phi: GridFunction,
    t_list,
    gamma_params: MorreyParams,
    family: CubeFamily,
    ladder: ScaleLadder,
) -> dict:
    """Measure the regularization law ``||phi_t * f||_{M^gamma_p} ~ t^{n(1/gamma - 1/lam)}``.

    Requires the exponent pairs to sit on one scaling line
    (``p_fine/gamma == q/lam``) with ``lam <= gamma``.  The reported ratios
    are the mollified Morrey norms divided by ``t^{n(1/gamma - 1/lam)}``
    times the maximal-function norm of ``f``; for functions in the space
    they stay bounded, and the fitted slope of the *un-normalized* norms
    against ``log t`` approaches ``n(1/gamma - 1/lam)`` from above.
    """
    if abs(gamma_params.q / gamma_params.lam - p.q / p.lam) > 1e-12:
        raise ValueError("exponent pairs must satisfy p/gamma == q/lam")
    if gamma_params.lam < p.lam:
        raise ValueError(
            f"regularization needs lam <= gamma, got lam={p.lam}, gamma={gamma_params.lam}"
        )
    t_list = sorted(float(t) for t in t_list)
    if not t_list:
        raise ValueError("need at least one scale")
    n = f.grid.n
    expo = n * (1.0 / gamma_params.lam - 1.0 / p.lam)
    denom = hm_norm(f, p, phi, ladder, family)
    if denom == 0:
        raise ValueError("maximal-function norm of f vanishes")
    norms = [
        morrey_norm(mollify(f, phi, t), gamma_params, family) for t in t_list
    ]
    ratios = [nv / (t**expo * denom) for nv, t in zip(norms, t_list)]
    if len(t_list) >= 2:
        slope = float(
            np.polyfit(np.log(t_list), np.log(np.maximum(norms, 1e-300)), 1)[0]
        )
    else:
        slope = math.nan
    return {
        "scales": t_list,
        "norms": norms,
        "ratios": ratios,
        "max_ratio": float(max(ratios)),
        "expected_exponent": expo,
        "slope": slope,
    }
