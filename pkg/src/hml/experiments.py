"""Named end-to-end experiments with validated configs and persisted results.

Each experiment packages one measurable claim of the toolkit — a scaling
law, a uniform bound, a decay exponent, a boundedness or blow-up trend —
behind a schema-validated configuration.  Running an experiment produces a
:class:`ResultBundle` written to disk as ``results.json`` (full record),
``cases.csv`` (one row per case, byte-identical across runs of the same
config) and one or more ``*.svg`` charts.

Every pass/fail decision in a bundle summary cites the numeric tolerance it
used, so a bundle is self-explaining; re-running the echoed config
reproduces it.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from jsonschema import Draft202012Validator

from .atoms import (
    _smooth_ramp,
    bump_profile,
    dilate_atom,
    global_local_gap,
    make_hkp_atom,
    make_moment_unit,
    make_rough_block,
    make_smooth_atom,
    make_suitable_cutoff,
    project_moments,
    rough_block_decompose,
)
from .atoms import Atom
from .fourier import (
    decay_report,
    dual_grid,
    fourier,
    hardy_inequality_check,
    hkp_closed_form,
    moment_decay_link,
)
from .grid import (
    Cube,
    GridFunction,
    dyadic_family,
    enumerate_dyadic_cubes,
    make_grid,
    sample,
)
from .maximal import hm_local_norm, hm_norm, make_ladder, mollify, regularization_check
from .morrey import MorreyParams, coefficient_norm, morrey_norm
from .psido import (
    _thread_count,
    blowup_experiment,
    japanese_bracket,
    kernel_decay_check,
    kernel_sample,
    modulated_multiplier,
    operator_norm_probe,
    riesz_ratio,
    smooth_multiplier,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultBundle",
    "CONFIG_SCHEMA",
    "validate_config",
    "default_config",
    "list_experiments",
    "describe",
    "run",
]


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

CONFIG_SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment", "seed", "grid", "output_dir"],
    "properties": {
        "experiment": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n", "N", "L"],
            "properties": {
                "n": {"type": "integer", "enum": [1, 2]},
                "N": {"type": "integer", "minimum": 8},
                "L": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "morrey": {
            "type": "object",
            "additionalProperties": False,
            "required": ["q", "lam"],
            "properties": {
                "q": {"type": "number", "exclusiveMinimum": 0},
                "lam": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "family": {
            "type": "object",
            "additionalProperties": False,
            "required": ["j_min", "j_max"],
            "properties": {
                "j_min": {"type": "integer"},
                "j_max": {"type": "integer"},
            },
        },
        "ladder": {
            "type": "object",
            "additionalProperties": False,
            "required": ["j_lo", "j_hi"],
            "properties": {
                "j_lo": {"type": "integer"},
                "j_hi": {"type": "integer"},
            },
        },
        "corpus": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kinds": {
                    "type": "array",
                    "items": {"type": "string", "enum": ["smooth", "rough", "hkp"]},
                    "minItems": 1,
                },
                "scales": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 1,
                },
                "count": {"type": "integer", "minimum": 1},
            },
        },
        "symbol": {"type": "string"},
        "params": {"type": "object"},
        "tolerances": {
            "type": "object",
            "additionalProperties": {"type": "number"},
        },
        "output_dir": {"type": "string", "minLength": 1},
    },
}

_VALIDATOR = Draft202012Validator(CONFIG_SCHEMA)


class ConfigError(ValueError):
    """Invalid experiment configuration; ``errors`` lists every violation."""

    def __init__(self, errors) -> None:
        self.errors = list(errors)
        super().__init__("invalid config: " + "; ".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment configuration.

    ``grid``, ``morrey``, ``family``, ``ladder`` and ``corpus`` are plain
    dicts echoing the input; ``params`` holds experiment-specific knobs and
    ``tolerances`` numeric overrides of the catalog defaults.
    """

    experiment: str
    seed: int
    grid: dict
    output_dir: str
    morrey: Optional[dict] = None
    family: Optional[dict] = None
    ladder: Optional[dict] = None
    corpus: Optional[dict] = None
    symbol: Optional[str] = None
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out: dict = {
            "experiment": self.experiment,
            "seed": self.seed,
            "grid": dict(self.grid),
            "output_dir": self.output_dir,
        }
        for key in ("morrey", "family", "ladder", "corpus"):
            val = getattr(self, key)
            if val is not None:
                out[key] = dict(val)
        if self.symbol is not None:
            out["symbol"] = self.symbol
        if self.params:
            out["params"] = copy.deepcopy(self.params)
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        return out


def validate_config(raw: dict) -> ExperimentConfig:
    """Validate a raw config dict, reporting every violated field at once.

    Schema violations and semantic violations (unknown experiment name,
    ``grid.N`` not a power of two, reversed index ranges, exponents off the
    Morrey scale) are all collected before raising :class:`ConfigError`.
    """
    if not isinstance(raw, dict):
        raise ConfigError(["(root): config must be a JSON object"])
    errors = []
    for err in sorted(_VALIDATOR.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path))):
        path = ".".join(str(p) for p in err.absolute_path) or "(root)"
        errors.append(f"{path}: {err.message}")

    def clean(path) -> bool:
        return not any(e.startswith(path) for e in errors)

    name = raw.get("experiment")
    if clean("experiment") and name not in _CATALOG:
        errors.append(f"experiment: unknown experiment {name!r}")
    grid = raw.get("grid")
    if isinstance(grid, dict) and clean("grid"):
        N = grid["N"]
        if N & (N - 1) != 0:
            errors.append(f"grid.N: {N} is not a power of two")
    mor = raw.get("morrey")
    if isinstance(mor, dict) and clean("morrey") and mor["q"] > mor["lam"]:
        errors.append(f"morrey.q: q={mor['q']} exceeds lam={mor['lam']}")
    for key, lo, hi in (("family", "j_min", "j_max"), ("ladder", "j_lo", "j_hi")):
        block = raw.get(key)
        if isinstance(block, dict) and clean(key) and block[lo] > block[hi]:
            errors.append(f"{key}.{lo}: {block[lo]} exceeds {key}.{hi}={block[hi]}")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        experiment=raw["experiment"],
        seed=raw["seed"],
        grid=dict(raw["grid"]),
        output_dir=raw["output_dir"],
        morrey=dict(mor) if mor else None,
        family=dict(raw["family"]) if raw.get("family") else None,
        ladder=dict(raw["ladder"]) if raw.get("ladder") else None,
        corpus=dict(raw["corpus"]) if raw.get("corpus") else None,
        symbol=raw.get("symbol"),
        params=copy.deepcopy(raw.get("params", {})),
        tolerances=dict(raw.get("tolerances", {})),
    )


# --------------------------------------------------------------------------
# result bundle and serialization
# --------------------------------------------------------------------------


@dataclass
class ResultBundle:
    """Everything one experiment run produced.

    ``cases`` holds one flat record per case (merged by case key),
    ``summary`` the named checks, each citing the tolerance it compared
    against, and ``outputs`` the files written.
    """

    config: dict
    cases: list
    summary: dict
    wall_time: float
    outputs: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("passed", False))

    def to_json(self) -> dict:
        return _jsonable(
            {
                "config": self.config,
                "cases": self.cases,
                "summary": self.summary,
                "wall_time": self.wall_time,
                "outputs": self.outputs,
            }
        )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, cases: list) -> None:
    columns: list = []
    for rec in cases:
        for key in rec:
            if key not in columns:
                columns.append(key)
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rec in cases:
            writer.writerow([_csv_cell(rec.get(col)) for col in columns])


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "hml"
    return plt


def _save_fig(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


# --------------------------------------------------------------------------
# shared runner plumbing
# --------------------------------------------------------------------------


def _check(name: str, value, op: str, tolerance: float) -> dict:
    value = float(value)
    if op == "<=":
        ok = value <= tolerance
    elif op == ">=":
        ok = value >= tolerance
    elif op == "abs<=":
        ok = abs(value) <= tolerance
    else:  # pragma: no cover - guarded by the fixed call sites
        raise ValueError(f"unknown comparison {op!r}")
    return {
        "check": name,
        "value": value,
        "op": op,
        "tolerance": float(tolerance),
        "passed": bool(ok),
    }


def _case_map(fn: Callable, items: list) -> list:
    """Run ``fn`` over keyed payloads, converting exceptions to records.

    ``items`` is a list of ``(key, payload)``; the output preserves input
    order, so parallel execution cannot change the merged result.
    """

    def run_one(item):
        key, payload = item
        try:
            rec = dict(fn(payload))
        except Exception as exc:
            return {"case": key, "failed": True, "error": f"{type(exc).__name__}: {exc}"}
        out = {"case": key, "failed": False}
        out.update(rec)
        return out

    workers = _thread_count()
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_one, items))
    return [run_one(it) for it in items]


def _failure_checks(cases: list) -> list:
    bad = sum(1 for c in cases if c.get("failed"))
    return [_check("case_failures", bad, "<=", 0)]


def _ok(cases: list) -> list:
    return [c for c in cases if not c.get("failed")]


def _agg(values, reducer, default=math.nan) -> float:
    vals = [float(v) for v in values]
    return float(reducer(vals)) if vals else default


def _grid_of(cfg: ExperimentConfig):
    return make_grid(cfg.grid["n"], cfg.grid["L"], cfg.grid["N"])


def _morrey_of(cfg: ExperimentConfig) -> MorreyParams:
    return MorreyParams(cfg.morrey["q"], cfg.morrey["lam"])


def _family_of(cfg: ExperimentConfig, g):
    return dyadic_family(g, cfg.family["j_min"], cfg.family["j_max"])


def _ladder_of(cfg: ExperimentConfig):
    return make_ladder(cfg.ladder["j_lo"], cfg.ladder["j_hi"])


def _tol(cfg: ExperimentConfig, key: str) -> float:
    if key in cfg.tolerances:
        return float(cfg.tolerances[key])
    return float(_CATALOG[cfg.experiment].tolerances[key])


def _loglog_slope(xs, ys) -> float:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2 or np.any(ys <= 0):
        return math.nan
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _plateau(g) -> GridFunction:
    """Cutoff that is identically one on the half-box and falls smoothly."""
    r = np.sqrt(sum(c**2 for c in np.meshgrid(*[g.axis()] * g.n, indexing="ij"))) \
        if g.n == 2 else np.abs(g.axis())
    return GridFunction(g, _smooth_ramp((0.75 * g.L - r) / (0.25 * g.L)))


def _oscillatory_corpus(g, p: MorreyParams, scales, phases, waves: float) -> list:
    """Moment-free cosine-bump atoms whose band scales like 1/sidelength."""
    x = g.axis()
    atoms = []
    for ell in scales:
        for theta in phases:
            Q = Cube((0.0,) * g.n, float(ell))
            u = (x - Q.center[0]) / ell
            vals = bump_profile(u / 0.475) * np.cos(2.0 * np.pi * waves * u + theta)
            f = project_moments(GridFunction(g, vals), Q, 0)
            sup = float(np.max(np.abs(f.values)))
            scale = Q.volume ** (-1.0 / p.lam) / sup
            atoms.append(Atom("smooth", Q, GridFunction(g, f.values * scale), 0, p))
    return atoms


# --------------------------------------------------------------------------
# runners
# --------------------------------------------------------------------------


def _run_morrey_scaling(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    if g.n != 1:
        raise ConfigError(["grid.n: morrey-scaling is one-dimensional"])
    p = _morrey_of(cfg)
    fam = _family_of(cfg, g)
    lad = _ladder_of(cfg)
    phi = make_suitable_cutoff(g)
    width = float(cfg.params.get("width", 0.5))
    Rs = [float(r) for r in cfg.params.get("R", [2.0, 4.0])]
    expo = -g.n / p.lam
    base = sample(g, lambda x: bump_profile(x / width))
    m0 = morrey_norm(base, p, fam)
    h0 = hm_norm(base, p, phi, lad, fam)

    def one(R):
        fR = sample(g, lambda x: bump_profile(R * x / width))
        rm = morrey_norm(fR, p, fam) / m0
        rh = hm_norm(fR, p, phi, lad, fam) / h0
        expected = R**expo
        return {
            "R": R,
            "expected_ratio": expected,
            "morrey_ratio": rm,
            "hm_ratio": rh,
            "morrey_rel_err": abs(rm / expected - 1.0),
            "hm_rel_err": abs(rh / expected - 1.0),
        }

    cases = _case_map(one, [(f"R={R:g}", R) for R in Rs])
    ok = _ok(cases)
    worst = _agg(
        [max(c["morrey_rel_err"], c["hm_rel_err"]) for c in ok], max
    )
    checks = [_check("scaling_rel_err", worst, "<=", _tol(cfg, "rel_err"))]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    if ok:
        rs = [c["R"] for c in ok]
        ax.loglog(rs, [c["morrey_ratio"] for c in ok], "o-", label="Morrey ratio")
        ax.loglog(rs, [c["hm_ratio"] for c in ok], "s-", label="maximal ratio")
        ax.loglog(rs, [c["expected_ratio"] for c in ok], "k--", label=f"R^{expo:g}")
    ax.set_xlabel("R")
    ax.set_ylabel("norm ratio")
    ax.legend()
    fig.tight_layout()
    return cases, checks, [("scaling.svg", fig)]


def _run_atom_uniform_bound(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    p = _morrey_of(cfg)
    fam = _family_of(cfg, g)
    lad = _ladder_of(cfg)
    phi = make_suitable_cutoff(g)
    scales = [float(s) for s in (cfg.corpus or {}).get("scales", [2.0**-j for j in range(4, -1, -1)])]
    count = int((cfg.corpus or {}).get("count", 50))
    block_scales = [float(s) for s in cfg.params.get("block_scales", [1.0, 2.0, 4.0])]
    block_count = int(cfg.params.get("block_count", 10))
    rng = np.random.default_rng(cfg.seed)
    specs = []
    for i in range(count):
        ell = scales[i % len(scales)]
        jitter = min(1.0, max(g.L - ell, 0.0))
        c = float(rng.uniform(-jitter, jitter))
        specs.append((f"smooth-{i:02d}", ("smooth", ell, c, int(rng.integers(0, 2**31 - 1)))))
    for i in range(block_count):
        ell = block_scales[i % len(block_scales)]
        specs.append((f"rough-{i:02d}", ("rough", ell, 0.0, int(rng.integers(0, 2**31 - 1)))))

    def one(spec):
        kind, ell, c, seed = spec
        Q = Cube((c,) * g.n, ell)
        a = (
            make_smooth_atom(p, Q, seed, g)
            if kind == "smooth"
            else make_rough_block(p, Q, seed, g)
        )
        return {
            "kind": kind,
            "sidelength": ell,
            "norm": hm_local_norm(a.data, p, phi, lad, fam),
        }

    cases = _case_map(one, specs)
    ok = _ok(cases)
    norms = [c["norm"] for c in ok]
    band = max(norms) / min(norms) if norms and min(norms) > 0 else math.nan
    checks = [_check("band_max_over_min", band, "<=", _tol(cfg, "band"))]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    for kind, marker in (("smooth", "o"), ("rough", "s")):
        sel = [c for c in ok if c["kind"] == kind]
        if sel:
            ax.semilogx(
                [c["sidelength"] for c in sel], [c["norm"] for c in sel],
                marker, linestyle="none", label=kind,
            )
    ax.set_xlabel("sidelength")
    ax.set_ylabel("local maximal norm")
    ax.legend()
    fig.tight_layout()
    return cases, checks, [("uniform-bound.svg", fig)]


def _run_decay_homogeneous(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    p = _morrey_of(cfg)
    expo = g.n * (1.0 / p.lam - 1.0)
    scales = [float(s) for s in (cfg.corpus or {}).get("scales", [0.25, 0.5, 1.0])]
    count = int((cfg.corpus or {}).get("count", 6))
    rng = np.random.default_rng(cfg.seed)
    specs = []
    for i in range(count):
        ell = scales[i % len(scales)]
        c = float(rng.uniform(-1.0, 1.0))
        specs.append((f"atom-{i:02d}", (ell, c, int(rng.integers(0, 2**31 - 1)))))

    reports = {}

    def one(spec):
        ell, c, seed = spec
        a = make_smooth_atom(p, Cube((c,) * g.n, ell), seed, g)
        rep = decay_report(a.data, p, weight="homogeneous")
        reports[f"{ell}:{seed}"] = rep
        return {
            "kind": "atom",
            "sidelength": ell,
            "slope": rep.slope,
            "C": rep.C,
            "flagged": rep.flag_violation,
        }

    cases = _case_map(one, specs)
    block = make_rough_block(p, Cube((0.0,) * g.n, 1.0), cfg.seed, g)
    ctrl = decay_report(block.data, p, weight="homogeneous")
    cases.append(
        {
            "case": "control-block",
            "failed": False,
            "kind": "control",
            "sidelength": 1.0,
            "slope": ctrl.slope,
            "C": ctrl.C,
            "flagged": ctrl.flag_violation,
        }
    )
    ok = [c for c in _ok(cases) if c["kind"] == "atom"]
    min_slope = _agg([c["slope"] for c in ok], min)
    max_C = _agg([c["C"] for c in ok], max)
    flagged_atoms = sum(1 for c in ok if c["flagged"])
    margin = _tol(cfg, "slope_margin")
    checks = [
        _check("min_atom_slope", min_slope, ">=", expo - margin),
        _check("max_constant", max_C, "<=", _tol(cfg, "C_max")),
        _check("atoms_flagged", flagged_atoms, "<=", 0),
        _check("control_flagged", 1.0 if ctrl.flag_violation else 0.0, ">=", 1.0),
    ]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))

    def curve(rep):
        pts = [(math.sqrt(lo * hi), s) for lo, hi, s in rep.annuli if s > 0]
        return [m for m, _ in pts], [s for _, s in pts]

    for key, rep in sorted(reports.items()):
        mids, sups = curve(rep)
        ax.loglog(mids, sups, "-", alpha=0.6)
    mids, sups = curve(ctrl)
    ax.loglog(mids, sups, "k--", label="mean-carrying control")
    ax.set_xlabel("|xi|")
    ax.set_ylabel("annulus sup |fhat|")
    ax.legend()
    fig.tight_layout()
    return cases, checks, [("decay-homogeneous.svg", fig)]


def _run_decay_local(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    if g.n != 1:
        raise ConfigError(["grid.n: decay-local is one-dimensional"])
    lam = float(cfg.params.get("lam", 2.0))
    k = int(cfg.params.get("k", 1))
    j = int(cfg.params.get("j", 1))
    eps_list = [float(e) for e in cfg.params.get("eps", [1.0, 2.0, 4.0, 8.0])]
    expo = g.n * (1.0 - 1.0 / lam)
    base = make_hkp_atom(k, lam, g)

    def one(eps):
        a = dilate_atom(base, eps)
        xi = 1.0 / (4.0 * j * eps)
        pos = xi * 2.0 * g.L
        if abs(pos - round(pos)) > 1e-9:
            raise ValueError(f"probe frequency {xi} is not on the lattice")
        idx = g.N // 2 + int(round(pos))
        S = fourier(a.data)
        measured = float(np.abs(S.values[idx]))
        ref = float(np.abs(hkp_closed_form(k, lam, eps, np.array([xi]))[0]))
        return {
            "eps": eps,
            "xi": xi,
            "measured": measured,
            "closed_form": ref,
            "rel_dev": abs(measured / ref - 1.0) if ref > 0 else math.nan,
        }

    cases = _case_map(one, [(f"eps={e:g}", e) for e in eps_list])
    ok = _ok(cases)
    slope = _loglog_slope([c["eps"] for c in ok], [c["measured"] for c in ok])
    rel = abs(slope / expo - 1.0) if expo != 0 else abs(slope)
    checks = [
        _check("slope_rel_dev", rel, "<=", _tol(cfg, "slope_rel")),
        _check(
            "closed_form_rel_dev",
            _agg([c["rel_dev"] for c in ok], max),
            "<=",
            _tol(cfg, "formula_rel"),
        ),
    ]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    if ok:
        es = [c["eps"] for c in ok]
        ax.loglog(es, [c["measured"] for c in ok], "o-", label="measured |ahat_eps|")
        anchor = ok[0]["measured"] / ok[0]["eps"] ** expo
        ax.loglog(es, [anchor * e**expo for e in es], "k--", label=f"eps^{expo:g}")
    ax.set_xlabel("eps")
    ax.set_ylabel("|ahat_eps(1/(4 eps))|")
    ax.legend()
    fig.tight_layout()
    return cases, checks, [("decay-local.svg", fig)]


def _run_hkp_closedform(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    lam = float(cfg.params.get("lam", 0.8))
    ks = [int(k) for k in cfg.params.get("k", [1, 2, 3])]
    eps_list = [float(e) for e in cfg.params.get("eps", [1.0, 2.0])]
    xi = dual_grid(g).axis()
    paired = np.ones(g.N, dtype=bool)
    paired[0] = False

    def one(pair):
        k, eps = pair
        a = make_hkp_atom(k, lam, g)
        ae = dilate_atom(a, eps)
        spec = fourier(ae.data).values
        ref = hkp_closed_form(k, lam, eps, xi)
        err = float(np.max(np.abs(spec[paired] - ref[paired])))
        peak = float(np.max(np.abs(ref[paired])))
        return {"k": k, "eps": eps, "max_rel_err": err / peak}

    items = [(f"k={k} eps={e:g}", (k, e)) for k in ks for e in eps_list]
    cases = _case_map(one, items)
    ok = _ok(cases)
    worst = _agg([c["max_rel_err"] for c in ok], max)
    checks = [_check("max_rel_err", worst, "<=", _tol(cfg, "rel_err"))]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    if ok:
        labels = [c["case"] for c in ok]
        ax.bar(range(len(ok)), [max(c["max_rel_err"], 1e-18) for c in ok])
        ax.set_xticks(range(len(ok)), labels, rotation=45, ha="right")
        ax.set_yscale("log")
    ax.set_ylabel("max relative FFT error")
    fig.tight_layout()
    return cases, checks, [("hkp-closedform.svg", fig)]


def _run_moment_necessity(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    p = _morrey_of(cfg)
    scales = [float(s) for s in (cfg.corpus or {}).get("scales", [0.5, 1.0])]
    rng = np.random.default_rng(cfg.seed)
    specs = []
    for i, ell in enumerate(scales):
        for _ in range(2):
            c = float(rng.uniform(-1.0, 1.0))
            specs.append(
                (f"atom-{len(specs):02d}", ("atom", ell, c, int(rng.integers(0, 2**31 - 1))))
            )
    specs.append(("control-block", ("control", 1.0, 0.0, cfg.seed)))

    def one(spec):
        kind, ell, c, seed = spec
        if kind == "atom":
            a = make_smooth_atom(p, Cube((c,) * g.n, ell), seed, g)
        else:
            a = make_rough_block(p, Cube((c,) * g.n, ell), seed, g)
        rep = moment_decay_link(a.data, p.lam)
        order0 = next(r for r in rep["orders"] if sum(r["alpha"]) == 0)
        return {
            "kind": kind,
            "sidelength": ell,
            "max_order": rep["max_order"],
            "passed_link": rep["pass"],
            "order0_abs": abs(order0["estimate"]),
        }

    cases = _case_map(one, specs)
    ok = _ok(cases)
    atom_fail = sum(1 for c in ok if c["kind"] == "atom" and not c["passed_link"])
    ctrl_pass = sum(1 for c in ok if c["kind"] == "control" and c["passed_link"])
    checks = [
        _check("atom_link_failures", atom_fail, "<=", 0),
        _check("control_link_passes", ctrl_pass, "<=", 0),
    ]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    if ok:
        ax.bar(range(len(ok)), [max(c["order0_abs"], 1e-18) for c in ok])
        ax.set_xticks(range(len(ok)), [c["case"] for c in ok], rotation=45, ha="right")
        ax.set_yscale("log")
    ax.set_ylabel("|fhat(0)|")
    fig.tight_layout()
    return cases, checks, [("moment-necessity.svg", fig)]


def _run_blockdecomp_roundtrip(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    if g.n != 1:
        raise ConfigError(["grid.n: blockdecomp-roundtrip is one-dimensional"])
    p = _morrey_of(cfg)
    fam = _family_of(cfg, g)
    lad = _ladder_of(cfg)
    psi = make_moment_unit(g, 1.0)
    count = int((cfg.corpus or {}).get("count", 20))
    rng = np.random.default_rng(cfg.seed)
    unit_cubes = enumerate_dyadic_cubes(g, 0, 0)
    x = g.axis()
    payloads = []
    for i in range(count):
        amp = rng.normal(size=3)
        pos = rng.uniform(-g.L / 2, g.L / 2, size=2)
        freq = rng.uniform(1.0, 5.0)
        payloads.append((f"func-{i:02d}", (amp, pos, freq)))

    def one(payload):
        amp, pos, freq = payload
        vals = (
            amp[0] * np.exp(-np.pi * x**2)
            + amp[1] * np.exp(-3.0 * (x - pos[0]) ** 2) * np.sin(freq * x)
            + amp[2] * np.exp(-5.0 * (x - pos[1]) ** 2)
        )
        f = GridFunction(g, vals)
        coeffs, blocks = rough_block_decompose(f, psi, p, lad)
        recon = np.zeros(g.shape)
        for dq, a in zip(unit_cubes, blocks):
            recon += complex(coeffs[dq]).real * a.data.values
        target = mollify(f, psi, 1.0).values
        sup = float(np.max(np.abs(vals)))
        recon_rel = float(np.max(np.abs(recon - target))) / sup
        cn = coefficient_norm(coeffs, p, unit_cubes)
        hn = hm_local_norm(f, p, psi, lad, fam)
        return {
            "recon_rel_err": recon_rel,
            "coeff_norm": cn,
            "local_norm": hn,
            "coeff_over_local": cn / hn if hn > 0 else math.nan,
        }

    cases = _case_map(one, payloads)
    ok = _ok(cases)
    checks = [
        _check(
            "max_recon_rel_err",
            _agg([c["recon_rel_err"] for c in ok], max),
            "<=",
            _tol(cfg, "recon_rel"),
        ),
        _check(
            "max_coeff_over_local",
            _agg([c["coeff_over_local"] for c in ok], max),
            "<=",
            _tol(cfg, "coeff_constant"),
        ),
    ]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    if ok:
        hs = [c["local_norm"] for c in ok]
        cs = [c["coeff_norm"] for c in ok]
        ax.plot(hs, cs, "o", label="corpus")
        C = _tol(cfg, "coeff_constant")
        span = [min(hs), max(hs)]
        ax.plot(span, [C * s for s in span], "k--", label=f"{C:g} x local norm")
    ax.set_xlabel("local maximal norm")
    ax.set_ylabel("coefficient norm")
    ax.legend()
    fig.tight_layout()
    return cases, checks, [("blockdecomp.svg", fig)]


def _run_psido_bounded(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    if g.n != 1:
        raise ConfigError(["grid.n: psido-bounded is one-dimensional"])
    p = _morrey_of(cfg)
    phi = make_suitable_cutoff(g)
    fam = _family_of(cfg, g)
    lad = _ladder_of(cfg)
    scales = [float(s) for s in (cfg.corpus or {}).get("scales", [0.0625, 0.125, 0.25, 0.5, 1.0, 2.0])]
    phases = [float(t) for t in cfg.params.get("phases", [0.0, 1.1])]
    waves = float(cfg.params.get("waves", 4.0))
    corpus = _oscillatory_corpus(g, p, scales, phases, waves)

    ident = operator_norm_probe(japanese_bracket(0.0), p, corpus, phi, lad, fam)
    modulated = operator_norm_probe(
        modulated_multiplier(_plateau(g), 1), p, corpus, phi, lad, fam
    )

    x = g.axis()
    t = x / (g.L / 2.0)
    vals = np.zeros(g.N)
    inside = np.abs(t) < 1
    vals[inside] = np.exp(1.0 / (t[inside] ** 2 - 1.0) + 1.0) * np.sin(np.pi * x[inside])
    destroyer = smooth_multiplier(GridFunction(g, vals))
    control_corpus = [
        make_smooth_atom(p, Cube((0.0,), ell), seed, g)
        for ell in scales
        for seed in (0, 1)
    ]
    control = operator_norm_probe(
        destroyer, p, control_corpus, phi,
        make_ladder(cfg.ladder["j_lo"] - 2, cfg.ladder["j_hi"]), fam, local=False,
    )

    cases = []
    for probe, rep in (("identity", ident), ("modulated", modulated), ("moment-destroyer", control)):
        for side, ratio in zip(rep["sidelengths"], rep["ratios"]):
            cases.append(
                {
                    "case": f"{probe} ell={side:g} #{len(cases):02d}",
                    "failed": False,
                    "probe": probe,
                    "sidelength": side,
                    "ratio": ratio,
                }
            )
    checks = [
        _check(
            "identity_ratio_dev",
            max(abs(r - 1.0) for r in ident["ratios"]),
            "<=",
            _tol(cfg, "identity_dev"),
        ),
        _check("modulated_trend", modulated["trend_slope"], "abs<=", _tol(cfg, "trend_abs")),
        _check(
            "modulated_flagged", 1.0 if modulated["growth_flagged"] else 0.0, "<=", 0.0
        ),
        _check("control_trend", control["trend_slope"], ">=", _tol(cfg, "control_trend")),
    ]

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    for probe, rep, style in (
        ("modulated", modulated, "o-"),
        ("moment-destroyer", control, "s--"),
    ):
        order = np.argsort(rep["sidelengths"])
        ax.loglog(
            np.asarray(rep["sidelengths"])[order],
            np.asarray(rep["ratios"])[order],
            style,
            label=f"{probe} (trend {rep['trend_slope']:+.2f})",
        )
    ax.set_xlabel("sidelength")
    ax.set_ylabel("norm ratio")
    ax.legend()
    fig.tight_layout()
    return cases, checks, [("psido-bounded.svg", fig)]


def _run_psido_blowup(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    m = float(cfg.params.get("m", 0.5))
    k = int(cfg.params.get("k", 2))
    lam = float(cfg.params.get("lam", 1.0))
    eps_list = [float(e) for e in cfg.params.get("eps", [1.0, 0.5, 0.25])]
    rep = blowup_experiment(m, k, lam, eps_list, g=g)
    ctrl = blowup_experiment(0.0, k, lam, eps_list, g=g)
    cases = []
    for e, bound, meas, cmeas in zip(rep["eps"], rep["bounds"], rep["measured"], ctrl["measured"]):
        cases.append(
            {
                "case": f"eps={e:g}",
                "failed": False,
                "eps": float(e),
                "bound": bound,
                "measured": meas,
                "control_measured": cmeas,
            }
        )
    ratio_dev = max(
        abs(r - x) for r, x in zip(rep["bound_ratios"], rep["expected_ratio"])
    )
    checks = [
        _check("bound_slope_dev", abs(rep["bound_slope"] + m), "<=", _tol(cfg, "bound_tol")),
        _check("bound_ratio_dev", ratio_dev, "<=", _tol(cfg, "bound_tol")),
        _check("measured_slope", rep["measured_slope"], "<=", -m + _tol(cfg, "slope_margin")),
        _check("control_slope", ctrl["measured_slope"], ">=", -_tol(cfg, "control_margin")),
    ]

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    es = [c["eps"] for c in cases]
    ax.loglog(es, [c["bound"] for c in cases], "k--", label=f"lower bound (slope {rep['bound_slope']:+.3f})")
    ax.loglog(es, [c["measured"] for c in cases], "o-", label=f"measured (slope {rep['measured_slope']:+.3f})")
    ax.loglog(es, [c["control_measured"] for c in cases], "s:", label=f"m=0 control (slope {ctrl['measured_slope']:+.3f})")
    ax.set_xlabel("eps")
    ax.set_ylabel("norm / bound")
    ax.legend()
    fig.tight_layout()
    return cases, checks, [("psido-blowup.svg", fig)]


def _run_kernel_decay(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    if g.n != 1:
        raise ConfigError(["grid.n: kernel-decay is one-dimensional"])
    zs = np.geomspace(0.25, 2.0, int(cfg.params.get("pairs", 9)))
    pairs = [(float(z), 0.0) for z in zs]
    symbols = {
        "rieszratio": riesz_ratio(1),
        "modmult": modulated_multiplier(_plateau(g), 1),
    }
    cases = []
    slope_checks = []
    drift_vals = []
    for name, sym in sorted(symbols.items()):
        s1 = kernel_sample(sym, g, pairs)
        s2 = kernel_sample(sym, g, pairs, eps=s1.eps / 2.0)
        repd = kernel_decay_check(s1, M=0, m=0.0, rho=1.0, window=(0.25, 2.0))
        # Stabilization under halving the regularization, measured beyond
        # the smearing scale: pairs closer than ~8 eps still feel the taper
        # width directly, while far pairs must already sit at the limit.
        far = s1.resolved & s2.resolved & (s1.separations() >= 8.0 * s1.eps)
        drift = (
            float(np.max(np.abs(s2.values[far] - s1.values[far]))
                  / np.max(np.abs(s1.values[far])))
            if far.any()
            else math.nan
        )
        drift_vals.append(drift)
        slope_checks.append((name, repd["slope"]))
        for z, v, ok_pair in zip(zs, s1.values, s1.resolved):
            cases.append(
                {
                    "case": f"{name} z={z:.4f}",
                    "failed": False,
                    "probe": name,
                    "separation": float(z),
                    "abs_kernel": float(np.abs(v)),
                    "resolved": bool(ok_pair),
                }
            )

    bg = make_grid(1, float(cfg.params.get("bessel_L", 8.0)), int(cfg.params.get("bessel_N", 1024)))
    bzs = [0.125, 0.25, 0.375, 0.5, 0.625, 0.75]
    bsample = kernel_sample(
        japanese_bracket(-2.0), bg, [(z, 0.0) for z in bzs], eps=1.0 / 16.0
    )
    bref = np.pi * np.exp(-2.0 * np.pi * np.asarray(bzs))
    bessel_rel = float(np.max(np.abs(np.abs(bsample.values) - bref) / bref))
    for z, v, r in zip(bzs, np.abs(bsample.values), bref):
        cases.append(
            {
                "case": f"bessel z={z:.4f}",
                "failed": False,
                "probe": "bessel",
                "separation": float(z),
                "abs_kernel": float(v),
                "closed_form": float(r),
            }
        )

    bound = -(g.n) + _tol(cfg, "slope_margin")
    checks = [
        _check(f"{name}_slope", slope, "<=", bound) for name, slope in slope_checks
    ]
    checks += [
        _check("bessel_rel_err", bessel_rel, "<=", _tol(cfg, "bessel_rel")),
        _check("eps_halving_drift", _agg(drift_vals, max), "<=", _tol(cfg, "eps_drift")),
    ]

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    for name in sorted(symbols):
        sel = [c for c in cases if c["probe"] == name]
        ax.loglog(
            [c["separation"] for c in sel], [max(c["abs_kernel"], 1e-18) for c in sel],
            "o-", label=name,
        )
    sel = [c for c in cases if c["probe"] == "bessel"]
    ax.loglog([c["separation"] for c in sel], [c["abs_kernel"] for c in sel], "s-", label="<xi>^-2")
    ax.loglog([c["separation"] for c in sel], [c["closed_form"] for c in sel], "k--", label="pi exp(-2 pi z)")
    ax.set_xlabel("|x - y|")
    ax.set_ylabel("|K(x, y)|")
    ax.legend()
    fig.tight_layout()
    return cases, checks, [("kernel-decay.svg", fig)]


def _run_hardy_inequality(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    p = _morrey_of(cfg)
    fam = _family_of(cfg, g)
    lad = _ladder_of(cfg)
    phi = make_suitable_cutoff(g)
    freq_span = cfg.params.get("freq_family", {"j_min": -3, "j_max": 3})
    freq_fam = dyadic_family(dual_grid(g), int(freq_span["j_min"]), int(freq_span["j_max"]))
    scales = [float(s) for s in (cfg.corpus or {}).get("scales", [0.5, 1.0])]
    rng = np.random.default_rng(cfg.seed)
    specs = []
    for i, ell in enumerate(scales):
        for _ in range(2):
            c = float(rng.uniform(-1.0, 1.0))
            specs.append((f"atom-{len(specs):02d}", (ell, c, int(rng.integers(0, 2**31 - 1)))))

    def one(spec):
        ell, c, seed = spec
        a = make_smooth_atom(p, Cube((c,) * g.n, ell), seed, g)
        rep = hardy_inequality_check(a.data, p, freq_fam, phi, lad, fam)
        return {"sidelength": ell, "ratio": rep["ratio"], "numerator": rep["numerator"]}

    cases = _case_map(one, specs)
    ok = _ok(cases)
    worst = _agg([c["ratio"] for c in ok], max)
    checks = [_check("max_ratio", worst, "<=", _tol(cfg, "max_ratio"))]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    if ok:
        ax.bar(range(len(ok)), [c["ratio"] for c in ok])
        ax.set_xticks(range(len(ok)), [c["case"] for c in ok], rotation=45, ha="right")
    ax.set_ylabel("weighted-spectrum / maximal norm")
    fig.tight_layout()
    return cases, checks, [("hardy-inequality.svg", fig)]


def _run_global_local_gap(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    if g.n != 1:
        raise ConfigError(["grid.n: global-local-gap is one-dimensional"])
    p = _morrey_of(cfg)
    fam = _family_of(cfg, g)
    lad = _ladder_of(cfg)
    psi = make_moment_unit(g, 1.0)
    count = int((cfg.corpus or {}).get("count", 4))
    rng = np.random.default_rng(cfg.seed)
    x = g.axis()
    specs = []
    for i in range(count):
        amp = rng.normal(size=2)
        pos = float(rng.uniform(-1.0, 1.0))
        freq = float(rng.uniform(2.0, 5.0))
        specs.append((f"func-{i:02d}", (amp, pos, freq)))

    def one(spec):
        amp, pos, freq = spec
        vals = amp[0] * np.exp(-np.pi * (x - pos) ** 2) * np.cos(freq * x) + amp[
            1
        ] * np.exp(-2.0 * (x + pos) ** 2)
        f = GridFunction(g, vals)
        return {"gap": global_local_gap(f, psi, p, lad, fam)}

    cases = _case_map(one, specs)
    ok = _ok(cases)
    worst = _agg([c["gap"] for c in ok], max)
    checks = [_check("max_gap", worst, "<=", _tol(cfg, "max_gap"))]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    if ok:
        ax.bar(range(len(ok)), [c["gap"] for c in ok])
        ax.set_xticks(range(len(ok)), [c["case"] for c in ok], rotation=45, ha="right")
    ax.set_ylabel("global defect / local norm")
    fig.tight_layout()
    return cases, checks, [("global-local-gap.svg", fig)]


def _run_regularization(cfg: ExperimentConfig):
    g = _grid_of(cfg)
    if g.n != 1:
        raise ConfigError(["grid.n: regularization is one-dimensional"])
    p = _morrey_of(cfg)
    gp = cfg.params.get("gamma", {"q": 2.0, "lam": 2.0})
    gamma = MorreyParams(float(gp["q"]), float(gp["lam"]))
    fam = _family_of(cfg, g)
    lad = _ladder_of(cfg)
    phi = make_suitable_cutoff(g)
    t_list = [float(t) for t in cfg.params.get("t", [2.0**-j for j in range(0, 7)])]
    widths = [float(w) for w in cfg.params.get("widths", [0.25, 0.5])]

    def one(width):
        f = sample(g, lambda x: bump_profile(x / width))
        rep = regularization_check(f, p, phi, t_list, gamma, fam, lad)
        return {
            "width": width,
            "slope": rep["slope"],
            "expected_exponent": rep["expected_exponent"],
            "max_ratio": rep["max_ratio"],
        }

    cases = _case_map(one, [(f"width={w:g}", w) for w in widths])
    ok = _ok(cases)
    expo = g.n * (1.0 / gamma.lam - 1.0 / p.lam)
    min_slope = _agg([c["slope"] for c in ok], min)
    checks = [
        _check("min_slope", min_slope, ">=", expo - _tol(cfg, "slope_margin")),
        _check("max_ratio", _agg([c["max_ratio"] for c in ok], max), "<=", _tol(cfg, "max_ratio")),
    ]
    checks += _failure_checks(cases)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    for w in widths:
        f = sample(g, lambda x: bump_profile(x / w))
        norms = [morrey_norm(mollify(f, phi, t), gamma, fam) for t in t_list]
        ax.loglog(t_list, norms, "o-", label=f"width {w:g}")
    anchor = None
    if ok:
        f = sample(g, lambda x: bump_profile(x / widths[0]))
        anchor = morrey_norm(mollify(f, phi, t_list[0]), gamma, fam)
        ax.loglog(t_list, [anchor * (t / t_list[0]) ** expo for t in t_list], "k--",
                  label=f"t^{expo:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("mollified Morrey norm")
    ax.legend()
    fig.tight_layout()
    return cases, checks, [("regularization.svg", fig)]


# --------------------------------------------------------------------------
# catalog
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _CatalogEntry:
    runner: Callable
    claim: str
    defaults: dict
    tolerances: dict


def _cfg(name: str, **kwargs) -> dict:
    base = {"experiment": name, "seed": 7, "output_dir": f"hml-out/{name}"}
    base.update(kwargs)
    return base


_CATALOG: dict = {
    "morrey-scaling": _CatalogEntry(
        _run_morrey_scaling,
        "Dilation acts on the Morrey and maximal-function norms by the exact "
        "factor R^(-n/lam): compressing a fixed profile by R scales both "
        "norms by R^(-n/lam) within the stated tolerance.",
        _cfg(
            "morrey-scaling",
            grid={"n": 1, "N": 1024, "L": 4.0},
            morrey={"q": 1.0, "lam": 2.0},
            family={"j_min": -2, "j_max": 7},
            ladder={"j_lo": -2, "j_hi": 7},
            params={"R": [2.0, 4.0], "width": 0.5},
        ),
        {"rel_err": 0.02},
    ),
    "atom-uniform-bound": _CatalogEntry(
        _run_atom_uniform_bound,
        "All normalized atoms and blocks are uniformly bounded in the local "
        "maximal-function norm: over a mixed corpus of smooth atoms and "
        "rough blocks the measured norms lie in a band of bounded ratio.",
        _cfg(
            "atom-uniform-bound",
            grid={"n": 1, "N": 1024, "L": 4.0},
            morrey={"q": 2.0 / 3.0, "lam": 2.0 / 3.0},
            family={"j_min": -2, "j_max": 5},
            ladder={"j_lo": 0, "j_hi": 5},
            corpus={"kinds": ["smooth", "rough"], "scales": [0.0625, 0.125, 0.25, 0.5, 1.0], "count": 50},
            params={"block_scales": [1.0, 2.0, 4.0], "block_count": 10},
        ),
        {"band": 10.0},
    ),
    "decay-homogeneous": _CatalogEntry(
        _run_decay_homogeneous,
        "For q = lam <= 1 vanishing moments force |fhat(xi)| <= C "
        "|xi|^(n(1/lam-1)) at low frequency: the fitted sup-annulus slope "
        "meets the exponent, the constant stays finite, and a mean-carrying "
        "block fails the same check.",
        _cfg(
            "decay-homogeneous",
            grid={"n": 1, "N": 2048, "L": 16.0},
            morrey={"q": 2.0 / 3.0, "lam": 2.0 / 3.0},
            corpus={"kinds": ["smooth"], "scales": [0.25, 0.5, 1.0], "count": 6},
        ),
        {"slope_margin": 0.1, "C_max": 1.0e6},
    ),
    "decay-local": _CatalogEntry(
        _run_decay_local,
        "For lam > 1 no moments are needed and the dilated oscillating atom "
        "obeys |ahat_eps(1/(4 eps))| ~ eps^(n(1-1/lam)): the fitted slope "
        "matches the exponent within the stated tolerance.",
        _cfg(
            "decay-local",
            grid={"n": 1, "N": 4096, "L": 32.0},
            params={"lam": 2.0, "k": 1, "j": 1, "eps": [1.0, 2.0, 4.0, 8.0]},
        ),
        {"slope_rel": 0.05, "formula_rel": 1.0e-6},
    ),
    "hkp-closedform": _CatalogEntry(
        _run_hkp_closedform,
        "The oscillating-atom construction has an explicit transform: the "
        "FFT of the built atom matches the closed-form product formula on "
        "the whole frequency lattice for k in {1,2,3} and eps in {1,2}.",
        _cfg(
            "hkp-closedform",
            grid={"n": 1, "N": 2048, "L": 16.0},
            params={"lam": 0.8, "k": [1, 2, 3], "eps": [1.0, 2.0]},
        ),
        {"rel_err": 1.0e-6},
    ),
    "moment-necessity": _CatalogEntry(
        _run_moment_necessity,
        "Membership with lam <= 1 forces vanishing moments: spectral "
        "derivatives at the origin vanish through order floor(n(1/lam-1)) "
        "for atoms, while a mean-carrying block is rejected.",
        _cfg(
            "moment-necessity",
            grid={"n": 1, "N": 512, "L": 8.0},
            morrey={"q": 0.5, "lam": 0.5},
            corpus={"kinds": ["smooth"], "scales": [0.5, 1.0]},
        ),
        {},
    ),
    "blockdecomp-roundtrip": _CatalogEntry(
        _run_blockdecomp_roundtrip,
        "The unit-scale mollification splits into sup-normalized blocks over "
        "the unit-cube tiling with exact reconstruction, and the block "
        "coefficient norm is controlled by the local maximal-function norm "
        "with one corpus-wide constant.",
        _cfg(
            "blockdecomp-roundtrip",
            grid={"n": 1, "N": 512, "L": 4.0},
            morrey={"q": 1.0, "lam": 2.0},
            family={"j_min": 0, "j_max": 3},
            ladder={"j_lo": 0, "j_hi": 4},
            corpus={"count": 20},
        ),
        {"recon_rel": 1.0e-10, "coeff_constant": 4.0},
    ),
    "psido-bounded": _CatalogEntry(
        _run_psido_bounded,
        "An order-zero symbol gives a bounded operator on the local space: "
        "norm ratios over the atom corpus show no growth trend in the cube "
        "sidelength, while a multiplier that destroys the moment condition "
        "shows a strictly positive growth trend in the non-local norm.",
        _cfg(
            "psido-bounded",
            grid={"n": 1, "N": 2048, "L": 4.0},
            morrey={"q": 2.0 / 3.0, "lam": 2.0 / 3.0},
            family={"j_min": -1, "j_max": 4},
            ladder={"j_lo": 0, "j_hi": 5},
            corpus={"kinds": ["smooth"], "scales": [0.0625, 0.125, 0.25, 0.5, 1.0, 2.0]},
            params={"phases": [0.0, 1.1], "waves": 4.0},
        ),
        {"identity_dev": 1.0e-8, "trend_abs": 0.1, "control_trend": 0.3},
    ),
    "psido-blowup": _CatalogEntry(
        _run_psido_blowup,
        "⟨D⟩^m for m>0 is not bounded on the local space: on dilated "
        "oscillating atoms the closed-form lower bound grows like eps^(-m) "
        "(slope -m exactly), the measured norms follow, and the m = 0 "
        "control stays flat.",
        _cfg(
            "psido-blowup",
            grid={"n": 1, "N": 4096, "L": 8.0},
            params={"m": 0.5, "k": 2, "lam": 1.0, "eps": [1.0, 0.5, 0.25]},
        ),
        {"bound_tol": 1.0e-6, "slope_margin": 0.3, "control_margin": 0.15},
    ),
    "kernel-decay": _CatalogEntry(
        _run_kernel_decay,
        "Order-zero symbols have off-diagonal kernels decaying at least like "
        "|x-y|^(-n) on moderate separations; the ⟨xi⟩^(-2) kernel matches "
        "its closed form pi exp(-2 pi |z|), and halving the regularization "
        "leaves resolved samples stable.",
        _cfg(
            "kernel-decay",
            grid={"n": 1, "N": 512, "L": 4.0},
            params={"pairs": 9, "bessel_N": 1024, "bessel_L": 8.0},
        ),
        {"slope_margin": 0.3, "bessel_rel": 1.0e-3, "eps_drift": 0.1},
    ),
    "hardy-inequality": _CatalogEntry(
        _run_hardy_inequality,
        "The weighted-spectrum Morrey norm with weight |xi|^(n(1-2/lam)) is "
        "controlled by the maximal-function norm: the measured ratios stay "
        "bounded over the atom corpus.",
        _cfg(
            "hardy-inequality",
            grid={"n": 1, "N": 512, "L": 8.0},
            morrey={"q": 0.5, "lam": 1.0},
            family={"j_min": -1, "j_max": 4},
            ladder={"j_lo": -2, "j_hi": 5},
            corpus={"kinds": ["smooth"], "scales": [0.5, 1.0]},
            params={"freq_family": {"j_min": -3, "j_max": 3}},
        ),
        {"max_ratio": 5.0},
    ),
    "global-local-gap": _CatalogEntry(
        _run_global_local_gap,
        "The defect between a function and its unit-scale mollification, "
        "measured in the non-local norm, is controlled by the local norm: "
        "the gap ratio stays bounded over the corpus.",
        _cfg(
            "global-local-gap",
            grid={"n": 1, "N": 512, "L": 4.0},
            morrey={"q": 1.0, "lam": 2.0},
            family={"j_min": 0, "j_max": 3},
            ladder={"j_lo": 0, "j_hi": 4},
            corpus={"count": 4},
        ),
        {"max_gap": 5.0},
    ),
    "regularization": _CatalogEntry(
        _run_regularization,
        "Mollification trades locality for integrability: the mollified "
        "Morrey norm in the finer space behaves like t^(n(1/gamma-1/lam)) "
        "times the maximal-function norm, with the fitted slope meeting the "
        "exponent and bounded normalized ratios.",
        _cfg(
            "regularization",
            grid={"n": 1, "N": 1024, "L": 4.0},
            morrey={"q": 1.0, "lam": 1.0},
            family={"j_min": 0, "j_max": 7},
            ladder={"j_lo": 0, "j_hi": 7},
            params={"gamma": {"q": 2.0, "lam": 2.0}, "t": [2.0**-j for j in range(0, 7)], "widths": [0.25, 0.5]},
        ),
        {"slope_margin": 0.2, "max_ratio": 10.0},
    ),
}


def list_experiments() -> list:
    """Names of all available experiments, in catalog order."""
    return list(_CATALOG)


def default_config(name: str) -> dict:
    """A complete, valid configuration for the named experiment."""
    if name not in _CATALOG:
        raise ValueError(f"unknown experiment {name!r}")
    return copy.deepcopy(_CATALOG[name].defaults)


def describe(name: str) -> str:
    """Human-readable description: claim, default config and tolerances."""
    if name not in _CATALOG:
        raise ValueError(f"unknown experiment {name!r}")
    entry = _CATALOG[name]
    lines = [name, "", entry.claim, "", "default config:"]
    lines.append(json.dumps(_jsonable(entry.defaults), indent=2, sort_keys=True))
    lines.append("")
    lines.append("default tolerances:")
    lines.append(json.dumps(_jsonable(entry.tolerances), indent=2, sort_keys=True))
    return "\n".join(lines)


def run(config: dict, output_dir: Optional[str] = None) -> ResultBundle:
    """Validate the config, run the experiment, and persist the bundle.

    Writes ``results.json``, ``cases.csv`` and the experiment's SVG charts
    under the configured output directory.  Per-case exceptions become
    failure records in the bundle (and fail the summary) rather than
    aborting the run.

    Parameters
    ----------
    config : dict
        Raw configuration; see :data:`CONFIG_SCHEMA`.
    output_dir : str, optional
        Override for ``config["output_dir"]``.

    Returns
    -------
    ResultBundle
    """
    raw = copy.deepcopy(config)
    if output_dir is not None:
        raw["output_dir"] = str(output_dir)
    cfg = validate_config(raw)
    entry = _CATALOG[cfg.experiment]
    start = time.perf_counter()
    cases, checks, figs = entry.runner(cfg)
    wall = time.perf_counter() - start
    cases = sorted(cases, key=lambda c: str(c.get("case", "")))
    summary = {
        "experiment": cfg.experiment,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    bundle = ResultBundle(cfg.as_dict(), cases, summary, wall)

    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "cases.csv"
    _write_csv(csv_path, cases)
    bundle.outputs.append(str(csv_path))
    for fname, fig in figs:
        fig_path = outdir / fname
        _save_fig(fig, fig_path)
        bundle.outputs.append(str(fig_path))
    json_path = outdir / "results.json"
    with open(json_path, "w") as fh:
        json.dump(bundle.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    bundle.outputs.append(str(json_path))
    return bundle
