"""Parameter sweeps, figure/table regeneration and CSV emission.

CSV is the contract: fixed column order per command, one header row, LF line
endings, UTF-8, every float printed with 17 significant digits so output is
byte-stable across runs.  Grid evaluation may fan out over a bounded worker
pool; row order is always grid order, never completion order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytics
from .dissipation import damped_protocol
from .dynamics import evolution_params
from .errors import ConfigError, DegenerateBranchError
from .interferometer import ProtocolParams, default_optical_cutoff, run_protocol
from .tolerances import DEFAULT_TOL

MODES = ("figure2", "figure3", "table1", "verify", "sweep")
ENGINES = ("analytic", "exact", "both")
SWEEPABLE = ("delta", "k", "wm_t", "alpha2", "gamma")

DEFAULT_FIXED = {"k": 0.005, "wm_t": math.pi, "alpha2": 30.0,
                 "delta": 0.005, "gamma": 0.0}
# figure 3 reference probability/coupling pairs
DEFAULT_PAIRS = ((0.004, 0.01), (0.001, 0.005), (0.0002, 0.001))
# delta grid matching the plotted range
DELTA_GRID = {"start": 0.001, "stop": 0.12, "count": 200}


@dataclass(frozen=True)
class SweepConfig:
    mode: str
    engine: str = "analytic"
    fixed: dict = field(default_factory=dict)
    axes: dict = field(default_factory=dict)       # name -> list of values
    pairs: tuple = DEFAULT_PAIRS                   # figure3 (p_target, k)
    optical_cutoff: int | None = None
    mirror_cutoff: int = 10
    overlay_alpha2: float = 2.0                    # exact overlay for figure2
    out: str | None = None
    svg: str | None = None
    workers: int = 1

    def value(self, name: str) -> float:
        return float(self.fixed.get(name, DEFAULT_FIXED[name]))


def _expand_axis(name: str, spec) -> list[float]:
    if isinstance(spec, dict):
        missing = {"start", "stop", "count"} - set(spec)
        if missing:
            raise ConfigError(f"axis {name!r} range needs start/stop/count, missing {sorted(missing)}")
        count = int(spec["count"])
        if count < 2:
            raise ConfigError(f"axis {name!r} range count must be >= 2, got {count}")
        return list(np.linspace(float(spec["start"]), float(spec["stop"]), count))
    if isinstance(spec, (list, tuple)):
        if not spec:
            raise ConfigError(f"axis {name!r} value list is empty")
        return [float(v) for v in spec]
    raise ConfigError(f"axis {name!r} must be a list or a start/stop/count range")


def load_config(path: str | None, overrides: dict | None = None,
                default_mode: str | None = None) -> SweepConfig:
    """Read a JSON config file and apply CLI overrides (flags win)."""
    raw: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {path!r}: {err}") from err
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
    for key, val in (overrides or {}).items():
        if val is not None:
            raw[key] = val
    if default_mode is not None and "mode" not in raw:
        raw["mode"] = default_mode

    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    engine = raw.get("engine", "analytic")
    if engine not in ENGINES:
        raise ConfigError(f"engine must be one of {ENGINES}, got {engine!r}")

    fixed = dict(raw.get("fixed", {}))
    for key in fixed:
        if key not in DEFAULT_FIXED:
            raise ConfigError(f"unknown fixed parameter {key!r} (known: {sorted(DEFAULT_FIXED)})")
    axes = {}
    for name, spec in dict(raw.get("axes", {})).items():
        if name not in SWEEPABLE:
            raise ConfigError(f"unknown sweep axis {name!r} (known: {SWEEPABLE})")
        axes[name] = _expand_axis(name, spec)

    cut = dict(raw.get("cutoffs", {}))
    for key in cut:
        if key not in ("optical", "mirror"):
            raise ConfigError(f"unknown cutoff key {key!r}")
    pairs = raw.get("pairs", DEFAULT_PAIRS)
    try:
        pairs = tuple((float(p), float(k)) for p, k in pairs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"pairs must be [probability, k] items: {err}") from err

    workers = int(raw.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")

    cfg = SweepConfig(
        mode=mode, engine=engine, fixed=fixed, axes=axes, pairs=pairs,
        optical_cutoff=cut.get("optical"), mirror_cutoff=int(cut.get("mirror", 10)),
        overlay_alpha2=float(raw.get("overlay_alpha2", 2.0)),
        out=raw.get("out"), svg=raw.get("svg"), workers=workers)
    _check_exact_feasible(cfg)
    return cfg


def _check_exact_feasible(cfg: SweepConfig) -> None:
    if cfg.engine == "analytic":
        return
    alpha2 = cfg.value("alpha2") if cfg.mode == "sweep" else cfg.overlay_alpha2
    alpha2 = max([alpha2] + [max(v) for n, v in cfg.axes.items() if n == "alpha2"])
    n_opt = cfg.optical_cutoff if cfg.optical_cutoff is not None else default_optical_cutoff(alpha2)
    dim = (n_opt + 1) ** 2 * (cfg.mirror_cutoff + 1)
    if dim > 16 * DEFAULT_TOL.dense_dim_cap:
        raise ConfigError(
            f"exact engine infeasible: joint dimension {dim} for |alpha|^2={alpha2:.3g}")


# ---------------------------------------------------------------------------
# formatting

def format_float(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{float(x):.17g}"


def write_csv(path: str, header: list[str], rows) -> None:
    """Write header + rows (any iterable; rows stream as they arrive)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else format_float(cell)
                              for cell in row) + "\n")


def render_rows(header: list[str], rows: list[list]) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(cell if isinstance(cell, str) else format_float(cell)
                            for cell in row))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# evaluation

def _analytic_point(k: float, wm_t: float, alpha2: float, delta: float) -> dict:
    """Closed forms at one grid point; degenerate fields become NaN + reason."""
    inp = analytics.AnalyticInputs.of(alpha2, delta, k, wm_t)
    reasons: list[str] = []

    def guarded(name, fn, *args):
        try:
            return fn(*args)
        except DegenerateBranchError:
            reasons.append(f"{name}:degenerate")
            return math.nan

    out = {
        "regime": inp.regime,
        "q_click": guarded("q_click", analytics.q_click, inp),
        "q_noclick": analytics.q_noclick(inp),
        "q_diff": guarded("q_diff", analytics.q_diff, inp),
        "q_wva": guarded("q_wva", analytics.q_wva, inp),
        "p_click": analytics.p_success(inp),
        "weak_value": guarded("weak_value", analytics.weak_value, alpha2, delta),
        "weak_value_one_photon": guarded("weak_value_one_photon",
                                         analytics.weak_value_one_photon, delta),
        "q_no_postselection": analytics.q_no_postselection(k, wm_t),
    }
    out["reason"] = "; ".join(reasons)
    return out


def _exact_point(cfg: SweepConfig, k: float, wm_t: float, alpha2: float,
                 delta: float, gamma: float) -> dict:
    params = ProtocolParams(
        alpha=complex(math.sqrt(alpha2)), delta=delta,
        evolution=evolution_params(k, wm_t),
        optical_cutoff=cfg.optical_cutoff, mirror_cutoff=cfg.mirror_cutoff)
    out = damped_protocol(params, gamma) if gamma > 0.0 else run_protocol(params)
    return {
        "p_click": out.p_click, "p_noclick": out.p_noclick,
        "p_residual": out.p_residual,
        "q_click": out.q_click, "q_noclick": out.q_noclick, "q_diff": out.diff,
        "dq_click": out.dq_click, "dq_noclick": out.dq_noclick,
        "reason": out.degenerate_reason or "",
    }


SWEEP_HEADER = [
    "k", "wm_t", "alpha2", "delta", "gamma", "engine", "regime",
    "p_click", "p_noclick", "p_residual",
    "q_click", "q_noclick", "q_diff", "dq_click", "dq_noclick",
    "q_wva", "weak_value", "weak_value_one_photon", "q_no_postselection",
    "rel_dev_q_diff", "reason",
]


def _sweep_rows_for_point(cfg: SweepConfig, point: dict) -> list[list]:
    k, wm_t = point["k"], point["wm_t"]
    alpha2, delta, gamma = point["alpha2"], point["delta"], point["gamma"]
    base = [k, wm_t, alpha2, delta, gamma]
    ana = _analytic_point(k, wm_t, alpha2, delta)
    rows = []
    exact = None
    if cfg.engine in ("exact", "both"):
        exact = _exact_point(cfg, k, wm_t, alpha2, delta, gamma)
    rel = math.nan
    if exact is not None and not math.isnan(ana["q_diff"]) and ana["q_diff"] != 0:
        rel = (exact["q_diff"] - ana["q_diff"]) / ana["q_diff"]
    if cfg.engine in ("analytic", "both"):
        note = ana["reason"] if exact is not None else \
            "; ".join(filter(None, [ana["reason"], "analytic engine: no exact columns"]))
        rows.append(base + ["analytic", ana["regime"],
                            ana["p_click"], math.nan, math.nan,
                            ana["q_click"], ana["q_noclick"], ana["q_diff"],
                            math.nan, math.nan,
                            ana["q_wva"], ana["weak_value"],
                            ana["weak_value_one_photon"], ana["q_no_postselection"],
                            rel, note])
    if exact is not None:
        note = "; ".join(filter(None, [ana["reason"], exact["reason"]]))
        rows.append(base + ["exact", ana["regime"],
                            exact["p_click"], exact["p_noclick"], exact["p_residual"],
                            exact["q_click"], exact["q_noclick"], exact["q_diff"],
                            exact["dq_click"], exact["dq_noclick"],
                            ana["q_wva"], ana["weak_value"],
                            ana["weak_value_one_photon"], ana["q_no_postselection"],
                            rel, note])
    return rows


def iter_sweep_rows(cfg: SweepConfig):
    """Yield sweep rows in grid order as grid points complete.

    With workers > 1 the points evaluate concurrently but the iterator still
    yields in submission (grid) order, so streaming consumers see the same
    byte-stable ordering as a serial run.
    """
    if not cfg.axes:
        raise ConfigError("sweep mode needs at least one axis")
    names = [n for n in SWEEPABLE if n in cfg.axes]
    grids = [cfg.axes[n] for n in names]
    points = []
    for combo in np.ndindex(*[len(g) for g in grids]):
        point = {n: cfg.value(n) for n in DEFAULT_FIXED}
        for name, idx in zip(names, combo):
            point[name] = grids[names.index(name)][idx]
        points.append(point)

    def worker(pt):
        return _sweep_rows_for_point(cfg, pt)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for chunk in pool.map(worker, points):
                yield from chunk
    else:
        for pt in points:
            yield from worker(pt)


def run_sweep(cfg: SweepConfig) -> tuple[list[str], list[list]]:
    """Cartesian product of the axes, rows materialized in grid order."""
    return list(SWEEP_HEADER), list(iter_sweep_rows(cfg))


# ---------------------------------------------------------------------------
# figure / table commands

def run_figure2(cfg: SweepConfig) -> tuple[list[str], list[list]]:
    """Displacement curves vs delta: no-postselection and no-click constants,
    click curve, and both candidates for the difference curve."""
    k, wm_t, alpha2 = cfg.value("k"), cfg.value("wm_t"), cfg.value("alpha2")
    deltas = cfg.axes.get("delta") or _expand_axis("delta", DELTA_GRID)
    header = ["delta", "q_no_postselection", "q_noclick", "q_click", "q_diff",
              "q_wva_minus_noclick", "p_click"]
    overlay = cfg.engine in ("exact", "both")
    if overlay:
        header += ["exact_alpha2", "exact_q_noclick", "exact_q_click",
                   "exact_q_diff", "exact_p_click"]

    def row(delta: float) -> list:
        ana = _analytic_point(k, wm_t, alpha2, delta)
        out = [delta,
               ana["q_no_postselection"],
               ana["q_noclick"],
               ana["q_click"],
               ana["q_diff"],
               ana["q_wva"] - ana["q_noclick"],
               ana["p_click"]]
        if overlay:
            ex = _exact_point(cfg, k, wm_t, cfg.overlay_alpha2, delta, 0.0)
            out += [cfg.overlay_alpha2, ex["q_noclick"], ex["q_click"],
                    ex["q_diff"], ex["p_click"]]
        return out

    if cfg.workers > 1 and overlay:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(row, deltas))
    else:
        rows = [row(d) for d in deltas]
    return header, rows


def run_figure3(cfg: SweepConfig) -> tuple[list[str], list[list]]:
    """Mean photon number required for a target click probability vs delta."""
    wm_t = cfg.value("wm_t")
    deltas = cfg.axes.get("delta") or _expand_axis("delta", DELTA_GRID)
    header = ["delta"] + [f"alpha2_p{p:g}_k{k:g}" for p, k in cfg.pairs]
    rows = []
    for d in deltas:
        row = [d]
        for p_target, k in cfg.pairs:
            row.append(analytics.alpha2_for_probability(p_target, k, wm_t, d))
        rows.append(row)
    return header, rows


TABLE1_DELTAS = (0.1, 0.08, 0.06, 0.04, 0.02, 0.01)


def run_table1(alpha2: float = 30.0) -> tuple[list[str], list[list]]:
    """Weak value of one photon and success probability over the reference
    postselection parameters."""
    header = ["delta", "weak_value_one_photon", "alpha2", "p_success_pct"]
    rows = []
    for d in TABLE1_DELTAS:
        rows.append([d, analytics.weak_value_one_photon(d), alpha2,
                     100.0 * analytics.p_success_wva(alpha2, d)])
    return header, rows
