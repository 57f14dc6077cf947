"""Seeded experiment sweeps over resolutions, coefficient fields, contrasts and seeds.

A sweep is planned as an ordered list of runs. Each run is a pure function of
(config, run spec) and returns one flat row of statistics and per-run checks.
Rows are merged in run order, then sweep-level fits and checks are added, so
the output is identical for any worker count.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy

from . import __version__
from .config import ExperimentConfig, FieldChoice
from .estimators import (
    DeGiorgiSchedule,
    bmo_norm,
    caccioppoli_ratio,
    crossover_product,
    default_eps,
    degiorgi_sequence,
    harnack_ratio,
    jn_tail_profile,
    log_caccioppoli_ratio,
    moser_ladder_norms,
    range_stats,
    weak_harnack_exponent,
    weak_harnack_stat,
)
from .extension import default_family, extend
from .fields import FieldSpec, make_field, normalize_field
from .grid import CutoffSpec, DiscreteField, build_ball_grid, subball
from .kernels import ball_samples, chain_cover, chain_multiply, theory_bounds
from .report import SCHEMA, ExperimentReport, clean
from .rng import normals, stream_keys
from .solver import assemble, solve_dirichlet

MAX_PRINCIPLE_SLACK = 1e-8
CACC_CAP = 1.25
REFINEMENT_NOISE = 0.10
CROSSOVER_GROWTH = 1.5
JN_CORRELATION = -0.9
FIT_AGREEMENT = 0.25
EXTENSION_STABILITY = 0.10


class ScalingFit(NamedTuple):
    C_hat: float
    residual: float
    intercept: float


def _fit(x: np.ndarray, pairs) -> ScalingFit:
    lam = np.array([p[0] for p in pairs], dtype=float)
    val = np.array([p[1] for p in pairs], dtype=float)
    if lam.size < 3:
        raise ValueError("need at least 3 (Lambda, value) pairs")
    if np.any(val < 1):
        raise ValueError("values must be at least 1")
    if np.ptp(lam) == 0:
        raise ValueError("degenerate design: all Lambda values are equal")
    y = np.log(val)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return ScalingFit(float(coef[0]), float(np.sqrt(np.mean(resid**2))), float(coef[1]))


def fit_sqrt_scaling(pairs) -> ScalingFit:
    """Least squares for log(value) = C sqrt(Lambda) + b; returns C, RMS residual, b."""
    lam = np.array([p[0] for p in pairs], dtype=float)
    return _fit(np.sqrt(lam), pairs)


def fit_linear_scaling(pairs) -> ScalingFit:
    """Competing model log(value) = C' Lambda + b', fitted the same way."""
    lam = np.array([p[0] for p in pairs], dtype=float)
    return _fit(lam, pairs)


@dataclass(frozen=True)
class RunSpec:
    index: int
    n: int
    field: FieldChoice
    Lambda: float
    seed: int
    item: str = ""


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: Exception):
        self.stage = stage
        super().__init__(f"{type(exc).__name__}: {exc}")


def plan_runs(cfg: ExperimentConfig) -> list[RunSpec]:
    if cfg.experiment == "extension_check":
        names = list(default_family(cfg.d))
        combos = [(n, cfg.fields[0], 1.0, 0, name) for n in cfg.resolutions for name in names]
    else:
        combos = [
            (n, f, L, s, "")
            for n, f, L, s in itertools.product(cfg.resolutions, cfg.fields, cfg.lambdas, cfg.seeds)
        ]
    return [RunSpec(i, *c) for i, c in enumerate(combos)]


def boundary_direction(seed: int, d: int) -> np.ndarray:
    z = normals(stream_keys(seed, np.zeros((1, 1), dtype=np.int64)), d)[0]
    return z / np.linalg.norm(z)


def boundary_data(cfg: ExperimentConfig, seed: int):
    """g = offset + height * Gaussian bump centred at a seeded point of the unit sphere."""
    e = boundary_direction(seed, cfg.d)
    height, width, offset = cfg.bump_height, cfg.bump_width, cfg.g_offset

    def g(x):
        return offset + height * np.exp(-np.sum((x - e) ** 2, axis=1) / (2.0 * width**2))

    return g


@lru_cache(maxsize=8)
def _grid(d: int, n: int, R: float = 1.0):
    return build_ball_grid(d, n, R)


def tile_period(choice: FieldChoice, grid) -> int:
    return int(min(grid.n, max(1, round(choice.tile_width / grid.h))))


def build_field(cfg: ExperimentConfig, spec: RunSpec, grid):
    kind = spec.field.kind
    fs = FieldSpec(kind, spec.Lambda, tile_period(spec.field, grid), spec.seed)
    return normalize_field(make_field(fs, grid))


class _Stage:
    def __init__(self):
        self.name = "setup"

    def __call__(self, name: str):
        self.name = name
        return self


def _solve(cfg, spec, stage, row):
    stage("grid")
    grid = _grid(cfg.d, spec.n)
    stage("field")
    a = build_field(cfg, spec, grid)
    row["lambda_measured"] = a.ellipticity.lam
    row["Lambda_measured"] = a.ellipticity.Lam
    stage("assemble")
    op = assemble(a, scheme=cfg.scheme)
    stage("solve")
    g = boundary_data(cfg, spec.seed)
    u, info = solve_dirichlet(op, g=g, tol=cfg.tol, return_info=True)
    row["iterations"] = info["iterations"]
    row["residual"] = info["residual"]
    gb = g(grid.centers[grid.boundary_layer])
    row["g_min"], row["g_max"] = float(gb.min()), float(gb.max())
    row["u_min"], row["u_max"] = float(u.values.min()), float(u.values.max())
    return grid, op, u


def _eps(cfg, u):
    return default_eps(u) if cfg.eps_policy == "scaled" else 0.0


def _half(grid):
    return subball(grid, np.zeros(grid.dim), 0.5 * grid.R)


def _run_harnack(cfg, spec, stage, row, checks):
    grid, op, u = _solve(cfg, spec, stage, row)
    stage("estimate")
    row["harnack"] = harnack_ratio(u, _half(grid))
    if cfg.scheme == "fv_tpfa":
        ok = row["g_min"] - MAX_PRINCIPLE_SLACK <= row["u_min"] and row["u_max"] <= row["g_max"] + MAX_PRINCIPLE_SLACK
        checks["max_principle"] = ok


def _run_weak_harnack(cfg, spec, stage, row, checks):
    grid, op, u = _solve(cfg, spec, stage, row)
    stage("estimate")
    row["q_star"] = weak_harnack_exponent(cfg.q, cfg.d)
    row["weak_harnack"] = weak_harnack_stat(u, cfg.q)
    checks["stat_at_least_one"] = row["weak_harnack"] >= 1.0 - 1e-12


def crossover_exponent(cfg, Lambda: float) -> float:
    return cfg.c_value / math.sqrt(Lambda) if cfg.c_policy == "proportional" else cfg.c_value


def _run_crossover(cfg, spec, stage, row, checks):
    grid, op, u = _solve(cfg, spec, stage, row)
    stage("estimate")
    stat = crossover_product(u, _half(grid), crossover_exponent(cfg, spec.Lambda), _eps(cfg, u))
    row["c"] = stat.c
    row["eps"] = stat.eps
    row["product"] = stat.product
    checks["product_at_least_one"] = stat.product >= 1.0 - 1e-12


def _run_degiorgi(cfg, spec, stage, row, checks):
    grid, op, u = _solve(cfg, spec, stage, row)
    stage("estimate")
    Y = degiorgi_sequence(u, DeGiorgiSchedule(cfg.level, cfg.degiorgi_steps))
    for m, y in enumerate(Y):
        row[f"Y{m}"] = float(y)
    checks["nonincreasing"] = bool(np.all(np.diff(Y) <= 1e-12 * max(Y[0], 1e-300)))


def moser_radii(steps: int) -> np.ndarray:
    return np.linspace(0.5, 0.25, steps + 1)


def _run_moser(cfg, spec, stage, row, checks):
    grid, op, u = _solve(cfg, spec, stage, row)
    stage("estimate")
    radii = moser_radii(cfg.moser_steps)
    ladder = moser_ladder_norms(u, cfg.p0, cfg.moser_steps, radii)
    for m, (p, norm) in enumerate(ladder):
        row[f"p{m}"] = p
        row[f"norm{m}"] = norm
    last = subball(grid, np.zeros(grid.dim), radii[-1])
    sup = max(range_stats(u, last).sup, 0.0)
    row["sup_last"] = sup
    final = ladder[-1][1]
    checks["finite"] = all(math.isfinite(x) for _, x in ladder)
    checks["final_within_factor_two"] = sup / 2 <= final <= sup * (1 + 1e-12)


def jn_fit(profile, bmo: float) -> tuple[float, float, int]:
    """Slope and correlation of log(fraction) against t/bmo over positive fractions."""
    pts = [(t / bmo, math.log(f)) for t, f in profile if f > 0]
    if len(pts) < 3:
        return math.nan, math.nan, len(pts)
    x, y = np.array(pts).T
    slope = float(np.polyfit(x, y, 1)[0])
    corr = float(np.corrcoef(x, y)[0, 1])
    return slope, corr, len(pts)


def _run_jn(cfg, spec, stage, row, checks):
    grid, op, u = _solve(cfg, spec, stage, row)
    stage("estimate")
    ball = _half(grid)
    v = u.with_values(-np.log(u.values + _eps(cfg, u)))
    rep = bmo_norm(v, ball, cfg.bmo_levels)
    row["bmo"] = rep.norm
    vals = v.values[ball.cells]
    top = float(np.max(np.abs(vals - vals.mean())))
    row["max_deviation"] = top
    if rep.norm <= 0 or top <= 0:
        checks["negative_slope"] = False
        return
    # thresholds span the observed deviations, ending just below the largest one
    t = np.linspace(0.0, 0.9 * top, cfg.jn_thresholds + 1)[1:]
    profile = jn_tail_profile(v, ball, t)
    slope, corr, used = jn_fit(profile, rep.norm)
    row["slope"], row["correlation"], row["fit_points"] = slope, corr, used
    checks["negative_slope"] = bool(slope < 0)
    checks["correlation"] = bool(corr <= JN_CORRELATION)


def _run_chain(cfg, spec, stage, row, checks):
    grid, op, u = _solve(cfg, spec, stage, row)
    stage("estimate")
    cover = chain_cover(cfg.d)
    local = [harnack_ratio(u, subball(grid, c, cover.radius)) for c in cover.centers]
    row["chain_product"] = chain_multiply(local)
    row["max_local"] = max(local)
    row["harnack"] = harnack_ratio(u, _half(grid))
    checks["chain_bounds_global"] = row["harnack"] <= row["chain_product"] * (1 + 1e-12)


def _run_cacc(cfg, spec, stage, row, checks):
    grid, op, u = _solve(cfg, spec, stage, row)
    stage("estimate")
    r = caccioppoli_ratio(op, u, cfg.level, CutoffSpec(0.5, 1.0))
    lr = log_caccioppoli_ratio(op, u, CutoffSpec(0.25, 0.5), _eps(cfg, u))
    row["cacc"] = r.ratio if r.applicable else None
    row["log_cacc"] = lr.ratio if lr.applicable else None
    checks["cacc_cap"] = (not r.applicable) or r.ratio <= CACC_CAP
    checks["log_cacc_cap"] = (not lr.applicable) or lr.ratio <= CACC_CAP


def _run_extension(cfg, spec, stage, row, checks):
    stage("grid")
    source = _grid(cfg.d, spec.n, 1.0)
    target = _grid(cfg.d, 2 * spec.n, 2.0)
    family = default_family(cfg.d)
    stage("extend")
    f = family[spec.item]
    u = DiscreteField.from_function(source, f)
    res = extend(u, target)
    ext = res.extended.values
    stage("estimate")
    row["norm_ratio"] = res.norm_ratio
    row["source_norm"], row["target_norm"] = res.source_norm, res.target_norm
    inner = target.radii < 1.0
    scale = 1.0 + float(np.max(np.abs(u.values)))
    row["interior_error"] = float(np.max(np.abs(ext[inner] - f(target.centers[inner]))))
    far = target.boundary_layer | (target.radii >= 2.0 - target.h)
    row["support_max"] = float(np.max(np.abs(ext[far])))
    w = DiscreteField.from_function(source, family["bump"])
    combo = extend(u.with_values(2.0 * u.values - 3.0 * w.values), target).extended.values
    lin = combo - (2.0 * ext - 3.0 * extend(w, target).extended.values)
    row["linearity_error"] = float(np.max(np.abs(lin)))
    checks["interior_identity"] = row["interior_error"] <= 1e-10 * scale
    checks["compact_support"] = row["support_max"] == 0.0
    checks["linearity"] = row["linearity_error"] <= 1e-12 * scale


def dyadic_oscillations(u, levels: int) -> np.ndarray:
    grid = u.grid
    origin = np.zeros(grid.dim)
    return np.array([range_stats(u, subball(grid, origin, grid.R * 2.0**-k)).osc for k in range(1, levels + 1)])


def holder_from_oscillations(osc: np.ndarray) -> tuple[float, float]:
    """Least-squares per-halving factor theta and alpha = log2(1/theta)."""
    k = np.arange(osc.size)
    slope = float(np.polyfit(k, np.log2(osc), 1)[0])
    return 2.0**slope, -slope


def _run_holder(cfg, spec, stage, row, checks):
    grid, op, u = _solve(cfg, spec, stage, row)
    stage("estimate")
    osc = dyadic_oscillations(u, cfg.holder_levels)
    for k, o in enumerate(osc, start=1):
        row[f"osc{k}"] = float(o)
    if np.any(osc <= 0):
        checks["decay"] = False
        return
    theta, alpha = holder_from_oscillations(osc)
    row["theta"], row["alpha"] = theta, alpha
    checks["theta_below_one"] = theta < 1
    checks["alpha_positive"] = alpha > 0


_KERNELS = {
    "harnack_sweep": _run_harnack,
    "weak_harnack": _run_weak_harnack,
    "crossover": _run_crossover,
    "degiorgi": _run_degiorgi,
    "moser": _run_moser,
    "jn_check": _run_jn,
    "chain_check": _run_chain,
    "cacc_check": _run_cacc,
    "extension_check": _run_extension,
    "holder_decay": _run_holder,
}


def execute_run(cfg: ExperimentConfig, spec: RunSpec) -> dict:
    """One run of the sweep as a flat row; failures become a row naming the stage."""
    row = {
        "index": spec.index,
        "n": spec.n,
        "field": spec.field.token,
        "Lambda": spec.Lambda,
        "seed": spec.seed,
    }
    if spec.item:
        row["item"] = spec.item
    bounds = theory_bounds(cfg.constants, spec.Lambda, cfg.d)
    row.update({f"bound_{k}": v for k, v in dataclasses.asdict(bounds).items()})
    checks: dict[str, bool] = {}
    stage = _Stage()
    try:
        _KERNELS[cfg.experiment](cfg, spec, stage, row, checks)
        row["status"] = "ok"
        row["stage"] = ""
        row["error"] = ""
    except Exception as exc:  # reported, not raised: one bad run must not sink the sweep
        row["status"] = "error"
        row["stage"] = stage.name
        row["error"] = f"{type(exc).__name__}: {exc}"
        checks["completed"] = False
    row["passed"] = all(checks.values()) if checks else row["status"] == "ok"
    row["checks"] = ";".join(f"{k}={'pass' if v else 'FAIL'}" for k, v in sorted(checks.items()))
    return clean(row)


def _execute(args):
    return execute_run(*args)


def execute_all(cfg: ExperimentConfig, runs: list[RunSpec], workers: int = 1) -> list[dict]:
    jobs = [(cfg, spec) for spec in runs]
    if workers <= 1 or len(jobs) <= 1:
        return [execute_run(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so the merge is ordered by run index
        return list(pool.map(_execute, jobs))


def _ok(rows, key):
    return [r for r in rows if r["status"] == "ok" and r.get(key) is not None]


def _groups(rows, keys):
    out: dict[tuple, list[dict]] = {}
    for r in rows:
        out.setdefault(tuple(r[k] for k in keys), []).append(r)
    return out


def _check(name, passed, detail=""):
    return {"name": name, "passed": bool(passed), "detail": detail}


def _max_by_lambda(rows, key):
    by = _groups(_ok(rows, key), ["Lambda"])
    return sorted((L, max(r[key] for r in rs)) for (L,), rs in by.items())


def _median_by_lambda(rows, key):
    by = _groups(_ok(rows, key), ["Lambda"])
    return sorted((L, float(np.median([r[key] for r in rs]))) for (L,), rs in by.items())


def _summarize_harnack(cfg, rows, checks, fits, series):
    fitted = {}
    for (n, field), rs in sorted(_groups(rows, ["n", "field"]).items()):
        pts = _max_by_lambda(rs, "harnack")
        series[f"harnack_{field}_n{n}"] = pts
        if len({L for L, _ in pts}) < 3:
            continue
        sq, lin = fit_sqrt_scaling(pts), fit_linear_scaling(pts)
        fitted[(n, field)] = sq
        for model, f in (("sqrt", sq), ("linear", lin)):
            fits.append({"n": n, "field": field, "model": model, "C_hat": f.C_hat,
                         "intercept": f.intercept, "residual": f.residual, "points": len(pts)})
        checks.append(_check(f"sqrt_beats_linear[n={n},{field}]", sq.residual <= 0.5 * lin.residual,
                             f"sqrt residual {sq.residual:.3e} vs linear {lin.residual:.3e}"))
    for field in sorted({f for _, f in fitted}):
        ns = sorted(n for n, f in fitted if f == field)
        if len(ns) >= 2:
            a, b = fitted[(ns[-2], field)].C_hat, fitted[(ns[-1], field)].C_hat
            rel = abs(a - b) / max(abs(a), abs(b), 1e-300)
            checks.append(_check(f"fit_stable[{field}]", rel <= FIT_AGREEMENT,
                                 f"C_hat {a:.4f} (n={ns[-2]}) vs {b:.4f} (n={ns[-1]}), rel {rel:.3f}"))


def _summarize_crossover(cfg, rows, checks, fits, series):
    for (n,), rs in sorted(_groups(rows, ["n"]).items()):
        pts = _max_by_lambda(rs, "product")
        series[f"crossover_n{n}"] = pts
        if len(pts) >= 2:
            lo, hi = pts[0][1], pts[-1][1]
            checks.append(_check(f"cap_not_growing[n={n}]", hi <= CROSSOVER_GROWTH * lo,
                                 f"max product {hi:.4f} at Lambda={pts[-1][0]:g} vs {lo:.4f} at Lambda={pts[0][0]:g}"))


def _summarize_weak(cfg, rows, checks, fits, series):
    for (n,), rs in sorted(_groups(rows, ["n"]).items()):
        pts = _max_by_lambda(rs, "weak_harnack")
        series[f"weak_harnack_n{n}"] = pts
        if len(pts) >= 3:
            f = fit_sqrt_scaling(pts)
            fits.append({"n": n, "field": "*", "model": "sqrt", "C_hat": f.C_hat,
                         "intercept": f.intercept, "residual": f.residual, "points": len(pts)})


def _summarize_cacc(cfg, rows, checks, fits, series):
    for key in ("cacc", "log_cacc"):
        for (field, L, seed), rs in sorted(_groups(_ok(rows, key), ["field", "Lambda", "seed"]).items()):
            vals = [r[key] for r in sorted(rs, key=lambda r: r["n"])]
            ok = all(b <= a * (1 + REFINEMENT_NOISE) for a, b in zip(vals, vals[1:]))
            checks.append(_check(f"{key}_refines[{field},Lambda={L:g},seed={seed}]", ok,
                                 " -> ".join(f"{v:.4g}" for v in vals)))
        for (n,), rs in sorted(_groups(_ok(rows, key), ["n"]).items()):
            series[f"{key}_n{n}"] = _max_by_lambda(rs, key)


def _summarize_extension(cfg, rows, checks, fits, series):
    ns = sorted({r["n"] for r in rows})
    for (item,), rs in sorted(_groups(_ok(rows, "norm_ratio"), ["item"]).items()):
        by_n = {r["n"]: r["norm_ratio"] for r in rs}
        series[f"extension_{item}"] = sorted(by_n.items())
        if len(ns) >= 2 and ns[-1] in by_n and ns[-2] in by_n:
            a, b = by_n[ns[-2]], by_n[ns[-1]]
            rel = abs(a - b) / max(a, b)
            checks.append(_check(f"ratio_stable[{item}]", rel <= EXTENSION_STABILITY,
                                 f"{a:.4f} (n={ns[-2]}) vs {b:.4f} (n={ns[-1]})"))


def _summarize_holder(cfg, rows, checks, fits, series):
    for (n, field), rs in sorted(_groups(rows, ["n", "field"]).items()):
        med = _median_by_lambda(rs, "alpha")
        series[f"holder_alpha_{field}_n{n}"] = med
        if len(med) >= 2:
            ok = all(b <= a for (_, a), (_, b) in zip(med, med[1:]))
            checks.append(_check(f"alpha_nonincreasing[n={n},{field}]", ok,
                                 ", ".join(f"{L:g}:{a:.4f}" for L, a in med)))


def _summarize_jn(cfg, rows, checks, fits, series):
    for (n,), rs in sorted(_groups(rows, ["n"]).items()):
        series[f"jn_correlation_n{n}"] = [(r["index"], r["correlation"]) for r in _ok(rs, "correlation")]


def _summarize_chain(cfg, rows, checks, fits, series):
    cover = chain_cover(cfg.d)
    pts = ball_samples(cfg.chain_samples, 0.5, cfg.d)
    covered = cover.covered(pts)
    uncovered = int((~covered).sum())
    checks.append(_check("chain_covers_half_ball", uncovered == 0,
                         f"{uncovered} of {pts.shape[0]} samples uncovered; covering radius "
                         f"{cover.covering_radius(pts):.4f} vs ball radius {cover.radius}"))
    steps = cover.steps()
    checks.append(_check("chain_steps", bool(np.all(steps <= cover.radius)), f"max step {steps.max():.6f}"))
    norms = np.linalg.norm(cover.centers, axis=1)
    checks.append(_check("chain_centres_in_half_ball", bool(np.all(norms <= 0.5)), f"max norm {norms.max():.6f}"))
    checks.append(_check("chain_count", cover.count == 17, f"{cover.count} balls"))


def _summarize_degiorgi(cfg, rows, checks, fits, series):
    for r in _ok(rows, "Y0"):
        ys = [r[f"Y{m}"] for m in range(cfg.degiorgi_steps)]
        series[f"degiorgi_run{r['index']}"] = list(enumerate(ys))


def _summarize_moser(cfg, rows, checks, fits, series):
    for r in _ok(rows, "norm0"):
        series[f"moser_run{r['index']}"] = [(r[f"p{m}"], r[f"norm{m}"]) for m in range(cfg.moser_steps + 1)]


_SUMMARIES = {
    "harnack_sweep": _summarize_harnack,
    "weak_harnack": _summarize_weak,
    "crossover": _summarize_crossover,
    "degiorgi": _summarize_degiorgi,
    "moser": _summarize_moser,
    "jn_check": _summarize_jn,
    "chain_check": _summarize_chain,
    "cacc_check": _summarize_cacc,
    "extension_check": _summarize_extension,
    "holder_decay": _summarize_holder,
}


def environment_stamp(cfg: ExperimentConfig) -> dict:
    return {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "d": cfg.d,
        "resolutions": list(cfg.resolutions),
        "seeds": list(cfg.seeds),
    }


def run(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    runs = plan_runs(cfg)
    rows = execute_all(cfg, runs, workers)
    checks: list[dict] = []
    fits: list[dict] = []
    series: dict[str, list] = {}
    failed = [r for r in rows if not r["passed"]]
    checks.append(_check("runs_passed", not failed,
                         f"{len(rows) - len(failed)} of {len(rows)} runs passed"))
    try:
        _SUMMARIES[cfg.experiment](cfg, rows, checks, fits, series)
    except Exception as exc:
        checks.append(_check("summary", False, f"summary stage: {type(exc).__name__}: {exc}"))
    series = {k: [[float(x), float(y) if y is not None else None] for x, y in v] for k, v in series.items()}
    return ExperimentReport(
        schema=SCHEMA,
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        environment=environment_stamp(cfg),
        runs=rows,
        fits=clean(fits),
        checks=checks,
        series=clean(series),
    )


def desk_configs(seeds=(0, 1, 2, 3, 4)) -> list[ExperimentConfig]:
    """The desk profile: d = 3, n <= 64, every experiment once."""
    cb = FieldChoice("scalar_checkerboard", 0.25)
    seeds = tuple(seeds)
    base = dict(d=3, seeds=seeds)
    return [
        ExperimentConfig("harnack_sweep", resolutions=(32, 64), fields=(FieldChoice("scalar_checkerboard", 0.5),),
                         lambdas=(1, 2, 4, 8, 16), bump_height=20.0, bump_width=0.3, **base),
        ExperimentConfig("weak_harnack", resolutions=(32,), fields=(cb,), lambdas=(1, 4, 16), **base),
        ExperimentConfig("crossover", resolutions=(32,),
                         fields=(cb, FieldChoice("scalar_checkerboard", 0.125), FieldChoice("layered", 0.25),
                                 FieldChoice("iid_random", 0.125), FieldChoice("iid_random", 0.25)),
                         lambdas=(1, 4, 16), bump_height=20.0, bump_width=0.3, **base),
        ExperimentConfig("degiorgi", resolutions=(32,), fields=(cb,), lambdas=(1, 16), **base),
        ExperimentConfig("moser", resolutions=(32,), fields=(cb,), lambdas=(1, 16), **base),
        ExperimentConfig("jn_check", resolutions=(32,), fields=(cb,), lambdas=(4, 16),
                         bump_height=20.0, bump_width=0.3, **base),
        ExperimentConfig("chain_check", resolutions=(32,), fields=(cb,), lambdas=(4,), seeds=seeds[:1], d=3),
        ExperimentConfig("cacc_check", resolutions=(16, 32, 64), fields=(cb,), lambdas=(1, 4, 16), **base),
        ExperimentConfig("extension_check", resolutions=(32, 64), seeds=(0,), d=3),
        ExperimentConfig("holder_decay", resolutions=(64,), fields=(FieldChoice("scalar_checkerboard", 1.0),),
                         lambdas=(1, 4, 16), **base),
    ]
