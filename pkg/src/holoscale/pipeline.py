"""The full experiment: diagnose, scale, classify the boundary, track the limit.

:func:`run_experiment` returns a plain dict that serialises to the report
schema; all numbers in it are Python floats so that ``json`` round trips
them exactly and repeated runs are byte-identical.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .boundary_type import (
    DiscSearch,
    TypeKind,
    collapse_check,
    dangelo_type,
    limit_boundary_fit,
    normal_form,
    unit_grid,
)
from .dsl.config import ExperimentConfig, format_config
from .errors import HoloscaleError, Inconclusive, NonConvergentRatio
from .holo_diff import (
    Case,
    classify_case,
    compact_grid,
    det_ratio_field,
    eigenpair,
    jacobian,
    op_norm,
)
from .projective import CloudCP2, Region, push_forward, sample_domain, track_limit
from .scaling import Mode, Normality, frankel_scale, growth_slope, norm_sup, normality_diagnostic, variety_scale

#: failures that are outcomes of a diagnostic rather than a broken run
SOFT_ERRORS = (Inconclusive, NonConvergentRatio)
NORMALITY_WINDOW = 7


def cx(v) -> list[float]:
    v = complex(v)
    return [float(v.real), float(v.imag)]


def num(x):
    """JSON-safe float (NaN and infinities become strings)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class RunResult:
    report: dict
    series: dict = field(default_factory=dict)      # name -> list of rows (first row = header)
    cloud: CloudCP2 | None = None
    timings: dict = field(default_factory=dict)

    @property
    def hard_errors(self) -> list[dict]:
        return [e for e in self.report["errors"] if not e.get("soft")]


class _Stages:
    def __init__(self):
        self.errors: list[dict] = []
        self.timings: dict[str, float] = {}

    def run(self, name: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except HoloscaleError as exc:
            self.errors.append({
                "stage": name,
                "op": exc.op or name,
                "type": type(exc).__name__,
                "message": str(exc),
                "soft": isinstance(exc, SOFT_ERRORS),
            })
            return None
        finally:
            self.timings[name] = time.perf_counter() - t0


def run_experiment(cfg: ExperimentConfig, *, name: str = "experiment", mode: str = "auto",
                   seed: int | None = None, jmax: int | None = None) -> RunResult:
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if jmax is not None:
        cfg = replace(cfg, jmax=jmax)
    cfg.validate()
    tol = dict(cfg.tolerances)
    fam, q, js = cfg.family, cfg.q, list(cfg.j_range)
    st = _Stages()

    grid = compact_grid(q, cfg.radius, cfg.grid, cfg.jitter, cfg.seed)
    per_j = []
    for j in js:
        row = {"j": j, "alpha": cx(fam.alpha(j))}
        J = st.run("jacobian", jacobian, fam, j, q)
        if J is not None:
            ep = eigenpair(J, tol["eig_degenerate"])
            row.update(lambda1=cx(ep.lambda1), lambda2=cx(ep.lambda2), degenerate=ep.degenerate,
                       det_q=cx(J.det), op_norm_q=num(op_norm(J)))
        M = st.run("norm_sup", norm_sup, fam, q, j, grid, tol)
        row["M"] = None if M is None else num(M)
        ratio = st.run("det_ratio_bounds", det_ratio_field, fam, j, q, grid, tol["det_degenerate"])
        row["det_ratio_min"] = None if ratio is None else num(ratio.min())
        row["det_ratio_max"] = None if ratio is None else num(ratio.max())
        per_j.append(row)

    verdicts: dict = {}
    case = st.run("classify_case", classify_case, fam, q, js, tol)
    verdicts["case"] = case.value if case is not None else "Inconclusive"

    Ms = [r["M"] for r in per_j if isinstance(r["M"], float)]
    window = Ms[-NORMALITY_WINDOW:]
    complete = len(Ms) == len(per_j)
    verdicts["normality"] = (normality_diagnostic(window, tol) if complete else Normality.INCONCLUSIVE).value
    verdicts["normality_slope"] = num(growth_slope(window)[0]) if len(window) >= 2 else None

    ratios = [(r["det_ratio_min"], r["det_ratio_max"]) for r in per_j if r["det_ratio_min"] is not None]
    if ratios:
        verdicts["det_ratio"] = {"lower": min(a for a, _ in ratios), "upper": max(b for _, b in ratios)}

    # scaling mode and limit tracking
    if mode == "auto":
        chosen = Mode.VARIETY if case == Case.ACCUMULATION_VARIETY else Mode.FRANKEL
    else:
        chosen = Mode.VARIETY if mode == "variety" else Mode.FRANKEL
    verdicts["mode"] = chosen.value
    steps = []
    for j in js:
        if chosen == Mode.FRANKEL:
            s = st.run("frankel_scale", frankel_scale, fam, q, j, tol)
        else:
            s = st.run("variety_scale", variety_scale, fam, q, j, tol, centered=True)
        if s is not None:
            steps.append((j, s.map))
    base = st.run("sample_domain", sample_domain, cfg.domain.contains, Region(q, cfg.region),
                  cfg.n_interior, cfg.seed, cfg.n_boundary)
    est = None
    if base is not None and len(steps) == len(js):
        est = st.run("track_limit", track_limit, steps, base, None, tol)
    if est is not None:
        verdicts["limit"] = est.verdict.value
        verdicts["interior_fraction"] = num(est.interior_fraction)
        for row, d, m in zip(per_j, est.step_distance, est.median_norm):
            row["hausdorff_step"] = None if math.isnan(d) else num(d)
            row["median_norm"] = num(m)
    else:
        verdicts["limit"] = "Inconclusive"

    # boundary type at the accumulation point
    series: dict = {}
    type_report = None
    nf = None
    if cfg.domain.boundary_point is not None:
        r = cfg.domain if cfg.domain.constraints else None
        if r is not None:
            nf = st.run("normal_form", normal_form, r, cfg.domain.boundary_point, cfg.domain.rho)
        if nf is not None:
            search = DiscSearch(cfg.type_degree, cfg.type_step, cfg.type_modulus)
            type_report = st.run("dangelo_type", dangelo_type, nf, search)
    verdicts["type"] = type_report.to_dict() if type_report is not None else None

    if type_report is not None and type_report.m_z_samples:
        series["m_z"] = [["abs_z", "m_z"]] + [[num(a), num(b)] for a, b in type_report.m_z_samples]
    if type_report is not None and type_report.kind == TypeKind.INFINITE_TYPE_I:
        b = [2.0 ** -j for j in js]
        col = st.run("collapse_check", collapse_check, nf.log_rho0, b, b, b, unit_grid(11), js)
        if col is not None:
            verdicts["collapse"] = {"sequences": "2^-j", "sup_jmax": num(col.sup),
                                    "log_sup_jmax": num(col.log_sup[-1]),
                                    "certified": bool(col.sup < tol["collapse"])}
            series["collapse"] = [["j", "log_sup"]] + [[j, num(v)] for j, v in zip(col.js, col.log_sup)]

    fit = None
    # the fit presupposes a normal family of scaled maps
    if (type_report is not None and type_report.kind == TypeKind.FINITE and case == Case.ACCUMULATION_POINT
            and nf is not None and verdicts["normality"] == Normality.BOUNDED.value):
        k = int(round(type_report.t_estimate))
        fit = st.run("limit_boundary_fit", limit_boundary_fit, fam, q, nf, k, js, tol)
    verdicts["limit_fit"] = fit.to_dict() if fit is not None else None

    series["per_j"] = [["j", "abs_lambda1", "abs_lambda2", "op_norm_q", "M", "det_ratio_min", "det_ratio_max",
                        "hausdorff_step"]]
    for row in per_j:
        series["per_j"].append([
            row["j"],
            num(abs(complex(*row["lambda1"]))) if "lambda1" in row else None,
            num(abs(complex(*row["lambda2"]))) if "lambda2" in row else None,
            row.get("op_norm_q"), row["M"], row["det_ratio_min"], row["det_ratio_max"], row.get("hausdorff_step"),
        ])

    cloud = None
    if base is not None and steps:
        with np.errstate(all="ignore"):
            cloud = push_forward(base, steps[-1][1])

    report = {
        "tool": {"name": "holoscale", "version": __version__},
        "name": name,
        "seed": cfg.seed,
        "config": {
            "source": format_config(cfg),
            "q": [cx(q[0]), cx(q[1])],
            "jmin": cfg.jmin,
            "jmax": cfg.jmax,
            "mode_flag": mode,
        },
        "per_j": per_j,
        "verdicts": verdicts,
        "errors": st.errors,
    }
    return RunResult(report, series, cloud, st.timings)
