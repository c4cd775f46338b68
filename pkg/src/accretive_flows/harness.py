"""Empirical verification of certified rates against independent oracles.

Every ``verify_*`` function probes a certificate on a finite time grid and
returns a Report whose rows carry the certified bound, the worst observed
deviation, and a status:

* PASS            -- observed deviation within the certified target,
* PASS-WITH-SLACK -- within target + tol + 2 * (trajectory error bound),
* FAIL            -- beyond the slack.

Continuous quantifiers are necessarily sampled; the report records grid step
and horizon so failures can be refined.  Flow values are taken from the
operators' closed forms (exact oracles) so that observed deviations measure
the certificates, not the evaluator.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, asdict
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, ResourceLimitError
from .moduli import (
    FullModulus,
    RateFn,
    check_full_modulus,
    full_modulus_from_dyadic,
    full_modulus_linear,
    full_modulus_min_eigenvalue,
    full_modulus_quartic_well,
    full_modulus_strongly_accretive,
    rate_from_spec,
    rate_label,
    theta_scaled_identity,
    weak_from_full,
)
from .operators import (
    AccretiveOperator,
    GraphPair,
    dirichlet_laplacian_1d,
    make_quartic_well,
    make_scaled_identity,
    make_spd_linear,
)
from .rates import (
    CertifiedThreshold,
    ConstantFunctional,
    FromRateFunctional,
    NRInputs,
    XuInputs,
    almost_orbit_cauchy_threshold,
    orbit_cauchy_threshold,
    closure_cauchy_threshold,
    orbit_metastability_bound,
    pairing_dip_rate,
    projection_modulus_from_convexity,
    projection_modulus_identity,
)
from .semigroup import AlmostOrbit, evaluate_oracle_many, make_almost_orbit
from .space import as_point, norm

__all__ = [
    "PASS",
    "PASS_WITH_SLACK",
    "FAIL",
    "ReportRow",
    "Report",
    "verify_integrable_dip",
    "verify_flow_pairing_dip",
    "verify_cauchy_rate",
    "verify_orbit_cauchy",
    "verify_metastability",
    "verify_almost_orbit_rate",
    "CertifiedSequence",
    "empirical_rate_of_convergence",
    "certified_graph_sequence",
    "registered_pairs",
    "build_operator",
    "build_full_modulus",
    "ExperimentConfig",
    "run_experiment",
    "instance_listing",
]

PASS = "PASS"
PASS_WITH_SLACK = "PASS-WITH-SLACK"
FAIL = "FAIL"

#: verify_cauchy_rate refuses grids beyond this
MAX_GRID_POINTS = 10**6
#: verify_metastability refuses to evaluate more points than this per cell
MAX_WINDOW_EVALS = 10**7


def _status(observed: float, target: float, slack: float) -> str:
    if observed <= target:
        return PASS
    if observed <= target + slack:
        return PASS_WITH_SLACK
    return FAIL


def _plain(obj):
    """Recursively convert to JSON-serializable python primitives."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    return str(obj)


@dataclass
class ReportRow:
    k: int
    counterfunction: str
    certified_bound: float
    worst_observed: float
    target: float
    slack: float
    status: str
    witness: int | None = None
    detail: dict = field(default_factory=dict)


@dataclass
class Report:
    """Outcome of one verification scenario.

    ``runtime_seconds`` is measured but excluded from serialization so that
    identical runs produce byte-identical reports.
    """

    scenario: str
    rows: list[ReportRow] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    seed: int | None = None
    config: dict | None = None
    runtime_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations and all(r.status != FAIL for r in self.rows)

    def to_dict(self) -> dict:
        rows = [_plain(asdict(r)) for r in self.rows]
        n_slack = sum(1 for r in self.rows if r.status == PASS_WITH_SLACK)
        n_fail = sum(1 for r in self.rows if r.status == FAIL)
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "seed": self.seed,
            "grid": _plain(self.grid),
            "provenance": _plain(self.provenance),
            "rows": rows,
            "violations": _plain(self.violations),
            "summary": {"rows": len(rows), "failures": n_fail, "pass_with_slack": n_slack},
            "config": _plain(self.config) if self.config is not None else None,
        }


def _diameter(points: np.ndarray) -> tuple[float, str]:
    """Largest pairwise distance among row vectors, with the method used.

    Exact for 1-d data and for moderate point counts; otherwise the sound
    upper bound 2 * max distance to the centroid is reported.
    """
    n, d = points.shape
    if n <= 1:
        return 0.0, "exact"
    if d == 1:
        col = points[:, 0]
        return float(col.max() - col.min()), "exact"
    if n <= 4096:
        best = 0.0
        for i in range(0, n, 512):
            diff = points[i:i + 512, None, :] - points[None, :, :]
            best = max(best, float(np.sqrt((diff ** 2).sum(-1)).max()))
        return best, "exact"
    centroid = points.mean(axis=0)
    r = float(np.linalg.norm(points - centroid, axis=1).max())
    return 2.0 * r, "centroid-upper-bound"


def _window_grid(lo: float, hi: float, step: float) -> np.ndarray:
    ts = np.arange(lo, hi + step / 2, step)
    if ts.size == 0 or ts[-1] < hi - 1e-12:
        ts = np.append(ts, hi)
    return ts


# ------------------------------------------------------------ dip verifiers

def verify_integrable_dip(
    f: Callable[[float], float],
    L: float,
    k_max: int,
    n_max: int,
    grid_step: float = 0.25,
    tol: float = 1e-9,
) -> Report:
    """For f >= 0 with integral <= L: every window [n, ceil(L+1)(k+1)+n]
    must contain a grid point where f <= 1/(k+1) + tol."""
    start = time.perf_counter()
    width_mult = math.ceil(L + 1)
    report = Report(
        scenario="integrable-dip",
        provenance={"L": L, "window": "ceil(L+1)*(k+1)+n"},
        grid={"grid_step": grid_step, "k_max": k_max, "n_max": n_max},
    )
    for k in range(k_max + 1):
        target = 1.0 / (k + 1)
        worst = 0.0
        for n in range(n_max + 1):
            ts = _window_grid(n, width_mult * (k + 1) + n, grid_step)
            best = min(float(f(float(t))) for t in ts)
            worst = max(worst, best)
            if best > target + tol:
                report.violations.append({"k": k, "n": n, "best": best})
        report.rows.append(ReportRow(
            k=k, counterfunction="-", certified_bound=float(width_mult * (k + 1)),
            worst_observed=worst, target=target, slack=tol,
            status=_status(worst, target, tol),
        ))
    report.runtime_seconds = time.perf_counter() - start
    return report


def verify_flow_pairing_dip(
    op: AccretiveOperator,
    x,
    b: int,
    k_max: int,
    n_max: int = 10,
    grid_step: float = 0.25,
    tol: float = 1e-9,
) -> Report:
    """Along the flow from x with ||x - Px|| <= b, every window
    [n, ceil(b^2/2+1)(k+1)+n] must contain a grid point where the pairing
    <A w(t), w(t) - Pw(t)> <= 1/(k+1) + tol."""
    start = time.perf_counter()
    x = as_point(x)
    dip = pairing_dip_rate(b)
    report = Report(
        scenario="flow-pairing-dip",
        provenance={"operator": op.name, "b": int(b), "window": "ceil(b^2/2+1)*(k+1)+n"},
        grid={"grid_step": grid_step, "k_max": k_max, "n_max": n_max},
    )
    for k in range(k_max + 1):
        target = 1.0 / (k + 1)
        worst = 0.0
        for n in range(n_max + 1):
            ts = _window_grid(n, dip(k) + n, grid_step)
            W = evaluate_oracle_many(op, x, ts)
            V = op.value_many(W)
            J = W - op.zero_projection_many(W)
            vals = np.einsum("ij,ij->i", V, J)
            best = float(vals.min())
            worst = max(worst, best)
            if best > target + tol:
                report.violations.append({"k": k, "n": n, "best": best})
        report.rows.append(ReportRow(
            k=k, counterfunction="-", certified_bound=float(dip(k)),
            worst_observed=worst, target=target, slack=tol,
            status=_status(worst, target, tol),
        ))
    report.runtime_seconds = time.perf_counter() - start
    return report


# --------------------------------------------------------- Cauchy verifiers

def _verify_pairwise(
    scenario: str,
    curve_many: Callable[[np.ndarray], np.ndarray],
    threshold: Callable[[int], int],
    k_range: Sequence[int],
    grid_step: float,
    horizon_pad: float,
    tol: float,
    err_bound: float = 0.0,
    provenance: dict | None = None,
) -> Report:
    start = time.perf_counter()
    ks = sorted(int(k) for k in k_range)
    thresholds = {k: int(threshold(k)) for k in ks}
    t_lo = min(thresholds.values())
    horizon = max(thresholds.values()) + horizon_pad
    grid = np.arange(t_lo, horizon + grid_step / 2, grid_step)
    if grid.size > MAX_GRID_POINTS:
        raise ResourceLimitError(
            f"horizon {horizon} at step {grid_step} needs {grid.size} grid points"
        )
    points = curve_many(grid)
    slack = tol + 2.0 * err_bound
    report = Report(
        scenario=scenario,
        provenance=dict(provenance or {}),
        grid={"grid_step": grid_step, "horizon": float(horizon), "points": int(grid.size),
              "err_bound": err_bound},
    )
    for k in ks:
        idx = int(np.searchsorted(grid, thresholds[k] - 1e-9))
        extent, mode = _diameter(points[idx:])
        target = 1.0 / (k + 1)
        status = _status(extent, target, slack)
        report.rows.append(ReportRow(
            k=k, counterfunction="-", certified_bound=float(thresholds[k]),
            worst_observed=extent, target=target, slack=slack, status=status,
            detail={"pairs": mode},
        ))
        if status == FAIL:
            report.violations.append({"k": k, "threshold": thresholds[k], "extent": extent})
    report.runtime_seconds = time.perf_counter() - start
    return report


def verify_cauchy_rate(
    op: AccretiveOperator,
    x,
    threshold: CertifiedThreshold,
    k_range: Sequence[int],
    grid_step: float = 0.25,
    horizon_pad: float = 10.0,
    tol: float = 1e-9,
) -> Report:
    """Check ||S(s)x - S(s')x|| <= 1/(k+1) for all grid pairs s, s' beyond
    threshold(k), against the operator's exact flow."""
    x = as_point(x)
    return _verify_pairwise(
        scenario="cauchy-rate",
        curve_many=lambda ts: evaluate_oracle_many(op, x, ts),
        threshold=threshold,
        k_range=k_range,
        grid_step=grid_step,
        horizon_pad=horizon_pad,
        tol=tol,
        provenance={"operator": op.name, **getattr(threshold, "provenance", {})},
    )


def verify_orbit_cauchy(
    u: AlmostOrbit,
    threshold: Callable[[int], int],
    k_range: Sequence[int],
    grid_step: float = 0.25,
    horizon_pad: float = 10.0,
    tol: float = 1e-9,
    provenance: dict | None = None,
) -> Report:
    """Check ||u(t) - u(t')|| <= 1/(k+1) for all grid pairs beyond threshold(k)."""
    return _verify_pairwise(
        scenario="orbit-cauchy",
        curve_many=u.evaluate_many,
        threshold=threshold,
        k_range=k_range,
        grid_step=grid_step,
        horizon_pad=horizon_pad,
        tol=tol,
        provenance=provenance or {},
    )


# ---------------------------------------------------- metastability verifier

def verify_metastability(
    u: AlmostOrbit,
    gamma_bound: Callable[[int, RateFn], int],
    k_range: Sequence[int],
    counterfunctions: Sequence[RateFn],
    grid_step: float = 0.25,
    tol: float = 1e-9,
) -> Report:
    """For each k and counterfunction f, search n <= gamma_bound(k, f) for a
    window [n, n + f(n)] on which the orbit moves at most 1/(k+1) + tol;
    report the witnessing n."""
    start = time.perf_counter()
    report = Report(
        scenario="metastability",
        grid={"grid_step": grid_step},
        provenance={"operator": u.operator.name, "B": u.bound_B},
    )
    for k in sorted(int(k) for k in k_range):
        target = 1.0 / (k + 1)
        for f in counterfunctions:
            bound = int(gamma_bound(k, f))
            budget = MAX_WINDOW_EVALS
            witness = None
            observed = math.inf
            for n in range(bound + 1):
                ts = _window_grid(n, n + int(f(n)), grid_step)
                budget -= ts.size
                if budget < 0:
                    raise ResourceLimitError(
                        f"metastability search at k={k} exceeded the evaluation budget"
                    )
                extent, _ = _diameter(u.evaluate_many(ts))
                observed = min(observed, extent)
                if extent <= target + tol:
                    witness = n
                    observed = extent
                    break
            status = _status(observed, target, tol) if witness is not None else FAIL
            report.rows.append(ReportRow(
                k=k, counterfunction=rate_label(f), certified_bound=float(bound),
                worst_observed=float(observed), target=target, slack=tol,
                status=status, witness=witness,
            ))
            if witness is None:
                report.violations.append(
                    {"k": k, "counterfunction": rate_label(f), "bound": bound}
                )
    report.runtime_seconds = time.perf_counter() - start
    return report


def verify_almost_orbit_rate(
    u: AlmostOrbit,
    k_max: int,
    horizon: float,
    grid_step: float = 0.25,
    tol: float = 1e-9,
) -> Report:
    """Check the defect rate of an almost-orbit: for every integer
    s in [rate_phi(k), horizon], sup over the t-grid of
    ||u(s+t) - S(t)u(s)|| must stay below 1/(k+1) + tol."""
    start = time.perf_counter()
    report = Report(
        scenario="almost-orbit-rate",
        grid={"grid_step": grid_step, "horizon": horizon},
        provenance={"operator": u.operator.name, "rate": rate_label(u.rate_phi)},
    )
    ts = np.arange(0.0, horizon + grid_step / 2, grid_step)
    for k in range(k_max + 1):
        s0 = int(u.rate_phi(k))
        target = 1.0 / (k + 1)
        worst = 0.0
        for s in range(s0, int(math.floor(horizon)) + 1):
            flowed = evaluate_oracle_many(u.operator, u.evaluate(float(s)), ts)
            along = u.evaluate_many(ts + float(s))
            defect = float(np.linalg.norm(along - flowed, axis=1).max())
            worst = max(worst, defect)
        status = _status(worst, target, tol)
        report.rows.append(ReportRow(
            k=k, counterfunction="-", certified_bound=float(s0),
            worst_observed=worst, target=target, slack=tol, status=status,
        ))
        if status == FAIL:
            report.violations.append({"k": k, "s_from": s0, "worst": worst})
    report.runtime_seconds = time.perf_counter() - start
    return report


# ------------------------------------------------------ certified sequences

@dataclass(frozen=True)
class CertifiedSequence:
    """A graph-pair sequence with an empirically certified pairing rate."""

    pairs: tuple[GraphPair, ...]
    phi: RateFn
    K: int


def empirical_rate_of_convergence(values: Sequence[float]) -> RateFn:
    """Rate derived from suffix maxima of observed values.

    phi(k) is the first index from which every later observed value stays
    below 1/(k+1).  Thresholds never reached in the data map to len(values),
    so downstream window checks fail loudly ("sequence too short") instead
    of trusting an uncertified level.
    """
    arr = np.asarray(list(values), dtype=float)
    suffix = np.maximum.accumulate(arr[::-1])[::-1]

    def phi(k: int) -> int:
        thr = 1.0 / (k + 1)
        idx = np.searchsorted(-suffix, -thr)  # suffix is nonincreasing
        return int(min(idx, len(suffix)))

    phi.label = "empirical"
    return phi


def certified_graph_sequence(
    op: AccretiveOperator, x0, count: int = 64, spacing: float = 1.0
) -> CertifiedSequence:
    """Graph pairs sampled along the exact flow from x0 at unit-ish spacing,
    with the pairing rate certified from the data itself."""
    x0 = as_point(x0)
    ts = np.arange(count, dtype=float) * spacing
    X = evaluate_oracle_many(op, x0, ts)
    Y = op.value_many(X)
    PX = op.zero_projection_many(X)
    pairings = np.abs(np.einsum("ij,ij->i", Y, X - PX))
    K = int(math.ceil(max(
        float(np.linalg.norm(X, axis=1).max()),
        float(np.linalg.norm(Y, axis=1).max()),
    )))
    phi = empirical_rate_of_convergence(pairings)
    pairs = tuple(GraphPair(x, y) for x, y in zip(X, Y))
    return CertifiedSequence(pairs=pairs, phi=phi, K=max(K, 1))


# ---------------------------------------------------------------- registry

def _require(spec: dict, key: str, field_name: str):
    if key not in spec:
        raise ConfigurationError(field_name, f"missing required key '{key}'")
    return spec[key]


def build_operator(spec: dict) -> AccretiveOperator:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigurationError("operator", "must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "scaled-identity":
            return make_scaled_identity(float(spec.get("alpha", 1.0)), int(spec.get("dim", 1)))
        if kind == "spd":
            return make_spd_linear(np.asarray(_require(spec, "matrix", "operator.matrix"), dtype=float))
        if kind == "spd-laplacian-1d":
            return make_spd_linear(dirichlet_laplacian_1d(int(_require(spec, "size", "operator.size"))))
        if kind == "quartic-well":
            return make_quartic_well()
    except (ValueError, TypeError) as exc:
        raise ConfigurationError("operator", str(exc)) from exc
    raise ConfigurationError("operator.kind", f"unknown operator kind '{kind}'")


def build_full_modulus(spec: dict) -> FullModulus:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigurationError("modulus", "must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "strongly-accretive":
            return full_modulus_strongly_accretive(int(_require(spec, "a", "modulus.a")))
        if kind == "laplacian":
            return full_modulus_min_eigenvalue(int(_require(spec, "Lambda", "modulus.Lambda")))
        if kind == "quartic-well":
            return full_modulus_quartic_well()
        if kind == "linear-k":
            return full_modulus_linear()
        if kind == "dyadic-scaled-identity":
            theta = theta_scaled_identity(float(spec.get("alpha", 1.0)))
            return full_modulus_from_dyadic(theta, int(spec.get("Z", 0)))
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError("modulus", str(exc)) from exc
    raise ConfigurationError("modulus.kind", f"unknown modulus kind '{kind}'")


def registered_pairs() -> list[tuple[str, AccretiveOperator, FullModulus]]:
    """The canonical operator/modulus zoo used by conversion-chain checks."""
    return [
        ("scaled-identity+strongly-accretive",
         make_scaled_identity(1.0, 1), full_modulus_strongly_accretive(1)),
        ("spd-laplacian-1d+laplacian",
         make_spd_linear(dirichlet_laplacian_1d(4)), full_modulus_min_eigenvalue(3)),
        ("quartic-well+quartic-well",
         make_quartic_well(), full_modulus_quartic_well()),
        ("scaled-identity+dyadic-chain",
         make_scaled_identity(1.0, 2),
         full_modulus_from_dyadic(theta_scaled_identity(1.0), 0)),
    ]


def instance_listing() -> str:
    lines = ["operators:"]
    lines += [f"  scaled-identity      params: alpha (>0), dim (>=1)",
              f"  spd                  params: matrix (symmetric positive definite)",
              f"  spd-laplacian-1d     params: size (tridiagonal -1,2,-1)",
              f"  quartic-well         params: none (scalar, zero set [-1,1])"]
    lines.append("moduli:")
    lines += [f"  strongly-accretive   params: a (integer >= ceil(1/alpha))",
              f"  laplacian            params: Lambda (integer >= 1/lambda_min)",
              f"  quartic-well         params: none",
              f"  linear-k             params: none (deliberately weak; counterexamples)",
              f"  dyadic-scaled-identity  params: alpha, Z"]
    lines.append("registered operator+modulus pairs:")
    for name, op, full in registered_pairs():
        lines.append(f"  {name}  ({op.name} with {rate_label(full)})")
    return "\n".join(lines)


# ------------------------------------------------------------- experiments

_SCENARIOS = ("nr", "nr-closure", "xu-meta", "xu-roc", "modulus-check", "liminf-check")

_INTEGRANDS = {
    "inv-square": lambda t: 1.0 / (1.0 + t) ** 2,
    "zero": lambda t: 0.0,
}


@dataclass
class ExperimentConfig:
    """Declarative description of one verification experiment."""

    scenario: str
    operator: dict | None = None
    initial_point: list | None = None
    modulus: dict | None = None
    k_range: tuple[int, int] = (0, 3)
    counterfunctions: list = field(default_factory=list)
    grid_step: float = 0.25
    horizon_pad: float = 10.0
    tolerance: float = 1e-9
    seed: int | None = None
    bound_K: int | None = None
    samples: dict | None = None
    almost_orbit: dict | None = None
    omega: dict | None = None
    phi: dict | None = None
    closure: dict | None = None
    liminf: dict | None = None

    _KNOWN = (
        "scenario", "operator", "initial_point", "modulus", "k_range",
        "counterfunctions", "grid_step", "horizon_pad", "tolerance", "seed",
        "bound_K", "samples", "almost_orbit", "omega", "phi", "closure", "liminf",
    )

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigurationError("<root>", "config must be a JSON object")
        for key in raw:
            if key not in cls._KNOWN:
                raise ConfigurationError(key, "unknown config field")
        scenario = raw.get("scenario")
        if scenario not in _SCENARIOS:
            raise ConfigurationError(
                "scenario", f"must be one of {', '.join(_SCENARIOS)}; got {scenario!r}"
            )
        cfg = cls(scenario=scenario)
        for key in cls._KNOWN[1:]:
            if key in raw and raw[key] is not None:
                setattr(cfg, key, raw[key])
        try:
            lo, hi = (int(v) for v in cfg.k_range)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError("k_range", "must be a [lo, hi] integer pair") from exc
        if lo < 0 or hi < lo:
            raise ConfigurationError("k_range", f"invalid range [{lo}, {hi}]")
        cfg.k_range = (lo, hi)
        cfg.grid_step = float(cfg.grid_step)
        if cfg.grid_step <= 0:
            raise ConfigurationError("grid_step", "must be positive")
        cfg.horizon_pad = float(cfg.horizon_pad)
        if cfg.horizon_pad < 0:
            raise ConfigurationError("horizon_pad", "must be nonnegative")
        cfg.tolerance = float(cfg.tolerance)
        if cfg.tolerance <= 0:
            raise ConfigurationError("tolerance", "must be positive")
        if cfg.seed is not None:
            cfg.seed = int(cfg.seed)
        return cfg

    def to_dict(self) -> dict:
        out = {}
        for key in self._KNOWN:
            val = getattr(self, key)
            if val is None or (key == "counterfunctions" and not val):
                continue
            out[key] = _plain(val) if not isinstance(val, tuple) else list(val)
        return out


def _cfg_point(cfg: ExperimentConfig):
    if cfg.initial_point is None:
        raise ConfigurationError("initial_point", "required for this scenario")
    try:
        return as_point(cfg.initial_point)
    except ValueError as exc:
        raise ConfigurationError("initial_point", str(exc)) from exc


def _cfg_weak_modulus(cfg: ExperimentConfig):
    if cfg.modulus is None:
        raise ConfigurationError("modulus", "required for this scenario")
    return weak_from_full(build_full_modulus(cfg.modulus))


def _cfg_orbit(cfg: ExperimentConfig, op: AccretiveOperator) -> AlmostOrbit:
    spec = cfg.almost_orbit or {}
    try:
        c = float(spec.get("c", 0.0))
        direction = spec.get("direction")
        if direction is None:
            direction = [0.0] * op.dim
            direction[0] = 1.0
        return make_almost_orbit(op, _cfg_point(cfg), c, direction)
    except ValueError as exc:
        raise ConfigurationError("almost_orbit", str(exc)) from exc


def _cfg_omega(cfg: ExperimentConfig):
    spec = cfg.omega or {"kind": "identity"}
    kind = spec.get("kind")
    if kind == "identity":
        return projection_modulus_identity()
    if kind == "from-convexity":
        return projection_modulus_from_convexity()
    raise ConfigurationError("omega.kind", f"unknown projection modulus kind '{kind}'")


def _cfg_functional(cfg: ExperimentConfig):
    """Metastability functional from config; None means the orbit's own rate."""
    spec = cfg.phi
    if spec is None or spec.get("kind") == "orbit-rate":
        return None
    kind = spec.get("kind")
    try:
        if kind == "from-rate":
            return FromRateFunctional(rate_from_spec(_require(spec, "rate", "phi.rate")))
        if kind == "constant":
            return ConstantFunctional(int(_require(spec, "value", "phi.value")))
    except ValueError as exc:
        raise ConfigurationError("phi", str(exc)) from exc
    raise ConfigurationError("phi.kind", f"unknown functional kind '{kind}'")


def _cfg_counterfunctions(cfg: ExperimentConfig):
    specs = cfg.counterfunctions or ["id"]
    try:
        return [rate_from_spec(s) for s in specs]
    except ValueError as exc:
        raise ConfigurationError("counterfunctions", str(exc)) from exc


def _run_modulus_check(cfg: ExperimentConfig) -> Report:
    start = time.perf_counter()
    op = build_operator(cfg.operator if cfg.operator is not None else {})
    full = build_full_modulus(cfg.modulus if cfg.modulus is not None else {})
    if cfg.bound_K is None:
        raise ConfigurationError("bound_K", "required for modulus-check")
    K = int(cfg.bound_K)
    lo, hi = cfg.k_range
    samples = cfg.samples or {"kind": "seeded", "count": 1000}
    kind = samples.get("kind")
    if kind == "seeded":
        inner = check_full_modulus(
            op, full, K, hi, cfg.tolerance,
            n_samples=int(samples.get("count", 1000)), seed=int(cfg.seed or 0),
        )
    elif kind == "grid":
        try:
            pts = np.arange(float(samples["lo"]), float(samples["hi"]) + float(samples["step"]) / 2,
                            float(samples["step"]))
        except KeyError as exc:
            raise ConfigurationError("samples", f"grid sampling needs lo/hi/step ({exc})") from exc
        inner = check_full_modulus(op, full, K, hi, cfg.tolerance, points=pts)
    else:
        raise ConfigurationError("samples.kind", f"unknown sampling kind '{kind}'")

    report = Report(
        scenario="modulus-check", seed=cfg.seed, config=cfg.to_dict(),
        provenance={"operator": op.name, "modulus": inner.modulus, "K": K,
                    "n_pairs": inner.n_pairs},
        grid={"k_range": list(cfg.k_range), "sampling": _plain(samples)},
    )
    for entry in inner.per_k:
        k = entry["k"]
        if k < lo:
            continue
        target = 1.0 / (k + 1)
        status = FAIL if entry["n_violations"] else _status(
            entry["worst_gap_under_premise"], target, cfg.tolerance)
        report.rows.append(ReportRow(
            k=k, counterfunction="-", certified_bound=entry["premise_threshold"],
            worst_observed=entry["worst_gap_under_premise"], target=target,
            slack=cfg.tolerance, status=status,
            detail={"n_premise": entry["n_premise"], "n_violations": entry["n_violations"]},
        ))
    report.violations = _plain(inner.violations)
    report.runtime_seconds = time.perf_counter() - start
    return report


def _run_liminf_check(cfg: ExperimentConfig) -> Report:
    spec = cfg.liminf or {}
    form = spec.get("form")
    lo, hi = cfg.k_range
    n_max = int(spec.get("n_max", 10))
    if form == "integral":
        name = spec.get("integrand", "inv-square")
        if name not in _INTEGRANDS:
            raise ConfigurationError("liminf.integrand", f"unknown integrand '{name}'")
        if "bound_L" not in spec:
            raise ConfigurationError("liminf.bound_L", "required for the integral form")
        report = verify_integrable_dip(
            _INTEGRANDS[name], float(spec["bound_L"]), hi, n_max,
            grid_step=cfg.grid_step, tol=cfg.tolerance,
        )
    elif form == "flow-pairing":
        op = build_operator(cfg.operator if cfg.operator is not None else {})
        x = _cfg_point(cfg)
        b = int(spec.get("b", math.ceil(norm(x - op.zero_projection(x)))))
        report = verify_flow_pairing_dip(
            op, x, b, hi, n_max, grid_step=cfg.grid_step, tol=cfg.tolerance,
        )
    else:
        raise ConfigurationError("liminf.form", "must be 'integral' or 'flow-pairing'")
    report.rows = [r for r in report.rows if r.k >= lo]
    report.seed = cfg.seed
    report.config = cfg.to_dict()
    return report


def _run_nr(cfg: ExperimentConfig) -> Report:
    op = build_operator(cfg.operator if cfg.operator is not None else {})
    x = _cfg_point(cfg)
    weak = _cfg_weak_modulus(cfg)
    inputs = NRInputs.from_point(op, x, weak)
    threshold = orbit_cauchy_threshold(inputs)
    lo, hi = cfg.k_range
    report = verify_cauchy_rate(
        op, x, threshold, range(lo, hi + 1),
        grid_step=cfg.grid_step, horizon_pad=cfg.horizon_pad, tol=cfg.tolerance,
    )
    report.scenario = "nr"
    report.seed = cfg.seed
    report.config = cfg.to_dict()
    return report


def _run_nr_closure(cfg: ExperimentConfig) -> Report:
    op = build_operator(cfg.operator if cfg.operator is not None else {})
    x = _cfg_point(cfg)
    weak = _cfg_weak_modulus(cfg)
    spec = cfg.closure
    if spec is None:
        raise ConfigurationError("closure", "required for nr-closure")
    try:
        f = rate_from_spec(_require(spec, "f", "closure.f"))
        p_norm = int(spec.get("p_norm", math.ceil(norm(op.zero_witness()))))
        x_norm = int(spec.get("x_norm_bound", math.ceil(norm(x))))
        x_dist = int(spec.get("x_dist_bound", math.ceil(norm(x - op.zero_projection(x)))))
    except ValueError as exc:
        raise ConfigurationError("closure", str(exc)) from exc
    threshold = closure_cauchy_threshold(weak, f, p_norm, x_norm, x_dist)
    lo, hi = cfg.k_range
    report = verify_cauchy_rate(
        op, x, threshold, range(lo, hi + 1),
        grid_step=cfg.grid_step, horizon_pad=cfg.horizon_pad, tol=cfg.tolerance,
    )
    report.scenario = "nr-closure"
    report.seed = cfg.seed
    report.config = cfg.to_dict()
    return report


def _run_xu_meta(cfg: ExperimentConfig) -> Report:
    op = build_operator(cfg.operator if cfg.operator is not None else {})
    orbit = _cfg_orbit(cfg, op)
    weak = _cfg_weak_modulus(cfg)
    inputs = XuInputs.from_orbit(
        orbit, weak, omega=_cfg_omega(cfg), functional=_cfg_functional(cfg)
    )
    lo, hi = cfg.k_range
    report = verify_metastability(
        orbit,
        lambda k, f: orbit_metastability_bound(inputs, k, f),
        range(lo, hi + 1),
        _cfg_counterfunctions(cfg),
        grid_step=cfg.grid_step,
        tol=cfg.tolerance,
    )
    report.scenario = "xu-meta"
    report.provenance.update(_plain(inputs.provenance))
    report.seed = cfg.seed
    report.config = cfg.to_dict()
    return report


def _run_xu_roc(cfg: ExperimentConfig) -> Report:
    op = build_operator(cfg.operator if cfg.operator is not None else {})
    orbit = _cfg_orbit(cfg, op)
    weak = _cfg_weak_modulus(cfg)
    if cfg.phi is not None and (cfg.phi or {}).get("kind") not in (None, "orbit-rate"):
        raise ConfigurationError("phi", "xu-roc uses the orbit's own defect rate")
    inputs = XuInputs.from_orbit(orbit, weak, omega=_cfg_omega(cfg))
    lo, hi = cfg.k_range
    report = verify_orbit_cauchy(
        orbit,
        lambda k: almost_orbit_cauchy_threshold(inputs, k),
        range(lo, hi + 1),
        grid_step=cfg.grid_step,
        horizon_pad=cfg.horizon_pad,
        tol=cfg.tolerance,
        provenance=_plain(inputs.provenance),
    )
    report.scenario = "xu-roc"
    report.seed = cfg.seed
    report.config = cfg.to_dict()
    return report


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Dispatch a configured scenario: build operator -> moduli -> rates ->
    verify, returning the scenario Report."""
    runner = {
        "modulus-check": _run_modulus_check,
        "liminf-check": _run_liminf_check,
        "nr": _run_nr,
        "nr-closure": _run_nr_closure,
        "xu-meta": _run_xu_meta,
        "xu-roc": _run_xu_roc,
    }[cfg.scenario]
    return runner(cfg)
