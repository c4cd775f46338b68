"""Accretive operator instances: resolvents, zero projections, graph sampling.

An operator ``A`` here is accretive on R^d: ``<u - v, x - y> >= 0`` for all
graph pairs ``(x, u), (y, v)``.  Its resolvent ``(Id + gamma A)^{-1}`` is one
implicit-Euler step of the flow ``u' = -Au``; it is single-valued and
nonexpansive precisely for accretive operators, and its fixed points are the
zeros of ``A``.  Each instance exposes:

* ``resolvent(gamma, x)``       -- the implicit-Euler step,
* ``zero_projection(x)``        -- nearest point of the zero set,
* ``value(x)``                  -- ``Ax`` where ``A`` is single-valued,
* ``zero_witness()``            -- some ``p`` with ``0 in Ap``,
* ``exact_flow(x, t)``          -- closed-form flow, where one exists,
* ``sample_graph(seed, bound)`` -- a random graph pair within a norm bound.

The closed-form flows double as independent oracles for the verification
harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError
from .space import as_point, norm, pairing

__all__ = [
    "GraphPair",
    "AccretiveOperator",
    "ScaledIdentity",
    "SPDLinear",
    "QuarticWell",
    "make_scaled_identity",
    "make_spd_linear",
    "make_quartic_well",
    "dirichlet_laplacian_1d",
    "sample_graph_pairs",
    "graph_residual",
    "check_accretive",
    "AccretivityReport",
]


@dataclass(frozen=True)
class GraphPair:
    """A pair (x, y) with y in Ax, up to the owning operator's residual tolerance."""

    x: np.ndarray
    y: np.ndarray


class AccretiveOperator:
    """Base interface; instances are immutable and all methods are pure."""

    name: str = "abstract"
    dim: int = 0

    def resolvent(self, gamma: float, x) -> np.ndarray:
        raise NotImplementedError

    def zero_projection(self, x) -> np.ndarray:
        raise NotImplementedError

    def value(self, x) -> np.ndarray:
        """Ax where A is single-valued; optional capability."""
        raise NotImplementedError(f"{self.name} has no single-valued evaluation")

    def zero_witness(self) -> np.ndarray:
        raise NotImplementedError

    def exact_flow(self, x, t: float) -> np.ndarray:
        """Closed-form flow value; optional capability."""
        raise NotImplementedError(f"{self.name} has no closed-form flow")

    def exact_flow_many(self, x, ts: np.ndarray) -> np.ndarray:
        """Closed-form flow at many times; rows follow ``ts``."""
        return np.stack([self.exact_flow(x, float(t)) for t in np.asarray(ts)])

    def graph_norm_bound(self, radius: float) -> int:
        """Integer G with max(||x||, ||value(x)||) <= G whenever
        ||x - zero_witness()|| <= radius."""
        raise NotImplementedError

    def zero_projection_many(self, X: np.ndarray) -> np.ndarray:
        return np.stack([self.zero_projection(row) for row in X])

    def value_many(self, X: np.ndarray) -> np.ndarray:
        return np.stack([self.value(row) for row in X])

    def sample_graph(self, seed: int, bound: float) -> GraphPair:
        return sample_graph_pairs(self, seed, bound, 1)[0]

    def _check_dim(self, x) -> np.ndarray:
        x = as_point(x)
        if x.shape[0] != self.dim:
            raise ValueError(f"{self.name} acts on R^{self.dim}, got {x.shape[0]}-d point")
        return x


class ScaledIdentity(AccretiveOperator):
    """Ax = alpha * x with alpha > 0; strongly accretive, zero set {0}.

    Closed forms: resolvent(gamma, x) = x / (1 + gamma*alpha) and
    flow S(t)x = exp(-alpha t) x.
    """

    def __init__(self, alpha: float, dim: int):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.alpha = float(alpha)
        self.dim = int(dim)
        self.name = f"scaled-identity(alpha={self.alpha:g}, d={self.dim})"

    def resolvent(self, gamma, x):
        x = self._check_dim(x)
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return x / (1.0 + gamma * self.alpha)

    def zero_projection(self, x):
        self._check_dim(x)
        return np.zeros(self.dim)

    def zero_projection_many(self, X):
        return np.zeros_like(np.asarray(X, dtype=float))

    def value(self, x):
        return self.alpha * self._check_dim(x)

    def value_many(self, X):
        return self.alpha * np.asarray(X, dtype=float)

    def zero_witness(self):
        return np.zeros(self.dim)

    def exact_flow(self, x, t):
        return math.exp(-self.alpha * t) * self._check_dim(x)

    def exact_flow_many(self, x, ts):
        x = self._check_dim(x)
        ts = np.asarray(ts, dtype=float)
        return np.exp(-self.alpha * ts)[:, None] * x[None, :]

    def graph_norm_bound(self, radius):
        return int(math.ceil(max(1.0, self.alpha) * radius))


class SPDLinear(AccretiveOperator):
    """Ax = Mx for a symmetric positive-definite matrix M.

    Strongly accretive with constant lambda_min(M); zero set {0}.  The
    resolvent solves (Id + gamma M) z = x directly, and the flow is the
    matrix exponential exp(-tM) x evaluated through the eigendecomposition.
    """

    def __init__(self, M):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("M must be a square matrix")
        if not np.allclose(M, M.T, atol=1e-12):
            raise ValueError("M must be symmetric")
        try:
            np.linalg.cholesky(M)
        except np.linalg.LinAlgError as exc:
            raise ValueError("M must be positive definite") from exc
        self.M = M
        self.dim = M.shape[0]
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(M)
        self.name = f"spd-linear(d={self.dim})"

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def resolvent(self, gamma, x):
        x = self._check_dim(x)
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return np.linalg.solve(np.eye(self.dim) + gamma * self.M, x)

    def zero_projection(self, x):
        self._check_dim(x)
        return np.zeros(self.dim)

    def zero_projection_many(self, X):
        return np.zeros_like(np.asarray(X, dtype=float))

    def value(self, x):
        return self.M @ self._check_dim(x)

    def value_many(self, X):
        return np.asarray(X, dtype=float) @ self.M.T

    def zero_witness(self):
        return np.zeros(self.dim)

    def exact_flow(self, x, t):
        x = self._check_dim(x)
        V = self.eigenvectors
        return V @ (np.exp(-t * self.eigenvalues) * (V.T @ x))

    def exact_flow_many(self, x, ts):
        x = self._check_dim(x)
        ts = np.asarray(ts, dtype=float)
        V = self.eigenvectors
        coeff = V.T @ x
        return (np.exp(-np.outer(ts, self.eigenvalues)) * coeff[None, :]) @ V.T

    def graph_norm_bound(self, radius):
        return int(math.ceil(max(1.0, self.lambda_max) * radius))


def _quartic_slope(z: float) -> float:
    if z > 1.0:
        return 4.0 * (z - 1.0) ** 3
    if z < -1.0:
        return 4.0 * (z + 1.0) ** 3
    return 0.0


class QuarticWell(AccretiveOperator):
    """Scalar gradient of the two-sided quartic well, flat on [-1, 1].

    A = f' with f(x) = (x-1)^4 on [1, inf), 0 on [-1, 1], (x+1)^4 on
    (-inf, -1].  The zero set is the whole interval [-1, 1] (so the zero is
    not unique), and the nearest-point projection is the clamp to [-1, 1].
    The resolvent solves the strictly increasing scalar equation
    z + gamma f'(z) = x by safeguarded Newton with a bisection fallback.
    """

    #: residual tolerance for the scalar resolvent solve
    RESOLVENT_TOL = 1e-12

    def __init__(self):
        self.dim = 1
        self.name = "quartic-well"

    def resolvent(self, gamma, x):
        x = self._check_dim(x)
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return np.array([_solve_quartic_resolvent(float(gamma), float(x[0]))])

    def zero_projection(self, x):
        x = self._check_dim(x)
        return np.clip(x, -1.0, 1.0)

    def zero_projection_many(self, X):
        return np.clip(np.asarray(X, dtype=float), -1.0, 1.0)

    def value(self, x):
        x = self._check_dim(x)
        return np.array([_quartic_slope(float(x[0]))])

    def value_many(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros_like(X)
        hi = X > 1.0
        lo = X < -1.0
        out[hi] = 4.0 * (X[hi] - 1.0) ** 3
        out[lo] = 4.0 * (X[lo] + 1.0) ** 3
        return out

    def zero_witness(self):
        return np.zeros(1)

    def exact_flow(self, x, t):
        x = self._check_dim(x)
        return np.array([_quartic_flow_scalar(float(x[0]), float(t))])

    def exact_flow_many(self, x, ts):
        x = self._check_dim(x)
        ts = np.asarray(ts, dtype=float)
        x0 = float(x[0])
        if -1.0 <= x0 <= 1.0:
            return np.full((ts.shape[0], 1), x0)
        if x0 > 1.0:
            w = ((x0 - 1.0) ** -2 + 8.0 * ts) ** -0.5
            return (1.0 + w)[:, None]
        w = ((-x0 - 1.0) ** -2 + 8.0 * ts) ** -0.5
        return (-1.0 - w)[:, None]

    def graph_norm_bound(self, radius):
        slope = 4.0 * max(0.0, radius - 1.0) ** 3
        return int(math.ceil(max(radius, slope)))


def _quartic_flow_scalar(x0: float, t: float) -> float:
    # separable ODE u' = -4(u -/+ 1)^3 away from the flat zone; points inside
    # [-1, 1] are stationary
    if -1.0 <= x0 <= 1.0:
        return x0
    if x0 > 1.0:
        return 1.0 + ((x0 - 1.0) ** -2 + 8.0 * t) ** -0.5
    return -1.0 - ((-x0 - 1.0) ** -2 + 8.0 * t) ** -0.5


def _solve_quartic_resolvent(gamma: float, x: float) -> float:
    """Root of F(z) = z + gamma*f'(z) - x; F is strictly increasing."""
    slope = abs(_quartic_slope(x))
    lo = x - gamma * slope - 1.0
    hi = x + gamma * slope + 1.0
    flo = lo + gamma * _quartic_slope(lo) - x
    fhi = hi + gamma * _quartic_slope(hi) - x
    width = hi - lo
    while flo > 0.0 or fhi < 0.0:  # expand until the root is bracketed
        lo -= width
        hi += width
        width = hi - lo
        flo = lo + gamma * _quartic_slope(lo) - x
        fhi = hi + gamma * _quartic_slope(hi) - x
        if width > 1e18:
            raise ResourceLimitError("quartic resolvent bracket expansion diverged")

    z = min(max(x, lo), hi)
    for _ in range(200):
        f = z + gamma * _quartic_slope(z) - x
        if abs(f) <= QuarticWell.RESOLVENT_TOL:
            return z
        if f > 0.0:
            hi = z
        else:
            lo = z
        df = 1.0 + gamma * 12.0 * (abs(z) - 1.0) ** 2 if abs(z) > 1.0 else 1.0
        step = f / df
        z_new = z - step
        if not lo < z_new < hi:  # Newton left the bracket: bisect
            z_new = 0.5 * (lo + hi)
        z = z_new
    raise ResourceLimitError("quartic resolvent did not reach residual tolerance")


def make_scaled_identity(alpha: float, dim: int) -> ScaledIdentity:
    return ScaledIdentity(alpha, dim)


def make_spd_linear(M) -> SPDLinear:
    return SPDLinear(M)


def make_quartic_well() -> QuarticWell:
    return QuarticWell()


def dirichlet_laplacian_1d(n: int) -> np.ndarray:
    """Tridiagonal (-1, 2, -1) matrix of size n: the 1-d discrete Dirichlet
    Laplacian (unscaled).  Eigenvalues are 2 - 2 cos(j pi / (n+1))."""
    if n < 1:
        raise ValueError("size must be >= 1")
    return (
        2.0 * np.eye(n)
        - np.diag(np.ones(n - 1), 1)
        - np.diag(np.ones(n - 1), -1)
    )


def sample_graph_pairs(op: AccretiveOperator, seed: int, bound: float, count: int) -> list[GraphPair]:
    """Draw ``count`` graph pairs with ||x||, ||y|| <= bound.

    x is uniform in the ball of radius ``bound``; y = value(x); pairs with
    ||y|| > bound are rejected and redrawn.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    rng = np.random.default_rng(seed)
    xs: list[np.ndarray] = []
    rounds = 0
    while len(xs) < count:
        rounds += 1
        if rounds > 1000:
            raise ResourceLimitError(
                f"graph sampling for {op.name} rejected too many draws at bound {bound}"
            )
        m = max(count - len(xs), 16)
        direction = rng.normal(size=(m, op.dim))
        direction /= np.maximum(np.linalg.norm(direction, axis=1), 1e-300)[:, None]
        radii = bound * rng.random(m) ** (1.0 / op.dim)
        X = direction * radii[:, None]
        Y = op.value_many(X)
        keep = np.linalg.norm(Y, axis=1) <= bound
        xs.extend(X[keep])
    X = np.stack(xs[:count])
    Y = op.value_many(X)
    return [GraphPair(x, y) for x, y in zip(X, Y)]


def graph_residual(op: AccretiveOperator, pair: GraphPair) -> float:
    """Residual of the membership relation y in Ax (0 for single-valued A)."""
    return norm(pair.y - op.value(pair.x))


@dataclass
class AccretivityReport:
    """Result of scanning sampled graph pairs for accretivity violations."""

    operator: str
    n_samples: int
    n_pairs_checked: int
    tol: float
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_accretive(
    op: AccretiveOperator,
    n_samples: int,
    bound: float,
    tol: float,
    seed: int = 0,
    max_reported: int = 50,
) -> AccretivityReport:
    """Check <u - v, x - y> >= -tol over all pairs of sampled graph elements."""
    pairs = sample_graph_pairs(op, seed, bound, n_samples)
    X = np.stack([p.x for p in pairs])
    Y = np.stack([p.y for p in pairs])
    s = np.einsum("ij,ij->i", Y, X)
    C = Y @ X.T
    # P[i, j] = <y_i - y_j, x_i - x_j>
    P = s[:, None] + s[None, :] - C - C.T
    bad_i, bad_j = np.where(np.triu(P < -tol, k=1))
    report = AccretivityReport(
        operator=op.name, n_samples=n_samples, n_pairs_checked=n_samples * (n_samples - 1) // 2,
        tol=tol,
    )
    for i, j in list(zip(bad_i.tolist(), bad_j.tolist()))[:max_reported]:
        report.violations.append(
            {"i": i, "j": j, "pairing": float(P[i, j]),
             "x_i": X[i].tolist(), "x_j": X[j].tolist()}
        )
    n_bad = int(len(bad_i))
    if n_bad > len(report.violations):
        report.violations.append({"truncated": n_bad - max_reported})
    return report
