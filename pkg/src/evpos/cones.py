"""Invariant ice-cream cones built from the eigenvector coordinates of a
matrix with a simple real dominant eigenvalue.

A cone is the set of points y with

    sqrt( sum_i alpha_i |<w_i, y>|^2 ) <= <w_1, y>,

summing over the subdominant left eigenvectors.  Conjugate pairs enter
through the real and imaginary parts of one member, sharing a single
weight; the modulus semantics of the complex projection are preserved by
carrying the pair twice (factor 2) in the realified quadratic form.  The
cone is the preimage of the standard Lorentz cone under the row-stacked
transform T = [w_1; sqrt(alpha_i) rows], whose inverse is assembled
analytically from the right eigenvectors (no linear solve involved).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateW, DimensionMismatch, PreconditionFailed
from .linalg import EigenSystem, as_square, as_vector, eigensystem, expm_grid

__all__ = [
    "ConeSpec",
    "ConeFit",
    "FlowInvarianceReport",
    "AttractorReport",
    "cone_contains",
    "flow_invariance_check",
    "fit_inner_cone",
    "fit_outer_cone",
    "attractor_limit_check",
    "positivizing_transform",
]

INTERIOR_TOL = 1e-7  # strict inclusions need a quantitative gap
MAX_FIT_STEPS = 60


@dataclass(frozen=True)
class ConeSpec:
    """Ice-cream cone data in eigenvector coordinates.

    ``minor_rows`` / ``minor_cols`` hold the unweighted realified left /
    right eigenvector blocks; ``row_alpha`` the per-row weight (shared
    within a conjugate pair) and ``row_pair`` marks rows belonging to a
    pair (these carry the extra factor 2 in the quadratic form).
    """

    dominant_value: float
    apex: np.ndarray  # v_1, the cone's interior ray
    dominant_left: np.ndarray  # w_1, the defining linear functional
    minor_rows: np.ndarray  # (n-1, n)
    minor_cols: np.ndarray  # (n, n-1)
    row_alpha: np.ndarray  # (n-1,)
    row_pair: np.ndarray  # (n-1,) bool

    @classmethod
    def from_matrix(cls, A, alpha=1.0) -> "ConeSpec":
        return cls.from_eigensystem(eigensystem(as_square(A, "A")), alpha)

    @classmethod
    def from_eigensystem(cls, eig: EigenSystem, alpha=1.0) -> "ConeSpec":
        """Build the cone from a decomposition with simple real dominant value.

        `alpha` is a positive scalar (uniform weights) or a sequence with
        one entry per subdominant eigenvalue (conjugate pairs count once).
        """
        if not eig.dominant_is_simple_real():
            raise PreconditionFailed(
                "cone construction needs a simple real dominant eigenvalue"
            )
        lam1, v1, w1 = eig.dominant_pair()
        n = eig.n
        rows, cols, pair_flags, group_of_row = [], [], [], []
        i = 1
        n_groups = 0
        while i < n:
            if abs(eig.values[i].imag) > 1e-12:
                w = eig.left[:, i]
                v = eig.right[:, i]
                rows += [w.real.copy(), w.imag.copy()]
                cols += [v.real.copy(), v.imag.copy()]
                pair_flags += [True, True]
                group_of_row += [n_groups, n_groups]
                i += 2
            else:
                rows.append(eig.left[:, i].real.copy())
                cols.append(eig.right[:, i].real.copy())
                pair_flags.append(False)
                group_of_row.append(n_groups)
                i += 1
            n_groups += 1

        alpha_groups = np.asarray(
            np.broadcast_to(np.asarray(alpha, dtype=float), (n_groups,))
        ).copy()
        if alpha_groups.min() <= 0:
            raise PreconditionFailed("all cone weights must be positive")
        row_alpha = alpha_groups[np.asarray(group_of_row, dtype=int)] if n > 1 else np.zeros(0)
        spec = cls(
            dominant_value=lam1,
            apex=v1,
            dominant_left=w1,
            minor_rows=np.asarray(rows).reshape(n - 1, n),
            minor_cols=np.asarray(cols).reshape(n - 1, n).T,
            row_alpha=row_alpha,
            row_pair=np.asarray(pair_flags, dtype=bool),
        )
        T, X = spec.transform, spec.inverse_transform
        if np.abs(T @ X - np.eye(n)).max() > 1e-8:
            raise PreconditionFailed(
                "eigenvector biorthogonality too weak to invert the cone transform"
            )
        return spec

    @property
    def n(self) -> int:
        return self.apex.size

    def with_alpha(self, alpha) -> "ConeSpec":
        groups = np.unique_consecutive_counts = None  # noqa: F841 - readability
        # rebuild per-group weights from per-row layout
        group_alpha = []
        skip = False
        for r, paired in enumerate(self.row_pair):
            if skip:
                skip = False
                continue
            group_alpha.append(self.row_alpha[r])
            skip = bool(paired)
        n_groups = len(group_alpha)
        alpha_groups = np.asarray(
            np.broadcast_to(np.asarray(alpha, dtype=float), (n_groups,))
        )
        if alpha_groups.min() <= 0:
            raise PreconditionFailed("all cone weights must be positive")
        row_alpha = []
        gi = 0
        skip = False
        for r, paired in enumerate(self.row_pair):
            row_alpha.append(alpha_groups[gi])
            if paired and not skip:
                skip = True
                continue
            skip = False
            gi += 1
        return ConeSpec(
            dominant_value=self.dominant_value,
            apex=self.apex,
            dominant_left=self.dominant_left,
            minor_rows=self.minor_rows,
            minor_cols=self.minor_cols,
            row_alpha=np.asarray(row_alpha),
            row_pair=self.row_pair,
        )

    @property
    def _row_scale(self) -> np.ndarray:
        return np.sqrt(self.row_alpha * np.where(self.row_pair, 2.0, 1.0))

    @property
    def weighted_rows(self) -> np.ndarray:
        """Minor rows of T; the quadratic form is ||weighted_rows @ y||^2."""
        return self._row_scale[:, None] * self.minor_rows

    @property
    def transform(self) -> np.ndarray:
        return np.vstack([self.dominant_left[None, :], self.weighted_rows])

    @property
    def inverse_transform(self) -> np.ndarray:
        scale = np.where(self.row_pair, 2.0, 1.0) / np.sqrt(
            self.row_alpha * np.where(self.row_pair, 2.0, 1.0)
        )
        return np.hstack([self.apex[:, None], self.minor_cols * scale[None, :]])

    @property
    def condition(self) -> float:
        return float(
            np.linalg.norm(self.transform, 2)
            * np.linalg.norm(self.inverse_transform, 2)
        )

    def margin(self, y) -> float:
        """<w_1, y> minus the weighted minor norm; >= 0 means membership."""
        y = as_vector(y, self.n, "y")
        return float(
            self.dominant_left @ y - np.linalg.norm(self.weighted_rows @ y)
        )

    def quadratic_margin(self, y) -> float:
        """Signed Lorentz form <w_1,y>^2 - sum alpha_i |<w_i,y>|^2."""
        y = as_vector(y, self.n, "y")
        head = float(self.dominant_left @ y)
        return head * head - float(np.sum((self.weighted_rows @ y) ** 2))

    def sample(self, count: int, rng, boundary: bool = False) -> np.ndarray:
        """Random cone points x = T^{-1} (1, r u) with ||u|| = 1, r <= 1."""
        n = self.n
        X = self.inverse_transform
        if n == 1:
            return np.tile(self.apex, (count, 1))
        u = rng.standard_normal((count, n - 1))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = np.ones(count) if boundary else rng.uniform(0.0, 1.0, count)
        z = np.hstack([np.ones((count, 1)), r[:, None] * u])
        return z @ X.T


def cone_contains(K: ConeSpec, y, tol: float = 1e-9) -> tuple[bool, float]:
    """Membership test with its margin value."""
    m = K.margin(y)
    return m >= -tol, m


@dataclass(frozen=True)
class FlowInvarianceReport:
    samples: int
    times: np.ndarray
    min_margin: float
    min_inequality_slack: float
    all_contained: bool

    @property
    def passed(self) -> bool:
        return self.all_contained and self.min_inequality_slack >= 0.0


def flow_invariance_check(
    A,
    K: ConeSpec,
    samples: int = 100,
    horizon: float = 5.0,
    time_points: int = 20,
    tol: float = 1e-8,
    seed: int = 0,
) -> FlowInvarianceReport:
    """Verify forward invariance of the cone under the flow e^{At}.

    Each sampled cone point x is propagated over a time grid in
    (0, horizon]; membership of y = e^{At} x is checked together with the
    contraction inequality of the Lorentz form,

        Q(y) >= exp(2 lambda_1 t) Q(x) - tol,

    which quantifies how boundary margins evolve along the flow.
    """
    A = as_square(A, "A")
    eig = eigensystem(A)
    if not eig.dominant_is_simple_real():
        raise PreconditionFailed("flow invariance needs a simple real dominant value")
    rng = np.random.default_rng(seed)
    xs = K.sample(samples, rng)
    ts = np.linspace(horizon / time_points, horizon, time_points)
    flows = expm_grid(A, ts)
    lam1 = K.dominant_value
    min_margin = np.inf
    min_slack = np.inf
    contained = True
    for x in xs:
        qx = K.quadratic_margin(x)
        for t, E in zip(ts, flows):
            y = E @ x
            ok, m = cone_contains(K, y, tol)
            contained &= ok
            min_margin = min(min_margin, m)
            slack = K.quadratic_margin(y) - np.exp(2.0 * lam1 * t) * qx + tol
            min_slack = min(min_slack, slack)
    return FlowInvarianceReport(
        samples=samples,
        times=ts,
        min_margin=float(min_margin),
        min_inequality_slack=float(min_slack),
        all_contained=bool(contained),
    )


@dataclass(frozen=True)
class ConeFit:
    scale: float  # uniform weight s with alpha = s * 1
    margin: float  # worst dual / membership slack at the returned scale
    steps: int


def _dual_orthant_test(K: ConeSpec, tol: float) -> float:
    """Worst slack of u_1 >= ||u_rest|| + tol over the coordinate functionals.

    u = T^{-T} e_j is row j of the analytic inverse transform; nonnegative
    slack for every j certifies that the cone sits inside the open orthant.
    """
    X = K.inverse_transform
    slacks = X[:, 0] - np.linalg.norm(X[:, 1:], axis=1) - tol
    return float(slacks.min())


def _membership_orthant_test(K: ConeSpec, tol: float) -> float:
    """Worst membership margin of the basis vectors e_j, minus tol."""
    margins = K.dominant_left - np.linalg.norm(K.weighted_rows, axis=0)
    return float(margins.min() - tol)


def _bisect_scale(test, grow: bool, max_steps: int) -> tuple[float, float, int] | None:
    """Search s = 1, 2, 4, ... (or halving) until `test` passes, then sharpen
    the threshold by bisection.  Returns (s, slack, steps) or None."""
    s = 1.0
    steps = 0
    slack = test(s)
    if slack < 0.0:
        s_fail = s
        while slack < 0.0:
            steps += 1
            if steps > max_steps:
                return None
            s_fail = s
            s = s * 2.0 if grow else s / 2.0
            slack = test(s)
        lo, hi = (s_fail, s) if grow else (s, s_fail)
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            passing = test(mid) >= 0.0
            if grow:
                lo, hi = (lo, mid) if passing else (mid, hi)
            else:
                lo, hi = (mid, hi) if passing else (lo, mid)
        s = hi if grow else lo
        slack = test(s)
        if slack < 0.0:  # keep the known-good endpoint
            s = s * 2.0 if grow else s / 2.0
            while test(s) < 0.0:
                s = s * 2.0 if grow else s / 2.0
            slack = test(s)
    return s, slack, steps


def fit_inner_cone(A, eig: EigenSystem | None = None, tol: float = INTERIOR_TOL) -> ConeFit | None:
    """Uniform weight beta with cone(beta) inside the open nonnegative orthant.

    Increasing the uniform weight shrinks the cone toward the dominant ray,
    so the search doubles the scale until every coordinate functional lies
    strictly inside the dual cone.  None after 60 doublings signals failure
    of strong eventual positivity (a zero entry of the dominant eigenvector,
    for example, can never be strictly interior).
    """
    A = as_square(A, "A")
    eig = eigensystem(A) if eig is None else eig
    if not eig.dominant_is_simple_real():
        raise PreconditionFailed("cone fitting needs a simple real dominant value")
    base = ConeSpec.from_eigensystem(eig)
    result = _bisect_scale(
        lambda s: _dual_orthant_test(base.with_alpha(s), tol),
        grow=True,
        max_steps=MAX_FIT_STEPS,
    )
    if result is None:
        return None
    s, slack, steps = result
    return ConeFit(scale=s, margin=slack, steps=steps)


def fit_outer_cone(A, eig: EigenSystem | None = None, tol: float = INTERIOR_TOL) -> ConeFit | None:
    """Uniform weight gamma with the nonnegative orthant inside cone(gamma).

    Decreasing the weight widens the cone toward the dominant half-space;
    the orthant is inside as soon as every basis vector is strictly interior.
    """
    A = as_square(A, "A")
    eig = eigensystem(A) if eig is None else eig
    if not eig.dominant_is_simple_real():
        raise PreconditionFailed("cone fitting needs a simple real dominant value")
    base = ConeSpec.from_eigensystem(eig)
    result = _bisect_scale(
        lambda s: _membership_orthant_test(base.with_alpha(s), tol),
        grow=False,
        max_steps=MAX_FIT_STEPS,
    )
    if result is None:
        return None
    s, slack, steps = result
    return ConeFit(scale=s, margin=slack, steps=steps)


@dataclass(frozen=True)
class AttractorReport:
    times: np.ndarray
    final_angles: np.ndarray  # per sample, against the signed dominant ray
    monotone: bool
    max_final_angle: float


def attractor_limit_check(
    A,
    K: ConeSpec,
    t_final: float,
    samples: int = 20,
    time_points: int = 40,
    seed: int = 0,
    monotone_slack: float = 1e-9,
) -> AttractorReport:
    """Numerical check that the flow funnels the cone onto the dominant ray.

    Sampled boundary points (and their reflections through the apex
    hyperplane) are propagated along the flow; the angle to +-v_1 must
    decrease monotonically and be small at `t_final`.  Trajectories with
    <w_1, x> < 0 converge to the opposite ray -v_1.
    """
    A = as_square(A, "A")
    rng = np.random.default_rng(seed)
    xs = K.sample(samples, rng, boundary=True)
    ts = np.linspace(0.0, t_final, time_points)
    flows = expm_grid(A, ts)
    v1 = K.apex / np.linalg.norm(K.apex)
    monotone = True
    finals = np.empty(len(xs))
    for idx, x in enumerate(xs):
        sign = 1.0 if K.dominant_left @ x >= 0 else -1.0
        prev = np.inf
        for E in flows:
            y = E @ x
            c = sign * (v1 @ y) / max(np.linalg.norm(y), np.finfo(float).tiny)
            angle = float(np.arccos(np.clip(c, -1.0, 1.0)))
            monotone &= angle <= prev + monotone_slack
            prev = angle
        finals[idx] = prev
    return AttractorReport(
        times=ts,
        final_angles=finals,
        monotone=bool(monotone),
        max_final_angle=float(finals.max()),
    )


def positivizing_transform(v, w) -> np.ndarray:
    """Invertible S with S 1 = v and w^T S = 1^T / n (for w^T v = 1).

    The construction places the largest-magnitude coordinate of w first
    (the formula divides by that entry), assembles

        S' = I/n + [v' - 1/n | 0] + e_1 (1 - w')^T / (w'_1 n) + S_0,
        S_0[0, 0] = -1/w'_1 + (w'^T 1) / (w'_1 n),

    in the permuted coordinates and undoes the permutation.  The supplied
    w is rescaled internally so that w^T v = 1; for an unscaled w the
    second identity reads w^T S = (w^T v) 1^T / n.
    """
    v = as_vector(v, name="v")
    w = as_vector(w, v.size, name="w")
    n = v.size
    if np.abs(w).max() <= 1e-12:
        raise DegenerateW("all entries of w are numerically zero")
    scale = float(w @ v)
    if abs(scale) <= 1e-12 * max(1.0, np.abs(w).max() * np.abs(v).max()):
        raise DegenerateW("w^T v is numerically zero; cannot normalize")
    w = w / scale

    perm = np.arange(n)
    p = int(np.argmax(np.abs(w)))
    perm[0], perm[p] = perm[p], perm[0]
    vp, wp = v[perm], w[perm]

    S = np.eye(n) / n
    S[:, 0] += vp - 1.0 / n
    S[0, :] += (1.0 - wp) / (wp[0] * n)
    S[0, 0] += -1.0 / wp[0] + wp.sum() / (wp[0] * n)

    inv_perm = np.empty(n, dtype=int)
    inv_perm[perm] = np.arange(n)
    return S[inv_perm, :]
