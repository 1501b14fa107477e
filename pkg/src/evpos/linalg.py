"""Dense numerical kernels: eigensystems, matrix exponentials, Lyapunov
equation solves and strict linear-inequality feasibility.

Everything operates on plain ``numpy.ndarray`` values (row-major, float64);
inputs are validated for shape and finiteness at the public entry points.
All functions are pure and deterministic for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog

from .exceptions import (
    DimensionMismatch,
    NonSquare,
    NotDiagonalizable,
    NotHurwitz,
    Overflow,
    SingularSystem,
    UnboundedWitness,
)

__all__ = [
    "EigenSystem",
    "StrictFeasibilityProblem",
    "StrictWitness",
    "Infeasible",
    "as_matrix",
    "as_square",
    "as_vector",
    "eigensystem",
    "expm",
    "expm_grid",
    "integrate_expm",
    "solve_lyapunov",
    "find_strict_witness",
]

# Eigenvector-basis condition number beyond which the modal expansion is
# refused (the diagonalizability standing assumption is then violated).
COND_LIMIT = 1e8


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array."""
    m = np.atleast_2d(np.asarray(a, dtype=float))
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise DimensionMismatch(f"{name} contains NaN or Inf entries")
    return m


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {m.shape}")
    return m


def as_vector(a, n: int | None = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(a, dtype=float).reshape(-1)
    if not np.isfinite(v).all():
        raise DimensionMismatch(f"{name} contains NaN or Inf entries")
    if n is not None and v.size != n:
        raise DimensionMismatch(f"{name} must have length {n}, got {v.size}")
    return v


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition with biorthogonally normalized left/right vectors.

    ``values`` are sorted by descending real part, conjugate pairs adjacent
    (positive imaginary part first).  Columns of ``right`` are eigenvectors
    v_i with unit 2-norm; columns of ``left`` are left eigenvectors w_i
    normalized so that (w_i)^H v_j = delta_ij, i.e. ``left.conj().T`` is the
    inverse of ``right``.

    ``dominant_ties`` lists indices j >= 1 whose real part ties the leading
    one within the construction tolerance; ties are reported, never broken.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    residual_norm: float
    condition: float
    dominant_ties: tuple[int, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dominant_value(self) -> complex:
        return complex(self.values[0])

    def dominant_is_simple_real(self, tol: float = 1e-9) -> bool:
        """Leading eigenvalue real, simple and strictly dominant in real part."""
        lam1 = self.values[0]
        if abs(lam1.imag) > tol:
            return False
        return not self.dominant_ties

    def dominant_pair(self, tol: float = 1e-9) -> tuple[float, np.ndarray, np.ndarray]:
        """Dominant eigenvalue with sign-normalized real eigenvectors.

        The right eigenvector is scaled so its largest-magnitude entry is +1;
        the left eigenvector is rescaled to keep (w1)^T v1 = 1.
        """
        lam1 = self.values[0]
        v1 = self.right[:, 0]
        w1 = self.left[:, 0]
        if abs(lam1.imag) > tol:
            return lam1.real, v1.copy(), w1.copy()
        v1 = v1.real.copy()
        w1 = w1.real.copy()
        pivot = v1[np.argmax(np.abs(v1))]
        if pivot != 0.0:
            v1 = v1 / pivot
            w1 = w1 * pivot
        return lam1.real, v1, w1


def _sort_eigensystem(values: np.ndarray, vectors: np.ndarray):
    # descending real part, then pairs grouped by |Im| with +Im first
    order = np.lexsort((-values.imag, np.abs(values.imag), -values.real))
    return values[order], vectors[:, order]


def eigensystem(A, tol: float = 1e-8) -> EigenSystem:
    """Full eigendecomposition of a diagonalizable real matrix.

    Left eigenvectors are obtained from the inverse of the right eigenvector
    basis, which enforces biorthogonality exactly up to solve accuracy; both
    families are then validated against the residual contract
    ``max_i ||A v_i - lambda_i v_i||_2 <= tol * ||A||_2``.

    Raises
    ------
    NotDiagonalizable
        If the eigenvector basis condition number exceeds 1e8 or the
        residual contract cannot be met.
    NonSquare
        If `A` is not square.
    """
    A = as_square(A, "A")
    n = A.shape[0]
    values, vectors = np.linalg.eig(A)
    values, vectors = _sort_eigensystem(values, vectors)
    vectors = vectors / np.linalg.norm(vectors, axis=0, keepdims=True)

    # enforce adjacency and exact conjugacy of complex pairs; repeated
    # complex eigenvalues require pulling each partner forward explicitly
    i = 0
    while i < n:
        if values[i].imag > tol:
            target = values[i].conjugate()
            pair_tol = 1e-6 * max(1.0, abs(values[i]))
            partner = next(
                (j for j in range(i + 1, n) if abs(values[j] - target) <= pair_tol),
                None,
            )
            if partner is None:
                raise NotDiagonalizable(
                    "complex eigenvalue without a conjugate partner"
                )
            if partner != i + 1:
                values[i + 1 : partner + 1] = np.roll(
                    values[i + 1 : partner + 1], 1
                )
                vectors[:, i + 1 : partner + 1] = np.roll(
                    vectors[:, i + 1 : partner + 1], 1, axis=1
                )
            values[i + 1] = values[i].conjugate()
            vectors[:, i + 1] = vectors[:, i].conjugate()
            i += 2
        elif values[i].imag < -tol:
            raise NotDiagonalizable(
                "unpaired negative-imaginary eigenvalue"
            )  # pragma: no cover - partners are always pulled forward
        else:
            i += 1

    cond = np.linalg.cond(vectors)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NotDiagonalizable(
            f"eigenvector basis condition number {cond:.3e} exceeds {COND_LIMIT:.0e}"
        )
    left = np.linalg.inv(vectors).conj().T  # columns w_i, (w_i)^H v_j = delta

    scale = max(np.linalg.norm(A, 2), 1.0)
    res_right = np.linalg.norm(A @ vectors - vectors * values, axis=0).max()
    res_left = np.linalg.norm(A.T @ left - left * values.conj(), axis=0).max()
    residual = max(res_right, res_left / max(np.linalg.norm(left, axis=0).max(), 1.0))
    if residual > tol * scale:
        raise NotDiagonalizable(
            f"eigen residual {residual:.3e} exceeds {tol:.1e} * ||A||"
        )

    lam1 = values[0]
    ties = tuple(
        int(j) for j in range(1, n) if values[j].real > lam1.real - tol * scale
    )
    return EigenSystem(
        values=values,
        right=vectors,
        left=left,
        residual_norm=float(residual),
        condition=float(cond),
        dominant_ties=ties,
    )


def expm(A, t: float = 1.0) -> np.ndarray:
    """Matrix exponential e^{At} via scaling-and-squaring (Pade order 13).

    Raises Overflow if entries leave the double-precision range.
    """
    A = as_square(A, "A")
    if not np.isfinite(t):
        raise Overflow("t must be finite")
    E = sla.expm(A * t)
    if not np.isfinite(E).all():
        raise Overflow("matrix exponential overflowed the floating range")
    return E


def expm_grid(A, ts: np.ndarray) -> np.ndarray:
    """Evaluate e^{At} on a grid of times, stacked along axis 0.

    Uniformly spaced grids are propagated by repeated multiplication with
    the single step exponential; irregular grids fall back to one expm per
    point.
    """
    A = as_square(A, "A")
    ts = np.asarray(ts, dtype=float)
    out = np.empty((ts.size,) + A.shape)
    if ts.size == 0:
        return out
    steps = np.diff(ts)
    if ts.size > 2 and steps.size and np.allclose(steps, steps[0], rtol=1e-12, atol=1e-15):
        G = expm(A, steps[0])
        E = expm(A, ts[0])
        for k in range(ts.size):
            out[k] = E
            E = E @ G
    else:
        for k, t in enumerate(ts):
            out[k] = expm(A, t)
    if not np.isfinite(out).all():
        raise Overflow("matrix exponential overflowed the floating range")
    return out


def integrate_expm(A, h: float) -> np.ndarray:
    """Integral of the matrix exponential over one step, int_0^h e^{As} ds.

    Computed from the exponential of the block matrix [[A, I], [0, 0]],
    which is exact up to the expm contract and valid for singular A.
    """
    A = as_square(A, "A")
    n = A.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = A
    M[:n, n:] = np.eye(n)
    return expm(M, h)[:n, n:]


def is_hurwitz(A, tol: float = 0.0) -> bool:
    A = as_square(A, "A")
    return bool(np.linalg.eigvals(A).real.max() < -tol)


def solve_lyapunov(A, rhs, side: str = "left") -> np.ndarray:
    """Solve the continuous Lyapunov equation by Kronecker vectorization.

    side="left" solves  A^T Q + Q A + rhs = 0   (observability form);
    side="right" solves A P + P A^T + rhs = 0   (controllability form).

    The n^2 x n^2 dense solve costs O(n^6) and is intended for desk-scale
    n <= 50.  The residual contract ||A^T Q + Q A + rhs||_F <= 1e-8 ||rhs||_F
    is verified before returning.

    Raises
    ------
    NotHurwitz
        If some eigenvalue of `A` has nonnegative real part.
    SingularSystem
        If the vectorized system is numerically singular or the residual
        contract fails.
    """
    A = as_square(A, "A")
    rhs = as_square(rhs, "rhs")
    if A.shape != rhs.shape:
        raise DimensionMismatch("A and rhs must have identical shapes")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if not is_hurwitz(A):
        raise NotHurwitz("Lyapunov solve requires a Hurwitz matrix")
    if np.abs(rhs - rhs.T).max() > 1e-10 * max(np.abs(rhs).max(), 1.0):
        raise DimensionMismatch("rhs must be symmetric")

    At = A.T if side == "left" else A
    n = A.shape[0]
    eye = np.eye(n)
    K = np.kron(eye, At) + np.kron(At, eye)
    try:
        vec = np.linalg.solve(K, -rhs.flatten(order="F"))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    X = vec.reshape((n, n), order="F")
    X = 0.5 * (X + X.T)
    residual = At @ X + X @ At.T + rhs
    rhs_norm = max(np.linalg.norm(rhs, "fro"), np.finfo(float).tiny)
    if np.linalg.norm(residual, "fro") > 1e-8 * rhs_norm:
        raise SingularSystem(
            f"Lyapunov residual {np.linalg.norm(residual, 'fro'):.3e} "
            f"exceeds 1e-8 * ||rhs||_F"
        )
    return X


@dataclass(frozen=True)
class StrictFeasibilityProblem:
    """Strict feasibility data: find x with M x << 0 and x_i > 0 as flagged.

    ``positive`` marks the variables whose strict positivity is demanded.
    Strictness is quantified through a shared margin: the solver maximizes
    eps subject to  M x <= -eps * 1,  x_i >= eps (flagged i), ||x||_inf <= 1.
    """

    M: np.ndarray
    positive: np.ndarray  # boolean mask over the p variables

    def __post_init__(self):
        object.__setattr__(self, "M", as_matrix(self.M, "M"))
        mask = np.asarray(self.positive, dtype=bool).reshape(-1)
        if mask.size != self.M.shape[1]:
            raise DimensionMismatch("positive mask length must match columns of M")
        object.__setattr__(self, "positive", mask)

    @classmethod
    def all_positive(cls, M) -> "StrictFeasibilityProblem":
        M = as_matrix(M, "M")
        return cls(M, np.ones(M.shape[1], dtype=bool))


@dataclass(frozen=True)
class StrictWitness:
    x: np.ndarray
    margin: float


@dataclass(frozen=True)
class Infeasible:
    """Strict system refuted: the best achievable margin and a dual witness."""

    best_margin: float
    dual: np.ndarray


def find_strict_witness(
    problem: StrictFeasibilityProblem, margin_floor: float = 1e-9
) -> StrictWitness | Infeasible:
    """Search for a strictly feasible point by margin maximization.

    Solves  max eps  s.t.  M x <= -eps 1,  x_i >= eps on flagged variables,
    ||x||_inf <= 1  with a dense simplex method.  The box constraint makes
    the margin objective bounded; homogeneous witnesses are therefore
    returned at unit scale.  An optimum eps <= margin_floor is reported as
    Infeasible together with the dual multipliers of the margin rows, which
    certify that no strictly feasible x exists in the box.
    """
    M = problem.M
    q, p = M.shape
    npos = int(problem.positive.sum())
    # variables z = (x, eps), maximize eps
    c = np.zeros(p + 1)
    c[-1] = -1.0
    rows = []
    rhs = []
    for i in range(q):
        rows.append(np.concatenate([M[i], [1.0]]))
        rhs.append(0.0)
    for i in np.flatnonzero(problem.positive):
        row = np.zeros(p + 1)
        row[i] = -1.0
        row[-1] = 1.0
        rows.append(row)
        rhs.append(0.0)
    A_ub = np.array(rows)
    b_ub = np.array(rhs)
    bounds = [(-1.0, 1.0)] * p + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status == 3:
        raise UnboundedWitness("margin objective unbounded")
    if res.status != 0:
        raise SingularSystem(f"linear program failed: {res.message}")
    eps = float(res.x[-1])
    x = res.x[:p]
    if eps <= margin_floor:
        duals = -np.asarray(res.ineqlin.marginals)[: q + npos]
        return Infeasible(best_margin=eps, dual=duals)
    # re-verify by direct substitution
    slack = -(M @ x).max() if q else np.inf
    pos_slack = x[problem.positive].min() if npos else np.inf
    verified = min(slack, pos_slack)
    if verified < eps / 2:
        raise SingularSystem(
            f"witness re-verification failed: margin {verified:.3e} < eps/2"
        )
    return StrictWitness(x=x, margin=eps)
