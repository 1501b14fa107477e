"""Classification of linear dynamical systems dx/dt = Ax by eventual
positivity of their flow, certified exponential indices, and the discrete
matrix-power class hierarchy.

The continuous-time classifier separates four verdicts:

* ``POSITIVE`` -- A is Metzler, the flow preserves the nonnegative orthant
  for all t >= 0 (exponential index 0).
* ``STRONGLY_EVENTUALLY_POSITIVE`` -- the dominant eigenvalue is simple,
  real and strictly dominant with strictly positive right and left
  eigenvectors; the flow of every nonzero nonnegative start becomes and
  stays strictly positive.  This eigenvector test is necessary and
  sufficient.
* ``EVENTUALLY_POSITIVE_NECESSARY_ONLY`` -- the necessary spectral
  conditions hold (real dominant value, nonnegative eigenvectors with some
  zero entries) but sufficiency is unavailable; a sampling probe of e^{At}
  is attached as evidence.
* ``NOT_EVENTUALLY_POSITIVE`` -- a complex pair dominates the spectrum or
  the dominant eigenvectors are sign-indefinite.

A Metzler matrix may simultaneously satisfy the strong eigenvector test;
the verdict keeps the structural ``POSITIVE`` label and exposes the
eigenvector outcome via :attr:`SpectralVerdict.strongly_eventually_positive`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import linalg
from .exceptions import NotApplicable
from .linalg import EigenSystem, as_square, eigensystem, expm_grid

__all__ = [
    "SystemClass",
    "SamplingOutcome",
    "SpectralVerdict",
    "PowerTag",
    "MatrixClass",
    "classify_system",
    "exponential_index",
    "classify_matrix_powers",
    "is_metzler",
    "is_irreducible",
    "modal_tail_time",
]

DEFAULT_ENTRY_TOL = 1e-9
DEFAULT_GRID_STEP = 0.01


class SystemClass(enum.Enum):
    POSITIVE = "Positive"
    STRONGLY_EVENTUALLY_POSITIVE = "StronglyEventuallyPositive"
    EVENTUALLY_POSITIVE_NECESSARY_ONLY = "EventuallyPositiveNecessaryOnly"
    NOT_EVENTUALLY_POSITIVE = "NotEventuallyPositive"


class SamplingOutcome(enum.Enum):
    """Evidence from grid sampling of e^{At}; never a proof by itself."""

    SUPPORTED = "supported"
    REFUTED_ON_WINDOW = "refuted-on-window"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SpectralVerdict:
    system_class: SystemClass
    dominant_value: float
    dominant_right: np.ndarray
    dominant_left: np.ndarray
    metzler: bool
    dominant_simple_real: bool
    right_positive: bool
    left_positive: bool
    exponential_index_upper: float
    certified_tail_time: float
    grid_times: np.ndarray
    grid_min_entries: np.ndarray
    entry_tol: float
    sampling_outcome: SamplingOutcome | None = None

    @property
    def strongly_eventually_positive(self) -> bool:
        """Strong eventual positivity: the eigenvector conditions hold.

        True also for Metzler matrices whose verdict label is POSITIVE but
        which pass the simple-real-dominant strictly-positive-eigenvector
        test (irreducible Metzler matrices, for example).
        """
        return (
            self.dominant_simple_real and self.right_positive and self.left_positive
        )

    @property
    def eventually_positive_certified(self) -> bool:
        """Certified eventual positivity: Metzler or the strong test."""
        return self.metzler or self.strongly_eventually_positive


def is_metzler(A, tol: float = 1e-12) -> bool:
    """True when every off-diagonal entry is >= -tol."""
    A = as_square(A, "A")
    off = A - np.diag(np.diag(A))
    return bool(off.min() >= -tol)


def is_irreducible(A, tol: float = 0.0) -> bool:
    """Irreducibility via strong connectivity of the off-diagonal support."""
    A = as_square(A, "A")
    n = A.shape[0]
    if n == 1:
        return True
    support = (np.abs(A) > tol) & ~np.eye(n, dtype=bool)
    ncomp, _ = connected_components(csr_matrix(support), connection="strong")
    return ncomp == 1


def modal_tail_time(
    eig: EigenSystem,
    left_factor: np.ndarray | None = None,
    right_factor: np.ndarray | None = None,
    entry_tol: float = 0.0,
) -> float | None:
    """Analytic time beyond which the dominant mode outweighs the rest.

    For L e^{At} R with the modal expansion sum_i e^{lambda_i t} L v_i w_i^H R,
    returns the smallest T such that the subdominant terms are entrywise
    smaller than the least entry of the dominant term for every t >= T:

        sum_{i>=2} c_i exp((Re lambda_i - lambda_1) T) < min entry of L v1 w1^T R

    where real modes contribute c_i = max |L v_i w_i^T R| and each conjugate
    pair contributes 2 (max |Re M| + max |Im M|).  Returns None when the
    dominant term has an entry <= entry_tol (no such certificate exists) or
    when the dominant value is not simple real.
    """
    if not eig.dominant_is_simple_real():
        return None
    lam1, v1, w1 = eig.dominant_pair()
    L = np.eye(eig.n) if left_factor is None else np.atleast_2d(left_factor)
    R = np.eye(eig.n) if right_factor is None else np.atleast_2d(right_factor)
    dominant = np.outer(L @ v1, w1 @ R)
    floor = float(dominant.min())
    if floor <= entry_tol:
        return None

    weights = []
    decays = []
    i = 1
    while i < eig.n:
        lam_i = eig.values[i]
        M = np.outer(L @ eig.right[:, i], eig.left[:, i].conj() @ R)
        if abs(lam_i.imag) > 1e-12:
            weights.append(2.0 * (np.abs(M.real).max() + np.abs(M.imag).max()))
            i += 2
        else:
            weights.append(np.abs(M.real).max())
            i += 1
        decays.append(lam1 - lam_i.real)
    if not weights:
        return 0.0
    weights = np.asarray(weights)
    decays = np.asarray(decays)
    if decays.min() <= 0:
        return None

    def excess(T):
        return float(weights @ np.exp(-decays * T) - floor)

    if excess(0.0) < 0:
        return 0.0
    hi = 1.0
    while excess(hi) >= 0:
        hi *= 2.0
        if hi > 1e9:
            return None
    return float(brentq(excess, 0.0, hi, xtol=1e-10, rtol=1e-12)) * (1 + 1e-9)


def _grid_index(A, tail_time: float, grid_step: float, entry_tol: float):
    """Smallest grid time after which e^{At} stays entrywise >= -entry_tol
    on [tau, tail_time], with one factor-10 refinement near the answer."""
    if tail_time <= 0.0:
        return 0.0, np.zeros(1), np.array([1.0])
    step = min(grid_step, tail_time / 1000.0)
    # keep pathological tails (tiny spectral gaps) tractable
    step = max(step, tail_time / 200_000.0)
    ts = np.arange(0.0, tail_time + step, step)
    mins = expm_grid(A, ts).min(axis=(1, 2))
    negative = np.flatnonzero(mins < -entry_tol)
    if negative.size == 0:
        return 0.0, ts, mins
    t_last = ts[negative[-1]]
    coarse = min(t_last + step, tail_time)
    fine = np.arange(max(t_last - step, 0.0), coarse + step / 10.0, step / 10.0)
    fine_mins = expm_grid(A, fine).min(axis=(1, 2))
    fine_neg = np.flatnonzero(fine_mins < -entry_tol)
    if fine_neg.size:
        tau = min(fine[fine_neg[-1]] + step / 10.0, tail_time)
    else:
        tau = fine[0]
    times = np.concatenate([ts, fine])
    entries = np.concatenate([mins, fine_mins])
    order = np.argsort(times)
    return float(tau), times[order], entries[order]


def _sampling_probe(A, entry_tol: float, horizon: float = 20.0, window: float = 5.0):
    ts = np.arange(0.0, horizon, DEFAULT_GRID_STEP)
    mins = expm_grid(A, ts).min(axis=(1, 2))
    negative = np.flatnonzero(mins < -entry_tol)
    if negative.size == 0:
        return SamplingOutcome.SUPPORTED, ts, mins
    t_last = ts[negative[-1]]
    if t_last <= horizon - window:
        return SamplingOutcome.SUPPORTED, ts, mins
    return SamplingOutcome.REFUTED_ON_WINDOW, ts, mins


def classify_system(A, tol: float = DEFAULT_ENTRY_TOL) -> SpectralVerdict:
    """Classify dx/dt = Ax by eventual positivity of its flow.

    The strong verdict applies the eigenvector characterization (simple real
    strictly dominant value with strictly positive right and left
    eigenvectors), which is necessary and sufficient.  Metzler matrices are
    labelled POSITIVE; the strong eigenvector outcome remains available on
    the verdict.  When only the necessary conditions hold the verdict is
    three-valued: the class label records that sufficiency is missing and
    ``sampling_outcome`` carries the grid-probe evidence.

    Errors from the eigendecomposition (NotDiagonalizable, NonSquare)
    propagate.
    """
    A = as_square(A, "A")
    eig = eigensystem(A)
    metzler = is_metzler(A)
    scale = max(np.abs(A).max(), 1.0)

    simple_real = eig.dominant_is_simple_real(tol * scale)
    lam1, v1, w1 = eig.dominant_pair(tol * scale)
    real_dominant = simple_real or (
        abs(eig.values[0].imag) <= tol * scale
        and all(abs(eig.values[j].imag) <= tol * scale for j in eig.dominant_ties)
    )
    right_pos = simple_real and bool(v1.min() > tol)
    left_pos = simple_real and bool(w1.min() > tol)
    right_nonneg = real_dominant and bool(v1.min() >= -tol)
    left_nonneg = real_dominant and bool(w1.min() >= -tol)
    strong = simple_real and right_pos and left_pos

    sampling = None
    if metzler:
        system_class = SystemClass.POSITIVE
    elif strong:
        system_class = SystemClass.STRONGLY_EVENTUALLY_POSITIVE
    elif right_nonneg and left_nonneg:
        system_class = SystemClass.EVENTUALLY_POSITIVE_NECESSARY_ONLY
        sampling, _, _ = _sampling_probe(A, tol)
    else:
        system_class = SystemClass.NOT_EVENTUALLY_POSITIVE

    tau0 = np.nan
    tail = np.nan
    grid_times = np.zeros(0)
    grid_mins = np.zeros(0)
    if metzler:
        tau0 = 0.0
        tail = np.inf  # Metzler: e^{At} >= 0 for every t >= 0, no grid needed
        grid_times = np.linspace(0.0, 10.0, 101)
        grid_mins = expm_grid(A, grid_times).min(axis=(1, 2))
    elif strong:
        tail = modal_tail_time(eig)
        if tail is None:  # pragma: no cover - strong implies a finite tail
            tail = np.nan
        else:
            tau0, grid_times, grid_mins = _grid_index(A, tail, DEFAULT_GRID_STEP, tol)

    return SpectralVerdict(
        system_class=system_class,
        dominant_value=float(lam1),
        dominant_right=v1,
        dominant_left=w1,
        metzler=metzler,
        dominant_simple_real=simple_real,
        right_positive=right_pos,
        left_positive=left_pos,
        exponential_index_upper=float(tau0),
        certified_tail_time=float(tail),
        grid_times=grid_times,
        grid_min_entries=grid_mins,
        entry_tol=tol,
        sampling_outcome=sampling,
    )


def exponential_index(
    A,
    verdict: SpectralVerdict,
    grid_step: float = DEFAULT_GRID_STEP,
    entry_tol: float = DEFAULT_ENTRY_TOL,
) -> tuple[float, float]:
    """Certified upper bound on the exponential index, with its tail time.

    Returns (tau0_hat, tail_bound_time): e^{At} is grid-verified entrywise
    >= -entry_tol for t in [tau0_hat, tail_bound_time] and analytically
    positive for t >= tail_bound_time via the modal remainder bound.
    Positive (Metzler) systems return tau0_hat = 0 directly.

    Raises NotApplicable for verdicts outside the positive / strongly
    eventually positive classes.
    """
    A = as_square(A, "A")
    if verdict.system_class is SystemClass.POSITIVE:
        if verdict.strongly_eventually_positive:
            tail = modal_tail_time(eigensystem(A))
            return 0.0, float(tail) if tail is not None else np.inf
        return 0.0, np.inf
    if not verdict.strongly_eventually_positive:
        raise NotApplicable(
            "exponential index applies to positive or strongly eventually "
            f"positive systems, not {verdict.system_class.value}"
        )
    eig = eigensystem(A)
    tail = modal_tail_time(eig)
    if tail is None:  # pragma: no cover - excluded by the strong verdict
        raise NotApplicable("no analytic tail certificate exists")
    tau0, _, _ = _grid_index(A, tail, grid_step, entry_tol)
    return float(tau0), float(tail)


class PowerTag(enum.Enum):
    EVENTUALLY_POSITIVE_MATRIX = "EventuallyPositiveMatrix"
    EVENTUALLY_NONNEGATIVE_NONNILPOTENT = "EventuallyNonnegativeNonnilpotent"
    WPF_ONLY = "WPFOnly"
    NONE = "None"


@dataclass(frozen=True)
class MatrixClass:
    tag: PowerTag
    witness_power: int
    wpf: bool


def _has_wpf_property(A, tol: float = 1e-9) -> bool:
    """Weak Perron-Frobenius property of A and A^T: the spectral radius is
    attained at a real eigenvalue admitting nonnegative right and left
    eigenvectors."""
    try:
        eig = eigensystem(A)
    except Exception:
        return False
    rho = np.abs(eig.values).max()
    scale = max(rho, 1.0)
    for idx in range(eig.n):
        lam = eig.values[idx]
        if abs(lam.imag) > tol * scale or abs(lam.real - rho) > tol * scale:
            continue
        v = eig.right[:, idx].real.copy()
        w = eig.left[:, idx].real.copy()
        for vec in (v, w):
            pivot = vec[np.argmax(np.abs(vec))]
            if pivot < 0:
                vec *= -1.0
        if v.min() >= -tol and w.min() >= -tol:
            return True
    return False


def classify_matrix_powers(A, max_k: int = 200, tol: float = 1e-12) -> MatrixClass:
    """Place A in the discrete power hierarchy by sampling A^k up to 2*max_k.

    Finds the smallest K <= max_k with A^k strictly positive (respectively
    nonnegative, for a non-nilpotent A) for every k in [K, 2K].  Powers are
    renormalized by their largest magnitude at each step, which preserves
    sign patterns while preventing overflow.  An exhausted search is the
    value ``PowerTag.NONE`` (inconclusive), never an error.
    """
    A = as_square(A, "A")
    n = A.shape[0]
    wpf = _has_wpf_property(A)

    strict = []
    nonneg = []
    nilpotent = False
    P = np.eye(n)
    for k in range(1, 2 * max_k + 1):
        P = P @ A
        top = np.abs(P).max()
        if top == 0.0:
            nilpotent = True
            break
        P = P / top
        strict.append(P.min() > tol)
        nonneg.append(P.min() >= -tol)

    def first_window(flags):
        for K in range(1, max_k + 1):
            if 2 * K > len(flags):
                break
            if all(flags[K - 1 : 2 * K]):
                return K
        return None

    if not nilpotent:
        K = first_window(strict)
        if K is not None:
            return MatrixClass(PowerTag.EVENTUALLY_POSITIVE_MATRIX, K, wpf)
        K = first_window(nonneg)
        if K is not None:
            return MatrixClass(
                PowerTag.EVENTUALLY_NONNEGATIVE_NONNILPOTENT, K, wpf
            )
    if wpf:
        return MatrixClass(PowerTag.WPF_ONLY, 0, wpf)
    return MatrixClass(PowerTag.NONE, 0, wpf)
