"""
Convex-roof extensions by search over pure-state decompositions.

Every decomposition of a density matrix with eigen-ensemble {q_l, |e_l>}
(rank k) is obtained from an r x r unitary U (r >= k) as

    sqrt(w_h) |psi_h> = sum_l U[h, l] sqrt(q_l) |e_l>,

padding the eigen-ensemble with zero vectors. The minimizer below walks over
U = expm(A), A anti-Hermitian built from r^2 real parameters, with a
multi-start Nelder-Mead search. The result is always an upper bound on the
true convex roof.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .linalg_core import (
    DensityMatrix,
    LayoutError,
    PureState,
    StateValidationError,
    SubsystemLayout,
    _party_set,
    eigendecompose_hermitian,
)
from .measures import OPTIMIZER, MeasureValue, NegativeMeasureError, scren_pure

EIGEN_CUTOFF = 1e-12
WEIGHT_CUTOFF = 1e-14
UNITARY_TOL = 1e-10
NEGATIVE_CLAMP = 1e-6

PureMeasure = Callable[[PureState], Union[float, MeasureValue]]


@dataclass(frozen=True)
class RoofOptions:
    """Knobs of the convex-roof search.

    ``r=None`` sweeps the decomposition size over rank, rank+1, rank+2, each
    stage warm-started from the previous optimum. ``r_offset`` instead fixes
    the size to rank + r_offset for every state the options are applied to.
    ``zero_floor`` stops the search as soon as the averaged objective drops to
    that level, since the objective is bounded below by 0.
    """

    r: Optional[int] = None
    r_offset: Optional[int] = None
    starts: int = 8
    tol: float = 1e-7
    max_iter: int = 2000
    seed: int = 0
    zero_floor: float = 1e-7
    simplex_step: float = 0.5
    workers: int = 1

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be > 0 and max_iter >= 1")
        if self.r is not None and self.r < 1:
            raise ValueError("r must be >= 1")
        if self.r_offset is not None and (self.r_offset < 0 or self.r is not None):
            raise ValueError("r_offset must be >= 0 and cannot be combined with r")


@dataclass(frozen=True, eq=False)
class Decomposition:
    layout: SubsystemLayout
    weights: np.ndarray
    vectors: np.ndarray  # one normalized state per row

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        v = np.asarray(self.vectors, dtype=complex).reshape(len(w), -1)
        if abs(w.sum() - 1.0) > 1e-10:
            raise StateValidationError(f"decomposition weights sum to {w.sum()!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def members(self) -> list[tuple[float, PureState]]:
        return [(float(w), PureState(self.layout, v)) for w, v in zip(self.weights, self.vectors)]

    def density(self) -> np.ndarray:
        return (self.vectors.T * self.weights) @ self.vectors.conj()


@dataclass(frozen=True, eq=False)
class RoofResult:
    value: float
    best: Decomposition
    starts: int
    converged_starts: int
    spread: float
    evaluations: int
    converged: bool = True
    floor_reached: bool = False
    by_r: dict = field(default_factory=dict)

    @property
    def objective(self) -> float:
        return math.sqrt(self.value)

    def summary(self) -> dict:
        return {
            "value": float(self.value),
            "starts": self.starts,
            "converged_starts": self.converged_starts,
            "spread": float(self.spread),
            "evaluations": self.evaluations,
            "converged": self.converged,
            "floor_reached": self.floor_reached,
            "members": len(self.best),
        }


def _eigen(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    w, v = eigendecompose_hermitian(rho.entries)
    keep = w > EIGEN_CUTOFF
    return w[keep], v[:, keep].T


def eigen_ensemble(rho: DensityMatrix) -> Decomposition:
    q, vecs = _eigen(rho)
    return Decomposition(rho.layout, q / q.sum(), vecs)


def _from_unnormalized(layout: SubsystemLayout, tilde: np.ndarray) -> Decomposition:
    w = np.einsum("ij,ij->i", tilde.conj(), tilde).real
    keep = w >= WEIGHT_CUTOFF
    w, tilde = w[keep], tilde[keep]
    vecs = tilde / np.sqrt(w)[:, None]
    return Decomposition(layout, w / w.sum(), vecs)


def hjw_decomposition(rho: DensityMatrix, U: np.ndarray) -> Decomposition:
    """Decomposition obtained by mixing the zero-padded eigen-ensemble of `rho` with unitary `U`."""
    U = np.asarray(U, dtype=complex)
    q, vecs = _eigen(rho)
    k = len(q)
    r = U.shape[0]
    if U.shape != (r, r):
        raise LayoutError(f"mixing matrix must be square, got {U.shape}")
    if r < k:
        raise LayoutError(f"mixing unitary has size {r} < rank {k}")
    if np.max(np.abs(U.conj().T @ U - np.eye(r))) > UNITARY_TOL:
        raise StateValidationError("mixing matrix is not unitary within 1e-10")
    return _from_unnormalized(rho.layout, U[:, :k] @ (np.sqrt(q)[:, None] * vecs))


def _member_value(m: float) -> float:
    if m < -NEGATIVE_CLAMP:
        raise NegativeMeasureError(
            f"pure-state measure {m!r} on a decomposition member is below -1e-6")
    return math.sqrt(max(m, 0.0))


def roof_objective(dec: Decomposition, pure_measure: PureMeasure) -> float:
    """Average of sqrt(measure) over the decomposition members.

    Member values in [-1e-6, 0) are treated as roundoff and clamped to 0;
    anything lower raises NegativeMeasureError.
    """
    total = 0.0
    for w, psi in dec.members:
        total += w * _member_value(float(pure_measure(psi)))
    return total


def unitary_from_params(x: np.ndarray, r: int) -> np.ndarray:
    """expm of the anti-Hermitian matrix assembled from r^2 real parameters."""
    return expm(_generator(x, r))


def _generator(x: np.ndarray, r: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    A = np.diag(1j * x[:r]).astype(complex)
    iu = np.triu_indices(r, 1)
    m = len(iu[0])
    T = np.zeros((r, r), dtype=complex)
    T[iu] = x[r:r + m] + 1j * x[r + m:r + 2 * m]
    return A + T - T.conj().T


def _params(A: np.ndarray) -> np.ndarray:
    r = A.shape[0]
    iu = np.triu_indices(r, 1)
    return np.concatenate([np.diag(A).imag, A[iu].real, A[iu].imag])


class _FloorReached(Exception):
    def __init__(self, x, f):
        self.x, self.f = x, f


@dataclass
class _StartOutcome:
    index: int
    x: np.ndarray
    f: float
    evaluations: int
    converged: bool
    floor: bool


class _Problem:
    def __init__(self, rho: DensityMatrix, pure_measure: PureMeasure, opts: RoofOptions):
        q, vecs = _eigen(rho)
        self.layout = rho.layout
        self.base = np.sqrt(q)[:, None] * vecs
        self.k = len(q)
        self.measure = pure_measure
        self.opts = opts

    def decomposition(self, x: np.ndarray, r: int) -> Decomposition:
        U = unitary_from_params(x, r)
        return _from_unnormalized(self.layout, U[:, :self.k] @ self.base)

    def objective(self, x: np.ndarray, r: int) -> float:
        U = unitary_from_params(x, r)
        tilde = U[:, :self.k] @ self.base
        w = np.einsum("ij,ij->i", tilde.conj(), tilde).real
        total = 0.0
        wsum = 0.0
        for wi, t in zip(w, tilde):
            if wi < WEIGHT_CUTOFF:
                continue
            psi = PureState(self.layout, t / math.sqrt(wi))
            total += wi * _member_value(float(self.measure(psi)))
            wsum += wi
        return total / wsum

    def run_start(self, index: int, x0: np.ndarray, r: int) -> _StartOutcome:
        opts = self.opts
        evals = 0
        best_x, best_f = x0, math.inf

        def f(x):
            nonlocal evals, best_x, best_f
            evals += 1
            val = self.objective(x, r)
            if val < best_f:
                best_x, best_f = np.array(x, copy=True), val
            if val <= opts.zero_floor:
                raise _FloorReached(best_x, best_f)
            return val

        dim = r * r
        x = np.asarray(x0, dtype=float)
        converged = False
        try:
            prev = f(x)
            while evals < opts.max_iter:
                simplex = np.vstack([x, x + opts.simplex_step * np.eye(dim)])
                res = minimize(f, x, method="Nelder-Mead",
                               options={"maxfev": opts.max_iter - evals, "fatol": opts.tol,
                                        "xatol": np.inf, "initial_simplex": simplex})
                converged = bool(res.success)
                x = best_x
                if not converged or prev - best_f <= opts.tol:
                    break
                prev = best_f
        except _FloorReached as hit:
            return _StartOutcome(index, hit.x, hit.f, evals, True, True)
        return _StartOutcome(index, best_x, best_f, evals, converged, False)


def _embed_params(x: np.ndarray, r_old: int, r_new: int) -> np.ndarray:
    A = np.zeros((r_new, r_new), dtype=complex)
    A[:r_old, :r_old] = _generator(x, r_old)
    return _params(A)


def minimize_roof(rho: DensityMatrix, pure_measure: PureMeasure,
                  opts: Optional[RoofOptions] = None) -> RoofResult:
    """Minimize the decomposition average of sqrt(pure_measure) over decompositions of `rho`.

    Returns the squared optimum. Deterministic for a fixed ``opts.seed``,
    also when ``opts.workers > 1``.
    """
    opts = opts or RoofOptions()
    prob = _Problem(rho, pure_measure, opts)
    k = prob.k
    if k == 1:
        dec = eigen_ensemble(rho)
        val = roof_objective(dec, pure_measure)
        return RoofResult(val ** 2, dec, starts=0, converged_starts=0, spread=0.0,
                          evaluations=1, by_r={1: val ** 2})

    if opts.r is not None:
        if opts.r < k:
            raise LayoutError(f"decomposition size r={opts.r} is below rank {k}")
        sizes = [opts.r]
    elif opts.r_offset is not None:
        sizes = [k + opts.r_offset]
    else:
        sizes = [k, k + 1, k + 2]

    rng = np.random.default_rng(opts.seed)
    warm = np.zeros(sizes[0] ** 2)
    best: Optional[_StartOutcome] = None
    best_r = sizes[0]
    finals: list[float] = []
    total_evals = 0
    n_starts = 0
    n_conv = 0
    floor = False
    by_r = {}

    for r in sizes:
        if best is not None:
            warm = _embed_params(best.x, best_r, r)
        x0s = [warm] + [rng.uniform(-math.pi, math.pi, r * r) for _ in range(opts.starts - 1)]
        if opts.workers > 1:
            with ThreadPoolExecutor(max_workers=opts.workers) as pool:
                outcomes = list(pool.map(lambda a: prob.run_start(a[0], a[1], r), enumerate(x0s)))
        else:
            outcomes = []
            for i, x0 in enumerate(x0s):
                outcomes.append(prob.run_start(i, x0, r))
                if outcomes[-1].floor:
                    break
        stage_best = None
        for out in outcomes:
            n_starts += 1
            total_evals += out.evaluations
            n_conv += out.converged
            finals.append(out.f)
            if stage_best is None or out.f < stage_best.f:
                stage_best = out
            if out.floor:
                floor = True
                break
        by_r[r] = stage_best.f ** 2
        if best is None or stage_best.f <= best.f:
            best, best_r = stage_best, r
        if floor:
            break

    dec = prob.decomposition(best.x, best_r)
    return RoofResult(
        value=float(best.f) ** 2,
        best=dec,
        starts=n_starts,
        converged_starts=int(n_conv),
        spread=float(max(finals) - min(finals)),
        evaluations=total_evals,
        converged=n_conv > 0,
        floor_reached=floor,
        by_r=by_r,
    )


def scren_mixed(rho: DensityMatrix, cut, opts: Optional[RoofOptions] = None) -> MeasureValue:
    """SCREN of a mixed state across `cut` | complement via the convex-roof search."""
    cut = _party_set(rho.layout, cut, proper=True, name="cut")
    res = minimize_roof(rho, lambda psi: scren_pure(psi, cut).value, opts)
    return MeasureValue(res.value, OPTIMIZER, {"cut": list(cut), "roof": res.summary()})


def with_seed(opts: Optional[RoofOptions], seed: int) -> RoofOptions:
    return replace(opts or RoofOptions(), seed=int(seed))
