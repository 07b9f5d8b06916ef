"""
Generalized W-class states, their partially coherent superpositions with the
vacuum (PCS states), and the structure-preserving maps between them.

A W-class state on n qudits of dimension d is fixed by a complex matrix
``a`` of shape (n, d-1): ``a[i, j-1]`` is the amplitude of the basis string
with level j on party i and 0 elsewhere. A PCS state adds the weight ``p``
of the W-class component and the coherency ``lam`` of its superposition with
the vacuum |0...0>.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .linalg_core import (
    DensityMatrix,
    LayoutError,
    PartitionMap,
    PureState,
    StateValidationError,
    SubsystemLayout,
    apply_kraus,
)

COEFF_NORM_TOL = 1e-12


class DegenerateReductionError(ValueError):
    """The kept parties carry no W-class weight, so the reduced W-class state is undefined."""


@dataclass(frozen=True, eq=False)
class WClassCoefficients:
    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=complex)
        # n = 1 is allowed so that reductions down to a single party stay representable
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise LayoutError(f"coefficient matrix must have shape (n, d-1) with d >= 2, got {a.shape}")
        nrm = float(np.sum(np.abs(a) ** 2))
        if abs(nrm - 1.0) > COEFF_NORM_TOL:
            raise StateValidationError(
                f"W-class normalization violated: sum |a_ij|^2 = {nrm!r} (must be 1 within 1e-12)")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.a.shape[1] + 1

    @property
    def layout(self) -> SubsystemLayout:
        return SubsystemLayout.uniform(self.n, self.d)

    def party_weights(self) -> np.ndarray:
        """X_i = sum_j |a_ij|^2 for every party i."""
        return np.sum(np.abs(self.a) ** 2, axis=1)

    @classmethod
    def standard_w(cls, n: int, d: int = 2) -> "WClassCoefficients":
        a = np.zeros((n, d - 1), dtype=complex)
        a[:, 0] = 1 / math.sqrt(n)
        return cls(a)


@dataclass(frozen=True)
class PCSParams:
    p: float
    lam: float

    def __post_init__(self):
        for name, v in (("p", self.p), ("lambda", self.lam)):
            if not (0.0 <= float(v) <= 1.0):
                raise StateValidationError(f"{name} must lie in [0, 1], got {v!r}")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "lam", float(self.lam))


@dataclass(frozen=True, eq=False)
class PCSState:
    coeffs: WClassCoefficients
    params: PCSParams

    @property
    def n(self) -> int:
        return self.coeffs.n

    @property
    def d(self) -> int:
        return self.coeffs.d

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def lam(self) -> float:
        return self.params.lam


def _w_vector(coeffs: WClassCoefficients) -> np.ndarray:
    n, d = coeffs.n, coeffs.d
    v = np.zeros(d ** n, dtype=complex)
    for i in range(n):
        stride = d ** (n - 1 - i)
        v[stride * np.arange(1, d)] = coeffs.a[i]
    return v


def _vacuum(layout: SubsystemLayout) -> np.ndarray:
    v = np.zeros(layout.total_dim, dtype=complex)
    v[0] = 1.0
    return v


def build_w_state(coeffs: WClassCoefficients) -> PureState:
    return PureState(coeffs.layout, _w_vector(coeffs))


def build_coherent_superposition(coeffs: WClassCoefficients, p: float) -> PureState:
    """sqrt(p)|W> + sqrt(1-p)|0...0>."""
    PCSParams(p, 1.0)
    amp = math.sqrt(p) * _w_vector(coeffs)
    amp[0] = math.sqrt(1.0 - p)
    return PureState(coeffs.layout, amp)


def build_pcs(pcs: PCSState) -> DensityMatrix:
    w = _w_vector(pcs.coeffs)
    vac = _vacuum(pcs.coeffs.layout)
    p, lam = pcs.p, pcs.lam
    c = lam * math.sqrt(p * (1.0 - p))
    rho = p * np.outer(w, w.conj()) + (1.0 - p) * np.outer(vac, vac)
    cross = np.outer(w, vac)
    rho = rho + c * (cross + cross.conj().T)
    return DensityMatrix(pcs.coeffs.layout, rho)


def phase_damp(psi: PureState, lam: float) -> DensityMatrix:
    """Phase-damping channel with Kraus operators sqrt(lam) I, sqrt(1-lam)(I - P0), sqrt(1-lam) P0.

    P0 is the projector onto the vacuum |0...0>.
    """
    if not (0.0 <= lam <= 1.0):
        raise StateValidationError(f"lambda must lie in [0, 1], got {lam!r}")
    D = psi.layout.total_dim
    eye = np.eye(D, dtype=complex)
    p0 = np.zeros((D, D), dtype=complex)
    p0[0, 0] = 1.0
    kraus = [math.sqrt(lam) * eye, math.sqrt(1 - lam) * (eye - p0), math.sqrt(1 - lam) * p0]
    return apply_kraus(psi.projector(), kraus)


def _normalize_parties(n: int, parties) -> tuple[int, ...]:
    s = tuple(sorted(set(int(i) for i in parties)))
    if s and (s[0] < 0 or s[-1] >= n):
        raise LayoutError(f"party indices {s} out of range for {n} parties")
    return s


def reduce_pcs_symbolic(pcs: PCSState, traced: Iterable[int]) -> PCSState:
    """Reduced state of a PCS state after tracing out `traced`, again as a PCS state.

    With Omega the W weight of the kept parties, the reduced state has
    coefficients a_kept / sqrt(Omega), p' = p * Omega and
    lam' = lam * sqrt((1 - p) / (1 - p')). For p = 1 the coherence term
    vanishes and lam' = 0 is returned.

    Raises
    ------
    DegenerateReductionError
        If Omega = 0.
    """
    n = pcs.n
    traced = _normalize_parties(n, traced)
    if not traced or len(traced) == n:
        raise LayoutError("traced set must be a non-empty proper subset of the parties")
    keep = [i for i in range(n) if i not in traced]
    a_kept = pcs.coeffs.a[keep]
    omega = min(float(np.sum(np.abs(a_kept) ** 2)), 1.0)
    if omega == 0.0:
        raise DegenerateReductionError(
            f"kept parties {keep} carry zero W-class weight; reduced W-class state undefined")
    p, lam = pcs.p, pcs.lam
    p_new = p * omega
    lam_new = 0.0 if p_new >= 1.0 or p >= 1.0 else lam * math.sqrt((1.0 - p) / (1.0 - p_new))
    coeffs = WClassCoefficients(a_kept / math.sqrt(omega))
    return PCSState(coeffs, PCSParams(p_new, lam_new))


def merge_wclass_coeffs(coeffs: WClassCoefficients, pmap: PartitionMap) -> WClassCoefficients:
    """W-class coefficients after regrouping parties per `pmap`.

    Every coarse party gets local dimension d ** n_max, n_max the largest group
    size. Within a group (i_0 < ... < i_{k-1}), level j on member i_t is the
    coarse level j * d ** (k - 1 - t); unused levels carry zero.
    """
    n, d = coeffs.n, coeffs.d
    pmap.validate(n)
    d_max = d ** max(len(g) for g in pmap.groups)
    b = np.zeros((len(pmap.groups), d_max - 1), dtype=complex)
    for s, g in enumerate(pmap.groups):
        k = len(g)
        for t, i in enumerate(g):
            levels = np.arange(1, d) * d ** (k - 1 - t)
            b[s, levels - 1] = coeffs.a[i]
    return WClassCoefficients(b)


def sample_random_wclass(n: int, d: int, seed: Optional[int] = None) -> WClassCoefficients:
    """Coefficients drawn uniformly from the unit sphere of C^{n(d-1)}."""
    if n < 2 or d < 2:
        raise LayoutError("need n >= 2 and d >= 2")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, d - 1)) + 1j * rng.standard_normal((n, d - 1))
    return WClassCoefficients(z / np.linalg.norm(z))


def sample_random_pcs(n: int, d: int, seed: Optional[int] = None) -> PCSState:
    """Random coefficients with p and lambda uniform on [0, 1]."""
    rng = np.random.default_rng(seed)
    coeffs = sample_random_wclass(n, d, rng.integers(2 ** 63))
    return PCSState(coeffs, PCSParams(rng.uniform(), rng.uniform()))


def canonical_phase(a: np.ndarray) -> np.ndarray:
    """Fix the global phase so the largest-modulus entry is real and positive."""
    a = np.asarray(a, dtype=complex)
    flat = a.reshape(-1)
    if flat.size == 0:
        return a.copy()
    k = int(np.argmax(np.abs(flat)))
    if flat[k] == 0:
        return a.copy()
    return a * (abs(flat[k]) / flat[k])


def same_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-12) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    return bool(np.max(np.abs(canonical_phase(a) - canonical_phase(b)), initial=0.0) <= atol)


def _single_excitation_index(n: int, d: int) -> np.ndarray:
    return np.array([d ** (n - 1 - i) * j for i in range(n) for j in range(1, d)])


def recognize_pcs(state: Union[PureState, DensityMatrix], tol: float = 1e-10) -> Optional[PCSState]:
    """Recover a PCS description of `state` if it lies in the PCS family.

    Returns None when the local dimensions are not uniform, when the state has
    support outside span{single-excitation strings, vacuum}, or when it does
    not have the PCS structure within `tol`.
    """
    layout = state.layout
    d = layout.dims[0]
    n = layout.n
    if any(x != d for x in layout.dims):
        return None
    S = _single_excitation_index(n, d)
    support = np.concatenate([[0], S])

    if isinstance(state, PureState):
        amp = state.amplitudes
        off = np.delete(amp, support)
        if off.size and np.max(np.abs(off)) > tol:
            return None
        v0 = amp[0]
        if abs(v0) > 0:
            amp = amp * (abs(v0) / v0)
        w = amp[S]
        p = float(np.vdot(w, w).real)
        if p <= tol:
            return PCSState(WClassCoefficients.standard_w(n, d), PCSParams(0.0, 1.0))
        p = min(p, 1.0)
        return PCSState(WClassCoefficients((w / np.linalg.norm(w)).reshape(n, d - 1)),
                        PCSParams(p, 1.0))

    rho = state.entries
    mask = np.ones(rho.shape, dtype=bool)
    mask[np.ix_(support, support)] = False
    if mask.any() and np.max(np.abs(rho[mask])) > tol:
        return None
    B = rho[np.ix_(S, S)]
    p = float(np.trace(B).real)
    if abs(rho[0, 0].real - (1.0 - p)) > tol:
        return None
    if p <= tol:
        return PCSState(WClassCoefficients.standard_w(n, d), PCSParams(0.0, 1.0))
    evals, evecs = np.linalg.eigh(B)
    w = evecs[:, -1]
    if np.max(np.abs(B - p * np.outer(w, w.conj()))) > tol:
        return None
    c = rho[S, 0]
    ov = np.vdot(w, c)
    if abs(ov) > 0:
        w = w * (ov / abs(ov))
    kappa = abs(ov)
    if np.max(np.abs(c - kappa * w)) > tol:
        return None
    p = min(p, 1.0)
    if p >= 1.0:
        lam = 0.0
    else:
        lam = min(kappa / math.sqrt(p * (1.0 - p)), 1.0)
    w = canonical_phase(w) if kappa == 0 else w
    return PCSState(WClassCoefficients((w / np.linalg.norm(w)).reshape(n, d - 1)), PCSParams(p, lam))


def pcs_to_dict(pcs: PCSState) -> dict:
    return {
        "n": pcs.n,
        "d": pcs.d,
        "a": [[[float(z.real), float(z.imag)] for z in row] for row in pcs.coeffs.a],
        "p": pcs.p,
        "lambda": pcs.lam,
    }


def pcs_from_dict(obj: dict) -> PCSState:
    """Parse a state-file object; raises ValueError (or a subclass) on malformed content."""
    try:
        n, d = int(obj["n"]), int(obj["d"])
        rows = obj["a"]
        a = np.array([[complex(float(e[0]), float(e[1])) for e in row] for row in rows], dtype=complex)
        p, lam = float(obj.get("p", 1.0)), float(obj.get("lambda", 1.0))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed state object: {exc!r}") from exc
    if a.shape != (n, d - 1):
        raise LayoutError(f"coefficient matrix shape {a.shape} does not match n={n}, d={d}")
    return PCSState(WClassCoefficients(a), PCSParams(p, lam))


def save_state(pcs: PCSState, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(pcs_to_dict(pcs), indent=2) + "\n")


def load_state(path: Union[str, Path]) -> PCSState:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"state file {path} is not valid JSON: {exc}") from exc
    return pcs_from_dict(obj)
