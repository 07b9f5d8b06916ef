"""
Dense linear algebra over multipartite tensor-product spaces.

All vectors and matrices use a mixed-radix, row-major product basis in which
party 0 is the most significant digit. Party indices are 0-based throughout
the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12
TRACE_NORM_HERMITIAN_TOL = 1e-10
SCHMIDT_CUTOFF = 1e-14


class LayoutError(ValueError):
    """Invalid layout, party index set or partition."""


class StateValidationError(ValueError):
    """A state violates a physical invariant (norm, trace, hermiticity, positivity)."""


@dataclass(frozen=True)
class SubsystemLayout:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        if len(dims) == 0:
            raise LayoutError("layout needs at least one party")
        if any(x < 2 for x in dims):
            raise LayoutError(f"every local dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def subdim(self, parties: Iterable[int]) -> int:
        return int(np.prod([self.dims[i] for i in parties], dtype=np.int64))

    def index(self, digits: Sequence[int]) -> int:
        """Flat basis index of a product basis string."""
        return int(np.ravel_multi_index(tuple(digits), self.dims))

    @classmethod
    def uniform(cls, n: int, d: int) -> "SubsystemLayout":
        return cls((d,) * n)


def _party_set(layout: SubsystemLayout, parties, *, proper: bool = False,
               name: str = "party set") -> tuple[int, ...]:
    try:
        s = sorted(set(int(i) for i in parties))
    except TypeError:
        s = [int(parties)]
    if not s:
        raise LayoutError(f"{name} must be non-empty")
    if s[0] < 0 or s[-1] >= layout.n:
        raise LayoutError(f"{name} {s} out of range for {layout.n} parties")
    if proper and len(s) == layout.n:
        raise LayoutError(f"{name} must be a proper subset of the parties")
    return tuple(s)


@dataclass(frozen=True, eq=False)
class PureState:
    layout: SubsystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape[0] != self.layout.total_dim:
            raise LayoutError(
                f"amplitude vector has length {amp.shape[0]}, layout needs {self.layout.total_dim}")
        nrm = float(np.vdot(amp, amp).real)
        if abs(nrm - 1.0) > NORM_TOL:
            raise StateValidationError(f"pure state not normalized: squared norm {nrm!r}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def projector(self) -> "DensityMatrix":
        return DensityMatrix._trusted(self.layout, np.outer(self.amplitudes, self.amplitudes.conj()))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    layout: SubsystemLayout
    entries: np.ndarray
    _checked: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        D = self.layout.total_dim
        if m.shape != (D, D):
            raise LayoutError(f"density matrix has shape {m.shape}, layout needs {(D, D)}")
        if self._checked:
            herm = np.max(np.abs(m - m.conj().T)) if D else 0.0
            if herm > HERMITIAN_TOL:
                raise StateValidationError(f"density matrix not Hermitian (max deviation {herm:.3e})")
            tr = np.trace(m)
            if abs(tr - 1.0) > TRACE_TOL:
                raise StateValidationError(f"density matrix trace {tr!r} differs from 1")
            lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
            if lo < -PSD_TOL:
                raise StateValidationError(f"density matrix has negative eigenvalue {lo:.3e}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def _trusted(cls, layout: SubsystemLayout, entries: np.ndarray) -> "DensityMatrix":
        # skips validation; only for matrices produced by exact operations on valid states
        return cls(layout, entries, _checked=False)

    def tensor(self) -> np.ndarray:
        return self.entries.reshape(self.layout.dims * 2)


@dataclass(frozen=True)
class PartitionMap:
    """Coarse-graining of parties into groups, each group ascending."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        if not groups or any(len(g) == 0 for g in groups):
            raise LayoutError("partition groups must be non-empty")
        for g in groups:
            if list(g) != sorted(set(g)):
                raise LayoutError(f"partition group {g} must be strictly ascending")
        object.__setattr__(self, "groups", groups)

    def validate(self, n: int) -> None:
        flat = sorted(i for g in self.groups for i in g)
        if flat != list(range(n)):
            raise LayoutError(f"groups {self.groups} do not partition parties 0..{n - 1}")

    @classmethod
    def singletons(cls, n: int) -> "PartitionMap":
        return cls(tuple((i,) for i in range(n)))


State = Union[PureState, DensityMatrix]


def eigendecompose_hermitian(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvectors (columns)."""
    H = np.asarray(H, dtype=complex)
    if H.size and np.max(np.abs(H - H.conj().T)) > TRACE_NORM_HERMITIAN_TOL:
        raise StateValidationError("matrix is not Hermitian within 1e-10")
    w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
    return w[::-1], v[:, ::-1]


def reduced_matrix(psi: PureState, keep) -> np.ndarray:
    """Marginal of a pure state on `keep`, as a raw matrix."""
    keep = _party_set(psi.layout, keep, name="keep set")
    rest = tuple(i for i in range(psi.layout.n) if i not in keep)
    t = np.transpose(psi.tensor(), keep + rest).reshape(psi.layout.subdim(keep), -1)
    return t @ t.conj().T


def partial_trace(rho: State, keep) -> DensityMatrix:
    """Trace out every party not in `keep`; kept parties retain their original order."""
    layout = rho.layout
    keep = _party_set(layout, keep, name="keep set")
    sub = SubsystemLayout(tuple(layout.dims[i] for i in keep))
    if isinstance(rho, PureState):
        return DensityMatrix._trusted(sub, reduced_matrix(rho, keep))
    if len(keep) == layout.n:
        return rho
    n = layout.n
    rest = tuple(i for i in range(n) if i not in keep)
    dk, dr = layout.subdim(keep), layout.subdim(rest)
    t = np.transpose(rho.tensor(), keep + rest + tuple(n + i for i in keep) + tuple(n + i for i in rest))
    t = t.reshape(dk, dr, dk, dr)
    return DensityMatrix._trusted(sub, np.einsum("ikjk->ij", t))


def partial_transpose(rho: State, subset) -> np.ndarray:
    """Transpose the row/column indices of the parties in `subset`."""
    layout = rho.layout
    subset = _party_set(layout, subset, proper=True, name="transposed set")
    if isinstance(rho, PureState):
        rho = rho.projector()
    n = layout.n
    axes = list(range(2 * n))
    for i in subset:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    D = layout.total_dim
    return np.transpose(rho.tensor(), axes).reshape(D, D)


def trace_norm(H: np.ndarray) -> float:
    H = np.asarray(H, dtype=complex)
    if H.size and np.max(np.abs(H - H.conj().T)) > TRACE_NORM_HERMITIAN_TOL:
        raise StateValidationError("trace_norm expects a Hermitian matrix (tolerance 1e-10)")
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (H + H.conj().T)))))


def schmidt_coefficients(psi: PureState, cut) -> np.ndarray:
    """Schmidt coefficients of `psi` across `cut` | complement, descending."""
    layout = psi.layout
    cut = _party_set(layout, cut, proper=True, name="cut")
    rest = tuple(i for i in range(layout.n) if i not in cut)
    m = np.transpose(psi.tensor(), cut + rest).reshape(layout.subdim(cut), -1)
    s = np.linalg.svd(m, compute_uv=False)
    # numerically zero coefficients are not part of the decomposition
    return s[: max(1, int(np.sum(s > SCHMIDT_CUTOFF)))]


def merge_parties(state: State, pmap: PartitionMap) -> State:
    """Regroup parties into the coarse layout described by `pmap`.

    Group s becomes party s, with local dimension equal to the product of its
    members' dimensions; inside a group the lower-indexed party is the more
    significant digit.
    """
    layout = state.layout
    pmap.validate(layout.n)
    order = tuple(i for g in pmap.groups for i in g)
    coarse = SubsystemLayout(tuple(layout.subdim(g) for g in pmap.groups))
    n = layout.n
    if isinstance(state, PureState):
        amp = np.transpose(state.tensor(), order).reshape(-1)
        return PureState(coarse, amp)
    t = np.transpose(state.tensor(), order + tuple(n + i for i in order))
    D = coarse.total_dim
    return DensityMatrix._trusted(coarse, t.reshape(D, D))


def embed_parties(state: State, dims: Sequence[int]) -> State:
    """Embed each party into a larger local space, |j> -> |j> for j below the old dimension."""
    layout = state.layout
    new = SubsystemLayout(tuple(dims))
    if new.n != layout.n or any(a < b for a, b in zip(new.dims, layout.dims)):
        raise LayoutError(f"cannot embed {layout.dims} into {new.dims}")
    sl = tuple(slice(0, k) for k in layout.dims)
    if isinstance(state, PureState):
        t = np.zeros(new.dims, dtype=complex)
        t[sl] = state.tensor()
        return PureState(new, t.reshape(-1))
    t = np.zeros(new.dims * 2, dtype=complex)
    t[sl + sl] = state.tensor()
    D = new.total_dim
    return DensityMatrix._trusted(new, t.reshape(D, D))


def apply_kraus(rho: DensityMatrix, kraus: Sequence[np.ndarray]) -> DensityMatrix:
    out = sum(K @ rho.entries @ K.conj().T for K in kraus)
    return DensityMatrix(rho.layout, out)
