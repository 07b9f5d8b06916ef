"""
Negativity, squared negativity (SCREN of pure states), qubit tangle, and the
closed-form SCREN values of PCS states.

Negativity uses the unnormalized convention ||rho^{T_B}||_1 - 1, so a
two-qudit maximally entangled state has negativity d - 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .linalg_core import (
    LayoutError,
    PureState,
    _party_set,
    partial_transpose,
    reduced_matrix,
    schmidt_coefficients,
    trace_norm,
)
from .states import PCSState

CLOSED_FORM = "closed_form"
SPECTRAL = "spectral"
OPTIMIZER = "optimizer"

NEGATIVE_ROUNDOFF = 1e-9


class NegativeMeasureError(ArithmeticError):
    """A quantity that should be nonnegative came out clearly negative."""


@dataclass(frozen=True)
class MeasureValue:
    value: float
    method: str
    detail: dict[str, Any] = field(default_factory=dict)
    signed: bool = False

    def __post_init__(self):
        v = float(self.value)
        if not self.signed:
            if v < -NEGATIVE_ROUNDOFF:
                raise NegativeMeasureError(f"measure value {v!r} below -1e-9")
            v = max(v, 0.0)
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


def _cut(psi: PureState, cut) -> tuple[int, ...]:
    return _party_set(psi.layout, cut, proper=True, name="cut")


def _negativity_schmidt(psi: PureState, cut) -> float:
    s = schmidt_coefficients(psi, cut)
    return float(np.sum(s) ** 2 - 1.0)


def negativity_pure(psi: PureState, cut, path: str = "schmidt") -> MeasureValue:
    """Negativity of a pure state across `cut` | complement.

    ``path="schmidt"`` uses (sum_i s_i)^2 - 1 over the Schmidt coefficients;
    ``path="partial_transpose"`` builds the partial transpose explicitly and
    takes its trace norm. Both give the same value.
    """
    cut = _cut(psi, cut)
    if path == "schmidt":
        v = _negativity_schmidt(psi, cut)
    elif path == "partial_transpose":
        rest = tuple(i for i in range(psi.layout.n) if i not in cut)
        v = trace_norm(partial_transpose(psi.projector(), rest)) - 1.0
    else:
        raise ValueError(f"unknown path {path!r}")
    return MeasureValue(v, SPECTRAL, {"path": path, "cut": list(cut)})


def scren_pure(psi: PureState, cut) -> MeasureValue:
    cut = _cut(psi, cut)
    v = max(_negativity_schmidt(psi, cut), 0.0) ** 2
    return MeasureValue(v, SPECTRAL, {"cut": list(cut)})


def tangle_pure_qubit(psi: PureState, cut) -> MeasureValue:
    """4 det(rho_A) for a cut side that is a single qubit."""
    cut = _cut(psi, cut)
    if psi.layout.subdim(cut) != 2:
        raise LayoutError(f"tangle needs a qubit cut side, got dimension {psi.layout.subdim(cut)}")
    rho_a = reduced_matrix(psi, cut)
    return MeasureValue(4.0 * float(np.linalg.det(rho_a).real), SPECTRAL, {"cut": list(cut)})


def _check_party(pcs: PCSState, i: int) -> int:
    i = int(i)
    if not 0 <= i < pcs.n:
        raise LayoutError(f"party {i} out of range for {pcs.n} parties")
    return i


def scren_pcs_one_vs_rest(pcs: PCSState, focus: int) -> MeasureValue:
    """SCREN of a PCS state between party `focus` and all the others: 4 p^2 X_f sum_{i != f} X_i."""
    focus = _check_party(pcs, focus)
    X = pcs.coeffs.party_weights()
    rest = float(np.sum(np.delete(X, focus)))
    v = 4.0 * pcs.p ** 2 * float(X[focus]) * rest
    return MeasureValue(v, CLOSED_FORM, {"focus": focus})


def scren_pcs_pair(pcs: PCSState, i: int, j: int) -> MeasureValue:
    """SCREN of the two-party marginal on (i, j) of a PCS state: 4 p^2 X_i X_j."""
    i, j = _check_party(pcs, i), _check_party(pcs, j)
    if i == j:
        raise LayoutError("pair SCREN needs two distinct parties")
    X = pcs.coeffs.party_weights()
    v = 4.0 * pcs.p ** 2 * float(X[i]) * float(X[j])
    return MeasureValue(v, CLOSED_FORM, {"parties": [i, j]})
