"""
Monogamy (CKW-type) and strong-monogamy residuals built on SCREN.

For a state on parties 0..n-1 and a focus party f, the strong-monogamy sum
runs over every level m = 2..n-1 and every (m-1)-subset of the non-focus
parties, each subset counted once; the term is the mixed m-party SCREN of the
marginal on {f} U subset, raised to m/2. The n-party SCREN of a pure state is
the one-vs-rest SCREN minus that sum.

PCS inputs short-circuit to closed forms unless ``force_generic`` is set, in
which case every term goes through the convex-roof optimizer.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations
from typing import Optional, Union

import numpy as np
from scipy.stats import unitary_group

from .convex_roof import (
    RoofOptions,
    eigen_ensemble,
    hjw_decomposition,
    minimize_roof,
    roof_objective,
    scren_mixed,
)
from .linalg_core import DensityMatrix, LayoutError, PureState, partial_trace
from .measures import (
    CLOSED_FORM,
    OPTIMIZER,
    SPECTRAL,
    MeasureValue,
    NegativeMeasureError,
    scren_pcs_one_vs_rest,
    scren_pcs_pair,
    scren_pure,
)
from .states import (
    DegenerateReductionError,
    PCSState,
    build_pcs,
    recognize_pcs,
    reduce_pcs_symbolic,
)

Source = Union[PCSState, PureState, DensityMatrix]


class RecursionLimitError(RuntimeError):
    """Generic n-SCREN recursion requested for more parties than allowed."""


@dataclass(frozen=True)
class MonogamyOptions:
    roof: RoofOptions = field(default_factory=RoofOptions)
    force_generic: bool = False
    tol_closed: float = 1e-10
    tol_optimizer: float = 1e-4
    tol_zero: float = 1e-6
    max_parties: int = 6

    def __post_init__(self):
        if min(self.tol_closed, self.tol_optimizer, self.tol_zero) <= 0:
            raise ValueError("tolerances must be > 0")

    @property
    def seed(self) -> int:
        return self.roof.seed

    def reseeded(self, seed: int) -> "MonogamyOptions":
        return replace(self, roof=replace(self.roof, seed=int(seed)))


def derive_seed(root: int, *key: int) -> int:
    """Stable child seed for a term labelled by `key`."""
    ss = np.random.SeedSequence([int(root) & 0xFFFFFFFFFFFFFFFF, len(key), *[int(k) for k in key]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class IndexVector:
    m: int
    parties: tuple[int, ...]


def enumerate_index_vectors(n: int, focus: int, m: int) -> list[IndexVector]:
    """All (m-1)-subsets of the non-focus parties, ascending, in lexicographic order."""
    if not 2 <= m <= n - 1:
        raise LayoutError(f"level m={m} outside 2..{n - 1}")
    if not 0 <= focus < n:
        raise LayoutError(f"focus {focus} out of range for {n} parties")
    others = [i for i in range(n) if i != focus]
    return [IndexVector(m, c) for c in combinations(others, m - 1)]


@dataclass(frozen=True)
class Term:
    parties: tuple[int, ...]
    m: int
    value: float
    method: str
    converged: bool = True
    spread: float = 0.0

    @property
    def exponent(self) -> float:
        return self.m / 2

    @property
    def contribution(self) -> float:
        return max(self.value, 0.0) ** self.exponent


@dataclass(frozen=True)
class MonogamyReport:
    claim: str
    focus: int
    lhs: float
    lhs_method: str
    terms: tuple[Term, ...]
    residual: float
    tolerance: float
    passed: bool
    saturated: bool
    seed: int
    converged: bool = True
    max_spread: float = 0.0

    def recomputed_residual(self) -> float:
        return self.lhs - sum(t.contribution for t in self.terms)

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "focus": self.focus,
            "lhs": self.lhs,
            "lhs_method": self.lhs_method,
            "terms": [{"parties": list(t.parties), "m": t.m, "value": t.value, "method": t.method}
                      for t in self.terms],
            "residual": self.residual,
            "pass": self.passed,
            "saturated": self.saturated,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "converged": self.converged,
            "max_spread": self.max_spread,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _n_parties(source: Source) -> int:
    return source.n if isinstance(source, PCSState) else source.layout.n


def _resolve(source: Source, opts: MonogamyOptions):
    """(pcs description or None, materialized state) for a source."""
    if isinstance(source, PCSState):
        return (None if opts.force_generic else source), source
    if opts.force_generic:
        return None, source
    return recognize_pcs(source), source


def _materialize(state) -> Union[PureState, DensityMatrix]:
    return build_pcs(state) if isinstance(state, PCSState) else state


def _one_vs_rest(pcs, state, focus, opts) -> MeasureValue:
    if pcs is not None:
        return scren_pcs_one_vs_rest(pcs, focus)
    st = _materialize(state)
    if isinstance(st, PureState):
        return scren_pure(st, [focus])
    return scren_mixed(st, [focus], opts.roof)


def _term(pcs, state, focus: int, vec: IndexVector, opts: MonogamyOptions) -> Term:
    parties = tuple(sorted((focus,) + vec.parties))
    pos = parties.index(focus)
    if pcs is not None:
        if vec.m == 2:
            mv = scren_pcs_pair(pcs, focus, vec.parties[0])
            return Term(vec.parties, 2, mv.value, CLOSED_FORM)
        # reduced PCS states have vanishing n-SCREN
        return Term(vec.parties, vec.m, 0.0, CLOSED_FORM)
    seed = derive_seed(opts.seed, vec.m, *vec.parties)
    child = opts.reseeded(seed)
    marginal = partial_trace(_materialize(state), parties)
    if vec.m == 2:
        mv = scren_mixed(marginal, [pos], child.roof)
    else:
        mv = _multiparty_mixed(marginal, pos, child)
    conv, spread = _diagnostics(mv)
    return Term(vec.parties, vec.m, mv.value, mv.method, conv, spread)


def _diagnostics(mv: MeasureValue) -> tuple[bool, float]:
    roof = mv.detail.get("roof")
    if roof is None:
        return True, 0.0
    return bool(roof["converged"]), float(roof["spread"])


def _all_vectors(n: int, focus: int) -> list[IndexVector]:
    return [v for m in range(2, n) for v in enumerate_index_vectors(n, focus, m)]


def _check_n(n: int, opts: MonogamyOptions) -> None:
    if n < 3:
        raise LayoutError(f"need at least 3 parties, got {n}")
    if n > opts.max_parties:
        raise RecursionLimitError(
            f"generic n-SCREN recursion on {n} parties exceeds max_parties={opts.max_parties}")


def multiparty_scren_pure(psi: PureState, focus: int,
                          opts: Optional[MonogamyOptions] = None) -> MeasureValue:
    """n-party SCREN of a pure state.

    Returned signed: a negative value would be a counterexample to strong
    monogamy and is never clamped here.
    """
    opts = opts or MonogamyOptions()
    n = psi.layout.n
    _check_n(n, opts)
    pcs = None if opts.force_generic else recognize_pcs(psi)
    lhs = scren_pure(psi, [focus]).value
    terms = [_term(pcs, psi, focus, v, opts) for v in _all_vectors(n, focus)]
    value = lhs - sum(t.contribution for t in terms)
    methods = {t.method for t in terms}
    method = OPTIMIZER if OPTIMIZER in methods else (CLOSED_FORM if pcs is not None else SPECTRAL)
    return MeasureValue(value, method, {"lhs": lhs, "terms": [asdict(t) for t in terms],
                                        "negative": value < 0}, signed=True)


def _multiparty_mixed(rho: DensityMatrix, focus: int, opts: MonogamyOptions) -> MeasureValue:
    n = rho.layout.n
    _check_n(n, opts)
    if not opts.force_generic and recognize_pcs(rho) is not None:
        return MeasureValue(0.0, CLOSED_FORM, {"recognized": "pcs"})

    def measure(psi):
        return multiparty_scren_pure(psi, focus, opts).value

    res = minimize_roof(rho, measure, opts.roof)
    return MeasureValue(res.value, OPTIMIZER, {"roof": res.summary()})


def multiparty_scren_mixed(rho: DensityMatrix, focus: int,
                           opts: Optional[MonogamyOptions] = None) -> MeasureValue:
    """Convex roof of sqrt(n-party SCREN) over decompositions of `rho`, squared.

    Raises NegativeMeasureError if some decomposition member has n-party SCREN
    below -1e-6.
    """
    return _multiparty_mixed(rho, focus, opts or MonogamyOptions())


def _report(claim, source, focus, opts, vectors) -> MonogamyReport:
    n = _n_parties(source)
    if n < 3:
        raise LayoutError(f"need at least 3 parties, got {n}")
    if not 0 <= focus < n:
        raise LayoutError(f"focus {focus} out of range for {n} parties")
    pcs, state = _resolve(source, opts)
    lhs = _one_vs_rest(pcs, state, focus, opts)
    terms = tuple(_term(pcs, state, focus, v, opts) for v in vectors)
    residual = lhs.value - sum(t.contribution for t in terms)
    methods = {lhs.method} | {t.method for t in terms}
    tol = opts.tol_optimizer if OPTIMIZER in methods else opts.tol_closed
    conv, spread = _diagnostics(lhs)
    return MonogamyReport(
        claim=claim, focus=focus, lhs=lhs.value, lhs_method=lhs.method, terms=terms,
        residual=residual, tolerance=tol, passed=residual >= -tol,
        saturated=abs(residual) <= tol, seed=opts.seed,
        converged=conv and all(t.converged for t in terms),
        max_spread=max([spread] + [t.spread for t in terms]))


def ckw_residual_scren(source: Source, focus: int = 0,
                       opts: Optional[MonogamyOptions] = None) -> MonogamyReport:
    """One-vs-rest SCREN minus the sum of pairwise SCRENs of the focus party."""
    opts = opts or MonogamyOptions()
    n = _n_parties(source)
    vecs = enumerate_index_vectors(n, focus, 2) if n >= 3 else []
    return _report("ckw", source, focus, opts, vecs)


def strong_monogamy_residual(source: Source, focus: int = 0,
                             opts: Optional[MonogamyOptions] = None) -> MonogamyReport:
    opts = opts or MonogamyOptions()
    n = _n_parties(source)
    if n < 3:
        raise LayoutError(f"need at least 3 parties, got {n}")
    return _report("sm", source, focus, opts, _all_vectors(n, focus))


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    error: Optional[str] = None


@dataclass
class VerificationReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "checks": [asdict(c) for c in self.checks]}


def _reduction_error(pcs: PCSState) -> float:
    rho = build_pcs(pcs)
    worst = 0.0
    for t in range(pcs.n):
        keep = [i for i in range(pcs.n) if i != t]
        try:
            red = reduce_pcs_symbolic(pcs, [t])
        except DegenerateReductionError:
            numeric = partial_trace(rho, keep).entries
            vac = np.zeros_like(numeric)
            vac[0, 0] = 1.0
            worst = max(worst, float(np.max(np.abs(numeric - vac))))
            continue
        if red.lam > pcs.lam or red.p > pcs.p:
            return math.inf
        diff = build_pcs(red).entries - partial_trace(rho, keep).entries
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def verify_pcs(pcs: PCSState, opts: Optional[MonogamyOptions] = None,
               focus: int = 0, hjw_samples: int = 50) -> VerificationReport:
    """Run the reduction, lambda-independence, decomposition-independence,
    monogamy, strong-monogamy and zero n-SCREN checks on one PCS state.

    A failing sub-computation is recorded as a failed check with its error
    message; the remaining checks still run.
    """
    opts = opts or MonogamyOptions()
    checks: list[Check] = []

    def run(name, tol, fn):
        try:
            v = float(fn())
            checks.append(Check(name, v, tol, bool(abs(v) <= tol)))
        except (ArithmeticError, ValueError, RuntimeError) as exc:
            checks.append(Check(name, math.nan, tol, False, f"{type(exc).__name__}: {exc}"))

    run("reduction", opts.tol_closed, lambda: _reduction_error(pcs))

    def lam_dependence():
        vals = [scren_pcs_one_vs_rest(PCSState(pcs.coeffs, type(pcs.params)(pcs.p, lam)), focus).value
                for lam in (0.0, 0.3, 0.7, 1.0)]
        return max(vals) - min(vals)

    run("lambda_independence", opts.tol_closed, lam_dependence)

    def lam_dependence_optimizer():
        vals = [scren_mixed(build_pcs(PCSState(pcs.coeffs, type(pcs.params)(pcs.p, lam))), [focus],
                            opts.roof).value for lam in (0.0, 1.0)]
        return max(vals) - min(vals)

    run("lambda_independence_optimizer", opts.tol_optimizer, lam_dependence_optimizer)

    def decomposition_spread():
        rho = build_pcs(pcs)
        r = len(eigen_ensemble(rho)) + 1
        rng = np.random.default_rng(opts.seed)
        vals = []
        for _ in range(hjw_samples):
            U = unitary_group.rvs(r, random_state=rng) if r > 1 else np.eye(1)
            dec = hjw_decomposition(rho, U)
            vals.append(roof_objective(dec, lambda psi: scren_pure(psi, [focus]).value))
        return max(vals) - min(vals)

    run("decomposition_independence", 1e-9, decomposition_spread)

    generic = replace(opts, force_generic=True)
    run("ckw", opts.tol_closed, lambda: ckw_residual_scren(pcs, focus, opts).residual)
    run("ckw_optimizer", opts.tol_optimizer, lambda: ckw_residual_scren(pcs, focus, generic).residual)
    run("sm", opts.tol_closed, lambda: strong_monogamy_residual(pcs, focus, opts).residual)
    if pcs.n <= 4:
        run("sm_optimizer", opts.tol_optimizer,
            lambda: strong_monogamy_residual(pcs, focus, generic).residual)
        run("nscren_zero", opts.tol_zero,
            lambda: multiparty_scren_mixed(build_pcs(pcs), focus, generic).value)
    return VerificationReport(checks)
