"""KMS states for generalized gauge actions, via their diagonal measures.

For a gauge function ``f`` and ``beta > 1`` put ``phi = (1 - f) log(beta)``.
A state on the diagonal is the restriction of a ``log(beta)``-KMS state for
the action generated by ``f`` exactly when it satisfies
``mu(L_phi a) = beta * mu(a)``.  Such a ``beta`` exists for exactly one value
``beta_f``, which :func:`solve_beta` locates by bisection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .errors import NoBracket, NoConvergence
from .locfun import LocallyConstantFunction, constant, indicator
from .measure import MarkovMeasure, expectation, zero_potential
from .ruelle import RpfData, apply, rpf
from .sft import EPS_EIG, MAX_ITER, TransitionMatrix, perron

__all__ = [
    "KmsSolution",
    "MarkovMeasure",
    "expectation",
    "gauge_kms",
    "kms_condition_check",
    "kms_measure",
    "kms_potential",
    "solve_beta",
]

log = logging.getLogger(__name__)

EPS_ROOT = 1e-10
BETA_CAP = 1e6


def kms_potential(f: LocallyConstantFunction, beta: float) -> LocallyConstantFunction:
    """``phi = (1 - f) log(beta)``."""
    return (1 - f) * math.log(beta)


def gauge_kms(m: TransitionMatrix, tol: float = EPS_EIG, max_iter: int = MAX_ITER) -> MarkovMeasure:
    """Diagonal of the unique KMS state of the gauge action.

    ``mass(mu) = r**(-|mu|) * v[mu_last]`` with ``v`` the right Perron vector
    scaled so that its entries sum to ``r``.
    """
    pd = perron(m, tol, max_iter)
    v = pd.right_vector / pd.right_vector.sum()
    return MarkovMeasure(m, 1, v, zero_potential(m), pd.eigenvalue, generator="gauge")


def kms_measure(
    f: LocallyConstantFunction, beta: float, tol: float = EPS_EIG, max_iter: int = MAX_ITER
) -> MarkovMeasure:
    """Eigenmeasure of ``L_phi`` for ``phi = (1 - f) log(beta)``.

    This is a KMS diagonal only when ``beta`` equals ``beta_f``; use
    :func:`kms_condition_check` or :func:`solve_beta` to confirm.
    """
    if beta <= 1:
        raise ValueError("beta must exceed 1")
    return rpf(kms_potential(f, beta), tol, max_iter).eigenmeasure


def kms_condition_check(
    f: LocallyConstantFunction, beta: float, measure: MarkovMeasure, depth_bound: int
) -> float:
    """Max of ``|mu(L_phi chi_a) - beta mu(chi_a)|`` over cylinders of length <= depth_bound."""
    m = f.matrix
    phi = kms_potential(f, beta)
    worst = 0.0
    for k in range(depth_bound + 1):
        for w in m.words(k):
            chi = indicator(m, w) if w else constant(m, 1)
            lhs = expectation(measure, apply(phi, chi))
            worst = max(worst, abs(lhs - beta * measure.mass(w)))
    return worst


@dataclass(frozen=True, eq=False)
class KmsSolution:
    gauge: LocallyConstantFunction
    beta: float
    potential: LocallyConstantFunction
    measure: MarkovMeasure
    rpf: RpfData

    @property
    def log_beta(self) -> float:
        """Inverse temperature in the KMS condition."""
        return math.log(self.beta)

    def to_json(self, mass_depth: int = 0) -> dict:
        m = self.gauge.matrix
        masses = self.measure.masses(mass_depth) if mass_depth > 0 else {}
        return {
            "beta": self.beta,
            "log_beta": self.log_beta,
            "f": self.gauge.to_json(),
            "masses": {m.format_word(w): v for w, v in masses.items()},
        }


def _pressure_gap(f, beta, tol, max_iter):
    return math.log(rpf(kms_potential(f, beta), tol, max_iter).eigenvalue) - math.log(beta)


def solve_beta(
    f: LocallyConstantFunction,
    bracket: tuple[float, float] | None = None,
    root_tol: float = EPS_ROOT,
    tol: float = EPS_EIG,
    max_iter: int = MAX_ITER,
    max_bisections: int = 200,
) -> KmsSolution:
    """Find the unique ``beta_f`` with ``r_phi == beta`` for ``phi = (1 - f) log(beta)``.

    Without a bracket ``f`` must be strictly positive; the default bracket is
    ``[1 + 1e-6, r_A**c]`` with ``c = ceil(max f / min f)``, expanded
    geometrically (up to ``beta = 1e6``) until the sign of
    ``F(beta) = log r_phi - log beta`` changes.
    """
    m = f.matrix
    if bracket is None:
        if f.min() <= 0:
            raise NoBracket("gauge function is not strictly positive; supply a bracket")
        c = math.ceil(f.max() / f.min())
        bracket = (1 + 1e-6, perron(m, tol, max_iter).eigenvalue ** c)
        expand = True
    else:
        expand = False
    lo, hi = map(float, bracket)
    if not 1 < lo < hi:
        raise ValueError("bracket must satisfy 1 < lo < hi")

    def F(b):
        return _pressure_gap(f, b, tol, max_iter)

    f_lo, f_hi = F(lo), F(hi)
    while expand and f_lo * f_hi > 0 and abs(f_hi) > root_tol and hi < BETA_CAP:
        lo, f_lo = hi, f_hi
        hi = min(hi * 2, BETA_CAP)
        f_hi = F(hi)
    if abs(f_lo) <= root_tol:
        beta = lo
    elif abs(f_hi) <= root_tol:
        beta = hi
    elif f_lo * f_hi > 0:
        raise NoBracket(f"F has the same sign on [{lo}, {hi}]")
    else:
        for _ in range(max_bisections):
            mid = 0.5 * (lo + hi)
            f_mid = F(mid)
            if abs(f_mid) <= root_tol and hi - lo < 1e-12 * mid:
                break
            if (f_mid > 0) == (f_lo > 0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
            if hi - lo <= 4 * math.ulp(mid):
                break
        else:
            raise NoConvergence("bisection did not converge")
        beta = mid
        if abs(f_mid) > root_tol:
            raise NoConvergence(f"bracket collapsed with |F| = {abs(f_mid):.3g} > {root_tol}")
    log.debug("beta_f = %r", beta)
    data = rpf(kms_potential(f, beta), tol, max_iter)
    return KmsSolution(f, beta, data.potential, data.eigenmeasure, data)
