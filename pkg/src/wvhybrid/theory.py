"""Closed-form rate theory: minimax rates, log exponents, threshold constants.

These quantities describe the best achievable L2 risk over Besov balls for
the spatially inhomogeneous deconvolution model, as functions of the
smoothness/integrability of the target (s, p, q), the ball radius A, the
degrees of ill-posedness beta and spatial inhomogeneity alpha, and the
noise level eps.  They are reporting/reference values only; estimator
defaults never depend on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf, isinf, sqrt

__all__ = [
    "BesovParams",
    "ProblemParams",
    "minimax_rate",
    "log_exponent",
    "theoretical_threshold",
]

_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class BesovParams:
    """Besov ball indices: smoothness s, integrabilities p, q, radius A.

    Use ``math.inf`` for p or q of infinity.
    """

    s: float
    p: float = 2.0
    q: float = 2.0
    A: float = 1.0

    def __post_init__(self):
        if not (self.p >= 1 and self.q >= 1):
            raise ValueError("need p, q >= 1")
        if self.s <= max(1.0 / self.p if not isinf(self.p) else 0.0, 0.5):
            raise ValueError(f"need s > max(1/p, 1/2), got s={self.s}, p={self.p}")
        if self.A <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def s_prime(self) -> float:
        return self.s + 0.5 - (0.0 if isinf(self.p) else 1.0 / self.p)

    @property
    def s_star(self) -> float:
        return min(self.s, self.s_prime)

    @property
    def one_minus_2_over_p(self) -> float:
        return 1.0 if isinf(self.p) else 1.0 - 2.0 / self.p


@dataclass(frozen=True)
class ProblemParams:
    """Operator inhomogeneity alpha, ill-posedness beta, noise level eps."""

    alpha: float
    beta: float
    eps: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must be in (0,1)")


def _on_first_branch(bp: BesovParams, pp: ProblemParams) -> bool:
    lhs = 2.0 * bp.s * (pp.alpha - 1.0)
    rhs = (pp.beta + 1.0) * bp.one_minus_2_over_p
    scale = max(abs(lhs), abs(rhs), 1.0)
    return lhs >= rhs - _BOUNDARY_RTOL * scale


def minimax_rate(bp: BesovParams, pp: ProblemParams) -> tuple[float, str]:
    """Minimax L2-risk rate Delta(eps) and its regime tag.

    Inhomogeneity-dominated regime (2s(alpha-1) >= (beta+1)(1-2/p), ties
    included):  Delta = A^(2(alpha+beta)/(2s'+alpha+beta))
    * eps^(2s'/(2s'+alpha+beta)).  Otherwise the classical regime applies
    with exponent 2s/(2s+beta+1).
    """
    if _on_first_branch(bp, pp):
        denom = 2.0 * bp.s_prime + pp.alpha + pp.beta
        delta = bp.A ** (2.0 * (pp.alpha + pp.beta) / denom) \
            * pp.eps ** (2.0 * bp.s_prime / denom)
        return float(delta), "inhomogeneity-dominated"
    denom = 2.0 * bp.s + pp.beta + 1.0
    delta = bp.A ** (2.0 * (pp.beta + 1.0) / denom) * pp.eps ** (2.0 * bp.s / denom)
    return float(delta), "ill-posedness-dominated"


def log_exponent(bp: BesovParams, pp: ProblemParams) -> float:
    """Exponent rho of the logarithmic factor attached to Delta(eps).

    For alpha = 1: rho = 2 s* / (2 s* + beta + 1).  Otherwise rho collects
    an indicator of the regime boundary 2s(alpha-1) = (beta+1)(1-2/p) plus
    the term (1-alpha)(2-p)/(2-alpha p) active when alpha < 1 and p < 2.
    """
    alpha, beta = pp.alpha, pp.beta
    if alpha == 1.0:
        return 2.0 * bp.s_star / (2.0 * bp.s_star + beta + 1.0)
    rho = 0.0
    lhs = 2.0 * bp.s * (alpha - 1.0)
    rhs = (beta + 1.0) * bp.one_minus_2_over_p
    if abs(lhs - rhs) <= _BOUNDARY_RTOL * max(abs(lhs), abs(rhs), 1.0):
        rho += 1.0
    if alpha < 1.0 and not isinf(bp.p) and bp.p < 2.0:
        rho += (1.0 - alpha) * (2.0 - bp.p) / (2.0 - alpha * bp.p)
    return rho


def theoretical_threshold(C_u: float, C_lambda: float,
                          alpha: float, beta: float) -> tuple[float, float]:
    """Conservative theoretical block-threshold constants (tau^2, chi^2).

    chi^2 is the lower admissibility bound 4(beta + max(1, alpha)) /
    (2 + alpha + beta) and tau^2 = 4 C_u C_lambda (sqrt(2) chi + 1)^2 uses
    chi at that bound.  The near-orthogonality constants C_u, C_lambda are
    not identifiable from data and must be supplied; the output is reference
    material, not an estimator default.
    """
    if C_u <= 0 or C_lambda <= 0:
        raise ValueError("C_u and C_lambda must be positive")
    if alpha < 0 or beta <= 0:
        raise ValueError("need alpha >= 0 and beta > 0")
    chi_sq = 4.0 * (beta + max(1.0, alpha)) / (2.0 + alpha + beta)
    tau_sq = 4.0 * C_u * C_lambda * (sqrt(2.0) * sqrt(chi_sq) + 1.0) ** 2
    return tau_sq, chi_sq
