"""Linear estimation of the singularity-affected scaling block.

Direct coefficient estimates have unbounded variance for scaling indices
near a zero of the multiplier/design density.  Those coefficients are
instead recovered from the projected normal equations: with
w_mk = Q phi_mk,

    A z = c_hat - B h_hat,
    A_lk  = <w_ml, w_mk>,        l, k in K_0m,
    B_lv  = <w_ml, w_mv>,        v in K_0m^c,
    c_hat_l = <w_ml, y>,
    h_hat_v = a_hat_mv   (raw scaling estimates on the free indices),

all inner products being grid sums (1/n) sum_i.  The solution feeds the
linear estimator f0_m = sum_{k in K_0m} z_k phi_mk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import ConvolutionKernel, apply_forward
from .spectral import PeriodicSignal
from .vaguelette import IndexPartition, Modifier
from .wavelets import CoefficientTree, PeriodizedBasis, reconstruct

__all__ = [
    "SingularSystemError",
    "forward_scaling_images",
    "SingularBlockSystem",
    "assemble_system",
    "solve_singular_block",
    "singular_estimate",
]

_EIG_FLOOR = 1e-12


class SingularSystemError(ValueError):
    """Raised when the block Gram matrix is numerically singular."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


def forward_scaling_images(m: int, kernel: ConvolutionKernel, modifier: Modifier,
                           basis: PeriodizedBasis) -> np.ndarray:
    """Images w_mk = Q phi_mk for all k at level m, as rows of an (2^m, n) array."""
    basis.check_level(m, "scaling")
    from .wavelets import synthesize_basis_function

    images = np.empty((2**m, basis.n))
    for k in range(2**m):
        phi = synthesize_basis_function(basis, m, k, "scaling")
        images[k] = apply_forward(kernel, modifier, phi).values
    return images


@dataclass
class SingularBlockSystem:
    """Assembled normal equations for the affected scaling block at level m."""

    m: int
    affected: np.ndarray      # indices K_0m
    free: np.ndarray          # indices K_0m^c
    A: np.ndarray
    B: np.ndarray
    c_hat: np.ndarray
    h_hat: np.ndarray
    min_eigenvalue: float = np.nan
    condition: float = np.nan

    def right_hand_side(self) -> np.ndarray:
        rhs = self.c_hat.copy()
        if self.free.size:
            rhs -= self.B @ self.h_hat
        return rhs


def assemble_system(m: int, y: PeriodicSignal, partition: IndexPartition,
                    images: np.ndarray,
                    free_tree: CoefficientTree) -> SingularBlockSystem:
    """Build (A, B, c_hat, h_hat) from the scaling images and raw estimates.

    ``images`` must hold all 2^m rows w_mk; ``free_tree`` supplies the raw
    a_hat_mv on the singularity-free indices.  Raises when K_0m is empty
    (the caller should then skip the linear block entirely).
    """
    affected = partition.K0(m)
    if affected.size == 0:
        raise ValueError(f"no singularity-affected scaling indices at level {m}")
    free = partition.K0c(m)
    if free_tree.m != m:
        raise ValueError(f"free-coefficient tree is at level {free_tree.m}, expected {m}")
    n = y.n
    gram = images @ images.T / n
    A = gram[np.ix_(affected, affected)]
    B = gram[np.ix_(affected, free)]
    c_hat = images[affected] @ y.values / n
    h_hat = free_tree.a[free]
    sys = SingularBlockSystem(m, affected, free, A, B, c_hat, h_hat)
    eigs = np.linalg.eigvalsh(0.5 * (A + A.T))
    sys.min_eigenvalue = float(eigs[0])
    sys.condition = float(eigs[-1] / eigs[0]) if eigs[0] > 0 else np.inf
    return sys


def solve_singular_block(system: SingularBlockSystem) -> np.ndarray:
    """Solve A z = c_hat - B h_hat for the affected scaling coefficients."""
    A = system.A
    trace = float(np.trace(A))
    if not np.isfinite(system.min_eigenvalue) or system.min_eigenvalue <= _EIG_FLOOR * trace:
        raise SingularSystemError(
            f"affected block at level {system.m} is numerically singular",
            system.condition,
        )
    rhs = system.right_hand_side()
    z = np.linalg.solve(A, rhs)
    residual = np.linalg.norm(A @ z - rhs)
    if residual > 1e-8 * max(np.linalg.norm(rhs), 1e-300):
        raise SingularSystemError(
            f"block solve at level {system.m} did not converge (residual {residual:.2e})",
            system.condition,
        )
    return z


def singular_estimate(m: int, z: np.ndarray, affected: np.ndarray,
                      basis: PeriodizedBasis) -> PeriodicSignal:
    """Linear estimator f0_m = sum_{k in K_0m} z_k phi_mk on the grid."""
    if z.size != affected.size:
        raise ValueError(f"solution has {z.size} entries for {affected.size} indices")
    a = np.zeros(2**m)
    a[affected] = z
    return reconstruct(basis, CoefficientTree(m, basis.J, a, {}))
