"""Block layout and thresholding of the singularity-free coefficients.

Wavelet coefficients outside the singularity windows are organized into
blocks of ~ln(1/eps) adjacent indices tiled outward from each window (or
from the level edge when no window is present).  A block survives when its
empirical energy exceeds tau^2 times its risk bound

    R_jl = eps * sum_{k in block} w_jk,

with w_jk the per-coefficient variance scales.  A per-coefficient hard
rule (keep when b_hat^2 >= t^2 eps w_jk) is available as well and is the
default at desk-scale grid sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import PeriodicSignal
from .vaguelette import IndexPartition, Modifier, VarianceWeights, estimate_coefficients
from .wavelets import CoefficientTree, PeriodizedBasis, reconstruct

__all__ = [
    "block_size",
    "Block",
    "BlockLayout",
    "build_blocks",
    "risk_bound",
    "ThresholdRule",
    "apply_threshold",
    "singularity_free_estimate",
    "default_highest_level",
]


def block_size(eps: float) -> int:
    """Block length S = max(1, round(ln(1/eps)))."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    return max(1, int(round(np.log(1.0 / eps))))


@dataclass
class Block:
    level: int
    index: int
    members: np.ndarray          # coefficient indices k, ascending
    risk: float = np.nan         # R_jl, filled by build_blocks
    statistic: float = np.nan    # B_hat_jl, filled by apply_threshold


@dataclass
class BlockLayout:
    """Blocks partitioning the singularity-free indices at each level."""

    eps: float
    size: int
    partition: IndexPartition
    grid_size: int = 0
    blocks: dict[int, list[Block]] = field(default_factory=dict)

    def level_union(self, j: int) -> np.ndarray:
        if not self.blocks.get(j):
            return np.array([], dtype=int)
        return np.sort(np.concatenate([b.members for b in self.blocks[j]]))


def _tile_run(run: np.ndarray, S: int, left_anchored: bool, right_anchored: bool):
    """Split a contiguous index run into blocks of length S.

    Runs abutting a singularity window are tiled outward from the window
    edge; a run pinched between two windows is tiled from both edges with
    the leftover short block in the middle.  Leftovers are kept as-is.
    """
    m = run.size
    if m == 0:
        return []
    if left_anchored and right_anchored:
        n_blocks = m // S
        left_count = (n_blocks + 1) // 2
        right_count = n_blocks - left_count
        pieces = [run[i * S:(i + 1) * S] for i in range(left_count)]
        middle = run[left_count * S: m - right_count * S]
        if middle.size:
            pieces.append(middle)
        for i in range(right_count - 1, -1, -1):
            hi = m - i * S
            pieces.append(run[hi - S: hi])
        return pieces
    if right_anchored:
        pieces = [run[max(0, hi - S): hi] for hi in range(m, 0, -S)]
        return pieces
    return [run[lo: lo + S] for lo in range(0, m, S)]


def build_blocks(basis: PeriodizedBasis, partition: IndexPartition,
                 eps: float, weights: VarianceWeights | None = None) -> BlockLayout:
    """Tile the singularity-free indices of every level into blocks.

    When ``weights`` is given each block's risk bound R_jl is filled in.
    """
    S = block_size(eps)
    layout = BlockLayout(eps, S, partition, basis.n)
    for j in range(basis.m1, basis.J):
        affected = partition.affected_wavelet[j]
        free = np.flatnonzero(~affected)
        blocks: list[Block] = []
        if free.size:
            # contiguous runs of free indices (linear in k; windows split them)
            breaks = np.flatnonzero(np.diff(free) > 1)
            runs = np.split(free, breaks + 1)
            L = 2**j
            for run in runs:
                left_anch = run[0] > 0 and affected[run[0] - 1]
                right_anch = run[-1] < L - 1 and affected[run[-1] + 1]
                for members in _tile_run(run, S, left_anch, right_anch):
                    blocks.append(Block(j, len(blocks), np.asarray(members)))
        layout.blocks[j] = blocks
        if weights is not None:
            for b in blocks:
                b.risk = risk_bound(layout, weights, j, b.index)
    return layout


def risk_bound(layout: BlockLayout, weights: VarianceWeights,
               j: int, l: int) -> float:
    """R_jl = eps * sum of the block's variance scales."""
    block = layout.blocks[j][l]
    return float(layout.eps * weights.wavelet[j][block.members].sum())


@dataclass(frozen=True)
class ThresholdRule:
    """Keep/kill rule: block energy test or per-coefficient hard test."""

    kind: str = "hard"
    tau: float = 1.0       # block-mode constant
    t: float | None = None  # hard-mode multiplier; default sqrt(2 ln n)
    eps: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("block", "hard"):
            raise ValueError(f"unknown threshold kind {self.kind!r}")
        if self.tau <= 0 or (self.t is not None and self.t <= 0):
            raise ValueError("threshold constants must be positive")

    def hard_multiplier(self, n: int) -> float:
        return self.t if self.t is not None else float(np.sqrt(2.0 * np.log(n)))


def apply_threshold(tree: CoefficientTree, layout: BlockLayout, rule: ThresholdRule,
                    weights: VarianceWeights | None = None) -> CoefficientTree:
    """Threshold the wavelet levels of a tree and zero all affected entries.

    Kept coefficients are bit-identical to the input; killed ones are exactly
    zero.  Scaling entries indexed by K_0m and wavelet entries indexed by
    K_1j are always zeroed, regardless of the rule.
    """
    if rule.kind == "hard" and weights is None:
        raise ValueError("hard thresholding needs variance weights")
    out = tree.copy()
    partition = layout.partition
    out.a[partition.affected_scaling[tree.m]] = 0.0
    for j, bj in out.b.items():
        keep = np.zeros(bj.size, dtype=bool)
        if rule.kind == "block":
            for b in layout.blocks[j]:
                stat = float(np.dot(tree.b[j][b.members], tree.b[j][b.members]))
                b.statistic = stat
                if stat >= rule.tau**2 * b.risk:
                    keep[b.members] = True
        else:
            t = rule.hard_multiplier(layout.grid_size)
            thr = (t**2) * rule.eps * weights.wavelet[j]
            with np.errstate(invalid="ignore"):
                keep = tree.b[j] ** 2 >= thr
        keep &= ~partition.affected_wavelet[j]
        bj[~keep] = 0.0
    return out


def default_highest_level(eps: float, alpha: float, beta: float, n: int) -> int:
    """Default cutoff level: 2^J = eps^(-2/(alpha+beta+2)), capped by the grid."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    J = int(np.ceil(2.0 / (alpha + beta + 2.0) * np.log2(1.0 / eps)))
    return max(2, min(J, int(np.log2(n)) - 1))


def singularity_free_estimate(m: int, y: PeriodicSignal, modifier: Modifier,
                              kernel, basis: PeriodizedBasis,
                              partition: IndexPartition, weights: VarianceWeights,
                              rule: ThresholdRule,
                              layout: BlockLayout | None = None,
                              tree: CoefficientTree | None = None):
    """Thresholded estimate of the singularity-free part at base level m.

    Returns (signal, thresholded tree, raw tree): the raw tree feeds the
    linear block (it supplies the unthresholded scaling estimates on the
    complement of K_0m).
    """
    basis.check_level(m, "scaling")
    if tree is None:
        tree = estimate_coefficients(y, modifier, kernel, basis, m)
    if layout is None:
        layout = build_blocks(basis, partition, rule.eps, weights)
    thresholded = apply_threshold(tree, layout, rule, weights)
    return reconstruct(basis, thresholded), thresholded, tree
