"""Vaguelettes, coefficient estimation, variance weights and index partitions.

The vaguelette with index (j, k) is the function whose inner product with
the (rescaled) data recovers the wavelet coefficient b_jk of f: in Fourier
coordinates

    U_jk(w) = psi_jk(w) / conj(q_w),      T_mk(w) = phi_mk(w) / conj(q_w).

Estimating all coefficients at once amounts to a plain wavelet analysis of
the spectrally deconvolved data, which is numerically identical to the
per-coefficient Fourier sums.

Each coefficient estimate carries a variance scale w_jk (so that
Var(b_hat_jk) ~ eps * w_jk with eps = sigma^2/n).  Near a zero of the
multiplier (or of the design density) the scale blows up; indices whose
essential support touches the zero form the singularity-affected sets
K_0m / K_1j handled by the linear block elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import ConvolutionKernel, DesignDensity, MultiplierProfile, warp_to_regular
from .spectral import PeriodicSignal
from .wavelets import CoefficientTree, PeriodizedBasis, analyze, basis_fourier_table

__all__ = [
    "VagueletteTable",
    "build_vaguelettes",
    "estimate_coefficients",
    "VarianceWeights",
    "variance_weights",
    "IndexPartition",
    "partition_indices",
    "inverse_squared_modifier",
]

Modifier = MultiplierProfile | DesignDensity

_ENERGY_QUANTILE = 0.999


@dataclass
class VagueletteTable:
    """Per-level vaguelette data derived from one kernel and one basis.

    By exact dyadic translation the spectra for all k at a level differ from
    the k = 0 column only by phase, so per level the table stores the k = 0
    vaguelette (spectrum and grid samples), the common norm, and the
    effective support half-width in units of 2^-j.
    """

    kernel: ConvolutionKernel
    basis: PeriodizedBasis
    wavelet_grid: dict[int, np.ndarray]
    scaling_grid: dict[int, np.ndarray]
    wavelet_norm: dict[int, float]
    scaling_norm: dict[int, float]
    wavelet_halfwidth: dict[int, float]
    scaling_halfwidth: dict[int, float]

    @property
    def d_U(self) -> float:
        """Largest wavelet-vaguelette support half-width across clean levels."""
        return self._aggregate(self.wavelet_halfwidth)

    @property
    def d_T(self) -> float:
        """Largest scaling-vaguelette support half-width across clean levels."""
        return self._aggregate(self.scaling_halfwidth)

    def _aggregate(self, per_level: dict[int, float]) -> float:
        clean = [d for j, d in per_level.items() if 2 * d < 2**j]
        return max(clean) if clean else max(per_level.values())

    def spectrum(self, j: int, k: int, kind: str = "wavelet") -> np.ndarray:
        """Fourier coefficients of U_jk (or T_jk), generated by phase shift."""
        grid = self.wavelet_grid if kind == "wavelet" else self.scaling_grid
        n = self.basis.n
        base = np.fft.fft(grid[j]) / n
        w = np.fft.fftfreq(n, 1.0 / n)
        return base * np.exp(-2j * np.pi * w * k / 2**j)

    def grid_function(self, j: int, k: int, kind: str = "wavelet") -> np.ndarray:
        """Grid samples of U_jk (or T_jk) via circular shift of the k=0 column."""
        grid = self.wavelet_grid if kind == "wavelet" else self.scaling_grid
        return np.roll(grid[j], k * (self.basis.n // 2**j))


def _symmetric_energy_halfwidth(values: np.ndarray, level: int, n: int) -> float:
    """Smallest half-width (units of 2^-level) holding 99.9% of the energy.

    The window is centered on the nominal index position; widths are
    measured in whole grid cells and converted.
    """
    cells = n // 2**level
    center = cells // 2  # k = 0 sits near x = 2^-level * 0.5
    energy = values**2
    total = energy.sum()
    offsets = ((np.arange(n) - center + n // 2) % n) - n // 2
    order = np.argsort(np.abs(offsets), kind="stable")
    cum = np.cumsum(energy[order])
    stop = int(np.searchsorted(cum, _ENERGY_QUANTILE * total))
    return (abs(offsets[order][stop]) + 1) / cells


def build_vaguelettes(kernel: ConvolutionKernel, basis: PeriodizedBasis) -> VagueletteTable:
    """Construct the vaguelette table for all levels m1 .. J-1."""
    if kernel.n != basis.n:
        raise ValueError(f"size mismatch: kernel n={kernel.n}, basis n={basis.n}")
    qbar = np.conj(kernel.spectrum.coefficients)
    wavelet_grid, scaling_grid = {}, {}
    wavelet_norm, scaling_norm = {}, {}
    wavelet_hw, scaling_hw = {}, {}
    n = basis.n
    for j in range(basis.m1, basis.J):
        for kind, grid, norms, hws in (
            ("wavelet", wavelet_grid, wavelet_norm, wavelet_hw),
            ("scaling", scaling_grid, scaling_norm, scaling_hw),
        ):
            base = basis_fourier_table(basis, j, kind)[0]
            u_spec = base / qbar
            u = np.fft.ifft(u_spec).real * n
            grid[j] = u
            norms[j] = float(np.sqrt(np.dot(u, u) / n))
            hws[j] = _symmetric_energy_halfwidth(u, j, n)
    return VagueletteTable(kernel, basis, wavelet_grid, scaling_grid,
                           wavelet_norm, scaling_norm, wavelet_hw, scaling_hw)


def rescale_observations(y: PeriodicSignal, modifier: Modifier) -> PeriodicSignal:
    """Undo the multiplier (Y = y/mu, zeros masked) or the design warp."""
    if isinstance(modifier, MultiplierProfile):
        mu = modifier.values
        if np.all(mu == 0.0):
            raise ValueError("multiplier vanishes identically")
        Y = np.where(modifier.zero_mask, 0.0, y.values / np.where(mu == 0, 1.0, mu))
        return PeriodicSignal(Y)
    return PeriodicSignal(warp_to_regular(y.values, modifier))


def estimate_coefficients(y: PeriodicSignal, modifier: Modifier,
                          kernel: ConvolutionKernel, basis: PeriodizedBasis,
                          m: int | None = None) -> CoefficientTree:
    """Unbiased scaling/wavelet coefficient estimates from observed data.

    Equivalent to b_hat_jk = sum_w psi_jk(w) conj(Y_w) / conj(q_w) for every
    (j, k) at once: rescale the data, divide its spectrum by the kernel, and
    run the wavelet analysis.  On noiseless data this reproduces analyze(f)
    up to discretization of the forward model.
    """
    if y.n != kernel.n:
        raise ValueError(f"size mismatch: data n={y.n}, kernel n={kernel.n}")
    Y = rescale_observations(y, modifier)
    z = np.fft.ifft(np.fft.fft(Y.values) / kernel.spectrum.coefficients).real
    return analyze(basis, PeriodicSignal(z), m)


def inverse_squared_modifier(modifier: Modifier) -> np.ndarray:
    """Grid samples of the local noise amplification: 1/mu^2 or 1/g.

    Exact zeros map to +inf; callers combine this with vaguelette energy to
    obtain per-coefficient variance scales.
    """
    if isinstance(modifier, MultiplierProfile):
        base = modifier.values.astype(float) ** 2
    else:
        base = modifier.pdf.astype(float)
    out = np.full(base.shape, np.inf)
    nz = base > 0
    out[nz] = 1.0 / base[nz]
    return out


@dataclass
class VarianceWeights:
    """Variance scales w_jk with Var(b_hat_jk) ~ eps * w_jk.

    ``wavelet[j]`` and ``scaling[j]`` hold the per-index scales at level j;
    entries are +inf (and flagged) where the rescaled data has unbounded
    local variance inside the vaguelette support.  ``aggregate_all[j]`` is
    the unrestricted per-level sum of scaling scales.
    """

    mode: str
    wavelet: dict[int, np.ndarray]
    scaling: dict[int, np.ndarray]
    divergent: dict[int, np.ndarray] = field(default_factory=dict)

    def aggregate_all(self, j: int) -> float:
        w = self.scaling[j]
        return float(w[np.isfinite(w)].sum())


def _correlate_weights(u: np.ndarray, amp: np.ndarray, level: int, n: int) -> np.ndarray:
    """w_k = (1/n) sum_i u^2((i - k n 2^-j) mod n) amp(i), for all k at once."""
    step = n // 2**level
    energy = u**2
    finite_amp = np.where(np.isfinite(amp), amp, 0.0)
    corr = np.fft.ifft(np.fft.fft(finite_amp) * np.conj(np.fft.fft(energy))).real / n
    w = corr[::step][: 2**level].copy()
    if np.any(~np.isfinite(amp)):
        # a scale is divergent if the vaguelette carries energy on a hard zero
        bad = np.fft.ifft(np.fft.fft((~np.isfinite(amp)).astype(float))
                          * np.conj(np.fft.fft((energy > 1e-12 * energy.max()).astype(float)))).real
        w[bad[::step][: 2**level] > 0.5] = np.inf
    return w


def variance_weights(mode: str, kernel: ConvolutionKernel, modifier: Modifier,
                     basis: PeriodizedBasis,
                     table: VagueletteTable | None = None) -> VarianceWeights:
    """Per-coefficient variance scales, by closed form or numeric quadrature.

    * ``numeric``: w_jk = (1/n) sum_i U_jk(x_i)^2 / mu^2(x_i) (design mode
      uses 1/g), i.e. the squared norm of the actual vaguelette of the
      rescaled problem; this is the exact sampling variance of b_hat_jk up
      to the factor eps.  Divergent entries are +inf and flagged.
    * ``closed-form``: w_jk = 2^{j(2r+alpha)} / (|k - k_0j|^alpha + 1) with
      r the kernel decay order and (x_0, alpha) the nearest singularity;
      without singularities w_jk = 2^{2jr}.
    """
    if mode not in ("numeric", "closed-form"):
        raise ValueError(f"unknown weight mode {mode!r}")
    wavelet, scaling, divergent = {}, {}, {}
    n = basis.n
    if mode == "numeric":
        if table is None:
            table = build_vaguelettes(kernel, basis)
        amp = inverse_squared_modifier(modifier)
        for j in range(basis.m1, basis.J):
            wavelet[j] = _correlate_weights(table.wavelet_grid[j], amp, j, n)
            scaling[j] = _correlate_weights(table.scaling_grid[j], amp, j, n)
            divergent[j] = ~np.isfinite(wavelet[j])
    else:
        r = kernel.decay_order
        sings = modifier.singularities
        for j in range(basis.m1, basis.J):
            k = np.arange(2**j, dtype=float)
            if sings:
                w = np.full(2**j, -np.inf)
                for s in sings:
                    k0 = 2.0**j * s.location
                    dist = np.minimum(np.abs(k - k0), 2.0**j - np.abs(k - k0))
                    w = np.maximum(w, 2.0 ** (j * (2 * r + s.order))
                                   / (dist**s.order + 1.0))
            else:
                w = np.full(2**j, 2.0 ** (2 * j * r))
            wavelet[j] = w
            scaling[j] = w.copy()
            divergent[j] = np.zeros(2**j, dtype=bool)
    return VarianceWeights(mode, wavelet, scaling, divergent)


@dataclass
class IndexPartition:
    """Singularity-affected and singularity-free index sets per level.

    ``affected_wavelet[j]`` is the boolean mask of K_1j (window half-width D
    about each k_0j = 2^j x_0); ``affected_scaling[j]`` the mask of K_0j
    (half-width D0).  Complements are the singularity-free sets.
    """

    D: float
    D0: float
    singularities: tuple
    affected_wavelet: dict[int, np.ndarray]
    affected_scaling: dict[int, np.ndarray]

    def K1(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.affected_wavelet[j])

    def K1c(self, j: int) -> np.ndarray:
        return np.flatnonzero(~self.affected_wavelet[j])

    def K0(self, m: int) -> np.ndarray:
        return np.flatnonzero(self.affected_scaling[m])

    def K0c(self, m: int) -> np.ndarray:
        return np.flatnonzero(~self.affected_scaling[m])

    @property
    def trivial(self) -> bool:
        """True when no index at any level is singularity-affected."""
        return not any(mask.any() for mask in self.affected_wavelet.values()) \
            and not any(mask.any() for mask in self.affected_scaling.values())


def _window_mask(level: int, singularities, halfwidth: float) -> np.ndarray:
    mask = np.zeros(2**level, dtype=bool)
    if halfwidth <= 0:
        return mask
    k = np.arange(2**level, dtype=float)
    for s in singularities:
        k0 = 2.0**level * s.location
        dist = np.minimum(np.abs(k - k0), 2.0**level - np.abs(k - k0))
        mask |= dist < halfwidth
    return mask


def partition_indices(basis: PeriodizedBasis, singularities,
                      D: float, D0: float) -> IndexPartition:
    """Build K_0m / K_1j masks for all levels m1 .. J-1.

    An index is affected when |k - 2^j x_0| < D (wavelet levels; D0 for the
    scaling sets), with circular distance on the dyadic index ring.
    Zeros of order below one never require a window, so singularities with
    order < 1 are skipped.
    """
    if D < 0 or D0 < 0:
        raise ValueError("window half-widths must be nonnegative")
    active = tuple(s for s in singularities if s.order >= 1.0)
    wav = {j: _window_mask(j, active, D) for j in range(basis.m1, basis.J)}
    sca = {j: _window_mask(j, active, D0) for j in range(basis.m1, basis.J)}
    return IndexPartition(D, D0, tuple(singularities), wav, sca)
