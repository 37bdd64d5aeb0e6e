"""Periodic grid signals and their discrete Fourier representation.

Everything downstream works on real signals sampled at x_i = i/n on [0, 1)
with n a power of two.  The Fourier analysis convention is

    c_w = (1/n) * sum_i  values_i * exp(-2*pi*1j*w*i/n),

i.e. the grid discretization of the L2([0,1]) inner product with the
periodic Fourier basis exp(2*pi*1j*w*x).  Under this convention Plancherel
reads  sum_w |c_w|^2 = (1/n) * sum_i values_i^2,  and the inner product
of two grid signals is (1/n) * sum_i a_i * b_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PeriodicSignal",
    "Spectrum",
    "grid_points",
    "inner",
    "norm",
    "forward_transform",
    "inverse_transform",
    "circular_convolve",
]

_SYMMETRY_RTOL = 1e-8


def _check_power_of_two(n: int) -> None:
    if n < 8 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a power of two >= 8, got {n}")


@dataclass(frozen=True)
class PeriodicSignal:
    """Real function sampled on the uniform grid i/n of [0, 1)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        _check_power_of_two(values.size)
        if not np.all(np.isfinite(values)):
            raise ValueError("signal samples must be finite")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Spectrum:
    """Complex Fourier coefficients c_w, stored in FFT order.

    Index i of ``coefficients`` holds frequency i for i <= n/2 and i - n
    for i > n/2, so the represented frequencies are {-n/2+1, ..., n/2}.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        coeff = np.asarray(self.coefficients, dtype=complex)
        _check_power_of_two(coeff.size)
        object.__setattr__(self, "coefficients", coeff)

    @property
    def n(self) -> int:
        return self.coefficients.size

    @property
    def frequencies(self) -> np.ndarray:
        """Integer frequencies in storage order; Nyquist reported as +n/2."""
        n = self.n
        w = np.arange(n)
        w[w > n // 2] -= n
        return w

    def symmetry_defect(self) -> float:
        """Max deviation from conjugate symmetry c_{-w} = conj(c_w)."""
        c = self.coefficients
        mirrored = np.conj(c[(-np.arange(self.n)) % self.n])
        return float(np.abs(c - mirrored).max())


def grid_points(n: int) -> np.ndarray:
    """The sampling grid x_i = i/n."""
    _check_power_of_two(n)
    return np.arange(n) / n


def inner(f: PeriodicSignal, g: PeriodicSignal) -> float:
    """Discrete L2 inner product (1/n) * sum_i f_i g_i."""
    if f.n != g.n:
        raise ValueError(f"size mismatch: {f.n} vs {g.n}")
    return float(np.dot(f.values, g.values) / f.n)


def norm(f: PeriodicSignal) -> float:
    """Discrete L2 norm sqrt((1/n) * sum_i f_i^2)."""
    return float(np.sqrt(np.dot(f.values, f.values) / f.n))


def forward_transform(s: PeriodicSignal) -> Spectrum:
    """Fourier analysis: c_w = (1/n) sum_i values_i exp(-2*pi*1j*w*i/n)."""
    return Spectrum(np.fft.fft(s.values) / s.n)


def inverse_transform(c: Spectrum) -> PeriodicSignal:
    """Fourier synthesis; rejects spectra that do not describe a real signal."""
    scale = max(1.0, float(np.abs(c.coefficients).max()))
    if c.symmetry_defect() > _SYMMETRY_RTOL * scale:
        raise ValueError("spectrum is not conjugate-symmetric; signal would not be real")
    return PeriodicSignal(np.fft.ifft(c.coefficients).real * c.n)


def circular_convolve(f: PeriodicSignal, kernel: Spectrum) -> PeriodicSignal:
    """Periodic convolution (q * f)(x) = int q(x - t) f(t) dt on the grid.

    The output spectrum is the pointwise product of the input spectra, so a
    kernel spectrum identically one acts as the identity.
    """
    if f.n != kernel.n:
        raise ValueError(f"size mismatch: signal n={f.n}, kernel n={kernel.n}")
    out = np.fft.ifft(kernel.coefficients * np.fft.fft(f.values))
    return PeriodicSignal(out.real)
