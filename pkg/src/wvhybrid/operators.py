"""Forward operator families: multiplier-times-convolution and warped-design.

Two operator shapes are supported:

* multiplier mode:  (Qf)(x) = mu(x) * (q * f)(x), with mu possibly vanishing
  at isolated points (the singularities);
* design mode:      (Qf)(x) = (q * f)(Ginv(x)), convolution read off at the
  quantiles of a sampling density g that may itself vanish.

Kernels are represented by their spectra on the working grid.  Singularities
carry a location and an order: the order is the exponent with which the
squared multiplier (or the density) vanishes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .spectral import PeriodicSignal, Spectrum, circular_convolve, grid_points

__all__ = [
    "Singularity",
    "ConvolutionKernel",
    "kernel_q1",
    "kernel_q2",
    "estimate_decay_order",
    "DecayFit",
    "MultiplierProfile",
    "make_mu_profile",
    "profile_from_csv",
    "DesignDensity",
    "make_power_zero_density",
    "density_from_samples",
    "density_from_csv",
    "design_quantiles",
    "warp_to_regular",
    "apply_forward",
    "detect_envelope_zeros",
]


@dataclass(frozen=True)
class Singularity:
    """Location x0 in (0,1) and vanishing order alpha of the local zero."""

    location: float
    order: float

    def __post_init__(self):
        if not 0.0 < self.location < 1.0:
            raise ValueError(f"singularity location must be in (0,1), got {self.location}")
        if self.order < 0:
            raise ValueError("singularity order must be >= 0")


@dataclass(frozen=True)
class ConvolutionKernel:
    """Spectral convolution kernel with nominal Fourier decay order r."""

    spectrum: Spectrum
    decay_order: float

    def __post_init__(self):
        if np.any(np.abs(self.spectrum.coefficients) == 0.0):
            raise ValueError("kernel spectrum must be nonvanishing at every frequency")
        if self.decay_order < 0:
            raise ValueError("decay order must be nonnegative")

    @property
    def n(self) -> int:
        return self.spectrum.n

    @property
    def ill_posedness(self) -> float:
        """Degree of ill-posedness beta = 2r for convolution kernels."""
        return 2.0 * self.decay_order


def kernel_q1(lam: float, n: int) -> ConvolutionKernel:
    """Periodized two-sided exponential kernel sum_k exp(-lam |x+k|).

    Its Fourier coefficients have the closed form 2*lam / (lam^2 + 4 pi^2 w^2)
    (Poisson summation), hence decay order r = 2.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    w = np.fft.fftfreq(n, 1.0 / n)
    q = 2.0 * lam / (lam**2 + 4.0 * np.pi**2 * w**2)
    return ConvolutionKernel(Spectrum(q.astype(complex)), 2.0)


def kernel_q2(lam: float, N: int, n: int) -> ConvolutionKernel:
    """Periodized one-sided gamma-type kernel sum_{k>=0} exp(-lam(x+k))(x+k)^N.

    The tail sum is evaluated to machine precision on the grid and the
    spectrum is taken from the samples, so the kernel is exactly conjugate
    symmetric on the working grid.  Decay order r = N + 1.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if N < 1 or int(N) != N:
        raise ValueError(f"N must be a positive integer, got {N}")
    x = grid_points(n)
    samples = np.zeros(n)
    k = 0
    while True:
        term = np.exp(-lam * (x + k)) * (x + k) ** N
        samples += term
        k += 1
        if term.max() < 1e-18 * max(samples.max(), 1e-300) and k > N / lam + 2:
            break
    q = np.fft.fft(samples) / n
    return ConvolutionKernel(Spectrum(q), float(N + 1))


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of |q_w| ~ C (|w|+1)^-r over a dyadic band."""

    r_hat: float
    c_lower: float
    c_upper: float
    band: tuple[int, int]


def estimate_decay_order(kernel: ConvolutionKernel,
                         band: tuple[int, int] = (16, 256)) -> DecayFit:
    """Fit the Fourier decay exponent of a kernel over frequencies in ``band``.

    Returns the slope estimate r_hat and the bracketing constants
    C1 <= |q_w| (|w|+1)^r_hat <= C2 observed on the band.
    """
    lo, hi = band
    hi = min(hi, kernel.n // 2)
    if not 1 <= lo < hi:
        raise ValueError(f"invalid frequency band {band} for n={kernel.n}")
    w = np.arange(lo, hi + 1)
    mag = np.abs(kernel.spectrum.coefficients[w])
    if np.any(mag == 0):
        raise ValueError("zero Fourier coefficient inside the fitting band")
    slope, _ = np.polyfit(np.log(w), np.log(mag), 1)
    r_hat = float(-slope)
    scaled = mag * (w + 1.0) ** r_hat
    return DecayFit(r_hat, float(scaled.min()), float(scaled.max()), (lo, int(hi)))


@dataclass(frozen=True)
class MultiplierProfile:
    """Grid samples of the multiplier mu with its singularity metadata."""

    kind: str
    values: np.ndarray
    singularities: tuple[Singularity, ...] = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("multiplier samples must be finite")
        object.__setattr__(self, "values", v)
        sings = tuple(sorted(self.singularities, key=lambda s: s.location))
        for a, b in zip(sings, sings[1:]):
            if b.location - a.location < 2.0 / v.size:
                raise ValueError("singularities must be pairwise separated")
        object.__setattr__(self, "singularities", sings)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def zero_mask(self) -> np.ndarray:
        """Boolean mask of grid points where mu vanishes exactly."""
        return self.values == 0.0

    def max_order(self) -> float:
        return max((s.order for s in self.singularities), default=0.0)


def _power_zero_mu(x: np.ndarray, x0: float, h: float, alpha: float) -> np.ndarray:
    dist = np.abs(x - x0)
    inside = dist <= h
    out = np.ones_like(x)
    out[inside] = (dist[inside] / h) ** (alpha / 2.0)
    return out


def make_mu_profile(kind: str, n: int, *, x0: float = 1 / 3, h: float = 1 / 6,
                    alpha: float = 2.0, omega: float | None = None,
                    theta: float = 0.0, phase_sign: float = 1.0) -> MultiplierProfile:
    """Construct a multiplier profile on the grid i/n.

    Kinds:
      * ``constant``   - mu identically one, no singularities;
      * ``power-zero`` - mu(x) = |(x-x0)/h|^(alpha/2) inside the window
        |x-x0| <= h and 1 outside: a single zero of order alpha at x0;
      * ``am-cosine``  - mu(x) = cos(2 pi omega x + theta) (``phase_sign=-1``
        flips the phase sign); envelope zeros are detected numerically from
        the grid samples and recorded with order 2.
    """
    x = grid_points(n)
    if kind == "constant":
        return MultiplierProfile("constant", np.ones(n))
    if kind == "power-zero":
        if not (0.0 < h and h <= min(x0, 1.0 - x0)):
            raise ValueError(f"window [x0-h, x0+h] must stay inside [0,1]; x0={x0}, h={h}")
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        values = _power_zero_mu(x, x0, h, alpha)
        sing = (Singularity(x0, alpha),) if alpha > 0 else ()
        return MultiplierProfile("power-zero", values,
                                 sing, {"x0": x0, "h": h, "alpha": alpha})
    if kind == "am-cosine":
        if omega is None:
            omega = n / 2 + 0.5
        values = np.cos(2.0 * np.pi * omega * x + phase_sign * theta)
        zeros = detect_envelope_zeros(values)
        sing = tuple(Singularity(z, 2.0) for z in zeros)
        return MultiplierProfile("am-cosine", values, sing,
                                 {"omega": omega, "theta": theta, "phase_sign": phase_sign})
    raise ValueError(f"unknown profile kind {kind!r}")


def detect_envelope_zeros(mu: np.ndarray, window: int = 5,
                          depth: float = 0.1) -> list[float]:
    """Locate zeros of the envelope |mu| from grid samples.

    Smooths |mu| with a short moving average, takes local minima that dip
    below ``depth`` times the envelope median, and refines each by a
    parabolic fit of the three neighboring smoothed values.
    """
    n = mu.size
    env = np.abs(mu)
    kernel = np.ones(window) / window
    sm = np.convolve(np.concatenate([env[-window:], env, env[:window]]),
                     kernel, mode="same")[window:-window]
    cutoff = depth * np.median(sm)
    zeros = []
    for i in range(n):
        left, right = sm[(i - 1) % n], sm[(i + 1) % n]
        if sm[i] <= cutoff and sm[i] <= left and sm[i] < right:
            denom = left - 2 * sm[i] + right
            frac = 0.5 * (left - right) / denom if denom > 0 else 0.0
            zeros.append(((i + frac) / n) % 1.0)
    return sorted(zeros)


def profile_from_csv(path, singularities: tuple[Singularity, ...] = (),
                     n: int | None = None) -> MultiplierProfile:
    """Load a custom multiplier from a two-column CSV (x, value).

    Values are linearly interpolated onto the grid i/n (n defaults to the
    next power of two at or above the row count).
    """
    x, v = _read_two_columns(path)
    if n is None:
        n = 1 << max(3, int(np.ceil(np.log2(x.size))))
    grid = grid_points(n)
    values = np.interp(grid, x, v, period=1.0)
    return MultiplierProfile("custom-grid", values, tuple(singularities))


@dataclass(frozen=True)
class DesignDensity:
    """Sampling density g on the grid with its c.d.f. and singularities."""

    pdf: np.ndarray
    singularities: tuple[Singularity, ...] = ()

    def __post_init__(self):
        g = np.asarray(self.pdf, dtype=float)
        if np.any(g < 0):
            raise ValueError("density must be nonnegative")
        total = g.mean()
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"density must integrate to 1 (got {total:.8f})")
        object.__setattr__(self, "pdf", g)

    @property
    def n(self) -> int:
        return self.pdf.size

    @property
    def cdf(self) -> np.ndarray:
        """G at the n+1 grid nodes 0, 1/n, ..., 1; G(0)=0 and G(1)=1."""
        c = np.concatenate([[0.0], np.cumsum(self.pdf) / self.n])
        return c / c[-1]

    @property
    def zero_mask(self) -> np.ndarray:
        return self.pdf == 0.0

    def max_order(self) -> float:
        return max((s.order for s in self.singularities), default=0.0)


def density_from_samples(g: np.ndarray,
                         singularities: tuple[Singularity, ...] = ()) -> DesignDensity:
    """Normalize raw grid samples into a DesignDensity."""
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("density samples must be nonnegative")
    mean = g.mean()
    if mean <= 0:
        raise ValueError("density must have positive mass")
    return DesignDensity(g / mean, tuple(singularities))


def make_power_zero_density(x0: float, h: float, alpha: float, n: int) -> DesignDensity:
    """Density proportional to |(x-x0)/h|^alpha inside the window, 1 outside."""
    if not (0.0 < h and h <= min(x0, 1.0 - x0)):
        raise ValueError(f"window [x0-h, x0+h] must stay inside [0,1]; x0={x0}, h={h}")
    x = grid_points(n)
    raw = _power_zero_mu(x, x0, h, alpha) ** 2
    sing = (Singularity(x0, alpha),) if alpha > 0 else ()
    return density_from_samples(raw, sing)


def density_from_csv(path, singularities: tuple[Singularity, ...] = (),
                     n: int | None = None) -> DesignDensity:
    """Load a custom density from a two-column CSV (x, value)."""
    x, v = _read_two_columns(path)
    if n is None:
        n = 1 << max(3, int(np.ceil(np.log2(x.size))))
    grid = grid_points(n)
    return density_from_samples(np.interp(grid, x, v, period=1.0),
                                tuple(singularities))


def _read_two_columns(path):
    xs, vs = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if len(row) < 2:
                continue
            try:
                x, v = float(row[0]), float(row[1])
            except ValueError:
                continue  # header line
            xs.append(x)
            vs.append(v)
    if not xs:
        raise ValueError(f"no numeric (x, value) rows found in {path}")
    order = np.argsort(xs)
    return np.asarray(xs)[order], np.asarray(vs)[order]


_QUANTILE_REFINE = 16


def design_quantiles(density: DesignDensity, n: int | None = None) -> np.ndarray:
    """Observation points x_i = Ginv(i/n) by monotone interpolation of the c.d.f.

    The tabulated c.d.f. is refined by trapezoidal integration of the
    linearly interpolated density before inversion, keeping the quantiles
    accurate even where g is small.
    """
    n = density.n if n is None else int(n)
    m = _QUANTILE_REFINE * density.n
    fine_x = np.arange(m + 1) / m
    fine_g = np.interp(fine_x, np.concatenate([grid_points(density.n), [1.0]]),
                       np.concatenate([density.pdf, [density.pdf[0]]]))
    fine_cdf = np.concatenate([[0.0], np.cumsum((fine_g[1:] + fine_g[:-1]) / (2 * m))])
    fine_cdf /= fine_cdf[-1]
    if np.any(np.diff(fine_cdf) < 0):
        raise ValueError("c.d.f. is not monotone")
    return np.interp(np.arange(n) / n, fine_cdf, fine_x)


def warp_to_regular(y: np.ndarray, density: DesignDensity) -> np.ndarray:
    """Resample index-space data onto the design scale: Y_i = y(G(i/n)).

    Inverse of the quantile warp: composing observations taken at
    x_i = Ginv(i/n) with G recovers the convolution on the regular grid.
    """
    n = y.size
    cdf_nodes = np.arange(density.n + 1) / density.n
    G = np.interp(np.arange(n) / n, cdf_nodes, density.cdf)
    table_x = np.arange(n + 1) / n
    table_y = np.concatenate([y, [y[0]]])
    return np.interp(G, table_x, table_y)


def apply_forward(kernel: ConvolutionKernel,
                  modifier: MultiplierProfile | DesignDensity,
                  f: PeriodicSignal) -> PeriodicSignal:
    """Apply the forward operator Q to a grid signal.

    Multiplier mode returns mu(x) * (q*f)(x); design mode returns
    (q*f)(Ginv(x)) with linear interpolation at the warped points.
    """
    if kernel.n != f.n:
        raise ValueError(f"size mismatch: kernel n={kernel.n}, signal n={f.n}")
    conv = circular_convolve(f, kernel.spectrum)
    if isinstance(modifier, MultiplierProfile):
        if modifier.n != f.n:
            raise ValueError(f"size mismatch: profile n={modifier.n}, signal n={f.n}")
        return PeriodicSignal(modifier.values * conv.values)
    points = design_quantiles(modifier, f.n)
    table_x = np.arange(f.n + 1) / f.n
    table_y = np.concatenate([conv.values, [conv.values[0]]])
    return PeriodicSignal(np.interp(points, table_x, table_y))
