"""Simulation harness: test signals, data generation, metrics, experiments.

All randomness flows from a single master seed through numpy's SeedSequence
(PCG64 generators), with replication sub-seeds spawned deterministically, so
every experiment is bit-reproducible from its configuration.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .adaptive import EstimatorSettings, HybridEstimate, adaptive_estimate
from .operators import (ConvolutionKernel, DesignDensity, MultiplierProfile,
                        Singularity, design_quantiles, density_from_csv,
                        kernel_q1, kernel_q2, make_mu_profile,
                        make_power_zero_density, profile_from_csv)
from .spectral import PeriodicSignal, circular_convolve, grid_points
from .theory import BesovParams, ProblemParams, minimax_rate
from .thresholding import ThresholdRule, default_highest_level
from .vaguelette import build_vaguelettes
from .wavelets import PeriodizedBasis, analyze, daubechies_filter, reconstruct

__all__ = [
    "make_test_signal",
    "ExperimentConfig",
    "Dataset",
    "generate_heteroscedastic",
    "generate_irregular",
    "snr",
    "detect_am_phase",
    "ReplicationResult",
    "ExperimentResult",
    "run_experiment",
    "RateStudyResult",
    "rate_study",
    "mse",
]

_TWO_PI = 2.0 * np.pi


def make_test_signal(name: str, n: int) -> PeriodicSignal:
    """Standard test signals on the grid i/n.

    ``blip``:   (0.32 + 0.6t + 0.3 exp(-100(t-0.3)^2)) 1(t <= 0.8)
              + (-0.28 + 0.6t + 0.3 exp(-100(t-1.3)^2)) 1(t > 0.8);
    ``flat``:   constant one;
    ``triangle``: tent wave 1 - 2|2t - 1|, Lipschitz with two kinks.
    """
    t = grid_points(n)
    if name == "blip":
        values = np.where(
            t <= 0.8,
            0.32 + 0.6 * t + 0.3 * np.exp(-100.0 * (t - 0.3) ** 2),
            -0.28 + 0.6 * t + 0.3 * np.exp(-100.0 * (t - 1.3) ** 2),
        )
    elif name == "flat":
        values = np.ones(n)
    elif name == "triangle":
        values = 1.0 - 2.0 * np.abs(2.0 * t - 1.0)
    else:
        raise ValueError(f"unknown test signal {name!r}")
    return PeriodicSignal(values)


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass
class KernelSpec:
    kind: str = "q1"
    lam: float = 5.0
    N: int = 2

    def build(self, n: int) -> ConvolutionKernel:
        if self.kind == "q1":
            return kernel_q1(self.lam, n)
        if self.kind == "q2":
            return kernel_q2(self.lam, self.N, n)
        raise ValueError(f"unknown kernel kind {self.kind!r}")


@dataclass
class ProfileSpec:
    kind: str = "power-zero"
    x0: float = 1 / 3
    h: float = 1 / 6
    alpha: float = 2.0
    omega: float | None = None
    theta: float = 0.0
    phase_sign: float = 1.0
    csv_path: str | None = None

    def build(self, n: int) -> MultiplierProfile:
        if self.kind == "custom-grid":
            if not self.csv_path:
                raise ValueError("custom-grid profile needs csv_path")
            return profile_from_csv(self.csv_path, n=n)
        kwargs = {}
        if self.kind == "power-zero":
            kwargs = dict(x0=self.x0, h=self.h, alpha=self.alpha)
        elif self.kind == "am-cosine":
            kwargs = dict(omega=self.omega, theta=self.theta, phase_sign=self.phase_sign)
        return make_mu_profile(self.kind, n, **kwargs)


@dataclass
class DensitySpec:
    kind: str = "uniform"
    x0: float = 1 / 3
    h: float = 1 / 6
    alpha: float = 2.0
    csv_path: str | None = None

    def build(self, n: int) -> DesignDensity:
        if self.kind == "uniform":
            return DesignDensity(np.ones(n))
        if self.kind == "power-zero":
            return make_power_zero_density(self.x0, self.h, self.alpha, n)
        if self.kind == "custom-csv":
            if not self.csv_path:
                raise ValueError("custom-csv density needs csv_path")
            return density_from_csv(self.csv_path, n=n)
        raise ValueError(f"unknown density kind {self.kind!r}")


@dataclass
class ExperimentConfig:
    """Single JSON-serializable document describing one experiment."""

    n: int = 1024
    sigma: float = 0.02
    seed: int = 0
    replications: int = 1
    signal: str = "blip"
    family: str = "multiplier"          # "multiplier" | "design"
    kernel: KernelSpec = field(default_factory=KernelSpec)
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    density: DensitySpec = field(default_factory=DensitySpec)
    mode: str = "hybrid"                # "hybrid" | "wvd" | "both"
    m1: int = 1
    J: int | None = None
    kappa: float = 1.8
    vanishing_moments: int = 8
    threshold_kind: str = "hard"
    tau: float = 1.0
    t: float | None = None
    weight_mode: str = "numeric"
    sigma_sq_in_lambda: bool = False
    lambda_index_set: str = "free"
    window_D: float | None = None
    window_D0: float | None = None
    am_detect_from_data: bool = True

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.mode not in ("hybrid", "wvd", "both"):
            raise ValueError(f"unknown estimator mode {self.mode!r}")
        if self.family not in ("multiplier", "design"):
            raise ValueError(f"unknown operator family {self.family!r}")

    @property
    def eps(self) -> float:
        return self.sigma**2 / self.n

    def build_kernel(self) -> ConvolutionKernel:
        return self.kernel.build(self.n)

    def build_modifier(self):
        if self.family == "multiplier":
            return self.profile.build(self.n)
        return self.density.build(self.n)

    def build_basis(self) -> PeriodizedBasis:
        J = self.J
        if J is None:
            kernel = self.build_kernel()
            alpha = self.build_modifier().max_order()
            J = default_highest_level(max(self.eps, 1e-300), alpha,
                                      kernel.ill_posedness, self.n)
        return PeriodizedBasis(self.n, self.m1, J,
                               daubechies_filter(self.vanishing_moments))

    def settings(self) -> EstimatorSettings:
        rule = ThresholdRule(self.threshold_kind, self.tau, self.t,
                             max(self.eps, 1e-300))
        return EstimatorSettings(
            m1=self.m1, J=self.J, kappa=self.kappa, rule=rule,
            weight_mode=self.weight_mode,
            sigma_sq_in_lambda=self.sigma_sq_in_lambda,
            lambda_index_set=self.lambda_index_set,
            window_D=self.window_D, window_D0=self.window_D0,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        for key, sub in (("kernel", KernelSpec), ("profile", ProfileSpec),
                         ("density", DensitySpec)):
            if key in doc and isinstance(doc[key], dict):
                doc[key] = sub(**doc[key])
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


# --------------------------------------------------------------------------
# data generation
# --------------------------------------------------------------------------


@dataclass
class Dataset:
    """One draw of observations with the noiseless references."""

    x: np.ndarray            # observation grid i/n
    y: np.ndarray            # raw observations
    y_rescaled: np.ndarray   # heteroscedastic form (Y), masked where undefined
    convolved: np.ndarray    # H = q * f on the grid
    f: np.ndarray            # the truth
    gamma: np.ndarray        # local noise amplification (1/mu), inf where mu=0
    mask: np.ndarray         # True where the rescaled form is undefined
    seed: int = 0

    @property
    def n(self) -> int:
        return self.y.size


def generate_heteroscedastic(config: ExperimentConfig, f: PeriodicSignal,
                             rng: np.random.Generator | None = None) -> Dataset:
    """Observations y_i = mu(i/n) H(i/n) + sigma xi_i with H = q * f.

    The rescaled form Y_i = H(i/n) + sigma gamma(i/n) xi_i (gamma = 1/mu,
    the same noise draw) is returned alongside; Y is masked to zero at grid
    points where mu vanishes exactly.
    """
    if config.family != "multiplier":
        raise ValueError("heteroscedastic generation needs the multiplier family")
    kernel = config.build_kernel()
    profile = config.build_modifier()
    if profile.n != f.n:
        raise ValueError("profile and signal sizes differ")
    rng = rng or np.random.default_rng(config.seed)
    H = circular_convolve(f, kernel.spectrum).values
    xi = rng.standard_normal(f.n)
    mu = profile.values
    y = mu * H + config.sigma * xi
    mask = profile.zero_mask
    with np.errstate(divide="ignore"):
        gamma = np.where(mask, np.inf, 1.0 / np.where(mask, 1.0, mu))
    Y = np.where(mask, 0.0, H + config.sigma * np.where(mask, 0.0, gamma) * xi)
    return Dataset(grid_points(f.n), y, Y, H, f.values.copy(), gamma, mask,
                   config.seed)


def generate_irregular(config: ExperimentConfig, f: PeriodicSignal,
                       rng: np.random.Generator | None = None) -> Dataset:
    """Warped-design observations y_i = (q*f)(Ginv(i/n)) + sigma xi_i."""
    if config.family != "design":
        raise ValueError("irregular generation needs the design family")
    kernel = config.build_kernel()
    density = config.build_modifier()
    rng = rng or np.random.default_rng(config.seed)
    H = circular_convolve(f, kernel.spectrum).values
    points = design_quantiles(density, f.n)
    table_x = np.arange(f.n + 1) / f.n
    table_y = np.concatenate([H, [H[0]]])
    warped = np.interp(points, table_x, table_y)
    xi = rng.standard_normal(f.n)
    y = warped + config.sigma * xi
    with np.errstate(divide="ignore"):
        gamma = np.where(density.zero_mask, np.inf,
                         1.0 / np.sqrt(np.where(density.zero_mask, 1.0, density.pdf)))
    return Dataset(points, y, y.copy(), H, f.values.copy(), gamma,
                   density.zero_mask, config.seed)


def snr(f: PeriodicSignal, gamma: np.ndarray, sigma: float) -> float:
    """Signal-to-noise ratio sqrt(n) std(f) / (2 pi ||gamma|| sigma).

    ``gamma`` is the local noise amplification on the grid and ||gamma||
    its Euclidean norm; grid points where gamma is infinite (exact zeros of
    the multiplier) are excluded from the norm.
    """
    if sigma <= 0:
        raise ValueError("snr needs sigma > 0")
    g = np.asarray(gamma, dtype=float)
    g = g[np.isfinite(g)]
    if g.size == 0:
        raise ValueError("gamma has no finite entries")
    return float(np.sqrt(f.n) * f.values.std()
                 / (_TWO_PI * np.linalg.norm(g) * sigma))


def detect_am_phase(y: np.ndarray, omega: float,
                    smooth_window: int = 9,
                    grid: int = 4096) -> tuple[float, list[float]]:
    """Phase and envelope-zero locations of amplitude-modulated data.

    For carrier frequency omega ~ n/2 the grid samples of the modulated
    signal carry the aliased envelope |cos(2 pi nu x + theta)| with
    nu = omega - n/2.  The phase is found by grid search over [0, pi),
    minimizing the least-squares misfit between the smoothed |y| and the
    best multiple of the candidate envelope; zeros are read off the fitted
    envelope, refined by the sign change of the demodulated data.
    """
    n = y.size
    nu = omega - n / 2.0
    x = np.arange(n) / n
    env = np.abs(y)
    w = smooth_window
    kern = np.ones(w) / w
    sm = np.convolve(np.concatenate([env[-w:], env, env[:w]]), kern,
                     mode="same")[w:-w]
    thetas = np.arange(grid) * np.pi / grid
    best_theta, best_cost = 0.0, np.inf
    for theta in thetas:
        model = np.abs(np.cos(_TWO_PI * nu * x + theta))
        scale = float(np.dot(sm, model) / np.dot(model, model))
        resid = sm - scale * model
        cost = float(np.dot(resid, resid))
        if cost < best_cost:
            best_theta, best_cost = float(theta), cost
    zeros = _envelope_zeros(best_theta, nu)
    # polish each zero with the sign change of the demodulated signal
    demod = (-1.0) ** np.arange(n) * y
    sm_demod = np.convolve(np.concatenate([demod[-w:], demod, demod[:w]]),
                           kern, mode="same")[w:-w]
    polished = []
    for z in zeros:
        i0 = int(round(z * n))
        lo, hi = max(1, i0 - 8), min(n - 1, i0 + 8)
        crossing = None
        for i in range(lo, hi):
            a, b = sm_demod[i], sm_demod[i + 1]
            if a == 0.0:
                crossing = i / n
                break
            if a * b < 0:
                crossing = (i + a / (a - b)) / n
                break
        polished.append(crossing if crossing is not None else z)
    return best_theta, sorted(p % 1.0 for p in polished)


def _envelope_zeros(theta: float, nu: float) -> list[float]:
    """Zeros of |cos(2 pi nu x + theta)| in [0, 1)."""
    zeros = []
    k = int(np.floor((theta - np.pi / 2) / np.pi)) - 1
    while True:
        x = (np.pi / 2 + k * np.pi - theta) / (_TWO_PI * nu)
        if x >= 1.0:
            break
        if x >= 0.0:
            zeros.append(float(x))
        k += 1
    return zeros


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------


def mse(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Discrete squared L2 error (1/n) sum (fhat - f)^2."""
    d = estimate - truth
    return float(np.dot(d, d) / d.size)


@dataclass
class ReplicationResult:
    seed: int
    mse: float
    mse_relative: float
    snr: float
    m_hat: int
    mse_wvd: float | None = None
    linear_part_error: float | None = None
    thresholded_part_error: float | None = None
    fallback: bool = False


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[ReplicationResult]
    traces: list
    estimates: list[HybridEstimate]
    wvd_estimates: list[HybridEstimate]
    dataset: Dataset | None = None

    def median_mse(self) -> float:
        return float(np.median([r.mse for r in self.rows]))

    def median_mse_wvd(self) -> float | None:
        vals = [r.mse_wvd for r in self.rows if r.mse_wvd is not None]
        return float(np.median(vals)) if vals else None

    def modal_level(self) -> int:
        ms = [r.m_hat for r in self.rows]
        return int(max(set(ms), key=ms.count))

    def summary(self) -> dict:
        out = {
            "median_mse": self.median_mse(),
            "iqr_mse": _iqr([r.mse for r in self.rows]),
            "modal_m_hat": self.modal_level(),
            "kappa": self.config.kappa,
            "seed": self.config.seed,
            "snr": self.rows[0].snr if self.rows else None,
            "replications": len(self.rows),
        }
        w = self.median_mse_wvd()
        if w is not None:
            out["median_mse_wvd"] = w
            wins = [r.mse < r.mse_wvd for r in self.rows if r.mse_wvd is not None]
            out["hybrid_win_fraction"] = float(np.mean(wins))
        return out


def _iqr(values) -> float:
    lo, hi = np.percentile(values, [25, 75])
    return float(hi - lo)


def _estimate_once(config: ExperimentConfig, data: Dataset, kernel, modifier,
                   basis, table, wvd: bool) -> HybridEstimate:
    settings = config.settings()
    if wvd:
        settings = EstimatorSettings(
            m1=settings.m1, J=settings.J, kappa=settings.kappa,
            rule=settings.rule, weight_mode=settings.weight_mode,
            window_D=0.0, window_D0=0.0)
    y = PeriodicSignal(data.y)
    return adaptive_estimate(y, modifier, kernel, basis, config.sigma,
                             settings, table)


def run_experiment(config: ExperimentConfig, outdir: str | Path | None = None,
                   keep_estimates: bool = False) -> ExperimentResult:
    """Run the configured experiment over its replications.

    Per replication: draw data, estimate (hybrid, thresholded-only, or both
    on the same draw), and record errors and the selected level.  When
    ``outdir`` is given, per-replication rows, the summary, the last
    estimate and its selection trace are written as CSV/JSON artifacts.
    """
    f = make_test_signal(config.signal, config.n)
    kernel = config.build_kernel()
    modifier = config.build_modifier()
    basis = config.build_basis()
    table = build_vaguelettes(kernel, basis)
    children = np.random.SeedSequence(config.seed).spawn(config.replications)

    rows: list[ReplicationResult] = []
    traces, estimates, wvd_estimates = [], [], []
    last_data = None
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        if config.family == "multiplier":
            data = generate_heteroscedastic(config, f, rng)
        else:
            data = generate_irregular(config, f, rng)
        data.seed = r
        last_data = data
        modifier_r = _with_detected_singularities(config, modifier, data)

        est = wvd_est = None
        if config.mode in ("hybrid", "both"):
            est = _estimate_once(config, data, kernel, modifier_r, basis, table,
                                 wvd=False)
        if config.mode in ("wvd", "both"):
            wvd_est = _estimate_once(config, data, kernel, modifier_r, basis,
                                     table, wvd=True)
        primary = est if est is not None else wvd_est
        row = ReplicationResult(
            seed=r,
            mse=mse(primary.combined.values, data.f),
            mse_relative=mse(primary.combined.values, data.f)
            / max(np.dot(data.f, data.f) / data.n, 1e-300),
            snr=snr(f, data.gamma, config.sigma) if config.sigma > 0 else np.inf,
            m_hat=primary.level,
            fallback=bool(primary.diagnostics.get("fallback", False)),
        )
        if est is not None and wvd_est is not None:
            row.mse_wvd = mse(wvd_est.combined.values, data.f)
        f0_true, fc_true = _true_decomposition(f, basis, modifier_r, primary)
        row.linear_part_error = mse(primary.linear_part.values, f0_true)
        row.thresholded_part_error = mse(primary.thresholded_part.values, fc_true)
        rows.append(row)
        traces.append(primary.trace)
        if keep_estimates or r == config.replications - 1:
            estimates.append(primary)
            if wvd_est is not None:
                wvd_estimates.append(wvd_est)

    result = ExperimentResult(config, rows, traces, estimates, wvd_estimates,
                              last_data)
    if outdir is not None:
        write_artifacts(result, Path(outdir))
    return result


def _true_decomposition(f: PeriodicSignal, basis: PeriodizedBasis, modifier,
                        estimate: HybridEstimate) -> tuple[np.ndarray, np.ndarray]:
    """Singularity-affected/free split of the truth at the selected level.

    The affected part collects the coefficients of f inside the windows the
    estimate actually used (J-truncated); the free part is the remainder.
    """
    part = estimate.diagnostics.get("partition")
    m = estimate.level
    if part is None or not part.K0(m).size:
        return np.zeros(f.n), f.values.copy()
    tree = analyze(basis, f, m)
    affected = tree.copy()
    affected.a[~part.affected_scaling[m]] = 0.0
    for j in affected.b:
        affected.b[j][~part.affected_wavelet[j]] = 0.0
    f0 = reconstruct(basis, affected).values
    return f0, f.values - f0


def _with_detected_singularities(config: ExperimentConfig,
                                 modifier, data: Dataset):
    """For AM profiles, replace the singularity list by data-driven zeros."""
    if (config.family == "multiplier"
            and isinstance(modifier, MultiplierProfile)
            and modifier.kind == "am-cosine"
            and config.am_detect_from_data):
        omega = modifier.params.get("omega") or (config.n / 2 + 0.5)
        _, zeros = detect_am_phase(data.y, omega)
        sings = tuple(Singularity(z, 2.0) for z in zeros
                      if 0.0 < z < 1.0)
        if sings:
            return MultiplierProfile(modifier.kind, modifier.values, sings,
                                     dict(modifier.params))
    return modifier


# --------------------------------------------------------------------------
# rate study
# --------------------------------------------------------------------------


@dataclass
class RateStudyResult:
    n_values: list[int]
    eps_values: list[float]
    median_mse: list[float]
    slope_vs_eps: float
    slope_vs_n: float
    theory_exponent: float
    regime: str

    def within(self, tol: float) -> bool:
        return abs(self.slope_vs_eps - self.theory_exponent) <= tol


def rate_study(config: ExperimentConfig, n_values, replications: int,
               besov: BesovParams) -> RateStudyResult:
    """Monte-Carlo convergence-rate study across grid sizes.

    Fits the OLS slope of log2(median MSE) against log2(eps) (and against
    log2 n; the two differ only in sign since eps = sigma^2/n at fixed
    sigma) and reports the theoretical risk exponent for comparison.
    """
    n_values = sorted(int(v) for v in n_values)
    if len(n_values) < 4:
        raise ValueError("rate study needs at least 4 grid sizes")
    if replications < 10:
        raise ValueError("rate study needs at least 10 replications per size")
    if config.sigma <= 0:
        raise ValueError("rate study needs sigma > 0 (eps would vanish)")
    medians, eps_vals = [], []
    for n in n_values:
        cfg = ExperimentConfig.from_dict({**_config_dict(config),
                                          "n": n,
                                          "replications": replications})
        result = run_experiment(cfg)
        medians.append(result.median_mse())
        eps_vals.append(cfg.eps)
    slope_eps = float(np.polyfit(np.log2(eps_vals), np.log2(medians), 1)[0])
    slope_n = float(np.polyfit(np.log2(n_values), np.log2(medians), 1)[0])
    alpha = config.build_modifier().max_order()
    beta = config.build_kernel().ill_posedness
    mid_eps = float(np.exp(np.mean(np.log(eps_vals))))
    _, regime = minimax_rate(besov, ProblemParams(alpha, beta, mid_eps))
    if regime == "inhomogeneity-dominated":
        exponent = 2.0 * besov.s_prime / (2.0 * besov.s_prime + alpha + beta)
    else:
        exponent = 2.0 * besov.s / (2.0 * besov.s + beta + 1.0)
    return RateStudyResult(n_values, eps_vals, medians, slope_eps, slope_n,
                           float(exponent), regime)


def _config_dict(config: ExperimentConfig) -> dict:
    return asdict(config)


# --------------------------------------------------------------------------
# artifacts
# --------------------------------------------------------------------------


def write_artifacts(result: ExperimentResult, outdir: Path) -> list[Path]:
    """Write replication rows, summary JSON, estimate CSV and trace CSV."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    rows_path = outdir / "replications.csv"
    with open(rows_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "mse", "mse_relative", "snr", "m_hat",
                         "mse_wvd", "fallback"])
        for r in result.rows:
            writer.writerow([r.seed, f"{r.mse:.10e}", f"{r.mse_relative:.10e}",
                             f"{r.snr:.6f}", r.m_hat,
                             "" if r.mse_wvd is None else f"{r.mse_wvd:.10e}",
                             int(r.fallback)])
    written.append(rows_path)

    summary_path = outdir / "summary.json"
    doc = result.summary()
    doc["mse"] = doc.pop("median_mse")
    doc["m_hat"] = doc.pop("modal_m_hat")
    summary_path.write_text(json.dumps(doc, indent=2))
    written.append(summary_path)

    if result.estimates:
        written.append(write_estimate_csv(
            outdir / "estimate.csv", result.estimates[-1],
            result.dataset))
    trace = result.traces[-1] if result.traces else None
    if trace is not None:
        written.append(write_trace_csv(outdir / "lepski_trace.csv", trace))
    return written


def write_estimate_csv(path: Path, est: HybridEstimate,
                       dataset: Dataset | None) -> Path:
    n = est.combined.n
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "f", "f_hat", "f0_hat", "fc_hat"])
        truth = dataset.f if dataset is not None else np.full(n, np.nan)
        for i in range(n):
            writer.writerow([f"{i / n:.8f}", f"{truth[i]:.10e}",
                             f"{est.combined.values[i]:.10e}",
                             f"{est.linear_part.values[i]:.10e}",
                             f"{est.thresholded_part.values[i]:.10e}"])
    return path


def write_trace_csv(path: Path, trace) -> Path:
    """Selection matrix as CSV: rows m, columns j, entries L_mj."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m"] + [f"j={j}" for j in trace.levels])
        for i, m in enumerate(trace.levels):
            row = [str(m)]
            for r in range(trace.levels.size):
                v = trace.matrix[i, r]
                row.append("" if np.isnan(v) else f"{v:.6e}")
            writer.writerow(row)
    return path


def write_dataset_csv(path: Path, data: Dataset,
                      modifier_values: np.ndarray) -> Path:
    """Dataset CSV: x, y, y_rescaled, f, convolved, modifier."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "y_rescaled", "f", "convolved", "modifier"])
        for i in range(data.n):
            writer.writerow([f"{data.x[i]:.8f}", f"{data.y[i]:.10e}",
                             f"{data.y_rescaled[i]:.10e}", f"{data.f[i]:.10e}",
                             f"{data.convolved[i]:.10e}",
                             f"{modifier_values[i]:.10e}"])
    return path
