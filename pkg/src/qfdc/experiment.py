"""End-to-end scenario engine.

Composes source -> converter -> (optional interferometer) -> detector,
evaluates each scenario point both analytically and by seeded Monte Carlo,
and provides the sweep drivers for the four standard experiments: the
pump-power sweep (``run_fig4a``), the count-rate-vs-mu sweep (``run_fig4b``),
the fringe scan (``run_fig5``), and the visibility-vs-mu sweep
(``run_fig6``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .detector import (
    CorrectedRate,
    CountSummary,
    DetectorSpec,
    click_probability,
    dark_subtract,
    derive_seed,
    sample_gates,
)
from .interferometer import (
    InterferometerSpec,
    gate_mean_photons,
    suppress_background,
    transmit_train,
)
from .mixer import ConverterSpec, conversion_efficiency, convert, noise_background
from .optics import PhasePattern, attenuate, coherent_train, transmission_loss_db

DEFAULT_N_SLOTS = 4096
DEFAULT_GATES_PER_POINT = 40_000_000  # 10 s at the 4 MHz gate rate
DEFAULT_N_PHI = 16


@dataclass(frozen=True)
class ChainParams:
    """Everything between the source and the click record.

    ``post_converter_transmission`` covers the waveguide-output-to-
    interferometer-input optics (collection lenses, fiber coupling, the
    pump-rejection couplers). ``intrinsic_visibility_v0`` is the
    background-free fringe contrast ceiling, lumping source coherence,
    modulator fidelity and interferometer imbalance.
    """

    converter: ConverterSpec
    detector: DetectorSpec
    interferometer: InterferometerSpec | None = None
    post_converter_transmission: float = 1.0
    intrinsic_visibility_v0: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.post_converter_transmission <= 1.0:
            raise ValueError(
                "post_converter_transmission must be in [0, 1], "
                f"got {self.post_converter_transmission}"
            )
        if not 0.0 <= self.intrinsic_visibility_v0 <= 1.0:
            raise ValueError(
                f"intrinsic_visibility_v0 must be in [0, 1], got {self.intrinsic_visibility_v0}"
            )

    def without_interferometer(self) -> "ChainParams":
        return replace(self, interferometer=None)

    def at_pump_power(self, pump_power_w: float) -> "ChainParams":
        return replace(self, converter=replace(self.converter, pump_power_w=pump_power_w))


@dataclass(frozen=True)
class ExpectedRate:
    """Analytic per-gate means at the detector input, plus the click probability."""

    signal_photons: float
    noise_photons: float
    mean_photons: float
    click_probability: float


def _fringe_contrast(params: ChainParams) -> float:
    """Effective fringe contrast: V0 reduced by a nonzero arm phase bias.

    With the alternating 0/phi pattern, consecutive slots interfere at
    phase differences -phi and +phi; a bias theta turns the slot-averaged
    fringe into (1 + V0*cos(theta)*cos(phi))/2.
    """
    assert params.interferometer is not None
    return params.intrinsic_visibility_v0 * math.cos(params.interferometer.phase_bias_theta)


def expected_rate(mu: float, phi: float | None, params: ChainParams) -> ExpectedRate:
    """Closed-form per-gate signal, background and click probability.

    ``phi`` is the alternating phase-modulation depth; ``None`` means the
    phi-averaged fringe (factor 1/2) when an interferometer is present.
    Detector efficiency is applied exactly once, inside the click model;
    all upstream factors are photon-number transmissions.
    """
    if mu < 0.0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if phi is not None and params.interferometer is None:
        raise ValueError("phi was given but the chain has no interferometer")
    eta = conversion_efficiency(params.converter)
    signal = mu * eta * params.post_converter_transmission
    noise = noise_background(params.converter).scaled(params.post_converter_transmission)
    if params.interferometer is not None:
        cos_phi = 0.0 if phi is None else math.cos(phi)
        fringe = (1.0 + _fringe_contrast(params) * cos_phi) / 2.0
        signal *= params.interferometer.insertion_transmission * fringe
        noise = suppress_background(noise, params.interferometer)
    total = signal + noise.total_photons_per_gate
    return ExpectedRate(
        signal_photons=signal,
        noise_photons=noise.total_photons_per_gate,
        mean_photons=total,
        click_probability=click_probability(total, params.detector),
    )


@dataclass(frozen=True)
class VisibilityPair:
    raw: float
    subtracted: float


def analytic_visibility(mu: float, params: ChainParams) -> VisibilityPair:
    """Fringe visibility predicted from the signal-to-background ratio.

    With S the constructive-port signal clicks/gate (fringe peak for a
    perfect fringe) and B the flat background clicks/gate, the fitted
    c1/c0 visibility of the fringe S*(1 + V0*cos(phi))/2 + B is
    S*V0/(S + 2B). The raw value counts dark clicks in B; the subtracted
    value removes them.
    """
    if params.interferometer is None:
        raise ValueError("analytic_visibility requires an interferometer in the chain")
    if mu < 0.0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    det = params.detector
    eta = conversion_efficiency(params.converter)
    s_clicks = (
        det.efficiency
        * mu
        * eta
        * params.post_converter_transmission
        * params.interferometer.insertion_transmission
    )
    noise = suppress_background(
        noise_background(params.converter).scaled(params.post_converter_transmission),
        params.interferometer,
    )
    b_noise = det.efficiency * noise.total_photons_per_gate
    if s_clicks == 0.0:
        return VisibilityPair(0.0, 0.0)
    contrast = _fringe_contrast(params)
    raw = s_clicks * contrast / (s_clicks + 2.0 * (b_noise + det.dark_prob_per_gate))
    sub = s_clicks * contrast / (s_clicks + 2.0 * b_noise)
    return VisibilityPair(raw, sub)


def chain_point_mean(
    mu: float, phi: float | None, params: ChainParams, n_slots: int = DEFAULT_N_SLOTS
) -> float:
    """Mean photons per gate at the detector via the full train pipeline.

    Unlike :func:`expected_rate` this propagates an actual finite train of
    amplitudes, so it includes the non-interfering edge slot of the
    interferometer (a < 0.1% effect at the default train length). The
    intrinsic visibility ceiling enters as a partial-coherence blend of the
    interfering and incoherent port outputs.
    """
    pattern = PhasePattern.alternating(phi) if phi is not None else PhasePattern.uniform(0.0)
    train = coherent_train(params.converter.process.signal, n_slots, mu, pattern)
    converted, _ = convert(train, params.converter)
    converted = attenuate(converted, transmission_loss_db(params.post_converter_transmission))
    noise = noise_background(params.converter).scaled(params.post_converter_transmission)
    if params.interferometer is not None:
        port0 = transmit_train(converted, params.interferometer, port=0)
        port1 = transmit_train(converted, params.interferometer, port=1)
        v0 = params.intrinsic_visibility_v0
        signal = gate_mean_photons(v0 * port0 + (1.0 - v0) * 0.5 * (port0 + port1))
        noise = suppress_background(noise, params.interferometer)
    else:
        signal = converted.mean_photon_number
    return signal + noise.total_photons_per_gate


def simulate_point(
    mu: float,
    phi: float | None,
    params: ChainParams,
    n_gates: int,
    seed: int,
    n_slots: int = DEFAULT_N_SLOTS,
    workers: int = 1,
) -> CountSummary:
    """Monte Carlo click record for one scenario point."""
    if phi is not None and params.interferometer is None:
        raise ValueError("phi was given but the chain has no interferometer")
    mean = chain_point_mean(mu, phi, params, n_slots=n_slots)
    return sample_gates(mean, params.detector, n_gates, seed, workers=workers)


# --- fitting helpers -------------------------------------------------------


@dataclass(frozen=True)
class CosineFit:
    """Linear least-squares fit of y ~ c0 + c1*cos(phi)."""

    c0: float
    c1: float
    c0_sigma: float
    c1_sigma: float
    c0c1_cov: float

    @property
    def visibility(self) -> float:
        return self.c1 / self.c0

    @property
    def visibility_sigma(self) -> float:
        return self._ratio_sigma(self.c0)

    def visibility_dark_subtracted(self, dark_prob: float) -> float:
        return self.c1 / (self.c0 - dark_prob)

    def visibility_dark_subtracted_sigma(self, dark_prob: float) -> float:
        return self._ratio_sigma(self.c0 - dark_prob)

    def _ratio_sigma(self, denom: float) -> float:
        # delta method on c1/denom, denom = c0 - const
        g0 = -self.c1 / denom**2
        g1 = 1.0 / denom
        var = (
            g0 * g0 * self.c0_sigma**2
            + 2.0 * g0 * g1 * self.c0c1_cov
            + g1 * g1 * self.c1_sigma**2
        )
        return math.sqrt(max(var, 0.0))


def fit_cosine(phis: np.ndarray, values: np.ndarray, sigmas: np.ndarray) -> CosineFit:
    """Fit c0 + c1*cos(phi) by ordinary least squares.

    The per-point sigmas enter only the parameter covariance (sandwich
    form), keeping the estimator itself independent of the noise estimates.
    """
    phis = np.asarray(phis, dtype=float)
    y = np.asarray(values, dtype=float)
    sig = np.asarray(sigmas, dtype=float)
    x = np.column_stack([np.ones_like(phis), np.cos(phis)])
    xtx_inv = np.linalg.inv(x.T @ x)
    coef = xtx_inv @ (x.T @ y)
    middle = (x * (sig**2)[:, None]).T @ x
    cov = xtx_inv @ middle @ xtx_inv
    return CosineFit(
        c0=float(coef[0]),
        c1=float(coef[1]),
        c0_sigma=float(math.sqrt(max(cov[0, 0], 0.0))),
        c1_sigma=float(math.sqrt(max(cov[1, 1], 0.0))),
        c0c1_cov=float(cov[0, 1]),
    )


@dataclass(frozen=True)
class LineFit:
    """Weighted least-squares line through the origin, y = slope*x."""

    slope: float
    slope_sigma: float


def fit_through_origin(x: np.ndarray, y: np.ndarray, sigmas: np.ndarray) -> LineFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = 1.0 / np.asarray(sigmas, dtype=float) ** 2
    denom = float(np.sum(w * x * x))
    if denom == 0.0:
        raise ValueError("through-origin fit needs at least one nonzero abscissa")
    slope = float(np.sum(w * x * y)) / denom
    return LineFit(slope=slope, slope_sigma=math.sqrt(1.0 / denom))


def _sigma_floor(summary: CountSummary) -> float:
    """Binomial sigma with a one-count floor so zero-click points keep weight."""
    return max(summary.sigma_p, 1.0 / summary.gates)


# --- scan results ----------------------------------------------------------


@dataclass
class ScanResult:
    """Tabulated sweep output: one row per abscissa value.

    ``raw`` holds the per-point signal-run summaries where a scenario has a
    single Monte Carlo run per point; derived per-point quantities live in
    ``columns`` and scalar fit outputs in ``fit``.
    """

    abscissa_label: str
    abscissa: list[float]
    raw: list[CountSummary] | None = None
    background: list[CountSummary] | None = None
    corrected: list[CorrectedRate] | None = None
    columns: dict[str, list[float]] = field(default_factory=dict)
    fit: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.abscissa)
        for name, seq in (
            ("raw", self.raw),
            ("background", self.background),
            ("corrected", self.corrected),
        ):
            if seq is not None and len(seq) != n:
                raise ValueError(f"{name} has {len(seq)} entries for {n} points")
        for name, col in self.columns.items():
            if len(col) != n:
                raise ValueError(f"column {name!r} has {len(col)} entries for {n} points")
            if name.endswith("sigma") and any(v < 0.0 for v in col):
                raise ValueError(f"column {name!r} contains negative sigmas")


# --- scenario drivers ------------------------------------------------------


def run_fig4a(
    params: ChainParams,
    power_grid_w,
    mu: float = 125.0,
    gates_per_point: int = DEFAULT_GATES_PER_POINT,
    seed: int = 0,
    n_slots: int = DEFAULT_N_SLOTS,
    workers: int = 1,
) -> ScanResult:
    """Pump-power sweep: conversion efficiency and pump-induced noise.

    At each power a signal run (large mu for signal-to-noise) and a
    signal-off run are simulated. The efficiency estimator inverts the
    click model, referencing the count excess to the photons entering the
    coupler; the noise estimator references the signal-off counts to the
    waveguide output, where it is linear in pump power.
    """
    if params.interferometer is not None:
        raise ValueError("the power sweep runs without the interferometer")
    if mu <= 0.0:
        raise ValueError(f"mu must be > 0, got {mu}")
    det = params.detector
    t_post = params.post_converter_transmission
    powers = [float(p) for p in power_grid_w]
    raw: list[CountSummary] = []
    background: list[CountSummary] = []
    eff: list[float] = []
    eff_sigma: list[float] = []
    noise: list[float] = []
    noise_sigma: list[float] = []
    eff_denom = det.efficiency * mu * t_post
    noise_denom = det.efficiency * t_post
    for i, power in enumerate(powers):
        point = params.at_pump_power(power)
        sig = simulate_point(mu, None, point, gates_per_point,
                             derive_seed(seed, i, 0), n_slots, workers)
        bg = simulate_point(0.0, None, point, gates_per_point,
                            derive_seed(seed, i, 1), n_slots, workers)
        raw.append(sig)
        background.append(bg)
        # invert p = 1 - (1-p_bg)*exp(-eta*mu_signal) for the signal photons;
        # survive the (saturated) p = 1 corner
        miss_sig = max(1.0 - sig.p_click, 1e-300)
        miss_bg = max(1.0 - bg.p_click, 1e-300)
        eff.append(math.log(miss_bg / miss_sig) / eff_denom)
        eff_sigma.append(
            math.hypot(sig.sigma_p / miss_sig, bg.sigma_p / miss_bg) / eff_denom
        )
        noise.append(math.log((1.0 - det.dark_prob_per_gate) / miss_bg) / noise_denom)
        noise_sigma.append(bg.sigma_p / (miss_bg * noise_denom))
    positive = [i for i, p in enumerate(powers) if p > 0.0]
    fit: dict[str, float] = {}
    if positive:
        line = fit_through_origin(
            np.array([powers[i] for i in positive]),
            np.array([noise[i] for i in positive]),
            np.array([max(noise_sigma[i], 1e-300) for i in positive]),
        )
        fit = {"noise_slope_per_w": line.slope, "noise_slope_sigma": line.slope_sigma}
    return ScanResult(
        abscissa_label="power_mw",
        abscissa=[p * 1e3 for p in powers],
        raw=raw,
        background=background,
        columns={
            "efficiency": eff,
            "eff_sigma": eff_sigma,
            "noise_per_gate": noise,
            "noise_sigma": noise_sigma,
        },
        fit=fit,
    )


def run_fig4b(
    params: ChainParams,
    mu_grid,
    gates_per_point: int = 100_000_000,
    seed: int = 0,
    n_slots: int = DEFAULT_N_SLOTS,
    workers: int = 1,
) -> ScanResult:
    """Count rate per gate versus mean input photon number, with the
    noise floor subtracted and a through-origin line fitted to the
    subtracted points."""
    if params.interferometer is not None:
        raise ValueError("the count-rate sweep runs without the interferometer")
    mus = [float(m) for m in mu_grid]
    raw: list[CountSummary] = []
    background: list[CountSummary] = []
    corrected: list[CorrectedRate] = []
    for i, mu in enumerate(mus):
        sig = simulate_point(mu, None, params, gates_per_point,
                             derive_seed(seed, i, 0), n_slots, workers)
        bg = simulate_point(0.0, None, params, gates_per_point,
                            derive_seed(seed, i, 1), n_slots, workers)
        raw.append(sig)
        background.append(bg)
        corrected.append(dark_subtract(sig, bg))
    line = fit_through_origin(
        np.array(mus),
        np.array([c.p for c in corrected]),
        np.array([max(c.sigma, 1e-300) for c in corrected]),
    )
    fit_line = [line.slope * mu for mu in mus]
    rel_residual = [
        (c.p - f) / f if f != 0.0 else math.nan for c, f in zip(corrected, fit_line)
    ]
    floor = float(np.mean([b.p_click for b in background]))
    return ScanResult(
        abscissa_label="mu",
        abscissa=mus,
        raw=raw,
        background=background,
        corrected=corrected,
        columns={"fit_line": fit_line, "rel_residual": rel_residual},
        fit={
            "slope": line.slope,
            "slope_sigma": line.slope_sigma,
            "floor_mean": floor,
        },
    )


def default_phi_grid(n_phi: int = DEFAULT_N_PHI) -> np.ndarray:
    """Evenly spaced modulation phases over one full fringe period."""
    return np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)


def run_fig5(
    params: ChainParams,
    mu: float,
    phi_grid=None,
    gates_per_point: int = DEFAULT_GATES_PER_POINT,
    seed: int = 0,
    n_slots: int = DEFAULT_N_SLOTS,
    workers: int = 1,
    control: bool = False,
) -> ScanResult:
    """Fringe scan: count rate versus the phase-modulation depth phi.

    Fits c0 + c1*cos(phi) and reports the visibility c1/c0 with its
    propagated uncertainty, plus the dark-subtracted visibility
    c1/(c0 - p_dark). With ``control=True`` the interferometer is removed
    from the chain, which should leave no fitted modulation.
    """
    phis = default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    if phis.size < 4:
        raise ValueError(f"fringe scan needs at least 4 phase points, got {phis.size}")
    if control:
        # modulation is still applied at the source, but without the
        # interferometer it cannot reach the count rate; phi=None gives the
        # identical per-gate mean
        run_params = params.without_interferometer()
    else:
        if params.interferometer is None:
            raise ValueError("fringe scan requires an interferometer in the chain")
        run_params = params
    raw: list[CountSummary] = []
    for i, phi in enumerate(phis):
        phi_arg = None if control else float(phi)
        raw.append(
            simulate_point(mu, phi_arg, run_params, gates_per_point,
                           derive_seed(seed, i), n_slots, workers)
        )
    fitted = fit_cosine(
        phis,
        np.array([s.p_click for s in raw]),
        np.array([_sigma_floor(s) for s in raw]),
    )
    dark = params.detector.dark_prob_per_gate
    return ScanResult(
        abscissa_label="phi_rad",
        abscissa=[float(p) for p in phis],
        raw=raw,
        columns={
            "rate_per_s": [s.rate_per_s for s in raw],
            "rate_sigma": [s.sigma_p * s.gate_rate_hz for s in raw],
        },
        fit={
            "c0": fitted.c0,
            "c1": fitted.c1,
            "c0_sigma": fitted.c0_sigma,
            "c1_sigma": fitted.c1_sigma,
            "visibility": fitted.visibility,
            "visibility_sigma": fitted.visibility_sigma,
            "visibility_sub": fitted.visibility_dark_subtracted(dark),
            "visibility_sub_sigma": fitted.visibility_dark_subtracted_sigma(dark),
            "control": 1.0 if control else 0.0,
        },
    )


def run_fig6(
    params: ChainParams,
    mu_grid,
    n_phi: int = DEFAULT_N_PHI,
    gates_per_point: int = DEFAULT_GATES_PER_POINT,
    seed: int = 0,
    n_slots: int = DEFAULT_N_SLOTS,
    workers: int = 1,
) -> ScanResult:
    """Fringe visibility versus mu, Monte Carlo against the analytic curve.

    Each mu runs a full fringe scan; a point counts as a detected fringe
    when its raw visibility exceeds three times its uncertainty.
    """
    if params.interferometer is None:
        raise ValueError("the visibility sweep requires an interferometer in the chain")
    mus = [float(m) for m in mu_grid]
    phis = default_phi_grid(n_phi)
    v_raw: list[float] = []
    v_raw_sigma: list[float] = []
    v_sub: list[float] = []
    v_sub_sigma: list[float] = []
    v_analytic: list[float] = []
    v_analytic_sub: list[float] = []
    detectable: list[float] = []
    for j, mu in enumerate(mus):
        scan = run_fig5(
            params, mu, phis, gates_per_point, derive_seed(seed, j), n_slots, workers
        )
        v_raw.append(scan.fit["visibility"])
        v_raw_sigma.append(scan.fit["visibility_sigma"])
        v_sub.append(scan.fit["visibility_sub"])
        v_sub_sigma.append(scan.fit["visibility_sub_sigma"])
        curve = analytic_visibility(mu, params)
        v_analytic.append(curve.raw)
        v_analytic_sub.append(curve.subtracted)
        detectable.append(1.0 if scan.fit["visibility"] > 3.0 * scan.fit["visibility_sigma"] else 0.0)
    detected = [m for m, flag in zip(mus, detectable) if flag > 0.0]
    return ScanResult(
        abscissa_label="mu",
        abscissa=mus,
        columns={
            "v_raw": v_raw,
            "v_raw_sigma": v_raw_sigma,
            "v_sub": v_sub,
            "v_sub_sigma": v_sub_sigma,
            "v_analytic": v_analytic,
            "v_analytic_sub": v_analytic_sub,
            "detectable": detectable,
        },
        fit={"smallest_detectable_mu": min(detected) if detected else math.nan},
    )
