"""Monte Carlo model of the four-arm multi-core-fiber interferometer.

The preparation side launches weak coherent pulses into a balanced
four-port splitter, then shapes the path-encoded ququart with per-arm
transmissivities and phases; the measurement side applies per-arm phases
and a second splitter, and a click in output path k is outcome k.  The
applied preparation phase in arm k decomposes as

    phi_A = phi_noise + phi_control + phi_state

where the control term is set by a slow stabilization loop and the state
term switches at the pulse rate.  The source emits Poissonian photon
numbers (mean ``mu`` per pulse), detectors register each photon
independently with a fixed efficiency, and optional dark counts fire per
gate.  Everything is deterministic given the master seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .counts import CountsTable
from .errors import (
    AllArmsBlocked,
    ConfigError,
    DimensionMismatch,
    StabilizationFailed,
)
from .mub import HADAMARD4, hadamard_mub_pair_d4
from .qrac import optimal_states

ARMS = 4
NOISE_MODELS = ("none", "gaussian_drift", "random_walk")

# Rounds are processed in fixed-size blocks, each on an independent
# substream of the master seed, so partial results merge identically
# regardless of processing order.
BLOCK_ROUNDS = 1 << 18


@dataclass
class PhaseNoiseConfig:
    """Per-arm phase-noise process applied at the preparation stage.

    ``gaussian_drift`` draws an independent Gaussian phase per pulse and
    arm; ``random_walk`` accumulates Gaussian steps pulse to pulse.
    ``sigma`` is in radians per pulse interval.
    """

    model: str = "none"
    sigma: float = 0.0

    def validate(self) -> None:
        if self.model not in NOISE_MODELS:
            raise ConfigError(f"unknown phase-noise model {self.model!r}")
        if self.sigma < 0.0:
            raise ConfigError("phase-noise sigma must be nonnegative")


@dataclass
class InterferometerConfig:
    d: int = 4
    mu: float = 0.2
    det_efficiency: float = 0.10
    rep_rate: float = 2.0e6
    integration_time: float = 1.0
    phase_noise: PhaseNoiseConfig = field(default_factory=PhaseNoiseConfig)
    tau: tuple = (1.0, 1.0, 1.0, 1.0)
    dark_count_prob: float = 0.0

    def validate(self) -> None:
        if self.d != ARMS:
            raise ConfigError(f"the interferometer model is fixed at d=4, got {self.d}")
        if not self.mu > 0.0:
            raise ConfigError("mu must be positive")
        for name in ("det_efficiency", "dark_count_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.rep_rate <= 0.0 or self.integration_time <= 0.0:
            raise ConfigError("rep_rate and integration_time must be positive")
        if len(self.tau) != ARMS or any(not 0.0 <= t <= 1.0 for t in self.tau):
            raise ConfigError("tau must be 4 transmissivities in [0, 1]")
        self.phase_noise.validate()

    def default_rounds(self) -> int:
        return int(round(self.rep_rate * self.integration_time))

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "mu": self.mu,
            "det_efficiency": self.det_efficiency,
            "rep_rate": self.rep_rate,
            "integration_time": self.integration_time,
            "phase_noise": {
                "model": self.phase_noise.model,
                "sigma": self.phase_noise.sigma,
            },
            "tau": list(self.tau),
            "dark_count_prob": self.dark_count_prob,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "InterferometerConfig":
        known = {
            "d", "mu", "det_efficiency", "rep_rate", "integration_time",
            "phase_noise", "tau", "dark_count_prob",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        noise_doc = doc.get("phase_noise", {})
        if not isinstance(noise_doc, dict):
            raise ConfigError("phase_noise must be an object")
        try:
            cfg = cls(
                d=int(doc.get("d", 4)),
                mu=float(doc.get("mu", 0.2)),
                det_efficiency=float(doc.get("det_efficiency", 0.10)),
                rep_rate=float(doc.get("rep_rate", 2.0e6)),
                integration_time=float(doc.get("integration_time", 1.0)),
                phase_noise=PhaseNoiseConfig(
                    model=str(noise_doc.get("model", "none")),
                    sigma=float(noise_doc.get("sigma", 0.0)),
                ),
                tau=tuple(float(t) for t in doc.get("tau", (1.0,) * ARMS)),
                dark_count_prob=float(doc.get("dark_count_prob", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from exc
        cfg.validate()
        return cfg


@dataclass
class PhaseState:
    """Per-arm phases of the interferometer, all in radians.

    The applied preparation phase in arm k is exactly
    ``phi_n[k] + phi_c[k] + phi_s[k]``.
    """

    phi_n: np.ndarray = field(default_factory=lambda: np.zeros(ARMS))
    phi_c: np.ndarray = field(default_factory=lambda: np.zeros(ARMS))
    phi_s: np.ndarray = field(default_factory=lambda: np.zeros(ARMS))
    phi_b: np.ndarray = field(default_factory=lambda: np.zeros(ARMS))

    def applied_preparation_phase(self) -> np.ndarray:
        return np.asarray(self.phi_n) + np.asarray(self.phi_c) + np.asarray(self.phi_s)


def mbs_matrix() -> np.ndarray:
    """Transfer matrix of the balanced four-port splitter (Hadamard over 2).

    Real, symmetric, self-inverse; identical to the first analysis basis.
    """
    return HADAMARD4.copy()


def prepare_state(tau, phi_a) -> np.ndarray:
    """Path-encoded ququart ``sum_k tau_k exp(i phi_k) |k>``, normalized."""
    t = np.asarray(tau, dtype=float)
    phi = np.asarray(phi_a, dtype=float)
    if t.shape != (ARMS,) or phi.shape != (ARMS,):
        raise DimensionMismatch("tau and phi_a must each have 4 entries")
    norm_sq = float(np.sum(t * t))
    if norm_sq == 0.0:
        raise AllArmsBlocked("all transmissivities are zero")
    return t * np.exp(1j * phi) / math.sqrt(norm_sq)


def measurement_unitary(phi_b) -> np.ndarray:
    """Analysis unitary of the measurement stage.

    The per-arm phases act on the input modes before the splitter, so the
    matrix is the splitter times a diagonal phase layer; row k is the bra
    of the analysis state for outcome k.  With all phases zero the rows
    are the first MUB basis; with the first phase at pi they are the
    second.
    """
    phi = np.asarray(phi_b, dtype=float)
    if phi.shape != (ARMS,):
        raise DimensionMismatch("phi_b must have 4 entries")
    return HADAMARD4.astype(complex) @ np.diag(np.exp(-1j * phi))


def analysis_kets(phi_b) -> np.ndarray:
    """Kets of the analysis basis, one per output path (rows)."""
    return measurement_unitary(phi_b).conj()


def detection_probabilities(state, phi_b) -> np.ndarray:
    """Click probabilities per output path for a normalized input state."""
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (ARMS,):
        raise DimensionMismatch("state must have 4 entries")
    amps = measurement_unitary(phi_b) @ psi
    return np.abs(amps) ** 2


def settings_for_state(target) -> tuple[np.ndarray, np.ndarray]:
    """Transmissivities and state phases that prepare ``target``.

    ``tau`` is the amplitude profile scaled so its maximum is 1; phases
    are the component arguments (zero on blocked arms).  Preparing with
    these settings reproduces the target up to a global phase.
    """
    t = np.asarray(target, dtype=complex)
    if t.shape != (ARMS,):
        raise DimensionMismatch("target must have 4 entries")
    amp = np.abs(t)
    peak = amp.max()
    if peak == 0.0:
        raise AllArmsBlocked("target state is the zero vector")
    tau = amp / peak
    phi = np.where(amp > 1e-12, np.angle(t), 0.0)
    return tau, phi


def measurement_phase_for_input(y: int) -> np.ndarray:
    """Measurement-side phases selecting the basis for input y in {1, 2}."""
    if y == 1:
        return np.zeros(ARMS)
    if y == 2:
        return np.array([math.pi, 0.0, 0.0, 0.0])
    raise ValueError(f"y must be 1 or 2, got {y}")


def sample_source(mu: float, rng: np.random.Generator, size=None):
    """Poissonian photon number(s) of a weak coherent pulse with mean mu."""
    if not mu > 0.0:
        raise ValueError("mu must be positive")
    return rng.poisson(mu, size)


# -- protocol tables ----------------------------------------------------------

def _encoding_settings():
    """Preparation settings and analysis matrices for the 16 protocol states.

    Returns (tau, phi, norm, units): tau/phi of shape (16, 4) indexed by
    ``ij = 4*i + j``, the per-state normalization sqrt(sum tau^2), and the
    two analysis unitaries stacked as (2, 4, 4).
    """
    pair = hadamard_mub_pair_d4()
    enc = optimal_states(pair)
    tau = np.empty((16, ARMS))
    phi = np.empty((16, ARMS))
    for i in range(4):
        for j in range(4):
            tau[4 * i + j], phi[4 * i + j] = settings_for_state(enc.states[i, j])
    norm = np.sqrt(np.sum(tau * tau, axis=1))
    units = np.stack([
        measurement_unitary(measurement_phase_for_input(1)),
        measurement_unitary(measurement_phase_for_input(2)),
    ])
    return tau, phi, norm, units


def expected_outcome_probabilities() -> np.ndarray:
    """Noiseless click probabilities, shape (16, 2, 4) indexed by (ij, y-1, b-1)."""
    tau, phi, _, _ = _encoding_settings()
    probs = np.empty((16, 2, ARMS))
    for s in range(16):
        state = prepare_state(tau[s], phi[s])
        for y in (1, 2):
            probs[s, y - 1] = detection_probabilities(state, measurement_phase_for_input(y))
    return probs


def ideal_expected_counts(total: int) -> CountsTable:
    """Expected counts with no source/detector/noise model, scaled to ~total.

    Per-setting totals are rounded to a multiple of 12 so that the exact
    outcome probabilities (all multiples of 1/12 for the protocol states)
    map to integer counts; the estimated ASP is then exactly 3/4.
    """
    if total < 32 * 12:
        raise ValueError("total must be at least 384 for one detection per cell")
    per_setting = 12 * max(1, round(total / (32 * 12)))
    probs = expected_outcome_probabilities()
    table = CountsTable.zeros(ARMS)
    for s in range(16):
        i, j = divmod(s, 4)
        for y in range(2):
            row = np.floor(per_setting * probs[s, y] + 0.5).astype(np.int64)
            row[np.argmax(row)] += per_setting - row.sum()  # guard exact total
            table.cells[i, j, y] = row
    return table


# -- noise processes ----------------------------------------------------------

def _draw_noise(model: str, sigma: float, n: int, rng: np.random.Generator,
                walk_start: np.ndarray):
    """Per-pulse noise phases of shape (n, 4) and the walk end point."""
    if model == "none" or sigma == 0.0:
        return None, walk_start
    steps = rng.normal(0.0, sigma, size=(n, ARMS))
    if model == "gaussian_drift":
        return steps, walk_start
    walk = walk_start + np.cumsum(steps, axis=0)
    return walk, walk[-1].copy()


# -- the experiment loop ------------------------------------------------------

def _block_counts(config: InterferometerConfig, tables, block_index: int,
                  n_rounds: int, seed: int, walk_start: np.ndarray):
    """Simulate one block of rounds on its own substream.

    Returns (cells, walk_end).  Output depends only on the arguments, so
    blocks merge identically in any processing order.
    """
    tau16, phi16, norm16, units = tables
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(block_index,)))
    cells = np.zeros((4, 4, 2, 4), dtype=np.int64)

    # Fixed draw order: settings, photon numbers, detector thinning, noise,
    # dark counts, then outcome uniforms.
    settings = rng.integers(0, 32, n_rounds)
    n_photons = rng.poisson(config.mu, n_rounds)
    n_detected = rng.binomial(n_photons, config.det_efficiency)
    noise, walk_end = _draw_noise(config.phase_noise.model, config.phase_noise.sigma,
                                  n_rounds, rng, walk_start)
    dark = None
    if config.dark_count_prob > 0.0:
        dark = rng.random((n_rounds, ARMS)) < config.dark_count_prob

    ij_all = settings >> 1
    y_all = settings & 1

    sel = n_detected > 0
    if sel.any():
        ij = ij_all[sel]
        y = y_all[sel]
        phases = phi16[ij]
        if noise is not None:
            phases = phases + noise[sel]
        comps = tau16[ij] * np.exp(1j * phases) / norm16[ij, None]
        probs = np.empty((comps.shape[0], ARMS))
        for yv in (0, 1):
            mask = y == yv
            if mask.any():
                amps = comps[mask] @ units[yv].T
                probs[mask] = np.abs(amps) ** 2
        cum = np.cumsum(probs, axis=1)
        cum /= cum[:, -1:]

        repeats = n_detected[sel]
        pulse_of_photon = np.repeat(np.arange(comps.shape[0]), repeats)
        u = rng.random(pulse_of_photon.size)
        outcome = (u[:, None] > cum[pulse_of_photon]).sum(axis=1)

        i_exp = (ij >> 2)[pulse_of_photon]
        j_exp = (ij & 3)[pulse_of_photon]
        y_exp = y[pulse_of_photon]
        np.add.at(cells, (i_exp, j_exp, y_exp, outcome), 1)

    if dark is not None:
        for k in range(ARMS):
            hits = dark[:, k]
            if hits.any():
                np.add.at(
                    cells,
                    (ij_all[hits] >> 2, ij_all[hits] & 3, y_all[hits],
                     np.full(int(hits.sum()), k)),
                    1,
                )
    return cells, walk_end


def simulate_counts(config: InterferometerConfig, rounds: int | None = None,
                    seed: int = 0) -> CountsTable:
    """Run the full protocol loop and collect a detection-count table.

    Each round draws an input setting (i, j, y) uniformly, prepares the
    corresponding protocol state (with phase noise added to the applied
    preparation phases), measures in the basis selected by y, and records
    every detected photon.  ``rounds`` defaults to the number of pulses
    in one integration window (rep_rate * integration_time).  The result
    is bit-for-bit reproducible from (config, rounds, seed).
    """
    config.validate()
    if rounds is None:
        rounds = config.default_rounds()
    if rounds <= 0:
        raise ValueError("rounds must be positive")
    tables = _encoding_settings()
    total_cells = np.zeros((4, 4, 2, 4), dtype=np.int64)
    walk = np.zeros(ARMS)
    block = 0
    done = 0
    while done < rounds:
        n_b = min(BLOCK_ROUNDS, rounds - done)
        cells, walk = _block_counts(config, tables, block, n_b, seed, walk)
        total_cells += cells
        done += n_b
        block += 1
    return CountsTable(dim=4, cells=total_cells, seed=seed, config=config.to_dict())


def noise_averaged_asp(config: InterferometerConfig, n_samples: int = 20000,
                       seed: int = 0) -> float:
    """Expected ASP under the configured phase noise (no photon sampling).

    Averages the exact per-setting success probabilities over noise draws;
    with noise off this returns 3/4 up to floating point.
    """
    config.validate()
    tau16, phi16, norm16, units = _encoding_settings()
    ij = np.arange(16)
    target_row = np.empty((16, 2, ARMS), dtype=complex)
    target_row[:, 0] = units[0][ij >> 2]  # y=1: correct outcome is i
    target_row[:, 1] = units[1][ij & 3]   # y=2: correct outcome is j

    rng = np.random.default_rng(seed)
    noise, _ = _draw_noise(config.phase_noise.model, config.phase_noise.sigma,
                           n_samples, rng, np.zeros(ARMS))
    if noise is None:
        noise = np.zeros((1, ARMS))
    comps = (tau16[None, :, :] / norm16[None, :, None]) * np.exp(
        1j * (phi16[None, :, :] + noise[:, None, :])
    )
    success = 0.0
    for y in range(2):
        amps = np.einsum("sa,nsa->ns", target_row[:, y], comps)
        success += float(np.mean(np.abs(amps) ** 2))
    return success / 2.0


def stabilize_phases(config: InterferometerConfig, phase_state: PhaseState,
                     rng: np.random.Generator, threshold: float = 0.999,
                     max_sweeps: int = 64) -> PhaseState:
    """Slow-loop phase compensation against frozen phase noise.

    With all transmissivities at 1 and the state phases at 0, the loop
    perturbs the control phases arm by arm to maximize the click fraction
    at the first detector, until the threshold is reached or the sweep cap
    is hit (StabilizationFailed).  On success the residual preparation
    phases are aligned up to a global phase.
    """
    config.validate()
    phi_n = np.asarray(phase_state.phi_n, dtype=float)
    phi_c = np.asarray(phase_state.phi_c, dtype=float).copy()

    def spd1_prob(control: np.ndarray) -> float:
        state = prepare_state(np.ones(ARMS), phi_n + control)
        return float(detection_probabilities(state, np.zeros(ARMS))[0])

    coarse = np.linspace(0.0, 2.0 * math.pi, 32, endpoint=False)
    for _ in range(max_sweeps):
        if spd1_prob(phi_c) >= threshold:
            break
        for arm in rng.permutation(ARMS):
            base = phi_c[arm]
            candidates = base + coarse
            best = candidates[
                int(np.argmax([_try_arm(spd1_prob, phi_c, arm, c) for c in candidates]))
            ]
            span = coarse[1]
            for _ in range(4):  # shrink the bracket around the best offset
                fine = best + np.linspace(-span, span, 9)
                best = fine[
                    int(np.argmax([_try_arm(spd1_prob, phi_c, arm, c) for c in fine]))
                ]
                span /= 4.0
            phi_c[arm] = best % (2.0 * math.pi)
    if spd1_prob(phi_c) < threshold:
        raise StabilizationFailed(
            f"SPD1 fraction {spd1_prob(phi_c):.6f} below {threshold} "
            f"after {max_sweeps} sweeps"
        )
    return PhaseState(
        phi_n=phi_n.copy(),
        phi_c=phi_c,
        phi_s=np.asarray(phase_state.phi_s, dtype=float).copy(),
        phi_b=np.asarray(phase_state.phi_b, dtype=float).copy(),
    )


def _try_arm(objective, phi_c: np.ndarray, arm: int, value: float) -> float:
    trial = phi_c.copy()
    trial[arm] = value
    return objective(trial)


def fringe_visibility(config: InterferometerConfig, arm_pair: tuple[int, int],
                      seed: int = 0, n_phase_steps: int = 64,
                      samples_per_step: int = 1024) -> float:
    """Two-arm interference visibility at the first detector.

    Scans the relative phase between the two (1-based) arms over a full
    turn with the other arms blocked, averages the detected fringe per
    step under the configured phase noise, and returns the modulation
    depth (max - min)/(max + min) of a cosine least-squares fit.
    """
    config.validate()
    k, l = arm_pair
    if k == l or not (1 <= k <= ARMS and 1 <= l <= ARMS):
        raise ValueError(f"arm_pair must be two distinct arms in 1..4, got {arm_pair}")
    tk, tl = config.tau[k - 1], config.tau[l - 1]
    norm_sq = tk * tk + tl * tl
    if norm_sq == 0.0:
        raise AllArmsBlocked("both scanned arms are blocked")
    base_vis = 2.0 * tk * tl / norm_sq

    thetas = np.linspace(0.0, 2.0 * math.pi, n_phase_steps, endpoint=False)
    model, sigma = config.phase_noise.model, config.phase_noise.sigma
    rng = np.random.default_rng(seed)
    if model == "none" or sigma == 0.0:
        fringe = 0.25 * (1.0 + base_vis * np.cos(thetas))
    else:
        n_total = n_phase_steps * samples_per_step
        noise, _ = _draw_noise(model, sigma, n_total, rng, np.zeros(ARMS))
        delta = (noise[:, k - 1] - noise[:, l - 1]).reshape(
            n_phase_steps, samples_per_step
        )
        fringe = np.mean(
            0.25 * (1.0 + base_vis * np.cos(thetas[:, None] + delta)), axis=1
        )

    design = np.column_stack([np.ones_like(thetas), np.cos(thetas), np.sin(thetas)])
    c0, a, b = np.linalg.lstsq(design, fringe, rcond=None)[0]
    return float(math.hypot(a, b) / c0)


def mean_fringe_visibility(config: InterferometerConfig, seed: int = 0,
                           **kwargs) -> float:
    """Visibility averaged over the six arm pairs."""
    pairs = [(k, l) for k in range(1, ARMS + 1) for l in range(k + 1, ARMS + 1)]
    return float(np.mean([
        fringe_visibility(config, pair, seed=seed + idx, **kwargs)
        for idx, pair in enumerate(pairs)
    ]))


def calibrate_drift_sigma(config: InterferometerConfig, target_visibility: float,
                          seed: int = 0, sigma_lo: float = 1e-4,
                          sigma_hi: float = 1.0, tol: float = 5e-5) -> float:
    """Tune the phase-noise sigma to hit a target mean fringe visibility.

    Bisects on sigma with common random numbers, so the simulated
    visibility is a smooth decreasing function of sigma and the result is
    deterministic for a given seed.
    """
    config.validate()
    if config.phase_noise.model == "none":
        raise ConfigError("calibration requires a phase-noise model")
    if not 0.0 < target_visibility < 1.0:
        raise ConfigError("target visibility must lie in (0, 1)")

    def vis_at(sig: float) -> float:
        probe = replace(config, phase_noise=PhaseNoiseConfig(config.phase_noise.model, sig))
        return mean_fringe_visibility(probe, seed=seed)

    lo, hi = sigma_lo, sigma_hi
    if vis_at(lo) < target_visibility:
        return lo
    if vis_at(hi) > target_visibility:
        raise ConfigError(
            f"target visibility {target_visibility} unreachable below sigma={hi}"
        )
    while hi - lo > 1e-7:
        mid = 0.5 * (lo + hi)
        v = vis_at(mid)
        if abs(v - target_visibility) <= tol:
            return mid
        if v > target_visibility:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
