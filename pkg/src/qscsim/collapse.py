"""Stochastic collapse events for superposed inputs.

Three interchangeable collapse-time laws sit behind one interface:

* ``JUMP_EXPONENTIAL``: the collapse instant is exponentially distributed
  with the configured mean; the outcome is drawn directly from the Born
  weights.  Minimal model of a finite, stochastic collapse time.
* ``DIFFUSION``: the branch-1 weight performs a driftless diffusion
  ``dw = gamma * w * (1 - w) * dW`` until it enters an absorbing band of
  half-width ``epsilon`` at either end.  The martingale form makes the
  absorption probabilities reproduce the Born weights (up to the small band
  correction), and the collapse time is the first-passage time.
* ``DETERMINISTIC_TIME``: collapse at exactly the mean time; zero-variance
  reference mode for exact tests.

All randomness flows through an explicit ``numpy.random.Generator`` so that
trial streams can be split reproducibly by the experiment harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CalibrationError, CollapseTimeoutError, ModelMisuseError
from .states import Branch, InputKind, InputState, born_probability

DEFAULT_EPSILON = 1e-3
#: Default integration step as a fraction of the mean collapse time.
DEFAULT_DT_FRACTION = 1e-4
DEFAULT_KAPPA = 1.0
#: Diffusion non-termination guard; exceeding it raises instead of truncating.
MAX_STEPS = 10**6

_NORMAL_BLOCK = 1024


class CollapseModel(Enum):
    JUMP_EXPONENTIAL = "jump_exponential"
    DIFFUSION = "diffusion"
    DETERMINISTIC_TIME = "deterministic_time"


@dataclass(frozen=True)
class CollapseParams:
    """Collapse-law selector plus its numeric knobs.

    ``t_c_mean`` is the mean collapse time in seconds.  ``gamma`` (diffusion
    strength, 1/sqrt(s)), ``epsilon`` (absorbing half-band) and ``dt``
    (integration step) only drive the DIFFUSION model; ``dt`` defaults to
    ``t_c_mean * 1e-4`` and must stay at or below ``t_c_mean / 100``.

    An optional perception ``energy`` ties the mean collapse time to the
    inverse-energy relation ``t_c_mean = kappa / energy``; construction
    rejects inconsistent pairs.
    """

    model: CollapseModel
    t_c_mean: float
    gamma: float | None = None
    epsilon: float = DEFAULT_EPSILON
    dt: float | None = None
    energy: float | None = None
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self) -> None:
        if self.t_c_mean <= 0.0:
            raise ValueError(f"t_c_mean must be > 0, got {self.t_c_mean!r}")
        if self.dt is None:
            object.__setattr__(self, "dt", self.t_c_mean * DEFAULT_DT_FRACTION)
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must be in (0, 0.5), got {self.epsilon!r}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if self.dt > self.t_c_mean / 100.0:
            raise ValueError(
                f"dt must be <= t_c_mean / 100 = {self.t_c_mean / 100.0!r}, got {self.dt!r}"
            )
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be > 0, got {self.kappa!r}")
        if self.model is CollapseModel.DIFFUSION:
            if self.gamma is None or self.gamma <= 0.0:
                raise ValueError("diffusion model requires gamma > 0")
        if self.energy is not None:
            if self.energy <= 0.0:
                raise ValueError(f"energy must be > 0, got {self.energy!r}")
            implied = self.kappa / self.energy
            if abs(self.t_c_mean - implied) > 1e-9 * self.t_c_mean:
                raise ValueError(
                    f"t_c_mean {self.t_c_mean!r} inconsistent with kappa/energy = {implied!r}"
                )


def t_c_from_energy(energy: float, kappa: float = DEFAULT_KAPPA) -> float:
    """Mean collapse time implied by a perception energy (inverse relation)."""
    if energy <= 0.0:
        raise ValueError(f"energy must be > 0, got {energy!r}")
    return kappa / energy


@dataclass(frozen=True)
class CollapseEvent:
    """One collapse: instant, outcome branch, and (optionally) the weight path.

    The trajectory, when recorded, is a tuple of ``(time, branch-1 weight)``
    samples starting at the input weight and ending inside the absorbing band
    matching ``outcome``.
    """

    time: float
    outcome: Branch
    trajectory: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.time < 0.0:
            raise ValueError(f"collapse time must be >= 0, got {self.time!r}")
        if self.trajectory is not None:
            for _, w in self.trajectory:
                if not 0.0 <= w <= 1.0:
                    raise ValueError(f"trajectory weight {w!r} outside [0, 1]")


def sample_collapse_time(params: CollapseParams, rng: np.random.Generator) -> float:
    """Draw one collapse time from the configured law.

    Only the JUMP_EXPONENTIAL and DETERMINISTIC_TIME models have a closed
    sampling law; diffusion times arise from first passage and must come from
    :func:`simulate_diffusion_collapse`.
    """
    if params.model is CollapseModel.DIFFUSION:
        raise ModelMisuseError("diffusion collapse times come from first passage, not direct sampling")
    if params.model is CollapseModel.DETERMINISTIC_TIME:
        return params.t_c_mean
    return float(rng.exponential(params.t_c_mean))


def sample_collapse_times(params: CollapseParams, rng: np.random.Generator, n: int) -> np.ndarray:
    """Vectorized :func:`sample_collapse_time`; returns ``n`` draws."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if params.model is CollapseModel.DIFFUSION:
        raise ModelMisuseError("diffusion collapse times come from first passage, not direct sampling")
    if params.model is CollapseModel.DETERMINISTIC_TIME:
        return np.full(n, params.t_c_mean)
    return rng.exponential(params.t_c_mean, n)


def sample_outcome(p1: float, rng: np.random.Generator) -> Branch:
    """Draw the collapse outcome: B1 with probability ``p1``."""
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1 must be in [0, 1], got {p1!r}")
    return Branch.B1 if rng.random() < p1 else Branch.B2


def simulate_diffusion_collapse(
    p1: float,
    params: CollapseParams,
    rng: np.random.Generator,
    record_trajectory: bool = False,
) -> CollapseEvent:
    """Evolve the branch-1 weight by Euler-Maruyama until absorption.

    The update ``w += gamma * w * (1 - w) * sqrt(dt) * N(0, 1)`` (clamped to
    [0, 1]) is a martingale, so the probability of absorbing at the upper
    band is the Born weight ``p1`` up to the band correction.  Collapse is
    declared at the first step with ``w <= epsilon`` or ``w >= 1 - epsilon``;
    outcome is B1 at the upper band.

    Raises:
        ModelMisuseError: non-diffusion params, or ``p1`` in {0, 1} (nothing
            superposed to collapse).
        CollapseTimeoutError: no absorption within ``MAX_STEPS`` steps.
    """
    if params.model is not CollapseModel.DIFFUSION:
        raise ModelMisuseError(f"simulate_diffusion_collapse requires the diffusion model, got {params.model.value}")
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1 must be in [0, 1], got {p1!r}")
    if p1 == 0.0 or p1 == 1.0:
        raise ModelMisuseError("p1 in {0, 1} leaves no superposition to collapse")

    gamma = params.gamma
    dt = params.dt
    eps = params.epsilon
    sqrt_dt = math.sqrt(dt)
    w = p1
    t = 0.0
    path = [(0.0, w)] if record_trajectory else None

    # Normals are drawn in fixed-size blocks; unused tail draws are discarded,
    # which keeps the stream consumption deterministic for a given seed.
    steps = 0
    while True:
        block = rng.standard_normal(_NORMAL_BLOCK)
        for z in block:
            steps += 1
            w += gamma * w * (1.0 - w) * sqrt_dt * z
            w = 0.0 if w < 0.0 else (1.0 if w > 1.0 else w)
            t += dt
            if record_trajectory:
                path.append((t, w))
            if w <= eps or w >= 1.0 - eps:
                outcome = Branch.B1 if w >= 1.0 - eps else Branch.B2
                trajectory = tuple(path) if record_trajectory else None
                return CollapseEvent(time=t, outcome=outcome, trajectory=trajectory)
            if steps >= MAX_STEPS:
                raise CollapseTimeoutError(
                    f"no absorption after {MAX_STEPS} steps (w={w!r}); "
                    f"raise gamma or dt, or lower t_c_mean",
                    steps=steps,
                    p1=p1,
                    gamma=gamma,
                    dt=dt,
                    epsilon=eps,
                )


def simulate_diffusion_ensemble(
    p1: float,
    params: CollapseParams,
    rng: np.random.Generator,
    n: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Run ``n`` independent first-passage walkers in lockstep.

    Returns ``(times, hit_upper)`` where ``hit_upper[i]`` is True when walker
    ``i`` absorbed at the branch-1 band.  Statistically equivalent to ``n``
    calls of :func:`simulate_diffusion_collapse` but vectorized; the two paths
    do not share a draw sequence.
    """
    if params.model is not CollapseModel.DIFFUSION:
        raise ModelMisuseError(f"simulate_diffusion_ensemble requires the diffusion model, got {params.model.value}")
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1 must be in [0, 1], got {p1!r}")
    if p1 == 0.0 or p1 == 1.0:
        raise ModelMisuseError("p1 in {0, 1} leaves no superposition to collapse")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")

    gamma = params.gamma
    dt = params.dt
    eps = params.epsilon
    sqrt_dt = math.sqrt(dt)

    w = np.full(n, p1)
    t = np.zeros(n)
    idx = np.arange(n)
    times = np.empty(n)
    hit_upper = np.empty(n, dtype=bool)

    steps = 0
    while idx.size:
        steps += 1
        if steps > MAX_STEPS:
            raise CollapseTimeoutError(
                f"{idx.size} of {n} walkers unabsorbed after {MAX_STEPS} steps; "
                f"raise gamma or dt, or lower t_c_mean",
                steps=steps,
                p1=p1,
                gamma=gamma,
                dt=dt,
                epsilon=eps,
            )
        w += gamma * w * (1.0 - w) * sqrt_dt * rng.standard_normal(w.size)
        np.clip(w, 0.0, 1.0, out=w)
        t += dt
        done = (w <= eps) | (w >= 1.0 - eps)
        if done.any():
            times[idx[done]] = t[done]
            hit_upper[idx[done]] = w[done] >= 1.0 - eps
            keep = ~done
            w = w[keep]
            t = t[keep]
            idx = idx[keep]
    return times, hit_upper


def calibrate_gamma(
    t_c_target: float,
    p1: float,
    epsilon: float,
    tolerance: float,
    rng: np.random.Generator,
    *,
    n_runs: int = 8192,
    dt: float | None = None,
    max_evals: int = 60,
) -> float:
    """Find the diffusion strength whose mean first-passage time is ``t_c_target``.

    Bisection on ``gamma`` (in log space), exploiting that the mean hitting
    time is strictly decreasing in ``gamma``.  Every evaluation reruns the
    ensemble with the same derived seed (common random numbers), so the
    result is deterministic for a given ``rng`` state.  ``dt`` defaults to
    ``t_c_target * 1e-4``, matching the default step rule of
    :class:`CollapseParams` so the calibrated value transfers directly.

    Budget rule: the Monte Carlo error of one evaluation, estimated from a
    pilot run, must satisfy ``3 * cv / sqrt(n_runs) <= tolerance``; tighter
    tolerances need a larger ``n_runs`` and fail fast otherwise.

    Raises:
        CalibrationError: no sign change inside gamma in [1e-6, 1e6], run
            budget too small for ``tolerance``, or ``max_evals`` exhausted.
    """
    if t_c_target <= 0.0:
        raise ValueError(f"t_c_target must be > 0, got {t_c_target!r}")
    if not 0.0 < p1 < 1.0:
        raise ValueError(f"p1 must be in (0, 1), got {p1!r}")
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must be in (0, 0.5), got {epsilon!r}")
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be > 0, got {tolerance!r}")
    if n_runs < 2:
        raise ValueError(f"n_runs must be >= 2, got {n_runs!r}")
    if dt is None:
        dt = t_c_target * DEFAULT_DT_FRACTION

    def mean_time(gamma: float, seed: int) -> tuple[float, float]:
        params = CollapseParams(
            model=CollapseModel.DIFFUSION, t_c_mean=t_c_target, gamma=gamma, epsilon=epsilon, dt=dt
        )
        times, _ = simulate_diffusion_ensemble(p1, params, np.random.default_rng(seed), n_runs)
        return float(times.mean()), float(times.std(ddof=1))

    # Pilot at a step scale gamma*sqrt(dt) = 0.1: cheap, and the exact scaling
    # mean(gamma) = mean(g0) * (g0/gamma)^2 turns it into a near-final guess.
    pilot_seed = int(rng.integers(2**63))
    eval_seed = int(rng.integers(2**63))
    gamma_pilot = 0.1 / math.sqrt(dt)
    pilot_mean, pilot_sd = mean_time(gamma_pilot, pilot_seed)
    cv = pilot_sd / pilot_mean
    noise_floor = 3.0 * cv / math.sqrt(n_runs)
    if noise_floor > tolerance:
        needed = math.ceil((3.0 * cv / tolerance) ** 2)
        raise CalibrationError(
            f"run budget too small for tolerance {tolerance!r}: "
            f"3*cv/sqrt(n_runs) = {noise_floor:.4f}; need n_runs >= {needed}"
        )
    guess = gamma_pilot * math.sqrt(pilot_mean / t_c_target)
    guess = min(max(guess, 1.5e-6), 1e6 / 1.5)  # keep the initial bracket inside [1e-6, 1e6]

    lo = guess / 1.5
    hi = guess * 1.5
    evals = 0

    def excess(gamma: float) -> float:
        nonlocal evals
        evals += 1
        if evals > max_evals:
            raise CalibrationError(f"calibration did not converge within {max_evals} evaluations")
        mean, _ = mean_time(gamma, eval_seed)
        return mean - t_c_target

    f_lo = excess(lo)  # decreasing objective: f_lo > 0 > f_hi brackets the root
    f_hi = excess(hi)
    while f_lo < 0.0 and lo > 1e-6:
        hi, f_hi = lo, f_lo
        lo = max(lo / 2.0, 1e-6)
        f_lo = excess(lo)
    while f_hi > 0.0 and hi < 1e6:
        lo, f_lo = hi, f_hi
        hi = min(hi * 2.0, 1e6)
        f_hi = excess(hi)
    if f_lo < 0.0 or f_hi > 0.0:
        raise CalibrationError("no bisection bracket for gamma in [1e-6, 1e6]")

    while True:
        mid = math.sqrt(lo * hi)
        f_mid = excess(mid)
        if abs(f_mid) <= tolerance * t_c_target:
            return mid
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-9:
            raise CalibrationError(
                f"bracket collapsed before reaching tolerance {tolerance!r}; "
                f"residual {abs(f_mid) / t_c_target:.4f}"
            )


def collapse_for_input(
    state: InputState, params: CollapseParams, rng: np.random.Generator
) -> CollapseEvent | None:
    """Collapse event for one prepared input, or None for a definite input.

    A definite input involves no superposition, hence no collapse wait.  For
    superposed inputs the jump and deterministic models draw the collapse
    time first and the Born outcome second; the diffusion model gets both
    from one first-passage run.
    """
    if state.kind is InputKind.DEFINITE:
        return None
    p1 = born_probability(state)
    if params.model is CollapseModel.DIFFUSION:
        return simulate_diffusion_collapse(p1, params, rng)
    time = sample_collapse_time(params, rng)
    outcome = sample_outcome(p1, rng)
    return CollapseEvent(time=time, outcome=outcome)
