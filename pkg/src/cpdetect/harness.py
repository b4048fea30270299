"""Monte-Carlo benchmark: detection delay versus false-alarm probability.

Each trial draws a changepoint onset t0 from a geometric distribution,
streams N(mu0, sigma^2) data before the onset and N(mu1, sigma^2) from t0
on, and runs a detector until its decision statistic crosses a threshold.
An alarm at or before t0 is a false alarm; a trial with no alarm by
t0 + horizon goes out of bounds.  Sweeping the threshold maps out the
trade-off curve; delays are aggregated with a trimmed mean so that
out-of-bounds trials (treated as infinite delay) and lucky near-t0 alarms
do not dominate.

Per-trial random streams are spawned deterministically from the scenario
seed, so repeated runs are bit-identical and both detector kinds consume
element-wise identical data.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .gaussian_stats import EstimationMode
from .glr import GlrConfig, GlrState, glr_decision
from .kernel import CppConfig, CppState
from .single_change import SingleCpModel

#: Threshold grids used when the caller does not supply any.  The
#: probability-scale detector alarms on total changepoint mass; the GLR
#: statistic lives on a log-likelihood scale, hence the geometric grid.
CPP_DEFAULT_THRESHOLDS = tuple(np.round(np.arange(0.50, 0.96, 0.05), 2)) + (0.97, 0.99)
GLR_DEFAULT_THRESHOLDS = tuple(np.round(np.geomspace(0.8, 25.0, 18), 3))

DEFAULT_ALPHA = 0.05
DEFAULT_TRIM = 0.05


class DetectorKind(enum.Enum):
    CPP = "cpp"
    GLR = "glr"


class InvalidAggregateError(ValueError):
    """Too many out-of-bounds trials for the trimmed mean to be meaningful."""


@dataclass(frozen=True)
class ScenarioSpec:
    """One benchmark scenario (mean shift in Gaussian noise)."""

    mu0: float = 0.0
    mu1: float = 1.0
    sigma: float = 1.0
    rho: float = 0.02
    horizon_after_t0: int = 100
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.rho < 1.0):
            raise ValueError("rho must be in (0, 1)")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.horizon_after_t0 < 1:
            raise ValueError("horizon_after_t0 must be positive")


@dataclass(frozen=True)
class DetectorParams:
    """Minor parameters of the two detectors."""

    change_prior_f: float = 0.005
    nu_min: float = 0.5
    estimation_mode: EstimationMode = EstimationMode.PLUG_IN
    jacobi_iterations: int = 1


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial at one threshold; t_a None means no alarm."""

    t0: int
    t_a: int | None
    false_alarm: bool
    out_of_bounds: bool

    @property
    def delay(self) -> float:
        """t_a - t0 + 1; inf when the trial went out of bounds."""
        if self.out_of_bounds:
            return math.inf
        return self.t_a - self.t0 + 1


@dataclass(frozen=True)
class SweepRow:
    detector: str
    h: float
    alpha: float
    mean_delay: float
    n_trials: int
    n_oob: int


@dataclass(frozen=True)
class SweepResult:
    detector: DetectorKind
    spec: ScenarioSpec
    rows: tuple[SweepRow, ...]


def sample_t0(rho: float, rng: np.random.Generator) -> int:
    """Geometric onset time, support {1, 2, ...}, mean 1/rho."""
    if not (0.0 < rho < 1.0):
        raise ValueError("rho must be in (0, 1)")
    return int(rng.geometric(rho))


def make_detector(kind: DetectorKind, spec: ScenarioSpec,
                  params: DetectorParams = DetectorParams(), rng=None):
    """Fresh detector with the scenario's known mu0/sigma baked in."""
    if kind is DetectorKind.CPP:
        config = CppConfig(
            model=SingleCpModel(
                mu0=spec.mu0, sigma=spec.sigma, change_prior_f=params.change_prior_f
            ),
            jacobi_iterations=params.jacobi_iterations,
            estimation_mode=params.estimation_mode,
        )
        return CppState(config=config, rng=rng)
    return GlrState()


def _decision(kind: DetectorKind, detector, spec: ScenarioSpec,
              params: DetectorParams) -> float:
    if kind is DetectorKind.CPP:
        return detector.decision_g()
    cfg = GlrConfig(mu0=spec.mu0, sigma=spec.sigma, nu_min=params.nu_min,
                    threshold_h=1.0)
    return glr_decision(detector, cfg)


def _trial_streams(spec: ScenarioSpec, trial_index: int):
    """Deterministic (data_rng, detector_rng) pair for one trial."""
    child = np.random.SeedSequence(spec.seed, spawn_key=(trial_index,))
    data_ss, det_ss = child.spawn(2)
    return np.random.default_rng(data_ss), np.random.default_rng(det_ss)


def generate_trial_data(spec: ScenarioSpec, rng: np.random.Generator):
    """(t0, observations 1..t0+horizon); the shift applies from t0 onward."""
    t0 = sample_t0(spec.rho, rng)
    total = t0 + spec.horizon_after_t0
    xs = rng.standard_normal(total) * spec.sigma + spec.mu0
    xs[t0 - 1 :] += spec.mu1 - spec.mu0
    return t0, xs


def run_trial(
    spec: ScenarioSpec,
    detector,
    threshold_h: float,
    rng: np.random.Generator,
    kind: DetectorKind = DetectorKind.CPP,
    params: DetectorParams = DetectorParams(),
) -> TrialRecord:
    """Feed one trial's stream into a fresh detector until alarm or cutoff."""
    t0, xs = generate_trial_data(spec, rng)
    for k, x in enumerate(xs, start=1):
        try:
            detector.observe(x)
            g = _decision(kind, detector, spec, params)
        except Exception as exc:
            raise RuntimeError(f"detector failed at step {k} of trial (t0={t0})") from exc
        if g >= threshold_h:
            return TrialRecord(t0=t0, t_a=k, false_alarm=k <= t0, out_of_bounds=False)
    return TrialRecord(t0=t0, t_a=None, false_alarm=False, out_of_bounds=True)


def _trial_alarm_times(spec, kind, params, thresholds, trial_index):
    """First crossing time per threshold, from one pass over the stream."""
    data_rng, det_rng = _trial_streams(spec, trial_index)
    t0, xs = generate_trial_data(spec, data_rng)
    detector = make_detector(kind, spec, params, rng=det_rng)
    order = np.argsort(thresholds)
    sorted_h = np.asarray(thresholds, dtype=float)[order]
    t_a = [None] * len(thresholds)
    pending = 0  # thresholds below this index have already alarmed
    for k, x in enumerate(xs, start=1):
        try:
            detector.observe(x)
            g = _decision(kind, detector, spec, params)
        except Exception as exc:
            raise RuntimeError(
                f"detector failed at step {k} of trial {trial_index} (t0={t0})"
            ) from exc
        while pending < len(sorted_h) and g >= sorted_h[pending]:
            t_a[order[pending]] = k
            pending += 1
        if pending == len(sorted_h):
            break
    return t0, t_a


def trimmed_mean_delay(records, trim_fraction: float = DEFAULT_TRIM) -> float:
    """Trimmed mean of delays over the non-false-alarm records.

    Out-of-bounds records sort as the largest delays; there must be few
    enough of them that the trim removes them all.
    """
    survivors = [r for r in records if not r.false_alarm]
    if len(survivors) < 20:
        raise InvalidAggregateError(
            f"only {len(survivors)} surviving trials; need at least 20"
        )
    n_oob = sum(r.out_of_bounds for r in survivors)
    n_trim = int(trim_fraction * len(survivors))
    if n_oob > n_trim:
        raise InvalidAggregateError(
            f"{n_oob} out-of-bounds trials exceed the trim budget of {n_trim}"
        )
    delays = np.sort(np.array([r.delay for r in survivors]))
    kept = delays[n_trim : len(delays) - n_trim] if n_trim else delays
    return float(kept.mean())


def _worker(args):
    spec, kind, params, thresholds, idx = args
    return idx, _trial_alarm_times(spec, kind, params, thresholds, idx)


def threshold_sweep(
    spec: ScenarioSpec,
    detector_kind: DetectorKind,
    thresholds=None,
    n_trials: int = 1000,
    params: DetectorParams = DetectorParams(),
    trim_fraction: float = DEFAULT_TRIM,
    jobs: int = 1,
) -> SweepResult:
    """One sweep row per threshold, all thresholds sharing the same trials.

    A trial's data stream depends only on (spec.seed, trial index), so
    sweeps for different detector kinds are data-matched.  Rows whose
    out-of-bounds count exceeds the trim budget, or with fewer than 20
    surviving trials, get a NaN mean delay.
    """
    if thresholds is None:
        thresholds = (
            CPP_DEFAULT_THRESHOLDS if detector_kind is DetectorKind.CPP
            else GLR_DEFAULT_THRESHOLDS
        )
    thresholds = [float(h) for h in thresholds]
    if not thresholds:
        raise ValueError("thresholds must be non-empty")

    tasks = [(spec, detector_kind, params, thresholds, i) for i in range(n_trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = sorted(pool.map(_worker, tasks, chunksize=8))
        outcomes = [r for _, r in results]
    else:
        outcomes = [
            _trial_alarm_times(spec, detector_kind, params, thresholds, i)
            for i in range(n_trials)
        ]

    rows = []
    for hi, h in enumerate(thresholds):
        records = [
            TrialRecord(
                t0=t0,
                t_a=t_a[hi],
                false_alarm=t_a[hi] is not None and t_a[hi] <= t0,
                out_of_bounds=t_a[hi] is None,
            )
            for t0, t_a in outcomes
        ]
        alpha = sum(r.false_alarm for r in records) / n_trials
        try:
            delay = trimmed_mean_delay(records, trim_fraction)
        except InvalidAggregateError:
            delay = math.nan
        rows.append(
            SweepRow(
                detector=detector_kind.value,
                h=h,
                alpha=alpha,
                mean_delay=delay,
                n_trials=n_trials,
                n_oob=sum(r.out_of_bounds for r in records),
            )
        )
    return SweepResult(detector=detector_kind, spec=spec, rows=tuple(rows))


def interpolate_at_alpha(sweep: SweepResult, alpha: float = DEFAULT_ALPHA) -> float:
    """Mean delay at a target false-alarm probability, linearly interpolated."""
    pts = sorted(
        (row.alpha, row.mean_delay) for row in sweep.rows if math.isfinite(row.mean_delay)
    )
    if not pts:
        raise ValueError("sweep has no rows with a defined mean delay")
    alphas = [a for a, _ in pts]
    if not (alphas[0] <= alpha <= alphas[-1]):
        raise ValueError(
            f"alpha={alpha} outside the sweep's range [{alphas[0]}, {alphas[-1]}]"
        )
    return float(np.interp(alpha, alphas, [d for _, d in pts]))


def sigma_sweep(
    base_spec: ScenarioSpec,
    sigmas,
    n_trials: int = 500,
    alpha: float = DEFAULT_ALPHA,
    params: DetectorParams = DetectorParams(),
    jobs: int = 1,
):
    """Delay of both detectors at a fixed alpha, across noise levels.

    Returns a list of (sigma, cpp_delay, glr_delay) tuples.
    """
    out = []
    for sigma in sigmas:
        spec = replace(base_spec, sigma=float(sigma))
        cpp = threshold_sweep(spec, DetectorKind.CPP, n_trials=n_trials,
                              params=params, jobs=jobs)
        glr = threshold_sweep(spec, DetectorKind.GLR, n_trials=n_trials,
                              params=params, jobs=jobs)
        out.append(
            (float(sigma), interpolate_at_alpha(cpp, alpha), interpolate_at_alpha(glr, alpha))
        )
    return out
