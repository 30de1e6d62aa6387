"""Seeded Monte Carlo simulator of the two node models.

Standard mode: every frame arrives by one superposed Poisson process,
queues FIFO, and is served for gamma + backoff + payload/bit_rate with
fresh independent draws per frame. Aggregated mode: frames accumulate in
a size-k buffer; the k-th arrival forms a batch whose single service uses
one backoff draw and the true payload sum. A frame's sojourn runs from
its own arrival to its batch's service completion.

Unlike the analytic chain, batches here inherit the true Erlang-k
inter-formation times from the Poisson stream rather than the Poisson
lambda/k approximation, which is exactly what makes this module an
independent oracle. ``validate_against_model`` quantifies the gap.

Three named PRNG substreams (arrivals, payloads, backoffs) are derived
from the one seed, so changing one distribution never perturbs the
others' draws. Identical (config, seed) gives bit-identical results; a
run is sequential, and independent runs share no state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .model import PayloadFamily, PKForm, TrafficSpec, evaluate
from .phy import PhyProfile, overhead_gamma


class SimMode(Enum):
    STANDARD = "standard"
    AGGREGATED = "aggregated"


_STREAM_INDEX = {"arrivals": 0, "payloads": 1, "backoffs": 2}


def _substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named randomness source."""
    key = _STREAM_INDEX[name]
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


@dataclass(frozen=True)
class SimConfig:
    """One reproducible run of the standard or aggregated node model.

    ``sources`` lists per-source Poisson rates; they superpose into one
    stream of rate sum(sources), which must equal the traffic spec's
    ``lambda_total``. When omitted, a single source at that rate is used.
    ``k`` is only meaningful in aggregated mode (and must then be >= 2).
    """

    mode: SimMode
    phy: PhyProfile
    traffic: TrafficSpec
    seed: int
    num_frames: int
    warmup_frames: int = 0
    k: int = 1
    sources: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.mode, SimMode):
            raise ValueError(f"mode must be a SimMode, got {self.mode!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValueError("seed must be an integer")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not isinstance(self.num_frames, int) or not isinstance(
            self.warmup_frames, int
        ):
            raise ValueError("num_frames and warmup_frames must be integers")
        if not self.num_frames > self.warmup_frames >= 0:
            raise ValueError("need num_frames > warmup_frames >= 0")
        if self.mode is SimMode.AGGREGATED:
            if not isinstance(self.k, int) or self.k < 2:
                raise ValueError("aggregated mode needs an integer k >= 2")
        elif self.k != 1:
            raise ValueError("standard mode uses k = 1")
        rates = self.source_rates
        if not rates or any(r <= 0.0 for r in rates):
            raise ValueError("every source rate must be positive")
        total = sum(rates)
        if not math.isclose(total, self.traffic.lambda_total, rel_tol=1e-9):
            raise ValueError(
                f"sum of source rates {total:g} must equal the traffic "
                f"lambda_total {self.traffic.lambda_total:g}"
            )

    @property
    def source_rates(self) -> tuple[float, ...]:
        if self.sources is None:
            return (self.traffic.lambda_total,)
        return self.sources

    @property
    def arrival_rate(self) -> float:
        return self.traffic.lambda_total


@dataclass(frozen=True)
class SimResult:
    """Measured sojourn statistics of one run.

    The sojourn decomposes per frame as buffer wait (aggregation stage,
    zero in standard mode) + queue wait + service time, so the breakdown
    means sum to ``sojourn_mean`` up to float accumulation. Standard
    deviations are sample (ddof=1) values; they and the derived
    ``ci95_halfwidth = 1.96*stddev/sqrt(frames_measured)`` are NaN when
    fewer than two frames were measured.

    Frame accounting: ``frames_generated = frames_measured +
    warmup_excluded + in_flight`` where in-flight frames never completed
    service by the horizon (e.g. a final partial batch).
    """

    frames_generated: int
    frames_measured: int
    warmup_excluded: int
    in_flight: int
    sojourn_mean: float
    sojourn_stddev: float
    ci95_halfwidth: float
    buffer_wait_mean: float
    buffer_wait_ci95: float
    queue_wait_mean: float
    service_mean: float

    def to_dict(self) -> dict:
        """JSON-ready mapping; undefined (NaN) statistics become null."""

        def f(x: float):
            return None if math.isnan(x) else x

        return {
            "frames_generated": self.frames_generated,
            "frames_measured": self.frames_measured,
            "warmup_excluded": self.warmup_excluded,
            "in_flight": self.in_flight,
            "sojourn_mean_s": f(self.sojourn_mean),
            "sojourn_stddev_s": f(self.sojourn_stddev),
            "ci95_halfwidth_s": f(self.ci95_halfwidth),
            "buffer_wait_mean_s": f(self.buffer_wait_mean),
            "buffer_wait_ci95_s": f(self.buffer_wait_ci95),
            "queue_wait_mean_s": f(self.queue_wait_mean),
            "service_mean_s": f(self.service_mean),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(", ", ": "))


def _sample_payloads(
    rng: np.random.Generator, traffic: TrafficSpec, n: int
) -> np.ndarray:
    """n payload sizes in continuous bits, per the traffic family."""
    fam = traffic.payload_family
    if fam is PayloadFamily.DETERMINISTIC:
        return np.full(n, traffic.payload_mean)
    if fam is PayloadFamily.EXPONENTIAL:
        # inverse-CDF sampling keeps the draw count at exactly n
        return traffic.payload_mean * rng.standard_exponential(n, method="inv")
    if fam is PayloadFamily.UNIFORM_RANGE:
        return rng.uniform(traffic.uniform_lo, traffic.uniform_hi, n)
    values = np.asarray(traffic.empirical_values, dtype=float)
    return rng.choice(values, size=n, replace=True)


def _sample_backoffs(
    rng: np.random.Generator, phy: PhyProfile, n: int
) -> np.ndarray:
    """n backoff times: slot * U{0,...,cw}, or the literal override."""
    if phy.backoff_override is not None:
        return np.full(n, phy.backoff_override)
    return phy.slot * rng.integers(0, phy.cw + 1, size=n).astype(float)


def _fifo_completions(ready: np.ndarray, service: np.ndarray) -> np.ndarray:
    """Completion times of a FIFO single server fed jobs in index order.

    Closed form of the Lindley recursion C_i = max(ready_i, C_{i-1}) + s_i:
    with S the service prefix sums, C_i = S_i + max_{j<=i}(ready_j - S_{j-1}).
    """
    s_cum = np.cumsum(service)
    s_prev = np.concatenate(([0.0], s_cum[:-1]))
    return s_cum + np.maximum.accumulate(ready - s_prev)


def _mean_std_ci(x: np.ndarray) -> tuple[float, float, float]:
    n = x.size
    if n == 0:
        return math.nan, math.nan, math.nan
    mean = float(np.mean(x))
    if n < 2:
        return mean, math.nan, math.nan
    std = float(np.std(x, ddof=1))
    return mean, std, 1.96 * std / math.sqrt(n)


def simulate(config: SimConfig) -> SimResult:
    """Run one seeded FIFO single-server simulation.

    Frames are generated up to ``num_frames`` arrivals; statistics cover
    completed frames whose arrival index is at least ``warmup_frames``.
    In aggregated mode a trailing partial batch never completes and is
    reported as in-flight.
    """
    lam = config.arrival_rate
    n = config.num_frames
    rng_arrivals = _substream(config.seed, "arrivals")
    rng_payloads = _substream(config.seed, "payloads")
    rng_backoffs = _substream(config.seed, "backoffs")

    arrivals = np.cumsum(rng_arrivals.exponential(1.0 / lam, size=n))
    payloads = _sample_payloads(rng_payloads, config.traffic, n)
    gamma = overhead_gamma(config.phy).gamma_total
    bit_rate = config.phy.bit_rate

    if config.mode is SimMode.STANDARD:
        completed = n
        backoffs = _sample_backoffs(rng_backoffs, config.phy, n)
        service = gamma + backoffs + payloads / bit_rate
        ready = arrivals
        buffer_wait = np.zeros(n)
        frame_queue_wait = None  # filled below from the batch-level result
        batch_of_frame = None
    else:
        k = config.k
        n_batches = n // k
        completed = n_batches * k
        backoffs = _sample_backoffs(rng_backoffs, config.phy, n_batches)
        ready = arrivals[k - 1 : completed : k]  # k-th arrival forms the batch
        batch_payloads = payloads[:completed].reshape(n_batches, k).sum(axis=1)
        service = gamma + backoffs + batch_payloads / bit_rate
        buffer_wait = np.repeat(ready, k) - arrivals[:completed]

    if completed == 0:
        nan = math.nan
        return SimResult(
            frames_generated=n,
            frames_measured=0,
            warmup_excluded=0,
            in_flight=n,
            sojourn_mean=nan,
            sojourn_stddev=nan,
            ci95_halfwidth=nan,
            buffer_wait_mean=nan,
            buffer_wait_ci95=nan,
            queue_wait_mean=nan,
            service_mean=nan,
        )

    completion = _fifo_completions(ready, service)
    queue_wait = np.maximum(completion - service - ready, 0.0)

    if config.mode is SimMode.STANDARD:
        frame_completion = completion
        frame_queue_wait = queue_wait
        frame_service = service
    else:
        frame_completion = np.repeat(completion, config.k)
        frame_queue_wait = np.repeat(queue_wait, config.k)
        frame_service = np.repeat(service, config.k)

    sojourn = frame_completion - arrivals[:completed]

    warmup_excluded = min(config.warmup_frames, completed)
    lo = warmup_excluded
    sojourn_mean, sojourn_std, sojourn_ci = _mean_std_ci(sojourn[lo:])
    buffer_mean, _, buffer_ci = _mean_std_ci(buffer_wait[lo:])
    queue_mean = float(np.mean(frame_queue_wait[lo:])) if completed > lo else math.nan
    service_mean = float(np.mean(frame_service[lo:])) if completed > lo else math.nan

    return SimResult(
        frames_generated=n,
        frames_measured=completed - warmup_excluded,
        warmup_excluded=warmup_excluded,
        in_flight=n - completed,
        sojourn_mean=sojourn_mean,
        sojourn_stddev=sojourn_std,
        ci95_halfwidth=sojourn_ci,
        buffer_wait_mean=buffer_mean,
        buffer_wait_ci95=buffer_ci,
        queue_wait_mean=queue_mean,
        service_mean=service_mean,
    )


@dataclass(frozen=True)
class ValidationReport:
    """Side-by-side of one simulation run and the analytic chain.

    ``interbatch_cv`` is the measured coefficient of variation of the
    inter-batch formation times: the true value is 1/sqrt(k) (Erlang-k)
    while the analytic queue-wait term assumes 1 (Poisson), so the
    distance from 1 is the size of that approximation. When the analytic
    queue is unstable no comparison is attempted: ``sim`` is None and the
    deviation fields are NaN.
    """

    mode: SimMode
    k: int
    lam: float
    form: PKForm
    analytic_stable: bool
    analytic_system_time: float
    sim: SimResult | None
    abs_deviation: float
    rel_deviation: float
    within_ci95: bool | None
    interbatch_cv: float

    def to_dict(self) -> dict:
        def f(x: float):
            return None if math.isnan(x) else ("inf" if math.isinf(x) else x)

        return {
            "mode": self.mode.value,
            "k": self.k,
            "lambda_pps": self.lam,
            "form": self.form.value,
            "analytic_stable": self.analytic_stable,
            "analytic_system_time_s": f(self.analytic_system_time),
            "sim": None if self.sim is None else self.sim.to_dict(),
            "abs_deviation_s": f(self.abs_deviation),
            "rel_deviation": f(self.rel_deviation),
            "within_ci95": self.within_ci95,
            "interbatch_cv": f(self.interbatch_cv),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(", ", ": "))


def validate_against_model(
    config: SimConfig, form: PKForm = PKForm.DETERMINISTIC_SERVICE
) -> ValidationReport:
    """Run the simulator and compare its sojourn mean to the analytic F(k)."""
    k_eff = config.k if config.mode is SimMode.AGGREGATED else 1
    lam = config.arrival_rate
    metrics = evaluate(k_eff, lam, config.phy, config.traffic, form)
    if not metrics.stable:
        return ValidationReport(
            mode=config.mode,
            k=k_eff,
            lam=lam,
            form=form,
            analytic_stable=False,
            analytic_system_time=metrics.system_time,
            sim=None,
            abs_deviation=math.nan,
            rel_deviation=math.nan,
            within_ci95=None,
            interbatch_cv=math.nan,
        )

    result = simulate(config)
    abs_dev = abs(result.sojourn_mean - metrics.system_time)
    rel_dev = abs_dev / metrics.system_time
    within = (
        None
        if math.isnan(result.ci95_halfwidth)
        else bool(abs_dev <= result.ci95_halfwidth)
    )

    # Reproduce the arrival substream to measure the inter-batch CV.
    rng_arrivals = _substream(config.seed, "arrivals")
    arrivals = np.cumsum(rng_arrivals.exponential(1.0 / lam, size=config.num_frames))
    if config.mode is SimMode.AGGREGATED:
        marks = arrivals[config.k - 1 :: config.k]
    else:
        marks = arrivals
    intervals = np.diff(marks)
    cv = (
        float(np.std(intervals, ddof=1) / np.mean(intervals))
        if intervals.size >= 2
        else math.nan
    )

    return ValidationReport(
        mode=config.mode,
        k=k_eff,
        lam=lam,
        form=form,
        analytic_stable=True,
        analytic_system_time=metrics.system_time,
        sim=result,
        abs_deviation=abs_dev,
        rel_deviation=rel_dev,
        within_ci95=within,
        interbatch_cv=cv,
    )


def replications(config: SimConfig, seeds) -> list[tuple[int, SimResult]]:
    """Run the same configuration under each seed, one result per seed."""
    return [(int(s), simulate(replace(config, seed=int(s)))) for s in seeds]
