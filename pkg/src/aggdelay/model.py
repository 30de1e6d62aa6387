"""Analytic delay chain for k-frame aggregation over a single 802.11 link.

Frames arrive in one Poisson stream of rate ``lam`` and are grouped into
batches of ``k``. A frame's mean time through the system is

    F(k) = Er(k) + 1/mu(k) + W(k)

where ``Er(k) = (k-1)/(2*lam)`` is the mean wait for the batch to fill,
``1/mu(k)`` is the mean batch service time (payloads + overhead + mean
backoff), and ``W(k)`` is the M/G/1 mean queue wait at batch rate
``lam/k``. The gain ``G(k) = F(k) - F(1)`` is negative exactly when
aggregating k frames reduces mean delay.

Unstable queues (utilization >= 1) yield ``math.inf`` rather than raising:
sweep grids stay total. ``gain`` returns NaN (``BOTH_UNSTABLE``) when
neither the aggregated nor the unaggregated system is stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .phy import PhyProfile, backoff_moments, overhead_gamma

#: Distinguished value for "this queue does not reach steady state".
UNBOUNDED = math.inf

#: Marker returned by :func:`gain` when both systems are unstable and no
#: finite comparison exists. Test with math.isnan.
BOTH_UNSTABLE = math.nan


class PayloadFamily(Enum):
    DETERMINISTIC = "deterministic"
    EXPONENTIAL = "exponential"
    UNIFORM_RANGE = "uniform-range"
    EMPIRICAL = "empirical"


class PKForm(Enum):
    """Closed form used for the M/G/1 mean queue wait.

    GENERAL_PK uses the full formula with the service variance;
    DETERMINISTIC_SERVICE drops the variance term (the two coincide when
    the service time is constant). DETERMINISTIC_SERVICE is the default
    throughout the package.
    """

    GENERAL_PK = "general-pk"
    DETERMINISTIC_SERVICE = "deterministic-service"


_MOMENT_RTOL = 1e-9


@dataclass(frozen=True)
class TrafficSpec:
    """Aggregate Poisson arrival rate plus the payload-size distribution.

    Payload sizes are continuous-valued bits. ``uniform_lo``/``uniform_hi``
    are required for UNIFORM_RANGE, ``empirical_values`` for EMPIRICAL;
    the stored moments must match the family (use the classmethod
    constructors to get them right automatically).
    """

    lambda_total: float
    payload_mean: float
    payload_variance: float
    payload_family: PayloadFamily
    uniform_lo: float | None = None
    uniform_hi: float | None = None
    empirical_values: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.lambda_total <= 0.0:
            raise ValueError("lambda_total must be positive")
        if self.payload_mean <= 0.0:
            raise ValueError("payload_mean must be positive")
        if self.payload_variance < 0.0:
            raise ValueError("payload_variance must be non-negative")
        fam = self.payload_family
        if fam is PayloadFamily.DETERMINISTIC:
            if self.payload_variance != 0.0:
                raise ValueError("deterministic payloads require zero variance")
        elif fam is PayloadFamily.EXPONENTIAL:
            if not math.isclose(
                self.payload_variance, self.payload_mean**2, rel_tol=_MOMENT_RTOL
            ):
                raise ValueError(
                    "exponential payloads require variance == mean**2"
                )
        elif fam is PayloadFamily.UNIFORM_RANGE:
            lo, hi = self.uniform_lo, self.uniform_hi
            if lo is None or hi is None or not 0.0 <= lo < hi:
                raise ValueError("uniform-range payloads require 0 <= lo < hi")
            if not math.isclose(
                self.payload_mean, (lo + hi) / 2.0, rel_tol=_MOMENT_RTOL
            ) or not math.isclose(
                self.payload_variance, (hi - lo) ** 2 / 12.0, rel_tol=_MOMENT_RTOL
            ):
                raise ValueError("uniform-range moments do not match [lo, hi]")
        elif fam is PayloadFamily.EMPIRICAL:
            values = self.empirical_values
            if not values or any(v <= 0.0 for v in values):
                raise ValueError(
                    "empirical payloads require a non-empty list of positive sizes"
                )
            mean = sum(values) / len(values)
            var = sum((v - mean) ** 2 for v in values) / len(values)
            if not math.isclose(
                self.payload_mean, mean, rel_tol=_MOMENT_RTOL
            ) or not (
                math.isclose(self.payload_variance, var, rel_tol=_MOMENT_RTOL)
                or abs(self.payload_variance - var) < 1e-12 * mean * mean
            ):
                raise ValueError("empirical moments do not match the sample")

    @classmethod
    def deterministic(cls, lambda_total: float, mean_bits: float) -> "TrafficSpec":
        return cls(lambda_total, mean_bits, 0.0, PayloadFamily.DETERMINISTIC)

    @classmethod
    def exponential(cls, lambda_total: float, mean_bits: float) -> "TrafficSpec":
        return cls(lambda_total, mean_bits, mean_bits**2, PayloadFamily.EXPONENTIAL)

    @classmethod
    def uniform_range(
        cls, lambda_total: float, lo_bits: float, hi_bits: float
    ) -> "TrafficSpec":
        mean = (lo_bits + hi_bits) / 2.0
        var = (hi_bits - lo_bits) ** 2 / 12.0
        return cls(
            lambda_total,
            mean,
            var,
            PayloadFamily.UNIFORM_RANGE,
            uniform_lo=lo_bits,
            uniform_hi=hi_bits,
        )

    @classmethod
    def empirical(cls, lambda_total: float, values_bits) -> "TrafficSpec":
        values = tuple(float(v) for v in values_bits)
        if not values:
            raise ValueError("empirical payloads require at least one value")
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        return cls(
            lambda_total, mean, var, PayloadFamily.EMPIRICAL, empirical_values=values
        )


@dataclass(frozen=True)
class QueueMetrics:
    """One evaluation of the analytic chain for a given batch size."""

    k: int
    erlang_wait: float
    service_mean: float
    service_variance: float
    lambda_a: float
    rho: float
    queue_wait: float
    system_time: float
    gain: float
    stable: bool


def _check_k(k: int) -> None:
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k!r}")


def _check_lambda(lam: float) -> None:
    if not lam > 0.0:
        raise ValueError(f"lambda must be positive, got {lam!r}")


def erlang_wait(k: int, lam: float) -> float:
    """Mean buffer wait while a batch of k fills: (k-1)/(2*lam).

    The j-th frame of a batch waits for the remaining k-j Poisson
    arrivals, i.e. (k-j)/lam on average; averaging over j gives the
    closed form. Zero for k=1.
    """
    _check_k(k)
    _check_lambda(lam)
    return (k - 1) / (2.0 * lam)


def service_time(
    k: int,
    phy: PhyProfile,
    traffic: TrafficSpec,
    backoff_mean: float | None = None,
) -> float:
    """Mean service time of a k-frame aggregate:

        1/mu(k) = k*E[P]/bit_rate + gamma + mean backoff

    with payloads in bits. ``backoff_mean`` defaults to the profile's own
    backoff mean; pass a value to probe a different deferral time.
    """
    _check_k(k)
    if backoff_mean is None:
        backoff_mean = backoff_moments(phy)[0]
    payload_time = k * traffic.payload_mean / phy.bit_rate
    return payload_time + overhead_gamma(phy).gamma_total + backoff_mean


def service_variance(k: int, phy: PhyProfile, traffic: TrafficSpec) -> float:
    """Variance of the aggregate service time.

    The aggregate is served with one backoff draw plus the sum of k
    independent payloads: Var[Y] + k*Var[P]/bit_rate^2.
    """
    _check_k(k)
    _, backoff_var = backoff_moments(phy)
    return backoff_var + k * traffic.payload_variance / phy.bit_rate**2


def queue_wait(
    k: int,
    lam: float,
    phy: PhyProfile,
    traffic: TrafficSpec,
    form: PKForm = PKForm.DETERMINISTIC_SERVICE,
) -> float:
    """Mean M/G/1 queue wait of a batch at input rate lam/k.

    GENERAL_PK:            W = (lam_a^2 s^2 + rho^2) / (2 lam_a (1 - rho))
    DETERMINISTIC_SERVICE: W = lam_a (1/mu)^2 / (2 (1 - rho))

    with lam_a = lam/k, rho = lam_a/mu and s^2 the service variance.
    Returns UNBOUNDED when rho >= 1.
    """
    _check_k(k)
    _check_lambda(lam)
    mean = service_time(k, phy, traffic)
    lam_a = lam / k
    rho = lam_a * mean
    if rho >= 1.0:
        return UNBOUNDED
    if form is PKForm.DETERMINISTIC_SERVICE:
        return lam_a * mean * mean / (2.0 * (1.0 - rho))
    var = service_variance(k, phy, traffic)
    return (lam_a * lam_a * var + rho * rho) / (2.0 * lam_a * (1.0 - rho))


def system_time(
    k: int,
    lam: float,
    phy: PhyProfile,
    traffic: TrafficSpec,
    form: PKForm = PKForm.DETERMINISTIC_SERVICE,
) -> float:
    """Mean total time of a frame: F(k) = Er(k) + 1/mu(k) + W(k)."""
    wait = queue_wait(k, lam, phy, traffic, form)
    if math.isinf(wait):
        return UNBOUNDED
    return erlang_wait(k, lam) + service_time(k, phy, traffic) + wait


def gain(
    k: int,
    lam: float,
    phy: PhyProfile,
    traffic: TrafficSpec,
    form: PKForm = PKForm.DETERMINISTIC_SERVICE,
) -> float:
    """Delay gain of aggregating k frames: G(k) = F(k) - F(1).

    Negative means aggregation reduces mean delay. Extended arithmetic:
    exactly 0.0 for k=1; -UNBOUNDED when only the unaggregated system is
    unstable (congestion regime, aggregation is the only viable option);
    +UNBOUNDED when only the aggregated system is unstable;
    BOTH_UNSTABLE (NaN) when neither is stable.
    """
    _check_k(k)
    _check_lambda(lam)
    if k == 1:
        return 0.0
    f_k = system_time(k, lam, phy, traffic, form)
    f_1 = system_time(1, lam, phy, traffic, form)
    k_unstable = math.isinf(f_k)
    one_unstable = math.isinf(f_1)
    if k_unstable and one_unstable:
        return BOTH_UNSTABLE
    if one_unstable:
        return -UNBOUNDED
    if k_unstable:
        return UNBOUNDED
    return f_k - f_1


def evaluate(
    k: int,
    lam: float,
    phy: PhyProfile,
    traffic: TrafficSpec,
    form: PKForm = PKForm.DETERMINISTIC_SERVICE,
) -> QueueMetrics:
    """Evaluate the whole chain for one (k, lam) point."""
    _check_k(k)
    _check_lambda(lam)
    mean = service_time(k, phy, traffic)
    lam_a = lam / k
    rho = lam_a * mean
    wait = queue_wait(k, lam, phy, traffic, form)
    stable = rho < 1.0
    total = UNBOUNDED if not stable else erlang_wait(k, lam) + mean + wait
    return QueueMetrics(
        k=k,
        erlang_wait=erlang_wait(k, lam),
        service_mean=mean,
        service_variance=service_variance(k, phy, traffic),
        lambda_a=lam_a,
        rho=rho,
        queue_wait=wait,
        system_time=total,
        gain=gain(k, lam, phy, traffic, form),
        stable=stable,
    )
