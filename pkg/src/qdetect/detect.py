"""Observation models and stopping-rule engines.

Implements the modified Shiryaev-Roberts procedure

    R_n = (1 + R_{n-1}) * f1(X_n)/f0(X_n),    N = inf{n >= 0 : R_n >= A},

with an arbitrary (possibly randomized) head start R_0 >= 0, plus a CUSUM
baseline.  Observations are generated lazily under a change scenario: index
``n`` is drawn from ``f0`` if ``n < k`` and from ``f1`` if ``n >= k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError

DEFAULT_MAX_STEPS = 10**7


@dataclass(frozen=True)
class DensityPair:
    """Fully specified pre-/post-change observation densities.

    ``pre_sampler`` / ``post_sampler`` draw from f0 / f1 given a numpy
    Generator (vectorized when a ``size`` is passed); ``lr`` evaluates the
    likelihood ratio f1(x)/f0(x) on the common support.
    """

    pre_sampler: Callable
    post_sampler: Callable
    lr: Callable
    label: str
    support: Callable = field(default=lambda x: True)


def _exp_pre(rng, size=None):
    # inverse transform for Exp(1)
    return -np.log(rng.random(size))


def _exp_post(rng, size=None):
    # inverse transform for Exp(2)
    return -np.log(rng.random(size)) / 2.0


def _exp_lr(x):
    return 2.0 * np.exp(-x)


def exponential_pair() -> DensityPair:
    """The worked example: f0 = Exp(1), f1 = Exp(2), lr(x) = 2 exp(-x)."""
    return DensityPair(
        pre_sampler=_exp_pre,
        post_sampler=_exp_post,
        lr=_exp_lr,
        label="exp1-vs-exp2",
        support=lambda x: bool(np.all(np.asarray(x) > 0)),
    )


@dataclass(frozen=True)
class ChangeScenario:
    """Change at observation index k (1-based); ``math.inf`` means no change."""

    change_index: float

    def __post_init__(self):
        k = self.change_index
        if k != math.inf and (k < 1 or int(k) != k):
            raise ConfigurationError(f"change index must be a positive integer or inf, got {k}")

    @classmethod
    def at(cls, k: int) -> "ChangeScenario":
        return cls(change_index=k)

    @classmethod
    def never(cls) -> "ChangeScenario":
        return cls(change_index=math.inf)

    def is_post_change(self, n: int) -> bool:
        return n >= self.change_index


@dataclass(frozen=True)
class StoppingRecord:
    """Outcome of a single detector run."""

    n_stop: int
    head_start: float
    final_stat: float
    truncated: bool


def likelihood_ratio(pair: DensityPair, x) -> float:
    """f1(x)/f0(x); raises DomainError outside the common support."""
    if not pair.support(x):
        raise DomainError(f"observation {x!r} outside support of pair {pair.label!r}")
    return pair.lr(x)


def sr_update(r_prev: float, lr_value: float) -> float:
    """One step of the Shiryaev-Roberts recursion: (1 + r) * lr."""
    if r_prev < 0:
        raise DomainError(f"statistic must be nonnegative, got {r_prev}")
    if lr_value <= 0:
        raise DomainError(f"likelihood ratio must be positive, got {lr_value}")
    return (1.0 + r_prev) * lr_value


def run_modified_sr(
    pair: DensityPair,
    r0: float,
    A: float,
    scenario: ChangeScenario,
    rng: np.random.Generator,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> StoppingRecord:
    """Run the modified SR procedure until the statistic reaches ``A``.

    Stopping at n = 0 (head start already at or above the threshold) consumes
    no observations.  If ``max_steps`` observations pass without a crossing
    the record is flagged ``truncated``; callers must count such runs.
    """
    if A <= 0:
        raise ConfigurationError(f"threshold A must be positive, got {A}")
    if r0 < 0:
        raise DomainError(f"head start must be nonnegative, got {r0}")
    if max_steps < 1:
        raise ConfigurationError(f"max_steps must be >= 1, got {max_steps}")
    if r0 >= A:
        return StoppingRecord(n_stop=0, head_start=r0, final_stat=r0, truncated=False)
    r = r0
    for n in range(1, max_steps + 1):
        if scenario.is_post_change(n):
            x = pair.post_sampler(rng)
        else:
            x = pair.pre_sampler(rng)
        r = sr_update(r, likelihood_ratio(pair, x))
        if r >= A:
            return StoppingRecord(n_stop=n, head_start=r0, final_stat=r, truncated=False)
    return StoppingRecord(n_stop=max_steps, head_start=r0, final_stat=r, truncated=True)


def run_cusum(
    pair: DensityPair,
    A: float,
    scenario: ChangeScenario,
    rng: np.random.Generator,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> StoppingRecord:
    """Page's CUSUM baseline: W_n = max(0, W_{n-1} + log lr(X_n)), W_0 = 0,
    stopping at the first n >= 1 with W_n >= log(A).

    ``final_stat`` is reported as exp(W) so it shares the direct-space
    threshold convention of the SR records.
    """
    if A <= 0:
        raise ConfigurationError(f"threshold A must be positive, got {A}")
    b = math.log(A)
    w = 0.0
    for n in range(1, max_steps + 1):
        if scenario.is_post_change(n):
            x = pair.post_sampler(rng)
        else:
            x = pair.pre_sampler(rng)
        w = max(0.0, w + math.log(likelihood_ratio(pair, x)))
        if w >= b:
            return StoppingRecord(n_stop=n, head_start=0.0, final_stat=math.exp(w), truncated=False)
    return StoppingRecord(n_stop=max_steps, head_start=0.0, final_stat=math.exp(w), truncated=True)
