"""Replication engine for the modified SR procedure under the exponential pair.

Produces the estimates behind the numerical study: the post-change delay
E_1 N, the false-alarm run length E_inf N, the cross moment E_1(R_0 N), and
conditional delays E_k(N - k + 1 | N >= k - 1) for a grid of change times.

All estimators simulate the worked example densities f0 = Exp(1),
f1 = Exp(2) by inverse transform, one lazy observation per step, keeping
only the running statistic.  Replications are chunked onto derived Philox
streams (see :mod:`qdetect.rng`), so a fixed ``(seed, reps, config)`` gives
bit-identical output for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, Optional

import numpy as np

from . import rng as qrng
from .errors import ConfigurationError, UndefinedConditionalError
from .headstart import HeadStartLaw

DEFAULT_MAX_STEPS = 10**7

#: Truncation fraction above which an estimate is flagged as unreliable.
TRUNCATION_FLAG_LEVEL = 1e-4


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo mean with its standard error and provenance."""

    mean: float
    stderr: float
    reps: int
    seed: int
    truncation_count: int = 0
    rejected: int = 0

    @property
    def truncation_fraction(self) -> float:
        return self.truncation_count / max(self.reps + self.rejected, 1)

    @property
    def flagged(self) -> bool:
        return self.truncation_fraction > TRUNCATION_FLAG_LEVEL


@dataclass(frozen=True)
class DelayProfile:
    """Conditional delay estimates indexed by change time k."""

    entries: Dict[int, McEstimate]
    undefined: Dict[int, int] = field(default_factory=dict)

    def max_mean(self) -> float:
        return max(e.mean for e in self.entries.values())


def mc_estimate(values: np.ndarray, seed: int, truncation_count: int = 0,
                rejected: int = 0) -> McEstimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        raise UndefinedConditionalError("no replications survived conditioning")
    se = values.std(ddof=1) / math.sqrt(n) if n > 1 else 0.0
    return McEstimate(mean=float(values.mean()), stderr=float(se), reps=n,
                      seed=seed, truncation_count=truncation_count, rejected=rejected)


def _sr_chunk(rng: np.random.Generator, count: int, *, A: float, law: HeadStartLaw,
              change_index: Optional[int], max_steps: int):
    """Simulate ``count`` SR runs; returns (n_stop, r0, final_stat, truncated).

    ``change_index`` is the 1-based observation index of the change; ``None``
    means the change never happens (all draws pre-change).
    """
    r0 = np.asarray(law.sample(rng, count), dtype=float)
    n_stop = np.zeros(count, dtype=np.int64)
    final = r0.copy()
    truncated = np.zeros(count, dtype=bool)
    idx = np.nonzero(r0 < A)[0]
    r = final[idx]
    step = 0
    while idx.size:
        step += 1
        if step > max_steps:
            truncated[idx] = True
            n_stop[idx] = max_steps
            final[idx] = r
            break
        u = rng.random(idx.size)
        x = -np.log(u)
        if change_index is not None and step >= change_index:
            x *= 0.5  # post-change draws come from Exp(2)
        r = (1.0 + r) * (2.0 * np.exp(-x))
        done = r >= A
        if done.any():
            sel = idx[done]
            n_stop[sel] = step
            final[sel] = r[done]
            idx = idx[~done]
            r = r[~done]
    return n_stop, r0, final, truncated


def _validate(A: float, law: HeadStartLaw, reps: int) -> None:
    if A <= 0:
        raise ConfigurationError(f"threshold A must be positive, got {A}")
    if reps < 1:
        raise ConfigurationError(f"reps must be >= 1, got {reps}")


def sr_replications(A: float, law: HeadStartLaw, change_index: Optional[int],
                    reps: int, seed: int, workers: int = 1,
                    max_steps: int = DEFAULT_MAX_STEPS, tag: str = "sr"):
    """Raw replication arrays (n_stop, r0, final_stat, truncated).

    The stream tag encodes the scenario but deliberately not the threshold,
    so runs at different ``A`` with the same seed share head starts and can
    be compared under common random numbers at the estimator level.
    """
    _validate(A, law, reps)
    kernel = partial(_sr_chunk, A=A, law=law, change_index=change_index,
                     max_steps=max_steps)
    full_tag = f"{tag}/k={change_index}"
    return qrng.run_chunked(kernel, reps, seed, full_tag, workers=workers)


def estimate_e1_delay(A: float, law: HeadStartLaw, reps: int, seed: int,
                      workers: int = 1, max_steps: int = DEFAULT_MAX_STEPS) -> McEstimate:
    """E_1 N: expected stopping index when every observation is post-change."""
    n_stop, _, _, trunc = sr_replications(A, law, 1, reps, seed, workers, max_steps)
    return mc_estimate(n_stop, seed, truncation_count=int(trunc.sum()))


def estimate_cross_term(A: float, law: HeadStartLaw, reps: int, seed: int,
                        workers: int = 1, max_steps: int = DEFAULT_MAX_STEPS) -> McEstimate:
    """E_1(R_0 N): cross moment of head start and stopping index under P_1.

    Uses the same derived streams as :func:`estimate_e1_delay`, so with equal
    ``(seed, reps)`` both estimates come from identical replications (common
    random numbers).
    """
    n_stop, r0, _, trunc = sr_replications(A, law, 1, reps, seed, workers, max_steps)
    return mc_estimate(r0 * n_stop, seed, truncation_count=int(trunc.sum()))


def estimate_arl_false(A: float, law: HeadStartLaw, reps: int, seed: int,
                       workers: int = 1, max_steps: int = DEFAULT_MAX_STEPS) -> McEstimate:
    """E_inf N: expected stopping index when the change never happens."""
    n_stop, _, _, trunc = sr_replications(A, law, None, reps, seed, workers, max_steps)
    return mc_estimate(n_stop, seed, truncation_count=int(trunc.sum()))


def estimate_conditional_delay(A: float, law: HeadStartLaw, k: int, reps: int,
                               seed: int, workers: int = 1,
                               max_steps: int = DEFAULT_MAX_STEPS) -> McEstimate:
    """E_k(N - k + 1 | N >= k - 1) by rejection of runs stopping too early."""
    if k < 1 or int(k) != k:
        raise ConfigurationError(f"change index must be a positive integer, got {k}")
    n_stop, _, _, trunc = sr_replications(A, law, k, reps, seed, workers, max_steps)
    keep = n_stop >= k - 1
    kept = n_stop[keep]
    if kept.size == 0:
        raise UndefinedConditionalError(
            f"conditioning event N >= {k - 1} had no surviving replications")
    rejected = int(reps - kept.size)
    return mc_estimate(kept - k + 1, seed,
                       truncation_count=int(trunc[keep].sum()), rejected=rejected)


def delay_profile(A: float, law: HeadStartLaw, k_max: int, reps: int, seed: int,
                  workers: int = 1, max_steps: int = DEFAULT_MAX_STEPS) -> DelayProfile:
    """Conditional delay estimates for k = 1..k_max."""
    entries: Dict[int, McEstimate] = {}
    undefined: Dict[int, int] = {}
    for k in range(1, k_max + 1):
        try:
            entries[k] = estimate_conditional_delay(A, law, k, reps, seed,
                                                    workers, max_steps)
        except UndefinedConditionalError:
            undefined[k] = reps
    return DelayProfile(entries=entries, undefined=undefined)
