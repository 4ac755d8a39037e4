"""Head-start distributions for the modified Shiryaev-Roberts procedure.

The main law is the uniform product construction for the exponential example:
R_0 = (R + 1) Z with (R, Z) uniform on [0, A] x [0, 2], valid for 0 < A < 2.
Its closed-form functionals

    p0 = P(R_0 >= A) = 1 - log(A + 1)/2,      mu0 = E(R_0 | R_0 < A) = A/2,

are exposed together with independent quadrature and Monte Carlo oracles.
A historically published (and wrong) variant of p0, 1 - log(A)/2, is kept
purely so regression tests can show it fails the oracles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError, UndefinedConditionalError


class LawKind(enum.Enum):
    POINT_MASS = "point_mass"
    YAKIR_UNIFORM_PRODUCT = "yakir_uniform_product"
    CUSTOM = "custom"


@dataclass(frozen=True)
class HeadStartLaw:
    """Distribution of the head start R_0 chosen by the statistician.

    For CUSTOM laws, ``sampler(rng, size)`` must return nonnegative draws;
    ``closed_p0`` / ``closed_mu0`` may be supplied when closed forms exist,
    otherwise only the Monte Carlo oracle path is available.
    """

    kind: LawKind
    r0: Optional[float] = None
    a_param: Optional[float] = None
    sampler: Optional[Callable] = None
    closed_p0: Optional[Callable] = None
    closed_mu0: Optional[Callable] = None

    @classmethod
    def point_mass(cls, r0: float) -> "HeadStartLaw":
        if r0 < 0:
            raise ConfigurationError(f"head start must be nonnegative, got {r0}")
        return cls(kind=LawKind.POINT_MASS, r0=float(r0))

    @classmethod
    def yakir(cls, A: float) -> "HeadStartLaw":
        _check_threshold(A)
        return cls(kind=LawKind.YAKIR_UNIFORM_PRODUCT, a_param=float(A))

    @classmethod
    def custom(cls, sampler, closed_p0=None, closed_mu0=None) -> "HeadStartLaw":
        return cls(kind=LawKind.CUSTOM, sampler=sampler,
                   closed_p0=closed_p0, closed_mu0=closed_mu0)

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        """Draw from the law; draw-count per replication is fixed per kind."""
        if self.kind is LawKind.POINT_MASS:
            return np.full(size, self.r0) if size is not None else self.r0
        if self.kind is LawKind.YAKIR_UNIFORM_PRODUCT:
            a = self.a_param
            r_star = rng.uniform(0.0, a, size)
            z = rng.uniform(0.0, 2.0, size)
            return (r_star + 1.0) * z
        return self.sampler(rng, size)


def sample_headstart(law: HeadStartLaw, rng: np.random.Generator) -> float:
    """One draw of R_0 from the law."""
    return float(law.sample(rng))


def _check_threshold(A: float) -> None:
    if not (0.0 < A < 2.0):
        raise DomainError(f"the uniform product law needs 0 < A < 2, got {A}")


def p0_exact(A: float) -> float:
    """P(R_0 >= A) = 1 - log(A + 1)/2 under the uniform product law."""
    _check_threshold(A)
    return 1.0 - math.log(A + 1.0) / 2.0


def p0_erratum(A: float) -> float:
    """The wrong published form 1 - log(A)/2.

    Kept only as a disconfirmation target for the oracle regression tests;
    never used in any estimate.
    """
    _check_threshold(A)
    return 1.0 - math.log(A) / 2.0


def mu0_exact(A: float) -> float:
    """E(R_0 | R_0 < A) = A/2 under the uniform product law."""
    _check_threshold(A)
    return A / 2.0


def yakir_density(A: float, x) -> np.ndarray:
    """Unconditional density of R_0 = (R + 1)Z on (0, 2(A+1)).

    phi0(x) = log(2(A+1)/max(x, 2)) / (2A), obtained by integrating the
    product over R ~ U[0, A].
    """
    _check_threshold(A)
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(arr)
    inside = (arr > 0) & (arr < 2.0 * (A + 1.0))
    xm = np.maximum(arr[inside], 2.0)
    out[inside] = np.log(2.0 * (A + 1.0) / xm) / (2.0 * A)
    return out if np.ndim(x) else float(out[0])


def yakir_mean(A: float) -> float:
    """E R_0 = A/2 + 1."""
    _check_threshold(A)
    return A / 2.0 + 1.0


def yakir_mean_square(A: float) -> float:
    """E R_0^2 = E(R+1)^2 E Z^2 = ((A+1)^3 - 1)/(3A) * 4/3."""
    _check_threshold(A)
    return ((A + 1.0) ** 3 - 1.0) / (3.0 * A) * (4.0 / 3.0)


def size_biased_mean(A: float) -> float:
    """Mean of the size-biased law (x+1) phi0(x) / (E R_0 + 1)."""
    m1 = yakir_mean(A)
    m2 = yakir_mean_square(A)
    return (m2 + m1) / (m1 + 1.0)


def p0_quadrature(A: float) -> float:
    """Tail mass P(R_0 >= A) by numerical integration of the density."""
    _check_threshold(A)
    val, _ = integrate.quad(lambda x: yakir_density(A, x), A, 2.0 * (A + 1.0),
                            points=[2.0], limit=200)
    return val


def mu0_quadrature(A: float) -> float:
    """Conditional mean E(R_0 | R_0 < A) by numerical integration."""
    _check_threshold(A)
    num, _ = integrate.quad(lambda x: x * yakir_density(A, x), 0.0, A, limit=200)
    den, _ = integrate.quad(lambda x: yakir_density(A, x), 0.0, A, limit=200)
    return num / den


def functionals_oracle(law: HeadStartLaw, A: float, reps: int,
                       rng: np.random.Generator) -> dict:
    """Brute-force Monte Carlo estimates of p0, mu0 and the mean of R_0.

    Returns a dict with keys ``p0_hat``, ``p0_se``, ``mu0_hat``, ``mu0_se``,
    ``mean_hat``, ``mean_se``, ``reps``.  The conditional mean uses rejection
    on {R_0 < A} and raises if that event carries no sampled mass.
    """
    if reps < 10**4:
        raise ConfigurationError(f"oracle needs reps >= 1e4, got {reps}")
    draws = np.asarray(law.sample(rng, reps), dtype=float)
    below = draws < A
    n_below = int(below.sum())
    hit = (~below).astype(float)
    p0_hat = hit.mean()
    p0_se = hit.std(ddof=1) / math.sqrt(reps)
    if n_below == 0:
        raise UndefinedConditionalError("no draws below the threshold; mu0 undefined")
    cond = draws[below]
    mu0_hat = cond.mean()
    mu0_se = cond.std(ddof=1) / math.sqrt(n_below) if n_below > 1 else 0.0
    return {
        "p0_hat": float(p0_hat),
        "p0_se": float(p0_se),
        "mu0_hat": float(mu0_hat),
        "mu0_se": float(mu0_se),
        "mean_hat": float(draws.mean()),
        "mean_se": float(draws.std(ddof=1) / math.sqrt(reps)),
        "reps": int(reps),
    }
