"""Materials, stress-strain laws, and layered periodic media.

A medium is a one-dimensional periodic arrangement of homogeneous layers.
Each layer carries a density ``rho`` and a stress law ``sigma(eps)``; the
local small-signal sound speed is ``c = sqrt(sigma'(eps)/rho)`` and the
impedance is ``Z = sqrt(rho*sigma'(eps))``.

Period averages use the width-weighted arithmetic mean (written "bar")
and harmonic mean (written "hat").  They give the two classical speeds of
a layered medium at ambient stress ``sigma0``:

* ``c_hat``  -- harmonic mean of the layer sound speeds; the speed of the
  fastest, unreflected part of a signal.
* ``c_eff = sqrt(hat(sigma') / bar(rho))`` -- the bulk long-wave speed,
  always <= ``c_hat``.

For a jump between stresses ``sigma_l`` and ``sigma_r`` the analogous
construction replaces ``sigma'`` by the per-layer chord slope
``[sigma]/[eps]``:

    s_eff = sqrt( hat([sigma]/[eps]) / bar(rho) )

and the dimensionless ratio ``S_eff = s_eff / c_hat(sigma_r)`` acts as a
shock-admissibility discriminator: jumps with ``S_eff > 1`` steepen into
persistent shocks, jumps with ``S_eff < 1`` disperse into oscillatory
wavetrains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "StrainDomainError",
    "StressRangeError",
    "StressLaw",
    "ExponentialLaw",
    "LinearLaw",
    "PowerLaw",
    "CubicLaw",
    "Material",
    "Layer",
    "Medium",
    "AmbientState",
    "ly_medium",
    "mean_arithmetic",
    "mean_harmonic",
    "c_hat",
    "c_eff",
    "s_eff",
    "s_eff_relative",
]


class StrainDomainError(ValueError):
    """Strain outside the admissible domain of a stress law."""


class StressRangeError(ValueError):
    """Stress value not attained by a stress law."""


# Integer codes used by the compiled kernels (see _kernels.py).
LAW_EXPONENTIAL = 0
LAW_LINEAR = 1
LAW_POWER = 2
LAW_CUBIC = 3


@dataclass(frozen=True)
class StressLaw:
    """Base class for stress-strain laws sigma(eps).

    Every law satisfies sigma(0) = 0 and sigma'(eps) > 0 on its admissible
    strain domain, so the wave system stays hyperbolic.  Subclasses provide
    closed forms for the stress, its derivative, the inverse map and the
    stored-energy potential Phi(eps) = integral of sigma from 0 to eps.
    """

    K: float

    name = "abstract"
    law_code = -1

    def sigma(self, eps):
        raise NotImplementedError

    def dsigma(self, eps):
        raise NotImplementedError

    def strain(self, sigma):
        """Inverse map: the strain at which the law produces ``sigma``."""
        raise NotImplementedError

    def potential(self, eps):
        """Stored energy Phi(eps) = int_0^eps sigma(s) ds."""
        raise NotImplementedError

    def admissible(self, eps) -> bool:
        """Whether ``eps`` (scalar or array) lies in the strain domain."""
        return bool(np.all(np.isfinite(eps)))

    def check_strain(self, eps):
        if not self.admissible(eps):
            raise StrainDomainError(f"strain {eps!r} outside domain of {self!r}")

    @property
    def kernel_params(self) -> tuple[float, float]:
        """(p1, p2) parameter pair consumed by the compiled kernels."""
        return (self.K, 0.0)

    @property
    def config_params(self) -> dict:
        return {"K": self.K}


@dataclass(frozen=True)
class ExponentialLaw(StressLaw):
    """sigma(eps) = exp(K*eps) - 1, admissible for all strains."""

    name = "exponential"
    law_code = LAW_EXPONENTIAL

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("exponential law requires K > 0")

    def sigma(self, eps):
        return np.expm1(self.K * np.asarray(eps, dtype=float)) if np.ndim(eps) else math.expm1(self.K * eps)

    def dsigma(self, eps):
        return self.K * (np.exp(self.K * np.asarray(eps, dtype=float)) if np.ndim(eps) else math.exp(self.K * eps))

    def strain(self, sigma):
        sig = np.asarray(sigma, dtype=float)
        if np.any(sig <= -1.0):
            raise StressRangeError("exponential law only attains stresses > -1")
        out = np.log1p(sig) / self.K
        return out if np.ndim(sigma) else float(out)

    def potential(self, eps):
        e = np.asarray(eps, dtype=float)
        out = np.expm1(self.K * e) / self.K - e
        return out if np.ndim(eps) else float(out)


@dataclass(frozen=True)
class LinearLaw(StressLaw):
    """sigma(eps) = K*eps (Hookean layer)."""

    name = "linear"
    law_code = LAW_LINEAR

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("linear law requires K > 0")

    def sigma(self, eps):
        return self.K * (np.asarray(eps, dtype=float) if np.ndim(eps) else eps)

    def dsigma(self, eps):
        if np.ndim(eps):
            return np.full(np.shape(eps), self.K)
        return self.K

    def strain(self, sigma):
        return (np.asarray(sigma, dtype=float) if np.ndim(sigma) else sigma) / self.K

    def potential(self, eps):
        e = np.asarray(eps, dtype=float) if np.ndim(eps) else eps
        return 0.5 * self.K * e * e


@dataclass(frozen=True)
class PowerLaw(StressLaw):
    """Lagrangian gas-dynamics closure sigma(eps) = K*(1 - (1+eps)^(-gamma)).

    Admissible for eps > -1; the attainable stress range is (-inf, K).
    """

    gamma: float = 1.4

    name = "power"
    law_code = LAW_POWER

    def __post_init__(self):
        if not (self.K > 0 and self.gamma > 0):
            raise ValueError("power law requires K > 0 and gamma > 0")

    def admissible(self, eps) -> bool:
        arr = np.asarray(eps, dtype=float)
        return bool(np.all(np.isfinite(arr)) and np.all(arr > -1.0))

    def sigma(self, eps):
        self.check_strain(eps)
        e = np.asarray(eps, dtype=float)
        out = self.K * (1.0 - (1.0 + e) ** (-self.gamma))
        return out if np.ndim(eps) else float(out)

    def dsigma(self, eps):
        self.check_strain(eps)
        e = np.asarray(eps, dtype=float)
        out = self.K * self.gamma * (1.0 + e) ** (-self.gamma - 1.0)
        return out if np.ndim(eps) else float(out)

    def strain(self, sigma):
        sig = np.asarray(sigma, dtype=float)
        if np.any(sig >= self.K):
            raise StressRangeError(f"power law with K={self.K} only attains stresses < K")
        out = (1.0 - sig / self.K) ** (-1.0 / self.gamma) - 1.0
        return out if np.ndim(sigma) else float(out)

    def potential(self, eps):
        self.check_strain(eps)
        e = np.asarray(eps, dtype=float)
        if self.gamma == 1.0:
            out = self.K * (e - np.log1p(e))
        else:
            g = self.gamma
            out = self.K * (e - ((1.0 + e) ** (1.0 - g) - 1.0) / (1.0 - g))
        return out if np.ndim(eps) else float(out)

    @property
    def kernel_params(self):
        return (self.K, self.gamma)

    @property
    def config_params(self):
        return {"K": self.K, "gamma": self.gamma}


@dataclass(frozen=True)
class CubicLaw(StressLaw):
    """sigma(eps) = K*eps + beta*eps^3.

    With K > 0 the law is uniformly hyperbolic; K = 0 gives the purely
    cubic medium, which degenerates (sigma' = 0) exactly at eps = 0.
    """

    beta: float = 0.0

    name = "cubic"
    law_code = LAW_CUBIC

    def __post_init__(self):
        if self.K < 0 or self.beta < 0 or (self.K == 0 and self.beta == 0):
            raise ValueError("cubic law requires K >= 0, beta >= 0, K + beta > 0")

    def sigma(self, eps):
        e = np.asarray(eps, dtype=float) if np.ndim(eps) else eps
        return self.K * e + self.beta * e**3

    def dsigma(self, eps):
        e = np.asarray(eps, dtype=float) if np.ndim(eps) else eps
        return self.K + 3.0 * self.beta * e * e

    def strain(self, sigma):
        if np.ndim(sigma):
            return np.array([self._invert(float(s)) for s in np.asarray(sigma).ravel()]).reshape(np.shape(sigma))
        return self._invert(float(sigma))

    def _invert(self, sigma: float) -> float:
        if sigma == 0.0:
            return 0.0
        if self.beta == 0.0:
            return sigma / self.K
        # Monotone cubic: bracket the single real root, expanding if needed.
        scale = abs(sigma) / max(self.K, self.beta) + 1.0
        lo, hi = -scale, scale
        f = lambda e: self.K * e + self.beta * e**3 - sigma
        while f(lo) > 0.0:
            lo *= 2.0
        while f(hi) < 0.0:
            hi *= 2.0
        return brentq(f, lo, hi, xtol=1e-13)

    def potential(self, eps):
        e = np.asarray(eps, dtype=float) if np.ndim(eps) else eps
        return 0.5 * self.K * e * e + 0.25 * self.beta * e**4

    @property
    def kernel_params(self):
        return (self.K, self.beta)

    @property
    def config_params(self):
        return {"K": self.K, "beta": self.beta}


_LAW_BY_NAME = {
    "exponential": ExponentialLaw,
    "linear": LinearLaw,
    "power": PowerLaw,
    "cubic": CubicLaw,
}


def law_from_config(name: str, params: dict) -> StressLaw:
    """Build a stress law from its config-file name and parameter dict."""
    try:
        cls = _LAW_BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown stress law {name!r}; expected one of {sorted(_LAW_BY_NAME)}") from None
    return cls(**params)


@dataclass(frozen=True)
class Material:
    """A homogeneous material: density plus stress law."""

    rho: float
    law: StressLaw

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("density must be positive")

    def sound_speed(self, eps=0.0):
        return np.sqrt(self.law.dsigma(eps) / self.rho)

    def impedance(self, eps=0.0):
        return np.sqrt(self.rho * self.law.dsigma(eps))


@dataclass(frozen=True)
class Layer:
    """One layer of a periodic medium: width fraction of the period plus material."""

    width: float
    material: Material

    def __post_init__(self):
        if not 0.0 < self.width <= 1.0:
            raise ValueError("layer width fraction must lie in (0, 1]")


@dataclass(frozen=True)
class Medium:
    """Periodic layered medium: period length and ordered layers.

    Layer widths are fractions of the period and must sum to one.  The
    phase convention anchors the first layer at x = 0, so material k
    occupies x mod period in [period*F_{k-1}, period*F_k) with F the
    cumulative width fractions.
    """

    period: float
    layers: tuple[Layer, ...]

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        layers = tuple(
            lay if isinstance(lay, Layer) else Layer(*lay) for lay in self.layers
        )
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise ValueError("medium needs at least one layer")
        total = math.fsum(lay.width for lay in layers)
        if abs(total - 1.0) > 1e-14:
            raise ValueError(f"layer width fractions sum to {total}, expected 1")

    @staticmethod
    def homogeneous(rho: float, law: StressLaw, period: float = 1.0) -> "Medium":
        return Medium(period, (Layer(1.0, Material(rho, law)),))

    @staticmethod
    def bilayer(mat_a: Material, mat_b: Material, period: float = 1.0,
                fraction_a: float = 0.5) -> "Medium":
        return Medium(period, (Layer(fraction_a, mat_a), Layer(1.0 - fraction_a, mat_b)))

    @property
    def materials(self) -> tuple[Material, ...]:
        return tuple(lay.material for lay in self.layers)

    def widths(self) -> np.ndarray:
        return np.array([lay.width for lay in self.layers])

    def material_at(self, x: float) -> Material:
        """Material at position x under the periodic phase convention."""
        frac = (x % self.period) / self.period
        acc = 0.0
        for lay in self.layers:
            acc += lay.width
            if frac < acc:
                return lay.material
        return self.layers[-1].material


@dataclass(frozen=True)
class AmbientState:
    """Uniform background stress around which waves propagate."""

    sigma0: float = 0.0


def _sigma0(ambient: Union[AmbientState, float]) -> float:
    return ambient.sigma0 if isinstance(ambient, AmbientState) else float(ambient)


def ly_medium(z_b: float, period: float = 1.0) -> Medium:
    """Half-and-half bilayer with rho_A = K_A = 1 and rho_B = K_B = z_b.

    Both layers carry exponential stress laws.  z_b equals the impedance
    of layer B at zero stress, while the sound speed is 1 in both layers.
    """
    if not z_b > 0:
        raise ValueError("z_b must be positive")
    mat_a = Material(1.0, ExponentialLaw(1.0))
    mat_b = Material(float(z_b), ExponentialLaw(float(z_b)))
    return Medium.bilayer(mat_a, mat_b, period=period)


def mean_arithmetic(medium: Medium, f: Callable[[Material], float]) -> float:
    """Width-weighted arithmetic mean of a per-layer sampler over one period."""
    return math.fsum(lay.width * float(f(lay.material)) for lay in medium.layers)


def mean_harmonic(medium: Medium, f: Callable[[Material], float]) -> float:
    """Width-weighted harmonic mean; requires a strictly positive sampler."""
    samples = [(lay.width, float(f(lay.material))) for lay in medium.layers]
    for _, val in samples:
        if val <= 0.0:
            raise ValueError(f"harmonic mean requires positive samples, got {val}")
    return 1.0 / math.fsum(w / val for w, val in samples)


def c_hat(medium: Medium, ambient: Union[AmbientState, float] = 0.0) -> float:
    """Harmonic mean of the layer sound speeds at the ambient stress."""
    sigma0 = _sigma0(ambient)

    def speed(mat: Material) -> float:
        eps0 = mat.law.strain(sigma0)
        return math.sqrt(mat.law.dsigma(eps0) / mat.rho)

    return mean_harmonic(medium, speed)


def c_eff(medium: Medium, ambient: Union[AmbientState, float] = 0.0) -> float:
    """Bulk effective speed sqrt(hat(sigma') / bar(rho)) at the ambient stress."""
    sigma0 = _sigma0(ambient)
    hat_mod = mean_harmonic(medium, lambda m: m.law.dsigma(m.law.strain(sigma0)))
    bar_rho = mean_arithmetic(medium, lambda m: m.rho)
    return math.sqrt(hat_mod / bar_rho)


def s_eff(medium: Medium, sigma_l: float, sigma_r: float) -> float:
    """Effective speed of a jump between stresses sigma_l and sigma_r.

    Uses the harmonic mean over layers of the chord slope [sigma]/[eps]
    (each layer converting the stress jump to its own strain jump) over
    the arithmetic mean density.
    """
    if sigma_l == sigma_r:
        raise ValueError("s_eff requires sigma_l != sigma_r")
    dsig = sigma_r - sigma_l

    def chord(mat: Material) -> float:
        deps = mat.law.strain(sigma_r) - mat.law.strain(sigma_l)
        return dsig / deps

    hat_chord = mean_harmonic(medium, chord)
    bar_rho = mean_arithmetic(medium, lambda m: m.rho)
    return math.sqrt(hat_chord / bar_rho)


def s_eff_relative(medium: Medium, sigma_l: float, sigma_r: float) -> float:
    """Relative effective jump speed S_eff = s_eff / c_hat(sigma_r).

    Values above one predict shock formation (the generalized
    characteristic admissibility condition); values below one predict
    dispersal into an oscillatory train.
    """
    return s_eff(medium, sigma_l, sigma_r) / c_hat(medium, sigma_r)
