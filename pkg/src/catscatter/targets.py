"""Target density profiles, scattering kinematics, and the hydrogen
ground-state Born amplitude.

The target is a normalized Gaussian column density
``n(b) = exp(-(b - b0)^2 / (2 sigma_t^2)) / (2 pi sigma_t^2)`` centered at
``b0`` in the transverse plane.  The wide-target limit (``sigma_t`` to
infinity) is a separate analytic mode: it has no pointwise density, and
the scattering formulas take the limit exactly, reporting effective cross
sections instead of event densities.

Kinematics are elastic by convention (``p_f = p_i``); the fields stay
independent because the momentum-transfer definitions permit it, but a
constructor warning flags inelastic inputs.  The momentum transfer is
``Qz = p_f cos(theta) - p_i`` with the transverse part
``Qperp = p_f sin(theta) (cos(phi), sin(phi))``.

The elastic electron scattering amplitude off hydrogen in the ground 1s
state is real in first Born order:

``f(q) = (a/2) [ 1/(1 + (a/2)^2 q^2) + 1/(1 + (a/2)^2 q^2)^2 ]``

with ``a`` the Bohr radius, kept as an explicit parameter (default 1 in
internal units) so the ratio of potential radius to beam width is visible
in every call.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import WideLimitHasNoDensity

__all__ = [
    "TargetProfile",
    "Kinematics",
    "MomentumTransfer",
    "momentum_transfer",
    "hydrogen_amplitude",
    "target_density",
]


@dataclass(frozen=True)
class TargetProfile:
    """Gaussian atomic-density profile, or its analytic wide limit."""

    sigma_t: float | None = None
    b0: tuple[float, float] = (0.0, 0.0)
    wide_limit: bool = False

    def __post_init__(self) -> None:
        if self.wide_limit:
            return
        if self.sigma_t is None or self.sigma_t <= 0:
            raise ValueError("finite target needs sigma_t > 0")

    @classmethod
    def gaussian(cls, sigma_t: float, b0: tuple[float, float] = (0.0, 0.0)) -> "TargetProfile":
        return cls(sigma_t=sigma_t, b0=b0)

    @classmethod
    def wide(cls) -> "TargetProfile":
        return cls(wide_limit=True)

    @property
    def b0_vec(self) -> np.ndarray:
        return np.asarray(self.b0, dtype=float)


@dataclass(frozen=True)
class Kinematics:
    """Incident/final momenta [1/a] and scattering angles [rad]."""

    p_i: float
    p_f: float
    theta: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        if self.p_i <= 0 or self.p_f <= 0:
            raise ValueError("momenta must be > 0")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError("theta must lie in [0, pi]")
        if abs(self.p_f - self.p_i) > 1e-9 * self.p_i:
            warnings.warn(
                f"inelastic kinematics: p_f={self.p_f} differs from p_i={self.p_i}",
                stacklevel=3,
            )

    @classmethod
    def elastic(cls, p: float, theta: float, phi: float = 0.0) -> "Kinematics":
        return cls(p_i=p, p_f=p, theta=theta, phi=phi)

    def with_phi(self, phi: float) -> "Kinematics":
        return Kinematics(self.p_i, self.p_f, self.theta, phi)


@dataclass(frozen=True)
class MomentumTransfer:
    """3-D momentum transfer, split into its longitudinal and transverse parts."""

    qz: float
    qperp: tuple[float, float]

    @property
    def qperp_mag(self) -> float:
        return math.hypot(*self.qperp)

    @property
    def magnitude(self) -> float:
        return math.sqrt(self.qz ** 2 + self.qperp[0] ** 2 + self.qperp[1] ** 2)


def momentum_transfer(kin: Kinematics) -> MomentumTransfer:
    """Momentum transfer of the scattering event: final minus mean incident."""
    qz = kin.p_f * math.cos(kin.theta) - kin.p_i
    qp = kin.p_f * math.sin(kin.theta)
    return MomentumTransfer(qz=qz, qperp=(qp * math.cos(kin.phi), qp * math.sin(kin.phi)))


def hydrogen_amplitude(q, a: float = 1.0):
    """First-Born elastic amplitude for hydrogen 1s, real, in units of a.

    Vectorized over ``q`` (momentum-transfer magnitude, >= 0).
    ``f(0) = a`` and ``q^2 f(q) -> 2/a`` at large momentum transfer.
    """
    if a <= 0:
        raise ValueError("a must be > 0")
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("q must be >= 0")
    u = 1.0 / (1.0 + (0.5 * a) ** 2 * q * q)
    out = 0.5 * a * (u + u * u)
    return float(out) if out.ndim == 0 else out


def target_density(profile: TargetProfile, b) -> float:
    """Pointwise target density n(b); undefined in the wide limit."""
    if profile.wide_limit:
        raise WideLimitHasNoDensity(
            "wide-limit target has no pointwise density; the limit is applied "
            "inside the scattering formulas"
        )
    b = np.asarray(b, dtype=float)
    d = b - profile.b0_vec
    st2 = profile.sigma_t ** 2
    return float(np.exp(-(d @ d) / (2.0 * st2)) / (2.0 * math.pi * st2))
