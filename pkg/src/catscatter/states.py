"""Transverse beam states and their phase-space Wigner functions.

Everything is expressed in Hartree atomic units: the Bohr radius is the
length unit (``a = 1``), momenta are in ``1/a``, ``hbar = m_e = 1``.

Five preparations of the transverse state are supported:

* ``gaussian``        -- a single round Gaussian packet of width sigma_perp;
* ``even_cat``        -- symmetric coherent superposition of two Gaussians
                         whose centers sit at ``+r0`` and ``-r0``;
* ``odd_cat``         -- the antisymmetric superposition;
* ``incoherent_pair`` -- the statistical 50/50 mixture of the two displaced
                         packets (no interference term);
* ``anisotropic``     -- a single Gaussian with different widths along x
                         and y.

The momentum wavefunction of one packet is
``psi_1(p) = sqrt(2 sigma_perp^2 / pi) * exp(-sigma_perp^2 p^2)`` and the
cat states carry the normalization ``1/sqrt(1 +/- exp(-r0^2/(2 sigma^2)))``
so that ``int d^2p |psi|^2 = 1`` exactly.

The Wigner function of one packet,
``W1(r, p) = exp(-2 sigma^2 p^2 - r^2/(2 sigma^2)) / pi^2``,
is everywhere positive.  For the cats the displaced-packet part plus the
interference term ``cos(2 r0 . p)`` can turn negative; the incoherent pair
keeps only the displaced part and stays nonnegative.  For numerical
stability the displaced part is evaluated as the explicit two-bump sum
rather than via ``cosh`` (avoids overflow at large separations).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InvalidCatSeparation, NoPureState, UnsupportedVariant
from .quadrature import Interval, QuadratureResult, QuadratureSpec, integrate_nd, oscillation_panels

__all__ = [
    "HARTREE_EV",
    "BeamState",
    "PhasePoint",
    "NegativityScan",
    "momentum_wavefunction",
    "wigner",
    "wigner_values",
    "negativity_scan",
    "wigner_normalization",
    "kinetic_energy_keV",
    "momentum_from_keV",
    "phase_space_grid",
]

HARTREE_EV = 27.2114

GAUSSIAN = "gaussian"
EVEN_CAT = "even_cat"
ODD_CAT = "odd_cat"
INCOHERENT_PAIR = "incoherent_pair"
ANISOTROPIC = "anisotropic"

_CAT_VARIANTS = (EVEN_CAT, ODD_CAT)
_TWO_PACKET = (EVEN_CAT, ODD_CAT, INCOHERENT_PAIR)
_ALL_VARIANTS = (GAUSSIAN,) + _TWO_PACKET + (ANISOTROPIC,)

# Below this separation the odd-cat normalization 1 - exp(-r0^2/2s^2)
# degenerates and the state is rejected.
ODD_CAT_MIN_SEPARATION = 1e-4


@dataclass(frozen=True)
class PhasePoint:
    """A point (r, p) of the transverse phase space, components in (a, 1/a)."""

    r: tuple[float, float]
    p: tuple[float, float]

    def __post_init__(self) -> None:
        vals = (*self.r, *self.p)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"phase-space point must be finite, got {vals}")


@dataclass(frozen=True)
class BeamState:
    """Immutable description of the incident transverse beam preparation.

    ``r0`` is half the packet separation (the centers sit at ``+/-r0``) and
    is parameterized by magnitude and azimuth ``phi_r0``.  ``sigma_z`` and
    ``p_i`` describe the longitudinal packet and enter only validity checks
    and energy conversion.
    """

    variant: str
    sigma_perp: float | None = None
    sigma_x: float | None = None
    sigma_y: float | None = None
    r0: float = 0.0
    phi_r0: float = 0.0
    sigma_z: float = 10.0
    p_i: float = 10.0

    def __post_init__(self) -> None:
        if self.variant not in _ALL_VARIANTS:
            raise ValueError(f"unknown beam variant {self.variant!r}")
        if self.p_i <= 0:
            raise ValueError("p_i must be > 0")
        if self.sigma_z <= 0:
            raise ValueError("sigma_z must be > 0")
        if self.variant == ANISOTROPIC:
            if not (self.sigma_x and self.sigma_y) or self.sigma_x <= 0 or self.sigma_y <= 0:
                raise ValueError("anisotropic state needs sigma_x > 0 and sigma_y > 0")
            return
        if self.sigma_perp is None or self.sigma_perp <= 0:
            raise ValueError(f"{self.variant} state needs sigma_perp > 0")
        if self.variant in _TWO_PACKET:
            if self.r0 < 0:
                raise ValueError("r0 must be >= 0")
            if self.variant == ODD_CAT:
                if self.r0 < ODD_CAT_MIN_SEPARATION * self.sigma_perp:
                    raise InvalidCatSeparation(
                        f"odd cat needs r0 >= {ODD_CAT_MIN_SEPARATION} sigma_perp, "
                        f"got r0/sigma_perp = {self.r0 / self.sigma_perp:.3e}"
                    )
                if self.r0 < self.sigma_perp * (1.0 - 1e-12):
                    warnings.warn(
                        "odd cat with r0 < sigma_perp: the two humps stay separated "
                        "by about 2 sigma_perp and the r0 -> 0 limit has no meaning",
                        stacklevel=3,
                    )

    # -- constructors -------------------------------------------------

    @classmethod
    def gaussian(cls, sigma_perp: float, *, sigma_z: float = 10.0, p_i: float = 10.0) -> "BeamState":
        return cls(GAUSSIAN, sigma_perp=sigma_perp, sigma_z=sigma_z, p_i=p_i)

    @classmethod
    def even_cat(cls, sigma_perp: float, r0: float, *, phi_r0: float = 0.0,
                 sigma_z: float = 10.0, p_i: float = 10.0) -> "BeamState":
        return cls(EVEN_CAT, sigma_perp=sigma_perp, r0=r0, phi_r0=phi_r0,
                   sigma_z=sigma_z, p_i=p_i)

    @classmethod
    def odd_cat(cls, sigma_perp: float, r0: float, *, phi_r0: float = 0.0,
                sigma_z: float = 10.0, p_i: float = 10.0) -> "BeamState":
        return cls(ODD_CAT, sigma_perp=sigma_perp, r0=r0, phi_r0=phi_r0,
                   sigma_z=sigma_z, p_i=p_i)

    @classmethod
    def incoherent_pair(cls, sigma_perp: float, r0: float, *, phi_r0: float = 0.0,
                        sigma_z: float = 10.0, p_i: float = 10.0) -> "BeamState":
        return cls(INCOHERENT_PAIR, sigma_perp=sigma_perp, r0=r0, phi_r0=phi_r0,
                   sigma_z=sigma_z, p_i=p_i)

    @classmethod
    def anisotropic(cls, sigma_x: float, sigma_y: float, *, sigma_z: float = 10.0,
                    p_i: float = 10.0) -> "BeamState":
        return cls(ANISOTROPIC, sigma_x=sigma_x, sigma_y=sigma_y,
                   sigma_z=sigma_z, p_i=p_i)

    def with_r0(self, r0: float) -> "BeamState":
        return replace(self, r0=r0)

    # -- derived quantities -------------------------------------------

    @property
    def is_cat(self) -> bool:
        return self.variant in _CAT_VARIANTS

    @property
    def parity(self) -> int:
        """+1 for the even cat, -1 for the odd cat, 0 otherwise."""
        return {EVEN_CAT: 1, ODD_CAT: -1}.get(self.variant, 0)

    @property
    def r0_vec(self) -> np.ndarray:
        return self.r0 * np.array([math.cos(self.phi_r0), math.sin(self.phi_r0)])

    @property
    def packet_overlap(self) -> float:
        """exp(-r0^2 / (2 sigma_perp^2)), the two-packet overlap factor."""
        if self.variant == ANISOTROPIC:
            return 1.0
        return math.exp(-self.r0 ** 2 / (2.0 * self.sigma_perp ** 2))

    @property
    def widths(self) -> tuple[float, float]:
        if self.variant == ANISOTROPIC:
            return (self.sigma_x, self.sigma_y)
        return (self.sigma_perp, self.sigma_perp)


def kinetic_energy_keV(p: float) -> float:
    """Nonrelativistic kinetic energy of momentum ``p`` [1/a], in keV."""
    if p <= 0:
        raise ValueError("p must be > 0")
    return 0.5 * p * p * HARTREE_EV / 1000.0


def momentum_from_keV(energy_keV: float) -> float:
    """Inverse of :func:`kinetic_energy_keV`."""
    if energy_keV <= 0:
        raise ValueError("energy must be > 0")
    return math.sqrt(2.0 * energy_keV * 1000.0 / HARTREE_EV)


def momentum_wavefunction(state: BeamState, p: Sequence[float]) -> complex:
    """Momentum-space wavefunction psi(p) of a pure transverse state.

    Returns the single-packet Gaussian for the ``gaussian`` variant and the
    normalized two-packet superposition for the cats.  The incoherent pair
    is a mixed state (``NoPureState``); the anisotropic variant is used
    only through its Wigner function (``UnsupportedVariant``).
    """
    if state.variant == INCOHERENT_PAIR:
        raise NoPureState("the incoherent two-packet mixture has no wavefunction")
    if state.variant == ANISOTROPIC:
        raise UnsupportedVariant("anisotropic packets are used via their Wigner function only")
    p = np.asarray(p, dtype=float)
    sp = state.sigma_perp
    psi1 = math.sqrt(2.0 * sp * sp / math.pi) * np.exp(-sp * sp * (p @ p))
    if state.variant == GAUSSIAN:
        return complex(psi1)
    phase = float(state.r0_vec @ p)
    sign = state.parity
    num = np.exp(-1j * phase) + sign * np.exp(1j * phase)
    denom = math.sqrt(2.0) * math.sqrt(1.0 + sign * state.packet_overlap)
    return complex(psi1 * num / denom)


def wigner_values(state: BeamState, x, y, px, py) -> np.ndarray:
    """Vectorized Wigner function over coordinate arrays (broadcastable)."""
    x, y, px, py = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (x, y, px, py))
    )
    if state.variant == ANISOTROPIC:
        sx, sy = state.sigma_x, state.sigma_y
        return np.exp(
            -2.0 * sx * sx * px * px - x * x / (2.0 * sx * sx)
            - 2.0 * sy * sy * py * py - y * y / (2.0 * sy * sy)
        ) / math.pi ** 2

    sp = state.sigma_perp
    gp = np.exp(-2.0 * sp * sp * (px * px + py * py)) / math.pi ** 2
    if state.variant == GAUSSIAN:
        return gp * np.exp(-(x * x + y * y) / (2.0 * sp * sp))

    r0x, r0y = state.r0_vec
    twoss = 2.0 * sp * sp
    # Displaced-packet part written as the explicit two-bump sum; this is
    # cosh(r0.r/sp^2) exp(-r0^2/2sp^2) exp(-r^2/2sp^2) without overflow.
    bumps = 0.5 * (
        np.exp(-((x - r0x) ** 2 + (y - r0y) ** 2) / twoss)
        + np.exp(-((x + r0x) ** 2 + (y + r0y) ** 2) / twoss)
    )
    if state.variant == INCOHERENT_PAIR:
        return gp * bumps
    sign = state.parity
    interference = np.exp(-(x * x + y * y) / twoss) * np.cos(2.0 * (r0x * px + r0y * py))
    return gp * (bumps + sign * interference) / (1.0 + sign * state.packet_overlap)


def wigner(state: BeamState, pt: PhasePoint) -> float:
    """Wigner function W(r, p) at a single phase-space point."""
    return float(wigner_values(state, pt.r[0], pt.r[1], pt.p[0], pt.p[1]))


# ---------------------------------------------------------------------------
# Grids, scans, normalization
# ---------------------------------------------------------------------------


def phase_space_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Uniform endpoint-exclusive grid; contains 0 exactly for even ``n``
    on a symmetric interval."""
    return lo + (hi - lo) * np.arange(n) / n


@dataclass(frozen=True)
class NegativityScan:
    min_value: float
    min_location: PhasePoint
    negative_volume_fraction: float
    grid_n: int
    mode: str


def _default_boxes(state: BeamState) -> tuple[Interval, Interval, Interval, Interval]:
    sx, sy = state.widths
    r0x, r0y = (abs(v) for v in state.r0_vec)
    rx = 4.0 * sx + r0x
    ry = 4.0 * sy + r0y
    return (
        Interval(-rx, rx),
        Interval(-ry, ry),
        Interval(-4.0 / sx, 4.0 / sx),
        Interval(-4.0 / sy, 4.0 / sy),
    )


def negativity_scan(
    state: BeamState,
    r_box: tuple[Interval, Interval] | None = None,
    p_box: tuple[Interval, Interval] | None = None,
    grid_n: int | None = None,
    mode: str = "slice",
) -> NegativityScan:
    """Exhaustive grid scan for Wigner-function negativity.

    ``mode='slice'`` scans the (u, p_u) plane along the packet-separation
    axis with the transverse coordinates fixed at zero (the plotting
    convention ``y = p_y = 0`` when ``r0`` is along x); ``mode='full'``
    scans the whole 4-D box.  ``negative_volume_fraction`` is the fraction
    of grid cells with W < 0; ``min_value`` is the raw grid minimum.

    The boxes must cover at least ``+/-4 sigma`` in position and
    ``+/-4/sigma`` in momentum; defaults extend the position box by ``r0``
    so both packets are inside.
    """
    if mode not in ("slice", "full"):
        raise ValueError(f"mode must be 'slice' or 'full', got {mode!r}")
    if grid_n is None:
        grid_n = 128 if mode == "slice" else 32
    if grid_n < 16:
        raise ValueError("grid_n must be >= 16")
    dx, dy, dpx, dpy = _default_boxes(state)
    bx, by = r_box if r_box is not None else (dx, dy)
    bpx, bpy = p_box if p_box is not None else (dpx, dpy)
    sx, sy = state.widths
    for iv, need, label in (
        (bx, 4.0 * sx, "r_box[0]"), (by, 4.0 * sy, "r_box[1]"),
        (bpx, 4.0 / sx, "p_box[0]"), (bpy, 4.0 / sy, "p_box[1]"),
    ):
        if iv.lo > -need or iv.hi < need:
            raise ValueError(f"{label} must cover at least +/-{need:g}")

    if mode == "slice":
        # Slice along the separation direction (x axis when phi_r0 = 0).
        ex, ey = math.cos(state.phi_r0), math.sin(state.phi_r0)
        u = phase_space_grid(bx.lo, bx.hi, grid_n)
        pu = phase_space_grid(bpx.lo, bpx.hi, grid_n)
        U, PU = np.meshgrid(u, pu, indexing="ij")
        w = wigner_values(state, U * ex, U * ey, PU * ex, PU * ey)
        flat = int(np.argmin(w))
        umin, pmin = float(U.ravel()[flat]), float(PU.ravel()[flat])
        loc = PhasePoint(r=(umin * ex, umin * ey), p=(pmin * ex, pmin * ey))
    else:
        xs = phase_space_grid(bx.lo, bx.hi, grid_n)
        ys = phase_space_grid(by.lo, by.hi, grid_n)
        pxs = phase_space_grid(bpx.lo, bpx.hi, grid_n)
        pys = phase_space_grid(bpy.lo, bpy.hi, grid_n)
        X, Y, PX, PY = np.meshgrid(xs, ys, pxs, pys, indexing="ij")
        w = wigner_values(state, X, Y, PX, PY)
        flat = int(np.argmin(w))
        loc = PhasePoint(
            r=(float(X.ravel()[flat]), float(Y.ravel()[flat])),
            p=(float(PX.ravel()[flat]), float(PY.ravel()[flat])),
        )
    return NegativityScan(
        min_value=float(w.min()),
        min_location=loc,
        negative_volume_fraction=float(np.count_nonzero(w < 0.0) / w.size),
        grid_n=grid_n,
        mode=mode,
    )


def wigner_normalization(
    state: BeamState, spec: QuadratureSpec | None = None
) -> QuadratureResult:
    """Integrate W over its truncation box by honest 4-D cubature.

    The box spans 6 widths around the packet centers in position and
    4.5 inverse widths in momentum, so truncation is far below the
    quadrature tolerance.  Initial panels resolve the packet widths and,
    on the momentum axis along ``r0``, the interference fringe period.
    """
    if spec is None:
        spec = QuadratureSpec(rel_tol=1e-4, abs_tol=1e-6, max_subdivisions=200_000)
    sx, sy = state.widths
    r0x, r0y = (abs(v) for v in state.r0_vec)
    rx, ry = 6.0 * sx + r0x, 6.0 * sy + r0y
    px, py = 4.5 / sx, 4.5 / sy
    box = [Interval(-rx, rx), Interval(-ry, ry), Interval(-px, px), Interval(-py, py)]
    # Panels of about one packet width per axis; the fringe safeguard on the
    # momentum axes applies only when an interference term is present.
    osc_x = oscillation_panels(2 * px, 2 * r0x) if state.is_cat else 1
    osc_y = oscillation_panels(2 * py, 2 * r0y) if state.is_cat else 1
    splits = [
        max(4, math.ceil(rx / sx)),
        max(4, math.ceil(ry / sy)),
        max(4, math.ceil(px * sx), osc_x),
        max(4, math.ceil(py * sy), osc_y),
    ]

    def f(x, y, pxa, pya):
        return wigner_values(state, x, y, pxa, pya)

    return integrate_nd(f, box, spec, initial_splits=splits)
