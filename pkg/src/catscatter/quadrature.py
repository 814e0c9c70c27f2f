"""Deterministic adaptive quadrature over intervals and 2-D/4-D boxes.

The engine subdivides panels carrying an embedded (nested) rule pair:

* 1-D and 2-D: 15-point Gauss-Kronrod with the embedded 7-point Gauss rule
  (tensor product in 2-D), error estimated from the K15-G7 difference.
* 4-D: Genz-Malik degree-7 rule with the embedded degree-5 rule
  (57 points per box in 4-D), the standard workhorse for adaptive
  cubature in moderate dimension.

Refinement is global: on every round the boxes holding the dominant error
are bisected along the axis with the largest fourth-difference indicator.
All reductions use ``math.fsum``, the panel bookkeeping is ordered, and no
randomness enters anywhere, so two calls with identical inputs return
bit-identical results.  Everything is pure and reentrant; callers may
integrate from many threads concurrently.

Integrands must be vectorized: ``f`` receives one ``numpy`` array per
coordinate and returns an array of the same shape.  Plain scalar callables
are detected on the first evaluation and wrapped in a loop fallback.

Semi-infinite upper limits are handled by adaptive extension in doubling
windows, which requires the integrand to decay at least exponentially
(documented contract of :func:`integrate_1d`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonConvergence, NonFiniteIntegrand, UnsupportedDimension

__all__ = [
    "Interval",
    "QuadratureSpec",
    "QuadratureResult",
    "DEFAULT_SPEC_1D",
    "DEFAULT_SPEC_2D",
    "DEFAULT_SPEC_4D",
    "integrate_1d",
    "integrate_nd",
    "oscillation_panels",
]


@dataclass(frozen=True)
class Interval:
    """Integration interval; ``hi`` may be ``math.inf`` (upper end only)."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.lo):
            raise ValueError(f"interval lower bound must be finite, got {self.lo}")
        if not self.lo < self.hi:
            raise ValueError(f"interval requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for one adaptive integration.

    The engine stops when the summed panel error drops below
    ``max(abs_tol, rel_tol * |value|)``.  ``max_subdivisions`` counts panel
    bisections (initial panelization is free).  Panels are never split
    below ``min_panel_width`` per axis.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 10_000
    min_panel_width: float = 0.0

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.min_panel_width < 0:
            raise ValueError("min_panel_width must be >= 0")


DEFAULT_SPEC_1D = QuadratureSpec(rel_tol=1e-8)
DEFAULT_SPEC_2D = QuadratureSpec(rel_tol=1e-6, max_subdivisions=20_000)
DEFAULT_SPEC_4D = QuadratureSpec(rel_tol=1e-4, max_subdivisions=200_000)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    err_est: float
    neval: int = 0
    subdivisions: int = 0


def oscillation_panels(width: float, phase_rate: float, cap: int = 8192) -> int:
    """Initial panel count so each panel spans at most pi/8 of phase.

    ``phase_rate`` is the maximum |d(phase)/dx| of a cosine factor on the
    axis.  Keeping the per-panel phase under pi/8 prevents the adaptive
    scheme from locking onto an aliased estimate of an oscillatory
    integrand.
    """
    if phase_rate <= 0 or width <= 0:
        return 1
    n = int(math.ceil(width * phase_rate / (math.pi / 8.0)))
    return max(1, min(n, cap))


# ---------------------------------------------------------------------------
# Embedded rules
# ---------------------------------------------------------------------------

# 15-point Kronrod abscissae and weights with the embedded 7-point Gauss
# weights (zero on Kronrod-only nodes).
_XGK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG_EMBEDDED = np.zeros(15)
_WG_EMBEDDED[1::2] = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])


class _TensorGaussKronrod:
    """Tensor-product K15/G7 rule for 1-D and 2-D boxes."""

    def __init__(self, ndim: int):
        self.ndim = ndim
        grids = np.meshgrid(*([_XGK] * ndim), indexing="ij")
        self.nodes = np.stack([g.ravel() for g in grids], axis=-1)  # (npts, d)
        self.npts = self.nodes.shape[0]

        def tensor(ws: Sequence[np.ndarray]) -> np.ndarray:
            out = ws[0]
            for w in ws[1:]:
                out = np.multiply.outer(out, w)
            return out.ravel()

        self.w_high = tensor([_WGK] * ndim)
        self.w_low = tensor([_WG_EMBEDDED] * ndim)
        # Mixed weights (Gauss on one axis, Kronrod elsewhere) give a
        # per-axis error indicator used to pick the split direction.
        self.w_axis = [
            tensor([_WG_EMBEDDED if i == ax else _WGK for i in range(ndim)])
            for ax in range(ndim)
        ]

    def apply(self, vals: np.ndarray, halves: np.ndarray):
        """vals: (nbox, npts); halves: (nbox, d) half-widths."""
        scale = np.prod(halves, axis=1)
        high = vals @ self.w_high
        low = vals @ self.w_low
        value = high * scale
        err = np.abs(high - low) * scale
        scores = np.stack(
            [np.abs(high - vals @ w) for w in self.w_axis], axis=1
        )
        return value, err, scores


class _GenzMalik:
    """Genz-Malik degree-7 rule with embedded degree-5 error estimate."""

    def __init__(self, ndim: int):
        if ndim < 2:
            raise ValueError("Genz-Malik rule needs ndim >= 2")
        self.ndim = ndim
        d = ndim
        l2 = math.sqrt(9.0 / 70.0)
        l3 = math.sqrt(9.0 / 10.0)
        l4 = math.sqrt(9.0 / 10.0)
        l5 = math.sqrt(9.0 / 19.0)

        pts = [np.zeros(d)]
        idx2, idx3 = [], []
        for i in range(d):
            for sgn in (+1.0, -1.0):
                e = np.zeros(d)
                e[i] = sgn * l2
                idx2.append(len(pts))
                pts.append(e)
            for sgn in (+1.0, -1.0):
                e = np.zeros(d)
                e[i] = sgn * l3
                idx3.append(len(pts))
                pts.append(e)
        n4_start = len(pts)
        for i in range(d):
            for j in range(i + 1, d):
                for si in (+1.0, -1.0):
                    for sj in (+1.0, -1.0):
                        e = np.zeros(d)
                        e[i], e[j] = si * l4, sj * l4
                        pts.append(e)
        n5_start = len(pts)
        for corner in range(2 ** d):
            e = np.array(
                [l5 if (corner >> k) & 1 else -l5 for k in range(d)]
            )
            pts.append(e)

        self.nodes = np.array(pts)
        self.npts = len(pts)
        self.idx2 = np.array(idx2).reshape(d, 2)  # per-axis (+,-) rows
        self.idx3 = np.array(idx3).reshape(d, 2)
        self.ratio = (l2 / l3) ** 2

        vol = 2.0 ** d
        w = np.zeros(self.npts)
        w[0] = vol * (12824.0 - 9120.0 * d + 400.0 * d * d) / 19683.0
        w[self.idx2.ravel()] = vol * 980.0 / 6561.0
        w[self.idx3.ravel()] = vol * (1820.0 - 400.0 * d) / 19683.0
        w[n4_start:n5_start] = vol * 200.0 / 19683.0
        w[n5_start:] = vol * (6859.0 / 19683.0) / (2.0 ** d)
        self.w_high = w

        wl = np.zeros(self.npts)
        wl[0] = vol * (729.0 - 950.0 * d + 50.0 * d * d) / 729.0
        wl[self.idx2.ravel()] = vol * 245.0 / 486.0
        wl[self.idx3.ravel()] = vol * (265.0 - 100.0 * d) / 1458.0
        wl[n4_start:n5_start] = vol * 25.0 / 729.0
        self.w_low = wl

    def apply(self, vals: np.ndarray, halves: np.ndarray):
        scale = np.prod(halves, axis=1)
        high = vals @ self.w_high
        low = vals @ self.w_low
        value = high * scale
        err = np.abs(high - low) * scale
        # Fourth-difference indicator per axis (Genz-Malik split heuristic).
        f0 = vals[:, 0][:, None]
        s2 = vals[:, self.idx2[:, 0]] + vals[:, self.idx2[:, 1]] - 2.0 * f0
        s3 = vals[:, self.idx3[:, 0]] + vals[:, self.idx3[:, 1]] - 2.0 * f0
        scores = np.abs(s2 - self.ratio * s3)
        return value, err, scores


_RULE_CACHE: dict[int, object] = {}


def _rule_for(ndim: int):
    if ndim not in _RULE_CACHE:
        _RULE_CACHE[ndim] = (
            _TensorGaussKronrod(ndim) if ndim <= 2 else _GenzMalik(ndim)
        )
    return _RULE_CACHE[ndim]


# ---------------------------------------------------------------------------
# Adaptive driver
# ---------------------------------------------------------------------------


class _VectorizedF:
    """Call wrapper that falls back to a scalar loop if ``f`` is not
    vectorized over numpy arrays."""

    def __init__(self, f: Callable):
        self.f = f
        self.scalar = False
        self.neval = 0

    def __call__(self, axes: list[np.ndarray]) -> np.ndarray:
        self.neval += axes[0].size
        if not self.scalar:
            try:
                out = np.asarray(self.f(*axes), dtype=float)
                if out.shape == axes[0].shape:
                    return out
            except (TypeError, ValueError):
                pass
            self.scalar = True
        flat = [np.ravel(ax) for ax in axes]
        out = np.fromiter(
            (float(self.f(*pt)) for pt in zip(*flat)),
            dtype=float,
            count=flat[0].size,
        )
        return out.reshape(axes[0].shape)


def _initial_boxes(box: Sequence[Interval], splits: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    edges = [
        np.linspace(iv.lo, iv.hi, n + 1) for iv, n in zip(box, splits)
    ]
    los = np.meshgrid(*[e[:-1] for e in edges], indexing="ij")
    his = np.meshgrid(*[e[1:] for e in edges], indexing="ij")
    lo = np.stack([a.ravel() for a in los], axis=-1)
    hi = np.stack([a.ravel() for a in his], axis=-1)
    return lo, hi


def _evaluate(fv: _VectorizedF, rule, lo: np.ndarray, hi: np.ndarray):
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    # points: (nbox, npts) per axis
    coords = [
        center[:, k][:, None] + half[:, k][:, None] * rule.nodes[:, k][None, :]
        for k in range(lo.shape[1])
    ]
    vals = fv(coords)
    if not np.isfinite(vals).all():
        raise NonFiniteIntegrand("integrand returned a non-finite value")
    return rule.apply(vals, half)


def _adapt(
    f: Callable,
    box: Sequence[Interval],
    spec: QuadratureSpec,
    initial_splits: Sequence[int],
) -> QuadratureResult:
    rule = _rule_for(len(box))
    fv = f if isinstance(f, _VectorizedF) else _VectorizedF(f)
    lo, hi = _initial_boxes(box, initial_splits)
    values, errs, scores = _evaluate(fv, rule, lo, hi)
    subdivisions = 0

    while True:
        total = math.fsum(values)
        err_total = math.fsum(errs)
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if err_total <= tol:
            break

        widths = hi - lo
        split_axis = np.argmax(scores, axis=1)
        splittable = (
            np.take_along_axis(widths, split_axis[:, None], axis=1).ravel()
            > 2.0 * spec.min_panel_width
        )
        order = np.lexsort((np.arange(len(errs)), -errs))
        order = order[splittable[order]]
        # Split the smallest prefix of worst boxes whose removal would pull
        # the remaining error comfortably under tolerance.
        if len(order):
            remaining = err_total - np.cumsum(errs[order])
            count = int(np.searchsorted(-remaining, -0.45 * tol)) + 1
            count = max(1, min(count, len(order)))
        else:
            count = 0
        if count == 0:
            raise NonConvergence(
                "tolerance not met and no panel is splittable "
                f"(err={err_total:.3e}, tol={tol:.3e})"
            )
        budget = spec.max_subdivisions - subdivisions
        if budget <= 0:
            raise NonConvergence(
                f"max_subdivisions={spec.max_subdivisions} exhausted "
                f"(err={err_total:.3e}, tol={tol:.3e})"
            )
        picked = order[: min(count, budget)]
        subdivisions += len(picked)

        ax = split_axis[picked]
        mid = 0.5 * (
            np.take_along_axis(lo[picked], ax[:, None], axis=1)
            + np.take_along_axis(hi[picked], ax[:, None], axis=1)
        )
        lo_l, hi_l = lo[picked].copy(), hi[picked].copy()
        lo_r, hi_r = lo[picked].copy(), hi[picked].copy()
        np.put_along_axis(hi_l, ax[:, None], mid, axis=1)
        np.put_along_axis(lo_r, ax[:, None], mid, axis=1)

        keep = np.ones(len(errs), dtype=bool)
        keep[picked] = False
        new_lo = np.concatenate([lo[keep], lo_l, lo_r])
        new_hi = np.concatenate([hi[keep], hi_l, hi_r])
        v_new, e_new, s_new = _evaluate(
            fv, rule, np.concatenate([lo_l, lo_r]), np.concatenate([hi_l, hi_r])
        )
        values = np.concatenate([values[keep], v_new])
        errs = np.concatenate([errs[keep], e_new])
        scores = np.concatenate([scores[keep], s_new])
        lo, hi = new_lo, new_hi

    return QuadratureResult(
        value=math.fsum(values),
        err_est=math.fsum(errs),
        neval=fv.neval,
        subdivisions=subdivisions,
    )


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def integrate_1d(
    f: Callable,
    domain: Interval,
    spec: QuadratureSpec | None = None,
    *,
    initial_panels: int = 1,
) -> QuadratureResult:
    """Adaptively integrate ``f`` over a finite or semi-infinite interval.

    Parameters
    ----------
    f : callable
        Integrand, finite on the domain interior.  Preferably vectorized
        (accepts and returns ndarrays); scalar callables are wrapped.
        For an infinite upper bound ``f`` must decay at least
        exponentially; the engine extends the domain in doubling windows
        until the running tail contribution is negligible.
    domain : Interval
        Integration interval; ``hi`` may be ``math.inf``.
    spec : QuadratureSpec, optional
        Tolerances; defaults to ``DEFAULT_SPEC_1D``.
    initial_panels : int
        Uniform panelization before refinement starts.  Use
        :func:`oscillation_panels` for integrands carrying a fast cosine.

    Returns
    -------
    QuadratureResult
        ``value`` with the engine's own error bound ``err_est``.

    Raises
    ------
    NonConvergence
        Subdivision budget exhausted before tolerance was met.
    NonFiniteIntegrand
        ``f`` produced NaN or infinity.
    """
    spec = spec or DEFAULT_SPEC_1D
    if not domain.infinite:
        return _adapt(f, [domain], spec, [max(1, initial_panels)])

    fv = _VectorizedF(f)
    acc: list[QuadratureResult] = []
    lo = domain.lo
    width = 16.0
    calm = 0
    total = 0.0
    for _ in range(60):
        seg = _adapt(fv, [Interval(lo, lo + width)], spec, [max(1, initial_panels)])
        acc.append(seg)
        total = math.fsum(r.value for r in acc)
        lo += width
        width *= 2.0
        thresh = max(spec.abs_tol, spec.rel_tol * abs(total)) / 8.0
        calm = calm + 1 if abs(seg.value) <= thresh else 0
        if calm >= 2:
            break
    else:
        raise NonConvergence(
            "semi-infinite tail still contributing after 60 doubling windows; "
            "integrand does not appear to decay"
        )
    return QuadratureResult(
        value=total,
        err_est=math.fsum(r.err_est for r in acc) + abs(acc[-1].value),
        neval=fv.neval,
        subdivisions=sum(r.subdivisions for r in acc),
    )


def integrate_nd(
    f: Callable,
    box: Sequence[Interval],
    spec: QuadratureSpec | None = None,
    *,
    initial_splits: Sequence[int] | None = None,
) -> QuadratureResult:
    """Adaptively integrate ``f`` over a finite 2-D or 4-D box.

    ``f`` receives one coordinate array per axis.  ``initial_splits``
    pre-panelizes each axis (oscillation safeguard); refinement then
    proceeds adaptively.  The result is deterministic and independent of
    evaluation order.
    """
    ndim = len(box)
    if ndim not in (2, 4):
        raise UnsupportedDimension(f"integrate_nd supports 2-D and 4-D, got {ndim}-D")
    for iv in box:
        if iv.infinite:
            raise ValueError("integrate_nd requires finite intervals")
    if spec is None:
        spec = DEFAULT_SPEC_2D if ndim == 2 else DEFAULT_SPEC_4D
    if initial_splits is None:
        initial_splits = [1] * ndim
    if len(initial_splits) != ndim:
        raise ValueError("initial_splits length must match box dimension")
    return _adapt(f, box, spec, [max(1, int(n)) for n in initial_splits])
