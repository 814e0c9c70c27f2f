"""Command-line front end.

Five subcommands: ``wigner`` (phase-space grid export), ``scatter``
(event densities over a theta x phi grid), ``asymmetry``, ``sweep`` and
``validate`` (oracle cross-checks plus the validity report).

Lengths are in Bohr radii, momenta in 1/a, CLI angles in degrees.  Every
run with ``--out`` writes a JSON sidecar ``<out>.config.json`` with the
fully resolved configuration; ``catscatter --config sidecar.json``
reproduces the run bit-identically.  All numbers are serialized with 17
significant digits.  Exit codes: 0 success, 1 input error, 2 validation
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import AsymmetrySpec, azimuthal_asymmetry, sweep as run_sweep
from .errors import CatscatterError
from .quadrature import Interval, QuadratureSpec, integrate_1d, integrate_nd
from .scattering import (
    ScatteringConfig,
    cross_section,
    event_density,
    event_density_cat_quadrature,
    event_density_general,
    validity_check,
)
from .states import (
    BeamState,
    PhasePoint,
    momentum_from_keV,
    phase_space_grid,
    wigner_normalization,
    wigner_values,
)
from .targets import Kinematics, TargetProfile

DEG = math.pi / 180.0

_STATE_CHOICES = ("gaussian", "even-cat", "odd-cat", "mixture", "aniso")
_VARIANT_BY_FLAG = {
    "gaussian": "gaussian",
    "even-cat": "even_cat",
    "odd-cat": "odd_cat",
    "mixture": "incoherent_pair",
    "aniso": "anisotropic",
}
_METHOD_BY_FLAG = {
    "auto": "auto",
    "general4d": "general4d",
    "quad2d": "quadrature2d",
    "closed": "closed_form",
}


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # input errors exit 1, not argparse's 2
        raise _InputError(message)


def fmt(x: float) -> str:
    """17 significant digits; exact float round-trip."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def parse_grid(text: str, what: str) -> list[float]:
    """'A' -> [A]; 'A:B:N' -> N points from A to B inclusive."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            return [lo] if n == 1 else list(np.linspace(lo, hi, n))
    except ValueError:
        pass
    raise _InputError(f"--{what}: expected 'A' or 'A:B:N', got {text!r}")


@dataclass
class RunConfig:
    """Fully resolved run description; the sidecar serializes this."""

    subcommand: str
    state: str = "gaussian"
    sigma_perp: float = 2.0
    sigma_x: float | None = None
    sigma_y: float | None = None
    r0: float = 0.0
    phi_r0_deg: float = 0.0
    sigma_z: float = 10.0
    p_i: float = 10.0
    p_f: float | None = None
    sigma_t: float | None = None
    b0x: float = 0.0
    b0y: float = 0.0
    wide: bool = True
    theta_deg: list[float] = field(default_factory=lambda: [10.0])
    phi_deg: list[float] | None = None
    phi_grid: int = 16
    metric: str = "para-perp"
    method: str = "auto"
    tol: float | None = None
    ne: int = 1
    grid: int = 128
    mode: str = "slice"
    axis: str | None = None
    values: list[float] | None = None
    r0_ratio: float | None = None
    out: str | None = None
    format: str = "csv"
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        data.pop("version", None)
        try:
            return cls(**data, version=__version__)
        except TypeError as exc:
            raise _InputError(f"config file field error: {exc}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--state", choices=_STATE_CHOICES, default="gaussian")
    p.add_argument("--sigma-perp", type=float, default=2.0, metavar="F")
    p.add_argument("--sigma-x", type=float, metavar="F")
    p.add_argument("--sigma-y", type=float, metavar="F")
    p.add_argument("--r0", type=float, default=0.0, metavar="F",
                   help="half the packet separation [a]")
    p.add_argument("--phi-r0", type=float, default=0.0, metavar="DEG")
    p.add_argument("--sigma-z", type=float, default=10.0, metavar="F")
    p.add_argument("--pi", dest="p_i", type=float, default=10.0, metavar="F")
    p.add_argument("--pf", dest="p_f", type=float, metavar="F")
    p.add_argument("--ev", type=float, metavar="KEV",
                   help="kinetic energy in keV (overrides --pi)")
    p.add_argument("--sigma-t", type=float, metavar="F")
    p.add_argument("--b0x", type=float, default=0.0, metavar="F")
    p.add_argument("--b0y", type=float, default=0.0, metavar="F")
    p.add_argument("--wide", action="store_true",
                   help="analytic wide-target limit (reports cross sections)")
    p.add_argument("--theta", default="10", metavar="A[:B:N]")
    p.add_argument("--phi", metavar="A[:B:N]")
    p.add_argument("--phi-grid", type=int, default=16, metavar="N")
    p.add_argument("--metric", choices=("para-perp", "minmax"), default="para-perp")
    p.add_argument("--method", choices=tuple(_METHOD_BY_FLAG), default="auto")
    p.add_argument("--tol", type=float, metavar="F")
    p.add_argument("--ne", type=int, default=1, metavar="N")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _build_parser() -> _Parser:
    top = _Parser(prog="catscatter", description=__doc__)
    top.add_argument("--config", metavar="PATH",
                     help="re-run from a sidecar config file")
    sub = top.add_subparsers(dest="subcommand")
    for name, doc in (
        ("wigner", "export a Wigner-function grid"),
        ("scatter", "event densities over a theta x phi grid"),
        ("asymmetry", "azimuthal asymmetry with its phi scan"),
        ("sweep", "asymmetry sweep along one parameter axis"),
        ("validate", "oracle cross-checks and validity report"),
    ):
        sp = sub.add_parser(name, help=doc)
        _add_common(sp)
        if name == "wigner":
            sp.add_argument("--grid", type=int, metavar="N",
                            help="points per axis (default 128 slice, 32 full)")
            sp.add_argument("--mode", choices=("slice", "full"), default="slice")
        if name == "sweep":
            sp.add_argument("--axis", choices=("r0", "sigma-perp", "theta", "pi"),
                            required=True)
            sp.add_argument("--values", required=True, metavar="V1,V2,...")
            sp.add_argument("--r0-ratio", type=float, metavar="F",
                            help="hold r0 = ratio * sigma_perp on sigma-perp sweeps")
    return top


def _resolve(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    cfg.state = args.state
    cfg.sigma_perp = args.sigma_perp
    cfg.sigma_x, cfg.sigma_y = args.sigma_x, args.sigma_y
    cfg.r0 = args.r0
    cfg.phi_r0_deg = args.phi_r0
    cfg.sigma_z = args.sigma_z
    cfg.p_i = momentum_from_keV(args.ev) if args.ev is not None else args.p_i
    cfg.p_f = args.p_f
    cfg.sigma_t = args.sigma_t
    cfg.b0x, cfg.b0y = args.b0x, args.b0y
    cfg.wide = bool(args.wide or args.sigma_t is None)
    cfg.theta_deg = parse_grid(args.theta, "theta")
    cfg.phi_deg = parse_grid(args.phi, "phi") if args.phi else None
    cfg.phi_grid = args.phi_grid
    cfg.metric = args.metric
    cfg.method = args.method
    cfg.tol = args.tol
    cfg.ne = args.ne
    cfg.out = args.out
    cfg.format = args.format
    if args.subcommand == "wigner":
        cfg.mode = args.mode
        cfg.grid = args.grid if args.grid else (128 if cfg.mode == "slice" else 32)
    if args.subcommand == "sweep":
        cfg.axis = args.axis
        try:
            cfg.values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise _InputError(f"--values: expected comma-separated floats, got {args.values!r}")
        if not cfg.values:
            raise _InputError("--values: empty list")
        cfg.r0_ratio = args.r0_ratio
    return cfg


def build_state(cfg: RunConfig) -> BeamState:
    variant = _VARIANT_BY_FLAG[cfg.state]
    common = dict(sigma_z=cfg.sigma_z, p_i=cfg.p_i)
    if variant == "anisotropic":
        if cfg.sigma_x is None or cfg.sigma_y is None:
            raise _InputError("--state aniso needs --sigma-x and --sigma-y")
        return BeamState.anisotropic(cfg.sigma_x, cfg.sigma_y, **common)
    if variant == "gaussian":
        return BeamState.gaussian(cfg.sigma_perp, **common)
    maker = {"even_cat": BeamState.even_cat, "odd_cat": BeamState.odd_cat,
             "incoherent_pair": BeamState.incoherent_pair}[variant]
    return maker(cfg.sigma_perp, cfg.r0, phi_r0=cfg.phi_r0_deg * DEG, **common)


def build_target(cfg: RunConfig) -> TargetProfile:
    if cfg.wide:
        return TargetProfile.wide()
    return TargetProfile.gaussian(cfg.sigma_t, (cfg.b0x, cfg.b0y))


def _quad_spec(cfg: RunConfig) -> QuadratureSpec | None:
    return QuadratureSpec(rel_tol=cfg.tol) if cfg.tol else None


def _kin(cfg: RunConfig, theta_deg: float, phi_deg: float) -> Kinematics:
    p_f = cfg.p_f if cfg.p_f is not None else cfg.p_i
    return Kinematics(cfg.p_i, p_f, theta_deg * DEG, phi_deg * DEG)


def _phis(cfg: RunConfig) -> list[float]:
    if cfg.phi_deg is not None:
        return cfg.phi_deg
    return [360.0 * k / cfg.phi_grid for k in range(cfg.phi_grid)]


# ---------------------------------------------------------------------------
# Subcommands: each returns (header, rows, extra_json)
# ---------------------------------------------------------------------------


def _run_wigner(cfg: RunConfig):
    state = build_state(cfg)
    sx, sy = state.widths
    r0x, r0y = (abs(v) for v in state.r0_vec)
    rows = []
    if cfg.mode == "slice":
        lim_u = 4.0 * sx + state.r0
        lim_p = 4.0 / sx
        u = phase_space_grid(-lim_u, lim_u, cfg.grid)
        pu = phase_space_grid(-lim_p, lim_p, cfg.grid)
        ex, ey = math.cos(state.phi_r0), math.sin(state.phi_r0)
        U, PU = np.meshgrid(u, pu, indexing="ij")
        W = wigner_values(state, U * ex, U * ey, PU * ex, PU * ey)
        for (uu, pp, ww) in zip(U.ravel(), PU.ravel(), W.ravel()):
            rows.append((float(uu), float(pp), float(ww)))
        return ["x", "px", "w"], rows, None
    lim_x, lim_y = 4.0 * sx + r0x, 4.0 * sy + r0y
    gx = phase_space_grid(-lim_x, lim_x, cfg.grid)
    gy = phase_space_grid(-lim_y, lim_y, cfg.grid)
    gpx = phase_space_grid(-4.0 / sx, 4.0 / sx, cfg.grid)
    gpy = phase_space_grid(-4.0 / sy, 4.0 / sy, cfg.grid)
    X, Y, PX, PY = np.meshgrid(gx, gy, gpx, gpy, indexing="ij")
    W = wigner_values(state, X, Y, PX, PY)
    for vals in zip(X.ravel(), Y.ravel(), PX.ravel(), PY.ravel(), W.ravel()):
        rows.append(tuple(float(v) for v in vals))
    return ["x", "y", "px", "py", "w"], rows, None


def _run_scatter(cfg: RunConfig):
    state, target = build_state(cfg), build_target(cfg)
    sc = ScatteringConfig(state=state, target=target, n_e=cfg.ne, quad=_quad_spec(cfg))
    method = _METHOD_BY_FLAG[cfg.method]
    rows = []
    for th in cfg.theta_deg:
        for ph in _phis(cfg):
            ed = event_density(sc, _kin(cfg, th, ph), method=method)
            if ed.wide_limit:
                dnu, dsig = math.nan, ed.value
            else:
                dnu = ed.value
                dsig = cross_section(ed, cfg.ne) if ed.sigma_sq is not None else math.nan
            rows.append((th, ph, dnu, dsig, ed.err_est, ed.method))
    return ["theta_deg", "phi_deg", "dnu", "dsigma", "err_est", "method"], rows, None


def _asym_spec(cfg: RunConfig, theta_deg: float) -> AsymmetrySpec:
    state, target = build_state(cfg), build_target(cfg)
    sc = ScatteringConfig(state=state, target=target, n_e=cfg.ne, quad=_quad_spec(cfg))
    return AsymmetrySpec(
        cfg=sc, kin_base=_kin(cfg, theta_deg, cfg.phi_r0_deg),
        phi_grid_n=max(8, cfg.phi_grid),
        metric=cfg.metric.replace("-", "_"),
        method=_METHOD_BY_FLAG[cfg.method],
    )


def _run_asymmetry(cfg: RunConfig):
    th = cfg.theta_deg[0]
    res = azimuthal_asymmetry(_asym_spec(cfg, th))
    rows = [(cfg.r0, th, res.A, res.metric)]
    extra = {"phi_scan": [[p, v] for p, v in res.phi_scan],
             "params": res.params_echo}
    return ["axis_value", "theta_deg", "A", "metric"], rows, extra


def _run_sweep(cfg: RunConfig):
    axis = {"r0": "r0", "sigma-perp": "sigma_perp", "theta": "theta", "pi": "p_i"}[cfg.axis]
    values = list(cfg.values)
    if axis == "theta":
        values = [v * DEG for v in values]
    spec = _asym_spec(cfg, cfg.theta_deg[0])
    rows_out = []
    scans = []
    for row in run_sweep(spec, axis, values, r0_ratio=cfg.r0_ratio):
        shown = row.value / DEG if axis == "theta" else row.value
        if row.result is None:
            rows_out.append((shown, math.nan, math.nan, f"error:{row.error}"))
            scans.append({"value": shown, "error": row.error})
        else:
            rows_out.append((shown, row.result.theta / DEG, row.result.A, row.result.metric))
            scans.append({"value": shown,
                          "phi_scan": [[p, v] for p, v in row.result.phi_scan]})
    return ["axis_value", "theta_deg", "A", "metric"], rows_out, {"points": scans}


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _run_validate(cfg: RunConfig):
    """Oracle battery: quadrature identities, phase-space identities,
    three-method agreement, symmetry nulls, and the validity report."""
    checks: list[tuple[str, bool, str]] = []

    def check(name: str, ok: bool, detail: str) -> None:
        checks.append((name, bool(ok), detail))

    r = integrate_1d(lambda x: np.exp(-x), Interval(0.0, math.inf))
    check("quad exp tail", abs(r.value - 1.0) <= 1e-8, f"|{fmt(r.value)} - 1| <= 1e-08")
    r = integrate_1d(lambda x: x * x, Interval(0.0, 1.0))
    check("quad cubic", abs(r.value - 1.0 / 3.0) <= 1e-12, f"x^2 -> {fmt(r.value)}")
    r = integrate_nd(lambda x, y: np.exp(-x * x - y * y) / math.pi,
                     [Interval(-8, 8), Interval(-8, 8)],
                     QuadratureSpec(rel_tol=1e-12, abs_tol=1e-13),
                     initial_splits=[4, 4])
    check("quad 2d gaussian", abs(r.value - 1.0) <= 1e-10, f"-> {fmt(r.value)}")

    pi2 = 1.0 / math.pi ** 2
    st_e = BeamState.even_cat(2.0, 4.0)
    st_o = BeamState.odd_cat(2.0, 4.0)
    from .states import wigner as wig  # local alias keeps module top lean
    w0 = wig(BeamState.gaussian(2.0), PhasePoint((0, 0), (0, 0)))
    check("wigner gaussian origin", abs(w0 - pi2) <= 1e-12, fmt(w0))
    we = wig(st_e, PhasePoint((0, 0), (0, 0)))
    wo = wig(st_o, PhasePoint((0, 0), (0, 0)))
    check("wigner even-cat origin", abs(we - pi2) <= 1e-12, fmt(we))
    check("wigner odd-cat origin", abs(wo + pi2) <= 1e-12, fmt(wo))
    nrm = wigner_normalization(st_e)
    check("wigner normalization", abs(nrm.value - 1.0) <= 1e-4, fmt(nrm.value))

    tight2 = QuadratureSpec(rel_tol=1e-8, max_subdivisions=20_000)
    tight1 = QuadratureSpec(rel_tol=1e-10)
    wide = TargetProfile.wide()
    worst = 0.0
    for st in (st_e, st_o):
        for th in (5.0, 10.0):
            kin = Kinematics.elastic(10.0, th * DEG, 0.4)
            c = event_density(ScatteringConfig(st, wide, quad=tight1), kin,
                              method="closed_form")
            q = event_density_cat_quadrature(
                ScatteringConfig(st, wide, quad=tight2), kin)
            worst = max(worst, abs(c.value - q.value) / abs(q.value))
    check("three-method closed vs quad2d", worst <= 1e-6, f"max rel {worst:.3e} <= 1e-06")

    tgt = TargetProfile.gaussian(20.0)
    kin = Kinematics.elastic(10.0, 10.0 * DEG, 0.7)
    g4 = event_density_general(ScatteringConfig(st_e, tgt), kin)
    q2 = event_density_cat_quadrature(ScatteringConfig(st_e, tgt, quad=tight2), kin)
    rel = abs(g4.value - q2.value) / abs(q2.value)
    check("three-method general4d vs quad2d", rel <= 1e-3, f"rel {rel:.3e} <= 1e-03")

    stg = BeamState.gaussian(2.0)
    sc = ScatteringConfig(stg, TargetProfile.gaussian(20.0, (3.0, 0.0)), quad=tight2)
    vals = [event_density(sc, Kinematics.elastic(10.0, 10.0 * DEG, f)).value
            for f in (0.0, 1.0, 2.0, 4.0)]
    spread = (max(vals) - min(vals)) / max(vals)
    check("gaussian off-axis phi flat", spread <= 1e-6, f"rel spread {spread:.3e}")

    spec = AsymmetrySpec(cfg=ScatteringConfig(BeamState.incoherent_pair(2.0, 4.0), wide),
                         kin_base=Kinematics.elastic(10.0, 10.0 * DEG), phi_grid_n=8)
    a_mix = azimuthal_asymmetry(spec).A
    check("mixture asymmetry null", abs(a_mix) <= 1e-8, fmt(a_mix))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = AsymmetrySpec(cfg=ScatteringConfig(BeamState.odd_cat(2.0, 2.0), wide),
                             kin_base=Kinematics.elastic(10.0, 10.0 * DEG), phi_grid_n=8)
        a_odd = azimuthal_asymmetry(spec).A
    check("odd-cat asymmetry band", 0.03 <= abs(a_odd) <= 0.2, fmt(a_odd))

    lines = []
    n_fail = 0
    for name, ok, detail in checks:
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        n_fail += 0 if ok else 1

    lines.append("validity report (configured state):")
    state, target = build_state(cfg), build_target(cfg)
    for cond in validity_check(state, target):
        status = "ok" if cond.satisfied else "warn"
        lines.append(f"  {status:4s} {cond.condition}: margin {fmt(cond.margin)}")
    lines.append(f"{len(checks) - n_fail}/{len(checks)} oracle checks passed")
    return lines, n_fail == 0


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------


def _render_csv(header: Sequence[str], rows: Sequence[tuple]) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(out) + "\n"


def _render_json(cfg: RunConfig, header, rows, extra) -> str:
    payload = {
        "config": asdict(cfg),
        "columns": list(header),
        "rows": [[v for v in row] for row in rows],
    }
    if extra:
        payload["extra"] = extra
    return json.dumps(payload, indent=2) + "\n"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(cfg.out + ".config.json", "w", encoding="utf-8") as fh:
            fh.write(cfg.to_json() + "\n")
        print(f"wrote {cfg.out}")
    else:
        sys.stdout.write(text)


def run(argv: Sequence[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                cfg = RunConfig.from_json(fh.read())
        elif args.subcommand:
            cfg = _resolve(args)
        else:
            raise _InputError("a subcommand or --config is required")

        if cfg.subcommand == "validate":
            lines, ok = _run_validate(cfg)
            _emit(cfg, "\n".join(lines) + "\n")
            return 0 if ok else 2

        runner = {
            "wigner": _run_wigner,
            "scatter": _run_scatter,
            "asymmetry": _run_asymmetry,
            "sweep": _run_sweep,
        }.get(cfg.subcommand)
        if runner is None:
            raise _InputError(f"unknown subcommand {cfg.subcommand!r}")
        header, rows, extra = runner(cfg)
        text = (_render_csv(header, rows) if cfg.format == "csv"
                else _render_json(cfg, header, rows, extra))
        _emit(cfg, text)
        return 0
    except _InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (CatscatterError, ValueError, OSError) as exc:
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
