"""Command-line front end: ``riemannlab <subcommand> [flags]``.

Every subcommand writes a CSV (or JSON when --out ends in .json) plus a
``<out>.manifest.json`` run manifest, and prints a one-line summary.
Exit codes: 0 success, 2 invalid input or unwritable output, 3 numerical
failure (degenerate fit, aliasing guard, too-shallow expansion).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import binormal, diophantine, exp_sums, holder, turbulence
from ._validation import NumericalError, ValidationError, parse_rational
from .io import RunManifest, write_csv, write_json

OUT_DIR_ENV = "RIEMANNLAB_OUTPUT_DIR"

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _rational(text):
    try:
        return parse_rational(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _real(text):
    """Float, or exact rational for inputs like '1/3'."""
    if "/" in str(text):
        return _rational(text)
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as a number")
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return x


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as a comma list")


def _as_x0(x):
    """Exact rationals go to the exact code paths; integral values become int."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


# ------------------------------------------------------------- commands
# Each returns (columns, rows, summary, extra header entries).

def cmd_eval(a):
    kind = exp_sums.SeriesKind(a.kind)
    if kind is exp_sums.SeriesKind.R:
        v = exp_sums.eval_R(_as_x0(a.x0), _as_x0(a.t), a.N)
    elif kind is exp_sums.SeriesKind.R_TILDE:
        v = exp_sums.eval_R_tilde(float(a.x0), float(a.t), a.N)
    else:
        v = complex(exp_sums.eval_weierstrass(float(a.t), a.N))
    return ["re", "im"], [(v.real, v.imag)], f"re={v.real:.12g} im={v.imag:.12g}", {}


def cmd_trace(a):
    tr = exp_sums.curve_trace(float(a.x0), float(a.t_start), float(a.t_end), a.samples, a.N)
    rows = [(t, z.real, z.imag) for t, z in zip(tr.t_grid, tr.points)]
    return ["t", "re", "im"], rows, f"{len(tr)} points, last={tr.points[-1]:.6g}", {}


def cmd_gauss(a):
    g = exp_sums.gauss_sum(a.p, a.b, a.q)
    cls = "zero" if g.zero_class else "nonzero"
    row = (g.p, g.b, g.q, g.value.real, g.value.imag, g.modulus, cls)
    return (["p", "b", "q", "re", "im", "modulus", "class"], [row],
            f"value {g.value:.12g} modulus {g.modulus:.12g} class {cls}", {})


def cmd_cf(a):
    cf = diophantine.continued_fraction(a.t, a.depth)
    rows = [(n, c, p, q, mu) for n, (c, (p, q), mu) in
            enumerate(zip(cf.coefficients, cf.convergents, cf.exponents))]
    try:
        est = diophantine.irrationality_exponent_estimate(cf)
        summary = f"depth {cf.depth} ({cf.stop_reason}); mu estimate {est.value} [{est.status}]"
    except diophantine.InsufficientDepthError as exc:
        summary = f"depth {cf.depth} ({cf.stop_reason}); {exc}"
    return ["n", "a", "p", "q", "mu"], rows, summary, {"stop_reason": cf.stop_reason}


def _power_spec(a):
    return diophantine.LimsupSetSpec.power(a.mu, a.modulus)


def cmd_dioph_sum(a):
    ds = diophantine.duffin_schaeffer_partial_sums(_power_spec(a), a.q_max)
    rows = [(X, ds.partial_sums[X - 1]) for X in ds.checkpoints]
    return (["X", "partial_sum"], rows,
            f"{ds.diagnostic}; slope vs log X = {ds.log_slope:.6g}", {})


def cmd_dioph_measure(a):
    spec = _power_spec(a)
    u = diophantine.limsup_union(spec, a.q_min, a.q_max)
    extra = {}
    summary = f"measure {u.total_length:.12g} in {len(u)} intervals"
    if a.mc_points:
        m, se = diophantine.monte_carlo_measure(spec, a.q_min, a.q_max, a.mc_points, a.seed)
        extra = {"monte_carlo": m, "monte_carlo_stderr": se}
        summary += f"; Monte-Carlo {m:.6g} +- {se:.2g}"
    return ["lo", "hi"], [tuple(r) for r in u.intervals], summary, extra


def cmd_dioph_dim(a):
    Q = None if a.Q == 0 else a.Q
    r = diophantine.jarnik_box_dimension(Q, a.mu, range(a.j_min, a.j_max + 1))
    return (["j", "count"], list(zip(r.js.tolist(), r.counts.tolist())),
            f"slope {r.slope:.6g} (2/mu = {2 / a.mu:.6g})", {"slope": r.slope})


def cmd_scaling(a):
    r = holder.rational_scaling_fit(_as_x0(a.x0), a.p, a.q, (a.j_lo, a.j_hi), a.N)
    js = np.arange(a.j_lo, a.j_hi + 1)
    rows = list(zip(js.tolist(), r.h.tolist(), r.increments.tolist()))
    return (["j", "h", "increment"], rows,
            f"exponent {r.exponent:.6g} prefactor {r.prefactor:.6g} class {r.classification}",
            {"exponent": r.exponent, "prefactor": r.prefactor,
             "classification": r.classification})


def cmd_holder(a):
    if a.kind == "Weierstrass":
        est = holder.holder_exponent_weierstrass(float(a.t), a.j_min, a.j_max,
                                                 per_octave=a.per_octave)
    else:
        est = holder.holder_exponent_estimate(_as_x0(a.x0), _as_x0(a.t), a.j_min,
                                              a.j_max, a.N, per_octave=a.per_octave)
    js = np.arange(a.j_min, a.j_max + 1)
    rows = list(zip(js.tolist(), est.h.tolist(), est.osc.tolist()))
    flag = " (flagged: residual > 0.5)" if est.flagged else ""
    return (["j", "h", "osc"], rows,
            f"alpha_fit {est.alpha_fit:.6g} residual {est.residual:.3g}{flag}",
            {"alpha_fit": est.alpha_fit, "residual": est.residual})


def _spectrum(a):
    if a.grid != 2 ** a.j:
        raise ValidationError("--grid must equal 2^j")
    prefactor = a.prefactor
    if prefactor not in ("scaling", "analytic"):
        try:
            prefactor = float(prefactor)
        except ValueError:
            raise ValidationError(f"bad --prefactor {a.prefactor!r}")
    return holder.spectrum_estimate(_as_x0(a.x0), a.grid, a.j, N=a.N, kind=a.kind,
                                    oversample=a.oversample, prefactor=prefactor)


def cmd_spectrum(a):
    s = _spectrum(a)
    rows = list(zip(s.alpha.tolist(), s.d_hat.tolist(), s.counts.tolist()))
    return (["alpha_bin", "d_hat", "count"], rows,
            f"d_hat(0.60)={s.at(0.6):.3f} d_hat(0.75)={s.at(0.75):.3f} C={s.prefactor:.4g}",
            {"prefactor": s.prefactor, "typical_exponent": s.typical_exponent})


def cmd_flatness(a):
    c = turbulence.flatness_curve(_as_x0(a.x0), range(a.k_min, a.k_max + 1), a.band)
    rows = list(zip(c.N.tolist(), c.M_max.tolist(), c.quadrature.tolist(),
                    c.convolution.tolist(), c.tail_bound.tolist()))
    return (["N", "M_max", "F_quadrature", "F_convolution", "tail_bound"], rows,
            f"F from {c.quadrature[0]:.4g} to {c.quadrature[-1]:.4g}; "
            f"slope vs log2 N {c.growth_exponent:.4g}", {})


def _sf(a):
    return turbulence.structure_function_exponents(
        _as_x0(a.x0), a.p_list, range(a.j_min, a.j_max + 1), a.sf_grid, a.N)


def cmd_sf(a):
    t = _sf(a)
    rows = list(zip(t.p.tolist(), t.zeta.tolist(), t.residual.tolist()))
    z2 = dict(zip(t.p.tolist(), t.zeta.tolist())).get(2.0)
    return (["p", "zeta", "residual"], rows,
            f"zeta(2)={z2:.4g}" if z2 is not None else f"{len(rows)} exponents", {})


def cmd_fp_check(a):
    s = _spectrum(a)
    t = _sf(a)
    r = turbulence.frisch_parisi_check(s, t)
    rows = list(zip(r.alpha.tolist(), r.d_legendre.tolist(), r.d_measured.tolist(),
                    r.argmin_p.tolist(), r.boundary.tolist()))
    return (["alpha", "d_legendre", "d_hat", "argmin_p", "boundary"], rows,
            f"max deviation {r.deviation_measured:.4g} (vs 4a-2: {r.deviation_theory:.4g})",
            {"deviation_measured": r.deviation_measured,
             "deviation_theory": r.deviation_theory})


def cmd_bf_traj(a):
    tg = np.linspace(0.0, float(a.t_end), a.steps + 1)
    lead = binormal.trajectory_leading(float(a.x0), a.M, tg).positions
    corner = binormal.corner_trajectory(float(a.x0), a.M, tg).positions
    rows = list(zip(tg.tolist(), lead.real.tolist(), lead.imag.tolist(),
                    corner.real.tolist(), corner.imag.tolist()))
    gap = float(np.max(np.abs(binormal.align_phase(corner, lead) - lead)))
    return (["t", "leading_re", "leading_im", "corner_re", "corner_im"], rows,
            f"gap after phase alignment {gap:.4g}", {"gap": gap})


# --------------------------------------------------------------- parser

def _common(p, default_name):
    p.add_argument("--out", default=None,
                   help=f"output file (.csv or .json); default ${OUT_DIR_ENV}/{default_name}")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker cap; results do not depend on it")
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    ap = argparse.ArgumentParser(prog="riemannlab",
                                 description="Riemann-type sums, regularity and Diophantine experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        _common(p, f"{name}.csv")
        return p

    p = add("eval", cmd_eval, "evaluate one partial sum; columns re, im")
    p.add_argument("--x0", type=_rational, default=Fraction(0))
    p.add_argument("--t", type=_rational, required=True)
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--kind", choices=[k.value for k in exp_sums.SeriesKind], default="R")

    p = add("trace", cmd_trace, "trace of R~_x0 on a uniform grid; columns t, re, im")
    p.add_argument("--x0", type=_real, default=0.0)
    p.add_argument("--t-start", type=_real, default=0.0)
    p.add_argument("--t-end", type=_real, default=2 * math.pi)
    p.add_argument("--samples", type=int, default=1001)
    p.add_argument("--N", type=int, default=1000)

    p = add("gauss", cmd_gauss, "Gauss sum G(p,b,q); columns p, b, q, re, im, modulus, class")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--q", type=int, required=True)

    p = add("cf", cmd_cf, "continued fraction; columns n, a, p, q, mu")
    p.add_argument("--t", type=_real, required=True)
    p.add_argument("--depth", type=int, default=60)

    for name, func, text in (
            ("dioph-sum", cmd_dioph_sum, "Duffin-Schaeffer partial sums; columns X, partial_sum"),
            ("dioph-measure", cmd_dioph_measure, "exact measure of the union of balls; columns lo, hi")):
        p = add(name, func, text)
        p.add_argument("--mu", type=float, default=2.0, help="psi(q) = q^-mu")
        p.add_argument("--modulus", type=int, default=4, help="q restricted to modulus*N")
        p.add_argument("--q-max", type=int, default=1000)
        if name == "dioph-measure":
            p.add_argument("--q-min", type=int, default=1)
            p.add_argument("--mc-points", type=int, default=0)

    p = add("dioph-dim", cmd_dioph_dim, "Jarnik box counting; columns j, count")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--Q", type=int, default=0, help="restrict q to 4Q*N; 0 = no restriction")
    p.add_argument("--j-min", type=int, default=10)
    p.add_argument("--j-max", type=int, default=20)

    p = add("scaling", cmd_scaling, "increment scaling at p/q; columns j, h, increment")
    p.add_argument("--x0", type=_rational, default=Fraction(0))
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--j-lo", type=int, default=12)
    p.add_argument("--j-hi", type=int, default=30)
    p.add_argument("--N", type=int, default=2 ** 20)

    p = add("holder", cmd_holder, "pointwise exponent fit; columns j, h, osc")
    p.add_argument("--x0", type=_rational, default=Fraction(0))
    p.add_argument("--t", type=_real, required=True)
    p.add_argument("--j-min", type=int, default=8)
    p.add_argument("--j-max", type=int, default=28)
    p.add_argument("--N", type=int, default=2 ** 19)
    p.add_argument("--per-octave", type=int, default=4)
    p.add_argument("--kind", choices=["R", "Weierstrass"], default="R")

    def spectrum_flags(p):
        p.add_argument("--x0", type=_rational, default=Fraction(0))
        p.add_argument("--grid", type=int, default=2 ** 18)
        p.add_argument("--j", type=int, default=18)
        p.add_argument("--N", type=int, default=None)
        p.add_argument("--kind", choices=["R", "Weierstrass"], default="R")
        p.add_argument("--oversample", type=int, default=16)
        p.add_argument("--prefactor", default="scaling",
                       help="'scaling', 'analytic' or a number")

    def sf_flags(p, with_x0):
        if with_x0:
            p.add_argument("--x0", type=_rational, default=Fraction(0))
            p.add_argument("--N", type=int, default=None)
        p.add_argument("--p-list", type=_float_list,
                       default=[0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6])
        p.add_argument("--j-min", type=int, default=10)
        p.add_argument("--j-max", type=int, default=18)
        p.add_argument("--sf-grid", type=int, default=2 ** 22)

    p = add("spectrum", cmd_spectrum, "coarse-grained spectrum; columns alpha_bin, d_hat, count")
    spectrum_flags(p)

    p = add("flatness", cmd_flatness,
            "flatness F(2^k); columns N, M_max, F_quadrature, F_convolution, tail_bound")
    p.add_argument("--x0", type=_rational, default=Fraction(0))
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--band", type=int, default=4, help="M_max = band * N")

    p = add("sf", cmd_sf, "structure-function exponents; columns p, zeta, residual")
    sf_flags(p, True)

    p = add("fp-check", cmd_fp_check,
            "Legendre check; columns alpha, d_legendre, d_hat, argmin_p, boundary")
    spectrum_flags(p)
    sf_flags(p, False)

    p = add("bf-traj", cmd_bf_traj,
            "corner trajectory vs leading term; columns t, leading_re, leading_im, corner_re, corner_im")
    p.add_argument("--x0", type=_real, default=0.0)
    p.add_argument("--M", type=int, default=8)
    p.add_argument("--t-end", type=_real, default=2 * math.pi)
    p.add_argument("--steps", type=int, default=2000)
    return ap


def _output_path(a):
    if a.out:
        return Path(a.out)
    return Path(os.environ.get(OUT_DIR_ENV, ".")) / f"{a.command}.csv"


def _flags(a):
    return {k: (str(v) if isinstance(v, Fraction) else v)
            for k, v in sorted(vars(a).items()) if k not in ("func", "out")}


def main(argv=None):
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        if a.threads < 1:
            parser.error("--threads must be >= 1")
    except SystemExit as exc:  # argparse reports bad flags via exit(2); --help via exit(0)
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    out = _output_path(a)
    flags = _flags(a)
    start = time.perf_counter()
    try:
        if not out.parent.is_dir():
            raise OSError(f"output directory {out.parent} does not exist")
        columns, rows, summary, extra = a.func(a)
        header = {"command": a.command, "flags": flags, **extra}
        if out.suffix == ".json":
            write_json(out, {**header, "columns": columns, "rows": [list(r) for r in rows]})
        else:
            write_csv(out, columns, rows, header)
        manifest = RunManifest(command=a.command, flags=flags, seed=a.seed)
        manifest.wall_time = time.perf_counter() - start
        manifest.record(out)
        manifest.write(out.with_name(out.name + ".manifest.json"))
    except ValidationError as exc:
        print(f"riemannlab {a.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"riemannlab {a.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"riemannlab {a.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"{a.command}: {summary} -> {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
