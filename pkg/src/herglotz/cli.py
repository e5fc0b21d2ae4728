"""Command line front end: ``herglotz <verb> [options]``.

Every run prints a one-line reproducibility header to stderr. Exit status is
0 on success, 1 on invalid input or a failed computation and 2 when a
verification check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

import numpy as np

from . import __version__
from . import extensions as ext
from . import herglotz_core as hc
from . import livsic as lv
from . import measures as ms
from . import perturbation as pt
from . import schrodinger as sch
from .errors import GridTooLarge, HerglotzError, InputError, VerificationError

MAX_GRID_POINTS = 1_000_000


# ---------------------------------------------------------------------------
# argument helpers


def parse_complex(s: str) -> complex:
    """``"re,im"`` or a Python complex literal such as ``"0.3+1j"``."""
    s = s.strip()
    try:
        if "," in s:
            re_, im_ = s.split(",", 1)
            return complex(float(re_), float(im_))
        return complex(s.replace("i", "j"))
    except ValueError:
        raise InputError(f"cannot parse complex number {s!r}") from None


def parse_grid(text: str) -> list[complex]:
    """``"re0:re1:nre,im0:im1:nim"``: a tensor grid in the complex plane."""
    try:
        re_part, im_part = text.split(",")
        r0, r1, nr = re_part.split(":")
        i0, i1, ni = im_part.split(":")
        nr, ni = int(nr), int(ni)
    except ValueError:
        raise InputError(f"bad grid {text!r}; expected re0:re1:n,im0:im1:n") from None
    if nr < 1 or ni < 1:
        raise InputError("grid sizes must be positive")
    if nr * ni > MAX_GRID_POINTS:
        raise GridTooLarge(f"{nr * ni} points exceeds the limit of {MAX_GRID_POINTS}")
    xs = np.linspace(float(r0), float(r1), nr)
    ys = np.linspace(float(i0), float(i1), ni)
    return [complex(x, y) for y in ys for x in xs]


def _points(args) -> list[complex]:
    pts = [parse_complex(z) for z in (args.z or [])]
    if getattr(args, "grid", None):
        pts += parse_grid(args.grid)
    if not pts:
        raise InputError("give at least one --z or a --grid")
    return pts


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _potential(source: str) -> sch.Potential:
    return sch.Potential.zero() if source == "zero" else sch.Potential.from_csv(source)


def _two_floats(s: str, what: str) -> tuple[float, float]:
    try:
        a, b = (float(t) for t in s.split(","))
    except ValueError:
        raise InputError(f"{what} expects two comma-separated numbers") from None
    return a, b


def _scalar_source(args) -> Callable[[complex], complex]:
    """The m-function selected by --measure / --livsic / --point / --q."""
    if getattr(args, "measure", None):
        m = ms.measure_from_dict(_load_json(args.measure))
        rep = hc.HerglotzRep(m, args.C, args.D, "full" if args.kernel == "full" else "plain")
        return lambda z: complex(hc.evaluate(rep, z))
    if getattr(args, "livsic", None):
        a, alpha = _two_floats(args.livsic, "--livsic")
        model = lv.LivsicInterval(a, alpha)
        return lambda z: complex(lv.livsic_rotated_m(model, z))
    if getattr(args, "point", None):
        n, which = args.point.split(",")
        return lambda z: complex(sch.point_interaction_m(int(n), which, z))
    if getattr(args, "q", None):
        q = _potential(args.q)
        return lambda z: sch.weyl_m(q, args.gamma, z, tol=args.tol).value
    raise InputError("choose a source: --measure, --livsic, --point or --q")


def _add_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("m-function source")
    g.add_argument("--measure", help="measure JSON file")
    g.add_argument("--C", type=float, default=0.0, help="real constant term")
    g.add_argument("--D", type=float, default=0.0, help="non-negative linear term")
    g.add_argument("--kernel", choices=("full", "plain"), default="full")
    g.add_argument("--livsic", metavar="A,ALPHA", help="Livsic interval model")
    g.add_argument("--point", metavar="N,WHICH", help="point interaction, e.g. 3,krein")
    g.add_argument("--q", help="potential: 'zero' or a CSV file of (x, q) rows")
    g.add_argument("--gamma", type=float, default=0.0, help="boundary angle for --q")


def _add_points(p: argparse.ArgumentParser) -> None:
    p.add_argument("--z", action="append",
                   help="evaluation point 're,im' (repeatable)")
    p.add_argument("--grid", help="tensor grid 're0:re1:n,im0:im1:n'")


# ---------------------------------------------------------------------------
# output


def fmt_complex(v: complex) -> str:
    v = complex(v)
    return f"{v.real:.10f}{v.imag:+.10f}i"


def _emit_values(args, zs, vals, extra: dict | None = None) -> None:
    fmt = args.format
    if fmt == "text":
        for z, v in zip(zs, vals):
            print(fmt_complex(v) if len(zs) == 1 else f"{fmt_complex(z)}\t{fmt_complex(v)}",
                  file=args.stream)
    elif fmt == "csv":
        hc.write_eval_csv(args.stream, zs, vals)
    else:
        rows = [{"z": [z.real, z.imag], "M": [complex(v).real, complex(v).imag]}
                for z, v in zip(zs, vals)]
        doc = {"values": rows}
        if extra:
            doc.update(extra)
        json.dump(doc, args.stream, indent=2)
        args.stream.write("\n")


def _emit_json(args, doc) -> None:
    json.dump(doc, args.stream, indent=2, default=_json_default)
    args.stream.write("\n")


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


# ---------------------------------------------------------------------------
# verbs


def cmd_eval(args) -> int:
    f = _scalar_source(args)
    zs = _points(args)
    _emit_values(args, zs, [f(z) for z in zs])
    return 0


def cmd_rotate(args) -> int:
    f = hc.extension_rotate(_scalar_source(args), args.angle)
    zs = _points(args)
    _emit_values(args, zs, [f(z) for z in zs])
    return 0


def cmd_invert(args) -> int:
    f = _scalar_source(args)
    lo, hi = _two_floats(args.window, "--window")
    eps = tuple(float(e) for e in args.eps.split(",")) if args.eps else (1e-2, 5e-3, 2.5e-3, 1.25e-3)
    m = hc.stieltjes_invert(f, (lo, hi), eps_ladder=eps)
    if args.format == "json":
        _emit_json(args, ms.measure_to_dict(m))
    else:
        hc.write_inversion_csv(args.stream, m)
    return 0


def cmd_lft(args) -> int:
    A = hc.JUnitary.from_dict(_load_json(args.junitary))
    f = hc.lft_apply(A, _scalar_source(args))
    zs = _points(args)
    _emit_values(args, zs, [f(z) for z in zs])
    return 0


def cmd_perturb(args) -> int:
    t = pt.PerturbationTriple.from_dict(_load_json(args.triple))
    zs = _points(args)
    out = []
    for z in zs:
        M = pt.perturbed_mfunc(t, z)
        out.append({"z": [z.real, z.imag], "M": ms.complex_matrix_to_json(M)})
    doc = {"values": out}
    status = 0
    if args.check_L2:
        t2 = t.with_L(ms.complex_matrix_from_json(_load_json(args.check_L2)))
        rpt = pt.lft_consistency(t, t2, zs)
        doc["lft_max_error"] = rpt.max_error
        status = 0 if rpt.max_error <= max(args.tol, 1e-12) * 1e2 else 2
    _emit_json(args, doc)
    return status


def cmd_dilate(args) -> int:
    om = ms.matrix_measure_from_dict(_load_json(args.omega))
    _emit_json(args, pt.naimark_dilate(om).to_dict())
    return 0


def cmd_realize(args) -> int:
    om = ms.matrix_measure_from_dict(_load_json(args.omega))
    D, rpt = pt.realize(om)
    _emit_json(args, {"dilation": D.to_dict(), "max_residual": rpt.max_residual})
    return 0 if rpt.passed(max(args.tol, 1e-10)) else 2


def cmd_weyl(args) -> int:
    q = _potential(args.q)
    zs = _points(args)
    res = [sch.weyl_m(q, args.gamma, z, tol=args.tol) for z in zs]
    if args.format == "csv":
        import csv
        w = csv.writer(args.stream, lineterminator="\n")
        w.writerow(("re_z", "im_z", "re_m", "im_m", "err_est"))
        for z, r in zip(zs, res):
            w.writerow([repr(z.real), repr(z.imag), repr(r.value.real), repr(r.value.imag),
                        repr(r.richardson_error)])
    else:
        _emit_values(args, zs, [r.value for r in res],
                     {"err_est": [r.richardson_error for r in res]})
    return 0


def cmd_donoghue(args) -> int:
    zs = _points(args)
    if args.model:
        d = _load_json(args.model)
        model = ext.DonoghueModel(ms.measure_from_dict(d["measure"]), float(d.get("alpha", 0.0)))
        fam = ext.ExtensionFamily(model, model.angle)
        beta = model.angle if args.alpha is None else args.alpha
        vals = [ext.rotate_family(fam, beta, z) for z in zs]
    else:
        q = _potential(args.q)
        alpha = 0.0 if args.alpha is None else args.alpha
        vals = [sch.weyl_to_donoghue(q, alpha, z) for z in zs]
    _emit_values(args, zs, vals)
    return 0


def cmd_bounds(args) -> int:
    sb = sch.sharp_bounds(_potential(args.q), args.alpha, variational=args.variational)
    _emit_json(args, {"sup_derivative": sb.sup_derivative, "sup_value": sb.sup_value,
                      "product": sb.product, "sobolev_constant": sb.sobolev_constant,
                      "variational": sb.variational})
    return 0


def cmd_classify(args) -> int:
    if args.measure:
        target = ms.measure_from_dict(_load_json(args.measure))
    else:
        target = _scalar_source(args)
    v = ext.identify_friedrichs_krein(target, far_start=args.far_start, near_start=args.near_start)
    _emit_json(args, v.to_dict())
    return 0


def cmd_livsic(args) -> int:
    model = lv.LivsicInterval(args.a, args.alpha)
    zs = _points(args)
    _emit_values(args, zs, [lv.livsic_rotated_m(model, z) for z in zs],
                 {"beta": model.beta, "mass": model.mass})
    return 0


def cmd_livsic_measure(args) -> int:
    m = lv.livsic_measure(lv.LivsicInterval(args.a, args.alpha), n_range=args.n,
                          periodic=args.periodic)
    _emit_json(args, ms.measure_to_dict(m))
    return 0


def cmd_verify(args) -> int:
    from . import verify
    checks = verify.run(args.suite, seed=args.seed, tol=args.tol)
    if args.format == "json":
        _emit_json(args, [c.__dict__ for c in checks])
    else:
        for c in checks:
            print(c.line(), file=args.stream)
    return 0 if all(c.passed for c in checks) else 2


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .verify import SUITES

    def common_flags(defaults: bool) -> argparse.ArgumentParser:
        # the copy attached to each verb suppresses its defaults so a flag given
        # before the verb is not overwritten by the verb's own default
        c = argparse.ArgumentParser(add_help=False)
        d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        c.add_argument("--tol", type=float, default=d(1e-8), help="numerical tolerance")
        c.add_argument("--seed", type=int, default=d(0), help="seed for randomised checks")
        c.add_argument("--format", choices=("text", "csv", "json"), default=d("text"))
        c.add_argument("--out", default=d(None), help="write output to this file instead of stdout")
        return c

    common = common_flags(False)
    p = argparse.ArgumentParser(prog="herglotz", description=__doc__.splitlines()[0],
                                parents=[common_flags(True)])
    p.add_argument("--version", action="version", version=f"herglotz {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    def verb(name, func, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(func=func)
        return sp

    sp = verb("eval", cmd_eval, "evaluate an m-function")
    _add_source(sp)
    _add_points(sp)

    sp = verb("invert", cmd_invert, "recover a measure by Stieltjes inversion")
    _add_source(sp)
    sp.add_argument("--window", required=True, metavar="LO,HI")
    sp.add_argument("--eps", help="comma-separated epsilon ladder")

    sp = verb("lft", cmd_lft, "apply a J-unitary linear fractional transform")
    _add_source(sp)
    _add_points(sp)
    sp.add_argument("--junitary", required=True, help="JSON with blocks A11, A12, A21, A22")

    sp = verb("rotate", cmd_rotate, "rotate to another self-adjoint extension")
    _add_source(sp)
    _add_points(sp)
    sp.add_argument("--angle", type=float, required=True)

    sp = verb("perturb", cmd_perturb, "M-function of a finite-rank perturbation")
    sp.add_argument("--triple", required=True, help="JSON with H0, K, L")
    sp.add_argument("--check-L2", dest="check_L2", help="JSON matrix L2 for the LFT check")
    _add_points(sp)

    sp = verb("dilate", cmd_dilate, "Naimark dilation of a matrix measure")
    sp.add_argument("--omega", required=True, help="matrix measure JSON")

    sp = verb("realize", cmd_realize, "realise a matrix measure and check the M-function")
    sp.add_argument("--omega", required=True, help="matrix measure JSON")

    sp = verb("weyl", cmd_weyl, "Weyl-Titchmarsh function of a half-line operator")
    sp.add_argument("--q", default="zero")
    sp.add_argument("--gamma", type=float, default=0.0)
    _add_points(sp)

    sp = verb("donoghue", cmd_donoghue, "Donoghue-normalised m-function")
    sp.add_argument("--model", help="JSON with 'measure' and 'alpha'")
    sp.add_argument("--q", default="zero")
    sp.add_argument("--alpha", type=float)
    _add_points(sp)

    sp = verb("bounds", cmd_bounds, "sharp boundary-value bounds")
    sp.add_argument("--q", default="zero")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--variational", action="store_true", help="also run the variational check")

    sp = verb("classify", cmd_classify, "Friedrichs/Krein identification")
    _add_source(sp)
    sp.add_argument("--far-start", dest="far_start", type=int, default=0)
    sp.add_argument("--near-start", dest="near_start", type=int, default=0)

    sp = verb("livsic", cmd_livsic, "Livsic interval model m-function")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    _add_points(sp)

    sp = verb("livsic-measure", cmd_livsic_measure, "lattice measure of the Livsic model")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--n", type=int, default=10_000, help="lattice range |n| <= N")
    sp.add_argument("--periodic", action="store_true", help="exact periodic tail instead")

    sp = verb("verify", cmd_verify, "run invariant suites")
    sp.add_argument("--suite", choices=("all",) + tuple(SUITES), default="all")
    return p


# options whose values may start with a minus sign ("-1,0", "-4:4:9,...")
_SIGNED_VALUE_FLAGS = {"--z", "--grid", "--window", "--livsic", "--angle", "--alpha", "--gamma",
                       "--C", "--a"}


def _glue_signed_values(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if tok in _SIGNED_VALUE_FLAGS and nxt[:1] == "-" and (nxt[1:2].isdigit() or nxt[1:2] == "."):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_signed_values(argv))
    print(f"# herglotz {__version__} verb={args.verb} seed={args.seed} tol={args.tol:g} "
          f"numpy={np.__version__}", file=sys.stderr)
    stream = open(args.out, "w") if args.out else sys.stdout
    args.stream = stream
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except HerglotzError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error [input]: {exc}", file=sys.stderr)
        return 1
    finally:
        if args.out:
            stream.close()


if __name__ == "__main__":
    sys.exit(main())
