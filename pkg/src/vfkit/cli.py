"""Command-line front end: ``vfkit <subcommand> ...``.

Exit status is 0 on success, 1 for bad input and 2 for numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import io
from .errors import InputError, InvalidParam, NumericalError
from .fitting import FitConfig, Solver, Variant, fit
from .metrics import (
    default_hinf_grid,
    hinf_estimate,
    reference_band,
    relative_h2_error,
    relative_ls_residual,
)
from .model import SampleSet, eval_pole_residue
from .quadrature import bcc_grid, h2_norm_sq_estimate, match_grid, samples_m_plus
from .systems import StateSpaceModel, random_stable_siso, sample_system


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _band_L(args) -> float:
    if args.L is not None:
        return args.L
    if args.band is not None:
        lo, hi = args.band
        if not 0 < lo < hi:
            raise InvalidParam(f"invalid band {args.band}")
        return float(np.sqrt(lo * hi))
    raise InvalidParam("give --L or --band")


def _log_points(lo, hi, n) -> np.ndarray:
    """Conjugate-closed set of about `n` points ``+-i w``, ``w`` log-spaced."""
    if not 0 < lo < hi:
        raise InvalidParam(f"invalid band ({lo}, {hi})")
    w = np.geomspace(lo, hi, max(n // 2, 1))
    return np.concatenate([1j * w, -1j * w])


def _load_reference(path):
    """A state-space JSON, a model JSON or a sample CSV."""
    with open(path, encoding="utf-8") as fh:
        head = fh.read(1)
    if head == "{":
        data = io.read_json(path)
        if "F" in data:
            return io.statespace_from_dict(data)
        return io.model_from_dict(data)
    return io.read_samples_csv(path)


def _read_points(path) -> np.ndarray:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0][:2]] != ["s_re", "s_im"]:
        raise InvalidParam(f"{path}: header must start with s_re,s_im")
    pts = [complex(float(r[0]), float(r[1])) for r in rows[1:] if r]
    return np.array(pts, dtype=complex)


def _read_poles(path) -> np.ndarray:
    data = io.read_json(path)
    if isinstance(data, dict):
        data = data.get("poles", [])
    return io._zs(data)


# ---------------------------------------------------------------- commands


def cmd_nodes(args) -> int:
    grid = bcc_grid(args.ell, _band_L(args))
    if args.out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["s_re", "s_im", "weight"])
        for s, rho in zip(grid.nodes, grid.weights):
            w.writerow([io.fmt(s.real), io.fmt(s.imag), io.fmt(rho)])
        return 0
    io.write_grid(args.out, grid, as_json=args.format == "json")
    return 0


def cmd_synth(args) -> int:
    if args.system is not None:
        ss = io.load_statespace(args.system)
    else:
        if args.order is None:
            raise InvalidParam("give --order or --system")
        ss = random_stable_siso(args.order, args.seed, args.band or (1.0, 100.0))
    if args.grid is not None:
        points = io.read_grid(args.grid).nodes
    else:
        lo, hi = args.band or (1.0, 100.0)
        points = _log_points(lo, hi, args.ell)
    samples = sample_system(ss, points, args.noise, args.seed, with_deriv=args.deriv)
    io.write_samples_csv(args.out, samples)
    if args.save_system:
        io.write_json(args.save_system, io.statespace_to_dict(ss))
    return 0


def cmd_fit(args) -> int:
    samples = io.read_samples_csv(args.samples)
    grid = io.read_grid(args.grid) if args.grid else None
    real = {"auto": None, "real": True, "complex": False}[args.arith]
    config = FitConfig(
        order=args.order,
        variant=Variant(args.variant),
        solver=Solver(args.solver),
        max_iters=args.max_iters,
        eps_backward=args.eps,
        eta1=args.eta1,
        eta2=args.eta2,
        initial_poles=_read_poles(args.init_poles) if args.init_poles else None,
        grid=grid,
        real=real,
    )
    result = fit(samples, config)
    info = {
        "status": result.status_label,
        "iterations": result.iterations,
        "rel_ls_residual": result.relative_ls_residual,
        "variant": result.variant.value,
    }
    io.save_model(args.out, result.model, info)
    if args.trace:
        io.write_trace_csv(args.trace, result.history)
    print(f"status={result.status_label} iterations={result.iterations} "
          f"rel_ls_residual={io.fmt(result.relative_ls_residual)}", file=sys.stderr)
    return 0


def _eval_reference(ref, s):
    if isinstance(ref, StateSpaceModel):
        return np.asarray(ref(s))
    return eval_pole_residue(ref, s)


def cmd_compare(args) -> int:
    model = io.load_model(args.model)
    ref = _load_reference(args.reference)
    grid = io.read_grid(args.grid) if args.grid else None
    out = {"rel_h2": None, "rel_hinf": None, "rel_ls_residual": None}
    if isinstance(ref, SampleSet):
        if grid is not None:
            out["rel_h2"] = relative_h2_error(ref, model, grid)
        out["rel_ls_residual"] = relative_ls_residual(ref, model)
        out["rel_hinf"] = hinf_estimate(ref, model).relative
        upper = ref.points.imag >= 0
        order = np.argsort(ref.points.imag[upper])
        s = ref.points[upper][order]
        href = ref.values[upper][order]
    else:
        if grid is None:
            grid = bcc_grid(args.ell, args.L if args.L else 1.0)
        out["rel_h2"] = relative_h2_error(ref, model, grid)
        omegas = default_hinf_grid(*(args.band or reference_band(ref)))
        out["rel_hinf"] = hinf_estimate(ref, model, omegas).relative
        on_grid = SampleSet(grid.nodes, _eval_reference(ref, grid.nodes))
        out["rel_ls_residual"] = relative_ls_residual(on_grid, model)
        s = 1j * omegas
        href = _eval_reference(ref, s)
    if args.bode:
        hm = eval_pole_residue(model, s)
        with open(args.bode, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["omega", "abs_ref", "abs_model", "abs_err"])
            for k in range(s.size):
                w.writerow([io.fmt(s[k].imag), io.fmt(abs(href[k])), io.fmt(abs(hm[k])),
                            io.fmt(abs(href[k] - hm[k]))])
    print(_json_line(out))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(_json_line(out) + "\n")
    return 0


def _json_line(d) -> str:
    parts = []
    for k, v in d.items():
        parts.append(f'"{k}": ' + ("null" if v is None else io.fmt(v)))
    return "{" + ", ".join(parts) + "}"


def cmd_h2norm(args) -> int:
    if args.system is not None:
        ss = io.load_statespace(args.system)
        grid = bcc_grid(args.ell, args.L)
        samples = sample_system(ss, grid.nodes)
    else:
        if args.samples is None:
            raise InvalidParam("give --samples or --system")
        samples = io.read_samples_csv(args.samples)
        grid = bcc_grid(len(samples), args.L)
    order = match_grid(samples, grid)
    m = samples_m_plus(samples)
    val = h2_norm_sq_estimate(samples.values[order], m, np.conj(m), grid)
    print(io.fmt(np.sqrt(val)))
    return 0


def cmd_eval(args) -> int:
    model = io.load_model(args.model)
    if args.points:
        pts = _read_points(args.points)
    elif args.omega:
        pts = 1j * np.asarray(args.omega, dtype=float)
    else:
        raise InvalidParam("give --points or --omega")
    vals = eval_pole_residue(model, pts)
    fh = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s_re", "s_im", "h_re", "h_im"])
        for s, h in zip(np.atleast_1d(pts), np.atleast_1d(vals)):
            w.writerow([io.fmt(s.real), io.fmt(s.imag), io.fmt(h.real), io.fmt(h.imag)])
    finally:
        if args.out:
            fh.close()
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vfkit", description="Rational fitting of frequency-response data.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("nodes", help="emit a Boyd/Clenshaw-Curtis grid")
    q.add_argument("--ell", type=int, required=True)
    q.add_argument("--L", type=float)
    q.add_argument("--band", type=float, nargs=2, metavar=("W_LO", "W_HI"),
                   help="use L = sqrt(W_LO * W_HI)")
    q.add_argument("--out")
    q.add_argument("--format", choices=["csv", "json"], default="csv")
    q.set_defaults(func=cmd_nodes)

    q = sub.add_parser("synth", help="sample a (random) stable system")
    q.add_argument("--order", type=int)
    q.add_argument("--system", help="state-space JSON instead of a random system")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--band", type=float, nargs=2, metavar=("W_LO", "W_HI"))
    q.add_argument("--grid", help="sample at these grid nodes")
    q.add_argument("--ell", type=int, default=64, help="number of log-spaced points")
    q.add_argument("--noise", type=float, default=0.0)
    q.add_argument("--deriv", action="store_true")
    q.add_argument("--out", required=True)
    q.add_argument("--save-system")
    q.set_defaults(func=cmd_synth)

    q = sub.add_parser("fit", help="fit a pole-residue model")
    q.add_argument("--samples", required=True)
    q.add_argument("--order", type=int, required=True)
    q.add_argument("--variant", choices=[v.value for v in Variant], default="vf")
    q.add_argument("--solver", choices=[s.value for s in Solver], default="wls")
    q.add_argument("--grid")
    q.add_argument("--eta1", type=float, default=1e-16)
    q.add_argument("--eta2", type=float, default=float(np.sqrt(np.finfo(float).eps)))
    q.add_argument("--eps", type=float, default=1e-10)
    q.add_argument("--max-iters", type=int, default=100)
    q.add_argument("--init-poles")
    q.add_argument("--arith", choices=["auto", "real", "complex"], default="auto")
    q.add_argument("--trace")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_fit)

    q = sub.add_parser("compare", help="error metrics of a model against a reference")
    q.add_argument("--model", required=True)
    q.add_argument("--reference", required=True,
                   help="state-space JSON, model JSON or sample CSV")
    q.add_argument("--grid")
    q.add_argument("--ell", type=int, default=128)
    q.add_argument("--L", type=float)
    q.add_argument("--band", type=float, nargs=2, metavar=("W_LO", "W_HI"))
    q.add_argument("--bode")
    q.add_argument("--out")
    q.set_defaults(func=cmd_compare)

    q = sub.add_parser("h2norm", help="quadrature H2 norm from grid samples")
    q.add_argument("--samples")
    q.add_argument("--system")
    q.add_argument("--ell", type=int, default=64)
    q.add_argument("--L", type=float, required=True)
    q.set_defaults(func=cmd_h2norm)

    q = sub.add_parser("eval", help="evaluate a model at given points")
    q.add_argument("--model", required=True)
    q.add_argument("--points")
    q.add_argument("--omega", type=float, nargs="+")
    q.add_argument("--out")
    q.set_defaults(func=cmd_eval)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"vfkit: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"vfkit: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"vfkit: error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
