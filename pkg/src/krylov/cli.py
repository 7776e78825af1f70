"""Command line interface.

Subcommands
-----------
list        show the available reference experiments
run         run one experiment, writing CSV (and optionally SVG) artifacts
diagnose    build an operator and a datum, then print structural indicators
classk      error-versus-degree curve of the polynomial inverse approximation

Exit codes: 0 on success, 1 for invalid arguments, 2 for numerical or I/O
failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .arnoldi import arnoldi
from .diagnostics import (
    DiagnosticsReport,
    defect_ladder_from_basis,
    intersection_indicator,
    kernel_error_profile,
)
from .errors import NumericalFailureError
from .experiments import (
    ExperimentSpec,
    describe_experiments,
    run_experiment,
    write_diagnostics_csv,
    REFERENCE_CUTOFF,
)
from .operators import (
    LinearOperatorHandle,
    WeightSequence,
    make_bilateral_weighted_shift,
    make_fourier_convolution,
    make_left_shift,
    make_masked_multiplication,
    make_multiplication,
    make_right_shift,
    make_volterra,
    make_weighted_right_shift,
)
from .polyinv import apply_poly, inverse_poly
from .spaces import CoefficientVector

OPERATOR_KINDS = ("mult", "mult-masked", "rshift", "lshift", "wrshift",
                  "bilateral", "volterra", "fourier-conv")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the interface contract says 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_weights(text: str) -> WeightSequence:
    kind, _, rest = text.partition(":")
    if kind == "reciprocal":
        return WeightSequence.reciprocal(float(rest or 5.0))
    if kind == "explicit":
        if not rest:
            raise ValueError("explicit weights need a comma-separated list")
        return WeightSequence.explicit([float(v) for v in rest.split(",")])
    raise ValueError(f"unknown weight spec {text!r}; use reciprocal:S or explicit:a,b,..")


def parse_kernel(text: str) -> frozenset:
    return frozenset(int(v) for v in text.split(",") if v.strip())


def build_operator(kind: str, dim: int | None, grid: int | None,
                   weights: WeightSequence, kernel: frozenset) -> LinearOperatorHandle:
    if kind == "volterra":
        return make_volterra(grid if grid is not None else 2048)
    d = dim if dim is not None else 2500
    if kind == "mult":
        return make_multiplication(weights, d)
    if kind == "mult-masked":
        return make_masked_multiplication(weights, kernel or frozenset({3, 6, 9}), d)
    if kind == "rshift":
        return make_right_shift(d)
    if kind == "lshift":
        return make_left_shift(d)
    if kind == "wrshift":
        return make_weighted_right_shift(weights, d)
    if kind == "bilateral":
        d = dim if dim is not None else 101
        return make_bilateral_weighted_shift(weights, d)
    if kind == "fourier-conv":
        d = dim if dim is not None else 25
        if d % 2 == 0:
            raise ValueError("fourier-conv needs an odd dimension (2*modes + 1)")
        return make_fourier_convolution((d - 1) // 2)
    raise ValueError(f"unknown operator {kind!r}; known: {', '.join(OPERATOR_KINDS)}")


def build_datum(operator: LinearOperatorHandle, spec: str) -> CoefficientVector:
    """Datum grammar: basis:K, reciprocal[:CUT], ones[:CUT], xpow:P, image:<datum>."""
    space = operator.space
    kind, _, rest = spec.partition(":")
    if kind == "image":
        if not rest:
            raise ValueError("image: needs an inner datum spec")
        return operator.apply(build_datum(operator, rest))
    values = np.zeros(space.dim, dtype=complex)
    if kind == "basis":
        values[space.slot_of(int(rest or 1))] = 1.0
    elif kind == "reciprocal":
        cutoff = min(int(rest) if rest else REFERENCE_CUTOFF, space.dim)
        values[:cutoff] = 1.0 / np.arange(1, cutoff + 1)
    elif kind == "ones":
        cutoff = min(int(rest) if rest else space.dim, space.dim)
        values[:cutoff] = 1.0
    elif kind == "xpow":
        if not space.is_function_space:
            raise ValueError("xpow datum needs a function-space operator")
        values[:] = space.grid ** float(rest or 1.0)
    else:
        raise ValueError(
            f"unknown datum spec {spec!r}; use basis:K, reciprocal[:CUT], "
            f"ones[:CUT], xpow:P, or image:<datum>")
    return CoefficientVector(values=values, space=space)


def _cmd_list(_args) -> int:
    for name, description in describe_experiments():
        print(f"{name:22s} {description}")
    return 0


def _cmd_run(args) -> int:
    spec = ExperimentSpec(
        name=args.name,
        ambient_dim=args.grid if args.name == "volterra_V" and args.grid else args.ambient_dim,
        n_max=args.n_max,
        output_dir=Path(args.out),
    )
    result = run_experiment(spec, svg=args.svg)
    last = result.trace.rows[-1]
    print(f"{args.name}: {len(result.trace.rows)} iterations"
          + (f", breakdown at {result.trace.grade_reached}"
             if result.trace.grade_reached else ""))
    print(f"  final residual {last.residual_norm:.6e}  error "
          f"{last.error_norm:.6e}  solution norm {last.solution_norm:.6f}")
    print(f"  trace: {result.csv_path}")
    print(f"  diagnostics: {result.diagnostics_path}")
    if result.svg_path is not None:
        print(f"  plot: {result.svg_path}")
    if result.report.notes:
        for line in result.report.notes.splitlines():
            print(f"  note: {line}")
    return 0


def _cmd_diagnose(args) -> int:
    weights = parse_weights(args.weights)
    kernel = parse_kernel(args.kernel) if args.kernel else frozenset()
    op = build_operator(args.operator, args.dim, args.grid, weights, kernel)
    g = build_datum(op, args.datum)
    n_max = args.n_max if args.n_max is not None else min(50, op.ambient_dim - 1)
    basis = arnoldi(op, g, n_max)
    ladder = defect_ladder_from_basis(op, g, basis)

    notes = [f"operator {op.name}, dimension {op.ambient_dim}, datum {args.datum}"]
    if basis.grade_reached is not None:
        notes.append(f"Arnoldi breakdown at step {basis.grade_reached} "
                     "(invariant Krylov subspace)")
    final_n, final_d = ladder[-1]
    tag = ("reducibility defect" if op.metadata.is_normal
           else "adjoint-datum distance (operator not normal, raw indicator)")
    notes.append(f"{tag}: {final_d:.6e} at N = {final_n}")
    cosine = None
    if op.ambient_dim <= 800 and basis.n_columns < op.ambient_dim:
        cosine = intersection_indicator(op, basis)
        notes.append(f"intersection indicator (largest principal cosine): "
                     f"{cosine:.12f}")
    else:
        notes.append("intersection indicator skipped (dimension too large for "
                     "a dense complement)")
    profile = None
    if op.metadata.kernel_indices:
        profile = kernel_error_profile(g, op.metadata.kernel_indices)
        notes.append(f"datum mass on kernel labels: {profile.on_kernel}")

    for line in notes:
        print(line)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"diagnose_{op.name}.csv"
        report = DiagnosticsReport(
            reducibility_defect=ladder,
            intersection_max_cosine=cosine,
            kernel_error_profile=profile,
            notes="\n".join(notes),
        )
        write_diagnostics_csv(path, report)
        print(f"written: {path}")
    return 0


def _cmd_classk(args) -> int:
    center = complex(args.center)
    if center == 0:
        raise ValueError("center must be nonzero")
    dim = args.dim
    eigs = np.linspace(1.0, 2.0, dim)
    radius = max(abs(eigs[0] - center), abs(eigs[-1] - center))
    if radius >= abs(center):
        raise ValueError(
            f"spectrum disk of radius {radius:.3f} about {center} reaches the "
            "origin; the series will not converge")
    op = make_multiplication(WeightSequence.explicit(eigs), dim)
    g = CoefficientVector(values=np.full(dim, 1.0 / np.sqrt(dim), dtype=complex),
                          space=op.space)
    exact = CoefficientVector(values=g.values / eigs, space=op.space)

    zs = np.linspace(eigs[0], eigs[-1], 4001)
    lines = ["degree,error_norm,sup_remainder_bound"]
    for degree in range(args.degree_max + 1):
        p = inverse_poly(center, degree)
        approx = apply_poly(op, p, g)
        err = op.space.norm(approx.values - exact.values)
        bound = float(np.max(np.abs(p.remainder(zs)))) * g.norm()
        lines.append(f"{degree},{err:.15e},{bound:.15e}")
        print(f"degree {degree:3d}  error {err:.6e}  bound {bound:.6e}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "classk.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"written: {path}")
    return 0


def build_argument_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="krylov",
                     description="Truncated infinite-dimensional inverse problems "
                                 "solved over Krylov subspaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list the reference experiments")

    run = sub.add_parser("run", help="run a reference experiment")
    run.add_argument("name", help="experiment name (see `krylov list`)")
    run.add_argument("--n-max", type=int, default=None, help="iteration budget")
    run.add_argument("--ambient-dim", type=int, default=None,
                     help="truncation dimension for sequence-space experiments")
    run.add_argument("--grid", type=int, default=None,
                     help="grid size for the integration-operator experiment")
    run.add_argument("--out", default="out", help="output directory (default: out)")
    run.add_argument("--svg", action="store_true", help="also write an SVG chart")

    diag = sub.add_parser("diagnose", help="structural indicators for an operator")
    diag.add_argument("operator", choices=OPERATOR_KINDS, metavar="operator",
                      help=f"one of: {', '.join(OPERATOR_KINDS)}")
    diag.add_argument("--datum", required=True,
                      help="datum spec: basis:K, reciprocal[:CUT], ones[:CUT], "
                           "xpow:P, image:<datum>")
    diag.add_argument("--dim", type=int, default=None, help="truncation dimension")
    diag.add_argument("--grid", type=int, default=None, help="grid size (volterra)")
    diag.add_argument("--weights", default="reciprocal:5",
                      help="weight spec: reciprocal:S or explicit:a,b,.. "
                           "(default reciprocal:5)")
    diag.add_argument("--kernel", default=None,
                      help="masked indices for mult-masked, e.g. 3,6,9")
    diag.add_argument("--n-max", type=int, default=None,
                      help="Krylov section size (default min(50, dim-1))")
    diag.add_argument("--out", default=None, help="also write the ladder as CSV")

    ck = sub.add_parser("classk",
                        help="polynomial inverse approximation error curve")
    ck.add_argument("--center", required=True,
                    help="series expansion center (complex literal, e.g. 1.5)")
    ck.add_argument("--degree-max", type=int, required=True, help="largest degree")
    ck.add_argument("--dim", type=int, default=64,
                    help="size of the diagonal test operator (default 64)")
    ck.add_argument("--out", default="out", help="output directory (default: out)")
    return parser


_COMMANDS = {
    "list": _cmd_list,
    "run": _cmd_run,
    "diagnose": _cmd_diagnose,
    "classk": _cmd_classk,
}


def main(argv=None) -> int:
    parser = build_argument_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse --help or usage error
        return int(exc.code or 0)
    except (ValueError, KeyError) as exc:
        print(f"krylov: invalid arguments: {exc}", file=sys.stderr)
        return 1
    except (NumericalFailureError, OSError) as exc:
        print(f"krylov: failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
