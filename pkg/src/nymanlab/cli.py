"""Command-line front end.

Every subcommand writes one document (JSON by default, CSV where the
result is a table) to stdout or ``--output``.  Exit status: 0 success,
2 usage, 3 input parse error, 4 precondition violation, 5 convergence
failure; ``self-test`` exits 1 when any check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Callable, Optional

from . import __version__
from .blaschke import (
    ZeroMultiset,
    b_at_one,
    blaschke_product,
    bsy_sum,
    load_multiset,
    parse_inline_zeros,
)
from .errors import ConvergenceError, InputParseError, NymanLabError, PreconditionError
from .gram_projection import (
    build_gram,
    distance_sequence,
    distance_to_one,
    reciprocal_family,
    sequence_to_csv,
)
from .line_integrals import (
    LineFunction,
    LineQuadratureSpec,
    bsy_integral,
    cauchy_eval,
    convergence_study,
    factorization_check,
    lemma_orthogonality,
    outer_integral,
    study_to_csv,
    synthetic_projection_norm,
)
from .step_kernels import (
    KernelSpec,
    exact,
    inv_sqrt,
    mellin_rho_closed,
    mellin_step,
    rho_as_step,
    semigroup_apply,
)
from .zeta_engine import ZeroTable, bundled_zero_table, load_zero_table, zeta

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_PARSE, EXIT_PRECONDITION, EXIT_CONVERGENCE = 0, 1, 2, 3, 4, 5


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Argument parsing helpers.


def parse_complex(text: str) -> complex:
    """Decimal complex literal: ``2``, ``0.5+14.13i``, ``1.5-2j``."""
    t = text.strip().replace(" ", "").replace("i", "j").replace("I", "j")
    try:
        value = complex(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise argparse.ArgumentTypeError(f"non-finite value {text!r}")
    return value


def parse_real(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"non-finite value {text!r}")
    return value


def parse_exact(text: str):
    """``p/q`` or a decimal, kept exact as a Fraction."""
    try:
        return exact(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def parse_alpha_list(text: str) -> list[KernelSpec]:
    return [KernelSpec.parse(tok) for tok in text.replace(",", " ").split()]


TEST_FUNCTIONS: dict[str, Callable[[], LineFunction]] = {
    "1/w": lambda: LineFunction.analytic(lambda w: 1 / w, 1.0, True, "1/w"),
    "1/(w+1)": lambda: LineFunction.analytic(lambda w: 1 / (w + 1), 1.0, True, "1/(w+1)"),
    "1/w^2": lambda: LineFunction.analytic(lambda w: 1 / (w * w), 2.0, True, "1/w^2"),
}


def test_function(name: str) -> LineFunction:
    """A named h: ``1/w``, ``1/(w+1)``, ``1/w^2`` or ``rho:p/q``."""
    if name.startswith("rho:"):
        return LineFunction.mellin_rho(KernelSpec.parse(name[4:]))
    try:
        return TEST_FUNCTIONS[name]()
    except KeyError:
        raise UsageError(
            f"unknown test function {name!r}; choose from {sorted(TEST_FUNCTIONS)} or rho:p/q"
        ) from None


def zero_table(args) -> ZeroTable:
    if args.zeros:
        return load_zero_table(args.zeros)
    return bundled_zero_table(1000)


def multiset(args, required: bool = False) -> ZeroMultiset:
    if args.zeros_inline and args.multiset:
        raise UsageError("give --zeros-inline or --multiset, not both")
    if args.zeros_inline:
        return parse_inline_zeros(args.zeros_inline)
    if args.multiset:
        return load_multiset(args.multiset)
    if required:
        raise UsageError("a zero multiset is required (--zeros-inline or --multiset)")
    return ZeroMultiset()


def line_spec(args, s: Optional[complex] = None) -> LineQuadratureSpec:
    delta = args.delta
    if delta is None:
        delta = 0.05
        if s is not None and s.real > 0.5:
            # Keep s at least 10 half-widths off the line.
            delta = min(delta, (s.real - 0.5) / 10)
    return LineQuadratureSpec(
        truncation_height=args.T,
        base_panel_count=args.base_panels,
        refinement_limit=args.refinement_limit,
        singularity_halfwidth=delta,
        target_tol=args.tol,
    )


# ---------------------------------------------------------------------------
# Output helpers.


def complex_fields(prefix: str, z: complex) -> dict:
    z = complex(z)
    return {f"{prefix}_re": z.real, f"{prefix}_im": z.imag}


def render_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def render_record(doc: dict, fmt: str) -> str:
    """A flat dict as JSON, or as a one-row CSV."""
    if fmt == "json":
        return render_json(doc)
    return render_csv(list(doc), [list(doc.values())])


# ---------------------------------------------------------------------------
# Commands.  Each returns the output text.


def cmd_zeta(args) -> str:
    z = zeta(args.s, args.zeta_tol)
    doc = {**complex_fields("s", args.s), **complex_fields("value", z.value),
           "abs_error_estimate": z.abs_error_estimate}
    return render_record(doc, args.format)


def cmd_kernel(args) -> str:
    spec = KernelSpec(args.alpha)
    cutoff = args.cutoff if args.cutoff is not None else Fraction(1, 1000)
    if args.mellin is not None:
        step = rho_as_step(spec, cutoff)
        m = mellin_step(step, args.mellin)
        closed = mellin_rho_closed(spec, args.mellin)
        doc = {"alpha": str(spec), "cutoff": float(step.cutoff),
               **complex_fields("s", args.mellin), **complex_fields("mellin_step", m.value),
               "abs_error_bound": m.abs_error_bound, **complex_fields("closed_form", closed),
               "difference": abs(m.value - closed)}
        return render_record(doc, args.format)
    step = rho_as_step(spec, cutoff)
    if args.format == "csv":
        return step.to_csv()
    return render_json({"alpha": str(spec), **step.to_json()})


def _family(args) -> list[KernelSpec]:
    if args.alphas:
        return parse_alpha_list(args.alphas)
    return reciprocal_family(args.n_max)


def cmd_gram(args) -> str:
    system = build_gram(_family(args), args.cutoff, args.threads)
    labels = [str(a) for a in system.alphas]
    if args.format == "csv":
        n = len(system)
        rows = [(labels[j], labels[k], float(system.matrix[j, k]))
                for j in range(n) for k in range(n)]
        rows += [("1", labels[j], float(system.rhs[j])) for j in range(n)]
        return render_csv(["row", "col", "inner_product"], rows)
    return render_json({
        "alphas": labels,
        "matrix": system.matrix.tolist(),
        "rhs": system.rhs.tolist(),
        "entry_error_bound": system.entry_error_bound,
        "cutoff": system.cutoff,
        "min_eigenvalue": system.min_eigenvalue(),
    })


def cmd_distance(args) -> str:
    if args.alphas:
        system = build_gram(parse_alpha_list(args.alphas), args.cutoff, args.threads)
        res = distance_to_one(system)
        if args.format == "csv":
            return render_csv(["N", "d_N", "projection_norm_N"],
                              [(len(system), res.distance, res.projection_norm)])
        return render_json(res.to_json(system))
    rows = distance_sequence(args.n_max, "reciprocal", args.cutoff, args.threads)
    if args.format == "csv":
        return sequence_to_csv(rows)
    return render_json([{"N": n, "d_N": d, "projection_norm_N": p} for n, d, p in rows])


def _heights(args) -> list[float]:
    return [args.T * 2**k for k in range(args.study + 1)]


def cmd_bsy(args) -> str:
    table = zero_table(args)
    spec = line_spec(args)

    def run(sp):
        return bsy_integral(sp, table, args.threads)

    if args.study:
        return _study_output(run, spec, _heights(args), args.format)
    return render_record({**run(spec).to_json(), "zeros": table.source}, args.format)


def _study_output(run, spec, heights, fmt) -> str:
    rows = convergence_study(run, spec, heights)
    if fmt == "csv":
        return study_to_csv(rows)
    return render_json([{**res.to_json(), "doubling_change": change}
                        for _, res, change in rows])


def cmd_outer(args) -> str:
    spec = line_spec(args, args.at)
    if args.log_modulus == "zeta":
        fn = LineFunction.log_abs_zeta(zero_table(args))
    else:
        fn = LineFunction.neg_log_abs_w()

    def run(sp):
        return outer_integral(fn, args.at, sp, args.threads)

    if args.study:
        return _study_output(run, spec, _heights(args), args.format)
    return render_record({**complex_fields("s", args.at), **run(spec).to_json()}, args.format)


def cmd_factor_check(args) -> str:
    ms = multiset(args)
    table = zero_table(args)
    spec = line_spec(args, args.at)
    chk = factorization_check(args.at, ms, spec, table, args.threads)
    doc = chk.to_json()
    if args.format == "csv":
        flat = {k: v for k, v in doc.items() if k != "outer"}
        flat.update({f"outer_{k}": v for k, v in doc["outer"].items()})
        return render_record(flat, "csv")
    return render_json(doc)


def cmd_cauchy(args) -> str:
    h = test_function(args.h)
    res = cauchy_eval(h, args.at, line_spec(args, args.at), args.threads)
    doc = {**complex_fields("s", args.at), **res.to_json(),
           **complex_fields("direct", _direct_value(args.h, args.at))}
    return render_record(doc, args.format)


def _direct_value(name: str, s: complex) -> complex:
    if name.startswith("rho:"):
        return mellin_rho_closed(KernelSpec.parse(name[4:]), s)
    return {"1/w": 1 / s, "1/(w+1)": 1 / (s + 1), "1/w^2": 1 / (s * s)}[name]


def cmd_blaschke(args) -> str:
    ms = multiset(args)
    value = blaschke_product(ms, args.at)
    doc = {**complex_fields("s", args.at), **complex_fields("value", value),
           "b_at_one": b_at_one(ms), "bsy_sum": bsy_sum(ms) if ms else 0.0}
    return render_record(doc, args.format)


def cmd_lemma_check(args) -> str:
    ms = multiset(args)
    res = lemma_orthogonality(ms, test_function(args.h), line_spec(args), args.threads)
    return render_record({**res.to_json(), "abs_value": abs(res.value)}, args.format)


def cmd_project_check(args) -> str:
    ms = multiset(args, required=True)
    res = synthetic_projection_norm(ms, line_spec(args), args.threads)
    b1 = b_at_one(ms)
    expected = 1.0 - b1 * b1
    doc = {**res.to_json(), "b_at_one": b1, "expected": expected,
           "discrepancy": abs(res.value.real - expected)}
    return render_record(doc, args.format)


def semigroup_rhs(alpha, lam, cutoff):
    """lam^-1/2 (rho_{alpha lam} - alpha rho_lam), both cut at lam * cutoff."""
    if lam == 1:
        return rho_as_step(KernelSpec(alpha), cutoff)
    c = lam * exact(cutoff)
    diff = rho_as_step(KernelSpec(alpha * lam), c) - rho_as_step(KernelSpec(lam), c) * alpha
    return diff * inv_sqrt(lam)


def cmd_semigroup_check(args) -> str:
    alpha, lam, cutoff = args.alpha, args.lam, args.cutoff
    if cutoff is None:
        cutoff = Fraction(1, 1000)
    spec = KernelSpec(alpha)
    lhs = semigroup_apply(lam, rho_as_step(spec, cutoff))
    equal = lhs == semigroup_rhs(alpha, lam, cutoff)
    doc = {"alpha": str(spec), "lambda": str(lam), "cutoff": str(cutoff),
           "pieces": len(lhs), "equal": equal}
    return render_record(doc, args.format)


# ---------------------------------------------------------------------------
# Self-test.


def self_test(args, out) -> bool:
    """Run the identity suite; one PASS/FAIL line per check."""
    checks: list[tuple[str, Callable[[], str]]] = []

    def check(name):
        def deco(fn):
            checks.append((name, fn))
            return fn
        return deco

    table_holder: dict = {}

    @check("zero table loads")
    def _():
        table_holder["t"] = zero_table(args)
        t = table_holder["t"]
        return f"{len(t)} ordinates up to {t.max_height!r} from {t.source}"

    @check("zeta vanishes at first tabulated ordinate")
    def _():
        t = table_holder.get("t") or bundled_zero_table(100)
        z = zeta(complex(0.5, t.ordinates[0]), 1e-10)
        assert abs(z.value) < 1e-5, f"|zeta| = {abs(z.value):.3e}"
        return f"|zeta| = {abs(z.value):.3e}"

    @check("zeta(2) = pi^2/6")
    def _():
        err = abs(zeta(2).value - math.pi**2 / 6)
        assert err < 1e-12, f"error {err:.3e}"
        return f"error {err:.3e}"

    @check("semigroup identity")
    def _():
        pairs = [("1/2", "1/2"), ("3/10", "4/5"), ("2/7", "1/4"), ("5/9", "2/3")]
        for a, lam in pairs:
            a, lam = exact(a), exact(lam)
            cut = Fraction(1, 200)
            lhs = semigroup_apply(lam, rho_as_step(KernelSpec(a), cut))
            assert lhs == semigroup_rhs(a, lam, cut), f"alpha={a}, lambda={lam}"
        return f"{len(pairs)} exact pairs"

    @check("Mellin consistency")
    def _():
        step = rho_as_step(KernelSpec(Fraction(1, 2)), Fraction(1, 10**6))
        m = mellin_step(step, 2)
        closed = mellin_rho_closed(KernelSpec(Fraction(1, 2)), 2)
        diff = abs(m.value - closed)
        assert diff <= m.abs_error_bound + 1e-13, f"diff {diff:.3e}"
        assert abs(closed - math.pi**2 / 48) < 1e-13
        return f"|step - closed| = {diff:.3e} <= {m.abs_error_bound:.3e}"

    @check("Cauchy formula with 1/w")
    def _():
        spec = LineQuadratureSpec(1e4)
        res = cauchy_eval(TEST_FUNCTIONS["1/w"](), 2, spec, args.threads)
        err = abs(res.value - 0.5)
        assert err < 1e-3, f"error {err:.3e}"
        return f"value {res.value.real!r}, error {err:.3e}"

    @check("empty multiset trivia")
    def _():
        ms = ZeroMultiset()
        assert blaschke_product(ms, 2 + 1j) == 1
        assert b_at_one(ms) == 1.0 and bsy_sum(ms) == 0.0
        res = lemma_orthogonality(ms, TEST_FUNCTIONS["1/(w+1)"](), LineQuadratureSpec(100))
        assert res.value == 0, f"lemma integral {res.value!r}"
        return "B = 1, B(1) = 1, sum = 0, lemma integral = 0"

    ok = True
    for name, fn in checks:
        try:
            detail = fn()
            out.write(f"PASS {name}: {detail}\n")
        except Exception as exc:  # noqa: BLE001 - isolation is the point
            ok = False
            out.write(f"FAIL {name}: {type(exc).__name__}: {exc}\n")
    out.write(f"{'all checks passed' if ok else 'some checks failed'}\n")
    return ok


# ---------------------------------------------------------------------------
# Parser.


def _add_common(p: argparse.ArgumentParser, fmt: str = "json") -> None:
    p.add_argument("--format", choices=("csv", "json"), default=fmt,
                   help=f"output format (default {fmt})")
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")


def _add_line(p: argparse.ArgumentParser, T: float) -> None:
    p.add_argument("--T", type=parse_real, default=T, help=f"truncation height (default {T:g})")
    p.add_argument("--base-panels", type=int, default=256,
                   help="initial panel count (default 256)")
    p.add_argument("--refinement-limit", type=int, default=40,
                   help="maximum bisection depth (default 40)")
    p.add_argument("--delta", type=parse_real, default=None,
                   help="singularity half-width (default 0.05, reduced to (Re s - 1/2)/10 "
                        "when s is closer to the line)")
    p.add_argument("--tol", type=parse_real, default=1e-8,
                   help="quadrature target tolerance (default 1e-8)")


def _add_zeros(p: argparse.ArgumentParser) -> None:
    p.add_argument("--zeros", metavar="PATH",
                   help="zero-ordinate table (default: bundled first 1000 ordinates)")


def _add_multiset(p: argparse.ArgumentParser) -> None:
    p.add_argument("--zeros-inline", metavar="LIST",
                   help='hypothetical off-line zeros, e.g. "0.75:1, 0.6+2.5i:2"')
    p.add_argument("--multiset", metavar="PATH",
                   help="JSON array of {re, im, multiplicity} objects")


def _add_study(p: argparse.ArgumentParser) -> None:
    p.add_argument("--study", type=int, default=0, metavar="K",
                   help="also run at 2T, ..., 2^K T and emit the convergence table (default 0)")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nymanlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("zeta", help="evaluate zeta(s) with an error estimate")
    p.add_argument("--s", type=parse_complex, required=True, help="point, e.g. 0.5+14.1347i")
    p.add_argument("--zeta-tol", type=parse_real, default=1e-12, help="tolerance (default 1e-12)")
    _add_common(p)

    p = sub.add_parser("kernel", help="rho_alpha as a step function, or its Mellin transform")
    p.add_argument("--alpha", type=parse_exact, required=True, help="0 < alpha < 1, e.g. 1/3")
    p.add_argument("--cutoff", type=parse_exact, default=None,
                   help="lower end epsilon of the support (default 1/1000)")
    p.add_argument("--mellin", type=parse_complex, default=None, metavar="S",
                   help="compare the step-function Mellin transform with the closed form at S")
    _add_common(p)

    for name, help_text, fmt in (
        ("gram", "Gram matrix and right-hand side of a kernel family", "json"),
        ("distance", "least-squares distance from 1 to the span", "csv"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--n-max", type=int, default=20,
                       help="reciprocal family alpha = 1/2..1/(n+1) (default 20)")
        p.add_argument("--alphas", default=None, help='explicit family, e.g. "1/2,1/3,2/5"')
        p.add_argument("--cutoff", type=parse_real, default=1e-8,
                       help="inner-product cutoff epsilon (default 1e-8)")
        _add_common(p, fmt)

    p = sub.add_parser("bsy", help="the truncated log|zeta| / |w|^2 integral")
    _add_line(p, 200.0)
    _add_zeros(p)
    _add_study(p)
    _add_common(p)

    p = sub.add_parser("outer", help="log of the outer function at s")
    p.add_argument("--at", type=parse_complex, required=True, help="point s, Re(s) > 1/2")
    p.add_argument("--log-modulus", choices=("zeta", "neg-log-w"), default="zeta",
                   help="boundary data: log|zeta| or -log|w| (default zeta)")
    _add_line(p, 500.0)
    _add_zeros(p)
    _add_study(p)
    _add_common(p)

    p = sub.add_parser("factor-check", help="residual of the inner-outer factorization at s")
    p.add_argument("--at", type=parse_complex, required=True, help="point s, Re(s) > 1/2, s != 1")
    _add_line(p, 500.0)
    _add_zeros(p)
    _add_multiset(p)
    _add_common(p)

    p = sub.add_parser("cauchy", help="Cauchy integral of a test function at s")
    p.add_argument("--at", type=parse_complex, required=True, help="point s, Re(s) > 1/2")
    p.add_argument("--h", default="1/w", help='test function: 1/w, 1/(w+1), 1/w^2 or rho:p/q '
                   "(default 1/w)")
    _add_line(p, 1e4)
    _add_common(p)

    p = sub.add_parser("blaschke", help="Blaschke product of a zero multiset at s")
    p.add_argument("--at", type=parse_complex, default=complex(1), help="point s (default 1)")
    _add_multiset(p)
    _add_common(p)

    p = sub.add_parser("lemma-check", help="orthogonality integral for 1/w - B(1)B/w")
    p.add_argument("--h", default="1/(w+1)", help="test function (default 1/(w+1))")
    _add_line(p, 1e4)
    _add_multiset(p)
    _add_common(p)

    p = sub.add_parser("project-check", help="||1/w - B(1)B/w||^2 against 1 - B(1)^2")
    _add_line(p, 1e4)
    _add_multiset(p)
    _add_common(p)

    p = sub.add_parser("semigroup-check", help="U(lambda) rho_alpha against the exact identity")
    p.add_argument("--alpha", type=parse_exact, required=True, help="0 < alpha < 1")
    p.add_argument("--lambda", dest="lam", type=parse_exact, required=True,
                   help="0 < lambda <= 1")
    p.add_argument("--cutoff", type=parse_exact, default=None, help="epsilon (default 1/1000)")
    _add_common(p)

    p = sub.add_parser("self-test", help="run the identity suite")
    _add_zeros(p)
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    return parser


COMMANDS = {
    "zeta": cmd_zeta,
    "kernel": cmd_kernel,
    "gram": cmd_gram,
    "distance": cmd_distance,
    "bsy": cmd_bsy,
    "outer": cmd_outer,
    "factor-check": cmd_factor_check,
    "cauchy": cmd_cauchy,
    "blaschke": cmd_blaschke,
    "lemma-check": cmd_lemma_check,
    "project-check": cmd_project_check,
    "semigroup-check": cmd_semigroup_check,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be at least 1")
        if args.command == "self-test":
            return EXIT_OK if self_test(args, stdout) else EXIT_FAILED
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        stderr.write(f"nymanlab: usage error: {exc}\n")
        return EXIT_USAGE
    except (InputParseError, OSError) as exc:
        stderr.write(f"nymanlab: input error: {exc}\n")
        return EXIT_PARSE
    except PreconditionError as exc:
        stderr.write(f"nymanlab: precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    except (ConvergenceError, NymanLabError, ArithmeticError) as exc:
        stderr.write(f"nymanlab: numerical failure: {exc}\n")
        return EXIT_CONVERGENCE
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            stderr.write(f"nymanlab: cannot write output: {exc}\n")
            return EXIT_PARSE
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))
