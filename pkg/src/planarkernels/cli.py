"""Command-line interface: kernel values, verification suites, plot grids."""

from __future__ import annotations

import argparse
import math
import re
import sys

import numpy as np

from .classical import ahlfors, garabedian, szego
from .errors import InputError, KernelError, PointNotInteriorError
from .geometry import contains, parse_domain
from .hardy import MAX_UPSAMPLE, Weight, sigma, weighted_garabedian
from .potential import bergman, bergman_boundary, green, harmonic_measure, lambda_boundary, lambda_capital, poisson_weight
from .verify import DEFAULT_TOLERANCES, SUITES, Workspace, report_csv, run_suite

KERNELS = ("szego", "garabedian", "bergman", "lambda", "sigma", "weighted_garabedian", "ahlfors", "green")
FIELDS = ("green", "ahlfors_modulus", "harmonic_measure")
DEFAULT_NODES = 256
DEFAULT_BASIS_ORDER = 80


class UsageError(InputError):
    cause = "usage"


class WeightSpecError(InputError):
    cause = "weight-spec"


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` (also ``a``, ``bi``, ``a-bi``)."""
    s = text.strip().replace(" ", "")
    if s.endswith("i"):
        s = s[:-1] + "j"
    try:
        return complex(s)
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(?P<fn>cos|sin)|(?P<t>t)|(?P<op>[-+*()]))")


def parse_weight_expression(expr: str):
    """Compile a weight expression in t: numbers, cos(k*t), sin(k*t), +, -, *.

    Returns a function of the curve parameter.
    """
    tokens, pos = [], 0
    expr = expr.strip()
    while pos < len(expr):
        m = _TOKEN.match(expr, pos)
        if not m or m.end() == pos:
            raise WeightSpecError(f"unexpected text in weight expression at {expr[pos:]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    tokens.append(("end", ""))
    i = 0

    def peek():
        return tokens[i]

    def take(kind, value=None):
        nonlocal i
        k, v = tokens[i]
        if k != kind or (value is not None and v != value):
            raise WeightSpecError(f"malformed weight expression {expr!r}")
        i += 1
        return v

    def trig():
        fn = take("fn")
        take("op", "(")
        k = 1.0
        if peek()[0] == "num":
            k = float(take("num"))
            if k != int(k):
                raise WeightSpecError("frequencies must be integers")
            take("op", "*")
        take("t")
        take("op", ")")
        f = np.cos if fn == "cos" else np.sin
        return lambda t, k=int(k), f=f: f(k * t)

    def factor():
        k, v = peek()
        if k == "num":
            c = float(take("num"))
            return lambda t, c=c: np.full_like(t, c)
        if k == "fn":
            return trig()
        if (k, v) == ("op", "-"):
            take("op", "-")
            inner = factor()
            return lambda t: -inner(t)
        raise WeightSpecError(f"malformed weight expression {expr!r}")

    def term():
        fs = [factor()]
        while peek() == ("op", "*"):
            take("op", "*")
            fs.append(factor())
        return lambda t: math.prod(f(t) for f in fs)

    def expression():
        terms = [(1.0, term())]
        while peek()[0] == "op" and peek()[1] in "+-":
            sign = 1.0 if take("op") == "+" else -1.0
            terms.append((sign, term()))
        return lambda t: sum(s * f(t) for s, f in terms)

    fn = expression()
    if peek()[0] != "end":
        raise WeightSpecError(f"malformed weight expression {expr!r}")
    return fn


def make_weight(spec: str, grid):
    spec = (spec or "unit").strip()
    if spec == "unit":
        return None
    if spec.startswith("poisson"):
        _, _, arg = spec.partition(":")
        A0 = parse_complex(arg) if arg else grid.domain.default_point()
        return poisson_weight(grid, A0)
    return Weight.from_parameter(grid, parse_weight_expression(spec), spec.replace(" ", ""))


def extract_tolerances(argv):
    """Pull ``--tol:<id>=<value>`` / ``--tol:<id> <value>`` out of argv."""
    rest, tols = [], {}
    it = iter(range(len(argv)))
    skip = False
    for k in it:
        if skip:
            skip = False
            continue
        arg = argv[k]
        if arg.startswith("--tol:"):
            key, eq, val = arg[len("--tol:"):].partition("=")
            if not eq:
                if k + 1 >= len(argv):
                    raise UsageError(f"missing value for {arg}")
                val = argv[k + 1]
                skip = True
            if key not in DEFAULT_TOLERANCES:
                raise UsageError(f"unknown tolerance id {key}")
            try:
                tols[key] = float(val)
            except ValueError:
                raise UsageError(f"bad tolerance value {val!r}") from None
        else:
            rest.append(arg)
    return rest, tols


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="planarkernels", description="Kernel functions of planar domains.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--domain", required=True, help="catalog name[:params] or JSON domain file")
        sp.add_argument("--nodes", type=int, default=DEFAULT_NODES, help="nodes per boundary curve")
        sp.add_argument("--basis-order", type=int, default=DEFAULT_BASIS_ORDER, help="Hardy basis order K")
        sp.add_argument("--weight", default="unit", help="unit | poisson:A0 | expression in t")
        sp.add_argument("--a", default=None, help="base point a+bi (default: deepest interior point)")
        sp.add_argument("--out", default=None, help="output CSV path (default stdout)")

    k = sub.add_parser("kernel", help="evaluate a kernel at points")
    common(k)
    k.add_argument("--kernel", required=True, choices=KERNELS)
    pts = k.add_mutually_exclusive_group()
    pts.add_argument("--grid", type=int, default=None, help="n x n grid of interior points")
    pts.add_argument("--z", default=None, help="comma separated points a+bi")
    pts.add_argument("--boundary", action="store_true", help="evaluate at the boundary nodes")

    v = sub.add_parser("verify", help="run verification suites")
    common(v)
    v.add_argument("--suite", default="all", choices=SUITES + ("all",))

    pl = sub.add_parser("plotdata", help="sample a field on a rectangular grid")
    common(pl)
    pl.add_argument("--field", required=True, choices=FIELDS)
    pl.add_argument("--resolution", type=int, default=41)
    pl.add_argument("--j", type=int, default=None, help="curve index for harmonic_measure (1 = outer)")
    return p


def _fmt(x):
    return f"{x:.17g}"


def _grid_points(domain, n):
    x0, x1, y0, y1 = domain.bbox
    xs = np.linspace(x0, x1, n + 2)[1:-1]
    ys = np.linspace(y0, y1, n + 2)[1:-1]
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def _safe_mask(grid, pts):
    """Interior points far enough from the boundary for Cauchy evaluation."""
    inside = contains(grid.domain, pts, strict=False)
    d = np.min(np.abs(pts[:, None] - grid.nodes[None, :]), axis=1)
    return inside & (d >= 6.0 * grid.spacing / MAX_UPSAMPLE)


def _kernel_values(args, ws, a, pts, weight):
    g = ws.grid
    name = args.kernel
    B = ws.basis(weight) if name in ("sigma", "weighted_garabedian") else None
    if args.boundary:
        if name == "szego":
            return szego(ws.basis(), a).samples
        if name == "garabedian":
            return garabedian(ws.basis(), a).samples
        if name == "ahlfors":
            return ahlfors(ws.basis(), a).values.samples
        if name == "sigma":
            return sigma(B, a).samples
        if name == "weighted_garabedian":
            return weighted_garabedian(B, a).samples
        if name == "green":
            return np.zeros(g.N, dtype=complex)
        if name == "bergman":
            return bergman_boundary(g, a).samples
        return lambda_boundary(g, a).samples
    if name == "szego":
        return szego(ws.basis(), a)(pts)
    if name == "garabedian":
        return garabedian(ws.basis(), a)(pts)
    if name == "ahlfors":
        return ahlfors(ws.basis(), a)(pts)
    if name == "sigma":
        return sigma(B, a)(pts)
    if name == "weighted_garabedian":
        return weighted_garabedian(B, a)(pts)
    if name == "green":
        return green(g, a)(pts).astype(complex)
    fn = bergman if name == "bergman" else lambda_capital
    return np.array([fn(g, z, a) for z in pts])


def cmd_kernel(args, ws, out):
    domain = ws.domain
    a = parse_complex(args.a) if args.a else domain.default_point()
    if not contains(domain, a):
        raise PointNotInteriorError(f"base point {a} is not inside the domain")
    weight = make_weight(args.weight, ws.grid)
    if args.boundary:
        pts = ws.grid.nodes
    elif args.z:
        pts = np.array([parse_complex(s) for s in args.z.split(",")])
        for p in pts:
            if not contains(domain, p):
                raise PointNotInteriorError(f"point {p} is not inside the domain")
    else:
        pts = _grid_points(domain, args.grid or 5)
        pts = pts[_safe_mask(ws.grid, pts)]
    vals = _kernel_values(args, ws, a, pts, weight)
    out.write("z_re,z_im,w_re,w_im,value_re,value_im\n")
    for z, v in zip(pts, vals):
        out.write(",".join(_fmt(x) for x in (z.real, z.imag, a.real, a.imag, v.real, v.imag)) + "\n")
    return 0


def cmd_verify(args, ws, out, tolerances):
    weight = make_weight(args.weight, ws.grid)
    a = parse_complex(args.a) if args.a else None
    reports = run_suite(args.suite, ws, weight=weight, a=a, tolerances=tolerances)
    out.write(report_csv(reports))
    for r in reports:
        if r.detail:
            print(f"{r.identity_id}: {r.detail}", file=sys.stderr)
    failed = [r for r in reports if not r.passed]
    if failed:
        print(f"fail: {failed[0].identity_id}", file=sys.stderr)
        return 1
    return 0


def cmd_plotdata(args, ws, out):
    domain, g = ws.domain, ws.grid
    n = args.resolution
    if n < 2:
        raise UsageError("resolution must be at least 2")
    x0, x1, y0, y1 = domain.bbox
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    P = (xs[None, :] + 1j * ys[:, None]).ravel()
    mask = _safe_mask(g, P)
    vals = np.full(P.shape, np.nan)
    a = parse_complex(args.a) if args.a else domain.default_point()
    if args.field == "green":
        keep = mask & (np.abs(P - a) > 1e-12)
        mask = keep
        vals[keep] = green(g, a)(P[keep])
    elif args.field == "ahlfors_modulus":
        vals[mask] = np.abs(ahlfors(ws.basis(), a)(P[mask]))
    else:
        j = args.j if args.j is not None else domain.n
        vals[mask] = harmonic_measure(g, j)(P[mask])
    out.write("x,y,value\n")
    for p, v in zip(P, vals):
        out.write(f"{_fmt(p.real)},{_fmt(p.imag)},{'nan' if np.isnan(v) else _fmt(v)}\n")
    return 0


def run(argv):
    argv, tolerances = extract_tolerances(list(argv))
    args = build_parser().parse_args(argv)
    if args.nodes < 16 or args.nodes % 2:
        raise UsageError("--nodes must be even and at least 16")
    if args.basis_order < 4:
        raise UsageError("--basis-order must be at least 4")
    ws = Workspace(parse_domain(args.domain), args.nodes, args.basis_order)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        if args.command == "kernel":
            return cmd_kernel(args, ws, out)
        if args.command == "verify":
            return cmd_verify(args, ws, out, tolerances)
        return cmd_plotdata(args, ws, out)
    finally:
        if args.out:
            out.close()


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except KernelError as exc:
        print(f"error: {exc.cause}: {exc}".splitlines()[0], file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: bad-input: {exc}".splitlines()[0], file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"error: internal: {type(exc).__name__}: {exc}".splitlines()[0], file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
