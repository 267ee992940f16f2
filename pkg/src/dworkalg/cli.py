"""Command-line front end.

    dworkalg check {dwork,division,koszul,canonical,estimates,fourier,all}
    dworkalg eval EXPR
    dworkalg divide EXPR
    dworkalg reduce EXPR
    dworkalg koszul "f1, f2, ..."

EXPR may be ``-`` (or omitted) to read standard input.  Exit codes: 0 all
checks pass, 1 some check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import __version__
from . import canonical_iso as ci
from . import weyl_dagger as wd
from .errors import DworkAlgError, ParseError
from .modpoly import ModPoly
from .operator_algebra import DiffOp, LaurentPoly
from .padic_core import PadicScalar, TruncationParams
from .parser import parse, parse_operator, show
from .suites import SCHEMA, SUITES, run_suite

# flag name -> TruncationParams field
PARAM_KEYS = {"p": "p", "s": "s", "prec": "N", "deg-lo": "lo", "deg-hi": "hi",
              "order": "K", "level": "m", "seed": "seed"}
CONFIG_KEYS = set(PARAM_KEYS) | {"format"}


class UsageError(Exception):
    pass


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            key = key.lstrip("-")
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{n}: unknown key {key!r}")
            out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dworkalg", allow_abbrev=False,
                                 description="Dwork operators, Frobenius descent and Weyl-algebra division.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--p", type=int)
    common.add_argument("--s", type=int)
    common.add_argument("--prec", type=int, help="p-adic precision N")
    common.add_argument("--deg-lo", type=int, dest="deg_lo")
    common.add_argument("--deg-hi", type=int, dest="deg_hi")
    common.add_argument("--order", type=int, help="order cap K")
    common.add_argument("--level", type=int, help="level m")
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=("text", "json"))
    common.add_argument("--config", help="file of key=value lines; flags override it")
    sub = ap.add_subparsers(dest="verb", required=True)
    c = sub.add_parser("check", parents=[common], allow_abbrev=False, help="run an invariant suite")
    c.add_argument("suite", choices=sorted(SUITES) + ["all"])
    for verb, text in (("eval", "evaluate an expression"), ("divide", "divide by -dy + pi x"),
                       ("reduce", "reduce into the Fourier quotient"),
                       ("koszul", "Koszul complex of a comma-separated sequence")):
        v = sub.add_parser(verb, parents=[common], allow_abbrev=False, help=text)
        v.add_argument("expr", nargs="?", default="-")
    return ap


def resolve(args) -> tuple:
    """(TruncationParams, format) from config file then flags."""
    settings = read_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        v = getattr(args, key.replace("-", "_"))
        if v is not None:
            settings[key] = v
    kw = {}
    for key, field in PARAM_KEYS.items():
        if key in settings:
            try:
                kw[field] = int(settings[key])
            except ValueError:
                raise UsageError(f"{key} must be an integer, got {settings[key]!r}") from None
    fmt = settings.get("format", "text")
    if fmt not in ("text", "json"):
        raise UsageError(f"format must be text or json, got {fmt!r}")
    try:
        params = TruncationParams(**kw)
    except DworkAlgError as exc:
        raise UsageError(str(exc)) from None
    return params, fmt


def _read_expr(expr: str) -> str:
    return sys.stdin.read() if expr == "-" else expr


def _value_json(value) -> dict:
    if isinstance(value, PadicScalar):
        return {"kind": "scalar", "value": value.to_json()}
    if isinstance(value, LaurentPoly):
        return {"kind": "function", "names": list(value.names), "terms": value.to_json()}
    return {"kind": "operator", "names": list(value.names), "terms": value.to_json()}


def _two_dim(text: str, params: TruncationParams) -> wd.DaggerElt:
    caps = wd.default_caps(params)
    return wd.DaggerElt(parse_operator(text, params, ("x", "y"), caps))


def cmd_check(args, params):
    rep = run_suite(args.suite, params)
    data = rep.to_json()
    lines = [f"{c['status'].upper():4}  {c['name']}" + (f"  {json.dumps(c['witness'])}" if c["witness"] else "")
             for c in data["checks"]]
    count = {k: sum(c["status"] == k for c in data["checks"]) for k in ("pass", "fail", "skip")}
    lines.append(f"{count['pass']} passed, {count['fail']} failed, {count['skip']} skipped"
                 f" in {data['wall_time']:.2f}s")
    return data, "\n".join(lines), 1 if rep.failed else 0


def cmd_eval(args, params):
    value = parse(_read_expr(args.expr), params)
    data = {"verb": "eval", **_value_json(value), "text": show(value)}
    return data, show(value), 0


def cmd_divide(args, params):
    P = _two_dim(_read_expr(args.expr), params)
    div = wd.divide_dirac(P, params.m)
    exact = wd.division_exact(P, div)
    data = {"verb": "divide", "level": params.m, "exact": exact, **div.to_json()}
    text = "\n".join([f"Q = {div.Q}", f"R = {div.R}", f"exact: {exact}",
                      f"certified in E^({params.m + 2}) up to p^-{div.constant}: {div.certified}"])
    return data, text, 0 if exact else 1


def cmd_reduce(args, params):
    r = wd.fourier_reduce(_two_dim(_read_expr(args.expr), params))
    return {"verb": "reduce", "names": list(r.names), "terms": r.to_json()}, repr(r), 0


def _to_modpoly(f, mod: int, p: int, names) -> ModPoly:
    terms = {}
    for a, c in f:
        if any(e < 0 for e in a):
            raise UsageError("koszul needs polynomials (no negative exponents)")
        co = c.coeffs()
        if any(co[1:]):
            raise UsageError("koszul needs coefficients in Z_p")
        if co[0] % mod:
            terms[tuple(a)] = co[0] % mod
    return ModPoly(len(names), mod, terms, names)


def cmd_koszul(args, params):
    text = _read_expr(args.expr)
    parts = [t for t in text.split(",") if t.strip()]
    if not parts:
        raise UsageError("koszul needs at least one polynomial")
    names = tuple(sorted({n for t in parts for n in _names_of(t)}, key=_name_key)) or ("x",)
    mod = params.p ** params.N
    zs = []
    for t in parts:
        v = parse_operator(t, params, names)
        if not v.is_function():
            raise UsageError("koszul entries must be functions")
        zs.append(_to_modpoly(v.to_poly(), mod, params.p, names))
    K = ci.KoszulComplex(zs)
    d2 = K.d_squared_zero()
    try:
        homology = {f"H{r}[{D}]": h for (r, D), h in sorted(K.graded_homology().items()) if h}
        regular = not homology
    except ci.DomainError:
        # the rank oracle only handles homogeneous sequences
        homology, regular = None, None
    data = {"verb": "koszul", "names": list(names), "modulus": mod, "d_squared_zero": d2,
            "regular": regular, "homology": homology}
    text = "\n".join([f"sequence: {', '.join(t.strip() for t in parts)} over Z/{mod}",
                      f"d^2 = 0: {d2}",
                      f"regular: {'unknown (inhomogeneous)' if regular is None else regular}",
                      "nonzero graded homology: " + (json.dumps(homology) if homology else "none")])
    return data, text, 0 if d2 else 1


def _names_of(text: str) -> tuple:
    from .parser import infer_names

    return infer_names(text)


def _name_key(n: str):
    return (n[0], int(n[1:]) if n[1:].isdigit() else 0, n)


COMMANDS = {"check": cmd_check, "eval": cmd_eval, "divide": cmd_divide, "reduce": cmd_reduce,
            "koszul": cmd_koszul}


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        params, fmt = resolve(args)
        data, text, code = COMMANDS[args.verb](args, params)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DworkAlgError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if fmt == "json":
        data = {"schema": SCHEMA, **data}
        print(json.dumps(data, sort_keys=True, default=str))
    else:
        print(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
