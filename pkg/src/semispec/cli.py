"""Command-line front end.

Exit codes
----------
0  success
1  ``compare`` found entries without a partner
2  bad or missing flags, unparseable potential or config
3  method-domain mismatch (e.g. ``evans`` with ``eps < 1e-3``)
4  validation failure under ``--strict``
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np
import scipy

from . import __version__
from .action import invert_J
from .evans import EPS_MIN, EvansDomainError, evans_spectrum, prufer_shoot
from .expr import ExprError
from .harness import STUDIES, StudyError
from .potential import PotentialValidationError, PotentialModel, parse_potential, validate_single_well
from .quantize import bohr_sommerfeld_spectrum, low_lying_spectrum
from .refsolver import reference_spectrum
from .spectrum import EigenRecord, Spectrum
from .wkbfun import build_eigenfunction

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_UNMATCHED", "EXIT_USAGE", "EXIT_DOMAIN",
           "EXIT_VALIDATION"]

EXIT_OK = 0
EXIT_UNMATCHED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_VALIDATION = 4

METHOD_NAMES = {"bs": "bohr-sommerfeld", "lowlying": "low-lying", "evans": "evans", "reference": "reference"}
STUDY_DEFAULTS = {
    "bs-remainder": {"eps_list": [0.1, 0.05, 0.025, 0.0125], "window": [0.25, 0.55]},
    "low-lying": {"eps_list": [0.02, 0.01, 0.005, 0.0025], "nmax": 2},
    "gaps": {"eps": 0.05, "window": [0.3, 0.7]},
    "intermediate": {"eps_list": [0.01, 0.005, 0.0025]},
}


class UsageError(Exception):
    pass


class DomainError(Exception):
    pass


# ------------------------------------------------------------------- parsing


def _eps_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--potential", help="builtin (harmonic, quartic(a), asym(b), coshwell) or expr:<expression>")
    sp.add_argument("--strict", action="store_true", default=None, help="validate the potential first (exit 4 on failure)")
    sp.add_argument("--out", help="write output here instead of stdout")
    sp.add_argument("--format", choices=("csv", "json"), help="output format")
    sp.add_argument("--config", help="key=value file presetting flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semispec", description="Semiclassical eigenvalues of eps^2 x'' = (V - E) x.")
    parser.add_argument("--version", action="version", version=f"semispec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="compute a spectrum")
    _common(sp)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--method", choices=sorted(METHOD_NAMES))
    sp.add_argument("--emax", type=float)
    sp.add_argument("--emin", type=float, help="lower end of the evans search range")
    sp.add_argument("--nmax", type=int)
    sp.add_argument("--trace-dump", help="evans only: CSV of (n, side, t, theta) at each eigenvalue")

    cp = sub.add_parser("compare", help="pair two methods by index")
    _common(cp)
    cp.add_argument("--eps", type=float)
    cp.add_argument("--method", action="append", choices=sorted(METHOD_NAMES), help="give exactly twice")
    cp.add_argument("--emax", type=float)
    cp.add_argument("--emin", type=float)
    cp.add_argument("--nmax", type=int)
    cp.add_argument("--range-a", nargs=2, type=float, metavar=("LO", "HI"), help="energy window for the first method")
    cp.add_argument("--range-b", nargs=2, type=float, metavar=("LO", "HI"), help="energy window for the second method")

    st = sub.add_parser("study", help="run a scaling study")
    _common(st)
    st.add_argument("--tag", choices=sorted(STUDIES))
    st.add_argument("--eps-list", type=_eps_list)
    st.add_argument("--eps", type=float, help="gaps study only")
    st.add_argument("--nmax", type=int, help="low-lying study only")
    st.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"), help="window on n*eps")

    ef = sub.add_parser("eigenfunction", help="export a WKB eigenfunction")
    _common(ef)
    ef.add_argument("--eps", type=float)
    ef.add_argument("--n", type=int)
    ef.add_argument("--method", choices=sorted(METHOD_NAMES), help="method supplying E_n")
    ef.add_argument("--grid-points", type=int)

    va = sub.add_parser("validate", help="check the single-well assumptions")
    _common(va)
    va.add_argument("--half-width", type=float)
    va.add_argument("--samples", type=int)
    return parser


def _read_config(path: str) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    out = {}
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    actions = {a.dest: a for a in sub._actions}  # noqa: SLF001
    for key, raw in _read_config(args.config).items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if getattr(args, key) is not None:
            continue
        act = actions[key]
        try:
            if act.nargs in (2, "+"):
                value = [act.type(v) if act.type else v for v in raw.replace(",", " ").split()]
            elif isinstance(act, argparse._StoreTrueAction):  # noqa: SLF001
                value = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(act, argparse._AppendAction):  # noqa: SLF001
                value = [v.strip() for v in raw.split(",")]
            else:
                value = act.type(raw) if act.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"bad config value for {key!r}: {exc}") from None
        if act.choices is not None:
            bad = [v for v in (value if isinstance(value, list) else [value]) if v not in act.choices]
            if bad:
                raise UsageError(f"config {key!r}: invalid choice {bad[0]!r}")
        setattr(args, key, value)


# ------------------------------------------------------------------- helpers


def _need(args, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _potential(args) -> PotentialModel:
    _need(args, "potential")
    try:
        return parse_potential(args.potential, strict=bool(args.strict))
    except PotentialValidationError:
        raise
    except (ExprError, ValueError) as exc:
        raise UsageError(f"bad --potential: {exc}") from None


def _metadata(p: PotentialModel, **extra: Any) -> dict[str, Any]:
    meta = {"potential": p.descriptor,
            "versions": {"semispec": __version__, "numpy": np.__version__, "scipy": scipy.__version__}}
    meta.update(extra)
    return meta


def _emit(text: str, args) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _compute(p: PotentialModel, method: str, eps: float, emax: float | None, nmax: int | None,
             emin: float | None = None) -> Spectrum:
    if not eps > 0:
        raise UsageError("--eps must be positive")
    if method == "lowlying":
        if nmax is None:
            if emax is None:
                raise UsageError("lowlying needs --nmax or --emax")
            nmax = math.floor((emax / (eps * p.frequency) - 1.0) / 2.0)
            if nmax < 0:
                return Spectrum("low-lying", (), {})
        return low_lying_spectrum(p, eps, nmax)
    if emax is None:
        if nmax is None:
            raise UsageError("--emax or --nmax is required")
        emax = invert_J(p, (nmax + 1.0) * eps)
    if not emax > 0:
        raise UsageError("--emax must be positive")
    if method == "bs":
        spec = bohr_sommerfeld_spectrum(p, eps, emax)
    elif method == "reference":
        spec = reference_spectrum(p, eps, emax)
    else:
        if eps < EPS_MIN:
            raise DomainError(f"evans requires eps >= {EPS_MIN:g}")
        lo = 0.25 * eps * p.frequency if emin is None else emin
        if not 0 < lo < emax:
            raise UsageError("evans range needs 0 < --emin < --emax")
        try:
            spec = evans_spectrum(p, eps, (lo, emax))
        except EvansDomainError as exc:
            raise DomainError(str(exc)) from None
    if nmax is not None:
        spec = Spectrum(spec.method, tuple(r for r in spec if r.n <= nmax), spec.metadata)
    return spec


def _spectrum_payload(spec: Spectrum, fmt: str, meta: dict[str, Any]) -> str:
    if fmt == "csv":
        return spec.to_csv()
    data = spec.to_dict()
    data["metadata"] = {**meta, **data["metadata"]}
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------------ commands


def cmd_spectrum(args) -> int:
    _need(args, "eps")
    p = _potential(args)
    method = args.method or "reference"
    spec = _compute(p, method, args.eps, args.emax, args.nmax, args.emin)
    if args.trace_dump:
        if method != "evans":
            raise UsageError("--trace-dump applies to --method evans only")
        _dump_traces(p, args.eps, spec, args.trace_dump)
    meta = _metadata(p, method=METHOD_NAMES[method], eps=args.eps, emax=args.emax, nmax=args.nmax)
    _emit(_spectrum_payload(spec, args.format or "csv", meta), args)
    return EXIT_OK


def _dump_traces(p: PotentialModel, eps: float, spec: Spectrum, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "side", "t", "theta"])
        for r in spec:
            for side in ("u", "s"):
                tr = prufer_shoot(p, eps, r.energy, side, record=True)
                for t, th in zip(tr.t, tr.thetas):
                    w.writerow([r.n, side, repr(float(t)), repr(float(th))])


def cmd_compare(args) -> int:
    _need(args, "eps")
    methods = args.method or []
    if len(methods) != 2:
        raise UsageError("compare needs --method exactly twice")
    p = _potential(args)
    specs = []
    for m, rng in zip(methods, (args.range_a, args.range_b)):
        emax, emin = args.emax, args.emin
        spec = _compute(p, m, args.eps, emax, args.nmax, emin)
        if rng is not None:
            lo, hi = rng
            spec = Spectrum(spec.method, tuple(r for r in spec if lo <= r.energy <= hi), spec.metadata)
        specs.append(spec)
    a, b = specs[0].by_index(), specs[1].by_index()
    rows = []
    for n in sorted(set(a) | set(b)):
        ea = a[n].energy if n in a else None
        eb = b[n].energy if n in b else None
        matched = ea is not None and eb is not None
        rows.append({"n": n, "energy_a": ea, "energy_b": eb,
                     "abs_diff": abs(ea - eb) if matched else None, "matched": matched})
    unmatched = sum(not r["matched"] for r in rows)
    if (args.format or "csv") == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "energy_a", "energy_b", "abs_diff", "matched"])
        for r in rows:
            w.writerow([r["n"], "" if r["energy_a"] is None else repr(r["energy_a"]),
                        "" if r["energy_b"] is None else repr(r["energy_b"]),
                        "" if r["abs_diff"] is None else repr(r["abs_diff"]), str(r["matched"]).lower()])
        text = buf.getvalue()
    else:
        meta = _metadata(p, methods=[METHOD_NAMES[m] for m in methods], eps=args.eps)
        text = json.dumps({"metadata": meta, "rows": rows, "unmatched": unmatched}, indent=2, sort_keys=True) + "\n"
    _emit(text, args)
    return EXIT_UNMATCHED if unmatched else EXIT_OK


def cmd_study(args) -> int:
    _need(args, "tag", "potential")
    p = _potential(args)
    defaults = STUDY_DEFAULTS[args.tag]
    try:
        if args.tag == "gaps":
            window = args.window or defaults["window"]
            report = STUDIES["gaps"](p, args.eps or defaults["eps"], tuple(window))
        else:
            eps_list = args.eps_list or defaults["eps_list"]
            if args.tag == "bs-remainder":
                report = STUDIES[args.tag](p, eps_list, tuple(args.window or defaults["window"]))
            elif args.tag == "low-lying":
                nmax = defaults["nmax"] if args.nmax is None else args.nmax
                report = STUDIES[args.tag](p, eps_list, nmax)
            else:
                report = STUDIES[args.tag](p, eps_list)
    except StudyError as exc:
        raise DomainError(str(exc)) from None
    if (args.format or "json") == "csv":
        text = report.to_csv()
    else:
        data = report.to_dict()
        data["metadata"] = _metadata(p, tag=args.tag)
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    _emit(text, args)
    return EXIT_OK


def cmd_eigenfunction(args) -> int:
    _need(args, "eps", "n")
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    p = _potential(args)
    method = args.method or "reference"
    spec = _compute(p, method, args.eps, None, args.n)
    recs = spec.by_index()
    if args.n not in recs:
        raise DomainError(f"method {method} produced no eigenvalue with index {args.n}")
    E = recs[args.n].energy
    f = build_eigenfunction(p, args.eps, E, args.grid_points or 1000, n=args.n)
    if (args.format or "csv") == "csv":
        text = f.to_csv()
    else:
        data = {"metadata": _metadata(p, eps=args.eps, n=args.n, energy=E, method=METHOD_NAMES[method],
                                      kind=f.kind, seam_mismatch=f.seam_mismatch),
                "t": f.grid.tolist(), "x": f.values.tolist(), "region": list(f.regions)}
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    _emit(text, args)
    return EXIT_OK


def cmd_validate(args) -> int:
    strict, args.strict = bool(args.strict), False
    p = _potential(args)
    try:
        report = validate_single_well(p, args.half_width or 20.0, args.samples or 2001)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = report.to_dict()
    data["metadata"] = _metadata(p)
    _emit(json.dumps(data, indent=2, sort_keys=True) + "\n", args)
    return EXIT_VALIDATION if strict and not report.passed else EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "compare": cmd_compare,
    "study": cmd_study,
    "eigenfunction": cmd_eigenfunction,
    "validate": cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, parser)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"semispec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"semispec: method-domain mismatch: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except PotentialValidationError as exc:
        print(f"semispec: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        # e.g. a malformed SEMISPEC_THREADS
        print(f"semispec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
