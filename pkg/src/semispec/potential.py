"""Single-well potentials: builtins, expression-backed models and validation."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import ExprAst, ExprError, compile_expr, contains_abs, differentiate, parse_expression, to_source

__all__ = [
    "PotentialModel",
    "ValidationReport",
    "PotentialValidationError",
    "BUILTINS",
    "make_potential",
    "parse_potential",
    "validate_single_well",
    "phi_integrand",
]

Evaluator = Callable[[float | np.ndarray], float | np.ndarray]


class PotentialValidationError(ValueError):
    def __init__(self, report: "ValidationReport"):
        failed = "; ".join(report.failures)
        super().__init__(f"potential {report.descriptor!r} failed validation: {failed}")
        self.report = report


@dataclass(frozen=True, eq=False)
class PotentialModel:
    """A potential ``V`` with its first three derivatives.

    ``curvature`` is ``V''(0)``. Low-lying formulas use the frequency
    ``sqrt(curvature / 2)`` so that ``V''(0) = 2`` recovers the usual
    harmonic normalization.
    """

    descriptor: str
    V: Evaluator
    dV: Evaluator
    d2V: Evaluator
    d3V: Evaluator
    curvature: float
    even: bool = False
    smooth: bool = True

    @property
    def frequency(self) -> float:
        return math.sqrt(self.curvature / 2.0)

    def __repr__(self) -> str:
        return f"PotentialModel({self.descriptor!r})"


@dataclass
class ValidationReport:
    descriptor: str
    checks: dict[str, bool] = field(default_factory=dict)
    phi_tail_max: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "descriptor": self.descriptor,
            "passed": self.passed,
            "checks": dict(self.checks),
            "phi_tail_max": dict(self.phi_tail_max),
            "warnings": list(self.warnings),
            "failures": list(self.failures),
        }


# ------------------------------------------------------------------ builtins


def _harmonic() -> tuple:
    return (
        lambda t: t * t,
        lambda t: 2.0 * t,
        lambda t: 2.0 + 0.0 * t,
        lambda t: 0.0 * t,
        True,
    )


def _quartic(a: float) -> tuple:
    if a < 0:
        raise ValueError("quartic coefficient must be >= 0")
    return (
        lambda t: t * t + a * t**4,
        lambda t: 2.0 * t + 4.0 * a * t**3,
        lambda t: 2.0 + 12.0 * a * t * t,
        lambda t: 24.0 * a * t,
        True,
    )


def _asym(b: float) -> tuple:
    # t^2 + b t^3 exp(-t^2)
    def V(t):
        return t * t + b * t**3 * np.exp(-t * t)

    def dV(t):
        return 2.0 * t + b * (3.0 * t**2 - 2.0 * t**4) * np.exp(-t * t)

    def d2V(t):
        return 2.0 + b * (6.0 * t - 14.0 * t**3 + 4.0 * t**5) * np.exp(-t * t)

    def d3V(t):
        return b * (6.0 - 54.0 * t**2 + 48.0 * t**4 - 8.0 * t**6) * np.exp(-t * t)

    return V, dV, d2V, d3V, b == 0.0


def _coshwell() -> tuple:
    # 2 (cosh t - 1), written with sinh to avoid cancellation near 0
    return (
        lambda t: 4.0 * np.sinh(0.5 * t) ** 2,
        lambda t: 2.0 * np.sinh(t),
        lambda t: 2.0 * np.cosh(t),
        lambda t: 2.0 * np.sinh(t),
        True,
    )


BUILTINS: dict[str, tuple[Callable[..., tuple], int]] = {
    "harmonic": (_harmonic, 0),
    "quartic": (_quartic, 1),
    "asym": (_asym, 1),
    "coshwell": (_coshwell, 0),
}


def make_potential(spec: ExprAst | str, *params: float, strict: bool = False,
                   descriptor: str | None = None) -> PotentialModel:
    """Build a potential from a builtin name (plus parameters) or an AST.

    >>> make_potential("quartic", 0.1).V(1.0)
    1.1
    """
    if isinstance(spec, str):
        if spec not in BUILTINS:
            raise ValueError(f"unknown builtin potential {spec!r}; known: {sorted(BUILTINS)}")
        factory, nparams = BUILTINS[spec]
        if len(params) != nparams:
            raise ValueError(f"builtin {spec!r} takes {nparams} parameter(s), got {len(params)}")
        V, dV, d2V, d3V, even = factory(*map(float, params))
        name = descriptor or (f"{spec}({', '.join(repr(float(p)) for p in params)})" if params else spec)
        model = PotentialModel(name, V, dV, d2V, d3V, float(d2V(0.0)), even=even)
    else:
        if params:
            raise ValueError("expression potentials take no parameters")
        derivs = [spec]
        for _ in range(3):
            derivs.append(differentiate(derivs[-1]))
        fns = [compile_expr(d) for d in derivs]
        model = PotentialModel(
            descriptor or f"expr:{to_source(spec)}",
            *fns,
            curvature=float(fns[2](0.0)),
            even=False,
            smooth=not contains_abs(spec),
        )
    if strict:
        report = validate_single_well(model)
        if not report.passed:
            raise PotentialValidationError(report)
    return model


_BUILTIN_RE = re.compile(r"^\s*([a-z]+)\s*(?:\((.*)\))?\s*$")


def parse_potential(text: str, strict: bool = False) -> PotentialModel:
    """Parse a command-line potential: ``harmonic``, ``quartic(0.1)`` or ``expr:<expression>``."""
    if text.startswith("expr:"):
        source = text[len("expr:"):]
        return make_potential(parse_expression(source), strict=strict, descriptor=text)
    m = _BUILTIN_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse potential {text!r}")
    name, args = m.group(1), m.group(2)
    params = [float(a) for a in args.split(",")] if args and args.strip() else []
    return make_potential(name, *params, strict=strict)


# ---------------------------------------------------------------- validation


def phi_integrand(p: PotentialModel, t: np.ndarray) -> np.ndarray:
    """``V^(-1/4) (V^(-1/4))''``, defined away from the minimum."""
    V, dV, d2V = p.V(t), p.dV(t), p.d2V(t)
    return 5.0 / 16.0 * V**-2.5 * dV**2 - 0.25 * V**-1.5 * d2V


def validate_single_well(p: PotentialModel, half_width: float = 20.0,
                         samples: int = 2001) -> ValidationReport:
    """Numerical checks of the well assumptions; never raises.

    The growth check is a sampled heuristic: ``|phi|`` over the outer tenth of
    ``[1, half_width]`` must be at least 10x smaller than over the inner tenth.
    """
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    if samples < 100:
        raise ValueError("samples must be >= 100")
    report = ValidationReport(p.descriptor)
    try:
        _run_checks(p, report, half_width, samples)
    except ExprError as exc:
        if len(report.phi_tail_max) < 2:
            report.checks.pop("phi_decay", None)
        report.checks["evaluation"] = False
        report.failures.append(f"potential cannot be evaluated on [-{half_width:g}, {half_width:g}]: {exc}")
    return report


def _run_checks(p: PotentialModel, report: ValidationReport, half_width: float, samples: int) -> None:
    def fail(key: str, message: str) -> None:
        report.checks[key] = False
        report.failures.append(message)

    with np.errstate(all="ignore"):
        v0, dv0, d2v0 = float(p.V(0.0)), float(p.dV(0.0)), float(p.d2V(0.0))
    report.checks["minimum_value"] = True
    if not abs(v0) <= 1e-12:
        fail("minimum_value", f"V(0) = {v0:.6g} != 0 (witness t=0)")
    report.checks["critical_point"] = True
    if not abs(dv0) <= 1e-10:
        fail("critical_point", f"V'(0) = {dv0:.6g} != 0 (witness t=0)")
    report.checks["curvature"] = True
    if not d2v0 > 0:
        fail("curvature", f"V''(0) = {d2v0:.6g} <= 0 (witness t=0)")

    grid = np.linspace(-half_width, half_width, samples)
    grid = grid[grid != 0.0]
    with np.errstate(all="ignore"):
        dv = np.asarray(p.dV(grid), dtype=float)
    report.checks["single_well"] = True
    bad = ~(np.sign(dv) == np.sign(grid))
    if np.any(bad):
        witness = float(grid[np.argmax(bad)])
        fail("single_well", f"sign(V'(t)) != sign(t) (witness t={witness:.6g})")

    report.checks["smooth"] = p.smooth
    if not p.smooth:
        report.warnings.append("expression uses abs/sign; V is not C-infinity at their kinks")

    report.checks["phi_decay"] = True
    if half_width > 1.0:
        for side, sgn in (("right", 1.0), ("left", -1.0)):
            ts = sgn * np.linspace(1.0, half_width, samples)
            with np.errstate(all="ignore"):
                phi = np.abs(np.asarray(phi_integrand(p, ts), dtype=float))
            phi = np.where(np.isfinite(phi), phi, np.inf)
            report.phi_tail_max[side] = float(np.max(phi))
            tenth = max(samples // 10, 1)
            near, far = float(np.max(phi[:tenth])), float(np.max(phi[-tenth:]))
            if not far * 10.0 <= near:
                report.checks["phi_decay"] = False
                report.warnings.append(
                    f"phi-function does not decay 10x on the {side} tail "
                    f"(|phi| {near:.3g} near t={sgn:+.0f}, {far:.3g} near t={sgn * half_width:+.3g})"
                )

