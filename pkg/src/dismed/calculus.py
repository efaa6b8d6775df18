"""Three-valued evaluation primitives for the condition notation.

The carrier type is :class:`ExtendedValue`, a closed interval [lower, upper];
a point value has lower == upper and the fully unknown value ("Indeterminate")
is (-inf, +inf). Arithmetic is standard interval arithmetic; comparisons
resolve only when the operand intervals force one answer, so a comparison
against a partially known Max/Min expression can still be decidable.

Derivatives are never symbolic: a partial ∂driven/∂driver is estimated by
central finite differences through a declared ResponseFunction, and the
absence of a declared link yields Indeterminate rather than an error or a
guessed slope. A derivative of a symbol with respect to itself is the
identity's derivative (1, then 0 for higher orders).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .errors import DivisionByZeroInterval, IndeterminateIntegrand, PathCoverageError
from .model import Scenario, TimePath, eval_response, split_driver

INF = math.inf


@dataclass(frozen=True)
class ExtendedValue:
    lower: float
    upper: float

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper) or self.lower > self.upper:
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")

    @staticmethod
    def point(x: float) -> "ExtendedValue":
        return ExtendedValue(x, x)

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper

    @property
    def is_indeterminate(self) -> bool:
        return self.lower == -INF and self.upper == INF

    def __add__(self, other: "ExtendedValue") -> "ExtendedValue":
        return ExtendedValue(self.lower + other.lower, self.upper + other.upper)

    def __sub__(self, other: "ExtendedValue") -> "ExtendedValue":
        return ExtendedValue(self.lower - other.upper, self.upper - other.lower)

    def __neg__(self) -> "ExtendedValue":
        return ExtendedValue(-self.upper, -self.lower)

    def __mul__(self, other: "ExtendedValue") -> "ExtendedValue":
        prods = [_mul(a, b) for a in (self.lower, self.upper)
                 for b in (other.lower, other.upper)]
        return ExtendedValue(min(prods), max(prods))

    def scale(self, k: float) -> "ExtendedValue":
        a, b = _mul(self.lower, k), _mul(self.upper, k)
        return ExtendedValue(min(a, b), max(a, b))

    def divide(self, other: "ExtendedValue") -> "ExtendedValue":
        if other.lower <= 0.0 <= other.upper:
            raise DivisionByZeroInterval(
                f"divisor interval [{other.lower}, {other.upper}] contains 0")
        recip = ExtendedValue(min(1.0 / other.lower, 1.0 / other.upper),
                              max(1.0 / other.lower, 1.0 / other.upper))
        return self * recip

    def abs(self) -> "ExtendedValue":
        if self.lower >= 0:
            return self
        if self.upper <= 0:
            return ExtendedValue(-self.upper, -self.lower)
        return ExtendedValue(0.0, max(-self.lower, self.upper))

    def to_json(self) -> list:
        def enc(x: float):
            return None if math.isinf(x) else x
        return [enc(self.lower), enc(self.upper)]


INDETERMINATE = ExtendedValue(-INF, INF)


def _mul(a: float, b: float) -> float:
    # interval convention: 0 * inf = 0
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def ev_max(values: Sequence[ExtendedValue]) -> ExtendedValue:
    return ExtendedValue(max(v.lower for v in values), max(v.upper for v in values))


def ev_min(values: Sequence[ExtendedValue]) -> ExtendedValue:
    return ExtendedValue(min(v.lower for v in values), min(v.upper for v in values))


def cmp_gt(a: ExtendedValue, b: ExtendedValue) -> Optional[bool]:
    """Three-valued a > b: True/False when forced, None when undecidable."""
    if a.lower > b.upper:
        return True
    if a.upper <= b.lower:
        return False
    return None


def cmp_lt(a: ExtendedValue, b: ExtendedValue) -> Optional[bool]:
    return cmp_gt(b, a)


def cmp_abs_le(v: ExtendedValue, tol: float) -> Optional[bool]:
    """Three-valued |v| <= tol."""
    a = v.abs()
    if a.upper <= tol:
        return True
    if a.lower > tol:
        return False
    return None


def approx_equal(a: float, b: float, rel_tol: float) -> bool:
    """Symmetric closeness test: |a - b| <= rel_tol * max(|a|, |b|, 1e-12)."""
    if rel_tol <= 0:
        raise ValueError("rel_tol must be > 0")
    return abs(a - b) <= rel_tol * max(abs(a), abs(b), 1e-12)


def joint_prob(a: float, b: float, mode: str = "product") -> float:
    """Joint closing probability under an independence or comonotone reading."""
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ValueError("joint_prob arguments must lie in [0, 1]")
    return _joint_raw(a, b, mode)


def _joint_raw(a: float, b: float, mode: str) -> float:
    # Arithmetic core without domain checks; derivative stencils may probe
    # response values slightly outside [0, 1].
    if mode == "product":
        return a * b
    if mode == "min":
        return min(a, b)
    raise ValueError(f"unknown intersection mode {mode!r}")


def argmax_state(states, candidates: Sequence[str] = ("E_s", "E_p", "E_m")) -> str:
    """State with the largest value; ties break by the candidates' order
    (E_s over E_p over E_m for the full triple)."""
    best = None
    best_v = -INF
    for name in candidates:
        v = getattr(states, name)
        if v > best_v:
            best, best_v = name, v
    return best


def argmin_state(states, candidates: Sequence[str] = ("E_m", "E_p", "E_s")) -> str:
    """Mirror of argmax_state; ties break E_m over E_p over E_s."""
    best = None
    best_v = INF
    for name in candidates:
        v = getattr(states, name)
        if v < best_v:
            best, best_v = name, v
    return best


# ---------------------------------------------------------------------------
# Expression trees
# ---------------------------------------------------------------------------

class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Sym(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Add(Expr):
    parts: tuple[Expr, ...]


@dataclass(frozen=True)
class Sub(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Mul(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Div(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class MaxE(Expr):
    parts: tuple[Expr, ...]


@dataclass(frozen=True)
class MinE(Expr):
    parts: tuple[Expr, ...]


@dataclass(frozen=True)
class Joint(Expr):
    """Intersection of two closing probabilities, read per configuration."""
    a: str
    b: str


@dataclass(frozen=True)
class IntegralE(Expr):
    """Trapezoid integral of the integrand over the configured horizon."""
    integrand: Expr


@dataclass(frozen=True)
class Axis:
    """Differentiation axis: a symbol, a "+"-bundle, or the max of symbols."""
    kind: str                      # "sym" | "bundle" | "max"
    names: tuple[str, ...]

    @staticmethod
    def sym(name: str) -> "Axis":
        parts = split_driver(name)
        if len(parts) > 1:
            return Axis("bundle", parts)
        return Axis("sym", parts)

    @staticmethod
    def bundle(*names: str) -> "Axis":
        return Axis("bundle", tuple(names))

    @staticmethod
    def max_of(*names: str) -> "Axis":
        return Axis("max", tuple(names))


@dataclass(frozen=True)
class Deriv(Expr):
    driven: Expr
    axis: Axis
    order: int


@dataclass(frozen=True)
class EvalSettings:
    intersection: str = "product"
    fd_step_scale: float = 1e-3
    horizon_T: float = 1.0
    horizon_dt: float = 0.125


def _resolve_axis(s: Scenario, axis: Axis, state: Optional[str]) -> tuple[str, float]:
    """Return (axis name for response lookup, base value along the axis)."""
    if axis.kind == "sym":
        name = axis.names[0]
        return name, s.value(name, state)
    if axis.kind == "bundle":
        return "+".join(axis.names), s.bundle_value(axis.names, state)
    # max axis: the component with the largest base value wins; ties go to the
    # earlier name, except the listing-state triple which follows argmax_state.
    if set(axis.names) == {"E_s", "E_p", "E_m"}:
        name = argmax_state(_StateView(s, state))
        return name, s.value(name, state)
    best, best_v = None, -INF
    for name in axis.names:
        v = s.value(name, state)
        if v > best_v:
            best, best_v = name, v
    return best, best_v


class _StateView:
    """Adapter so argmax_state can read overlay-resolved state values."""

    def __init__(self, s: Scenario, state: Optional[str]):
        self._s = s
        self._state = state

    def __getattr__(self, name: str) -> float:
        return self._s.value(name, self._state)


def _value_under_driver(s: Scenario, expr: Expr, axis_name: str, x: float,
                        state: Optional[str], settings: EvalSettings,
                        notes: Optional[list]) -> ExtendedValue:
    """Evaluate ``expr`` with the driver pinned to x.

    Symbols resolve to: the driver value itself (identity), a declared
    response evaluated at x, or Indeterminate when no link exists.
    """
    if isinstance(expr, Sym):
        if expr.name == axis_name:
            return ExtendedValue.point(x)
        r = s.response_for(expr.name, axis_name, state)
        if r is None:
            if notes is not None:
                note = f"missing response ({expr.name}, {axis_name})"
                if note not in notes:
                    notes.append(note)
            return INDETERMINATE
        return ExtendedValue.point(eval_response(r, x))
    if isinstance(expr, Add):
        acc = ExtendedValue.point(0.0)
        for p in expr.parts:
            acc = acc + _value_under_driver(s, p, axis_name, x, state, settings, notes)
        return acc
    if isinstance(expr, Joint):
        a = _value_under_driver(s, Sym(expr.a), axis_name, x, state, settings, notes)
        b = _value_under_driver(s, Sym(expr.b), axis_name, x, state, settings, notes)
        if a.is_point and b.is_point:
            return ExtendedValue.point(_joint_raw(a.lower, b.lower, settings.intersection))
        return INDETERMINATE
    if isinstance(expr, Const):
        return ExtendedValue.point(expr.value)
    raise TypeError(f"unsupported driven expression {type(expr).__name__}")


def _central_difference(f: Callable[[float], ExtendedValue], x0: float,
                        order: int, h: float) -> ExtendedValue:
    if order == 1:
        return (f(x0 + h) - f(x0 - h)).scale(1.0 / (2.0 * h))
    if order == 2:
        num = f(x0 + h) - f(x0).scale(2.0) + f(x0 - h)
        return num.scale(1.0 / (h * h))
    if order == 3:
        num = (f(x0 + 2 * h) - f(x0 + h).scale(2.0)
               + f(x0 - h).scale(2.0) - f(x0 - 2 * h))
        return num.scale(1.0 / (2.0 * h ** 3))
    raise ValueError("order must be 1, 2 or 3")


def finite_difference(s: Scenario, driven: str | Expr, driver: str | Axis,
                      order: int, h: Optional[float] = None,
                      context: Optional[str] = None,
                      settings: EvalSettings = EvalSettings(),
                      notes: Optional[list] = None) -> ExtendedValue:
    """Central-difference estimate of ∂^order driven / ∂driver^order.

    ``driven`` may be a symbol name, a "+"-joined sum of symbols, or an
    expression; ``driver`` a symbol/bundle name or an Axis. Missing links
    yield Indeterminate, never an error.
    """
    if isinstance(driven, str):
        parts = split_driver(driven)
        driven_expr: Expr = Sym(parts[0]) if len(parts) == 1 else \
            Add(tuple(Sym(p) for p in parts))
    else:
        driven_expr = driven
    axis = Axis.sym(driver) if isinstance(driver, str) else driver
    axis_name, x0 = _resolve_axis(s, axis, context)

    # The identity link costs nothing; everything else must be declared.
    if isinstance(driven_expr, Sym) and driven_expr.name == axis_name:
        return ExtendedValue.point(1.0 if order == 1 else 0.0)

    if h is None:
        h = settings.fd_step_scale * max(1.0, abs(x0))

    def f(x: float) -> ExtendedValue:
        return _value_under_driver(s, driven_expr, axis_name, x, context, settings, notes)

    return _central_difference(f, x0, order, h)


def evaluate_expression(s: Scenario, expr: Expr, context: Optional[str] = None,
                        settings: EvalSettings = EvalSettings(),
                        notes: Optional[list] = None) -> ExtendedValue:
    """Evaluate an expression tree to an ExtendedValue under a state context."""
    if isinstance(expr, Const):
        return ExtendedValue.point(expr.value)
    if isinstance(expr, Sym):
        return ExtendedValue.point(s.value(expr.name, context))
    if isinstance(expr, Add):
        acc = ExtendedValue.point(0.0)
        for p in expr.parts:
            acc = acc + evaluate_expression(s, p, context, settings, notes)
        return acc
    if isinstance(expr, Sub):
        return (evaluate_expression(s, expr.a, context, settings, notes)
                - evaluate_expression(s, expr.b, context, settings, notes))
    if isinstance(expr, Mul):
        return (evaluate_expression(s, expr.a, context, settings, notes)
                * evaluate_expression(s, expr.b, context, settings, notes))
    if isinstance(expr, Div):
        return evaluate_expression(s, expr.a, context, settings, notes).divide(
            evaluate_expression(s, expr.b, context, settings, notes))
    if isinstance(expr, MaxE):
        return ev_max([evaluate_expression(s, p, context, settings, notes)
                       for p in expr.parts])
    if isinstance(expr, MinE):
        return ev_min([evaluate_expression(s, p, context, settings, notes)
                       for p in expr.parts])
    if isinstance(expr, Joint):
        return ExtendedValue.point(_joint_raw(s.value(expr.a, context),
                                              s.value(expr.b, context),
                                              settings.intersection))
    if isinstance(expr, Deriv):
        return finite_difference(s, expr.driven, expr.axis, expr.order,
                                 context=context, settings=settings, notes=notes)
    if isinstance(expr, IntegralE):
        return ExtendedValue.point(integrate_horizon(
            s, expr.integrand, settings.horizon_T, settings.horizon_dt, settings))
    raise TypeError(f"unsupported expression node {type(expr).__name__}")


# ---------------------------------------------------------------------------
# Horizon integrals
# ---------------------------------------------------------------------------

def _path_value(tp: TimePath, t: float, T: float) -> float:
    if tp.kind == "constant":
        return tp.value
    if tp.kind == "linear":
        return tp.v0 + tp.slope * t
    # samples: linear interpolation; must cover [0, T]
    ts, vs = tp.times, tp.values
    if ts[0] > 0.0 or ts[-1] < T:
        raise PathCoverageError(
            f"time path for {tp.symbol} covers [{ts[0]}, {ts[-1]}], needs [0, {T}]")
    if t <= ts[0]:
        return vs[0]
    if t >= ts[-1]:
        return vs[-1]
    lo, hi = 0, len(ts) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ts[mid] <= t:
            lo = mid
        else:
            hi = mid
    frac = (t - ts[lo]) / (ts[hi] - ts[lo])
    return vs[lo] + frac * (vs[hi] - vs[lo])


def _eval_at_time(s: Scenario, expr: Expr, t: float, T: float,
                  settings: EvalSettings) -> float:
    def sym_at(name: str) -> float:
        tp = s.time_path_for(name)
        if tp is not None:
            return _path_value(tp, t, T)
        return s.value(name)

    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Sym):
        return sym_at(expr.name)
    if isinstance(expr, Add):
        return sum(_eval_at_time(s, p, t, T, settings) for p in expr.parts)
    if isinstance(expr, Sub):
        return _eval_at_time(s, expr.a, t, T, settings) - _eval_at_time(s, expr.b, t, T, settings)
    if isinstance(expr, Mul):
        return _eval_at_time(s, expr.a, t, T, settings) * _eval_at_time(s, expr.b, t, T, settings)
    if isinstance(expr, Div):
        denom = _eval_at_time(s, expr.b, t, T, settings)
        if denom == 0.0:
            raise DivisionByZeroInterval("integrand divides by zero")
        return _eval_at_time(s, expr.a, t, T, settings) / denom
    if isinstance(expr, MaxE):
        return max(_eval_at_time(s, p, t, T, settings) for p in expr.parts)
    if isinstance(expr, MinE):
        return min(_eval_at_time(s, p, t, T, settings) for p in expr.parts)
    if isinstance(expr, Joint):
        return _joint_raw(sym_at(expr.a), sym_at(expr.b), settings.intersection)
    if isinstance(expr, Deriv):
        v = finite_difference(s, expr.driven, expr.axis, expr.order, settings=settings)
        if not v.is_point:
            raise IndeterminateIntegrand("integrand contains an indeterminate derivative")
        return v.lower
    raise TypeError(f"unsupported integrand node {type(expr).__name__}")


def integrate_horizon(s: Scenario, integrand: Expr, T: float, dt: float,
                      settings: EvalSettings = EvalSettings()) -> float:
    """Trapezoid-rule integral of ``integrand`` over [0, T] at spacing dt.

    Symbols follow their declared time paths and otherwise stay at base
    values; the rule is exact for constant and linear integrands.
    """
    if not (T > 0 and 0 < dt <= T):
        raise ValueError("require T > 0 and 0 < dt <= T")
    nodes = []
    k = 0
    while True:
        t = k * dt
        if t >= T - 1e-12 * max(1.0, T):
            nodes.append(T)
            break
        nodes.append(t)
        k += 1
    values = [_eval_at_time(s, integrand, t, T, settings) for t in nodes]
    total = 0.0
    for (t0, v0), (t1, v1) in zip(zip(nodes, values), zip(nodes[1:], values[1:])):
        total += 0.5 * (v0 + v1) * (t1 - t0)
    return total
