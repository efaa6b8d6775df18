"""Scenario data model: every base symbol of the brokerage model, plus
response functions, listing-state overlays and time paths.

Symbols are grouped into small frozen dataclasses mirroring how they are used
(valuation, costs, information, search, utility, closing, listing states,
closing probabilities, effort/capital, party social capital). The module also
owns scenario validation; violations are data, not exceptions.

Naming notes:
  * broker effort is exposed as ``u_hat`` and the buyer's perception of it as
    ``u_hat_s``; the reputation/social-capital derivatives elsewhere treat the
    effort variable ``e`` as an alias of ``u_hat``.
  * ``B_op``, ``B_it``, ``prospect_count`` and ``valued_time_share`` are
    carried and validated but enter no decision condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Mapping, Optional, Sequence

DECIMALS_SIGNIFICANT = 12

STATE_NAMES = ("E_s", "E_p", "E_m")

#: Decision fields the broker optimizer may steer.
DECISION_FIELDS = ("B_b", "B_s", "B_i", "B_n")


def canonical_round(x: float) -> float:
    """Round to 12 significant digits, the model's canonical numeric identity."""
    if x == 0.0 or not math.isfinite(x):
        return x
    return float(f"{x:.{DECIMALS_SIGNIFICANT}g}")


@dataclass(frozen=True)
class Valuation:
    P: float          # appraised value, > 0
    P_b: float        # value to the buyer, > 0
    P_s: float        # value to the seller, unrestricted sign
    c: float          # commission rate, in (0, 1)


@dataclass(frozen=True)
class BrokerCosts:
    B_b: float            # fixed cost of serving a buyer
    B_n: float            # new-client search cost
    B_op: float           # operating expense per transaction (carried only)
    B_s: float            # listing fixed cost
    B_i: float            # amortized periodic web cost
    B_it: float           # present-value total web cost (carried only)
    prospect_count: int = 1


@dataclass(frozen=True)
class InformationBundle:
    I: float    # total communicated; must equal I_p + I_i
    I_p: float  # personal channel
    I_i: float  # broker website
    I_o: float  # all websites; includes I_i


@dataclass(frozen=True)
class SearchCosts:
    psi_b: float    # buyer, no internet
    psi_bi: float   # buyer, with internet
    psi_s: float    # seller, broker without internet
    psi_si: float   # seller, internet without broker
    psi_sb: float   # seller, broker and internet
    valued_time_share: Optional[float] = None  # compensated share of search time


@dataclass(frozen=True)
class UtilityProfile:
    U_ip: float
    U_iw: float
    U_a: float
    U_sp: float
    U_sw: float
    U_sa: float


@dataclass(frozen=True)
class ClosingCosts:
    pi_b: float    # additional, broker used
    pi_i: float    # additional, broker disintermediated
    pi_sb: float   # total, broker used
    pi_s: float    # total, broker not used


@dataclass(frozen=True)
class ListingStates:
    E_s: float  # super-exclusive
    E_p: float  # semi-exclusive
    E_m: float  # multiple listing


@dataclass(frozen=True)
class ClosingProbabilities:
    rho_p: float  # physical-channel close
    rho_i: float  # internet-channel close
    rho_s: float  # seller self-sale close


@dataclass(frozen=True)
class BrokerEffortCapital:
    u_hat: float    # broker effort cost
    u_hat_s: float  # buyer's perceived value of that effort
    RC_br: float    # reputation capital
    SC_br: float    # social capital


@dataclass(frozen=True)
class PartySocialCapital:
    SC_s: float
    SC_b: float


@dataclass(frozen=True)
class ResponseFunction:
    """A declared univariate functional link ``driven = f(driver)``.

    ``driver`` may be a single symbol or a bundle like ``"U_ip+U_iw"`` whose
    base value is the sum of its components. ``context`` scopes the link to a
    listing state; evaluation falls back from state context to base.
    Polynomials store coefficients lowest order first; piecewise-linear links
    store (x, y) knots with strictly increasing x and extrapolate linearly
    from the terminal segments.
    """

    driven: str
    driver: str
    kind: str  # "polynomial" | "piecewise_linear"
    coeffs: tuple[float, ...] = ()
    knots: tuple[tuple[float, float], ...] = ()
    context: str = "base"


@dataclass(frozen=True)
class TimePath:
    """Time evolution of one symbol over an integration horizon."""

    symbol: str
    kind: str  # "constant" | "linear" | "samples"
    value: float = 0.0                 # constant
    v0: float = 0.0                    # linear intercept
    slope: float = 0.0                 # linear slope
    times: tuple[float, ...] = ()      # samples
    values: tuple[float, ...] = ()


@dataclass(frozen=True)
class Scenario:
    valuation: Valuation
    broker_costs: BrokerCosts
    info: InformationBundle
    search: SearchCosts
    utility: UtilityProfile
    closing: ClosingCosts
    states: ListingStates
    probs: ClosingProbabilities
    effort: BrokerEffortCapital
    social: PartySocialCapital
    responses: tuple[ResponseFunction, ...] = ()
    time_paths: tuple[TimePath, ...] = ()
    overlays: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    label: str = "scenario"

    def value(self, name: str, state: Optional[str] = None) -> float:
        """Base value of a symbol, honoring a listing-state overlay."""
        if state is not None:
            ov = self.overlays.get(state)
            if ov is not None and name in ov:
                return float(ov[name])
        group, attr = SYMBOLS[name]
        return float(getattr(getattr(self, group), attr))

    def bundle_value(self, names: Sequence[str], state: Optional[str] = None) -> float:
        return sum(self.value(n, state) for n in names)

    def response_for(self, driven: str, driver: str,
                     state: Optional[str] = None) -> Optional[ResponseFunction]:
        """Look up a link in the state context, falling back to base."""
        idx = _response_index(self)
        if state is not None:
            r = idx.get((driven, driver, state))
            if r is not None:
                return r
        return idx.get((driven, driver, "base"))

    def time_path_for(self, symbol: str) -> Optional[TimePath]:
        for tp in self.time_paths:
            if tp.symbol == symbol:
                return tp
        return None


# (symbol name) -> (Scenario attribute, group attribute)
SYMBOLS: dict[str, tuple[str, str]] = {}
for _group, _cls in (
    ("valuation", Valuation),
    ("broker_costs", BrokerCosts),
    ("info", InformationBundle),
    ("search", SearchCosts),
    ("utility", UtilityProfile),
    ("closing", ClosingCosts),
    ("states", ListingStates),
    ("probs", ClosingProbabilities),
    ("effort", BrokerEffortCapital),
    ("social", PartySocialCapital),
):
    for _f in fields(_cls):
        if _f.name in ("prospect_count", "valued_time_share"):
            continue
        SYMBOLS[_f.name] = (_group, _f.name)

PROBABILITY_SYMBOLS = ("rho_p", "rho_i", "rho_s")

#: Open/closed numeric domain per symbol, used by validation and sampling.
#: Entries are (low, high, low_open, high_open); absent symbols are unrestricted.
SYMBOL_DOMAINS: dict[str, tuple[float, float, bool, bool]] = {
    "P": (0.0, math.inf, True, True),
    "P_b": (0.0, math.inf, True, True),
    "c": (0.0, 1.0, True, True),
    "rho_p": (0.0, 1.0, False, False),
    "rho_i": (0.0, 1.0, False, False),
    "rho_s": (0.0, 1.0, False, False),
}


def in_domain(name: str, value: float) -> bool:
    if not math.isfinite(value):
        return False
    dom = SYMBOL_DOMAINS.get(name)
    if dom is None:
        return True
    lo, hi, lo_open, hi_open = dom
    if value < lo or (lo_open and value == lo):
        return False
    if value > hi or (hi_open and value == hi):
        return False
    return True


_RESP_INDEX_CACHE: dict[int, dict] = {}


def _response_index(s: Scenario) -> dict[tuple[str, str, str], ResponseFunction]:
    key = id(s)
    cached = _RESP_INDEX_CACHE.get(key)
    if cached is not None and cached[0] is s.responses:
        return cached[1]
    idx = {(r.driven, r.driver, r.context): r for r in s.responses}
    if len(_RESP_INDEX_CACHE) > 4096:
        _RESP_INDEX_CACHE.clear()
    _RESP_INDEX_CACHE[key] = (s.responses, idx)
    return idx


def split_driver(driver: str) -> tuple[str, ...]:
    """Components of a (possibly bundled) driver name."""
    return tuple(part.strip() for part in driver.split("+"))


def with_values(s: Scenario, updates: Mapping[str, float]) -> Scenario:
    """Return a copy of ``s`` with the given symbol values replaced.

    No re-validation is performed; what-if evaluation is allowed to leave
    response anchors stale.
    """
    by_group: dict[str, dict[str, float]] = {}
    for name, value in updates.items():
        group, attr = SYMBOLS[name]
        by_group.setdefault(group, {})[attr] = float(value)
    changes = {g: replace(getattr(s, g), **kw) for g, kw in by_group.items()}
    return replace(s, **changes)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]

    def codes(self) -> tuple[str, ...]:
        return tuple(v.code for v in self.violations)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [{"code": v.code, "message": v.message} for v in self.violations],
        }


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate_scenario(s: Scenario) -> ValidationReport:
    """Check every model invariant. Deterministic and side-effect free."""
    out: list[Violation] = []

    def bad(code: str, msg: str) -> None:
        out.append(Violation(code, msg))

    for name in SYMBOLS:
        v = s.value(name)
        if not _finite(v):
            bad("NonFiniteValue", f"{name} = {v!r} is not finite")
    if _finite(s.valuation.P) and s.valuation.P <= 0:
        bad("NonPositivePrice", f"P = {s.valuation.P} must be > 0")
    if _finite(s.valuation.P_b) and s.valuation.P_b <= 0:
        bad("NonPositivePrice", f"P_b = {s.valuation.P_b} must be > 0")
    if _finite(s.valuation.c) and not (0.0 < s.valuation.c < 1.0):
        bad("CommissionOutOfRange", f"c = {s.valuation.c} must lie in (0, 1)")
    if s.broker_costs.prospect_count < 1:
        bad("ProspectCountOutOfRange",
            f"prospect_count = {s.broker_costs.prospect_count} must be >= 1")
    vts = s.search.valued_time_share
    if vts is not None and not (_finite(vts) and 0.0 <= vts <= 1.0):
        bad("ValuedTimeShareOutOfRange", f"valued_time_share = {vts!r} must lie in [0, 1]")
    for name in PROBABILITY_SYMBOLS:
        v = s.value(name)
        if _finite(v) and not (0.0 <= v <= 1.0):
            bad("ProbabilityOutOfRange", f"{name} = {v} must lie in [0, 1]")

    info = s.info
    if all(_finite(x) for x in (info.I, info.I_p, info.I_i)):
        if canonical_round(info.I) != canonical_round(info.I_p + info.I_i):
            bad("InformationIdentity",
                f"I = {info.I} must equal I_p + I_i = {info.I_p + info.I_i}")
    if all(_finite(x) for x in (info.I_o, info.I_i)) and info.I_o < info.I_i:
        bad("InformationInclusion", f"I_o = {info.I_o} must be >= I_i = {info.I_i}")

    _validate_overlays(s, bad)
    _validate_responses(s, bad)
    _validate_time_paths(s, bad)

    return ValidationReport(ok=not out, violations=tuple(out))


def _validate_overlays(s: Scenario, bad) -> None:
    for state, overrides in s.overlays.items():
        if state not in STATE_NAMES:
            bad("OverlayUnknownState", f"overlay state {state!r} is not one of {STATE_NAMES}")
            continue
        for name, value in overrides.items():
            if name not in SYMBOLS:
                bad("OverlayUnknownSymbol", f"overlay {state} overrides unknown symbol {name!r}")
                continue
            if name in STATE_NAMES:
                bad("OverlayListingState",
                    f"overlay {state} may not override listing-state value {name}")
            if not _finite(value):
                bad("NonFiniteValue", f"overlay {state}.{name} = {value!r} is not finite")
        touched = {"I", "I_p", "I_i"} & set(overrides)
        if touched:
            i_v = s.value("I", state)
            ip_v = s.value("I_p", state)
            ii_v = s.value("I_i", state)
            if all(_finite(x) for x in (i_v, ip_v, ii_v)) and \
                    canonical_round(i_v) != canonical_round(ip_v + ii_v):
                bad("InformationIdentity",
                    f"under overlay {state}: I = {i_v} must equal I_p + I_i = {ip_v + ii_v}")


MAX_POLY_DEGREE = 6
RESPONSE_CONSISTENCY_RTOL = 1e-9


def eval_response(r: ResponseFunction, x: float) -> float:
    """Evaluate a response link at a driver value."""
    if r.kind == "polynomial":
        acc = 0.0
        for coef in reversed(r.coeffs):
            acc = acc * x + coef
        return acc
    # piecewise linear with linear extrapolation from the end segments
    ks = r.knots
    if len(ks) == 1:
        return ks[0][1]
    if x <= ks[0][0]:
        (x0, y0), (x1, y1) = ks[0], ks[1]
    elif x >= ks[-1][0]:
        (x0, y0), (x1, y1) = ks[-2], ks[-1]
    else:
        lo, hi = 0, len(ks) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ks[mid][0] <= x:
                lo = mid
            else:
                hi = mid
        (x0, y0), (x1, y1) = ks[lo], ks[hi]
    t = (x - x0) / (x1 - x0)
    return y0 + t * (y1 - y0)


def _validate_responses(s: Scenario, bad) -> None:
    seen: set[tuple[str, str, str]] = set()
    for r in s.responses:
        ident = f"({r.driven}, {r.driver}, {r.context})"
        if r.driven not in SYMBOLS:
            bad("ResponseUnknownSymbol", f"response {ident}: unknown driven symbol {r.driven!r}")
            continue
        parts = split_driver(r.driver)
        if any(p not in SYMBOLS for p in parts):
            bad("ResponseUnknownSymbol", f"response {ident}: unknown driver symbol in {r.driver!r}")
            continue
        if r.driven in parts:
            bad("ResponseSelfLink", f"response {ident}: driven may not appear in its own driver")
            continue
        if r.context != "base" and r.context not in STATE_NAMES:
            bad("ResponseUnknownContext", f"response {ident}: context {r.context!r}")
            continue
        key = (r.driven, r.driver, r.context)
        if key in seen:
            bad("ResponseDuplicate", f"duplicate response {ident}")
            continue
        seen.add(key)
        if r.kind == "polynomial":
            if not r.coeffs or len(r.coeffs) - 1 > MAX_POLY_DEGREE:
                bad("ResponseDegree",
                    f"response {ident}: polynomial degree must be 0..{MAX_POLY_DEGREE}")
                continue
            if not all(_finite(c) for c in r.coeffs):
                bad("NonFiniteValue", f"response {ident}: non-finite coefficient")
                continue
        elif r.kind == "piecewise_linear":
            xs = [k[0] for k in r.knots]
            if len(r.knots) < 1 or any(b <= a for a, b in zip(xs, xs[1:])):
                bad("ResponseKnots", f"response {ident}: knots must be strictly increasing")
                continue
            if not all(_finite(k[0]) and _finite(k[1]) for k in r.knots):
                bad("NonFiniteValue", f"response {ident}: non-finite knot")
                continue
        else:
            bad("ResponseKind", f"response {ident}: unknown kind {r.kind!r}")
            continue

        # Consistency: the link must pass through the scenario's stored point,
        # evaluated in the link's own context.
        ctx = None if r.context == "base" else r.context
        try:
            x0 = s.bundle_value(parts, ctx)
            y0 = s.value(r.driven, ctx)
        except KeyError:
            continue
        if _finite(x0) and _finite(y0):
            y_hat = eval_response(r, x0)
            if abs(y_hat - y0) > RESPONSE_CONSISTENCY_RTOL * max(1.0, abs(y0)):
                bad("ResponseConsistency",
                    f"response {ident}: f({x0}) = {y_hat} but stored {r.driven} = {y0}")

        # Communicated information must rise, at an increasing rate, with the
        # broker's cost of providing it.
        if r.driven == "I" and r.driver == "B_b" and _finite(x0):
            h = 1e-3 * max(1.0, abs(x0))
            d1 = (eval_response(r, x0 + h) - eval_response(r, x0 - h)) / (2 * h)
            d2 = (eval_response(r, x0 + h) - 2 * eval_response(r, x0)
                  + eval_response(r, x0 - h)) / (h * h)
            if not (d1 > 0 and d2 > 0):
                bad("InformationMonotonicity",
                    f"response {ident}: I(B_b) must have positive first and second "
                    f"central differences at B_b = {x0} (got {d1:.6g}, {d2:.6g})")


def _validate_time_paths(s: Scenario, bad) -> None:
    seen: set[str] = set()
    for tp in s.time_paths:
        if tp.symbol not in SYMBOLS:
            bad("TimePathUnknownSymbol", f"time path for unknown symbol {tp.symbol!r}")
            continue
        if tp.symbol in seen:
            bad("TimePathDuplicate", f"duplicate time path for {tp.symbol}")
            continue
        seen.add(tp.symbol)
        if tp.kind == "constant":
            if not _finite(tp.value):
                bad("NonFiniteValue", f"time path {tp.symbol}: non-finite value")
        elif tp.kind == "linear":
            if not (_finite(tp.v0) and _finite(tp.slope)):
                bad("NonFiniteValue", f"time path {tp.symbol}: non-finite parameters")
        elif tp.kind == "samples":
            ts = tp.times
            if len(ts) < 2 or len(ts) != len(tp.values):
                bad("TimePathInvalid",
                    f"time path {tp.symbol}: needs matching times/values, length >= 2")
            elif any(b <= a for a, b in zip(ts, ts[1:])):
                bad("TimePathInvalid", f"time path {tp.symbol}: times must increase strictly")
            elif not all(_finite(x) for x in (*ts, *tp.values)):
                bad("NonFiniteValue", f"time path {tp.symbol}: non-finite sample")
        else:
            bad("TimePathInvalid", f"time path {tp.symbol}: unknown kind {tp.kind!r}")
