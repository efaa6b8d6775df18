"""Registry and evaluator for the three disintermediation condition sets.

Each condition is compiled to a small form: an optional guard, one or more
comparison parts (joined conjunctively), and the interpretation notes that the
verdict must carry. Evaluation is pure: undecidable comparisons produce
Indeterminate verdicts, never exceptions, and every non-vacuous verdict keeps
its lhs/rhs trace values.

Interpretation choices that the configuration can steer:
  * guard failures default to vacuous satisfaction (``guard_mode``);
  * B1's "(U_iw > U_ip)" clause is a guard by default (``b1_guard_joint``);
  * probability intersection is a product by default (``intersection``);
  * S3/S7 use U_a literally unless ``seller_uses_U_sa`` is set;
  * W5's unsubscripted cost driver defaults to B_b (``w5_driver``).
Anomalies kept literally (and flagged in notes): S14's squared pi_sb term,
S2's I_o inside the broker-channel bundle, S8's "dP > dpi_s" fragment read as
dP/dpi_s, and W6/W7 differentials taken with respect to I_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

from .calculus import (
    Add,
    Axis,
    Const,
    Deriv,
    EvalSettings,
    Expr,
    ExtendedValue,
    IntegralE,
    Joint,
    MaxE,
    MinE,
    Mul,
    Sub,
    Sym,
    approx_equal,
    argmax_state,
    cmp_abs_le,
    cmp_gt,
    cmp_lt,
    evaluate_expression,
)
from .config import RunConfig
from .model import Scenario


class ConditionSet(str, Enum):
    BUYER = "buyer"
    BROKER_WEB = "broker_web"
    SELLER = "seller"


class Status(str, Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    VACUOUS = "VacuouslySatisfied"
    INDETERMINATE = "Indeterminate"


class SetDecision(str, Enum):
    SATISFIED = "Satisfied"
    NOT_SATISFIED = "NotSatisfied"
    INDETERMINATE = "Indeterminate"


SET_SIZES = {ConditionSet.BUYER: 19, ConditionSet.BROKER_WEB: 7, ConditionSet.SELLER: 18}
_PREFIX = {ConditionSet.BUYER: "B", ConditionSet.BROKER_WEB: "W", ConditionSet.SELLER: "S"}
_BY_PREFIX = {v: k for k, v in _PREFIX.items()}


@dataclass(frozen=True)
class ConditionId:
    set: ConditionSet
    index: int

    def __post_init__(self):
        if not 1 <= self.index <= SET_SIZES[self.set]:
            raise ValueError(f"{self.set.value} index {self.index} out of range")

    @property
    def label(self) -> str:
        return f"{_PREFIX[self.set]}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "ConditionId":
        text = text.strip()
        if not text or text[0].upper() not in _BY_PREFIX:
            raise ValueError(f"cannot parse condition id {text!r}")
        return cls(_BY_PREFIX[text[0].upper()], int(text[1:]))


def condition_ids(cset: ConditionSet) -> tuple[ConditionId, ...]:
    return tuple(ConditionId(cset, i) for i in range(1, SET_SIZES[cset] + 1))


ALL_CONDITION_IDS: tuple[ConditionId, ...] = (
    condition_ids(ConditionSet.BUYER)
    + condition_ids(ConditionSet.BROKER_WEB)
    + condition_ids(ConditionSet.SELLER)
)


# A context spec is None (base), ("state", name) or ("argmax", candidates).
CtxSpec = Optional[tuple]


def _resolve_ctx(s: Scenario, spec: CtxSpec) -> Optional[str]:
    if spec is None:
        return None
    kind, arg = spec
    if kind == "state":
        return arg
    if kind == "argmax":
        return argmax_state(s.states, candidates=arg)
    raise ValueError(f"unknown context spec {spec!r}")


ARGMAX_ALL: CtxSpec = ("argmax", ("E_s", "E_p", "E_m"))
ARGMAX_EXCLUSIVE: CtxSpec = ("argmax", ("E_s", "E_p"))


@dataclass(frozen=True)
class Guard:
    desc: str
    kind: str  # "gt" | "approx"
    a: str
    b: str
    ctx: CtxSpec = None


@dataclass(frozen=True)
class Part:
    desc: str
    op: str  # "gt" | "lt" | "approx" | "approx_zero"
    lhs: Expr
    rhs: Optional[Expr] = None
    lhs_ctx: CtxSpec = None
    rhs_ctx: CtxSpec = None


@dataclass(frozen=True)
class Form:
    guard: Optional[Guard]
    parts: tuple[Part, ...]
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class PartTrace:
    desc: str
    op: str
    lhs: ExtendedValue
    rhs: Optional[ExtendedValue]
    holds: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "check": self.desc,
            "op": self.op,
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json() if self.rhs is not None else None,
            "holds": self.holds,
        }


@dataclass(frozen=True)
class ConditionVerdict:
    id: ConditionId
    status: Status
    lhs: Optional[ExtendedValue]
    rhs: Optional[ExtendedValue]
    guard_status: Optional[bool]
    notes: tuple[str, ...]
    parts: tuple[PartTrace, ...]
    skipped: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id.label,
            "status": self.status.value,
            "lhs": self.lhs.to_json() if self.lhs is not None else None,
            "rhs": self.rhs.to_json() if self.rhs is not None else None,
            "guard_status": self.guard_status,
            "skipped": self.skipped,
            "notes": list(self.notes),
            "parts": [p.to_dict() for p in self.parts],
        }


@dataclass(frozen=True)
class ConditionReport:
    scenario_label: str
    set: ConditionSet
    verdicts: tuple[ConditionVerdict, ...]
    aggregate: SetDecision
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario_label,
            "set": self.set.value,
            "aggregate": self.aggregate.value,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "config": dict(self.config),
        }

    def statuses(self) -> dict[str, Status]:
        return {v.id.label: v.status for v in self.verdicts}


@dataclass(frozen=True)
class DecisionSummary:
    scenario_label: str
    buyer_disintermediates: SetDecision
    broker_provides_web_info: SetDecision
    seller_disintermediates: SetDecision
    reports: dict

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario_label,
            "buyer_disintermediates": self.buyer_disintermediates.value,
            "broker_provides_web_info": self.broker_provides_web_info.value,
            "seller_disintermediates": self.seller_disintermediates.value,
            "reports": {k: r.to_dict() for k, r in self.reports.items()},
        }


# ---------------------------------------------------------------------------
# Expression shorthand
# ---------------------------------------------------------------------------

def _a(*names: str) -> Expr:
    return Sym(names[0]) if len(names) == 1 else Add(tuple(Sym(n) for n in names))


def _sum_sub(plus: Sequence[str], minus: Sequence[str]) -> Expr:
    return Sub(_a(*plus), _a(*minus))


def _cP() -> Expr:
    return Mul(Sym("c"), Sym("P"))


def _d(driven: str | Expr, driver: str, order: int = 1) -> Deriv:
    if isinstance(driven, str):
        driven = _a(*driven.split("+"))
    return Deriv(driven, Axis.sym(driver), order)


def _dmax(driven: str | Expr, names: tuple[str, ...], order: int = 1) -> Deriv:
    if isinstance(driven, str):
        driven = _a(*driven.split("+"))
    return Deriv(driven, Axis.max_of(*names), order)


def _one() -> Expr:
    return Const(1.0)


def _zero() -> Expr:
    return Const(0.0)


# ---------------------------------------------------------------------------
# The condition registry
# ---------------------------------------------------------------------------

def _b1(cfg: RunConfig) -> Form:
    parts = [
        Part("I_i > I_p", "gt", Sym("I_i"), Sym("I_p")),
        Part("I_i + I_o > I_p", "gt", _a("I_i", "I_o"), Sym("I_p")),
    ]
    if cfg.b1_guard_joint:
        parts.insert(0, Part("U_iw > U_ip", "gt", Sym("U_iw"), Sym("U_ip")))
        return Form(None, tuple(parts),
                    ("utility clause (U_iw > U_ip) treated as a joint conjunct",))
    return Form(Guard("U_iw > U_ip", "gt", "U_iw", "U_ip"), tuple(parts),
                ("utility clause (U_iw > U_ip) treated as a guard",))


def _b2(cfg: RunConfig) -> Form:
    return Form(None, (Part("I_i ~ psi_b", "approx", Sym("I_i"), Sym("psi_b")),),
                (f"similarity uses rel_tol = {cfg.rel_tol}",))


def _b3(cfg: RunConfig) -> Form:
    lhs = Add((_cP(), Sym("psi_b"), Sym("pi_b")))
    rhs = _a("psi_bi", "pi_i", "U_iw")
    return Form(
        Guard("P_s ~ P_b", "approx", "P_s", "P_b", ctx=ARGMAX_ALL),
        (Part("cP + psi_b + pi_b > psi_bi + pi_i + U_iw", "gt", lhs, rhs,
              lhs_ctx=ARGMAX_ALL, rhs_ctx=None),),
        ("lhs evaluated under the argmax listing-state overlay; rhs at base",),
    )


def _b4(cfg: RunConfig) -> Form:
    lhs = Add((_cP(), Sym("psi_b"), Sym("pi_b")))
    rhs = _a("psi_bi", "pi_i", "U_iw")
    return Form(
        Guard("U_iw > U_ip", "gt", "U_iw", "U_ip", ctx=ARGMAX_ALL),
        (Part("cP + psi_b + pi_b > psi_bi + pi_i + U_iw", "gt", lhs, rhs,
              lhs_ctx=ARGMAX_ALL, rhs_ctx=None),),
        ("lhs evaluated under the argmax listing-state overlay; rhs at base",),
    )


def _b5(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("psi_b > psi_bi", "gt", Sym("psi_b"), Sym("psi_bi")),
        Part("U_iw > U_ip", "gt", Sym("U_iw"), Sym("U_ip")),
    ))


def _b6(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d2 psi_b/dU_ip2 < min(d2 psi_bi/dU_iw2, 1)", "lt",
             _d("psi_b", "U_ip", 2), MinE((_d("psi_bi", "U_iw", 2), _one()))),
        Part("d psi_b/dU_ip < min(d psi_bi/dU_iw, 1)", "lt",
             _d("psi_b", "U_ip", 1), MinE((_d("psi_bi", "U_iw", 1), _one()))),
    ))


def _b7(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d U_iw/dpi_i > min(d U_ip/dpi_b, 0)", "gt",
             _d("U_iw", "pi_i", 1), MinE((_d("U_ip", "pi_b", 1), _zero()))),
        Part("d2 U_iw/dpi_i2 > min(d2 U_ip/dpi_b2, 0)", "gt",
             _d("U_iw", "pi_i", 2), MinE((_d("U_ip", "pi_b", 2), _zero()))),
    ))


def _b8(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d2 I_o/dpsi_bi2 > max(d2 (I_p+I_i)/dpsi_b2, 1)", "gt",
             _d("I_o", "psi_bi", 2), MaxE((_d("I_p+I_i", "psi_b", 2), _one()))),
        Part("d I_o/dpsi_bi > max(d (I_p+I_i)/dpsi_b, 1)", "gt",
             _d("I_o", "psi_bi", 1), MaxE((_d("I_p+I_i", "psi_b", 1), _one()))),
    ))


def _b9(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d (I_p+I_i)/d max(E_m,E_p,E_s) < 1", "lt",
             _dmax("I_p+I_i", ("E_m", "E_p", "E_s"), 1), _one()),
    ), ("derivative taken along the argmax listing-state value",))


def _b10(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d (I_p+I_i)/d(U_ip+U_iw) < min(d I_o/dU_a, 1)", "lt",
             _d("I_p+I_i", "U_ip+U_iw", 1), MinE((_d("I_o", "U_a", 1), _one()))),
        Part("d2 (I_p+I_i)/d(U_ip+U_iw)2 < min(d2 I_o/dU_a2, 1)", "lt",
             _d("I_p+I_i", "U_ip+U_iw", 2), MinE((_d("I_o", "U_a", 2), _one()))),
    ))


def _b11(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d3 (I_p+I_i)/d(U_ip+U_iw)3 < 1", "lt",
             _d("I_p+I_i", "U_ip+U_iw", 3), _one()),
        Part("d3 I_o/dU_a3 < 1", "lt", _d("I_o", "U_a", 3), _one()),
    ))


def _b12(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d3 P_b/dP3 > max(d3 I_o/d(I_p+I_i)3, 1)", "gt",
             _d("P_b", "P", 3), MaxE((_d("I_o", "I_p+I_i", 3), _one()))),
        Part("d P_b/dP > max(d I_o/d(I_p+I_i), 1)", "gt",
             _d("P_b", "P", 1), MaxE((_d("I_o", "I_p+I_i", 1), _one()))),
    ))


def _b13(cfg: RunConfig) -> Form:
    rhs = Add((_cP(), Sym("pi_sb"), Sym("I_p"), Sym("I_i")))
    return Form(None, (Part("u_hat_s < cP + pi_sb + I_p + I_i", "lt",
                            Sym("u_hat_s"), rhs),))


def _b14(cfg: RunConfig) -> Form:
    return Form(None, (Part("d u_hat_s/d(pi_sb+I_p+I_i) < 1", "lt",
                            _d("u_hat_s", "pi_sb+I_p+I_i", 1), _one()),))


def _b15(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("SC_b - psi_bi - psi_b > U_ip + U_iw + I_p + I_i + pi_b", "gt",
             _sum_sub(["SC_b"], ["psi_bi", "psi_b"]),
             _a("U_ip", "U_iw", "I_p", "I_i", "pi_b")),
    ))


_PSI_B_MAX = ("psi_bi", "psi_b")
_PSI_S_MAX = ("psi_si", "psi_s")


def _b16(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d SC_b/d max(psi_bi,psi_b) > max(1, d (U_ip+U_iw)/d(I_p+I_i+pi_b))", "gt",
             _dmax("SC_b", _PSI_B_MAX, 1),
             MaxE((_one(), _d("U_ip+U_iw", "I_p+I_i+pi_b", 1)))),
    ))


def _b17(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d2 SC_b/d max(psi_bi,psi_b)2 > max(0, d2 (U_ip+U_iw)/d(I_p+I_i+pi_b)2)", "gt",
             _dmax("SC_b", _PSI_B_MAX, 2),
             MaxE((_zero(), _d("U_ip+U_iw", "I_p+I_i+pi_b", 2)))),
    ))


def _b18(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d SC_b/d max(psi_bi,psi_b) > max(1, d (rho_i^rho_p)/d(U_ip+U_iw))", "gt",
             _dmax("SC_b", _PSI_B_MAX, 1),
             MaxE((_one(), _d(Joint("rho_i", "rho_p"), "U_ip+U_iw", 1)))),
    ), (f"intersection read as {cfg.intersection}",))


def _b19(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d2 SC_b/d max(psi_bi,psi_b)2 > max(0, d2 (rho_i^rho_p)/d(U_ip+U_iw)2)", "gt",
             _dmax("SC_b", _PSI_B_MAX, 2),
             MaxE((_zero(), _d(Joint("rho_i", "rho_p"), "U_ip+U_iw", 2)))),
    ), (f"intersection read as {cfg.intersection}",))


def _w1(cfg: RunConfig) -> Form:
    ctx: CtxSpec = ("state", "E_p")
    lhs = Sub(Mul(_cP(), Sym("rho_p")), _a("B_b", "B_s"))
    return Form(
        Guard("psi_b > psi_bi", "gt", "psi_b", "psi_bi", ctx=ctx),
        (Part("cP*rho_p - B_b - B_s < B_i", "lt", lhs, Sym("B_i"),
              lhs_ctx=ctx, rhs_ctx=ctx),),
        ("evaluated under the E_p listing-state overlay",),
    )


def _w2(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("U_ip < U_iw", "lt", Sym("U_ip"), Sym("U_iw"),
             lhs_ctx=ARGMAX_EXCLUSIVE, rhs_ctx=ARGMAX_EXCLUSIVE),
    ), ("evaluated under the larger of the E_s / E_p overlays",))


def _w3(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("psi_bi*rho_i > cP*rho_p", "gt",
             Mul(Sym("psi_bi"), Sym("rho_i")), Mul(_cP(), Sym("rho_p"))),
    ))


def _w4(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d rho_i/d rho_p ~ 0", "approx_zero", _d("rho_i", "rho_p", 1)),
    ), (f"zero means |derivative| <= {cfg.zero_tol}",))


def _w5(cfg: RunConfig) -> Form:
    drv = cfg.w5_driver
    return Form(None, (
        Part(f"d rho_i/d {drv} ~ 0", "approx_zero", _d("rho_i", drv, 1)),
        Part(f"d rho_p/d {drv} ~ 0", "approx_zero", _d("rho_p", drv, 1)),
    ), (f"unsubscripted cost driver resolved to {drv}",
        f"zero means |derivative| <= {cfg.zero_tol}"))


def _w6(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d B_i/dI_i < d (RC_br+SC_br)/dI_i", "lt",
             _d("B_i", "I_i", 1), _d("RC_br+SC_br", "I_i", 1)),
    ), ("both differentials taken with respect to I_i",))


def _w7(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d (RC_br+SC_br)/dB_i > 1", "gt", _d("RC_br+SC_br", "B_i", 1), _one()),
    ))


def _s1(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("rho_s > rho_p^rho_i", "gt", Sym("rho_s"), Joint("rho_p", "rho_i")),
        Part("rho_s > rho_p", "gt", Sym("rho_s"), Sym("rho_p")),
        Part("rho_s > rho_i", "gt", Sym("rho_s"), Sym("rho_i")),
    ), (f"intersection read as {cfg.intersection}",))


def _s2(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d I_o/dpsi_si > max(d (I_p+I_o)/dpsi_sb, 1)", "gt",
             _d("I_o", "psi_si", 1), MaxE((_d("I_p+I_o", "psi_sb", 1), _one()))),
        Part("d3 I_o/dpsi_si3 > max(d3 (I_p+I_o)/dpsi_sb3, 1)", "gt",
             _d("I_o", "psi_si", 3), MaxE((_d("I_p+I_o", "psi_sb", 3), _one()))),
    ), ("I_o kept inside the broker-channel bundle as written",))


def _seller_web_utility(cfg: RunConfig) -> str:
    return "U_sa" if cfg.seller_uses_U_sa else "U_a"


def _s3(cfg: RunConfig) -> Form:
    ua = _seller_web_utility(cfg)
    note = ("U_sa substituted for the seller's web utility" if cfg.seller_uses_U_sa
            else "U_a used literally for the seller's web utility")
    return Form(None, (
        Part(f"d {ua}/dpsi_si > max(d (U_sp+U_sw)/dpsi_s, 1)", "gt",
             _d(ua, "psi_si", 1), MaxE((_d("U_sp+U_sw", "psi_s", 1), _one()))),
        Part(f"d3 {ua}/dpsi_si3 > max(d3 (U_sp+U_sw)/dpsi_s3, 1)", "gt",
             _d(ua, "psi_si", 3), MaxE((_d("U_sp+U_sw", "psi_s", 3), _one()))),
    ), (note, "bare bracket [x, 1] read as Max[x, 1]"))


def _s4(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("psi_s > psi_si", "gt", Sym("psi_s"), Sym("psi_si")),
        Part("psi_s > psi_si under argmax state", "gt", Sym("psi_s"), Sym("psi_si"),
             lhs_ctx=ARGMAX_ALL, rhs_ctx=ARGMAX_ALL),
    ))


def _s5(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("I_o > I_i + I_p", "gt", Sym("I_o"), _a("I_i", "I_p")),
        Part("I_o > I_i + I_p under argmax state", "gt", Sym("I_o"), _a("I_i", "I_p"),
             lhs_ctx=ARGMAX_ALL, rhs_ctx=ARGMAX_ALL),
    ))


def _s6(cfg: RunConfig) -> Form:
    return Form(None, (Part("d P_s/dP > 1", "gt", _d("P_s", "P", 1), _one()),))


def _s7(cfg: RunConfig) -> Form:
    ua = _seller_web_utility(cfg)
    return Form(None, (
        Part(f"d pi_sb/d(U_sp+U_sw) > d pi_s/d{ua}", "gt",
             _d("pi_sb", "U_sp+U_sw", 1), _d("pi_s", ua, 1)),
        Part("pi_sb > pi_s", "gt", Sym("pi_sb"), Sym("pi_s")),
    ))


def _s8(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d P/dpi_sb > max(d P/dpi_s, 1)", "gt",
             _d("P", "pi_sb", 1), MaxE((_d("P", "pi_s", 1), _one()))),
        Part("d P_s/dpi_sb > max(d P_s/dpi_s, 1)", "gt",
             _d("P_s", "pi_sb", 1), MaxE((_d("P_s", "pi_s", 1), _one()))),
        Part("d P_s/dP > 1", "gt", _d("P_s", "P", 1), _one()),
        Part("d P/dc > 1", "gt", _d("P", "c", 1), _one()),
    ), ("fragment 'dP > dpi_s' read as dP/dpi_s",))


def _s9(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("psi_sb + pi_sb > psi_si + pi_s", "gt",
             _a("psi_sb", "pi_sb"), _a("psi_si", "pi_s")),
        Part("d (psi_sb+pi_sb)/dP_s > d (psi_si+pi_s)/dP_s", "gt",
             _d("psi_sb+pi_sb", "P_s", 1), _d("psi_si+pi_s", "P_s", 1)),
    ))


def _s10(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d (psi_sb+pi_sb)/dc > d (psi_si+pi_s)/dc", "gt",
             _d("psi_sb+pi_sb", "c", 1), _d("psi_si+pi_s", "c", 1)),
    ))


def _s11(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d (psi_sb+pi_sb)/dpi_sb > d (psi_si+pi_s)/dpi_sb", "gt",
             _d("psi_sb+pi_sb", "pi_sb", 1), _d("psi_si+pi_s", "pi_sb", 1)),
    ), ("d pi_sb/d pi_sb contributes exactly 1",))


def _s12(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("rho_s > rho_p", "gt", Sym("rho_s"), Sym("rho_p")),
        Part("rho_s > rho_i", "gt", Sym("rho_s"), Sym("rho_i")),
    ))


def _s13(cfg: RunConfig) -> Form:
    own = Mul(Sym("rho_s"),
              Sub(Sym("P_s"), _a("pi_b", "pi_s", "psi_si")))
    broker_physical = Mul(Sym("rho_p"),
                          Sub(Sym("P"), _a("pi_b", "pi_sb", "psi_s")))
    broker_web = Mul(Joint("rho_i", "rho_p"),
                     Sub(Sym("P"), _a("pi_b", "pi_sb", "psi_sb")))
    return Form(None, (
        Part("integral self-sale surplus > max(broker physical, broker web)", "gt",
             IntegralE(own),
             MaxE((IntegralE(broker_physical), IntegralE(broker_web)))),
    ), (f"trapezoid over [0, {cfg.horizon_T}] at dt = {cfg.horizon_dt}",))


def _s14(cfg: RunConfig) -> Form:
    lhs = Sub(Sym("SC_s"), Add((Sym("psi_si"), Mul(Sym("pi_sb"), Sym("pi_sb")))))
    return Form(None, (
        Part("SC_s - psi_si - pi_sb^2 > U_sw + U_sp + I_p + I_i + pi_sb", "gt",
             lhs, _a("U_sw", "U_sp", "I_p", "I_i", "pi_sb")),
    ), ("pi_sb enters squared, kept literally (suspected transcription artifact)",))


def _s15(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d SC_s/d max(psi_si,psi_s) > max(1, d (U_sp+U_sw)/d(I_p+I_i+pi_b))", "gt",
             _dmax("SC_s", _PSI_S_MAX, 1),
             MaxE((_one(), _d("U_sp+U_sw", "I_p+I_i+pi_b", 1)))),
    ))


def _s16(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d2 SC_s/d max(psi_si,psi_s)2 > max(0, d2 (U_sp+U_sw)/d(I_p+I_i+pi_b)2)", "gt",
             _dmax("SC_s", _PSI_S_MAX, 2),
             MaxE((_zero(), _d("U_sp+U_sw", "I_p+I_i+pi_b", 2)))),
    ))


def _s17(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d SC_s/d max(psi_si,psi_s) > max(1, d (rho_i^rho_p)/d(U_sp+U_sw))", "gt",
             _dmax("SC_s", _PSI_S_MAX, 1),
             MaxE((_one(), _d(Joint("rho_i", "rho_p"), "U_sp+U_sw", 1)))),
    ), (f"intersection read as {cfg.intersection}",))


def _s18(cfg: RunConfig) -> Form:
    return Form(None, (
        Part("d2 SC_s/d max(psi_si,psi_s)2 > max(0, d2 (rho_i^rho_p)/d(U_sp+U_sw)2)", "gt",
             _dmax("SC_s", _PSI_S_MAX, 2),
             MaxE((_zero(), _d(Joint("rho_i", "rho_p"), "U_sp+U_sw", 2)))),
    ), (f"intersection read as {cfg.intersection}",))


_BUILDERS: dict[str, Callable[[RunConfig], Form]] = {
    "B1": _b1, "B2": _b2, "B3": _b3, "B4": _b4, "B5": _b5, "B6": _b6, "B7": _b7,
    "B8": _b8, "B9": _b9, "B10": _b10, "B11": _b11, "B12": _b12, "B13": _b13,
    "B14": _b14, "B15": _b15, "B16": _b16, "B17": _b17, "B18": _b18, "B19": _b19,
    "W1": _w1, "W2": _w2, "W3": _w3, "W4": _w4, "W5": _w5, "W6": _w6, "W7": _w7,
    "S1": _s1, "S2": _s2, "S3": _s3, "S4": _s4, "S5": _s5, "S6": _s6, "S7": _s7,
    "S8": _s8, "S9": _s9, "S10": _s10, "S11": _s11, "S12": _s12, "S13": _s13,
    "S14": _s14, "S15": _s15, "S16": _s16, "S17": _s17, "S18": _s18,
}


def build_form(cid: ConditionId, cfg: RunConfig) -> Form:
    return _BUILDERS[cid.label](cfg)


def _walk_symbols(expr: Expr, out: set[str]) -> None:
    if isinstance(expr, Sym):
        out.add(expr.name)
    elif isinstance(expr, (Add, MaxE, MinE)):
        for p in expr.parts:
            _walk_symbols(p, out)
    elif isinstance(expr, (Sub, Mul)):
        _walk_symbols(expr.a, out)
        _walk_symbols(expr.b, out)
    elif isinstance(expr, Joint):
        out.update((expr.a, expr.b))
    elif isinstance(expr, Deriv):
        _walk_symbols(expr.driven, out)
        out.update(expr.axis.names)
    elif isinstance(expr, IntegralE):
        _walk_symbols(expr.integrand, out)


def referenced_symbols(cid: ConditionId, cfg: Optional[RunConfig] = None) -> frozenset[str]:
    """Every scenario symbol a condition reads (for the symbol-table audit)."""
    form = build_form(cid, cfg or RunConfig())
    out: set[str] = set()
    if form.guard is not None:
        out.update((form.guard.a, form.guard.b))
        if form.guard.ctx is not None and form.guard.ctx[0] == "argmax":
            out.update(form.guard.ctx[1])
        elif form.guard.ctx is not None and form.guard.ctx[0] == "state":
            out.add(form.guard.ctx[1])
    for part in form.parts:
        _walk_symbols(part.lhs, out)
        if part.rhs is not None:
            _walk_symbols(part.rhs, out)
        for ctx in (part.lhs_ctx, part.rhs_ctx):
            if ctx is not None and ctx[0] == "argmax":
                out.update(ctx[1])
            elif ctx is not None and ctx[0] == "state":
                out.add(ctx[1])
    return frozenset(out)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _settings(cfg: RunConfig) -> EvalSettings:
    return EvalSettings(intersection=cfg.intersection,
                        fd_step_scale=cfg.fd_step_scale,
                        horizon_T=cfg.horizon_T,
                        horizon_dt=cfg.horizon_dt)


def _eval_guard(s: Scenario, guard: Guard, cfg: RunConfig) -> Optional[bool]:
    ctx = _resolve_ctx(s, guard.ctx)
    a = s.value(guard.a, ctx)
    b = s.value(guard.b, ctx)
    if guard.kind == "gt":
        return a > b
    if guard.kind == "approx":
        return approx_equal(a, b, cfg.rel_tol)
    raise ValueError(f"unknown guard kind {guard.kind!r}")


def _eval_part(s: Scenario, part: Part, cfg: RunConfig,
               notes: list) -> PartTrace:
    settings = _settings(cfg)
    lhs = evaluate_expression(s, part.lhs, _resolve_ctx(s, part.lhs_ctx),
                              settings, notes)
    rhs = None
    if part.rhs is not None:
        rhs = evaluate_expression(s, part.rhs, _resolve_ctx(s, part.rhs_ctx),
                                  settings, notes)
    if part.op == "gt":
        holds = cmp_gt(lhs, rhs)
    elif part.op == "lt":
        holds = cmp_lt(lhs, rhs)
    elif part.op == "approx":
        if lhs.is_point and rhs.is_point:
            holds = approx_equal(lhs.lower, rhs.lower, cfg.rel_tol)
        else:
            holds = None
    elif part.op == "approx_zero":
        holds = cmp_abs_le(lhs, cfg.zero_tol)
    else:
        raise ValueError(f"unknown part op {part.op!r}")
    return PartTrace(part.desc, part.op, lhs, rhs, holds)


def eval_condition(s: Scenario, cid: ConditionId, cfg: RunConfig = RunConfig()) -> ConditionVerdict:
    """Evaluate one condition with a full trace."""
    form = build_form(cid, cfg)
    notes: list[str] = list(form.notes)
    guard_status: Optional[bool] = None
    if form.guard is not None:
        guard_status = _eval_guard(s, form.guard, cfg)
        if guard_status is False:
            if cfg.guard_mode == "violated":
                status = Status.VIOLATED
                notes.append(f"guard failed ({form.guard.desc}); guard_mode=violated")
                return ConditionVerdict(cid, status, None, None, False,
                                        tuple(notes), ())
            skipped = cfg.guard_mode == "skip"
            notes.append(f"guard failed ({form.guard.desc}); vacuously satisfied"
                         + ("; excluded from aggregation" if skipped else ""))
            return ConditionVerdict(cid, Status.VACUOUS, None, None, False,
                                    tuple(notes), (), skipped=skipped)

    traces = tuple(_eval_part(s, p, cfg, notes) for p in form.parts)
    deciding = traces[0]
    status = Status.SATISFIED
    for t in traces:
        if t.holds is False:
            status, deciding = Status.VIOLATED, t
            break
    else:
        for t in traces:
            if t.holds is None:
                status, deciding = Status.INDETERMINATE, t
                break
    return ConditionVerdict(cid, status, deciding.lhs, deciding.rhs,
                            guard_status, tuple(notes), traces)


def _aggregate(verdicts: Sequence[ConditionVerdict], cfg: RunConfig) -> SetDecision:
    considered = [v for v in verdicts if not v.skipped]
    if not considered:
        return SetDecision.SATISFIED
    statuses = [v.status for v in considered]
    if cfg.aggregation == "conjunction":
        if any(st == Status.VIOLATED for st in statuses):
            return SetDecision.NOT_SATISFIED
        if any(st == Status.INDETERMINATE for st in statuses):
            return SetDecision.INDETERMINATE
        return SetDecision.SATISFIED
    # quorum
    if cfg.quorum_violations_block and any(st == Status.VIOLATED for st in statuses):
        return SetDecision.NOT_SATISFIED
    total = len(considered)
    sat = sum(st in (Status.SATISFIED, Status.VACUOUS) for st in statuses)
    ind = sum(st == Status.INDETERMINATE for st in statuses)
    if sat / total >= cfg.quorum:
        return SetDecision.SATISFIED
    if (sat + ind) / total >= cfg.quorum:
        return SetDecision.INDETERMINATE
    return SetDecision.NOT_SATISFIED


def eval_condition_set(s: Scenario, cset: ConditionSet,
                       cfg: RunConfig = RunConfig()) -> ConditionReport:
    """Evaluate a whole set in printed order and aggregate it."""
    verdicts = tuple(eval_condition(s, cid, cfg) for cid in condition_ids(cset))
    return ConditionReport(
        scenario_label=s.label,
        set=cset,
        verdicts=verdicts,
        aggregate=_aggregate(verdicts, cfg),
        config=cfg.to_dict(),
    )


def decide(s: Scenario, cfg: RunConfig = RunConfig()) -> DecisionSummary:
    """All three aggregate decisions plus their full reports."""
    reports = {cset.value: eval_condition_set(s, cset, cfg) for cset in ConditionSet}
    return DecisionSummary(
        scenario_label=s.label,
        buyer_disintermediates=reports["buyer"].aggregate,
        broker_provides_web_info=reports["broker_web"].aggregate,
        seller_disintermediates=reports["seller"].aggregate,
        reports=reports,
    )


# ---------------------------------------------------------------------------
# Margins (used by sensitivity analysis)
# ---------------------------------------------------------------------------

def part_margin(trace: PartTrace, cfg: RunConfig) -> Optional[float]:
    """Signed margin for one part: positive iff the part holds.

    For interval operands the margin is the conservative one for the decided
    direction; undecided parts have no margin.
    """
    if trace.holds is None:
        return None
    lhs, rhs = trace.lhs, trace.rhs
    if trace.op == "gt":
        return lhs.lower - rhs.upper if trace.holds else lhs.upper - rhs.lower
    if trace.op == "lt":
        return rhs.lower - lhs.upper if trace.holds else rhs.upper - lhs.lower
    if trace.op == "approx":
        a, b = lhs.lower, rhs.lower
        return cfg.rel_tol * max(abs(a), abs(b), 1e-12) - abs(a - b)
    if trace.op == "approx_zero":
        a = lhs.abs()
        return cfg.zero_tol - (a.upper if trace.holds else a.lower)
    raise ValueError(f"unknown part op {trace.op!r}")


def condition_margin(verdict: ConditionVerdict, cfg: RunConfig) -> Optional[float]:
    """Minimum part margin; sign agrees with the verdict for determinate ones."""
    margins = [m for m in (part_margin(t, cfg) for t in verdict.parts) if m is not None]
    if not margins:
        return None
    return min(margins)
