"""Scenario file loading and canonical serialization.

A scenario file is a single UTF-8 JSON object whose keys are exactly the ASCII
symbol names (``psi_b``, ``rho_p``, ``U_iw``, ``E_s``, ...) plus optional
``label``, ``prospect_count``, ``valued_time_share``, ``overlays``,
``responses`` and ``time_paths``. The schema is closed: unknown keys raise
:class:`~dismed.errors.UnknownField` so misspelled symbols cannot pass silently.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Mapping

from .errors import ParseError, UnknownField, ValidationError
from .model import (
    STATE_NAMES,
    SYMBOLS,
    BrokerCosts,
    BrokerEffortCapital,
    ClosingCosts,
    ClosingProbabilities,
    InformationBundle,
    ListingStates,
    PartySocialCapital,
    ResponseFunction,
    Scenario,
    SearchCosts,
    TimePath,
    UtilityProfile,
    Valuation,
    validate_scenario,
)

_SYMBOL_ORDER = tuple(SYMBOLS)
_OPTIONAL_SCALARS = ("prospect_count", "valued_time_share")
_CONTAINER_KEYS = ("overlays", "responses", "time_paths")
_ALLOWED_TOP = frozenset(("label", *_SYMBOL_ORDER, *_OPTIONAL_SCALARS, *_CONTAINER_KEYS))

_RESPONSE_KEYS = frozenset(("driven", "driver", "kind", "coeffs", "knots", "context"))
_TIME_PATH_KEYS = frozenset(("symbol", "kind", "value", "v0", "slope", "times", "values"))


def _require_number(obj: Mapping[str, Any], key: str, where: str) -> float:
    if key not in obj:
        raise ParseError(f"{where}: missing required field {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: field {key!r} must be a number, got {v!r}")
    return float(v)


def _parse_response(obj: Any, where: str) -> ResponseFunction:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: each response must be an object")
    unknown = set(obj) - _RESPONSE_KEYS
    if unknown:
        raise UnknownField(f"{where}: unknown response key(s) {sorted(unknown)}")
    for key in ("driven", "driver", "kind"):
        if key not in obj or not isinstance(obj[key], str):
            raise ParseError(f"{where}: response needs string field {key!r}")
    kind = obj["kind"]
    coeffs: tuple[float, ...] = ()
    knots: tuple[tuple[float, float], ...] = ()
    if kind == "polynomial":
        raw = obj.get("coeffs")
        if not isinstance(raw, list) or not raw:
            raise ParseError(f"{where}: polynomial response needs a non-empty 'coeffs' list")
        coeffs = tuple(float(c) for c in raw)
    elif kind == "piecewise_linear":
        raw = obj.get("knots")
        if not isinstance(raw, list) or not raw:
            raise ParseError(f"{where}: piecewise_linear response needs a non-empty 'knots' list")
        try:
            knots = tuple((float(x), float(y)) for x, y in raw)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: knots must be [x, y] pairs") from exc
    else:
        raise ParseError(f"{where}: unknown response kind {kind!r}")
    context = obj.get("context", "base")
    if context not in ("base", *STATE_NAMES):
        raise ParseError(f"{where}: response context must be 'base' or one of {STATE_NAMES}")
    return ResponseFunction(driven=obj["driven"], driver=obj["driver"], kind=kind,
                            coeffs=coeffs, knots=knots, context=context)


def _parse_time_path(obj: Any, where: str) -> TimePath:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: each time path must be an object")
    unknown = set(obj) - _TIME_PATH_KEYS
    if unknown:
        raise UnknownField(f"{where}: unknown time-path key(s) {sorted(unknown)}")
    for key in ("symbol", "kind"):
        if key not in obj or not isinstance(obj[key], str):
            raise ParseError(f"{where}: time path needs string field {key!r}")
    kind = obj["kind"]
    if kind == "constant":
        return TimePath(symbol=obj["symbol"], kind=kind,
                        value=_require_number(obj, "value", where))
    if kind == "linear":
        return TimePath(symbol=obj["symbol"], kind=kind,
                        v0=_require_number(obj, "v0", where),
                        slope=_require_number(obj, "slope", where))
    if kind == "samples":
        times = obj.get("times")
        values = obj.get("values")
        if not isinstance(times, list) or not isinstance(values, list):
            raise ParseError(f"{where}: sampled time path needs 'times' and 'values' lists")
        return TimePath(symbol=obj["symbol"], kind=kind,
                        times=tuple(float(t) for t in times),
                        values=tuple(float(v) for v in values))
    raise ParseError(f"{where}: unknown time-path kind {kind!r}")


def scenario_from_dict(data: Mapping[str, Any], default_label: str = "scenario") -> Scenario:
    """Build and validate a Scenario from a parsed JSON object."""
    if not isinstance(data, dict):
        raise ParseError("scenario file must contain a single JSON object")
    unknown = set(data) - _ALLOWED_TOP
    if unknown:
        raise UnknownField(f"unknown scenario field(s): {sorted(unknown)}")

    vals = {name: _require_number(data, name, "scenario") for name in _SYMBOL_ORDER}

    prospect_count = data.get("prospect_count", 1)
    if isinstance(prospect_count, bool) or not isinstance(prospect_count, int):
        raise ParseError("prospect_count must be an integer")
    vts = data.get("valued_time_share")
    if vts is not None:
        if isinstance(vts, bool) or not isinstance(vts, (int, float)):
            raise ParseError("valued_time_share must be a number or absent")
        vts = float(vts)

    overlays_raw = data.get("overlays", {})
    if not isinstance(overlays_raw, dict):
        raise ParseError("overlays must be an object keyed by listing state")
    overlays: dict[str, dict[str, float]] = {}
    for state, overrides in overlays_raw.items():
        if state not in STATE_NAMES:
            raise UnknownField(f"overlays: unknown listing state {state!r}")
        if not isinstance(overrides, dict):
            raise ParseError(f"overlays.{state} must be an object of symbol overrides")
        for name, v in overrides.items():
            if name not in SYMBOLS:
                raise UnknownField(f"overlays.{state}: unknown symbol {name!r}")
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"overlays.{state}.{name} must be a number")
        overlays[state] = {k: float(v) for k, v in overrides.items()}

    responses_raw = data.get("responses", [])
    if not isinstance(responses_raw, list):
        raise ParseError("responses must be a list")
    responses = tuple(_parse_response(r, f"responses[{i}]")
                      for i, r in enumerate(responses_raw))

    paths_raw = data.get("time_paths", [])
    if not isinstance(paths_raw, list):
        raise ParseError("time_paths must be a list")
    time_paths = tuple(_parse_time_path(tp, f"time_paths[{i}]")
                       for i, tp in enumerate(paths_raw))

    label = data.get("label", default_label)
    if not isinstance(label, str):
        raise ParseError("label must be a string")

    scenario = Scenario(
        valuation=Valuation(P=vals["P"], P_b=vals["P_b"], P_s=vals["P_s"], c=vals["c"]),
        broker_costs=BrokerCosts(B_b=vals["B_b"], B_n=vals["B_n"], B_op=vals["B_op"],
                                 B_s=vals["B_s"], B_i=vals["B_i"], B_it=vals["B_it"],
                                 prospect_count=prospect_count),
        info=InformationBundle(I=vals["I"], I_p=vals["I_p"], I_i=vals["I_i"], I_o=vals["I_o"]),
        search=SearchCosts(psi_b=vals["psi_b"], psi_bi=vals["psi_bi"], psi_s=vals["psi_s"],
                           psi_si=vals["psi_si"], psi_sb=vals["psi_sb"],
                           valued_time_share=vts),
        utility=UtilityProfile(U_ip=vals["U_ip"], U_iw=vals["U_iw"], U_a=vals["U_a"],
                               U_sp=vals["U_sp"], U_sw=vals["U_sw"], U_sa=vals["U_sa"]),
        closing=ClosingCosts(pi_b=vals["pi_b"], pi_i=vals["pi_i"],
                             pi_sb=vals["pi_sb"], pi_s=vals["pi_s"]),
        states=ListingStates(E_s=vals["E_s"], E_p=vals["E_p"], E_m=vals["E_m"]),
        probs=ClosingProbabilities(rho_p=vals["rho_p"], rho_i=vals["rho_i"],
                                   rho_s=vals["rho_s"]),
        effort=BrokerEffortCapital(u_hat=vals["u_hat"], u_hat_s=vals["u_hat_s"],
                                   RC_br=vals["RC_br"], SC_br=vals["SC_br"]),
        social=PartySocialCapital(SC_s=vals["SC_s"], SC_b=vals["SC_b"]),
        responses=responses,
        time_paths=time_paths,
        overlays=overlays,
        label=label,
    )
    report = validate_scenario(scenario)
    if not report.ok:
        raise ValidationError(report.violations)
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Load, parse and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON: {exc}") from exc
    return scenario_from_dict(data, default_label=path.stem)


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    """Canonical dict form: fixed key order, containers sorted deterministically."""
    out: dict[str, Any] = {"label": s.label}
    for name in _SYMBOL_ORDER:
        out[name] = s.value(name)
    if s.broker_costs.prospect_count != 1:
        out["prospect_count"] = s.broker_costs.prospect_count
    if s.search.valued_time_share is not None:
        out["valued_time_share"] = s.search.valued_time_share
    if s.overlays:
        out["overlays"] = {
            state: {k: s.overlays[state][k] for k in sorted(s.overlays[state])}
            for state in STATE_NAMES if state in s.overlays
        }
    if s.responses:
        ordered = sorted(s.responses, key=lambda r: (r.context, r.driven, r.driver))
        out["responses"] = [_response_to_dict(r) for r in ordered]
    if s.time_paths:
        out["time_paths"] = [_time_path_to_dict(tp)
                             for tp in sorted(s.time_paths, key=lambda t: t.symbol)]
    return out


def _response_to_dict(r: ResponseFunction) -> dict[str, Any]:
    out: dict[str, Any] = {"driven": r.driven, "driver": r.driver, "kind": r.kind}
    if r.kind == "polynomial":
        out["coeffs"] = list(r.coeffs)
    else:
        out["knots"] = [[x, y] for x, y in r.knots]
    out["context"] = r.context
    return out


def _time_path_to_dict(tp: TimePath) -> dict[str, Any]:
    out: dict[str, Any] = {"symbol": tp.symbol, "kind": tp.kind}
    if tp.kind == "constant":
        out["value"] = tp.value
    elif tp.kind == "linear":
        out["v0"] = tp.v0
        out["slope"] = tp.slope
    else:
        out["times"] = list(tp.times)
        out["values"] = list(tp.values)
    return out


def scenario_to_json(s: Scenario) -> str:
    """Canonical textual form; loading and re-saving is byte-stable."""
    if any(not math.isfinite(s.value(n)) for n in _SYMBOL_ORDER):
        raise ParseError("cannot serialize non-finite symbol values")
    return json.dumps(scenario_to_dict(s), indent=2, ensure_ascii=False) + "\n"


def save_scenario(s: Scenario, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(scenario_to_json(s), encoding="utf-8")
    return path
