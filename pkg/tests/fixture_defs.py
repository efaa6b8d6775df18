"""Hand-built fixture scenarios.

One base economy satisfies all three condition sets at comfortable margins;
named perturbations flip exactly one targeted condition. Responses are
declared by their derivative values at the base point and compiled to
anchored polynomials, so swapping base values (e.g. psi_b with psi_bi)
re-anchors every affected link without changing any derivative a condition
reads.
"""

from __future__ import annotations

import math

from dismed.io import scenario_from_dict

BASE_VALUES = {
    "P": 10.0, "P_b": 10.0, "P_s": 10.0, "c": 0.3,
    "B_b": 0.3, "B_n": 0.2, "B_op": 0.1, "B_s": 0.2, "B_i": 1.5, "B_it": 1.0,
    "I": 6.95, "I_p": 2.0, "I_i": 4.95, "I_o": 8.0,
    "psi_b": 5.0, "psi_bi": 4.9, "psi_s": 2.0, "psi_si": 1.9, "psi_sb": 1.8,
    "U_ip": 2.0, "U_iw": 3.0, "U_a": 4.0, "U_sp": 1.0, "U_sw": 1.2, "U_sa": 1.1,
    "pi_b": 1.0, "pi_i": 0.5, "pi_sb": 2.0, "pi_s": 1.5,
    "E_s": 2.0, "E_p": 1.0, "E_m": 0.0,
    "rho_p": 0.6, "rho_i": 0.4, "rho_s": 0.7,
    "u_hat": 0.5, "u_hat_s": 1.0, "RC_br": 1.0, "SC_br": 1.5,
    "SC_s": 25.0, "SC_b": 30.0,
}

# (driven, driver, {derivative order: value at the base point})
RESPONSE_TARGETS = [
    ("psi_b", "U_ip", {1: 0.2}),
    ("psi_bi", "U_iw", {1: 1.7, 2: 0.4}),
    ("U_iw", "pi_i", {1: 0.4, 2: 0.2}),
    ("U_ip", "pi_b", {1: 0.1}),
    ("I_o", "psi_bi", {1: 2.0, 2: 3.0}),
    ("I_p", "psi_b", {1: 0.3}),
    ("I_i", "psi_b", {1: 0.2}),
    ("I_p", "E_s", {1: 0.2}),
    ("I_i", "E_s", {1: 0.3}),
    ("I_p", "U_ip+U_iw", {1: 0.1}),
    ("I_i", "U_ip+U_iw", {1: 0.15}),
    ("I_o", "U_a", {1: 0.9, 2: 0.05}),
    ("P_b", "P", {1: 3.0, 3: 12.0}),
    ("I_o", "I_p+I_i", {1: 0.5}),
    ("u_hat_s", "pi_sb+I_p+I_i", {1: 0.4}),
    ("SC_b", "psi_b", {1: 2.0, 2: 0.5}),
    ("SC_b", "psi_bi", {1: 2.0, 2: 0.5}),
    ("U_ip", "I_p+I_i+pi_b", {1: 0.1}),
    ("U_iw", "I_p+I_i+pi_b", {1: 0.2}),
    ("rho_i", "U_ip+U_iw", {1: 0.02}),
    ("rho_p", "U_ip+U_iw", {1: 0.01}),
    ("rho_i", "rho_p", {1: 0.005}),
    ("rho_i", "B_b", {1: 0.002}),
    ("rho_p", "B_b", {1: -0.004}),
    ("B_i", "I_i", {1: 0.05}),
    ("RC_br", "I_i", {1: 0.3}),
    ("SC_br", "I_i", {1: 0.2}),
    ("RC_br", "B_i", {1: 0.8}),
    ("SC_br", "B_i", {1: 0.6}),
    ("I_o", "psi_si", {1: 2.0, 3: 7.0}),
    ("I_p", "psi_sb", {1: 0.2}),
    ("I_o", "psi_sb", {1: 0.3}),
    ("U_a", "psi_si", {1: 2.0, 3: 3.0}),
    ("U_sp", "psi_s", {1: 0.1}),
    ("U_sw", "psi_s", {1: 0.2}),
    ("P_s", "P", {1: 1.5}),
    ("pi_sb", "U_sp+U_sw", {1: 0.4}),
    ("pi_s", "U_a", {1: 0.1}),
    ("P", "pi_sb", {1: 3.0}),
    ("P", "pi_s", {1: 1.2}),
    ("P_s", "pi_sb", {1: 2.5}),
    ("P_s", "pi_s", {1: 0.5}),
    ("P", "c", {1: 20.0}),
    ("psi_sb", "P_s", {1: 0.15}),
    ("pi_sb", "P_s", {1: 0.1}),
    ("psi_si", "P_s", {1: 0.05}),
    ("pi_s", "P_s", {1: 0.02}),
    ("psi_sb", "c", {1: 2.0}),
    ("pi_sb", "c", {1: 1.5}),
    ("psi_si", "c", {1: 0.5}),
    ("pi_s", "c", {1: 0.3}),
    ("psi_sb", "pi_sb", {1: 0.2}),
    ("psi_si", "pi_sb", {1: 0.05}),
    ("pi_s", "pi_sb", {1: 0.1}),
    ("SC_s", "psi_s", {1: 2.0, 2: 0.6}),
    ("SC_s", "psi_si", {1: 2.0, 2: 0.6}),
    ("U_sp", "I_p+I_i+pi_b", {1: 0.05}),
    ("U_sw", "I_p+I_i+pi_b", {1: 0.1}),
    ("rho_i", "U_sp+U_sw", {1: 0.01}),
    ("rho_p", "U_sp+U_sw", {1: 0.02}),
]


def _falling(m: int, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= m - j
    return out


def poly_from_targets(driven: str, driver: str, targets: dict, values: dict) -> dict:
    """Minimal polynomial hitting the requested derivative values at base."""
    x0 = sum(values[p] for p in driver.split("+"))
    y0 = values[driven]
    top = max(targets)
    coeffs = [0.0] * (top + 1)
    for k in sorted(targets, reverse=True):
        higher = sum(coeffs[m] * _falling(m, k) * x0 ** (m - k)
                     for m in range(k + 1, top + 1))
        coeffs[k] = (targets[k] - higher) / math.factorial(k)
    coeffs[0] = y0 - sum(c * x0 ** k for k, c in enumerate(coeffs) if k >= 1)
    return {"driven": driven, "driver": driver, "kind": "polynomial",
            "coeffs": coeffs, "context": "base"}


def fixture_responses(values: dict, target_overrides: dict | None = None,
                      raw_responses: list | None = None) -> list[dict]:
    overrides = target_overrides or {}
    raw = {(r["driven"], r["driver"]): r for r in (raw_responses or [])}
    out = []
    for driven, driver, targets in RESPONSE_TARGETS:
        if (driven, driver) in raw:
            out.append(raw[(driven, driver)])
            continue
        targets = overrides.get((driven, driver), targets)
        out.append(poly_from_targets(driven, driver, targets, values))
    return out


def fixture_dict(label: str, value_overrides: dict | None = None,
                 target_overrides: dict | None = None,
                 raw_responses: list | None = None) -> dict:
    values = dict(BASE_VALUES)
    values.update(value_overrides or {})
    data = dict(values)
    data["label"] = label
    data["prospect_count"] = 3
    data["valued_time_share"] = 0.6
    data["responses"] = fixture_responses(values, target_overrides, raw_responses)
    return data


def fixture_scenario(label: str, **kw):
    return scenario_from_dict(fixture_dict(label, **kw))


def anchored_quadratic(driven: str, driver: str, c1: float, c2: float,
                       values: dict) -> dict:
    """Raw quadratic c0 + c1*x + c2*x^2 anchored through the base point."""
    x0 = sum(values[p] for p in driver.split("+"))
    c0 = values[driven] - (c1 * x0 + c2 * x0 * x0)
    return {"driven": driven, "driver": driver, "kind": "polynomial",
            "coeffs": [c0, c1, c2], "context": "base"}


def broker_opt_dict(label: str = "broker_opt") -> dict:
    """Optimizer fixture: reputation capital follows 5*B_i - B_i^2 and social
    capital is flat in B_i, so the combined objective (capital minus cost)
    peaks at exactly B_i = 2."""
    quad = anchored_quadratic("RC_br", "B_i", 5.0, -1.0, BASE_VALUES)
    return fixture_dict(label, raw_responses=[quad],
                        target_overrides={("SC_br", "B_i"): {1: 0.0}})


# --- single-condition perturbations ----------------------------------------

def perturbation_cases() -> dict:
    """label -> (kwargs for fixture_dict, flipped condition id)."""
    return {
        "B5": ({"value_overrides": {"psi_b": 4.9, "psi_bi": 5.0}}, "B5"),
        "B13": ({"value_overrides": {"u_hat_s": 13.0}}, "B13"),
        "B15": ({"value_overrides": {"SC_b": 22.0}}, "B15"),
        "W3": ({"value_overrides": {"rho_i": 0.3}}, "W3"),
        "W7": ({"target_overrides": {("RC_br", "B_i"): {1: 0.3},
                                     ("SC_br", "B_i"): {1: 0.3}}}, "W7"),
        "S4": ({"value_overrides": {"psi_s": 1.9, "psi_si": 2.0}}, "S4"),
        "S14": ({"value_overrides": {"SC_s": 16.0}}, "S14"),
    }


def broker_retained_dict() -> dict:
    """Both psi swaps at once: buyer B5 and seller S4 fail, broker web holds."""
    return fixture_dict("broker_retained",
                        value_overrides={"psi_b": 4.9, "psi_bi": 5.0,
                                         "psi_s": 1.9, "psi_si": 2.0})
