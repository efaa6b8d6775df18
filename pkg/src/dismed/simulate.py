"""Seeded scenario sweeps and local sensitivity analysis.

Sampling draws independent marginals per symbol. Each draw owns a substream
derived from the master seed and the draw index (numpy SeedSequence), so
serial and parallel execution produce identical sequences; rejected draws
consume only their own substream. Draws that fail scenario validation are
redrawn, which is also how domain truncation is enforced (a uniform c over
(0.9, 1.1) simply has its c >= 1 draws rejected).

One derived update: when a sweep samples I_p or I_i without an explicit I
marginal, I is recomputed as I_p + I_i per draw, keeping the exact identity
satisfiable under continuous marginals.
"""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .conditions import (
    ALL_CONDITION_IDS,
    ConditionId,
    ConditionSet,
    SetDecision,
    Status,
    condition_margin,
    decide,
    eval_condition,
)
from .config import RunConfig
from .errors import IndeterminateAtBase, ParseError, RejectionLimit
from .model import SYMBOLS, Scenario, validate_scenario, with_values

STREAM_ALGORITHM = "numpy SeedSequence([seed, draw_index]) -> PCG64"
MAX_REJECTIONS_PER_DRAW = 1000

_MARGINAL_KINDS = ("point", "uniform", "normal")


@dataclass(frozen=True)
class Marginal:
    kind: str
    value: float = 0.0   # point
    lo: float = 0.0      # uniform
    hi: float = 0.0
    mean: float = 0.0    # normal (truncated to the symbol's domain by rejection)
    sd: float = 1.0

    def __post_init__(self):
        if self.kind not in _MARGINAL_KINDS:
            raise ParseError(f"unknown marginal kind {self.kind!r}")
        if self.kind == "uniform" and not self.lo <= self.hi:
            raise ParseError(f"uniform marginal needs lo <= hi, got [{self.lo}, {self.hi}]")
        if self.kind == "normal" and not self.sd > 0:
            raise ParseError(f"normal marginal needs sd > 0, got {self.sd}")

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "point":
            return self.value
        if self.kind == "uniform":
            return float(rng.uniform(self.lo, self.hi))
        return float(rng.normal(self.mean, self.sd))

    def to_dict(self) -> dict:
        if self.kind == "point":
            return {"kind": "point", "value": self.value}
        if self.kind == "uniform":
            return {"kind": "uniform", "lo": self.lo, "hi": self.hi}
        return {"kind": "normal", "mean": self.mean, "sd": self.sd}

    @classmethod
    def from_dict(cls, data, where: str) -> "Marginal":
        if not isinstance(data, dict) or "kind" not in data:
            raise ParseError(f"{where}: marginal must be an object with a 'kind'")
        kind = data["kind"]
        allowed = {"point": {"kind", "value"}, "uniform": {"kind", "lo", "hi"},
                   "normal": {"kind", "mean", "sd"}}
        if kind not in allowed:
            raise ParseError(f"{where}: unknown marginal kind {kind!r}")
        unknown = set(data) - allowed[kind]
        if unknown:
            raise ParseError(f"{where}: unknown marginal key(s) {sorted(unknown)}")
        try:
            if kind == "point":
                return cls(kind=kind, value=float(data["value"]))
            if kind == "uniform":
                return cls(kind=kind, lo=float(data["lo"]), hi=float(data["hi"]))
            return cls(kind=kind, mean=float(data["mean"]), sd=float(data["sd"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{where}: bad marginal parameters: {exc}") from exc


@dataclass(frozen=True)
class DistributionSpec:
    marginals: Mapping[str, Marginal] = field(default_factory=dict)

    def __post_init__(self):
        for name in self.marginals:
            if name not in SYMBOLS:
                raise ParseError(f"distribution samples unknown symbol {name!r}")

    def to_dict(self) -> dict:
        return {"marginals": {k: self.marginals[k].to_dict()
                              for k in sorted(self.marginals)}}

    @classmethod
    def from_dict(cls, data) -> "DistributionSpec":
        if not isinstance(data, dict):
            raise ParseError("distribution must be a JSON object")
        unknown = set(data) - {"marginals"}
        if unknown:
            raise ParseError(f"unknown distribution field(s): {sorted(unknown)}")
        raw = data.get("marginals", {})
        if not isinstance(raw, dict):
            raise ParseError("'marginals' must be an object keyed by symbol")
        return cls(marginals={name: Marginal.from_dict(m, f"marginals.{name}")
                              for name, m in raw.items()})


def draw_scenario(base: Scenario, dist: DistributionSpec, seed: int,
                  index: int) -> tuple[Scenario, int]:
    """One validated draw plus its rejection count (deterministic per index)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    derive_I = (("I_p" in dist.marginals or "I_i" in dist.marginals)
                and "I" not in dist.marginals)
    rejections = 0
    while True:
        updates = {name: m.draw(rng) for name, m in dist.marginals.items()}
        candidate = with_values(base, updates)
        if derive_I:
            candidate = with_values(
                candidate, {"I": candidate.value("I_p") + candidate.value("I_i")})
        if validate_scenario(candidate).ok:
            return candidate, rejections
        rejections += 1
        if rejections > MAX_REJECTIONS_PER_DRAW:
            raise RejectionLimit(
                f"draw {index}: more than {MAX_REJECTIONS_PER_DRAW} rejections; "
                "the distribution may be inconsistent with scenario invariants "
                "(e.g. it perturbs response-anchored symbols)")


@dataclass(frozen=True)
class ScenarioSample(Sequence):
    scenarios: tuple[Scenario, ...]
    rejections: int

    def __len__(self) -> int:
        return len(self.scenarios)

    def __getitem__(self, i):
        return self.scenarios[i]


def sample_scenarios(base: Scenario, dist: DistributionSpec, n: int,
                     seed: int) -> ScenarioSample:
    """n validated draws; deterministic for fixed (base, dist, n, seed)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    scenarios = []
    rejections = 0
    for i in range(n):
        sc, rej = draw_scenario(base, dist, seed, i)
        scenarios.append(sc)
        rejections += rej
    return ScenarioSample(tuple(scenarios), rejections)


@dataclass(frozen=True)
class SweepStats:
    n: int
    seed: int
    stream: str
    rejections: int
    per_condition: dict
    per_set: dict
    config: dict

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "stream": self.stream,
            "rejections": self.rejections,
            "per_set": self.per_set,
            "per_condition": self.per_condition,
            "config": dict(self.config),
        }


def _sweep_chunk(args) -> tuple[dict, dict, int]:
    base, dist, seed, start, stop, cfg = args
    sat = {cid.label: 0 for cid in ALL_CONDITION_IDS}
    ind = {cid.label: 0 for cid in ALL_CONDITION_IDS}
    set_sat = {cset.value: 0 for cset in ConditionSet}
    set_ind = {cset.value: 0 for cset in ConditionSet}
    rejections = 0
    for i in range(start, stop):
        sc, rej = draw_scenario(base, dist, seed, i)
        rejections += rej
        summary = decide(sc, cfg)
        for cset in ConditionSet:
            report = summary.reports[cset.value]
            if report.aggregate == SetDecision.SATISFIED:
                set_sat[cset.value] += 1
            elif report.aggregate == SetDecision.INDETERMINATE:
                set_ind[cset.value] += 1
            for v in report.verdicts:
                if v.status in (Status.SATISFIED, Status.VACUOUS):
                    sat[v.id.label] += 1
                elif v.status == Status.INDETERMINATE:
                    ind[v.id.label] += 1
    return {"sat": sat, "ind": ind}, {"sat": set_sat, "ind": set_ind}, rejections


def run_sweep(base: Scenario, dist: DistributionSpec, n: int, seed: int,
              cfg: RunConfig = RunConfig(), workers: int = 1) -> SweepStats:
    """Evaluate decide() over n seeded draws; counts are order-independent,
    so results are identical across worker counts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    workers = max(1, int(workers))
    edges = np.linspace(0, n, min(workers, n) + 1).astype(int)
    chunks = [(base, dist, seed, int(a), int(b), cfg)
              for a, b in zip(edges, edges[1:]) if b > a]
    if len(chunks) == 1:
        results = [_sweep_chunk(chunks[0])]
    else:
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(_sweep_chunk, chunks))

    sat = {cid.label: 0 for cid in ALL_CONDITION_IDS}
    ind = {cid.label: 0 for cid in ALL_CONDITION_IDS}
    set_sat = {cset.value: 0 for cset in ConditionSet}
    set_ind = {cset.value: 0 for cset in ConditionSet}
    rejections = 0
    for cond_counts, set_counts, rej in results:
        rejections += rej
        for k, v in cond_counts["sat"].items():
            sat[k] += v
        for k, v in cond_counts["ind"].items():
            ind[k] += v
        for k, v in set_counts["sat"].items():
            set_sat[k] += v
        for k, v in set_counts["ind"].items():
            set_ind[k] += v

    per_condition = {
        cid.label: {"frequency": sat[cid.label] / n,
                    "indeterminate_rate": ind[cid.label] / n}
        for cid in ALL_CONDITION_IDS
    }
    per_set = {
        cset.value: {"satisfied_rate": set_sat[cset.value] / n,
                     "indeterminate_rate": set_ind[cset.value] / n}
        for cset in ConditionSet
    }
    return SweepStats(n=n, seed=seed, stream=STREAM_ALGORITHM,
                      rejections=rejections, per_condition=per_condition,
                      per_set=per_set, config=cfg.to_dict())


# ---------------------------------------------------------------------------
# Sensitivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityResult:
    condition: str
    parameter: str
    status: str
    margin: float
    elasticity: float
    delta_to_flip: Optional[float]
    rel_step: float

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "parameter": self.parameter,
            "status": self.status,
            "margin": self.margin,
            "elasticity": self.elasticity,
            "delta_to_flip": self.delta_to_flip,
            "rel_step": self.rel_step,
        }


def _margin_at(s: Scenario, cid: ConditionId, parameter: str, value: float,
               cfg: RunConfig):
    verdict = eval_condition(with_values(s, {parameter: value}), cid, cfg)
    return verdict.status, condition_margin(verdict, cfg)


def sensitivity(s: Scenario, cid: ConditionId, parameter: str,
                rel_step: float = 0.05,
                cfg: RunConfig = RunConfig()) -> SensitivityResult:
    """Margin, elasticity and smallest flip distance for one parameter.

    The margin is the minimum sign-consistent part margin (positive iff the
    condition holds). Elasticity uses a central difference of the margin at
    parameter*(1 +/- rel_step); the flip distance is found by bisection over
    the +/-50% range. A zero-valued parameter falls back to absolute steps.
    """
    if parameter not in SYMBOLS:
        raise ParseError(f"unknown parameter {parameter!r}")
    if not 0 < rel_step < 0.5:
        raise ValueError("rel_step must lie in (0, 0.5)")
    base_verdict = eval_condition(s, cid, cfg)
    if base_verdict.status in (Status.VACUOUS, Status.INDETERMINATE):
        raise IndeterminateAtBase(
            f"{cid.label} is {base_verdict.status.value} at base; "
            "sensitivity needs a determinate, non-vacuous verdict")
    margin0 = condition_margin(base_verdict, cfg)

    p0 = s.value(parameter)
    scale = abs(p0) if p0 != 0.0 else 1.0
    step = rel_step * scale

    _, m_plus = _margin_at(s, cid, parameter, p0 + step, cfg)
    _, m_minus = _margin_at(s, cid, parameter, p0 - step, cfg)
    if m_plus is not None and m_minus is not None:
        dmargin = 0.5 * (m_plus - m_minus)
    elif m_plus is not None:
        dmargin = m_plus - margin0
    elif m_minus is not None:
        dmargin = margin0 - m_minus
    else:
        dmargin = 0.0
    elasticity = 0.0 if margin0 == 0.0 else (dmargin / margin0) / rel_step

    base_status = base_verdict.status
    flips = []
    for direction in (1.0, -1.0):
        end = p0 + direction * 0.5 * scale
        status_end, _ = _margin_at(s, cid, parameter, end, cfg)
        if status_end == base_status:
            continue
        lo_t, hi_t = 0.0, 0.5
        for _ in range(60):
            mid = 0.5 * (lo_t + hi_t)
            status_mid, _ = _margin_at(s, cid, parameter, p0 + direction * mid * scale, cfg)
            if status_mid == base_status:
                lo_t = mid
            else:
                hi_t = mid
        flips.append(direction * hi_t * scale)
    delta_to_flip = min(flips, key=abs) if flips else None

    return SensitivityResult(
        condition=cid.label,
        parameter=parameter,
        status=base_status.value,
        margin=margin0,
        elasticity=elasticity,
        delta_to_flip=delta_to_flip,
        rel_step=rel_step,
    )
