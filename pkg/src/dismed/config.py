"""Run configuration shared by condition evaluation, sweeps and the CLI.

Every report embeds a snapshot of this config so results are reproducible
from their own payload.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

from .errors import ParseError
from .model import SYMBOLS

AGGREGATION_MODES = ("conjunction", "quorum")
INTERSECTION_MODES = ("product", "min")
GUARD_MODES = ("vacuous", "skip", "violated")
OUTPUT_FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    # tolerances
    rel_tol: float = 0.05          # "similar" comparisons (e.g. I_i vs psi_b)
    zero_tol: float = 0.01         # |derivative| treated as zero
    fd_step_scale: float = 1e-3    # h = fd_step_scale * max(1, |x0|)
    # aggregation
    aggregation: str = "conjunction"
    quorum: float = 0.8
    quorum_violations_block: bool = False
    # interpretation switches
    intersection: str = "product"  # reading of rho_i ∩ rho_p
    guard_mode: str = "vacuous"    # failed guard: vacuous | skip | violated
    b1_guard_joint: bool = False   # treat B1's utility clause as a conjunct
    seller_uses_U_sa: bool = False # substitute U_sa for U_a in S3/S7
    w5_driver: str = "B_b"         # driver for W5's unsubscripted cost term
    # horizon integral
    horizon_T: float = 1.0
    horizon_dt: float = 0.125
    # reporting
    output_format: str = "json"

    def __post_init__(self):
        if not (0.0 < self.quorum <= 1.0):
            raise ParseError(f"quorum = {self.quorum} must lie in (0, 1]")
        if not (self.horizon_T > 0 and 0 < self.horizon_dt <= self.horizon_T):
            raise ParseError("require horizon_T > 0 and 0 < horizon_dt <= horizon_T")
        if self.rel_tol <= 0 or self.zero_tol < 0 or self.fd_step_scale <= 0:
            raise ParseError("tolerances must be positive (zero_tol may be 0)")
        for name, value, allowed in (
            ("aggregation", self.aggregation, AGGREGATION_MODES),
            ("intersection", self.intersection, INTERSECTION_MODES),
            ("guard_mode", self.guard_mode, GUARD_MODES),
            ("output_format", self.output_format, OUTPUT_FORMATS),
        ):
            if value not in allowed:
                raise ParseError(f"{name} = {value!r} not in {allowed}")
        if self.w5_driver not in SYMBOLS:
            raise ParseError(f"w5_driver = {self.w5_driver!r} is not a known symbol")

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise ParseError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**dict(data))

    def with_overrides(self, **kw: Any) -> "RunConfig":
        return replace(self, **kw)
