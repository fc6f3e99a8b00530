"""Signaling ledger and solve reports."""

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional
import enum

import numpy as np

from app.models.models import MethodId, MseForm
from app.models.state import RateReport

CPU = -1


class MessageKind(str, enum.Enum):
    csi_direct = "csi_direct"
    csi_cascade = "csi_cascade"
    broadcast_u_omega_theta = "broadcast_u_omega_theta"
    active_beamformer = "active_beamformer"
    final_beamformer = "final_beamformer"


# Weight of each kind in the published overhead count; direct CSI is counted twice
FORMULA_WEIGHTS: Dict[MessageKind, int] = {
    MessageKind.csi_direct: 2,
    MessageKind.broadcast_u_omega_theta: 1,
    MessageKind.active_beamformer: 1,
}


@dataclass(frozen=True)
class MessageRecord:
    """One payload on one AP <-> CPU link.

    A payload sent to several APs is recorded once per receiving AP with `fanout`
    set to the number of receivers; the published count charges it once.
    """
    sender: int
    receiver: int
    kind: MessageKind
    symbols: int
    iteration: int
    fanout: int = 1

    def __post_init__(self):
        if self.symbols < 0:
            raise ValueError(f"symbol count must be nonnegative, got {self.symbols}")
        if self.fanout < 1:
            raise ValueError(f"fanout must be positive, got {self.fanout}")

    @property
    def formula_symbols(self) -> Fraction:
        return Fraction(FORMULA_WEIGHTS.get(self.kind, 0) * self.symbols, self.fanout)


@dataclass
class SignalingLedger:
    messages: List[MessageRecord] = field(default_factory=list)

    def record(self, sender: int, receiver: int, kind: MessageKind, symbols: int, iteration: int,
               fanout: int = 1) -> MessageRecord:
        message = MessageRecord(sender, receiver, kind, int(symbols), iteration, fanout)
        self.messages.append(message)
        return message

    def totals_by_kind(self) -> Dict[str, int]:
        totals: Dict[str, int] = defaultdict(int)
        for m in self.messages:
            totals[m.kind.value] += m.symbols
        return dict(totals)

    def totals_by_iteration(self, formula: bool = False) -> Dict[int, int]:
        totals: Dict[int, Fraction] = defaultdict(Fraction)
        for m in self.messages:
            totals[m.iteration] += m.formula_symbols if formula else m.symbols
        return {i: int(v) for i, v in totals.items()}

    @property
    def formula_total(self) -> int:
        return int(sum((m.formula_symbols for m in self.messages), Fraction(0)))

    @property
    def actual_total(self) -> int:
        return sum(m.symbols for m in self.messages)

    def is_empty(self) -> bool:
        return not self.messages


@dataclass(frozen=True)
class IterationRecord:
    index: int
    sum_rate: float        # bits/s/Hz
    surrogate: float       # nats
    ap_powers: np.ndarray  # mW
    theta_residual: float  # max(|theta_m| - 1, 0)
    symbols: int           # formula-counted symbols exchanged in this iteration


@dataclass
class SolveReport:
    method: MethodId
    mse_form: Optional[MseForm]
    dimensions: Dict[str, int]
    trace: List[IterationRecord]
    iterations_used: int
    ledger: SignalingLedger
    converged: bool
    final: RateReport
    wall_time: float = 0.0
    finalized_unit_modulus: bool = False

    @property
    def sum_rate(self) -> float:
        return self.final.weighted_sum_rate

