from .models import JobStatus, MethodId, SweepKind, MseForm, ThetaInit, SweepJob
from .scenario import Position, ScenarioConfig, SweepSpec, load_scenario, load_sweep_spec
from .state import ChannelSet, BeamState, RateReport
from .ledger import MessageKind, MessageRecord, SignalingLedger, IterationRecord, SolveReport

__all__ = [
    'JobStatus',
    'MethodId',
    'SweepKind',
    'MseForm',
    'ThetaInit',
    'SweepJob',
    'Position',
    'ScenarioConfig',
    'SweepSpec',
    'load_scenario',
    'load_sweep_spec',
    'ChannelSet',
    'BeamState',
    'RateReport',
    'MessageKind',
    'MessageRecord',
    'SignalingLedger',
    'IterationRecord',
    'SolveReport',
]
