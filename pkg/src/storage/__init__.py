"""Storage module for domain models and run artifacts"""
from .models import (
    ReebVector,
    TangentVector,
    HyperplaneSlice,
    VolumeReport,
    TerminationReason,
    FlowState,
    FlowTrajectory,
    MomentumProfile,
    LinkMetric,
    EntropyDatum,
    SweepPoint,
    CriterionResult,
    ReportSummary,
)
from .artifacts import ArtifactWriter, write_csv, write_json_lines

__all__ = [
    'ReebVector',
    'TangentVector',
    'HyperplaneSlice',
    'VolumeReport',
    'TerminationReason',
    'FlowState',
    'FlowTrajectory',
    'MomentumProfile',
    'LinkMetric',
    'EntropyDatum',
    'SweepPoint',
    'CriterionResult',
    'ReportSummary',
    'ArtifactWriter',
    'write_csv',
    'write_json_lines',
]
