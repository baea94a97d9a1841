"""Deployment stage: one-call adaptation of retrieved solutions."""

from .controller import (
    SUMMARY_FILE,
    DeploymentPipeline,
    batch_deploy,
    run_deployment,
    solution_view,
    summarise,
    to_example,
)
from .models import DeployConfig, DeployReport, DeploySelection, DeploySummary, DeployTaskSummary

__all__ = [
    "run_deployment",
    "batch_deploy",
    "DeploymentPipeline",
    "DeployConfig",
    "DeployReport",
    "DeploySelection",
    "DeploySummary",
    "DeployTaskSummary",
    "SUMMARY_FILE",
    "solution_view",
    "summarise",
    "to_example",
]
