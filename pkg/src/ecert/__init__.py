"""Trust regions for local explanations of black-box models.

Given only query access to a model and a local explanation at an
anchor point, find the largest box around the anchor on which the
explanation stays faithful above a threshold, and attach probabilistic
confidence to the answer.
"""

from .core import (
    AbsFidelity,
    BlackBox,
    CallableBlackBox,
    CertificationReport,
    CertifyOutcome,
    CosineFidelity,
    CustomMetric,
    FidelityFn,
    FidelitySample,
    GenericExplanation,
    LinearExplanation,
    Provenance,
    RegionRecord,
    ShellRegion,
    apply_explanation,
    fidelity,
)
from .strategies import (
    StrategyConfig,
    certify_region,
    sample_gaussian_shell,
    sample_uniform_shell,
)
from .driver import DriverConfig, ecertify
from .bounds import (
    evt_bound,
    evt_bound_report,
    evt_epsilon_width,
    evt_epsilon_width_simplified,
    exponential_bound,
)
from .special import (
    PiecewiseEarlyStop,
    lipschitz_headstart,
    make_synthetic,
    synthetic_min_fidelity,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AbsFidelity",
    "BlackBox",
    "CallableBlackBox",
    "CertificationReport",
    "CertifyOutcome",
    "CosineFidelity",
    "CustomMetric",
    "FidelityFn",
    "FidelitySample",
    "GenericExplanation",
    "LinearExplanation",
    "Provenance",
    "RegionRecord",
    "ShellRegion",
    "apply_explanation",
    "fidelity",
    "StrategyConfig",
    "certify_region",
    "sample_gaussian_shell",
    "sample_uniform_shell",
    "DriverConfig",
    "ecertify",
    "evt_bound",
    "evt_bound_report",
    "evt_epsilon_width",
    "evt_epsilon_width_simplified",
    "exponential_bound",
    "PiecewiseEarlyStop",
    "lipschitz_headstart",
    "make_synthetic",
    "synthetic_min_fidelity",
]
