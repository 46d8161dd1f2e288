"""Exact inference for credal networks under epistemic irrelevance.

The package builds finitely generated cones of desirable gambles, checks
their coherence with exact rational linear programming, assembles the
global model of a credal network from local ones, and answers membership
and bound queries with verifiable certificates.
"""

from .cone import AssessmentCone, CoherenceReport, MembershipCertificate, SignReport
from .core import (
    Configuration,
    Gamble,
    Rational,
    ScopeError,
    Sign,
    Space,
    VariableSpace,
    as_rational,
    cylindrical_extend,
    indicator,
)
from .dag import Dag, DagError, DagReport
from .lp import (
    ConicResult,
    LinearSystem,
    LpError,
    LpOutcome,
    LpStatus,
    Relation,
    VanishingResult,
    conic_membership,
    contains_zero,
)
from .net import (
    ConditionedModel,
    CredalNet,
    GeneratorCapError,
    GeneratorInfo,
    IncoherentLocalModel,
    IrrelevanceCheck,
    JointMembership,
    JointModel,
    NetworkError,
    VerificationReport,
    Violation,
    ZeroGambleError,
    ZeroReport,
    sample_credal_net,
    sample_gamble,
)
from .oracle import (
    AuditReport,
    PreciseNet,
    WitnessMismatchError,
    fm_membership,
    positivity_audit,
)

__all__ = [
    "AssessmentCone",
    "AuditReport",
    "CoherenceReport",
    "ConditionedModel",
    "Configuration",
    "ConicResult",
    "CredalNet",
    "Dag",
    "DagError",
    "DagReport",
    "Gamble",
    "GeneratorCapError",
    "GeneratorInfo",
    "IncoherentLocalModel",
    "IrrelevanceCheck",
    "JointMembership",
    "JointModel",
    "LinearSystem",
    "LpError",
    "LpOutcome",
    "LpStatus",
    "MembershipCertificate",
    "NetworkError",
    "PreciseNet",
    "Rational",
    "Relation",
    "ScopeError",
    "Sign",
    "SignReport",
    "Space",
    "VanishingResult",
    "VariableSpace",
    "VerificationReport",
    "Violation",
    "WitnessMismatchError",
    "ZeroGambleError",
    "ZeroReport",
    "as_rational",
    "conic_membership",
    "contains_zero",
    "cylindrical_extend",
    "fm_membership",
    "indicator",
    "positivity_audit",
    "sample_credal_net",
    "sample_gamble",
]

__version__ = "0.1.0"
