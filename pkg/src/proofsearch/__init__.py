"""Bidirectional natural-language proof search that recovers missing premises."""

from .backends import Capability, RemoteBackend, StepBackend
from .errors import (
    BackendError,
    CapabilityError,
    ConfigError,
    DslParseError,
    IntegrityError,
    ProofSearchError,
    TreeStructureError,
    UnknownStatementError,
)
from .oracle import OracleBackend, OracleWorld
from .scoring import RecoveryScore, recovery_score, rerank_proofs, rouge1
from .search import Mode, SearchConfig, SearchResult, adgv_search
from .trees import (
    Direction,
    EntailmentTree,
    Origin,
    ProofTree,
    Role,
    Statement,
    StepRecord,
    Treelet,
    ancestry,
    assemble_proof,
    make_statement,
    slice_treelets,
)
from .validators import ValidatorConfig

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "CapabilityError",
    "Capability",
    "ConfigError",
    "Direction",
    "DslParseError",
    "EntailmentTree",
    "IntegrityError",
    "Mode",
    "OracleBackend",
    "OracleWorld",
    "Origin",
    "ProofSearchError",
    "ProofTree",
    "RecoveryScore",
    "RemoteBackend",
    "Role",
    "SearchConfig",
    "SearchResult",
    "Statement",
    "StepBackend",
    "StepRecord",
    "Treelet",
    "TreeStructureError",
    "UnknownStatementError",
    "ValidatorConfig",
    "adgv_search",
    "ancestry",
    "assemble_proof",
    "make_statement",
    "recovery_score",
    "rerank_proofs",
    "rouge1",
    "slice_treelets",
]
