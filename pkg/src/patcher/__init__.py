"""Prompt repair for text-to-image generation.

Detects objects a generator neglected (stage one) and rewrites the
prompt until every requested object shows up (stage two), steering the
search with cross-attention differences. Works against a hermetic
simulated backend or a remote model sidecar.
"""

from .attention import attention_difference, object_attention, pairwise_mean_abs_diff
from .backends import RemoteBackend, SimulatorBackend, SimWorld
from .backends.base import (
    Backend,
    EmbedderCapability,
    GeneratorCapability,
    ScorerCapability,
    SuggesterCapability,
)
from .dataset import PromptRecord, compose_multiobject, generate_tbp, load_dataset, save_dataset
from .detection import (
    DEFAULT_THRESHOLD,
    CalibrationResult,
    NeglectReport,
    calibrate_threshold,
    identify_neglected,
)
from .domain import (
    CandidateKind,
    FeatureCandidate,
    GenerationRecord,
    ObjectEntity,
    Prompt,
    RepairOutcome,
    RepairStatus,
    TokenAttentionPair,
    TrailEntry,
)
from .enhancement import (
    EnhancementConfig,
    attention_guided_search,
    build_hyponym_tree,
    explicit_repair,
    implicit_repair,
    prune_tree,
    substitute,
)
from .errors import PatcherError
from .evaluation import (
    METHODS,
    AnnotationJudge,
    EvalReport,
    EvalRow,
    SimulatorJudge,
    evaluate,
    import_annotations,
    render_report,
)
from .extraction import ExtractionConfig, extract_objects
from .orchestrator import (
    MODE_EFE_ONLY,
    MODE_FULL,
    MODE_IFE_ONLY,
    MODES,
    PipelineConfig,
    compute_clipscore,
    llm_repair_baseline,
    multi_neglect_schedule,
    patcher_repair,
)
from .trials import SeedPolicy, TrialContext, run_stage, run_trial

__version__ = "0.1.0"

__all__ = [
    "AnnotationJudge",
    "Backend",
    "CalibrationResult",
    "CandidateKind",
    "DEFAULT_THRESHOLD",
    "EmbedderCapability",
    "EnhancementConfig",
    "EvalReport",
    "EvalRow",
    "ExtractionConfig",
    "FeatureCandidate",
    "GenerationRecord",
    "GeneratorCapability",
    "METHODS",
    "MODES",
    "MODE_EFE_ONLY",
    "MODE_FULL",
    "MODE_IFE_ONLY",
    "NeglectReport",
    "ObjectEntity",
    "PatcherError",
    "PipelineConfig",
    "Prompt",
    "PromptRecord",
    "RemoteBackend",
    "RepairOutcome",
    "RepairStatus",
    "ScorerCapability",
    "SeedPolicy",
    "SimWorld",
    "SimulatorBackend",
    "SimulatorJudge",
    "SuggesterCapability",
    "TokenAttentionPair",
    "TrailEntry",
    "TrialContext",
    "attention_difference",
    "attention_guided_search",
    "build_hyponym_tree",
    "calibrate_threshold",
    "compose_multiobject",
    "compute_clipscore",
    "evaluate",
    "explicit_repair",
    "extract_objects",
    "generate_tbp",
    "identify_neglected",
    "implicit_repair",
    "import_annotations",
    "llm_repair_baseline",
    "load_dataset",
    "multi_neglect_schedule",
    "object_attention",
    "pairwise_mean_abs_diff",
    "patcher_repair",
    "prune_tree",
    "render_report",
    "run_stage",
    "run_trial",
    "save_dataset",
    "substitute",
    "__version__",
]
