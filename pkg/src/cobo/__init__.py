"""Multi-agent collaborative Bayesian optimization.

Agents minimizing related black-box functions share information through a
doubly stochastic consensus over the shared coordinates of their acquisition
proposals. Collaboration weights come from behavior similarity (correlation
of GP posterior means over a common test grid, gated by proximity of
predicted minimizers) blended toward independence over time; agents with
smaller evaluation budgets participate at matching lower frequencies; only
the shared input block is ever mixed.
"""

__version__ = "0.1.0"

from .problems import (  # noqa: E402
    AgentSpec,
    Bounds,
    ConfigError,
    Dataset,
    ExperimentConfig,
    InputLayout,
    load_config,
    save_config,
    validate_experiment,
)
from .surrogate import GpModel, KernelParams, fit, predict, predict_batch  # noqa: E402
from .acquisition import expected_improvement, incumbent, propose  # noqa: E402
from .consensus import (  # noqa: E402
    apply_consensus,
    baseline_weights,
    behavior_embeddings,
    build_test_grid,
    consensus_weights,
    decay,
    pearson_similarity,
    proximity_rate,
    proximity_similarity,
    similarity_matrix,
    sinkhorn,
)
from .scheduler import init_schedule, is_active, record_evaluation  # noqa: E402
from .orchestrator import RunRecord, run_arco, run_separate, run_uniform_cbo  # noqa: E402
from .benchmarks import (  # noqa: E402
    FAMILIES,
    benchmark_agents,
    build_agents,
    evaluate,
    function_range,
    reference_optimum,
)
from .metrics import auc_window, early_auc, final_regret  # noqa: E402
from .suite import run_batch, run_suite  # noqa: E402

__all__ = [
    "AgentSpec",
    "Bounds",
    "ConfigError",
    "Dataset",
    "ExperimentConfig",
    "FAMILIES",
    "GpModel",
    "InputLayout",
    "KernelParams",
    "RunRecord",
    "apply_consensus",
    "auc_window",
    "baseline_weights",
    "behavior_embeddings",
    "benchmark_agents",
    "build_agents",
    "build_test_grid",
    "consensus_weights",
    "decay",
    "early_auc",
    "evaluate",
    "expected_improvement",
    "final_regret",
    "fit",
    "function_range",
    "incumbent",
    "init_schedule",
    "is_active",
    "load_config",
    "pearson_similarity",
    "predict",
    "predict_batch",
    "propose",
    "proximity_rate",
    "proximity_similarity",
    "record_evaluation",
    "reference_optimum",
    "run_arco",
    "run_batch",
    "run_separate",
    "run_suite",
    "run_uniform_cbo",
    "save_config",
    "similarity_matrix",
    "sinkhorn",
    "validate_experiment",
]
