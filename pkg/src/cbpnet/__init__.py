"""Collapsed branching process random graphs, their coupling with marked
branching trees, and the local limit of in-components."""
from ._jit import backend
from .collapse import (CollapsedGraph, InComponent, collapse_run, generate_cbp, in_component,
                       sample_out_degrees, sequential_linear_equivalence_check, sequential_rule_distribution)
from .coupling import (CouplingOutcome, JointCouplingOutcome, couple_joint, couple_single,
                       coupling_success_rate)
from .engine import (LiftedRun, MarkedTree, WeightedIndex, evolve_tree, grow_lifted_run, grow_marked_ctbp,
                     pure_birth_counts, simulate_pure_birth)
from .kernel import (AttachmentKernel, KernelError, MalthusianResult, NoMalthusianRoot, RhoEvaluation,
                     UncertifiedError, eval_kernel, malthusian_rate, rho_hat, validate_assumptions)
from .limit import (RootStatistics, StoppedLimitTree, closed_form_pa_pmf, closed_form_ua_pmf,
                    predicted_tail_exponent, root_in_degree, root_pagerank, sample_root_in_degrees,
                    sample_stopped_batch, sample_stopped_tree)
from .outdegree import DistributionError, OutDegreeDistribution
from .rng import Streams, make_rng

__version__ = "0.1.0"

__all__ = [
    "backend", "CollapsedGraph", "InComponent", "collapse_run", "generate_cbp", "in_component",
    "sample_out_degrees", "sequential_linear_equivalence_check", "sequential_rule_distribution",
    "CouplingOutcome", "JointCouplingOutcome", "couple_joint", "couple_single", "coupling_success_rate",
    "LiftedRun", "MarkedTree", "WeightedIndex", "evolve_tree", "grow_lifted_run", "grow_marked_ctbp",
    "pure_birth_counts", "simulate_pure_birth", "AttachmentKernel", "KernelError", "MalthusianResult",
    "NoMalthusianRoot", "RhoEvaluation", "UncertifiedError", "eval_kernel", "malthusian_rate", "rho_hat",
    "validate_assumptions", "RootStatistics", "StoppedLimitTree", "closed_form_pa_pmf", "closed_form_ua_pmf",
    "predicted_tail_exponent", "root_in_degree", "root_pagerank", "sample_root_in_degrees",
    "sample_stopped_batch", "sample_stopped_tree", "DistributionError", "OutDegreeDistribution", "Streams",
    "make_rng",
]
