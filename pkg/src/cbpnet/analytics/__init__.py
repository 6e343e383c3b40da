from .diagnostics import birth_time_diagnostic, expectation_bound, expectation_bound_check
from .isomorphism import RootedMultigraph, brute_force_isomorphic, canonical_code, is_isomorphic
from .neighborhood import joint_tail, joint_tail_frequency, neighborhood_distribution, neighborhood_frequency
from .pagerank import PageRankNotConverged, PageRankVector, graph_pagerank
from .stats import (EmpiricalDistribution, HillEstimate, hill_tail_index, tv_distance, two_sample_chi2,
                    wilson_interval)

__all__ = [
    "birth_time_diagnostic", "expectation_bound", "expectation_bound_check",
    "RootedMultigraph", "brute_force_isomorphic", "canonical_code", "is_isomorphic",
    "joint_tail", "joint_tail_frequency", "neighborhood_distribution", "neighborhood_frequency",
    "PageRankNotConverged", "PageRankVector", "graph_pagerank",
    "EmpiricalDistribution", "HillEstimate", "hill_tail_index", "tv_distance", "two_sample_chi2",
    "wilson_interval",
]
