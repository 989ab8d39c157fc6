"""Conditional quasi-randomization tests for network spillover effects.

The null distribution of a (graph, treatment, outcome) test statistic is
built by resampling graphs from random-graph null models — same labelled
degree sequence, degree-preserving relabelings, treatment-stratified
relabelings, or parametric Erdős–Rényi redraws — holding the observed
treatment and outcomes fixed. A Monte Carlo harness reproduces desk-scale
rejection-rate experiments under completely randomized and graph-cluster
randomized designs.
"""

from ._version import __version__
from .designs import (
    Clustering,
    ClusterBernoulliDesign,
    CompletelyRandomizedDesign,
    TreatmentAssignment,
    assign_cluster_bernoulli,
    assign_completely_randomized,
    epsilon_net_clusters,
)
from .generators import (
    ErdosRenyiSpec,
    SbmSpec,
    SmallWorldSpec,
    estimate_er_p,
    gen_erdos_renyi_gnm,
    gen_erdos_renyi_gnp,
    gen_sbm,
    gen_small_world,
    generate_network,
)
from .graph import (
    Graph,
    VertexPermutation,
    bfs_distances,
    degree_sequence,
    induced_subgraph,
    labelled_degrees,
    new_graph,
    read_edge_list,
    relabel,
    write_edge_list,
)
from .harness import (
    RejectionRateTable,
    SimulationConfig,
    derive_replicate_seed,
    emit_results,
    parse_results,
    run_simulation,
    run_single_test,
)
from .null_samplers import (
    NullClassMode,
    SwapChain,
    SwapChainConfig,
    double_edge_swap_step,
    enumerate_null_class,
    make_null_sampler,
    sample_block_isomorphism,
    sample_degree_isomorphism,
    sample_same_degree_sequence,
)
from .outcomes import (
    OUTCOME_MODELS,
    OutcomeParams,
    outcome_indicator,
    outcome_proportion,
    outcome_proportion_degree,
)
from .pvalue import PValueReport, pvalue_exact, pvalue_mc
from .statistics import (
    STATISTICS,
    edge_weighted_contrast,
    exposure_quantile_contrast,
    make_statistic,
    neighbor_exposure_contrast,
    quantile_nearest_rank,
    treated_neighbor_counts,
)

__all__ = [name for name in dir() if not name.startswith("_")]
