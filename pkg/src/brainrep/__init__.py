"""Group-representative brain connectivity networks via exponential random
graph models: graph statistics, Metropolis-Hastings simulation, estimation,
goodness-of-fit diagnostics, and the end-to-end group pipeline."""

from .errors import (
    AssessmentError,
    BrainrepError,
    ConfigurationError,
    DegeneracyError,
    DegenerateGraphError,
    EdgeListParseError,
    EnumerationLimitError,
    InvalidDyadError,
    ModelSelectionError,
    NotGraphicalError,
    PipelineError,
)
from .estimator import EstimatorConfig, FitResult, exact_loglik, exact_mle, mcmc_mle, mple
from .gof import (
    GofConfig,
    GofReport,
    GofScore,
    SelectionConfig,
    derive_group_model,
    gof_report,
    gof_score,
    select_model,
)
from .graph import (
    DegreeSequence,
    Graph,
    NodeAttributes,
    SharedPartnerDistributions,
    degree_sequence,
    giant_component_size,
    havel_hakimi,
    load_graph,
    load_node_attributes,
    save_graph,
    shared_partner_distributions,
    toggle_edge,
)
from .metrics import (
    MetricProfile,
    NodalDistributions,
    TriadCensus,
    assortativity,
    characteristic_path_length,
    clustering_coefficients,
    geodesic_distances,
    global_efficiency,
    local_efficiency,
    metric_profile,
    nodal_distributions,
    triad_census,
)
from .pipeline import (
    AssessmentTable,
    Candidate,
    PipelineConfig,
    PipelineResult,
    Subject,
    SubjectSet,
    assess_candidates,
    euclidean_distance,
    generate_candidates,
    group_correlation_network,
    group_theta,
    load_correlation_matrix,
    pick_reference_subject,
    run_pipeline,
    threshold_at_value,
    threshold_to_density,
)
from .sampler import (
    SampleSet,
    SamplerConfig,
    load_sample_set,
    log_unnormalized_density,
    sample_degree_constrained,
    sample_networks,
    save_sample_set,
)
from .terms import (
    ModelSpec,
    TermSpec,
    change_stats,
    default_group_model,
    eval_stats,
    geometric_weights,
)

__version__ = "0.1.0"
