"""Selective clustering ensembles: kappa-based partition selection, F-score
cluster weighting and weighted co-association consensus."""
from .alignment import (
    CostMatrix,
    LabelMapping,
    ReferenceStrategy,
    align_ensemble,
    align_partition,
    alignment_cost,
    solve_assignment,
)
from .consensus import (
    ClusterWeights,
    CoassociationMatrix,
    DiversityScores,
    DskfConfig,
    cluster_weights,
    diversity_scores,
    dskf,
    eac_al,
    hac_al,
    select_partitions,
    weighted_coassociation,
)
from .generation import Dataset, GenerationConfig, generate_ensemble, kmeans
from .metrics import (
    ClassificationScores,
    MetricConfig,
    apmm,
    bnmi,
    classification_scores,
    cluster_f,
    enmi,
    entropy,
    max_criterion,
    nmi,
    sme,
    smep,
)
from .partition import (
    Cluster,
    ContingencyTable,
    Ensemble,
    Partition,
    binarized,
    contingency,
    corresponding_partition,
    extended_partition,
    partition_from_labels,
)

__version__ = "0.1.0"
