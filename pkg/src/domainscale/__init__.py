"""Party-position scaling through policy domains.

The pipeline splits party platforms into policy domains, measures pairwise
party distances inside each domain with whitened sentence embeddings, and
aggregates the per-domain matrices into an overall similarity structure that
can be scaled to one dimension and validated against a left-right index.
"""

from .config import RunConfig, load_config
from .corpus import (
    Corpus,
    DomainScheme,
    Sentence,
    category_counts,
    ingest_corpus,
    slice_by_domain,
    write_corpus,
)
from .embeddings import (
    EmbeddingStore,
    WhiteningTransform,
    apply_whitening,
    cosine_distance,
    fit_whitening,
    load_embeddings,
    write_embeddings,
)
from .errors import (
    ConfigError,
    CorpusParseError,
    DimensionMismatchError,
    DomainScaleError,
    EmbeddingFormatError,
    InsufficientDataError,
    MissingEmbeddingError,
    TrainingError,
    UndefinedResultError,
    UnknownKeyError,
    ValidationError,
)
from .grouping import (
    CategoryDistanceMatrix,
    Dendrogram,
    Partition,
    average_linkage_cluster,
    build_category_matrix,
    category_distance,
    check_stance_pairing,
    cut_dendrogram,
    finalize_scheme,
    write_category_matrix_csv,
)
from .labeling import (
    BigramInstance,
    ClassifierModel,
    TrainConfig,
    accuracy,
    feature_matrix,
    logreg_loss_and_grad,
    make_bigrams,
    per_label_accuracy,
    split_validation,
    train_logreg,
    train_majority,
    write_predictions,
)
from .scaling import (
    MantelResult,
    ScalingResult,
    classical_mds_axis1,
    correlate_with_rile,
    load_rile_codes,
    mantel,
    pearson,
    rile,
    rile_scores,
    salience_distance_matrix,
)
from .similarity import (
    PartyDistanceMatrix,
    aggregate_matrix,
    build_domain_matrix,
    domain_distance,
    labels_from_codes,
    read_predictions,
)

__version__ = "0.1.0"

__all__ = [
    "BigramInstance",
    "CategoryDistanceMatrix",
    "ClassifierModel",
    "ConfigError",
    "Corpus",
    "CorpusParseError",
    "Dendrogram",
    "DimensionMismatchError",
    "DomainScaleError",
    "DomainScheme",
    "EmbeddingFormatError",
    "EmbeddingStore",
    "InsufficientDataError",
    "MantelResult",
    "MissingEmbeddingError",
    "Partition",
    "PartyDistanceMatrix",
    "RunConfig",
    "ScalingResult",
    "Sentence",
    "TrainConfig",
    "TrainingError",
    "UndefinedResultError",
    "UnknownKeyError",
    "ValidationError",
    "WhiteningTransform",
    "accuracy",
    "aggregate_matrix",
    "apply_whitening",
    "average_linkage_cluster",
    "build_category_matrix",
    "build_domain_matrix",
    "category_counts",
    "category_distance",
    "check_stance_pairing",
    "classical_mds_axis1",
    "correlate_with_rile",
    "cosine_distance",
    "cut_dendrogram",
    "domain_distance",
    "feature_matrix",
    "finalize_scheme",
    "fit_whitening",
    "ingest_corpus",
    "labels_from_codes",
    "load_config",
    "load_embeddings",
    "load_rile_codes",
    "logreg_loss_and_grad",
    "make_bigrams",
    "mantel",
    "pearson",
    "per_label_accuracy",
    "read_predictions",
    "rile",
    "rile_scores",
    "salience_distance_matrix",
    "slice_by_domain",
    "split_validation",
    "train_logreg",
    "train_majority",
    "write_category_matrix_csv",
    "write_corpus",
    "write_embeddings",
    "write_predictions",
]
