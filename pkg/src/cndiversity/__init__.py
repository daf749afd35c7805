"""Structural diversity of common neighborhoods: census, signatures, superfamilies
and link inference for large undirected networks."""

__version__ = "0.1.0"

from .canon import AdjMask, GraphClass, GraphClassCatalog, build_catalog, classify
from .census import CensusMode, CensusTable, common_neighborhood, enumerate_pairs, run_census
from .estimators import (BaselineProfileTransformer, DiversitySignatureTransformer,
                         LinkRateRegressor, SuperfamilyClustering)
from .exceptions import (CatalogMismatchError, DegenerateDatasetError, DiameterRefusedError,
                         DiversityError, EdgeListParseError, EmptyGraphError,
                         SingularDesignError, UndefinedBaselineError,
                         UndefinedCorrelationError)
from .graph import (CleaningPolicy, DirectedMode, Graph, NetworkStats, load_edge_list,
                    network_stats, write_edge_list)
from .inference import (InferenceDataset, RegressionResult, average_precision,
                        evaluate_predictors, ols_fit, precision_recall_curve,
                        regression_rows, roc_auc)
from .randgraph import GeneratorSpec, generate, reference_manifest
from .signature import SignatureVector, build_signature, wilson_interval
from .superfamily import (Dendrogram, ProfileMatrix, baseline_profile, correlation_matrix,
                          flat_clusters, pearson, ward_cluster)

__all__ = [name for name in dir() if not name.startswith("_")]
