"""Flow-based intrusion detection: CART, random forest and linear SVM
baselines plus a deterministic trust-aware federated simulation."""

from .exceptions import AggregationHalt, ConfigError, DataError, FederationError
from .flow_ingest import (
    FeatureMatrix,
    PartitionPlan,
    RawTable,
    ScalerParams,
    SplitPair,
    apply_scaler,
    binarize_labels,
    clean,
    fit_scaler,
    load_flow_csv,
    partition_clients,
    stratified_split,
)
from .metrics import ConfusionMatrix, MetricReport, RocCurve, confusion, error_profile, metrics_from_confusion, roc_auc
from .synthetic import generate_synthetic

__version__ = "0.1.0"
