from .datasets import DatasetRecord, build_dataset, read_dataset, split_by_graph_stat
from .evaluate import EvalRecord, evaluate, read_records, write_records
from .models import HttpModel, ModelSpec, NoisyOracleModel, corrupt_claims
from .reports import report

__all__ = [
    "DatasetRecord",
    "EvalRecord",
    "HttpModel",
    "ModelSpec",
    "NoisyOracleModel",
    "build_dataset",
    "corrupt_claims",
    "evaluate",
    "read_dataset",
    "read_records",
    "report",
    "split_by_graph_stat",
    "write_records",
]
