from sla_lab.domain.data.entities import Batch, Dataset, SubsampleSpec
from sla_lab.domain.data.ops import as_arrays, select_classes, subsample_per_class, synthetic_two_class

__all__ = [
    "Batch",
    "Dataset",
    "SubsampleSpec",
    "as_arrays",
    "select_classes",
    "subsample_per_class",
    "synthetic_two_class",
]
