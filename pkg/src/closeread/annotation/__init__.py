from .agreement import kappa_free, kappa_free_from_labels
from .dedup import MergedExpression, dedup_highlights
from .export import export_dataset, ingest_dataset
from .records import Batch, CreativeLabel, HighlightRecord, RatingRecord
from .store import AnnotationStore

__all__ = [
    "AnnotationStore", "Batch", "CreativeLabel", "HighlightRecord",
    "MergedExpression", "RatingRecord", "dedup_highlights", "export_dataset",
    "ingest_dataset", "kappa_free", "kappa_free_from_labels",
]
