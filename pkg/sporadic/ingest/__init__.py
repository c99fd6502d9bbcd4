from .parser import (
    VARIABLES,
    IngestDiagnostics,
    ParseSkip,
    SensorRecord,
    format_lab_line,
    parse_line,
    read_lab_file,
    records_to_frame,
)
from .stats import (
    REFERENCE_FULL,
    REFERENCE_SUBSET,
    CorpusStats,
    StatsComparison,
    compare_to_reference,
    corpus_stats,
)
from .subset import (
    apply_cutoff,
    compress_to_seconds,
    read_events,
    select_subset,
    split_train_test,
    write_events,
)

__all__ = [
    "VARIABLES",
    "SensorRecord",
    "ParseSkip",
    "IngestDiagnostics",
    "parse_line",
    "read_lab_file",
    "format_lab_line",
    "records_to_frame",
    "compress_to_seconds",
    "select_subset",
    "split_train_test",
    "apply_cutoff",
    "write_events",
    "read_events",
    "CorpusStats",
    "StatsComparison",
    "corpus_stats",
    "compare_to_reference",
    "REFERENCE_FULL",
    "REFERENCE_SUBSET",
]
