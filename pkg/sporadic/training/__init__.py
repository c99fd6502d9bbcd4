from .ablation import AblationMode, AblationReport, ablate
from .config import RunConfig, TrainConfig, load_run_config
from .evaluation import EvalReport, correlation_report, cutoff_sweep, evaluate, report_for
from .gradcheck_suite import GradcheckSummary, gradcheck_suite
from .influence import sensor_influence
from .pipeline import Imputation, PreparedData, fit_model, load_events, prepare, prepare_run
from .synthetic import SyntheticStream, sine_stream, stream_records, write_lab_file
from .trainer import TrainResult, train
from .traces import TraceTable, export_traces, read_traces

__all__ = [
    "TrainConfig",
    "RunConfig",
    "load_run_config",
    "TrainResult",
    "train",
    "EvalReport",
    "evaluate",
    "report_for",
    "cutoff_sweep",
    "correlation_report",
    "AblationMode",
    "AblationReport",
    "ablate",
    "TraceTable",
    "export_traces",
    "read_traces",
    "sensor_influence",
    "GradcheckSummary",
    "gradcheck_suite",
    "SyntheticStream",
    "sine_stream",
    "stream_records",
    "write_lab_file",
    "Imputation",
    "PreparedData",
    "load_events",
    "prepare",
    "prepare_run",
    "fit_model",
]
