from __future__ import annotations

import logging
import typing as t
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated

import click
import typer
from rich.console import Console
from rich.table import Table
from typer.core import TyperGroup

from .core.errors import GradientCheckError, InvalidConfigError, SporadicError
from .core.logging_config import configure_logging, use_run_context
from .core.reports import resolve_inside, write_report, write_rows
from .data.series import build_mask_delta
from .data.windows import write_windows
from .ingest.parser import read_lab_file
from .ingest.stats import (
    REFERENCE_FULL,
    REFERENCE_SUBSET,
    compare_to_reference,
    corpus_stats,
)
from .ingest.subset import apply_cutoff, compress_to_seconds, select_subset, write_events
from .models.checkpoint import load_model, save_model
from .models.forecaster import ForecastModel, persistence_model, predict
from .training.ablation import AblationMode, ablate
from .training.config import RunConfig, load_run_config
from .training.evaluation import SWEEP_HEADER, EvalReport, mean_off_diagonal, report_for, sweep_rows
from .training.gradcheck_suite import gradcheck_suite
from .training.influence import sensor_influence
from .training.pipeline import PreparedData, fit_model, load_events, prepare, prepare_run
from .training.traces import TraceTable, export_traces


class ConfigExitGroup(TyperGroup):
    """Usage errors (bad flags, missing options, unknown commands) exit 1 like other config errors."""

    def make_context(self, *args: t.Any, **kwargs: t.Any) -> click.Context:
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = USAGE_EXIT_CODE
            raise

    def invoke(self, ctx: click.Context) -> t.Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = USAGE_EXIT_CODE
            raise


app = typer.Typer(
    cls=ConfigExitGroup,
    add_completion=False,
    help="Forecast values and report times of sporadic sensor series",
)
console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

PUBLISHED_SENSOR_COUNT = 58
USAGE_EXIT_CODE = InvalidConfigError.exit_code
WRONG_SIGN_PARAMETER = "delta_head.bias"

ConfigOpt = Annotated[t.Optional[Path], typer.Option("--config", "-c", help="YAML run config")]
DataOpt = Annotated[t.Optional[Path], typer.Option("--data", help="Lab sensor log")]
CacheOpt = Annotated[t.Optional[Path], typer.Option("--events-cache", help="Event cache CSV to read")]
OutOpt = Annotated[t.Optional[Path], typer.Option("--output-dir", "-o", help="Artifact directory")]
SeedOpt = Annotated[t.Optional[int], typer.Option("--seed", help="Run seed")]
SensorsOpt = Annotated[t.Optional[str], typer.Option("--sensors", help="Comma-separated sensor ids")]
VariableOpt = Annotated[t.Optional[str], typer.Option("--variable", help="temperature, humidity, light or voltage")]
VariantOpt = Annotated[t.Optional[str], typer.Option("--variant", help="simple, bilayer or velocity")]
FractionOpt = Annotated[t.Optional[float], typer.Option("--test-fraction", help="Share of final steps held out")]
CutoffOpt = Annotated[t.Optional[list[float]], typer.Option("--cutoff", help="Evaluation cut-off; repeatable")]
ArOpt = Annotated[t.Optional[int], typer.Option("--ar", help="Window length")]
HiddenOpt = Annotated[t.Optional[int], typer.Option("--hidden", help="Hidden units")]
EpochsOpt = Annotated[t.Optional[int], typer.Option("--epochs")]
BatchOpt = Annotated[t.Optional[int], typer.Option("--batch-size")]
LrOpt = Annotated[t.Optional[float], typer.Option("--lr", help="Learning rate")]
LogOpt = Annotated[t.Optional[str], typer.Option("--log-level", help="Overrides SPORADIC_LOG_LEVEL")]
ExportWindowsOpt = Annotated[
    bool, typer.Option("--export-windows", help="Also write the normalized train and test windows as CSV")
]


def _sensor_list(raw: str | None) -> list[int] | None:
    if raw is None:
        return None
    try:
        return [int(s) for s in raw.split(",") if s.strip()]
    except ValueError as e:
        raise InvalidConfigError(f"sensor ids must be integers: {raw!r}") from e


def _print_rows(rows: t.Sequence[t.Mapping[str, t.Any]], columns: list[str], title: str | None = None) -> None:
    table = Table(show_header=True, header_style="bold", title=title)
    for c in columns:
        table.add_column(c)
    for r in rows:
        table.add_row(*[_fmt(r.get(c)) for c in columns])
    console.print(table)


def _fmt(value: t.Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


@contextmanager
def _handled() -> Iterator[None]:
    """Map library errors to exit codes: 1 config, 2 data, 3 divergence or failed check."""
    try:
        yield
    except SporadicError as e:
        logger.error("command failed", extra={"error": type(e).__name__})
        err_console.print(f"[red]{e}")
        raise typer.Exit(code=e.exit_code) from e


@contextmanager
def _command(name: str, config: RunConfig) -> Iterator[None]:
    with use_run_context(run_id=config.run_id(), command=name):
        config.output_dir.mkdir(parents=True, exist_ok=True)
        logger.info("command started", extra={"output_dir": str(config.output_dir)})
        yield


def _load(
    config_path: Path | None,
    *,
    log_level: str | None = None,
    sensors: str | None = None,
    **overrides: t.Any,
) -> RunConfig:
    configure_logging(log_level)
    overrides["sensor_ids"] = _sensor_list(sensors)
    return load_run_config(config_path, overrides)


def _artifact(config: RunConfig, name: str) -> Path:
    return resolve_inside(config.output_dir, name)


@app.command("ingest")
def cmd_ingest(
    config_path: ConfigOpt = None,
    data: DataOpt = None,
    output_dir: OutOpt = None,
    sensors: SensorsOpt = None,
    variable: VariableOpt = None,
    log_level: LogOpt = None,
) -> None:
    """Parse the sensor log, compress to seconds, and report corpus and subset statistics."""
    with _handled():
        config = _load(
            config_path, log_level=log_level, sensors=sensors, data_path=data, output_dir=output_dir, variable=variable
        )
        if config.data_path is None:
            raise InvalidConfigError("ingest needs --data or data_path in the config")
        with _command("ingest", config):
            records, diagnostics = read_lab_file(config.data_path)
            frame = compress_to_seconds(records)
            present = sorted(int(s) for s in frame["sensor"].unique())
            full = corpus_stats(select_subset(frame, present, config.variable)) if present else None
            subset_events = select_subset(frame, config.sensor_ids, config.variable)
            subset = corpus_stats(subset_events)
            write_events(_artifact(config, "events.csv"), subset_events, config.sensor_ids)

            payload: dict[str, t.Any] = {
                "config": config.echo(),
                "diagnostics": diagnostics.model_dump(),
                "full": full.model_dump() if full else None,
                "full_comparison": compare_to_reference(full, REFERENCE_FULL).model_dump() if full else None,
                "subset": subset.model_dump(),
                "subset_comparison": compare_to_reference(subset, REFERENCE_SUBSET).model_dump(),
            }
            if len(present) != PUBLISHED_SENSOR_COUNT:
                payload["sensor_note"] = (
                    f"file yields {len(present)} sensors; the published table lists {PUBLISHED_SENSOR_COUNT}"
                )
            write_report(_artifact(config, "corpus_stats.yaml"), payload)

            rows = [{"scope": "subset", **subset.model_dump()}]
            if full is not None:
                rows.insert(0, {"scope": "full", **full.model_dump()})
            _print_rows(
                rows,
                ["scope", "timesteps", "sensors", "variable_mean", "mean_gap", "observed_fraction"],
                title="Corpus statistics",
            )
            console.print(f"parsed {diagnostics.parsed} lines, skipped {diagnostics.skipped}")


@app.command("train")
def cmd_train(
    config_path: ConfigOpt = None,
    data: DataOpt = None,
    events_cache: CacheOpt = None,
    output_dir: OutOpt = None,
    seed: SeedOpt = None,
    sensors: SensorsOpt = None,
    variable: VariableOpt = None,
    variant: VariantOpt = None,
    test_fraction: FractionOpt = None,
    ar: ArOpt = None,
    hidden: HiddenOpt = None,
    epochs: EpochsOpt = None,
    batch_size: BatchOpt = None,
    lr: LrOpt = None,
    export_windows: ExportWindowsOpt = False,
    log_level: LogOpt = None,
) -> None:
    """Train a forecaster and write its checkpoint, loss history and run report."""
    with _handled():
        config = _load(
            config_path,
            log_level=log_level,
            sensors=sensors,
            data_path=data,
            events_cache=events_cache,
            output_dir=output_dir,
            seed=seed,
            variable=variable,
            variant=variant,
            test_fraction=test_fraction,
            ar=ar,
            hidden=hidden,
            epochs=epochs,
            batch_size=batch_size,
            learning_rate=lr,
        )
        with _command("train", config):
            data_set = prepare_run(config, load_events(config))
            result = fit_model(config, data_set)
            tc = config.train
            save_model(
                _artifact(config, "model.ckpt"),
                result.model,
                ar=tc.ar,
                loss_threshold=tc.loss_threshold,
                gap_weight=tc.gap_weight,
            )
            write_rows(
                _artifact(config, "history.csv"),
                ("epoch", "loss"),
                ((e, loss) for e, loss in enumerate(result.history, start=1)),
            )
            if export_windows:
                write_windows(_artifact(config, "train_windows.csv"), data_set.train)
                write_windows(_artifact(config, "test_windows.csv"), data_set.test)
            write_report(
                _artifact(config, "train_report.yaml"),
                {
                    "config": config.echo(),
                    "windows": {"train": data_set.train.count, "test": data_set.test.count},
                    "stats": data_set.stats.to_dict(),
                    "parameters": result.model.parameter_count(),
                    "steps": result.steps,
                    "history": result.history,
                    "final_loss": result.history[-1] if result.history else None,
                },
            )
            console.print(
                f"[green]trained {config.variant} model[/green] for {tc.epochs} epochs, "
                f"final loss {_fmt(result.history[-1] if result.history else None)}"
            )


def _evaluation_inputs(
    config: RunConfig, checkpoint: Path | None, persistence: bool
) -> tuple[ForecastModel, PreparedData, dict[str, t.Any]]:
    events = load_events(config)
    if persistence:
        data_set = prepare_run(config, events)
        return persistence_model(data_set.stats), data_set, {"variant": "persistence", "ar": config.train.ar}
    path = checkpoint if checkpoint is not None else config.output_dir / "model.ckpt"
    model, meta = load_model(path)
    ar = int(meta.get("ar", config.train.ar))
    if ar != config.train.ar:
        logger.warning("window length taken from checkpoint", extra={"checkpoint_ar": ar})
    data_set = prepare(
        build_mask_delta(events), ar=ar, test_fraction=config.test_fraction, stats=model.stats
    )
    return model, data_set, {"variant": str(model.variant), "ar": ar, "path": str(path)}


def _print_sweep(reports: list[EvalReport]) -> None:
    _print_rows(
        [r.model_dump() for r in reports],
        ["cutoff", "retained", "windows", "value_mae", "gap_mae"],
        title="Evaluation",
    )


CheckpointOpt = Annotated[t.Optional[Path], typer.Option("--checkpoint", help="Defaults to <output-dir>/model.ckpt")]
PersistenceOpt = Annotated[bool, typer.Option("--persistence", help="Evaluate the last-value baseline instead")]


@app.command("eval")
def cmd_eval(
    config_path: ConfigOpt = None,
    checkpoint: CheckpointOpt = None,
    persistence: PersistenceOpt = False,
    data: DataOpt = None,
    events_cache: CacheOpt = None,
    output_dir: OutOpt = None,
    sensors: SensorsOpt = None,
    test_fraction: FractionOpt = None,
    cutoff: CutoffOpt = None,
    log_level: LogOpt = None,
) -> None:
    """Evaluate a checkpoint on the test split; writes report, sweep table and traces."""
    with _handled():
        config = _load(
            config_path,
            log_level=log_level,
            sensors=sensors,
            data_path=data,
            events_cache=events_cache,
            output_dir=output_dir,
            test_fraction=test_fraction,
            cutoffs=cutoff or None,
        )
        with _command("eval", config):
            model, data_set, source = _evaluation_inputs(config, checkpoint, persistence)
            forecast = predict(model, data_set.test)
            reports = [report_for(forecast, data_set.test, c) for c in config.cutoffs]
            _, kept = apply_cutoff(data_set.test, config.cutoffs[0])
            traces = TraceTable.build(forecast, data_set.test, kept)
            export_traces(_artifact(config, "traces.csv"), traces)
            write_rows(_artifact(config, "sweep.csv"), SWEEP_HEADER, sweep_rows(reports))
            influence = sensor_influence(model, data_set.test) if data_set.test.count else None
            head = reports[0]
            write_report(
                _artifact(config, "eval_report.yaml"),
                {
                    "config": config.echo(),
                    "model": source,
                    "reports": [r.model_dump() for r in reports],
                    "mean_value_correlation": mean_off_diagonal(head.value_correlation)
                    if head.value_correlation
                    else None,
                    "mean_gap_correlation": mean_off_diagonal(head.gap_correlation)
                    if head.gap_correlation
                    else None,
                    "sensor_influence": influence.tolist() if influence is not None else None,
                },
            )
            _print_sweep(reports)


@app.command("sweep")
def cmd_sweep(
    config_path: ConfigOpt = None,
    checkpoint: CheckpointOpt = None,
    persistence: PersistenceOpt = False,
    data: DataOpt = None,
    events_cache: CacheOpt = None,
    output_dir: OutOpt = None,
    sensors: SensorsOpt = None,
    test_fraction: FractionOpt = None,
    cutoff: CutoffOpt = None,
    log_level: LogOpt = None,
) -> None:
    """MAE against evaluation cut-off, written as a plottable table."""
    with _handled():
        config = _load(
            config_path,
            log_level=log_level,
            sensors=sensors,
            data_path=data,
            events_cache=events_cache,
            output_dir=output_dir,
            test_fraction=test_fraction,
            cutoffs=cutoff or None,
        )
        with _command("sweep", config):
            model, data_set, _ = _evaluation_inputs(config, checkpoint, persistence)
            forecast = predict(model, data_set.test)
            reports = [report_for(forecast, data_set.test, c) for c in config.cutoffs]
            write_rows(_artifact(config, "sweep.csv"), SWEEP_HEADER, sweep_rows(reports))
            _print_sweep(reports)


@app.command("gradcheck")
def cmd_gradcheck(
    configs: Annotated[int, typer.Option("--configs", help="Random problems per variant")] = 100,
    seed: Annotated[int, typer.Option("--seed")] = 0,
    epsilon: Annotated[float, typer.Option("--epsilon")] = 1e-5,
    tolerance: Annotated[float, typer.Option("--tolerance")] = 1e-4,
    variant: Annotated[t.Optional[list[str]], typer.Option("--variant", help="Repeatable; default all")] = None,
    inject_wrong_sign: Annotated[
        bool, typer.Option("--inject-wrong-sign", help="Negate one analytic gradient to exercise failure")
    ] = False,
    output_dir: OutOpt = None,
    log_level: LogOpt = None,
) -> None:
    """Finite-difference check of every variant; exit 0 only when all pass."""
    with _handled():
        config = _load(None, log_level=log_level, output_dir=output_dir, seed=seed)
        with _command("gradcheck", config):
            summary = gradcheck_suite(
                configs,
                variants=variant or ("simple", "bilayer", "velocity"),
                seed=seed,
                epsilon=epsilon,
                tolerance=tolerance,
                corrupt=WRONG_SIGN_PARAMETER if inject_wrong_sign else None,
            )
            write_report(_artifact(config, "gradcheck_report.yaml"), summary.model_dump(mode="json"))
            _print_rows(
                [v.model_dump() for v in summary.variants],
                ["variant", "configs", "max_error", "failures", "passed"],
                title="Gradient check",
            )
            if not summary.passed:
                raise GradientCheckError(f"relative error above {tolerance} for some variant")
            console.print("[green]all variants pass")


@app.command("ablate")
def cmd_ablate(
    mode: Annotated[str, typer.Option("--mode", help="no-imputation or unmasked-loss")],
    config_path: ConfigOpt = None,
    data: DataOpt = None,
    events_cache: CacheOpt = None,
    output_dir: OutOpt = None,
    seed: SeedOpt = None,
    sensors: SensorsOpt = None,
    variant: VariantOpt = None,
    test_fraction: FractionOpt = None,
    cutoff: CutoffOpt = None,
    ar: ArOpt = None,
    hidden: HiddenOpt = None,
    epochs: EpochsOpt = None,
    batch_size: BatchOpt = None,
    lr: LrOpt = None,
    log_level: LogOpt = None,
) -> None:
    """Train the baseline and one ablated arm under shared seeds and compare their MAEs."""
    with _handled():
        try:
            ablation = AblationMode(mode)
        except ValueError as e:
            raise InvalidConfigError(f"unknown ablation mode {mode!r}") from e
        config = _load(
            config_path,
            log_level=log_level,
            sensors=sensors,
            data_path=data,
            events_cache=events_cache,
            output_dir=output_dir,
            seed=seed,
            variant=variant,
            test_fraction=test_fraction,
            cutoffs=cutoff or None,
            ar=ar,
            hidden=hidden,
            epochs=epochs,
            batch_size=batch_size,
            learning_rate=lr,
        )
        with _command("ablate", config):
            series = build_mask_delta(load_events(config))
            report = ablate(series, ablation, config, config.cutoffs[0])
            write_report(
                _artifact(config, "ablation_report.yaml"),
                {"config": config.echo(), **report.model_dump(mode="json")},
            )
            _print_rows(
                [
                    {"arm": "baseline", **report.baseline.model_dump()},
                    {"arm": str(ablation), **report.ablated.model_dump()},
                ],
                ["arm", "cutoff", "retained", "value_mae", "gap_mae"],
                title="Ablation",
            )


def main() -> None:
    app()


if __name__ == "__main__":
    main()
