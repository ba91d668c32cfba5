"""Command-line entry point: ``ammsm synth | run | bench | eval | ablate``."""
import functools
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import click
import numpy as np

from src.classifier import AMMSMNet
from src.config import ConfigurationError, RunConfig, load_settings, require_dataset
from src.data import CLASS_NAMES, ArrayDataset, generate_dataset, read_dataset, read_manifest, write_dataset
from src.evaluation import (
    ConfusionMatrix,
    bench,
    run_ablation,
    run_loso,
    uar,
    uf1,
    write_bench_csv,
    write_confusion_csv,
    write_latency_chart,
    write_flow_figure,
    write_metrics_chart,
    write_report,
)
from src.evaluation.loso import FoldFailedError
from src.numeric import FormatError, Tensor, load_checkpoint, precision
from src.search import Config, SearchSpace, predict
from src.utils.helpers import directory_digest
from src.utils.logger import PACKAGE_LOGGER, get_logger, setup_logger
from src.workflow import FoldPipeline

logger = get_logger(__name__)

EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _configure_logging(settings: RunConfig) -> None:
    log = settings.logging
    setup_logger(PACKAGE_LOGGER, log.level, log.file, log.format, log.max_bytes, log.backup_count)


def _load(config_path: Optional[str], overrides: Tuple[str, ...]) -> RunConfig:
    settings = load_settings(Path(config_path) if config_path else None, overrides)
    _configure_logging(settings)
    return settings


def handle_errors(command: Callable[..., Any]) -> Callable[..., Any]:
    """Map configuration and format failures to exit 2, everything else to exit 1."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except (ConfigurationError, FormatError) as e:
            click.echo(f"Configuration error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except FoldFailedError as e:
            logger.error(str(e), exc_info=True)
            click.echo(f"Run failed: {e}", err=True)
            sys.exit(EXIT_RUNTIME)
        except Exception as e:
            logger.error(f"Command failed: {e}", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_RUNTIME)

    return wrapper


config_option = click.option(
    "--config", "config_path", type=click.Path(dir_okay=False), default=None,
    help="JSON/YAML run configuration (defaults apply when omitted)",
)
set_option = click.option(
    "--set", "overrides", multiple=True, metavar="KEY=VALUE",
    help="Override a configuration value, e.g. --set schedule.adaptive_epochs=2",
)


def _load_dataset(settings: RunConfig) -> ArrayDataset:
    dataset_dir = require_dataset(settings)
    manifest = read_manifest(dataset_dir)
    return ArrayDataset.from_samples(read_dataset(dataset_dir), manifest.n_classes)


def _dataset_info(settings: RunConfig, dataset: ArrayDataset) -> Dict[str, Any]:
    return {
        "dir": settings.data.dataset_dir,
        "n_samples": len(dataset),
        "n_classes": dataset.n_classes,
        "subjects": dataset.subject_ids(),
        "resolution": dataset.resolution,
        "digest": directory_digest(Path(settings.data.dataset_dir)),
    }


def _class_names(n_classes: int):
    return CLASS_NAMES.get(n_classes)


@click.group()
@click.version_option(package_name="ammsm")
def cli() -> None:
    """Adaptive motion magnification and sparse-mamba micro-expression pipeline."""


@cli.command()
@config_option
@set_option
@handle_errors
def synth(config_path: Optional[str], overrides: Tuple[str, ...]) -> None:
    """Generate the synthetic dataset described by the `data` section."""
    settings = _load(config_path, overrides)
    spec = settings.data
    samples = generate_dataset(spec)
    write_dataset(samples, spec.dataset_dir, n_classes=spec.n_classes)
    click.echo(
        f"Wrote {len(samples)} samples ({spec.n_subjects} subjects x {spec.n_classes} classes x "
        f"{spec.samples_per_subject_per_class}) to {spec.dataset_dir}"
    )


@cli.command()
@config_option
@set_option
@handle_errors
def run(config_path: Optional[str], overrides: Tuple[str, ...]) -> None:
    """Run the LOSO protocol: adaptive training, search, fine-tuning, prediction."""
    settings = _load(config_path, overrides)
    dataset = _load_dataset(settings)
    output_dir = Path(settings.output_dir)

    report = run_loso(
        FoldPipeline(settings, output_dir), dataset, seed=settings.seed, workers=settings.eval.fold_workers
    )
    payload = {
        "dataset": _dataset_info(settings, dataset),
        "config": settings.model_dump(mode="json"),
        **report.to_dict(),
        "bench": [],
    }
    path = write_report(output_dir / "run_report.json", payload)
    names = _class_names(dataset.n_classes)
    if settings.eval.write_csv:
        write_confusion_csv(output_dir / "confusion.csv", report.pooled, names)
    if settings.eval.write_chart:
        scores = {f.subject: {"uf1": uf1(f.confusion), "uar": uar(f.confusion, strict=False)} for f in report.folds}
        scores["pooled"] = {"uf1": report.uf1, "uar": report.uar}
        write_metrics_chart(output_dir / "metrics.svg", scores)
    click.echo(f"UF1 {report.uf1:.4f}  UAR {report.uar:.4f}  report: {path}")


@cli.command("bench")
@config_option
@set_option
@handle_errors
def bench_command(config_path: Optional[str], overrides: Tuple[str, ...]) -> None:
    """Count FLOPs and time forward passes over the sparsity variants."""
    settings = _load(config_path, overrides)
    output_dir = Path(settings.output_dir)
    with precision(settings.precision.value):
        model = AMMSMNet(
            settings.model,
            settings.data.n_classes,
            np.random.default_rng(settings.seed),
            alpha_range=(settings.search.alpha_min, settings.search.alpha_max),
        )
        space = SearchSpace.from_settings(settings.search, settings.model)
        reports = bench(
            model, settings.bench, settings.data.resolution, space,
            alpha=settings.search.alpha_min, seed=settings.seed,
        )
    path = write_report(
        output_dir / "bench_report.json",
        {"config": settings.model_dump(mode="json"), "bench": [r.to_dict() for r in reports]},
    )
    write_bench_csv(output_dir / "bench_report.csv", reports)
    if settings.eval.write_chart:
        write_latency_chart(output_dir / "latency.svg", reports)
    for r in reports:
        click.echo(f"s={r.sparsity:.2f}  mixer FLOPs {r.mixer_flops:.3e}  latency {r.latency_ms:.2f} ms")
    click.echo(f"report: {path}")


@cli.command("eval")
@config_option
@set_option
@click.option("--checkpoint", "checkpoint", required=True, type=click.Path(dir_okay=False),
              help="Checkpoint index (.json) written by `run`")
@click.option("--subject-only", is_flag=True, help="Evaluate only the checkpoint's held-out subject")
@handle_errors
def eval_command(
    config_path: Optional[str], overrides: Tuple[str, ...], checkpoint: str, subject_only: bool
) -> None:
    """Predict the dataset with a saved fold model and its searched configuration."""
    settings = _load(config_path, overrides)
    dataset = _load_dataset(settings)
    state, metadata = load_checkpoint(checkpoint)
    try:
        model_settings = settings.model.model_validate(metadata["model"])
        best = Config(ratios=tuple(metadata["best_config"]["ratios"]), alpha=metadata["best_config"]["alpha"])
        n_classes = int(metadata["n_classes"])
        alpha_range = (metadata["search"]["alpha_min"], metadata["search"]["alpha_max"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"checkpoint metadata incomplete: {e}", str(checkpoint))
    if n_classes != dataset.n_classes:
        raise ConfigurationError(f"checkpoint has {n_classes} classes, dataset has {dataset.n_classes}")

    if subject_only:
        dataset = dataset.by_subjects([metadata["subject"]])
    with precision(settings.precision.value):
        model = AMMSMNet(model_settings, n_classes, np.random.default_rng(0), alpha_range=alpha_range)
        model.load_state_dict(state)
        predictions = predict(model, dataset, best, settings.schedule.batch_size)
        if settings.eval.write_chart and model.magnifier is not None:
            out = model.forward(Tensor(dataset.onset[:1]), Tensor(dataset.flow[:1]), best.ratios, best.alpha)
            write_flow_figure(
                Path(settings.output_dir) / "flow.svg", dataset.flow[0], out.of_mag.numpy()[0], best.alpha
            )
    cm =ConfusionMatrix.from_predictions(dataset.labels, predictions, n_classes)
    path = write_report(
        Path(settings.output_dir) / "eval_report.json",
        {
            "checkpoint": str(checkpoint),
            "subject": metadata.get("subject"),
            "subject_only": subject_only,
            "best_config": {"ratios": list(best.ratios), "alpha": best.alpha},
            "n_samples": len(dataset),
            "uf1": uf1(cm),
            "uar": uar(cm, strict=False),
            "confusion": cm.to_list(),
        },
    )
    click.echo(f"UF1 {uf1(cm):.4f}  UAR {uar(cm, strict=False):.4f}  report: {path}")


@cli.command()
@config_option
@set_option
@handle_errors
def ablate(config_path: Optional[str], overrides: Tuple[str, ...]) -> None:
    """Run the LOSO protocol for every magnifier/sparse/backbone variant."""
    settings = _load(config_path, overrides)
    dataset = _load_dataset(settings)
    output_dir = Path(settings.output_dir)
    report = run_ablation(settings, dataset, lambda s: FoldPipeline(s))
    path = write_report(
        output_dir / "ablation_report.json",
        {"dataset": _dataset_info(settings, dataset), "config": settings.model_dump(mode="json"), **report.to_dict()},
    )
    if settings.eval.write_chart:
        write_metrics_chart(output_dir / "ablation.svg", report.scores())
    for name, scores in report.scores().items():
        click.echo(f"{name:<28} UF1 {scores['uf1']:.4f}  UAR {scores['uar']:.4f}")
    click.echo(f"report: {path}")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
