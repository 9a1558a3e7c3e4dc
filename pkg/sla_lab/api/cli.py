# sla_lab/api/cli.py
"""Command-line driver.

Every subcommand turns deliberate failures (``SlaError``, pydantic
``ValidationError``) into a one-line reason on stderr and exit code 1; click
itself answers usage errors with exit code 2.
"""

from __future__ import annotations

import functools
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional

import click
from pydantic import ValidationError

from sla_lab.config import settings
from sla_lab.domain.errors import ContractViolation, SlaError
from sla_lab.domain.model import InferenceMode, ObjectiveKind
from sla_lab.infrastructure.checkpoint import NpzCheckpointStore
from sla_lab.infrastructure.memlog import stage
from sla_lab.infrastructure.metrics import append_table_rows
from sla_lab.services.compare import COMPARE_HEADER, compare
from sla_lab.services.ensemble import run_ensemble, seeded_configs
from sla_lab.services.reduction import reduce_check
from sla_lab.services.toy import PAIRS, TOY_HEADER, ToyMode, ToyResult, parse_pair, toy_sweep
from sla_lab.services.training import DatasetSpec, evaluate, load_named, load_train_config, run_training

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(level=(level or settings().log_level).upper(), format=LOG_FORMAT, stream=sys.stderr)


# ───────────────────── error translation ────────────────────── #

def _guarded(fn: Callable) -> Callable:
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except ValidationError as exc:
            first = exc.errors()[0]
            where = ".".join(str(p) for p in first["loc"]) or "<root>"
            click.echo(f"error: invalid configuration: {where}: {first['msg']}", err=True)
            sys.exit(1)
        except SlaError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except Exception as exc:
            logger.exception("Unhandled exception in %s", fn.__name__)
            click.echo(f"error: unexpected {type(exc).__name__}: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _csv_list(kind: Callable, text: Optional[str], what: str) -> Optional[List]:
    if text is None:
        return None
    try:
        return [kind(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"cannot parse {what} from {text!r}") from exc


def _format_acc(accuracies) -> str:
    return " ".join(f"{InferenceMode(m).value}={a:.4f}" for m, a in accuracies.items())


# ─────────────────────────── group ──────────────────────────── #

@click.group()
@click.option("--log-level", default=None, help="Override SLA_LOG_LEVEL for this invocation.")
def cli(log_level: Optional[str]) -> None:
    """Self-supervised label augmentation experiments."""
    configure_logging(log_level)


@cli.command()
@click.argument("config", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Run directory (default: SLA_RUNS_DIR/<config name>).")
@_guarded
def train(config: Path, out: Optional[Path]) -> None:
    """Train one model and write metrics.csv, model.npz and config.json."""
    cfg = load_train_config(config)
    out = out or settings().runs_dir / config.stem
    result = run_training(cfg, out_dir=out)
    final = result.final
    click.echo(
        f"iteration={final.iteration} loss={final.loss_total:.6f} train={final.acc_train:.4f} "
        + " ".join(f"{k}={v:.4f}" for k, v in final.accuracies.items())
    )
    click.echo(f"run directory: {out}")


@cli.command("eval")
@click.argument("checkpoint", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("config", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--modes", default="si", show_default=True, help="Comma-separated subset of si,ag,sd.")
@_guarded
def eval_cmd(checkpoint: Path, config: Path, modes: str) -> None:
    """Evaluate a saved checkpoint on the config's test split."""
    requested = _csv_list(InferenceMode, modes, "inference modes")
    cfg = load_train_config(config)
    model = NpzCheckpointStore().load(checkpoint)
    tset = cfg.transform_set()
    if tset.size != model.n_transforms:
        raise ContractViolation(
            f"checkpoint was trained with M={model.n_transforms}, config describes M={tset.size}"
        )
    _, test = load_named(cfg.dataset, settings().data_dir)
    with stage("eval", model) as stats:
        accuracies = evaluate(model, test, tset, requested, chunk=cfg.eval_batch_size)
    click.echo(f"{_format_acc(accuracies)} forwards={stats.forwards}")


@cli.command()
@click.option("--pair", default="6,9", show_default=True, help="Two digits like 6,9, or 'all'.")
@click.option("--mode", "mode", default="rotated_sla", show_default=True,
              type=click.Choice([m.value for m in ToyMode] + ["all"]))
@click.option("--iterations", default=5_000, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="CSV file receiving one row per run (default: SLA_RUNS_DIR/toy.csv).")
@_guarded
def toy(pair: str, mode: str, iterations: int, seed: int, out: Optional[Path]) -> None:
    """Linear classifiers on raw digit pixels: upright vs rotated."""
    pairs = list(PAIRS) if pair == "all" else [parse_pair(pair)]
    modes = list(ToyMode) if mode == "all" else [ToyMode(mode)]
    train_ds, test_ds = load_named(DatasetSpec(), settings().data_dir)
    out = out or settings().runs_dir / "toy.csv"

    def report(result: ToyResult) -> None:
        append_table_rows(out, TOY_HEADER, [result.as_row()])
        extra = "" if result.joint_error is None else f" joint_error={result.joint_error:.4f}(rotated)"
        click.echo(
            f"pair={result.pair[0]},{result.pair[1]} mode={result.mode.value} "
            f"test_error={result.test_error:.4f}({result.scored_on}){extra}"
        )

    toy_sweep(train_ds, test_ds, pairs=pairs, modes=modes, iterations=iterations, seed=seed, on_result=report)


@cli.command()
@click.argument("config", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--k", default=4, show_default=True, type=click.IntRange(min=1), help="Number of members.")
@click.option("--aggregate", is_flag=True, help="Also ensemble aggregated logits (joint-label members).")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@_guarded
def ensemble(config: Path, k: int, aggregate: bool, out: Optional[Path]) -> None:
    """Train K seeds of one config and score their logit average."""
    cfg = load_train_config(config)
    result = run_ensemble(seeded_configs(cfg, k), aggregate=aggregate, out_dir=out)
    for seed, acc in zip(result.seeds, result.member_accuracies):
        click.echo(f"member seed={seed} si={acc:.4f}")
    click.echo(f"ensemble k={k} mean_member={result.mean_member_accuracy:.4f} ie={result.ensemble_accuracy:.4f}")
    if result.ensemble_ag_accuracy is not None:
        click.echo(f"ensemble k={k} ie_ag={result.ensemble_ag_accuracy:.4f}")


@cli.command("reduce-check")
@click.option("--trials", default=20, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--gradcheck", is_flag=True, help="Also compare every loss gradient with finite differences.")
@_guarded
def reduce_check_cmd(trials: int, seed: int, gradcheck: bool) -> None:
    """Check the joint-label loss against its augmentation and multi-task special cases."""
    report = reduce_check(trials, seed, with_gradcheck=gradcheck)
    click.echo(
        f"da: loss {report.da_loss_deviation:.3e} grad {report.da_grad_deviation:.3e} | "
        f"mt: loss {report.mt_loss_deviation:.3e} grad {report.mt_grad_deviation:.3e}"
    )
    click.echo(f"max deviation {report.max_deviation:.3e} (tolerance {report.tolerance:.0e})")
    grad_ok = True
    for name, err in sorted(report.gradcheck.items()):
        grad_ok &= err <= 1e-5
        click.echo(f"gradcheck {name}: {err:.3e}")
    passed = report.passed and grad_ok
    click.echo("PASS" if passed else "FAIL")
    if not passed:
        sys.exit(1)


@cli.command("compare")
@click.argument("config", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--objectives", default=",".join(k.value for k in ObjectiveKind), show_default=True)
@click.option("--seeds", default="0,1,2", show_default=True)
@click.option("--per-class", "per_class", default=None, help="Subsample sizes, e.g. 25,50,100,250.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="CSV file receiving the summary table.")
@_guarded
def compare_cmd(config: Path, objectives: str, seeds: str, per_class: Optional[str], out: Optional[Path]) -> None:
    """Mean accuracy of several objectives over seeds (and subsample sizes)."""
    cfg = load_train_config(config)
    cells = compare(
        cfg,
        _csv_list(ObjectiveKind, objectives, "objectives"),
        _csv_list(int, seeds, "seeds"),
        per_class=_csv_list(int, per_class, "per-class sizes"),
    )
    for cell in cells:
        n = "all" if cell.per_class is None else cell.per_class
        click.echo(f"n={n} {cell.objective.value}+{cell.mode}: {cell.mean:.4f} ({len(cell.accuracies)} seeds)")
    if out is not None:
        append_table_rows(out, COMPARE_HEADER, [c.as_row() for c in cells])


def main() -> None:   # console-script entry point
    cli()
