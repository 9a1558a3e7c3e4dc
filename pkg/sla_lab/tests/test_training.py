"""Run configuration, the training loop and evaluation."""

import json
from pathlib import Path

import numpy as np
import pytest

from sla_lab.domain.errors import ConfigError, ContractViolation, DimensionError, ModeError
from sla_lab.domain.model import InferenceMode, ObjectiveKind
from sla_lab.domain.tensor import learning_rate_at, no_grad
from sla_lab.infrastructure.checkpoint import NpzCheckpointStore
from sla_lab.infrastructure.memlog import stage
from sla_lab.services.objectives import aggregate_logits_truncated, single_logits
from sla_lab.services.training import (
    MinibatchStream,
    TrainingService,
    accuracy,
    evaluate,
    load_named,
    load_train_config,
    parse_train_config,
    run_training,
)

from .stubs import MemoryCheckpointStore, RecordingSink

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def _smoke(**overrides) -> dict:
    raw = {
        "dataset": {"name": "synthetic", "synthetic": {"dim": 4, "train_count": 64, "test_count": 32}},
        "backbone": {"kind": "linear", "embed_dim": 4},
        "transforms": {"kind": "rotation", "rotations": [0, 180]},
        "objective": {"kind": "sla"},
        "optimizer": {"learning_rate": 0.01},
        "total_iterations": 40,
        "batch_size": 16,
        "eval_every": 10,
    }
    raw.update(overrides)
    return raw


class TestConfig:
    """Strict, versioned run documents."""

    def test_defaults_describe_the_mnist_setup(self):
        cfg = parse_train_config({})
        assert cfg.transform_set().size == 4
        assert cfg.objective.kind == ObjectiveKind.SLA
        assert cfg.optimizer.decay_milestones == [0.5, 0.75]

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="learning_rat"):
            parse_train_config({"optimizer": {"learning_rat": 0.1}})

    def test_schema_version(self):
        with pytest.raises(ConfigError, match="schema_version"):
            parse_train_config({"schema_version": 2})

    def test_self_distillation_needs_two_transforms(self):
        with pytest.raises(ConfigError, match="at least two"):
            parse_train_config({"objective": {"kind": "sla_sd"}, "transforms": {"kind": "identity"}})

    def test_baseline_is_untransformed(self):
        with pytest.raises(ConfigError, match="identity"):
            parse_train_config({"objective": {"kind": "baseline"}})

    def test_product_set_size(self):
        cfg = parse_train_config({"transforms": {"kind": "product", "permutations": ["RGB", "GBR", "BRG"]}})
        assert cfg.transform_set().size == 12

    def test_top_level_must_be_mapping(self):
        with pytest.raises(ConfigError, match="mapping"):
            parse_train_config([1, 2])

    def test_shipped_configs_load(self):
        for path in sorted(CONFIGS.glob("*.yaml")):
            assert load_train_config(path).schema_version == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_train_config(tmp_path / "absent.yaml")

    def test_bad_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("objective: [unclosed\n")
        with pytest.raises(ConfigError):
            load_train_config(path)

    def test_with_seed(self):
        cfg = parse_train_config(_smoke())
        assert cfg.with_seed(7).seed == 7
        assert cfg.seed == 0


class TestMinibatchStream:
    """Seeded epoch permutations."""

    def test_epoch_covers_every_index(self):
        stream = MinibatchStream(10, 5, np.random.default_rng(0))
        first = np.concatenate([stream.next(), stream.next()])
        np.testing.assert_array_equal(np.sort(first), np.arange(10))

    def test_batches_cross_epoch_boundary(self):
        stream = MinibatchStream(7, 5, np.random.default_rng(0))
        assert stream.next().size == 5
        assert stream.next().size == 5

    def test_batch_larger_than_dataset(self):
        out = MinibatchStream(3, 8, np.random.default_rng(0)).next()
        assert out.size == 8
        assert set(out.tolist()) == {0, 1, 2}

    def test_same_seed_same_sequence(self):
        a = MinibatchStream(20, 6, np.random.default_rng(4))
        b = MinibatchStream(20, 6, np.random.default_rng(4))
        for _ in range(5):
            np.testing.assert_array_equal(a.next(), b.next())

    def test_empty_dataset(self):
        with pytest.raises(ContractViolation):
            MinibatchStream(0, 4, np.random.default_rng(0))


class TestTrainingRun:
    """End-to-end runs on generated data."""

    def test_metrics_rows(self):
        sink = RecordingSink()
        service = TrainingService(checkpoint_store=MemoryCheckpointStore(), sink_factory=lambda _: sink)
        result = service.run(parse_train_config(_smoke()), out_dir=None)
        assert [r.iteration for r in result.metrics] == [10, 20, 30, 40]
        assert set(result.final.accuracies) == {"si", "ag"}
        assert sink.rows == []

    def test_final_step_always_reported(self):
        result = run_training(parse_train_config(_smoke(total_iterations=25)))
        assert [r.iteration for r in result.metrics] == [10, 20, 25]

    def test_learning_rate_schedule(self):
        result = run_training(parse_train_config(_smoke()))
        assert [r.learning_rate for r in result.metrics] == pytest.approx([0.01, 0.01, 0.001, 0.0001])

    def test_rate_column_is_the_rate_of_the_last_step(self):
        cfg = parse_train_config(_smoke(total_iterations=8, eval_every=1))
        rows = run_training(cfg).metrics
        assert [r.learning_rate for r in rows] == pytest.approx([0.01] * 4 + [0.001] * 2 + [0.0001] * 2)
        for r in rows:
            assert r.learning_rate == learning_rate_at(cfg.optimizer, r.iteration - 1, 8)

    def test_sinks_receive_rows_and_close(self, tmp_path):
        sink = RecordingSink()
        store = MemoryCheckpointStore()
        service = TrainingService(checkpoint_store=store, sink_factory=lambda _: sink)
        result = service.run(parse_train_config(_smoke()), out_dir=tmp_path / "run")
        assert len(sink.rows) == 4 and sink.closed
        assert store.load(result.checkpoint) is result.model
        assert json.loads((tmp_path / "run" / "config.json").read_text())["objective"]["kind"] == "sla"

    @pytest.mark.parametrize("kind", ["da", "mt", "sla", "sla_sd"])
    def test_every_objective_trains(self, kind):
        result = run_training(parse_train_config(_smoke(objective={"kind": kind})))
        assert np.isfinite(result.final.loss_total)
        assert all(0.0 <= a <= 1.0 for a in result.final.accuracies.values())

    @pytest.mark.parametrize("kind", ["baseline", "sla"])
    def test_untransformed_training_separates_the_clouds(self, kind):
        raw = _smoke(objective={"kind": kind}, transforms={"kind": "identity"}, total_iterations=200, eval_every=200)
        result = run_training(parse_train_config(raw))
        assert result.final.accuracies["si"] >= 0.9

    def test_baseline(self):
        raw = _smoke(objective={"kind": "baseline"}, transforms={"kind": "identity"}, total_iterations=100)
        result = run_training(parse_train_config(raw))
        assert set(result.final.accuracies) == {"si"}
        assert result.final.loss_ss is None

    def test_sd_reports_all_modes_and_components(self):
        result = run_training(parse_train_config(_smoke(objective={"kind": "sla_sd", "beta": 1})))
        final = result.final
        assert set(final.accuracies) == {"si", "ag", "sd"}
        assert final.loss_kl is not None and final.loss_ce_u is not None

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = parse_train_config(_smoke())
        run_training(cfg, out_dir=tmp_path / "a")
        run_training(cfg, out_dir=tmp_path / "b")
        for name in ("metrics.csv", "model.npz", "config.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_metrics_csv_header(self, tmp_path):
        run_training(parse_train_config(_smoke()), out_dir=tmp_path)
        lines = (tmp_path / "metrics.csv").read_text().splitlines()
        assert lines[0].split(",")[:3] == ["iteration", "lr", "loss_total"]
        assert len(lines) == 5

    def test_checkpoint_reproduces_accuracy(self, tmp_path):
        cfg = parse_train_config(_smoke())
        result = run_training(cfg, out_dir=tmp_path)
        loaded = NpzCheckpointStore().load(result.checkpoint)
        again = evaluate(loaded, result.test, result.tset, [InferenceMode.SI, InferenceMode.AG])
        assert {m.value: a for m, a in again.items()} == result.final.accuracies

    def test_rotation_needs_square_images(self):
        raw = _smoke(dataset={"name": "synthetic", "synthetic": {"dim": 5, "train_count": 8, "test_count": 4}})
        with pytest.raises(DimensionError, match="square"):
            run_training(parse_train_config(raw))

    def test_seed_changes_the_run(self):
        a = run_training(parse_train_config(_smoke(seed=0)))
        b = run_training(parse_train_config(_smoke(seed=1)))
        assert a.final.loss_total != b.final.loss_total

    @pytest.mark.slow
    def test_fake_mnist_run(self, fake_mnist_dir):
        raw = {
            "dataset": {"name": "mnist", "classes": [6, 9]},
            "backbone": {"kind": "mlp", "hidden_sizes": [16]},
            "objective": {"kind": "sla_sd"},
            "total_iterations": 60,
            "batch_size": 8,
            "eval_every": 30,
        }
        result = run_training(parse_train_config(raw))
        assert result.model.n_classes == 2 and result.model.n_transforms == 4
        assert 0.0 <= result.final.accuracies["ag"] <= 1.0


class TestEvaluate:
    """Mode support and forward-pass accounting."""

    def test_unsupported_mode(self, make_model, fake_mnist_dir):
        _, test = load_named(parse_train_config({}).dataset, fake_mnist_dir)
        model = make_model(n=10, heads=("u",), shape=(6, 6, 1))
        with pytest.raises(ModeError, match="ag"):
            evaluate(model, test, None, [InferenceMode.AG])

    def test_sd_is_one_forward_per_image(self, make_model, fake_mnist_dir):
        _, test = load_named(parse_train_config({}).dataset, fake_mnist_dir)
        model = make_model(n=10, heads=("w", "u"), shape=(6, 6, 1))
        before = model.forward_count
        evaluate(model, test, None, [InferenceMode.SD], chunk=7)
        assert model.forward_count - before == len(test)

    def test_aggregation_costs_m_forwards(self, make_model, fake_mnist_dir):
        train, _ = load_named(parse_train_config({}).dataset, fake_mnist_dir)
        cfg = parse_train_config({})
        model = make_model(n=10, m=4, heads=("w",), shape=(6, 6, 1))
        before = model.forward_count
        evaluate(model, train, cfg.transform_set(), [InferenceMode.AG])
        assert model.forward_count - before == 4 * len(train)


class TestAccuracy:
    def test_perfect_memorizer(self):
        labels = np.array([2, 0, 1, 1])
        assert accuracy(np.eye(3)[labels], labels) == 1.0

    def test_uniform_random_predictor(self):
        rng = np.random.default_rng(0)
        labels = np.repeat([0, 1], 2000)
        acc = accuracy(rng.standard_normal((4000, 2)), labels)
        assert abs(acc - 0.5) <= 3 * np.sqrt(0.25 / 4000)

    def test_ties_go_to_lowest_class(self):
        assert accuracy(np.zeros((2, 3)), np.array([0, 0])) == 1.0

    def test_truncated_aggregation_reproduces_single(self):
        result = run_training(parse_train_config(_smoke()))
        with no_grad():
            si = single_logits(result.model, np.asarray(result.test.images)).data
            ag1 = aggregate_logits_truncated(result.model, np.asarray(result.test.images), result.tset, 1).data
        np.testing.assert_array_equal(si, ag1)


class TestStageLog:
    def test_counts_forwards_through_model(self, make_model, rng):
        model = make_model()
        with stage("embed", model) as stats:
            model.embed(rng.uniform(size=(4, 3, 3, 1)))
        assert stats.forwards == 4
        assert stats.seconds >= 0.0

    def test_without_model(self):
        with stage("idle") as stats:
            pass
        assert stats.forwards is None
