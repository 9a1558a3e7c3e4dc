"""Experiment drivers: toy study, ensembles, identity checks and comparisons."""

import pytest

from sla_lab.domain.errors import ConfigError, ConsistencyError, ContractViolation, ModeError
from sla_lab.domain.model import BackboneKind, ObjectiveKind
from sla_lab.services.compare import COMPARE_HEADER, compare, objective_config
from sla_lab.services.ensemble import run_ensemble, seeded_configs
from sla_lab.services.reduction import reduce_check
from sla_lab.services.toy import (
    PAIRS,
    TOY_HEADER,
    ToyMode,
    ToyResult,
    parse_pair,
    toy_config,
    toy_experiment,
    toy_sweep,
)
from sla_lab.services.training import load_named, parse_train_config

from .test_training import _smoke


@pytest.fixture
def digits(fake_mnist_dir):
    return load_named(parse_train_config({}).dataset, fake_mnist_dir)


class TestToy:
    """Bias-free linear classifiers on two digits."""

    def test_pairs(self):
        assert PAIRS == ((1, 9), (4, 9), (6, 9))
        assert parse_pair("6,9") == (6, 9)

    @pytest.mark.parametrize("text", ["6", "6,6", "6,10", "a,b"])
    def test_bad_pair(self, text):
        with pytest.raises(ConfigError):
            parse_pair(text)

    def test_configs(self):
        up = toy_config(ToyMode.UPRIGHT, 100, 0)
        rot = toy_config(ToyMode.ROTATED_SLA, 100, 0)
        assert up.backbone.kind == BackboneKind.IDENTITY
        assert up.transform_set().size == 1 and rot.transform_set().size == 4
        assert rot.objective.kind == ObjectiveKind.SLA
        assert toy_config(ToyMode.ROTATED_SHARED_LABEL, 100, 0).objective.kind == ObjectiveKind.DA

    @pytest.mark.slow
    @pytest.mark.parametrize("mode", list(ToyMode))
    def test_every_mode(self, digits, mode):
        train, test = digits
        result = toy_experiment((6, 9), mode, train, test, iterations=30, seed=0)
        assert 0.0 <= result.test_error <= 1.0
        assert (result.joint_error is not None) == (mode == ToyMode.ROTATED_SLA)
        row = result.as_row()
        assert row[:2] == ["6,9", mode.value]

    @pytest.mark.parametrize(
        "mode, scored_on",
        [(ToyMode.UPRIGHT, "upright"), (ToyMode.ROTATED_SHARED_LABEL, "rotated"), (ToyMode.ROTATED_SLA, "upright")],
    )
    def test_rows_name_the_scoring_set(self, mode, scored_on):
        result = ToyResult(pair=(6, 9), mode=mode, test_error=0.1, train_error=0.0)
        assert result.scored_on == scored_on
        assert result.as_row()[TOY_HEADER.index("scored_on")] == scored_on
        assert len(result.as_row()) == len(TOY_HEADER)

    @pytest.mark.slow
    def test_sweep_reports_each_run(self, digits):
        train, test = digits
        seen = []
        results = toy_sweep(
            train, test, pairs=[(1, 9), (6, 9)], modes=iter([ToyMode.UPRIGHT, ToyMode.ROTATED_SLA]),
            iterations=5, on_result=seen.append,
        )
        assert seen == results
        assert [(r.pair, r.mode) for r in results] == [
            ((1, 9), ToyMode.UPRIGHT),
            ((1, 9), ToyMode.ROTATED_SLA),
            ((6, 9), ToyMode.UPRIGHT),
            ((6, 9), ToyMode.ROTATED_SLA),
        ]

    @pytest.mark.slow
    def test_upright_pair_is_learnable(self, digits):
        train, test = digits
        result = toy_experiment((1, 9), ToyMode.UPRIGHT, train, test, iterations=200, seed=0)
        assert result.test_error <= 0.1


class TestEnsemble:
    """Seed-only ensembles of identical configs."""

    def test_seeded_configs(self):
        cfgs = seeded_configs(parse_train_config(_smoke(seed=5)), 3)
        assert [c.seed for c in cfgs] == [5, 6, 7]

    def test_zero_members(self):
        with pytest.raises(ContractViolation):
            seeded_configs(parse_train_config(_smoke()), 0)

    def test_single_member_is_the_member(self):
        result = run_ensemble(seeded_configs(parse_train_config(_smoke()), 1))
        assert result.ensemble_accuracy == result.member_accuracies[0]

    def test_identical_members(self):
        cfg = parse_train_config(_smoke())
        result = run_ensemble([cfg, cfg], workers=2)
        assert result.member_accuracies[0] == result.member_accuracies[1] == result.ensemble_accuracy

    def test_aggregated_ensemble(self, tmp_path):
        result = run_ensemble(seeded_configs(parse_train_config(_smoke()), 2), aggregate=True, out_dir=tmp_path)
        assert result.ensemble_ag_accuracy is not None
        assert len(result.member_ag_accuracies) == 2
        assert (tmp_path / "member-1" / "model.npz").exists()

    def test_members_must_match(self):
        a = parse_train_config(_smoke())
        b = parse_train_config(_smoke(batch_size=8))
        with pytest.raises(ConsistencyError):
            run_ensemble([a, b])

    def test_aggregate_needs_joint_head(self):
        cfg = parse_train_config(_smoke(objective={"kind": "da"}))
        with pytest.raises(ModeError):
            run_ensemble([cfg], aggregate=True)


class TestReduceCheck:
    def test_default_run_passes(self):
        report = reduce_check()
        assert report.passed
        assert report.trials == 20

    def test_gradcheck_covers_every_objective(self):
        report = reduce_check(trials=2, seed=1, with_gradcheck=True)
        assert set(report.gradcheck) == {"baseline", "da", "mt", "sla", "sla_sd"}
        assert max(report.gradcheck.values()) <= 1e-5


class TestCompare:
    """Mean accuracy per objective and inference mode."""

    def test_baseline_drops_transforms(self):
        cfg = objective_config(parse_train_config(_smoke()), ObjectiveKind.BASELINE, 3)
        assert cfg.transform_set().size == 1 and cfg.seed == 3

    def test_cells(self):
        base = parse_train_config(_smoke(total_iterations=10))
        cells = compare(base, [ObjectiveKind.BASELINE, ObjectiveKind.SLA_SD], [0, 1])
        keys = {(c.objective, c.mode) for c in cells}
        assert keys == {
            (ObjectiveKind.BASELINE, "si"),
            (ObjectiveKind.SLA_SD, "si"),
            (ObjectiveKind.SLA_SD, "ag"),
            (ObjectiveKind.SLA_SD, "sd"),
        }
        assert all(len(c.accuracies) == 2 for c in cells)
        assert len(cells[0].as_row()) == len(COMPARE_HEADER)

    def test_subsample_sizes(self, digits):
        base = parse_train_config(
            {
                "backbone": {"kind": "linear", "embed_dim": 8},
                "objective": {"kind": "sla"},
                "total_iterations": 5,
                "batch_size": 8,
                "eval_every": 5,
            }
        )
        cells = compare(base, [ObjectiveKind.SLA], [0], per_class=[2, 5], datasets=digits)
        assert sorted({c.per_class for c in cells}) == [2, 5]
