import json
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from ffdin import evaluation
from ffdin.evaluation import (
    ExperimentConfig,
    FoldPlan,
    LeakageError,
    audit_plan,
    audit_split,
    make_folds,
    run_experiment,
    run_length_sweep,
    run_main_experiment,
    run_outcome_split,
    sample_segments,
    segment_all,
    sweep_table,
)
from ffdin.features import COLUMNS, DeceptionRankFeaturizer, unit_index
from ffdin.learn import auroc
from ffdin.netcore import Outcome
from ffdin.synthetic import BehaviorConfig, generate_synthetic_dataset, generate_synthetic_game

FAST = ExperimentConfig(bootstrap=200, epochs=200)


@pytest.fixture(scope="module")
def small():
    return generate_synthetic_dataset(n_games=10, seed=5, preset="strong", length=600)


@pytest.fixture(scope="module")
def full_strong():
    return generate_synthetic_dataset(n_games=26, seed=1, preset="strong", length=2300)


# -- segmentation -----------------------------------------------------------


def test_segment_all_drops_remainder():
    game = generate_synthetic_game(BehaviorConfig(length=150), 0)
    units = segment_all([game], 60)
    assert len(units) == 2
    assert [u.offset for u in units] == [0, 60]


def test_segment_all_counts(small):
    assert len(segment_all(small, 60)) == sum(g.length // 60 for g in small)


def test_segment_longer_than_every_game_warns(small):
    with pytest.warns(UserWarning):
        assert segment_all(small, 10_000) == []
    with pytest.raises(ValueError):
        segment_all(small, 0)


def test_sample_segments_counts_and_seed(small):
    a = sample_segments(small, 60, 100, seed=3)
    b = sample_segments(small, 60, 100, seed=3)
    assert len(a) == 100 * len(small)
    assert [u.game_id for u in a] == [u.game_id for u in b]
    assert len({u.game_id for u in a}) == len(a)
    assert all(u.length == 60 and u.offset + 60 <= g.length
               for g in small for u in a if u.base_game == g.game_id)


def test_sample_segments_skips_short_games(small):
    with pytest.warns(UserWarning):
        units = sample_segments(small, max(g.length for g in small), 2, seed=0)
    assert len(units) == 2 * sum(g.length == max(x.length for x in small) for g in small)


def test_sample_offsets_are_uniform():
    game = generate_synthetic_game(BehaviorConfig(n_participants=4, n_deceivers=1, length=100), 0)
    offsets = [u.offset for u in sample_segments([game], 51, 20_000, seed=1)]
    counts = np.bincount(offsets, minlength=50)
    assert counts.size == 50
    assert stats.chisquare(counts).pvalue > 0.001


# -- folds ------------------------------------------------------------------


def test_fold_sizes_for_26_games():
    games = generate_synthetic_dataset(n_games=26, seed=0, preset="null", length=100)
    plan = make_folds(games, k=5, seed=0)
    assert sorted(plan.fold_sizes(), reverse=True) == [6, 5, 5, 5, 5]
    assert plan == make_folds(games, k=5, seed=0)


def test_folds_are_disjoint_and_sized(small):
    plan = make_folds(small, k=5, train_frac=0.6, seed=2)
    total = sum(g.n for g in small)
    people = {f"{g.game_id}#{u}" for g in small for u in range(g.n)}
    for i in range(plan.k):
        train, test = plan.train_participants[i], plan.test_participants[i]
        for p in train:
            assert p not in test
        assert train | test <= people
        test_games = set(plan.fold_games(i))
        assert test == {f"{g.game_id}#{u}" for g in small if g.game_id in test_games for u in range(g.n)}
        assert not {p.split("#")[0] for p in train} & test_games
        available = total - len(test)
        assert len(train) >= min(0.6 * total, available)


def test_fold_errors(small):
    with pytest.raises(ValueError):
        make_folds(small[:3], k=5)
    with pytest.raises(ValueError, match="could not place"):
        make_folds(small, k=5, train_frac=0.0, max_retries=3)
    with pytest.raises(ValueError, match="duplicate"):
        make_folds(small + small[:1], k=5)


def test_audits_catch_leakage():
    plan = FoldPlan(2, 0, {"a": 0, "b": 1}, (frozenset({"a#0", "b#1"}), frozenset({"a#1"})),
                    (frozenset({"a#0"}), frozenset({"b#0"})))
    with pytest.raises(LeakageError):
        audit_plan(plan)
    games_only = FoldPlan(1, 0, {"a": 0}, (frozenset({"a#0"}),), (frozenset({"a#1"}),))
    with pytest.raises(LeakageError, match="games"):
        audit_plan(games_only)
    people = np.array(["a#0", "a#1", "b#0"], dtype=object)
    games = np.array(["a", "a", "b"], dtype=object)
    with pytest.raises(LeakageError):
        audit_split(people, games, np.array([1, 0, 0], bool), np.array([0, 1, 1], bool))
    audit_split(people, games, np.array([1, 1, 0], bool), np.array([0, 0, 1], bool))


# -- featurizer -------------------------------------------------------------


def test_featurizer_rows_align_with_index(small):
    units = segment_all(small[:2], 60)
    X = DeceptionRankFeaturizer().fit(small[:2]).transform(units)
    labels, games, people, ids = unit_index(units)
    assert X.shape == (len(labels), len(COLUMNS))
    assert len(set(ids)) == len(ids)
    assert set(games) == {g.game_id for g in small[:2]}


def test_featurizer_game_scope(small):
    units = segment_all(small[:1], 120)
    f = DeceptionRankFeaturizer(prior_scope="game").fit(small[:1])
    X = f.transform(units)
    assert np.all(np.isfinite(X))
    with pytest.raises(ValueError):
        DeceptionRankFeaturizer(prior_scope="game").fit(small[:1]).transform(segment_all(small[1:2], 60))
    with pytest.raises(ValueError):
        DeceptionRankFeaturizer(prior_scope="bogus").fit(small)
    assert list(f.get_feature_names_out()) == list(COLUMNS)


# -- experiments ------------------------------------------------------------


def test_experiment_report_is_consistent(small):
    report = run_main_experiment(small, FAST)
    assert all(0.0 <= a <= 1.0 for a in report.fold_auroc)
    assert report.mean_auroc == pytest.approx(np.mean(report.fold_auroc), abs=1e-15)
    assert report.ci_low <= report.mean_auroc <= report.ci_high
    assert report.leakage_checked
    assert report.n_examples == len(report.predictions)
    assert sum(report.fold_sizes) == len(small)
    for i in range(5):
        rows = [p for p in report.predictions if p["fold"] == i]
        assert auroc([p["prob"] for p in rows], [p["label"] for p in rows]) == report.fold_auroc[i]
    assert report.label == "main-60s"
    assert "AUROC" in report.summary()


def test_experiment_is_reproducible(small):
    a = run_experiment(small, FAST).to_dict()
    b = run_experiment(small, FAST).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert "wall_clock" not in a
    c = run_experiment(small, replace(FAST, seed=1)).to_dict()
    assert c != a


def test_grid_selection_uses_training_rows_only(small, monkeypatch):
    seen = []
    original = evaluation._select

    def spy(candidates, labels, games, people, train_mask, cfg, seed):
        seen.append(set(games[train_mask]))
        return original(candidates, labels, games, people, train_mask, cfg, seed)

    monkeypatch.setattr(evaluation, "_select", spy)
    report = run_experiment(small[:6], replace(FAST, grid=True, folds=3, bootstrap=100))
    assert len(report.selected) == 3
    for i, train_games in enumerate(seen):
        test_games = {p["unit"].split("@")[0] for p in report.predictions if p["fold"] == i}
        assert test_games and not train_games & test_games


def test_length_sweep(small):
    reports = run_length_sweep(small, [60, 120], per_game=20, cfg=FAST)
    assert [r.config["segment_len"] for r in reports] == [60, 120]
    table = sweep_table(reports)
    assert table == sweep_table(run_length_sweep(small, [60, 120], per_game=20, cfg=FAST))
    assert all(r.n_units == 20 * len(small) for r in reports)
    with pytest.warns(UserWarning):
        skipped = run_length_sweep(small, [60, 10_000], per_game=5, cfg=FAST)
    assert len(skipped) == 1


def test_sweep_is_stable_on_strong_data(full_strong):
    a, b = run_length_sweep(full_strong, [60, 840], per_game=100, cfg=FAST)
    assert abs(a.mean_auroc - b.mean_auroc) < 0.1


def test_outcome_split_favors_dl_when_only_dl_differs():
    games = generate_synthetic_dataset(n_games=26, seed=2, preset="dl-only", length=1200)
    dl, dw = run_outcome_split(games, FAST)
    assert dl.label.startswith("DL") and dw.label.startswith("DW")
    assert dl.mean_auroc > dw.mean_auroc
    assert dl.n_games == 12 and dw.n_games == 14


def test_outcome_split_symmetric(full_strong):
    dl, dw = run_outcome_split(full_strong, FAST)
    assert abs(dl.mean_auroc - dw.mean_auroc) < 0.05


def test_outcome_split_guards(small):
    dw_only = [g for g in small if g.outcome is Outcome.DW]
    with pytest.raises(ValueError):
        run_outcome_split(dw_only, FAST)
    few = [g for g in small if g.outcome is Outcome.DW][:3] + \
          [g for g in small if g.outcome is Outcome.DL][:3]
    with pytest.warns(UserWarning, match="reducing folds"):
        dl, dw = run_outcome_split(few, FAST)
    assert len(dl.fold_auroc) == 3
