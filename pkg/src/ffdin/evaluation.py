"""Cross-validated evaluation on segmented games.

Games are cut into clips, every (clip, participant) pair becomes one example,
and folds are drawn at game level so no person or game is ever on both sides
of a split.
"""
from __future__ import annotations

import itertools
import time
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .features import DeceptionRankFeaturizer, unit_index
from .learn import LogisticRegressionGD, auroc, bootstrap_ci
from .netcore import Layer, Outcome, slice_game


class LeakageError(RuntimeError):
    """A participant or game appeared on both sides of a split."""


def segment_all(games, segment_len: int):
    """Consecutive non-overlapping clips; a trailing remainder is dropped."""
    if segment_len < 1:
        raise ValueError("segment length must be at least one second")
    units = []
    for game in games:
        for k in range(game.length // segment_len):
            units.append(slice_game(game, k * segment_len, segment_len))
    if games and not units:
        warnings.warn(f"no game is at least {segment_len}s long; no segments produced")
    return units


def sample_segments(games, segment_len: int, per_game: int, seed: int):
    """``per_game`` clips per game at uniformly random offsets (with replacement)."""
    rng = np.random.default_rng(seed)
    units = []
    for game in games:
        if segment_len > game.length:
            warnings.warn(f"game {game.game_id} is shorter than {segment_len}s; skipped")
            continue
        starts = rng.integers(0, game.length - segment_len + 1, size=per_game)
        for k, start in enumerate(starts):
            seg = slice_game(game, int(start), segment_len)
            units.append(replace(seg, game_id=f"{seg.game_id}#{k}"))
    return units


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignment: dict  # game id -> fold index
    train_participants: tuple  # one frozenset of "<game>#<index>" keys per fold
    test_participants: tuple

    def fold_games(self, i):
        return sorted(g for g, f in self.assignment.items() if f == i)

    def fold_sizes(self):
        return [len(self.fold_games(i)) for i in range(self.k)]


def _people(game):
    return [f"{game.base_game}#{u}" for u in range(game.n)]


def make_folds(games, k=5, train_frac=0.6, seed=0, max_retries=100) -> FoldPlan:
    """Assign games to ``k`` folds and draw each round's training participants.

    In round ``i`` the test side is every participant of fold ``i``'s games.
    The training side takes whole games from the other folds, in seeded
    random order, until it holds ``train_frac`` of all participants (or the
    other folds run out). Both sides must contain each role; the draw is
    repeated up to ``max_retries`` times otherwise.
    """
    games = list(games)
    if len(games) < k:
        raise ValueError(f"{len(games)} games cannot fill {k} folds")
    by_id = {g.base_game: g for g in games}
    if len(by_id) != len(games):
        raise ValueError("duplicate game ids")
    ids = sorted(by_id)
    total = sum(g.n for g in games)
    target = train_frac * total
    rng = np.random.default_rng(seed)

    def has_both(keys):
        roles = {by_id[key.split("#")[0]].labels[int(key.split("#")[1])] for key in keys}
        return roles == {0, 1}

    for _ in range(max_retries):
        order = rng.permutation(len(ids))
        assignment = {}
        for fold, chunk in enumerate(np.array_split(order, k)):
            for j in chunk:
                assignment[ids[j]] = fold
        train, test = [], []
        for fold in range(k):
            test_ids = [g for g in ids if assignment[g] == fold]
            others = [g for g in ids if assignment[g] != fold]
            chosen, count = [], 0
            for j in rng.permutation(len(others)):
                if count >= target:
                    break
                chosen.append(others[j])
                count += by_id[others[j]].n
            train.append(frozenset(p for g in chosen for p in _people(by_id[g])))
            test.append(frozenset(p for g in test_ids for p in _people(by_id[g])))
        if all(has_both(s) for s in train + test):
            plan = FoldPlan(k, seed, assignment, tuple(train), tuple(test))
            audit_plan(plan)
            return plan
    raise ValueError(
        f"could not place both roles on both sides of every split after {max_retries} draws "
        f"({len(games)} games, k={k}, train_frac={train_frac})"
    )


def audit_plan(plan: FoldPlan):
    """Raise :class:`LeakageError` if any round shares a participant or game."""
    for i, (train, test) in enumerate(zip(plan.train_participants, plan.test_participants)):
        shared = train & test
        if shared:
            raise LeakageError(f"fold {i}: participants on both sides: {sorted(shared)[:5]}")
        shared_games = {p.split("#")[0] for p in train} & {p.split("#")[0] for p in test}
        if shared_games:
            raise LeakageError(f"fold {i}: games on both sides: {sorted(shared_games)}")


def audit_split(people, games, train_mask, test_mask, fold=None):
    """Check the actual example rows used for one round."""
    for name, keys in (("participants", people), ("games", games)):
        shared = set(keys[train_mask]) & set(keys[test_mask])
        if shared:
            raise LeakageError(f"fold {fold}: {name} on both sides: {sorted(shared)[:5]}")


@dataclass(frozen=True)
class ExperimentConfig:
    segment_len: int = 60
    folds: int = 5
    train_frac: float = 0.6
    seed: int = 0
    bootstrap: int = 1000
    per_game: int | None = None  # sample random clips instead of tiling
    beta: float = 0.85
    tau: float = 1e-6
    max_iter: int = 100
    layer: str = "look_at"
    edge_direction: str = "incoming"
    prior_scope: str = "segment"
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-4
    grid: bool = False

    def featurizer(self, **overrides):
        params = dict(beta=self.beta, tau=self.tau, max_iter=self.max_iter, layer=self.layer,
                      edge_direction=self.edge_direction, prior_scope=self.prior_scope)
        params.update(overrides)
        return DeceptionRankFeaturizer(**params)

    def classifier(self, **overrides):
        params = dict(learning_rate=self.learning_rate, epochs=self.epochs, l2=self.l2,
                      seed=self.seed)
        params.update(overrides)
        return LogisticRegressionGD(**params)


# searched on training folds only when ExperimentConfig.grid is set
GRID = {
    "beta": (0.5, 0.85, 0.95),
    "layer": tuple(l.value for l in Layer),
    "l2": (1e-4, 1e-2),
}


@dataclass
class ExperimentReport:
    label: str
    config: dict
    fold_auroc: list
    mean_auroc: float
    ci_low: float
    ci_high: float
    fold_participant_auroc: list
    mean_participant_auroc: float
    n_games: int
    n_units: int
    n_examples: int
    fold_sizes: list
    leakage_checked: bool
    selected: list = field(default_factory=list)
    predictions: list = field(default_factory=list)
    wall_clock: float = 0.0

    def to_dict(self, include_timing=False, include_predictions=True):
        d = asdict(self)
        if not include_timing:
            d.pop("wall_clock")
        if not include_predictions:
            d.pop("predictions")
        return d

    def summary(self) -> str:
        lines = [
            f"[{self.label}] AUROC {self.mean_auroc:.3f} "
            f"(95% bootstrap CI {self.ci_low:.3f}-{self.ci_high:.3f})",
            f"  folds: " + ", ".join(f"{a:.3f}" for a in self.fold_auroc),
            f"  participant-averaged AUROC {self.mean_participant_auroc:.3f}",
            f"  {self.n_games} games, {self.n_units} clips, {self.n_examples} examples, "
            f"games per fold {self.fold_sizes}, leakage audit "
            + ("passed" if self.leakage_checked else "NOT RUN"),
        ]
        for i, sel in enumerate(self.selected):
            lines.append(f"  fold {i} selected {sel}")
        return "\n".join(lines)


def _seeds(seed, count):
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(count)]


def _participant_auroc(people, labels, probs):
    keys = sorted(set(people))
    pos = {k: i for i, k in enumerate(keys)}
    idx = np.array([pos[p] for p in people])
    mean_prob = np.bincount(idx, weights=probs) / np.bincount(idx)
    lab = np.zeros(len(keys), dtype=np.int64)
    lab[idx] = labels
    return auroc(mean_prob, lab)


def _select(candidates, labels, games, people, train_mask, cfg, seed):
    """Pick the candidate with the best inner game-level CV AUROC on training rows."""
    train_games = sorted(set(games[train_mask]))
    inner_k = min(3, len(train_games))
    rng = np.random.default_rng(seed)
    inner = {g: i % inner_k for i, g in enumerate(rng.permutation(train_games))}
    inner_fold = np.array([inner.get(g, -1) for g in games])
    best, best_score = None, -np.inf
    for key, (X, l2) in candidates.items():
        scores = []
        for j in range(inner_k):
            fit_mask = train_mask & (inner_fold != j)
            val_mask = train_mask & (inner_fold == j)
            if len(set(labels[fit_mask])) < 2 or len(set(labels[val_mask])) < 2:
                continue
            model = cfg.classifier(l2=l2).fit(X[fit_mask], labels[fit_mask])
            scores.append(auroc(model.predict_proba(X[val_mask])[:, 1], labels[val_mask]))
        score = float(np.mean(scores)) if scores else -np.inf
        if score > best_score:
            best, best_score = key, score
    return best


def run_experiment(games, cfg: ExperimentConfig = ExperimentConfig(), label="main",
                   units=None) -> ExperimentReport:
    """Featurize, split, train and score one configuration."""
    started = time.perf_counter()
    games = list(games)
    fold_seed, boot_seed, sample_seed, grid_seed = _seeds(cfg.seed, 4)
    if units is None:
        if cfg.per_game:
            units = sample_segments(games, cfg.segment_len, cfg.per_game, sample_seed)
        else:
            units = segment_all(games, cfg.segment_len)
    if not units:
        raise ValueError("no evaluation units")
    labels, unit_games, people, ids = unit_index(units)

    if cfg.grid:
        feats = {}
        for beta, layer in itertools.product(GRID["beta"], GRID["layer"]):
            feats[(beta, layer)] = cfg.featurizer(beta=beta, layer=layer).fit(games).transform(units)
        candidates = {(b, l, l2): (feats[(b, l)], l2)
                      for (b, l), l2 in itertools.product(feats, GRID["l2"])}
    else:
        X = cfg.featurizer().fit(games).transform(units)
        candidates = {(cfg.beta, cfg.layer, cfg.l2): (X, cfg.l2)}

    plan = make_folds(games, cfg.folds, cfg.train_frac, seed=fold_seed)
    audit_plan(plan)
    fold_auc, fold_part_auc, selected, predictions = [], [], [], []
    pooled_probs, pooled_labels, pooled_folds = [], [], []
    for i in range(plan.k):
        train_mask = np.isin(people, list(plan.train_participants[i]))
        test_mask = np.isin(people, list(plan.test_participants[i]))
        audit_split(people, unit_games, train_mask, test_mask, fold=i)
        if len(set(labels[train_mask])) < 2 or len(set(labels[test_mask])) < 2:
            raise ValueError(f"fold {i} lacks one of the classes")
        if len(candidates) > 1:
            key = _select(candidates, labels, unit_games, people, train_mask, cfg, grid_seed + i)
            selected.append({"beta": key[0], "layer": key[1], "l2": key[2]})
        else:
            key = next(iter(candidates))
        X, l2 = candidates[key]
        model = cfg.classifier(l2=l2).fit(X[train_mask], labels[train_mask])
        probs = model.predict_proba(X[test_mask])[:, 1]
        y = labels[test_mask]
        fold_auc.append(auroc(probs, y))
        fold_part_auc.append(_participant_auroc(people[test_mask], y, probs))
        pooled_probs.append(probs)
        pooled_labels.append(y)
        pooled_folds.append(np.full(y.size, i))
        for uid, p, lab in zip(ids[test_mask], probs, y):
            predictions.append({"unit": uid, "fold": i, "label": int(lab), "prob": float(p)})

    probs = np.concatenate(pooled_probs)
    y = np.concatenate(pooled_labels)
    folds = np.concatenate(pooled_folds)
    low, high = bootstrap_ci(probs, y, resamples=cfg.bootstrap, seed=boot_seed, groups=folds)
    predictions.sort(key=lambda r: r["unit"])
    return ExperimentReport(
        label=label,
        config=asdict(cfg),
        fold_auroc=fold_auc,
        mean_auroc=float(np.mean(fold_auc)),
        ci_low=low,
        ci_high=high,
        fold_participant_auroc=fold_part_auc,
        mean_participant_auroc=float(np.mean(fold_part_auc)),
        n_games=len(games),
        n_units=len(units),
        n_examples=len(labels),
        fold_sizes=plan.fold_sizes(),
        leakage_checked=True,
        selected=selected,
        predictions=predictions,
        wall_clock=time.perf_counter() - started,
    )


def run_main_experiment(games, cfg: ExperimentConfig = ExperimentConfig()) -> ExperimentReport:
    return run_experiment(games, cfg, label=f"main-{cfg.segment_len}s")


def run_length_sweep(games, lengths=tuple(range(60, 841, 60)), per_game=100,
                     cfg: ExperimentConfig = ExperimentConfig()) -> list[ExperimentReport]:
    """One sampled-clip experiment per clip length."""
    shortest = min(g.length for g in games)
    reports = []
    for length in lengths:
        if length > shortest:
            warnings.warn(f"segment length {length}s exceeds the shortest game ({shortest}s); skipped")
            continue
        run_cfg = replace(cfg, segment_len=int(length), per_game=per_game)
        reports.append(run_experiment(games, run_cfg, label=f"sweep-{length}s"))
    return reports


def sweep_table(reports):
    """Rows of ``(seconds, mean AUROC, CI low, CI high)``."""
    return [(r.config["segment_len"], r.mean_auroc, r.ci_low, r.ci_high) for r in reports]


def run_outcome_split(games, cfg: ExperimentConfig = ExperimentConfig()):
    """Separate experiments on deceiver-loss and deceiver-win games."""
    reports = []
    for outcome in (Outcome.DL, Outcome.DW):
        subset = [g for g in games if g.outcome is outcome]
        if len(subset) < 2:
            raise ValueError(f"only {len(subset)} {outcome.value} games; need at least 2")
        run_cfg = cfg
        if len(subset) < cfg.folds:
            warnings.warn(f"{outcome.value}: {len(subset)} games, reducing folds to {len(subset)}")
            run_cfg = replace(cfg, folds=len(subset))
        reports.append(run_experiment(subset, run_cfg, label=f"{outcome.value}-{cfg.segment_len}s"))
    return tuple(reports)
