"""Group comparisons of deceiver and non-deceiver behavior.

Scores are centered per game before pooling, groups are compared with
Welch's two-sample t-test, and intervals are normal-approximation 95% CIs.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy import stats

from . import behavior
from .netcore import Outcome, Role

Z95 = 1.959963984540054


def welch_ttest(a, b):
    """Welch's t statistic and two-sided p-value.

    Two constant samples with the same value give ``(0.0, 1.0)``; two constant
    samples with different values give an infinite statistic and ``p = 0``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0.0:
        if diff == 0.0:
            return 0.0, 1.0
        return float(np.copysign(np.inf, diff)), 0.0
    t = diff / np.sqrt(se2)
    dof = se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    p = 2.0 * stats.t.sf(abs(t), dof)
    return float(t), float(min(p, 1.0))


def mean_ci(values):
    """Mean with a normal-approximation 95% interval; NaNs for an empty sample."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return float("nan"), (float("nan"), float("nan"))
    m = float(v.mean())
    if v.size == 1:
        return m, (m, m)
    half = Z95 * v.std(ddof=1) / np.sqrt(v.size)
    return m, (float(m - half), float(m + half))


class PairMetric(str, Enum):
    LOOK_RECIPROCITY = "look_reciprocity"
    SPEAK_PROB = "speak_prob"
    LISTEN_PROB = "listen_prob"


@dataclass(frozen=True)
class RolePairStats:
    pair: tuple
    mean: float
    ci95: tuple
    sample_count: int
    values: tuple = field(default=(), repr=False)


def pair_values(game, metric) -> dict:
    """Per ordered pair ``(u, v)`` of a game, the metric value for u acting on v.

    * look reciprocity: u's mean look-at weight on v over the seconds v's gaze
      target is u;
    * speak probability: u's mean speak-to weight on v over u's speaking seconds;
    * listen probability: u's mean listen-to weight on v over v's speaking seconds.

    Pairs whose conditioning set is empty are omitted.
    """
    metric = PairMetric(metric)
    seq = game.sequence
    speaks = behavior.speaking_mask(seq.speak_to)
    if metric is PairMetric.LOOK_RECIPROCITY:
        targets = behavior.gaze_targets(seq.look_at)
    out = {}
    for u in range(game.n):
        for v in range(game.n):
            if u == v:
                continue
            if metric is PairMetric.LOOK_RECIPROCITY:
                mask = targets[:, v] == u
                layer = seq.look_at
            elif metric is PairMetric.SPEAK_PROB:
                mask = speaks[:, u]
                layer = seq.speak_to
            else:
                mask = speaks[:, v]
                layer = seq.listen_to
            if mask.any():
                out[(u, v)] = float(layer[mask, u, v].mean())
    return out


def role_pair_aggregates(games, metric) -> list[RolePairStats]:
    """Pool pair values over games into the four ordered role pairs."""
    if not games:
        raise ValueError("need at least one game")
    order = [
        (Role.DECEIVER, Role.DECEIVER),
        (Role.DECEIVER, Role.NON_DECEIVER),
        (Role.NON_DECEIVER, Role.DECEIVER),
        (Role.NON_DECEIVER, Role.NON_DECEIVER),
    ]
    samples = {pair: [] for pair in order}
    for game in games:
        for (u, v), value in pair_values(game, metric).items():
            samples[(game.roles[u], game.roles[v])].append(value)
    result = []
    for pair in order:
        m, ci = mean_ci(samples[pair])
        result.append(RolePairStats(pair, m, ci, len(samples[pair]), tuple(samples[pair])))
    return result


# -- findings report --------------------------------------------------------

@dataclass(frozen=True)
class FindingRow:
    finding: str
    subset: str
    measure: str
    granularity: str
    group_a: str
    group_b: str
    mean_a: float
    ci_a_low: float
    ci_a_high: float
    n_a: int
    mean_b: float
    ci_b_low: float
    ci_b_high: float
    n_b: int
    t: float
    p: float
    expected: str  # "less" (a < b, p < alpha) or "similar" (p > alpha)
    alpha: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def _participant_measures(game):
    """Per-participant measures used by F1-F5; ``None`` marks missing values."""
    seq = game.sequence
    speaks = behavior.speaking_mask(seq.speak_to).any(axis=0)
    rows = {}
    feats = behavior.participant_features(game)
    for u in range(game.n):
        rows[u] = {
            "gaze_entropy": feats[u].gaze_entropy,
            "gaze_reciprocity": behavior.gaze_reciprocity(seq.look_at, u),
            "speaking_fraction": feats[u].speaking_fraction,
            "attention_while_speaking": (
                feats[u].listen_in_degree_while_speaking if speaks[u] else None
            ),
            "speaker_target_reciprocity": (
                behavior.speaker_target_reciprocity(seq.listen_to, seq.speak_to, u)
                if speaks[u]
                else None
            ),
        }
    return rows


def _centered_by_role(games, measure):
    """Per-game centered values split into (deceivers, non-deceivers)."""
    d, nd = [], []
    for game in games:
        rows = _participant_measures(game)
        present = [u for u in range(game.n) if rows[u][measure] is not None]
        if not present:
            continue
        centered = behavior.normalize_per_game([rows[u][measure] for u in present])
        for u, value in zip(present, centered):
            (d if game.roles[u] is Role.DECEIVER else nd).append(float(value))
    return d, nd


def _period_reciprocity_by_role(games):
    d, nd = [], []
    for game in games:
        look = game.sequence.look_at
        per_participant = [behavior.gaze_reciprocity(look, u) for u in range(game.n)]
        center = float(np.mean(per_participant))
        for u in range(game.n):
            bucket = d if game.roles[u] is Role.DECEIVER else nd
            bucket.extend(r - center for _, r in behavior.period_reciprocities(look, u))
    return d, nd


def _row(finding, subset, measure, a, b, expected, alpha, names=("D", "ND"), granularity="participant"):
    ma, ca = mean_ci(a)
    mb, cb = mean_ci(b)
    if len(a) >= 2 and len(b) >= 2:
        t, p = welch_ttest(a, b)
    else:
        t, p = float("nan"), float("nan")
    if np.isnan(p):
        passed = False
    elif expected == "less":
        passed = bool(ma < mb and p < alpha)
    else:
        passed = bool(p > alpha)
    return FindingRow(
        finding, subset, measure, granularity, names[0], names[1],
        ma, ca[0], ca[1], len(a), mb, cb[0], cb[1], len(b),
        float(t), float(p), expected, alpha, passed,
    )


def characterize(games) -> list[FindingRow]:
    """Run the six group comparisons and check each against its expected direction."""
    dw = [g for g in games if g.outcome is Outcome.DW]
    dl = [g for g in games if g.outcome is Outcome.DL]
    rows = []

    for measure in ("gaze_entropy", "gaze_reciprocity"):
        rows.append(_row("F1", "DW", measure, *_centered_by_role(dw, measure), "similar", 0.05))
    rows.append(
        _row("F1", "DW", "gaze_reciprocity", *_period_reciprocity_by_role(dw),
             "similar", 0.05, granularity="period")
    )
    for measure in ("gaze_entropy", "gaze_reciprocity"):
        rows.append(_row("F2", "DL", measure, *_centered_by_role(dl, measure), "less", 0.001))
    rows.append(
        _row("F2", "DL", "gaze_reciprocity", *_period_reciprocity_by_role(dl),
             "less", 0.001, granularity="period")
    )
    rows.append(_row("F3", "DW", "speaking_fraction", *_centered_by_role(dw, "speaking_fraction"), "less", 0.05))
    rows.append(_row("F3", "DL", "speaking_fraction", *_centered_by_role(dl, "speaking_fraction"), "less", 0.001))
    for finding, measure in (("F4", "attention_while_speaking"), ("F5", "speaker_target_reciprocity")):
        rows.append(_row(finding, "DL", measure, *_centered_by_role(dl, measure), "less", 0.05))
        rows.append(_row(finding, "DW", measure, *_centered_by_role(dw, measure), "similar", 0.05))

    for metric, deceiver_expect, alpha in (
        (PairMetric.LOOK_RECIPROCITY, "less", 0.001),
        (PairMetric.LISTEN_PROB, "less", 0.05),
        (PairMetric.SPEAK_PROB, "similar", 0.05),
    ):
        dd, dn, nd_d, nd_nd = role_pair_aggregates(games, metric)
        rows.append(_row("F6", "all", metric.value, dd.values, dn.values, deceiver_expect,
                         alpha, names=("D->D", "D->ND"), granularity="pair"))
        rows.append(_row("F6", "all", metric.value, nd_d.values, nd_nd.values, "similar",
                         0.05, names=("ND->D", "ND->ND"), granularity="pair"))
    return rows


def format_findings(rows) -> str:
    lines = []
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        lines.append(
            f"{status} {r.finding} [{r.subset}] {r.measure} ({r.granularity}): "
            f"{r.group_a}={r.mean_a:+.4f} [{r.ci_a_low:+.4f},{r.ci_a_high:+.4f}] n={r.n_a} vs "
            f"{r.group_b}={r.mean_b:+.4f} [{r.ci_b_low:+.4f},{r.ci_b_high:+.4f}] n={r.n_b}; "
            f"t={r.t:.3f} p={r.p:.3g} expect {r.expected} (alpha={r.alpha})"
        )
    return "\n".join(lines)
