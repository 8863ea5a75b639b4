"""Deception priors and rank propagation over negative interaction sequences."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import behavior
from .netcore import Layer, NegativeSequence, build_negative


class EdgeDirection(str, Enum):
    INCOMING = "incoming"  # r(v) sums s(u) * w(u, v)
    OUTGOING = "outgoing"  # r(v) sums s(u) * w(v, u)


@dataclass(frozen=True)
class RankConfig:
    beta: float = 0.85
    tau: float = 1e-6
    max_iter: int = 100
    edge_direction: EdgeDirection = EdgeDirection.INCOMING

    def __post_init__(self):
        object.__setattr__(self, "edge_direction", EdgeDirection(self.edge_direction))
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")


@dataclass(frozen=True)
class ScoreVector:
    scores: np.ndarray
    iterations: int = 0
    converged: bool = False
    final_dif: float = float("nan")


def min_max_scale(features) -> np.ndarray:
    """Scale each column to ``[0, 1]``; a constant column maps to 0.5."""
    x = np.asarray(features, dtype=np.float64)
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = hi - lo
    flat = span == 0.0
    scaled = (x - lo) / np.where(flat, 1.0, span)
    scaled[:, flat] = 0.5
    return scaled


def init_prior(features) -> ScoreVector:
    """Prior deceptiveness: one minus the mean of the min-max scaled features.

    ``features`` is an ``(n, 4)`` array or a sequence of
    :class:`~ffdin.behavior.BehaviorFeatures`; lower engagement on every
    feature means a higher prior.
    """
    if len(features) and isinstance(features[0], behavior.BehaviorFeatures):
        features = np.vstack([f.as_array() for f in features])
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("the prior needs a 2-D feature array over at least two participants")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature value")
    return ScoreVector(1.0 - min_max_scale(x).mean(axis=1))


def deception_rank(negs, prior, cfg: RankConfig = RankConfig()) -> ScoreVector:
    """Propagate deceptiveness over a negative interaction sequence.

    Each iteration copies the current scores to every snapshot, mixes each
    node's own score with the weighted scores of its neighbors in that
    snapshot, averages over snapshots and L2-normalizes. The loop stops once
    the L2 change is at most ``tau`` or after ``max_iter`` iterations.

    The prior is L2-normalized on entry, so scaling it by any positive
    constant leaves every iterate unchanged.
    """
    w = negs.weights if isinstance(negs, NegativeSequence) else np.asarray(negs, dtype=np.float64)
    s = np.asarray(getattr(prior, "scores", prior), dtype=np.float64)
    if w.ndim != 3 or w.shape[0] < 1:
        raise ValueError("need a non-empty (T, n, n) negative sequence")
    if s.shape != (w.shape[1],):
        raise ValueError(f"prior has shape {s.shape}, expected ({w.shape[1]},)")
    if np.any(s < 0.0) or not np.all(np.isfinite(s)):
        raise ValueError("prior must be finite and non-negative")
    norm = np.linalg.norm(s)
    if norm == 0.0:
        raise ValueError("prior is all zero")
    s = s / norm

    spec = "tuv,tu->tv" if cfg.edge_direction is EdgeDirection.INCOMING else "tvu,tu->tv"
    T = w.shape[0]
    iterations, dif = 0, 1.0
    while dif > cfg.tau and iterations < cfg.max_iter:
        per_snapshot = np.broadcast_to(s, (T, s.size))
        r_t = cfg.beta * np.einsum(spec, w, per_snapshot) + (1.0 - cfg.beta) * per_snapshot
        r = r_t.sum(axis=0) / T
        r_norm = np.linalg.norm(r)
        if r_norm == 0.0:
            raise ValueError("aggregate scores vanished; cannot normalize")
        r = r / r_norm
        dif = float(np.linalg.norm(r - s))
        iterations += 1
        s = r
    return ScoreVector(s, iterations, dif <= cfg.tau, dif)


def rank_scores_for_unit(game, cfg: RankConfig = RankConfig(), layer=Layer.LOOK_AT,
                         prior_features=None) -> np.ndarray:
    """Features, prior, negative network and propagation for one game or segment.

    ``prior_features`` overrides the features the prior is built from, e.g.
    features of the full game when scoring one of its segments.
    """
    if prior_features is None:
        prior_features = behavior.feature_matrix(game)
    prior = init_prior(prior_features)
    negs = build_negative(game.sequence.layer(layer), layer)
    return deception_rank(negs, prior, cfg).scores
