"""Evaluation-unit featurization as a scikit-learn transformer.

One row per (game segment, participant): the DeceptionRank score followed by
the four behavioral features.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import behavior
from .netcore import Layer
from .rank import EdgeDirection, RankConfig, rank_scores_for_unit

COLUMNS = ("deception_rank",) + behavior.FEATURE_NAMES


def unit_features(game, rank_cfg=RankConfig(), layer=Layer.LOOK_AT, prior_features=None):
    """``(n, 5)`` feature block for one evaluation unit."""
    feats = behavior.feature_matrix(game)
    prior = feats if prior_features is None else prior_features
    scores = rank_scores_for_unit(game, rank_cfg, layer, prior_features=prior)
    return np.column_stack([scores, feats])


def unit_index(units):
    """Row metadata aligned with :meth:`DeceptionRankFeaturizer.transform`.

    Returns ``(labels, games, participants, unit_ids)`` where ``participants``
    holds ``"<game>#<index>"`` keys that identify a person across segments.
    """
    labels, games, people, ids = [], [], [], []
    for unit in units:
        for u in range(unit.n):
            labels.append(int(unit.labels[u]))
            games.append(unit.base_game)
            people.append(f"{unit.base_game}#{u}")
            ids.append(f"{unit.game_id}#{u}")
    return (np.array(labels, dtype=np.int64), np.array(games, dtype=object),
            np.array(people, dtype=object), np.array(ids, dtype=object))


class DeceptionRankFeaturizer(TransformerMixin, BaseEstimator):
    """Map a list of games (or segments) to per-participant feature rows.

    Parameters
    ----------
    beta, tau, max_iter, edge_direction
        Propagation settings, see :class:`~ffdin.rank.RankConfig`.
    layer : str
        Interaction layer the negative network is built from.
    prior_scope : {"segment", "game"}
        Whether the prior's min-max scaling uses the unit's own features or
        those of the whole game it was cut from. ``"game"`` needs the full
        games passed to :meth:`fit`.
    """

    def __init__(self, beta=0.85, tau=1e-6, max_iter=100, layer="look_at",
                 edge_direction="incoming", prior_scope="segment"):
        self.beta = beta
        self.tau = tau
        self.max_iter = max_iter
        self.layer = layer
        self.edge_direction = edge_direction
        self.prior_scope = prior_scope

    def _rank_config(self):
        return RankConfig(self.beta, self.tau, self.max_iter, EdgeDirection(self.edge_direction))

    def fit(self, X, y=None):
        if self.prior_scope not in ("segment", "game"):
            raise ValueError(f"unknown prior_scope {self.prior_scope!r}")
        self._rank_config()
        Layer(self.layer)
        self.game_features_ = {}
        if self.prior_scope == "game":
            self.game_features_ = {g.base_game: behavior.feature_matrix(g) for g in X}
        return self

    def transform(self, X):
        if not hasattr(self, "game_features_"):
            self.fit([] if self.prior_scope == "game" else X)
        cfg = self._rank_config()
        blocks = []
        for unit in X:
            prior = None
            if self.prior_scope == "game":
                try:
                    prior = self.game_features_[unit.base_game]
                except KeyError:
                    raise ValueError(f"game {unit.base_game} was not seen in fit") from None
            blocks.append(unit_features(unit, cfg, Layer(self.layer), prior))
        if not blocks:
            return np.empty((0, len(COLUMNS)))
        return np.vstack(blocks)

    def get_feature_names_out(self, input_features=None):
        return np.array(COLUMNS, dtype=object)
