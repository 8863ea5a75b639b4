"""Per-participant behavioral features over one game or game segment.

All functions take the raw ``(T, n, n)`` layer arrays so they work equally on
full games and on slices. Conventions for cases the measures leave open:

* gaze target ties go to the lowest participant index;
* a second with an all-zero look-at row has no target (``NO_TARGET``), forms
  its own periods and is never reciprocated;
* a participant "speaks" at ``t`` when any entry of their speak-to row is
  positive; speaking-conditioned features are 0 for someone who never speaks,
  with ``never_speaks`` set on :class:`BehaviorFeatures`.
"""
from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

NO_TARGET = -1

FEATURE_NAMES = (
    "speaking_fraction",
    "gaze_entropy",
    "look_in_degree",
    "listen_in_degree_while_speaking",
)


@dataclass(frozen=True)
class GazePeriod:
    owner: int
    target: int
    start: int
    end: int  # inclusive

    @property
    def duration(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class BehaviorFeatures:
    speaking_fraction: float
    gaze_entropy: float
    look_in_degree: float
    listen_in_degree_while_speaking: float
    never_speaks: bool = False

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self)[:4], dtype=np.float64)


def gaze_targets(look_at) -> np.ndarray:
    """Per-second gaze target of every participant, shape ``(T, n)``."""
    look_at = np.asarray(look_at)
    targets = np.argmax(look_at, axis=2)
    targets[~np.any(look_at > 0.0, axis=2)] = NO_TARGET
    return targets


def _runs(seq):
    """Start indices and lengths of maximal constant runs in a 1-D array."""
    starts = np.concatenate(([0], np.flatnonzero(seq[1:] != seq[:-1]) + 1))
    lengths = np.diff(np.append(starts, len(seq)))
    return starts, lengths


def extract_gaze_periods(look_at, u: int) -> list[GazePeriod]:
    look_at = np.asarray(look_at)
    if look_at.shape[0] < 1:
        raise ValueError("need at least one second")
    targets = gaze_targets(look_at[:, u : u + 1, :])[:, 0]
    starts, lengths = _runs(targets)
    return [
        GazePeriod(u, int(targets[s]), int(s), int(s + d - 1))
        for s, d in zip(starts, lengths)
    ]


def gaze_entropy(periods, T: int) -> float:
    """Shannon entropy (nats) of the period-duration distribution over ``T``."""
    durations = np.array([p.duration for p in periods], dtype=np.float64)
    if durations.size == 0:
        raise ValueError("gaze entropy of an empty period list")
    if durations.sum() != T:
        raise ValueError(f"periods cover {durations.sum():g}s, expected {T}s")
    return _entropy(durations, T)


def _entropy(durations, T):
    # sum over distinct durations of (share of T) * ln(T / d); equal periods
    # then give exactly ln k since both factors are exact
    d, count = np.unique(durations, return_counts=True)
    return float(np.sum(count * d / T * np.log(T / d)) + 0.0)


def gaze_reciprocity(look_at, u: int) -> float:
    """Duration-weighted mean over u's gaze periods of the target's look back at u."""
    look_at = np.asarray(look_at)
    targets = gaze_targets(look_at[:, u : u + 1, :])[:, 0]
    return float(np.mean(_back_weights(look_at, targets, u)))


def _back_weights(layer, targets, u):
    t_idx = np.arange(len(targets))
    back = layer[t_idx, np.maximum(targets, 0), u]
    return np.where(targets == NO_TARGET, 0.0, back)


def period_reciprocities(look_at, u: int) -> list[tuple[int, float]]:
    """``(duration, reciprocity)`` per gaze period of ``u``."""
    look_at = np.asarray(look_at)
    targets = gaze_targets(look_at[:, u : u + 1, :])[:, 0]
    back = _back_weights(look_at, targets, u)
    starts, lengths = _runs(targets)
    return [(int(d), float(back[s : s + d].mean())) for s, d in zip(starts, lengths)]


def speaking_mask(speak_to) -> np.ndarray:
    """Boolean ``(T, n)``: who speaks at each second."""
    return np.any(np.asarray(speak_to) > 0.0, axis=2)


def speaking_fraction(speak_to, u: int) -> float:
    return float(speaking_mask(speak_to)[:, u].mean())


def look_in_degree(look_at, u: int) -> float:
    """Mean weighted in-degree of ``u`` in the look-at layer."""
    return float(np.asarray(look_at)[:, :, u].sum(axis=1).mean())


def attention_while_speaking(listen_to, speak_to, u: int) -> float:
    """Mean listen-to in-degree of ``u`` over the seconds ``u`` speaks."""
    speaks = speaking_mask(speak_to)[:, u]
    if not speaks.any():
        return 0.0
    return float(np.asarray(listen_to)[speaks, :, u].sum(axis=1).mean())


def speaker_target_reciprocity(listen_to, speak_to, u: int) -> float:
    """Mean listen-to weight from u's speaking target back to u, over u's speaking seconds."""
    speak_to = np.asarray(speak_to)
    speaks = speaking_mask(speak_to)[:, u]
    if not speaks.any():
        return 0.0
    targets = np.argmax(speak_to[speaks, u, :], axis=1)
    return float(np.asarray(listen_to)[speaks][np.arange(len(targets)), targets, u].mean())


def normalize_per_game(values):
    """Subtract the mean over participants; accepts a mapping or a sequence."""
    if isinstance(values, dict):
        keys = list(values)
        centered = normalize_per_game([values[k] for k in keys])
        return dict(zip(keys, centered.tolist()))
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("need at least one participant")
    return arr - arr.mean()


def participant_features(game) -> list[BehaviorFeatures]:
    """The four prior features for every participant of ``game``."""
    seq = game.sequence
    T, n = seq.length, seq.n
    targets = gaze_targets(seq.look_at)
    speaks = speaking_mask(seq.speak_to)
    look_in = seq.look_at.sum(axis=1).mean(axis=0)
    listen_in = seq.listen_to.sum(axis=1)  # (T, n) in-degree per second
    out = []
    for u in range(n):
        _, lengths = _runs(targets[:, u])
        n_speak = int(speaks[:, u].sum())
        attention = float(listen_in[speaks[:, u], u].mean()) if n_speak else 0.0
        out.append(
            BehaviorFeatures(
                speaking_fraction=n_speak / T,
                gaze_entropy=_entropy(lengths.astype(np.float64), T),
                look_in_degree=float(look_in[u]),
                listen_in_degree_while_speaking=attention,
                never_speaks=n_speak == 0,
            )
        )
    return out


def feature_matrix(game) -> np.ndarray:
    """``(n, 4)`` array of :data:`FEATURE_NAMES` columns."""
    return np.vstack([f.as_array() for f in participant_features(game)])
