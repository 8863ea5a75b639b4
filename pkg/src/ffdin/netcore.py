"""Dynamic multi-layer interaction networks and their negative complements.

A game is stored as three dense ``(T, n, n)`` arrays, one per interaction
layer, where ``w[t, u, v]`` is the strength of the ``u -> v`` interaction
during second ``t``. Groups are small (at most a handful of people), so dense
storage is both simpler and faster than any sparse structure.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Role",
    "Outcome",
    "Layer",
    "LayeredSequence",
    "GameRecord",
    "NegativeSequence",
    "check_snapshots",
    "build_negative",
    "negative_for",
    "slice_game",
]


class Role(str, Enum):
    DECEIVER = "D"
    NON_DECEIVER = "ND"


class Outcome(str, Enum):
    DW = "DW"  # deceivers win
    DL = "DL"  # deceivers lose


class Layer(str, Enum):
    LOOK_AT = "look_at"
    SPEAK_TO = "speak_to"
    LISTEN_TO = "listen_to"
    COMBINED = "combined"


SOURCE_LAYERS = (Layer.LOOK_AT, Layer.SPEAK_TO, Layer.LISTEN_TO)


def check_snapshots(weights, name="weights"):
    """Validate a ``(T, n, n)`` snapshot stack and return a read-only float copy.

    Every weight must be finite and in ``[0, 1]`` and every diagonal entry
    must be zero.
    """
    arr = np.array(weights, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"{name}: expected shape (T, n, n), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: non-finite weight")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        bad = np.argwhere((arr < 0.0) | (arr > 1.0))[0]
        raise ValueError(
            f"{name}: weight {arr[tuple(bad)]!r} at (t={bad[0]}, src={bad[1]}, "
            f"dst={bad[2]}) outside [0, 1]"
        )
    diag = np.einsum("tii->ti", arr)
    if np.any(diag != 0.0):
        t, u = np.argwhere(diag != 0.0)[0]
        raise ValueError(f"{name}: self-interaction at t={t}, participant {u}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LayeredSequence:
    """Three aligned per-second layers over the same participants."""

    look_at: np.ndarray
    speak_to: np.ndarray
    listen_to: np.ndarray

    def __post_init__(self):
        arrays = {}
        for layer in SOURCE_LAYERS:
            arrays[layer.value] = check_snapshots(getattr(self, layer.value), layer.value)
        shapes = {a.shape for a in arrays.values()}
        if len(shapes) != 1:
            raise ValueError(f"layers disagree in shape: {sorted(shapes)}")
        if arrays["look_at"].shape[0] < 1:
            raise ValueError("a sequence needs at least one second")
        for key, arr in arrays.items():
            object.__setattr__(self, key, arr)

    @property
    def n(self) -> int:
        return self.look_at.shape[1]

    @property
    def length(self) -> int:
        return self.look_at.shape[0]

    def layer(self, layer) -> np.ndarray:
        layer = Layer(layer)
        if layer is Layer.COMBINED:
            return (self.look_at + self.speak_to + self.listen_to) / 3.0
        return getattr(self, layer.value)

    def __eq__(self, other):
        if not isinstance(other, LayeredSequence):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, l.value), getattr(other, l.value))
            for l in SOURCE_LAYERS
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GameRecord:
    """One game (or one slice of a game) with roles and outcome.

    ``source_game`` and ``offset`` record where a slice came from; both are
    left at their defaults for a full game.
    """

    game_id: str
    roles: tuple
    outcome: Outcome
    sequence: LayeredSequence
    source_game: str | None = None
    offset: int = 0

    def __post_init__(self):
        roles = tuple(Role(r) for r in self.roles)
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "outcome", Outcome(self.outcome))
        if len(roles) != self.sequence.n:
            raise ValueError(
                f"game {self.game_id}: {len(roles)} roles for {self.sequence.n} participants"
            )
        if Role.DECEIVER not in roles or Role.NON_DECEIVER not in roles:
            raise ValueError(f"game {self.game_id}: needs at least one of each role")

    @property
    def n(self) -> int:
        return self.sequence.n

    @property
    def length(self) -> int:
        return self.sequence.length

    @property
    def base_game(self) -> str:
        return self.source_game or self.game_id

    @property
    def labels(self) -> np.ndarray:
        """1 for deceivers, 0 for non-deceivers, indexed by participant."""
        return np.array([r is Role.DECEIVER for r in self.roles], dtype=np.int64)

    def __eq__(self, other):
        if not isinstance(other, GameRecord):
            return NotImplemented
        return (
            self.game_id == other.game_id
            and self.roles == other.roles
            and self.outcome == other.outcome
            and self.source_game == other.source_game
            and self.offset == other.offset
            and self.sequence == other.sequence
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NegativeSequence:
    weights: np.ndarray
    source_layer: Layer

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    @property
    def length(self) -> int:
        return self.weights.shape[0]


def build_negative(snapshots, source_layer=Layer.LOOK_AT) -> NegativeSequence:
    """Complement every off-diagonal weight (``1 - w``); the diagonal stays zero.

    An absent interaction therefore becomes a full-strength avoidance edge.
    """
    arr = np.asarray(snapshots, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"expected shape (T, n, n), got {arr.shape}")
    if not np.all(np.isfinite(arr)) or (arr.size and (arr.min() < 0.0 or arr.max() > 1.0)):
        raise ValueError("snapshot weights must lie in [0, 1]")
    neg = 1.0 - arr
    idx = np.arange(arr.shape[1])
    neg[:, idx, idx] = 0.0
    neg.setflags(write=False)
    return NegativeSequence(neg, Layer(source_layer))


def negative_for(game: GameRecord, layer=Layer.LOOK_AT) -> NegativeSequence:
    return build_negative(game.sequence.layer(layer), layer)


def slice_game(game: GameRecord, start: int, length: int) -> GameRecord:
    """Cut ``[start, start + length)`` out of all three layers."""
    start, length = int(start), int(length)
    if length < 1 or start < 0 or start + length > game.length:
        raise ValueError(
            f"slice [{start}, {start + length}) out of range for game "
            f"{game.game_id} of length {game.length}"
        )
    seq = game.sequence
    stop = start + length
    sliced = LayeredSequence(
        seq.look_at[start:stop], seq.speak_to[start:stop], seq.listen_to[start:stop]
    )
    return GameRecord(
        game_id=f"{game.base_game}@{game.offset + start}+{length}",
        roles=game.roles,
        outcome=game.outcome,
        sequence=sliced,
        source_game=game.base_game,
        offset=game.offset + start,
    )
