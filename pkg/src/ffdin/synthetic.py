"""Seeded synthetic games with controllable deceiver behavior.

Generative model, per participant and second:

* gaze follows a sticky categorical process: with probability ``switch_rate``
  a fresh target (or idle) is drawn from a role-dependent distribution,
  otherwise the previous target is kept. Deceivers redraw less often, which
  lowers their gaze entropy;
* the gaze target gets a confidence weight ``c ~ U(min_confidence, 1)`` and
  the remainder ``1 - c`` spills onto one other random participant;
* speaking is Bernoulli; while speaking, a participant looks at an
  addressee drawn uniformly from the others (addressing is role-blind), the
  speak-to row is that look-at row, and every other participant's look-at
  weight on a speaker becomes a listen-to edge towards that speaker.

Weights are quantized to four decimals so they survive a text round trip.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .netcore import GameRecord, LayeredSequence, Outcome, Role

QUANTUM = 10_000


@dataclass(frozen=True)
class BehaviorConfig:
    """Generator parameters; all gaps are deceiver-minus-direction reductions.

    ``speaking_gap`` and ``switch_gap`` lower the deceivers' per-second
    speaking and gaze-switching probabilities. ``attention_gap`` is the
    relative drop in how likely non-deceivers are to pick a deceiver as gaze
    target. ``avoidance_gap`` is the expected look-at weight a deceiver puts
    on each non-deceiver minus what it puts on each fellow deceiver,
    averaged over all seconds (speaking seconds included).
    """

    n_participants: int = 7
    n_deceivers: int = 3
    length: int = 2300
    outcome: Outcome = Outcome.DW
    speaking_rate: float = 0.15
    speaking_gap: float = 0.0
    switch_rate: float = 0.25
    switch_gap: float = 0.0
    attention_gap: float = 0.0
    avoidance_gap: float = 0.0
    idle_prob: float = 0.02
    min_confidence: float = 0.6

    def __post_init__(self):
        object.__setattr__(self, "outcome", Outcome(self.outcome))
        numbers = [getattr(self, f) for f in (
            "speaking_rate", "speaking_gap", "switch_rate", "switch_gap",
            "attention_gap", "avoidance_gap", "idle_prob", "min_confidence")]
        if not all(np.isfinite(numbers)):
            raise ValueError("generator parameters must be finite")
        if self.n_participants < 3:
            raise ValueError("need at least three participants")
        if not 1 <= self.n_deceivers <= self.n_participants - 1:
            raise ValueError("need at least one deceiver and one non-deceiver")
        if self.length < 2:
            raise ValueError("need at least two seconds")
        for name, value in (
            ("speaking_rate", self.speaking_rate),
            ("deceiver speaking rate", self.speaking_rate - self.speaking_gap),
            ("switch_rate", self.switch_rate),
            ("deceiver switch rate", self.switch_rate - self.switch_gap),
            ("idle_prob", self.idle_prob),
        ):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value} is not a probability")
        if self.idle_prob >= 1.0:
            raise ValueError("idle_prob must be below 1")
        if not 0.0 <= self.attention_gap < 1.0:
            raise ValueError("attention_gap must be in [0, 1)")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must be in [0, 1]")
        self.deceiver_affinity()  # validates avoidance_gap

    @property
    def look_contrast(self) -> float:
        """Expected look weight on the gaze target minus that on a non-target."""
        mean_c = (self.min_confidence + 1.0) / 2.0
        return mean_c - (1.0 - mean_c) / (self.n_participants - 2)

    def deceiver_affinity(self) -> float:
        """Relative chance a deceiver picks a fellow deceiver (non-deceivers are 1)."""
        k_d = self.n_deceivers - 1
        k_n = self.n_participants - self.n_deceivers
        if self.avoidance_gap == 0.0 or k_d == 0:
            return 1.0
        if self.look_contrast <= 0.0:
            raise ValueError("min_confidence too low for a look-at contrast")
        silent = 1.0 - (self.speaking_rate - self.speaking_gap)
        if silent <= 0.0:
            raise ValueError("deceivers who always speak cannot avoid each other by gaze")
        g = self.avoidance_gap / ((1.0 - self.idle_prob) * self.look_contrast * silent)
        affinity = (1.0 - g * k_n) / (1.0 + g * k_d)
        if not 0.0 <= affinity:
            raise ValueError(
                f"avoidance_gap {self.avoidance_gap} is unattainable with "
                f"{self.n_participants} participants and {self.n_deceivers} deceivers"
            )
        return affinity

    def target_distribution(self, roles) -> np.ndarray:
        """``(n, n + 1)`` gaze-target probabilities; the last column is idle."""
        n = len(roles)
        is_d = np.array([r is Role.DECEIVER for r in roles])
        aff = np.ones((n, n))
        aff[np.ix_(~is_d, is_d)] = 1.0 - self.attention_gap
        aff[np.ix_(is_d, is_d)] = self.deceiver_affinity()
        np.fill_diagonal(aff, 0.0)
        probs = np.empty((n, n + 1))
        probs[:, :n] = (1.0 - self.idle_prob) * aff / aff.sum(axis=1, keepdims=True)
        probs[:, n] = self.idle_prob
        return probs

    def expected_pair_look(self, roles) -> np.ndarray:
        """Expected look-at weight ``u -> v`` under the stationary gaze process."""
        n = len(roles)
        is_d = np.array([r is Role.DECEIVER for r in roles])
        speak = np.where(is_d, self.speaking_rate - self.speaking_gap, self.speaking_rate)
        q = self.target_distribution(roles)[:, :n]
        mean_c = (self.min_confidence + 1.0) / 2.0
        silent = q * mean_c + (1.0 - self.idle_prob - q) * (1.0 - mean_c) / (n - 2)
        # an addressee plus spill spreads exactly one unit uniformly over the others
        out = (1.0 - speak)[:, None] * silent + speak[:, None] / (n - 1)
        np.fill_diagonal(out, 0.0)
        return out


def _sample_rows(rng, probs, rows, size):
    """Draw one category per entry of ``rows`` (shape ``size``) from ``probs[rows]``."""
    cum = np.cumsum(probs, axis=1)
    cum[:, -1] = 1.0
    draws = rng.random(size)
    return (draws[..., None] >= cum[rows]).sum(axis=-1)


def generate_synthetic_game(cfg: BehaviorConfig, seed: int, game_id=None) -> GameRecord:
    rng = np.random.default_rng(seed)
    n, T = cfg.n_participants, cfg.length
    roles = np.array([Role.DECEIVER] * cfg.n_deceivers
                     + [Role.NON_DECEIVER] * (n - cfg.n_deceivers), dtype=object)
    rng.shuffle(roles)
    roles = tuple(roles)
    is_d = np.array([r is Role.DECEIVER for r in roles])
    participants = np.broadcast_to(np.arange(n), (T, n))

    # sticky gaze: carry the latest fresh draw forward between switches
    probs = cfg.target_distribution(roles)
    fresh = _sample_rows(rng, probs, participants, (T, n))
    switch_p = np.where(is_d, cfg.switch_rate - cfg.switch_gap, cfg.switch_rate)
    switch = rng.random((T, n)) < switch_p
    switch[0] = True
    last = np.maximum.accumulate(np.where(switch, np.arange(T)[:, None], 0), axis=0)
    target = fresh[last, participants]

    speak_p = np.where(is_d, cfg.speaking_rate - cfg.speaking_gap, cfg.speaking_rate)
    speaking = rng.random((T, n)) < speak_p
    addressee = rng.integers(0, n - 1, size=(T, n))
    addressee = addressee + (addressee >= participants)
    target = np.where(speaking, addressee, target)
    looking = target < n

    lo = int(round(cfg.min_confidence * QUANTUM))
    conf = rng.integers(lo, QUANTUM + 1, size=(T, n))
    k = rng.integers(0, n - 2, size=(T, n))
    a = np.minimum(participants, target)
    b = np.maximum(participants, target)
    spill_to = k + (k >= a)
    spill_to = spill_to + (spill_to >= b)

    t_idx, u_idx = np.nonzero(looking)
    look = np.zeros((T, n, n))
    look[t_idx, u_idx, target[t_idx, u_idx]] = conf[t_idx, u_idx] / QUANTUM
    look[t_idx, u_idx, spill_to[t_idx, u_idx]] = (QUANTUM - conf[t_idx, u_idx]) / QUANTUM

    speak = np.where(speaking[:, :, None], look, 0.0)
    listen = np.where(speaking[:, None, :], look, 0.0)

    return GameRecord(
        game_id=game_id or f"synth-{seed}",
        roles=roles,
        outcome=cfg.outcome,
        sequence=LayeredSequence(look, speak, listen),
    )


# gap settings shared by the presets; "strong" follows the direction of every
# deceiver/non-deceiver difference at a size that separates one-minute clips
STRONG_GAPS = dict(
    speaking_rate=0.3, speaking_gap=0.2, switch_rate=0.3, switch_gap=0.2,
    attention_gap=0.6, avoidance_gap=0.08,
)
MODERATE_GAPS = dict(
    speaking_rate=0.2, speaking_gap=0.08, switch_rate=0.3, switch_gap=0.1,
    attention_gap=0.3, avoidance_gap=0.05,
)
PRESETS = {
    # name: (gaps in DW games, gaps in DL games); "mixed" has weak DW and moderate DL gaps
    "null": ({}, {}),
    "strong": (STRONG_GAPS, STRONG_GAPS),
    "mixed": ({"speaking_rate": 0.2, "speaking_gap": 0.05, "avoidance_gap": 0.05}, MODERATE_GAPS),
    "dl-only": ({}, STRONG_GAPS),
}


def group_composition(n: int) -> int:
    """Number of deceivers in a game of ``n`` players (two up to six, else three)."""
    return 2 if n <= 6 else 3


def generate_synthetic_dataset(n_games=26, seed=0, preset="strong", length=2300,
                               n_dw=None, sizes=(5, 8), base=None) -> list[GameRecord]:
    """A list of synthetic games with mixed group sizes and lengths.

    ``n_dw`` games (default: 14 of 26, scaled) are deceiver wins; each game's
    length is drawn within 20% of ``length``.
    """
    dw_gaps, dl_gaps = PRESETS[preset]
    if n_dw is None:
        n_dw = int(round(n_games * 14 / 26))
    base = base or BehaviorConfig()
    root = np.random.SeedSequence(seed)
    layout = np.random.default_rng(root.spawn(1)[0])
    games = []
    for i, child in enumerate(root.spawn(n_games)):
        n = int(layout.integers(sizes[0], sizes[1] + 1))
        T = int(layout.integers(int(length * 0.8), int(length * 1.2) + 1))
        outcome = Outcome.DW if i < n_dw else Outcome.DL
        gaps = dw_gaps if outcome is Outcome.DW else dl_gaps
        cfg = replace(base, n_participants=n, n_deceivers=group_composition(n),
                      length=T, outcome=outcome, **gaps)
        game_seed = int(child.generate_state(1)[0])
        games.append(generate_synthetic_game(cfg, game_seed, game_id=f"synth{i:02d}"))
    return games
