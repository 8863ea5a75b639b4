"""Reading and writing game datasets.

Canonical layout::

    <root>/manifest.json
    <root>/edges/<game>.look_at.csv      header: t,src,dst,weight
    <root>/edges/<game>.speak_to.csv
    <root>/edges/<game>.listen_to.csv

Only nonzero weights are written, ordered by ``(t, src, dst)``, as decimal
text with 9 significant digits. Any weight that already has at most 9
significant digits therefore survives a write/read cycle exactly.

Other layouts are read through a column mapping (see :func:`ingest_mapped`).
"""
from __future__ import annotations

import csv
import json
import math
import re
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .netcore import SOURCE_LAYERS, GameRecord, LayeredSequence, Outcome, Role

FORMAT = "ffdin-canonical"
VERSION = 1
MANIFEST = "manifest.json"
EDGE_HEADER = ["t", "src", "dst", "weight"]
ROLE_CODES = {Role.DECEIVER: "D", Role.NON_DECEIVER: "ND"}


@dataclass(frozen=True)
class Diagnostic:
    path: str
    line: int  # 0 when the problem is not tied to a line
    message: str

    def __str__(self):
        where = f"{self.path}:{self.line}" if self.line else self.path
        return f"{where}: {self.message}"


class IngestError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        head = "\n".join(str(d) for d in self.diagnostics[:20])
        more = len(self.diagnostics) - 20
        super().__init__(head + (f"\n... and {more} more" if more > 0 else ""))


@dataclass
class IngestSummary:
    games: int = 0
    nodes: int = 0
    seconds: int = 0
    edges: dict = field(default_factory=lambda: {l.value: 0 for l in SOURCE_LAYERS})
    outcomes: dict = field(default_factory=dict)
    group_sizes: list = field(default_factory=list)
    lines: int = 0
    accepted: int = 0
    rejected: int = 0
    look_row_sum: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def describe(self) -> str:
        e = self.edges
        return (
            f"{self.games} network timeseries, {self.nodes} nodes, {self.seconds} seconds; "
            f"edges look-at {e['look_at']}, speak-to {e['speak_to']}, "
            f"listen-to {e['listen_to']}; outcomes {self.outcomes}; "
            f"{self.accepted}/{self.lines} edge lines accepted, {self.rejected} rejected"
        )


@dataclass
class Dataset:
    games: list
    summary: IngestSummary
    diagnostics: list = field(default_factory=list)


def summarize(games, lines=None, rejected=0) -> IngestSummary:
    s = IngestSummary()
    s.games = len(games)
    s.nodes = sum(g.n for g in games)
    s.seconds = sum(g.length for g in games)
    for layer in SOURCE_LAYERS:
        s.edges[layer.value] = int(sum(np.count_nonzero(g.sequence.layer(layer)) for g in games))
    s.outcomes = dict(sorted(Counter(g.outcome.value for g in games).items()))
    s.group_sizes = sorted({g.n for g in games})
    total_edges = sum(s.edges.values())
    s.lines = total_edges + rejected if lines is None else lines
    s.rejected = rejected
    s.accepted = s.lines - rejected
    sums = [g.sequence.look_at.sum(axis=2) for g in games]
    if sums:
        flat = np.concatenate([x.ravel() for x in sums])
        active = flat[flat > 0.0]
        s.look_row_sum = {
            "rows_with_edges": int(active.size),
            "mean": float(active.mean()) if active.size else 0.0,
            "max": float(flat.max()),
            "over_one": int(np.count_nonzero(flat > 1.0 + 1e-9)),
        }
    return s


# -- export -----------------------------------------------------------------

def _format_edges(arr) -> str:
    t, src, dst = np.nonzero(arr)
    w = arr[t, src, dst]
    rows = [",".join(EDGE_HEADER)]
    rows.extend(f"{a},{b},{c},{x:.9g}" for a, b, c, x in zip(t.tolist(), src.tolist(), dst.tolist(), w.tolist()))
    return "\n".join(rows) + "\n"


def export(games, path) -> Path:
    """Write ``games`` in the canonical layout under ``path``; returns the manifest path."""
    root = Path(path)
    (root / "edges").mkdir(parents=True, exist_ok=True)
    entries = []
    for game in games:
        files = {}
        for layer in SOURCE_LAYERS:
            rel = f"edges/{game.game_id}.{layer.value}.csv"
            (root / rel).write_text(_format_edges(game.sequence.layer(layer)))
            files[layer.value] = rel
        entry = {
            "game_id": game.game_id,
            "n": game.n,
            "length": game.length,
            "outcome": game.outcome.value,
            "roles": [ROLE_CODES[r] for r in game.roles],
            "files": files,
        }
        if game.source_game is not None:
            entry["source_game"] = game.source_game
            entry["offset"] = game.offset
        entries.append(entry)
    manifest = {"format": FORMAT, "version": VERSION, "games": entries}
    out = root / MANIFEST
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


# -- canonical ingest -------------------------------------------------------

def _parse_role(value):
    v = str(value).strip()
    for role, code in ROLE_CODES.items():
        if v in (code, role.name, role.name.lower()):
            return role
    raise ValueError(f"unknown role {value!r}")


def _read_edges(path, n, T, diags, labels=None, columns=None, delimiter=",", header=True,
                time_offset=0):
    """Fill a ``(T, n, n)`` array from an edge file, logging every rejected line.

    Returns ``(array, lines, rejected)``.
    """
    arr = np.zeros((T, n, n))
    seen = set()
    lines = rejected = 0
    cols = columns or {"t": 0, "src": 1, "dst": 2, "weight": 3}
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        if header:
            first = next(reader, None)
            if first is not None and columns is None and [c.strip() for c in first] != EDGE_HEADER:
                diags.append(Diagnostic(str(path), 1, f"expected header {','.join(EDGE_HEADER)}"))
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            lines += 1
            try:
                t = int(float(row[cols["t"]])) - time_offset
                raw_src, raw_dst = row[cols["src"]].strip(), row[cols["dst"]].strip()
                if labels is None:
                    src, dst = int(raw_src), int(raw_dst)
                else:
                    if raw_src not in labels or raw_dst not in labels:
                        missing = raw_src if raw_src not in labels else raw_dst
                        raise ValueError(f"dangling participant {missing!r}")
                    src, dst = labels[raw_src], labels[raw_dst]
                w = 1.0 if cols.get("weight") is None else float(row[cols["weight"]])
            except (ValueError, IndexError) as exc:
                diags.append(Diagnostic(str(path), lineno, f"unparsable record: {exc}"))
                rejected += 1
                continue
            problem = None
            if not 0 <= src < n or not 0 <= dst < n:
                problem = f"dangling participant (src={src}, dst={dst}, n={n})"
            elif src == dst:
                problem = f"self-interaction for participant {src}"
            elif not 0 <= t < T:
                problem = f"t={t} outside [0, {T})"
            elif not (math.isfinite(w) and 0.0 <= w <= 1.0):
                problem = f"weight {w!r} outside [0, 1]"
            elif (t, src, dst) in seen:
                problem = f"duplicate record for (t={t}, src={src}, dst={dst})"
            if problem:
                diags.append(Diagnostic(str(path), lineno, problem))
                rejected += 1
                continue
            seen.add((t, src, dst))
            arr[t, src, dst] = w
    return arr, lines, rejected


def ingest(path, fmt="canonical", mapping=None, strict=True, group_size=None) -> Dataset:
    """Load a dataset directory (or manifest file).

    ``fmt`` is ``"canonical"`` or ``"column-mapped"`` (then ``mapping`` is a
    dict or a path to a JSON mapping file). In strict mode any rejected record
    raises :class:`IngestError` listing every problem with its file and line;
    otherwise bad records are skipped and returned as diagnostics.
    ``group_size=(lo, hi)`` additionally checks participant counts.
    """
    if fmt in ("column-mapped", "mapped", "ColumnMapped"):
        return ingest_mapped(path, mapping, strict=strict, group_size=group_size)
    if fmt not in ("canonical", "Canonical"):
        raise ValueError(f"unknown format {fmt!r}")
    root = Path(path)
    manifest_path = root if root.is_file() else root / MANIFEST
    root = manifest_path.parent
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestError([Diagnostic(str(manifest_path), 0, f"cannot read manifest: {exc}")])
    if manifest.get("format") != FORMAT:
        raise IngestError([Diagnostic(str(manifest_path), 0, f"not a {FORMAT} manifest")])

    diags, games = [], []
    total_lines = total_rejected = 0
    for k, entry in enumerate(manifest.get("games", [])):
        where = f"{manifest_path}#games[{k}]"
        try:
            n, T = int(entry["n"]), int(entry["length"])
            roles = [_parse_role(r) for r in entry["roles"]]
            outcome = Outcome(entry["outcome"])
            if len(roles) != n:
                raise ValueError(f"{len(roles)} roles listed for n={n}")
            paths = {l: root / entry["files"][l.value] for l in SOURCE_LAYERS}
            for p in paths.values():
                if not p.is_file():
                    raise ValueError(f"missing edge file {p}")
        except (KeyError, ValueError, TypeError) as exc:
            diags.append(Diagnostic(where, 0, str(exc)))
            continue
        layers = {}
        for layer, p in paths.items():
            arr, lines, rejected = _read_edges(p, n, T, diags)
            layers[layer] = arr
            total_lines += lines
            total_rejected += rejected
        game = _make_game(entry["game_id"], roles, outcome, layers, diags, where,
                          entry.get("source_game"), int(entry.get("offset", 0)), group_size)
        if game is not None:
            games.append(game)
    return _finish(games, diags, total_lines, total_rejected, strict)


def _make_game(game_id, roles, outcome, layers, diags, where, source_game=None, offset=0,
               group_size=None):
    if group_size is not None and not group_size[0] <= len(roles) <= group_size[1]:
        diags.append(Diagnostic(where, 0, f"{len(roles)} participants outside {group_size}"))
        return None
    try:
        seq = LayeredSequence(*(layers[l] for l in SOURCE_LAYERS))
        return GameRecord(str(game_id), tuple(roles), outcome, seq, source_game, offset)
    except ValueError as exc:
        diags.append(Diagnostic(where, 0, str(exc)))
        return None


def _finish(games, diags, lines, rejected, strict):
    if strict and diags:
        raise IngestError(diags)
    return Dataset(games, summarize(games, lines=lines, rejected=rejected), diags)


# -- column-mapped ingest ---------------------------------------------------

DEFAULT_MAPPING = {
    "roster": "roster.csv",
    "roster_columns": {"game": "game", "participant": "participant", "role": "role",
                       "outcome": "outcome"},
    "deceiver_values": ["D", "1", "deceiver", "spy", "true", "True"],
    "outcome_values": {"DW": ["DW", "deceivers_win", "1"], "DL": ["DL", "deceivers_lose", "0"]},
    "layers": {"look_at": "look_at/*.csv", "speak_to": "speak_to/*.csv",
               "listen_to": "listen_to/*.csv"},
    "game_pattern": r"(?P<game>[^/\\]+)\.[^.]+$",
    "columns": {"t": 0, "src": 1, "dst": 2, "weight": 3},
    "delimiter": ",",
    "header": True,
    "time_offset": 0,
}


def load_mapping(mapping) -> dict:
    if mapping is None:
        user = {}
    elif isinstance(mapping, dict):
        user = mapping
    else:
        user = json.loads(Path(mapping).read_text())
    merged = {**DEFAULT_MAPPING, **user}
    merged["roster_columns"] = {**DEFAULT_MAPPING["roster_columns"], **user.get("roster_columns", {})}
    merged["columns"] = {**DEFAULT_MAPPING["columns"], **user.get("columns", {})}
    return merged


def ingest_mapped(path, mapping=None, strict=True, group_size=None) -> Dataset:
    """Load an arbitrary release layout described by a column mapping.

    The mapping names a roster CSV (one row per participant with game, label,
    role and game outcome columns) and one file glob per layer. Edge files
    are matched to games by the ``game`` group of ``game_pattern``; edge
    endpoints are roster labels, indexed in roster order. A game's length is
    one past its largest time index over all layers.
    """
    root = Path(path)
    m = load_mapping(mapping)
    diags = []
    roster_path = root / m["roster"]
    rc = m["roster_columns"]
    deceiver_values = {str(v) for v in m["deceiver_values"]}
    outcome_values = {str(v): Outcome(k) for k, vs in m["outcome_values"].items() for v in vs}
    rosters = {}
    try:
        with open(roster_path, newline="") as fh:
            reader = csv.DictReader(fh, delimiter=m["delimiter"])
            for row in reader:
                try:
                    game = row[rc["game"]].strip()
                    entry = rosters.setdefault(game, {"labels": {}, "roles": [], "outcome": None})
                    label = row[rc["participant"]].strip()
                    if label in entry["labels"]:
                        raise ValueError(f"participant {label!r} listed twice")
                    entry["labels"][label] = len(entry["roles"])
                    entry["roles"].append(
                        Role.DECEIVER if row[rc["role"]].strip() in deceiver_values else Role.NON_DECEIVER
                    )
                    outcome = outcome_values.get(row[rc["outcome"]].strip())
                    if outcome is None:
                        raise ValueError(f"unknown outcome {row[rc['outcome']]!r}")
                    if entry["outcome"] not in (None, outcome):
                        raise ValueError(f"game {game} has conflicting outcomes")
                    entry["outcome"] = outcome
                except (KeyError, ValueError, AttributeError) as exc:
                    diags.append(Diagnostic(str(roster_path), reader.line_num, str(exc)))
    except OSError as exc:
        raise IngestError([Diagnostic(str(roster_path), 0, f"cannot read roster: {exc}")])

    pattern = re.compile(m["game_pattern"])
    files = {g: {} for g in rosters}
    for layer in SOURCE_LAYERS:
        for p in sorted(root.glob(m["layers"][layer.value])):
            match = pattern.search(p.relative_to(root).as_posix())
            game = match.group("game") if match else None
            if game not in rosters:
                diags.append(Diagnostic(str(p), 0, f"no roster entry for game {game!r}"))
                continue
            files[game][layer] = p

    games = []
    total_lines = total_rejected = 0
    cols = {k: v for k, v in m["columns"].items()}
    for game_id in sorted(rosters):
        entry = rosters[game_id]
        if len(files[game_id]) != len(SOURCE_LAYERS):
            missing = [l.value for l in SOURCE_LAYERS if l not in files[game_id]]
            diags.append(Diagnostic(str(root), 0, f"game {game_id}: no file for {missing}"))
            continue
        T = _mapped_length(files[game_id], cols, m)
        n = len(entry["roles"])
        layers = {}
        for layer, p in files[game_id].items():
            arr, lines, rejected = _read_edges(
                p, n, max(T, 1), diags, labels=entry["labels"], columns=cols,
                delimiter=m["delimiter"], header=m["header"], time_offset=m["time_offset"])
            layers[layer] = arr
            total_lines += lines
            total_rejected += rejected
        game = _make_game(game_id, entry["roles"], entry["outcome"], layers, diags,
                          f"{roster_path}:{game_id}", group_size=group_size)
        if game is not None:
            games.append(game)
    return _finish(games, diags, total_lines, total_rejected, strict)


def _mapped_length(paths, cols, m):
    last = -1
    for p in paths.values():
        with open(p, newline="") as fh:
            reader = csv.reader(fh, delimiter=m["delimiter"])
            if m["header"]:
                next(reader, None)
            for row in reader:
                try:
                    last = max(last, int(float(row[cols["t"]])) - m["time_offset"])
                except (ValueError, IndexError):
                    continue
    return last + 1
