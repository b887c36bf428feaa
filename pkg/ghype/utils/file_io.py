"""
File Formats
------------
Edge-list TSV ingestion and JSON matrix files.

Edge lists:
- One edge per line: src<TAB>dst[<TAB>multiplicity], multiplicity defaults to 1.
- Lines starting with '#' and blank lines are skipped.
- Labels are arbitrary strings mapped to dense indices in first-appearance order.
- Undirected files list every edge once; (v, v, w) is a self-loop of multiplicity w.

Matrix files:
    {"n": int, "directed": bool, "labels": [str], "data": [row-major numbers]}
"""

import json
import sys
from dataclasses import dataclass
from typing import Iterable, List, Optional, TextIO

import numpy as np
import pandas as pd

from ghype.exceptions import InputError
from ghype.models.graph import MultiGraph, build_graph
from ghype.utils.logging_config import setup_logger

log = setup_logger("file_io")

EDGE_COLUMNS = ["src", "dst", "multiplicity"]


@dataclass(frozen=True)
class LabelledGraph:
    graph: MultiGraph
    labels: List[str]


@dataclass(frozen=True)
class MatrixFile:
    n: int
    directed: bool
    labels: List[str]
    data: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.data.reshape(self.n, self.n)


def _open_text(path: str) -> TextIO:
    if path == "-":
        return sys.stdin
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"Cannot open {path}: {exc.strerror}") from exc


def _first_line(mask: pd.Series) -> int:
    return int(mask.index[mask.to_numpy()][0])


def parse_edge_lines(lines: Iterable[str], source: str = "<input>") -> pd.DataFrame:
    """
    Parse edge-list lines into a table with columns src, dst, multiplicity, line.

    Raises:
        InputError: naming the offending line for bad column counts,
            non-integer or non-positive multiplicities.
    """
    raw = pd.Series(list(lines), dtype=object)
    raw.index = pd.RangeIndex(1, len(raw) + 1)
    text = raw.str.rstrip("\r\n")
    text = text[text.str.strip().ne("") & ~text.str.lstrip().str.startswith("#")]
    if text.empty:
        return pd.DataFrame(columns=EDGE_COLUMNS + ["line"])

    fields = text.str.split("\t", expand=True)
    widths = fields.notna().sum(axis=1)
    bad = ~widths.isin([2, 3])
    if bad.any():
        lineno = _first_line(bad)
        raise InputError(f"{source}:{lineno}: expected 2 or 3 tab-separated columns, got {widths[lineno]}")
    width = int(widths.iloc[0])
    mixed = widths.ne(width)
    if mixed.any():
        lineno = _first_line(mixed)
        raise InputError(f"{source}:{lineno}: {widths[lineno]} columns, earlier lines have {width}")

    src, dst = fields[0].str.strip(), fields[1].str.strip()
    empty = src.eq("") | dst.eq("")
    if empty.any():
        raise InputError(f"{source}:{_first_line(empty)}: empty vertex label")

    if width == 3:
        counts = fields[2].str.strip()
        not_int = ~counts.str.fullmatch(r"[+-]?\d+")
        if not_int.any():
            lineno = _first_line(not_int)
            raise InputError(f"{source}:{lineno}: multiplicity {fields[2][lineno]!r} is not an integer")
        multiplicity = counts.astype(np.int64)
        non_positive = multiplicity.le(0)
        if non_positive.any():
            lineno = _first_line(non_positive)
            raise InputError(f"{source}:{lineno}: multiplicity must be positive, got {multiplicity[lineno]}")
    else:
        multiplicity = pd.Series(1, index=text.index, dtype=np.int64)

    return pd.DataFrame(
        {"src": src, "dst": dst, "multiplicity": multiplicity, "line": text.index.to_numpy()}
    ).reset_index(drop=True)


def read_edge_list(path: str) -> pd.DataFrame:
    """Read an edge-list file ("-" for stdin) into an edge table."""
    stream = _open_text(path)
    try:
        edges = parse_edge_lines(stream, source=path)
    finally:
        if stream is not sys.stdin:
            stream.close()
    log.info(f"Read {len(edges)} edge lines from {path}")
    return edges


def edges_to_graph(edges: pd.DataFrame, directed: bool) -> LabelledGraph:
    """Map labels to indices in first-appearance order and accumulate the multigraph."""
    labels = list(dict.fromkeys(edges[["src", "dst"]].to_numpy().ravel().tolist()))
    index = {label: i for i, label in enumerate(labels)}
    triples = zip(
        edges["src"].map(index).tolist(),
        edges["dst"].map(index).tolist(),
        edges["multiplicity"].tolist(),
    )
    graph = build_graph(triples, n=len(labels), directed=directed)
    return LabelledGraph(graph=graph, labels=labels)


def load_graph(path: str, directed: bool) -> LabelledGraph:
    return edges_to_graph(read_edge_list(path), directed)


def edge_table(g: MultiGraph, labels: List[str]) -> pd.DataFrame:
    """Edges of g as a labelled table, one row per dyad with edges."""
    rows = [(labels[i], labels[j], w) for i, j, w in g.edges()]
    return pd.DataFrame.from_records(rows, columns=EDGE_COLUMNS)


def write_edge_blocks(graphs: Iterable[MultiGraph], labels: List[str], stream: TextIO) -> int:
    """Write graphs as '# sample k' headed edge-list blocks; returns the block count."""
    count = 0
    for k, g in enumerate(graphs):
        stream.write(f"# sample {k}\n")
        table = edge_table(g, labels)
        if len(table):
            stream.write(table.to_csv(sep="\t", header=False, index=False, lineterminator="\n"))
        count += 1
    return count


def matrix_payload(matrix: np.ndarray, labels: List[str], directed: bool) -> dict:
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    if len(labels) != n:
        raise InputError(f"{len(labels)} labels for a {n}x{n} matrix")
    values = matrix.reshape(-1).tolist()
    return {"n": n, "directed": bool(directed), "labels": list(labels), "data": values}


def write_matrix(path: Optional[str], matrix: np.ndarray, labels: List[str], directed: bool) -> None:
    """Write a MatrixFile to path, or to stdout when path is None or '-'."""
    text = json.dumps(matrix_payload(matrix, labels, directed), indent=2)
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    log.info(f"Wrote {len(labels)}x{len(labels)} matrix to {path}")


def parse_matrix(payload: dict, source: str = "<matrix>") -> MatrixFile:
    """
    Validate a decoded MatrixFile object.

    Raises:
        InputError: missing keys, wrong data length, label count mismatch,
            non-finite or negative entries.
    """
    missing = [key for key in ("n", "directed", "labels", "data") if key not in payload]
    if missing:
        raise InputError(f"{source}: missing key(s) {', '.join(missing)}")
    n = payload["n"]
    if not isinstance(n, int) or n < 0:
        raise InputError(f"{source}: n must be a non-negative integer, got {n!r}")
    if not isinstance(payload["directed"], bool):
        raise InputError(f"{source}: directed must be true or false")
    labels = [str(label) for label in payload["labels"]]
    if len(labels) != n:
        raise InputError(f"{source}: {len(labels)} labels for n={n}")
    try:
        data = np.asarray(payload["data"], dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise InputError(f"{source}: data must be a flat list of numbers") from None
    if data.size != n * n:
        raise InputError(f"{source}: data holds {data.size} values, expected n^2 = {n * n}")
    if not np.isfinite(data).all() or (data < 0).any():
        raise InputError(f"{source}: entries must be finite and non-negative")
    return MatrixFile(n=n, directed=payload["directed"], labels=labels, data=data)


def read_matrix(path: str) -> MatrixFile:
    stream = _open_text(path)
    try:
        payload = json.load(stream)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    finally:
        if stream is not sys.stdin:
            stream.close()
    if not isinstance(payload, dict):
        raise InputError(f"{path}: expected a JSON object")
    return parse_matrix(payload, source=path)


def integer_matrix(mf: MatrixFile, what: str) -> np.ndarray:
    """The matrix as int64, rejecting fractional entries."""
    matrix = mf.matrix
    rounded = np.rint(matrix)
    if not np.array_equal(matrix, rounded):
        raise InputError(f"{what} entries must be integers")
    return rounded.astype(np.int64)
