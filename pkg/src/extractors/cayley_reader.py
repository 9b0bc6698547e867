#!/usr/bin/env python3
# src/extractors/cayley_reader.py
"""Read Cayley tables, J lines and action/cocycle grids from text files."""
import json
import logging
import sys
from pathlib import Path
from typing import Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from src.algebra.errors import MalformedTableError, NotAQuasigroupError
from src.algebra.hopf import HopfQuasigroupData, hopf_from_dict
from src.algebra.inverse_classify import right_inverse_permutation
from src.algebra.loops_core import CayleyTable, Loop, Permutation

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

PathLike = Union[str, Path]
STDIN = "-"


class ParsedCayley(NamedTuple):
    """A parsed table with the optional identity and J lines."""

    table: CayleyTable
    identity: Optional[int]
    j: Optional[Permutation]

    def as_loop(self) -> Loop:
        """The table as a loop; the identity is located when the file names none."""
        if self.identity is not None:
            return Loop(self.table, self.identity)
        return Loop.from_table(self.table)

    def loop_and_j(self) -> Tuple[Loop, Permutation]:
        """Loop plus J, defaulting to the right inverse x -> x\\δ."""
        loop = self.as_loop()
        return loop, self.j if self.j is not None else right_inverse_permutation(loop)


def read_text(path: PathLike) -> str:
    """File contents, or standard input when `path` is "-"."""
    if str(path) == STDIN:
        logger.debug("Reading Cayley text from stdin")
        return sys.stdin.read()
    p = Path(path)
    if not p.is_file():
        raise MalformedTableError(f"no such file: {p}")
    return p.read_text(encoding="utf-8")


def _content_lines(text: str) -> Iterator[Tuple[int, str]]:
    """(line number, stripped text) for non-blank lines with comments removed."""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def _ints(line: str, number: Optional[int], what: str) -> List[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise MalformedTableError(f"{what} must be integers: {line!r}", line_number=number)


def _check_range(values: List[int], n: int, number: Optional[int], what: str):
    for v in values:
        if not 0 <= v < n:
            raise MalformedTableError(f"{what} index {v} outside [0, {n})", line_number=number)


def parse_cayley_text(text: str, source: str = "<text>") -> ParsedCayley:
    """
    Parse the Cayley text format.

    The first content line is n, followed by n rows of n indices, then the
    optional lines ``identity: k`` and ``J: i0 ... i(n-1)``. '#' starts a comment.

    Raises:
        MalformedTableError: bad header, row length, index or trailer line (with line number).
        NotAQuasigroupError: the table is not a Latin square.
    """
    lines = list(_content_lines(text))
    if not lines:
        raise MalformedTableError(f"{source}: empty Cayley file")

    number, header = lines[0]
    size = _ints(header, number, "order")
    if len(size) != 1 or size[0] < 1:
        raise MalformedTableError(f"first line must be a positive order, got {header!r}", number)
    n = size[0]
    if len(lines) < n + 1:
        last = lines[-1][0]
        raise MalformedTableError(f"expected {n} rows, found {len(lines) - 1}", line_number=last)

    rows = []
    for number, line in lines[1 : n + 1]:
        row = _ints(line, number, "row entries")
        if len(row) != n:
            raise MalformedTableError(f"row has {len(row)} entries, expected {n}", number)
        _check_range(row, n, number, "row")
        rows.append(row)

    identity: Optional[int] = None
    j: Optional[Permutation] = None
    for number, line in lines[n + 1 :]:
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("identity", "j"):
            raise MalformedTableError(f"unexpected line {line!r}", line_number=number)
        if key == "identity":
            values = _ints(rest, number, "identity")
            if len(values) != 1:
                raise MalformedTableError("identity line takes one index", line_number=number)
            _check_range(values, n, number, "identity")
            identity = values[0]
        else:
            values = _ints(rest, number, "J")
            if len(values) != n:
                raise MalformedTableError(f"J has {len(values)} entries, expected {n}", number)
            _check_range(values, n, number, "J")
            if len(set(values)) != n:
                raise MalformedTableError("J is not a permutation", line_number=number)
            j = Permutation(tuple(values))

    table = CayleyTable(np.array(rows, dtype=np.int64))
    try:
        table.require_quasigroup()
    except NotAQuasigroupError as e:
        raise NotAQuasigroupError(f"{source}: {e}", cell=e.cell)
    parsed = ParsedCayley(table, identity, j)
    if identity is not None:
        try:
            parsed.as_loop()
        except MalformedTableError as e:
            raise MalformedTableError(f"{source}: {e}")
    logger.debug(f"Parsed {source}: order {n}, identity={identity}, J given={j is not None}")
    return parsed


def parse_cayley_file(path: PathLike) -> ParsedCayley:
    """Parse a Cayley file; "-" reads standard input."""
    return parse_cayley_text(read_text(path), source=str(path))


def parse_index_grid(
    text: str, shape: Tuple[int, int], bound: int, what: str = "map"
) -> np.ndarray:
    """
    A rows×cols grid of indices in [0, bound), one row per line.

    Used for action tables φ, ψ (indexed [s, r]) and cocycle values (indexed [x, x']).
    """
    rows_expected, cols = shape
    rows = []
    for number, line in _content_lines(text):
        row = _ints(line, number, f"{what} entries")
        if len(row) != cols:
            raise MalformedTableError(f"{what} row has {len(row)} entries, expected {cols}", number)
        _check_range(row, bound, number, what)
        rows.append(row)
    if len(rows) != rows_expected:
        raise MalformedTableError(f"{what} has {len(rows)} rows, expected {rows_expected}")
    return np.array(rows, dtype=np.int64).reshape(shape)


def parse_map_file(
    path: PathLike, shape: Tuple[int, int], bound: int, what: str = "map"
) -> np.ndarray:
    return parse_index_grid(read_text(path), shape, bound, what)


def parse_index_list(text: str, n: int, what: str = "map") -> np.ndarray:
    """Space- or comma-separated indices in [0, n), e.g. an embedding "0 2 4"."""
    values = _ints(text.replace(",", " "), None, what)
    _check_range(values, n, None, what)
    return np.array(values, dtype=np.int64)


def parse_hopf_file(path: PathLike) -> HopfQuasigroupData:
    """Structure constants in the sparse JSON form written by hopf_to_dict."""
    try:
        payload = json.loads(read_text(path))
    except json.JSONDecodeError as e:
        raise MalformedTableError(f"{path}: invalid JSON: {e.msg}", line_number=e.lineno)
    result = payload.get("result") if isinstance(payload, dict) else None
    if isinstance(result, dict) and "structure" in result:
        payload = result["structure"]
    return hopf_from_dict(payload)
