#!/usr/bin/env python3
# src/algebra/loops_core.py
"""Finite quasigroups, loops and piques stored as Cayley tables."""
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from math import lcm
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.algebra.errors import (
    MalformedTableError,
    NotAQuasigroupError,
    ResourceCapError,
)

logger = logging.getLogger(__name__)

MapLike = Union["Permutation", Sequence[int], np.ndarray]


def first_failure(mask: np.ndarray) -> Optional[Tuple[int, ...]]:
    """Return the lexicographically first index where `mask` is False."""
    bad = np.argwhere(~np.asarray(mask, dtype=bool))
    if bad.size == 0:
        return None
    return tuple(int(i) for i in bad[0])


def _latin_witness(arr: np.ndarray) -> Optional[Tuple[str, int, int]]:
    """Locate the first repeated entry, scanning rows before columns."""
    n = arr.shape[0]
    expected = np.arange(n)
    for axis, kind in ((1, "row"), (0, "column")):
        ok = (np.sort(arr, axis=axis) == (expected if axis == 1 else expected[:, None])).all(
            axis=axis
        )
        if ok.all():
            continue
        line = int(np.argmin(ok))
        values = arr[line] if axis == 1 else arr[:, line]
        seen = set()
        for pos, value in enumerate(values):
            if int(value) in seen:
                return kind, line, pos
            seen.add(int(value))
    return None


@dataclass(frozen=True, eq=False)
class CayleyTable:
    """
    Finite magma on the dense index set [0, n).

    Divisions are precomputed when the table is a Latin square:
    ``ldiv[a, b]`` is the x with a·x = b and ``rdiv[a, b]`` the y with y·a = b.
    """

    table: Any
    names: Optional[Tuple[str, ...]] = None
    ldiv: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    rdiv: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    latin_witness: Optional[Tuple[str, int, int]] = field(
        default=None, init=False, repr=False
    )

    def __post_init__(self):
        raw = np.asarray(self.table)
        if raw.dtype.kind not in "iu":
            if raw.dtype.kind == "f" and raw.size and np.all(raw == np.floor(raw)):
                raw = raw.astype(np.int64)
            elif raw.size:
                raise MalformedTableError(f"table entries must be integers, got {raw.dtype}")
        arr = np.array(raw, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise MalformedTableError(f"table must be a non-empty square array, got shape {arr.shape}")
        n = arr.shape[0]
        out_of_range = first_failure((arr >= 0) & (arr < n))
        if out_of_range is not None:
            row, col = out_of_range
            raise MalformedTableError(
                f"entry {arr[row, col]} at ({row}, {col}) outside [0, {n})"
            )
        if self.names is not None and len(self.names) != n:
            raise MalformedTableError(f"{len(self.names)} names for {n} elements")
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)

        witness = _latin_witness(arr)
        object.__setattr__(self, "latin_witness", witness)
        if witness is None:
            idx = np.arange(n)
            ldiv = np.empty_like(arr)
            ldiv[idx[:, None], arr] = idx[None, :]
            rdiv = np.empty_like(arr)
            rdiv[idx[None, :], arr] = idx[:, None]
            ldiv.setflags(write=False)
            rdiv.setflags(write=False)
            object.__setattr__(self, "ldiv", ldiv)
            object.__setattr__(self, "rdiv", rdiv)

    def __eq__(self, other):
        return isinstance(other, CayleyTable) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())

    @property
    def n(self) -> int:
        return int(self.table.shape[0])

    @property
    def is_quasigroup(self) -> bool:
        return self.latin_witness is None

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def require_quasigroup(self) -> "CayleyTable":
        """Raise NotAQuasigroupError naming the first repeated cell."""
        if self.latin_witness is not None:
            kind, line, pos = self.latin_witness
            cell = (line, pos) if kind == "row" else (pos, line)
            raise NotAQuasigroupError(
                f"not a Latin square: {kind} {line} repeats a value at cell {cell}",
                cell=cell,
            )
        return self


@dataclass(frozen=True)
class Permutation:
    """Bijection of [0, n) given by its image tuple."""

    image: Tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(i) for i in np.asarray(self.image).ravel())
        if sorted(image) != list(range(len(image))):
            raise MalformedTableError(f"not a permutation of [0, {len(image)}): {image}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.image, dtype=np.int64)

    def compose(self, other: "Permutation") -> "Permutation":
        """self ∘ other, i.e. x -> self(other(x))."""
        return Permutation(tuple(self.image[i] for i in other.image))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.image):
            inv[j] = i
        return Permutation(tuple(inv))

    def power(self, k: int) -> "Permutation":
        return _permutation_power(self, int(k))

    def order(self) -> int:
        seen = [False] * self.n
        result = 1
        for start in range(self.n):
            if seen[start]:
                continue
            length, i = 0, start
            while not seen[i]:
                seen[i] = True
                i = self.image[i]
                length += 1
            result = lcm(result, length)
        return result

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.image))


@lru_cache(maxsize=4096)
def _permutation_power(p: Permutation, k: int) -> Permutation:
    base = p if k >= 0 else p.inverse()
    arr = np.arange(p.n)
    step = base.as_array()
    for _ in range(abs(k) % p.order()):
        arr = step[arr]
    return Permutation(tuple(arr))


def _map_array(f: MapLike, n: int, what: str = "map") -> np.ndarray:
    """Normalize a map given as Permutation or index sequence."""
    arr = f.as_array() if isinstance(f, Permutation) else np.asarray(f, dtype=np.int64)
    if arr.shape != (n,):
        raise MalformedTableError(f"{what} must have {n} entries, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Loop:
    """Quasigroup with a two-sided identity `delta`."""

    q: CayleyTable
    delta: int

    def __post_init__(self):
        self.q.require_quasigroup()
        t, d = self.q.table, int(self.delta)
        if not 0 <= d < self.q.n:
            raise MalformedTableError(f"identity {d} outside [0, {self.q.n})")
        object.__setattr__(self, "delta", d)
        idx = np.arange(self.q.n)
        bad = first_failure((t[d, :] == idx) & (t[:, d] == idx))
        if bad is not None:
            raise MalformedTableError(f"{d} is not a two-sided identity (fails at x={bad[0]})")

    @classmethod
    def from_table(cls, table: Any) -> "Loop":
        """Build a loop, locating the identity automatically."""
        q = table if isinstance(table, CayleyTable) else CayleyTable(table)
        delta = find_identity(q)
        if delta is None:
            raise MalformedTableError("table has no two-sided identity")
        return cls(q, delta)

    @property
    def n(self) -> int:
        return self.q.n

    @property
    def table(self) -> np.ndarray:
        return self.q.table

    def mul(self, a: int, b: int) -> int:
        return int(self.q.table[a, b])

    def __eq__(self, other):
        return isinstance(other, Loop) and self.delta == other.delta and self.q == other.q

    def __hash__(self):
        return hash((self.delta, self.q))


@dataclass(frozen=True, eq=False)
class Pique:
    """Quasigroup pointed at an idempotent element."""

    q: CayleyTable
    delta: int

    def __post_init__(self):
        self.q.require_quasigroup()
        d = int(self.delta)
        object.__setattr__(self, "delta", d)
        if not 0 <= d < self.q.n or self.q.table[d, d] != d:
            raise MalformedTableError(f"{d} is not an idempotent element")

    @property
    def n(self) -> int:
        return self.q.n


def table_of(obj: Union[CayleyTable, Loop, Pique, np.ndarray]) -> np.ndarray:
    """Raw index table of any carrier."""
    if isinstance(obj, CayleyTable):
        return obj.table
    if isinstance(obj, (Loop, Pique)):
        return obj.q.table
    return np.asarray(obj, dtype=np.int64)


def cayley_of(obj: Union[CayleyTable, Loop, Pique]) -> CayleyTable:
    return obj if isinstance(obj, CayleyTable) else obj.q


def is_latin_square(t: CayleyTable) -> bool:
    """True iff every row and every column of `t` is a permutation."""
    return cayley_of(t).is_quasigroup


def left_divide(q: Union[CayleyTable, Loop], a: int, b: int) -> int:
    """Unique x with a·x = b."""
    table = cayley_of(q).require_quasigroup()
    return int(table.ldiv[a, b])


def right_divide(q: Union[CayleyTable, Loop], a: int, b: int) -> int:
    """Unique y with y·a = b."""
    table = cayley_of(q).require_quasigroup()
    return int(table.rdiv[a, b])


def left_inverse(l: Loop, x: int) -> int:
    """x^λ = δ/x, so that x^λ·x = δ."""
    return right_divide(l, x, l.delta)


def right_inverse(l: Loop, x: int) -> int:
    """x^σ = x\\δ, so that x·x^σ = δ."""
    return left_divide(l, x, l.delta)


def find_identity(q: Union[CayleyTable, Loop]) -> Optional[int]:
    t = table_of(q)
    idx = np.arange(t.shape[0])
    for d in range(t.shape[0]):
        if np.array_equal(t[d, :], idx) and np.array_equal(t[:, d], idx):
            return d
    return None


def associativity_witness(q: Union[CayleyTable, Loop]) -> Optional[Tuple[int, ...]]:
    t = table_of(q)
    n = t.shape[0]
    idx = np.arange(n)
    lhs = t[t[:, :, None], idx[None, None, :]]
    rhs = t[idx[:, None, None], t[None, :, :]]
    return first_failure(lhs == rhs)


def is_associative(q: Union[CayleyTable, Loop]) -> bool:
    return associativity_witness(q) is None


def is_commutative(q: Union[CayleyTable, Loop]) -> bool:
    t = table_of(q)
    return bool(np.array_equal(t, t.T))


def is_group(q: Union[CayleyTable, Loop]) -> bool:
    table = cayley_of(q)
    return table.is_quasigroup and find_identity(table) is not None and is_associative(table)


def is_abelian_group(q: Union[CayleyTable, Loop]) -> bool:
    return is_group(q) and is_commutative(q)


def has_two_sided_inverses(l: Loop) -> bool:
    """x^λ = x^σ for every x."""
    d = l.delta
    return bool(np.array_equal(l.q.rdiv[:, d], l.q.ldiv[:, d]))


def left_translation(q: Union[CayleyTable, Loop], a: int) -> Permutation:
    return Permutation(tuple(table_of(q)[a]))


def right_translation(q: Union[CayleyTable, Loop], a: int) -> Permutation:
    return Permutation(tuple(table_of(q)[:, a]))


def cloop(p: Pique) -> Loop:
    """Corresponding loop of a pique: x∗y = (x/δ)(δ\\y)."""
    t, d = p.q.table, p.delta
    x_over_d = p.q.rdiv[d, :]
    d_under_y = p.q.ldiv[d, :]
    star = t[x_over_d[:, None], d_under_y[None, :]]
    logger.debug(f"Built cloop of order {p.n} at idempotent {d}")
    return Loop(CayleyTable(star), d)


def delta_translations(p: Pique) -> Tuple[Permutation, Permutation]:
    """The maps x -> xδ and y -> δy of a pique."""
    return right_translation(p.q, p.delta), left_translation(p.q, p.delta)


def pique_from_cloop(
    b: Loop, right_delta: Permutation, left_delta: Permutation
) -> Pique:
    """Recover the pique multiplication xy := (xδ)∗(δy) from its cloop."""
    t = b.table
    recovered = t[right_delta.as_array()[:, None], left_delta.as_array()[None, :]]
    return Pique(CayleyTable(recovered), b.delta)


def is_homotopy(
    alpha: MapLike,
    beta: MapLike,
    gamma: MapLike,
    q1: Union[CayleyTable, Loop],
    q2: Union[CayleyTable, Loop],
) -> bool:
    """True iff α(x)β(y) = γ(xy) for all x, y."""
    t1, t2 = table_of(q1), table_of(q2)
    n = t1.shape[0]
    a = _map_array(alpha, n, "alpha")
    b = _map_array(beta, n, "beta")
    g = _map_array(gamma, n, "gamma")
    if max(a.max(), b.max(), g.max()) >= t2.shape[0]:
        return False
    return bool(np.array_equal(t2[a[:, None], b[None, :]], g[t1]))


def is_homomorphism(
    f: MapLike, q1: Union[CayleyTable, Loop], q2: Union[CayleyTable, Loop]
) -> bool:
    return is_homotopy(f, f, f, q1, q2)


def is_isotopy(
    alpha: MapLike,
    beta: MapLike,
    gamma: MapLike,
    q1: Union[CayleyTable, Loop],
    q2: Union[CayleyTable, Loop],
) -> bool:
    """Homotopy whose three maps are bijections."""
    n2 = table_of(q2).shape[0]
    for m in (alpha, beta, gamma):
        arr = m.as_array() if isinstance(m, Permutation) else np.asarray(m)
        if arr.size != n2 or sorted(arr.tolist()) != list(range(n2)):
            return False
    return is_homotopy(alpha, beta, gamma, q1, q2)


def is_automorphism(q: Union[CayleyTable, Loop], p: Permutation) -> bool:
    return is_homomorphism(p, q, q)


def find_isomorphism(
    q1: Union[CayleyTable, Loop], q2: Union[CayleyTable, Loop]
) -> Optional[Permutation]:
    """First bijection f with f(xy) = f(x)f(y), by brute force (n ≤ 8)."""
    t1, t2 = table_of(q1), table_of(q2)
    n = t1.shape[0]
    if t2.shape[0] != n:
        return None
    if n > 8:
        raise ResourceCapError(f"isomorphism search limited to order 8, got {n}")
    d1, d2 = find_identity(t1), find_identity(t2)
    for image in itertools.permutations(range(n)):
        if d1 is not None and d2 is not None and image[d1] != d2:
            continue
        f = np.array(image)
        if np.array_equal(t2[f[:, None], f[None, :]], f[t1]):
            return Permutation(image)
    return None


def restrict_to_subset(q: Union[CayleyTable, Loop], subset: Sequence[int]) -> CayleyTable:
    """Sub-table on `subset`, re-indexed by position; the subset must be closed."""
    t = table_of(q)
    emb = np.asarray(subset, dtype=np.int64)
    if len(set(emb.tolist())) != emb.size:
        raise MalformedTableError(f"subset has repeated elements: {list(subset)}")
    pos = np.full(t.shape[0], -1, dtype=np.int64)
    pos[emb] = np.arange(emb.size)
    sub = pos[t[emb[:, None], emb[None, :]]]
    bad = first_failure(sub >= 0)
    if bad is not None:
        raise MalformedTableError(
            f"subset not closed: {emb[bad[0]]}·{emb[bad[1]]} leaves it"
        )
    return CayleyTable(sub)


def pair_index(a: int, b: int, nb: int) -> int:
    return a * nb + b


def split_index(i: int, nb: int) -> Tuple[int, int]:
    return divmod(i, nb)


def table_direct_product(
    q1: Union[CayleyTable, Loop], q2: Union[CayleyTable, Loop]
) -> CayleyTable:
    """Componentwise product on index pairs (a, b) -> a*n2 + b."""
    t1, t2 = table_of(q1), table_of(q2)
    n1, n2 = t1.shape[0], t2.shape[0]
    big = t1[:, None, :, None] * n2 + t2[None, :, None, :]
    return CayleyTable(big.reshape(n1 * n2, n1 * n2))


def permutation_product(p1: Permutation, p2: Permutation) -> Permutation:
    """p1 × p2 acting on index pairs."""
    a, b = p1.as_array(), p2.as_array()
    return Permutation(tuple((a[:, None] * p2.n + b[None, :]).ravel()))


def loop_direct_product(l1: Loop, l2: Loop) -> Loop:
    return Loop(table_direct_product(l1, l2), pair_index(l1.delta, l2.delta, l2.n))


def permutation_closure(
    generators: Sequence[Permutation], n: int, cap: int
) -> List[Permutation]:
    """
    Group generated by `generators` inside Sym(n), breadth first from the identity.

    Raises:
        ResourceCapError: when more than `cap` elements are reached.
    """
    identity = Permutation.identity(n)
    elements: List[Permutation] = [identity]
    seen: Dict[Tuple[int, ...], int] = {identity.image: 0}
    queue = deque([identity])
    gens = [g.as_array() for g in generators]
    while queue:
        current = np.array(queue.popleft().image)
        for g in gens:
            image = tuple(int(v) for v in g[current])
            if image in seen:
                continue
            if len(elements) >= cap:
                raise ResourceCapError(
                    f"permutation closure exceeded cap {cap}", partial_size=len(elements)
                )
            seen[image] = len(elements)
            perm = Permutation(image)
            elements.append(perm)
            queue.append(perm)
    return elements
