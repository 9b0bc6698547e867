#!/usr/bin/env python3
# src/algebra/search.py
"""Exhaustive desk-scale searches over cocycles, action pairs and small loops."""
import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from config.config import cfg
from src.algebra.constructions import (
    COCYCLE_CONSTRAINTS,
    ActionPair,
    CocycleMap,
    group_inverse,
    verify_matched_pair,
    verify_semidirect,
)
from src.algebra.errors import SearchCapError
from src.algebra.loops_core import (
    CayleyTable,
    Loop,
    Permutation,
    Pique,
    cloop,
    is_abelian_group,
    is_automorphism,
    left_translation,
    permutation_closure,
    right_translation,
)

logger = logging.getLogger(__name__)


@dataclass
class SearchSpec:
    """Carriers, constraints and caps of one search."""

    carriers: Tuple[int, ...] = ()
    constraints: Tuple[str, ...] = ()
    m: Optional[int] = None
    max_candidates: int = field(default_factory=lambda: cfg.max_candidates)
    budget: float = field(default_factory=lambda: cfg.budget)

    def __post_init__(self):
        if self.max_candidates <= 0 or self.budget <= 0:
            raise ValueError(
                f"caps must be positive, got max_candidates={self.max_candidates}, budget={self.budget}"
            )
        unknown = [c for c in self.constraints if c not in COCYCLE_CONSTRAINTS]
        if unknown:
            raise ValueError(f"unknown constraints {unknown}; known: {sorted(COCYCLE_CONSTRAINTS)}")
        self.constraints = tuple(self.constraints)


@dataclass
class SearchResult:
    """Results in lexicographic order; `complete` is False when a cap cut the search short."""

    items: List[Any] = field(default_factory=list)
    count: int = 0
    examined: int = 0
    complete: bool = True
    elapsed: float = 0.0

    @property
    def partial(self) -> bool:
        return not self.complete

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


class _Budget:
    """Candidate and wall-clock caps shared by the search loops."""

    def __init__(self, spec: SearchSpec):
        self.spec = spec
        self.start = time.monotonic()
        self.examined = 0

    def spend(self) -> bool:
        self.examined += 1
        if self.examined > self.spec.max_candidates:
            return False
        return time.monotonic() - self.start <= self.spec.budget

    def finish(self, result: SearchResult, complete: bool, what: str) -> SearchResult:
        result.examined = self.examined
        result.complete = complete
        result.elapsed = time.monotonic() - self.start
        if not complete:
            logger.warning(f"{what} stopped at a cap after {self.examined} candidates; results are partial")
        return result


def _progress(itr, progress: bool, desc: str, total: Optional[int] = None):
    return tqdm(itr, desc=desc, total=total) if progress else itr


# ---------------------------------------------------------------------------
# Cocycles
# ---------------------------------------------------------------------------


def _cell_classes(g: Loop, constraints: Sequence[str]) -> Tuple[List[List[int]], List[int]]:
    """Free classes of cells that must share one value, and the cells forced to zero."""
    n = g.n
    cells = n * n
    parent = list(range(cells))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    forced = set()
    e = g.delta
    inv = group_inverse(g)
    if "quasi-0" in constraints:
        forced.update(e * n + x for x in range(n))
        forced.update(x * n + e for x in range(n))
    if "quasi-I" in constraints:
        forced.update(x * n + int(inv[x]) for x in range(n))
    if "quasi-II" in constraints:
        for x, xp in itertools.product(range(n), repeat=2):
            union(x * n + xp, int(g.table[inv[xp], inv[x]]) * n + x)

    classes: dict = {}
    for c in range(cells):
        classes.setdefault(find(c), []).append(c)
    zero_roots = {find(c) for c in forced}
    free = [members for root, members in sorted(classes.items()) if root not in zero_roots]
    zeroed = sorted(c for root in zero_roots for c in classes[root])
    return free, zeroed


def _passes(c: CocycleMap, constraints: Sequence[str]) -> bool:
    return all(COCYCLE_CONSTRAINTS[name](c).ok for name in constraints)


def search_cocycles(
    g: Loop,
    v: Loop,
    constraints: Sequence[str],
    spec: Optional[SearchSpec] = None,
    pruned: bool = True,
    count_only: bool = False,
    action: Optional[Any] = None,
    progress: bool = False,
) -> SearchResult:
    """
    Every φ: G×G → V satisfying the named constraints.

    Args:
        g, v: The group G and the abelian group V.
        constraints: Names from COCYCLE_CONSTRAINTS.
        spec: Caps; defaults to the configured ones.
        pruned: Fix the cells forced by quasi-0, quasi-I and quasi-II before enumerating.
        count_only: Count the maps without keeping them.
        action: Optional right action ◁ for the cocycle and action constraints.

    Returns:
        SearchResult of CocycleMap in lexicographic order of the flattened value table.
    """
    spec = SearchSpec(constraints=tuple(constraints)) if spec is None else spec
    unknown = [c for c in constraints if c not in COCYCLE_CONSTRAINTS]
    if unknown:
        raise ValueError(f"unknown constraints {unknown}; known: {sorted(COCYCLE_CONSTRAINTS)}")
    n, nv = g.n, v.n
    budget = _Budget(spec)
    result = SearchResult()

    if pruned:
        free, _ = _cell_classes(g, constraints)
        residual = [c for c in constraints if c not in ("quasi-0", "quasi-I", "quasi-II")]
    else:
        free = [[c] for c in range(n * n)]
        residual = list(constraints)

    total = nv ** len(free)
    if count_only and not residual:
        result.count = total
        logger.info(f"Counted {total} maps {n}x{n} -> {nv} without enumeration")
        return budget.finish(result, True, "cocycle count")

    values = np.full(n * n, v.delta, dtype=np.int64)
    complete = True
    for assignment in _progress(itertools.product(range(nv), repeat=len(free)), progress, "cocycles", total):
        if not budget.spend():
            complete = False
            break
        for members, value in zip(free, assignment):
            values[members] = value
        candidate = CocycleMap(g, v, values.reshape(n, n).copy(), action)
        if _passes(candidate, residual if pruned else constraints):
            result.count += 1
            if not count_only:
                result.items.append(candidate)
    result.items.sort(key=lambda c: tuple(c.values.ravel()))
    logger.info(f"Cocycle search {n}x{n} -> {nv} with {list(constraints)}: {result.count} maps")
    return budget.finish(result, complete, "cocycle search")


# ---------------------------------------------------------------------------
# Action pairs
# ---------------------------------------------------------------------------


def _fixing_permutations(n: int, fixed: int) -> List[Tuple[int, ...]]:
    rest = [k for k in range(n) if k != fixed]
    out = []
    for perm in itertools.permutations(rest):
        image = list(perm)
        image.insert(fixed, fixed)
        out.append(tuple(image))
    return out


def _phi_candidates(r: Loop, s: Loop) -> Iterator[np.ndarray]:
    """φ with φ(δ,·) = id and every row φ(s,·) a permutation fixing δ."""
    rows = _fixing_permutations(r.n, r.delta)
    others = [k for k in range(s.n) if k != s.delta]
    for choice in itertools.product(rows, repeat=len(others)):
        phi = np.empty((s.n, r.n), dtype=np.int64)
        phi[s.delta] = np.arange(r.n)
        for k, row in zip(others, choice):
            phi[k] = row
        yield phi


def _psi_candidates(r: Loop, s: Loop) -> Iterator[np.ndarray]:
    """ψ with ψ(·,δ) = id and every column ψ(·,r) a permutation fixing δ."""
    cols = _fixing_permutations(s.n, s.delta)
    others = [k for k in range(r.n) if k != r.delta]
    for choice in itertools.product(cols, repeat=len(others)):
        psi = np.empty((s.n, r.n), dtype=np.int64)
        psi[:, r.delta] = np.arange(s.n)
        for k, col in zip(others, choice):
            psi[:, k] = col
        yield psi


def _unit_fixed(r: Loop, s: Loop, values: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Unit laws filled in; `values` fills the remaining φ cells then the ψ cells."""
    phi = np.empty((s.n, r.n), dtype=np.int64)
    psi = np.empty((s.n, r.n), dtype=np.int64)
    phi[s.delta] = np.arange(r.n)
    phi[:, r.delta] = r.delta
    psi[s.delta] = s.delta
    psi[:, r.delta] = np.arange(s.n)
    free = [(a, b) for a in range(s.n) for b in range(r.n) if a != s.delta and b != r.delta]
    k = len(free)
    for (a, b), value in zip(free, values[:k]):
        phi[a, b] = value
    for (a, b), value in zip(free, values[k:]):
        psi[a, b] = value
    return phi, psi


def _unpruned_actions(r: Loop, s: Loop) -> Tuple[Iterator[Tuple[np.ndarray, np.ndarray]], int]:
    k = (s.n - 1) * (r.n - 1)
    ranges = [range(r.n)] * k + [range(s.n)] * k
    total = (r.n ** k) * (s.n ** k)
    return (_unit_fixed(r, s, values) for values in itertools.product(*ranges)), total


def search_matched_actions(
    r: Loop,
    j_r: Permutation,
    s: Loop,
    j_s: Permutation,
    m: int,
    spec: Optional[SearchSpec] = None,
    pruned: bool = True,
    strict: bool = False,
    progress: bool = False,
) -> SearchResult:
    """
    Every action pair for which R ⋈ S passes its hypotheses and the m-inverse scan.

    With `pruned`, φ rows and ψ columns range over permutations fixing δ, which the
    unit laws together with the I-I and II laws force; otherwise every unit-respecting
    table is tried.
    """
    spec = SearchSpec(carriers=(r.n, s.n), m=m) if spec is None else spec
    budget = _Budget(spec)
    result = SearchResult()
    if pruned:
        phis = list(_phi_candidates(r, s))
        psis = list(_psi_candidates(r, s))
        candidates = itertools.product(phis, psis)
        total = len(phis) * len(psis)
    else:
        candidates, total = _unpruned_actions(r, s)

    complete = True
    for phi, psi in _progress(candidates, progress, "actions", total):
        if not budget.spend():
            complete = False
            break
        pair = ActionPair(phi, psi)
        outcome = verify_matched_pair(r, j_r, s, j_s, pair, m, strict=strict)
        if outcome.report.ok:
            result.items.append(pair)
    result.items.sort(key=lambda a: (tuple(a.phi.ravel()), tuple(a.psi.ravel())))
    result.count = len(result.items)
    logger.info(f"Matched action search |R|={r.n}, |S|={s.n}, m={m}: {result.count} pairs")
    return budget.finish(result, complete, "matched action search")


def search_semidirect_actions(
    r: Loop,
    j_r: Permutation,
    s: Loop,
    j_s: Permutation,
    m: int,
    spec: Optional[SearchSpec] = None,
    strict: bool = False,
    progress: bool = False,
) -> SearchResult:
    """Every φ with ψ trivial for which R ⋊ S passes its hypotheses and the m-inverse scan."""
    spec = SearchSpec(carriers=(r.n, s.n), m=m) if spec is None else spec
    budget = _Budget(spec)
    result = SearchResult()
    complete = True
    for phi in _progress(_phi_candidates(r, s), progress, "semi-direct actions"):
        if not budget.spend():
            complete = False
            break
        outcome = verify_semidirect(r, j_r, s, j_s, phi, m, strict=strict)
        if outcome.report.ok:
            result.items.append(ActionPair(phi, ActionPair.trivial(r.n, s.n).psi))
    result.items.sort(key=lambda a: tuple(a.phi.ravel()))
    result.count = len(result.items)
    logger.info(f"Semi-direct action search |R|={r.n}, |S|={s.n}, m={m}: {result.count} maps")
    return budget.finish(result, complete, "semi-direct action search")


# ---------------------------------------------------------------------------
# Loops
# ---------------------------------------------------------------------------


def _fill_normalized(
    n: int, choose: Callable[[List[int]], List[int]]
) -> Iterator[np.ndarray]:
    """Backtracking over normalized Latin squares; `choose` orders the candidate symbols."""
    table = np.zeros((n, n), dtype=np.int64)
    table[0] = np.arange(n)
    table[:, 0] = np.arange(n)
    full = (1 << n) - 1
    row_used = [1 << i for i in range(n)]
    col_used = [1 << j for j in range(n)]
    row_used[0] = col_used[0] = full
    cells = [(i, j) for i in range(1, n) for j in range(1, n)]

    def fill(k: int) -> Iterator[np.ndarray]:
        if k == len(cells):
            yield table.copy()
            return
        i, j = cells[k]
        free = ~(row_used[i] | col_used[j]) & full
        for value in choose([v for v in range(n) if free >> v & 1]):
            bit = 1 << value
            table[i, j] = value
            row_used[i] |= bit
            col_used[j] |= bit
            yield from fill(k + 1)
            row_used[i] &= ~bit
            col_used[j] &= ~bit

    yield from fill(0)


def enumerate_loops(
    n: int, predicate: Optional[Callable[[Loop], bool]] = None, progress: bool = False
) -> Iterator[Loop]:
    """
    Every normalized loop of order n (identity 0, first row and column in order), once each.

    Raises:
        SearchCapError: n exceeds the exhaustive limit; use sample_loops instead.
    """
    if n < 1:
        raise ValueError(f"order must be positive, got {n}")
    if n > cfg.exhaustive_order:
        raise SearchCapError(
            f"exhaustive enumeration is limited to order {cfg.exhaustive_order}; "
            f"use sample_loops for n={n}"
        )
    count = 0
    for arr in _progress(_fill_normalized(n, lambda vals: vals), progress, f"loops of order {n}"):
        loop = Loop(CayleyTable(arr), 0)
        if predicate is None or predicate(loop):
            count += 1
            yield loop
    logger.debug(f"Enumerated {count} normalized loops of order {n}")


def count_loops(n: int, predicate: Optional[Callable[[Loop], bool]] = None) -> int:
    return sum(1 for _ in enumerate_loops(n, predicate))


def sample_loops(n: int, count: int, seed: Optional[int] = None) -> List[Loop]:
    """Random normalized loops by randomized backtracking; repeats are possible at small n."""
    if n < 1 or count < 0:
        raise ValueError(f"need n ≥ 1 and count ≥ 0, got n={n}, count={count}")
    rng = np.random.default_rng(seed)

    def shuffled(vals: List[int]) -> List[int]:
        return [int(x) for x in rng.permutation(vals)] if vals else vals

    loops = []
    for _ in range(count):
        arr = next(_fill_normalized(n, shuffled))
        loops.append(Loop(CayleyTable(arr), 0))
    logger.debug(f"Sampled {count} loops of order {n} (seed={seed})")
    return loops


def is_central_pique(p: Pique, cap: Optional[int] = None) -> bool:
    """
    Cloop is an abelian group and the δ-stabilizer of the multiplication group acts
    by automorphisms of the cloop.
    """
    b = cloop(p)
    if not is_abelian_group(b):
        return False
    n = p.n
    gens = [left_translation(p.q, a) for a in range(n)] + [right_translation(p.q, a) for a in range(n)]
    group = permutation_closure(list(dict.fromkeys(gens)), n, cfg.closure_cap if cap is None else cap)
    return all(is_automorphism(b, g) for g in group if g(p.delta) == p.delta)
