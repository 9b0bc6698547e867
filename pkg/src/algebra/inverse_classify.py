#!/usr/bin/env python3
# src/algebra/inverse_classify.py
"""Inverse properties of loops: (r,s,t)-inverse, m-inverse, WIP, CI and h."""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy.ntheory.modular import solve_congruence

from config.config import cfg
from src.algebra.errors import InternalConsistencyError
from src.algebra.loops_core import (
    CayleyTable,
    Loop,
    Permutation,
    first_failure,
    is_automorphism,
    table_of,
)

logger = logging.getLogger(__name__)

Window = Union[range, Tuple[int, int], Sequence[int]]


@dataclass(frozen=True)
class RstTriple:
    """Exponents of J in J^r(xy)J^s(x) = J^t(y)."""

    r: int
    s: int
    t: int

    @classmethod
    def m_inverse(cls, m: int) -> "RstTriple":
        return cls(m, m + 1, m)

    @classmethod
    def wip(cls) -> "RstTriple":
        return cls(-1, 0, -1)

    @classmethod
    def ci(cls) -> "RstTriple":
        return cls.m_inverse(0)

    def shifted(self, u: int, h: int) -> "RstTriple":
        return RstTriple(self.r + u * h, self.s + u * h, self.t + u * h)


def right_inverse_permutation(l: Loop) -> Permutation:
    """J: x -> x\\δ, the default permutation with x·J(x) = δ."""
    return Permutation(tuple(l.q.ldiv[:, l.delta]))


def rst_witness(
    l: Union[Loop, CayleyTable], j: Permutation, rst: RstTriple
) -> Optional[Tuple[int, int]]:
    """First pair (x, y) violating J^r(xy)J^s(x) = J^t(y), or None."""
    t = table_of(l)
    jr = j.power(rst.r).as_array()
    js = j.power(rst.s).as_array()
    jt = j.power(rst.t).as_array()
    lhs = t[jr[t], js[:, None]]
    return first_failure(lhs == jt[None, :])


def is_rst_inverse(l: Union[Loop, CayleyTable], j: Permutation, rst: RstTriple) -> bool:
    return rst_witness(l, j, rst) is None


def is_m_inverse(l: Union[Loop, CayleyTable], j: Permutation, m: int) -> bool:
    return is_rst_inverse(l, j, RstTriple.m_inverse(m))


def is_wip(l: Union[Loop, CayleyTable], j: Permutation) -> bool:
    return is_rst_inverse(l, j, RstTriple.wip())


def is_ci(l: Union[Loop, CayleyTable], j: Permutation) -> bool:
    return is_m_inverse(l, j, 0)


def aut_power_order(l: Union[Loop, CayleyTable], j: Permutation) -> int:
    """Smallest h ≥ 1 with J^h an automorphism; bounded by the order of J."""
    bound = j.order()
    for h in range(1, bound + 1):
        if is_automorphism(l, j.power(h)):
            return h
    raise InternalConsistencyError(f"J^{bound} is the identity but not an automorphism")


def crt_solve(m1: int, h1: int, m2: int, h2: int) -> Optional[int]:
    """
    Least non-negative m with m ≡ m1 (mod h1) and m ≡ m2 (mod h2).

    Returns:
        The solution in [0, lcm(h1, h2)), or None when gcd(h1, h2) does not divide m1 - m2.
    """
    if h1 < 1 or h2 < 1:
        raise ValueError(f"moduli must be positive, got {h1} and {h2}")
    solution = solve_congruence((m1 % h1, h1), (m2 % h2, h2))
    return None if solution is None else int(solution[0])


def combine_rst(
    rst1: RstTriple, h1: int, rst2: RstTriple, h2: int
) -> Optional[RstTriple]:
    """
    A common triple (r, s, t) with r - r_i = s - s_i = t - t_i = u_i h_i.

    Returns None when the two triples do not differ by a constant shift or the
    congruence on r has no solution.
    """
    if rst1.r - rst2.r != rst1.s - rst2.s or rst1.r - rst2.r != rst1.t - rst2.t:
        return None
    r = crt_solve(rst1.r, h1, rst2.r, h2)
    if r is None:
        return None
    return rst1.shifted(1, r - rst1.r)


def is_rst_shift_closed(
    l: Union[Loop, CayleyTable],
    j: Permutation,
    rst: RstTriple,
    h: Optional[int] = None,
    shifts: Iterable[int] = (-2, -1, 1, 2),
) -> bool:
    """If (r,s,t) holds, so does every (r+uh, s+uh, t+uh) for u in `shifts`."""
    if not is_rst_inverse(l, j, rst):
        return True
    h = aut_power_order(l, j) if h is None else h
    return all(is_rst_inverse(l, j, rst.shifted(u, h)) for u in shifts)


@dataclass(frozen=True, eq=False)
class InversePermutation:
    """A permutation J on a loop, with its automorphism-power order."""

    loop: Union[Loop, CayleyTable]
    j: Permutation

    @cached_property
    def h(self) -> int:
        return aut_power_order(self.loop, self.j)

    def power(self, k: int) -> Permutation:
        return self.j.power(k)

    def satisfies(self, rst: RstTriple) -> bool:
        return is_rst_inverse(self.loop, self.j, rst)


def normalize_window(window: Optional[Window] = None) -> range:
    """
    Inclusive (lo, hi) pairs and ranges both become a range.

    Raises:
        ValueError: the window holds no exponent.
    """
    if window is None:
        return range(cfg.window_low, cfg.window_high + 1)
    if isinstance(window, range):
        result = window
    else:
        values = [int(v) for v in window]
        if not values:
            raise ValueError("empty exponent window; give (lo, hi) or at least one exponent")
        if isinstance(window, tuple) and len(values) == 2:
            result = range(values[0], values[1] + 1)
        else:
            result = range(min(values), max(values) + 1)
    if len(result) == 0:
        raise ValueError(f"exponent window {window!r} is empty")
    return result


@dataclass
class ClassificationReport:
    """Inverse properties of one loop over a window of exponents."""

    order: int
    h: int
    window: Tuple[int, int]
    valid_m: List[int] = field(default_factory=list)
    wip: bool = False
    ci: bool = False
    residues: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": self.order,
            "h": self.h,
            "valid_m": list(self.valid_m),
            "wip": self.wip,
            "ci": self.ci,
            "residues": list(self.residues),
            "window": list(self.window),
        }


def classify(
    l: Loop, j: Optional[Permutation] = None, window: Optional[Window] = None
) -> ClassificationReport:
    """
    Report every m in the window with the m-inverse property, plus WIP, CI and h.

    Args:
        l: The loop to classify.
        j: Permutation J; defaults to the right inverse x -> x\\δ.
        window: Exponent range, inclusive (lo, hi) or a range.

    Returns:
        ClassificationReport with the minimal non-negative residue per h-class.
    """
    j = right_inverse_permutation(l) if j is None else j
    span = normalize_window(window)
    h = aut_power_order(l, j)
    valid = [m for m in span if is_m_inverse(l, j, m)]

    valid_set = set(valid)
    for m in valid:
        for shifted in (m - h, m + h):
            if shifted in span and shifted not in valid_set:
                raise InternalConsistencyError(
                    f"m={m} holds but m={shifted} does not although J^{h} is an automorphism"
                )

    report = ClassificationReport(
        order=l.n,
        h=h,
        window=(span.start, span.stop - 1),
        valid_m=valid,
        wip=is_wip(l, j),
        ci=is_ci(l, j),
        residues=sorted({m % h for m in valid}),
    )
    logger.debug(f"Classified loop of order {l.n}: h={h}, valid_m={valid}")
    return report
