#!/usr/bin/env python3
# src/extractors/presets.py
"""Built-in catalog of small loops and the Λ-example bundle."""
import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from src.algebra.constructions import (
    CocycleMap,
    GroupActionPair,
    LambdaBundle,
    lambda_example,
    odd_invertible_loop,
)
from src.algebra.errors import MalformedTableError
from src.algebra.inverse_classify import right_inverse_permutation
from src.algebra.loops_core import CayleyTable, Loop, Permutation, loop_direct_product

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    build: Callable[[], Tuple[Loop, Permutation]]


def cyclic_group(n: int) -> Loop:
    idx = np.arange(n)
    return Loop(CayleyTable((idx[:, None] + idx[None, :]) % n), 0)


def klein_group() -> Loop:
    return loop_direct_product(cyclic_group(2), cyclic_group(2))


def _permutation_group(elements: List[Tuple[int, ...]]) -> Loop:
    """Multiplication (p·q)(i) = p(q(i)) on an explicit element list, identity first."""
    index = {p: k for k, p in enumerate(elements)}
    table = [[index[tuple(p[i] for i in q)] for q in elements] for p in elements]
    return Loop(CayleyTable(np.array(table, dtype=np.int64)), 0)


def symmetric_group_s3() -> Loop:
    return _permutation_group(sorted(itertools.permutations(range(3))))


def dihedral_group_d4() -> Loop:
    """Symmetries of the square, as r^i s^k at index i + 4k."""
    rot = (1, 2, 3, 0)
    ref = (0, 3, 2, 1)
    elements = []
    for k in range(2):
        for i in range(4):
            p = tuple(range(4))
            for _ in range(i):
                p = tuple(rot[x] for x in p)
            if k:
                p = tuple(p[ref[x]] for x in range(4))
            elements.append(p)
    return _permutation_group(elements)


# units 1, i, j, k: product unit and sign bit
_QUAT_UNIT = np.array([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])
_QUAT_SIGN = np.array([[0, 0, 0, 0], [0, 1, 0, 1], [0, 1, 1, 0], [0, 0, 1, 1]])


def quaternion_group() -> Loop:
    """Q8 with ±u at index 2u + sign, so 0 = 1 and 1 = -1."""
    u, s = np.divmod(np.arange(8), 2)
    unit = _QUAT_UNIT[u[:, None], u[None, :]]
    sign = (s[:, None] + s[None, :] + _QUAT_SIGN[u[:, None], u[None, :]]) % 2
    return Loop(CayleyTable(2 * unit + sign), 0)


def _with_inverse(build: Callable[[], Loop]) -> Callable[[], Tuple[Loop, Permutation]]:
    def wrapped() -> Tuple[Loop, Permutation]:
        loop = build()
        return loop, right_inverse_permutation(loop)

    return wrapped


def odd_invertible_example() -> Tuple[Loop, Permutation]:
    """Z3 ×_φ Z2 with the single nonzero value φ(1, 1) = 1; m-inverse for odd m only."""
    g, v = cyclic_group(3), cyclic_group(2)
    return odd_invertible_loop(g, v, CocycleMap.from_entries(g, v, {(1, 1): 1}))


def s3_matched_actions() -> GroupActionPair:
    """S3 = Z3 ⋈ Z2 with y▷x = (-1)^y x and trivial ◁."""
    x = np.arange(3)[None, :]
    y = np.arange(2)[:, None]
    return GroupActionPair(np.where(y == 1, (-x) % 3, x), np.broadcast_to(y, (2, 3)))


def lambda_s3_z2z2(m: int = 1, strict: bool = False) -> LambdaBundle:
    """(Z3 ⋈ Z2) ×_Λ (Z2 × Z2) with φ = χ = 0, a loop of order 24."""
    g, h = cyclic_group(3), cyclic_group(2)
    v, w = cyclic_group(2), cyclic_group(2)
    return lambda_example(
        g, h, s3_matched_actions(), v, w, CocycleMap.zero(g, v), CocycleMap.zero(h, w),
        m=m, strict=strict,
    )


def _lambda_loop() -> Tuple[Loop, Permutation]:
    bundle = lambda_s3_z2z2()
    return bundle.q, bundle.j_q


PRESETS: Dict[str, Preset] = {}


def _register(name: str, description: str, build: Callable[[], Tuple[Loop, Permutation]]):
    PRESETS[name] = Preset(name, description, build)


for _n in range(1, 9):
    _register(f"Z{_n}", f"cyclic group of order {_n}", _with_inverse(lambda n=_n: cyclic_group(n)))
_register("klein", "Klein four-group Z2 × Z2", _with_inverse(klein_group))
_register("S3", "symmetric group on three points", _with_inverse(symmetric_group_s3))
_register("D4", "dihedral group of order 8", _with_inverse(dihedral_group_d4))
_register("Q8", "quaternion group", _with_inverse(quaternion_group))
_register("odd-z3z2", "odd-invertible loop Z3 ×_φ Z2 of order 6", odd_invertible_example)
_register("s3-z2z2", "Λ-example (Z3 ⋈ Z2) ×_Λ (Z2 × Z2) of order 24", _lambda_loop)

LAMBDA_PRESETS: Dict[str, Callable[..., LambdaBundle]] = {"s3-z2z2": lambda_s3_z2z2}

GROUP_PRESETS = [name for name in PRESETS if name not in ("odd-z3z2", "s3-z2z2")]


def preset_names() -> List[str]:
    return list(PRESETS)


def load_preset(name: str) -> Tuple[Loop, Permutation]:
    """Build a catalog loop with its J."""
    if name not in PRESETS:
        raise MalformedTableError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    logger.debug(f"Building preset {name}")
    return PRESETS[name].build()


def load_lambda_preset(name: str, m: int = 1, strict: bool = False) -> LambdaBundle:
    if name not in LAMBDA_PRESETS:
        raise MalformedTableError(f"unknown Λ-example preset {name!r}; known: {', '.join(LAMBDA_PRESETS)}")
    return LAMBDA_PRESETS[name](m=m, strict=strict)
