#!/usr/bin/env python3
# src/algebra/constructions.py
"""Product structures on loops: cocycle extensions, direct, semi-direct and matched pair products."""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from config.config import cfg
from src.algebra.diagnostics import (
    ConditionCheck,
    ConditionReport,
    first_of,
    flag_check,
    mask_check,
)
from src.algebra.errors import (
    InternalConsistencyError,
    MalformedTableError,
    PreconditionError,
    ResourceCapError,
)
from src.algebra.inverse_classify import (
    RstTriple,
    aut_power_order,
    combine_rst,
    crt_solve,
    is_m_inverse,
    is_rst_inverse,
    rst_witness,
)
from src.algebra.loops_core import (
    CayleyTable,
    Loop,
    Permutation,
    cayley_of,
    first_failure,
    is_abelian_group,
    is_associative,
    is_automorphism,
    is_group,
    loop_direct_product,
    permutation_closure,
    permutation_product,
    table_direct_product,
)

logger = logging.getLogger(__name__)


def _read_only(arr: Any, shape: Tuple[int, ...], bound: int, what: str) -> np.ndarray:
    """Copy `arr` into a read-only int64 array with entries in [0, bound)."""
    out = np.array(arr, dtype=np.int64)
    if out.shape != shape:
        raise MalformedTableError(f"{what} must have shape {shape}, got {out.shape}")
    bad = first_failure((out >= 0) & (out < bound))
    if bad is not None:
        raise MalformedTableError(f"{what} entry {out[bad]} at {bad} outside [0, {bound})")
    out.setflags(write=False)
    return out


def _require_group(g: Loop, what: str, abelian: bool = False):
    ok = is_abelian_group(g) if abelian else is_group(g)
    if not ok:
        kind = "an abelian group" if abelian else "a group"
        report = ConditionReport(what)
        report.add(flag_check("group", False, f"{what} is not {kind}"))
        raise PreconditionError(f"{what} is not {kind}", report=report)


def group_inverse(g: Loop) -> np.ndarray:
    """x -> x⁻¹ as an index array."""
    return g.q.ldiv[:, g.delta]


# ---------------------------------------------------------------------------
# Cocycle extensions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CocycleMap:
    """
    A map φ: G×G → V with an optional right action ◁: V×G → V.

    ``values[x, x']`` is the index of φ(x, x') in V and ``action[v, x]`` that of v◁x.
    """

    g: Loop
    v: Loop
    values: Any
    action: Optional[Any] = None

    def __post_init__(self):
        ng, nv = self.g.n, self.v.n
        object.__setattr__(self, "values", _read_only(self.values, (ng, ng), nv, "cocycle values"))
        if self.action is not None:
            object.__setattr__(
                self, "action", _read_only(self.action, (nv, ng), nv, "right action")
            )

    @classmethod
    def zero(cls, g: Loop, v: Loop) -> "CocycleMap":
        return cls(g, v, np.full((g.n, g.n), v.delta, dtype=np.int64))

    @classmethod
    def from_entries(cls, g: Loop, v: Loop, entries: Dict[Tuple[int, int], int]) -> "CocycleMap":
        """Zero map overwritten at the given (x, x') pairs."""
        values = np.full((g.n, g.n), v.delta, dtype=np.int64)
        for (x, xp), value in entries.items():
            values[x, xp] = value
        return cls(g, v, values)

    @property
    def g_order(self) -> int:
        return self.g.n

    @property
    def v_order(self) -> int:
        return self.v.n

    @property
    def has_trivial_action(self) -> bool:
        if self.action is None:
            return True
        return bool(np.all(self.action == np.arange(self.v.n)[:, None]))

    def action_table(self) -> np.ndarray:
        """◁ as a full (|V|, |G|) table; trivial when no action was given."""
        if self.action is not None:
            return self.action
        return np.broadcast_to(np.arange(self.v.n)[:, None], (self.v.n, self.g.n))

    def value(self, x: int, xp: int) -> int:
        return int(self.values[x, xp])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "g_order": self.g_order,
            "v_order": self.v_order,
            "values": self.values.tolist(),
            "action": None if self.action is None else self.action.tolist(),
        }


def right_action_check(c: CocycleMap) -> ConditionCheck:
    """v◁1 = v, (v◁x)◁x' = v◁(xx') and (v+v')◁x = v◁x + v'◁x."""
    act = c.action_table()
    tg, tv = c.g.table, c.v.table
    nv = c.v.n
    vi = np.arange(nv)
    return first_of(
        "right-action",
        [
            ("v◁1 = v", act[:, c.g.delta] == vi),
            ("(v◁x)◁x' = v◁(xx')", act[act[:, :, None], np.arange(c.g.n)[None, None, :]] == act[:, tg]),
            (
                "(v+v')◁x = v◁x + v'◁x",
                act[tv[:, :, None], np.arange(c.g.n)[None, None, :]]
                == tv[act[:, None, :], act[None, :, :]],
            ),
        ],
    )


def cocycle_coboundary_values(c: CocycleMap) -> np.ndarray:
    """dφ(x, x', x'') as a V-index array of shape (|G|, |G|, |G|)."""
    tg, tv = c.g.table, c.v.table
    neg = group_inverse(c.v)
    act = c.action_table()
    vals = c.values
    idx = np.arange(c.g.n)
    t1 = np.broadcast_to(vals[None, :, :], (c.g.n,) * 3)
    t2 = vals[tg[:, :, None], idx[None, None, :]]
    t3 = vals[idx[:, None, None], tg[None, :, :]]
    t4 = act[vals[:, :, None], idx[None, None, :]]
    return tv[tv[tv[t1, neg[t2]], t3], neg[t4]]


def cocycle_witness(c: CocycleMap) -> Optional[Tuple[int, ...]]:
    """First triple (x, x', x'') with dφ ≠ 0."""
    return first_failure(cocycle_coboundary_values(c) == c.v.delta)


def is_2cocycle(c: CocycleMap) -> bool:
    return cocycle_witness(c) is None


def coboundary(psi: Any, g: Loop, v: Loop, action: Optional[Any] = None) -> CocycleMap:
    """φ(x, x') = ψ(xx') − ψ(x)◁x' − ψ(x'), the coboundary of ψ: G → V."""
    psi = np.asarray(psi, dtype=np.int64)
    base = CocycleMap(g, v, np.full((g.n, g.n), v.delta), action)
    act = base.action_table()
    tv = v.table
    neg = group_inverse(v)
    idx = np.arange(g.n)
    vals = tv[tv[psi[g.table], neg[act[psi[:, None], idx[None, :]]]], neg[psi[None, :]]]
    return CocycleMap(g, v, vals, action)


def quasi_0_check(c: CocycleMap) -> ConditionCheck:
    zero, e = c.v.delta, c.g.delta
    return mask_check(
        "quasi-0", (c.values[e, :] == zero) & (c.values[:, e] == zero), "φ(1,x) = 0 = φ(x,1)"
    )


def quasi_i_check(c: CocycleMap) -> ConditionCheck:
    inv = group_inverse(c.g)
    return mask_check("quasi-I", c.values[np.arange(c.g.n), inv] == c.v.delta, "φ(x,x⁻¹) = 0")


def quasi_ii_check(c: CocycleMap) -> ConditionCheck:
    inv = group_inverse(c.g)
    idx = np.arange(c.g.n)
    left = c.g.table[inv[None, :], inv[:, None]]
    lhs = c.values[left, idx[:, None]]
    return mask_check("quasi-II", lhs == c.values, "φ(x'⁻¹x⁻¹, x) = φ(x,x')")


def trivial_action_check(c: CocycleMap) -> ConditionCheck:
    return flag_check("trivial-action", c.has_trivial_action, "the right action ◁ is not trivial")


def two_cocycle_check(c: CocycleMap) -> ConditionCheck:
    return mask_check("cocycle", cocycle_coboundary_values(c) == c.v.delta, "dφ = 0")


COCYCLE_CONSTRAINTS: Dict[str, Callable[[CocycleMap], ConditionCheck]] = {
    "quasi-0": quasi_0_check,
    "quasi-I": quasi_i_check,
    "quasi-II": quasi_ii_check,
    "cocycle": two_cocycle_check,
    "trivial-action": trivial_action_check,
}


def cocycle_conditions(c: CocycleMap, names: Optional[List[str]] = None) -> ConditionReport:
    """Evaluate the named constraints (all registered ones by default)."""
    names = list(COCYCLE_CONSTRAINTS) if names is None else names
    report = ConditionReport("cocycle")
    for name in names:
        if name not in COCYCLE_CONSTRAINTS:
            raise ValueError(f"unknown cocycle constraint {name!r}; known: {sorted(COCYCLE_CONSTRAINTS)}")
        report.add(COCYCLE_CONSTRAINTS[name](c))
    return report


def _check_extension_inputs(g: Loop, v: Loop, c: CocycleMap):
    _require_group(g, "G")
    _require_group(v, "V", abelian=True)
    if c.g.q != g.q or c.v.q != v.q:
        raise PreconditionError("cocycle map was built over different G or V tables")
    if c.action is not None:
        report = ConditionReport("right action")
        report.add(right_action_check(c))
        report.raise_if_failed("◁ is not a right action by automorphisms")


def cocycle_extension(g: Loop, v: Loop, c: CocycleMap) -> CayleyTable:
    """
    Quasigroup G ⋉_φ V on pairs (x, v) -> x*|V| + v.

    Multiplication is (x,v)(x',v') = (xx', φ(x,x') + v◁x' + v').
    """
    _check_extension_inputs(g, v, c)
    ng, nv = g.n, v.n
    tg, tv = g.table, v.table
    act = c.action_table()
    x = np.arange(ng)[:, None, None, None]
    vv = np.arange(nv)[None, :, None, None]
    xp = np.arange(ng)[None, None, :, None]
    vp = np.arange(nv)[None, None, None, :]
    table = tg[x, xp] * nv + tv[tv[c.values[x, xp], act[vv, xp]], vp]
    logger.debug(f"Built cocycle extension of order {ng * nv}")
    return CayleyTable(table.reshape(ng * nv, ng * nv))


def extension_loop(g: Loop, v: Loop, c: CocycleMap) -> Loop:
    """The extension as a loop with identity (1, 0); requires quasi-0."""
    report = ConditionReport("extension loop")
    report.add(quasi_0_check(c))
    report.raise_if_failed("extension has no identity (1, 0)")
    return Loop(cocycle_extension(g, v, c), g.delta * v.n + v.delta)


def odd_invertible_conditions(c: CocycleMap) -> ConditionReport:
    report = ConditionReport("odd-invertible loop")
    report.add(trivial_action_check(c))
    report.add(quasi_0_check(c))
    report.add(quasi_i_check(c))
    report.add(quasi_ii_check(c))
    return report


def odd_invertible_loop(g: Loop, v: Loop, c: CocycleMap) -> Tuple[Loop, Permutation]:
    """
    G ×_φ V with J(x, v) = (x⁻¹, −v), which is m-inverse for every odd m.

    Raises:
        PreconditionError: when ◁ is not trivial or quasi-0, quasi-I or quasi-II fails.
    """
    _require_group(g, "G")
    _require_group(v, "V", abelian=True)
    odd_invertible_conditions(c).raise_if_failed("not an odd-invertible cocycle")
    loop = extension_loop(g, v, c)
    inv, neg = group_inverse(g), group_inverse(v)
    j = Permutation(tuple((inv[:, None] * v.n + neg[None, :]).ravel()))
    if not j.power(2).is_identity() or not is_m_inverse(loop, j, 1):
        raise InternalConsistencyError("odd-invertible loop fails J² = id or the 1-inverse scan")
    logger.info(f"Built odd-invertible loop of order {loop.n}")
    return loop, j


# ---------------------------------------------------------------------------
# Direct products
# ---------------------------------------------------------------------------


@dataclass
class DirectProduct:
    """Q1 × Q2 with J1 × J2 and the exponents the congruence system admits."""

    table: CayleyTable
    j: Permutation
    h1: int
    h2: int
    residues1: List[int]
    residues2: List[int]
    solutions: List[int] = field(default_factory=list)
    loop: Optional[Loop] = None

    @property
    def valid_m(self) -> Optional[int]:
        return min(self.solutions) if self.solutions else None

    @property
    def period(self) -> int:
        return int(np.lcm(self.h1, self.h2))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": self.table.n,
            "h1": self.h1,
            "h2": self.h2,
            "residues1": self.residues1,
            "residues2": self.residues2,
            "solutions": self.solutions,
            "valid_m": self.valid_m,
        }


def _residues(q: Any, j: Permutation, h: int, m: Optional[int]) -> List[int]:
    if m is not None:
        return [m % h] if is_m_inverse(q, j, m) else []
    return [r for r in range(h) if is_m_inverse(q, j, r)]


def direct_product(
    q1: Any,
    j1: Permutation,
    q2: Any,
    j2: Permutation,
    m1: Optional[int] = None,
    m2: Optional[int] = None,
) -> DirectProduct:
    """
    Componentwise product with every exponent solving m ≡ m_i (mod h_i).

    Args:
        q1, q2: Quasigroups or loops.
        j1, j2: Their permutations.
        m1, m2: Fixed exponents; when omitted every residue the factor admits is used.

    Returns:
        DirectProduct whose `solutions` lists each CRT solution in [0, lcm(h1, h2)).
    """
    h1, h2 = aut_power_order(q1, j1), aut_power_order(q2, j2)
    res1, res2 = _residues(q1, j1, h1, m1), _residues(q2, j2, h2, m2)
    solutions = sorted(
        {m for a in res1 for b in res2 if (m := crt_solve(a, h1, b, h2)) is not None}
    )
    table = table_direct_product(q1, q2)
    j = permutation_product(j1, j2)
    for m in solutions:
        if not is_m_inverse(table, j, m):
            raise InternalConsistencyError(f"direct product fails the {m}-inverse scan")
    loop = None
    if isinstance(q1, Loop) and isinstance(q2, Loop):
        loop = loop_direct_product(q1, q2)
    logger.info(f"Direct product of order {table.n}: h=({h1},{h2}), solutions={solutions}")
    return DirectProduct(table, j, h1, h2, res1, res2, solutions, loop)


def direct_product_rst(
    q1: Any, j1: Permutation, rst1: RstTriple, q2: Any, j2: Permutation, rst2: RstTriple
) -> Optional[RstTriple]:
    """A triple for which Q1 × Q2 is (r,s,t)-inverse, when the shifts line up."""
    if not is_rst_inverse(q1, j1, rst1) or not is_rst_inverse(q2, j2, rst2):
        return None
    h1, h2 = aut_power_order(q1, j1), aut_power_order(q2, j2)
    common = combine_rst(rst1, h1, rst2, h2)
    if common is None:
        return None
    if rst_witness(table_direct_product(q1, q2), permutation_product(j1, j2), common) is not None:
        raise InternalConsistencyError(f"direct product fails the {common} scan")
    return common


# ---------------------------------------------------------------------------
# Semi-direct products built from groups
# ---------------------------------------------------------------------------


def semidirect_group_theta(g: Loop, h: Loop, theta: Any) -> CayleyTable:
    """
    G × H with (g,h)(g',h') = (gg', θ(g')(h)·h').

    ``theta[g]`` is the image array of an automorphism of H; θ need not be a homomorphism.
    """
    _require_group(g, "G")
    _require_group(h, "H")
    theta = _read_only(theta, (g.n, h.n), h.n, "theta")
    report = ConditionReport("theta")
    bad = next(
        (
            k
            for k in range(g.n)
            if len(set(theta[k].tolist())) != h.n or not is_automorphism(h, Permutation(tuple(theta[k])))
        ),
        None,
    )
    report.add(
        ConditionCheck(
            "theta-automorphism",
            bad is None,
            None if bad is None else (bad,),
            "" if bad is None else f"θ({bad}) is not an automorphism of H",
        )
    )
    report.raise_if_failed("θ does not land in Aut(H)")
    ng, nh = g.n, h.n
    x = np.arange(ng)[:, None, None, None]
    y = np.arange(nh)[None, :, None, None]
    xp = np.arange(ng)[None, None, :, None]
    yp = np.arange(nh)[None, None, None, :]
    table = g.table[x, xp] * nh + h.table[theta[xp, y], yp]
    return CayleyTable(table.reshape(ng * nh, ng * nh))


# ---------------------------------------------------------------------------
# Transassociant group and its product
# ---------------------------------------------------------------------------


def _perm_codes(arr: np.ndarray, n: int) -> np.ndarray:
    """Encode each image array along the last axis as one integer in base n."""
    weights = n ** np.arange(arr.shape[-1], dtype=np.int64)
    return (arr.astype(np.int64) * weights).sum(axis=-1)


def _ell_images(table: CayleyTable) -> np.ndarray:
    """ell[a, b, x] = (ab) \\ (a(bx))."""
    t, ldiv = table.table, table.ldiv
    return ldiv[t[:, :, None], t[np.arange(table.n)[:, None, None], t[None, :, :]]]


@dataclass(frozen=True, eq=False)
class TransassociantGroup:
    """Group generated by ℓ(q,q') = L⁻¹_{qq'} ∘ L_q ∘ L_{q'} inside Sym(Q)."""

    quasigroup: CayleyTable
    generators: Tuple[Permutation, ...]
    elements: Tuple[Permutation, ...]

    @classmethod
    def of(cls, q: Any, cap: Optional[int] = None) -> "TransassociantGroup":
        table = (CayleyTable(q) if isinstance(q, np.ndarray) else cayley_of(q)).require_quasigroup()
        if table.n > 15:
            raise ResourceCapError(f"transassociant groups are limited to order 15, got {table.n}")
        cap = cfg.closure_cap if cap is None else cap
        images = _ell_images(table).reshape(-1, table.n)
        distinct = dict.fromkeys(tuple(int(i) for i in row) for row in images)
        generators = tuple(Permutation(g) for g in distinct)
        elements = permutation_closure(generators, table.n, cap)
        logger.debug(f"Transassociant group of order {len(elements)} from {len(generators)} generators")
        return cls(table, generators, tuple(elements))

    @property
    def order(self) -> int:
        return len(self.elements)

    def as_array(self) -> np.ndarray:
        return np.array([p.image for p in self.elements], dtype=np.int64).reshape(self.order, -1)

    def ell(self, a: int, b: int) -> Permutation:
        return Permutation(tuple(_ell_images(self.quasigroup)[a, b]))

    def m(self, q: int, h: Permutation) -> Permutation:
        """m_q(h) = L⁻¹_{h(q)} ∘ h ∘ L_q ∘ h⁻¹."""
        t, ldiv = self.quasigroup.table, self.quasigroup.ldiv
        hh, hinv = h.as_array(), h.inverse().as_array()
        return Permutation(tuple(ldiv[hh[q], hh[t[q, hinv]]]))


def sabinin_product(q: Any, cap: Optional[int] = None) -> CayleyTable:
    """
    Q × H with (q,h)(q',h') = (q·h(q'), ℓ(q,h(q')) ∘ m_{q'}(h) ∘ h ∘ h').

    Pairs are indexed q*|H| + k where k is the position of h in breadth-first order
    from the identity.

    Raises:
        ResourceCapError: when H or the product outgrows the configured caps.
        PreconditionError: when some m_q(h) falls outside H.
    """
    group = TransassociantGroup.of(q, cap)
    table = group.quasigroup
    t, ldiv, n = table.table, table.ldiv, table.n
    k = group.order
    if n * k > cfg.materialize_cap:
        raise ResourceCapError(
            f"product of order {n * k} exceeds materialize cap {cfg.materialize_cap}", partial_size=k
        )
    elems = group.as_array()
    codes = _perm_codes(elems, n)
    order = np.argsort(codes)
    sorted_codes = codes[order]

    def lookup(arr: np.ndarray, what: str) -> np.ndarray:
        c = _perm_codes(arr, n)
        pos = np.clip(np.searchsorted(sorted_codes, c), 0, k - 1)
        found = sorted_codes[pos] == c
        if not found.all():
            bad = first_failure(found)
            report = ConditionReport("transassociant")
            report.add(ConditionCheck("m_q(h)-in-H", False, bad, f"{what} leaves H"))
            raise PreconditionError(f"{what} is not in the transassociant group", report=report)
        return order[pos]

    inv = np.argsort(elems, axis=1)
    comp = np.stack([lookup(elems[a][elems], "composition") for a in range(k)])
    ell_idx = lookup(_ell_images(table), "ℓ(q,q')")
    # m_perm[q, h, x] = h(q) \ h(q·h⁻¹(x))
    inner = elems[np.arange(k)[None, :, None], t[np.arange(n)[:, None, None], inv[None, :, :]]]
    m_idx = lookup(ldiv[elems.T[:, :, None], inner], "m_q(h)")

    qq = np.arange(n)[:, None, None]
    hh = np.arange(k)[None, :, None]
    qp = np.arange(n)[None, None, :]
    hq_image = elems[hh, qp]
    first = t[qq, hq_image]
    combined = comp[comp[ell_idx[qq, hq_image], m_idx[qp, hh]], hh]
    # full[q, h, q', h'] = combined[q, h, q'] ∘ h'
    full_h = comp[combined[:, :, :, None], np.arange(k)[None, None, None, :]]
    full = first[:, :, :, None] * k + full_h
    result = CayleyTable(full.reshape(n * k, n * k))
    if not result.is_quasigroup:
        raise InternalConsistencyError("transassociant product is not a quasigroup")
    logger.info(f"Sabinin product of order {n * k} (|H| = {k})")
    return result


# ---------------------------------------------------------------------------
# Matched pairs of loops
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ActionPair:
    """φ: S×R → R and ψ: S×R → S as lookup tables indexed [s, r]."""

    phi: Any
    psi: Any

    def __post_init__(self):
        phi = np.asarray(self.phi)
        if phi.ndim != 2:
            raise MalformedTableError(f"phi must be a 2-D table, got shape {phi.shape}")
        ns, nr = phi.shape
        object.__setattr__(self, "phi", _read_only(phi, (ns, nr), nr, "phi"))
        object.__setattr__(self, "psi", _read_only(self.psi, (ns, nr), ns, "psi"))

    @classmethod
    def trivial(cls, r_order: int, s_order: int) -> "ActionPair":
        phi = np.broadcast_to(np.arange(r_order)[None, :], (s_order, r_order))
        psi = np.broadcast_to(np.arange(s_order)[:, None], (s_order, r_order))
        return cls(phi, psi)

    @property
    def s_order(self) -> int:
        return int(self.phi.shape[0])

    @property
    def r_order(self) -> int:
        return int(self.phi.shape[1])

    @property
    def is_trivial(self) -> bool:
        return bool(
            np.all(self.phi == np.arange(self.r_order)[None, :])
            and np.all(self.psi == np.arange(self.s_order)[:, None])
        )

    def __eq__(self, other):
        return (
            isinstance(other, ActionPair)
            and np.array_equal(self.phi, other.phi)
            and np.array_equal(self.psi, other.psi)
        )

    def __hash__(self):
        return hash((self.phi.tobytes(), self.psi.tobytes(), self.phi.shape))

    def to_dict(self) -> Dict[str, Any]:
        return {"phi_table": self.phi.tolist(), "psi_table": self.psi.tolist()}


def _check_action_shape(r: Loop, s: Loop, a: ActionPair):
    if (a.s_order, a.r_order) != (s.n, r.n):
        raise MalformedTableError(
            f"action tables have shape {(a.s_order, a.r_order)}, expected {(s.n, r.n)}"
        )


def build_matched_table(r: Loop, s: Loop, a: ActionPair) -> CayleyTable:
    """(r,s)(r',s') = (r·φ(s,r'), ψ(s,r')·s') on pairs (r, s) -> r*|S| + s."""
    _check_action_shape(r, s, a)
    nr, ns = r.n, s.n
    rr = np.arange(nr)[:, None, None, None]
    ss = np.arange(ns)[None, :, None, None]
    rp = np.arange(nr)[None, None, :, None]
    sp = np.arange(ns)[None, None, None, :]
    table = r.table[rr, a.phi[ss, rp]] * ns + s.table[a.psi[ss, rp], sp]
    return CayleyTable(table.reshape(nr * ns, nr * ns))


def matched_j(r: Loop, j_r: Permutation, s: Loop, j_s: Permutation, a: ActionPair) -> np.ndarray:
    """J(r,s) = (δ,J_S(s))(J_R(r),δ) as an image array over r*|S| + s."""
    jr, js = j_r.as_array(), j_s.as_array()
    rows = jr[:, None]
    cols = js[None, :]
    return (a.phi[cols, rows] * s.n + a.psi[cols, rows]).ravel()


def _congruence_check(
    name: str, r: Loop, j_r: Permutation, s: Loop, j_s: Permutation, m: int,
    m1: Optional[int], m2: Optional[int],
) -> ConditionCheck:
    h1, h2 = aut_power_order(r, j_r), aut_power_order(s, j_s)
    m1 = m if m1 is None else m1
    m2 = m if m2 is None else m2
    problems = []
    if not is_m_inverse(r, j_r, m1):
        problems.append(f"R is not {m1}-inverse")
    if not is_m_inverse(s, j_s, m2):
        problems.append(f"S is not {m2}-inverse")
    if (m - m1) % h1:
        problems.append(f"m={m} is not {m1} mod {h1}")
    if (m - m2) % h2:
        problems.append(f"m={m} is not {m2} mod {h2}")
    return flag_check(name, not problems, "; ".join(problems))


def _j_unit_check(r: Loop, j_r: Permutation, s: Loop, j_s: Permutation) -> ConditionCheck:
    ok = j_r(r.delta) == r.delta and j_s(s.delta) == s.delta
    return flag_check("J-fixes-identity", ok, "J_R(δ) = δ or J_S(δ) = δ fails")


def _unit_law_check(name: str, r: Loop, s: Loop, a: ActionPair) -> ConditionCheck:
    er, es = r.delta, s.delta
    return first_of(
        name,
        [
            ("φ(δ,r) = r", a.phi[es, :] == np.arange(r.n)),
            ("φ(s,δ) = δ", a.phi[:, er] == er),
            ("ψ(δ,r) = δ", a.psi[es, :] == es),
            ("ψ(s,δ) = s", a.psi[:, er] == np.arange(s.n)),
        ],
    )


def _powers(j: Permutation, *exps: int) -> List[np.ndarray]:
    return [j.power(e).as_array() for e in exps]


def _even_triviality_check(name: str, r: Loop, s: Loop, a: ActionPair, with_psi: bool = True) -> ConditionCheck:
    parts = [("φ(s,r) = r", a.phi == np.arange(r.n)[None, :])]
    if with_psi:
        parts.append(("ψ(s,r) = s", a.psi == np.arange(s.n)[:, None]))
    return first_of(name, parts)


def matched_pair_conditions(
    r: Loop,
    j_r: Permutation,
    s: Loop,
    j_s: Permutation,
    a: ActionPair,
    m: int,
    m1: Optional[int] = None,
    m2: Optional[int] = None,
    strict: bool = False,
) -> ConditionReport:
    """
    Evaluate the matched pair hypotheses for exponent m.

    Gating checks: unit laws, the four twisted action laws, the congruence system and,
    for even m, triviality of both actions. The two readings of the odd-m laws are
    diagnostics; with ``strict`` the literal reading gates.
    """
    _check_action_shape(r, s, a)
    tr, ts = r.table, s.table
    phi, psi = a.phi, a.psi
    nr, ns = r.n, s.n
    ri, si = np.arange(nr), np.arange(ns)
    jrm, jrm1 = _powers(j_r, m, m + 1)
    jsm, jsm1 = _powers(j_s, m, m + 1)
    js = j_s.as_array()
    es = s.delta

    report = ConditionReport("matched pair")
    report.add(_j_unit_check(r, j_r, s, j_s))
    report.add(_unit_law_check("unit-action-QR-matched-I", r, s, a))
    report.add(
        mask_check(
            "unit-action-QR-matched-I-I",
            phi[si[:, None], phi[js[:, None], ri[None, :]]] == ri[None, :],
            "φ(s,φ(J_S(s),r)) = r",
        )
    )
    # (s, r, r') scans
    A = jrm[tr]
    inner = psi[si[:, None, None], A[None, :, :]]
    lhs_ii = psi[inner, jrm1[ri][None, :, None]]
    rhs = jrm[ri][None, None, :]
    report.add(
        mask_check(
            "unit-action-QR-matched-II",
            lhs_ii == psi[si[:, None, None], rhs],
            "ψ(ψ(s,J^m(rr')),J^{m+1}(r)) = ψ(s,J^m(r'))",
        )
    )
    lhs_iii = tr[phi[si[:, None, None], A[None, :, :]], phi[inner, jrm1[ri][None, :, None]]]
    report.add(
        mask_check(
            "unit-action-QR-matched-III",
            lhs_iii == phi[si[:, None, None], rhs],
            "φ(s,J^m(rr'))φ(ψ(s,J^m(rr')),J^{m+1}(r)) = φ(s,J^m(r'))",
        )
    )
    report.add(
        mask_check(
            "unit-action-QR-matched-IV",
            ts[psi[si[:, None], phi[js[:, None], ri[None, :]]], psi[js[:, None], ri[None, :]]] == es,
            "ψ(s,φ(J_S(s),r))ψ(J_S(s),r) = δ",
        )
    )
    report.add(_congruence_check("cong-eqn-II-matched", r, j_r, s, j_s, m, m1, m2))

    if m % 2 == 0:
        report.add(_even_triviality_check("m-inverse-cond-matched", r, s, a))
    else:
        report.extend(_odd_matched_checks(r, j_r, s, j_s, a, m, strict))
    report.add(
        mask_check(
            "incerse-of-left-action",
            j_r.as_array()[phi] == phi[psi, j_r.as_array()[ri][None, :]],
            "J_R(φ(s,r)) = φ(ψ(s,r),J_R(r))",
            gating=False,
        )
    )
    return report


def _odd_matched_checks(
    r: Loop, j_r: Permutation, s: Loop, j_s: Permutation, a: ActionPair, m: int, strict: bool
) -> List[ConditionCheck]:
    """Both readings of the odd-m laws over (s, s', r)."""
    tr, ts = r.table, s.table
    phi, psi = a.phi, a.psi
    ri, si = np.arange(r.n), np.arange(s.n)
    jrm, jr_neg_m, jr_neg_1 = _powers(j_r, m, -m, -1)
    jsm, jsm1 = _powers(j_s, m, m + 1)
    S = si[:, None, None]
    SP = si[None, :, None]
    R = ri[None, None, :]

    def first_law(inner_exp: np.ndarray) -> np.ndarray:
        outer = jsm[ts[psi[S, jr_neg_m[R]], SP]]
        return phi[outer, phi[psi[S, inner_exp[R]], R]] == phi[jsm[SP], R]

    prod = ts[psi[S, R], SP]
    second = ts[psi[jsm[prod], jrm[phi[S, R]]], jsm1[S]] == psi[jsm[SP], jrm[R]]
    literal_first = first_law(jr_neg_1)
    uniform_first = first_law(jr_neg_m)
    return [
        first_of(
            "m-inverse-cond-matched/literal",
            [
                ("φ(J_S^m(ψ(s,J_R^{-m}(r))s'),φ(ψ(s,J_R^{-1}(r)),r)) = φ(J_S^m(s'),r)", literal_first),
                ("ψ(J_S^m(ψ(s,r)s'),J_R^m(φ(s,r)))J_S^{m+1}(s) = ψ(J_S^m(s'),J_R^m(r))", second),
            ],
            gating=strict,
        ),
        first_of(
            "m-inverse-cond-matched/uniform",
            [
                ("φ(J_S^m(ψ(s,J_R^{-m}(r))s'),φ(ψ(s,J_R^{-m}(r)),r)) = φ(J_S^m(s'),r)", uniform_first),
                ("ψ(J_S^m(ψ(s,r)s'),J_R^m(φ(s,r)))J_S^{m+1}(s) = ψ(J_S^m(s'),J_R^m(r))", second),
            ],
            gating=False,
        ),
    ]


@dataclass
class ProductOutcome:
    """A built product (when its table is a loop) with the report that vetted it."""

    report: ConditionReport
    loop: Optional[Loop] = None
    j: Optional[Permutation] = None
    m: int = 1


def _finish_product(
    r: Loop, j_r: Permutation, s: Loop, j_s: Permutation, a: ActionPair, m: int,
    report: ConditionReport, guaranteed: bool,
) -> ProductOutcome:
    """Build the table and J, then run the defining-identity scan."""
    units_ok = report.passed("unit-action-QR-matched-I") or report.passed("unit-action-QR-units")
    table = build_matched_table(r, s, a)
    is_loop = units_ok and table.is_quasigroup
    report.add(flag_check("loop-table", is_loop, "product table is not a loop with identity (δ,δ)"))
    if not is_loop:
        return ProductOutcome(report, m=m)
    loop = Loop(table, r.delta * s.n + s.delta)
    image = matched_j(r, j_r, s, j_s, a)
    bijective = len(set(image.tolist())) == image.size
    report.add(flag_check("J-permutation", bijective, "J(r,s) = (δ,J_S(s))(J_R(r),δ) is not a bijection"))
    if not bijective:
        return ProductOutcome(report, loop, None, m)
    j = Permutation(tuple(image))
    witness = rst_witness(loop, j, RstTriple.m_inverse(m))
    report.add(ConditionCheck("m-inv", witness is None, witness,
                              "" if witness is None else "J^m(xy)J^{m+1}(x) = J^m(y)"))
    if witness is not None and guaranteed:
        raise InternalConsistencyError(
            f"product passes its hypotheses but fails the {m}-inverse scan at {witness}"
        )
    return ProductOutcome(report, loop, j, m)


def verify_matched_pair(
    r: Loop, j_r: Permutation, s: Loop, j_s: Permutation, a: ActionPair, m: int,
    m1: Optional[int] = None, m2: Optional[int] = None, strict: bool = False,
) -> ProductOutcome:
    """Evaluate the hypotheses and build R ⋈ S without raising on failed conditions."""
    report = matched_pair_conditions(r, j_r, s, j_s, a, m, m1, m2, strict)
    guaranteed = report.ok and (m % 2 == 0 or strict)
    return _finish_product(r, j_r, s, j_s, a, m, report, guaranteed)


def matched_pair_loop(
    r: Loop, j_r: Permutation, s: Loop, j_s: Permutation, a: ActionPair, m: int,
    m1: Optional[int] = None, m2: Optional[int] = None, strict: bool = False,
) -> Tuple[Loop, Permutation]:
    """
    R ⋈ S with (r,s)(r',s') = (rφ(s,r'), ψ(s,r')s') and J(r,s) = (δ,J_S(s))(J_R(r),δ).

    Raises:
        PreconditionError: the report names the first failing condition and its witness.
        InternalConsistencyError: when the hypotheses pass but the defining identity fails.
    """
    outcome = verify_matched_pair(r, j_r, s, j_s, a, m, m1, m2, strict)
    outcome.report.raise_if_failed(f"not a matched pair of {m}-inverse loops")
    logger.info(f"Built matched pair product of order {outcome.loop.n} for m={m}")
    return outcome.loop, outcome.j


def semidirect_conditions(
    r: Loop, j_r: Permutation, s: Loop, j_s: Permutation, phi: Any, m: int,
    m1: Optional[int] = None, m2: Optional[int] = None, strict: bool = False,
) -> ConditionReport:
    """Hypotheses of R ⋊ S for exponent m; the odd-m law gates only with ``strict``."""
    a = ActionPair(phi, ActionPair.trivial(r.n, s.n).psi)
    tr, ts = r.table, s.table
    ph = a.phi
    ri, si = np.arange(r.n), np.arange(s.n)
    jrm, jrm1 = _powers(j_r, m, m + 1)
    jsm, jsm1 = _powers(j_s, m, m + 1)
    S, SP, R = si[:, None, None], si[None, :, None], ri[None, None, :]

    report = ConditionReport("semi-direct product")
    report.add(_j_unit_check(r, j_r, s, j_s))
    report.add(
        first_of(
            "unit-action-QR-units",
            [("φ(δ,r) = r", ph[s.delta, :] == ri), ("φ(s,δ) = δ", ph[:, r.delta] == r.delta)],
        )
    )
    report.add(
        mask_check(
            "unit-action-QR-S-twisted",
            ph[jsm[ts[S, SP]], ph[jsm1[S], R]] == ph[jsm[SP], R],
            "φ(J_S^m(ss'),φ(J_S^{m+1}(s),r)) = φ(J_S^m(s'),r)",
        )
    )
    RR, RP = ri[None, :, None], ri[None, None, :]
    report.add(
        mask_check(
            "unit-action-QR-R-twisted",
            tr[ph[S, jrm[tr[RR, RP]]], ph[S, jrm1[RR]]] == ph[S, jrm[RP]],
            "φ(s,J_R^m(rr'))φ(s,J_R^{m+1}(r)) = φ(s,J_R^m(r'))",
        )
    )
    report.add(_congruence_check("cong-eqn-II", r, j_r, s, j_s, m, m1, m2))
    if m % 2 == 0:
        report.add(_even_triviality_check("m-inverse-cond", r, s, a, with_psi=False))
    else:
        report.add(
            mask_check(
                "m-inverse-cond",
                ph[jsm[ts[S, SP]], ph[S, R]] == ph[jsm[SP], R],
                "φ(J_S^m(ss'),φ(s,r)) = φ(J_S^m(s'),r)",
                gating=strict,
            )
        )
    return report


def verify_semidirect(
    r: Loop, j_r: Permutation, s: Loop, j_s: Permutation, phi: Any, m: int,
    m1: Optional[int] = None, m2: Optional[int] = None, strict: bool = False,
) -> ProductOutcome:
    report = semidirect_conditions(r, j_r, s, j_s, phi, m, m1, m2, strict)
    a = ActionPair(phi, ActionPair.trivial(r.n, s.n).psi)
    guaranteed = report.ok and (m % 2 == 0 or strict)
    return _finish_product(r, j_r, s, j_s, a, m, report, guaranteed)


def semidirect_m_inverse(
    r: Loop, j_r: Permutation, s: Loop, j_s: Permutation, phi: Any, m: int,
    m1: Optional[int] = None, m2: Optional[int] = None, strict: bool = False,
) -> Tuple[Loop, Permutation]:
    """R ⋊ S with (r,s)(r',s') = (rφ(s,r'), ss') and J(r,s) = (φ(J_S(s),J_R(r)), J_S(s))."""
    outcome = verify_semidirect(r, j_r, s, j_s, phi, m, m1, m2, strict)
    outcome.report.raise_if_failed(f"not an {m}-inverse semi-direct product")
    logger.info(f"Built semi-direct product of order {outcome.loop.n} for m={m}")
    return outcome.loop, outcome.j


# ---------------------------------------------------------------------------
# Matched pairs of groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupActionPair:
    """y▷x ∈ G and y◁x ∈ H as tables indexed [y, x]."""

    triangleright: Any
    triangleleft: Any

    def __post_init__(self):
        tri = np.asarray(self.triangleright)
        if tri.ndim != 2:
            raise MalformedTableError(f"▷ must be a 2-D table, got shape {tri.shape}")
        nh, ng = tri.shape
        object.__setattr__(self, "triangleright", _read_only(tri, (nh, ng), ng, "▷"))
        object.__setattr__(self, "triangleleft", _read_only(self.triangleleft, (nh, ng), nh, "◁"))

    @classmethod
    def trivial(cls, g_order: int, h_order: int) -> "GroupActionPair":
        return cls(
            np.broadcast_to(np.arange(g_order)[None, :], (h_order, g_order)),
            np.broadcast_to(np.arange(h_order)[:, None], (h_order, g_order)),
        )

    def as_action_pair(self) -> ActionPair:
        return ActionPair(self.triangleright, self.triangleleft)


def group_matched_pair_conditions(g: Loop, h: Loop, a: GroupActionPair) -> ConditionReport:
    tri, tle = a.triangleright, a.triangleleft
    tg, th = g.table, h.table
    gi, hi = np.arange(g.n), np.arange(h.n)
    Y, X, XP = hi[:, None, None], gi[None, :, None], gi[None, None, :]
    YP = hi[None, :, None]
    XX = gi[None, None, :]
    report = ConditionReport("matched pair of groups")
    report.add(
        first_of(
            "left-action",
            [
                ("1▷x = x", tri[h.delta, :] == gi),
                ("(yy')▷x = y▷(y'▷x)", tri[th[Y, YP], XX] == tri[Y, tri[YP, XX]]),
            ],
        )
    )
    report.add(
        first_of(
            "right-action",
            [
                ("y◁1 = y", tle[:, g.delta] == hi),
                ("y◁(xx') = (y◁x)◁x'", tle[Y, tg[X, XP]] == tle[tle[Y, X], XP]),
            ],
        )
    )
    report.add(mask_check("matched-unit-left", tri[:, g.delta] == g.delta, "y▷1 = 1"))
    report.add(mask_check("matched-unit-right", tle[h.delta, :] == h.delta, "1◁x = 1"))
    report.add(
        mask_check(
            "matched-compat-left",
            tri[Y, tg[X, XP]] == tg[tri[Y, X], tri[tle[Y, X], XP]],
            "y▷(xx') = (y▷x)((y◁x)▷x')",
        )
    )
    report.add(
        mask_check(
            "matched-compat-right",
            tle[th[Y, YP], XX] == th[tle[Y, tri[YP, XX]], tle[YP, XX]],
            "(yy')◁x = (y◁(y'▷x))(y'◁x)",
        )
    )
    return report


def group_matched_pair(g: Loop, h: Loop, a: GroupActionPair) -> Loop:
    """
    G ⋈ H on pairs (x, y) -> x*|H| + y with (x,y)(x',y') = (x(y▷x'), (y◁x')y').

    Raises:
        PreconditionError: a matched pair law fails; the report carries the witness.
        InternalConsistencyError: the laws hold but the product is not associative.
    """
    _require_group(g, "G")
    _require_group(h, "H")
    group_matched_pair_conditions(g, h, a).raise_if_failed("not a matched pair of groups")
    table = build_matched_table(g, h, a.as_action_pair())
    loop = Loop(table, g.delta * h.n + h.delta)
    if not is_associative(loop):
        raise InternalConsistencyError("matched pair of groups is not associative")
    logger.info(f"Built matched pair group of order {loop.n}")
    return loop


# ---------------------------------------------------------------------------
# The Λ-extension of a matched pair of groups
# ---------------------------------------------------------------------------


def _suffixed(check: ConditionCheck, suffix: str) -> ConditionCheck:
    return ConditionCheck(f"{check.name}-{suffix}", check.ok, check.witness, check.detail, check.gating)


@dataclass
class LambdaBundle:
    """(G⋈H) ×_Λ (V×W), its factor loops, the induced actions and the comparison map."""

    q: Loop
    j_q: Permutation
    r: Loop
    j_r: Permutation
    s: Loop
    j_s: Permutation
    actions: ActionPair
    theta: np.ndarray
    group: Loop
    matched: Loop
    j_matched: Permutation
    r_embed: np.ndarray
    s_embed: np.ndarray
    m: int
    report: ConditionReport

    def to_manifest(self) -> Dict[str, Any]:
        return {
            "order": self.q.n,
            "factors": {"R": self.r.n, "S": self.s.n, "group": self.group.n},
            "m": self.m,
            "h": aut_power_order(self.q, self.j_q),
            "r_embed": self.r_embed.tolist(),
            "s_embed": self.s_embed.tolist(),
            "theta": self.theta.tolist(),
            "actions": self.actions.to_dict(),
            "conditions": self.report.to_dict(),
        }


def lambda_conditions(
    g: Loop, h: Loop, a: GroupActionPair, phi: CocycleMap, chi: CocycleMap, strict: bool = False
) -> ConditionReport:
    """Invariance laws of φ and χ under the mutual actions."""
    tri, tle = a.triangleright, a.triangleleft
    ng, nh = g.n, h.n
    pv, cv = phi.values, chi.values
    report = ConditionReport("lambda example")
    report.add(
        mask_check(
            "vp-invariance",
            pv[np.arange(ng)[:, None, None], tri[None, :, :]] == pv[:, None, :],
            "φ(x,x') = φ(x,y▷x')",
        )
    )
    yp = np.arange(nh)[None, None, :]
    report.add(
        mask_check(
            "chi-invariance",
            cv[tle[:, :, None], yp] == cv[:, None, :],
            "χ(y,y') = χ(y◁x,y')",
            gating=not strict,
        )
    )
    typed = (tle[:, :, None] < ng) & (yp < ng)
    literal = np.where(
        typed,
        pv[np.clip(tle, 0, ng - 1)[:, :, None], np.clip(yp, 0, ng - 1)] == cv[:, None, :],
        False,
    )
    report.add(mask_check("chi-invariance/literal", literal, "χ(y,y') = φ(y◁x,y')", gating=strict))
    return report


def lambda_example(
    g: Loop,
    h: Loop,
    a: GroupActionPair,
    v: Loop,
    w: Loop,
    phi: CocycleMap,
    chi: CocycleMap,
    m: int = 1,
    strict: bool = False,
) -> LambdaBundle:
    """
    Build (G⋈H) ×_Λ (V×W) with Λ((x,y),(x',y')) = (φ(x,x'), χ(y,y')).

    Q indexes ((x, y), (v, w)) as (x*|H| + y)*|V||W| + v*|W| + w; the factor loops
    R = G ×_φ V and S = H ×_χ W index (x, v) and (y, w) the same way.

    Raises:
        PreconditionError: a law fails; the report names it with its witness.
        InternalConsistencyError: R ⋈ S and Q disagree under the canonical bijection.
    """
    if m % 2 == 0:
        raise PreconditionError(f"the Λ-extension is odd-invertible only; got m={m}")
    report = group_matched_pair_conditions(g, h, a)
    report.merge(lambda_conditions(g, h, a, phi, chi, strict))
    for c, tag in ((phi, "phi"), (chi, "chi")):
        report.extend(_suffixed(chk, tag) for chk in odd_invertible_conditions(c).checks)
    report.raise_if_failed("Λ-example data rejected")

    group = group_matched_pair(g, h, a)
    vw = loop_direct_product(v, w)
    ng, nh, nv, nw = g.n, h.n, v.n, w.n
    xs, ys = np.divmod(np.arange(ng * nh), nh)
    lam = phi.values[xs[:, None], xs[None, :]] * nw + chi.values[ys[:, None], ys[None, :]]
    lam_map = CocycleMap(group, vw, lam)
    report.merge(odd_invertible_conditions(lam_map))
    report.raise_if_failed("Λ is not an odd-invertible cocycle")
    q, j_q = odd_invertible_loop(group, vw, lam_map)
    r, j_r = odd_invertible_loop(g, v, phi)
    s, j_s = odd_invertible_loop(h, w, chi)

    tri, tle = a.triangleright, a.triangleleft
    y = np.arange(nh)[:, None, None, None]
    ww = np.arange(nw)[None, :, None, None]
    x = np.arange(ng)[None, None, :, None]
    vv = np.arange(nv)[None, None, None, :]
    shape = (nh, nw, ng, nv)
    phi_act = np.broadcast_to(tri[y, x] * nv + vv, shape).reshape(nh * nw, ng * nv)
    psi_act = np.broadcast_to(tle[y, x] * nw + ww, shape).reshape(nh * nw, ng * nv)
    actions = ActionPair(phi_act, psi_act)

    xr, vr = np.divmod(np.arange(ng * nv), nv)
    ysr, wsr = np.divmod(np.arange(nh * nw), nw)
    theta = (xr[:, None] * nh + ysr[None, :]) * (nv * nw) + vr[:, None] * nw + wsr[None, :]
    r_embed = (xr * nh + h.delta) * (nv * nw) + vr * nw + w.delta
    s_embed = (g.delta * nh + ysr) * (nv * nw) + v.delta * nw + wsr

    outcome = verify_matched_pair(r, j_r, s, j_s, actions, m, strict=strict)
    report.merge(outcome.report)
    report.raise_if_failed("induced actions do not form a matched pair")
    flat = theta.ravel()
    if not np.array_equal(q.table[flat[:, None], flat[None, :]], flat[outcome.loop.table]):
        raise InternalConsistencyError("R ⋈ S and (G⋈H) ×_Λ (V×W) differ under Θ")
    if not np.array_equal(j_q.as_array()[flat], flat[outcome.j.as_array()]):
        raise InternalConsistencyError("J on R ⋈ S and on (G⋈H) ×_Λ (V×W) differ under Θ")
    logger.info(f"Λ-example of order {q.n} matches R ⋈ S table-for-table")
    return LambdaBundle(
        q=q, j_q=j_q, r=r, j_r=j_r, s=s, j_s=j_s, actions=actions, theta=theta,
        group=group, matched=outcome.loop, j_matched=outcome.j,
        r_embed=r_embed, s_embed=s_embed, m=m, report=report,
    )
