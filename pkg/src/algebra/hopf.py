#!/usr/bin/env python3
# src/algebra/hopf.py
"""Finite-dimensional m-invertible Hopf quasigroups with exact rational structure constants."""
import dataclasses
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from config.config import cfg
from src.algebra.constructions import ActionPair, matched_pair_loop
from src.algebra.diagnostics import ConditionCheck, ConditionReport, flag_check
from src.algebra.errors import (
    InternalConsistencyError,
    MalformedTableError,
    ResourceCapError,
    SingularAntipodeError,
)
from src.algebra.inverse_classify import crt_solve
from src.algebra.loops_core import Loop, Permutation

logger = logging.getLogger(__name__)

ONE = Fraction(1)
ZERO = Fraction(0)

Vector = Dict[Any, Fraction]
Rows = List[List[Tuple[int, Fraction]]]


# ---------------------------------------------------------------------------
# Exact scalars and sparse vectors
# ---------------------------------------------------------------------------


def to_exact(value: Any) -> Fraction:
    """Convert ints, rational strings, Fractions and sympy rationals; floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, sp.Rational):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, (float, np.floating)):
        raise MalformedTableError(f"floating point scalar {value!r}; give an integer or 'p/q'")
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise MalformedTableError(f"not an exact rational: {value!r}") from exc


def exact_array(values: Any, shape: Tuple[int, ...], what: str) -> np.ndarray:
    """Object array of Fractions with the given shape, read-only."""
    raw = np.asarray(values, dtype=object)
    if raw.shape != shape:
        raise MalformedTableError(f"{what} must have shape {shape}, got {raw.shape}")
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        out[idx] = to_exact(raw[idx])
    out.setflags(write=False)
    return out


def zeros(shape: Tuple[int, ...]) -> np.ndarray:
    return np.full(shape, ZERO, dtype=object)


def _acc(out: Vector, key: Any, c: Fraction):
    if not c:
        return
    total = out.get(key, ZERO) + c
    if total:
        out[key] = total
    else:
        out.pop(key, None)


def _add(out: Vector, vec: Vector, c: Fraction = ONE):
    for key, value in vec.items():
        _acc(out, key, c * value)


def _scaled(vec: Vector, c: Fraction) -> Vector:
    return {k: v * c for k, v in vec.items()} if c else {}


def _tensor(u: Vector, v: Vector) -> Vector:
    return {(a, b): cu * cv for a, cu in u.items() for b, cv in v.items()}


def _linear(rows: Rows, u: Vector) -> Vector:
    out: Vector = {}
    for i, cu in u.items():
        for j, c in rows[i]:
            _acc(out, j, cu * c)
    return out


def _rows(mat: np.ndarray) -> Rows:
    return [[(j, c) for j, c in enumerate(row) if c] for row in mat]


def _bilinear_rows(tensor: np.ndarray) -> List[List[List[Tuple[int, Fraction]]]]:
    return [[[(k, c) for k, c in enumerate(cell) if c] for cell in row] for row in tensor]


def _bilinear(rows, u: Vector, v: Vector) -> Vector:
    out: Vector = {}
    for a, cu in u.items():
        for b, cv in v.items():
            for k, c in rows[a][b]:
                _acc(out, k, cu * cv * c)
    return out


def _exact_inverse(mat: np.ndarray) -> np.ndarray:
    m = sp.Matrix(mat.tolist())
    if m.det() == 0:
        raise SingularAntipodeError("antipode matrix is singular")
    inv = m.inv()
    out = zeros(mat.shape)
    for i, j in itertools.product(range(mat.shape[0]), repeat=2):
        out[i, j] = to_exact(sp.Rational(inv[i, j]))
    return out


def is_invertible(mat: np.ndarray) -> bool:
    return sp.Matrix(mat.tolist()).det() != 0


# ---------------------------------------------------------------------------
# Structure data
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HopfQuasigroupData:
    """
    Structure constants on the basis e_0, ..., e_{d-1}.

    ``mu[i, j, k]`` is the coefficient of e_k in e_i e_j, ``delta[i, j, k]`` that of
    e_j ⊗ e_k in Δ(e_i), and ``antipode[i, j]`` that of e_j in S(e_i).
    """

    mu: Any
    eta: Any
    delta: Any
    eps: Any
    antipode: Any
    names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=object)
        d = eta.shape[0] if eta.ndim == 1 else 0
        if d == 0:
            raise MalformedTableError("eta must be a non-empty vector")
        object.__setattr__(self, "mu", exact_array(self.mu, (d, d, d), "mu"))
        object.__setattr__(self, "eta", exact_array(self.eta, (d,), "eta"))
        object.__setattr__(self, "delta", exact_array(self.delta, (d, d, d), "delta"))
        object.__setattr__(self, "eps", exact_array(self.eps, (d,), "eps"))
        object.__setattr__(self, "antipode", exact_array(self.antipode, (d, d), "antipode"))
        if self.names is not None and len(self.names) != d:
            raise MalformedTableError(f"{len(self.names)} names for dimension {d}")

    @property
    def dim(self) -> int:
        return int(self.eta.shape[0])

    @cached_property
    def mu_rows(self):
        return _bilinear_rows(self.mu)

    @cached_property
    def delta_rows(self) -> List[List[Tuple[Tuple[int, int], Fraction]]]:
        d = self.dim
        return [
            [((a, b), self.delta[i, a, b]) for a in range(d) for b in range(d) if self.delta[i, a, b]]
            for i in range(d)
        ]

    @cached_property
    def power_cache(self) -> Dict[int, Rows]:
        return {}

    def basis(self, i: int) -> Vector:
        return {i: ONE}

    def unit(self) -> Vector:
        return {i: c for i, c in enumerate(self.eta) if c}

    def mul(self, u: Vector, v: Vector) -> Vector:
        return _bilinear(self.mu_rows, u, v)

    def comul(self, u: Vector) -> Vector:
        out: Vector = {}
        for i, cu in u.items():
            for key, c in self.delta_rows[i]:
                _acc(out, key, cu * c)
        return out

    def counit(self, u: Vector) -> Fraction:
        return sum((c * self.eps[i] for i, c in u.items()), ZERO)

    def s(self, u: Vector, power: int = 1) -> Vector:
        """S^power applied to u."""
        if power not in self.power_cache:
            self.power_cache[power] = _rows(antipode_power(self, power))
        return _linear(self.power_cache[power], u)

    def legs(self, i: int, k: int) -> List[Tuple[Tuple[int, ...], Fraction]]:
        """Iterated coproduct of e_i into k tensor legs."""
        out: List[Tuple[Tuple[int, ...], Fraction]] = [((i,), ONE)]
        for _ in range(k - 1):
            out = [
                (t[:-1] + pair, c * c2)
                for t, c in out
                for pair, c2 in self.delta_rows[t[-1]]
            ]
        return out

    def same_structure(self, other: "HopfQuasigroupData") -> bool:
        return self.dim == other.dim and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("mu", "eta", "delta", "eps", "antipode")
        )


def antipode_power(h: HopfQuasigroupData, k: int) -> np.ndarray:
    """
    Matrix of S^k; negative powers use the exact inverse.

    Raises:
        SingularAntipodeError: k < 0 and S is singular.
    """
    base = h.antipode if k >= 0 else _exact_inverse(h.antipode)
    result = zeros((h.dim, h.dim))
    for i in range(h.dim):
        result[i, i] = ONE
    for _ in range(abs(k)):
        result = np.dot(result, base)
    return result


# ---------------------------------------------------------------------------
# Axiom verification
# ---------------------------------------------------------------------------


def _scan(
    name: str,
    indices: Iterable[Tuple[int, ...]],
    holds: Callable[..., bool],
    detail: str,
    gating: bool = True,
) -> ConditionCheck:
    """First index tuple (lexicographic) where `holds` is false."""
    for idx in indices:
        if not holds(*idx):
            return ConditionCheck(name, False, tuple(idx), detail, gating)
    return ConditionCheck(name, True, None, "", gating)


def _pairs(*sizes: int) -> Iterable[Tuple[int, ...]]:
    return itertools.product(*(range(n) for n in sizes))


def s_m_prop_sides(h: HopfQuasigroupData, u: Vector, g: Vector, m: int) -> Tuple[Vector, Vector]:
    """Both sides of S^m(u₂g)S^{m+1}(u₁) = ε(u)S^m(g) for arbitrary elements."""
    lhs: Vector = {}
    for (a, b), c in h.comul(u).items():
        _add(lhs, h.mul(h.s(h.mul(h.basis(b), g), m), h.s(h.basis(a), m + 1)), c)
    return lhs, _scaled(h.s(g, m), h.counit(u))


def _s_prop(h: HopfQuasigroupData, i: int) -> bool:
    target = _scaled(h.unit(), h.eps[i])
    left: Vector = {}
    right: Vector = {}
    for (a, b), c in h.delta_rows[i]:
        _add(left, h.mul(h.basis(a), h.s(h.basis(b))), c)
        _add(right, h.mul(h.s(h.basis(a)), h.basis(b)), c)
    return left == target and right == target


def _anti_coalgebra(h: HopfQuasigroupData, i: int) -> bool:
    image = h.s(h.basis(i))
    flipped: Vector = {}
    for (a, b), c in h.delta_rows[i]:
        _add(flipped, _tensor(h.s(h.basis(b)), h.s(h.basis(a))), c)
    return h.comul(image) == flipped and h.counit(image) == h.eps[i]


def _delta_multiplicative(h: HopfQuasigroupData, i: int, j: int) -> bool:
    rhs: Vector = {}
    for (a, b), c1 in h.delta_rows[i]:
        for (p, q), c2 in h.delta_rows[j]:
            _add(rhs, _tensor(h.mul(h.basis(a), h.basis(p)), h.mul(h.basis(b), h.basis(q))), c1 * c2)
    return h.comul(h.mul(h.basis(i), h.basis(j))) == rhs


def _antipode_checks(h: HopfQuasigroupData, m: int, gating: bool = True) -> List[ConditionCheck]:
    d = h.dim
    return [
        _scan("S-anti-coalgebra", _pairs(d), lambda i: _anti_coalgebra(h, i),
              "Δ(S(h)) = S(h₂)⊗S(h₁) or ε(S(h)) = ε(h) fails", gating),
        _scan("S-prop", _pairs(d), lambda i: _s_prop(h, i),
              "h₁S(h₂) = ε(h)δ = S(h₁)h₂ fails", gating),
        _scan("S-m-prop", _pairs(d, d), lambda i, j: _equal_sides(s_m_prop_sides(h, h.basis(i), h.basis(j), m)),
              f"S^{m}(h₂g)S^{m + 1}(h₁) = ε(h)S^{m}(g) fails", gating),
    ]


def _equal_sides(sides: Tuple[Vector, Vector]) -> bool:
    return sides[0] == sides[1]


def verify_hopf_quasigroup(
    h: HopfQuasigroupData, m: int, candidates: Optional[Sequence[Any]] = None
) -> ConditionReport:
    """
    Check every axiom of an m-invertible Hopf quasigroup on basis elements.

    Args:
        h: Structure constants.
        m: Exponent of the S^m law.
        candidates: Other antipode matrices; any that also satisfies the antipode laws
            must coincide with S.

    Returns:
        ConditionReport with one entry per axiom and the first failing basis tuple.
    """
    d = h.dim
    unit = h.unit()
    report = ConditionReport("hopf quasigroup")
    report.add(
        _scan("unital", _pairs(d), lambda i: h.mul(unit, h.basis(i)) == h.basis(i) == h.mul(h.basis(i), unit),
              "μ(η⊗h) = h = μ(h⊗η) fails")
    )

    def coassociative(i: int) -> bool:
        left: Vector = {}
        right: Vector = {}
        for (a, b), c in h.delta_rows[i]:
            for key, c2 in h.delta_rows[a]:
                _acc(left, key + (b,), c * c2)
            for key, c2 in h.delta_rows[b]:
                _acc(right, (a,) + key, c * c2)
        return left == right

    report.add(_scan("coassociative", _pairs(d), coassociative, "(Δ⊗id)Δ = (id⊗Δ)Δ fails"))

    def counital(i: int) -> bool:
        left: Vector = {}
        right: Vector = {}
        for (a, b), c in h.delta_rows[i]:
            _acc(left, b, c * h.eps[a])
            _acc(right, a, c * h.eps[b])
        return left == right == h.basis(i)

    report.add(_scan("counital", _pairs(d), counital, "(ε⊗id)Δ = id = (id⊗ε)Δ fails"))
    report.add(
        flag_check(
            "unit-group-like",
            h.comul(unit) == _tensor(unit, unit) and h.counit(unit) == ONE,
            "Δ(η) = η⊗η and ε(η) = 1 fail",
        )
    )
    report.add(_scan("delta-multiplicative", _pairs(d, d), lambda i, j: _delta_multiplicative(h, i, j),
                     "Δ(hg) = Δ(h)Δ(g) fails"))
    report.add(
        _scan("eps-multiplicative", _pairs(d, d),
              lambda i, j: h.counit(h.mul(h.basis(i), h.basis(j))) == h.eps[i] * h.eps[j],
              "ε(hg) = ε(h)ε(g) fails")
    )
    report.add(flag_check("S-invertible", is_invertible(h.antipode), "S is singular"))
    report.extend(_antipode_checks(h, m))

    for n, cand in enumerate(candidates or ()):
        other = dataclasses.replace(h, antipode=cand)
        if not all(c.ok for c in _antipode_checks(other, m)):
            logger.debug(f"Candidate antipode {n} is not an antipode; skipped")
            continue
        same = np.array_equal(other.antipode, h.antipode)
        report.add(ConditionCheck("S-unique", same, None if same else (n,),
                                  "" if same else f"candidate {n} is a second antipode"))
    logger.debug(f"Verified Hopf quasigroup of dimension {d} at m={m}: ok={report.ok}")
    return report


# ---------------------------------------------------------------------------
# Examples and tensor products
# ---------------------------------------------------------------------------


def group_algebra(q: Loop, j: Permutation) -> HopfQuasigroupData:
    """kQ with group-like basis: Δ(q) = q⊗q, ε(q) = 1 and S(q) = J(q)."""
    n = q.n
    idx = np.arange(n)
    mu = zeros((n, n, n))
    mu[idx[:, None], idx[None, :], q.table] = ONE
    delta = zeros((n, n, n))
    delta[idx, idx, idx] = ONE
    antipode = zeros((n, n))
    antipode[idx, j.as_array()] = ONE
    eta = zeros((n,))
    eta[q.delta] = ONE
    return HopfQuasigroupData(mu, eta, delta, np.full(n, ONE, dtype=object), antipode, q.q.names)


def trivial_hopf_algebra() -> HopfQuasigroupData:
    """The one-dimensional Hopf algebra k."""
    return HopfQuasigroupData([[[1]]], [1], [[[1]]], [1], [[1]])


def _kron(a: np.ndarray, b: np.ndarray, axes: int) -> np.ndarray:
    """Outer product with the paired axes interleaved and merged."""
    outer = np.multiply.outer(a, b)
    order = [k for pair in zip(range(axes), range(axes, 2 * axes)) for k in pair]
    merged = outer.transpose(order)
    return merged.reshape(tuple(a.shape[k] * b.shape[k] for k in range(axes)))


def tensor_product(h1: HopfQuasigroupData, h2: HopfQuasigroupData) -> HopfQuasigroupData:
    """
    H1 ⊗ H2 on the basis e_i ⊗ f_a -> i*d2 + a, with the middle flip in Δ.

    Raises:
        ResourceCapError: the product dimension exceeds the configured cap.
    """
    d = h1.dim * h2.dim
    if d > cfg.dim_cap:
        raise ResourceCapError(f"tensor product of dimension {d} exceeds cap {cfg.dim_cap}", partial_size=d)
    names = None
    if h1.names is not None and h2.names is not None:
        names = tuple(f"{a}⊗{b}" for a in h1.names for b in h2.names)
    return HopfQuasigroupData(
        mu=_kron(h1.mu, h2.mu, 3),
        eta=_kron(h1.eta, h2.eta, 1),
        delta=_kron(h1.delta, h2.delta, 3),
        eps=_kron(h1.eps, h2.eps, 1),
        antipode=_kron(h1.antipode, h2.antipode, 2),
        names=names,
    )


def is_hopf_automorphism(h: HopfQuasigroupData, p: Any) -> bool:
    """P invertible, unital, multiplicative and a coalgebra map."""
    d = h.dim
    mat = exact_array(p, (d, d), "automorphism")
    if not is_invertible(mat):
        return False
    rows = _rows(mat)
    unit = h.unit()
    if _linear(rows, unit) != unit:
        return False
    for i in range(d):
        image = _linear(rows, h.basis(i))
        if h.counit(image) != h.eps[i]:
            return False
        pushed: Vector = {}
        for (a, b), c in h.delta_rows[i]:
            _add(pushed, _tensor(_linear(rows, h.basis(a)), _linear(rows, h.basis(b))), c)
        if h.comul(image) != pushed:
            return False
    return all(
        _linear(rows, h.mul(h.basis(i), h.basis(j)))
        == h.mul(_linear(rows, h.basis(i)), _linear(rows, h.basis(j)))
        for i, j in _pairs(d, d)
    )


def hopf_aut_power_order(h: HopfQuasigroupData, limit: Optional[int] = None) -> int:
    """Least r ≥ 1 with S^r a Hopf automorphism."""
    limit = cfg.closure_cap if limit is None else limit
    power = h.antipode
    for r in range(1, limit + 1):
        if is_hopf_automorphism(h, power):
            return r
        power = np.dot(power, h.antipode)
    raise ResourceCapError(f"no power S^r with r ≤ {limit} is a Hopf automorphism", partial_size=limit)


def is_hopf_shift_closed(h: HopfQuasigroupData, m: int, r: Optional[int] = None, shifts=(-1, 1)) -> bool:
    """If the S^m law holds and S^r is a Hopf automorphism, the S^{m+ur} laws hold too."""
    if not verify_hopf_quasigroup(h, m).ok:
        return True
    r = hopf_aut_power_order(h) if r is None else r
    return all(verify_hopf_quasigroup(h, m + u * r).ok for u in shifts)


def tensor_exponents(
    h1: HopfQuasigroupData, m1: int, h2: HopfQuasigroupData, m2: int
) -> List[int]:
    """
    Exponents m ≡ m_i (mod r_i) for which H1 ⊗ H2 is m-invertible, each confirmed by scan.

    Raises:
        InternalConsistencyError: a congruence solution fails the scan.
    """
    r1, r2 = hopf_aut_power_order(h1), hopf_aut_power_order(h2)
    m = crt_solve(m1, r1, m2, r2)
    if m is None:
        return []
    product = tensor_product(h1, h2)
    if not verify_hopf_quasigroup(product, m).ok:
        raise InternalConsistencyError(f"tensor product fails the Hopf axioms at m={m}")
    return [m]


# ---------------------------------------------------------------------------
# Hopf matched pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LinearActionPair:
    """
    φ: H2⊗H1 → H1 and ψ: H2⊗H1 → H2.

    ``phi[b, i, k]`` is the coefficient of e_k in φ(f_b ⊗ e_i); ``psi[b, i, c]`` that of f_c in ψ(f_b ⊗ e_i).
    """

    phi: Any
    psi: Any

    def __post_init__(self):
        shape = np.asarray(self.phi, dtype=object).shape
        if len(shape) != 3 or shape[1] != shape[2]:
            raise MalformedTableError(f"phi must have shape (d2, d1, d1), got {shape}")
        d2, d1, _ = shape
        object.__setattr__(self, "phi", exact_array(self.phi, (d2, d1, d1), "phi"))
        object.__setattr__(self, "psi", exact_array(self.psi, (d2, d1, d2), "psi"))

    @classmethod
    def trivial(cls, h1: HopfQuasigroupData, h2: HopfQuasigroupData) -> "LinearActionPair":
        """φ = ε⊗id and ψ = id⊗ε."""
        d1, d2 = h1.dim, h2.dim
        phi, psi = zeros((d2, d1, d1)), zeros((d2, d1, d2))
        for b, i in _pairs(d2, d1):
            phi[b, i, i] = h2.eps[b]
            psi[b, i, b] = h1.eps[i]
        return cls(phi, psi)

    @cached_property
    def phi_rows(self):
        return _bilinear_rows(self.phi)

    @cached_property
    def psi_rows(self):
        return _bilinear_rows(self.psi)

    def act_phi(self, u2: Vector, u1: Vector) -> Vector:
        return _bilinear(self.phi_rows, u2, u1)

    def act_psi(self, u2: Vector, u1: Vector) -> Vector:
        return _bilinear(self.psi_rows, u2, u1)


def linear_actions_from_sets(a: ActionPair) -> LinearActionPair:
    """Linearize set-level actions on group-like bases."""
    ns, nr = a.s_order, a.r_order
    phi, psi = zeros((ns, nr, nr)), zeros((ns, nr, ns))
    for s, r in _pairs(ns, nr):
        phi[s, r, a.phi[s, r]] = ONE
        psi[s, r, a.psi[s, r]] = ONE
    return LinearActionPair(phi, psi)


def _check_dims(h1: HopfQuasigroupData, h2: HopfQuasigroupData, a: LinearActionPair):
    if a.phi.shape[:2] != (h2.dim, h1.dim):
        raise MalformedTableError(
            f"actions have shape {a.phi.shape[:2]}, expected {(h2.dim, h1.dim)}"
        )


def _sweedler(h1: HopfQuasigroupData, h2: HopfQuasigroupData, b: int, i: int, k2: int, k1: int):
    """Legs of Δ^{k2-1}(f_b) and Δ^{k1-1}(e_i) with their combined coefficient."""
    for legs2, c2 in h2.legs(b, k2):
        for legs1, c1 in h1.legs(i, k1):
            yield legs2, legs1, c2 * c1


def hopf_matched_conditions(
    h1: HopfQuasigroupData,
    h2: HopfQuasigroupData,
    a: LinearActionPair,
    m: int,
    m1: Optional[int] = None,
    m2: Optional[int] = None,
) -> ConditionReport:
    """
    Hypotheses for H1 ⋈ H2 on basis tuples; every check gates.

    Unit/counit laws, both module-coalgebra laws, the antipode-twisted action laws, the
    side-switch law, the congruence system and the m-inverse condition: both actions
    trivial for even m, two laws over (h', g, g') for odd m.
    """
    _check_dims(h1, h2, a)
    d1, d2 = h1.dim, h2.dim
    e1, e2 = h1.basis, h2.basis
    eta1, eta2 = h1.unit(), h2.unit()
    phi, psi = a.act_phi, a.act_psi
    report = ConditionReport("hopf matched pair")

    report.add(
        _scan(
            "unit-action-QR-matched-I-Hopf",
            _pairs(d2, d1),
            lambda b, i: phi(eta2, e1(i)) == e1(i)
            and psi(eta2, e1(i)) == _scaled(eta2, h1.eps[i])
            and phi(e2(b), eta1) == _scaled(eta1, h2.eps[b])
            and psi(e2(b), eta1) == e2(b),
            "φ(δ,h) = h, ψ(δ,h) = ε(h)δ, φ(h',δ) = ε(h')δ or ψ(h',δ) = h' fails",
        )
    )

    def module_coalg(act, target: HopfQuasigroupData, b: int, i: int) -> bool:
        rhs: Vector = {}
        for (p, q), (u, v), c in _sweedler(h1, h2, b, i, 2, 2):
            _add(rhs, _tensor(act(e2(p), e1(u)), act(e2(q), e1(v))), c)
        image = act(e2(b), e1(i))
        return target.comul(image) == rhs and target.counit(image) == h2.eps[b] * h1.eps[i]

    report.add(_scan("module-coalg-I", _pairs(d2, d1), lambda b, i: module_coalg(phi, h1, b, i),
                     "Δ₁(φ(h',h)) = φ(h'₁,h₁)⊗φ(h'₂,h₂) fails"))
    report.add(_scan("module-coalg-II", _pairs(d2, d1), lambda b, i: module_coalg(psi, h2, b, i),
                     "Δ₂(ψ(h',h)) = ψ(h'₁,h₁)⊗ψ(h'₂,h₂) fails"))

    report.extend(_twisted_hopf_checks(h1, h2, a, m))

    def side_switch(b: int, i: int) -> bool:
        left: Vector = {}
        right: Vector = {}
        for (p, q), (u, v), c in _sweedler(h1, h2, b, i, 2, 2):
            _add(left, _tensor(psi(e2(p), e1(u)), phi(e2(q), e1(v))), c)
            _add(right, _tensor(psi(e2(q), e1(v)), phi(e2(p), e1(u))), c)
        return left == right

    report.add(_scan("unit-action-QR-matched-V-Hopf", _pairs(d2, d1), side_switch,
                     "ψ(h'₁,h₁)⊗φ(h'₂,h₂) = ψ(h'₂,h₂)⊗φ(h'₁,h₁) fails"))

    m1 = m if m1 is None else m1
    m2 = m if m2 is None else m2
    problems = []
    if not verify_hopf_quasigroup(h1, m1).ok:
        problems.append(f"H1 is not {m1}-invertible")
    if not verify_hopf_quasigroup(h2, m2).ok:
        problems.append(f"H2 is not {m2}-invertible")
    if not problems and (m != m1 or m != m2):
        r1, r2 = hopf_aut_power_order(h1), hopf_aut_power_order(h2)
        if (m - m1) % r1 or (m - m2) % r2:
            problems.append(f"m={m} does not solve m ≡ {m1} (mod {r1}), m ≡ {m2} (mod {r2})")
    report.add(flag_check("cong-eqn-Hopf", not problems, "; ".join(problems)))

    if m % 2 == 0:
        report.add(
            _scan(
                "m-inverse-cond-matched-Hopf",
                _pairs(d2, d1),
                lambda b, i: phi(e2(b), e1(i)) == _scaled(e1(i), h2.eps[b])
                and psi(e2(b), e1(i)) == _scaled(e2(b), h1.eps[i]),
                "φ(h',h) = ε(h')h and ψ(h',h) = ε(h)h' fail",
            )
        )
    else:
        report.add(_odd_hopf_check(h1, h2, a, m))
    return report


def _twisted_hopf_checks(
    h1: HopfQuasigroupData, h2: HopfQuasigroupData, a: LinearActionPair, m: int
) -> List[ConditionCheck]:
    """Action laws that involve the antipodes, over (h', h) or (h', h, g)."""
    d1, d2 = h1.dim, h2.dim
    e1, e2 = h1.basis, h2.basis
    mul1, mul2 = h1.mul, h2.mul
    s1, s2 = h1.s, h2.s
    phi, psi = a.act_phi, a.act_psi

    def law_ii_a(b: int, i: int) -> bool:
        left: Vector = {}
        right: Vector = {}
        for (p, q), c in h2.delta_rows[b]:
            _add(left, phi(s2(e2(p)), phi(e2(q), e1(i))), c)
            _add(right, phi(e2(p), phi(s2(e2(q)), e1(i))), c)
        target = _scaled(e1(i), h2.eps[b])
        return left == target == right

    def law_ii_b(b: int, i: int, j: int) -> bool:
        lhs: Vector = {}
        for (u, v), c in h1.delta_rows[i]:
            inner = psi(e2(b), s1(mul1(e1(v), e1(j)), m))
            _add(lhs, psi(inner, s1(e1(u), m + 1)), c)
        return lhs == _scaled(psi(e2(b), s1(e1(j), m)), h1.eps[i])

    def law_ii_b_prime(b: int, i: int) -> bool:
        left: Vector = {}
        right: Vector = {}
        for (u, v), c in h1.delta_rows[i]:
            _add(left, psi(psi(e2(b), s1(e1(u))), e1(v)), c)
            _add(right, psi(psi(e2(b), e1(u)), s1(e1(v))), c)
        target = _scaled(e2(b), h1.eps[i])
        return left == target == right

    def law_iii(b: int, i: int, j: int) -> bool:
        lhs: Vector = {}
        for (p, q), (u, v, w), c1 in _sweedler(h1, h2, b, i, 2, 3):
            for (x, y), c2 in h1.delta_rows[j]:
                if m % 2:
                    first = phi(e2(p), s1(mul1(e1(w), e1(y)), m))
                    inner = psi(e2(q), s1(mul1(e1(v), e1(x)), m))
                else:
                    first = phi(e2(p), s1(mul1(e1(v), e1(x)), m))
                    inner = psi(e2(q), s1(mul1(e1(w), e1(y)), m))
                _add(lhs, mul1(first, phi(inner, s1(e1(u), m + 1))), c1 * c2)
        return lhs == _scaled(phi(e2(b), s1(e1(j), m)), h1.eps[i])

    def law_iii_a(b: int, i: int) -> bool:
        left: Vector = {}
        right: Vector = {}
        for (p, q), (u, v, w), c in _sweedler(h1, h2, b, i, 2, 3):
            _add(left, mul1(phi(e2(p), s1(e1(v))), phi(psi(e2(q), s1(e1(u))), e1(w))), c)
            _add(right, mul1(phi(e2(p), e1(u)), phi(psi(e2(q), e1(v)), s1(e1(w)))), c)
        target = _scaled(h1.unit(), h1.eps[i] * h2.eps[b])
        return left == target == right

    def law_iv_a(b: int, i: int) -> bool:
        left: Vector = {}
        right: Vector = {}
        for (p, q, r), (u, v), c in _sweedler(h1, h2, b, i, 3, 2):
            _add(left, mul2(psi(s2(e2(p)), phi(e2(q), e1(u))), psi(e2(r), e1(v))), c)
            _add(right, mul2(psi(e2(p), phi(s2(e2(r)), e1(u))), psi(s2(e2(q)), e1(v))), c)
        target = _scaled(h2.unit(), h1.eps[i] * h2.eps[b])
        return left == target == right

    parity = "odd" if m % 2 else "even"
    return [
        _scan("unit-action-QR-matched-II-Hopf-a'", _pairs(d2, d1), law_ii_a,
              "φ(S(h'₁),φ(h'₂,h)) = ε(h')h = φ(h'₁,φ(S(h'₂),h)) fails"),
        _scan("unit-action-QR-matched-II-Hopf-b", _pairs(d2, d1, d1), law_ii_b,
              "ψ(ψ(h',S^m(h₂g)),S^{m+1}(h₁)) = ε(h)ψ(h',S^m(g)) fails"),
        _scan("unit-action-QR-matched-II-Hopf-b'", _pairs(d2, d1), law_ii_b_prime,
              "ψ(ψ(h',S(h₁)),h₂) = ε(h)h' = ψ(ψ(h',h₁),S(h₂)) fails"),
        _scan("unit-action-QR-matched-III-Hopf", _pairs(d2, d1, d1), law_iii,
              f"{parity}-m law for ε(h)φ(h',S^m(g)) fails"),
        _scan("unit-action-QR-matched-III-Hopf-a", _pairs(d2, d1), law_iii_a,
              "φ(h'₁,S(h₂))φ(ψ(h'₂,S(h₁)),h₃) = ε(h)ε(h')δ"
              " = φ(h'₁,h₁)φ(ψ(h'₂,h₂),S(h₃)) fails"),
        _scan("unit-action-QR-matched-IV-Hopf-a", _pairs(d2, d1), law_iv_a,
              "ψ(S(h'₁),φ(h'₂,h₁))ψ(h'₃,h₂) = ε(h)ε(h')δ"
              " = ψ(h'₁,φ(S(h'₃),h₁))ψ(S(h'₂),h₂) fails"),
    ]


def _odd_hopf_check(
    h1: HopfQuasigroupData, h2: HopfQuasigroupData, a: LinearActionPair, m: int
) -> ConditionCheck:
    """The two odd-m laws over (h', g, g'), h' and g' in H2, g in H1."""
    d1, d2 = h1.dim, h2.dim
    e1, e2 = h1.basis, h2.basis
    s1, s2 = h1.s, h2.s
    phi, psi = a.act_phi, a.act_psi

    def first_law(b: int, i: int, c: int) -> bool:
        lhs: Vector = {}
        for (p, q), (u, v), coeff in _sweedler(h1, h2, b, i, 2, 2):
            left = s2(h2.mul(psi(e2(q), e1(v)), e2(c)), m)
            _add(lhs, phi(left, s1(phi(e2(p), e1(u)), m)), coeff)
        return lhs == _scaled(phi(s2(e2(c), m), s1(e1(i), m)), h2.eps[b])

    def second_law(b: int, i: int, c: int) -> bool:
        lhs: Vector = {}
        for (p, q, r), (u, v), coeff in _sweedler(h1, h2, b, i, 3, 2):
            left = psi(s2(h2.mul(psi(e2(r), e1(v)), e2(c)), m), s1(phi(e2(q), e1(u)), m))
            _add(lhs, h2.mul(left, s2(e2(p), m + 1)), coeff)
        return lhs == _scaled(psi(s2(e2(c), m), s1(e1(i), m)), h2.eps[b])

    name = "m-inverse-cond-matched-Hopf"
    check = _scan(name, _pairs(d2, d1, d2), first_law,
                  "φ(S^m(ψ(h'₂,g₂)g'),S^m(φ(h'₁,g₁))) = ε(h')φ(S^m(g'),S^m(g)) fails")
    if check.ok:
        check = _scan(name, _pairs(d2, d1, d2), second_law,
                      "ψ(S^m(ψ(h'₃,g₂)g'),S^m(φ(h'₂,g₁)))S^{m+1}(h'₁) = ε(h')ψ(S^m(g'),S^m(g)) fails")
    return check


@dataclass
class HopfMatchedPair:
    """H1 ⋈ H2 with the report of its hypotheses and post-checks."""

    data: HopfQuasigroupData
    report: ConditionReport
    m: int
    d1: int
    d2: int

    def to_dict(self) -> Dict[str, Any]:
        return {"m": self.m, "factors": [self.d1, self.d2], "structure": hopf_to_dict(self.data),
                **self.report.to_dict()}


def _matched_structure(
    h1: HopfQuasigroupData, h2: HopfQuasigroupData, a: LinearActionPair
) -> HopfQuasigroupData:
    d1, d2 = h1.dim, h2.dim
    d = d1 * d2
    if d > cfg.dim_cap:
        raise ResourceCapError(f"matched pair of dimension {d} exceeds cap {cfg.dim_cap}", partial_size=d)
    e1, e2 = h1.basis, h2.basis
    mu = zeros((d, d, d))
    for i, b, j, c in _pairs(d1, d2, d1, d2):
        acc: Vector = {}
        for (p, q), c1 in h2.delta_rows[b]:
            for (u, v), c2 in h1.delta_rows[j]:
                left = h1.mul(e1(i), a.act_phi(e2(p), e1(u)))
                right = h2.mul(a.act_psi(e2(q), e1(v)), e2(c))
                _add(acc, _tensor(left, right), c1 * c2)
        for (k, f), coeff in acc.items():
            mu[i * d2 + b, j * d2 + c, k * d2 + f] = coeff
    antipode = zeros((d, d))
    for i, b in _pairs(d1, d2):
        for (k, f), coeff in _matched_antipode(h1, h2, a, e1(i), e2(b)).items():
            antipode[i * d2 + b, k * d2 + f] = coeff
    base = tensor_product(h1, h2)
    return HopfQuasigroupData(mu, base.eta, base.delta, base.eps, antipode, base.names)


def _matched_antipode(
    h1: HopfQuasigroupData, h2: HopfQuasigroupData, a: LinearActionPair, u1: Vector, u2: Vector
) -> Vector:
    """S(h⊗h') = φ(S₂(h'₂),S₁(h₂)) ⊗ ψ(S₂(h'₁),S₁(h₁))."""
    out: Vector = {}
    for (i1, i2), c1 in h1.comul(u1).items():
        for (b1, b2), c2 in h2.comul(u2).items():
            first = a.act_phi(h2.s(h2.basis(b2)), h1.s(h1.basis(i2)))
            second = a.act_psi(h2.s(h2.basis(b1)), h1.s(h1.basis(i1)))
            _add(out, _tensor(first, second), c1 * c2)
    return out


def _split(vec: Vector, d2: int) -> Vector:
    return {divmod(k, d2): c for k, c in vec.items()}


def _post_checks(
    product: HopfQuasigroupData,
    h1: HopfQuasigroupData,
    h2: HopfQuasigroupData,
    a: LinearActionPair,
    antipodes: Sequence[np.ndarray],
) -> List[ConditionCheck]:
    d1, d2 = h1.dim, h2.dim
    e1, e2 = h1.basis, h2.basis

    def lemma_holds(i: int, b: int) -> bool:
        left = {k * d2 + b: c for k, c in h1.unit().items()}
        right = {i * d2 + k: c for k, c in h2.unit().items()}
        value = _split(product.s(product.mul(left, right)), d2)
        return value == _tensor(h1.s(e1(i)), h2.s(e2(b)))

    checks = [
        _scan("lemma-antipode", _pairs(d1, d2), lemma_holds,
              "S((δ₁⊗h')(h⊗δ₂)) = S₁(h)⊗S₂(h') fails"),
    ]
    for n, mat in enumerate(antipodes):
        rows = _rows(mat)
        suffix = "" if n == 0 else f"/candidate-{n}"

        def t_parts(i: int, b: int):
            image = _split(_linear(rows, {i * d2 + b: ONE}), d2)
            t1: Vector = {}
            t2: Vector = {}
            for (k, f), c in image.items():
                _acc(t1, k, c * h2.eps[f])
                _acc(t2, f, c * h1.eps[k])
            return t1, t2

        checks.append(
            _scan(f"T-I{suffix}", _pairs(d1, d2),
                  lambda i, b: t_parts(i, b)[0] == a.act_phi(h2.s(e2(b)), h1.s(e1(i))),
                  "(id⊗ε)T(h⊗h') = φ(S₂(h'),S₁(h)) fails")
        )
        checks.append(
            _scan(f"T-II{suffix}", _pairs(d1, d2),
                  lambda i, b: t_parts(i, b)[1] == a.act_psi(h2.s(e2(b)), h1.s(e1(i))),
                  "(ε⊗id)T(h⊗h') = ψ(S₂(h'),S₁(h)) fails")
        )
    return checks


def hopf_matched_pair(
    h1: HopfQuasigroupData,
    h2: HopfQuasigroupData,
    a: LinearActionPair,
    m: int,
    m1: Optional[int] = None,
    m2: Optional[int] = None,
    candidates: Optional[Sequence[Any]] = None,
) -> HopfMatchedPair:
    """
    H1 ⋈ H2 with (h⊗h')(g⊗g') = hφ(h'₁,g₁) ⊗ ψ(h'₂,g₂)g' and its antipode.

    Raises:
        PreconditionError: a gating hypothesis fails; the report names it with a basis tuple.
        InternalConsistencyError: the hypotheses pass but a post-check on the product fails.
    """
    report = hopf_matched_conditions(h1, h2, a, m, m1, m2)
    report.raise_if_failed(f"not a matched pair of {m}-invertible Hopf quasigroups")
    product = _matched_structure(h1, h2, a)
    candidate_mats = [exact_array(c, (product.dim, product.dim), "candidate antipode")
                      for c in (candidates or ())]
    report.merge(verify_hopf_quasigroup(product, m, candidate_mats))
    antipodes = [product.antipode] + [
        c for c in candidate_mats
        if all(chk.ok for chk in _antipode_checks(dataclasses.replace(product, antipode=c), m))
    ]
    report.extend(_post_checks(product, h1, h2, a, antipodes))
    failure = report.first_failure
    if failure is not None:
        raise InternalConsistencyError(
            f"Hopf matched pair passes its hypotheses but {failure.name} fails at {failure.witness}"
        )
    logger.info(f"Built Hopf matched pair of dimension {product.dim} for m={m}")
    return HopfMatchedPair(product, report, m, h1.dim, h2.dim)


@dataclass
class LinearizedMatchedPair:
    """k(R ⋈ S) next to kR ⋈ kS."""

    set_level: HopfQuasigroupData
    hopf: HopfMatchedPair
    loop: Loop
    j: Permutation


def linearize_matched_pair(
    r: Loop,
    j_r: Permutation,
    s: Loop,
    j_s: Permutation,
    a: ActionPair,
    m: int,
    m1: Optional[int] = None,
    m2: Optional[int] = None,
    strict: bool = False,
) -> LinearizedMatchedPair:
    """
    Build k(R ⋈ S) and kR ⋈ kS and require identical structure constants.

    Raises:
        PreconditionError: propagated from the set-level or linear hypotheses.
        InternalConsistencyError: kR ⋈ kS fails a check or the two constructions differ.
    """
    loop, j = matched_pair_loop(r, j_r, s, j_s, a, m, m1, m2, strict)
    set_level = group_algebra(loop, j)
    hopf = hopf_matched_pair(
        group_algebra(r, j_r), group_algebra(s, j_s), linear_actions_from_sets(a), m, m1, m2
    )
    if not hopf.report.ok:
        failure = hopf.report.first_failure
        raise InternalConsistencyError(f"kR ⋈ kS fails {failure.name} at {failure.witness}")
    if not set_level.same_structure(hopf.data):
        raise InternalConsistencyError("k(R ⋈ S) and kR ⋈ kS have different structure constants")
    return LinearizedMatchedPair(set_level, hopf, loop, j)


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------


def _entry(value: Fraction) -> List[int]:
    return [value.numerator, value.denominator]


def _sparse(tensor: np.ndarray) -> List[List[int]]:
    return [list(idx) + _entry(tensor[idx]) for idx in np.ndindex(*tensor.shape) if tensor[idx]]


def hopf_to_dict(h: HopfQuasigroupData) -> Dict[str, Any]:
    """{dim, mu, delta, eps, S, eta}; rank-3 tensors as sparse [i, j, k, num, den] rows."""
    return {
        "dim": h.dim,
        "mu": _sparse(h.mu),
        "delta": _sparse(h.delta),
        "eps": [_entry(c) for c in h.eps],
        "S": _sparse(h.antipode),
        "eta": [_entry(c) for c in h.eta],
        "names": None if h.names is None else list(h.names),
    }


def hopf_from_dict(payload: Dict[str, Any]) -> HopfQuasigroupData:
    try:
        d = int(payload["dim"])
        mu, delta, antipode = zeros((d, d, d)), zeros((d, d, d)), zeros((d, d))
        for target, key in ((mu, "mu"), (delta, "delta"), (antipode, "S")):
            for row in payload[key]:
                *idx, num, den = row
                target[tuple(int(i) for i in idx)] = Fraction(int(num), int(den))
        eps = [Fraction(int(n), int(q)) for n, q in payload["eps"]]
        eta = [Fraction(int(n), int(q)) for n, q in payload["eta"]]
        names = payload.get("names")
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise MalformedTableError(f"malformed Hopf structure JSON: {exc}") from exc
    return HopfQuasigroupData(mu, eta, delta, eps, antipode, None if names is None else tuple(names))
