#!/usr/bin/env python3
# src/algebra/factorization.py
"""Recover matched pair structure from a loop with two exactly factorizing subloops."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.algebra.constructions import (
    ActionPair,
    build_matched_table,
    matched_pair_conditions,
)
from src.algebra.diagnostics import ConditionCheck, ConditionReport, first_of, flag_check, mask_check
from src.algebra.errors import (
    FactorizationImpossibleError,
    InternalConsistencyError,
    MalformedTableError,
)
from src.algebra.inverse_classify import RstTriple, rst_witness
from src.algebra.loops_core import Loop, Permutation, first_failure, is_homomorphism, restrict_to_subset

logger = logging.getLogger(__name__)


def _embedding(q: Loop, subset: Any, what: str) -> np.ndarray:
    emb = np.asarray(subset, dtype=np.int64).ravel()
    if emb.size == 0 or emb.min() < 0 or emb.max() >= q.n:
        raise MalformedTableError(f"{what} embedding has indices outside [0, {q.n})")
    if np.unique(emb).size != emb.size:
        raise MalformedTableError(f"{what} embedding repeats an element")
    return emb


def subloop_check(q: Loop, j_q: Permutation, emb: np.ndarray, what: str) -> ConditionCheck:
    """δ ∈ X and X closed under product, both divisions and J_Q."""
    member = np.zeros(q.n, dtype=bool)
    member[emb] = True
    rows, cols = emb[:, None], emb[None, :]
    return first_of(
        f"subloop-{what}",
        [
            ("contains δ", np.array([member[q.delta]])),
            ("closed under ·", member[q.table[rows, cols]]),
            ("closed under \\", member[q.q.ldiv[rows, cols]]),
            ("closed under /", member[q.q.rdiv[rows, cols]]),
            ("closed under J_Q", member[j_q.as_array()[emb]]),
        ],
    )


def _sub_loop(q: Loop, j_q: Permutation, emb: np.ndarray) -> Tuple[Loop, Permutation]:
    pos = np.full(q.n, -1, dtype=np.int64)
    pos[emb] = np.arange(emb.size)
    loop = Loop(restrict_to_subset(q, emb), int(pos[q.delta]))
    return loop, Permutation(tuple(pos[j_q.as_array()[emb]]))


@dataclass
class FactorizationWitness:
    """Θ: R×S → Q, (r,s) ↦ rs, with the actions read off θ⁻¹(sr)."""

    theta: np.ndarray
    actions: ActionPair
    report: ConditionReport
    r: Loop
    j_r: Permutation
    s: Loop
    j_s: Permutation

    @property
    def ok(self) -> bool:
        return self.report.ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bijective": True,
            "laws": {
                c.name: {"ok": c.ok, "witness": None if c.witness is None else list(c.witness)}
                for c in self.report.checks
            },
            **self.actions.to_dict(),
        }


def exact_factorization(
    q: Loop,
    j_q: Permutation,
    r_embed: Any,
    s_embed: Any,
    m: int,
    m1: Optional[int] = None,
    m2: Optional[int] = None,
    strict: bool = False,
) -> FactorizationWitness:
    """
    Factor Q = R·S through the product map and derive (φ, ψ).

    Args:
        q: The ambient loop.
        j_q: Its permutation J_Q.
        r_embed, s_embed: Indices of R and S inside Q, in the order that defines their own indexing.
        m: Exponent for the matched pair hypotheses.

    Returns:
        FactorizationWitness; failed laws are reported, not raised.

    Raises:
        PreconditionError: R or S is not a J_Q-closed subloop.
        FactorizationImpossibleError: (r, s) ↦ rs is not a bijection.
        InternalConsistencyError: every law holds but R ⋈ S differs from Q under Θ.
    """
    r_emb = _embedding(q, r_embed, "R")
    s_emb = _embedding(q, s_embed, "S")
    subloops = ConditionReport("factorization")
    subloops.add(subloop_check(q, j_q, r_emb, "R"))
    subloops.add(subloop_check(q, j_q, s_emb, "S"))
    subloops.raise_if_failed("factors are not J_Q-closed subloops")

    nr, ns = r_emb.size, s_emb.size
    if nr * ns != q.n:
        raise FactorizationImpossibleError(f"|R|·|S| = {nr}·{ns} differs from |Q| = {q.n}")
    theta = q.table[r_emb[:, None], s_emb[None, :]]
    flat = theta.ravel()
    owner = np.full(q.n, -1, dtype=np.int64)
    for i, target in enumerate(flat.tolist()):
        if owner[target] >= 0:
            a, b = divmod(int(owner[target]), ns), divmod(i, ns)
            raise FactorizationImpossibleError(
                f"r·s collides: pairs {a} and {b} both give {target}"
            )
        owner[target] = i

    r, j_r = _sub_loop(q, j_q, r_emb)
    s, j_s = _sub_loop(q, j_q, s_emb)
    report = subloops
    t = q.table
    qi = np.arange(q.n)
    rr, ss = r_emb[:, None, None], s_emb[None, :, None]
    report.add(
        first_of(
            "compatibilities",
            [
                ("(rs)q = r(sq)", t[t[rr, ss], qi[None, None, :]] == t[rr, t[ss, qi[None, None, :]]]),
                (
                    "q(rs) = (qr)s",
                    t[qi[:, None, None], t[r_emb[None, :, None], s_emb[None, None, :]]]
                    == t[t[qi[:, None, None], r_emb[None, :, None]], s_emb[None, None, :]],
                ),
            ],
        )
    )
    jq = j_q.as_array()
    jr_q, js_q = r_emb[j_r.as_array()], s_emb[j_s.as_array()]
    theta_sr = t[s_emb[:, None], r_emb[None, :]]
    report.add(
        first_of(
            "J-on-Q",
            [
                ("J_Q(rs) = J_S(s)J_R(r)", jq[theta] == t[js_q[None, :], jr_q[:, None]]),
                ("J_Q(sr) = J_R(r)J_S(s)", jq[theta_sr].T == t[jr_q[:, None], js_q[None, :]]),
            ],
        )
    )

    rs_of = owner[theta_sr]
    actions = ActionPair(rs_of // ns, rs_of % ns)
    report.merge(matched_pair_conditions(r, j_r, s, j_s, actions, m, m1, m2, strict))

    rebuilt = build_matched_table(r, s, actions)
    same = q.table[flat[:, None], flat[None, :]] == flat[rebuilt.table]
    report.add(mask_check("theta-isomorphism", same, "Θ(a)Θ(b) = Θ(ab)"))
    if report.ok and not same.all():
        raise InternalConsistencyError("all laws hold but R ⋈ S differs from Q under Θ")
    if report.ok and rebuilt.is_quasigroup:
        j_image = owner[jq[flat]]
        witness = rst_witness(Loop(rebuilt, r.delta * ns + s.delta), Permutation(tuple(j_image)),
                              RstTriple.m_inverse(m))
        report.add(ConditionCheck("m-inv", witness is None, witness,
                                  "" if witness is None else "J^m(xy)J^{m+1}(x) = J^m(y) on R ⋈ S"))
    logger.info(f"Factorized loop of order {q.n} as {nr}·{ns}: ok={report.ok}")
    return FactorizationWitness(theta, actions, report, r, j_r, s, j_s)


@dataclass
class MoufangReport:
    """Outcome of checking a decomposition given by injections and projections."""

    report: ConditionReport
    variant: str
    actions: Optional[ActionPair] = None
    induced: Optional[np.ndarray] = None

    @property
    def ok(self) -> bool:
        return self.report.ok

    def to_dict(self) -> Dict[str, Any]:
        out = {"variant": self.variant, **self.report.to_dict()}
        if self.actions is not None:
            out.update(self.actions.to_dict())
        return out


def _projection_identity(
    name: str, t: np.ndarray, target: np.ndarray, p: np.ndarray, i_r: np.ndarray, i_s: np.ndarray
) -> ConditionCheck:
    """p(i_R(r)i_S(s) · i_R(r')i_S(s')) = p(i_R(r))(p(i_S(s)i_R(r'))p(i_S(s'))), both bracketings."""
    R = i_r[:, None, None, None]
    S = i_s[None, :, None, None]
    RP = i_r[None, None, :, None]
    SP = i_s[None, None, None, :]
    lhs = p[t[t[R, S], t[RP, SP]]]
    a, b, c = p[R], p[t[S, RP]], p[SP]
    return first_of(
        name,
        [
            ("right-bracketed", lhs == target[a, target[b, c]]),
            ("left-bracketed", lhs == target[target[a, b], c]),
        ],
    )


def verify_moufang_decomposition(
    q: Loop,
    r: Loop,
    s: Loop,
    i_r: Any,
    i_s: Any,
    p_r: Any,
    p_s: Any,
    variant: str = "matched",
) -> MoufangReport:
    """
    Check that injections and projections exhibit Q as R ⋊ S or R ⋈ S.

    Args:
        q: The ambient loop.
        r, s: The factor loops.
        i_r, i_s: Injections R → Q and S → Q as index arrays.
        p_r, p_s: Projections Q → R and Q → S as index arrays.
        variant: "semidirect" or "matched".

    Returns:
        MoufangReport; on success it carries the induced actions and multiplication.
    """
    if variant not in ("semidirect", "matched"):
        raise ValueError(f"variant must be 'semidirect' or 'matched', got {variant!r}")
    ir = _map(i_r, r.n, q.n, "i_R")
    is_ = _map(i_s, s.n, q.n, "i_S")
    pr = _map(p_r, q.n, r.n, "p_R")
    ps = _map(p_s, q.n, s.n, "p_S")
    t = q.table
    report = ConditionReport(f"{variant} decomposition")
    report.add(flag_check("i_R-homomorphism", is_homomorphism(ir, r, q), "i_R(rr') ≠ i_R(r)i_R(r')"))
    report.add(flag_check("i_S-homomorphism", is_homomorphism(is_, s, q), "i_S(ss') ≠ i_S(s)i_S(s')"))
    if variant == "semidirect":
        report.add(flag_check("p_S-homomorphism", is_homomorphism(ps, q, s), "p_S(qq') ≠ p_S(q)p_S(q')"))
    report.add(mask_check("p_R-section", pr[ir] == np.arange(r.n), "p_R(i_R(r)) = r"))
    report.add(mask_check("p_S-section", ps[is_] == np.arange(s.n), "p_S(i_S(s)) = s"))

    composite = t[ir[:, None], is_[None, :]]
    back = pr[composite] * s.n + ps[composite]
    forward = composite.ravel()[pr * s.n + ps]
    report.add(
        first_of(
            "mutually-inverse",
            [
                ("q ↦ (p_R(q), p_S(q)) after (r,s) ↦ i_R(r)i_S(s)",
                 back == np.arange(r.n * s.n).reshape(r.n, s.n)),
                ("(r,s) ↦ i_R(r)i_S(s) after q ↦ (p_R(q), p_S(q))", forward == np.arange(q.n)),
            ],
        )
    )
    if variant == "semidirect":
        report.add(_projection_identity("p_R-Moufang-I", t, r.table, pr, ir, is_))
    else:
        report.add(_projection_identity("p_R-Moufang", t, r.table, pr, ir, is_))
        report.add(_projection_identity("p_S-Moufang", t, s.table, ps, ir, is_))

    outcome = MoufangReport(report, variant)
    if not report.ok:
        return outcome

    sr = t[is_[:, None], ir[None, :]]
    psi = ps[sr] if variant == "matched" else np.broadcast_to(np.arange(s.n)[:, None], (s.n, r.n))
    actions = ActionPair(pr[sr], psi)
    flat = composite.ravel()
    induced = (pr * s.n + ps)[t[flat[:, None], flat[None, :]]]
    shaped = build_matched_table(r, s, actions).table
    witness = first_failure(induced == shaped)
    display = "(rφ(s,r'), ss')" if variant == "semidirect" else "(rφ(s,r'), ψ(s,r')s')"
    report.add(ConditionCheck("displayed-shape", witness is None, witness,
                              "" if witness is None else f"induced product is not {display}"))
    outcome.actions = actions
    outcome.induced = induced
    logger.info(f"{variant} decomposition of order {q.n}: ok={report.ok}")
    return outcome


def _map(arr: Any, size: int, bound: int, what: str) -> np.ndarray:
    out = np.asarray(arr, dtype=np.int64).ravel()
    if out.size != size:
        raise MalformedTableError(f"{what} must have {size} entries, got {out.size}")
    bad = first_failure((out >= 0) & (out < bound))
    if bad is not None:
        raise MalformedTableError(f"{what} entry {out[bad[0]]} outside [0, {bound})")
    return out


def canonical_maps(q: Loop, r_embed: Any, s_embed: Any) -> Dict[str, np.ndarray]:
    """i_R, i_S and the projections read off Θ⁻¹ for an exact factorization."""
    r_emb, s_emb = np.asarray(r_embed, dtype=np.int64), np.asarray(s_embed, dtype=np.int64)
    theta = q.table[r_emb[:, None], s_emb[None, :]].ravel()
    owner = np.full(q.n, -1, dtype=np.int64)
    owner[theta] = np.arange(theta.size)
    if (owner < 0).any():
        raise FactorizationImpossibleError("Θ does not cover Q")
    return {"i_r": r_emb, "i_s": s_emb, "p_r": owner // s_emb.size, "p_s": owner % s_emb.size}
