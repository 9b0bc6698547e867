#!/usr/bin/env python3
# main.py
"""

loopforge command-line entry point: classify, construct, verify, factorize,
linearize and search finite m-inverse loops.

Usage examples:

python main.py classify --window -3..3 preset:S3

python main.py verify m-inverse --m 1 q.tbl

python main.py verify matched-pair --m 2 r.tbl s.tbl phi.tbl psi.tbl

python main.py construct lambda-example --preset s3-z2z2 | python main.py hopf lift --m 1

python main.py search loops --n 5 --store

Inputs are Cayley files, "-" for stdin, or "preset:NAME" from the built-in catalog.
Exit codes: 0 verified, 1 a property or hypothesis fails, 2 usage or input error.
"""

import argparse
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.table import Table

from config.config import cfg
from src.algebra.constructions import (
    ActionPair,
    CocycleMap,
    GroupActionPair,
    cocycle_conditions,
    cocycle_extension,
    direct_product,
    extension_loop,
    group_matched_pair,
    group_matched_pair_conditions,
    is_2cocycle,
    odd_invertible_conditions,
    odd_invertible_loop,
    quasi_0_check,
    sabinin_product,
    verify_matched_pair,
    verify_semidirect,
)
from src.algebra.diagnostics import ConditionCheck, ConditionReport
from src.algebra.errors import (
    FactorizationImpossibleError,
    InternalConsistencyError,
    LoopforgeError,
    MalformedTableError,
    PreconditionError,
    ResourceCapError,
    SearchCapError,
    SingularAntipodeError,
)
from src.algebra.factorization import (
    canonical_maps,
    exact_factorization,
    verify_moufang_decomposition,
)
from src.algebra.hopf import (
    HopfQuasigroupData,
    group_algebra,
    hopf_to_dict,
    linearize_matched_pair,
    tensor_exponents,
    tensor_product,
    verify_hopf_quasigroup,
)
from src.algebra.inverse_classify import (
    RstTriple,
    aut_power_order,
    classify,
    is_m_inverse,
    right_inverse_permutation,
    rst_witness,
)
from src.algebra.loops_core import Loop, Permutation, find_identity, is_associative
from src.algebra.search import (
    SearchSpec,
    enumerate_loops,
    sample_loops,
    search_cocycles,
    search_matched_actions,
    search_semidirect_actions,
)
from src.extractors.cayley_reader import (
    ParsedCayley,
    parse_cayley_file,
    parse_hopf_file,
    parse_index_list,
    parse_map_file,
)
from src.extractors.presets import load_lambda_preset, load_preset
from src.loaders.corpus_loader import load_loops_to_db
from src.loaders.report_writer import build_report, dumps_report, format_cayley, write_bundle, write_report

PRESET_PREFIX = "preset:"


class UsageError(ValueError):
    """Missing inputs, bad option values or an unknown verb."""


@dataclass
class RunConfig:
    """Per-run settings shared by every verb."""

    # Output: "text" or "json"; None lets the verb choose
    output_format: Optional[str] = None

    # Classification window and search caps
    window: Tuple[int, int] = (cfg.window_low, cfg.window_high)
    budget: float = cfg.budget
    max_candidates: int = cfg.max_candidates

    # Literal readings of ambiguous conditions gate instead of being diagnostics
    strict: bool = False

    db_url: str = cfg.db_url

    # Logging configuration
    log_level: str = cfg.log_level
    log_to_file: bool = False
    log_file: Optional[str] = None
    save_results: bool = False

    def __post_init__(self):
        self.window = tuple(int(v) for v in self.window)
        if self.log_file is None:
            self.log_file = f"loopforge_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"

    def save_to_file(self, filepath: str = None):
        """Save configuration to JSON."""
        if filepath is None:
            filepath = "config/run_config.json"
        os.makedirs(os.path.dirname(filepath) or ".", exist_ok=True)
        with open(filepath, "w") as f:
            json.dump(asdict(self), f, indent=2, default=str)

    @classmethod
    def load_from_file(cls, filepath: str) -> "RunConfig":
        """Load configuration from a JSON file written by save_to_file."""
        with open(filepath, "r") as f:
            data = json.load(f)
        return cls(**data)


class RunLogger:
    """Console logging on stderr plus an optional file under logs/run_logs."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        level = getattr(logging, self.config.log_level.upper(), logging.INFO)
        detailed_formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        simple_formatter = logging.Formatter(
            "%(asctime)s - %(levelname)s - %(message)s", datefmt="%H:%M:%S"
        )

        # stdout carries Cayley text and JSON, so the console handler writes to stderr
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(simple_formatter)
        console_handler.setLevel(level)
        handlers: List[logging.Handler] = [console_handler]

        if self.config.log_to_file:
            log_dir = "logs/run_logs"
            os.makedirs(log_dir, exist_ok=True)
            file_handler = logging.FileHandler(
                os.path.join(log_dir, self.config.log_file), encoding="utf-8"
            )
            file_handler.setFormatter(detailed_formatter)
            file_handler.setLevel(logging.DEBUG)
            handlers.append(file_handler)

        for name in ("loopforge", "src"):
            named = logging.getLogger(name)
            named.handlers.clear()
            named.setLevel(logging.DEBUG if self.config.log_to_file else level)
            named.propagate = False
            for handler in handlers:
                named.addHandler(handler)
        return logging.getLogger("loopforge")

    def get_logger(self) -> logging.Logger:
        return self.logger


logger = logging.getLogger("loopforge")


class RunResults:
    """Track the checks, warnings and errors of one CLI run."""

    def __init__(self):
        self.start_time = datetime.now()
        self.end_time = None
        self.command: Optional[str] = None
        self.exit_code: Optional[int] = None
        self.checks: Dict[str, bool] = {}
        self.errors: List[str] = []
        self.warnings: List[str] = []

    def record(self, command: str, exit_code: int, report: Dict[str, Any]):
        self.command = command
        self.exit_code = exit_code
        conditions = report.get("conditions") or {}
        for name, law in conditions.get("laws", {}).items():
            self.checks[name] = bool(law["ok"])
            if not law["ok"] and law.get("gating", True):
                self.errors.append(f"{name} fails at {law.get('witness')}")
        if report.get("error"):
            self.errors.append(report["error"])
        if report.get("result", {}).get("complete") is False:
            self.add_warning("search stopped at a cap; results are partial")

    def add_warning(self, message: str):
        self.warnings.append(message)

    def finalize(self):
        self.end_time = datetime.now()
        self.duration = (self.end_time - self.start_time).total_seconds()

    def get_summary(self) -> Dict[str, Any]:
        if not self.end_time:
            self.finalize()
        return {
            "duration": self.duration,
            "command": self.command,
            "exit_code": self.exit_code,
            "checks_passed": sum(self.checks.values()),
            "checks_total": len(self.checks),
            "total_errors": len(self.errors),
            "total_warnings": len(self.warnings),
        }

    def save_to_file(self, filepath: str = None) -> str:
        """Save results to JSON, by default under logs/run_results with a timestamp."""
        if filepath is None:
            results_dir = "logs/run_results"
            os.makedirs(results_dir, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            filepath = os.path.join(results_dir, f"run_results_{timestamp}.json")
        else:
            os.makedirs(os.path.dirname(filepath) or ".", exist_ok=True)

        data = {
            "start_time": self.start_time.isoformat(),
            "end_time": self.end_time.isoformat() if self.end_time else None,
            "checks": self.checks,
            "errors": self.errors,
            "warnings": self.warnings,
            "summary": self.get_summary(),
        }
        with open(filepath, "w") as f:
            json.dump(data, f, indent=2, default=str)
        return filepath


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@dataclass
class Command:
    """One CLI invocation: verb, optional action, positional inputs and options."""

    verb: str
    action: Optional[str] = None
    inputs: List[str] = field(default_factory=list)
    m: Optional[int] = None
    options: Dict[str, Any] = field(default_factory=dict)
    output: Optional[str] = None
    config: RunConfig = field(default_factory=RunConfig)

    @property
    def name(self) -> str:
        return self.verb if self.action is None else f"{self.verb} {self.action}"


@dataclass
class RunOutcome:
    exit_code: int
    report: Dict[str, Any]
    text: Optional[str] = None


@dataclass
class HandlerResult:
    exit_code: int
    result: Dict[str, Any] = field(default_factory=dict)
    conditions: Optional[ConditionReport] = None
    text: Optional[str] = None


@dataclass(frozen=True)
class _Handler:
    fn: Callable[[Command], HandlerResult]
    options: FrozenSet[str]
    needs_m: bool
    default_format: str


HANDLERS: Dict[Tuple[str, Optional[str]], _Handler] = {}


def handler(
    verb: str,
    action: Optional[str] = None,
    options: Sequence[str] = (),
    needs_m: bool = False,
    default_format: str = "json",
):
    def register(fn: Callable[[Command], HandlerResult]):
        HANDLERS[(verb, action)] = _Handler(fn, frozenset(options), needs_m, default_format)
        return fn

    return register


def parse_window(text: str) -> Tuple[int, int]:
    """"lo..hi" or "lo,hi", both inclusive."""
    sep = ".." if ".." in text else ","
    parts = text.split(sep)
    try:
        lo, hi = (int(p) for p in parts)
    except ValueError:
        raise UsageError(f"window must look like -3..3, got {text!r}")
    if lo > hi:
        raise UsageError(f"empty window {text!r}")
    return lo, hi


def _csv(text: str) -> List[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _inputs(cmd: Command, *names: str) -> List[str]:
    if len(cmd.inputs) != len(names):
        raise UsageError(
            f"{cmd.name} takes {len(names)} inputs ({' '.join(names)}), got {len(cmd.inputs)}"
        )
    return list(cmd.inputs)


def _option(cmd: Command, key: str, default: Any = None, required: bool = False) -> Any:
    value = cmd.options.get(key, default)
    if required and value is None:
        raise UsageError(f"{cmd.name} requires --{key.replace('_', '-')}")
    return value


def load_loop(source: str) -> Tuple[Loop, Permutation]:
    """A loop with its J from a file, stdin ("-") or the preset catalog."""
    if source.startswith(PRESET_PREFIX):
        return load_preset(source[len(PRESET_PREFIX):])
    return parse_cayley_file(source).loop_and_j()


def load_table(source: str) -> ParsedCayley:
    if source.startswith(PRESET_PREFIX):
        loop, j = load_preset(source[len(PRESET_PREFIX):])
        return ParsedCayley(loop.q, loop.delta, j)
    return parse_cayley_file(source)


def load_hopf(source: str) -> HopfQuasigroupData:
    """Structure constants from JSON, or the group algebra of a Cayley input."""
    if source.endswith(".json"):
        return parse_hopf_file(source)
    return group_algebra(*load_loop(source))


def _search_spec(cmd: Command, **kwargs) -> SearchSpec:
    return SearchSpec(
        budget=cmd.config.budget, max_candidates=cmd.config.max_candidates, m=cmd.m, **kwargs
    )


def _m_check(loop: Loop, j: Permutation, m: int) -> ConditionCheck:
    witness = rst_witness(loop, j, RstTriple.m_inverse(m))
    return ConditionCheck(
        "m-inv", witness is None, witness, "" if witness is None else "J^m(xy)J^{m+1}(x) = J^m(y)"
    )


def _loop_text(obj: Any, j: Optional[Permutation], comment: str) -> str:
    return format_cayley(obj, j=j, comment=comment)


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------


@handler("classify")
def _classify(cmd: Command) -> HandlerResult:
    (source,) = _inputs(cmd, "LOOP")
    loop, j = load_loop(source)
    report = classify(loop, j, cmd.config.window)
    result = report.to_dict()
    if cmd.m is None:
        return HandlerResult(0, result)
    conditions = ConditionReport(f"{cmd.m}-inverse")
    conditions.add(_m_check(loop, j, cmd.m))
    result["m_inverse"] = conditions.ok
    return HandlerResult(0 if conditions.ok else 1, result, conditions)


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------


def _cocycle_inputs(cmd: Command) -> Tuple[Loop, Loop, CocycleMap]:
    g_src, v_src, phi_src = _inputs(cmd, "G", "V", "PHI")
    g, _ = load_loop(g_src)
    v, _ = load_loop(v_src)
    values = parse_map_file(phi_src, (g.n, g.n), v.n, "cocycle")
    return g, v, CocycleMap(g, v, values)


def _action_inputs(cmd: Command, with_psi: bool = True):
    names = ("R", "S", "PHI", "PSI") if with_psi else ("R", "S", "PHI")
    sources = _inputs(cmd, *names)
    r, j_r = load_loop(sources[0])
    s, j_s = load_loop(sources[1])
    phi = parse_map_file(sources[2], (s.n, r.n), r.n, "phi")
    if not with_psi:
        return r, j_r, s, j_s, phi
    psi = parse_map_file(sources[3], (s.n, r.n), s.n, "psi")
    return r, j_r, s, j_s, ActionPair(phi, psi)


@handler("construct", "direct-product", options=("m1", "m2"), default_format="text")
def _construct_direct(cmd: Command) -> HandlerResult:
    a_src, b_src = _inputs(cmd, "Q1", "Q2")
    q1, j1 = load_loop(a_src)
    q2, j2 = load_loop(b_src)
    dp = direct_product(q1, j1, q2, j2, _option(cmd, "m1"), _option(cmd, "m2"))
    result = dp.to_dict()
    ok = bool(dp.solutions) if cmd.m is None else cmd.m % dp.period in dp.solutions
    result["m_inverse"] = ok
    text = _loop_text(dp.loop or dp.table, dp.j, f"direct product, m in {dp.solutions} mod {dp.period}")
    return HandlerResult(0 if ok else 1, result, text=text)


@handler("construct", "cocycle-extension", default_format="text")
def _construct_cocycle(cmd: Command) -> HandlerResult:
    g, v, c = _cocycle_inputs(cmd)
    report = cocycle_conditions(c)
    table = cocycle_extension(g, v, c)
    result = {
        "order": table.n,
        "is_2cocycle": is_2cocycle(c),
        "associative": is_associative(table),
        "cocycle": c.to_dict(),
    }
    if quasi_0_check(c).ok:
        text = _loop_text(extension_loop(g, v, c), None, "cocycle extension G x_phi V")
    else:
        text = _loop_text(table, None, "cocycle extension G x_phi V (no identity)")
    return HandlerResult(0, result, report, text)


@handler("construct", "odd-invertible", default_format="text")
def _construct_odd(cmd: Command) -> HandlerResult:
    g, v, c = _cocycle_inputs(cmd)
    report = odd_invertible_conditions(c)
    loop, j = odd_invertible_loop(g, v, c)
    result = {"order": loop.n, "h": aut_power_order(loop, j), "j": j}
    return HandlerResult(0, result, report, _loop_text(loop, j, "odd-invertible loop"))


@handler("construct", "semidirect", options=("m1", "m2"), needs_m=True, default_format="text")
def _construct_semidirect(cmd: Command) -> HandlerResult:
    r, j_r, s, j_s, phi = _action_inputs(cmd, with_psi=False)
    outcome = verify_semidirect(
        r, j_r, s, j_s, phi, cmd.m, _option(cmd, "m1"), _option(cmd, "m2"), cmd.config.strict
    )
    if not outcome.report.ok:
        return HandlerResult(1, {"order": r.n * s.n}, outcome.report)
    text = _loop_text(outcome.loop, outcome.j, f"semi-direct product, m={cmd.m}")
    return HandlerResult(0, {"order": outcome.loop.n, "j": outcome.j}, outcome.report, text)


@handler("construct", "matched-pair", options=("m1", "m2"), needs_m=True, default_format="text")
def _construct_matched(cmd: Command) -> HandlerResult:
    r, j_r, s, j_s, a = _action_inputs(cmd)
    outcome = verify_matched_pair(
        r, j_r, s, j_s, a, cmd.m, _option(cmd, "m1"), _option(cmd, "m2"), cmd.config.strict
    )
    if not outcome.report.ok:
        return HandlerResult(1, {"order": r.n * s.n}, outcome.report)
    text = _loop_text(outcome.loop, outcome.j, f"matched pair R x S, m={cmd.m}")
    return HandlerResult(0, {"order": outcome.loop.n, "j": outcome.j}, outcome.report, text)


@handler("construct", "group-matched-pair", default_format="text")
def _construct_group_matched(cmd: Command) -> HandlerResult:
    g_src, h_src, tri_src, tle_src = _inputs(cmd, "G", "H", "TRIANGLERIGHT", "TRIANGLELEFT")
    g, _ = load_loop(g_src)
    h, _ = load_loop(h_src)
    a = GroupActionPair(
        parse_map_file(tri_src, (h.n, g.n), g.n, "triangleright"),
        parse_map_file(tle_src, (h.n, g.n), h.n, "triangleleft"),
    )
    report = group_matched_pair_conditions(g, h, a)
    loop = group_matched_pair(g, h, a)
    return HandlerResult(0, {"order": loop.n}, report, _loop_text(loop, None, "matched pair of groups"))


@handler("construct", "sabinin", options=("cap",), default_format="text")
def _construct_sabinin(cmd: Command) -> HandlerResult:
    (source,) = _inputs(cmd, "Q")
    table = sabinin_product(load_table(source).table, _option(cmd, "cap"))
    identity = find_identity(table)
    result = {"order": table.n, "identity": identity}
    return HandlerResult(0, result, text=format_cayley(table, identity=identity, comment="Sabinin product"))


@handler("construct", "lambda-example", options=("preset", "bundle_dir"), default_format="text")
def _construct_lambda(cmd: Command) -> HandlerResult:
    _inputs(cmd)
    m = 1 if cmd.m is None else cmd.m
    bundle = load_lambda_preset(_option(cmd, "preset", "s3-z2z2"), m, cmd.config.strict)
    result = bundle.to_manifest()
    bundle_dir = _option(cmd, "bundle_dir")
    if bundle_dir:
        result["files"] = {k: str(v) for k, v in write_bundle(bundle, bundle_dir).items()}
    text = _loop_text(bundle.q, bundle.j_q, f"Λ-example of order {bundle.q.n}, m={m}")
    return HandlerResult(0, result, bundle.report, text)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


@handler("verify", "m-inverse", needs_m=True)
def _verify_m_inverse(cmd: Command) -> HandlerResult:
    (source,) = _inputs(cmd, "LOOP")
    loop, j = load_loop(source)
    report = ConditionReport(f"{cmd.m}-inverse")
    report.add(_m_check(loop, j, cmd.m))
    return HandlerResult(0 if report.ok else 1, {"order": loop.n, "m_inverse": report.ok}, report)


@handler("verify", "rst", options=("rst",))
def _verify_rst(cmd: Command) -> HandlerResult:
    (source,) = _inputs(cmd, "LOOP")
    values = [int(v) for v in _csv(_option(cmd, "rst", required=True))]
    if len(values) != 3:
        raise UsageError(f"--rst takes r,s,t, got {values}")
    rst = RstTriple(*values)
    loop, j = load_loop(source)
    witness = rst_witness(loop, j, rst)
    report = ConditionReport(f"({rst.r},{rst.s},{rst.t})-inverse")
    report.add(ConditionCheck("rst-inv", witness is None, witness,
                              "" if witness is None else "J^r(xy)J^s(x) = J^t(y)"))
    return HandlerResult(0 if report.ok else 1, {"order": loop.n, "rst": values}, report)


@handler("verify", "matched-pair", options=("m1", "m2"), needs_m=True)
def _verify_matched(cmd: Command) -> HandlerResult:
    r, j_r, s, j_s, a = _action_inputs(cmd)
    outcome = verify_matched_pair(
        r, j_r, s, j_s, a, cmd.m, _option(cmd, "m1"), _option(cmd, "m2"), cmd.config.strict
    )
    result = {"order": r.n * s.n, "trivial_actions": a.is_trivial}
    return HandlerResult(0 if outcome.report.ok else 1, result, outcome.report)


@handler("verify", "semidirect", options=("m1", "m2"), needs_m=True)
def _verify_semidirect(cmd: Command) -> HandlerResult:
    r, j_r, s, j_s, phi = _action_inputs(cmd, with_psi=False)
    outcome = verify_semidirect(
        r, j_r, s, j_s, phi, cmd.m, _option(cmd, "m1"), _option(cmd, "m2"), cmd.config.strict
    )
    return HandlerResult(0 if outcome.report.ok else 1, {"order": r.n * s.n}, outcome.report)


@handler("verify", "cocycle", options=("constraints",))
def _verify_cocycle(cmd: Command) -> HandlerResult:
    g, v, c = _cocycle_inputs(cmd)
    report = cocycle_conditions(c, _option(cmd, "constraints"))
    return HandlerResult(0 if report.ok else 1, {"cocycle": c.to_dict()}, report)


# ---------------------------------------------------------------------------
# factorize
# ---------------------------------------------------------------------------


@handler("factorize", options=("r_embed", "s_embed", "m1", "m2", "decomposition"), needs_m=True)
def _factorize(cmd: Command) -> HandlerResult:
    (source,) = _inputs(cmd, "Q")
    q, j_q = load_loop(source)
    r_emb = parse_index_list(_option(cmd, "r_embed", required=True), q.n, "r-embed")
    s_emb = parse_index_list(_option(cmd, "s_embed", required=True), q.n, "s-embed")
    witness = exact_factorization(
        q, j_q, r_emb, s_emb, cmd.m, _option(cmd, "m1"), _option(cmd, "m2"), cmd.config.strict
    )
    result = witness.to_dict()
    report = witness.report
    variant = _option(cmd, "decomposition")
    if variant:
        maps = canonical_maps(q, r_emb, s_emb)
        decomposition = verify_moufang_decomposition(q, witness.r, witness.s, variant=variant, **maps)
        result["decomposition"] = decomposition.to_dict()
        report.merge(decomposition.report)
    return HandlerResult(0 if report.ok else 1, result, report)


# ---------------------------------------------------------------------------
# hopf
# ---------------------------------------------------------------------------


@handler("hopf", "lift", options=("structure",), needs_m=True)
def _hopf_lift(cmd: Command) -> HandlerResult:
    (source,) = cmd.inputs or ["-"]
    loop, j = load_loop(source)
    h = group_algebra(loop, j)
    report = verify_hopf_quasigroup(h, cmd.m)
    result: Dict[str, Any] = {"dim": h.dim, "m_invertible": report.ok}
    if _option(cmd, "structure"):
        result["structure"] = hopf_to_dict(h)
    return HandlerResult(0 if report.ok else 1, result, report)


@handler("hopf", "tensor", options=("m1", "m2", "structure"))
def _hopf_tensor(cmd: Command) -> HandlerResult:
    a_src, b_src = _inputs(cmd, "H1", "H2")
    h1, h2 = load_hopf(a_src), load_hopf(b_src)
    m1, m2 = _option(cmd, "m1", required=True), _option(cmd, "m2", required=True)
    report = ConditionReport("tensor product")
    for h, m, tag in ((h1, m1, "H1"), (h2, m2, "H2")):
        report.extend(
            ConditionCheck(f"{c.name}-{tag}", c.ok, c.witness, c.detail, c.gating)
            for c in verify_hopf_quasigroup(h, m).checks
        )
    report.raise_if_failed("tensor factors are not Hopf quasigroups")
    exponents = tensor_exponents(h1, m1, h2, m2)
    product = tensor_product(h1, h2)
    result: Dict[str, Any] = {"dim": product.dim, "exponents": exponents}
    if cmd.m is not None:
        report.merge(verify_hopf_quasigroup(product, cmd.m))
    if _option(cmd, "structure"):
        result["structure"] = hopf_to_dict(product)
    ok = report.ok and bool(exponents)
    return HandlerResult(0 if ok else 1, result, report)


@handler("hopf", "matched-pair", options=("m1", "m2", "structure"), needs_m=True)
def _hopf_matched(cmd: Command) -> HandlerResult:
    r, j_r, s, j_s, a = _action_inputs(cmd)
    lin = linearize_matched_pair(
        r, j_r, s, j_s, a, cmd.m, _option(cmd, "m1"), _option(cmd, "m2"), cmd.config.strict
    )
    result: Dict[str, Any] = {"dim": lin.hopf.data.dim, "identical_structure": True}
    if _option(cmd, "structure"):
        result["structure"] = hopf_to_dict(lin.hopf.data)
    return HandlerResult(0 if lin.hopf.report.ok else 1, result, lin.hopf.report)


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


def _search_summary(found) -> Dict[str, Any]:
    return {
        "count": found.count,
        "examined": found.examined,
        "complete": found.complete,
        "elapsed": round(found.elapsed, 3),
    }


@handler("search", "cocycles", options=("constraints", "count_only", "unpruned"))
def _search_cocycles(cmd: Command) -> HandlerResult:
    g_src, v_src = _inputs(cmd, "G", "V")
    g, _ = load_loop(g_src)
    v, _ = load_loop(v_src)
    constraints = _option(cmd, "constraints") or ["quasi-0", "quasi-I", "quasi-II"]
    found = search_cocycles(
        g, v, constraints,
        spec=_search_spec(cmd, carriers=(g.n, v.n), constraints=tuple(constraints)),
        pruned=not _option(cmd, "unpruned", False),
        count_only=bool(_option(cmd, "count_only", False)),
        progress=cmd.config.output_format == "text",
    )
    result = _search_summary(found)
    result["constraints"] = list(constraints)
    result["cocycles"] = [c.values for c in found]
    return HandlerResult(0, result)


@handler("search", "actions", options=("semidirect", "unpruned"), needs_m=True)
def _search_actions(cmd: Command) -> HandlerResult:
    r_src, s_src = _inputs(cmd, "R", "S")
    r, j_r = load_loop(r_src)
    s, j_s = load_loop(s_src)
    spec = _search_spec(cmd, carriers=(r.n, s.n))
    if _option(cmd, "semidirect", False):
        found = search_semidirect_actions(r, j_r, s, j_s, cmd.m, spec, cmd.config.strict)
    else:
        found = search_matched_actions(
            r, j_r, s, j_s, cmd.m, spec, pruned=not _option(cmd, "unpruned", False),
            strict=cmd.config.strict,
        )
    result = _search_summary(found)
    result["actions"] = [a.to_dict() for a in found]
    result["only_trivial"] = all(a.is_trivial for a in found)
    return HandlerResult(0, result)


@handler("search", "loops", options=("n", "sample", "seed", "store", "list"))
def _search_loops(cmd: Command) -> HandlerResult:
    _inputs(cmd)
    n = int(_option(cmd, "n", required=True))
    sample = _option(cmd, "sample")
    if sample is not None or n > cfg.exhaustive_order:
        if sample is None:
            raise SearchCapError(
                f"order {n} is beyond exhaustive enumeration; pass --sample K to draw random loops"
            )
        loops = sample_loops(n, int(sample), _option(cmd, "seed"))
    else:
        loops = list(enumerate_loops(n, progress=cmd.config.output_format == "text"))
    result: Dict[str, Any] = {"n": n, "count": len(loops), "complete": sample is None}
    if cmd.m is not None:
        result["m_inverse_count"] = sum(
            1 for l in loops if is_m_inverse(l, right_inverse_permutation(l), cmd.m)
        )
    if _option(cmd, "store", False):
        result["stored_new"] = load_loops_to_db(
            loops, cmd.config.db_url, cmd.config.window, source=f"search loops --n {n}"
        )
    if _option(cmd, "list", False):
        result["loops"] = [l.table for l in loops]
    return HandlerResult(0, result)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def _render_text(report: Dict[str, Any]) -> str:
    """Human-readable summary of a report via a rich table."""
    console = Console(file=io.StringIO(), width=110, color_system=None)
    console.print(f"{report['command']}: {report['status']} (exit {report['exit_code']})")
    if report.get("error"):
        console.print(f"error: {report['error']}")
    scalars = {k: v for k, v in report["result"].items() if not isinstance(v, (list, dict))}
    if scalars:
        summary = Table(show_header=False)
        for key, value in scalars.items():
            summary.add_row(key, str(value))
        console.print(summary)
    conditions = report.get("conditions")
    if conditions:
        laws = Table(title=conditions["subject"])
        for column in ("condition", "ok", "gating", "witness"):
            laws.add_column(column)
        for name, law in conditions["laws"].items():
            laws.add_row(name, str(law["ok"]), str(law["gating"]), str(law["witness"]))
        console.print(laws)
    return console.file.getvalue()


def run(cmd: Command, results: Optional[RunResults] = None) -> RunOutcome:
    """
    Dispatch a command and build its JSON report.

    Returns:
        RunOutcome with exit code 0 (verified), 1 (property or hypothesis fails)
        or 2 (usage, format, malformed input or cap error), the report and the
        text to print when the format is "text".
    """
    entry = HANDLERS.get((cmd.verb, cmd.action))
    outcome: HandlerResult
    try:
        if entry is None:
            raise UsageError(f"unknown command {cmd.name!r}")
        unknown = sorted(set(cmd.options) - entry.options)
        if unknown:
            raise UsageError(f"{cmd.name} does not accept {', '.join('--' + u.replace('_', '-') for u in unknown)}")
        if entry.needs_m and cmd.m is None:
            raise UsageError(f"{cmd.name} requires --m")
        logger.info(f"Running {cmd.name} on {cmd.inputs or '(no inputs)'}")
        outcome = entry.fn(cmd)
    except (PreconditionError, FactorizationImpossibleError, SingularAntipodeError) as e:
        logger.info(f"{cmd.name}: {e}")
        report = e.report if isinstance(e, PreconditionError) else None
        outcome = HandlerResult(1, {}, report)
        error = str(e)
    except (UsageError, MalformedTableError, ResourceCapError, SearchCapError, ValueError) as e:
        logger.error(f"{cmd.name}: {e}")
        outcome = HandlerResult(2)
        error = str(e)
    except InternalConsistencyError as e:
        logger.error(f"{cmd.name}: internal consistency failure: {e}")
        outcome = HandlerResult(2)
        error = f"internal consistency failure: {e}"
    else:
        error = None

    report = build_report(
        cmd.name, outcome.exit_code, outcome.result, outcome.conditions, error, cmd.m
    )
    if cmd.output:
        write_report(report, cmd.output)
    if results is not None:
        results.record(cmd.name, outcome.exit_code, report)

    fmt = cmd.config.output_format or (entry.default_format if entry else "json")
    if fmt == "text":
        text = outcome.text if outcome.text is not None else _render_text(report)
    else:
        text = dumps_report(report)
    return RunOutcome(outcome.exit_code, report, text)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

OPTION_ARGS: Dict[str, Dict[str, Any]] = {
    "m1": {"type": int, "help": "exponent of the first factor"},
    "m2": {"type": int, "help": "exponent of the second factor"},
    "preset": {"help": "Λ-example preset name"},
    "bundle_dir": {"help": "write the Λ-example bundle (tables + manifest) here"},
    "cap": {"type": int, "help": "closure cap for the transassociant group"},
    "rst": {"help": "exponents r,s,t"},
    "constraints": {"type": _csv, "help": "comma-separated cocycle constraints"},
    "r_embed": {"help": "indices of R inside Q"},
    "s_embed": {"help": "indices of S inside Q"},
    "decomposition": {"choices": ["matched", "semidirect"], "help": "also check the decomposition maps"},
    "structure": {"action": "store_true", "help": "include structure constants"},
    "count_only": {"action": "store_true"},
    "unpruned": {"action": "store_true"},
    "semidirect": {"action": "store_true", "help": "pin ψ to the trivial action"},
    "n": {"type": int, "help": "loop order"},
    "sample": {"type": int, "help": "draw this many random loops instead of enumerating"},
    "seed": {"type": int},
    "store": {"action": "store_true", "help": "persist loops to the corpus database"},
    "list": {"action": "store_true", "help": "include every table in the report"},
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, help="exponent of the m-inverse property")
    common.add_argument("--window", type=parse_window, help="classification window lo..hi")
    common.add_argument("--format", choices=["text", "json"], dest="output_format")
    common.add_argument("--budget", type=float, help="wall-clock cap in seconds for searches")
    common.add_argument("--max-candidates", type=int)
    common.add_argument(
        "--strict-paper-conditions", "--strict-conditions", action="store_true", dest="strict",
        help="literal readings of ambiguous conditions gate the construction",
    )
    common.add_argument("--output", help="also write the JSON report to this file")
    common.add_argument("--config", dest="config_file", help="RunConfig JSON file")
    common.add_argument("--db-url")
    common.add_argument("--log-level")
    common.add_argument("--log-file", action="store_true", help="log to logs/run_logs")
    common.add_argument("--save-results", action="store_true", help="save logs/run_results JSON")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="loopforge", description="Finite m-inverse loops, their products and Hopf quasigroups."
    )
    verbs = parser.add_subparsers(dest="verb", required=True)
    grouped: Dict[str, List[Tuple[Optional[str], _Handler]]] = {}
    for (verb, action), entry in HANDLERS.items():
        grouped.setdefault(verb, []).append((action, entry))

    def add_options(sub: argparse.ArgumentParser, entry: _Handler):
        sub.add_argument("inputs", nargs="*", metavar="INPUT")
        for key in sorted(entry.options):
            sub.add_argument("--" + key.replace("_", "-"), dest=key, **OPTION_ARGS[key])

    for verb, entries in grouped.items():
        if entries[0][0] is None:
            add_options(verbs.add_parser(verb, parents=[common]), entries[0][1])
            continue
        verb_parser = verbs.add_parser(verb)
        actions = verb_parser.add_subparsers(dest="action", required=True)
        for action, entry in entries:
            add_options(actions.add_parser(action, parents=[common]), entry)
    return parser


def _normalize_argv(argv: Sequence[str]) -> List[str]:
    """Join "--window -3..3" so argparse does not read the value as a flag."""
    out: List[str] = []
    it = iter(argv)
    for arg in it:
        if arg == "--window":
            out.append(f"--window={next(it, '')}")
        else:
            out.append(arg)
    return out


def command_from_args(args: argparse.Namespace) -> Command:
    config = RunConfig.load_from_file(args.config_file) if args.config_file else RunConfig()
    for key in ("output_format", "window", "budget", "max_candidates", "db_url", "log_level"):
        value = getattr(args, key)
        if value is not None:
            setattr(config, key, value)
    config.strict = config.strict or args.strict
    config.log_to_file = config.log_to_file or args.log_file
    config.save_results = config.save_results or args.save_results
    options = {
        key: getattr(args, key)
        for key in OPTION_ARGS
        if getattr(args, key, None) not in (None, False)
    }
    return Command(
        verb=args.verb,
        action=getattr(args, "action", None),
        inputs=list(args.inputs),
        m=args.m,
        options=options,
        output=args.output,
        config=config,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_normalize_argv(sys.argv[1:] if argv is None else argv))
        cmd = command_from_args(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"loopforge: error: {e}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, TypeError) as e:
        print(f"loopforge: error: cannot load config: {e}", file=sys.stderr)
        return 2

    RunLogger(cmd.config)
    results = RunResults()
    outcome = run(cmd, results)
    if outcome.text:
        sys.stdout.write(outcome.text)
        sys.stdout.flush()
    if cmd.config.save_results:
        results.finalize()
        path = results.save_to_file()
        logger.info(f"Run results saved to: {path}")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
