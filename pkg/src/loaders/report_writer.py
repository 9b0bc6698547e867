#!/usr/bin/env python3
# src/loaders/report_writer.py
"""Emit Cayley text, JSON reports and Λ-example bundles."""
import json
import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

import jsonschema
import numpy as np

from src.algebra.constructions import LambdaBundle
from src.algebra.diagnostics import ConditionReport
from src.algebra.hopf import HopfQuasigroupData, hopf_to_dict
from src.algebra.loops_core import CayleyTable, Loop, Permutation, cayley_of

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parents[2] / "docs" / "report_schema.json"

EXIT_STATUS = {0: "verified", 1: "failed", 2: "error"}


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy values, fractions and report objects for json.dump."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Fraction):
        return [obj.numerator, obj.denominator]
    if isinstance(obj, Permutation):
        return list(obj.image)
    if isinstance(obj, ConditionReport):
        return obj.to_dict()
    if isinstance(obj, HopfQuasigroupData):
        return hopf_to_dict(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def format_cayley(
    obj: Union[CayleyTable, Loop],
    identity: Optional[int] = None,
    j: Optional[Permutation] = None,
    comment: Optional[str] = None,
) -> str:
    """
    Cayley text for a table; a loop contributes its identity line.

    Output parses back to the same table, identity and J.
    """
    table = cayley_of(obj).table
    if identity is None and isinstance(obj, Loop):
        identity = obj.delta
    lines = []
    if comment:
        lines.extend(f"# {part}" for part in comment.splitlines())
    lines.append(str(table.shape[0]))
    lines.extend(" ".join(str(int(v)) for v in row) for row in table)
    if identity is not None:
        lines.append(f"identity: {identity}")
    if j is not None:
        lines.append("J: " + " ".join(str(v) for v in j.image))
    return "\n".join(lines) + "\n"


def write_cayley(path: Union[str, Path], obj: Union[CayleyTable, Loop], **kwargs) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        os.makedirs(p.parent, exist_ok=True)
    p.write_text(format_cayley(obj, **kwargs), encoding="utf-8")
    logger.debug(f"Wrote Cayley table of order {cayley_of(obj).n} to {p}")
    return p


def build_report(
    command: str,
    exit_code: int,
    result: Optional[Dict[str, Any]] = None,
    conditions: Optional[ConditionReport] = None,
    error: Optional[str] = None,
    m: Optional[int] = None,
) -> Dict[str, Any]:
    """Envelope shared by every CLI verb; see docs/report_schema.json."""
    report: Dict[str, Any] = {
        "command": command,
        "status": EXIT_STATUS[exit_code],
        "exit_code": exit_code,
        "m": m,
        "result": to_jsonable(result or {}),
        "conditions": None if conditions is None else conditions.to_dict(),
        "error": error,
    }
    return to_jsonable(report)


def load_schema(path: Union[str, Path] = SCHEMA_PATH) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def validate_report(report: Dict[str, Any], schema_path: Union[str, Path] = SCHEMA_PATH):
    """Raise jsonschema.ValidationError when the report does not match the shipped schema."""
    jsonschema.validate(instance=report, schema=load_schema(schema_path))


def dumps_report(report: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=False) + "\n"


def write_report(report: Dict[str, Any], filepath: Union[str, Path]) -> Path:
    """Write a JSON report, creating parent directories."""
    p = Path(filepath)
    os.makedirs(p.parent, exist_ok=True)
    with open(p, "w", encoding="utf-8") as f:
        f.write(dumps_report(report))
    logger.info(f"Report written to {p}")
    return p


def write_bundle(bundle: LambdaBundle, directory: Union[str, Path]) -> Dict[str, Path]:
    """
    Λ-example as Cayley files plus manifest.json.

    Files: q.tbl (with J_Q), r.tbl, s.tbl, matched.tbl (R ⋈ S with its J), group.tbl.
    """
    out = Path(directory)
    os.makedirs(out, exist_ok=True)
    written = {
        "q": write_cayley(out / "q.tbl", bundle.q, j=bundle.j_q),
        "r": write_cayley(out / "r.tbl", bundle.r, j=bundle.j_r),
        "s": write_cayley(out / "s.tbl", bundle.s, j=bundle.j_s),
        "matched": write_cayley(out / "matched.tbl", bundle.matched, j=bundle.j_matched),
        "group": write_cayley(out / "group.tbl", bundle.group),
    }
    manifest = bundle.to_manifest()
    manifest["files"] = {k: v.name for k, v in written.items()}
    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(manifest), f, indent=2)
    written["manifest"] = manifest_path
    logger.info(f"Λ-example bundle of order {bundle.q.n} written to {out}")
    return written
