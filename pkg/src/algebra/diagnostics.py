#!/usr/bin/env python3
# src/algebra/diagnostics.py
"""Named condition checks with first-witness reporting."""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra.errors import PreconditionError
from src.algebra.loops_core import first_failure

logger = logging.getLogger(__name__)


@dataclass
class ConditionCheck:
    """Outcome of one named law; `witness` is the first failing index tuple."""

    name: str
    ok: bool
    witness: Optional[Tuple[int, ...]] = None
    detail: str = ""
    gating: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "witness": list(self.witness) if self.witness is not None else None,
            "detail": self.detail,
            "gating": self.gating,
        }


@dataclass
class ConditionReport:
    """Ordered collection of checks about one construction."""

    subject: str
    checks: List[ConditionCheck] = field(default_factory=list)

    def add(self, check: ConditionCheck) -> ConditionCheck:
        self.checks.append(check)
        if not check.ok:
            level = logging.INFO if check.gating else logging.DEBUG
            logger.log(
                level,
                f"{self.subject}: {check.name} fails at {check.witness} {check.detail}".rstrip(),
            )
        return check

    def extend(self, checks: Iterable[ConditionCheck]):
        for check in checks:
            self.add(check)

    def merge(self, other: "ConditionReport"):
        self.extend(other.checks)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks if c.gating)

    @property
    def first_failure(self) -> Optional[ConditionCheck]:
        return next((c for c in self.checks if c.gating and not c.ok), None)

    def get(self, name: str) -> Optional[ConditionCheck]:
        return next((c for c in self.checks if c.name == name), None)

    def passed(self, name: str) -> bool:
        check = self.get(name)
        return check is not None and check.ok

    def failures(self, gating_only: bool = False) -> List[ConditionCheck]:
        return [c for c in self.checks if not c.ok and (c.gating or not gating_only)]

    def raise_if_failed(self, message: str):
        failure = self.first_failure
        if failure is not None:
            raise PreconditionError(
                f"{message}: {failure.name} fails at {failure.witness} {failure.detail}".rstrip(),
                report=self,
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "laws": {c.name: c.to_dict() for c in self.checks},
        }


def mask_check(
    name: str, mask: np.ndarray, detail: str = "", gating: bool = True
) -> ConditionCheck:
    """Check that holds where `mask` is True everywhere."""
    witness = first_failure(mask)
    return ConditionCheck(
        name, witness is None, witness, "" if witness is None else detail, gating
    )


def first_of(
    name: str, parts: Sequence[Tuple[str, np.ndarray]], gating: bool = True
) -> ConditionCheck:
    """One check over several sub-laws; reports the first failing sub-law."""
    for detail, mask in parts:
        witness = first_failure(mask)
        if witness is not None:
            return ConditionCheck(name, False, witness, detail, gating)
    return ConditionCheck(name, True, None, "", gating)


def flag_check(name: str, ok: bool, detail: str = "", gating: bool = True) -> ConditionCheck:
    return ConditionCheck(name, bool(ok), None, "" if ok else detail, gating)
