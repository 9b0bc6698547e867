# src/loaders/corpus_loader.py
"""Persist enumerated loops and their classifications to the corpus database."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Tuple, Union

from sqlalchemy import create_engine, select
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import sessionmaker

from config.config import cfg
from src.algebra.inverse_classify import Window, classify, right_inverse_permutation
from src.algebra.loops_core import (
    Loop,
    Permutation,
    has_two_sided_inverses,
    is_commutative,
    is_group,
)
from src.extractors.cayley_reader import parse_cayley_text
from src.loaders.report_writer import format_cayley
from src.models.models import ClassificationRecord, LoopRecord, create_all_tables

logger = logging.getLogger(__name__)

CorpusItem = Union[Loop, Tuple[Loop, Optional[Permutation]]]


def loop_digest(loop: Loop) -> str:
    """SHA-256 over the order, identity and int64 table bytes."""
    h = hashlib.sha256()
    h.update(f"{loop.n}:{loop.delta}:".encode())
    h.update(loop.table.astype("<i8").tobytes())
    return h.hexdigest()


def _session_factory(db_url: str):
    if db_url.startswith("sqlite:///"):
        Path(db_url[len("sqlite:///") :]).parent.mkdir(parents=True, exist_ok=True)
    engine = create_engine(db_url, echo=False, future=True)
    create_all_tables(engine)
    return sessionmaker(bind=engine)


def load_loops_to_db(
    loops: Iterable[CorpusItem],
    db_url: Optional[str] = None,
    window: Optional[Window] = None,
    source: Optional[str] = None,
) -> int:
    """
    Upsert loops by digest and append a classification row for each.

    Args:
        loops: Loops, or (loop, J) pairs; J defaults to the right inverse.
        db_url: SQLAlchemy URL; defaults to cfg.db_url.
        window: Classification window passed to classify().
        source: Free-text provenance, e.g. "search loops --n 5".

    Returns:
        Number of loops that were not in the corpus before.
    """
    db_url = db_url or cfg.db_url
    Session = _session_factory(db_url)
    session = Session()
    added = 0
    processed = 0
    pending = {}
    try:
        for item in loops:
            loop, j = item if isinstance(item, tuple) else (item, None)
            j = right_inverse_permutation(loop) if j is None else j
            digest = loop_digest(loop)
            record = pending.get(digest) or session.get(LoopRecord, digest)
            if record is None:
                record = pending[digest] = LoopRecord(
                    digest=digest,
                    order=loop.n,
                    identity=loop.delta,
                    table_text=format_cayley(loop),
                    is_group=is_group(loop),
                    is_commutative=is_commutative(loop),
                    two_sided_inverses=has_two_sided_inverses(loop),
                    source=source,
                )
                session.add(record)
                added += 1
            elif source and not record.source:
                record.source = source

            report = classify(loop, j, window)
            session.add(
                ClassificationRecord(
                    loop_digest=digest,
                    j_image=" ".join(str(v) for v in j.image),
                    window_low=report.window[0],
                    window_high=report.window[1],
                    h=report.h,
                    valid_m=json.dumps(report.valid_m),
                    wip=report.wip,
                    ci=report.ci,
                )
            )
            processed += 1

        session.commit()
        logger.info(f"Stored {processed} loops ({added} new) in {db_url}")
    except SQLAlchemyError as e:
        session.rollback()
        logger.error(f"Failed to load loops to database: {e}")
        raise
    finally:
        session.close()
    return added


def fetch_loops(
    db_url: Optional[str] = None,
    order: Optional[int] = None,
    predicate: Optional[Callable[[Loop], bool]] = None,
    groups_only: bool = False,
) -> List[Loop]:
    """Read loops back from the corpus, optionally filtered by order and a predicate."""
    Session = _session_factory(db_url or cfg.db_url)
    session = Session()
    try:
        stmt = select(LoopRecord).order_by(LoopRecord.order, LoopRecord.digest)
        if order is not None:
            stmt = stmt.where(LoopRecord.order == order)
        if groups_only:
            stmt = stmt.where(LoopRecord.is_group.is_(True))
        rows = session.execute(stmt).scalars().all()
        loops = [parse_cayley_text(r.table_text, source=r.digest).as_loop() for r in rows]
    except SQLAlchemyError as e:
        logger.error(f"Failed to read loops from database: {e}")
        raise
    finally:
        session.close()
    if predicate is not None:
        loops = [l for l in loops if predicate(l)]
    logger.debug(f"Fetched {len(loops)} loops (order={order})")
    return loops


def fetch_classifications(digest: str, db_url: Optional[str] = None) -> List[dict]:
    """Stored classifications of one loop, oldest first."""
    Session = _session_factory(db_url or cfg.db_url)
    session = Session()
    try:
        stmt = (
            select(ClassificationRecord)
            .where(ClassificationRecord.loop_digest == digest)
            .order_by(ClassificationRecord.id)
        )
        return [
            {
                "j": [int(v) for v in r.j_image.split()],
                "window": [r.window_low, r.window_high],
                "h": r.h,
                "valid_m": json.loads(r.valid_m),
                "wip": r.wip,
                "ci": r.ci,
            }
            for r in session.execute(stmt).scalars()
        ]
    finally:
        session.close()
