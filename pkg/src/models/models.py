# src/models/models.py
"""
SQLAlchemy models for the loop corpus: one row per Cayley table,
plus the inverse-property classifications computed for it.
"""
from sqlalchemy import (
    Boolean,
    Column,
    DateTime,
    ForeignKey,
    Integer,
    String,
    Text,
    text,
)
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class LoopRecord(Base):
    """A loop keyed by the SHA-256 digest of its table and identity."""

    __tablename__ = "loops"

    digest = Column(String(64), primary_key=True)
    order = Column(Integer, index=True)
    identity = Column(Integer)
    table_text = Column(Text)
    is_group = Column(Boolean, default=False, index=True)
    is_commutative = Column(Boolean, default=False)
    two_sided_inverses = Column(Boolean, default=False)
    source = Column(String(100), nullable=True)
    created_at = Column(DateTime, server_default=text("CURRENT_TIMESTAMP"))

    classifications = relationship(
        "ClassificationRecord", back_populates="loop", cascade="all, delete-orphan"
    )


class ClassificationRecord(Base):
    """classify() output for one loop, J and window."""

    __tablename__ = "classifications"

    id = Column(Integer, primary_key=True, autoincrement=True)
    loop_digest = Column(String(64), ForeignKey("loops.digest"), index=True)
    j_image = Column(Text)
    window_low = Column(Integer)
    window_high = Column(Integer)
    h = Column(Integer)
    valid_m = Column(Text)  # JSON list
    wip = Column(Boolean, default=False)
    ci = Column(Boolean, default=False)
    recorded_at = Column(DateTime, server_default=text("CURRENT_TIMESTAMP"), index=True)

    loop = relationship("LoopRecord", back_populates="classifications")


def create_all_tables(engine):
    """Create all tables in the target database."""
    Base.metadata.create_all(engine)
