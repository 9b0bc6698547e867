#!/usr/bin/env python3
## config/config.py
"""Handles project configuration and environment variables."""
import os
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()


@dataclass
class Config:
    # Global caps (LOOPFORGE_BUDGET is in seconds)
    budget: float = float(os.getenv("LOOPFORGE_BUDGET", 30))
    max_candidates: int = int(os.getenv("LOOPFORGE_MAX_CANDIDATES", 1_000_000))
    closure_cap: int = int(os.getenv("LOOPFORGE_CLOSURE_CAP", 10_000))
    dim_cap: int = int(os.getenv("LOOPFORGE_DIM_CAP", 64))
    materialize_cap: int = int(os.getenv("LOOPFORGE_MATERIALIZE_CAP", 10_000))

    # Exhaustive loop enumeration stops here; larger orders use sampling
    exhaustive_order: int = int(os.getenv("LOOPFORGE_EXHAUSTIVE_ORDER", 6))

    # Default classification window
    window_low: int = int(os.getenv("LOOPFORGE_WINDOW_LOW", -4))
    window_high: int = int(os.getenv("LOOPFORGE_WINDOW_HIGH", 4))

    # Corpus database
    db_url: str = os.getenv("LOOPFORGE_DB_URL", "sqlite:///./data/loopforge_corpus.db")

    # Logging
    log_level: str = os.getenv("LOOPFORGE_LOG_LEVEL", "INFO")


cfg = Config()
