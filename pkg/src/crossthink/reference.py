"""Published MGSM result tables shipped as fixtures.

The evaluation grids behind these numbers need multi-GPU inference to
regenerate, so the aggregate tables are frozen here and the analysis layer is
regression-tested against them: group averages, row ranges, relative
differences, and the token/accuracy correlation must all reproduce from the
raw per-language cells.
"""

from __future__ import annotations

import json
from importlib import resources

from .errors import ConfigurationError

TABLES = (
    "compliance_detail",
    "forcing_by_language",
    "forcing_summary",
    "mgsm_14b",
    "reasoning_matrix",
    "reasoning_tokens",
)


def load_table(name: str) -> dict:
    """Load one packaged reference table by name (see TABLES)."""
    if name not in TABLES:
        raise ConfigurationError(
            f"unknown reference table {name!r}; available: {', '.join(TABLES)}"
        )
    payload = (
        resources.files("crossthink")
        .joinpath("data", "reference", f"{name}.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(payload)
