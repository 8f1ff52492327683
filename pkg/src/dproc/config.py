import logging
import os
from typing import Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field

LOG = logging.getLogger(__name__)

ENV_MAX_ALPHABET = "DPROC_MAX_ALPHABET"
ENV_MAX_STAKEHOLDERS = "DPROC_MAX_STAKEHOLDERS"
ENV_WORKERS = "DPROC_WORKERS"


class AnalysisSettings(BaseModel):
    """Limits and knobs shared by enumeration, utilities and comparison."""

    model_config = ConfigDict(frozen=True)

    max_alphabet: int = Field(default=12, ge=0)
    allow_large_alphabet: bool = False
    max_stakeholders: int = Field(default=20, ge=1)
    tie_tolerance: float = Field(default=1e-12, ge=0.0)
    workers: int = Field(default=1, ge=1)
    prune_prefixes: bool = False

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None, **overrides) -> "AnalysisSettings":
        environ = os.environ if environ is None else environ
        values = {}
        for variable, field in (
            (ENV_MAX_ALPHABET, "max_alphabet"),
            (ENV_MAX_STAKEHOLDERS, "max_stakeholders"),
            (ENV_WORKERS, "workers"),
        ):
            raw = environ.get(variable)
            if raw is None or raw.strip() == "":
                continue
            try:
                values[field] = int(raw)
            except ValueError:
                raise ValueError(f"{variable} must be an integer, got {raw!r}") from None
            LOG.debug("%s=%s from environment", field, values[field])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
