"""
Run and bench configuration.

Values come from, in increasing priority: model defaults, a `.env` file,
RVSIM_* environment variables, then command-line flags.
"""
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.bpred.predictor import Scheme
from src.errors import ConfigError
from src.fetch.units import FetchKind
from src.pipeline.core import CoreConfig

ENV_PREFIX = "RVSIM_"
ENV_KEYS = {
    "engine": str,
    "fetch": str,
    "bpred": str,
    "imem_kb": int,
    "dmem_kb": int,
    "max_cycles": int,
    "jobs": int,
    "seed": int,
    "sp_init": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
}


def env_defaults(dotenv_path: Optional[str] = None) -> Dict[str, Any]:
    """Collect RVSIM_* overrides after loading `.env`."""
    load_dotenv(dotenv_path=dotenv_path)
    defaults = {}
    for key, convert in ENV_KEYS.items():
        raw = os.environ.get(ENV_PREFIX + key.upper())
        if raw is None:
            continue
        try:
            defaults[key] = convert(raw)
        except ValueError:
            raise ConfigError(
                f"invalid value for {ENV_PREFIX}{key.upper()}: {raw!r}",
                "E_ENV_VALUE",
                {"variable": ENV_PREFIX + key.upper(), "value": raw}
            )
    return defaults


def _power_of_two_kb(value: int) -> int:
    if value < 1 or value & (value - 1):
        raise ValueError("memory size must be a power of two in KB")
    return value


class RunConfig(BaseModel):
    program: str
    format: Optional[Literal["bin", "hex"]] = None
    engine: Literal["pipeline", "ref"] = "pipeline"
    fetch: FetchKind = FetchKind.DUALPC
    bpred: Scheme = Scheme.GSHARE
    imem_kb: int = 64
    dmem_kb: int = 64
    max_cycles: int = Field(default=10_000_000, gt=0)
    trace: bool = False
    sp_init: bool = False
    log: Optional[str] = None
    stats: Optional[str] = None

    @field_validator("imem_kb", "dmem_kb")
    @classmethod
    def _check_memory(cls, value: int) -> int:
        return _power_of_two_kb(value)

    @property
    def label(self) -> str:
        if self.engine == "ref":
            return "ref"
        return f"{self.fetch.value}/{self.bpred.value}"

    def core_config(self) -> CoreConfig:
        return CoreConfig(
            fetch=self.fetch.value,
            bpred=self.bpred.value,
            max_cycles=self.max_cycles,
            imem_bytes=self.imem_kb * 1024,
            dmem_bytes=self.dmem_kb * 1024,
            sp_init=self.sp_init,
        )


class BenchMatrix(BaseModel):
    fetch: List[FetchKind] = Field(default_factory=lambda: [FetchKind.DUALPC, FetchKind.BUFFER])
    bpred: List[Scheme] = Field(default_factory=lambda: [Scheme.GSHARE])
    imem_kb: int = 64
    dmem_kb: int = 64
    max_cycles: int = Field(default=10_000_000, gt=0)
    sp_init: bool = False

    @field_validator("fetch", "bpred")
    @classmethod
    def _non_empty(cls, value: List[Any]) -> List[Any]:
        if not value:
            raise ValueError("matrix axis must not be empty")
        return list(dict.fromkeys(value))

    @field_validator("imem_kb", "dmem_kb")
    @classmethod
    def _check_memory(cls, value: int) -> int:
        return _power_of_two_kb(value)

    def cells(self) -> List[CoreConfig]:
        return [
            CoreConfig(
                fetch=fetch.value,
                bpred=bpred.value,
                max_cycles=self.max_cycles,
                imem_bytes=self.imem_kb * 1024,
                dmem_bytes=self.dmem_kb * 1024,
                sp_init=self.sp_init,
            )
            for fetch in self.fetch
            for bpred in self.bpred
        ]

    @classmethod
    def from_yaml(cls, path: str, **overrides: Any) -> "BenchMatrix":
        file = Path(path)
        if not file.is_file():
            raise ConfigError(f"file not found: {path}", "E_FILE_NOT_FOUND", {"path": path})
        with open(file) as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise ConfigError("matrix file must hold a mapping", "E_MATRIX_FORMAT", {"path": path})
        data.update({k: v for k, v in overrides.items() if v is not None})
        return build_model(cls, data)


def build_model(model_cls, data: Dict[str, Any]):
    """Validate into a model, turning pydantic errors into ConfigError."""
    try:
        return model_cls(**data)
    except ValidationError as e:
        problems = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ConfigError(
            "invalid configuration: " + "; ".join(problems),
            "E_CONFIG",
            {"problems": problems}
        )
