"""Run configuration: built-in defaults < config file < command-line flags.

The config file is JSON with any subset of the :class:`RunConfig` fields.
Its path comes from ``--config`` or, failing that, the ``COMBALANCE_CONFIG``
environment variable.
"""

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .anthro import BMI_VARIANTS
from .bsip import POLICIES, RENORMALIZE
from .correction import MODES, REPLACEMENT
from .errors import ConfigError
from .signal import MEAN_CENTER, NORMALIZATION_MODES

CONFIG_ENV = "COMBALANCE_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    resample_rate_hz: float = 30.0
    max_lag_s: float = 1.0
    normalization: str = MEAN_CENTER
    quality_threshold: float = 0.9
    lag_correction: bool = True
    missing_policy: str = RENORMALIZE
    inferred_penalty: float = 0.5
    bmi_variant: str = "new_bmi"
    correction_mode: str = REPLACEMENT
    model: Optional[str] = None
    ridge: float = 0.0
    output_dir: str = "results"

    def validate(self):
        def positive(name):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive number, got {v!r}")

        positive("resample_rate_hz")
        positive("max_lag_s")
        for name in ("quality_threshold", "inferred_penalty"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 <= v <= 1:
                raise ConfigError(f"{name} must lie in [0, 1], got {v!r}")
        if not isinstance(self.ridge, (int, float)) or not (math.isfinite(self.ridge) and self.ridge >= 0):
            raise ConfigError(f"ridge must be non-negative, got {self.ridge!r}")
        choices = {
            "normalization": NORMALIZATION_MODES,
            "missing_policy": POLICIES,
            "bmi_variant": BMI_VARIANTS,
            "correction_mode": MODES,
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if not isinstance(self.lag_correction, bool):
            raise ConfigError("lag_correction must be a boolean")
        return self

    def to_dict(self):
        """Serialized form embedded in results; omits where results are written."""
        d = asdict(self)
        d.pop("output_dir")
        return d


def load_config(path=None, overrides=None) -> RunConfig:
    """Merge defaults, the optional config file and explicit overrides."""
    cfg = RunConfig()
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        try:
            doc = json.loads(Path(path).read_text("utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
        cfg = _merge(cfg, doc, f"config file {path!r}")
    if overrides:
        cfg = _merge(cfg, {k: v for k, v in overrides.items() if v is not None}, "command line")
    return cfg.validate()


def _merge(cfg, doc, where):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"{where}: unknown settings {sorted(unknown)}")
    return replace(cfg, **doc)
