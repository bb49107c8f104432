"""Run configuration: defaults < config file < command-line flags."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, asdict
from typing import Any, Mapping

from .errors import DomainError, IngestionError

FORMATS = ("csv", "json", "svg")


@dataclass
class RunConfig:
    """Everything a scoring run depends on; echoed verbatim into run.json."""

    input: str = ""
    mode: str = "infrequent"
    alpha: float = 0.05
    r: float = 2.0
    prune: bool = True
    max_len: int | None = None
    probs: str | None = None
    out: str = "sono-out"
    format: tuple[str, ...] = ("csv", "json")
    drop_cols: tuple[str, ...] = ()
    missing: str = "drop"
    threads: int = 1
    oracle_nu: bool = False
    delimiter: str = ","
    header: bool = True
    missing_markers: tuple[str, ...] = ("?", "")
    level_order: str = "first"
    maxlen_rule: str = "any-cell"
    max_cells: float = 1e7

    def validate(self, p: int | None = None) -> None:
        if self.mode not in ("infrequent", "frequent"):
            raise DomainError(f"mode must be infrequent or frequent, got {self.mode!r}")
        if not (0.0 < self.alpha <= 0.5):
            raise DomainError("alpha must be in (0, 0.5]")
        if self.r <= 0:
            raise DomainError("r must be > 0")
        if self.max_len is not None:
            if self.max_len < 1:
                raise DomainError("max-len must be >= 1")
            if p is not None and self.max_len > p:
                raise DomainError(f"max-len {self.max_len} exceeds p={p}")
        bad = set(self.format) - set(FORMATS)
        if bad:
            raise DomainError(f"unknown output formats {sorted(bad)}")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")
        if self.missing not in ("drop", "level"):
            raise DomainError("missing policy must be drop or level")
        if self.maxlen_rule not in ("any-cell", "all-cells"):
            raise DomainError("maxlen-rule must be any-cell or all-cells")

    def to_flat_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["format"] = list(self.format)
        d["drop_cols"] = list(self.drop_cols)
        d["missing_markers"] = list(self.missing_markers)
        return d


def _coerce(name: str, value: Any) -> Any:
    tuples = {"format", "drop_cols", "missing_markers"}
    if name in tuples:
        if isinstance(value, str):
            value = [v for v in value.split(",") if v != ""] if name != "missing_markers" \
                else value.split(",")
        return tuple(value)
    return value


def merge_config(defaults: RunConfig, file_values: Mapping[str, Any] | None,
                 cli_values: Mapping[str, Any] | None) -> RunConfig:
    """Apply config-file values then CLI values on top of the defaults."""
    known = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(**asdict(defaults))
    for source, tag in ((file_values, "config file"), (cli_values, "command line")):
        if not source:
            continue
        for key, value in source.items():
            name = key.replace("-", "_")
            if name not in known:
                raise IngestionError(f"unknown {tag} option {key!r}")
            if value is None:
                continue
            setattr(cfg, name, _coerce(name, value))
    return cfg


def load_config_file(path: str) -> dict[str, Any]:
    """Flat key-value JSON; a run.json (config nested under "config") also works."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise IngestionError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise IngestionError(f"config file {path} must hold a JSON object")
    if "config" in doc and isinstance(doc["config"], dict):
        doc = doc["config"]
    return doc
