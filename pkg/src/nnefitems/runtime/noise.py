"""Injected delays used to stress the synchronisation protocol."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

START = "start"


@dataclass(frozen=True)
class NoisePoint:
    """Sleep ``delay_ms`` right after ``after`` completes on the item.

    ``after`` names an instruction result (a layer, or a get_var result),
    a sync transition ``sync:<variablesync>``, a barrier, or ``start``.
    """

    after: str
    delay_ms: int

    def __post_init__(self) -> None:
        if self.delay_ms < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay_ms}")


NoiseConfig = Mapping[str, NoisePoint]


def noise_from_json(obj) -> dict[str, NoisePoint]:
    if not isinstance(obj, dict):
        raise ValueError("noise config must be a JSON object keyed by item id")
    out = {}
    for item, spec in obj.items():
        if not isinstance(spec, dict) or set(spec) != {"after", "delay_ms"}:
            raise ValueError(f"noise for {item} needs exactly 'after' and 'delay_ms'")
        after, delay = spec["after"], spec["delay_ms"]
        if not isinstance(after, str) or not isinstance(delay, int) or isinstance(delay, bool):
            raise ValueError(f"noise for {item}: 'after' must be a string and 'delay_ms' an integer")
        out[item] = NoisePoint(after, delay)
    return out


def load_noise(path: str | Path) -> dict[str, NoisePoint]:
    return noise_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
