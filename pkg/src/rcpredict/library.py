"""Task library: per-task-type execution, area, reconfiguration and power parameters."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

MODES = ("hardware", "software", "hybrid")


class TaskLibraryError(ValueError):
    pass


@dataclass(frozen=True)
class TaskTypeSpec:
    type_id: int
    mode: str
    hw_exec: int
    sw_exec: int
    hw_area: int
    reconfig_time: int
    reconfig_power: Fraction
    hw_dyn_power: Fraction
    sw_dyn_power: Fraction

    def __post_init__(self):
        if self.mode not in MODES:
            raise TaskLibraryError(f"type {self.type_id}: unknown mode {self.mode!r}")
        if self.hw_capable:
            if self.hw_exec < 1:
                raise TaskLibraryError(f"type {self.type_id}: hw_exec must be >= 1")
            if self.hw_area < 1:
                raise TaskLibraryError(f"type {self.type_id}: hw_area must be >= 1")
            if self.reconfig_time < 0:
                raise TaskLibraryError(f"type {self.type_id}: negative reconfig_time")
        if self.sw_capable and self.sw_exec < 1:
            raise TaskLibraryError(f"type {self.type_id}: sw_exec must be >= 1")
        for name in ("reconfig_power", "hw_dyn_power", "sw_dyn_power"):
            if getattr(self, name) < 0:
                raise TaskLibraryError(f"type {self.type_id}: negative {name}")

    @property
    def hw_capable(self) -> bool:
        return self.mode in ("hardware", "hybrid")

    @property
    def sw_capable(self) -> bool:
        return self.mode in ("software", "hybrid")

    @property
    def nominal_exec(self) -> int:
        """Weight used for slack analysis: hardware cycles when available, else software."""
        return self.hw_exec if self.hw_capable else self.sw_exec

    @property
    def min_exec(self) -> int:
        options = []
        if self.hw_capable:
            options.append(self.hw_exec)
        if self.sw_capable:
            options.append(self.sw_exec)
        return min(options)


class TaskLibrary(Mapping[int, TaskTypeSpec]):
    """Immutable mapping ``type_id -> TaskTypeSpec``."""

    def __init__(self, specs: Iterable[TaskTypeSpec]):
        table: dict[int, TaskTypeSpec] = {}
        for spec in specs:
            if spec.type_id in table:
                raise TaskLibraryError(f"duplicate task type id {spec.type_id}")
            table[spec.type_id] = spec
        if not table:
            raise TaskLibraryError("task library is empty")
        self._table = dict(sorted(table.items()))

    def __getitem__(self, type_id: int) -> TaskTypeSpec:
        try:
            return self._table[type_id]
        except KeyError:
            raise TaskLibraryError(f"unknown task type id {type_id}") from None

    def __iter__(self):
        return iter(self._table)

    def __len__(self):
        return len(self._table)

    def __eq__(self, other):
        return isinstance(other, TaskLibrary) and self._table == other._table

    def __hash__(self):
        return hash(tuple(self._table.values()))

    def __repr__(self):
        return f"TaskLibrary({len(self)} types)"


_COLUMNS = ("type_id", "mode", "hw_exec", "sw_exec", "hw_area", "reconfig_time",
            "reconfig_power", "hw_dyn_power", "sw_dyn_power")


def _fmt_power(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return str(float(value))


def parse_library(text: str) -> TaskLibrary:
    specs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.split()[0] == "type_id":
            continue
        cols = line.split()
        if len(cols) != len(_COLUMNS):
            raise TaskLibraryError(f"line {lineno}: expected {len(_COLUMNS)} columns, got {len(cols)}")
        try:
            specs.append(TaskTypeSpec(
                type_id=int(cols[0]), mode=cols[1],
                hw_exec=int(cols[2]), sw_exec=int(cols[3]), hw_area=int(cols[4]),
                reconfig_time=int(cols[5]),
                reconfig_power=Fraction(cols[6]), hw_dyn_power=Fraction(cols[7]),
                sw_dyn_power=Fraction(cols[8]),
            ))
        except ValueError as exc:
            raise TaskLibraryError(f"line {lineno}: {exc}") from None
    return TaskLibrary(specs)


def serialize_library(lib: TaskLibrary) -> str:
    lines = ["# " + " ".join(_COLUMNS)]
    for s in lib.values():
        lines.append(" ".join([
            str(s.type_id), s.mode, str(s.hw_exec), str(s.sw_exec), str(s.hw_area),
            str(s.reconfig_time), _fmt_power(s.reconfig_power),
            _fmt_power(s.hw_dyn_power), _fmt_power(s.sw_dyn_power),
        ]))
    return "\n".join(lines) + "\n"


def load_library(path: str | Path) -> TaskLibrary:
    return parse_library(Path(path).read_text())


def save_library(lib: TaskLibrary, path: str | Path) -> None:
    Path(path).write_text(serialize_library(lib))


def default_library(seed: int = 0, n_types: int = 16) -> TaskLibrary:
    """Synthetic 16-type library used by the default pipeline.

    The first quarter of the types are hardware-only with small footprints and
    the rest are hybrid. Software runs 1.5x to 5x slower than hardware and
    reconfiguration time grows with area.
    """
    rng = np.random.default_rng([seed, 0x11B])
    n_hw = max(1, n_types // 4)
    specs = []
    for i in range(n_types):
        mode = "hardware" if i < n_hw else "hybrid"
        area = int(rng.integers(4, 10)) if mode == "hardware" else int(rng.integers(6, 41))
        hw_exec = int(rng.integers(10, 101))
        sw_exec = int(round(hw_exec * rng.uniform(1.5, 5.0))) if mode != "hardware" else 0
        specs.append(TaskTypeSpec(
            type_id=i + 1, mode=mode, hw_exec=hw_exec, sw_exec=sw_exec, hw_area=area,
            reconfig_time=3 * area + int(rng.integers(0, 11)),
            reconfig_power=Fraction(int(rng.integers(40, 101))),
            hw_dyn_power=Fraction(int(rng.integers(20, 61))),
            sw_dyn_power=Fraction(int(rng.integers(40, 101))) if mode != "hardware" else Fraction(0),
        ))
    return TaskLibrary(specs)
