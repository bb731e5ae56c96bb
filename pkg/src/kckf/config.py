"""Run configuration as a flat ``key = value`` text file."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .filters.runner import FilterSettings, check_filter_name
from .filters.state import FilterState, PointSource
from .filters.ukf import ukf_weights
from .models import LowPassConfig, NoiseParams

_IDENTITY4 = tuple(float(x) for x in np.eye(4).ravel())


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a run. Defaults reproduce the reference experiment.

    ``P0`` is stored row-major as 16 numbers.
    """

    filters: tuple[str, ...] = ("kckf",)
    gyro_var: float = 1e-3
    acc_var: float = 1e-2
    mag_var: float = 1e-2
    q0: tuple[float, ...] = (1.0, 0.0, 0.0, 0.0)
    P0: tuple[float, ...] = _IDENTITY4
    ukf_alpha: float = 1e-3
    ukf_beta: float = 2.0
    ukf_kappa: float = 0.0
    lpf_alpha: float = 0.2
    mode: str = "redraw"
    seed: int = 0
    rate: float = 100.0

    def __post_init__(self) -> None:
        if isinstance(self.filters, str):
            object.__setattr__(self, "filters", parse_filter_list(self.filters))
        else:
            object.__setattr__(self, "filters", tuple(check_filter_name(f) for f in self.filters))
        if not self.filters:
            raise InvalidArgumentError("at least one filter must be selected")
        object.__setattr__(self, "mode", PointSource(self.mode).value)
        if len(self.q0) != 4 or len(self.P0) != 16:
            raise InvalidArgumentError("q0 needs 4 values and P0 needs 16")
        if not (np.isfinite(self.rate) and self.rate > 0.0):
            raise InvalidArgumentError("rate must be positive")
        self.noise()
        self.lowpass()
        self.initial_state()
        self.weights()

    def noise(self) -> NoiseParams:
        return NoiseParams(self.gyro_var, self.acc_var, self.mag_var)

    def lowpass(self) -> LowPassConfig:
        return LowPassConfig(self.lpf_alpha)

    def initial_state(self) -> FilterState:
        return FilterState.initial(np.array(self.q0), np.array(self.P0).reshape(4, 4))

    def weights(self):
        return ukf_weights(self.ukf_alpha, self.ukf_beta, self.ukf_kappa)

    def settings(self) -> FilterSettings:
        return FilterSettings(
            noise=self.noise(),
            mode=PointSource(self.mode),
            ukf=self.weights(),
            nominal_dt=1.0 / self.rate,
            initial=self.initial_state(),
        )

    def dumps(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def parse_filter_list(text: str) -> tuple[str, ...]:
    return tuple(check_filter_name(x) for x in text.split(",") if x.strip())


def _format(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


_PARSERS = {
    "filters": parse_filter_list,
    "q0": _parse_floats,
    "P0": _parse_floats,
    "mode": str.strip,
    "seed": int,
}


def loads(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unset keys keep ``base``."""
    known = {f.name for f in fields(RunConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise InvalidArgumentError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS.get(key, float)(value)
        except ValueError as exc:
            raise InvalidArgumentError(f"config line {lineno}: bad value for {key!r}: {exc}") from None
    return replace(base or RunConfig(), **values)


def load(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    return loads(Path(path).read_text(), base)


__all__ = ["RunConfig", "load", "loads", "parse_filter_list"]
