"""Run configuration: an INI file with sections, overridable by flags.

Example::

    [run]
    seed = 7
    out = results

    [gen]
    n_securities = 100
    n_orders = 250000

    [tca]
    mode = standard
    paper_sign = false

    [mie]
    sizes = 0, 10000, 100000
    lookback_days = 20
    style = Neutral

    [samples]
    S1 = 2013-07-01, 2014-01-10

    [buckets]
    liquidity_pct = 0, 1, 5, 10, 25
    notional_a_mm = 0, 1, 5, 10
    notional_b_mm = 0, 1, 10, 25

Unknown sections or keys are rejected so typos surface early.
"""

from __future__ import annotations

import configparser
import datetime as dt
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ValidationError
from .events import LIQUIDITY_EDGES, NOTIONAL_EDGES_MM
from .marketdata import DEFAULT_WINDOWS, OUTLIER_FREE_END, SampleWindow, parse_date
from .mie import Style
from .tca import MIMode


@dataclass
class GenOptions:
    n_securities: int = 100
    n_orders: int = 250_000
    max_fills: int = 10
    spread_step_down: float = 0.5
    noise_bps: float = 5.0
    effect_bps: float = 10.0


@dataclass
class TcaOptions:
    mode: MIMode = MIMode.STANDARD
    paper_sign: bool = False


@dataclass
class MieOptions:
    sizes: tuple[float, ...] = (0.0, 10_000.0, 100_000.0)
    lookback_days: int = 20
    intervals_per_day: int = 10
    participation_rate: float = 0.1
    style: Style = Style.NEUTRAL
    start_frac: float = 0.0
    end_frac: float = 1.0
    n_paths: int = 200
    depletion_ticks: float = 1.0
    max_securities: int = 10
    calibration_orders: int = 200


@dataclass
class DeepDiveOptions:
    vol_window: int = 90
    interactions: bool = False
    policy: str = "screen"
    trend_end: dt.date = OUTLIER_FREE_END
    demean: bool = False


@dataclass
class RunConfig:
    seed: int = 20140114
    out: Path = Path("out")
    data: Path | None = None
    gen: GenOptions = field(default_factory=GenOptions)
    tca: TcaOptions = field(default_factory=TcaOptions)
    mie: MieOptions = field(default_factory=MieOptions)
    deepdive: DeepDiveOptions = field(default_factory=DeepDiveOptions)
    samples: tuple[SampleWindow, ...] = DEFAULT_WINDOWS
    liquidity_pct: tuple[float, ...] = LIQUIDITY_EDGES
    notional_mm: dict[str, tuple[float, ...]] = field(default_factory=lambda: dict(NOTIONAL_EDGES_MM))

    @property
    def data_dir(self) -> Path:
        return self.data if self.data is not None else self.out


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _convert(target, key: str, text: str):
    current = getattr(target, key)
    if isinstance(current, bool):
        return _bool(text)
    if isinstance(current, MIMode):
        return MIMode(text.strip().lower())
    if isinstance(current, Style):
        return Style(text.strip().capitalize())
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    if isinstance(current, tuple):
        return _floats(text)
    if isinstance(current, dt.date):
        return parse_date(text.strip())
    return text.strip()


def _apply(target, section: configparser.SectionProxy) -> None:
    names = {f.name for f in fields(target)}
    for key, text in section.items():
        if key not in names:
            raise ValidationError(f"[{section.name}] unknown key {key!r}")
        try:
            setattr(target, key, _convert(target, key, text))
        except ValueError as exc:
            raise ValidationError(f"[{section.name}] {key}: {exc}") from None


def load_config(path: str | Path | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # sample labels keep their case
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    for name in parser.sections():
        sec = parser[name]
        if name == "run":
            for key, text in sec.items():
                if key == "seed":
                    cfg.seed = _int(name, key, text)
                elif key in ("out", "data"):
                    setattr(cfg, key, Path(text.strip()))
                else:
                    raise ValidationError(f"[run] unknown key {key!r}")
        elif name in ("gen", "tca", "mie", "deepdive"):
            _apply(getattr(cfg, name), _lowered(sec))
        elif name == "samples":
            cfg.samples = tuple(_window(label, text) for label, text in sec.items())
        elif name == "buckets":
            for key, text in _lowered(sec).items():
                try:
                    edges = _floats(text)
                except ValueError as exc:
                    raise ValidationError(f"[buckets] {key}: {exc}") from None
                if key == "liquidity_pct":
                    cfg.liquidity_pct = edges
                elif key in ("notional_a_mm", "notional_b_mm"):
                    cfg.notional_mm[key[9].upper()] = edges
                else:
                    raise ValidationError(f"[buckets] unknown key {key!r}")
        else:
            raise ValidationError(f"{path}: unknown section [{name}]")
    return cfg


def _lowered(sec: configparser.SectionProxy) -> configparser.SectionProxy:
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_dict({sec.name: {k.lower(): v for k, v in sec.items()}})
    return parser[sec.name]


def _int(section: str, key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"[{section}] {key}: not an integer: {text!r}") from None


def _window(label: str, text: str) -> SampleWindow:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValidationError(f"[samples] {label}: expected 'start, end'")
    try:
        return SampleWindow(label, parse_date(parts[0]), parse_date(parts[1]))
    except ValueError as exc:
        raise ValidationError(f"[samples] {label}: {exc}") from None
