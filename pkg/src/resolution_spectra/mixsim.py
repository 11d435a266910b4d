"""Open-loop detector simulator: two oscillators, a mixer (ideal or with
intermodulation products), a brick-wall low-pass and a zero-crossing
counter.

Frequencies stay exact rationals until the time series is synthesized.
"""

from __future__ import annotations

import cmath
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from ._util import exact_str, parallel_map
from .exact import ProjectiveRational, parse_rational
from .spectrum import DetectorConfig, Spectrum, build_spectrum

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class NoSignal(ValueError):
    """Nothing left to count after filtering."""


def _hz(x) -> Fraction:
    if isinstance(x, str):
        x = parse_rational(x)
    if isinstance(x, ProjectiveRational):
        return x.fraction
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class Oscillator:
    frequency: Fraction
    amplitude: float = 1.0
    phase: float = 0.0

    def __init__(self, frequency, amplitude: float = 1.0, phase: float = 0.0):
        f = _hz(frequency)
        if f <= 0:
            raise ValueError("frequency must be positive")
        if amplitude <= 0:
            raise ValueError("amplitude must be positive")
        object.__setattr__(self, "frequency", f)
        object.__setattr__(self, "amplitude", float(amplitude))
        object.__setattr__(self, "phase", float(phase))


@dataclass(frozen=True)
class MixerModel:
    """``kind`` is "ideal" or "intermodulating".  The latter emits |p f0 - q f1|
    for 1 <= |p| + |q| <= order_limit with amplitude scaled by
    rolloff ** (|p| + |q| - 2)."""

    kind: str = "ideal"
    order_limit: int = 2
    rolloff: float = 1.0

    def __post_init__(self):
        if self.kind not in ("ideal", "intermodulating"):
            raise ValueError(f"unknown mixer kind {self.kind!r}")
        if self.order_limit < 1:
            raise ValueError("order_limit must be >= 1")
        if not 0 < self.rolloff <= 1:
            raise ValueError("rolloff must be in (0, 1]")


class Component(NamedTuple):
    frequency: Fraction
    amplitude: float
    phase: float = 0.0


def _merge(parts) -> list[Component]:
    """Sum components of equal frequency as phasors."""
    acc: dict[Fraction, complex] = {}
    for f, amp, ph in parts:
        acc[f] = acc.get(f, 0j) + cmath.rect(amp, ph)
    return [Component(f, abs(z), cmath.phase(z)) for f, z in sorted(acc.items())]


def mix(osc0: Oscillator, osc1: Oscillator, model: MixerModel = MixerModel()) -> list[Component]:
    f0, f1 = osc0.frequency, osc1.frequency
    base = osc0.amplitude * osc1.amplitude / 2
    if model.kind == "ideal":
        return [Component(f0 + f1, base, osc0.phase + osc1.phase),
                Component(abs(f0 - f1), base, math.copysign(1, f0 - f1) * (osc0.phase - osc1.phase))]
    parts = []
    P = model.order_limit
    for p in range(0, P + 1):
        for q in range(-P, P + 1):
            order = abs(p) + abs(q)
            if not 1 <= order <= P:
                continue
            if p == 0 and q < 0:
                continue  # (0, -q) is (0, q) up to sign
            f = p * f0 - q * f1
            ph = p * osc0.phase - q * osc1.phase
            if f < 0:
                f, ph = -f, -ph
            parts.append((f, base * model.rolloff ** (order - 2), ph))
    return _merge(parts)


def lowpass(components, fc) -> list[Component]:
    """Brick wall: keep frequency < fc."""
    fc = _hz(fc)
    if fc <= 0:
        raise ValueError("fc must be positive")
    return [c for c in components if c.frequency < fc]


def count_beat(components, window: float, sample_rate: Optional[float] = None) -> float:
    """Zero crossings of the synthesized signal over ``window`` seconds,
    divided by 2 * window.  The count can be off by one crossing, so the
    estimate is within 1 / window Hz of the dominant frequency."""
    comps = [c for c in components if c.amplitude > 0]
    if not comps:
        raise NoSignal("no component with non-zero amplitude")
    if window <= 0:
        raise ValueError("window must be positive")
    fmax = float(max(c.frequency for c in comps))
    if sample_rate is None:
        sample_rate = max(20 * fmax, 20 / window, 10.0)
    if sample_rate <= 4 * fmax:
        raise ValueError(f"sample rate {sample_rate} Hz aliases a {fmax} Hz component")
    n = int(round(window * sample_rate))
    t = np.arange(n) / sample_rate
    sig = np.zeros(n)
    for c in comps:
        sig += c.amplitude * np.cos(2 * np.pi * float(c.frequency) * t + c.phase)
    crossings = int(np.count_nonzero(np.diff(np.signbit(sig))))
    return crossings / (2 * window)


# ---------------------------------------------------------------------------
# sweeps


class SweepRow(NamedTuple):
    f0: Fraction
    nu: Fraction
    detected: Optional[float]
    center: Optional[ProjectiveRational]
    expected: Optional[Fraction]

    @property
    def zone_hit(self) -> bool:
        return self.center is not None


@dataclass
class SweepResult:
    rows: list[SweepRow]
    spectrum: Optional[Spectrum] = field(default=None, repr=False)

    def agreement(self, tol: float) -> tuple[int, int]:
        """(matching, total) over rows inside a predicted zone: the counted
        beat lies within tol of the center's beat frequency."""
        hits = [r for r in self.rows if r.zone_hit]
        good = sum(1 for r in hits if r.detected is not None and abs(r.detected - float(r.expected)) <= tol)
        return good, len(hits)

    def to_csv(self) -> str:
        lines = ["f0_hz,nu_num,nu_den,detected_hz,predicted_center,zone_hit"]
        for r in self.rows:
            det = "" if r.detected is None else repr(r.detected)
            center = "" if r.center is None else str(r.center)
            lines.append(f"{exact_str(r.f0)},{r.nu.numerator},{r.nu.denominator},{det},{center},"
                         f"{'true' if r.zone_hit else 'false'}")
        return "\n".join(lines) + "\n"


def sweep(f0_lo, f0_hi, steps: int, f1, fc, model: MixerModel, window: float,
          sample_rate: Optional[float] = None, threads: Optional[int] = None) -> SweepResult:
    """Simulate the detector on an exact f0 grid and tag each point with the
    predicted zone of nu = f0 / f1.  Inside the zone of p/q the expected beat
    is |q f0 - p f1|, the product that vanishes at f0 / f1 = p / q."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    f0_lo, f0_hi, f1, fc = _hz(f0_lo), _hz(f0_hi), _hz(f1), _hz(fc)
    if not 0 < f0_lo < f0_hi:
        raise ValueError("need 0 < f0_lo < f0_hi")
    grid = [f0_lo + (f0_hi - f0_lo) * k / (steps - 1) for k in range(steps)]
    sp = build_spectrum(DetectorConfig(f1, fc), f0_lo / f1, f0_hi / f1)
    osc1 = Oscillator(f1)

    def row(f0):
        nu = f0 / f1
        comps = lowpass(mix(Oscillator(f0), osc1, model), fc)
        try:
            detected = count_beat(comps, window, sample_rate)
        except NoSignal:
            detected = None
        z = sp.zone_of(nu)
        if z is None:
            return SweepRow(f0, nu, detected, None, None)
        c = z.center
        return SweepRow(f0, nu, detected, c, abs(c.denominator * f0 - c.numerator * f1))

    return SweepResult(parallel_map(row, grid, threads), sp)


@dataclass(frozen=True)
class SimConfig:
    f1: Fraction
    fc: Fraction
    model: MixerModel
    window: float = 100.0
    sample_rate: Optional[float] = None
    f0_lo: Optional[Fraction] = None
    f0_hi: Optional[Fraction] = None
    steps: int = 201


def load_config(path) -> SimConfig:
    """Read a TOML file with f1, fc, window, sample_rate, f0_lo, f0_hi, steps
    and a [model] table (kind, order_limit, rolloff).  Frequencies may be
    given as strings ("1000000.07", "3/2") to keep them exact."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    m = data.get("model", {})
    model = MixerModel(str(m.get("kind", "ideal")).lower(), int(m.get("order_limit", 2)),
                       float(m.get("rolloff", 1.0)))
    opt = lambda k: _hz(data[k]) if k in data else None  # noqa: E731
    sr = data.get("sample_rate")
    return SimConfig(_hz(data["f1"]), _hz(data["fc"]), model, float(data.get("window", 100.0)),
                     float(sr) if sr is not None else None, opt("f0_lo"), opt("f0_hi"),
                     int(data.get("steps", 201)))
