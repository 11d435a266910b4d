"""Small shared helpers: thread-count resolution, ordered parallel map and
exact decimal rendering of fractions."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "RESOLUTION_SPECTRA_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, else the environment variable, else 1."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        threads = int(raw) if raw else 1
    if threads < 1:
        raise ValueError("thread count must be >= 1")
    return threads


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> list[R]:
    """``list(map(fn, items))``, optionally on a thread pool.  Order is kept,
    so results never depend on the thread count."""
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def decimal_str(x, digits: int = 12) -> str:
    """Round-half-even decimal rendering of an exact rational, no floats."""
    if getattr(x, "is_infinite", False):
        return "inf"
    fr = Fraction(x.numerator, x.denominator) if hasattr(x, "numerator") else Fraction(x)
    scaled = round(fr * 10**digits)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    text = f"{frac:0{digits}d}".rstrip("0")
    return f"{sign}{whole}.{text}" if text else f"{sign}{whole}"


def exact_str(x) -> str:
    """Terminating decimals as decimals ("135.65"), anything else as "p/q"."""
    fr = Fraction(x.numerator, x.denominator) if hasattr(x, "numerator") else Fraction(x)
    d = fr.denominator
    k = 0
    while d % 2 == 0 or d % 5 == 0:
        d //= 2 if d % 2 == 0 else 5
        k += 1
    if d != 1:
        return f"{fr.numerator}/{fr.denominator}"
    return decimal_str(fr, k)
