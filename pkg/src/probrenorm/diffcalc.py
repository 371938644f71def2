"""Finite-difference calculus on tabulated sequences.

Forward differences are formed row by row in double-double arithmetic, so
the only error left in a difference table is the representation error of
the input samples.  That error is amplified by up to ``2**k`` in row ``k``;
it is reported as ``rounding_floor`` rather than silently absorbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InsufficientWindow

EPS = np.finfo(float).eps

DEFAULT_MAX_TERMS = 40


class Status(str, Enum):
    CONVERGED = "Converged"
    TERMINATED = "Terminated"
    DIVERGED = "Diverged"
    STAGNATED = "Stagnated"


@dataclass(frozen=True)
class SeriesEval:
    """Outcome of a truncated infinite series.

    A ``Diverged`` result carries the last partial sum in ``value``; callers
    must not treat it as a number.
    """

    value: complex
    status: Status
    terms_used: int
    tail_estimate: float = 0.0
    rounding_floor: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status in (Status.CONVERGED, Status.TERMINATED)


@dataclass(frozen=True)
class SeqWindow:
    """Consecutive samples ``values[k] = s(base_index + k)``.

    ``increments`` optionally carries first differences computed at higher
    accuracy than ``values[k+1] - values[k]`` (e.g. straight from series
    terms instead of from two large partial sums).  ``noise`` is an absolute
    error bound on each sample (or increment) beyond double rounding.
    """

    base_index: int
    values: np.ndarray
    increments: np.ndarray | None = field(default=None)
    noise: float = 0.0

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if vals.size < 1:
            raise ValueError("window needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise ValueError("window values must be finite")
        object.__setattr__(self, "values", vals)
        if not (self.noise >= 0 and math.isfinite(self.noise)):
            raise ValueError("noise must be finite and non-negative")
        if self.increments is not None:
            inc = np.asarray(self.increments, dtype=complex)
            if inc.size != vals.size - 1:
                raise ValueError("increments must have len(values) - 1 entries")
            if not np.all(np.isfinite(inc)):
                raise ValueError("increments must be finite")
            object.__setattr__(self, "increments", inc)

    @classmethod
    def from_increments(cls, base_index: int, first: complex, increments,
                        noise: float = 0.0) -> "SeqWindow":
        inc = np.asarray(increments, dtype=complex)
        vals = np.empty(inc.size + 1, dtype=complex)
        vals[0] = first
        vals[1:] = first + compensated_cumsum(inc)
        return cls(base_index, vals, inc, noise)

    def __len__(self) -> int:
        return self.values.size


def gen_binomial(h: float, n: int) -> float:
    """Generalized binomial coefficient C(h, n) by the product recurrence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    c = 1.0
    for k in range(n):
        c = c * (h - k) / (k + 1)
    return c


def binomial_row(h: float, n_max: int) -> np.ndarray:
    """C(h, 0), ..., C(h, n_max) in one pass."""
    out = np.empty(n_max + 1)
    c = 1.0
    for k in range(n_max + 1):
        out[k] = c
        c = c * (h - k) / (k + 1)
    return out


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def compensated_cumsum(x) -> np.ndarray:
    """Running sums with Neumaier compensation (complex input allowed)."""
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    sr = si = cr = ci = 0.0
    for k, v in enumerate(x):
        vr, vi = v.real, v.imag
        t = sr + vr
        cr += (sr - t) + vr if abs(sr) >= abs(vr) else (vr - t) + sr
        sr = t
        t = si + vi
        ci += (si - t) + vi if abs(si) >= abs(vi) else (vi - t) + si
        si = t
        out[k] = complex(sr + cr, si + ci)
    return out


def compensated_sum(x) -> complex:
    x = np.asarray(x, dtype=complex)
    return complex(math.fsum(x.real), math.fsum(x.imag))


def _dd_forward_diff(hi: np.ndarray, lo: np.ndarray):
    # one row of forward differences in double-double; real arrays only
    d, err = _two_sum(hi[1:], -hi[:-1])
    low = err + (lo[1:] - lo[:-1])
    s = d + low
    return s, low - (s - d)


@dataclass(frozen=True)
class DifferenceTable:
    """Leading forward differences ``Δ^k s(base)`` for k = 0..order."""

    base_index: int
    leading: np.ndarray
    rounding_floor: np.ndarray
    zero_from: int | None

    @property
    def order(self) -> int:
        return self.leading.size - 1


def difference_table(w: SeqWindow, max_order: int) -> DifferenceTable:
    """Forward differences of ``w`` at its base index up to ``max_order``.

    ``zero_from`` is the first order whose whole row (at least two entries)
    is exactly zero, i.e. the window is a polynomial of lower degree.
    """
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    if len(w) < max_order + 1:
        raise InsufficientWindow(
            f"window of length {len(w)} cannot supply order {max_order}"
        )
    leading = np.zeros(max_order + 1, dtype=complex)
    floors = np.zeros(max_order + 1)
    leading[0] = w.values[0]
    floors[0] = EPS * abs(w.values[0]) + w.noise
    zero_from = None
    if max_order == 0:
        return DifferenceTable(w.base_index, leading, floors, None)

    if w.increments is not None:
        row = w.increments[: max_order]
        first_order = 1
        source = np.abs(row)
    else:
        row = w.values[: max_order + 1]
        first_order = 0
        source = np.abs(row)
    re_hi, im_hi = row.real.copy(), row.imag.copy()
    re_lo, im_lo = np.zeros_like(re_hi), np.zeros_like(im_hi)
    running_max = np.maximum.accumulate(source)

    for k in range(first_order, max_order + 1):
        if k > first_order:
            re_hi, re_lo = _dd_forward_diff(re_hi, re_lo)
            im_hi, im_lo = _dd_forward_diff(im_hi, im_lo)
        lead = complex(re_hi[0] + re_lo[0], im_hi[0] + im_lo[0])
        leading[k] = lead
        depth = k - first_order
        floors[k] = (
            2.0**depth * ((depth + 1) * EPS * running_max[depth] + w.noise)
            + k * EPS * abs(lead)
        )
        if (
            zero_from is None
            and k >= 1
            and re_hi.size >= 2
            and not np.any(re_hi)
            and not np.any(im_hi)
            and not np.any(re_lo)
            and not np.any(im_lo)
        ):
            zero_from = k
    return DifferenceTable(w.base_index, leading, floors, zero_from)


def sum_series(
    coeffs: Sequence[float] | np.ndarray,
    table: DifferenceTable,
    tol: float,
    max_terms: int | None = None,
) -> SeriesEval:
    """Sum ``Σ coeffs[n] Δ^n s(base)`` with the shared convergence heuristics.

    Converged: the last 3 terms are below ``tol * max(1, |partial|)`` (or at
    the rounding floor) and the floor-corrected magnitudes did not increase
    over the last 5 terms.  Diverged: strictly growing magnitudes over a
    5-term window with net growth above 1.5.  Terminated: the difference
    rows vanish identically.  Anything else when terms run out: Stagnated.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n_avail = min(len(coeffs), table.leading.size)
    if max_terms is not None:
        n_avail = min(n_avail, max_terms + 1)

    re_s = im_s = re_c = im_c = 0.0
    mags: list[float] = []
    effs: list[float] = []
    small: list[bool] = []
    floor_total = 0.0
    partial = 0j
    for n in range(n_avail):
        if table.zero_from is not None and n >= table.zero_from:
            return SeriesEval(partial, Status.TERMINATED, n, 0.0, floor_total)
        term = coeffs[n] * table.leading[n]
        fl = abs(coeffs[n]) * table.rounding_floor[n]
        floor_total += fl
        re_s, e = _two_sum(re_s, term.real)
        re_c += e
        im_s, e = _two_sum(im_s, term.imag)
        im_c += e
        partial = complex(re_s + re_c, im_s + im_c)

        mag = abs(term)
        eff = max(mag - fl, 0.0)
        scale = tol * max(1.0, abs(partial))
        mags.append(mag)
        effs.append(eff)
        small.append(eff <= scale)

        # finite tables are summed exactly to the zero row
        if table.zero_from is None and n >= 4 and all(small[-3:]) and all(
            effs[i + 1] <= effs[i] for i in range(n - 4, n)
        ):
            return SeriesEval(partial, Status.CONVERGED, n + 1, max(effs[-3:]), floor_total)
        # a table whose rows vanish identically is a finite sum, never divergent
        if (
            table.zero_from is None
            and n >= 4
            and not small[-1]
            and mag > 10.0 * fl
            and all(mags[i + 1] > mags[i] for i in range(n - 4, n))
            and mag > 1.5 * mags[n - 4]
        ):
            return SeriesEval(partial, Status.DIVERGED, n + 1, mag, floor_total)
    tail = max(effs[-3:]) if effs else 0.0
    return SeriesEval(partial, Status.STAGNATED, n_avail, tail, floor_total)


def newton_shift(
    w: SeqWindow,
    h: float,
    tol: float = 1e-12,
    max_terms: int = DEFAULT_MAX_TERMS,
    table: DifferenceTable | None = None,
) -> SeriesEval:
    """Fractional shift ``E^h s(base) = Σ C(h, n) Δ^n s(base)`` for h in [0, 1).

    A precomputed ``table`` for the same window may be passed to share the
    difference rows between several shifts from one base.
    """
    if not 0.0 <= h < 1.0:
        raise ValueError("h must lie in [0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if h == 0.0:
        return SeriesEval(complex(w.values[0]), Status.TERMINATED, 1, 0.0, 0.0)
    if table is None:
        table = difference_table(w, max_terms)
    elif table.order < max_terms:
        raise InsufficientWindow("difference table shorter than max_terms")
    return sum_series(binomial_row(h, max_terms), table, tol, max_terms)
