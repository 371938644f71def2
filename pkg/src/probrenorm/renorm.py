"""Residue-class partial sums, their fractional-shift extension, X_a and fits.

For a scaling factor m and class j the sums

    s_[j],n = Σ_{i<=n} a_i - m^ρ Σ_{i<=(n-j)/m} a_{mi},     n ≡ j (mod m),

form a sequence s̃_k = s_[j],j+mk that is carried to every n >= j by the
Newton series of the fractional shift.  X_a(n) averages the m extended
classes at a common n; its tail limit is the reported expectation.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from . import bernoulli, diffcalc, hfun
from .diffcalc import SeqWindow, SeriesEval, Status
from .errors import InsufficientWindow, SIsZero
from .hfun import HFamily, TermSequence

log = logging.getLogger(__name__)

M_MAX = 12
# assumed accuracy of each tabulated term, in units of double rounding
TERM_ULPS = 4.0
# class index from which Newton shifts of H-family class sums converge fast;
# shifts at smaller bases are carried down from here by telescoping
PULLBACK_BASE = 30


class Verdict:
    DRIFT = "Drift"
    EXTENSION_DIVERGENCE = "ExtensionDivergence"
    OSCILLATION = "Oscillation"


class FitVerdict:
    STRONG = "Strong"
    WEAK_ONLY = "WeakOnly"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class RenormConfig:
    n_eval: int = 160
    window: int = 64
    max_terms: int = 40
    newton_tol: float = 1e-13
    term_tol: float = 1e-13
    const_tol: float = 1e-10
    fit_tol: float = 1e-9
    drift_tol: float = 1e-8
    fallback_analytic_binomial: bool = False
    b_config: bernoulli.BEvalConfig = field(default_factory=bernoulli.BEvalConfig)

    def __post_init__(self):
        if self.window < 32:
            raise ValueError("tail window must hold at least 32 samples")
        if self.n_eval < self.window + M_MAX:
            raise ValueError("n_eval too small for the tail window")
        if self.max_terms < 5:
            raise ValueError("max_terms must be >= 5")
        for name in ("newton_tol", "term_tol", "const_tol", "fit_tol", "drift_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def n_max(self, m: int) -> int:
        return self.n_eval + m * (self.max_terms + 1)


# --------------------------------------------------------------------------
# term tables and class sums


@dataclass(frozen=True)
class TermTable:
    """a_0..a_N once, shared read-only by every (m, j).

    ``term_fn`` continues the terms to real x >= 1 when the source is an
    H-family; direct term sequences leave it unset.
    """

    terms: np.ndarray
    label: str = ""
    term_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.terms, dtype=complex)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("need at least a_0 and a_1")
        if not np.all(np.isfinite(t)):
            raise ValueError("terms must be finite")
        object.__setattr__(self, "terms", t)

    @property
    def n_max(self) -> int:
        return self.terms.size - 1

    @classmethod
    def from_source(cls, source: HFamily | TermSequence, s: complex | None, t0: float,
                    n_max: int, tol: float = hfun.DEFAULT_TOL) -> "TermTable":
        if isinstance(source, TermSequence):
            return cls(source.terms(n_max), source.name)
        if s is None:
            raise ValueError("an H-family needs the parameter s")
        return cls(hfun.family_terms(source, s, t0, n_max, tol), source.name,
                   hfun.term_function(source, s, t0, tol))


def _block_sums(terms: np.ndarray, starts: np.ndarray, m: int) -> np.ndarray:
    # Σ_{i=start+1}^{start+m} a_i for each start, exactly rounded
    out = np.empty(starts.size, dtype=complex)
    for k, st in enumerate(starts):
        out[k] = diffcalc.compensated_sum(terms[st + 1 : st + m + 1])
    return out


@dataclass(frozen=True)
class ResidueClassTable:
    """Class sums s̃_k = s_[j],j+mk and, once extended, s_[j](n) for n in [j, n_eval]."""

    m: int
    j: int
    rho: int
    raw: np.ndarray
    increments: np.ndarray
    extended: np.ndarray | None = None
    extension_status: tuple[Status, ...] | None = None
    extension_terms: np.ndarray | None = None
    increment_noise: np.ndarray | None = None
    term_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False, repr=False)

    def raw_index(self, k: int) -> int:
        return self.j + self.m * k

    def value_at(self, n: int) -> complex:
        if self.extended is None:
            raise ValueError("class table has not been extended")
        if not self.j <= n < self.j + self.extended.size:
            raise IndexError(f"n={n} outside the extended range")
        return complex(self.extended[n - self.j])

    def status_at(self, n: int) -> Status:
        return self.extension_status[n - self.j]


def class_partial_sums(table: TermTable, m: int, j: int, rho: int = 1,
                       n_max: int | None = None) -> ResidueClassTable:
    """Raw class sums on n ≡ j (mod m), n <= n_max.

    Increments s̃_{k+1} - s̃_k are taken straight from the terms, so the
    difference tables never see the rounding of large partial sums.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0 <= j < m:
        raise ValueError("j must lie in [0, m)")
    if rho not in (0, 1):
        raise ValueError("rho must be 0 or 1")
    a = table.terms
    top = table.n_max if n_max is None else min(n_max, table.n_max)
    if top < j:
        raise InsufficientWindow(f"no terms up to n={j}")
    k_count = (top - j) // m + 1
    weight = float(m**rho)
    first = diffcalc.compensated_sum(a[: j + 1]) - weight * a[0]
    starts = j + m * np.arange(k_count - 1)
    sub = a[m * np.arange(1, k_count)]
    inc = _block_sums(a, starts, m) - weight * sub
    # b_k is often a small difference of large pieces; its error follows the pieces
    absa = np.abs(a)
    pieces = np.array([absa[st + 1 : st + m + 1].sum() for st in starts]) + weight * np.abs(sub)
    noise = TERM_ULPS * diffcalc.EPS * pieces
    w = SeqWindow.from_increments(0, first, inc)
    return ResidueClassTable(m, j, rho, w.values, w.increments, increment_noise=noise,
                             term_fn=table.term_fn)


def _alternating_fallback(window: np.ndarray, h: float, tol: float) -> SeriesEval | None:
    # s̃_{k0+i} = α + β(-1)^i exactly  =>  E^h s̃ = α + β (1-2)^h on the principal branch
    alpha = (window[0] + window[1]) / 2
    beta = (window[0] - window[1]) / 2
    model = alpha + beta * np.where(np.arange(window.size) % 2 == 0, 1.0, -1.0)
    scale = max(1.0, float(np.max(np.abs(window))))
    if np.max(np.abs(window - model)) > tol * scale:
        return None
    return SeriesEval(complex(alpha + beta * cmath.exp(1j * math.pi * h)), Status.CONVERGED, 2)


def _class_increments_at(tab: ResidueClassTable, xs: np.ndarray) -> np.ndarray:
    # b(x) = Σ_{r=1..m} a(j + m x + r) - m^ρ a(m (x+1)), the class increment off the integers
    m, j = tab.m, tab.j
    pts = j + m * xs[:, None] + np.arange(1, m + 1)[None, :]
    block = tab.term_fn(pts.ravel()).reshape(pts.shape)
    sub = tab.term_fn(m * (xs + 1))
    return np.array([diffcalc.compensated_sum(row) for row in block]) - float(m**tab.rho) * sub


def extend_class(tab: ResidueClassTable, n_eval: int, tol: float = 1e-13,
                 max_terms: int = diffcalc.DEFAULT_MAX_TERMS,
                 fallback_analytic_binomial: bool = False,
                 pullback_base: int | None = PULLBACK_BASE) -> ResidueClassTable:
    """Fill s_[j](n) for n in [j, n_eval] by Newton fractional shifts.

    A single difference table per base k0 serves all m-1 fractional offsets.
    Near the start of a class the Newton series converges only
    algebraically.  When the table carries a term function, a shift at base
    k0 that does not terminate is taken instead from the class index
    k1 = ``pullback_base`` (capped at the last base) and carried down exactly:

        s_[j](k0 + h) = s_[j](k1 + h) - Σ_{k0 <= i < k1} b(i + h).
    """
    m, j = tab.m, tab.j
    if n_eval < j:
        raise ValueError("n_eval below the class start")
    count = n_eval - j + 1
    k_last = (n_eval - j) // m
    needed = k_last + max_terms + 1
    if tab.raw.size < needed:
        raise InsufficientWindow(
            f"class j={j} mod {m} holds {tab.raw.size} sums, needs {needed}"
        )

    def window_at(k0: int) -> tuple[SeqWindow, diffcalc.DifferenceTable]:
        noise = 0.0 if tab.increment_noise is None else float(tab.increment_noise[k0 : k0 + max_terms].max())
        win = SeqWindow(k0, tab.raw[k0 : k0 + max_terms + 1], tab.increments[k0 : k0 + max_terms], noise)
        return win, diffcalc.difference_table(win, max_terms)

    k_pb = None
    if tab.term_fn is not None and pullback_base is not None:
        k_pb = min(k_last, pullback_base)
    carried: dict[int, tuple[SeriesEval, np.ndarray]] = {}

    def pulled(k0: int, r: int) -> SeriesEval:
        if r not in carried:
            win, dt = window_at(k_pb)
            far = diffcalc.newton_shift(win, r / m, tol, max_terms, table=dt)
            b = _class_increments_at(tab, np.arange(k_pb) + r / m)
            # suffix sums Σ_{i >= k0} b_i over the carried range
            suffix = diffcalc.compensated_cumsum(b[::-1])[::-1] if k_pb else np.zeros(0, complex)
            carried[r] = (far, suffix)
        far, suffix = carried[r]
        return SeriesEval(far.value - suffix[k0], far.status, far.terms_used,
                          far.tail_estimate, far.rounding_floor)

    values = np.empty(count, dtype=complex)
    statuses: list[Status] = []
    used = np.zeros(count, dtype=int)
    for k0 in range(k_last + 1):
        base_n = j + m * k0
        values[base_n - j] = tab.raw[k0]
        statuses.append(Status.TERMINATED)
        offsets = [r for r in range(1, m) if base_n + r <= n_eval]
        if not offsets:
            continue
        win, dt = window_at(k0)
        for r in offsets:
            res = diffcalc.newton_shift(win, r / m, tol, max_terms, table=dt)
            if k_pb is not None and k0 < k_pb and res.status is not Status.TERMINATED:
                res = pulled(k0, r)
            elif res.status is Status.DIVERGED and fallback_analytic_binomial:
                alt = _alternating_fallback(win.values, r / m, 1e-12)
                if alt is not None:
                    res = alt
            values[base_n + r - j] = res.value
            statuses.append(res.status)
            used[base_n + r - j] = res.terms_used
    return replace(tab, extended=values, extension_status=tuple(statuses), extension_terms=used)


def sample_X(tables: Sequence[ResidueClassTable], n: int) -> complex:
    """X_a(n) = (1/m) Σ_j s_[j](n)."""
    m = len(tables)
    if m == 0:
        raise ValueError("no class tables")
    if n < m:
        raise ValueError("X_a is only sampled for n >= m")
    return sum(t.value_at(n) for t in tables) / m


# --------------------------------------------------------------------------
# expectation by tail limit

# the tail model of an algebraically converging X needs |n ΔX| to shrink at
# least this fast in log-log slope before its limit is trusted
DECAY_SLOPE = -0.25
LEVIN_TERMS = 3


def _levin_fit(n: np.ndarray, x: np.ndarray) -> tuple[complex, float, float]:
    """Least-squares fit of x_n = α + ω_n Σ_k c_k (n_end/n)^k with ω_n = n Δx_{n-1}.

    The remainder estimate ω_n carries the unknown decay power, so tails like
    n^p (c_0 + c_1/n + ...) with non-integer or complex p are fitted linearly.
    Returns (α, max residual, log-log slope of |ω_n|).
    """
    w = n[1:] * np.diff(x)
    nn, xx = n[1:], x[1:]
    mag = np.abs(w)
    if np.any(mag == 0):
        return 0j, math.inf, math.inf
    slope = float(np.polyfit(np.log(nn), np.log(mag), 1)[0])
    A = np.column_stack([np.ones(nn.size, dtype=complex)] + [w * (nn[-1] / nn) ** k for k in range(LEVIN_TERMS)])
    coef, *_ = np.linalg.lstsq(A, xx, rcond=None)
    return complex(coef[0]), float(np.max(np.abs(A @ coef - xx))), slope


@dataclass(frozen=True)
class Expectation:
    value: complex | None
    verdict: str | None
    constancy_deviation: float
    tail_window: tuple[int, int]
    fit_residual: float = 0.0
    drift: float = 0.0


def expectation(ns: Sequence[int], xs: Sequence[complex], cfg: RenormConfig = RenormConfig()) -> Expectation:
    """Tail limit of X over the window; a verdict when there is none.

    Constant tails short-circuit to the last sample.  Otherwise the window is
    fitted by α + Σ_{k=1..4} β_k (n_end/n)^k + γ n: a significant γ is Drift,
    a good fit without drift returns α.  When |n ΔX| visibly decays a
    Levin-type fit, which also covers non-integer and complex decay powers,
    is tried before the integer-power one.  Anything else is Oscillation.
    """
    n = np.asarray(ns, dtype=float)
    x = np.asarray(xs, dtype=complex)
    if n.size != x.size or n.size < 32:
        raise ValueError("expectation needs a window of at least 32 samples")
    if not np.all(np.isfinite(x)):
        return Expectation(None, Verdict.EXTENSION_DIVERGENCE, math.inf, (int(n[0]), int(n[-1])))
    span = (int(n[0]), int(n[-1]))
    last = complex(x[-1])
    scale = max(1.0, abs(last))
    dev = float(np.max(np.abs(x - last)))
    if dev <= cfg.const_tol * scale:
        return Expectation(last, None, dev, span)

    u = n[-1] / n
    cols = [np.ones_like(n)] + [u**k for k in range(1, 5)]
    with_drift = np.column_stack(cols + [n / n[-1]])
    coef, *_ = np.linalg.lstsq(with_drift.astype(complex), x, rcond=None)
    drift_total = abs(coef[-1])  # γ·n_end
    resid_drift = float(np.max(np.abs(with_drift @ coef - x)))
    no_drift = np.column_stack(cols).astype(complex)
    coef0, *_ = np.linalg.lstsq(no_drift, x, rcond=None)
    resid = float(np.max(np.abs(no_drift @ coef0 - x)))
    alpha = complex(coef0[0])
    ascale = max(1.0, abs(alpha))
    # integer powers of 1/n can match an n^-1.5 tail on the window and still
    # extrapolate badly, so the Levin model (which contains them) goes first
    lev, lev_resid, slope = _levin_fit(n, x)
    if slope <= DECAY_SLOPE and lev_resid <= cfg.fit_tol * max(1.0, abs(lev)):
        return Expectation(lev, None, dev, span, lev_resid, drift_total / n[-1])
    if resid <= cfg.fit_tol * ascale:
        return Expectation(alpha, None, dev, span, resid, drift_total / n[-1])
    steps = np.diff(x)
    growing = np.all(np.abs(x[1:] - x[0]) >= np.abs(x[:-1] - x[0]) - cfg.fit_tol * scale)
    # an extra column always lowers the residual; drift must explain most of it
    if drift_total > cfg.drift_tol * ascale and (resid_drift < 0.1 * resid or growing):
        return Expectation(None, Verdict.DRIFT, dev, span, resid, drift_total / n[-1])
    if np.all(np.abs(steps) > 0) and growing:
        return Expectation(None, Verdict.DRIFT, dev, span, resid, drift_total / n[-1])
    return Expectation(None, Verdict.OSCILLATION, dev, span, resid, drift_total / n[-1])


# --------------------------------------------------------------------------
# per-m pipeline and reports


@dataclass(frozen=True)
class MResult:
    m: int
    expectation: complex | None
    verdict: str | None
    constancy_deviation: float
    tail_window: tuple[int, int]
    cross_residual: float | None = None
    predicted: complex | None = None

    def __post_init__(self):
        if (self.expectation is None) == (self.verdict is None):
            raise ValueError("exactly one of expectation and verdict must be set")

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "expectation": _cplx_out(self.expectation),
            "verdict": self.verdict,
            # JSON has no infinity; a missing deviation means the X samples do not exist
            "constancy_deviation": self.constancy_deviation if math.isfinite(self.constancy_deviation) else None,
            "tail_window": list(self.tail_window),
            "cross_residual": self.cross_residual,
            "predicted": _cplx_out(self.predicted),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "MResult":
        return cls(
            int(d["m"]), _cplx_in(d["expectation"]), d["verdict"],
            math.inf if d["constancy_deviation"] is None else float(d["constancy_deviation"]),
            tuple(int(v) for v in d["tail_window"]),
            None if d.get("cross_residual") is None else float(d["cross_residual"]),
            _cplx_in(d.get("predicted")),
        )


def _cplx_out(z: complex | None):
    return None if z is None else [z.real, z.imag]


def _cplx_in(v) -> complex | None:
    return None if v is None else complex(float(v[0]), float(v[1]))


@dataclass(frozen=True)
class StrongFit:
    S: complex | None
    c: complex | None
    residuals: dict[int, float]
    verdict: str
    m_used: tuple[int, ...] = ()
    tie_broken: bool = False

    def to_dict(self) -> dict:
        return {
            "S": _cplx_out(self.S),
            "c": _cplx_out(self.c),
            "residuals": {str(k): v for k, v in sorted(self.residuals.items())},
            "verdict": self.verdict,
            "m_used": list(self.m_used),
            "tie_broken": self.tie_broken,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "StrongFit":
        return cls(
            _cplx_in(d["S"]), _cplx_in(d["c"]),
            {int(k): float(v) for k, v in d["residuals"].items()},
            d["verdict"], tuple(int(v) for v in d["m_used"]), bool(d["tie_broken"]),
        )


@dataclass(frozen=True)
class RenormReport:
    family: str
    s: complex | None
    t0: float
    rho: int
    results: tuple[MResult, ...]
    fit: StrongFit | None = None

    @property
    def weak(self) -> bool:
        return all(r.expectation is not None for r in self.results)

    def expectations(self) -> dict[int, complex]:
        return {r.m: r.expectation for r in self.results if r.expectation is not None}

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "s": _cplx_out(self.s),
            "t0": self.t0,
            "rho": self.rho,
            "weak": self.weak,
            "results": [r.to_dict() for r in self.results],
            "fit": None if self.fit is None else self.fit.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RenormReport":
        return cls(
            d["family"], _cplx_in(d["s"]), float(d["t0"]), int(d["rho"]),
            tuple(MResult.from_dict(r) for r in d["results"]),
            None if d.get("fit") is None else StrongFit.from_dict(d["fit"]),
        )


def class_tables(table: TermTable, m: int, rho: int, cfg: RenormConfig) -> list[ResidueClassTable]:
    out = []
    for j in range(m):
        raw = class_partial_sums(table, m, j, rho, cfg.n_max(m))
        out.append(extend_class(raw, cfg.n_eval, cfg.newton_tol, cfg.max_terms,
                                cfg.fallback_analytic_binomial))
    return out


def X_samples(tables: Sequence[ResidueClassTable], n_from: int, n_to: int) -> np.ndarray:
    m = len(tables)
    stack = np.vstack([t.extended[n_from - t.j : n_to - t.j + 1] for t in tables])
    return stack.sum(axis=0) / m


def predicted_expectation(fam: HFamily, s: complex, t0: float, m: int, rho: int,
                          cfg: bernoulli.BEvalConfig = bernoulli.DEFAULT_B) -> complex | None:
    """Closed form of E[X_a] through the Bernoulli operator.

    ρ = 1: -(1/s)(B f(s,t0) - m^s B f^m(s, (t0+m-1)/m)), exact for every s ≠ 0.
    ρ = 0: L - L_m by direct summation, only where the series converges.
    """
    s = complex(s)
    shift = (t0 + m - 1) / m
    fm = hfun.scaled_family(fam, m)
    if rho == 1:
        b0 = bernoulli.bernoulli_apply(fam, s, t0, cfg).value
        bm = bernoulli.bernoulli_apply(fm, s, shift, cfg).value
        return -(b0 - cmath.exp(s * math.log(m)) * bm) / s
    if not bernoulli.in_A_region(fam, s):
        return None
    total = bernoulli.series_sum_A(fam, s, t0).value
    sub = cmath.exp((s - 1) * math.log(m)) * bernoulli.series_sum_A(fm, s, shift).value
    return total - sub


def run_m(table: TermTable, m: int, rho: int, cfg: RenormConfig) -> tuple[Expectation, list[ResidueClassTable]]:
    """Extend every class, then take the tail limit of X.

    Every shift feeding X on [m, n_eval] must exist; the reported constancy
    deviation is max |X(n) - X(m)| over that whole range.
    """
    tabs = class_tables(table, m, rho, cfg)
    lo = cfg.n_eval - cfg.window + 1
    span = (lo, cfg.n_eval)
    needed = [st for t in tabs for st in t.extension_status[m - t.j :]]
    if any(st is Status.DIVERGED for st in needed):
        return Expectation(None, Verdict.EXTENSION_DIVERGENCE, math.inf, span), tabs
    xs = X_samples(tabs, m, cfg.n_eval)
    exp = expectation(np.arange(lo, cfg.n_eval + 1), xs[lo - m :], cfg)
    return replace(exp, constancy_deviation=float(np.max(np.abs(xs - xs[0])))), tabs


def constancy_over(tabs: Sequence[ResidueClassTable], n_from: int, n_to: int) -> float:
    xs = X_samples(tabs, n_from, n_to)
    return float(np.max(np.abs(xs - xs[0])))


def weak_report(source: HFamily | TermSequence, s: complex | None = None, t0: float = 1.0,
                rho: int = 1, m_list: Sequence[int] = (2, 3, 4, 5, 6),
                cfg: RenormConfig = RenormConfig(), fit_tol: float = 1e-8) -> RenormReport:
    """Run the pipeline for every m and fit the strong form when all succeed."""
    m_list = sorted(set(int(m) for m in m_list))
    if not m_list or m_list[0] < 2 or m_list[-1] > M_MAX:
        raise ValueError(f"m values must lie in [2, {M_MAX}]")
    is_family = isinstance(source, HFamily)
    if is_family:
        if s is None:
            raise ValueError("an H-family needs the parameter s")
        s = complex(s)
        if s == 0:
            raise SIsZero("s = 0 puts the series at the pole of its Dirichlet value")
    table = TermTable.from_source(source, s, t0, cfg.n_max(m_list[-1]), cfg.term_tol)
    results = []
    for m in m_list:
        exp, _ = run_m(table, m, rho, cfg)
        pred = predicted_expectation(source, s, t0, m, rho, cfg.b_config) if is_family else None
        cross = None
        if pred is not None and exp.value is not None:
            cross = abs(exp.value - pred) / max(1.0, abs(pred))
        results.append(MResult(m, exp.value, exp.verdict, exp.constancy_deviation,
                               exp.tail_window, cross, pred))
    report = RenormReport(source.name, s, float(t0), rho, tuple(results))
    if report.weak:
        report = RenormReport(report.family, s, float(t0), rho, report.results,
                              strong_fit(report.expectations(), fit_tol))
    return report


# --------------------------------------------------------------------------
# strong fit E(m) = S (1 - m^c)


_GRID = np.arange(-6.0, 6.0 + 1e-9, 0.5)
DEGENERATE_TOL = 1e-9


def _mpow(m, c):
    return np.exp(c * np.log(m))


def _newton_roots(e1: complex, e2: complex, m1: int, m2: int, iters: int = 80) -> np.ndarray:
    # g(c) = e1 (1 - m2^c) - e2 (1 - m1^c), from every grid seed at once
    c = (_GRID[:, None] + 1j * _GRID[None, :]).ravel()
    l1, l2 = math.log(m1), math.log(m2)
    with np.errstate(all="ignore"):
        for _ in range(iters):
            p1, p2 = np.exp(c * l1), np.exp(c * l2)
            g = e1 * (1 - p2) - e2 * (1 - p1)
            dg = -e1 * l2 * p2 + e2 * l1 * p1
            step = g / dg
            step = np.where(np.isfinite(step), step, 0)
            # damp wild steps so seeds stay near the grid region
            big = np.abs(step) > 2.0
            step = np.where(big, 2.0 * step / np.abs(np.where(big, step, 1)), step)
            c = c - step
        p1, p2 = np.exp(c * l1), np.exp(c * l2)
        g = e1 * (1 - p2) - e2 * (1 - p1)
        ok = np.isfinite(c) & (np.abs(g) <= 1e-9 * (abs(e1) + abs(e2)) * (1 + np.abs(p1) + np.abs(p2)))
    return c[ok]


def _refine(ms: np.ndarray, es: np.ndarray, S: complex, c: complex, iters: int = 30):
    # complex Gauss-Newton on r_m = S (1 - m^c) - E_m
    logm = np.log(ms)
    for _ in range(iters):
        if abs(c.real) > 60 or not (np.isfinite(S) and np.isfinite(c)):
            break
        p = np.exp(c * logm)
        r = S * (1 - p) - es
        J = np.column_stack([1 - p, -S * logm * p])
        try:
            delta, *_ = np.linalg.lstsq(J, -r, rcond=None)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(delta)):
            break
        S, c = S + delta[0], c + delta[1]
        if abs(delta[1]) < 1e-15 * max(1.0, abs(c)) and abs(delta[0]) < 1e-15 * max(1.0, abs(S)):
            break
    return complex(S), complex(c)


def _dedupe(roots: np.ndarray, tol: float = 1e-7) -> list[complex]:
    out: list[complex] = []
    for r in sorted(roots, key=lambda z: (abs(z), z.real, z.imag)):
        if all(abs(r - q) > tol * max(1.0, abs(q)) for q in out):
            out.append(complex(r))
    return out


def strong_fit(E: Mapping[int, complex], tol: float = 1e-8) -> StrongFit:
    """Fit E(m) = S (1 - m^c); Strong when every m fits within tol·(1+|S|)."""
    pts = sorted((int(m), complex(v)) for m, v in E.items() if v is not None and np.isfinite(v))
    pts = [(m, v) for m, v in pts if m >= 2]
    used = tuple(m for m, _ in pts)
    if len(pts) < 3:
        return StrongFit(None, None, {}, FitVerdict.WEAK_ONLY, used)
    ms = np.array([m for m, _ in pts], dtype=float)
    es = np.array([v for _, v in pts])
    if np.all(np.abs(es) < DEGENERATE_TOL):
        return StrongFit(0j, None, {m: abs(v) for m, v in pts}, FitVerdict.DEGENERATE, used)

    # anchor on the two largest |E| to keep the root equation well scaled
    order = np.argsort(-np.abs(es))
    i1, i2 = sorted(order[:2])
    roots = _newton_roots(es[i1], es[i2], int(ms[i1]), int(ms[i2]))
    roots = [r for r in _dedupe(roots) if abs(r) > 1e-6]
    candidates = []
    for c in roots:
        denom = 1 - _mpow(ms[i1], c)
        if abs(denom) < 1e-300:
            continue
        S0 = es[i1] / denom
        with np.errstate(all="ignore"):
            S, c = _refine(ms, es, S0, c)
        if not (np.isfinite(S) and np.isfinite(c)) or abs(c) < 1e-6 or abs(c.real) > 60:
            continue
        res = np.abs(es - S * (1 - _mpow(ms, c))) / (1 + abs(S))
        candidates.append((float(res.max()), S, c, res))
    if not candidates:
        return StrongFit(None, None, {}, FitVerdict.WEAK_ONLY, used)
    fitting = [cd for cd in candidates if cd[0] < tol]
    tie = False
    if fitting:
        fitting.sort(key=lambda cd: abs(cd[2]))
        distinct = _dedupe(np.array([cd[2] for cd in fitting]))
        if len(distinct) > 1:
            tie = True
            log.info("strong fit: %d roots fit, keeping the smallest |c|", len(distinct))
        best = fitting[0]
        verdict = FitVerdict.STRONG
    else:
        best = min(candidates, key=lambda cd: cd[0])
        verdict = FitVerdict.WEAK_ONLY
    _, S, c, res = best
    return StrongFit(S, c, {int(m): float(r) for m, r in zip(ms, res)}, verdict, used, tie)
