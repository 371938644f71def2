"""Reference oracle: Bernoulli numbers, Hurwitz/Riemann zeta, eta and L-values.

Hurwitz zeta is evaluated by Euler-Maclaurin after shifting the argument by
``N`` terms.  Everything the renormalization engine reports is compared
against this module, so it shares no code with the difference engine.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .diffcalc import SeriesEval, Status
from .errors import NoConvergence, OutOfTable, PoleAtOne

BERNOULLI_MAX = 30
N_CAP = 512


def _bernoulli_table(k_max: int) -> tuple[Fraction, ...]:
    # Σ_{j=0}^{k} C(k+1, j) B_j = 0, which yields B_1 = -1/2
    table = [Fraction(1)]
    for k in range(1, k_max + 1):
        acc = sum(math.comb(k + 1, j) * table[j] for j in range(k))
        table.append(-acc / (k + 1))
    return tuple(table)


_BERNOULLI_EXACT = _bernoulli_table(BERNOULLI_MAX)
_BERNOULLI = tuple(float(b) for b in _BERNOULLI_EXACT)


def bernoulli_number(k: int) -> float:
    """B_k with the B_1 = -1/2 convention, for 0 <= k <= 30."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > BERNOULLI_MAX:
        raise OutOfTable(f"B_{k} is beyond the table (max {BERNOULLI_MAX})")
    return _BERNOULLI[k]


def bernoulli_fraction(k: int) -> Fraction:
    if k > BERNOULLI_MAX:
        raise OutOfTable(f"B_{k} is beyond the table (max {BERNOULLI_MAX})")
    return _BERNOULLI_EXACT[k]


def bernoulli_polynomial(n: int, t: float) -> float:
    """B_n(t) = Σ_k C(n, k) B_k t^(n-k)."""
    return math.fsum(math.comb(n, k) * _BERNOULLI[k] * t ** (n - k) for k in range(n + 1))


@dataclass(frozen=True)
class EulerMaclaurinConfig:
    """``shift_terms`` is the minimum abscissa a + N where the tail is closed."""

    shift_terms: int = 15
    correction_terms: int = 12
    tol: float = 1e-12

    def __post_init__(self):
        if self.shift_terms < 1:
            raise ValueError("shift_terms must be >= 1")
        if not 1 <= self.correction_terms <= BERNOULLI_MAX // 2:
            raise ValueError("correction_terms must lie in [1, 15]")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


DEFAULT_EM = EulerMaclaurinConfig()


def _ld(q: Fraction) -> np.longdouble:
    # via strings so numerators beyond 2^53 keep extended precision
    return np.longdouble(str(q.numerator)) / np.longdouble(str(q.denominator))


_EM_WEIGHTS_LD = tuple(
    _ld(_BERNOULLI_EXACT[2 * k] / math.factorial(2 * k)) for k in range(1, BERNOULLI_MAX // 2 + 1)
)
# rounding unit of the working precision (long double where the platform has it)
WORK_EPS = float(np.finfo(np.longdouble).eps)


def _em_pieces(s, a, n_shift: int, k_corr: int):
    """Head sum, boundary half-term and corrections at x = a+N, in long double.

    Returns (body, last correction, log x, magnitude of the largest piece).
    """
    sl = np.clongdouble(s)
    x = np.longdouble(a) + n_shift
    if n_shift:
        head = np.sum(np.exp(-sl * np.log(np.longdouble(a) + np.arange(n_shift, dtype=np.longdouble))))
    else:
        head = np.clongdouble(0)
    logx = np.log(x)
    xs = np.exp(-sl * logx)
    corr = np.clongdouble(0)
    last = np.clongdouble(0)
    rising = sl  # (s)_{2k-1}
    xpow = xs / x  # x^{-s-1}
    for k in range(1, k_corr + 1):
        last = _EM_WEIGHTS_LD[k - 1] * rising * xpow
        corr += last
        rising *= (sl + 2 * k - 1) * (sl + 2 * k)
        xpow /= x * x
    body = head + xs / 2 + corr
    return body, complex(last), logx, max(abs(complex(head)), abs(complex(xs)))


def hurwitz_combination(
    s: complex,
    weights: Sequence[complex],
    shifts: Sequence[float],
    cfg: EulerMaclaurinConfig = DEFAULT_EM,
    s_minus_1: complex | None = None,
) -> SeriesEval:
    """Σ_r w_r ζ(s, a_r) by Euler-Maclaurin.

    At s = 1 the combination is finite when Σ w_r = 0 (the poles cancel);
    the integral terms then reduce to -Σ w_r log(a_r + N).  The sum is
    accumulated in long double and rounded once.  Callers near the pole can
    pass ``s_minus_1`` exactly; forming it from a rounded s loses digits in
    the integral term x^(1-s)/(s-1).
    """
    s = complex(s)
    # s - 1 is exact in long double for a double s
    sm1 = np.clongdouble(s) - 1 if s_minus_1 is None else np.clongdouble(s_minus_1)
    if len(weights) != len(shifts):
        raise ValueError("weights and shifts differ in length")
    if any(a <= 0 for a in shifts):
        raise ValueError("Hurwitz shifts must be positive")
    wsum = sum(complex(w) for w in weights)
    at_pole = sm1 == 0
    if at_pole and abs(wsum) > 1e-14 * max(1.0, sum(abs(complex(w)) for w in weights)):
        raise PoleAtOne("zeta combination has a pole at s = 1")

    sl = np.clongdouble(s)
    # Each argument is shifted up to a + n >= base rather than by a fixed
    # count: for large a this avoids big head and integral pieces that
    # cancel against each other when Re s < 0.
    base = cfg.shift_terms
    while True:
        total = np.clongdouble(0)
        scale = 0.0
        worst = 0.0
        n_shift = 0
        for w, a in zip(weights, shifts):
            w = complex(w)
            if w == 0:
                continue
            n_a = max(math.ceil(base - a), 0)
            n_shift = max(n_shift, n_a)
            body, last, logx, piece = _em_pieces(s, a, n_a, cfg.correction_terms)
            if at_pole:
                integral = -logx
            else:
                integral = np.exp(-sm1 * logx) / sm1
            total += np.clongdouble(w) * (body + integral)
            scale = max(scale, abs(w) * piece, abs(w * complex(integral)))
            worst = max(worst, abs(w * last))
        value = complex(total)
        if worst <= cfg.tol * max(abs(value), 1e-300) or worst == 0.0:
            floor = 4 * WORK_EPS * scale + 2.2e-16 * abs(value)
            return SeriesEval(value, Status.CONVERGED, n_shift, worst, floor)
        if base >= N_CAP:
            raise NoConvergence(
                f"Euler-Maclaurin did not reach tol at s={s} (|Im s|={abs(s.imag):g}) with N={base}"
            )
        base = min(2 * base, N_CAP)


def hurwitz_zeta(s: complex, t: float, cfg: EulerMaclaurinConfig = DEFAULT_EM) -> SeriesEval:
    """ζ(s, t) = Σ_{n>=0} (t+n)^(-s), continued to s != 1."""
    if complex(s) == 1:
        raise PoleAtOne("Hurwitz zeta has a pole at s = 1")
    if t <= 0:
        raise ValueError("t must be positive")
    return hurwitz_combination(s, (1.0,), (float(t),), cfg)


def riemann_zeta(s: complex, cfg: EulerMaclaurinConfig = DEFAULT_EM) -> SeriesEval:
    return hurwitz_zeta(s, 1.0, cfg)


def dirichlet_eta(s: complex, cfg: EulerMaclaurinConfig = DEFAULT_EM) -> SeriesEval:
    """(1 - 2^(1-s)) ζ(s); s = 1 is rejected with the zeta pole."""
    z = riemann_zeta(s, cfg)
    factor = 1 - cmath.exp((1 - complex(s)) * math.log(2.0))
    return SeriesEval(factor * z.value, z.status, z.terms_used, abs(factor) * z.tail_estimate,
                      abs(factor) * z.rounding_floor)


def dirichlet_L(s: complex, chi: Sequence[complex], cfg: EulerMaclaurinConfig = DEFAULT_EM) -> SeriesEval:
    """L(s, χ) = k^(-s) Σ_{i=1}^{k} χ(i) ζ(s, i/k) for a character table χ(1..k)."""
    k = len(chi)
    if k < 1:
        raise ValueError("character table is empty")
    inner = hurwitz_combination(s, list(chi), [np.longdouble(i) / k for i in range(1, k + 1)], cfg)
    factor = cmath.exp(-complex(s) * math.log(k))
    return SeriesEval(factor * inner.value, inner.status, inner.terms_used,
                      abs(factor) * inner.tail_estimate, abs(factor) * inner.rounding_floor)
