"""Catalogue of two-variable term generators f(s, t).

Coefficient families have the form

    f(s, t) = s^(ν falling) Σ_{i>=0} c_{i+1} (t+i)^(s-ν),

absolutely convergent for Re s below ``convergence_threshold``.  Families
with periodic coefficients (Hurwitz, eta, Dirichlet characters) also carry a
closed form through Hurwitz zeta and are evaluable for every s.  The series
path is the only route for Ehrhart, Jacobi and Gaussian-ideal coefficients.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import zetaref
from .diffcalc import SeriesEval, Status
from .errors import (
    CoefficientOverflow,
    DimensionTooLarge,
    OutsideConvergence,
    UnknownFamily,
)

DEFAULT_TOL = 1e-13
SAFETY_MARGIN = 0.1
MAX_SERIES_TERMS = 2_000_000
_GROWTH_PROBE = 32


def falling_factorial(s: complex, n: int) -> complex:
    out = 1 + 0j
    for k in range(n):
        out *= s - k
    return out


# --------------------------------------------------------------------------
# coefficient generators: each maps an integer array n >= 1 to c_n


def constant_coeff(n: np.ndarray) -> np.ndarray:
    return np.ones(np.shape(n), dtype=complex)


def alternating_coeff(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n)
    return np.where(n % 2 == 1, 1.0, -1.0).astype(complex)


def periodic_coeff(values: Sequence[complex]) -> Callable[[np.ndarray], np.ndarray]:
    table = np.asarray(values, dtype=complex)
    k = table.size

    def rule(n: np.ndarray) -> np.ndarray:
        return table[(np.asarray(n) - 1) % k]

    return rule


@dataclass(frozen=True)
class Character:
    """Dirichlet character given by its values χ(1), ..., χ(k)."""

    values: tuple[complex, ...]

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        k = len(vals)
        if k < 1:
            raise ValueError("character needs at least one value")
        for i, v in enumerate(vals, start=1):
            if math.gcd(i, k) > 1:
                if abs(v) > 1e-12:
                    raise ValueError(f"χ({i}) must vanish, gcd({i},{k}) > 1")
            elif abs(abs(v) - 1.0) > 1e-9:
                raise ValueError(f"|χ({i})| must be 1")
        for a in range(1, k + 1):
            for b in range(1, k + 1):
                if abs(self(a * b) - self(a) * self(b)) > 1e-9:
                    raise ValueError("character table is not multiplicative")

    @property
    def modulus(self) -> int:
        return len(self.values)

    @property
    def is_principal(self) -> bool:
        return all(abs(v - 1) < 1e-12 or abs(v) < 1e-12 for v in self.values)

    def __call__(self, n: int) -> complex:
        return self.values[(n - 1) % self.modulus]


CHI_MINUS_4 = Character((1, 0, -1, 0))


def character_coeff(chi: Character) -> Callable[[np.ndarray], np.ndarray]:
    return periodic_coeff(chi.values)


def ehrhart_coeff(shape: str, d: int) -> Callable[[np.ndarray], np.ndarray]:
    """Lattice points of n·P for the unit box or standard simplex in R^d."""
    _check_polytope(shape, d)
    if shape == "box":
        return lambda n: ((np.asarray(n) + 1.0) ** d).astype(complex)

    def simplex(n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        out = np.ones_like(n)
        for k in range(1, d + 1):
            out = out * (n + k) / k
        return np.rint(out).astype(complex)

    return simplex


def _check_polytope(shape: str, d: int) -> None:
    if shape not in ("box", "simplex"):
        raise ValueError(f"unknown polytope shape {shape!r}")
    if not 1 <= d <= 4:
        raise DimensionTooLarge(f"dimension {d} outside 1..4")


def count_lattice_points(shape: str, d: int, n: int) -> int:
    """Brute-force |nP ∩ Z^d| by scanning the bounding box."""
    _check_polytope(shape, d)
    if shape == "box":
        return sum(1 for _ in itertools.product(range(n + 1), repeat=d))
    return sum(1 for p in itertools.product(range(n + 1), repeat=d) if sum(p) <= n)


def jacobi_values(a: float, b: float, x: float, n_max: int) -> np.ndarray:
    """P_0^(a,b)(x), ..., P_{n_max}^(a,b)(x) by the three-term recurrence."""
    p = np.empty(n_max + 1)
    p[0] = 1.0
    if n_max == 0:
        return p
    p[1] = (a + 1) + (a + b + 2) * (x - 1) / 2
    for n in range(2, n_max + 1):
        ab = 2 * n + a + b
        lead = 2 * n * (n + a + b) * (ab - 2)
        mid = (ab - 1) * (ab * (ab - 2) * x + a * a - b * b)
        back = 2 * (n + a - 1) * (n + b - 1) * ab
        p[n] = (mid * p[n - 1] - back * p[n - 2]) / lead
    return p


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: a.size]


def _series_log1p(u: np.ndarray) -> np.ndarray:
    # log(1 + u) for a series with u[0] = 0, by integrating u'/(1+u)
    n = u.size
    inv = np.zeros(n)
    inv[0] = 1.0
    one_plus = u.copy()
    one_plus[0] += 1.0
    for k in range(1, n):
        inv[k] = -np.dot(one_plus[1 : k + 1], inv[k - 1 :: -1][:k])
    du = np.arange(1, n) * u[1:]
    q = _series_mul(np.append(du, 0.0), inv)[: n - 1]
    return np.concatenate([[0.0], q / np.arange(1, n)])


def _series_exp(v: np.ndarray) -> np.ndarray:
    # exp of a series with v[0] = 0: e' = v' e
    n = v.size
    e = np.zeros(n)
    e[0] = 1.0
    dv = np.arange(1, n) * v[1:]
    for k in range(1, n):
        e[k] = np.dot(dv[:k], e[k - 1 :: -1][:k]) / k
    return e


def _series_pow(p: np.ndarray, power: float) -> np.ndarray:
    # p[0] > 0; (p)^power = p0^power exp(power log(p/p0))
    p0 = p[0]
    return p0**power * _series_exp(power * _series_log1p(p / p0 - np.eye(1, p.size)[0]))


def jacobi_generating_series(a: float, b: float, x: float, order: int) -> np.ndarray:
    """Taylor coefficients of 2^(a+b) R^-1 (1 - z + R)^-a (1 + z + R)^-b, R = sqrt(1 - 2xz + z^2).

    An independent route to P_0..P_order that shares nothing with the
    three-term recurrence.
    """
    n = order + 1
    quad = np.zeros(n)
    quad[0] = 1.0
    if n > 1:
        quad[1] = -2.0 * x
    if n > 2:
        quad[2] = 1.0
    R = _series_pow(quad, 0.5)
    z = np.zeros(n)
    if n > 1:
        z[1] = 1.0
    out = 2.0 ** (a + b) * _series_pow(R, -1.0)
    out = _series_mul(out, _series_pow(R - z + np.eye(1, n)[0], -a))
    return _series_mul(out, _series_pow(R + z + np.eye(1, n)[0], -b))


def jacobi_coeff(a: float, b: float, x: float) -> Callable[[np.ndarray], np.ndarray]:
    """n -> P_n^(a,b)(x) for n >= 0."""
    if not -1 < x < 1:
        raise ValueError("Jacobi argument x must lie in (-1, 1)")
    if a <= -1 or b <= -1:
        raise ValueError("Jacobi parameters must exceed -1")

    def rule(n: np.ndarray) -> np.ndarray:
        n = np.asarray(n)
        if n.size and n.min() < 0:
            raise ValueError("polynomial degree must be non-negative")
        vals = jacobi_values(a, b, x, int(n.max()) if n.size else 0)
        return vals[n].astype(complex)

    return rule


def gauss_ideal_coeff(n: np.ndarray) -> np.ndarray:
    """Number of ideals of norm n in Z[i]: Σ_{d | n} χ_{-4}(d)."""
    n = np.asarray(n)
    if n.size == 0:
        return np.zeros(0, dtype=complex)
    if n.min() < 1:
        raise ValueError("ideal norms start at 1")
    top = int(n.max())
    counts = np.zeros(top + 1)
    for d in range(1, top + 1, 2):
        counts[d::d] += 1.0 if d % 4 == 1 else -1.0
    return counts[n].astype(complex)


# --------------------------------------------------------------------------
# families


@dataclass(frozen=True, eq=False)
class HFamily:
    """A term generator f(s, t).

    ``scale`` realises the companion m^(-s) f(s, m t) without copying the
    coefficient cache.
    """

    name: str
    nu: int
    coeff: Callable[[np.ndarray], np.ndarray] | None
    growth_exponent: float
    closed_form: Callable[[complex, float], SeriesEval] | None
    convergence_threshold: float
    scale: float = 1.0
    scale_invariant: bool = False
    params: dict = field(default_factory=dict)
    cache: dict = field(default_factory=dict, repr=False)

    def coefficients(self, n_max: int) -> np.ndarray:
        """c_1, ..., c_{n_max}, memoised and checked against the growth bound."""
        if self.coeff is None:
            raise ValueError(f"family {self.name} has no coefficient rule")
        have = self.cache.get("coeff")
        if have is not None and have.size >= n_max:
            return have[:n_max]
        size = max(n_max, 2 * (have.size if have is not None else 0), _GROWTH_PROBE)
        c = np.asarray(self.coeff(np.arange(1, size + 1)), dtype=complex)
        ratios = np.abs(c) / np.arange(1, size + 1) ** self.growth_exponent
        probe = max(float(ratios[:_GROWTH_PROBE].max()), 1.0)
        if np.any(ratios > 10.0 * probe):
            bad = int(np.argmax(ratios > 10.0 * probe)) + 1
            raise CoefficientOverflow(
                f"{self.name}: |c_{bad}| exceeds 10x the declared O(n^{self.growth_exponent}) bound"
            )
        self.cache["coeff"] = c
        self.cache["growth_constant"] = float(ratios.max())
        return c[:n_max]


def _power_closed(s: complex, t: float) -> SeriesEval:
    s = complex(s)
    if s.imag == 0.0:
        # real pow is exact for integer exponents, keeping polynomial tables exact
        return SeriesEval(complex(math.pow(t, s.real)), Status.TERMINATED, 1)
    # the phase Im(s)·log t is large; extended precision keeps the samples
    # within about one ulp, which the difference tables amplify by 2^k
    z = np.exp(np.clongdouble(s) * np.log(np.longdouble(t)))
    return SeriesEval(complex(z), Status.TERMINATED, 1)


def _periodic_closed(values: Sequence[complex], nu: int):
    vals = [complex(v) for v in values]
    k = len(vals)
    total = sum(vals)

    def closed(s: complex, t: float) -> SeriesEval:
        s = complex(s)
        if nu == 1 and s == 0:
            # s·ζ(1-s, ·) -> -1 at s = 0
            return SeriesEval(-total / k, Status.TERMINATED, 1)
        u = nu - s
        # arguments formed in long double: a rounded (t+r)/k would add
        # non-smooth noise that the difference tables amplify
        tl = np.longdouble(t)
        shifts = [(tl + r) / k for r in range(k)]
        comb = zetaref.hurwitz_combination(u, vals, shifts, s_minus_1=-s if nu == 1 else None)
        factor = falling_factorial(s, nu) * cmath.exp(-u * math.log(k))
        return SeriesEval(factor * comb.value, comb.status, comb.terms_used,
                          abs(factor) * comb.tail_estimate, abs(factor) * comb.rounding_floor)

    return closed


def power_family() -> HFamily:
    return HFamily("power", 0, None, 0.0, _power_closed, math.inf, scale_invariant=True)


def periodic_family(name: str, values: Sequence[complex], params: dict | None = None) -> HFamily:
    nu = 0 if abs(sum(complex(v) for v in values)) < 1e-12 else 1
    return HFamily(
        name, nu, periodic_coeff(values), 0.0, _periodic_closed(values, nu),
        nu - 1.0, params=dict(params or {}),
    )


def hurwitz_family() -> HFamily:
    """f(s, t) = s ζ(1-s, t)."""
    return periodic_family("hurwitz", (1,))


def eta_family() -> HFamily:
    """f(s, t) = Σ (-1)^i (t+i)^s."""
    return periodic_family("eta", (1, -1))


def character_family(chi: Character | Sequence[complex] = CHI_MINUS_4) -> HFamily:
    if not isinstance(chi, Character):
        chi = Character(tuple(chi))
    fam = periodic_family("character", chi.values, {"values": list(chi.values)})
    return fam


def ehrhart_family(shape: str = "box", d: int = 2) -> HFamily:
    rule = ehrhart_coeff(shape, d)
    nu = d + 1
    return HFamily("ehrhart", nu, rule, float(d), None, nu - d - 1.0,
                   params={"shape": shape, "d": d})


def jacobi_family(a: float = 0.0, b: float = 0.0, x: float = 0.5) -> HFamily:
    poly = jacobi_coeff(a, b, x)
    # c(z) = Σ_{n>=0} P_n z^n, so c_{i+1} = P_i
    return HFamily("jacobi", 0, lambda n: poly(np.asarray(n) - 1), 0.0, None, -1.0,
                   params={"a": a, "b": b, "x": x})


def gauss_ideal_family() -> HFamily:
    return HFamily("gauss_ideal", 1, gauss_ideal_coeff, 0.5, None, -0.5)


@dataclass(frozen=True)
class TermSequence:
    """A raw term rule a_n outside the H-class, fed straight to the engine."""

    name: str
    rule: Callable[[np.ndarray], np.ndarray]
    description: str = ""

    def terms(self, n_max: int) -> np.ndarray:
        return np.asarray(self.rule(np.arange(n_max + 1)), dtype=complex)


def _grandi(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n)
    return np.where(n == 0, 0.0, np.where(n % 2 == 1, 1.0, -1.0)).astype(complex)


GRANDI = TermSequence("grandi", _grandi, "a_0 = 0, a_n = (-1)^(n+1)")

FAMILY_BUILDERS: dict[str, Callable[..., HFamily]] = {
    "power": power_family,
    "hurwitz": hurwitz_family,
    "eta": eta_family,
    "character": character_family,
    "ehrhart": ehrhart_family,
    "jacobi": jacobi_family,
    "gauss_ideal": gauss_ideal_family,
}

SEQUENCES: dict[str, TermSequence] = {"grandi": GRANDI}


def build_family(name: str, **params) -> HFamily | TermSequence:
    if name in SEQUENCES:
        if params:
            raise ValueError(f"sequence {name} takes no parameters")
        return SEQUENCES[name]
    try:
        builder = FAMILY_BUILDERS[name]
    except KeyError:
        raise UnknownFamily(name) from None
    return builder(**params)


def describe_families() -> list[dict]:
    rows = []
    for name, builder in FAMILY_BUILDERS.items():
        fam = builder()
        rows.append({
            "name": name,
            "nu": fam.nu,
            "sigma_star": fam.convergence_threshold,
            "growth_exponent": fam.growth_exponent,
            "closed_form": fam.closed_form is not None,
            "h_class": True,
        })
    for name, seq in SEQUENCES.items():
        rows.append({"name": name, "nu": None, "sigma_star": None, "growth_exponent": None,
                     "closed_form": False, "h_class": False, "description": seq.description})
    return rows


# --------------------------------------------------------------------------
# evaluation


def _series_value(fam: HFamily, s: complex, t: float, tol: float,
                  n_terms: int | None = None) -> SeriesEval:
    """Truncated coefficient series; ``n_terms`` overrides the tail-bound count."""
    if not s.real < fam.convergence_threshold - SAFETY_MARGIN:
        raise OutsideConvergence(
            f"{fam.name}: Re s = {s.real:g} not below {fam.convergence_threshold - SAFETY_MARGIN:g}"
        )
    g = fam.growth_exponent
    p = s.real - fam.nu + g
    pref = abs(falling_factorial(s, fam.nu))
    fam.coefficients(_GROWTH_PROBE)
    const = fam.cache["growth_constant"]
    # C·|pref|·(t+I)^(p+1)/(-p-1) < tol
    if pref == 0.0:
        return SeriesEval(0j, Status.TERMINATED, 0)
    target = tol * (-p - 1) / (const * pref)
    needed = max(int(math.ceil(target ** (1.0 / (p + 1)) - t)) + 1, 1)
    n_terms = needed if n_terms is None else max(n_terms, 1)
    status = Status.CONVERGED
    if n_terms > MAX_SERIES_TERMS:
        n_terms = MAX_SERIES_TERMS
        status = Status.STAGNATED
    c = fam.coefficients(n_terms)
    const = fam.cache["growth_constant"]
    base = t + np.arange(n_terms)
    powers = np.exp((s - fam.nu) * np.log(base))
    total = complex(np.sum(c * powers))
    tail = const * pref * (t + n_terms) ** (p + 1) / (-p - 1)
    value = falling_factorial(s, fam.nu) * total
    floor = 2.2e-16 * pref * float(np.sum(np.abs(c) * np.abs(powers)))
    if status is Status.CONVERGED and tail > tol:
        status = Status.STAGNATED
    return SeriesEval(value, status, n_terms, tail, floor)


def eval_f(
    fam: HFamily,
    s: complex,
    t: float,
    tol: float = DEFAULT_TOL,
    *,
    force_series: bool = False,
) -> SeriesEval:
    """Evaluate f(s, t); closed form when available, otherwise the series."""
    if not t > 0:
        raise ValueError("t must be positive")
    s = complex(s)
    if fam.scale != 1.0:
        factor = cmath.exp(-s * math.log(fam.scale))
        inner = _raw_eval(fam, s, fam.scale * t, tol / abs(factor), force_series)
        return SeriesEval(factor * inner.value, inner.status, inner.terms_used,
                          abs(factor) * inner.tail_estimate, abs(factor) * inner.rounding_floor)
    return _raw_eval(fam, s, t, tol, force_series)


def _raw_eval(fam: HFamily, s: complex, t: float, tol: float, force_series: bool) -> SeriesEval:
    if fam.closed_form is not None and not (force_series and fam.coeff is not None):
        return fam.closed_form(s, t)
    return _series_value(fam, s, t, tol)


def eval_values(fam: HFamily, s: complex, ts, tol: float = DEFAULT_TOL,
                with_noise: bool = False):
    """Vector of f(s, t) over ``ts``; raises if any evaluation is unusable.

    With ``with_noise`` also returns the largest per-sample error bound
    (truncation tail plus rounding floor).
    """
    out = np.empty(len(ts), dtype=complex)
    noise = 0.0
    for k, t in enumerate(ts):
        r = eval_f(fam, s, float(t), tol)
        if r.status is Status.DIVERGED:
            raise ArithmeticError(f"{fam.name}: evaluation diverged at t={t}")
        out[k] = r.value
        noise = max(noise, r.rounding_floor + (r.tail_estimate if r.status is not Status.TERMINATED else 0.0))
    return (out, noise) if with_noise else out


def term_a(fam: HFamily, s: complex, t0: float, n: int, tol: float = DEFAULT_TOL) -> complex:
    """a_0 = 0, a_n = f(s-1, t0+n-1)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 0j
    return eval_f(fam, complex(s) - 1, t0 + n - 1, tol).value


def family_terms(fam: HFamily, s: complex, t0: float, n_max: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """a_0, ..., a_{n_max} for the sequence built from ``fam``.

    Series-evaluated families truncate every term at the same count, so the
    truncation error is a smooth function of n and does not pollute high
    differences of the partial sums.
    """
    out = np.zeros(n_max + 1, dtype=complex)
    if n_max < 1:
        return out
    s1 = complex(s) - 1
    ts = t0 + np.arange(n_max)
    if fam.closed_form is not None or fam.scale != 1.0:
        out[1:] = eval_values(fam, s1, ts, tol)
        return out
    out[1:] = term_function(fam, s, t0, tol)(np.arange(1, n_max + 1, dtype=float))
    return out


def term_function(fam: HFamily, s: complex, t0: float, tol: float = DEFAULT_TOL):
    """x -> a(x) = f(s-1, t0+x-1) for real x >= 1, continuing the terms off the integers.

    Series-evaluated families use the truncation count that family_terms
    uses, so the continued terms agree with the tabulated ones.
    """
    s1 = complex(s) - 1
    if fam.closed_form is not None or fam.scale != 1.0:
        return lambda xs: eval_values(fam, s1, t0 + np.asarray(xs, dtype=float) - 1, tol)
    count = _series_value(fam, s1, float(t0), tol).terms_used

    def fn(xs):
        xs = np.asarray(xs, dtype=float)
        out = np.empty(xs.size, dtype=complex)
        for k, x in enumerate(xs):
            r = _series_value(fam, s1, float(t0 + x - 1), tol, n_terms=count)
            if r.status is Status.DIVERGED:
                raise ArithmeticError(f"{fam.name}: evaluation diverged at t={t0 + x - 1}")
            out[k] = r.value
        return out

    return fn


def scaled_family(fam: HFamily, m: float) -> HFamily:
    """The companion f^m(s, t) = m^(-s) f(s, m t)."""
    if m <= 0:
        raise ValueError("scale must be positive")
    if m == 1 or fam.scale_invariant:
        return fam
    return replace(fam, name=f"{fam.name}^{m:g}", scale=fam.scale * m)


def check_h_derivative(fam: HFamily, s: complex, t: float, step: float = 1e-4,
                       tol: float = DEFAULT_TOL) -> float:
    """Relative mismatch between ∂_t f(s, t) (central difference) and s f(s-1, t)."""
    s = complex(s)
    if step <= 0 or step >= t:
        raise ValueError("step must lie in (0, t)")
    fwd = eval_f(fam, s, t + step, tol).value
    back = eval_f(fam, s, t - step, tol).value
    deriv = (fwd - back) / (2 * step)
    rhs = s * eval_f(fam, s - 1, t, tol).value
    return abs(deriv - rhs) / (1 + abs(rhs))
