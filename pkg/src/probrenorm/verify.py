"""Built-in invariant suites behind ``probrenorm verify``.

Each suite returns a list of :class:`Check` rows; a suite passes when every
row is within its bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bernoulli, hfun, renorm, zetaref


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    bound: float

    @property
    def ok(self) -> bool:
        return math.isfinite(self.value) and self.value < self.bound

    def as_row(self) -> dict:
        return {"check": self.name, "value": self.value, "bound": self.bound, "ok": self.ok}


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(1.0, abs(b))


# --------------------------------------------------------------------------
# oracle

ORACLE_S = (-3, -1, 0.5, 2, 2 + 3j)
ORACLE_T = (0.25, 1, 2, 7.5)


def oracle_suite() -> list[Check]:
    out = []
    for s in ORACLE_S:
        for t in ORACLE_T:
            lhs = zetaref.hurwitz_zeta(s, t).value - zetaref.hurwitz_zeta(s, t + 1).value
            out.append(Check(f"recurrence s={s} t={t}", _rel(lhs, complex(t) ** (-complex(s))), 1e-10))
            for m in (2, 3):
                parts = sum(zetaref.hurwitz_zeta(s, (t + i) / m).value for i in range(m))
                rhs = complex(m) ** complex(s) * zetaref.hurwitz_zeta(s, t).value
                out.append(Check(f"distribution m={m} s={s} t={t}", _rel(parts, rhs), 1e-9))
    for n in range(4):
        for t in (0.5, 1, 2):
            ref = -zetaref.bernoulli_polynomial(n + 1, t) / (n + 1)
            out.append(Check(f"zeta(-{n},{t}) vs Bernoulli polynomial",
                             _rel(zetaref.hurwitz_zeta(-n, t).value, ref), 1e-10))
    out.append(Check("zeta(2) Basel", abs(zetaref.riemann_zeta(2).value - math.pi**2 / 6), 1e-10))
    out.append(Check("zeta(-1)", abs(zetaref.riemann_zeta(-1).value + 1 / 12), 1e-10))
    out.append(Check("eta(2)", abs(zetaref.dirichlet_eta(2).value - math.pi**2 / 12), 1e-10))
    out.append(Check("L(2, chi_-4) Catalan",
                     abs(zetaref.dirichlet_L(2, (1, 0, -1, 0)).value - 0.915965594177219015), 1e-10))
    return out


# --------------------------------------------------------------------------
# operators

B_ORACLE_S = (-2, -0.5, 0.5, 2, 3, 2 + 3j)
B_ORACLE_T = (0.5, 1, 2, 10)
CLOSED_S = (-2, -0.5, 0.5, 2, 3, 2 + 3j)
SERIES_S = (-4, -5.5, -4 + 1j)
CATALOGUE_T = (1.0, 1.5)
CLOSED_BOUND = 1e-8
SERIES_BOUND = 1e-6


def catalogue() -> list[tuple[hfun.HFamily, tuple]]:
    """Every catalogue family with the s grid it is exercised on."""
    fams = [
        (hfun.power_family(), CLOSED_S),
        (hfun.hurwitz_family(), CLOSED_S),
        (hfun.eta_family(), CLOSED_S),
        (hfun.character_family(), CLOSED_S),
        (hfun.ehrhart_family("box", 2), SERIES_S),
        (hfun.ehrhart_family("simplex", 3), SERIES_S),
        (hfun.jacobi_family(0, 0, 0.5), SERIES_S),
        (hfun.gauss_ideal_family(), SERIES_S),
    ]
    return fams


def power_b_oracle() -> list[Check]:
    fam = hfun.power_family()
    out = []
    for s in B_ORACLE_S:
        for t in B_ORACLE_T:
            b = bernoulli.bernoulli_apply(fam, s, t).value
            ref = -complex(s) * zetaref.hurwitz_zeta(1 - complex(s), t).value
            out.append(Check(f"B t^s + s zeta(1-s,t) s={s} t={t}", abs(b - ref), 1e-8))
            n = bernoulli.DEFAULT_B.base_for(t)
            alt = bernoulli.bernoulli_apply(fam, s, t, bernoulli.DEFAULT_B.with_base(n + 7)).value
            out.append(Check(f"pull-back N vs N+7 s={s} t={t}", abs(b - alt), 1e-9))
    return out


def operators_suite() -> list[Check]:
    out = power_b_oracle()
    power = hfun.power_family()
    for sigma in (1.5, 2, 3):
        for t in (1, 2):
            d = bernoulli.dirichlet_value(power, sigma, t).value
            direct = bernoulli.series_sum_A(power, 1 - sigma, t).value
            out.append(Check(f"D(sigma={sigma}, t={t}) vs direct sum", _rel(d, direct), 1e-9))
    for fam, grid in catalogue():
        bound = CLOSED_BOUND if fam.closed_form is not None else SERIES_BOUND
        for s in grid:
            for t in CATALOGUE_T:
                res = bernoulli.identity_residuals(fam, s, t)
                for key, val in res.items():
                    if val is None:
                        continue
                    out.append(Check(f"{fam.name}{_tag(fam)} {key} s={s} t={t}", val, bound))
    return out


def _tag(fam: hfun.HFamily) -> str:
    if not fam.params:
        return ""
    inner = ",".join(f"{k}={v}" for k, v in sorted(fam.params.items()) if k != "values")
    return f"[{inner}]" if inner else ""


# --------------------------------------------------------------------------
# families

FAMILY_RUNS = (
    ("hurwitz", {}, 2.5),
    ("eta", {}, 1.5),
    ("character", {}, 0.5),
    ("ehrhart", {"shape": "box", "d": 2}, -4.0),
    ("jacobi", {"a": 0.0, "b": 0.0, "x": 0.5}, -4.0),
    ("gauss_ideal", {}, -4.0),
)


def family_weak_runs(cfg: renorm.RenormConfig = renorm.RenormConfig()) -> list[tuple[str, float, renorm.RenormReport]]:
    out = []
    for name, params, s in FAMILY_RUNS:
        fam = hfun.build_family(name, **params)
        out.append((name, s, renorm.weak_report(fam, s, 1.0, 1, cfg=cfg)))
    return out


def families_suite() -> list[Check]:
    out = []
    for shape in ("box", "simplex"):
        for d in (1, 2, 3):
            rule = hfun.ehrhart_coeff(shape, d)
            ns = np.arange(21)
            closed = rule(ns)
            brute = np.array([hfun.count_lattice_points(shape, d, int(n)) for n in ns])
            out.append(Check(f"ehrhart {shape} d={d} vs lattice count n<=20",
                             float(np.max(np.abs(closed - brute))), 0.5))
    g = hfun.gauss_ideal_coeff(np.array([3, 5]))
    out.append(Check("gauss_ideal c_3 = 0", abs(g[0]), 0.5))
    out.append(Check("gauss_ideal c_5 = 2", abs(g[1] - 2), 0.5))
    big = hfun.gauss_ideal_coeff(np.arange(1, 10_001))
    out.append(Check("gauss_ideal mean to pi/4 at N=1e4", abs(big.sum() / 1e4 / (math.pi / 4) - 1), 0.1))
    for a, b, x in ((0, 0, 0.5), (1.5, -0.3, -0.2), (2, 3, 0.7)):
        rec = hfun.jacobi_values(a, b, x, 8)
        gen = hfun.jacobi_generating_series(a, b, x, 8)
        out.append(Check(f"jacobi ({a},{b},{x}) recurrence vs generating function",
                         float(np.max(np.abs(rec - gen))), 1e-9))
    chi = hfun.CHI_MINUS_4
    fam = hfun.character_family(chi)
    # with ν = 0 the packaged f(-σ, 1) = Σ χ(i+1) (1+i)^-σ is L(σ, χ) itself
    for sigma, series in ((2.0, False), (3.0, False), (5.0, True), (6.0, True)):
        packaged = hfun.eval_f(fam, -sigma, 1.0, force_series=series).value
        ref = zetaref.dirichlet_L(sigma, chi.values).value
        route = "series" if series else "closed form"
        out.append(Check(f"character packaging f(-{sigma},1) by {route} vs L(sigma, chi)",
                         _rel(packaged, ref), 1e-8))
    for fam, grid in catalogue():
        s = grid[0]
        t = 2.0
        out.append(Check(f"{fam.name}{_tag(fam)} H-derivative s={s}",
                         hfun.check_h_derivative(fam, s, t), 1e-6))
    for name, s, rep in family_weak_runs():
        out.append(Check(f"{name} weak verdict s={s}", 0.0 if rep.weak else math.inf, 1.0))
        closed = hfun.build_family(name).closed_form is not None
        for r in rep.results:
            val = math.inf if r.cross_residual is None else r.cross_residual
            out.append(Check(f"{name} s={s} m={r.m} closed-form cross-residual", val, 1e-6))
            out.append(Check(f"{name} s={s} m={r.m} X constancy on [m, n_eval]", r.constancy_deviation,
                             CLOSED_CONSTANCY if closed else SERIES_CONSTANCY))
    return out


# --------------------------------------------------------------------------
# renorm

CLOSED_CONSTANCY = 1e-9
SERIES_CONSTANCY = 1e-6
ZETA_S = (3, 0.5, -1, 2 + 1j)
PLANTED_SEED = 20240611
PLANTED_COUNT = 20
PLANTED_NOISE = 1e-10


def planted_cases(seed: int = PLANTED_SEED, count: int = PLANTED_COUNT):
    """Random (S, c) with |Re c| <= 4, |Im c| <= 3, 0.5 <= |S| <= 5, |c| >= 0.25."""
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        c = complex(rng.uniform(-4, 4), rng.uniform(-3, 3))
        if abs(c) < 0.25:
            continue
        S = rng.uniform(0.5, 5) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        ms = np.arange(2, 7)
        noise = PLANTED_NOISE * (rng.standard_normal(ms.size) + 1j * rng.standard_normal(ms.size)) / math.sqrt(2)
        E = {int(m): complex(S * (1 - m**c) + e) for m, e in zip(ms, noise)}
        cases.append((complex(S), c, E))
    return cases


def planted_recovery() -> list[Check]:
    out = []
    for k, (S, c, E) in enumerate(planted_cases()):
        fit = renorm.strong_fit(E)
        if fit.S is None or fit.c is None:
            err = math.inf
        else:
            err = max(abs(fit.S - S) / abs(S), abs(fit.c - c) / abs(c))
        out.append(Check(f"planted fit #{k} S={S:.3f} c={c:.3f}", err, 1e-6))
    zero = renorm.strong_fit({m: 0j for m in range(2, 7)})
    out.append(Check("all-zero input is Degenerate", 0.0 if zero.verdict == renorm.FitVerdict.DEGENERATE else math.inf, 1.0))
    return out


def convergent_consistency(cfg: renorm.RenormConfig = renorm.RenormConfig()) -> list[Check]:
    rep = renorm.weak_report(hfun.power_family(), -1, 1.0, 0, range(2, 7), cfg)
    out = []
    for r in rep.results:
        val = math.inf if r.cross_residual is None else r.cross_residual
        out.append(Check(f"rho=0 s=-1 m={r.m}: E vs L - L_m", val, 1e-8))
    return out


def renorm_suite() -> list[Check]:
    out = planted_recovery() + convergent_consistency()
    power = hfun.power_family()
    rep = renorm.weak_report(power, 2, 1.0, 1)
    for r in rep.results:
        val = math.inf if r.cross_residual is None else r.cross_residual
        out.append(Check(f"rho=1 s=2 m={r.m}: E vs closed form", val, 1e-6))
        out.append(Check(f"rho=1 s=2 m={r.m}: X constancy", r.constancy_deviation, CLOSED_CONSTANCY))
    for s in ZETA_S:
        ref = zetaref.hurwitz_zeta(1 - complex(s), 1.0).value
        for r in renorm.weak_report(power, s, 1.0, 1).results:
            err = math.inf if r.expectation is None else abs(r.expectation - (1 - complex(r.m) ** complex(s)) * ref)
            out.append(Check(f"rho=1 s={s} m={r.m}: E vs (1-m^s) zeta(1-s)", err, 1e-6))
            out.append(Check(f"rho=1 s={s} m={r.m}: X constancy on [m, n_eval]", r.constancy_deviation,
                             CLOSED_CONSTANCY))
    values = []
    for W in (32, 64, 128):
        cfg = renorm.RenormConfig(window=W)
        values.append(renorm.weak_report(power, 2, 1.0, 1, (2,), cfg).results[0].expectation)
    spread = max(abs(v - values[0]) for v in values) if all(v is not None for v in values) else math.inf
    out.append(Check("constant tail independent of W in {32,64,128}", spread, 1e-300))
    grandi = renorm.weak_report(hfun.GRANDI, None, 1.0, 0, (2, 3, 4, 5))
    for r in grandi.results:
        want = renorm.Verdict.DRIFT if r.m % 2 == 0 else renorm.Verdict.EXTENSION_DIVERGENCE
        out.append(Check(f"grandi m={r.m} verdict {want}", 0.0 if r.verdict == want else math.inf, 1.0))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "operators": operators_suite,
    "oracle": oracle_suite,
    "families": families_suite,
    "renorm": renorm_suite,
}
