"""Oracle-equivalence and closed-form validation suites.

Each suite compares an analytic or engine result against an independent
reference (dense diagonalization, exact integrals, closed forms) and
reports its worst deviation.  The suites back the `compass check`
subcommand and the acceptance tests; they accept an optional couplings
hook so a deliberately injected fault (e.g. a sign flip on the lower
branch field) can be shown to trip exactly the suites that guard it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ed_oracle import echo_ed
from .fermion_echo import FermionEchoContext, echo_pure, echo_series, echo_thermal, gaussian_rate
from .model import DerivedCouplings, EnvironmentParams, FieldConfig, derive_couplings
from .yield_engine import QuadratureConfig, le_n2, product_yield, yield_gaussian

CouplingsHook = Callable[[DerivedCouplings], DerivedCouplings]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_deviation: float
    detail: str


def _derive(B: float, theta: float, N: int, g0: float, J: float,
            hook: CouplingsHook | None) -> DerivedCouplings:
    c = derive_couplings(FieldConfig(B=B, theta=theta), EnvironmentParams(N=N, J=J, g0=g0))
    return hook(c) if hook else c


def suite_pure_oracle(
    ns: tuple[int, ...] = (2, 4, 6, 8, 10),
    lams: tuple[float, ...] = (0.5, 0.9, 1.0, 1.1),
    thetas: tuple[float, ...] = (0.0, math.pi / 4),
    n_times: int = 200,
    t_max: float = 20.0,
    tol: float = 1e-8,
    hook: CouplingsHook | None = None,
) -> SuiteResult:
    """Free-fermion vs dense echo for pure initial states."""
    times = np.linspace(0.0, t_max, n_times)
    worst = 0.0
    for N in ns:
        for lam in lams:
            for theta in thetas:
                c = _derive(lam / math.cos(theta), theta, N, 1.0, 1.0, hook)
                dev = float(np.max(np.abs(
                    echo_pure(N, 1.0, c, times) - echo_ed(N, 1.0, c, 0.0, times)[0]
                )))
                worst = max(worst, dev)
    return SuiteResult(
        name="pure_oracle",
        passed=worst < tol,
        max_deviation=worst,
        detail=f"N in {ns}, max dev {worst:.3e} (tol {tol:g})",
    )


def suite_eq11(
    lams: tuple[float, ...] = (0.5, 1.0, 1.5),
    g_cos: tuple[float, ...] = (0.05, 0.1),
    tol: float = 1e-10,
    hook: CouplingsHook | None = None,
) -> SuiteResult:
    """Two-spin closed form against the dense oracle, both boundary readings.

    The closed form is exact for the open chain with the bath prepared
    in the lower-branch ground state; the suite asserts that this
    reading matches to `tol` while the periodic reading does not match
    (so exactly one reading reproduces the formula).
    """
    times = np.linspace(0.0, 10.0, 401)
    worst_open = 0.0
    min_periodic = math.inf
    for lam in lams:
        for gc in g_cos:
            base = DerivedCouplings(
                lam=lam - gc, g=gc, lambda_plus=lam + gc, lambda_minus=lam - gc
            )
            c = hook(base) if hook else base
            reference = le_n2(lam, gc, 0.0, times)
            open_echo, _ = echo_ed(2, 1.0, c, 0.0, times, boundary="open")
            periodic_echo, _ = echo_ed(2, 1.0, c, 0.0, times, boundary="periodic")
            worst_open = max(worst_open, float(np.max(np.abs(open_echo - reference))))
            min_periodic = min(min_periodic, float(np.max(np.abs(periodic_echo - reference))))
    # Exactly one reading matches: open within tol, periodic clearly not.
    passed = worst_open < tol and min_periodic > 100.0 * tol
    return SuiteResult(
        name="eq11_closed_form",
        passed=passed,
        max_deviation=worst_open,
        detail=(
            f"open-boundary dev {worst_open:.3e} (tol {tol:g}); "
            f"periodic reading differs by >= {min_periodic:.3e}"
        ),
    )


def suite_thermal_oracle(
    ns: tuple[int, ...] = (6, 8, 10),
    temps: tuple[float, ...] = (0.2, 1.0),
    tol: float = 5e-2,
    trend_slack: float = 1e-10,
    hook: CouplingsHook | None = None,
    construction: str = "exact",
) -> SuiteResult:
    """Finite-temperature echo vs the dense canonical state.

    Checks the N = 8 deviation against `tol` for each temperature and
    that the deviation does not grow from the smallest to the largest
    chain (the slack absorbs roundoff when both are at machine zero).
    """
    times = np.linspace(0.0, 10.0, 201)
    devs: dict[tuple[int, float], float] = {}
    for N in ns:
        for T in temps:
            c = _derive(0.9, 0.0, N, 1.0, 1.0, hook)
            lf, _ = echo_thermal(N, 1.0, c, T, times, construction=construction)
            led, _ = echo_ed(N, 1.0, c, T, times)
            devs[(N, T)] = float(np.max(np.abs(lf - led)))
    worst_mid = max(devs[(ns[len(ns) // 2], T)] for T in temps)
    trend_ok = all(devs[(ns[-1], T)] <= devs[(ns[0], T)] + trend_slack for T in temps)
    passed = worst_mid < tol and trend_ok
    detail = ", ".join(f"N={N},T={T}: {devs[(N, T)]:.2e}" for N in ns for T in temps)
    return SuiteResult(
        name=f"thermal_oracle[{construction}]",
        passed=passed,
        max_deviation=max(devs.values()),
        detail=detail + f" (tol {tol:g} at N={ns[len(ns) // 2]}, trend N{ns[-1]}<=N{ns[0]})",
    )


def suite_quadrature(tol: float = 1e-6) -> SuiteResult:
    """Yield quadrature against exactly integrable echoes."""
    k_S = 0.1
    devs = []
    # Constant echo: Phi = 1 (up to the certified tail).
    devs.append(abs(product_yield(lambda t: np.ones_like(t), k_S).phi_s - 1.0))
    # Exponential echo exp(-a t): Phi = 1/2 + k/(2(k+a)).
    a = 0.7
    devs.append(abs(
        product_yield(lambda t: np.exp(-a * t), k_S).phi_s
        - (0.5 + k_S / (2.0 * (k_S + a)))
    ))
    # Gaussian echo exp(-g t^2): closed form via the scaled error function.
    gamma = 1.0
    devs.append(abs(
        product_yield(lambda t: np.exp(-gamma * t * t), k_S).phi_s
        - yield_gaussian(gamma, k_S).derived
    ))
    worst = max(devs)
    return SuiteResult(
        name="quadrature_closed_forms",
        passed=worst < tol,
        max_deviation=worst,
        detail=f"const/exp/gaussian devs {devs[0]:.2e}/{devs[1]:.2e}/{devs[2]:.2e}",
    )


def suite_limits(tol: float = 1e-9, hook: CouplingsHook | None = None) -> SuiteResult:
    """Analytic unit-yield limits through the full pipeline."""
    devs = []
    for B, theta, g0, T in ((0.9, math.pi / 2, 1.0, 0.2), (0.9, 0.3, 0.0, 0.2)):
        c = _derive(B, theta, 1000, g0, 1.0, hook)
        ctx = FermionEchoContext(1000, 1.0, c, T=T)
        res = product_yield(ctx.echo, 0.1, max_frequency=ctx.max_frequency)
        devs.append(abs(res.phi_s - 1.0))
    worst = max(devs)
    return SuiteResult(
        name="analytic_limits",
        passed=worst < tol,
        max_deviation=worst,
        detail=f"theta=pi/2 dev {devs[0]:.2e}, g0=0 dev {devs[1]:.2e} (tol {tol:g})",
    )


def quadratic_decay_fit(
    N: int = 1000,
    lam: float = 0.95,
    g0: float = 1.0,
    t_max: float = 0.25,
    n_times: int = 60,
) -> tuple[float, float]:
    """Least-squares coefficient c of -ln L ~ c t^2 on the early-time echo.

    Returns (c, relative rms residual of the fit).
    """
    c = derive_couplings(FieldConfig(B=lam, theta=0.0),
                         EnvironmentParams(N=N, J=1.0, g0=g0))
    series = echo_series(N, 1.0, c, 0.0, np.linspace(0.0, t_max, n_times))
    y = -np.log(series.values)
    t_sq = series.times**2
    coeff = float((t_sq @ y) / (t_sq @ t_sq))
    resid = float(np.linalg.norm(y - coeff * t_sq) / np.linalg.norm(y))
    return coeff, resid


def initial_decay_coefficient(N: int, J: float, couplings: DerivedCouplings) -> float:
    """Closed-form t^2 coefficient of -ln L: the ground-state variance sum.

    c = sum_k Var_G(h_k^- - h_k^+)
      = 4 J^2 (lam+ - lam-)^2 sum_{k>0} sin^2 k / (1 + lam^2 - 2 lam cos k).
    Serves as a time-domain-independent reference for the quadratic fit.
    """
    k = (2 * np.arange(1, N // 2 + 1) - 1) * math.pi / N
    split = couplings.lambda_plus - couplings.lambda_minus
    weights = np.sin(k) ** 2 / (1.0 + couplings.lam**2 - 2.0 * couplings.lam * np.cos(k))
    return float(4.0 * J * J * split * split * weights.sum())


def suite_gaussian_forms(fit_tol: float = 0.15) -> SuiteResult:
    """Gaussian-yield prefactor bookkeeping and decay-rate diagnostics.

    Asserts the printed and re-derived Gaussian yields differ by the
    constant factor 2 sqrt(2) and that the fitted early-time quadratic
    coefficient of the exact echo matches the closed-form variance sum.
    The cutoff-formula rate for small K_c is reported alongside: it is
    an order-of-magnitude construct, not a fit.
    """
    ratios = []
    for gamma, k_S in ((1.0, 0.1), (5.0, 0.02), (0.3, 0.4)):
        gy = yield_gaussian(gamma, k_S)
        ratios.append(abs((gy.paper - 0.5) / (gy.derived - 0.5) - 2.0 * math.sqrt(2.0)))
    prefactor_dev = max(ratios)

    lam, N = 0.95, 1000
    coeff, resid = quadratic_decay_fit(N=N, lam=lam)
    c = derive_couplings(FieldConfig(B=lam, theta=0.0),
                         EnvironmentParams(N=N, J=1.0, g0=1.0))
    reference = initial_decay_coefficient(N, 1.0, c)
    fit_dev = abs(coeff / reference - 1.0)
    rate_note = ", ".join(
        f"K_c={kc}: {gaussian_rate(N, 1.0, c, kc) / coeff:.3g}" for kc in (1, 2, 3)
    )
    passed = prefactor_dev < 1e-12 and fit_dev < fit_tol and resid < 0.05
    return SuiteResult(
        name="gaussian_forms",
        passed=passed,
        max_deviation=max(prefactor_dev, fit_dev),
        detail=(
            f"prefactor-ratio dev {prefactor_dev:.1e}; quadratic fit c={coeff:.3f} "
            f"vs variance-sum {reference:.3f} (rel dev {fit_dev:.2%}, resid {resid:.2%}); "
            f"cutoff-rate / fitted ratios: {rate_note}"
        ),
    )


def run_check(
    quick: bool = False, hook: CouplingsHook | None = None
) -> tuple[list[SuiteResult], int]:
    """Run all suites; exit code 0 only if every suite passes."""
    if quick:
        results = [
            suite_pure_oracle(ns=(2, 4, 6), n_times=80, hook=hook),
            suite_eq11(hook=hook),
            suite_thermal_oracle(ns=(2, 4, 6), hook=hook),
            suite_quadrature(),
            suite_limits(hook=hook),
        ]
    else:
        results = [
            suite_pure_oracle(hook=hook),
            suite_eq11(hook=hook),
            suite_thermal_oracle(hook=hook),
            suite_quadrature(),
            suite_limits(hook=hook),
            suite_gaussian_forms(),
        ]
    code = 0 if all(r.passed for r in results) else 1
    if not quick:
        # Documented discrepancy of the single-sector thermal
        # approximation; informational, never gates the exit code.
        mp = suite_thermal_oracle(hook=hook, construction="mode_pair", tol=math.inf,
                                  trend_slack=math.inf)
        results.append(SuiteResult(
            name="thermal_mode_pair (informational)",
            passed=True,
            max_deviation=mp.max_deviation,
            detail=mp.detail,
        ))
    return results, code
