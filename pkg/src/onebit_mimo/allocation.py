"""Power scaling, pilot/power allocation, bit energy, and antenna-ratio solvers.

The allocation problem splits a total energy budget P = rho*T between
training (fraction gamma over tau symbols) and data transmission, and is
solved by an exhaustive scan over integer tau combined with a grid-seeded
golden-section search over gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import PowerBudget, SystemConfig
from .quantize import UNCORR_NOISE_VAR

__all__ = [
    "AllocationSolution",
    "se_at_allocation",
    "se_surface",
    "optimize_allocation",
    "power_scaling_limit",
    "bit_energy",
    "antenna_ratio",
]


@dataclass(frozen=True)
class AllocationSolution:
    """Optimizer output; the implied powers satisfy tau*rho_p + (T-tau)*rho_d = P."""

    gamma_star: float
    tau_star: int
    rho_p_star: float
    rho_d_star: float
    se_star: float
    receiver: str
    system: str
    T: int
    P: float


def _sinr(rho_p, rho_d, tau, M, K, receiver: str, system: str):
    """Post-combining SINR of the closed-form rate expressions (M may be real)."""
    if system == "conventional":
        if receiver == "mrc":
            return rho_d * tau * rho_p * M / ((1.0 + K * rho_d) * (1.0 + tau * rho_p))
        if receiver == "zf":
            return rho_d * tau * rho_p * (M - K) / (K * rho_d + tau * rho_p + 1.0)
        raise ValueError(f"unknown receiver {receiver!r}")
    if system == "one-bit":
        ap2 = (2.0 / np.pi) / (K * rho_p + 1.0)
        ad2 = (2.0 / np.pi) / (K * rho_d + 1.0)
        s = ap2 * tau * rho_p
        sig = s / (s + ap2 + UNCORR_NOISE_VAR)
        if receiver == "mrc":
            return rho_d * ad2 * M * sig
        if receiver == "zf":
            den = rho_d * ad2 * K * (1.0 - sig) + ad2 + UNCORR_NOISE_VAR
            return rho_d * ad2 * sig * (M - K) / den
        raise ValueError(f"unknown receiver {receiver!r}")
    raise ValueError(f"unknown system {system!r}")


def _se_direct(gamma, tau, P, T, M, K, receiver: str, system: str):
    """Sum SE at the (gamma, tau) split; gamma may be an array."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any((gamma <= 0.0) | (gamma >= 1.0)):
        raise ValueError("gamma must lie strictly inside (0, 1)")
    if tau == T:
        return np.zeros_like(gamma) if gamma.ndim else 0.0
    rho_p = gamma * P / tau
    rho_d = (1.0 - gamma) * P / (T - tau)
    sinr = _sinr(rho_p, rho_d, tau, M, K, receiver, system)
    se = (T - tau) / T * K * np.log2(1.0 + sinr)
    return se if se.ndim else float(se)


def se_at_allocation(
    gamma,
    tau: int,
    budget: PowerBudget,
    cfg: SystemConfig,
    receiver: str = "mrc",
    system: str = "one-bit",
):
    """Sum spectral efficiency at pilot fraction gamma and training length tau.

    Direct substitution of rho_p = gamma*P/tau, rho_d = (1-gamma)*P/(T-tau)
    into the closed-form rates; gamma may be an array. tau = T returns 0.
    """
    if not (cfg.K <= tau <= budget.T):
        raise ValueError(f"tau must lie in [K, T], got {tau}")
    return _se_direct(gamma, tau, budget.P, budget.T, cfg.M, cfg.K, receiver, system)


def se_surface(
    gamma, tau: int, budget: PowerBudget, cfg: SystemConfig, receiver: str = "mrc"
):
    """One-bit sum spectral efficiency via the rational-coefficient form.

    Evaluates (T-tau)/T * K * log2(1 + a1*tau / D(tau)) where D is a
    quadratic in tau with gamma-dependent coefficients. The published
    coefficient tables carry a global sign flip between numerator and
    denominator relative to the SINR obtained by direct substitution into
    the closed-form rates; the denominator is negated here so the surface
    agrees with :func:`se_at_allocation` to machine precision.
    """
    P, T, M, K = budget.P, budget.T, cfg.M, cfg.K
    if not (K <= tau <= T):
        raise ValueError(f"tau must lie in [K, T], got {tau}")
    gamma = np.asarray(gamma, dtype=float)
    if np.any((gamma <= 0.0) | (gamma >= 1.0)):
        raise ValueError("gamma must lie strictly inside (0, 1)")
    if tau == T:
        return np.zeros_like(gamma) if gamma.ndim else 0.0
    pi = np.pi
    g = gamma
    if receiver == "mrc":
        a1 = 4.0 * M * P**2 * (g - g**2)
        a2 = pi**2 + 2.0 * pi * P * g
        a3 = pi * (
            K * P * (pi - 2.0) * g
            - K * P * (1.0 - g) * (pi + 2.0 * P * g)
            - (pi + 2.0 * P * g) * T
        )
        a4 = pi * (
            K**2 * P**2 * (pi - 2.0) * (g - 1.0) * g - K * P * (pi - 2.0) * g * T
        )
    elif receiver == "zf":
        a1 = 4.0 * (M - K) * P**2 * (g - g**2)
        a2 = pi**2 + 2.0 * pi * P * g
        # the inner sign of the 4P(g-g^2) + pi^2(2g-1) group is corrected here;
        # as published it breaks the identity with the direct substitution
        a3 = -K * P * (
            2.0 * pi * (g + P * (g - g**2))
            - 4.0 * P * (g - g**2)
            - pi**2 * (2.0 * g - 1.0)
        ) - (pi**2 + 2.0 * pi * P * g) * T
        a4 = pi * (
            K**2 * P**2 * (pi - 2.0) * (g - 1.0) * g - K * P * (pi - 2.0) * g * T
        )
    else:
        raise ValueError(f"unknown receiver {receiver!r}")
    sinr = a1 * tau / -(a2 * tau**2 + a3 * tau + a4)
    se = (T - tau) / T * K * np.log2(1.0 + sinr)
    return se if se.ndim else float(se)


def _golden_max(f, lo: float, hi: float, tol: float = 1e-6) -> tuple[float, float]:
    """Golden-section maximization of a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _optimize_numeric(
    P, T, M, K, receiver: str, system: str, gamma_grid: int, tau_max: int
):
    """Best (se, gamma, tau) over integer tau in [K, tau_max] and gamma in (0, 1)."""
    grid = np.linspace(0.0, 1.0, gamma_grid + 2)[1:-1]
    step = grid[1] - grid[0]
    best = (-np.inf, 0.5, int(K))
    for tau in range(int(K), int(tau_max) + 1):
        vals = _se_direct(grid, tau, P, T, M, K, receiver, system)
        i = int(np.argmax(vals))
        lo = max(grid[i] - step, 1e-9)
        hi = min(grid[i] + step, 1.0 - 1e-9)
        g_star, se = _golden_max(
            lambda g: _se_direct(g, tau, P, T, M, K, receiver, system), lo, hi
        )
        if se > best[0]:
            best = (se, g_star, tau)
    return best


def optimize_allocation(
    budget: PowerBudget,
    cfg: SystemConfig,
    receiver: str = "mrc",
    system: str = "one-bit",
    gamma_grid: int = 200,
    tau_max: int | None = None,
) -> AllocationSolution:
    """Maximize the sum spectral efficiency over (gamma, tau).

    Scans every integer tau in [K, tau_max or T]; for each tau, a gamma grid
    pre-scan (guards against non-unimodality) seeds a golden-section
    refinement. Returns the best point found, with the implied powers.
    """
    T = budget.T
    se_star, gamma_star, tau_star = _optimize_numeric(
        budget.P, T, cfg.M, cfg.K, receiver, system, gamma_grid, tau_max or T
    )
    rho_p = gamma_star * budget.P / tau_star
    rho_d = (1.0 - gamma_star) * budget.P / (T - tau_star) if tau_star < T else 0.0
    return AllocationSolution(
        gamma_star=gamma_star,
        tau_star=tau_star,
        rho_p_star=rho_p,
        rho_d_star=rho_d,
        se_star=se_star,
        receiver=receiver,
        system=system,
        T=T,
        P=budget.P,
    )


def power_scaling_limit(case: str, cfg: SystemConfig, E_u: float) -> float:
    """Asymptotic sum spectral efficiency under power scaling in M.

    Case 'I' (rho_p fixed, rho_d = E_u/M):
        (T-tau)/T * K * log2(1 + (2/pi) sigma^2 E_u) with sigma^2 from cfg.rho_p.
    Case 'II' (rho_p = rho_d = E_u/sqrt(M)):
        (T-tau)/T * K * log2(1 + (4/pi^2) tau E_u^2).
    The MRC and ZF rates share each limit.
    """
    from .estimators import estimate_variance

    pref = (cfg.T - cfg.tau) / cfg.T * cfg.K
    if case == "I":
        sig = estimate_variance(cfg)
        return pref * float(np.log2(1.0 + (2.0 / np.pi) * sig * E_u))
    if case == "II":
        return pref * float(np.log2(1.0 + (4.0 / np.pi**2) * cfg.tau * E_u**2))
    raise ValueError("case must be 'I' or 'II'")


def bit_energy(allocation: AllocationSolution, se: float | None = None) -> float:
    """Energy per transmitted bit, (tau*rho_p + (T-tau)*rho_d) / S_A."""
    if se is None:
        se = allocation.se_star
    if se <= 0.0:
        raise ValueError("spectral efficiency must be positive")
    spent = (
        allocation.tau_star * allocation.rho_p_star
        + (allocation.T - allocation.tau_star) * allocation.rho_d_star
    )
    return spent / se


def antenna_ratio(
    budget: PowerBudget,
    cfg: SystemConfig,
    receiver: str,
    M_conv: int,
    mode: str = "optimized",
    se_tol: float = 1e-4,
    M_max_factor: float = 1e5,
) -> float:
    """Antenna ratio kappa = M_one / M_conv for equal sum spectral efficiency.

    mode='benchmark' compares both systems at tau = K, rho_p = rho_d = rho;
    mode='optimized' gives each system its best resource allocation (the
    conventional side optimizes the power split with tau fixed at K). M_one
    is treated as continuous and found by bisection to an SE tolerance of
    se_tol bits/s/Hz; returns inf when even M_max_factor * M_conv antennas
    cannot reach the conventional SE (ZF at high SNR).
    """
    if mode not in ("benchmark", "optimized"):
        raise ValueError("mode must be 'benchmark' or 'optimized'")
    P, T, K = budget.P, budget.T, cfg.K
    rho = budget.rho

    if mode == "benchmark":
        target = (
            (T - K)
            / T
            * K
            * math.log2(1.0 + _sinr(rho, rho, K, M_conv, K, receiver, "conventional"))
        )

        def se_one(M):
            return (
                (T - K)
                / T
                * K
                * math.log2(1.0 + _sinr(rho, rho, K, M, K, receiver, "one-bit"))
            )

    else:
        _, target = _golden_max(
            lambda g: _se_direct(g, K, P, T, M_conv, K, receiver, "conventional"),
            1e-9,
            1.0 - 1e-9,
        )

        def se_one(M):
            return _optimize_numeric(P, T, M, K, receiver, "one-bit", 200, T)[0]

    lo = float(K) + 1e-9 if receiver == "zf" else 1.0
    hi = float(M_conv)
    f_hi = se_one(hi)
    while f_hi < target:
        hi *= 2.0
        if hi > M_max_factor * M_conv:
            return np.inf
        f_hi = se_one(hi)
    if se_one(lo) >= target:
        return lo / M_conv
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        f_mid = se_one(mid)
        if abs(f_mid - target) <= se_tol:
            return mid / M_conv
        if f_mid >= target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi) / M_conv
