"""MRC/ZF combining and achievable-rate evaluation.

Provides the Monte Carlo lower bound on the ergodic rate with estimated CSI
(worst-case-Gaussian quantizer noise), the low-SNR closed-form
approximations for MRC and ZF with their supporting moment sets, and the
conventional (infinite-resolution) reference rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import crandn, dft_pilots, unvec, vec
from .config import SystemConfig
from .estimators import blmmse_filter, estimate_variance
from .mc import run_blocks
from .quantize import (
    UNCORR_NOISE_VAR,
    alpha_d,
    alpha_p,
    one_bit_quantize,
    quantizer_noise_cov,
)

__all__ = [
    "RateReport",
    "ReceiverMoments",
    "mrc_matrix",
    "zf_matrix",
    "sum_se",
    "ergodic_rate_mc",
    "rate_lemma1",
    "rate_mrc_closed",
    "rate_zf_closed",
    "mrc_moments",
    "zf_moments",
    "conventional_rates",
    "closed_form_report",
]


@dataclass
class RateReport:
    """Per-user rates and the resulting sum spectral efficiency."""

    per_user_rate: np.ndarray
    sum_spectral_efficiency: float
    method: str
    stderr: float | None = None


def mrc_matrix(H_hat: np.ndarray) -> np.ndarray:
    """Maximum-ratio combiner W^T = H_hat^H (K x M)."""
    return H_hat.conj().T


def zf_matrix(H_hat: np.ndarray) -> np.ndarray:
    """Zero-forcing combiner W^T = (H_hat^H H_hat)^{-1} H_hat^H (K x M)."""
    Hh = H_hat.conj().T
    return np.linalg.solve(Hh @ H_hat, Hh)


def sum_se(per_user_rates: np.ndarray, cfg: SystemConfig) -> float:
    """Sum spectral efficiency (T - tau)/T * sum_k R_k in bits/s/Hz."""
    return (cfg.T - cfg.tau) / cfg.T * float(np.sum(per_user_rates))


def _combiner(receiver: str):
    if receiver == "mrc":
        return mrc_matrix
    if receiver == "zf":
        return zf_matrix
    raise ValueError(f"unknown receiver {receiver!r} (use 'mrc' or 'zf')")


def ergodic_rate_mc(
    cfg: SystemConfig,
    receiver: str = "mrc",
    n_trials: int = 2000,
    seed=0,
    csi: str = "estimated",
) -> RateReport:
    """Monte Carlo lower bound on the ergodic per-user rate with one-bit ADCs.

    Per channel draw: train with DFT pilots, quantize, form the Bussgang
    LMMSE estimate, build the combiner from it, and evaluate the SINR with
    the hardening gain alpha_d and the exact per-realization quantizer-noise
    covariance. csi='perfect' skips estimation (H_hat = H), which upper
    bounds the estimated-CSI rate.
    """
    if csi not in ("estimated", "perfect"):
        raise ValueError("csi must be 'estimated' or 'perfect'")
    combine = _combiner(receiver)
    M, K, tau = cfg.M, cfg.K, cfg.tau
    Phi = dft_pilots(tau, K)
    ad = alpha_d(cfg)
    fast = tau == K
    G = None
    if csi == "estimated" and not fast:
        G, _, _ = blmmse_filter(Phi, cfg)
    ap_rp = alpha_p(cfg) * np.sqrt(cfg.rho_p)
    Phi_conj = Phi.conj()

    def block(rng: np.random.Generator, n: int):
        rate_sum = np.zeros(K)
        samples = np.empty(n)
        for t in range(n):
            H = crandn(rng, M, K)
            if csi == "perfect":
                H_hat = H
            else:
                Y = np.sqrt(cfg.rho_p) * H @ Phi.T + crandn(rng, M, tau)
                R_p = one_bit_quantize(Y)
                if fast:
                    H_hat = ap_rp * (R_p @ Phi_conj)
                else:
                    H_hat = unvec(G @ vec(R_p), M, K)
            Eps = H - H_hat
            C_qd = quantizer_noise_cov(cfg.rho_d * H @ H.conj().T + np.eye(M))
            WT = combine(H_hat)

            sig = np.abs(WT @ H_hat) ** 2  # K x K, [k, i] = |w_k^T h_hat_i|^2
            desired = cfg.rho_d * ad**2 * np.diagonal(sig)
            interf = cfg.rho_d * ad**2 * (sig.sum(axis=1) - np.diagonal(sig))
            est_err = cfg.rho_d * ad**2 * np.sum(np.abs(WT @ Eps) ** 2, axis=1)
            awgn = ad**2 * np.sum(np.abs(WT) ** 2, axis=1)
            quant = np.real(np.sum((WT @ C_qd) * WT.conj(), axis=1))
            den = interf + est_err + awgn + quant
            sinr = np.divide(desired, den, out=np.zeros(K), where=den > 0)
            rates = np.log2(1.0 + sinr)
            rate_sum += rates
            samples[t] = rates.sum()
        return rate_sum, samples

    results = run_blocks(n_trials, block, seed)
    per_user = sum(r for r, _ in results) / n_trials
    samples = np.concatenate([s for _, s in results])
    pref = (cfg.T - cfg.tau) / cfg.T
    stderr = pref * float(np.std(samples, ddof=1) / np.sqrt(n_trials))
    return RateReport(per_user, sum_se(per_user, cfg), "mc_lower_bound", stderr)


@dataclass(frozen=True)
class ReceiverMoments:
    """Moment set feeding the low-SNR rate formula.

    mean_gain and gain_var are E{w_k^T h_k} and Var(w_k^T h_k);
    interference and noise_quant are the full UI_k and AQN_k terms
    (prefactors included).
    """

    mean_gain: complex
    gain_var: float
    interference: float
    noise_quant: float


def rate_lemma1(cfg: SystemConfig, moments: ReceiverMoments) -> float:
    """Low-SNR per-user rate from receiver moments.

    R = log2(1 + rho_d a_d^2 |E{w^T h}|^2 /
             (rho_d a_d^2 Var(w^T h) + UI + AQN)).
    """
    ra2 = cfg.rho_d * alpha_d(cfg) ** 2
    num = ra2 * abs(moments.mean_gain) ** 2
    if num == 0.0:
        return 0.0
    den = ra2 * moments.gain_var + moments.interference + moments.noise_quant
    return float(np.log2(1.0 + num / den))


def rate_mrc_closed(cfg: SystemConfig) -> float:
    """Closed-form low-SNR MRC rate, log2(1 + rho_d a_d^2 M sigma^2)."""
    return float(
        np.log2(1.0 + cfg.rho_d * alpha_d(cfg) ** 2 * cfg.M * estimate_variance(cfg))
    )


def rate_zf_closed(cfg: SystemConfig) -> float:
    """Closed-form low-SNR ZF rate; requires M > K."""
    if cfg.M <= cfg.K:
        raise ValueError(f"ZF closed form needs M > K, got M={cfg.M}, K={cfg.K}")
    ad2 = alpha_d(cfg) ** 2
    sig = estimate_variance(cfg)
    eta = 1.0 - sig
    num = cfg.rho_d * ad2 * sig * (cfg.M - cfg.K)
    den = cfg.rho_d * ad2 * cfg.K * eta + ad2 + UNCORR_NOISE_VAR
    return float(np.log2(1.0 + num / den))


def mrc_moments(cfg: SystemConfig) -> ReceiverMoments:
    """Closed-form MRC moment set: plugging it into the low-SNR rate
    formula reproduces :func:`rate_mrc_closed` exactly."""
    sig = estimate_variance(cfg)
    ms = cfg.M * sig
    ra2 = cfg.rho_d * alpha_d(cfg) ** 2
    return ReceiverMoments(
        mean_gain=ms,
        gain_var=ms,
        interference=(cfg.K - 1) * ra2 * ms,
        noise_quant=(alpha_d(cfg) ** 2 + UNCORR_NOISE_VAR) * ms,
    )


def zf_moments(cfg: SystemConfig) -> ReceiverMoments:
    """Closed-form ZF moment set (inverse-Wishart mean for the combiner norm)."""
    if cfg.M <= cfg.K:
        raise ValueError("ZF moments need M > K")
    sig = estimate_variance(cfg)
    wnorm = 1.0 / (sig * (cfg.M - cfg.K))  # E{||w_k||^2}
    ra2 = cfg.rho_d * alpha_d(cfg) ** 2
    return ReceiverMoments(
        mean_gain=1.0,
        gain_var=(1.0 - sig) * wnorm,
        interference=(cfg.K - 1) * ra2 * (1.0 - sig) * wnorm,
        noise_quant=(alpha_d(cfg) ** 2 + UNCORR_NOISE_VAR) * wnorm,
    )


def conventional_rates(
    cfg: SystemConfig, M_conv: int, receiver: str = "mrc"
) -> RateReport:
    """Infinite-resolution reference rates with LMMSE-trained CSI."""
    rp, rd, K, tau = cfg.rho_p, cfg.rho_d, cfg.K, cfg.tau
    if receiver == "mrc":
        sinr = rd * tau * rp * M_conv / ((1.0 + K * rd) * (1.0 + tau * rp))
    elif receiver == "zf":
        if M_conv <= K:
            raise ValueError("conventional ZF needs M_conv > K")
        sinr = rd * tau * rp * (M_conv - K) / (K * rd + tau * rp + 1.0)
    else:
        raise ValueError(f"unknown receiver {receiver!r}")
    rate = float(np.log2(1.0 + sinr))
    per_user = np.full(cfg.K, rate)
    return RateReport(per_user, sum_se(per_user, cfg), f"conventional_{receiver}")


def closed_form_report(cfg: SystemConfig, receiver: str = "mrc") -> RateReport:
    """Low-SNR closed-form rates wrapped in a RateReport."""
    rate = rate_mrc_closed(cfg) if receiver == "mrc" else rate_zf_closed(cfg)
    per_user = np.full(cfg.K, rate)
    return RateReport(per_user, sum_se(per_user, cfg), f"theorem_{receiver}")
