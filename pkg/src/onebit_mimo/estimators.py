"""Channel estimators for the one-bit training phase.

The main estimator linearizes the quantizer with the Bussgang decomposition
and applies an LMMSE filter whose output covariance comes from the arcsine
law. Baselines: plain least squares on the quantized output, an LMMSE
variant that models the quantizer noise as uncorrelated, and a near-ML
estimator solved by projected gradient ascent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .channel import unvec
from .config import SystemConfig
from .quantize import (
    UNCORR_NOISE_VAR,
    alpha_p,
    arcsine_covariance,
    bussgang_gain,
)

__all__ = [
    "ChannelEstimate",
    "blmmse_flat",
    "blmmse_fast",
    "blmmse_filter",
    "mse_closed_form",
    "mse_floor",
    "estimate_variance",
    "ls_estimate",
    "lmmse_uncorrelated",
    "lmmse_uncorrelated_filter",
    "nml_estimate",
]

_RIDGE = 1e-10


@dataclass
class ChannelEstimate:
    """Estimated channel with its model-predicted quality figures.

    sigma_sq is the per-element variance of the estimate and mse the
    normalized MSE, both as predicted by the estimator's own statistical
    model; None where no closed form applies (LS, nML).
    """

    H_hat: np.ndarray
    sigma_sq: float | None = None
    mse: float | None = None
    diagnostics: dict = field(default_factory=dict)


def mse_closed_form(cfg: SystemConfig) -> float:
    """Normalized MSE of the Bussgang LMMSE estimate, 1 - 2K*rho_p/(pi(K*rho_p+1)).

    Exact for tau = K with DFT pilots and an i.i.d. channel.
    """
    kr = cfg.K * cfg.rho_p
    return 1.0 - 2.0 * kr / (np.pi * (kr + 1.0))


def mse_floor() -> float:
    """High-SNR estimation error floor, 1 - 2/pi."""
    return UNCORR_NOISE_VAR


def estimate_variance(cfg: SystemConfig) -> float:
    """Per-element variance sigma^2 of the estimate under the low-SNR model."""
    ap2 = 2.0 / np.pi / (cfg.K * cfg.rho_p + 1.0)
    sig = ap2 * cfg.tau * cfg.rho_p
    return sig / (sig + ap2 + UNCORR_NOISE_VAR)


def _pilot_model(Phi: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Stacked training matrix Phi_bar = Phi kron sqrt(rho_p) I_M."""
    tau, K = Phi.shape
    if K != cfg.K or tau != cfg.tau:
        raise ValueError(
            f"pilot shape {Phi.shape} inconsistent with cfg (tau={cfg.tau}, K={cfg.K})"
        )
    return np.kron(Phi, np.sqrt(cfg.rho_p) * np.eye(cfg.M))


def _hermitian_solve(C: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve C X = B for Hermitian C, falling back to a ridge on breakdown."""
    try:
        return np.linalg.solve(C, B)
    except np.linalg.LinAlgError:
        warnings.warn(
            "quantized-output covariance is numerically singular; "
            f"regularizing with a {_RIDGE:g} ridge",
            RuntimeWarning,
            stacklevel=3,
        )
        return np.linalg.solve(C + _RIDGE * np.eye(C.shape[0]), B)


def blmmse_filter(
    Phi: np.ndarray, cfg: SystemConfig, C_h: np.ndarray | None = None
) -> tuple[np.ndarray, float, float]:
    """Bussgang LMMSE filter G (MK x M*tau) with predicted (sigma_sq, mse).

    The estimate is obtained as unvec(G @ r_p). Input-independent, so the
    filter can be reused across Monte Carlo trials.
    """
    Phib = _pilot_model(Phi, cfg)
    n = Phib.shape[0]
    if C_h is None:
        C_y = Phib @ Phib.conj().T + np.eye(n)
        C_h_Pht = Phib.conj().T  # C_h = I
    else:
        C_y = Phib @ C_h @ Phib.conj().T + np.eye(n)
        C_h_Pht = C_h @ Phib.conj().T
    a = bussgang_gain(C_y)
    B = C_h_Pht * a  # C_h (A Phi_bar)^H, columns scaled by the diagonal gain
    C_r = arcsine_covariance(C_y)
    G = _hermitian_solve(C_r, B.conj().T).conj().T
    # predicted estimate power tr(G B^H) = sum(G * conj(B))
    MK = cfg.M * cfg.K
    sigma_sq = float(np.real(np.sum(G * B.conj()))) / MK
    return G, sigma_sq, 1.0 - sigma_sq


def blmmse_flat(
    r_p: np.ndarray,
    Phi: np.ndarray,
    cfg: SystemConfig,
    C_h: np.ndarray | None = None,
) -> ChannelEstimate:
    """Bussgang LMMSE channel estimate from the quantized training vector.

    vec(H_hat) = C_h (A Phi_bar)^H C_r^{-1} r_p, with the gain A from the
    Bussgang decomposition of the training covariance and C_r from the
    arcsine law. C_h is the MK x MK channel covariance (None for i.i.d.).
    """
    G, sigma_sq, mse = blmmse_filter(Phi, cfg, C_h)
    h_hat = G @ np.asarray(r_p).reshape(-1)
    return ChannelEstimate(unvec(h_hat, cfg.M, cfg.K), sigma_sq=sigma_sq, mse=mse)


def blmmse_fast(r_p: np.ndarray, Phi: np.ndarray, cfg: SystemConfig) -> ChannelEstimate:
    """Inversion-free estimator for tau = K, DFT pilots, i.i.d. channel.

    H_hat = alpha_p sqrt(rho_p) R_p Phi^*, where R_p = unvec(r_p). Cost
    O(M K tau); coincides with :func:`blmmse_flat` in this regime because
    the quantized-output covariance is the identity.
    """
    if cfg.tau != cfg.K:
        raise ValueError(f"fast path requires tau == K, got tau={cfg.tau}, K={cfg.K}")
    R_p = unvec(np.asarray(r_p).reshape(-1), cfg.M, cfg.tau)
    H_hat = alpha_p(cfg) * np.sqrt(cfg.rho_p) * (R_p @ Phi.conj())
    mse = mse_closed_form(cfg)
    return ChannelEstimate(H_hat, sigma_sq=1.0 - mse, mse=mse)


def ls_estimate(r_p: np.ndarray, Phi: np.ndarray, cfg: SystemConfig) -> ChannelEstimate:
    """Least squares on the quantized output treated as the observation.

    vec(H_hat) = (Phi_bar^H Phi_bar)^{-1} Phi_bar^H r_p; fed the unquantized
    noiseless signal instead of r_p it recovers H exactly.
    """
    tau, K = Phi.shape
    A = np.sqrt(cfg.rho_p) * Phi
    if np.linalg.matrix_rank(A) < K:
        raise np.linalg.LinAlgError("rank-deficient pilot matrix")
    R_p = unvec(np.asarray(r_p).reshape(-1), cfg.M, tau)
    Ht, *_ = np.linalg.lstsq(A, R_p.T, rcond=None)
    return ChannelEstimate(Ht.T)


def lmmse_uncorrelated_filter(
    Phi: np.ndarray, cfg: SystemConfig, C_h: np.ndarray | None = None
) -> tuple[np.ndarray, float, float]:
    """Filter of the baseline that models quantizer noise as (1 - 2/pi) I."""
    Phib = _pilot_model(Phi, cfg)
    n = Phib.shape[0]
    if C_h is None:
        C_y = Phib @ Phib.conj().T + np.eye(n)
        C_h_Pht = Phib.conj().T
    else:
        C_y = Phib @ C_h @ Phib.conj().T + np.eye(n)
        C_h_Pht = C_h @ Phib.conj().T
    a = bussgang_gain(C_y)
    B = C_h_Pht * a  # C_h (A Phi_bar)^H
    # modeled output covariance: A Phi_bar C_h (A Phi_bar)^H + A A^H + (1 - 2/pi) I
    C_model = (Phib * a[:, None]) @ B
    C_model[np.diag_indices(n)] += a**2 + UNCORR_NOISE_VAR
    G = _hermitian_solve(C_model, B.conj().T).conj().T
    MK = cfg.M * cfg.K
    sigma_sq = float(np.real(np.sum(G * B.conj()))) / MK
    return G, sigma_sq, 1.0 - sigma_sq


def lmmse_uncorrelated(
    r_p: np.ndarray,
    Phi: np.ndarray,
    cfg: SystemConfig,
    C_h: np.ndarray | None = None,
) -> ChannelEstimate:
    """LMMSE baseline with the quantizer noise modeled as uncorrelated.

    Identical to :func:`blmmse_flat` except that the quantized-output
    covariance is replaced by its low-SNR diagonal-noise surrogate. The
    reported sigma_sq/mse are the surrogate model's own predictions.
    """
    G, sigma_sq, mse = lmmse_uncorrelated_filter(Phi, cfg, C_h)
    h_hat = G @ np.asarray(r_p).reshape(-1)
    return ChannelEstimate(unvec(h_hat, cfg.M, cfg.K), sigma_sq=sigma_sq, mse=mse)


def _real_embedding(Phib: np.ndarray) -> np.ndarray:
    return np.block(
        [
            [Phib.real, -Phib.imag],
            [Phib.imag, Phib.real],
        ]
    )


def nml_estimate(
    r_p: np.ndarray,
    Phi: np.ndarray,
    cfg: SystemConfig,
    radius_sq: float | None = None,
    tol: float = 1e-6,
    max_iters: int = 500,
) -> ChannelEstimate:
    """Near-maximum-likelihood estimate via projected gradient ascent.

    Maximizes sum_i log F(sqrt(2) c_i (Phi_bar_R h)_i) over the real-valued
    channel embedding constrained to ||h||^2 <= radius_sq (default MK, the
    expected squared norm of a unit-variance channel), where F is the
    standard normal CDF and c_i the observed signs. The problem is concave;
    ascent uses backtracking line search. Non-convergence is reported in
    `diagnostics` rather than raised.
    """
    MK = cfg.M * cfg.K
    if radius_sq is None:
        radius_sq = float(MK)
    radius = np.sqrt(radius_sq)

    Phib = _pilot_model(Phi, cfg)
    A = _real_embedding(Phib)  # 2M*tau x 2MK
    r = np.asarray(r_p).reshape(-1)
    c = np.sign(np.concatenate([r.real, r.imag]))  # in {+-1}

    def objective_grad(h):
        z = np.sqrt(2.0) * c * (A @ h)
        logF = stats.norm.logcdf(z)
        lam = np.exp(stats.norm.logpdf(z) - logF)  # pdf/cdf ratio, stable
        grad = np.sqrt(2.0) * (A.T @ (c * lam))
        return float(logF.sum()), grad

    def project(h):
        nrm = np.linalg.norm(h)
        return h if nrm <= radius else h * (radius / nrm)

    h = np.zeros(2 * MK)
    obj, grad = objective_grad(h)
    trace = [obj]
    step = 1.0
    grad_norm = np.inf
    converged = False
    for _ in range(max_iters):
        grad_norm = float(np.linalg.norm(project(h + grad) - h))
        if grad_norm < tol:
            converged = True
            break
        step = min(step * 2.0, 1e6)
        while step > 1e-15:
            h_new = project(h + step * grad)
            obj_new, grad_new = objective_grad(h_new)
            if obj_new >= obj:
                break
            step *= 0.5
        else:
            break  # no ascent step representable; treat as stalled
        h, obj, grad = h_new, obj_new, grad_new
        trace.append(obj)

    h_c = h[:MK] + 1j * h[MK:]
    return ChannelEstimate(
        unvec(h_c, cfg.M, cfg.K),
        diagnostics={
            "converged": converged,
            "iterations": len(trace) - 1,
            "grad_norm": grad_norm,
            "objective_trace": trace,
        },
    )
