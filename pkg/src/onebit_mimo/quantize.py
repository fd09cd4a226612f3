"""One-bit quantizer and its Bussgang linearization.

The quantizer keeps only the signs of the real and imaginary parts. For a
Gaussian input y with covariance C_y, the statistically equivalent linear
model is r = A y + q with a diagonal gain A, the exact output covariance
C_r given by the arcsine law, and quantizer noise q uncorrelated with y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

__all__ = [
    "one_bit_quantize",
    "bussgang_gain",
    "arcsine_covariance",
    "quantizer_noise_cov",
    "bussgang_model",
    "BussgangModel",
    "low_snr_cq",
    "alpha_p",
    "alpha_d",
]

# normalized quantizer-noise power of the uncorrelated approximation
UNCORR_NOISE_VAR = 1.0 - 2.0 / np.pi

_CLAMP_TOL = 1e-12


def one_bit_quantize(y: np.ndarray) -> np.ndarray:
    """Elementwise sign quantization to {+-1 +-1j}/sqrt(2), with sign(0) = +1.

    Scale-invariant: Q(c*y) = Q(y) for any c > 0.
    """
    y = np.asarray(y)
    re = np.where(y.real >= 0.0, 1.0, -1.0)
    im = np.where(y.imag >= 0.0, 1.0, -1.0)
    return (re + 1j * im) / np.sqrt(2.0)


def bussgang_gain(C_y: np.ndarray) -> np.ndarray:
    """Diagonal of the Bussgang gain, sqrt(2/pi) * diag(C_y)^(-1/2).

    Returns a real vector (the gain matrix is diagonal for Gaussian inputs).
    """
    d = np.real(np.diagonal(np.atleast_2d(C_y)))
    if np.any(d <= 0.0):
        raise ValueError("C_y must have strictly positive diagonal")
    return np.sqrt(2.0 / np.pi) / np.sqrt(d)


def _normalized_parts(C_y: np.ndarray):
    C_y = np.atleast_2d(C_y)
    d = np.real(np.diagonal(C_y))
    if np.any(d <= 0.0):
        raise ValueError("C_y must have strictly positive diagonal")
    s = 1.0 / np.sqrt(d)
    X = np.real(C_y) * np.outer(s, s)
    Y = np.imag(C_y) * np.outer(s, s)
    # exact by construction; repairing rounding here matters because arcsin
    # has infinite slope at 1
    np.fill_diagonal(X, 1.0)
    np.fill_diagonal(Y, 0.0)
    over = max(np.abs(X).max(), np.abs(Y).max()) - 1.0
    if over > _CLAMP_TOL:
        raise ValueError(
            f"normalized correlation exceeds 1 by {over:.3e}; C_y is not a valid covariance"
        )
    return np.clip(X, -1.0, 1.0), np.clip(Y, -1.0, 1.0)


def arcsine_covariance(C_y: np.ndarray) -> np.ndarray:
    """Exact covariance of the one-bit output for Gaussian input covariance C_y.

    C_r = (2/pi) [arcsin(S Re(C_y) S) + j arcsin(S Im(C_y) S)], S = diag(C_y)^(-1/2),
    with arcsin applied elementwise. The diagonal is exactly 1.
    """
    X, Y = _normalized_parts(C_y)
    return (2.0 / np.pi) * (np.arcsin(X) + 1j * np.arcsin(Y))


def quantizer_noise_cov(C_y: np.ndarray) -> np.ndarray:
    """Covariance of the Bussgang quantizer noise, C_q = C_r - A C_y A^H.

    Not diagonal in general; the diagonal equals 1 - 2/pi exactly.
    """
    X, Y = _normalized_parts(C_y)
    # A C_y A^H = (2/pi) * (X + jY) in normalized coordinates
    return (2.0 / np.pi) * ((np.arcsin(X) - X) + 1j * (np.arcsin(Y) - Y))


@dataclass(frozen=True)
class BussgangModel:
    """Linearization triple for a given input covariance.

    gain is the diagonal of A; C_r the quantized-output covariance; C_q the
    quantizer-noise covariance.
    """

    gain: np.ndarray
    C_r: np.ndarray
    C_q: np.ndarray


def bussgang_model(C_y: np.ndarray) -> BussgangModel:
    """Assemble gain, arcsine output covariance, and quantizer-noise covariance."""
    return BussgangModel(
        gain=bussgang_gain(C_y),
        C_r=arcsine_covariance(C_y),
        C_q=quantizer_noise_cov(C_y),
    )


def low_snr_cq(dim: int) -> np.ndarray:
    """Uncorrelated quantizer-noise approximation (1 - 2/pi) I."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return UNCORR_NOISE_VAR * np.eye(dim)


def alpha_p(cfg: SystemConfig) -> float:
    """Scalar training-phase Bussgang gain for DFT pilots, sqrt(2/pi / (K rho_p + 1))."""
    return np.sqrt(2.0 / np.pi / (cfg.K * cfg.rho_p + 1.0))


def alpha_d(cfg: SystemConfig) -> float:
    """Scalar data-phase gain under channel hardening, sqrt(2/pi / (K rho_d + 1))."""
    return np.sqrt(2.0 / np.pi / (cfg.K * cfg.rho_d + 1.0))
