"""Spectrally truncated 1D ensembles on the unit circle.

States are trigonometric polynomials u(x) = sum_{|k| <= n} a_k e^{2 pi i k x}.
The zero mode is uniform on a disk of radius B, the k != 0 modes are
complex Gaussian with E|a_k|^2 = 1/(2 pi^2 k^2 beta), matching the
density exp(-(beta/2) integral |u'|^2), and draws violating the mass
constraint sum |a_k|^2 <= B^2 are discarded. The interaction enters
through self-normalized importance weights: a hard-rejection scheme
would need the bound exp((2n+1) B^4 / 4), which is astronomically
impractical, so weighting it is.

Norms of u are evaluated by oversampled grid quadrature, which is exact
for the polynomial integrands involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralEnsemble",
    "sample_spectral_1d",
    "saturable_spectral_ensemble",
    "evaluate_modes_on_grid",
]


@dataclass
class SpectralEnsemble:
    """Weighted coefficient ensemble; coefficients ordered k = -n..n."""

    coeffs: np.ndarray  # (samples, 2n+1) complex
    weights: np.ndarray  # normalized to sum 1
    log_weights: np.ndarray
    ess: float
    n_modes: int
    n_requested: int
    n_rejected: int
    flagged: bool  # ESS below 10% of the kept samples, or empty

    @property
    def n_kept(self) -> int:
        return self.coeffs.shape[0]


def _grid_size(n_modes: int, power: int) -> int:
    # |u|^power has trig degree power*n; a uniform M-point rule is exact once M > power*n
    need = power * n_modes + 1
    M = 1 << max(3, (need - 1).bit_length())
    return M


def evaluate_modes_on_grid(coeffs: np.ndarray, M: int) -> np.ndarray:
    """Evaluate sum a_k e^{2 pi i k x} on M uniform grid points (rows = samples)."""
    coeffs = np.atleast_2d(coeffs)
    n = (coeffs.shape[1] - 1) // 2
    spec = np.zeros((coeffs.shape[0], M), dtype=complex)
    spec[:, : n + 1] = coeffs[:, n:]  # k = 0..n
    spec[:, M - n :] = coeffs[:, :n]  # k = -n..-1
    return np.fft.ifft(spec, axis=1) * M


def _draw_constrained_gaussian(rng, n_modes, ball_radius, samples, sigma_scale):
    """Zero mode uniform on the disk, side modes Gaussian, ball constraint enforced."""
    kept = []
    n_kept = 0
    rejected = 0
    k = np.concatenate([np.arange(-n_modes, 0), np.arange(1, n_modes + 1)])
    sd = sigma_scale / (2.0 * math.pi * np.abs(k))  # per-component std of re and im
    max_rejected = max(200 * samples, 100_000)  # near-infeasible constraint guard
    while n_kept < samples and rejected < max_rejected:
        batch = max(256, samples - n_kept)
        r0 = ball_radius * np.sqrt(rng.random(batch))
        phi0 = 2.0 * math.pi * rng.random(batch)
        a0 = r0 * np.exp(1j * phi0)
        g = rng.standard_normal((batch, 2 * n_modes)) + 1j * rng.standard_normal(
            (batch, 2 * n_modes)
        )
        side = g * sd[None, :]
        mass = np.abs(a0) ** 2 + np.sum(np.abs(side) ** 2, axis=1)
        ok = mass <= ball_radius * ball_radius
        rejected += int(np.sum(~ok))
        if np.any(ok):
            a0, side = a0[ok], side[ok]
            block = np.zeros((a0.size, 2 * n_modes + 1), dtype=complex)
            block[:, :n_modes] = side[:, :n_modes]
            block[:, n_modes] = a0
            block[:, n_modes + 1 :] = side[:, n_modes:]
            kept.append(block)
            n_kept += block.shape[0]
    if kept:
        coeffs = np.concatenate(kept, axis=0)[:samples]
    else:
        coeffs = np.zeros((0, 2 * n_modes + 1), dtype=complex)
    return coeffs, rejected


def _finalize(coeffs, log_w, n_modes, samples, rejected) -> SpectralEnsemble:
    if coeffs.shape[0] == 0:
        return SpectralEnsemble(
            coeffs=coeffs, weights=np.zeros(0), log_weights=np.zeros(0), ess=0.0,
            n_modes=n_modes, n_requested=samples, n_rejected=rejected, flagged=True,
        )
    log_w = log_w - np.max(log_w)
    w = np.exp(log_w)
    w = w / np.sum(w)
    ess = float(1.0 / np.sum(w**2))
    flagged = ess < 0.1 * coeffs.shape[0]
    return SpectralEnsemble(
        coeffs=coeffs, weights=w, log_weights=log_w, ess=ess,
        n_modes=n_modes, n_requested=samples, n_rejected=rejected, flagged=flagged,
    )


def sample_spectral_1d(
    n_modes: int, B: float, p: int, samples: int, seed: int
) -> SpectralEnsemble:
    """Weighted ensemble for the focusing interaction exp((1/(p+1)) ||u||_{p+1}^{p+1}).

    p must be 3 or 5. Effective sample size below 10% of the draws is
    flagged on the result.
    """
    if n_modes < 1:
        raise ValueError("need at least one side mode")
    if p not in (3, 5):
        raise ValueError(f"interaction power p must be 3 or 5, got {p}")
    if B <= 0:
        raise ValueError("mass bound B must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    coeffs, rejected = _draw_constrained_gaussian(rng, n_modes, B, samples, sigma_scale=1.0)
    if coeffs.shape[0] == 0:
        return _finalize(coeffs, np.zeros(0), n_modes, samples, rejected)
    M = _grid_size(n_modes, p + 1)
    u = evaluate_modes_on_grid(coeffs, M)
    norm_pp = np.mean(np.abs(u) ** (p + 1), axis=1)  # exact integral over the circle
    log_w = norm_pp / (p + 1.0)
    return _finalize(coeffs, log_w, n_modes, samples, rejected)


def saturable_spectral_ensemble(
    n_modes: int,
    B: float,
    beta: float,
    samples: int,
    seed: int,
    focusing: bool = True,
    box_length: float = 1.0,
) -> SpectralEnsemble:
    """Mixed ensemble with the saturable interaction at inverse temperature beta.

    States live on a periodic box of length `box_length` with modes
    e^{2 pi i k x / box_length} and mass constraint integral |u|^2 <= B^2.
    The Gaussian part matches exp(-(beta/2) integral |u'|^2) and the
    weight is exp(+-(beta/2) integral G(|u|^2)) with G(a) = a - log(1+a);
    the sign flips for the defocusing control. On the unit circle the
    bounded slope of G (sup G' = 1) never beats the (2 pi)^2 spectral
    gap, so a box of several soliton widths is required for a localized
    ground state to exist at all.
    """
    if n_modes < 1 or samples < 1:
        raise ValueError("need n_modes >= 1 and samples >= 1")
    if beta <= 0 or B <= 0 or box_length <= 0:
        raise ValueError("beta, B, box_length must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    coeffs, rejected = _draw_constrained_gaussian(
        rng, n_modes, B / math.sqrt(box_length), samples,
        sigma_scale=math.sqrt(box_length / beta),
    )
    if coeffs.shape[0] == 0:
        return _finalize(coeffs, np.zeros(0), n_modes, samples, rejected)
    # G is not polynomial; oversample generously and rely on spectral decay
    M = max(_grid_size(n_modes, 8), 256)
    u = evaluate_modes_on_grid(coeffs, M)
    a = np.abs(u) ** 2
    G = np.mean(a - np.log1p(a), axis=1) * box_length
    sign = 1.0 if focusing else -1.0
    log_w = sign * 0.5 * beta * G
    return _finalize(coeffs, log_w, n_modes, samples, rejected)
