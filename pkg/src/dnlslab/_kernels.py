"""Compiled inner loops for the lattice Metropolis sampler.

All randomness is drawn outside these functions from seeded numpy
generators and passed in as arrays, so results are bit-reproducible and
independent of the JIT. Energies are the site-normalized convention,

    H = kin_coef * sum_edges |f_k - f_j|^2 - (1/n) sum |f_k|^4,

with kin_coef = 2 * pair_factor / (n h^2), tracked incrementally and
refreshed from scratch by the caller at regular intervals.
"""

import numpy as np
from numba import njit

__all__ = ["site_sweep", "transfer_move", "swap_move", "site_energy_terms", "full_energy"]


@njit(cache=True, nogil=True)
def full_energy(vals, nbrs, kin_coef, n):
    kin = 0.0
    quart = 0.0
    deg = nbrs.shape[1]
    for k in range(n):
        fk = vals[k]
        quart += abs(fk) ** 4
        for c in range(deg):
            kin += abs(fk - vals[nbrs[k, c]]) ** 2
    return kin_coef * 0.5 * kin - quart / n  # directed pairs counted twice


@njit(cache=True, nogil=True)
def site_energy_terms(vals, nbrs, k, fk, kin_coef, n):
    """Kinetic (incident edges once) plus quartic share of site k holding value fk."""
    acc = 0.0
    for c in range(nbrs.shape[1]):
        acc += abs(fk - vals[nbrs[k, c]]) ** 2
    return kin_coef * acc - abs(fk) ** 4 / n


@njit(cache=True, nogil=True)
def site_sweep(vals, nbrs, beta, Bn, kin_coef, n, sigma, gre, gim, uacc, N, H):
    """One deterministic-scan sweep of single-site Gaussian perturbations.

    Proposals that would push the total power above Bn are rejected
    outright. Returns the updated (N, H, accept_count).
    """
    acc = 0
    for k in range(n):
        fk = vals[k]
        fp = fk + sigma * complex(gre[k], gim[k])
        dN = abs(fp) ** 2 - abs(fk) ** 2
        if N + dN > Bn:
            continue
        dH = site_energy_terms(vals, nbrs, k, fp, kin_coef, n) - site_energy_terms(
            vals, nbrs, k, fk, kin_coef, n
        )
        if dH <= 0.0 or uacc[k] < np.exp(-beta * dH):
            vals[k] = fp
            N += dN
            H += dH
            acc += 1
    return N, H, acc


@njit(cache=True, nogil=True)
def transfer_move(vals, nbrs, beta, kin_coef, n, j, k, ufrac, uphase, uacc, H):
    """Move a uniform fraction of site j's mass to site k, phases preserved.

    Total power is unchanged, so the mass cutoff stays satisfied. The
    proposal density of the transferred amount is 1/m_j forward and
    1/(m_k + t) backward, giving the Hastings factor m_j / (m_k + t).
    An empty destination receives the passed-in phase.
    """
    if j == k:
        return H, False
    mj = abs(vals[j]) ** 2
    mk = abs(vals[k]) ** 2
    if mj <= 0.0:
        return H, False
    t = ufrac * mj
    scale_j = np.sqrt(max(mj - t, 0.0) / mj)
    fpj = vals[j] * scale_j
    if mk > 0.0:
        fpk = vals[k] * np.sqrt((mk + t) / mk)
    else:
        fpk = np.sqrt(t) * complex(np.cos(uphase), np.sin(uphase))
    old_j = vals[j]
    old_k = vals[k]
    dH = site_energy_terms(vals, nbrs, j, fpj, kin_coef, n) - site_energy_terms(
        vals, nbrs, j, old_j, kin_coef, n
    )
    vals[j] = fpj  # sequential two-site delta handles adjacent j, k exactly
    dH += site_energy_terms(vals, nbrs, k, fpk, kin_coef, n) - site_energy_terms(
        vals, nbrs, k, old_k, kin_coef, n
    )
    ratio = np.exp(-beta * dH) * mj / (mk + t)
    if uacc < ratio:
        vals[k] = fpk
        return H + dH, True
    vals[j] = old_j
    return H, False


@njit(cache=True, nogil=True)
def swap_move(vals, nbrs, beta, kin_coef, n, j, k, uacc, H):
    """Exchange the values of two sites via Metropolis.

    The power and quartic terms are permutation invariant; only the
    kinetic mismatch of the two neighborhoods enters the acceptance.
    """
    if j == k:
        return H, True
    old_j = vals[j]
    old_k = vals[k]
    dH = site_energy_terms(vals, nbrs, j, old_k, kin_coef, n) - site_energy_terms(
        vals, nbrs, j, old_j, kin_coef, n
    )
    vals[j] = old_k
    dH += site_energy_terms(vals, nbrs, k, old_j, kin_coef, n) - site_energy_terms(
        vals, nbrs, k, old_k, kin_coef, n
    )
    if dH <= 0.0 or uacc < np.exp(-beta * dH):
        vals[k] = old_j
        return H + dH, True
    vals[j] = old_j
    return H, False
