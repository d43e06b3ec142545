"""Closed-form predictions for the mass-cutoff lattice Gibbs ensemble.

The limiting free energy of the cutoff ensemble is constant, log(B pi e),
up to the critical coupling theta_c, then picks up g(beta B^2), where g
is an explicit strictly increasing function on [2, inf) with a unique
real zero theta_c ~ 2.455407. Above the threshold a single site carries
the deterministic mass fraction a/B and the energy density approaches
-a^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "g_theta",
    "critical_theta",
    "free_energy",
    "condensate_fraction",
    "continuum_exponent",
    "PhasePoint",
    "classify_phase",
]


def g_theta(theta: float) -> float:
    """theta/2 - 1/2 + (theta/2) sqrt(1 - 2/theta) + log(1/2 - (1/2) sqrt(1 - 2/theta)).

    Defined for theta >= 2. Negative below its unique root, positive
    above; the branch on (2, theta_c) is the metastable condensate and is
    exposed for diagnostics only, the free energy never uses it there.
    """
    if theta < 2.0:
        raise ValueError(f"g(theta) requires theta >= 2, got {theta}")
    root = math.sqrt(1.0 - 2.0 / theta)
    return 0.5 * theta - 0.5 + 0.5 * theta * root + math.log(0.5 - 0.5 * root)


_theta_c_cache: float | None = None


def critical_theta(tol: float = 1e-6) -> float:
    """Unique real zero of g, located by bisection on [2, 3].

    The root is cached at 1e-12 tolerance on first use, so repeated calls
    are O(1).
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    global _theta_c_cache
    if _theta_c_cache is None:
        lo, hi = 2.0, 3.0  # g(2) < 0 < g(3) brackets the root
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if g_theta(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        _theta_c_cache = 0.5 * (lo + hi)
    return _theta_c_cache


def free_energy(beta: float, B: float) -> float:
    """Limiting (1/n) log Z: log(B pi e), plus g(beta B^2) above threshold."""
    if beta < 0:
        raise ValueError(f"free energy is defined for beta >= 0, got {beta}")
    if B <= 0:
        raise ValueError(f"mass cutoff B must be positive, got {B}")
    base = math.log(B * math.pi * math.e)
    theta = beta * B * B
    if theta <= critical_theta():
        return base
    return base + g_theta(theta)


def condensate_fraction(beta: float, B: float) -> tuple[float, float]:
    """Condensate mass a = B/2 + (B/2) sqrt(1 - 2/(beta B^2)) and the
    predicted energy density -a^2.

    Requires beta B^2 >= 2 for a real root; the value is physically
    meaningful only above the critical threshold.
    """
    if B <= 0:
        raise ValueError(f"mass cutoff B must be positive, got {B}")
    theta = beta * B * B
    if theta < 2.0:
        raise ValueError(f"condensate fraction requires beta B^2 >= 2, got {theta}")
    a = 0.5 * B + 0.5 * B * math.sqrt(1.0 - 2.0 / theta)
    return a, -a * a


def continuum_exponent(s: float) -> float:
    """Order alpha(s) of the continuum dispersion for lattice decay s.

    alpha = s on 1/2 < s < 1 and alpha = 1 for s >= 1. At s = 1 the
    continuum limit carries an extra logarithmic factor in its scaling
    constants; experiment outputs record that caveat.
    """
    if s <= 0.5:
        raise ValueError(f"the piecewise law covers s > 1/2, got {s}")
    return s if s < 1.0 else 1.0


@dataclass(frozen=True)
class PhasePoint:
    beta: float
    B: float
    theta: float
    phase: str  # "subcritical", "critical", "supercritical"


def classify_phase(beta: float, B: float, root_tol: float = 1e-9) -> PhasePoint:
    """Phase of (beta, B) relative to the critical coupling."""
    if beta < 0 or B <= 0:
        raise ValueError("need beta >= 0 and B > 0")
    theta = beta * B * B
    tc = critical_theta()
    if abs(theta - tc) <= root_tol:
        phase = "critical"
    elif theta > tc:
        phase = "supercritical"
    else:
        phase = "subcritical"
    return PhasePoint(beta=beta, B=B, theta=theta, phase=phase)
