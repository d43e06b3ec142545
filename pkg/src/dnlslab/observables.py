"""Conserved quantities, norms, and condensation statistics.

Three Hamiltonian conventions are supported:

``standard``
    H = <Af, f> + (2 kappa/(p+1)) sum |f_k|^(p+1) + sum V_k |f_k|^2,
    with A the negated coupling operator, so the focusing cubic case
    reads -(Lap f, f) - (1/2) sum |f_k|^4.
``site_normalized``
    The per-site normalized energy of the lattice Gibbs ensemble,
    H = (2 c/(n h^2)) sum_edges |f_k - f_j|^2 - (1/n) sum |f_k|^4,
    cubic focusing only. The edge sum counts each undirected edge once
    (c = kinetic_pair_factor = 1), which makes H exactly (2/n) times the
    standard conserved energy; c = 2 reproduces an ordered-pair reading.
``long_range``
    H = (h^2/4) sum_{j != k} |f_k - f_j|^2 / |x_k - x_j|^(1+2s)
        + (kappa h/(p+1)) sum |f_k|^(p+1).

A saturable nonlinearity g(a) = a/(1+a) replaces the power term by the
integral-weighted site sum -(h^d/2) sum G(|f_k|^2), G(a) = a - log(1+a),
with the kinetic part carrying the same h^d/2 weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import CouplingKernel, Wavefunction, apply_coupling_spectral, neighbor_indices

__all__ = [
    "Nonlinearity",
    "ModelSpec",
    "CondensationStats",
    "power_nonlinearity",
    "saturable_nonlinearity",
    "power",
    "hamiltonian",
    "kinetic_quadform",
    "top_two_masses",
    "discrete_h1",
    "mixed_norm",
]


@dataclass(frozen=True)
class Nonlinearity:
    kind: str  # "power" or "saturable"
    p: float = 3.0
    kappa: float = -1.0


def power_nonlinearity(p: float = 3.0, kappa: float = -1.0) -> Nonlinearity:
    if p < 1:
        raise ValueError(f"nonlinearity power p must be >= 1, got {p}")
    if kappa not in (-1.0, 1.0, -1, 1):
        raise ValueError(f"kappa must be +1 or -1, got {kappa}")
    return Nonlinearity(kind="power", p=float(p), kappa=float(kappa))


def saturable_nonlinearity() -> Nonlinearity:
    """g(|u|^2) = |u|^2 / (1 + |u|^2), always focusing."""
    return Nonlinearity(kind="saturable", p=3.0, kappa=-1.0)


@dataclass(frozen=True)
class ModelSpec:
    """Coupling, nonlinearity, optional potential, and energy convention."""

    kernel: CouplingKernel
    nonlinearity: Nonlinearity
    potential: np.ndarray | None = None
    convention: str = "standard"
    kinetic_pair_factor: float = 1.0

    def __post_init__(self):
        if self.convention not in ("standard", "site_normalized", "long_range"):
            raise ValueError(f"unknown hamiltonian convention {self.convention!r}")
        if self.potential is not None:
            pot = np.asarray(self.potential, dtype=float)
            if pot.shape != (self.kernel.lattice.n,):
                raise ValueError("potential length does not match lattice site count")
            object.__setattr__(self, "potential", pot)
        if self.convention == "site_normalized":
            nl = self.nonlinearity
            if nl.kind != "power" or nl.p != 3.0 or nl.kappa != -1.0:
                raise ValueError("site_normalized convention requires the focusing cubic nonlinearity")
            if self.potential is not None:
                raise ValueError("site_normalized convention does not take a potential")
        if self.convention == "long_range":
            if self.kernel.kind != "long_range":
                raise ValueError("long_range convention requires a long-range kernel")
            if self.potential is not None:
                raise ValueError("long_range convention does not take a potential")

    @property
    def lattice(self):
        return self.kernel.lattice


@dataclass(frozen=True)
class CondensationStats:
    """Largest and second largest site masses of |f_k|^2."""

    M1: float
    M2: float
    argmax_site: int
    N: float
    H: float
    mass_fraction: float


def power(f: Wavefunction) -> float:
    """Total power N(f) = sum |f_k|^2."""
    return float(np.sum(np.abs(f.values) ** 2))


def kinetic_quadform(kernel: CouplingKernel, f: Wavefunction) -> float:
    """<Af, f> with A the negated coupling operator; real and >= 0."""
    af = apply_coupling_spectral(kernel, f) if f.lattice.kind == "torus" else None
    if af is None:
        raise ValueError("kinetic quadratic form requires a torus lattice")
    return float(-np.real(np.vdot(f.values, af.values)))


def _saturable_site_sum(f: Wavefunction) -> float:
    a = np.abs(f.values) ** 2
    return float(np.sum(a - np.log1p(a)))


def hamiltonian(model: ModelSpec, f: Wavefunction) -> float:
    """Energy of f under the model's convention."""
    if model.lattice != f.lattice:
        raise ValueError("model and wavefunction live on different lattices")
    lat = f.lattice
    absf2 = np.abs(f.values) ** 2
    nl = model.nonlinearity

    if nl.kind == "saturable":
        # exact discretization of (1/2) integral of |grad u|^2 - G(|u|^2)
        w = lat.h**lat.d
        h_val = 0.5 * w * (kinetic_quadform(model.kernel, f) - _saturable_site_sum(f))
        if model.potential is not None:
            h_val += w * float(np.sum(model.potential * absf2))
        return h_val

    if model.convention == "standard":
        h_val = kinetic_quadform(model.kernel, f)
        h_val += (2.0 * nl.kappa / (nl.p + 1.0)) * float(np.sum(absf2 ** ((nl.p + 1.0) / 2.0)))
        if model.potential is not None:
            h_val += float(np.sum(model.potential * absf2))
        return h_val

    if model.convention == "site_normalized":
        n = lat.n
        kin = kinetic_quadform(model.kernel, f)  # equals sum_edges |f_k - f_j|^2 / h^2
        return (2.0 * model.kinetic_pair_factor / n) * kin - float(np.sum(absf2**2)) / n

    # long_range: kinetic (h^2/4) double sum equals (h/2) <Af, f>
    h_val = 0.5 * lat.h * kinetic_quadform(model.kernel, f)
    h_val += (nl.kappa * lat.h / (nl.p + 1.0)) * float(np.sum(absf2 ** ((nl.p + 1.0) / 2.0)))
    return h_val


def top_two_masses(f: Wavefunction, model: ModelSpec | None = None) -> CondensationStats:
    """M1 >= M2 from (|f_k|^2); ties broken by lowest site index."""
    m = np.abs(f.values) ** 2
    k1 = int(np.argmax(m))  # argmax returns the first maximizer
    M1 = float(m[k1])
    if m.size > 1:
        m2 = m.copy()
        m2[k1] = -np.inf
        M2 = float(np.max(m2))
    else:
        M2 = 0.0
    N = float(np.sum(m))
    H = hamiltonian(model, f) if model is not None else math.nan
    frac = M1 / N if N > 0 else 0.0
    return CondensationStats(M1=M1, M2=M2, argmax_site=k1, N=N, H=H, mass_fraction=frac)


def discrete_h1(f: Wavefunction) -> float:
    """(1/n) sum |f_k|^2 + (1/n) sum_edges |(f_k - f_j)/h|^2 on the torus."""
    lat = f.lattice
    if lat.kind != "torus":
        raise ValueError("discrete H1 norm is defined on torus lattices")
    nbrs = neighbor_indices(lat)
    v = f.values
    grad = 0.0
    for c in range(nbrs.shape[1]):
        grad += float(np.sum(np.abs(v - v[nbrs[:, c]]) ** 2))
    grad *= 0.5  # each undirected edge appears twice in the directed table
    return (float(np.sum(np.abs(v) ** 2)) + grad / lat.h**2) / lat.n


def _lr_norm(values: np.ndarray, r: float) -> float:
    if math.isinf(r):
        return float(np.max(np.abs(values)))
    return float(np.sum(np.abs(values) ** r) ** (1.0 / r))


def mixed_norm(trajectory, q: float, r: float) -> float:
    """Space-time norm: l^r over sites, L^q (trapezoidal) over time.

    trajectory is a sequence of (t, Wavefunction) with strictly
    increasing time stamps.
    """
    if q < 1 or r < 1:
        raise ValueError("exponents must be >= 1")
    ts = np.array([t for t, _ in trajectory], dtype=float)
    if ts.size == 0:
        raise ValueError("empty trajectory")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("time stamps must be strictly increasing")
    vals = np.array([_lr_norm(f.values, r) for _, f in trajectory])
    if math.isinf(q):
        return float(np.max(vals))
    if ts.size < 2:
        raise ValueError("finite-q time norm needs at least 2 snapshots")
    return float(np.trapezoid(vals**q, ts) ** (1.0 / q))
