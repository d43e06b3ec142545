"""Discrete domains and dispersive coupling operators.

A lattice is a periodic torus {0,..,L-1}^d (or an open 1D chain) with
spacing h. Coupling operators are stored together with their exact
eigenvalues in the discrete Fourier basis ("symbol"), so translation
invariant applications can be done either by direct summation or
spectrally. Symbols are always computed in difference form, which makes
the zero mode exactly 0 and every entry nonpositive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LatticeConfig",
    "Wavefunction",
    "CouplingKernel",
    "build_torus",
    "build_chain",
    "nearest_neighbor_kernel",
    "zero_kernel",
    "periodize_kernel",
    "coupling_symbol",
    "apply_coupling",
    "apply_coupling_spectral",
    "neighbor_indices",
    "site_coordinates",
]

_MAX_SITES = 2**31 - 1


@dataclass(frozen=True)
class LatticeConfig:
    """Geometry of the discrete domain."""

    kind: str  # "torus" or "chain"
    d: int
    L: int
    h: float
    n: int

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.L,) * self.d

    @property
    def nh2(self) -> float:
        """n*h^2, the quantity that must grow for high-dimensional limits."""
        return self.n * self.h**2


def build_torus(d: int, L: int, h: float | None = None) -> LatticeConfig:
    """Periodic torus with n = L^d sites indexed row-major over {0,..,L-1}^d.

    Default spacing h = 1/L puts the lattice on the unit torus.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if L < 2:
        raise ValueError(f"sites per side must be >= 2, got {L}")
    if h is None:
        h = 1.0 / L
    if h <= 0:
        raise ValueError(f"spacing h must be positive, got {h}")
    n = L**d
    if n > _MAX_SITES:
        raise ValueError(f"L^d = {n} exceeds index capacity")
    return LatticeConfig(kind="torus", d=d, L=L, h=float(h), n=n)


def build_chain(L: int, h: float = 1.0) -> LatticeConfig:
    """Open 1D chain with n = L sites. No spectral representation."""
    if L < 2:
        raise ValueError(f"sites must be >= 2, got {L}")
    if h <= 0:
        raise ValueError(f"spacing h must be positive, got {h}")
    return LatticeConfig(kind="chain", d=1, L=L, h=float(h), n=L)


@dataclass
class Wavefunction:
    """Complex field over the lattice sites, stored flat in site order."""

    values: np.ndarray
    lattice: LatticeConfig

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 1 or v.shape[0] != self.lattice.n:
            raise ValueError(
                f"wavefunction length {v.shape} does not match lattice n={self.lattice.n}"
            )
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValueError("wavefunction entries must be finite")
        self.values = v

    def grid(self) -> np.ndarray:
        """Values reshaped to the lattice grid (row-major)."""
        return self.values.reshape(self.lattice.shape)

    def copy(self) -> "Wavefunction":
        return Wavefunction(self.values.copy(), self.lattice)


def site_coordinates(lattice: LatticeConfig) -> np.ndarray:
    """Physical coordinates x_k = h * (integer coordinates), shape (n, d)."""
    idx = np.indices(lattice.shape).reshape(lattice.d, lattice.n).T
    return idx * lattice.h


def neighbor_indices(lattice: LatticeConfig) -> np.ndarray:
    """Nearest-neighbor site indices, shape (n, 2d), one column per direction.

    On a torus of side 2 the two directions along an axis reach the same
    site; that multiplicity is intentional and consistent with the
    difference Laplacian.
    """
    if lattice.kind != "torus":
        raise ValueError("neighbor table is defined for torus lattices")
    idx = np.arange(lattice.n).reshape(lattice.shape)
    cols = []
    for ax in range(lattice.d):
        cols.append(np.roll(idx, -1, axis=ax).ravel())
        cols.append(np.roll(idx, +1, axis=ax).ravel())
    return np.ascontiguousarray(np.stack(cols, axis=1).astype(np.int64))


@dataclass(frozen=True)
class CouplingKernel:
    """Dispersive coupling operator tied to a lattice.

    kind "nearest_neighbor": the difference Laplacian
        (Af)_k = h^-2 sum_{j~k} (f_j - f_k).
    kind "long_range" (1D torus): the negative-semidefinite form of the
        long-range difference sum,
        (Af)_k = h sum_{j!=k} c(k-j) (f_j - f_k),
    with c the periodized inverse-power weights. The evolution operator
    used by dynamics is -A in both cases.
    kind "zero": decoupled sites (anti-continuum limit).

    symbol holds the n eigenvalues of A in the discrete Fourier basis,
    flattened row-major to match site indexing; all entries are <= 0 and
    the zero mode is exactly 0.
    """

    kind: str
    lattice: LatticeConfig
    symbol: np.ndarray = field(repr=False)
    s: float | None = None
    coeffs: np.ndarray | None = field(default=None, repr=False)
    tail_bound: float = 0.0

    def scaled(self, factor: float) -> "CouplingKernel":
        """Same operator multiplied by a positive constant."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        coeffs = None if self.coeffs is None else self.coeffs * factor
        return CouplingKernel(
            kind=self.kind,
            lattice=self.lattice,
            symbol=self.symbol * factor,
            s=self.s,
            coeffs=coeffs,
            tail_bound=self.tail_bound * factor,
        )


def _nn_symbol(lattice: LatticeConfig) -> np.ndarray:
    # lam(m) = (2/h^2) sum_i (cos(2 pi m_i / L) - 1), exactly 0 at m = 0
    L, d, h = lattice.L, lattice.d, lattice.h
    axis = (2.0 / h**2) * (np.cos(2.0 * np.pi * np.arange(L) / L) - 1.0)
    sym = np.zeros(lattice.shape)
    for i in range(d):
        shape = [1] * d
        shape[i] = L
        sym = sym + axis.reshape(shape)
    return sym.ravel()


def nearest_neighbor_kernel(lattice: LatticeConfig) -> CouplingKernel:
    """Difference Laplacian on a torus."""
    if lattice.kind != "torus":
        raise ValueError("spectral nearest-neighbor kernel requires a torus")
    return CouplingKernel(kind="nearest_neighbor", lattice=lattice, symbol=_nn_symbol(lattice))


def zero_kernel(lattice: LatticeConfig) -> CouplingKernel:
    """Decoupled sites; every eigenvalue is exactly zero."""
    return CouplingKernel(kind="zero", lattice=lattice, symbol=np.zeros(lattice.n))


def periodize_kernel(s: float, lattice: LatticeConfig, tol: float = 1e-12) -> CouplingKernel:
    """Periodized long-range weights c(r) = sum_w |(r + wL) h|^-(1+2s).

    Image shells are added until the integral tail bound drops below tol;
    the final bound is recorded on the kernel. Weights are mirrored so
    c(r) = c(-r) holds exactly.
    """
    if lattice.kind != "torus" or lattice.d != 1:
        raise ValueError("long-range kernels are defined on 1D torus lattices")
    if s <= 0:
        raise ValueError(f"decay exponent s must be positive, got {s}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    L, h = lattice.L, lattice.h
    q = 1.0 + 2.0 * s

    # tail over |w| > W bounded by comparison with the integral of |x|^-(1+2s)
    def tail(W: int) -> float:
        return 2.0 * (L * h) ** (-q) * (W ** (-q) + W ** (-2.0 * s) / (2.0 * s))

    W = 1
    while tail(W) > tol and W < 10_000_000:
        W += max(1, W // 4)
    half = L // 2
    r = np.arange(1, half + 1, dtype=np.float64)
    c_half = np.zeros(half)
    for w in range(-W, W + 1):
        c_half += np.abs((r + w * L) * h) ** (-q)
    coeffs = np.zeros(L)
    coeffs[1 : half + 1] = c_half
    # mirror exactly: c[L-r] = c[r]
    for rr in range(1, half + 1):
        coeffs[L - rr] = coeffs[rr]

    # symbol in difference form: lam(m) = h sum_r c(r) (cos(2 pi m r / L) - 1) <= 0
    m = np.arange(L)
    ang = 2.0 * np.pi * np.outer(m, np.arange(1, L)) / L
    sym = h * ((np.cos(ang) - 1.0) @ coeffs[1:])
    return CouplingKernel(
        kind="long_range",
        lattice=lattice,
        symbol=sym,
        s=float(s),
        coeffs=coeffs,
        tail_bound=tail(W),
    )


def coupling_symbol(kernel: CouplingKernel, lattice: LatticeConfig) -> np.ndarray:
    """Eigenvalues of the coupling operator in the discrete Fourier basis."""
    if kernel.lattice != lattice:
        raise ValueError("kernel was built for a different lattice")
    if lattice.kind != "torus":
        raise ValueError("chain lattices have no periodic spectral representation")
    return kernel.symbol


def _check_same_lattice(kernel: CouplingKernel, f: Wavefunction) -> None:
    if kernel.lattice != f.lattice:
        raise ValueError("kernel and wavefunction live on different lattices")


def apply_coupling(kernel: CouplingKernel, f: Wavefunction) -> Wavefunction:
    """Apply the coupling operator by direct summation."""
    _check_same_lattice(kernel, f)
    lat = f.lattice
    if kernel.kind == "zero":
        return Wavefunction(np.zeros(lat.n, dtype=complex), lat)
    if kernel.kind == "nearest_neighbor":
        g = f.values.reshape(lat.shape)
        out = np.zeros_like(g)
        for ax in range(lat.d):
            out += np.roll(g, -1, axis=ax) + np.roll(g, +1, axis=ax) - 2.0 * g
        return Wavefunction(out.ravel() / lat.h**2, lat)
    if kernel.kind == "long_range":
        v = f.values
        out = np.zeros_like(v)
        c = kernel.coeffs
        for r in range(1, lat.L):
            if c[r] != 0.0:
                out += c[r] * (np.roll(v, -r) - v)
        return Wavefunction(lat.h * out, lat)
    raise ValueError(f"unknown kernel kind {kernel.kind!r}")


def apply_coupling_spectral(kernel: CouplingKernel, f: Wavefunction) -> Wavefunction:
    """Apply the coupling operator via its Fourier symbol."""
    _check_same_lattice(kernel, f)
    lat = f.lattice
    if lat.kind != "torus":
        raise ValueError("spectral application requires a torus")
    shape = lat.shape
    fhat = np.fft.fftn(f.values.reshape(shape))
    out = np.fft.ifftn(kernel.symbol.reshape(shape) * fhat)
    return Wavefunction(out.ravel(), lat)
