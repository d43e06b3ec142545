import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnlslab.lattice import (
    Wavefunction,
    apply_coupling,
    apply_coupling_spectral,
    build_chain,
    build_torus,
    coupling_symbol,
    nearest_neighbor_kernel,
    neighbor_indices,
    periodize_kernel,
    zero_kernel,
)


def random_wave(lattice, seed=0):
    rng = np.random.default_rng(seed)
    return Wavefunction(
        rng.standard_normal(lattice.n) + 1j * rng.standard_normal(lattice.n), lattice
    )


def brute_force_nn(f):
    """Double-loop nearest-neighbor Laplacian via modular coordinate arithmetic."""
    lat = f.lattice
    L, d, h = lat.L, lat.d, lat.h
    out = np.zeros(lat.n, dtype=complex)
    for k in range(lat.n):
        coords = list(np.unravel_index(k, lat.shape))
        acc = 0.0 + 0.0j
        for ax in range(d):
            for sgn in (+1, -1):
                nb = coords.copy()
                nb[ax] = (nb[ax] + sgn) % L
                j = int(np.ravel_multi_index(nb, lat.shape))
                acc += f.values[j] - f.values[k]
        out[k] = acc / h**2
    return out


def brute_force_long_range(f, coeffs):
    lat = f.lattice
    out = np.zeros(lat.n, dtype=complex)
    for k in range(lat.n):
        acc = 0.0 + 0.0j
        for j in range(lat.n):
            if j != k:
                acc += coeffs[(j - k) % lat.L] * (f.values[j] - f.values[k])
        out[k] = lat.h * acc
    return out


class TestBuildTorus:
    def test_unit_torus_3d(self):
        lat = build_torus(3, 8)
        assert lat.n == 512
        assert lat.h == 0.125
        assert lat.nh2 == pytest.approx(8.0)

    def test_chain_like_torus(self):
        lat = build_torus(1, 4096, h=1.0)
        assert lat.n == 4096 and lat.kind == "torus"

    def test_errors(self):
        with pytest.raises(ValueError):
            build_torus(0, 8)
        with pytest.raises(ValueError):
            build_torus(1, 1)
        with pytest.raises(ValueError):
            build_torus(3, 8, h=-0.1)
        with pytest.raises(ValueError):
            build_torus(4, 2**9)  # 2^36 sites overflow index capacity

    def test_chain(self):
        ch = build_chain(16)
        assert ch.kind == "chain" and ch.n == 16
        with pytest.raises(ValueError):
            neighbor_indices(ch)


class TestApplyCoupling:
    def test_constant_annihilated(self):
        lat = build_torus(2, 6, h=0.5)
        ker = nearest_neighbor_kernel(lat)
        f = Wavefunction(np.full(lat.n, 2.0 - 1.0j), lat)
        assert np.allclose(apply_coupling(ker, f).values, 0.0)

    def test_ring_stencil(self):
        lat = build_torus(1, 4, h=1.0)
        ker = nearest_neighbor_kernel(lat)
        f = Wavefunction(np.array([1, 0, 0, 0], dtype=complex), lat)
        assert np.allclose(apply_coupling(ker, f).values, [-2, 1, 0, 1])

    def test_spectral_equals_direct_nn(self):
        lat = build_torus(1, 16, h=0.37)
        ker = nearest_neighbor_kernel(lat)
        f = random_wave(lat, seed=3)
        direct = apply_coupling(ker, f).values
        spectral = apply_coupling_spectral(ker, f).values
        brute = brute_force_nn(f)
        assert np.max(np.abs(direct - spectral)) < 1e-10
        assert np.max(np.abs(brute - direct)) < 1e-10

    def test_lattice_mismatch(self):
        ker = nearest_neighbor_kernel(build_torus(1, 8))
        f = random_wave(build_torus(1, 16))
        with pytest.raises(ValueError):
            apply_coupling(ker, f)

    def test_zero_kernel(self):
        lat = build_torus(1, 8)
        f = random_wave(lat)
        assert np.all(apply_coupling(zero_kernel(lat), f).values == 0)


class TestCouplingSymbol:
    def test_zero_mode_exact(self):
        for ker in (
            nearest_neighbor_kernel(build_torus(2, 6, h=0.2)),
            periodize_kernel(0.75, build_torus(1, 16)),
        ):
            assert ker.symbol[0] == 0.0

    def test_ring_mode_value(self):
        lat = build_torus(1, 4, h=1.0)
        sym = coupling_symbol(nearest_neighbor_kernel(lat), lat)
        # m=2: 2 (cos(pi) - 1) = -4
        assert sym[2] == pytest.approx(-4.0, abs=1e-14)

    def test_nonpositive(self):
        for d, L, h in [(1, 9, 0.3), (2, 5, 1.7), (3, 4, 0.25)]:
            lat = build_torus(d, L, h=h)
            assert np.all(nearest_neighbor_kernel(lat).symbol <= 0)

    def test_chain_rejected(self):
        lat = build_torus(1, 8)
        ker = nearest_neighbor_kernel(lat)
        with pytest.raises(ValueError):
            coupling_symbol(ker, build_chain(8))


class TestPeriodizeKernel:
    def test_fast_decay_matches_minimal_image(self):
        # at s=10 image sums die off; tail bound (2s)^-1 (Lh)^-2s is tiny
        lat = build_torus(1, 8, h=1.0)
        ker = periodize_kernel(10.0, lat)
        r = np.arange(1, 8)
        minimal = np.minimum(r, 8 - r).astype(float) ** (-21.0)
        assert np.max(np.abs(ker.coeffs[1:] - minimal)) < 1e-12
        assert ker.tail_bound < 1e-12

    def test_even_symmetry_exact(self):
        lat = build_torus(1, 16, h=0.21)
        ker = periodize_kernel(0.6, lat)
        for r in range(1, 16):
            assert ker.coeffs[r] == ker.coeffs[(16 - r) % 16]

    def test_errors(self):
        lat = build_torus(1, 16)
        with pytest.raises(ValueError):
            periodize_kernel(-0.5, lat)
        with pytest.raises(ValueError):
            periodize_kernel(0.75, lat, tol=0.0)
        with pytest.raises(ValueError):
            periodize_kernel(0.75, build_torus(2, 4))

    def test_spectral_equals_direct_long_range(self):
        lat = build_torus(1, 32, h=1.0 / 32)
        ker = periodize_kernel(0.75, lat)
        f = random_wave(lat, seed=11)
        direct = apply_coupling(ker, f).values
        spectral = apply_coupling_spectral(ker, f).values
        brute = brute_force_long_range(f, ker.coeffs)
        assert np.max(np.abs(direct - spectral)) < 1e-10 * np.max(np.abs(direct))
        assert np.max(np.abs(brute - direct)) < 1e-10 * np.max(np.abs(direct))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), kind=st.sampled_from(["nn", "lr"]))
def test_self_adjoint_and_negative(seed, kind):
    lat = build_torus(1, 16, h=0.4) if kind == "lr" else build_torus(2, 8, h=0.4)
    ker = periodize_kernel(0.8, lat) if kind == "lr" else nearest_neighbor_kernel(lat)
    rng = np.random.default_rng(seed)
    f = Wavefunction(rng.standard_normal(lat.n) + 1j * rng.standard_normal(lat.n), lat)
    g = Wavefunction(rng.standard_normal(lat.n) + 1j * rng.standard_normal(lat.n), lat)
    af = apply_coupling(ker, f).values
    ag = apply_coupling(ker, g).values
    lhs = np.vdot(ag, f.values)
    rhs = np.vdot(g.values, af)
    scale = np.linalg.norm(f.values) * np.linalg.norm(g.values)
    assert abs(lhs - rhs) < 1e-10 * max(scale, 1.0)
    quad = np.vdot(f.values, af)
    norm2 = np.linalg.norm(f.values) ** 2
    assert quad.real <= 1e-12 * norm2
    assert abs(quad.imag) <= 1e-12 * norm2


def test_continuum_consistency_order():
    # plane wave e^{2 pi i x}: coupling tends to -4 pi^2 f at second order in h
    errs = []
    hs = [1 / 16, 1 / 32, 1 / 64]
    for h in hs:
        L = int(round(1 / h))
        lat = build_torus(1, L, h=h)
        ker = nearest_neighbor_kernel(lat)
        x = np.arange(L) * h
        f = Wavefunction(np.exp(2j * np.pi * x), lat)
        out = apply_coupling(ker, f).values
        target = -4.0 * np.pi**2 * f.values
        errs.append(np.max(np.abs(out - target)))
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert order >= 1.9


def test_wavefunction_validation():
    lat = build_torus(1, 8)
    with pytest.raises(ValueError):
        Wavefunction(np.zeros(7, dtype=complex), lat)
    bad = np.zeros(8, dtype=complex)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        Wavefunction(bad, lat)
