import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnlslab.lattice import Wavefunction, build_torus, nearest_neighbor_kernel, periodize_kernel
from dnlslab.observables import (
    ModelSpec,
    discrete_h1,
    hamiltonian,
    mixed_norm,
    power,
    power_nonlinearity,
    saturable_nonlinearity,
    top_two_masses,
)

LAT3 = build_torus(3, 8, h=1.0)
NN3 = nearest_neighbor_kernel(LAT3)
CUBIC = power_nonlinearity(3.0, -1.0)


def random_wave(lattice, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return Wavefunction(
        scale * (rng.standard_normal(lattice.n) + 1j * rng.standard_normal(lattice.n)),
        lattice,
    )


def site_normalized_oracle(f, h, pair_factor=1.0):
    """Brute-force double loop over ordered site pairs with adjacency by coordinates."""
    lat = f.lattice
    n, L, d = lat.n, lat.L, lat.d
    kin = 0.0
    for k in range(n):
        ck = np.unravel_index(k, lat.shape)
        for j in range(n):
            cj = np.unravel_index(j, lat.shape)
            diff = [(a - b) % L for a, b in zip(ck, cj)]
            dist = sum(min(x, L - x) for x in diff)
            if dist == 1:
                kin += abs(f.values[k] - f.values[j]) ** 2
    # the ordered double loop counts every edge twice; pair_factor=1 keeps each edge once
    kin = 0.5 * kin * 2.0 * pair_factor / (n * h * h)
    return kin - float(np.sum(np.abs(f.values) ** 4)) / n


class TestPower:
    def test_zero(self):
        assert power(Wavefunction(np.zeros(LAT3.n, complex), LAT3)) == 0.0

    def test_unit_mass(self):
        v = np.zeros(LAT3.n, complex)
        v[5] = 1.0
        assert power(Wavefunction(v, LAT3)) == 1.0

    def test_matches_plain_sum(self):
        lat = build_torus(1, 8)
        f = random_wave(lat, seed=2)
        acc = 0.0
        for z in f.values:
            acc += z.real**2 + z.imag**2
        assert power(f) == pytest.approx(acc, rel=1e-13)


class TestHamiltonian:
    def test_zero_field_all_conventions(self):
        z3 = Wavefunction(np.zeros(LAT3.n, complex), LAT3)
        m_std = ModelSpec(kernel=NN3, nonlinearity=CUBIC)
        m_site = ModelSpec(kernel=NN3, nonlinearity=CUBIC, convention="site_normalized")
        assert hamiltonian(m_std, z3) == 0.0
        assert hamiltonian(m_site, z3) == 0.0
        lat1 = build_torus(1, 16)
        lr = periodize_kernel(0.75, lat1)
        m_lr = ModelSpec(kernel=lr, nonlinearity=CUBIC, convention="long_range")
        assert hamiltonian(m_lr, Wavefunction(np.zeros(16, complex), lat1)) == 0.0

    def test_single_site_site_normalized(self):
        lat = build_torus(3, 8, h=2.0)
        m_site = ModelSpec(
            kernel=nearest_neighbor_kernel(lat), nonlinearity=CUBIC, convention="site_normalized"
        )
        amp = 1.7
        v = np.zeros(lat.n, complex)
        v[0] = amp
        mass = amp**2
        got = hamiltonian(m_site, Wavefunction(v, lat))
        want = (2.0 / lat.n) * (2 * lat.d) * mass / lat.h**2 - mass**2 / lat.n
        assert got == pytest.approx(want, rel=1e-12)

    def test_site_normalized_matches_double_loop(self):
        lat = build_torus(3, 3, h=0.7)  # 27 sites keeps the O(n^2) oracle fast
        f = random_wave(lat, seed=9)
        m = ModelSpec(
            kernel=nearest_neighbor_kernel(lat), nonlinearity=CUBIC, convention="site_normalized"
        )
        assert hamiltonian(m, f) == pytest.approx(
            site_normalized_oracle(f, lat.h), rel=1e-12
        )

    def test_pair_factor_override_doubles_kinetic(self):
        lat = build_torus(3, 3, h=0.7)
        f = random_wave(lat, seed=10)
        base = ModelSpec(kernel=nearest_neighbor_kernel(lat), nonlinearity=CUBIC,
                         convention="site_normalized")
        ordered = ModelSpec(kernel=nearest_neighbor_kernel(lat), nonlinearity=CUBIC,
                            convention="site_normalized", kinetic_pair_factor=2.0)
        assert hamiltonian(ordered, f) == pytest.approx(
            site_normalized_oracle(f, lat.h, pair_factor=2.0), rel=1e-12
        )
        quart = np.sum(np.abs(f.values) ** 4) / lat.n
        kin_once = hamiltonian(base, f) + quart
        kin_twice = hamiltonian(ordered, f) + quart
        assert kin_twice == pytest.approx(2.0 * kin_once, rel=1e-12)

    def test_convention_validation(self):
        with pytest.raises(ValueError):
            ModelSpec(kernel=NN3, nonlinearity=power_nonlinearity(5.0, -1.0),
                      convention="site_normalized")
        with pytest.raises(ValueError):
            ModelSpec(kernel=NN3, nonlinearity=CUBIC, convention="long_range")
        with pytest.raises(ValueError):
            ModelSpec(kernel=NN3, nonlinearity=CUBIC, potential=np.zeros(3))

    def test_potential_quadratic_term(self):
        lat = build_torus(1, 8, h=1.0)
        rng = np.random.default_rng(4)
        V = rng.standard_normal(8)
        f = random_wave(lat, seed=5)
        m0 = ModelSpec(kernel=nearest_neighbor_kernel(lat), nonlinearity=CUBIC)
        mV = ModelSpec(kernel=nearest_neighbor_kernel(lat), nonlinearity=CUBIC, potential=V)
        diff = hamiltonian(mV, f) - hamiltonian(m0, f)
        assert diff == pytest.approx(float(np.sum(V * np.abs(f.values) ** 2)), rel=1e-12)


class TestTopTwoMasses:
    def test_simple(self):
        lat = build_torus(1, 4)
        st_ = top_two_masses(Wavefunction(np.array([2, 1, 0, 0], complex), lat))
        assert (st_.M1, st_.M2, st_.argmax_site) == (4.0, 1.0, 0)
        assert st_.mass_fraction == pytest.approx(0.8)

    def test_tie_break_lowest_index(self):
        lat = build_torus(1, 4)
        st_ = top_two_masses(Wavefunction(np.full(4, 1.5 + 0j), lat))
        assert st_.argmax_site == 0
        assert st_.M1 == st_.M2 == pytest.approx(2.25)

    def test_against_sort_oracle(self):
        lat = build_torus(1, 64)
        f = random_wave(lat, seed=7)
        st_ = top_two_masses(f)
        srt = np.sort(np.abs(f.values) ** 2)
        assert st_.M1 == pytest.approx(srt[-1], rel=1e-14)
        assert st_.M2 == pytest.approx(srt[-2], rel=1e-14)


class TestDiscreteH1:
    def test_zero_and_constant(self):
        lat = build_torus(3, 4, h=0.5)
        assert discrete_h1(Wavefunction(np.zeros(lat.n, complex), lat)) == 0.0
        assert discrete_h1(Wavefunction(np.ones(lat.n, complex), lat)) == pytest.approx(1.0)

    def test_single_spike(self):
        lat = build_torus(3, 8, h=0.25)
        A = 2.3
        v = np.zeros(lat.n, complex)
        v[17] = A
        want = (A**2 + 2 * lat.d * A**2 / lat.h**2) / lat.n
        assert discrete_h1(Wavefunction(v, lat)) == pytest.approx(want, rel=1e-12)


class TestMixedNorm:
    def test_constant_in_time(self):
        lat = build_torus(1, 8)
        f = random_wave(lat, seed=1)
        c = float(np.sum(np.abs(f.values) ** 3) ** (1 / 3))
        traj = [(t, f) for t in np.linspace(0, 2.0, 41)]
        assert mixed_norm(traj, q=4.0, r=3.0) == pytest.approx(c * 2.0**0.25, rel=1e-12)

    def test_sup_in_time_conserved_l2(self):
        lat = build_torus(1, 8)
        f = random_wave(lat, seed=2)
        theta = 0.7
        g = Wavefunction(np.exp(1j * theta) * f.values, lat)
        val = mixed_norm([(0.0, f), (1.0, g)], q=math.inf, r=2.0)
        assert val == pytest.approx(math.sqrt(power(f)), rel=1e-12)

    def test_two_snapshot_hand_quadrature(self):
        lat = build_torus(1, 2)
        f0 = Wavefunction(np.array([3.0, 4.0], complex), lat)  # l2 norm 5
        f1 = Wavefunction(np.array([0.0, 1.0], complex), lat)  # l2 norm 1
        # trapezoid of v(t)^2 over [0, 2]: (25 + 1)/2 * 2 = 26
        assert mixed_norm([(0.0, f0), (2.0, f1)], q=2.0, r=2.0) == pytest.approx(math.sqrt(26.0))

    def test_errors(self):
        lat = build_torus(1, 4)
        f = random_wave(lat)
        with pytest.raises(ValueError):
            mixed_norm([(0.0, f)], q=2.0, r=2.0)
        with pytest.raises(ValueError):
            mixed_norm([(0.0, f), (0.0, f)], q=2.0, r=2.0)
        with pytest.raises(ValueError):
            mixed_norm([(0.0, f), (1.0, f)], q=0.5, r=2.0)


@settings(max_examples=15, deadline=None)
@given(theta=st.floats(0.0, 2 * math.pi), seed=st.integers(0, 1000))
def test_phase_rotation_invariance(theta, seed):
    lat = build_torus(2, 5, h=0.8)
    f = random_wave(lat, seed=seed)
    g = Wavefunction(np.exp(1j * theta) * f.values, lat)
    m = ModelSpec(kernel=nearest_neighbor_kernel(lat), nonlinearity=CUBIC)
    assert power(g) == pytest.approx(power(f), rel=1e-12)
    assert hamiltonian(m, g) == pytest.approx(hamiltonian(m, f), rel=1e-12, abs=1e-12)
    assert discrete_h1(g) == pytest.approx(discrete_h1(f), rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(shift=st.integers(1, 500), seed=st.integers(0, 1000))
def test_translation_invariance_site_normalized(shift, seed):
    lat = build_torus(3, 8, h=1.0)
    f = random_wave(lat, seed=seed)
    rolled = np.roll(f.values.reshape(lat.shape), shift % lat.L, axis=shift % lat.d).ravel()
    g = Wavefunction(rolled, lat)
    m = ModelSpec(kernel=nearest_neighbor_kernel(lat), nonlinearity=CUBIC,
                  convention="site_normalized")
    assert power(g) == pytest.approx(power(f), rel=1e-12)
    assert hamiltonian(m, g) == pytest.approx(hamiltonian(m, f), rel=1e-12)


def test_saturable_potential_part_bounded_by_mass():
    # G(a) <= a pointwise, so |potential part| <= (h/2) sum |f|^2
    lat = build_torus(1, 64, h=0.05)
    m = ModelSpec(kernel=nearest_neighbor_kernel(lat), nonlinearity=saturable_nonlinearity())
    f = random_wave(lat, seed=3, scale=1.4)
    kinetic_only = 0.5 * lat.h * (-np.real(
        np.vdot(f.values, np.fft.ifft(m.kernel.symbol * np.fft.fft(f.values)))
    ))
    pot_part = hamiltonian(m, f) - kinetic_only
    assert abs(pot_part) <= 0.5 * lat.h * power(f) + 1e-12
