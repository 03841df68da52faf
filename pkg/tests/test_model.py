import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from osgsim.model import (
    BoundaryMassError,
    JumpEvent,
    SystemParams,
    field_coherent,
    field_fock,
    init_packet,
    make_grid,
)


class TestGrid:
    def test_default_shape(self):
        g = make_grid(8, 60)
        assert g.n_points == 961
        assert g.spacing == 0.125
        q = g.q
        assert q[0] == -60.0 and q[-1] == 60.0
        assert q[len(q) // 2] == 0.0
        assert np.allclose(np.diff(q), 0.125)

    def test_recoil_shift_is_integer_cells(self):
        g = make_grid(8, 60)
        # shifting by one recoil must land exactly on grid points
        assert np.allclose(g.q[: -g.recoil_cells] + 1.0, g.q[g.recoil_cells :])

    @given(s=st.integers(1, 16), qm=st.integers(1, 200))
    @settings(max_examples=40, deadline=None)
    def test_point_count_formula(self, s, qm):
        g = make_grid(s, qm)
        assert g.n_points == 2 * s * qm + 1
        assert g.q.shape == (g.n_points,)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            make_grid(0, 60)
        with pytest.raises(ValueError):
            make_grid(-2, 60)
        with pytest.raises(ValueError):
            make_grid(8, 0)
        with pytest.raises(ValueError):
            make_grid(3, 60.1)  # spacing does not divide q_max


class TestFields:
    def test_fock_one(self):
        f = field_fock(1, 1)
        assert f.n_max == 1
        assert f.amplitudes[0] == 0 and f.amplitudes[1] == 1
        assert f.mean_photon_number() == 1.0

    def test_fock_out_of_range(self):
        with pytest.raises(ValueError):
            field_fock(3, 2)
        with pytest.raises(ValueError):
            field_fock(-1, 2)

    def test_coherent_alpha_one(self):
        f = field_coherent(1.0, 12)
        # Poisson weights renormalized over the cutoff
        assert np.isclose(np.sum(np.abs(f.amplitudes) ** 2), 1.0, atol=1e-14)
        assert np.isclose(f.mean_photon_number(), 1.0, atol=1e-9)
        assert np.isclose(abs(f.amplitudes[0]) ** 2, np.exp(-1.0), rtol=1e-9)

    def test_coherent_truncation_guard(self):
        with pytest.raises(ValueError):
            field_coherent(1.0, 5)  # keeps ~0.9999994 < 1 - 1e-10

    def test_coherent_complex_alpha(self):
        f = field_coherent(1j, 14)
        assert np.isclose(f.mean_photon_number(), 1.0, atol=1e-9)
        # phases go like alpha^n
        assert np.isclose(f.amplitudes[1] / f.amplitudes[0], 1j, atol=1e-12)


class TestInitPacket:
    def setup_method(self):
        self.grid = make_grid(8, 60)
        self.params = SystemParams(delta_q=10.0, xi0=0.25)

    def test_norm_is_one(self):
        st_ = init_packet(self.grid, field_fock(1, 1), self.params)
        assert np.isclose(st_.norm2(), 1.0, atol=1e-14)

    def test_ground_gaussian_shape(self):
        st_ = init_packet(self.grid, field_fock(1, 1), self.params)
        assert np.all(st_.c_e == 0)
        assert np.all(st_.c_g[0] == 0)  # Fock-1 field has no vacuum weight
        prof = np.abs(st_.c_g[1]) ** 2
        q = self.grid.q
        expect = np.exp(-q**2 / (2 * self.params.delta_q**2))
        expect *= prof.max() / expect.max()
        assert np.allclose(prof, expect, atol=1e-12)

    def test_phase_encodes_position(self):
        st_ = init_packet(self.grid, field_fock(1, 1), self.params)
        q = self.grid.q
        phase = st_.c_g[1] / np.abs(st_.c_g[1])
        assert np.allclose(phase, np.exp(-2j * np.pi * q * 0.25), atol=1e-12)

    def test_coherent_field_rows_scale_like_amplitudes(self):
        f = field_coherent(1.0, 12)
        st_ = init_packet(self.grid, f, self.params)
        row_norms = np.sqrt(np.sum(np.abs(st_.c_g) ** 2, axis=1))
        ratio = row_norms / np.abs(f.amplitudes)
        assert np.allclose(ratio, ratio[0], rtol=1e-12)

    def test_boundary_guard_fires_for_wide_packet(self):
        with pytest.raises(BoundaryMassError):
            init_packet(make_grid(8, 12), field_fock(1, 1),
                        SystemParams(delta_q=10.0))

    @given(dq=st.floats(0.5, 15.0), xi0=st.floats(-0.5, 0.5))
    @settings(max_examples=20, deadline=None)
    def test_norm_one_for_any_packet(self, dq, xi0):
        st_ = init_packet(self.grid, field_fock(1, 2),
                          SystemParams(delta_q=dq, xi0=xi0),
                          boundary_tol=1.0)  # normalization only, ignore fit
        assert np.isclose(st_.norm2(), 1.0, atol=1e-12)

    def test_photon_and_excited_expectations(self):
        st_ = init_packet(self.grid, field_coherent(1.0, 12), self.params)
        assert np.isclose(st_.photon_expectation(), 1.0, atol=1e-9)
        assert st_.excited_expectation() == 0.0


class TestParams:
    def test_beta(self):
        assert SystemParams(delta_q=10.0).beta == pytest.approx(1 / 400)

    def test_validation(self):
        with pytest.raises(ValueError):
            SystemParams(gamma=-0.1)
        with pytest.raises(ValueError):
            SystemParams(delta_q=0.0)
        with pytest.raises(ValueError):
            SystemParams(mode_phase="tan")
        with pytest.raises(ValueError):
            SystemParams(detuning_sign=0)

    def test_with_override(self):
        p = SystemParams(gamma=0.1).with_(gamma=0.5)
        assert p.gamma == 0.5


class TestJumpEvent:
    def test_fields(self):
        ev = JumpEvent(2.0, "atomic", 0.3)
        assert ev.tau == 2.0 and ev.channel == "atomic" and ev.eta == 0.3

    def test_validation(self):
        with pytest.raises(ValueError):
            JumpEvent(1.0, "thermal")
        with pytest.raises(ValueError):
            JumpEvent(1.0, "atomic", 1.5)
