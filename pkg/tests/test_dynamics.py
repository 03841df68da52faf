import numpy as np
import pytest
from scipy.sparse import lil_matrix
from scipy.sparse.linalg import expm_multiply

from osgsim.dynamics import (
    DerivativeTerms,
    Propagator,
    derivative,
    early_time_oracle,
    norm_decay_rate,
    step_euler,
    step_rk4,
)
from osgsim.model import PacketState, SystemParams, field_fock, init_packet, make_grid


def build_generator(grid, n_max, params, terms=DerivativeTerms()):
    """Sparse matrix assembled term by term from the written equations.

    Deliberately independent of the production kernels: plain loops, one
    matrix entry per printed term, so any index or sign slip in the fast
    path shows up as a mismatch.
    """
    p = grid.n_points
    q = grid.q
    s = grid.recoil_cells  # q -> q -+ 1 moves by one full recoil, s cells
    n_e, n_g = n_max, n_max + 1
    if params.mode_phase == "cos":
        c_lo = c_hi = 0.5
    else:
        c_lo, c_hi = -0.5j, 0.5j
    gam = params.gamma if terms.atomic_damping else 0.0
    kap = params.kappa if terms.cavity_damping else 0.0
    mu = params.mu if terms.kinetic else 0.0
    dlt = params.detuning_sign * params.delta if terms.detuning else 0.0
    eps = params.drive if terms.drive else 0.0
    e_idx = lambda k, i: k * p + i
    g_idx = lambda n, i: (n_e + n) * p + i
    a = lil_matrix(((n_e + n_g) * p, (n_e + n_g) * p), dtype=complex)
    for k in range(n_e):
        n = k + 1
        rn = np.sqrt(n)
        for i in range(p):
            r = e_idx(k, i)
            a[r, r] += -(gam / 2 + kap * (n - 1)) - 1j * (mu * q[i] ** 2 + dlt)
            if i >= s:
                a[r, g_idx(n, i - s)] += -rn * c_lo
            if i + s < p:
                a[r, g_idx(n, i + s)] += -rn * c_hi
            if eps:
                if k >= 1:
                    a[r, e_idx(k - 1, i)] += eps * np.sqrt(k)
                if k + 1 < n_e:
                    a[r, e_idx(k + 1, i)] += -eps * np.sqrt(k + 1)
    for n in range(n_g):
        rn = np.sqrt(n)
        for i in range(p):
            r = g_idx(n, i)
            a[r, r] += -kap * n - 1j * mu * q[i] ** 2
            if n >= 1:
                if i >= s:
                    a[r, e_idx(n - 1, i - s)] += rn * c_lo
                if i + s < p:
                    a[r, e_idx(n - 1, i + s)] += rn * c_hi
            if eps:
                if n >= 1:
                    a[r, g_idx(n - 1, i)] += eps * rn
                if n + 1 < n_g:
                    a[r, g_idx(n + 1, i)] += -eps * np.sqrt(n + 1)
    return a.tocsr()


def random_state(grid, n_max, seed=0):
    rng = np.random.default_rng(seed)
    shape_e = (n_max, grid.n_points)
    shape_g = (n_max + 1, grid.n_points)
    c_e = rng.normal(size=shape_e) + 1j * rng.normal(size=shape_e)
    c_g = rng.normal(size=shape_g) + 1j * rng.normal(size=shape_g)
    st = PacketState(grid, n_max, 0.0, c_e, c_g)
    st.renormalize()
    return st


def flatten(st):
    return np.concatenate([st.c_e.ravel(), st.c_g.ravel()])


FULL_PARAMS = [
    SystemParams(mu=0.3, gamma=0.2, kappa=0.15, delta=0.4, drive=0.3,
                 mode_phase="cos"),
    SystemParams(mu=0.3, gamma=0.2, kappa=0.15, delta=0.4, drive=0.3,
                 mode_phase="sin"),
    SystemParams(mu=0.1, gamma=0.0, kappa=0.3, delta=-0.2, drive=0.5,
                 mode_phase="cos", detuning_sign=-1),
]


class TestDerivativeAgainstMatrix:
    @pytest.mark.parametrize("params", FULL_PARAMS)
    def test_all_terms(self, params):
        grid = make_grid(2, 3)
        st = random_state(grid, 3)
        a = build_generator(grid, 3, params)
        dce, dcg = derivative(st, params)
        got = np.concatenate([dce.ravel(), dcg.ravel()])
        want = a @ flatten(st)
        assert np.allclose(got, want, atol=1e-14)

    def test_term_flags(self):
        grid = make_grid(2, 3)
        st = random_state(grid, 2, seed=3)
        params = FULL_PARAMS[0]
        for flag in ("atomic_damping", "cavity_damping", "kinetic",
                     "detuning", "drive"):
            terms = DerivativeTerms(**{flag: False})
            a = build_generator(grid, 2, params, terms)
            dce, dcg = derivative(st, params, terms)
            got = np.concatenate([dce.ravel(), dcg.ravel()])
            assert np.allclose(got, a @ flatten(st), atol=1e-14)

    def test_jc_always_on(self):
        assert DerivativeTerms().jc_coupling is True
        assert DerivativeTerms(drive=False).jc_coupling is True
        with pytest.raises(TypeError):
            DerivativeTerms(jc_coupling=False)


class TestStepsAgainstExponential:
    @pytest.mark.parametrize("params", FULL_PARAMS[:2])
    def test_rk4_matches_expm(self, params):
        grid = make_grid(2, 3)
        st = random_state(grid, 3, seed=7)
        a = build_generator(grid, 3, params)
        want = expm_multiply(0.5 * a, flatten(st))
        prop = Propagator(grid, 3, params)
        cur = st.copy()
        for _ in range(500):
            prop.step_rk4(cur, 1e-3)
        assert cur.tau == pytest.approx(0.5)
        assert np.allclose(flatten(cur), want, atol=1e-10)

    def test_euler_first_order(self):
        grid = make_grid(2, 3)
        st = random_state(grid, 2, seed=9)
        params = FULL_PARAMS[0]
        full = step_euler(st, 1e-2, params)
        halves = step_euler(step_euler(st, 5e-3, params), 5e-3, params)
        diff = np.linalg.norm(flatten(full) - flatten(halves))
        assert 1e-7 < diff < 1e-3  # O(dtau^2) gap, not zero, not huge

    def test_tiny_step_is_identity(self):
        grid = make_grid(2, 3)
        st = random_state(grid, 2, seed=1)
        out = step_rk4(st, 1e-15, FULL_PARAMS[0])
        assert np.allclose(flatten(out), flatten(st), atol=1e-13)
        with pytest.raises(ValueError):
            step_rk4(st, 0.0, FULL_PARAMS[0])

    def test_zero_state_stays_zero(self):
        grid = make_grid(2, 3)
        z = PacketState(grid, 2, 0.0,
                        np.zeros((2, grid.n_points), complex),
                        np.zeros((3, grid.n_points), complex))
        dce, dcg = derivative(z, FULL_PARAMS[0])
        assert not dce.any() and not dcg.any()
        out = step_rk4(z, 0.1, FULL_PARAMS[0])
        assert not out.c_e.any() and not out.c_g.any()


class TestPhysicalStructure:
    def test_bare_coupling_row(self):
        # undamped massless couplet: dCe = -(1/2)[Cg(q-1) + Cg(q+1)]
        grid = make_grid(4, 10)
        params = SystemParams(mu=0, gamma=0, kappa=0, delta=0, drive=0,
                              delta_q=1.5)
        st = init_packet(grid, field_fock(1, 1), params)
        dce, dcg = derivative(st, params)
        cg = st.c_g[1]
        s = grid.recoil_cells
        want = np.zeros_like(cg)
        want[s:] += -0.5 * cg[:-s]   # Cg(q-1) contribution
        want[:-s] += -0.5 * cg[s:]   # Cg(q+1) contribution
        assert np.allclose(dce[0], want, atol=1e-15)
        assert np.allclose(dcg[0], 0.0)  # vacuum row frozen when undriven

    def test_vacuum_component_frozen_without_drive(self):
        grid = make_grid(4, 10)
        params = SystemParams(mu=0, gamma=0.3, kappa=0.2, drive=0)
        rng = np.random.default_rng(5)
        c_g = rng.normal(size=(2, grid.n_points)) * (1 + 0.5j)
        st = PacketState(grid, 1, 0.0,
                         rng.normal(size=(1, grid.n_points)).astype(complex),
                         c_g.astype(complex))
        vac0 = st.c_g[0].copy()
        prop = Propagator(grid, 1, params)
        for _ in range(200):
            prop.step_rk4(st, 1e-2)
        assert np.allclose(st.c_g[0], vac0, atol=1e-14)

    def test_couplet_decoupling(self):
        # amplitude seeded only in couplet 2 never leaks to 1 or 3
        grid = make_grid(2, 5)
        params = SystemParams(mu=0.2, gamma=0.3, kappa=0.1, delta=0.2, drive=0)
        rng = np.random.default_rng(11)
        st = PacketState(grid, 3, 0.0,
                         np.zeros((3, grid.n_points), complex),
                         np.zeros((4, grid.n_points), complex))
        st.c_e[1] = rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points)
        st.c_g[2] = rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points)
        st.renormalize()
        prop = Propagator(grid, 3, params)
        for _ in range(300):
            prop.step_rk4(st, 1e-2)
        assert not st.c_e[0].any() and not st.c_e[2].any()
        assert not st.c_g[0].any() and not st.c_g[1].any() and not st.c_g[3].any()
        assert np.abs(st.c_e[1]).max() > 0

    def test_norm_decay_matches_collapse_rates(self):
        # dN/dtau == -gamma<sig+sig-> - 2 kappa <adag a>, unnormalized
        grid = make_grid(2, 5)
        params = SystemParams(mu=0.1, gamma=0.37, kappa=0.21, delta=0.3, drive=0.25)
        st = random_state(grid, 3, seed=13)
        got = norm_decay_rate(st, params)
        want = -params.gamma * st.excited_expectation() \
            - 2 * params.kappa * st.photon_expectation()
        assert got == pytest.approx(want, abs=1e-12)

    def test_norm_decay_identity_along_trajectory(self):
        grid = make_grid(4, 20)
        params = SystemParams(mu=1e-3, gamma=0.4, kappa=0.25, drive=0.2,
                              delta_q=3.0)
        st = init_packet(grid, field_fock(1, 3), params)
        prop = Propagator(grid, 3, params)
        for _ in range(50):
            prop.step_rk4(st, 1e-2)
            got = norm_decay_rate(st, params)
            want = -params.gamma * st.excited_expectation() \
                - 2 * params.kappa * st.photon_expectation()
            assert abs(got - want) < 1e-8 * st.norm2()

    def test_closed_system_unitarity_long_run(self):
        # no damping: norm pinned at 1 over tau = 400 (packet stays on-grid
        # because the dressed potential turns it around well inside q_max)
        grid = make_grid(2, 120)
        params = SystemParams(mu=1.7e-4, gamma=0, kappa=0, delta_q=10.0)
        st = init_packet(grid, field_fock(1, 1), params)
        prop = Propagator(grid, 1, params)
        worst = 0.0
        for chunk in range(400):
            for _ in range(1000):
                prop.step_rk4(st, 1e-3)
            worst = max(worst, abs(st.norm2() - 1.0))
        assert st.tau == pytest.approx(400.0)
        assert worst < 1e-9

    def test_envelope_scales_coupling_only(self):
        grid = make_grid(4, 10)
        params = SystemParams(mu=0, gamma=0.3, kappa=0.0, delta_q=1.5)
        st = init_packet(grid, field_fock(1, 1), params)
        prop = Propagator(grid, 1, params, envelope=lambda tau: 0.0)
        for _ in range(100):
            prop.step_rk4(st, 1e-2)
        # zero envelope freezes the exchange: atom never excites
        assert np.abs(st.c_e).max() == 0.0
        assert st.norm2() == pytest.approx(1.0, abs=1e-12)


class TestEarlyTimeOracle:
    def setup_method(self):
        self.grid = make_grid(4, 60)
        self.params = SystemParams(mu=0, gamma=0.1, delta_q=10.0, xi0=0.25)
        self.field = field_fock(1, 1)

    def test_tau_zero(self):
        ce, cg = early_time_oracle(1, self.grid.q, 0.0, self.params, self.field)
        assert np.allclose(ce, 0.0)
        want = (1 / (2 * np.pi * 100) ** 0.25
                * np.exp(-self.params.beta * self.grid.q**2)
                * np.exp(-1j * np.pi * self.grid.q / 2))
        assert np.allclose(cg, want, atol=1e-14)

    def test_envelope_shape(self):
        q = self.grid.q
        b = self.params.beta
        ce, _ = early_time_oracle(1, q, 1.0, SystemParams(mu=0, gamma=0, delta_q=10.0),
                                  self.field)
        want = 0.5 * np.abs(np.exp(b * (2 * q - 1)) - np.exp(-b * (2 * q + 1))) \
            * np.exp(-b * q**2) / (2 * np.pi * 100) ** 0.25
        assert np.allclose(np.abs(ce), want, atol=1e-14)

    def test_domain_guards(self):
        with pytest.raises(ValueError):
            early_time_oracle(1, self.grid.q, 6.0, self.params, self.field)
        with pytest.raises(ValueError):
            early_time_oracle(1, self.grid.q, 1.0,
                              SystemParams(mu=0.1, gamma=0.1), self.field)
        with pytest.raises(ValueError):
            early_time_oracle(1, self.grid.q, 1.0,
                              SystemParams(mu=0, xi0=0.0), self.field)

    def test_integrator_matches_oracle_at_tau2(self):
        st = init_packet(self.grid, self.field, self.params)
        c0 = st.c_g[1].copy()
        prop = Propagator(self.grid, 1, self.params)
        for _ in range(2000):
            prop.step_rk4(st, 1e-3)
        ce, cg = early_time_oracle(1, self.grid.q, 2.0, self.params, self.field,
                                   c0_row=c0)
        num = np.concatenate([st.c_e[0], st.c_g[1]])
        ana = np.concatenate([ce, cg])
        err = np.linalg.norm(num - ana) / np.linalg.norm(ana)
        assert err < 0.02
