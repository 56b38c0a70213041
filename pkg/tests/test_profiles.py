"""Tests for the profile solvers, special functions, and integral oracles."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from hwlab.profiles import (
    appendix_a_oracle,
    apply_L_beta,
    eval_F,
    eval_F_quadrature,
    eval_G,
    eval_q_plus,
    lambda_tilde_constants,
    m_beta_kernel,
    multiplier_m_beta,
    negative_frequency_norms,
    nondegeneracy_det,
    profile_constants,
    q_beta_minus_q_plus_h_half,
    sample_q_plus,
    save_profile,
    solve_q_beta,
    solve_rho_beta,
    tail_prediction,
)
from hwlab.spectral import (
    Grid1D,
    SpectralField,
    apply_multiplier,
    conserved_triple,
    field_from_binary,
    field_from_csv,
    gn_energy_gap,
    l2_norm,
    real_inner,
    sobolev_norm,
)

PI4 = math.pi**4


def spectral_derivative(field):
    from hwlab.spectral import apply_multiplier, d_symbol

    deriv = apply_multiplier(field, d_symbol())
    return SpectralField(field.grid, values=1j * deriv.values)


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

class TestSpecialFunctions:
    def test_q_plus_values(self):
        assert eval_q_plus(0.0) == pytest.approx(-2j, abs=1e-15)
        x = np.array([-3.0, 0.5, 11.0])
        np.testing.assert_allclose(eval_q_plus(x), 1.0 / (x + 0.5j), rtol=1e-14)

    def test_F_at_zero(self):
        assert eval_F(0.0) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("x", [-17.3, -2.0, -0.31, 0.4, 1.0, 5.5, 40.0])
    def test_F_closed_form_vs_quadrature(self, x):
        # two independent routes: exp1 closed form vs adaptive quadrature
        assert abs(eval_F(x) - eval_F_quadrature(x)) < 1e-9

    def test_F_equals_one_plus_ixG(self):
        x = np.array([-8.0, -0.2, 0.7, 3.0, 120.0])
        np.testing.assert_allclose(eval_F(x), 1.0 + 1j * x * eval_G(x), rtol=1e-12)

    def test_G_oscillatory_representation(self):
        # G(x) also equals int_0^inf e^{ixt}/(1+t) dt
        for x in (0.9, 3.7):
            re = quad(lambda t: 1.0 / (1.0 + t), 0, np.inf,
                      weight="cos", wvar=x, limit=400)[0]
            im = quad(lambda t: 1.0 / (1.0 + t), 0, np.inf,
                      weight="sin", wvar=x, limit=400)[0]
            assert abs(eval_G(x) - (re + 1j * im)) < 1e-8

    def test_F_derivative_identity(self):
        # F'(x) = (1/x - i) F(x) - 1/x
        h = 1e-6
        for x in (0.8, -2.5, 12.0):
            fd = (eval_F(x + h) - eval_F(x - h)) / (2 * h)
            analytic = (1.0 / x - 1j) * eval_F(x) - 1.0 / x
            assert abs(fd - analytic) < 1e-7

    def test_F_decay(self):
        for x in (50.0, -50.0, 300.0):
            assert 0.9 < abs(eval_F(x)) * abs(x) < 1.1

    def test_G_diverges_at_zero(self):
        assert np.isinf(eval_G(0.0))


# ---------------------------------------------------------------------------
# the smoothing multiplier family
# ---------------------------------------------------------------------------

class TestMultiplierMBeta:
    def test_positive_side_is_beta_independent(self):
        xi = np.array([0.5, 2.0, 40.0])
        for beta in (0.0, 0.5, 0.99):
            np.testing.assert_allclose(
                multiplier_m_beta(beta)(xi), 1.0 / (1.0 + xi), rtol=1e-14
            )

    def test_negative_side_steepens(self):
        xi = np.array([-1.0, -10.0])
        beta = 0.8
        expected = 1.0 / (1.0 + (1 + beta) / (1 - beta) * np.abs(xi))
        np.testing.assert_allclose(multiplier_m_beta(beta)(xi), expected, rtol=1e-14)

    def test_beta_validation(self):
        for bad in (-0.1, 1.0, 1.5):
            with pytest.raises(ValueError):
                multiplier_m_beta(bad)

    def test_kernel_matches_symbol_on_gaussian(self):
        # periodic spectral application vs direct line convolution with the
        # closed-form kernel (integrable log singularity split at y = x)
        beta = 0.5
        grid = Grid1D(n=2**13, length=400.0)
        f = np.exp(-grid.x**2)
        out = apply_multiplier(
            SpectralField(grid, values=f + 0j), multiplier_m_beta(beta)
        ).values

        def direct(x):
            def val(part):
                def integrand(y):
                    return part(m_beta_kernel(x - y, beta) * np.exp(-(y**2)))
                left = quad(integrand, x - 40, x, limit=300, points=[x - 1e-6])[0]
                right = quad(integrand, x, x + 40, limit=300, points=[x + 1e-6])[0]
                return left + right
            return val(np.real) + 1j * val(np.imag)

        for x_probe in (0.3, 1.7):
            j = int(round((x_probe + grid.length / 2) / grid.dx))
            assert abs(out[j] - direct(grid.x[j])) < 5e-4


# ---------------------------------------------------------------------------
# ground state
# ---------------------------------------------------------------------------

class TestGroundState:
    def test_residual(self, ground):
        assert ground.residual < 1e-9

    def test_real_positive_even(self, ground):
        v = ground.field.values
        assert np.max(np.abs(v.imag)) < 1e-10
        assert v.real.min() > -1e-10
        reflected = np.roll(v[::-1], 1)
        assert np.max(np.abs(v - reflected)) < 1e-9

    def test_peak_at_origin_and_monotone_decay(self, ground):
        grid = ground.field.grid
        v = ground.field.values.real
        assert abs(grid.x[np.argmax(v)]) < grid.dx / 2
        right = v[(grid.x >= 0) & (grid.x <= grid.length / 4)]
        assert np.all(np.diff(right) <= 1e-12)

    def test_pohozaev_identities(self, ground):
        # pairing the equation with Q gives kinetic + mass = int q^4 exactly
        # on the grid; the virial identity int q^4 = 2*kinetic (hence zero
        # energy) relies on dilation, which the periodic wrap breaks at
        # O(1/L), so it only holds to that level
        mass, momentum, energy = conserved_triple(ground.field)
        v = ground.field.values.real
        grid = ground.field.grid
        quartic = float(np.sum(v**4) * grid.dx)
        kinetic = 2.0 * (energy + 0.25 * quartic)
        assert abs(kinetic + mass - quartic) < 1e-8 * quartic
        assert abs(quartic - 2.0 * kinetic) < 1e-3 * quartic
        assert abs(energy) < 5e-4 * kinetic
        assert abs(momentum) < 1e-9

    def test_gn_equality_case(self, ground):
        # the ground state saturates the energy/mass inequality (up to the
        # same O(1/L) dilation defect as the virial identity)
        gap = gn_energy_gap(ground.field, ground.mass)
        mass, _, energy = conserved_triple(ground.field)
        kinetic = 2.0 * energy + 0.5 * float(
            np.sum(ground.field.values.real**4) * ground.field.grid.dx
        )
        assert abs(gap) < 1e-3 * max(kinetic, 1.0)

    def test_mass_below_limit_profile_mass(self, ground):
        # the limit profile has zero energy at mass 2*pi, so the sharp
        # inequality forces the optimizer mass below 2*pi
        assert 1.0 < ground.mass < 2 * math.pi


# ---------------------------------------------------------------------------
# the traveling profile family
# ---------------------------------------------------------------------------

class TestQBetaSolve:
    def test_residual_and_gauge(self, p999, grid400):
        assert p999.residual < 1e-9
        ref = sample_q_plus(grid400)
        dref = spectral_derivative(ref)
        iref = SpectralField(grid400, values=1j * ref.values)
        assert abs(real_inner(p999.field, iref)) < 1e-9
        assert abs(real_inner(p999.field, dref)) < 1e-9
        assert real_inner(p999.field, ref) > 0

    def test_close_to_limit_profile(self, p999, grid400):
        assert q_beta_minus_q_plus_h_half(p999) < 0.2
        minus_l2, minus_hhalf = negative_frequency_norms(p999)
        assert 1e-14 < minus_l2 < 0.05
        assert minus_hhalf < 0.1

    def test_constants_near_limit_values(self, p999):
        n_c, p_c, c_c = profile_constants(p999)
        assert abs(n_c - 1.0) < 0.05
        assert abs(p_c - 1.0) < 0.05
        assert abs(c_c - 1.0) < 0.05
        assert abs(p999.n_const - n_c) < 1e-12

    def test_beta_validation(self, grid400):
        for bad in (0.0, 1.0, -0.3, 1.4):
            with pytest.raises(ValueError):
                solve_q_beta(bad, grid400)

    def test_cache_ladder(self, cache, p95):
        betas = cache.solved_betas()
        assert 0.999 in betas and 0.95 in betas
        assert p95.residual < 1e-9
        n_c, p_c, c_c = profile_constants(p95)
        assert abs(c_c - 1.0) < 0.25
        assert 0.7 < n_c < 1.1

    def test_gauge_fit_removes_artificial_shift(self, p95, grid400):
        # translate + rotate in mode space, re-solve with that seed: the
        # gauge conditions must recover the same representative
        shifted_modes = p95.field.modes * np.exp(
            -1j * grid400.xi * 0.37 + 0.81j
        )
        seed = SpectralField.from_modes(grid400, shifted_modes)
        p_re = solve_q_beta(0.95, grid400, tol=1e-9, init=seed)
        assert l2_norm(p_re.field - p95.field) < 1e-6

    def test_lambda_tilde_requires_neighbors(self, p999):
        with pytest.raises(ValueError):
            lambda_tilde_constants(None, p999)

    def test_lambda_tilde_small_near_limit(self, cache):
        lo, hi = cache.neighbors(0.999)
        lt_n, lt_p, lt_c = lambda_tilde_constants(lo, hi)
        # (1-beta) d/dbeta quantities stay O(|log(1-beta)|^{-1}-ish) small
        assert abs(lt_n) < 0.2
        assert abs(lt_p) < 0.2
        assert abs(lt_c) < 0.5


class TestTailLaw:
    def test_far_field_matches_prediction(self, p95, grid400):
        # the grid profile is the periodized one, so the line prediction is
        # summed over the two nearest images as well
        v = p95.field.values
        dv = spectral_derivative(p95.field).values
        L = grid400.length
        # probes span both asymptotic regimes: (1-b)x/(1+b) below 1 (the
        # 1/x range) and above 1 (the crossover toward 1/x^2 decay, where
        # the subleading correction weighs relatively more)
        for x_probe, band in ((15.0, 0.15), (40.0, 0.15), (50.0, 0.15),
                              (60.0, 0.15), (120.0, 0.25)):
            j = int(round((x_probe + L / 2) / grid400.dx))
            x = grid400.x[j]
            q_pred, dq_pred = 0.0, 0.0
            for image in (x, x - L, x + L):
                q_i, dq_i = tail_prediction(p95, image)
                q_pred += q_i
                dq_pred += dq_i
            assert abs(v[j] - q_pred) < band * abs(q_pred)
            assert abs(dv[j] - dq_pred) < (band + 0.1) * abs(dq_pred)

    def test_rejects_near_field(self, p95):
        with pytest.raises(ValueError):
            tail_prediction(p95, 3.0)


# ---------------------------------------------------------------------------
# linearized operator and auxiliary profile
# ---------------------------------------------------------------------------

def interior_l2(field, fraction=0.25):
    grid = field.grid
    mask = np.abs(grid.x) <= fraction * grid.length
    return math.sqrt(float(np.sum(np.abs(field.values[mask]) ** 2)) * grid.dx)


class TestLinearizedOperator:
    def test_kernel_directions(self, p95):
        # L(iQ) = i * (profile residual field) exactly, so factor <= 10;
        # L(dQ/dy) = d/dy of the residual field, which differentiation can
        # amplify by up to the grid bandwidth (measured ~210x), so only a
        # bandwidth-scaled bound is meaningful for that direction
        grid = p95.grid
        iq = SpectralField(grid, values=1j * p95.field.values)
        dq = spectral_derivative(p95.field)
        assert l2_norm(apply_L_beta(p95, iq)) < 10 * p95.residual
        assert l2_norm(apply_L_beta(p95, dq)) < 512 * p95.residual

    def test_action_on_profile(self, p95):
        grid = p95.grid
        q = p95.field.values
        out = apply_L_beta(p95, p95.field)
        target = SpectralField(grid, values=-2.0 * np.abs(q) ** 2 * q)
        assert l2_norm(out - target) < 1e-8

    def test_action_on_scaling_direction(self, p95):
        # L(y dQ/dy) = |Q|^2 Q - Q holds on the line; on the torus the
        # weight y jumps at the wrap and the nonlocal operator spreads that
        # jump like (1+b)/(1-b) * jump/(pi*dist) ~ 2e-2 into the interior,
        # so the check is structural (sign/term errors would give O(1))
        grid = p95.grid
        q = p95.field.values
        dq = spectral_derivative(p95.field).values
        out = apply_L_beta(p95, SpectralField(grid, values=grid.x * dq))
        target = SpectralField(grid, values=np.abs(q) ** 2 * q - q)
        assert interior_l2(out - target) < 5e-2
        assert l2_norm(target) > 1.0

    def test_action_on_lam_q(self, p95):
        # L(Q/2 + y dQ/dy) = -Q up to the same wrap leak
        grid = p95.grid
        q = p95.field.values
        dq = spectral_derivative(p95.field).values
        lam_q = SpectralField(grid, values=0.5 * q + grid.x * dq)
        out = apply_L_beta(p95, lam_q)
        assert interior_l2(out + p95.field) < 5e-2
        assert l2_norm(p95.field) > 1.0

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**31 - 1))
    def test_self_adjoint(self, p95, seed):
        rng = np.random.default_rng(seed)
        grid = p95.grid
        xi = grid.xi

        def smooth_random():
            m = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))
            m *= np.exp(-(xi**2) / 8.0)
            return SpectralField.from_modes(grid, m)

        f, g = smooth_random(), smooth_random()
        lhs = real_inner(apply_L_beta(p95, f), g)
        rhs = real_inner(f, apply_L_beta(p95, g))
        scale = max(abs(lhs), abs(rhs), 1e-30)
        assert abs(lhs - rhs) < 1e-10 * scale


@pytest.fixture(scope="session")
def rho999(p999):
    return solve_rho_beta(p999)


class TestRhoProfile:
    def test_equation_and_orthogonality(self, p999, rho999):
        grid = p999.grid
        w = SpectralField(grid, values=1j * rho999.values)  # i rho
        dq = spectral_derivative(p999.field)
        target = SpectralField(grid, values=1j * dq.values)
        assert l2_norm(apply_L_beta(p999, w) - target) < 1e-7
        iq = SpectralField(grid, values=1j * p999.field.values)
        assert abs(real_inner(w, iq)) < 1e-8
        assert abs(real_inner(w, dq)) < 1e-8

    def test_limit_expansion(self, p999, rho999):
        # i rho -> Q + (i/2) dQ/dy as beta -> 1, with error controlled by
        # sqrt((1-beta) |log(1-beta)|) in H^{1/2}
        grid = p999.grid
        w = 1j * rho999.values
        dq = spectral_derivative(p999.field).values
        diff = SpectralField(grid, values=w - p999.field.values - 0.5j * dq)
        err_l2 = l2_norm(diff)
        err_hhalf = sobolev_norm(diff, 0.5)
        eps = 1.0 - p999.beta
        assert err_l2 < 0.05
        assert err_hhalf < 1.0 * math.sqrt(eps * abs(math.log(eps)))

    def test_limit_expansion_trend(self, cache, p999, rho999):
        # the expansion error shrinks as beta increases
        def expansion_err(p, rho):
            dq = spectral_derivative(p.field).values
            diff = SpectralField(
                p.grid, values=1j * rho.values - p.field.values - 0.5j * dq
            )
            return sobolev_norm(diff, 0.5)

        p99 = cache.get(0.99)
        err99 = expansion_err(p99, solve_rho_beta(p99))
        err999 = expansion_err(p999, rho999)
        assert err999 < err99


class TestNondegeneracy:
    def test_determinant_near_limit(self, cache, p999):
        # the deviation from -pi^4 shrinks like 1/log(1-beta)^2, measured
        # ~5% at beta = 0.999
        lo, hi = cache.neighbors(0.999)
        det = nondegeneracy_det(p999, lo, hi)
        assert abs(det + PI4) < 0.10 * PI4

    def test_determinant_stays_negative_down_ladder(self, cache, p95):
        lo, hi = cache.neighbors(0.95)
        det = nondegeneracy_det(p95, lo, hi)
        assert det < 0
        assert abs(det + PI4) < 0.5 * PI4

    def test_missing_neighbors_rejected(self, p999):
        with pytest.raises(ValueError):
            nondegeneracy_det(p999)


class TestMonotoneTrends:
    BETAS = (0.9, 0.95, 0.99, 0.999)

    def test_h_half_distance_decreases_in_beta(self, cache):
        dists = [q_beta_minus_q_plus_h_half(cache.get(b)) for b in self.BETAS]
        assert all(a > b for a, b in zip(dists, dists[1:]))

    def test_negative_frequency_mass_ratio_bounded(self, cache):
        for b in self.BETAS:
            minus_l2, _ = negative_frequency_norms(cache.get(b))
            assert minus_l2**2 / (1.0 - b) < 4.0

    def test_mass_increases_toward_limit_value(self, cache):
        n_consts = [cache.get(b).n_const for b in self.BETAS]
        assert all(a < b for a, b in zip(n_consts, n_consts[1:]))
        assert all(n < 1.0 for n in n_consts)


# ---------------------------------------------------------------------------
# closed-form integral oracle suite
# ---------------------------------------------------------------------------

class TestIntegralOracle:
    def test_all_rows_match_targets(self, grid400):
        rows = appendix_a_oracle(grid400)
        assert len(rows) == 8
        for row in rows:
            assert row["abs_err"] < 1e-6, row

    def test_targets_are_the_residue_values(self, grid400):
        rows = appendix_a_oracle(grid400)
        targets = [r["target"] for r in rows[:6]]
        expected = [
            2 * math.pi, 2j * math.pi, 2 * math.pi,
            -4 * math.pi, 2j * math.pi, -2j * math.pi,
        ]
        assert targets == [complex(t) for t in expected]
        assert rows[6]["target"] == 0 and rows[7]["target"] == 0

    def test_matches_spectral_route(self, grid400):
        # same integrals via grid fields and the spectral derivative: the two
        # routes agree to the periodization error, not to the oracle error
        qp = sample_q_plus(grid400)
        dq = spectral_derivative(qp)
        rows = appendix_a_oracle(grid400)
        spectral_val = complex(
            np.sum(dq.values * np.conj(qp.values)) * grid400.dx
        )
        assert abs(spectral_val - rows[1]["value"]) < 5e-2

    def test_errors_shrink_with_resolution(self):
        coarse = appendix_a_oracle(Grid1D(n=2**13, length=200.0))
        fine = appendix_a_oracle(Grid1D(n=2**15, length=400.0))
        worst_coarse = max(r["abs_err"] for r in coarse)
        worst_fine = max(r["abs_err"] for r in fine)
        assert worst_fine < worst_coarse / 4.0


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

class TestProfileSerialization:
    def test_save_writes_triplet(self, p95, tmp_path):
        sidecar = save_profile(p95, tmp_path, "qbeta_095")
        for ext in (".csv", ".bin", ".json"):
            assert (tmp_path / f"qbeta_095{ext}").exists()
        assert sidecar["beta"] == 0.95
        assert sidecar["residual"] < 1e-9
        assert set(sidecar) == {
            "beta", "residual", "N", "P", "c_re", "c_im", "tail_mass",
        }
        back_csv = field_from_csv(tmp_path / "qbeta_095.csv")
        back_bin = field_from_binary(tmp_path / "qbeta_095.bin")
        assert l2_norm(back_csv - p95.field) < 1e-12
        assert l2_norm(back_bin - p95.field) == 0.0
