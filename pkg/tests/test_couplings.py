"""
Tests for coupling matrices: quadrature, truncated series and
Hellmann-Feynman estimates.
"""

import numpy as np
import pytest

from guideforge.couplings import (
    born_huang_flat,
    build_moment_table,
    compute_couplings,
    coupling_matrices_exact,
    coupling_matrices_series,
    hellmann_feynman_F,
    moment_matrix,
)
from guideforge.errors import DimensionMismatch, SeriesDomainError
from guideforge.geometry import circular_arc, straight
from guideforge.transverse import TransverseGrid, compute_mode_bundle, harmonic_anisotropic


@pytest.fixture(scope="module")
def breathing_guide():
    """Straight guide whose u2 frequency grows as 1 + 0.1 u1; the u3 direction is stiff."""
    curve = straight(0.4, u1_min=-0.2)
    pot = harmonic_anisotropic(lambda u: 1.0 + 0.1 * u, 4.0)
    bundle = compute_mode_bundle(TransverseGrid(100, 6, 6.0, 1.0), pot, curve.grid(41), 4)
    return curve, pot, bundle


@pytest.fixture(scope="module")
def stiff_bundle():
    """Nondegenerate (4, 5) oscillator modes that do not depend on u1."""
    curve = straight(1.0)
    return compute_mode_bundle(TransverseGrid(20, 20, 2.0, 2.0), harmonic_anisotropic(4.0, 5.0), curve.grid(9), 4)


class TestExactCouplings:
    """Closed-form quadrature of V, D, C, F, G and the Born-Huang potential."""

    def test_straight_guide_has_trivial_couplings(self, straight_guide):
        g = straight_guide
        couplings = compute_couplings(g.bundle, g.frame, g.curve, [0, 1, 2])
        eye = np.eye(3)
        np.testing.assert_allclose(couplings.D, np.broadcast_to(eye, couplings.D.shape), atol=1e-12)
        for name in ("C", "F", "G", "VBH"):
            assert np.max(np.abs(getattr(couplings, name))) < 1e-10, name
        np.testing.assert_allclose(
            np.diagonal(couplings.V, axis1=1, axis2=2), g.bundle.energies, atol=1e-12
        )

    def test_arc_metric_weight(self, arc_guide):
        """<(1 - kappa u2)^-2> of the ground state is 1 + 3 kappa^2/(2 omega) + 15 kappa^4/(4 omega^2) + ..."""
        g = arc_guide
        part = coupling_matrices_exact(g.bundle, g.frame, g.curve, [0], float(g.bundle.slices[10]))
        kappa, omega = 0.2, 4.0
        expected = 1.0 + 1.5 * kappa**2 / omega + 3.75 * kappa**4 / omega**2
        assert part.D[0, 0] == pytest.approx(expected, abs=1e-3)
        assert part.C[0, 0] == pytest.approx(0.25 * kappa**2 * expected, abs=1e-3)

    def test_arc_with_constant_profile_has_no_derivative_coupling(self, arc_guide):
        g = arc_guide
        couplings = compute_couplings(g.bundle, g.frame, g.curve, [0, 1])
        assert np.max(np.abs(couplings.F)) < 1e-10
        assert np.max(np.abs(couplings.G)) < 1e-10

    def test_symmetries(self, varying_guide):
        """D, C, G, V_BH are Hermitian and F is skew-Hermitian."""
        g = varying_guide
        couplings = compute_couplings(g.bundle, g.frame, g.curve, [0, 1, 3])
        assert couplings.check_symmetries()
        assert np.max(np.abs(couplings.F)) > 1e-3

    def test_subset_validation(self, straight_guide):
        g = straight_guide
        u = float(g.bundle.slices[3])
        with pytest.raises(DimensionMismatch):
            coupling_matrices_exact(g.bundle, g.frame, g.curve, [0, 0], u)
        with pytest.raises(DimensionMismatch):
            coupling_matrices_exact(g.bundle, g.frame, g.curve, [5], u)
        with pytest.raises(DimensionMismatch):
            coupling_matrices_exact(g.bundle, g.frame, g.curve, [], u)

    def test_breathing_coupling_matches_oscillator(self, breathing_guide):
        """|F_02| = omega_dot / (2 sqrt(2) omega) at u1 = 0."""
        curve, _, bundle = breathing_guide
        u = float(bundle.slices[20])
        F = coupling_matrices_exact(bundle, None, curve, [0, 1, 2, 3], u).F
        assert abs(F[0, 2]) == pytest.approx(0.1 / (2.0 * np.sqrt(2.0)), rel=2e-2)
        assert abs(F[0, 1]) < 1e-8

    def test_straight_F_equals_plain_overlap(self, breathing_guide):
        """With D = 1 the coupling is <phi_0|d phi_2>."""
        curve, _, bundle = breathing_guide
        i = 20
        F = coupling_matrices_exact(bundle, None, curve, [0, 2], float(bundle.slices[i])).F
        overlap = bundle.inner(bundle.modes[i, 0], bundle.dmodes[i, 2])
        assert F[0, 1] == pytest.approx(overlap, abs=1e-7)

    def test_flat_born_huang(self, breathing_guide):
        """Only the breathing partner contributes: V_BH0 of the ground mode is F_02^2 / 2."""
        curve, _, bundle = breathing_guide
        u = float(bundle.slices[20])
        part = coupling_matrices_exact(bundle, None, curve, [0, 2], u)
        flat = born_huang_flat(bundle, [0], u)
        assert flat[0, 0] == pytest.approx(0.5 * part.F[0, 1] ** 2, rel=1e-2)
        single = coupling_matrices_exact(bundle, None, curve, [0], u)
        assert single.VBH[0, 0] == pytest.approx(flat[0, 0], rel=1e-2)


class TestMoments:
    """Moment tables of nhat and bhat."""

    def test_zeroth_moment_is_identity(self, straight_guide):
        bundle = straight_guide.bundle
        np.testing.assert_allclose(moment_matrix(bundle, None, 0, 0, float(bundle.slices[2])), np.eye(3), atol=1e-10)

    def test_second_moment_of_ground_state(self, straight_guide):
        """<u2^2> = 1 / (2 omega) for omega = 1."""
        bundle = straight_guide.bundle
        m = moment_matrix(bundle, None, 2, 0, float(bundle.slices[2]))
        assert m[0, 0] == pytest.approx(0.5, rel=3e-2)

    def test_order_cap(self, straight_guide):
        bundle = straight_guide.bundle
        with pytest.raises(ValueError):
            moment_matrix(bundle, None, 3, 3, float(bundle.slices[0]))

    def test_table_matches_direct_moments(self, varying_guide):
        g = varying_guide
        table = build_moment_table(g.bundle, g.frame, 2)
        u = float(g.bundle.slices[20])
        np.testing.assert_allclose(table.E(1, 1, 20), moment_matrix(g.bundle, g.frame, 1, 1, u), atol=1e-12)


class TestSeries:
    """Truncated expansions in kappa nhat against the quadrature route."""

    @pytest.mark.parametrize("order", [0, 1, 2])
    def test_metric_weight_error_scales_with_order(self, stiff_bundle, order):
        """The D truncation error falls off as kappa^(order + 1)."""
        u = float(stiff_bundle.slices[4])
        moments = build_moment_table(stiff_bundle, None, order)
        kappas = np.array([0.01, 0.02, 0.04, 0.08])
        errors = []
        for kappa in kappas:
            arc = circular_arc(1.0 / kappa, 1.0)
            series = coupling_matrices_series(stiff_bundle, moments, arc, order, u, subset=[0, 1, 2])
            exact = coupling_matrices_exact(stiff_bundle, None, arc, [0, 1, 2], u)
            errors.append(np.max(np.abs(series.D - exact.D)))
        slope = np.polyfit(np.log(kappas), np.log(errors), 1)[0]
        assert slope == pytest.approx(order + 1, abs=0.3)

    def test_ledger_keys(self, stiff_bundle):
        moments = build_moment_table(stiff_bundle, None, 2)
        part = coupling_matrices_series(
            stiff_bundle, moments, circular_arc(10.0, 1.0), 2, float(stiff_bundle.slices[4]), subset=[0, 1]
        )
        assert {"D:0", "D:1", "D:2", "F:0", "C:0"} <= set(part.ledger)
        assert part.dominant_correction() in part.ledger

    def test_straight_series_matches_exact(self, straight_guide):
        """At kappa = 0 every correction vanishes: D = 1 and G = 0."""
        g = straight_guide
        moments = build_moment_table(g.bundle, g.frame, 2)
        u = float(g.bundle.slices[5])
        part = coupling_matrices_series(g.bundle, moments, g.curve, 2, u)
        np.testing.assert_allclose(part.D, np.eye(3), atol=1e-10)
        assert np.max(np.abs(part.G)) == 0.0
        assert np.max(np.abs(part.C)) == 0.0

    def test_series_outside_its_domain(self, stiff_bundle):
        """kappa times the mode reach must stay below one."""
        moments = build_moment_table(stiff_bundle, None, 1)
        with pytest.raises(SeriesDomainError):
            coupling_matrices_series(stiff_bundle, moments, circular_arc(1.0, 1.0), 1, float(stiff_bundle.slices[4]))

    def test_order_beyond_table(self, stiff_bundle):
        moments = build_moment_table(stiff_bundle, None, 1)
        with pytest.raises(ValueError):
            coupling_matrices_series(stiff_bundle, moments, circular_arc(10.0, 1.0), 2, float(stiff_bundle.slices[4]))


class TestHellmannFeynman:
    """Energy-denominator estimates of F."""

    def test_plain_estimate_on_straight_guide(self, breathing_guide):
        curve, pot, bundle = breathing_guide
        u = float(bundle.slices[20])
        exact = coupling_matrices_exact(bundle, None, curve, [0, 1, 2, 3], u).F
        plain = hellmann_feynman_F(bundle, curve, pot, None, u, variant="plain")
        assert plain[0, 2] == pytest.approx(exact[0, 2], rel=1e-2)
        assert np.all(np.isnan(np.diag(plain)))

    def test_generalized_equals_plain_without_curvature(self, breathing_guide):
        curve, pot, bundle = breathing_guide
        u = float(bundle.slices[20])
        plain = hellmann_feynman_F(bundle, curve, pot, None, u, variant="plain")
        general = hellmann_feynman_F(bundle, curve, pot, None, u, variant="generalized")
        off = ~np.eye(bundle.n_modes, dtype=bool)
        np.testing.assert_allclose(general[off], plain[off], rtol=1e-10, atol=1e-14)

    def test_generalized_estimate_on_curved_guide(self, varying_guide):
        """The metric-weighted estimate reproduces the D-weighted F of a clothoid."""
        g = varying_guide
        i = 32
        u = float(g.bundle.slices[i])
        subset = list(range(g.bundle.n_modes))
        exact = coupling_matrices_exact(g.bundle, g.frame, g.curve, subset, u).F
        general = hellmann_feynman_F(g.bundle, g.curve, g.pot, g.frame, u, variant="generalized")
        off = ~np.eye(len(subset), dtype=bool)
        m, n = np.unravel_index(np.argmax(np.where(off, np.abs(exact), 0.0)), exact.shape)
        assert general[m, n] == pytest.approx(exact[m, n], rel=2e-2)

    def test_degenerate_pairs_are_dropped(self, straight_guide):
        """The isotropic pair (1, 2) has no estimate."""
        g = straight_guide
        estimate = hellmann_feynman_F(g.bundle, g.curve, g.pot, g.frame, float(g.bundle.slices[4]))
        assert np.isnan(estimate[1, 2]) and np.isnan(estimate[2, 1])

    def test_unknown_variant(self, straight_guide):
        g = straight_guide
        with pytest.raises(ValueError):
            hellmann_feynman_F(g.bundle, g.curve, g.pot, g.frame, float(g.bundle.slices[4]), variant="exact")
