"""
Tests for the transverse eigenproblem and mode bundles.
"""

import numpy as np
import pytest

from guideforge.errors import DegeneracyNotice, DimensionMismatch, PresetMismatch, TrackingAmbiguity
from guideforge.geometry import straight
from guideforge.transverse import (
    TabulatedProfile,
    TransverseGrid,
    build_transverse_hamiltonian,
    compute_mode_bundle,
    dirichlet_box,
    double_well,
    harmonic_anisotropic,
    harmonic_isotropic,
    laplacian,
    mode_derivatives,
    solve_slice,
    solve_transverse_modes,
    tabulated_profile,
)
from guideforge.transverse.hamiltonian import SECOND_DERIVATIVE, laplacian_1d


class TestTransverseGrid:
    """Interior-point grid geometry."""

    def test_spacing_and_walls(self):
        """Walls sit one spacing beyond the outermost interior points."""
        grid = TransverseGrid(9, 4, 1.0, 2.0)
        assert grid.hx == pytest.approx(0.2)
        assert grid.hy == pytest.approx(0.8)
        assert grid.x[0] == pytest.approx(-0.8)
        assert grid.x[-1] == pytest.approx(0.8)
        assert grid.size == 36
        assert grid.weight == pytest.approx(0.16)

    def test_refined_halves_spacing(self):
        grid = TransverseGrid(9, 9, 1.0, 1.0)
        assert grid.refined().hx == pytest.approx(grid.hx / 2)

    @pytest.mark.parametrize("nx,lx", [(2, 1.0), (5, 0.0), (5, -1.0)])
    def test_invalid_grids(self, nx, lx):
        with pytest.raises(ValueError):
            TransverseGrid(nx, 5, lx, 1.0)


class TestTransverseSpectrum:
    """Eigenvalues of H_perp against the oscillator ladders."""

    def test_isotropic_ladder(self):
        """omega = 1 gives 1, 2, 2; the symmetric pair is flagged as degenerate."""
        grid = TransverseGrid(40, 40, 6.0, 6.0)
        H = build_transverse_hamiltonian(grid, harmonic_isotropic(1.0), 0.0)
        with pytest.warns(DegeneracyNotice):
            energies, vectors, pairs = solve_transverse_modes(H, 3)
        np.testing.assert_allclose(energies, [1.0, 2.0, 2.0], atol=2e-2)
        assert (1, 2) in pairs

    def test_anisotropic_ladder(self):
        """(omega2, omega3) = (1, 2) gives 1.5, 2.5, 3.5."""
        grid = TransverseGrid(60, 60, 6.0, 6.0)
        H = build_transverse_hamiltonian(grid, harmonic_anisotropic(1.0, 2.0), 0.0)
        energies, _, _ = solve_transverse_modes(H, 3)
        np.testing.assert_allclose(energies, [1.5, 2.5, 3.5], atol=3e-2)

    def test_discretization_error_is_second_order(self):
        """Halving the spacing cuts the ground-state error by about four."""
        pot = harmonic_isotropic(1.0)
        coarse = TransverseGrid(15, 15, 6.0, 6.0)
        errors = []
        for grid in (coarse, coarse.refined()):
            energies, _, _ = solve_transverse_modes(build_transverse_hamiltonian(grid, pot, 0.0), 1)
            errors.append(abs(energies[0] - 1.0))
        assert 3.0 < errors[0] / errors[1] < 5.0

    def test_operator_is_symmetric(self):
        grid = TransverseGrid(12, 10, 3.0, 3.0)
        H = build_transverse_hamiltonian(grid, double_well(3.0, 1.5, 2.0, tilt=0.4), 0.0)
        assert abs(H - H.T).max() == 0.0

    def test_modes_are_orthonormal(self):
        grid = TransverseGrid(20, 16, 5.0, 4.0)
        _, modes, _ = solve_slice(grid, harmonic_anisotropic(1.0, 1.7), 0.0, 4)
        gram = grid.inner(modes, modes)
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-10)

    def test_hard_wall_box_matches_discrete_sine(self):
        """Eliminated points act as walls; the ground level is the discrete sine value."""
        grid = TransverseGrid(29, 29, 1.5, 1.5)
        energies, modes, _ = solve_slice(grid, dirichlet_box(0.95, 0.95), 0.0, 1)
        h = grid.hx
        expected = 2.0 * (1.0 - np.cos(np.pi / 20)) / h**2
        assert energies[0] == pytest.approx(expected, rel=1e-10)
        X, Y = grid.mesh
        outside = (np.abs(X) > 0.95) | (np.abs(Y) > 0.95)
        assert np.all(modes[0, outside] == 0.0)

    def test_box_has_no_u1_derivative(self):
        grid = TransverseGrid(5, 5, 1.0, 1.0)
        X, Y = grid.mesh
        with pytest.raises(PresetMismatch):
            dirichlet_box(0.5, 0.5).transverse_dot(X, Y, 0.0)

    def test_tabulated_profile_matches_analytic(self):
        """A sampled quadratic is reproduced by the cubic interpolant."""
        axis = np.linspace(-6.0, 6.0, 81)
        U2, U3 = np.meshgrid(axis, axis, indexing="ij")
        table = TabulatedProfile(u2=axis, u3=axis, values=0.5 * (U2**2 + U3**2))
        grid = TransverseGrid(20, 20, 5.0, 5.0)
        with pytest.warns(DegeneracyNotice):
            tab, _, _ = solve_slice(grid, tabulated_profile(table), 0.0, 3)
        with pytest.warns(DegeneracyNotice):
            ref, _, _ = solve_slice(grid, harmonic_isotropic(1.0), 0.0, 3)
        np.testing.assert_allclose(tab, ref, atol=1e-8)

    def test_mode_cap(self):
        grid = TransverseGrid(10, 10, 3.0, 3.0)
        H = build_transverse_hamiltonian(grid, harmonic_isotropic(1.0), 0.0)
        with pytest.raises(DimensionMismatch):
            solve_transverse_modes(H, 5, mode_cap=4)

    def test_more_modes_than_grid_points(self):
        """Ten modes cannot come from a 3x3 grid; the failure is a solver error."""
        grid = TransverseGrid(3, 3, 1.0, 1.0)
        H = build_transverse_hamiltonian(grid, harmonic_isotropic(1.0), 0.0)
        with pytest.raises(DimensionMismatch, match="size 9"):
            solve_transverse_modes(H, 10, mode_cap=16)


class TestStencilOrder:
    """Higher-order Laplacians with walls imposed by odd reflection."""

    @pytest.mark.parametrize("order", [2, 4, 6])
    def test_sine_modes_are_exact_eigenvectors(self, order):
        """Each wall-respecting sine is an eigenvector with the stencil's symbol as eigenvalue."""
        n, h = 17, 0.25
        L = laplacian_1d(n, h, order)
        weights = SECOND_DERIVATIVE[order]
        p = np.arange(1, n + 1)
        for j in (1, 2, 7):
            theta = j * np.pi / (n + 1)
            v = np.sin(theta * p)
            symbol = (weights[0] + 2 * sum(w * np.cos(k * theta) for k, w in enumerate(weights) if k)) / h**2
            np.testing.assert_allclose(L @ v, symbol * v, atol=1e-10)

    @pytest.mark.parametrize("order", [2, 4, 6])
    def test_operator_is_symmetric(self, order):
        grid = TransverseGrid(9, 11, 2.0, 3.0)
        L = laplacian(grid, order)
        assert abs(L - L.T).max() == 0.0

    def test_error_falls_with_order(self):
        """The lowest sine eigenvalue approaches -(pi / 2l)^2 faster as the order rises."""
        n, width = 15, 2.0
        h = width / (n + 1)
        exact = -((np.pi / width) ** 2)
        errors = [
            abs(np.sort(np.linalg.eigvalsh(laplacian_1d(n, h, order).toarray()))[-1] - exact)
            for order in (2, 4, 6)
        ]
        assert errors[0] > 20 * errors[1] > 400 * errors[2]

    def test_sixth_order_oscillator_ladder(self):
        """(omega2, omega3) = (1, 2) reaches 1.5, 2.5, 3.5 far below the second-order error."""
        grid = TransverseGrid(60, 60, 6.0, 6.0)
        H = build_transverse_hamiltonian(grid, harmonic_anisotropic(1.0, 2.0), 0.0, stencil_order=6)
        energies, _, _ = solve_transverse_modes(H, 3, lower_bound=0.0)
        np.testing.assert_allclose(energies, [1.5, 2.5, 3.5], atol=5e-4)

    def test_too_few_points_for_the_stencil(self):
        with pytest.raises(ValueError):
            laplacian_1d(3, 0.1, 6)

    def test_unknown_order(self):
        with pytest.raises(ValueError):
            laplacian_1d(10, 0.1, 3)


class TestModeBundle:
    """Alignment, tracking and u1 derivatives of the slice modes."""

    def test_straight_bundle_is_constant(self, straight_guide):
        bundle = straight_guide.bundle
        assert np.ptp(bundle.energies, axis=0).max() < 1e-12
        assert np.max(np.abs(bundle.dmodes)) < 1e-10
        assert bundle.orthonormality_defect() < 1e-10

    def test_adjacent_overlaps_are_positive(self, varying_guide):
        """The smooth gauge keeps every diagonal overlap close to one."""
        diag = np.diagonal(varying_guide.bundle.overlap_log, axis1=1, axis2=2)
        assert diag.min() > 0.99

    def test_derivatives_follow_the_profile(self, varying_guide):
        """Energies grow with omega2(u1) = 3 + 0.1 u1 at rate (n2 + 1/2) * 0.1."""
        bundle = varying_guide.bundle
        slope = np.gradient(bundle.energies[:, 0], bundle.slices)
        np.testing.assert_allclose(slope[5:-5], 0.05, rtol=5e-2)

    def test_slice_index(self, straight_guide):
        bundle = straight_guide.bundle
        assert bundle.slice_index(bundle.slices[7]) == 7
        with pytest.raises(ValueError):
            bundle.slice_index(0.5 * (bundle.slices[0] + bundle.slices[1]))

    def test_fast_rotation_breaks_tracking(self):
        """A twist of one radian per slice drops the overlap below a strict threshold."""
        curve = straight(2.0)
        pot = harmonic_anisotropic(1.0, 2.0, twist_alpha=lambda u: 2.0 * u, twist_alpha_dot=2.0)
        with pytest.raises(TrackingAmbiguity):
            compute_mode_bundle(
                TransverseGrid(16, 16, 5.0, 5.0), pot, curve.grid(5), 2, tracked=1, min_overlap=0.999999
            )

    def test_mode_derivatives_need_six_slices(self):
        with pytest.raises(ValueError):
            mode_derivatives(np.zeros((5, 2, 4)), 0.1)

    def test_mode_derivatives_are_exact_for_quintics(self):
        """The quintic spline differentiates a degree-5 polynomial in u1 exactly, ends included."""
        u = np.linspace(0.0, 1.0, 8)
        modes = (u**5 - 2 * u**3 + u)[:, None, None] * np.array([1.0, -0.5, 2.0])[None, None, :]
        d1, d2 = mode_derivatives(modes, u[1] - u[0])
        np.testing.assert_allclose(d1[:, 0, 0], 5 * u**4 - 6 * u**2 + 1, atol=1e-9)
        np.testing.assert_allclose(d2[:, 0, 2], 2.0 * (20 * u**3 - 12 * u), atol=1e-7)

    def test_mode_derivatives_converge_at_high_order(self):
        """Doubling the slices cuts the error on sin(u1) by far more than the second-order factor four."""
        errors = []
        for n in (17, 33):
            u = np.linspace(0.0, 2.0, n)
            d1, _ = mode_derivatives(np.sin(u)[:, None, None], u[1] - u[0])
            errors.append(np.max(np.abs(d1[:, 0, 0] - np.cos(u))))
        assert errors[0] / errors[1] > 16.0
        assert errors[1] < 1e-5
