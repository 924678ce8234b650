"""
Tests for the Lyapunov generator, two-mode rotations and gauge transforms.
"""

import numpy as np
import pytest
import scipy.linalg

from guideforge.couplings import CouplingSet, compute_couplings, coupling_matrices_exact
from guideforge.diabatic import (
    GaugeField,
    adiabatic_to_diabatic,
    conjugate_hamiltonian,
    gauge_extra_terms,
    gauge_transform,
    lyapunov_residual,
    overlap_intermediates,
    rotation,
    solve_lyapunov,
    transport_links,
)
from guideforge.effective import ApproximationTier, assemble_effective, merge_kinetic
from guideforge.errors import DimensionMismatch, NotPositiveDefinite, UnitarityDrift
from guideforge.geometry import straight
from guideforge.longitudinal import solve_spectrum

J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def adjoint(a):
    return np.conj(np.swapaxes(a, -1, -2))


def random_pair(rng, n, complex_=False):
    """Positive-definite D with eigenvalues in [0.5, 2] and a skew-Hermitian F."""
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    D = Q @ np.diag(rng.uniform(0.5, 2.0, n)) @ Q.T
    X = rng.normal(size=(n, n))
    if complex_:
        X = X + 1j * rng.normal(size=(n, n))
    return D, 0.5 * (X - adjoint(X))


def two_mode_set(slices, energies=(1.25, 1.75)):
    """Couplings of two uncoupled channels on a straight guide."""
    N = slices.size
    zero = np.zeros((N, 2, 2))
    return CouplingSet(
        slices=slices,
        subset=(0, 1),
        V=np.broadcast_to(np.diag(energies), (N, 2, 2)).copy(),
        D=np.broadcast_to(np.eye(2), (N, 2, 2)).copy(),
        C=zero.copy(),
        F=zero.copy(),
        G=zero.copy(),
        VBH=zero.copy(),
        kappa=np.zeros(N),
    )


def _sym(x):
    return 0.5 * (x + x.T)


def _skew(x):
    return 0.5 * (x - x.T)


_rng = np.random.default_rng(23)
FAMILY = {
    "D0": np.diag([1.0, 1.5, 2.2]),
    "D1": 0.1 * _sym(_rng.normal(size=(3, 3))),
    "D2": 0.05 * _sym(_rng.normal(size=(3, 3))),
    "F0": _skew(_rng.normal(size=(3, 3))),
    "F1": 0.5 * _skew(_rng.normal(size=(3, 3))),
    "Y1": _skew(_rng.normal(size=(3, 3))),
    "Y2": 0.7 * _skew(_rng.normal(size=(3, 3))),
}


def smooth_family(u):
    """
    Analytic D, F and A = exp(a Y1) exp(b Y2) at u with their u-derivatives.

    S = A^H dA/du = a' R + b' Y2 with R = exp(-b Y2) Y1 exp(b Y2).
    """
    f = FAMILY
    a, da, dda = 0.4 * np.sin(u), 0.4 * np.cos(u), -0.4 * np.sin(u)
    b, db, ddb = 0.3 * u + 0.1 * u**2, 0.3 + 0.2 * u, 0.2
    E2 = scipy.linalg.expm(b * f["Y2"])
    A = scipy.linalg.expm(a * f["Y1"]) @ E2
    R = E2.T @ f["Y1"] @ E2
    S = da * R + db * f["Y2"]
    dS = dda * R + da * db * (R @ f["Y2"] - f["Y2"] @ R) + ddb * f["Y2"]
    D = f["D0"] + np.sin(u) * f["D1"] + 0.5 * (1.0 - np.cos(u)) * f["D2"]
    dD = np.cos(u) * f["D1"] + 0.5 * np.sin(u) * f["D2"]
    F = f["F0"] + np.cos(u) * f["F1"]
    dF = -np.sin(u) * f["F1"]
    return A, S, dS, D, dD, F, dF


def kinetic(D, dD, F, dF, psi, dpsi, ddpsi):
    """-1/2 [d D d + {F, d}] - F^2 / 2 applied to psi given its derivatives."""
    return -0.5 * (dD @ dpsi + D @ ddpsi + 2.0 * F @ dpsi + dF @ psi) - 0.5 * F @ F @ psi


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


class TestLyapunov:
    """{D, S} = 2F."""

    @pytest.mark.parametrize("n", range(2, 9))
    def test_random_residuals(self, n):
        rng = np.random.default_rng(1000 + n)
        for _ in range(150):
            D, F = random_pair(rng, n, complex_=bool(rng.integers(2)))
            S = solve_lyapunov(D, F)
            assert lyapunov_residual(D, F, S) < 1e-12 * max(1.0, np.linalg.norm(F))
            np.testing.assert_allclose(S, -adjoint(S), atol=1e-14)

    def test_rotation_covariance(self):
        """Rotating D and F rotates S the same way."""
        rng = np.random.default_rng(7)
        for n in (2, 5, 8):
            D, F = random_pair(rng, n)
            U, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
            S = solve_lyapunov(D, F)
            rotated = solve_lyapunov(U @ D @ adjoint(U), U @ F @ adjoint(U))
            np.testing.assert_allclose(rotated, U @ S @ adjoint(U), atol=1e-10)

    def test_diagonal_weight(self):
        f = 0.7
        np.testing.assert_allclose(solve_lyapunov(np.diag([1.0, 3.0]), f * J), 0.5 * f * J, atol=1e-15)

    def test_stacked_input(self):
        rng = np.random.default_rng(3)
        pairs = [random_pair(rng, 3) for _ in range(4)]
        D = np.array([p[0] for p in pairs])
        F = np.array([p[1] for p in pairs])
        S = solve_lyapunov(D, F)
        assert S.shape == (4, 3, 3)
        np.testing.assert_allclose(S[2], solve_lyapunov(D[2], F[2]))

    def test_indefinite_weight(self):
        with pytest.raises(NotPositiveDefinite):
            solve_lyapunov(np.diag([1.0, -0.5]), J)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve_lyapunov(np.eye(2), np.zeros((3, 3)))


class TestTwoModeRotation:
    """Path-ordered products against the closed-form mixing angle."""

    @pytest.fixture
    def synthetic(self):
        u = np.linspace(-3.0, 3.0, 241)
        F = (0.3 / (1.0 + u**2))[:, None, None] * J
        D = np.zeros((u.size, 2, 2))
        D[:, 0, 0] = 1.0 + 0.1 * np.sin(u)
        D[:, 1, 1] = 1.2
        return u, F, D

    def test_product_equals_closed_form(self, synthetic):
        u, F, D = synthetic
        gauge = adiabatic_to_diabatic(solve_lyapunov(D, F), u, F=F, D=D)
        assert gauge.gamma is not None
        np.testing.assert_allclose(adjoint(gauge.A), rotation(gauge.gamma), atol=1e-10)
        assert gauge.unitarity_defect() < 1e-12

    def test_mixing_angle_is_monotone(self, synthetic):
        """The angle starts at zero and grows while F_12 > 0."""
        u, F, D = synthetic
        gauge = adiabatic_to_diabatic(solve_lyapunov(D, F), u, F=F, D=D)
        assert gauge.gamma[0] == 0.0
        assert np.all(np.diff(gauge.gamma) > 0.0)

    def test_derivative_coupling_is_removed(self, synthetic):
        u, F, D = synthetic
        gauge = adiabatic_to_diabatic(solve_lyapunov(D, F), u, F=F, D=D)
        assert np.max(np.abs(gauge.residual_F)) < 1e-12
        assert gauge.derivative_residual() < 5e-4

    def test_closed_form_gap_is_recorded(self, synthetic):
        u, F, D = synthetic
        gauge = adiabatic_to_diabatic(solve_lyapunov(D, F), u, F=F, D=D)
        assert gauge.closed_form_gap is not None
        assert gauge.closed_form_gap < 1e-10

    def test_gap_is_recorded_from_a_rotated_start(self, synthetic):
        u, F, D = synthetic
        A0 = rotation(np.array(0.7)).T
        gauge = adiabatic_to_diabatic(solve_lyapunov(D, F), u, A0=A0, F=F, D=D)
        assert gauge.closed_form_gap < 1e-10
        np.testing.assert_allclose(gauge.A[0], A0, atol=1e-14)

    def test_generator_inconsistent_with_couplings(self, synthetic):
        """A generator for twice the coupling rotates twice as far as the closed form."""
        u, F, D = synthetic
        with pytest.raises(UnitarityDrift, match="closed-form"):
            adiabatic_to_diabatic(solve_lyapunov(D, 2.0 * F), u, F=F, D=D)

    def test_no_closed_form_beyond_two_modes(self):
        u = np.linspace(0.0, 1.0, 21)
        D = np.broadcast_to(np.diag([1.0, 1.3, 1.8]), (u.size, 3, 3)).copy()
        F = np.zeros((u.size, 3, 3))
        F[:, 0, 2], F[:, 2, 0] = 0.2 * np.cos(u), -0.2 * np.cos(u)
        gauge = adiabatic_to_diabatic(solve_lyapunov(D, F), u, F=F, D=D)
        assert gauge.gamma is None
        assert gauge.closed_form_gap is None

    def test_rotation_is_orthogonal(self):
        R = rotation(np.array([0.0, 0.4, 2.0]))
        np.testing.assert_allclose(adjoint(R) @ R, np.broadcast_to(np.eye(2), (3, 2, 2)), atol=1e-15)
        np.testing.assert_allclose(R[0], np.eye(2))

    def test_start_must_be_unitary(self, synthetic):
        u, F, D = synthetic
        with pytest.raises(ValueError):
            adiabatic_to_diabatic(solve_lyapunov(D, F), u, A0=2.0 * np.eye(2))

    def test_generator_count_must_match(self, synthetic):
        u, F, D = synthetic
        with pytest.raises(DimensionMismatch):
            adiabatic_to_diabatic(solve_lyapunov(D, F)[:-1], u)


class TestGaugeTransform:
    """Component-wise transforms against block conjugation."""

    def test_extra_terms_vanish_for_unit_weight(self):
        rng = np.random.default_rng(11)
        _, F = random_pair(rng, 4)
        _, S = random_pair(rng, 4)
        extra = gauge_extra_terms(np.eye(4), S, F, np.zeros((4, 4)))
        np.testing.assert_allclose(extra, 0.0, atol=1e-12)

    @pytest.mark.parametrize("u", np.linspace(-1.0, 2.0, 7))
    def test_extra_terms_close_the_kinetic_transform(self, u):
        """
        A T(D, F) A^H - T(D~, F~) is the multiplication by -1/2 A E A^H.

        T = -1/2 [d D d + {F, d}] - F^2/2 is applied to f(u) e_j through
        exact derivatives, so each column of the shift is read off directly.
        """
        A, S, dS, D, dD, F, dF = smooth_family(u)
        Ah = A.T
        M = F - 0.5 * anticommutator(D, S)
        dM = dF - 0.5 * (anticommutator(dD, S) + anticommutator(D, dS))
        Dt, dDt = A @ D @ Ah, A @ (dD + commutator(S, D)) @ Ah
        Ft, dFt = A @ M @ Ah, A @ (dM + commutator(S, M)) @ Ah
        f, df, ddf = 2.0 + np.sin(u), np.cos(u), -np.sin(u)

        shift = np.empty((3, 3))
        for j, e in enumerate(np.eye(3)):
            psi = f * Ah @ e
            dpsi = (df * Ah - f * S @ Ah) @ e
            ddpsi = (f * (S @ S - dS) @ Ah - 2.0 * df * S @ Ah + ddf * Ah) @ e
            lhs = A @ kinetic(D, dD, F, dF, psi, dpsi, ddpsi)
            rhs = kinetic(Dt, dDt, Ft, dFt, f * e, df * e, ddf * e)
            shift[:, j] = (lhs - rhs) / f

        dSD = commutator(dS, D) + commutator(S, dD)
        expected = -0.5 * A @ gauge_extra_terms(D, S, F, dSD) @ Ah
        assert np.max(np.abs(expected)) > 1e-2
        np.testing.assert_allclose(shift, expected, rtol=0.0, atol=1e-10)
        np.testing.assert_allclose(expected, expected.T, atol=1e-12)

    def test_born_huang_shift_matches_the_kinetic_shift(self):
        """The transformed V_BH moves by the same -1/2 A E A^H, up to the slice differencing of [S, D]."""
        u = np.linspace(0.0, 2.0, 2001)
        parts = [smooth_family(x) for x in u]
        A, S, dS, D, dD, F, dF = (np.array(p) for p in zip(*parts))
        N = u.size
        zero = np.zeros((N, 3, 3))
        couplings = CouplingSet(
            slices=u, subset=(0, 1, 2), V=zero.copy(), D=D, C=zero.copy(), F=F, G=zero.copy(),
            VBH=zero.copy(), kappa=np.zeros(N),
        )
        transformed = gauge_transform(couplings, GaugeField(slices=u, S=S, A=A))

        dSD = commutator(dS, D) + commutator(S, dD)
        expected = -0.5 * A @ gauge_extra_terms(D, S, F, dSD) @ adjoint(A)
        np.testing.assert_allclose(transformed.VBH, expected, rtol=0.0, atol=1e-5)
        np.testing.assert_allclose(transformed.F, A @ (F - 0.5 * anticommutator(D, S)) @ adjoint(A), atol=1e-12)

    def test_identity_gauge(self, varying_guide):
        g = varying_guide
        couplings = compute_couplings(g.bundle, g.frame, g.curve, [0, 1])
        out = gauge_transform(couplings, GaugeField.identity(couplings.slices, 2))
        for name in ("V", "D", "C", "F", "G", "VBH"):
            np.testing.assert_allclose(getattr(out, name), getattr(couplings, name), atol=1e-13, err_msg=name)

    def test_from_unitaries(self):
        u = straight(np.pi).grid(129)
        A = adjoint(rotation(0.3 * np.sin(u)))
        gauge = GaugeField.from_unitaries(u, A)
        assert gauge.unitarity_defect() < 1e-14
        np.testing.assert_allclose(gauge.S[:, 0, 1], 0.3 * np.cos(u), atol=1e-3)
        assert gauge.derivative_residual() < 1e-3

    def test_conjugation_preserves_spectrum(self, varying_guide):
        g = varying_guide
        couplings = compute_couplings(g.bundle, g.frame, g.curve, [0, 1])
        H = assemble_effective(couplings, ApproximationTier("subset_bh", (0, 1)))
        gauge = GaugeField.from_unitaries(couplings.slices, adjoint(rotation(0.3 * np.sin(couplings.slices))))
        conjugated = conjugate_hamiltonian(H, gauge)
        before = scipy.linalg.eigvalsh(H.assembled.toarray())
        after = scipy.linalg.eigvalsh(conjugated.toarray())
        np.testing.assert_allclose(after, before, rtol=1e-9)

    def test_component_wise_transform(self):
        """Rotated couplings of two straight channels reproduce the channel levels."""
        slices = straight(np.pi).grid(129)
        couplings = two_mode_set(slices)
        tier = ApproximationTier("subset_bh", (0, 1))
        gauge = GaugeField.from_unitaries(slices, adjoint(rotation(0.3 * np.sin(slices))))
        transformed = gauge_transform(couplings, gauge)
        assert np.max(np.abs(transformed.F)) > 0.1

        H = assemble_effective(couplings, tier)
        rotated = assemble_effective(transformed, tier)
        before = solve_spectrum(H, 3).eigenvalues
        after = solve_spectrum(rotated, 3).eigenvalues
        step = slices[1] - slices[0]
        lowest = 1.25 + (1.0 - np.cos(np.pi / (slices.size - 1))) / step**2
        assert before[0] == pytest.approx(lowest, rel=1e-12)
        np.testing.assert_allclose(after, before, rtol=1e-9)
        assert abs(rotated.assembled - conjugate_hamiltonian(H, gauge)).max() < 1e-9

    @pytest.mark.parametrize("tag", ["subset_bh", "subset_bh_merged"])
    def test_component_wise_transform_with_metric_weight(self, varying_guide, tag):
        """On a curved guide D != 1, F and V_BH both shift, and the operator is conjugated exactly."""
        g = varying_guide
        couplings = compute_couplings(g.bundle, g.frame, g.curve, [0, 1])
        if tag == "subset_bh_merged":
            couplings = merge_kinetic(couplings)
        tier = ApproximationTier(tag, (0, 1))
        gauge = GaugeField.from_unitaries(couplings.slices, adjoint(rotation(0.3 * np.sin(couplings.slices))))
        transformed = gauge_transform(couplings, gauge)

        A = gauge.A
        assert np.max(np.abs(couplings.D - np.eye(2))) > 1e-3
        assert np.max(np.abs(transformed.F - couplings.F)) > 0.1
        assert np.max(np.abs(transformed.VBH - A @ couplings.VBH @ adjoint(A))) > 1e-5

        H = assemble_effective(couplings, tier)
        rotated = assemble_effective(transformed, tier)
        assert abs(rotated.assembled - conjugate_hamiltonian(H, gauge)).max() < 1e-9
        np.testing.assert_allclose(
            scipy.linalg.eigvalsh(rotated.assembled.toarray())[:6],
            scipy.linalg.eigvalsh(H.assembled.toarray())[:6],
            rtol=1e-9,
        )

    def test_links_transform_covariantly(self, varying_guide):
        """U_i -> A_i U_i A_i+1^H, the discrete form of d + F' -> A (d + F') A^H."""
        g = varying_guide
        couplings = merge_kinetic(compute_couplings(g.bundle, g.frame, g.curve, [0, 1]))
        gauge = GaugeField.from_unitaries(couplings.slices, adjoint(rotation(0.3 * np.sin(couplings.slices))))
        transformed = gauge_transform(couplings, gauge)
        links = transport_links(couplings.Fp, couplings.slices)
        A = gauge.A
        np.testing.assert_allclose(transformed.links, A[:-1] @ links @ adjoint(A[1:]), atol=1e-12)
        eye = np.broadcast_to(np.eye(2), links.shape)
        np.testing.assert_allclose(adjoint(transformed.links) @ transformed.links, eye, atol=1e-12)
        np.testing.assert_allclose(transformed.VpBH, A @ couplings.VpBH @ adjoint(A), atol=1e-12)

    def test_transport_links(self):
        u = np.linspace(0.0, 1.0, 11)
        W = 0.5 * np.broadcast_to(J, (u.size, 2, 2))
        links = transport_links(W, u)
        assert links.shape == (10, 2, 2)
        np.testing.assert_allclose(links, np.broadcast_to(scipy.linalg.expm(0.05 * J), (10, 2, 2)), atol=1e-14)
        np.testing.assert_array_equal(transport_links(np.zeros_like(W), u), np.broadcast_to(np.eye(2), (10, 2, 2)))

    def test_mismatched_gauge(self, varying_guide):
        g = varying_guide
        couplings = compute_couplings(g.bundle, g.frame, g.curve, [0, 1])
        with pytest.raises(DimensionMismatch):
            gauge_transform(couplings, GaugeField.identity(couplings.slices, 3))

    def test_overlap_intermediates(self, varying_guide):
        """2F = L^H - L on a curved slice."""
        g = varying_guide
        u = float(g.bundle.slices[30])
        L, Dring = overlap_intermediates(g.bundle, g.curve, g.frame, [0, 1, 3], u)
        F = coupling_matrices_exact(g.bundle, g.frame, g.curve, [0, 1, 3], u).F
        np.testing.assert_allclose(0.5 * (adjoint(L) - L), F, atol=1e-12)
        np.testing.assert_allclose(Dring, adjoint(Dring))
