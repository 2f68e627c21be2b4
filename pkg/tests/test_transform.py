"""
Cauchy变换、不变算子与纤维积分反演测试
"""

import numpy as np
import pytest

from src.core.hypergeom import (
    X0, ZETA0, act, bilinear, boost, classify_horopoint, compose, delta, rotation,
    sample_interior_horopoint,
)
from src.core.transform import (
    TransformedFunction, apply_L, calibrate_euler_sign, cauchy_kernel, cauchy_transform, custom_function,
    euler_part, fiber_curve, fourier_component, geometric_tail_bound, get_euler_sign, integrate_over_X,
    inverse_transform, inversion_pipeline, kernel_partial_sum, linear_combination, matrix_coefficient,
    matrix_coefficient_constant, matrix_coefficient_transform, reset_euler_sign, rounding_allowance,
    schur_matrix, transform_batch, transform_samples, translate, zero_function,
)
from src.models.geometry_models import HyperboloidPoint
from src.models.transform_models import TransformSample
from src.utils.exceptions import (
    DegenerateFiberError, FiberDivergenceError, KernelSingularityError, NonFiniteValueError,
    NonInteriorPointError, ParameterDomainError,
)

INVERSION_CONSTANT = 4 * np.pi ** 2


def tube_point(s: float, sign: int = 1) -> np.ndarray:
    return np.array([np.cosh(s), sign * 1j * np.sinh(s), 0.0])


def off_slice(z: np.ndarray) -> np.ndarray:
    return act(compose([rotation(2.0), boost(1, 1.3), boost(2, -0.8), rotation(-0.5)]), z)


@pytest.fixture(autouse=True)
def fresh_euler_sign():
    reset_euler_sign()
    yield
    reset_euler_sign()


@pytest.fixture
def mc2(w_plus):
    return matrix_coefficient(w_plus, 2)


class TestTestFunctions:

    @pytest.mark.parametrize("lam", [0, -1, 1.5])
    def test_lambda_must_be_positive_integer(self, w_plus, lam):
        with pytest.raises(ParameterDomainError):
            matrix_coefficient(w_plus, lam)

    def test_w_must_be_interior(self):
        with pytest.raises(NonInteriorPointError):
            matrix_coefficient(classify_horopoint(ZETA0), 2)

    def test_matrix_coefficient_values(self, mc2):
        assert mc2(X0[None, :])[0] == pytest.approx(0.25)
        assert mc2.extension(tube_point(0.5)) == pytest.approx(np.exp(-1.0) / 4)
        assert mc2.describe()["lambda"] == 2

    def test_integrate_over_X(self, reduced_spec):
        f = custom_function("bump", lambda x: (1 + x[..., 2] ** 2) ** -2)
        assert integrate_over_X(f, reduced_spec) == pytest.approx(np.pi ** 2, rel=1e-10)

    def test_bad_shape_and_non_finite(self, reduced_spec):
        with pytest.raises(ParameterDomainError):
            integrate_over_X(custom_function("scalar", lambda x: np.ones(3)), reduced_spec)
        with pytest.raises(NonFiniteValueError):
            integrate_over_X(custom_function("nan", lambda x: np.full(x.shape[:-1], np.nan)), reduced_spec)


class TestKernel:

    def test_kernel_at_base_point(self, w_plus):
        assert cauchy_kernel(w_plus, HyperboloidPoint(X0.astype(complex))) == pytest.approx(1.0)

    def test_kernel_singularity(self, w_plus):
        x = HyperboloidPoint(np.array([0.5, 0.0, 1j * np.sqrt(3) / 2]))
        assert delta(x.vector) == pytest.approx(1.0)
        with pytest.raises(KernelSingularityError):
            cauchy_kernel(w_plus, x)

    def test_boundary_zeta_is_rejected(self):
        with pytest.raises(NonInteriorPointError):
            cauchy_kernel(classify_horopoint(ZETA0), HyperboloidPoint(X0.astype(complex)))

    @pytest.mark.parametrize("pairing", [2.0 + 1.0j, -1.5, 1.1j + 1.0, 30.0])
    def test_series_within_bound(self, pairing):
        exact = 1.0 / (pairing - 1.0)
        for terms in (1, 5, 40):
            error = abs(kernel_partial_sum(pairing, terms) - exact)
            assert error <= geometric_tail_bound(pairing, terms) + rounding_allowance(pairing, terms)


class TestCauchyTransform:

    def test_closed_form_value(self, mc2, zeta_minus, reduced_spec):
        value = cauchy_transform(mc2, zeta_minus, reduced_spec)
        assert value == pytest.approx(np.pi ** 2 / 16, rel=1e-8)
        assert matrix_coefficient_transform(mc2.w, 2, zeta_minus) == pytest.approx(np.pi ** 2 / 16)

    def test_vanishes_on_same_orientation(self, mc2, w_plus, reduced_spec):
        assert abs(cauchy_transform(mc2, w_plus, reduced_spec)) < 1e-12
        assert matrix_coefficient_transform(mc2.w, 2, w_plus) == 0

    def test_constant(self):
        assert matrix_coefficient_constant(1) == pytest.approx(4 * np.pi ** 2)
        assert matrix_coefficient_constant(2) == pytest.approx(4 * np.pi ** 2)
        assert matrix_coefficient_constant(3) == pytest.approx(6 * np.pi ** 2)

    def test_closed_form_on_random_points(self, w_plus, rng, reduced_spec):
        f = matrix_coefficient(w_plus, 3)
        zetas = [sample_interior_horopoint(rng, -1, boost_range=0.8) for _ in range(4)]
        values = transform_batch(f, np.stack([z.vector for z in zetas]), reduced_spec)
        expected = [matrix_coefficient_transform(w_plus, 3, z) for z in zetas]
        np.testing.assert_allclose(values, expected, rtol=1e-6)

    def test_linearity(self, w_plus, zeta_minus, reduced_spec):
        f = matrix_coefficient(w_plus, 2)
        g = custom_function("bump", lambda x: (1 + x[..., 2] ** 2) ** -2)
        a, b = 1.5 - 0.5j, -2.0 + 1.0j
        combined = cauchy_transform(linear_combination(a, f, b, g), zeta_minus, reduced_spec)
        separate = a * cauchy_transform(f, zeta_minus, reduced_spec) + b * cauchy_transform(g, zeta_minus, reduced_spec)
        assert combined == pytest.approx(separate, rel=1e-12)

    def test_equivariance(self, mc2, zeta_minus, reduced_spec):
        g = compose([rotation(0.7), boost(1, 0.5), rotation(-1.1)])
        moved = classify_horopoint(act(g, zeta_minus.vector))
        value = cauchy_transform(translate(mc2, g), moved, reduced_spec)
        assert value == pytest.approx(cauchy_transform(mc2, zeta_minus, reduced_spec), rel=1e-6)

    def test_batch_matches_single(self, mc2, rng, reduced_spec):
        zetas = np.stack([sample_interior_horopoint(rng, -1).vector for _ in range(6)]).reshape(2, 3, 3)
        batched = transform_batch(mc2, zetas, reduced_spec, batch_size=4)
        assert batched.shape == (2, 3)
        single = transform_batch(mc2, zetas.reshape(-1, 3), reduced_spec, batch_size=1).reshape(2, 3)
        np.testing.assert_allclose(batched, single, rtol=1e-10)

    def test_transformed_function(self, mc2, zeta_minus, reduced_spec):
        fhat = TransformedFunction(mc2, reduced_spec)
        assert fhat(zeta_minus.vector[None, :])[0] == pytest.approx(np.pi ** 2 / 16, rel=1e-8)
        assert "matrix_coefficient" in repr(fhat)

    def test_zero_function(self, zeta_minus, reduced_spec):
        assert cauchy_transform(zero_function(), zeta_minus, reduced_spec) == 0

    def test_samples_carry_point_and_tag(self, mc2, zeta_minus, w_plus, reduced_spec):
        samples = transform_samples(mc2, [zeta_minus, w_plus], reduced_spec)
        assert [s.zeta for s in samples] == [zeta_minus, w_plus]
        assert all(s.lam is None and s.operation == "cauchy_transform" for s in samples)
        assert samples[0].value == pytest.approx(np.pi ** 2 / 16, rel=1e-8)
        assert abs(samples[1].value) < 1e-12

    def test_component_samples_match_single_component(self, mc2, zeta_minus, reduced_spec):
        scaled = classify_horopoint(1.5 * zeta_minus.vector)
        samples = transform_samples(mc2, [zeta_minus, scaled], reduced_spec, lam=2)
        assert [s.operation for s in samples] == ["fourier_component"] * 2
        for sample in samples:
            assert sample.lam == 2
            assert sample.value == pytest.approx(fourier_component(mc2, sample.zeta, 2, reduced_spec), rel=1e-12)

    def test_samples_reject_bad_input(self, mc2, reduced_spec):
        with pytest.raises(NonInteriorPointError):
            transform_samples(mc2, [classify_horopoint(ZETA0)], reduced_spec)
        with pytest.raises(NonFiniteValueError):
            TransformSample(classify_horopoint(2.0 * ZETA0), complex(np.nan, 0.0))
        assert transform_samples(mc2, [], reduced_spec) == []


class TestFourierComponents:

    def test_only_matching_component_survives(self, mc2, zeta_minus, reduced_spec):
        assert fourier_component(mc2, zeta_minus, 2, reduced_spec) == pytest.approx(np.pi ** 2 / 16, rel=1e-8)
        assert abs(fourier_component(mc2, zeta_minus, 3, reduced_spec)) < 1e-12

    def test_homogeneity(self, mc2, zeta_minus, reduced_spec):
        scaled = classify_horopoint(1.5 * zeta_minus.vector)
        for lam in (2, 3):
            base = fourier_component(mc2, zeta_minus, lam, reduced_spec)
            assert fourier_component(mc2, scaled, lam, reduced_spec) == pytest.approx(1.5 ** -lam * base, abs=1e-13)

    def test_lambda_domain(self, mc2, zeta_minus, reduced_spec):
        with pytest.raises(ParameterDomainError):
            fourier_component(mc2, zeta_minus, 0, reduced_spec)

    def test_schur_orthogonality(self, zeta_minus, w_plus, reduced_spec):
        matrix = schur_matrix(3, zeta_minus, w_plus, reduced_spec)
        off_diagonal = matrix - np.diag(np.diag(matrix))
        assert np.max(np.abs(off_diagonal)) < 1e-12
        for lam in (2, 3):
            expected = matrix_coefficient_constant(lam) * 8.0 ** -lam
            assert matrix[lam - 1, lam - 1] == pytest.approx(expected, rel=1e-7)

    def test_schur_symmetry(self, zeta_minus, w_plus, reduced_spec):
        forward = schur_matrix(3, zeta_minus, w_plus, reduced_spec)
        backward = schur_matrix(3, w_plus, zeta_minus, reduced_spec)
        np.testing.assert_allclose(forward, backward.T, rtol=1e-12, atol=1e-13)


class TestOperator:

    @pytest.mark.parametrize("lam", [1, 2, 3])
    def test_euler_identity_on_homogeneous_functions(self, w_plus, rng, lam):
        def phi(zetas):
            return bilinear(zetas, w_plus.vector) ** (-lam)

        zetas = np.stack([sample_interior_horopoint(rng, -1).vector for _ in range(5)])
        np.testing.assert_allclose(euler_part(phi, zetas), -lam * phi(zetas), rtol=1e-7)

    def test_apply_L_eigenvalue(self, w_plus, rng):
        def phi(zetas):
            return bilinear(zetas, w_plus.vector) ** -3

        zetas = np.stack([sample_interior_horopoint(rng, -1).vector for _ in range(3)])
        np.testing.assert_allclose(apply_L(phi, zetas, sign=-1), 2.5 * phi(zetas), rtol=1e-7)

    def test_euler_part_requires_interior_points(self, w_plus):
        with pytest.raises(NonInteriorPointError):
            euler_part(lambda z: bilinear(z, w_plus.vector) ** -2, ZETA0[None, :])

    def test_calibration(self, reduced_spec):
        assert calibrate_euler_sign(reduced_spec) == -1
        assert get_euler_sign() == -1

    def test_transform_is_eigenfunction(self, mc2, zeta_minus, reduced_spec):
        fhat = TransformedFunction(mc2, reduced_spec)
        value = apply_L(fhat, zeta_minus.vector[None, :], sign=get_euler_sign(reduced_spec))[0]
        assert value == pytest.approx(1.5 * np.pi ** 2 / 16, rel=1e-6)


class TestFiber:

    def test_base_point_curve(self):
        zetas = fiber_curve(X0, np.array([0.0, 1.0]))
        np.testing.assert_allclose(zetas[0], [1.0, 1j, 0.0], atol=1e-15)
        np.testing.assert_allclose(zetas[1], [1.0, 1j * np.cosh(1.0), -1j * np.sinh(1.0)], atol=1e-15)

    @pytest.mark.parametrize("s", [0.3, 0.9, 1.5])
    def test_curve_identities(self, s):
        z = tube_point(s)
        zetas = fiber_curve(z, np.linspace(-6, 6, 25))
        scale = np.sum(np.abs(zetas) ** 2, axis=-1)
        assert np.all(np.abs(delta(zetas)) <= 1e-12 * scale)
        assert np.all(np.abs(bilinear(zetas, z) - 1.0) <= 1e-12 * np.sqrt(scale))
        assert all(classify_horopoint(zeta).orientation == -1 for zeta in zetas[::6])

    def test_matches_literal_chart_on_slice(self):
        z = tube_point(0.7)
        t = np.linspace(-3, 3, 7)
        r = np.sqrt(z[0] ** 2 + z[1] ** 2)
        literal = np.stack([
            z[0] - 1j * (z[1] / r) * np.cosh(t) - 1j * (z[0] * z[2] / r) * np.sinh(t),
            z[1] + 1j * (z[0] / r) * np.cosh(t) - 1j * (z[1] * z[2] / r) * np.sinh(t),
            z[2] - 1j * r * np.sinh(t),
        ], axis=-1)
        np.testing.assert_allclose(fiber_curve(z, t), literal, atol=1e-12)

    @pytest.mark.parametrize("sign", [1, -1])
    def test_translated_point_stays_in_domain(self, sign):
        z = off_slice(tube_point(0.7, sign))
        zetas = fiber_curve(z, np.linspace(-8, 8, 33))
        scale = np.sum(np.abs(zetas) ** 2, axis=-1)
        assert np.all(np.abs(delta(zetas)) <= 1e-10 * scale)
        assert np.all(np.abs(bilinear(zetas, z) - 1.0) <= 1e-10 * np.sqrt(scale))
        points = [classify_horopoint(zeta) for zeta in zetas]
        assert all(p.is_interior and p.orientation == -sign for p in points)

    def test_curve_is_equivariant(self):
        g = compose([rotation(2.0), boost(1, 1.3), boost(2, -0.8), rotation(-0.5)])
        t = np.linspace(-4, 4, 9)
        np.testing.assert_allclose(fiber_curve(act(g, tube_point(0.9)), t),
                                   act(g, fiber_curve(tube_point(0.9), t)), rtol=1e-10, atol=1e-10)

    def test_degenerate_curve(self):
        with pytest.raises(DegenerateFiberError):
            fiber_curve([0.0, 0.0, 1j], 0.0)
        with pytest.raises(DegenerateFiberError):
            fiber_curve(tube_point(1e-8), 0.0)

    @pytest.mark.parametrize("s", [0.3, 0.8, 1.5])
    def test_closed_form_integral(self, s, reduced_spec):
        a = np.cosh(s)
        result = inverse_transform(lambda zetas: bilinear(X0, zetas) ** -2, tube_point(s), reduced_spec)
        assert result.value == pytest.approx(a * np.log((a + 1) / (a - 1)) - 2, rel=1e-8)
        assert result.tail_bound < 1e-6

    def test_trace(self, reduced_spec):
        result = inverse_transform(lambda zetas: bilinear(X0, zetas) ** -2, tube_point(0.5), reduced_spec, trace=True)
        assert len(result.t_nodes) == reduced_spec.fiber_n
        assert len(result.integrand_modulus) == reduced_spec.fiber_n

    def test_slow_decay_is_divergent(self, reduced_spec):
        with pytest.raises(FiberDivergenceError):
            inverse_transform(lambda zetas: np.ones(zetas.shape[:-1]), tube_point(0.5), reduced_spec)

    def test_point_outside_tube(self, reduced_spec):
        with pytest.raises(NonInteriorPointError):
            inverse_transform(lambda zetas: bilinear(X0, zetas) ** -2, X0, reduced_spec)


class TestInversion:

    def test_constant_is_four_pi_squared(self, mc2, reduced_spec):
        report = inversion_pipeline(mc2, [tube_point(s) for s in (0.4, 0.8, 1.2)], reduced_spec)
        assert report.euler_sign == -1
        assert report.c_norm == pytest.approx(INVERSION_CONSTANT, rel=1e-4)
        assert report.cv < 1e-4
        for row in report.rows:
            assert row.ratio == pytest.approx(INVERSION_CONSTANT, rel=1e-4)

    def test_constant_does_not_depend_on_lambda(self, w_plus, reduced_spec):
        points = [tube_point(0.6), tube_point(1.0)]
        second = inversion_pipeline(matrix_coefficient(w_plus, 2), points, reduced_spec)
        third = inversion_pipeline(matrix_coefficient(w_plus, 3), points, reduced_spec)
        assert abs(third.c_norm - second.c_norm) / abs(second.c_norm) < 1e-3

    def test_lambda_one_diverges(self, w_plus, reduced_spec):
        with pytest.raises(FiberDivergenceError) as info:
            inversion_pipeline(matrix_coefficient(w_plus, 1), [tube_point(0.5)], reduced_spec)
        assert info.value.exit_code == 1

    def test_zero_function(self, reduced_spec):
        report = inversion_pipeline(zero_function(), [tube_point(0.5)], reduced_spec)
        assert report.rows[0].reconstructed == 0
        assert report.rows[0].ratio is None
        assert report.c_norm is None

    def test_conjugate_branch(self, zeta_minus, reduced_spec):
        f = matrix_coefficient(zeta_minus, 2)
        report = inversion_pipeline(f, [tube_point(s, -1) for s in (0.4, 0.9)], reduced_spec)
        assert report.c_norm == pytest.approx(INVERSION_CONSTANT, rel=1e-4)
        assert report.cv < 1e-4

    @pytest.mark.parametrize("sign", [1, -1])
    def test_translated_point(self, sign, reduced_spec):
        w = classify_horopoint(2.0 * (ZETA0 if sign > 0 else np.conj(ZETA0)))
        z = act(compose([rotation(0.9), boost(1, 0.4), boost(2, -0.3)]), tube_point(0.6, sign))
        report = inversion_pipeline(matrix_coefficient(w, 2), [z], reduced_spec)
        assert report.rows[0].ratio == pytest.approx(INVERSION_CONSTANT, rel=1e-4)

    def test_branch_must_match_w(self, mc2, zeta_minus, reduced_spec):
        with pytest.raises(NonInteriorPointError):
            inversion_pipeline(mc2, [tube_point(0.5, -1)], reduced_spec)
        with pytest.raises(NonInteriorPointError):
            inversion_pipeline(matrix_coefficient(zeta_minus, 2), [tube_point(0.5)], reduced_spec)

    def test_custom_function_accepts_both_branches(self, reduced_spec):
        report = inversion_pipeline(zero_function(), [tube_point(0.5), tube_point(0.5, -1)], reduced_spec)
        assert [row.reconstructed for row in report.rows] == [0, 0]

    def test_requires_extension(self, reduced_spec):
        f = custom_function("bump", lambda x: (1 + x[..., 2] ** 2) ** -2)
        with pytest.raises(ParameterDomainError):
            inversion_pipeline(f, [tube_point(0.5)], reduced_spec)
