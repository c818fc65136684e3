"""Wigner, Q and Gaussian-smoothed fields on quadrature grids."""

import json
import math

import numpy as np
import pytest

from conftest import TEST_STATES
from fock import StateSpec, build_state
from phasespace import (
    AliasingError, BoundaryMassError, FieldFormatError, FieldLabel, GridTooCoarse, InvalidGrid, InvalidWidths,
    KernelExceedsGrid, MomentOrderError, NormalizationError, PhaseSpaceField, QuadratureGrid, SmoothingWidths,
    field_from_csv, field_from_json, field_to_csv, field_to_json, g_via_characteristic, integrate_moment,
    marginal, q_exact_grid, read_field, s_parameterized_grid, smooth, squeezed_amplitude, weyl_characteristic,
    wigner_grid, write_field,
)

SMALL_GRID = QuadratureGrid(-6.0, 6.0, 0.05)


def _origin(field):
    centre = field.grid.points // 2
    return field.values[centre, centre]


class TestQuadratureGrid:

    def test_default_shape(self, grid):
        assert grid.points == 321
        assert grid.axis[0] == -8.0
        assert grid.axis[-1] == pytest.approx(8.0)
        assert grid.axis[160] == 0.0

    @pytest.mark.parametrize("bounds", [(-1, 1, 0), (1, -1, 0.1), (-2, 3, 0.05), (-1, 1, 0.25), (0, 0, 0.1)])
    def test_invalid(self, bounds):
        with pytest.raises(InvalidGrid):
            QuadratureGrid(*bounds)

    def test_minimum_points(self):
        assert QuadratureGrid(-1.6, 1.6, 0.1).points == 33

    def test_mesh_is_axis1_major(self, grid):
        alpha = grid.alpha()
        assert alpha[320, 160] == pytest.approx(8.0 + 0j)
        assert alpha[160, 0] == pytest.approx(-8.0j)


class TestSmoothingWidths:

    def test_physical_flag(self):
        assert SmoothingWidths(0.5, 0.5).physical
        assert SmoothingWidths(0.25, 1.0).physical
        assert not SmoothingWidths(0.2, 0.2).physical

    def test_from_ordering_inverts(self):
        widths = SmoothingWidths.from_ordering(-math.sqrt(3.5), 0.25 * math.log(14 / 9))
        assert widths.sigma1 ** 2 == pytest.approx(0.375, abs=1e-12)
        assert widths.sigma2 ** 2 == pytest.approx(7 / 12, abs=1e-12)

    @pytest.mark.parametrize("sigmas", [(0, 0.5), (-0.1, 0.5), (0.5, float("inf"))])
    def test_invalid(self, sigmas):
        with pytest.raises(InvalidWidths):
            SmoothingWidths(*sigmas)


class TestWignerGrid:

    def test_vacuum_closed_form(self, wigner_of, grid):
        field = wigner_of("vacuum")
        alpha = grid.alpha()
        np.testing.assert_allclose(field.values, (2 / np.pi) * np.exp(-2 * np.abs(alpha) ** 2), atol=1e-12)
        assert _origin(field) == pytest.approx(2 / np.pi, abs=1e-12)
        assert field.label is FieldLabel.WIGNER

    def test_fock_one_negative_at_origin(self, wigner_of):
        assert _origin(wigner_of("fock1")) == pytest.approx(-2 / np.pi, abs=1e-12)

    def test_coherent_is_displaced_vacuum(self):
        vacuum = wigner_grid(build_state(StateSpec.vacuum(), 64), SMALL_GRID)
        displaced = wigner_grid(build_state(StateSpec.coherent(1.0), 64), SMALL_GRID)
        # One unit along alpha_1 is 20 grid steps
        np.testing.assert_allclose(displaced.values[20:, :], vacuum.values[:-20, :], atol=1e-10)

    @pytest.mark.parametrize("name", list(TEST_STATES))
    def test_normalization(self, wigner_of, name):
        assert wigner_of(name).normalization() == pytest.approx(1.0, abs=2e-3)

    def test_vacuum_marginal(self, wigner_of, grid):
        expected = np.sqrt(2 / np.pi) * np.exp(-2 * grid.axis ** 2)
        np.testing.assert_allclose(marginal(wigner_of("vacuum"), 1), expected, atol=1e-6)
        np.testing.assert_allclose(marginal(wigner_of("vacuum"), 2), expected, atol=1e-6)

    def test_rejects_coarse_grid(self):
        with pytest.raises(GridTooCoarse):
            wigner_grid(build_state(StateSpec.vacuum(), 8), QuadratureGrid(-8.0, 8.0, 0.5))


class TestQExact:

    def test_vacuum(self, states, grid):
        field = q_exact_grid(states["vacuum"], grid)
        alpha = grid.alpha()
        np.testing.assert_allclose(field.values, np.exp(-np.abs(alpha) ** 2) / np.pi, atol=1e-14)
        assert field.label is FieldLabel.Q

    def test_fock_one(self, states, grid):
        field = q_exact_grid(states["fock1"], grid)
        alpha = grid.alpha()
        np.testing.assert_allclose(field.values, np.abs(alpha) ** 2 * np.exp(-np.abs(alpha) ** 2) / np.pi,
                                   atol=1e-14)
        assert _origin(field) == 0

    def test_coherent_peak(self, states, grid):
        field = q_exact_grid(states["coherent1.5"], grid)
        i, j = np.unravel_index(np.argmax(field.values), field.values.shape)
        assert grid.axis[i] == pytest.approx(1.5)
        assert grid.axis[j] == pytest.approx(0.0)
        assert field.max_value == pytest.approx(1 / np.pi, abs=1e-12)


class TestSmooth:

    def test_vacuum_q(self, wigner_of):
        field = smooth(wigner_of("vacuum"), SmoothingWidths(0.5, 0.5))
        assert _origin(field) == pytest.approx(1 / np.pi, abs=1e-8)
        assert field.label is FieldLabel.Q

    def test_husimi_label(self, wigner_of):
        assert smooth(wigner_of("vacuum"), SmoothingWidths(0.4, 0.625)).label is FieldLabel.HUSIMI
        assert smooth(wigner_of("vacuum"), SmoothingWidths(0.6, 0.6)).label is FieldLabel.G

    def test_delta_limit(self, wigner_of):
        for name in ("fock1", "cat1.5"):
            original = wigner_of(name)
            field = smooth(original, SmoothingWidths(0.02, 0.02))
            assert np.max(np.abs(field.values - original.values)) < 5e-3

    def test_anisotropic_vacuum(self, wigner_of, grid):
        field = smooth(wigner_of("vacuum"), SmoothingWidths(math.sqrt(0.375), math.sqrt(7 / 12)))
        alpha1, alpha2 = grid.mesh()
        v1, v2 = 0.625, 0.25 + 7 / 12
        expected = np.exp(-alpha1 ** 2 / (2 * v1) - alpha2 ** 2 / (2 * v2)) / (2 * np.pi * math.sqrt(v1 * v2))
        np.testing.assert_allclose(field.values, expected, atol=1e-6)

    def test_semigroup(self, wigner_of):
        once = smooth(smooth(wigner_of("fock2"), SmoothingWidths(0.3, 0.4)), SmoothingWidths(0.4, 0.3))
        direct = smooth(wigner_of("fock2"), SmoothingWidths(0.5, 0.5))
        np.testing.assert_allclose(once.values, direct.values, atol=1e-6)
        assert once.sigma1 == pytest.approx(0.5, abs=1e-15)
        assert once.label is FieldLabel.Q

    @pytest.mark.parametrize("name", list(TEST_STATES))
    def test_collapses_to_q(self, states, wigner_of, grid, name):
        smoothed = smooth(wigner_of(name), SmoothingWidths(0.5, 0.5))
        exact = q_exact_grid(states[name], grid)
        np.testing.assert_allclose(smoothed.values, exact.values, atol=1e-6)

    @pytest.mark.parametrize("name", list(TEST_STATES))
    def test_nonnegative_when_physical(self, g_of, name):
        assert g_of(name, 1.0, 1.0).min_value >= -1e-9
        assert g_of(name, 0.8, 0.6).min_value >= -1e-9

    def test_unphysical_may_be_negative(self, wigner_of):
        field = smooth(wigner_of("fock1"), SmoothingWidths(0.2, 0.2))
        assert not field.physical
        assert field.min_value < 0

    def test_kernel_must_fit(self, wigner_of):
        with pytest.raises(KernelExceedsGrid):
            smooth(wigner_of("vacuum"), SmoothingWidths(1.5, 0.5))


class TestCharacteristicPath:

    def test_characteristic_is_one_at_origin(self, states):
        for rho in states.values():
            assert weyl_characteristic(rho, np.array([0j]))[0] == pytest.approx(1.0, abs=1e-12)

    def test_vacuum_characteristic(self, states):
        lam = np.array([0.3 + 0.4j, -1.2j, 2.0])
        np.testing.assert_allclose(weyl_characteristic(states["vacuum"], lam), np.exp(-np.abs(lam) ** 2 / 2),
                                   atol=1e-14)

    def test_coherent_characteristic(self, states):
        lam = np.array([0.5 - 0.2j, 1.1j])
        alpha0 = 1.5
        expected = np.exp(-np.abs(lam) ** 2 / 2 + lam * alpha0 - lam.conj() * alpha0)
        np.testing.assert_allclose(weyl_characteristic(states["coherent1.5"], lam), expected, atol=1e-12)

    def test_vacuum_q(self, states, grid):
        field = g_via_characteristic(states["vacuum"], SmoothingWidths(0.5, 0.5), grid)
        np.testing.assert_allclose(field.values, q_exact_grid(states["vacuum"], grid).values, atol=1e-6)

    def test_fock_one_matches_convolution(self, states, wigner_of, grid):
        widths = SmoothingWidths(0.6, 0.6)
        field = g_via_characteristic(states["fock1"], widths, grid)
        np.testing.assert_allclose(field.values, smooth(wigner_of("fock1"), widths).values, atol=1e-6)

    @pytest.mark.slow
    @pytest.mark.parametrize("name", list(TEST_STATES))
    @pytest.mark.parametrize("sigma", [0.3, 0.5, 0.75])
    def test_path_equivalence(self, states, wigner_of, grid, name, sigma):
        widths = SmoothingWidths(sigma, sigma)
        field = g_via_characteristic(states[name], widths, grid)
        np.testing.assert_allclose(field.values, smooth(wigner_of(name), widths).values, atol=1e-6)

    def test_anisotropic_path_equivalence(self, states, wigner_of, grid):
        widths = SmoothingWidths(math.sqrt(0.375), math.sqrt(7 / 12))
        field = g_via_characteristic(states["squeezed0.3"], widths, grid)
        np.testing.assert_allclose(field.values, smooth(wigner_of("squeezed0.3"), widths).values, atol=1e-6)

    def test_aliasing(self, states):
        coarse = QuadratureGrid(-8.0, 8.0, 0.25)
        with pytest.raises(AliasingError):
            g_via_characteristic(states["fock2"], SmoothingWidths(0.05, 0.05), coarse)


class TestIntegrateMoment:

    @pytest.mark.parametrize("r", [0.0, 0.11, 0.35])
    def test_normalization(self, g_of, r):
        assert integrate_moment(g_of("cat1.5", 0.8, 0.6), 0, 0, r) == pytest.approx(1.0, abs=2e-3)

    def test_vacuum_q_second_moment(self, g_of):
        assert integrate_moment(g_of("vacuum", 1.0, 1.0), 1, 1) == pytest.approx(1.0, abs=2e-3)

    def test_coherent_second_moment(self, g_of):
        # sigma^2 = 0.375 on both axes is eta = 0.8
        assert integrate_moment(g_of("coherent1.5", 0.8, 0.8), 1, 1) == pytest.approx(3.5, abs=5e-3)

    def test_order_limit(self, g_of):
        with pytest.raises(MomentOrderError):
            integrate_moment(g_of("vacuum", 1.0, 1.0), 4, 3)

    def test_boundary_mass(self, states):
        grid = QuadratureGrid(-2.0, 2.0, 0.05)
        field = wigner_grid(states["vacuum"], grid)
        with pytest.raises(BoundaryMassError):
            integrate_moment(field, 1, 1)

    def test_unnormalized_field(self, g_of):
        field = g_of("vacuum", 1.0, 1.0)
        scaled = PhaseSpaceField(field.grid, field.values * 1.1, field.label, field.sigma1, field.sigma2)
        with pytest.raises(NormalizationError):
            integrate_moment(scaled, 0, 0)

    def test_squeezed_amplitude_unit_jacobian(self):
        alpha = np.array([1.0 + 0j, 1j])
        r = 0.3
        beta = squeezed_amplitude(alpha, r)
        np.testing.assert_allclose(beta, [math.exp(r), 1j * math.exp(-r)], atol=1e-15)


class TestSParameterized:

    def test_s_zero_is_wigner(self, states):
        field = s_parameterized_grid(states["vacuum"], 0.0, SMALL_GRID)
        assert field.label is FieldLabel.WIGNER

    def test_s_minus_one_is_q(self, states):
        field = s_parameterized_grid(states["fock1"], -1.0, SMALL_GRID)
        np.testing.assert_allclose(field.values, q_exact_grid(states["fock1"], SMALL_GRID).values, atol=1e-6)


class TestFieldExport:

    def _field(self, states):
        return smooth(wigner_grid(states["cat1.5"], SMALL_GRID), SmoothingWidths(0.4, 0.7))

    def test_csv_lossless(self, states, tmp_path):
        field = self._field(states)
        path = write_field(field, tmp_path / "g.csv", "csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "# label,sigma1,sigma2,min,max,step"
        assert lines[1].startswith("# g,0.40000000000000002,")
        assert len(lines) == 2 + field.grid.points
        loaded = read_field(path)
        np.testing.assert_array_equal(loaded.values, field.values)
        assert loaded.grid == field.grid
        assert (loaded.sigma1, loaded.sigma2, loaded.label) == (field.sigma1, field.sigma2, field.label)

    def test_json_lossless(self, states, tmp_path):
        field = self._field(states)
        path = write_field(field, tmp_path / "g.json", "json")
        data = json.loads(path.read_text())
        assert set(data) == {"label", "sigma1", "sigma2", "grid", "values"}
        assert data["grid"] == {"min": -6.0, "max": 6.0, "step": 0.05}
        np.testing.assert_array_equal(read_field(path).values, field.values)
        np.testing.assert_array_equal(field_from_json(field_to_json(field)).values, field.values)

    def test_csv_text_round_trip(self, states):
        field = self._field(states)
        assert field_to_csv(field_from_csv(field_to_csv(field))) == field_to_csv(field)

    def test_bad_header(self):
        with pytest.raises(FieldFormatError):
            field_from_csv("1,2,3\n4,5,6\n")

    def test_shape_mismatch(self):
        with pytest.raises(FieldFormatError):
            PhaseSpaceField(SMALL_GRID, np.zeros((3, 3)), FieldLabel.G, 0.5, 0.5)
