import numpy as np
import pytest

from thermosdp import (
    Density,
    PauliSum,
    ResourceError,
    SpectralHermitian,
    expectation,
    materialize,
    one_norm,
    pauli_measurement_distribution,
    sample_signed_term,
)
from thermosdp.operators import pauli_matrix

from conftest import random_density, random_hermitian, random_pauli_sum

I2 = np.eye(2)
Z2 = np.diag([1.0, -1.0])


def kron_chain(chars):
    # independent dense construction, not via materialize
    mats = {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    out = np.ones((1, 1), dtype=complex)
    for ch in chars:
        out = np.kron(out, mats[ch])
    return out


class TestPauliSum:
    def test_rejects_bad_character(self):
        with pytest.raises(ValueError, match="'Q'"):
            PauliSum(2, [("ZQ", 1.0)])

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="length"):
            PauliSum(2, [("Z", 1.0)])

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="duplicate"):
            PauliSum(1, [("Z", 1.0), ("Z", 0.5)])

    def test_rejects_zero_and_nonfinite_coeffs(self):
        with pytest.raises(ValueError):
            PauliSum(1, [("Z", 0.0)])
        with pytest.raises(ValueError):
            PauliSum(1, [("Z", np.inf)])

    def test_empty_sum_allowed(self):
        assert one_norm(PauliSum(1, [])) == 0.0


class TestMaterialize:
    def test_single_z(self):
        mat = materialize(PauliSum(1, [("Z", 1.0)]))
        assert np.allclose(mat.entries, Z2)

    def test_identity(self):
        mat = materialize(PauliSum(1, [("I", 1.0)]))
        assert np.allclose(mat.entries, I2)

    def test_two_qubit_eigenvalues(self):
        # brute-force 4x4 eigensolve of 0.5*ZZ + 0.25*XI built independently;
        # the strings anticommute, so the spectrum is +-sqrt(0.5^2 + 0.25^2),
        # each doubly degenerate
        target = 0.5 * kron_chain("ZZ") + 0.25 * kron_chain("XI")
        expected = np.sort(np.linalg.eigvalsh(target))
        mat = materialize(PauliSum(2, [("ZZ", 0.5), ("XI", 0.25)]))
        assert np.allclose(np.sort(mat.eigenvalues), expected)
        root = np.sqrt(0.3125)
        assert np.allclose(expected, [-root, -root, root, root])

    def test_two_qubit_commuting_pair(self):
        # commuting strings do split additively: 0.5*ZZ + 0.25*XX has
        # eigenvalues {+-0.5 +- 0.25} over the Bell basis
        target = 0.5 * kron_chain("ZZ") + 0.25 * kron_chain("XX")
        mat = materialize(PauliSum(2, [("ZZ", 0.5), ("XX", 0.25)]))
        assert np.allclose(np.sort(mat.eigenvalues), np.sort(np.linalg.eigvalsh(target)))
        assert np.allclose(np.sort(mat.eigenvalues), [-0.75, -0.25, 0.25, 0.75])

    def test_qubit_cap(self):
        big = PauliSum(11, [("Z" * 11, 1.0)])
        with pytest.raises(ResourceError):
            materialize(big)
        # cap is overridable
        assert materialize(PauliSum(3, [("ZZZ", 1.0)]), qubit_cap=3).dim == 8

    def test_involution(self, rng):
        # a single Pauli term squares to coeff^2 * identity
        for _ in range(5):
            psum = random_pauli_sum(rng, 2, 1)
            mat = materialize(psum).entries
            coeff = psum.terms[0][1]
            assert np.allclose(mat @ mat, coeff ** 2 * np.eye(4))


class TestOneNorm:
    def test_goldens(self):
        assert one_norm(PauliSum(1, [("Z", 1.0)])) == 1.0
        assert one_norm(PauliSum(2, [("ZZ", 0.5), ("XI", -0.25)])) == 0.75

    def test_dominates_spectral_norm(self, rng):
        for _ in range(20):
            psum = random_pauli_sum(rng, 2, 3)
            dense = materialize(psum)
            assert one_norm(psum) >= dense.spectral_norm() - 1e-12


class TestSampleSignedTerm:
    def test_single_term(self, rng):
        psum = PauliSum(1, [("Z", 1.0)])
        for _ in range(10):
            assert sample_signed_term(psum, rng) == ("Z", 1)

    def test_sign_extraction(self, rng):
        psum = PauliSum(1, [("Z", -2.0)])
        assert sample_signed_term(psum, rng) == ("Z", -1)

    def test_empirical_frequency(self):
        rng = np.random.default_rng(99)
        psum = PauliSum(1, [("X", 0.5), ("Z", -0.5)])
        draws = 100_000
        hits = sum(1 for _ in range(draws)
                   if sample_signed_term(psum, rng)[0] == "X")
        # binomial 3 sigma at p = 1/2
        assert abs(hits / draws - 0.5) <= 0.005

    def test_empty_sum_raises(self, rng):
        with pytest.raises(ValueError):
            sample_signed_term(PauliSum(1, []), rng)


class TestMeasurementDistribution:
    def test_maximally_mixed(self):
        state = Density(np.eye(2) / 2)
        assert pauli_measurement_distribution(state, "Z") == (0.5, 0.5)

    def test_eigenstate(self):
        state = Density(np.diag([1.0, 0.0]))
        p_plus, p_minus = pauli_measurement_distribution(state, "Z")
        assert p_plus == pytest.approx(1.0, abs=1e-12)
        assert p_minus == pytest.approx(0.0, abs=1e-12)

    def test_thermal_closed_form(self):
        # thermal state of H = Z at T = 1 is diag(e^-1, e^1)/(2 cosh 1)
        w = np.exp([-1.0, 1.0])
        state = Density(np.diag(w / w.sum()))
        p_plus, p_minus = pauli_measurement_distribution(state, "Z")
        assert p_plus == pytest.approx((1 - np.tanh(1.0)) / 2, abs=1e-12)
        assert p_minus == pytest.approx((1 + np.tanh(1.0)) / 2, abs=1e-12)

    def test_distribution_axioms(self, rng):
        for _ in range(20):
            state = Density(random_density(rng, 4))
            index = "".join(rng.choice(list("IXYZ"), size=2))
            p_plus, p_minus = pauli_measurement_distribution(state, index)
            assert 0.0 <= p_plus <= 1.0 and 0.0 <= p_minus <= 1.0
            assert p_plus + p_minus == pytest.approx(1.0, abs=1e-12)

    def test_non_density_rejected(self):
        with pytest.raises(ValueError):
            Density(np.diag([1.5, -0.5]))
        with pytest.raises(ValueError):
            Density(np.diag([0.7, 0.7]))


class TestExpectation:
    def test_goldens(self):
        assert expectation(Density(np.eye(2) / 2), Z2) == pytest.approx(0.0, abs=1e-14)
        assert expectation(Density(np.diag([1.0, 0.0])), Z2) == pytest.approx(1.0)

    def test_double_sum_oracle(self, rng):
        for _ in range(10):
            rho = random_density(rng, 4)
            obs = random_hermitian(rng, 4)
            direct = sum(
                obs[m, n] * rho[n, m] for m in range(4) for n in range(4)
            ).real
            assert expectation(Density(rho), obs) == pytest.approx(direct, abs=1e-12)

    def test_linearity(self, rng):
        rho = Density(random_density(rng, 4))
        a = random_hermitian(rng, 4)
        b = random_hermitian(rng, 4)
        lhs = expectation(rho, 2.0 * a + 0.5 * b)
        rhs = 2.0 * expectation(rho, a) + 0.5 * expectation(rho, b)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            expectation(Density(np.eye(2) / 2), np.eye(4))


class TestSpectralHermitian:
    def test_symmetrization_warning(self):
        mat = np.array([[0.0, 0.0], [1.0, 0.0]])
        with pytest.warns(UserWarning, match="asymmetry"):
            SpectralHermitian(mat)

    def test_reconstruction(self, rng):
        mat = random_hermitian(rng, 6)
        sh = SpectralHermitian(mat)
        rebuilt = (sh.eigenvectors * sh.eigenvalues) @ sh.eigenvectors.conj().T
        scale = np.abs(mat).max()
        assert np.abs(rebuilt - sh.entries).max() <= 1e-10 * scale

    def test_pauli_matrix_cache_is_readonly(self):
        mat = pauli_matrix("XZ")
        with pytest.raises(ValueError):
            mat[0, 0] = 5.0


def test_measurement_distribution_validates_raw_arrays():
    # raw arrays pass through Density validation: domain error on non-density
    p_plus, p_minus = pauli_measurement_distribution(np.eye(2) / 2, "Z")
    assert (p_plus, p_minus) == (0.5, 0.5)
    with pytest.raises(ValueError):
        pauli_measurement_distribution(np.diag([1.5, -0.5]), "Z")
