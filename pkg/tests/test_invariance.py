import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from services import invariance
from services.invariance import (CERTIFIED, FALSIFIED, ProbeConfig, falsify, invariance_defect,
                                 shared_vector_basis, refine_basis, relative_fourier,
                                 shares_exactly_one, structural_check, two_level_restriction)
from services.graph import classify
from services.qudit import (OrthonormalBasis, joint_distribution, random_basis, random_state,
                            stream, validate_density)
from services.states import classical_mixture, max_entangled, maximally_mixed, phi_plus, spin_singlet


class TestBasisDefect:
    def test_singlet_has_no_leakage(self, singlet, rng):
        for _ in range(20):
            assert invariance.basis_defect(singlet, random_basis(2, rng)) <= 1e-9

    def test_maximally_mixed_qutrit(self):
        assert invariance.basis_defect(maximally_mixed(3), OrthonormalBasis.computational(3)) == pytest.approx(2 / 3)

    def test_qutrit_maximally_entangled_in_seeded_haar_basis(self):
        basis = random_basis(3, stream(42))
        amplitudes = np.einsum("ik,jk->ij", basis.vectors.conj(), basis.vectors.conj()) / np.sqrt(3)
        probs = np.abs(amplitudes) ** 2
        brute_force = 1 - max(probs[range(3), list(p)].sum() for p in itertools.permutations(range(3)))
        defect = invariance.basis_defect(max_entangled(3), basis)
        assert defect == pytest.approx(brute_force, abs=1e-12)
        assert defect == pytest.approx(0.10635154097948907, rel=1e-9)


class TestInvarianceDefect:
    def test_singlet_is_invariant(self, singlet):
        defect = invariance_defect(singlet, ProbeConfig(n_random_bases=500, seed=1))
        assert defect.value <= 1e-9
        assert defect.signatures == ("[0,1]",)
        assert not defect.signature_mismatch
        assert defect.consistent

    @pytest.mark.slow
    def test_singlet_over_ten_thousand_bases(self, singlet):
        defect = invariance_defect(singlet, ProbeConfig(n_random_bases=10_000, seed=2, workers=4))
        assert defect.value <= 1e-9
        assert defect.signatures == ("[0,1]",)

    def test_reproducible_and_worker_independent(self, singlet):
        a = invariance_defect(phi_plus(), ProbeConfig(n_random_bases=100, seed=5))
        b = invariance_defect(phi_plus(), ProbeConfig(n_random_bases=100, seed=5, workers=4))
        assert a.value == b.value
        assert np.array_equal(a.worst_basis.vectors, b.worst_basis.vectors)
        s1 = invariance_defect(singlet, ProbeConfig(n_random_bases=50, seed=3))
        s2 = invariance_defect(singlet, ProbeConfig(n_random_bases=50, seed=3))
        assert s1.value == s2.value

    def test_phi_plus_has_mismatching_signatures(self):
        defect = invariance_defect(phi_plus(), ProbeConfig(n_random_bases=20))
        assert defect.signature_mismatch
        assert set(defect.signatures) == {"[2]", "[0,1]"}
        assert defect.value > 0

    def test_value_bounds_every_probe(self):
        rho = random_state(3, "mixed", stream(4))
        defect = invariance_defect(rho, ProbeConfig(n_random_bases=30, seed=4))
        assert defect.value >= defect.max_leakage
        for t in range(30):
            basis = random_basis(3, stream(4, t))
            assert classify(joint_distribution(rho, basis)).leakage <= defect.value

    def test_maximally_mixed(self):
        defect = invariance_defect(maximally_mixed(2), ProbeConfig(n_random_bases=10))
        assert defect.value == pytest.approx(0.5)

    def test_refinement_only_increases_leakage(self):
        rho = phi_plus()
        plain = invariance_defect(rho, ProbeConfig(n_random_bases=10, seed=8))
        refined = invariance_defect(rho, ProbeConfig(n_random_bases=10, seed=8, refine=True))
        assert refined.value >= plain.value

    def test_refine_basis_climbs(self):
        start = OrthonormalBasis.computational(2)
        basis, leakage = refine_basis(phi_plus(), start, max_iterations=20)
        assert leakage > 0
        assert_allclose(basis.vectors.conj() @ basis.vectors.T, np.eye(2), atol=1e-10)


class TestStructuralCheck:
    def test_maximally_entangled_passes(self):
        report = structural_check(max_entangled(3), OrthonormalBasis.computational(3))
        assert report.passed and report.failed_stage is None
        assert_allclose(report.form.coefficients, np.full((3, 3), 1 / 3), atol=1e-12)
        assert report.coefficient_spread < 1e-12
        assert report.pure_distance < 1e-12
        assert not report.contradiction_with_mixedness

    def test_classical_mixture_fails_constancy(self):
        report = structural_check(classical_mixture(3), OrthonormalBasis.computational(3))
        assert report.failed_stage == 3
        assert report.stages_passed == 2
        assert report.coefficient_spread >= 1 / 3 - 1e-9
        assert report.max_violation >= report.coefficient_spread / 4

    def test_off_diagonal_mass_fails_first_stage(self):
        report = structural_check(classical_mixture(3), OrthonormalBasis.fourier(3))
        assert report.failed_stage == 1
        assert report.off_diagonal_mass == pytest.approx(2 / 3)

    def test_probe_set_detects_non_constant_coefficients(self):
        """Some pairwise probe violates by at least a quarter of the coefficient spread."""
        rng, d = stream(31), 3
        idx = np.arange(d) * (d + 1)
        for _ in range(100):
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            alpha = g @ g.conj().T
            alpha /= np.trace(alpha).real
            rho = np.zeros((d * d, d * d), dtype=complex)
            rho[np.ix_(idx, idx)] = alpha
            report = structural_check(validate_density(rho, d), OrthonormalBasis.computational(d))
            assert report.failed_stage == 3
            assert report.max_violation >= report.coefficient_spread / 4


class TestBasisConstructions:
    def test_shared_vector_basis_shares_one_vector(self):
        base = OrthonormalBasis.computational(4)
        for t in range(20):
            b2 = shared_vector_basis(base, 1, stream(t))
            assert shares_exactly_one(base, b2)
            ov = base.overlaps(b2)
            assert np.sum(ov > 1 - 1e-10) == 1
            assert ov[1, 0] == pytest.approx(1.0)

    def test_relative_fourier_of_computational(self):
        assert_allclose(relative_fourier(OrthonormalBasis.computational(3)).vectors,
                        OrthonormalBasis.fourier(3).vectors, atol=1e-12)

    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_two_level_restriction_signature(self, d):
        basis = two_level_restriction(OrthonormalBasis.computational(d))
        verdict = classify(joint_distribution(max_entangled(d), basis))
        assert verdict.signature.counts == (d - 2, 1)


class TestFalsify:
    def test_singlet_certified(self, singlet):
        report = falsify(singlet)
        assert report.verdict == CERTIFIED
        assert report.certificate.certified
        assert report.witness is None

    def test_near_singlet_werner_certified(self, singlet):
        p = 1 - 1e-9
        werner = validate_density(p * singlet.matrix + (1 - p) * np.eye(4) / 4, 2)
        report = falsify(werner)
        assert report.verdict == CERTIFIED
        assert report.certificate.certified

    def test_qutrit_maximally_entangled(self):
        report = falsify(max_entangled(3))
        assert report.verdict == FALSIFIED
        w = report.witness
        assert w.kind == "signature-mismatch"
        assert str(w.verdict_1.signature) == "[3]"
        assert str(w.verdict_2.signature) == "[1,1]"
        assert_allclose(w.basis_2.vectors, OrthonormalBasis.fourier(3).vectors, atol=1e-12)
        assert report.structural.passed

    def test_is_deterministic(self):
        a = falsify(random_state(3, "mixed", stream(7)), seed=7)
        b = falsify(random_state(3, "mixed", stream(7)), seed=7, workers=4)
        assert a.probe_leakages == b.probe_leakages
        assert np.array_equal(a.witness.basis_1.vectors, b.witness.basis_1.vectors)

    def test_phi_plus(self):
        report = falsify(phi_plus())
        assert report.verdict == FALSIFIED
        assert report.witness.kind == "signature-mismatch"
        assert not report.certificate.certified

    def test_random_mixed_qutrit_fails_first_basis(self):
        report = falsify(random_state(3, "mixed", stream(7)), seed=7)
        assert report.verdict == FALSIFIED
        assert report.witness.kind == "imperfect"
        assert report.probe_leakages[0] > 0
        assert report.witness.incompatible()

    def test_classical_mixture_gets_probe_witness(self):
        report = falsify(classical_mixture(3))
        assert report.verdict == FALSIFIED
        assert report.witness.kind == "structural-probe"
        assert report.structural.failed_stage == 3

    def test_spin_singlet_gets_shared_vector_witness(self):
        report = falsify(spin_singlet(3))
        w = report.witness
        assert w.kind == "shared-vector"
        assert shares_exactly_one(w.basis_1, w.basis_2)
        assert w.incompatible()

    def test_refined_witness_is_not_weaker(self):
        rho = random_state(3, "mixed", stream(12))
        plain = falsify(rho, seed=12)
        refined = falsify(rho, seed=12, refine=True)
        assert refined.witness.verdict_1.leakage >= plain.witness.verdict_1.leakage

    @pytest.mark.parametrize("d, count", [(3, 20), (4, 10)])
    def test_random_states_are_all_falsified(self, d, count):
        for i in range(count):
            kind = "pure" if i % 2 == 0 else "mixed"
            report = falsify(random_state(d, kind, stream(100 + d, i)), seed=i)
            assert report.verdict == FALSIFIED
            assert report.probes <= invariance.HAAR_CANDIDATES + 10

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [3, 4])
    def test_full_sweep(self, d):
        verdicts = [falsify(random_state(d, "pure" if i % 2 == 0 else "mixed", stream(d, i)), seed=i).verdict
                    for i in range(1000)]
        assert verdicts.count(FALSIFIED) == 1000

    def test_random_qubit_states_never_certified(self):
        for i in range(50):
            assert falsify(random_state(2, "mixed", stream(40, i)), seed=i).verdict != CERTIFIED
