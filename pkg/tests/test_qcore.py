import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qteleport.qcore import (
    BELL_KINDS,
    I2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityOperator,
    LabelError,
    MeasurementBasis,
    NormalizationError,
    StateVector,
    UnitaryOperator,
    apply_unitary,
    bell_basis,
    bell_state,
    bloch_vector,
    computational_basis,
    condition,
    density_from_state,
    embed_operator,
    fidelity,
    make_state,
    maximally_mixed,
    measure,
    outcome_probabilities,
    partial_trace,
    qubit_state,
    random_state,
    random_unitary,
    reduced_state,
    tensor,
)
from qteleport.rng import trial_rng

ATOL = 1e-10
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def loop_partial_trace(matrix, n, keep):
    """Index-by-index partial trace; independent of the reshape path."""
    traced = [i for i in range(n) if i not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)

    def index(kbits, tbits):
        bits = [0] * n
        for pos, b in zip(keep, kbits):
            bits[pos] = b
        for pos, b in zip(traced, tbits):
            bits[pos] = b
        return int("".join(map(str, bits)), 2)

    for a, b in itertools.product(itertools.product((0, 1), repeat=len(keep)), repeat=2):
        ia = int("".join(map(str, a)), 2) if a else 0
        ib = int("".join(map(str, b)), 2) if b else 0
        for t in itertools.product((0, 1), repeat=len(traced)):
            out[ia, ib] += matrix[index(a, t), index(b, t)]
    return out


def random_density(n, rng):
    g = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    m = g @ g.conj().T
    return m / np.trace(m)


class TestMakeState:
    def test_basis_vector(self):
        s = make_state([1, 0], ["1"])
        np.testing.assert_array_equal(s.amplitudes, [1, 0])
        assert s.labels == ("1",)

    def test_normalize_flag(self):
        s = make_state([1, 1], ["1"], normalize=True)
        np.testing.assert_allclose(s.amplitudes, np.array([1, 1]) / np.sqrt(2), atol=ATOL)

    def test_unnormalized_without_flag(self):
        with pytest.raises(NormalizationError):
            make_state([1, 1], ["1"])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            make_state([1, 0, 0], ["1"])

    def test_zero_vector(self):
        with pytest.raises(NormalizationError):
            make_state([0, 0], ["1"], normalize=True)

    def test_duplicate_labels(self):
        with pytest.raises(LabelError):
            make_state([1, 0, 0, 0], ["1", "1"])

    def test_immutable(self):
        s = make_state([1, 0], ["1"])
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0


class TestBellStates:
    def test_phi_plus(self):
        s = bell_state("phi+", ["2", "3"])
        np.testing.assert_allclose(s.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=ATOL)

    def test_psi_minus(self):
        s = bell_state("ψ−", ["2", "3"])
        np.testing.assert_allclose(s.amplitudes, np.array([0, 1, -1, 0]) / np.sqrt(2), atol=ATOL)

    @pytest.mark.parametrize("kind", BELL_KINDS)
    @pytest.mark.parametrize("keep", ["2", "3"])
    def test_reduced_is_maximally_mixed(self, kind, keep):
        rho = partial_trace(density_from_state(bell_state(kind, ["2", "3"])), [keep])
        np.testing.assert_allclose(rho.matrix, I2 / 2, atol=ATOL)

    def test_orthonormal(self):
        vs = [bell_state(k, ["a", "b"]).amplitudes for k in BELL_KINDS]
        gram = np.array([[np.vdot(a, b) for b in vs] for a in vs])
        np.testing.assert_allclose(gram, np.eye(4), atol=ATOL)

    def test_duplicate_labels(self):
        with pytest.raises(LabelError):
            bell_state("phi+", ["2", "2"])

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            bell_state("omega", ["2", "3"])


class TestTensor:
    def test_up_up(self):
        s = tensor(make_state([1, 0], ["1"]), make_state([1, 0], ["2"]))
        np.testing.assert_array_equal(s.amplitudes, [1, 0, 0, 0])
        assert s.labels == ("1", "2")

    def test_leftmost_label_is_most_significant(self):
        s = tensor(make_state([0, 1], ["1"]), make_state([1, 0], ["2"]))
        assert np.argmax(np.abs(s.amplitudes)) == 0b10

    def test_chi_times_singlet_six_terms(self):
        a, b = 0.6, 0.8j
        s = tensor(make_state([a, b], ["1"]), bell_state("psi-", ["2", "3"]))
        r = 1 / np.sqrt(2)
        # |up up down>, |down up down>, -|up down up>, -|down down up>
        expected = np.zeros(8, dtype=complex)
        expected[0b001] = a * r
        expected[0b101] = b * r
        expected[0b010] = -a * r
        expected[0b110] = -b * r
        np.testing.assert_allclose(s.amplitudes, expected, atol=ATOL)

    def test_overlap(self):
        with pytest.raises(LabelError):
            tensor(make_state([1, 0], ["1"]), make_state([1, 0], ["1"]))


class TestApplyUnitary:
    def test_sigma_x_flips(self):
        s = apply_unitary(make_state([1, 0], ["1"]), UnitaryOperator(SIGMA_X, ["1"]))
        np.testing.assert_allclose(s.amplitudes, [0, 1], atol=ATOL)

    def test_inverse_pair(self):
        chi = make_state([0.6, 0.8j], ["1"])
        s = apply_unitary(chi, UnitaryOperator(-1j * SIGMA_Y, ["1"]))
        s = apply_unitary(s, UnitaryOperator(1j * SIGMA_Y, ["1"]))
        np.testing.assert_allclose(s.amplitudes, chi.amplitudes, atol=ATOL)

    def test_identity(self):
        s = random_state(["a", "b", "c"], trial_rng(3))
        out = apply_unitary(s, UnitaryOperator(I2, ["b"]))
        np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=ATOL)

    def test_matches_kron_embedding(self):
        rng = trial_rng(5)
        s = random_state(["a", "b", "c"], rng)
        u = random_unitary(4, rng)
        out = apply_unitary(s, UnitaryOperator(u, ["c", "a"]))
        # explicit: permute to (c, a, b), apply u (x) 1, permute back
        p = s.permuted(["c", "a", "b"])
        v = np.kron(u, I2) @ p.amplitudes
        back = StateVector(v, ("c", "a", "b")).permuted(["a", "b", "c"])
        np.testing.assert_allclose(out.amplitudes, back.amplitudes, atol=ATOL)

    def test_unknown_target(self):
        with pytest.raises(LabelError):
            apply_unitary(make_state([1, 0], ["1"]), UnitaryOperator(SIGMA_X, ["9"]))

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            UnitaryOperator(np.array([[1, 1], [0, 1]]), ["1"])

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, n=st.integers(1, 5))
    def test_norm_preservation(self, seed, n):
        rng = trial_rng(seed)
        labels = [str(i) for i in range(n)]
        s = random_state(labels, rng)
        k = int(rng.integers(1, n + 1))
        targets = list(rng.permutation(labels)[:k])
        out = apply_unitary(s, UnitaryOperator(random_unitary(2**k, rng), targets))
        assert abs(np.linalg.norm(out.amplitudes) - 1) < ATOL


class TestDensityAndTrace:
    def test_up(self):
        np.testing.assert_allclose(density_from_state(make_state([1, 0], ["1"])).matrix,
                                   [[1, 0], [0, 0]], atol=ATOL)

    def test_plus(self):
        rho = density_from_state(make_state([1, 1], ["1"], normalize=True))
        np.testing.assert_allclose(rho.matrix, np.full((2, 2), 0.5), atol=ATOL)

    def test_purity_one(self):
        rho = density_from_state(random_state(["a", "b"], trial_rng(1)))
        assert abs(rho.purity() - 1) < ATOL

    def test_invalid_density(self):
        with pytest.raises(ValueError):
            DensityOperator(np.diag([1.2, -0.2]), ["1"])
        with pytest.raises(ValueError):
            DensityOperator(np.array([[0.5, 0.1], [0.2, 0.5]]), ["1"])

    def test_partial_trace_errors(self):
        rho = maximally_mixed(["a", "b"])
        with pytest.raises(LabelError):
            partial_trace(rho, ["z"])
        with pytest.raises(LabelError):
            partial_trace(rho, [])

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds)
    def test_product_factorization(self, seed):
        rng = trial_rng(seed)
        ra, rb = random_density(1, rng), random_density(2, rng)
        rho = DensityOperator(np.kron(ra, rb), ["A", "B1", "B2"])
        np.testing.assert_allclose(partial_trace(rho, ["A"]).matrix, ra, atol=ATOL)
        np.testing.assert_allclose(partial_trace(rho, ["B1", "B2"]).matrix, rb, atol=ATOL)

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, n=st.integers(2, 4))
    def test_against_loop_oracle(self, seed, n):
        rng = trial_rng(seed)
        labels = [str(i) for i in range(n)]
        m = random_density(n, rng)
        rho = DensityOperator(m, labels)
        keep = sorted(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist())
        got = partial_trace(rho, [labels[i] for i in keep]).matrix
        np.testing.assert_allclose(got, loop_partial_trace(m, n, keep), atol=ATOL)
        assert abs(np.trace(got) - 1) < ATOL

    def test_reduced_state_matches_partial_trace(self):
        s = random_state(["a", "b", "c", "d"], trial_rng(9))
        for keep in (["b"], ["d", "a"], ["a", "b", "c"]):
            np.testing.assert_allclose(reduced_state(s, keep).matrix,
                                       partial_trace(density_from_state(s), keep).matrix, atol=ATOL)

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds)
    def test_label_order_independence(self, seed):
        rng = trial_rng(seed)
        s = random_state(["a", "b", "c"], rng)
        obs = random_unitary(4, rng)
        obs = obs + obs.conj().T
        e1 = np.vdot(s.amplitudes, embed_operator(obs, ["a", "c"], s.labels) @ s.amplitudes)
        p = s.permuted(["c", "b", "a"])
        e2 = np.vdot(p.amplitudes, embed_operator(obs, ["a", "c"], p.labels) @ p.amplitudes)
        assert abs(e1 - e2) < ATOL


class TestMeasure:
    def test_up_in_z_basis(self):
        out, p, post = measure(make_state([1, 0], ["1"]), computational_basis(["1"]), trial_rng(0))
        assert out == "0" and abs(p - 1) < ATOL

    def test_eq1_state_bell_probabilities(self):
        s = tensor(make_state([0.6, 0.8j], ["1"]), bell_state("psi-", ["2", "3"]))
        probs = outcome_probabilities(s, bell_basis(["1", "2"]))
        np.testing.assert_allclose(probs, [0.25] * 4, atol=ATOL)

    def test_psi_minus_post_state(self):
        chi = np.array([0.6, 0.8j])
        s = tensor(make_state(chi, ["1"]), bell_state("psi-", ["2", "3"]))
        out, p, post = measure(s, bell_basis(["1", "2"]), trial_rng(0), outcome="psi-")
        expected = np.kron(bell_state("psi-", ["1", "2"]).amplitudes, -chi)
        np.testing.assert_allclose(post.amplitudes, expected, atol=ATOL)
        assert abs(p - 0.25) < ATOL

    def test_forced_zero_probability_branch(self):
        with pytest.raises(ValueError):
            measure(make_state([1, 0], ["1"]), computational_basis(["1"]), trial_rng(0), outcome="1")

    def test_never_samples_zero_branch(self):
        s = make_state([1, 0], ["1"])
        for i in range(200):
            assert measure(s, computational_basis(["1"]), trial_rng(i))[0] == "0"

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds)
    def test_born_completeness(self, seed):
        rng = trial_rng(seed)
        s = random_state(["a", "b", "c"], rng)
        u = random_unitary(4, rng)
        projs = [np.outer(u[:, i], u[:, i].conj()) for i in range(4)]
        basis = MeasurementBasis(tuple(projs), ("0", "1", "2", "3"), ("c", "a"))
        assert abs(outcome_probabilities(s, basis).sum() - 1) < ATOL

    def test_incomplete_basis_rejected(self):
        with pytest.raises(ValueError):
            MeasurementBasis((np.diag([1, 0]),), ("0",), ("1",))

    def test_condition(self):
        s = tensor(make_state([1, 0], ["c"]), make_state([0.6, 0.8], ["3"]))
        p, rel = condition(s, {"c": 0})
        assert abs(p - 1) < ATOL
        np.testing.assert_allclose(rel.amplitudes, [0.6, 0.8], atol=ATOL)


class TestBlochAndFidelity:
    def test_maximally_mixed(self):
        np.testing.assert_allclose(bloch_vector(I2 / 2), 0, atol=ATOL)

    def test_up(self):
        np.testing.assert_allclose(bloch_vector(np.diag([1, 0])), [0, 0, 1], atol=ATOL)

    @pytest.mark.parametrize("theta,phi", [(0.3, 1.1), (np.pi / 2, np.pi), (2.9, 5.5)])
    def test_angles(self, theta, phi):
        r = bloch_vector(density_from_state(qubit_state(theta, phi)))
        np.testing.assert_allclose(
            r, [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], atol=ATOL)

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            bloch_vector(np.eye(4) / 4)

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds)
    def test_bloch_norm_identity(self, seed):
        rho = DensityOperator(random_density(1, trial_rng(seed)), ["1"])
        r = bloch_vector(rho)
        assert abs(r @ r - (2 * rho.purity() - 1)) < ATOL
        assert np.linalg.norm(r) <= 1 + ATOL

    def test_fidelity_cases(self):
        chi = make_state([0.6, 0.8j], ["1"])
        assert abs(fidelity(chi, density_from_state(chi)) - 1) < ATOL
        assert fidelity(make_state([1, 0], ["1"]), density_from_state(make_state([0, 1], ["1"]))) < ATOL
        assert abs(fidelity(chi, maximally_mixed(["1"])) - 0.5) < ATOL

    def test_fidelity_global_phase(self):
        chi = make_state([0.6, 0.8j], ["1"])
        assert abs(fidelity(chi, make_state(-1j * chi.amplitudes, ["1"])) - 1) < ATOL

    def test_fidelity_label_mismatch(self):
        with pytest.raises(LabelError):
            fidelity(make_state([1, 0], ["1"]), maximally_mixed(["3"]))

    def test_paulis_are_unitary(self):
        for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
            UnitaryOperator(s, ["1"])
