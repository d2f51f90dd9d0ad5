import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttpshare.errors import NotAnEncoding, NotNormalized
from ttpshare.qutrit import (
    ADD_TWICE,
    PAIRS,
    SUBTRACT,
    basis,
    bell_residual,
    encode,
    fidelity,
    normalize,
    reconstruct,
    reduced_density,
    threshold_bound_check,
)

TOL = 1e-12
I3 = np.eye(3) / 3


def ket(*digits):
    v = np.zeros(27, dtype=complex)
    v[9 * digits[0] + 3 * digits[1] + digits[2]] = 1
    return v


def oracle_encode(amps):
    # written out term by term from the basis mappings
    branches = {
        0: [(0, 0, 0), (1, 1, 1), (2, 2, 2)],
        1: [(0, 1, 2), (1, 2, 0), (2, 0, 1)],
        2: [(0, 2, 1), (1, 0, 2), (2, 1, 0)],
    }
    out = np.zeros(27, dtype=complex)
    for s, amp in enumerate(amps):
        for triple in branches[s]:
            out += amp / math.sqrt(3) * ket(*triple)
    return out


def oracle_circuit(joint, pair):
    # basis-state walk of the two controlled shifts on (first, second)
    first, second = pair[0] - 1, pair[1] - 1
    out = np.zeros(27, dtype=complex)
    for idx, amp in enumerate(joint):
        q = [idx // 9, idx // 3 % 3, idx % 3]
        q[second] = (q[second] - q[first]) % 3
        q[first] = (q[first] + 2 * q[second]) % 3
        out[9 * q[0] + 3 * q[1] + q[2]] += amp
    return out


def random_secret(rng):
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    return v / np.linalg.norm(v)


def test_basis_mappings():
    assert np.allclose(encode(basis(0)), (ket(0, 0, 0) + ket(1, 1, 1) + ket(2, 2, 2)) / math.sqrt(3), atol=TOL)
    assert np.allclose(encode(basis(1)), (ket(0, 1, 2) + ket(1, 2, 0) + ket(2, 0, 1)) / math.sqrt(3), atol=TOL)
    assert np.allclose(encode(basis(2)), (ket(0, 2, 1) + ket(1, 0, 2) + ket(2, 1, 0)) / math.sqrt(3), atol=TOL)


def test_superposition_linearity():
    joint = encode(normalize([1, 1, 0]))
    nz = np.abs(joint[np.abs(joint) > 1e-15])
    assert len(nz) == 6
    assert np.allclose(nz, 1 / math.sqrt(6), atol=TOL)


def test_encode_matches_oracle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        s = random_secret(rng)
        assert np.max(np.abs(encode(s) - oracle_encode(s))) < TOL


def test_encode_rejects_unnormalized():
    with pytest.raises(NotNormalized):
        encode(np.array([1, 1, 0], dtype=complex))
    with pytest.raises(ValueError):
        encode(np.array([1, 0], dtype=complex))


def test_encoding_isometry():
    rng = np.random.default_rng(2)
    for _ in range(100):
        a, b = random_secret(rng), random_secret(rng)
        assert abs(np.vdot(encode(a), encode(b)) - np.vdot(a, b)) < TOL


@pytest.mark.parametrize("share", [1, 2, 3])
def test_single_share_is_maximally_mixed(share):
    rng = np.random.default_rng(3)
    for _ in range(100):
        rho = reduced_density(encode(random_secret(rng)), share)
        assert np.max(np.abs(rho - I3)) < TOL


def test_reduced_density_product_state():
    rho = reduced_density(ket(0, 0, 0), 1)
    assert np.allclose(rho, np.diag([1, 0, 0]))
    rho = reduced_density(ket(0, 2, 1), 2)
    assert np.allclose(rho, np.diag([0, 0, 1]))


def test_reduced_density_is_a_density_matrix():
    rng = np.random.default_rng(4)
    v = rng.normal(size=27) + 1j * rng.normal(size=27)
    v /= np.linalg.norm(v)
    for share in (1, 2, 3):
        rho = reduced_density(v, share)
        assert np.allclose(rho, rho.conj().T, atol=TOL)
        assert abs(np.trace(rho) - 1) < TOL
        assert np.min(np.linalg.eigvalsh(rho)) > -TOL


def test_reconstruct_basis_one_pair_12():
    recovered, _ = reconstruct(encode(basis(1)), (1, 2))
    assert fidelity(recovered, basis(1)) > 1 - TOL


@pytest.mark.parametrize("s", [0, 1, 2])
def test_reconstruct_basis_pair_23(s):
    recovered, _ = reconstruct(encode(basis(s)), (2, 3))
    assert fidelity(recovered, basis(s)) > 1 - TOL


@pytest.mark.parametrize("pair", PAIRS)
def test_phase_is_disentangled(pair):
    s = np.array([1, 0, 1j]) / math.sqrt(2)
    recovered, _ = reconstruct(encode(s), pair)
    assert fidelity(recovered, s) > 1 - TOL
    # the relative phase survives, not just the populations
    assert abs(recovered[2] / recovered[0] - 1j) < 1e-10


@pytest.mark.parametrize("pair", PAIRS)
def test_any_pair_reconstruction_random(pair):
    rng = np.random.default_rng(5)
    for _ in range(100):
        s = random_secret(rng)
        recovered, _ = reconstruct(encode(s), pair)
        assert fidelity(recovered, s) >= 1 - TOL


def test_recovered_state_matches_circuit_oracle():
    # after the circuit the second member of the pair carries the secret exactly
    rng = np.random.default_rng(6)
    for pair in PAIRS:
        s = random_secret(rng)
        out = oracle_circuit(encode(s), pair).reshape(3, 3, 3)
        first, second = pair[0] - 1, pair[1] - 1
        third = 3 - first - second
        m = np.transpose(out, (first, third, second)).reshape(9, 3)
        assert np.max(np.abs(m - np.outer(bell_residual(), s))) < TOL


def test_cyclic_shift_invariance():
    rng = np.random.default_rng(7)
    for _ in range(20):
        joint = encode(random_secret(rng)).reshape(3, 3, 3)
        shifted = np.transpose(joint, (1, 2, 0))
        assert np.max(np.abs(shifted - joint)) < TOL


def test_residual_is_independent_of_secret():
    rng = np.random.default_rng(8)
    bell = bell_residual()
    for pair in PAIRS:
        for _ in range(30):
            _, residual = reconstruct(encode(random_secret(rng)), pair)
            # trace distance between pure states
            overlap = abs(np.vdot(residual, bell)) ** 2
            assert math.sqrt(max(0.0, 1 - overlap)) < 1e-7
            assert np.max(np.abs(residual - bell)) < TOL


def test_shift_maps_are_unitary_permutations():
    for u in (SUBTRACT, ADD_TWICE):
        assert np.allclose(u @ u.T, np.eye(9))
        assert set(np.unique(u)) == {0, 1}


def test_circuit_preserves_norm():
    rng = np.random.default_rng(9)
    for pair in PAIRS:
        v = rng.normal(size=27) + 1j * rng.normal(size=27)
        v /= np.linalg.norm(v)
        assert abs(np.linalg.norm(oracle_circuit(v, pair)) - 1) < TOL


def test_not_an_encoding():
    with pytest.raises(NotAnEncoding):
        reconstruct(normalize(ket(0, 0, 0) + ket(1, 0, 0)), (1, 2))


def test_reconstruct_rejects_bad_inputs():
    with pytest.raises(ValueError):
        reconstruct(encode(basis(0)), (1, 3))
    with pytest.raises(NotNormalized):
        reconstruct(2 * encode(basis(0)), (1, 2))


def test_fidelity_examples():
    s = normalize([1, 2j, -1])
    assert abs(fidelity(s, s) - 1) < TOL
    assert fidelity(basis(0), basis(1)) == 0
    assert abs(fidelity(basis(0), normalize([1, 1, 0])) - 0.5) < TOL


def test_fidelity_ignores_global_phase():
    s = normalize([1, 2, 3j])
    assert abs(fidelity(s, cmath.exp(0.7j) * s) - 1) < TOL


def test_threshold_bound_check():
    assert threshold_bound_check(2, 3) is True
    assert threshold_bound_check(2, 4) is False
    assert all(threshold_bound_check(k, k) for k in range(1, 20))
    with pytest.raises(ValueError):
        threshold_bound_check(3, 2)


@settings(max_examples=50)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6).filter(lambda xs: sum(x * x for x in xs) > 1e-3))
def test_reconstruction_property(xs):
    s = normalize([complex(xs[0], xs[1]), complex(xs[2], xs[3]), complex(xs[4], xs[5])])
    for pair in PAIRS:
        recovered, _ = reconstruct(encode(s), pair)
        assert fidelity(recovered, s) >= 1 - TOL
