"""State-vector simulation of the ((2,3)) qutrit threshold scheme.

A secret qutrit ``|s>`` is encoded into three qutrits as
``(1/sqrt 3) sum_a |a, a+s, a+2s>`` (mod 3). A single share's reduced state is
``I/3`` whatever the secret; any two shares can undo the encoding with two
local controlled shifts and hand back the secret as a pure qutrit.

Joint states are length-27 complex vectors indexed ``9*q1 + 3*q2 + q3``.
"""

from __future__ import annotations

import numpy as np

from .errors import NotAnEncoding, NotNormalized

D = 3
NORM_TOL = 1e-12
PURITY_TOL = 1e-9

PAIRS = ((1, 2), (2, 3), (3, 1))


def _check_normalized(v: np.ndarray, tol: float = NORM_TOL) -> None:
    if abs(np.vdot(v, v).real - 1.0) > tol:
        raise NotNormalized(f"state norm^2 = {np.vdot(v, v).real!r}")


def normalize(amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise NotNormalized("zero vector")
    return v / norm


def basis(s: int) -> np.ndarray:
    v = np.zeros(D, dtype=complex)
    v[s] = 1.0
    return v


def _encoding_isometry() -> np.ndarray:
    """27x3 matrix whose column s is the encoding of |s>."""
    iso = np.zeros((D ** 3, D), dtype=complex)
    for s in range(D):
        for a in range(D):
            iso[9 * a + 3 * ((a + s) % D) + (a + 2 * s) % D, s] = 1 / np.sqrt(D)
    return iso


ENCODER = _encoding_isometry()


def encode(secret) -> np.ndarray:
    """Encode a normalized qutrit into three shares."""
    v = np.asarray(secret, dtype=complex)
    if v.shape != (D,):
        raise ValueError("secret must have 3 amplitudes")
    _check_normalized(v)
    return ENCODER @ v


def reduced_density(joint: np.ndarray, share: int) -> np.ndarray:
    """Partial trace leaving only qutrit ``share`` (1-based)."""
    psi = np.moveaxis(np.asarray(joint, dtype=complex).reshape(D, D, D), share - 1, 0).reshape(D, D * D)
    return psi @ psi.conj().T


def _shift_unitary(control_first: bool, weight: int, sign: int) -> np.ndarray:
    """9x9 permutation on (first, second) pair acting as a controlled modular add.

    With ``control_first`` the second register gains ``sign*weight*first``;
    otherwise the first register gains ``weight*second``.
    """
    u = np.zeros((D * D, D * D))
    for a in range(D):
        for b in range(D):
            if control_first:
                out = (a, (b + sign * weight * a) % D)
            else:
                out = ((a + weight * b) % D, b)
            u[out[0] * D + out[1], a * D + b] = 1
    return u


# |a,b> -> |a, b - a>
SUBTRACT = _shift_unitary(True, 1, -1)
# |a,b> -> |a + 2b, b>
ADD_TWICE = _shift_unitary(False, 2, 1)


def _apply_pair(joint: np.ndarray, pair: tuple[int, int], u: np.ndarray) -> np.ndarray:
    first, second = pair[0] - 1, pair[1] - 1
    third = 3 - first - second
    t = joint.reshape(D, D, D).transpose(first, second, third).reshape(D * D, D)
    t = (u @ t).reshape(D, D, D)
    inv = np.argsort([first, second, third])
    return t.transpose(inv).reshape(D ** 3)


def reconstruct(joint: np.ndarray, pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Pull the secret out of two shares.

    Returns the recovered qutrit (held by the second member of ``pair``) and
    the residual state of the other two qutrits, ordered (pair[0], outsider).

    Raises:
        NotAnEncoding: the recovered qutrit is not pure after the circuit.
    """
    if pair not in PAIRS:
        raise ValueError(f"pair must be one of {PAIRS}")
    joint = np.asarray(joint, dtype=complex)
    _check_normalized(joint)
    out = _apply_pair(_apply_pair(joint, pair, SUBTRACT), pair, ADD_TWICE)
    first, second = pair[0] - 1, pair[1] - 1
    third = 3 - first - second
    m = out.reshape(D, D, D).transpose(first, third, second).reshape(D * D, D)
    u, sv, vh = np.linalg.svd(m)
    if sv[0] ** 2 < 1 - PURITY_TOL:
        raise NotAnEncoding(f"recovered qutrit purity {sv[0] ** 2:.3e}")
    residual = u[:, 0] * sv[0]
    recovered = vh[0]
    # put the global phase on the recovered qutrit, residual's largest entry real positive
    j = int(np.argmax(np.abs(residual)))
    phase = residual[j] / abs(residual[j])
    return recovered * phase, residual / phase


def fidelity(a, b) -> float:
    return float(abs(np.vdot(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))) ** 2)


def threshold_bound_check(k: int, n: int) -> bool:
    """True iff a ((k,n)) quantum threshold scheme is allowed by no-cloning."""
    if k < 1 or n < k:
        raise ValueError("need 1 <= k <= n")
    return n < 2 * k


def bell_residual() -> np.ndarray:
    """(1/sqrt 3) sum_a |a, a>, the residual left behind after reconstruction."""
    v = np.zeros(D * D, dtype=complex)
    v[[0, 4, 8]] = 1 / np.sqrt(D)
    return v
