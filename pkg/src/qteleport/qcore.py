"""Exact state-vector and density-operator algebra over labeled qubit registers.

Conventions
-----------
* The leftmost label of a register is the most significant bit of the
  amplitude index.
* ``|up>`` is index 0 and ``|down>`` is index 1.
* All algebraic identities are checked to ``TOL = 1e-10``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)

BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")

_BELL_ALIASES = {
    "φ+": "phi+", "φ-": "phi-", "ψ+": "psi+", "ψ-": "psi-",
    "φ−": "phi-", "ψ−": "psi-",
}

_BELL_PATTERNS = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex),
    "phi-": np.array([1, 0, 0, -1], dtype=complex),
    "psi+": np.array([0, 1, 1, 0], dtype=complex),
    "psi-": np.array([0, 1, -1, 0], dtype=complex),
}
_BELL_AMPLITUDES = {k: v / np.sqrt(2) for k, v in _BELL_PATTERNS.items()}


def bell_projector(kind: str) -> np.ndarray:
    """``|B><B|`` with entries exactly 0 or +-1/2."""
    v = _BELL_PATTERNS[canonical_bell(kind)]
    return 0.5 * np.outer(v, v.conj())


class LabelError(ValueError):
    """Unknown, duplicate or overlapping system labels."""


class NormalizationError(ValueError):
    """A vector or operator fails its normalization constraint."""


def _frozen(a, dtype=complex) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_labels(labels: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(str(lab) for lab in labels)
    if len(set(labels)) != len(labels):
        raise LabelError(f"labels must be distinct, got {labels}")
    return labels


def canonical_bell(kind: str) -> str:
    """Map a Bell-state name (ASCII or Greek) onto one of ``BELL_KINDS``."""
    key = _BELL_ALIASES.get(kind, kind)
    if key not in BELL_KINDS:
        raise ValueError(f"unknown Bell state {kind!r}; expected one of {BELL_KINDS}")
    return key


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state over an ordered tuple of qubit labels."""

    amplitudes: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = _check_labels(self.labels)
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.size != 2 ** len(labels):
            raise ValueError(
                f"{amps.size} amplitudes do not match {len(labels)} labels "
                f"(need {2 ** len(labels)})"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > TOL:
            raise NormalizationError(f"state norm {norm!r} deviates from 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per label."""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def permuted(self, labels: Sequence[str]) -> "StateVector":
        """Same physical state with the tensor factors reordered to ``labels``."""
        labels = tuple(labels)
        if sorted(labels) != sorted(self.labels):
            raise LabelError(f"{labels} is not a permutation of {self.labels}")
        axes = [self.labels.index(lab) for lab in labels]
        amps = np.transpose(self.tensor(), axes).reshape(-1)
        return StateVector(amps, labels)


@dataclass(frozen=True)
class DensityOperator:
    """Positive, unit-trace Hermitian operator over ordered qubit labels."""

    matrix: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = _check_labels(self.labels)
        mat = _frozen(self.matrix)
        d = 2 ** len(labels)
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match {len(labels)} labels")
        if not np.allclose(mat, mat.conj().T, atol=TOL, rtol=0):
            raise ValueError("density operator is not Hermitian")
        tr = np.trace(mat)
        if abs(tr - 1.0) > TOL:
            raise NormalizationError(f"density operator trace {tr!r} deviates from 1")
        if np.linalg.eigvalsh(mat).min() < -TOL:
            raise ValueError("density operator has a negative eigenvalue")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def _trusted(cls, matrix: np.ndarray, labels: tuple[str, ...]) -> "DensityOperator":
        # M M^dagger from a normalized state is valid by construction
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", _frozen(matrix))
        object.__setattr__(obj, "labels", labels)
        return obj

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def permuted(self, labels: Sequence[str]) -> "DensityOperator":
        labels = tuple(labels)
        if sorted(labels) != sorted(self.labels):
            raise LabelError(f"{labels} is not a permutation of {self.labels}")
        n = len(labels)
        axes = [self.labels.index(lab) for lab in labels]
        t = self.matrix.reshape((2,) * (2 * n))
        t = np.transpose(t, axes + [a + n for a in axes])
        return DensityOperator(t.reshape(2 ** n, 2 ** n), labels)


@dataclass(frozen=True)
class UnitaryOperator:
    """Unitary acting on the ``targets`` subsystems (identity elsewhere)."""

    matrix: np.ndarray
    targets: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        targets = _check_labels(self.targets)
        mat = _frozen(self.matrix)
        d = 2 ** len(targets)
        if mat.shape != (d, d):
            raise ValueError(f"unitary shape {mat.shape} does not match targets {targets}")
        if not np.allclose(mat @ mat.conj().T, np.eye(d), atol=TOL, rtol=0):
            raise ValueError(f"operator {self.name or ''} is not unitary")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "matrix", mat)

    def dagger(self) -> "UnitaryOperator":
        return UnitaryOperator(self.matrix.conj().T, self.targets, f"({self.name})^dag")


@dataclass(frozen=True)
class MeasurementBasis:
    """Complete set of orthogonal projectors on the ``targets`` subsystems."""

    projectors: tuple[np.ndarray, ...]
    outcomes: tuple[str, ...]
    targets: tuple[str, ...]

    def __post_init__(self):
        targets = _check_labels(self.targets)
        d = 2 ** len(targets)
        projs = tuple(_frozen(p) for p in self.projectors)
        outcomes = tuple(self.outcomes)
        if len(projs) != len(outcomes):
            raise ValueError("one outcome label is required per projector")
        if len(set(outcomes)) != len(outcomes):
            raise ValueError("outcome labels must be distinct")
        total = np.zeros((d, d), dtype=complex)
        for i, p in enumerate(projs):
            if p.shape != (d, d):
                raise ValueError(f"projector {outcomes[i]} has shape {p.shape}, expected {(d, d)}")
            if not np.allclose(p @ p, p, atol=TOL, rtol=0) or not np.allclose(p, p.conj().T, atol=TOL, rtol=0):
                raise ValueError(f"{outcomes[i]} is not an orthogonal projector")
            for j in range(i):
                if not np.allclose(p @ projs[j], 0, atol=TOL):
                    raise ValueError(f"projectors {outcomes[j]} and {outcomes[i]} overlap")
            total += p
        if not np.allclose(total, np.eye(d), atol=TOL, rtol=0):
            raise ValueError("projectors do not sum to the identity")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "outcomes", outcomes)


def make_state(amplitudes, labels: Sequence[str], normalize: bool = False) -> StateVector:
    """Build a :class:`StateVector`, optionally rescaling to unit norm.

    Without ``normalize`` a norm off by more than ``TOL`` raises
    :class:`NormalizationError`.
    """
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    labels = _check_labels(labels)
    if amps.size != 2 ** len(labels):
        raise ValueError(f"{amps.size} amplitudes do not match {len(labels)} labels")
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise NormalizationError("zero vector is not a state")
    if normalize:
        amps = amps / norm
    elif abs(norm - 1.0) > TOL:
        raise NormalizationError(f"state norm {norm!r} deviates from 1; pass normalize=True")
    return StateVector(amps, labels)


def basis_state(bits: str, labels: Sequence[str]) -> StateVector:
    """Computational basis ket, e.g. ``basis_state("01", ["c", "d"])``."""
    if len(bits) != len(labels) or set(bits) - {"0", "1"}:
        raise ValueError(f"bit string {bits!r} does not fit labels {tuple(labels)}")
    amps = np.zeros(2 ** len(labels), dtype=complex)
    amps[int(bits, 2) if bits else 0] = 1.0
    return StateVector(amps, labels)


def bell_state(kind: str, labels: Sequence[str]) -> StateVector:
    """One of the four Bell states on two labels."""
    labels = _check_labels(labels)
    if len(labels) != 2:
        raise ValueError("a Bell state needs exactly two labels")
    return StateVector(_BELL_AMPLITUDES[canonical_bell(kind)], labels)


def bell_basis(labels: Sequence[str]) -> MeasurementBasis:
    """Bell-basis projective measurement on two labels, outcomes ``BELL_KINDS``."""
    labels = _check_labels(labels)
    if len(labels) != 2:
        raise ValueError("a Bell measurement needs exactly two labels")
    projs = [bell_projector(k) for k in BELL_KINDS]
    return MeasurementBasis(tuple(projs), BELL_KINDS, labels)


def computational_basis(labels: Sequence[str]) -> MeasurementBasis:
    labels = _check_labels(labels)
    d = 2 ** len(labels)
    projs = []
    for i in range(d):
        p = np.zeros((d, d), dtype=complex)
        p[i, i] = 1.0
        projs.append(p)
    outcomes = [format(i, f"0{len(labels)}b") if labels else "" for i in range(d)]
    return MeasurementBasis(tuple(projs), tuple(outcomes), labels)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product; labels of ``a`` come first."""
    overlap = set(a.labels) & set(b.labels)
    if overlap:
        raise LabelError(f"cannot tensor states sharing labels {sorted(overlap)}")
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.labels + b.labels)


def tensor_all(*states: StateVector) -> StateVector:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def _axes_of(labels: tuple[str, ...], targets: Sequence[str]) -> list[int]:
    missing = [t for t in targets if t not in labels]
    if missing:
        raise LabelError(f"labels {missing} not present in register {labels}")
    return [labels.index(t) for t in targets]


def _apply_matrix(amps: np.ndarray, labels: tuple[str, ...], matrix: np.ndarray,
                  targets: Sequence[str]) -> np.ndarray:
    n = len(labels)
    axes = _axes_of(labels, targets)
    k = len(axes)
    t = np.moveaxis(amps.reshape((2,) * n), axes, range(k))
    rest = t.shape[k:]
    t = (matrix @ t.reshape(2 ** k, -1)).reshape((2,) * k + rest)
    return np.moveaxis(t, range(k), axes).reshape(-1)


def apply_unitary(state: StateVector, u: UnitaryOperator) -> StateVector:
    return StateVector(_apply_matrix(state.amplitudes, state.labels, u.matrix, u.targets), state.labels)


def embed_operator(matrix: np.ndarray, targets: Sequence[str], labels: Sequence[str]) -> np.ndarray:
    """Full-register matrix of an operator acting on ``targets``."""
    labels = tuple(labels)
    d = 2 ** len(labels)
    eye = np.eye(d, dtype=complex)
    cols = [_apply_matrix(eye[:, i], labels, np.asarray(matrix, dtype=complex), targets) for i in range(d)]
    return np.stack(cols, axis=1)


def density_from_state(state: StateVector) -> DensityOperator:
    a = state.amplitudes
    return DensityOperator(np.outer(a, a.conj()), state.labels)


def partial_trace(rho: DensityOperator, keep: Sequence[str]) -> DensityOperator:
    """Reduced operator on ``keep`` (returned in the order given)."""
    keep = _check_labels(keep)
    if not keep:
        raise LabelError("keep must name at least one label")
    kept = _axes_of(rho.labels, keep)
    n = len(rho.labels)
    traced = [i for i in range(n) if i not in kept]
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    t = rho.matrix.reshape((2,) * (2 * n))
    order = kept + traced
    t = np.transpose(t, order + [i + n for i in order]).reshape(dk, dt, dk, dt)
    return DensityOperator(np.einsum("ajbj->ab", t), keep)


def reduced_state(state: StateVector, keep: Sequence[str]) -> DensityOperator:
    """Partial trace of ``|psi><psi|`` computed straight from the amplitudes."""
    keep = _check_labels(keep)
    if not keep:
        raise LabelError("keep must name at least one label")
    kept = _axes_of(state.labels, keep)
    traced = [i for i in range(state.n_qubits) if i not in kept]
    m = np.transpose(state.tensor(), kept + traced).reshape(2 ** len(kept), -1)
    return DensityOperator._trusted(m @ m.conj().T, keep)


def outcome_probabilities(state: StateVector, basis: MeasurementBasis) -> np.ndarray:
    """Born probabilities ``<psi|P_k|psi>`` for every projector of ``basis``."""
    probs = []
    for p in basis.projectors:
        v = _apply_matrix(state.amplitudes, state.labels, p, basis.targets)
        probs.append(np.real(np.vdot(state.amplitudes, v)))
    return np.clip(np.array(probs), 0.0, None)


def project(state: StateVector, basis: MeasurementBasis, outcome: str) -> tuple[float, StateVector]:
    """Probability of ``outcome`` and the renormalized post-measurement state."""
    if outcome not in basis.outcomes:
        raise ValueError(f"unknown outcome {outcome!r}")
    p_mat = basis.projectors[basis.outcomes.index(outcome)]
    v = _apply_matrix(state.amplitudes, state.labels, p_mat, basis.targets)
    prob = float(np.real(np.vdot(v, v)))
    if prob < 1e-12:
        raise ValueError(f"outcome {outcome!r} has zero probability")
    return prob, StateVector(v / np.sqrt(prob), state.labels)


def measure(state: StateVector, basis: MeasurementBasis, rng: np.random.Generator,
            outcome: str | None = None) -> tuple[str, float, StateVector]:
    """Projective measurement with Born-rule sampling.

    Returns ``(outcome, probability, post_state)``.  Passing ``outcome``
    forces that branch instead of sampling; forcing a branch of zero
    probability raises ``ValueError``.
    """
    if outcome is None:
        probs = outcome_probabilities(state, basis)
        probs[probs < 1e-12] = 0.0
        probs = probs / probs.sum()
        k = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
        k = min(k, len(probs) - 1)
        while probs[k] == 0.0:
            k -= 1
        outcome = basis.outcomes[k]
    prob, post = project(state, basis, outcome)
    return outcome, prob, post


def condition(state: StateVector, assignment: dict[str, int]) -> tuple[float, StateVector]:
    """Relative state of the remaining systems given computational values.

    ``assignment`` maps labels to 0/1 (e.g. pointer readings); returns the
    probability of that reading and the normalized relative state.
    """
    axes = _axes_of(state.labels, list(assignment))
    idx = [slice(None)] * state.n_qubits
    for ax, val in zip(axes, assignment.values()):
        idx[ax] = int(val)
    rest = tuple(lab for i, lab in enumerate(state.labels) if i not in axes)
    v = state.tensor()[tuple(idx)].reshape(-1)
    prob = float(np.real(np.vdot(v, v)))
    if prob < 1e-12:
        raise ValueError(f"reading {assignment} has zero probability")
    return prob, StateVector(v / np.sqrt(prob), rest)


def bloch_vector(rho) -> np.ndarray:
    """``(Tr rho X, Tr rho Y, Tr rho Z)`` of a single-qubit operator."""
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"Bloch vector needs a 2x2 operator, got shape {m.shape}")
    return np.array([np.real(np.trace(m @ s)) for s in PAULIS])


def qubit_state(theta: float, phi: float, label: str = "1") -> StateVector:
    """``cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>``."""
    amps = [np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)]
    return StateVector(np.array(amps, dtype=complex), (label,))


def fidelity(psi: StateVector, rho) -> float:
    """Squared-overlap fidelity ``<psi|rho|psi>``.

    ``rho`` may be a :class:`DensityOperator` or a :class:`StateVector`; label
    sets must coincide (order may differ).
    """
    if isinstance(rho, StateVector):
        rho = density_from_state(rho)
    if set(rho.labels) != set(psi.labels):
        raise LabelError(f"label mismatch: {psi.labels} vs {rho.labels}")
    if rho.labels != psi.labels:
        rho = rho.permuted(psi.labels)
    a = psi.amplitudes
    return float(np.clip(np.real(np.vdot(a, rho.matrix @ a)), 0.0, 1.0))


def trace_distance(a, b) -> float:
    """``0.5 * ||a - b||_1`` for two equally sized Hermitian matrices."""
    ma = a.matrix if isinstance(a, DensityOperator) else np.asarray(a)
    mb = b.matrix if isinstance(b, DensityOperator) else np.asarray(b)
    return float(0.5 * np.abs(np.linalg.eigvalsh(ma - mb)).sum())


def maximally_mixed(labels: Sequence[str]) -> DensityOperator:
    labels = _check_labels(labels)
    d = 2 ** len(labels)
    return DensityOperator(np.eye(d, dtype=complex) / d, labels)


def random_state(labels: Sequence[str], rng: np.random.Generator) -> StateVector:
    """Haar-random pure state (normalized complex Gaussian)."""
    d = 2 ** len(labels)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return StateVector(v / np.linalg.norm(v), labels)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase fix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
