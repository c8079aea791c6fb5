"""Classical and quantum information measures (all in bits).

Shannon entropy, channel mutual information and capacity, prefix coding over
source blocks, von Neumann entropy, the Holevo quantity, POVM mutual
information and typical-subspace counting.
"""
from __future__ import annotations

import heapq
import itertools
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .qcore import TOL, DensityOperator, StateVector, density_from_state

MAX_CODEWORDS = 2 ** 20
MAX_TYPICAL_DIM = 2 ** 20


class ChannelError(ValueError):
    """Malformed channel matrix; ``row`` names the offending row if any."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class CapacityConvergenceWarning(RuntimeWarning):
    pass


def as_distribution(p, name: str = "distribution") -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(p)) or p.min() < -TOL:
        raise ValueError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > TOL:
        raise ValueError(f"{name} sums to {p.sum()!r}, not 1")
    return np.clip(p, 0.0, None)


def as_channel(matrix) -> np.ndarray:
    """Validate a row-stochastic matrix ``W[i, j] = p(y_j | x_i)``."""
    w = np.asarray(matrix, dtype=float)
    if w.ndim != 2 or w.size == 0:
        raise ChannelError(f"channel must be a non-empty 2-D matrix, got shape {w.shape}")
    for i, row in enumerate(w):
        if not np.all(np.isfinite(row)) or row.min() < -TOL:
            raise ChannelError(f"row {i} has negative or non-finite entries", row=i)
        if abs(row.sum() - 1.0) > TOL:
            raise ChannelError(f"row {i} sums to {row.sum():.12g}, not 1", row=i)
    return np.clip(w, 0.0, None)


def _plogp(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def _entropy(p) -> float:
    return float(max(-_plogp(p).sum(), 0.0)) + 0.0


def shannon_entropy(p) -> float:
    """``H(X) = -sum p log2 p`` with ``0 log 0 = 0``."""
    return _entropy(as_distribution(p))


def binary_entropy(f: float) -> float:
    return _entropy([f, 1.0 - f])


def conditional_entropy(p_in, channel) -> float:
    """``H(X|Y)`` for input ``p_in`` through ``channel``, via Bayes inversion."""
    p = as_distribution(p_in, "input distribution")
    w = as_channel(channel)
    if w.shape[0] != p.size:
        raise ValueError(f"input distribution has {p.size} letters, channel has {w.shape[0]} inputs")
    joint = p[:, None] * w
    p_y = joint.sum(axis=0)
    h = 0.0
    for j in np.flatnonzero(p_y > 0):
        h += p_y[j] * _entropy(joint[:, j] / p_y[j])
    return float(h)


def mutual_information(p_in, channel) -> float:
    """``H(X:Y) = H(X) - H(X|Y)``."""
    return shannon_entropy(p_in) - conditional_entropy(p_in, channel)


def joint_mutual_information(joint) -> float:
    """Mutual information of a joint distribution ``p(a, b)`` given as a matrix."""
    joint = np.asarray(joint, dtype=float)
    as_distribution(joint.reshape(-1), "joint distribution")
    joint = np.clip(joint, 0.0, None)
    return _entropy(joint.sum(axis=1)) + _entropy(joint.sum(axis=0)) - _entropy(joint.reshape(-1))


def _mutual_information_fast(p: np.ndarray, w: np.ndarray, logw: np.ndarray) -> float:
    q = p @ w
    logq = np.log2(np.where(q > 0, q, 1.0))
    return float(np.dot(p, (w * (logw - logq[None, :])).sum(axis=1)))


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    input_dist: np.ndarray
    iterations: int
    converged: bool
    gap: float

    def __iter__(self):
        # (capacity, argmax) unpacking
        return iter((self.capacity, self.input_dist))


def channel_capacity(channel, tol: float = 1e-9, max_iter: int = 10_000) -> CapacityResult:
    """Capacity of a discrete memoryless channel by alternating maximization.

    Blahut-Arimoto iteration from the uniform input. Stops once the standard
    upper bound ``max_i D_i`` and lower bound ``log2 sum_i p_i 2^{D_i}`` are
    within ``tol`` bits. On hitting ``max_iter`` a
    :class:`CapacityConvergenceWarning` is issued and the best iterate is
    returned with ``converged=False``.
    """
    w = as_channel(channel)
    n = w.shape[0]
    p = np.full(n, 1.0 / n)
    logw = np.where(w > 0, np.log2(np.where(w > 0, w, 1.0)), 0.0)
    best_p, best_val, gap = p, -np.inf, np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        q = p @ w
        logq = np.log2(np.where(q > 0, q, 1.0))
        d = (w * (logw - logq[None, :])).sum(axis=1)
        lower = float(np.log2(np.dot(p, np.exp2(d))))
        upper = float(d.max())
        val = float(np.dot(p, d))
        if val > best_val:
            best_p, best_val = p, val
        gap = upper - lower
        p = p * np.exp2(d - d.max())
        p = p / p.sum()
        if gap < tol:
            converged = True
            val = _mutual_information_fast(p, w, logw)
            if val > best_val:
                best_p, best_val = p, val
            break
    if not converged:
        warnings.warn(
            f"capacity iteration did not converge in {max_iter} steps (gap {gap:.3g} bits)",
            CapacityConvergenceWarning,
            stacklevel=2,
        )
    best_p = best_p.copy()
    best_p.setflags(write=False)
    return CapacityResult(max(best_val, 0.0), best_p, it, converged, gap)


def huffman_code_lengths(probs) -> np.ndarray:
    """Codeword lengths of an optimal binary prefix code.

    Zero-probability symbols get length 0 (never emitted); a single live
    symbol is coded with 0 bits.
    """
    probs = np.asarray(probs, dtype=float)
    lengths = np.zeros(probs.size, dtype=int)
    live = np.flatnonzero(probs > 0)
    if live.size <= 1:
        return lengths
    counter = itertools.count()
    heap = [(probs[i], next(counter), [int(i)]) for i in live]
    heapq.heapify(heap)
    while len(heap) > 1:
        pa, _, a = heapq.heappop(heap)
        pb, _, b = heapq.heappop(heap)
        merged = a + b
        lengths[merged] += 1
        heapq.heappush(heap, (pa + pb, next(counter), merged))
    return lengths


def block_distribution(p, block_len: int) -> np.ndarray:
    """Product distribution over all ``len(p) ** block_len`` blocks (lexicographic)."""
    p = as_distribution(p)
    if block_len < 1:
        raise ValueError("block_len must be at least 1")
    if p.size ** block_len > MAX_CODEWORDS:
        raise ValueError(
            f"{p.size}^{block_len} blocks exceeds the cap of {MAX_CODEWORDS} codewords"
        )
    out = np.ones(1)
    for _ in range(block_len):
        out = np.outer(out, p).reshape(-1)
    return out


def expected_coding_rate(p, block_len: int) -> float:
    """Exact expected bits per source symbol of the block Huffman code."""
    blocks = block_distribution(p, block_len)
    return float(np.dot(blocks, huffman_code_lengths(blocks)) / block_len)


def empirical_coding_rate(p, block_len: int, n_blocks: int, rng: np.random.Generator) -> float:
    """Mean encoded bits per symbol over ``n_blocks`` sampled source blocks.

    The code is the optimal prefix code for blocks of ``block_len`` letters,
    whose expected rate lies in ``[H, H + 1/block_len)``.
    """
    if n_blocks < 1:
        raise ValueError("n_blocks must be at least 1")
    blocks = block_distribution(p, block_len)
    lengths = huffman_code_lengths(blocks)
    drawn = rng.choice(blocks.size, size=n_blocks, p=blocks)
    return float(lengths[drawn].sum() / (n_blocks * block_len))


def _matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityOperator):
        return rho.matrix
    if isinstance(rho, StateVector):
        return density_from_state(rho).matrix
    return np.asarray(rho, dtype=complex)


def _entropy_of_spectrum(evals: np.ndarray) -> np.ndarray:
    evals = np.where((evals < 0) & (evals >= -TOL), 0.0, evals)
    if np.any(evals < -TOL):
        raise ValueError("operator has eigenvalues below -1e-10")
    return -_plogp(evals).sum(axis=-1)


def von_neumann_entropy(rho) -> float:
    """``S(rho) = -Tr rho log2 rho``."""
    m = _matrix(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.conj().T, atol=TOL, rtol=0):
        raise ValueError("density operator is not Hermitian")
    return float(max(_entropy_of_spectrum(np.linalg.eigvalsh(m)), 0.0)) + 0.0


class QuantumEnsemble:
    """Signal states ``rho_i`` emitted with probabilities ``p_i``.

    ``states`` may be a sequence of :class:`DensityOperator`,
    :class:`StateVector` or matrices, or an array of shape ``(k, d, d)``.
    """

    def __init__(self, probabilities, states):
        self.probabilities = as_distribution(probabilities, "ensemble probabilities")
        if isinstance(states, np.ndarray) and states.ndim == 3:
            mats = np.asarray(states, dtype=complex)
        else:
            mats = np.stack([_matrix(s) for s in states])
        if mats.shape[0] != self.probabilities.size:
            raise ValueError("one probability is needed per signal state")
        if mats.shape[1] != mats.shape[2]:
            raise ValueError("signal states must be square matrices of a common dimension")
        if not np.allclose(mats, np.conj(np.swapaxes(mats, 1, 2)), atol=TOL, rtol=0):
            raise ValueError("signal states must be Hermitian")
        if not np.allclose(np.trace(mats, axis1=1, axis2=2), 1.0, atol=TOL, rtol=0):
            raise ValueError("signal states must have unit trace")
        self._evals = np.linalg.eigvalsh(mats)
        if self._evals.min() < -TOL:
            raise ValueError("signal states must be positive semidefinite")
        self.states = mats
        self.states.setflags(write=False)

    def __len__(self) -> int:
        return self.probabilities.size

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @cached_property
    def average(self) -> np.ndarray:
        """``rho = sum_i p_i rho_i``."""
        return np.einsum("i,ijk->jk", self.probabilities, self.states)

    def signal_entropies(self) -> np.ndarray:
        return _entropy_of_spectrum(self._evals)


class POVM:
    """Positive operators ``E_k`` summing to the identity."""

    def __init__(self, effects):
        mats = np.stack([_matrix(e) for e in effects]) if not (
            isinstance(effects, np.ndarray) and effects.ndim == 3) else np.asarray(effects, dtype=complex)
        d = mats.shape[1]
        if mats.shape[2] != d:
            raise ValueError("POVM effects must be square")
        if not np.allclose(mats, np.conj(np.swapaxes(mats, 1, 2)), atol=TOL, rtol=0):
            raise ValueError("POVM effects must be Hermitian")
        if np.linalg.eigvalsh(mats).min() < -TOL:
            raise ValueError("POVM effects must be positive semidefinite")
        if not np.allclose(mats.sum(axis=0), np.eye(d), atol=TOL, rtol=0):
            raise ValueError("POVM is incomplete: effects do not sum to the identity")
        self.effects = mats
        self.effects.setflags(write=False)

    def __len__(self) -> int:
        return self.effects.shape[0]


def holevo_chi(ens: QuantumEnsemble) -> float:
    """``chi = S(rho) - sum_i p_i S(rho_i)``."""
    s_avg = von_neumann_entropy(ens.average)
    return float(max(s_avg - np.dot(ens.probabilities, ens.signal_entropies()), 0.0))


def povm_joint_distribution(ens: QuantumEnsemble, m: POVM) -> np.ndarray:
    """``p(i, k) = p_i Tr(rho_i E_k)``."""
    if m.effects.shape[1] != ens.dim:
        raise ValueError(f"POVM dimension {m.effects.shape[1]} does not match ensemble dimension {ens.dim}")
    overlaps = np.real(np.einsum("ijk,lkj->il", ens.states, m.effects))
    return np.clip(ens.probabilities[:, None] * overlaps, 0.0, None)


def povm_mutual_information(ens: QuantumEnsemble, m: POVM) -> float:
    """Mutual information between signal index and POVM outcome."""
    joint = povm_joint_distribution(ens, m)
    return joint_mutual_information(joint / joint.sum())


@dataclass(frozen=True)
class TypicalSubspace:
    dimension: int
    probability: float

    def rate(self, n_copies: int) -> float:
        """Qubits per copy, ``log2(dimension) / n``."""
        return float(np.log2(self.dimension) / n_copies)


def typical_subspace(rho, n_copies: int, epsilon: float) -> TypicalSubspace:
    """Smallest eigen-subspace of ``rho^{otimes n}`` holding weight ``>= 1 - epsilon``.

    The product eigenvalues are enumerated exactly, so ``dim(rho) ** n_copies``
    is capped at ``2 ** 20``.
    """
    m = _matrix(rho)
    if n_copies < 1:
        raise ValueError("n_copies must be at least 1")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    if m.shape[0] ** n_copies > MAX_TYPICAL_DIM:
        raise ValueError(f"{m.shape[0]}^{n_copies} eigenvalues is too many for exact enumeration")
    evals = np.clip(np.linalg.eigvalsh(m), 0.0, None)
    weights = np.ones(1)
    for _ in range(n_copies):
        weights = np.outer(weights, evals).reshape(-1)
    weights = np.sort(weights)[::-1]
    cum = np.cumsum(weights)
    k = int(np.searchsorted(cum, 1.0 - epsilon - 1e-12, side="left"))
    k = min(k, weights.size - 1)
    return TypicalSubspace(k + 1, float(min(cum[k], 1.0)))


def random_qubit_ensemble(members: int, rng: np.random.Generator, mixed: bool = False) -> QuantumEnsemble:
    """Random ensemble: Dirichlet weights over Haar pure states (or random mixed ones)."""
    probs = rng.dirichlet(np.ones(members))
    v = rng.normal(size=(members, 2)) + 1j * rng.normal(size=(members, 2))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    states = np.einsum("ni,nj->nij", v, v.conj())
    if mixed:
        lam = rng.uniform(size=members)[:, None, None]
        states = lam * states + (1 - lam) * np.eye(2)[None] / 2
    return QuantumEnsemble(probs, states)


def random_povm(dim: int, n_outcomes: int, rng: np.random.Generator) -> POVM:
    """Random POVM ``E_k = S^{-1/2} A_k S^{-1/2}`` from Wishart-like ``A_k``."""
    g = rng.normal(size=(n_outcomes, dim, dim)) + 1j * rng.normal(size=(n_outcomes, dim, dim))
    a = g @ np.conj(np.swapaxes(g, 1, 2))
    w, v = np.linalg.eigh(a.sum(axis=0))
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    effects = s_inv_half[None] @ a @ s_inv_half[None]
    effects = 0.5 * (effects + np.conj(np.swapaxes(effects, 1, 2)))
    return POVM(effects)
