"""Teleportation protocol engine.

System ``1`` carries the unknown state, ``2``/``3`` share the Bell resource
(Alice holds ``2``, Bob holds ``3``) and ``c``/``d`` are Alice's pointer qubits
in the no-collapse treatment. The protocol can be run as

* ``collapse``  -- Bell measurement with a random outcome, two classical bits,
  conditional correction;
* ``unitary``   -- measurement interaction ``U_A`` writing the outcome into
  ``c, d`` followed by Bob's conditional unitary ``U_B``; no collapse anywhere;
* ``bohm``      -- the unitary run with one branch singled out as active,
  chosen with Born weights;
* ensemble / statistical bookkeeping over many collapse-level trials via
  :func:`run_ensemble`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .qcore import (
    BELL_KINDS,
    I2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    TOL,
    DensityOperator,
    StateVector,
    UnitaryOperator,
    apply_unitary,
    basis_state,
    bell_basis,
    bell_projector,
    bell_state,
    bloch_vector,
    canonical_bell,
    computational_basis,
    density_from_state,
    fidelity,
    maximally_mixed,
    measure,
    outcome_probabilities,
    project,
    reduced_state,
    tensor,
    trace_distance,
)

MODES = ("collapse", "unitary", "bohm")
ENSEMBLE_MODES = ("ensemble", "statistical")

SYSTEMS = ("1", "2", "3")
POINTER = ("c", "d")
UNITARY_LABELS = POINTER + SYSTEMS

# outcome -> pointer reading written by U_A
POINTER_BITS = {"phi+": "00", "phi-": "01", "psi+": "10", "psi-": "11"}
BITS_TO_OUTCOME = {v: k for k, v in POINTER_BITS.items()}

# relative state of 3 in each Bell branch, singlet resource: op |chi>
SINGLET_BRANCH_OPERATORS = {
    "phi+": -1j * SIGMA_Y,
    "phi-": SIGMA_X,
    "psi+": -SIGMA_Z,
    "psi-": -I2,
}
SINGLET_BRANCH_NAMES = {"phi+": "-i*sigma_y", "phi-": "sigma_x", "psi+": "-sigma_z", "psi-": "-1"}
SINGLET_CORRECTION_NAMES = {"phi+": "i*sigma_y", "phi-": "sigma_x", "psi+": "-sigma_z", "psi-": "-1"}

# resource = (1 (x) R) psi-
_RESOURCE_FROM_SINGLET = {
    "psi-": I2,
    "phi-": SIGMA_X,
    "psi+": -SIGMA_Z,
    "phi+": 1j * SIGMA_Y,
}

PURITY_THRESHOLD = 1.0 - 1e-10


class DecompositionError(ValueError):
    """The state is not of the ``|chi>_1 (x) Bell_23`` form."""


@dataclass(frozen=True)
class UnknownState:
    """``alpha |up> + beta |down>``."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        norm2 = abs(a) ** 2 + abs(b) ** 2
        if abs(norm2 - 1.0) > TOL:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm2!r}, expected 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def normalized(cls, alpha: complex, beta: complex) -> "UnknownState":
        n = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if n == 0:
            raise ValueError("alpha and beta cannot both vanish")
        return cls(alpha / n, beta / n)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "UnknownState":
        """Haar-uniform draw (uniform on the Bloch sphere)."""
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = v / np.linalg.norm(v)
        return cls(v[0], v[1])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def ket(self, label: str = "1") -> StateVector:
        return StateVector(self.vector, (label,))

    def spin(self) -> np.ndarray:
        """Bloch vector ``s(alpha, beta)``."""
        return bloch_vector(np.outer(self.vector, self.vector.conj()))


def branch_operator(outcome: str, resource: str = "psi-") -> np.ndarray:
    """Operator taking ``|chi>`` to Bob's relative state in Bell branch ``outcome``."""
    outcome, resource = canonical_bell(outcome), canonical_bell(resource)
    return _RESOURCE_FROM_SINGLET[resource] @ SINGLET_BRANCH_OPERATORS[outcome]


def correction_unitary(outcome: str, resource: str = "psi-") -> UnitaryOperator:
    """Bob's correction on system 3 after Alice reports ``outcome``.

    For the singlet resource these are ``i sigma_y, sigma_x, -sigma_z, -1``
    for ``phi+, phi-, psi+, psi-``.
    """
    outcome, resource = canonical_bell(outcome), canonical_bell(resource)
    op = branch_operator(outcome, resource).conj().T
    if resource == "psi-":
        name = SINGLET_CORRECTION_NAMES[outcome]
    else:
        name = f"correction[{outcome}|{resource}]"
    return UnitaryOperator(op, ("3",), name)


def build_initial(chi: UnknownState, resource: str = "psi-") -> StateVector:
    """``|chi>_1 (x) |resource>_23``."""
    return tensor(chi.ket("1"), bell_state(resource, ("2", "3")))


@dataclass(frozen=True)
class BellBranch:
    outcome: str
    coefficient: float
    bob_state: StateVector
    operator: str
    fidelity: float


@dataclass(frozen=True)
class BellDecomposition:
    branches: tuple[BellBranch, ...]
    chi: UnknownState
    residual: float

    def branch(self, outcome: str) -> BellBranch:
        outcome = canonical_bell(outcome)
        return next(b for b in self.branches if b.outcome == outcome)


def _relative_states(state: StateVector) -> dict[str, np.ndarray]:
    """Unnormalized ``(<B_k|_12 (x) 1_3) |state>`` for each Bell outcome."""
    m = state.permuted(SYSTEMS).amplitudes.reshape(4, 2)
    out = {}
    for k in BELL_KINDS:
        bk = bell_state(k, ("1", "2")).amplitudes
        out[k] = bk.conj() @ m
    return out


def bell_decomposition(state: StateVector, resource: str = "psi-",
                       chi: UnknownState | None = None) -> BellDecomposition:
    """Expand a three-system state over Bell states of ``1, 2``.

    Each branch carries its coefficient, Bob's normalized relative state and
    the fidelity of that state with ``branch_operator(k) |chi>``. ``chi`` is
    recovered from the branches when not supplied; the residual is the
    amplitude distance between ``state`` and the rebuilt ``|chi>|resource>``
    and must stay below ``1e-10``.
    """
    if set(state.labels) != set(SYSTEMS):
        raise DecompositionError(f"expected labels {SYSTEMS}, got {state.labels}")
    resource = canonical_bell(resource)
    rel = _relative_states(state)
    candidates = [2.0 * (correction_unitary(k, resource).matrix @ rel[k]) for k in BELL_KINDS]
    guess = np.mean(candidates, axis=0)
    if np.linalg.norm(guess) < 1e-12:
        raise DecompositionError("branches do not share a common unknown state")
    recovered = UnknownState.normalized(*guess)
    rebuilt = build_initial(recovered, resource).amplitudes
    residual = float(np.linalg.norm(state.permuted(SYSTEMS).amplitudes - rebuilt))
    if residual > TOL:
        raise DecompositionError(f"decomposition residual {residual:.3g} exceeds {TOL}")
    ref = chi if chi is not None else recovered
    branches = []
    for k in BELL_KINDS:
        coef = float(np.linalg.norm(rel[k]))
        bob = StateVector(rel[k] / coef, ("3",))
        expected = StateVector(branch_operator(k, resource) @ ref.vector, ("3",))
        name = SINGLET_BRANCH_NAMES[k] if resource == "psi-" else f"branch[{k}|{resource}]"
        branches.append(BellBranch(k, coef, bob, name, fidelity(expected, bob)))
    return BellDecomposition(tuple(branches), recovered, residual)


@dataclass(frozen=True)
class Stage:
    """Snapshot of the register after one protocol step."""

    name: str
    state: StateVector
    reduced: dict[str, DensityOperator]
    bob_fidelity: float
    outcome: str | None = None


@dataclass(frozen=True)
class TeleportTranscript:
    mode: str
    chi: UnknownState
    resource: str
    stages: tuple[Stage, ...]
    outcome: str | None
    bits: str | None
    correction: str | None
    fidelity: float
    classical_bits: int = 2

    def stage(self, name: str) -> Stage:
        return next(s for s in self.stages if s.name == name)


def _stage(name: str, state: StateVector, chi: UnknownState, outcome: str | None = None) -> Stage:
    reduced = {lab: reduced_state(state, [lab]) for lab in state.labels}
    return Stage(name, state, reduced, fidelity(chi.ket("3"), reduced["3"]), outcome)


def run_collapse(chi: UnknownState, rng: np.random.Generator, resource: str = "psi-",
                 outcome: str | None = None) -> TeleportTranscript:
    """Textbook run: Bell measurement with collapse, two bits, correction.

    ``outcome`` forces a particular Bell result instead of sampling it.
    """
    resource = canonical_bell(resource)
    state = build_initial(chi, resource)
    stages = [_stage("initial", state, chi)]
    outcome, _, state = measure(state, bell_basis(("1", "2")), rng, outcome=outcome)
    stages.append(_stage("measured", state, chi, outcome))
    bits = POINTER_BITS[outcome]
    stages.append(_stage("bits_sent", state, chi, outcome))
    corr = correction_unitary(outcome, resource)
    state = apply_unitary(state, corr)
    final = _stage("corrected", state, chi, outcome)
    stages.append(final)
    return TeleportTranscript("collapse", chi, resource, tuple(stages), outcome, bits,
                              corr.name, final.bob_fidelity)


@lru_cache(maxsize=None)
def measurement_interaction_ua() -> UnitaryOperator:
    """Alice's measurement interaction on ``1, 2, c, d``.

    ``U_A = sum_k |B_k><B_k|_12 (x) X_c^{b_c(k)} (x) X_d^{b_d(k)}``: the pointer
    qubits are flipped according to the Bell index, so
    ``|B_k>|00> -> |B_k>|b_c b_d>`` and the map is unitary on all 16 dimensions.
    """
    u = np.zeros((16, 16), dtype=complex)
    for k in BELL_KINDS:
        bc, bd = (int(b) for b in POINTER_BITS[k])
        flips = np.kron(np.linalg.matrix_power(SIGMA_X, bc), np.linalg.matrix_power(SIGMA_X, bd))
        u += np.kron(bell_projector(k), flips)
    return UnitaryOperator(u, ("1", "2", "c", "d"), "U_A")


@lru_cache(maxsize=None)
def correction_interaction_ub(resource: str = "psi-") -> UnitaryOperator:
    """Bob's conditional correction ``sum_k P^{cd}_{bits(k)} (x) C_k`` on ``c, d, 3``."""
    resource = canonical_bell(resource)
    u = np.zeros((8, 8), dtype=complex)
    for k in BELL_KINDS:
        p = np.zeros((4, 4), dtype=complex)
        i = int(POINTER_BITS[k], 2)
        p[i, i] = 1.0
        u += np.kron(p, correction_unitary(k, resource).matrix)
    return UnitaryOperator(u, ("c", "d", "3"), "U_B")


def unitary_initial(chi: UnknownState, resource: str = "psi-") -> StateVector:
    """``|0>_c |0>_d |chi>_1 |resource>_23``."""
    return tensor(basis_state("00", POINTER), build_initial(chi, resource))


def _unitary_stages(chi: UnknownState, resource: str) -> list[Stage]:
    state = unitary_initial(chi, resource)
    stages = [_stage("initial", state, chi)]
    state = apply_unitary(state, measurement_interaction_ua())
    stages.append(_stage("measured", state, chi))
    # c, d travel to Bob; the joint state is untouched
    stages.append(_stage("transported", state, chi))
    state = apply_unitary(state, correction_interaction_ub(resource))
    stages.append(_stage("corrected", state, chi))
    return stages


def run_unitary(chi: UnknownState, resource: str = "psi-") -> TeleportTranscript:
    """No-collapse run: ``U_A``, transport of ``c, d``, then ``U_B``.

    No outcome is ever selected, so the transcript has no outcome or bits,
    but the two pointer qubits still carry two bits of record.
    """
    resource = canonical_bell(resource)
    stages = _unitary_stages(chi, resource)
    return TeleportTranscript("unitary", chi, resource, tuple(stages), None, None, "U_B",
                              stages[-1].bob_fidelity)


def pointer_distribution(state: StateVector) -> dict[str, float]:
    """Born weights of the ``c, d`` pointer readings, keyed by Bell outcome."""
    probs = outcome_probabilities(state, computational_basis(POINTER))
    return {BITS_TO_OUTCOME[b]: float(p) for b, p in zip(("00", "01", "10", "11"), probs)}


def _sample(outcomes: Sequence[str], probs, rng: np.random.Generator) -> str:
    probs = np.asarray(probs, dtype=float)
    return outcomes[int(rng.choice(len(outcomes), p=probs / probs.sum()))]


def run_bohm(chi: UnknownState, rng: np.random.Generator, resource: str = "psi-") -> TeleportTranscript:
    """Uncollapsed run with one pointer branch marked active.

    The wavefunction evolves exactly as in :func:`run_unitary`; the active
    branch is drawn from the pointer's Born weights after ``U_A``.
    """
    resource = canonical_bell(resource)
    stages = _unitary_stages(chi, resource)
    weights = pointer_distribution(stages[1].state)
    outcome = _sample(BELL_KINDS, [weights[k] for k in BELL_KINDS], rng)
    stages = [s if s.name == "initial" else Stage(s.name, s.state, s.reduced, s.bob_fidelity, outcome)
              for s in stages]
    return TeleportTranscript("bohm", chi, resource, tuple(stages), outcome, POINTER_BITS[outcome],
                              correction_unitary(outcome, resource).name, stages[-1].bob_fidelity)


def run_protocol(chi: UnknownState, mode: str, rng: np.random.Generator,
                 resource: str = "psi-") -> TeleportTranscript:
    if mode == "collapse":
        return run_collapse(chi, rng, resource)
    if mode == "unitary":
        return run_unitary(chi, resource)
    if mode == "bohm":
        return run_bohm(chi, rng, resource)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def bob_state_before_bits(chi: UnknownState, how: str, resource: str = "psi-") -> DensityOperator:
    """Bob's reduced state before any classical bits arrive.

    ``how`` is ``"unmeasured"`` (Alice did nothing), ``"collapse"`` (Alice
    measured, outcome unknown to Bob, so averaged with Born weights) or
    ``"unitary"`` (after ``U_A``).
    """
    initial = build_initial(chi, resource)
    if how == "unmeasured":
        return reduced_state(initial, ["3"])
    if how == "collapse":
        basis = bell_basis(("1", "2"))
        rho = np.zeros((2, 2), dtype=complex)
        for k in basis.outcomes:
            p, post = project(initial, basis, k)
            rho += p * reduced_state(post, ["3"]).matrix
        return DensityOperator(rho, ("3",))
    if how == "unitary":
        state = apply_unitary(unitary_initial(chi, resource), measurement_interaction_ua())
        return reduced_state(state, ["3"])
    raise ValueError(f"unknown preparation {how!r}")


def no_signalling_check(samples: Sequence[UnknownState], stage: str = "pre_bits",
                        resource: str = "psi-") -> float:
    """Largest trace distance of Bob's pre-bit state from ``1/2`` over samples.

    ``stage="initial"`` only looks at the unmeasured state; ``"pre_bits"``
    also covers the collapse average and the post-``U_A`` state.
    """
    if len(samples) < 2:
        raise ValueError("need at least two unknown states to compare")
    hows = {"initial": ("unmeasured",), "pre_bits": ("unmeasured", "collapse", "unitary")}
    if stage not in hows:
        raise ValueError(f"unknown stage {stage!r}")
    mixed = maximally_mixed(["3"])
    return max(trace_distance(bob_state_before_bits(chi, how, resource), mixed)
               for chi in samples for how in hows[stage])


@dataclass(frozen=True)
class BohmBranch:
    outcome: str
    probability: float
    bob_state: StateVector
    spin: np.ndarray


@dataclass(frozen=True)
class BohmBranchReport:
    branches: tuple[BohmBranch, ...]
    active: str
    pre_spins: dict[str, np.ndarray]
    original_spin: np.ndarray
    final_spin: np.ndarray

    def branch(self, outcome: str) -> BohmBranch:
        outcome = canonical_bell(outcome)
        return next(b for b in self.branches if b.outcome == outcome)

    @property
    def active_spin(self) -> np.ndarray:
        return self.branch(self.active).spin


def bohm_branch_analysis(chi: UnknownState, rng: np.random.Generator,
                         resource: str = "psi-") -> BohmBranchReport:
    """Spin vectors before Alice's measurement and in each of the four branches.

    Before the measurement systems 2 and 3 have zero spin vector (singlet).
    Afterwards Bob's spin in branch ``k`` is the Bloch vector of his relative
    state; one branch is drawn active with its Born weight.
    """
    resource = canonical_bell(resource)
    initial = build_initial(chi, resource)
    pre = {lab: bloch_vector(reduced_state(initial, [lab])) for lab in ("2", "3")}
    decomp = bell_decomposition(initial, resource, chi)
    branches = tuple(
        BohmBranch(b.outcome, b.coefficient ** 2, b.bob_state,
                   bloch_vector(density_from_state(b.bob_state)))
        for b in decomp.branches
    )
    active = _sample(BELL_KINDS, [b.probability for b in branches], rng)
    corrected = apply_unitary(next(b for b in branches if b.outcome == active).bob_state,
                              correction_unitary(active, resource))
    return BohmBranchReport(branches, active, pre, chi.spin(),
                            bloch_vector(density_from_state(corrected)))


def sample_active_branches(chi: UnknownState, n_runs: int, rng: np.random.Generator,
                           resource: str = "psi-") -> dict[str, int]:
    """Counts of the active branch over ``n_runs`` independent Bohm runs."""
    decomp = bell_decomposition(build_initial(chi, resource), resource, chi)
    probs = np.array([b.coefficient ** 2 for b in decomp.branches])
    counts = np.bincount(rng.choice(4, size=n_runs, p=probs / probs.sum()), minlength=4)
    return dict(zip(BELL_KINDS, (int(c) for c in counts)))


@dataclass(frozen=True)
class FactorizationReport:
    stage: str
    partition: tuple[tuple[str, ...], ...]
    purities: tuple[float, ...]
    certified: tuple[bool, ...]

    def as_sets(self) -> set[frozenset[str]]:
        return {frozenset(g) for g in self.partition}


def factorization_structure(state: StateVector, stage: str,
                            atoms: Sequence[Sequence[str]] | None = None) -> FactorizationReport:
    """Finest split of the register into groups that carry pure states.

    ``atoms`` are the indivisible units; by default every label is its own
    unit except that the pointer qubits ``c, d`` form one apparatus. Groups
    are grown smallest-first, which yields the unique finest partition since
    the intersection of two pure factors is again a pure factor.
    """
    if atoms is None:
        pointer = tuple(lab for lab in state.labels if lab in POINTER)
        atoms = ([pointer] if pointer else []) + [(lab,) for lab in state.labels if lab not in POINTER]
    atoms = [tuple(a) for a in atoms]
    flat = [lab for a in atoms for lab in a]
    if sorted(flat) != sorted(state.labels):
        raise ValueError("atoms must cover every label exactly once")

    def ordered(group):
        return tuple(lab for lab in state.labels if lab in group)

    remaining = list(atoms)
    groups = []
    while remaining:
        found = None
        for size in range(1, len(remaining)):
            for combo in itertools.combinations(remaining, size):
                labs = ordered({lab for a in combo for lab in a})
                if reduced_state(state, labs).purity() >= PURITY_THRESHOLD:
                    found = combo
                    break
            if found:
                break
        if found is None:
            found = tuple(remaining)
        groups.append(ordered({lab for a in found for lab in a}))
        remaining = [a for a in remaining if a not in found]
    purities = tuple(reduced_state(state, g).purity() for g in groups)
    return FactorizationReport(stage, tuple(groups), purities,
                               tuple(p >= PURITY_THRESHOLD for p in purities))


@dataclass(frozen=True)
class SubEnsemble:
    outcome: str
    count: int
    bob_state: StateVector
    corrected_state: StateVector
    fidelity: float


@dataclass(frozen=True)
class EnsembleReport:
    mode: str
    m: int
    counts: dict[str, int]
    sub_ensembles: dict[str, SubEnsemble] | None = None
    pooled: DensityOperator | None = None
    pooled_distance: float | None = None
    fractions: dict[str, float] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "fractions", {k: c / self.m for k, c in self.counts.items()})


def run_ensemble(chi: UnknownState, m: int, rng: np.random.Generator, mode: str = "ensemble",
                 resource: str = "psi-") -> EnsembleReport:
    """Bob's ensemble after ``m`` independent collapse-level runs.

    Every run has the same Born distribution over the four outcomes, so the
    ``m`` outcomes are drawn in one batch. In ``ensemble`` mode the runs are
    sorted by their classical bits into four sub-ensembles, each with its
    branch state, corrected state and fidelity to ``chi``; the pooled
    uncorrected mixture is reported too. ``statistical`` mode reports only the
    outcome counts and ascribes no state to individual systems.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if mode not in ENSEMBLE_MODES:
        raise ValueError(f"unknown ensemble mode {mode!r}")
    resource = canonical_bell(resource)
    decomp = bell_decomposition(build_initial(chi, resource), resource, chi)
    probs = np.array([b.coefficient ** 2 for b in decomp.branches])
    drawn = rng.choice(4, size=m, p=probs / probs.sum())
    counts = dict(zip(BELL_KINDS, (int(c) for c in np.bincount(drawn, minlength=4))))
    if mode == "statistical":
        return EnsembleReport(mode, m, counts)
    subs = {}
    pooled = np.zeros((2, 2), dtype=complex)
    for b in decomp.branches:
        corrected = apply_unitary(b.bob_state, correction_unitary(b.outcome, resource))
        subs[b.outcome] = SubEnsemble(b.outcome, counts[b.outcome], b.bob_state, corrected,
                                      fidelity(chi.ket("3"), corrected))
        pooled += counts[b.outcome] / m * density_from_state(b.bob_state).matrix
    pooled_rho = DensityOperator(pooled, ("3",))
    return EnsembleReport(mode, m, counts, subs, pooled_rho,
                          trace_distance(pooled_rho, maximally_mixed(["3"])))
