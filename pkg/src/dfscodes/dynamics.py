"""Register-plus-truncated-boson-bath dynamics and fixed-point verification.

The total Hamiltonian is H = H_register + H_bath + H_int with the register
coupled to every bosonic mode through collective generators (or, when site
phases break replica symmetry, through per-site generators with unit-modulus
phase factors).  Evolution is exact: dense Hermitian eigendecomposition up to
EIGH_DIM_LIMIT, Lanczos exponential-times-vector above it.  Bath modes are
Fock-truncated at ``fock_truncation`` quanta per mode.

The checks at the bottom verify the fixed-point structure: states on the
singlet code are stationary under the reduced (Liouvillian) evolution for any
bath state and any coupling strength, weight-space states are stationary
under pure dephasing, and a replica-symmetric register-register interaction
turns the reduced dynamics into a unitary rotation inside the code.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import algebra
from .codes import CodeSubspace

# Production integrator: eigendecomposition up to here, Krylov above.
EIGH_DIM_LIMIT = 512

# Preconditions shared by the fixed-point checks.
CODE_SUPPORT_TOL = 1e-12
SYMMETRY_COMMUTATOR_TOL = 1e-10


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class BathSpec:
    """Truncated bosonic bath: one frequency per mode, occupations 0..n_max."""

    frequencies: tuple[float, ...]
    fock_truncation: int = 3

    def __post_init__(self):
        freqs = tuple(float(w) for w in self.frequencies)
        object.__setattr__(self, "frequencies", freqs)
        if not freqs:
            raise ValueError("bath needs at least one mode")
        if any(w <= 0 for w in freqs):
            raise ValueError(f"mode frequencies must be positive, got {freqs}")
        if self.fock_truncation < 1:
            raise ValueError(f"fock_truncation must be >= 1, got {self.fock_truncation}")
        if self.dim > algebra.DENSE_DIM_LIMIT:
            raise ValueError(
                f"bath dimension {self.dim} exceeds dense limit {algebra.DENSE_DIM_LIMIT}"
            )

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    @property
    def levels(self) -> int:
        return self.fock_truncation + 1

    @property
    def dim(self) -> int:
        return self.levels**self.n_modes


@dataclass(frozen=True)
class CouplingSpec:
    """Mode-resolved coupling amplitudes, one column per Chevalley index.

    Families (each switchable, each added together with its conjugate):
      absorption       raising ⊗ annihilation   (excitation by mode absorption)
      counter_rotating raising ⊗ creation       (both excited / both de-excited)
      dephasing        Cartan ⊗ annihilation    (conservative, dephasing only)

    ``tau`` scales each Chevalley index globally.  ``site_phases`` is an
    optional (replicas, modes) table of unit-modulus factors multiplying the
    coupling of each replica to each mode; None means replica symmetry.
    """

    absorption: np.ndarray
    counter_rotating: np.ndarray
    dephasing: np.ndarray
    tau: np.ndarray
    site_phases: np.ndarray | None = None
    enable_absorption: bool = True
    enable_counter_rotating: bool = True
    enable_dephasing: bool = True

    def __post_init__(self):
        tables = {}
        for name in ("absorption", "counter_rotating", "dephasing"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), dtype=complex))
            arr.setflags(write=False)
            tables[name] = arr
            object.__setattr__(self, name, arr)
        shape = tables["absorption"].shape
        for name, arr in tables.items():
            if arr.shape != shape:
                raise ValueError(
                    f"coupling table {name} has shape {arr.shape}, expected {shape}"
                )
        tau = np.asarray(self.tau, dtype=complex).reshape(-1)
        if tau.shape != (shape[1],):
            raise ValueError(f"tau must have length {shape[1]}, got {tau.shape}")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        if self.site_phases is not None:
            phases = np.asarray(self.site_phases, dtype=complex)
            if phases.ndim != 2 or phases.shape[1] != shape[0]:
                raise ValueError(
                    f"site_phases must be (replicas, {shape[0]}), got {phases.shape}"
                )
            if np.abs(np.abs(phases) - 1.0).max() > 1e-12:
                raise ValueError("site_phases entries must have unit modulus")
            phases.setflags(write=False)
            object.__setattr__(self, "site_phases", phases)

    @property
    def n_modes(self) -> int:
        return self.absorption.shape[0]

    @property
    def rank(self) -> int:
        return self.absorption.shape[1]

    @property
    def replica_symmetric(self) -> bool:
        return self.site_phases is None or bool(
            np.abs(self.site_phases - 1.0).max() < 1e-15
        )

    @classmethod
    def uniform(
        cls,
        n_modes: int,
        rank: int,
        absorption: complex = 1.0,
        counter_rotating: complex = 1.0,
        dephasing: complex = 1.0,
        tau: Sequence[complex] | None = None,
        **flags,
    ) -> "CouplingSpec":
        """Same amplitude for every mode and Chevalley index."""
        full = np.full((n_modes, rank), 1.0, dtype=complex)
        return cls(
            absorption=absorption * full,
            counter_rotating=counter_rotating * full,
            dephasing=dephasing * full,
            tau=np.ones(rank) if tau is None else np.asarray(tau),
            **flags,
        )

    def with_site_phases(self, scale: float, replicas: int) -> "CouplingSpec":
        """Replica-position phases exp(i * scale * j) on every mode."""
        return dataclasses.replace(
            self, site_phases=site_phase_table(scale, replicas, self.n_modes)
        )


def site_phase_table(scale: float, replicas: int, n_modes: int) -> np.ndarray:
    """Phase table U[j, k] = exp(i * scale * j), the equally spaced replica row."""
    column = np.exp(1j * scale * np.arange(replicas))
    return np.repeat(column[:, None], n_modes, axis=1)


def random_coupling(
    rng: np.random.Generator, n_modes: int, rank: int, scale: float = 1.0, **flags
) -> CouplingSpec:
    """Random complex amplitudes of magnitude O(scale) for every family."""

    def draw():
        mag = rng.uniform(0.3, 1.0, size=(n_modes, rank)) * scale
        phase = rng.uniform(0.0, 2 * np.pi, size=(n_modes, rank))
        return mag * np.exp(1j * phase)

    return CouplingSpec(
        absorption=draw(),
        counter_rotating=draw(),
        dephasing=draw(),
        tau=np.ones(rank),
        **flags,
    )


@dataclass(frozen=True)
class SystemSpec:
    """Register of N replicas with level splittings and optional interaction."""

    rank: int
    replicas: int
    level_splittings: tuple[float, ...] = (1.0,)
    replica_interaction: np.ndarray | None = None

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")
        eps = tuple(float(e) for e in self.level_splittings)
        if len(eps) != self.rank:
            raise ValueError(
                f"level_splittings must have length {self.rank}, got {len(eps)}"
            )
        object.__setattr__(self, "level_splittings", eps)
        if self.replica_interaction is not None:
            hss = np.asarray(self.replica_interaction, dtype=complex)
            if hss.shape != (self.register_dim, self.register_dim):
                raise ValueError(
                    f"replica interaction must be {self.register_dim} x "
                    f"{self.register_dim}, got {hss.shape}"
                )
            if np.abs(hss - hss.conj().T).max() > 1e-12:
                raise ValueError("replica interaction must be Hermitian to 1e-12")
            hss.setflags(write=False)
            object.__setattr__(self, "replica_interaction", hss)

    @property
    def local_dim(self) -> int:
        return self.rank + 1

    @property
    def register_dim(self) -> int:
        return self.local_dim**self.replicas


@dataclass(frozen=True)
class SimulationSetup:
    """System, bath and coupling bundled with the assembled Hamiltonian."""

    system: SystemSpec
    bath: BathSpec
    coupling: CouplingSpec

    def __post_init__(self):
        if self.coupling.n_modes != self.bath.n_modes:
            raise ValueError(
                f"coupling defined for {self.coupling.n_modes} modes, bath has "
                f"{self.bath.n_modes}"
            )
        if self.coupling.rank != self.system.rank:
            raise ValueError(
                f"coupling defined for rank {self.coupling.rank}, system has rank "
                f"{self.system.rank}"
            )
        if (
            self.coupling.site_phases is not None
            and self.coupling.site_phases.shape[0] != self.system.replicas
        ):
            raise ValueError(
                f"site_phases rows ({self.coupling.site_phases.shape[0]}) must match "
                f"replicas ({self.system.replicas})"
            )
        if self.total_dim > algebra.DENSE_DIM_LIMIT:
            raise ValueError(
                f"total dimension {self.total_dim} exceeds dense limit "
                f"{algebra.DENSE_DIM_LIMIT}"
            )

    @property
    def total_dim(self) -> int:
        return self.system.register_dim * self.bath.dim

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        return assemble_hamiltonian(self.system, self.bath, self.coupling)


# ---------------------------------------------------------------------------
# bath and register operators


@dataclass(frozen=True)
class BathMode:
    annihilation: np.ndarray
    creation: np.ndarray
    number: np.ndarray


def _mode_annihilation_local(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1).astype(complex)


def _mode_annihilation(bath: BathSpec, mode: int) -> sp.csr_matrix:
    return algebra.embed_local(
        _mode_annihilation_local(bath.levels), mode, bath.n_modes, sparse=True
    )


def build_bath_operators(bath: BathSpec) -> list[BathMode]:
    """Truncated ladder and number operators per mode on the full bath space."""
    modes = []
    for k in range(bath.n_modes):
        a = _mode_annihilation(bath, k).toarray()
        modes.append(BathMode(annihilation=a, creation=a.conj().T, number=a.conj().T @ a))
    return modes


def bath_energy_diagonal(bath: BathSpec) -> np.ndarray:
    """Diagonal of H_bath = sum_k omega_k n_k in the Fock product basis."""
    occ = np.arange(bath.levels, dtype=float)
    diag = np.zeros(bath.dim)
    for k, omega in enumerate(bath.frequencies):
        diag += omega * np.tile(
            np.repeat(occ, bath.levels ** (bath.n_modes - 1 - k)), bath.levels**k
        )
    return diag


def fock_index(bath: BathSpec, occupations: Sequence[int]) -> int:
    if len(occupations) != bath.n_modes:
        raise ValueError(
            f"need {bath.n_modes} occupation numbers, got {len(occupations)}"
        )
    idx = 0
    for n in occupations:
        if not 0 <= n <= bath.fock_truncation:
            raise ValueError(
                f"occupation {n} outside truncation 0..{bath.fock_truncation}"
            )
        idx = idx * bath.levels + n
    return idx


def fock_state(bath: BathSpec, occupations: Sequence[int]) -> np.ndarray:
    """Product Fock ket |n_1 ... n_M>."""
    ket = np.zeros(bath.dim, dtype=complex)
    ket[fock_index(bath, occupations)] = 1.0
    return ket


def fock_energy(bath: BathSpec, occupations: Sequence[int]) -> float:
    """Bath eigenvalue sum_k omega_k n_k of the Fock ket."""
    fock_index(bath, occupations)  # range check
    return float(sum(w * n for w, n in zip(bath.frequencies, occupations)))


def fock_mixture(
    bath: BathSpec, terms: Iterable[tuple[float, Sequence[int]]]
) -> np.ndarray:
    """Density matrix sum_i w_i |K_i><K_i| from (weight, occupations) pairs."""
    rho = np.zeros((bath.dim, bath.dim), dtype=complex)
    total = 0.0
    for weight, occupations in terms:
        if weight <= 0:
            raise ValueError(f"mixture weights must be positive, got {weight}")
        rho[fock_index(bath, occupations), fock_index(bath, occupations)] += weight
        total += weight
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"mixture weights must sum to 1, got {total!r}")
    return rho


def gibbs_fock_mixture(bath: BathSpec, beta: float) -> np.ndarray:
    """Truncated thermal state: Gibbs weights over the retained Fock states."""
    if beta <= 0:
        raise ValueError(f"inverse temperature must be positive, got {beta}")
    weights = np.exp(-beta * bath_energy_diagonal(bath))
    return np.diag(weights / weights.sum()).astype(complex)


def system_hamiltonian(system: SystemSpec) -> np.ndarray:
    """sum_a eps_a H_a on the register, plus the replica interaction if any."""
    local = algebra.chevalley_basis(system.rank)
    acc = sp.csr_matrix((system.register_dim, system.register_dim), dtype=complex)
    for eps, h_local in zip(system.level_splittings, local.cartan):
        acc = acc + eps * algebra.collective(h_local, system.replicas, sparse=True)
    out = acc.toarray()
    if system.replica_interaction is not None:
        out = out + system.replica_interaction
    return out


def exchange_hamiltonian(
    replicas: int,
    strength: float = 1.0,
    pairs: Sequence[tuple[int, int]] | None = None,
) -> np.ndarray:
    """Qubit exchange sum over pairs of s+s- + s-s+ + 2 sz sz.

    Each pair term is twice the dot product of the spin vectors, so the total
    commutes with every collective qubit generator regardless of which pairs
    are included; non-uniform pair sets act non-trivially inside the code.
    """
    local = algebra.chevalley_basis(1)
    sm, sp_, sz = local.lowering[0], local.raising[0], local.cartan[0]
    if pairs is None:
        pairs = [(i, j) for i in range(replicas) for j in range(i + 1, replicas)]
    dim = 2**replicas
    acc = sp.csr_matrix((dim, dim), dtype=complex)
    for i, j in pairs:
        if i == j:
            raise ValueError(f"exchange pair ({i}, {j}) must couple distinct sites")
        ei = {op: algebra.embed_local(op_m, i, replicas, sparse=True)
              for op, op_m in (("+", sp_), ("-", sm), ("z", sz))}
        ej = {op: algebra.embed_local(op_m, j, replicas, sparse=True)
              for op, op_m in (("+", sp_), ("-", sm), ("z", sz))}
        acc = acc + (ei["+"] @ ej["-"] + ei["-"] @ ej["+"] + 2.0 * (ei["z"] @ ej["z"]))
    return (strength * acc).toarray()


def assemble_hamiltonian(
    system: SystemSpec, bath: BathSpec, coupling: CouplingSpec
) -> np.ndarray:
    """Hermitian H = H_S ⊗ 1 + 1 ⊗ H_B + H_int, system factors first.

    With trivial site phases the interaction involves only collective
    generators; otherwise each replica couples with its own phase factor.
    """
    setup_dims = (system.register_dim, bath.dim)
    total = setup_dims[0] * setup_dims[1]
    if total > algebra.DENSE_DIM_LIMIT:
        raise ValueError(
            f"total dimension {total} exceeds dense limit {algebra.DENSE_DIM_LIMIT}"
        )
    if coupling.n_modes != bath.n_modes or coupling.rank != system.rank:
        raise ValueError("coupling tables do not match bath modes / system rank")
    n = system.replicas
    local = algebra.chevalley_basis(system.rank)
    phases = coupling.site_phases
    if phases is None:
        phases = np.ones((n, bath.n_modes), dtype=complex)
    elif phases.shape[0] != n:
        raise ValueError(
            f"site_phases rows ({phases.shape[0]}) must match replicas ({n})"
        )

    raising_site = [
        [algebra.embed_local(local.raising[a], i, n, sparse=True) for i in range(n)]
        for a in range(system.rank)
    ]
    cartan_site = [
        [algebra.embed_local(local.cartan[a], i, n, sparse=True) for i in range(n)]
        for a in range(system.rank)
    ]

    interaction = sp.csr_matrix((total, total), dtype=complex)
    for k in range(bath.n_modes):
        b_k = _mode_annihilation(bath, k)
        b_k_dag = b_k.getH().tocsr()
        for a in range(system.rank):
            raise_eff = sum(
                phases[i, k] * raising_site[a][i] for i in range(n)
            )
            cartan_eff = sum(
                phases[i, k] * cartan_site[a][i] for i in range(n)
            )
            tau = coupling.tau[a]
            if coupling.enable_absorption:
                interaction = interaction + (tau * coupling.absorption[k, a]) * sp.kron(
                    raise_eff, b_k, format="csr"
                )
            if coupling.enable_counter_rotating:
                interaction = interaction + (
                    tau * coupling.counter_rotating[k, a]
                ) * sp.kron(raise_eff, b_k_dag, format="csr")
            if coupling.enable_dephasing:
                interaction = interaction + (tau * coupling.dephasing[k, a]) * sp.kron(
                    cartan_eff, b_k, format="csr"
                )
    interaction = interaction + interaction.getH()

    h_total = (
        sp.kron(sp.csr_matrix(system_hamiltonian(system)),
                sp.identity(bath.dim, format="csr"), format="csr")
        + sp.kron(sp.identity(setup_dims[0], format="csr"),
                  sp.diags(bath_energy_diagonal(bath)).tocsr(), format="csr")
        + interaction
    ).toarray()

    scale = max(float(np.abs(h_total).max()), 1.0)
    if np.abs(h_total - h_total.conj().T).max() > 1e-12 * scale:
        raise RuntimeError("internal consistency failure: assembled H not Hermitian")
    return h_total


# ---------------------------------------------------------------------------
# state metrics


def validate_density(rho: np.ndarray, name: str = "state") -> np.ndarray:
    """Hermitian, unit-trace, positive-semidefinite to working tolerance."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ValueError(f"{name} is not Hermitian to 1e-10")
    trace = np.trace(rho)
    if abs(trace - 1.0) > 1e-9:
        raise ValueError(f"{name} trace is {trace!r}, expected 1")
    if scipy.linalg.eigvalsh(rho).min() < -1e-9:
        raise ValueError(f"{name} has an eigenvalue below -1e-9")
    return rho


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of the difference."""
    delta = np.asarray(rho) - np.asarray(sigma)
    delta = 0.5 * (delta + delta.conj().T)
    return float(0.5 * np.abs(scipy.linalg.eigvalsh(delta)).sum())


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity; reduces to the exact overlap form when one input is pure."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    for a, b in ((rho, sigma), (sigma, rho)):
        if purity(a) > 1.0 - 1e-12:
            return float(max(np.real(np.trace(a @ b)), 0.0))
    evals, evecs = scipy.linalg.eigh(rho)
    sqrt_rho = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    inner = scipy.linalg.eigvalsh(sqrt_rho @ sigma @ sqrt_rho)
    # the eigh-based square roots carry ~1e-8 noise; keep the physical range
    return float(min(np.sum(np.sqrt(np.clip(inner, 0.0, None))) ** 2, 1.0))


def expectation(op: np.ndarray, rho: np.ndarray) -> float:
    return float(np.real(np.trace(op @ rho)))


# ---------------------------------------------------------------------------
# evolution


def _check_hermitian(h) -> None:
    if sp.issparse(h):
        delta = (h - h.getH()).tocsr()
        worst = np.abs(delta.data).max() if delta.nnz else 0.0
        scale = np.abs(h.data).max() if h.nnz else 1.0
    else:
        h = np.asarray(h)
        worst = np.abs(h - h.conj().T).max()
        scale = max(float(np.abs(h).max()), 1.0)
    if worst > 1e-10 * max(scale, 1.0):
        raise ValueError("Hamiltonian is not Hermitian")


def _lanczos_expv(matvec, vec: np.ndarray, t: float, tol: float = 1e-11,
                  max_krylov: int = 96) -> np.ndarray:
    """exp(-i t H) vec for Hermitian H, adaptive Lanczos with reorthogonalization.

    The Krylov dimension grows until the standard residual estimate
    beta_m * |last tridiagonal-exponential amplitude| clears ``tol``; if the
    budget runs out the time step is split in half recursively.
    """
    norm0 = float(np.linalg.norm(vec))
    if norm0 == 0.0:
        return np.zeros_like(np.asarray(vec, dtype=complex))
    basis = [np.asarray(vec, dtype=complex) / norm0]
    alphas: list[float] = []
    betas: list[float] = []
    for j in range(max_krylov):
        w = matvec(basis[j])
        alphas.append(float(np.real(np.vdot(basis[j], w))))
        w = w - alphas[j] * basis[j]
        if j > 0:
            w = w - betas[j - 1] * basis[j - 1]
        for u in basis:
            w = w - np.vdot(u, w) * u
        beta = float(np.linalg.norm(w))
        evals, evecs = scipy.linalg.eigh_tridiagonal(alphas, betas)
        y = evecs @ (np.exp(-1j * evals * t) * evecs[0])
        if beta < 1e-14 or beta * abs(y[-1]) < tol:
            return norm0 * (np.column_stack(basis) @ y)
        basis.append(w / beta)
        betas.append(beta)
    half = _lanczos_expv(matvec, vec, t / 2.0, tol=tol / 2.0, max_krylov=max_krylov)
    return _lanczos_expv(matvec, half, t / 2.0, tol=tol / 2.0, max_krylov=max_krylov)


class HermitianPropagator:
    """Cached eigendecomposition of a Hermitian H for repeated evolution times."""

    def __init__(self, hamiltonian: np.ndarray):
        h = hamiltonian.toarray() if sp.issparse(hamiltonian) else np.asarray(hamiltonian)
        _check_hermitian(h)
        self.evals, self.evecs = scipy.linalg.eigh(h)

    def unitary(self, t: float) -> np.ndarray:
        return (self.evecs * np.exp(-1j * self.evals * t)) @ self.evecs.conj().T

    def ket(self, psi: np.ndarray, t: float) -> np.ndarray:
        coeffs = self.evecs.conj().T @ psi
        return self.evecs @ (np.exp(-1j * self.evals * t) * coeffs)

    def density(self, rho: np.ndarray, t: float) -> np.ndarray:
        rho_e = self.evecs.conj().T @ rho @ self.evecs
        phases = np.exp(-1j * self.evals * t)
        return self.evecs @ (rho_e * np.outer(phases, phases.conj())) @ self.evecs.conj().T


def evolve(hamiltonian, state: np.ndarray, t: float, method: str = "auto") -> np.ndarray:
    """exp(-iHt) applied to a ket, or the unitary conjugation of a density matrix.

    ``method`` is 'auto' (eigendecomposition up to EIGH_DIM_LIMIT, Krylov
    above), 'eigh', or 'krylov'.
    """
    _check_hermitian(hamiltonian)
    dim = hamiltonian.shape[0]
    state = np.asarray(state, dtype=complex)
    if state.shape[0] != dim:
        raise ValueError(f"state dimension {state.shape[0]} != Hamiltonian {dim}")
    if method == "auto":
        method = "eigh" if dim <= EIGH_DIM_LIMIT else "krylov"
    if method == "eigh":
        prop = HermitianPropagator(hamiltonian)
        return prop.ket(state, t) if state.ndim == 1 else prop.density(state, t)
    if method != "krylov":
        raise ValueError(f"unknown evolution method {method!r}")
    matvec = hamiltonian.dot
    if state.ndim == 1:
        return _lanczos_expv(matvec, state, t)

    def apply_u(mat: np.ndarray) -> np.ndarray:
        return np.column_stack([_lanczos_expv(matvec, col, t) for col in mat.T])

    return apply_u(apply_u(state).conj().T)


def reduce_to_register(joint_state: np.ndarray, register_dim: int) -> np.ndarray:
    """Partial trace over the bath factor of a joint ket or density matrix."""
    joint_state = np.asarray(joint_state, dtype=complex)
    total = joint_state.shape[0]
    if total % register_dim:
        raise ValueError(
            f"joint dimension {total} does not factor through register {register_dim}"
        )
    bath_dim = total // register_dim
    if joint_state.ndim == 1:
        mat = joint_state.reshape(register_dim, bath_dim)
        return mat @ mat.conj().T
    if joint_state.shape != (total, total):
        raise ValueError(f"joint state must be a ket or square matrix")
    tensor = joint_state.reshape(register_dim, bath_dim, register_dim, bath_dim)
    return np.einsum("abcb->ac", tensor)


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    """Per-time metrics of the reduced register state against its initial value."""

    times: np.ndarray
    fidelity: np.ndarray
    purity: np.ndarray
    leakage: np.ndarray
    trace_distance: np.ndarray
    reduced_states: np.ndarray

    @property
    def final_reduced(self) -> np.ndarray:
        return self.reduced_states[-1]

    def coherence(self, row: int, col: int) -> np.ndarray:
        """One off-diagonal matrix element of the reduced state along the grid."""
        return self.reduced_states[:, row, col]

    def write_csv(self, path, comments: Sequence[str] = ()) -> None:
        with open(path, "w") as fh:
            for line in comments:
                fh.write(f"# {line}\n")
            fh.write("time,fidelity,purity,leakage,trace_distance\n")
            for i in range(len(self.times)):
                fh.write(
                    "%.17g,%.17g,%.17g,%.17g,%.17g\n"
                    % (
                        self.times[i],
                        self.fidelity[i],
                        self.purity[i],
                        self.leakage[i],
                        self.trace_distance[i],
                    )
                )


def time_grid(t_max: float, steps: int) -> np.ndarray:
    if t_max <= 0 or steps < 2:
        raise ValueError(f"need t_max > 0 and steps >= 2, got {t_max}, {steps}")
    return np.linspace(0.0, t_max, steps)


def run_trajectory(
    setup: SimulationSetup,
    rho_register: np.ndarray,
    rho_bath: np.ndarray,
    times: np.ndarray,
    code: CodeSubspace | None = None,
) -> Trajectory:
    """Exact joint evolution of rho_register ⊗ rho_bath with per-step reduction."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1 or np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be one-dimensional and strictly increasing")
    rho_s0 = validate_density(rho_register, "register state")
    rho_b = validate_density(rho_bath, "bath state")
    d_s = setup.system.register_dim
    if rho_s0.shape[0] != d_s:
        raise ValueError(f"register state dimension {rho_s0.shape[0]} != {d_s}")
    if rho_b.shape[0] != setup.bath.dim:
        raise ValueError(f"bath state dimension {rho_b.shape[0]} != {setup.bath.dim}")

    prop = HermitianPropagator(setup.hamiltonian)
    joint0 = np.kron(rho_s0, rho_b)
    rho_e = prop.evecs.conj().T @ joint0 @ prop.evecs

    n_t = len(times)
    fid = np.empty(n_t)
    pur = np.empty(n_t)
    leak = np.empty(n_t)
    dist = np.empty(n_t)
    reduced = np.empty((n_t, d_s, d_s), dtype=complex)
    for i, t in enumerate(times):
        phases = np.exp(-1j * prop.evals * t)
        joint_t = prop.evecs @ (rho_e * np.outer(phases, phases.conj())) @ prop.evecs.conj().T
        rho_s = reduce_to_register(joint_t, d_s)
        reduced[i] = rho_s
        fid[i] = fidelity(rho_s0, rho_s)
        pur[i] = purity(rho_s)
        leak[i] = code.leakage(rho_s) if code is not None else np.nan
        dist[i] = trace_distance(rho_s, rho_s0)
    return Trajectory(
        times=times,
        fidelity=fid,
        purity=pur,
        leakage=leak,
        trace_distance=dist,
        reduced_states=reduced,
    )


# ---------------------------------------------------------------------------
# fixed-point checks


def liouvillian_fixed_point_check(
    code: CodeSubspace,
    setup: SimulationSetup,
    rho_register: np.ndarray,
    rho_bath: np.ndarray,
    times: np.ndarray,
) -> float:
    """Max trace distance of the reduced state from its initial value.

    Preconditions: the register state lives on the code, the coupling is
    replica-symmetric, and there is no replica-replica interaction.  Under
    those the exact reduced evolution is the identity, so the return value is
    pure integrator error.
    """
    if setup.system.replica_interaction is not None:
        raise ValueError("fixed-point check requires no replica interaction")
    if not setup.coupling.replica_symmetric:
        raise ValueError("fixed-point check requires replica-symmetric coupling")
    support = code.leakage(validate_density(rho_register, "register state"))
    if support > CODE_SUPPORT_TOL:
        raise ValueError(
            f"register state leaks {support:.3e} outside the code "
            f"(tolerance {CODE_SUPPORT_TOL})"
        )
    traj = run_trajectory(setup, rho_register, rho_bath, times, code=code)
    return float(traj.trace_distance.max())


def _coupling_is_dephasing_only(coupling: CouplingSpec) -> bool:
    for enabled, table in (
        (coupling.enable_absorption, coupling.absorption),
        (coupling.enable_counter_rotating, coupling.counter_rotating),
    ):
        if enabled and np.abs(table).max() > 0.0:
            return False
    return True


def dephasing_weight_space_check(
    setup: SimulationSetup,
    rho_register: np.ndarray,
    rho_bath: np.ndarray,
    times: np.ndarray,
) -> float:
    """Fixed-point deviation for a state supported on a single weight space.

    Requires a dephasing-only coupling (the Cartan family), replica symmetry,
    and no replica interaction; the register state must occupy one joint
    eigenspace of the collective Cartan generators.
    """
    if not _coupling_is_dephasing_only(setup.coupling):
        raise ValueError("weight-space check requires a dephasing-only coupling")
    if not setup.coupling.replica_symmetric:
        raise ValueError("weight-space check requires replica-symmetric coupling")
    if setup.system.replica_interaction is not None:
        raise ValueError("weight-space check requires no replica interaction")
    rho = validate_density(rho_register, "register state")
    weights = algebra.cartan_weight_table(setup.system.rank, setup.system.replicas)
    diag = np.real(np.diag(rho))
    support = np.nonzero(diag > 1e-12 * max(float(diag.max()), 1e-300))[0]
    ref = weights[:, support[0]]
    if np.abs(weights[:, support] - ref[:, None]).max() > 1e-9:
        raise ValueError("register state spreads over several weight spaces")
    traj = run_trajectory(setup, rho, rho_bath, times)
    return float(traj.trace_distance.max())


@dataclass(frozen=True)
class LogicalEvolutionResult:
    leakage_max: float
    unitarity_defect: float


def logical_evolution_check(
    code: CodeSubspace,
    setup: SimulationSetup,
    rho_register: np.ndarray,
    rho_bath: np.ndarray,
    times: np.ndarray,
) -> LogicalEvolutionResult:
    """Reduced dynamics against the closed-register prediction U(t) rho U(t)†.

    The replica interaction must commute with every collective generator (so
    it preserves the code); the reduced state is then predicted to rotate
    unitarily under the interaction alone, with no leakage.
    """
    hss = setup.system.replica_interaction
    if hss is None:
        hss = np.zeros((setup.system.register_dim,) * 2, dtype=complex)
    gens = algebra.collective_generators(setup.system.rank, setup.system.replicas)
    for g in gens.all_collective():
        worst = np.abs(algebra.commutator(hss, g)).max()
        if worst > SYMMETRY_COMMUTATOR_TOL:
            raise ValueError(
                f"replica interaction does not commute with the collective "
                f"generators (residual {worst:.3e})"
            )
    if not setup.coupling.replica_symmetric:
        raise ValueError("logical-evolution check requires replica-symmetric coupling")
    rho = validate_density(rho_register, "register state")
    support = code.leakage(rho)
    if support > CODE_SUPPORT_TOL:
        raise ValueError(
            f"register state leaks {support:.3e} outside the code "
            f"(tolerance {CODE_SUPPORT_TOL})"
        )
    traj = run_trajectory(setup, rho, rho_bath, times, code=code)
    closed = HermitianPropagator(hss)
    defect = 0.0
    for i, t in enumerate(traj.times):
        predicted = closed.density(rho, t)
        defect = max(defect, trace_distance(traj.reduced_states[i], predicted))
    return LogicalEvolutionResult(
        leakage_max=float(traj.leakage.max()), unitarity_defect=float(defect)
    )


@dataclass(frozen=True)
class SweepPoint:
    phase_scale: float
    max_infidelity: float
    max_leakage: float


def symmetry_breaking_sweep(
    code: CodeSubspace,
    setup: SimulationSetup,
    phase_scales: Sequence[float],
    rho_register: np.ndarray,
    rho_bath: np.ndarray,
    times: np.ndarray,
) -> list[SweepPoint]:
    """Fixed-point deviation as the replica-position phases are switched on.

    Each sweep value s installs site phases exp(i s j); s = 0 reproduces the
    replica-symmetric fixed point.
    """
    if len(phase_scales) == 0:
        raise ValueError("phase scale list must be non-empty")
    rho = validate_density(rho_register, "register state")
    points = []
    for scale in phase_scales:
        coupling = setup.coupling.with_site_phases(float(scale), setup.system.replicas)
        swept = SimulationSetup(system=setup.system, bath=setup.bath, coupling=coupling)
        traj = run_trajectory(swept, rho, rho_bath, times, code=code)
        points.append(
            SweepPoint(
                phase_scale=float(scale),
                max_infidelity=max(float(np.max(1.0 - traj.fidelity)), 0.0),
                max_leakage=max(float(traj.leakage.max()), 0.0),
            )
        )
    return points


def decoherence_time_estimate(times: np.ndarray, coherence: np.ndarray) -> float:
    """Exponential time constant of a decaying coherence magnitude.

    Least-squares fit of log|coherence| over the initial decay window (down
    to e^-2 of the starting magnitude).  Raises when the magnitude does not
    actually decay.
    """
    times = np.asarray(times, dtype=float)
    mags = np.abs(np.asarray(coherence))
    if times.shape != mags.shape or len(times) < 3:
        raise ValueError("need matching time/coherence arrays with >= 3 samples")
    start = mags[0]
    if start < 1e-300:
        raise ValueError("initial coherence magnitude is zero")
    below = np.nonzero(mags < start * np.exp(-2.0))[0]
    end = int(below[0]) + 1 if below.size else len(mags)
    window = slice(0, max(end, 3))
    logs = np.log(np.clip(mags[window], 1e-300, None))
    slope = np.polyfit(times[window], logs, 1)[0]
    drop = np.log(start) - logs.min()
    if slope >= 0.0 or drop < 0.1:
        raise ValueError("fit rejected: coherence magnitude does not decay")
    return float(-1.0 / slope)


# ---------------------------------------------------------------------------
# reference register states


def alternating_product_ket(replicas: int, local_dim: int = 2) -> np.ndarray:
    """Product ket cycling through the local levels, |0101...> for qubits."""
    return algebra.basis_ket([i % local_dim for i in range(replicas)], local_dim)


def uniform_superposition_ket(replicas: int, local_dim: int = 2) -> np.ndarray:
    """Equal-amplitude superposition of every basis ket."""
    dim = local_dim**replicas
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)


def ket_density(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())
