"""Singlet code subspaces: construction, reference vectors, encode/decode.

The code for N replicas of a (rank+1)-level system is the joint null space of
every collective Chevalley generator.  It is computed numerically as the SVD
kernel of the stacked generator matrix and cross-checked against the exact
algebraic multiplicity from :mod:`dfscodes.repn`; a mismatch aborts rather
than returning a wrong-sized code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
import scipy.linalg

from . import algebra, repn

# Relative singular-value cutoff for the numerical kernel.
DEFAULT_NULL_RCOND = 1e-9

# Amplitudes below this (relative to the vector max) do not count as support
# when phase-fixing and ordering basis vectors.
SUPPORT_RCOND = 1e-8


class NullSpaceMismatchError(RuntimeError):
    """Numerical kernel dimension disagrees with the exact multiplicity."""


@dataclass(frozen=True)
class CodeSubspace:
    """Orthonormal basis of the collective-generator null space.

    ``basis`` holds one ket per row, shape (n_codewords, local_dim**replicas).
    ``null_tolerance`` is the absolute singular-value cutoff that was used.
    """

    replicas: int
    rank: int
    basis: np.ndarray
    null_tolerance: float

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        gram = basis @ basis.conj().T
        if np.abs(gram - np.eye(len(basis))).max() > 1e-12:
            raise ValueError("code basis is not orthonormal to 1e-12")

    @property
    def dim(self) -> int:
        """Number of codewords."""
        return self.basis.shape[0]

    @property
    def physical_dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis.conj().T @ self.basis

    def encode(self, amplitudes: np.ndarray) -> np.ndarray:
        """Physical ket sum_j amplitudes[j] * basis[j] for a unit-norm logical vector."""
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != (self.dim,):
            raise ValueError(
                f"logical vector must have length {self.dim}, got shape {amplitudes.shape}"
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"logical vector must be unit norm, got {norm!r}")
        return amplitudes @ self.basis

    def decode(self, ket: np.ndarray) -> tuple[np.ndarray, float]:
        """Logical amplitudes basis^dagger ket and squared out-of-code norm."""
        ket = np.asarray(ket, dtype=complex)
        if ket.shape != (self.physical_dim,):
            raise ValueError(
                f"physical ket must have length {self.physical_dim}, got {ket.shape}"
            )
        amplitudes = self.basis.conj() @ ket
        leakage = float(np.linalg.norm(ket) ** 2 - np.linalg.norm(amplitudes) ** 2)
        return amplitudes, max(leakage, 0.0)

    def leakage(self, state: np.ndarray) -> float:
        """Weight outside the code: ||(1-P)ket||^2 for kets, 1 - tr(P rho) for states."""
        state = np.asarray(state, dtype=complex)
        if state.ndim == 1:
            return self.decode(state)[1]
        overlap = self.basis.conj() @ state @ self.basis.T
        return max(float(1.0 - np.real(np.trace(overlap))), 0.0)


def _fix_phase_and_order(kets: np.ndarray) -> np.ndarray:
    """Deterministic gauge: first significant amplitude real positive, then a
    stable sort by that first-support index."""
    fixed = []
    for v in kets:
        cutoff = SUPPORT_RCOND * np.abs(v).max()
        support = np.nonzero(np.abs(v) > cutoff)[0]
        first = int(support[0])
        phase = v[first] / abs(v[first])
        fixed.append((first, v / phase))
    order = sorted(range(len(fixed)), key=lambda i: fixed[i][0])
    return np.array([fixed[i][1] for i in order])


def singlet_basis(
    replicas: int, rank: int, tol: float = DEFAULT_NULL_RCOND
) -> CodeSubspace:
    """Orthonormal basis of the joint null space of all collective generators.

    The kernel comes from one SVD of the 3*rank stacked generator matrices;
    singular values below tol * s_max count as zero.  The kernel dimension
    must match repn.singlet_multiplicity exactly.
    """
    expected = repn.singlet_multiplicity(replicas, rank)
    if expected == 0:
        reason = "N odd" if rank == 1 else f"N not a multiple of {rank + 1}"
        raise ValueError(f"no singlets: {reason} (N={replicas}, rank={rank})")
    dim = (rank + 1) ** replicas
    if dim > algebra.DENSE_DIM_LIMIT:
        raise ValueError(
            f"register dimension {dim} exceeds dense limit {algebra.DENSE_DIM_LIMIT}"
        )
    gens = algebra.collective_generators(rank, replicas)
    stacked = np.vstack(list(gens.all_collective()))
    # economy SVD: the stack has >= dim rows, so vh still spans the full row
    # space and the kernel rows survive
    _, svals, vh = scipy.linalg.svd(stacked, full_matrices=False)
    cutoff = tol * svals[0]
    kernel_dim = dim - int(np.count_nonzero(svals > cutoff))
    if kernel_dim != expected:
        raise NullSpaceMismatchError(
            f"numerical kernel dimension {kernel_dim} != algebraic multiplicity "
            f"{expected} for N={replicas}, rank={rank} (cutoff {cutoff:.3e})"
        )
    kets = vh[dim - kernel_dim :].conj()
    code = CodeSubspace(
        replicas=replicas,
        rank=rank,
        basis=_fix_phase_and_order(kets),
        null_tolerance=float(cutoff),
    )
    residual = annihilation_residual(code, gens)
    if residual > 10.0 * cutoff:
        raise NullSpaceMismatchError(
            f"annihilation residual {residual:.3e} exceeds 10 x cutoff {cutoff:.3e}"
        )
    return code


def annihilation_residual(
    code: CodeSubspace, gens: algebra.GeneratorSet | None = None
) -> float:
    """Max over codewords and collective generators of ||G v||."""
    if gens is None:
        gens = algebra.collective_generators(code.rank, code.replicas)
    return max(
        float(np.linalg.norm(g @ v)) for g in gens.all_collective() for v in code.basis
    )


def _parity(perm: tuple[int, ...]) -> int:
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def antisymmetric_singlet(rank: int) -> np.ndarray:
    """Normalized fully antisymmetric ket over rank+1 replicas of the d levels.

    The alternating sum over all placements of the d distinct levels; the
    unique singlet when N = rank+1 (Slater-determinant construction).
    """
    d = rank + 1
    ket = np.zeros(d**d, dtype=complex)
    for perm in permutations(range(d)):
        ket[algebra.ket_index(perm, d)] = _parity(perm)
    return ket / math.sqrt(math.factorial(d))


def c4_reference_basis() -> tuple[np.ndarray, np.ndarray]:
    """Known non-orthogonal pair spanning the two-qubit-register code at N=4.

    psi_1 = (|1001> - |0101> + |0110> - |1010>)/2 and
    psi_2 = (|1001> - |0011> + |0110> - |1100>)/2; their overlap is 1/2.
    """
    psi_1 = np.zeros(16, dtype=complex)
    psi_2 = np.zeros(16, dtype=complex)
    for labels, amp in [((1, 0, 0, 1), 0.5), ((0, 1, 0, 1), -0.5),
                        ((0, 1, 1, 0), 0.5), ((1, 0, 1, 0), -0.5)]:
        psi_1[algebra.ket_index(labels, 2)] = amp
    for labels, amp in [((1, 0, 0, 1), 0.5), ((0, 0, 1, 1), -0.5),
                        ((0, 1, 1, 0), 0.5), ((1, 1, 0, 0), -0.5)]:
        psi_2[algebra.ket_index(labels, 2)] = amp
    return psi_1, psi_2


def orthonormalize(kets, tol: float = 1e-10) -> np.ndarray:
    """Stabilized Gram-Schmidt in input order; rejects dependent inputs.

    Two projection passes per vector keep orthogonality near roundoff even
    for nearly parallel inputs above the tolerance.
    """
    kets = [np.asarray(v, dtype=complex) for v in kets]
    out: list[np.ndarray] = []
    for k, v in enumerate(kets):
        original_norm = np.linalg.norm(v)
        if original_norm == 0.0:
            raise ValueError(f"input vector {k} is zero")
        w = v.copy()
        for _ in range(2):
            for u in out:
                w = w - (u.conj() @ w) * u
        norm = np.linalg.norm(w)
        if norm < tol * original_norm:
            raise ValueError(
                f"input vector {k} is linearly dependent on its predecessors "
                f"(residual norm {norm:.3e})"
            )
        out.append(w / norm)
    return np.array(out)


def principal_angles(span_a: np.ndarray, span_b: np.ndarray) -> np.ndarray:
    """Principal angles between the row-spans of two sets of kets.

    Cosines come from the cross-Gram singular values, sines from the
    projection defect; combining them through arctan2 keeps small angles
    accurate to machine precision instead of the sqrt(eps) arccos floor.
    """
    qa = orthonormalize(np.atleast_2d(span_a))
    qb = orthonormalize(np.atleast_2d(span_b))
    count = min(qa.shape[0], qb.shape[0])
    cosines = np.clip(scipy.linalg.svdvals(qa.conj() @ qb.T), 0.0, 1.0)[:count]
    defect = qb - (qb @ qa.conj().T) @ qa
    sines = np.clip(np.sort(scipy.linalg.svdvals(defect)), 0.0, 1.0)[:count]
    return np.arctan2(sines, cosines)


def random_code_ket(code: CodeSubspace, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit ket supported on the code."""
    z = rng.normal(size=code.dim) + 1j * rng.normal(size=code.dim)
    return code.encode(z / np.linalg.norm(z))


def random_code_density(code: CodeSubspace, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank mixed state supported exactly on the code."""
    m = rng.normal(size=(code.dim, code.dim)) + 1j * rng.normal(size=(code.dim, code.dim))
    rho_logical = m @ m.conj().T
    rho_logical /= np.trace(rho_logical).real
    return code.basis.T @ rho_logical @ code.basis.conj()
