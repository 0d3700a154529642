"""Local and collective sl(r+1) generators on replica tensor-product spaces.

The register is N replicas of a (r+1)-level system.  Local generators come in
Chevalley triples (lowering, raising, Cartan) in the defining representation;
collective generators are sums of the same local generator over all replica
slots.  Everything is an explicit complex matrix.

Conventions (fixed once, used by every other module):

* Basis kets are labelled ``|b_0 b_1 ... b_{N-1}>`` with site 0 the leftmost
  (most significant) tensor factor.
* Local levels are labelled 0..r with weight increasing with the label, and
  the *matrix* index runs from the highest level down: index ``m`` is level
  ``r - m``.  For a qubit the basis order is (|1>, |0>), so
  ``sigma^+ = [[0, 1], [0, 0]]`` and ``sigma^z = diag(1/2, -1/2)``.
* Cartan generators carry the physics normalization with half-integer
  entries: for rank 1 the triple is exactly (sigma^-, sigma^+, sigma^z) with
  ``[sigma^+, sigma^-] = 2 sigma^z`` and ``[sigma^z, sigma^±] = ±sigma^±``.

Assembly is Kronecker-sparse; results are densified only below
``DENSE_DIM_LIMIT``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp

# Largest total dimension that operations will densify.  Kronecker assembly
# itself stays sparse, so this only caps matrices handed back to the caller.
DENSE_DIM_LIMIT = 4096


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def cartan_matrix(rank: int) -> np.ndarray:
    """Cartan matrix of sl(rank+1): 2 on the diagonal, -1 on the off-diagonals."""
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    a = 2 * np.eye(rank, dtype=int)
    for i in range(rank - 1):
        a[i, i + 1] = a[i + 1, i] = -1
    return a


@dataclass(frozen=True)
class GeneratorSet:
    """Chevalley triples of sl(rank+1) plus their collective N-replica sums.

    ``lowering[a]`` destroys one excitation of type a+1, ``raising[a]`` is its
    conjugate transpose, ``cartan[a]`` is diagonal with entries ±1/2.  The
    collective lists hold the corresponding sums over replica slots on the
    full register space of dimension (rank+1)**replicas.
    """

    rank: int
    replicas: int
    lowering: tuple[np.ndarray, ...]
    raising: tuple[np.ndarray, ...]
    cartan: tuple[np.ndarray, ...]
    collective_lowering: tuple[np.ndarray, ...]
    collective_raising: tuple[np.ndarray, ...]
    collective_cartan: tuple[np.ndarray, ...]

    @property
    def local_dim(self) -> int:
        return self.rank + 1

    @property
    def register_dim(self) -> int:
        return self.local_dim**self.replicas

    def all_local(self) -> Iterator[np.ndarray]:
        yield from self.lowering
        yield from self.raising
        yield from self.cartan

    def all_collective(self) -> Iterator[np.ndarray]:
        """All 3*rank collective generators (the operators a code must kill)."""
        yield from self.collective_lowering
        yield from self.collective_raising
        yield from self.collective_cartan


def _local_triples(rank: int) -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    d = rank + 1
    lowering, raising, cartan = [], [], []
    for alpha in range(1, rank + 1):
        hi = d - 1 - alpha  # matrix index of level alpha
        lo = d - alpha      # matrix index of level alpha - 1
        f = np.zeros((d, d), dtype=complex)
        f[hi, lo] = 1.0
        h = np.zeros((d, d), dtype=complex)
        h[hi, hi] = 0.5
        h[lo, lo] = -0.5
        raising.append(_readonly(f))
        lowering.append(_readonly(f.conj().T.copy()))
        cartan.append(_readonly(h))
    return lowering, raising, cartan


def chevalley_basis(rank: int) -> GeneratorSet:
    """Defining (rank+1)-dimensional representation of sl(rank+1), one replica.

    For rank 1 this returns exactly (sigma^-, sigma^+, sigma^z) in the basis
    order (|1>, |0>).
    """
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    lowering, raising, cartan = _local_triples(rank)
    return GeneratorSet(
        rank=rank,
        replicas=1,
        lowering=tuple(lowering),
        raising=tuple(raising),
        cartan=tuple(cartan),
        collective_lowering=tuple(lowering),
        collective_raising=tuple(raising),
        collective_cartan=tuple(cartan),
    )


def collective_generators(rank: int, replicas: int) -> GeneratorSet:
    """Local Chevalley triples together with their collective embeddings."""
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    lowering, raising, cartan = _local_triples(rank)
    coll = [
        tuple(_readonly(collective(op, replicas)) for op in family)
        for family in (lowering, raising, cartan)
    ]
    return GeneratorSet(
        rank=rank,
        replicas=replicas,
        lowering=tuple(lowering),
        raising=tuple(raising),
        cartan=tuple(cartan),
        collective_lowering=coll[0],
        collective_raising=coll[1],
        collective_cartan=coll[2],
    )


def embed_local(op: np.ndarray, site: int, replicas: int, *, sparse: bool = False):
    """identity ⊗ ... ⊗ op ⊗ ... ⊗ identity with ``op`` at tensor slot ``site``.

    ``sparse=True`` returns the CSR assembly unchanged (no dimension cap);
    otherwise the result is densified and must fit under DENSE_DIM_LIMIT.
    """
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"local operator must be square, got shape {op.shape}")
    if not 0 <= site < replicas:
        raise ValueError(f"site {site} out of range for {replicas} replicas")
    d = op.shape[0]
    left = sp.identity(d**site, format="csr", dtype=complex)
    right = sp.identity(d ** (replicas - 1 - site), format="csr", dtype=complex)
    out = sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")
    if sparse:
        return out
    if out.shape[0] > DENSE_DIM_LIMIT:
        raise ValueError(
            f"dense embedding of dimension {out.shape[0]} exceeds limit "
            f"{DENSE_DIM_LIMIT}; pass sparse=True"
        )
    return out.toarray()


def collective(op: np.ndarray, replicas: int, *, sparse: bool = False):
    """Sum of ``op`` embedded at every replica slot."""
    acc = embed_local(op, 0, replicas, sparse=True)
    for site in range(1, replicas):
        acc = acc + embed_local(op, site, replicas, sparse=True)
    if sparse:
        return acc.tocsr()
    if acc.shape[0] > DENSE_DIM_LIMIT:
        raise ValueError(
            f"dense collective operator of dimension {acc.shape[0]} exceeds "
            f"limit {DENSE_DIM_LIMIT}; pass sparse=True"
        )
    return acc.toarray()


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """AB - BA."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def ket_index(labels: Sequence[int], dim: int) -> int:
    """Matrix index of the basis ket |b_0 b_1 ... b_{N-1}> with levels b_i.

    Site 0 is most significant; level b maps to matrix digit dim-1-b, so for
    qubits |1...> sorts before |0...>.
    """
    idx = 0
    for b in labels:
        if not 0 <= b < dim:
            raise ValueError(f"level label {b} out of range for local dim {dim}")
        idx = idx * dim + (dim - 1 - b)
    return idx


def basis_ket(labels: Sequence[int], dim: int) -> np.ndarray:
    """Unit vector for the product ket |b_0 b_1 ... b_{N-1}>."""
    v = np.zeros(dim ** len(labels), dtype=complex)
    v[ket_index(labels, dim)] = 1.0
    return v


def collective_diagonal(local_diag: np.ndarray, replicas: int) -> np.ndarray:
    """Diagonal of the collective sum of a diagonal local operator."""
    local_diag = np.asarray(local_diag)
    d = local_diag.shape[0]
    out = np.zeros(d**replicas, dtype=local_diag.dtype)
    for site in range(replicas):
        out += np.tile(np.repeat(local_diag, d ** (replicas - 1 - site)), d**site)
    return out


def cartan_weight_table(rank: int, replicas: int) -> np.ndarray:
    """Array (rank, d**replicas) of collective Cartan eigenvalues per basis ket.

    All Cartan generators are diagonal in the product basis, so the joint
    weight of each basis ket is exact (half-integers).
    """
    _, _, cartan = _local_triples(rank)
    return np.array(
        [collective_diagonal(np.real(np.diag(h)), replicas) for h in cartan]
    )


def site_permutation(perm: Sequence[int], dim: int) -> np.ndarray:
    """Permutation operator sending |b_0 ... b_{N-1}> to |b_{perm[0]} ... b_{perm[N-1]}>."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {perm}")
    total = dim**n
    idx = np.arange(total)
    digits = [(idx // dim ** (n - 1 - j)) % dim for j in range(n)]
    new_idx = sum(digits[perm[j]] * dim ** (n - 1 - j) for j in range(n))
    p = np.zeros((total, total), dtype=complex)
    p[new_idx, idx] = 1.0
    return p


def chevalley_residual(gens: GeneratorSet, *, collective_ops: bool = False) -> float:
    """Max entrywise violation of the Chevalley relation family.

    Checked relations, with A the Cartan matrix (halved-Cartan convention):
    [h_a, f_b] = A_ab/2 f_b,  [h_a, e_b] = -A_ab/2 e_b,  [f_a, e_b] = 2 d_ab h_a,
    [h_a, h_b] = 0, and f_a = e_a^dagger.
    """
    if collective_ops:
        e, f, h = gens.collective_lowering, gens.collective_raising, gens.collective_cartan
    else:
        e, f, h = gens.lowering, gens.raising, gens.cartan
    a = cartan_matrix(gens.rank)
    worst = 0.0
    for i in range(gens.rank):
        worst = max(worst, float(np.abs(f[i] - adjoint(e[i])).max()))
        for j in range(gens.rank):
            worst = max(
                worst,
                float(np.abs(commutator(h[i], f[j]) - 0.5 * a[i, j] * f[j]).max()),
                float(np.abs(commutator(h[i], e[j]) + 0.5 * a[i, j] * e[j]).max()),
                float(np.abs(commutator(h[i], h[j])).max()),
                float(
                    np.abs(
                        commutator(f[i], e[j]) - (2.0 * h[i] if i == j else 0.0)
                    ).max()
                ),
            )
    return worst
