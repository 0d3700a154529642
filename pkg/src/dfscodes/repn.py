"""Exact multiplicity counting for tensor powers of the defining representation.

Everything here is integer combinatorics: Clebsch-Gordan series of N spin-1/2
factors, trivial-irrep (singlet) multiplicities of sl(r+1) tensor powers,
standard-tableau counts, and the encoding-efficiency asymptotics derived from
them.  Multiplicities are Python big integers throughout; floats appear only
in the final efficiency record.

Two deliberately independent routes exist for the central number n(N): a
lattice walk over reduced diagram shapes (``singlet_multiplicity``) and the
hook-length/Catalan closed forms.  Tests hold them against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence


@dataclass(frozen=True, order=True)
class IrrepLabelSl2:
    """sl(2) irrep labelled by twice the total angular momentum."""

    two_j: int

    def __post_init__(self):
        if self.two_j < 0:
            raise ValueError(f"two_j must be >= 0, got {self.two_j}")

    @property
    def dimension(self) -> int:
        return self.two_j + 1


@dataclass(frozen=True, order=True)
class YoungDiagram:
    """Partition shape; rows weakly decreasing, empty tuple = trivial shape."""

    rows: tuple[int, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        if any(r <= 0 for r in rows):
            raise ValueError(f"rows must be positive, got {rows}")
        if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
            raise ValueError(f"rows must be weakly decreasing, got {rows}")

    @property
    def box_count(self) -> int:
        return sum(self.rows)

    def conjugate(self) -> "YoungDiagram":
        if not self.rows:
            return self
        cols = tuple(
            sum(1 for r in self.rows if r > j) for j in range(self.rows[0])
        )
        return YoungDiagram(cols)


def rectangle(rows: int, cols: int) -> YoungDiagram:
    return YoungDiagram((cols,) * rows)


@dataclass(frozen=True)
class Decomposition:
    """Multiplicity table of a tensor-power decomposition.

    Keys are IrrepLabelSl2 or YoungDiagram (reduced shape, <= rank rows);
    ``local_dim`` fixes the sl(d) the labels refer to.
    """

    local_dim: int
    entries: dict

    def multiplicity(self, label) -> int:
        return self.entries.get(label, 0)

    def irrep_dimension(self, label) -> int:
        if isinstance(label, IrrepLabelSl2):
            return label.dimension
        return weyl_dimension(label, self.local_dim)

    def dimension_sum(self) -> int:
        """Sum of multiplicity * irrep dimension, exact."""
        return sum(n * self.irrep_dimension(lab) for lab, n in self.entries.items())

    def sorted_entries(self) -> list[tuple[object, int]]:
        """Entries in descending irrep dimension (ties by label), reproducibly."""
        return sorted(
            self.entries.items(), key=lambda kv: (-self.irrep_dimension(kv[0]), kv[0])
        )


def cg_sl2(replicas: int) -> Decomposition:
    """Clebsch-Gordan series of N spin-1/2 factors by the add-one-spin recursion.

    Returns the multiplicity of each total angular momentum j in the N-fold
    tensor power of the 2-dimensional representation.
    """
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    mult: dict[int, int] = {1: 1}  # two_j -> multiplicity after one spin
    for _ in range(replicas - 1):
        nxt: dict[int, int] = {}
        for two_j, n in mult.items():
            for two_j_new in (two_j + 1, two_j - 1):
                if two_j_new >= 0:
                    nxt[two_j_new] = nxt.get(two_j_new, 0) + n
        mult = nxt
    return Decomposition(
        local_dim=2, entries={IrrepLabelSl2(tj): n for tj, n in mult.items()}
    )


def _add_box_reduced(shape: tuple[int, ...], local_dim: int) -> Iterator[tuple[int, ...]]:
    """Legal one-box additions to a reduced shape, reducing full columns away.

    Reduced shapes have fewer than ``local_dim`` rows; completing row
    local_dim-1 removes one full column (the determinant factor is trivial
    for sl(d)).
    """
    for row in range(local_dim):
        cur = shape[row] if row < len(shape) else 0
        if row > 0:
            above = shape[row - 1] if row - 1 < len(shape) else 0
            if above <= cur:
                continue
        new = list(shape) + [0] * (row + 1 - len(shape))
        new[row] += 1
        if len(new) == local_dim:
            new = [r - 1 for r in new]
        while new and new[-1] == 0:
            new.pop()
        yield tuple(new)


def cg_defining(replicas: int, rank: int) -> Decomposition:
    """Decomposition of the N-th tensor power of the defining rep of sl(rank+1).

    Walks Young diagrams one box per factor, working modulo full columns, so
    the labels are reduced shapes with at most ``rank`` rows.
    """
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    d = rank + 1
    counts: dict[tuple[int, ...], int] = {(): 1}
    for _ in range(replicas):
        nxt: dict[tuple[int, ...], int] = {}
        for shape, n in counts.items():
            for new in _add_box_reduced(shape, d):
                nxt[new] = nxt.get(new, 0) + n
        counts = nxt
    return Decomposition(
        local_dim=d,
        entries={YoungDiagram(shape): n for shape, n in counts.items()},
    )


def singlet_multiplicity(replicas: int, rank: int) -> int:
    """Multiplicity of the trivial sl(rank+1) irrep in the N-th defining power.

    Counts lattice walks over reduced diagrams that return to the empty
    shape; zero unless N is a multiple of rank+1.
    """
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    d = rank + 1
    counts: dict[tuple[int, ...], int] = {(): 1}
    for _ in range(replicas):
        nxt: dict[tuple[int, ...], int] = {}
        for shape, n in counts.items():
            for new in _add_box_reduced(shape, d):
                nxt[new] = nxt.get(new, 0) + n
        counts = nxt
    return counts.get((), 0)


def catalan_singlets(replicas: int) -> int:
    """Closed form N! / ((N/2)! (N/2 + 1)!) for the qubit singlet count."""
    if replicas < 2 or replicas % 2:
        raise ValueError(f"replicas must be even and >= 2, got {replicas}")
    half = replicas // 2
    return math.factorial(replicas) // (math.factorial(half) * math.factorial(half + 1))


def weyl_dimension(shape: YoungDiagram | Sequence[int], local_dim: int) -> int:
    """Dimension of the sl(local_dim) irrep with highest weight ``shape``.

    Weyl dimension formula for GL(d) restricted to partitions with at most d
    rows; exact integer.
    """
    rows = shape.rows if isinstance(shape, YoungDiagram) else tuple(shape)
    if len(rows) > local_dim:
        raise ValueError(f"shape {rows} has more than {local_dim} rows")
    lam = list(rows) + [0] * (local_dim - len(rows))
    dim = Fraction(1)
    for i in range(local_dim):
        for j in range(i + 1, local_dim):
            dim *= Fraction(lam[i] - lam[j] + j - i, j - i)
    assert dim.denominator == 1
    return int(dim)


def hook_length_count(shape: YoungDiagram | Sequence[int]) -> int:
    """Number of standard Young tableaux of ``shape`` via the hook-length formula."""
    if not isinstance(shape, YoungDiagram):
        shape = YoungDiagram(tuple(shape))
    if not shape.rows:
        return 1
    conj = shape.conjugate().rows
    hooks = 1
    for i, row_len in enumerate(shape.rows):
        for j in range(row_len):
            hooks *= (row_len - j) + (conj[j] - i) - 1
    return math.factorial(shape.box_count) // hooks


ENUMERATION_BOX_LIMIT = 12


def enumerate_syt(shape: YoungDiagram | Sequence[int]) -> int:
    """Count standard fillings by exhaustive backtracking (oracle, <= 12 boxes)."""
    if not isinstance(shape, YoungDiagram):
        shape = YoungDiagram(tuple(shape))
    n = shape.box_count
    if n > ENUMERATION_BOX_LIMIT:
        raise ValueError(
            f"enumeration guard: {n} boxes exceeds limit {ENUMERATION_BOX_LIMIT}"
        )
    rows = shape.rows
    filled = [0] * len(rows)

    def place(remaining: int) -> int:
        if remaining == 0:
            return 1
        total = 0
        for i in range(len(rows)):
            if filled[i] < rows[i] and (i == 0 or filled[i - 1] > filled[i]):
                filled[i] += 1
                total += place(remaining - 1)
                filled[i] -= 1
        return total

    return place(n)


def exact_log2(n: int) -> float:
    """log2 of a big integer via bit length plus mantissa correction."""
    if n <= 0:
        raise ValueError(f"log2 requires a positive integer, got {n}")
    shift = n.bit_length() - 53
    if shift <= 0:
        return math.log2(n)
    return math.log2(n >> shift) + shift


@dataclass(frozen=True)
class EncodingEfficiency:
    """Code-size figures for one (N, rank) pair."""

    log2_n: float
    per_replica: float
    hilbert_fraction: float


def encoding_efficiency(replicas: int, rank: int) -> EncodingEfficiency:
    """log2 n(N), qubits encoded per replica, and the occupied Hilbert fraction."""
    n = singlet_multiplicity(replicas, rank)
    if n == 0:
        raise ValueError(
            f"no singlets for replicas={replicas}, rank={rank}: efficiency undefined"
        )
    log2_n = exact_log2(n)
    log2_fraction = log2_n - replicas * math.log2(rank + 1)
    return EncodingEfficiency(
        log2_n=log2_n,
        per_replica=log2_n / replicas,
        hilbert_fraction=2.0**log2_fraction,
    )
