import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfscodes import repn
from dfscodes.repn import IrrepLabelSl2, YoungDiagram


@st.composite
def partitions(draw, max_boxes=9):
    remaining = draw(st.integers(1, max_boxes))
    width = remaining
    rows = []
    while remaining > 0:
        row = draw(st.integers(1, min(width, remaining)))
        rows.append(row)
        width = row
        remaining -= row
    return tuple(rows)


# -- sl(2) Clebsch-Gordan -----------------------------------------------------


def test_cg_sl2_two_spins():
    dec = repn.cg_sl2(2)
    assert dec.multiplicity(IrrepLabelSl2(2)) == 1
    assert dec.multiplicity(IrrepLabelSl2(0)) == 1


def test_cg_sl2_four_spins():
    dec = repn.cg_sl2(4)
    assert {lbl.two_j: m for lbl, m in dec.entries.items()} == {4: 1, 2: 3, 0: 2}


def test_cg_sl2_six_spins():
    dec = repn.cg_sl2(6)
    assert {lbl.two_j: m for lbl, m in dec.entries.items()} == {6: 1, 4: 5, 2: 9, 0: 5}


@pytest.mark.parametrize("n", range(1, 21))
def test_cg_sl2_dimension_sum_rule(n):
    assert repn.cg_sl2(n).dimension_sum() == 2**n


@pytest.mark.parametrize("n", range(1, 13))
def test_cg_sl2_singlet_entry_matches_multiplicity(n):
    dec = repn.cg_sl2(n)
    assert dec.multiplicity(IrrepLabelSl2(0)) == repn.singlet_multiplicity(n, 1)


def test_cg_sl2_entries_sorted_descending_dimension():
    entries = repn.cg_sl2(6).sorted_entries()
    dims = [lbl.dimension for lbl, _ in entries]
    assert dims == sorted(dims, reverse=True)


# -- general-rank decomposition ----------------------------------------------


@pytest.mark.parametrize("rank", [1, 2, 3])
@pytest.mark.parametrize("n", range(1, 13))
def test_cg_defining_dimension_sum_rule(rank, n):
    assert repn.cg_defining(n, rank).dimension_sum() == (rank + 1) ** n


def test_cg_defining_matches_cg_sl2_for_qubits():
    # a reduced one-row shape with m boxes is the spin-m/2 representation
    for n in range(1, 11):
        by_diagram = {
            (d.rows[0] if d.rows else 0): m
            for d, m in repn.cg_defining(n, 1).entries.items()
        }
        by_spin = {lbl.two_j: m for lbl, m in repn.cg_sl2(n).entries.items()}
        assert by_diagram == by_spin


# -- singlet counting ----------------------------------------------------------


def test_small_replica_multiplicity_anchors():
    assert repn.singlet_multiplicity(2, 1) == 1
    assert repn.singlet_multiplicity(4, 1) == 2
    assert repn.singlet_multiplicity(6, 1) == 5


def test_singlet_multiplicity_zero_off_lattice():
    assert repn.singlet_multiplicity(3, 1) == 0
    assert repn.singlet_multiplicity(5, 1) == 0
    assert repn.singlet_multiplicity(4, 2) == 0
    assert repn.singlet_multiplicity(7, 3) == 0


@pytest.mark.parametrize("n", range(2, 61, 2))
def test_singlet_multiplicity_equals_catalan(n):
    assert repn.singlet_multiplicity(n, 1) == repn.catalan_singlets(n)


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_singlet_multiplicity_equals_rectangle_hooks(rank):
    d = rank + 1
    for n in range(d, 13, d):
        rect = repn.rectangle(d, n // d)
        assert repn.singlet_multiplicity(n, rank) == repn.hook_length_count(rect)


def test_catalan_rejects_odd():
    with pytest.raises(ValueError):
        repn.catalan_singlets(5)


def test_known_singlet_counts():
    assert repn.singlet_multiplicity(8, 1) == 14
    assert repn.singlet_multiplicity(9, 2) == 42
    # C_30, exact
    assert repn.singlet_multiplicity(60, 1) == 3814986502092304


# -- hook lengths and tableaux --------------------------------------------------


def test_hook_length_small_shapes():
    assert repn.hook_length_count((1,)) == 1
    assert repn.hook_length_count((2, 2)) == 2
    assert repn.hook_length_count((2, 2, 2)) == 5
    assert repn.hook_length_count((3, 2, 1)) == 16


def test_enumerate_syt_small_shapes():
    assert repn.enumerate_syt((2, 2)) == 2
    assert repn.enumerate_syt((2, 2, 2)) == 5
    assert repn.enumerate_syt((3, 2, 1)) == 16


def test_enumerate_syt_box_limit():
    with pytest.raises(ValueError):
        repn.enumerate_syt((7, 6))


@given(partitions())
@settings(max_examples=80, deadline=None)
def test_hook_length_matches_enumeration(shape):
    assert repn.hook_length_count(shape) == repn.enumerate_syt(shape)


@given(partitions())
@settings(max_examples=80, deadline=None)
def test_conjugate_preserves_tableau_count(shape):
    diagram = YoungDiagram(shape)
    conj = diagram.conjugate()
    assert conj.conjugate() == diagram
    assert repn.hook_length_count(diagram) == repn.hook_length_count(conj)


def test_young_diagram_validation():
    with pytest.raises(ValueError):
        YoungDiagram((1, 2))
    with pytest.raises(ValueError):
        YoungDiagram((2, 0))


def test_weyl_dimension_basics():
    assert repn.weyl_dimension((1,), 2) == 2  # defining rep of sl(2)
    assert repn.weyl_dimension((2,), 2) == 3  # triplet
    assert repn.weyl_dimension((1,), 3) == 3
    assert repn.weyl_dimension((1, 1), 3) == 3  # antisymmetric square
    assert repn.weyl_dimension((2, 1), 3) == 8  # adjoint of sl(3)
    assert repn.weyl_dimension((), 4) == 1


# -- efficiency ------------------------------------------------------------------


def test_exact_log2_on_huge_integers():
    assert repn.exact_log2(2**100) == 100.0
    n = repn.singlet_multiplicity(60, 1)
    assert repn.exact_log2(n) == pytest.approx(math.log2(n), abs=1e-12)


def test_encoding_efficiency_n4():
    eff = repn.encoding_efficiency(4, 1)
    assert eff.log2_n == pytest.approx(1.0)
    assert eff.per_replica == pytest.approx(0.25)
    assert eff.hilbert_fraction == pytest.approx(2 / 16)


def test_encoding_efficiency_rejects_empty_code():
    with pytest.raises(ValueError):
        repn.encoding_efficiency(5, 1)


@pytest.mark.parametrize("n", range(20, 201, 2))
def test_asymptotic_rate(n):
    # the per-replica rate approaches 1 with a -1.5 log2(N) correction
    eff = repn.encoding_efficiency(n, 1)
    assert abs(eff.log2_n - (n - 1.5 * math.log2(n))) < 1.0
