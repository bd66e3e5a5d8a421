import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdouble.group_core import (
    FiniteGroup,
    GroupAxiomError,
    GroupSyntaxError,
    builtin_group,
    cyclic_group,
    dihedral_group,
    format_group,
    is_isomorphic,
    load_group,
    parse_group,
    quaternion_group,
    symmetric_group,
)

ALL = [cyclic_group(2), cyclic_group(5), symmetric_group(3), dihedral_group(4), quaternion_group(),
       symmetric_group(4)]


def test_builtin_catalog():
    z2 = builtin_group("Zn", 2)
    assert z2.order == 2 and z2.is_abelian
    s3 = builtin_group("S3")
    assert s3.order == 6 and sorted(s3.conjugacy_classes.sizes()) == [1, 2, 3]
    q8 = builtin_group("Q8")
    assert q8.order == 8 and sorted(q8.conjugacy_classes.sizes()) == [1, 1, 2, 2, 2]
    assert builtin_group("Z3").order == 3
    assert len(builtin_group("D4").conjugacy_classes) == 5


@pytest.mark.parametrize("name,param", [("Zn", None), ("Zn", 0), ("S7", None), ("", None)])
def test_builtin_rejects(name, param):
    with pytest.raises(ValueError):
        builtin_group(name, param)


def test_s3_composes_left_to_right():
    s3 = symmetric_group(3)
    p = s3.mul(s3.element("(12)"), s3.element("(23)"))
    # apply (12) first, then (23): 1->2->3, 2->1, 3->2
    assert s3.label(p) == "(132)"
    assert s3.element_order(p) == 3


def test_identity_and_inverses():
    for g in ALL:
        for a in range(g.order):
            assert g.mul(g.identity, a) == a == g.mul(a, g.identity)
            assert g.mul(a, g.inv(a)) == g.identity
            if g.element_order(a) == 2:
                assert g.inv(a) == a


def test_out_of_range_element():
    with pytest.raises(IndexError):
        cyclic_group(3).mul(0, 3)
    with pytest.raises(KeyError):
        symmetric_group(3).element("(1234)")


def test_commutator_examples():
    s3 = symmetric_group(3)
    t, r, r2 = s3.element("(12)"), s3.element("(123)"), s3.element("(132)")
    assert s3.commutator(t, r) != s3.identity
    assert s3.commutator(r, r2) == s3.identity
    z5 = cyclic_group(5)
    assert all(z5.commutator(a, b) == 0 for a in range(5) for b in range(5))


def test_conjugacy_examples():
    assert cyclic_group(2).conjugacy_classes.classes == ((0,), (1,))
    s3 = symmetric_group(3)
    assert s3.conjugacy_classes.sizes() == [1, 3, 2]
    assert set(s3.conjugacy_class(s3.element("(12)"))) == {s3.element(x) for x in ("(12)", "(13)", "(23)")}


@pytest.mark.parametrize("group", ALL, ids=lambda g: g.name)
def test_partition_properties(group):
    part = group.conjugacy_classes
    assert sum(part.sizes()) == group.order
    assert sorted(itertools.chain(*part.classes)) == list(range(group.order))
    assert part.classes[part.class_of[0]] == (0,)
    for a in range(group.order):
        for g in range(group.order):
            assert part.class_of[a] == part.class_of[group.conj(g, a)]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ALL), st.data())
def test_inverse_of_product_and_commutator(group, data):
    a = data.draw(st.integers(0, group.order - 1))
    b = data.draw(st.integers(0, group.order - 1))
    assert group.inv(group.mul(a, b)) == group.mul(group.inv(b), group.inv(a))
    assert (group.commutator(a, b) == group.identity) == (group.mul(a, b) == group.mul(b, a))


Z2_TEXT = """\
# the two-element group
group Z2
order 2
elements 1 -1
table
0 1
1 0
"""


def test_parse_z2():
    g = parse_group(Z2_TEXT)
    assert g.order == 2 and g.labels == ("1", "-1") and g.mul(1, 1) == 0


def test_round_trip_and_file(tmp_path):
    s3 = symmetric_group(3)
    text = format_group(s3)
    again = parse_group(text)
    assert np.array_equal(again.mul_table, s3.mul_table)
    path = tmp_path / "s3.group"
    # shuffle the labels to make the file a relabelled copy
    perm = [0, 3, 5, 1, 4, 2]
    pos = {old: new for new, old in enumerate(perm)}
    table = [[pos[int(s3.mul_table[perm[i], perm[j]])] for j in range(6)] for i in range(6)]
    path.write_text("group S3file\norder 6\ntable\n" + "\n".join(" ".join(map(str, r)) for r in table) + "\n")
    loaded = load_group(path)
    assert is_isomorphic(loaded, s3)
    assert not is_isomorphic(loaded, cyclic_group(6))
    assert not is_isomorphic(dihedral_group(4), quaternion_group())


@pytest.mark.parametrize("text,axiom", [
    ("group X\norder 2\ntable\n1 0\n0 1\n", "identity"),
    ("group X\norder 2\ntable\n0 1\n1 2\n", "closure"),
    ("group X\norder 3\ntable\n0 1 2\n1 0 0\n2 0 0\n", None),
])
def test_axiom_errors(text, axiom):
    with pytest.raises(GroupAxiomError) as info:
        parse_group(text)
    if axiom:
        assert info.value.axiom == axiom


def test_associativity_violation_is_named():
    # a Latin square with identity 0 that is not associative (order 5 loop)
    table = [[0, 1, 2, 3, 4],
             [1, 0, 3, 4, 2],
             [2, 4, 0, 1, 3],
             [3, 2, 4, 0, 1],
             [4, 3, 1, 2, 0]]
    with pytest.raises(GroupAxiomError) as info:
        FiniteGroup("loop5", table)
    assert info.value.axiom == "associativity"


@pytest.mark.parametrize("text,line", [
    ("order 2\n", 1),
    ("group Z2\norder two\n", 2),
    ("group Z2\norder 2\ntable\n0 1\n1 x\n", 5),
    ("group Z2\norder 2\nwhatever\n", 3),
    ("group Z2\norder 2\ntable\n0 1\n", 5),
])
def test_syntax_errors_carry_line(text, line):
    with pytest.raises(GroupSyntaxError) as info:
        parse_group(text)
    assert info.value.lineno == line
