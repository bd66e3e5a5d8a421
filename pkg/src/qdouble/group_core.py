"""Finite groups given by explicit multiplication tables.

Elements are dense integer indices ``0 .. n-1`` with ``0`` the identity;
labels are cosmetic.  Permutation groups compose left to right: ``a*b``
means "apply ``a``, then ``b``".
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

__all__ = [
    "FiniteGroup",
    "ConjugacyPartition",
    "GroupAxiomError",
    "GroupSyntaxError",
    "builtin_group",
    "parse_group",
    "format_group",
    "is_isomorphic",
]

# exhaustive associativity check up to this order, sampled beyond
_EXHAUSTIVE_ASSOC = 64


class GroupAxiomError(ValueError):
    """A multiplication table violates a group axiom."""

    def __init__(self, axiom: str, detail: str):
        self.axiom = axiom
        super().__init__(f"{axiom} axiom violated: {detail}")


class GroupSyntaxError(ValueError):
    def __init__(self, lineno: int, detail: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {detail}")


@dataclass(frozen=True)
class ConjugacyPartition:
    classes: tuple[tuple[int, ...], ...]
    class_of: tuple[int, ...]

    def sizes(self) -> list[int]:
        return [len(c) for c in self.classes]

    def __len__(self) -> int:
        return len(self.classes)


class FiniteGroup:
    """A finite group stored as an ``n x n`` multiplication table.

    ``mul_table[a, b]`` is the index of ``a*b``.  The table is validated on
    construction (closure, identity at index 0, inverses, associativity) and
    is read-only afterwards.
    """

    def __init__(self, name: str, mul_table, labels: Sequence[str] | None = None,
                 *, rng_seed: int = 0):
        table = np.array(mul_table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] < 1:
            raise GroupAxiomError("closure", f"table must be square and non-empty, got shape {table.shape}")
        n = table.shape[0]
        if labels is None:
            labels = [str(i) for i in range(n)]
        labels = [str(s) for s in labels]
        if len(labels) != n:
            raise ValueError(f"expected {n} labels, got {len(labels)}")
        if len(set(labels)) != n:
            raise ValueError("element labels must be distinct")
        inv = _validate_table(table, rng_seed)
        self.name = name
        self.mul_table = table
        self.inv_table = inv
        self.labels = tuple(labels)
        table.setflags(write=False)
        inv.setflags(write=False)
        self._index = {s: i for i, s in enumerate(labels)}

    # -- basics ---------------------------------------------------------
    @property
    def order(self) -> int:
        return self.mul_table.shape[0]

    @property
    def identity(self) -> int:
        return 0

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name!r}, order={self.order})"

    def _check(self, *elems: int) -> None:
        for a in elems:
            if not 0 <= int(a) < self.order:
                raise IndexError(f"element {a} out of range for group of order {self.order}")

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        self._check(a)
        return int(self.inv_table[a])

    def prod(self, elems: Sequence[int]) -> int:
        out = 0
        for a in elems:
            out = self.mul(out, a)
        return out

    def conj(self, g: int, a: int) -> int:
        """``g a g^-1``."""
        return self.mul(self.mul(g, a), self.inv(g))

    def commutator(self, g: int, h: int) -> int:
        """``g h g^-1 h^-1``."""
        return self.mul(self.mul(g, h), self.mul(self.inv(g), self.inv(h)))

    def element(self, key: int | str) -> int:
        """Resolve an index or a label to an element index."""
        if isinstance(key, (int, np.integer)):
            self._check(key)
            return int(key)
        try:
            return self._index[str(key)]
        except KeyError:
            raise KeyError(f"{self.name} has no element labelled {key!r}") from None

    def label(self, a: int) -> str:
        return self.labels[a]

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = int(self.mul_table[x, a])
            k += 1
        return k

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul_table, self.mul_table.T))

    @cached_property
    def conjugacy_classes(self) -> ConjugacyPartition:
        n = self.order
        class_of = [-1] * n
        classes = []
        for a in range(n):
            if class_of[a] >= 0:
                continue
            orbit = sorted({int(self.mul_table[self.mul_table[g, a], self.inv_table[g]]) for g in range(n)})
            for b in orbit:
                class_of[b] = len(classes)
            classes.append(tuple(orbit))
        return ConjugacyPartition(tuple(classes), tuple(class_of))

    def conjugacy_class(self, a: int) -> tuple[int, ...]:
        part = self.conjugacy_classes
        return part.classes[part.class_of[a]]


def _validate_table(table: np.ndarray, rng_seed: int) -> np.ndarray:
    n = table.shape[0]
    if table.min() < 0 or table.max() >= n:
        bad = np.argwhere((table < 0) | (table >= n))[0]
        raise GroupAxiomError("closure", f"entry at row {bad[0]}, column {bad[1]} is {table[tuple(bad)]}, not in [0, {n})")
    ar = np.arange(n)
    if not np.array_equal(table[0], ar) or not np.array_equal(table[:, 0], ar):
        raise GroupAxiomError("identity", "row 0 and column 0 must act as the identity")
    is_id = table == 0
    if not (is_id.sum(axis=1) == 1).all():
        a = int(np.argmax(is_id.sum(axis=1) != 1))
        raise GroupAxiomError("inverse", f"element {a} has no unique right inverse")
    inv = np.argmax(is_id, axis=1)
    if not (table[inv, ar] == 0).all():
        a = int(np.argmax(table[inv, ar] != 0))
        raise GroupAxiomError("inverse", f"right inverse of element {a} is not a left inverse")
    if n <= _EXHAUSTIVE_ASSOC:
        lhs = table[table[:, :, None], ar[None, None, :]]          # (ab)c
        rhs = table[ar[:, None, None], table[None, :, :]]           # a(bc)
        if not np.array_equal(lhs, rhs):
            a, b, c = np.argwhere(lhs != rhs)[0]
            raise GroupAxiomError("associativity", f"({a}*{b})*{c} != {a}*({b}*{c})")
    else:
        rng = np.random.default_rng(rng_seed)
        a, b, c = rng.integers(0, n, size=(3, 10 * n * n))
        bad = table[table[a, b], c] != table[a, table[b, c]]
        if bad.any():
            i = int(np.argmax(bad))
            raise GroupAxiomError("associativity", f"({a[i]}*{b[i]})*{c[i]} != {a[i]}*({b[i]}*{c[i]})")
    return inv.astype(np.int64)


# -- built-ins -----------------------------------------------------------

def _from_elements(name, elements, mul, labels) -> FiniteGroup:
    index = {e: i for i, e in enumerate(elements)}
    table = [[index[mul(a, b)] for b in elements] for a in elements]
    return FiniteGroup(name, table, labels)


def _cycle_label(perm: tuple[int, ...]) -> str:
    seen, cycles = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(str(x + 1))
            x = perm[x]
        cycles.append("(" + "".join(cyc) + ")")
    return "".join(cycles) or "e"


def symmetric_group(n: int) -> FiniteGroup:
    """S_n on points 1..n.  ``a*b`` applies ``a`` first, then ``b``."""
    perms = list(itertools.permutations(range(n)))  # identity first

    def compose(a, b):
        return tuple(b[a[i]] for i in range(n))

    return _from_elements(f"S{n}", perms, compose, [_cycle_label(p) for p in perms])


def cyclic_group(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError(f"Zn needs a parameter >= 1, got {n}")
    ar = np.arange(n)
    return FiniteGroup(f"Z{n}", (ar[:, None] + ar[None, :]) % n, [str(i) for i in range(n)])


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the regular n-gon, elements ``r^k s^f`` indexed ``k + n f``."""
    elements = [(k, f) for f in (0, 1) for k in range(n)]

    def mul(a, b):
        (k1, f1), (k2, f2) = a, b
        return ((k1 + (-1) ** f1 * k2) % n, (f1 + f2) % 2)

    def lab(k, f):
        r = "" if k == 0 else ("r" if k == 1 else f"r{k}")
        s = "s" if f else ""
        return (r + s) or "e"

    return _from_elements(f"D{n}", elements, mul, [lab(*e) for e in elements])


def quaternion_group() -> FiniteGroup:
    # unit quaternions as (sign, axis) with axis in 0=1, 1=i, 2=j, 3=k
    units = [(1, 0), (-1, 0), (1, 1), (-1, 1), (1, 2), (-1, 2), (1, 3), (-1, 3)]
    # axis products: table[p][q] = (sign, axis)
    ax = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }

    def mul(a, b):
        s, c = ax[(a[1], b[1])]
        return (a[0] * b[0] * s, c)

    names = "1ijk"
    labels = [("-" if s < 0 else "") + names[c] for s, c in units]
    return _from_elements("Q8", units, mul, labels)


def builtin_group(name: str, parameter: int | None = None) -> FiniteGroup:
    """Look up a built-in group: ``Zn`` (with ``parameter``), ``S3``, ``D4``, ``Q8``.

    ``"Z2"``-style names with the order embedded are accepted as well.
    """
    key = name.strip()
    if key.upper() == "ZN":
        if parameter is None or parameter < 1:
            raise ValueError("Zn requires an integer parameter >= 1")
        return cyclic_group(int(parameter))
    if key[:1].upper() == "Z" and key[1:].isdigit():
        return cyclic_group(int(key[1:]))
    if key.upper() == "S3":
        return symmetric_group(3)
    if key.upper() == "D4":
        return dihedral_group(4)
    if key.upper() == "Q8":
        return quaternion_group()
    raise ValueError(f"unknown built-in group {name!r}; choose from Zn, S3, D4, Q8")


# -- text format -----------------------------------------------------------

def parse_group(text: str) -> FiniteGroup:
    """Parse the plain-text table format.

    ::

        group S3
        order 6
        elements e (12) (13) (23) (123) (132)   # optional
        table
        0 1 2 3 4 5
        ...

    Row ``i`` of the table lists ``mul(i, j)`` for ``j = 0..n-1``.
    """
    name = order = labels = None
    rows: list[list[int]] = []
    in_table = False
    last = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        last = lineno
        tokens = line.split()
        if in_table:
            try:
                rows.append([int(t) for t in tokens])
            except ValueError:
                raise GroupSyntaxError(lineno, f"table row must contain integers: {line!r}") from None
            if order is not None and len(rows[-1]) != order:
                raise GroupSyntaxError(lineno, f"table row has {len(rows[-1])} entries, expected {order}")
            continue
        head = tokens[0].lower()
        if head == "group":
            if len(tokens) != 2:
                raise GroupSyntaxError(lineno, "expected 'group <name>'")
            name = tokens[1]
        elif head == "order":
            if name is None:
                raise GroupSyntaxError(lineno, "'order' must follow 'group'")
            if len(tokens) != 2 or not tokens[1].isdigit() or int(tokens[1]) < 1:
                raise GroupSyntaxError(lineno, "expected 'order <positive integer>'")
            order = int(tokens[1])
        elif head == "elements":
            if order is None:
                raise GroupSyntaxError(lineno, "'elements' must follow 'order'")
            labels = tokens[1:]
            if len(labels) != order:
                raise GroupSyntaxError(lineno, f"expected {order} labels, got {len(labels)}")
        elif head == "table":
            if order is None:
                raise GroupSyntaxError(lineno, "'table' must follow 'order'")
            in_table = True
        else:
            raise GroupSyntaxError(lineno, f"unknown directive {tokens[0]!r}")
    if name is None:
        raise GroupSyntaxError(1, "missing 'group <name>' line")
    if not in_table:
        raise GroupSyntaxError(last + 1, "missing 'table' section")
    if len(rows) != order:
        raise GroupSyntaxError(last + 1, f"table has {len(rows)} rows, expected {order}")
    return FiniteGroup(name, rows, labels)


def format_group(group: FiniteGroup) -> str:
    lines = [f"group {group.name}", f"order {group.order}"]
    if all(" " not in s and "#" not in s for s in group.labels):
        lines.append("elements " + " ".join(group.labels))
    lines.append("table")
    lines += [" ".join(str(int(x)) for x in row) for row in group.mul_table]
    return "\n".join(lines) + "\n"


def load_group(path) -> FiniteGroup:
    with open(path, encoding="utf-8") as fh:
        return parse_group(fh.read())


# -- isomorphism -------------------------------------------------------------

def _generators(group: FiniteGroup) -> list[int]:
    gens: list[int] = []
    span = {0}
    # prefer high-order elements so the generating set stays short
    for a in sorted(range(group.order), key=lambda x: -group.element_order(x)):
        if a in span:
            continue
        gens.append(a)
        span = _closure(group, gens)
        if len(span) == group.order:
            break
    return gens


def _closure(group: FiniteGroup, gens: Sequence[int]) -> set[int]:
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = int(group.mul_table[x, g])
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def is_isomorphic(a: FiniteGroup, b: FiniteGroup) -> bool:
    """Brute-force isomorphism test by extending generator images."""
    if a.order != b.order or a.is_abelian != b.is_abelian:
        return False
    if sorted(map(a.element_order, range(a.order))) != sorted(map(b.element_order, range(b.order))):
        return False
    gens = _generators(a)
    candidates = [[y for y in range(b.order) if b.element_order(y) == a.element_order(x)] for x in gens]
    for images in itertools.product(*candidates):
        phi = {0: 0}
        frontier = [0]
        ok = True
        while frontier and ok:
            nxt = []
            for x in frontier:
                for g, gi in zip(gens, images):
                    y = int(a.mul_table[x, g])
                    yi = int(b.mul_table[phi[x], gi])
                    if y in phi:
                        if phi[y] != yi:
                            ok = False
                            break
                    else:
                        phi[y] = yi
                        nxt.append(y)
                if not ok:
                    break
            frontier = nxt
        if not ok or len(set(phi.values())) != a.order:
            continue
        perm = np.array([phi[x] for x in range(a.order)])
        if np.array_equal(perm[a.mul_table], b.mul_table[perm[:, None], perm[None, :]]):
            return True
    return False
