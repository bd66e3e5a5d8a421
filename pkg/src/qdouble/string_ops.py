"""Comb string operators, the elongation unitary, and the toric U_n recursion.

A comb ``A_L(g)`` leaves its base untouched.  A tooth attached after the
base prefix ``p`` (signed ordered product of the base edges walked so far)
is multiplied by ``p^-1 g p``: on the left if the tooth leaves the base
vertex, on the right by the inverse if it enters it.
"""
from __future__ import annotations

from collections import Counter
from typing import Sequence

import numpy as np

from .doubled_state import SparseState, distance, norm
from .group_core import FiniteGroup
from .lattice import (
    OUT,
    CheckedString,
    Lattice,
    StringSpec,
    StringSpecError,
    face_boundary,
    loop_class,
    validate_string_spec,
)
from .operators import DIAG, ConfigMap, apply_map, face_flux, gauge_map

__all__ = [
    "CombMap",
    "ElongationMap",
    "comb",
    "apply_comb",
    "comb_commutation_profile",
    "comb_commutation_defect",
    "closed_loop_action_defect",
    "elongate_spec",
    "apply_elongation",
    "elongation_identity_defect",
    "calibrate_elongation",
    "ELONGATION_FLAGS",
    "cnot",
    "build_Un",
    "un_closed_form",
    "pauli",
]


def _prefixes(cols: np.ndarray, group: FiniteGroup, base) -> list[np.ndarray]:
    mt, inv = group.mul_table, group.inv_table
    acc = np.zeros(len(cols), dtype=np.int64)
    out = [acc]
    for e, s in base:
        z = cols[:, e].astype(np.int64)
        acc = mt[acc, z if s > 0 else inv[z]]
        out.append(acc)
    return out


class CombMap(ConfigMap):
    """``A_L(g)`` as a permutation of single-layer configurations."""

    def __init__(self, string: CheckedString, g: int):
        self.string = string
        self.g = int(g)

    def apply(self, cols, group):
        mt, inv = group.mul_table, group.inv_table
        pre = _prefixes(cols, group, self.string.spec.base)
        out = cols.copy()
        for e, idx, orient in self.string.spec.teeth:
            p = pre[idx]
            c = mt[mt[inv[p], self.g], p]
            if orient == OUT:
                out[:, e] = mt[c, out[:, e]]
            else:
                out[:, e] = mt[out[:, e], inv[c]]
        return out, None

    def inverse(self, group):
        return CombMap(self.string, group.inv(self.g))

    def __repr__(self):
        return f"CombMap(g={self.g}, base={list(self.string.spec.base)})"


def comb(lattice: Lattice, spec: StringSpec | CheckedString, g: int, start_vertex: int | None = None) -> CombMap:
    checked = spec if isinstance(spec, CheckedString) else validate_string_spec(lattice, spec, start_vertex)
    return CombMap(checked, g)


def apply_comb(state: SparseState, spec: StringSpec | CheckedString | CombMap, g: int | None = None,
               layer: str = DIAG) -> SparseState:
    """``(A_L(g) (x) A_L(g))|rho>`` (or a single layer)."""
    cmap = spec if isinstance(spec, CombMap) else comb(state.lattice, spec, state.group.element(g))
    return apply_map(state, cmap, layer)


# -- commutation with the Hamiltonian terms ---------------------------------------

def _vector_norm(plus: Sequence[np.ndarray], minus: Sequence[np.ndarray], weight: float) -> np.ndarray:
    """Per-sample norm of ``weight * (sum_k |plus_k> - sum_k |minus_k>)``."""
    n = len(plus[0])
    out = np.empty(n)
    for s in range(n):
        acc: Counter = Counter()
        for r in plus:
            acc[r[s].tobytes()] += 1
        for r in minus:
            acc[r[s].tobytes()] -= 1
        out[s] = weight * np.sqrt(sum(v * v for v in acc.values()))
    return out


def comb_commutation_profile(lattice: Lattice, group: FiniteGroup, cmap: CombMap, *,
                             samples: int = 64, rng: np.random.Generator | None = None):
    """Estimate ``||[A_v, A_L]||`` per vertex and ``||[B_f, A_L]||`` per face.

    Both are maxima over random basis configurations, with ``A_v`` the
    vertex projector ``|G|^-1 sum_k A_v(k)`` and ``B_f`` the flux-free
    projector.
    """
    rng = rng or np.random.default_rng(0)
    cols = rng.integers(0, group.order, size=(samples, lattice.edge_count))
    moved, _ = cmap.apply(cols, group)
    vdef = {}
    for v in range(lattice.vertex_count):
        plus, minus = [], []
        for k in range(group.order):
            gm = gauge_map(lattice, group, v, k)
            plus.append(gm.apply(moved, group)[0])
            minus.append(cmap.apply(gm.apply(cols, group)[0], group)[0])
        vdef[v] = float(_vector_norm(plus, minus, 1.0 / group.order).max())
    fdef = {}
    for f in range(lattice.face_count):
        bd = face_boundary(lattice, f, lattice.face_vertices[f][0])
        before = face_flux(cols, group, bd) == 0
        after = face_flux(moved, group, bd) == 0
        fdef[f] = float(np.abs(after.astype(float) - before.astype(float)).max())
    return vdef, fdef


def comb_commutation_defect(lattice: Lattice, group: FiniteGroup, cmap: CombMap, *,
                            samples: int = 64, rng: np.random.Generator | None = None) -> float:
    """Worst commutator estimate away from the two ends of the base.

    Vertices other than the base endpoints, and faces not touching them,
    count as interior.
    """
    s = cmap.string
    if s.spec.closed:
        raise StringSpecError("commutation defect is defined for open strings")
    ends = {s.start, s.end}
    vdef, fdef = comb_commutation_profile(lattice, group, cmap, samples=samples, rng=rng)
    worst = max((d for v, d in vdef.items() if v not in ends), default=0.0)
    for f, d in fdef.items():
        if not ends & set(lattice.face_vertices[f]):
            worst = max(worst, d)
    return worst


def _require_contractible(lattice: Lattice, spec: StringSpec) -> None:
    if not spec.closed:
        raise StringSpecError("closed loop expected")
    if lattice.is_torus:
        cls = loop_class(lattice, spec)
        if not cls.contractible:
            raise StringSpecError(f"loop winds {cls.winding}; only contractible loops are allowed")
    elif lattice.euler_characteristic != 2:
        raise StringSpecError("cannot certify contractibility on this surface")


def closed_loop_action_defect(state: SparseState, spec: StringSpec | CheckedString, g: int) -> float:
    """``||(A_C(g) (x) A_C(g))|rho> - |rho>|| / ||rho||`` for a contractible loop."""
    checked = spec if isinstance(spec, CheckedString) else validate_string_spec(state.lattice, spec)
    _require_contractible(state.lattice, checked.spec)
    moved = apply_comb(state, checked, state.group.element(g))
    return distance(moved, state) / norm(state)


# -- elongation ----------------------------------------------------------------------

# (conjugation power, side); (1, "left") is the one satisfying the identity
ELONGATION_FLAGS = ((1, "left"), (-1, "left"), (1, "right"), (-1, "right"))


class ElongationMap(ConfigMap):
    """``E_{u1,u2}``: controlled multiplication of the new teeth at ``u2``.

    Controls are the extension edge ``e*`` (value ``x``, sign-corrected) and
    one tooth ``a`` of ``L`` at ``u1`` (``a_hat = a`` if it leaves ``u1``,
    ``a^-1`` otherwise).  With ``M = x^-p a_hat^-1 x^p`` every target tooth
    leaving ``u2`` becomes ``M b`` (side ``left``) or ``b M`` (``right``);
    entering teeth get the mirrored inverse.
    """

    def __init__(self, extension: tuple[int, int], control: tuple[int, str],
                 targets: Sequence[tuple[int, str]], flag: tuple[int, str] = ELONGATION_FLAGS[0],
                 inverted: bool = False):
        self.extension = (int(extension[0]), int(extension[1]))
        self.control = (int(control[0]), str(control[1]))
        self.targets = tuple((int(e), str(o)) for e, o in targets)
        if flag not in ELONGATION_FLAGS:
            raise ValueError(f"flag must be one of {ELONGATION_FLAGS}")
        self.flag = flag
        self.inverted = inverted

    def _factor(self, cols, group):
        mt, inv = group.mul_table, group.inv_table
        e, s = self.extension
        x = cols[:, e].astype(np.int64)
        if s < 0:
            x = inv[x]
        a = cols[:, self.control[0]].astype(np.int64)
        a_hat = a if self.control[1] == OUT else inv[a]
        p, _ = self.flag
        xl, xr = (inv[x], x) if p > 0 else (x, inv[x])
        m = mt[mt[xl, inv[a_hat]], xr]
        return inv[m] if self.inverted else m

    def apply(self, cols, group):
        mt, inv = group.mul_table, group.inv_table
        m = self._factor(cols, group)
        side = self.flag[1]
        out = cols.copy()
        for e, orient in self.targets:
            b = out[:, e]
            if orient == OUT:
                out[:, e] = mt[m, b] if side == "left" else mt[b, m]
            else:
                out[:, e] = mt[b, inv[m]] if side == "left" else mt[inv[m], b]
        return out, None

    def inverse(self, group):
        return ElongationMap(self.extension, self.control, self.targets, self.flag, not self.inverted)


def elongate_spec(lattice: Lattice, spec: StringSpec, extension: tuple[int, int],
                  new_teeth: Sequence[tuple[int, str]], control: tuple[int, str] | None = None):
    """Build ``L'`` and ``E`` for extending open comb ``L`` by ``extension``.

    ``new_teeth`` are the teeth of ``L'`` at the new end vertex ``u2``.
    ``control`` defaults to the first tooth of ``L`` at its end ``u1``.
    Returns ``(L', E)``.
    """
    checked = validate_string_spec(lattice, spec)
    if spec.closed:
        raise StringSpecError("only open strings can be elongated")
    e, s = extension
    if not 0 <= e < lattice.edge_count:
        raise StringSpecError(f"extension edge {e} out of range")
    u1 = checked.end
    if lattice._walk_start(e, s) != u1:
        raise StringSpecError(f"extension edge {e} does not start at the string end {u1}")
    used = {b for b, _ in spec.base} | {t for t, _, _ in spec.teeth}
    if e in used:
        raise StringSpecError(f"extension edge {e} is already part of the comb")
    end_idx = len(spec.base)
    end_teeth = [(t, o) for t, i, o in spec.teeth if i == end_idx]
    if control is None:
        if not end_teeth:
            raise StringSpecError("L has no tooth at its end vertex to control E")
        control = end_teeth[0]
    elif tuple(control) not in end_teeth:
        raise StringSpecError(f"control {control} is not a tooth of L at its end vertex")
    for t, _ in new_teeth:
        if t in used or t == e:
            raise StringSpecError(f"new tooth {t} overlaps L or the extension edge")
    longer = StringSpec(spec.base + ((e, s),),
                        spec.teeth + tuple((t, end_idx + 1, o) for t, o in new_teeth), False)
    validate_string_spec(lattice, longer)
    return longer, ElongationMap((e, s), control, new_teeth)


def apply_elongation(state: SparseState, emap: ElongationMap, inverse: bool = False, layer: str = DIAG):
    return apply_map(state, emap.inverse(state.group) if inverse else emap, layer)


def elongation_identity_defect(lattice: Lattice, group: FiniteGroup, spec: StringSpec, longer: StringSpec,
                               emap: ElongationMap, *, samples: int = 200,
                               rng: np.random.Generator | None = None) -> float:
    """Fraction of sampled (configuration, g) pairs where ``E^-1 A_L(g) E != A_L'(g)``."""
    rng = rng or np.random.default_rng(0)
    short = validate_string_spec(lattice, spec)
    long_ = validate_string_spec(lattice, longer)
    cols = rng.integers(0, group.order, size=(samples, lattice.edge_count))
    gs = rng.integers(0, group.order, size=samples)
    einv = emap.inverse(group)
    bad = 0
    for g in range(group.order):
        rows = cols[gs == g]
        if not len(rows):
            continue
        lhs = einv.apply(CombMap(short, g).apply(emap.apply(rows, group)[0], group)[0], group)[0]
        rhs = CombMap(long_, g).apply(rows, group)[0]
        bad += int((lhs != rhs).any(axis=1).sum())
    return bad / samples


def calibrate_elongation(lattice: Lattice, group: FiniteGroup, spec: StringSpec, longer: StringSpec,
                         emap: ElongationMap, *, samples: int = 200, seed: int = 0):
    """Try every side-convention flag; return ``(best map, {flag: defect})``."""
    defects = {}
    for flag in ELONGATION_FLAGS:
        cand = ElongationMap(emap.extension, emap.control, emap.targets, flag)
        defects[flag] = elongation_identity_defect(lattice, group, spec, longer, cand, samples=samples,
                                                   rng=np.random.default_rng(seed))
    best = min(ELONGATION_FLAGS, key=lambda f: (defects[f], ELONGATION_FLAGS.index(f)))
    return ElongationMap(emap.extension, emap.control, emap.targets, best), defects


# -- toric U_n ---------------------------------------------------------------------------

_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


def pauli(ops: dict[int, str], n: int) -> np.ndarray:
    """Dense tensor product with ``ops[i]`` on qubit ``i`` (1-based, qubit 1 leftmost)."""
    out = np.eye(1)
    for i in range(1, n + 1):
        out = np.kron(out, _PAULI[ops.get(i, "I")])
    return out


def cnot(i: int, j: int, n: int) -> np.ndarray:
    """``(-1)^((1 - Z_i)(1 - X_j)/4)`` on ``n`` qubits."""
    eye = np.eye(2 ** n)
    zi = pauli({i: "Z"}, n)
    xj = pauli({j: "X"}, n)
    # the exponent is the product of two commuting projectors
    proj = ((eye - zi) / 2) @ ((eye - xj) / 2)
    return eye - 2 * proj


def build_Un(n: int) -> np.ndarray:
    """``U_1 = H``, ``U_n = CNOT_{n,n-1} U_{n-1} CNOT_{n,n-1}`` on ``n`` qubits."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = (_PAULI["X"] + _PAULI["Z"]) / np.sqrt(2)
    for k in range(2, n + 1):
        u = np.kron(u, np.eye(2))
        c = cnot(k, k - 1, k)
        u = c @ u @ c
    return u


def un_closed_form(n: int) -> np.ndarray:
    """``(X_1 + Z_1 Z_2 ... Z_n)/sqrt(2)``."""
    return (pauli({1: "X"}, n) + pauli({i: "Z" for i in range(1, n + 1)}, n)) / np.sqrt(2)
