"""Local operators and channels of the quantum double model.

Every unitary used here is a signed permutation of basis configurations
(:class:`ConfigMap`).  Linear combinations of them (:class:`LinearOp`)
cover ``U = (O_X + O_Z)/sqrt(2)`` and the channel superoperators.

Conventions: ``A_v(g)`` left-multiplies edges leaving ``v`` by ``g`` and
right-multiplies edges entering ``v`` by ``g^-1``.  The flux of a face is
the counterclockwise ordered product from a base vertex, with an edge
walked backwards contributing its inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .doubled_state import (
    SparseState,
    combine,
    norm,
    parallel_map,
    trace_of_rho,
    _diagonal_mask,
)
from .group_core import FiniteGroup
from .lattice import Lattice, face_boundary

__all__ = [
    "ConfigMap",
    "EdgeMultiply",
    "PhaseMap",
    "ComposedMap",
    "LinearOp",
    "ProjectorSpec",
    "OperatorError",
    "gauge_map",
    "flux_of",
    "face_flux",
    "apply_map",
    "apply_linear",
    "apply_doubled",
    "apply_channel_Ev",
    "apply_projector",
    "projector_expectation_pure",
    "expectation_in_rho",
    "ancilla_detect",
    "build_OX",
    "build_OZ",
    "build_WX",
    "build_U",
    "purification_check",
]

KET, BRA, DIAG = "ket", "bra", "diagonal"


class OperatorError(ValueError):
    pass


# -- configuration maps --------------------------------------------------------

class ConfigMap:
    """A signed permutation of single-layer configurations.

    Subclasses implement :meth:`apply` on an ``(N, E)`` array of group
    elements and return the mapped array plus a ``+-1`` sign per row (or
    ``None`` when all signs are +1).
    """

    def apply(self, cols: np.ndarray, group: FiniteGroup) -> tuple[np.ndarray, np.ndarray | None]:
        raise NotImplementedError

    def inverse(self, group: FiniteGroup) -> "ConfigMap":
        raise NotImplementedError

    def then(self, other: "ConfigMap") -> "ComposedMap":
        """``other`` applied after ``self``."""
        return ComposedMap([self, other])

    def __call__(self, cols, group):
        return self.apply(cols, group)


class EdgeMultiply(ConfigMap):
    """``z_e -> l_e z_e r_e`` with constant elements per edge."""

    def __init__(self, left: dict[int, int] | None = None, right: dict[int, int] | None = None):
        self.left = {int(e): int(g) for e, g in (left or {}).items() if g != 0}
        self.right = {int(e): int(g) for e, g in (right or {}).items() if g != 0}

    @property
    def edges(self) -> set[int]:
        return set(self.left) | set(self.right)

    def apply(self, cols, group):
        out = cols.copy()
        mt = group.mul_table
        for e, g in self.left.items():
            out[:, e] = mt[g, out[:, e]]
        for e, g in self.right.items():
            out[:, e] = mt[out[:, e], g]
        return out, None

    def inverse(self, group: FiniteGroup) -> "EdgeMultiply":
        inv = group.inv_table
        return EdgeMultiply({e: int(inv[g]) for e, g in self.left.items()},
                            {e: int(inv[g]) for e, g in self.right.items()})

    def __repr__(self):
        return f"EdgeMultiply(left={self.left}, right={self.right})"


class PhaseMap(ConfigMap):
    """Product of Pauli-Z over ``edges`` for Z2 (element 1 carries -1)."""

    def __init__(self, edges: Sequence[int]):
        self.edges = tuple(int(e) for e in edges)

    def apply(self, cols, group):
        if group.order != 2:
            raise OperatorError("Pauli-Z strings need the group Z2")
        parity = cols[:, list(self.edges)].sum(axis=1) % 2 if self.edges else np.zeros(len(cols), int)
        return cols.copy(), 1 - 2 * parity.astype(np.int64)

    def inverse(self, group):
        return self

    def __repr__(self):
        return f"PhaseMap({list(self.edges)})"


class ComposedMap(ConfigMap):
    """Maps applied left to right."""

    def __init__(self, maps: Sequence[ConfigMap]):
        flat: list[ConfigMap] = []
        for m in maps:
            flat.extend(m.maps if isinstance(m, ComposedMap) else [m])
        self.maps = flat

    def apply(self, cols, group):
        sign = None
        for m in self.maps:
            cols, s = m.apply(cols, group)
            if s is not None:
                sign = s if sign is None else sign * s
        return cols, sign

    def inverse(self, group):
        return ComposedMap([m.inverse(group) for m in reversed(self.maps)])


@dataclass
class LinearOp:
    """``sum_k c_k M_k`` with real coefficients."""
    terms: list[tuple[float, ConfigMap]] = field(default_factory=list)

    def apply_configs(self, cols: np.ndarray, amps: np.ndarray, group: FiniteGroup):
        """Apply to a single-layer sparse vector; returns unmerged rows."""
        outs, vals = [], []
        for c, m in self.terms:
            new, sign = m.apply(cols, group)
            outs.append(new)
            vals.append(c * amps * (1 if sign is None else sign))
        return np.concatenate(outs), np.concatenate(vals)

    def unitarity_defect(self, group: FiniteGroup, n_edges: int, samples: int = 64, seed: int = 0) -> float:
        """``max || U^T U |c> - |c> ||`` over random basis configurations.

        The ops built here are real, so the adjoint is the transpose: each
        term map is replaced by its inverse.
        """
        rng = np.random.default_rng(seed)
        adjoint = LinearOp([(c, m.inverse(group)) for c, m in self.terms])
        worst = 0.0
        for _ in range(samples):
            cfg = rng.integers(0, group.order, size=(1, n_edges))
            rows, amps = self.apply_configs(cfg, np.ones(1), group)
            rows, amps = adjoint.apply_configs(rows, amps, group)
            vec = _merge_rows(rows, amps)
            key = tuple(int(x) for x in cfg[0])
            vec[key] = vec.get(key, 0.0) - 1.0
            worst = max(worst, math.sqrt(sum(abs(a) ** 2 for a in vec.values())))
        return worst


def _merge_rows(rows: np.ndarray, amps: np.ndarray) -> dict:
    out: dict = {}
    for r, a in zip(rows, amps):
        k = tuple(int(x) for x in r)
        out[k] = out.get(k, 0.0) + a
    return out


def gauge_map(lattice: Lattice, group: FiniteGroup, v: int, g: int) -> EdgeMultiply:
    """``A_v(g)``: edges leaving ``v`` get ``g*z``, edges entering get ``z*g^-1``."""
    if not 0 <= v < lattice.vertex_count:
        raise OperatorError(f"vertex {v} out of range")
    g = group.element(g)
    left, right = {}, {}
    ginv = group.inv(g)
    for e, outgoing in lattice.star[v]:
        if outgoing:
            left[e] = g
        else:
            right[e] = ginv
    return EdgeMultiply(left, right)


# -- fluxes ---------------------------------------------------------------------

def face_flux(cols: np.ndarray, group: FiniteGroup, boundary: Sequence[tuple[int, int]]) -> np.ndarray:
    """Ordered product along ``boundary`` for every row of ``cols``."""
    mt, inv = group.mul_table, group.inv_table
    acc = np.zeros(len(cols), dtype=np.int64)
    for e, s in boundary:
        z = cols[:, e].astype(np.int64)
        acc = mt[acc, z if s > 0 else inv[z]]
    return acc


def flux_of(config, lattice: Lattice, group: FiniteGroup, f: int, base_vertex: int, layer: str = KET):
    """Flux through ``f`` based at ``base_vertex``.

    ``config`` is either a single-layer sequence of ``E`` elements, a doubled
    row of ``2E`` elements (``layer`` picks the half), or an array of rows.
    """
    bd = face_boundary(lattice, f, base_vertex)
    arr = np.atleast_2d(np.asarray(config))
    E = lattice.edge_count
    if arr.shape[1] == 2 * E:
        arr = arr[:, :E] if layer == KET else arr[:, E:]
    elif arr.shape[1] != E:
        raise OperatorError(f"configuration width {arr.shape[1]} matches neither E={E} nor 2E")
    out = face_flux(arr, group, bd)
    return int(out[0]) if np.ndim(config) == 1 else out


# -- applying maps to doubled states ---------------------------------------------

def _layer_cols(state: SparseState, layer: str):
    E = state.lattice.edge_count
    if layer not in (KET, BRA, DIAG):
        raise OperatorError(f"layer must be ket, bra or diagonal, got {layer!r}")
    return E


def _mapped(state: SparseState, cmap: ConfigMap, layer: str, bra_map: ConfigMap | None = None):
    """Rows and signs after applying ``cmap`` (and ``bra_map`` on the bra for DIAG)."""
    E = _layer_cols(state, layer)
    cfg = state.configs
    sign = None
    ket, bra = cfg[:, :E], cfg[:, E:]
    if layer in (KET, DIAG):
        ket, s = cmap.apply(ket, state.group)
        sign = s
    if layer in (BRA, DIAG):
        bm = bra_map if bra_map is not None else cmap
        bra, s = bm.apply(bra, state.group)
        if s is not None:
            sign = s if sign is None else sign * s
    return np.concatenate([ket, bra], axis=1), sign


def apply_map(state: SparseState, cmap: ConfigMap, layer: str = DIAG) -> SparseState:
    """``(M (x) M)|rho>`` for ``layer='diagonal'``, or ``M`` on one layer."""
    rows, sign = _mapped(state, cmap, layer)
    amps = state.amps if sign is None else state.amps * sign
    return state.with_configs(rows, amps)


def apply_linear(state: SparseState, op: LinearOp, layer: str = KET) -> SparseState:
    """A :class:`LinearOp` on a single layer."""
    if layer == DIAG:
        return apply_doubled(state, op, op)
    parts = []
    for c, m in op.terms:
        rows, sign = _mapped(state, m, layer)
        parts.append((rows, c * (state.amps if sign is None else state.amps * sign)))
    return state.with_configs(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))


def apply_doubled(state: SparseState, ket_op: LinearOp, bra_op: LinearOp | None = None) -> SparseState:
    """``(A (x) B)|rho>``; ``B`` defaults to ``A`` (all operators here are real)."""
    bra_op = ket_op if bra_op is None else bra_op
    pairs = [(ca * cb, ma, mb) for ca, ma in ket_op.terms for cb, mb in bra_op.terms]

    def one(p):
        c, ma, mb = p
        rows, sign = _mapped(state, ma, DIAG, bra_map=mb)
        return rows, c * (state.amps if sign is None else state.amps * sign)

    parts = parallel_map(one, pairs)
    return state.with_configs(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))


def channel_op(lattice: Lattice, group: FiniteGroup, v: int) -> list[EdgeMultiply]:
    return [gauge_map(lattice, group, v, g) for g in range(group.order)]


def apply_channel_Ev(state: SparseState, v: int) -> SparseState:
    """``|G|^-1 sum_g A_v(g) (x) A_v(g)`` applied to ``|rho>``."""
    group, lattice = state.group, state.lattice
    maps = channel_op(lattice, group, v)
    weight = 1.0 / group.order

    def one(m):
        rows, _ = _mapped(state, m, DIAG)
        return state.codec.encode(rows)

    keys = parallel_map(one, maps)
    amps = np.tile(state.amps * weight, len(maps))
    return SparseState.from_keys(lattice, group, np.concatenate(keys), amps)


# -- projectors --------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectorSpec:
    """A projector (or, for ``Zf``/``Xv``, a Z2 involution) on the doubled space.

    ``kind`` is one of ``Bf``, ``Av``, ``DiagAv``, ``EdgeMatch``, ``Zf``,
    ``Xv``; ``index`` is the face, vertex or edge it lives on.
    """
    kind: str
    index: int
    layer: str = KET
    base_vertex: int | None = None
    target: int = 0

    @classmethod
    def Bf(cls, face, layer=KET, base_vertex=None, target=0):
        return cls("Bf", face, layer, base_vertex, target)

    @classmethod
    def Av(cls, vertex, layer=KET):
        return cls("Av", vertex, layer)

    @classmethod
    def DiagAv(cls, vertex):
        return cls("DiagAv", vertex, DIAG)

    @classmethod
    def EdgeMatch(cls, edge):
        return cls("EdgeMatch", edge, DIAG)

    @classmethod
    def Zf(cls, face, layer=KET):
        return cls("Zf", face, layer)

    @classmethod
    def Xv(cls, vertex, layer=KET):
        return cls("Xv", vertex, layer)

    @property
    def involution(self) -> bool:
        return self.kind in ("Zf", "Xv")

    @property
    def group_diagonal(self) -> bool:
        return self.kind in ("Bf", "Zf", "EdgeMatch")


_KINDS = {"Bf", "Av", "DiagAv", "EdgeMatch", "Zf", "Xv"}


def _check_spec(state: SparseState, spec: ProjectorSpec) -> None:
    lat = state.lattice
    if spec.kind not in _KINDS:
        raise OperatorError(f"unknown projector kind {spec.kind!r}")
    limit = {"Bf": lat.face_count, "Zf": lat.face_count, "EdgeMatch": lat.edge_count}.get(spec.kind, lat.vertex_count)
    if not 0 <= spec.index < limit:
        raise OperatorError(f"{spec.kind} index {spec.index} out of range")
    if spec.kind in ("Zf", "Xv") and state.group.order != 2:
        raise OperatorError(f"{spec.kind} is defined for Z2 only")
    if spec.layer not in (KET, BRA, DIAG):
        raise OperatorError(f"bad layer {spec.layer!r}")


def _diag_values(state: SparseState, spec: ProjectorSpec) -> np.ndarray:
    """Eigenvalue of a group-diagonal spec on every stored row."""
    lat, group = state.lattice, state.group
    E = lat.edge_count
    cfg = state.configs
    layers = {KET: [cfg[:, :E]], BRA: [cfg[:, E:]], DIAG: [cfg[:, :E], cfg[:, E:]]}[spec.layer]
    if spec.kind == "EdgeMatch":
        return (cfg[:, spec.index] == cfg[:, E + spec.index]).astype(float)
    if spec.kind == "Bf":
        base = spec.base_vertex if spec.base_vertex is not None else lat.face_vertices[spec.index][0]
        bd = face_boundary(lat, spec.index, base)
        val = np.ones(len(cfg))
        for cols in layers:
            val = val * (face_flux(cols, group, bd) == spec.target)
        return val
    if spec.kind == "Zf":
        edges = [e for e, _ in lat.faces[spec.index]]
        val = np.ones(len(cfg))
        for cols in layers:
            val = val * (1 - 2 * (cols[:, edges].astype(np.int64).sum(axis=1) % 2))
        return val
    raise OperatorError(f"{spec.kind} is not diagonal in the group basis")


def _map_expectation(state: SparseState, cmap: ConfigMap, layer: str) -> complex:
    rows, sign = _mapped(state, cmap, layer)
    amps = state.amps if sign is None else state.amps * sign
    return complex(np.sum(np.conj(state.lookup(rows)) * amps))


def _vertex_maps(state, spec) -> list[tuple[float, ConfigMap, str]]:
    lat, group = state.lattice, state.group
    if spec.kind == "Xv":
        return [(1.0, gauge_map(lat, group, spec.index, 1), spec.layer)]
    layer = DIAG if spec.kind == "DiagAv" else spec.layer
    w = 1.0 / group.order
    return [(w, gauge_map(lat, group, spec.index, g), layer) for g in range(group.order)]


def apply_projector(state: SparseState, spec: ProjectorSpec) -> SparseState:
    """Apply the projector; involutions ``O`` are applied as ``(1 + O)/2``."""
    _check_spec(state, spec)
    if spec.group_diagonal:
        vals = _diag_values(state, spec)
        if spec.involution:
            vals = 0.5 * (1 + vals)
        return state.with_configs(state.configs, state.amps * vals)
    terms = _vertex_maps(state, spec)
    if spec.involution:
        terms = [(0.5, None, None)] + [(0.5 * c, m, l) for c, m, l in terms]
    parts = []
    for c, m, l in terms:
        if m is None:
            parts.append((c, state))
        else:
            parts.append((c, apply_map(state, m, l)))
    return combine(parts)


def projector_expectation_pure(state: SparseState, spec: ProjectorSpec) -> float:
    """``<rho|P|rho> / <rho|rho>`` in the doubled space."""
    _check_spec(state, spec)
    n2 = norm(state) ** 2
    if n2 == 0.0:
        raise ZeroDivisionError("expectation of the zero state")
    if spec.group_diagonal:
        return float(np.sum(np.abs(state.amps) ** 2 * _diag_values(state, spec)) / n2)
    total = sum(c * _map_expectation(state, m, l) for c, m, l in _vertex_maps(state, spec))
    return float(np.real(total) / n2)


def expectation_in_rho(state: SparseState, spec: ProjectorSpec) -> float:
    """``Tr(P rho) / Tr(rho)`` for an operator diagonal in the group basis."""
    _check_spec(state, spec)
    if not spec.group_diagonal:
        raise OperatorError(f"{spec.kind} is not diagonal in the group basis")
    tr = trace_of_rho(state)
    if abs(tr) == 0.0:
        raise ZeroDivisionError("trace of rho is zero")
    # Tr(P rho) only sees the physical layer; evaluate on the ket half
    spec1 = ProjectorSpec(spec.kind, spec.index, KET, spec.base_vertex, spec.target)
    mask = _diagonal_mask(state)
    vals = _diag_values(state, spec1)
    return float(np.real(np.sum(state.amps[mask] * vals[mask]) / tr))


def ancilla_detect(state: SparseState, face: int, toric: bool, base_vertex: int | None = None) -> float:
    """Probability the detection ancilla ends in the down state.

    The two Kraus branches leave the ancilla in ``diag(<P>, 1 - <P>)`` with
    ``P = (1 + Z_f)/2`` (toric) or ``P = B_f`` (general).
    """
    if toric:
        z = expectation_in_rho(state, ProjectorSpec.Zf(face))
        return 1.0 - 0.5 * (1.0 + z)
    return 1.0 - expectation_in_rho(state, ProjectorSpec.Bf(face, base_vertex=base_vertex))


# -- toric code strings ---------------------------------------------------------------

def _path_edges(lattice: Lattice, path: Sequence[int]) -> list[int]:
    edges = []
    for u, w in zip(path[:-1], path[1:]):
        cands = lattice.edges_between(u, w)
        if not cands:
            raise OperatorError(f"vertices {u} and {w} are not adjacent")
        if len(cands) > 1:
            raise OperatorError(f"vertices {u} and {w} are joined by several edges; give edges explicitly")
        edges.append(cands[0][0])
    return edges


def build_OZ(lattice: Lattice, path: Sequence[int] | None = None, *, edges: Sequence[int] | None = None) -> PhaseMap:
    """Product of Z along a vertex path ``v1 .. v2``."""
    if edges is None:
        if path is None or len(path) < 2:
            raise OperatorError("O_Z needs a vertex path of length >= 2")
        for v in path:
            if not 0 <= v < lattice.vertex_count:
                raise OperatorError(f"vertex {v} out of range")
        edges = _path_edges(lattice, path)
        endpoints = (path[0], path[-1])
    else:
        counts: dict[int, int] = {}
        for e in edges:
            for v in lattice.edges[e]:
                counts[v] = counts.get(v, 0) + 1
        ends = sorted(v for v, c in counts.items() if c % 2)
        endpoints = tuple(ends) if len(ends) == 2 else ()
    op = PhaseMap(edges)
    op.endpoints = endpoints
    return op


def build_OX(lattice: Lattice, dual_path: Sequence[int] | None = None, *,
             edges: Sequence[int] | None = None) -> EdgeMultiply:
    """Product of X on the edges crossed by a path of adjacent faces."""
    if edges is None:
        if dual_path is None or len(dual_path) < 2:
            raise OperatorError("O_X needs a dual path of at least two faces")
        for f in dual_path:
            if not 0 <= f < lattice.face_count:
                raise OperatorError(f"face {f} out of range")
        edges = []
        for f1, f2 in zip(dual_path[:-1], dual_path[1:]):
            shared = lattice.shared_edges(f1, f2)
            if not shared:
                raise OperatorError(f"faces {f1} and {f2} are not adjacent")
            if len(shared) > 1:
                raise OperatorError(f"faces {f1} and {f2} share several edges; give edges explicitly")
            edges.append(shared[0])
        endpoints = (dual_path[0], dual_path[-1])
    else:
        endpoints = ()
    op = EdgeMultiply({e: 1 for e in edges})
    op.endpoints = endpoints
    return op


def build_WX(lattice: Lattice, around: int | Sequence[int], oz: PhaseMap | None = None) -> EdgeMultiply:
    """Closed dual loop enclosing the vertex set ``around``.

    Equals the product of vertex X-stars over the set.  When ``oz`` is
    given, the set must contain exactly one endpoint of ``O_Z`` and that
    endpoint must be the path's last vertex ``v2``.
    """
    verts = {around} if isinstance(around, (int, np.integer)) else set(around)
    for v in verts:
        if not 0 <= v < lattice.vertex_count:
            raise OperatorError(f"vertex {v} out of range")
    parity: dict[int, int] = {}
    for v in verts:
        for e, _ in lattice.star[v]:
            parity[e] = parity.get(e, 0) ^ 1
    edges = sorted(e for e, p in parity.items() if p)
    if oz is not None:
        ends = getattr(oz, "endpoints", ())
        inside = [v for v in ends if v in verts]
        if len(ends) != 2 or len(inside) != 1:
            raise OperatorError(f"W_X must enclose exactly one endpoint of O_Z, encloses {len(inside)}")
        if inside[0] != ends[1]:
            raise OperatorError("W_X must enclose v2, the last vertex of the O_Z path")
        if len(set(edges) & set(oz.edges)) % 2 != 1:
            raise OperatorError("W_X must cross O_Z an odd number of times")
    op = EdgeMultiply({e: 1 for e in edges})
    op.enclosed = tuple(sorted(verts))
    return op


def build_U(ox: EdgeMultiply, oz: PhaseMap, *, n_edges: int | None = None, group: FiniteGroup | None = None) -> LinearOp:
    """``U = (O_X + O_Z)/sqrt(2)``; requires ``{O_X, O_Z} = 0``."""
    shared = set(ox.edges) & set(oz.edges)
    if len(shared) % 2 != 1:
        raise OperatorError(f"O_X and O_Z share {len(shared)} edges; they must anticommute (odd overlap)")
    c = 1 / math.sqrt(2)
    op = LinearOp([(c, ox), (c, oz)])
    if n_edges is not None and group is not None:
        d = op.unitarity_defect(group, n_edges)
        if d > 1e-12:
            raise OperatorError(f"U failed the unitarity check (defect {d:.3g})")
    return op


# -- purification -----------------------------------------------------------------------

def _star_perm(group: FiniteGroup, orientations: Sequence[bool], g: int) -> np.ndarray:
    """Permutation matrix of ``A_v(g)`` on a star with the given edge orientations."""
    n, d = group.order, len(orientations)
    dim = n ** d
    idx = np.arange(dim)
    digits = np.array([(idx // n ** (d - 1 - k)) % n for k in range(d)]).T
    new = digits.copy()
    for k, outgoing in enumerate(orientations):
        new[:, k] = group.mul_table[g, digits[:, k]] if outgoing else group.mul_table[digits[:, k], group.inv(g)]
    target = np.zeros(dim, dtype=np.int64)
    for k in range(d):
        target = target * n + new[:, k]
    P = np.zeros((dim, dim))
    P[target, idx] = 1.0
    return P


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def purification_check(group: FiniteGroup, orientations: Sequence[bool], sigma: np.ndarray | None = None,
                       rng: np.random.Generator | None = None) -> float:
    """Max-entry gap between ``Tr_aux[U (|+><+| (x) sigma) U^dag]`` and ``E_v[sigma]``.

    ``U = sum_g |g><g|_aux (x) A_v(g)`` acts on an auxiliary group spin and the
    star of ``v`` (one entry of ``orientations`` per edge, True = outgoing).
    """
    n = group.order
    dim = n ** len(orientations)
    if n * dim > 4096:
        raise ValueError(f"purification dimension {n * dim} exceeds 4096")
    if sigma is None:
        sigma = random_density(dim, rng or np.random.default_rng(0))
    perms = [_star_perm(group, orientations, g) for g in range(n)]
    U = np.zeros((n * dim, n * dim))
    for g, P in enumerate(perms):
        U[g * dim:(g + 1) * dim, g * dim:(g + 1) * dim] = P
    plus = np.full((n, n), 1.0 / n)
    big = U @ np.kron(plus, sigma) @ U.conj().T
    reduced = np.einsum("gigj->ij", big.reshape(n, dim, n, dim))
    channel = sum(P @ sigma @ P.T for P in perms) / n
    return float(np.max(np.abs(reduced - channel)))
