"""Oriented 2D cell complexes: vertices, directed edges, signed face boundaries.

Only the square torus has a dedicated builder; explicit complexes can be
built from plain lists (see :meth:`Lattice.from_dict`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

__all__ = [
    "Lattice",
    "LatticeError",
    "StringSpec",
    "CheckedString",
    "StringSpecError",
    "LoopClass",
    "torus",
    "face_boundary",
    "validate_string_spec",
    "loop_class",
    "face_loop_spec",
    "charge_comb_spec",
]

OUT, IN = "out", "in"


class LatticeError(ValueError):
    pass


class StringSpecError(ValueError):
    pass


class Lattice:
    """An oriented cell complex.

    Parameters
    ----------
    vertex_count : int
    edges : sequence of (tail, head)
    faces : sequence of boundaries, each a list of ``(edge, sign)`` traversed
        counterclockwise; ``sign = -1`` means the edge is walked against its
        direction.
    """

    def __init__(self, vertex_count: int, edges, faces, *, closed_surface: bool = True,
                 torus_shape: tuple[int, int] | None = None):
        self.vertex_count = int(vertex_count)
        self.edges = tuple((int(t), int(h)) for t, h in edges)
        self.faces = tuple(tuple((int(e), int(s)) for e, s in f) for f in faces)
        self.torus_shape = torus_shape
        self._validate(closed_surface)

        star: list[list[tuple[int, bool]]] = [[] for _ in range(self.vertex_count)]
        for e, (t, h) in enumerate(self.edges):
            star[t].append((e, True))
            star[h].append((e, False))
        self.star = tuple(tuple(s) for s in star)
        adj: list[list[int]] = [[] for _ in self.edges]
        for f, bd in enumerate(self.faces):
            for e, _ in bd:
                adj[e].append(f)
        self.edge_faces = tuple(tuple(a) for a in adj)
        self.face_vertices = tuple(tuple(self._walk_start(e, s) for e, s in bd) for bd in self.faces)

    # -- construction helpers ----------------------------------------------
    def _walk_start(self, e: int, s: int) -> int:
        t, h = self.edges[e]
        return t if s > 0 else h

    def _walk_end(self, e: int, s: int) -> int:
        t, h = self.edges[e]
        return h if s > 0 else t

    def _validate(self, closed_surface: bool) -> None:
        V = self.vertex_count
        if V < 1:
            raise LatticeError("lattice needs at least one vertex")
        for e, (t, h) in enumerate(self.edges):
            if not (0 <= t < V and 0 <= h < V):
                raise LatticeError(f"edge {e} references a vertex outside [0, {V})")
        E = len(self.edges)
        net = [0] * E
        count = [0] * E
        for f, bd in enumerate(self.faces):
            if not bd:
                raise LatticeError(f"face {f} has an empty boundary")
            for i, (e, s) in enumerate(bd):
                if not 0 <= e < E:
                    raise LatticeError(f"face {f} references edge {e} outside [0, {E})")
                if s not in (1, -1):
                    raise LatticeError(f"face {f}: sign must be +1 or -1, got {s}")
                e2, s2 = bd[(i + 1) % len(bd)]
                if self._walk_end(e, s) != self._walk_start(e2, s2):
                    raise LatticeError(f"face {f} boundary is not a closed walk at position {i}")
                net[e] += s
                count[e] += 1
        if closed_surface:
            for e in range(E):
                if count[e] != 2 or net[e] != 0:
                    raise LatticeError(
                        f"edge {e} must appear in exactly two face boundaries with opposite signs")

    @classmethod
    def from_dict(cls, data: dict) -> "Lattice":
        """Build from ``{"type":"torus","lx":..,"ly":..}`` or an explicit complex."""
        if data.get("type") == "torus":
            return torus(int(data["lx"]), int(data["ly"]))
        return cls(int(data["vertices"]), data["edges"], data["faces"])

    def to_dict(self) -> dict:
        if self.torus_shape is not None:
            return {"type": "torus", "lx": self.torus_shape[0], "ly": self.torus_shape[1]}
        return {"vertices": self.vertex_count, "edges": [list(e) for e in self.edges],
                "faces": [[list(x) for x in f] for f in self.faces]}

    # -- counts ------------------------------------------------------------
    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - self.edge_count + self.face_count

    @property
    def is_torus(self) -> bool:
        return self.torus_shape is not None

    def __repr__(self) -> str:
        return f"Lattice(V={self.vertex_count}, E={self.edge_count}, F={self.face_count})"

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for e, _ in self.star[v]:
                for w in self.edges[e]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
        return len(seen) == self.vertex_count

    def edges_between(self, u: int, w: int) -> list[tuple[int, int]]:
        """Edges joining ``u`` to ``w`` as ``(edge, sign)`` walking from ``u``."""
        out = []
        for e, outgoing in self.star[u]:
            t, h = self.edges[e]
            if outgoing and h == w:
                out.append((e, 1))
            elif not outgoing and t == w:
                out.append((e, -1))
        return out

    def shared_edges(self, f1: int, f2: int) -> list[int]:
        return sorted({e for e, _ in self.faces[f1]} & {e for e, _ in self.faces[f2]})

    # -- torus coordinates -------------------------------------------------
    def _torus(self) -> tuple[int, int]:
        if self.torus_shape is None:
            raise LatticeError("lattice was not built by torus()")
        return self.torus_shape

    def vertex(self, x: int, y: int) -> int:
        lx, ly = self._torus()
        return x % lx + lx * (y % ly)

    def h_edge(self, x: int, y: int) -> int:
        """Edge from (x, y) to (x+1, y)."""
        return 2 * self.vertex(x, y)

    def v_edge(self, x: int, y: int) -> int:
        """Edge from (x, y) to (x, y+1)."""
        return 2 * self.vertex(x, y) + 1

    def face(self, x: int, y: int) -> int:
        """Plaquette whose lower-left corner is (x, y)."""
        return self.vertex(x, y)

    def edge_winding(self, e: int) -> tuple[int, int]:
        """Signed crossing of the cuts x = Lx - 1/2 and y = Ly - 1/2."""
        lx, ly = self._torus()
        v, vertical = divmod(e, 2)
        x, y = v % lx, v // lx
        if vertical:
            return (0, 1 if y == ly - 1 else 0)
        return (1 if x == lx - 1 else 0, 0)


def torus(lx: int, ly: int) -> Lattice:
    """Periodic ``lx x ly`` square lattice.

    Vertex ``(x, y)`` has id ``x + lx*y``; edge ``2v`` points +x and
    ``2v + 1`` points +y out of vertex ``v``; face ``v`` has lower-left
    corner ``v`` and boundary walked counterclockwise from it.
    """
    if lx < 2 or ly < 2:
        raise LatticeError(f"torus needs lx, ly >= 2, got ({lx}, {ly})")

    def vid(x, y):
        return x % lx + lx * (y % ly)

    edges = []
    for y in range(ly):
        for x in range(lx):
            edges.append((vid(x, y), vid(x + 1, y)))
            edges.append((vid(x, y), vid(x, y + 1)))
    faces = []
    for y in range(ly):
        for x in range(lx):
            faces.append([
                (2 * vid(x, y), 1),
                (2 * vid(x + 1, y) + 1, 1),
                (2 * vid(x, y + 1), -1),
                (2 * vid(x, y) + 1, -1),
            ])
    return Lattice(lx * ly, edges, faces, torus_shape=(lx, ly))


def face_boundary(lattice: Lattice, f: int, base_vertex: int) -> list[tuple[int, int]]:
    """Counterclockwise boundary of ``f`` rotated to start at ``base_vertex``."""
    if not 0 <= f < lattice.face_count:
        raise LatticeError(f"face {f} out of range")
    verts = lattice.face_vertices[f]
    if base_vertex not in verts:
        raise LatticeError(f"vertex {base_vertex} is not on face {f}")
    i = verts.index(base_vertex)
    bd = lattice.faces[f]
    return list(bd[i:] + bd[:i])


# -- string geometry ---------------------------------------------------------

@dataclass(frozen=True)
class StringSpec:
    """Comb geometry.

    ``base`` is an ordered walk of ``(edge, sign)``.  Each tooth is
    ``(edge, attach_index, orientation)`` where ``attach_index`` counts the
    base edges walked before the attachment vertex and ``orientation`` is
    ``"out"`` (edge tail at that vertex) or ``"in"`` (edge head there).
    """
    base: tuple[tuple[int, int], ...]
    teeth: tuple[tuple[int, int, str], ...] = ()
    closed: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "StringSpec":
        return cls(
            tuple((int(e), int(s)) for e, s in data.get("base", [])),
            tuple((int(e), int(i), str(o)) for e, i, o in data.get("teeth", [])),
            bool(data.get("closed", False)),
        )

    def to_dict(self) -> dict:
        return {"base": [list(b) for b in self.base], "teeth": [list(t) for t in self.teeth],
                "closed": self.closed}


@dataclass(frozen=True)
class CheckedString:
    spec: StringSpec
    base_vertices: tuple[int, ...]    # length len(base) + 1
    tooth_vertices: tuple[int, ...]
    lattice: Lattice = field(repr=False, compare=False)

    @property
    def start(self) -> int:
        return self.base_vertices[0]

    @property
    def end(self) -> int:
        return self.base_vertices[-1]


def validate_string_spec(lattice: Lattice, spec: StringSpec, start_vertex: int | None = None) -> CheckedString:
    """Check comb geometry and annotate teeth with their attachment vertices.

    A base-less comb (a single attachment point) needs ``start_vertex``.
    """
    E = lattice.edge_count
    if spec.base:
        for e, s in spec.base:
            if not 0 <= e < E:
                raise StringSpecError(f"base edge {e} out of range")
            if s not in (1, -1):
                raise StringSpecError(f"base sign must be +1 or -1, got {s}")
        verts = [lattice._walk_start(*spec.base[0])]
        for i, (e, s) in enumerate(spec.base):
            if lattice._walk_start(e, s) != verts[-1]:
                raise StringSpecError(f"base is disconnected at position {i} (edge {e})")
            verts.append(lattice._walk_end(e, s))
        if start_vertex is not None and start_vertex != verts[0]:
            raise StringSpecError(f"base starts at {verts[0]}, not {start_vertex}")
    else:
        if start_vertex is None:
            raise StringSpecError("a comb without base edges needs an explicit start vertex")
        verts = [int(start_vertex)]
    if spec.closed and (not spec.base or verts[-1] != verts[0]):
        raise StringSpecError("closed string must return to its start vertex")
    if not spec.closed and spec.base and len(set(e for e, _ in spec.base)) != len(spec.base):
        raise StringSpecError("base walk repeats an edge")
    base_edges = {e for e, _ in spec.base}
    seen = set()
    tooth_verts = []
    for e, idx, orient in spec.teeth:
        if not 0 <= e < E:
            raise StringSpecError(f"tooth edge {e} out of range")
        if e in base_edges:
            raise StringSpecError(f"tooth edge {e} is also a base edge")
        if not 0 <= idx < len(verts):
            raise StringSpecError(f"tooth {e}: attach index {idx} outside [0, {len(verts) - 1}]")
        if orient not in (OUT, IN):
            raise StringSpecError(f"tooth {e}: orientation must be 'out' or 'in', got {orient!r}")
        v = verts[idx]
        t, h = lattice.edges[e]
        if (orient == OUT and t != v) or (orient == IN and h != v):
            raise StringSpecError(f"tooth {e} is not {orient}going at base vertex {v}")
        if (e, orient) in seen:
            raise StringSpecError(f"tooth {e} listed twice with orientation {orient!r}")
        seen.add((e, orient))
        tooth_verts.append(v)
    return CheckedString(spec, tuple(verts), tuple(tooth_verts), lattice)


@dataclass(frozen=True)
class LoopClass:
    winding: tuple[int, int]

    @property
    def contractible(self) -> bool:
        return self.winding == (0, 0)


def loop_class(lattice: Lattice, spec: StringSpec) -> LoopClass:
    if not spec.closed:
        raise StringSpecError("loop_class needs a closed string")
    validate_string_spec(lattice, spec)
    wx = wy = 0
    for e, s in spec.base:
        dx, dy = lattice.edge_winding(e)
        wx += s * dx
        wy += s * dy
    return LoopClass((wx, wy))


def _face_region_boundary(lattice: Lattice, faces: Sequence[int]) -> list[tuple[int, int]]:
    region = set(faces)
    net: dict[int, int] = {}
    for f in region:
        for e, s in lattice.faces[f]:
            net[e] = net.get(e, 0) + s
    return [(e, 1 if s > 0 else -1) for e, s in net.items() if s != 0]


def face_loop_spec(lattice: Lattice, faces: Sequence[int], start_vertex: int,
                   *, clockwise: bool = False) -> StringSpec:
    """Closed comb around a simply connected set of faces.

    The base is the region boundary (counterclockwise unless ``clockwise``)
    starting at ``start_vertex``; every edge outside the region that touches
    a base vertex becomes a tooth, attached at its first visit.  An outside
    edge joining two base vertices is a tooth at both ends.
    """
    bd = _face_region_boundary(lattice, faces)
    if not bd:
        raise StringSpecError("face set has empty boundary")
    nxt: dict[int, tuple[int, int]] = {}
    for e, s in bd:
        u = lattice._walk_start(e, s)
        if u in nxt:
            raise StringSpecError(f"region boundary visits vertex {u} twice")
        nxt[u] = (e, s)
    if start_vertex not in nxt:
        raise StringSpecError(f"vertex {start_vertex} is not on the region boundary")
    walk = []
    u = start_vertex
    while True:
        e, s = nxt[u]
        walk.append((e, s))
        u = lattice._walk_end(e, s)
        if u == start_vertex:
            break
    if len(walk) != len(bd):
        raise StringSpecError("region boundary is not a single loop")
    if clockwise:
        walk = [(e, -s) for e, s in reversed(walk)]
    verts = [lattice._walk_start(*walk[0])] + [lattice._walk_end(e, s) for e, s in walk]
    inside = {e for f in faces for e, _ in lattice.faces[f]}
    teeth = []
    for idx, v in enumerate(verts[:-1]):
        for e, outgoing in lattice.star[v]:
            if e in inside:
                continue
            teeth.append((e, idx, OUT if outgoing else IN))
    return StringSpec(tuple(walk), tuple(teeth), True)


def charge_comb_spec(lattice: Lattice, base: Sequence[tuple[int, int]]) -> StringSpec:
    """Open comb whose teeth are every non-base edge at every base vertex."""
    verts = [lattice._walk_start(*base[0])] + [lattice._walk_end(e, s) for e, s in base]
    base_edges = {e for e, _ in base}
    teeth = []
    for idx, v in enumerate(verts):
        for e, outgoing in lattice.star[v]:
            if e not in base_edges:
                teeth.append((e, idx, OUT if outgoing else IN))
    return StringSpec(tuple(base), tuple(teeth), False)
