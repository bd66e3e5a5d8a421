"""End-to-end drivers: preparation, certification, braiding, and checks.

Each driver returns an :class:`ExperimentReport` whose quantities carry an
expected value, a tolerance and a mechanically derived pass flag.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .doubled_state import (
    SparseState,
    combine,
    distance,
    hermiticity_defect,
    hilbert_dimension,
    inner,
    initial_state,
    norm,
    overlap_with_I,
    psd_defect,
    to_dense,
    trace_of_rho,
)
from .group_core import FiniteGroup
from .lattice import (
    CheckedString,
    Lattice,
    StringSpec,
    StringSpecError,
    face_loop_spec,
    loop_class,
    validate_string_spec,
)
from .operators import (
    BRA,
    DIAG,
    KET,
    LinearOp,
    ProjectorSpec,
    ancilla_detect,
    apply_channel_Ev,
    apply_doubled,
    apply_map,
    build_OX,
    build_OZ,
    build_U,
    build_WX,
    expectation_in_rho,
    projector_expectation_pure,
    purification_check,
)
from .string_ops import (
    CombMap,
    build_Un,
    calibrate_elongation,
    cnot,
    elongate_spec,
    pauli,
    un_closed_form,
)

__all__ = [
    "Quantity",
    "ExperimentReport",
    "prepare_ground_state",
    "verify_ground_state",
    "abelian_braiding",
    "AbelianGeometry",
    "default_abelian_geometry",
    "nonabelian_braiding",
    "default_nonabelian_geometry",
    "commutator_census",
    "restricted_excitation_demo",
    "elongation_check",
    "default_elongation_geometry",
    "un_check",
    "purification_experiment",
]

TOL = 1e-10
TIGHT = 1e-12
# per-step eigensolves are cheap up to here; 4096 costs ~30 s on one core
PSD_TRACK_DIM = 1024


@dataclass
class Quantity:
    value: float
    tolerance: float
    expected: float = 0.0
    relation: str = "eq"   # eq: |value - expected| <= tol;  gt: value > expected + tol

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        if self.relation == "gt":
            return self.value > self.expected + self.tolerance
        if self.relation == "le":
            return self.value <= self.expected + self.tolerance
        return abs(self.value - self.expected) <= self.tolerance

    def to_dict(self) -> dict:
        return {"value": float(self.value), "tolerance": self.tolerance, "expected": self.expected,
                "relation": self.relation, "pass": self.passed}


@dataclass
class ExperimentReport:
    experiment: str
    inputs: dict = field(default_factory=dict)
    quantities: dict[str, Quantity] = field(default_factory=dict)
    support_sizes: list[int] = field(default_factory=list)
    details: dict = field(default_factory=dict)
    wall_ms: int = 0

    def add(self, name: str, value, tolerance: float, expected: float = 0.0, relation: str = "eq") -> Quantity:
        q = Quantity(float(np.real(value)), tolerance, expected, relation)
        self.quantities[name] = q
        return q

    def track(self, label: str, state: SparseState) -> None:
        """Structural checks every reported step must meet."""
        self.add(f"trace[{label}]", trace_of_rho(state).real, TIGHT, 1.0)
        self.add(f"hermiticity[{label}]", hermiticity_defect(state), TIGHT)
        self.add(f"overlap_I[{label}]", overlap_with_I(state).real, 0.0, 0.0, "gt")
        if hilbert_dimension(state) <= PSD_TRACK_DIM:
            self.add(f"psd[{label}]", psd_defect(to_dense(state)), TOL)
        self.support_sizes.append(len(state))

    @property
    def passed(self) -> bool:
        return all(q.passed for q in self.quantities.values())

    def first_failure(self) -> tuple[str, Quantity] | None:
        for name, q in self.quantities.items():
            if not q.passed:
                return name, q
        return None

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "inputs": self.inputs,
            "quantities": {k: q.to_dict() for k, q in self.quantities.items()},
            "support_sizes": list(self.support_sizes),
            "details": self.details,
            "pass": self.passed,
            "wall_ms": int(self.wall_ms),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def summary(self) -> str:
        lines = [f"{self.experiment}: {'PASS' if self.passed else 'FAIL'}  ({self.wall_ms} ms)"]
        for name, q in self.quantities.items():
            mark = "ok " if q.passed else "BAD"
            op = {"eq": "==", "gt": ">", "le": "<="}[q.relation]
            lines.append(f"  [{mark}] {name} = {q.value:.12g}  ({op} {q.expected:g} tol {q.tolerance:g})")
        return "\n".join(lines)


class _Timer:
    def __init__(self, report: ExperimentReport):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.wall_ms = int(round(1000 * (time.perf_counter() - self.t0)))
        return False


def _inputs(lattice: Lattice, group: FiniteGroup, **extra) -> dict:
    return {"group": group.name, "lattice": lattice.to_dict(), **extra}


# -- preparation --------------------------------------------------------------------

def prepare_ground_state(lattice: Lattice, group: FiniteGroup, order: Sequence[int] | None = None) -> SparseState:
    """Run the preparation channel at every vertex, starting from all-identity."""
    if not lattice.is_connected():
        raise ValueError("ground-state preparation needs a connected lattice")
    verts = range(lattice.vertex_count) if order is None else order
    if sorted(verts) != list(range(lattice.vertex_count)):
        raise ValueError("vertex order must be a permutation of all vertices")
    state = initial_state(lattice, group)
    for v in verts:
        state = apply_channel_Ev(state, v)
    return state


def _worst(values) -> float:
    """The entry furthest from 1."""
    values = list(values)
    return min(values, key=lambda x: -abs(x - 1.0)) if values else 1.0


def verify_ground_state(state: SparseState, tolerance: float = TOL) -> ExperimentReport:
    """Certify all projector families (and the Z2 stabilizers) at +1."""
    lat, group = state.lattice, state.group
    rep = ExperimentReport("prepare-verify", _inputs(lat, group))
    with _Timer(rep):
        rep.track("state", state)
        em = [projector_expectation_pure(state, ProjectorSpec.EdgeMatch(e)) for e in range(lat.edge_count)]
        bk = [projector_expectation_pure(state, ProjectorSpec.Bf(f, KET)) for f in range(lat.face_count)]
        bb = [projector_expectation_pure(state, ProjectorSpec.Bf(f, BRA)) for f in range(lat.face_count)]
        da = [projector_expectation_pure(state, ProjectorSpec.DiagAv(v)) for v in range(lat.vertex_count)]
        rep.add("EdgeMatch (worst edge)", _worst(em), tolerance, 1.0)
        rep.add("Bf ket (worst face)", _worst(bk), tolerance, 1.0)
        rep.add("Bf bra (worst face)", _worst(bb), tolerance, 1.0)
        rep.add("DiagAv (worst vertex)", _worst(da), tolerance, 1.0)
        if group.order == 2:
            zz = [2 * x - 1 for x in em]
            zf = [projector_expectation_pure(state, ProjectorSpec.Zf(f, layer))
                  for f in range(lat.face_count) for layer in (KET, BRA)]
            xx = [projector_expectation_pure(state, ProjectorSpec.Xv(v, DIAG)) for v in range(lat.vertex_count)]
            rep.add("Z_e Z_ebar (worst edge)", _worst(zz), tolerance, 1.0)
            rep.add("Z_f ket/bra (worst face)", _worst(zf), tolerance, 1.0)
            rep.add("X_v X_vbar (worst vertex)", _worst(xx), tolerance, 1.0)
        rep.add("support size / |G|^(V-1)", len(state) / group.order ** (lat.vertex_count - 1), 0.0, 1.0)
        rep.details["per_vertex_DiagAv"] = da
    return rep


# -- abelian braiding -------------------------------------------------------------------

@dataclass
class AbelianGeometry:
    oz_path: list[int]
    ox_dual_path: list[int]
    wx_around: list[int]
    detect_face: int

    def to_dict(self) -> dict:
        return {"OZ": {"path": self.oz_path}, "OX": {"dual_path": self.ox_dual_path},
                "WX": {"around": self.wx_around}, "detect_face": self.detect_face}


def default_abelian_geometry(lattice: Lattice) -> AbelianGeometry:
    """Short Z path (0,0)->(1,0) crossed once by a vertical dual X path."""
    v1, v2 = lattice.vertex(0, 0), lattice.vertex(1, 0)
    faces = [lattice.face(0, -1), lattice.face(0, 0), lattice.face(0, 1)]
    return AbelianGeometry([v1, v2], faces, [v2], faces[0])


def abelian_braiding(lattice: Lattice, group: FiniteGroup, geometry: AbelianGeometry | None = None,
                     tolerance: float = TOL, state: SparseState | None = None) -> ExperimentReport:
    if group.order != 2:
        raise ValueError("abelian braiding runs on Z2")
    geometry = geometry or default_abelian_geometry(lattice)
    rep = ExperimentReport("braid-abelian", _inputs(lattice, group, geometry=geometry.to_dict()))
    with _Timer(rep):
        oz = build_OZ(lattice, geometry.oz_path)
        ox = build_OX(lattice, geometry.ox_dual_path)
        wx = build_WX(lattice, geometry.wx_around, oz)
        U = build_U(ox, oz, n_edges=lattice.edge_count, group=group)
        W = LinearOp([(1.0, wx)])
        OX, OZ = LinearOp([(1.0, ox)]), LinearOp([(1.0, oz)])

        rho = state if state is not None else prepare_ground_state(lattice, group)
        rep.track("rho", rho)
        n0 = norm(rho)
        rep.add("||(OZ x OZ)rho - rho||", distance(apply_doubled(rho, OZ), rho) / n0, tolerance)
        rep.add("||(WX x WX)rho - rho||", distance(apply_doubled(rho, W), rho) / n0, tolerance)

        a = apply_doubled(rho, U)
        rep.track("(UxU)rho", a)
        wa = apply_doubled(a, W)
        plus = combine([(0.5, a), (0.5, wa)])
        minus = combine([(0.5, a), (-0.5, wa)])
        plus_closed = combine([(0.5, rho), (0.5, apply_doubled(rho, OX))])
        minus_closed = combine([(0.5, apply_doubled(rho, OX, OZ)), (0.5, apply_doubled(rho, OZ, OX))])
        rep.add("||rho+ - (1 + OXxOX)rho/2||", distance(plus, plus_closed) / n0, tolerance)
        rep.add("||rho- - (OXxOZ + OZxOX)rho/2||", distance(minus, minus_closed) / n0, tolerance)
        rep.add("||(UxU)rho - (rho+ + rho-)||", distance(a, combine([(1, plus_closed), (1, minus_closed)])) / n0,
                tolerance)
        m2 = norm(minus_closed) ** 2
        sign = inner(minus_closed, apply_doubled(minus_closed, W)).real / m2 if m2 else float("nan")
        rep.add("<rho-|WxW|rho-> / <rho-|rho->", sign, tolerance, -1.0)
        rep.track("(WxW)(UxU)rho", wa)

        rho_p = apply_doubled(wa, U)
        rep.track("rho'", rho_p)
        rep.add("||rho' - (OXxOX)rho||", distance(rho_p, apply_doubled(rho, OX)) / n0, tolerance)
        f = geometry.detect_face
        rep.add("prob_down(rho)", ancilla_detect(rho, f, toric=True), tolerance, 0.0)
        rep.add("prob_down(rho')", ancilla_detect(rho_p, f, toric=True), tolerance, 1.0)
        rep.add("<Z_f>_rho'", expectation_in_rho(rho_p, ProjectorSpec.Zf(f)), tolerance, -1.0)
    return rep


# -- nonabelian braiding -------------------------------------------------------------------

def commutator_census(group: FiniteGroup, g: int, h: int) -> dict[int, float]:
    """Distribution of ``g h~ g^-1 h~^-1`` as ``h~`` runs over the class of ``h``."""
    cls = group.conjugacy_class(group.element(h))
    out: dict[int, float] = {}
    for ht in cls:
        c = group.commutator(group.element(g), ht)
        out[c] = out.get(c, 0.0) + 1.0 / len(cls)
    return dict(sorted(out.items()))


def default_nonabelian_geometry(lattice: Lattice) -> tuple[StringSpec, StringSpec]:
    """Loop ``C`` around face (0,0) based at (0,1); open ``L`` ending inside it.

    ``L`` walks (2,0) -> (1,0) and carries one tooth, the right edge of
    face (0,0), so its flux end sits in the face enclosed by ``C``.
    """
    loop = face_loop_spec(lattice, [lattice.face(0, 0)], lattice.vertex(0, 1))
    open_ = StringSpec(((lattice.h_edge(1, 0), -1),), ((lattice.v_edge(1, 0), 1, "out"),), False)
    return loop, open_


def seam_face(lattice: Lattice, loop: CheckedString) -> int:
    """Outer face on the last base edge of a closed comb, where braiding flux appears."""
    e_last, _ = loop.spec.base[-1]
    tooth_edges = {t for t, _, _ in loop.spec.teeth}
    cands = [f for f in lattice.edge_faces[e_last] if tooth_edges & {e for e, _ in lattice.faces[f]}]
    cands = sorted(set(cands))
    if len(cands) != 1:
        raise StringSpecError(f"cannot identify the seam face of the loop (candidates {cands})")
    return cands[0]


def nonabelian_braiding(lattice: Lattice, group: FiniteGroup, g, h, loop: StringSpec | None = None,
                        open_string: StringSpec | None = None, face: int | None = None,
                        tolerance: float = TOL, state: SparseState | None = None) -> ExperimentReport:
    """Compare ``rho1 = C(g) L(h) rho`` with ``rho2 = L(h) C(g) rho``."""
    if loop is None or open_string is None:
        d_loop, d_open = default_nonabelian_geometry(lattice)
        loop = loop or d_loop
        open_string = open_string or d_open
    g, h = group.element(g), group.element(h)
    C = validate_string_spec(lattice, loop)
    L = validate_string_spec(lattice, open_string)
    if not C.spec.closed or L.spec.closed:
        raise StringSpecError("need a closed loop C and an open string L")
    if lattice.is_torus:
        if not loop_class(lattice, C.spec).contractible:
            raise StringSpecError("C must be contractible")
    crossing = {e for e, _ in C.spec.base} & {t for t, _, _ in L.spec.teeth}
    if len(crossing) != 1:
        raise StringSpecError(f"L must cross the base of C exactly once, crosses {len(crossing)} times")
    f = seam_face(lattice, C) if face is None else face
    base_v = C.start if C.start in lattice.face_vertices[f] else None
    rep = ExperimentReport("braid-nonabelian", _inputs(
        lattice, group, g=group.label(g), h=group.label(h), loop=C.spec.to_dict(),
        open_string=L.spec.to_dict(), face=f))
    with _Timer(rep):
        rho = state if state is not None else prepare_ground_state(lattice, group)
        rep.track("rho", rho)
        cg, lh = CombMap(C, g), CombMap(L, h)
        rho_L = apply_map(rho, lh)
        rho_1 = apply_map(rho_L, cg)
        rho_2 = apply_map(apply_map(rho, cg), lh)
        rep.track("rho1", rho_1)
        rep.track("rho2", rho_2)
        bf = ProjectorSpec.Bf(f, base_vertex=base_v)
        b1 = expectation_in_rho(rho_1, bf)
        b2 = expectation_in_rho(rho_2, bf)
        census = commutator_census(group, g, h)
        predicted = census.get(group.identity, 0.0)
        rep.details["census"] = {group.label(k): v for k, v in census.items()}
        rep.details["census_identity_fraction"] = predicted
        rep.add("<B_f>(rho2)", b2, tolerance, 1.0)
        rep.add("<B_f>(rho1) vs census prediction", b1, tolerance, predicted)
        rep.add("prob_down(rho2)", ancilla_detect(rho_2, f, toric=False, base_vertex=base_v), tolerance, 0.0)
        rep.add("prob_down(rho1)", ancilla_detect(rho_1, f, toric=False, base_vertex=base_v), tolerance,
                1.0 - predicted)
        rep.details["<B_f>(rho1)"] = b1
        rep.details["<B_f>(rho2)"] = b2
        # faces touching the loop, minus f and the excitations L makes on its own
        near = sorted({q for v in C.base_vertices for q in range(lattice.face_count)
                       if v in lattice.face_vertices[q]} - {f})
        own = [q for q in near if expectation_in_rho(rho_L, ProjectorSpec.Bf(q)) < 1 - tolerance]
        rep.details["neighbor_faces"] = [q for q in near if q not in own]
        rep.details["faces_excited_by_L_alone"] = own
        for q in near:
            if q not in own:
                rep.add(f"<B_f'>(rho1), f'={q}", expectation_in_rho(rho_1, ProjectorSpec.Bf(q)), tolerance, 1.0)
        rep.details["rho1_equals_rho2"] = bool(distance(rho_1, rho_2) <= tolerance * norm(rho))
    return rep


# -- restricted excitations ------------------------------------------------------------------

def restricted_excitation_demo(state: SparseState, steps: Sequence[tuple[str, Callable[[SparseState], SparseState]]],
                               tolerance: float = TOL) -> ExperimentReport:
    """Apply ``steps`` in turn and watch the overlap with ``|I>`` and the layer-gluing projectors."""
    lat, group = state.lattice, state.group
    rep = ExperimentReport("restricted", _inputs(lat, group, steps=[name for name, _ in steps]))
    with _Timer(rep):
        history = []
        cur = state
        for i, (name, fn) in enumerate([("start", None)] + list(steps)):
            if fn is not None:
                cur = fn(cur)
            label = f"{i}:{name}"
            rep.track(label, cur)
            em = min(projector_expectation_pure(cur, ProjectorSpec.EdgeMatch(e)) for e in range(lat.edge_count))
            da = min(projector_expectation_pure(cur, ProjectorSpec.DiagAv(v)) for v in range(lat.vertex_count))
            rep.add(f"min EdgeMatch[{label}]", em, 0.0, 0.0, "gt")
            rep.add(f"min DiagAv[{label}]", da, 0.0, 0.0, "gt")
            if group.order == 2:
                rep.add(f"min Z_e Z_ebar[{label}]", 2 * em - 1, 0.0, -1.0, "gt")
                xx = min(projector_expectation_pure(cur, ProjectorSpec.Xv(v, DIAG)) for v in range(lat.vertex_count))
                rep.add(f"min X_v X_vbar[{label}]", xx, 0.0, -1.0, "gt")
            history.append({"step": label, "overlap_I": overlap_with_I(cur).real, "min_EdgeMatch": em,
                            "min_DiagAv": da})
        rep.details["history"] = history
    return rep


# -- elongation ------------------------------------------------------------------------------

def default_elongation_geometry(lattice: Lattice):
    """Straight comb (0,0)->(2,0) with upward teeth, extended by one edge to (3,0)."""
    spec = StringSpec(
        ((lattice.h_edge(0, 0), 1), (lattice.h_edge(1, 0), 1)),
        ((lattice.v_edge(0, 0), 0, "out"), (lattice.v_edge(1, 0), 1, "out"), (lattice.v_edge(2, 0), 2, "out")),
    )
    return spec, (lattice.h_edge(2, 0), 1), [(lattice.v_edge(3, 0), "out")]


def elongation_check(lattice: Lattice, groups: Sequence[FiniteGroup], spec: StringSpec | None = None,
                     extension=None, new_teeth=None, samples: int = 200, seed: int = 0,
                     tolerance: float = TIGHT) -> ExperimentReport:
    if spec is None:
        spec, extension, new_teeth = default_elongation_geometry(lattice)
    rep = ExperimentReport("elongation-check", {"groups": [G.name for G in groups], "lattice": lattice.to_dict(),
                                                "string": spec.to_dict(), "extension": list(extension),
                                                "new_teeth": [list(t) for t in new_teeth], "samples": samples})
    with _Timer(rep):
        longer, emap = elongate_spec(lattice, spec, tuple(extension), [tuple(t) for t in new_teeth])
        for G in groups:
            best, defects = calibrate_elongation(lattice, G, spec, longer, emap, samples=samples, seed=seed)
            rep.details[f"flag[{G.name}]"] = list(best.flag)
            rep.details[f"flag_defects[{G.name}]"] = {f"{p},{s}": d for (p, s), d in defects.items()}
            rep.add(f"E^-1 A_L E vs A_L' defect [{G.name}]", defects[best.flag], tolerance)
            # round trip on random single-layer configurations
            rng = np.random.default_rng(seed)
            cols = rng.integers(0, G.order, size=(samples, lattice.edge_count))
            back = best.inverse(G).apply(best.apply(cols, G)[0], G)[0]
            rep.add(f"E^-1 E round trip [{G.name}]", float((back != cols).any(axis=1).mean()), tolerance)
    return rep


# -- U_n ----------------------------------------------------------------------------------------

def un_check(n_max: int = 6, tolerance: float = TIGHT) -> ExperimentReport:
    rep = ExperimentReport("un-check", {"n_max": n_max})
    with _Timer(rep):
        for n in range(1, n_max + 1):
            rep.add(f"||U_{n} - (X_1 + Z_1..Z_{n})/sqrt2||", np.abs(build_Un(n) - un_closed_form(n)).max(), tolerance)
        c = cnot(1, 2, 2)
        rep.add("CNOT Z_j CNOT - Z_i Z_j", np.abs(c @ pauli({2: "Z"}, 2) @ c - pauli({1: "Z", 2: "Z"}, 2)).max(),
                tolerance)
        rep.add("CNOT X_j CNOT - X_j", np.abs(c @ pauli({2: "X"}, 2) @ c - pauli({2: "X"}, 2)).max(), tolerance)
    return rep


# -- purification -------------------------------------------------------------------------------

def purification_experiment(cases: Sequence[tuple[FiniteGroup, Sequence[bool]]], seed: int = 0,
                            tolerance: float = TIGHT) -> ExperimentReport:
    rep = ExperimentReport("purification-check", {"cases": [[G.name, list(map(bool, o))] for G, o in cases],
                                                  "seed": seed})
    with _Timer(rep):
        rng = np.random.default_rng(seed)
        for G, orient in cases:
            rep.add(f"purification defect [{G.name}, degree {len(orient)}]",
                    purification_check(G, orient, rng=rng), tolerance)
    return rep
