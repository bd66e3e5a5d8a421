import pytest

from qdouble.lattice import (
    IN,
    OUT,
    Lattice,
    LatticeError,
    StringSpec,
    StringSpecError,
    charge_comb_spec,
    face_boundary,
    face_loop_spec,
    loop_class,
    torus,
    validate_string_spec,
)


@pytest.mark.parametrize("lx,ly", [(2, 2), (3, 3), (2, 4), (5, 3)])
def test_torus_counts(lx, ly):
    lat = torus(lx, ly)
    assert (lat.vertex_count, lat.edge_count, lat.face_count) == (lx * ly, 2 * lx * ly, lx * ly)
    assert lat.euler_characteristic == 0
    assert lat.is_torus and lat.is_connected()
    for e in range(lat.edge_count):
        assert len(lat.edge_faces[e]) == 2
        assert sum(s for f in lat.edge_faces[e] for x, s in lat.faces[f] if x == e) == 0
    for star in lat.star:
        assert len(star) == 4
        assert sum(out for _, out in star) == 2


@pytest.mark.parametrize("shape", [(1, 3), (3, 1), (0, 0)])
def test_torus_too_small(shape):
    with pytest.raises(LatticeError):
        torus(*shape)


def test_unit_square_signs():
    # a single square glued to itself is not closed, so build it open
    lat = Lattice(4, [(0, 1), (1, 2), (3, 2), (0, 3)], [[(0, 1), (1, 1), (2, -1), (3, -1)]],
                  closed_surface=False)
    assert face_boundary(lat, 0, 0) == [(0, 1), (1, 1), (2, -1), (3, -1)]
    aligned = Lattice(4, [(0, 1), (1, 2), (2, 3), (3, 0)], [[(0, 1), (1, 1), (2, 1), (3, 1)]],
                      closed_surface=False)
    assert all(s == 1 for _, s in face_boundary(aligned, 0, 0))


def test_face_boundary_rotation(t33):
    f = t33.face(1, 1)
    start = face_boundary(t33, f, t33.vertex(1, 1))
    opposite = face_boundary(t33, f, t33.vertex(2, 2))
    assert opposite == start[2:] + start[:2]
    assert len(face_boundary(torus(2, 2), 0, 0)) == 4
    with pytest.raises(LatticeError):
        face_boundary(t33, f, t33.vertex(0, 0))


def test_lattice_validation_errors():
    with pytest.raises(LatticeError, match="closed walk"):
        Lattice(3, [(0, 1), (1, 2)], [[(0, 1), (1, -1)]], closed_surface=False)
    with pytest.raises(LatticeError, match="exactly two"):
        Lattice(3, [(0, 1), (1, 2), (2, 0)], [[(0, 1), (1, 1), (2, 1)]])
    with pytest.raises(LatticeError):
        Lattice(2, [(0, 5)], [])


def test_dict_round_trip(t22):
    assert Lattice.from_dict(t22.to_dict()).edges == t22.edges
    explicit = {"vertices": t22.vertex_count, "edges": [list(e) for e in t22.edges],
                "faces": [[list(x) for x in f] for f in t22.faces]}
    again = Lattice.from_dict(explicit)
    assert again.faces == t22.faces and not again.is_torus


def test_straight_comb_valid(t33):
    spec = StringSpec(((t33.h_edge(0, 0), 1), (t33.h_edge(1, 0), 1)), ((t33.v_edge(1, 0), 1, OUT),))
    checked = validate_string_spec(t33, spec)
    assert checked.base_vertices == (0, 1, 2)
    assert checked.tooth_vertices == (1,)


@pytest.mark.parametrize("spec,msg", [
    (StringSpec(((0, 1), (4, 1))), "disconnected"),
    (StringSpec(((0, 1),), ((0, 0, OUT),)), "also a base edge"),
    (StringSpec(((0, 1),), ((5, 0, OUT),)), "not outgoing"),
    (StringSpec(((0, 1),), ((1, 0, IN),)), "not ingoing"),
    (StringSpec(((0, 1),), ((1, 3, OUT),)), "attach index"),
    (StringSpec(((0, 1),), ((1, 0, OUT), (1, 0, OUT))), "twice"),
    (StringSpec(((0, 1),), ((1, 0, "up"),)), "orientation"),
    (StringSpec(((0, 1), (2, 1)), (), True), "return"),
    (StringSpec(((99, 1),)), "out of range"),
])
def test_string_errors(t33, spec, msg):
    with pytest.raises(StringSpecError, match=msg):
        validate_string_spec(t33, spec)


def test_face_loop_is_closed_and_contractible(t33):
    spec = face_loop_spec(t33, [t33.face(1, 1)], t33.vertex(1, 1))
    checked = validate_string_spec(t33, spec)
    assert spec.closed and checked.start == checked.end
    assert len(spec.base) == 4 and len(spec.teeth) == 8
    inside = {e for e, _ in t33.faces[t33.face(1, 1)]}
    assert all(e not in inside for e, _, _ in spec.teeth)
    assert loop_class(t33, spec).contractible
    cw = face_loop_spec(t33, [t33.face(1, 1)], t33.vertex(1, 1), clockwise=True)
    assert loop_class(t33, cw).winding == (0, 0)


def test_two_face_region(t33):
    spec = face_loop_spec(t33, [t33.face(0, 0), t33.face(1, 0)], t33.vertex(0, 0))
    assert len(spec.base) == 6
    assert loop_class(t33, spec).contractible


def test_windings(t33):
    horiz = StringSpec(tuple((t33.h_edge(x, 0), 1) for x in range(3)), (), True)
    vert = StringSpec(tuple((t33.v_edge(0, y), 1) for y in range(3)), (), True)
    back = StringSpec(tuple((t33.h_edge(x, 1), -1) for x in reversed(range(3))), (), True)
    assert loop_class(t33, horiz).winding == (1, 0)
    assert loop_class(t33, vert).winding == (0, 1)
    assert loop_class(t33, back).winding == (-1, 0)
    with pytest.raises(StringSpecError):
        loop_class(t33, StringSpec(((0, 1),)))


def test_winding_additive(t33):
    # loop around the x-cycle then the y-cycle, both from the origin
    a = tuple((t33.h_edge(x, 0), 1) for x in range(3))
    b = tuple((t33.v_edge(0, y), 1) for y in range(3))
    both = StringSpec(a + b, (), True)
    wa = loop_class(t33, StringSpec(a, (), True)).winding
    wb = loop_class(t33, StringSpec(b, (), True)).winding
    assert loop_class(t33, both).winding == (wa[0] + wb[0], wa[1] + wb[1])


def test_charge_comb_takes_all_other_edges(t33):
    spec = charge_comb_spec(t33, [(t33.h_edge(0, 0), 1)])
    validate_string_spec(t33, spec)
    assert len(spec.teeth) == 6


def test_string_spec_dict_round_trip():
    spec = StringSpec(((0, 1), (2, 1)), ((1, 1, "out"), (7, 0, "in")), False)
    assert StringSpec.from_dict(spec.to_dict()) == spec
