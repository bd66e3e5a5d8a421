import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdouble.doubled_state import (
    Codec,
    SparseState,
    combine,
    distance,
    dump_jsonl,
    get_num_threads,
    hermiticity_defect,
    initial_state,
    inner,
    load_jsonl,
    norm,
    normalize,
    overlap_with_I,
    prune,
    psd_defect,
    set_num_threads,
    to_dense,
    trace_of_rho,
)
from qdouble.experiments import prepare_ground_state
from qdouble.lattice import Lattice, torus
from qdouble.operators import apply_channel_Ev


def _single(lat, group, ket, bra, amp=1.0):
    return SparseState.from_dict(lat, group, {(tuple(ket), tuple(bra)): amp})


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 300), st.integers(1, 40), st.data())
def test_codec_round_trip_and_order(base, width, data):
    codec = Codec(base, width)
    rows = np.array(data.draw(st.lists(st.lists(st.integers(0, base - 1), min_size=width, max_size=width),
                                       min_size=1, max_size=8)), dtype=np.int64)
    keys = codec.encode(rows)
    assert np.array_equal(codec.decode(keys).astype(np.int64), rows)
    sk = codec.sortable(keys)
    for i in range(len(rows)):
        for j in range(len(rows)):
            assert (sk[i] == sk[j]) == bool((rows[i] == rows[j]).all())


def test_initial_state(t22, z2, s3):
    for g in (z2, s3):
        s = initial_state(t22, g)
        assert len(s) == 1
        assert trace_of_rho(s) == 1
        assert s.amplitude([0] * 8, [0] * 8) == 1


def test_overlap_examples(t22, z2):
    assert overlap_with_I(initial_state(t22, z2)) == pytest.approx(2 ** -4, abs=1e-15)
    off = _single(t22, z2, [1] + [0] * 7, [0] * 8)
    assert overlap_with_I(off) == 0


def test_inner_norm_prune(t22, z2):
    a = _single(t22, z2, [0] * 8, [0] * 8, 2.0)
    b = _single(t22, z2, [1] * 8, [0] * 8, 1j)
    assert inner(a, a) == pytest.approx(norm(a) ** 2)
    assert inner(a, b) == 0
    mix = combine([(1, a), (1, b)])
    assert inner(mix, b) == pytest.approx(1.0)
    assert inner(b, mix) == pytest.approx(np.conj(inner(mix, b)))
    n = normalize(mix)
    assert norm(n) == pytest.approx(1.0)
    assert distance(normalize(n), n) < 1e-15
    assert prune(mix, 0.0) is mix
    assert len(prune(combine([(1, a), (1e-16, b)], eps=0.0))) == 1
    with pytest.raises(ZeroDivisionError):
        normalize(a - a)


def test_merging_cancels(t22, z2):
    a = _single(t22, z2, [0] * 8, [0] * 8)
    assert len(a - a) == 0
    assert trace_of_rho(a - a) == 0


def test_hermiticity_defect(t22, z2):
    c1, c2 = [1] + [0] * 7, [0] * 8
    lone = _single(t22, z2, c1, c2, 1j)
    assert hermiticity_defect(lone) == pytest.approx(1.0)
    pair = SparseState.from_dict(t22, z2, {(tuple(c1), tuple(c2)): 1j, (tuple(c2), tuple(c1)): -1j})
    assert hermiticity_defect(pair) == 0
    assert hermiticity_defect(initial_state(t22, z2)) == 0


def test_channel_keeps_trace(t22, z2, s3):
    for g in (z2, s3):
        s = initial_state(t22, g)
        for v in range(t22.vertex_count):
            s = apply_channel_Ev(s, v)
            assert abs(trace_of_rho(s) - 1) < 1e-12


def test_dense_fallback(t22, z2, s3):
    init = to_dense(initial_state(t22, z2))
    assert init.dim == 256
    assert np.allclose(init.matrix @ init.matrix, init.matrix)
    assert psd_defect(init) == 0
    with pytest.raises(ValueError):
        to_dense(initial_state(t22, s3))


def test_mini_lattice_psd(z2):
    # two vertices joined by two edges: a sphere made of two faces
    lat = Lattice(2, [(0, 1), (0, 1)], [[(0, 1), (1, -1)], [(1, 1), (0, -1)]])
    rho = prepare_ground_state(lat, z2)
    dense = to_dense(rho)
    assert dense.dim == 4
    assert psd_defect(dense) <= 1e-10
    assert dense.hermiticity_defect() == pytest.approx(hermiticity_defect(rho), abs=1e-12)


def test_psd_after_preparation(z2_ground_22):
    dense = to_dense(z2_ground_22)
    assert psd_defect(dense) <= 1e-10
    assert abs(np.trace(dense.matrix) - 1) < 1e-12


def test_jsonl_round_trip(z2_ground_22):
    buf = io.StringIO()
    dump_jsonl(z2_ground_22, buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == len(z2_ground_22)
    assert set(json.loads(lines[0])) == {"ket", "bra", "re", "im"}
    back = load_jsonl(z2_ground_22.lattice, z2_ground_22.group, io.StringIO(buf.getvalue()))
    assert distance(back, z2_ground_22) < 1e-15


def test_threads_do_not_change_results(s3):
    lat = torus(2, 2)
    before = get_num_threads()
    try:
        set_num_threads(1)
        a = prepare_ground_state(lat, s3)
        set_num_threads(3)
        b = prepare_ground_state(lat, s3)
    finally:
        set_num_threads(before)
    assert np.array_equal(a.keys, b.keys)
    assert np.max(np.abs(a.amps - b.amps)) <= 1e-12
    with pytest.raises(ValueError):
        set_num_threads(0)


def test_multiword_keys_behave(s3):
    # torus(3,3) with S3 needs two words per row
    lat = torus(3, 3)
    s = initial_state(lat, s3)
    assert s.codec.words > 1
    s = apply_channel_Ev(apply_channel_Ev(s, 0), 4)
    assert len(s) == 36
    assert math.isclose(trace_of_rho(s).real, 1.0, abs_tol=1e-12)
    assert hermiticity_defect(s) == 0
