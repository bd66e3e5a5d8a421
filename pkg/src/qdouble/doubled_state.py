"""Sparse vectorized density matrices on a lattice of group-valued edges.

A :class:`SparseState` is ``|rho> = sum rho_ij |i>|j>`` restricted to its
support.  Each stored configuration is a row of ``2E`` group elements
(``E`` ket edges followed by ``E`` bra edges) packed into int64 words by a
mixed-radix :class:`Codec`.  Rows are kept unique and sorted by key.

States are tracked un-normalized through channels; normalize only when
comparing or measuring.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .group_core import FiniteGroup
from .lattice import Lattice

__all__ = [
    "Codec",
    "DoubledConfig",
    "SparseState",
    "DenseDensity",
    "initial_state",
    "inner",
    "norm",
    "normalize",
    "prune",
    "distance",
    "trace_of_rho",
    "overlap_with_I",
    "hermiticity_defect",
    "to_dense",
    "psd_defect",
    "dump_jsonl",
    "load_jsonl",
    "set_num_threads",
    "get_num_threads",
    "PRUNE_EPS",
    "DENSE_MAX_DIM",
]

PRUNE_EPS = 1e-14
DENSE_MAX_DIM = 4096

_THREADS = 1


def set_num_threads(n: int) -> None:
    """Worker threads used when fanning a state out over many maps."""
    global _THREADS
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _THREADS = int(n)


def get_num_threads() -> int:
    return _THREADS


def parallel_map(fn: Callable, items: Sequence) -> list:
    """``[fn(x) for x in items]``, threaded; output order never depends on the pool."""
    if _THREADS <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_THREADS) as pool:
        return list(pool.map(fn, items))


class Codec:
    """Mixed-radix packing of digit rows into fixed-width int64 words."""

    def __init__(self, base: int, width: int):
        self.base = int(base)
        self.width = int(width)
        if self.base <= 1:
            self.per_word = max(self.width, 1)
        else:
            self.per_word = max(1, int(63 * math.log(2) / math.log(self.base)))
            while self.base ** self.per_word >= 2 ** 63:
                self.per_word -= 1
        self.words = max(1, -(-self.width // self.per_word))
        self.dtype = np.uint8 if self.base <= 256 else np.int32

    def encode(self, digits: np.ndarray) -> np.ndarray:
        n = digits.shape[0]
        out = np.zeros((n, self.words), dtype=np.int64)
        for w in range(self.words):
            lo = w * self.per_word
            hi = min(lo + self.per_word, self.width)
            acc = np.zeros(n, dtype=np.int64)
            for d in range(hi - 1, lo - 1, -1):
                acc *= self.base
                acc += digits[:, d]
            out[:, w] = acc
        return out

    def decode(self, keys: np.ndarray) -> np.ndarray:
        n = keys.shape[0]
        out = np.empty((n, self.width), dtype=self.dtype)
        for w in range(self.words):
            lo = w * self.per_word
            hi = min(lo + self.per_word, self.width)
            acc = keys[:, w].copy()
            for d in range(lo, hi):
                if self.base > 1:
                    acc, r = np.divmod(acc, self.base)
                    out[:, d] = r
                else:
                    out[:, d] = 0
        return out

    def sortable(self, keys: np.ndarray) -> np.ndarray:
        """1-D array whose ordering and equality match the key rows."""
        if self.words == 1:
            return keys[:, 0]
        keys = np.ascontiguousarray(keys)
        return keys.view(np.dtype((np.void, 8 * self.words))).ravel()


class DoubledConfig(NamedTuple):
    ket: tuple[int, ...]
    bra: tuple[int, ...]


class SparseState:
    """Immutable sparse vector over doubled configurations.

    Build with :meth:`from_configs` (merges duplicate rows) or
    :func:`initial_state`.
    """

    __slots__ = ("lattice", "group", "codec", "keys", "amps", "_sort", "_configs")

    def __init__(self, lattice: Lattice, group: FiniteGroup, keys: np.ndarray, amps: np.ndarray,
                 _sort: np.ndarray | None = None, _configs: np.ndarray | None = None):
        # callers guarantee keys are unique and sorted
        self.lattice = lattice
        self.group = group
        self.codec = _codec(lattice, group)
        self.keys = keys
        self.amps = amps
        self._sort = _sort if _sort is not None else self.codec.sortable(keys)
        self._configs = _configs

    # -- construction ------------------------------------------------------
    @classmethod
    def from_keys(cls, lattice, group, keys, amps, *, eps: float = PRUNE_EPS,
                  configs: np.ndarray | None = None) -> "SparseState":
        codec = _codec(lattice, group)
        amps = np.asarray(amps, dtype=np.complex128)
        if len(amps) == 0:
            return cls(lattice, group, np.zeros((0, codec.words), np.int64), amps)
        srt = codec.sortable(keys)
        uniq, first, inverse = np.unique(srt, return_index=True, return_inverse=True)
        if len(uniq) == len(srt):
            summed = amps[first]
        else:
            inverse = inverse.ravel()
            re = np.bincount(inverse, weights=amps.real, minlength=len(uniq))
            im = np.bincount(inverse, weights=amps.imag, minlength=len(uniq))
            summed = re + 1j * im
        keep = np.abs(summed) >= eps if eps > 0 else np.ones(len(summed), bool)
        rows = first[keep]
        cfg = None if configs is None else np.ascontiguousarray(configs[rows], dtype=codec.dtype)
        return cls(lattice, group, np.ascontiguousarray(keys[rows]), summed[keep], uniq[keep], cfg)

    @classmethod
    def from_configs(cls, lattice, group, configs, amps, *, eps: float = PRUNE_EPS) -> "SparseState":
        configs = np.asarray(configs)
        codec = _codec(lattice, group)
        if configs.ndim != 2 or configs.shape[1] != codec.width:
            raise ValueError(f"configs must have shape (N, {codec.width})")
        if configs.size and (configs.min() < 0 or configs.max() >= group.order):
            raise ValueError("configuration holds an element outside the group")
        return cls.from_keys(lattice, group, codec.encode(configs), amps, eps=eps, configs=configs)

    @classmethod
    def from_dict(cls, lattice, group, mapping: dict) -> "SparseState":
        """Build from ``{(ket, bra): amplitude}``."""
        items = list(mapping.items())
        E = lattice.edge_count
        configs = np.array([list(k) + list(b) for (k, b), _ in items], dtype=np.int64).reshape(-1, 2 * E)
        return cls.from_configs(lattice, group, configs, [a for _, a in items], eps=0.0)

    # -- views -------------------------------------------------------------
    @property
    def configs(self) -> np.ndarray:
        if self._configs is None:
            self._configs = self.codec.decode(self.keys)
        return self._configs

    @property
    def ket(self) -> np.ndarray:
        return self.configs[:, : self.lattice.edge_count]

    @property
    def bra(self) -> np.ndarray:
        return self.configs[:, self.lattice.edge_count:]

    def __len__(self) -> int:
        return len(self.amps)

    @property
    def support_size(self) -> int:
        return len(self.amps)

    def __repr__(self) -> str:
        return f"SparseState(support={len(self)}, group={self.group.name}, {self.lattice!r})"

    def items(self) -> Iterator[tuple[DoubledConfig, complex]]:
        E = self.lattice.edge_count
        for row, a in zip(self.configs, self.amps):
            yield DoubledConfig(tuple(int(x) for x in row[:E]), tuple(int(x) for x in row[E:])), complex(a)

    def to_dict(self) -> dict:
        return dict(self.items())

    def lookup(self, configs: np.ndarray) -> np.ndarray:
        """Amplitudes at the given rows, zero where not stored."""
        if len(self) == 0 or len(configs) == 0:
            return np.zeros(len(configs), dtype=np.complex128)
        q = self.codec.sortable(self.codec.encode(configs))
        idx = np.searchsorted(self._sort, q)
        idx = np.minimum(idx, len(self) - 1)
        hit = self._sort[idx] == q
        return np.where(hit, self.amps[idx], 0.0)

    def amplitude(self, ket: Sequence[int], bra: Sequence[int]) -> complex:
        row = np.array([list(ket) + list(bra)])
        return complex(self.lookup(row)[0])

    def same_context(self, other: "SparseState") -> bool:
        return self.lattice is other.lattice and self.group is other.group

    # -- algebra -----------------------------------------------------------
    def scaled(self, c: complex) -> "SparseState":
        return SparseState(self.lattice, self.group, self.keys, self.amps * c, self._sort, self._configs)

    def with_configs(self, configs: np.ndarray, amps: np.ndarray, *, eps: float = PRUNE_EPS) -> "SparseState":
        return SparseState.from_configs(self.lattice, self.group, configs, amps, eps=eps)

    def __add__(self, other: "SparseState") -> "SparseState":
        return combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: "SparseState") -> "SparseState":
        return combine([(1.0, self), (-1.0, other)])

    def __mul__(self, c: complex) -> "SparseState":
        return self.scaled(c)

    __rmul__ = __mul__


def _codec(lattice: Lattice, group: FiniteGroup) -> Codec:
    return Codec(group.order, 2 * lattice.edge_count)


def _require_same(a: SparseState, b: SparseState) -> None:
    if a.lattice is not b.lattice and a.lattice.to_dict() != b.lattice.to_dict():
        raise ValueError("states live on different lattices")
    if a.group is not b.group and not np.array_equal(a.group.mul_table, b.group.mul_table):
        raise ValueError("states use different groups")


def combine(terms: Iterable[tuple[complex, SparseState]], *, eps: float = PRUNE_EPS) -> SparseState:
    """Linear combination ``sum c_k |s_k>``."""
    terms = list(terms)
    first = terms[0][1]
    for _, s in terms[1:]:
        _require_same(first, s)
    keys = np.concatenate([s.keys for _, s in terms])
    amps = np.concatenate([c * s.amps for c, s in terms])
    return SparseState.from_keys(first.lattice, first.group, keys, amps, eps=eps)


def initial_state(lattice: Lattice, group: FiniteGroup) -> SparseState:
    """Every edge in the identity, both layers, amplitude 1."""
    configs = np.zeros((1, 2 * lattice.edge_count), dtype=np.int64)
    return SparseState.from_configs(lattice, group, configs, [1.0])


def inner(a: SparseState, b: SparseState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _require_same(a, b)
    if len(a) == 0 or len(b) == 0:
        return 0j
    common, ia, ib = np.intersect1d(a._sort, b._sort, assume_unique=True, return_indices=True)
    return complex(np.sum(np.conj(a.amps[ia]) * b.amps[ib]))


def norm(a: SparseState) -> float:
    return float(np.sqrt(np.sum(np.abs(a.amps) ** 2)))


def normalize(a: SparseState) -> SparseState:
    n = norm(a)
    if n == 0.0:
        raise ZeroDivisionError("cannot normalize the zero state")
    return a.scaled(1.0 / n)


def prune(a: SparseState, eps: float = PRUNE_EPS) -> SparseState:
    keep = np.abs(a.amps) >= eps
    if keep.all():
        return a
    cfg = a._configs[keep] if a._configs is not None else None
    return SparseState(a.lattice, a.group, a.keys[keep], a.amps[keep], a._sort[keep], cfg)


def distance(a: SparseState, b: SparseState) -> float:
    """``|| |a> - |b> ||``."""
    return norm(combine([(1.0, a), (-1.0, b)], eps=0.0))


def _diagonal_mask(state: SparseState) -> np.ndarray:
    E = state.lattice.edge_count
    cfg = state.configs
    return (cfg[:, :E] == cfg[:, E:]).all(axis=1)


def trace_of_rho(state: SparseState) -> complex:
    """``sum_i rho_ii`` of the un-normalized vectorized density matrix."""
    if len(state) == 0:
        return 0j
    return complex(state.amps[_diagonal_mask(state)].sum())


def hilbert_dimension(state: SparseState) -> int:
    return state.group.order ** state.lattice.edge_count


def overlap_with_I(state: SparseState) -> complex:
    """``<I|rho> / ||rho||`` with ``|I> = D^-1/2 sum_i |i>|i>``, never materialized."""
    n = norm(state)
    if n == 0.0:
        return 0j
    log_d = state.lattice.edge_count * math.log(state.group.order)
    return trace_of_rho(state) * math.exp(-0.5 * log_d) / n


def hermiticity_defect(state: SparseState) -> float:
    """``max |rho_ij - conj(rho_ji)|`` over the stored support."""
    if len(state) == 0:
        return 0.0
    E = state.lattice.edge_count
    cfg = state.configs
    swapped = np.concatenate([cfg[:, E:], cfg[:, :E]], axis=1)
    mirror = state.lookup(swapped)
    return float(np.max(np.abs(state.amps - np.conj(mirror))))


class DenseDensity:
    """A ``D x D`` density matrix, rows/columns indexed by the layer codes."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) if self.dim else 0.0


def _layer_index(digits: np.ndarray, base: int) -> np.ndarray:
    idx = np.zeros(len(digits), dtype=np.int64)
    for d in range(digits.shape[1] - 1, -1, -1):
        idx = idx * base + digits[:, d]
    return idx


def to_dense(state: SparseState) -> DenseDensity:
    D = hilbert_dimension(state)
    if D > DENSE_MAX_DIM:
        raise ValueError(f"dense dimension {D} exceeds the cap {DENSE_MAX_DIM}")
    rho = np.zeros((D, D), dtype=np.complex128)
    if len(state):
        base = state.group.order
        rho[_layer_index(state.ket, base), _layer_index(state.bra, base)] = state.amps
    return DenseDensity(rho)


def psd_defect(dense: DenseDensity) -> float:
    """``max(0, -lambda_min)`` of the hermitian part."""
    if dense.dim == 0:
        return 0.0
    h = 0.5 * (dense.matrix + dense.matrix.conj().T)
    return max(0.0, -float(np.linalg.eigvalsh(h)[0]))


def dump_jsonl(state: SparseState, fh) -> None:
    for (ket, bra), a in state.items():
        fh.write(json.dumps({"ket": list(ket), "bra": list(bra), "re": a.real, "im": a.imag}) + "\n")


def load_jsonl(lattice: Lattice, group: FiniteGroup, fh) -> SparseState:
    mapping = {}
    for line in fh:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        key = (tuple(rec["ket"]), tuple(rec["bra"]))
        mapping[key] = mapping.get(key, 0) + complex(rec["re"], rec["im"])
    return SparseState.from_dict(lattice, group, mapping)
