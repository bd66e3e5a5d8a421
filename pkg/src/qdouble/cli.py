"""Command-line front end: ``qdouble run <config.json>`` and ``qdouble list``.

Exit codes: 0 when every reported quantity passes, 1 on a numerical
failure, 2 when the configuration is invalid.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable

from . import experiments as ex
from .doubled_state import initial_state, set_num_threads
from .group_core import FiniteGroup, GroupAxiomError, GroupSyntaxError, builtin_group, load_group
from .lattice import Lattice, LatticeError, StringSpec, StringSpecError, torus, validate_string_spec
from .operators import (
    LinearOp,
    OperatorError,
    apply_channel_Ev,
    apply_doubled,
    apply_map,
    build_OX,
    build_OZ,
    build_U,
    build_WX,
    gauge_map,
)
from .string_ops import CombMap


class ConfigError(ValueError):
    """Invalid configuration; ``path`` points at the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ExperimentInfo:
    name: str
    summary: str
    geometry: tuple[str, ...]


CATALOG = (
    ExperimentInfo("prepare-verify", "prepare the ground state and certify every projector family",
                   ("order (optional vertex order)",)),
    ExperimentInfo("braid-abelian", "Z2 braiding of an X-string endpoint around a Z-string endpoint",
                   ("OZ.path", "OX.dual_path", "WX.around", "detect_face")),
    ExperimentInfo("braid-nonabelian", "compare loop-then-string with string-then-loop and read the seam flux",
                   ("g", "h", "loop", "open_string", "face (optional)", "stretch (optional)")),
    ExperimentInfo("restricted", "track the overlap with the identity through a sequence of operations",
                   ("start", "steps")),
    ExperimentInfo("elongation-check", "check that conjugating a comb by E gives the extended comb",
                   ("groups", "string", "extension", "new_teeth", "samples")),
    ExperimentInfo("un-check", "compare the CNOT construction of U_n with its closed form",
                   ("n_max",)),
    ExperimentInfo("purification-check", "compare the dilated vertex unitary with the vertex channel",
                   ("cases",)),
)
EXPERIMENTS = tuple(info.name for info in CATALOG)


# -- config helpers ----------------------------------------------------------------------

def _get(block: dict, key: str, path: str, kind=None, default: Any = ...):
    if key not in block:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "required field is missing")
        return default
    value = block[key]
    if kind is not None and not isinstance(value, kind) or isinstance(value, bool) and kind in (int, float):
        raise ConfigError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _index(value, limit: int, path: str, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"{what} id must be an integer")
    if not 0 <= value < limit:
        raise ConfigError(path, f"{what} {value} does not exist (valid 0..{limit - 1})")
    return value


def _index_list(values, limit: int, path: str, what: str) -> list[int]:
    if not isinstance(values, list):
        raise ConfigError(path, "expected a list")
    return [_index(v, limit, f"{path}[{i}]", what) for i, v in enumerate(values)]


def resolve_group(spec, path: str = "group", base_dir: str = ".") -> FiniteGroup:
    """A built-in name (``Z2``, ``S3``, ``D4``, ``Q8``, ``Zn`` + ``n``) or a group-file path."""
    try:
        if isinstance(spec, dict):
            return builtin_group(str(_get(spec, "name", path, str)), spec.get("n"))
        if not isinstance(spec, str):
            raise ConfigError(path, "expected a group name or file path")
        try:
            return builtin_group(spec)
        except (ValueError, KeyError):
            pass
        file = spec if os.path.isabs(spec) else os.path.join(base_dir, spec)
        if not os.path.exists(file):
            raise ConfigError(path, f"{spec!r} is neither a built-in group nor an existing file")
        return load_group(file)
    except (GroupAxiomError, GroupSyntaxError, ValueError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(path, str(err)) from None


def resolve_lattice(spec, path: str = "lattice") -> Lattice:
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object")
    try:
        if spec.get("type") == "torus":
            lx, ly = _get(spec, "lx", path, int), _get(spec, "ly", path, int)
            if lx < 1 or ly < 1:
                raise ConfigError(path, "torus dimensions must be positive")
            return torus(lx, ly)
        for key in ("vertices", "edges", "faces"):
            _get(spec, key, path)
        return Lattice.from_dict(spec)
    except (LatticeError, TypeError, ValueError, IndexError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(path, f"invalid lattice: {err}") from None


def resolve_string(lattice: Lattice, spec, path: str) -> StringSpec:
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected a string object with base/teeth/closed")
    for i, item in enumerate(spec.get("base", [])):
        if not isinstance(item, list) or len(item) != 2:
            raise ConfigError(f"{path}.base[{i}]", "expected [edge, sign]")
        _index(item[0], lattice.edge_count, f"{path}.base[{i}][0]", "edge")
    for i, item in enumerate(spec.get("teeth", [])):
        if not isinstance(item, list) or len(item) != 3:
            raise ConfigError(f"{path}.teeth[{i}]", "expected [edge, attach_index, \"out\"|\"in\"]")
        _index(item[0], lattice.edge_count, f"{path}.teeth[{i}][0]", "edge")
    try:
        out = StringSpec.from_dict(spec)
        validate_string_spec(lattice, out)
    except (StringSpecError, TypeError, ValueError) as err:
        raise ConfigError(path, str(err)) from None
    return out


def _element(group: FiniteGroup, value, path: str) -> int:
    try:
        return group.element(value)
    except (KeyError, IndexError, ValueError) as err:
        raise ConfigError(path, f"{err} (labels: {', '.join(group.labels)})") from None


# -- experiment runners ---------------------------------------------------------------------

def _abelian_geometry(lattice: Lattice, geo: dict, path: str) -> ex.AbelianGeometry:
    d = ex.default_abelian_geometry(lattice)
    oz = _get(geo, "OZ", path, dict, {})
    ox = _get(geo, "OX", path, dict, {})
    wx = _get(geo, "WX", path, dict, {})
    around = wx.get("around", d.wx_around)
    around = [around] if isinstance(around, int) and not isinstance(around, bool) else around
    detect = geo.get("detect_face", d.detect_face)
    return ex.AbelianGeometry(
        _index_list(oz.get("path", d.oz_path), lattice.vertex_count, f"{path}.OZ.path", "vertex"),
        _index_list(ox.get("dual_path", d.ox_dual_path), lattice.face_count, f"{path}.OX.dual_path", "face"),
        _index_list(around, lattice.vertex_count, f"{path}.WX.around", "vertex"),
        _index(detect, lattice.face_count, f"{path}.detect_face", "face"),
    )


def _run_prepare(cfg: dict, geo: dict, tol: float, seed: int) -> ex.ExperimentReport:
    lattice = resolve_lattice(cfg.get("lattice", {"type": "torus", "lx": 3, "ly": 3}))
    group = resolve_group(cfg.get("group", "Z2"), base_dir=cfg["_dir"])
    order = geo.get("order")
    if order is not None:
        order = _index_list(order, lattice.vertex_count, "geometry.order", "vertex")
        if sorted(order) != list(range(lattice.vertex_count)):
            raise ConfigError("geometry.order", "must list every vertex exactly once")
    _require_connected(lattice)
    state = ex.prepare_ground_state(lattice, group, order)
    rep = ex.verify_ground_state(state, tol)
    rep.inputs["order"] = order
    return rep


def _require_connected(lattice: Lattice) -> None:
    if not lattice.is_connected():
        raise ConfigError("lattice", "ground-state preparation needs a connected lattice")


def _run_braid_abelian(cfg, geo, tol, seed):
    lattice = resolve_lattice(cfg.get("lattice", {"type": "torus", "lx": 3, "ly": 3}))
    group = resolve_group(cfg.get("group", "Z2"), base_dir=cfg["_dir"])
    if group.order != 2:
        raise ConfigError("group", "braid-abelian runs on Z2")
    _require_connected(lattice)
    geometry = _abelian_geometry(lattice, geo, "geometry")
    try:
        return ex.abelian_braiding(lattice, group, geometry, tol)
    except OperatorError as err:
        raise ConfigError("geometry", str(err)) from None


def _run_braid_nonabelian(cfg, geo, tol, seed):
    stretch = bool(_get(geo, "stretch", "geometry", bool, False))
    default_side = 3 if stretch else 2
    lattice = resolve_lattice(cfg.get("lattice", {"type": "torus", "lx": default_side, "ly": default_side}))
    group = resolve_group(cfg.get("group", "S3"), base_dir=cfg["_dir"])
    _require_connected(lattice)
    g = _element(group, _get(geo, "g", "geometry"), "geometry.g")
    h = _element(group, _get(geo, "h", "geometry"), "geometry.h")
    loop = resolve_string(lattice, geo["loop"], "geometry.loop") if "loop" in geo else None
    open_ = resolve_string(lattice, geo["open_string"], "geometry.open_string") if "open_string" in geo else None
    if (loop is None) != (open_ is None):
        raise ConfigError("geometry", "give both loop and open_string, or neither")
    if loop is None and not lattice.is_torus:
        raise ConfigError("geometry.loop", "default geometry needs a torus lattice")
    face = geo.get("face")
    if face is not None:
        face = _index(face, lattice.face_count, "geometry.face", "face")
    try:
        return ex.nonabelian_braiding(lattice, group, g, h, loop, open_, face, tol)
    except StringSpecError as err:
        raise ConfigError("geometry", str(err)) from None


def _restricted_step(lattice: Lattice, group: FiniteGroup, step, path: str, abelian: dict):
    if not isinstance(step, dict):
        raise ConfigError(path, "expected an object with an 'op' field")
    op = _get(step, "op", path, str)
    if op == "channel":
        v = _index(_get(step, "vertex", path), lattice.vertex_count, f"{path}.vertex", "vertex")
        return f"channel v={v}", lambda s: apply_channel_Ev(s, v)
    if op == "gauge":
        v = _index(_get(step, "vertex", path), lattice.vertex_count, f"{path}.vertex", "vertex")
        g = _element(group, _get(step, "g", path), f"{path}.g")
        cmap = gauge_map(lattice, group, v, g)
        return f"gauge v={v} g={group.label(g)}", lambda s: apply_map(s, cmap)
    if op == "comb":
        spec = resolve_string(lattice, _get(step, "string", path, dict), f"{path}.string")
        g = _element(group, _get(step, "g", path), f"{path}.g")
        cmap = CombMap(validate_string_spec(lattice, spec), g)
        return f"comb g={group.label(g)}", lambda s: apply_map(s, cmap)
    if op in ("U", "WX", "OX", "OZ"):
        if group.order != 2:
            raise ConfigError(f"{path}.op", f"{op} is a Z2 operation")
        try:
            lin = abelian[op]()
        except OperatorError as err:
            raise ConfigError("geometry", str(err)) from None
        return op, lambda s: apply_doubled(s, lin)
    raise ConfigError(f"{path}.op", f"unknown op {op!r} (valid: channel, gauge, comb, U, WX, OX, OZ)")


def _default_steps(lattice: Lattice, group: FiniteGroup) -> list[dict]:
    if group.order == 2:
        return [{"op": "U"}, {"op": "WX"}, {"op": "U"}, {"op": "channel", "vertex": 0}]
    spec = StringSpec(((lattice.h_edge(0, 0), 1),), ((lattice.v_edge(1, 0), 1, "out"),))
    other = group.order - 1
    return [{"op": "comb", "string": spec.to_dict(), "g": other},
            {"op": "gauge", "vertex": lattice.vertex(1, 1), "g": other},
            {"op": "channel", "vertex": lattice.vertex(1, 0)}]


def _run_restricted(cfg, geo, tol, seed):
    lattice = resolve_lattice(cfg.get("lattice", {"type": "torus", "lx": 3, "ly": 3}))
    group = resolve_group(cfg.get("group", "Z2"), base_dir=cfg["_dir"])
    _require_connected(lattice)
    start = _get(geo, "start", "geometry", str, "ground")
    if start not in ("ground", "initial"):
        raise ConfigError("geometry.start", "expected 'ground' or 'initial'")
    steps_cfg = geo.get("steps")
    if steps_cfg is None:
        if not lattice.is_torus:
            raise ConfigError("geometry.steps", "default steps need a torus lattice")
        steps_cfg = _default_steps(lattice, group)
    if not isinstance(steps_cfg, list):
        raise ConfigError("geometry.steps", "expected a list")

    cache: dict[str, LinearOp] = {}

    def abelian_op(name: str) -> Callable[[], LinearOp]:
        def make():
            if name not in cache:
                g = _abelian_geometry(lattice, geo, "geometry")
                oz, ox = build_OZ(lattice, g.oz_path), build_OX(lattice, g.ox_dual_path)
                cache.update(OZ=LinearOp([(1.0, oz)]), OX=LinearOp([(1.0, ox)]),
                             WX=LinearOp([(1.0, build_WX(lattice, g.wx_around, oz))]),
                             U=build_U(ox, oz, n_edges=lattice.edge_count, group=group))
            return cache[name]
        return make

    abelian = {k: abelian_op(k) for k in ("U", "WX", "OX", "OZ")}
    steps = [_restricted_step(lattice, group, s, f"geometry.steps[{i}]", abelian) for i, s in enumerate(steps_cfg)]
    state = ex.prepare_ground_state(lattice, group) if start == "ground" else initial_state(lattice, group)
    rep = ex.restricted_excitation_demo(state, steps, tol)
    rep.inputs["start"] = start
    return rep


def _run_elongation(cfg, geo, tol, seed):
    lattice = resolve_lattice(cfg.get("lattice", {"type": "torus", "lx": 4, "ly": 4}))
    names = _get(geo, "groups", "geometry", list, ["S3", "D4"])
    groups = [resolve_group(n, f"geometry.groups[{i}]", cfg["_dir"]) for i, n in enumerate(names)]
    samples = _get(geo, "samples", "geometry", int, 200)
    if samples < 1:
        raise ConfigError("geometry.samples", "must be positive")
    spec = ext = teeth = None
    if "string" in geo:
        spec = resolve_string(lattice, geo["string"], "geometry.string")
        ext = _get(geo, "extension", "geometry", list)
        if len(ext) != 2:
            raise ConfigError("geometry.extension", "expected [edge, sign]")
        _index(ext[0], lattice.edge_count, "geometry.extension[0]", "edge")
        teeth = _get(geo, "new_teeth", "geometry", list)
        for i, t in enumerate(teeth):
            if not isinstance(t, list) or len(t) != 2:
                raise ConfigError(f"geometry.new_teeth[{i}]", "expected [edge, \"out\"|\"in\"]")
            _index(t[0], lattice.edge_count, f"geometry.new_teeth[{i}][0]", "edge")
    elif not lattice.is_torus or min(lattice.torus_shape) < 4:
        raise ConfigError("lattice", "the default elongation geometry needs a torus of side at least 4")
    tight = cfg.get("tolerances", {}).get("elongation", ex.TIGHT)
    try:
        return ex.elongation_check(lattice, groups, spec, ext, teeth, samples, seed, tight)
    except StringSpecError as err:
        raise ConfigError("geometry", str(err)) from None


def _run_un(cfg, geo, tol, seed):
    n_max = _get(geo, "n_max", "geometry", int, 6)
    if not 1 <= n_max <= 10:
        raise ConfigError("geometry.n_max", "must be between 1 and 10")
    return ex.un_check(n_max, cfg.get("tolerances", {}).get("dense", ex.TIGHT))


def _run_purification(cfg, geo, tol, seed):
    default = [{"group": "Z2", "orientations": [True, True, False, False]},
               {"group": "S3", "orientations": [True, False]}]
    cases = []
    for i, case in enumerate(_get(geo, "cases", "geometry", list, default)):
        path = f"geometry.cases[{i}]"
        if not isinstance(case, dict):
            raise ConfigError(path, "expected an object")
        group = resolve_group(_get(case, "group", path), f"{path}.group", cfg["_dir"])
        orient = _get(case, "orientations", path, list)
        if not all(isinstance(o, bool) for o in orient):
            raise ConfigError(f"{path}.orientations", "expected booleans (true = outgoing)")
        if group.order ** (len(orient) + 1) > 4096:
            raise ConfigError(path, "dense dimension |G|^(degree+1) exceeds 4096")
        cases.append((group, orient))
    return ex.purification_experiment(cases, seed, cfg.get("tolerances", {}).get("dense", ex.TIGHT))


RUNNERS = {
    "prepare-verify": _run_prepare,
    "braid-abelian": _run_braid_abelian,
    "braid-nonabelian": _run_braid_nonabelian,
    "restricted": _run_restricted,
    "elongation-check": _run_elongation,
    "un-check": _run_un,
    "purification-check": _run_purification,
}


def run_config(cfg: dict, seed: int | None = None) -> ex.ExperimentReport:
    """Validate ``cfg`` and run its experiment. Raises :class:`ConfigError`."""
    if not isinstance(cfg, dict):
        raise ConfigError("$", "config must be a JSON object")
    name = _get(cfg, "experiment", "$", str)
    if name not in RUNNERS:
        raise ConfigError("experiment", f"unknown experiment {name!r}; valid names: {', '.join(EXPERIMENTS)}")
    tolerances = _get(cfg, "tolerances", "$", dict, {})
    for key, value in tolerances.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
            raise ConfigError(f"tolerances.{key}", "tolerances must be positive numbers")
    tol = float(tolerances.get("default", ex.TOL))
    if seed is None:
        seed = _get(cfg, "seed", "$", int, 0)
    geo = _get(cfg, "geometry", "$", dict, {})
    cfg = {"_dir": ".", **cfg}
    rep = RUNNERS[name](cfg, geo, tol, seed)
    rep.inputs["seed"] = seed
    return rep


# -- entry point ---------------------------------------------------------------------------------

def _cmd_list(args) -> int:
    if args.json:
        print(json.dumps([{"name": i.name, "description": i.summary, "geometry": list(i.geometry)}
                          for i in CATALOG], indent=2))
    else:
        width = max(len(i.name) for i in CATALOG)
        for i in CATALOG:
            print(f"{i.name:<{width}}  {i.summary}")
            print(f"{'':<{width}}  geometry: {', '.join(i.geometry)}")
    return 0


def _cmd_run(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as err:
        print(f"error: $: invalid JSON ({err})", file=sys.stderr)
        return 2
    if isinstance(cfg, dict):
        cfg["_dir"] = os.path.dirname(os.path.abspath(args.config))
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be at least 1", file=sys.stderr)
            return 2
        set_num_threads(args.threads)
    try:
        rep = run_config(cfg, args.seed)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    out = args.out or (cfg.get("output") if isinstance(cfg.get("output"), str) else None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json() + "\n")
    if args.verbose:
        print(rep.summary())
    else:
        print(f"{rep.experiment}: {'PASS' if rep.passed else 'FAIL'}  "
              f"({sum(q.passed for q in rep.quantities.values())}/{len(rep.quantities)} quantities)")
    bad = rep.first_failure()
    if bad is not None:
        name, q = bad
        print(f"first failure: {name} = {q.value:.12g} (expected {q.expected:g}, tolerance {q.tolerance:g})",
              file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdouble", description="Quantum double preparation and braiding experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a JSON config")
    r.add_argument("config", help="path to the experiment config (JSON)")
    r.add_argument("--out", help="write the JSON report here")
    r.add_argument("--threads", type=int, help="worker threads for the state engine")
    r.add_argument("--seed", type=int, help="seed for sampled property checks (overrides the config)")
    r.add_argument("--verbose", action="store_true", help="print every quantity")
    r.set_defaults(func=_cmd_run)
    lst = sub.add_parser("list", help="list the available experiments")
    lst.add_argument("--json", action="store_true", help="emit the catalog as JSON")
    lst.set_defaults(func=_cmd_list)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
