"""Versioned plain-text formats for models, adaptive systems and configs.

Every model file starts with a ``<kind> <version>`` header line. Floats are
written with ``repr`` so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .linear import LinearModel
from .trees import RegressionTree, TreeEnsemble

LINEAR_HEADER = "adaptapprox-linear"
TREES_HEADER = "adaptapprox-trees"
SYSTEM_HEADER = "adaptapprox-system"
FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed or unsupported model/config file."""


def _f(x) -> str:
    return repr(float(x))


def _floats(tokens) -> list:
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(str(exc)) from None


class _Lines:
    def __init__(self, lines, source="<text>"):
        self._lines = [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
        self._pos = 0
        self.source = source

    def next(self) -> list:
        if self._pos >= len(self._lines):
            raise FormatError(f"{self.source}: unexpected end of input")
        self._pos += 1
        return self._lines[self._pos - 1].split()

    def expect(self, key, n=None) -> list:
        tok = self.next()
        if tok[0] != key or (n is not None and len(tok) != n + 1):
            raise FormatError(f"{self.source}: expected {key!r}, got {' '.join(tok)!r}")
        return tok[1:]

    def rest(self, key) -> str:
        """Everything after ``key`` on the next line, whitespace preserved."""
        tok = self.next()
        if tok[0] != key:
            raise FormatError(f"{self.source}: expected {key!r}, got {tok[0]!r}")
        return self._lines[self._pos - 1][len(key):].strip()

    def done(self) -> bool:
        return self._pos >= len(self._lines)


def _header(lines: _Lines, kind: str):
    tok = lines.next()
    if len(tok) != 2 or tok[0] != kind:
        raise FormatError(f"{lines.source}: not a {kind} file")
    if tok[1] != str(FORMAT_VERSION):
        raise FormatError(f"{lines.source}: unsupported {kind} version {tok[1]}")


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------


def linear_to_lines(model: LinearModel) -> list:
    return [f"{LINEAR_HEADER} {FORMAT_VERSION}",
            f"K {model.n_features}",
            "weights " + " ".join(_f(w) for w in model.weights),
            f"intercept {_f(model.intercept)}"]


def _read_linear(lines: _Lines) -> LinearModel:
    _header(lines, LINEAR_HEADER)
    K = int(lines.expect("K", 1)[0])
    w = _floats(lines.expect("weights"))
    if len(w) != K:
        raise FormatError(f"{lines.source}: {len(w)} weights for K={K}")
    b = _floats(lines.expect("intercept", 1))[0]
    return LinearModel(np.array(w), b)


def trees_to_lines(ens: TreeEnsemble) -> list:
    out = [f"{TREES_HEADER} {FORMAT_VERSION}",
           f"n_features {-1 if ens.n_features is None else ens.n_features}",
           f"shrinkage {_f(ens.shrinkage)}",
           f"base_score {_f(ens.base_score)}",
           f"n_trees {len(ens.trees)}"]
    for t in ens.trees:
        out.append(f"tree {t.n_nodes} {t.max_depth}")
        for k in range(t.n_nodes):
            out.append(f"node {int(t.feature[k])} {_f(t.threshold[k])} {_f(t.value[k])} "
                       f"{int(t.left[k])} {int(t.right[k])}")
    return out


def _read_trees(lines: _Lines) -> TreeEnsemble:
    _header(lines, TREES_HEADER)
    nf = int(lines.expect("n_features", 1)[0])
    shrinkage = _floats(lines.expect("shrinkage", 1))[0]
    base = _floats(lines.expect("base_score", 1))[0]
    n_trees = int(lines.expect("n_trees", 1)[0])
    trees = []
    for _ in range(n_trees):
        n_nodes, max_depth = (int(v) for v in lines.expect("tree", 2))
        cols = [[], [], [], [], []]
        for _ in range(n_nodes):
            tok = lines.expect("node", 5)
            cols[0].append(int(tok[0]))
            cols[1].append(float(tok[1]))
            cols[2].append(float(tok[2]))
            cols[3].append(int(tok[3]))
            cols[4].append(int(tok[4]))
        trees.append(RegressionTree(*cols, max_depth=max_depth))
    return TreeEnsemble(tuple(trees), shrinkage, base, None if nf < 0 else nf)


def model_to_lines(model) -> list:
    if isinstance(model, LinearModel):
        return linear_to_lines(model)
    if isinstance(model, TreeEnsemble):
        return trees_to_lines(model)
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _read_model(lines: _Lines):
    # peek at the header without consuming it
    tok = lines._lines[lines._pos].split() if not lines.done() else [""]
    if tok[0] == LINEAR_HEADER:
        return _read_linear(lines)
    if tok[0] == TREES_HEADER:
        return _read_trees(lines)
    raise FormatError(f"{lines.source}: unknown model kind {tok[0]!r}")


def save_model(model, path):
    Path(path).write_text("\n".join(model_to_lines(model)) + "\n")


def load_model(path):
    """Load a linear model or tree ensemble written by :func:`save_model`."""
    lines = _Lines(Path(path).read_text().splitlines(), str(path))
    model = _read_model(lines)
    if not lines.done():
        raise FormatError(f"{path}: trailing content")
    return model


# --------------------------------------------------------------------------
# adaptive systems
# --------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, frozenset, set)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def save_system(system, path):
    """Bundle ``g``, ``f1``, metadata and the path of the expensive model.

    The expensive model itself is referenced, not embedded.
    """
    from .gating import AdaptiveSystem

    if not isinstance(system, AdaptiveSystem):
        raise TypeError("expected an AdaptiveSystem")
    f0_used = "all" if system.f0_used_features is None else \
        ",".join(str(a) for a in sorted(system.f0_used_features)) or "none"
    out = [f"{SYSTEM_HEADER} {FORMAT_VERSION}",
           "info " + json.dumps(_jsonable(system.info or {}), sort_keys=True),
           "f0_reference " + json.dumps(system.f0_reference),
           f"f0_used_features {f0_used}",
           f"route_threshold {_f(system.route_threshold)}",
           "begin g", *model_to_lines(system.g), "end g",
           "begin f1", *model_to_lines(system.f1), "end f1"]
    Path(path).write_text("\n".join(out) + "\n")


def load_system(path, *, attach_f0: bool = True):
    """Load a system bundle; with ``attach_f0`` the referenced expensive model
    is loaded too when its file exists (relative paths resolve against the
    bundle's directory)."""
    from .gating import AdaptiveSystem

    text = Path(path).read_text().splitlines()
    lines = _Lines(text, str(path))
    _header(lines, SYSTEM_HEADER)
    info = json.loads(lines.rest("info"))
    ref = json.loads(lines.rest("f0_reference"))
    used = lines.expect("f0_used_features", 1)[0]
    f0_used = None if used == "all" else frozenset() if used == "none" else \
        frozenset(int(a) for a in used.split(","))
    thr = _floats(lines.expect("route_threshold", 1))[0]
    models = {}
    for name in ("g", "f1"):
        if lines.expect("begin", 1)[0] != name:
            raise FormatError(f"{path}: expected block {name!r}")
        models[name] = _read_model(lines)
        if lines.expect("end", 1)[0] != name:
            raise FormatError(f"{path}: unterminated block {name!r}")
    f0 = None
    if attach_f0 and ref is not None:
        ref_path = Path(ref)
        if not ref_path.is_absolute():
            ref_path = Path(path).parent / ref_path
        if ref_path.exists():
            f0 = load_model(ref_path)
    return AdaptiveSystem(models["g"], models["f1"], f0=f0, f0_used_features=f0_used,
                          route_threshold=thr, f0_reference=ref, info=info)


# --------------------------------------------------------------------------
# flat key=value configs
# --------------------------------------------------------------------------


def _parse_value(raw: str, default):
    raw = raw.strip()
    if isinstance(default, tuple):
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if isinstance(default, str):
        return raw
    if raw.lower() in ("none", ""):
        return None
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    try:
        return int(raw)
    except ValueError:
        try:
            return float(raw)
        except ValueError:
            return raw


def read_kv(path) -> dict:
    """Raw ``key = value`` pairs; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError(f"{path}:{n}: empty key")
        out[key] = val
    return out


def config_from_kv(kv: dict, cls, *, strict: bool = False):
    """Build dataclass ``cls`` from string pairs, ignoring unknown keys unless ``strict``."""
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in kv.items():
        if key not in fields:
            if strict:
                raise FormatError(f"unknown key {key!r} for {cls.__name__}")
            continue
        f = fields[key]
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        if default is None:
            # optional numeric fields (init_trees, l2_init)
            default = 0 if "int" in str(f.type) else 0.0
            if raw.strip().lower() in ("none", ""):
                kwargs[key] = None
                continue
        kwargs[key] = _parse_value(raw, default)
    return cls(**kwargs)


def config_to_lines(cfg) -> list:
    out = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(_f(x) for x in v)
        elif isinstance(v, float):
            v = _f(v)
        out.append(f"{f.name} = {v}")
    return out


def save_config(path, *configs):
    lines = []
    for cfg in configs:
        lines += config_to_lines(cfg)
    Path(path).write_text("\n".join(lines) + "\n")
