"""Run and sweep configuration, with a YAML dialect that reports errors by line.

A config file has a required ``run`` section and optional ``sweep``,
``mesh_study`` and ``eta_study`` sections::

    run:
      geometry: one_sided
      scheme: optimal
      eps: 1.0e-2
      n_cells: 500
    sweep:
      eps: [1.0e-1, 1.0e-2, 1.0e-3]

Validation walks the composed YAML node tree rather than the loaded
dictionary so every message can point at the offending line.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import yaml

from .boundary import BCKind
from .schemes import SchemeKind, Stepping, TwoFieldsForm

GEOMETRIES = ("one_sided", "two_sided", "plasma_only")
CASE_NAMES = ("regular", "isoardi", "stationary")
REFERENCES = ("analytic", "numerical")
DEFAULT_EPS = tuple(10.0**-k for k in range(1, 8))


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = source or "config"
        prefix = f"{where}:{line}: " if line is not None else f"{where}: "
        super().__init__(prefix + message)


@dataclass(frozen=True)
class RunConfig:
    geometry: str = "one_sided"
    scheme: str = "optimal"
    eps: float = 1e-2
    M0: float = 0.9
    case: str = "regular"
    n_cells: int = 500
    cfl: float = 0.8
    t_end: float = 1.0
    bc_left: str | None = None
    bc_right: str | None = None
    paper_literal_rusanov: bool = False
    two_fields_form: str = "update_block"
    stepping: str = "heun"
    snapshot_every: int = 0  # steps between snapshots; 0 keeps the final state only
    blow_up_threshold: float = 10.0
    source_amplitude: float = 1.0  # S of the stationary case
    out: str | None = None

    def __post_init__(self):
        validate_run(self)

    def replace(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    @property
    def left_bc(self) -> str:
        return self.bc_left or default_bcs(self)[0]

    @property
    def right_bc(self) -> str:
        return self.bc_right or default_bcs(self)[1]


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    eps: tuple = DEFAULT_EPS
    reference: str | None = None  # None: numerical for two_fields, analytic otherwise
    eps_ref: float = 1e-20

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        if len(self.eps) < 3:
            raise ConfigError(f"an eps sweep needs at least 3 values, got {len(self.eps)}")
        if any(e <= 0 for e in self.eps):
            raise ConfigError("sweep eps values must be positive")
        if list(self.eps) != sorted(self.eps, reverse=True) or len(set(self.eps)) != len(self.eps):
            raise ConfigError("sweep eps values must be strictly decreasing")
        if self.reference is not None and self.reference not in REFERENCES:
            raise ConfigError(f"reference must be one of {REFERENCES}, got {self.reference!r}")
        if not self.eps_ref > 0:
            raise ConfigError("eps_ref must be positive")

    @property
    def reference_policy(self) -> str:
        if self.reference is not None:
            return self.reference
        return "numerical" if self.base.scheme == SchemeKind.TWO_FIELDS.value else "analytic"

    def replace(self, **kw) -> "SweepConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class StudyConfig:
    """Everything a config file may hold."""

    run: RunConfig
    sweep: SweepConfig | None = None
    meshes: tuple = ()
    etas: tuple = ()


def default_bcs(cfg: RunConfig) -> tuple[str, str]:
    if cfg.geometry == "two_sided":
        return "periodic", "periodic"
    if cfg.geometry == "plasma_only":
        return "symmetry", "exact_dirichlet"
    if cfg.case == "stationary" or cfg.scheme == SchemeKind.NONE.value:
        return "symmetry", "exact_dirichlet"
    if cfg.scheme == SchemeKind.OPTIMAL.value:
        return "symmetry", "asymptotic_outflow"
    # isoardi and two_fields drive the limiter density to zero: let it leave freely
    return "symmetry", "extrapolate"


def _choice(name, value, allowed):
    if value not in allowed:
        raise ConfigError(f"{name} must be one of {', '.join(allowed)}; got {value!r}")


def validate_run(cfg: RunConfig):
    _choice("geometry", cfg.geometry, GEOMETRIES)
    _choice("scheme", cfg.scheme, [k.value for k in SchemeKind])
    _choice("case", cfg.case, CASE_NAMES)
    _choice("two_fields_form", cfg.two_fields_form, [k.value for k in TwoFieldsForm])
    _choice("stepping", cfg.stepping, [k.value for k in Stepping])
    for side in ("bc_left", "bc_right"):
        value = getattr(cfg, side)
        if value is not None:
            _choice(side, value, [k.value for k in BCKind])
    if not (math.isfinite(cfg.eps) and cfg.eps > 0):
        raise ConfigError(f"eps must be a positive number, got {cfg.eps}")
    if not 0 < cfg.M0 <= 1:
        raise ConfigError(f"M0 must lie in (0, 1], got {cfg.M0}")
    if not 0 < cfg.cfl <= 1:
        raise ConfigError(f"cfl must lie in (0, 1], got {cfg.cfl}")
    if not cfg.t_end >= 0:
        raise ConfigError(f"t_end must be non-negative, got {cfg.t_end}")
    if cfg.n_cells < 4:
        raise ConfigError(f"n_cells must be at least 4, got {cfg.n_cells}")
    if cfg.snapshot_every < 0:
        raise ConfigError("snapshot_every must be >= 0")
    if not cfg.blow_up_threshold > 1:
        raise ConfigError("blow_up_threshold must exceed 1")
    if not cfg.source_amplitude > 0:
        raise ConfigError("source_amplitude must be positive")

    two_sided_scheme = cfg.scheme == SchemeKind.OPTIMAL_TWO_SIDED.value
    if two_sided_scheme != (cfg.geometry == "two_sided") and cfg.scheme != SchemeKind.NONE.value:
        raise ConfigError("optimal_two_sided goes with the two_sided geometry and only with it")
    if cfg.geometry == "plasma_only" and cfg.scheme != SchemeKind.NONE.value:
        raise ConfigError("plasma_only geometry has no limiter; use scheme none")
    if cfg.geometry != "one_sided" and cfg.case != "regular":
        raise ConfigError(f"case {cfg.case!r} is only defined on the one_sided geometry")
    if cfg.case == "isoardi" and cfg.M0 != 1.0:
        raise ConfigError("the isoardi case imposes M0 = 1")
    if cfg.scheme == SchemeKind.ISOARDI.value and cfg.case != "isoardi":
        raise ConfigError("the isoardi scheme runs on the isoardi case")
    periodic = [cfg.bc_left == "periodic", cfg.bc_right == "periodic"]
    if any(periodic) and not all(periodic):
        raise ConfigError("periodic boundary must be set on both sides")
    if "asymptotic_outflow" in (cfg.bc_left, cfg.bc_right):
        ok = (
            cfg.geometry == "one_sided"
            and cfg.scheme == SchemeKind.OPTIMAL.value
            and cfg.case == "regular"
            and cfg.bc_left != "asymptotic_outflow"
        )
        if not ok:
            raise ConfigError(
                "asymptotic_outflow is only valid at the right edge of the one_sided "
                "geometry with the optimal scheme and the regular case"
            )


# ---------------------------------------------------------------- YAML layer

_FLOAT = "float"
_INT = "int"
_BOOL = "bool"
_STR = "str"
_OPT_STR = "optional str"
_FLOAT_LIST = "float list"
_INT_LIST = "int list"

RUN_KEYS = {
    "geometry": _STR,
    "scheme": _STR,
    "eps": _FLOAT,
    "M0": _FLOAT,
    "case": _STR,
    "n_cells": _INT,
    "cfl": _FLOAT,
    "t_end": _FLOAT,
    "bc_left": _OPT_STR,
    "bc_right": _OPT_STR,
    "paper_literal_rusanov": _BOOL,
    "two_fields_form": _STR,
    "stepping": _STR,
    "snapshot_every": _INT,
    "blow_up_threshold": _FLOAT,
    "source_amplitude": _FLOAT,
    "out": _OPT_STR,
}
SWEEP_KEYS = {"eps": _FLOAT_LIST, "reference": _OPT_STR, "eps_ref": _FLOAT}
MESH_KEYS = {"meshes": _INT_LIST}
ETA_KEYS = {"etas": _FLOAT_LIST}
SECTIONS = {"run": RUN_KEYS, "sweep": SWEEP_KEYS, "mesh_study": MESH_KEYS, "eta_study": ETA_KEYS}


def _line(node):
    return node.start_mark.line + 1


def _scalar(node, kind, key, source):
    if not isinstance(node, yaml.ScalarNode):
        raise ConfigError(f"{key}: expected a {kind}, got a {type(node).__name__[:-4].lower()}",
                          _line(node), source)
    text = node.value
    if kind == _OPT_STR and node.tag.endswith(":null"):
        return None
    if kind in (_STR, _OPT_STR):
        return text
    if kind == _BOOL:
        low = text.lower()
        if low in ("true", "yes", "on"):
            return True
        if low in ("false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected true or false, got {text!r}", _line(node), source)
    if kind == _INT:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {text!r}", _line(node), source) from None
    try:
        # YAML 1.1 reads "1e-3" as a string, so floats are parsed here
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}", _line(node), source) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {text!r}", _line(node), source)
    return value


def _value(node, kind, key, source):
    if kind in (_FLOAT_LIST, _INT_LIST):
        if not isinstance(node, yaml.SequenceNode):
            raise ConfigError(f"{key}: expected a list", _line(node), source)
        item = _FLOAT if kind == _FLOAT_LIST else _INT
        return [_scalar(n, item, key, source) for n in node.value]
    return _scalar(node, kind, key, source)


def _section(node, schema, name, source):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"section {name!r} must be a mapping", _line(node), source)
    out, lines = {}, {}
    for key_node, value_node in node.value:
        key = key_node.value
        if key not in schema:
            raise ConfigError(
                f"unknown key {key!r} in section {name!r} (allowed: {', '.join(schema)})",
                _line(key_node), source,
            )
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", _line(key_node), source)
        out[key] = _value(value_node, schema[key], key, source)
        lines[key] = _line(value_node)
    return out, lines


def _build(factory, values, lines, source, section_line):
    """Construct ``factory(**values)`` and attach a line to any validation error."""
    try:
        return factory(**values)
    except ConfigError as exc:
        msg = str(exc).split(": ", 1)[-1]
        line = section_line
        for key, ln in lines.items():
            if msg.startswith(key) or f" {key} " in f" {msg} ":
                line = ln
                break
        raise ConfigError(msg, line, source) from None


def parse_config(text: str, source: str = "config") -> StudyConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", line, source) from None
    if root is None:
        raise ConfigError("empty config", 1, source)
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("top level must be a mapping of sections", _line(root), source)

    parsed, section_lines = {}, {}
    for key_node, value_node in root.value:
        name = key_node.value
        if name not in SECTIONS:
            raise ConfigError(
                f"unknown section {name!r} (allowed: {', '.join(SECTIONS)})", _line(key_node), source
            )
        parsed[name] = _section(value_node, SECTIONS[name], name, source)
        section_lines[name] = _line(key_node)
    if "run" not in parsed:
        raise ConfigError("missing required section 'run'", 1, source)

    run_values, run_lines = parsed["run"]
    run = _build(RunConfig, run_values, run_lines, source, section_lines["run"])
    sweep = None
    if "sweep" in parsed:
        values, lines = parsed["sweep"]
        if "eps" in values:
            values["eps"] = tuple(values["eps"])
        sweep = _build(
            lambda **kw: SweepConfig(base=run, **kw), values, lines, source, section_lines["sweep"]
        )
    meshes = ()
    if "mesh_study" in parsed:
        values, lines = parsed["mesh_study"]
        meshes = tuple(values.get("meshes", ()))
        if any(n < 4 for n in meshes):
            raise ConfigError("meshes: every mesh needs at least 4 cells", lines.get("meshes"), source)
    etas = ()
    if "eta_study" in parsed:
        values, lines = parsed["eta_study"]
        etas = tuple(values.get("etas", ()))
        if any(not 0 < e < 1 for e in etas):
            raise ConfigError("etas: every eta must lie in (0, 1)", lines.get("etas"), source)
    return StudyConfig(run=run, sweep=sweep, meshes=meshes, etas=etas)


def load_config(path) -> StudyConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, source=str(path))


def dump_config(study: StudyConfig) -> str:
    """YAML text that ``parse_config`` maps back to an equal ``StudyConfig``."""
    run = {f.name: getattr(study.run, f.name) for f in fields(RunConfig)}
    doc = {"run": run}
    if study.sweep is not None:
        doc["sweep"] = {
            "eps": [float(e) for e in study.sweep.eps],
            "reference": study.sweep.reference,
            "eps_ref": float(study.sweep.eps_ref),
        }
    if study.meshes:
        doc["mesh_study"] = {"meshes": [int(n) for n in study.meshes]}
    if study.etas:
        doc["eta_study"] = {"etas": [float(e) for e in study.etas]}
    return yaml.safe_dump(doc, sort_keys=False)


def run_config_dict(cfg: RunConfig) -> dict:
    return asdict(cfg)
