"""Run configuration: YAML ingestion, presets, ``--set`` overrides, unit conversion.

Files use Hz, micrometres and kelvin; :class:`RunConfig` holds SI values.
"""
import copy
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import yaml

from .atomics import RB87_SURFACE_ELEMENTS
from .errors import ConfigError, DomainError
from .layered_media import ConstantPermittivity, DrudeSkinDepth, Layer, LayerStack, Vacuum

UM = 1e-6

_FIG1 = {
    "atom": {"frequency_hz": 560e3, "spin_elements": ["0", "0.25j", "0.25"],
             "temperature_k": 0.0},
    "stack": [{"model": "drude", "skin_depth_um": 110.0, "thickness_um": "inf"}],
    "geometry": {"d_um": [5.0, 10.0, 20.0],
                 "l_um": [0.0, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0,
                          60.0, 70.0, 80.0, 90.0, 100.0],
                 "h_um": [], "t_s": [], "axis": "x"},
    "halfwidth": {"delta_um": [], "film_model": "drude",
                  "substrate": {"model": "dielectric", "epsilon": "2.25"}},
    "numerics": {"tol": 1e-8},
    "output": {"directory": "."},
}

_FIG2 = copy.deepcopy(_FIG1)
_FIG2["geometry"].update({
    "d_um": [50.0], "l_um": [],
    "h_um": [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 50.0, 100.0, 200.0, 500.0],
})
_FIG2["halfwidth"]["delta_um"] = [100.0, 50.0, 10.0]

_NIOBIUM = copy.deepcopy(_FIG1)
_NIOBIUM["stack"][0]["skin_depth_um"] = 15.0

PRESETS = {
    "fig1": _FIG1,
    "aluminium": copy.deepcopy(_FIG1),
    "fig2": _FIG2,
    "niobium-9K": _NIOBIUM,
}

DEFAULT_PRESET = "fig1"

TEMPLATE_HEADER = """\
# spindec run configuration
# units: frequency Hz, lengths um, temperature K, times s
# stack: layers below the vacuum half-space, topmost first; the last one is
#   semi-infinite (thickness_um: inf). models: vacuum, dielectric (epsilon),
#   drude (skin_depth_um)
# spin_elements: <i|S_q|f> in the surface frame (x, y, z), complex strings allowed
"""


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration in SI units."""

    frequency_hz: float
    spin_elements: Tuple[complex, complex, complex]
    temperature: float
    stack: Optional[LayerStack]
    d: Tuple[float, ...]
    l: Tuple[float, ...]
    h: Tuple[float, ...]
    t: Tuple[float, ...]
    axis: str
    deltas: Tuple[float, ...]
    film_model: str
    substrate: object
    tol: float
    output_dir: str
    raw: dict

    @property
    def omega(self):
        return 2.0 * math.pi * self.frequency_hz

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return self.raw == other.raw

    def __hash__(self):
        return hash(yaml.safe_dump(self.raw, sort_keys=True))

    def film_stack(self, delta, h):
        film = DrudeSkinDepth(delta) if self.film_model == "drude" else Vacuum()
        return LayerStack((Layer(film, h), Layer(self.substrate)))


def _deep_merge(base, over):
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _set_path(tree, dotted, value):
    parts = dotted.split(".")
    node = tree
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        if isinstance(node, list):
            try:
                idx = int(part)
                node[idx]
            except (ValueError, IndexError):
                raise ConfigError(f"--set {dotted}: '{part}' is not a valid list index") from None
            if last:
                node[idx] = value
            else:
                node = node[idx]
        elif isinstance(node, dict):
            if last:
                node[part] = value
            else:
                if part not in node or not isinstance(node[part], (dict, list)):
                    node[part] = {}
                node = node[part]
        else:
            raise ConfigError(f"--set {dotted}: cannot descend into a scalar")


def apply_override(tree, assignment):
    """Apply one ``section.key=value`` assignment; the value is parsed as YAML."""
    if "=" not in assignment:
        raise ConfigError(f"--set expects KEY=VALUE, got {assignment!r}")
    key, text = assignment.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"--set has an empty key: {assignment!r}")
    try:
        value = yaml.safe_load(text) if text.strip() else ""
    except yaml.YAMLError as exc:
        raise ConfigError(f"--set {key}: cannot parse value {text!r}: {exc}") from None
    _set_path(tree, key, value)
    return tree


def _number(value, where):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", ".inf"):
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None


def _complex(value, where):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a complex number, got {value!r}")
    try:
        return complex(value.replace(" ", "")) if isinstance(value, str) else complex(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a complex number, got {value!r}") from None


def _number_list(value, where, positive=True, allow_zero=False):
    if value is None:
        return ()
    if not isinstance(value, (list, tuple)):
        value = [value]
    out = []
    for i, v in enumerate(value):
        x = _number(v, f"{where}[{i}]")
        if positive and not (x > 0 or (allow_zero and x == 0)) or math.isinf(x):
            bound = ">= 0" if allow_zero else "> 0"
            raise ConfigError(f"{where}[{i}]: must be finite and {bound}, got {v!r}")
        out.append(x)
    return tuple(out)


def _model(spec, where):
    if not isinstance(spec, dict) or "model" not in spec:
        raise ConfigError(f"{where}: needs a 'model' key")
    kind = str(spec["model"]).lower()
    try:
        if kind == "vacuum":
            return Vacuum()
        if kind in ("dielectric", "constant"):
            return ConstantPermittivity(_complex(spec.get("epsilon", 1.0), f"{where}.epsilon"))
        if kind == "drude":
            if "skin_depth_um" not in spec:
                raise ConfigError(f"{where}: drude model needs skin_depth_um")
            return DrudeSkinDepth(_number(spec["skin_depth_um"], f"{where}.skin_depth_um") * UM)
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: unknown model {spec['model']!r} "
                      "(expected vacuum, dielectric or drude)")


def _stack(spec):
    if spec is None or spec == []:
        return None
    if not isinstance(spec, list):
        raise ConfigError("stack: expected a list of layers")
    layers = []
    for i, layer in enumerate(spec):
        where = f"stack[{i}]"
        model = _model(layer, where)
        thick = _number(layer.get("thickness_um", "inf"), f"{where}.thickness_um")
        try:
            layers.append(Layer(model, thick * UM if math.isfinite(thick) else math.inf))
        except DomainError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    try:
        return LayerStack(tuple(layers))
    except DomainError as exc:
        raise ConfigError(f"stack: {exc}") from None


def _section(tree, name):
    sec = tree.get(name, {})
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    return sec


def build(tree):
    """Validate a raw configuration tree and convert it to :class:`RunConfig`."""
    if not isinstance(tree, dict):
        raise ConfigError("configuration must be a mapping")
    atom = _section(tree, "atom")
    geo = _section(tree, "geometry")
    hw = _section(tree, "halfwidth")
    num = _section(tree, "numerics")
    out = _section(tree, "output")

    f = _number(atom.get("frequency_hz", 560e3), "atom.frequency_hz")
    if not (f > 0 and math.isfinite(f)):
        raise ConfigError(f"atom.frequency_hz must be positive, got {f}")
    elems = atom.get("spin_elements", [str(v) for v in RB87_SURFACE_ELEMENTS])
    if not isinstance(elems, list) or len(elems) != 3:
        raise ConfigError("atom.spin_elements must be a list of three values")
    elems = tuple(_complex(v, f"atom.spin_elements[{i}]") for i, v in enumerate(elems))
    T = _number(atom.get("temperature_k", 0.0), "atom.temperature_k")
    if not (T >= 0 and math.isfinite(T)):
        raise ConfigError(f"atom.temperature_k must be >= 0, got {T}")

    d = tuple(x * UM for x in _number_list(geo.get("d_um"), "geometry.d_um"))
    l = tuple(x * UM for x in _number_list(geo.get("l_um"), "geometry.l_um", allow_zero=True))
    h = tuple(x * UM for x in _number_list(geo.get("h_um"), "geometry.h_um"))
    t = _number_list(geo.get("t_s"), "geometry.t_s", allow_zero=True)
    axis = str(geo.get("axis", "x"))
    if axis not in ("x", "y"):
        raise ConfigError(f"geometry.axis must be 'x' or 'y', got {axis!r}")
    if not (d or l or h or t):
        raise ConfigError("at least one sweep axis (d_um, l_um, h_um, t_s) must be non-empty")

    deltas = tuple(x * UM for x in _number_list(hw.get("delta_um"), "halfwidth.delta_um"))
    film_model = str(hw.get("film_model", "drude"))
    if film_model not in ("drude", "vacuum"):
        raise ConfigError(f"halfwidth.film_model must be drude or vacuum, got {film_model!r}")
    substrate = _model(hw.get("substrate", {"model": "dielectric", "epsilon": "2.25"}),
                       "halfwidth.substrate")

    tol = _number(num.get("tol", 1e-8), "numerics.tol")
    if not (0 < tol < 1):
        raise ConfigError(f"numerics.tol must lie in (0, 1), got {tol}")
    return RunConfig(
        frequency_hz=f, spin_elements=elems, temperature=T, stack=_stack(tree.get("stack")),
        d=d, l=l, h=h, t=t, axis=axis, deltas=deltas, film_model=film_model,
        substrate=substrate, tol=tol, output_dir=str(out.get("directory", ".")),
        raw=copy.deepcopy(tree))


def resolve_tree(text=None, overrides=(), tol=None):
    """Merge preset, file contents and overrides into one raw tree."""
    user = {}
    if text is not None:
        try:
            user = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse configuration: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("configuration must be a mapping")
    preset = user.pop("preset", None)
    for item in overrides:
        if item.split("=", 1)[0].strip() == "preset":
            preset = item.split("=", 1)[1].strip()
    preset = DEFAULT_PRESET if preset is None else str(preset)
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))}")
    tree = _deep_merge(PRESETS[preset], user)
    for item in overrides:
        if item.split("=", 1)[0].strip() != "preset":
            apply_override(tree, item)
    if tol is not None:
        tree.setdefault("numerics", {})["tol"] = float(tol)
    return tree


def load(path=None, overrides=(), tol=None):
    """Read ``path`` (optional), apply overrides and return a :class:`RunConfig`."""
    text = None
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    return build(resolve_tree(text, overrides, tol))


def dump(tree):
    """Serialise a raw tree back to YAML text."""
    return yaml.safe_dump(tree, sort_keys=False, default_flow_style=None)


def template(preset=DEFAULT_PRESET):
    """Commented YAML template holding the full settings of ``preset``."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    return TEMPLATE_HEADER + dump(PRESETS[preset])
