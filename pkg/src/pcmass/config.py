"""
Run configuration: a JSON document describing the stack, the quadrature, the
regularisation, outputs and atoms.

Keys starting with ``_`` (conventionally ``_comment``) are ignored anywhere
in the document, so configs can carry their own notes.

Example::

    {
      "_comment": "n = 15 constant host, equal layers",
      "stack": {"d_h": 50, "d_l": 50, "host": {"type": "constant", "n": 15}},
      "regularization": {"omega_max": 10.65, "scheme": "mode"},
      "atoms": ["H", "Li", "Na"]
    }

Host types: ``constant`` (n), ``sellmeier`` (C1, C2), ``table`` (path to an
``omega_eV,n`` CSV, optional blend_end), ``hfo2_like``, ``metamaterial``
(a, g, dielectric: another host spec, optional blend_start/blend_end).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .bands import LayerStack
from .dispersion import (DEFAULT_BLEND, Constant, MetamaterialEffective, SellmeierTail,
                         hfo2_like, load_dispersion_table)
from .mass import QuadratureConfig, RegularizationConfig
from .units import ALKALI_IONIZATION, DomainError


class ConfigError(ValueError):
    pass


DEFAULT_GEOMETRY = {"d_h": 50.0, "d_l": 50.0}  # nm; the source gives no thicknesses

_QUAD_KEYS = {"k_rho_max", "n_rho", "n_z", "refinement", "tol_rel", "floor", "g_extra"}
_REG_KEYS = {"omega_max", "scheme", "k0"}


def _strip(obj):
    if isinstance(obj, dict):
        return {k: _strip(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, list):
        return [_strip(v) for v in obj]
    return obj


def _need(d, key, where):
    if key not in d:
        raise ConfigError(f"{where}: missing '{key}'")
    return d[key]


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    return float(v)


def build_host(spec: dict, base: Path | None = None, where="stack.host"):
    """Dispersion model from a host spec."""
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = _need(spec, "type", where)
    try:
        if kind == "constant":
            return Constant(_number(_need(spec, "n", where), where + ".n"))
        if kind == "sellmeier":
            return SellmeierTail(_number(_need(spec, "C1", where), where), _number(spec.get("C2", 0.0), where))
        if kind == "hfo2_like":
            return hfo2_like(_number(spec.get("blend_end", DEFAULT_BLEND[1]), where))
        if kind == "table":
            path = Path(_need(spec, "path", where))
            if base is not None and not path.is_absolute():
                path = base / path
            if not path.exists():
                raise ConfigError(f"{where}: table file {path} not found")
            return load_dispersion_table(path, _number(spec.get("blend_end", DEFAULT_BLEND[1]), where))
        if kind == "metamaterial":
            diel = build_host(_need(spec, "dielectric", where), base, where + ".dielectric")
            return MetamaterialEffective(
                _number(_need(spec, "a", where), where + ".a"),
                _number(_need(spec, "g", where), where + ".g"),
                diel,
                _number(spec.get("blend_start", DEFAULT_BLEND[0]), where),
                _number(spec.get("blend_end", DEFAULT_BLEND[1]), where),
            )
    except (DomainError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: unknown host type {kind!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Constant-index values (explicit list or start/stop/step) or (a, g) pairs."""

    n_values: tuple = ()
    metamaterial: tuple = ()
    d_h_fraction: float = 0.5

    def __post_init__(self):
        if not self.n_values and not self.metamaterial:
            raise ConfigError("sweep: no points")
        if any(n < 1 for n in self.n_values):
            raise ConfigError("sweep: indices must be >= 1")
        if not 0 < self.d_h_fraction < 1:
            raise ConfigError("sweep: d_h_fraction must lie in (0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        values = []
        if "n_h" in d:
            r = d["n_h"]
            if isinstance(r, list):
                values = [_number(v, "sweep.n_h") for v in r]
            else:
                start = _number(_need(r, "start", "sweep.n_h"), "sweep.n_h.start")
                stop = _number(_need(r, "stop", "sweep.n_h"), "sweep.n_h.stop")
                step = _number(_need(r, "step", "sweep.n_h"), "sweep.n_h.step")
                if start < 1:
                    raise ConfigError("sweep: start must be >= 1")
                if not step > 0:
                    raise ConfigError("sweep: step must be positive")
                k = 0
                while start + k * step <= stop + 1e-9 * step:
                    values.append(round(start + k * step, 12))
                    k += 1
        pairs = tuple((_number(a, "sweep.metamaterial"), _number(g, "sweep.metamaterial"))
                      for a, g in d.get("metamaterial", []))
        return cls(tuple(values), pairs, _number(d.get("d_h_fraction", 0.5), "sweep.d_h_fraction"))

    def to_dict(self) -> dict:
        out = {"d_h_fraction": self.d_h_fraction}
        if self.n_values:
            out["n_h"] = list(self.n_values)
        if self.metamaterial:
            out["metamaterial"] = [list(p) for p in self.metamaterial]
        return out


@dataclass
class RunConfig:
    stack: dict
    quadrature: dict = field(default_factory=dict)
    regularization: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    atoms: list = field(default_factory=lambda: [a.symbol for a in ALKALI_IONIZATION])
    bands: dict = field(default_factory=dict)
    ionize: dict = field(default_factory=dict)
    sweep: dict | None = None
    base_dir: Path | None = None

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        d = _strip(raw)
        unknown = set(d) - {"stack", "quadrature", "regularization", "outputs", "atoms", "bands", "ionize", "sweep"}
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        stack = dict(d.get("stack", {}))
        stack.setdefault("d_h", DEFAULT_GEOMETRY["d_h"])
        stack.setdefault("d_l", DEFAULT_GEOMETRY["d_l"])
        stack.setdefault("host", {"type": "constant", "n": 1.0})
        quad = dict(d.get("quadrature", {}))
        bad = set(quad) - _QUAD_KEYS
        if bad:
            raise ConfigError(f"quadrature: unknown keys {sorted(bad)}")
        reg = dict(d.get("regularization", {}))
        bad = set(reg) - _REG_KEYS
        if bad:
            raise ConfigError(f"regularization: unknown keys {sorted(bad)}")
        atoms = d.get("atoms", [a.symbol for a in ALKALI_IONIZATION])
        if not isinstance(atoms, list) or not all(isinstance(a, str) for a in atoms):
            raise ConfigError("atoms: expected a list of symbols")
        cfg = cls(stack, quad, reg, dict(d.get("outputs", {})), list(atoms), dict(d.get("bands", {})),
                  dict(d.get("ionize", {})), d.get("sweep"), base_dir)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {
            "stack": copy.deepcopy(self.stack),
            "quadrature": dict(self.quadrature),
            "regularization": dict(self.regularization),
            "outputs": dict(self.outputs),
            "atoms": list(self.atoms),
            "bands": copy.deepcopy(self.bands),
            "ionize": dict(self.ionize),
        }
        if self.sweep is not None:
            out["sweep"] = copy.deepcopy(self.sweep)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def validate(self):
        self.layer_stack()
        self.quadrature_config()
        self.regularization_config()
        if self.sweep is not None:
            self.sweep_spec()

    def host(self):
        return build_host(self.stack["host"], self.base_dir)

    def layer_stack(self) -> LayerStack:
        d_h = _number(self.stack["d_h"], "stack.d_h")
        d_l = _number(self.stack["d_l"], "stack.d_l")
        try:
            return LayerStack(d_h, d_l, self.host())
        except DomainError as exc:
            raise ConfigError(f"stack: {exc}") from None

    def quadrature_config(self, threads: int = 1) -> QuadratureConfig:
        try:
            return QuadratureConfig(**self.quadrature, threads=threads)
        except (TypeError, DomainError) as exc:
            raise ConfigError(f"quadrature: {exc}") from None

    def regularization_config(self) -> RegularizationConfig:
        r = dict(self.regularization)
        if "scheme" in r:
            r["matching"] = r.pop("scheme")
        try:
            return RegularizationConfig(**r)
        except (TypeError, DomainError) as exc:
            raise ConfigError(f"regularization: {exc}") from None

    def sweep_spec(self) -> SweepSpec:
        if self.sweep is None:
            raise ConfigError("config has no 'sweep' section")
        return SweepSpec.from_dict(self.sweep)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    return RunConfig.from_dict(raw, base_dir=path.parent)
