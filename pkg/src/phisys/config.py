"""Run configuration: parsing, validation and construction of model objects."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .grid import Mesh
from .nfunction import PhiKernel, build_nfunction
from .system import Structure, make_spec

EXPERIMENTS = ("nfunction-audit", "solve", "continuation", "comparison", "barrier")


@dataclass
class RunConfig:
    kernel: dict
    mesh: dict
    experiments: list
    system: dict = None
    solver: dict = field(default_factory=dict)
    comparison: dict = field(default_factory=dict)
    output: str = "phisys-out"
    seed: int = 0
    source: str = ""

    @classmethod
    def from_dict(cls, data, source=""):
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        known = {"kernel", "mesh", "experiments", "system", "solver", "comparison", "output", "seed"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        for key in ("kernel", "mesh"):
            if key not in data:
                raise ConfigError(f"missing {key!r} block")
        exps = data.get("experiments") or []
        if not isinstance(exps, list) or not exps:
            raise ConfigError("at least one experiment is required")
        bad = [e for e in exps if e not in EXPERIMENTS]
        if bad:
            raise ConfigError(f"unknown experiments {bad}; choose from {list(EXPERIMENTS)}")
        if any(e in exps for e in ("solve", "continuation", "barrier")) and not data.get("system"):
            raise ConfigError("solve, continuation and barrier experiments need a 'system' block")
        if "comparison" in exps and not (data.get("comparison") or {}).get("instances"):
            raise ConfigError("comparison experiment needs 'comparison.instances'")
        cfg = cls(
            kernel=dict(data["kernel"]),
            mesh=dict(data["mesh"]),
            experiments=list(exps),
            system=dict(data["system"]) if data.get("system") else None,
            solver=dict(data.get("solver") or {}),
            comparison=dict(data.get("comparison") or {}),
            output=str(data.get("output", "phisys-out")),
            seed=int(data.get("seed", 0)),
            source=source,
        )
        cfg.schedule()  # validates the schedule early
        return cfg

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        try:
            data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
        except (yaml.YAMLError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        return cls.from_dict(data, source=str(path))

    # -- builders
    def build_kernel(self):
        k = self.kernel
        family = str(k.get("family", "power")).lower().replace("-", "_")
        try:
            if family == "power":
                return PhiKernel.power(float(k["p"]))
            if family == "sum_powers":
                return PhiKernel.sum_powers(*[float(p) for p in k["exponents"]])
        except KeyError as exc:
            raise ConfigError(f"kernel block misses {exc}") from None
        raise ConfigError(f"unsupported kernel family {family!r} (power or sum_powers)")

    def build_nfunction(self):
        return build_nfunction(self.build_kernel())

    def build_mesh(self):
        m = self.mesh
        kind = str(m.get("type", "interval")).lower()
        try:
            if kind == "interval":
                return Mesh.interval(float(m.get("x0", 0.0)), float(m.get("x1", 1.0)), int(m.get("n", 100)))
            if kind == "rectangle":
                return Mesh.rectangle(
                    float(m.get("x0", 0.0)), float(m.get("x1", 1.0)), float(m.get("y0", 0.0)),
                    float(m.get("y1", 1.0)), int(m.get("nx", 16)), int(m.get("ny", 16)),
                )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad mesh block: {exc}") from None
        raise ConfigError(f"unsupported mesh type {kind!r}")

    def build_spec(self, nf, mesh):
        s = dict(self.system)
        try:
            structure = Structure.parse(s.pop("structure", "general"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        keys = {"alpha", "beta", "gamma", "sigma", "a", "b", "q"}
        extra = set(s) - keys
        if extra:
            raise ConfigError(f"unknown system keys: {sorted(extra)}")
        if "alpha" not in s:
            raise ConfigError("system block needs 'alpha'")
        try:
            return make_spec(nf, mesh, structure=structure, **s)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad system block: {exc}") from None

    def schedule(self):
        sv = self.solver
        if "schedule" in sv:
            sch = sv["schedule"]
            if isinstance(sch, dict):
                from .solver import halving_schedule

                sch = halving_schedule(float(sch.get("first", 0.5)), float(sch.get("last", 1 / 256)))
            sch = [float(e) for e in sch]
        else:
            from .solver import halving_schedule

            sch = halving_schedule()
        if not sch or any(e <= 0 for e in sch) or any(b >= a for a, b in zip(sch, sch[1:])):
            raise ConfigError("solver.schedule must be positive and strictly decreasing")
        return sch
