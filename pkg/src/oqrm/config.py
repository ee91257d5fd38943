"""Declarative run configuration (JSON) and its validation.

Example::

    {
      "protocol": "relax",
      "engine": "mps",
      "model": {"omega_0": 0.75, "epsilon": 0.01},
      "bath": {"alpha": 0.2, "omega_c": 10.0, "n_modes": 60},
      "numerics": {"d_res": 12, "d_bath": 6, "max_bond": 64},
      "relax": {"g": [0.4, 0.6, 0.75], "t_max": 20.0, "dt": 0.1},
      "quench": {"g_f": 1.2, "t_q": [10, 20, 40], "dt": 0.05,
                 "bkt": {"A": 0.5, "B": 2.0, "g_c": 0.9165}},
      "output_dir": "runs/relax",
      "seed": 0
    }
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

from .analysis import BktFit
from .bath import BathParams
from .errors import ConfigError, DomainError
from .model import ModelParams
from .protocols import ENGINES, Numerics

PROTOCOLS = ("relax", "quench", "freeze-out")


@dataclass(frozen=True)
class RelaxSweep:
    g: tuple = (0.4, 0.6, 0.75)
    t_max: float = 20.0
    dt: float = 0.01
    sample_stride: int = 1
    fit_start: float = 0.0


@dataclass(frozen=True)
class QuenchSweep:
    g_f: float = 1.2
    t_q: tuple = (10.0,)
    dt: float = 0.01
    n_samples: int = 20
    bkt: dict | None = None
    bkt_file: str | None = None


@dataclass(frozen=True)
class RunConfig:
    protocol: str = "relax"
    engine: str = "mps"
    model: ModelParams = field(default_factory=lambda: ModelParams(epsilon=0.01))
    bath: BathParams = field(default_factory=BathParams)
    numerics: Numerics = field(default_factory=Numerics)
    relax: RelaxSweep = field(default_factory=RelaxSweep)
    quench: QuenchSweep = field(default_factory=QuenchSweep)
    output_dir: str | None = None
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def bkt_fit(self) -> BktFit:
        """Inline ``quench.bkt`` parameters or the report named by ``quench.bkt_file``."""
        from .io import read_json

        q = self.quench
        if q.bkt is not None:
            src, key = q.bkt, "quench.bkt"
        elif q.bkt_file is not None:
            doc = read_json(q.bkt_file)
            src, key = doc.get("parameters", doc), "quench.bkt_file"
        else:
            raise ConfigError("quench.bkt: freeze-out needs BKT parameters (quench.bkt or quench.bkt_file)")
        try:
            return BktFit(float(src["A"]), float(src["B"]), float(src["g_c"]))
        except KeyError as exc:
            raise ConfigError(f"{key}: missing parameter {exc.args[0]}") from None
        except DomainError as exc:
            raise ConfigError(f"{key}: {exc}") from None


def _build(cls, data, prefix):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix}: expected an object")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{prefix}.{unknown[0]}: unknown key")
    kwargs = {}
    for f in fields(cls):
        if f.name in data:
            v = data[f.name]
            if isinstance(v, list):
                v = tuple(v)
            kwargs[f.name] = v
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{prefix}: {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"{prefix}: {exc}") from None


def _positive(value, key):
    try:
        ok = float(value) > 0
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise ConfigError(f"{key}: must be a positive number, got {value!r}")


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    top = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(doc) - top)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    protocol = doc.get("protocol", "relax")
    if protocol not in PROTOCOLS:
        raise ConfigError(f"protocol: must be one of {PROTOCOLS}, got {protocol!r}")
    engine = doc.get("engine", "mps")
    if engine not in ENGINES:
        raise ConfigError(f"engine: must be one of {ENGINES}, got {engine!r}")
    model_doc = {"epsilon": 0.01, **(doc.get("model") or {})}
    cfg = RunConfig(
        protocol=protocol,
        engine=engine,
        model=_build(ModelParams, model_doc, "model"),
        bath=_build(BathParams, doc.get("bath"), "bath"),
        numerics=_build(Numerics, doc.get("numerics"), "numerics"),
        relax=_build(RelaxSweep, doc.get("relax"), "relax"),
        quench=_build(QuenchSweep, doc.get("quench"), "quench"),
        output_dir=doc.get("output_dir"),
        seed=int(doc.get("seed", 0)),
    )
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    num = cfg.numerics
    for key in ("d_res", "d_bath"):
        if int(getattr(num, key)) < 2:
            raise ConfigError(f"numerics.{key}: must be >= 2")
    if int(num.max_bond) < 1:
        raise ConfigError("numerics.max_bond: must be >= 1")
    if not 0 <= num.cutoff < 1:
        raise ConfigError("numerics.cutoff: must lie in [0, 1)")
    if num.tdvp_scheme not in ("auto", "one", "two"):
        raise ConfigError(f"numerics.tdvp_scheme: unknown scheme {num.tdvp_scheme!r}")
    r = cfg.relax
    if cfg.protocol == "relax":
        if len(r.g) == 0:
            raise ConfigError("relax.g: sweep axis is empty")
        for g in r.g:
            if g < 0:
                raise ConfigError(f"relax.g: coupling must be nonnegative, got {g}")
        _positive(r.t_max, "relax.t_max")
        _positive(r.dt, "relax.dt")
        if not 0 < cfg.model.epsilon <= 0.1 * cfg.model.delta:
            raise ConfigError("model.epsilon: must satisfy 0 < epsilon <= 0.1*delta")
        if int(r.sample_stride) < 1:
            raise ConfigError("relax.sample_stride: must be >= 1")
    q = cfg.quench
    if cfg.protocol in ("quench", "freeze-out"):
        if len(q.t_q) == 0:
            raise ConfigError("quench.t_q: sweep axis is empty")
        for t in q.t_q:
            _positive(t, "quench.t_q")
        _positive(q.g_f, "quench.g_f")
        _positive(q.dt, "quench.dt")
        if q.bkt is None and q.bkt_file is None:
            raise ConfigError("quench.bkt: freeze-out needs BKT parameters (quench.bkt or quench.bkt_file)")
        if q.bkt is not None:
            for k in ("A", "B", "g_c"):
                if k not in q.bkt:
                    raise ConfigError(f"quench.bkt.{k}: missing")
                _positive(q.bkt[k], f"quench.bkt.{k}")


def config_from_dict(doc: dict) -> RunConfig:
    """Inverse of ``RunConfig.to_dict`` (used to rebuild runs from manifests)."""
    return parse_config(doc)
