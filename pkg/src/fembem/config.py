"""Plain-text key=value configuration for the experiment harness.

One ``key = value`` pair per line; ``#`` starts a comment; blank lines are
ignored.  Values are kept as strings and coerced by the consuming config
dataclass, so files stay trivially diffable and language-agnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def parse_config_file(path) -> dict[str, str]:
    with open(path, encoding="utf-8") as f:
        return parse_config_text(f.read())


def _as_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _as_couplings(s: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in s.split(",") if part.strip())
    for name in names:
        if name not in ("JN", "Costabel"):
            raise ConfigError(f"unknown coupling {name!r} (use JN, Costabel)")
    if not names:
        raise ConfigError("empty coupling list")
    return names


def _as_floats(s: str) -> tuple[float, ...]:
    return tuple(float(p) for p in s.split(",") if p.strip())


def _as_ints(s: str) -> tuple[int, ...]:
    return tuple(int(p) for p in s.split(",") if p.strip())


@dataclass
class SweepConfig:
    kappa_min: float = 4.28
    kappa_max: float = 4.42
    kappa_step: float = 0.002
    couplings: tuple[str, ...] = ("JN", "Costabel")
    kappa_mesh: float = 10.0
    points_per_wavelength: float = 20.0
    gmres_tol: float = 1e-8
    gmres_restart: int = 200
    gmres_maxit: int = 400
    output_prefix: str = "out/"
    refine_near_resonances: bool = True

    _COERCE = {
        "kappa_min": float, "kappa_max": float, "kappa_step": float,
        "couplings": _as_couplings, "kappa_mesh": float,
        "points_per_wavelength": float, "gmres_tol": float,
        "gmres_restart": int, "gmres_maxit": int, "output_prefix": str,
        "refine_near_resonances": _as_bool,
    }

    def __post_init__(self):
        if not (self.kappa_min < self.kappa_max):
            raise ConfigError("kappa_min must be below kappa_max")
        if self.kappa_step <= 0:
            raise ConfigError("kappa_step must be positive")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "SweepConfig":
        kwargs = {}
        for key, value in mapping.items():
            if key not in cls._COERCE:
                raise ConfigError(f"unknown sweep config key {key!r}")
            if value is None:
                continue
            try:
                kwargs[key] = cls._COERCE[key](value) if isinstance(value, str) else value
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
        return cls(**kwargs)


@dataclass
class KernelStudyConfig:
    kappas: tuple[float, ...] = (4.30, 4.3268639565, 4.3857419080)
    couplings: tuple[str, ...] = ("JN", "Costabel")
    kappa_mesh: float = 10.0
    points_per_wavelength: float = 20.0
    output_prefix: str = "out/"

    _COERCE = {
        "kappas": _as_floats, "couplings": _as_couplings, "kappa_mesh": float,
        "points_per_wavelength": float, "output_prefix": str,
    }

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "KernelStudyConfig":
        kwargs = {}
        for key, value in mapping.items():
            if key not in cls._COERCE:
                raise ConfigError(f"unknown kernel-study config key {key!r}")
            kwargs[key] = cls._COERCE[key](value) if isinstance(value, str) else value
        return cls(**kwargs)


@dataclass
class BioVerifyConfig:
    n_panels: tuple[int, ...] = (100, 200, 400)
    kappa: float = 4.3
    radius: float = 2.0
    max_mode: int = 20
    output_prefix: str = "out/"

    _COERCE = {
        "n_panels": _as_ints, "kappa": float, "radius": float,
        "max_mode": int, "output_prefix": str,
    }

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "BioVerifyConfig":
        kwargs = {}
        for key, value in mapping.items():
            if key not in cls._COERCE:
                raise ConfigError(f"unknown bio-verify config key {key!r}")
            kwargs[key] = cls._COERCE[key](value) if isinstance(value, str) else value
        return cls(**kwargs)


@dataclass
class SolveConfig:
    kappa: float = 4.30
    coupling: str = "JN"
    kappa_mesh: float = 10.0
    points_per_wavelength: float = 20.0
    gmres_tol: float = 1e-8
    gmres_restart: int = 200
    gmres_maxit: int = 400
    output_prefix: str = "out/"

    _COERCE = {
        "kappa": float, "coupling": str, "kappa_mesh": float,
        "points_per_wavelength": float, "gmres_tol": float,
        "gmres_restart": int, "gmres_maxit": int, "output_prefix": str,
    }

    def __post_init__(self):
        if self.coupling not in ("JN", "Costabel"):
            raise ConfigError(f"unknown coupling {self.coupling!r}")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "SolveConfig":
        kwargs = {}
        for key, value in mapping.items():
            if key not in cls._COERCE:
                raise ConfigError(f"unknown solve config key {key!r}")
            kwargs[key] = cls._COERCE[key](value) if isinstance(value, str) else value
        return cls(**kwargs)
