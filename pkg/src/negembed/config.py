"""Configuration records and the error hierarchy shared by every module."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from typing import Any

TAIL_POLICIES = ("power_bound", "exponential")


class NegembedError(Exception):
    """Base class for library errors."""


class DomainError(NegembedError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at a pole of a gamma-type expression."""


class MomentNotFiniteError(DomainError):
    """The requested moment of a stable law does not exist."""


class NonConvergenceError(NegembedError, ArithmeticError):
    """A numerical routine stopped before meeting its tolerance.

    ``estimate`` and ``error`` carry the best value reached and its bound.
    """

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class InfeasibleCertificateError(DomainError):
    """No admissible exponent tuple exists for the moment certificate."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_panels: int = 200_000
    tail_policy: str = "power_bound"
    mc_samples: int = 1_000_000
    # acceptance threshold for the Monte Carlo route (rel_tol is far below MC reach)
    mc_rel_tol: float = 1e-2
    # sphere rules converge algebraically on kinked norms
    sphere_rel_tol: float = 1e-6
    mc_seed: int = 0

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.mc_rel_tol > 0 and self.sphere_rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_panels < 16:
            raise DomainError("max_panels must be at least 16")
        if self.tail_policy not in TAIL_POLICIES:
            raise DomainError(f"tail_policy must be one of {TAIL_POLICIES}")
        if self.mc_samples < 100:
            raise DomainError("mc_samples must be at least 100")

    def tightened(self, factor: float = 10.0) -> "QuadratureConfig":
        return replace(
            self,
            rel_tol=self.rel_tol / factor,
            abs_tol=self.abs_tol / factor,
            sphere_rel_tol=self.sphere_rel_tol / factor,
        )


@dataclass(frozen=True)
class ScanConfig:
    """Sampling plan for sign scans.

    ``grid`` is the number of log-spaced levels per coordinate, ``samples`` the
    number of extra seeded random directions.
    """

    grid: int = 7
    samples: int = 64
    seed: int = 0
    floor: float = 1e-3
    decision_tol: float | None = None
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self) -> None:
        if self.grid < 2:
            raise DomainError("grid must have at least two levels")
        if self.samples < 0:
            raise DomainError("samples must be nonnegative")
        if not 0 < self.floor < 1:
            raise DomainError("floor must lie in (0, 1)")


CONFIG_ENV = "NEGEMBED_CONFIG"


def _coerce(value: str, like: Any) -> Any:
    if isinstance(like, bool):
        return value.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(float(value))
    if isinstance(like, float):
        return float(value)
    return value.strip()


def read_kv_file(path: str | os.PathLike[str]) -> dict[str, str]:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def quad_config_from(overrides: dict[str, str], base: QuadratureConfig | None = None) -> QuadratureConfig:
    base = base or QuadratureConfig()
    known = {f.name: getattr(base, f.name) for f in fields(base)}
    kw = {k: _coerce(v, known[k]) for k, v in overrides.items() if k in known}
    return replace(base, **kw)
