"""Problem model: bounds, input layouts, agent specs, datasets, configs.

An experiment is a set of agents, each owning a black-box objective over a
box domain whose dimensions are split into a shared block (semantically
identical across agents, index lists aligned position-by-position) and a
private block. Configs are declarative: built-in benchmark agents are
referenced by family name and index, never by callable, so configs
serialize cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import yaml

METHODS = ("arco", "separate", "uniform_cbo")
COLLABORATIVE_METHODS = ("arco", "uniform_cbo")


class ConfigError(ValueError):
    """Invalid problem or experiment description."""


@dataclass(frozen=True)
class Bounds:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi):
            raise ConfigError("bounds lower/upper lengths differ")
        if len(lo) < 1:
            raise ConfigError("bounds must cover at least one dimension")
        if not all(np.isfinite(lo)) or not all(np.isfinite(hi)):
            raise ConfigError("bounds must be finite")
        bad = [j for j in range(len(lo)) if lo[j] >= hi[j]]
        if bad:
            raise ConfigError(f"degenerate bounds (lower >= upper) at dims {bad}")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def lower_array(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float)

    @property
    def upper_array(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float)

    @property
    def span(self) -> np.ndarray:
        return self.upper_array - self.lower_array

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower_array) and np.all(x <= self.upper_array))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower_array, self.upper_array)


@dataclass(frozen=True)
class InputLayout:
    """Partition of dimension indices into shared and private blocks.

    The shared lists of two agents correspond position-by-position:
    ``shared_dims[m]`` of agent i and agent j name the same quantity even if
    the integer indices differ. Order is therefore meaningful.
    """

    shared_dims: tuple[int, ...]
    private_dims: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "shared_dims", tuple(int(i) for i in self.shared_dims))
        object.__setattr__(self, "private_dims", tuple(int(i) for i in self.private_dims))
        all_dims = self.shared_dims + self.private_dims
        if len(set(all_dims)) != len(all_dims):
            raise ConfigError("layout lists a dimension twice")
        if set(all_dims) != set(range(len(all_dims))):
            raise ConfigError(
                "layout must partition 0..d-1 exactly; "
                f"got shared={self.shared_dims} private={self.private_dims}"
            )

    @property
    def dimension(self) -> int:
        return len(self.shared_dims) + len(self.private_dims)

    @property
    def n_shared(self) -> int:
        return len(self.shared_dims)


@dataclass
class AgentSpec:
    """One agent: objective, domain, layout, budget, and optional metadata.

    ``true_optimum``/``f_min``/``f_max`` feed the normalized metrics; agents
    lacking them are skipped (not defaulted) in metric aggregation.
    """

    id: int
    objective: Callable[[np.ndarray], float]
    bounds: Bounds
    layout: InputLayout
    budget: int
    n_init: int
    true_optimum: float | None = None
    f_min: float | None = None
    f_max: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.id < 0:
            raise ConfigError("agent id must be >= 0")
        if self.budget < 0:
            raise ConfigError(f"agent {self.id}: budget must be >= 0")
        if self.n_init < 1:
            raise ConfigError(f"agent {self.id}: n_init must be >= 1")
        if self.layout.dimension != self.bounds.dimension:
            raise ConfigError(
                f"agent {self.id}: layout covers {self.layout.dimension} dims, "
                f"bounds cover {self.bounds.dimension}"
            )
        have_range = self.f_min is not None and self.f_max is not None
        if (self.f_min is None) != (self.f_max is None):
            raise ConfigError(f"agent {self.id}: f_min and f_max must come together")
        if have_range:
            if not (self.f_min < self.f_max):
                raise ConfigError(f"agent {self.id}: f_min must be < f_max")
            if self.true_optimum is not None and not (
                self.f_min <= self.true_optimum <= self.f_max
            ):
                raise ConfigError(
                    f"agent {self.id}: true_optimum outside [f_min, f_max]"
                )

    @property
    def dimension(self) -> int:
        return self.bounds.dimension


class Dataset:
    """Append-only observation store for one agent."""

    def __init__(self, bounds: Bounds):
        self.bounds = bounds
        self._x: list[np.ndarray] = []
        self._y: list[float] = []

    def append(self, x: np.ndarray, y: float) -> None:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.bounds.dimension:
            raise ValueError("input dimension does not match the agent's bounds")
        if not self.bounds.contains(x):
            raise ValueError(f"input {x!r} outside the agent's bounds")
        y = float(y)
        if not np.isfinite(y):
            raise ValueError("observations must be finite")
        self._x.append(x.copy())
        self._y.append(y)

    def extend(self, x: np.ndarray, y: np.ndarray) -> None:
        for xi, yi in zip(np.atleast_2d(x), np.atleast_1d(y)):
            self.append(xi, yi)

    @property
    def x(self) -> np.ndarray:
        if not self._x:
            return np.empty((0, self.bounds.dimension))
        return np.vstack(self._x)

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self._y, dtype=float)

    def __len__(self) -> int:
        return len(self._y)

    def copy(self) -> "Dataset":
        out = Dataset(self.bounds)
        out._x = [v.copy() for v in self._x]
        out._y = list(self._y)
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of a suite: problem, methods, replicates, knobs.

    ``benchmark`` names a built-in family ('sasena', 'ackley', 'borehole',
    'wingweight'); alternatively ``agents`` lists inline specs, each a mapping
    with keys family/agent and optional budget/n_init/shared_dims/lower/upper
    overrides. ``iterations`` (the horizon T) defaults to the maximum budget.
    """

    name: str = "experiment"
    methods: tuple[str, ...] = ("arco",)
    seeds: tuple[int, ...] = (0,)
    benchmark: str | None = None
    scenario: int = 1
    agents: tuple[dict, ...] | None = None
    iterations: int | None = None
    lengthscale: float | None = None
    alpha: float = 3.0
    proximity_fraction: float = 0.1
    grid_multiplier: int = 50
    candidates_per_dim: int = 1024
    sinkhorn_tol: float = 1.0e-9
    sinkhorn_max_iter: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(str(m) for m in self.methods))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.agents is not None:
            object.__setattr__(self, "agents", tuple(dict(a) for a in self.agents))

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "methods": list(self.methods),
            "seeds": list(self.seeds),
            "benchmark": self.benchmark,
            "scenario": self.scenario,
            "agents": [dict(a) for a in self.agents] if self.agents is not None else None,
            "iterations": self.iterations,
            "lengthscale": self.lengthscale,
            "alpha": self.alpha,
            "proximity_fraction": self.proximity_fraction,
            "grid_multiplier": self.grid_multiplier,
            "candidates_per_dim": self.candidates_per_dim,
            "sinkhorn_tol": self.sinkhorn_tol,
            "sinkhorn_max_iter": self.sinkhorn_max_iter,
        }
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        data = dict(raw)
        unknown = set(data) - {
            "name", "methods", "seeds", "benchmark", "scenario", "agents",
            "iterations", "lengthscale", "alpha", "proximity_fraction",
            "grid_multiplier", "candidates_per_dim", "sinkhorn_tol",
            "sinkhorn_max_iter", "replicates", "seed0", "method",
        }
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "method" in data and "methods" not in data:
            data["methods"] = [data.pop("method")]
        else:
            data.pop("method", None)
        # replicates/seed0 are sugar for an explicit seed list
        if "seeds" not in data and "replicates" in data:
            count = int(data.pop("replicates"))
            start = int(data.pop("seed0", 0))
            data["seeds"] = list(range(start, start + count))
        else:
            data.pop("replicates", None)
            data.pop("seed0", None)
        if data.get("agents") is not None:
            data["agents"] = tuple(dict(a) for a in data["agents"])
        defaults = cls()
        kwargs = {}
        for key in (
            "name", "methods", "seeds", "benchmark", "scenario", "agents",
            "iterations", "lengthscale", "alpha", "proximity_fraction",
            "grid_multiplier", "candidates_per_dim", "sinkhorn_tol",
            "sinkhorn_max_iter",
        ):
            kwargs[key] = data.get(key, getattr(defaults, key))
        return cls(**kwargs)


def save_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))


def load_config(path) -> ExperimentConfig:
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} does not hold a mapping")
    return ExperimentConfig.from_dict(raw)


def validate_agents(agents: Sequence[AgentSpec], collaborative: bool) -> list[str]:
    """Cross-agent consistency checks; returns a list of problems (empty = ok)."""
    problems: list[str] = []
    if not agents:
        return ["experiment has no agents"]
    ids = [a.id for a in agents]
    if ids != list(range(len(agents))):
        problems.append(f"agent ids must be 0..{len(agents) - 1} in order, got {ids}")
    n_shared = {a.layout.n_shared for a in agents}
    if len(n_shared) != 1:
        problems.append(f"agents disagree on shared-dimension count: {sorted(n_shared)}")
    else:
        width = n_shared.pop()
        if width == 0 and collaborative:
            problems.append("collaborative methods need at least one shared dimension")
        if width > 0 and len(agents) > 1:
            ref = agents[0]
            ref_lo = [ref.bounds.lower[j] for j in ref.layout.shared_dims]
            ref_hi = [ref.bounds.upper[j] for j in ref.layout.shared_dims]
            for a in agents[1:]:
                lo = [a.bounds.lower[j] for j in a.layout.shared_dims]
                hi = [a.bounds.upper[j] for j in a.layout.shared_dims]
                if lo != ref_lo or hi != ref_hi:
                    problems.append(
                        f"agent {a.id}: shared-dimension bounds differ from agent 0"
                    )
    if all(a.budget == 0 for a in agents):
        problems.append("all budgets are zero; nothing to run")
    return problems


def validate_experiment(config: ExperimentConfig) -> ExperimentConfig:
    """Validate and resolve defaults. Raises ConfigError listing every problem.

    Returns the config with ``iterations`` resolved to the maximum budget
    when unset. Agent materialization happens through the benchmark registry,
    so formula transcription problems surface here too.
    """
    problems: list[str] = []
    if not config.methods:
        problems.append("methods list is empty")
    for m in config.methods:
        if m not in METHODS:
            problems.append(f"unknown method {m!r}; expected one of {METHODS}")
    if not config.seeds:
        problems.append("seeds list is empty")
    if len(set(config.seeds)) != len(config.seeds):
        problems.append("replicate seeds must be distinct")
    if (config.benchmark is None) == (config.agents is None):
        problems.append("give exactly one of `benchmark` or `agents`")
    if config.iterations is not None and config.iterations < 1:
        problems.append("iterations must be >= 1 when given")
    if config.lengthscale is not None and config.lengthscale <= 0:
        problems.append("lengthscale must be > 0 when given")
    if config.alpha < 0:
        problems.append("alpha must be >= 0")
    if not (0.0 < config.proximity_fraction < 1.0):
        problems.append("proximity_fraction must lie in (0, 1)")
    if config.grid_multiplier < 1:
        problems.append("grid_multiplier must be >= 1")
    if config.candidates_per_dim < 1:
        problems.append("candidates_per_dim must be >= 1")
    if config.sinkhorn_tol <= 0:
        problems.append("sinkhorn_tol must be > 0")
    if config.sinkhorn_max_iter < 1:
        problems.append("sinkhorn_max_iter must be >= 1")

    agents: list[AgentSpec] = []
    if not problems:
        from . import benchmarks  # deferred: benchmarks imports this module

        try:
            agents = benchmarks.build_agents(config)
        except ConfigError as err:
            problems.append(str(err))
        else:
            collaborative = any(m in COLLABORATIVE_METHODS for m in config.methods)
            problems.extend(validate_agents(agents, collaborative))

    if problems:
        raise ConfigError("invalid experiment:\n- " + "\n- ".join(problems))

    resolved = config
    if resolved.lengthscale is None and resolved.benchmark is not None:
        from . import benchmarks

        family = benchmarks.FAMILIES[resolved.benchmark]
        resolved = replace(resolved, lengthscale=family.lengthscale)
    if resolved.iterations is None:
        horizon = max(a.budget for a in agents)
        resolved = replace(resolved, iterations=horizon)
    return resolved
