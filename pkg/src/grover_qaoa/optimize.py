"""Multistart BFGS minimisation of the ensemble expectation.

Each start draws its initial point from its own generator seeded with
``(seed, start_index)``, so results do not depend on execution order, on
the number of worker processes, or on how many later starts are requested.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from .charfn import CharacteristicFunction
from .ensemble import AngleSchedule, ExpectationObjective
from .errors import DomainError, NumericalError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OptimizationConfig:
    starts: int = 64
    seed: int = 0
    gamma_range: tuple[float, float] = (-2.0, 2.0)
    beta_range: tuple[float, float] = (0.0, TWO_PI)
    fd_step: float = 1e-6
    gradient_tolerance: float = 1e-8
    max_iterations: int = 500
    workers: int = 1

    def __post_init__(self):
        if self.starts < 1:
            raise DomainError(f"starts must be >= 1, got {self.starts}")
        if not self.fd_step > 0:
            raise DomainError(f"fd_step must be positive, got {self.fd_step}")
        for name in ("gamma_range", "beta_range"):
            lo, hi = getattr(self, name)
            if not hi > lo:
                raise DomainError(f"{name} must be a non-degenerate interval, got {(lo, hi)}")


class DescentResult(NamedTuple):
    point: np.ndarray
    value: float
    converged: bool
    iterations: int
    gradient_norm: float


@dataclass
class StartRecord:
    index: int
    start: list[float]
    point: list[float]
    value: float
    iterations: int
    converged: bool
    gradient_norm: float
    warm: bool = False


@dataclass
class OptimizationResult:
    p: int
    best_schedule: AngleSchedule
    best_value: float
    converged: bool
    config: OptimizationConfig
    per_start: list[StartRecord] = field(default_factory=list)

    def to_json(self, per_start: bool = True) -> dict:
        doc = {
            "p": self.p,
            "gammas": list(self.best_schedule.gammas),
            "betas": list(self.best_schedule.betas),
            "value": self.best_value,
            "starts": self.config.starts,
            "seed": self.config.seed,
            "converged": self.converged,
            "config": asdict(self.config),
        }
        if per_start:
            doc["per_start"] = [asdict(r) for r in self.per_start]
        return doc


def fd_gradient(objective: Callable[[np.ndarray], float], point, step: float) -> np.ndarray:
    """Central-difference gradient.

    Raises:
        NumericalError: if the objective is not finite at a probed point;
            ``exc.coordinate`` names the coordinate being differentiated.
    """
    if not step > 0:
        raise DomainError(f"step must be positive, got {step}")
    x = np.array(point, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        orig = x[i]
        x[i] = orig + step
        fp = objective(x)
        x[i] = orig - step
        fm = objective(x)
        x[i] = orig
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise NumericalError(f"objective not finite while differentiating coordinate {i}", i)
        grad[i] = (fp - fm) / (2.0 * step)
    return grad


def local_descent(objective, start, config: OptimizationConfig) -> DescentResult:
    """BFGS from ``start``; never returns a point worse than ``start``."""
    x0 = np.array(start, dtype=float)
    f0 = objective(x0)
    if not math.isfinite(f0):
        raise NumericalError("objective not finite at the start point")

    def jac(x):
        return fd_gradient(objective, x, config.fd_step)

    g0 = np.max(np.abs(jac(x0)))
    if g0 < config.gradient_tolerance:
        return DescentResult(x0, f0, True, 0, g0)

    res = minimize(
        objective,
        x0,
        jac=jac,
        method="BFGS",
        options={"gtol": config.gradient_tolerance, "norm": np.inf, "maxiter": config.max_iterations},
    )
    x, fx = np.asarray(res.x, dtype=float), float(res.fun)
    if not fx <= f0:
        x, fx = x0, f0
    gnorm = float(np.max(np.abs(jac(x))))
    return DescentResult(x, fx, gnorm < config.gradient_tolerance, int(res.nit), gnorm)


def canonical_vector(x) -> np.ndarray:
    """Pick the representative of ``x`` with first non-zero gamma positive and betas in [0, 2pi).

    ``(gammas, betas) -> (-gammas, -betas)`` and ``beta -> beta + 2pi`` leave
    the expectation unchanged, so this only changes the labelling.
    """
    x = np.array(x, dtype=float)
    p = x.size // 2
    nonzero = np.flatnonzero(x[:p])
    if nonzero.size and x[nonzero[0]] < 0:
        x = -x
    x[p:] = np.mod(x[p:], TWO_PI)
    return x


def start_point(config: OptimizationConfig, p: int, index: int) -> np.ndarray:
    rng = np.random.default_rng([config.seed, index])
    gammas = rng.uniform(*config.gamma_range, size=p)
    betas = rng.uniform(*config.beta_range, size=p)
    return np.concatenate((gammas, betas))


def _run_start(objective, start, config, index, warm) -> StartRecord:
    res = local_descent(objective, start, config)
    return StartRecord(
        index=index,
        start=[float(v) for v in start],
        point=[float(v) for v in canonical_vector(res.point)],
        value=res.value,
        iterations=res.iterations,
        converged=res.converged,
        gradient_norm=res.gradient_norm,
        warm=warm,
    )


def minimize_ep(
    cf: CharacteristicFunction,
    p: int,
    config: OptimizationConfig | None = None,
    extra_starts: Sequence[Sequence[float]] = (),
) -> OptimizationResult:
    """Minimise ``ep_full(cf, .)`` over ``2p`` angles from many starts.

    ``extra_starts`` are additional (e.g. warm) start vectors, run after the
    ``config.starts`` random ones.
    """
    config = config or OptimizationConfig()
    objective = ExpectationObjective(cf, p)
    jobs = [(start_point(config, p, i), i, False) for i in range(config.starts)]
    jobs += [
        (np.asarray(x, dtype=float), config.starts + j, True) for j, x in enumerate(extra_starts)
    ]
    for x, _, _ in jobs:
        if x.shape != (2 * p,):
            raise DomainError(f"start vector has shape {x.shape}, expected {(2 * p,)}")

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_run_start, objective, x, config, i, w) for x, i, w in jobs]
            records = [f.result() for f in futures]
    else:
        records = [_run_start(objective, x, config, i, w) for x, i, w in jobs]

    candidates = [r for r in records if r.converged]
    converged = bool(candidates)
    best = min(candidates or records, key=lambda r: (r.value, tuple(r.point)))
    return OptimizationResult(
        p=p,
        best_schedule=AngleSchedule.from_vector(best.point),
        best_value=best.value,
        converged=converged,
        config=config,
        per_start=records,
    )
