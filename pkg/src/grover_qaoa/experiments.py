"""Depth sweeps, finite-size convergence studies and landscape grids."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .charfn import CharacteristicFunction, EmpiricalCF, Spectrum
from .ensemble import P_MAX, AngleSchedule, e1_grid
from .errors import DomainError, ResourceLimitError
from .fileio import write_csv
from .optimize import OptimizationConfig, OptimizationResult, minimize_ep
from .problems import sample_spectrum

log = logging.getLogger(__name__)

CONVERGENCE_MAX_N = 20


# -- depth sweep ------------------------------------------------------------


@dataclass
class DepthRow:
    p: int
    gammas: tuple[float, ...]
    betas: tuple[float, ...]
    value: float
    converged: bool


@dataclass
class DepthSweepTable:
    rows: list[DepthRow] = field(default_factory=list)

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.rows])

    def csv_rows(self) -> list[list]:
        width = max(r.p for r in self.rows)
        header = ["p"] + [f"gamma_{i}" for i in range(1, width + 1)]
        header += [f"beta_{i}" for i in range(1, width + 1)] + ["value"]
        out = [header]
        for r in self.rows:
            pad = [""] * (width - r.p)
            out.append([r.p, *map(repr, r.gammas), *pad, *map(repr, r.betas), *pad, repr(r.value)])
        return out

    def to_csv(self, path, comments=None) -> None:
        write_csv(path, self.csv_rows(), comments)


def warm_starts(previous: AngleSchedule, count: int, scale: float, seed: int) -> list[np.ndarray]:
    """The zero-padded ``previous`` schedule plus ``count`` Gaussian perturbations of it."""
    base = previous.zero_padded().to_vector()
    rng = np.random.default_rng([seed, previous.p + 1, 1])
    return [base] + [base + rng.normal(0.0, scale, size=base.size) for _ in range(count)]


def depth_sweep(
    cf: CharacteristicFunction,
    p_max: int,
    config: OptimizationConfig | None = None,
    n_warm: int = 8,
    warm_scale: float = 0.1,
) -> tuple[DepthSweepTable, list[OptimizationResult]]:
    """Optimise depths ``1..p_max``, seeding each depth from the previous optimum."""
    if not 1 <= p_max <= P_MAX:
        raise DomainError(f"p_max must be in [1, {P_MAX}], got {p_max}")
    config = config or OptimizationConfig()
    table, results = DepthSweepTable(), []
    previous = None
    for p in range(1, p_max + 1):
        extra = [] if previous is None else warm_starts(previous, n_warm, warm_scale, config.seed)
        res = minimize_ep(cf, p, config, extra_starts=extra)
        if not res.converged:
            log.warning("depth %d: no start met the gradient tolerance", p)
        table.rows.append(DepthRow(p, res.best_schedule.gammas, res.best_schedule.betas,
                                   res.best_value, res.converged))
        results.append(res)
        previous = res.best_schedule
    return table, results


# -- finite-size convergence ------------------------------------------------


@dataclass
class ConvergenceRow:
    n: int
    instances: int
    mean_gamma: np.ndarray
    se_gamma: np.ndarray
    mean_beta: np.ndarray
    se_beta: np.ndarray
    mean_value: float
    gammas: np.ndarray  # (instances, p) canonical optima, kept for inspection
    betas: np.ndarray
    values: np.ndarray


@dataclass
class ConvergenceTable:
    kind: str
    p: int
    seed: int
    rows: list[ConvergenceRow] = field(default_factory=list)

    def csv_rows(self) -> list[list]:
        if self.p == 1:
            out = [["n", "instances", "mean_gamma", "se_gamma", "mean_beta", "se_beta", "mean_value"]]
        else:
            cols = ["n", "instances"]
            for name in ("mean_gamma", "se_gamma", "mean_beta", "se_beta"):
                cols += [f"{name}_{i}" for i in range(1, self.p + 1)]
            out = [cols + ["mean_value"]]
        for r in self.rows:
            line = [r.n, r.instances]
            if self.p == 1:
                line += [r.mean_gamma[0], r.se_gamma[0], r.mean_beta[0], r.se_beta[0]]
            else:
                for arr in (r.mean_gamma, r.se_gamma, r.mean_beta, r.se_beta):
                    line += list(arr)
            out.append([v if isinstance(v, int) else repr(float(v)) for v in line + [r.mean_value]])
        return out

    def to_csv(self, path, comments=None) -> None:
        write_csv(path, self.csv_rows(), comments)


def instance_seed(seed: int, n: int, index: int) -> int:
    """Seed of instance ``index`` at size ``n``, independent of all other instances."""
    return int(np.random.SeedSequence([seed, n, index]).generate_state(1)[0])


def _std_error(x: np.ndarray) -> np.ndarray:
    if x.shape[0] < 2:
        return np.zeros(x.shape[1:])
    return x.std(axis=0, ddof=1) / math.sqrt(x.shape[0])


def convergence_study(
    kind: str,
    p: int,
    sizes: Sequence[int],
    instances: int,
    seed: int,
    config: OptimizationConfig | None = None,
) -> ConvergenceTable:
    """Optimise ``instances`` random instances per size and average their angles.

    Angles are averaged in canonical form (first gamma positive, betas in
    [0, 2pi)) so that symmetric copies of the same optimum do not cancel.
    """
    if instances < 1:
        raise DomainError(f"instances must be >= 1, got {instances}")
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DomainError(f"sizes must be strictly increasing, got {sizes}")
    if sizes and sizes[-1] > CONVERGENCE_MAX_N:
        raise ResourceLimitError(f"n={sizes[-1]} exceeds the convergence-study guard n <= {CONVERGENCE_MAX_N}")
    config = config or OptimizationConfig(seed=seed)
    table = ConvergenceTable(kind, p, seed)
    for n in sizes:
        gammas, betas, values = [], [], []
        for i in range(instances):
            spectrum = sample_spectrum(kind, n, instance_seed(seed, n, i))
            res = minimize_ep(EmpiricalCF(spectrum), p, config)
            gammas.append(res.best_schedule.gammas)
            betas.append(res.best_schedule.betas)
            values.append(res.best_value)
        g, b, v = np.array(gammas), np.array(betas), np.array(values)
        table.rows.append(ConvergenceRow(
            n=n, instances=instances,
            mean_gamma=g.mean(axis=0), se_gamma=_std_error(g),
            mean_beta=b.mean(axis=0), se_beta=_std_error(b),
            mean_value=float(v.mean()),
            gammas=g, betas=b, values=v,
        ))
        log.info("n=%d: mean gamma %s, mean value %.6f", n, g.mean(axis=0), v.mean())
    return table


# -- landscapes -------------------------------------------------------------


@dataclass
class LandscapeGrid:
    gammas: np.ndarray
    betas: np.ndarray
    values: np.ndarray  # values[i, j] = E(gammas[i], betas[j])

    def csv_rows(self) -> list[list]:
        out = [["gamma\\beta"] + [repr(float(b)) for b in self.betas]]
        for g, row in zip(self.gammas, self.values):
            out.append([repr(float(g))] + [repr(float(v)) for v in row])
        return out

    def to_csv(self, path, comments=None) -> None:
        write_csv(path, self.csv_rows(), comments)

    def sup_distance(self, other: "LandscapeGrid") -> float:
        if not (np.array_equal(self.gammas, other.gammas) and np.array_equal(self.betas, other.betas)):
            raise DomainError("landscapes are on different grids")
        return float(np.max(np.abs(self.values - other.values)))


def uniform_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise DomainError(f"a grid axis needs at least 2 points, got {steps}")
    if not hi > lo:
        raise DomainError(f"grid axis needs hi > lo, got [{lo}, {hi}]")
    return np.linspace(lo, hi, steps)


def _check_axis(axis, name: str) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size < 2:
        raise DomainError(f"{name} axis needs at least 2 points")
    step = np.diff(axis)
    if not (np.all(step > 0) and np.allclose(step, step[0], rtol=1e-9, atol=0)):
        raise DomainError(f"{name} axis must be uniform and increasing")
    return axis


DEFAULT_GAMMAS = uniform_grid(0.0, 1.5, 61)
DEFAULT_BETAS = uniform_grid(0.0, 2.0 * math.pi, 61)


def landscape_scan(
    source: CharacteristicFunction | Spectrum,
    gamma_grid=DEFAULT_GAMMAS,
    beta_grid=DEFAULT_BETAS,
) -> LandscapeGrid:
    """Depth-1 expectation over a ``gamma x beta`` grid.

    A :class:`Spectrum` is evaluated through its empirical characteristic
    function, which reproduces the statevector result exactly.
    """
    gammas = _check_axis(gamma_grid, "gamma")
    betas = _check_axis(beta_grid, "beta")
    cf = EmpiricalCF(source) if isinstance(source, Spectrum) else source
    values = e1_grid(cf, gammas, betas)
    if not np.all(np.isfinite(values)):
        raise DomainError("landscape contains non-finite values")
    return LandscapeGrid(gammas, betas, values)


def mean_landscape(
    kind: str,
    n: int,
    instances: int,
    seed: int,
    gamma_grid=DEFAULT_GAMMAS,
    beta_grid=DEFAULT_BETAS,
) -> LandscapeGrid:
    """Average of the depth-1 landscapes of ``instances`` random instances of size ``n``."""
    if instances < 1:
        raise DomainError(f"instances must be >= 1, got {instances}")
    grids = [
        landscape_scan(sample_spectrum(kind, n, instance_seed(seed, n, i)), gamma_grid, beta_grid)
        for i in range(instances)
    ]
    return replace(grids[0], values=np.mean([g.values for g in grids], axis=0))
