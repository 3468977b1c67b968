"""Grover-QAOA expectation values from a characteristic function.

The state is ``U_D(beta_p) U_P(gamma_p) ... U_D(beta_1) U_P(gamma_1) |+>``
with ``U_P(gamma) = exp(i gamma H_P)`` and the Grover driver
``U_D(beta) = I + B(beta) |+><+|``, ``B(beta) = exp(i beta) - 1``.

Expanding every driver into its identity and projector parts gives one
term per pair of bitmasks ``(k_bra, k_ket)``. Runs of consecutive phase
layers between projectors collapse to ``Gamma`` of a contiguous range sum
of gammas, and the run touching ``H_P`` gives ``Gamma'``. Swapping the two
masks conjugates a term and the diagonal vanishes once the mean is zero,
so::

    E_p = 2 Im sum_{k_bra < k_ket} conj(A[k_bra]) A[k_ket] Gamma'(c)

where ``A[k]`` is the product of ``Gamma`` over the ket partitions of ``k``
times the ``B`` factors of its set bits, and ``c`` is the signed gamma sum of
the central partition. For an empirical characteristic function this is
exact at any finite size.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .charfn import CharacteristicFunction, cf_eval, cf_mean, zero_mean
from .errors import DomainError, PreconditionError, ResourceLimitError

P_MAX = 10
MEAN_TOLERANCE = 1e-10


@dataclass(frozen=True)
class AngleSchedule:
    """Depth-p angles; layer ``i`` applies ``gammas[i]`` then ``betas[i]``."""

    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        gammas = tuple(float(g) for g in np.atleast_1d(self.gammas))
        betas = tuple(float(b) for b in np.atleast_1d(self.betas))
        if len(gammas) != len(betas):
            raise DomainError(f"got {len(gammas)} gammas but {len(betas)} betas")
        if not gammas:
            raise DomainError("a schedule needs at least one layer")
        if not all(np.isfinite(gammas + betas)):
            raise DomainError("angles must be finite")
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "betas", betas)

    @property
    def p(self) -> int:
        return len(self.gammas)

    def to_vector(self) -> np.ndarray:
        return np.array(self.gammas + self.betas)

    @classmethod
    def from_vector(cls, x) -> "AngleSchedule":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 2:
            raise DomainError("angle vector must be 1-D with even length")
        p = x.size // 2
        return cls(tuple(x[:p]), tuple(x[p:]))

    def negated(self) -> "AngleSchedule":
        return AngleSchedule(tuple(-g for g in self.gammas), tuple(-b for b in self.betas))

    def zero_padded(self) -> "AngleSchedule":
        """Append an identity layer; the prepared state is unchanged."""
        return AngleSchedule(self.gammas + (0.0,), self.betas + (0.0,))


def b_factor(beta):
    """Coefficient of the projector in ``exp(i beta |+><+|) = I + B |+><+|``."""
    return np.exp(1j * np.asarray(beta, dtype=float)) - 1.0


def e1(cf: CharacteristicFunction, gamma: float, beta: float) -> float:
    """Depth-1 expectation, valid for any mean."""
    mean = cf_mean(cf)
    g, dg = cf_eval(cf, gamma)
    b = complex(b_factor(beta))
    return mean * (1.0 + abs(b) ** 2 * abs(g) ** 2) + 2.0 * (b.conjugate() * g.conjugate() * dg).imag


def e1_grid(cf: CharacteristicFunction, gammas, betas) -> np.ndarray:
    """Depth-1 expectation on the outer grid ``gammas x betas`` (rows are gammas)."""
    mean = cf_mean(cf)
    g, dg = cf_eval(cf, np.asarray(gammas, dtype=float))
    b = b_factor(np.asarray(betas, dtype=float))
    g, dg, b = g[:, None], dg[:, None], b[None, :]
    return mean * (1.0 + np.abs(b) ** 2 * np.abs(g) ** 2) + 2.0 * (np.conj(b) * np.conj(g) * dg).imag


def _require_zero_mean(cf: CharacteristicFunction) -> None:
    mean = cf_mean(cf)
    if abs(mean) > MEAN_TOLERANCE:
        raise PreconditionError(
            f"characteristic function has mean {mean:.3e}; apply zero_mean() first "
            "(or use ep_full, which handles the mean)"
        )


def e2(cf: CharacteristicFunction, schedule: AngleSchedule) -> float:
    """Depth-2 closed form for a mean-zero ``cf``."""
    if schedule.p != 2:
        raise DomainError(f"e2 needs a depth-2 schedule, got p={schedule.p}")
    _require_zero_mean(cf)
    (g1, g2), (b1, b2) = schedule.gammas, schedule.betas
    (G1, G2, G12), (dG1, dG2, dG12) = cf_eval(cf, np.array([g1, g2, g1 + g2]))
    B1, B2 = complex(b_factor(b1)), complex(b_factor(b2))
    cj = np.conj

    def _e1(g, dg, b):
        return 2.0 * (cj(b) * cj(g) * dg).imag

    return float(
        _e1(G1, dG1, B1)
        + _e1(G12, dG12, B2)
        + abs(B1) ** 2 * abs(G1) ** 2 * _e1(G2, dG2, B2)
        + 2.0 * (cj(B1) * cj(B2) * cj(G1) * cj(G2) * dG12).imag
        + 2.0 * (B1 * cj(B2) * G1 * dG2 * cj(G12)).imag
    )


@dataclass(frozen=True)
class TermPartition:
    """Grouping of layers 1..p induced by the projector positions of one mask."""

    boundary_set: tuple[int, ...]
    partitions: tuple[tuple[int, ...], ...]
    central_indices: tuple[int, ...]


def partitions_of(mask: int, p: int) -> TermPartition:
    """Split layers ``1..p`` at the set bits of ``mask`` (bit ``i-1`` is layer ``i``).

    >>> partitions_of(0b101, 3).partitions
    ((1,), (2, 3))
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if not 0 <= mask < 2**p:
        raise DomainError(f"mask {mask} out of range [0, 2**{p})")
    bounds = (0,) + tuple(i for i in range(1, p + 1) if mask >> (i - 1) & 1)
    parts = tuple(tuple(range(lo + 1, hi + 1)) for lo, hi in zip(bounds, bounds[1:]))
    central = tuple(range(bounds[-1] + 1, p + 1))
    return TermPartition(bounds, parts, central)


@dataclass(frozen=True)
class _TermPlan:
    """Index tables for vectorised evaluation at fixed depth."""

    p: int
    ranges: np.ndarray  # (m, 2) inclusive 1-based (start, stop)
    mask_factors: np.ndarray  # (2**p, 2p) indices into [Gamma(R), B, 1]
    bra: np.ndarray  # masks, one entry per off-diagonal term
    ket: np.ndarray
    central: np.ndarray  # indices into [Gamma'(R), Gamma'(-R), Gamma'(0)]

    @property
    def term_count(self) -> int:
        return self.bra.size


@lru_cache(maxsize=None)
def _plan(p: int) -> _TermPlan:
    ranges = [(a, b) for a in range(1, p + 1) for b in range(a, p + 1)]
    rindex = {r: i for i, r in enumerate(ranges)}
    m = len(ranges)
    one = m + p

    n_masks = 2**p
    mask_factors = np.full((n_masks, 2 * p), one, dtype=np.intp)
    top = np.zeros(n_masks, dtype=np.intp)
    for k in range(n_masks):
        tp = partitions_of(k, p)
        top[k] = tp.boundary_set[-1]
        slots = [rindex[(part[0], part[-1])] for part in tp.partitions]
        slots += [m + j - 1 for j in tp.boundary_set[1:]]
        mask_factors[k, : len(slots)] = slots

    # The central gamma sum is R(top_ket+1, p) - R(top_bra+1, p), which is a
    # single signed range (or zero).
    central_of = np.empty((p + 1, p + 1), dtype=np.intp)
    for tb in range(p + 1):
        for tk in range(p + 1):
            if tk < tb:
                central_of[tb, tk] = rindex[(tk + 1, tb)]
            elif tk > tb:
                central_of[tb, tk] = m + rindex[(tb + 1, tk)]
            else:
                central_of[tb, tk] = 2 * m

    bra, ket = np.triu_indices(n_masks, k=1)
    return _TermPlan(
        p=p,
        ranges=np.array(ranges, dtype=np.intp),
        mask_factors=mask_factors,
        bra=bra,
        ket=ket,
        central=central_of[top[bra], top[ket]],
    )


def term_count(p: int) -> int:
    """Number of off-diagonal terms visited by :func:`ep` at depth ``p``."""
    return _plan(p).term_count


def _ep_terms(cf: CharacteristicFunction, gammas: np.ndarray, betas: np.ndarray,
              dg0: complex | None = None) -> np.ndarray:
    """Off-diagonal terms; ``dg0`` is ``Gamma'(0)`` if the caller already has it."""
    plan = _plan(gammas.size)
    csum = np.concatenate(([0.0], np.cumsum(gammas)))
    rsum = csum[plan.ranges[:, 1]] - csum[plan.ranges[:, 0] - 1]
    if dg0 is None:
        dg0 = complex(cf.evaluate(np.zeros(()))[1])
    g, dg = cf.evaluate(rsum)
    # Gamma(-t) = conj(Gamma(t)) and Gamma'(-t) = -conj(Gamma'(t)) for real distributions.
    factors = np.concatenate((g, b_factor(betas), [1.0]))
    dtable = np.concatenate((dg, -np.conj(dg), [dg0]))
    amp = np.prod(factors[plan.mask_factors], axis=1)
    return np.conj(amp[plan.bra]) * amp[plan.ket] * dtable[plan.central]


def _ep_unchecked(cf: CharacteristicFunction, gammas, betas, dg0: complex | None = None) -> float:
    terms = _ep_terms(cf, np.asarray(gammas, dtype=float), np.asarray(betas, dtype=float), dg0)
    return 2.0 * float(np.sum(terms).imag)


def ep(cf: CharacteristicFunction, schedule: AngleSchedule, p_max: int = P_MAX) -> float:
    """Depth-p expectation for a mean-zero characteristic function.

    Raises:
        PreconditionError: if ``cf`` does not have zero mean.
        ResourceLimitError: if ``schedule.p > p_max``.
    """
    if schedule.p > p_max:
        raise ResourceLimitError(
            f"depth {schedule.p} exceeds p_max={p_max} ({term_count(schedule.p)} terms)"
        )
    _require_zero_mean(cf)
    return _ep_unchecked(cf, schedule.gammas, schedule.betas)


def ep_full(cf: CharacteristicFunction, schedule: AngleSchedule, p_max: int = P_MAX) -> float:
    """Depth-p expectation for any mean: ``mu + ep(shifted)``."""
    shifted, mu = zero_mean(cf)
    return mu + ep(shifted, schedule, p_max=p_max)


class ExpectationObjective:
    """``x -> ep_full(cf, AngleSchedule.from_vector(x))`` with the mean shift hoisted.

    Picklable, so it can be shipped to worker processes.
    """

    def __init__(self, cf: CharacteristicFunction, p: int, p_max: int = P_MAX):
        if p < 1:
            raise DomainError(f"p must be >= 1, got {p}")
        if p > p_max:
            raise ResourceLimitError(f"depth {p} exceeds p_max={p_max}")
        self.cf = cf
        self.p = p
        self.shifted, self.mean = zero_mean(cf)
        self._dg0 = complex(self.shifted.evaluate(np.zeros(()))[1])

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return self.mean + _ep_unchecked(self.shifted, x[: self.p], x[self.p :], self._dg0)
