"""Dense statevector simulation of Grover-driven QAOA.

This is the brute-force reference for everything in :mod:`ensemble`. The
driver is applied as the rank-one update ``I + B |+><+|`` in O(N), and the
state is never renormalised so that unitarity bugs stay visible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charfn import MAX_QUBITS, Spectrum
from .ensemble import AngleSchedule, b_factor
from .errors import DomainError, ResourceLimitError


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _check_dims(state: StateVector, spectrum: Spectrum) -> None:
    if state.amplitudes.size != spectrum.size:
        raise DomainError(
            f"state has {state.amplitudes.size} amplitudes, spectrum has {spectrum.size} values"
        )


def init_plus(n: int) -> StateVector:
    """Uniform superposition over ``2**n`` basis states."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if n > MAX_QUBITS:
        raise ResourceLimitError(f"n={n} exceeds the {MAX_QUBITS}-qubit guard")
    size = 2**n
    return StateVector(n, np.full(size, 1.0 / np.sqrt(size), dtype=complex))


def apply_phase(state: StateVector, spectrum: Spectrum, gamma: float) -> StateVector:
    _check_dims(state, spectrum)
    return StateVector(state.n, state.amplitudes * np.exp(1j * gamma * spectrum.values))


def apply_grover_driver(state: StateVector, beta: float) -> StateVector:
    """Apply ``exp(i beta |+><+|)``.

    The overlap with ``|+>`` is a plain left-to-right ``np.sum`` over the
    amplitude array, so results are reproducible bit for bit.
    """
    amps = state.amplitudes
    overlap = np.sum(amps) / np.sqrt(amps.size)
    shift = complex(b_factor(beta)) * overlap / np.sqrt(amps.size)
    return StateVector(state.n, amps + shift)


def prepare_qaoa(spectrum: Spectrum, schedule: AngleSchedule) -> StateVector:
    state = init_plus(spectrum.n)
    for gamma, beta in zip(schedule.gammas, schedule.betas):
        state = apply_phase(state, spectrum, gamma)
        state = apply_grover_driver(state, beta)
    return state


def expectation(state: StateVector, spectrum: Spectrum) -> float:
    _check_dims(state, spectrum)
    return float(np.dot(state.probabilities(), spectrum.values))


def simulate_expectation(spectrum: Spectrum, schedule: AngleSchedule) -> float:
    return expectation(prepare_qaoa(spectrum, schedule), spectrum)


def sample_bitstrings(state: StateVector, seed: int, shots: int) -> np.ndarray:
    """Draw ``shots`` measurement outcomes ``z`` in the computational basis."""
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    probs = state.probabilities()
    # Cumulative weights absorb any tiny norm drift without renormalising the state.
    cdf = np.cumsum(probs)
    rng = np.random.default_rng(seed)
    return np.searchsorted(cdf, rng.uniform(0.0, cdf[-1], size=shots), side="right").clip(
        max=probs.size - 1
    )
