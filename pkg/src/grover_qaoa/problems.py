"""Finite random-cost-model and number-partitioning instances.

Both generators use numpy's PCG64 bit generator seeded with the given
integer, so an instance is fully determined by ``(n, seed)``.

Bit convention: variable ``i`` is bit ``i`` of the basis index ``z``
(least significant first) and contributes the sign ``(-1)**z_i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .charfn import MAX_QUBITS, Spectrum
from .errors import DomainError, ResourceLimitError
from .fileio import atomic_write_text


@dataclass(frozen=True, eq=False)
class RcmInstance:
    n: int
    weights: np.ndarray
    seed: int | None = None


@dataclass(frozen=True, eq=False)
class NppInstance:
    n: int
    numbers: np.ndarray
    seed: int | None = None


def npp_x_max(n: int) -> float:
    """Largest number drawn for an ``n``-number instance.

    ``sqrt(3/n)`` makes the signed sum of ``n`` numbers have unit variance,
    hence a squared residue with unit mean.
    """
    return float(np.sqrt(3.0 / n))


def _check_n(n: int) -> None:
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")


def sample_rcm(n: int, seed: int) -> RcmInstance:
    """Spin weights ``g_i ~ Normal(0, 1/n)``."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    return RcmInstance(n, rng.normal(0.0, np.sqrt(1.0 / n), size=n), seed)


def sample_npp(n: int, seed: int) -> NppInstance:
    """Numbers ``x_i ~ Uniform(0, npp_x_max(n))``."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    return NppInstance(n, rng.uniform(0.0, npp_x_max(n), size=n), seed)


def _signed_sums(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.size
    if n > MAX_QUBITS:
        raise ResourceLimitError(f"n={n} exceeds the {MAX_QUBITS}-qubit guard")
    z = np.arange(2**n)
    out = np.zeros(2**n)
    for i, c in enumerate(coeffs):
        out += np.where((z >> i) & 1, -c, c)
    return out


def rcm_spectrum(inst: RcmInstance) -> Spectrum:
    return Spectrum(inst.n, _signed_sums(np.asarray(inst.weights, dtype=float)))


def npp_spectrum(inst: NppInstance) -> Spectrum:
    """Squared partition residue ``(sum_i (-1)**z_i x_i)**2``."""
    return Spectrum(inst.n, _signed_sums(np.asarray(inst.numbers, dtype=float)) ** 2)


def sample_spectrum(kind: str, n: int, seed: int) -> Spectrum:
    if kind == "npp":
        return npp_spectrum(sample_npp(n, seed))
    if kind == "rcm":
        return rcm_spectrum(sample_rcm(n, seed))
    raise DomainError(f"unknown problem kind {kind!r}; expected 'npp' or 'rcm'")


def instance_to_json(inst: RcmInstance | NppInstance, **extra) -> dict:
    if isinstance(inst, NppInstance):
        kind, values = "npp", inst.numbers
    else:
        kind, values = "rcm", inst.weights
    doc = {"kind": kind, "n": inst.n, "seed": inst.seed, "values": [float(v) for v in values]}
    doc.update(extra)
    return doc


def save_instance(inst: RcmInstance | NppInstance, path, **extra) -> None:
    atomic_write_text(path, json.dumps(instance_to_json(inst, **extra), indent=2) + "\n")


def load_instance(path) -> RcmInstance | NppInstance:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    values = np.asarray(doc["values"], dtype=float)
    if doc["kind"] == "npp":
        return NppInstance(int(doc["n"]), values, doc.get("seed"))
    if doc["kind"] == "rcm":
        return RcmInstance(int(doc["n"]), values, doc.get("seed"))
    raise DomainError(f"unknown instance kind {doc['kind']!r}")
