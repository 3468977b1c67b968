"""Characteristic functions of objective-value distributions.

A Grover-driven QAOA expectation only sees a problem through the
distribution of its objective values, so every ensemble is represented
here by ``Gamma(t) = E[exp(i t C)]`` and its derivative ``Gamma'(t)``.

All ``evaluate`` methods are vectorised over ``t`` and pure; instances are
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, DomainError, ResourceLimitError
from .fileio import atomic_write_text

MAX_QUBITS = 26
# Upper bound on len(t) * len(support) per chunk of the empirical sum.
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class Spectrum:
    """All ``2**n`` objective values ``C(z)`` of one problem instance.

    ``values[z]`` is the objective of bitstring ``z``, where bit ``i`` of the
    integer ``z`` (least significant first) is variable ``i``.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"spectrum needs n >= 1, got n={self.n}")
        if self.n > MAX_QUBITS:
            raise ResourceLimitError(f"n={self.n} exceeds the {MAX_QUBITS}-qubit guard")
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size != 2**self.n:
            raise DomainError(f"expected {2**self.n} values for n={self.n}, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise DomainError("spectrum values must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values) -> "Spectrum":
        values = np.asarray(values, dtype=float).reshape(-1)
        n = int(values.size).bit_length() - 1
        if n < 1 or values.size != 2**n:
            raise DomainError(f"spectrum length must be a power of two >= 2, got {values.size}")
        return cls(n, values)

    @property
    def size(self) -> int:
        return self.values.size

    def mean(self) -> float:
        return float(np.mean(self.values))

    def permuted(self, permutation) -> "Spectrum":
        return Spectrum(self.n, self.values[np.asarray(permutation)])


class CharacteristicFunction:
    """Base class; subclasses implement :meth:`evaluate`."""

    kind: str = ""

    def evaluate(self, t):
        """Return ``(Gamma(t), Gamma'(t))`` as complex arrays shaped like ``t``."""
        raise NotImplementedError

    def __call__(self, t):
        return cf_eval(self, t)


@dataclass(frozen=True)
class GaussianCF(CharacteristicFunction):
    """Standard normal objective values (the random cost model)."""

    kind = "gaussian"

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        g = np.exp(-0.5 * t * t).astype(complex)
        return g, -t * g


@dataclass(frozen=True)
class ChiSquare1CF(CharacteristicFunction):
    """Chi-square with one degree of freedom (large-n squared NPP residue).

    ``Gamma(t) = (1 - 2it)^(-1/2)`` on the principal branch; ``1 - 2it`` has
    positive real part for real ``t``, so the branch cut is never crossed.
    """

    kind = "chi_square_1"

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        w = 1.0 - 2.0j * t
        return w**-0.5, 1.0j * w**-1.5


@dataclass(frozen=True, eq=False)
class EmpiricalCF(CharacteristicFunction):
    """Exact finite-instance characteristic function ``(1/N) sum_z exp(i t C(z))``."""

    spectrum: Spectrum
    _support: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)

    kind = "empirical"

    def __post_init__(self):
        # Repeated objective values collapse into weighted support points;
        # the sum is unchanged.
        support, counts = np.unique(self.spectrum.values, return_counts=True)
        object.__setattr__(self, "_support", support)
        object.__setattr__(self, "_weights", counts / self.spectrum.size)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        gamma = np.empty(flat.size, dtype=complex)
        gamma_prime = np.empty(flat.size, dtype=complex)
        step = max(1, _CHUNK_ELEMENTS // self._support.size)
        for lo in range(0, flat.size, step):
            phase = np.exp(1j * np.multiply.outer(flat[lo : lo + step], self._support))
            gamma[lo : lo + step] = phase @ self._weights
            gamma_prime[lo : lo + step] = 1j * (phase @ (self._weights * self._support))
        return gamma.reshape(t.shape), gamma_prime.reshape(t.shape)


@dataclass(frozen=True)
class MeanShiftedCF(CharacteristicFunction):
    """``inner`` with the constant ``shift`` subtracted from every objective value."""

    inner: CharacteristicFunction
    shift: float

    kind = "mean_shifted"

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        g, dg = self.inner.evaluate(t)
        rot = np.exp(-1j * self.shift * t)
        return rot * g, rot * (dg - 1j * self.shift * g)


def cf_eval(cf: CharacteristicFunction, t):
    """Evaluate ``(Gamma(t), Gamma'(t))``.

    Scalars in give Python complex numbers out; arrays give arrays.

    Raises:
        DomainError: if any ``t`` is not finite.
    """
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("characteristic function argument must be finite")
    g, dg = cf.evaluate(arr)
    if arr.ndim == 0:
        return complex(g), complex(dg)
    return g, dg


def cf_mean(cf: CharacteristicFunction) -> float:
    """Mean objective value ``-i Gamma'(0)``."""
    _, dg0 = cf.evaluate(np.zeros(()))
    mean = -1j * complex(dg0)
    if abs(mean.imag) >= 1e-10 * (1.0 + abs(mean.real)):
        raise ConsistencyError(f"-i*Gamma'(0) = {mean} is not real; malformed distribution")
    return mean.real


def zero_mean(cf: CharacteristicFunction) -> tuple[MeanShiftedCF, float]:
    """Return the mean-zero version of ``cf`` together with the removed mean."""
    mu = cf_mean(cf)
    return MeanShiftedCF(cf, mu), mu


_BUILTIN = {"gaussian": GaussianCF, "rcm": GaussianCF, "chisq1": ChiSquare1CF,
            "chi_square_1": ChiSquare1CF, "npp": ChiSquare1CF}


def builtin_cf(name: str) -> CharacteristicFunction:
    """Look up a built-in ensemble by name (``gaussian``/``rcm``, ``chisq1``/``npp``)."""
    try:
        return _BUILTIN[name.lower()]()
    except KeyError:
        raise DomainError(f"unknown ensemble {name!r}; choose from {sorted(_BUILTIN)}") from None


# -- spectrum files ---------------------------------------------------------


def load_spectrum(path) -> Spectrum:
    """Read a spectrum from the text (``n=<int>`` header) or JSON format.

    Lines starting with ``#`` in the text format are ignored.
    """
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(stripped)
        try:
            return Spectrum(int(doc["n"]), np.asarray(doc["values"], dtype=float))
        except KeyError as exc:
            raise DomainError(f"spectrum JSON is missing key {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or not lines[0].strip().startswith("n="):
        raise DomainError(f"{path}: expected a header line 'n=<int>'")
    n = int(lines[0].strip()[2:])
    values = np.array(" ".join(lines[1:]).split(), dtype=float)
    return Spectrum(n, values)


def dump_spectrum_text(spectrum: Spectrum, comments: list[str] | None = None) -> str:
    out = [f"# {c}" for c in comments or []]
    out.append(f"n={spectrum.n}")
    out.extend(repr(float(v)) for v in spectrum.values)
    return "\n".join(out) + "\n"


def save_spectrum(spectrum: Spectrum, path, comments: list[str] | None = None) -> None:
    atomic_write_text(path, dump_spectrum_text(spectrum, comments))
