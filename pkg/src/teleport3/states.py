"""Input qubits, resource states, measurement bases and Pauli corrections."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, LabelError, ShapeError
from .qmat import EQUAL_TOL, DensityOperator, Label, embed

_PAULI = {
    "I": np.array([[1, 0], [0, 1]], dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
PAULI_LABELS = tuple(_PAULI)

_ANGLE_SLACK = 1e-12


def _check_range(name: str, value: float, lo: float, hi: float, closed_hi: bool = True):
    v = float(value)
    if not math.isfinite(v):
        raise ConfigurationError(f"{name} must be finite, got {value!r}")
    upper_ok = v <= hi + _ANGLE_SLACK if closed_hi else v < hi
    if v < lo - _ANGLE_SLACK or not upper_ok:
        bracket = "]" if closed_hi else ")"
        raise ConfigurationError(f"{name}={v} outside [{lo}, {hi}{bracket}")
    return v


@dataclass(frozen=True)
class BlochAngles:
    """Polar angle ``theta`` in [0, pi] and azimuth ``phi`` in [0, 2 pi)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", _check_range("theta", self.theta, 0.0, math.pi))
        object.__setattr__(
            self, "phi", _check_range("phi", self.phi, 0.0, 2 * math.pi, closed_hi=False)
        )

    def ket(self) -> np.ndarray:
        return np.array(
            [math.cos(self.theta / 2), np.exp(1j * self.phi) * math.sin(self.theta / 2)],
            dtype=np.complex128,
        )


@dataclass(frozen=True)
class Visibility:
    """Weight ``w`` of the entangled resource against white noise."""

    w: float

    def __post_init__(self):
        object.__setattr__(self, "w", _check_range("w", self.w, 0.0, 1.0))


@dataclass(frozen=True)
class MeasurementAngle:
    """Angle ``nu`` in [0, pi/2] selecting the accomplice's measurement basis."""

    nu: float

    def __post_init__(self):
        object.__setattr__(self, "nu", _check_range("nu", self.nu, 0.0, math.pi / 2))


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    """Complete family of orthogonal projectors keyed by outcome labels 1..n.

    ``vectors`` holds the unit vector behind each rank-1 projector, in the
    same order as ``projectors``; it enables statevector shortcuts.
    """

    name: str
    outcomes: tuple
    projectors: tuple
    vectors: tuple
    _lifted: dict = field(default_factory=dict, repr=False, compare=False)

    def lifted(self, on: Sequence[Label], system: Sequence[Label]) -> tuple:
        """Projectors embedded into the register ``system`` (cached, read-only)."""
        key = (tuple(on), tuple(system))
        if key not in self._lifted:
            mats = []
            for p in self.projectors:
                m = embed(p, on, system)
                m.setflags(write=False)
                mats.append(m)
            self._lifted[key] = tuple(mats)
        return self._lifted[key]

    @property
    def n_qubits(self) -> int:
        return int(self.projectors[0].shape[0]).bit_length() - 1

    def __getitem__(self, outcome: int) -> np.ndarray:
        try:
            return self.projectors[self.outcomes.index(outcome)]
        except ValueError:
            raise LabelError(f"{self.name} has no outcome {outcome!r}") from None

    def __len__(self):
        return len(self.outcomes)

    def __iter__(self):
        return iter(zip(self.outcomes, self.projectors))

    def check(self, tol: float = EQUAL_TOL) -> None:
        """Raise if the projectors are incomplete or not mutually orthogonal."""
        d = self.projectors[0].shape[0]
        total = sum(self.projectors)
        if np.max(np.abs(total - np.eye(d))) > tol:
            raise ConfigurationError(f"{self.name} projectors do not sum to identity")
        for a, pa in enumerate(self.projectors):
            for b, pb in enumerate(self.projectors):
                expect = pa if a == b else 0
                if np.max(np.abs(pa @ pb - expect)) > tol:
                    raise ConfigurationError(f"{self.name} projectors {a + 1},{b + 1} not orthogonal")


def _projector_set(name: str, kets: Sequence[np.ndarray]) -> ProjectorSet:
    vecs = []
    projs = []
    for k in kets:
        v = np.asarray(k, dtype=np.complex128)
        v.setflags(write=False)
        p = np.outer(v, v.conj())
        p.setflags(write=False)
        vecs.append(v)
        projs.append(p)
    return ProjectorSet(name, tuple(range(1, len(kets) + 1)), tuple(projs), tuple(vecs))


def pauli(which: str) -> np.ndarray:
    """The 2x2 matrix for ``"I"``, ``"X"``, ``"Y"`` or ``"Z"`` (a fresh copy)."""
    try:
        return _PAULI[which.upper()].copy()
    except (KeyError, AttributeError):
        raise ConfigurationError(f"unknown Pauli label {which!r}") from None


def input_state(a: BlochAngles, label: Label = 1) -> DensityOperator:
    return DensityOperator.from_ket(a.ket(), (label,))


def ghz_ket() -> np.ndarray:
    v = np.zeros(8, dtype=np.complex128)
    v[0] = v[7] = 1 / math.sqrt(2)
    return v


def ghz_state(labels: Sequence[Label] = (2, 3, 4)) -> DensityOperator:
    return DensityOperator.from_ket(ghz_ket(), labels)


def w_ket(n: int) -> np.ndarray:
    """Equal superposition of the ``n`` single-excitation basis states."""
    if int(n) != n or n < 2:
        raise ConfigurationError(f"W state needs n >= 2 particles, got {n}")
    n = int(n)
    v = np.zeros(1 << n, dtype=np.complex128)
    v[[1 << i for i in range(n)]] = 1 / math.sqrt(n)
    return v


def w_state(n: int = 3, labels: Sequence[Label] | None = None) -> DensityOperator:
    """``n``-particle W state; labels default to ``2 .. n + 1``."""
    ket = w_ket(n)
    if labels is None:
        labels = tuple(range(2, n + 2))
    return DensityOperator.from_ket(ket, labels)


@lru_cache(maxsize=None)
def bell_projectors() -> ProjectorSet:
    """Projectors onto Phi+, Phi-, Psi+, Psi- as outcomes 1..4."""
    s = 1 / math.sqrt(2)
    kets = [
        [s, 0, 0, s],
        [s, 0, 0, -s],
        [0, s, s, 0],
        [0, s, -s, 0],
    ]
    return _projector_set("bell", kets)


def nu_projectors(m: MeasurementAngle | float) -> ProjectorSet:
    """Outcome 1: ``sin nu |0> + cos nu |1>``; outcome 2: ``cos nu |0> - sin nu |1>``."""
    nu = m.nu if isinstance(m, MeasurementAngle) else MeasurementAngle(m).nu
    return _nu_projectors(nu)


@lru_cache(maxsize=256)
def _nu_projectors(nu: float) -> ProjectorSet:
    kets = [
        [math.sin(nu), math.cos(nu)],
        [math.cos(nu), -math.sin(nu)],
    ]
    return _projector_set(f"nu={nu:.6g}", kets)


def noisy_state(chi: DensityOperator, v: Visibility | float) -> DensityOperator:
    """White-noise admixture ``w chi + (1 - w) I / 8`` of a three-qubit state."""
    w = v.w if isinstance(v, Visibility) else Visibility(v).w
    if chi.dim != 8:
        raise ShapeError(f"white-noise admixture is defined for 3 qubits, got {chi.n_qubits}")
    m = w * chi.matrix + (1 - w) * np.eye(8, dtype=np.complex128) / 8
    return DensityOperator(m, chi.labels)
