"""Projective measurement on labelled registers, plus seeded outcome sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LabelError, SamplingError, ShapeError
from .qmat import TRACE_TOL, DensityOperator, Label, reduce_operator
from .states import ProjectorSet

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MeasurementBranch:
    """One outcome of a projective measurement.

    ``unnormalized`` is the probability-weighted state on ``labels``; its trace
    is ``probability``.  ``conditional`` is ``None`` for degenerate branches
    (probability below ``DEGENERATE_TOL``).
    """

    outcome: int
    probability: float
    unnormalized: np.ndarray
    labels: tuple
    conditional: DensityOperator | None

    @property
    def degenerate(self) -> bool:
        return self.conditional is None


def measure(
    rho: DensityOperator,
    projectors: ProjectorSet,
    on: Sequence[Label],
    keep_measured: bool = False,
) -> list[MeasurementBranch]:
    """Measure subsystems ``on`` of ``rho`` with a complete projector set.

    For outcome ``m`` the branch carries ``tr_on[(P_m x I) rho]``; the measured
    subsystems are dropped from the result unless ``keep_measured`` is set, in
    which case the collapsed state ``P rho P`` is returned on the full register.
    """
    on = tuple(on)
    for lab in on:
        if lab not in rho.labels:
            raise LabelError(f"label {lab!r} not in register {rho.labels}")
    if len(on) != projectors.n_qubits:
        raise ShapeError(
            f"{projectors.name} projectors act on {projectors.n_qubits} qubits, got {on}"
        )
    if keep_measured:
        rest = rho.labels
    else:
        rest = tuple(lab for lab in rho.labels if lab not in on)
    branches = []
    for outcome, full in zip(projectors.outcomes, projectors.lifted(on, rho.labels)):
        if keep_measured:
            unnorm = full @ rho.matrix @ full
        else:
            unnorm = reduce_operator(full @ rho.matrix, rho.labels, rest)
        p = float(np.real(np.trace(unnorm)))
        cond = None
        if p >= DEGENERATE_TOL:
            cond_m = unnorm / p
            cond = DensityOperator((cond_m + cond_m.conj().T) / 2, rest)
        branches.append(MeasurementBranch(outcome, max(p, 0.0), unnorm, rest, cond))
    return branches


def make_rng(seed: int | None = None) -> np.random.Generator:
    """The package's random source: a PCG64 generator seeded with a 64-bit integer."""
    return np.random.default_rng(seed)


def sample_outcome(branches: Sequence[MeasurementBranch], rng: np.random.Generator) -> int:
    """Draw one outcome label with the branch probabilities."""
    live = [b for b in branches if not b.degenerate]
    if not live:
        raise SamplingError("every branch is degenerate")
    probs = np.array([b.probability for b in live])
    total = probs.sum()
    if abs(sum(b.probability for b in branches) - 1) > TRACE_TOL:
        raise SamplingError(f"branch probabilities sum to {total}, not 1")
    cdf = np.cumsum(probs / total)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return live[min(idx, len(live) - 1)].outcome
