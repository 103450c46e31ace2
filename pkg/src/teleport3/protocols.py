"""Teleportation protocols over three-particle (and N-particle) resources.

P0: Alice Bell-measures qubits 1,2; the accomplice measures qubit 3 in the
nu-basis; Bob applies a Pauli chosen by both outcomes to qubit 4.

P1: Alice Bell-measures qubits 1,2; every other resource qubit is a receiver
that applies a Pauli chosen by Alice's outcome alone.

``run_*`` functions are the reference implementation: explicit density
operators, embedded projectors and partial traces, one input state at a time.
:class:`BranchModel` packages the same protocols as linear maps on the input
density matrix so that sphere averages and Monte Carlo runs can evaluate
thousands of inputs at once.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, LabelError
from .measurement import DEGENERATE_TOL, measure
from .qmat import DensityOperator, embed, partial_trace, reduce_operator, tensor
from .states import (
    PAULI_LABELS,
    BlochAngles,
    MeasurementAngle,
    bell_projectors,
    ghz_ket,
    ghz_state,
    input_state,
    nu_projectors,
    pauli,
    w_ket,
    w_state,
)

MAX_W_PARTICLES = 16
# largest W resource handled with full density operators
DENSITY_PATH_MAX_N = 5

P0_KEYS = tuple((j, k) for j in range(1, 5) for k in (1, 2))
P1_KEYS = tuple((j, None) for j in range(1, 5))


@dataclass(frozen=True)
class CorrectionTable:
    """Pauli correction for each reachable outcome combination.

    Keys are ``(j, k)`` for P0 tables and ``(j, None)`` for P1 tables.
    """

    entries: Mapping[tuple, str]
    name: str = "custom"

    def __post_init__(self):
        entries = {}
        for key, label in dict(self.entries).items():
            if not (isinstance(key, tuple) and len(key) == 2):
                raise ConfigurationError(f"{self.name}: bad table key {key!r}")
            j, k = key
            if j not in (1, 2, 3, 4) or k not in (None, 1, 2):
                raise ConfigurationError(f"{self.name}: outcome ({j}, {k}) out of range")
            if not isinstance(label, str) or label.upper() not in PAULI_LABELS:
                raise ConfigurationError(f"{self.name}: unknown Pauli {label!r} at {key}")
            entries[(j, k)] = label.upper()
        keys = set(entries)
        if keys != set(P0_KEYS) and keys != set(P1_KEYS):
            raise ConfigurationError(
                f"{self.name}: table must cover all (j, k) with j=1..4, k=1..2, "
                f"or all j with k='-'; got {sorted(keys, key=str)}"
            )
        object.__setattr__(self, "entries", entries)

    @property
    def uses_k(self) -> bool:
        return (1, 1) in self.entries

    def label(self, j: int, k: int | None = None) -> str:
        if not self.uses_k:
            k = None
        try:
            return self.entries[(j, k)]
        except KeyError:
            raise ConfigurationError(f"{self.name}: no correction for ({j}, {k})") from None

    def matrix(self, j: int, k: int | None = None) -> np.ndarray:
        return pauli(self.label(j, k))

    def require(self, uses_k: bool) -> "CorrectionTable":
        if self.uses_k != uses_k:
            kind = "(j, k)" if uses_k else "j-only"
            raise ConfigurationError(f"{self.name}: protocol needs a {kind} correction table")
        return self

    def replace(self, key: tuple, label: str, name: str | None = None) -> "CorrectionTable":
        entries = dict(self.entries)
        if key not in entries:
            raise ConfigurationError(f"{self.name}: no row {key}")
        entries[key] = label
        return CorrectionTable(entries, name or f"{self.name}[{key}->{label}]")

    def keys(self) -> list[tuple]:
        return list(P0_KEYS if self.uses_k else P1_KEYS)

    def to_text(self) -> str:
        lines = []
        for j, k in self.keys():
            lines.append(f"{j} {'-' if k is None else k} {self.entries[(j, k)]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, name: str = "custom") -> "CorrectionTable":
        entries = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigurationError(f"{name}:{lineno}: expected 'j k pauli', got {raw!r}")
            j_s, k_s, lab = parts
            try:
                j = int(j_s)
                k = None if k_s == "-" else int(k_s)
            except ValueError:
                raise ConfigurationError(f"{name}:{lineno}: bad outcome in {raw!r}") from None
            if (j, k) in entries:
                raise ConfigurationError(f"{name}:{lineno}: duplicate row ({j}, {k_s})")
            entries[(j, k)] = lab
        return cls(entries, name)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "CorrectionTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), name=os.fspath(path))

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())


TABLE_GHZ_P0 = CorrectionTable.from_text(
    "1 1 I\n1 2 Z\n2 1 Z\n2 2 I\n3 1 X\n3 2 Y\n4 1 Y\n4 2 X\n", name="ghz-p0"
)
TABLE_W_P0 = CorrectionTable.from_text(
    "1 1 X\n1 2 X\n2 1 Y\n2 2 Y\n3 1 I\n3 2 I\n4 1 Z\n4 2 Z\n", name="w-p0"
)
TABLE_W_P1 = CorrectionTable.from_text("1 - X\n2 - Y\n3 - I\n4 - Z\n", name="w-p1")
# Psi+/Psi- outcomes leave the receiver bit-flipped, so X-type corrections are
# needed there; Z-type ones are immaterial on the diagonal reduced state.
TABLE_GHZ_P1 = CorrectionTable.from_text("1 - I\n2 - Z\n3 - X\n4 - Y\n", name="ghz-p1")

DEFAULT_TABLES = {
    "ghz-p0": TABLE_GHZ_P0,
    "w-p0": TABLE_W_P0,
    "w-p1": TABLE_W_P1,
    "ghz-p1": TABLE_GHZ_P1,
}


@dataclass(frozen=True, eq=False)
class OutcomeRecord:
    """One branch of a protocol run.

    ``branch_probability`` is the joint weight of all announced outcomes and
    ``weighted_fidelity`` equals ``tr(U sigma U^dag pi_in)`` for the
    unnormalized branch state ``sigma``; both stay meaningful when the branch
    is degenerate, in which case ``output_state`` and ``fidelity`` are ``None``.
    """

    j: int
    k: int | None
    receiver: int
    branch_probability: float
    output_state: DensityOperator | None
    fidelity: float | None
    weighted_fidelity: float
    correction: str
    stage_probabilities: tuple = field(default=())

    @property
    def degenerate(self) -> bool:
        return self.output_state is None


def fidelity(out: DensityOperator, in_angles: BlochAngles) -> float:
    """Overlap ``tr(out pi_in)`` of a one-qubit output with the pure input."""
    return _overlap(out.matrix, in_angles.ket())


def _overlap(op: np.ndarray, ket: np.ndarray) -> float:
    return float(np.real(ket.conj() @ op @ ket))


def _finish(j, k, receiver, unnorm, stages, table, ket) -> OutcomeRecord:
    """Apply the correction to an unnormalized receiver state and score it."""
    label = table.label(j, k)
    u = pauli(label)
    tau = u @ unnorm @ u.conj().T
    prob = float(np.real(np.trace(tau)))
    weighted = _overlap(tau, ket)
    out = fid = None
    if prob >= DEGENERATE_TOL:
        m = tau / prob
        out = DensityOperator((m + m.conj().T) / 2, (receiver,))
        fid = _overlap(out.matrix, ket)
    return OutcomeRecord(j, k, receiver, max(prob, 0.0), out, fid, weighted, label, stages)


def _check_resource(resource: DensityOperator, n: int) -> None:
    expect = tuple(range(2, n + 2))
    if resource.labels != expect:
        raise LabelError(f"resource must live on labels {expect}, got {resource.labels}")


def run_p0(
    resource: DensityOperator,
    input: BlochAngles,
    nu: MeasurementAngle | float,
    table: CorrectionTable = TABLE_GHZ_P0,
) -> list[OutcomeRecord]:
    """Run P0 on ``input`` with a three-qubit resource on labels (2, 3, 4).

    Returns the eight ``(j, k)`` branches in table order.
    """
    table.require(uses_k=True)
    _check_resource(resource, 3)
    nu_set = nu_projectors(nu)
    ket = input.ket()
    total = tensor(input_state(input, 1), resource)
    records = []
    for alice in measure(total, bell_projectors(), on=(1, 2)):
        if alice.degenerate:
            zero = np.zeros((2, 2), dtype=np.complex128)
            for k in (1, 2):
                records.append(_finish(alice.outcome, k, 4, zero, (alice.probability, 0.0), table, ket))
            continue
        for cindy in measure(alice.conditional, nu_set, on=(3,)):
            joint = alice.probability * cindy.unnormalized
            stages = (alice.probability, cindy.probability)
            records.append(_finish(alice.outcome, cindy.outcome, 4, joint, stages, table, ket))
    return records


def _run_p1_density(resource, n, input, receiver, table) -> list[OutcomeRecord]:
    ket = input.ket()
    total = tensor(input_state(input, 1), resource)
    records = []
    for alice in measure(total, bell_projectors(), on=(1, 2)):
        if alice.degenerate:
            zero = np.zeros((2, 2), dtype=np.complex128)
            records.append(_finish(alice.outcome, None, receiver, zero, (alice.probability,), table, ket))
            continue
        reduced = partial_trace(alice.conditional, keep=[receiver])
        unnorm = alice.probability * reduced.matrix
        records.append(_finish(alice.outcome, None, receiver, unnorm, (alice.probability,), table, ket))
    return records


def _bell_amplitudes(ket: np.ndarray, resource_ket: np.ndarray, n: int) -> np.ndarray:
    """Unnormalized amplitudes on qubits 3..n+1 for each Bell outcome, shape (4, 2, ..., 2)."""
    joint = np.kron(ket, resource_ket).reshape((2, 2, 1 << (n - 1)))
    bell = np.array(bell_projectors().vectors).reshape(4, 2, 2)
    amps = np.einsum("jab,abr->jr", bell.conj(), joint)
    return amps.reshape((4,) + (2,) * (n - 1))


def _receiver_blocks(amps: np.ndarray, axis: int) -> np.ndarray:
    """Reshape amplitudes to (4, 2, rest) with the receiver qubit second."""
    moved = np.moveaxis(amps, 1 + axis, 1)
    return moved.reshape(4, 2, -1)


def _run_p1_statevector(resource_ket, n, input, receiver, table) -> list[OutcomeRecord]:
    ket = input.ket()
    blocks = _receiver_blocks(_bell_amplitudes(ket, resource_ket, n), receiver - 3)
    records = []
    for j in range(1, 5):
        m = blocks[j - 1]
        unnorm = m @ m.conj().T
        p = float(np.real(np.trace(unnorm)))
        records.append(_finish(j, None, receiver, unnorm, (p,), table, ket))
    return records


def _check_receiver(receiver: int, n: int) -> int:
    if int(receiver) != receiver or not 3 <= receiver <= n + 1:
        raise ConfigurationError(f"receiver must be one of 3..{n + 1}, got {receiver}")
    return int(receiver)


def _check_w_size(n: int) -> int:
    if int(n) != n or not 3 <= n <= MAX_W_PARTICLES:
        raise ConfigurationError(f"W resource needs 3 <= n <= {MAX_W_PARTICLES}, got {n}")
    return int(n)


def run_p1_w(
    n: int,
    input: BlochAngles,
    receiver: int,
    table: CorrectionTable = TABLE_W_P1,
    method: str = "auto",
) -> list[OutcomeRecord]:
    """P1 with an ``n``-particle W resource on labels 2..n+1.

    ``method`` is ``"density"`` (reference), ``"statevector"`` or ``"auto"``,
    which uses density operators up to ``DENSITY_PATH_MAX_N`` particles.
    """
    n = _check_w_size(n)
    receiver = _check_receiver(receiver, n)
    table.require(uses_k=False)
    if method == "auto":
        method = "density" if n <= DENSITY_PATH_MAX_N else "statevector"
    if method == "density":
        return _run_p1_density(w_state(n), n, input, receiver, table)
    if method == "statevector":
        return _run_p1_statevector(w_ket(n), n, input, receiver, table)
    raise ConfigurationError(f"unknown method {method!r}")


def run_p1_ghz(
    input: BlochAngles,
    receiver: int,
    table: CorrectionTable = TABLE_GHZ_P1,
    resource: DensityOperator | None = None,
) -> list[OutcomeRecord]:
    """P1 with the GHZ resource (or any three-qubit ``resource``) on labels 2..4."""
    receiver = _check_receiver(receiver, 3)
    table.require(uses_k=False)
    resource = ghz_state() if resource is None else resource
    _check_resource(resource, 3)
    return _run_p1_density(resource, 3, input, receiver, table)


# -- batched linear-map form ------------------------------------------------

_BASIS = [(a, b) for a in (0, 1) for b in (0, 1)]


def _unit(a: int, b: int) -> np.ndarray:
    e = np.zeros((2, 2), dtype=np.complex128)
    e[a, b] = 1
    return e


@dataclass(frozen=True, eq=False)
class BranchModel:
    """Protocol branches as linear maps of the input density matrix.

    ``kernels[n, a, b]`` is the corrected, unnormalized receiver operator of
    branch ``n`` produced by the input operator ``|a><b|``.
    """

    name: str
    keys: tuple
    kernels: np.ndarray
    receiver: int

    def evaluate(self, theta, phi) -> tuple[np.ndarray, np.ndarray]:
        """Branch probabilities and weighted fidelities, each of shape ``theta.shape + (n_branches,)``."""
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        psi = np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)
        # flattened input density matrix rho[ab] = psi_a conj(psi_b)
        rho = (psi[..., :, None] * psi[..., None, :].conj()).reshape(theta.shape + (4,))
        nb = self.kernels.shape[0]
        k = self.kernels.transpose(1, 2, 0, 3, 4).reshape(4, nb, 4)
        tau = (rho @ k.reshape(4, nb * 4)).reshape(theta.shape + (nb, 4))
        prob = tau[..., 0] + tau[..., 3]
        # <psi|tau|psi> = sum_cd conj(rho[cd]) tau[cd]
        weighted = np.einsum("...nx,...x->...n", tau, rho.conj())
        return np.real(prob), np.real(weighted)

    def integrand(self, theta, phi) -> np.ndarray:
        """Outcome-averaged fidelity at each input."""
        return self.evaluate(theta, phi)[1].sum(axis=-1)


def _corrected(raw: BranchModel, table: CorrectionTable, name: str) -> BranchModel:
    us = np.array([table.matrix(j, k) for j, k in raw.keys])
    kern = np.einsum("ncd,nabde,nfe->nabcf", us, raw.kernels, us.conj())
    return BranchModel(name, raw.keys, kern, raw.receiver)


def p0_raw_model(resource: DensityOperator, nu: MeasurementAngle | float) -> BranchModel:
    """Uncorrected P0 branch maps for a three-qubit resource."""
    _check_resource(resource, 3)
    nu_set = nu_projectors(nu)
    bell = bell_projectors()
    reg = (1, 2, 3, 4)
    lifted_bell = [embed(p, (1, 2), reg) for _, p in bell]
    lifted_nu = [embed(p, (3,), (3, 4)) for _, p in nu_set]
    kern = np.zeros((8, 2, 2, 2, 2), dtype=np.complex128)
    for a, b in _BASIS:
        joint = np.kron(_unit(a, b), resource.matrix)
        for jj, pj in enumerate(lifted_bell):
            sigma = reduce_operator(pj @ joint, reg, (3, 4))
            for kk, pk in enumerate(lifted_nu):
                kern[2 * jj + kk, a, b] = reduce_operator(pk @ sigma, (3, 4), (4,))
    return BranchModel("p0-raw", P0_KEYS, kern, 4)


def p0_model(
    resource: DensityOperator,
    nu: MeasurementAngle | float,
    table: CorrectionTable = TABLE_GHZ_P0,
    name: str = "p0",
) -> BranchModel:
    table.require(uses_k=True)
    return _corrected(p0_raw_model(resource, nu), table, name)


def p1_raw_model(resource_ket: np.ndarray, n: int, receiver: int) -> BranchModel:
    """Uncorrected P1 branch maps for a pure ``n``-qubit resource ket."""
    receiver = _check_receiver(receiver, n)
    blocks = [
        _receiver_blocks(_bell_amplitudes(np.eye(2)[a], resource_ket, n), receiver - 3)
        for a in (0, 1)
    ]
    kern = np.zeros((4, 2, 2, 2, 2), dtype=np.complex128)
    for a, b in _BASIS:
        kern[:, a, b] = np.einsum("jcr,jdr->jcd", blocks[a], blocks[b].conj())
    return BranchModel("p1-raw", P1_KEYS, kern, receiver)


def p1_w_model(n: int, receiver: int, table: CorrectionTable = TABLE_W_P1) -> BranchModel:
    n = _check_w_size(n)
    table.require(uses_k=False)
    return _corrected(p1_raw_model(w_ket(n), n, receiver), table, f"w{n}-p1")


def p1_ghz_model(receiver: int, table: CorrectionTable = TABLE_GHZ_P1) -> BranchModel:
    table.require(uses_k=False)
    return _corrected(p1_raw_model(ghz_ket(), 3, receiver), table, "ghz-p1")


def total_probability(records: Iterable[OutcomeRecord]) -> float:
    return float(sum(r.branch_probability for r in records))


def outcome_weighted_fidelity(records: Sequence[OutcomeRecord]) -> float:
    """Sum of weighted fidelities, i.e. the protocol's fidelity averaged over outcomes."""
    return float(sum(r.weighted_fidelity for r in records))
