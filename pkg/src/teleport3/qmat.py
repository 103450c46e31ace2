"""Dense complex linear algebra on qubit registers.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  A
register is described by an ordered sequence of subsystem labels; the first
label is the most significant bit of the computational-basis index, so the
ket ``|001>`` on labels ``(2, 3, 4)`` has system 2 in ``|0>`` and system 4 in
``|1>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import InvalidStateError, LabelError, ShapeError

TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
EQUAL_TOL = 1e-12

Label = Hashable


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or 0 in m.shape:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ShapeError("matrix has non-finite entries")
    return m


def _square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    return m


def n_qubits(dim: int) -> int:
    """Number of qubits in a register of dimension ``dim``."""
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ShapeError(f"dimension {dim} is not a power of two")
    return n


def kron(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the more significant factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def trace(a) -> complex:
    return complex(np.trace(_square(a)))


def min_eigenvalue(a) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    m = _square(a)
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ShapeError("min_eigenvalue requires a Hermitian matrix")
    return float(np.linalg.eigvalsh(m)[0])


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = _square(a)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def purity(a) -> float:
    m = _square(a)
    return float(np.real(np.trace(m @ m)))


def _check_labels(labels: Sequence[Label]) -> tuple:
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise LabelError(f"duplicate subsystem labels in {labels}")
    return labels


def _positions(labels: tuple, subset: Sequence[Label]) -> list[int]:
    pos = []
    for lab in subset:
        if lab not in labels:
            raise LabelError(f"label {lab!r} not in register {labels}")
        pos.append(labels.index(lab))
    if len(set(pos)) != len(pos):
        raise LabelError(f"duplicate labels in {tuple(subset)}")
    return pos


def reduce_operator(op, labels: Sequence[Label], keep: Sequence[Label]) -> np.ndarray:
    """Partial trace of an arbitrary operator on ``labels`` down to ``keep``.

    The result is ordered by the relative order of ``keep`` inside
    ``labels``.  Keeping nothing yields the 1x1 matrix holding the full trace.
    Unlike :func:`partial_trace` the operator need not be a valid state, which
    is what unnormalized measurement branches require.
    """
    m = _square(op)
    labels = _check_labels(labels)
    n = len(labels)
    if m.shape[0] != 1 << n:
        raise ShapeError(f"operator of dimension {m.shape[0]} does not match {n} qubits")
    kept = sorted(_positions(labels, keep))
    t = m.reshape((2,) * (2 * n))
    row = list(range(n))
    col = [i + n if i in kept else i for i in range(n)]
    out = kept + [i + n for i in kept]
    red = np.einsum(t, row + col, out)
    d = 1 << len(kept)
    return np.asarray(red).reshape(d, d)


def embed(op, on: Sequence[Label], system: Sequence[Label]) -> np.ndarray:
    """Lift ``op`` acting on ``on`` (in that factor order) to the register ``system``."""
    m = _square(op)
    system = _check_labels(system)
    pos = _positions(system, on)
    k, n = len(pos), len(system)
    if m.shape[0] != 1 << k:
        raise ShapeError(f"operator of dimension {m.shape[0]} cannot act on {k} qubits")
    rest = [i for i in range(n) if i not in pos]
    full = np.kron(m, np.eye(1 << len(rest), dtype=np.complex128))
    # axes of `full` are ordered (pos..., rest...) for rows, same for columns
    order = pos + rest
    perm = [order.index(i) for i in range(n)]
    t = full.reshape((2,) * (2 * n)).transpose(perm + [p + n for p in perm])
    return t.reshape(1 << n, 1 << n)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Unit-trace Hermitian positive semidefinite operator on labelled qubits.

    Construction validates every invariant and raises
    :class:`~teleport3.errors.InvalidStateError` on violation.  The stored
    matrix is read-only.
    """

    matrix: np.ndarray
    labels: tuple

    def __post_init__(self):
        m = _square(self.matrix).copy()
        labels = _check_labels(self.labels)
        if m.shape[0] != 1 << len(labels):
            raise ShapeError(
                f"dimension {m.shape[0]} does not match {len(labels)} labels {labels}"
            )
        tr = np.trace(m)
        if abs(tr - 1) > TRACE_TOL:
            raise InvalidStateError(f"trace {tr} differs from 1")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise InvalidStateError(f"not Hermitian (max deviation {herm:.3g})")
        lam = float(np.linalg.eigvalsh(m)[0])
        if lam < -PSD_TOL:
            raise InvalidStateError(f"not positive semidefinite (min eigenvalue {lam:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_ket(cls, ket, labels: Sequence[Label]) -> "DensityOperator":
        v = np.asarray(ket, dtype=np.complex128).reshape(-1)
        return cls(np.outer(v, v.conj()), tuple(labels))

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return purity(self.matrix)

    def relabel(self, labels: Sequence[Label]) -> "DensityOperator":
        return DensityOperator(self.matrix, tuple(labels))

    def __repr__(self):
        return f"DensityOperator(labels={self.labels}, dim={self.dim})"


def partial_trace(rho: DensityOperator, keep: Sequence[Label]) -> DensityOperator:
    """Reduced state of ``rho`` on the subsystems in ``keep``."""
    keep = list(keep)
    if not keep:
        raise LabelError("keep must name at least one subsystem")
    _positions(rho.labels, keep)
    kept = tuple(lab for lab in rho.labels if lab in keep)
    return DensityOperator(reduce_operator(rho.matrix, rho.labels, kept), kept)


def tensor(*states: DensityOperator) -> DensityOperator:
    """Joint state of independent subsystems, labels concatenated."""
    m = np.ones((1, 1), dtype=np.complex128)
    labels: tuple = ()
    for s in states:
        m = np.kron(m, s.matrix)
        labels += s.labels
    return DensityOperator(m, labels)

