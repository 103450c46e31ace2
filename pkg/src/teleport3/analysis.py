"""Sphere averaging, Monte Carlo estimates and parameter sweeps.

Averages are taken over the uniform (isotropic) measure on the Bloch sphere,
normalized so that a constant integrand of 1 averages to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import closed_forms as closed
from .closed_forms import oracle  # noqa: F401  (re-export)
from .errors import ConfigurationError
from .measurement import DEGENERATE_TOL, make_rng
from .qmat import EQUAL_TOL
from .protocols import (
    TABLE_GHZ_P0,
    TABLE_GHZ_P1,
    TABLE_W_P0,
    TABLE_W_P1,
    BranchModel,
    CorrectionTable,
    p0_model,
    p1_ghz_model,
    p1_w_model,
)
from .states import MeasurementAngle, Visibility, ghz_state, noisy_state, w_state


@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre nodes in cos(theta) times a uniform periodic grid in phi."""

    n_theta: int = 32
    n_phi: int = 32

    def __post_init__(self):
        if int(self.n_theta) < 2 or int(self.n_phi) < 2:
            raise ConfigurationError(
                f"quadrature needs at least 2x2 nodes, got {self.n_theta}x{self.n_phi}"
            )

    @classmethod
    def parse(cls, text: str) -> "SphereQuadrature":
        """Build from a ``"<n_theta>x<n_phi>"`` string."""
        try:
            a, b = text.lower().split("x")
            return cls(int(a), int(b))
        except ValueError:
            raise ConfigurationError(f"quadrature must look like 32x32, got {text!r}") from None

    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(theta, phi, weight)`` grids of shape ``(n_theta, n_phi)``; weights sum to 1."""
        x, wx = leggauss(int(self.n_theta))
        phi = 2 * np.pi * np.arange(int(self.n_phi)) / int(self.n_phi)
        theta = np.arccos(x)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        ww = np.outer(wx / 2, np.full(int(self.n_phi), 1 / int(self.n_phi)))
        return tt, pp, ww

    def doubled(self) -> "SphereQuadrature":
        return SphereQuadrature(2 * self.n_theta, 2 * self.n_phi)


DEFAULT_QUADRATURE = SphereQuadrature()

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _integrand_of(target) -> Integrand:
    if isinstance(target, BranchModel):
        return target.integrand
    if callable(target):
        return target
    raise ConfigurationError(f"cannot average over {type(target).__name__}")


def average_fidelity(target: BranchModel | Integrand, quad: SphereQuadrature = DEFAULT_QUADRATURE) -> float:
    """Sphere average of a protocol's outcome-summed fidelity.

    ``target`` is a :class:`BranchModel` or any function of ``(theta, phi)``.
    Functions that do not broadcast over arrays are evaluated point by point.
    """
    fn = _integrand_of(target)
    tt, pp, ww = quad.nodes()
    try:
        vals = np.asarray(fn(tt, pp), dtype=float)
        if vals.shape != tt.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([[float(fn(t, p)) for t, p in zip(rt, rp)] for rt, rp in zip(tt, pp)])
    # fixed-order reduction keeps results reproducible
    return float(math.fsum((vals * ww).ravel()))


def branch_averages(model: BranchModel, quad: SphereQuadrature = DEFAULT_QUADRATURE):
    """Sphere-averaged probability and weighted fidelity per branch."""
    tt, pp, ww = quad.nodes()
    prob, weighted = model.evaluate(tt, pp)
    return (
        np.einsum("ij,ijn->n", ww, prob),
        np.einsum("ij,ijn->n", ww, weighted),
    )


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    stderr: float
    shots: int
    seed: int | None

    def z_score(self, reference: float) -> float:
        """Distance from ``reference`` in standard errors.

        Differences at or below ``EQUAL_TOL`` count as exact agreement: when every
        shot scores the same value the standard error is pure rounding noise.
        """
        diff = abs(self.mean - reference)
        if diff <= EQUAL_TOL:
            return 0.0
        return diff / self.stderr if self.stderr > 0 else math.inf


def monte_carlo_average(model: BranchModel, shots: int, seed: int | None = None) -> MonteCarloResult:
    """Shot-based estimate of the average fidelity.

    Each shot draws an input uniformly on the sphere, draws one protocol branch
    with its probability, and records that branch's fidelity.
    """
    shots = int(shots)
    if shots < 1:
        raise ConfigurationError(f"shots must be >= 1, got {shots}")
    rng = make_rng(seed)
    cos_t = rng.uniform(-1.0, 1.0, shots)
    phi = rng.uniform(0.0, 2 * np.pi, shots)
    u = rng.random(shots)
    prob, weighted = model.evaluate(np.arccos(cos_t), phi)
    prob = np.where(prob < DEGENERATE_TOL, 0.0, prob)
    cdf = np.cumsum(prob, axis=1)
    cdf /= cdf[:, -1:]
    pick = np.minimum((cdf <= u[:, None]).sum(axis=1), prob.shape[1] - 1)
    rows = np.arange(shots)
    fid = weighted[rows, pick] / prob[rows, pick]
    mean = float(fid.mean())
    stderr = float(fid.std(ddof=1) / math.sqrt(shots)) if shots > 1 else math.inf
    return MonteCarloResult(mean, stderr, shots, seed)


@dataclass
class FidelityReport:
    """One averaged protocol result, optionally paired with a closed form."""

    protocol: str
    params: dict
    simulated: float
    oracle: float | None = None
    method: str = "quadrature"
    per_branch: list = field(default_factory=list)
    shots: int | None = None
    seed: int | None = None
    stderr: float | None = None

    @property
    def deviation(self) -> float | None:
        if self.oracle is None:
            return None
        return abs(self.simulated - self.oracle)


def _report(protocol, params, model, quad, oracle_value) -> FidelityReport:
    probs, weights = branch_averages(model, quad)
    per_branch = [
        {"j": j, "k": k, "probability": float(p), "weighted_fidelity": float(f)}
        for (j, k), p, f in zip(model.keys, probs, weights)
    ]
    simulated = average_fidelity(model, quad)
    return FidelityReport(
        protocol,
        dict(params, quadrature=f"{quad.n_theta}x{quad.n_phi}"),
        simulated,
        None if oracle_value is None else float(oracle_value),
        per_branch=per_branch,
    )


def resource_state(kind: str, w: float = 1.0):
    kind = kind.lower()
    if kind == "ghz":
        base = ghz_state()
    elif kind == "w":
        base = w_state(3)
    else:
        raise ConfigurationError(f"resource must be 'ghz' or 'w', got {kind!r}")
    return base if w == 1 else noisy_state(base, Visibility(w))


def p0_oracle(kind: str, nu: float, w: float = 1.0) -> float:
    if kind == "ghz":
        return float(closed.ghz_noisy_average(w, nu)) if w != 1 else float(closed.ghz_average(nu))
    return float(closed.w_noisy_average(w))


def p0_report(
    kind: str,
    nu: float,
    w: float = 1.0,
    table: CorrectionTable | None = None,
    quad: SphereQuadrature = DEFAULT_QUADRATURE,
) -> FidelityReport:
    nu = MeasurementAngle(nu).nu
    w = Visibility(w).w
    default = TABLE_GHZ_P0 if kind == "ghz" else TABLE_W_P0
    model = p0_model(resource_state(kind, w), nu, table or default, name=f"{kind}-p0")
    return _report(f"{kind}-p0", {"nu": nu, "w": w}, model, quad, p0_oracle(kind, nu, w))


def p1_report(
    kind: str,
    n: int = 3,
    receiver: int | None = None,
    table: CorrectionTable | None = None,
    quad: SphereQuadrature = DEFAULT_QUADRATURE,
) -> FidelityReport:
    if kind == "ghz":
        if n != 3:
            raise ConfigurationError("the GHZ resource has exactly 3 particles")
        receiver = 4 if receiver is None else receiver
        model = p1_ghz_model(receiver, table or TABLE_GHZ_P1)
        value = closed.ghz_p1_average()
    elif kind == "w":
        receiver = n + 1 if receiver is None else receiver
        model = p1_w_model(n, receiver, table or TABLE_W_P1)
        value = closed.wn_p1_average(n)
    else:
        raise ConfigurationError(f"resource must be 'ghz' or 'w', got {kind!r}")
    return _report(f"{kind}-p1", {"n": n, "receiver": receiver}, model, quad, value)


def nu_sweep(kind: str, nus: Iterable[float], w: float = 1.0, quad=DEFAULT_QUADRATURE, table=None):
    return [p0_report(kind, nu, w, table, quad) for nu in nus]


def noise_sweep(
    kind: str,
    nu: MeasurementAngle | float,
    ws: Sequence[float],
    quad: SphereQuadrature = DEFAULT_QUADRATURE,
    table: CorrectionTable | None = None,
) -> list[FidelityReport]:
    """P0 average fidelity against visibility, paired with the noisy closed forms."""
    nu = nu.nu if isinstance(nu, MeasurementAngle) else nu
    reports = []
    for w in ws:
        rep = p0_report(kind, nu, w, table, quad)
        rep.oracle = float(closed.ghz_noisy_average(w, nu) if kind == "ghz" else closed.w_noisy_average(w))
        reports.append(rep)
    return reports


def n_sweep(
    ns: Iterable[int], receiver: int | None = None, quad: SphereQuadrature = DEFAULT_QUADRATURE
) -> list[FidelityReport]:
    """P1 average over N-particle W resources; ``receiver`` defaults to the last qubit."""
    return [p1_report("w", n, receiver, quad=quad) for n in ns]


def theta_profile(model: BranchModel, thetas: Iterable[float], n_phi: int = 32) -> np.ndarray:
    """Outcome-summed fidelity at each polar angle, averaged over the azimuth."""
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    th = np.asarray(list(thetas), float)
    vals = model.integrand(th[:, None], phi[None, :])
    return vals.mean(axis=1)


def affine_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line ``y = slope x + intercept``; returns (slope, intercept, max residual)."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    a = np.vstack([xs, np.ones_like(xs)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, ys, rcond=None)
    resid = float(np.max(np.abs(a @ [slope, intercept] - ys)))
    return float(slope), float(intercept), resid
