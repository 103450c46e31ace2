"""Named invariant and closed-form checks over the whole simulator.

``run_checks`` returns one :class:`Check` per named property.  Correction
tables can be overridden to confirm that a corrupted table is caught.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import closed_forms as closed
from .analysis import (
    DEFAULT_QUADRATURE,
    SphereQuadrature,
    affine_fit,
    average_fidelity,
    monte_carlo_average,
    noise_sweep,
    p0_report,
    p1_report,
)
from .measurement import make_rng, measure
from .protocols import (
    DEFAULT_TABLES,
    CorrectionTable,
    p0_model,
    run_p0,
    run_p1_w,
    total_probability,
)
from .qmat import DensityOperator, embed, kron, partial_trace, reduce_operator, tensor
from .states import (
    BlochAngles,
    bell_projectors,
    ghz_state,
    input_state,
    noisy_state,
    nu_projectors,
    w_state,
)

NU_GRID = tuple(np.linspace(0, np.pi / 2, 5))
THETA_GRID = tuple(np.linspace(0, np.pi, 5))
PHI_GRID = tuple(np.linspace(0, 2 * np.pi, 5, endpoint=False))
W_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
AVG_TOL = 1e-9
BRANCH_TOL = 1e-12
# fidelities are compared only where the branch is clearly populated
POPULATED = 1e-9


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  {self.detail}".rstrip()


def _grid():
    for th in THETA_GRID:
        for ph in PHI_GRID:
            for nu in NU_GRID:
                yield th, ph, nu


def _max_dev(pairs) -> float:
    devs = [abs(a - b) for a, b in pairs]
    if any(math.isnan(d) for d in devs):
        return math.inf
    return max(devs, default=0.0)


def _fid(record) -> float:
    return math.nan if record.fidelity is None else record.fidelity


def _branch_check(name, pairs, tol=BRANCH_TOL) -> Check:
    dev = _max_dev(pairs)
    return Check(name, dev <= tol, f"max deviation {dev:.3g} (tol {tol:g})")


def _structural(rng) -> list[Check]:
    out = []
    try:
        bell_projectors().check()
        for nu in NU_GRID:
            nu_projectors(nu).check()
        out.append(Check("projectors.complete_orthogonal", True, "bell + 5 nu bases"))
    except Exception as exc:
        out.append(Check("projectors.complete_orthogonal", False, str(exc)))

    pur = [input_state(BlochAngles(1.0, 2.0)).purity(), ghz_state().purity(), w_state(3).purity(), w_state(6).purity()]
    dev = _max_dev((p, 1.0) for p in pur)
    out.append(Check("states.purity", dev <= BRANCH_TOL, f"max |tr rho^2 - 1| {dev:.3g}"))

    dev = 0.0
    for chi in (ghz_state(), w_state(3)):
        for w in W_GRID:
            mix = w * noisy_state(chi, 1).matrix + (1 - w) * noisy_state(chi, 0).matrix
            dev = max(dev, float(np.max(np.abs(noisy_state(chi, w).matrix - mix))))
    out.append(Check("states.noise_affine", dev <= 1e-14, f"max deviation {dev:.3g}"))

    a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    dev = float(np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))))
    out.append(Check("qmat.kron_associative", dev <= 1e-14, f"max deviation {dev:.3g}"))

    m1, m2 = (rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)) for _ in range(2))
    dev = abs(np.trace(m1 @ m2) - np.trace(m2 @ m1))
    out.append(Check("qmat.trace_cyclic", dev <= 1e-12, f"deviation {dev:.3g}"))

    ghz34 = partial_trace(ghz_state(), [3, 4]).matrix
    w34 = partial_trace(w_state(3), [3, 4]).matrix
    e_ghz = np.diag([0.5, 0, 0, 0.5])
    e_w = np.zeros((4, 4))
    e_w[0, 0] = 1 / 3
    e_w[1:3, 1:3] = 1 / 3
    dev = max(np.max(np.abs(ghz34 - e_ghz)), np.max(np.abs(w34 - e_w)))
    rho = tensor(input_state(BlochAngles(0.8, 0.3)), w_state(3))
    proj = nu_projectors(0.4)[1]
    lhs = np.trace(embed(proj, [3], rho.labels) @ rho.matrix)
    rhs = np.trace(proj @ partial_trace(rho, [3]).matrix)
    full = reduce_operator(rho.matrix, rho.labels, [])[0, 0]
    dev = max(dev, abs(lhs - rhs), abs(full - 1))
    out.append(Check("qmat.partial_trace_identities", dev <= BRANCH_TOL, f"max deviation {dev:.3g}"))
    return out


def _measurement(rng) -> list[Check]:
    out = []
    states = [
        tensor(input_state(BlochAngles(t, p)), r)
        for t, p in ((0.3, 1.0), (2.0, 4.0))
        for r in (ghz_state(), w_state(3), noisy_state(w_state(3), 0.4))
    ]
    closure = dephase = idem = 0.0
    for rho in states:
        branches = measure(rho, bell_projectors(), (1, 2))
        closure = max(closure, abs(sum(b.probability for b in branches) - 1))
        summed = sum(b.unnormalized for b in branches)
        dephase = max(dephase, float(np.max(np.abs(summed - reduce_operator(rho.matrix, rho.labels, (3, 4))))))
        for b in measure(rho, bell_projectors(), (1, 2), keep_measured=True):
            again = measure(b.conditional, bell_projectors(), (1, 2), keep_measured=True)[b.outcome - 1]
            idem = max(idem, abs(again.probability - 1), float(np.max(np.abs(again.conditional.matrix - b.conditional.matrix))))
    out.append(Check("measurement.closure", closure <= 1e-10, f"max |sum p - 1| {closure:.3g}"))
    out.append(Check("measurement.dephasing_sum", dephase <= BRANCH_TOL, f"max deviation {dephase:.3g}"))
    out.append(Check("measurement.idempotent", idem <= BRANCH_TOL, f"max deviation {idem:.3g}"))

    alpha = float(rng.uniform())
    r1, r2 = states[0], states[4]
    mix = DensityOperator(alpha * r1.matrix + (1 - alpha) * r2.matrix, r1.labels)
    p1 = [b.probability for b in measure(r1, bell_projectors(), (1, 2))]
    p2 = [b.probability for b in measure(r2, bell_projectors(), (1, 2))]
    pm = [b.probability for b in measure(mix, bell_projectors(), (1, 2))]
    dev = _max_dev((m, alpha * a + (1 - alpha) * b) for m, a, b in zip(pm, p1, p2))
    out.append(Check("measurement.linear", dev <= BRANCH_TOL, f"max deviation {dev:.3g}"))
    return out


def _branch_oracles(tables) -> list[Check]:
    ghz, w3 = ghz_state(), w_state(3)
    gp, gq, gf, wp, wq, wf = ([] for _ in range(6))
    perfect = []
    closure = 0.0
    for th, ph, nu in _grid():
        a = BlochAngles(th, ph)
        recs = run_p0(ghz, a, nu, tables["ghz-p0"])
        closure = max(closure, abs(total_probability(recs) - 1))
        for r in recs:
            p, q = r.stage_probabilities
            gp.append((p, closed.ghz_bell_probability(r.j)))
            q_or = closed.ghz_cindy_probability(r.j, r.k, th, nu)
            gq.append((q, q_or))
            if q_or > POPULATED:
                gf.append((_fid(r), closed.ghz_branch_fidelity(r.j, r.k, th, nu)))
            if abs(nu - np.pi / 4) < 1e-15 and not r.degenerate:
                perfect.append((_fid(r), 1.0))
        recs = run_p0(w3, a, nu, tables["w-p0"])
        closure = max(closure, abs(total_probability(recs) - 1))
        for r in recs:
            p, q = r.stage_probabilities
            wp.append((p, closed.w_bell_probability(r.j, th)))
            q_or = closed.w_cindy_probability(r.j, r.k, th, ph, nu)
            wq.append((q, q_or))
            if q_or > POPULATED:
                wf.append((_fid(r), closed.w_branch_fidelity(r.j, r.k, th, ph, nu)))
    out = [
        Check("protocols.p0_probability_closure", closure <= 1e-10, f"max |sum - 1| {closure:.3g}"),
        _branch_check("ghz.p0.bell_probability", gp),
        _branch_check("ghz.p0.cindy_probability", gq),
        _branch_check("ghz.p0.branch_fidelity", gf),
        _branch_check("ghz.p0.perfect_at_quarter_pi", perfect),
        _branch_check("w.p0.bell_probability", wp),
        _branch_check("w.p0.cindy_probability", wq),
        _branch_check("w.p0.branch_fidelity", wf),
    ]

    p1f, p1p, sym = [], [], []
    for th in THETA_GRID:
        for ph in PHI_GRID:
            a = BlochAngles(th, ph)
            by_receiver = {}
            for s in (3, 4):
                recs = run_p1_w(3, a, s, tables["w-p1"])
                by_receiver[s] = recs
                for r in recs:
                    p1p.append((r.branch_probability, closed.w_bell_probability(r.j, th)))
                    p1f.append((_fid(r), closed.w_p1_branch_fidelity(r.j, th)))
            sym.extend((_fid(x), _fid(y)) for x, y in zip(by_receiver[3], by_receiver[4]))
    out.append(_branch_check("w.p1.bell_probability", p1p))
    out.append(_branch_check("w.p1.branch_fidelity", p1f))
    out.append(_branch_check("w.p1.receiver_symmetry", sym))

    fast = []
    for n in (3, 4, 5):
        for th, ph in ((0.4, 1.3), (2.5, 5.0)):
            a = BlochAngles(th, ph)
            for s in (3, n + 1):
                d = run_p1_w(n, a, s, tables["w-p1"], method="density")
                v = run_p1_w(n, a, s, tables["w-p1"], method="statevector")
                fast.extend((x.weighted_fidelity, y.weighted_fidelity) for x, y in zip(d, v))
                fast.extend((x.branch_probability, y.branch_probability) for x, y in zip(d, v))
    out.append(_branch_check("w.p1.statevector_matches_density", fast))

    batch = []
    for th, ph, nu in ((0.7, 0.2, 0.3), (2.9, 3.3, 1.1)):
        for res, key in ((ghz, "ghz-p0"), (w3, "w-p0")):
            recs = run_p0(res, BlochAngles(th, ph), nu, tables[key])
            probs, weights = p0_model(res, nu, tables[key]).evaluate(th, ph)
            batch.extend(zip([r.weighted_fidelity for r in recs], weights))
            batch.extend(zip([r.branch_probability for r in recs], probs))
    out.append(_branch_check("protocols.batch_matches_reference", batch))
    return out


def _averages(tables, quad) -> list[Check]:
    out = []
    ghz_devs = [p0_report("ghz", nu, table=tables["ghz-p0"], quad=quad).deviation for nu in NU_GRID]
    out.append(Check("ghz.p0.average", max(ghz_devs) <= AVG_TOL, f"max deviation {max(ghz_devs):.3g}"))
    w_vals = [p0_report("w", nu, table=tables["w-p0"], quad=quad).simulated for nu in NU_GRID]
    dev = _max_dev((v, 7 / 9) for v in w_vals)
    spread = max(w_vals) - min(w_vals)
    out.append(Check("w.p0.average", dev <= AVG_TOL, f"max deviation {dev:.3g}"))
    out.append(Check("w.p0.nu_independent", spread <= AVG_TOL, f"spread {spread:.3g}"))

    # probabilistic perfect copy at nu = pi/2, branch (1, 1)
    rng = make_rng(7)
    pairs = []
    for th in rng.uniform(0, np.pi, 10):
        rec = run_p0(w_state(3), BlochAngles(th, 0.0), np.pi / 2, tables["w-p0"])[0]
        expect = closed.w_bell_probability(1, th) / (1 + math.cos(th / 2) ** 2)
        pairs.append((_fid(rec), 1.0))
        pairs.append((rec.branch_probability, expect))
    out.append(_branch_check("w.p0.perfect_copy", pairs))

    p1 = [p1_report("w", 3, s, tables["w-p1"], quad).simulated for s in (3, 4)]
    dev = _max_dev((v, 7 / 9) for v in p1)
    out.append(Check("w.p1.average", dev <= AVG_TOL, f"receivers 3,4 max deviation {dev:.3g}"))
    g1 = [p1_report("ghz", 3, s, tables["ghz-p1"], quad).simulated for s in (3, 4)]
    dev = _max_dev((v, 2 / 3) for v in g1)
    out.append(Check("ghz.p1.average", dev <= AVG_TOL, f"receivers 3,4 max deviation {dev:.3g}"))

    ns = range(3, 11)
    reps = [p1_report("w", n, table=tables["w-p1"], quad=quad) for n in ns]
    dev = max(r.deviation for r in reps)
    bound = all(r.simulated <= 2 / 3 + AVG_TOL for n, r in zip(ns, reps) if n >= 4)
    out.append(Check("wn.p1.average", dev <= AVG_TOL, f"N=3..10 max deviation {dev:.3g}"))
    out.append(Check("wn.p1.classical_bound_from_n4", bound, "<= 2/3 for N >= 4"))

    wn = noise_sweep("w", 0.3, W_GRID, quad, tables["w-p0"])
    dev = max(r.deviation for r in wn)
    out.append(Check("w.noise.curve", dev <= AVG_TOL, f"max deviation {dev:.3g}"))
    slopes, dev, resid = {}, 0.0, 0.0
    for nu in (0.0, np.pi / 4):
        gn = noise_sweep("ghz", nu, W_GRID, quad, tables["ghz-p0"])
        dev = max(dev, max(r.deviation for r in gn))
        slope, _, res = affine_fit(W_GRID, [r.simulated for r in gn])
        slopes[nu] = slope
        resid = max(resid, res)
    ok = dev <= AVG_TOL and resid <= 1e-10 and abs(slopes[np.pi / 4]) > abs(slopes[0.0])
    out.append(Check("ghz.noise.curve", ok, f"max deviation {dev:.3g}, slopes {slopes[0.0]:.6f} < {slopes[np.pi / 4]:.6f}"))

    model = p0_model(w_state(3), 0.3, tables["w-p0"])
    delta = abs(average_fidelity(model, quad) - average_fidelity(model, quad.doubled()))
    out.append(Check("analysis.quadrature_converged", delta < 1e-10, f"doubling changes by {delta:.3g}"))
    return out


def _monte_carlo(tables, quad, seeds, shots) -> list[Check]:
    out = []
    cases = (
        ("ghz.p0", p0_model(ghz_state(), np.pi / 8, tables["ghz-p0"])),
        ("w.p0", p0_model(w_state(3), np.pi / 8, tables["w-p0"])),
    )
    for label, model in cases:
        reference = average_fidelity(model, quad)
        for seed in seeds:
            mc = monte_carlo_average(model, shots, seed)
            z = mc.z_score(reference)
            out.append(Check(f"{label}.monte_carlo[seed={seed}]", z < 4, f"mean {mc.mean:.6f} vs {reference:.6f}, z={z:.2f}"))
    return out


def run_checks(
    tables: Mapping[str, CorrectionTable] | None = None,
    seeds: Sequence[int] = (42, 43),
    quad: SphereQuadrature = DEFAULT_QUADRATURE,
    shots: int = 100_000,
    monte_carlo: bool = True,
) -> list[Check]:
    """Run the whole battery; ``tables`` overrides entries of ``DEFAULT_TABLES``."""
    merged = dict(DEFAULT_TABLES)
    merged.update(tables or {})
    rng = make_rng(12345)
    sections: list[tuple[str, Callable[[], list[Check]]]] = [
        ("structural", lambda: _structural(rng)),
        ("measurement", lambda: _measurement(rng)),
        ("branch_oracles", lambda: _branch_oracles(merged)),
        ("averages", lambda: _averages(merged, quad)),
    ]
    if monte_carlo:
        sections.append(("monte_carlo", lambda: _monte_carlo(merged, quad, seeds, shots)))
    checks = []
    for name, section in sections:
        try:
            checks.extend(section())
        except Exception as exc:  # a crash is reported as a failed check
            checks.append(Check(f"{name}.completed", False, f"{type(exc).__name__}: {exc}"))
    return checks
