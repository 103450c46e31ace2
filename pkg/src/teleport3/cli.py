"""Command-line front end: ``teleport3 {run,sweep,mc,verify}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import closed_forms as closed
from .analysis import (
    SphereQuadrature,
    average_fidelity,
    monte_carlo_average,
    p0_report,
    p1_report,
    resource_state,
    theta_profile,
)
from .errors import ConfigurationError, Teleport3Error
from .protocols import (
    DEFAULT_TABLES,
    MAX_W_PARTICLES,
    CorrectionTable,
    p0_model,
    p1_ghz_model,
    p1_w_model,
    run_p0,
    run_p1_ghz,
    run_p1_w,
)
from .states import BlochAngles, MeasurementAngle, Visibility
from .verify import run_checks

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class _IOFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    resource: str = "ghz"
    protocol: str = "p0"
    theta: float = math.pi / 2
    phi: float = 0.0
    nu: float | None = None
    w_visibility: float = 1.0
    n_particles: int = 3
    receiver: int | None = None
    sweep_param: str | None = None
    start: float | None = None
    stop: float | None = None
    steps: int = 9
    shots: int = 100_000
    seeds: list = field(default_factory=list)
    output: str | None = None
    quad: SphereQuadrature = field(default_factory=SphereQuadrature)
    table: CorrectionTable | None = None

    @property
    def table_key(self) -> str:
        return f"{self.resource}-{self.protocol}"

    @property
    def nu_value(self) -> float:
        return math.pi / 4 if self.nu is None else self.nu

    def validate(self) -> "RunConfig":
        if self.protocol == "p1":
            if self.nu is not None or self.sweep_param == "nu":
                raise ConfigurationError("protocol p1 has no accomplice measurement; drop --nu")
            if self.w_visibility != 1 or self.sweep_param == "w":
                raise ConfigurationError("white noise is only modelled for protocol p0")
        else:
            MeasurementAngle(self.nu_value)
            if self.n_particles != 3 or self.sweep_param == "n":
                raise ConfigurationError("protocol p0 uses exactly three resource particles")
        if self.sweep_param == "n" and not (self.protocol == "p1" and self.resource == "w"):
            raise ConfigurationError("an n sweep needs --resource w --protocol p1")
        if self.resource == "ghz" and self.n_particles != 3:
            raise ConfigurationError("the GHZ resource has exactly three particles")
        if not 3 <= self.n_particles <= MAX_W_PARTICLES:
            raise ConfigurationError(f"--n must lie in 3..{MAX_W_PARTICLES}")
        Visibility(self.w_visibility)
        BlochAngles(self.theta, self.phi)
        if self.receiver is not None and not 3 <= self.receiver <= self.n_particles + 1:
            raise ConfigurationError(f"--receiver must lie in 3..{self.n_particles + 1}")
        if self.shots < 1:
            raise ConfigurationError("--shots must be positive")
        if self.steps < 1:
            raise ConfigurationError("--steps must be positive")
        if self.table is not None:
            self.table.require(uses_k=self.protocol == "p0")
        return self


def _tables(cfg: RunConfig) -> dict:
    tables = dict(DEFAULT_TABLES)
    if cfg.table is not None:
        tables[cfg.table_key] = cfg.table
    return tables


def _model(cfg: RunConfig, **over):
    nu = over.get("nu", cfg.nu_value)
    w = over.get("w", cfg.w_visibility)
    n = over.get("n", cfg.n_particles)
    table = _tables(cfg)[cfg.table_key]
    if cfg.protocol == "p0":
        return p0_model(resource_state(cfg.resource, w), nu, table, name=cfg.table_key)
    receiver = cfg.receiver or n + 1
    if cfg.resource == "ghz":
        return p1_ghz_model(receiver, table)
    return p1_w_model(n, receiver, table)


def _report(cfg: RunConfig, **over):
    table = _tables(cfg)[cfg.table_key]
    if cfg.protocol == "p0":
        return p0_report(
            cfg.resource, over.get("nu", cfg.nu_value), over.get("w", cfg.w_visibility), table, cfg.quad
        )
    return p1_report(cfg.resource, over.get("n", cfg.n_particles), cfg.receiver, table, cfg.quad)


def _fmt(x) -> str:
    return "" if x is None else "%.12g" % x


def cmd_run(cfg: RunConfig, out) -> int:
    angles = BlochAngles(cfg.theta, cfg.phi)
    table = _tables(cfg)[cfg.table_key]
    if cfg.protocol == "p0":
        records = run_p0(resource_state(cfg.resource, cfg.w_visibility), angles, cfg.nu_value, table)
        params = f"nu={cfg.nu_value:.12g} w={cfg.w_visibility:.12g}"
    elif cfg.resource == "ghz":
        records = run_p1_ghz(angles, cfg.receiver or 4, table)
        params = f"receiver={cfg.receiver or 4}"
    else:
        receiver = cfg.receiver or cfg.n_particles + 1
        records = run_p1_w(cfg.n_particles, angles, receiver, table)
        params = f"n={cfg.n_particles} receiver={receiver}"
    print(f"# {cfg.table_key} {params} theta={cfg.theta:.12g} phi={cfg.phi:.12g}", file=out)
    print(f"{'j':>2} {'k':>2} {'pauli':>5} {'probability':>16} {'fidelity':>16}", file=out)
    for r in records:
        fid = "degenerate" if r.fidelity is None else f"{r.fidelity:.12f}"
        k = "-" if r.k is None else str(r.k)
        print(f"{r.j:>2} {k:>2} {r.correction:>5} {r.branch_probability:>16.12f} {fid:>16}", file=out)
    rep = _report(cfg)
    line = f"average {rep.simulated:.12f}"
    if rep.oracle is not None:
        line += f"  oracle {rep.oracle:.12f}  deviation {rep.deviation:.3g}"
    print(line, file=out)
    return EXIT_OK


def _sweep_rows(cfg: RunConfig) -> list[tuple]:
    p = cfg.sweep_param
    if p == "n":
        lo = int(cfg.start if cfg.start is not None else 3)
        hi = int(cfg.stop if cfg.stop is not None else 10)
        if not 3 <= lo <= hi <= MAX_W_PARTICLES:
            raise ConfigurationError(f"n sweep bounds must satisfy 3 <= start <= stop <= {MAX_W_PARTICLES}")
        rows = []
        for n in range(lo, hi + 1):
            rep = _report(cfg, n=n)
            rows.append((n, rep.simulated, rep.oracle))
        return rows
    domains = {"nu": (0.0, math.pi / 2), "w": (0.0, 1.0), "theta": (0.0, math.pi)}
    lo, hi = domains[p]
    start = lo if cfg.start is None else cfg.start
    stop = hi if cfg.stop is None else cfg.stop
    if not (lo - 1e-12 <= start <= hi + 1e-12 and lo - 1e-12 <= stop <= hi + 1e-12):
        raise ConfigurationError(f"{p} sweep must stay inside [{lo}, {hi}]")
    grid = np.linspace(start, stop, cfg.steps)
    if p == "theta":
        model = _model(cfg)
        sims = theta_profile(model, grid, n_phi=cfg.quad.n_phi)
        return [(t, s, _theta_oracle(cfg, t)) for t, s in zip(grid, sims)]
    rows = []
    for x in grid:
        rep = _report(cfg, **{p: float(x)})
        rows.append((float(x), rep.simulated, rep.oracle))
    return rows


def _theta_oracle(cfg: RunConfig, theta: float) -> float | None:
    if cfg.w_visibility != 1:
        return None
    if cfg.protocol == "p0" and cfg.resource == "w":
        return float(closed.w_integrand(theta))
    if cfg.protocol == "p0":
        total = 0.0
        for j in range(1, 5):
            for k in (1, 2):
                q = closed.ghz_cindy_probability(j, k, theta, cfg.nu_value)
                if q > 1e-12:
                    total += closed.ghz_bell_probability(j) * q * closed.ghz_branch_fidelity(j, k, theta, cfg.nu_value)
        return float(total)
    if cfg.resource == "w":
        n = cfg.n_particles
        return float(
            sum(closed.wn_bell_probability(j, theta, n) * closed.w_p1_branch_fidelity(j, theta, n) for j in range(1, 5))
        )
    return None


def cmd_sweep(cfg: RunConfig, out) -> int:
    rows = _sweep_rows(cfg)
    buf = io.StringIO(newline="\n")
    buf.write("param,simulated,oracle,deviation\n")
    for x, sim, orc in rows:
        dev = None if orc is None else abs(sim - orc)
        buf.write(f"{_fmt(x)},{_fmt(sim)},{_fmt(orc)},{_fmt(dev)}\n")
    text = buf.getvalue()
    if cfg.output in (None, "-"):
        out.write(text)
    else:
        try:
            with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise _IOFailure(f"cannot write {cfg.output}: {exc.strerror or exc}") from None
    return EXIT_OK


def cmd_mc(cfg: RunConfig, out) -> int:
    model = _model(cfg)
    reference = average_fidelity(model, cfg.quad)
    for seed in cfg.seeds or [0]:
        r = monte_carlo_average(model, cfg.shots, seed)
        print(
            f"seed {seed} shots {r.shots} mean {r.mean:.12f} stderr {r.stderr:.3g} "
            f"quadrature {reference:.12f} z {r.z_score(reference):.2f}",
            file=out,
        )
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out) -> int:
    tables = {cfg.table_key: cfg.table} if cfg.table is not None else None
    checks = run_checks(tables, seeds=cfg.seeds or (42, 43), quad=cfg.quad, shots=cfg.shots)
    for c in checks:
        print(c.line(), file=out)
    failed = [c.name for c in checks if not c.passed]
    print(f"{len(checks)} checks, {len(failed)} failed", file=out)
    if failed:
        print("failed: " + ", ".join(failed), file=out)
        return EXIT_FAIL
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "mc": cmd_mc, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleport3", description="Teleportation with three-particle GHZ and W resources."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--resource", choices=["ghz", "w"], default="ghz")
    common.add_argument("--protocol", choices=["p0", "p1"], default="p0")
    common.add_argument("--theta", type=float, default=None, help="input polar angle")
    common.add_argument("--phi", type=float, default=None, help="input azimuth")
    common.add_argument("--nu", type=float, default=None, help="accomplice basis angle (p0 only)")
    common.add_argument("--w", dest="w_visibility", type=float, default=1.0, help="visibility")
    common.add_argument("--n", dest="n_particles", type=int, default=3, help="W particles (p1)")
    common.add_argument("--receiver", type=int, default=None)
    common.add_argument("--deg", action="store_true", help="angles are given in degrees")
    common.add_argument("--quad", default="32x32", help="quadrature nodes as <n_theta>x<n_phi>")
    common.add_argument("--table", default=None, help="correction table file ('j k pauli' lines)")
    common.add_argument("--output", default=None, help="CSV destination (default stdout)")
    common.add_argument("--seed", dest="seeds", type=int, action="append", default=[])
    common.add_argument("--shots", type=int, default=100_000)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one protocol instance")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV")
    sw.add_argument("--param", dest="sweep_param", choices=["nu", "w", "n", "theta"], required=True)
    sw.add_argument("--start", type=float, default=None)
    sw.add_argument("--stop", type=float, default=None)
    sw.add_argument("--steps", type=int, default=9)
    sub.add_parser("mc", parents=[common], help="Monte Carlo estimate")
    sub.add_parser("verify", parents=[common], help="full check battery")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    conv = math.radians if args.deg else float
    cfg = RunConfig(command=args.command)
    cfg.resource = args.resource
    cfg.protocol = args.protocol
    cfg.theta = math.pi / 2 if args.theta is None else conv(args.theta)
    cfg.phi = 0.0 if args.phi is None else conv(args.phi)
    cfg.nu = None if args.nu is None else conv(args.nu)
    cfg.w_visibility = args.w_visibility
    cfg.n_particles = args.n_particles
    cfg.receiver = args.receiver
    cfg.shots = args.shots
    cfg.seeds = list(args.seeds)
    cfg.output = args.output
    cfg.quad = SphereQuadrature.parse(args.quad)
    if getattr(args, "sweep_param", None):
        cfg.sweep_param = args.sweep_param
        angular = args.sweep_param in ("nu", "theta")
        cfg.start = None if args.start is None else (conv(args.start) if angular else args.start)
        cfg.stop = None if args.stop is None else (conv(args.stop) if angular else args.stop)
        cfg.steps = args.steps
    if args.table:
        try:
            cfg.table = CorrectionTable.load(args.table)
        except OSError as exc:
            raise _IOFailure(f"cannot read {args.table}: {exc.strerror or exc}") from None
    return cfg.validate()


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg, out)
    except _IOFailure as exc:
        print(f"teleport3: {exc}", file=sys.stderr)
        return EXIT_IO
    except Teleport3Error as exc:
        print(f"teleport3: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
