"""Command-line entry point: ``rnnreal <subcommand> SPEC [options]``.

Every subcommand writes ``report.json`` into ``--out`` and prints it.  Exit
codes: 0 when every check holds or is inconclusive, 2 for spec/argument
errors, 3 for simulation errors, 4 when a check fails.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .analysis import (
    FAILS,
    HOLDS,
    AnalysisOptions,
    Certificate,
    CertificateReport,
    accessibility_certificate,
    existence_necessary_check,
    hankel_minimality,
    minimality_certificate,
    observability_certificate,
    rnn_property_report,
)
from .embedding import build_r_aux, build_r_sigma, index_map, verify_aux, verify_embedding
from .errors import (
    ArgumentError,
    ConfigurationError,
    DimensionError,
    EvaluationError,
    ParseError,
    RnnRealError,
    SimulationError,
)
from .specfile import (
    REPORT_SCHEMA,
    digest,
    dumps,
    load_document,
    rational_to_dict,
    write_json,
)
from .systems import PwcInput, simulate_rational, simulate_rnn

log = logging.getLogger("rnnreal")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SIMULATION = 3
EXIT_FAILED = 4

LOG_ENV = "RNNREAL_LOG_LEVEL"

COMMANDS = (
    "build",
    "simulate",
    "verify-embedding",
    "verify-aux",
    "check-observability",
    "check-reachability",
    "check-minimality",
    "report",
)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    spec: str
    horizon: float = 5.0
    step: float = 1e-3
    tol: float = 1e-6
    tol_closed: float = 1e-6
    tol_fd: float = 1e-4
    fd_step: float = 1e-6
    depth_cap: int | None = None
    bracket_depth_cap: int | None = None
    points: int = 8
    seed: int = 0
    out: str = "rnnreal-out"

    def __post_init__(self):
        if self.subcommand not in COMMANDS:
            raise ArgumentError(f"unknown subcommand {self.subcommand!r}")
        for name in ("horizon", "step", "tol", "tol_closed", "tol_fd", "fd_step"):
            if not getattr(self, name) > 0:
                raise ArgumentError(f"--{name.replace('_', '-')} must be positive")
        if self.points < 1:
            raise ArgumentError("--points must be at least 1")
        for name in ("depth_cap", "bracket_depth_cap"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ArgumentError(f"--{name.replace('_', '-')} must be non-negative")

    @property
    def options(self) -> AnalysisOptions:
        return AnalysisOptions(self.depth_cap, self.bracket_depth_cap, self.points, self.seed)

    def as_dict(self) -> dict:
        out = asdict(self)
        # keep reports independent of where the files live
        out["spec"] = Path(self.spec).name
        out.pop("out")
        return out


class _Run:
    """Loaded spec plus the pieces of the ReportDocument being assembled."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.kind, self.system, self.input, raw = load_document(config.spec)
        self.digest = digest(raw)
        self.out = Path(config.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.report = CertificateReport()
        self.manifest: list[dict] = []
        self.extra: dict = {}

    def require_rnn(self):
        if self.kind != "rnn":
            raise ArgumentError(f"{self.config.subcommand} needs an RNN spec, got a rational-system spec")
        return self.system

    def require_input(self) -> PwcInput:
        if self.input is None:
            raise ParseError(f"{self.config.subcommand} needs an 'input' section")
        return self.input

    def document(self) -> dict:
        doc = {
            "schema": REPORT_SCHEMA,
            "tool": "rnnreal",
            "tool_version": __version__,
            "command": self.config.subcommand,
            "input_digest": self.digest,
            "config": self.config.as_dict(),
            "entries": self.report.as_list(),
            "trajectories": self.manifest,
        }
        doc.update(self.extra)
        return doc


def _dimensions(sys) -> dict:
    imap = index_map(sys)
    n, N, K = sys.n, imap.N, imap.K
    return {"n": n, "N": N, "K": K, "p": sys.p, "dim_r_sigma": n * (1 + N * K), "dim_r_aux": n * N * K}


def cmd_build(run: _Run):
    sys = run.require_rnn()
    r_sigma = build_r_sigma(sys)
    r_aux = build_r_aux(sys)
    write_json(run.out / "r_sigma.json", rational_to_dict(r_sigma))
    write_json(run.out / "r_aux.json", rational_to_dict(r_aux))
    dims = _dimensions(sys)
    write_json(run.out / "dimensions.json", dims)
    run.extra["dimensions"] = dims
    run.extra["files"] = ["r_sigma.json", "r_aux.json", "dimensions.json"]
    log.info("built R(Sigma) of dimension %d and R_aux of dimension %d", r_sigma.dim, r_aux.dim)


def _write_trajectory(run: _Run, traj, name, system, prefix):
    traj.write_csv(run.out / name, state_prefix=prefix)
    run.manifest.append({
        "file": name,
        "system": system,
        "rows": int(traj.times.shape[0]),
        "states": int(traj.states.shape[1]),
        "outputs": int(traj.outputs.shape[1]),
    })


def cmd_simulate(run: _Run):
    cfg = run.config
    u = run.input
    if u is None:
        log.warning("no input section; holding letter 0")
        u = PwcInput.constant(0)
    if run.kind == "rnn":
        sys = run.system
        u.check_alphabet(sys.K)
        _write_trajectory(run, simulate_rnn(sys, u, cfg.horizon, cfg.step), "trajectory_rnn.csv", "rnn", "x")
        _write_trajectory(run, simulate_rational(build_r_sigma(sys), u, cfg.horizon, cfg.step),
                          "trajectory_r_sigma.csv", "r_sigma", "v")
        _write_trajectory(run, simulate_rational(build_r_aux(sys), u, cfg.horizon, cfg.step),
                          "trajectory_r_aux.csv", "r_aux", "v")
    else:
        u.check_alphabet(run.system.K)
        _write_trajectory(run, simulate_rational(run.system, u, cfg.horizon, cfg.step),
                          "trajectory.csv", "rational", "v")


def _verify_embedding(run: _Run) -> Certificate:
    cfg = run.config
    sys, u = run.require_rnn(), run.require_input()
    u.check_alphabet(sys.K)
    rep = verify_embedding(sys, u, cfg.horizon, cfg.step, cfg.tol)
    return run.report.add(Certificate("embedding", HOLDS if rep.passed else FAILS,
                                      "embedding.conjugacy", rep.as_dict()))


def _verify_aux(run: _Run) -> Certificate:
    cfg = run.config
    sys, u = run.require_rnn(), run.require_input()
    u.check_alphabet(sys.K)
    rep = verify_aux(sys, u, cfg.horizon, cfg.step, cfg.tol_closed, cfg.tol_fd, cfg.fd_step)
    return run.report.add(Certificate("derivative_realization", HOLDS if rep.passed else FAILS,
                                      "derivative_realization", rep.as_dict()))


def cmd_verify_embedding(run: _Run):
    _verify_embedding(run)


def cmd_verify_aux(run: _Run):
    _verify_aux(run)


def _rnn_entries(run: _Run, names):
    report = rnn_property_report(run.system, run.config.options)
    for cert in report.entries:
        if cert.name in names:
            run.report.add(cert)


def cmd_check_observability(run: _Run):
    opts = run.config.options
    if run.kind == "rnn":
        run.report.add(observability_certificate(build_r_aux(run.system), opts,
                                                 "r_aux_semi_algebraic_observability"))
        _rnn_entries(run, ("weak_observability", "coordinate_subspace_trivial",
                           "coordinate_subspace_consistency"))
    else:
        run.report.add(observability_certificate(run.system, opts))


def cmd_check_reachability(run: _Run):
    opts = run.config.options
    if run.kind == "rnn":
        _rnn_entries(run, ("span_reachability",))
    else:
        run.report.add(accessibility_certificate(run.system, opts))


def cmd_check_minimality(run: _Run):
    sys, opts = run.require_rnn(), run.config.options
    run.report.extend(minimality_certificate(sys, opts))
    run.report.extend(hankel_minimality(sys, opts))
    run.report.extend(existence_necessary_check(sys, opts))


def cmd_report(run: _Run):
    opts = run.config.options
    if run.kind != "rnn":
        run.report.add(observability_certificate(run.system, opts))
        run.report.add(accessibility_certificate(run.system, opts))
        return
    sys = run.system
    run.extra["dimensions"] = _dimensions(sys)
    if run.input is not None:
        _verify_embedding(run)
        _verify_aux(run)
    else:
        log.info("no input section; skipping trajectory verification")
    run.report.extend(rnn_property_report(sys, opts))
    run.report.extend(minimality_certificate(sys, opts))
    run.report.extend(hankel_minimality(sys, opts))
    run.report.extend(existence_necessary_check(sys, opts))


HANDLERS = {
    "build": cmd_build,
    "simulate": cmd_simulate,
    "verify-embedding": cmd_verify_embedding,
    "verify-aux": cmd_verify_aux,
    "check-observability": cmd_check_observability,
    "check-reachability": cmd_check_reachability,
    "check-minimality": cmd_check_minimality,
    "report": cmd_report,
}


def execute(config: RunConfig) -> tuple[dict, int]:
    """Run one subcommand; returns the report document and the exit code.

    Errors are not caught here; :func:`main` maps them to exit codes.
    """
    run = _Run(config)
    HANDLERS[config.subcommand](run)
    doc = run.document()
    write_json(run.out / "report.json", doc)
    return doc, EXIT_FAILED if run.report.any_fails else EXIT_OK


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ParseError, ArgumentError, ConfigurationError, DimensionError, OSError)):
        return EXIT_PARSE
    if isinstance(exc, (SimulationError, EvaluationError)):
        return EXIT_SIMULATION
    return EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rnnreal", description="Rational realizations of continuous-time RNNs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("spec", help="RNN or rational-system spec (JSON)")
        p.add_argument("--horizon", type=float, default=5.0)
        p.add_argument("--step", type=float, default=1e-3)
        p.add_argument("--tol", type=float, default=1e-6, help="embedding and closed-form tolerance")
        p.add_argument("--tol-fd", type=float, default=1e-4, help="finite-difference tolerance")
        p.add_argument("--fd-step", type=float, default=1e-6)
        p.add_argument("--depth-cap", type=int, default=None)
        p.add_argument("--bracket-depth-cap", type=int, default=None)
        p.add_argument("--points", type=int, default=8, help="random sample points for rank checks")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="rnnreal-out", help="output directory")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        spec=args.spec,
        horizon=args.horizon,
        step=args.step,
        tol=args.tol,
        tol_closed=args.tol,
        tol_fd=args.tol_fd,
        fd_step=args.fd_step,
        depth_cap=args.depth_cap,
        bracket_depth_cap=args.bracket_depth_cap,
        points=args.points,
        seed=args.seed,
        out=args.out,
    )


def _setup_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        doc, code = execute(config)
    except RnnRealError as exc:
        print(f"rnnreal: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except OSError as exc:
        print(f"rnnreal: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    sys.stdout.write(dumps(doc))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
