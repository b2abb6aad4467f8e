"""Command-line orchestration: deterministic experiment runs with atomic CSV/JSON
artifacts and a manifest per invocation.

Commands: compress, marcus, rate-scan, rates-theory, count, init-wavepacket,
fastforward-check. All physical quantities are atomic units; every command is
byte-reproducible for a fixed seed. Output dir from --output-dir or
WALSHPRESS_OUTPUT_DIR (default: cwd).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
import tempfile
import time
import numpy as np

from . import __version__
from .builders import fit_wavepacket
from .core import StateVector, apply_circuit
from .errors import NumericIntegrityError
from .grid import GridSpec, centered_dft_matrix, momenta, positions
from .marcus import (
    EXPLICIT, CompressedMode, MarcusConfig, MarcusRateParams, StepCouplingSpec,
    extract_rate, fc_rate_curve, kinetic_target_diagonal, marcus_rate_theory,
    potential_target_diagonal, rate_scan, simulate,
)
from .optimize import OptimizerConfig
from .resources import census_table, total_qubits
from .vff import VffAnsatz, compress, exact_thetas_for_phase, gamma_count
from .walsh import admitted_masks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    """Schema violation in a config file or flag set."""


# ---------------------------------------------------------------------------
# Artifact plumbing
# ---------------------------------------------------------------------------

def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-artifact-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def _config_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


class Runner:
    def __init__(self, command: str, config_payload: dict, output_dir: str,
                 manifest_only: bool = False):
        self.command = command
        self.payload = config_payload
        self.output_dir = output_dir
        self.manifest_only = manifest_only
        self.artifacts: list[str] = []
        self.extra: dict = {}
        self.start = time.monotonic()

    def path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def emit_csv(self, name: str, header: list[str], rows: list[tuple]) -> None:
        if not self.manifest_only:
            _write_csv(self.path(name), header, rows)
        self.artifacts.append(name)
        # generated column reference, recorded per artifact in the manifest
        self.extra.setdefault("csv_columns", {})[name] = list(header)

    def emit_json(self, name: str, payload: dict) -> None:
        if not self.manifest_only:
            _atomic_write(self.path(name), json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.artifacts.append(name)

    def finish(self, converged: bool = True) -> None:
        manifest = {
            "command": self.command,
            "config_hash": _config_hash(self.payload),
            "config": self.payload,
            "seed": self.payload.get("seed"),
            "converged": converged,
            "artifacts": self.artifacts,
            "versions": {
                "walshpress": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "wall_time_s": round(time.monotonic() - self.start, 3),
            **self.extra,
        }
        _atomic_write(self.path("manifest.json"), json.dumps(manifest, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _require(cfg: dict, key: str, types, context: str):
    if key not in cfg:
        raise ConfigError(f"{context}: missing required key '{key}'")
    val = cfg[key]
    if not isinstance(val, types):
        raise ConfigError(f"{context}: key '{key}' has type {type(val).__name__}")
    return val


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})")


def marcus_config_from_dict(cfg: dict, context: str = "config") -> MarcusConfig:
    grid_cfg = _require(cfg, "grid", dict, context)
    grid = GridSpec(int(_require(grid_cfg, "n", int, context + ".grid")),
                    float(_require(grid_cfg, "L", (int, float), context + ".grid")))
    coupling = cfg.get("coupling", {})
    if not isinstance(coupling, dict):
        raise ConfigError(f"{context}: 'coupling' must be an object")
    step = StepCouplingSpec(
        c0=float(coupling.get("C0", 0.01)),
        beta=float(coupling.get("beta", 5.0)),
        center=coupling.get("a"),
        span=tuple(coupling["span"]) if "span" in coupling else None,
    )
    mode = cfg.get("operator_mode", "explicit")
    if mode == "explicit":
        operator_mode = EXPLICIT
    elif isinstance(mode, dict) and "compressed" in mode:
        sub = mode["compressed"]
        operator_mode = CompressedMode(
            l_kinetic=int(sub.get("l_kinetic", 4)),
            l_potential=int(sub.get("l_potential", 6)),
            topology=sub.get("topology", "linear"),
        )
    else:
        raise ConfigError(f"{context}: operator_mode must be 'explicit' or {{'compressed': {{...}}}}")
    try:
        return MarcusConfig(
            grid=grid,
            mu=float(cfg.get("mu", 1.0)),
            a1=float(cfg.get("A1", 0.015)),
            a0=float(cfg.get("A0", 1.5)),
            dg=float(cfg.get("dG", 0.0)),
            coupling=step,
            tau=float(cfg.get("tau", 1.0)),
            p0=float(cfg.get("p0", 0.0)),
            x0_packet=float(cfg.get("x0_packet", 0.0)),
            operator_mode=operator_mode,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{context}: {exc}")


def _optimizer_from_args(args, default_iters=1500) -> OptimizerConfig:
    return OptimizerConfig(
        seed=args.seed,
        max_iters=getattr(args, "max_iters", default_iters) or default_iters,
        learning_rate=getattr(args, "learning_rate", 0.05),
        cost_tolerance=getattr(args, "cost_tolerance", 1e-6),
    )


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------

def _cmd_compress(args, runner: Runner) -> int:
    grid = GridSpec(args.n, args.L)
    if args.target == "kinetic":
        diag = kinetic_target_diagonal(grid, args.mu, args.tau)
    elif args.target == "v0":
        diag = potential_target_diagonal(grid, args.A1, grid.L / 2 + args.A0, 0.0, args.tau)
    elif args.target == "v1":
        diag = potential_target_diagonal(grid, args.A1, grid.L / 2 - args.A0, args.dG, args.tau)
    else:
        data = _load_json(args.target)
        re = _require(data, "diagonal_real", list, args.target)
        im = _require(data, "diagonal_imag", list, args.target)
        diag = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
        if diag.size != grid.num_points:
            raise ConfigError(f"{args.target}: diagonal length {diag.size} != 2^n")
    opt = _optimizer_from_args(args)
    result = compress(diag, args.n, args.l, args.topology, args.layers_w, opt, tau=args.tau)
    runner.emit_json("ansatz.json", result.ansatz.to_dict())
    runner.emit_csv("history.csv", ["iter", "cost", "best_cost"],
                    [(it, c, b) for it, c, b in result.history])
    runner.extra["best_cost"] = result.best_cost
    runner.finish(converged=result.converged)
    return EXIT_OK


def _cmd_marcus(args, runner: Runner) -> int:
    config = marcus_config_from_dict(_load_json(args.config))
    steps = args.steps if args.steps is not None else int(round(100.0 / config.tau))
    trace = simulate(config, steps)
    runner.emit_csv("trace.csv", ["t", "p0", "norm"],
                    list(zip(trace.times.tolist(), trace.p0_values.tolist(),
                             trace.norm_values.tolist())))
    rate = extract_rate(trace, t_max=args.t_max)
    runner.extra["rate"] = {"k": rate.k, "residual": rate.residual,
                            "fit_window": list(rate.fit_window)}
    runner.finish()
    return EXIT_OK


def _cmd_rate_scan(args, runner: Runner) -> int:
    data = _load_json(args.config)
    config = marcus_config_from_dict(_require(data, "marcus", dict, "config"), "config.marcus")
    dgs = [float(v) for v in _require(data, "dG_values", list, "config")]
    modes = []
    for m in data.get("modes", ["explicit"]):
        if m == "explicit":
            modes.append(EXPLICIT)
        elif m == "compressed":
            sub = data.get("compressed", {})
            modes.append(CompressedMode(
                l_kinetic=int(sub.get("l_kinetic", 4)),
                l_potential=int(sub.get("l_potential", 6)),
                topology=sub.get("topology", "linear")))
        else:
            raise ConfigError(f"config: unknown mode {m!r}")
    taus = [float(t) for t in data.get("tau_values", [config.tau])]
    opt = OptimizerConfig(seed=int(data.get("seed", args.seed)),
                          max_iters=int(data.get("compress_iters", 1500)),
                          cost_tolerance=float(data.get("compress_tolerance", 1e-4)))
    rows = rate_scan(config, dgs, modes=modes, tau_values=taus,
                     t_max=args.t_max, workers=args.workers, opt=opt)
    runner.emit_csv("scan.csv", ["dG", "k", "residual", "mode", "tau"],
                    [(r.dG, r.k, r.residual, r.mode, r.tau) for r in rows])
    runner.finish()
    return EXIT_OK


def _cmd_rates_theory(args, runner: Runner) -> int:
    dgs = np.arange(args.dG_min, args.dG_max + args.dG_step / 2, args.dG_step)
    params = MarcusRateParams(v_coup_sq=args.v_coup_sq, lam=args.reorg, kT=args.kT)
    marcus_ks = [marcus_rate_theory(params, -dg) for dg in dgs]  # dG here is driving force
    config = marcus_config_from_dict(_load_json(args.config)) if args.config else MarcusConfig()
    fc_ks = fc_rate_curve(config, dgs)
    runner.emit_csv("theory.csv", ["dG", "k_marcus", "k_fc"],
                    list(zip(dgs.tolist(), marcus_ks, fc_ks.tolist())))
    runner.finish()
    return EXIT_OK


def _cmd_count(args, runner: Runner) -> int:
    rows = census_table()
    out = []
    for r in rows:
        out.append((r.n, r.operator, r.l, r.zz_comp, r.zz_comp_published,
                    r.rz_comp, r.rz_comp_published,
                    r.toffoli_comp if r.toffoli_comp is not None else "",
                    r.toffoli_comp_published if r.toffoli_comp_published is not None else "",
                    r.zz_ex_published, r.zz_ex_convention, r.zz_ex_reduced,
                    r.max_locality, ";".join(r.mismatches)))
    runner.emit_csv(
        "census.csv",
        ["n", "op", "l", "zz_comp", "zz_comp_published", "rz_comp", "rz_comp_published",
         "toffoli_comp", "toffoli_comp_published", "zz_ex_published", "zz_ex_convention",
         "zz_ex_reduced", "max_locality", "mismatch"],
        out)
    runner.extra["total_qubits_n8_p3"] = total_qubits(8, 3)
    runner.finish()
    return EXIT_OK


def _cmd_init_wavepacket(args, runner: Runner) -> int:
    grid = GridSpec(args.n, args.L)
    xs = positions(grid)
    psi = np.exp(-math.sqrt(2.0 * args.a) * (xs - args.c) ** 2 / 2.0)
    psi /= np.linalg.norm(psi)
    opt = OptimizerConfig(seed=args.seed, max_iters=args.max_iters,
                          learning_rate=0.1, cost_tolerance=args.cost_tolerance)
    params, fidelity = fit_wavepacket(psi, args.layers, opt)
    runner.emit_json("wavepacket.json", {
        "n": args.n, "L": args.L, "a": args.a, "c": args.c,
        "layers": args.layers, "seed": args.seed,
        "thetas": list(params.thetas), "fidelity": fidelity,
    })
    runner.finish()
    return EXIT_OK


def _cmd_fastforward_check(args, runner: Runner) -> int:
    """Noiseless fast-forwarding of the exactly-compressed free-particle step:
    fidelity of W D(N theta) W^dag against the dense N-step propagator."""
    grid = GridSpec(args.n, args.L)
    masks = admitted_masks(args.n, args.n, "linear")
    phase = -args.tau * momenta(grid) ** 2 / (2.0 * args.mu)
    thetas = exact_thetas_for_phase(phase, masks)
    ansatz = VffAnsatz(args.n, 1, (0.0,) * gamma_count(args.n), tuple(thetas),
                       args.tau, args.n, "linear")
    xs = positions(grid)
    psi = np.exp(-((xs - grid.L / 2) ** 2) / (2.0 * (grid.L / 8) ** 2)).astype(complex)
    psi /= np.linalg.norm(psi)
    cmat = centered_dft_matrix(args.n)
    rows = []
    from .vff import fast_forward
    for steps in range(args.steps + 1):
        momentum_state = StateVector(args.n, cmat @ psi)
        evolved = apply_circuit(momentum_state, fast_forward(ansatz, steps))
        got = cmat.conj().T @ evolved.amplitudes
        want = cmat.conj().T @ (np.exp(1j * steps * phase) * (cmat @ psi))
        fidelity = float(abs(np.vdot(want, got)) ** 2)
        rows.append((steps, fidelity))
    runner.emit_csv("fastforward.csv", ["N", "fidelity"], rows)
    runner.finish()
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walshpress",
                                     description="Variational compression and Marcus dynamics experiments")
    parser.add_argument("--output-dir", default=None,
                        help="artifact directory (default: WALSHPRESS_OUTPUT_DIR or cwd)")
    parser.add_argument("--manifest-only", action="store_true",
                        help="validate config and write only the manifest")
    # the same flags are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering a value given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=argparse.SUPPRESS)
    common.add_argument("--manifest-only", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=lambda **kw: argparse.ArgumentParser(
                                    parents=[common], **kw))

    p = sub.add_parser("compress", help="variationally compress a diagonal target")
    p.add_argument("--target", required=True,
                   help="kinetic | v0 | v1 | path to a diagonal JSON file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--topology", choices=["linear", "ring"], default="linear")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=1500)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=0.05)
    p.add_argument("--cost-tolerance", dest="cost_tolerance", type=float, default=1e-6)
    p.add_argument("--L", type=float, default=20.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--A1", type=float, default=0.015)
    p.add_argument("--A0", type=float, default=1.5)
    p.add_argument("--dG", type=float, default=0.0)
    p.add_argument("--layers-w", dest="layers_w", type=int, default=1)

    p = sub.add_parser("marcus", help="run one dynamics trace")
    p.add_argument("--config", required=True)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--t-max", dest="t_max", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("rate-scan", help="rates over a driving-force grid")
    p.add_argument("--config", required=True)
    p.add_argument("--t-max", dest="t_max", type=float, default=100.0)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("rates-theory", help="Marcus and Franck-Condon theory curves")
    p.add_argument("--v-coup-sq", dest="v_coup_sq", type=float, default=1e-4)
    p.add_argument("--reorg", type=float, default=0.135)
    p.add_argument("--kT", type=float, default=0.01)
    p.add_argument("--dG-min", dest="dG_min", type=float, default=0.0)
    p.add_argument("--dG-max", dest="dG_max", type=float, default=0.3)
    p.add_argument("--dG-step", dest="dG_step", type=float, default=0.05)
    p.add_argument("--config", default=None, help="marcus config JSON for the FC curve")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("count", help="gate censuses and the published-table comparison")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("init-wavepacket", help="fit the UCC initialization ansatz")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", type=float, default=20.0)
    p.add_argument("--a", type=float, required=True, help="well curvature")
    p.add_argument("--c", type=float, required=True, help="well center")
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=1000)
    p.add_argument("--cost-tolerance", dest="cost_tolerance", type=float, default=5e-4)

    p = sub.add_parser("fastforward-check", help="noiseless fast-forward fidelity trace")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--L", type=float, default=20.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)

    return parser


_HANDLERS = {
    "compress": _cmd_compress,
    "marcus": _cmd_marcus,
    "rate-scan": _cmd_rate_scan,
    "rates-theory": _cmd_rates_theory,
    "count": _cmd_count,
    "init-wavepacket": _cmd_init_wavepacket,
    "fastforward-check": _cmd_fastforward_check,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    output_dir = args.output_dir or os.environ.get("WALSHPRESS_OUTPUT_DIR") or os.getcwd()
    payload = {k: v for k, v in sorted(vars(args).items())
               if k not in ("output_dir", "manifest_only")}
    runner = Runner(args.command, payload, output_dir, args.manifest_only)
    try:
        if args.manifest_only:
            if args.command in ("marcus", "rate-scan") and args.config:
                data = _load_json(args.config)
                if args.command == "marcus":
                    marcus_config_from_dict(data)
                else:
                    marcus_config_from_dict(_require(data, "marcus", dict, "config"), "config.marcus")
            runner.finish()
            return EXIT_OK
        return _HANDLERS[args.command](args, runner)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericIntegrityError as exc:
        print(f"numeric integrity error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
