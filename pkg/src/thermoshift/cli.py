"""Command-line driver.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence,
4 a computed object failed its own check (KMS condition, orbit relations).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import coe, formats, kms, ruelle, sft
from .errors import NoBracket, NoConvergence, NotAdmissible, NotDecodable, ThermoshiftError
from .locfun import LocallyConstantFunction

log = logging.getLogger("thermoshift")

DEPTH_CAP = 24
KMS_CHECK_TOL = 1e-10


class UsageError(ThermoshiftError, ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = sft.EPS_EIG
    root_tolerance: float = kms.EPS_ROOT
    max_iter: int = sft.MAX_ITER
    depth: int | None = None
    n_max: int | None = None
    format: str | None = None
    output: str | None = None
    parallel: bool = False

    def __post_init__(self):
        for name in ("tolerance", "root_tolerance"):
            v = getattr(self, name)
            if not 0 < v <= 1e-3:
                raise UsageError(f"--{name.replace('_', '-')} must lie in (0, 1e-3]")
        if self.max_iter < 1:
            raise UsageError("--max-iter must be positive")
        if self.depth is not None and not 1 <= self.depth <= depth_cap():
            raise UsageError(f"--depth must lie in 1..{depth_cap()}")
        if self.n_max is not None and self.n_max < 1:
            raise UsageError("--n-max must be positive")


def depth_cap() -> int:
    env = os.environ.get("THERMOSHIFT_MAX_DEPTH")
    return int(env) if env else DEPTH_CAP


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _render(cfg: RunConfig, obj: dict, default: str = "json") -> str:
    fmt = cfg.format or default
    if fmt == "json":
        return formats.dumps(obj)
    if fmt == "text":
        lines = []
        for k, v in sorted(formats.round_floats(obj).items()):
            lines.append(f"{k}: {v}")
        return "\n".join(lines) + "\n"
    raise UsageError(f"format {fmt!r} is not available for this command")


# -- commands ------------------------------------------------------------------


def cmd_entropy(args, cfg: RunConfig) -> int:
    m = formats.read_matrix(args.matrix)
    pd = sft.perron(m, cfg.tolerance, cfg.max_iter)
    _emit(cfg, _render(cfg, {"r": pd.eigenvalue, "log_r": math.log(pd.eigenvalue),
                             "iterations": pd.iterations}, "text"))
    return 0


def cmd_rpf(args, cfg: RunConfig) -> int:
    m = formats.read_matrix(args.matrix)
    phi = formats.read_function(m, args.potential)
    data = ruelle.rpf(phi, cfg.tolerance, cfg.max_iter, depth=cfg.depth)
    _emit(cfg, _render(cfg, data.to_json()))
    return 0


def cmd_kms(args, cfg: RunConfig) -> int:
    m = formats.read_matrix(args.matrix)
    f = formats.read_function(m, args.gauge)
    if args.solve:
        bracket = tuple(args.bracket) if args.bracket else None
        sol = kms.solve_beta(f, bracket, cfg.root_tolerance, cfg.tolerance, cfg.max_iter)
    else:
        if args.beta is None or args.beta <= 1:
            raise UsageError("--beta must exceed 1")
        data = ruelle.rpf(kms.kms_potential(f, args.beta), cfg.tolerance, cfg.max_iter)
        sol = kms.KmsSolution(f, args.beta, data.potential, data.eigenmeasure, data)
    check_depth = cfg.depth if cfg.depth is not None else f.depth + 3
    deviation = kms.kms_condition_check(f, sol.beta, sol.measure, check_depth)
    out = sol.to_json(args.emit_masses)
    out["kms_deviation"] = deviation
    _emit(cfg, _render(cfg, out))
    if deviation > KMS_CHECK_TOL:
        log.warning("KMS condition fails at beta=%s: deviation %.3g", sol.beta, deviation)
        return 4
    return 0


def _sides(args) -> list[int]:
    return [1, 2] if args.side == "both" else [int(args.side)]


def _per_side(cfg: RunConfig, fn, sides):
    if cfg.parallel and len(sides) > 1:
        with ThreadPoolExecutor(max_workers=len(sides)) as pool:
            return list(pool.map(fn, sides))
    return [fn(s) for s in sides]


def cmd_coe(args, cfg: RunConfig) -> int:
    w = formats.read_witness(args.witness)
    action = args.action
    if action == "verify":
        depth = cfg.depth if cfg.depth is not None else 20
        report = coe.verify_equivalence(w, depth)
        _emit(cfg, _render(cfg, {"depth": report.depth, "passed": report.passed,
                                 "violations": [list(v) for v in report.violations]}))
        return 0 if report.passed else 4
    if action == "cocycles":
        _emit(cfg, _render(cfg, {"c1": coe.cocycle(w, 1).to_json(), "c2": coe.cocycle(w, 2).to_json()}))
        return 0
    if action == "scoe":
        _emit(cfg, _render(cfg, coe.is_scoe(w).certificate(w.source)))
        return 0
    if action == "hn-check":
        n_max = cfg.n_max or 15
        devs = {str(n): coe.hn_check(n) for n in range(1, min(n_max, 30) + 1)}
        worst = max(devs.values())
        _emit(cfg, _render(cfg, {"n_max": n_max, "max_deviation": str(worst),
                                 "deviations": {k: str(v) for k, v in devs.items()}}))
        return 0 if worst == 0 else 4
    n_max = cfg.n_max or 20
    sides = _sides(args)
    if action == "entropy-limit":
        seqs = _per_side(cfg, lambda s: coe.entropy_limit_sequence(w, s, n_max), sides)
        fmt = cfg.format or "csv"
        if fmt == "csv":
            header = ["n", "E_n", "entropy_estimate", "r_pow_n_times_E_n"]
            if len(sides) > 1:
                header = ["side"] + header
            rows = [
                ([s] if len(sides) > 1 else []) + [t.n, t.value, t.entropy_estimate, t.scaled]
                for s, seq in zip(sides, seqs)
                for t in seq
            ]
            _emit(cfg, formats.to_csv(header, rows))
        else:
            _emit(cfg, _render(cfg, {str(s): [t._asdict() for t in seq] for s, seq in zip(sides, seqs)}))
        return 0
    if action == "constants":
        results = _per_side(cfg, lambda s: coe.limit_constants(w, s, n_max), sides)
        if (cfg.format or "json") == "csv":
            rows = [[s, n, a] for s, lc in zip(sides, results) for n, a in enumerate(lc.sequence, 1)]
            _emit(cfg, formats.to_csv(["side", "n", "r_pow_n_times_E_n"], rows))
        else:
            _emit(cfg, _render(cfg, {str(s): {"last": lc.last, "oscillation": lc.oscillation,
                                              "sequence": list(lc.sequence)}
                                     for s, lc in zip(sides, results)}))
        return 0
    raise UsageError(f"unknown action {action!r}")


def cmd_zeta(args, cfg: RunConfig) -> int:
    if args.terms < 1:
        raise UsageError("--terms must be at least 1")
    m = formats.read_matrix(args.matrix)
    z = sft.zeta_series(m, args.terms)
    _emit(cfg, _render(cfg, {
        "coefficients": list(z.coefficients),
        "denominator": list(z.denominator),
        "rational": z.rational,
        "periodic_points": list(z.traces),
        "radius": 1.0 / sft.perron(m, cfg.tolerance, cfg.max_iter).eigenvalue,
    }))
    return 0


def example_files() -> dict[str, str]:
    w = coe.golden_example()
    a, b = w.source, w.target
    c1, c2 = coe.cocycle(w, 1), coe.cocycle(w, 2)
    one_a = LocallyConstantFunction(a, 1, (1, 1), "int")
    return {
        "A.txt": formats.matrix_to_text(a),
        "B.txt": formats.matrix_to_text(b),
        "witness.json": formats.dumps(formats.witness_to_json(w)),
        "c1.json": formats.dumps(c1.to_json()),
        "c2.json": formats.dumps(c2.to_json()),
        "one_A.json": formats.dumps(one_a.to_json()),
        "phi_c2_B.json": formats.dumps(((1 - c2) * math.log(2)).to_json()),
        "zero_A.json": formats.dumps(LocallyConstantFunction(a, 1, (0.0, 0.0)).to_json()),
    }


def cmd_example(args, cfg: RunConfig) -> int:
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in example_files().items():
        (out / name).write_text(text)
    _emit(cfg, _render(cfg, {"directory": str(out), "files": sorted(example_files())}, "text"))
    return 0


# -- argument parsing ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=sft.EPS_EIG, help="eigenvalue tolerance")
    common.add_argument("--root-tolerance", type=float, default=kms.EPS_ROOT)
    common.add_argument("--max-iter", type=int, default=sft.MAX_ITER)
    common.add_argument("--depth", type=int, default=None)
    common.add_argument("--n-max", type=int, default=None)
    common.add_argument("--format", choices=["json", "csv", "text"], default=None)
    common.add_argument("--output", default=None, help="write here instead of stdout")
    common.add_argument("--parallel", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="thermoshift",
        description="Thermodynamic formalism on one-sided topological Markov shifts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", parents=[common], help="Perron eigenvalue and entropy")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("rpf", parents=[common], help="Ruelle-Perron-Frobenius eigendata")
    p.add_argument("matrix")
    p.add_argument("potential")
    p.set_defaults(func=cmd_rpf)

    p = sub.add_parser("kms", parents=[common], help="KMS state for a generalized gauge action")
    p.add_argument("matrix")
    p.add_argument("gauge")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--beta", type=float)
    mode.add_argument("--solve", action="store_true")
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--emit-masses", type=int, default=0, metavar="D")
    p.set_defaults(func=cmd_kms)

    p = sub.add_parser("coe", parents=[common], help="orbit equivalence witness analysis")
    p.add_argument("witness")
    p.add_argument("action", choices=["verify", "cocycles", "scoe", "entropy-limit", "constants", "hn-check"])
    p.add_argument("--side", choices=["1", "2", "both"], default="1")
    p.set_defaults(func=cmd_coe)

    p = sub.add_parser("zeta", parents=[common], help="zeta function series and rational form")
    p.add_argument("matrix")
    p.add_argument("--terms", type=int, default=10)
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("example", parents=[common], help="write the worked example's input files")
    p.add_argument("directory")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = RunConfig(
            tolerance=args.tolerance,
            root_tolerance=args.root_tolerance,
            max_iter=args.max_iter,
            depth=args.depth,
            n_max=args.n_max,
            format=args.format,
            output=args.output,
            parallel=args.parallel,
        )
        return args.func(args, cfg)
    except (NoConvergence, NoBracket) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, NotAdmissible, NotDecodable, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
