"""Batch experiment runner.

    paulialg lanczos --model quantum_ising --n 8 --param h_x=0.5 \
        --initial ising_energy --steps 10 --trim 20 --out b.csv --verify

Modes: ``evolve`` (autocorrelation), ``twopoint`` (Z-Z profile),
``lanczos`` (coefficients) and ``visualize`` (per-step operator dump).
Settings come from ``--config file.json`` with command-line flags layered
on top.  Every run with ``--out`` also writes ``<out>.manifest.json``.

Exit codes: 0 ok, 1 configuration error, 2 runtime abort (memory cap hit
or a ``--verify`` cross-check failed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import oracle
from .dynamics import EvolveConfig, evolve_autocorrelation, evolve_two_point
from .krylov import format_dump, lanczos
from .models import build_model, initial_operator, model_boundary
from .operator import Operator, TrimPolicy
from .symmetric import NotTranslationInvariant, from_operator

log = logging.getLogger("paulialg")

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2
MODES = ("evolve", "twopoint", "lanczos", "visualize")
# v, w, coefficient plus room for the temporaries of a product
BYTES_PER_TERM = 64
VERIFY_TOL = 1e-6


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    mode: Optional[str] = None
    model: dict = field(default_factory=dict)
    initial: Optional[str] = None
    trim: Optional[int] = None
    M: Optional[int] = None
    noise: float = 0.0
    dt: float = 0.05
    t_max: float = 5.0
    steps: Optional[int] = None
    site: int = 1
    out: Optional[str] = None
    verify: bool = False
    translation_symmetric: bool = False
    mem_limit_gb: float = 8.0

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @property
    def max_strings(self) -> Optional[int]:
        if self.trim is not None:
            return 2 ** int(self.trim)
        return self.M

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.model:
            raise ConfigError("no model given")
        if self.trim is not None and self.M is not None and 2 ** self.trim != self.M:
            raise ConfigError("trim and M disagree")
        if self.max_strings is not None and self.max_strings < 1:
            raise ConfigError("M must be >= 1")
        if self.noise < 0:
            raise ConfigError("noise must be >= 0")
        if self.dt <= 0 or self.t_max < 0 or self.steps < 1:
            raise ConfigError("need dt > 0, t_max >= 0, steps >= 1")
        if self.translation_symmetric and self.mode == "twopoint":
            raise ConfigError("twopoint evolves Z_j, which is not translation symmetric")


def _visualize_defaults(cfg: ExperimentConfig) -> None:
    if not cfg.model:
        cfg.model = {"model": "xx", "N": 10, "extra_terms": [[1.0, "X", 4]]}
    if cfg.initial is None:
        cfg.initial = "X1"


def _fmt(x: float) -> str:
    return repr(float(x))


class _Guard:
    """Tracks peak term count and enforces the memory cap."""

    def __init__(self, limit_gb: float):
        self.limit = limit_gb * 1e9
        self.peak = 0
        self.breached = False

    def __call__(self, step, op) -> bool:
        self.peak = max(self.peak, len(op))
        if len(op) * BYTES_PER_TERM > self.limit:
            log.error("memory cap reached at step %d (%d strings)", step, len(op))
            self.breached = True
            return False
        return True


def _setup(cfg: ExperimentConfig):
    H = build_model(cfg.model)
    name = cfg.initial or ("Z%d" % cfg.site)
    O0 = initial_operator(name, H.n, model_boundary(cfg.model))
    if cfg.translation_symmetric:
        try:
            H, O0 = from_operator(H), from_operator(O0)
        except NotTranslationInvariant as exc:
            raise ConfigError(f"--translation-symmetric rejected: {exc}") from exc
    return H, O0


def _full(op) -> Operator:
    return op if isinstance(op, Operator) else op.to_operator()


def _verify_lanczos(H, O0, b, steps) -> dict:
    if H.n > oracle.MAX_LANCZOS_SITES:
        return {"status": "skipped", "reason": f"n > {oracle.MAX_LANCZOS_SITES}"}
    ref = oracle.dense_lanczos(_full(H), _full(O0), steps)
    k = min(len(ref), len(b))
    err = float(np.max(np.abs(ref[:k] - b[:k]))) if k else 0.0
    ok = err <= VERIFY_TOL and len(ref) == len(b)
    return {"status": "pass" if ok else "fail", "max_abs_error": err, "tol": VERIFY_TOL}


def _verify_evolution(H, O0, cfg, trace, two_point: bool) -> dict:
    Hf, Of = _full(H), _full(O0)
    if Hf.n > oracle.MAX_HEISENBERG_SITES:
        return {"status": "skipped", "reason": f"n > {oracle.MAX_HEISENBERG_SITES}"}
    steps = len(trace.times) - 1
    mats = oracle.dense_noisy_evolution(Hf, Of, cfg.dt, steps, cfg.epsilon * cfg.dt)
    dim = 2 ** Hf.n
    if two_point:
        zs = [oracle.to_dense(initial_operator(f"Z{i}", Hf.n)) for i in trace.sites]
        ref = np.array([[np.trace(M @ Z) / dim for Z in zs] for M in mats])
        got = trace.profile
    else:
        O0d = oracle.to_dense(Of)
        norm = np.trace(O0d @ O0d)
        ref = np.array([np.trace(M @ O0d.conj().T) / norm for M in mats])
        got = trace.S
    err = float(np.max(np.abs(ref - got)))
    return {"status": "pass" if err <= VERIFY_TOL else "fail", "max_abs_error": err,
            "tol": VERIFY_TOL}


def _evolve_csv(trace, two_point: bool, site: int) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    head = ["t", "S_re", "S_im", "n", "terms", "discarded_norm"]
    if two_point:
        head += [f"S_{i - site}" for i in trace.sites]
    wr.writerow(head)
    for k, t in enumerate(trace.times):
        S = complex(trace.S[k])
        row = [_fmt(t), _fmt(S.real), _fmt(S.imag), _fmt(trace.n_t[k]),
               int(trace.terms[k]), _fmt(trace.discarded[k])]
        if two_point:
            row += [_fmt(complex(x).real) for x in trace.profile[k]]
        wr.writerow(row)
    return buf.getvalue()


def _lanczos_csv(run) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["n", "b_n", "terms_n"])
    for n, b, terms in run.to_csv_rows():
        wr.writerow([n, _fmt(b), terms])
    return buf.getvalue()


def run(cfg: ExperimentConfig, stdout=None) -> int:
    """Execute one experiment; returns the process exit code."""
    stdout = stdout or sys.stdout
    start = time.time()
    if cfg.mode == "visualize":
        _visualize_defaults(cfg)
        if cfg.steps is None:
            cfg.steps = 7
    elif cfg.steps is None:
        cfg.steps = 10
    try:
        cfg.validate()
        H, O0 = _setup(cfg)
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    guard = _Guard(cfg.mem_limit_gb)
    verify = None
    completed = True
    if cfg.mode in ("evolve", "twopoint"):
        ecfg = EvolveConfig(dt=cfg.dt, t_max=cfg.t_max, M=cfg.max_strings, epsilon=cfg.noise)
        two = cfg.mode == "twopoint"
        if two:
            trace = evolve_two_point(H, cfg.site, ecfg, range(1, H.n + 1), on_step=guard)
        else:
            trace = evolve_autocorrelation(H, O0, ecfg, on_step=guard)
        completed = trace.completed
        text = _evolve_csv(trace, two, cfg.site)
        if cfg.verify and completed:
            verify = _verify_evolution(H, O0, ecfg, trace, two)
    else:
        policy = TrimPolicy(M=cfg.max_strings)
        if cfg.mode == "visualize":
            policy.cutoff = 1e-10
        res = lanczos(H, O0, cfg.steps, policy, snapshots=cfg.mode == "visualize",
                      callback=guard)
        completed = res.completed
        if cfg.mode == "visualize":
            text = format_dump(res, cfg.steps)
        else:
            text = _lanczos_csv(res)
        if cfg.verify and completed:
            verify = _verify_lanczos(H, O0, res.b, len(res.b))

    if cfg.out:
        Path(cfg.out).write_text(text)
        manifest = {
            "config": asdict(cfg),
            "wall_time_s": time.time() - start,
            "peak_terms": guard.peak,
            "completed": completed,
            "aborted_reason": "memory cap" if guard.breached else None,
            "verify": verify,
        }
        Path(cfg.out + ".manifest.json").write_text(json.dumps(manifest, indent=1))
    else:
        stdout.write(text)
    if verify is not None:
        print(f"verify: {verify['status']} {verify.get('max_abs_error', '')}", file=sys.stderr)
    if not completed or (verify is not None and verify["status"] == "fail"):
        return EXIT_ABORT
    return EXIT_OK


def _parse_param(text: str) -> tuple[str, float]:
    key, _, val = text.partition("=")
    if not _:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, float(val)


def _parse_extra(text: str) -> list:
    parts = [p.strip() for p in text.split(",")]
    out = []
    for p in parts:
        try:
            out.append(int(p))
        except ValueError:
            try:
                out.append(float(p))
            except ValueError:
                out.append(p)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paulialg", description=__doc__.split("\n\n")[0])
    p.add_argument("mode", nargs="?", choices=MODES)
    p.add_argument("--config", help="JSON experiment file")
    p.add_argument("--sweep", help="JSON list of experiment configs, run on a worker pool")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--model", help="model name, e.g. xx, xxx, quantum_ising, xxz_nnn, xzzx_2d")
    p.add_argument("--n", type=int, help="number of sites (chains)")
    p.add_argument("--lx", type=int)
    p.add_argument("--ly", type=int)
    p.add_argument("--boundary", choices=["open", "periodic"])
    p.add_argument("--param", action="append", type=_parse_param, default=[],
                   help="model parameter key=value (delta, gamma, h_x, J, g)")
    p.add_argument("--extra-term", action="append", type=_parse_extra, default=[],
                   help="extra string 'coeff,X,4[,Z,5...]'")
    p.add_argument("--initial", help="initial operator: sumX, energy_current_xxx, ising_energy, Z1, ...")
    p.add_argument("--site", type=int, help="site j of Z_j for twopoint")
    p.add_argument("--trim", type=int, help="log2 of the maximum string count M")
    p.add_argument("--noise", type=float, help="depolarizing amplitude epsilon")
    p.add_argument("--dt", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--steps", type=int, help="Lanczos steps")
    p.add_argument("--out", help="output path (CSV, or text dump for visualize)")
    p.add_argument("--verify", action="store_true", default=None)
    p.add_argument("--translation-symmetric", action="store_true", default=None)
    p.add_argument("--mem-limit-gb", type=float)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    cfg = ExperimentConfig.from_dict(base)
    model = dict(cfg.model)
    if args.model:
        if "graph" in model:
            raise ConfigError("--model conflicts with a graph model in the config")
        model["model"] = args.model
    if args.n is not None:
        model["N"] = args.n
    if args.lx is not None:
        model["Lx"] = args.lx
    if args.ly is not None:
        model["Ly"] = args.ly
    if args.boundary:
        model["boundary"] = args.boundary
    if args.param:
        model["params"] = {**model.get("params", {}), **dict(args.param)}
    if args.extra_term:
        model["extra_terms"] = model.get("extra_terms", []) + args.extra_term
    cfg.model = model
    overrides = {
        "mode": args.mode, "initial": args.initial, "site": args.site, "trim": args.trim,
        "noise": args.noise, "dt": args.dt, "t_max": args.tmax, "steps": args.steps,
        "out": args.out, "verify": args.verify,
        "translation_symmetric": args.translation_symmetric,
        "mem_limit_gb": args.mem_limit_gb,
    }
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    if args.trim is not None:
        cfg.M = None
    return cfg


def _run_dict(d: dict) -> int:
    try:
        cfg = ExperimentConfig.from_dict(d)
    except (ConfigError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


def run_sweep(path: str, workers: Optional[int] = None) -> int:
    configs = json.loads(Path(path).read_text())
    if not isinstance(configs, list):
        print("error: sweep file must hold a JSON list", file=sys.stderr)
        return EXIT_CONFIG
    outs = [c.get("out") for c in configs]
    if None in outs or len(set(outs)) != len(outs):
        print("error: every sweep entry needs its own 'out'", file=sys.stderr)
        return EXIT_CONFIG
    with ProcessPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(_run_dict, configs))
    return max(codes, default=EXIT_OK)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.sweep:
        if args.mode or args.config:
            parser.error("--sweep cannot be combined with a mode or --config")
        return run_sweep(args.sweep, args.workers)
    try:
        cfg = config_from_args(args)
    except (ConfigError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
