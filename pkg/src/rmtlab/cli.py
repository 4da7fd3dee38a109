"""Config-driven experiment runner.

Subcommands::

    rmtlab sample    --config FILE [--seed U64] [--workers K] [--out DIR]
    rmtlab density   --config FILE [...]
    rmtlab paircorr  --config FILE [...]
    rmtlab verify    [--config FILE] [--suite NAME] [...]
    rmtlab reproduce [--config FILE] [--figure fig1|fig2] [--scale desk|full] [...]

Config files are a flat key-value text format (a TOML-compatible
subset): one ``key = value`` per line, ``#`` comments, quoted strings,
integers, floats, and true/false.  Every run writes a ``manifest.json``
echoing the resolved config, the pinned RNG algorithm, wall/phase
timings, and a sha256 digest of each emitted file.  Numeric CSV cells
are written with 17 significant digits and LF line endings, so repeat
runs are byte-identical for any worker count.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 runtime/resource error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analytic, ensembles, estimators, sumrules
from .ensembles import EnsembleSpec, FieldClass
from .rng import RNG_ALGORITHM

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

DESK_SAMPLES = 2000
FULL_SAMPLES = 1_000_000
SELF_DUAL_N = 70


class UsageError(ValueError):
    """Bad command line or config file."""


def parse_config(path: str | Path) -> dict:
    """Parse the flat key-value config format."""
    cfg: dict = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.split("#", 1)[0].strip()
        if not key or not value:
            raise UsageError(f"{path}:{lineno}: empty key or value")
        cfg[key] = _parse_value(value, path, lineno)
    return cfg


def _parse_value(token: str, path, lineno: int):
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    low = token.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(token, 0)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError as exc:
        raise UsageError(f"{path}:{lineno}: cannot parse value {token!r}") from exc


def build_spec(cfg: dict) -> EnsembleSpec:
    try:
        family = str(cfg["family"]).lower()
    except KeyError as exc:
        raise UsageError("config is missing 'family'") from exc
    try:
        return EnsembleSpec(
            family=family,
            field=FieldClass(int(cfg.get("beta", 2))),
            N=int(cfg.get("N", 1)),
            n=int(cfg.get("n", 0)),
            M=int(cfg["M"]) if "M" in cfg else None,
            m=int(cfg.get("m", 1)),
            tau=float(cfg.get("tau", 0.0)),
            sigma=float(cfg.get("sigma", 1.0)),
            base_family=str(cfg.get("base_family", ensembles.GINIBRE)).lower(),
            factor_family=str(cfg.get("factor_family", ensembles.GINIBRE)).lower(),
        )
    except ValueError as exc:
        raise UsageError(f"invalid ensemble config: {exc}") from exc


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class RunContext:
    """Collects timings, warnings and output digests for the manifest."""

    def __init__(self, command: str, cfg: dict, out_dir: Path):
        self.command = command
        self.cfg = cfg
        self.out_dir = out_dir
        self.t0 = time.monotonic()
        self.phases: dict[str, float] = {}
        self.outputs: list[Path] = []
        self.warnings: list[str] = []
        self.extra: dict = {}
        self._phase_start = self.t0

    def phase(self, name: str) -> None:
        now = time.monotonic()
        self.phases[name] = round(now - self._phase_start, 6)
        self._phase_start = now

    def emit(self, name: str, header: str, rows) -> Path:
        path = self.out_dir / name
        _write_csv(path, header, rows)
        self.outputs.append(path)
        return path

    def finish(self, incomplete: bool = False) -> None:
        manifest = {
            "command": self.command,
            "config": self.cfg,
            "library_version": __version__,
            "rng": {"algorithm": RNG_ALGORITHM, "numpy_version": np.__version__},
            "wall_time_s": round(time.monotonic() - self.t0, 6),
            "phase_times_s": self.phases,
            "outputs": {p.name: _digest(p) for p in self.outputs if p.exists()},
            "warnings": self.warnings,
            "incomplete": incomplete,
        }
        manifest.update(self.extra)
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def __enter__(self) -> "RunContext":
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        # An interrupt still flushes a manifest, marked incomplete.
        if exc_type is KeyboardInterrupt:
            self.finish(incomplete=True)
        return False


def _resolve_workers(args, cfg) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    if "workers" in cfg:
        return max(1, int(cfg["workers"]))
    env = os.environ.get("RMTLAB_WORKERS")
    return max(1, int(env)) if env else 1


def _resolve_seed(args, cfg) -> int:
    if args.seed is not None:
        return args.seed
    return int(cfg.get("seed", 0))


def _sample_phase(spec, cfg, seed, workers, ctx):
    n_samples = int(cfg.get("n_samples", 100))
    clouds = ensembles.sample_clouds(spec, n_samples, seed, workers=workers)
    ctx.phase("sampling")
    return clouds


def _analytic_rho_b(spec: EnsembleSpec) -> float | None:
    if spec.family == ensembles.SELF_DUAL:
        return 1.0 / (4.0 * math.pi * spec.sigma**2)
    if spec.family == ensembles.GINIBRE:
        return 1.0 / math.pi
    return None


def cmd_sample(cfg, seed, workers, out_dir) -> int:
    spec = build_spec(cfg)
    ctx = RunContext("sample", {**cfg, "seed": seed, "workers": workers}, out_dir)
    with ctx:
        clouds = _sample_phase(spec, cfg, seed, workers, ctx)
        rows = []
        for sid, cloud in enumerate(clouds):
            for j, z in enumerate(cloud.points):
                is_real = 1 if (spec.beta == 1 and j < cloud.n_real) else 0
                rows.append((str(sid), _fmt(z.real), _fmt(z.imag), str(is_real)))
        ctx.emit("eigs.csv", "sample_id,re,im,is_real", rows)
        ctx.phase("write")
        ctx.finish()
        return EXIT_OK


def _density_edges(spec, cfg, frame) -> np.ndarray:
    bins = int(cfg.get("bins", 60))
    radius = ensembles.spectral_radius(spec)
    if frame == estimators.RAW:
        r_max = float(cfg.get("r_max", 1.1 * radius if radius else 1.0))
        return np.linspace(0.0, r_max, bins + 1)
    if frame == estimators.UNIT:
        return np.linspace(0.0, float(cfg.get("r_max", 1.1)), bins + 1)
    if radius is None:
        raise UsageError("edge_shifted frame needs a bounded-support family")
    lo = float(cfg.get("u_min", -radius))
    hi = float(cfg.get("u_max", 3.0))
    return np.linspace(lo, hi, bins + 1)


def cmd_density(cfg, seed, workers, out_dir, frame=None) -> int:
    spec = build_spec(cfg)
    frame = frame or str(cfg.get("frame", "raw"))
    if frame not in estimators.FRAMES:
        raise UsageError(f"unknown frame {frame!r}")
    ctx = RunContext("density", {**cfg, "seed": seed, "workers": workers, "frame": frame}, out_dir)
    with ctx:
        clouds = _sample_phase(spec, cfg, seed, workers, ctx)
        edges = _density_edges(spec, cfg, frame)
        est = estimators.radial_density(clouds, edges, frame=frame)
        ctx.phase("estimate")
        rows = [
            (_fmt(lo), _fmt(hi), _fmt(d), _fmt(se) if np.isfinite(se) else "nan")
            for lo, hi, d, se in zip(edges[:-1], edges[1:], est.density, est.stderr)
        ]
        ctx.emit("density.csv", "r_lo,r_hi,density,stderr", rows)
        if frame == estimators.EDGE_SHIFTED:
            ctx.extra["origin_shift"] = est.shift
        model = analytic.model_for_spec(spec, frame=frame)
        if model is not None and model.kind != analytic.ELLIPSE:
            centers = est.centers
            vals = model.evaluate(centers.astype(complex))
            ctx.emit(
                "density_model.csv", "r,model",
                [(_fmt(r), _fmt(v)) for r, v in zip(centers, vals)],
            )
            ctx.extra["model_kind"] = model.kind
        ctx.phase("write")
        ctx.finish()
        return EXIT_OK


def cmd_paircorr(cfg, seed, workers, out_dir) -> int:
    spec = build_spec(cfg)
    ctx = RunContext("paircorr", {**cfg, "seed": seed, "workers": workers}, out_dir)
    with ctx:
        clouds = _sample_phase(spec, cfg, seed, workers, ctx)
        rho_b = float(cfg["rho_b"]) if "rho_b" in cfg else _analytic_rho_b(spec)
        window = float(cfg.get("window_fraction", 0.5))
        if rho_b is None:
            probe = estimators.pair_correlation_isotropic(
                clouds, np.linspace(0.0, 1.0, 3), window_radius_fraction=window
            )
            rho_b = probe.rho_b
        scale = 1.0 / math.sqrt(math.pi * rho_b)
        bins = int(cfg.get("bins", 60))
        r_max = float(cfg.get("r_max", 6.0 * scale))
        edges = np.linspace(0.0, r_max, bins + 1)
        est = estimators.pair_correlation_isotropic(
            clouds, edges, window_radius_fraction=window, rho_b=rho_b,
            profile_correction=bool(cfg.get("profile_correction", False)),
        )
        if est.low_power:
            ctx.warnings.append("fewer than 10^4 pairs accumulated; estimate is underpowered")
        bandwidth = float(cfg.get("bandwidth", 0.15 * scale))
        curve = estimators.smooth(est, bandwidth)
        ctx.phase("estimate")
        rows = [
            (_fmt(lo), _fmt(hi), _fmt(v), _fmt(v / rho_b**2), _fmt(se) if np.isfinite(se) else "nan")
            for lo, hi, v, se in zip(edges[:-1], edges[1:], est.rho2T, est.stderr)
        ]
        ctx.emit("paircorr.csv", "r_lo,r_hi,rho2T,rho2T_over_rhob2,stderr", rows)
        ctx.emit(
            "paircorr_smooth.csv", "r,value",
            [(_fmt(x), _fmt(y)) for x, y in zip(curve.x, curve.y)],
        )
        ctx.extra["rho_b"] = rho_b
        ctx.extra["window"] = est.window
        ctx.phase("write")
        ctx.finish()
        return EXIT_OK


def cmd_verify(cfg, out_dir, suite: str | None) -> int:
    suite = suite or str(cfg.get("suite", "all"))
    beta = float(cfg.get("beta", 2))
    if suite not in sumrules.SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {sumrules.SUITES}")
    ctx = RunContext("verify", {**cfg, "suite": suite, "beta": beta}, out_dir)
    with ctx:
        reports = sumrules.run_suite(suite, beta=beta)
        ctx.phase("verify")
        path = out_dir / "verify.json"
        path.write_text(
            json.dumps([r.to_dict() for r in reports], indent=2) + "\n", encoding="utf-8"
        )
        ctx.outputs.append(path)
        n_skipped = sum(r.skipped for r in reports)
        if n_skipped:
            ctx.warnings.append(f"{n_skipped} rules skipped (no closed form at beta={beta:g})")
        all_pass = all(r.passed for r in reports)
        ctx.extra["all_pass"] = all_pass
        ctx.finish()
        for r in reports:
            status = "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL")
            print(f"{status} {r.rule_id} expected={r.expected:.9g} computed={r.computed:.9g}")
        return EXIT_OK if all_pass else EXIT_VERIFY_FAILED


def cmd_reproduce(cfg, seed, workers, out_dir, figure: str | None, scale: str | None) -> int:
    figure = figure or str(cfg.get("figure", "fig1"))
    scale = scale or str(cfg.get("scale", "desk"))
    if figure not in ("fig1", "fig2"):
        raise UsageError("figure must be fig1 or fig2")
    if scale not in ("desk", "full"):
        raise UsageError("scale must be desk or full")
    n_samples = DESK_SAMPLES if scale == "desk" else FULL_SAMPLES
    n_samples = int(cfg.get("n_samples", n_samples))
    sigma = float(cfg.get("sigma", 1.0 / math.sqrt(2.0)))
    run_cfg = {
        "family": ensembles.SELF_DUAL,
        "beta": 4,
        "N": int(cfg.get("N", SELF_DUAL_N)),
        "sigma": sigma,
        "n_samples": n_samples,
        "seed": seed,
        "workers": workers,
        "figure": figure,
        "scale": scale,
        # The edge overshoot reaches across the window at this size;
        # subtract the measured one-point background instead of rho_b^2.
        "profile_correction": bool(cfg.get("profile_correction", True)),
    }
    if scale == "full":
        print(
            "warning: full scale draws 10^6 matrices; expect hours of runtime",
            file=sys.stderr,
        )
    if figure == "fig1":
        return cmd_paircorr(run_cfg, seed, workers, out_dir)
    run_cfg["frame"] = "edge_shifted"
    spec = build_spec(run_cfg)
    ctx = RunContext("reproduce", run_cfg, out_dir)
    with ctx:
        clouds = _sample_phase(spec, run_cfg, seed, workers, ctx)
        edges = _density_edges(spec, run_cfg, estimators.EDGE_SHIFTED)
        est = estimators.radial_density(clouds, edges, frame=estimators.EDGE_SHIFTED)
        ctx.phase("estimate")
        rows = [
            (_fmt(lo), _fmt(hi), _fmt(d), _fmt(se) if np.isfinite(se) else "nan")
            for lo, hi, d, se in zip(edges[:-1], edges[1:], est.density, est.stderr)
        ]
        ctx.emit("density.csv", "r_lo,r_hi,density,stderr", rows)
        ctx.extra["origin_shift"] = est.shift
        ctx.extra["rho_b"] = 1.0 / (4.0 * math.pi * sigma**2)
        ctx.extra["max_pair_gap"] = max(c.max_pair_gap for c in clouds)
        ctx.phase("write")
        ctx.finish()
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmtlab",
        description="Sample non-Hermitian matrix ensembles and verify their plasma statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sample", "density", "paircorr", "verify", "reproduce"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", type=str, default=".")
        if name == "density":
            p.add_argument("--frame", type=str, default=None,
                           choices=list(estimators.FRAMES))
        if name == "verify":
            p.add_argument("--suite", type=str, default=None,
                           choices=list(sumrules.SUITES))
        if name == "reproduce":
            p.add_argument("--figure", type=str, default=None, choices=["fig1", "fig2"])
            p.add_argument("--scale", type=str, default=None, choices=["desk", "full"])
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = parse_config(args.config) if args.config else {}
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        seed = _resolve_seed(args, cfg)
        workers = _resolve_workers(args, cfg)
        if args.command == "sample":
            return cmd_sample(cfg, seed, workers, out_dir)
        if args.command == "density":
            return cmd_density(cfg, seed, workers, out_dir, frame=args.frame)
        if args.command == "paircorr":
            return cmd_paircorr(cfg, seed, workers, out_dir)
        if args.command == "verify":
            return cmd_verify(cfg, out_dir, args.suite)
        if args.command == "reproduce":
            return cmd_reproduce(cfg, seed, workers, out_dir, args.figure, args.scale)
        raise UsageError(f"unknown command {args.command!r}")
    except (UsageError, ensembles.ParameterError, ensembles.DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ensembles.SamplingError, ensembles.SolverError, ensembles.PairingError,
            sumrules.BudgetError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        print("interrupted; partial manifest flushed", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
