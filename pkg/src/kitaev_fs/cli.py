"""Command-line front end: sweeps, correlation profiles, scaling fits, phase diagram.

Every subcommand resolves its settings into a :class:`RunConfig` (flags, then
the ``KITAEV_FS_OUTDIR`` environment variable for the output directory, then
an optional ``--config`` key=value file, then built-in defaults), validates it
completely, and only then computes.  CSV files start with one ``# config:``
comment line holding the resolved config as JSON; JSON files carry it under
``"config"``.

Exit codes: 0 when everything requested was computed, 1 when some samples or
fits failed (the outputs list them), 2 for an invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import (
    CUT_CONVENTION,
    correlation_length_theory,
    correlation_profile_fast,
    fit_exponential,
    fit_power_law,
)
from .errors import FitError, KitaevError
from .fidelity import fidelity, log_fidelity
from .model import Couplings, EvolutionLine, LineKind, Phase, check_size, gap, phase_of
from .scaling import SweepRecord, collapse, find_peaks, rescale, sweep

OUTDIR_ENV = "KITAEV_FS_OUTDIR"
COMMANDS = ("sweep", "correlate", "scale", "phase-diagram", "fidelity")

DEFAULTS = {
    "sweep": {"line": "jx-eq-jy", "lz": "0.2:0.8:1200", "sizes": "101,303"},
    "correlate": {"line": "jx-eq-jy", "L": "101", "fit": "auto"},
    "scale": {"line": "jx-eq-jy", "lz": "0.46:0.54:2000", "sizes": "201,301,401,501,601,701,801,901",
              "nu_range": "0.6:1.6", "x_max": "1.0"},
    "phase-diagram": {"resolution": "50", "L": "101"},
    "fidelity": {"L": "101"},
}
COMMON_DEFAULTS = {"out": "runs", "threads": "1", "format": "csv"}
EXP_WINDOW = (3, 12)
POWER_WINDOW = (6, 14)


class ConfigError(KitaevError, ValueError):
    def __init__(self, field_name, reason):
        super().__init__(f"invalid {field_name}: {reason}")
        self.field = field_name
        self.reason = reason


@dataclass
class RunConfig:
    command: str
    out: str
    threads: int = 1
    format: str = "csv"
    line: str | None = None
    couplings: list | None = None  # [jx, jy, jz], explicit point or segment start
    end: list | None = None  # segment end
    jz: float | None = None
    sizes: list = field(default_factory=list)
    lam: list | None = None  # [lo, hi, steps]
    fit: str | None = None
    window: list | None = None
    dump_profile: bool = False
    inputs: list = field(default_factory=list)
    nu_range: list | None = None
    x_max: float | None = None
    peak_window: list | None = None
    resolution: int | None = None
    point_b: list | None = None

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    def evolution_line(self):
        if self.line == "segment":
            return EvolutionLine.segment(Couplings(*self.couplings), Couplings(*self.end))
        return EvolutionLine.from_name(self.line)


# ---------------------------------------------------------------- parsing


def _float(name, text):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ConfigError(name, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(name, f"must be finite, got {text!r}")
    return value


def _int(name, text):
    try:
        return int(str(text).strip())
    except ValueError:
        raise ConfigError(name, f"not an integer: {text!r}") from None


def parse_range(name, text, with_steps=True):
    """``lo:hi:steps`` (or ``lo:hi`` when ``with_steps`` is False)."""
    parts = str(text).split(":")
    if len(parts) != (3 if with_steps else 2):
        form = "lo:hi:steps" if with_steps else "lo:hi"
        raise ConfigError(name, f"expected {form}, got {text!r}")
    lo, hi = _float(name, parts[0]), _float(name, parts[1])
    if not lo < hi:
        raise ConfigError(name, f"empty range, lo={lo} is not below hi={hi}")
    if not with_steps:
        return [lo, hi]
    steps = _int(name, parts[2])
    if steps < 2:
        raise ConfigError(name, f"steps must be >= 2, got {steps}")
    return [lo, hi, steps]


def parse_sizes(name, text):
    sizes = []
    for part in str(text).split(","):
        if not part.strip():
            continue
        try:
            sizes.append(check_size(_int(name, part)))
        except KitaevError as exc:
            raise ConfigError(name, str(exc)) from None
    if not sizes:
        raise ConfigError(name, "no sizes given")
    return sizes


def parse_point(name, text):
    try:
        c = Couplings.parse(text, plane=True)
    except KitaevError as exc:
        raise ConfigError(name, str(exc)) from None
    return [c.jx, c.jy, c.jz]


def read_config_file(path):
    """Single-file ``key = value`` config; ``#`` starts a comment.

    Keys are the long flag names, with ``-`` or ``_`` (``x-max`` = ``x_max``);
    values may be quoted.
    """
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        values[key.replace("-", "_")] = value
    return values


def _merge(args, command):
    """Raw string settings: flag > env (out only) > config file > defaults."""
    raw = dict(COMMON_DEFAULTS)
    raw.update(DEFAULTS[command])
    if args.config:
        raw.update(read_config_file(args.config))
    env_out = os.environ.get(OUTDIR_ENV)
    if env_out:
        raw["out"] = env_out
    for key, value in vars(args).items():
        if key in ("command", "config", "handler") or value is None:
            continue
        raw[key] = value
    return raw


def resolve(args) -> RunConfig:
    """Build and validate a RunConfig; raises ConfigError naming the bad field."""
    command = args.command
    raw = _merge(args, command)
    known = set(RunConfig.__dataclass_fields__) | {"lz", "L", "input", "b", "start", "a"}
    unknown = sorted(set(raw) - known - {"config"})
    if unknown:
        raise ConfigError(unknown[0], "unknown setting")

    threads = _int("threads", raw["threads"])
    if threads < 1:
        raise ConfigError("threads", f"must be >= 1, got {threads}")
    out_format = str(raw.get("format", "csv"))
    if out_format != "csv":
        raise ConfigError("format", f"only 'csv' (with JSON summaries) is supported, got {out_format!r}")
    cfg = RunConfig(command=command, out=str(raw["out"]), threads=threads, format=out_format)

    if command in ("sweep", "scale"):
        cfg.line = str(raw["line"])
        if cfg.line == "segment":
            if "start" not in raw or "end" not in raw:
                raise ConfigError("line", "segment sweeps need --start and --end")
            cfg.couplings = parse_point("start", raw["start"])
            cfg.end = parse_point("end", raw["end"])
        elif cfg.line not in (LineKind.JX_EQ_JY.value, LineKind.JZ_THIRD.value):
            raise ConfigError("line", f"expected jx-eq-jy, jz-third or segment, got {cfg.line!r}")
        cfg.sizes = parse_sizes("sizes", raw["sizes"])
        cfg.lam = parse_range("lz", raw["lz"])
        line = cfg.evolution_line()
        for v in cfg.lam[:2]:
            if not line.contains(v):
                lo, hi, _ = line.domain
                raise ConfigError("lz", f"lambda={v} outside the {cfg.line} range ({lo:g}, {hi:g})")
        if raw.get("peak_window"):
            cfg.peak_window = parse_range("peak_window", raw["peak_window"], with_steps=False)

    if command == "scale":
        cfg.inputs = [str(p) for p in (raw.get("input") or [])]
        if isinstance(raw.get("input"), str):
            cfg.inputs = [p.strip() for p in raw["input"].split(",") if p.strip()]
        n_sizes = len(cfg.inputs) if cfg.inputs else len(set(cfg.sizes))
        if n_sizes < 3:
            raise ConfigError("sizes", f"scaling needs at least 3 sizes, got {n_sizes}")
        cfg.nu_range = parse_range("nu_range", raw["nu_range"], with_steps=False)
        cfg.x_max = _float("x_max", raw["x_max"])
        if cfg.x_max <= 0:
            raise ConfigError("x_max", f"must be positive, got {cfg.x_max}")

    if command == "correlate":
        cfg.line = str(raw["line"])
        if raw.get("couplings"):
            cfg.couplings = parse_point("couplings", raw["couplings"])
            cfg.line = None
        else:
            if "jz" not in raw:
                raise ConfigError("jz", "give --jz (on the line) or --couplings")
            cfg.jz = _float("jz", raw["jz"])
            try:
                line = EvolutionLine.from_name(cfg.line)
                point = line.point(cfg.jz)
            except KitaevError as exc:
                raise ConfigError("jz", f"domain error, {exc}") from None
            cfg.couplings = [point.jx, point.jy, point.jz]
        cfg.sizes = parse_sizes("L", raw["L"])
        if len(cfg.sizes) != 1:
            raise ConfigError("L", "correlate takes a single size")
        cfg.fit = str(raw["fit"])
        if cfg.fit not in ("exp", "power", "auto", "none"):
            raise ConfigError("fit", f"expected exp, power, auto or none, got {cfg.fit!r}")
        if raw.get("window"):
            cfg.window = parse_range("window", raw["window"], with_steps=False)
        cfg.dump_profile = str(raw.get("dump_profile", False)).lower() in ("1", "true", "yes")

    if command == "phase-diagram":
        cfg.resolution = _int("resolution", raw["resolution"])
        if cfg.resolution < 2:
            raise ConfigError("resolution", f"must be >= 2, got {cfg.resolution}")
        cfg.sizes = parse_sizes("L", raw["L"])

    if command == "fidelity":
        for key in ("a", "b"):
            if key not in raw:
                raise ConfigError(key, f"--{key} jx,jy,jz is required")
        cfg.couplings = parse_point("a", raw["a"])
        cfg.point_b = parse_point("b", raw["b"])
        cfg.sizes = parse_sizes("L", raw["L"])
    return cfg


# ---------------------------------------------------------------- output


def fmt(x):
    return "%.17g" % x


def _outdir(cfg):
    path = Path(cfg.out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError("out", f"cannot create {path}: {exc.strerror}") from None
    if not os.access(path, os.W_OK):
        raise ConfigError("out", f"{path} is not writable")
    return path


def write_csv(path, cfg, header, rows, **extra):
    """CSV with a leading ``# config: {...}`` JSON line; ``extra`` adds per-file keys."""
    echo = {"config": json.loads(cfg.to_json())}
    echo.update(extra)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config: {json.dumps(echo, sort_keys=True)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_json(path, cfg, payload):
    body = {"config": json.loads(cfg.to_json()), "version": __version__}
    body.update(payload)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj).__name__)


def read_sweep_csv(path):
    """Load a sweep CSV written by ``sweep`` back into a SweepRecord."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    meta = {}
    if lines and lines[0].startswith("# config:"):
        meta = json.loads(lines[0][len("# config:"):])
    body = [ln for ln in lines if not ln.startswith("#")]
    reader = csv.DictReader(body)
    if reader.fieldnames != ["lambda", "chi_f", "chi_f_per_site", "gap"]:
        raise ConfigError("input", f"{path}: not a sweep CSV (header {reader.fieldnames})")
    rows = list(reader)
    lam = np.array([float(r["lambda"]) for r in rows])
    chi = np.array([float(r["chi_f"]) for r in rows])
    gaps = np.array([float(r["gap"]) for r in rows])
    per_site = np.array([float(r["chi_f_per_site"]) for r in rows])
    L = meta.get("L")
    if L is None:
        # hand-made fixtures may omit the echo: N = chi / chi_per_site = 2 L^2
        L = int(round(math.sqrt(float(np.median(chi / per_site)) / 2.0)))
    line_name = meta.get("config", {}).get("line") or "jx-eq-jy"
    line = EvolutionLine.from_name(line_name) if line_name != "segment" else None
    return SweepRecord(line, check_size(L), lam, chi, gaps)


# ---------------------------------------------------------------- commands


def _peak_summary(record, window):
    if len(record) == 0:
        return {"error": "no samples"}
    try:
        ps = find_peaks(record, window)
    except KitaevError as exc:
        return {"error": str(exc)}
    return {
        "lambda_max": ps.lam_max,
        "chi_max": ps.chi_max,
        "chi_max_per_site": ps.chi_max / record.n_sites,
        "interior": ps.interior,
        "n_peaks": ps.count,
        "window": list(ps.window),
    }


def _run_sweeps(cfg):
    line = cfg.evolution_line()
    lo, hi, steps = cfg.lam
    return [sweep(line, lo, hi, steps, L, workers=cfg.threads) for L in cfg.sizes]


def cmd_sweep(cfg):
    out = _outdir(cfg)
    records = _run_sweeps(cfg)
    summary, failures = {}, []
    for rec in records:
        write_csv(
            out / f"sweep_L{rec.L}.csv",
            cfg,
            ["lambda", "chi_f", "chi_f_per_site", "gap"],
            zip(rec.lam, rec.chi, rec.chi_per_site, rec.gap),
            L=rec.L,
        )
        summary[str(rec.L)] = _peak_summary(rec, cfg.peak_window)
        summary[str(rec.L)]["skipped"] = [{"lambda": lam, "reason": why} for lam, why in rec.skipped]
        failures += [f"L={rec.L} lambda={lam!r}: {why}" for lam, why in rec.skipped]
    write_json(out / "sweep_summary.json", cfg, {"peaks": summary, "failures": failures})
    return failures


def cmd_correlate(cfg):
    out = _outdir(cfg)
    c = Couplings(*cfg.couplings)
    L = cfg.sizes[0]
    profile = correlation_profile_fast(c, L)
    r, values = profile.cut()
    write_csv(out / "correlation.csv", cfg, ["r", "C", "abs_C"], zip(r, values, np.abs(values)))
    if cfg.dump_profile:
        half = (L - 1) // 2
        centered = profile.centered()
        rows = []
        for i in range(L):
            for j in range(L):
                if i != half or j != half:
                    rows.append((i - half, j - half, centered[i, j]))
        write_csv(out / "correlation_profile.csv", cfg, ["d1", "d2", "C"], rows)

    phase = phase_of(c)
    kind = cfg.fit
    if kind == "auto":
        kind = "exp" if phase is Phase.A else "power"
    payload = {"couplings": cfg.couplings, "phase": phase.value, "L": L, "cut": CUT_CONVENTION}
    failures = []
    if kind != "none":
        window = tuple(cfg.window) if cfg.window else (EXP_WINDOW if kind == "exp" else POWER_WINDOW)
        try:
            if kind == "exp":
                fit = fit_exponential(r, values, window=window, prefactor_power=None, couplings=c)
                payload["fit"] = {
                    "kind": "exponential",
                    "xi": fit.xi,
                    "xi_stderr": fit.stderr,
                    "inverse_xi": fit.inverse_length,
                    "prefactor_power": fit.prefactor_power,
                }
            else:
                fit = fit_power_law(r, values, window=window, couplings=c)
                payload["fit"] = {"kind": "power", "exponent": fit.exponent, "exponent_stderr": fit.stderr}
            payload["fit"].update(window=list(window), r_used=fit.r_used, rms_residual=fit.residual)
        except FitError as exc:
            payload["fit"] = {"kind": kind, "error": str(exc)}
            failures.append(f"fit: {exc}")
    if abs(c.jx - c.jy) <= 1e-12 and 0.5 < c.jz < 1.0:
        xi = correlation_length_theory(c.jz)
        # C ~ |S|^2, so its decay length is half the fermion-sum length
        payload["theory"] = {"xi_fermion": xi, "xi": xi / 2.0, "inverse_xi": 2.0 / xi}
    write_json(out / "correlation_fit.json", cfg, payload)
    return failures


def cmd_scale(cfg):
    out = _outdir(cfg)
    if cfg.inputs:
        records = [read_sweep_csv(p) for p in cfg.inputs]
    else:
        records = _run_sweeps(cfg)
    if cfg.peak_window:
        records = [rec.restrict(cfg.peak_window) for rec in records]
    failures = [f"L={rec.L} lambda={lam!r}: {why}" for rec in records for lam, why in rec.skipped]
    if len({rec.L for rec in records}) < 3:
        raise ConfigError("sizes", "scaling needs at least 3 distinct sizes")
    try:
        res = collapse(records, nu_range=tuple(cfg.nu_range), x_max=cfg.x_max)
    except FitError as exc:
        scan = getattr(exc, "residual_curve", None)
        write_json(out / "scaling.json", cfg, {"error": str(exc), "residual_scan": scan, "failures": failures})
        failures.append(f"collapse: {exc}")
        return failures
    rows = []
    for rec in records:
        x, y = rescale(rec, res.lam_max[rec.L], res.chi_max[rec.L], res.nu)
        rows += [(rec.L, a, b, lam) for a, b, lam in zip(x, y, rec.lam)]
    write_csv(out / "collapse.csv", cfg, ["L", "x", "y", "lambda"], rows)
    write_json(
        out / "scaling.json",
        cfg,
        {
            "mu": res.mu,
            "mu_stderr": res.mu_stderr,
            "nu": res.nu,
            "nu_stderr": res.nu_stderr,
            "alpha": res.alpha,
            "alpha_stderr": res.alpha_stderr,
            "residual": res.residual,
            "lambda_max": {str(k): v for k, v in res.lam_max.items()},
            "chi_max": {str(k): v for k, v in res.chi_max.items()},
            "residual_scan": res.scan,
            "failures": failures,
        },
    )
    return failures


def barycentric_grid(resolution):
    """Points (i, j, k)/resolution with i + j + k = resolution, jz = 1 - jx - jy."""
    n = resolution
    for i in range(n + 1):
        for j in range(n + 1 - i):
            jx, jy = i / n, j / n
            yield jx, jy, (n - i - j) / n


def cmd_phase_diagram(cfg):
    out = _outdir(cfg)
    L = cfg.sizes[0]
    rows = []
    for jx, jy, jz in barycentric_grid(cfg.resolution):
        c = Couplings(jx, jy, jz)
        rows.append((jx, jy, jz, phase_of(c).value, gap(c, L)))
    write_csv(out / "phase_diagram.csv", cfg, ["jx", "jy", "jz", "phase", "gap"], rows)
    return []


def cmd_fidelity(cfg):
    out = _outdir(cfg)
    a, b = Couplings(*cfg.couplings), Couplings(*cfg.point_b)
    L = cfg.sizes[0]
    lf = log_fidelity(a, b, L)
    payload = {"a": cfg.couplings, "b": cfg.point_b, "L": L, "fidelity": fidelity(a, b, L),
               "log_fidelity": lf if math.isfinite(lf) else None}
    write_json(out / "fidelity.json", cfg, payload)
    print(fmt(payload["fidelity"]))
    return []


HANDLERS = {
    "sweep": cmd_sweep,
    "correlate": cmd_correlate,
    "scale": cmd_scale,
    "phase-diagram": cmd_phase_diagram,
    "fidelity": cmd_fidelity,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file; flags win")
    common.add_argument("--out", help=f"output directory (env {OUTDIR_ENV} overrides the config file)")
    common.add_argument("--threads", help="worker threads (advisory; results do not depend on it)")
    common.add_argument("--format", help="output format (csv)")

    parser = argparse.ArgumentParser(prog="kitaev-fs", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="chi_F and gap along a line")
    p.add_argument("--line", help="jx-eq-jy, jz-third or segment")
    p.add_argument("--lz", "--lam", dest="lz", help="lo:hi:steps")
    p.add_argument("--sizes", help="comma list of odd L")
    p.add_argument("--start", help="segment start jx,jy,jz")
    p.add_argument("--end", help="segment end jx,jy,jz")
    p.add_argument("--peak-window", dest="peak_window", help="lo:hi for the peak summary")

    p = sub.add_parser("correlate", parents=[common], help="C(d) along the diagonal cut, with a decay fit")
    p.add_argument("--line", help="jx-eq-jy or jz-third (with --jz as the line parameter)")
    p.add_argument("--jz", help="line parameter")
    p.add_argument("--couplings", help="explicit jx,jy,jz instead of --line/--jz")
    p.add_argument("-L", dest="L", help="odd linear size")
    p.add_argument("--fit", help="exp, power, auto (by phase) or none")
    p.add_argument("--window", help="fit window rlo:rhi")
    p.add_argument("--dump-profile", dest="dump_profile", action="store_const", const="true",
                   help="also write C(d) for every displacement")

    p = sub.add_parser("scale", parents=[common], help="peak growth and data collapse")
    p.add_argument("--line")
    p.add_argument("--lz", "--lam", dest="lz", help="lo:hi:steps")
    p.add_argument("--sizes", help="comma list of odd L (at least 3)")
    p.add_argument("--input", nargs="+", help="sweep CSVs to analyse instead of sweeping")
    p.add_argument("--nu-range", dest="nu_range", help="lo:hi scan range for nu")
    p.add_argument("--x-max", dest="x_max", help="collapse window |L^nu (lambda - lambda_max)| <= x_max")
    p.add_argument("--peak-window", dest="peak_window", help="lo:hi restriction before peak finding")

    p = sub.add_parser("phase-diagram", parents=[common], help="phase label and gap over the simplex")
    p.add_argument("--resolution", help="barycentric grid divisions (>= 2)")
    p.add_argument("-L", dest="L", help="odd size used for the gap column")

    p = sub.add_parser("fidelity", parents=[common], help="ground-state overlap between two points")
    p.add_argument("--a", help="first point jx,jy,jz")
    p.add_argument("--b", help="second point jx,jy,jz")
    p.add_argument("-L", dest="L", help="odd linear size")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
    except ConfigError as exc:
        print(f"kitaev-fs {args.command}: {exc}", file=sys.stderr)
        return 2
    try:
        failures = HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"kitaev-fs {args.command}: {exc}", file=sys.stderr)
        return 2
    except KitaevError as exc:
        print(f"kitaev-fs {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for item in failures:
        print(f"failed: {item}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
