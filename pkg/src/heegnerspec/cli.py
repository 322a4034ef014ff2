"""Batch command-line front end: subcommands, report emission and cache admin."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import spectral
from .analysis import (
    dt_da,
    interleave_check,
    pair_correlation_fraction,
    pair_correlation_report,
    spacing_corollary_scan,
    track_constant_term_zero,
)
from .eisenstein import (
    eisenstein_direct_sum,
    eisenstein_value,
    maass_selberg_norm,
    truncated_eisenstein,
)
from .errors import DomainError, HeegnerSpecError
from .heegner import ThetaCombination, class_number, heegner_set, reduced_forms, theta_coefficient
from .specialfns import (
    BRANCH_FILE,
    PhaseBranch,
    default_branch,
    default_cache_dir,
    dirichlet_l,
    is_fundamental_discriminant,
    scattering_c,
    xi_completed,
)
from .spectral import (
    QuadratureSpec,
    determinant_FG,
    eta_u_quad,
    kernel_pairing,
    theta_u_online_limit,
    theta_v_quad,
    j_online,
)
from .zeros import (
    ZeroRecord,
    constant_term_phase,
    constant_term_zeros,
    eigenvalue_parameters,
    records_to_csv,
    theta_line_zeros,
    zeta_zeros,
)

__all__ = ["RunConfig", "run", "emit_report", "cache_admin", "selfcheck", "main"]

COMMANDS = (
    "selfcheck", "ct-zeros", "theta-zeros", "zeta-zeros", "eigen", "interleave",
    "determinant", "pair-corr", "spacing-scan", "cache",
)
EXIT_OK, EXIT_INVARIANT, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4


class ConfigError(HeegnerSpecError):
    """Invalid command-line configuration."""


@dataclass
class RunConfig:
    command: str
    disc: list[str] = field(default_factory=lambda: ["-7"])
    a: float = 2.0
    window: tuple[float, float] = (15.0, 40.0)
    t_max: float = 400.0
    delta: float = 0.05
    w: complex = complex(0.6, 8.0)
    beta: float = 0.5
    out: str | None = None
    format: str = "json"
    cache_dir: str | None = None
    action: str = "status"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        lo, hi = self.window
        if not 0 < lo < hi:
            raise ConfigError("window needs 0 < LO < HI")
        if self.a <= 1:
            raise ConfigError("--a must exceed 1")
        if self.format not in ("json", "csv"):
            raise ConfigError("--format is json or csv")
        if self.out is not None and self.out != "-":
            parent = Path(self.out).resolve().parent
            if not parent.is_dir():
                raise ConfigError(f"output directory {parent} does not exist")

    def theta(self) -> ThetaCombination:
        try:
            return ThetaCombination.parse(self.disc, unit_correction=True)
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"bad --disc: {exc}") from exc

    def quadrature(self) -> QuadratureSpec:
        try:
            return QuadratureSpec(t_max=self.t_max, delta=self.delta)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _round(obj):
    """Floats to 15 significant digits, complex to [re, im], tuples to lists."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if not math.isfinite(x) else float(f"{x:.15g}")
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(obj.real), _round(obj.imag)]
    if isinstance(obj, ZeroRecord):
        return _round(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _rows_to_csv(rows: list[dict]) -> str:
    keys: list[str] = []
    for row in rows:
        for k in row:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(keys)
    for row in rows:
        cells = []
        for k in keys:
            v = _round(row.get(k))
            cells.append("" if v is None else (f"{v:.15g}" if isinstance(v, float) else json.dumps(v) if isinstance(v, list) else v))
        writer.writerow(cells)
    return buf.getvalue()


def emit_report(results, fmt: str = "json", out=None, empty_ok: bool = False) -> str:
    """Serialise ``results`` and write them to ``out`` (a path, "-" or None for
    stdout).  A list of ZeroRecord or of flat dicts gives one CSV row each; a
    dict gives a JSON object, or under CSV its ``rows`` entry (key/value rows
    if it has none)."""
    if not empty_ok and (results is None or (hasattr(results, "__len__") and len(results) == 0)):
        raise DomainError("empty report (pass empty_ok=True to allow)")
    if fmt == "json":
        text = json.dumps(_round(results), indent=2) + "\n"
    elif fmt == "csv":
        if isinstance(results, list) and all(isinstance(r, ZeroRecord) for r in results):
            text = records_to_csv(results)
        elif isinstance(results, list):
            text = _rows_to_csv(results)
        elif isinstance(results, dict) and "rows" in results:
            text = _rows_to_csv(results["rows"])
        else:
            text = _rows_to_csv([{"key": k, "value": v} for k, v in results.items()])
    else:
        raise DomainError(f"unknown format {fmt!r}")
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    return text


# ---------------------------------------------------------------------------
# Cache administration
# ---------------------------------------------------------------------------


def _cache_files(directory: Path) -> list[Path]:
    if not directory.is_dir():
        return []
    return sorted(p for p in directory.iterdir() if p.name == BRANCH_FILE or (p.name.startswith("thcf_") and p.suffix == ".bin"))


def cache_admin(directory, action: str) -> dict:
    """status: list cache files and validate their headers; clear: remove them;
    warm: build the phase branch to t = 200 and report the anchor count."""
    directory = Path(directory) if directory is not None else default_cache_dir()
    if action == "clear":
        removed = [p.name for p in _cache_files(directory)]
        for name in removed:
            (directory / name).unlink()
        return {"directory": str(directory), "action": "clear", "removed": removed}
    if action == "warm":
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / BRANCH_FILE
        if path.exists():
            PhaseBranch.load(path)  # refuses a corrupt file before anything is overwritten
        default_branch(200.0, cache_dir=directory)
    elif action != "status":
        raise ConfigError(f"unknown cache action {action!r}")
    files = []
    for p in _cache_files(directory):
        if p.name == BRANCH_FILE:
            branch = PhaseBranch.load(p)
            files.append({"file": p.name, "kind": "PSIBR001", "anchors": int(branch.t.size),
                          "t_min": branch.t_min, "t_max": branch.t_max})
        else:
            vals = spectral.load_theta_samples(p)
            files.append({"file": p.name, "kind": "THCF0001", "samples": int(vals.size)})
    anchors = next((f["anchors"] for f in files if f["kind"] == "PSIBR001"), 0)
    return {"directory": str(directory), "action": action, "files": files, "anchor_count": anchors}


# ---------------------------------------------------------------------------
# Invariant suite
# ---------------------------------------------------------------------------


def _rel(x, y):
    return abs(x - y) / max(1.0, abs(y))


def _check_scattering():
    rng = np.random.default_rng(1)
    s = rng.uniform(-1, 2, 100) + 1j * rng.uniform(-50, 50, 100)
    s = s[(np.abs(s - 1) > 0.1) & (np.abs(s) > 0.1) & (np.abs(s - 0.5) > 0.1)]
    r1 = np.max(np.abs(np.asarray(scattering_c(s)) * np.asarray(scattering_c(1 - s)) - 1))
    x1, x2 = np.asarray(xi_completed(s, reflect=False)), np.asarray(xi_completed(1 - s, reflect=False))
    r2 = np.max(np.abs(x1 - x2) / np.maximum(1, np.abs(x1)))
    g, z = np.asarray(scattering_c(s, "gamma")), np.asarray(scattering_c(s, "xi"))
    r3 = np.max(np.abs(g - z) / np.maximum(1, np.abs(g)))
    return r1 < 1e-10 and r2 < 1e-10 and r3 < 1e-9, f"cc-1 {r1:.1e}, xi {r2:.1e}, forms {r3:.1e}"


def _check_psi_monotone():
    br = default_branch(200.0)
    ts = np.linspace(10, 199, 400)
    mn = float(np.min(br.psi_prime(ts)))
    return mn > 0, f"min psi' on [10, 199] = {mn:.4f}"


def _check_l_reflection():
    s = complex(0.3, 7.1)
    worst = max(abs(complex(dirichlet_l(s.conjugate(), d)) - complex(dirichlet_l(s, d)).conjugate()) for d in (-3, -4, -7, -8, 5, 12))
    return worst < 1e-10, f"{worst:.1e}"


def _check_forms():
    worst, distinct = 0.0, True
    for d in range(-500, 0):
        if not is_fundamental_discriminant(d):
            continue
        for f in reduced_forms(d):
            worst = max(worst, f.A - math.sqrt(-d / 3))
        pts = heegner_set(d).points
        distinct &= len(set(pts)) == len(pts)
    return worst <= 1e-12 and distinct, f"max A - sqrt(|d|/3) = {worst:.3f}, distinct points: {distinct}"


def _check_class_number():
    worst = 0.0
    for d in (-3, -4, -7, -8, -15, -23, -47, -71, -163, -231):
        units = {-3: 6, -4: 4}.get(d, 2)
        analytic = units * math.sqrt(-d) * complex(dirichlet_l(1.0, d)).real / (2 * math.pi)
        worst = max(worst, abs(analytic - class_number(d)))
    return worst < 1e-6, f"max |h - analytic| = {worst:.1e}"


def _check_theta_real():
    th = ThetaCombination(((-7, 1.0), (-23, -0.5), (-4, 2.0)), unit_correction=True)
    im = max(abs(complex(theta_coefficient(th, s)).imag) for s in (1.3, 2.5, 4.0))
    return im < 1e-10, f"max |Im| = {im:.1e}"


def _check_eisenstein():
    direct, _ = eisenstein_direct_sum(1j, 2.5, 200)
    fb = complex(eisenstein_value(1j, 2.5))
    norm_ok = _rel(fb, direct) < 1e-6
    im = max(abs(complex(eisenstein_value(complex(x, y), 2.5)).imag) for x, y in heegner_set(-23).points)
    # lattice sum at the moved point against the Fourier expansion at z
    z = complex(0.21, 1.3)
    inv = max(abs(eisenstein_direct_sum(g, 2.5, 600)[0] - complex(eisenstein_value(z, 2.5))) for g in (z + 1, -1 / z))
    s = complex(0.5, 6.0)
    low = complex(0.1, 1.2)
    idem = abs(complex(truncated_eisenstein(low, s, 2.0)) - complex(eisenstein_value(low, s)))
    ok = norm_ok and im < 1e-9 and inv < 1e-7 and idem == 0
    return ok, f"normalisation {_rel(fb, direct):.1e}, Im {im:.1e}, invariance {inv:.1e}, truncation {idem:.1e}"


def _check_maass_selberg():
    zs = constant_term_zeros(2.0, 0.5, 50.0)
    mn = min(maass_selberg_norm(z.t, 2.0) for z in zs)
    return mn > 0, f"min norm over {len(zs)} zeros = {mn:.4f}"


def _check_spectral(q):
    th = ThetaCombination.single(-7)
    w, a = complex(0.75, 3.0), 1.7
    rec = abs(eta_u_quad(th, w, a, q).value - theta_v_quad(th, w, a, q).value)
    one = lambda t: np.ones_like(t, dtype=complex)
    kern = max(abs(kernel_pairing(one, one, 0.0, w1, q).value - 1 / (2 * (2 * w1 - 1)))
               for w1 in (complex(0.7, 2.0), complex(0.9, 11.0)))
    g_res = abs(determinant_FG(th, 2.0, complex(0.52, 8.0), q)[1] - determinant_FG(th, 2.0, complex(0.48, -8.0), q)[1])
    tau = 9.0
    lim = theta_u_online_limit(th, tau, q)
    n = theta_coefficient(th, complex(0.5, -tau)) * theta_coefficient(th, complex(0.5, tau))
    on = max(abs(lim.real - j_online(th, tau, q)), abs(lim.imag + n.real / (4 * tau)))
    ok = rec < 1e-6 and kern < 1e-6 and g_res < 1e-5 and on < 1e-4
    return ok, f"reciprocity {rec:.1e}, kernel {kern:.1e}, G symmetry {g_res:.1e}, on-line {on:.1e}"


def _check_zeros(q):
    br = default_branch(200.0)
    cts = constant_term_zeros(2.0, 10.0, 40.0, br)
    ph = constant_term_phase(np.array([z.t for z in cts]), 2.0, br)
    half = float(np.max(np.abs((ph - math.pi / 2) / math.pi - np.round((ph - math.pi / 2) / math.pi))))
    zz = zeta_zeros(10.0, 60.0)
    zz4 = zeta_zeros(10.0, 60.0, refine=4)
    th = ThetaCombination.single(-7)
    tz, tz4 = theta_line_zeros(th, 10.0, 40.0), theta_line_zeros(th, 10.0, 40.0, refine=4)
    same = len(zz) == len(zz4) and len(tz) == len(tz4)
    incr = all(np.all(np.diff([r.t for r in rs]) > 0) and max(r.residual for r in rs) < 1e-8 for rs in (cts, zz, tz))
    rep = interleave_check(th, 2.0, 15.0, 25.0, q, br)
    ok = half < 1e-10 and same and incr and not rep.violations
    return ok, (f"phase level error {half:.1e}, rescans stable {same}, increasing {incr}, "
                f"interleave violations {len(rep.violations)}")


def _check_analysis():
    f = [pair_correlation_fraction(0, b) for b in (0.1, 0.3, 0.5, 1.0)]
    mono = all(np.diff(f) > 0)
    add = abs(pair_correlation_fraction(0, 0.3) + pair_correlation_fraction(0.3, 0.5) - f[2])
    br = default_branch(200.0)
    worst = 0.0
    for z in constant_term_zeros(2.0, 20.0, 60.0, br)[::6]:
        h = 1e-4
        fd = (track_constant_term_zero(z.t, 2.0, 2.0 + h, br) - track_constant_term_zero(z.t, 2.0, 2.0 - h, br)) / (2 * h)
        worst = max(worst, _rel(fd, dt_da(z.t, 2.0, br)))
    ok = mono and add < 1e-8 and worst < 1e-3
    return ok, f"monotone {mono}, additivity {add:.1e}, dt/da vs tracking {worst:.1e}"


def selfcheck(q: QuadratureSpec | None = None) -> dict:
    """Run the invariant suite of every module; returns per-check results."""
    q = q or QuadratureSpec()
    checks = [
        ("specialfns.scattering", _check_scattering),
        ("specialfns.psi_monotone", _check_psi_monotone),
        ("specialfns.l_reflection", _check_l_reflection),
        ("heegner.reduced_forms", _check_forms),
        ("heegner.class_number_formula", _check_class_number),
        ("heegner.theta_real", _check_theta_real),
        ("eisenstein.values", _check_eisenstein),
        ("eisenstein.maass_selberg_positive", _check_maass_selberg),
        ("spectral.identities", lambda: _check_spectral(q)),
        ("zeros.lists", lambda: _check_zeros(q)),
        ("analysis.statistics", _check_analysis),
    ]
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for name, fn in checks:
            start = time.perf_counter()
            ok, detail = fn()
            results.append({"check": name, "passed": bool(ok), "detail": detail,
                            "seconds": round(time.perf_counter() - start, 2)})
    return {"passed": all(r["passed"] for r in results), "checks": results}


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def _execute(cfg: RunConfig):
    """Run one subcommand; returns (results, empty_ok, failed_invariant)."""
    lo, hi = cfg.window
    if cfg.command == "cache":
        return cache_admin(cfg.cache_dir, cfg.action), True, False
    if cfg.command == "pair-corr":
        return pair_correlation_report(cfg.beta), False, False
    q = cfg.quadrature()
    if cfg.command == "selfcheck":
        rep = selfcheck(q)
        return rep, False, not rep["passed"]
    if cfg.command == "ct-zeros":
        return constant_term_zeros(cfg.a, lo, hi), True, False
    if cfg.command == "zeta-zeros":
        return zeta_zeros(lo, hi), True, False
    theta = cfg.theta()
    if cfg.command == "theta-zeros":
        return theta_line_zeros(theta, lo, hi), True, False
    if cfg.command == "eigen":
        return eigenvalue_parameters(theta, cfg.a, lo, hi, q), True, False
    if cfg.command == "interleave":
        rep = interleave_check(theta, cfg.a, lo, hi, q)
        out = rep.to_dict()
        out["rows"] = [{"t": t, "normalized_gap": g} for t, g in zip(out["zeros"], out["normalized_gaps"] + [None])]
        return out, True, bool(rep.violations)
    if cfg.command == "determinant":
        F, G = determinant_FG(theta, cfg.a, cfg.w, q)
        return {"w": cfg.w, "a": cfg.a, "F": F, "G": G}, False, False
    if cfg.command == "spacing-scan":
        rep = spacing_corollary_scan(theta, lo, hi, q)
        rep["rows"] = [{k: v for k, v in p.items() if k != "j_zeros"} for p in rep["pairs"]]
        return rep, True, bool(rep["violations"])
    raise ConfigError(f"unknown command {cfg.command!r}")


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; errors are reported as JSON on stderr with exit codes
    2 (invariant failure), 3 (numeric failure) or 4 (configuration)."""
    old = (spectral.settings.cache_dir, os.environ.get("HEEGNERSPEC_CACHE"))
    try:
        if cfg.cache_dir is not None:
            spectral.settings.cache_dir = Path(cfg.cache_dir)
            os.environ["HEEGNERSPEC_CACHE"] = str(cfg.cache_dir)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            results, empty_ok, failed = _execute(cfg)
        emit_report(results, cfg.format, cfg.out, empty_ok=empty_ok)
        return EXIT_INVARIANT if failed else EXIT_OK
    except (ConfigError, DomainError) as exc:
        return _fail(exc, EXIT_CONFIG)
    except (HeegnerSpecError, ArithmeticError, OSError) as exc:
        return _fail(exc, EXIT_NUMERIC)
    finally:
        spectral.settings.cache_dir = old[0]
        if old[1] is None:
            os.environ.pop("HEEGNERSPEC_CACHE", None)
        else:
            os.environ["HEEGNERSPEC_CACHE"] = old[1]


def _fail(exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="heegnerspec", description="Spectral numerics for Eisenstein series and Heegner points.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("action", nargs="?", default="status", choices=("status", "clear", "warm"),
                   help="cache action (cache command only)")
    p.add_argument("--disc", action="append", help="discriminant with optional weight, d or d:nu (repeatable)")
    p.add_argument("--a", type=float, default=2.0, help="truncation height")
    p.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"), default=(15.0, 40.0))
    p.add_argument("--tmax", type=float, default=400.0, help="line-integral cut-off T")
    p.add_argument("--delta", type=float, default=0.05, help="minimum distance of w from the critical line")
    p.add_argument("--w", type=_complex, default=complex(0.6, 8.0), help="spectral parameter for determinant")
    p.add_argument("--beta", type=float, default=0.5, help="pair-correlation cut-off")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--cache-dir", default=None)
    return p


def _attach_disc_values(argv: list[str]) -> list[str]:
    # "-23:0.5" is not a negative number to argparse, so bind it to --disc explicitly
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--disc" and i + 1 < len(argv):
            out.append(f"--disc={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    argv = _attach_disc_values(list(sys.argv[1:] if argv is None else argv))
    try:
        ns = build_parser().parse_args(argv)
        cfg = RunConfig(
            command=ns.command, disc=ns.disc or ["-7"], a=ns.a, window=tuple(ns.window),
            t_max=ns.tmax, delta=ns.delta, w=ns.w, beta=ns.beta, out=ns.out,
            format=ns.format, cache_dir=ns.cache_dir, action=ns.action,
        )
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
