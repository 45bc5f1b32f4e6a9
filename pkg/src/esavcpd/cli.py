"""Command-line entry point: ``esavcpd {simulate,energy,converge,timing,check}``.

With no options the ``energy``, ``converge`` and ``timing`` commands run the
standard test configuration (x0 = (0, 1, 0.1), v0 = (0.09, 0.05, 0.2),
U = 1/(100 rho), B = (0, 0, rho/eps), C0 = 1).

Exit codes: 0 success, 1 usage, 2 domain/numeric failure, 3 I/O.
"""
import argparse
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .fields import DomainError, FIELDS, make_field
from .harness import (ENERGY_EPS, TIMING_EPS, TIMING_H, run_convergence_study, run_energy_experiment,
                      run_timing_study)
from .integrators import InitError, ParticleState, SchemeId
from .io import IoError, write_report_json, write_trajectory_csv, write_trajectory_json
from .reference import AdaptiveConfig, reference_solve

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("simulate", "energy", "converge", "timing", "check")
VALID_SCHEMES = ", ".join(s.value for s in SchemeId)

DEFAULT_SCHEMES = {
    "energy": tuple(SchemeId),
    "converge": tuple(SchemeId),
    "timing": (SchemeId.S1_SAV, SchemeId.S1_ESAV),
}
DEFAULT_OUT = {
    "simulate": "trajectory.{fmt}",
    "energy": "energy_out",
    "converge": "convergence.json",
    "timing": "timing.json",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    schemes: tuple = ()
    field: str = "experiment"
    eps: tuple = ()
    b: tuple = (0.0, 0.0, 1.0)
    k: float = 1.0
    c0: float = 1.0
    x0: tuple = (0.0, 1.0, 0.1)
    v0: tuple = (0.09, 0.05, 0.2)
    h: tuple = ()
    T: float = 100.0
    t_end: float = 1.0
    k_min: int = 6
    k_max: int = 12
    rtol: float = 1e-12
    atol: float = 1e-12
    repetitions: int = 3
    out: str = ""
    format: str = "csv"

    def metadata(self):
        d = asdict(self)
        d["schemes"] = [s.value for s in self.schemes]
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text, key, n=None):
    try:
        vals = tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise UsageError(f"{key}: expected comma-separated numbers, got {text!r}") from None
    if not vals or (n is not None and len(vals) != n):
        raise UsageError(f"{key}: expected {n or 'one or more'} numbers, got {text!r}")
    return vals


def _schemes(text):
    try:
        return tuple(SchemeId.parse(t) for t in str(text).split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# key -> (converter, RunConfig attribute)
_KEYS = {
    "scheme": (_schemes, "schemes"),
    "field": (str, "field"),
    "eps": (lambda t: _floats(t, "eps"), "eps"),
    "b": (lambda t: _floats(t, "b", 3), "b"),
    "k": (lambda t: _floats(t, "k", 1)[0], "k"),
    "c0": (lambda t: _floats(t, "c0", 1)[0], "c0"),
    "x0": (lambda t: _floats(t, "x0", 3), "x0"),
    "v0": (lambda t: _floats(t, "v0", 3), "v0"),
    "h": (lambda t: _floats(t, "h"), "h"),
    "T": (lambda t: _floats(t, "T", 1)[0], "T"),
    "t_end": (lambda t: _floats(t, "t_end", 1)[0], "t_end"),
    "k_min": (int, "k_min"),
    "k_max": (int, "k_max"),
    "rtol": (lambda t: _floats(t, "rtol", 1)[0], "rtol"),
    "atol": (lambda t: _floats(t, "atol", 1)[0], "atol"),
    "repetitions": (int, "repetitions"),
    "out": (str, "out"),
    "format": (str, "format"),
}


def read_config_file(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read config file {path}: {exc.strerror}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        if key not in _KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def build_parser():
    parser = _Parser(prog="esavcpd", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key=value file; flags override it")
    parser.add_argument("--scheme", help=f"comma-separated list of: {VALID_SCHEMES}")
    parser.add_argument("--field", help=f"one of: {', '.join(sorted(FIELDS))}")
    parser.add_argument("--eps", help="field parameter eps (comma list sweeps)")
    parser.add_argument("--b", help="uniform B for harmonic/uniform fields, a,b,c")
    parser.add_argument("--k", help="harmonic stiffness")
    parser.add_argument("--c0", help="S1-SAV shift constant C0")
    parser.add_argument("--x0", help="initial position a,b,c")
    parser.add_argument("--v0", help="initial velocity a,b,c")
    parser.add_argument("--h", help="step size (comma list for timing)")
    parser.add_argument("--T", dest="T", help="final time for simulate/energy/timing")
    parser.add_argument("--t-end", dest="t_end", help="final time for converge")
    parser.add_argument("--k-min", dest="k_min", help="smallest k in h = 2^-k")
    parser.add_argument("--k-max", dest="k_max", help="largest k in h = 2^-k")
    parser.add_argument("--rtol")
    parser.add_argument("--atol")
    parser.add_argument("--repetitions", help="timing repetitions (>= 3)")
    parser.add_argument("--out", help="output file (directory for energy)")
    parser.add_argument("--format", help="csv or json")
    return parser


def parse_config(argv):
    """Merge defaults, an optional config file and flags into a RunConfig."""
    args = build_parser().parse_args(argv)
    raw = read_config_file(args.config) if args.config else {}
    for key in _KEYS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    cfg = RunConfig(args.command)
    for key, value in raw.items():
        conv, attr = _KEYS[key]
        try:
            setattr(cfg, attr, conv(value))
        except ValueError:
            raise UsageError(f"{key}: invalid value {value!r}") from None
    _finish(cfg, set(raw))
    return cfg


def _finish(cfg, explicit=()):
    cmd = cfg.command
    if not cfg.schemes:
        if cmd == "simulate":
            raise UsageError(f"--scheme is required for simulate; valid schemes: {VALID_SCHEMES}")
        cfg.schemes = DEFAULT_SCHEMES.get(cmd, ())
    if cfg.field not in FIELDS:
        raise UsageError(f"field: unknown field {cfg.field!r}; choose from {', '.join(sorted(FIELDS))}")
    if not cfg.eps:
        cfg.eps = {"energy": ENERGY_EPS, "converge": ENERGY_EPS, "timing": TIMING_EPS}.get(cmd, (1.0,))
    if any(not e > 0 for e in cfg.eps):
        raise UsageError("eps: must be > 0")
    if cfg.field != "experiment":
        cfg.eps = cfg.eps[:1]
    if not cfg.h:
        cfg.h = TIMING_H if cmd == "timing" else (1e-2,)
    if any(not h > 0 for h in cfg.h):
        raise UsageError("h: must be > 0")
    if cmd in ("simulate", "energy") and len(cfg.h) != 1:
        raise UsageError("h: simulate and energy take a single step size")
    for key in ("T", "t_end", "rtol", "atol"):
        if not getattr(cfg, key) > 0:
            raise UsageError(f"{key}: must be > 0")
    if cfg.k_min > cfg.k_max:
        raise UsageError("k_min: must not exceed k_max")
    if cfg.repetitions < 3:
        raise UsageError("repetitions: must be at least 3")
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"format: expected csv or json, got {cfg.format!r}")
    if cmd in ("converge", "timing"):
        if "format" in explicit and cfg.format != "json":
            raise UsageError(f"format: {cmd} writes JSON reports only")
        cfg.format = "json"
    if not cfg.out and cmd in DEFAULT_OUT:
        cfg.out = DEFAULT_OUT[cmd].format(fmt=cfg.format)


def _model(cfg, eps):
    if cfg.field == "experiment":
        return make_field("experiment", eps=eps)
    if cfg.field == "harmonic":
        return make_field("harmonic", b=cfg.b, k=cfg.k)
    if cfg.field == "uniform":
        return make_field("uniform", b=cfg.b)
    return make_field("zero")


def _write_record(rec, path, fmt, cfg):
    meta = {"config": cfg.metadata()}
    if fmt == "csv":
        write_trajectory_csv(rec, path, meta)
    else:
        write_trajectory_json(rec, path, meta)


def _eps_tag(eps):
    return ("%.17g" % eps).replace(".", "p")


def cmd_simulate(cfg, out=None):
    out = out or sys.stdout
    init = ParticleState(cfg.x0, cfg.v0)
    rec = run_energy_experiment(cfg.schemes[0], _model(cfg, cfg.eps[0]), init, cfg.h[0], cfg.T, c0=cfg.c0)
    _write_record(rec, cfg.out, cfg.format, cfg)
    print(f"{rec.scheme}: {len(rec) - 1} steps, max relative modified-energy error "
          f"{rec.max_relative_energy_error:.3e} -> {cfg.out}", file=out)
    if rec.error:
        print(f"run aborted: {rec.error}", file=out)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_energy(cfg, out=None):
    out = out or sys.stdout
    init = ParticleState(cfg.x0, cfg.v0)
    outdir = Path(cfg.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {outdir}: {exc.strerror}") from exc
    status = EXIT_OK
    for eps in cfg.eps:
        model = _model(cfg, eps)
        for scheme in cfg.schemes:
            rec = run_energy_experiment(scheme, model, init, cfg.h[0], cfg.T, c0=cfg.c0)
            path = outdir / f"energy_{scheme.value}_eps{_eps_tag(eps)}.{cfg.format}"
            _write_record(rec, path, cfg.format, cfg)
            print(f"{scheme.value:9s} eps={eps:<10.6g} max e_H = {rec.max_relative_energy_error:.3e}"
                  + (f"  ABORTED ({rec.error})" if rec.error else ""), file=out)
            if rec.error:
                status = EXIT_NUMERIC
    return status


def cmd_converge(cfg, out=None):
    out = out or sys.stdout
    init = ParticleState(cfg.x0, cfg.v0)
    tol = AdaptiveConfig(rtol=cfg.rtol, atol=cfg.atol)
    reports = []
    for eps in cfg.eps:
        model = _model(cfg, eps)
        ref = reference_solve(model, init, cfg.t_end, tol)
        for scheme in cfg.schemes:
            rep = run_convergence_study(scheme, model, init, cfg.t_end, range(cfg.k_min, cfg.k_max + 1),
                                        tol, c0=cfg.c0, reference=ref)
            reports.append(rep)
            order = "exact regime" if rep.exact_regime else f"order {rep.fitted_order:.4f}"
            print(f"{scheme.value:9s} eps={eps:<10.6g} {order}", file=out)
    write_report_json(reports, cfg.out, {"config": cfg.metadata()})
    return EXIT_OK


def cmd_timing(cfg, out=None):
    out = out or sys.stdout
    init = ParticleState(cfg.x0, cfg.v0)
    rep = run_timing_study(cfg.schemes, init, cfg.T, cfg.h, cfg.eps, cfg.repetitions,
                           field_factory=lambda eps: _model(cfg, eps), c0=cfg.c0)
    for c in rep.cells:
        print(f"{c['scheme']:9s} eps={c['eps']:<10.6g} h={c['h']:<8.3g} median {c['median_seconds']:.4e} s",
              file=out)
    write_report_json(rep, cfg.out, {"config": cfg.metadata()})
    return EXIT_OK


def cmd_check(cfg=None, out=None):
    out = out or sys.stdout
    from .checks import run_checks

    t0 = time.perf_counter()
    results = run_checks()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}", file=out)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed "
          f"in {time.perf_counter() - t0:.2f} s", file=out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


HANDLERS = {"simulate": cmd_simulate, "energy": cmd_energy, "converge": cmd_converge,
            "timing": cmd_timing, "check": cmd_check}


def main(argv=None):
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IoError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, InitError, OverflowError, FloatingPointError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
