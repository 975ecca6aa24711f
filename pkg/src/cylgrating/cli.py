"""Command line front end: read an INI run file, run the requested tasks, write CSV/JSON.

Example run file::

    [grating]
    theta_i = 60          ; degrees
    phi_i = 30
    eps_r = 2.25
    kra = 0.005           ; or give a and d (with lambda0)
    a_over_d = 0.05

    [sweep]
    a_over_d = 0.025, 0.05, 0.1

    [run]
    tasks = solve_exact, compare

Exit status: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

import argparse
import configparser
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .asymptotic import ORDERS, asymptotic_table, fit_power, scaling_exponent
from .errors import NUMERICAL_ERRORS, AnomalyError, ConfigError, DomainError, GratingError
from .fields import eval_exterior_fields
from .lattice import DEFAULT_ANOMALY_THRESHOLD, DEFAULT_TOL, verify_leading_order
from .medium import GratingConfig, anomaly_margin, derive_wavenumbers
from .solver import build_system, converged_truncation, solve_direct, solve_neumann

log = logging.getLogger("cylgrating")

TASKS = ("solve_exact", "solve_neumann", "asymptotic", "compare", "fields", "lattice_check")
MODES = tuple(range(-3, 4))

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

_SCHEMA = {
    "grating": {"lambda0", "theta_i", "phi_i", "eps_r", "mu_r", "a", "d", "kra", "krd",
                "a_over_d", "E0", "units_mode"},
    "sweep": {"a_over_d", "kra", "krd", "theta_i"},
    "run": {"tasks", "workers"},
    "solver": {"N", "tol", "max_iters", "N_max"},
    "asymptotic": {"order"},
    "fields": {"nx", "ny", "x_min", "x_max", "y_min", "y_max", "s", "z"},
    "lattice": {"n_max", "tol", "anomaly_threshold"},
}


@dataclass
class SweepPoint:
    index: int
    params: dict
    config: GratingConfig


@dataclass
class RunSpec:
    points: list
    tasks: tuple
    sweep_axes: tuple = ()
    N: object = 8
    tol: float = 1e-12
    max_iters: int = 500
    N_max: int = 32
    order: int = 4
    lattice_tol: float = DEFAULT_TOL
    anomaly_threshold: float = DEFAULT_ANOMALY_THRESHOLD
    lattice_n_max: int = 5
    fields: dict = field(default_factory=dict)
    workers: int = 1


# ---------------------------------------------------------------- parsing


def _number(section, key, raw, kind=float):
    try:
        if kind is complex:
            value = complex(raw.replace(" ", ""))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError
            return value
        value = kind(raw)
        if kind is float and not math.isfinite(value):
            raise ValueError
        return value
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot read {raw!r} as {kind.__name__}") from None


def _number_list(section, key, raw):
    text = raw.strip()
    for name, fn in (("logspace", np.geomspace), ("linspace", np.linspace)):
        if text.startswith(name + "(") and text.endswith(")"):
            parts = [p.strip() for p in text[len(name) + 1 : -1].split(",")]
            if len(parts) != 3:
                raise ConfigError(f"{section}.{key}: {name}(start, stop, count) needs three arguments")
            lo, hi = (_number(section, key, p) for p in parts[:2])
            count = _number(section, key, parts[2], int)
            if count < 1 or (name == "logspace" and (lo <= 0 or hi <= 0)):
                raise ConfigError(f"{section}.{key}: invalid {name} range")
            return [float(v) for v in fn(lo, hi, count)]
    values = [_number(section, key, p.strip()) for p in text.split(",") if p.strip()]
    if not values:
        raise ConfigError(f"{section}.{key}: empty list")
    return values


def _read_ini(text, source):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"malformed run file: {exc}") from None
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
    return parser


def _base_geometry(g):
    """Base size description: ("length", a, d) or ("kra"/"krd", value, a/d)."""
    has_ad = "a" in g or "d" in g
    has_dimless = any(k in g for k in ("kra", "krd", "a_over_d"))
    if has_ad and has_dimless:
        raise ConfigError("grating: give either a and d, or kra/krd with a_over_d, not both")
    if has_ad:
        if "a" not in g or "d" not in g:
            raise ConfigError("grating: both grating.a and grating.d are required")
        return "length", _number("grating", "a", g["a"]), _number("grating", "d", g["d"])
    if "kra" in g and "krd" in g:
        raise ConfigError("grating: give kra or krd, not both")
    ratio = _number("grating", "a_over_d", g["a_over_d"]) if "a_over_d" in g else None
    for key in ("kra", "krd"):
        if key in g:
            return key, _number("grating", key, g[key]), ratio
    return None, None, ratio


def _axis(axes, key):
    return axes["size"] if key in ("kra", "krd") else axes[key]


def parse_run_text(text, source="<run file>"):
    """Validated RunSpec from the text of a run file."""
    parser = _read_ini(text, source)
    if not parser.has_section("grating"):
        raise ConfigError("missing [grating] section")
    g = parser["grating"]
    for key in ("theta_i", "phi_i", "eps_r"):
        if key not in g:
            raise ConfigError(f"missing required key grating.{key}")
    lambda0 = _number("grating", "lambda0", g.get("lambda0", "1.0"))
    base_kind, base_size, base_ratio = _base_geometry(g)
    common = dict(
        lambda0=lambda0,
        phi_i=math.radians(_number("grating", "phi_i", g["phi_i"])),
        eps_r=_number("grating", "eps_r", g["eps_r"]),
        mu_r=_number("grating", "mu_r", g.get("mu_r", "1.0")),
        E0=_number("grating", "E0", g.get("E0", "1.0"), complex),
        units_mode=g.get("units_mode", "normalized").strip(),
    )
    if common["E0"].imag == 0:
        common["E0"] = common["E0"].real

    sweep = parser["sweep"] if parser.has_section("sweep") else {}
    if "kra" in sweep and "krd" in sweep:
        raise ConfigError("sweep: give kra or krd, not both")
    if base_kind == "length":
        # physical a is held fixed; a/d sweeps move d
        base_ratio = base_size / base_ratio if base_ratio > 0 else math.nan
    axes = {
        "theta_i": _number_list("sweep", "theta_i", sweep["theta_i"]) if "theta_i" in sweep
        else [_number("grating", "theta_i", g["theta_i"])],
        "a_over_d": _number_list("sweep", "a_over_d", sweep["a_over_d"]) if "a_over_d" in sweep
        else [base_ratio],
    }
    size_key = next((k for k in ("kra", "krd") if k in sweep), base_kind)
    axes["size"] = _number_list("sweep", size_key, sweep[size_key]) if size_key in sweep else [base_size]
    swept = tuple(k for k in ("theta_i", "a_over_d", size_key) if k in sweep and len(_axis(axes, k)) > 1)
    if axes["a_over_d"][0] is None:
        raise ConfigError("grating: a/d is undetermined; give grating.a_over_d or sweep.a_over_d")
    if size_key is None:
        raise ConfigError("grating: the size is undetermined; give kra, krd, or a and d")

    threshold = DEFAULT_ANOMALY_THRESHOLD
    lat = parser["lattice"] if parser.has_section("lattice") else {}
    if "anomaly_threshold" in lat:
        threshold = _number("lattice", "anomaly_threshold", lat["anomaly_threshold"])

    points = []
    for theta_deg, ratio, size in itertools.product(axes["theta_i"], axes["a_over_d"], axes["size"]):
        theta = math.radians(theta_deg)
        if not (lambda0 > 0 and ratio > 0 and size > 0 and 0 < theta_deg <= 90):
            raise ConfigError("lambda0, a/d and the size parameter must be > 0 and theta_i in (0, 90] degrees")
        kr = 2 * math.pi / lambda0 * math.sin(theta)
        if size_key == "length":
            a = size
        else:
            a = (size if size_key == "kra" else size * ratio) / kr
        try:
            cfg = GratingConfig(theta_i=theta, a=a, d=a / ratio, **common)
        except AnomalyError as exc:
            raise ConfigError(f"AnomalyError: {exc}") from None
        margin = anomaly_margin(cfg)
        if margin < threshold:
            raise ConfigError(
                f"AnomalyError: sweep point theta_i={theta_deg:g} a/d={ratio:g} k_r a={kr * a:g} is "
                f"{margin:.3g} from a grating anomaly (threshold {threshold:g})"
            )
        params = {"theta_i_deg": theta_deg, "a_over_d": ratio, "kra": kr * a, "krd": kr * a / ratio}
        points.append(SweepPoint(len(points), params, cfg))

    run = parser["run"] if parser.has_section("run") else {}
    tasks = tuple(t.strip() for t in run.get("tasks", "").split(",") if t.strip())
    spec = RunSpec(points=points, tasks=tasks, sweep_axes=swept, anomaly_threshold=threshold)
    if "workers" in run:
        spec.workers = _number("run", "workers", run["workers"], int)

    solver = parser["solver"] if parser.has_section("solver") else {}
    if "N" in solver:
        raw = solver["N"].strip()
        spec.N = "auto" if raw == "auto" else _number("solver", "N", raw, int)
    for key, kind in (("tol", float), ("max_iters", int), ("N_max", int)):
        if key in solver:
            setattr(spec, key, _number("solver", key, solver[key], kind))
    if parser.has_section("asymptotic") and "order" in parser["asymptotic"]:
        spec.order = _number("asymptotic", "order", parser["asymptotic"]["order"], int)
    if "tol" in lat:
        spec.lattice_tol = _number("lattice", "tol", lat["tol"])
    if "n_max" in lat:
        spec.lattice_n_max = _number("lattice", "n_max", lat["n_max"], int)
    f = parser["fields"] if parser.has_section("fields") else {}
    spec.fields = {
        "nx": _number("fields", "nx", f.get("nx", "21"), int),
        "ny": _number("fields", "ny", f.get("ny", "21"), int),
        "s": _number("fields", "s", f.get("s", "0"), int),
        "z": _number("fields", "z", f.get("z", "0")),
    }
    for key in ("x_min", "x_max", "y_min", "y_max"):
        if key in f:
            spec.fields[key] = _number("fields", key, f[key])
    return spec


def validate_spec(spec):
    if not spec.tasks:
        raise ConfigError("run.tasks: at least one task is required")
    unknown = [t for t in spec.tasks if t not in TASKS]
    if unknown:
        raise ConfigError(f"run.tasks: unknown task(s) {', '.join(unknown)}; choose from {', '.join(TASKS)}")
    if spec.N != "auto" and not (isinstance(spec.N, int) and spec.N >= 3):
        raise ConfigError("solver.N must be an integer >= 3 or 'auto'")
    if not spec.tol > 0:
        raise ConfigError("solver.tol must be > 0")
    if spec.max_iters < 1 or spec.N_max < 4:
        raise ConfigError("solver.max_iters must be >= 1 and solver.N_max >= 4")
    if spec.order not in ORDERS:
        raise ConfigError(f"asymptotic.order must be one of {ORDERS}")
    if not spec.lattice_tol > 0:
        raise ConfigError("lattice.tol must be > 0")
    if spec.lattice_n_max < 0:
        raise ConfigError("lattice.n_max must be >= 0")
    if spec.fields["nx"] < 1 or spec.fields["ny"] < 1:
        raise ConfigError("fields.nx and fields.ny must be >= 1")
    if spec.workers < 1:
        raise ConfigError("run.workers must be >= 1")
    return spec


def parse_run_spec(path, tasks=None, tol=None, max_order=None):
    """Read and validate a run file; ``tasks``/``tol``/``max_order`` override the file."""
    # an unreadable file is an I/O failure (exit 4), not a configuration error
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    spec = parse_run_text(text, source=str(path))
    if tasks:
        spec.tasks = tuple(tasks)
    if tol is not None:
        spec.tol = tol
    if max_order is not None:
        spec.order = max_order
    return validate_spec(spec)


# ---------------------------------------------------------------- execution


def _c(z):
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _solve(spec, cfg, method):
    if spec.N == "auto":
        table = converged_truncation(cfg, tol=spec.tol, N_max=spec.N_max, method=method,
                                     lattice_tol=spec.lattice_tol)
        return table
    system = build_system(cfg, spec.N, tol=spec.lattice_tol, threshold=spec.anomaly_threshold)
    if method == "neumann":
        return solve_neumann(system, max_iters=spec.max_iters, tol=spec.tol)
    return solve_direct(system)


def _meta(table):
    return {
        "N": table.N,
        "method": table.method,
        "residual": _finite(table.residual),
        "neumann_iters": table.neumann_iters,
        "condition": None if table.condition is None else _finite(table.condition),
    }


def _field_grid(spec, point, table):
    cfg = point.config
    f = spec.fields
    half = 0.45 * cfg.d
    xs = np.linspace(f.get("x_min", -half), f.get("x_max", half), f["nx"])
    ys = np.linspace(f.get("y_min", -half), f.get("y_max", half), f["ny"])
    X, Y = np.meshgrid(xs, ys)
    R = np.hypot(X, Y)
    ok = R > cfg.a
    if np.any(table.A) or np.any(table.AH):
        ok &= R < cfg.d
    Ez = np.full(X.shape, np.nan + 0j)
    Hz = np.full(X.shape, np.nan + 0j)
    n_field = trunc = None
    if ok.any():
        grid = eval_exterior_fields(cfg, None, table, None, X[ok], Y[ok], s=f["s"], z=f["z"])
        Ez[ok], Hz[ok] = grid.Ez, grid.Hz
        n_field, trunc = grid.n_field, _finite(grid.truncation_estimate)
    rows = np.column_stack([X.ravel(), Y.ravel(), Ez.real.ravel(), Ez.imag.ravel(),
                            Hz.real.ravel(), Hz.imag.ravel()])
    info = {"n_field": n_field, "truncation_estimate": trunc, "points": int(ok.size),
            "masked": int((~ok).sum()), "s": f["s"]}
    return rows, info


def run_point(spec, point):
    """Execute every requested task for one sweep point; returns (report entry, csv rows)."""
    cfg = point.config
    tasks = set(spec.tasks)
    entry = {"index": point.index, "params": dict(point.params)}
    for t in TASKS:
        entry[t] = None
    rows = {}
    exact = None
    if tasks & {"solve_exact", "compare", "fields"}:
        exact = _solve(spec, cfg, "direct")
        rows["exact"] = [(point.index, int(n), a.real, a.imag, h.real, h.imag)
                         for n, a, h in zip(exact.n, exact.A, exact.AH)]
        if "solve_exact" in tasks:
            entry["solve_exact"] = _meta(exact)
    if "solve_neumann" in tasks:
        neu = _solve(spec, cfg, "neumann")
        rows["neumann"] = [(point.index, int(n), a.real, a.imag, h.real, h.imag)
                           for n, a, h in zip(neu.n, neu.A, neu.AH)]
        entry["solve_neumann"] = _meta(neu)
    asym = None
    if tasks & {"asymptotic", "compare"}:
        asym = asymptotic_table(cfg, spec.order)
        rows["asymptotic"] = []
        for n in asym.modes:
            v0, vh0 = asym.values[n]
            v, vh = asym.reconstructed(n)
            rows["asymptotic"].append((point.index, n, v0.real, v0.imag, vh0.real, vh0.imag,
                                       v.real, v.imag, vh.real, vh.imag))
        if "asymptotic" in tasks:
            entry["asymptotic"] = {"order_included": asym.order_included, "kra": asym.kra}
    if "compare" in tasks:
        modes = {}
        for n in MODES:
            A, AH = exact.get(n)
            B, BH = asym.reconstructed(n)
            scale = max(abs(A), abs(B))
            modes[str(n)] = {
                "exact_A": _c(A),
                "exact_AH": _c(AH),
                "asymptotic_A": _c(B),
                "asymptotic_AH": _c(BH),
                "relative_error_A": _finite(abs(A - B) / scale) if scale > 0 else 0.0,
                "scaling_exponent": scaling_exponent(n),
            }
        entry["compare"] = {"order_included": asym.order_included, "solver": _meta(exact), "modes": modes}
    if "lattice_check" in tasks:
        wn = derive_wavenumbers(cfg)
        checks = {}
        for n in range(spec.lattice_n_max + 1):
            c = verify_leading_order(wn, n, tol=spec.lattice_tol, threshold=spec.anomaly_threshold)
            checks[str(n)] = {
                "I_n": _c(c.I_n),
                "h_n": _c(c.h_n),
                "ratio": None if math.isnan(c.ratio.real) else _c(c.ratio),
                "deviation": _finite(c.deviation),
            }
        entry["lattice_check"] = {"krd": wn.krd, "orders": checks}
    if "fields" in tasks:
        grid_rows, info = _field_grid(spec, point, exact)
        rows["fields"] = [(point.index, *r) for r in grid_rows]
        entry["fields"] = info
    return entry, rows


def _sweep_fits(spec, entries, rows):
    """Log-log fits along the single swept axis, when there is one."""
    fits = {"axis": None, "scaling_exponents": None, "remainder_exponents": None}
    if len(spec.sweep_axes) != 1:
        return fits
    axis = spec.sweep_axes[0]
    fits["axis"] = axis
    if axis in ("kra", "krd") and "exact" in rows:
        kra = [e["params"]["kra"] for e in entries]
        out = {}
        for n in MODES:
            amp = [abs(complex(r[2], r[3])) for part in rows["exact"] for r in part if r[1] == n]
            amp_h = [abs(complex(r[4], r[5])) for part in rows["exact"] for r in part if r[1] == n]
            out[str(n)] = {
                "A": _safe_fit(kra, amp),
                "AH": _safe_fit(kra, amp_h),
                "expected": scaling_exponent(n),
            }
        fits["scaling_exponents"] = out
    if axis == "a_over_d" and "compare" in spec.tasks:
        ratios = [e["params"]["a_over_d"] for e in entries]
        out = {}
        for n in MODES:
            errs = [e["compare"]["modes"][str(n)]["relative_error_A"] for e in entries]
            out[str(n)] = {"q": _safe_fit(ratios, errs), "expected_min": spec.order + 2}
        fits["remainder_exponents"] = out
    return fits


def _safe_fit(x, y):
    if len(x) < 2 or any(v is None or not v > 0 for v in y):
        return None
    return fit_power(x, y)


def run(spec, out_dir):
    """Execute a validated RunSpec and write its outputs; returns the list of files written."""
    log.info("running %s over %d point(s)", ", ".join(spec.tasks), len(spec.points))
    if spec.workers > 1 and len(spec.points) > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(lambda p: run_point(spec, p), spec.points))
    else:
        results = [run_point(spec, p) for p in spec.points]
    entries = [r[0] for r in results]
    rows = {}
    for _, part in results:
        for key, value in part.items():
            rows.setdefault(key, []).append(value)

    report = {
        "version": __version__,
        "tasks": list(spec.tasks),
        "settings": {
            "N": spec.N, "tol": spec.tol, "max_iters": spec.max_iters, "N_max": spec.N_max,
            "order": spec.order, "lattice_tol": spec.lattice_tol,
            "anomaly_threshold": spec.anomaly_threshold, "sweep_axes": list(spec.sweep_axes),
        },
        "points": entries,
        "fits": _sweep_fits(spec, entries, rows),
    }
    coeff_header = ("point", "n", "re_A", "im_A", "re_AH", "im_AH")
    files = {
        "coefficients_exact.csv": (coeff_header, rows.get("exact")) if "solve_exact" in spec.tasks else None,
        "coefficients_neumann.csv": (coeff_header, rows.get("neumann")),
        "asymptotic.csv": (("point", "n", "re_A0", "im_A0", "re_AH0", "im_AH0",
                            "re_A", "im_A", "re_AH", "im_AH"), rows.get("asymptotic"))
        if "asymptotic" in spec.tasks else None,
        "fields.csv": (("point", "x", "y", "re_Ez", "im_Ez", "re_Hz", "im_Hz"), rows.get("fields")),
    }
    written = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        for name, payload in files.items():
            if payload is None or payload[1] is None:
                continue
            path = os.path.join(out_dir, name)
            written.append(path)
            _write_csv(path, payload[0], [r for part in payload[1] for r in part])
        path = os.path.join(out_dir, "report.json")
        written.append(path)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report, fh, sort_keys=True, indent=2, allow_nan=False)
            fh.write("\n")
    except BaseException:
        _remove(written)
        raise
    for path in written:
        log.info("wrote %s", path)
    return written


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.16e}"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _remove(paths):
    for p in paths:
        try:
            os.remove(p)
        except OSError:
            pass


def build_parser():
    p = argparse.ArgumentParser(
        prog="cylgrating",
        description="Multiple scattering by a grating of dielectric cylinders at oblique incidence.",
    )
    p.add_argument("--config", required=True, help="INI run file")
    p.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    p.add_argument("--task", action="append", choices=TASKS, help="task to run; repeatable, overrides run.tasks")
    p.add_argument("--tol", type=float, help="solver tolerance (Neumann and truncation control)")
    p.add_argument("--max-order", type=int, choices=ORDERS, help="highest a/d power in the closed forms")
    p.add_argument("--quiet", action="store_true", help="only report errors")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        spec = parse_run_spec(args.config, tasks=args.task, tol=args.tol, max_order=args.max_order)
        run(spec, args.out)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        log.error("numerical failure (%s): %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL
    except (DomainError, GratingError) as exc:
        log.error("numerical failure (%s): %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
