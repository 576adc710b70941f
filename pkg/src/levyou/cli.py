"""Command-line entry point.

    levyou <command> --config <path> --out <path> [--format csv|json] [flags]

Commands: spectrum, eigen, density, transition, mehler, simulate, verify,
diagnose.  Configuration is strict JSON (unknown keys are rejected, with the
offending field path in the message); all numeric JSON output carries 17
significant digits, and repeated runs with the same config and seed are
byte-identical.  Exit codes: 0 success (and, for `verify`, all checks pass),
1 computation or verification failure, 2 configuration error.

Environment: LEVYOU_BACKEND selects the compute backend (auto/numba/numpy);
LEVYOU_THREADS caps the worker count used by the accelerated kernels.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import _jsonfmt
from . import density as density_mod
from . import levy, matops, polyspec, simulate, spectrum, verify
from .errors import LevyOuError

__all__ = ["main", "ConfigError", "load_config", "LoadedConfig"]


class ConfigError(Exception):
    """Raised for any configuration problem; carries the field path."""

    def __init__(self, path: str, message: str):
        self.path = path or "<root>"
        super().__init__(f"config error at {self.path}: {message}")


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

_TOP_KEYS = {"d", "Q", "B", "pi", "grid", "degreeCap", "seed"}
_GRID_KEYS = {"halfWidths", "sizes"}
_PI_KEYS = {
    "null": {"type"},
    "finiteAtomic": {"type", "locations", "weights"},
    "compoundPoissonGaussian": {"type", "rate", "mean", "covariance",
                                "halfWidths", "sizes"},
    "alphaStable": {"type", "alpha", "directions", "weights"},
}


def _reject_unknown(obj: dict, allowed, path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key,
                              "unknown key")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "missing")
    return obj[key]


def _as_matrix(value, d: int, path: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f"not numeric: {exc}") from None
    if arr.shape == () and d == 1:
        arr = arr.reshape(1, 1)
    if arr.shape != (d, d):
        raise ConfigError(path, f"expected a {d}x{d} row-major matrix, "
                          f"got shape {arr.shape}")
    return arr


def _as_vector_list(value, d: int, path: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f"not numeric: {exc}") from None
    if arr.ndim == 1 and d == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ConfigError(path, f"expected a list of {d}-vectors")
    return arr


def _parse_pi(obj, d: int, path: str) -> levy.JumpSpec:
    if obj is None:
        return levy.NullJumps()
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object with a 'type' tag")
    tag = _require(obj, "type", path)
    if tag not in _PI_KEYS:
        raise ConfigError(f"{path}.type",
                          f"unknown variant {tag!r}; expected one of "
                          f"{sorted(_PI_KEYS)}")
    _reject_unknown(obj, _PI_KEYS[tag], path)
    try:
        if tag == "null":
            return levy.NullJumps()
        if tag == "finiteAtomic":
            return levy.FiniteAtomicJumps(
                _as_vector_list(_require(obj, "locations", path), d,
                                f"{path}.locations"),
                np.asarray(_require(obj, "weights", path), dtype=float),
            )
        if tag == "alphaStable":
            return levy.AlphaStableJumps(
                float(_require(obj, "alpha", path)),
                _as_vector_list(_require(obj, "directions", path), d,
                                f"{path}.directions"),
                np.asarray(_require(obj, "weights", path), dtype=float),
            )
        # compoundPoissonGaussian: rate * N(mean, covariance) sampled on its
        # own bounded grid.
        rate = float(_require(obj, "rate", path))
        mean = np.asarray(_require(obj, "mean", path), dtype=float).reshape(d)
        cov = _as_matrix(_require(obj, "covariance", path), d,
                         f"{path}.covariance")
        spec = density_mod.GridSpec(
            tuple(float(v) for v in _require(obj, "halfWidths", path)),
            tuple(int(v) for v in _require(obj, "sizes", path)))
        mesh = spec.mesh() - mean
        Sinv = np.linalg.inv(cov)
        quad = np.einsum("...i,ij,...j->...", mesh, Sinv, mesh)
        norm = ((2.0 * math.pi) ** (d / 2.0)) * math.sqrt(np.linalg.det(cov))
        vals = np.exp(-0.5 * quad) / norm
        vals = vals / (np.sum(vals) * spec.node_weight())
        return levy.CompoundPoissonDensityJumps(
            rate, density_mod.DensityField(spec, vals, label="jump_density"))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


class LoadedConfig:
    """A parsed configuration: model, grid, degree cap, seed, model hash."""

    def __init__(self, model, grid, degree_cap, seed, canonical):
        self.model = model
        self.grid = grid
        self.degree_cap = degree_cap
        self.seed = seed
        self.canonical = canonical

    @property
    def model_hash(self) -> str:
        return hashlib.sha256(self.canonical.encode()).hexdigest()


def load_config(path) -> LoadedConfig:
    """Parse and validate a strict-JSON model configuration.

    Any structural problem raises ConfigError with the offending field path;
    model assumption violations are reported naming the assumption the model
    constructor identified ("(1)" hypoellipticity, "(2)" stability and
    log-moment).
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be an object")
    _reject_unknown(raw, _TOP_KEYS, "")

    try:
        d = int(_require(raw, "d", ""))
    except (TypeError, ValueError):
        raise ConfigError("d", "must be an integer") from None
    if d < 1:
        raise ConfigError("d", "must be at least 1")
    Q = _as_matrix(_require(raw, "Q", ""), d, "Q")
    B = _as_matrix(_require(raw, "B", ""), d, "B")
    pi = _parse_pi(raw.get("pi"), d, "pi")

    grid = None
    if "grid" in raw:
        gobj = raw["grid"]
        if not isinstance(gobj, dict):
            raise ConfigError("grid", "expected an object")
        _reject_unknown(gobj, _GRID_KEYS, "grid")
        try:
            grid = density_mod.GridSpec(
                tuple(float(v) for v in _require(gobj, "halfWidths", "grid")),
                tuple(int(v) for v in _require(gobj, "sizes", "grid")))
        except (TypeError, ValueError) as exc:
            raise ConfigError("grid", str(exc)) from None
        if grid.dim != d:
            raise ConfigError("grid", f"grid dimension {grid.dim} "
                              f"disagrees with d={d}")

    degree_cap = int(raw.get("degreeCap", 6))
    if degree_cap < 1:
        raise ConfigError("degreeCap", "must be at least 1")
    seed = int(raw.get("seed", 20260822))

    try:
        model = levy.OuModel(Q, B, pi)
    except LevyOuError as exc:
        raise ConfigError("<model>", str(exc)) from None
    except ValueError as exc:
        raise ConfigError("<model>", str(exc)) from None

    canonical = _jsonfmt.dumps(
        {"d": d, "Q": Q, "B": B, "pi": raw.get("pi"), "seed": seed},
        sort_keys=True)
    return LoadedConfig(model, grid, degree_cap, seed, canonical)


def _grid_for(cfg: LoadedConfig) -> density_mod.GridSpec:
    return cfg.grid if cfg.grid is not None else \
        density_mod.default_grid(cfg.model)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _parse_floats(text: str, d: int, flag: str) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(flag, f"could not parse {text!r} as floats") \
            from None
    if vals.shape != (d,):
        raise ConfigError(flag, f"expected {d} comma-separated floats")
    return vals


def _parse_index(text: str, d: int) -> tuple:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError("--n", f"could not parse {text!r} as integers") \
            from None
    if len(vals) != d or any(v < 0 for v in vals):
        raise ConfigError("--n", f"expected {d} nonnegative integers")
    return vals


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _write_text(path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _csv_line(cells) -> str:
    out = []
    for c in cells:
        s = c if isinstance(c, str) else (
            f"{c:.17g}" if isinstance(c, float) else str(c))
        if any(ch in s for ch in ",\"\n"):
            s = '"' + s.replace('"', '""') + '"'
        out.append(s)
    return ",".join(out) + "\n"


def _plain_adjoint_constant(model, n) -> float | None:
    """Constant relating the plain and adjoint co-eigenfunction fields.

    Defined when the eigenbasis map is diagonal (the two derivative stacks
    then differ only by per-axis scalings); None otherwise.
    """
    sd = model.spectral
    if sd.hermite_scale is None:
        return None
    M = sd.to_eigenbasis
    diag = np.diag(np.diag(M))
    if np.max(np.abs(M - diag)) > 1e-12 * (1.0 + np.max(np.abs(M))):
        return None
    order = int(sum(n))
    scale = float(sd.hermite_scale) ** (-order)
    return ((-1.0) ** order) * scale * float(
        np.prod(np.diag(M) ** np.asarray(n)))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_spectrum(cfg, args):
    report = spectrum.spectral_report(cfg.model, cfg.degree_cap)
    if args.format == "json":
        _jsonfmt.dump(report.to_jsonable(), args.out)
    else:
        lines = [_csv_line(["theta", "lattice_multiplicity", "algebraic",
                            "geometric", "index"])]
        per = {e.theta: e for e in report.per_eigenvalue}
        for entry in report.lattice:
            ev = per.get(entry.theta)
            lines.append(_csv_line([
                float(entry.theta), entry.multiplicity,
                ev.algebraic if ev else "", ev.geometric if ev else "",
                ev.index if ev else ""]))
        _write_text(args.out, "".join(lines))
    print(f"spectrum: {len(report.lattice)} eigenvalue groups; "
          f"diagonalizable equivalence: {report.diagonalizable_equivalence}")
    return 0


def _cmd_eigen(cfg, args):
    model = cfg.model
    grid = _grid_for(cfg)
    if not args.n:
        raise ConfigError("--n", "at least one eigenfunction index required")
    indices = [_parse_index(text, model.d) for text in args.n]
    out = {"indices": [list(n) for n in indices], "eigenfunctions": [],
           "coeigenfunction_constants": []}
    stem = str(args.out)
    stem = stem[:-5] if stem.endswith(".json") else stem
    for n in indices:
        Hn = polyspec.eigenfunction_Hn(model, n)
        Gn = polyspec.coeigenfunction_Gn(model, n, grid, form="adjoint")
        tag = "-".join(str(v) for v in n)
        gpath = f"{stem}_G_{tag}.csv"
        Gn.write_csv(gpath)
        out["eigenfunctions"].append({
            "index": list(n),
            "decay_rate": float(np.dot(n, model.spectral.decay_rates)),
            "polynomial": Hn.to_jsonable(),
            "coeigenfunction_grid_csv": gpath,
        })
        out["coeigenfunction_constants"].append(
            _plain_adjoint_constant(model, n))
    _jsonfmt.dump(out, args.out)
    print(f"eigen: wrote {len(indices)} eigenfunction(s) and grid "
          f"co-eigenfunction field(s)")
    return 0


def _field_output(fld, args, label: str):
    if args.format == "json":
        _jsonfmt.dump({
            "label": label,
            "grid": {"halfWidths": list(fld.grid.half_widths),
                     "sizes": list(fld.grid.sizes)},
            "values": fld.values,
        }, args.out)
    else:
        fld.write_csv(args.out)
    print(f"{label}: mass = {fld.mass():.6f} on grid "
          f"{'x'.join(str(N) for N in fld.grid.sizes)}")


def _cmd_density(cfg, args):
    grid = _grid_for(cfg)
    if args.deriv:
        m = _parse_index(args.deriv, cfg.model.d)
        fld = density_mod.density_derivative(cfg.model, grid, m)
        _field_output(fld, args, "density_derivative")
    else:
        fld = density_mod.invariant_density(cfg.model, grid)
        _field_output(fld, args, "invariant_density")
    return 0


def _cmd_transition(cfg, args):
    x = _parse_floats(args.x, cfg.model.d, "--x")
    fld = density_mod.transition_density(cfg.model, _grid_for(cfg),
                                         float(args.t), x)
    _field_output(fld, args, "transition_density")
    return 0


def _cmd_mehler(cfg, args):
    model = cfg.model
    x = _parse_floats(args.x, model.d, "--x")
    y = _parse_floats(args.y, model.d, "--y")
    t = float(args.t)
    series, closed = spectrum.mehler_kernel(model, t, x, y, int(args.N))
    gauss = spectrum.gaussian_transition_value(model, t, x, y)
    payload = {"t": t, "x": x, "y": y, "N": int(args.N),
               "series": series, "closedForm": closed,
               "gaussianTransition": gauss}
    if args.format == "json":
        _jsonfmt.dump(payload, args.out)
    else:
        _write_text(args.out,
                    _csv_line(["series", "closedForm", "gaussianTransition"])
                    + _csv_line([series, closed, gauss]))
    print(f"mehler: series = {series:.12g}, closed form = {closed:.12g}")
    return 0


def _cmd_simulate(cfg, args):
    model = cfg.model
    x = _parse_floats(args.x, model.d, "--x")
    t = float(args.t)
    n = int(args.N)
    scfg = simulate.SamplerConfig(seed=cfg.seed, sample_count=n)
    samples = simulate.sample_transition(model, x, t, scfg)
    simulate.write_samples(args.out, samples, {
        "command": "simulate", "t": t, "x": x.tolist(), "N": n,
        "seed": cfg.seed, "model_sha256": cfg.model_hash,
    })
    mean = samples.mean(axis=0)
    print(f"simulate: {n} paths to t = {t:g}; sample mean = "
          f"[{', '.join(f'{v:.6g}' for v in mean)}]")
    return 0


def _cmd_verify(cfg, args):
    results = verify.run_all(cfg.model, grid=_grid_for(cfg), seed=cfg.seed)
    rows = [{"key": r.key, "module": r.module,
             "description": r.description, "applicable": r.applicable,
             "passed": r.passed, "detail": r.detail} for r in results]
    failed = [r for r in results if r.applicable and not r.passed]
    ran = sum(1 for r in results if r.applicable)
    if args.format == "json":
        _jsonfmt.dump({"results": rows,
                       "ran": ran, "failed": len(failed),
                       "skipped": len(results) - ran}, args.out)
    else:
        lines = [_csv_line(["key", "module", "applicable", "passed",
                            "detail"])]
        lines += [_csv_line([r.key, r.module, r.applicable, r.passed,
                             r.detail]) for r in results]
        _write_text(args.out, "".join(lines))
    for r in results:
        status = "SKIP" if not r.applicable else \
            ("PASS" if r.passed else "FAIL")
        print(f"  [{status}] {r.key}: {r.detail}")
    print(f"verify: {ran - len(failed)}/{ran} checks passed "
          f"({len(results) - ran} skipped)")
    return 1 if failed else 0


def _cmd_diagnose(cfg, args):
    model = cfg.model
    diag = levy.measure_diagnostics(model.pi, n_max=8, kappa_grid=(0.5, 1.0))
    sd = model.spectral
    assumptions = {
        "(1)": {
            "holds": True,
            "detail": f"finite-horizon covariances nondegenerate; "
                      f"controllability index {model.hypoellipticity_index}",
        },
        "(2)": {
            "holds": True,
            "detail": f"drift spectral abscissa {sd.spectral_abscissa:.6g} "
                      f"< 0 and the jump log-moment is finite",
        },
        "polynomial": {
            "holds": all(diag.poly_moment.values()),
            "orders": {str(k): bool(v)
                       for k, v in sorted(diag.poly_moment.items())},
        },
        "exponential": {
            "holds": all(diag.exp_moment.values()) if diag.exp_moment
            else False,
            "rates": {f"{k:g}": bool(v)
                      for k, v in sorted(diag.exp_moment.items())},
        },
    }
    compact = spectrum.compactness_diagnostic(model, _grid_for(cfg))
    payload = {"assumptions": assumptions,
               "compactness": {"verdict": compact.verdict,
                               "evidence": compact.evidence}}
    if args.format == "json":
        _jsonfmt.dump(payload, args.out)
    else:
        lines = [_csv_line(["item", "value"])]
        lines.append(_csv_line(["assumption (1)", "holds"]))
        lines.append(_csv_line(["assumption (2)", "holds"]))
        lines.append(_csv_line([
            "assumption polynomial",
            "holds" if assumptions["polynomial"]["holds"] else "fails"]))
        lines.append(_csv_line([
            "assumption exponential",
            "holds" if assumptions["exponential"]["holds"] else "fails"]))
        lines.append(_csv_line(["compactness", compact.verdict]))
        _write_text(args.out, "".join(lines))
    print(f"diagnose: compactness verdict = {compact.verdict}")
    return 0


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "eigen": _cmd_eigen,
    "density": _cmd_density,
    "transition": _cmd_transition,
    "mehler": _cmd_mehler,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "diagnose": _cmd_diagnose,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levyou",
        description="Spectral and distributional computations for "
                    "Levy-driven Ornstein-Uhlenbeck semigroups.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True,
                       help="strict-JSON model configuration")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--format", choices=("csv", "json"), default="json")

    common(sub.add_parser("spectrum",
                          help="eigenvalue lattice and multiplicity report"))
    p = sub.add_parser("eigen", help="eigenfunctions and co-eigenfunctions")
    common(p)
    p.add_argument("--n", action="append", required=True,
                   help="multi-index, comma-separated (repeatable)")
    p = sub.add_parser("density", help="invariant density (or derivative)")
    common(p)
    p.add_argument("--deriv", default=None,
                   help="derivative multi-index, comma-separated")
    p = sub.add_parser("transition", help="transition density from x at t")
    common(p)
    p.add_argument("--t", required=True, type=float)
    p.add_argument("--x", required=True)
    p = sub.add_parser("mehler", help="Mehler kernel: series vs closed form")
    common(p)
    p.add_argument("--t", required=True, type=float)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--N", required=True, type=int)
    p = sub.add_parser("simulate", help="Monte Carlo transition samples")
    common(p)
    p.add_argument("--t", required=True, type=float)
    p.add_argument("--x", required=True)
    p.add_argument("--N", required=True, type=int)
    common(sub.add_parser("verify", help="run the full invariant registry"))
    common(sub.add_parser("diagnose",
                          help="assumption and compactness report"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except LevyOuError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
