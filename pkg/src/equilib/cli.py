"""Command-line front end: solve, boundary, verify, sweep, simulate, render.

Exit codes
    0  success
    1  solver failure not covered below (no root in bracket, quadrature did not converge)
    2  invalid input (message names the violated constraint class)
    3  self-intersecting boundary
    4  verification failed (report still written)
    5  particle minimization did not converge (outputs still written)
    6  I/O failure
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import conformal, field, oracle, params
from .errors import EquilibError, NonConvergence, SelfIntersection, ValidationError

log = logging.getLogger("equilib")

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_VALIDATION = 2
EXIT_SELF_INTERSECTION = 3
EXIT_VERIFY_FAILED = 4
EXIT_NONCONVERGENCE = 5
EXIT_IO = 6

FIGURE_RATIOS = (0.8, 0.9, 1.0, 1.1, 1.2)

BOUNDARY_COLUMNS = ("component_id", "k", "re", "im")
SWEEP_COLUMNS = ("abs_t", "regime", "r", "abs_alpha", "mass_error", "min_margin", "status")
POSITION_COLUMNS = ("k", "re", "im")

DEFAULTS = {
    "n": 9,
    "d": 7,
    "T": 1.0,
    "t_re": 0.0,
    "t_im": 0.0,
    "m": 1024,
    "format": "csv",
    "map": "both",
    "alpha_scale": 1.0,
    "points": 41,
    "mass_nodes": 4096,
    "N": 256,
    "seed": 0,
    "eps": 0.02,
    "max_iter": 50_000,
    "particles": 0,
    "ratios": list(FIGURE_RATIOS),
}


@dataclass(frozen=True)
class RunConfig:
    spec: params.ProblemSpec
    options: dict
    out: str | None = None
    plot: str | None = None
    report: str | None = None

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None


def threads() -> int:
    try:
        return max(1, int(os.environ.get("EQUILIB_THREADS", "1")))
    except ValueError:
        return 1


# -- serialization ------------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(x), ".17g")


def dump_json(obj, path: str | None) -> None:
    # json writes floats with repr(), the shortest exact round-trip form
    text = json.dumps(obj, indent=2, allow_nan=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


@contextmanager
def open_output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_boundary_csv(curve: conformal.BoundaryCurve, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BOUNDARY_COLUMNS)
    for cid, comp in enumerate(curve.components):
        for k, z in enumerate(comp[:-1]):
            writer.writerow((cid, k, fmt(z.real), fmt(z.imag)))


def read_boundary_csv(fh) -> list[np.ndarray]:
    """Closed polylines, one per component_id, in file order."""
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != BOUNDARY_COLUMNS:
        raise ValueError(f"unexpected header {reader.fieldnames}")
    comps: dict[int, list[complex]] = {}
    for row in reader:
        comps.setdefault(int(row["component_id"]), []).append(complex(float(row["re"]), float(row["im"])))
    return [np.append(pts, pts[0]) for _, pts in sorted(comps.items())]


def boundary_json(curve: conformal.BoundaryCurve) -> dict:
    return {
        "regime": curve.regime.value,
        "kind": curve.kind.value,
        "samples_per_component": curve.samples_per_component,
        "components": [
            {"re": comp[:-1].real.tolist(), "im": comp[:-1].imag.tolist()} for comp in curve.components
        ],
    }


def write_positions_csv(z: np.ndarray, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(POSITION_COLUMNS)
    for k, p in enumerate(z):
        writer.writerow((k, fmt(p.real), fmt(p.imag)))


def params_json(p: params.MapParams) -> dict:
    s = p.spec
    return {
        "n": s.n,
        "d": s.d,
        "T": s.T,
        "t_re": s.t.real,
        "t_im": s.t.imag,
        "regime": p.regime.value,
        "t_cr": p.t_cr,
        "r": p.r,
        "alpha_re": p.alpha.real,
        "alpha_im": p.alpha.imag,
        "abs_alpha": p.abs_alpha,
        "residual": p.residual,
        "branch": p.branch.value,
    }


# -- commands -----------------------------------------------------------------


def cmd_solve(cfg: RunConfig) -> int:
    dump_json(params_json(params.solve(cfg.spec)), cfg.out)
    return EXIT_OK


def _maps(cfg: RunConfig, p: params.MapParams):
    wanted = ("reduced", "rotated") if cfg.map == "both" else (cfg.map,)
    build = {"reduced": conformal.reduced_map, "rotated": conformal.rotated_map}
    return [(name, build[name](p)) for name in wanted]


def cmd_boundary(cfg: RunConfig) -> int:
    p = params.solve(cfg.spec)
    prefix = cfg.out or "boundary"
    written = {}
    for name, cmap in _maps(cfg, p):
        curve = conformal.sample_boundary(cmap, cfg.m)
        path = f"{prefix}_{name}.{cfg.format}"
        if cfg.format == "csv":
            with open(path, "w", newline="") as fh:
                write_boundary_csv(curve, fh)
        else:
            dump_json(boundary_json(curve), path)
        written[name] = {"path": path, "components": curve.n_components}
    dump_json({"regime": p.regime.value, "files": written}, None)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    p = params.solve(cfg.spec)
    if cfg.alpha_scale != 1.0:
        p = dataclasses.replace(p, alpha=p.alpha * cfg.alpha_scale)
    ctx = field.FieldContext.from_params(p)
    grid = field.VerifyGrid(mass_nodes=cfg.mass_nodes)
    report = field.verify(ctx, grid, workers=threads())
    out = {**params_json(p), "alpha_scale": cfg.alpha_scale, **report.as_dict()}
    dump_json(out, cfg.out)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def sweep_grid(t_cr: float, points: int) -> np.ndarray:
    grid = np.linspace(0.0, 2.0 * t_cr, points)
    marks = np.array(FIGURE_RATIOS) * t_cr
    # drop grid points that only differ from a figure ratio by rounding
    keep = np.min(np.abs(grid[:, None] - marks[None, :]), axis=1) > 1e-12 * t_cr
    return np.sort(np.concatenate([grid[keep], marks]))


def sweep_row(spec: params.ProblemSpec, mass_nodes: int) -> dict:
    row = {"abs_t": spec.abs_t, "regime": "", "r": math.nan, "abs_alpha": math.nan,
           "mass_error": math.nan, "min_margin": math.nan, "status": "ok"}
    try:
        p = params.solve(spec)
        ctx = field.FieldContext.from_params(p)
        mass = field.mass_contour_integral(ctx, mass_nodes, tol=math.inf)
        gap = field.gradient_gap(ctx, conformal.ExteriorGrid().points())
    except EquilibError as exc:
        row["status"] = type(exc).__name__
        return row
    row.update(regime=p.regime.value, r=p.r, abs_alpha=p.abs_alpha,
               mass_error=abs(mass - 1), min_margin=float(np.min(gap)))
    return row


def cmd_sweep(cfg: RunConfig) -> int:
    spec = cfg.spec
    params.validate(spec)
    t_cr = params.solve(spec.with_t(0j)).t_cr
    phase = spec.t / spec.abs_t if spec.abs_t > 0 else 1.0
    rows = [sweep_row(spec.with_t(complex(a * phase)), cfg.mass_nodes) for a in sweep_grid(t_cr, cfg.points)]
    with open_output(cfg.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([row["regime"] if c == "regime" else row["status"] if c == "status" else fmt(row[c])
                             for c in SWEEP_COLUMNS])
    if cfg.plot:
        from .plotting import render_sweep

        render_sweep(rows, t_cr, cfg.plot)
    return EXIT_OK


def expected_components(p: params.MapParams) -> int:
    if p.regime is params.Regime.POST_CRITICAL:
        return p.spec.d
    if p.regime is params.Regime.DISK and p.abs_alpha > 1:
        return p.spec.n
    return 1


def coverage_report(ensemble: oracle.ParticleEnsemble, p: params.MapParams, eps: float, m: int) -> dict:
    curve = conformal.sample_boundary(conformal.rotated_map(p), max(m, 1024))
    report = {
        **params_json(p),
        "N": ensemble.N,
        "converged": ensemble.converged,
        "iterations": ensemble.iterations,
        "energy": ensemble.energy,
        "grad_norm": ensemble.grad_norm,
        "eps": eps,
        "coverage": oracle.support_coverage(ensemble, curve, eps),
        "predicted_components": curve.n_components,
    }
    if curve.n_components > 1:
        cutoff = 0.5 * oracle.component_gap(curve)
        report["cluster_cutoff"] = cutoff
        report["clusters"] = oracle.count_clusters(ensemble.positions, cutoff)
    else:
        report["clusters"] = 1
    return report, curve


def cmd_simulate(cfg: RunConfig) -> int:
    p = params.solve(cfg.spec)
    ensemble = oracle.minimize_gas(cfg.spec, cfg.N, seed=cfg.seed, max_iter=cfg.max_iter)
    with open_output(cfg.out or "positions.csv") as fh:
        write_positions_csv(ensemble.positions, fh)
    report, curve = coverage_report(ensemble, p, cfg.eps, cfg.m)
    dump_json(report, cfg.report)
    if cfg.plot:
        from .plotting import render_ensemble

        render_ensemble(curve, ensemble.positions, cfg.plot, title=p.regime.value)
    if not ensemble.converged:
        raise NonConvergence(f"|grad| = {ensemble.grad_norm:.3e} after {ensemble.iterations} steps")
    return EXIT_OK


def ladder_rows(spec: params.ProblemSpec, ratios, m: int, particles: int = 0, seed: int = 0):
    t_cr = params.solve(spec.with_t(0j)).t_cr
    phase = spec.t / spec.abs_t if spec.abs_t > 0 else 1.0
    rows = []
    for ratio in ratios:
        p = params.solve(spec.with_t(complex(ratio * t_cr * phase)))
        reduced = conformal.sample_boundary(conformal.reduced_map(p), m)
        rotated = conformal.sample_boundary(conformal.rotated_map(p), m)
        pts = oracle.minimize_gas(p.spec, particles, seed=seed).positions if particles else None
        rows.append((f"|t| = {ratio:g} t_cr", reduced, rotated, pts))
    return rows


def cmd_render(cfg: RunConfig) -> int:
    from .plotting import render_ladder

    rows = ladder_rows(cfg.spec, cfg.ratios, cfg.m, cfg.particles, cfg.seed)
    s = cfg.spec
    render_ladder(rows, cfg.out or "supports.svg", title=f"n={s.n}, d={s.d}, T={s.T:g}")
    dump_json({"path": cfg.out or "supports.svg",
               "ratios": list(cfg.ratios),
               "rotated_components": [row[2].n_components for row in rows]}, None)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "boundary": cmd_boundary,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "render": cmd_render,
}


# -- argument handling --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values (flags override it)")
    common.add_argument("--n", type=int)
    common.add_argument("--d", type=int)
    common.add_argument("--T", type=float)
    common.add_argument("--t-re", type=float)
    common.add_argument("--t-im", type=float)
    common.add_argument("--out", help="output path ('-' or unset: stdout where applicable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="equilib", description="Equilibrium measures for |z|^{2n} - t z^d - conj(t z^d).")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("solve", parents=[common], help="regime and conformal-map parameters as JSON")

    p = sub.add_parser("boundary", parents=[common], help="sampled support boundary; --out is a file prefix")
    p.add_argument("--m", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--map", choices=("reduced", "rotated", "both"))

    p = sub.add_parser("verify", parents=[common], help="certify mass and variational conditions")
    p.add_argument("--alpha-scale", type=float, help="multiply alpha before verifying (negative control)")
    p.add_argument("--mass-nodes", type=int)

    p = sub.add_parser("sweep", parents=[common], help="parameters over |t| in [0, 2 t_cr] as CSV")
    p.add_argument("--points", type=int)
    p.add_argument("--mass-nodes", type=int)
    p.add_argument("--plot", help="optional SVG of r and |alpha| against |t|")

    p = sub.add_parser("simulate", parents=[common], help="Coulomb-gas oracle run")
    p.add_argument("--N", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--report", help="coverage report JSON path (default stdout)")
    p.add_argument("--plot", help="optional SVG of particles over the predicted support")

    p = sub.add_parser("render", parents=[common], help="SVG ladder of reduced and rotated supports")
    p.add_argument("--m", type=int)
    p.add_argument("--ratios", type=float, nargs="+", help="|t|/t_cr per row")
    p.add_argument("--particles", type=int, help="overlay an N-particle gas per row (0: none)")
    p.add_argument("--seed", type=int)
    return parser


def resolve(args: argparse.Namespace) -> RunConfig:
    config = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
        if not isinstance(config, dict):
            raise ValueError("config file must hold a JSON object")
    config = {key.replace("-", "_"): value for key, value in config.items()}
    keys = (set(vars(args)) | set(DEFAULTS)) - {"command", "config", "verbose"}
    merged = {}
    for key in keys:
        value = getattr(args, key, None)
        merged[key] = value if value is not None else config.get(key, DEFAULTS.get(key))
    spec = params.ProblemSpec(int(merged.pop("n")), int(merged.pop("d")), float(merged.pop("T")),
                              complex(merged.pop("t_re"), merged.pop("t_im")))
    return RunConfig(spec, merged, merged.pop("out", None), merged.pop("plot", None), merged.pop("report", None))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SelfIntersection as exc:
        print(f"error: SelfIntersection: {exc}", file=sys.stderr)
        return EXIT_SELF_INTERSECTION
    except NonConvergence as exc:
        print(f"error: NonConvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except EquilibError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
