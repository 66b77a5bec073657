"""Command line front end: ``cpwalk sample|pack|walk|analyze|render|experiment``.

Exit codes: 0 success, 1 other library error, 2 config error, 3 numerical
non-convergence, 4 statistical-check failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as cio
from .analysis import (angle_transport_report, collar_mask, estimate_speed, exit_angles,
                       exit_histogram)
from .errors import (ConfigError, CPWalkError, LayoutInconsistent, NoConvergence,
                     UnconvergedPacking)
from .hypgeo import DISC, PLANE
from .maps import ends_profile
from .packer import PackingProblem, SolverConfig, layout, solve_radii
from .render import packing_svg
from .samplers import SampleWindow, poisson_delaunay_hyp, regular_triangulation
from .walker import WeightedGraphView, run_walks

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_STATISTICS = 0, 1, 2, 3, 4


# -----------------------------------------------------------------------------
# Config


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    seed: int
    d: int = 7
    generations: int = 4
    lam: float = 1.0
    R: float = 6.0
    margin: float = 2.0
    path: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "GeneratorSpec":
        if not isinstance(raw, dict):
            raise ConfigError("generator must be an object")
        kind = raw.get("kind")
        if kind not in ("regular", "poisson_delaunay", "file"):
            raise ConfigError(f"unknown generator kind {kind!r}")
        if "seed" not in raw or raw["seed"] is None:
            raise ConfigError("generator.seed is required (no wall-clock seeding)")
        spec = cls(kind=kind, seed=int(raw["seed"]), d=int(raw.get("d", 7)),
                   generations=int(raw.get("generations", 4)), lam=float(raw.get("lambda", 1.0)),
                   R=float(raw.get("R", 6.0)), margin=float(raw.get("margin", 2.0)),
                   path=raw.get("path"))
        if kind == "file" and (spec.path is None or not Path(spec.path).exists()):
            raise ConfigError(f"generator.path {spec.path!r} does not exist")
        if kind == "regular" and (spec.d < 6 or spec.generations < 1):
            raise ConfigError("regular generator needs d >= 6 and generations >= 1")
        if kind == "poisson_delaunay" and not (spec.lam > 0 and 0 < spec.margin < spec.R):
            raise ConfigError("poisson_delaunay needs lambda > 0 and 0 < margin < R")
        return spec


@dataclass(frozen=True)
class WalkSpec:
    walks: int = 100
    steps: int = 200
    seed: int = 0
    start: int | None = None  # default: the sample root

    @classmethod
    def from_dict(cls, raw: dict) -> "WalkSpec":
        if "seed" not in raw or raw["seed"] is None:
            raise ConfigError("walk.seed is required (no wall-clock seeding)")
        spec = cls(int(raw.get("walks", 100)), int(raw.get("steps", 200)), int(raw["seed"]),
                   raw.get("start"))
        if spec.walks < 1 or spec.steps < 0:
            raise ConfigError("walk.walks must be >= 1 and walk.steps >= 0")
        return spec


@dataclass(frozen=True)
class AnalysisSpec:
    burn_in: float = 0.4
    collar: int = 2
    eps: float = 1e-3
    level: int = 6
    thresholds: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "AnalysisSpec":
        spec = cls(float(raw.get("burn_in", 0.4)), int(raw.get("collar", 2)), float(raw.get("eps", 1e-3)),
                   int(raw.get("level", 6)), dict(raw.get("thresholds", {})))
        if not 0 <= spec.burn_in < 1:
            raise ConfigError("analysis.burn_in must lie in [0, 1)")
        known = {"speed_sigma", "positive_speed", "decay_zero", "max_arc_mass"}
        unknown = set(spec.thresholds) - known
        if unknown:
            raise ConfigError(f"unknown thresholds {sorted(unknown)}")
        return spec


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorSpec
    solver: SolverConfig
    geometry: str
    walk: WalkSpec
    analysis: AnalysisSpec
    output_dir: str
    raw: dict = field(repr=False, compare=False, default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "generator" not in raw:
            raise ConfigError("config needs a generator")
        gen = GeneratorSpec.from_dict(raw["generator"])
        pk = dict(raw.get("packing", {}))
        default_geom = PLANE if gen.kind == "regular" and gen.d == 6 else DISC
        geometry = pk.pop("geometry", default_geom)
        if geometry not in (PLANE, DISC):
            raise ConfigError(f"unknown geometry {geometry!r}")
        try:
            solver = SolverConfig(**pk)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad packing config: {exc}") from exc
        walk = WalkSpec.from_dict(raw.get("walk", {"seed": gen.seed}))
        analysis = AnalysisSpec.from_dict(raw.get("analysis", {}))
        return cls(gen, solver, geometry, walk, analysis, str(raw.get("output_dir", "run")), raw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file {path} not found") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    @property
    def hash(self) -> str:
        return cio.config_hash(self.raw)


# -----------------------------------------------------------------------------
# Stages


def stage_sample(gen: GeneratorSpec, out: Path, meta: dict) -> dict:
    coords = None
    if gen.kind == "regular":
        m = regular_triangulation(gen.d, gen.generations)
        root = 0
    elif gen.kind == "poisson_delaunay":
        s = poisson_delaunay_hyp(gen.lam, SampleWindow(gen.R, gen.margin), seed=gen.seed)
        m, root, coords = s.map.map, s.map.root, s.coords
    else:
        m, _, _ = cio.read_map(gen.path)
        root = 0
    cio.write_map(out / "map.txt", m, meta=meta)
    if coords is not None:
        cio.write_coords_csv(out / "coords.csv", coords, meta=meta)
    info = {"n_vertices": m.n_vertices, "n_edges": m.n_edges, "root": root,
            "boundary_length": len(m.boundary_walk) if m.boundary_dart is not None else 0}
    # balls that come within 2 hops of the window boundary cut the annulus for any window
    dist = m.distances(root)
    bmask = m.boundary_mask()
    reach = int(dist[bmask].min()) if bmask.any() else int(dist.max())
    ends = ends_profile(m, root, range(max(reach - 2, 0)))
    info["ends"] = {"radii": list(ends.radii), "large_components": list(ends.large_components),
                    "min_size": ends.min_size, "looks_one_ended": ends.looks_one_ended}
    cio.write_report(out / "sample.json", info, meta)
    return info


def stage_pack(m, geometry: str, solver: SolverConfig, root: int, out: Path, meta: dict):
    problem = PackingProblem(m, geometry)
    radii, rep = solve_radii(problem, solver, raise_on_failure=False)
    record = {"iters": rep.iters, "final_defect": rep.final_defect, "converged": rep.converged}
    if not rep.converged:
        cio.write_report(out / "pack_report.json", {**record, "residual": None}, meta)
        raise NoConvergence("packing solve did not converge", rep.final_defect, rep.iters)
    if geometry == DISC and m.boundary_mask()[root]:
        root = int(np.nonzero(~m.boundary_mask())[0][0])
    p = layout(problem, radii, root=root, tol=solver.tol, report=rep)
    record["residual"] = p.tangency_residual
    cio.write_packing_csv(out / "packing.csv", p, meta)
    cio.write_report(out / "pack_report.json", record, meta)
    return p


def stage_walk(m, start: int, spec: WalkSpec, collar: int, out: Path, meta: dict):
    view = WeightedGraphView.from_map(m)
    stop = collar_mask(m, collar) if m.boundary_dart is not None else None
    trajs = run_walks(view, [start] * spec.walks, spec.steps, spec.seed, stop=stop)
    tdir = out / "trajectories"
    for i, t in enumerate(trajs):
        cio.write_trajectory_csv(tdir / f"traj_{i:05d}.csv", t, meta)
    return trajs


def stage_analyze(p, trajs, spec: AnalysisSpec, out: Path, meta: dict) -> tuple[dict, dict]:
    report: dict = {}
    checks: dict = {}
    th = spec.thresholds
    try:
        est = estimate_speed(p, trajs, burn_in=spec.burn_in, collar=spec.collar)
        report["speed"] = est.as_dict()
        rows = zip(range(len(est.speed_slopes)), est.speed_slopes, est.decay_slopes)
        (out / "slopes.csv").write_text(cio.format_csv(["trajectory", "speed_slope", "decay_slope"], rows, meta))
        if "speed_sigma" in th and p.geometry == DISC:
            checks["speed_agreement"] = bool(est.agree(float(th["speed_sigma"])))
        if th.get("positive_speed"):
            checks["positive_speed"] = bool(est.speed_hyp > 0 and est.decay_rate > 0)
        if th.get("decay_zero"):
            checks["decay_zero"] = est.decay_rate == 0.0
    except CPWalkError as exc:
        report["speed"] = {"error": str(exc)}
    if p.geometry == DISC:
        ang = exit_angles(p, trajs, spec.eps)
        conv = np.isfinite(ang)
        report["exit"] = {"eps": spec.eps, "converged_fraction": float(conv.mean())}
        if conv.any():
            h = exit_histogram(ang, spec.level)
            report["exit"]["histogram"] = h.as_dict()
            if "max_arc_mass" in th:
                checks["max_arc_mass"] = h.max_arc_mass < float(th["max_arc_mass"])
    try:
        tr = angle_transport_report(p, collar=spec.collar)
        report["transport"] = tr.as_dict()
    except CPWalkError as exc:
        report["transport"] = {"error": str(exc)}
    report["checks"] = checks
    cio.write_report(out / "report.json", report, meta)
    return report, checks


def run_experiment(cfg: ExperimentConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"config_hash": cfg.hash, "seed": cfg.generator.seed}
    replay = {k: v for k, v in cfg.raw.items() if k != "output_dir"}
    (out / "config.json").write_text(json.dumps(replay, indent=2, sort_keys=True) + "\n")
    info = stage_sample(cfg.generator, out, meta)
    m, _, _ = cio.read_map(out / "map.txt")
    p = stage_pack(m, cfg.geometry, cfg.solver, info["root"], out, meta)
    start = cfg.walk.start if cfg.walk.start is not None else p.normalization[0]
    wmeta = {**meta, "walk_seed": cfg.walk.seed}
    trajs = stage_walk(m, start, cfg.walk, cfg.analysis.collar, out, wmeta)
    _, checks = stage_analyze(p, trajs, cfg.analysis, out, meta)
    (out / "packing.svg").write_text(packing_svg(p, edges=True))
    return EXIT_OK if all(checks.values()) else EXIT_STATISTICS


# -----------------------------------------------------------------------------
# Argument parsing


def _solver_from_args(a) -> SolverConfig:
    try:
        return SolverConfig(tol=a.tol, max_iters=a.max_iters, damping=a.damping, schedule=a.schedule)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cpwalk", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="generate a triangulation from a config")
    s.add_argument("config", help="experiment config (JSON)")
    s.add_argument("--out", default=None, help="output directory (default: the config's output_dir)")

    s = sub.add_parser("pack", help="circle-pack a map file")
    s.add_argument("map", help="map file")
    s.add_argument("--geometry", choices=[PLANE, DISC], default=DISC,
                   help="disc: boundary circles are horocycles; plane: unit boundary radii")
    s.add_argument("--tol", type=float, default=1e-11, help="angle-sum defect target")
    s.add_argument("--max-iters", type=int, default=20000, help="sweep budget (exit code 3 if exceeded)")
    s.add_argument("--damping", type=float, default=1.0, help="update damping in (0, 1]")
    s.add_argument("--schedule", choices=["jacobi", "gauss_seidel"], default="jacobi")
    s.add_argument("--root", type=int, default=0, help="vertex placed at the origin")
    s.add_argument("--out", default=".", help="directory for packing.csv and pack_report.json")

    s = sub.add_parser("walk", help="simple random walks on a map file")
    s.add_argument("map", help="map file")
    s.add_argument("--seed", type=int, required=True, help="walk seed (required)")
    s.add_argument("--start", type=int, default=0, help="start vertex")
    s.add_argument("--walks", type=int, default=10)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--collar", type=int, default=2, help="walks stop within this many hops of the boundary")
    s.add_argument("--out", default=".", help="trajectories are written to OUT/trajectories")

    s = sub.add_parser("analyze", help="speed, exit and transport reports")
    s.add_argument("map", help="map file")
    s.add_argument("packing", help="packing CSV")
    s.add_argument("trajectories", nargs="+", help="trajectory CSVs")
    s.add_argument("--burn-in", type=float, default=0.4, help="fraction of each trajectory skipped by slope fits")
    s.add_argument("--collar", type=int, default=2, help="boundary collar width in hops")
    s.add_argument("--eps", type=float, default=1e-3, help="exit threshold on 1 - |z|")
    s.add_argument("--level", type=int, default=6, help="dyadic level of the exit histogram")
    s.add_argument("--out", default=".", help="directory for report.json and slopes.csv")

    s = sub.add_parser("render", help="SVG drawing of a packing")
    s.add_argument("map", help="map file")
    s.add_argument("packing", help="packing CSV")
    s.add_argument("--edges", action="store_true", help="also draw edges (geodesics in the disc)")
    s.add_argument("--out", default="packing.svg")

    s = sub.add_parser("experiment", help="run every stage from one config")
    s.add_argument("config", help="experiment config (JSON)")
    s.add_argument("--out", default=None, help="output directory (default: the config's output_dir)")
    return ap


def _dispatch(a) -> int:
    if a.command == "sample":
        cfg = ExperimentConfig.load(a.config)
        out = Path(a.out or cfg.output_dir)
        stage_sample(cfg.generator, out, {"config_hash": cfg.hash, "seed": cfg.generator.seed})
        return EXIT_OK
    if a.command == "experiment":
        cfg = ExperimentConfig.load(a.config)
        if a.out:
            cfg = ExperimentConfig.from_dict({**cfg.raw, "output_dir": a.out})
        return run_experiment(cfg)
    if a.command == "pack":
        m, _, meta = cio.read_map(a.map)
        stage_pack(m, a.geometry, _solver_from_args(a), a.root, Path(a.out), meta)
        return EXIT_OK
    if a.command == "walk":
        m, _, meta = cio.read_map(a.map)
        spec = WalkSpec(a.walks, a.steps, a.seed, a.start)
        stage_walk(m, a.start, spec, a.collar, Path(a.out), {**meta, "walk_seed": a.seed})
        return EXIT_OK
    if a.command == "analyze":
        m, _, meta = cio.read_map(a.map)
        p = cio.read_packing(a.packing, m)
        trajs = [cio.read_trajectory_csv(t) for t in a.trajectories]
        spec = AnalysisSpec(a.burn_in, a.collar, a.eps, a.level)
        Path(a.out).mkdir(parents=True, exist_ok=True)
        stage_analyze(p, trajs, spec, Path(a.out), meta)
        return EXIT_OK
    if a.command == "render":
        m, _, _ = cio.read_map(a.map)
        p = cio.read_packing(a.packing, m)
        Path(a.out).write_text(packing_svg(p, edges=a.edges))
        return EXIT_OK
    raise ConfigError(f"unknown command {a.command}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoConvergence, UnconvergedPacking, LayoutInconsistent) as exc:
        defect = getattr(exc, "defect", math.nan)
        print(f"not converged: {exc} (defect {defect:.3e})", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (CPWalkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
