"""Text formats: map files, CSV tables and JSON reports.

Every file written here starts with a provenance comment
``# cpwalk config_hash=<hash> seed=<seed> ...`` so that an artifact can be
traced to the run that produced it.  Floats are written with ``repr`` so a
read-back is bit-identical.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from .maps import PlanarMap
from .packer import Packing, tangency_residual
from .walker import Trajectory

HEADER = "PLANARMAP v1"


def config_hash(config: dict) -> str:
    """Hash of the canonical JSON form of a config (output paths excluded)."""
    clean = {k: v for k, v in config.items() if k != "output_dir"}
    blob = json.dumps(clean, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _meta_line(meta: dict | None) -> str:
    if not meta:
        return ""
    parts = " ".join(f"{k}={meta[k]}" for k in sorted(meta))
    return f"# cpwalk {parts}\n"


def _parse_meta(line: str) -> dict:
    out = {}
    for tok in line[len("# cpwalk"):].split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    return out


def _strip_meta(text: str) -> tuple[dict, list[str]]:
    meta, lines = {}, []
    for line in text.splitlines():
        if line.startswith("# cpwalk"):
            meta.update(_parse_meta(line))
        elif line.startswith("#") or not line.strip():
            continue
        else:
            lines.append(line)
    return meta, lines


def _write(path, text: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


# -----------------------------------------------------------------------------
# Map files


def format_map(m: PlanarMap, weights: dict | None = None, meta: dict | None = None) -> str:
    """Map file text; ``weights`` maps edge ids (lower dart index) to weights."""
    out = [_meta_line(meta), f"{HEADER} {m.n_vertices} {m.n_edges}\n"]
    if m.boundary_dart is not None:
        out.append("BOUNDARY " + " ".join(str(v) for v in m.boundary_walk) + "\n")
    for v in range(m.n_vertices):
        out.append(f"{v}: " + " ".join(str(u) for u in m.neighbors(v)) + "\n")
    if weights:
        out.append("WEIGHTS\n")
        for e in sorted(weights):
            out.append(f"{int(m.tail[e])} {int(m.head[e])} {float(weights[e])!r}\n")
    return "".join(out)


def parse_map(text: str) -> tuple[PlanarMap, dict | None, dict]:
    """Inverse of ``format_map``: (map, weights or None, provenance)."""
    meta, lines = _strip_meta(text)
    if not lines or not lines[0].startswith(HEADER):
        raise ValueError("missing 'PLANARMAP v1' header")
    head = lines[0].split()
    n, n_edges = int(head[2]), int(head[3])
    boundary = None
    rows: dict[int, list[int]] = {}
    weight_lines = []
    in_weights = False
    for line in lines[1:]:
        if line.startswith("BOUNDARY"):
            boundary = [int(x) for x in line.split()[1:]]
        elif line.strip() == "WEIGHTS":
            in_weights = True
        elif in_weights:
            u, v, w = line.split()
            weight_lines.append((int(u), int(v), float(w)))
        else:
            vid, rest = line.split(":", 1)
            rows[int(vid)] = [int(x) for x in rest.split()]
    if sorted(rows) != list(range(n)):
        raise ValueError("vertex lines must cover ids 0..V-1")
    m = PlanarMap([rows[v] for v in range(n)], boundary=boundary)
    if m.n_edges != n_edges:
        raise ValueError(f"header says {n_edges} edges, rotations give {m.n_edges}")
    weights = None
    if weight_lines:
        weights = {}
        free: dict[tuple[int, int], list[int]] = {}
        for e in m.edge_darts():
            key = tuple(sorted((int(m.tail[e]), int(m.head[e]))))
            free.setdefault(key, []).append(int(e))
        for u, v, w in weight_lines:
            key = tuple(sorted((u, v)))
            if not free.get(key):
                raise ValueError(f"weight for missing edge {u}-{v}")
            weights[free[key].pop(0)] = w
    return m, weights, meta


def write_map(path, m: PlanarMap, weights=None, meta=None):
    _write(path, format_map(m, weights, meta))


def read_map(path):
    return parse_map(Path(path).read_text())


# -----------------------------------------------------------------------------
# CSV tables


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else repr(float(x))
    return str(x)


def format_csv(columns: list[str], rows, meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(_meta_line(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def parse_csv(text: str) -> tuple[dict, list[str], list[list[str]]]:
    meta, lines = _strip_meta(text)
    rows = list(csv.reader(lines))
    return meta, rows[0], rows[1:]


def packing_rows(p: Packing):
    plane = p.geometry == "plane"
    for v in range(p.n):
        c = p.centers[v]
        if plane:
            yield (v, c.real, c.imag, p.radii[v], "", "", "")
        else:
            hc, hr = p.hyp_centers[v], p.hyp_radii[v]
            if math.isinf(hr):
                yield (v, c.real, c.imag, p.radii[v], "", "", "inf")
            else:
                yield (v, c.real, c.imag, p.radii[v], hc.real, hc.imag, hr)


PACKING_COLUMNS = ["vertex", "x", "y", "r", "xh", "yh", "rh"]


def write_packing_csv(path, p: Packing, meta=None):
    meta = dict(meta or {})
    meta["normalization"] = f"{p.normalization[0]},{p.normalization[1]}"
    _write(path, format_csv(PACKING_COLUMNS, packing_rows(p), meta))


def read_packing(path, m: PlanarMap) -> Packing:
    """Rebuild a ``Packing`` on ``m`` from its CSV (no solver report)."""
    meta, cols, rows = parse_csv(Path(path).read_text())
    if cols != PACKING_COLUMNS:
        raise ValueError(f"unexpected packing columns {cols}")
    n = len(rows)
    if n != m.n_vertices:
        raise ValueError("packing and map sizes differ")
    z = np.empty(n, complex)
    r = np.empty(n)
    hz = np.full(n, np.nan + 0j)
    hr = np.full(n, np.nan)
    plane = True
    for row in rows:
        v = int(row[0])
        z[v] = float(row[1]) + 1j * float(row[2])
        r[v] = float(row[3])
        if row[6]:
            plane = False
            hr[v] = float(row[6])
            hz[v] = (float(row[4]) + 1j * float(row[5])) if row[4] else np.nan
    geometry = "plane" if plane else "disc"
    norm = tuple(int(x) for x in meta.get("normalization", "0,0").split(","))
    return Packing(m, geometry, z, r, hz, hr, norm, tangency_residual(m, z, r), None)


def write_coords_csv(path, coords: np.ndarray, meta=None):
    rows = ((v, c.real, c.imag) for v, c in enumerate(coords))
    _write(path, format_csv(["vertex", "x", "y"], rows, meta))


def read_coords_csv(path) -> np.ndarray:
    _, _, rows = parse_csv(Path(path).read_text())
    out = np.empty(len(rows), complex)
    for row in rows:
        out[int(row[0])] = float(row[1]) + 1j * float(row[2])
    return out


def write_trajectory_csv(path, traj: Trajectory, meta=None):
    meta = dict(meta or {})
    meta.update(seed=traj.seed, stream=",".join(str(s) for s in traj.stream))
    _write(path, format_csv(["step", "vertex"], enumerate(traj.vertices.tolist()), meta))


def read_trajectory_csv(path) -> Trajectory:
    meta, cols, rows = parse_csv(Path(path).read_text())
    if cols != ["step", "vertex"]:
        raise ValueError(f"unexpected trajectory columns {cols}")
    verts = np.array([int(r[1]) for r in rows], dtype=np.int64)
    stream = tuple(int(s) if s.isdigit() else s for s in meta.get("stream", "").split(",") if s)
    seed = int(meta["seed"]) if "seed" in meta else None
    return Trajectory(int(verts[0]), verts, seed, stream)


# -----------------------------------------------------------------------------
# JSON reports


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def format_report(record: dict, meta: dict | None = None) -> str:
    out = {"provenance": meta or {}, **_jsonable(record)}
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def write_report(path, record: dict, meta=None):
    _write(path, format_report(record, meta))
