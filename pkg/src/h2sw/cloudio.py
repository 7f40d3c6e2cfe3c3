"""Plain-text cloud files, dataset manifests, and CSV emission.

Cloud format, one distribution per file:

    H2SW-CLOUD v1; K=2; spec_1=euclidean,3; spec_2=sphere,3; n=4
    <row of block-1 coords, block-2 coords, optional trailing weight>
    ...

Rows are whitespace-separated reals; the weight column is all-or-nothing
(omitted means uniform). The format is diffable and trivial to generate
from mesh-sampling tools. Every parse failure reports file, line, and
reason.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import CloudFormatError
from .compare import DatasetCollection
from .geometry import (
    LORENTZ,
    SPHERE,
    JointCloud,
    SpaceSpec,
    lorentz_inner,
)

MAGIC = "H2SW-CLOUD"
VERSION = "v1"
_KIND_ALIASES = {"euclidean": "euclidean", "sphere": "sphere", "lorentz": "lorentz"}


def _parse_header(line: str, path) -> tuple:
    fields = [f.strip() for f in line.split(";")]
    if not fields or fields[0].split() != [MAGIC, VERSION]:
        raise CloudFormatError(
            f"expected header starting with '{MAGIC} {VERSION}'", path, 1
        )
    kv = {}
    for f in fields[1:]:
        if not f:
            continue
        if "=" not in f:
            raise CloudFormatError(f"malformed header field {f!r}", path, 1)
        key, val = (s.strip() for s in f.split("=", 1))
        kv[key] = val
    try:
        K = int(kv["K"])
        n = int(kv["n"])
    except (KeyError, ValueError) as exc:
        raise CloudFormatError(f"header must carry integer K and n ({exc})", path, 1)
    if K < 1 or n < 1:
        raise CloudFormatError(f"K and n must be positive (K={K}, n={n})", path, 1)
    specs = []
    for k in range(1, K + 1):
        raw = kv.get(f"spec_{k}")
        if raw is None:
            raise CloudFormatError(f"missing spec_{k} in header", path, 1)
        parts = [s.strip() for s in raw.split(",")]
        if len(parts) != 2:
            raise CloudFormatError(f"spec_{k} must be '<kind>,<dim>', got {raw!r}", path, 1)
        kind = _KIND_ALIASES.get(parts[0].lower())
        if kind is None:
            raise CloudFormatError(f"spec_{k}: unknown space kind {parts[0]!r}", path, 1)
        try:
            dim = int(parts[1])
        except ValueError:
            raise CloudFormatError(f"spec_{k}: dimension {parts[1]!r} is not an integer", path, 1)
        try:
            specs.append(SpaceSpec(kind, dim))
        except Exception as exc:
            raise CloudFormatError(f"spec_{k}: {exc}", path, 1)
    return specs, n


def read_cloud(path) -> JointCloud:
    """Parse one cloud file; raises CloudFormatError with diagnostics."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CloudFormatError("empty file", path, 1)
    specs, n = _parse_header(lines[0], path)
    widths = [s.ambient_dim for s in specs]
    total = sum(widths)
    rows = []
    weights = []
    has_weights = None
    lineno = 1
    for raw in lines[1:]:
        lineno += 1
        if not raw.strip():
            continue
        parts = raw.split()
        try:
            vals = [float(v) for v in parts]
        except ValueError as exc:
            raise CloudFormatError(f"non-numeric value ({exc})", path, lineno)
        row_has_weight = len(vals) == total + 1
        if not row_has_weight and len(vals) != total:
            raise CloudFormatError(
                f"expected {total} coordinates (+1 optional weight), got {len(vals)}",
                path, lineno,
            )
        if has_weights is None:
            has_weights = row_has_weight
        elif has_weights != row_has_weight:
            raise CloudFormatError(
                "weight column must be present on every row or on none", path, lineno
            )
        if row_has_weight:
            weights.append(vals[-1])
            vals = vals[:total]
        rows.append((lineno, vals))
    if len(rows) != n:
        raise CloudFormatError(
            f"header declares n={n} but file has {len(rows)} data rows", path, lineno
        )
    data = np.array([vals for _, vals in rows])
    blocks = []
    col = 0
    for k, (spec, w) in enumerate(zip(specs, widths)):
        block = data[:, col : col + w]
        col += w
        _check_rows(block, spec, [ln for ln, _ in rows], path, k)
        blocks.append(block)
    wvec = None
    if has_weights:
        wvec = np.array(weights)
        bad = wvec < 0
        if np.any(bad):
            raise CloudFormatError("negative weight", path, rows[int(np.argmax(bad))][0])
        s = float(wvec.sum())
        if abs(s - 1.0) > 1e-6:
            raise CloudFormatError(f"weights sum to {s:.9g}, expected 1", path, lineno)
        wvec = wvec / s
    return JointCloud(tuple(blocks), tuple(specs), wvec)


def _check_rows(block, spec, linenos, path, k):
    if spec.kind == SPHERE:
        bad = np.abs(np.linalg.norm(block, axis=1) - 1.0) > 1e-9
        msg = f"block {k + 1}: sphere row is not unit norm"
    elif spec.kind == LORENTZ:
        bad = (np.abs(lorentz_inner(block, block) + 1.0) > 1e-6) | (block[:, 0] <= 0)
        msg = f"block {k + 1}: row is not on the Lorentz upper sheet"
    else:
        bad = ~np.isfinite(block).all(axis=1)
        msg = f"block {k + 1}: non-finite coordinate"
    if np.any(bad):
        raise CloudFormatError(msg, path, linenos[int(np.argmax(bad))])


def write_cloud(path, cloud: JointCloud) -> None:
    """Write a cloud in the v1 format; weights column only when non-uniform."""
    specs = "; ".join(
        f"spec_{k + 1}={s.kind},{s.dim}" for k, s in enumerate(cloud.specs)
    )
    data = cloud.concat()
    include_weights = not cloud.is_uniform
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{MAGIC} {VERSION}; K={cloud.num_marginals}; {specs}; n={cloud.n}\n")
        for i in range(cloud.n):
            cols = [f"{v:.17g}" for v in data[i]]
            if include_weights:
                cols.append(f"{cloud.weights[i]:.17g}")
            fh.write(" ".join(cols) + "\n")


def load_manifest(path) -> DatasetCollection:
    """JSON manifest {"datasets": [{"name": ..., "path": ...}, ...]};
    cloud paths resolve relative to the manifest's directory."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CloudFormatError(f"invalid JSON: {exc}", path, exc.lineno)
    entries = doc.get("datasets") if isinstance(doc, dict) else None
    if not isinstance(entries, list) or not entries:
        raise CloudFormatError('manifest needs a non-empty "datasets" list', path, 1)
    base = os.path.dirname(os.path.abspath(path))
    names, clouds = [], []
    for idx, e in enumerate(entries):
        if not isinstance(e, dict) or "name" not in e or "path" not in e:
            raise CloudFormatError(
                f'datasets[{idx}] needs "name" and "path" keys', path, 1
            )
        names.append(str(e["name"]))
        cloud_path = e["path"]
        if not os.path.isabs(cloud_path):
            cloud_path = os.path.join(base, cloud_path)
        clouds.append(read_cloud(cloud_path))
    return DatasetCollection(tuple(names), tuple(clouds))


def write_matrix_csv(path, names, matrix) -> None:
    """Cost matrix as CSV: header row of dataset names, one row per dataset."""
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("," + ",".join(names) + "\n")
        for name, row in zip(names, matrix):
            fh.write(name + "," + ",".join(f"{v:.17g}" for v in row) + "\n")


def write_trace_csv(path, trace) -> None:
    """FlowTrace checkpoints as CSV columns step, exact_w, loss, exact_oracle."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("step,exact_w,loss,exact_oracle\n")
        for c in trace.checkpoints:
            fh.write(f"{c.step},{c.exact_w:.17g},{c.loss:.17g},{int(c.exact)}\n")
