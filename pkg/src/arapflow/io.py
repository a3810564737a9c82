"""File formats: PLY point clouds, raw float32 arrays, and JSON reports.

On disk everything is float32 (sensor precision); in memory everything is
float64. PLY supports ascii and binary_little_endian 1.0 with vertex
properties x, y, z and optional flow_x, flow_y, flow_z (float32) and
label (int32), in that order. The raw format is a headerless
little-endian float32 row-major dump.
"""

from __future__ import annotations

import json
import warnings

import numpy as np

from .core import FlowField, PointCloud

_PLY_TYPES = {
    "float": ("<f4", 4), "float32": ("<f4", 4),
    "double": ("<f8", 8), "float64": ("<f8", 8),
    "int": ("<i4", 4), "int32": ("<i4", 4),
    "uint": ("<u4", 4), "uint32": ("<u4", 4),
    "short": ("<i2", 2), "int16": ("<i2", 2),
    "ushort": ("<u2", 2), "uint16": ("<u2", 2),
    "char": ("<i1", 1), "int8": ("<i1", 1),
    "uchar": ("<u1", 1), "uint8": ("<u1", 1),
}


class PlyParseError(ValueError):
    """Malformed PLY input; carries the offending line or byte offset."""

    def __init__(self, message, where=None):
        if where is not None:
            message = f"{message} ({where})"
        super().__init__(message)


def read_ply(path):
    """Read a PLY point cloud.

    Returns (PointCloud, FlowField or None, labels ndarray or None).
    Unknown vertex properties are skipped with a warning.
    """
    with open(path, "rb") as f:
        header = []
        while True:
            line = f.readline()
            if not line:
                raise PlyParseError("unexpected EOF in header",
                                    where=f"line {len(header) + 1}")
            text = line.decode("ascii", errors="replace").strip()
            header.append(text)
            if text == "end_header":
                break

        if not header or header[0] != "ply":
            raise PlyParseError("missing 'ply' magic", where="line 1")

        fmt = None
        count = None
        props = []
        element = None
        for lineno, text in enumerate(header, start=1):
            parts = text.split()
            if not parts or parts[0] == "comment":
                continue
            if parts[0] == "format":
                if parts[1] not in ("ascii", "binary_little_endian"):
                    raise PlyParseError(
                        f"unsupported format {parts[1]!r}", where=f"line {lineno}")
                fmt = parts[1]
            elif parts[0] == "element":
                element = parts[1]
                if element == "vertex":
                    count = int(parts[2])
            elif parts[0] == "property" and element == "vertex":
                if parts[1] == "list":
                    raise PlyParseError("list properties not supported",
                                        where=f"line {lineno}")
                if parts[1] not in _PLY_TYPES:
                    raise PlyParseError(f"unknown property type {parts[1]!r}",
                                        where=f"line {lineno}")
                props.append((parts[2], parts[1]))

        if fmt is None or count is None:
            raise PlyParseError("header lacks format or vertex element")
        names = [name for name, _ in props]
        if names[:3] != ["x", "y", "z"]:
            raise PlyParseError("vertex element must start with x, y, z")
        known = {"x", "y", "z", "flow_x", "flow_y", "flow_z", "label"}
        for name in names:
            if name not in known:
                warnings.warn(f"skipping unknown PLY property {name!r}")

        dtype = np.dtype([(name, _PLY_TYPES[t][0]) for name, t in props])
        if fmt == "ascii":
            rows = []
            for i in range(count):
                line = f.readline()
                if not line:
                    raise PlyParseError("vertex count mismatch",
                                        where=f"vertex {i}")
                rows.append(tuple(line.decode("ascii").split()[:len(props)]))
            data = np.array(rows, dtype=dtype)
        else:
            buf = f.read(count * dtype.itemsize)
            if len(buf) != count * dtype.itemsize:
                raise PlyParseError("vertex count mismatch",
                                    where=f"byte offset {f.tell()}")
            data = np.frombuffer(buf, dtype=dtype)

    xyz = np.stack([data["x"], data["y"], data["z"]], axis=1).astype(np.float64)
    if not np.all(np.isfinite(xyz)):
        raise PlyParseError("non-finite vertex coordinates")
    cloud = PointCloud(xyz)

    flow = None
    if {"flow_x", "flow_y", "flow_z"} <= set(names):
        fl = np.stack([data["flow_x"], data["flow_y"], data["flow_z"]],
                      axis=1).astype(np.float64)
        flow = FlowField(fl)
    labels = np.asarray(data["label"], dtype=np.int32) if "label" in names else None
    return cloud, flow, labels


def write_ply(path, cloud: PointCloud, flow: FlowField = None, labels=None,
              binary: bool = False):
    """Write a point cloud (optionally with flow and labels) as PLY."""
    n = len(cloud)
    if flow is not None and len(flow) != n:
        raise ValueError("flow length does not match cloud")
    if labels is not None and len(labels) != n:
        raise ValueError("labels length does not match cloud")

    fields = [("x", "<f4"), ("y", "<f4"), ("z", "<f4")]
    if flow is not None:
        fields += [("flow_x", "<f4"), ("flow_y", "<f4"), ("flow_z", "<f4")]
    if labels is not None:
        fields += [("label", "<i4")]
    data = np.zeros(n, dtype=np.dtype(fields))
    data["x"], data["y"], data["z"] = cloud.points.astype(np.float32).T
    if flow is not None:
        fl = flow.vectors.astype(np.float32)
        data["flow_x"], data["flow_y"], data["flow_z"] = fl.T
    if labels is not None:
        data["label"] = np.asarray(labels, dtype=np.int32)

    header = ["ply",
              "format binary_little_endian 1.0" if binary else "format ascii 1.0",
              f"element vertex {n}"]
    for name, dt in fields:
        header.append(f"property {'int32' if dt == '<i4' else 'float32'} {name}")
    header.append("end_header")

    with open(path, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            f.write(data.tobytes())
        else:
            for row in data:
                f.write((" ".join(repr(float(row[name])) if dt != "<i4"
                                  else str(int(row[name]))
                                  for name, dt in fields) + "\n").encode("ascii"))


def read_raw_f32(path, rows: int, cols: int = 3) -> np.ndarray:
    """Read a headerless little-endian float32 row-major array."""
    if rows < 1:
        raise ValueError("rows must be >= 1")
    expected = rows * cols * 4
    with open(path, "rb") as f:
        buf = f.read()
    if len(buf) != expected:
        raise ValueError(
            f"file size {len(buf)} != expected {expected} bytes "
            f"for {rows}x{cols} float32")
    return np.frombuffer(buf, dtype="<f4").reshape(rows, cols).astype(np.float64)


def write_raw_f32(path, array) -> None:
    """Write an array as headerless little-endian float32, row-major."""
    arr = np.ascontiguousarray(np.asarray(array, dtype="<f4"))
    with open(path, "wb") as f:
        f.write(arr.tobytes())


def write_metrics_json(path, metrics, report=None, config=None) -> None:
    """Emit a metrics/solve report with a stable key order."""
    doc = metrics_document(metrics, report=report, config=config)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def metrics_document(metrics, report=None, config=None) -> dict:
    """Report dict with stable key order; metrics may be None."""
    doc = {}
    if metrics is not None:
        doc = {
            "epe": metrics.epe,
            "acc5": metrics.acc5,
            "acc10": metrics.acc10,
            "angle_err": metrics.angle_err,
        }
    if report is not None:
        doc["iterations"] = report.iterations_run
        doc["wall_time_s"] = report.wall_time
        doc["final_energy"] = report.loss_trace[-1].total
    if config is not None:
        doc["config"] = {
            "alpha": config.alpha, "lr": config.lr, "iters": config.iters,
            "k": config.k, "normalized_laplacian": config.normalized_laplacian,
            "beta1": config.beta1, "beta2": config.beta2, "eps": config.eps,
            "seed": config.seed, "chamfer_mode": config.chamfer_mode,
            "lr_decay": config.lr_decay,
        }
    return doc
