"""Mesh readers and writers: OFF and OBJ for surfaces, PLINE for curves.

PLINE is a plain-text closed polyline: one vertex per line, whitespace
separated coordinates, closure implicit.  Floats are written with repr(),
which round-trips binary64 exactly, so write -> read is bit-exact.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import IoError
from .mesh import DiscreteImmersion


def _fmt_row(row) -> str:
    return " ".join(repr(float(x)) for x in row)


def write_pline(path, s: DiscreteImmersion) -> None:
    if s.m != 1:
        raise IoError("PLINE stores curves only")
    lines = [_fmt_row(row) for row in s.vertices]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pline(path) -> DiscreteImmersion:
    rows = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                rows.append([float(tok) for tok in line.split()])
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read PLINE {path}: {exc}") from exc
    if not rows:
        raise IoError(f"empty PLINE file {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise IoError(f"ragged coordinate rows in {path}")
    return DiscreteImmersion(1, np.array(rows, dtype=np.float64))


def write_off(path, s: DiscreteImmersion) -> None:
    if s.m != 2:
        raise IoError("OFF stores surfaces only")
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{s.n_vertices} {len(s.faces)} 0\n")
        for row in s.vertices:
            fh.write(_fmt_row(row) + "\n")
        for f in s.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def read_off(path) -> DiscreteImmersion:
    try:
        with open(path) as fh:
            tokens = []
            for line in fh:
                body = line.split("#", 1)[0].strip()
                if body:
                    tokens.extend(body.split())
    except OSError as exc:
        raise IoError(f"cannot read OFF {path}: {exc}") from exc
    if not tokens or tokens[0] != "OFF":
        raise IoError(f"{path} is not an OFF file")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4
        verts = np.array(tokens[pos:pos + 3 * nv], dtype=np.float64).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise IoError(f"{path}: only triangle faces supported")
            faces.append([int(tokens[pos + 1]), int(tokens[pos + 2]), int(tokens[pos + 3])])
            pos += 4
    except (IndexError, ValueError) as exc:
        raise IoError(f"malformed OFF {path}: {exc}") from exc
    return DiscreteImmersion(2, verts, np.array(faces, dtype=np.int64))


def write_obj(path, s: DiscreteImmersion) -> None:
    if s.m != 2:
        raise IoError("OBJ stores surfaces only")
    with open(path, "w") as fh:
        for row in s.vertices:
            fh.write("v " + _fmt_row(row) + "\n")
        for f in s.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def read_obj(path) -> DiscreteImmersion:
    verts, faces = [], []
    try:
        with open(path) as fh:
            for line in fh:
                parts = line.split("#", 1)[0].split()
                if not parts:
                    continue
                if parts[0] == "v":
                    verts.append([float(x) for x in parts[1:4]])
                elif parts[0] == "f":
                    idx = [int(tok.split("/", 1)[0]) - 1 for tok in parts[1:]]
                    if len(idx) != 3:
                        raise IoError(f"{path}: only triangle faces supported")
                    faces.append(idx)
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read OBJ {path}: {exc}") from exc
    if not verts or not faces:
        raise IoError(f"{path} has no usable geometry")
    return DiscreteImmersion(2, np.array(verts, dtype=np.float64),
                             np.array(faces, dtype=np.int64))


_READERS = {".off": read_off, ".obj": read_obj, ".pline": read_pline}


def read_immersion(path) -> DiscreteImmersion:
    """Dispatch on file extension (.off, .obj, .pline)."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext not in _READERS:
        raise IoError(f"unsupported mesh extension {ext!r}")
    return _READERS[ext](path)


def write_immersion(path, s: DiscreteImmersion) -> None:
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".off":
        write_off(path, s)
    elif ext == ".obj":
        write_obj(path, s)
    elif ext == ".pline":
        write_pline(path, s)
    else:
        raise IoError(f"unsupported mesh extension {ext!r}")
