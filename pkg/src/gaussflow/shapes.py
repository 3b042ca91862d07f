"""Built-in initial immersions for runs and tests."""

from __future__ import annotations

import numpy as np

from .errors import InvalidConfig
from .mesh import DiscreteImmersion


def circle(radius: float, n: int, center=None) -> DiscreteImmersion:
    theta = 2.0 * np.pi * np.arange(n) / n
    v = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if center is not None:
        v = v + np.asarray(center, dtype=np.float64)
    return DiscreteImmersion(1, v)


def ellipse(rx: float, ry: float, n: int) -> DiscreteImmersion:
    theta = 2.0 * np.pi * np.arange(n) / n
    v = np.stack([rx * np.cos(theta), ry * np.sin(theta)], axis=1)
    return DiscreteImmersion(1, v)


def perturbed_circle(radius: float, amp: float, mode: int, seed: int, n: int) -> DiscreteImmersion:
    """Circle with a seeded radial cosine perturbation, r = R(1 + amp*cos(mode*t + phase))."""
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    theta = 2.0 * np.pi * np.arange(n) / n
    r = radius * (1.0 + amp * np.cos(mode * theta + phase))
    v = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    return DiscreteImmersion(1, v)


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=np.float64)
    v /= np.linalg.norm(v, axis=1)[:, None]
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)
    return v, f


def _subdivide_on_sphere(v: np.ndarray, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    verts = list(v)
    midpoint: dict[tuple[int, int], int] = {}

    def mid(i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        if key not in midpoint:
            p = verts[i] + verts[j]
            verts.append(p / np.linalg.norm(p))
            midpoint[key] = len(verts) - 1
        return midpoint[key]

    out = []
    for a, b, c in f:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return np.array(verts), np.array(out, dtype=np.int64)


def unit_sphere_mesh(subdiv: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit icosphere vertex/face arrays at the given subdivision level."""
    v, f = _icosahedron()
    for _ in range(subdiv):
        v, f = _subdivide_on_sphere(v, f)
    return v, f


def icosphere(radius: float, subdiv: int) -> DiscreteImmersion:
    v, f = unit_sphere_mesh(subdiv)
    return DiscreteImmersion(2, radius * v, f)


def ellipsoid(rx: float, ry: float, rz: float, subdiv: int) -> DiscreteImmersion:
    v, f = unit_sphere_mesh(subdiv)
    return DiscreteImmersion(2, v * np.array([rx, ry, rz]), f)


def perturbed_sphere(radius: float, amp: float, mode: int, seed: int, subdiv: int) -> DiscreteImmersion:
    """Sphere with a seeded smooth radial modulation of amplitude ``amp``."""
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
    v, f = unit_sphere_mesh(subdiv)
    azimuth = np.arctan2(v[:, 1], v[:, 0])
    polar = np.arccos(np.clip(v[:, 2], -1.0, 1.0))
    bump = np.cos(mode * azimuth + phases[0]) * np.sin(polar) ** mode
    bump += 0.5 * np.cos(mode * polar + phases[1])
    bump /= np.max(np.abs(bump))
    r = radius * (1.0 + amp * bump)
    return DiscreteImmersion(2, v * r[:, None], f)


_CURVE_SHAPES = ("circle", "ellipse", "perturbed_circle")
_SURFACE_SHAPES = ("icosphere", "ellipsoid", "perturbed_sphere")


def builtin_shape(name: str, params: dict, n: int | None = None) -> DiscreteImmersion:
    """Initial-data factory used by configs and the CLI.

    ``n`` is the vertex count for curves (16 <= n <= 1e6); surfaces take a
    ``subdiv`` entry in ``params`` instead.  Perturbed shapes are
    deterministic in their ``seed``, with the amplitude bounded so the
    sign of |F0|^2 - m is the same as for the unperturbed shape.
    """
    p = dict(params)
    if name in _CURVE_SHAPES:
        if n is None:
            raise InvalidConfig(f"shape {name!r} needs a vertex count n")
        if not 16 <= n <= 10 ** 6:
            raise InvalidConfig(f"vertex count {n} outside [16, 1e6]")
    try:
        if name == "circle":
            return circle(_positive(p, "radius"), n)
        if name == "ellipse":
            return ellipse(_positive(p, "rx"), _positive(p, "ry"), n)
        if name == "perturbed_circle":
            radius, amp = _positive(p, "radius"), float(p["amp"])
            _check_amp(radius, amp, m=1)
            return perturbed_circle(radius, amp, int(p["mode"]), int(p.get("seed", 0)), n)
        if name == "icosphere":
            return icosphere(_positive(p, "radius"), _subdiv(p))
        if name == "ellipsoid":
            return ellipsoid(_positive(p, "rx"), _positive(p, "ry"), _positive(p, "rz"),
                             _subdiv(p))
        if name == "perturbed_sphere":
            radius, amp = _positive(p, "radius"), float(p["amp"])
            _check_amp(radius, amp, m=2)
            return perturbed_sphere(radius, amp, int(p["mode"]), int(p.get("seed", 0)),
                                    _subdiv(p))
    except KeyError as exc:
        raise InvalidConfig(f"shape {name!r} missing parameter {exc}") from exc
    raise InvalidConfig(f"unknown builtin shape {name!r}")


def _positive(p: dict, key: str) -> float:
    val = float(p[key])
    if val <= 0:
        raise InvalidConfig(f"shape parameter {key!r} must be positive, got {val}")
    return val


def _subdiv(p: dict) -> int:
    sd = int(p.get("subdiv", 3))
    if not 0 <= sd <= 7:
        raise InvalidConfig(f"subdiv {sd} outside [0, 7]")
    return sd


def _check_amp(radius: float, amp: float, m: int):
    if amp < 0:
        raise InvalidConfig("perturbation amplitude must be >= 0")
    lo, hi = (radius * (1 - amp)) ** 2, (radius * (1 + amp)) ** 2
    if lo < m < hi or hi == m or lo == m:
        raise InvalidConfig(
            f"perturbation straddles |F|^2 = m: range [{lo:.6g}, {hi:.6g}] vs m = {m}"
        )
