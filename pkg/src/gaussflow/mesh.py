"""Discrete closed immersions and their geometric operators.

Two kinds of immersion are supported: closed polygonal curves (intrinsic
dimension 1, any ambient dimension >= 2) and closed triangulated surfaces
(intrinsic dimension 2, ambient dimension 3).  The operators are the ones
the flow engine needs: mean curvature vector, normal projection, squared
second-fundamental-form norm, Laplace-Beltrami of scalar fields, Gaussian
weighted area, and a mesh-quality proxy.

Discretization choices (fixed, see module tests for the convergence
behavior): curves use edge-length-weighted second differences, surfaces use
the cotangent Laplacian with mixed Voronoi vertex areas.  Curvature norms
on surfaces come from a per-vertex quadric fit over the 2-ring, because the
blow-up monitor needs the full |h|^2, not |H|^2.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateMesh, InvalidConfig

DEGENERACY_TOL = 1e-12


class _Connectivity:
    """Static per-topology index arrays, shared across an evolving mesh.

    Everything here depends only on the face list, so a flow run computes
    it once and passes it along as vertices move.
    """

    def __init__(self, faces: np.ndarray, n_vertices: int):
        self.faces = faces
        self.n_vertices = n_vertices
        self._validate_closed_oriented()
        self._build_rings()

    def _validate_closed_oriented(self):
        f = self.faces
        if f.ndim != 2 or f.shape[1] != 3:
            raise InvalidConfig("face list must have shape (n_faces, 3)")
        if f.min() < 0 or f.max() >= self.n_vertices:
            raise InvalidConfig("face indices out of range")
        if np.any(f[:, 0] == f[:, 1]) or np.any(f[:, 1] == f[:, 2]) or np.any(f[:, 0] == f[:, 2]):
            raise InvalidConfig("face with repeated vertex")
        directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        keys = directed[:, 0].astype(np.int64) * self.n_vertices + directed[:, 1]
        if np.unique(keys).size != keys.size:
            raise InvalidConfig("surface is not consistently oriented (repeated directed edge)")
        undirected = np.sort(directed, axis=1)
        ukeys = undirected[:, 0].astype(np.int64) * self.n_vertices + undirected[:, 1]
        ukeys.sort()
        if ukeys.size % 2 != 0 or np.any(ukeys[0::2] != ukeys[1::2]):
            raise InvalidConfig("surface is not closed (edge not shared by exactly 2 faces)")

    def _build_rings(self):
        n = self.n_vertices
        neighbors: list[set[int]] = [set() for _ in range(n)]
        for a, b, c in self.faces:
            neighbors[a].update((b, c))
            neighbors[b].update((a, c))
            neighbors[c].update((a, b))
        rings = []
        for i in range(n):
            ring = set(neighbors[i])
            for j in neighbors[i]:
                ring.update(neighbors[j])
            ring.discard(i)
            rings.append(sorted(ring))
        width = max(len(r) for r in rings)
        # pad with the vertex itself: zero offsets contribute nothing to the fit
        idx = np.full((n, width), np.arange(n)[:, None], dtype=np.int64)
        for i, r in enumerate(rings):
            idx[i, : len(r)] = r
        self.ring_idx = idx
        self.valence = np.array([len(s) for s in neighbors])


class DiscreteImmersion:
    """Closed polygonal curve (m=1) or closed triangulated surface (m=2).

    Parameters
    ----------
    m : int
        Intrinsic dimension, 1 for curves, 2 for surfaces.
    vertices : (n, d) array
        Vertex positions; d >= 2 for curves, d = 3 for surfaces.
        Consecutive curve vertices are implicitly connected, with closure
        from the last vertex back to the first.
    faces : (nf, 3) int array, optional
        Triangle list (surfaces only), consistently oriented.
    validate : bool
        Skip invariant checks when False (internal fast path for flow
        stepping; degeneracy is then monitored by the caller).
    """

    __slots__ = ("m", "vertices", "faces", "_conn", "_geom")

    def __init__(self, m: int, vertices, faces=None, validate: bool = True,
                 _conn: _Connectivity | None = None):
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2:
            raise InvalidConfig("vertices must be a 2-d array")
        self.m = int(m)
        self.vertices = v
        self.vertices.flags.writeable = False
        self._geom = None
        if self.m == 1:
            if faces is not None:
                raise InvalidConfig("curves carry no face list")
            self.faces = None
            self._conn = None
        elif self.m == 2:
            if faces is None:
                raise InvalidConfig("surfaces need a face list")
            f = np.asarray(faces, dtype=np.int64)
            self.faces = f
            self.faces.flags.writeable = False
            self._conn = _conn if _conn is not None else _Connectivity(f, len(v))
        else:
            raise InvalidConfig(f"m must be 1 or 2, got {m}")
        if validate:
            self._validate()

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def _validate(self):
        v = self.vertices
        if not np.all(np.isfinite(v)):
            raise InvalidConfig("vertex positions must be finite")
        if self.m == 1:
            if v.shape[1] < 2:
                raise InvalidConfig("curves need ambient dimension >= 2")
            if len(v) < 4:
                raise InvalidConfig("closed curves need at least 4 vertices")
            lengths = _curve_edge_lengths(v)
            if lengths.min() <= DEGENERACY_TOL:
                raise InvalidConfig("consecutive curve vertices coincide")
        else:
            if v.shape[1] != 3:
                raise InvalidConfig("surfaces are restricted to ambient dimension 3")
            areas = _face_areas(v, self.faces)
            if areas.min() <= DEGENERACY_TOL:
                raise InvalidConfig("degenerate triangle (area ~ 0)")
        if mesh_quality(self) <= 0.0:
            raise InvalidConfig("mesh quality must be positive")

    def replace_vertices(self, vertices, validate: bool = False) -> "DiscreteImmersion":
        """New immersion with the same connectivity and new positions."""
        return DiscreteImmersion(self.m, vertices, self.faces, validate=validate,
                                 _conn=self._conn)

    # geometry cache: immersions are immutable, so per-instance results of
    # the edge/cotan pass are computed once and shared between operators
    def _geometry(self) -> dict:
        if self._geom is None:
            if self.m == 1:
                self._geom = _curve_geometry(self.vertices)
            else:
                self._geom = _surface_geometry(self.vertices, self.faces)
        return self._geom


# ---------------------------------------------------------------------------
# curve internals


def _curve_edge_lengths(v: np.ndarray) -> np.ndarray:
    e = np.roll(v, -1, axis=0) - v
    return np.sqrt((e * e).sum(axis=1))


def _curve_geometry(v: np.ndarray) -> dict:
    e_next = np.roll(v, -1, axis=0) - v          # edge i -> i+1
    l_next = np.sqrt((e_next * e_next).sum(axis=1))
    if l_next.min() <= DEGENERACY_TOL:
        raise DegenerateMesh(f"curve edge length below {DEGENERACY_TOL:g}")
    e_prev = np.roll(e_next, 1, axis=0)
    l_prev = np.roll(l_next, 1)
    areas = 0.5 * (l_prev + l_next)
    H = (e_next / l_next[:, None] - e_prev / l_prev[:, None]) / areas[:, None]
    chord = np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)
    cnorm = np.sqrt((chord * chord).sum(axis=1))
    if cnorm.min() <= DEGENERACY_TOL:
        raise DegenerateMesh("curve folded back on itself (zero central tangent)")
    return {
        "edge_lengths": l_next,
        "vertex_areas": areas,
        "H": H,
        "tangent": chord / cnorm[:, None],
        "quality": float(l_next.min() / l_next.max()),
        "min_edge": float(l_next.min()),
    }


# ---------------------------------------------------------------------------
# surface internals


def _face_areas(v: np.ndarray, f: np.ndarray) -> np.ndarray:
    p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1)


def _surface_geometry(v: np.ndarray, f: np.ndarray) -> dict:
    n = len(v)
    i0, i1, i2 = f[:, 0], f[:, 1], f[:, 2]
    p0, p1, p2 = v[i0], v[i1], v[i2]
    cross = np.cross(p1 - p0, p2 - p0)
    cross_norm = np.linalg.norm(cross, axis=1)
    face_area = 0.5 * cross_norm
    if face_area.min() <= DEGENERACY_TOL:
        raise DegenerateMesh(f"triangle area below {DEGENERACY_TOL:g}")

    def corner_cot(a, b):
        return (a * b).sum(axis=1) / cross_norm

    # cot at corner k = <e1, e2> / |e1 x e2| with e1, e2 the edges leaving k;
    # all three share the same |cross| because the triangle is the same
    c0 = corner_cot(p1 - p0, p2 - p0)
    c1 = corner_cot(p2 - p1, p0 - p1)
    c2 = corner_cot(p0 - p2, p1 - p2)

    l0 = ((p2 - p1) ** 2).sum(axis=1)   # squared edge opposite corner 0
    l1 = ((p0 - p2) ** 2).sum(axis=1)
    l2 = ((p1 - p0) ** 2).sum(axis=1)

    # mixed Voronoi area: circumcentric for acute triangles, half/quarter
    # of the face area at/off the obtuse corner otherwise
    obt0, obt1, obt2 = c0 < 0, c1 < 0, c2 < 0
    any_obt = obt0 | obt1 | obt2
    w0 = np.where(any_obt, np.where(obt0, face_area / 2, face_area / 4), (l1 * c1 + l2 * c2) / 8)
    w1 = np.where(any_obt, np.where(obt1, face_area / 2, face_area / 4), (l2 * c2 + l0 * c0) / 8)
    w2 = np.where(any_obt, np.where(obt2, face_area / 2, face_area / 4), (l0 * c0 + l1 * c1) / 8)
    areas = np.zeros(n)
    np.add.at(areas, i0, w0)
    np.add.at(areas, i1, w1)
    np.add.at(areas, i2, w2)
    if areas.min() <= DEGENERACY_TOL:
        raise DegenerateMesh("vertex area underflow")

    # cotan Laplacian of the position map = mean curvature vector
    H = np.zeros_like(v)
    for ia, ib, cw in ((i1, i2, c0), (i2, i0, c1), (i0, i1, c2)):
        contrib = 0.5 * cw[:, None] * (v[ib] - v[ia])
        np.add.at(H, ia, contrib)
        np.add.at(H, ib, -contrib)
    H /= areas[:, None]

    vertex_normal = np.zeros_like(v)
    np.add.at(vertex_normal, i0, 0.5 * cross)
    np.add.at(vertex_normal, i1, 0.5 * cross)
    np.add.at(vertex_normal, i2, 0.5 * cross)
    nn = np.linalg.norm(vertex_normal, axis=1)
    if nn.min() <= DEGENERACY_TOL:
        raise DegenerateMesh("vanishing vertex normal")
    vertex_normal /= nn[:, None]

    a, b, c = np.sqrt(l0), np.sqrt(l1), np.sqrt(l2)
    semi = 0.5 * (a + b + c)
    q = 8.0 * face_area ** 2 / (semi * a * b * c)

    return {
        "face_area": face_area,
        "vertex_areas": areas,
        "H": H,
        "normal": vertex_normal,
        "quality": float(q.min()),
        "cots": (c0, c1, c2),
        "corner_idx": (i0, i1, i2),
        "min_edge": float(np.sqrt(min(l0.min(), l1.min(), l2.min()))),
    }


def _surface_laplacian(geom: dict, v_ref: np.ndarray, f_vals: np.ndarray) -> np.ndarray:
    c0, c1, c2 = geom["cots"]
    i0, i1, i2 = geom["corner_idx"]
    out = np.zeros(len(f_vals))
    for ia, ib, cw in ((i1, i2, c0), (i2, i0, c1), (i0, i1, c2)):
        contrib = 0.5 * cw * (f_vals[ib] - f_vals[ia])
        np.add.at(out, ia, contrib)
        np.add.at(out, ib, -contrib)
    return out / geom["vertex_areas"]


# ---------------------------------------------------------------------------
# operators


def _check_field(s: DiscreteImmersion, values, vector: bool) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    want = (s.n_vertices, s.ambient_dim) if vector else (s.n_vertices,)
    if arr.shape != want:
        raise InvalidConfig(f"vertex field has shape {arr.shape}, expected {want}")
    if not np.all(np.isfinite(arr)):
        raise InvalidConfig("vertex field has non-finite entries")
    return arr


def mean_curvature_vector(s: DiscreteImmersion) -> np.ndarray:
    """Per-vertex mean curvature vector H (the discrete Laplacian of position).

    Curves: edge-length-weighted second difference, exact on regular
    polygons.  Surfaces: cotangent Laplacian over mixed Voronoi areas.
    Points toward the center of curvature, so a round sphere of radius R
    gives H ~ -(m/R^2) F.
    """
    return s._geometry()["H"].copy()


def vertex_areas(s: DiscreteImmersion) -> np.ndarray:
    """Vertex area weights: half edge sums (curves), mixed Voronoi (surfaces)."""
    return s._geometry()["vertex_areas"].copy()


def normal_projection(s: DiscreteImmersion, v) -> np.ndarray:
    """Component of a per-vertex ambient field normal to the immersion.

    Removes the projection onto the discrete tangent space: the normalized
    central-difference tangent for curves, the plane orthogonal to the
    area-weighted vertex normal for surfaces.
    """
    field = _check_field(s, v, vector=True)
    geom = s._geometry()
    if s.m == 1:
        t = geom["tangent"]
        return field - ((field * t).sum(axis=1))[:, None] * t
    nrm = geom["normal"]
    return ((field * nrm).sum(axis=1))[:, None] * nrm


def tangent_basis(s: DiscreteImmersion) -> np.ndarray:
    """Orthonormal tangent basis per vertex, shape (n, m, d)."""
    geom = s._geometry()
    if s.m == 1:
        return geom["tangent"][:, None, :]
    nrm = geom["normal"]
    ref = np.zeros_like(nrm)
    ref[np.arange(len(nrm)), np.argmin(np.abs(nrm), axis=1)] = 1.0
    t1 = np.cross(nrm, ref)
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(nrm, t1)
    return np.stack([t1, t2], axis=1)


def laplace_beltrami(s: DiscreteImmersion, f) -> np.ndarray:
    """Discrete Laplace-Beltrami of a scalar vertex field.

    Uses the same weights as :func:`mean_curvature_vector`, so the operator
    is symmetric with respect to the vertex-area inner product.
    """
    vals = _check_field(s, f, vector=False)
    geom = s._geometry()
    if s.m == 1:
        l_next = geom["edge_lengths"]
        l_prev = np.roll(l_next, 1)
        d_next = (np.roll(vals, -1) - vals) / l_next
        d_prev = (vals - np.roll(vals, 1)) / l_prev
        return (d_next - d_prev) / geom["vertex_areas"]
    return _surface_laplacian(geom, s.vertices, vals)


def gradient_norm_sq(s: DiscreteImmersion, f) -> np.ndarray:
    """Squared norm of the intrinsic gradient of a scalar vertex field.

    Curves: central difference along arclength.  Surfaces: area-weighted
    average of the per-face P1 gradients.
    """
    vals = _check_field(s, f, vector=False)
    geom = s._geometry()
    if s.m == 1:
        l_next = geom["edge_lengths"]
        l_prev = np.roll(l_next, 1)
        g = (np.roll(vals, -1) - np.roll(vals, 1)) / (l_prev + l_next)
        return g * g
    i0, i1, i2 = geom["corner_idx"]
    v = s.vertices
    p0, p1, p2 = v[i0], v[i1], v[i2]
    nrm = np.cross(p1 - p0, p2 - p0)
    two_area = np.linalg.norm(nrm, axis=1)
    nrm = nrm / two_area[:, None]
    # P1 gradient: sum of f at each corner times the rotated opposite edge
    grad = (vals[i0][:, None] * np.cross(nrm, p2 - p1)
            + vals[i1][:, None] * np.cross(nrm, p0 - p2)
            + vals[i2][:, None] * np.cross(nrm, p1 - p0)) / two_area[:, None]
    g2 = (grad * grad).sum(axis=1)
    fa = geom["face_area"]
    acc = np.zeros(s.n_vertices)
    wacc = np.zeros(s.n_vertices)
    for idx in (i0, i1, i2):
        np.add.at(acc, idx, g2 * fa)
        np.add.at(wacc, idx, fa)
    return acc / wacc


def second_fundamental_norm(s: DiscreteImmersion) -> np.ndarray:
    """Per-vertex estimate of |h|^2, the squared second-fundamental-form norm.

    Curves have a single principal curvature, so |h|^2 = |H|^2 in any
    codimension.  Surfaces fit a local graph over the tangent plane through
    the 2-ring (quadratic + cubic + radial quartic terms) and return
    tr(S^2) = k1^2 + k2^2 of the resulting shape operator; on umbilic
    meshes this recovers m/R^2 * m up to discretization error.
    """
    geom = s._geometry()
    if s.m == 1:
        H = geom["H"]
        return (H * H).sum(axis=1)
    return _surface_h2(s, geom)


def _surface_h2(s: DiscreteImmersion, geom: dict) -> np.ndarray:
    v = s.vertices
    nrm = geom["normal"]
    ring = s._conn.ring_idx                      # (n, K), padded with self
    d = v[ring] - v[:, None, :]                  # (n, K, 3) offsets
    scale = np.sqrt((d * d).sum(axis=2)).max(axis=1)
    scale = np.maximum(scale, DEGENERACY_TOL)
    d = d / scale[:, None, None]

    basis = tangent_basis(s)                     # (n, 2, 3)
    x = (d * basis[:, 0][:, None, :]).sum(axis=2)
    y = (d * basis[:, 1][:, None, :]).sum(axis=2)
    z = (d * nrm[:, None, :]).sum(axis=2)

    r2 = x * x + y * y
    cols = [x, y, x * x, x * y, y * y, x ** 3, x * x * y, x * y * y, y ** 3, r2 * r2]
    A = np.stack(cols, axis=2)                   # (n, K, 10)
    ata = np.einsum("nki,nkj->nij", A, A)
    ata += 1e-12 * np.eye(A.shape[2])
    atb = np.einsum("nki,nk->ni", A, z)
    coef = np.linalg.solve(ata, atb[:, :, None])[:, :, 0]

    p, q = coef[:, 0], coef[:, 1]
    inv_scale = 1.0 / scale
    w11 = 2.0 * coef[:, 2] * inv_scale
    w12 = coef[:, 3] * inv_scale
    w22 = 2.0 * coef[:, 4] * inv_scale

    rad = np.sqrt(1.0 + p * p + q * q)
    b11, b12, b22 = w11 / rad, w12 / rad, w22 / rad
    e, fq, g = 1.0 + p * p, p * q, 1.0 + q * q
    det = e * g - fq * fq
    # shape operator S = I^{-1} II
    s11 = (g * b11 - fq * b12) / det
    s12 = (g * b12 - fq * b22) / det
    s21 = (e * b12 - fq * b11) / det
    s22 = (e * b22 - fq * b12) / det
    return s11 * s11 + 2.0 * s12 * s21 + s22 * s22


def weighted_area(s: DiscreteImmersion) -> float:
    """Gaussian-weighted area: sum over vertices of exp(-|F|^2/2) * area.

    The conformal volume element scales as (exp(-|F|^2/m))^{m/2}, so the
    weight is exp(-|F|^2/2) for curves and surfaces alike.  Decays to zero
    as the immersion is pushed to infinity.
    """
    geom = s._geometry()
    v = s.vertices
    f2 = (v * v).sum(axis=1)
    with np.errstate(under="ignore"):
        w = np.exp(-0.5 * f2)
    return float((w * geom["vertex_areas"]).sum())


def area(s: DiscreteImmersion) -> float:
    """Unweighted total length (curves) or area (surfaces)."""
    geom = s._geometry()
    if s.m == 1:
        return float(geom["edge_lengths"].sum())
    return float(geom["face_area"].sum())


def mesh_quality(s: DiscreteImmersion) -> float:
    """Shape-regularity proxy in (0, 1]; 0 flags fully degenerate input.

    Curves: min/max edge length.  Surfaces: worst face inradius over
    circumradius, normalized to 1 for equilateral triangles.
    """
    try:
        return s._geometry()["quality"]
    except DegenerateMesh:
        return 0.0
