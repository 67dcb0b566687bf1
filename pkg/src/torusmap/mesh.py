"""Genus-one simplicial surfaces: loading, validation, areas, synthetic grids.

A surface is a pair of arrays: ``vertices`` (n, 3) float64 and ``faces``
(m, 3) int64 with counterclockwise orientation w.r.t. the outward normal.
Vertex maps are plain (n, 3) float64 arrays, row ``l`` holding the image of
vertex ``l``.
"""

import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GenusError, MeshError

logger = logging.getLogger(__name__)

# Faces with area below this fraction of the mean are a hard load error;
# the stretch-energy weights divide by the source face area.
DEGENERATE_AREA_FRACTION = 1e-14


@dataclass
class SimplicialSurface:
    """Triangle mesh with cached face areas and edge table.

    Parameters
    ----------
    vertices : array_like, shape (n, 3)
        Vertex coordinates.
    faces : array_like, shape (m, 3)
        Vertex index triples, oriented counterclockwise w.r.t. the
        outward normal.

    Notes
    -----
    Construction alone does not enforce the closed genus-one invariants;
    call :meth:`validate` (done by :func:`load_obj` and the generators).
    Arrays are frozen after construction, so instances are safe to share
    across threads.
    """

    vertices: np.ndarray
    faces: np.ndarray
    face_areas: np.ndarray = field(init=False, repr=False)
    edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be an (n, 3) array")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshError("faces must be an (m, 3) array")
        if self.faces.size and (self.faces.min() < 0
                                or self.faces.max() >= len(self.vertices)):
            raise MeshError("face index out of range")
        self.face_areas = triangle_areas(self.vertices, self.faces)
        directed = self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        self.edges = np.unique(np.sort(directed, axis=1), axis=0)
        for arr in (self.vertices, self.faces, self.face_areas, self.edges):
            arr.setflags(write=False)

    @property
    def vertex_count(self):
        return len(self.vertices)

    @property
    def face_count(self):
        return len(self.faces)

    @property
    def edge_count(self):
        return len(self.edges)

    @property
    def euler_characteristic(self):
        return self.vertex_count - self.edge_count + self.face_count

    @property
    def total_area(self):
        return float(self.face_areas.sum())

    @cached_property
    def edge_index(self):
        """Map from canonical (min, max) vertex pair to edge row index."""
        return {(int(a), int(b)): t for t, (a, b) in enumerate(self.edges)}

    def validate(self):
        """Check the closed genus-one invariants, raising on violation."""
        if self.face_count == 0 or self.vertex_count < 3:
            raise MeshError("non-manifold or open surface: too few simplices")
        mean_area = self.face_areas.mean()
        bad = np.flatnonzero(self.face_areas < DEGENERATE_AREA_FRACTION * mean_area)
        if bad.size:
            raise MeshError(f"degenerate faces (zero area): {bad[:10].tolist()}")
        directed = self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        if len(np.unique(directed, axis=0)) != len(directed):
            raise MeshError("non-manifold or open surface: "
                            "repeated directed edge")
        keys = set(map(tuple, directed))
        if any((b, a) not in keys for a, b in keys):
            raise MeshError("non-manifold or open surface: "
                            "directed edge without its reverse")
        if not self._is_connected():
            raise MeshError("surface has multiple connected components")
        if self.euler_characteristic != 0:
            raise GenusError(self.euler_characteristic)
        return self

    def _is_connected(self):
        n = self.vertex_count
        parent = np.arange(n)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        root = find(0)
        return all(find(v) == root for v in range(n))


def triangle_areas(points, faces):
    """Unsigned areas of the triangles ``points[faces]``."""
    p = points[faces]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def face_area(surface, index):
    """Area of one face: half the cross-product norm of two edge vectors."""
    return float(surface.face_areas[index])


def total_area(surface):
    """Sum of all face areas (fixed summation order)."""
    return surface.total_area


def signed_volume(vertices, faces):
    """Signed volume enclosed by an oriented closed surface."""
    p = vertices[faces]
    return float(np.einsum("ij,ij->", p[:, 0], np.cross(p[:, 1], p[:, 2]))) / 6.0


def load_obj(path):
    """Load and validate a genus-one surface from a Wavefront OBJ file.

    Only ``v`` and ``f`` records are used; texture and normal indices in
    face records are ignored.  Indices are 1-based on disk, 0-based in
    memory.  If the signed-volume heuristic reports inward orientation,
    all faces are flipped with a warning.

    Raises
    ------
    MeshError
        On parse failure, non-triangular faces, or open/non-manifold input.
    GenusError
        If the surface is closed but not genus one.
    """
    vertices = []
    faces = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "v":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{lineno}: malformed vertex line")
                try:
                    vertices.append([float(x) for x in parts[1:4]])
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: {exc}") from exc
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise MeshError(
                        f"{path}:{lineno}: non-triangular face "
                        f"({len(parts) - 1} vertices)")
                try:
                    idx = [int(tok.split("/")[0]) for tok in parts[1:]]
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: {exc}") from exc
                if any(i < 1 for i in idx):
                    raise MeshError(f"{path}:{lineno}: "
                                    "indices must be positive 1-based")
                faces.append([i - 1 for i in idx])
    if not vertices:
        raise MeshError(f"{path}: no vertices found")
    vertices = np.asarray(vertices, dtype=np.float64)
    faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if faces.size and (signed_volume(vertices, faces) < 0):
        warnings.warn(
            f"{path}: faces appear inward-oriented (negative signed "
            "volume); flipping all faces", stacklevel=2)
        faces = faces[:, [0, 2, 1]]
    surface = SimplicialSurface(vertices, faces)
    surface.validate()
    logger.info("loaded %s: %d vertices, %d faces",
                path, surface.vertex_count, surface.face_count)
    return surface


def save_obj(path, vertices, faces, uv=None, uv_faces=None):
    """Write an OBJ file with full float precision (17 significant digits).

    Parameters
    ----------
    uv : ndarray, shape (k, 2), optional
        Texture coordinates, written as ``vt`` records.
    uv_faces : ndarray, shape (m, 3), optional
        Per-face indices into ``uv`` (0-based); required with ``uv``.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in np.asarray(vertices, dtype=np.float64):
            fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        if uv is not None:
            if uv_faces is None:
                raise ValueError("uv_faces is required when uv is given")
            for u, v in np.asarray(uv, dtype=np.float64):
                fh.write(f"vt {u:.17g} {v:.17g}\n")
            for f, t in zip(faces, uv_faces):
                fh.write(f"f {f[0]+1}/{t[0]+1} {f[1]+1}/{t[1]+1} "
                         f"{f[2]+1}/{t[2]+1}\n")
        else:
            for f in faces:
                fh.write(f"f {f[0]+1} {f[1]+1} {f[2]+1}\n")


def _grid_faces(n_outer, n_inner):
    """Faces of a regular torus grid; vertex (i, j) sits at i*n_inner + j."""
    faces = []
    for i in range(n_outer):
        i1 = (i + 1) % n_outer
        for j in range(n_inner):
            j1 = (j + 1) % n_inner
            v00 = i * n_inner + j
            v10 = i1 * n_inner + j
            v11 = i1 * n_inner + j1
            v01 = i * n_inner + j1
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    return np.asarray(faces, dtype=np.int64)


def make_torus_grid(R, r, n_theta, n_phi):
    """Regular (theta, phi) grid triangulated on the ring torus T^2(R, r).

    Returns
    -------
    surface : SimplicialSurface
        Validated genus-one surface with ``n_theta * n_phi`` vertices.
    vertex_map : ndarray, shape (n, 3)
        The identity embedding (copy of the vertex array), on-manifold.
    """
    if n_theta < 3 or n_phi < 3:
        raise ValueError("n_theta and n_phi must be at least 3")
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    ring = R + r * np.cos(ph)
    verts = np.stack([ring * np.cos(th), ring * np.sin(th),
                      r * np.sin(ph)], axis=-1).reshape(-1, 3)
    surface = SimplicialSurface(verts, _grid_faces(n_theta, n_phi))
    surface.validate()
    return surface, surface.vertices.copy()


def make_flat_torus_grid(n_u=16, n_v=16):
    """Torus grid whose intrinsic metric is the exactly flat unit square.

    The square lattice is rolled into a polygonal cylinder whose chord
    length equals the grid spacing ``1/n_u``, and the second direction is
    folded into a triangle wave of step ``1/n_v``, so every triangle is
    congruent to the flat right triangle with legs ``(1/n_u, 1/n_v)``.
    The embedding self-intersects (faces fold onto each other), which is
    irrelevant for the intrinsic quantities (areas, cotangent weights)
    this fixture exists to pin down.  Total area is exactly 1.

    ``n_v`` must be even so the fold closes up.
    """
    if n_u < 3 or n_v < 4 or n_v % 2:
        raise ValueError("need n_u >= 3 and even n_v >= 4")
    a = 1.0 / n_u
    b = 1.0 / n_v
    rho = a / (2.0 * np.sin(np.pi / n_u))
    i = np.repeat(np.arange(n_u), n_v)
    j = np.tile(np.arange(n_v), n_u)
    z = b * np.where(j <= n_v // 2, j, n_v - j)
    verts = np.stack([rho * np.cos(2.0 * np.pi * i / n_u),
                      rho * np.sin(2.0 * np.pi * i / n_u), z], axis=-1)
    surface = SimplicialSurface(verts, _grid_faces(n_u, n_v))
    # The folded embedding has zero signed volume by construction, so the
    # orientation heuristic does not apply; topology checks still must pass.
    if surface.euler_characteristic != 0:
        raise GenusError(surface.euler_characteristic)
    return surface
