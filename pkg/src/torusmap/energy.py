"""Stretch energy, prefactored objective, and their closed-form gradients.

The weighted Laplacian uses modified cotangent weights: the cotangent of
the angle opposite an edge measured on the *image* triangle, scaled by the
image-to-source face area ratio.  It therefore depends on the map and is
reassembled at every evaluation point.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateImageFace, ZeroImageArea

# Image area below this fraction of the source area aborts the prefactored
# objective (division by the image area).
ZERO_AREA_FRACTION = 1e-12


@dataclass
class EnergyReport:
    """Values of the energies at one map: E = (|M| / area) * stretch - area."""

    stretch: float
    area: float
    energy: float
    authalic: float


@dataclass
class LandmarkSet:
    """Landmark correspondences (source index, target index) with penalty."""

    pairs: np.ndarray
    lam: float = 0.2

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if self.lam < 0.0:
            raise ValueError("penalty weight must be nonnegative")
        sources = self.pairs[:, 0]
        if len(np.unique(sources)) != len(sources):
            raise ValueError("duplicate source indices in landmark set")

    def validate_range(self, n_source, n_target):
        if self.pairs.size == 0:
            return self
        if self.pairs[:, 0].min() < 0 or self.pairs[:, 0].max() >= n_source:
            raise IndexError("landmark source index out of range")
        if self.pairs[:, 1].min() < 0 or self.pairs[:, 1].max() >= n_target:
            raise IndexError("landmark target index out of range")
        return self


def _face_geometry(pts):
    """Cross-product norms and corner cotangents of image triangles.

    Parameters
    ----------
    pts : ndarray, shape (m, 3, 3)
        Image triangle corners.

    Returns
    -------
    cross_norm : ndarray, shape (m,)
        Norm of the edge cross product (= twice the image area).
    cots : ndarray, shape (m, 3)
        Cotangent of the interior angle at each corner, computed as
        dot / cross from the edge vectors, never via the angle itself.
    """
    e0 = pts[:, 1] - pts[:, 0]
    e1 = pts[:, 2] - pts[:, 1]
    e2 = pts[:, 0] - pts[:, 2]
    cross_norm = np.linalg.norm(np.cross(e0, -e2), axis=1)
    if np.any(cross_norm == 0.0):
        bad = np.flatnonzero(cross_norm == 0.0)
        raise DegenerateImageFace(
            f"degenerate image faces at {bad[:10].tolist()}")
    cots = np.stack([
        np.einsum("ij,ij->i", e0, -e2),   # at corner 0: (p1-p0).(p2-p0)
        np.einsum("ij,ij->i", -e0, e1),   # at corner 1: (p0-p1).(p2-p1)
        np.einsum("ij,ij->i", e2, -e1),   # at corner 2: (p0-p2).(p1-p2)
    ], axis=1) / cross_norm[:, None]
    return cross_norm, cots


def face_weights(surface, face_points):
    """Modified cotangent weight per face edge.

    Returns an (m, 3) array whose column ``c`` holds the weight of the edge
    opposite corner ``c``: cot(image angle at c) * image_area / (2 * source_area).
    """
    cross_norm, cots = _face_geometry(face_points)
    image_areas = 0.5 * cross_norm
    return cots * (image_areas / (2.0 * surface.face_areas))[:, None]


def assemble_laplacian(surface, f):
    """Assemble the map-dependent weighted Laplacian L_S(f) as CSR.

    Each unordered edge is accumulated once (sum over its two incident
    faces) and mirrored, so the matrix is exactly symmetric; the diagonal
    is minus the off-diagonal row sum, so row sums vanish up to roundoff.
    """
    f = np.asarray(f, dtype=np.float64)
    n = surface.vertex_count
    faces = surface.faces
    w = face_weights(surface, f[faces])
    # edge opposite corner c connects the other two corners
    rows = np.concatenate([faces[:, 1], faces[:, 2], faces[:, 0]])
    cols = np.concatenate([faces[:, 2], faces[:, 0], faces[:, 1]])
    vals = np.concatenate([w[:, 0], w[:, 1], w[:, 2]])
    lo = np.minimum(rows, cols)
    hi = np.maximum(rows, cols)
    upper = sp.coo_matrix((vals, (lo, hi)), shape=(n, n)).tocsr()
    upper.sum_duplicates()
    weights = upper + upper.T
    diag = np.asarray(weights.sum(axis=1)).ravel()
    return (sp.diags(diag) - weights).tocsr()


def _stretch_per_face(surface, f):
    """Stretch energy by the per-face identity: sum of image_area^2 / source_area."""
    pts = np.asarray(f, dtype=np.float64)[surface.faces]
    cross = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
    image_areas = 0.5 * np.linalg.norm(cross, axis=1)
    return float(np.sum(image_areas ** 2 / surface.face_areas)), image_areas


def stretch_energy(surface, f, laplacian=None):
    """Stretch energy as the quadratic form (1/2) sum_c f_c^T L_S(f) f_c."""
    f = np.asarray(f, dtype=np.float64)
    if laplacian is None:
        laplacian = assemble_laplacian(surface, f)
    return 0.5 * float(np.sum(f * (laplacian @ f)))


def image_area(surface, f):
    """Total area of the image of the map."""
    pts = np.asarray(f, dtype=np.float64)[surface.faces]
    cross = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
    return float(0.5 * np.linalg.norm(cross, axis=1).sum())


def objective(surface, f):
    """Prefactored objective E = (|M| / A) * E_S - A with its components.

    Nonnegative up to roundoff, and zero exactly at area-preserving maps
    (any constant per-face area ratio, e.g. the identity or a uniform
    scaling of it).
    """
    stretch, image_areas = _stretch_per_face(surface, f)
    area = float(image_areas.sum())
    total = surface.total_area
    if area < ZERO_AREA_FRACTION * total:
        raise ZeroImageArea(f"image area {area:.3e} vanishes "
                            f"(source area {total:.3e})")
    energy = (total / area) * stretch - area
    return EnergyReport(stretch=stretch, area=area, energy=energy,
                        authalic=stretch - area)


def grad_area(surface, f):
    """Gradient of the image area, accumulated per face.

    On each face the area gradient equals
    (source_area / image_area) * L_S(f_tau) f_tau, which is the exact
    derivative of the cross-product area.
    """
    f = np.asarray(f, dtype=np.float64)
    faces = surface.faces
    pts = f[faces]
    cross_norm, cots = _face_geometry(pts)
    image_areas = 0.5 * cross_norm
    w = cots * (image_areas / (2.0 * surface.face_areas))[:, None]
    scale = (surface.face_areas / image_areas)[:, None]
    out = np.zeros_like(f)
    for c in range(3):
        a = faces[:, (c + 1) % 3]
        b = faces[:, (c + 2) % 3]
        # edge (a, b) opposite corner c contributes w * (f_a - f_b) to
        # row a and the negative to row b
        contrib = w[:, c, None] * (f[a] - f[b]) * scale
        np.add.at(out, a, contrib)
        np.add.at(out, b, -contrib)
    return out


def grad_objective(surface, f, laplacian=None, report=None):
    """Closed-form gradient of the prefactored objective.

    (2|M| / A) L_S(f) f  -  (1 + |M| E_S / A^2) grad A.
    """
    f = np.asarray(f, dtype=np.float64)
    if report is None:
        report = objective(surface, f)
    if laplacian is None:
        laplacian = assemble_laplacian(surface, f)
    total = surface.total_area
    lead = (2.0 * total / report.area) * (laplacian @ f)
    trail = 1.0 + total * report.stretch / report.area ** 2
    return lead - trail * grad_area(surface, f)


def objective_and_gradient(surface, f):
    """Evaluate the objective and its gradient with one Laplacian assembly."""
    f = np.asarray(f, dtype=np.float64)
    report = objective(surface, f)
    laplacian = assemble_laplacian(surface, f)
    grad = grad_objective(surface, f, laplacian=laplacian, report=report)
    return report, grad


def landmark_residual(f, g_at_q, landmarks):
    """Residual rows f_P - g_Q at the landmark source indices."""
    f = np.asarray(f, dtype=np.float64)
    if landmarks.pairs.size == 0:
        return np.zeros((0, 3))
    return f[landmarks.pairs[:, 0]] - np.asarray(g_at_q, dtype=np.float64)


def registration_objective(surface, f, g_at_q, landmarks):
    """Registration energy E_R = E + lambda * ||f_P - g_Q||_F^2."""
    base = objective(surface, f).energy
    if landmarks.lam == 0.0 or landmarks.pairs.size == 0:
        return base
    res = landmark_residual(f, g_at_q, landmarks)
    return base + landmarks.lam * float(np.sum(res * res))


def registration_gradient(surface, f, g_at_q, landmarks):
    """Gradient of E_R: grad E plus 2 * lambda * (f_P - g_Q) on rows P."""
    grad = grad_objective(surface, f)
    if landmarks.lam == 0.0 or landmarks.pairs.size == 0:
        return grad
    res = landmark_residual(f, g_at_q, landmarks)
    grad[landmarks.pairs[:, 0]] += 2.0 * landmarks.lam * res
    return grad
