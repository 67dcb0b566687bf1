"""Geometry of the ring torus T^2(R, r) and its n-fold power manifold.

All operations exist in a scalar form (one 3-vector) and a row-wise form
acting on (n, 3) arrays, one torus copy per row.  Everything is a pure
function of immutable inputs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AxisSingularity, CoreSingularity, NotOnManifold

# Denominators below sqrt(1e-28) mean the point sits on the z-axis or the
# core circle; the angle formulas would silently produce NaN there.
_SINGULAR_DEN2 = 1e-28

# On-manifold tolerance, relative to the minor radius.
MANIFOLD_RTOL = 1e-9


@dataclass(frozen=True)
class TorusShape:
    """Ring torus with major radius ``R`` and minor radius ``r`` (R > r > 0)."""

    R: float
    r: float

    def __post_init__(self):
        if not (self.R > self.r > 0.0):
            raise ValueError(f"need R > r > 0, got R={self.R}, r={self.r}")


def _rows(q):
    q = np.asarray(q, dtype=np.float64)
    return q.reshape(1, 3) if q.ndim == 1 else q


def angles_theta(q):
    """Cosine and sine of the azimuthal angle of ``q``, without the angle.

    Raises
    ------
    AxisSingularity
        If ``q`` lies on the z-axis (rows reported by index).
    """
    pts = _rows(q)
    den2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    bad = np.flatnonzero(den2 < _SINGULAR_DEN2)
    if bad.size:
        raise AxisSingularity(f"point(s) on the z-axis at rows {bad[:10].tolist()}")
    den = np.sqrt(den2)
    cos_t, sin_t = pts[:, 0] / den, pts[:, 1] / den
    if np.asarray(q).ndim == 1:
        return float(cos_t[0]), float(sin_t[0])
    return cos_t, sin_t


def angles_phi(q, shape):
    """Cosine and sine of the elevation angle of ``q`` w.r.t. ``shape``.

    Uses c = sqrt(q1^2 + q2^2) - R as the in-plane coordinate.

    Raises
    ------
    CoreSingularity
        If ``q`` lies on the core circle of radius R.
    """
    pts = _rows(q)
    c = np.hypot(pts[:, 0], pts[:, 1]) - shape.R
    den2 = c ** 2 + pts[:, 2] ** 2
    bad = np.flatnonzero(den2 < _SINGULAR_DEN2)
    if bad.size:
        raise CoreSingularity(
            f"point(s) on the core circle at rows {bad[:10].tolist()}")
    den = np.sqrt(den2)
    cos_p, sin_p = c / den, pts[:, 2] / den
    if np.asarray(q).ndim == 1:
        return float(cos_p[0]), float(sin_p[0])
    return cos_p, sin_p


def project_point(q, shape):
    """Nearest point of the torus to ``q`` (scalar or row-wise).

    Composes the two angle computations into the torus parameterization;
    the result satisfies the torus equation to machine precision.
    """
    pts = _rows(q)
    cos_t, sin_t = angles_theta(pts)
    cos_p, sin_p = angles_phi(pts, shape)
    ring = shape.R + shape.r * cos_p
    out = np.stack([ring * cos_t, ring * sin_t, shape.r * sin_p], axis=-1)
    return out[0] if np.asarray(q).ndim == 1 else out


def manifold_violation(points, shape):
    """Distance of each point's tube radius from ``r`` (max over rows)."""
    pts = _rows(points)
    tube = np.hypot(np.hypot(pts[:, 0], pts[:, 1]) - shape.R, pts[:, 2])
    return float(np.abs(tube - shape.r).max())


def check_on_manifold(points, shape, rtol=MANIFOLD_RTOL):
    """Raise NotOnManifold if any row is farther than ``rtol * r``."""
    worst = manifold_violation(points, shape)
    if worst > rtol * shape.r:
        raise NotOnManifold(
            f"point violates the torus equation by {worst:.3e} "
            f"(tolerance {rtol * shape.r:.3e})")


def tube_normals(points, shape):
    """Outward unit normals of the torus at (near-)manifold points."""
    pts = _rows(points)
    cos_t, sin_t = angles_theta(pts)
    centers = shape.R * np.stack([cos_t, sin_t, np.zeros_like(cos_t)], axis=-1)
    radial = pts - centers
    return radial / np.linalg.norm(radial, axis=-1, keepdims=True)


def project_tangent(v, x, shape, check=True):
    """Orthogonal projection of ``v`` onto the tangent space at ``x``.

    Row-wise when ``v`` and ``x`` are (n, 3).  This is the linear projector
    I - nn^T with n the outward tube normal; it is what the Riemannian
    gradient computation uses.
    """
    if check:
        check_on_manifold(x, shape)
    vv, xx = _rows(v), _rows(x)
    n = tube_normals(xx, shape)
    out = vv - np.sum(n * vv, axis=-1, keepdims=True) * n
    return out[0] if np.asarray(v).ndim == 1 else out


def affine_tangent_point(q, x, shape, check=True):
    """Project the point ``q`` onto the affine tangent plane through ``x``.

    Translate to the meridian circle centered at the origin, apply the
    circle's tangent-space step (which re-adds the base offset), and
    translate back.  Kept as the faithful point-space transcription; the
    optimizers use :func:`project_tangent` on gradient vectors instead.
    """
    if check:
        check_on_manifold(x, shape)
    qq, xx = _rows(q), _rows(x)
    cos_t, sin_t = angles_theta(xx)
    c = shape.R * np.stack([cos_t, sin_t, np.zeros_like(cos_t)], axis=-1)
    x_hat = xx - c
    q_hat = qq - c
    coef = np.sum(x_hat * q_hat, axis=-1, keepdims=True) / np.sum(
        x_hat * x_hat, axis=-1, keepdims=True)
    proj = q_hat - coef * x_hat + x_hat
    out = proj + c
    return out[0] if np.asarray(q).ndim == 1 else out


def retract(x, xi, shape):
    """Step from ``x`` along ``xi`` in the embedding space and project back.

    Rows with an exactly zero step are returned unchanged, so
    ``retract(x, 0) == x`` holds exactly.
    """
    xx, vv = _rows(x), _rows(xi)
    moved = xx + vv
    still = np.all(vv == 0.0, axis=-1)
    if still.all():
        out = xx.copy()
    else:
        out = np.empty_like(xx)
        out[still] = xx[still]
        out[~still] = project_point(moved[~still], shape)
    return out[0] if np.asarray(x).ndim == 1 else out


def transport(xi, x, y, shape):
    """Parallel transport of the tangent vector ``xi`` from ``x`` to ``y``.

    Exploits the product structure of the torus: an azimuthal rotation
    about the z-axis by the angle difference theta_y - theta_x, followed
    by a Rodrigues rotation about the core-circle tangent at ``y`` taking
    the meridian position of ``x`` to that of ``y``.  Both factors are
    rotations, so norms and inner products are preserved exactly and
    tangent vectors land in the tangent space at ``y``.

    All angle differences are evaluated through the cosine/sine sum
    identities; no inverse trigonometric function is called.
    """
    vv, xx, yy = _rows(xi), _rows(x), _rows(y)
    cos_tx, sin_tx = angles_theta(xx)
    cos_ty, sin_ty = angles_theta(yy)
    cos_td = cos_ty * cos_tx + sin_ty * sin_tx
    sin_td = sin_ty * cos_tx - cos_ty * sin_tx
    rotated = np.stack([cos_td * vv[:, 0] - sin_td * vv[:, 1],
                        sin_td * vv[:, 0] + cos_td * vv[:, 1],
                        vv[:, 2]], axis=-1)
    cos_px, sin_px = angles_phi(xx, shape)
    cos_py, sin_py = angles_phi(yy, shape)
    cos_pd = cos_py * cos_px + sin_py * sin_px
    sin_pd = sin_py * cos_px - cos_py * sin_px
    # Axis along the core circle at y; moving from elevation phi_x to
    # phi_y is a rotation by -(phi_y - phi_x) about this forward tangent.
    axis = np.stack([-sin_ty, cos_ty, np.zeros_like(cos_ty)], axis=-1)
    k_cross = np.cross(axis, rotated)
    k_dot = np.sum(axis * rotated, axis=-1, keepdims=True)
    out = (rotated * cos_pd[:, None]
           - k_cross * sin_pd[:, None]
           + axis * k_dot * (1.0 - cos_pd[:, None]))
    return out[0] if np.asarray(xi).ndim == 1 else out
