"""Fundamental domain of a genus-one surface via discrete harmonic 1-forms.

Pipeline: two independent simple loops (user-supplied or tree-cotree
fallback) -> integer closed 1-forms -> cotangent-weighted Poisson solve ->
harmonic 1-forms -> holomorphic pairing with the discrete Hodge conjugate
-> cut the mesh open along the loops and integrate a normalized complex
combination into the plane.
"""

import json
import logging
import warnings
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (CutNotDisk, IndependenceError, LoopError, MeshError,
                     NotSimpleError, SingularPeriods)

logger = logging.getLogger(__name__)

# Above this vertex count the Poisson solve switches from a direct
# factorization to diagonally preconditioned conjugate gradients.
DIRECT_SOLVE_LIMIT = 200_000

POISSON_RESIDUAL_RTOL = 1e-10


@dataclass
class LoopBasis:
    """Two directed vertex cycles generating the surface's first homology."""

    gamma1: np.ndarray
    gamma2: np.ndarray

    def __post_init__(self):
        self.gamma1 = np.asarray(self.gamma1, dtype=np.int64)
        self.gamma2 = np.asarray(self.gamma2, dtype=np.int64)


class OneForm:
    """Discrete 1-form: one value per unordered edge, sign by direction.

    ``values[t]`` is the value along ``surface.edges[t]`` traversed from
    the smaller to the larger vertex index; the reverse direction is the
    negative, so antisymmetry is exact by construction.
    """

    def __init__(self, surface, values):
        values = np.asarray(values)
        if values.shape != (surface.edge_count,):
            raise ValueError("one value per surface edge required")
        self.surface = surface
        self.values = values

    def value(self, a, b):
        """Value along the directed edge (a, b)."""
        if a < b:
            return self.values[self.surface.edge_index[(int(a), int(b))]]
        return -self.values[self.surface.edge_index[(int(b), int(a))]]

    def period(self, cycle):
        """Sum of the form along a closed vertex cycle."""
        cycle = np.asarray(cycle, dtype=np.int64)
        total = self.values.dtype.type(0)
        for t in range(len(cycle)):
            total += self.value(cycle[t], cycle[(t + 1) % len(cycle)])
        return complex(total) if np.iscomplexobj(self.values) else float(total)

    def face_sums(self):
        """Sum around every oriented face boundary (zero iff closed)."""
        ids, signs = _face_edge_table(self.surface)
        return (self.values[ids] * signs).sum(axis=1)

    def conjugated(self):
        return OneForm(self.surface, np.conj(self.values))


def _face_edge_table(surface):
    """Edge ids and direction signs of each face's three boundary edges."""
    faces = surface.faces
    index = surface.edge_index
    ids = np.empty((len(faces), 3), dtype=np.int64)
    signs = np.empty((len(faces), 3))
    for c in range(3):
        a = faces[:, c]
        b = faces[:, (c + 1) % 3]
        for t in range(len(faces)):
            aa, bb = int(a[t]), int(b[t])
            if aa < bb:
                ids[t, c] = index[(aa, bb)]
                signs[t, c] = 1.0
            else:
                ids[t, c] = index[(bb, aa)]
                signs[t, c] = -1.0
    return ids, signs


def _vertex_rings(surface):
    """Counterclockwise neighbor ring and wedge faces around each vertex.

    Returns (rings, ring_faces): ``rings[v]`` lists the neighbors of ``v``
    in ccw order; ``ring_faces[v][t]`` is the face spanning the wedge from
    ``rings[v][t]`` to ``rings[v][t + 1]``.
    """
    succ = defaultdict(dict)
    for fid, (i, j, k) in enumerate(surface.faces):
        succ[int(i)][int(j)] = (int(k), fid)
        succ[int(j)][int(k)] = (int(i), fid)
        succ[int(k)][int(i)] = (int(j), fid)
    rings, ring_faces = [], []
    for v in range(surface.vertex_count):
        nbrs = succ[v]
        if not nbrs:
            raise MeshError(f"isolated vertex {v}")
        start = next(iter(nbrs))
        ring, wfaces = [start], []
        while True:
            nxt, fid = nbrs[ring[-1]]
            wfaces.append(fid)
            if nxt == start:
                break
            ring.append(nxt)
            if len(ring) > len(nbrs):
                raise MeshError(f"open or non-manifold fan at vertex {v}")
        rings.append(ring)
        ring_faces.append(wfaces)
    return rings, ring_faces


def _check_cycle(surface, cycle, name):
    cycle = np.asarray(cycle, dtype=np.int64)
    if len(cycle) < 3:
        raise LoopError(f"{name} has fewer than 3 vertices")
    if cycle.min() < 0 or cycle.max() >= surface.vertex_count:
        raise LoopError(f"{name} has vertex indices out of range")
    if len(np.unique(cycle)) != len(cycle):
        raise NotSimpleError(f"{name} repeats a vertex")
    index = surface.edge_index
    for t in range(len(cycle)):
        a, b = int(cycle[t]), int(cycle[(t + 1) % len(cycle)])
        if (min(a, b), max(a, b)) not in index:
            raise LoopError(f"{name}: ({a}, {b}) is not a surface edge")
    return cycle


def closed_one_form(surface, gamma):
    """Integer-valued closed 1-form dual to the directed loop ``gamma``.

    An edge leaving a loop vertex toward the left-hand side of the walk
    carries +1, the reverse carries -1, and every other edge carries 0.
    Face boundary sums vanish identically, so the form is closed, and its
    period counts signed crossings of the loop.
    """
    gamma = np.asarray(gamma, dtype=np.int64)
    rings, _ = _vertex_rings(surface)
    on_loop = np.zeros(surface.vertex_count, dtype=bool)
    on_loop[gamma] = True
    values = np.zeros(surface.edge_count)
    index = surface.edge_index
    L = len(gamma)
    for t in range(L):
        v = int(gamma[t])
        prv = int(gamma[(t - 1) % L])
        nxt = int(gamma[(t + 1) % L])
        ring = rings[v]
        pos = ring.index(nxt)
        rotated = ring[pos:] + ring[:pos]
        for u in rotated[1:]:
            if u == prv:
                break
            if on_loop[u]:
                continue
            if v < u:
                values[index[(v, u)]] += 1.0
            else:
                values[index[(u, v)]] -= 1.0
    return OneForm(surface, values)


def _crossing_matrix(surface, gamma1, gamma2):
    """Integer period matrix of the dual forms against both loops."""
    eta1 = closed_one_form(surface, gamma1)
    eta2 = closed_one_form(surface, gamma2)
    return np.array([
        [eta1.period(gamma1), eta1.period(gamma2)],
        [eta2.period(gamma1), eta2.period(gamma2)],
    ])


def _path_to_root(parent, v):
    path = [v]
    while parent[path[-1]] != path[-1]:
        path.append(parent[path[-1]])
    return path


def _tree_cycle(parent, u, v):
    """Simple cycle formed by the tree paths of u and v plus the edge (u, v)."""
    pu = _path_to_root(parent, u)
    pv = _path_to_root(parent, v)
    seen = {w: t for t, w in enumerate(pu)}
    for t, w in enumerate(pv):
        if w in seen:
            # u .. lca followed by the reversed v-side, closed by (v, u)
            return pu[:seen[w] + 1] + pv[:t][::-1]
    raise MeshError("disconnected spanning tree")


def _vertex_adjacency(surface):
    adj = defaultdict(list)
    for a, b in surface.edges:
        adj[int(a)].append(int(b))
        adj[int(b)].append(int(a))
    return adj


def _bfs_tree(adj, n, root=0):
    parent = np.full(n, -1, dtype=np.int64)
    parent[root] = root
    queue = [root]
    head = 0
    order = []
    while head < len(queue):
        v = queue[head]
        head += 1
        order.append(v)
        for u in adj[v]:
            if parent[u] < 0:
                parent[u] = v
                queue.append(u)
    return parent, order


def _transversal_loop(surface, gamma1, base_candidates):
    """Simple loop crossing ``gamma1`` exactly once, via the cut cylinder.

    Cuts the surface along ``gamma1`` and searches a path between the two
    copies of a base vertex that avoids every other boundary copy; mapped
    back to the surface this is a simple cycle meeting ``gamma1`` only at
    the base vertex.
    """
    cut = cut_mesh(surface, [gamma1])
    adj = defaultdict(set)
    for i, j, k in cut.faces:
        adj[int(i)].update((int(j), int(k)))
        adj[int(j)].update((int(i), int(k)))
        adj[int(k)].update((int(i), int(j)))
    copies = defaultdict(list)
    for cv, ov in enumerate(cut.correspondence):
        copies[int(ov)].append(cv)
    boundary = {cv for ov in map(int, gamma1) for cv in copies[ov]}
    for base in base_candidates:
        cps = copies[int(base)]
        if len(cps) != 2:
            continue
        src, dst = cps
        blocked = boundary - {src, dst}
        prev = {src: src}
        queue, head = [src], 0
        while head < len(queue):
            v = queue[head]
            head += 1
            if v == dst:
                break
            for u in adj[v]:
                if u in prev or u in blocked:
                    continue
                # never travel along the boundary itself
                if v in (src, dst) and u in (src, dst):
                    continue
                prev[u] = v
                queue.append(u)
        if dst not in prev:
            continue
        path = [dst]
        while path[-1] != src:
            path.append(prev[path[-1]])
        loop = [int(cut.correspondence[cv]) for cv in path[:-1]]
        return np.asarray(loop[::-1], dtype=np.int64)
    raise LoopError("could not find a transversal loop")


def fallback_loops(surface):
    """Homology basis from a tree-cotree construction.

    The first loop closes a non-tree, non-cotree edge through the vertex
    spanning tree; the second is a transversal found on the cut cylinder,
    so the two loops share exactly one vertex.
    """
    n = surface.vertex_count
    adj = _vertex_adjacency(surface)
    parent, _ = _bfs_tree(adj, n)
    tree_edges = {(min(int(v), int(parent[v])), max(int(v), int(parent[v])))
                  for v in range(n) if parent[v] != v}
    # cotree: spanning tree of the dual graph over non-tree edges
    edge_faces = defaultdict(list)
    for fid, (i, j, k) in enumerate(surface.faces):
        for a, b in ((i, j), (j, k), (k, i)):
            edge_faces[(min(int(a), int(b)), max(int(a), int(b)))].append(fid)
    face_parent = np.full(surface.face_count, -1, dtype=np.int64)
    face_parent[0] = 0
    queue, head = [0], 0
    dual_used = set()
    face_adj = defaultdict(list)
    for e, fs in edge_faces.items():
        if e in tree_edges or len(fs) != 2:
            continue
        face_adj[fs[0]].append((fs[1], e))
        face_adj[fs[1]].append((fs[0], e))
    while head < len(queue):
        f = queue[head]
        head += 1
        for g, e in face_adj[f]:
            if face_parent[g] < 0:
                face_parent[g] = f
                dual_used.add(e)
                queue.append(g)
    generators = [e for e in edge_faces
                  if e not in tree_edges and e not in dual_used
                  and len(edge_faces[e]) == 2]
    if len(generators) != 2:
        raise MeshError(f"expected 2 generator edges, found {len(generators)}"
                        " (surface not genus one?)")
    gamma1 = np.asarray(_tree_cycle(parent, *generators[0]), dtype=np.int64)
    gamma2 = _transversal_loop(surface, gamma1, list(map(int, gamma1)))
    basis = LoopBasis(gamma1, gamma2)
    crossings = _crossing_matrix(surface, basis.gamma1, basis.gamma2)
    if abs(np.linalg.det(crossings)) < 0.5:
        raise IndependenceError("tree-cotree loops are not independent")
    return basis


def validate_loops(surface, gamma1, gamma2):
    """Validate (and if needed repair) a user-supplied loop pair.

    Loops must be simple closed cycles along surface edges and
    homologically independent.  Independent loops always share at least
    one vertex; if they share more than one, the second loop is replaced
    by a transversal through one of the shared vertices, with a warning,
    since the cut construction needs a single intersection point.
    """
    gamma1 = _check_cycle(surface, gamma1, "gamma1")
    gamma2 = _check_cycle(surface, gamma2, "gamma2")
    if set(map(int, gamma1)) == set(map(int, gamma2)):
        raise IndependenceError("loops cover the same vertex set")
    crossings = _crossing_matrix(surface, gamma1, gamma2)
    if abs(np.linalg.det(crossings)) < 0.5:
        raise IndependenceError(
            f"degenerate loop period matrix {crossings.tolist()}")
    shared = sorted(set(map(int, gamma1)) & set(map(int, gamma2)))
    if len(shared) != 1:
        warnings.warn(
            f"loops share {len(shared)} vertices instead of one; replacing "
            "the second loop by a transversal (its homotopy class may "
            "change)", stacklevel=2)
        gamma2 = _transversal_loop(surface, gamma1, shared)
        crossings = _crossing_matrix(surface, gamma1, gamma2)
        if abs(np.linalg.det(crossings)) < 0.5:
            raise IndependenceError("rerouted loops are not independent")
    return LoopBasis(gamma1, gamma2)


def load_loops(path, surface=None):
    """Load a loop pair from JSON ``{"gamma1": [...], "gamma2": [...]}``.

    Indices are 0-based.  With a surface given, full validation (edges,
    simplicity, independence, single shared vertex) is performed.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        gamma1 = np.asarray(data["gamma1"], dtype=np.int64)
        gamma2 = np.asarray(data["gamma2"], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise LoopError(f"{path}: malformed loop file: {exc}") from exc
    if surface is None:
        return LoopBasis(gamma1, gamma2)
    return validate_loops(surface, gamma1, gamma2)


def cotangent_weights(surface):
    """Standard harmonic cotangent weights (cot a + cot b) / 2 per edge."""
    pts = surface.vertices[surface.faces]
    e0 = pts[:, 1] - pts[:, 0]
    e1 = pts[:, 2] - pts[:, 1]
    e2 = pts[:, 0] - pts[:, 2]
    cross = np.linalg.norm(np.cross(e0, -e2), axis=1)
    cots = np.stack([
        np.einsum("ij,ij->i", e0, -e2),
        np.einsum("ij,ij->i", -e0, e1),
        np.einsum("ij,ij->i", e2, -e1),
    ], axis=1) / cross[:, None]
    index = surface.edge_index
    weights = np.zeros(surface.edge_count)
    faces = surface.faces
    for c in range(3):
        a = faces[:, (c + 1) % 3]
        b = faces[:, (c + 2) % 3]
        for t in range(len(faces)):
            aa, bb = int(a[t]), int(b[t])
            weights[index[(min(aa, bb), max(aa, bb))]] += 0.5 * cots[t, c]
    return weights


def _weight_laplacian(surface, weights):
    a, b = surface.edges[:, 0], surface.edges[:, 1]
    n = surface.vertex_count
    W = sp.coo_matrix((weights, (a, b)), shape=(n, n)).tocsr()
    W = W + W.T
    diag = np.asarray(W.sum(axis=1)).ravel()
    return (sp.diags(diag) - W).tocsr(), W


def _grounded_solve(L, b, n):
    """Solve L h = b with h[0] = 0 (direct below the size limit, else CG)."""
    keep = np.arange(1, n)
    Lr = L[keep][:, keep].tocsc()
    br = b[keep]
    if n <= DIRECT_SOLVE_LIMIT:
        hr = spla.spsolve(Lr, br)
    else:
        diag = Lr.diagonal()
        M = sp.diags(1.0 / np.where(diag > 0, diag, 1.0))
        hr, info = spla.cg(Lr, br, M=M, rtol=1e-12, maxiter=10 * n)
        if info != 0:
            raise MeshError(f"Poisson CG did not converge (info={info})")
    h = np.zeros(n)
    h[keep] = hr
    return h


def harmonize(surface, eta):
    """Harmonic representative of the closed form's cohomology class.

    Solves the cotangent-weighted Poisson equation for the vertex
    potential h and returns eta + dh.  Periods over any closed cycle are
    preserved exactly (dh telescopes), and the result has zero weighted
    divergence at every vertex.
    """
    weights = cotangent_weights(surface)
    L, W = _weight_laplacian(surface, weights)
    n = surface.vertex_count
    # divergence of eta with respect to the weights
    a, b = surface.edges[:, 0], surface.edges[:, 1]
    vals = eta.values * weights
    div = np.zeros(n)
    np.add.at(div, a, vals)
    np.add.at(div, b, -vals)
    h = _grounded_solve(L, div, n)
    residual = np.abs(L @ h - div).max()
    scale = max(np.abs(weights).max(), 1.0)
    if not residual < POISSON_RESIDUAL_RTOL * scale:
        raise MeshError(
            f"Poisson solve residual {residual:.3e} exceeds tolerance "
            f"(weights scale {scale:.3e}); mesh may be broken")
    omega = eta.values + h[b] - h[a]
    return OneForm(surface, omega)


def hodge_star(surface, omega):
    """Discrete Hodge conjugate of a 1-form.

    In each face the form is the restriction of a constant covector;
    rotate that vector by 90 degrees about the oriented face normal and
    integrate along the edges.  The two incident faces of an edge get
    equal weight in the average: cotangent weighting is undefined
    whenever the two opposite angles sum to a right angle pair (on a
    square grid's diagonals both cotangents vanish).
    """
    pts = surface.vertices[surface.faces]
    ids, signs = _face_edge_table(surface)
    vals = omega.values[ids] * signs  # per-face values along (0->1, 1->2, 2->0)
    e1 = pts[:, 1] - pts[:, 0]
    e2 = pts[:, 2] - pts[:, 0]
    g11 = np.einsum("ij,ij->i", e1, e1)
    g12 = np.einsum("ij,ij->i", e1, e2)
    g22 = np.einsum("ij,ij->i", e2, e2)
    det = g11 * g22 - g12 ** 2
    # gradient vector: g . e1 = omega(0->1), g . e2 = omega(0->2)
    r1 = vals[:, 0]
    r2 = -vals[:, 2]
    alpha = (g22 * r1 - g12 * r2) / det
    beta = (g11 * r2 - g12 * r1) / det
    grad = alpha[:, None] * e1 + beta[:, None] * e2
    normal = np.cross(e1, e2)
    normal /= np.linalg.norm(normal, axis=1, keepdims=True)
    rotated = np.cross(normal, grad)
    acc = np.zeros(surface.edge_count)
    cnt = np.zeros(surface.edge_count)
    faces = surface.faces
    for c in range(3):
        a = faces[:, c]
        b = faces[:, (c + 1) % 3]
        edge_vec = surface.vertices[b] - surface.vertices[a]
        val = np.einsum("ij,ij->i", rotated, edge_vec) * signs[:, c]
        np.add.at(acc, ids[:, c], val)
        np.add.at(cnt, ids[:, c], 1.0)
    return OneForm(surface, acc / cnt)


def holomorphic_form(surface, omega):
    """Pair a harmonic form with its Hodge conjugate: zeta = omega + i * omega."""
    star = hodge_star(surface, omega)
    return OneForm(surface, omega.values + 1j * star.values)


@dataclass
class CutMesh:
    """Surface cut open along loops; vertices on the loops are duplicated."""

    vertices: np.ndarray
    faces: np.ndarray
    correspondence: np.ndarray

    @property
    def euler_characteristic(self):
        directed = self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        n_edges = len(np.unique(np.sort(directed, axis=1), axis=0))
        return len(self.vertices) - n_edges + len(self.faces)


def cut_mesh(surface, loops):
    """Cut the surface open along the given vertex loops.

    Each vertex on a loop is duplicated once per fan wedge delimited by
    incident cut edges, and faces are relabeled to the wedge copies.
    """
    cut_edges = set()
    cut_vertices = set()
    for gamma in loops:
        gamma = np.asarray(gamma, dtype=np.int64)
        for t in range(len(gamma)):
            a, b = int(gamma[t]), int(gamma[(t + 1) % len(gamma)])
            cut_edges.add((min(a, b), max(a, b)))
            cut_vertices.add(a)
    rings, ring_faces = _vertex_rings(surface)
    n = surface.vertex_count
    base_copy = np.arange(n, dtype=np.int64)
    correspondence = list(range(n))
    corner_copy = {}
    next_id = n
    for v in sorted(cut_vertices):
        ring = rings[v]
        wfaces = ring_faces[v]
        d = len(ring)
        cut_pos = [t for t, u in enumerate(ring)
                   if (min(v, u), max(v, u)) in cut_edges]
        if len(cut_pos) < 2:
            raise CutNotDisk(f"loop vertex {v} has {len(cut_pos)} cut edges")
        for s_idx, start in enumerate(cut_pos):
            stop = cut_pos[(s_idx + 1) % len(cut_pos)]
            if s_idx == 0:
                copy = v  # first wedge keeps the original index
            else:
                copy = next_id
                next_id += 1
                correspondence.append(v)
            t = start
            while True:
                corner_copy[(wfaces[t], v)] = copy
                t = (t + 1) % d
                if t == stop:
                    break
    new_faces = surface.faces.copy()
    for fid in range(len(new_faces)):
        for c in range(3):
            key = (fid, int(new_faces[fid, c]))
            if key in corner_copy:
                new_faces[fid, c] = corner_copy[key]
    correspondence = np.asarray(correspondence, dtype=np.int64)
    return CutMesh(vertices=surface.vertices[correspondence],
                   faces=new_faces, correspondence=correspondence)


@dataclass
class FundamentalDomain:
    """Planar image of the cut surface with its identification lattice.

    ``coords[k]`` is the complex planar position of cut vertex ``k``;
    boundary copies of the same original vertex differ by a lattice vector
    ``k1 * w1 + k2 * w2``.
    """

    coords: np.ndarray
    faces: np.ndarray
    correspondence: np.ndarray
    w1: complex
    w2: complex
    flipped: int
    loops: LoopBasis

    @property
    def vertex_count(self):
        return len(self.coords)


def _project_to_harmonic_span(surface, star_vals, basis, basis_periods,
                              loops):
    """Closed representative of a conjugate form, by period matching.

    The face-averaged rotation is only approximately closed on curved
    meshes; snapping it to the harmonic span with the same loop periods
    keeps the class and makes the integration path independent.
    """
    star = OneForm(surface, star_vals)
    target = np.array([star.period(loops.gamma1), star.period(loops.gamma2)])
    try:
        x = np.linalg.solve(basis_periods.T, target)
    except np.linalg.LinAlgError as exc:
        raise SingularPeriods("harmonic basis periods are singular") from exc
    return x[0] * basis[0].values + x[1] * basis[1].values


def cut_and_integrate(surface, loops, zeta1, zeta2):
    """Integrate a normalized holomorphic combination over the cut surface.

    The imaginary parts of the two input forms are first projected onto
    the harmonic span (period matching), so the combined form is closed to
    machine precision.  Real coefficients c1, c2 are then chosen by the
    2x2 linear system that makes the gamma1-period exactly 1; if the
    gamma2-period lands in the lower half plane the form is conjugated, so
    the second lattice vector has positive imaginary part.
    """
    omega1 = OneForm(surface, zeta1.values.real.copy())
    omega2 = OneForm(surface, zeta2.values.real.copy())
    basis_periods = np.array([
        [omega1.period(loops.gamma1), omega1.period(loops.gamma2)],
        [omega2.period(loops.gamma1), omega2.period(loops.gamma2)],
    ])
    if abs(np.linalg.det(basis_periods)) < 1e-8:
        raise SingularPeriods(
            f"harmonic period matrix is singular: {basis_periods.tolist()}")
    basis = (omega1, omega2)
    star1 = _project_to_harmonic_span(surface, zeta1.values.imag, basis,
                                      basis_periods, loops)
    star2 = _project_to_harmonic_span(surface, zeta2.values.imag, basis,
                                      basis_periods, loops)
    z1 = OneForm(surface, omega1.values + 1j * star1)
    z2 = OneForm(surface, omega2.values + 1j * star2)
    periods = np.array([
        [z1.period(loops.gamma1), z1.period(loops.gamma2)],
        [z2.period(loops.gamma1), z2.period(loops.gamma2)],
    ])
    cond = np.linalg.cond(periods)
    logger.info("holomorphic period matrix condition number: %.3e", cond)
    system = np.array([[periods[0, 0].real, periods[1, 0].real],
                       [periods[0, 0].imag, periods[1, 0].imag]])
    try:
        c = np.linalg.solve(system, np.array([1.0, 0.0]))
    except np.linalg.LinAlgError as exc:
        raise SingularPeriods("cannot normalize the gamma1 period") from exc
    zeta = OneForm(surface, c[0] * z1.values + c[1] * z2.values)
    w2 = zeta.period(loops.gamma2)
    if w2.imag < 0.0:
        zeta = zeta.conjugated()
        w2 = w2.conjugate()
    w1 = zeta.period(loops.gamma1)

    cut = cut_mesh(surface, [loops.gamma1, loops.gamma2])
    if cut.euler_characteristic != 1:
        raise CutNotDisk(
            f"cut mesh has Euler characteristic {cut.euler_characteristic}")
    adj = defaultdict(list)
    for i, j, k in cut.faces:
        for a, b in ((int(i), int(j)), (int(j), int(k)), (int(k), int(i))):
            adj[a].append(b)
            adj[b].append(a)
    n_cut = len(cut.vertices)
    coords = np.zeros(n_cut, dtype=np.complex128)
    seen = np.zeros(n_cut, dtype=bool)
    root = 0  # first copy of original vertex 0
    seen[root] = True
    queue, head = [root], 0
    corr = cut.correspondence
    while head < len(queue):
        v = queue[head]
        head += 1
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                coords[u] = coords[v] + zeta.value(corr[v], corr[u])
                queue.append(u)
    if not seen.all():
        raise CutNotDisk("cut mesh is disconnected")
    tri = coords[cut.faces]
    orientation = np.imag(np.conj(tri[:, 1] - tri[:, 0]) * (tri[:, 2] - tri[:, 0]))
    flipped = int(np.count_nonzero(orientation <= 0.0))
    if flipped:
        logger.warning("fundamental domain has %d flipped planar faces",
                       flipped)
    return FundamentalDomain(coords=coords, faces=cut.faces,
                             correspondence=corr, w1=complex(w1),
                             w2=complex(w2), flipped=flipped, loops=loops)


def compute_fundamental_domain(surface, loops):
    """Full pipeline from a loop basis to the planar fundamental domain."""
    eta1 = closed_one_form(surface, loops.gamma1)
    eta2 = closed_one_form(surface, loops.gamma2)
    omega1 = harmonize(surface, eta1)
    omega2 = harmonize(surface, eta2)
    zeta1 = holomorphic_form(surface, omega1)
    zeta2 = holomorphic_form(surface, omega2)
    return cut_and_integrate(surface, loops, zeta1, zeta2)


def save_fundamental_domain(domain, obj_path, json_path):
    """Write the planar domain as a z=0 OBJ plus a JSON lattice sidecar."""
    from .mesh import save_obj

    verts = np.stack([domain.coords.real, domain.coords.imag,
                      np.zeros(domain.vertex_count)], axis=-1)
    save_obj(obj_path, verts, domain.faces)
    payload = {
        "w1": [domain.w1.real, domain.w1.imag],
        "w2": [domain.w2.real, domain.w2.imag],
        "correspondence": domain.correspondence.tolist(),
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")
