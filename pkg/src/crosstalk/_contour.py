"""Level-set extraction on regular grids.

Both routines work in fractional index coordinates of the input array and
return raw geometry (segments or triangles); mapping to wave vectors is the
caller's job.  Values ``>= 0`` count as "inside".
"""

import itertools

import numpy as np

# edges of a square cell in the order bottom, right, top, left; each edge is a
# pair of corner offsets (di, dj)
_SQUARE_EDGES = (((0, 0), (1, 0)), ((1, 0), (1, 1)), ((0, 1), (1, 1)), ((0, 0), (0, 1)))


def _edge_points(f, I, J, edge):
    (ai, aj), (bi, bj) = _SQUARE_EDGES[edge]
    fa = f[I + ai, J + aj]
    fb = f[I + bi, J + bj]
    pts = np.empty((I.size, 2))
    with np.errstate(invalid="ignore", divide="ignore"):
        s = fa / (fa - fb)
        pts[:, 0] = I + ai + s * (bi - ai)
        pts[:, 1] = J + aj + s * (bj - aj)
    return pts


def marching_squares(f, wrap0=False):
    """Extract the zero level set of a 2D array as a list of segments.

    Parameters
    ----------
    f : ndarray, shape (n0, n1)
        Sampled field.
    wrap0 : bool
        Treat axis 0 as periodic; cells between the last and first rows are
        included and their upper coordinate is ``n0`` (not 0).

    Returns
    -------
    p, q : ndarray, shape (S, 2)
        Segment end points in fractional index coordinates.
    """
    f = np.asarray(f, dtype=float)
    if wrap0:
        f = np.concatenate([f, f[:1]], axis=0)
    pos = f >= 0
    c00, c10, c11, c01 = pos[:-1, :-1], pos[1:, :-1], pos[1:, 1:], pos[:-1, 1:]
    case = (c00.astype(np.int8) | (c10.astype(np.int8) << 1)
            | (c11.astype(np.int8) << 2) | (c01.astype(np.int8) << 3))
    I, J = np.nonzero((case != 0) & (case != 15))
    if I.size == 0:
        empty = np.empty((0, 2))
        return empty, empty.copy()
    b00, b10, b11, b01 = c00[I, J], c10[I, J], c11[I, J], c01[I, J]
    crossed = np.stack([b00 != b10, b10 != b11, b01 != b11, b00 != b01], axis=1)
    pts = np.stack([_edge_points(f, I, J, e) for e in range(4)], axis=1)  # (A, 4, 2)

    ncross = crossed.sum(axis=1)
    two = ncross == 2
    order = np.argsort(~crossed[two], axis=1, kind="stable")[:, :2]
    rows = np.nonzero(two)[0]
    p = [pts[rows, order[:, 0]]]
    q = [pts[rows, order[:, 1]]]

    four = np.nonzero(ncross == 4)[0]
    if four.size:
        c = case[I[four], J[four]]
        centre = 0.25 * (f[I[four], J[four]] + f[I[four] + 1, J[four]]
                         + f[I[four] + 1, J[four] + 1] + f[I[four], J[four] + 1])
        # saddle cells: pair (bottom,right)+(top,left) or (bottom,left)+(right,top)
        br = ((c == 5) & (centre >= 0)) | ((c == 10) & (centre < 0))
        a1 = np.zeros_like(c)
        b1 = np.where(br, 1, 3)
        a2 = np.where(br, 2, 1)
        b2 = np.where(br, 3, 2)
        p += [pts[four, a1], pts[four, a2]]
        q += [pts[four, b1], pts[four, b2]]
    return np.concatenate(p), np.concatenate(q)


def _tetra_table():
    # Kuhn subdivision of the unit cube into six tetrahedra sharing the main diagonal
    tets = []
    for perm in itertools.permutations(range(3)):
        v = [np.zeros(3, dtype=int)]
        for axis in perm:
            nxt = v[-1].copy()
            nxt[axis] = 1
            v.append(nxt)
        tets.append(np.array(v))
    # triangles (as triples of tetra edges) for each 4-bit sign pattern
    table = {}
    for pattern in range(16):
        inside = [i for i in range(4) if pattern >> i & 1]
        outside = [i for i in range(4) if not pattern >> i & 1]
        if len(inside) in (1, 3):
            lone, rest = (inside[0], outside) if len(inside) == 1 else (outside[0], inside)
            table[pattern] = [((lone, rest[0]), (lone, rest[1]), (lone, rest[2]))]
        elif len(inside) == 2:
            (p1, p2), (n1, n2) = inside, outside
            quad = [(p1, n1), (p1, n2), (p2, n2), (p2, n1)]
            table[pattern] = [(quad[0], quad[1], quad[2]), (quad[0], quad[2], quad[3])]
        else:
            table[pattern] = []
    return np.stack(tets), table


_TETS, _TET_TABLE = _tetra_table()


def marching_tetrahedra(f):
    """Extract the zero level set of a 3D array as triangles.

    Each grid cube is split into six tetrahedra; inside a tetrahedron the
    linear interpolant has a planar level set, which avoids the ambiguous
    configurations of classic marching cubes.

    Returns
    -------
    ndarray, shape (T, 3, 3)
        Triangle vertices in fractional index coordinates.
    """
    f = np.asarray(f, dtype=float)
    pos = f >= 0
    corners = [pos[i:pos.shape[0] - 1 + i, j:pos.shape[1] - 1 + j, k:pos.shape[2] - 1 + k]
               for i in (0, 1) for j in (0, 1) for k in (0, 1)]
    n_in = sum(c.astype(np.int8) for c in corners)
    cells = np.argwhere((n_in > 0) & (n_in < 8))
    if cells.size == 0:
        return np.empty((0, 3, 3))
    out = []
    for tet in _TETS:
        verts = cells[:, None, :] + tet[None, :, :]  # (C, 4, 3)
        vals = f[verts[..., 0], verts[..., 1], verts[..., 2]]
        pattern = ((vals >= 0) * (1 << np.arange(4))).sum(axis=1)
        for pat in np.unique(pattern):
            tris = _TET_TABLE[int(pat)]
            if not tris:
                continue
            sel = pattern == pat
            v, fv = verts[sel].astype(float), vals[sel]
            for tri in tris:
                tri_pts = []
                for a, b in tri:
                    s = fv[:, a] / (fv[:, a] - fv[:, b])
                    tri_pts.append(v[:, a] + s[:, None] * (v[:, b] - v[:, a]))
                out.append(np.stack(tri_pts, axis=1))
    return np.concatenate(out) if out else np.empty((0, 3, 3))
