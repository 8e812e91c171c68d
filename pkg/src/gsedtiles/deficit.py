"""Defect graphs, Delaunay triangulations, n-frames, domain decomposition and deficits.

Geometry follows the wang module: cell (x, y) is the closed unit square
[x, x+1] x [y, y+1] and a defect point is the midpoint of the shared side.
Internally points are doubled so every coordinate is an integer and all
predicates are exact.  Domain logic uses the l-infinity metric.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy import ndimage
from scipy.spatial import Delaunay, QhullError

from . import robinson
from .wang import Configuration, DefectSet, defects, violation_masks

# -- defect graph / Delaunay -------------------------------------------------------


def _points2(points) -> np.ndarray:
    """Doubled integer coordinates, shape (N, 2), sorted lexicographically."""
    if isinstance(points, DefectSet):
        return np.array(sorted(points.points), dtype=np.int64).reshape(-1, 2)
    arr = np.asarray(points, dtype=float).reshape(-1, 2) * 2
    if not np.allclose(arr, np.round(arr)):
        raise ValueError("points must lie on the half-integer lattice")
    arr = np.unique(np.round(arr).astype(np.int64), axis=0)
    return arr


def linf(p2, q2) -> float:
    """l-infinity distance between doubled points, in lattice units."""
    return max(abs(int(p2[0]) - int(q2[0])), abs(int(p2[1]) - int(q2[1]))) / 2


@dataclass(frozen=True)
class DefectGraph:
    points2: np.ndarray

    @classmethod
    def of(cls, points) -> "DefectGraph":
        return cls(_points2(points))

    @property
    def edges(self):
        return list(combinations(range(len(self.points2)), 2))

    def length(self, e) -> float:
        return linf(self.points2[e[0]], self.points2[e[1]])


@dataclass(frozen=True)
class DelaunayTriangulation:
    points2: np.ndarray
    edges: frozenset  # (i, j) with i < j
    triangles: tuple  # (i, j, k) index triples; empty for the colinear fallback

    @property
    def vertices(self) -> np.ndarray:
        return self.points2 / 2.0

    def length(self, e) -> float:
        return linf(self.points2[e[0]], self.points2[e[1]])


def _colinear(p: np.ndarray) -> bool:
    if len(p) < 3:
        return True
    d = p[1:] - p[0]
    return bool(np.all(d[:, 0] * d[0, 1] - d[:, 1] * d[0, 0] == 0) if np.any(d[0]) else False)


def delaunay(points) -> DelaunayTriangulation:
    """Delaunay triangulation (qhull); colinear input gives the path graph.

    Cocircular ties are resolved by qhull's triangulated output on the sorted,
    doubled input, which is deterministic for a given point set.
    """
    p = _points2(points)
    n = len(p)
    if n == 0:
        raise ValueError("delaunay needs at least one point")
    if _colinear(p):
        order = np.lexsort((p[:, 1], p[:, 0]))
        edges = frozenset(tuple(sorted((int(a), int(b)))) for a, b in zip(order[:-1], order[1:]))
        return DelaunayTriangulation(p, edges, ())
    try:
        tri = Delaunay(p.astype(float), qhull_options="Qbb Qc Qz Q12 Qt")
    except QhullError:  # pragma: no cover - degenerate input not caught above
        order = np.lexsort((p[:, 1], p[:, 0]))
        return DelaunayTriangulation(p, frozenset(zip(order[:-1], order[1:])), ())
    simplices = tuple(tuple(int(v) for v in s) for s in tri.simplices)
    edges = set()
    for a, b, c in simplices:
        edges.update({tuple(sorted(e)) for e in ((a, b), (b, c), (a, c))})
    return DelaunayTriangulation(p, frozenset(edges), simplices)


# -- segment / rectangle predicates (doubled integer coordinates) ----------------------


def segment_hits_rects(p2, q2, rects2: np.ndarray) -> np.ndarray:
    """Closed segment p-q against closed axis-aligned rectangles (x1, y1, x2, y2), vectorized."""
    (px, py), (qx, qy) = p2, q2
    r = np.asarray(rects2, dtype=np.int64).reshape(-1, 4)
    x1, y1, x2, y2 = r.T
    box = (np.maximum(x1, min(px, qx)) <= np.minimum(x2, max(px, qx))) & \
          (np.maximum(y1, min(py, qy)) <= np.minimum(y2, max(py, qy)))
    dx, dy = qx - px, qy - py
    side = [dx * (cy - py) - dy * (cx - px) for cx, cy in ((x1, y1), (x1, y2), (x2, y1), (x2, y2))]
    s = np.stack(side)
    separated = np.all(s > 0, axis=0) | np.all(s < 0, axis=0)
    return box & ~separated


def touched_cells(p2, q2, width: int, height: int) -> np.ndarray:
    """Cells (x, y) of the window whose closed unit square meets the segment."""
    xs = np.arange(max(0, min(p2[0], q2[0]) // 2 - 1), min(width, max(p2[0], q2[0]) // 2 + 2))
    ys = np.arange(max(0, min(p2[1], q2[1]) // 2 - 1), min(height, max(p2[1], q2[1]) // 2 + 2))
    if xs.size == 0 or ys.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    rects = np.stack([2 * gx, 2 * gy, 2 * gx + 2, 2 * gy + 2], axis=1)
    hit = segment_hits_rects(p2, q2, rects)
    return np.stack([gx[hit], gy[hit]], axis=1)


def border_side_rects2(corner, span) -> np.ndarray:
    """The ring of a border as four closed rectangles (doubled coordinates)."""
    x0, y0 = corner
    x1, y1 = x0 + span, y0 + span
    return np.array([[2 * x0, 2 * y0, 2 * x1 + 2, 2 * y0 + 2],
                     [2 * x0, 2 * y1, 2 * x1 + 2, 2 * y1 + 2],
                     [2 * x0, 2 * y0, 2 * x0 + 2, 2 * y1 + 2],
                     [2 * x1, 2 * y0, 2 * x1 + 2, 2 * y1 + 2]], dtype=np.int64)


def edge_intersects_border(p2, q2, corner, span) -> bool:
    return bool(np.any(segment_hits_rects(p2, q2, border_side_rects2(corner, span))))


# -- frames ----------------------------------------------------------------------


def frames_of(corner, n: int) -> list[tuple]:
    """The five n-frames of an n-border: its own square and the four adjacent ones.

    Squares are inclusive cell ranges (x0, y0, x1, y1) of 4^n + 1 cells a side.
    Neighbours are translates by 4^n, so each spans the gap to the next border
    together with both rings and is shared by the two borders it joins.
    """
    s = 4 ** n
    i, j = corner
    return [(i + dx, j + dy, i + dx + s, j + dy + s) for dx, dy in ((0, 0), (0, -s), (-s, 0), (0, s), (s, 0))]


@dataclass(frozen=True)
class FrameSet:
    frames: dict  # n -> sorted tuple of distinct squares

    @classmethod
    def for_window(cls, width: int, height: int, phase=(0, 0), n_max: int | None = None,
                   margin: int | None = None) -> "FrameSet":
        """Frames of every n-border of the reference tiling near the window,
        including borders only partly inside it."""
        n_max = robinson.max_level(width, height) if n_max is None else n_max
        out = {}
        for n in range(1, n_max + 1):
            s = 4 ** n
            mg = 2 * s if margin is None else margin
            corners = robinson.predicted_border_corners(width + 2 * mg + s, height + 2 * mg + s,
                                                        (phase[0] - mg, phase[1] - mg), n)
            fr = set()
            for cx, cy in corners:
                fr.update(frames_of((cx - mg, cy - mg), n))
            out[n] = tuple(sorted(fr))
        return cls(out)

    def levels(self):
        return sorted(self.frames)


def cuts(p2, q2, frame) -> bool:
    """One endpoint strictly inside the frame square, the other outside its closure."""
    return frames_cut(p2, q2, [frame]) == 1


def frames_cut(p2, q2, frames) -> int:
    if not len(frames):
        return 0
    f = np.asarray(frames, dtype=np.int64) * 2
    f[:, 2:] += 2  # closed plane square of the cell range

    def where(pt):
        inner = (f[:, 0] < pt[0]) & (pt[0] < f[:, 2]) & (f[:, 1] < pt[1]) & (pt[1] < f[:, 3])
        closed = (f[:, 0] <= pt[0]) & (pt[0] <= f[:, 2]) & (f[:, 1] <= pt[1]) & (pt[1] <= f[:, 3])
        return inner, ~closed

    pi, po = where(p2)
    qi, qo = where(q2)
    return int(np.sum((pi & qo) | (qi & po)))


def count_frame_cuts(d: DelaunayTriangulation, frames: FrameSet) -> dict:
    """edge -> {n: number of n-frames cut}, for edges of length <= 4^n."""
    out = {}
    for e in sorted(d.edges):
        p, q = d.points2[e[0]], d.points2[e[1]]
        ln = d.length(e)
        out[e] = {n: frames_cut(p, q, frames.frames[n]) for n in frames.levels() if ln <= 4 ** n}
    return out


def length_class(length: float) -> int:
    """Smallest m >= 1 with length <= 4^m."""
    m = 1
    while length > 4 ** m:
        m += 1
    return m


def segments_hit_rect(P2: np.ndarray, Q2: np.ndarray, rect) -> np.ndarray:
    """Many closed segments (rows of P2, Q2) against one closed rectangle, doubled coordinates."""
    x1, y1, x2, y2 = (int(v) for v in rect)
    px, py, qx, qy = P2[:, 0], P2[:, 1], Q2[:, 0], Q2[:, 1]
    box = (np.maximum(px, qx) >= x1) & (np.minimum(px, qx) <= x2) & \
          (np.maximum(py, qy) >= y1) & (np.minimum(py, qy) <= y2)
    dx, dy = qx - px, qy - py
    s = np.stack([dx * (cy - py) - dy * (cx - px) for cx, cy in ((x1, y1), (x1, y2), (x2, y1), (x2, y2))])
    return box & ~(np.all(s > 0, axis=0) | np.all(s < 0, axis=0))


def reference_borders(width: int, height: int, phase=(0, 0), margin: int = 64, n_min: int = 1):
    """(n, corner, span) of every reference-tiling border meeting the window grown by ``margin``."""
    W, H = width + 2 * margin, height + 2 * margin
    out = []
    for n in range(n_min, robinson.max_level(W, H) + 1):
        for cx, cy in robinson.predicted_border_corners(W, H, (phase[0] - margin, phase[1] - margin), n):
            out.append((n, (cx - margin, cy - margin), 4 ** n))
    return out


def border_intersection_counts(P2, Q2, borders) -> np.ndarray:
    """Number of the given borders each segment meets (rows of P2, Q2)."""
    P2, Q2 = np.asarray(P2, dtype=np.int64).reshape(-1, 2), np.asarray(Q2, dtype=np.int64).reshape(-1, 2)
    counts = np.zeros(len(P2), dtype=np.int64)
    lo, hi = np.minimum(P2, Q2), np.maximum(P2, Q2)
    for _, corner, span in borders:
        x0, y0 = 2 * corner[0], 2 * corner[1]
        x1, y1 = x0 + 2 * span + 2, y0 + 2 * span + 2
        near = (hi[:, 0] >= x0) & (lo[:, 0] <= x1) & (hi[:, 1] >= y0) & (lo[:, 1] <= y1)
        if not near.any():
            continue
        idx = np.nonzero(near)[0]
        hit = np.zeros(len(idx), dtype=bool)
        for r in border_side_rects2(corner, span):
            hit |= segments_hit_rect(P2[idx], Q2[idx], r)
        counts[idx] += hit
    return counts


def frame_cut_counts(P2, Q2, frames) -> np.ndarray:
    """Number of the given frames each segment cuts."""
    P2, Q2 = np.asarray(P2, dtype=np.int64).reshape(-1, 2), np.asarray(Q2, dtype=np.int64).reshape(-1, 2)
    counts = np.zeros(len(P2), dtype=np.int64)
    for fr in frames:
        x0, y0, x1, y1 = 2 * fr[0], 2 * fr[1], 2 * fr[2] + 2, 2 * fr[3] + 2

        def where(pt):
            inner = (x0 < pt[:, 0]) & (pt[:, 0] < x1) & (y0 < pt[:, 1]) & (pt[:, 1] < y1)
            outer = (pt[:, 0] < x0) | (pt[:, 0] > x1) | (pt[:, 1] < y0) | (pt[:, 1] > y1)
            return inner, outer

        pi, po = where(P2)
        qi, qo = where(Q2)
        counts += (pi & qo) | (qi & po)
    return counts


def count_border_intersections(d: DelaunayTriangulation, width: int, height: int,
                               phase=(0, 0), margin: int = 64) -> dict:
    """edge -> number of n-borders (n >= the edge's length class) of the reference tiling it meets."""
    borders = reference_borders(width, height, phase, margin)
    out = {}
    for e in sorted(d.edges):
        m = length_class(d.length(e))
        sel = [b for b in borders if b[0] >= m]
        out[e] = int(border_intersection_counts(d.points2[e[0]], d.points2[e[1]], sel)[0])
    return out


# -- domain decomposition ------------------------------------------------------------


@dataclass(frozen=True)
class LevelDomains:
    n: int
    undomain_mask: np.ndarray  # [y, x]
    undomain_labels: np.ndarray
    domain_labels: np.ndarray
    n_undomains: int
    n_domains: int


@dataclass(frozen=True)
class DomainDecomposition:
    width: int
    height: int
    levels: dict = field(default_factory=dict)  # n -> LevelDomains

    def domain_cells(self, n: int, label: int) -> np.ndarray:
        return np.argwhere(self.levels[n].domain_labels == label)[:, ::-1]

    def nesting_ok(self) -> bool:
        """Every (n+1)-domain lies inside a single n-domain."""
        ns = sorted(self.levels)
        for a, b in zip(ns, ns[1:]):
            lo, hi = self.levels[a].domain_labels, self.levels[b].domain_labels
            for lab in range(1, self.levels[b].n_domains + 1):
                parents = np.unique(lo[hi == lab])
                if len(parents) != 1 or parents[0] == 0:
                    return False
        return True


def _ring_cover(free: np.ndarray, s: int, width: int, height: int) -> np.ndarray:
    """Cells lying on the ring of at least one free placement (corner grid ``free[y0, x0]``)."""
    ny, nx = free.shape
    pad = np.zeros((height, width), dtype=np.int64)
    pad[:ny, :nx] = free
    # horizontal sides: corner row y0 = y (bottom) or y - s (top), x0 in [x - s, x]
    ch = np.zeros((height, width + 1), dtype=np.int64)
    ch[:, 1:] = np.cumsum(pad, axis=1)
    xs = np.arange(width)
    row_hits = ch[:, xs + 1] - ch[:, np.clip(xs - s, 0, None)] > 0
    cov = row_hits.copy()
    cov[s:, :] |= row_hits[: height - s, :]
    # vertical sides: corner column x0 = x (left) or x - s (right), y0 in [y - s, y]
    cv = np.zeros((height + 1, width), dtype=np.int64)
    cv[1:, :] = np.cumsum(pad, axis=0)
    ys = np.arange(height)
    col_hits = cv[ys + 1, :] - cv[np.clip(ys - s, 0, None), :] > 0
    cov |= col_hits
    cov[:, s:] |= col_hits[:, : width - s]
    return cov


def decompose(dset: DefectSet, width: int, height: int, n_max: int | None = None) -> DomainDecomposition:
    """Direct-definition n-domain / n-undomain decomposition of a width x height region.

    A cell belongs to an n-undomain iff every m-border placement (any
    translation, m >= n, fitting the region) whose ring runs through the
    cell is blocked: its ring holds both cells of a defect, or meets an edge
    of the defect graph of l-infinity length <= 4^n.
    """
    top = robinson.max_level(width, height)
    n_max = top if n_max is None else min(n_max, top)
    p = _points2(dset)
    graph = DefectGraph(p)
    cells_by_edge = {}
    for e in graph.edges:
        cells_by_edge[e] = touched_cells(p[e[0]], p[e[1]], width, height)
    out = {}
    for n in range(1, n_max + 1):
        long_ok = [e for e in graph.edges if graph.length(e) <= 4 ** n]
        covered = np.zeros((height, width), dtype=bool)
        for m in range(n, top + 1):
            s = 4 ** m
            nx, ny = width - s, height - s  # corners x0 in [0, nx), y0 in [0, ny)
            blocked = np.zeros((ny, nx), dtype=bool)
            for px, py in p:
                (ax, ay), (bx, by) = DefectSet.cells_of((int(px), int(py)))
                _block_pair(blocked, ax, ay, bx, by, s)
            for e in long_ok:
                for tx, ty in cells_by_edge[e]:
                    _block_cell(blocked, int(tx), int(ty), s)
            covered |= _ring_cover(~blocked, s, width, height)
        und = ~covered
        ulab, nu = ndimage.label(und)
        dlab, nd = ndimage.label(~und)
        out[n] = LevelDomains(n, und, ulab, dlab, nu, nd)
    return DomainDecomposition(width, height, out)


def _block_cell(blocked: np.ndarray, tx: int, ty: int, s: int):
    """Block every placement (corner x0, y0; span s) whose ring contains cell (tx, ty)."""
    ny, nx = blocked.shape
    for x0 in (tx, tx - s):  # vertical sides
        if 0 <= x0 < nx:
            blocked[max(0, ty - s): min(ny, ty + 1), x0] = True
    for y0 in (ty, ty - s):  # horizontal sides
        if 0 <= y0 < ny:
            blocked[y0, max(0, tx - s): min(nx, tx + 1)] = True


def _block_pair(blocked, ax, ay, bx, by, s):
    """Block placements whose ring contains both cells a and b (adjacent)."""
    ny, nx = blocked.shape
    if ay == by:  # horizontal neighbours: both on a horizontal side
        for y0 in (ay, ay - s):
            if 0 <= y0 < ny:
                blocked[y0, max(0, bx - s): min(nx, ax + 1)] = True
    else:
        for x0 in (ax, ax - s):
            if 0 <= x0 < nx:
                blocked[max(0, by - s): min(ny, ay + 1), x0] = True


# -- injection ----------------------------------------------------------------------


def inject_defects(c: Configuration, k: int, seed: int, ts) -> Configuration:
    """Replace k distinct seeded-random cells by tiles clashing with a neighbour."""
    if k == 0:
        return c
    base = ts.base if hasattr(ts, "base") else ts
    g = c.grid
    H, W = g.shape
    if k > H * W:
        raise ValueError("more defects than cells")
    rng = np.random.default_rng(seed)
    cells = rng.choice(H * W, size=k, replace=False)
    changes = {}
    for idx in sorted(int(i) for i in cells):
        y, x = divmod(idx, W)
        bad = np.zeros(base.d, dtype=bool)
        if x > 0:
            bad |= ~base.horz[g[y, x - 1], :]
        if x < W - 1:
            bad |= ~base.horz[:, g[y, x + 1]]
        if y > 0:
            bad |= ~base.vert[g[y - 1, x], :]
        if y < H - 1:
            bad |= ~base.vert[:, g[y + 1, x]]
        bad[g[y, x]] = False
        choices = np.nonzero(bad)[0]
        changes[(x, y)] = int(rng.choice(choices))
    return c.replace(changes)


# -- deficits ----------------------------------------------------------------------------


@lru_cache(maxsize=64)
def robinson_counts(width: int, height: int, n_max: int) -> np.ndarray:
    """counts[px, py, n-1]: complete n-borders of the phase-(px, py) tiling in the window,
    for every phase modulo the largest relevant period."""
    period = 2 ** (2 * n_max + 1) if n_max else 1
    ph = np.arange(period)
    out = np.zeros((period, period, max(n_max, 1)), dtype=np.int64)
    for n in range(1, n_max + 1):
        k, s = robinson.border_level(n), 4 ** n

        def axis(length):
            res = np.zeros(period, dtype=np.int64)
            for p in ph:
                u = robinson.shifted(np.arange(max(length - s, 0)), int(p))
                res[p] = int(np.sum(np.mod(u, 1 << (k + 2)) == (1 << k)))
            return res

        out[:, :, n - 1] = axis(width)[:, None] * axis(height)[None, :]
    return out


def _defect_cell_mask(d: DefectSet, width, height) -> np.ndarray:
    m = np.zeros((height, width), dtype=bool)
    for pt in d:
        for x, y in DefectSet.cells_of(pt):
            m[y, x] = True
    return m


def _sum2(c, x0, y0, x1, y1):
    """Sum over mask[y0..y1, x0..x1] from a padded 2-d prefix table."""
    return c[y1 + 1, x1 + 1] - c[y0, x1 + 1] - c[y1 + 1, x0] + c[y0, x0]


def tm_history_ok(ts, c: Configuration, b, borders) -> bool:
    """The TM tokens inside b form a computation history of the compiled machine."""
    from . import tm

    cm = ts.machine
    try:
        rows = robinson.tm_history(ts, c, b, borders)
    except Exception:
        return False
    n = b.n
    width = 2 ** n + 1
    inv = {cm.token(*v): v for v in cm.values}
    configs = []
    for row in rows:
        if any(t not in inv for t in row):
            return False
        vals = [inv[t] for t in row]
        heads = [i for i, (_, q) in enumerate(vals) if q is not None]
        if len(heads) != 1:
            return False
        configs.append(tm.Config((0, tuple(s for s, _ in vals)), heads[0], vals[heads[0]][1]))
    if configs[0] != tm.initial_config(cm.spec, "", width):
        return False
    for a, nxt in zip(configs, configs[1:]):
        succ = tm._successors(cm.spec, a, width) or [a]
        if nxt not in succ:
            return False
    return True


@dataclass(frozen=True)
class SquareVerdict:
    square: bool
    obstruction: bool
    tm: bool


def square_verdicts(ts, c: Configuration, borders, dset: DefectSet | None = None) -> list[SquareVerdict]:
    """Per complete border: is it an intact n-square, with correct obstruction and TM layers?"""
    if dset is None:
        dset = defects(ts.base, c)
    H, W = c.height, c.width
    pref = np.zeros((H + 1, W + 1), dtype=np.int64)
    pref[1:, 1:] = np.cumsum(np.cumsum(_defect_cell_mask(dset, W, H), axis=0), axis=1)
    corners = np.array([b.corner for b in borders], dtype=np.int64).reshape(-1, 2)
    spans = np.array([b.span for b in borders], dtype=np.int64)
    flags = robinson._obstruction_flags(ts, c) if ts.has("obstruction") else None
    out = []
    for i, b in enumerate(borders):
        x0, y0, x1, y1 = b.bbox()
        sel = (corners[:, 0] > x0) & (corners[:, 1] > y0) & \
              (corners[:, 0] + spans < x1) & (corners[:, 1] + spans < y1)
        cand = [borders[j] for j in np.nonzero(sel)[0]]
        inner = robinson.inner_borders(b, cand)
        want = robinson.expected_inner_corners(b)
        ok = sorted((o.n, o.corner) for o in inner) == want
        if ok:
            bad = _sum2(pref, x0, y0, x1, y1)
            for o in inner:
                ox0, oy0, ox1, oy1 = o.bbox()
                if ox1 - ox0 >= 2:
                    bad -= _sum2(pref, ox0 + 1, oy0 + 1, ox1 - 1, oy1 - 1)
            ok = bad == 0
        ob = ok and (flags is None or robinson.check_obstruction(ts, c, b, cand + [b], _flags=flags))
        tmok = ob and (not ts.has("tm") or tm_history_ok(ts, c, b, cand + [b]))
        out.append(SquareVerdict(ok, ob, tmok))
    return out


@dataclass(frozen=True)
class DeficitReport:
    L: int  # perimeter of the region
    D: int
    per_level: dict  # n -> dict(borders_T, squares_T, obstruction_T, tm_T, robinson)
    deficit: int
    sdeficit: int
    odeficit: int
    tdeficit: int
    best_phase: tuple

    @property
    def bounds(self) -> dict:
        d, L = self.D, self.L
        return {"deficit": 399 * d + L, "sdeficit": 799 * d + 2 * L,
                "odeficit": 800 * d + 2 * L, "tdeficit": 801 * d + 2 * L}

    def slack(self) -> dict:
        return {k: self.bounds[k] - getattr(self, k) for k in self.bounds}

    def ok(self) -> bool:
        return all(v >= 0 for v in self.slack().values())


def measure_deficits(ts, c: Configuration, reference_phase=None, base=None) -> DeficitReport:
    """Shortfall of complete borders / squares against the best Robinson tiling of the window.

    Each total is ``max_R sum_n max(0, count_R(n) - count_T(n))`` over all
    translations R of the reference hierarchy (``reference_phase`` pins R to a
    single phase instead).  ``base`` is an optional (configuration, borders,
    verdicts) triple of an unmodified tiling: squares whose window holds no
    changed cell reuse its verdicts.
    """
    W, H = c.width, c.height
    n_max = robinson.max_level(W, H)
    dset = defects(ts.base, c)
    borders = robinson.find_borders(ts, c)
    verdicts = None
    if base is not None:
        bc, bborders, bverd = base
        changed = np.argwhere(bc.grid != c.grid)
        if changed.size:
            prev = {b: v for b, v in zip(bborders, bverd)}
            verdicts = []
            todo = []
            for i, b in enumerate(borders):
                x0, y0, x1, y1 = b.bbox()
                near = np.any((changed[:, 1] >= x0 - 1) & (changed[:, 1] <= x1 + 1) &
                              (changed[:, 0] >= y0 - 1) & (changed[:, 0] <= y1 + 1))
                if not near and b in prev:
                    verdicts.append(prev[b])
                else:
                    verdicts.append(None)
                    todo.append(i)
            if todo:
                fresh = _verdicts_for(ts, c, borders, todo, dset)
                for i, v in zip(todo, fresh):
                    verdicts[i] = v
        else:
            verdicts = list(bverd)
    if verdicts is None:
        verdicts = square_verdicts(ts, c, borders, dset)
    tcount = np.zeros((4, max(n_max, 1)), dtype=np.int64)
    for b, v in zip(borders, verdicts):
        tcount[:, b.n - 1] += (1, v.square, v.obstruction, v.tm)
    rc = robinson_counts(W, H, n_max)
    if reference_phase is not None:
        P = rc.shape[0]
        rc = rc[reference_phase[0] % P: reference_phase[0] % P + 1, reference_phase[1] % P: reference_phase[1] % P + 1]
    short = np.maximum(rc[None, ...] - tcount[:, None, None, :], 0).sum(axis=-1)  # (4, P, P)
    totals = short.reshape(4, -1).max(axis=1)
    best = np.unravel_index(int(np.argmax(short[0])), short[0].shape)
    per = {n: {"borders_T": int(tcount[0, n - 1]), "squares_T": int(tcount[1, n - 1]),
               "obstruction_T": int(tcount[2, n - 1]), "tm_T": int(tcount[3, n - 1]),
               "robinson_max": int(rc[..., n - 1].max())} for n in range(1, n_max + 1)}
    return DeficitReport(2 * (W + H), len(dset), per, *(int(t) for t in totals),
                         (int(best[0]), int(best[1])))


def _verdicts_for(ts, c, borders, idx, dset):
    sub = [borders[i] for i in idx]
    # inner-border search needs all borders, so evaluate against the full list
    allv = {}
    corners = np.array([b.corner for b in borders], dtype=np.int64).reshape(-1, 2)
    spans = np.array([b.span for b in borders], dtype=np.int64)
    res = []
    for b in sub:
        x0, y0, x1, y1 = b.bbox()
        sel = (corners[:, 0] > x0) & (corners[:, 1] > y0) & \
              (corners[:, 0] + spans < x1) & (corners[:, 1] + spans < y1)
        cand = [b] + [borders[j] for j in np.nonzero(sel)[0]]
        res.append(square_verdicts(ts, c, cand, dset)[0])
    return res


def base_state(ts, c: Configuration):
    borders = robinson.find_borders(ts, c)
    return c, borders, square_verdicts(ts, c, borders)
