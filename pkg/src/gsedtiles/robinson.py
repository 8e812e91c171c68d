"""Robinson tilings: derived tile set, hierarchical generator, border analysis.

Geometry
--------
Cell ``(x, y)`` of a window with phase ``(px, py)`` sits at shifted coordinates
``ux = x + px + 1 + ORIGIN`` (same for y).  With ``v`` the 2-adic valuation, a
cell is a cross iff ``v(ux) == v(uy)`` (its level), otherwise an arm.  A level-k
cross faces the unique diagonal neighbour at distance ``2^k`` whose coordinates
both have valuation ``k + 1``; the four level-k crosses around that neighbour
are the corners of a level-k square, ``2^(k+1) + 1`` cells across.  Odd levels
are red; the red level ``2n - 1`` squares are the n-borders (corner cells
``4^n`` apart, a ``(4^n - 1)``-square interior), repeating every ``2^(2n+1)``.

Every edge carries one token per layer, computed from the global pattern, so
tiles (the 4-tuples of edge labels realized by the generator) match by token
equality.  Robinson tokens are an arrow direction plus a line kind: ``s``
single, ``R``/``G`` red/green double line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import AnalysisError, ConfigError
from .wang import Configuration, DefectSet, Tile, TileSet, bind, defects

ORIGIN = 1 << 12
LAYERS = ("robinson", "dash", "obstruction", "tm")
KNOWN_LAYERS = frozenset(LAYERS)
MAX_LEVEL = 40

ROB_TOKENS = [d + k for d in "><" for k in "sRG"] + [d + k for d in "^v" for k in "sRG"]
DASH_TOKENS = ["r0", "r1", "c0", "c1"]
OBS_TOKENS = ["-", "o>", "ov"]  # horizontal signals run left-to-right, vertical ones downward

ORIENTATIONS = ("UR", "UL", "DL", "DR")
# corner cell -> cross orientation of an n-border (crosses face the square's centre)
CORNER_ORIENTATION = {"bl": "UR", "br": "UL", "tl": "DR", "tr": "DL"}


def valuation(u):
    """2-adic valuation of positive integers (numpy arrays or ints)."""
    u = np.asarray(u, dtype=np.int64)
    if np.any(u <= 0):
        raise ValueError("shifted coordinate left the supported half-plane; reduce the phase offset")
    low = u & -u
    return np.log2(low).astype(np.int64)


def shifted(coords, phase: int):
    return np.asarray(coords, dtype=np.int64) + phase + 1 + ORIGIN


# -- free rows / columns ------------------------------------------------------


@lru_cache(maxsize=None)
def free_offsets(level: int) -> tuple[int, ...]:
    """Free positions (1 .. 2^(level+1) - 1, measured from the ring) of a red square."""
    out = []
    for r in range(1, 2 ** (level + 1)):
        if all(not (2 ** m <= r % 2 ** (m + 2) <= 3 * 2 ** m) for m in range(1, level, 2)):
            out.append(r)
    return tuple(out)


def border_level(n: int) -> int:
    return 2 * n - 1


def free_count(n: int) -> int:
    return 2 ** n + 1


# -- per-window semantic arrays ---------------------------------------------


class _Window:
    """Semantic arrays over an extended window (one extra cell on each side)."""

    def __init__(self, x0: int, y0: int, width: int, height: int, phase=(0, 0)):
        self.x0, self.y0, self.width, self.height = x0, y0, width, height
        xs = np.arange(x0 - 1, x0 + width + 1)
        ys = np.arange(y0 - 1, y0 + height + 1)
        self.ux = shifted(xs, phase[0])
        self.uy = shifted(ys, phase[1])
        self.vx = valuation(self.ux)
        self.vy = valuation(self.uy)
        self._ring()
        self._enclosure()

    # robinson line tokens ---------------------------------------------------

    @staticmethod
    def _line_tokens(u_left: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Token codes for edges between u_left and u_left + 1 on lines of valuation b.

        ``u_left`` has shape (E,), ``b`` shape (L, 1); result (L, E), codes 0..5
        as ``dir * 3 + kind`` with dir 0 = increasing coordinate.
        """
        half = np.left_shift(1, b)
        period = half * 2
        r = np.mod(u_left[None, :] - half, period)
        left = r < half
        cross = np.where(left, u_left[None, :] - r, u_left[None, :] - r + period)
        faces_up = np.mod(cross, 2 * period) == half  # cross's centre lies at higher coordinate
        double = np.where(left, faces_up, ~faces_up)
        kind = np.where(double, np.where(b % 2 == 1, 1, 2), 0)
        return np.where(left, 0, 3) + kind

    def robinson_codes(self):
        """(east, north) token codes for every extended cell; west/south are shifts."""
        east = self._line_tokens(self.ux, self.vy[:, None])  # (H+2, W+2): edge to the right
        north = self._line_tokens(self.uy, self.vx[:, None]).T  # (H+2, W+2): edge above
        return east, north + 6

    # obstruction / enclosure -------------------------------------------------

    def _ring(self):
        vx, vy = self.vx[None, :], self.vy[:, None]
        ux, uy = self.ux[None, :], self.uy[:, None]

        def side(v, u_other):
            span = np.mod(u_other, np.left_shift(1, v + 2))
            return (v % 2 == 1) & (span >= np.left_shift(1, v)) & (span <= 3 * np.left_shift(1, v))

        self.ring_v = side(vx, uy)  # on a vertical side of a red ring
        self.ring_h = side(vy, ux)
        self.ring = self.ring_v | self.ring_h

    def _enclosure(self):
        shape = (len(self.uy), len(self.ux))
        level = np.zeros(shape, dtype=np.int64)
        relx = np.zeros(shape, dtype=np.int64)
        rely = np.zeros(shape, dtype=np.int64)
        for k in range(1, MAX_LEVEL, 2):
            mod = 1 << (k + 2)
            rx = np.mod(self.ux, mod) - (1 << k)
            ry = np.mod(self.uy, mod) - (1 << k)
            inx = (rx > 0) & (rx < (1 << (k + 1)))
            iny = (ry > 0) & (ry < (1 << (k + 1)))
            new = (level == 0) & ~self.ring & iny[:, None] & inx[None, :]
            level[new] = k
            relx[new] = np.broadcast_to(rx[None, :], shape)[new]
            rely[new] = np.broadcast_to(ry[:, None], shape)[new]
            if not np.any((level == 0) & ~self.ring):
                break
        self.level, self.relx, self.rely = level, relx, rely
        self.colfree = np.zeros(shape, dtype=bool)
        self.rowfree = np.zeros(shape, dtype=bool)
        self.colidx = np.full(shape, -1, dtype=np.int64)  # number of free columns left of the cell
        self.rowidx = np.full(shape, -1, dtype=np.int64)
        for k in np.unique(level[level > 0]):
            offs = np.array(free_offsets(int(k)))
            m = level == k
            self.colfree[m] = np.isin(relx[m], offs)
            self.rowfree[m] = np.isin(rely[m], offs)
            self.colidx[m] = np.searchsorted(offs, relx[m], side="left")
            self.rowidx[m] = np.searchsorted(offs, rely[m], side="left")
        inside = level > 0
        self.hsig = inside & ~self.rowfree
        self.vsig = inside & ~self.colfree

    def obstruction_codes(self):
        east = np.zeros_like(self.level)
        east[:, :-1] = np.where(self.hsig[:, :-1] | self.hsig[:, 1:], 1, 0)
        north = np.zeros_like(self.level)
        north[:-1, :] = np.where(self.vsig[:-1, :] | self.vsig[1:, :], 2, 0)
        return east, north

    def tm_roles(self):
        """Structural role of each extended cell for the TM layer (see ``TM_ROLES``)."""
        lv = self.level
        role = np.full(lv.shape, "none", dtype=object)
        inside = lv > 0
        cf, rf = self.colfree, self.rowfree
        role[inside & cf & ~rf] = "colT"
        role[inside & rf & ~cf] = "rowT"
        free = inside & cf & rf
        for y, x in zip(*np.nonzero(free)):
            n = (int(lv[y, x]) + 1) // 2
            flags = ("L" if self.colidx[y, x] == 0 else "") + \
                    ("R" if self.colidx[y, x] == free_count(n) - 1 else "") + \
                    ("T" if self.rowidx[y, x] == free_count(n) - 1 else "")
            role[y, x] = "free" + (":" + flags if flags else "")
        # ring cells adjacent to a free row/column of the square they bound
        H, W = lv.shape
        for y, x in zip(*np.nonzero(self.ring)):
            if y + 1 < H and inside[y + 1, x] and cf[y + 1, x] and self.rely[y + 1, x] == 1:
                k = int(lv[y + 1, x])
                centre = self.relx[y + 1, x] == (1 << k)
                role[y, x] = "emitq" if centre else "emit"
            elif y >= 1 and inside[y - 1, x] and cf[y - 1, x] and \
                    self.rely[y - 1, x] == (1 << (int(lv[y - 1, x]) + 1)) - 1:
                role[y, x] = "absorbT"
            elif x + 1 < W and inside[y, x + 1] and rf[y, x + 1] and self.relx[y, x + 1] == 1:
                role[y, x] = "absorbL"
            elif x >= 1 and inside[y, x - 1] and rf[y, x - 1] and \
                    self.relx[y, x - 1] == (1 << (int(lv[y, x - 1]) + 1)) - 1:
                role[y, x] = "absorbR"
        return role

    def tm_tokens(self, traces):
        """TM-layer (east, north) token strings for every extended cell."""
        lv = self.level
        H, W = lv.shape
        east = np.full((H, W), "-", dtype=object)
        north = np.full((H, W), "-", dtype=object)
        inside = lv > 0
        for y in range(H - 1):
            for x in range(W):
                up, lo = (y + 1, x), (y, x)
                if inside[up]:
                    if self.colfree[up]:
                        n = (int(lv[up]) + 1) // 2
                        f = int(self.rowidx[up])  # free rows strictly below `up`
                        north[lo] = traces(n).cell_token(f, int(self.colidx[up]))
                elif inside[lo] and self.colfree[lo]:
                    north[lo] = "x"
        for y in range(H):
            for x in range(W - 1):
                rt, lf = (y, x + 1), (y, x)
                if inside[rt]:
                    if self.rowfree[rt]:
                        n = (int(lv[rt]) + 1) // 2
                        g = int(self.colidx[rt])
                        east[lf] = "|" if g == 0 else traces(n).move_token(int(self.rowidx[rt]), g)
                elif inside[lf] and self.rowfree[lf]:
                    east[lf] = "|"
        return east, north


TM_ROLES = ("none", "colT", "rowT", "emit", "emitq", "absorbT", "absorbL", "absorbR")


# -- tile set -----------------------------------------------------------------


def _classify(rob: tuple[str, str, str, str]) -> dict:
    n, e, s, w = rob
    out = {"is_cross": False, "cross_orientation": None, "colour": None,
           "is_arm": False, "arm_direction": None, "red_h": False, "red_v": False,
           "red_double_arrow": False}
    if e[0] == ">" and w[0] == "<" and n[0] == "^" and s[0] == "v":
        vert = "U" if n[1] != "s" else "D"
        hor = "R" if e[1] != "s" else "L"
        kinds = {k[1] for k in rob if k[1] != "s"}
        out.update(is_cross=True, cross_orientation=vert + hor,
                   colour="red" if kinds == {"R"} else "green" if kinds == {"G"} else None)
        return out
    out["is_arm"] = True
    if e[0] == w[0]:
        out["arm_direction"] = "right" if e[0] == ">" else "left"
    elif n[0] == s[0]:
        out["arm_direction"] = "up" if n[0] == "^" else "down"
    out["red_h"] = e[1] == "R" and w[1] == "R"
    out["red_v"] = n[1] == "R" and s[1] == "R"
    out["red_double_arrow"] = out["red_h"] or out["red_v"]
    return out


@dataclass(frozen=True)
class RobinsonTileSet:
    base: TileSet
    layer_index: dict
    classifiers: tuple
    machine: object = None  # CompiledMachine when the tm layer is present
    _lookup: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def layers(self):
        return self.base.layers

    @property
    def d(self):
        return self.base.d

    def has(self, layer):
        return layer in self.layer_index

    def tile_id(self, north, east, south, west) -> int:
        t = self.base.find(north, east, south, west)
        if t is None:
            raise KeyError((north, east, south, west))
        return t

    def class_array(self, key) -> np.ndarray:
        return np.array([c[key] for c in self.classifiers])


def _side_labels(win: _Window, layers, traces=None):
    """Per-extended-cell label tuples for (north, east, south, west)."""
    re, rn = win.robinson_codes()
    H, W = re.shape
    cols = {}
    rob_e = np.array(ROB_TOKENS, dtype=object)[re]
    rob_n = np.array(ROB_TOKENS, dtype=object)[rn]
    cols["robinson"] = (rob_e, rob_n)
    rpar = np.broadcast_to((win.uy % 2)[:, None], (H, W))
    cpar = np.broadcast_to((win.ux % 2)[None, :], (H, W))
    cols["dash"] = (np.array(DASH_TOKENS, dtype=object)[rpar],
                    np.array(DASH_TOKENS, dtype=object)[2 + cpar])
    if "obstruction" in layers:
        oe, on = win.obstruction_codes()
        cols["obstruction"] = (np.array(OBS_TOKENS, dtype=object)[oe],
                               np.array(OBS_TOKENS, dtype=object)[on])
    if "tm" in layers:
        cols["tm"] = win.tm_tokens(traces)
    return cols


def _cell_labels(cols, layers, y, x):
    north = tuple(cols[l][1][y, x] for l in layers)
    east = tuple(cols[l][0][y, x] for l in layers)
    south = tuple(cols[l][1][y - 1, x] for l in layers)
    west = tuple(cols[l][0][y, x - 1] for l in layers)
    return north, east, south, west


ATLAS_SIZE = 320


def build_tileset(layers=("robinson", "dash"), machine=None, atlas: int = ATLAS_SIZE) -> RobinsonTileSet:
    """Derive the closed tile set from the local patterns of the generator.

    With the ``tm`` layer, ``machine`` must be a ``CompiledMachine``; TM tokens
    are not read from the atlas but multiplied in per structural role from the
    machine's fragment tables, so every computation path has its tiles.
    """
    layers = set(layers)
    unknown = layers - KNOWN_LAYERS
    if unknown:
        raise ConfigError(f"unknown layer(s): {sorted(unknown)}")
    if not {"robinson", "dash"} <= layers:
        raise ConfigError("layers must include 'robinson' and 'dash'")
    if "tm" in layers and "obstruction" not in layers:
        raise ConfigError("the tm layer needs the obstruction layer")
    if "tm" in layers and machine is None:
        raise ConfigError("the tm layer needs a compiled machine")
    ordered = tuple(l for l in LAYERS if l in layers)
    struct_layers = tuple(l for l in ordered if l != "tm")

    win = _Window(0, 0, atlas, atlas)
    cols = _side_labels(win, struct_layers)
    roles = win.tm_roles() if "tm" in layers else None
    seen = {}
    H, W = win.level.shape
    for y in range(1, H - 1):
        for x in range(1, W - 1):
            key = _cell_labels(cols, struct_layers, y, x)
            role = roles[y, x] if roles is not None else None
            seen.setdefault((key, role), None)

    tiles, meta = [], []
    for (key, role) in sorted(seen, key=lambda kr: (kr[0], kr[1] or "")):
        cls = _classify(tuple(lab[0] for lab in key))
        frags = machine.fragments(role) if role is not None else [None]
        for frag in frags:
            labels = key if frag is None else tuple(lab + (tok,) for lab, tok in zip(key, frag))
            m = dict(cls, role=role)
            tiles.append(Tile(len(tiles), *labels))
            meta.append(m)
    name = "robinson-" + "-".join(ordered)
    base = TileSet(tiles, ordered, name=name, meta=meta)
    return RobinsonTileSet(base, {l: i for i, l in enumerate(ordered)}, tuple(meta), machine)


# -- generator ------------------------------------------------------------------


def generate_tiling(ts: RobinsonTileSet, width: int, height: int, phase=(0, 0),
                    histories: dict | None = None) -> Configuration:
    """Restriction of the canonical infinite tiling, shifted by ``phase``, to a window.

    ``histories`` optionally maps a level n to the configuration sequence shown
    by every n-square of the window instead of the canonical path.
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be >= 1")
    win = _Window(0, 0, width, height, phase)
    traces = None
    if ts.has("tm"):
        from .tm import SquareTrace
        custom = {n: SquareTrace(ts.machine, n, h) for n, h in (histories or {}).items()}
        traces = lambda n: custom[n] if n in custom else ts.machine.square_trace(n)
    cols = _side_labels(win, ts.layers, traces)
    grid = np.empty((height, width), dtype=np.int32)
    find = ts.base.find
    for y in range(height):
        for x in range(width):
            t = find(*_cell_labels(cols, ts.layers, y + 1, x + 1))
            if t is None:
                raise AnalysisError("generator produced a tile missing from the tile set; "
                                    "rebuild the tile set with a larger atlas", (x, y))
            grid[y, x] = t
    return Configuration(grid, ts.base.digest())


def tm_roles(width: int, height: int, phase=(0, 0)) -> np.ndarray:
    """TM-layer structural role of every cell of a window (row 0 at the bottom)."""
    return _Window(0, 0, width, height, phase).tm_roles()[1:-1, 1:-1]


def free_cell_mask(width: int, height: int, phase=(0, 0)) -> np.ndarray:
    w = _Window(0, 0, width, height, phase)
    return (w.colfree & w.rowfree & (w.level > 0))[1:-1, 1:-1]


# -- borders ----------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class BorderRecord:
    n: int
    corner: tuple  # bottom-left corner cell (x, y)
    side: int  # interior side, 4^n - 1
    complete: bool = True

    @property
    def span(self) -> int:
        """Distance between corner cells (the ring is span + 1 cells across)."""
        return self.side + 1

    def ring_cells(self):
        x, y = self.corner
        s = self.span
        for i in range(s + 1):
            yield (x + i, y)
            yield (x + i, y + s)
        for j in range(1, s):
            yield (x, y + j)
            yield (x + s, y + j)

    def bbox(self):
        x, y = self.corner
        return x, y, x + self.span, y + self.span

    def contains(self, x, y) -> bool:
        """Inside the ring or on it."""
        x0, y0, x1, y1 = self.bbox()
        return x0 <= x <= x1 and y0 <= y <= y1


def _classifier_arrays(ts: RobinsonTileSet):
    cls = ts.classifiers
    red_cross = np.array([c["is_cross"] and c["colour"] == "red" for c in cls])
    orient = np.array([c["cross_orientation"] or "" for c in cls])
    return {
        "bl": red_cross & (orient == "UR"), "br": red_cross & (orient == "UL"),
        "tl": red_cross & (orient == "DR"), "tr": red_cross & (orient == "DL"),
        "red_h": np.array([c["red_h"] for c in cls]), "red_v": np.array([c["red_v"] for c in cls]),
    }


def max_level(width: int, height: int) -> int:
    n = 0
    while 4 ** (n + 1) + 1 <= min(width, height):
        n += 1
    return n


def find_borders(ts: RobinsonTileSet, c: Configuration) -> list[BorderRecord]:
    """All complete n-borders of ``c``, sorted by (n, corner)."""
    bind(ts.base, c)
    arr = _classifier_arrays(ts)
    g = c.grid
    H, W = g.shape
    masks = {k: v[g] for k, v in arr.items()}
    # prefix sums: ch[y, x] = number of red_h cells in row y before column x
    ch = np.zeros((H, W + 1), dtype=np.int64)
    ch[:, 1:] = np.cumsum(masks["red_h"], axis=1)
    cv = np.zeros((H + 1, W), dtype=np.int64)
    cv[1:, :] = np.cumsum(masks["red_v"], axis=0)
    out = []
    for n in range(1, max_level(W, H) + 1):
        s = 4 ** n
        ys, xs = np.nonzero(masks["bl"][: H - s, : W - s])
        if xs.size == 0:
            continue
        ok = masks["br"][ys, xs + s] & masks["tl"][ys + s, xs] & masks["tr"][ys + s, xs + s]
        ok &= (ch[ys, xs + s] - ch[ys, xs + 1]) == s - 1
        ok &= (ch[ys + s, xs + s] - ch[ys + s, xs + 1]) == s - 1
        ok &= (cv[ys + s, xs] - cv[ys + 1, xs]) == s - 1
        ok &= (cv[ys + s, xs + s] - cv[ys + 1, xs + s]) == s - 1
        out += [BorderRecord(n, (int(x), int(y)), s - 1) for x, y in zip(xs[ok], ys[ok])]
    return sorted(out)


def predicted_border_corners(width: int, height: int, phase=(0, 0), n: int = 1) -> list[tuple]:
    """Bottom-left corners of the n-borders the canonical tiling places fully in the window."""
    k = border_level(n)
    s = 4 ** n

    def axis(length, p):
        u = shifted(np.arange(length), p)
        return [int(i) for i in np.nonzero(np.mod(u, 1 << (k + 2)) == (1 << k))[0] if i + s < length]

    return [(x, y) for y in axis(height, phase[1]) for x in axis(width, phase[0])]


def predicted_border_counts(width, height, phase=(0, 0)) -> dict:
    return {n: len(predicted_border_corners(width, height, phase, n))
            for n in range(1, max_level(width, height) + 1)}


# -- free cells / obstruction -----------------------------------------------------


@dataclass(frozen=True)
class FreeCellMap:
    border: BorderRecord
    free_rows: tuple
    free_cols: tuple

    @property
    def free_cells(self):
        return [[(x, y) for x in self.free_cols] for y in self.free_rows]

    def is_free(self, x, y) -> bool:
        return x in self.free_cols and y in self.free_rows


def inner_borders(b: BorderRecord, borders: Sequence[BorderRecord]) -> list[BorderRecord]:
    """Smaller borders strictly inside ``b`` and not inside another such border."""
    x0, y0, x1, y1 = b.bbox()
    inside = [o for o in borders if o.n < b.n and x0 < o.corner[0] and y0 < o.corner[1]
              and o.bbox()[2] < x1 and o.bbox()[3] < y1]
    return [o for o in inside
            if not any(p is not o and p.n > o.n and p.contains(*o.corner) for p in inside)]


def expected_inner_corners(b: BorderRecord) -> list[tuple]:
    """Where the canonical pattern puts the inner borders of ``b`` (absolute corners)."""
    k = border_level(b.n)
    out = []
    s = b.span
    for m in range(1, b.n):
        km, sm = border_level(m), 4 ** m
        # the corner of b sits at u = 2^k mod 2^(k+2); lower levels are periodic inside
        pos = [r for r in range(1, s) if (r + (1 << k)) % (1 << (km + 2)) == (1 << km) and r + sm < s]
        for ry in pos:
            for rx in pos:
                out.append((m, (b.corner[0] + rx, b.corner[1] + ry)))
    recs = [BorderRecord(m, c, 4 ** m - 1) for m, c in out]
    return sorted((r.n, r.corner) for r in inner_borders(b, recs))


def free_cells(ts: RobinsonTileSet, c: Configuration, b: BorderRecord,
               borders: Sequence[BorderRecord] | None = None) -> FreeCellMap:
    """Free rows/columns of a complete border, checked against the Robinson pattern."""
    if borders is None:
        borders = find_borders(ts, c)
    inner = inner_borders(b, borders)
    x0, y0, x1, y1 = b.bbox()
    hit_rows, hit_cols = set(), set()
    for o in inner:
        ox0, oy0, ox1, oy1 = o.bbox()
        hit_rows.update(range(oy0, oy1 + 1))
        hit_cols.update(range(ox0, ox1 + 1))
    rows = tuple(y for y in range(y0 + 1, y1) if y not in hit_rows)
    cols = tuple(x for x in range(x0 + 1, x1) if x not in hit_cols)
    want = free_offsets(border_level(b.n))
    for got, origin, axis in ((rows, y0, "row"), (cols, x0, "column")):
        rel = tuple(v - origin for v in got)
        if rel != want:
            bad = next((a for a, w in zip(rel + (None,) * len(want), want) if a != w), None)
            loc = (b.corner, axis, origin + bad if bad is not None else None)
            raise AnalysisError(f"interior of {b.n}-border does not follow the Robinson pattern "
                                f"({len(rel)} free {axis}s, expected {len(want)})", loc)
    return FreeCellMap(b, rows, cols)


def _obstruction_flags(ts: RobinsonTileSet, c: Configuration):
    li = ts.layer_index["obstruction"]
    tiles = ts.base.tiles
    h = np.array([t.east[li] == "o>" and t.west[li] == "o>" for t in tiles])
    v = np.array([t.north[li] == "ov" and t.south[li] == "ov" for t in tiles])
    none = np.array([all(lab[li] == "-" for lab in t.edges()) for t in tiles])
    return h[c.grid], v[c.grid], none[c.grid]


def check_obstruction(ts: RobinsonTileSet, c: Configuration, b: BorderRecord,
                      borders: Sequence[BorderRecord] | None = None, _flags=None) -> bool:
    """True iff the square inside ``b`` carries a correct obstruction tiling."""
    if not ts.has("obstruction"):
        raise ConfigError("tile set has no obstruction layer")
    if borders is None:
        borders = find_borders(ts, c)
    try:
        fm = free_cells(ts, c, b, borders)
    except AnalysisError:
        return False
    hflag, vflag, noflag = _flags if _flags is not None else _obstruction_flags(ts, c)
    x0, y0, x1, y1 = b.bbox()
    region = np.zeros((y1 - y0 - 1, x1 - x0 - 1), dtype=bool)
    region[:] = True
    for o in inner_borders(b, borders):
        ox0, oy0, ox1, oy1 = o.bbox()
        region[oy0 - y0 - 1: oy1 - y0, ox0 - x0 - 1: ox1 - x0] = False
    fr = np.isin(np.arange(y0 + 1, y1), fm.free_rows)[:, None]
    fc = np.isin(np.arange(x0 + 1, x1), fm.free_cols)[None, :]
    sl = (slice(y0 + 1, y1), slice(x0 + 1, x1))
    h, v, none = hflag[sl], vflag[sl], noflag[sl]
    ok = (none == (fr & fc)) & (h == ~fr) & (v == ~fc)
    return bool(np.all(ok[region]))


def square_phase(n: int) -> tuple:
    """Phase placing an n-border's bottom-left corner at cell (0, 0)."""
    p = (1 << border_level(n)) - 1
    return (p, p)


def tm_history(ts: RobinsonTileSet, c: Configuration, b: BorderRecord,
               borders: Sequence[BorderRecord] | None = None) -> list[list[str]]:
    """TM-layer tokens on the south edges of the free cells, one list per free row."""
    if not ts.has("tm"):
        raise ConfigError("tile set has no tm layer")
    fm = free_cells(ts, c, b, borders)
    li = ts.layer_index["tm"]
    tiles = ts.base.tiles
    return [[tiles[c[x, y]].south[li] for x in fm.free_cols] for y in fm.free_rows]
