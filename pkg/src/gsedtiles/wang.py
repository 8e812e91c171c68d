"""Wang tiles with layered edge labels, finite configurations and defects.

Coordinates: a configuration has ``width`` columns and ``height`` rows, cell
``(x, y)`` with ``y = 0`` the bottom row.  Defect points live on the dual
lattice and are stored with doubled integer coordinates, so the point between
``(x, y)`` and ``(x + 1, y)`` is ``(2x + 2, 2y + 1)`` and the point between
``(x, y)`` and ``(x, y + 1)`` is ``(2x + 1, 2y + 2)``.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import IdError

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

EdgeLabel = tuple  # one token (str) per layer

LayerPredicate = Callable[[str, str], bool]


@dataclass(frozen=True)
class Tile:
    id: int
    north: EdgeLabel
    east: EdgeLabel
    south: EdgeLabel
    west: EdgeLabel

    def edges(self):
        return (self.north, self.east, self.south, self.west)


def _codes(labels: Sequence[EdgeLabel]) -> tuple[np.ndarray, dict]:
    index: dict = {}
    out = np.empty(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        out[i] = index.setdefault(lab, len(index))
    return out, index


class TileSet:
    """An immutable tile set with precomputed matching tables.

    ``horz[a, b]`` is true iff tile ``a`` may sit immediately left of ``b``;
    ``vert[a, b]`` iff ``a`` may sit immediately below ``b``.  Matching is the
    conjunction of per-layer predicates (token equality unless a predicate is
    given for the layer).
    """

    def __init__(self, tiles: Sequence[Tile], layers: Sequence[str], name: str = "tiles",
                 predicates: Mapping[str, LayerPredicate] | None = None,
                 meta: Sequence[dict] | None = None):
        self.name = name
        self.layers = tuple(layers)
        self.tiles = tuple(tiles)
        self.predicates = dict(predicates or {})
        k = len(self.layers)
        for pos, t in enumerate(self.tiles):
            if t.id != pos:
                raise IdError(f"tile ids must be dense 0..d-1, got {t.id} at position {pos}")
            for lab in t.edges():
                if len(lab) != k:
                    raise IdError(f"tile {t.id}: label {lab!r} has arity {len(lab)}, expected {k}")
        # per-tile auxiliary data (classifiers etc.), never used for matching
        self.meta = tuple(meta) if meta is not None else tuple({} for _ in self.tiles)
        self.horz = self._table([t.east for t in self.tiles], [t.west for t in self.tiles])
        self.vert = self._table([t.north for t in self.tiles], [t.south for t in self.tiles])
        self.horz.setflags(write=False)
        self.vert.setflags(write=False)
        self._by_edges = {t.edges(): t.id for t in self.tiles}

    def _table(self, left: list, right: list) -> np.ndarray:
        d = len(left)
        if not self.predicates:
            codes_l, index = _codes(left + right)
            return codes_l[:d, None] == codes_l[None, d:]
        table = np.ones((d, d), dtype=bool)
        for li, layer in enumerate(self.layers):
            pred = self.predicates.get(layer)
            lt = [lab[li] for lab in left]
            rt = [lab[li] for lab in right]
            if pred is None:
                codes, _ = _codes([(t,) for t in lt + rt])
                table &= codes[:d, None] == codes[None, d:]
            else:
                ul, ur = sorted(set(lt)), sorted(set(rt))
                ok = {(a, b): bool(pred(a, b)) for a in ul for b in ur}
                table &= np.array([[ok[a, b] for b in rt] for a in lt], dtype=bool).reshape(d, d)
        return table

    @property
    def d(self) -> int:
        return len(self.tiles)

    def __len__(self):
        return len(self.tiles)

    @property
    def r_horz(self) -> frozenset:
        return frozenset(map(tuple, np.argwhere(self.horz).tolist()))

    @property
    def r_vert(self) -> frozenset:
        return frozenset(map(tuple, np.argwhere(self.vert).tolist()))

    def layer_index(self, layer: str) -> int:
        return self.layers.index(layer)

    def find(self, north, east, south, west) -> int | None:
        """Id of the tile with exactly these four labels, if present."""
        return self._by_edges.get((tuple(north), tuple(east), tuple(south), tuple(west)))

    def _check_id(self, a) -> int:
        if not isinstance(a, (int, np.integer)) or not 0 <= a < self.d:
            raise IdError(f"unknown tile id {a!r} (tile set has {self.d} tiles)")
        return int(a)

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"tileset {self.name} layers={len(self.layers)} tiles={self.d}"]
        for t in self.tiles:
            lines.append(f"{t.id} " + " ".join(
                f"{side}:{','.join(lab)}" for side, lab in zip("NESW", t.edges())))
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    @classmethod
    def from_text(cls, text: str, layers: Sequence[str] | None = None) -> "TileSet":
        rows = [ln for ln in text.splitlines() if ln.strip()]
        head = rows[0].split()
        if head[0] != "tileset":
            raise IdError("missing 'tileset' header")
        name = head[1]
        fields = dict(kv.split("=", 1) for kv in head[2:])
        k, d = int(fields["layers"]), int(fields["tiles"])
        tiles = []
        for ln in rows[1:]:
            parts = ln.split()
            edges = {p[0]: tuple(p[2:].split(",")) for p in parts[1:]}
            tiles.append(Tile(int(parts[0]), edges["N"], edges["E"], edges["S"], edges["W"]))
        if len(tiles) != d:
            raise IdError(f"header declares {d} tiles, found {len(tiles)}")
        return cls(tiles, layers or [f"layer{i}" for i in range(k)], name=name)


def check_pair(ts: TileSet, a: int, b: int, orientation: str) -> bool:
    """True iff ``a`` may be placed left of (horizontal) or below (vertical) ``b``."""
    a, b = ts._check_id(a), ts._check_id(b)
    if orientation == HORIZONTAL:
        return bool(ts.horz[a, b])
    if orientation == VERTICAL:
        return bool(ts.vert[a, b])
    raise ValueError(f"orientation must be {HORIZONTAL!r} or {VERTICAL!r}")


@dataclass(frozen=True, eq=False)
class Configuration:
    """A finite grid of tile ids; ``grid[y, x]`` with row 0 at the bottom."""

    grid: np.ndarray
    tileset_digest: str = ""

    def __post_init__(self):
        g = np.array(self.grid, dtype=np.int32, copy=True)
        if g.ndim != 2 or g.size == 0:
            raise IdError("configuration grid must be a non-empty 2-d array")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)

    @classmethod
    def from_rows(cls, ids: Iterable[int], width: int, height: int, tileset_digest=""):
        arr = np.asarray(list(ids), dtype=np.int32)
        if arr.size != width * height:
            raise IdError(f"expected {width * height} ids, got {arr.size}")
        return cls(arr.reshape(height, width), tileset_digest)

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    def __getitem__(self, xy):
        x, y = xy
        return int(self.grid[y, x])

    def __eq__(self, other):
        return isinstance(other, Configuration) and np.array_equal(self.grid, other.grid)

    def __hash__(self):
        return hash(self.grid.tobytes())

    def row_major(self) -> list[int]:
        return self.grid.ravel().tolist()

    def replace(self, changes: Mapping[tuple[int, int], int]) -> "Configuration":
        g = self.grid.copy()
        for (x, y), t in changes.items():
            g[y, x] = t
        return Configuration(g, self.tileset_digest)

    def crop(self, x0: int, y0: int, width: int, height: int) -> "Configuration":
        return Configuration(self.grid[y0:y0 + height, x0:x0 + width], self.tileset_digest)

    def to_text(self) -> str:
        lines = [f"tiling {self.tileset_digest or '-'} {self.width} {self.height}"]
        lines += [" ".join(map(str, row)) for row in self.grid.tolist()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Configuration":
        head, *rest = [ln for ln in text.splitlines() if ln.strip()]
        _, digest, w, h = head.split()
        ids = [int(tok) for ln in rest for tok in ln.split()]
        return cls.from_rows(ids, int(w), int(h), "" if digest == "-" else digest)


def bind(ts: TileSet, c: Configuration) -> None:
    """Raise IdError unless every grid entry is a tile of ``ts``."""
    g = c.grid
    if g.min() < 0 or g.max() >= ts.d:
        bad = np.argwhere((g < 0) | (g >= ts.d))[0]
        raise IdError(f"cell {(int(bad[1]), int(bad[0]))} holds id {int(g[bad[0], bad[1]])}, "
                      f"not in tile set of size {ts.d}")


@dataclass(frozen=True)
class DefectSet:
    points: frozenset = field(default_factory=frozenset)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(sorted(self.points))

    def __contains__(self, p):
        return p in self.points

    def coords(self) -> np.ndarray:
        """Real-plane coordinates, shape (|D|, 2), sorted."""
        return np.array(sorted(self.points), dtype=float).reshape(-1, 2) / 2.0

    @staticmethod
    def cells_of(point) -> tuple[tuple[int, int], tuple[int, int]]:
        """The two lattice cells separated by a dual point."""
        px, py = point
        if px % 2 == 0:  # horizontal neighbours
            x, y = px // 2 - 1, (py - 1) // 2
            return (x, y), (x + 1, y)
        x, y = (px - 1) // 2, py // 2 - 1
        return (x, y), (x, y + 1)


def violation_masks(ts: TileSet, c: Configuration) -> tuple[np.ndarray, np.ndarray]:
    """Boolean arrays: ``h[y, x]`` for pair (x,y)-(x+1,y), ``v[y, x]`` for (x,y)-(x,y+1)."""
    bind(ts, c)
    g = c.grid
    h = ~ts.horz[g[:, :-1], g[:, 1:]]
    v = ~ts.vert[g[:-1, :], g[1:, :]]
    return h, v


def defects(ts: TileSet, c: Configuration) -> DefectSet:
    h, v = violation_masks(ts, c)
    pts = [(2 * int(x) + 2, 2 * int(y) + 1) for y, x in np.argwhere(h)]
    pts += [(2 * int(x) + 1, 2 * int(y) + 2) for y, x in np.argwhere(v)]
    return DefectSet(frozenset(pts))


def energy_raw(ts: TileSet, c: Configuration) -> int:
    h, v = violation_masks(ts, c)
    return int(h.sum() + v.sum())
