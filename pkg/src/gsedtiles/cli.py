"""Command-line front end: ``gsedtiles <robinson|tm|ham|deficit|gsed|render|experiment> ...``.

Exit codes: 0 success, 1 a checked bound or assertion failed, 2 bad input or
configuration, 3 a resource budget was exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import deficit, gsed, hamiltonian, robinson, tm
from .dyadic import Dyadic
from .errors import ConfigError, GsedError, ResourceError
from .wang import Configuration, TileSet, defects, energy_raw

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


class CheckFailed(Exception):
    """A bound or assertion checked by a command did not hold."""


# -- run configuration ------------------------------------------------------------


def _ints(text):
    return [int(v) for v in str(text).replace(" ", "").split(",") if v]


def _range(text):
    lo, sep, hi = str(text).partition("..")
    lo = int(lo)
    return (lo, int(hi) if sep else lo)


@dataclass
class RunConfig:
    """Settings shared by experiments; text form is one ``key = value`` per line."""

    lam: Fraction = Fraction(hamiltonian.DEFAULT_LAMBDA)
    brute_budget: int = hamiltonian.BRUTE_BUDGET
    transfer_budget: int = hamiltonian.TRANSFER_BUDGET
    branch_limit: int = 10 ** 4
    seed: int = 42
    n_max: int = 3
    L: list = field(default_factory=lambda: [256])
    trials: int = 1000
    defects: tuple = (1, 20)
    k: int = 6
    machines: list = field(default_factory=lambda: ["parity", "accept", "reject", "branch"])
    layers: list = field(default_factory=lambda: list(robinson.LAYERS))
    out: str = "."

    _parse = {"lam": Fraction, "brute_budget": int, "transfer_budget": int, "branch_limit": int,
              "seed": int, "n_max": int, "L": _ints, "trials": int, "defects": _range, "k": int,
              "machines": lambda s: [v for v in s.replace(" ", "").split(",") if v],
              "layers": lambda s: [v for v in s.replace(" ", "").split(",") if v], "out": str}

    def __post_init__(self):
        for name in ("brute_budget", "transfer_budget", "branch_limit", "trials", "k", "n_max"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.lam <= 0:
            raise ConfigError("lambda must be positive")
        if not self.L or min(self.L) <= 0:
            raise ConfigError("L needs at least one positive size")
        if not 1 <= self.defects[0] <= self.defects[1]:
            raise ConfigError("defects must be a range lo..hi with 1 <= lo <= hi")

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "defects":
                v = f"{v[0]}..{v[1]}"
            elif isinstance(v, list):
                v = ",".join(map(str, v))
            key = "lambda" if f.name == "lam" else f.name
            out.append(f"{key} = {v}")
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        kw = {}
        for no, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key = key.strip()
            key = "lam" if key == "lambda" else key
            if not sep or key not in cls._parse:
                raise ConfigError(f"config line {no}: unknown or malformed entry {line!r}")
            try:
                kw[key] = cls._parse[key](val.strip())
            except (ValueError, ZeroDivisionError) as e:
                raise ConfigError(f"config line {no}: {e}") from None
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            return cls.from_text(Path(path).read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None

    def rng(self, *key) -> np.random.Generator:
        """Independent generator for a named stream, derived from the one seed."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=tuple(key)))


# -- rendering ----------------------------------------------------------------------


FORMATS = ("ascii", "svg", "ppm")
HIGHLIGHTS = ("borders", "free-cells", "defects")


@dataclass(frozen=True)
class RenderSpec:
    layers: tuple = ("robinson",)
    highlight: str = "borders"
    format: str = "ascii"
    scale: int = 4

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("enable at least one layer")
        if self.format not in FORMATS:
            raise ConfigError(f"unsupported format {self.format!r}; use one of {FORMATS}")
        if self.highlight not in HIGHLIGHTS:
            raise ConfigError(f"unknown highlight {self.highlight!r}")


def _cell_classes(ts, c: Configuration, spec: RenderSpec):
    """Per-cell glyph keys: 'n' digit for border rings, else tile class."""
    g = c.grid
    cross = ts.class_array("is_cross")[g]
    arm_h = ts.class_array("red_h")[g]
    arm_v = ts.class_array("red_v")[g]
    ring = np.zeros(g.shape, dtype=np.int64)
    borders = robinson.find_borders(ts, c)
    for b in borders:
        for x, y in b.ring_cells():
            ring[y, x] = b.n
    free = np.zeros(g.shape, dtype=bool)
    if spec.highlight == "free-cells":
        for b in borders:
            try:
                fm = robinson.free_cells(ts, c, b, borders)
            except GsedError:
                continue
            for row in fm.free_cells:
                for x, y in row:
                    free[y, x] = True
    return cross, arm_h, arm_v, ring, free


def render(ts, c: Configuration, spec: RenderSpec) -> bytes:
    """Deterministic picture of a tiling: ascii text, an SVG document or a binary PPM."""
    missing = set(spec.layers) - set(ts.layers)
    if missing:
        raise ConfigError(f"tile set has no layer(s) {sorted(missing)}")
    dset = defects(ts.base, c)
    cross, arm_h, arm_v, ring, free = _cell_classes(ts, c, spec)
    bad = np.zeros(c.grid.shape, dtype=bool)
    for p in dset:
        for x, y in dset.cells_of(p):
            bad[y, x] = True
    if spec.format == "ascii":
        return _ascii(c, dset, cross, arm_h, arm_v, ring, free, bad, spec)
    if spec.format == "svg":
        return _svg(ts, c, dset, cross, arm_h, arm_v, ring, free, spec)
    return _ppm(c, dset, cross, arm_h, arm_v, ring, free, spec)


def _ascii(c, dset, cross, arm_h, arm_v, ring, free, bad, spec) -> bytes:
    H, W = c.grid.shape
    hdef = {(p[0] // 2 - 1, p[1] // 2) for p in dset if p[0] % 2 == 0}  # between x and x+1
    rows = []
    for y in range(H - 1, -1, -1):
        out = []
        for x in range(W):
            if spec.highlight == "defects" and bad[y, x]:
                ch = "#"
            elif spec.highlight == "free-cells" and free[y, x]:
                ch = "o"
            elif ring[y, x]:
                ch = str(ring[y, x] % 10)
            elif cross[y, x]:
                ch = "+"
            elif arm_h[y, x] and arm_v[y, x]:
                ch = "*"
            elif arm_h[y, x]:
                ch = "-"
            elif arm_v[y, x]:
                ch = "|"
            else:
                ch = "."
            out.append(ch)
            if x < W - 1:
                out.append("!" if (x, y) in hdef else " ")
        rows.append("".join(out))
    pts = sorted(dset.points)
    rows.append((f"# defects {len(pts)}: " + " ".join(f"({p[0] / 2:g},{p[1] / 2:g})" for p in pts)).rstrip())
    return ("\n".join(rows) + "\n").encode()


_COLOURS = {"bg": (250, 250, 245), "arm": (200, 40, 40), "cross": (40, 40, 160),
            "free": (60, 170, 60), "defect": (255, 0, 200)}
_LEVEL = [(120, 120, 120), (220, 120, 0), (0, 140, 200), (140, 0, 160), (0, 0, 0)]


def _svg(ts, c, dset, cross, arm_h, arm_v, ring, free, spec) -> bytes:
    H, W = c.grid.shape
    s = 10

    def rgb(t):
        return "#%02x%02x%02x" % t

    def Y(y):  # row 0 at the bottom
        return (H - 1 - y) * s

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W * s}" height="{H * s}" '
           f'viewBox="0 0 {W * s} {H * s}">',
           f'<rect width="{W * s}" height="{H * s}" fill="{rgb(_COLOURS["bg"])}"/>']
    if "robinson" in spec.layers:
        for y, x in zip(*np.nonzero(arm_h)):
            out.append(f'<line x1="{x * s}" y1="{Y(y) + s // 2}" x2="{x * s + s}" y2="{Y(y) + s // 2}" '
                       f'stroke="{rgb(_COLOURS["arm"])}"/>')
        for y, x in zip(*np.nonzero(arm_v)):
            out.append(f'<line x1="{x * s + s // 2}" y1="{Y(y)}" x2="{x * s + s // 2}" y2="{Y(y) + s}" '
                       f'stroke="{rgb(_COLOURS["arm"])}"/>')
        for y, x in zip(*np.nonzero(cross)):
            out.append(f'<circle cx="{x * s + s // 2}" cy="{Y(y) + s // 2}" r="2" '
                       f'fill="{rgb(_COLOURS["cross"])}"/>')
    if "dash" in spec.layers:
        li = ts.layer_index["dash"]
        for y in range(H):
            for x in range(W):
                if ts.base.tiles[c[x, y]].east[li].endswith("1"):
                    out.append(f'<line x1="{x * s + s - 2}" y1="{Y(y) + 1}" x2="{x * s + s - 2}" '
                               f'y2="{Y(y) + 3}" stroke="#555"/>')
    if "obstruction" in spec.layers:
        li = ts.layer_index["obstruction"]
        for y in range(H):
            for x in range(W):
                t = ts.base.tiles[c[x, y]]
                if t.east[li] == "o>":
                    out.append(f'<line x1="{x * s}" y1="{Y(y) + 3}" x2="{x * s + s}" y2="{Y(y) + 3}" '
                               f'stroke="#999" stroke-dasharray="2,2"/>')
                if t.north[li] == "ov":
                    out.append(f'<line x1="{x * s + 3}" y1="{Y(y)}" x2="{x * s + 3}" y2="{Y(y) + s}" '
                               f'stroke="#999" stroke-dasharray="2,2"/>')
    if "tm" in spec.layers:
        li = ts.layer_index["tm"]
        for y in range(H):
            for x in range(W):
                tok = ts.base.tiles[c[x, y]].south[li]
                if tok not in ("-", "|", "x"):
                    out.append(f'<text x="{x * s + 1}" y="{Y(y) + s - 1}" font-size="4">{tok}</text>')
    if spec.highlight == "free-cells":
        for y, x in zip(*np.nonzero(free)):
            out.append(f'<rect x="{x * s + 2}" y="{Y(y) + 2}" width="{s - 4}" height="{s - 4}" '
                       f'fill="none" stroke="{rgb(_COLOURS["free"])}"/>')
    for b in robinson.find_borders(ts, c):
        x0, y0, x1, y1 = b.bbox()
        col = _LEVEL[min(b.n, len(_LEVEL)) - 1]
        out.append(f'<rect x="{x0 * s}" y="{Y(y1)}" width="{(x1 - x0 + 1) * s}" '
                   f'height="{(y1 - y0 + 1) * s}" fill="none" stroke="{rgb(col)}" stroke-width="2"/>')
    for p in sorted(dset.points):
        cx, cy = p[0] * s / 2, (H - p[1] / 2) * s
        out.append(f'<circle cx="{cx:g}" cy="{cy:g}" r="3" fill="{rgb(_COLOURS["defect"])}"/>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode()


def _ppm(c, dset, cross, arm_h, arm_v, ring, free, spec) -> bytes:
    H, W = c.grid.shape
    k = max(spec.scale, 2)
    img = np.empty((H * k, W * k, 3), dtype=np.uint8)
    img[:] = _COLOURS["bg"]
    for y in range(H):
        for x in range(W):
            col = None
            if ring[y, x]:
                col = _LEVEL[min(ring[y, x], len(_LEVEL)) - 1]
            elif spec.highlight == "free-cells" and free[y, x]:
                col = _COLOURS["free"]
            elif cross[y, x]:
                col = _COLOURS["cross"]
            elif arm_h[y, x] or arm_v[y, x]:
                col = _COLOURS["arm"]
            if col is not None:
                r = (H - 1 - y) * k
                img[r:r + k, x * k:x * k + k] = col
    for p in dset.points:  # defect point: a k x k block centred on the shared edge
        cx, cy = p[0] * k // 2, (2 * H - p[1]) * k // 2
        img[max(cy - k // 2, 0): cy + k // 2 + 1, max(cx - k // 2, 0): cx + k // 2 + 1] = _COLOURS["defect"]
    return f"P6\n{W * k} {H * k}\n255\n".encode() + img.tobytes()


# -- helpers --------------------------------------------------------------------


def load_machine(ref: str) -> tm.TMSpec:
    """A machine file path, or ``builtin:<name>`` for the shipped toy machines."""
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in tm.TOY_MACHINES:
            raise ConfigError(f"unknown builtin machine {name!r}; have {sorted(tm.TOY_MACHINES)}")
        return tm.TOY_MACHINES[name]()
    if ref in tm.TOY_MACHINES and not os.path.exists(ref):
        return tm.TOY_MACHINES[ref]()
    try:
        return tm.TMSpec.from_text(Path(ref).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read machine: {e}") from None


def _size(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ConfigError(f"size must look like WxH, got {text!r}") from None
    return w, h


def _layers(text):
    return tuple(v for v in text.replace(" ", "").split(",") if v)


def _tileset(layers, machine_ref=None, n0=None):
    cm = tm.compile(load_machine(machine_ref), n0) if machine_ref else None
    return robinson.build_tileset(layers, cm)


def _tileset_for(c: Configuration, layers=None, machine_ref=None):
    """Rebuild the Robinson tile set a tiling was written with (matched by digest)."""
    options = [layers] if layers else [("robinson", "dash"), ("robinson", "dash", "obstruction")]
    for ls in options:
        if "tm" in ls and not machine_ref:
            raise ConfigError("the tm layer needs --machine")
        ts = _tileset(ls, machine_ref if "tm" in ls else None)
        if not c.tileset_digest or ts.base.digest() == c.tileset_digest:
            return ts
    raise ConfigError("tiling digest matches no standard tile set; pass --layers (and --machine)")


def _read_tiling(path) -> Configuration:
    try:
        return Configuration.from_text(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read tiling: {e}") from None


def _emit(text: str, out=None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(q) -> str:
    q = Fraction(q)
    s = f"{q.numerator}/{q.denominator}"
    den = q.denominator
    if den & (den - 1) == 0:
        s += " " + Dyadic.from_fraction(q).binary()
    return s


# -- subcommands --------------------------------------------------------------------


def cmd_robinson(a):
    if a.action == "gen":
        w, h = _size(a.size)
        phase = tuple(_ints(a.phase))
        ts = _tileset(_layers(a.layers), a.machine)
        c = robinson.generate_tiling(ts, w, h, phase)
        _emit(c.to_text(), a.out)
    elif a.action == "tileset":
        ts = _tileset(_layers(a.layers), a.machine)
        _emit(ts.base.to_text(), a.out)
    else:
        c = _read_tiling(a.path)
        ts = _tileset_for(c, _layers(a.layers) if a.layers else None, a.machine)
        lines = ["n corner_x corner_y complete"]
        lines += [f"{b.n} {b.corner[0]} {b.corner[1]} {int(b.complete)}"
                  for b in robinson.find_borders(ts, c)]
        _emit("\n".join(lines) + "\n", a.out)


def cmd_tm(a):
    m = load_machine(a.path)
    if a.action == "compile":
        cm = tm.compile(m, a.n0)
        frags = cm.tile_fragments
        lines = [f"machine {m.name}", f"n0 {cm.n0}", f"deterministic {int(m.deterministic)}",
                 f"tm_layer_tokens {len(cm.tm_layer_alphabet)}"]
        lines += [f"fragments {role} {len(v)}" for role, v in sorted(frags.items())]
        _emit("\n".join(lines) + "\n")
    else:
        r = tm.run_reference(m, a.input, a.max_steps, a.tape_width)
        lines = [f"status {r.status}", f"steps {r.steps}"]
        if a.trace:
            lines += [f"{c.state} {c.head} {c.symbols(m.blank)}" for c in r.trace]
        _emit("\n".join(lines) + "\n")
        return EXIT_OK


def cmd_ham(a):
    lam = Fraction(a.lam)
    if a.action == "eval":
        c = _read_tiling(a.path)
        if a.tileset:
            ts = TileSet.from_text(Path(a.tileset).read_text())
        else:
            ts = _tileset_for(c, _layers(a.layers) if a.layers else None, a.machine).base
        h = hamiltonian.from_tileset(ts, lam)
        _emit(f"energy {_fmt(hamiltonian.evaluate(h, c))}\nviolations {energy_raw(ts, c)}\n")
    elif a.action == "solve":
        if not a.tileset:
            raise ConfigError("ham solve needs --tileset")
        ts = TileSet.from_text(Path(a.tileset).read_text())
        h = hamiltonian.from_tileset(ts, lam)
        w, hh = _size(a.size)
        solver = {"brute": hamiltonian.ground_state_brute,
                  "transfer": hamiltonian.ground_state_transfer}.get(a.method)
        if solver is None:
            raise ConfigError("method must be brute or transfer")
        r = solver(h, w, hh)
        _emit(f"lambda0 {_fmt(r.energy)}\nmethod {r.method}\n" + r.argmin.to_text())
    else:
        if not a.machine:
            raise ConfigError("ham square-energy needs --machine")
        cm = tm.compile(load_machine(a.machine), a.n0)
        ts = robinson.build_tileset(robinson.LAYERS, cm)
        h = hamiltonian.square_hamiltonian(ts, lam)
        r = hamiltonian.restricted_square_energy(h, cm, a.n, ts, a.branch_limit)
        _emit(f"lambda0 {r.value}\npaths {r.paths}\nraw_energy {_fmt(r.raw_energy)}\n")


DEFICIT_FIELDS = ["seed", "L", "D", "deficit", "sdeficit", "odeficit", "tdeficit",
                  "bound_deficit", "bound_sdeficit", "bound_odeficit", "bound_tdeficit", "slack"]


def deficit_sweep(size: int, drange, trials: int, seed: int, layers, machine="parity"):
    """Seeded injection trials; yields one CSV row dict per trial, in seed order."""
    cm = tm.compile(load_machine(machine)) if "tm" in layers else None
    ts = robinson.build_tileset(layers, cm)
    c = robinson.generate_tiling(ts, size, size)
    base = deficit.base_state(ts, c)
    lo, hi = drange
    kmin, kmax = max(1, -(-lo // 4)), max(1, hi // 4)
    for t in range(trials):
        s = seed + t
        k = kmin + t % (kmax - kmin + 1)
        r = deficit.measure_deficits(ts, deficit.inject_defects(c, k, s, ts), base=base)
        b = r.bounds
        yield {"seed": s, "L": r.L, "D": r.D, "deficit": r.deficit, "sdeficit": r.sdeficit,
               "odeficit": r.odeficit, "tdeficit": r.tdeficit, "bound_deficit": b["deficit"],
               "bound_sdeficit": b["sdeficit"], "bound_odeficit": b["odeficit"],
               "bound_tdeficit": b["tdeficit"], "slack": min(r.slack().values())}


def _csv(rows, fieldnames) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_deficit(a):
    rows = list(deficit_sweep(a.size, _range(a.defects), a.trials, a.seed, _layers(a.layers), a.machine))
    _emit(_csv(rows, DEFICIT_FIELDS), a.report)
    worst = min(r["slack"] for r in rows)
    sys.stderr.write(f"{len(rows)} trials, minimum slack {worst}\n")
    if worst < 0:
        raise CheckFailed("a deficit bound was violated")


def _series(m, mode, n0, steps):
    idx = tm.InstanceIndexer(n0)
    if mode == "direct":
        return gsed.OutcomeSeries.from_machine(m, idx, steps)
    cm = tm.compile(m, n0)
    ts = robinson.build_tileset(robinson.LAYERS, cm)
    return gsed.OutcomeSeries.from_squares(cm, ts, hamiltonian.square_hamiltonian(ts))


def cmd_gsed(a):
    m = load_machine(a.machine)
    s = _series(m, a.mode, a.n0, a.max_steps)
    if a.action == "decide":
        if a.alpha is None or a.beta is None:
            raise ConfigError("decide needs --alpha and --beta")
        t = gsed.ThresholdPair(Dyadic.parse(a.alpha), Dyadic.parse(a.beta))
        _emit(gsed.decide(s, t) + "\n")
    elif a.action == "extract":
        tr = gsed.extract(a.k, lambda t: gsed.decide(s, t))
        lines = [f"{i} {t.alpha.binary()} {t.beta.binary()} {ans}" for i, (t, ans) in enumerate(tr.queries, 1)]
        lines.append("bits " + "".join(map(str, tr.recovered)))
        _emit("\n".join(lines) + "\n")
    else:
        if a.eps is None:
            raise ConfigError("fgsed needs --eps")
        _emit(gsed.fgsed(s, Dyadic.parse(a.eps)).binary() + "\n")


def cmd_render(a):
    c = _read_tiling(a.path)
    ts = _tileset_for(c, _layers(a.tileset_layers) if a.tileset_layers else None, a.machine)
    spec = RenderSpec(_layers(a.layers), a.highlight, a.format, a.scale)
    data = render(ts, c, spec)
    if a.out:
        Path(a.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)


# -- experiments ----------------------------------------------------------------------


def _random_tileset(rng, d):
    """Random toy Wang tile set with d tiles over two colours per side."""
    from .wang import Tile
    cols = rng.integers(0, 2, size=(d, 4))
    tiles = [Tile(i, (str(n),), (str(e),), (str(s),), (str(w),)) for i, (n, e, s, w) in enumerate(cols.tolist())]
    return TileSet(tiles, ("c",), name="toy")


def exp_deficit_sweep(cfg: RunConfig):
    rows, ok = [], True
    for L in cfg.L:
        rows += list(deficit_sweep(L, cfg.defects, cfg.trials, cfg.seed, cfg.layers))
    ok = all(r["slack"] >= 0 for r in rows)
    summary = f"trials {len(rows)}\nmin_slack {min(r['slack'] for r in rows)}\nok {int(ok)}\n"
    return _csv(rows, DEFICIT_FIELDS), summary, ok


def exp_extraction_roundtrip(cfg: RunConfig):
    rows, ok = [], True
    for name in cfg.machines:
        m = load_machine(name)
        idx = tm.InstanceIndexer(2)
        s = gsed.OutcomeSeries.from_machine(m, idx)
        tr = gsed.extract(cfg.k, lambda t: gsed.decide(s, t))
        direct = [0 if n < idx.n0 else int(not tm.run_reference(m, idx.string(n), 4096).accepted)
                  for n in range(1, cfg.k + 1)]
        good = tr.recovered == direct
        ok &= good
        rows.append({"machine": name, "k": cfg.k, "recovered": "".join(map(str, tr.recovered)),
                     "direct": "".join(map(str, direct)), "queries": len(tr.queries),
                     "max_bits": tr.max_bits(), "match": int(good)})
    return _csv(rows, list(rows[0])), f"machines {len(rows)}\nok {int(ok)}\n", ok


def exp_solver_crosscheck(cfg: RunConfig):
    rng = cfg.rng(1)
    rows, ok = [], True
    for t in range(min(cfg.trials, 50)):
        d = int(rng.integers(2, 7))
        w, h = [(2, 2), (2, 3), (3, 3), (3, 4)][t % 4]
        if d ** (w * h) > cfg.brute_budget:
            w, h = 2, 3
        ts = _random_tileset(rng, d)
        H = hamiltonian.from_tileset(ts, cfg.lam)
        eb = hamiltonian.ground_state_brute(H, w, h, cfg.brute_budget).energy
        et = hamiltonian.ground_state_transfer(H, w, h, cfg.transfer_budget).energy
        ok &= eb == et
        rows.append({"trial": t, "d": d, "size": f"{w}x{h}", "brute": str(eb), "transfer": str(et),
                     "match": int(eb == et)})
    return _csv(rows, list(rows[0])), f"trials {len(rows)}\nok {int(ok)}\n", ok


def exp_convergence(cfg: RunConfig):
    m = load_machine(cfg.machines[0])
    cm = tm.compile(m)
    ts = robinson.build_tileset(robinson.LAYERS, cm)
    h = hamiltonian.square_hamiltonian(ts, cfg.lam)
    s = gsed.OutcomeSeries.from_machine(m, tm.InstanceIndexer(cm.n0))
    rows, ok = [], True
    for L in cfg.L:
        lvl = hamiltonian.density_levels(2 * L)
        series = [s[n] for n in range(1, lvl + 1)]
        w1 = hamiltonian.energy_density_bounds(h, series, L).width
        w2 = hamiltonian.energy_density_bounds(h, series, 2 * L).width
        ratio = w2.to_fraction() / w1.to_fraction()
        ok &= ratio <= Fraction(3, 5)
        rows.append({"L": L, "width_L": w1.binary(), "width_2L": w2.binary(), "ratio": f"{float(ratio):.6f}"})
    return _csv(rows, list(rows[0])), f"sizes {len(rows)}\nok {int(ok)}\n", ok


EXPERIMENTS = {"deficit-sweep": exp_deficit_sweep, "extraction-roundtrip": exp_extraction_roundtrip,
               "solver-crosscheck": exp_solver_crosscheck, "convergence": exp_convergence}


def experiment(name: str, cfg: RunConfig, out_dir=None) -> bool:
    """Run a named experiment, write ``<name>.csv`` and ``<name>.txt``; True iff it passed."""
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; have {sorted(EXPERIMENTS)}")
    table, summary, ok = EXPERIMENTS[name](cfg)
    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.csv").write_text(table)
    (out / f"{name}.txt").write_text(summary)
    return ok


def cmd_experiment(a):
    cfg = RunConfig.load(a.config) if a.config else RunConfig()
    for kv in a.set or []:
        cfg = RunConfig.from_text(cfg.to_text() + kv + "\n")
    ok = experiment(a.name, cfg, a.out)
    sys.stdout.write(Path(a.out or cfg.out, f"{a.name}.txt").read_text())
    if not ok:
        raise CheckFailed(f"experiment {a.name} failed")


# -- argument parsing ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsedtiles", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("robinson", help="generate tilings, list borders, dump tile sets")
    r.add_argument("action", choices=["gen", "borders", "tileset"])
    r.add_argument("path", nargs="?")
    r.add_argument("--size", default="64x64")
    r.add_argument("--phase", default="0,0")
    r.add_argument("--layers", default=None)
    r.add_argument("--machine")
    r.add_argument("--out")
    r.set_defaults(func=cmd_robinson)

    t = sub.add_parser("tm", help="compile or run a Turing machine")
    t.add_argument("action", choices=["compile", "run"])
    t.add_argument("path", help="machine file or builtin:<name>")
    t.add_argument("--input", default="")
    t.add_argument("--max-steps", type=int, default=64)
    t.add_argument("--tape-width", type=int)
    t.add_argument("--n0", type=int)
    t.add_argument("--trace", action="store_true")
    t.set_defaults(func=cmd_tm)

    h = sub.add_parser("ham", help="evaluate and minimize the tiling Hamiltonian")
    h.add_argument("action", choices=["eval", "solve", "square-energy"])
    h.add_argument("path", nargs="?")
    h.add_argument("--lambda", dest="lam", default=str(hamiltonian.DEFAULT_LAMBDA))
    h.add_argument("--tileset")
    h.add_argument("--layers")
    h.add_argument("--machine")
    h.add_argument("--size", default="2x2")
    h.add_argument("--method", default="transfer")
    h.add_argument("--n", type=int, default=2)
    h.add_argument("--n0", type=int)
    h.add_argument("--branch-limit", type=int, default=10 ** 4)
    h.set_defaults(func=cmd_ham)

    d = sub.add_parser("deficit", help="seeded defect-injection trials")
    d.add_argument("action", choices=["run"])
    d.add_argument("--size", type=int, default=256)
    d.add_argument("--defects", default="1..20")
    d.add_argument("--trials", type=int, default=1000)
    d.add_argument("--seed", type=int, default=42)
    d.add_argument("--layers", default=",".join(robinson.LAYERS))
    d.add_argument("--machine", default="builtin:parity")
    d.add_argument("--report")
    d.set_defaults(func=cmd_deficit)

    g = sub.add_parser("gsed", help="threshold decisions, bit extraction, energy approximation")
    g.add_argument("action", choices=["decide", "extract", "fgsed"])
    g.add_argument("--machine", required=True)
    g.add_argument("--alpha")
    g.add_argument("--beta")
    g.add_argument("-k", type=int, default=6)
    g.add_argument("--eps")
    g.add_argument("--mode", choices=["direct", "squares"], default="direct")
    g.add_argument("--n0", type=int, default=2)
    g.add_argument("--max-steps", type=int, default=4096)
    g.set_defaults(func=cmd_gsed)

    v = sub.add_parser("render", help="draw a tiling as ascii, svg or ppm")
    v.add_argument("path")
    v.add_argument("--format", default="ascii")
    v.add_argument("--highlight", default="borders")
    v.add_argument("--layers", default="robinson", help="layers to draw")
    v.add_argument("--tileset-layers", help="layers of the tile set the tiling uses")
    v.add_argument("--machine")
    v.add_argument("--scale", type=int, default=4)
    v.add_argument("--out")
    v.set_defaults(func=cmd_render)

    e = sub.add_parser("experiment", help="run an acceptance experiment")
    e.add_argument("name")
    e.add_argument("--config")
    e.add_argument("--set", action="append", help="override one config entry, key=value")
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    if getattr(a, "layers", None) is None and a.command == "robinson":
        a.layers = "robinson,dash" if a.action != "borders" else None
    try:
        rc = a.func(a)
        return rc or EXIT_OK
    except BrokenPipeError:  # reader went away (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except CheckFailed as e:
        sys.stderr.write(f"check failed: {e}\n")
        return EXIT_FAIL
    except ResourceError as e:
        sys.stderr.write(f"resource budget exceeded: {e}\n")
        return EXIT_RESOURCE
    except (GsedError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
