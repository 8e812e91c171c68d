"""Classical translation-invariant Hamiltonians built from tile sets.

Pair energies are kept as integer numerator tables over a common denominator,
so every energy is an exact ``Fraction``; no floating point touches an energy.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .dyadic import Dyadic
from .errors import DimensionError, ResourceError
from .wang import Configuration, TileSet

DEFAULT_LAMBDA = Fraction(1606)  # 2 * (k1 + k2) with k1 = 801, k2 = 2
BRUTE_BUDGET = int(os.environ.get("GSEDTILES_BRUTE_BUDGET", 10 ** 8))
TRANSFER_BUDGET = int(os.environ.get("GSEDTILES_TRANSFER_BUDGET", 10 ** 6))
TRANSFER_PAIR_LIMIT = 4 * 10 ** 7


@dataclass(frozen=True, eq=False)
class LocalHamiltonian:
    d: int
    row_num: np.ndarray  # h_row * den, int64, [left, right]
    col_num: np.ndarray  # h_col * den, int64, [below, above]
    den: int
    lam: Fraction
    pi_no_pairs: frozenset
    offset: Fraction = Fraction(0)

    @property
    def h_row(self) -> np.ndarray:
        return np.vectorize(lambda v: Fraction(int(v), self.den), otypes=[object])(self.row_num)

    @property
    def h_col(self) -> np.ndarray:
        return np.vectorize(lambda v: Fraction(int(v), self.den), otypes=[object])(self.col_num)

    @property
    def max_norm(self) -> Fraction:
        return Fraction(int(max(self.row_num.max(), self.col_num.max())), self.den)

    @classmethod
    def from_tables(cls, h_row, h_col, offset=0) -> "LocalHamiltonian":
        """Arbitrary non-negative rational tables (lambda/pi_no left unset)."""
        hr = np.asarray(h_row, dtype=object)
        hc = np.asarray(h_col, dtype=object)
        if hr.shape != hc.shape or hr.ndim != 2 or hr.shape[0] != hr.shape[1]:
            raise DimensionError("h_row and h_col must be square tables of one size")
        fr = [[Fraction(v) for v in row] for row in hr.tolist()]
        fc = [[Fraction(v) for v in row] for row in hc.tolist()]
        if any(v < 0 for row in fr + fc for v in row):
            raise ValueError("pair energies must be non-negative")
        den = 1
        for v in itertools.chain.from_iterable(fr + fc):
            den = den * v.denominator // np.gcd(den, v.denominator)
        rn = np.array([[int(v * den) for v in row] for row in fr], dtype=np.int64)
        cn = np.array([[int(v * den) for v in row] for row in fc], dtype=np.int64)
        return cls(hr.shape[0], rn, cn, den, Fraction(0), frozenset(), Fraction(offset))


def from_tileset(ts: TileSet, lam=DEFAULT_LAMBDA, reject_markers: Callable[[int], bool] | None = None,
                 border_markers: Callable[[int], bool] | None = None, offset=0) -> LocalHamiltonian:
    """Lambda on every forbidden pair; +1 on vertical (reject tile below border tile) pairs."""
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    d = ts.d
    den = lam.denominator
    row = (~ts.horz).astype(np.int64) * lam.numerator
    col = (~ts.vert).astype(np.int64) * lam.numerator
    pairs = frozenset()
    if reject_markers is not None and border_markers is not None:
        rej = np.array([bool(reject_markers(a)) for a in range(d)])
        bor = np.array([bool(border_markers(b)) for b in range(d)])
        pi = rej[:, None] & bor[None, :]
        col = col + pi.astype(np.int64) * den
        pairs = frozenset(map(tuple, np.argwhere(pi).tolist()))
    return LocalHamiltonian(d, row, col, den, lam, pairs, Fraction(offset))


def _masked_sum(h: LocalHamiltonian, g: np.ndarray, hmask=None, vmask=None) -> int:
    hr = h.row_num[g[:, :-1], g[:, 1:]]
    vc = h.col_num[g[:-1, :], g[1:, :]]
    if hmask is not None:
        hr = hr * hmask
    if vmask is not None:
        vc = vc * vmask
    return int(hr.sum()) + int(vc.sum())


def evaluate(h: LocalHamiltonian, c: Configuration) -> Fraction:
    g = c.grid
    if g.min() < 0 or g.max() >= h.d:
        raise DimensionError(f"configuration uses ids outside 0..{h.d - 1}")
    return Fraction(_masked_sum(h, g), h.den) + h.offset * c.width * c.height


@dataclass(frozen=True)
class GroundStateResult:
    energy: Fraction
    argmin: Configuration
    method: str
    exact: bool = True


def ground_state_brute(h: LocalHamiltonian, width: int, height: int,
                       budget: int | None = None) -> GroundStateResult:
    """Exhaustive minimum; the argmin is the lexicographically least minimizer in
    row-major order (bottom row first)."""
    budget = BRUTE_BUDGET if budget is None else budget
    n = width * height
    total = h.d ** n
    if total > budget:
        raise ResourceError(f"{h.d}^{n} = {total} configurations exceed the brute budget {budget}")
    best, best_idx = None, None
    chunk = 1 << 16
    powers = h.d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % h.d
        g = digits.reshape(-1, height, width)
        e = h.row_num[g[:, :, :-1], g[:, :, 1:]].sum(axis=(1, 2)) + \
            h.col_num[g[:, :-1, :], g[:, 1:, :]].sum(axis=(1, 2))
        k = int(np.argmin(e))
        if best is None or e[k] < best:
            best, best_idx = int(e[k]), g[k].copy()
    energy = Fraction(best, h.den) + h.offset * n
    return GroundStateResult(energy, Configuration(best_idx), "brute")


def ground_state_transfer(h: LocalHamiltonian, width: int, height: int, budget: int | None = None,
                          hmask: np.ndarray | None = None, vmask: np.ndarray | None = None) -> GroundStateResult:
    """Column-by-column dynamic programming over full columns.

    ``hmask[y, x]`` / ``vmask[y, x]`` (0/1) switch individual pair terms off.
    Tie-break: at each column the smallest column-state index among minimizers,
    chosen from the last column backwards.
    """
    budget = TRANSFER_BUDGET if budget is None else budget
    S = h.d ** height
    if S > budget:
        raise ResourceError(f"{h.d}^{height} = {S} column states exceed the transfer budget {budget}")
    if S * S > TRANSFER_PAIR_LIMIT:
        raise ResourceError(f"{S}^2 column transitions exceed the pair limit {TRANSFER_PAIR_LIMIT}")
    hmask = np.ones((height, max(width - 1, 0)), dtype=np.int64) if hmask is None else np.asarray(hmask, np.int64)
    vmask = np.ones((max(height - 1, 0), width), dtype=np.int64) if vmask is None else np.asarray(vmask, np.int64)
    powers = h.d ** np.arange(height - 1, -1, -1, dtype=np.int64)
    cols = (np.arange(S, dtype=np.int64)[:, None] // powers[None, :]) % h.d  # cols[s, y]
    inner = h.col_num[cols[:, :-1], cols[:, 1:]]  # (S, height-1)

    def inside(x):
        return (inner * vmask[:, x][None, :]).sum(axis=1)

    def between(x):
        t = np.zeros((S, S), dtype=np.int64)
        for y in range(height):
            if hmask[y, x]:
                t += h.row_num[cols[:, y][:, None], cols[:, y][None, :]]
        return t

    cost = inside(0)
    back = []
    for x in range(1, width):
        tot = cost[:, None] + between(x - 1)
        arg = np.argmin(tot, axis=0)
        back.append(arg)
        cost = tot[arg, np.arange(S)] + inside(x)
    s = int(np.argmin(cost))
    best = int(cost[s])
    states = [s]
    for arg in reversed(back):
        s = int(arg[s])
        states.append(s)
    states.reverse()
    grid = cols[np.array(states)].T
    return GroundStateResult(Fraction(best, h.den) + h.offset * width * height,
                             Configuration(grid), "transfer")


def ground_state(h, width, height) -> GroundStateResult:
    try:
        return ground_state_transfer(h, width, height)
    except ResourceError:
        return ground_state_brute(h, width, height)


# -- grid decomposition ---------------------------------------------------------


@dataclass(frozen=True)
class GridCheck:
    ok: bool
    lam_L: Fraction
    lam_grid: Fraction
    lam_tL: Fraction
    bound: Fraction

    def __bool__(self):
        return self.ok


def grid_decompose_check(h: LocalHamiltonian, L: int, t: int) -> GridCheck:
    """H_grid(L, t) = H(tL) minus the pair terms crossing block boundaries."""
    tl = t * L
    small = ground_state_transfer(h, L, L).energy
    full = ground_state_transfer(h, tl, tl).energy
    hmask = np.ones((tl, tl - 1), dtype=np.int64)
    vmask = np.ones((tl - 1, tl), dtype=np.int64)
    for b in range(1, t):
        hmask[:, b * L - 1] = 0
        vmask[b * L - 1, :] = 0
    grid = ground_state_transfer(h, tl, tl, hmask=hmask, vmask=vmask).energy
    bound = 4 * L * t * t * h.max_norm
    ok = grid == t * t * small and abs(t * t * small - full) <= bound
    return GridCheck(ok, small, grid, full, bound)


# -- energy density -------------------------------------------------------------


@dataclass(frozen=True)
class EnergyDensityEstimate:
    value_lo: Dyadic
    value_hi: Dyadic
    L: int

    @property
    def width(self):
        return self.value_hi - self.value_lo


def density_levels(L: int) -> int:
    """Largest n with 2 * 4^n <= L."""
    n = 0
    while 2 * 4 ** (n + 1) <= L:
        n += 1
    return n


def energy_density_bounds(h: LocalHamiltonian, series, L: int, bits: int = 64) -> EnergyDensityEstimate:
    """Interval from the border census of an L x L window, widened by 4 max|h| / L."""
    top = density_levels(L)
    series = list(series)
    if len(series) < top:
        raise ValueError(f"need i_n for n <= {top}, got {len(series)} values")
    lo = hi = Fraction(0)
    for n in range(1, top + 1):
        q = L // 2 ** (2 * n + 1)
        lo += max(q - 1, 0) ** 2 * series[n - 1]
        hi += (q + 1) ** 2 * series[n - 1]
    slack = 4 * h.max_norm / L
    lo = Fraction(lo, L * L) - slack
    hi = Fraction(hi, L * L) + slack
    return EnergyDensityEstimate(Dyadic.floor(lo, bits), Dyadic.ceil(hi, bits), L)


# -- restricted square energy ------------------------------------------------------


def square_markers(ts):
    """(reject, border) tile predicates for a Robinson tile set with a tm layer."""
    li = ts.layer_index["tm"]
    rej = "@" + ts.machine.spec.reject
    tiles = ts.base.tiles
    return (lambda a: tiles[a].south[li].endswith(rej),
            lambda b: bool(ts.classifiers[b]["red_h"]))


def square_hamiltonian(ts, lam=DEFAULT_LAMBDA, offset=0) -> LocalHamiltonian:
    rej, bor = square_markers(ts)
    return from_tileset(ts.base, lam, rej, bor, offset)


@dataclass(frozen=True)
class SquareEnergy:
    value: int  # lambda_0 restricted to defect-free tilings of the n-square, 0 or 1
    witness: Configuration
    paths: int  # computation paths examined
    raw_energy: Fraction  # evaluate() of the witness, inner squares included


def restricted_square_energy(h: LocalHamiltonian | None, compiled, n: int, ts=None,
                             budget: int = 10 ** 4) -> SquareEnergy:
    """Minimum over TM-layer choices of the Pi_NO energy at the top of one n-square.

    Robinson and obstruction layers stay fixed to the canonical square; the
    nondeterministic choices of the machine are searched depth-first over whole
    computation paths, stopping at the first zero.  Smaller squares inside the
    window keep their canonical histories and their penalties are not counted.
    """
    from . import robinson, tm

    if n < compiled.n0:
        raise ValueError(f"level {n} is below n0={compiled.n0}")
    if ts is None:
        ts = robinson.build_tileset(robinson.LAYERS, compiled)
    if h is None:
        h = square_hamiltonian(ts)
    if h.d != ts.d:
        raise DimensionError(f"Hamiltonian has d={h.d}, tile set has {ts.d} tiles")
    try:
        paths = tm.square_paths(compiled.spec, n, limit=budget)
    except ValueError as e:
        raise ResourceError(str(e)) from None
    side = 4 ** n + 1
    phase = robinson.square_phase(n)
    pi = np.zeros((h.d, h.d), dtype=bool)
    for a, b in h.pi_no_pairs:
        pi[a, b] = True
    best = None
    for k, path in enumerate(paths, 1):
        c = robinson.generate_tiling(ts, side, side, phase, {n: path})
        g = c.grid
        top = int(pi[g[side - 2, 1:side - 1], g[side - 1, 1:side - 1]].sum())
        if best is None or top < best.value:
            best = SquareEnergy(top, c, k, evaluate(h, c))
        if top == 0:
            break
    return SquareEnergy(best.value, best.witness, k, best.raw_energy)
