from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsedtiles import hamiltonian as H, robinson, tm
from gsedtiles.dyadic import Dyadic
from gsedtiles.errors import DimensionError, ResourceError
from gsedtiles.wang import Configuration, Tile, TileSet, energy_raw

from conftest import compiled, tileset


def checkerboard():
    tiles = [Tile(2 * py + px, (str(1 - py),), (str(1 - px),), (str(py),), (str(px),))
             for py in (0, 1) for px in (0, 1)]
    return TileSet(tiles, ("c",))


def incompatible_pair():
    return TileSet([Tile(0, ("a",), ("b",), ("c",), ("d",)), Tile(1, ("e",), ("f",), ("g",), ("h",))], ("c",))


def test_fully_incompatible_square():
    h = H.from_tileset(incompatible_pair(), lam=1)
    assert H.ground_state_brute(h, 2, 2).energy == 4
    assert H.ground_state_transfer(h, 2, 2).energy == 4


def test_checkerboard_ground_state():
    ts = checkerboard()
    h = H.from_tileset(ts, lam=1)
    r = H.ground_state_brute(h, 3, 3)
    assert r.energy == 0
    g = r.argmin.grid
    assert energy_raw(ts, r.argmin) == 0
    # neighbours alternate in both coordinates
    px, py = g % 2, g // 2
    assert (px[:, 1:] != px[:, :-1]).all() and (py[1:, :] != py[:-1, :]).all()
    assert H.ground_state_transfer(h, 3, 3).energy == 0


def test_evaluate_counts_lambda_per_defect():
    ts = checkerboard()
    h = H.from_tileset(ts, lam=7)
    good = H.ground_state_brute(h, 3, 3).argmin.grid.copy()
    bad = good.copy()
    bad[1, 1] ^= 3  # flip both parities of the centre tile: four clashes
    assert H.evaluate(h, Configuration(good)) == 0
    assert H.evaluate(h, Configuration(bad)) == 4 * 7


def test_offset_and_id_range():
    h = H.from_tileset(checkerboard(), lam=1, offset=Fraction(1, 2))
    assert H.evaluate(h, Configuration(np.zeros((2, 3), dtype=np.int64))) == 7 + 3
    with pytest.raises(DimensionError):
        H.evaluate(h, Configuration(np.full((2, 2), 4)))
    with pytest.raises(ValueError):
        H.from_tileset(checkerboard(), lam=0)


def random_tables(draw_seed, d):
    rng = np.random.default_rng(draw_seed)
    hr = rng.integers(0, 4, (d, d))
    hc = rng.integers(0, 4, (d, d))
    return H.LocalHamiltonian.from_tables(hr, hc)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 3), st.integers(1, 3), st.integers(1, 3))
def test_brute_equals_transfer(seed, d, w, hgt):
    h = random_tables(seed, d)
    a = H.ground_state_brute(h, w, hgt)
    b = H.ground_state_transfer(h, w, hgt)
    assert a.energy == b.energy
    assert H.evaluate(h, a.argmin) == a.energy == H.evaluate(h, b.argmin)


def test_brute_against_itertools():
    h = random_tables(3, 2)
    best = min(H.evaluate(h, Configuration(np.array(g).reshape(2, 3)))
               for g in itertools.product(range(2), repeat=6))
    assert H.ground_state_brute(h, 3, 2).energy == best


def test_rational_tables():
    h = H.LocalHamiltonian.from_tables([[Fraction(1, 3), 1], [1, 0]], [[Fraction(1, 2), 1], [1, 1]])
    assert h.den == 6 and h.max_norm == 1
    assert H.ground_state_brute(h, 2, 2).energy == H.ground_state_transfer(h, 2, 2).energy
    with pytest.raises(ValueError):
        H.LocalHamiltonian.from_tables([[-1]], [[0]])
    with pytest.raises(DimensionError):
        H.LocalHamiltonian.from_tables([[0, 0]], [[0, 0]])


def test_budgets():
    h = H.from_tileset(checkerboard(), lam=1)
    with pytest.raises(ResourceError):
        H.ground_state_brute(h, 5, 5, budget=1000)
    with pytest.raises(ResourceError):
        H.ground_state_transfer(h, 5, 12, budget=1000)


@pytest.mark.parametrize("seed", range(4))
def test_grid_decomposition(seed):
    h = random_tables(seed, 2)
    chk = H.grid_decompose_check(h, 2, 2)
    assert chk.ok
    assert chk.lam_grid == 4 * chk.lam_L
    assert abs(chk.lam_tL - chk.lam_grid) <= chk.bound


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_monotone_in_size(seed):
    h = random_tables(seed, 2)
    e = [H.ground_state_transfer(h, L, L).energy for L in (1, 2, 3)]
    assert e == sorted(e)


def test_density_levels():
    assert [H.density_levels(L) for L in (1, 7, 8, 31, 32, 128, 512)] == [0, 0, 1, 1, 2, 3, 4]


def test_density_bounds_bracket_series():
    h = H.from_tileset(checkerboard(), lam=1)
    for bits in ([1, 0, 0], [0, 1, 0], [1, 1, 1]):
        E = sum(Fraction(b, 4 * 16 ** n) for n, b in enumerate(bits, 1))
        est = H.energy_density_bounds(h, bits, 128)
        assert est.value_lo.to_fraction() <= E <= est.value_hi.to_fraction()
        assert isinstance(est.width, Dyadic)
    z = H.energy_density_bounds(h, [0, 0, 0], 128)
    assert z.value_lo <= Dyadic(0) <= z.value_hi
    with pytest.raises(ValueError):
        H.energy_density_bounds(h, [1], 128)


def test_density_interval_shrinks():
    h = H.from_tileset(checkerboard(), lam=1)
    w = [H.energy_density_bounds(h, [1] * 5, L).width for L in (64, 256, 1024)]
    assert w[0] > w[1] > w[2]


@pytest.mark.parametrize("name,n", [("accept", 2), ("reject", 2), ("parity", 2), ("parity", 3)])
def test_restricted_square_energy(name, n):
    cm = compiled(name, 1)
    ts = tileset(robinson.LAYERS, name)
    r = H.restricted_square_energy(None, cm, n, ts)
    want = 0 if tm.run_reference(cm.spec, "", 2 ** n, tape_width=2 ** n + 1).accepted else 1
    assert r.value == want
    assert r.paths >= 1


def test_restricted_square_energy_branching_finds_accepting_path():
    cm = compiled("branch", 1)
    r = H.restricted_square_energy(None, cm, 2, tileset(robinson.LAYERS, "branch"))
    assert r.value == 0


def test_square_hamiltonian_penalises_only_reject_under_border():
    ts = tileset(robinson.LAYERS, "reject")
    h = H.square_hamiltonian(ts)
    assert h.lam == H.DEFAULT_LAMBDA
    assert h.pi_no_pairs
    rej, bor = H.square_markers(ts)
    assert all(rej(a) and bor(b) for a, b in h.pi_no_pairs)
    for a, b in list(h.pi_no_pairs)[:200]:
        lam = 0 if ts.base.vert[a, b] else h.lam
        assert Fraction(int(h.col_num[a, b]), h.den) == 1 + lam
