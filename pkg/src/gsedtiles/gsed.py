"""Energy-density series, the GSED promise problem, and bit extraction by binary search.

The ground state energy density of the constructed Hamiltonian is
``E = 1/4 * sum_{n >= n0} i_n / 16^n`` with ``i_n = 1`` iff the n-th instance is
rejected.  Everything here is exact dyadic arithmetic.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .dyadic import Dyadic
from .errors import ProtocolError, ResourceError

YES, NO, VIOLATED = "yes", "no", "promise-violated"
DEFAULT_DEPTH_BUDGET = 64


def tail_bound(m: int) -> Dyadic | Fraction:
    """1/4 * sum_{n > m} 16^-n = 1/4 * (1/15) * 16^-m (not dyadic, kept as a Fraction)."""
    return Fraction(1, 4 * 15 * 16 ** m)


class OutcomeSeries:
    """Lazily computed, memoized bits i_n (n >= n0); i_n = 0 below n0.

    ``closed_after`` declares that i_n = 0 for every n beyond it, which lets
    ``decide`` see the exact value instead of an interval.
    """

    def __init__(self, provider: Callable[[int], int], n0: int = 1, closed_after: int | None = None,
                 budget: int = DEFAULT_DEPTH_BUDGET):
        self.provider, self.n0, self.closed_after, self.budget = provider, n0, closed_after, budget
        self._memo: dict = {}
        self._lock = threading.Lock()

    @classmethod
    def from_bits(cls, bits: Sequence[int], n0: int = 1, closed: bool = True) -> "OutcomeSeries":
        """Bits i_n0, i_n0+1, ...; zero beyond the list."""
        bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in bits):
            raise ValueError("series bits must be 0 or 1")
        return cls(lambda n: bits[n - n0] if n - n0 < len(bits) else 0, n0,
                   n0 + len(bits) - 1 if closed else None)

    @classmethod
    def constant(cls, bit: int, n0: int = 1) -> "OutcomeSeries":
        return cls(lambda n: bit, n0, None if bit else n0 - 1)

    @classmethod
    def from_machine(cls, m, indexer, max_steps: int = 4096) -> "OutcomeSeries":
        """Direct simulation: i_n = 0 iff m accepts x_n within ``max_steps``."""
        from .tm import run_reference
        return cls(lambda n: 0 if run_reference(m, indexer.string(n), max_steps).accepted else 1,
                   indexer.n0)

    @classmethod
    def from_squares(cls, compiled, ts=None, h=None) -> "OutcomeSeries":
        """Tile level: i_n is the restricted ground energy of an n-square."""
        from .hamiltonian import restricted_square_energy
        return cls(lambda n: restricted_square_energy(h, compiled, n, ts).value, compiled.n0)

    def __getitem__(self, n: int) -> int:
        if n < self.n0 or (self.closed_after is not None and n > self.closed_after):
            return 0
        if n - self.n0 >= self.budget:
            raise ResourceError(f"evaluating i_{n} exceeds the depth budget of {self.budget}")
        if n not in self._memo:
            v = int(self.provider(n))
            if v not in (0, 1):
                raise ValueError(f"provider returned i_{n} = {v}")
            with self._lock:
                self._memo.setdefault(n, v)
        return self._memo[n]

    def bits(self, m: int) -> list[int]:
        """i_1 .. i_m."""
        return [self[n] for n in range(1, m + 1)]


def partial_sum(s: OutcomeSeries, m: int) -> Dyadic:
    return sum((Dyadic(s[n], 4 * n + 2) for n in range(1, m + 1)), Dyadic(0))


def series_value(s: OutcomeSeries, m: int) -> tuple[Dyadic, Fraction]:
    """(lower, upper) with E in [lower, upper]; upper = lower + 1/4 * (1/15) * 16^-m."""
    lo = partial_sum(s, m)
    if s.closed_after is not None and m >= s.closed_after:
        return lo, lo.to_fraction()
    return lo, lo.to_fraction() + tail_bound(m)


def exact_value(s: OutcomeSeries) -> Fraction | None:
    if s.closed_after is None:
        return None
    return partial_sum(s, max(s.closed_after, 0)).to_fraction()


@dataclass(frozen=True)
class ThresholdPair:
    alpha: Dyadic
    beta: Dyadic

    def __post_init__(self):
        if not self.beta > self.alpha:
            raise ValueError("thresholds need beta > alpha")


def decide(s: OutcomeSeries, t: ThresholdPair, max_depth: int | None = None) -> str:
    """``no`` if E >= beta, ``yes`` if E < alpha, ``promise-violated`` if alpha <= E < beta.

    Deepens the series until the interval settles one of the three cases.
    """
    alpha, beta = t.alpha.to_fraction(), t.beta.to_fraction()
    limit = max_depth if max_depth is not None else s.n0 + s.budget - 1
    for m in range(max(s.n0, 1), limit + 1):
        lo, hi = series_value(s, m)
        lo = lo.to_fraction()
        if lo >= beta:
            return NO
        if hi < alpha:
            return YES
        if lo >= alpha and hi < beta:
            return VIOLATED
    raise ResourceError(f"series interval did not separate the thresholds by depth {limit}")


def thresholds_for(m: int, prefix: Sequence[int]) -> ThresholdPair:
    """beta_m = 1/4 (16^-m + sum), and the finite-expansion a_m = 1/4 (sum + 2 * 16^-(m+1))."""
    if m < 1 or len(prefix) != m - 1:
        raise ValueError("thresholds_for(m) needs the m - 1 bits i_1 .. i_{m-1}")
    known = sum((Dyadic(int(b), 4 * n + 2) for n, b in enumerate(prefix, 1)), Dyadic(0))
    beta = known + Dyadic(1, 4 * m + 2)
    a = known + Dyadic(1, 4 * m + 5)
    return ThresholdPair(a, beta)


def alpha_exact(m: int, prefix: Sequence[int]) -> Fraction:
    """The true alpha_m = 1/4 (sum + sum_{n > m} 16^-n), which has no finite expansion."""
    known = sum(Fraction(int(b), 4 * 16 ** n) for n, b in enumerate(prefix, 1))
    return known + tail_bound(m)


@dataclass
class ExtractionTranscript:
    queries: list = field(default_factory=list)  # (ThresholdPair, answer)
    recovered: list = field(default_factory=list)

    def max_bits(self) -> int:
        """Longest binary expansion (fraction digits) among the query thresholds."""
        return max((max(t.alpha.exponent, t.beta.exponent) for t, _ in self.queries), default=0)


def extract(k: int, oracle: Callable[[ThresholdPair], str]) -> ExtractionTranscript:
    """Recover i_1 .. i_k with exactly k threshold queries."""
    tr = ExtractionTranscript()
    for m in range(1, k + 1):
        t = thresholds_for(m, tr.recovered)
        ans = oracle(t)
        tr.queries.append((t, ans))
        if ans == NO:
            tr.recovered.append(1)
        elif ans == YES:
            tr.recovered.append(0)
        else:
            raise ProtocolError(f"oracle answered {ans!r} at query {m}")
    return tr


def fgsed(s: OutcomeSeries, epsilon) -> Dyadic:
    """A dyadic within epsilon of E: the partial sum once the tail is below epsilon."""
    eps = epsilon.to_fraction() if isinstance(epsilon, Dyadic) else Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    m = max(s.n0, 1)
    while True:
        lo, hi = series_value(s, m)
        if hi - lo.to_fraction() <= eps:
            return lo
        m += 1
        if m - s.n0 >= s.budget:
            raise ResourceError(f"epsilon {eps} needs more than {s.budget} terms")
