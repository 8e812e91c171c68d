"""Exact dyadic rationals ``numerator / 2^exponent`` in canonical form."""
from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from numbers import Rational


@total_ordering
class Dyadic:
    __slots__ = ("numerator", "exponent")

    def __init__(self, numerator: int, exponent: int = 0):
        numerator, exponent = int(numerator), int(exponent)
        if numerator == 0:
            exponent = 0
        while exponent > 0 and numerator % 2 == 0:
            numerator //= 2
            exponent -= 1
        while exponent < 0:
            numerator *= 2
            exponent += 1
        self.numerator, self.exponent = numerator, exponent

    @classmethod
    def from_fraction(cls, q) -> "Dyadic":
        q = Fraction(q)
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not dyadic")
        return cls(q.numerator, den.bit_length() - 1)

    @classmethod
    def floor(cls, q, bits: int) -> "Dyadic":
        """Largest dyadic with exponent <= bits that is <= q."""
        q = Fraction(q)
        return cls((q.numerator << bits) // q.denominator, bits)

    @classmethod
    def ceil(cls, q, bits: int) -> "Dyadic":
        q = Fraction(q)
        return cls(-((-q.numerator << bits) // q.denominator), bits)

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def bit_length(self) -> int:
        """Bits needed to write the value: integer part plus ``exponent`` fraction bits."""
        whole = abs(self.numerator) >> self.exponent
        return max(whole.bit_length(), 1) + self.exponent

    def binary(self) -> str:
        """Binary expansion, e.g. ``0b0.000001``."""
        sign = "-" if self.numerator < 0 else ""
        n = abs(self.numerator)
        whole, frac = n >> self.exponent, n & ((1 << self.exponent) - 1)
        s = f"{sign}0b{whole:b}"
        if self.exponent:
            s += "." + format(frac, f"0{self.exponent}b")
        return s

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        text = text.strip()
        if text.startswith(("0b", "-0b")):
            neg = text.startswith("-")
            body = text[3:] if neg else text[2:]
            whole, _, frac = body.partition(".")
            n = int(whole or "0", 2)
            for ch in frac:
                n = 2 * n + int(ch, 2)
            return cls(-n if neg else n, len(frac))
        return cls.from_fraction(Fraction(text))

    # -- arithmetic ------------------------------------------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, Dyadic):
            return other
        if isinstance(other, (int, Rational)):
            return Dyadic.from_fraction(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        e = max(self.exponent, o.exponent)
        return Dyadic((self.numerator << (e - self.exponent)) + (o.numerator << (e - o.exponent)), e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.numerator, self.exponent)

    def __sub__(self, other):
        o = self._coerce(other)
        return o if o is NotImplemented else self + (-o)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Dyadic(self.numerator * o.numerator, self.exponent + o.exponent)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return (self.numerator, self.exponent) == (other.numerator, other.exponent)
        if isinstance(other, (int, Rational)):
            return self.to_fraction() == other
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, Dyadic):
            other = other.to_fraction()
        if isinstance(other, (int, Rational)):
            return self.to_fraction() < other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __float__(self):
        return self.numerator / (1 << self.exponent)

    def __repr__(self):
        return f"Dyadic({self.numerator}, {self.exponent})"

    def __str__(self):
        return str(self.to_fraction())
