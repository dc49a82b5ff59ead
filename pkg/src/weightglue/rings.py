"""Coefficient rings and object-dtype matrix helpers.

Elements are plain Python numbers: ``int`` for integral values and
``fractions.Fraction`` when a denominator survives (Z[1/p] and Q).  Residue
rings Z/n and F_p store the least nonnegative representative.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "CoefficientRing",
    "RingError",
    "UnsupportedRing",
    "RingMismatch",
    "parse_ring",
]


class RingError(ValueError):
    pass


class UnsupportedRing(RingError):
    pass


class RingMismatch(RingError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


def _strip(a: int, p: int) -> tuple[int, int]:
    """Return ``(a / p**v, v)`` with the largest such v."""
    v = 0
    while a and a % p == 0:
        a //= p
        v += 1
    return a, v


@dataclass(frozen=True)
class CoefficientRing:
    """One of Z, Z[1/p], Z/n, F_p, Q.

    ``kind`` is one of ``"Z"``, ``"Zp"`` (Z with p inverted), ``"Zn"``,
    ``"Fp"``, ``"Q"``.  Use the classmethod constructors rather than building
    instances by hand.
    """

    kind: str
    p: Optional[int] = None
    n: Optional[int] = None

    def __post_init__(self):
        if self.kind == "Z":
            return
        if self.kind in ("Zp", "Fp"):
            if self.p is None or not _is_prime(self.p):
                raise RingError(f"{self.kind} needs a prime p, got {self.p}")
            return
        if self.kind == "Zn":
            if self.n is None or self.n < 2:
                raise RingError(f"Z/n needs n >= 2, got {self.n}")
            return
        if self.kind == "Q":
            return
        raise UnsupportedRing(self.kind)

    # constructors ---------------------------------------------------------
    @classmethod
    def integers(cls) -> "CoefficientRing":
        return cls("Z")

    @classmethod
    def localized(cls, p: int) -> "CoefficientRing":
        return cls("Zp", p=p)

    @classmethod
    def integers_mod(cls, n: int) -> "CoefficientRing":
        return cls("Zn", n=n)

    @classmethod
    def prime_field(cls, p: int) -> "CoefficientRing":
        return cls("Fp", p=p)

    @classmethod
    def rationals(cls) -> "CoefficientRing":
        return cls("Q")

    # properties -------------------------------------------------------------
    @property
    def modulus(self) -> Optional[int]:
        if self.kind == "Zn":
            return self.n
        if self.kind == "Fp":
            return self.p
        return None

    @property
    def is_field(self) -> bool:
        return self.kind in ("Fp", "Q")

    @property
    def is_domain(self) -> bool:
        return self.kind != "Zn"

    @property
    def descriptor(self) -> str:
        return {
            "Z": "Z",
            "Zp": f"Z[1/{self.p}]",
            "Zn": f"Z/{self.n}",
            "Fp": f"F{self.p}",
            "Q": "Q",
        }[self.kind]

    def __str__(self) -> str:
        return self.descriptor

    # elements ---------------------------------------------------------------
    def __call__(self, x) -> int | Fraction:
        """Coerce ``x`` to the canonical representative."""
        m = self.modulus
        if m is not None:
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    num, den = x.numerator, x.denominator
                    if gcd(den, m) != 1:
                        raise RingError(f"{x} is not an element of {self}")
                    return (num * pow(den, -1, m)) % m
                x = x.numerator
            return int(x) % m
        if self.kind == "Z":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise RingError(f"{x} is not an integer")
                return x.numerator
            return int(x)
        f = Fraction(x)
        if self.kind == "Zp":
            rest, _ = _strip(f.denominator, self.p)
            if rest != 1:
                raise RingError(f"{x} is not an element of {self}")
        return f.numerator if f.denominator == 1 else f

    def is_zero(self, x) -> bool:
        return x == 0

    def is_unit(self, x) -> bool:
        m = self.modulus
        if m is not None:
            return gcd(int(x), m) == 1
        if self.kind == "Z":
            return x in (1, -1)
        if self.kind == "Q":
            return x != 0
        f = Fraction(x)
        if f == 0:
            return False
        rest, _ = _strip(abs(f.numerator), self.p)
        return rest == 1

    def inverse(self, x):
        if not self.is_unit(x):
            raise RingError(f"{x} is not a unit in {self}")
        m = self.modulus
        if m is not None:
            return pow(int(x), -1, m)
        return self(Fraction(1) / Fraction(x))

    def normalize_factor(self, x) -> int:
        """Canonical associate of ``x``: 1 for units, 0 for zero.

        Over Z/n this is gcd(x, n) (0 when x = 0), over Z[1/p] the positive
        p-free part of the numerator.
        """
        if x == 0:
            return 0
        m = self.modulus
        if m is not None:
            g = gcd(int(x), m)
            return 0 if g == m else g
        if self.kind == "Z":
            return abs(int(x))
        if self.kind == "Q":
            return 1
        rest, _ = _strip(abs(Fraction(x).numerator), self.p)
        return rest

    def unit_normalizer(self, x) -> tuple[int, object]:
        """Return ``(d, u)`` with u a unit and ``u * x == d`` canonical."""
        d = self.normalize_factor(x)
        if x == 0:
            return 0, 1
        m = self.modulus
        if m is not None:
            return d, _unit_to_gcd(int(x), m)
        if self.kind == "Z":
            return d, (1 if x > 0 else -1)
        return d, self(Fraction(d) / Fraction(x))

    def try_div(self, c, d: int):
        """Return y with ``d * y == c`` in the ring, or None.

        ``d`` is an integer coming out of the (lifted) integer Smith form.
        """
        m = self.modulus
        if m is not None:
            g = gcd(d, m)
            c = int(c) % m
            if c % g:
                return None
            dd, mm = d // g, m // g
            if mm == 1:
                return 0
            return (c // g) * pow(dd % mm, -1, mm) % mm
        if d == 0:
            return 0 if c == 0 else None
        if self.kind == "Z":
            return c // d if c % d == 0 else None
        f = Fraction(c)
        if self.kind == "Zp":
            rest, _ = _strip(abs(d), self.p)
            if f.numerator % rest:
                return None
        return self(f / d)

    # matrices ---------------------------------------------------------------
    def array(self, rows: Iterable[Sequence], shape: Optional[tuple[int, int]] = None) -> np.ndarray:
        rows = [[self(x) for x in r] for r in rows]
        if shape is None:
            if not rows:
                raise RingError("empty matrix needs an explicit shape")
            shape = (len(rows), len(rows[0]))
        out = np.zeros(shape, dtype=object)
        for i, r in enumerate(rows):
            if len(r) != shape[1]:
                raise RingError("ragged matrix rows")
            for j, x in enumerate(r):
                out[i, j] = x
        return out

    def vector(self, xs: Iterable) -> np.ndarray:
        xs = [self(x) for x in xs]
        out = np.zeros(len(xs), dtype=object)
        for i, x in enumerate(xs):
            out[i] = x
        return out

    def zeros(self, r: int, c: int) -> np.ndarray:
        out = np.empty((r, c), dtype=object)
        out.fill(0)
        return out

    def eye(self, k: int) -> np.ndarray:
        out = self.zeros(k, k)
        for i in range(k):
            out[i, i] = 1
        return out

    def reduce(self, a: np.ndarray) -> np.ndarray:
        m = self.modulus
        if m is not None:
            return np.asarray(a % m, dtype=object)
        if self.kind == "Z":
            return np.asarray(a, dtype=object)
        out = np.asarray(a, dtype=object).copy()
        flat = out.reshape(-1)
        for k, x in enumerate(flat):
            if isinstance(x, Fraction) and x.denominator == 1:
                flat[k] = x.numerator
        return out

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] != b.shape[0]:
            raise RingError(f"shape mismatch {a.shape} @ {b.shape}")
        if a.shape[1] == 0 or a.size == 0 or b.size == 0:
            return self.zeros(a.shape[0], b.shape[1])
        return self.reduce(a.dot(b))

    def scale(self, c, a: np.ndarray) -> np.ndarray:
        return self.reduce(a * c) if a.size else a.copy()

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.reduce(a + b) if a.size else a.copy()

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.reduce(a - b) if a.size else a.copy()

    def lift_to_integers(self, a: np.ndarray) -> tuple[list[list[int]], int]:
        """Integer matrix ``s * a`` with s a unit of the ring; returns (rows, s)."""
        rows = a.tolist()
        if self.kind in ("Zp", "Q"):
            den = 1
            for r in rows:
                for x in r:
                    if isinstance(x, Fraction):
                        den = den * x.denominator // gcd(den, x.denominator)
            rows = [[int(Fraction(x) * den) for x in r] for r in rows]
            return rows, den
        return [[int(x) for x in r] for r in rows], 1

    def random_element(self, rng, bound: int = 3):
        return self(int(rng.integers(-bound, bound + 1)))

    def random_matrix(self, rng, r: int, c: int, bound: int = 3) -> np.ndarray:
        out = self.zeros(r, c)
        for i in range(r):
            for j in range(c):
                out[i, j] = self.random_element(rng, bound)
        return out


def _unit_to_gcd(a: int, m: int) -> int:
    """A unit u mod m with ``u * a == gcd(a, m) (mod m)``."""
    g = gcd(a, m)
    mm = m // g
    if mm == 1:
        u0 = 1
    else:
        u0 = pow((a // g) % mm, -1, mm)
    k = 0
    while gcd(u0 + k * mm, m) != 1:
        k += 1
    return (u0 + k * mm) % m


_RING_PATTERNS = [
    (re.compile(r"^(Z|ZZ|integers)$"), lambda m: CoefficientRing.integers()),
    (re.compile(r"^(Q|QQ|rationals)$"), lambda m: CoefficientRing.rationals()),
    (re.compile(r"^Z\[1/(\d+)\]$"), lambda m: CoefficientRing.localized(int(m.group(1)))),
    (re.compile(r"^Z/(\d+)$"), lambda m: CoefficientRing.integers_mod(int(m.group(1)))),
    (re.compile(r"^(?:F|GF)\(?(\d+)\)?$"), lambda m: CoefficientRing.prime_field(int(m.group(1)))),
]


def parse_ring(text: str) -> CoefficientRing:
    """Parse descriptors like ``Z``, ``Z[1/3]``, ``Z/4``, ``F2``, ``GF(5)``, ``Q``."""
    s = text.strip().replace(" ", "")
    for pat, make in _RING_PATTERNS:
        m = pat.match(s)
        if m:
            return make(m)
    raise UnsupportedRing(f"unknown ring descriptor {text!r}")
