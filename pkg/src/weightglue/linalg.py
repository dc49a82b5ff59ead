"""Exact matrix and module arithmetic over the supported coefficient rings.

Everything runs through a single integer Smith normal form.  Residue rings are
handled by lifting to Z and reducing every row/column operation modulo n;
Z[1/p] and Q clear denominators by a unit scalar first and read divisibility
through the ring afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, prod
from typing import Optional

import numpy as np

from .rings import CoefficientRing, RingError, RingMismatch, _unit_to_gcd

__all__ = [
    "NotWellDefined",
    "PresentedModule",
    "smith_normal_form",
    "invariant_factors",
    "kernel_basis",
    "cokernel_presentation",
    "solve_linear",
    "module_image",
    "modules_isomorphic",
    "preimage",
    "intersect",
    "subquotient",
    "in_span",
    "hstack",
    "vstack",
]


class NotWellDefined(RingError):
    pass


# ---------------------------------------------------------------------------
# integer engine


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _identity(k: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(k)] for i in range(k)]


def _int_snf(A: list[list[int]], m: int, n: int, modulus: Optional[int] = None,
             transforms: bool = True):
    """Smith form of an m x n integer matrix, optionally modulo ``modulus``.

    Returns ``(U, diag, Vt)`` where U (m x m) and Vt (the transpose of V,
    n x n) are unimodular (over Z/modulus when given), ``diag`` lists the
    nonzero pivots, and U A V is diag padded with zeros.  ``A`` is consumed.
    """
    mod = modulus
    U = _identity(m) if transforms else None
    Vt = _identity(n) if transforms else None

    def red(row):
        return [x % mod for x in row] if mod else row

    def rowop(i, j, a, b, c, d):
        # (row_i, row_j) <- (a row_i + b row_j, c row_i + d row_j)
        ri, rj = A[i], A[j]
        A[i] = red([a * x + b * y for x, y in zip(ri, rj)])
        A[j] = red([c * x + d * y for x, y in zip(ri, rj)])
        if U is not None:
            ui, uj = U[i], U[j]
            U[i] = red([a * x + b * y for x, y in zip(ui, uj)])
            U[j] = red([c * x + d * y for x, y in zip(ui, uj)])

    def colop(i, j, a, b, c, d, start):
        # (col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)
        for r in range(start, m):
            row = A[r]
            x, y = row[i], row[j]
            if x or y:
                nx, ny = a * x + b * y, c * x + d * y
                if mod:
                    nx, ny = nx % mod, ny % mod
                row[i], row[j] = nx, ny
        if Vt is not None:
            vi, vj = Vt[i], Vt[j]
            Vt[i] = red([a * x + b * y for x, y in zip(vi, vj)])
            Vt[j] = red([c * x + d * y for x, y in zip(vi, vj)])

    def key(x):
        return gcd(x, mod) if mod else abs(x)

    diag: list[int] = []
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                x = row[j]
                if x:
                    k = key(x)
                    if best is None or k < best[0]:
                        best = (k, i, j)
                        if k == 1:
                            break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i0, j0 = best
        if i0 != t:
            A[t], A[i0] = A[i0], A[t]
            if U is not None:
                U[t], U[i0] = U[i0], U[t]
        if j0 != t:
            for r in range(t, m):
                row = A[r]
                row[t], row[j0] = row[j0], row[t]
            if Vt is not None:
                Vt[t], Vt[j0] = Vt[j0], Vt[t]
        while True:
            a = A[t][t]
            if mod:
                g = gcd(a, mod)
                if g != a:
                    u = _unit_to_gcd(a, mod)
                    A[t] = [(u * x) % mod for x in A[t]]
                    if U is not None:
                        U[t] = [(u * x) % mod for x in U[t]]
                    a = A[t][t]
            elif a < 0:
                A[t] = [-x for x in A[t]]
                if U is not None:
                    U[t] = [-x for x in U[t]]
                a = -a
            for i in range(t + 1, m):
                b = A[i][t]
                if not b:
                    continue
                if b % a == 0:
                    q = b // a
                    ri, rt = A[i], A[t]
                    A[i] = red([x - q * y for x, y in zip(ri, rt)])
                    if U is not None:
                        U[i] = red([x - q * y for x, y in zip(U[i], U[t])])
                else:
                    g, s, x = _egcd(a, b)
                    rowop(t, i, s, x, -(b // g), a // g)
                    a = A[t][t]
            dirty = False
            for j in range(t + 1, n):
                b = A[t][j]
                if not b:
                    continue
                if b % a == 0:
                    q = b // a
                    colop(j, t, 1, -q, 0, 1, t)
                else:
                    g, s, x = _egcd(a, b)
                    colop(t, j, s, x, -(b // g), a // g, t)
                    a = A[t][t]
                    dirty = True
            if dirty and any(A[i][t] for i in range(t + 1, m)):
                continue
            bad = None
            for i in range(t + 1, m):
                row = A[i]
                for j in range(t + 1, n):
                    if row[j] % a:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            rowop(t, bad, 1, 1, 0, 1)
        a = A[t][t]
        if mod:
            g = gcd(a, mod)
            if g != a:
                u = _unit_to_gcd(a, mod)
                A[t] = [(u * x) % mod for x in A[t]]
                if U is not None:
                    U[t] = [(u * x) % mod for x in U[t]]
                a = g
        elif a < 0:
            A[t] = [-x for x in A[t]]
            if U is not None:
                U[t] = [-x for x in U[t]]
            a = -a
        diag.append(a)
        t += 1
    return U, diag, Vt


def _lifted_snf(ring: CoefficientRing, A: np.ndarray, transforms: bool = True):
    rows, scale = ring.lift_to_integers(A)
    m, n = A.shape
    U, diag, Vt = _int_snf(rows, m, n, ring.modulus, transforms)
    return U, diag, Vt, scale


def _to_array(ring: CoefficientRing, rows: list[list[int]], shape) -> np.ndarray:
    out = ring.zeros(*shape)
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            if x:
                out[i, j] = ring(x)
    return out


# ---------------------------------------------------------------------------
# public operations


def smith_normal_form(ring: CoefficientRing, A: np.ndarray):
    """Return ``(U, D, V)`` with ``U @ A @ V == D`` over ``ring``.

    U and V are invertible over the ring; D is diagonal with canonical
    (unit-normalized) entries forming a divisibility chain.
    """
    A = np.asarray(A, dtype=object)
    m, n = A.shape
    U, diag, Vt, scale = _lifted_snf(ring, A)
    Ua = _to_array(ring, U, (m, m))
    V = _to_array(ring, Vt, (n, n)).T.copy()
    D = ring.zeros(m, n)
    for i, d in enumerate(diag):
        # actual pivot of U A V is d / scale
        c = ring(d) if scale == 1 else ring(Fraction(d, scale))
        dn, u = ring.unit_normalizer(c)
        D[i, i] = dn
        if u != 1:
            Ua[i, :] = ring.scale(u, Ua[i:i + 1, :])[0]
    return Ua, D, V


def invariant_factors(ring: CoefficientRing, relations: np.ndarray, generators: Optional[int] = None) -> tuple[int, ...]:
    """Nonunit invariant factors of coker(relations), free summands as 0."""
    relations = np.asarray(relations, dtype=object)
    g = relations.shape[0] if generators is None else generators
    if relations.shape[1] == 0 or g == 0:
        return (0,) * g
    _, diag, _, _ = _lifted_snf(ring, relations, transforms=False)
    out = []
    for d in diag:
        f = ring.normalize_factor(d)
        if f != 1:
            out.append(f)
    out.extend([0] * (g - len(diag)))
    return tuple(_canonical_order(out))


def _canonical_order(factors):
    nz = sorted(f for f in factors if f != 0)
    return nz + [f for f in factors if f == 0]


def kernel_basis(ring: CoefficientRing, A: np.ndarray) -> np.ndarray:
    """Columns generate ``{x : A x = 0}``.

    Over a domain the columns are a basis (saturated over Z); over Z/n the
    kernel need not be free and the columns form a generating set.
    """
    A = np.asarray(A, dtype=object)
    m, n = A.shape
    if n == 0:
        return ring.zeros(0, 0)
    if m == 0:
        return ring.eye(n)
    _, diag, Vt, _ = _lifted_snf(ring, A)
    cols = []
    mod = ring.modulus
    for i in range(n):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            cols.append(Vt[i])
        elif mod:
            g = gcd(d, mod)
            if g != 1:
                c = mod // g
                cols.append([(c * x) % mod for x in Vt[i]])
    out = ring.zeros(n, len(cols))
    for j, col in enumerate(cols):
        for i, x in enumerate(col):
            if x:
                out[i, j] = ring(x)
    return out


def solve_linear(ring: CoefficientRing, A: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    """Some x with ``A @ x == b`` (b a column or a matrix of columns), or None."""
    A = np.asarray(A, dtype=object)
    b = np.asarray(b, dtype=object)
    vector = b.ndim == 1
    if vector:
        b = b.reshape(-1, 1)
    m, n = A.shape
    if b.shape[0] != m:
        raise RingError(f"solve_linear: {A.shape} vs rhs {b.shape}")
    k = b.shape[1]
    if n == 0:
        if any(x != 0 for x in b.reshape(-1)):
            return None
        x = ring.zeros(0, k)
        return x.reshape(-1) if vector else x
    if m == 0:
        x = ring.zeros(n, k)
        return x.reshape(-1) if vector else x
    U, diag, Vt, scale = _lifted_snf(ring, A)
    Ua = _to_array(ring, U, (m, m))
    c = ring.matmul(Ua, ring.scale(ring(scale), b))
    y = ring.zeros(n, k)
    for col in range(k):
        for i in range(m):
            ci = c[i, col]
            if i < len(diag):
                q = ring.try_div(ci, diag[i])
                if q is None:
                    return None
                y[i, col] = q
            elif ci != 0:
                return None
    V = _to_array(ring, Vt, (n, n)).T
    x = ring.matmul(V, y)
    return x.reshape(-1) if vector else x


def hstack(ring: CoefficientRing, *mats: np.ndarray, rows: Optional[int] = None) -> np.ndarray:
    mats = [np.asarray(x, dtype=object) for x in mats]
    if rows is None:
        rows = mats[0].shape[0]
    cols = sum(x.shape[1] for x in mats)
    out = ring.zeros(rows, cols)
    c = 0
    for x in mats:
        if x.shape[0] != rows:
            raise RingError("hstack row mismatch")
        out[:, c:c + x.shape[1]] = x
        c += x.shape[1]
    return out


def vstack(ring: CoefficientRing, *mats: np.ndarray, cols: Optional[int] = None) -> np.ndarray:
    mats = [np.asarray(x, dtype=object) for x in mats]
    if cols is None:
        cols = mats[0].shape[1]
    rows = sum(x.shape[0] for x in mats)
    out = ring.zeros(rows, cols)
    r = 0
    for x in mats:
        if x.shape[1] != cols:
            raise RingError("vstack column mismatch")
        out[r:r + x.shape[0], :] = x
        r += x.shape[0]
    return out


def preimage(ring: CoefficientRing, f: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Generators of ``{x : f x in span(S)}``."""
    n = f.shape[1]
    K = kernel_basis(ring, hstack(ring, f, S, rows=f.shape[0]))
    return K[:n, :]


def intersect(ring: CoefficientRing, S1: np.ndarray, S2: np.ndarray) -> np.ndarray:
    """Generators of span(S1) ∩ span(S2)."""
    Y = preimage(ring, S1, S2)
    return ring.matmul(S1, Y)


def in_span(ring: CoefficientRing, S: np.ndarray, v: np.ndarray) -> bool:
    return solve_linear(ring, S, v) is not None


@dataclass(frozen=True)
class PresentedModule:
    """Finitely generated module ``R^generators / span(relations)``.

    ``relations`` has one column per relation.  Invariant factors are computed
    on construction: nonunit factors in divisibility order, then ``0`` once
    per free summand (over Z/n "free" means a copy of Z/n).
    """

    ring: CoefficientRing
    generator_count: int
    relations: np.ndarray
    invariant_factors: tuple = field(default=None)

    def __post_init__(self):
        rel = np.asarray(self.relations, dtype=object)
        if rel.ndim != 2 or rel.shape[0] != self.generator_count:
            raise RingError(f"relation matrix shape {rel.shape} vs {self.generator_count} generators")
        object.__setattr__(self, "relations", rel)
        if self.invariant_factors is None:
            object.__setattr__(self, "invariant_factors",
                               invariant_factors(self.ring, rel, self.generator_count))

    @classmethod
    def free(cls, ring: CoefficientRing, rank: int) -> "PresentedModule":
        return cls(ring, rank, ring.zeros(rank, 0))

    @classmethod
    def zero(cls, ring: CoefficientRing) -> "PresentedModule":
        return cls(ring, 0, ring.zeros(0, 0))

    @property
    def free_rank(self) -> int:
        return sum(1 for f in self.invariant_factors if f == 0)

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(f for f in self.invariant_factors if f != 0)

    @property
    def is_zero(self) -> bool:
        return not self.invariant_factors

    @property
    def order(self) -> Optional[int]:
        """Cardinality, or None when infinite."""
        m = self.ring.modulus
        if m is None:
            if self.free_rank:
                return None
            if self.ring.kind == "Q":
                return 1
            return prod(self.torsion)
        return prod(m if f == 0 else f for f in self.invariant_factors)

    def describe(self) -> str:
        if self.is_zero:
            return "0"
        r = self.ring.descriptor
        parts = [r if f == 0 else f"{r}/{f}" if self.ring.kind != "Zn" else f"Z/{f}"
                 for f in self.invariant_factors]
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"PresentedModule({self.describe()} over {self.ring})"


def cokernel_presentation(ring: CoefficientRing, A: np.ndarray) -> PresentedModule:
    A = np.asarray(A, dtype=object)
    return PresentedModule(ring, A.shape[0], A)


def subquotient(ring: CoefficientRing, num: np.ndarray, den: np.ndarray) -> tuple[PresentedModule, np.ndarray]:
    """The module span(num) / (span(num) ∩ span(den)).

    Generators are the columns of ``num``; returns the module and the
    relation matrix (columns in generator coordinates).
    """
    rel = preimage(ring, num, den)
    return PresentedModule(ring, num.shape[1], rel), rel


def module_image(f: np.ndarray, source: PresentedModule, target: PresentedModule) -> PresentedModule:
    """Image of the map given on generators by the columns of ``f``."""
    ring = source.ring
    if target.ring != ring:
        raise RingMismatch(f"{source.ring} vs {target.ring}")
    f = np.asarray(f, dtype=object)
    if f.shape != (target.generator_count, source.generator_count):
        raise RingError(f"map shape {f.shape} does not match modules")
    if source.relations.shape[1]:
        images = ring.matmul(f, source.relations)
        if solve_linear(ring, target.relations, images) is None:
            raise NotWellDefined("map does not respect the source relations")
    rel = preimage(ring, f, target.relations)
    return PresentedModule(ring, source.generator_count, rel)


def modules_isomorphic(M: PresentedModule, N: PresentedModule) -> bool:
    if M.ring != N.ring:
        raise RingMismatch(f"{M.ring} vs {N.ring}")
    return M.invariant_factors == N.invariant_factors
