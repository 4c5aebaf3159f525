"""Finitely generated commutative semigroups and their finite truncations.

Four descriptor families are supported: the free abelian monoid ``Z_+^k``,
finite abelian groups ``Z_N1 x ... x Z_Nl``, numerical semigroups (additive
submonoids of ``Z_+`` spanned by a few positive integers) and binary
products of these. Elements are tuples of non-negative integers; a
numerical-semigroup element is the 1-tuple ``(n,)``.

A :class:`Window` is a finite *lower set*: whenever ``w = s v`` lies in the
window, so does ``v``. On lower sets the compression of the left regular
representation is an algebra homomorphism on the shift algebra and the
adjoint ``lambda(s)*`` truncates exactly, which is what keeps boundary
effects out of the model-space checks.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyWindow

Element = tuple


def _as_element(a, ncoords: int) -> tuple:
    if isinstance(a, (int, np.integer)):
        a = (int(a),)
    t = tuple(int(x) for x in a)
    if len(t) != ncoords:
        raise ValueError(f"element {t} has {len(t)} coordinates, expected {ncoords}")
    return t


# -- numerical semigroup representability -----------------------------------

_REPR_CACHE: dict[tuple, np.ndarray] = {}


def representable(generators: Sequence[int], upto: int) -> np.ndarray:
    """Boolean table ``r[n]`` for ``0 <= n <= upto``: is ``n`` a sum of generators?"""
    gens = tuple(sorted(int(g) for g in generators))
    table = _REPR_CACHE.get(gens)
    if table is None or table.size <= upto:
        size = max(upto + 1, 64, 2 * (0 if table is None else table.size))
        table = np.zeros(size, dtype=bool)
        table[0] = True
        for n in range(1, size):
            table[n] = any(n >= g and table[n - g] for g in gens)
        _REPR_CACHE[gens] = table
    return table[: upto + 1]


def conductor(generators: Sequence[int]) -> int:
    """Smallest ``c`` such that every multiple of ``gcd(generators)`` at least ``c`` is representable."""
    gens = sorted(int(g) for g in generators)
    g = math.gcd(*gens)
    lo, hi = gens[0] // g, gens[-1] // g
    bound = g * (lo * hi + hi + 1)
    table = representable(gens, bound)
    c = bound
    for n in range(bound - g * (lo + 1), -1, -g):
        if not table[n]:
            break
        c = n
    return c


# -- descriptors -------------------------------------------------------------


class Descriptor:
    """Common interface of the semigroup descriptors.

    ``nslots`` counts the unbounded directions a window cap applies to (one
    per free generator, one per numerical factor, none for finite groups).
    """

    ncoords: int
    nslots: int

    def identity(self) -> tuple:
        return (0,) * self.ncoords

    def element(self, a) -> tuple:
        t = _as_element(a, self.ncoords)
        if not self.is_valid(t):
            raise ValueError(f"{t} is not an element of {self}")
        return t

    def moduli(self) -> tuple:
        return (0,) * self.ncoords

    def mult(self, a, b) -> tuple:
        a = _as_element(a, self.ncoords)
        b = _as_element(b, self.ncoords)
        return tuple(
            (x + y) % m if m else x + y for x, y, m in zip(a, b, self.moduli())
        )

    def degree(self, a) -> int:
        return sum(a)

    def order_key(self, a):
        return (self.degree(a), tuple(a))

    def slot_values(self, a) -> tuple:
        raise NotImplementedError

    def candidates(self, caps: Sequence[int]) -> list:
        raise NotImplementedError

    def divide(self, w, g):
        """``v`` with ``g . v = w``, or ``None`` if ``g`` does not divide ``w``."""
        raise NotImplementedError

    def factorize(self, a) -> tuple:
        """Exponent of each generator in one factorization of ``a``."""
        raise NotImplementedError

    def is_valid(self, a) -> bool:
        raise NotImplementedError

    def generators(self) -> list:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class FreeAbelian(Descriptor):
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("FreeAbelian needs k >= 1")

    @property
    def ncoords(self):
        return self.k

    @property
    def nslots(self):
        return self.k

    def is_valid(self, a):
        return len(a) == self.k and all(x >= 0 for x in a)

    def generators(self):
        return [tuple(int(i == j) for j in range(self.k)) for i in range(self.k)]

    def slot_values(self, a):
        return tuple(a)

    def candidates(self, caps):
        return list(itertools.product(*(range(c + 1) for c in caps)))

    def divide(self, w, g):
        v = tuple(x - y for x, y in zip(w, g))
        return v if all(x >= 0 for x in v) else None

    def factorize(self, a):
        return tuple(a)

    def to_json(self):
        return {"kind": "free_abelian", "k": self.k}


@dataclass(frozen=True)
class FiniteAbelian(Descriptor):
    orders: tuple

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(n) for n in self.orders))
        if not self.orders or any(n < 2 for n in self.orders):
            raise ValueError("FiniteAbelian needs at least one order, each >= 2")

    @property
    def ncoords(self):
        return len(self.orders)

    @property
    def nslots(self):
        return 0

    def moduli(self):
        return self.orders

    def is_valid(self, a):
        return len(a) == len(self.orders) and all(0 <= x < n for x, n in zip(a, self.orders))

    def generators(self):
        return [tuple(int(i == j) for j in range(self.ncoords)) for i in range(self.ncoords)]

    def slot_values(self, a):
        return ()

    def candidates(self, caps):
        return list(itertools.product(*(range(n) for n in self.orders)))

    def divide(self, w, g):
        return tuple((x - y) % n for x, y, n in zip(w, g, self.orders))

    def factorize(self, a):
        return tuple(a)

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    def to_json(self):
        return {"kind": "finite_abelian", "orders": list(self.orders)}


@dataclass(frozen=True)
class NumericalSG(Descriptor):
    generators_: tuple

    def __post_init__(self):
        gens = tuple(int(g) for g in self.generators_)
        if not gens or any(g <= 0 for g in gens):
            raise ValueError("numerical semigroup generators must be positive")
        if list(gens) != sorted(set(gens)):
            raise ValueError("numerical semigroup generators must be strictly increasing")
        object.__setattr__(self, "generators_", gens)

    def __repr__(self):
        return f"NumericalSG{self.generators_}"

    @property
    def ncoords(self):
        return 1

    @property
    def nslots(self):
        return 1

    def is_valid(self, a):
        return len(a) == 1 and a[0] >= 0 and bool(representable(self.generators_, a[0])[a[0]])

    def generators(self):
        return [(g,) for g in self.generators_]

    def slot_values(self, a):
        return (a[0],)

    def candidates(self, caps):
        (cap,) = caps
        table = representable(self.generators_, cap)
        return [(n,) for n in range(cap + 1) if table[n]]

    def divide(self, w, g):
        n = w[0] - g[0]
        if n < 0 or not representable(self.generators_, n)[n]:
            return None
        return (n,)

    def factorize(self, a):
        n = a[0]
        table = representable(self.generators_, n)
        counts = [0] * len(self.generators_)
        while n > 0:
            for i, g in enumerate(self.generators_):
                if n >= g and table[n - g]:
                    counts[i] += 1
                    n -= g
                    break
            else:  # pragma: no cover - table guarantees a predecessor
                raise ValueError(f"{a} is not representable")
        return tuple(counts)

    def to_json(self):
        return {"kind": "numerical", "generators": list(self.generators_)}


@dataclass(frozen=True)
class Product(Descriptor):
    left: Descriptor
    right: Descriptor

    @property
    def ncoords(self):
        return self.left.ncoords + self.right.ncoords

    @property
    def nslots(self):
        return self.left.nslots + self.right.nslots

    def _split(self, a):
        a = tuple(a)
        return a[: self.left.ncoords], a[self.left.ncoords :]

    def moduli(self):
        return self.left.moduli() + self.right.moduli()

    def mult(self, a, b):
        a = _as_element(a, self.ncoords)
        b = _as_element(b, self.ncoords)
        (al, ar), (bl, br) = self._split(a), self._split(b)
        return self.left.mult(al, bl) + self.right.mult(ar, br)

    def is_valid(self, a):
        if len(a) != self.ncoords:
            return False
        al, ar = self._split(a)
        return self.left.is_valid(al) and self.right.is_valid(ar)

    def degree(self, a):
        al, ar = self._split(a)
        return self.left.degree(al) + self.right.degree(ar)

    def order_key(self, a):
        # lexicographic over factors keeps lambda((g, n)) = lambda(g) (x) lambda(n)
        al, ar = self._split(a)
        return (self.left.order_key(al), self.right.order_key(ar))

    def generators(self):
        el, er = self.left.identity(), self.right.identity()
        return [g + er for g in self.left.generators()] + [el + g for g in self.right.generators()]

    def slot_values(self, a):
        al, ar = self._split(a)
        return self.left.slot_values(al) + self.right.slot_values(ar)

    def candidates(self, caps):
        caps = list(caps)
        lc = self.left.candidates(caps[: self.left.nslots])
        rc = self.right.candidates(caps[self.left.nslots :])
        return [a + b for a in lc for b in rc]

    def divide(self, w, g):
        (wl, wr), (gl, gr) = self._split(w), self._split(g)
        vl, vr = self.left.divide(wl, gl), self.right.divide(wr, gr)
        if vl is None or vr is None:
            return None
        return vl + vr

    def factorize(self, a):
        al, ar = self._split(a)
        return self.left.factorize(al) + self.right.factorize(ar)

    def factors(self) -> list:
        out = []
        for part in (self.left, self.right):
            out.extend(part.factors() if isinstance(part, Product) else [part])
        return out

    def to_json(self):
        return {"kind": "product", "factors": [self.left.to_json(), self.right.to_json()]}


def product(*descs: Descriptor) -> Descriptor:
    """Right-nested product of one or more descriptors."""
    if not descs:
        raise ValueError("product needs at least one factor")
    out = descs[-1]
    for d in reversed(descs[:-1]):
        out = Product(d, out)
    return out


def descriptor_from_json(obj: dict) -> Descriptor:
    kind = obj.get("kind")
    if kind == "free_abelian":
        return FreeAbelian(int(obj["k"]))
    if kind == "finite_abelian":
        return FiniteAbelian(tuple(obj["orders"]))
    if kind == "numerical":
        return NumericalSG(tuple(obj["generators"]))
    if kind == "product":
        factors = [descriptor_from_json(f) for f in obj["factors"]]
        if len(factors) < 2:
            raise ValueError("product descriptor needs at least two factors")
        return product(*factors)
    raise ValueError(f"unknown descriptor kind {kind!r}")


# -- windows -----------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    """Ordered finite lower set of a semigroup; ``elements[0]`` is the identity."""

    descriptor: Descriptor
    elements: tuple
    spec: dict | None = None
    index: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        desc = self.descriptor
        elems = tuple(desc.element(e) for e in self.elements)
        if not elems:
            raise EmptyWindow("window is empty")
        object.__setattr__(self, "elements", elems)
        index = {e: i for i, e in enumerate(elems)}
        if len(index) != len(elems):
            raise ValueError("window elements must be distinct")
        if elems[0] != desc.identity():
            raise EmptyWindow("window must start with the identity element")
        object.__setattr__(self, "index", index)
        bad = self.lower_set_violation()
        if bad is not None:
            raise ValueError(f"window is not a lower set: {bad[0]} = {bad[1]} . {bad[2]} but {bad[2]} is missing")

    @classmethod
    def from_elements(cls, descriptor: Descriptor, elements: Iterable, spec: dict | None = None) -> "Window":
        elems = sorted({descriptor.element(e) for e in elements}, key=descriptor.order_key)
        return cls(descriptor, tuple(elems), spec)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, a):
        return tuple(a) in self.index

    def position(self, a) -> int:
        return self.index[_as_element(a, self.descriptor.ncoords)]

    def lower_set_violation(self):
        desc = self.descriptor
        for w in self.elements:
            for g in desc.generators():
                v = desc.divide(w, g)
                if v is not None and v not in self.index:
                    return (w, g, v)
        return None

    @property
    def coords(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64).reshape(len(self), self.descriptor.ncoords)

    def shift_indices(self, s) -> np.ndarray:
        """Position of ``s . t`` for each window element ``t`` (``-1`` when outside)."""
        s = self.descriptor.element(s)
        return np.array([self.index.get(self.descriptor.mult(s, t), -1) for t in self.elements], dtype=np.int64)

    def predecessor(self, w):
        """``(generator position, v)`` with ``g . v = w`` and ``v`` earlier in the window."""
        desc = self.descriptor
        pos = self.index[w]
        for i, g in enumerate(desc.generators()):
            v = desc.divide(w, g)
            if v is not None and self.index.get(v, pos) < pos:
                return i, v
        raise ValueError(f"no earlier predecessor for {w}")


def parse_window_spec(spec) -> dict:
    """Accept ``{"box": [...]}``, ``{"total_degree": N}``, ``{"cap": N}`` or the
    command-line shorthands ``box:4``, ``box:3,5``, ``total_degree:6``, ``cap:30``."""
    if isinstance(spec, dict):
        if len(spec) != 1 or next(iter(spec)) not in ("box", "total_degree", "cap"):
            raise ValueError(f"bad window spec {spec!r}")
        return dict(spec)
    if isinstance(spec, str):
        kind, _, rest = spec.partition(":")
        kind = kind.strip().replace("-", "_")
        if kind not in ("box", "total_degree", "cap") or not rest:
            raise ValueError(f"bad window spec {spec!r}")
        values = [int(v) for v in rest.split(",")]
        if kind == "box":
            return {"box": values if len(values) > 1 else values[0]}
        if len(values) != 1:
            raise ValueError(f"bad window spec {spec!r}")
        return {kind: values[0]}
    raise ValueError(f"bad window spec {spec!r}")


def enumerate_window(descriptor: Descriptor, spec) -> Window:
    """Lower-set window of ``descriptor`` described by ``spec``.

    ``box`` caps each unbounded direction separately (a single integer is
    broadcast), ``cap`` is a broadcast box, ``total_degree`` bounds the sum
    of the unbounded coordinates. Finite group factors are always enumerated
    in full. Elements come out in graded-lexicographic order, taken factor
    by factor for products.
    """
    spec = parse_window_spec(spec)
    (kind, value), = spec.items()
    nslots = descriptor.nslots
    if kind == "total_degree":
        n = int(value)
        if n < 0:
            raise ValueError("caps must be non-negative")
        caps = [n] * nslots
    else:
        caps = list(value) if isinstance(value, (list, tuple)) else [int(value)] * nslots
        if len(caps) == 1 and nslots > 1:
            caps = caps * nslots
        if len(caps) != nslots:
            raise ValueError(f"window spec gives {len(caps)} caps for {nslots} unbounded directions")
        if any(c < 0 for c in caps):
            raise ValueError("caps must be non-negative")
    elems = descriptor.candidates(caps)
    if kind == "total_degree":
        elems = [e for e in elems if sum(descriptor.slot_values(e)) <= int(value)]
    elems.sort(key=descriptor.order_key)
    return Window(descriptor, tuple(elems), spec)


# -- truncated left regular representation -----------------------------------


def mult(descriptor: Descriptor, a, b) -> tuple:
    return descriptor.mult(descriptor.element(a), descriptor.element(b))


def left_regular_matrix(s, W: Window) -> np.ndarray:
    """Compression of ``lambda(s)`` to the window: ``delta_t -> delta_{st}`` or 0."""
    n = len(W)
    M = np.zeros((n, n), dtype=np.complex128)
    idx = W.shift_indices(s)
    cols = np.nonzero(idx >= 0)[0]
    M[idx[cols], cols] = 1.0
    return M


def left_regular_adjoint(s, W: Window) -> np.ndarray:
    """Compression of ``lambda(s)*``: ``delta_t -> delta_w`` if ``t = s w``, else 0."""
    desc = W.descriptor
    s = desc.element(s)
    n = len(W)
    M = np.zeros((n, n), dtype=np.complex128)
    for i, w in enumerate(W.elements):
        j = W.index.get(desc.mult(s, w))
        if j is not None:
            M[i, j] = 1.0
    return M


def interior(W: Window, s) -> np.ndarray:
    """Positions ``w`` of the window with ``s . w`` still inside it."""
    return np.nonzero(W.shift_indices(s) >= 0)[0]


def multiplication_table(W: Window) -> np.ndarray:
    """``table[i, j]`` = position of ``elements[i] . elements[j]`` in ``W``, or ``-1``.

    Every supported multiplication is coordinatewise addition (reduced mod
    the group orders), so the table is built with array arithmetic.
    """
    C = W.coords
    mod = np.array(W.descriptor.moduli(), dtype=np.int64)
    S = C[:, None, :] + C[None, :, :]
    cyc = mod > 0
    if cyc.any():
        S[..., cyc] %= mod[cyc]
    radix = np.maximum(2 * C.max(axis=0) + 1, 1)
    stride = np.concatenate(([1], np.cumprod(radix[::-1])[:-1]))[::-1]
    codes_w = C @ stride
    order = np.argsort(codes_w)
    sorted_codes = codes_w[order]
    codes = S @ stride
    pos = np.searchsorted(sorted_codes, codes)
    pos = np.minimum(pos, len(sorted_codes) - 1)
    hit = sorted_codes[pos] == codes
    return np.where(hit, order[pos], -1)


def generator_shifts(W: Window) -> list:
    """Truncated shifts ``lambda_W(g)`` for every generator ``g`` of the descriptor."""
    return [left_regular_matrix(g, W) for g in W.descriptor.generators()]
