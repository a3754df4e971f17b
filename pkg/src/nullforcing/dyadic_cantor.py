"""Exact dyadic arithmetic and finite-support clopen subsets of 2^omega.

A clopen set is stored as a bitmask over the ``2**depth`` binary addresses of
length ``depth``.  Bit ``i`` of the mask is the address whose binary string,
read most-significant-bit first, equals ``i``; so at depth 2 the bits are
``00, 01, 10, 11`` in that order.  Every ClopenSet is kept at its minimal
depth, which makes structural equality coincide with set equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, total_ordering
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DepthExhausted, PreconditionViolated, ValidationError

__all__ = [
    "Dyadic",
    "ScaleFunction",
    "ClopenSet",
    "ClopenEnumeration",
    "is_minimal_combination",
]


# ---------------------------------------------------------------------------
# Dyadic rationals
# ---------------------------------------------------------------------------


@total_ordering
@dataclass(frozen=True)
class Dyadic:
    """The exact value ``mantissa * 2**(-exponent)``."""

    mantissa: int
    exponent: int = 0

    def __post_init__(self):
        if self.exponent < 0:
            raise ValidationError("dyadic exponent must be non-negative")
        if self.mantissa == 0:
            if self.exponent != 0:
                raise ValidationError("zero must be stored as 0 * 2^0")
        elif self.exponent > 0 and self.mantissa % 2 == 0:
            raise ValidationError("dyadic mantissa must be odd when exponent > 0")

    @classmethod
    def of(cls, mantissa: int, exponent: int = 0) -> Dyadic:
        """Build a dyadic from any (mantissa, exponent) pair, normalizing it."""
        if mantissa == 0:
            return cls(0, 0)
        if exponent < 0:
            return cls(mantissa << -exponent, 0)
        tz = (mantissa & -mantissa).bit_length() - 1
        shift = min(tz, exponent)
        return cls(mantissa >> shift, exponent - shift)

    @classmethod
    def pow2(cls, k: int) -> Dyadic:
        """``2**k`` for any integer k."""
        return cls.of(1, -k)

    def _aligned(self, other: Dyadic) -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return (
            self.mantissa << (e - self.exponent),
            other.mantissa << (e - other.exponent),
            e,
        )

    def __add__(self, other: Dyadic) -> Dyadic:
        if isinstance(other, int):
            other = Dyadic(other)
        a, b, e = self._aligned(other)
        return Dyadic.of(a + b, e)

    __radd__ = __add__

    def __sub__(self, other: Dyadic) -> Dyadic:
        if isinstance(other, int):
            other = Dyadic(other)
        a, b, e = self._aligned(other)
        return Dyadic.of(a - b, e)

    def __neg__(self) -> Dyadic:
        return Dyadic(-self.mantissa, self.exponent)

    def __mul__(self, other) -> Dyadic:
        if isinstance(other, int):
            return Dyadic.of(self.mantissa * other, self.exponent)
        if isinstance(other, Dyadic):
            return Dyadic.of(self.mantissa * other.mantissa, self.exponent + other.exponent)
        return NotImplemented

    __rmul__ = __mul__

    def scale(self, k: int) -> Dyadic:
        """Multiply by ``2**k``."""
        return Dyadic.of(self.mantissa, self.exponent - k)

    def __lt__(self, other) -> bool:
        if isinstance(other, int):
            other = Dyadic(other)
        a, b, _ = self._aligned(other)
        return a < b

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.exponent == 0 and self.mantissa == other
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.mantissa, self.exponent))

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def __str__(self) -> str:
        if self.exponent == 0:
            return str(self.mantissa)
        return f"{self.mantissa}/{1 << self.exponent}"


# ---------------------------------------------------------------------------
# Scale function h
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaleFunction:
    """Finite strictly increasing ``h`` with ``2**(h(n)-h(n-1)) >= n+1``."""

    values: tuple[int, ...]
    name: str = field(default="explicit", compare=False)

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValidationError("scale function needs at least h(0)")
        if vals[0] < 0:
            raise ValidationError("h(0) must be non-negative")
        for n in range(1, len(vals)):
            if vals[n] <= vals[n - 1]:
                raise ValidationError(f"h is not strictly increasing at n={n}")
            if (1 << (vals[n] - vals[n - 1])) < n + 1:
                raise ValidationError(
                    f"2^(h({n})-h({n - 1})) = {1 << (vals[n] - vals[n - 1])} < {n + 1}"
                )

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __call__(self, n: int) -> int:
        if n < 0 or n > self.n_max:
            raise DepthExhausted(f"stage {n} is beyond the scale function (n_max={self.n_max})")
        return self.values[n]

    def measure(self, n: int) -> Dyadic:
        return Dyadic.pow2(-self(n))

    @classmethod
    def n_squared(cls, n_max: int = 1 << 16) -> ScaleFunction:
        return cls(tuple(n * n for n in range(n_max + 1)), name="n_squared")

    @classmethod
    def min_log(cls, n_max: int = 1 << 16) -> ScaleFunction:
        vals = [0]
        for n in range(1, n_max + 1):
            vals.append(vals[-1] + math.ceil(math.log2(n + 1)))
        return cls(tuple(vals), name="min_log")

    @classmethod
    def from_spec(cls, spec, n_max: int = 1 << 16) -> ScaleFunction:
        """Accept a preset name or an explicit list of values."""
        if isinstance(spec, ScaleFunction):
            return spec
        if spec == "n_squared":
            return cls.n_squared(n_max)
        if spec == "min_log":
            return cls.min_log(n_max)
        if isinstance(spec, str):
            raise ValidationError(f"unknown scale preset {spec!r}")
        return cls(tuple(spec))

    def to_spec(self):
        return self.name if self.name in ("n_squared", "min_log") else list(self.values)


# ---------------------------------------------------------------------------
# Clopen sets
# ---------------------------------------------------------------------------


def _nbytes(depth: int) -> int:
    return max(1, (1 << depth) // 8)


def _to_bits(mask: int, depth: int) -> np.ndarray:
    raw = np.frombuffer(mask.to_bytes(_nbytes(depth), "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[: 1 << depth].astype(bool)


def _from_bits(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


@lru_cache(maxsize=64)
def _even_positions(depth: int) -> int:
    # 0b...0101 over 2**depth bits
    return ((1 << (1 << depth)) - 1) // 3


def _canonicalize(depth: int, mask: int) -> tuple[int, int]:
    if depth == 0:
        return 0, mask
    even = _even_positions(depth)
    if (mask & even) != ((mask >> 1) & even):
        return depth, mask
    bits = _to_bits(mask, depth)
    while depth > 0:
        lo, hi = bits[0::2], bits[1::2]
        if not np.array_equal(lo, hi):
            break
        bits = lo
        depth -= 1
    return depth, _from_bits(bits)


@dataclass(frozen=True)
class ClopenSet:
    """A clopen subset of the Cantor space at minimal support depth."""

    depth: int
    mask: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValidationError("depth must be non-negative")
        if self.mask < 0 or self.mask.bit_length() > (1 << self.depth):
            raise ValidationError("mask does not fit the stated depth")
        if self.depth > 0:
            even = _even_positions(self.depth)
            if (self.mask & even) == ((self.mask >> 1) & even):
                raise ValidationError("clopen set is not at its minimal depth")

    # -- constructors -------------------------------------------------------

    @classmethod
    def make(cls, depth: int, mask: int) -> ClopenSet:
        """Build from an arbitrary (depth, mask), canonicalizing."""
        return cls(*_canonicalize(depth, mask))

    @classmethod
    def empty(cls) -> ClopenSet:
        return cls(0, 0)

    @classmethod
    def whole(cls) -> ClopenSet:
        return cls(0, 1)

    @classmethod
    def from_addresses(cls, depth: int, addresses: Iterable[int]) -> ClopenSet:
        mask = 0
        for a in addresses:
            if not 0 <= a < (1 << depth):
                raise ValidationError(f"address {a} out of range at depth {depth}")
            mask |= 1 << a
        return cls.make(depth, mask)

    @classmethod
    def cylinder(cls, prefix: str) -> ClopenSet:
        """The basic open set ``[prefix]`` for a binary string such as ``"01"``."""
        if prefix and set(prefix) - {"0", "1"}:
            raise ValidationError(f"not a binary string: {prefix!r}")
        return cls.make(len(prefix), 1 << (int(prefix, 2) if prefix else 0))

    @classmethod
    def from_strings(cls, strings: Sequence[str]) -> ClopenSet:
        """Union of cylinders given as binary strings."""
        out = cls.empty()
        for s in strings:
            out = out | cls.cylinder(s)
        return out

    # -- representation changes ---------------------------------------------

    def refined(self, depth: int) -> int:
        """The mask of this set at a depth >= its own."""
        if depth < self.depth:
            raise ValueError("cannot refine to a smaller depth")
        k = depth - self.depth
        if k == 0 or self.mask == 0:
            return self.mask
        if self.depth == 0:
            return (1 << (1 << depth)) - 1
        if self.mask.bit_count() <= 64:
            block = (1 << (1 << k)) - 1
            out = 0
            m = self.mask
            while m:
                low = m & -m
                a = low.bit_length() - 1
                out |= block << (a << k)
                m ^= low
            return out
        return _from_bits(np.repeat(_to_bits(self.mask, self.depth), 1 << k))

    def addresses(self, depth: int | None = None) -> list[int]:
        """Sorted addresses of this set at ``depth`` (default: its own depth)."""
        d = self.depth if depth is None else depth
        m = self.refined(d)
        if m.bit_count() > 4096:
            return np.flatnonzero(_to_bits(m, d)).tolist()
        out = []
        while m:
            low = m & -m
            out.append(low.bit_length() - 1)
            m ^= low
        return out

    def inside_addresses(self, depth: int) -> list[int]:
        """Addresses at ``depth`` whose whole cylinder lies inside this set."""
        if depth >= self.depth:
            return self.addresses(depth)
        k = self.depth - depth
        bits = _to_bits(self.mask, self.depth).reshape(-1, 1 << k).all(axis=1)
        return np.flatnonzero(bits).tolist()

    def _common(self, other: ClopenSet) -> tuple[int, int, int]:
        d = max(self.depth, other.depth)
        return d, self.refined(d), other.refined(d)

    # -- algebra ------------------------------------------------------------

    def __or__(self, other: ClopenSet) -> ClopenSet:
        d, a, b = self._common(other)
        return ClopenSet.make(d, a | b)

    def __and__(self, other: ClopenSet) -> ClopenSet:
        d, a, b = self._common(other)
        return ClopenSet.make(d, a & b)

    def __sub__(self, other: ClopenSet) -> ClopenSet:
        d, a, b = self._common(other)
        return ClopenSet.make(d, a & ~b)

    def __invert__(self) -> ClopenSet:
        full = (1 << (1 << self.depth)) - 1
        return ClopenSet.make(self.depth, full ^ self.mask)

    union = __or__
    intersect = __and__
    difference = __sub__
    complement = __invert__

    def issubset(self, other: ClopenSet) -> bool:
        if self.mask == 0:
            return True
        d, a, b = self._common(other)
        return a & ~b == 0

    __le__ = issubset

    def isdisjoint(self, other: ClopenSet) -> bool:
        d, a, b = self._common(other)
        return a & b == 0

    def is_empty(self) -> bool:
        return self.mask == 0

    def is_whole(self) -> bool:
        return self.depth == 0 and self.mask == 1

    def measure(self) -> Dyadic:
        return Dyadic.of(self.mask.bit_count(), self.depth)

    def contains_point(self, bits: str) -> bool:
        """Membership of any point extending the binary string ``bits``."""
        if len(bits) < self.depth:
            raise ValueError("need at least `depth` bits to decide membership")
        a = int(bits[: self.depth], 2) if self.depth else 0
        return bool((self.mask >> a) & 1)

    def __repr__(self) -> str:
        if self.depth <= 4:
            strs = [format(a, f"0{self.depth}b") if self.depth else "" for a in self.addresses()]
            return f"ClopenSet({{{', '.join(repr(s) for s in strs)}}})"
        return f"ClopenSet(depth={self.depth}, popcount={self.mask.bit_count()})"


def union_all(sets: Iterable[ClopenSet]) -> ClopenSet:
    """Union of many clopen sets, refined once to the deepest support."""
    sets = list(sets)
    if not sets:
        return ClopenSet.empty()
    d = max(s.depth for s in sets)
    mask = 0
    for s in sets:
        mask |= s.refined(d)
    return ClopenSet.make(d, mask)


def is_minimal_combination(combo: Sequence[int]) -> bool:
    """True unless the sorted addresses form a union of sibling pairs."""
    if len(combo) % 2:
        return True
    for i in range(0, len(combo), 2):
        if combo[i] % 2 or combo[i + 1] != combo[i] + 1:
            return True
    return False


# ---------------------------------------------------------------------------
# Canonical enumeration C^n_i
# ---------------------------------------------------------------------------


class _StageList:
    """Lazily materialized C^n_i beyond the depth-h(n) singletons."""

    def __init__(self, h: int, max_depth: int):
        self.h = h
        self.max_depth = max_depth
        self.items: list[tuple[int, tuple[int, ...]]] = []
        self.index: dict[tuple[int, tuple[int, ...]], int] = {}
        self.done_depth = h  # every depth <= done_depth fully listed
        self._gen = self._generate()

    def _generate(self) -> Iterator[tuple[int, tuple[int, ...]]]:
        d = self.h + 1
        while d <= self.max_depth:
            k = 1 << (d - self.h)
            for combo in combinations(range(1 << d), k):
                if is_minimal_combination(combo):
                    yield d, combo
            self.done_depth = d
            d += 1

    def extend_to(self, count: int) -> bool:
        while len(self.items) < count:
            nxt = next(self._gen, None)
            if nxt is None:
                return False
            self.index[nxt] = len(self.items)
            self.items.append(nxt)
        return True

    def extend_through_depth(self, depth: int, limit: int) -> None:
        while self.done_depth < depth and len(self.items) < limit:
            nxt = next(self._gen, None)
            if nxt is None:
                return
            self.index[nxt] = len(self.items)
            self.items.append(nxt)


class ClopenEnumeration:
    """The fixed list ``C^n_i`` of clopen sets of measure ``2**-h(n)``.

    Order: ascending minimal support depth, then lexicographic on the sorted
    address list.  Indices below ``2**h(n)`` are the depth-h(n) singletons and
    are resolved arithmetically; later ones are materialized on demand, up to
    ``h(n) + extra_depth`` levels and ``index_budget`` entries.
    """

    def __init__(self, h: ScaleFunction, *, extra_depth: int = 4, index_budget: int = 1 << 16):
        self.h = h
        self.extra_depth = extra_depth
        self.index_budget = index_budget
        self._stages: dict[int, _StageList] = {}

    def __repr__(self) -> str:
        return f"ClopenEnumeration(h={self.h.to_spec()!r}, budget={self.index_budget})"

    def _stage(self, n: int) -> _StageList:
        st = self._stages.get(n)
        if st is None:
            hn = self.h(n)
            st = _StageList(hn, hn + self.extra_depth)
            self._stages[n] = st
        return st

    def singleton_count(self, n: int) -> int:
        hn = self.h(n)
        return 1 if hn == 0 else 1 << hn

    def clopen(self, n: int, i: int) -> ClopenSet:
        """``C^n_i``."""
        hn = self.h(n)
        if i < 0:
            raise ValueError("clopen index must be non-negative")
        if i >= self.index_budget:
            raise DepthExhausted(f"index {i} exceeds the index budget {self.index_budget}")
        if hn == 0:
            if i == 0:
                return ClopenSet.whole()
            raise DepthExhausted("only one clopen set has measure 1")
        if i < (1 << hn):
            return ClopenSet(hn, 1 << i)
        j = i - (1 << hn)
        st = self._stage(n)
        if not st.extend_to(j + 1):
            raise DepthExhausted(
                f"C^{n}_{i} is not reached within depth {st.max_depth}"
            )
        d, combo = st.items[j]
        return ClopenSet.from_addresses(d, combo)

    def enumerate(self, n: int, count: int | None = None, max_depth: int | None = None) -> list[ClopenSet]:
        """Initial segment of ``<C^n_i : i>``, by count and/or depth cap."""
        hn = self.h(n)
        cap = hn + self.extra_depth if max_depth is None else max_depth
        if count is None:
            out = []
            i = 0
            while True:
                try:
                    c = self.clopen(n, i)
                except DepthExhausted:
                    break
                if c.depth > cap:
                    break
                out.append(c)
                i += 1
            return out
        out = []
        for i in range(count):
            c = self.clopen(n, i)
            if c.depth > cap:
                raise DepthExhausted(f"only {i} sets of stage {n} exist up to depth {cap}")
            out.append(c)
        return out

    def index_of(self, n: int, x: ClopenSet) -> int:
        """Inverse of :meth:`clopen`."""
        hn = self.h(n)
        if x.measure() != Dyadic.pow2(-hn):
            raise PreconditionViolated(f"set does not have measure 2^-{hn}")
        if hn == 0:
            return 0
        if x.depth == hn:
            return x.mask.bit_length() - 1
        st = self._stage(n)
        key = (x.depth, tuple(x.addresses()))
        if key not in st.index:
            if x.depth > st.max_depth:
                raise DepthExhausted(f"depth {x.depth} beyond the enumeration cap")
            st.extend_through_depth(x.depth, self.index_budget)
        if key not in st.index:
            raise DepthExhausted("set lies beyond the index budget")
        i = (1 << hn) + st.index[key]
        if i >= self.index_budget:
            raise DepthExhausted(f"index {i} exceeds the index budget {self.index_budget}")
        return i

    def min_index_inside(self, n: int, container: ClopenSet) -> int:
        """Least ``i`` with ``C^n_i`` a subset of ``container``."""
        hn = self.h(n)
        if container.measure() < Dyadic.pow2(-hn):
            raise PreconditionViolated(
                f"container has measure {container.measure()} < 2^-{hn}"
            )
        if hn == 0:
            return 0
        for d in range(hn, max(hn, container.depth) + 1):
            cands = container.inside_addresses(d)
            k = 1 << (d - hn)
            if len(cands) < k:
                continue
            if k == 1:
                return cands[0]
            for combo in combinations(cands, k):
                if is_minimal_combination(combo):
                    return self.index_of(n, ClopenSet.from_addresses(d, combo))
        raise AssertionError("unreachable: container holds a set of the required measure")
