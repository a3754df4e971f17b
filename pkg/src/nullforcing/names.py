"""Decidable forcing names.

Only two kinds of names are needed to execute every construction: check
names of ground functions (always decided) and the slalom-rank name of a
coordinate ``a``, whose value at ``n`` is ``r(n)`` for the avoiding trace of
the coordinate's slalom once that slalom has length ``> n``.  New kinds can
be added by subclassing :class:`Name`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Hashable, Mapping, Protocol

from .errors import ValidationError
from .slaloms import r_values

if TYPE_CHECKING:
    from .dyadic_cantor import ClopenEnumeration
    from .ranked_poset import RankedPoset

__all__ = ["GroundFunction", "Name", "CheckName", "RSlalomName", "decide", "name_from_json"]


@dataclass(frozen=True)
class GroundFunction:
    """A function omega -> omega given by a finite table and a constant tail."""

    prefix: tuple[int, ...] = ()
    tail: int = 0
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        pre = tuple(int(v) for v in self.prefix)
        if any(v < 0 for v in pre) or self.tail < 0:
            raise ValidationError("ground functions take non-negative values")
        while pre and pre[-1] == self.tail:
            pre = pre[:-1]
        object.__setattr__(self, "prefix", pre)

    @classmethod
    def constant(cls, value: int, label: str | None = None) -> GroundFunction:
        return cls((), value, label)

    def __call__(self, n: int) -> int:
        return self.prefix[n] if n < len(self.prefix) else self.tail

    def sort_key(self) -> tuple:
        return (self.prefix, self.tail)

    def to_json(self) -> dict:
        return {"prefix": list(self.prefix), "tail": self.tail}

    def __repr__(self) -> str:
        if self.label:
            return self.label
        if not self.prefix:
            return f"g≡{self.tail}"
        return f"g{list(self.prefix)}+{self.tail}"


class _HasEntries(Protocol):
    def get(self, x: Hashable): ...


class Name:
    """Base class for decidable names of functions in omega^omega."""

    def support(self, poset: RankedPoset) -> frozenset:
        raise NotImplementedError

    def decide(self, cond: _HasEntries, n: int, enum: ClopenEnumeration) -> int | None:
        raise NotImplementedError

    def sort_key(self) -> tuple:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def __lt__(self, other: Name) -> bool:
        return self.sort_key() < other.sort_key()


@dataclass(frozen=True, eq=True)
class CheckName(Name):
    g: GroundFunction

    def support(self, poset) -> frozenset:
        return frozenset()

    def decide(self, cond, n, enum) -> int:
        return self.g(n)

    def sort_key(self) -> tuple:
        return (0, self.g.sort_key())

    def to_json(self) -> dict:
        return {"kind": "check", **self.g.to_json()}

    def __repr__(self) -> str:
        return f"check({self.g!r})"


@dataclass(frozen=True, eq=True)
class RSlalomName(Name):
    a: Hashable

    def support(self, poset) -> frozenset:
        return frozenset({self.a}) | poset.q_below(self.a)

    def decide(self, cond, n, enum) -> int | None:
        entry = cond.get(self.a)
        if entry is None or len(entry.s) < n + 1:
            return None
        # r(n) only depends on s(0..n); reuse the trace of the whole slalom
        return r_values(entry.s, enum)[n]

    def sort_key(self) -> tuple:
        return (1, str(self.a))

    def to_json(self) -> dict:
        return {"kind": "r", "of": self.a}

    def __repr__(self) -> str:
        return f"r_{self.a}"


def decide(name: Name, cond, n: int, enum: ClopenEnumeration) -> int | None:
    """The value a condition assigns to ``name(n)``, or None if undecided."""
    return name.decide(cond, n, enum)


def name_from_json(obj, ground: Mapping[str, GroundFunction] | None = None) -> Name:
    """Parse a name record; a bare string refers to a named ground function."""
    if isinstance(obj, str):
        if ground is None or obj not in ground:
            raise ValidationError(f"unknown ground function {obj!r}")
        return CheckName(ground[obj])
    kind = obj.get("kind")
    if kind == "check":
        if "ref" in obj:
            return name_from_json(obj["ref"], ground)
        return CheckName(GroundFunction(tuple(obj.get("prefix", ())), int(obj.get("tail", 0))))
    if kind == "r":
        return RSlalomName(obj["of"])
    raise ValidationError(f"unknown name kind {kind!r}")
