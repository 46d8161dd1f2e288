"""Finite variable spaces and exact rational gambles.

Everything downstream (cones, networks, solvers) works with the two value
types defined here: a ``Space`` describing a finite product domain over a
set of named variables, and a ``Gamble`` mapping each configuration of a
space to an exact rational payoff.  All scalars are ``fractions.Fraction``;
no floating point enters anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]


class ScopeError(ValueError):
    """A gamble or configuration was used outside a compatible scope."""


def as_rational(value: RationalLike) -> Fraction:
    """Coerce an int, string ("p/q" or "n"), or Fraction to an exact Fraction.

    Floats are rejected: accepting them would silently contaminate exact
    computations with binary rounding.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"not a rational: {value!r} (floats are not accepted)")


def format_rational(value: Fraction) -> str:
    """Canonical string form: "p/q" in lowest terms, or "n" for integers."""
    return str(value)


@dataclass(frozen=True)
class VariableSpace:
    """A named variable together with its ordered, finite set of values."""

    node: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError(f"variable {self.node!r} has no values")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"variable {self.node!r} has duplicate values")

    def __len__(self) -> int:
        return len(self.values)

    def index_of(self, value: str) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise KeyError(f"{value!r} is not a value of variable {self.node!r}") from None


class Space:
    """A product domain over a set of variables, in canonical node order.

    Nodes are kept sorted by id, and configurations are enumerated
    lexicographically with the first (smallest) node varying slowest.  This
    fixed order is what makes table indices, generator lists and reports
    reproducible across runs.

    The empty space is legal and has exactly one (empty) configuration, so
    gambles on it are single rationals.
    """

    __slots__ = ("_variables", "_nodes", "_by_node", "_strides", "size", "_hash")

    def __init__(self, variables: Iterable[VariableSpace] = ()):
        ordered = tuple(sorted(variables, key=lambda v: v.node))
        nodes = tuple(v.node for v in ordered)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node in space")
        self._variables = ordered
        self._nodes = nodes
        self._by_node = {v.node: v for v in ordered}
        strides = [1] * len(ordered)
        for i in range(len(ordered) - 2, -1, -1):
            strides[i] = strides[i + 1] * len(ordered[i + 1])
        self._strides = tuple(strides)
        self.size = strides[0] * len(ordered[0]) if ordered else 1
        self._hash = hash(ordered)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def variables(self) -> tuple[VariableSpace, ...]:
        return self._variables

    def variable(self, node: str) -> VariableSpace:
        try:
            return self._by_node[node]
        except KeyError:
            raise ScopeError(f"node {node!r} is not in scope {self._nodes}") from None

    def __contains__(self, node: str) -> bool:
        return node in self._by_node

    def __len__(self) -> int:
        return len(self._variables)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Space):
            return NotImplemented
        return self._variables == other._variables

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{v.node}:{len(v)}" for v in self._variables)
        return f"Space({inner})"

    def contains_space(self, other: "Space") -> bool:
        """True if every variable of `other` appears here with equal values."""
        return all(self._by_node.get(v.node) == v for v in other._variables)

    def restrict(self, nodes: Iterable[str]) -> "Space":
        return Space(self.variable(n) for n in set(nodes))

    def drop(self, nodes: Iterable[str]) -> "Space":
        dropped = set(nodes)
        return Space(v for v in self._variables if v.node not in dropped)

    def union(self, other: "Space") -> "Space":
        merged = dict(self._by_node)
        for v in other._variables:
            mine = merged.get(v.node)
            if mine is None:
                merged[v.node] = v
            elif mine != v:
                raise ScopeError(f"conflicting definitions for node {v.node!r}")
        return Space(merged.values())

    def value_indices_at(self, index: int) -> tuple[int, ...]:
        """Decode a table index into one value index per node."""
        if not 0 <= index < self.size:
            raise IndexError(index)
        out = []
        for var, stride in zip(self._variables, self._strides):
            digit, index = divmod(index, stride)
            out.append(digit)
        return tuple(out)

    def config_at(self, index: int) -> "Configuration":
        digits = self.value_indices_at(index)
        return Configuration(self, tuple(v.values[d] for v, d in zip(self._variables, digits)))

    def index_of(self, config: "Configuration") -> int:
        if config.space != self:
            raise ScopeError("configuration belongs to a different space")
        total = 0
        for var, stride, value in zip(self._variables, self._strides, config.values):
            total += var.index_of(value) * stride
        return total

    def configurations(self) -> Iterator["Configuration"]:
        for i in range(self.size):
            yield self.config_at(i)

    def configuration(self, assignment: Mapping[str, str]) -> "Configuration":
        """Build a configuration of this space from a node->value mapping."""
        extra = set(assignment) - set(self._nodes)
        if extra:
            raise ScopeError(f"assignment mentions unknown nodes {sorted(extra)}")
        missing = set(self._nodes) - set(assignment)
        if missing:
            raise ScopeError(f"assignment is missing nodes {sorted(missing)}")
        values = []
        for var in self._variables:
            value = assignment[var.node]
            var.index_of(value)
            values.append(value)
        return Configuration(self, tuple(values))

    def empty_configuration(self) -> "Configuration":
        if self._variables:
            raise ScopeError("space is not empty")
        return Configuration(self, ())


EMPTY_SPACE = Space(())


@dataclass(frozen=True)
class Configuration:
    """An assignment of one value to every node of a space."""

    space: Space
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != len(self.space):
            raise ValueError("configuration length does not match its space")
        for var, value in zip(self.space.variables, self.values):
            var.index_of(value)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.space.nodes

    def value_of(self, node: str) -> str:
        return self.values[self.space.nodes.index(node)]

    def as_dict(self) -> dict[str, str]:
        return dict(zip(self.space.nodes, self.values))

    def restrict(self, nodes: Iterable[str]) -> "Configuration":
        sub = self.space.restrict(nodes)
        mapping = self.as_dict()
        return Configuration(sub, tuple(mapping[n] for n in sub.nodes))

    def agrees_with(self, other: "Configuration") -> bool:
        """True if the two configurations assign equal values to shared nodes."""
        mine = self.as_dict()
        return all(mine.get(n, v) == v for n, v in zip(other.nodes, other.values))

    def combine(self, other: "Configuration") -> "Configuration":
        """Merge two agreeing configurations into one on the union space."""
        if not self.agrees_with(other):
            raise ScopeError("configurations disagree on shared nodes")
        merged = self.as_dict()
        merged.update(other.as_dict())
        return self.space.union(other.space).configuration(merged)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}={v}" for n, v in zip(self.nodes, self.values))
        return f"({inner})" if inner else "(empty)"


class Sign(Enum):
    """Classification of a gamble against the zero gamble."""

    POSITIVE = "strictly-positive"  # f >= 0 and f != 0
    NONPOSITIVE = "nonpositive"     # f <= 0 and f != 0
    ZERO = "zero"
    MIXED = "mixed"


@dataclass(frozen=True)
class Gamble:
    """An exact rational payoff for every configuration of a space.

    The table is dense, in the space's lexicographic configuration order.
    A gamble on the empty space is a single rational.
    """

    space: Space
    table: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        table = tuple(as_rational(x) for x in self.table)
        if len(table) != self.space.size:
            raise ValueError(
                f"table has {len(table)} entries, space has {self.space.size} configurations"
            )
        object.__setattr__(self, "table", table)

    @classmethod
    def constant(cls, space: Space, value: RationalLike) -> "Gamble":
        return cls(space, (as_rational(value),) * space.size)

    @classmethod
    def zero(cls, space: Space) -> "Gamble":
        return cls.constant(space, 0)

    def __call__(self, config: Configuration) -> Fraction:
        """Evaluate at a configuration whose scope covers this gamble's scope."""
        if config.space == self.space:
            return self.table[self.space.index_of(config)]
        if not config.space.contains_space(self.space):
            raise ScopeError("configuration does not cover the gamble's scope")
        return self.table[self.space.index_of(config.restrict(self.space.nodes))]

    def extend(self, target: Space) -> "Gamble":
        """Cylindrical extension: the same payoff, read on a larger scope."""
        if target == self.space:
            return self
        if not target.contains_space(self.space):
            raise ScopeError(
                f"cannot extend gamble on {self.space} to non-containing scope {target}"
            )
        positions = [target.nodes.index(n) for n in self.space.nodes]
        table = []
        for i in range(target.size):
            digits = target.value_indices_at(i)
            src = 0
            for pos, stride in zip(positions, self.space._strides):
                src += digits[pos] * stride
            table.append(self.table[src])
        return Gamble(target, tuple(table))

    def _pair(self, other: "Gamble") -> tuple["Gamble", "Gamble"]:
        if self.space == other.space:
            return self, other
        union = self.space.union(other.space)
        return self.extend(union), other.extend(union)

    def __add__(self, other: "Gamble") -> "Gamble":
        a, b = self._pair(other)
        return Gamble(a.space, tuple(x + y for x, y in zip(a.table, b.table)))

    def __sub__(self, other: "Gamble") -> "Gamble":
        a, b = self._pair(other)
        return Gamble(a.space, tuple(x - y for x, y in zip(a.table, b.table)))

    def __neg__(self) -> "Gamble":
        return Gamble(self.space, tuple(-x for x in self.table))

    def __mul__(self, other: Union["Gamble", RationalLike]) -> "Gamble":
        if isinstance(other, Gamble):
            a, b = self._pair(other)
            return Gamble(a.space, tuple(x * y for x, y in zip(a.table, b.table)))
        lam = as_rational(other)
        return Gamble(self.space, tuple(lam * x for x in self.table))

    def __rmul__(self, other: RationalLike) -> "Gamble":
        return self.__mul__(other)

    def scale(self, lam: RationalLike) -> "Gamble":
        """Positive scaling; the factor must be strictly positive."""
        lam = as_rational(lam)
        if lam <= 0:
            raise ValueError(f"scaling factor must be strictly positive, got {lam}")
        return self * lam

    def sign(self) -> Sign:
        has_pos = any(x > 0 for x in self.table)
        has_neg = any(x < 0 for x in self.table)
        if has_pos and has_neg:
            return Sign.MIXED
        if has_pos:
            return Sign.POSITIVE
        if has_neg:
            return Sign.NONPOSITIVE
        return Sign.ZERO

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for x in self.table)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.table) if x != 0)

    def as_scalar(self) -> Fraction:
        """The value of an empty-scope gamble (identified with a rational)."""
        if len(self.space) != 0:
            raise ScopeError("gamble has non-empty scope")
        return self.table[0]

    def __repr__(self) -> str:
        return f"Gamble({self.space!r}, ({', '.join(map(str, self.table))}))"


def cylindrical_extend(f: Gamble, target: Space) -> Gamble:
    """Extend a gamble to a containing scope without changing its payoff."""
    return f.extend(target)


def indicator(config: Configuration, target: Space) -> Gamble:
    """The gamble worth 1 on target configurations agreeing with `config`.

    The indicator of the empty configuration is the constant 1: conditioning
    on nothing changes nothing.
    """
    if not target.contains_space(config.space):
        raise ScopeError("indicator scope does not contain the configuration's scope")
    one, nil = Fraction(1), Fraction(0)
    positions = [target.nodes.index(n) for n in config.space.nodes]
    wanted = tuple(
        var.index_of(value) for var, value in zip(config.space.variables, config.values)
    )
    table = []
    for i in range(target.size):
        digits = target.value_indices_at(i)
        table.append(one if all(digits[p] == w for p, w in zip(positions, wanted)) else nil)
    return Gamble(target, tuple(table))


def add(f: Gamble, g: Gamble) -> Gamble:
    return f + g


def negate(f: Gamble) -> Gamble:
    return -f


def scale(lam: RationalLike, f: Gamble) -> Gamble:
    return f.scale(lam)


def compare_sign(f: Gamble) -> Sign:
    return f.sign()
