"""CNF-box-m abstract syntax.

A formula is a conjunction of clauses, a clause a disjunction of signed atoms,
an atom either a propositional variable ``A<i>`` or a box ``box<r>`` applied to
a clause. All types are frozen dataclasses; clauses always hold their literals
in canonical order, which makes clause equality plain structural equality.
"""

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Any, Dict, Iterable, Iterator, Optional, Sequence, Tuple, Union
import logging

from app.errors import EmptyFormulaError, FormulaInvariantError, RepeatedAtomError, RepeatedClauseError

logger = logging.getLogger(__name__)


class Ordering(IntEnum):
    """Result of canonical_compare."""
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class Prop:
    """Propositional atom A<index>."""
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise FormulaInvariantError(f"propositional index must be >= 1, got {self.index}")

    def __str__(self) -> str:
        return f"A{self.index}"


@dataclass(frozen=True)
class Box:
    """Modal atom: box number ``box_index`` applied to ``body``."""
    box_index: int
    body: "Clause"

    def __post_init__(self):
        if self.box_index < 1:
            raise FormulaInvariantError(f"box index must be >= 1, got {self.box_index}")

    def __str__(self) -> str:
        from app.parser import print_atom
        return print_atom(self)


Atom = Union[Prop, Box]


@dataclass(frozen=True)
class Literal:
    """A signed atom."""
    atom: Atom
    positive: bool = True

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    @property
    def is_propositional(self) -> bool:
        return isinstance(self.atom, Prop)

    def __str__(self) -> str:
        from app.parser import print_literal
        return print_literal(self)


def atom_key(atom: Atom) -> tuple:
    """Sort key realizing the canonical atom order (every Prop before every Box)."""
    if isinstance(atom, Prop):
        return (0, atom.index)
    return (1, atom.box_index, atom.body.key)


def literal_key(literal: Literal) -> tuple:
    # positive before negative
    return (atom_key(literal.atom), 0 if literal.positive else 1)


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals with pairwise distinct atoms, in canonical order."""
    literals: Tuple[Literal, ...]

    def __post_init__(self):
        if not self.literals:
            raise EmptyFormulaError("empty clause")
        atoms = [lit.atom for lit in self.literals]
        if len(set(atoms)) != len(atoms):
            raise RepeatedAtomError(f"clause repeats an atom: {_first_repeat(atoms)}")
        keys = self.key
        if any(keys[i] >= keys[i + 1] for i in range(len(keys) - 1)):
            raise FormulaInvariantError("clause literals are not in canonical order")

    @cached_property
    def key(self) -> tuple:
        return tuple(literal_key(lit) for lit in self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    @property
    def prop_count(self) -> int:
        """Number of propositional literals."""
        return sum(1 for lit in self.literals if lit.is_propositional)

    def __str__(self) -> str:
        from app.parser import print_clause
        return print_clause(self)


@dataclass(frozen=True)
class Formula:
    """Conjunction of pairwise distinct clauses, kept in generation order."""
    clauses: Tuple[Clause, ...]
    declared_params: Optional[Any] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.clauses:
            raise EmptyFormulaError("empty formula")
        if len(set(self.clauses)) != len(self.clauses):
            raise RepeatedClauseError(f"formula repeats a clause: {_first_repeat(self.clauses)}")
        declared_d = getattr(self.declared_params, "d", None)
        if declared_d is not None and depth(self) > declared_d:
            raise FormulaInvariantError(
                f"formula depth {depth(self)} exceeds declared depth {declared_d}"
            )

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def max_prop_index(self) -> int:
        return max((a.index for a in iter_atoms(self) if isinstance(a, Prop)), default=0)

    @property
    def max_box_index(self) -> int:
        return max((a.box_index for a in iter_atoms(self) if isinstance(a, Box)), default=0)

    def __str__(self) -> str:
        from app.parser import print_formula
        return print_formula(self)


def _first_repeat(items: Sequence[Any]) -> Any:
    seen = set()
    for item in items:
        if item in seen:
            return item
        seen.add(item)
    return None


def canonical_compare(a: Union[Atom, Literal, Clause], b: Union[Atom, Literal, Clause]) -> Ordering:
    """
    Compare two atoms, literals or clauses under the canonical total order.

    Atoms: Prop < Box; Props by index; Boxes by box index, then body.
    Literals: by atom, then positive < negative.
    Clauses: lexicographic over literals, a proper prefix first.

    Args:
        a: First operand
        b: Second operand, same kind as ``a``

    Returns:
        Ordering.LESS, Ordering.EQUAL or Ordering.GREATER
    """
    key_a, key_b = _key_of(a), _key_of(b)
    if key_a < key_b:
        return Ordering.LESS
    if key_a > key_b:
        return Ordering.GREATER
    return Ordering.EQUAL


def _key_of(obj: Union[Atom, Literal, Clause]) -> tuple:
    if isinstance(obj, (Prop, Box)):
        return atom_key(obj)
    if isinstance(obj, Literal):
        return literal_key(obj)
    if isinstance(obj, Clause):
        return obj.key
    raise TypeError(f"cannot compare {type(obj).__name__}")


def canonicalize_clause(raw: Iterable[Literal]) -> Clause:
    """
    Sort literals into canonical order.

    Args:
        raw: Literals with pairwise distinct atoms

    Returns:
        The canonical Clause

    Raises:
        RepeatedAtomError: if two literals share an atom
    """
    literals = list(raw)
    atoms = [lit.atom for lit in literals]
    if len(set(atoms)) != len(atoms):
        raise RepeatedAtomError(f"clause repeats an atom: {_first_repeat(atoms)}")
    return Clause(tuple(sorted(literals, key=literal_key)))


def is_canonical(literals: Sequence[Literal]) -> bool:
    keys = [literal_key(lit) for lit in literals]
    atoms = [lit.atom for lit in literals]
    return (
        bool(literals)
        and len(set(atoms)) == len(atoms)
        and all(keys[i] < keys[i + 1] for i in range(len(keys) - 1))
    )


def depth(obj: Union[Formula, Clause, Literal, Atom]) -> int:
    """Maximum box-nesting depth."""
    if isinstance(obj, Prop):
        return 0
    if isinstance(obj, Box):
        return 1 + depth(obj.body)
    if isinstance(obj, Literal):
        return depth(obj.atom)
    if isinstance(obj, Clause):
        return max(depth(lit.atom) for lit in obj.literals)
    if isinstance(obj, Formula):
        return max(depth(c) for c in obj.clauses)
    raise TypeError(f"depth undefined for {type(obj).__name__}")


def iter_atoms(obj: Union[Formula, Clause]) -> Iterator[Atom]:
    """Yield every atom occurrence, box bodies included."""
    clauses = obj.clauses if isinstance(obj, Formula) else (obj,)
    for clause in clauses:
        for lit in clause.literals:
            yield lit.atom
            if isinstance(lit.atom, Box):
                yield from iter_atoms(lit.atom.body)


ShapeTally = Dict[int, Dict[int, Dict[int, int]]]


def count_shapes(f: Formula) -> ShapeTally:
    """
    Tally clauses by nesting depth, length and propositional-literal count.

    Top clauses sit at nesting depth 0, a box body one deeper than the clause
    containing the box.

    Args:
        f: Canonical formula

    Returns:
        ``{depth: {length: {prop_count: occurrences}}}``
    """
    tallies: Dict[int, Dict[int, Counter]] = defaultdict(lambda: defaultdict(Counter))

    def visit(clause: Clause, nesting: int) -> None:
        tallies[nesting][len(clause)][clause.prop_count] += 1
        for lit in clause.literals:
            if isinstance(lit.atom, Box):
                visit(lit.atom.body, nesting + 1)

    for clause in f.clauses:
        visit(clause, 0)

    return {
        i: {j: dict(sorted(by_r.items())) for j, by_r in sorted(by_len.items())}
        for i, by_len in sorted(tallies.items())
    }


def same_clause_set(a: Formula, b: Formula) -> bool:
    """Formula equality ignoring top-level clause order."""
    return len(a.clauses) == len(b.clauses) and frozenset(a.clauses) == frozenset(b.clauses)


# Convenience constructors used by tests and the decider.

def pos(atom: Atom) -> Literal:
    return Literal(atom, True)


def neg(atom: Atom) -> Literal:
    return Literal(atom, False)


def clause(*literals: Literal) -> Clause:
    return canonicalize_clause(literals)


def box(box_index: int, *literals: Literal) -> Box:
    return Box(box_index, canonicalize_clause(literals))
