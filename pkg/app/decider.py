"""Satisfiability and triviality of CNF-box-m formulas in K(m).

The decision procedure enumerates propositional models of the formula's
abstraction (one surrogate variable per distinct outermost atom) with DPLL
and, per model, checks one successor world per true negated box:

    for each r and each "not box_r C_i" in the model,
        { C_j : "box_r C_j" in the model } plus { not l : l in C_i }
    must be satisfiable.

A separate bounded tree-model search evaluates formulas semantically and
serves as an independent oracle on tiny instances.
"""

import time
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, Union
import logging

from app.config import get_settings
from app.errors import BoundedOracleGuardError, DecisionTimeout
from app.formula import Atom, Box, Clause, Formula, Literal, Prop, depth

logger = logging.getLogger(__name__)

IntClause = List[int]
Assignment = Dict[int, bool]


class Status(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    TIMEOUT = "timeout"


@dataclass
class DecisionStats:
    branches: int = 0
    successor_checks: int = 0


@dataclass
class DecisionOutcome:
    """Result of one k_satisfiable call."""
    status: Status
    trivially_sat: bool
    trivially_unsat: bool
    elapsed: float
    stats: DecisionStats = field(default_factory=DecisionStats)

    def to_line(self) -> str:
        return (
            f"{self.status.value} trivially_sat={str(self.trivially_sat).lower()} "
            f"trivially_unsat={str(self.trivially_unsat).lower()} "
            f"elapsed_ms={self.elapsed * 1000:.3f}"
        )


class _Deadline:
    def __init__(self, deadline: Optional[float]):
        self.deadline = deadline

    def check(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise DecisionTimeout()


# ---------------------------------------------------------------------------
# Propositional layer
# ---------------------------------------------------------------------------

class AbstractionMap:
    """Bijection between distinct outermost atoms and surrogate variables 1..n."""

    def __init__(self, clauses: Sequence[Clause]):
        self.var_of: Dict[Atom, int] = {}
        self.atom_of: Dict[int, Atom] = {}
        for c in clauses:
            for lit in c.literals:
                if lit.atom not in self.var_of:
                    var = len(self.var_of) + 1
                    self.var_of[lit.atom] = var
                    self.atom_of[var] = lit.atom
        self.clauses: List[IntClause] = [
            [self.encode(lit) for lit in c.literals] for c in clauses
        ]

    def encode(self, literal: Literal) -> int:
        var = self.var_of[literal.atom]
        return var if literal.positive else -var

    @property
    def num_vars(self) -> int:
        return len(self.var_of)


def _assign(clauses: List[IntClause], lit: int) -> Optional[List[IntClause]]:
    """Simplify by making ``lit`` true; None on an empty clause."""
    result = []
    for c in clauses:
        if lit in c:
            continue
        if -lit in c:
            reduced = [x for x in c if x != -lit]
            if not reduced:
                return None
            result.append(reduced)
        else:
            result.append(c)
    return result


def iter_models(
    clauses: List[IntClause],
    deadline: Optional[float] = None,
    stats: Optional[DecisionStats] = None,
) -> Iterator[Assignment]:
    """
    Yield satisfying partial assignments from disjoint DPLL branches.

    Every total assignment extending a yielded one satisfies the clauses, and
    no total assignment extends two yielded ones.
    """
    timer = _Deadline(deadline)
    stats = stats or DecisionStats()

    def search(current: List[IntClause], assignment: Assignment) -> Iterator[Assignment]:
        timer.check()
        stats.branches += 1
        assignment = dict(assignment)
        # unit propagation
        while True:
            unit = next((c[0] for c in current if len(c) == 1), None)
            if unit is None:
                break
            assignment[abs(unit)] = unit > 0
            current = _assign(current, unit)
            if current is None:
                return
        if not current:
            yield assignment
            return
        var = abs(current[0][0])
        for lit in (var, -var):
            reduced = _assign(current, lit)
            if reduced is not None:
                yield from search(reduced, {**assignment, var: lit > 0})

    yield from search([list(c) for c in clauses], {})


def dpll_sat(
    clauses: List[IntClause],
    num_vars: Optional[int] = None,
    on_model: Optional[Callable[[Assignment], bool]] = None,
    deadline: Optional[float] = None,
) -> bool:
    """
    Propositional satisfiability with optional model enumeration.

    Args:
        clauses: Clauses as lists of non-zero ints (DIMACS style)
        num_vars: Variables 1..num_vars to complete assignments over
        on_model: Called with each total satisfying assignment, each at most
            once; returning True stops the enumeration
        deadline: time.monotonic() value after which DecisionTimeout is raised

    Returns:
        True iff the clauses are satisfiable
    """
    if num_vars is None:
        num_vars = max((abs(x) for c in clauses for x in c), default=0)
    found = False
    for partial in iter_models(clauses, deadline):
        found = True
        if on_model is None:
            return True
        free = [v for v in range(1, num_vars + 1) if v not in partial]
        for values in product((True, False), repeat=len(free)):
            if on_model({**partial, **dict(zip(free, values))}):
                return True
    return found


# ---------------------------------------------------------------------------
# Triviality
# ---------------------------------------------------------------------------

def _clauses_of(phi: Union[Formula, Sequence[Clause]]) -> Sequence[Clause]:
    return phi.clauses if isinstance(phi, Formula) else phi


def is_trivially_unsatisfiable(phi: Union[Formula, Sequence[Clause]], deadline: Optional[float] = None) -> bool:
    """True iff the propositional abstraction has no model."""
    abstraction = AbstractionMap(_clauses_of(phi))
    return not dpll_sat(abstraction.clauses, deadline=deadline)


def is_trivially_satisfiable(phi: Union[Formula, Sequence[Clause]], deadline: Optional[float] = None) -> bool:
    """True iff phi holds in a world with no successors (every box atom true)."""
    reduced: List[Clause] = []
    for c in _clauses_of(phi):
        if any(isinstance(lit.atom, Box) and lit.positive for lit in c.literals):
            continue
        remaining = tuple(lit for lit in c.literals if isinstance(lit.atom, Prop))
        if not remaining:
            return False
        reduced.append(Clause(remaining))
    abstraction = AbstractionMap(reduced)
    return dpll_sat(abstraction.clauses, deadline=deadline)


# ---------------------------------------------------------------------------
# K(m) decision
# ---------------------------------------------------------------------------

class KDecider:
    """Recursive K(m) satisfiability by model enumeration plus successor checks."""

    def __init__(self, deadline: Optional[float] = None):
        self.deadline = deadline
        self.stats = DecisionStats()

    def satisfiable(self, clauses: Sequence[Clause]) -> bool:
        abstraction = AbstractionMap(clauses)
        for model in iter_models(abstraction.clauses, self.deadline, self.stats):
            if self._successors_ok(abstraction, model):
                return True
        return False

    def _successors_ok(self, abstraction: AbstractionMap, model: Assignment) -> bool:
        # Unassigned surrogates are left unconstrained: neither box nor its negation is required.
        required: Dict[int, List[Clause]] = {}
        witnesses: Dict[int, List[Clause]] = {}
        for var, value in model.items():
            atom = abstraction.atom_of[var]
            if isinstance(atom, Box):
                target = required if value else witnesses
                target.setdefault(atom.box_index, []).append(atom.body)

        for r, negated in witnesses.items():
            for body in negated:
                _Deadline(self.deadline).check()
                self.stats.successor_checks += 1
                successor = list(required.get(r, []))
                successor.extend(Clause((lit.negated(),)) for lit in body.literals)
                if not self.satisfiable(_dedupe(successor)):
                    return False
        return True


def _dedupe(clauses: List[Clause]) -> List[Clause]:
    return list(dict.fromkeys(clauses))


def k_satisfiable(phi: Formula, timeout: Optional[float] = None) -> DecisionOutcome:
    """
    Decide K(m) satisfiability of ``phi`` within ``timeout`` seconds.

    Triviality flags are computed first, so a timeout in the main search
    still reports them.

    Args:
        phi: Canonical formula
        timeout: Seconds; settings default when None

    Returns:
        DecisionOutcome
    """
    if timeout is None:
        timeout = get_settings().default_timeout_seconds
    start = time.monotonic()
    deadline = start + timeout
    decider = KDecider(deadline)
    trivially_unsat = trivially_sat = False
    try:
        trivially_unsat = is_trivially_unsatisfiable(phi, deadline)
        trivially_sat = not trivially_unsat and is_trivially_satisfiable(phi, deadline)
        if trivially_unsat:
            status = Status.UNSAT
        elif trivially_sat:
            status = Status.SAT
        else:
            status = Status.SAT if decider.satisfiable(phi.clauses) else Status.UNSAT
    except DecisionTimeout:
        status = Status.TIMEOUT
    elapsed = time.monotonic() - start
    logger.debug(f"Decided formula with {phi.num_clauses} clauses: {status.value} in {elapsed:.4f}s")
    return DecisionOutcome(status, trivially_sat, trivially_unsat, elapsed, decider.stats)


# ---------------------------------------------------------------------------
# Bounded tree-model oracle
# ---------------------------------------------------------------------------

def _clause_true(c: Clause, props: FrozenSet[int], box_values: Dict[Box, bool]) -> bool:
    for lit in c.literals:
        if isinstance(lit.atom, Prop):
            value = lit.atom.index in props
        else:
            value = box_values[lit.atom]
        if value == lit.positive:
            return True
    return False


class BoundedModelOracle:
    """
    Exhaustive search over tree Kripke models of bounded depth and branching.

    A world is summarized by which of the clauses under evaluation it makes
    true. Worlds are built bottom-up: for each valuation of A1..AN and, per
    box index r, each set of at most B_r successor summaries, where B_r is the
    number of distinct box_r atoms among the clauses (one witness per false
    box suffices).
    """

    def __init__(self, num_vars: int, deadline: Optional[float] = None):
        self.num_vars = num_vars
        self.timer = _Deadline(deadline)
        self.valuations = [
            frozenset(i for i, on in enumerate(bits, start=1) if on)
            for bits in product((False, True), repeat=num_vars)
        ]

    def world_summaries(self, clauses: Tuple[Clause, ...], remaining: int) -> Set[Tuple[bool, ...]]:
        """Achievable truth vectors of ``clauses`` at a root of depth <= remaining."""
        boxes = list(dict.fromkeys(
            lit.atom for c in clauses for lit in c.literals if isinstance(lit.atom, Box)
        ))
        bodies = tuple(dict.fromkeys(b.body for b in boxes))
        indices = sorted({b.box_index for b in boxes})

        successor_options: List[List[FrozenSet[Tuple[bool, ...]]]] = []
        if boxes and remaining > 0:
            below = sorted(self.world_summaries(bodies, remaining - 1))
            for r in indices:
                bound = sum(1 for b in boxes if b.box_index == r)
                options = [frozenset(s) for k in range(bound + 1) for s in combinations(below, k)]
                successor_options.append(options)
        else:
            successor_options = [[frozenset()] for _ in indices]

        body_pos = {body: k for k, body in enumerate(bodies)}
        summaries = set()
        for props in self.valuations:
            for choice in product(*successor_options):
                self.timer.check()
                successors = dict(zip(indices, choice))
                box_values = {
                    b: all(s[body_pos[b.body]] for s in successors[b.box_index]) for b in boxes
                }
                summaries.add(tuple(_clause_true(c, props, box_values) for c in clauses))
        return summaries

    def satisfiable(self, phi: Formula) -> bool:
        target = tuple(True for _ in phi.clauses)
        return target in self.world_summaries(phi.clauses, depth(phi))


def bounded_model_oracle(
    phi: Formula,
    timeout: Optional[float] = None,
    max_vars: Optional[int] = None,
    max_depth: Optional[int] = None,
) -> bool:
    """
    Semantic satisfiability by bounded tree-model search (tiny formulas only).

    Raises:
        BoundedOracleGuardError: N or d above the guard
        DecisionTimeout: deadline passed
    """
    settings = get_settings()
    max_vars = max_vars or settings.bounded_oracle_max_vars
    max_depth = max_depth or settings.bounded_oracle_max_depth
    n, d = phi.max_prop_index, depth(phi)
    if n > max_vars or d > max_depth:
        raise BoundedOracleGuardError(f"bounded-model oracle needs N <= {max_vars} and d <= {max_depth}; got N={n}, d={d}")
    deadline = None if timeout is None else time.monotonic() + timeout
    return BoundedModelOracle(n, deadline).satisfiable(phi)
