"""Random CNF-box-m formula generator.

Clauses are built shape first: the length K and the propositional count P are
drawn once, then the shape is instantiated (P propositional literals, then
K - P modal literals, each sign before atom) until no atom repeats. Repeated
top-level clauses are redrawn from scratch, shape included.
"""

from typing import Callable, List, Optional
import logging

from app.config import get_settings
from app.errors import GenerationError
from app.formula import Atom, Box, Clause, Formula, Literal, Prop, canonicalize_clause
from app.param_spec import GenParams, LengthSpec, PropRateSpec, ensure_valid, normalize_spec
from app.rng import RandomStream, derive_seed

logger = logging.getLogger(__name__)

ShapeObserver = Callable[[int, int, int, int], None]


def rnd_length(nesting_depth: int, C: LengthSpec, rng: RandomStream) -> int:
    """Clause length drawn from C's weights at ``nesting_depth``."""
    return rng.weighted_index(C.at_depth(nesting_depth)) + 1


def rnd_propnum(remaining_d: int, nesting_depth: int, K: int, p: PropRateSpec, rng: RandomStream) -> int:
    """Propositional count for a length-K clause; all K at the deepest level."""
    if remaining_d == 0:
        return K
    weights = p.weights_for(nesting_depth, K)
    if not any(weights):
        raise GenerationError(
            f"no propositional-rate weights at depth {nesting_depth} for length {K}",
            depth=nesting_depth, length=K,
        )
    return rng.weighted_index(weights)


class FormulaGenerator:
    """Generator bound to one parameter set."""

    def __init__(
        self,
        params: GenParams,
        rejection_cap: Optional[int] = None,
        shape_observer: Optional[ShapeObserver] = None,
    ):
        """
        Initialize the generator.

        Args:
            params: Generation parameters; validated here
            rejection_cap: Max instantiation attempts per clause (settings default)
            shape_observer: Called with (nesting depth, remaining depth, K, P) per shape draw
        """
        self.params = ensure_valid(params)
        self.rejection_cap = rejection_cap or get_settings().rejection_cap
        self.shape_observer = shape_observer
        # Sampling on GCD-reduced weights keeps output identical under normalize_spec
        self._C = normalize_spec(params.C)
        self._p = normalize_spec(params.p)

    def rnd_atom(self, remaining_d: int, nesting_depth: int, rng: RandomStream) -> Atom:
        if remaining_d == 0:
            return Prop(1 + rng.uniform_below(self.params.N))
        box_index = 1 + rng.uniform_below(self.params.m)
        return Box(box_index, self.rnd_clause(remaining_d - 1, nesting_depth + 1, rng))

    def rnd_clause(self, remaining_d: int, nesting_depth: int, rng: RandomStream) -> Clause:
        """
        Draw one clause at the given remaining and nesting depth.

        Args:
            remaining_d: Box nesting still allowed below this clause
            nesting_depth: Depth of this clause in the formula (indexes C and p)
            rng: Random stream

        Returns:
            Canonical Clause

        Raises:
            GenerationError: when the shape cannot be instantiated within the cap
        """
        K = rnd_length(nesting_depth, self._C, rng)
        P = rnd_propnum(remaining_d, nesting_depth, K, self._p, rng)
        if self.shape_observer is not None:
            self.shape_observer(nesting_depth, remaining_d, K, P)

        for attempt in range(self.rejection_cap):
            literals = []
            for _ in range(P):
                positive = rng.uniform_below(2) == 0
                literals.append(Literal(self.rnd_atom(0, nesting_depth, rng), positive))
            for _ in range(K - P):
                positive = rng.uniform_below(2) == 0
                literals.append(Literal(self.rnd_atom(remaining_d, nesting_depth, rng), positive))
            atoms = [lit.atom for lit in literals]
            if len(set(atoms)) == len(atoms):
                if attempt:
                    logger.debug(f"Clause shape (K={K}, P={P}) accepted after {attempt} rejections")
                return canonicalize_clause(literals)

        raise GenerationError(
            f"rejection cap {self.rejection_cap} exceeded instantiating a clause "
            f"(depth={nesting_depth}, K={K}, P={P}); atom pool too small for distinct atoms",
            depth=nesting_depth, length=K, props=P,
        )

    def generate(self, seed: Optional[int] = None) -> Formula:
        """
        Generate L distinct clauses, in generation order.

        Args:
            seed: Overrides params.seed when given

        Returns:
            Formula carrying these params as declared_params
        """
        gp = self.params if seed is None else self.params.with_seed(seed)
        rng = RandomStream(gp.seed)
        clauses: List[Clause] = []
        seen = set()
        for k in range(gp.L):
            for _ in range(self.rejection_cap):
                candidate = self.rnd_clause(gp.d, 0, rng)
                if candidate not in seen:
                    break
            else:
                raise GenerationError(
                    f"rejection cap {self.rejection_cap} exceeded drawing top-level clause {k + 1} of {gp.L}; "
                    f"the space of distinct top-level clauses is too small",
                    depth=0,
                )
            seen.add(candidate)
            clauses.append(candidate)
        return Formula(tuple(clauses), declared_params=gp)


def generate_formula(gp: GenParams, rejection_cap: Optional[int] = None) -> Formula:
    """Generate one formula from ``gp`` (seed included)."""
    return FormulaGenerator(gp, rejection_cap=rejection_cap).generate()


def generate_batch(gp: GenParams, count: int, rejection_cap: Optional[int] = None) -> List[Formula]:
    """Generate ``count`` formulas with seeds derived from (gp.seed, 0, i)."""
    generator = FormulaGenerator(gp, rejection_cap=rejection_cap)
    formulas = [generator.generate(derive_seed(gp.seed, 0, i)) for i in range(count)]
    logger.info(f"Generated {len(formulas)} formulas (d={gp.d}, m={gp.m}, L={gp.L}, N={gp.N})")
    return formulas
