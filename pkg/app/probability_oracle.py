"""Exact emission probabilities of the generator, for tiny instances.

Clause distributions are computed by exhaustive enumeration that mirrors the
generator's semantics: a shape (K, P) is drawn once, instantiations with a
repeated atom are rejected as a whole and the same shape is re-instantiated,
so acceptance is conditioned per shape. Formula probabilities follow the
top-level redraw-until-new loop:

    P(phi) = prod_k  P_k / (1 - sum_{s<k} P_s)

All arithmetic is exact (``fractions.Fraction``).
"""

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from itertools import permutations, product
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging

from scipy import stats

from app.config import get_settings
from app.errors import GenerationError, InvariantViolation, OracleIntractableError, WideningError
from app.formula import Box, Clause, Formula, Literal, Prop, canonicalize_clause, same_clause_set
from app.generator import FormulaGenerator
from app.inference import complete_prop_spec, infer_gen_params, widen_spec
from app.param_spec import GenParams, LengthSpec, PropRateSpec, ensure_valid, normalize_spec, validate_params
from app.rng import RandomStream, derive_seed

logger = logging.getLogger(__name__)


class ProbabilityMode(str, Enum):
    ORDERED = "ordered"
    AS_SET = "as_set"


@dataclass
class ClauseDistribution:
    """Exact distribution of clauses returned by one rnd_clause call."""
    entries: Dict[Clause, Fraction]
    remaining_depth: int
    nesting_depth: int
    params: GenParams = field(repr=False)

    def probability(self, clause: Clause) -> Fraction:
        return self.entries.get(clause, Fraction(0))

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class FormulaProbability:
    value: Fraction
    mode: ProbabilityMode
    zero_support: List[Clause] = field(default_factory=list)
    note: Optional[str] = None


class ProbabilityOracle:
    """Exact clause and formula probabilities for one parameter set."""

    def __init__(self, params: GenParams, guard: Optional[int] = None):
        self.params = ensure_valid(params)
        self.guard = guard or get_settings().oracle_guard
        self._C = normalize_spec(params.C)
        self._p = normalize_spec(params.p)
        self._cache: Dict[Tuple[int, int], ClauseDistribution] = {}

    def _shapes(self, remaining_d: int, nesting_depth: int) -> List[Tuple[int, int, Fraction]]:
        lengths = self._C.at_depth(nesting_depth)
        total = sum(lengths)
        shapes = []
        for K, weight in enumerate(lengths, start=1):
            if weight == 0:
                continue
            p_length = Fraction(weight, total)
            if remaining_d == 0:
                shapes.append((K, K, p_length))
                continue
            props = self._p.weights_for(nesting_depth, K)
            props_total = sum(props)
            for P, w in enumerate(props):
                if w:
                    shapes.append((K, P, p_length * Fraction(w, props_total)))
        return shapes

    def clause_distribution(self, remaining_d: int, nesting_depth: int) -> ClauseDistribution:
        """
        Enumerate the distribution of rnd_clause(remaining_d, nesting_depth).

        Args:
            remaining_d: Remaining modal depth
            nesting_depth: Nesting depth (indexes C and p)

        Returns:
            ClauseDistribution summing to exactly 1

        Raises:
            OracleIntractableError: when the ordered-tuple count exceeds the guard
        """
        key = (remaining_d, nesting_depth)
        if key in self._cache:
            return self._cache[key]

        gp = self.params
        shapes = self._shapes(remaining_d, nesting_depth)
        prop_options = [
            (Literal(Prop(i), positive), Fraction(1, 2 * gp.N))
            for i in range(1, gp.N + 1) for positive in (True, False)
        ]
        modal_options: List[Tuple[Literal, Fraction]] = []
        if remaining_d > 0 and any(P < K for K, P, _ in shapes):
            sub = self.clause_distribution(remaining_d - 1, nesting_depth + 1)
            modal_options = [
                (Literal(Box(r, body), positive), q / (2 * gp.m))
                for body, q in sub.entries.items()
                for r in range(1, gp.m + 1) for positive in (True, False)
            ]

        estimate = sum(len(prop_options) ** P * len(modal_options) ** (K - P) for K, P, _ in shapes)
        if estimate > self.guard:
            raise OracleIntractableError(
                f"intractable for exact oracle: {estimate} ordered literal tuples at "
                f"remaining depth {remaining_d} exceed the guard {self.guard}"
            )

        entries: Dict[Clause, Fraction] = defaultdict(Fraction)
        for K, P, shape_weight in shapes:
            accepted: Dict[Clause, Fraction] = defaultdict(Fraction)
            accepted_mass = Fraction(0)
            for combo in product(*([prop_options] * P + [modal_options] * (K - P))):
                atoms = {lit.atom for lit, _ in combo}
                if len(atoms) != K:
                    continue
                weight = math.prod((q for _, q in combo), start=Fraction(1))
                accepted[canonicalize_clause(lit for lit, _ in combo)] += weight
                accepted_mass += weight
            if accepted_mass == 0:
                raise GenerationError(
                    f"shape (K={K}, P={P}) at depth {nesting_depth} can never be instantiated",
                    depth=nesting_depth, length=K, props=P,
                )
            for clause, weight in accepted.items():
                entries[clause] += shape_weight * weight / accepted_mass

        distribution = ClauseDistribution(dict(entries), remaining_d, nesting_depth, gp)
        if distribution.total() != 1:
            raise InvariantViolation(f"clause distribution sums to {distribution.total()}, not 1")
        logger.debug(f"Enumerated {len(distribution)} clauses at remaining depth {remaining_d} "
                     f"from {estimate} ordered tuples")
        self._cache[key] = distribution
        return distribution

    def formula_probability(
        self,
        phi: Formula,
        mode: Union[ProbabilityMode, str] = ProbabilityMode.AS_SET,
        max_as_set_clauses: Optional[int] = None,
    ) -> FormulaProbability:
        """
        Probability that the generator returns ``phi``.

        Args:
            phi: Target formula
            mode: ORDERED (this clause order) or AS_SET (any order)
            max_as_set_clauses: Bound on L for AS_SET (settings default)

        Returns:
            FormulaProbability; zero with the offending clauses when some clause
            is outside the generator's support
        """
        mode = ProbabilityMode(mode)
        limit = max_as_set_clauses or get_settings().as_set_max_clauses
        if mode is ProbabilityMode.AS_SET and phi.num_clauses > limit:
            raise OracleIntractableError(f"as_set mode sums L! orderings; L={phi.num_clauses} exceeds {limit}")
        if phi.num_clauses != self.params.L:
            note = f"formula has {phi.num_clauses} clauses but the generator emits L={self.params.L}"
            return FormulaProbability(Fraction(0), mode, note=note)

        distribution = self.clause_distribution(self.params.d, 0)
        probs = [distribution.probability(c) for c in phi.clauses]
        zero = [c for c, q in zip(phi.clauses, probs) if q == 0]
        if zero:
            for c in zero:
                logger.warning(f"Zero-support clause: {c}")
            return FormulaProbability(Fraction(0), mode, zero, note="zero-support clause")

        if mode is ProbabilityMode.ORDERED:
            value = ordered_probability(probs)
        else:
            value = sum((ordered_probability(order) for order in permutations(probs)), Fraction(0))
        return FormulaProbability(value, mode)


def ordered_probability(clause_probs: Sequence[Fraction]) -> Fraction:
    """Probability of drawing distinct clauses in this order with redraw-until-new."""
    value = Fraction(1)
    drawn = Fraction(0)
    for q in clause_probs:
        value *= q / (1 - drawn)
        drawn += q
    return value


def enumerate_clause_distribution(
    remaining_d: int,
    nesting_depth: int,
    gp: GenParams,
    guard: Optional[int] = None,
) -> ClauseDistribution:
    return ProbabilityOracle(gp, guard).clause_distribution(remaining_d, nesting_depth)


def formula_probability(
    phi: Formula,
    gp: GenParams,
    mode: Union[ProbabilityMode, str] = ProbabilityMode.AS_SET,
    guard: Optional[int] = None,
) -> FormulaProbability:
    return ProbabilityOracle(gp, guard).formula_probability(phi, mode)


@dataclass(frozen=True)
class Widening:
    """Zero-to-nonzero substitutions in C ("C") or p ("p")."""
    target: str
    positions: Tuple[Tuple[int, ...], ...]
    fill: int = 1


@dataclass
class MonotonicityReport:
    P: Fraction
    P_widened: Fraction
    positive: bool
    monotone: bool
    params: GenParams = field(repr=False)
    widened_params: GenParams = field(repr=False)
    premise_violations: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)


def check_monotonicity(
    phi: Formula,
    widenings: Sequence[Widening] = (),
    specs: Optional[Tuple[LengthSpec, PropRateSpec]] = None,
    m: Optional[int] = None,
    N: Optional[int] = None,
    guard: Optional[int] = None,
    d: Optional[int] = None,
) -> MonotonicityReport:
    """
    Check positivity and monotonicity of phi's emission probability.

    P is computed under specs inferred from ``phi`` (or ``specs`` when given),
    P' under the widened specs; the report requires P > 0 and 0 < P' <= P.
    Both values are exact; intractable instances are refused rather than
    estimated.

    A C widening that makes a length reachable where p has no list gets a
    list built from the widening's fill; each such addition is listed in
    ``notes``.

    Args:
        phi: Target formula
        widenings: Substitutions applied to obtain C' and p'
        specs: Explicit (C, p) instead of inferring them from phi
        m: Box count override
        N: Variable count override
        guard: Enumeration guard
        d: Modal depth of the generator (default: depth of phi)

    Returns:
        MonotonicityReport

    Raises:
        WideningError: when the widened parameters are still invalid
    """
    gp = infer_gen_params(phi, m=m, N=N)
    if specs is not None:
        gp = replace(gp, C=specs[0], p=specs[1])
    if d is not None:
        gp = replace(gp, d=d)
    C, p = gp.C, gp.p
    c_fill = 0
    for w in widenings:
        if w.target == "C":
            C = widen_spec(C, w.positions, w.fill)
            c_fill = max(c_fill, w.fill)
        elif w.target == "p":
            p = widen_spec(p, w.positions, w.fill)
        else:
            raise ValueError(f"widening target must be 'C' or 'p', got {w.target!r}")

    notes = []
    if c_fill:
        p, added = complete_prop_spec(C, p, gp.d, gp.N, c_fill)
        notes = [f"added propositional-rate list {list(p.weights_for(i, j))} at depth {i}, length {j}"
                 for i, j in added]
    widened = replace(gp, C=C, p=p)
    report_widened = validate_params(widened)
    if not report_widened.ok:
        raise WideningError("widened parameters are invalid: " + "; ".join(str(e) for e in report_widened.errors))

    base = ProbabilityOracle(gp, guard).formula_probability(phi)
    wide = ProbabilityOracle(widened, guard).formula_probability(phi)

    violations = []
    for result in (base, wide):
        for clause in result.zero_support:
            violations.append(f"clause outside the generator's support: {clause}")
        if result.note and not result.zero_support:
            violations.append(result.note)

    positive = base.value > 0 and wide.value > 0
    report = MonotonicityReport(
        P=base.value, P_widened=wide.value, positive=positive,
        monotone=positive and wide.value <= base.value,
        params=gp, widened_params=widened, premise_violations=violations, notes=notes,
    )
    logger.info(f"Monotonicity check: P={report.P}, P'={report.P_widened}, monotone={report.monotone}")
    return report


@dataclass
class MonteCarloResult:
    hits: int
    samples: int
    frequency: float
    ci_low: float
    ci_high: float
    confidence: float


def clopper_pearson(hits: int, n: int, confidence: float = 0.99) -> Tuple[float, float]:
    """Exact binomial confidence interval."""
    alpha = 1 - confidence
    low = 0.0 if hits == 0 else float(stats.beta.ppf(alpha / 2, hits, n - hits + 1))
    high = 1.0 if hits == n else float(stats.beta.ppf(1 - alpha / 2, hits + 1, n - hits))
    return low, high


def monte_carlo_frequency(
    phi: Formula,
    gp: GenParams,
    samples: int,
    master_seed: int,
    confidence: float = 0.99,
) -> MonteCarloResult:
    """
    Estimate P(generator returns phi, in any clause order) by sampling.

    Args:
        phi: Target formula
        gp: Generation parameters (seed ignored)
        samples: Number of formulas, >= 1
        master_seed: Seeds are derived from (master_seed, 0, i)
        confidence: Interval confidence level

    Returns:
        MonteCarloResult with a Clopper-Pearson interval
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    generator = FormulaGenerator(gp)
    hits = sum(
        1 for i in range(samples)
        if same_clause_set(generator.generate(derive_seed(master_seed, 0, i)), phi)
    )
    low, high = clopper_pearson(hits, samples, confidence)
    return MonteCarloResult(hits, samples, hits / samples, low, high, confidence)


def sample_clause_frequencies(
    gp: GenParams,
    remaining_d: int,
    nesting_depth: int,
    samples: int,
    master_seed: int,
) -> Counter:
    """Count clauses from ``samples`` successive rnd_clause calls on one stream."""
    generator = FormulaGenerator(gp)
    rng = RandomStream(master_seed)
    return Counter(generator.rnd_clause(remaining_d, nesting_depth, rng) for _ in range(samples))
