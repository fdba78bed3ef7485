"""Build C and p from a target formula so random output resembles it."""

from typing import Iterable, List, Optional, Tuple, Union
import logging

from app.errors import WideningError
from app.formula import Formula, count_shapes, depth
from app.param_spec import GenParams, LengthSpec, Method, PropRateSpec

logger = logging.getLogger(__name__)

Coordinate = Tuple[int, ...]


def infer_params(phi: Formula) -> Tuple[LengthSpec, PropRateSpec]:
    """
    Count clause shapes of ``phi`` into C and p.

    C gets one entry per depth 0..d holding the count of each clause length;
    p gets one entry per depth 0..d-1 holding, per length, the count of each
    propositional-literal number (empty when the length does not occur).

    Args:
        phi: Canonical formula

    Returns:
        (LengthSpec, PropRateSpec), unnormalized
    """
    shapes = count_shapes(phi)
    d = depth(phi)

    lengths = []
    for i in range(d + 1):
        by_length = shapes.get(i, {})
        max_len = max(by_length, default=0)
        lengths.append(tuple(sum(by_length.get(j, {}).values()) for j in range(1, max_len + 1)))

    props = []
    for i in range(d):
        by_length = shapes.get(i, {})
        entry = []
        for j in range(1, len(lengths[i]) + 1):
            if lengths[i][j - 1] == 0:
                entry.append(())
            else:
                entry.append(tuple(by_length[j].get(r, 0) for r in range(j + 1)))
        props.append(tuple(entry))

    return LengthSpec(tuple(lengths)), PropRateSpec(tuple(props))


def infer_gen_params(
    phi: Formula,
    m: Optional[int] = None,
    N: Optional[int] = None,
    seed: int = 0,
) -> GenParams:
    """
    Complete GenParams able to emit ``phi``.

    N and m default to the largest propositional and box index used; overrides
    may only raise them.
    """
    used_n, used_m = phi.max_prop_index, max(phi.max_box_index, 1)
    if N is not None and N < used_n:
        raise ValueError(f"N={N} is below the largest propositional index {used_n}")
    if m is not None and m < used_m:
        raise ValueError(f"m={m} is below the largest box index {used_m}")
    C, p = infer_params(phi)
    return GenParams(
        d=depth(phi), m=m or used_m, L=phi.num_clauses, N=N or used_n,
        C=C, p=p, method=Method.NEW, seed=seed,
    )


def widen_spec(
    spec: Union[LengthSpec, PropRateSpec],
    positions: Iterable[Coordinate],
    fill: int = 1,
) -> Union[LengthSpec, PropRateSpec]:
    """
    Replace named zero weights with ``fill``.

    Coordinates are (depth, length) for C and (depth, length, r) for p, with
    1-based lengths. Only existing zeros may be replaced; empty lists cannot
    be extended.

    Args:
        spec: LengthSpec or PropRateSpec
        positions: Coordinates to widen
        fill: Positive replacement weight

    Returns:
        New spec of the same kind
    """
    if fill < 1:
        raise WideningError(f"fill must be positive, got {fill}")
    is_length = isinstance(spec, LengthSpec)
    arity = 2 if is_length else 3
    # nested lists for in-place edits
    tree = [list(w) for w in spec.per_depth] if is_length else [[list(w) for w in e] for e in spec.per_depth]

    for coord in positions:
        coord = tuple(coord)
        if len(coord) != arity:
            raise WideningError(f"coordinate {coord} needs {arity} components")
        try:
            if is_length:
                i, j = coord
                weights = tree[i]
                index = j - 1
            else:
                i, j, r = coord
                weights = tree[i][j - 1]
                index = r
            if min(coord) < 0 or index < 0 or j < 1:
                raise IndexError
            if not weights:
                raise WideningError(f"coordinate {coord} names an empty list, which cannot be extended")
            current = weights[index]
        except IndexError:
            raise WideningError(f"coordinate {coord} is out of range") from None
        if current != 0:
            raise WideningError(f"coordinate {coord} holds {current}, only zeros can be widened")
        weights[index] = fill

    if is_length:
        return LengthSpec(tuple(tuple(w) for w in tree))
    return PropRateSpec(tuple(tuple(tuple(w) for w in e) for e in tree))


def complete_prop_spec(
    C: LengthSpec,
    p: PropRateSpec,
    d: int,
    N: int,
    fill: int = 1,
) -> Tuple[PropRateSpec, List[Coordinate]]:
    """
    Give every length C weighs at depths 0..d-1 a propositional-rate list.

    A C widening can make a length reachable where the inferred p holds an
    empty list. Such lists become ``fill`` for every count r <= N (0 above).

    Args:
        C: Length spec, possibly widened
        p: Propositional-rate spec
        d: Modal depth
        N: Number of propositional variables
        fill: Weight given to each admissible count

    Returns:
        (p with the missing lists added, (depth, length) coordinates added)
    """
    entries = [list(p.at_depth(i)) if p.per_depth else [] for i in range(d)]
    added: List[Coordinate] = []
    for i in range(d):
        entry = entries[i]
        for j, weight in enumerate(C.at_depth(i), start=1):
            if weight == 0:
                continue
            while len(entry) < j:
                entry.append(())
            if not entry[j - 1]:
                entry[j - 1] = tuple(fill if r <= N else 0 for r in range(j + 1))
                added.append((i, j))
    if not added:
        return p, added
    logger.info(f"Added propositional-rate lists for newly reachable lengths {added}")
    return PropRateSpec(tuple(tuple(e) for e in entries)), added
