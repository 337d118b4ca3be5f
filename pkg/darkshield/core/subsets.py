"""
Combinadic indexing of qubit subsets

Subsets of {1..N} with p members are ranked in colexicographic order, so the
rank of {c_1 < ... < c_p} is sum_i comb(c_i - 1, i). Neighbour lists are
returned in ascending order of the added or removed qubit.
"""

import math
from typing import Iterable, Iterator, List, Tuple

from darkshield.core.exceptions import DomainError
from darkshield.core.model import SubsetIndex


def _validate_members(members: Iterable[int], count: int) -> Tuple[int, ...]:
    ordered = tuple(sorted(int(m) for m in members))
    if len(set(ordered)) != len(ordered):
        raise DomainError(f"Subset {ordered} has repeated members")
    for member in ordered:
        if member < 1 or member > count:
            raise DomainError(f"Subset member {member} outside 1..{count}")
    return ordered


def subset_rank(members: Iterable[int], count: int) -> SubsetIndex:
    """
    Rank a subset of {1..count}

    Args:
        members: Qubit labels, 1-based, any order
        count: Number of qubits N

    Returns:
        SubsetIndex carrying count N, size p and the colex rank

    Raises:
        DomainError: If a member is out of range or repeated
    """
    ordered = _validate_members(members, count)
    rank = sum(math.comb(c - 1, i + 1) for i, c in enumerate(ordered))
    return SubsetIndex(count=count, size=len(ordered), rank=rank)


def subset_unrank(rank: int, count: int, size: int) -> Tuple[int, ...]:
    """
    Inverse of subset_rank

    Args:
        rank: Colex rank in [0, comb(count, size))
        count: Number of qubits N
        size: Subset size p

    Returns:
        Ascending 1-based member tuple
    """
    if size < 0 or size > count:
        raise DomainError(f"Subset size {size} outside 0..{count}")
    if rank < 0 or rank >= math.comb(count, size):
        raise DomainError(f"Rank {rank} outside 0..{math.comb(count, size) - 1}")

    members = [0] * size
    k = size
    n = count
    while k > 0:
        n -= 1
        offset = math.comb(n, k)
        if rank >= offset:
            rank -= offset
            k -= 1
            members[k] = n + 1
    return tuple(members)


def enumerate_subsets(count: int, size: int) -> Iterator[Tuple[int, ...]]:
    """Yield every size-subset of {1..count} in rank order"""
    for rank in range(math.comb(count, size)):
        yield subset_unrank(rank, count, size)


def neighbors_up(index: SubsetIndex) -> List[Tuple[SubsetIndex, int]]:
    """
    Subsets obtained by adding one qubit

    Returns:
        (superset index, added qubit) pairs, ascending in the added qubit
    """
    members = index.members
    present = set(members)
    result = []
    for j in range(1, index.count + 1):
        if j not in present:
            result.append((subset_rank(members + (j,), index.count), j))
    return result


def neighbors_down(index: SubsetIndex) -> List[Tuple[SubsetIndex, int]]:
    """
    Subsets obtained by removing one qubit

    Returns:
        (subset index, removed qubit) pairs, ascending in the removed qubit
    """
    members = index.members
    result = []
    for j in members:
        rest = tuple(m for m in members if m != j)
        result.append((subset_rank(rest, index.count), j))
    return result
