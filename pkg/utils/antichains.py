# utils/antichains.py
from typing import Hashable, Iterable, List, Mapping, Sequence, TypeVar

import numpy as np

V = TypeVar("V", bound=Mapping)


def column_index(vectors: Iterable[Mapping]) -> dict[Hashable, int]:
    """Assigns a dense column to every counter mentioned by the given valuations."""
    columns: dict[Hashable, int] = {}
    for vector in vectors:
        for counter in vector:
            columns.setdefault(counter, len(columns))
    return columns


def densify(vectors: Sequence[Mapping], columns: dict[Hashable, int]) -> np.ndarray:
    matrix = np.zeros((len(vectors), max(len(columns), 1)), dtype=np.int64)
    for row, vector in enumerate(vectors):
        for counter, count in vector.items():
            matrix[row, columns[counter]] = count
    return matrix


def leq_matrix(lower: Sequence[Mapping], upper: Sequence[Mapping]) -> np.ndarray:
    """
    Entry (i, j) is True iff lower[i] <= upper[j] pointwise, absent counters
    reading as 0.
    """
    if not lower or not upper:
        return np.zeros((len(lower), len(upper)), dtype=bool)
    columns = column_index([*lower, *upper])
    low = densify(lower, columns)
    high = densify(upper, columns)
    return (low[:, None, :] <= high[None, :, :]).all(axis=2)


def is_covered(vector: Mapping, basis: Sequence[Mapping]) -> bool:
    """True iff some element of basis is pointwise below vector."""
    if not basis:
        return False
    return bool(leq_matrix(basis, [vector]).any())


def minimize(vectors: Iterable[V]) -> List[V]:
    """Keeps the pointwise-minimal vectors, one representative per equal group."""
    unique = list(dict.fromkeys(vectors))
    if len(unique) < 2:
        return unique
    below = leq_matrix(unique, unique)
    np.fill_diagonal(below, False)
    # unique has no duplicates, so a dominated vector is strictly above another
    return [vector for j, vector in enumerate(unique) if not below[:, j].any()]
