from typing import Optional

import numpy as np

from app.models import AnchorError, InvalidInputError

ANCHOR_HINT = ("pass --anchor with a vector a such that a . A_i > 0 for every column i, "
               "or flip the sign of the offending columns")


def _positive_on_columns(A: np.ndarray, anchor: np.ndarray) -> bool:
    return bool(np.all(anchor @ A > 0))


def choose_anchor(A: np.ndarray, anchor: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Direction a with a . A_i > 0 for every column.

    :param A: m x n generator matrix
    :param anchor: caller's choice; checked, never replaced
    :return: the caller's anchor, else the all-ones vector, else the normalized sum of column directions
    :raises AnchorError: when none of those works
    """
    A = np.asarray(A, dtype=float)
    if anchor is not None:
        anchor = np.asarray(anchor, dtype=float)
        if not _positive_on_columns(A, anchor):
            raise AnchorError("the supplied anchor is not positive on every column", hint=ANCHOR_HINT)
        return anchor

    ones = np.ones(A.shape[0])
    if _positive_on_columns(A, ones):
        return ones

    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise AnchorError(f"column {int(np.argmin(norms))} is zero, no hyperplane scaling exists", hint=ANCHOR_HINT)
    summed = (A / norms).sum(axis=1)
    length = np.linalg.norm(summed)
    if length > 0:
        summed = summed / length
        if _positive_on_columns(A, summed):
            return summed
    raise AnchorError("neither the ones vector nor the mean column direction is positive on every column",
                      hint=ANCHOR_HINT)


def scale_to_hyperplane(A: np.ndarray, b: np.ndarray, anchor: np.ndarray, beta: float = 1.0):
    """
    Rescale columns and right-hand side onto <anchor, x> = beta.
    b is in cone(A) iff the scaled b is in the convex hull of the scaled columns.
    """
    column_levels = anchor @ A
    rhs_level = float(anchor @ b)
    if np.any(column_levels <= 0) or rhs_level <= 0:
        raise InvalidInputError("scaling needs anchor . A_i > 0 for all i and anchor . b > 0")
    return A * (beta / column_levels), b * (beta / rhs_level)


def dedupe_rows(matrix: np.ndarray) -> list[int]:
    """Index of the first occurrence of every distinct row, ascending."""
    _, first = np.unique(np.asarray(matrix), axis=0, return_index=True)
    return sorted(int(index) for index in first)


def stack_cost_row(c: np.ndarray, A: np.ndarray) -> np.ndarray:
    """The (m + 1) x n matrix with c on top of A."""
    c = np.asarray(c, dtype=float).reshape(1, -1)
    if c.shape[1] != A.shape[1]:
        raise InvalidInputError(f"c must have {A.shape[1]} entries, got {c.shape[1]}")
    return np.vstack([c, A])


__all__ = [
    "ANCHOR_HINT",
    "choose_anchor",
    "scale_to_hyperplane",
    "dedupe_rows",
    "stack_cost_row",
]
