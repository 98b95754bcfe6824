"""Compensated reductions over momentum grids.

Every sum over q in the package goes through :func:`csum`: a pairwise tree
whose every addition is an error-free TwoSum, with the rounding errors
collected and added back at the end.  The result is as accurate as summing in
doubled precision and rounding once, so any two evaluation orders (serial,
chunked, threaded) agree to a few ulps of the exact sum.  The tree order is
fixed, so a given input always gives bitwise the same answer.
"""

import numpy as np


def csum(values) -> float:
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        return 0.0
    errors = []
    while x.size > 1:
        if x.size % 2:
            x = np.append(x, 0.0)
        a, b = x[0::2], x[1::2]
        s = a + b
        bv = s - a
        errors.append((a - (s - bv)) + (b - bv))
        x = s
    return float(x[0] + np.sum(np.concatenate(errors))) if errors else float(x[0])


def csum_rows(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    return np.array([csum(row) for row in arr])
