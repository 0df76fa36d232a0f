"""Weight elicitation for the index: AHP pairwise comparisons or budget votes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError

# Saaty's random consistency index, n = 1..12 (Saaty 1980, as tabulated in most
# AHP references; the n = 12 entry follows the original table).
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45, 10: 1.49, 11: 1.51, 12: 1.48}
MAX_N = 12
CR_ACCEPTABLE = 0.10
MAX_ITER = 10_000


@dataclass(frozen=True)
class WeightReport:
    weights: tuple[float, ...]
    lambda_max: float
    consistency_index: float
    consistency_ratio: float
    acceptable: bool
    iterations: int = 0


def check_pairwise(m, rtol=1e-9):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"pairwise matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if not 1 <= n <= MAX_N:
        raise ValidationError(f"pairwise matrix size must be 1..{MAX_N}, got {n}")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise ValidationError("pairwise entries must be finite and > 0")
    if not np.allclose(np.diag(a), 1.0, rtol=0, atol=rtol):
        raise ValidationError("pairwise matrix diagonal must be 1")
    bad = np.argwhere(~np.isclose(a * a.T, 1.0, rtol=0, atol=rtol))
    if len(bad):
        i, j = bad[0]
        raise ValidationError(f"pairwise matrix is not reciprocal at ({i}, {j}): {a[i, j]} vs {a[j, i]}")
    return a


def derive_weights_ahp(matrix, tol: float = 1e-10) -> WeightReport:
    """Principal-eigenvector weights with Saaty's consistency ratio.

    Power iteration starts from the normalized-column row means (the usual
    approximate AHP weights) and stops when successive vectors agree to a
    relative ``tol``.
    """
    a = check_pairwise(matrix)
    n = a.shape[0]
    w = (a / a.sum(axis=0)).mean(axis=1)
    for it in range(1, MAX_ITER + 1):
        nxt = a @ w
        nxt /= nxt.sum()
        done = np.max(np.abs(nxt - w) / nxt) <= tol
        w = nxt
        if done:
            break
    else:
        raise NumericError(f"power iteration did not converge in {MAX_ITER} iterations")
    lam = float(np.mean((a @ w) / w))
    if n <= 2:
        ci = cr = 0.0
    else:
        ci = (lam - n) / (n - 1)
        cr = ci / RANDOM_INDEX[n]
    return WeightReport(tuple(w.tolist()), lam, ci, cr, cr <= CR_ACCEPTABLE, it)


def weights_from_budget(allocations) -> tuple[float, ...]:
    """Normalize a budget-allocation vote into weights.

    Zero allocations stay zero here; the index's weight type rejects them.
    """
    x = [float(v) for v in allocations]
    if not x:
        raise ValidationError("no allocations given")
    if any(not math.isfinite(v) or v < 0 for v in x):
        raise ValidationError(f"allocations must be finite and >= 0: {x}")
    total = math.fsum(x)
    if total == 0:
        raise ValidationError("at least one allocation must be positive")
    return tuple(v / total for v in x)


def consistent_matrix(weights):
    """The perfectly consistent comparison matrix ``w_i / w_j``."""
    w = np.asarray(weights, dtype=float)
    return w[:, None] / w[None, :]
