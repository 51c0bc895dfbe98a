"""Exact chunked Euclidean distance computations.

Squared distances are accumulated feature by feature from explicit
differences. That is slower than the |a|^2 + |b|^2 - 2ab identity but free of
its cancellation noise: duplicate rows come out at exactly 0 and equal
distances compare equal, which the tie-break and outlier-density contracts
rely on.
"""

from __future__ import annotations

import numpy as np

# Upper bound on the number of matrix cells held per block.
_BLOCK_CELLS = 4_000_000


def sq_dists(A, B) -> np.ndarray:
    """Dense (len(A), len(B)) matrix of squared Euclidean distances."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    out = np.zeros((A.shape[0], B.shape[0]), dtype=np.float64)
    for f in range(A.shape[1]):
        diff = A[:, f, None] - B[None, :, f]
        out += diff * diff
    return out


def iter_sq_dist_blocks(A, B, block_cells: int = _BLOCK_CELLS):
    """Yield (start, stop, block) squared-distance blocks of rows of A vs all B.

    Block row count is chosen so each block holds at most ``block_cells``
    matrix cells, keeping memory flat for large inputs.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    rows = max(1, block_cells // max(1, B.shape[0]))
    for start in range(0, A.shape[0], rows):
        stop = min(start + rows, A.shape[0])
        yield start, stop, sq_dists(A[start:stop], B)
