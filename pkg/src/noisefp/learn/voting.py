"""Hard-vote ensembling over several independently drawn segment sets."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyInputError, ShapeError


def vote(predictions):
    """Combine ``V`` probability vectors into one class id.

    Each voter backs its argmax.  Most votes wins; a tie goes to the tied
    class with the larger summed probability, then to the lower index.
    """
    P = np.asarray(predictions, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] == 0:
        raise EmptyInputError("vote needs at least one probability vector")
    return int(vote_batch(P[:, None, :])[0])


def vote_batch(P):
    """Vectorised :func:`vote` over trials: ``P`` is (V, n, K), returns (n,)."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 3:
        raise ShapeError(f"expected (voters, trials, classes), got {P.shape}")
    if P.shape[0] == 0:
        raise EmptyInputError("no voters")
    k = P.shape[2]
    counts = np.zeros(P.shape[1:], dtype=np.int64)
    for votes in np.argmax(P, axis=2):
        counts[np.arange(P.shape[1]), votes] += 1
    mass = P.sum(axis=0)
    leaders = counts == counts.max(axis=1, keepdims=True)
    score = np.where(leaders, mass, -np.inf)
    # argmax returns the first maximum, i.e. the lowest tied index
    return np.argmax(score, axis=1) if k else np.zeros(P.shape[1], dtype=np.int64)
