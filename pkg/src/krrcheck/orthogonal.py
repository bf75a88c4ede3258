"""Estimation-effect removal by projecting residuals off the score span.

The projector ``I - G (G'G)^{-1} G'`` is never materialized: a pivoted QR of
G yields an orthonormal basis Q for the column space actually spanned (rank
deficiency is projected through, not an error) and applications cost
O(n p q) as ``v - Q (Q'v)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import InputError
from .models import FittedModel

_RANK_TOL = 1e-10


@dataclass
class Projector:
    """Reusable annihilator of a score matrix's column space."""

    basis: np.ndarray
    _Q: np.ndarray = field(init=False, repr=False)
    rank: int = field(init=False)

    def __post_init__(self) -> None:
        G = np.asarray(self.basis, dtype=np.float64)
        if G.ndim != 2:
            raise InputError(f"G must be 2-d, got shape {G.shape}")
        n, p = G.shape
        if n <= p:
            raise InputError(f"projector needs n > p, got n={n}, p={p}")
        Q, R, _ = sla.qr(G, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        scale = diag[0] if diag.size else 0.0
        rank = int(np.sum(diag > _RANK_TOL * scale)) if scale > 0 else 0
        self._Q = Q[:, :rank]
        self.rank = rank

    def apply(self, v) -> np.ndarray:
        """Project a vector or n x q matrix onto the orthogonal complement."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.basis.shape[0]:
            raise InputError(
                f"vector length {v.shape[0]} does not match basis rows "
                f"{self.basis.shape[0]}"
            )
        if self.rank == 0:
            return v.copy()
        return v - self._Q @ (self._Q.T @ v)


def build_projector(G) -> Projector:
    """Projector onto the orthogonal complement of colspace(G)."""
    return Projector(basis=np.asarray(G, dtype=np.float64))


def orthogonalize_residuals(fm: FittedModel) -> np.ndarray:
    """Apply each component's own projector to that residual column.

    For OLS the output equals the residuals exactly (they already live in
    the orthogonal complement of the regressor span).  Multi-component
    models are handled componentwise, one projector per score matrix.
    """
    eps = fm.residuals
    if len(fm.scores) != eps.shape[1]:
        raise InputError(
            f"{eps.shape[1]} residual components but {len(fm.scores)} score matrices"
        )
    out = np.empty_like(eps)
    for r in range(eps.shape[1]):
        out[:, r] = build_projector(fm.scores[r]).apply(eps[:, r])
    return out


def component_projectors(fm: FittedModel) -> list[Projector]:
    """One projector per residual component, for reuse across replicates."""
    return [build_projector(G) for G in fm.scores]
