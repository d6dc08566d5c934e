"""The sharp Hardy constant, Robin offsets, and the singular weight.

The weighted norm that measures a trial function near the boundary uses the
weight ``(delta(x) + offset(x))**(-p)``, where ``delta`` is the distance to
the boundary and ``offset`` converts the Robin coefficient of the nearest
boundary piece into a length: Dirichlet pieces give offset 0 (the weight
stays fully singular), weaker Robin coupling pushes the singularity further
outside the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .geometry import BoundaryPartition, Domain, project_points

#: Offset value produced by sigma = 0 pieces; the weight vanishes there.
INFINITE_OFFSET = math.inf


def hardy_constant(p: float) -> float:
    """The sharp constant ((p-1)/p)**p of the Hardy inequality."""
    if not p > 1:
        raise ParameterError(f"exponent must satisfy p > 1, got {p}")
    return ((p - 1.0) / p) ** p


def robin_offset(p: float, sigma: float) -> float:
    """Length offset ((p-1)/p) * sigma**(1/(1-p)) induced by a Robin piece.

    sigma = +inf (Dirichlet) maps to 0, sigma = 0 maps to +inf.
    """
    if not p > 1:
        raise ParameterError(f"exponent must satisfy p > 1, got {p}")
    if not sigma >= 0:
        raise ParameterError(f"sigma must be >= 0 or +inf, got {sigma}")
    if math.isinf(sigma):
        return 0.0
    if sigma == 0.0:
        return INFINITE_OFFSET
    return (p - 1.0) / p * sigma ** (1.0 / (1.0 - p))


def weight_at(domain: Domain, partition: BoundaryPartition, p: float, x) -> float:
    """Point value of the singular weight (delta + offset)**(-p)."""
    cache = WeightCache.at_points(domain, partition, p, np.atleast_2d(np.asarray(x, dtype=float)))
    return float(cache.w[0])


@dataclass(frozen=True, eq=False)
class WeightCache:
    """Per-point cache of distance, governing piece, offset, and weight.

    Built once per assembly at the quadrature points; all arrays share the
    leading length. ``w`` is 0 where the offset is infinite (sigma = 0
    pieces: the weighted norm simply ignores those fibers).
    """

    p: float
    points: np.ndarray
    delta: np.ndarray
    piece: np.ndarray
    sigma: np.ndarray
    offset: np.ndarray
    w: np.ndarray

    @classmethod
    def at_points(cls, domain: Domain, partition: BoundaryPartition, p: float, points) -> "WeightCache":
        partition.validate_for(domain)
        if not p > 1:
            raise ParameterError(f"exponent must satisfy p > 1, got {p}")
        delta, piece = project_points(domain, points)
        ids = domain.piece_ids()
        sig_lut = np.full(max(ids) + 1, np.nan)
        off_lut = np.full(max(ids) + 1, np.nan)
        for pid in ids:
            sig_lut[pid] = partition.sigma_of(pid)
            off_lut[pid] = robin_offset(p, sig_lut[pid])
        piece = np.asarray(piece)
        sigma = sig_lut[piece]
        offset = off_lut[piece]
        with np.errstate(divide="ignore"):
            w = np.where(np.isinf(offset), 0.0, (delta + offset) ** (-p))
        return cls(
            p=p,
            points=np.asarray(points, dtype=float),
            delta=np.asarray(delta, dtype=float),
            piece=np.asarray(piece),
            sigma=sigma,
            offset=offset,
            w=w,
        )
