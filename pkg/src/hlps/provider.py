"""LBS provider: a POI catalogue answering circular range queries."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import Point2D
from .protocol import PROVIDER_ID, LbsQuery, LbsResponse

DEFAULT_SERVING_RADIUS = 125.0


@dataclass(frozen=True)
class PoiRecord:
    id: int
    position: Point2D
    category: str


@dataclass(frozen=True)
class ProviderModel:
    pois: tuple[PoiRecord, ...]
    serving_radius: float = DEFAULT_SERVING_RADIUS
    # columnar copies of the catalogue for the range kernel
    _xs: np.ndarray = field(init=False, repr=False, compare=False)
    _ys: np.ndarray = field(init=False, repr=False, compare=False)
    _ids: np.ndarray = field(init=False, repr=False, compare=False)
    _cats: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.serving_radius > 0:
            raise ValueError("serving_radius must be positive")
        pois = tuple(self.pois)
        object.__setattr__(self, "pois", pois)
        object.__setattr__(self, "_xs", np.array([p.position.x for p in pois], dtype=np.float64))
        object.__setattr__(self, "_ys", np.array([p.position.y for p in pois], dtype=np.float64))
        object.__setattr__(self, "_ids", np.array([p.id for p in pois], dtype=np.int64))
        object.__setattr__(self, "_cats", np.array([p.category for p in pois], dtype=object))

    def within(self, center: Point2D, radius: float, category: str | None = None) -> np.ndarray:
        """Indices of POIs within ``radius`` of ``center``, nearest first
        (ties by POI id)."""
        if not self.pois:
            return np.empty(0, dtype=np.int64)
        mask = kernels.within_radius(self._xs, self._ys, center.x, center.y, radius)
        if category is not None:
            mask &= self._cats == category
        idx = np.flatnonzero(mask)
        dist = np.hypot(self._xs[idx] - center.x, self._ys[idx] - center.y)
        return idx[np.lexsort((self._ids[idx], dist))]

    def serve_query(self, query: LbsQuery) -> LbsResponse:
        return serve_query(self, query)


def serve_query(provider: ProviderModel, query: LbsQuery) -> LbsResponse:
    """Every POI of the requested category inside the serving disc around
    the query point, nearest first."""
    idx = provider.within(query.query_position, provider.serving_radius, query.service)
    return LbsResponse(
        provider=PROVIDER_ID,
        qu=query.qu,
        payload=tuple(provider.pois[i] for i in idx),
    )
