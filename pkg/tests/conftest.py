import numpy as np
import pytest

import factorlens as fl

ARCHETYPES = (
    (1.2, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, -1.2, 0, 0, 0, 0, 0, 0.9, 0),
    (0, 0.9, 0.9, 0, 0, 0, 0, -0.9, 0, 0),
)


# Mild targets stay reachable even in very small universes.
MILD_ARCHETYPES = (
    (0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, -0.5, 0, 0, 0, 0, 0, 0.4, 0),
    (0, 0.4, 0.4, 0, 0, 0, 0, -0.4, 0, 0),
)


def make_market(n_stocks=120, n_days=60, n_portfolios=25, seed=3, residual_vol=0.004,
                span=(25, 60), trade_events=(1, 4), archetypes=None, **kwargs):
    if archetypes is None:
        archetypes = ARCHETYPES if n_stocks >= 100 else MILD_ARCHETYPES
    cfg = fl.SyntheticConfig(
        n_stocks=n_stocks, n_days=n_days, n_portfolios=n_portfolios, n_archetypes=3,
        archetype_exposures=archetypes, residual_vol=residual_vol, seed=seed,
        span_range=span, trade_events=trade_events, **kwargs,
    )
    return cfg, fl.generate_synthetic_market(cfg)


@pytest.fixture(scope="session")
def small_market():
    _, (panel, portfolios, truth) = make_market()
    return panel, fl.attach_derived_fields(portfolios, panel), truth


def nearest_centroid_purity(vectors: np.ndarray, labels: np.ndarray) -> float:
    ks = np.unique(labels)
    centroids = np.array([vectors[labels == k].mean(axis=0) for k in ks])
    d2 = ((vectors[:, None, :] - centroids[None]) ** 2).sum(axis=2)
    return float((ks[d2.argmin(axis=1)] == labels).mean())
