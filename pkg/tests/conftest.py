import datetime as dt

import numpy as np
import pytest

from multirisk.model import BankRegistry, ExposureLayer, HoldingsSnapshot, SystemSnapshot

A_DATE = dt.date(2013, 9, 30)


def make_registry(equity, p=None, prefix="B"):
    equity = np.asarray(equity, dtype=float)
    if p is None:
        p = np.full(equity.size, 0.01)
    ids = tuple(f"{prefix}{k}" for k in range(equity.size))
    return BankRegistry(ids, equity, p)


def make_holdings(shares, outstanding, price, date=A_DATE):
    shares = np.atleast_2d(np.asarray(shares, dtype=float))
    m = shares.shape[1]
    ids = tuple(f"A{k}" for k in range(m))
    return HoldingsSnapshot(date, ids, shares, np.asarray(outstanding, float), np.asarray(price, float))


def random_snapshot(rng, banks=6, assets=8, with_holdings=True, with_direct=True):
    """A small random snapshot that satisfies every model invariant."""
    equity = rng.uniform(50.0, 200.0, banks)
    p = rng.uniform(0.0, 0.05, banks)
    registry = make_registry(equity, p)

    holdings = None
    if with_holdings:
        outstanding = rng.uniform(1e4, 1e5, assets)
        price = rng.uniform(1.0, 50.0, assets)
        raw = rng.exponential(1.0, (banks, assets)) * (rng.random((banks, assets)) < 0.5)
        col = raw.sum(axis=0)
        scale = np.divide(0.8 * outstanding, col, out=np.zeros(assets), where=col > 0)
        shares = raw * scale
        holdings = HoldingsSnapshot(
            A_DATE, tuple(f"A{k}" for k in range(assets)), shares, outstanding, price
        )

    layers = ()
    if with_direct:
        matrix = rng.uniform(0.0, 100.0, (banks, banks)) * (
            rng.random((banks, banks)) < 0.4
        )
        np.fill_diagonal(matrix, 0.0)
        layers = (ExposureLayer("DL", matrix),)

    return SystemSnapshot(A_DATE, registry, holdings, layers)


@pytest.fixture
def rng():
    return np.random.default_rng(20130930)
