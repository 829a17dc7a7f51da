"""Python front end to the volpath C++ core."""

import json

from ._volpath import (
    VolpathError,
    bs_price,
    implied_vol,
    reduced_v,
    run_cli,
    theta_from_xi,
    xi_from_theta,
)

__all__ = [
    "VolpathError",
    "bs_price",
    "implied_vol",
    "price",
    "reduced_v",
    "run_cli",
    "simulate",
    "theta_from_xi",
    "xi_from_theta",
]


def price(config):
    """Price a run configuration (same schema as the CLI's --config file)."""
    from ._volpath import price_json

    return json.loads(price_json(json.dumps(config)))


def simulate(kernel, t, T, horizon, steps_per_year, M, seed, workers=1):
    """Gaussian increments J^{t,T} on a uniform grid, shape (M, nodes from t, d)."""
    from ._volpath import simulate_json

    return simulate_json(json.dumps(kernel), t, T, horizon, steps_per_year, M, seed, workers)
