"""Spatio-temporal crime hotspot forecasting with block-weighted adaptive KDE."""

import json
from os import PathLike

from ._core import (
    NotFoundError,
    Workspace,
    event_area_auc,
    gaussian_kernel,
    log_bessel_i0,
    run_cli,
    synthesize_events,
    von_mises_density,
    von_mises_interval_mass,
)

__all__ = [
    "NotFoundError",
    "Workspace",
    "event_area_auc",
    "gaussian_kernel",
    "log_bessel_i0",
    "open_workspace",
    "run_cli",
    "synthesize_events",
    "von_mises_density",
    "von_mises_interval_mass",
]


def open_workspace(config: dict, base_dir: str | PathLike = "") -> Workspace:
    """Workspace from a config dict; relative paths resolve against base_dir."""
    return Workspace(json.dumps(config), str(base_dir))
