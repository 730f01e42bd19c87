"""MIMO symbiotic-radio backscatter beamforming."""

from ._srbeam import (
    SrbeamError,
    draw_channels,
    mrt,
    rate_primary,
    rate_secondary,
    read_csv,
    run_experiment,
    scalar_closed_form,
    solve_epm,
    solve_upper_bound,
    trial_seed,
)

__all__ = [
    "SrbeamError",
    "draw_channels",
    "mrt",
    "rate_primary",
    "rate_secondary",
    "read_csv",
    "run_experiment",
    "scalar_closed_form",
    "solve_epm",
    "solve_upper_bound",
    "trial_seed",
]
