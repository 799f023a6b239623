"""Hausdorff dimension of shrinking-target sets for irrational rotations.

The package computes the critical exponent of the block-term series built
from the continued fraction of theta and a radius function phi, together with
the classical comparison bounds, exact orbit geometry (three-distance gaps,
long-interval covers) and an empirical box-counting cross-check.
"""

__version__ = "0.1.0"

from .cf_engine import (  # noqa: E402
    ConstantPQ,
    ExplicitPQ,
    PeriodicPQ,
    PowerOfQ,
    RotationSpec,
    convergents,
    growth_exponent_w,
)
from .dim_core import (  # noqa: E402
    DimConfig,
    hausdorff_dimension,
    mass_transference_bound,
    optimal_split,
    series_classifier,
)
from .interval import LogInterval  # noqa: E402
from .phi_models import BlockConstant, LogPower, PowerLaw, TableStep, u_l_exponents  # noqa: E402

__all__ = [
    "BlockConstant", "ConstantPQ", "DimConfig", "ExplicitPQ", "LogInterval", "LogPower",
    "PeriodicPQ", "PowerLaw", "PowerOfQ", "RotationSpec", "TableStep", "convergents",
    "growth_exponent_w", "hausdorff_dimension", "mass_transference_bound", "optimal_split",
    "series_classifier", "u_l_exponents",
]
