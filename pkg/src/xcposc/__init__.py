"""Design-and-verification toolkit for cross-coupled-pair oscillation controllers.

Checks the inverse circle criterion for 2-dominance, the RLC/RC feasibility
rules, and equilibrium instability, then simulates the closed Lur'e loop to
confirm and measure the resulting limit cycle.
"""

from .criterion import (
    DominanceReport,
    NyquistCurve,
    check_theorem2,
    check_theorem3_rlc,
    check_theorem4_rc,
    disk_margin,
    encirclement_oracle,
    sample_shifted,
    winding_number,
)
from .equilibria import (
    EquilibriumSet,
    InstabilityWindow,
    RootLocusBranch,
    find_equilibria,
    instability_window,
    root_locus,
)
from .netfun import (
    DcMotorPlant,
    LoopFunction,
    PassivityVerdict,
    RcController,
    RlcController,
    make_dc_motor,
    make_loop,
    make_rc,
    make_rlc,
    passivity_check,
)
from .poly import Polynomial, RationalFunction, RootSet, feedback, find_roots
from .sim import (
    OscillationMetrics,
    StateSpaceRealization,
    Trajectory,
    augment_with_motor,
    integrate,
    jacobian_at,
    measure,
    realize,
)
from .xcp import SectorNonlinearity, phi, phi_derivative, sector_bounds

__version__ = "0.1.0"

__all__ = [
    "DcMotorPlant",
    "DominanceReport",
    "EquilibriumSet",
    "InstabilityWindow",
    "LoopFunction",
    "NyquistCurve",
    "OscillationMetrics",
    "PassivityVerdict",
    "Polynomial",
    "RationalFunction",
    "RcController",
    "RlcController",
    "RootLocusBranch",
    "RootSet",
    "SectorNonlinearity",
    "StateSpaceRealization",
    "Trajectory",
    "augment_with_motor",
    "check_theorem2",
    "check_theorem3_rlc",
    "check_theorem4_rc",
    "disk_margin",
    "encirclement_oracle",
    "feedback",
    "find_equilibria",
    "find_roots",
    "instability_window",
    "integrate",
    "jacobian_at",
    "make_dc_motor",
    "make_loop",
    "make_rc",
    "make_rlc",
    "measure",
    "passivity_check",
    "phi",
    "phi_derivative",
    "realize",
    "root_locus",
    "sample_shifted",
    "sector_bounds",
    "winding_number",
]
