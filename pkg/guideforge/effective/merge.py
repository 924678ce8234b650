"""
Merged kinetic form: d D d + {F, d} + ... rewritten as (d + F') D (d + F').
"""

import logging
from dataclasses import replace

from ..couplings.types import CouplingSet
from ..diabatic.lyapunov import lyapunov_residual, primed_kinetic

logger = logging.getLogger(__name__)


def merge_kinetic(couplings: CouplingSet) -> CouplingSet:
    """
    Add F', C' and V'_BH to a coupling set.

    F' solves F' D + D F' = 2F on every slice; C' = F^2 + 1/2 d[F',D] - F' D F'
    and V'_BH = V_BH - C'/2.

    Raises:
        NotPositiveDefinite: if some slice has a non-positive D
    """
    D, F = couplings.D, couplings.F
    Fp, Cp = primed_kinetic(D, F, couplings.slices)
    worst = max(lyapunov_residual(d, f, s) for d, f, s in zip(D, F, Fp))
    logger.debug("merged kinetic form: Lyapunov residual %.1e", worst)

    return replace(couplings, Fp=Fp, Cp=Cp, VpBH=couplings.VBH - 0.5 * Cp)
