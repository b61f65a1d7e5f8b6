import logging
from typing import Tuple

import mpmath as mp

from app.core.exceptions import SchemaMismatch, SeriesDivergent
from app.schemas.identity import IdentityCase

logger = logging.getLogger(__name__)

WORK_DPS = 30
AGREEMENT = 1e-10
COLLISION_TOLERANCE = 1e-12


def _first_lemma_parameters(case: IdentityCase) -> Tuple[list, list]:
    if case.id == "barnes1":
        return case.vectors["a"], case.vectors["b"]
    if case.id == "g1" and case.n == 1:
        return case.vectors["alpha"], case.vectors["beta"]
    raise SchemaMismatch(f"residue cross-check needs a barnes1 (or g1, N=1) case, got {case.id} N={case.n}")


def _is_integer(z: complex) -> bool:
    return abs(z.imag) <= COLLISION_TOLERANCE and abs(z.real - round(z.real)) <= COLLISION_TOLERANCE


def cross_check_residue(case: IdentityCase) -> complex:
    """LHS of the first Barnes lemma as a sum over the left pole series.

    Closing the contour to the left picks up z = -b1 - n and z = -b2 - n. The
    two residue series are summed term by term in n, and the paired series is
    accelerated with the Levin u- and v-transforms; both must agree to 1e-10.
    """
    a, b = _first_lemma_parameters(case)
    if _is_integer(b[0] - b[1]):
        raise SeriesDivergent(
            f"b1 - b2 = {b[0] - b[1]} is an integer: the two pole series collide",
            {"b": [[z.real, z.imag] for z in b]},
        )

    with mp.workdps(WORK_DPS):
        a1, a2 = mp.mpc(a[0]), mp.mpc(a[1])
        b1, b2 = mp.mpc(b[0]), mp.mpc(b[1])

        def series_term(lead, other, n):
            return (
                mp.gamma(a1 + lead + n) * mp.gamma(a2 + lead + n) * mp.gamma(other - lead - n)
                * (1 if int(n) % 2 == 0 else -1) / mp.factorial(n)
            )

        def term(n):
            return series_term(b1, b2, n) + series_term(b2, b1, n)

        try:
            value = mp.nsum(term, [0, mp.inf], method="levin", levin_variant="u")
            check = mp.nsum(term, [0, mp.inf], method="levin", levin_variant="v")
        except (ZeroDivisionError, ValueError, mp.NoConvergence) as e:
            raise SeriesDivergent(f"residue series could not be summed: {e}")

        spread = abs(value - check)
        scale = abs(value)
        logger.debug(f"Residue sum {mp.nstr(value, 15)} (levin u/v spread {mp.nstr(spread, 3)})")
        if not mp.isfinite(scale) or spread > AGREEMENT * scale:
            raise SeriesDivergent(
                f"accelerated residue sums disagree: spread {mp.nstr(spread, 3)} vs |S| {mp.nstr(scale, 6)}",
                {"spread": float(spread), "magnitude": float(scale)},
            )
        return complex(value)
