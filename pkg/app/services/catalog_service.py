import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from app.core.exceptions import (
    BudgetExceeded,
    ConstraintViolated,
    Infeasible,
    NoConvergence,
    NonDecaying,
    PoleArgument,
    RHSPole,
    SchemaMismatch,
)
from app.schemas.contour import ConstraintSlack, ContourSpec
from app.schemas.identity import (
    IdentityCase,
    IdentitySummary,
    ParameterSpec,
    ValueSummary,
    VerificationReport,
    VerificationStatus,
)
from app.schemas.integrand import GammaFactor, MBIntegrand, PowerFactor, AffineArg
from app.schemas.quadrature import IntegralEstimate, QuadratureConfig
from app.services.contour_service import default_contour, validate
from app.services.gamma_service import gamma_ratio_log
from app.services.integrand_service import gamma_factor, integrand_document, reduce_delta_constraint, structurally_equal
from app.services.quadrature_service import integrate
from app.utils.logsum import relative_log_difference
from app.utils.params import complex_document, parse_scalar, parse_vector

logger = logging.getLogger(__name__)

Vectors = Dict[str, List[complex]]
Scalars = Dict[str, complex]

DEFAULT_RE_RANGE = (0.2, 1.2)
DEFAULT_IM_RANGE = (-0.5, 0.5)
DISTINCT_TOLERANCE = 1e-12
NORMALIZATION_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Predicate:
    name: str
    check: Callable[[int, Vectors, Scalars], bool]


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    dim_formula: str
    dim: Callable[[int], int]
    vectors: Dict[str, Tuple[str, Callable[[int], int]]]
    build: Callable[[int, Vectors, Scalars], Tuple[MBIntegrand, complex]]
    sample: Callable[[int, np.random.Generator], Tuple[Vectors, Scalars]]
    anchor: str
    scalars: Dict[str, Optional[complex]] = field(default_factory=dict)
    constraints: Tuple[Predicate, ...] = ()
    min_n: int = 1
    max_n: Optional[int] = None
    rotation: Optional[str] = None
    reports_normalization: bool = False


# ---------------------------------------------------------------------------
# factor helpers

def _unit(j: int, dim: int, c: int = 1) -> List[int]:
    v = [0] * dim
    v[j] = c
    return v


def _add(*vectors: List[int]) -> List[int]:
    return [sum(items) for items in zip(*vectors)]


def _ones(dim: int, c: int = 1, skip: Tuple[int, ...] = ()) -> List[int]:
    return [0 if j in skip else c for j in range(dim)]


def _vandermonde(axes: List[int], dim: int) -> List[GammaFactor]:
    """1/Gamma(z_i - z_j) for every ordered pair i != j of the given axes."""
    return [
        gamma_factor(0, _add(_unit(i, dim), _unit(j, dim, -1)), denominator=True)
        for i in axes for j in axes if i != j
    ]


def _rhs(numerators: List[complex], denominators: List[complex], extra: complex = 0j) -> complex:
    try:
        value = gamma_ratio_log(numerators, denominators) + extra
    except PoleArgument as e:
        raise RHSPole(f"right-hand side has a gamma pole: {e.message}")
    if value.real == -math.inf:
        raise RHSPole("right-hand side vanishes (denominator gamma at a pole)")
    return value


def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


# ---------------------------------------------------------------------------
# identity builders

def _g1_parts(n: int, alpha: List[complex], beta: List[complex]):
    factors = []
    for j in range(n):
        for k in range(n + 1):
            factors.append(gamma_factor(alpha[k], _unit(j, n, -1)))
            factors.append(gamma_factor(beta[k], _unit(j, n)))
    factors += _vandermonde(list(range(n)), n)
    rhs = _rhs([a + b for a in alpha for b in beta], [sum(alpha) + sum(beta)], _log_factorial(n))
    return factors, rhs


def _build_g1(n, v, s):
    factors, rhs = _g1_parts(n, v["alpha"], v["beta"])
    return MBIntegrand(dim=n, gamma_factors=factors), rhs


def _build_barnes1(n, v, s):
    factors, rhs = _g1_parts(1, v["a"], v["b"])
    return MBIntegrand(dim=1, gamma_factors=factors), rhs


def _g2_lhs_factors(n: int, alpha: List[complex]) -> List[GammaFactor]:
    factors = []
    for j in range(n):
        for a in alpha:
            factors.append(gamma_factor(a, _unit(j, n)))
            factors.append(gamma_factor(a, _unit(j, n, -1)))
    for k in range(n):
        factors.append(gamma_factor(0, _unit(k, n, 2), denominator=True))
        factors.append(gamma_factor(0, _unit(k, n, -2), denominator=True))
    for k in range(n):
        for j in range(k + 1, n):
            for sk in (1, -1):
                for sj in (1, -1):
                    factors.append(gamma_factor(0, _add(_unit(k, n, sk), _unit(j, n, sj)), denominator=True))
    return factors


def _pair_sums(alpha: List[complex]) -> List[complex]:
    return [alpha[k] + alpha[j] for k in range(len(alpha)) for j in range(k + 1, len(alpha))]


def _g2_parts(n: int, alpha: List[complex]):
    rhs = _rhs(_pair_sums(alpha), [sum(alpha)], n * math.log(2) + _log_factorial(n))
    return _g2_lhs_factors(n, alpha), rhs


def _build_g2(n, v, s):
    factors, rhs = _g2_parts(n, v["alpha"])
    return MBIntegrand(dim=n, gamma_factors=factors), rhs


def _build_g2a(n, v, s):
    alpha = v["alpha"]
    rhs = _rhs(_pair_sums(alpha), [], n * math.log(2) + _log_factorial(n))
    return MBIntegrand(dim=n, gamma_factors=_g2_lhs_factors(n, alpha)), rhs


def _build_g3(n, v, s):
    alpha, beta = v["alpha"], v["beta"]
    factors = []
    for j in range(n):
        for a in alpha:
            factors.append(gamma_factor(a, _unit(j, n, -1)))
        for b in beta:
            factors.append(gamma_factor(b, _unit(j, n)))
            factors.append(gamma_factor(-b, _unit(j, n)))
    for k in range(n):
        for j in range(k + 1, n):
            factors.append(gamma_factor(0, _add(_unit(k, n), _unit(j, n)), denominator=True))
            factors.append(gamma_factor(0, _add(_unit(k, n), _unit(j, n, -1)), denominator=True))
            factors.append(gamma_factor(0, _add(_unit(j, n), _unit(k, n, -1)), denominator=True))
    numerators = [a + sign * b for b in beta for a in alpha for sign in (1, -1)]
    rhs = _rhs(numerators, _pair_sums(alpha), _log_factorial(n))
    return MBIntegrand(dim=n, gamma_factors=factors), rhs


def _build_iw(n, v, s):
    a, b, zeta = v["a"], v["b"], s["zeta"].real
    factors = []
    for j in range(n):
        for k in range(n):
            factors.append(gamma_factor(a[k], _unit(j, n, -1)))
            factors.append(gamma_factor(b[k], _unit(j, n)))
    factors += _vandermonde(list(range(n)), n)
    power = PowerFactor(base=zeta, exponent=AffineArg(constant=0j, coeffs=_ones(n)))
    sa, sb = sum(a), sum(b)
    extra = sa * math.log(zeta) - (sa + sb) * math.log1p(zeta)
    rhs = _rhs([ak + bj for ak in a for bj in b], [], extra)
    lhs = MBIntegrand(dim=n, gamma_factors=factors, power_factors=[power], symmetry_divisor=math.factorial(n))
    return lhs, rhs


def _tba_parameters(v: Vectors) -> Vectors:
    return {
        "alpha": [1j * xp.conjugate() for xp in v["xp"]],
        "beta": [-1j * x for x in v["x"]],
    }


def _abop_parameters(v: Vectors) -> Vectors:
    return {"alpha": [1j * xp for xp in v["xp"]] + [-1j * x for x in v["x"]]}


def _build_tba(n, v, s):
    rotated = _tba_parameters(v)
    factors, rhs = _g1_parts(n, rotated["alpha"], rotated["beta"])
    lhs = MBIntegrand(dim=n, gamma_factors=factors, symmetry_divisor=math.factorial(n))
    return lhs, rhs - _log_factorial(n)


def _build_abop(n, v, s):
    factors, rhs = _g2_parts(n, _abop_parameters(v)["alpha"])
    # du/(4 pi) per axis is half of dz/(2 pi i)
    lhs = MBIntegrand(
        dim=n,
        gamma_factors=factors,
        log_prefactor=complex(-n * math.log(2), 0.0),
        symmetry_divisor=math.factorial(n),
    )
    return lhs, rhs - _log_factorial(n) - n * math.log(2)


def _su_block(n: int, y: List[complex], x: List[complex], axes: List[int], dim: int) -> List[GammaFactor]:
    """Gamma(y_k - u_j) Gamma(x_k + u_j) over the given axes, divided by the u_i - u_j Vandermonde."""
    factors = []
    for j in axes:
        for yk in y:
            factors.append(gamma_factor(yk, _unit(j, dim, -1)))
        for xk in x:
            factors.append(gamma_factor(xk, _unit(j, dim)))
    return factors + _vandermonde(axes, dim)


def _cross_sums(y: List[complex], x: List[complex]) -> List[complex]:
    return [yj + xk for xk in x for yj in y]


def _build_s1(n, v, s):
    y, x = v["y"], v["x"]
    nu = sum(y) + sum(x)
    factors = _su_block(n, y, x, list(range(n)), n)
    factors += [gamma_factor(nu, _unit(j, n), denominator=True) for j in range(n)]
    rhs = _rhs(_cross_sums(y, x), [nu - xk for xk in x])
    return MBIntegrand(dim=n, gamma_factors=factors, symmetry_divisor=math.factorial(n)), rhs


def s2_full_integrand(n: int, y: List[complex], x: List[complex]) -> MBIntegrand:
    """The sum-constrained integrand before eliminating an axis."""
    return MBIntegrand(
        dim=n,
        gamma_factors=_su_block(n, y, x, list(range(n)), n),
        symmetry_divisor=math.factorial(n),
        delta_constraint=True,
    )


def _build_s2(n, v, s):
    y, x = v["y"], v["x"]
    X = sum(x)
    lhs = reduce_delta_constraint(s2_full_integrand(n, y, x), n - 1)
    rhs = _rhs([X - xk for xk in x] + _cross_sums(y, x), [X + yk for yk in y])
    return lhs, rhs


def _build_s3(n, v, s):
    y, x, nu = v["y"], v["x"], s["nu"]
    X, Y = sum(x), sum(y)
    factors = [
        gamma_factor(nu - X, _ones(n, -1)),
        gamma_factor(nu + Y, _ones(n, -1), denominator=True),
    ]
    factors += _su_block(n, y, x, list(range(n)), n)
    numerators = [nu - xk for xk in x] + _cross_sums(y, x)
    denominators = [nu + yk for yk in y] + [X + Y]
    rhs = _rhs(numerators, denominators)
    return MBIntegrand(dim=n, gamma_factors=factors, symmetry_divisor=math.factorial(n)), rhs


def _s4_rhs(y: List[complex], x: List[complex], s_: complex) -> complex:
    numerators = [s_ - xk for xk in x] + [s_ - yk for yk in y] + _cross_sums(y, x)
    denominators = [s_ + xk for xk in x] + [s_ + yk for yk in y]
    return _rhs(numerators, denominators)


def _build_s4(n, v, s):
    y, x, s_ = v["y"], v["x"], s["s"]
    X = sum(x)
    factors = [
        gamma_factor(s_ - X, _ones(n, -1)),
        gamma_factor(s_ + X, _ones(n), denominator=True),
    ]
    factors += [gamma_factor(X - yk, _ones(n)) for yk in y]
    factors += [gamma_factor(X, _ones(n, skip=(k,)), denominator=True) for k in range(n)]
    factors += _su_block(n, y, x, list(range(n)), n)
    lhs = MBIntegrand(dim=n, gamma_factors=factors, symmetry_divisor=math.factorial(n))
    return lhs, _s4_rhs(y, x, s_)


def _build_s5(n, v, s):
    """Axis 0 is nu, axes 1..n-1 are u."""
    y, x, s_ = v["y"], v["x"], s["s"]
    X, Y = sum(x), sum(y)
    dim = n
    e_nu = _unit(0, dim)
    u_all = _ones(dim, skip=(0,))
    factors = [
        gamma_factor(s_ - X, _unit(0, dim, -1)),
        gamma_factor(s_ + X, e_nu, denominator=True),
    ]
    factors += [gamma_factor(X - xk, e_nu) for xk in x]
    factors += [gamma_factor(X, _add(e_nu, _unit(k, dim)), denominator=True) for k in range(1, dim)]
    factors.append(gamma_factor(Y, _unit(0, dim, -1)))
    factors.append(gamma_factor(X - Y, _add(e_nu, u_all)))
    factors.append(gamma_factor(X, u_all, denominator=True))
    factors += _su_block(dim, y, x, list(range(1, dim)), dim)
    lhs = MBIntegrand(dim=dim, gamma_factors=factors, symmetry_divisor=math.factorial(n - 1))
    return lhs, _s4_rhs(y, x, s_)


# ---------------------------------------------------------------------------
# samplers

def _draw(rng: np.random.Generator, count: int, re=DEFAULT_RE_RANGE, im=DEFAULT_IM_RANGE) -> List[complex]:
    real = rng.uniform(re[0], re[1], size=count)
    imag = rng.uniform(im[0], im[1], size=count)
    return [complex(a, b) for a, b in zip(real, imag)]


def _sample_g1(n, rng):
    return {"alpha": _draw(rng, n + 1), "beta": _draw(rng, n + 1)}, {}


def _sample_barnes1(n, rng):
    return {"a": _draw(rng, 2), "b": _draw(rng, 2)}, {}


def _sample_g2(n, rng):
    return {"alpha": _draw(rng, 2 * n + 2)}, {}


def _sample_g2a(n, rng):
    return {"alpha": _draw(rng, 2 * n + 1)}, {}


def _sample_g3(n, rng):
    # |Re beta| small keeps the strip |Re beta| < c < Re alpha wide
    return {"alpha": _draw(rng, n + 1, re=(0.5, 1.2)), "beta": _draw(rng, n, re=(-0.1, 0.1))}, {}


def _sample_iw(n, rng):
    v = {"a": _draw(rng, n), "b": _draw(rng, n)}
    return v, {"zeta": complex(rng.uniform(0.5, 2.0), 0.0)}


def _sample_rotated(n, rng, xp_im):
    # real and imaginary roles swap under the rotation
    x = _draw(rng, n + 1, re=(-0.5, 0.5), im=DEFAULT_RE_RANGE)
    xp = _draw(rng, n + 1, re=(-0.5, 0.5), im=xp_im)
    return {"x": x, "xp": xp}, {}


def _sample_tba(n, rng):
    return _sample_rotated(n, rng, DEFAULT_RE_RANGE)


def _sample_abop(n, rng):
    return _sample_rotated(n, rng, (-1.2, -0.2))


def _sample_s1(n, rng):
    return {"y": _draw(rng, n + 1), "x": _draw(rng, n + 2)}, {}


def _sample_s2(n, rng):
    return {"y": _draw(rng, n - 1), "x": _draw(rng, n + 1)}, {}


def _sample_s3(n, rng):
    v = {"y": _draw(rng, n + 1), "x": _draw(rng, n + 1)}
    X = sum(v["x"])
    nu = complex(X.real + rng.uniform(0.3, 1.0), rng.uniform(*DEFAULT_IM_RANGE))
    return v, {"nu": nu}


def _sample_s4(n, rng):
    x = _draw(rng, n + 1)
    X = sum(x)
    width = min(1.0, max(X.real - 0.5, 0.0))
    y = [complex(0.2 + width * rng.uniform(), rng.uniform(*DEFAULT_IM_RANGE)) for _ in range(n)]
    s_ = complex(X.real + rng.uniform(0.3, 1.0), rng.uniform(*DEFAULT_IM_RANGE))
    return {"y": y, "x": x}, {"s": s_}


def _sample_s5(n, rng):
    x = _draw(rng, n + 1)
    X = sum(x)
    budget = max(X.real - 0.3 - 0.2 * n, 0.0)
    y = [complex(0.2 + budget / n * rng.uniform(), rng.uniform(*DEFAULT_IM_RANGE)) for _ in range(n)]
    s_ = complex(X.real + rng.uniform(0.3, 1.0), rng.uniform(*DEFAULT_IM_RANGE))
    return {"y": y, "x": x}, {"s": s_}


# ---------------------------------------------------------------------------
# predicates

def _all_re_positive(name: str) -> Predicate:
    return Predicate(f"Re {name}_k > 0", lambda n, v, s: all(z.real > 0 for z in v[name]))


def _all_im_positive(name: str) -> Predicate:
    return Predicate(f"Im {name}_k > 0", lambda n, v, s: all(z.imag > 0 for z in v[name]))


def _distinct(name: str) -> Predicate:
    def check(n, v, s):
        vals = v[name]
        return all(abs(vals[i] - vals[j]) > DISTINCT_TOLERANCE for i in range(len(vals)) for j in range(i + 1, len(vals)))
    return Predicate(f"{name} pairwise distinct", check)


P_ZETA = Predicate("zeta > 0 real", lambda n, v, s: s["zeta"].imag == 0 and s["zeta"].real > 0)
P_XP_LOWER = Predicate("Im xp_k < 0", lambda n, v, s: all(z.imag < 0 for z in v["xp"]))
P_NU_X = Predicate("Re nu > Re X", lambda n, v, s: s["nu"].real > sum(v["x"]).real)
P_X_Y = Predicate("Re X > Re y_k", lambda n, v, s: all(sum(v["x"]).real > y.real for y in v["y"]))
P_S_X = Predicate("Re s > Re X", lambda n, v, s: s["s"].real > sum(v["x"]).real)
P_XY_DIFF = Predicate("Re(X - Y) > 0", lambda n, v, s: (sum(v["x"]) - sum(v["y"])).real > 0)

XY_POSITIVE = (_all_re_positive("x"), _all_re_positive("y"))


CATALOG: Dict[str, CatalogEntry] = {
    e.id: e
    for e in [
        CatalogEntry(
            id="g1", dim_formula="N", dim=lambda n: n,
            vectors={"alpha": ("N+1", lambda n: n + 1), "beta": ("N+1", lambda n: n + 1)},
            build=_build_g1, sample=_sample_g1,
            constraints=(),
            anchor="Gustafson integral of su(N) type; contours separate the series of poles",
        ),
        CatalogEntry(
            id="g2", dim_formula="N", dim=lambda n: n,
            vectors={"alpha": ("2N+2", lambda n: 2 * n + 2)},
            build=_build_g2, sample=_sample_g2,
            constraints=(),
            anchor="Gustafson integral of sp(N) type; Gamma(a +- b) = Gamma(a+b)Gamma(a-b)",
        ),
        CatalogEntry(
            id="g3", dim_formula="N", dim=lambda n: n,
            vectors={"alpha": ("N+1", lambda n: n + 1), "beta": ("N", lambda n: n)},
            build=_build_g3, sample=_sample_g3,
            constraints=(_distinct("alpha"),),
            anchor="mixed su/sp Gustafson-type identity from the open spin chain; N=1 is a special case of g1",
        ),
        CatalogEntry(
            id="g2a", dim_formula="N", dim=lambda n: n,
            vectors={"alpha": ("2N+1", lambda n: 2 * n + 1)},
            build=_build_g2a, sample=_sample_g2a,
            constraints=(),
            anchor="degenerate sp(N) Gustafson integral: one alpha sent to infinity",
        ),
        CatalogEntry(
            id="iw", dim_formula="N", dim=lambda n: n,
            vectors={"a": ("N", lambda n: n), "b": ("N", lambda n: n)},
            scalars={"zeta": 1 + 0j},
            build=_build_iw, sample=_sample_iw,
            constraints=(P_ZETA,),
            anchor="composition law for the shift operator, zeta^U weighted su(N) integral",
            rotation="z_j = i u_j, a_k = i conj(x'_k), b_k = -i x_k",
        ),
        CatalogEntry(
            id="tba", dim_formula="N", dim=lambda n: n,
            vectors={"x": ("N+1", lambda n: n + 1), "xp": ("N+1", lambda n: n + 1)},
            build=_build_tba, sample=_sample_tba,
            constraints=(_all_im_positive("x"), _all_im_positive("xp")),
            anchor="scalar product of B-system eigenfunctions, which is the su(N) Gustafson integral",
            rotation="z_j = i u_j, alpha_k = i conj(xp_k), beta_k = -i x_k; symmetry divisor N!",
        ),
        CatalogEntry(
            id="abop", dim_formula="N", dim=lambda n: n,
            vectors={"x": ("N+1", lambda n: n + 1), "xp": ("N+1", lambda n: n + 1)},
            build=_build_abop, sample=_sample_abop,
            constraints=(_all_im_positive("x"), P_XP_LOWER),
            anchor="mixed A/open-chain scalar product, which coincides with the sp(N) Gustafson integral",
            rotation="z_j = i u_j, alpha = (i xp_k, -i x_k); du/(4 pi) measure; symmetry divisor N!",
        ),
        CatalogEntry(
            id="s1", dim_formula="N", dim=lambda n: n,
            vectors={"y": ("N+1", lambda n: n + 1), "x": ("N+2", lambda n: n + 2)},
            build=_build_s1, sample=_sample_s1,
            constraints=XY_POSITIVE,
            anchor="beta-type integral with 1/Gamma(nu + u_k), nu = Y + X",
            rotation="i u_k -> u_k",
        ),
        CatalogEntry(
            id="s2", dim_formula="N-1 (after eliminating the sum constraint)", dim=lambda n: n - 1,
            vectors={"y": ("N-1", lambda n: n - 1), "x": ("N+1", lambda n: n + 1)},
            build=_build_s2, sample=_sample_s2, min_n=2,
            constraints=XY_POSITIVE,
            anchor="sum-constrained beta-type integral; N=2 is the Wilson - de Branges integral",
            rotation="i u_k -> u_k; u_N = -(u_1 + ... + u_{N-1})",
            reports_normalization=True,
        ),
        CatalogEntry(
            id="s3", dim_formula="N", dim=lambda n: n,
            vectors={"y": ("N+1", lambda n: n + 1), "x": ("N+1", lambda n: n + 1)},
            scalars={"nu": None},
            build=_build_s3, sample=_sample_s3,
            constraints=XY_POSITIVE + (P_NU_X,),
            anchor="Gamma(nu-X-U)/Gamma(nu+Y-U) integral; N=1 is the second Barnes lemma",
            rotation="i u_k -> u_k",
        ),
        CatalogEntry(
            id="s4", dim_formula="N", dim=lambda n: n,
            vectors={"y": ("N", lambda n: n), "x": ("N+1", lambda n: n + 1)},
            scalars={"s": None},
            build=_build_s4, sample=_sample_s4,
            constraints=XY_POSITIVE + (P_X_Y, P_S_X),
            anchor="Gamma(s-X-U)/Gamma(s+X+U) integral with Gamma(X+U-y_k)/Gamma(X+U-u_k); N=1 reduces to Barnes' second lemma",
            rotation="i u_k -> u_k",
        ),
        CatalogEntry(
            id="s5", dim_formula="N (axis 0 is nu, axes 1..N-1 are u)", dim=lambda n: n,
            vectors={"y": ("N", lambda n: n), "x": ("N+1", lambda n: n + 1)},
            scalars={"s": None},
            build=_build_s5, sample=_sample_s5,
            constraints=XY_POSITIVE + (P_XY_DIFF, P_S_X),
            anchor="nu-integrated beta-type integral; N=1 is equivalent to Barnes' second lemma",
            rotation="i u_k -> u_k, i nu -> nu",
        ),
        CatalogEntry(
            id="barnes1", dim_formula="1", dim=lambda n: 1,
            vectors={"a": ("2", lambda n: 2), "b": ("2", lambda n: 2)},
            build=_build_barnes1, sample=_sample_barnes1, max_n=1,
            constraints=(),
            anchor="Barnes' first lemma (g1 at N=1)",
        ),
        CatalogEntry(
            id="barnes2", dim_formula="1", dim=lambda n: 1,
            vectors={"y": ("2", lambda n: 2), "x": ("2", lambda n: 2)},
            scalars={"nu": None},
            build=_build_s3, sample=_sample_s3, max_n=1,
            constraints=XY_POSITIVE + (P_NU_X,),
            anchor="Barnes' second lemma (s3 at N=1)",
            rotation="i u -> u",
        ),
    ]
}


def get_entry(identity_id: str) -> CatalogEntry:
    try:
        return CATALOG[identity_id]
    except KeyError:
        raise SchemaMismatch(f"unknown identity {identity_id!r}; known: {', '.join(CATALOG)}")


def list_identities() -> List[IdentitySummary]:
    summaries = []
    for entry in CATALOG.values():
        parameters = [ParameterSpec(name=name, length=length) for name, (length, _) in entry.vectors.items()]
        parameters += [
            ParameterSpec(name=name, description="required" if default is None else f"default {default.real:g}")
            for name, default in entry.scalars.items()
        ]
        summaries.append(
            IdentitySummary(
                id=entry.id,
                dim_formula=entry.dim_formula,
                min_n=entry.min_n,
                max_n=entry.max_n,
                parameters=parameters,
                constraints=[p.name for p in entry.constraints],
                anchor=entry.anchor,
                rotation=entry.rotation,
            )
        )
    return summaries


def _parse(entry: CatalogEntry, n: int, params: Dict[str, Any]) -> Tuple[Vectors, Scalars]:
    known = set(entry.vectors) | set(entry.scalars)
    unknown = sorted(set(params) - known)
    if unknown:
        raise SchemaMismatch(f"{entry.id}: unknown parameters {unknown}; expected {sorted(known)}")
    vectors = {}
    for name, (_, length) in entry.vectors.items():
        if name not in params:
            raise SchemaMismatch(f"{entry.id}: missing parameter {name!r}")
        vectors[name] = parse_vector(name, params[name], length(n))
    scalars = {}
    for name, default in entry.scalars.items():
        if name in params:
            scalars[name] = parse_scalar(name, params[name])
        elif default is not None:
            scalars[name] = default
        else:
            raise SchemaMismatch(f"{entry.id}: missing parameter {name!r}")
    return vectors, scalars


def build_identity(identity_id: str, n: int, params: Dict[str, Any], extra: Optional[Dict[str, Any]] = None) -> IdentityCase:
    """Parse parameters against the entry schema, check its predicates and
    build the LHS integrand together with the log of the RHS."""
    entry = get_entry(identity_id)
    if n < entry.min_n or (entry.max_n is not None and n > entry.max_n):
        bound = f"{entry.min_n}" if entry.max_n is None else f"{entry.min_n}..{entry.max_n}"
        raise SchemaMismatch(f"{identity_id}: N={n} outside the supported range {bound}")
    merged = dict(params)
    merged.update(extra or {})
    vectors, scalars = _parse(entry, n, merged)
    for predicate in entry.constraints:
        if not predicate.check(n, vectors, scalars):
            raise ConstraintViolated(predicate.name, f"{identity_id}: constraint violated: {predicate.name}")
    lhs, rhs_log = entry.build(n, vectors, scalars)
    if lhs.dim != entry.dim(n):
        raise SchemaMismatch(f"{identity_id}: built integrand has dim {lhs.dim}, expected {entry.dim(n)}")
    logger.info(f"Built {identity_id} N={n}: dim={lhs.dim}, {len(lhs.gamma_factors)} gamma factors")
    return IdentityCase(
        id=identity_id,
        n=n,
        dim=lhs.dim,
        vectors=vectors,
        scalars=scalars,
        constraints=[p.name for p in entry.constraints],
        lhs=lhs,
        rhs_log=rhs_log,
        anchor=entry.anchor,
    )


def sample_params(identity_id: str, n: int, seed: int) -> Dict[str, Any]:
    """Seeded parameter draw satisfying the entry's predicates, as a JSON-ready map."""
    entry = get_entry(identity_id)
    rng = np.random.default_rng(seed)
    vectors, scalars = entry.sample(n, rng)
    doc: Dict[str, Any] = {k: [complex_document(z) for z in vals] for k, vals in vectors.items()}
    doc.update({k: complex_document(z) for k, z in scalars.items()})
    return doc


def alias_of(case: IdentityCase) -> Optional[IdentityCase]:
    """The g1/g2 case that a tba/abop case rotates into, or None."""
    if case.id == "tba":
        rotated = _tba_parameters(case.vectors)
        return build_identity("g1", case.n, {k: [complex_document(z) for z in v] for k, v in rotated.items()})
    if case.id == "abop":
        rotated = _abop_parameters(case.vectors)
        return build_identity("g2", case.n, {k: [complex_document(z) for z in v] for k, v in rotated.items()})
    return None


def check_alias(case: IdentityCase) -> bool:
    """Structural equality with the aliased case, and RHS logs that differ by
    exactly the symmetry divisor and measure factors."""
    target = alias_of(case)
    if target is None:
        return False
    if not structurally_equal(case.lhs, target.lhs):
        return False
    log_front = complex(case.lhs.log_prefactor) - math.log(case.lhs.symmetry_divisor)
    expected = target.rhs_log + log_front
    return abs(np.expm1(case.rhs_log - expected)) < 1e-12


# ---------------------------------------------------------------------------
# verification

def summarize_log(log_value: complex, log_error: Optional[float] = None) -> ValueSummary:
    summary = ValueSummary(phase=math.remainder(log_value.imag, 2 * math.pi) if log_value.real != -math.inf else 0.0)
    if log_value.real != -math.inf:
        summary.log_mag = float(log_value.real)
        if log_value.real < 709:
            value = math.exp(log_value.real) * complex(math.cos(log_value.imag), math.sin(log_value.imag))
            summary.re, summary.im = value.real, value.imag
    else:
        summary.re, summary.im = 0.0, 0.0
    if log_error is not None:
        summary.error = 0.0 if log_error == -math.inf else (math.exp(log_error) if log_error < 709 else math.inf)
    return summary


def decide_status(rel_deviation: float, rel_error: float, rel_tol: float, guard_failed: bool) -> VerificationStatus:
    """inconclusive when a guard failed or the error bar alone exceeds rel_tol;
    otherwise pass iff the deviation is inside max(rel_tol, 3 * error bar)."""
    if guard_failed or not math.isfinite(rel_error) or rel_error > rel_tol:
        return VerificationStatus.INCONCLUSIVE
    if rel_deviation < max(rel_tol, 3.0 * rel_error):
        return VerificationStatus.PASS
    return VerificationStatus.FAIL


def verify(
    case: IdentityCase,
    config: QuadratureConfig,
    contour: Optional[ContourSpec] = None,
    margin: float = 0.05,
    explain: bool = False,
) -> VerificationReport:
    """Integrate the LHS, compare it with the RHS and classify the outcome.

    Numerical guards that fail (contour, convergence, budget) produce an
    inconclusive report instead of an exception.
    """
    started = time.perf_counter()
    entry = get_entry(case.id)
    if contour is not None and len(contour.offsets) != case.dim:
        raise SchemaMismatch(f"{case.id}: contour has {len(contour.offsets)} offsets, integrand dim is {case.dim}")
    report = VerificationReport(
        identity=case.id,
        N=case.n,
        params=case.params_document(),
        rhs=summarize_log(case.rhs_log),
        rel_tol=config.rel_tol,
        status=VerificationStatus.INCONCLUSIVE,
        anchor=case.anchor,
        integrand=integrand_document(case.lhs) if explain else None,
    )

    try:
        if contour is None:
            contour = default_contour(case.lhs, margin)
        report.contour = contour
        validation = validate(case.lhs, contour)
        if not validation.passed:
            raise Infeasible("contour does not separate the pole series", [v.model_dump() for v in validation.violations])
    except Infeasible as e:
        report.diagnostics.append(f"Infeasible: {e.message}")
        report.violations = [ConstraintSlack(**v) for v in e.violations]
        report.runtime_s = time.perf_counter() - started
        logger.warning(f"{case.id} N={case.n}: contour infeasible")
        return report

    guard_failed = False
    estimate: Optional[IntegralEstimate]
    try:
        estimate = integrate(case.lhs, contour, config)
    except NoConvergence as e:
        estimate = e.estimate
        guard_failed = True
        report.diagnostics.append(f"NoConvergence: {e.message}")
    except (BudgetExceeded, NonDecaying) as e:
        estimate = None
        report.diagnostics.append(f"{type(e).__name__}: {e.message}")

    if estimate is None:
        report.runtime_s = time.perf_counter() - started
        return report

    rel_deviation = relative_log_difference(estimate.log_value, case.rhs_log)
    rel_error = 0.0 if estimate.log_error == -math.inf else math.exp(min(estimate.log_error - case.rhs_log.real, 700.0))
    report.lhs = summarize_log(estimate.log_value, estimate.log_error)
    report.rel_deviation = rel_deviation
    report.rel_error = rel_error
    report.nodes = estimate.nodes_evaluated
    report.method = estimate.method_used.value
    report.status = decide_status(rel_deviation, rel_error, config.rel_tol, guard_failed)

    if entry.reports_normalization:
        fitted = np.exp(complex(estimate.log_value - case.rhs_log))
        off = abs(fitted - 1.0) > max(NORMALIZATION_TOLERANCE, 3.0 * rel_error)
        report.normalization_note = (
            f"normalization constant {case.normalization:g}; fitted LHS/RHS = "
            f"{fitted.real:.12g}{fitted.imag:+.3g}i" + (" (differs from 1)" if off else "")
        )

    report.runtime_s = time.perf_counter() - started
    logger.info(
        f"{case.id} N={case.n}: {report.status.value} rel_dev={rel_deviation:.3e} "
        f"rel_err={rel_error:.3e} nodes={report.nodes} ({report.runtime_s:.2f}s)"
    )
    return report
