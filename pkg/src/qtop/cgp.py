"""Renormalized CGP invariants of plumbed 3-manifolds and Verlinde-type quantities.

The invariant is the Kirby-coloured evaluation of the plumbing link: every
vertex carries a Kirby colour shifted by the cohomology class omega, vertices
contribute d^(2 - deg) T^framing and edges contribute the open Hopf scalar S.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .plumbing import PlumbingGraph, mat_vec, presentation, rational_inverse
from .qarith import CyclotomicNumber, QContext, Rational, RootParams, as_fraction, q_complex
from .zhat import richardson
from .repcat import (
    NotRibbonError,
    T_exponent,
    atypical_index,
    delta_closed_form,
    kirby_index_set,
    mdim,
    modularity_parameter,
)


class InadmissibleColourError(ValueError):
    """Some vertex colour alpha_v + k lies in the atypical set X."""


class NonGenericOmegaError(ValueError):
    """omega makes the torsion factor vanish or blow up."""


class OmegaFormatError(ValueError):
    """omega has the wrong length or modulus, or is not a cocycle."""


class VerlindePoleError(ValueError):
    pass


def colour_modulus(params: RootParams) -> int:
    """Cohomology classes take values in C/2Z, or C/Z when r = 0 mod 8."""
    return 1 if params.zero_mod_eight else 2


# ---------------------------------------------------------------------------
# Cohomology classes


@dataclass(frozen=True)
class OmegaClass:
    alpha: tuple[Fraction, ...]
    modulus: int

    def __post_init__(self):
        if self.modulus not in (1, 2):
            raise ValueError("omega modulus must be 1 or 2")

    @classmethod
    def from_values(cls, values: Sequence[Rational], modulus: int) -> OmegaClass:
        return cls(tuple(as_fraction(v) for v in values), modulus)

    @classmethod
    def from_cycle(cls, graph: PlumbingGraph, k: Sequence[int], modulus: int) -> OmegaClass:
        """alpha = m B^{-1} k, the class dual to the homology class of k."""
        inv = rational_inverse(graph.B)
        return cls(tuple(modulus * x for x in mat_vec(inv, k)), modulus)

    def is_cocycle(self, graph: PlumbingGraph) -> bool:
        return all(
            (Fraction(x) / self.modulus).denominator == 1 for x in mat_vec(graph.B, self.alpha)
        )

    def to_json_obj(self) -> dict:
        return {"alpha": [_frac_str(a) for a in self.alpha], "modulus": self.modulus}


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def omega_problem(params: RootParams, graph: PlumbingGraph, omega: OmegaClass) -> str | None:
    """Why omega cannot colour the graph, or None when it is admissible.

    Admissible means: a cocycle of the right modulus, every colour alpha_v + k
    typical with finite modified dimension, and nonzero d wherever it is
    raised to a negative power (which makes the torsion factor finite and nonzero).
    """
    if len(omega.alpha) != graph.n:
        return "omega has the wrong number of entries"
    if omega.modulus != colour_modulus(params):
        return f"omega modulus must be {colour_modulus(params)} for r = {params.r}"
    if not omega.is_cocycle(graph):
        return "omega is not a cocycle: B alpha not in mZ^V"
    rbar, r = params.rbar, params.r
    for v, a in enumerate(omega.alpha):
        if (2 * rbar * a / r).denominator == 1:
            return f"colour in X: alpha_{v} = {a} has a modified dimension pole"
        for k in kirby_index_set(params):
            if atypical_index(params, a + k) is not None:
                return f"colour in X: alpha_{v} + {k} is atypical"
            if graph.degrees[v] > 2 and ((2 * (a + k)) / r - Fraction(1, 2)).denominator == 1:
                return f"non-generic omega: d(alpha_{v} + {k}) = 0 at a vertex of degree > 2"
    return None


def is_admissible(params: RootParams, graph: PlumbingGraph, omega: OmegaClass) -> bool:
    return omega_problem(params, graph, omega) is None


def _require(params: RootParams, graph: PlumbingGraph, omega: OmegaClass) -> None:
    if not params.ribbon:
        raise NotRibbonError("not ribbon: r = 4 mod 8 has no CGP invariant")
    problem = omega_problem(params, graph, omega)
    if problem is not None:
        if problem.startswith("colour in X"):
            raise InadmissibleColourError(problem)
        if problem.startswith("non-generic"):
            raise NonGenericOmegaError(problem)
        raise OmegaFormatError(problem)


# ---------------------------------------------------------------------------
# The invariant


def cgp_context(params: RootParams, omega: OmegaClass) -> QContext:
    root = params.r if params.zero_mod_eight else params.rdot
    return QContext.for_weights(params, omega.alpha, extra=[4 * root, 8])


def cgp_invariant(
    params: RootParams,
    graph: PlumbingGraph,
    omega: OmegaClass,
    backend: str = "exact",
    threads: int = 1,
):
    """N_r(M, omega) for the plumbed manifold of ``graph``.

    ``exact`` returns a CyclotomicNumber computed by passing messages along the
    tree; ``float`` returns a complex from a direct loop over all colourings.
    """
    _require(params, graph, omega)
    if backend == "exact":
        return _cgp_exact(params, graph, omega)
    if backend == "float":
        return _cgp_float(params, graph, omega, threads)
    raise ValueError(f"backend must be 'exact' or 'float', got {backend!r}")


def _cgp_exact(params: RootParams, graph: PlumbingGraph, omega: OmegaClass) -> CyclotomicNumber:
    ctx = cgp_context(params, omega)
    pres = presentation(graph.B)
    kset = kirby_index_set(params)
    n = graph.n
    degs = graph.degrees
    colours = [[omega.alpha[v] + k for k in kset] for v in range(n)]
    local = []
    for v in range(n):
        row = []
        for lam in colours[v]:
            row.append(mdim(params, lam, ctx) ** (2 - degs[v]) * ctx.q(T_exponent(params, lam) * graph.framings[v]))
        local.append(row)

    nbrs: list[list[int]] = [[] for _ in range(n)]
    for a, b in graph.edges:
        nbrs[a].append(b)
        nbrs[b].append(a)
    order, parent = [0], {0: None}
    for v in order:
        for w in nbrs[v]:
            if w not in parent:
                parent[w] = v
                order.append(w)

    # belief[v][i]: local weight of colour i at v times all messages from its subtree
    belief = [list(row) for row in local]
    for v in reversed(order[1:]):
        p = parent[v]
        for i, lp in enumerate(colours[p]):
            msg = ctx.zero()
            for j, lv in enumerate(colours[v]):
                msg = msg + ctx.q(lp * lv) * belief[v][j]
            belief[p][i] = belief[p][i] * msg
    total = ctx.zero()
    for x in belief[0]:
        total = total + x

    dp, dm = delta_closed_form(params, ctx)
    return total / (dp**pres.b_plus * dm**pres.b_minus)


# Float oracle: written directly from the defining sum, sharing nothing with the
# exact route beyond q = e^{2 pi i/r}; Delta_+- are recomputed by brute force.


def _d_float(r: int, rbar: int, lam: float) -> complex:
    return (q_complex(r, lam) + q_complex(r, -lam)) / (q_complex(r, rbar * lam) - q_complex(r, -rbar * lam))


def _t_float(r: int, rbar: int, lam: float) -> complex:
    return q_complex(r, (lam * lam - (rbar - 1) ** 2) / 2)


def delta_float(params: RootParams, sign: int, lam: float = 0.1234) -> complex:
    r, rbar = params.r, params.rbar
    nu = lam - rbar + 1
    total = 0j
    for k in kirby_index_set(params):
        mu = lam + k
        phi = (-q_complex(r, -mu * nu) if sign == 1 else q_complex(r, mu * nu)) / _d_float(r, rbar, nu)
        total += _d_float(r, rbar, mu) * (_t_float(r, rbar, nu) * _t_float(r, rbar, mu)) ** sign * phi
    return total


def _float_terms(args) -> tuple[float, float]:
    r, rbar, kset, alpha, degs, framings, edges, first = args
    n = len(alpha)
    re, im = [], []
    for rest in itertools.product(kset, repeat=n - 1):
        ks = (first, *rest)
        lam = [float(alpha[v]) + ks[v] for v in range(n)]
        term = 1 + 0j
        for v in range(n):
            term *= _d_float(r, rbar, lam[v]) ** (2 - degs[v]) * _t_float(r, rbar, lam[v]) ** framings[v]
        for a, b in edges:
            term *= q_complex(r, lam[a] * lam[b])
        re.append(term.real)
        im.append(term.imag)
    return math.fsum(re), math.fsum(im)


def _cgp_float(params: RootParams, graph: PlumbingGraph, omega: OmegaClass, threads: int = 1) -> complex:
    pres = presentation(graph.B)
    kset = kirby_index_set(params)
    jobs = [
        (params.r, params.rbar, kset, omega.alpha, graph.degrees, graph.framings, graph.edges, k)
        for k in kset
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_float_terms, jobs))
    else:
        parts = [_float_terms(j) for j in jobs]
    total = complex(math.fsum(p[0] for p in parts), math.fsum(p[1] for p in parts))
    dp, dm = delta_float(params, 1), delta_float(params, -1)
    return total / (dp**pres.b_plus * dm**pres.b_minus)


# ---------------------------------------------------------------------------
# Verlinde formula


def verlinde_value(
    params: RootParams,
    genus: int,
    marked_points: Sequence[tuple[Rational, int]] = (),
    lambda_bar=Fraction(1, 7),
) -> complex:
    """Partition function of (surface x S^1) with holonomy lambda_bar around the circle.

    Marked points carry colours V_(mu_i - rbar + 1, p_i).
    """
    return complex(_verlinde_sum(params, genus, marked_points, lambda_bar))


def _verlinde_sum(params: RootParams, genus: int, marked_points, lambda_bar):
    """Verlinde sum in mpmath at the working precision; lambda_bar may be real or complex."""
    if genus < 1:
        raise ValueError("genus must be >= 1")
    if not params.ribbon:
        raise NotRibbonError("not ribbon: r = 4 mod 8")
    r, rbar = params.r, params.rbar
    mu = sum((as_fraction(m) - rbar + 1 for m, _ in marked_points), Fraction(0))
    parity = sum(p for _, p in marked_points) % 2
    power = 2 * genus - 2 - len(marked_points)
    if isinstance(lambda_bar, Fraction):
        lam = mpmath.mpf(lambda_bar.numerator) / lambda_bar.denominator
    else:
        lam = mpmath.mpmathify(lambda_bar)

    def q(z):
        return mpmath.expjpi(2 * z / r)

    total = mpmath.mpc(0)
    for k in kirby_index_set(params):
        x = lam + k
        den = q(x) + q(-x)
        num = q(rbar * x) - q(-rbar * x)
        if power < 0 and abs(num) < mpmath.mpf(10) ** (-mpmath.mp.dps + 5):
            raise VerlindePoleError("specialization hits pole")
        if power > 0 and abs(den) < mpmath.mpf(10) ** (-mpmath.mp.dps + 5):
            raise VerlindePoleError("specialization hits pole")
        total += q(mu * x) * ((num / den) ** power if power else 1)
    sign = -1 if parity else 1
    return sign * modularity_parameter(params) ** (genus - 1) * total


def euler_char(params: RootParams, genus: int) -> Fraction:
    if genus < 1:
        raise ValueError("genus must be >= 1")
    if not params.ribbon:
        raise NotRibbonError("not ribbon: r = 4 mod 8")
    r = params.r
    if genus == 1:
        return Fraction(len(kirby_index_set(params)))
    if params.zero_mod_eight:
        return Fraction(r ** (3 * genus - 3), 2 ** (2 * genus - 3))
    return Fraction(0)


def total_dim(params: RootParams, genus: int) -> Fraction:
    """Total dimension of the genus-g state space without marked points.

    At genus 1 this is |I_r|; the closed form for genus >= 2 does not extend
    to genus 1 in the r = 0 mod 8 family.
    """
    if genus < 1:
        raise ValueError("genus must be >= 1")
    if not params.ribbon:
        raise NotRibbonError("not ribbon: r = 4 mod 8")
    r = params.r
    if genus == 1:
        return Fraction(len(kirby_index_set(params)))
    base = Fraction(r ** (3 * genus - 3))
    if r % 2:
        return base * 2 ** (2 * genus - 2)
    if r % 4 == 2:
        return base / 2 ** (genus - 1)
    return base / 2 ** (2 * genus - 3)


# n_* per residue of r mod 8: the unique -rbar + 1 + 2n_* in I_r whose summand
# denominator vanishes at lambda = 1/(2 eps)
_N_STAR = {
    1: lambda r: Fraction(5 * r - 5, 8),
    2: lambda r: Fraction(3 * r - 6, 8),
    3: lambda r: Fraction(7 * r - 5, 8),
    5: lambda r: Fraction(r - 5, 8),
    6: lambda r: Fraction(r - 6, 8),
    7: lambda r: Fraction(3 * r - 5, 8),
}


def n_star_table(params: RootParams) -> int | None:
    f = _N_STAR.get(params.r % 8)
    if f is None:
        return None
    return int(f(params.r))


def n_star_search(params: RootParams) -> list[int]:
    """All n in [0, |I_r|) with q^{lambda + k} + q^{-lambda - k} = 0 at lambda = 1/(2 eps), k = -rbar + 1 + 2n."""
    r, rbar, eps = params.r, params.rbar, params.eps
    lam = Fraction(1, 2 * eps)
    out = []
    for n in range(len(kirby_index_set(params))):
        x = lam - rbar + 1 + 2 * n
        # q^x + q^-x = 0 iff q^{2x} = -1 iff 2x/r = 1/2 mod 1
        if (2 * x / r - Fraction(1, 2)).denominator == 1:
            out.append(n)
    return out


def _limit(f, x0: Fraction, direction: float, h0: float = 0.05, steps: int = 10) -> tuple[complex, float]:
    """Richardson limit of f along x0 + h direction, h = h0 / 2^j; returns the value and a consistency estimate.

    h0 stays below the distance from x0 to the nearest genuine pole of a summand (at least 1/4).
    """
    with mpmath.workdps(50):
        x0m = mpmath.mpf(x0.numerator) / x0.denominator
        hs = [mpmath.mpf(h0) / 2**j for j in range(steps)]
        values = [mpmath.mpc(f(x0m + direction * h)) for h in hs]
        full = richardson(hs, values)
        partial = richardson(hs[:-1], values[:-1])
    return complex(full), float(abs(full - partial))


def verlinde_limit_check(params: RootParams, genus: int, tolerance: float = 1e-6) -> dict:
    """Numerical limits of the marked-point-free Verlinde sum against the closed forms."""

    def f(lam):
        return _verlinde_sum(params, genus, (), lam)

    direction = 1
    chi, chi_err = _limit(f, Fraction(0), direction)
    dim, dim_err = _limit(f, Fraction(1, 2 * params.eps), direction)
    chi_exact = euler_char(params, genus)
    dim_exact = total_dim(params, genus)
    if params.zero_mod_eight:
        # every state has even parity, so the total dimension is the Euler characteristic
        dim, dim_err = chi, chi_err
    dim_target = dim_exact
    chi_ok = abs(chi - float(chi_exact)) <= tolerance * max(1.0, float(abs(chi_exact)))
    dim_ok = abs(dim - float(dim_target)) <= tolerance * max(1.0, float(abs(dim_target)))
    table, found = n_star_table(params), n_star_search(params)
    return {
        "r": params.r,
        "genus": genus,
        "euler_char": {"limit": [chi.real, chi.imag], "closed_form": _frac_str(chi_exact), "extrapolation_error": chi_err, "pass": bool(chi_ok)},
        "total_dim": {"limit": [dim.real, dim.imag], "closed_form": _frac_str(Fraction(dim_target)), "extrapolation_error": dim_err, "pass": bool(dim_ok)},
        "n_star": {"table": table, "search": found, "agree": (table is None and not found) or found == [table]},
        "pass": bool(chi_ok and dim_ok),
        "tolerance": tolerance,
    }
