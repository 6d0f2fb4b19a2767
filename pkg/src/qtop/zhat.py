"""F-series coefficients and the Zhat q-series of plumbed 3-manifolds.

The vertex factor (x +- 1/x)^{2-deg} is expanded as a Laurent polynomial when
2 - deg >= 0 and as the symmetric average of its expansions at x -> 0 and
x -> infinity otherwise.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .qarith import Rational
from .plumbing import (
    PlumbingGraph,
    determinant,
    mat_vec,
    presentation,
    quad,
    rational_inverse,
    sigma_map,
    weakly_negative_definite,
)

ALGEBRA_SIGN = {"osp": 1, "sl2": -1}
# damping parameters for Abel extrapolation; t = 0.9 is too far from 1 for
# a four-point fit to reach 1e-6 on typical one-junction graphs
ABEL_DAMPING = (0.99, 0.995, 0.999, 0.9995)


class ConvergenceError(ValueError):
    """The lattice sum is not known to converge, or its regularization is unstable."""


def algebra_sign(algebra: str) -> int:
    try:
        return ALGEBRA_SIGN[algebra]
    except KeyError:
        raise ValueError(f"algebra must be 'sl2' or 'osp', got {algebra!r}") from None


# ---------------------------------------------------------------------------
# Coefficients


@lru_cache(maxsize=None)
def vertex_coeff(sign: int, degree: int, j: int) -> Fraction:
    """Coefficient of x^j in (x + sign/x)^{2-degree}."""
    e = 2 - degree
    if (j - e) % 2:
        return Fraction(0)
    if e >= 0:
        m = (e - j) // 2
        if m < 0 or m > e:
            return Fraction(0)
        return Fraction(math.comb(e, m) * sign**m)
    n = -e
    total = Fraction(0)
    # x -> infinity: x^{-n} (1 + sign x^{-2})^{-n}
    m = (-n - j) // 2
    if m >= 0:
        total += math.comb(n + m - 1, m) * (-1) ** m * sign**m
    # x -> 0: (sign/x)^{-n} (1 + x^2/sign)^{-n}
    m = (j - n) // 2
    if m >= 0:
        total += math.comb(n + m - 1, m) * (-1) ** m * Fraction(sign) ** (-n - m)
    return total / 2


def vertex_support(degree: int) -> tuple[int, ...] | None:
    """Finite support of the vertex factor, or None when it is infinite."""
    e = 2 - degree
    if e < 0:
        return None
    return tuple(range(-e, e + 1, 2))


def f_coeff(sign: int, degrees: Sequence[int], l: Sequence[int]) -> Fraction:
    out = Fraction(1)
    for d, lv in zip(degrees, l):
        c = vertex_coeff(sign, d, lv)
        if not c:
            return Fraction(0)
        out *= c
    return out


@dataclass
class FCoefficientTable:
    sign: int
    degrees: tuple[int, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def for_graph(cls, graph: PlumbingGraph, algebra: str) -> FCoefficientTable:
        return cls(algebra_sign(algebra), graph.degrees)

    def coefficient(self, l: Sequence[int]) -> Fraction:
        key = tuple(l)
        val = self._cache.get(key)
        if val is None:
            val = f_coeff(self.sign, self.degrees, key)
            self._cache[key] = val
        return val

    def box(self, L: int) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        for l in itertools.product(range(-L, L + 1), repeat=len(self.degrees)):
            yield l, self.coefficient(l)


def _nonzero_support(signs: Sequence[int], degree: int, L: int) -> list[int]:
    return [j for j in range(-L, L + 1) if any(vertex_coeff(s, degree, j) for s in signs)]


def parity_support_holds(table: FCoefficientTable, L: int) -> bool:
    """F_l vanishes unless l_v = deg(v) mod 2 for all v.

    F_l is a product of vertex factors, so entries outside the product of the
    per-vertex supports vanish and only that product is scanned.
    """
    supports = [_nonzero_support((table.sign,), d, L) for d in table.degrees]
    return all(
        table.coefficient(l) == 0 or all((lv - d) % 2 == 0 for lv, d in zip(l, table.degrees))
        for l in itertools.product(*supports)
    )


def plus_minus_relation_holds(degrees: Sequence[int], L: int) -> bool:
    """F+_l = -(i)^{sum l} F-_l on the box |l|_inf <= L (trees only)."""
    plus, minus = FCoefficientTable(1, tuple(degrees)), FCoefficientTable(-1, tuple(degrees))
    # outside the product of supports both sides vanish
    supports = [_nonzero_support((1, -1), d, L) for d in degrees]
    for l in itertools.product(*supports):
        cp, cm = plus.coefficient(l), minus.coefficient(l)
        total = sum(l)
        if total % 2:
            if cp or cm:
                return False
            continue
        # i^{sum l} is real for even sum
        if cp != -cm * (-1) ** ((total // 2) % 2):
            return False
    return True


# ---------------------------------------------------------------------------
# Series


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class QSeries:
    """q^offset times a finite series in increments 0 <= e < order."""

    offset: Fraction
    terms: dict
    order: Fraction

    @classmethod
    def from_exponents(cls, coeffs: dict, order: Rational) -> QSeries:
        order = Fraction(order)
        nonzero = {Fraction(e): Fraction(c) for e, c in coeffs.items() if c}
        if not nonzero:
            return cls(Fraction(0), {}, order)
        offset = min(nonzero)
        terms = {e - offset: c for e, c in nonzero.items() if e - offset < order}
        return cls(offset, dict(sorted(terms.items())), order)

    def coefficient(self, exponent: Rational) -> Fraction:
        return self.terms.get(Fraction(exponent) - self.offset, Fraction(0))

    def exponents(self) -> list[Fraction]:
        return [self.offset + e for e in self.terms]

    def to_json_obj(self) -> dict:
        return {
            "delta": _frac_str(self.offset),
            "coeffs": [[_frac_str(e), _frac_str(c)] for e, c in sorted(self.terms.items())],
        }

    def evaluate(self, qfun) -> complex:
        return sum(float(c) * qfun(self.offset + e) for e, c in self.terms.items())


@dataclass(frozen=True)
class ZhatSetup:
    graph: PlumbingGraph
    sign: int
    l0: tuple[int, ...]
    inv: list[list[Fraction]]
    adj: list[list[int]]
    det: int
    b_plus: int
    sigma: int
    trace: int

    @property
    def prefactor_exponent(self) -> Fraction:
        return Fraction(3 * self.sigma - self.trace, 4)

    @property
    def prefactor_sign(self) -> int:
        return -1 if self.b_plus % 2 else 1

    def member(self, l: Sequence[int]) -> bool:
        """l = l0 mod 2B Z^V."""
        diff = [a - b for a, b in zip(l, self.l0)]
        return all(x % (2 * self.det) == 0 for x in mat_vec(self.adj, diff))

    def k_of(self, l: Sequence[int]) -> list[Fraction]:
        diff = [a - b for a, b in zip(l, self.l0)]
        return [x / 2 for x in mat_vec(self.inv, diff)]

    def exponent(self, l: Sequence[int]) -> Fraction:
        return self.prefactor_exponent - quad(self.inv, l) / 4


def zhat_setup(graph: PlumbingGraph, spinc_label, algebra: str) -> ZhatSetup:
    b, s = spinc_label
    B = graph.B
    pres = presentation(B)
    det = abs(determinant(B))
    sgn = 1 if determinant(B) > 0 else -1
    inv = rational_inverse(B)
    adj = [[int(x * det * sgn) for x in row] for row in inv]
    # adj = |det| B^{-1} up to the sign of det, which membership ignores
    return ZhatSetup(
        graph=graph,
        sign=algebra_sign(algebra),
        l0=sigma_map(B, b, s),
        inv=inv,
        adj=adj,
        det=det,
        b_plus=pres.b_plus,
        sigma=pres.sigma,
        trace=sum(B[i][i] for i in range(len(B))),
    )


def _split_vertices(graph: PlumbingGraph) -> tuple[list[int], list[int]]:
    low = [v for v, d in enumerate(graph.degrees) if d <= 2]
    high = [v for v, d in enumerate(graph.degrees) if d > 2]
    return low, high


def _lattice_points(setup: ZhatSetup, radius: int) -> Iterator[tuple[int, ...]]:
    """Coset members l with F_l possibly nonzero and |l_h| <= radius on high-degree vertices."""
    graph = setup.graph
    low, high = _split_vertices(graph)
    n = graph.n
    choices = []
    for v in range(n):
        sup = vertex_support(graph.degrees[v])
        if sup is None:
            d = graph.degrees[v]
            sup = tuple(j for j in range(-radius, radius + 1) if (j - d) % 2 == 0 and abs(j) >= d - 2)
        choices.append(sup)
    for l in itertools.product(*choices):
        if setup.member(l):
            yield l


def _series_for_radius(setup: ZhatSetup, radius: int) -> dict[Fraction, Fraction]:
    out: dict[Fraction, Fraction] = {}
    for l in _lattice_points(setup, radius):
        c = f_coeff(setup.sign, setup.graph.degrees, l)
        if c:
            e = setup.exponent(l)
            out[e] = out.get(e, Fraction(0)) + c * setup.prefactor_sign
    return out


def zhat_series(
    algebra: str,
    graph: PlumbingGraph,
    spinc_label,
    order: Rational,
    max_radius: int = 1 << 14,
) -> QSeries:
    """Truncated Zhat series for one Spin^c label (b, s).

    The box on high-degree vertices doubles until two consecutive enlargements
    leave the truncated series unchanged.
    """
    if not weakly_negative_definite(graph):
        raise ConvergenceError("graph is not weakly negative definite; the series need not converge")
    setup = zhat_setup(graph, spinc_label, algebra)
    low, high = _split_vertices(graph)
    if not high:
        return QSeries.from_exponents(_series_for_radius(setup, 0), order)
    radius = 4
    history: list[QSeries] = []
    while radius <= max_radius:
        history.append(QSeries.from_exponents(_series_for_radius(setup, radius), order))
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            return history[-1]
        radius *= 2
    raise ConvergenceError("lattice box did not stabilise the truncated series")


def leading_exponent(graph: PlumbingGraph, spinc_label) -> Fraction:
    """(3 sigma - tr B)/4 - l0^t B^{-1} l0 / 4 for l0 = 2b + B(s - 1)."""
    setup = zhat_setup(graph, spinc_label, "osp")
    return setup.exponent(setup.l0)


# ---------------------------------------------------------------------------
# Evaluation at q = e^{4 pi i / r}


def _root_phase(r: int, exponent: Fraction) -> complex:
    """bold-q^exponent at bold-q = e^{4 pi i/r}, reduced exactly before exponentiating."""
    x = (2 * Fraction(exponent) / r) % 1
    return cmath.exp(2j * math.pi * float(x))


def _finite_eval(setup: ZhatSetup, r: int) -> complex:
    total = 0j
    for l in _lattice_points(setup, 0):
        c = f_coeff(setup.sign, setup.graph.degrees, l)
        if c:
            total += float(c) * _root_phase(r, setup.exponent(l))
    return setup.prefactor_sign * total


def richardson(hs: Sequence[float], values: Sequence[complex]) -> complex:
    """Polynomial extrapolation of values(h) to h = 0 (Neville)."""
    p = list(values)
    n = len(hs)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (hs[i + m] * p[i] - hs[i] * p[i + 1]) / (hs[i + m] - hs[i])
    return p[0]


@dataclass(frozen=True)
class _Line:
    """Coset members along one high-degree vertex with the others fixed."""

    low: tuple[int, ...]
    fixed: dict
    kbase: list[Fraction]
    w: list[Fraction]


def _single_high_lines(setup: ZhatSetup) -> tuple[int, list[_Line]]:
    graph = setup.graph
    low, high = _split_vertices(graph)
    if len(high) != 1:
        raise ConvergenceError("closed-form regularization needs exactly one vertex of degree >= 3")
    h = high[0]
    lines = []
    supports = [vertex_support(graph.degrees[v]) for v in low]
    for vals in itertools.product(*supports):
        fixed = dict(zip(low, vals))
        base = [fixed.get(v, 0) for v in range(graph.n)]
        kbase = setup.k_of(base)
        w = [setup.inv[i][h] / 2 for i in range(graph.n)]
        lines.append(_Line(tuple(vals), fixed, kbase, w))
    return h, lines


def _line_period_table(setup: ZhatSetup, line: _Line, r: int, T: int) -> np.ndarray:
    """Membership times root-of-unity phase for l_h in 0..T-1 (periodic mod T)."""
    out = np.zeros(T, dtype=complex)
    for rho in range(T):
        l = [line.fixed.get(v, rho) for v in range(setup.graph.n)]
        if setup.member(l):
            out[rho] = _root_phase(r, setup.exponent(l))
    return out


def _abel_eval(setup: ZhatSetup, r: int, damping: Sequence[float], max_terms: int) -> list[complex]:
    """t^{|k|_1}-damped sums for each t, vectorised over the high-degree vertex."""
    graph = setup.graph
    h, lines = _single_high_lines(setup)
    d = graph.degrees[h]
    T = 4 * r * setup.det
    per_line = []
    cutoff = 0
    for line in lines:
        low_c = f_coeff(setup.sign, [graph.degrees[v] for v in line.fixed], list(line.fixed.values()))
        if not low_c:
            continue
        kb = np.array([float(x) for x in line.kbase])
        w = np.array([float(x) for x in line.w])
        alpha = float(np.abs(w).sum())
        if alpha == 0:
            raise ConvergenceError("degenerate lattice direction")
        need = int((math.log(1e-18) / math.log(max(damping)) + float(np.abs(kb).sum())) / alpha) + 4
        cutoff = max(cutoff, need)
        per_line.append((float(low_c), kb, w, _line_period_table(setup, line, r, T)))
    if 2 * cutoff + 1 > max_terms:
        raise ConvergenceError("regularization did not converge: lattice too large")
    lh = np.arange(-cutoff, cutoff + 1)
    coeff = np.array([float(vertex_coeff(setup.sign, d, int(x))) for x in lh])
    results = []
    for t in damping:
        total = 0j
        for low_c, kb, w, table in per_line:
            knorm = np.abs(kb[None, :] + lh[:, None] * w[None, :]).sum(axis=1)
            total += low_c * np.sum(coeff * table[lh % T] * np.power(t, knorm))
        results.append(setup.prefactor_sign * total)
    return results


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _branch_polynomial(n: int) -> list[Fraction]:
    """Coefficients in x of (1/2) C((x - n)/2 + n - 1, n - 1)."""
    poly = [Fraction(1, 2)]
    for i in range(1, n):
        # factor ((x - n)/2 + i)/i
        poly = _poly_mul(poly, [Fraction(-n + 2 * i, 2 * i), Fraction(1, 2 * i)])
    return poly


@lru_cache(maxsize=None)
def _bernoulli_poly(k: int) -> tuple[Fraction, ...]:
    """Coefficients of the Bernoulli polynomial B_k(x)."""
    bern = [Fraction(1)]
    for m in range(1, k + 1):
        bern.append(-sum(math.comb(m + 1, j) * bern[j] for j in range(m)) / (m + 1))
    return tuple(math.comb(k, j) * bern[k - j] for j in range(k + 1))


def _poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _gauss_eval(setup: ZhatSetup, r: int) -> complex:
    """Exact t -> 1 limit of the t^{|k|_1}-damped sum, via Hurwitz zeta constant terms.

    Along each line the summand is a polynomial in l_h times a periodic factor
    (sign pattern, coset membership, root-of-unity phase).  The tail on either
    side is split into residue classes mod T; each class contributes Bernoulli
    polynomial values, and the poles in the damping parameter must cancel.
    """
    graph = setup.graph
    h, lines = _single_high_lines(setup)
    d = graph.degrees[h]
    n = d - 2
    T = 4 * r * setup.det
    poly = _branch_polynomial(n)
    total = 0j
    poles: dict[int, complex] = {}
    for line in lines:
        low_c = f_coeff(setup.sign, [graph.degrees[v] for v in line.fixed], list(line.fixed.values()))
        if not low_c:
            continue
        nz = [(kb, wi) for kb, wi in zip(line.kbase, line.w) if wi != 0]
        X = max([n] + [math.floor(abs(kb / wi)) + 1 for kb, wi in nz])

        def summand(lh: int) -> complex:
            if (lh - d) % 2 or abs(lh) < n:
                return 0j
            l = [line.fixed.get(v, lh) for v in range(graph.n)]
            if not setup.member(l):
                return 0j
            return float(low_c * vertex_coeff(setup.sign, d, lh)) * _root_phase(r, setup.exponent(l))

        for lh in range(-X + 1, X):
            total += summand(lh)
        alpha = sum(abs(wi) for wi in line.w)
        for side in (1, -1):
            beta = sum(
                (kb if wi * side > 0 else -kb) if wi != 0 else abs(kb)
                for kb, wi in zip(line.kbase, line.w)
            )
            shift = -beta / (alpha * T)
            psi = {}
            for rho in range(X, X + T):
                val = summand(side * rho)
                if val:
                    psi[rho] = val / float(_poly_eval(poly, Fraction(rho)))
            for k, ck in enumerate(poly):
                if not ck:
                    continue
                bern = _bernoulli_poly(k + 1)
                acc = 0j
                mass = 0j
                for rho, p in psi.items():
                    acc += p * float(_poly_eval(bern, Fraction(rho, T)) - shift ** (k + 1))
                    mass += p
                total += float(ck) * (-(T**k) / (k + 1)) * acc
                # pole terms: T^k mass k! (alpha T eps)^{-k-1} e^{-beta eps}
                for p_ in range(k + 1):
                    order = k + 1 - p_
                    coef = float(ck) * T**k * mass * math.factorial(k) / (float(alpha) * T) ** (k + 1)
                    coef *= (-float(beta)) ** p_ / math.factorial(p_)
                    poles[order] = poles.get(order, 0j) + coef
    scale = max(1.0, abs(total))
    if any(abs(v) > 1e-8 * scale for v in poles.values()):
        raise ConvergenceError("regularization did not converge: damped sum has a pole at t = 1")
    return setup.prefactor_sign * total


def zhat_root_eval(
    graph: PlumbingGraph,
    spinc_label,
    algebra: str,
    r: int,
    strategy: str = "abel",
    tolerance: float = 1e-6,
    max_terms: int = 5_000_000,
    damping: Sequence[float] = ABEL_DAMPING,
) -> complex:
    """Zhat at bold-q = e^{4 pi i/r}, regularized when the lattice sum is infinite.

    Graphs without vertices of degree >= 3 give finite sums and need no
    regularization.  Otherwise ``abel`` extrapolates the t^{|k|_1}-damped sum to
    t -> 1 numerically and ``gauss`` computes the same limit in closed form.
    """
    if strategy not in ("abel", "gauss"):
        raise ValueError(f"strategy must be 'abel' or 'gauss', got {strategy!r}")
    setup = zhat_setup(graph, spinc_label, algebra)
    low, high = _split_vertices(graph)
    if not high:
        return _finite_eval(setup, r)
    if strategy == "gauss":
        return _gauss_eval(setup, r)
    values = _abel_eval(setup, r, damping, max_terms)
    hs = [-math.log(t) for t in damping]
    full = richardson(hs, values)
    partial = richardson(hs[1:], values[1:])
    if abs(full - partial) > tolerance * max(1.0, abs(full)):
        raise ConvergenceError(
            f"regularization did not converge: extrapolations differ by {abs(full - partial):.3g}"
        )
    return full
