"""Spherical functions of the nearest-neighbor averaging operator.

The radial gamma-eigenfunction normalized at the root is produced by its
three-term recurrence, in exact rationals when gamma is rational and in
double precision otherwise.  Growth along a ray is governed by the 2x2
transfer matrix ``M`` that advances ``(f_{2k}, f_{2k-1})`` by two levels.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

from .tree import TreeParams

ALIGN_RTOL = 1e-10
BOUNDARY_RTOL = 1e-9
SUP_TEST_LEVELS = 10_000


def is_rational(x) -> bool:
    return isinstance(x, Rational)


def as_scalar(gamma, exact: bool | None = None):
    """Normalize gamma to a Fraction (exact mode) or a float/complex."""
    if exact is None:
        exact = is_rational(gamma)
    if exact:
        if not isinstance(gamma, (Rational, float, str)):
            raise TypeError(f"exact mode needs a rational gamma, got {gamma!r}")
        return Fraction(gamma)
    if isinstance(gamma, complex):
        return gamma if gamma.imag else gamma.real
    return float(gamma)


def _degree(params: TreeParams, n: int) -> int:
    # q_n in the recurrence: degree of a level-n vertex, n > 0
    return params.degree(n)


@dataclass(frozen=True)
class SphericalEval:
    params: TreeParams
    gamma: object
    values: tuple

    @property
    def exact(self) -> bool:
        return isinstance(self.gamma, Fraction)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def residuals(self) -> list:
        """Recurrence residuals at the root and every interior level."""
        f, g, p = self.values, self.gamma, self.params
        out = [g * f[0] - f[1]] if len(f) > 1 else []
        for n in range(1, len(f) - 1):
            q = _degree(p, n)
            out.append((q + 1) * g * f[n] - f[n - 1] - q * f[n + 1])
        return out

    def is_real(self, tol: float = 0.0) -> bool:
        for x in self.values:
            if isinstance(x, complex) and abs(x.imag) > tol * max(1.0, abs(x)):
                return False
        return True


def eval_spherical(params: TreeParams, gamma, N: int, exact: bool | None = None) -> SphericalEval:
    """Values f_0..f_N of the spherical function with eigenvalue ``gamma``."""
    if N < 0:
        raise ValueError(f"need N >= 0, got {N}")
    g = as_scalar(gamma, exact)
    one = Fraction(1) if isinstance(g, Fraction) else 1.0
    values = [one]
    if N >= 1:
        values.append(g * one)
    for n in range(1, N):
        q = _degree(params, n)
        values.append(((q + 1) * g * values[n] - values[n - 1]) / q)
    return SphericalEval(params, g, tuple(values))


def spherical_zero(params: TreeParams, n: int):
    """Closed form of the eigenvalue-0 spherical function at distance ``n``."""
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    if n % 2:
        return Fraction(0)
    half = n // 2
    return Fraction((-1) ** half, params.q_minus**half)


class RadialPolynomial:
    """Polynomial with exact rational coefficients in ascending degree."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Sequence):
        coeffs = [Fraction(c) for c in coefficients]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients = tuple(coeffs) if coeffs else (Fraction(0),)

    @classmethod
    def constant(cls, c) -> "RadialPolynomial":
        return cls([c])

    @classmethod
    def x(cls) -> "RadialPolynomial":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        if self.coefficients == (0,):
            return -1
        return len(self.coefficients) - 1

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coefficients):
            acc = acc * x + (c if isinstance(x, (Fraction, int)) else float(c))
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        a, b = self.coefficients, other.coefficients
        n = max(len(a), len(b))
        return RadialPolynomial(
            [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
        )

    __radd__ = __add__

    def __neg__(self):
        return RadialPolynomial([-c for c in self.coefficients])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if not isinstance(other, RadialPolynomial):
            return RadialPolynomial([c * Fraction(other) for c in self.coefficients])
        out = [Fraction(0)] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            if a:
                for j, b in enumerate(other.coefficients):
                    out[i + j] += a * b
        return RadialPolynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        s = Fraction(scalar)
        return RadialPolynomial([c / s for c in self.coefficients])

    def compose(self, inner: "RadialPolynomial") -> "RadialPolynomial":
        acc = RadialPolynomial.constant(0)
        for c in reversed(self.coefficients):
            acc = acc * inner + c
        return acc

    def __eq__(self, other):
        if not isinstance(other, RadialPolynomial):
            other = _as_poly(other)
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"RadialPolynomial({[str(c) for c in self.coefficients]})"


def _as_poly(p) -> RadialPolynomial:
    return p if isinstance(p, RadialPolynomial) else RadialPolynomial.constant(p)


def q_polynomials(params: TreeParams, n: int) -> list[RadialPolynomial]:
    """Q_0..Q_n with Q_k(gamma) the spherical value at distance k."""
    x = RadialPolynomial.x()
    polys = [RadialPolynomial.constant(1), x]
    for k in range(1, n):
        q = _degree(params, k)
        polys.append(((q + 1) * x * polys[k] - polys[k - 1]) / q)
    return polys[: n + 1]


def q_polynomial(params: TreeParams, n: int) -> RadialPolynomial:
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    return q_polynomials(params, n)[n]


def p_polynomials(params: TreeParams, n: int) -> list[RadialPolynomial]:
    """P_0..P_n with mu_{2k} = P_k(mu_2) in the radial algebra on V+.

    Comes from mu_2 * mu_{2k} = (mu_{2k-2} + (q- - 1) mu_{2k} + q+ q- mu_{2k+2}) / ((q+ + 1) q-).
    """
    qp, qm = params.q_plus, params.q_minus
    x = RadialPolynomial.x()
    polys = [RadialPolynomial.constant(1), x]
    for k in range(1, n):
        nxt = ((qp + 1) * qm * x * polys[k] - polys[k - 1] - (qm - 1) * polys[k]) / (qp * qm)
        polys.append(nxt)
    return polys[: n + 1]


def p_polynomial(params: TreeParams, n: int) -> RadialPolynomial:
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    return p_polynomials(params, n)[n]


@dataclass(frozen=True)
class TransferMatrix:
    entries: tuple  # ((a, b), (c, d))

    @property
    def trace(self):
        return self.entries[0][0] + self.entries[1][1]

    @property
    def det(self):
        (a, b), (c, d) = self.entries
        return a * d - b * c

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        (a, b), (c, d) = self.entries
        (e, f), (g, h) = other.entries
        return TransferMatrix(((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h)))

    def apply(self, vec):
        (a, b), (c, d) = self.entries
        x, y = vec
        return (a * x + b * y, c * x + d * y)

    def eigenvalues(self) -> tuple[complex, complex]:
        t = complex(self.trace)
        dt = complex(self.det)
        root = cmath.sqrt(t * t - 4 * dt)
        l1, l2 = (t + root) / 2, (t - root) / 2
        return (l1, l2) if abs(l1) >= abs(l2) else (l2, l1)


def _step_matrix(q: int, gamma) -> TransferMatrix:
    inv = Fraction(1, q) if isinstance(gamma, Fraction) else 1 / q
    return TransferMatrix((((q + 1) * gamma * inv, -inv), (1, 0)))


def transfer_matrices(params: TreeParams, gamma, exact: bool | None = None):
    """``(A_plus, A_minus, M)`` with ``M = A_minus @ A_plus``.

    ``A_q`` maps ``(f_n, f_{n-1})`` to ``(f_{n+1}, f_n)`` at a level of degree q;
    ``M`` maps ``(f_{2k}, f_{2k-1})`` to ``(f_{2k+2}, f_{2k+1})``.
    """
    g = as_scalar(gamma, exact)
    a_plus = _step_matrix(params.q_plus, g)
    a_minus = _step_matrix(params.q_minus, g)
    return a_plus, a_minus, a_minus @ a_plus


def _iterate(params: TreeParams, gamma, levels: int):
    """Yield (n, f_n, log_scale) with f_n renormalized against overflow."""
    f_prev, f_cur = 1.0, gamma * 1.0
    log_scale = 0.0
    yield 0, f_prev, 0.0
    if levels >= 1:
        yield 1, f_cur, 0.0
    for n in range(1, levels):
        q = params.degree(n)
        f_prev, f_cur = f_cur, ((q + 1) * gamma * f_cur - f_prev) / q
        size = max(abs(f_prev), abs(f_cur))
        if size > 1e100 or (0 < size < 1e-100):
            f_prev, f_cur = f_prev / size, f_cur / size
            log_scale += math.log(size)
        yield n + 1, f_cur, log_scale


def sup_profile(params: TreeParams, gamma, levels: int = SUP_TEST_LEVELS) -> tuple[float, float]:
    """``(max |f_n| for n <= levels/2, max |f_n| for n <= levels)`` by direct recurrence."""
    g = complex(gamma) if isinstance(gamma, complex) else float(gamma)
    half, first, total = levels // 2, 0.0, 0.0
    for n, f, log_scale in _iterate(params, g, levels):
        mag = math.inf if log_scale > 0 else abs(f)
        total = max(total, mag)
        if n <= half:
            first = total
    return first, total


def growth_rate(params: TreeParams, gamma, steps: int = 20_000) -> float:
    """Per-two-level growth of ``|(f_{2k}, f_{2k-1})|`` measured along the recurrence.

    Least-squares slope of the log-norm over the second half of the run;
    independent of the transfer-matrix eigenvalues.
    """
    g = complex(gamma) if isinstance(gamma, complex) else float(gamma)
    logs = []
    prev = None
    for n, f, log_scale in _iterate(params, g, 2 * steps):
        if n % 2 == 0 and n > 0:
            norm = math.hypot(abs(f), abs(prev))
            logs.append(math.log(norm) + log_scale if norm > 0 else -math.inf)
        prev = f
    tail = logs[len(logs) // 2 :]
    if any(math.isinf(x) for x in tail):
        return 0.0
    k = len(tail)
    mean_x = (k - 1) / 2
    mean_y = sum(tail) / k
    num = sum((i - mean_x) * (y - mean_y) for i, y in enumerate(tail))
    den = sum((i - mean_x) ** 2 for i in range(k))
    return math.exp(num / den)


@dataclass(frozen=True)
class Classification:
    gamma: object
    bounded: bool
    growth: float
    growth_exact: Fraction | None
    lp_exponent: float | None
    aligned: bool
    eigenvalues: tuple
    method: str


def classify(params: TreeParams, gamma, exact: bool | None = None) -> Classification:
    """Boundedness and l^p decay of the spherical function with eigenvalue ``gamma``.

    ``growth`` is the modulus of the transfer-matrix eigenvalue that actually
    drives ``(f_{2k}, f_{2k-1})``: the dominant one unless the starting vector
    lies in the subdominant eigenspace.  ``lp_exponent`` is p* with
    ``phi in l^p(V)`` iff ``p > p*``; ``None`` when unbounded.
    """
    g = as_scalar(gamma, exact)
    _, _, M = transfer_matrices(params, g)
    eigs = M.eigenvalues()
    start = (1, g)  # M^k (1, gamma) = (f_{2k}, f_{2k-1})
    x, y = M.apply(start)
    exact_mode = isinstance(g, Fraction)

    if exact_mode:
        aligned = y - g * x == 0
    else:
        scale = math.hypot(abs(x), abs(y)) * math.hypot(1.0, abs(g))
        aligned = abs(y - g * x) <= ALIGN_RTOL * scale

    growth_exact = None
    method = "dominant-eigenvalue"
    if aligned:
        growth = abs(complex(x))
        method = "aligned-eigenvector"
        if exact_mode:
            growth_exact = abs(x)
        else:
            measured = growth_rate(params, g, steps=2000)
            if not math.isclose(measured, growth, rel_tol=1e-2, abs_tol=1e-12):
                growth, aligned, method = abs(eigs[0]), False, "dominant-eigenvalue(direct-check)"
    else:
        growth = abs(eigs[0])

    if exact_mode:
        bounded = _bounded_exact(M, x if aligned else None)
    elif abs(growth - 1.0) <= BOUNDARY_RTOL:
        first, total = sup_profile(params, g)
        bounded = total <= first * (1 + 1e-6)
        method += "+sup-test"
        if bounded:
            growth = 1.0
    else:
        bounded = growth <= 1.0

    if not bounded:
        lp = None
    elif growth >= 1.0:
        lp = math.inf
    elif growth == 0.0:
        lp = 0.0
    else:
        lp = math.log(params.q_plus * params.q_minus) / -math.log(growth)
    return Classification(g, bounded, growth, growth_exact, lp, aligned, eigs, method)


def _bounded_exact(M: TransferMatrix, aligned_eigenvalue) -> bool:
    if aligned_eigenvalue is not None:
        return abs(aligned_eigenvalue) <= 1
    t, d = M.trace, M.det
    if t * t - 4 * d < 0:
        # complex pair of modulus sqrt(d)
        return d <= 1
    return 1 - t + d >= 0 and 1 + t + d >= 0 and abs(t) <= 2


def log_abs_values(params: TreeParams, gamma, levels: int) -> list[float]:
    """``log |f_n|`` for n = 0..levels (``-inf`` where f_n = 0), overflow-safe."""
    g = complex(gamma) if isinstance(gamma, complex) else float(gamma)
    out = []
    for _, f, log_scale in _iterate(params, g, levels):
        out.append(math.log(abs(f)) + log_scale if f != 0 else -math.inf)
    return out
