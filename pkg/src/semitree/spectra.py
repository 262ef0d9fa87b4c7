"""Real spectral sets of the averaging operator, located numerically.

Endpoints come from bisection on the transfer-matrix classification and are
confirmed by a second bisection that only looks at growth measured along
the recurrence itself.  No closed-form endpoint appears here.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .spherical import classify, growth_rate, log_abs_values
from .tree import TreeParams, sphere_size

TEMPERED_RTOL = 1e-9
DIRECT_MARGIN = 1e-3
SCAN_POINTS = 1000


def _bisect(pred: Callable[[float], bool], inside: float, outside: float, tol: float) -> float:
    """Boundary between ``inside`` (pred true) and ``outside`` (pred false)."""
    while abs(outside - inside) > tol:
        mid = (inside + outside) / 2
        if pred(mid):
            inside = mid
        else:
            outside = mid
    return (inside + outside) / 2


def tempered_threshold(params: TreeParams) -> float:
    return 1 / math.sqrt(params.q_plus * params.q_minus)


def is_tempered(params: TreeParams, gamma) -> bool:
    cls = classify(params, gamma)
    return cls.bounded and cls.growth <= tempered_threshold(params) * (1 + TEMPERED_RTOL)


def is_bounded(params: TreeParams, gamma) -> bool:
    return classify(params, gamma).bounded


@dataclass(frozen=True)
class Endpoint:
    value: float
    tol: float
    confirmed: bool
    direct_value: float | None = None
    direct_checks: dict | None = None


def s1_real_interval(params: TreeParams, tol: float = 1e-10) -> Endpoint:
    """Right endpoint e1 of the real bounded set [-e1, e1]."""
    hi = 2.0
    while is_bounded(params, hi):
        hi *= 2
    e1 = _bisect(lambda g: is_bounded(params, g), 0.0, hi, tol)
    below, above = e1 - 2 * tol, e1 + 2 * tol
    rate_below = growth_rate(params, below, steps=10_000)
    rate_above = growth_rate(params, above, steps=10_000)
    confirmed = rate_below <= 1 + 1e-12 and rate_above > 1 and rate_above > rate_below
    return Endpoint(e1, tol, confirmed, None, {"rate_below": rate_below, "rate_above": rate_above})


def _direct_tempered(params: TreeParams, gamma: float, steps: int = 20_000) -> bool:
    return growth_rate(params, gamma, steps) <= tempered_threshold(params) * (1 + DIRECT_MARGIN)


def s2_real_interval(params: TreeParams, tol: float = 1e-10, confirm: bool = True) -> tuple[Endpoint, float]:
    """Outer endpoint e2 of the tempered set and the inner edge of its gap.

    The tempered real set is ``{e_in <= |gamma| <= e2}``, plus ``gamma = 0``
    when the eigenvalue-0 spherical function decays fast enough.
    """
    grid = [i / SCAN_POINTS for i in range(1, SCAN_POINTS + 1)]
    flags = [is_tempered(params, g) for g in grid]
    if not any(flags):
        raise RuntimeError("no tempered eigenvalue found on the scan grid")
    top = max(i for i, ok in enumerate(flags) if ok)
    if top + 1 < len(grid):
        e2 = _bisect(lambda g: is_tempered(params, g), grid[top], grid[top + 1], tol)
    else:
        e2 = _bisect(lambda g: is_tempered(params, g), grid[top], 2.0, tol)

    first = min(i for i, ok in enumerate(flags) if ok)
    if first > 0:
        inner = _bisect(lambda g: is_tempered(params, g), grid[first], grid[first - 1], tol)
    elif is_tempered(params, tol):
        inner = 0.0
    else:
        inner = _bisect(lambda g: is_tempered(params, g), grid[0], tol, tol)

    direct = None
    checks = None
    confirmed = False
    if confirm:
        lo, hi = e2 - 1e-3, e2 + 1e-3
        if _direct_tempered(params, lo) and not _direct_tempered(params, hi):
            direct = _bisect(lambda g: _direct_tempered(params, g), lo, hi, 1e-9)
            confirmed = abs(direct - e2) <= 1e-6
        checks = {"bracket": [lo, hi], "margin": DIRECT_MARGIN}
    return Endpoint(e2, tol, confirmed, direct, checks), inner


@dataclass(frozen=True)
class AtomReport:
    present: bool
    p_star: float
    growth_at_zero: float


def atom_at_zero(params: TreeParams) -> AtomReport:
    cls = classify(params, Fraction(0))
    return AtomReport(cls.lp_exponent < 2, cls.lp_exponent, cls.growth)


def lp_membership_scan(params: TreeParams, gamma, p_grid: Sequence[float], N: int = 2000) -> list[dict]:
    """Partial l^p(V) sums of phi to level N and the ratio-test verdict for each p.

    Sums are reported as natural logs since they overflow for divergent p.
    """
    cls = classify(params, gamma)
    logs = log_abs_values(params, gamma, N)
    log_sizes = [math.log(sphere_size(params, n)) for n in range(N + 1)]
    qq = params.q_plus * params.q_minus
    rows = []
    for p in p_grid:
        terms = [ls + p * lf for ls, lf in zip(log_sizes, logs) if lf != -math.inf]
        peak = max(terms)
        log_sum = peak + math.log(sum(math.exp(t - peak) for t in terms))
        if cls.bounded:
            ratio = qq * cls.growth**p
            status = "converged" if ratio < 1 else "diverging"
        else:
            ratio, status = math.inf, "diverging"
        rows.append(
            {
                "p": p,
                "ratio": ratio,
                "log_partial_sum": log_sum,
                "log_last_term": terms[-1],
                "status": status,
            }
        )
    return rows


@dataclass(frozen=True)
class SpectrumReport:
    params: TreeParams
    s1_real: tuple[float, float]
    s2_real: tuple[float, float]
    s2_gap_inner_edge: float
    zero_tempered: bool
    atom_at_zero: bool
    p_crit: float
    tol: float
    s1_confirmed: bool
    s2_confirmed: bool
    s2_direct_endpoint: float | None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["params"] = {"q_plus": self.params.q_plus, "q_minus": self.params.q_minus}
        return out


def spectrum_report(params: TreeParams, tol: float = 1e-10) -> SpectrumReport:
    e1 = s1_real_interval(params, tol)
    e2, inner = s2_real_interval(params, tol)
    atom = atom_at_zero(params)
    return SpectrumReport(
        params=params,
        s1_real=(-e1.value, e1.value),
        s2_real=(-e2.value, e2.value),
        s2_gap_inner_edge=inner,
        zero_tempered=is_tempered(params, Fraction(0)),
        atom_at_zero=atom.present,
        p_crit=atom.p_star,
        tol=tol,
        s1_confirmed=e1.confirmed,
        s2_confirmed=e2.confirmed,
        s2_direct_endpoint=e2.direct_value,
    )
