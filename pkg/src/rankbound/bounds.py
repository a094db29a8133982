"""Rank-dependent thresholds for teleportation usefulness.

For a ``d x d`` state of rank ``r`` that is useful (singlet fraction above
``1/d``):

* von Neumann entropy stays at or below the Shannon entropy of
  ``(1/d, rest spread evenly over r-1 entries)``, i.e.
  ``ln d + (1 - 1/d) ln((r-1)/(d-1))``;
* linear entropy stays at or below
  ``[r (D-1) - 2 d (d-1)] / [(D-1)(r-1)]`` with ``D = d^2``;
* for two qubits, the spectrum-maximal concurrence stays at or above the
  value of ``max(0, l1 - l3 - 2 sqrt(l2 l4))`` on that same extremal
  spectrum: 1/2, 1/4, 0 for ranks 2, 3, 4.

The von Neumann threshold is the entropy of the extremal distribution. Two
printed closed forms of it circulate with different prefactors on the log
term, ``(1 - 1/d)`` and ``(1 - 1/d^2)``; only the first equals the entropy of
that distribution, and it is the one used here.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import InvalidRank
from .measures import MeasureSet

CLASSIFY_TOL = 1e-12


def _check(d_local: int, rank: int) -> None:
    if d_local < 2:
        raise InvalidRank(f"d_local must be >= 2, got {d_local}")
    if not (2 <= rank <= d_local * d_local):
        raise InvalidRank(f"rank must lie in [2, {d_local * d_local}], got {rank}")


def extremal_distribution(d_local: int, rank: int) -> list[float]:
    """``(1/d, (1-1/d)/(r-1), ...)`` padded with zeros to length ``d^2``."""
    _check(d_local, rank)
    top = 1.0 / d_local
    rest = (1.0 - top) / (rank - 1)
    return [top] + [rest] * (rank - 1) + [0.0] * (d_local * d_local - rank)


def vn_entropy_bound(d_local: int, rank: int) -> float:
    _check(d_local, rank)
    top = 1.0 / d_local
    rest = (1.0 - top) / (rank - 1)
    return -top * math.log(top) - (1.0 - top) * math.log(rest)


def linear_entropy_bound_exact(d_local: int, rank: int) -> Fraction:
    _check(d_local, rank)
    rmax = d_local * d_local
    return Fraction(rank * (rmax - 1) - 2 * d_local * (d_local - 1), (rmax - 1) * (rank - 1))


def linear_entropy_bound(d_local: int, rank: int) -> float:
    return float(linear_entropy_bound_exact(d_local, rank))


def _exact_sqrt(q: Fraction) -> Fraction | None:
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def concurrence_lower_bound_exact(rank: int) -> Fraction:
    """``max(0, l1 - l3 - 2 sqrt(l2 l4))`` on the extremal rank-``r`` spectrum, in rationals."""
    if rank not in (2, 3, 4):
        raise InvalidRank(f"two-qubit rank must be 2, 3 or 4, got {rank}")
    rest = Fraction(1, 2) / (rank - 1)
    lam = [Fraction(1, 2)] + [rest] * (rank - 1) + [Fraction(0)] * (4 - rank)
    root = _exact_sqrt(lam[1] * lam[3])
    assert root is not None  # l2 * l4 is 0 or 1/36 for these spectra
    return max(Fraction(0), lam[0] - lam[2] - 2 * root)


def concurrence_lower_bound(rank: int) -> float:
    """Smallest spectrum-maximal concurrence of a useful two-qubit rank-``r`` state.

    Agrees with ``spectrum_cmax(extremal_distribution(2, rank))`` up to
    rounding; the rational evaluation makes C_4 exactly zero.
    """
    return float(concurrence_lower_bound_exact(rank))


@dataclass(frozen=True)
class FidelityCurves:
    upper_r4: float
    upper_r3: float
    lower_r2: float
    lower_alt: float
    lower: float


def fidelity_curves(c: float) -> FidelityCurves:
    """Fidelity-vs-concurrence curves at concurrence ``c``.

    ``upper_r4 = (2+C)/3`` is the general upper bound (rank-4 Werner curve),
    ``upper_r3 = (5+4C)/9`` the rank-3 Werner curve, ``lower_r2 = (1+2C)/3``
    the rank-2 Werner curve and ``lower = max((3+C)/6, (1+2C)/3)`` the general
    lower bound.
    """
    lower_r2 = (2.0 * c + 1.0) / 3.0
    lower_alt = (3.0 + c) / 6.0
    return FidelityCurves(
        upper_r4=(2.0 + c) / 3.0,
        upper_r3=(5.0 + 4.0 * c) / 9.0,
        lower_r2=lower_r2,
        lower_alt=lower_alt,
        lower=max(lower_r2, lower_alt),
    )


@dataclass(frozen=True)
class BoundSet:
    d_local: int
    rank: int
    vn_bound: float
    lin_bound: float
    lin_bound_exact: Fraction
    conc_bound: float | None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lin_bound_exact"] = str(self.lin_bound_exact)
        return out


def bound_set(d_local: int, rank: int) -> BoundSet:
    exact = linear_entropy_bound_exact(d_local, rank)
    return BoundSet(
        d_local=d_local,
        rank=rank,
        vn_bound=vn_entropy_bound(d_local, rank),
        lin_bound=float(exact),
        lin_bound_exact=exact,
        conc_bound=concurrence_lower_bound(rank) if d_local == 2 else None,
    )


@dataclass(frozen=True)
class Verdict:
    """Threshold comparisons for one state; margins are signed differences.

    ``vn_exceeds``/``lin_exceeds`` are None for rank-1 states (no bound),
    ``conc_below`` is None outside two qubits.
    """

    useful: bool
    useful_margin: float
    rank: int
    vn_exceeds: bool | None
    vn_margin: float | None
    lin_exceeds: bool | None
    lin_margin: float | None
    conc_below: bool | None
    conc_margin: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def classify(ms: MeasureSet, tol: float = CLASSIFY_TOL) -> Verdict:
    """Compare a MeasureSet against the bounds for its own numerical rank.

    All comparisons are strict; ``useful_margin = f - 1/d``,
    ``vn_margin = S - S*``, ``lin_margin = S_L - S_L*`` and
    ``conc_margin = C_r - C`` (positive means below the threshold). A flag
    is raised only when its margin exceeds ``tol``, so states built exactly
    on a threshold are not flipped by rounding.
    """
    d = ms.d_local
    useful_margin = ms.singlet_fraction - 1.0 / d
    vn_exc = vn_m = lin_exc = lin_m = conc_below = conc_m = None
    if ms.rank >= 2:
        vn_m = ms.vn_entropy - vn_entropy_bound(d, ms.rank)
        lin_m = ms.linear_entropy - linear_entropy_bound(d, ms.rank)
        vn_exc = vn_m > tol
        lin_exc = lin_m > tol
        if d == 2 and ms.concurrence is not None:
            conc_m = concurrence_lower_bound(ms.rank) - ms.concurrence
            conc_below = conc_m > tol
    return Verdict(
        useful=useful_margin > tol,
        useful_margin=useful_margin,
        rank=ms.rank,
        vn_exceeds=vn_exc,
        vn_margin=vn_m,
        lin_exceeds=lin_exc,
        lin_margin=lin_m,
        conc_below=conc_below,
        conc_margin=conc_m,
    )

