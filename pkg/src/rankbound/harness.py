"""Empirical checks of the rank-dependent bounds.

Every claim is reduced to a *violation margin* ``v`` per state: the claim
fails on that state iff ``v > tolerance``. Sampled claims draw rank-``r``
two-qubit states from the Hilbert-Schmidt-induced measure, trial ``k`` using
``trial_seed(seed, k)``; grid claims walk a deterministic grid. Reports are
reduced in trial order, so they do not depend on the worker count.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from . import _kernels
from .bounds import concurrence_lower_bound, linear_entropy_bound, vn_entropy_bound
from .measures import measure_all, measures_from_factors, spectrum_cmax, wootters_concurrence
from .states import (
    DensityMatrix,
    Spectrum,
    bell_diagonal,
    ginibre_factor,
    mems,
    state_from_factor,
    to_payload,
    trial_seed,
    werner,
)

SAMPLED_CLAIMS = (
    "vn_bound",
    "lin_bound",
    "conc_bound_state",
    "conc_bound_spectrum",
    "fid_upper_r4",
    "fid_upper_r3",
    "fid_lower",
    "eq9_dominates",
)
GRID_CLAIMS = ("mems_attains", "werner_saturates")
CLAIMS = SAMPLED_CLAIMS + GRID_CLAIMS
SEARCH_CLAIMS = ("vn_bound", "lin_bound", "conc_bound_state", "fid_upper_r3")

DEFAULT_TOLERANCE = 1e-9
MAX_COUNTEREXAMPLES = 10
CHUNK = 2048

_SURVEY = {"conc_bound_state", "fid_upper_r3", "fid_lower"}


def default_mode(claim_id: str, rank: int) -> str:
    if claim_id in _SURVEY or (claim_id == "vn_bound" and rank in (2, 3)):
        return "survey"
    return "assert"


@dataclass(frozen=True)
class ClaimSpec:
    claim_id: str
    rank: int
    trials: int
    seed: int = 0
    mode: str | None = None
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.claim_id not in CLAIMS:
            raise ValueError(f"unknown claim {self.claim_id!r}; choose from {', '.join(CLAIMS)}")
        if self.rank not in (2, 3, 4):
            raise ValueError(f"rank must be 2, 3 or 4, got {self.rank}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.claim_id == "fid_upper_r3" and self.rank != 3:
            raise ValueError("fid_upper_r3 applies to rank-3 states only")
        if self.mode is None:
            object.__setattr__(self, "mode", default_mode(self.claim_id, self.rank))
        if self.mode not in ("assert", "survey"):
            raise ValueError(f"mode must be 'assert' or 'survey', got {self.mode!r}")


@dataclass
class VerificationReport:
    claim_id: str
    rank: int
    trials: int
    seed: int
    mode: str
    tolerance: float
    trials_run: int
    violations: int
    worst_margin: float
    counterexamples: list = field(default_factory=list)
    wall_time_s: float = 0.0

    @property
    def violation_rate(self) -> float:
        return self.violations / self.trials_run if self.trials_run else 0.0

    @property
    def failed(self) -> bool:
        """True for an assert-mode run that found violations."""
        return self.mode == "assert" and self.violations > 0

    def to_dict(self, wall_time: bool = True) -> dict:
        out = {
            "claim_id": self.claim_id,
            "rank": self.rank,
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "counterexamples": self.counterexamples,
            "wall_time_s": self.wall_time_s,
            "trials_run": self.trials_run,
            "tolerance": self.tolerance,
            "violation_rate": self.violation_rate,
        }
        if not wall_time:
            del out["wall_time_s"]
        return out

    def to_json(self, wall_time: bool = True) -> str:
        return json.dumps(self.to_dict(wall_time), indent=2)


# --- margins -------------------------------------------------------------------

def claim_margins(claim_id: str, rank: int, m: dict) -> dict:
    """Named margin terms plus ``violation`` for one sampled claim.

    ``m`` maps measure names to scalars or equal-length arrays.
    """
    f_ex = m["singlet_fraction"] - 0.5
    c = m["concurrence"]
    fid = m["fidelity"]
    if claim_id == "vn_bound":
        t = {"entropy_excess": m["vn_entropy"] - vn_entropy_bound(2, rank), "fef_excess": f_ex}
        v = np.minimum(t["entropy_excess"], f_ex)
    elif claim_id == "lin_bound":
        t = {"linear_entropy_excess": m["linear_entropy"] - linear_entropy_bound(2, rank), "fef_excess": f_ex}
        v = np.minimum(t["linear_entropy_excess"], f_ex)
    elif claim_id == "conc_bound_state":
        t = {"fef_excess": f_ex, "concurrence_deficit": concurrence_lower_bound(rank) - c}
        v = np.minimum(f_ex, t["concurrence_deficit"])
    elif claim_id == "conc_bound_spectrum":
        t = {"fef_excess": f_ex, "cmax_deficit": concurrence_lower_bound(rank) - m["cmax"]}
        v = np.minimum(f_ex, t["cmax_deficit"])
    elif claim_id == "fid_upper_r4":
        t = {"fidelity_excess": fid - (2.0 + c) / 3.0}
        v = t["fidelity_excess"]
    elif claim_id == "fid_upper_r3":
        t = {"fidelity_excess": fid - (5.0 + 4.0 * c) / 9.0}
        v = t["fidelity_excess"]
    elif claim_id == "fid_lower":
        t = {"fidelity_deficit": np.maximum((3.0 + c) / 6.0, (2.0 * c + 1.0) / 3.0) - fid}
        v = t["fidelity_deficit"]
    elif claim_id == "eq9_dominates":
        t = {"concurrence_excess": c - m["cmax"]}
        v = t["concurrence_excess"]
    else:
        raise ValueError(f"{claim_id!r} is not a sampled claim")
    t["violation"] = v
    return t


def _state_measures(rho: DensityMatrix) -> dict:
    ms = measure_all(rho)
    out = ms.to_dict()
    out["cmax"] = spectrum_cmax(rho.spectrum())
    return out


def evaluate_state(claim_id: str, rank: int, rho: DensityMatrix) -> dict:
    """Margins of a sampled claim on one state, via the per-state measures."""
    return {k: float(v) for k, v in claim_margins(claim_id, rank, _state_measures(rho)).items()}


def _certificate(rho: DensityMatrix, margins: dict, trial: int | None = None) -> dict:
    meas = _state_measures(rho)
    entry = {
        "state": to_payload(rho),
        "measures": {k: meas[k] for k in (
            "vn_entropy", "linear_entropy", "purity", "concurrence",
            "singlet_fraction", "fidelity", "cmax", "rank",
        )},
        "margins": {k: float(v) for k, v in margins.items()},
    }
    if trial is not None:
        entry["trial"] = trial
    return entry


# --- sampled claims --------------------------------------------------------------

def _sample_chunk(spec: ClaimSpec, start: int, stop: int):
    a = np.stack([ginibre_factor(2, spec.rank, trial_seed(spec.seed, k)) for k in range(start, stop)])
    meas = measures_from_factors(a)
    return meas["rho"], claim_margins(spec.claim_id, spec.rank, meas)


def _run_sampled(spec: ClaimSpec, workers: int):
    bounds = [(s, min(s + CHUNK, spec.trials)) for s in range(0, spec.trials, CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda b: _sample_chunk(spec, *b), bounds))
    else:
        chunks = [_sample_chunk(spec, *b) for b in bounds]
    violations = 0
    worst = -np.inf
    examples = []
    for (start, _), (rho, margins) in zip(bounds, chunks):
        v = margins["violation"]
        bad = np.flatnonzero(v > spec.tolerance)
        violations += int(bad.size)
        worst = max(worst, float(np.max(v)))
        for i in bad[: MAX_COUNTEREXAMPLES - len(examples)]:
            state = DensityMatrix(rho[i], 2)
            examples.append(
                _certificate(state, {k: t[i] for k, t in margins.items()}, trial=start + int(i))
            )
    return spec.trials, violations, worst, examples


# --- grid claims ---------------------------------------------------------------

def spectrum_grid(rank: int, n: int) -> list[Spectrum]:
    """``n`` ordered two-qubit spectra of rank at most ``rank``.

    Points are barycentric lattice combinations of the flat spectra
    ``(1,0,0,0), (1/2,1/2,0,0), ...`` up to rank ``rank``; the lattice is
    refined until it has at least ``n`` points, then thinned evenly.
    """
    verts = np.array([[1.0 / k] * k + [0.0] * (4 - k) for k in range(1, rank + 1)])
    m = 1
    while True:
        pts = []
        for combo in combinations_with_replacement(range(rank), m):
            w = np.bincount(combo, minlength=rank) / m
            pts.append(w @ verts)
        if len(pts) >= n:
            break
        m += 1
    idx = np.unique(np.round(np.linspace(0, len(pts) - 1, n)).astype(int))
    return [Spectrum.from_eigenvalues(pts[i]) for i in idx]


def _werner_closed_forms(rank: int, p: float) -> tuple[float, float, float]:
    """``(f, S_L, C)`` of the rank-``rank`` Werner state."""
    if rank == 4:
        return (1 + 3 * p) / 4, 1 - p * p, max(0.0, (3 * p - 1) / 2)
    if rank == 3:
        return (1 + 2 * p) / 3, 8 * (1 - p * p) / 9, p
    return (1 + p) / 2, 2 * (1 - p * p) / 3, (1 + p) / 2


def werner_saturation_margins(rank: int, p: float) -> dict:
    """Margins for the statement that ``W_r(p)`` sits on the bounds.

    Along the family, ``S_L - S_L*`` and ``C - C_r`` must change sign exactly
    where ``f - 1/2`` does; the crossing terms are positive if the family
    ever lands on the wrong side. The closed-form terms are absolute
    deviations from the analytic expressions.
    """
    rho = werner(rank, p)
    ms = measure_all(rho)
    f_cf, sl_cf, c_cf = _werner_closed_forms(rank, p)
    f_ex = ms.singlet_fraction - 0.5
    sl_ex = ms.linear_entropy - linear_entropy_bound(2, rank)
    c_ex = ms.concurrence - concurrence_lower_bound(rank)
    t = {
        "useful_above_lin_bound": min(f_ex, sl_ex),
        "useless_below_lin_bound": min(-f_ex, -sl_ex),
        "useful_below_conc_bound": min(f_ex, -c_ex),
        "useless_above_conc_bound": min(-f_ex, c_ex),
        "closed_form_fef": abs(ms.singlet_fraction - f_cf),
        "closed_form_linear_entropy": abs(ms.linear_entropy - sl_cf),
        "closed_form_concurrence": abs(ms.concurrence - c_cf),
    }
    t["violation"] = max(t.values())
    return t


def _run_grid(spec: ClaimSpec):
    violations = 0
    worst = -np.inf
    examples = []
    if spec.claim_id == "mems_attains":
        points = spectrum_grid(spec.rank, spec.trials)
        for k, s in enumerate(points):
            rho = mems(s)
            gap = abs(wootters_concurrence(rho) - spectrum_cmax(s))
            worst = max(worst, gap)
            if gap > spec.tolerance:
                violations += 1
                if len(examples) < MAX_COUNTEREXAMPLES:
                    examples.append(_certificate(rho, {"abs_gap": gap, "violation": gap}, trial=k))
        return len(points), violations, worst, examples
    grid = np.linspace(0.0, 1.0, spec.trials) if spec.trials > 1 else np.array([0.0])
    for k, p in enumerate(grid):
        t = werner_saturation_margins(spec.rank, float(p))
        worst = max(worst, t["violation"])
        if t["violation"] > spec.tolerance:
            violations += 1
            if len(examples) < MAX_COUNTEREXAMPLES:
                examples.append(_certificate(werner(spec.rank, float(p)), t, trial=k))
    return len(grid), violations, worst, examples


def run_claim(spec: ClaimSpec, workers: int = 1) -> VerificationReport:
    t0 = time.perf_counter()
    if spec.claim_id in GRID_CLAIMS:
        n, violations, worst, examples = _run_grid(spec)
    else:
        n, violations, worst, examples = _run_sampled(spec, max(1, int(workers)))
    return VerificationReport(
        claim_id=spec.claim_id,
        rank=spec.rank,
        trials=spec.trials,
        seed=spec.seed,
        mode=spec.mode,
        tolerance=spec.tolerance,
        trials_run=n,
        violations=violations,
        worst_margin=float(worst),
        counterexamples=examples,
        wall_time_s=time.perf_counter() - t0,
    )


# --- counterexample search -----------------------------------------------------

_SEARCH_CODES = {
    "vn_bound": _kernels.OBJ_VN_BOUND,
    "lin_bound": _kernels.OBJ_LIN_BOUND,
    "conc_bound_state": _kernels.OBJ_CONC_STATE,
    "fid_upper_r3": _kernels.OBJ_FID_UPPER_R3,
}


@dataclass
class SearchResult:
    claim_id: str
    rank: int
    restarts: int
    seed: int
    tolerance: float
    margin: float
    state: DensityMatrix
    margins: dict
    evaluations: int

    @property
    def found(self) -> bool:
        return self.margin > self.tolerance

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "rank": self.rank,
            "restarts": self.restarts,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "margin": self.margin,
            "found": self.found,
            "evaluations": self.evaluations,
            "candidate": _certificate(self.state, self.margins),
        }


def _search_bound(claim_id: str, rank: int) -> float:
    if claim_id == "vn_bound":
        return vn_entropy_bound(2, rank)
    if claim_id == "lin_bound":
        return linear_entropy_bound(2, rank)
    if claim_id == "conc_bound_state":
        return concurrence_lower_bound(rank)
    return 0.0


def search_counterexample(
    claim_id: str,
    rank: int,
    restarts: int = 64,
    seed: int = 0,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    xtol: float = 1e-10,
    max_evals: int = 10_000,
) -> SearchResult:
    """Maximize a claim's violation margin over rank-``rank`` states.

    States are parametrized by the real and imaginary parts of a ``4 x rank``
    Ginibre factor; each restart runs Nelder-Mead from a standard-normal
    point drawn from ``trial_seed(seed, k)``. ``margin`` is the best raw
    violation margin; a value above ``tolerance`` is a counterexample.
    """
    if claim_id not in SEARCH_CLAIMS:
        raise ValueError(f"search supports {', '.join(SEARCH_CLAIMS)}, got {claim_id!r}")
    if rank not in (2, 3, 4):
        raise ValueError(f"rank must be 2, 3 or 4, got {rank}")
    if claim_id == "fid_upper_r3" and rank != 3:
        raise ValueError("fid_upper_r3 applies to rank-3 states only")
    n = 8 * rank
    starts = np.stack([np.random.default_rng(trial_seed(seed, k)).standard_normal(n) for k in range(restarts)])
    dummy = np.zeros((4, 4), dtype=np.complex128)
    xs, vals, evals = _kernels.multistart(
        _SEARCH_CODES[claim_id], starts, 0.5, dummy, 2, rank, _search_bound(claim_id, rank), xtol, max_evals
    )
    best = int(np.argmax(vals))
    x = xs[best]
    a = (x[: n // 2] + 1j * x[n // 2:]).reshape(4, rank)
    state = state_from_factor(a, 2)
    margins = claim_margins(claim_id, rank, measures_from_factors(a[None]))
    return SearchResult(
        claim_id=claim_id,
        rank=rank,
        restarts=restarts,
        seed=seed,
        tolerance=tolerance,
        margin=float(vals[best]),
        state=state,
        margins={k: float(v[0]) for k, v in margins.items()},
        evaluations=int(np.sum(evals)),
    )


def bell_diagonal_certificate(a: float = 0.6) -> dict:
    """Rank-2 state ``a phi+ + (1-a) phi-`` against the per-state concurrence claim.

    For ``1/2 < a < 3/4`` it is useful (``f = a``) yet has ``C = 2a - 1`` below
    the rank-2 threshold of 1/2.
    """
    rho = bell_diagonal((a, 1.0 - a, 0.0, 0.0))
    return _certificate(rho, evaluate_state("conc_bound_state", 2, rho))
