"""Scalar quantities of a bipartite state.

Per-state functions take a DensityMatrix. The ``*_batch`` helpers work on
stacks of matrices (or Ginibre factors) and back the Monte-Carlo harness;
the per-state functions are thin wrappers over them so both paths share
one implementation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .errors import InvalidSpectrum, NegativeEigenvalue, UnsupportedDimension
from .kernel import RANK_REL_TOL, numerical_rank
from .states import DensityMatrix, Spectrum, magic_matrix, trial_seed

NEG_TOL = 1e-10
DEFAULT_RESTARTS = 32

_MAGIC = magic_matrix()
_SPIN_FLIP = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=np.complex128
)


# --- batch primitives ---------------------------------------------------------

def eigenvalues_batch(m: np.ndarray) -> np.ndarray:
    """Descending eigenvalues of a stack of Hermitian matrices, dust zeroed.

    Values within ``RANK_REL_TOL * max`` of zero become exactly 0; anything
    more negative than ``-NEG_TOL`` raises NegativeEigenvalue.
    """
    lam = np.linalg.eigvalsh(m)[..., ::-1]
    lo = lam[..., -1].min() if lam.size else 0.0
    if lo < -NEG_TOL:
        raise NegativeEigenvalue(f"eigenvalue {lo:.3e} below -{NEG_TOL:.0e}")
    cutoff = RANK_REL_TOL * lam[..., :1]
    return np.where(lam > cutoff, np.minimum(lam, 1.0), 0.0)


def entropy_of_values(lam: np.ndarray) -> np.ndarray:
    """``-sum l ln l`` along the last axis with ``0 ln 0 = 0``."""
    safe = np.where(lam > 0, lam, 1.0)
    return -np.sum(lam * np.log(safe), axis=-1)


def purity_batch(m: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(m) ** 2, axis=(-2, -1))


def linear_entropy_from_purity(purity, dim_total: int):
    return dim_total / (dim_total - 1) * (1.0 - purity)


def cmax_batch(lam: np.ndarray) -> np.ndarray:
    """``max(0, l1 - l3 - 2 sqrt(l2 l4))`` along the last axis."""
    l1, l2, l3, l4 = (lam[..., k] for k in range(4))
    return np.maximum(0.0, l1 - l3 - 2.0 * np.sqrt(l2 * l4))


def fef_magic_batch(m: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of ``Re(E^dagger rho E)`` in the magic basis."""
    mm = _MAGIC.conj().T @ m @ _MAGIC
    return np.linalg.eigvalsh(mm.real)[..., -1]


def concurrence_from_factor_batch(b: np.ndarray) -> np.ndarray:
    """Wootters concurrence of ``rho = B B^dagger`` for stacked ``4 x k`` factors.

    The singular values of ``B^dagger Y B*`` are the square roots of the
    eigenvalues of ``rho Y rho* Y``.
    """
    tau = np.swapaxes(b.conj(), -1, -2) @ _SPIN_FLIP @ b.conj()
    sv = np.linalg.svd(tau, compute_uv=False)
    return np.maximum(0.0, sv[..., 0] - np.sum(sv[..., 1:], axis=-1))


def factor_of(m: np.ndarray) -> np.ndarray:
    """``V sqrt(diag(lam))`` with dust eigenvalues zeroed, so ``F F^dagger = m``."""
    w, v = np.linalg.eigh(m)
    lo = w[..., 0].min()
    if lo < -NEG_TOL:
        raise NegativeEigenvalue(f"eigenvalue {lo:.3e} below -{NEG_TOL:.0e}")
    cutoff = RANK_REL_TOL * w[..., -1:]
    w = np.where(w > cutoff, w, 0.0)
    return v * np.sqrt(w)[..., None, :]


def measures_from_factors(a: np.ndarray) -> dict:
    """Two-qubit measures of ``A A^dagger / Tr`` for a stack ``(N, 4, r)``.

    Returns arrays keyed ``rho, lam, vn_entropy, linear_entropy, purity,
    singlet_fraction, fidelity, concurrence, cmax``.
    """
    tr = np.sum(np.abs(a) ** 2, axis=(-2, -1))
    b = a / np.sqrt(tr)[..., None, None]
    rho = b @ np.swapaxes(b.conj(), -1, -2)
    rho = 0.5 * (rho + np.swapaxes(rho.conj(), -1, -2))
    lam = eigenvalues_batch(rho)
    pur = purity_batch(rho)
    f = fef_magic_batch(rho)
    return {
        "rho": rho,
        "lam": lam,
        "vn_entropy": entropy_of_values(lam),
        "linear_entropy": linear_entropy_from_purity(pur, 4),
        "purity": pur,
        "singlet_fraction": f,
        "fidelity": (2.0 * f + 1.0) / 3.0,
        "concurrence": concurrence_from_factor_batch(b),
        "cmax": cmax_batch(lam),
    }


# --- per-state API -------------------------------------------------------------

def _require_qubits(rho: DensityMatrix, what: str) -> None:
    if rho.d_local != 2:
        raise UnsupportedDimension(f"{what} is defined for two qubits only, got d_local={rho.d_local}")


def purity(rho: DensityMatrix) -> float:
    return float(purity_batch(rho.matrix))


def vn_entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in nats."""
    return float(entropy_of_values(eigenvalues_batch(rho.matrix)))


def linear_entropy(rho: DensityMatrix) -> float:
    """``D/(D-1) (1 - Tr rho^2)`` with ``D`` the total dimension."""
    return float(linear_entropy_from_purity(purity(rho), rho.dim_total))


def wootters_concurrence(rho: DensityMatrix) -> float:
    _require_qubits(rho, "concurrence")
    return float(concurrence_from_factor_batch(factor_of(rho.matrix)))


def spectrum_cmax(spec) -> float:
    """Largest concurrence reachable by any two-qubit state with this spectrum."""
    s = spec if isinstance(spec, Spectrum) else Spectrum(tuple(spec))
    if len(s) != 4:
        raise InvalidSpectrum(f"need 4 eigenvalues, got {len(s)}")
    return float(cmax_batch(np.asarray(s.values)))


def singlet_fraction_magic(rho: DensityMatrix) -> float:
    _require_qubits(rho, "magic-basis singlet fraction")
    return float(fef_magic_batch(rho.matrix))


def _fef_starts(n_params: int, restarts: int, seed: int) -> np.ndarray:
    starts = np.empty((restarts, n_params))
    for k in range(restarts):
        starts[k] = np.random.default_rng(trial_seed(seed, k)).uniform(-math.pi, math.pi, n_params)
    return starts


def singlet_fraction_optimize(
    rho: DensityMatrix,
    restarts: int = 8,
    seed: int = 0,
    *,
    xtol: float = 1e-10,
    max_evals: int = 10_000,
) -> float:
    """Maximize ``<psi|rho|psi>`` over ``|psi> = (I (x) U)|phi+>`` by Nelder-Mead.

    Restart ``k`` starts from a point drawn from ``trial_seed(seed, k)``, so
    adding restarts never lowers the result. For ``d_local > 2`` this is a
    lower estimate of the fully entangled fraction.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    d = rho.d_local
    starts = _fef_starts(d * d, restarts, seed)
    m = np.ascontiguousarray(rho.matrix)
    _, vals, _ = _kernels.multistart(
        _kernels.OBJ_FEF, starts, 0.5, m, d, 0, 0.0, xtol, max_evals
    )
    return float(np.max(vals))


def fidelity_from_f(f: float, d_local: int) -> float:
    return (f * d_local + 1.0) / (d_local + 1.0)


def useful_for_teleportation(f: float, d_local: int) -> bool:
    return f > 1.0 / d_local


@dataclass(frozen=True)
class MeasureSet:
    vn_entropy: float
    linear_entropy: float
    purity: float
    concurrence: float | None
    singlet_fraction: float
    fidelity: float
    rank: int
    d_local: int
    fef_exact: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def measure_all(
    rho: DensityMatrix,
    *,
    fef_method: str = "auto",
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> MeasureSet:
    """All scalar measures of ``rho``.

    ``fef_method`` is ``auto`` (magic basis for qubits, optimizer otherwise),
    ``magic`` or ``optimize``. Concurrence is None unless ``d_local == 2``.
    """
    d = rho.d_local
    if fef_method == "auto":
        fef_method = "magic" if d == 2 else "optimize"
    if fef_method == "magic":
        f = singlet_fraction_magic(rho)
    elif fef_method == "optimize":
        f = singlet_fraction_optimize(rho, restarts, seed)
    else:
        raise ValueError(f"unknown fef_method {fef_method!r}")
    pur = purity(rho)
    return MeasureSet(
        vn_entropy=vn_entropy(rho),
        linear_entropy=float(linear_entropy_from_purity(pur, rho.dim_total)),
        purity=pur,
        concurrence=wootters_concurrence(rho) if d == 2 else None,
        singlet_fraction=f,
        fidelity=fidelity_from_f(f, d),
        rank=numerical_rank(rho.eig()),
        d_local=d,
        fef_exact=(d == 2),
    )
