"""Construction, sampling and serialization of bipartite density matrices."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import (
    InvalidP,
    InvalidRank,
    InvalidSpectrum,
    NotNormalized,
    ParseError,
    ValidationError,
)
from .kernel import HERMITIAN_TOL, RANK_REL_TOL, eigh, hermiticity_error

STATE_TOL = 1e-10

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated state of a ``d_local x d_local`` bipartite system.

    Construction checks shape, finiteness, Hermiticity, unit trace and
    positivity, each to within ``STATE_TOL``, and raises ValidationError
    naming the first violated invariant.
    """

    matrix: np.ndarray
    d_local: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        d = int(self.d_local)
        dim = d * d
        if d < 1 or m.shape != (dim, dim):
            raise ValidationError(
                "shape", abs(m.shape[0] - dim) if m.ndim == 2 else float("nan"),
                f"expected {dim}x{dim} for d_local={d}, got {m.shape}",
            )
        if not np.all(np.isfinite(m)):
            raise ValidationError("finite", float("inf"), "matrix has NaN or Inf entries")
        herm = hermiticity_error(m)
        if herm > HERMITIAN_TOL:
            raise ValidationError("hermitian", herm)
        tr = complex(np.trace(m))
        tr_err = abs(tr - 1.0)
        if tr_err > STATE_TOL:
            raise ValidationError("trace", tr_err, f"trace = {tr.real:.12g}")
        lam_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if lam_min < -STATE_TOL:
            raise ValidationError("positivity", -lam_min, f"eigenvalue {lam_min:.6g}")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "d_local", d)

    @property
    def dim_total(self) -> int:
        return self.d_local * self.d_local

    def eig(self):
        return eigh(self.matrix)

    def spectrum(self) -> "Spectrum":
        return Spectrum.from_eigenvalues(self.eig().values)

    def rank(self, rel_tol: float = RANK_REL_TOL) -> int:
        from .kernel import numerical_rank

        return numerical_rank(self.eig(), rel_tol)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.d_local == other.d_local and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


@dataclass(frozen=True)
class Spectrum:
    """Descending, nonnegative eigenvalues summing to one."""

    values: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        if not v:
            raise InvalidSpectrum("empty spectrum")
        if any(not math.isfinite(x) for x in v):
            raise InvalidSpectrum("non-finite eigenvalue")
        if min(v) < 0.0:
            raise InvalidSpectrum(f"negative eigenvalue {min(v):.3e}")
        if any(a < b - STATE_TOL for a, b in zip(v, v[1:])):
            raise InvalidSpectrum(f"not in descending order: {v}")
        if abs(sum(v) - 1.0) > STATE_TOL:
            raise InvalidSpectrum(f"eigenvalues sum to {sum(v):.12g}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_eigenvalues(cls, values, rel_tol: float = RANK_REL_TOL) -> "Spectrum":
        """Sort, and zero every value at or below ``rel_tol * max``.

        Values below ``-rel_tol * max`` are not dust and are rejected.
        """
        v = np.sort(np.asarray(values, dtype=float))[::-1]
        cutoff = rel_tol * float(v[0])
        if v[-1] < -cutoff:
            raise InvalidSpectrum(f"negative eigenvalue {v[-1]:.3e}")
        v = np.where(v > cutoff, v, 0.0)
        return cls(tuple(v / v.sum()))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class WernerParams:
    rank: int
    p: float

    def __post_init__(self):
        if self.rank not in (2, 3, 4):
            raise InvalidRank(f"Werner rank must be 2, 3 or 4, got {self.rank}")
        if not (0.0 <= self.p <= 1.0):
            raise InvalidP(f"p must lie in [0, 1], got {self.p}")


_S = 1.0 / math.sqrt(2.0)
PHI_PLUS = np.array([_S, 0, 0, _S], dtype=np.complex128)
PHI_MINUS = np.array([_S, 0, 0, -_S], dtype=np.complex128)
PSI_PLUS = np.array([0, _S, _S, 0], dtype=np.complex128)
PSI_MINUS = np.array([0, _S, -_S, 0], dtype=np.complex128)
for _v in (PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS):
    _v.setflags(write=False)


def bell_basis() -> tuple:
    """``(phi+, phi-, psi+, psi-)`` in the ``|00>, |01>, |10>, |11>`` ordering."""
    return (PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS)


def magic_basis() -> tuple:
    """``(phi+, i phi-, i psi+, psi-)``.

    Every maximally entangled two-qubit state has real coefficients in this
    basis up to a global phase.
    """
    return (PHI_PLUS.copy(), 1j * PHI_MINUS, 1j * PSI_PLUS, PSI_MINUS.copy())


def magic_matrix() -> np.ndarray:
    """Columns are the magic basis vectors."""
    return np.column_stack(magic_basis())


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128)
    return np.outer(v, v.conj())


def _local_dim(n: int) -> int:
    d = int(round(math.sqrt(n)))
    if d * d != n:
        raise ValidationError("shape", n, f"dimension {n} is not a perfect square")
    return d


def pure_state(vec, d_local: int | None = None) -> DensityMatrix:
    v = np.asarray(vec, dtype=np.complex128).ravel()
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > STATE_TOL:
        raise NotNormalized(f"state vector has norm {norm:.12g}")
    d = _local_dim(v.size) if d_local is None else d_local
    return DensityMatrix(projector(v), d)


def maximally_mixed(d_local: int) -> DensityMatrix:
    dim = d_local * d_local
    return DensityMatrix(np.eye(dim, dtype=np.complex128) / dim, d_local)


def maximally_entangled(d_local: int) -> np.ndarray:
    """``sum_i |ii> / sqrt(d)``."""
    v = np.zeros(d_local * d_local, dtype=np.complex128)
    v[:: d_local + 1] = 1.0 / math.sqrt(d_local)
    return v


def _as_spectrum(spec) -> Spectrum:
    return spec if isinstance(spec, Spectrum) else Spectrum(tuple(spec))


def mems(spec) -> DensityMatrix:
    """``l1 |psi-><psi-| + l2 |00><00| + l3 |psi+><psi+| + l4 |11><11|``."""
    s = _as_spectrum(spec)
    if len(s) != 4:
        raise InvalidSpectrum(f"MEMS needs 4 eigenvalues, got {len(s)}")
    l1, l2, l3, l4 = s.values
    m = l1 * projector(PSI_MINUS) + l3 * projector(PSI_PLUS)
    m[0, 0] += l2
    m[3, 3] += l4
    return DensityMatrix(m, 2)


def werner_spectrum(rank: int, p: float) -> tuple:
    WernerParams(rank, p)
    if rank == 4:
        return ((1 + 3 * p) / 4, (1 - p) / 4, (1 - p) / 4, (1 - p) / 4)
    if rank == 3:
        return ((1 + 2 * p) / 3, (1 - p) / 3, (1 - p) / 3, 0.0)
    return ((1 + p) / 2, (1 - p) / 2, 0.0, 0.0)


def werner(rank, p: float | None = None) -> DensityMatrix:
    """Werner state of rank 2, 3 or 4.

    Accepts ``werner(WernerParams(...))`` or ``werner(rank, p)``. Rank 4 is
    ``(1-p) I/4 + p |psi+><psi+|``; ranks 2 and 3 are MEMS assemblies with
    the large eigenvalue on ``|psi->``.
    """
    params = rank if isinstance(rank, WernerParams) else WernerParams(int(rank), float(p))
    if params.rank == 4:
        m = (1 - params.p) * np.eye(4, dtype=np.complex128) / 4 + params.p * projector(PSI_PLUS)
        return DensityMatrix(m, 2)
    return mems(werner_spectrum(params.rank, params.p))


def bell_diagonal(weights: Sequence[float]) -> DensityMatrix:
    """Mixture of ``phi+, phi-, psi+, psi-`` with the given weights."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or np.any(w < 0) or abs(w.sum() - 1.0) > STATE_TOL:
        raise InvalidSpectrum(f"invalid Bell-diagonal weights {tuple(w)}")
    m = sum(wk * projector(b) for wk, b in zip(w, bell_basis()))
    return DensityMatrix(m, 2)


def partial_trace(state: DensityMatrix, keep: int = 0) -> np.ndarray:
    """Reduced matrix of subsystem ``keep`` (0 = first factor)."""
    d = state.d_local
    t = state.matrix.reshape(d, d, d, d)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("jijk->ik", t)


def trial_seed(master: int, index: int) -> np.random.SeedSequence:
    """Sub-stream for trial ``index`` under ``master``.

    Uses numpy's ``SeedSequence(master, spawn_key=(index,))`` so each stream
    depends only on the pair, never on how trials are scheduled.
    """
    return np.random.SeedSequence(int(master), spawn_key=(int(index),))


def ginibre_factor(d_local: int, r: int, seed: SeedLike) -> np.ndarray:
    """``d_local^2 x r`` matrix of independent standard complex Gaussians."""
    dim = d_local * d_local
    if not (1 <= r <= dim):
        raise InvalidRank(f"rank must lie in [1, {dim}], got {r}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((2, dim, r))
    return (g[0] + 1j * g[1]) / math.sqrt(2.0)


def state_from_factor(a: np.ndarray, d_local: int) -> DensityMatrix:
    m = a @ a.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m / np.trace(m).real, d_local)


def random_rank_r(d_local: int, r: int, seed: SeedLike = None) -> DensityMatrix:
    """Rank-``r`` state from the Hilbert-Schmidt-induced measure, ``AA^dagger / Tr``."""
    return state_from_factor(ginibre_factor(d_local, r, seed), d_local)


# --- serialization -----------------------------------------------------------

def to_payload(state: DensityMatrix) -> dict:
    m = state.matrix
    return {
        "d_local": state.d_local,
        "re": [[float(x) for x in row] for row in m.real],
        "im": [[float(x) for x in row] for row in m.imag],
    }


def from_payload(payload) -> DensityMatrix:
    if not isinstance(payload, dict):
        raise ParseError("state payload must be a JSON object")
    missing = [k for k in ("d_local", "re", "im") if k not in payload]
    if missing:
        raise ParseError(f"missing keys: {', '.join(missing)}")
    d = payload["d_local"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParseError(f"d_local must be a positive integer, got {d!r}")
    try:
        re = np.array(payload["re"], dtype=float)
        im = np.array(payload["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"re/im must be numeric matrices: {exc}") from None
    if re.ndim != 2 or re.shape != im.shape:
        raise ParseError(f"re and im must be matching 2-D arrays, got {re.shape} and {im.shape}")
    return DensityMatrix(re + 1j * im, d)


def dumps_state(state: DensityMatrix) -> str:
    return json.dumps(to_payload(state))


def save_state(state: DensityMatrix, path) -> None:
    Path(path).write_text(dumps_state(state) + "\n", encoding="utf-8")


def load_state(path) -> DensityMatrix:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from None
    return from_payload(payload)
