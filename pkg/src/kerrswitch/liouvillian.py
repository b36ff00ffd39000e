"""Lindbladian on a truncated Fock basis and its slowest relaxation rate.

Vectorization is column stacking: ``vec(rho)[n + N*m] = rho[n, m]`` and
``vec(A rho B) = (B^T kron A) vec(rho)``.

Every term of the model (``a^2``, ``a^dag^2``, ``a^dag a``) preserves photon
parity on each side of ``rho`` separately, so the superoperator is block
diagonal in four sectors labelled by the parities of the row index ``n`` and
the column index ``m``. The two diagonal sectors (ee, oo) are each trace
preserving and hold one steady state apiece. The coherence sectors (eo, oe)
are complex conjugates of each other; their slowest eigenvalue is the
switching rate, and it is exactly zero at zero detuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import EigensolveFailed, EtaZero, TruncationLeak, TruncationTooSmall
from .model import ModelParams, validate
from .rates import NUMERIC_GAP, RateEstimate
from .semiclassical import fixed_points

DEFAULT_ZERO_TOL = 1e-13
DEFAULT_LEAK_TOL = 1e-8
SECTORS = ((0, 0), (1, 1), (0, 1), (1, 0))


@dataclass(frozen=True)
class FockOperator:
    N: int
    matrix: np.ndarray


@dataclass(frozen=True)
class Superoperator:
    """Dense Lindbladian, or one parity block of it.

    ``indices`` lists the positions of the block's rows/columns in the full
    column-stacked space; ``None`` means the full ``N^2 x N^2`` matrix.
    """

    N: int
    matrix: np.ndarray
    indices: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray  # sorted by descending real part
    steady_count: int
    gap: float  # -Re of the slowest eigenvalue not classified as steady, whole spectrum
    switching_gap: float  # same, restricted to the odd-parity coherence sector
    truncation_diag: float
    N: int
    scale: float
    zero_tol: float
    sector_eigenvalues: dict = field(default_factory=dict, repr=False)

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "gap": self.gap,
            "switching_gap": self.switching_gap,
            "steady_count": self.steady_count,
            "truncation_diag": self.truncation_diag,
            "scale": self.scale,
            "zero_tol": self.zero_tol,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
        }


def destroy(N: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)


def _check_truncation(N: int, minimum: int) -> None:
    if int(N) != N or N < minimum:
        raise TruncationTooSmall(f"Fock truncation N must be an integer >= {minimum}, got {N}")


def build_hamiltonian(params: ModelParams, N: int) -> FockOperator:
    """``H = -Delta a^dag a + (U/2) a^dag^2 a^2 + (iG/2)(a^dag^2 - a^2)``."""
    _check_truncation(N, 2)
    validate(params)
    a = destroy(N)
    a2 = a @ a
    number = np.diag(np.arange(N, dtype=float))
    H = (-params.Delta * number + 0.5 * params.U * (a2.T @ a2)
         + 0.5j * params.G * (a2.T - a2))
    return FockOperator(N, H)


def _nonhermitian_generator(params: ModelParams, N: int):
    """``K = -iH - (eta/2) a^dag^2 a^2`` and ``a^2``; ``L rho = K rho + rho K^dag + eta a^2 rho a^dag^2``."""
    H = build_hamiltonian(params, N).matrix
    a = destroy(N)
    a2 = a @ a
    K = -1j * H - 0.5 * params.eta * (a2.T @ a2)
    return K, a2


def build_liouvillian(params: ModelParams, N: int) -> Superoperator:
    _check_truncation(N, 4)
    K, a2 = _nonhermitian_generator(params, N)
    eye = np.eye(N)
    L = np.kron(eye, K) + np.kron(K.conj(), eye) + params.eta * np.kron(a2.conj(), a2)
    return Superoperator(N, L)


def sector_indices(N: int, left: int, right: int) -> np.ndarray:
    """Column-stacked positions of ``rho[n, m]`` with ``n % 2 == left`` and ``m % 2 == right``."""
    rows = np.arange(left, N, 2)
    cols = np.arange(right, N, 2)
    return (rows[None, :] + N * cols[:, None]).ravel()


def parity_sector(params: ModelParams, N: int, left: int, right: int) -> Superoperator:
    """One of the four strong-parity blocks, built without forming the full matrix."""
    _check_truncation(N, 4)
    K, a2 = _nonhermitian_generator(params, N)
    rows = np.arange(left, N, 2)
    cols = np.arange(right, N, 2)
    K_l, a2_l = K[np.ix_(rows, rows)], a2[np.ix_(rows, rows)]
    K_r, a2_r = K[np.ix_(cols, cols)], a2[np.ix_(cols, cols)]
    L = (np.kron(np.eye(len(cols)), K_l) + np.kron(K_r.conj(), np.eye(len(rows)))
         + params.eta * np.kron(a2_r.conj(), a2_l))
    return Superoperator(N, L, sector_indices(N, left, right))


def parity_blocks(superop: Superoperator) -> tuple[Superoperator, Superoperator]:
    """Split into the ``n + m`` even and ``n + m`` odd blocks."""
    N = superop.N
    even = np.concatenate([sector_indices(N, 0, 0), sector_indices(N, 1, 1)])
    odd = np.concatenate([sector_indices(N, 0, 1), sector_indices(N, 1, 0)])
    L = superop.matrix
    return (Superoperator(N, L[np.ix_(even, even)], even),
            Superoperator(N, L[np.ix_(odd, odd)], odd))


def _row_scale(matrix) -> float:
    return float(np.abs(matrix).sum(axis=1).max())


def _steady_state_block(block: np.ndarray, N: int, parity: int) -> np.ndarray:
    """Trace-one null vector of a diagonal parity sector, as a density-matrix block."""
    levels = np.arange(parity, N, 2)
    n = len(levels)
    trace_row = np.zeros(block.shape[1], dtype=complex)
    trace_row[np.arange(n) * (n + 1)] = 1.0
    A = block.copy()
    A[0] = trace_row  # row 0 is a diagonal element; it is redundant with the others
    rhs = np.zeros(block.shape[0], dtype=complex)
    rhs[0] = 1.0
    vec = scipy.linalg.solve(A, rhs)
    return vec.reshape(n, n).T


def _top_level_weight(N: int, blocks: dict) -> float:
    weights = []
    for parity in (0, 1):
        rho = _steady_state_block(blocks[(parity, parity)], N, parity)
        weights.append(float(abs(rho[-1, -1].real)))
    return max(weights)


def _eigvals_dense(matrix: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.eigvals(matrix)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigensolveFailed(str(exc)) from exc


def _slowest_arnoldi(matrix: np.ndarray, scale: float, k: int = 10) -> np.ndarray:
    """Eigenvalues nearest the origin by shift-invert Arnoldi.

    The shift sits slightly to the right of zero so that the factorization
    stays regular when the sector holds an exact zero eigenvalue.
    """
    n = matrix.shape[0]
    k = min(k, n - 2)
    sigma = 1e-6 * scale
    v0 = np.random.default_rng(0).standard_normal(n).astype(complex)
    try:
        return scipy.sparse.linalg.eigs(scipy.sparse.csc_matrix(matrix), k=k, sigma=sigma,
                                        v0=v0, return_eigenvectors=False, tol=0)
    except scipy.sparse.linalg.ArpackError as exc:
        raise EigensolveFailed(str(exc)) from exc


def _sorted(eigs: np.ndarray) -> np.ndarray:
    return eigs[np.lexsort((eigs.imag, -eigs.real))]


def _first_unsteady(eigs: np.ndarray, threshold: float) -> float:
    for z in _sorted(eigs):
        if abs(z.real) >= threshold:
            return float(-z.real)
    return math.inf


def spectrum(superop: Superoperator, zero_tol: float = DEFAULT_ZERO_TOL) -> SpectrumResult:
    """Full dense spectrum of a Lindbladian on ``N`` Fock levels.

    Eigenvalues with ``|Re| < zero_tol * scale`` count as steady, where
    ``scale`` is the largest absolute row sum. When the matrix respects
    the four-sector parity structure each block is diagonalized separately;
    the union is the full spectrum.
    """
    if superop.indices is not None:
        raise ValueError("spectrum() expects the full superoperator")
    L = superop.matrix
    if not np.all(np.isfinite(L)):
        raise EigensolveFailed("superoperator has non-finite entries")
    N = superop.N
    scale = _row_scale(L)
    threshold = zero_tol * scale
    blocks = {s: L[np.ix_(sector_indices(N, *s), sector_indices(N, *s))] for s in SECTORS}
    covered = sum(np.abs(b).sum() for b in blocks.values())
    if not np.isclose(covered, np.abs(L).sum(), rtol=1e-14, atol=0):
        raise ValueError("superoperator does not respect photon-parity sectors")
    sector_eigs = {s: _eigvals_dense(b) for s, b in blocks.items()}
    eigs = _sorted(np.concatenate(list(sector_eigs.values())))
    steady = int(np.count_nonzero(np.abs(eigs.real) < threshold))
    eo = sector_eigs[(0, 1)]
    slow = eo[np.argmax(eo.real)]
    switching = 0.0 if abs(slow.real) < threshold else float(-slow.real)
    return SpectrumResult(
        eigenvalues=eigs,
        steady_count=steady,
        gap=_first_unsteady(eigs, threshold),
        switching_gap=switching,
        truncation_diag=_top_level_weight(N, blocks),
        N=N,
        scale=scale,
        zero_tol=zero_tol,
        sector_eigenvalues=sector_eigs,
    )


def default_truncation(params: ModelParams) -> int:
    """``ceil(n0 + 8 sqrt(n0) + 10)`` with ``n0`` the semiclassical photon number."""
    n0 = fixed_points(params).n0
    return int(math.ceil(n0 + 8.0 * math.sqrt(n0) + 10.0))


def liouvillian_gap(params: ModelParams, N: int | None = None, zero_tol: float = DEFAULT_ZERO_TOL,
                    leak_tol: float = DEFAULT_LEAK_TOL, solver: str = "arnoldi") -> RateEstimate:
    """Switching rate ``-Re(lambda_1)`` from the odd-parity coherence sector.

    ``solver="dense"`` diagonalizes the whole sector; ``"arnoldi"`` (default)
    extracts the eigenvalues nearest zero by shift-invert iteration, which is
    much faster and resolves the exponentially small rate to near machine
    precision. Raises :class:`TruncationLeak` if either parity steady state
    carries more than ``leak_tol`` in its highest retained level.
    """
    validate(params)
    if params.eta == 0:
        raise EtaZero("the numeric gap needs eta > 0 for a unique steady state per sector")
    if N is None:
        N = default_truncation(params)
    _check_truncation(N, 4)
    blocks = {s: parity_sector(params, N, *s).matrix for s in ((0, 0), (1, 1), (0, 1))}
    scale = max(_row_scale(b) for b in blocks.values())
    threshold = zero_tol * scale
    leak = _top_level_weight(N, blocks)
    if leak > leak_tol:
        raise TruncationLeak(
            f"steady-state weight {leak:.3g} in the top Fock level exceeds {leak_tol:g}; increase N (now {N})",
            truncation_diag=leak, N=N)
    if solver == "dense":
        eigs = _eigvals_dense(blocks[(0, 1)])
    elif solver == "arnoldi":
        eigs = _slowest_arnoldi(blocks[(0, 1)], scale)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    slow = eigs[np.argmax(eigs.real)]
    coherent_zero = abs(slow.real) < threshold
    gap = 0.0 if coherent_zero else float(-slow.real)
    return RateEstimate.from_value(
        NUMERIC_GAP, gap,
        metadata={
            "N": int(N),
            "truncation_diag": leak,
            "steady_count": 4 if coherent_zero else 2,
            "eigenvalue": [float(slow.real), float(slow.imag)],
            "solver": solver,
            "scale": scale,
        },
    )
