"""
Lowest eigenpairs of Hermitian sparse operators

Dense LAPACK below DENSE_DIMENSION_LIMIT; above it a restarted Lanczos with
full reorthogonalization, locking of converged pairs and a seeded start
vector, or shift-invert Krylov through a sparse LU factorization.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sps
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import LinearOperator, eigsh, splu

from config.settings import (
    DEFAULT_SEED,
    DENSE_DIMENSION_LIMIT,
    EIGEN_TOL,
    HERMITIAN_RTOL,
    LANCZOS_BUDGET_FACTOR,
    LANCZOS_KRYLOV_DIM,
    SHIFT_INVERT_DIMENSION_LIMIT,
)
from fock.basis import FockBasis, FockVector
from fock.operators import SparseOp, hermiticity_defect
from utils.errors import SolverError


logger = logging.getLogger(__name__)

METHODS = ("auto", "dense", "lanczos", "shift_invert")


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """k lowest eigenpairs; vectors are the columns of `vectors`"""
    eigenvalues: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    requested: int
    method: str
    tol: float
    iterations: int = 0
    info: Dict[str, Any] = field(default_factory=dict)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def vector(self, j: int = 0) -> np.ndarray:
        return self.vectors[:, j]

    def fock_vector(self, basis: FockBasis, j: int = 0) -> FockVector:
        return FockVector(self.vectors[:, j], basis)

    def to_dict(self) -> Dict:
        return {
            'eigenvalues': [float(x) for x in self.eigenvalues],
            'residuals': [float(r) for r in self.residuals],
            'requested': self.requested,
            'method': self.method,
            'tol': self.tol,
            'iterations': self.iterations,
        }


def residual_norms(matrix: sps.spmatrix, eigenvalues: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """||A v_j - l_j v_j|| per column"""
    if vectors.shape[1] == 0:
        return np.empty(0)
    return np.linalg.norm(matrix @ vectors - vectors * eigenvalues[None, :], axis=0)


def _dense(matrix: sps.spmatrix, count: int) -> Tuple[np.ndarray, np.ndarray]:
    values, vectors = eigh(matrix.toarray(), subset_by_index=[0, count - 1])
    return values, vectors


def _gershgorin_floor(matrix: sps.csr_matrix) -> float:
    diag = matrix.diagonal().real
    off = np.asarray(abs(matrix).sum(axis=1)).reshape(-1) - np.abs(diag)
    return float(np.min(diag - off))


def _shift_invert(matrix: sps.csr_matrix, count: int, tol: float, rng: np.random.Generator,
                  sigma: Optional[float]) -> Tuple[np.ndarray, np.ndarray, Dict]:
    if sigma is None:
        floor = _gershgorin_floor(matrix)
        sigma = floor - 1e-3 * (1.0 + abs(floor))
    dim = matrix.shape[0]
    shifted = (matrix - sigma * sps.identity(dim, format='csr', dtype=matrix.dtype)).tocsc()
    lu = splu(shifted)
    op_inv = LinearOperator(shape=(dim, dim), matvec=lu.solve, dtype=matrix.dtype)
    v0 = rng.standard_normal(dim)
    values, vectors = eigsh(matrix, k=count, sigma=sigma, which='LM', OPinv=op_inv, v0=v0, tol=tol * 1e-2)
    return values, vectors, {'sigma': float(sigma)}


class LanczosSolver:
    """Restarted Lanczos with full reorthogonalization and locking"""

    def __init__(self, matrix: sps.csr_matrix, tol: float = EIGEN_TOL, seed: int = DEFAULT_SEED,
                 krylov_dim: int = LANCZOS_KRYLOV_DIM):
        self.matrix = matrix
        self.dim = matrix.shape[0]
        self.tol = tol
        self.rng = np.random.default_rng(seed)
        self.krylov_dim = krylov_dim
        self.dtype = complex if np.iscomplexobj(matrix.data) else float
        self.scale = float(abs(matrix).max()) if matrix.nnz else 1.0
        self.locked_values: List[float] = []
        self.locked_vectors = np.empty((self.dim, 0), dtype=self.dtype)
        self.cycles = 0
        self.matvecs = 0

    def _random(self) -> np.ndarray:
        v = self.rng.standard_normal(self.dim)
        if self.dtype is complex:
            v = v + 1j * self.rng.standard_normal(self.dim)
        return v

    def _deflate(self, v: np.ndarray) -> np.ndarray:
        if self.locked_vectors.shape[1] == 0:
            return v
        return v - self.locked_vectors @ (self.locked_vectors.conj().T @ v)

    def _cycle(self, start: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """One Krylov build on the deflated operator; returns Ritz values and vectors"""
        steps = min(self.krylov_dim, self.dim - self.locked_vectors.shape[1])
        basis = np.zeros((self.dim, steps), dtype=self.dtype)
        alphas, betas = [], []

        q = self._deflate(start)
        q = q / np.linalg.norm(q)
        for j in range(steps):
            basis[:, j] = q
            w = self.matrix @ q
            self.matvecs += 1
            alphas.append(float(np.vdot(q, w).real))
            # two passes of classical Gram-Schmidt against the Krylov basis and the locked space
            for _ in range(2):
                w = w - basis[:, :j + 1] @ (basis[:, :j + 1].conj().T @ w)
                w = self._deflate(w)
            beta = float(np.linalg.norm(w))
            if j == steps - 1 or beta <= 1e-14 * self.scale:
                break
            betas.append(beta)
            q = w / beta

        self.cycles += 1
        size = len(alphas)
        if size == 1:
            return np.array(alphas), basis[:, :1]
        theta, s = eigh_tridiagonal(np.array(alphas), np.array(betas[:size - 1]))
        return theta, basis[:, :size] @ s

    def _converged(self, value: float, vector: np.ndarray) -> Tuple[bool, float]:
        vector = vector / np.linalg.norm(vector)
        residual = float(np.linalg.norm(self.matrix @ vector - value * vector))
        self.matvecs += 1
        return residual <= 0.5 * self.tol * (1.0 + abs(value)), residual

    def _lock(self, value: float, vector: np.ndarray):
        vector = self._deflate(vector)
        vector = vector / np.linalg.norm(vector)
        self.locked_values.append(float(value))
        self.locked_vectors = np.column_stack([self.locked_vectors, vector])

    def _drop_highest(self):
        worst = int(np.argmax(self.locked_values))
        self.locked_values.pop(worst)
        self.locked_vectors = np.delete(self.locked_vectors, worst, axis=1)

    def _restart_vector(self, ritz: np.ndarray) -> np.ndarray:
        start = ritz.sum(axis=1) if ritz.shape[1] else self._random()
        noise = self._random()
        return start / np.linalg.norm(start) + 1e-4 * noise / np.linalg.norm(noise)

    def solve(self, count: int, max_cycles: int) -> Tuple[np.ndarray, np.ndarray]:
        start = self._random()
        while len(self.locked_values) < count:
            if self.cycles >= max_cycles:
                raise SolverError(
                    f"Lanczos locked {len(self.locked_values)} of {count} eigenpairs in {self.cycles} cycles",
                    diagnostics=self.diagnostics(),
                )
            theta, ritz = self._cycle(start)
            wanted = count - len(self.locked_values)
            locked_now = 0
            for j in range(min(wanted, theta.size)):
                ok, _ = self._converged(theta[j], ritz[:, j])
                if not ok:
                    break
                self._lock(theta[j], ritz[:, j])
                locked_now += 1
            logger.debug(f"Lanczos cycle {self.cycles}: locked {locked_now}, total {len(self.locked_values)}")
            if self.dim - self.locked_vectors.shape[1] == 0:
                break
            start = self._restart_vector(ritz[:, locked_now:wanted])

        self._verify(count, max_cycles)
        order = np.argsort(self.locked_values)
        return np.array(self.locked_values)[order], self.locked_vectors[:, order]

    def _verify(self, count: int, max_cycles: int):
        """Fresh random starts on the deflated operator catch missed degenerate copies"""
        start = self._random()
        while self.dim - self.locked_vectors.shape[1] > 0:
            if self.cycles >= max_cycles:
                raise SolverError("Lanczos budget exhausted during verification", diagnostics=self.diagnostics())
            theta, ritz = self._cycle(start)
            ok, _ = self._converged(theta[0], ritz[:, 0])
            if not ok:
                start = self._restart_vector(ritz[:, :1])
                continue
            ceiling = max(self.locked_values)
            if theta[0] >= ceiling - self.tol * (1.0 + abs(theta[0])):
                return
            logger.debug(f"Lanczos verification found {theta[0]:.12e} below {ceiling:.12e}")
            self._lock(theta[0], ritz[:, 0])
            if len(self.locked_values) > count:
                self._drop_highest()
            start = self._random()

    def diagnostics(self) -> Dict[str, Any]:
        return {
            'cycles': self.cycles,
            'matvecs': self.matvecs,
            'locked': len(self.locked_values),
            'dimension': self.dim,
            'krylov_dim': self.krylov_dim,
        }


def eigensolve(op: SparseOp, count: int = 1, tol: float = EIGEN_TOL, method: str = "auto",
               seed: int = DEFAULT_SEED, sigma: Optional[float] = None) -> SpectralResult:
    """
    The `count` lowest eigenpairs of a Hermitian operator, ascending.

    Every reported pair satisfies ||Hv - lv|| <= tol * (1 + |l|); otherwise a
    SolverError carries the residuals.
    """
    if method not in METHODS:
        raise ValueError(f"unknown eigensolver method '{method}' (choose from {', '.join(METHODS)})")
    matrix = op.matrix
    defect = hermiticity_defect(matrix)
    if defect > HERMITIAN_RTOL:
        raise SolverError(f"operator '{op.label}' is not Hermitian (defect {defect:.3e})",
                          diagnostics={'hermiticity_defect': defect})
    if count < 1:
        raise ValueError(f"eigenpair count must be >= 1 (got {count})")
    count = min(count, op.dim)

    if method == "auto":
        method = "dense" if op.dim <= DENSE_DIMENSION_LIMIT else "lanczos"

    rng = np.random.default_rng(seed)
    info: Dict[str, Any] = {'dimension': op.dim}
    iterations = 0
    if method == "dense" or op.dim <= count + 1:
        values, vectors = _dense(matrix, count)
        method = "dense"
    elif method == "shift_invert":
        if op.dim > SHIFT_INVERT_DIMENSION_LIMIT:
            raise SolverError(
                f"shift-invert limited to dimension {SHIFT_INVERT_DIMENSION_LIMIT} (got {op.dim})",
                diagnostics=info,
            )
        try:
            values, vectors, extra = _shift_invert(matrix, count, tol, rng, sigma)
        except RuntimeError as exc:
            raise SolverError(f"shift-invert failed: {exc}", diagnostics=info) from exc
        info.update(extra)
    else:
        solver = LanczosSolver(matrix, tol=tol, seed=seed)
        values, vectors = solver.solve(count, max_cycles=LANCZOS_BUDGET_FACTOR * count)
        info.update(solver.diagnostics())
        iterations = solver.matvecs

    order = np.argsort(values)
    values, vectors = np.asarray(values)[order], vectors[:, order]
    vectors = vectors / np.linalg.norm(vectors, axis=0)[None, :]
    residuals = residual_norms(matrix, values, vectors)
    bounds = tol * (1.0 + np.abs(values))
    if np.any(residuals > bounds):
        info['residuals'] = [float(r) for r in residuals]
        raise SolverError(
            f"{method} eigensolve residual {float(np.max(residuals)):.3e} above tolerance",
            diagnostics=info,
        )

    logger.debug(f"eigensolve[{method}] dim={op.dim} k={count} E0={values[0]:.12e}")
    return SpectralResult(
        eigenvalues=values,
        vectors=vectors,
        residuals=residuals,
        requested=count,
        method=method,
        tol=tol,
        iterations=iterations,
        info=info,
    )


def degeneracy(values: np.ndarray, rtol: float) -> int:
    """How many eigenvalues sit within rtol * (1 + |l_0|) of the lowest one"""
    values = np.asarray(values)
    return int(np.count_nonzero(np.abs(values - values[0]) <= rtol * (1.0 + abs(values[0]))))
