"""Dense complex-matrix substrate.

Hermitian eigendecompositions, operator norms, concrete matrix subalgebras
with Hilbert-Schmidt conditional expectations, and density-matrix states.
Matrices are plain ``numpy.ndarray`` of ``complex128``; every operation here
is pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian

# Structural identities are trusted to this tolerance; rank decisions use
# the looser one (double precision, spaces up to a few thousand dimensions).
STRUCT_TOL = 1e-10
RANK_TOL = 1e-8


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite, 2-d complex array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def adjoint(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value (the C*-norm at finite dimension)."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product trace(a† b)."""
    return complex(np.vdot(a, b))


def hermitian_eig(m, tol: float = STRUCT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Square matrix with ``‖m − m†‖ ≤ tol``.
    tol : float
        Hermiticity tolerance in operator norm.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Real eigenvalues in ascending order and orthonormal eigenvector
        columns, with ``m = U diag(w) U†``.

    Raises
    ------
    NotHermitian
        If the symmetry defect exceeds ``tol``.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix is {a.shape}, not square")
    defect = operator_norm(a - adjoint(a))
    if defect > tol:
        raise NotHermitian(f"symmetry defect {defect:.3e} exceeds {tol:.1e}")
    w, u = np.linalg.eigh(a)
    return w, u


def _gram_schmidt_hs(mats, drop_tol: float) -> list[np.ndarray]:
    """Orthonormalize matrices in the HS inner product, dropping null directions."""
    basis: list[np.ndarray] = []
    for m in mats:
        v = m.astype(np.complex128).copy()
        for _ in range(2):  # re-orthogonalize for stability
            for b in basis:
                v = v - hs_inner(b, v) * b
        norm = np.sqrt(abs(hs_inner(v, v)))
        if norm > drop_tol:
            basis.append(v / norm)
    return basis


@dataclass(frozen=True)
class MatrixSubalgebra:
    """Concrete unital *-subalgebra of M_d with an orthonormal HS basis.

    The basis supplies a canonical orthogonal projection (conditional
    expectation) onto the span, which turns membership claims into testable
    residuals.
    """

    ambient_dim: int
    basis: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def from_spanning(cls, ambient_dim: int, mats, drop_tol: float = STRUCT_TOL,
                      validate: bool = True, closure_tol: float = STRUCT_TOL):
        """Build from a spanning set, Gram-Schmidt orthonormalized.

        With ``validate`` the unit, adjoints and pairwise products of the
        basis must lie back in the span to ``closure_tol``.
        """
        mats = [as_matrix(m) for m in mats]
        for m in mats:
            if m.shape != (ambient_dim, ambient_dim):
                raise DimensionMismatch(
                    f"basis element is {m.shape}, ambient dim {ambient_dim}")
        basis = tuple(_gram_schmidt_hs(mats, drop_tol))
        alg = cls(ambient_dim, basis)
        if validate:
            eye = np.eye(ambient_dim, dtype=np.complex128)
            checks = [eye]
            checks += [adjoint(b) for b in basis]
            checks += [b1 @ b2 for b1 in basis for b2 in basis]
            worst = max(membership_residual(alg, c) for c in checks)
            if worst > closure_tol:
                raise ValueError(
                    f"spanning set is not a unital *-algebra: closure residual {worst:.3e}")
        return alg

    @classmethod
    def full(cls, d: int) -> "MatrixSubalgebra":
        """All of M_d, in the matrix-unit basis."""
        basis = []
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=np.complex128)
                e[i, j] = 1.0
                basis.append(e)
        return cls(d, tuple(basis))

    @classmethod
    def diagonal(cls, d: int) -> "MatrixSubalgebra":
        """Diagonal matrices inside M_d."""
        basis = []
        for i in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, i] = 1.0
            basis.append(e)
        return cls(d, tuple(basis))

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        return np.array([hs_inner(b, x) for b in self.basis])


def conditional_expectation(alg: MatrixSubalgebra, x) -> np.ndarray:
    """HS-orthogonal projection of ``x`` onto span(alg.basis).

    Idempotent, unital and adjoint-preserving.
    """
    x = as_matrix(x)
    d = alg.ambient_dim
    if x.shape != (d, d):
        raise DimensionMismatch(f"operand is {x.shape}, ambient dim {d}")
    out = np.zeros_like(x)
    for b in alg.basis:
        out += hs_inner(b, x) * b
    return out


def membership_residual(alg: MatrixSubalgebra, x) -> float:
    """Operator norm of ``x − E(x)``; zero iff ``x`` lies in the span."""
    x = as_matrix(x)
    return operator_norm(x - conditional_expectation(alg, x))


@dataclass(frozen=True)
class State:
    """Density matrix ρ realizing the state a ↦ trace(ρ a)."""

    rho: np.ndarray
    faithful: bool

    @classmethod
    def from_density(cls, rho, faithfulness_tol: float = STRUCT_TOL,
                     tol: float = 1e-12) -> "State":
        """Validate Hermiticity, positivity and unit trace, set faithfulness."""
        rho = as_matrix(rho)
        w, _ = hermitian_eig(rho)
        if w[0] < -tol:
            raise ValueError(f"density matrix has eigenvalue {w[0]:.3e} < 0")
        tr = np.trace(rho)
        if abs(tr - 1.0) > tol:
            raise ValueError(f"trace is {tr}, expected 1")
        return cls(rho=rho, faithful=bool(w[0] > faithfulness_tol))

    @classmethod
    def maximally_mixed(cls, d: int) -> "State":
        return cls(rho=np.eye(d, dtype=np.complex128) / d, faithful=True)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def expect(self, a) -> complex:
        """Value trace(ρ a)."""
        a = as_matrix(a)
        if a.shape != self.rho.shape:
            raise DimensionMismatch(f"observable is {a.shape}, state dim {self.dim}")
        return complex(np.trace(self.rho @ a))

    def min_eigenvalue(self) -> float:
        w, _ = hermitian_eig(self.rho)
        return float(w[0])


# ---------------------------------------------------------------------------
# JSON wire format: complex scalars as [re, im], matrices as rows of those.
# ---------------------------------------------------------------------------

def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=np.complex128)]


def matrix_from_json(rows) -> np.ndarray:
    data = [[complex(entry[0], entry[1]) for entry in row] for row in rows]
    return as_matrix(np.array(data, dtype=np.complex128))
