"""Single-step dilations of a ucp map.

Two constructions of a triple (L, σ, V) with Φ(a) = V† σ(a) V:

* ``gns_dilate`` builds the literal semi-inner-product quotient on 𝔄 ⊗ C^d
  (Gram matrix of ⟨a₁⊗ψ₁, a₂⊗ψ₂⟩ = ⟨ψ₁, Φ(a₁†a₂)ψ₂⟩, null space dropped
  by eigenvalue threshold), and
* ``kraus_dilate`` stacks the Kraus operators, L = C^r ⊗ C^d.

The two serve as independent cross-checks of each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import (
    MatrixSubalgebra,
    STRUCT_TOL,
    adjoint,
    as_matrix,
    hermitian_eig,
    membership_residual,
    operator_norm,
)
from .channel import UcpMap, multiplicative_domain_member
from .errors import AlgebraNotInvariant, DegenerateGram, DimensionMismatch, NotInDomain


@dataclass(frozen=True)
class StinespringTriple:
    """Dilation data: isometry V (m×d), representation σ, and the channel.

    ``rep`` evaluates σ(a) as an m×m matrix for a in the dilated algebra;
    ``quotient_map`` (GNS construction only) holds the coordinates of the
    surviving Gram eigenvectors inside 𝔄 ⊗ C^d.
    """

    channel: UcpMap
    base_dim: int
    space_dim: int
    isometry: np.ndarray
    rep: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    method: str
    quotient_map: np.ndarray | None = field(default=None, repr=False)

    def compression_residual(self, a) -> float:
        """‖V† σ(a) V − Φ(a)‖."""
        a = as_matrix(a)
        v = self.isometry
        return operator_norm(adjoint(v) @ self.rep(a) @ v - self.channel.apply(a))


def gns_dilate(phi: UcpMap, alg: MatrixSubalgebra, tol: float = STRUCT_TOL) -> StinespringTriple:
    """Dilation by the quotient of 𝔄 ⊗ C^d under the Φ-semi-inner product.

    The Gram matrix G[(i,k),(j,l)] = ⟨e_k, Φ(B_i†B_j) e_l⟩ is eigendecomposed
    and eigenpairs with λ ≤ tol·λ_max are quotiented away; surviving
    coordinates are rescaled by 1/√λ so the retained basis is orthonormal.
    σ(a) is compressed left multiplication, V the image of 1 ⊗ ψ.

    Raises
    ------
    AlgebraNotInvariant
        If Φ does not map span(alg.basis) into itself to ``tol``.
    DegenerateGram
        If every Gram eigenvalue falls at or below the threshold.
    """
    d = phi.dim
    if alg.ambient_dim != d:
        raise DimensionMismatch(f"algebra dim {alg.ambient_dim}, map dim {d}")
    worst = max(membership_residual(alg, phi.apply(b)) for b in alg.basis)
    if worst > tol:
        raise AlgebraNotInvariant(f"Φ leaves the subalgebra: residual {worst:.3e}")

    basis = alg.basis
    q = len(basis)
    n = q * d

    gram = np.zeros((n, n), dtype=np.complex128)
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            gram[i * d:(i + 1) * d, j * d:(j + 1) * d] = phi.apply(adjoint(bi) @ bj)

    w, u = hermitian_eig((gram + adjoint(gram)) / 2)
    lam_max = float(w[-1])
    if lam_max <= tol:
        raise DegenerateGram("all Gram eigenvalues at or below threshold")
    keep = w > tol * lam_max
    lam = w[keep]
    vecs = u[:, keep]
    m = int(keep.sum())

    # Quotient map T: 𝔄⊗C^d → C^m with ⟨x,y⟩_Φ = (Tx)†(Ty); right inverse Tp.
    t = (np.sqrt(lam)[:, None] * adjoint(vecs))
    tp = vecs * (1.0 / np.sqrt(lam))[None, :]

    # Left multiplication a·(B_i ⊗ e_k) = (aB_i) ⊗ e_k in basis coordinates.
    coords = {}

    def mult_matrix(a: np.ndarray) -> np.ndarray:
        key = a.tobytes()
        if key not in coords:
            ma = np.zeros((q, q), dtype=np.complex128)
            for i, bi in enumerate(basis):
                abi = a @ bi
                for j, bj in enumerate(basis):
                    ma[j, i] = np.vdot(bj, abi)
            coords[key] = np.kron(ma, np.eye(d))
        return coords[key]

    def rep(a) -> np.ndarray:
        a = as_matrix(a)
        return t @ mult_matrix(a) @ tp

    unit_coords = alg.coordinates(np.eye(d, dtype=np.complex128))
    isometry = t @ np.kron(unit_coords.reshape(q, 1), np.eye(d))
    return StinespringTriple(channel=phi, base_dim=d, space_dim=m,
                             isometry=isometry, rep=rep, method="gns",
                             quotient_map=t)


def kraus_dilate(phi: UcpMap) -> StinespringTriple:
    """Dilation with L = C^r ⊗ C^d, V ψ = Σ_i e_i ⊗ K_i ψ, σ(a) = I_r ⊗ a.

    Exact by construction; the space dimension equals r·d for the map's
    Kraus count r, so feed a Choi-reduced map for the minimal count.
    """
    d = phi.dim
    r = phi.kraus_count
    isometry = np.vstack(phi.kraus)
    eye_r = np.eye(r)

    def rep(a) -> np.ndarray:
        return np.kron(eye_r, as_matrix(a))

    return StinespringTriple(channel=phi, base_dim=d, space_dim=r * d,
                             isometry=isometry, rep=rep, method="kraus")


def unitarity_defect(triple: StinespringTriple) -> float:
    """‖V V† − I‖ on the dilated space; zero iff V is unitary."""
    v = triple.isometry
    return operator_norm(v @ adjoint(v) - np.eye(triple.space_dim))


def multiplicative_commutation_check(triple: StinespringTriple, x,
                                     tol: float = 1e-8) -> bool:
    """For x in the multiplicative domain, σ(x) must commute with VV†.

    Raises ``NotInDomain`` when the membership precondition fails.
    """
    x = as_matrix(x)
    if not multiplicative_domain_member(triple.channel, x, tol):
        raise NotInDomain("element fails the multiplicative-domain identities")
    v = triple.isometry
    p = v @ adjoint(v)
    sx = triple.rep(x)
    return operator_norm(sx @ p - p @ sx) <= tol
