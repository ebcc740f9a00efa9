"""Unital completely positive maps in Kraus form.

The map acts on observables (Heisenberg picture), Φ(a) = Σ K_i† a K_i with
Σ K_i† K_i = I.  Choi-matrix interconversion, invariant states, the
multiplicative domain, and the state-adjoint map all live here, together
with a preset zoo of reproducible channels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.optimize import minimize

from .algebra import (
    MatrixSubalgebra,
    RANK_TOL,
    STRUCT_TOL,
    State,
    adjoint,
    as_matrix,
    hermitian_eig,
    hs_inner,
    matrix_from_json,
    matrix_to_json,
    operator_norm,
)
from .errors import (
    DimensionMismatch,
    NoPositiveFixedPoint,
    NonFaithfulState,
    NotCompletelyPositive,
    NotInvariant,
)


@dataclass(frozen=True)
class UcpMap:
    """Unital completely positive map Φ(a) = Σ K_i† a K_i on M_d."""

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        kraus = tuple(as_matrix(k) for k in self.kraus)
        if not kraus:
            raise ValueError("at least one Kraus operator is required")
        d = kraus[0].shape[0]
        for k in kraus:
            if k.shape != (d, d):
                raise DimensionMismatch(f"Kraus operator is {k.shape}, expected ({d}, {d})")
        object.__setattr__(self, "kraus", kraus)
        s = sum(adjoint(k) @ k for k in kraus)
        defect = operator_norm(s - np.eye(d))
        if defect > STRUCT_TOL:
            raise ValueError(f"map is not unital: ‖Σ K†K − I‖ = {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def kraus_count(self) -> int:
        return len(self.kraus)

    def apply(self, a) -> np.ndarray:
        """Heisenberg action Σ K_i† a K_i."""
        a = as_matrix(a)
        if a.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"operand is {a.shape}, map dim {self.dim}")
        out = np.zeros_like(a)
        for k in self.kraus:
            out += adjoint(k) @ a @ k
        return out

    def apply_power(self, n: int, a) -> np.ndarray:
        a = as_matrix(a)
        for _ in range(n):
            a = self.apply(a)
        return a

    def schrodinger_apply(self, rho) -> np.ndarray:
        """Trace dual Σ K_i ρ K_i†, so trace(Φ*(ρ) a) = trace(ρ Φ(a))."""
        rho = as_matrix(rho)
        out = np.zeros_like(rho)
        for k in self.kraus:
            out += k @ rho @ adjoint(k)
        return out

    def schrodinger_transfer_matrix(self) -> np.ndarray:
        """d²×d² matrix of the trace dual on row-major vectorized matrices."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)


@dataclass(frozen=True)
class ChoiMatrix:
    """Block matrix J(Φ) = Σ_ij E_ij ⊗ Φ(E_ij); PSD iff Φ is completely positive."""

    dim: int
    matrix: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        w, _ = hermitian_eig(self.matrix)
        return w

    def rank(self, tol: float = RANK_TOL) -> int:
        w = self.eigenvalues()
        scale = max(1.0, float(w[-1]))
        return int(np.sum(w > tol * scale))


def choi(phi: UcpMap) -> ChoiMatrix:
    """Choi matrix of the Heisenberg action."""
    d = phi.dim
    j = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, k] = 1.0
            j[i * d:(i + 1) * d, k * d:(k + 1) * d] = phi.apply(e)
    return ChoiMatrix(dim=d, matrix=j)


def kraus_from_choi(c: ChoiMatrix, tol: float = RANK_TOL) -> UcpMap:
    """Recover a Kraus form from a PSD Choi matrix.

    The Kraus count equals the Choi rank at threshold ``tol`` (relative to
    the top eigenvalue).  Raises ``NotCompletelyPositive`` when the minimum
    eigenvalue drops below ``−tol``.
    """
    d = c.dim
    w, u = hermitian_eig(c.matrix)
    if w[0] < -tol:
        raise NotCompletelyPositive(f"Choi eigenvalue {w[0]:.3e} < -{tol:.1e}")
    scale = max(1.0, float(w[-1]))
    kraus = []
    for lam, vec in zip(w, u.T):
        if lam > tol * scale:
            # Eigenvector v = Σ_i e_i ⊗ (M e_i) gives the Schrödinger-side
            # operator M; the Heisenberg Kraus operator is its adjoint.
            m = np.sqrt(lam) * vec.reshape(d, d).T
            kraus.append(adjoint(m))
    if not kraus:
        raise NotCompletelyPositive("Choi matrix is numerically zero")
    return UcpMap(kraus=tuple(kraus))


def minimal_kraus(phi: UcpMap, tol: float = RANK_TOL) -> UcpMap:
    """Round-trip through the Choi matrix to drop redundant Kraus operators."""
    return kraus_from_choi(choi(phi), tol=tol)


@dataclass(frozen=True)
class FixedPoint:
    """Invariant state of the trace dual, with uniqueness flag and residual."""

    state: State
    unique: bool
    residual: float


def _hermitian_fixed_basis(transfer: np.ndarray, d: int, tol: float) -> list[np.ndarray]:
    """Hermitian basis of the eigenvalue-1 eigenspace of the transfer matrix."""
    evals, evecs = np.linalg.eig(transfer)
    cols = [evecs[:, i] for i in range(len(evals)) if abs(evals[i] - 1.0) <= tol]
    candidates = []
    for v in cols:
        m = v.reshape(d, d)
        candidates.append((m + adjoint(m)) / 2)
        candidates.append((m - adjoint(m)) / 2j)
    basis: list[np.ndarray] = []
    for m in candidates:
        for b in basis:
            m = m - hs_inner(b, m).real * b
        norm = np.sqrt(abs(hs_inner(m, m)))
        if norm > 1e-8:
            basis.append(m / norm)
    return basis


def invariant_state(phi: UcpMap, tol: float = RANK_TOL) -> FixedPoint:
    """Fixed point ρ of the Schrödinger dual, Φ*(ρ) = ρ.

    The eigenvalue-1 eigenspace of the d²×d² transfer matrix is extracted
    with tolerance ``tol`` on ``|λ−1|``.  When it has dimension > 1 the
    returned density matrix maximizes the minimum eigenvalue over the
    trace-one slice (the most faithful fixed point) and ``unique`` is False.
    """
    d = phi.dim
    basis = _hermitian_fixed_basis(phi.schrodinger_transfer_matrix(), d, tol)
    if not basis:
        raise NoPositiveFixedPoint("no eigenvalue-1 eigenvector of the transfer matrix")

    traces = np.array([np.trace(b) for b in basis])
    pivot = int(np.argmax(np.abs(traces)))
    if abs(traces[pivot]) < 1e-10:
        raise NoPositiveFixedPoint("fixed space contains no trace-one element")
    rho0 = basis[pivot] / traces[pivot].real
    traceless = []
    for i, b in enumerate(basis):
        if i == pivot:
            continue
        traceless.append(b - (np.trace(b) / traces[pivot]) * basis[pivot])

    if traceless:
        # λ_min is concave over the affine trace-one slice, so a local
        # maximum found by direct search is global.
        def neg_min_eig(c):
            m = rho0 + sum(ci * t for ci, t in zip(c, traceless))
            return -float(np.linalg.eigvalsh((m + adjoint(m)) / 2)[0])

        res = minimize(neg_min_eig, np.zeros(len(traceless)), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        rho = rho0 + sum(ci * t for ci, t in zip(res.x, traceless))
    else:
        rho = rho0
    rho = (rho + adjoint(rho)) / 2
    rho = rho / np.trace(rho).real

    w = np.linalg.eigvalsh(rho)
    if w[0] < -tol:
        raise NoPositiveFixedPoint(f"fixed point has eigenvalue {w[0]:.3e}")
    rho = rho - min(0.0, w[0]) * np.eye(d)
    rho = rho / np.trace(rho).real
    residual = operator_norm(phi.schrodinger_apply(rho) - rho)
    if residual > max(tol, 1e-8):
        raise NoPositiveFixedPoint(f"fixed-point residual {residual:.3e}")
    state = State.from_density(rho)
    return FixedPoint(state=state, unique=len(traceless) == 0, residual=residual)


def multiplicative_domain_member(phi: UcpMap, a, tol: float = RANK_TOL) -> bool:
    """Membership test Φ(a†)Φ(a) = Φ(a†a) and its mirror, to ``tol``."""
    a = as_matrix(a)
    if a.shape != (phi.dim, phi.dim):
        raise DimensionMismatch(f"operand is {a.shape}, map dim {phi.dim}")
    left = operator_norm(phi.apply(adjoint(a)) @ phi.apply(a) - phi.apply(adjoint(a) @ a))
    right = operator_norm(phi.apply(a) @ phi.apply(adjoint(a)) - phi.apply(a @ adjoint(a)))
    return left <= tol and right <= tol


def is_multiplicative(phi: UcpMap, tol: float = RANK_TOL) -> bool:
    """True iff Φ(ab) = Φ(a)Φ(b) across a basis of M_d."""
    basis = MatrixSubalgebra.full(phi.dim).basis
    images = [phi.apply(b) for b in basis]
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            if operator_norm(phi.apply(bi @ bj) - images[i] @ images[j]) > tol:
                return False
    return True


@dataclass(frozen=True)
class AdjointAbsent:
    """Marker result: the canonical state-adjoint candidate failed a check."""

    failed_check: str
    defect: float


def phi_adjoint(phi: UcpMap, state: State, tol: float = 1e-9) -> Union[UcpMap, AdjointAbsent]:
    """State-adjoint map Φ_♮ with trace(ρ Φ(a) b) = trace(ρ a Φ_♮(b)).

    For faithful invariant ρ the identity forces the candidate
    Φ_♮(b) = Φ*(b ρ) ρ⁻¹.  Complete positivity of the candidate is not
    automatic; the candidate is checked for (i) the defining identity on a
    product basis, (ii) unitality, (iii) adjoint preservation and (iv) a PSD
    Choi matrix, and an ``AdjointAbsent`` naming the first failed check is
    returned otherwise.

    Raises
    ------
    NonFaithfulState
        If ``state`` is not faithful.
    NotInvariant
        If ``state`` is not Φ-invariant to ``tol``.
    """
    d = phi.dim
    rho = state.rho
    if rho.shape != (d, d):
        raise DimensionMismatch(f"state dim {rho.shape[0]}, map dim {d}")
    if not state.faithful:
        raise NonFaithfulState("the state-adjoint needs a faithful density matrix")
    basis = MatrixSubalgebra.full(d).basis
    inv_defect = max(abs(state.expect(phi.apply(b)) - state.expect(b)) for b in basis)
    if inv_defect > tol:
        raise NotInvariant(f"state is not invariant: defect {inv_defect:.3e}")

    rho_inv = np.linalg.inv(rho)

    def candidate(b: np.ndarray) -> np.ndarray:
        return phi.schrodinger_apply(b @ rho) @ rho_inv

    ident = 0.0
    for bi in basis:
        lhs_core = phi.apply(bi)
        for bj in basis:
            lhs = np.trace(rho @ lhs_core @ bj)
            rhs = np.trace(rho @ bi @ candidate(bj))
            ident = max(ident, abs(lhs - rhs))
    if ident > tol:
        return AdjointAbsent("defining_identity", ident)

    unital = operator_norm(candidate(np.eye(d, dtype=np.complex128)) - np.eye(d))
    if unital > tol:
        return AdjointAbsent("unitality", unital)

    star = max(operator_norm(candidate(adjoint(b)) - adjoint(candidate(b))) for b in basis)
    if star > tol:
        return AdjointAbsent("adjoint_preservation", star)

    j = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, k] = 1.0
            j[i * d:(i + 1) * d, k * d:(k + 1) * d] = candidate(e)
    w, _ = hermitian_eig((j + adjoint(j)) / 2)
    if w[0] < -RANK_TOL:
        return AdjointAbsent("complete_positivity", float(-w[0]))
    return kraus_from_choi(ChoiMatrix(dim=d, matrix=(j + adjoint(j)) / 2))


# ---------------------------------------------------------------------------
# Preset zoo.  All randomness is seeded; acceptance scenarios rely on it.
# ---------------------------------------------------------------------------

def _weyl_operators(d: int) -> list[np.ndarray]:
    """Shift-clock unitary basis S^j C^k of M_d."""
    shift = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        shift[(i + 1) % d, i] = 1.0
    omega = np.exp(2j * np.pi / d)
    clock = np.diag(omega ** np.arange(d))
    return [np.linalg.matrix_power(shift, j) @ np.linalg.matrix_power(clock, k)
            for j in range(d) for k in range(d)]


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q @ np.diag(np.diag(r) / np.abs(np.diag(r)))


def identity_channel(d: int) -> UcpMap:
    return UcpMap(kraus=(np.eye(d, dtype=np.complex128),))


def conjugation(u) -> UcpMap:
    """Automorphism a ↦ U† a U."""
    return UcpMap(kraus=(as_matrix(u),))


def depolarizing(d: int, p: float) -> UcpMap:
    """Φ(a) = (1−p)·a + p·trace(a)·I/d, via the Weyl twirl Kraus form."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight p={p} outside [0, 1]")
    weyl = _weyl_operators(d)
    kraus = [np.sqrt(1.0 - p + p / d**2) * weyl[0]]
    kraus += [(np.sqrt(p) / d) * w for w in weyl[1:]]
    return UcpMap(kraus=tuple(kraus))


def cyclic_shift(d: int) -> UcpMap:
    """Conjugation by the cyclic permutation e_i ↦ e_{i+1 mod d}."""
    perm = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        perm[(i + 1) % d, i] = 1.0
    return conjugation(perm)


def amplitude_damping(p: float) -> UcpMap:
    """Qubit damping channel; its invariant state |0⟩⟨0| is not faithful."""
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - p)]], dtype=np.complex128)
    k1 = np.array([[0.0, np.sqrt(p)], [0.0, 0.0]], dtype=np.complex128)
    return UcpMap(kraus=(k0, k1))


def random_ucp(d: int, rank: int, seed: int) -> UcpMap:
    """Random ucp map of Kraus rank ≤ rank from a Haar-random isometry.

    The isometry W: C^d → C^rank ⊗ C^d is the first d columns of a Haar
    unitary; its row blocks are the Kraus operators.
    """
    rng = np.random.default_rng(seed)
    u = haar_unitary(rank * d, rng)
    w = u[:, :d]
    kraus = tuple(w[i * d:(i + 1) * d, :] for i in range(rank))
    return UcpMap(kraus=kraus)


def random_mixed_unitary(d: int, rank: int, seed: int, weights=None) -> UcpMap:
    """Convex mixture of Haar conjugations; fixes I/d in the Schrödinger dual."""
    rng = np.random.default_rng(seed)
    if weights is None:
        weights = np.full(rank, 1.0 / rank)
    weights = np.asarray(weights, dtype=float)
    if len(weights) != rank or abs(weights.sum() - 1.0) > 1e-12 or np.any(weights <= 0):
        raise ValueError("weights must be positive and sum to one")
    kraus = tuple(np.sqrt(p) * haar_unitary(d, rng) for p in weights)
    return UcpMap(kraus=kraus)


def rank2_faithful(seed: int, attempts: int = 64) -> UcpMap:
    """Seeded search for a rank-2 qubit channel with faithful invariant state
    and an existing state-adjoint.

    Mixed-unitary samples fix the maximally mixed state, which makes the
    state-adjoint candidate CP; the search keeps the first sample whose
    invariant state is unique with min-eigenvalue > 0.1, whose adjoint
    passes all checks, and whose peripheral spectrum is a simple 1.
    """
    from .ergodic import spectral_verdict  # local import to avoid a cycle

    alg = MatrixSubalgebra.full(2)
    for attempt in range(attempts):
        cand = random_mixed_unitary(2, 2, seed=seed * 1009 + attempt)
        try:
            fp = invariant_state(cand)
        except NoPositiveFixedPoint:
            continue
        if not fp.unique or fp.state.min_eigenvalue() <= 0.1:
            continue
        adj = phi_adjoint(cand, fp.state)
        if isinstance(adj, AdjointAbsent):
            continue
        if spectral_verdict(cand, alg, fp.state) != "weakly_mixing":
            continue
        return cand
    raise NoPositiveFixedPoint(f"no suitable rank-2 channel in {attempts} attempts")


PRESETS: dict[str, Callable[..., UcpMap]] = {
    "identity": lambda d=2, **_: identity_channel(int(d)),
    "adu": lambda d=2, theta=None, seed=0, **_: conjugation(
        np.diag(np.exp(1j * np.asarray(theta, dtype=float)))
        if theta is not None else haar_unitary(int(d), np.random.default_rng(seed))),
    "depolarizing": lambda d=2, p=0.5, **_: depolarizing(int(d), float(p)),
    "cyclic3": lambda d=3, **_: cyclic_shift(int(d)),
    "amplitude-damping": lambda p=0.5, **_: amplitude_damping(float(p)),
    "random-ucp": lambda d=2, rank=2, seed=0, **_: random_ucp(int(d), int(rank), int(seed)),
    "rank2-faithful": lambda seed=1, **_: rank2_faithful(int(seed)),
}


def channel_from_spec(spec: dict) -> UcpMap:
    """Build a channel from its JSON description.

    ``{"dim": d, "kind": "kraus", "kraus": [...]}`` with matrices in the
    wire format, or ``{"kind": "preset", "preset": {"name": ..., "params":
    {...}}, "seed": n}``.
    """
    kind = spec.get("kind", "preset")
    if kind == "kraus":
        kraus = tuple(matrix_from_json(k) for k in spec["kraus"])
        phi = UcpMap(kraus=kraus)
        if "dim" in spec and phi.dim != int(spec["dim"]):
            raise DimensionMismatch(
                f"declared dim {spec['dim']} but Kraus operators are {phi.dim}x{phi.dim}")
        return phi
    if kind == "preset":
        preset = spec.get("preset", {})
        name = preset.get("name")
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; see list-presets")
        params = dict(preset.get("params", {}))
        if "seed" in spec and "seed" not in params:
            params["seed"] = spec["seed"]
        if "dim" in spec and "d" not in params:
            params["d"] = spec["dim"]
        return PRESETS[name](**params)
    raise ValueError(f"unknown channel kind {kind!r}")


def channel_to_spec(phi: UcpMap) -> dict:
    return {"dim": phi.dim, "kind": "kraus",
            "kraus": [matrix_to_json(k) for k in phi.kraus]}
