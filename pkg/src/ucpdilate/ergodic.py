"""Cesàro averages, mixing verdicts, and their transfer through the dilation.

Base-level machinery works directly on M_d: time averages of
trace(ρ a Φ^k(b)) − trace(ρ a)·trace(ρ b) in signed and absolute form, and
a spectral cross-check on the transfer matrix of the restricted map.

Dilated machinery evaluates averages of the conjugated block operators in
two independent ways: a direct graded computation bounded by the level
window, and a closed-form reduction that rewrites the corner term through
string reduction, the corner-adjoint identity, and the state-adjoint map,
so it runs on M_d alone and reaches large time horizons.  Agreement of the
two is the package's deepest cross-check: it exercises the word reducer,
the corner-operator algebra, and the state-adjoint identity at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .algebra import MatrixSubalgebra, State, as_matrix, membership_residual, operator_norm
from .channel import UcpMap
from .errors import AlgebraNotInvariant, CapacityExceeded, NotInAlgebra, NotInvariant
from .nagy import NagyDilation, NagyVector, TailVector, z_embed
from .strings import (
    AlgebraString,
    FactoredCorner,
    NaplaOperator,
    ReducedTerm,
    _canonical_bra,
    bra_f_ket,
    compose_terms,
    gamma_adjoint_apply,
    napla_apply,
    random_string,
)
from .strings import _absorb_left, _pi_apply
from .tower import GradedVector, v_pow_apply

INVARIANCE_TOL = 1e-9
MEMBERSHIP_TOL = 1e-9


# ---------------------------------------------------------------------------
# Base-level averages.
# ---------------------------------------------------------------------------

def _check_invariant(phi: UcpMap, state: State, tol: float = INVARIANCE_TOL) -> None:
    basis = MatrixSubalgebra.full(phi.dim).basis
    defect = max(abs(state.expect(phi.apply(b)) - state.expect(b)) for b in basis)
    if defect > tol:
        raise NotInvariant(f"state invariance defect {defect:.3e}")


def cesaro_terms(phi: UcpMap, state: State, a, b, n_max: int,
                 alg: Optional[MatrixSubalgebra] = None) -> np.ndarray:
    """Signed correlation terms trace(ρ a Φ^k(b)) − trace(ρ a) trace(ρ b)
    for k = 0..n_max (complex array)."""
    a = as_matrix(a)
    b = as_matrix(b)
    _check_invariant(phi, state)
    if alg is not None:
        for name, x in (("a", a), ("b", b)):
            res = membership_residual(alg, x)
            if res > MEMBERSHIP_TOL:
                raise NotInAlgebra(f"observable {name} has membership residual {res:.3e}")
    mean = state.expect(a) * state.expect(b)
    terms = np.empty(n_max + 1, dtype=np.complex128)
    bk = b
    for k in range(n_max + 1):
        terms[k] = state.expect(a @ bk) - mean
        bk = phi.apply(bk)
    return terms


def cesaro_signed(phi: UcpMap, state: State, a, b, n: int,
                  alg: Optional[MatrixSubalgebra] = None) -> float:
    """Magnitude of the Cesàro mean of the signed terms up to time n.

    The terms may be complex; the mean's modulus is the ergodicity
    diagnostic (it vanishes exactly when the signed average does).
    """
    terms = cesaro_terms(phi, state, a, b, n, alg)
    return float(abs(terms.mean()))


def cesaro_abs(phi: UcpMap, state: State, a, b, n: int,
               alg: Optional[MatrixSubalgebra] = None) -> float:
    """Cesàro mean of the absolute correlation terms up to time n."""
    terms = cesaro_terms(phi, state, a, b, n, alg)
    return float(np.abs(terms).mean())


def spectral_verdict(phi: UcpMap, alg: MatrixSubalgebra, state: State,
                     one_tol: float = 1e-8, peripheral_tol: float = 1e-8) -> str:
    """Standard spectral classification of the restricted transfer matrix.

    "ergodic" when the eigenvalue 1 is simple, "weakly_mixing" when it is
    additionally the only eigenvalue of modulus ≥ 1 − peripheral_tol,
    "neither" otherwise.  This is a cross-check oracle for the Cesàro
    definitions, not their replacement.
    """
    for b in alg.basis:
        res = membership_residual(alg, phi.apply(b))
        if res > MEMBERSHIP_TOL:
            raise AlgebraNotInvariant(f"map leaves the subalgebra: residual {res:.3e}")
    q = alg.dim
    transfer = np.zeros((q, q), dtype=np.complex128)
    for j, bj in enumerate(alg.basis):
        image = phi.apply(bj)
        for i, bi in enumerate(alg.basis):
            transfer[i, j] = np.vdot(bi, image)
    evals = np.linalg.eigvals(transfer)
    ones = np.sum(np.abs(evals - 1.0) <= one_tol)
    if ones != 1:
        return "neither"
    peripheral = np.sum(np.abs(evals) >= 1.0 - peripheral_tol)
    return "weakly_mixing" if peripheral == 1 else "ergodic"


@dataclass(frozen=True)
class ErgodicReport:
    """Cesàro averages at the requested horizons plus the verdict used."""

    n_values: tuple[int, ...]
    signed_averages: tuple[float, ...]
    abs_averages: tuple[float, ...]
    verdict: Optional[str]
    method: str

    def average_at(self, n: int) -> tuple[float, float]:
        idx = self.n_values.index(n)
        return self.signed_averages[idx], self.abs_averages[idx]


def _report_from_terms(terms: np.ndarray, n_values: Sequence[int], verdict: Optional[str],
                       method: str) -> ErgodicReport:
    signed = []
    abses = []
    for n in n_values:
        chunk = terms[: n + 1]
        signed.append(float(abs(chunk.mean())))
        abses.append(float(np.abs(chunk).mean()))
    return ErgodicReport(n_values=tuple(int(n) for n in n_values),
                         signed_averages=tuple(signed), abs_averages=tuple(abses),
                         verdict=verdict, method=method)


# ---------------------------------------------------------------------------
# Generated block operators on the dilated space.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratedBlock:
    """Block operator in the generated-family form.

    Corner blocks: a d×d matrix top-left, a factored corner word top-right,
    an (algebra coefficient, gamma string) pair bottom-left acting as
    π(coeff) followed by the gamma adjoint, and an optional napla
    combination bottom-right.
    """

    x11: np.ndarray
    x12: Optional[FactoredCorner] = None
    x21: Optional[tuple[np.ndarray, AlgebraString]] = None
    x22: Optional[NaplaOperator] = None

    def apply(self, dil: NagyDilation, v: NagyVector) -> NagyVector:
        head = _pi_apply(dil, self.x11, v.head)
        if self.x12 is not None:
            head = head + self.x12.apply(dil, v.tail)
        tail = TailVector()
        if self.x21 is not None:
            coeff, string = self.x21
            tail = tail + gamma_adjoint_apply(dil, string, _pi_apply(dil, coeff, v.head))
        if self.x22 is not None:
            tail = tail + napla_apply(dil, self.x22, v.tail)
        return NagyVector(head=head, tail=tail)

    def y21_applier(self) -> Optional[Callable[[NagyDilation, GradedVector], TailVector]]:
        if self.x21 is None:
            return None
        coeff, string = self.x21

        def apply(dil: NagyDilation, psi: GradedVector) -> TailVector:
            return gamma_adjoint_apply(dil, string, _pi_apply(dil, coeff, psi))

        return apply


def compression_block(dil: NagyDilation, op: Callable[[NagyVector], NagyVector]
                      ) -> np.ndarray:
    """Level-0 block of the head compression of an operator on the dilated
    space, column by column over the base basis."""
    tower = dil.tower
    d = tower.base_dim
    block = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        out = op(z_embed(tower.basis_vector(0, i)))
        col = out.head.get(0)
        if col is not None:
            block[:, i] = col
    return block


def dilated_cesaro_direct(dil: NagyDilation,
                          x_op: Callable[[NagyVector], NagyVector],
                          y_op: Callable[[NagyVector], NagyVector],
                          state: State, n_values: Sequence[int],
                          k_window: int, verdict: Optional[str] = None) -> ErgodicReport:
    """Direct graded evaluation of the dilated correlation averages.

    For each k up to the window the level-0 block of the compressed
    conjugated product is evaluated on the base basis; capacity errors
    surface as ``CapacityExceeded``.
    """
    k_max = max(n_values)
    if k_max > k_window:
        raise CapacityExceeded(f"horizon {k_max} exceeds the window {k_window}")
    _check_invariant(dil.tower.channel, state)
    mean_x = state.expect(compression_block(dil, x_op))
    mean_y = state.expect(compression_block(dil, y_op))
    terms = np.empty(k_max + 1, dtype=np.complex128)
    for k in range(k_max + 1):
        def conjugated(v: NagyVector, _k=k) -> NagyVector:
            return x_op(dil.vhat_adjoint_apply(_k, y_op(dil.vhat_apply(_k, v))))

        terms[k] = state.expect(compression_block(dil, conjugated)) - mean_x * mean_y
    return _report_from_terms(terms, n_values, verdict, method="cesaro")


# ---------------------------------------------------------------------------
# The corner term: direct evaluation and closed-form reduction.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CornerTerms:
    """The two summands of the corner expansion at one time step."""

    term_c: complex   # corner-adjoint part, through C(k)†
    term_w: complex   # shift part, through W^{k†}; zero beyond the read slot


def lemma_terms(dil: NagyDilation, corner: FactoredCorner, y11,
                y21: Optional[Callable[[NagyDilation, GradedVector], TailVector]],
                state: State, k: int) -> CornerTerms:
    """Direct graded evaluation of both corner summands at time k."""
    tower = dil.tower
    d = tower.base_dim
    y11 = as_matrix(y11)
    block_c = np.zeros((d, d), dtype=np.complex128)
    block_w = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        raised = v_pow_apply(tower, k, tower.basis_vector(0, i))
        out_c = corner.apply(dil, dil.c_adjoint_apply(k, _pi_apply(dil, y11, raised)))
        col = out_c.get(0)
        if col is not None:
            block_c[:, i] = col
        if y21 is not None:
            out_w = corner.apply(dil, y21(dil, raised).shift_right(k))
            col = out_w.get(0)
            if col is not None:
                block_w[:, i] = col
    return CornerTerms(term_c=state.expect(block_c), term_w=state.expect(block_w))


def corner_reduction_terms(phi: UcpMap, corner: FactoredCorner) -> list[ReducedTerm]:
    """Rewrite A(γ|F|α)B(β| as a combination of algebra·(ϑ| words.

    Each returned term is a lowering word of weight β̇ + m + 1 whose
    innermost exponent is at least one (canonical form), ready for the
    telescoping evaluation.
    """
    if corner.is_zero:
        return []
    f_terms = bra_f_ket(phi, corner.gamma, corner.alpha)
    beta_term = _canonical_bra(
        list(zip(corner.beta.exponents, corner.beta.coefficients)), corner.b_coeff)
    out = []
    for t in f_terms:
        term = compose_terms(phi, _absorb_left(corner.a_coeff, t), beta_term)
        if term.kind != "bra":
            raise ValueError("corner reduction must produce lowering words")
        out.append(term)
    return out


def lemma_reduction(corner: FactoredCorner, y11, phi: UcpMap, phi_nat: UcpMap,
                    state: State, k: int,
                    terms: Optional[list[ReducedTerm]] = None,
                    y_powers: Optional[Sequence[np.ndarray]] = None) -> complex:
    """Closed-form value of the corner-adjoint summand at time k > β̇ + m.

    The word collapses to R(ϑ| F Φ^j(Y) V^{ϑ̇} with j = k − β̇ − m − 1; the
    defect expansion leaves the innermost difference

        R_k = Φ^{n₁}(C₁ · Φ^j(Y)) − Φ^{n₁−1}(Φ(C₁) · Φ^{j+1}(Y)),

    and the remaining exponents telescope through the state-adjoint map:
    the value is trace(ρ · B · R_k) with B built by alternating Φ_♮ powers
    and string coefficients from the outside in.
    """
    y11 = as_matrix(y11)
    if corner.is_zero:
        return 0j
    cutoff = corner.beta.weight + corner.m
    if k <= cutoff:
        raise ValueError(f"closed form needs k > {cutoff}, got {k}")
    if terms is None:
        terms = corner_reduction_terms(phi, corner)
    j = k - cutoff - 1
    if y_powers is not None:
        y_j, y_j1 = y_powers[j], y_powers[j + 1]
    else:
        y_j = phi.apply_power(j, y11)
        y_j1 = phi.apply(y_j)
    value = 0j
    for term in terms:
        theta = term.string
        n1, c1 = theta.exponents[0], theta.coefficients[0]
        r_k = phi.apply_power(n1, c1 @ y_j) - phi.apply_power(n1 - 1, phi.apply(c1) @ y_j1)
        chain = term.coeff
        for idx in range(theta.length - 1, 0, -1):
            chain = phi_nat.apply_power(theta.exponents[idx], chain) @ theta.coefficients[idx]
        value += state.expect(chain @ r_k)
    return value


def dilated_cesaro_reduced(dil: NagyDilation, x: GeneratedBlock, y: GeneratedBlock,
                           phi_nat: UcpMap, state: State, n_values: Sequence[int],
                           verdict: Optional[str] = None) -> ErgodicReport:
    """Transfer-path evaluation of the dilated averages.

    The head-compression term runs on M_d through channel powers; the
    corner-adjoint term uses the closed-form reduction beyond its cutoff
    (and vanishes at or below it); the shift term is evaluated on the
    graded window for the finitely many steps before it dies.  Cost grows
    linearly in the horizon, so large-time trends are reachable.
    """
    phi = dil.tower.channel
    _check_invariant(phi, state)
    n_max = max(n_values)
    x11, y11 = as_matrix(x.x11), as_matrix(y.x11)
    mean = state.expect(x11) * state.expect(y11)

    terms = np.zeros(n_max + 1, dtype=np.complex128)
    yk = y11
    for k in range(n_max + 1):
        terms[k] = state.expect(x11 @ yk) - mean
        yk = phi.apply(yk)

    corner = x.x12
    if corner is not None and not corner.is_zero:
        cutoff = corner.beta.weight + corner.m
        reduction = corner_reduction_terms(phi, corner)
        y_powers = [y11]
        for _ in range(n_max + 1):
            y_powers.append(phi.apply(y_powers[-1]))
        y21 = y.y21_applier()
        for k in range(n_max + 1):
            if k > cutoff:
                terms[k] += lemma_reduction(corner, y11, phi, phi_nat, state, k,
                                            terms=reduction, y_powers=y_powers)
            else:
                direct = lemma_terms(dil, corner, y11, y21, state, k)
                terms[k] += direct.term_c + direct.term_w
    return _report_from_terms(terms, n_values, verdict, method="both")


# ---------------------------------------------------------------------------
# Seeded samplers for generated instances.
# ---------------------------------------------------------------------------

def _unit_norm(rng: np.random.Generator, d: int) -> np.ndarray:
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return m / operator_norm(m)


def sample_corner(rng: np.random.Generator, d: int, max_weight: int = 2) -> FactoredCorner:
    """Random factored corner word with the slot-matching condition built in
    and all string weights at most ``max_weight``."""
    m = int(rng.integers(0, max_weight))
    alpha_w = int(rng.integers(0, max_weight - m))
    gamma_w = alpha_w + m + 1
    beta_w = int(rng.integers(0, max_weight + 1))
    return FactoredCorner(
        a_coeff=_unit_norm(rng, d),
        gamma=random_string(rng, d, gamma_w, 2),
        b_coeff=_unit_norm(rng, d),
        alpha=random_string(rng, d, alpha_w, 2),
        beta=random_string(rng, d, beta_w, 2),
        m=m,
    )


def sample_generated_pair(rng: np.random.Generator, d: int, max_weight: int = 2
                          ) -> tuple[GeneratedBlock, GeneratedBlock]:
    """Seeded (X, Y) in the generated-family block form for transfer checks."""
    x = GeneratedBlock(
        x11=_unit_norm(rng, d),
        x12=sample_corner(rng, d, max_weight),
    )
    y = GeneratedBlock(
        x11=_unit_norm(rng, d),
        x21=(_unit_norm(rng, d),
             random_string(rng, d, int(rng.integers(1, max_weight + 1)), 2)),
    )
    return x, y
