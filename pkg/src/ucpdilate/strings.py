"""String calculus over the dilated algebra.

A string packs exponents and coefficients (n_1..n_r, A_1..A_r) and induces
the raising word  |α) = A_1 V^{n_1} ··· A_r V^{n_r}  and the lowering word
(α| = V^{n_r†} A_r ··· V^{n_1†} A_1 on the graded space, with V the tower
isometry and A_j acting through the level-diagonal representation.  The
algebra 𝔄 is the represented copy of M_d: membership of a shift-0 operator
means its level-0 block propagates level-consistently.

Core machinery: an exact word reducer folding V† a V = Φ(a), which
classifies (α| R |β) as an algebra element, algebra·bra, or ket·algebra;
on top of it sit the defect-compressed gamma operators Γ(α) = (α|FΠ_{α̇−1},
the slot-to-slot napla operators, their product table, the tail operator
system membership sampler, and the block operator system on the dilated
space together with its conjugation checks.

Everything acts through appliers (composition closures with declared
capacity); whole-space matrices are never formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .algebra import adjoint, as_matrix, operator_norm
from .channel import UcpMap
from .errors import CapacityExceeded, DimensionMismatch
from .nagy import NagyDilation, NagyVector, TailVector
from .tower import GradedVector, pi_infty, v_pow_apply, v_star_pow_apply


# ---------------------------------------------------------------------------
# Strings.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraString:
    """Exponents and matching coefficient matrices; may be empty (the unit).

    Entry 1 sits innermost in the lowering word and outermost-left in the
    raising word.  The final exponent is always carried: the raising word
    ends in V^{n_r}, so weights add under concatenation.
    """

    exponents: tuple[int, ...]
    coefficients: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.exponents) != len(self.coefficients):
            raise ValueError("exponents and coefficients must pair up")
        if any(e < 0 for e in self.exponents):
            raise ValueError("exponents must be nonnegative")
        object.__setattr__(self, "coefficients",
                           tuple(as_matrix(c) for c in self.coefficients))

    @property
    def weight(self) -> int:
        return sum(self.exponents)

    @property
    def length(self) -> int:
        return len(self.exponents)

    def adjoint(self) -> "AlgebraString":
        """Same exponents, daggered coefficients: the raising word of the
        result is the operator adjoint of this string's lowering word."""
        return AlgebraString(self.exponents, tuple(adjoint(c) for c in self.coefficients))

    @classmethod
    def unit(cls, d: int) -> "AlgebraString":
        return cls((1,), (np.eye(d, dtype=np.complex128),))

    @classmethod
    def trivial(cls, d: int) -> "AlgebraString":
        return cls((0,), (np.eye(d, dtype=np.complex128),))


def random_string(rng: np.random.Generator, d: int, weight: int,
                  max_length: int = 2, coeff_pool: Optional[Sequence[np.ndarray]] = None
                  ) -> AlgebraString:
    """Seeded string with the given weight; coefficients drawn from a pool
    of unit-norm matrices (random ones are generated when no pool is given)."""
    length = int(rng.integers(1, max_length + 1))
    cuts = np.sort(rng.integers(0, weight + 1, size=length - 1))
    exps = np.diff(np.concatenate(([0], cuts, [weight])))
    coeffs = []
    for _ in range(length):
        if coeff_pool is not None:
            coeffs.append(coeff_pool[int(rng.integers(0, len(coeff_pool)))])
        else:
            c = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            coeffs.append(c / operator_norm(c))
    return AlgebraString(tuple(int(e) for e in exps), tuple(coeffs))


# ---------------------------------------------------------------------------
# Appliers for the raising/lowering words and the gamma operators.
# ---------------------------------------------------------------------------

def _pi_apply(dil: NagyDilation, a: np.ndarray, x: GradedVector) -> GradedVector:
    return pi_infty(dil.tower, a).apply(x)


def ket_apply(dil: NagyDilation, alpha: AlgebraString, x: GradedVector) -> GradedVector:
    """Apply the raising word |α); support climbs by the string weight."""
    for exp, coeff in zip(reversed(alpha.exponents), reversed(alpha.coefficients)):
        x = v_pow_apply(dil.tower, exp, x)
        x = _pi_apply(dil, coeff, x)
    return x


def bra_apply(dil: NagyDilation, alpha: AlgebraString, x: GradedVector) -> GradedVector:
    """Apply the lowering word (α|; support drops by the string weight."""
    for exp, coeff in zip(alpha.exponents, alpha.coefficients):
        x = _pi_apply(dil, coeff, x)
        x = v_star_pow_apply(dil.tower, exp, x)
    return x


@dataclass(frozen=True)
class GammaOperator:
    """Γ(α) = (α| F Π_{α̇−1}, a tail-to-head map; needs weight ≥ 1."""

    string: AlgebraString

    def __post_init__(self):
        if self.string.weight < 1:
            raise ValueError("gamma operators need strings of weight ≥ 1")


def gamma_apply(dil: NagyDilation, alpha: AlgebraString, xi: TailVector) -> GradedVector:
    """Γ(α) ξ = (α| F ξ_{α̇−1}."""
    if alpha.weight < 1:
        raise ValueError("gamma operators need strings of weight ≥ 1")
    entry = xi.slot(alpha.weight - 1)
    if not entry.components:
        return GradedVector()
    return bra_apply(dil, alpha, dil.f_apply(entry))


def gamma_adjoint_apply(dil: NagyDilation, alpha: AlgebraString, psi: GradedVector) -> TailVector:
    """Γ(α)† ψ places F·|α†)ψ at slot α̇−1 (daggered coefficients)."""
    if alpha.weight < 1:
        raise ValueError("gamma operators need strings of weight ≥ 1")
    lifted = ket_apply(dil, alpha.adjoint(), psi)
    return TailVector({alpha.weight - 1: dil.f_apply(lifted)})


# ---------------------------------------------------------------------------
# Exact word reduction:  V^{m†} a V^{n} folds through the channel.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedTerm:
    """Canonical form of a reduced word.

    kind "algebra": the represented matrix ``coeff``;
    kind "bra":     π(coeff) · (string|   with all string exponents ≥ 1;
    kind "ket":     |string) · π(coeff)   likewise.
    """

    kind: str
    coeff: np.ndarray
    string: Optional[AlgebraString] = None

    @property
    def weight(self) -> int:
        return 0 if self.string is None else self.string.weight

    def scaled(self, c: complex) -> "ReducedTerm":
        return ReducedTerm(self.kind, c * self.coeff, self.string)


def _canonical_bra(entries: list[tuple[int, np.ndarray]], outer: np.ndarray) -> ReducedTerm:
    kept: list[tuple[int, np.ndarray]] = []
    carry: Optional[np.ndarray] = None
    for exp, coeff in entries:  # innermost first
        merged = coeff @ carry if carry is not None else coeff
        if exp == 0:
            carry = merged
        else:
            kept.append((exp, merged))
            carry = None
    if carry is not None:
        outer = outer @ carry
    if not kept:
        return ReducedTerm("algebra", outer)
    string = AlgebraString(tuple(e for e, _ in kept), tuple(c for _, c in kept))
    return ReducedTerm("bra", outer, string)


def _canonical_ket(entries: list[tuple[int, np.ndarray]], outer: np.ndarray) -> ReducedTerm:
    kept: list[tuple[int, np.ndarray]] = []
    carry: Optional[np.ndarray] = None
    for exp, coeff in entries:  # leftmost first
        merged = carry @ coeff if carry is not None else coeff
        if exp == 0:
            carry = merged
        else:
            kept.append((exp, merged))
            carry = None
    if carry is not None:
        outer = carry @ outer
    if not kept:
        return ReducedTerm("algebra", outer)
    string = AlgebraString(tuple(e for e, _ in kept), tuple(c for _, c in kept))
    return ReducedTerm("ket", outer, string)


def reduce_braket(phi: UcpMap, alpha: Optional[AlgebraString], middle: np.ndarray,
                  beta: Optional[AlgebraString]) -> ReducedTerm:
    """Reduce the word (α| · π(middle) · |β) to canonical form.

    The innermost V^{m†} (A · middle · B) V^{n} collapses to powers of Φ on
    matrices; the recursion consumes one string entry per step, so the side
    with the larger weight survives.
    """
    d = phi.dim
    middle = as_matrix(middle)
    if middle.shape != (d, d):
        raise DimensionMismatch(f"middle is {middle.shape}, channel dim {d}")
    bra = list(zip(alpha.exponents, alpha.coefficients)) if alpha is not None else []
    ket = list(zip(beta.exponents, beta.coefficients)) if beta is not None else []
    eye = np.eye(d, dtype=np.complex128)

    mid = middle
    while bra and ket:
        m, a = bra[0]
        n, b = ket[0]
        mid = phi.apply_power(min(m, n), a @ mid @ b)
        if m >= n:
            bra[0] = (m - n, eye)
            ket.pop(0)
        else:
            ket[0] = (n - m, eye)
            bra.pop(0)
    if bra:
        exp0, c0 = bra[0]
        bra[0] = (exp0, c0 @ mid)
        return _canonical_bra(bra, eye)
    if ket:
        exp0, c0 = ket[0]
        ket[0] = (exp0, mid @ c0)
        return _canonical_ket(ket, eye)
    return ReducedTerm("algebra", mid)


def _absorb_left(m: np.ndarray, t: ReducedTerm) -> ReducedTerm:
    if t.kind in ("algebra", "bra"):
        return ReducedTerm(t.kind, m @ t.coeff, t.string)
    s = t.string
    coeffs = (m @ s.coefficients[0],) + s.coefficients[1:]
    return ReducedTerm("ket", t.coeff, AlgebraString(s.exponents, coeffs))


def _absorb_right(t: ReducedTerm, m: np.ndarray) -> ReducedTerm:
    if t.kind in ("algebra", "ket"):
        return ReducedTerm(t.kind, t.coeff @ m, t.string)
    s = t.string
    coeffs = (s.coefficients[0] @ m,) + s.coefficients[1:]
    return ReducedTerm("bra", t.coeff, AlgebraString(s.exponents, coeffs))


def _concat_bra(first: AlgebraString, joint: np.ndarray, second: AlgebraString) -> AlgebraString:
    """(first| · π(joint) · (second| as one lowering word; second is innermost."""
    exps = second.exponents + first.exponents
    coeffs = second.coefficients + (first.coefficients[0] @ joint,) + first.coefficients[1:]
    return AlgebraString(exps, coeffs)


def _concat_ket(first: AlgebraString, joint: np.ndarray, second: AlgebraString) -> AlgebraString:
    """|first) · π(joint) · |second) as one raising word; first is outermost."""
    exps = first.exponents + second.exponents
    coeffs = first.coefficients + (joint @ second.coefficients[0],) + second.coefficients[1:]
    return AlgebraString(exps, coeffs)


def compose_terms(phi: UcpMap, t1: ReducedTerm, t2: ReducedTerm) -> ReducedTerm:
    """Product t1 · t2 in canonical form; ket·bra does not reduce and raises."""
    if t1.kind == "algebra":
        return _absorb_left(t1.coeff, t2)
    if t2.kind == "algebra":
        return _absorb_right(t1, t2.coeff)
    if t1.kind == "bra" and t2.kind == "bra":
        return ReducedTerm("bra", t1.coeff, _concat_bra(t1.string, t2.coeff, t2.string))
    if t1.kind == "ket" and t2.kind == "ket":
        return ReducedTerm("ket", t2.coeff, _concat_ket(t1.string, t1.coeff, t2.string))
    if t1.kind == "bra" and t2.kind == "ket":
        inner = reduce_braket(phi, t1.string, np.eye(phi.dim, dtype=np.complex128), t2.string)
        return _absorb_right(_absorb_left(t1.coeff, inner), t2.coeff)
    raise ValueError("a raising word times a lowering word does not reduce")


def bra_f_ket(phi: UcpMap, alpha: AlgebraString, beta: AlgebraString) -> list[ReducedTerm]:
    """(α| F |β) expanded through F = I − VV†: a two-term combination.

    The subtracted branch is returned with its sign folded into the
    coefficient, so the list sums to the operator.
    """
    unit = AlgebraString.unit(phi.dim)
    eye = np.eye(phi.dim, dtype=np.complex128)
    term_id = reduce_braket(phi, alpha, eye, beta)
    alpha_v = reduce_braket(phi, alpha, eye, unit)      # (α|V
    v_beta = reduce_braket(phi, unit, eye, beta)        # V†|β)
    cross = compose_terms(phi, alpha_v, v_beta)
    return [term_id, cross.scaled(-1.0)]


def term_apply(dil: NagyDilation, term: ReducedTerm, x: GradedVector) -> GradedVector:
    """Evaluate a reduced term on a graded vector."""
    if term.kind == "algebra":
        return _pi_apply(dil, term.coeff, x)
    if term.kind == "bra":
        return _pi_apply(dil, term.coeff, bra_apply(dil, term.string, x))
    return ket_apply(dil, term.string, _pi_apply(dil, term.coeff, x))


@dataclass(frozen=True)
class BraRKetResult:
    """Reduction of (α|R|β) plus its verification residual on test vectors."""

    term: ReducedTerm
    residual: float


def bra_R_ket(dil: NagyDilation, alpha: AlgebraString, middle: np.ndarray,
              beta: AlgebraString, seed: int = 0, trials: int = 4) -> BraRKetResult:
    """Classify (α|R|β) and verify the classification by applier equality.

    With α̇ ≥ β̇ the word factors as algebra · (weight α̇−β̇ lowering word),
    otherwise as (weight β̇−α̇ raising word) · algebra; the returned term
    carries the factorization and ``residual`` is the worst mismatch against
    the unreduced composition on random low-level vectors.
    """
    phi = dil.tower.channel
    term = reduce_braket(phi, alpha, middle, beta)
    rng = np.random.default_rng(seed)
    lift = beta.weight
    cap = dil.tower.num_levels - lift
    if cap < 0:
        raise CapacityExceeded(f"word needs {lift} levels of headroom")
    residual = 0.0
    for _ in range(trials):
        x = dil.tower.random_vector(rng, range(0, min(1, cap) + 1))
        direct = bra_apply(dil, alpha, _pi_apply(dil, middle, ket_apply(dil, beta, x)))
        reduced = term_apply(dil, term, x)
        residual = max(residual, (direct - reduced).norm())
    return BraRKetResult(term=term, residual=residual)


# ---------------------------------------------------------------------------
# Membership of shift-0 appliers in the represented algebra.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipResult:
    """Level-0 block of a shift-0 applier and its level-consistency residual."""

    element: np.ndarray
    residual: float


def algebra_membership(dil: NagyDilation, op: Callable[[GradedVector], GradedVector],
                       level_cap: Optional[int] = None, probes: int = 2,
                       seed: int = 0) -> MembershipResult:
    """Test whether an applier belongs to the represented copy of M_d.

    The level-0 block is extracted column by column; sampled higher levels
    are then probed with random vectors and compared against the lifted
    block.  The residual includes any leakage into other levels.
    """
    tower = dil.tower
    d = tower.base_dim
    cap = level_cap if level_cap is not None else min(3, tower.num_levels)
    rng = np.random.default_rng(seed)

    element = np.zeros((d, d), dtype=np.complex128)
    leak = 0.0
    for i in range(d):
        y = op(tower.basis_vector(0, i))
        col = y.get(0)
        element[:, i] = col if col is not None else np.zeros(d)
        off = GradedVector({n: c for n, c in y.components.items() if n != 0})
        leak = max(leak, off.norm())

    residual = leak
    for n in range(1, cap + 1):
        for _ in range(probes):
            x = tower.random_vector(rng, [n])
            expected = GradedVector({n: tower.sigma_apply(n, element, x.get(n))})
            residual = max(residual, (op(x) - expected).norm())
    return MembershipResult(element=element, residual=residual)


# ---------------------------------------------------------------------------
# Gamma pair products.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaPairResult:
    """Γ(α)·Γ(β)† evaluated and classified.

    ``element`` is the extracted algebra element when the weights match
    (None for the orthogonal case); ``zero_residual`` bounds the applier on
    test tails when weights differ; ``membership_residual`` is the
    level-consistency defect; ``expansion_residual`` compares the extracted
    element against the two-branch reduction of (α|F|β†).
    """

    is_zero: bool
    element: Optional[np.ndarray]
    zero_residual: float
    membership_residual: float
    expansion_residual: float


def gamma_pair_product(dil: NagyDilation, alpha: AlgebraString, beta: AlgebraString,
                       seed: int = 0, trials: int = 8,
                       level_cap: Optional[int] = None) -> GammaPairResult:
    """Product of a gamma operator with the adjoint of another."""
    if alpha.weight < 1 or beta.weight < 1:
        raise ValueError("gamma operators need strings of weight ≥ 1")
    phi = dil.tower.channel

    def product(x: GradedVector) -> GradedVector:
        return gamma_apply(dil, alpha, gamma_adjoint_apply(dil, beta, x))

    if alpha.weight != beta.weight:
        rng = np.random.default_rng(seed)
        worst = 0.0
        cap = max(0, dil.tower.num_levels - beta.weight)
        for _ in range(trials):
            x = dil.tower.random_vector(rng, range(0, min(1, cap) + 1))
            worst = max(worst, product(x).norm())
        return GammaPairResult(is_zero=True, element=None, zero_residual=worst,
                               membership_residual=0.0, expansion_residual=0.0)

    cap = level_cap if level_cap is not None else min(
        2, dil.tower.num_levels - beta.weight)
    member = algebra_membership(dil, product, level_cap=cap, seed=seed)
    terms = bra_f_ket(phi, alpha, beta.adjoint())
    reduced = np.zeros_like(member.element)
    for t in terms:
        if t.kind != "algebra":
            raise ValueError("equal weights must reduce to algebra elements")
        reduced += t.coeff
    return GammaPairResult(
        is_zero=False, element=member.element, zero_residual=0.0,
        membership_residual=member.residual,
        expansion_residual=operator_norm(member.element - reduced))


# ---------------------------------------------------------------------------
# Napla operators: F-compressed slot-to-slot words.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NaplaOperator:
    """Δ_k(A, α, β) = Π†_{α̇+k} F |α) A (β| F Π_{β̇+k} on tail sequences.

    The offset may go negative as long as both slot indices stay
    nonnegative; products of offset-0 operators with weight-0 strings land
    there and nowhere else.
    """

    k: int
    coeff: np.ndarray
    alpha: AlgebraString
    beta: AlgebraString

    def __post_init__(self):
        if self.alpha.weight + self.k < 0 or self.beta.weight + self.k < 0:
            raise ValueError("slot indices must be nonnegative")
        object.__setattr__(self, "coeff", as_matrix(self.coeff))

    @property
    def read_slot(self) -> int:
        return self.beta.weight + self.k

    @property
    def write_slot(self) -> int:
        return self.alpha.weight + self.k

    def adjoint(self) -> "NaplaOperator":
        return NaplaOperator(self.k, adjoint(self.coeff), self.beta, self.alpha)


def napla_apply(dil: NagyDilation, delta: NaplaOperator, xi: TailVector) -> TailVector:
    """Read slot β̇+k, run F, (β|, A, |α), F, write slot α̇+k."""
    entry = xi.slot(delta.read_slot)
    if not entry.components:
        return TailVector()
    v = dil.f_apply(entry)
    v = bra_apply(dil, delta.beta, v)
    v = _pi_apply(dil, delta.coeff, v)
    v = ket_apply(dil, delta.alpha, v)
    v = dil.f_apply(v)
    return TailVector({delta.write_slot: v})


def napla_adjoint(delta: NaplaOperator) -> NaplaOperator:
    return delta.adjoint()


@dataclass(frozen=True)
class NaplaSum:
    """Finite linear combination of napla operators (scalars live in the
    coefficients); the empty combination is the zero operator."""

    terms: tuple[NaplaOperator, ...]

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def apply(self, dil: NagyDilation, xi: TailVector) -> TailVector:
        out = TailVector()
        for t in self.terms:
            out = out + napla_apply(dil, t, xi)
        return out

    def adjoint(self) -> "NaplaSum":
        return NaplaSum(tuple(t.adjoint() for t in self.terms))


def _bra_word_product(s: AlgebraString) -> np.ndarray:
    """Coefficient product of a weight-0 string read as a lowering word."""
    if s.length == 0:
        raise ValueError("empty string has no coefficient dimension")
    out = s.coefficients[0]
    for c in s.coefficients[1:]:
        out = c @ out
    return out


def _ket_word_product(s: AlgebraString) -> np.ndarray:
    """Coefficient product of a weight-0 string read as a raising word."""
    if s.length == 0:
        raise ValueError("empty string has no coefficient dimension")
    out = s.coefficients[0]
    for c in s.coefficients[1:]:
        out = out @ c
    return out


def napla_product(phi: UcpMap, d1: NaplaOperator, d2: NaplaOperator) -> NaplaSum:
    """Product table for Δ_k(A,α,β) · Δ_h(B,γ,δ).

    Zero unless the write slot of the right factor meets the read slot of
    the left one (k+β̇ = h+γ̇).  Equal middle weights of at least one
    reduce (β|F|γ) to a single algebra element and the product is one
    napla; differing weights contribute one napla per branch of the defect
    expansion.  When both middle strings have weight zero the subtracted
    branch survives as a raising·lowering word, which fits the template
    only at offset k−1 with both strings extended by one unit shift — the
    single-operator product law has a genuine gap at that corner.
    """
    k, a_coeff, alpha, beta = d1.k, d1.coeff, d1.alpha, d1.beta
    h, b_coeff, gamma, delta = d2.k, d2.coeff, d2.alpha, d2.beta
    if k + beta.weight != h + gamma.weight:
        return NaplaSum(())
    d = phi.dim
    if beta.weight == 0 and gamma.weight == 0:  # forces h == k
        eye = np.eye(d, dtype=np.complex128)
        c_beta = _bra_word_product(beta) if beta.length else eye
        c_gamma = _ket_word_product(gamma) if gamma.length else eye
        direct = NaplaOperator(k, a_coeff @ c_beta @ c_gamma @ b_coeff, alpha, delta)
        alpha_ext = AlgebraString(alpha.exponents + (1,),
                                  alpha.coefficients + (a_coeff @ c_beta,))
        delta_ext = AlgebraString(delta.exponents + (1,),
                                  delta.coefficients + (c_gamma @ b_coeff,))
        cross = NaplaOperator(k - 1, -np.eye(d, dtype=np.complex128),
                              alpha_ext, delta_ext)
        return NaplaSum((direct, cross))
    f_terms = bra_f_ket(phi, beta, gamma)
    out: list[NaplaOperator] = []
    for t in f_terms:
        if t.kind == "algebra":            # h == k
            out.append(NaplaOperator(k, a_coeff @ t.coeff @ b_coeff, alpha, delta))
        elif t.kind == "bra":              # h > k: middle is algebra·(θ|
            theta = _concat_bra(t.string, b_coeff, delta)
            out.append(NaplaOperator(k, a_coeff @ t.coeff, alpha, theta))
        else:                              # k > h: middle is |θ)·algebra
            theta = _concat_ket(alpha, a_coeff, t.string)
            out.append(NaplaOperator(h, t.coeff @ b_coeff, theta, delta))
    return NaplaSum(tuple(out))


@dataclass(frozen=True)
class FactoredCorner:
    """Tail-to-head word in the factored form π(A) · Γ(γ) · Δ_m(B, α, β).

    This is the generic top-right corner of a generated block element.  The
    gamma slot (γ̇ − 1) must meet the napla write slot (α̇ + m) or the word
    is identically zero.
    """

    a_coeff: np.ndarray
    gamma: AlgebraString
    b_coeff: np.ndarray
    alpha: AlgebraString
    beta: AlgebraString
    m: int

    @property
    def is_zero(self) -> bool:
        return self.gamma.weight - 1 != self.alpha.weight + self.m

    @property
    def napla(self) -> NaplaOperator:
        return NaplaOperator(self.m, self.b_coeff, self.alpha, self.beta)

    def apply(self, dil: NagyDilation, xi: TailVector) -> GradedVector:
        if self.is_zero:
            return GradedVector()
        shuttled = napla_apply(dil, self.napla, xi)
        return _pi_apply(dil, self.a_coeff, gamma_apply(dil, self.gamma, shuttled))


# ---------------------------------------------------------------------------
# Operator system membership (sampled necessary condition) and shift
# invariance.
# ---------------------------------------------------------------------------

def gamma_family(d: int, max_weight: int,
                 coeff_pool: Optional[Sequence[np.ndarray]] = None) -> list[AlgebraString]:
    """Deterministic family of strings with weights 1..max_weight used by
    the operator-system sampler; the report should name this family."""
    if coeff_pool is None:
        eye = np.eye(d, dtype=np.complex128)
        coeff_pool = [eye]
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=np.complex128)
                e[i, j] = 1.0
                coeff_pool.append(e)
    family = []
    for w in range(1, max_weight + 1):
        for c in coeff_pool:
            family.append(AlgebraString((w,), (c,)))
        if w >= 2:
            family.append(AlgebraString((1, w - 1), (coeff_pool[0], coeff_pool[-1])))
    return family


@dataclass(frozen=True)
class SigmaMembershipReport:
    """Sampled operator-system membership: Γ_1 T Γ_2† lands in the algebra
    for every pair from the declared family (a necessary condition only)."""

    passed: bool
    max_residual: float
    pairs_checked: int
    family_weights: tuple[int, ...]


def sigma_membership(dil: NagyDilation, tail_op: Callable[[TailVector], TailVector],
                     gammas: Sequence[AlgebraString], tol: float = 1e-8,
                     seed: int = 0) -> SigmaMembershipReport:
    """Necessary-condition sampler for the tail operator system."""
    worst = 0.0
    pairs = 0
    for g1 in gammas:
        for g2 in gammas:
            def op(x: GradedVector, _g1=g1, _g2=g2) -> GradedVector:
                return gamma_apply(dil, _g1, tail_op(gamma_adjoint_apply(dil, _g2, x)))

            cap = min(1, max(0, dil.tower.num_levels - g2.weight - 1))
            member = algebra_membership(dil, op, level_cap=cap, probes=1, seed=seed)
            worst = max(worst, member.residual)
            pairs += 1
    weights = tuple(sorted({g.weight for g in gammas}))
    return SigmaMembershipReport(passed=worst <= tol, max_residual=worst,
                                 pairs_checked=pairs, family_weights=weights)


def w_conjugate(dil: NagyDilation, tail_op: Callable[[TailVector], TailVector]
                ) -> Callable[[TailVector], TailVector]:
    """ξ ↦ W† T W ξ."""

    def conj(xi: TailVector) -> TailVector:
        return tail_op(xi.shift_left(1)).shift_right(1)

    return conj


@dataclass(frozen=True)
class WInvarianceReport:
    passed: bool
    napla_shift_residual: float
    sigma_report: SigmaMembershipReport
    gamma_conjugation_residual: float


def w_invariance_check(dil: NagyDilation, delta: Optional[NaplaOperator] = None,
                       tail_op: Optional[Callable[[TailVector], TailVector]] = None,
                       gammas: Optional[Sequence[AlgebraString]] = None,
                       tol: float = 1e-9, seed: int = 0, trials: int = 4
                       ) -> WInvarianceReport:
    """Shift invariance of tail operators.

    For a napla, W†ΔW must equal the same napla with the slot offset bumped
    by one; for any tail operator, the conjugated operator must pass the
    operator-system sampler; and the gamma-conjugation reduction
    Γ(α)(W†TW)Γ(β)† = (α|FΠ_{α̇−2} T Π†_{β̇−2}F|β†) is checked on test
    vectors (slot −1 projections vanish).
    """
    tower = dil.tower
    rng = np.random.default_rng(seed)
    if tail_op is None:
        if delta is None:
            raise ValueError("provide a napla or a tail operator")
        tail_op = lambda xi: napla_apply(dil, delta, xi)
    conj = w_conjugate(dil, tail_op)

    shift_res = 0.0
    if delta is not None:
        bumped = NaplaOperator(delta.k + 1, delta.coeff, delta.alpha, delta.beta)
        max_slot = bumped.read_slot + 1
        lift = delta.alpha.weight
        levels = range(0, max(1, min(2, tower.num_levels - lift)))
        for _ in range(trials):
            xi = dil.make_tail({j: tower.random_vector(rng, levels, normalize=False)
                                for j in range(max_slot + 1)})
            got = conj(xi)
            want = napla_apply(dil, bumped, xi)
            shift_res = max(shift_res, _tail_distance(got, want))

    fam = gammas if gammas is not None else gamma_family(tower.base_dim, 2)[:4]
    sigma_rep = sigma_membership(dil, conj, fam, tol=max(tol, 1e-8), seed=seed)

    gamma_res = 0.0
    g_alpha = fam[-1] if fam else AlgebraString.unit(tower.base_dim)
    g_beta = fam[0] if fam else AlgebraString.unit(tower.base_dim)
    for _ in range(trials):
        x = tower.random_vector(rng, [0])
        lhs = gamma_apply(dil, g_alpha, conj(gamma_adjoint_apply(dil, g_beta, x)))
        # (α|FΠ_{α̇−2} T Π†_{β̇−2}F|β†) with slot −1 terms vanishing
        lifted = dil.f_apply(ket_apply(dil, g_beta.adjoint(), x))
        if g_beta.weight >= 2:
            inner = tail_op(TailVector({g_beta.weight - 2: lifted}))
        else:
            inner = TailVector()
        pick = inner.slot(g_alpha.weight - 2) if g_alpha.weight >= 2 else GradedVector()
        rhs = bra_apply(dil, g_alpha, dil.f_apply(pick)) if pick.components else GradedVector()
        gamma_res = max(gamma_res, (lhs - rhs).norm())

    passed = shift_res <= tol and sigma_rep.passed and gamma_res <= tol
    return WInvarianceReport(passed=passed, napla_shift_residual=shift_res,
                             sigma_report=sigma_rep,
                             gamma_conjugation_residual=gamma_res)


def _tail_distance(a: TailVector, b: TailVector) -> float:
    diff = a - b
    return float(np.sqrt(max(sum(xi.inner(xi).real for xi in diff.entries.values()), 0.0)))


# ---------------------------------------------------------------------------
# The block operator system on the dilated space.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SElement:
    """Block operator [[A, Γ(γ₁)], [Γ(γ₂)†, T]] on head ⊕ tail.

    ``tail_op`` is any tail applier (napla combinations, the identity, or
    zero via None); gammas may be absent.
    """

    a_block: np.ndarray
    gamma1: Optional[AlgebraString]
    gamma2: Optional[AlgebraString]
    tail_op: Optional[Callable[["NagyDilation", TailVector], TailVector]]

    def apply(self, dil: NagyDilation, v: NagyVector) -> NagyVector:
        head = _pi_apply(dil, self.a_block, v.head)
        if self.gamma1 is not None:
            head = head + gamma_apply(dil, self.gamma1, v.tail)
        tail = TailVector()
        if self.gamma2 is not None:
            tail = tail + gamma_adjoint_apply(dil, self.gamma2, v.head)
        if self.tail_op is not None:
            tail = tail + self.tail_op(dil, v.tail)
        return NagyVector(head=head, tail=tail)


def s_element(dil: NagyDilation, a_block, gamma1: Optional[AlgebraString] = None,
              gamma2: Optional[AlgebraString] = None,
              tail_op: Optional[Callable[[NagyDilation, TailVector], TailVector]] = None
              ) -> SElement:
    a_block = as_matrix(a_block)
    d = dil.tower.base_dim
    if a_block.shape != (d, d):
        raise DimensionMismatch(f"corner block is {a_block.shape}, base dim {d}")
    return SElement(a_block=a_block, gamma1=gamma1, gamma2=gamma2, tail_op=tail_op)


def tail_identity(dil: NagyDilation, xi: TailVector) -> TailVector:
    return xi


def napla_sum_tail_op(combo: NaplaSum) -> Callable[[NagyDilation, TailVector], TailVector]:
    def op(dil: NagyDilation, xi: TailVector) -> TailVector:
        return combo.apply(dil, xi)

    return op


def _bump_last_exponent(s: AlgebraString) -> AlgebraString:
    """String of V† · (s|: the outermost exponent grows by one."""
    exps = s.exponents[:-1] + (s.exponents[-1] + 1,)
    return AlgebraString(exps, s.coefficients)


@dataclass(frozen=True)
class SConjugationReport:
    """Residuals of the conjugation identifications for a block element.

    * corner_embed:      V†·A·C(1) is the gamma of the weight-1 string (1, A)
    * gamma_shift:       V†·Γ(α)·W is the gamma with outermost exponent +1
    * corner_napla:      C(1)†·A·C(1) is the offset-0 napla with unit strings
    * corner_gamma_napla: C(1)†·Γ(α)·W is the offset-0 napla pairing the unit
      string against α
    * block_decomposition: the conjugated block operator equals the sum of
      its identified blocks
    """

    corner_embed: float
    gamma_shift: float
    corner_napla: float
    corner_gamma_napla: float
    block_decomposition: float

    def passed(self, tol: float) -> bool:
        return max(self.corner_embed, self.gamma_shift, self.corner_napla,
                   self.corner_gamma_napla, self.block_decomposition) <= tol


def s_conjugation_check(dil: NagyDilation, elem: SElement, seed: int = 0,
                        trials: int = 4) -> SConjugationReport:
    """Verify that conjugating a block element by the dilation unitary lands
    back in the generated family, block identification by block identification."""
    tower = dil.tower
    rng = np.random.default_rng(seed)
    d = tower.base_dim
    trivial = AlgebraString.trivial(d)
    a = elem.a_block

    def rand_tail(slots: int) -> TailVector:
        return dil.make_tail({j: tower.random_vector(rng, [0, 1], normalize=False)
                              for j in range(slots)})

    # V†·A·C(1) vs Γ((1, A))
    emb_string = AlgebraString((1,), (a,))
    r_embed = 0.0
    for _ in range(trials):
        xi = rand_tail(2)
        lhs = v_star_pow_apply(tower, 1, _pi_apply(dil, a, dil.c_apply(1, xi)))
        rhs = gamma_apply(dil, emb_string, xi)
        r_embed = max(r_embed, (lhs - rhs).norm())

    # V†·Γ(α)·W vs Γ(α with outermost exponent bumped)
    r_shift = 0.0
    if elem.gamma1 is not None:
        g = elem.gamma1
        bumped = _bump_last_exponent(g)
        for _ in range(trials):
            xi = rand_tail(g.weight + 2)
            lhs = v_star_pow_apply(tower, 1, gamma_apply(dil, g, xi.shift_left(1)))
            rhs = gamma_apply(dil, bumped, xi)
            r_shift = max(r_shift, (lhs - rhs).norm())

    # C(1)†·A·C(1) vs Δ_0(A, trivial, trivial)
    nap = NaplaOperator(0, a, trivial, trivial)
    r_napla = 0.0
    for _ in range(trials):
        xi = rand_tail(2)
        lhs = dil.c_adjoint_apply(1, _pi_apply(dil, a, dil.c_apply(1, xi)))
        rhs = napla_apply(dil, nap, xi)
        r_napla = max(r_napla, _tail_distance(lhs, rhs))

    # C(1)†·Γ(α)·W vs Δ_0(I, trivial, α)
    r_gnap = 0.0
    if elem.gamma1 is not None:
        g = elem.gamma1
        nap2 = NaplaOperator(0, np.eye(d, dtype=np.complex128), trivial, g)
        for _ in range(trials):
            xi = rand_tail(g.weight + 2)
            lhs = dil.c_adjoint_apply(1, gamma_apply(dil, g, xi.shift_left(1)))
            rhs = napla_apply(dil, nap2, xi)
            r_gnap = max(r_gnap, _tail_distance(lhs, rhs))

    # Full block decomposition of the conjugated element.
    r_block = 0.0
    max_lift = max([1] + [s.weight for s in (elem.gamma1, elem.gamma2) if s is not None])
    head_levels = range(0, max(1, tower.num_levels - max_lift - 1))
    for _ in range(trials):
        v = dil.random_nagy_vector(rng, head_levels, range(3), [0, 1])
        conj = dil.vhat_adjoint_apply(1, elem.apply(dil, dil.vhat_apply(1, v)))

        head = v_star_pow_apply(
            tower, 1, _pi_apply(dil, a, v_pow_apply(tower, 1, v.head)))
        head = head + v_star_pow_apply(
            tower, 1, _pi_apply(dil, a, dil.c_apply(1, v.tail)))
        if elem.gamma1 is not None:
            head = head + v_star_pow_apply(
                tower, 1, gamma_apply(dil, elem.gamma1, v.tail.shift_left(1)))
        tail = dil.c_adjoint_apply(
            1, _pi_apply(dil, a, v_pow_apply(tower, 1, v.head)))
        if elem.gamma2 is not None:
            tail = tail + gamma_adjoint_apply(
                dil, elem.gamma2, v_pow_apply(tower, 1, v.head)).shift_right(1)
        tail = tail + dil.c_adjoint_apply(1, _pi_apply(dil, a, dil.c_apply(1, v.tail)))
        if elem.gamma1 is not None:
            tail = tail + dil.c_adjoint_apply(
                1, gamma_apply(dil, elem.gamma1, v.tail.shift_left(1)))
        if elem.gamma2 is not None:
            tail = tail + gamma_adjoint_apply(
                dil, elem.gamma2, dil.c_apply(1, v.tail)).shift_right(1)
        if elem.tail_op is not None:
            tail = tail + elem.tail_op(dil, v.tail.shift_left(1)).shift_right(1)
        assembled = NagyVector(head=head, tail=tail)
        r_block = max(r_block, (conj - assembled).norm())

    return SConjugationReport(corner_embed=r_embed, gamma_shift=r_shift,
                              corner_napla=r_napla, corner_gamma_napla=r_gnap,
                              block_decomposition=r_block)
