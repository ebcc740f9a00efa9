"""Minimal unitary dilation of the tower isometry.

The dilated space is head ⊕ tail, where the head is a graded vector and the
tail is a finitely-supported sequence of graded vectors in the range of the
defect projection F = I − VV†.  The unitary acts in block form

    [[ V^n, C(n) ], [ 0, W^n ]],   C(n) = Σ_{j=1..n} V^{n−j} F Π_{j−1},

with W the left shift on tail slots and Π_j the slot projections.  The
n-step power is implemented directly from the C(n) sum (and its adjoint
from the explicit slot formula), so iterated single steps serve as an
independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import CapacityExceeded
from .tower import (
    GradedVector,
    Tower,
    f_projection,
    v_pow_apply,
    v_star_pow_apply,
)


class TailVector:
    """Finitely-supported sequence slot ↦ graded vector (zero when absent)."""

    __slots__ = ("entries",)

    def __init__(self, entries: Optional[dict[int, GradedVector]] = None):
        self.entries = {}
        if entries:
            for j, xi in entries.items():
                if xi.components:
                    self.entries[int(j)] = xi

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.entries))

    def slot(self, j: int) -> GradedVector:
        return self.entries.get(j, GradedVector())

    def __add__(self, other: "TailVector") -> "TailVector":
        out = dict(self.entries)
        for j, xi in other.entries.items():
            out[j] = out[j] + xi if j in out else xi
        return TailVector(out)

    def __sub__(self, other: "TailVector") -> "TailVector":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "TailVector":
        return TailVector({j: xi.scale(c) for j, xi in self.entries.items()})

    def inner(self, other: "TailVector") -> complex:
        acc = 0.0 + 0.0j
        for j, xi in self.entries.items():
            if j in other.entries:
                acc += xi.inner(other.entries[j])
        return complex(acc)

    def shift_left(self, n: int) -> "TailVector":
        """W^n: slot j of the result is old slot j + n."""
        return TailVector({j - n: xi for j, xi in self.entries.items() if j >= n})

    def shift_right(self, n: int) -> "TailVector":
        """W^{n†}: old slot j moves to slot j + n."""
        return TailVector({j + n: xi for j, xi in self.entries.items()})

    def __repr__(self):
        return f"TailVector(slots={list(self.support)})"


class NagyVector:
    """Element of head ⊕ tail; tail entries are expected in range(F)."""

    __slots__ = ("head", "tail")

    def __init__(self, head: Optional[GradedVector] = None,
                 tail: Optional[TailVector] = None):
        self.head = head if head is not None else GradedVector()
        self.tail = tail if tail is not None else TailVector()

    def __add__(self, other: "NagyVector") -> "NagyVector":
        return NagyVector(self.head + other.head, self.tail + other.tail)

    def __sub__(self, other: "NagyVector") -> "NagyVector":
        return NagyVector(self.head - other.head, self.tail - other.tail)

    def scale(self, c: complex) -> "NagyVector":
        return NagyVector(self.head.scale(c), self.tail.scale(c))

    def inner(self, other: "NagyVector") -> complex:
        return self.head.inner(other.head) + self.tail.inner(other.tail)

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))


def z_embed(x: GradedVector) -> NagyVector:
    """Isometric embedding: head = x, empty tail."""
    return NagyVector(head=x.copy(), tail=TailVector())


def z_adjoint(v: NagyVector) -> GradedVector:
    """Compression back to the head space."""
    return v.head.copy()


@dataclass(frozen=True)
class NagyDilation:
    """Unitary-dilation context: the tower, its defect projection, a window.

    Powers up to ``window`` applied to vectors within tower capacity are
    exactly inner-product preserving.
    """

    tower: Tower
    window: int

    def f_apply(self, x: GradedVector) -> GradedVector:
        return f_projection(self.tower).apply(x)

    def slot_embed(self, j: int, psi: GradedVector) -> TailVector:
        """Π_j†: place F·psi at slot j."""
        return TailVector({j: self.f_apply(psi)})

    def tail_in_range_defect(self, tail: TailVector) -> float:
        """max_j ‖F ξ_j − ξ_j‖ — zero when every entry lies in range(F)."""
        worst = 0.0
        for xi in tail.entries.values():
            worst = max(worst, (self.f_apply(xi) - xi).norm())
        return worst

    def make_tail(self, entries: dict[int, GradedVector]) -> TailVector:
        """Build a tail with entries projected through F."""
        return TailVector({j: self.f_apply(xi) for j, xi in entries.items()})

    def random_nagy_vector(self, rng: np.random.Generator, head_levels: Iterable[int],
                           tail_slots: Iterable[int], tail_levels: Iterable[int],
                           normalize: bool = True) -> NagyVector:
        head = self.tower.random_vector(rng, head_levels, normalize=False)
        tail = self.make_tail({
            j: self.tower.random_vector(rng, tail_levels, normalize=False)
            for j in tail_slots})
        v = NagyVector(head, tail)
        if normalize and v.norm() > 0:
            v = v.scale(1.0 / v.norm())
        return v

    # ----- corner operators ------------------------------------------------

    def c_apply(self, n: int, tail: TailVector) -> GradedVector:
        """C(n) ξ = Σ_{j=1..n} V^{n−j} F ξ_{j−1}."""
        out = GradedVector()
        for j in range(1, n + 1):
            xi = tail.slot(j - 1)
            if xi.components:
                out = out + v_pow_apply(self.tower, n - j, self.f_apply(xi))
        return out

    def c_adjoint_apply(self, n: int, psi: GradedVector) -> TailVector:
        """C(n)† Ψ fills slots 0..n−1 with F V^{(n−1−j)†} Ψ."""
        entries = {}
        for j in range(n):
            entries[j] = self.f_apply(v_star_pow_apply(self.tower, n - 1 - j, psi))
        return TailVector(entries)

    # ----- dilated unitary powers -------------------------------------------

    def vhat_apply(self, n: int, v: NagyVector) -> NagyVector:
        """n-th power: head ← Vⁿ·head + C(n)·tail, tail ← Wⁿ·tail."""
        self._check_window(n, v)
        head = v_pow_apply(self.tower, n, v.head) + self.c_apply(n, v.tail)
        return NagyVector(head=head, tail=v.tail.shift_left(n))

    def vhat_adjoint_apply(self, n: int, v: NagyVector) -> NagyVector:
        """Adjoint power: head ← V^{n†}·head, tail ← C(n)†·head + W^{n†}·tail."""
        self._check_window(n)
        head = v_star_pow_apply(self.tower, n, v.head)
        tail = self.c_adjoint_apply(n, v.head) + v.tail.shift_right(n)
        return NagyVector(head=head, tail=tail)

    def _check_window(self, n: int, v: Optional[NagyVector] = None) -> None:
        if n < 0:
            raise ValueError("power must be nonnegative")
        if n > self.window:
            raise CapacityExceeded(f"power {n} exceeds the window {self.window}")
        if v is not None and v.head.max_level + n > self.tower.num_levels:
            raise CapacityExceeded(
                f"head support {v.head.max_level} + power {n} exceeds "
                f"{self.tower.num_levels} tower levels")


def build_nagy(tower: Tower, window: Optional[int] = None) -> NagyDilation:
    return NagyDilation(tower=tower, window=window if window is not None else tower.num_levels)


# ---------------------------------------------------------------------------
# Identity reports.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelIdentitiesReport:
    """Maximum residuals of the slot-shift and corner-adjoint identities."""

    shift_forward: float      # Π_n W^m = Π_{n+m}
    shift_adjoint: float      # Π_n W^{m†} = Π_{n−m}, zero branch included
    corner_adjoint: float     # Π_p C(k)† = F V^{(k−p−1)†}, zero branch included
    trials: int

    @property
    def max_residual(self) -> float:
        return max(self.shift_forward, self.shift_adjoint, self.corner_adjoint)


def rel_identities_check(dil: NagyDilation, n: int, m: int, k: int, p: int,
                         trials: int, seed: int = 0) -> RelIdentitiesReport:
    """Evaluate both shift identities and the corner-adjoint identity on
    random finitely-supported vectors, returning the worst residuals.

    Requires n + m within the tail slots exercised and k ≤ window.
    """
    if k > dil.window:
        raise CapacityExceeded(f"corner power {k} exceeds window {dil.window}")
    rng = np.random.default_rng(seed)
    tower = dil.tower
    max_level = max(0, min(2, tower.num_levels - k))

    r_fwd = 0.0
    r_adj = 0.0
    r_corner = 0.0
    for _ in range(trials):
        tail = dil.make_tail({
            j: tower.random_vector(rng, range(0, max_level + 1), normalize=False)
            for j in range(n + m + 1)})

        # Π_n W^m ξ = ξ_{n+m}
        lhs = tail.shift_left(m).slot(n)
        r_fwd = max(r_fwd, (lhs - tail.slot(n + m)).norm())

        # Π_n W^{m†} ξ = ξ_{n−m} (n ≥ m) or 0
        lhs = tail.shift_right(m).slot(n)
        rhs = tail.slot(n - m) if n >= m else GradedVector()
        r_adj = max(r_adj, (lhs - rhs).norm())

        # Π_p C(k)† Ψ = F V^{(k−p−1)†} Ψ (k > p) or 0
        psi = tower.random_vector(rng, range(0, max_level + 1), normalize=False)
        lhs = dil.c_adjoint_apply(k, psi).slot(p)
        if k > p:
            rhs = dil.f_apply(v_star_pow_apply(tower, k - p - 1, psi))
        else:
            rhs = GradedVector()
        r_corner = max(r_corner, (lhs - rhs).norm())
    return RelIdentitiesReport(shift_forward=r_fwd, shift_adjoint=r_adj,
                               corner_adjoint=r_corner, trials=trials)


def minimality_span_dim(dil: NagyDilation, k_max: int, rank_tol: float = 1e-8) -> int:
    """Numerical rank of the Gram matrix of {V̂^k Z e_i : |k| ≤ k_max}.

    Negative powers use the adjoint (the dilation is unitary on the window).
    The threshold is relative to the top Gram eigenvalue.
    """
    tower = dil.tower
    if k_max > dil.window or k_max > tower.num_levels:
        raise CapacityExceeded(f"power range ±{k_max} exceeds capacity")
    vectors: list[NagyVector] = []
    for i in range(tower.base_dim):
        base = z_embed(tower.basis_vector(0, i))
        for k in range(0, k_max + 1):
            vectors.append(dil.vhat_apply(k, base))
        for k in range(1, k_max + 1):
            vectors.append(dil.vhat_adjoint_apply(k, base))
    gram = np.zeros((len(vectors), len(vectors)), dtype=np.complex128)
    for a, va in enumerate(vectors):
        for b, vb in enumerate(vectors):
            gram[a, b] = va.inner(vb)
    w = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
    top = max(float(w[-1]), 1e-300)
    return int(np.sum(w > rank_tol * top))
