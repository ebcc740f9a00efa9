"""Iterated Stinespring tower on finitely-supported level-graded vectors.

Level n carries C^{r^n} ⊗ C^d where r is the (Choi-minimal) Kraus count.
The step isometry V_n stacks I_{r^n} ⊗ K_i, the step representation is
σ_n(a) = I_{r^n} ⊗ a, and the whole-space operators (the level-diagonal
representation, the level-raising isometry and its adjoint, the defect
projection) act as compositions on graded vectors — never materialized as
whole-space matrices, so truncation at the top level is the only limit and
all supported computations are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .algebra import as_matrix, operator_norm
from .channel import UcpMap, minimal_kraus
from .errors import BudgetExceeded, CapacityExceeded, DimensionMismatch

DEFAULT_BUDGET = 2 ** 26  # total Σ dim(level)² entries, ≈1 GB of complex128


class GradedVector:
    """Finitely-supported element of the level-graded direct sum.

    Absent levels mean zero.  Instances are cheap containers; arithmetic
    returns new vectors and never truncates.
    """

    __slots__ = ("components",)

    def __init__(self, components: Optional[dict[int, np.ndarray]] = None):
        self.components = {}
        if components:
            for n, x in components.items():
                x = np.asarray(x, dtype=np.complex128)
                if x.any():
                    self.components[int(n)] = x

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.components))

    @property
    def max_level(self) -> int:
        return max(self.components) if self.components else -1

    def get(self, n: int) -> Optional[np.ndarray]:
        return self.components.get(n)

    def copy(self) -> "GradedVector":
        return GradedVector({n: x.copy() for n, x in self.components.items()})

    def __add__(self, other: "GradedVector") -> "GradedVector":
        out = {n: x.copy() for n, x in self.components.items()}
        for n, x in other.components.items():
            out[n] = out[n] + x if n in out else x.copy()
        return GradedVector(out)

    def __sub__(self, other: "GradedVector") -> "GradedVector":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "GradedVector":
        return GradedVector({n: c * x for n, x in self.components.items()})

    def inner(self, other: "GradedVector") -> complex:
        acc = 0.0 + 0.0j
        for n, x in self.components.items():
            y = other.components.get(n)
            if y is not None:
                acc += np.vdot(x, y)
        return complex(acc)

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def __repr__(self):
        dims = {n: len(x) for n, x in sorted(self.components.items())}
        return f"GradedVector(levels={dims})"


@dataclass(frozen=True)
class GradedOperator:
    """Level-block operator with a fixed shift.

    ``block_vec(n, x)`` applies the level-n block (input level n, output
    level n + shift); ``None`` means that level is annihilated.  Applying to
    vectors supported in levels ≤ ``max_input_level`` is exact.
    """

    shift: int
    max_input_level: int
    block_vec: Callable[[int, np.ndarray], Optional[np.ndarray]] = field(repr=False)
    block_matrix: Optional[Callable[[int], Optional[np.ndarray]]] = field(
        default=None, repr=False)

    def apply(self, v: GradedVector) -> GradedVector:
        out: dict[int, np.ndarray] = {}
        for n, x in v.components.items():
            if n > self.max_input_level:
                raise CapacityExceeded(
                    f"support at level {n} exceeds operator capacity {self.max_input_level}")
            target = n + self.shift
            if target < 0:
                continue
            y = self.block_vec(n, x)
            if y is None:
                continue
            out[target] = out[target] + y if target in out else y
        return GradedVector(out)


class Tower:
    """Iterated dilation data: level dimensions, step isometries, step reps."""

    def __init__(self, channel: UcpMap, num_levels: int, dims: tuple[int, ...]):
        self.channel = channel
        self.num_levels = num_levels
        self.dims = dims
        self._base_dim = channel.dim
        self._rank = channel.kraus_count

    @property
    def base_dim(self) -> int:
        return self._base_dim

    @property
    def rank(self) -> int:
        return self._rank

    def level_dim(self, n: int) -> int:
        if not 0 <= n <= self.num_levels:
            raise CapacityExceeded(f"level {n} outside 0..{self.num_levels}")
        return self.dims[n]

    def _check_level_vec(self, n: int, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.level_dim(n),):
            raise DimensionMismatch(
                f"level-{n} component has shape {x.shape}, expected ({self.level_dim(n)},)")
        return x

    # ----- per-level actions ------------------------------------------------

    def sigma_apply(self, n: int, a: np.ndarray, x: np.ndarray) -> np.ndarray:
        """(I ⊗ a) x at level n."""
        x = self._check_level_vec(n, x)
        return (x.reshape(-1, self._base_dim) @ a.T).ravel()

    def sigma_matrix(self, n: int, a: np.ndarray) -> np.ndarray:
        dim = self.level_dim(n)
        return np.kron(np.eye(dim // self._base_dim), as_matrix(a))

    def v_step_apply(self, n: int, x: np.ndarray) -> np.ndarray:
        """Step isometry V_n: level n → level n+1."""
        if n + 1 > self.num_levels:
            raise CapacityExceeded(f"V_{n} would leave the built window {self.num_levels}")
        x2 = self._check_level_vec(n, x).reshape(-1, self._base_dim)
        return np.concatenate([(x2 @ k.T).ravel() for k in self.channel.kraus])

    def v_step_adjoint_apply(self, n: int, y: np.ndarray) -> np.ndarray:
        """V_n†: level n+1 → level n."""
        y = self._check_level_vec(n + 1, y)
        dn = self.level_dim(n)
        chunks = y.reshape(self._rank, dn)
        out = np.zeros(dn, dtype=np.complex128)
        for k, chunk in zip(self.channel.kraus, chunks):
            out += (chunk.reshape(-1, self._base_dim) @ k.conj()).ravel()
        return out

    def isometry_matrix(self, n: int) -> np.ndarray:
        """Dense V_n, for cross-checks at small levels."""
        blocks = np.eye(self.level_dim(n) // self._base_dim)
        return np.vstack([np.kron(blocks, k) for k in self.channel.kraus])

    # ----- vector builders --------------------------------------------------

    def basis_vector(self, n: int, i: int) -> GradedVector:
        e = np.zeros(self.level_dim(n), dtype=np.complex128)
        e[i] = 1.0
        return GradedVector({n: e})

    def random_vector(self, rng: np.random.Generator,
                      levels: Iterable[int], normalize: bool = True) -> GradedVector:
        comps = {}
        for n in levels:
            dim = self.level_dim(n)
            comps[n] = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v = GradedVector(comps)
        if normalize and v.norm() > 0:
            v = v.scale(1.0 / v.norm())
        return v


def build_tower(phi: UcpMap, num_levels: int, budget: int = DEFAULT_BUDGET,
                reduce: bool = True) -> Tower:
    """Iterate the Kraus-stacking dilation ``num_levels`` times.

    The channel is Choi-reduced first so level dimensions follow the minimal
    Kraus count exactly: dim(level n) = r^n · d.

    Raises
    ------
    BudgetExceeded
        Naming the first level at which Σ dim² would pass ``budget``.
    """
    if num_levels < 1:
        raise ValueError("a tower needs at least one dilation step")
    base = minimal_kraus(phi) if reduce else phi
    d, r = base.dim, base.kraus_count
    dims = []
    total = 0
    for n in range(num_levels + 1):
        dim = (r ** n) * d
        total += dim * dim
        if total > budget:
            raise BudgetExceeded(
                f"Σ dim² = {total} exceeds budget {budget} at level {n}", level=n)
        dims.append(dim)
    return Tower(channel=base, num_levels=num_levels, dims=tuple(dims))


# ---------------------------------------------------------------------------
# Whole-space operators.
# ---------------------------------------------------------------------------

def pi_infty(tower: Tower, a) -> GradedOperator:
    """Level-diagonal representation ⊕_n σ_n(a); level 0 carries a itself."""
    a = as_matrix(a)
    d = tower.base_dim
    if a.shape != (d, d):
        raise DimensionMismatch(f"operand is {a.shape}, base dim {d}")
    return GradedOperator(
        shift=0,
        max_input_level=tower.num_levels,
        block_vec=lambda n, x: tower.sigma_apply(n, a, x),
        block_matrix=lambda n: tower.sigma_matrix(n, a),
    )


def v_infty(tower: Tower) -> GradedOperator:
    """Level-raising isometry: level n component moves to n+1 through V_n."""
    return GradedOperator(
        shift=1,
        max_input_level=tower.num_levels - 1,
        block_vec=lambda n, x: tower.v_step_apply(n, x),
        block_matrix=lambda n: tower.isometry_matrix(n),
    )


def v_infty_adjoint(tower: Tower) -> GradedOperator:
    """Adjoint of the level-raising isometry; the level-0 input is dropped."""
    return GradedOperator(
        shift=-1,
        max_input_level=tower.num_levels,
        block_vec=lambda n, x: None if n == 0 else tower.v_step_adjoint_apply(n - 1, x),
        block_matrix=lambda n: None if n == 0 else adjoint_matrix(tower, n - 1),
    )


def adjoint_matrix(tower: Tower, n: int) -> np.ndarray:
    return tower.isometry_matrix(n).conj().T


def v_infty_apply(tower: Tower, x: GradedVector) -> GradedVector:
    return v_infty(tower).apply(x)


def v_infty_adjoint_apply(tower: Tower, x: GradedVector) -> GradedVector:
    return v_infty_adjoint(tower).apply(x)


def v_pow_apply(tower: Tower, n: int, x: GradedVector) -> GradedVector:
    for _ in range(n):
        x = v_infty_apply(tower, x)
    return x


def v_star_pow_apply(tower: Tower, n: int, x: GradedVector) -> GradedVector:
    for _ in range(n):
        x = v_infty_adjoint_apply(tower, x)
    return x


def f_projection(tower: Tower) -> GradedOperator:
    """Defect projection: identity at level 0, I − V_{n−1}V_{n−1}† above."""

    def block(n: int, x: np.ndarray) -> np.ndarray:
        if n == 0:
            return x.copy()
        return x - tower.v_step_apply(n - 1, tower.v_step_adjoint_apply(n - 1, x))

    def block_mat(n: int) -> np.ndarray:
        dim = tower.level_dim(n)
        if n == 0:
            return np.eye(dim, dtype=np.complex128)
        v = tower.isometry_matrix(n - 1)
        return np.eye(dim) - v @ v.conj().T

    return GradedOperator(shift=0, max_input_level=tower.num_levels,
                          block_vec=block, block_matrix=block_mat)


def covariance_residual(tower: Tower, a, level_cap: int) -> float:
    """Worst-case defect of V† π(a) V = π(Φ(a)) on basis vectors up to the cap.

    ``level_cap`` must stay one below the built window so the raised level
    exists.
    """
    if level_cap > tower.num_levels - 1:
        raise CapacityExceeded(
            f"level cap {level_cap} needs tower of at least {level_cap + 1} levels")
    a = as_matrix(a)
    pi_a = pi_infty(tower, a)
    pi_phi_a = pi_infty(tower, tower.channel.apply(a))
    worst = 0.0
    for n in range(level_cap + 1):
        for i in range(tower.level_dim(n)):
            x = tower.basis_vector(n, i)
            lhs = v_infty_adjoint_apply(tower, pi_a.apply(v_infty_apply(tower, x)))
            diff = lhs - pi_phi_a.apply(x)
            worst = max(worst, diff.norm())
    return worst
