"""Scenario runner: load a channel/scenario description, execute the
requested verification suites, and emit JSON + CSV reports.

Exit codes: 0 all properties pass, 1 at least one violation, 2 invalid
input or configuration (with a machine-readable error object on stdout).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import ergodic as erg
from . import nagy as ng
from . import strings as st
from . import stinespring as ss
from . import tower as tw
from .algebra import MatrixSubalgebra, State, matrix_from_json, operator_norm
from .channel import (
    AdjointAbsent,
    PRESETS,
    UcpMap,
    channel_from_spec,
    choi,
    invariant_state,
    is_multiplicative,
    minimal_kraus,
    phi_adjoint,
)
from .errors import UcpDilateError

SUITE_NAMES = ("stinespring", "tower", "nagy", "strings", "ergodic", "dilated")

DEFAULT_TOLERANCES = {
    "dilation.compression": 1e-9,
    "dilation.space-dimension": 0.5,          # integer equality
    "dilation.isometry": 1e-10,
    "dilation.multiplicative-unitary": 1e-8,
    "tower.step-isometry": 1e-10,
    "tower.covariance": 1e-9,
    "tower.defect-projection": 1e-10,
    "unitary-dilation.slot-shift": 1e-12,
    "unitary-dilation.corner-adjoint": 1e-12,
    "unitary-dilation.intertwine": 1e-12,
    "unitary-dilation.window-unitarity": 1e-12,
    "unitary-dilation.composition": 1e-12,
    "strings.gamma-orthogonality": 1e-12,
    "strings.gamma-membership": 1e-8,
    "strings.napla-product": 1e-9,
    "strings.shift-invariance": 1e-8,
    "strings.block-conjugation": 1e-9,
    "invariant-algebra.compression": 1e-8,
    "invariant-algebra.power-compression": 1e-9,
    "invariant-algebra.base-compression": 1e-9,
    "ergodic.oracle-equality": 1e-10,
    "ergodic.mixing-decay": 0.05,
    "ergodic.non-mixing-floor": 0.1,
    "dilated.path-agreement": 1e-8,
    "dilated.trend-ratio": 0.5,
    "dilated.trend-absolute": 0.05,
}

PRESET_NOTES = {
    "identity": "unitary corner cases: zero defect, single-level tower",
    "adu": "automorphisms: full multiplicative domain, conjugate state-adjoint",
    "depolarizing": "full-rank mixing: maximal dilation growth, fast Cesàro decay",
    "cyclic3": "peripheral spectrum: ergodic but not weakly mixing on the diagonal",
    "amplitude-damping": "non-faithful invariant state: state-adjoint rejection",
    "random-ucp": "seeded generic channels for dimension and compression sweeps",
    "rank2-faithful": "seeded search: faithful invariant state with state-adjoint, weak mixing",
}


@dataclass(frozen=True)
class PropertyRow:
    name: str
    anchor: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def as_dict(self) -> dict:
        return {"property": self.name, "anchor": self.anchor,
                "residual": float(self.residual), "tolerance": float(self.tolerance),
                "pass": bool(self.passed)}


@dataclass
class Scenario:
    name: str
    channel_spec: dict
    algebra_spec: object
    state_spec: object
    suites: tuple[str, ...]
    n_horizon: int
    k_window: int
    levels: int
    seed: int
    tolerances: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "Scenario":
        suites = tuple(raw.get("suites", list(SUITE_NAMES)))
        unknown = [s for s in suites if s not in SUITE_NAMES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}; valid: {list(SUITE_NAMES)}")
        if "seed" not in raw:
            raise ValueError("scenario requires a seed")
        return cls(
            name=str(raw.get("name", "scenario")),
            channel_spec=raw["channel"],
            algebra_spec=raw.get("algebra", "full"),
            state_spec=raw.get("state", "auto"),
            suites=suites,
            n_horizon=int(raw.get("N", 400)),
            k_window=int(raw.get("K_window", 8)),
            levels=int(raw.get("levels", 6)),
            seed=int(raw["seed"]),
            tolerances=dict(raw.get("tolerances", {})),
        )


class SuiteContext:
    """Everything a suite needs, built once per scenario."""

    def __init__(self, scenario: Scenario, tol_override: Optional[float]):
        self.scenario = scenario
        self.phi = channel_from_spec(scenario.channel_spec)
        self.reduced = minimal_kraus(self.phi)
        d = self.phi.dim
        spec = scenario.algebra_spec
        if spec == "full":
            self.alg = MatrixSubalgebra.full(d)
        elif spec == "diagonal":
            self.alg = MatrixSubalgebra.diagonal(d)
        else:
            mats = [matrix_from_json(m) for m in spec["basis"]]
            self.alg = MatrixSubalgebra.from_spanning(d, mats)
        if scenario.state_spec == "auto":
            self.state = invariant_state(self.phi).state
        else:
            self.state = State.from_density(matrix_from_json(scenario.state_spec["rho"]))
        self.tol_override = tol_override
        self._dil: Optional[ng.NagyDilation] = None

    def tol(self, key: str) -> float:
        if self.tol_override is not None:
            return self.tol_override
        return float(self.scenario.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    @property
    def dil(self) -> ng.NagyDilation:
        if self._dil is None:
            tower = tw.build_tower(self.phi, self.scenario.levels)
            self._dil = ng.build_nagy(tower, window=self.scenario.k_window)
        return self._dil


# ---------------------------------------------------------------------------
# Suites.
# ---------------------------------------------------------------------------

def _suite_stinespring(ctx: SuiteContext) -> list[PropertyRow]:
    rows = []
    gns = ss.gns_dilate(ctx.phi, MatrixSubalgebra.full(ctx.phi.dim))
    kra = ss.kraus_dilate(ctx.reduced)
    basis = MatrixSubalgebra.full(ctx.phi.dim).basis
    for label, triple in (("quotient", gns), ("stacked", kra)):
        worst = max(triple.compression_residual(b) for b in basis)
        rows.append(PropertyRow(f"compression-{label}", "dilation.compression",
                                worst, ctx.tol("dilation.compression")))
    expected = choi(ctx.phi).rank() * ctx.phi.dim
    rows.append(PropertyRow("space-dimension", "dilation.space-dimension",
                            abs(gns.space_dim - expected),
                            ctx.tol("dilation.space-dimension")))
    iso = operator_norm(gns.isometry.conj().T @ gns.isometry - np.eye(ctx.phi.dim))
    rows.append(PropertyRow("isometry", "dilation.isometry", iso,
                            ctx.tol("dilation.isometry")))
    defect = ss.unitarity_defect(gns)
    mult = is_multiplicative(ctx.phi)
    coherent = 0.0 if (mult == (defect <= 1e-8)) else 1.0
    rows.append(PropertyRow("multiplicative-unitary", "dilation.multiplicative-unitary",
                            coherent, ctx.tol("dilation.multiplicative-unitary")))
    return rows


def _suite_tower(ctx: SuiteContext) -> list[PropertyRow]:
    rows = []
    tower = ctx.dil.tower
    worst_iso = 0.0
    for n in range(min(3, tower.num_levels)):
        v = tower.isometry_matrix(n)
        worst_iso = max(worst_iso, operator_norm(
            v.conj().T @ v - np.eye(tower.level_dim(n))))
    rows.append(PropertyRow("step-isometry", "tower.step-isometry", worst_iso,
                            ctx.tol("tower.step-isometry")))
    rng = np.random.default_rng(ctx.scenario.seed)
    cap = min(2, tower.num_levels - 1)
    worst_cov = 0.0
    for _ in range(3):
        a = rng.standard_normal((tower.base_dim,) * 2) + 1j * rng.standard_normal(
            (tower.base_dim,) * 2)
        worst_cov = max(worst_cov, tw.covariance_residual(tower, a, cap))
    rows.append(PropertyRow("covariance", "tower.covariance", worst_cov,
                            ctx.tol("tower.covariance")))
    f = tw.f_projection(tower)
    x = tower.random_vector(rng, range(0, min(3, tower.num_levels + 1)))
    fx = f.apply(x)
    idem = (f.apply(fx) - fx).norm()
    pos = max(0.0, -x.inner(fx).real)
    rows.append(PropertyRow("defect-projection", "tower.defect-projection",
                            max(idem, pos), ctx.tol("tower.defect-projection")))
    return rows


def _suite_nagy(ctx: SuiteContext) -> list[PropertyRow]:
    rows = []
    dil = ctx.dil
    tower = dil.tower
    k = min(3, dil.window, tower.num_levels)
    rep = ng.rel_identities_check(dil, n=1, m=2, k=k, p=1, trials=10,
                                  seed=ctx.scenario.seed)
    rows.append(PropertyRow("slot-shift", "unitary-dilation.slot-shift",
                            max(rep.shift_forward, rep.shift_adjoint),
                            ctx.tol("unitary-dilation.slot-shift")))
    rows.append(PropertyRow("corner-adjoint", "unitary-dilation.corner-adjoint",
                            rep.corner_adjoint,
                            ctx.tol("unitary-dilation.corner-adjoint")))
    rng = np.random.default_rng(ctx.scenario.seed + 1)
    x0 = tower.basis_vector(0, 0)
    n = min(3, dil.window, tower.num_levels)
    out = dil.vhat_apply(n, ng.z_embed(x0))
    inter = (out.head - tw.v_pow_apply(tower, n, x0)).norm() + (
        1.0 if out.tail.support else 0.0)
    rows.append(PropertyRow("intertwine", "unitary-dilation.intertwine", inter,
                            ctx.tol("unitary-dilation.intertwine")))
    head_levels = range(0, max(1, tower.num_levels - n - 1))
    worst_u = 0.0
    worst_c = 0.0
    for _ in range(5):
        v = dil.random_nagy_vector(rng, head_levels, range(3), [0, 1])
        w = dil.random_nagy_vector(rng, head_levels, range(3), [0, 1])
        worst_u = max(worst_u, abs(dil.vhat_apply(n, v).inner(dil.vhat_apply(n, w))
                                   - v.inner(w)))
        worst_u = max(worst_u, (dil.vhat_adjoint_apply(n, dil.vhat_apply(n, v)) - v).norm())
        worst_u = max(worst_u, (dil.vhat_apply(n, dil.vhat_adjoint_apply(n, v)) - v).norm())
        if n >= 2:
            worst_c = max(worst_c, (dil.vhat_apply(n, v) - dil.vhat_apply(
                1, dil.vhat_apply(n - 1, v))).norm())
    rows.append(PropertyRow("window-unitarity", "unitary-dilation.window-unitarity",
                            worst_u, ctx.tol("unitary-dilation.window-unitarity")))
    rows.append(PropertyRow("composition", "unitary-dilation.composition", worst_c,
                            ctx.tol("unitary-dilation.composition")))
    return rows


def _suite_strings(ctx: SuiteContext) -> list[PropertyRow]:
    rows = []
    dil = ctx.dil
    d = dil.tower.base_dim
    rng = np.random.default_rng(ctx.scenario.seed + 2)
    max_w = min(2, dil.tower.num_levels - 1)

    zero_res = 0.0
    member_res = 0.0
    for _ in range(3):
        w1 = int(rng.integers(1, max_w + 1))
        w2 = int(rng.integers(1, max_w + 1))
        a = st.random_string(rng, d, w1, 2)
        b = st.random_string(rng, d, w2, 2)
        pair = st.gamma_pair_product(dil, a, b, seed=ctx.scenario.seed)
        if w1 != w2:
            zero_res = max(zero_res, pair.zero_residual)
        else:
            member_res = max(member_res, pair.membership_residual,
                             pair.expansion_residual)
    rows.append(PropertyRow("gamma-orthogonality", "strings.gamma-orthogonality",
                            zero_res, ctx.tol("strings.gamma-orthogonality")))
    rows.append(PropertyRow("gamma-membership", "strings.gamma-membership",
                            member_res, ctx.tol("strings.gamma-membership")))

    worst_prod = 0.0
    for _ in range(6):
        d1 = st.NaplaOperator(int(rng.integers(0, 2)), _rand_unit(rng, d),
                              st.random_string(rng, d, int(rng.integers(0, max_w + 1)), 2),
                              st.random_string(rng, d, int(rng.integers(0, max_w + 1)), 2))
        d2 = st.NaplaOperator(int(rng.integers(0, 2)), _rand_unit(rng, d),
                              st.random_string(rng, d, int(rng.integers(0, max_w + 1)), 2),
                              st.random_string(rng, d, int(rng.integers(0, max_w + 1)), 2))
        prod = st.napla_product(dil.tower.channel, d1, d2)
        xi = dil.make_tail({j: dil.tower.random_vector(rng, [0, 1], normalize=False)
                            for j in range(6)})
        direct = st.napla_apply(dil, d1, st.napla_apply(dil, d2, xi))
        diff = direct - prod.apply(dil, xi)
        worst_prod = max(worst_prod, np.sqrt(sum(
            x.inner(x).real for x in diff.entries.values())))
    rows.append(PropertyRow("napla-product", "strings.napla-product", worst_prod,
                            ctx.tol("strings.napla-product")))

    triv = st.AlgebraString.trivial(d)
    winv = st.w_invariance_check(dil, delta=st.NaplaOperator(0, _rand_unit(rng, d), triv, triv),
                                 seed=ctx.scenario.seed)
    winv_res = max(winv.napla_shift_residual, winv.sigma_report.max_residual,
                   winv.gamma_conjugation_residual)
    rows.append(PropertyRow("shift-invariance", "strings.shift-invariance", winv_res,
                            ctx.tol("strings.shift-invariance")))

    gamma1 = st.random_string(rng, d, 1, 1)
    gamma2 = st.random_string(rng, d, min(2, max_w), 1)
    elem = st.s_element(dil, _rand_unit(rng, d), gamma1, gamma2,
                        st.napla_sum_tail_op(st.NaplaSum(
                            (st.NaplaOperator(0, _rand_unit(rng, d), triv, triv),))))
    conj = st.s_conjugation_check(dil, elem, seed=ctx.scenario.seed)
    conj_res = max(conj.corner_embed, conj.gamma_shift, conj.corner_napla,
                   conj.corner_gamma_napla, conj.block_decomposition)
    rows.append(PropertyRow("block-conjugation", "strings.block-conjugation",
                            conj_res, ctx.tol("strings.block-conjugation")))

    # Invariant-algebra properties on generated elements.
    member = st.algebra_membership(
        dil, lambda x: ng.z_adjoint(elem.apply(dil, ng.z_embed(x))),
        level_cap=min(2, dil.tower.num_levels - max(
            s.weight for s in (gamma1, gamma2))), seed=ctx.scenario.seed)
    rows.append(PropertyRow("generated-compression", "invariant-algebra.compression",
                            member.residual, ctx.tol("invariant-algebra.compression")))

    worst_p3 = 0.0
    worst_p4 = 0.0
    tower = dil.tower
    for _ in range(3):
        x = tower.random_vector(rng, range(0, max(1, tower.num_levels - 3)))
        lhs = ng.z_adjoint(dil.vhat_adjoint_apply(
            1, elem.apply(dil, dil.vhat_apply(1, ng.z_embed(x)))))
        inner_block = lambda y: ng.z_adjoint(elem.apply(dil, ng.z_embed(y)))
        rhs = tw.v_star_pow_apply(tower, 1, inner_block(tw.v_pow_apply(tower, 1, x)))
        worst_p3 = max(worst_p3, (lhs - rhs).norm())
        a = _rand_unit(rng, d)
        za = lambda v: ng.NagyVector(head=st._pi_apply(dil, a, v.head))
        lhs4 = ng.z_adjoint(dil.vhat_adjoint_apply(
            1, za(dil.vhat_apply(1, ng.z_embed(x)))))
        rhs4 = tw.v_star_pow_apply(tower, 1, st._pi_apply(
            dil, a, tw.v_pow_apply(tower, 1, x)))
        worst_p4 = max(worst_p4, (lhs4 - rhs4).norm())
    rows.append(PropertyRow("power-compression", "invariant-algebra.power-compression",
                            worst_p3, ctx.tol("invariant-algebra.power-compression")))
    rows.append(PropertyRow("base-compression", "invariant-algebra.base-compression",
                            worst_p4, ctx.tol("invariant-algebra.base-compression")))
    return rows


def _rand_unit(rng: np.random.Generator, d: int) -> np.ndarray:
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return m / operator_norm(m)


def _ergodic_observables(ctx: SuiteContext) -> tuple[np.ndarray, np.ndarray]:
    d = ctx.phi.dim
    if ctx.alg.dim == d:  # diagonal-type algebra: projector correlations
        a = np.zeros((d, d), dtype=np.complex128)
        a[0, 0] = 1.0
        return a, a
    a = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        a[i, i] = 1.0 if i < d / 2 else -1.0
    return a, a


def _horizon_grid(n: int) -> list[int]:
    grid = [1, 2, 3, 5, 10, 25, 50, 100, 200, 400, 800]
    out = [g for g in grid if g <= n]
    if not out or out[-1] != n:
        out.append(n)
    return out


def _suite_ergodic(ctx: SuiteContext) -> tuple[list[PropertyRow], list[dict]]:
    rows = []
    a, b = _ergodic_observables(ctx)
    verdict = erg.spectral_verdict(ctx.phi, ctx.alg, ctx.state)
    n = ctx.scenario.n_horizon
    grid = _horizon_grid(n)
    terms = erg.cesaro_terms(ctx.phi, ctx.state, a, b, n, alg=ctx.alg)
    report = erg._report_from_terms(terms, grid, verdict, "both")
    csv_rows = [{"N": nv, "signed_avg": s, "abs_avg": ab, "method": report.method}
                for nv, s, ab in zip(report.n_values, report.signed_averages,
                                     report.abs_averages)]
    # Cesàro re-evaluation through the map's matrix powers as an oracle.
    oracle = []
    bk = b
    mean = ctx.state.expect(a) * ctx.state.expect(b)
    for k in range(min(n, 25) + 1):
        oracle.append(ctx.state.expect(a @ bk) - mean)
        bk = ctx.phi.apply(bk)
    diff = max(abs(np.array(oracle) - terms[: len(oracle)]))
    rows.append(PropertyRow("cesaro-oracle", "ergodic.oracle-equality", float(diff),
                            ctx.tol("ergodic.oracle-equality")))
    final_abs = report.abs_averages[-1]
    if verdict == "weakly_mixing":
        rows.append(PropertyRow("mixing-decay", "ergodic.mixing-decay", final_abs,
                                ctx.tol("ergodic.mixing-decay")))
    elif verdict == "ergodic":
        floor = ctx.tol("ergodic.non-mixing-floor")
        rows.append(PropertyRow("non-mixing-floor", "ergodic.non-mixing-floor",
                                floor - final_abs if final_abs < floor else 0.0,
                                0.0))
        signed_final = report.signed_averages[-1]
        rows.append(PropertyRow("ergodic-signed-decay", "ergodic.mixing-decay",
                                signed_final, ctx.tol("ergodic.mixing-decay")))
    return rows, csv_rows


def _suite_dilated(ctx: SuiteContext) -> tuple[list[PropertyRow], list[dict]]:
    rows = []
    dil = ctx.dil
    adj = phi_adjoint(dil.tower.channel, ctx.state)
    if isinstance(adj, AdjointAbsent):
        rows.append(PropertyRow("state-adjoint-exists", "dilated.path-agreement",
                                1.0, 0.0))
        return rows, []
    rng = np.random.default_rng(ctx.scenario.seed + 3)
    x, y = erg.sample_generated_pair(rng, dil.tower.base_dim, max_weight=2)
    # the direct path lifts the head k levels plus the sampled string weights
    k_win = min(ctx.scenario.k_window, dil.tower.num_levels - 2)
    small = [k for k in _horizon_grid(k_win)]
    direct = erg.dilated_cesaro_direct(dil, lambda v: x.apply(dil, v),
                                       lambda v: y.apply(dil, v), ctx.state,
                                       small, k_win)
    reduced_small = erg.dilated_cesaro_reduced(dil, x, y, adj, ctx.state, small)
    agree = max(abs(np.array(direct.abs_averages)
                    - np.array(reduced_small.abs_averages)))
    rows.append(PropertyRow("path-agreement", "dilated.path-agreement", float(agree),
                            ctx.tol("dilated.path-agreement")))

    n = ctx.scenario.n_horizon
    grid = _horizon_grid(n)
    verdict = erg.spectral_verdict(ctx.phi, MatrixSubalgebra.full(ctx.phi.dim),
                                   ctx.state)
    trend = erg.dilated_cesaro_reduced(dil, x, y, adj, ctx.state, grid,
                                       verdict=verdict)
    csv_rows = [{"N": nv, "signed_avg": s, "abs_avg": ab, "method": trend.method}
                for nv, s, ab in zip(trend.n_values, trend.signed_averages,
                                     trend.abs_averages)]
    if verdict == "weakly_mixing" and n >= 400:
        a100 = trend.abs_averages[trend.n_values.index(100)]
        a400 = trend.abs_averages[trend.n_values.index(400)]
        ratio = a400 / a100 if a100 > 0 else 0.0
        rows.append(PropertyRow("trend-ratio", "dilated.trend-ratio", float(ratio),
                                ctx.tol("dilated.trend-ratio")))
        rows.append(PropertyRow("trend-absolute", "dilated.trend-absolute",
                                float(a400), ctx.tol("dilated.trend-absolute")))
    return rows, csv_rows


# ---------------------------------------------------------------------------
# Runner.
# ---------------------------------------------------------------------------

def run_scenario(scenario: Scenario, out_dir: Path,
                 tol_override: Optional[float] = None) -> int:
    start = time.monotonic()
    ctx = SuiteContext(scenario, tol_override)
    suites: dict[str, list[dict]] = {}
    csv_payloads: dict[str, list[dict]] = {}
    for name in scenario.suites:
        if name == "stinespring":
            rows = _suite_stinespring(ctx)
        elif name == "tower":
            rows = _suite_tower(ctx)
        elif name == "nagy":
            rows = _suite_nagy(ctx)
        elif name == "strings":
            rows = _suite_strings(ctx)
        elif name == "ergodic":
            rows, csv_rows = _suite_ergodic(ctx)
            csv_payloads["ergodic"] = csv_rows
        elif name == "dilated":
            rows, csv_rows = _suite_dilated(ctx)
            csv_payloads["dilated"] = csv_rows
        else:  # pragma: no cover - validated at parse time
            raise ValueError(name)
        suites[name] = [r.as_dict() for r in rows]

    overall = all(row["pass"] for rows in suites.values() for row in rows)
    dil_dims = list(ctx.dil.tower.dims) if ctx._dil is not None else []
    report = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "environment": {
            "dim": ctx.phi.dim,
            "kraus_count": ctx.reduced.kraus_count,
            "level_dims": dil_dims,
            "window": scenario.k_window,
            "horizon": scenario.n_horizon,
        },
        "suites": suites,
        "overall_pass": overall,
        "timing": {
            "generated_at": datetime.now(timezone.utc).isoformat(),
            "wall_time_s": time.monotonic() - start,
        },
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for kind, rows in csv_payloads.items():
        path = out_dir / f"{scenario.name}-{kind}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=["N", "signed_avg", "abs_avg",
                                                    "method"])
            writer.writeheader()
            writer.writerows(rows)
    return 0 if overall else 1


def bundled_scenarios() -> dict[str, dict]:
    out = {}
    root = resources.files("ucpdilate").joinpath("scenarios")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            out[entry.name[:-5]] = json.loads(entry.read_text(encoding="utf-8"))
    return out


def list_presets() -> str:
    lines = ["channel presets:"]
    for name in sorted(PRESETS):
        lines.append(f"  {name:20s} {PRESET_NOTES[name]}")
    lines.append("")
    lines.append("bundled scenarios:")
    for name, raw in bundled_scenarios().items():
        suites = ",".join(raw.get("suites", []))
        lines.append(f"  {name:24s} suites: {suites}")
    return "\n".join(lines)


def _load_scenario(path_or_name: str) -> Scenario:
    path = Path(path_or_name)
    if path.exists():
        raw = json.loads(path.read_text(encoding="utf-8"))
    else:
        bundled = bundled_scenarios()
        if path_or_name not in bundled:
            raise FileNotFoundError(
                f"no scenario file {path_or_name!r} and no bundled scenario of that name")
        raw = bundled[path_or_name]
    return Scenario.from_dict(raw)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ucpdilate",
        description="Verification suites for dilations of unital completely positive maps")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a scenario and write reports")
    runp.add_argument("--scenario", required=True,
                      help="scenario JSON path or bundled scenario name")
    runp.add_argument("--out", required=True, help="output directory")
    runp.add_argument("--levels", type=int, default=None)
    runp.add_argument("--window", type=int, default=None)
    runp.add_argument("--tol", type=float, default=None,
                      help="override every property tolerance")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--suite", action="append", default=None,
                      help="restrict to a suite (repeatable)")
    sub.add_parser("list-presets", help="list channel presets and bundled scenarios")

    args = parser.parse_args(argv)
    if args.command == "list-presets":
        print(list_presets())
        return 0

    try:
        scenario = _load_scenario(args.scenario)
        if args.levels is not None:
            scenario.levels = args.levels
        if args.window is not None:
            scenario.k_window = args.window
        if args.seed is not None:
            scenario.seed = args.seed
        if args.suite:
            unknown = [s for s in args.suite if s not in SUITE_NAMES]
            if unknown:
                raise ValueError(f"unknown suites {unknown}")
            scenario.suites = tuple(args.suite)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": {"type": type(exc).__name__,
                                    "message": str(exc)}}))
        return 2

    try:
        return run_scenario(scenario, Path(args.out), tol_override=args.tol)
    except UcpDilateError as exc:
        print(json.dumps({"error": {"type": type(exc).__name__,
                                    "message": str(exc)}}))
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
