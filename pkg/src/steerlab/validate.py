"""Self-check suite: oracle equivalence, module invariants, analytic fixed points.

Each check returns a CheckResult; `run_all_checks` executes the whole battery.
The CLI `validate` subcommand and the test suite both drive these functions,
so a passing build and a passing `steerlab validate` are the same statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import source
from .assemblage import condition, conditional_variance, est_variance, optimize_variance
from .expsim import ScanConfig, conditional_fisher_estimate
from .qcore import (
    AXIS_Y,
    check_bloch,
    partial_trace,
    pauli,
    purity,
    random_bloch,
    random_density,
    trace_distance,
    variance,
)
from .source import SourceConfig
from .witnesses import qfi, reid_check, s_witness, yfg_check

__all__ = ["CheckResult", "random_source_config", "run_all_checks", "CHECKS"]

ORACLE_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def random_source_config(rng: np.random.Generator, mu: float | None = None) -> SourceConfig:
    """Random source configuration with post-selection bounded away from zero.

    Transmittivities below 0.1 starve the post-selected branch, so they are
    excluded from the random family.
    """
    for _ in range(100):
        cfg = SourceConfig(
            alpha=rng.uniform(0.0, math.pi / 4),
            alice_angle=rng.uniform(0.0, math.pi / 2),
            t_h=rng.uniform(0.1, 1.0),
            t_v=rng.uniform(0.1, 1.0),
            indistinguishability=rng.uniform(0.0, 1.0) if mu is None else mu,
        )
        try:
            source.prepare(cfg)
        except ValueError:
            continue
        return cfg
    raise RuntimeError("could not draw a non-degenerate source configuration")


def check_oracle_equivalence(seed: int = 20260101, n_configs: int = 100) -> CheckResult:
    """prepare() against the creation-operator oracle on random configurations."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_configs):
        mu = 1.0 if i < n_configs // 2 else None
        cfg = random_source_config(rng, mu=mu)
        direct = source.prepare(cfg)
        oracle = source.bosonic_oracle(cfg)
        dist = trace_distance(direct.rho, oracle.rho)
        gap = abs(direct.success_probability - oracle.success_probability)
        worst = max(worst, dist, gap)
        if dist > ORACLE_TOL or gap > ORACLE_TOL:
            return CheckResult(
                "oracle-equivalence",
                False,
                f"config {cfg} disagrees: trace distance {dist:.3e}, success gap {gap:.3e}",
            )
    return CheckResult("oracle-equivalence", True, f"worst deviation {worst:.3e}")


def check_maximal_entanglement() -> CheckResult:
    """At alpha = pi/6 the source emits the maximally entangled target state."""
    state = source.prepare(SourceConfig(alpha=math.pi / 6))
    target = np.array([1, 1, 1, -1]) / 2.0
    fid = float(np.vdot(target, state.rho @ target).real)
    s_val = s_witness(state.rho).value
    ok = fid >= 1.0 - 1e-10 and abs(s_val - math.sqrt(3.0)) < 1e-9
    return CheckResult(
        "maximal-correlation-fixed-point", ok, f"fidelity {fid:.12f}, S {s_val:.9f}"
    )


def check_separable_endpoint() -> CheckResult:
    """alpha = 0: product state, no test violated, all three at their fixed points."""
    state = source.prepare(SourceConfig(alpha=0.0))
    s_rep = s_witness(state.rho)
    r_rep = reid_check(state.rho)
    y_rep = yfg_check(state.rho)
    ok = (
        abs(s_rep.value - 1.0 / math.sqrt(3.0)) < 1e-9
        and not s_rep.violated
        and abs(r_rep.value - 1.0) < 1e-9
        and abs(r_rep.bound - 1.0) < 1e-9
        and not r_rep.violated
        and abs(y_rep.value - 4.0) < 1e-6
        and abs(y_rep.bound - 4.0) < 1e-6
        and not y_rep.violated
    )
    return CheckResult(
        "separable-endpoint",
        ok,
        f"S {s_rep.value:.9f}, Reid {r_rep.value:.9f}/{r_rep.bound:.9f}, "
        f"YFG {y_rep.value:.9f}/{y_rep.bound:.9f}",
    )


def check_reid_violation_region() -> CheckResult:
    """Reid test flags steering across the working range of alpha."""
    for alpha in (0.1, 0.2, 0.3, 0.4, 0.5):
        rep = reid_check(source.prepare(SourceConfig(alpha=alpha)).rho)
        if not rep.violated:
            return CheckResult(
                "reid-violation-region",
                False,
                f"alpha={alpha}: value {rep.value:.6f} !< bound {rep.bound:.6f}",
            )
    return CheckResult("reid-violation-region", True, "violated at alpha in 0.1..0.5 rad")


def check_nonsignaling(seed: int = 7, n_states: int = 50) -> CheckResult:
    """Assemblages recombine to the unconditioned reduced state."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        rho = random_density(rng, 4)
        setting = random_bloch(rng)
        asm = condition(rho, setting)
        dist = trace_distance(asm.reduced_bob(), partial_trace(rho, "bob"))
        worst = max(worst, dist)
        if dist > 1e-10:
            return CheckResult("non-signaling", False, f"trace distance {dist:.3e}")
    return CheckResult("non-signaling", True, f"worst trace distance {worst:.3e}")


def check_estimator_consistency(seed: int = 11, n_states: int = 25) -> CheckResult:
    """Conditional-mean estimator variance equals the conditional variance."""
    rng = np.random.default_rng(seed)
    for _ in range(n_states):
        rho = random_density(rng, 4)
        k, h = random_bloch(rng), random_bloch(rng)
        lhs = est_variance(rho, k, h)
        rhs = conditional_variance(rho, k, h)
        if abs(lhs - rhs) > 1e-10:
            return CheckResult("estimator-consistency", False, f"|{lhs} - {rhs}| > 1e-10")
    return CheckResult("estimator-consistency", True, "")


def check_optimizer_bound(seed: int = 13, n_probes: int = 100) -> CheckResult:
    """Optimized conditional variance never exceeds any probed conditioning."""
    rng = np.random.default_rng(seed)
    rho = source.prepare(SourceConfig(alpha=0.35, indistinguishability=0.8)).rho
    h = random_bloch(rng)
    opt, _ = optimize_variance(rho, h)
    for _ in range(n_probes):
        probe = conditional_variance(rho, random_bloch(rng), h)
        if opt > probe + 1e-9:
            return CheckResult("optimizer-bound", False, f"opt {opt} > probe {probe}")
    return CheckResult("optimizer-bound", True, f"optimum {opt:.9f}")


def check_qfi_pure_states(seed: int = 17, n_states: int = 50) -> CheckResult:
    """QFI equals 4 Var on pure states."""
    rng = np.random.default_rng(seed)
    for _ in range(n_states):
        rho = random_density(rng, 2, rank=1)
        setting = random_bloch(rng)
        gap = abs(qfi(rho, setting) - 4.0 * variance(rho, pauli(setting)))
        if gap > 1e-9:
            return CheckResult("qfi-pure-states", False, f"gap {gap:.3e}")
    return CheckResult("qfi-pure-states", True, "")


def check_fisher_fixed_points() -> CheckResult:
    """Noiseless fit-based Fisher estimate hits 4 on the ideal maximal state."""
    state = source.prepare(SourceConfig(alpha=math.pi / 6))
    est = conditional_fisher_estimate(state, ScanConfig(), noiseless=True)
    ok = abs(est.value - 4.0) < 1e-9
    return CheckResult("fisher-fixed-point", ok, f"estimate {est.value:.12f}")


def check_purity_response() -> CheckResult:
    """Distinguishability degrades purity: Tr rho^2 = 1 iff mu = 1 at alpha = pi/6."""
    pure = purity(source.prepare(SourceConfig(alpha=math.pi / 6)).rho)
    if abs(pure - 1.0) > 1e-12:
        return CheckResult("purity-response", False, f"mu=1 purity {pure}")
    for mu in (0.0, 0.25, 0.5, 0.75, 0.95):
        p = purity(
            source.prepare(
                SourceConfig(alpha=math.pi / 6, indistinguishability=mu)
            ).rho
        )
        if p >= 1.0 - 1e-6:
            return CheckResult("purity-response", False, f"mu={mu} purity {p}")
    return CheckResult("purity-response", True, "")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_oracle_equivalence,
    check_maximal_entanglement,
    check_separable_endpoint,
    check_reid_violation_region,
    check_nonsignaling,
    check_estimator_consistency,
    check_optimizer_bound,
    check_qfi_pure_states,
    check_fisher_fixed_points,
    check_purity_response,
)


def run_all_checks() -> list[CheckResult]:
    return [check() for check in CHECKS]
