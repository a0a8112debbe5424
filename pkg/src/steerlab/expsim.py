"""Simulated phase-scan experiment: counts, fringe fits, Fisher estimates, errors.

The pipeline mirrors the measurement procedure: condition the shared state on
Alice's readout, rotate Bob's branch by exp(i theta G) for each phase on the
scan grid, record Z-basis detection probabilities, draw Poisson counts per
coincidence channel, fit each branch's fringe with

    p(theta) = (1 + v cos(w theta + theta0)) / 2,    w = FRINGE_FREQUENCY = 2

(w is fixed by the physics: a qubit rotation by theta traverses the fringe at
twice the rate), and extract the Fisher information of the fitted model with
respect to the physical phase theta.  Two error engines are provided: exact
first-order propagation of Poisson counting statistics for correlator-type
quantities, and a Monte-Carlo resampling routine for fit-derived quantities.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import least_squares

from .assemblage import condition, joint_prob
from .qcore import AXIS_X, AXIS_Y, AXIS_Z, check_bloch, evolve, pauli
from .source import PreparedState
from .witnesses import WitnessReport

__all__ = [
    "FRINGE_FREQUENCY",
    "UnfittableError",
    "ScanConfig",
    "ScanData",
    "ScanProbabilities",
    "FitResult",
    "FisherEstimate",
    "MonteCarloResult",
    "default_thetas",
    "scan_probabilities",
    "sample_counts",
    "fit_fringe",
    "fit_cosine",
    "fisher_from_fit",
    "max_fisher",
    "quadrature_theta",
    "conditional_fisher_estimate",
    "phase_mle",
    "poisson_propagate",
    "monte_carlo_errors",
    "measure_correlator",
    "simulated_s_witness",
    "simulated_reid_check",
    "simulated_yfg_check",
]

FRINGE_FREQUENCY = 2.0

ALICE_LABELS = ("D", "A")
BOB_LABELS = ("H", "V")

_PROB_CLAMP = 1e-12


class UnfittableError(RuntimeError):
    """Raised when a fringe cannot be fitted (e.g. a branch with no counts)."""


def default_thetas() -> tuple[float, ...]:
    """Scan grid 0..48 degrees in 4-degree steps, in radians."""
    return tuple(np.deg2rad(np.arange(0.0, 49.0, 4.0)))


@dataclass(frozen=True)
class ScanConfig:
    """Phase-scan settings: grid, statistics, seed and measurement axes."""

    thetas: tuple[float, ...] = field(default_factory=default_thetas)
    shots_per_setting: int = 1000
    seed: int = 12345
    conditioning: np.ndarray = field(default_factory=lambda: AXIS_X.copy())
    generator: np.ndarray = field(default_factory=lambda: AXIS_Y.copy())
    readout: np.ndarray = field(default_factory=lambda: AXIS_Z.copy())

    def __post_init__(self):
        if len(set(round(t, 12) for t in self.thetas)) < 5:
            raise ValueError("scan needs at least 5 distinct theta values")
        if self.shots_per_setting < 1:
            raise ValueError("shots_per_setting must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        check_bloch(self.conditioning)
        check_bloch(self.generator)
        check_bloch(self.readout)


@dataclass(frozen=True)
class ScanProbabilities:
    """Exact per-phase detection probabilities, one fringe per Alice outcome."""

    thetas: np.ndarray
    p_alice: np.ndarray  # (2,): p(D), p(A)
    p_first: np.ndarray  # (n_theta, 2): p(H | d; theta)
    degenerate: np.ndarray  # (2,) bool: branch had vanishing probability


@dataclass(frozen=True)
class ScanData:
    """Raw counts indexed [theta, alice outcome (D, A), bob outcome (H, V)]."""

    thetas: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (len(self.thetas), 2, 2):
            raise ValueError(f"counts must have shape (n_theta, 2, 2), got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if np.any(counts.sum(axis=(1, 2)) == 0):
            raise ValueError("every theta must have at least one nonzero count")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("theta_deg,alice_outcome,bob_outcome,count\n")
        for i, theta in enumerate(self.thetas):
            for d, dl in enumerate(ALICE_LABELS):
                for b, bl in enumerate(BOB_LABELS):
                    buf.write(f"{math.degrees(theta):.9g},{dl},{bl},{int(self.counts[i, d, b])}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScanData":
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        thetas = sorted({float(r[0]) for r in rows})
        index = {t: i for i, t in enumerate(thetas)}
        counts = np.zeros((len(thetas), 2, 2), dtype=np.int64)
        for deg, dl, bl, count in rows:
            counts[index[float(deg)], ALICE_LABELS.index(dl), BOB_LABELS.index(bl)] = int(count)
        return cls(thetas=np.deg2rad(thetas), counts=counts)


@dataclass(frozen=True)
class FitResult:
    """Fringe-fit outcome; theta0 is normalized to (-pi, pi] and v to [0, 1]."""

    v: float
    theta0: float
    residual_rms: float
    converged: bool
    v_sigma: float = float("nan")
    theta0_sigma: float = float("nan")


@dataclass(frozen=True)
class FisherEstimate:
    """Alice-probability-weighted maximal fitted Fisher information."""

    value: float
    p_alice: np.ndarray
    fits: tuple[FitResult, FitResult]
    branch_max: tuple[float, float]


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    sigma: float
    n_runs: int
    n_failed: int
    degenerate: bool  # single-sample estimate, sigma not meaningful


def scan_probabilities(state: PreparedState, config: ScanConfig) -> ScanProbabilities:
    """Exact detection probabilities p(H | d; theta) for both Alice outcomes.

    Degenerate Alice branches are flagged and filled with flat 1/2 fringes.
    """
    asm = condition(state.rho, config.conditioning)
    gen = pauli(config.generator)
    readout = pauli(config.readout)
    proj_first = 0.5 * (np.eye(2, dtype=complex) + readout)

    thetas = np.asarray(config.thetas, dtype=float)
    p_alice = np.array([br.probability for br in asm.branches])
    degenerate = np.array([br.degenerate for br in asm.branches])
    p_first = np.full((len(thetas), 2), 0.5)
    for d, br in enumerate(asm.branches):
        if br.degenerate:
            continue
        for i, theta in enumerate(thetas):
            rotated = evolve(br.state, gen, theta)
            p = float(np.trace(proj_first @ rotated).real)
            p_first[i, d] = min(max(p, 0.0), 1.0)
    return ScanProbabilities(thetas=thetas, p_alice=p_alice, p_first=p_first, degenerate=degenerate)


def sample_counts(probabilities: ScanProbabilities, shots: int, seed: int) -> ScanData:
    """Poisson counts with mean shots * p(d) * p(b|d), independent per channel."""
    if shots < 1:
        raise ValueError("shots must be a positive integer")
    rng = np.random.default_rng(seed)
    p_h = probabilities.p_first
    p_d = probabilities.p_alice
    means = np.stack(
        [p_d[None, :] * p_h, p_d[None, :] * (1.0 - p_h)],
        axis=-1,
    )  # (n_theta, 2, 2)
    counts = rng.poisson(shots * means)
    return ScanData(thetas=probabilities.thetas, counts=counts)


def _initial_guess(thetas: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Seed (v, theta0) from the fringe's discrete Fourier component at w."""
    phase = np.exp(-1j * FRINGE_FREQUENCY * thetas)
    comp = np.sum((values - values.mean()) * phase) * 2.0 / len(thetas)
    v0 = min(max(2.0 * abs(comp), 1e-3), 1.0)
    return v0, float(np.angle(comp))


def fit_cosine(
    thetas: np.ndarray,
    p_hat: np.ndarray,
    sigma: np.ndarray | None = None,
    max_iterations: int = 200,
) -> FitResult:
    """Weighted least-squares fit of (1 + v cos(w theta + theta0)) / 2.

    Mirror solutions with v < 0 are folded back into v in [0, 1] by shifting
    theta0 by pi; v marginally above 1 (noise) is clamped to 1.
    """
    thetas = np.asarray(thetas, dtype=float)
    p_hat = np.asarray(p_hat, dtype=float)
    if len(thetas) < 5:
        raise UnfittableError("need at least 5 phase points to fit a fringe")
    if sigma is None:
        sigma = np.ones_like(p_hat)
    sigma = np.asarray(sigma, dtype=float)

    def model(params):
        v, theta0 = params
        return 0.5 * (1.0 + v * np.cos(FRINGE_FREQUENCY * thetas + theta0))

    def residuals(params):
        return (model(params) - p_hat) / sigma

    x0 = np.array(_initial_guess(thetas, p_hat))
    try:
        res = least_squares(residuals, x0, method="lm", max_nfev=max_iterations * 3)
    except Exception as exc:
        raise UnfittableError(f"fringe fit failed: {exc}") from exc

    v, theta0 = float(res.x[0]), float(res.x[1])
    if v < 0.0:
        v, theta0 = -v, theta0 + math.pi
    theta0 = math.remainder(theta0, 2.0 * math.pi)
    if theta0 <= -math.pi:
        theta0 += 2.0 * math.pi
    v = min(v, 1.0)

    converged = bool(res.status > 0) and res.nfev < max_iterations * 3
    raw = model((v, theta0)) - p_hat
    residual_rms = float(np.sqrt(np.mean(raw * raw)))

    v_sigma = theta0_sigma = float("nan")
    jac = res.jac
    try:
        cov = np.linalg.inv(jac.T @ jac)
        v_sigma = float(np.sqrt(max(cov[0, 0], 0.0)))
        theta0_sigma = float(np.sqrt(max(cov[1, 1], 0.0)))
    except np.linalg.LinAlgError:
        converged = False

    return FitResult(
        v=v,
        theta0=theta0,
        residual_rms=residual_rms,
        converged=converged,
        v_sigma=v_sigma,
        theta0_sigma=theta0_sigma,
    )


def _branch_frequencies(data: ScanData, branch: int) -> tuple[np.ndarray, np.ndarray]:
    n_h = data.counts[:, branch, 0].astype(float)
    n_v = data.counts[:, branch, 1].astype(float)
    totals = n_h + n_v
    if np.all(totals == 0):
        raise UnfittableError(f"branch {ALICE_LABELS[branch]} has no counts")
    if np.any(totals == 0):
        raise UnfittableError(
            f"branch {ALICE_LABELS[branch]} has phase points with no counts"
        )
    p_hat = n_h / totals
    # Poisson ratio error with half-count regularization, keeps weights finite
    # at empirical 0 or 1.
    sigma = np.sqrt((n_h + 0.5) * (n_v + 0.5) / totals**3)
    return p_hat, sigma


def fit_fringe(data: ScanData, branch: int | str) -> FitResult:
    """Fit the p(H | d; theta) fringe of one Alice branch of a counts table."""
    if isinstance(branch, str):
        branch = ALICE_LABELS.index(branch)
    p_hat, sigma = _branch_frequencies(data, branch)
    return fit_cosine(data.thetas, p_hat, sigma)


def fisher_from_fit(fit: FitResult, theta: float) -> float:
    """Fisher information (dp/dtheta)^2/p + (dq/dtheta)^2/q of the fitted fringe.

    Probabilities closer than 1e-12 to 0 or 1 are clamped before dividing.
    """
    if not fit.converged:
        raise ValueError("fisher_from_fit requires a converged fit")
    w = FRINGE_FREQUENCY
    phase = w * theta + fit.theta0
    p = 0.5 * (1.0 + fit.v * math.cos(phase))
    p = min(max(p, _PROB_CLAMP), 1.0 - _PROB_CLAMP)
    dp = -0.5 * fit.v * w * math.sin(phase)
    return dp * dp / p + dp * dp / (1.0 - p)


def max_fisher(fit: FitResult) -> float:
    """Analytic maximum over theta of the fitted Fisher information: (w v)^2."""
    return (FRINGE_FREQUENCY * fit.v) ** 2


def quadrature_theta(fit: FitResult) -> float:
    """Phase at fringe quadrature (cos(w theta + theta0) = 0), where F peaks."""
    return (0.5 * math.pi - fit.theta0) / FRINGE_FREQUENCY


def conditional_fisher_estimate(
    state: PreparedState, config: ScanConfig, noiseless: bool = False
) -> FisherEstimate:
    """p(D) max_theta F_D + p(A) max_theta F_A from the two branch fringe fits.

    With noiseless=True the exact probabilities are fitted directly (uniform
    weights); otherwise counts are drawn with the config seed and fitted.
    """
    probs = scan_probabilities(state, config)
    if noiseless:
        fits = tuple(
            fit_cosine(probs.thetas, probs.p_first[:, d]) for d in range(2)
        )
    else:
        data = sample_counts(probs, config.shots_per_setting, config.seed)
        fits = tuple(fit_fringe(data, d) for d in range(2))
    branch_max = tuple(max_fisher(f) for f in fits)
    value = float(np.dot(probs.p_alice, branch_max))
    return FisherEstimate(value=value, p_alice=probs.p_alice, fits=fits, branch_max=branch_max)


def phase_mle(n_first: int, n_second: int, fit: FitResult) -> float:
    """Maximum-likelihood phase from counts at a single setting of a known fringe.

    Inverts p(theta) = (1 + v cos(w theta + theta0)) / 2 at the empirical
    frequency; the branch of the arccos nearest quadrature is returned.
    """
    total = n_first + n_second
    if total <= 0:
        raise ValueError("phase_mle needs at least one count")
    if fit.v <= 0.0:
        raise ValueError("phase_mle needs a fringe with nonzero visibility")
    cosine = (2.0 * n_first / total - 1.0) / fit.v
    cosine = min(max(cosine, -1.0), 1.0)
    return (math.acos(cosine) - fit.theta0) / FRINGE_FREQUENCY


def poisson_propagate(counts) -> tuple[float, float]:
    """Correlator E and its Poisson-propagated sigma from a 2x2 count table.

    E = (n_pp + n_mm - n_pm - n_mp) / N; each channel is treated as an
    independent Poisson variable with variance equal to its count.
    """
    table = np.asarray(counts, dtype=float).reshape(2, 2)
    if np.any(table < 0):
        raise ValueError("counts must be nonnegative")
    total = table.sum()
    if total <= 0:
        raise ValueError("total count must be positive")
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    value = float((signs * table).sum() / total)
    # dE/dn_i = (s_i - E)/N for independent Poisson channels
    var = float(np.sum(table * (signs - value) ** 2) / total**2)
    return value, math.sqrt(max(var, 0.0))


def measure_correlator(
    rho: np.ndarray, k_setting, h_setting, shots: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Simulated finite-count estimate (value, sigma) of a two-party correlator."""
    table = joint_prob(rho, k_setting, h_setting)
    counts = rng.poisson(shots * table)
    return poisson_propagate(counts)


def monte_carlo_errors(
    pipeline: Callable[[int], float],
    n_runs: int = 100,
    seed: int = 0,
    max_failure_fraction: float = 0.2,
) -> MonteCarloResult:
    """Mean and standard deviation of a seeded pipeline over repeated runs.

    Run i executes pipeline(seed XOR i); runs raising UnfittableError are
    excluded and counted, and more than `max_failure_fraction` failures is an
    error.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be positive")
    values = []
    failures = 0
    for i in range(n_runs):
        try:
            values.append(float(pipeline(int(seed) ^ i)))
        except UnfittableError:
            failures += 1
    if failures > max_failure_fraction * n_runs:
        raise RuntimeError(f"{failures}/{n_runs} Monte-Carlo runs failed to fit")
    arr = np.asarray(values)
    degenerate = len(arr) < 2
    sigma = 0.0 if degenerate else float(np.std(arr, ddof=1))
    return MonteCarloResult(
        mean=float(np.mean(arr)),
        sigma=sigma,
        n_runs=n_runs,
        n_failed=failures,
        degenerate=degenerate,
    )


def _correlator_reports(rho: np.ndarray, shots: int, rng: np.random.Generator):
    corr = {}
    for name, k, h in (("xz", AXIS_X, AXIS_Z), ("zx", AXIS_Z, AXIS_X), ("yy", AXIS_Y, AXIS_Y)):
        corr[name] = measure_correlator(rho, k, h, shots, rng)
    return corr


def simulated_s_witness(rho: np.ndarray, shots: int, seed: int) -> WitnessReport:
    """Finite-count correlation witness with Poisson-propagated uncertainty."""
    rng = np.random.default_rng(seed)
    corr = _correlator_reports(rho, shots, rng)
    total = corr["xz"][0] + corr["zx"][0] + corr["yy"][0]
    value = abs(total) / math.sqrt(3.0)
    sigma = math.sqrt(sum(c[1] ** 2 for c in corr.values()) / 3.0)
    return WitnessReport(
        name="S", value=value, bound=1.0, sigma_value=sigma, violated=value > 1.0
    )


def simulated_reid_check(rho: np.ndarray, shots: int, seed: int) -> WitnessReport:
    """Finite-count Reid test; value, bound and sigmas from Poisson propagation."""
    rng = np.random.default_rng(seed)
    e_yy, s_yy = measure_correlator(rho, AXIS_Y, AXIS_Y, shots, rng)
    e_zx, s_zx = measure_correlator(rho, AXIS_Z, AXIS_X, shots, rng)
    var_y, var_x = 1.0 - e_yy, 1.0 - e_zx
    value = var_y * var_x
    sigma_value = math.hypot(var_x * s_yy, var_y * s_zx)

    # <Z_B> from the Bob marginal of a Z_A (x) Z_B measurement.
    table = np.random.default_rng(seed ^ 0x5A5A5A5A).poisson(
        shots * joint_prob(rho, AXIS_Z, AXIS_Z)
    )
    total = table.sum()
    if total <= 0:
        raise ValueError("no counts recorded for the bound measurement")
    z_b = float((table[:, 0].sum() - table[:, 1].sum()) / total)
    marg = np.array([table[:, 0].sum(), table[:, 1].sum()], dtype=float)
    var_zb = float(np.sum(marg * (np.array([1.0, -1.0]) - z_b) ** 2) / total**2)
    sigma_bound = 2.0 * abs(z_b) * math.sqrt(max(var_zb, 0.0))
    return WitnessReport(
        name="Reid",
        value=value,
        bound=z_b * z_b,
        sigma_value=sigma_value,
        sigma_bound=sigma_bound,
        violated=value < z_b * z_b,
    )


def simulated_yfg_check(
    state: PreparedState,
    config: ScanConfig,
    n_runs: int = 100,
) -> tuple[WitnessReport, MonteCarloResult]:
    """Finite-count Fisher test: Monte-Carlo value sigma, Poisson bound sigma."""
    probs = scan_probabilities(state, config)

    def run(seed: int) -> float:
        data = sample_counts(probs, config.shots_per_setting, seed)
        fits = [fit_fringe(data, d) for d in range(2)]
        return float(np.dot(probs.p_alice, [max_fisher(f) for f in fits]))

    mc = monte_carlo_errors(run, n_runs=n_runs, seed=config.seed)

    rng = np.random.default_rng(int(config.seed) ^ 0xC0FFEE)
    e_yy, s_yy = measure_correlator(
        state.rho, AXIS_Y, config.generator, config.shots_per_setting, rng
    )
    bound = 4.0 * (1.0 - e_yy)
    report = WitnessReport(
        name="YFG",
        value=mc.mean,
        bound=bound,
        sigma_value=mc.sigma,
        sigma_bound=4.0 * s_yy,
        violated=mc.mean > bound,
    )
    return report, mc
