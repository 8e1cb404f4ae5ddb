"""
Collusion Attacks

Honest-but-curious coalitions pool everything they legitimately saw in a
round (received payloads, their own seeds, shares or ring masks) and try
to reconstruct one victim's secret. When the reconstruction is not exact,
the residual (estimate - secret) is tested for uniformity with a
chi-square test over the low byte.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy.stats import chisquare

from ..models.field_model import FIELD_PRIME, FieldVector, embed_ring, extract_ring, vec_interpolate, vec_sub
from ..models.fixed_point_model import RingVector, as_ring, ring_add, ring_sub, ring_zeros
from ..models.keyexchange_model import DhGroup, mask_stream
from ..protocols.baselines import nosmc_round, stsmc_round
from ..protocols.masked import masked_round
from ..protocols.messages import AggregationResult
from ..protocols.neighbor_graph import NeighborGraph, build_neighbor_graph
from ..protocols.shamir import shamir_round, share_point
from ..sim.simnet import LatencyMatrix, SimNet

logger = logging.getLogger(__name__)

CHI_SQUARE_BUCKETS = 256
SIGNIFICANCE = 0.01
SECRET_BITS = 40


@dataclass(frozen=True)
class CollusionScenario:
    """
    A coalition attacking one victim.

    Attributes:
        protocol: 'nosmc', 'stsmc', 'shamir' or 'masked'
        colluders: Colluding party ids
        victim: Attacked party id (never a colluder)
        with_mediator: The mediator joins the coalition
        trials: Independent rounds to attack
    """

    protocol: str
    colluders: frozenset[int]
    victim: int
    with_mediator: bool = False
    trials: int = 1

    def __post_init__(self):
        object.__setattr__(self, "colluders", frozenset(int(c) for c in self.colluders))
        if self.victim in self.colluders:
            raise ValueError(f"Victim {self.victim} cannot be a colluder")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")

    def describe(self) -> str:
        members = [f"P{c}" for c in sorted(self.colluders)] + (["M"] if self.with_mediator else [])
        return f"{self.protocol}: {{{', '.join(members) or 'nobody'}}} vs P{self.victim}"


@dataclass
class Attempt:
    """One round's reconstruction: estimate and residual, or no view at all."""

    observed: bool
    exact: bool
    residual: npt.NDArray[np.uint64] = field(default_factory=lambda: np.zeros(0, dtype=np.uint64))


@dataclass
class AttackReport:
    """
    Outcome of attacking a victim over one or more rounds.

    Attributes:
        exact_recovery: Every round's secret was reconstructed exactly
        residual_entropy: Estimated bits per element left unknown (sum of per-byte entropies)
        trials: Rounds attacked
        chi_square_p: p-value of the low-byte uniformity test (nan without a view)
        recovered_trials: Rounds reconstructed exactly
        observed: The coalition saw anything depending on the victim's secret
    """

    scenario: CollusionScenario
    exact_recovery: bool
    residual_entropy: float
    trials: int
    chi_square_p: float
    recovered_trials: int = 0
    observed: bool = True

    @property
    def residual_uniform(self) -> bool:
        """Residual low bytes pass the uniformity test at the 1% level."""
        return not np.isnan(self.chi_square_p) and self.chi_square_p > SIGNIFICANCE

    @property
    def verdict(self) -> str:
        if self.exact_recovery:
            return "RECOVERED"
        if np.isnan(self.chi_square_p):
            return "NOT RECOVERED, no view"
        return f"NOT RECOVERED, p={self.chi_square_p:.4f}"

    def to_dict(self) -> dict:
        return {
            "protocol": self.scenario.protocol,
            "colluders": sorted(self.scenario.colluders),
            "mediator": self.scenario.with_mediator,
            "victim": self.scenario.victim,
            "exact_recovery": self.exact_recovery,
            "residual_entropy": self.residual_entropy,
            "trials": self.trials,
            "recovered_trials": self.recovered_trials,
            "chi_square_p": None if np.isnan(self.chi_square_p) else self.chi_square_p,
            "observed": self.observed,
            "verdict": self.verdict,
        }


def _attack_masked(scenario: CollusionScenario, result: AggregationResult, secret: RingVector, graph: NeighborGraph, round_tag: int) -> Attempt:
    if not scenario.with_mediator:
        return Attempt(observed=False, exact=False)
    victim = scenario.victim
    upload = next(m.payload for m in result.transcript.messages if m.sender == victim)
    estimate = upload.copy()
    for neighbor in graph.neighbors(victim):
        if neighbor not in scenario.colluders:
            continue
        mask = mask_stream(graph.local_seeds[neighbor][victim], round_tag, estimate.size)
        estimate = ring_sub(estimate, mask) if victim < neighbor else ring_add(estimate, mask)
    residual = ring_sub(estimate, secret)
    return Attempt(True, not residual.any(), residual)


def _attack_nosmc(scenario: CollusionScenario, result: AggregationResult, secret: RingVector) -> Attempt:
    if not scenario.with_mediator:
        return Attempt(observed=False, exact=False)
    upload = next(m.payload for m in result.transcript.messages if m.sender == scenario.victim)
    residual = ring_sub(upload, secret)
    return Attempt(True, not residual.any(), residual)


def stsmc_recover(victim: int, n: int, pass1: dict[int, RingVector], pass2: dict[int, RingVector]) -> RingVector:
    """
    Victim's secret from the running sums around it.

    s_j = A_j - A_(j-1) - B_(j-1) + B_j for j > 0 and s_0 = A_0 - A_(n-1) + B_0,
    where A/B are the first/second pass values.
    """
    if victim == 0:
        return ring_add(ring_sub(pass1[0], pass1[n - 1]), pass2[0])
    return ring_add(ring_sub(ring_sub(pass1[victim], pass1[victim - 1]), pass2[victim - 1]), pass2[victim])


def _attack_stsmc(scenario: CollusionScenario, result: AggregationResult, secret: RingVector, n: int) -> Attempt:
    victim = scenario.victim
    pred, succ = (victim - 1) % n, (victim + 1) % n
    knows_pred = pred in scenario.colluders
    knows_succ = succ in scenario.colluders
    if not (knows_pred or knows_succ):
        return Attempt(observed=False, exact=False)
    pass1 = dict(result.extras["pass1"])
    pass2 = dict(result.extras["pass2"])
    zeros = ring_zeros(secret.size)
    # values the coalition never saw are guessed as zero
    if not knows_succ:
        pass1[victim] = zeros
        pass2[victim] = zeros
    if not knows_pred:
        pass1[(victim - 1) % n] = zeros
        if victim > 0:
            pass2[victim - 1] = zeros
    residual = ring_sub(stsmc_recover(victim, n, pass1, pass2), secret)
    return Attempt(True, not residual.any(), residual)


def _attack_shamir(scenario: CollusionScenario, result: AggregationResult, secret: RingVector, k: int) -> Attempt:
    victim = scenario.victim
    held = {
        m.receiver: m.payload
        for m in result.transcript.filter("shares")
        if m.sender == victim and m.receiver in scenario.colluders
    }
    if not held:
        return Attempt(observed=False, exact=False)
    parties = sorted(held)
    field_estimate = vec_interpolate([share_point(p) for p in parties], [held[p] for p in parties])
    residual = vec_sub(field_estimate, embed_ring(secret))
    exact = len(held) >= k and np.array_equal(extract_ring(field_estimate, 1), as_ring(secret))
    return Attempt(True, bool(exact), residual)


def collude(
    scenario: CollusionScenario,
    result: AggregationResult,
    secrets: Sequence[RingVector],
    graph: Optional[NeighborGraph] = None,
    round_tag: int = 0,
    k: int = 2,
) -> Attempt:
    """
    Attack one completed round.

    Args:
        scenario: Coalition and victim
        result: The round's AggregationResult (transcript plus protocol extras)
        secrets: Ground-truth secrets, used only to score the attempt
        graph: Neighbor graph of a masked round (colluders' seeds come from it)
        round_tag: Round tag of a masked round
        k: Shamir threshold

    Returns:
        Attempt with the residual estimate - secret
    """
    secret = as_ring(secrets[scenario.victim])
    if scenario.protocol == "masked":
        if graph is None:
            raise ValueError("A masked round needs its neighbor graph")
        return _attack_masked(scenario, result, secret, graph, round_tag)
    if scenario.protocol == "nosmc":
        return _attack_nosmc(scenario, result, secret)
    if scenario.protocol == "stsmc":
        return _attack_stsmc(scenario, result, secret, len(secrets))
    if scenario.protocol == "shamir":
        return _attack_shamir(scenario, result, secret, k)
    raise ValueError(f"Unknown protocol '{scenario.protocol}'")


def byte_entropy(residuals: npt.NDArray[np.uint64]) -> float:
    """Sum over the eight byte positions of the plug-in entropy, in bits."""
    if residuals.size == 0:
        return 0.0
    raw = np.ascontiguousarray(residuals, dtype="<u8").view(np.uint8).reshape(-1, 8)
    total = 0.0
    for position in range(8):
        counts = np.bincount(raw[:, position], minlength=CHI_SQUARE_BUCKETS)
        probs = counts[counts > 0] / raw.shape[0]
        total += float(-(probs * np.log2(probs)).sum())
    return total


def low_byte_chi_square(residuals: npt.NDArray[np.uint64]) -> float:
    """p-value of the low bytes against a uniform distribution over 256 buckets."""
    counts = np.bincount((residuals & np.uint64(0xFF)).astype(np.int64), minlength=CHI_SQUARE_BUCKETS)
    return float(chisquare(counts).pvalue)


def summarize(scenario: CollusionScenario, attempts: Sequence[Attempt]) -> AttackReport:
    """Fold per-round attempts into an AttackReport."""
    observed = [a for a in attempts if a.observed]
    recovered = sum(1 for a in attempts if a.exact)
    if not observed:
        return AttackReport(scenario, False, 64.0, len(attempts), float("nan"), 0, observed=False)
    residuals = np.concatenate([a.residual for a in observed])
    exact = recovered == len(attempts)
    entropy = 0.0 if exact else byte_entropy(residuals)
    p_value = low_byte_chi_square(residuals)
    return AttackReport(scenario, exact, entropy, len(attempts), p_value, recovered)


def random_secrets(n: int, dim: int, rng: np.random.Generator, bits: int = SECRET_BITS) -> list[RingVector]:
    """Signed secrets of magnitude < 2^bits, as ring vectors."""
    return [rng.integers(-(1 << bits), 1 << bits, size=dim, dtype=np.int64).view(np.uint64) for _ in range(n)]


def run_collusion_trials(
    scenario: CollusionScenario,
    n: int,
    k: int,
    dim: int = 4,
    seed: int = 0,
    latency: Optional[LatencyMatrix] = None,
    group: Optional[DhGroup] = None,
) -> AttackReport:
    """
    Run `scenario.trials` fresh rounds of the protocol and attack each.

    The masked protocol keeps one neighbor graph and advances the round tag
    per trial, as a long-running federation would.
    """
    if scenario.victim >= n or any(c >= n for c in scenario.colluders):
        raise ValueError(f"Party ids must be below n={n}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 23]))
    net = SimNet(latency if latency is not None else LatencyMatrix.uniform(n, 1.0))
    graph = None
    if scenario.protocol == "masked":
        graph = build_neighbor_graph(n, k, random.Random(seed), group)

    attempts = []
    for trial in range(scenario.trials):
        secrets = random_secrets(n, dim, rng)
        if scenario.protocol == "masked":
            assert graph is not None
            result = masked_round(secrets, graph, trial, net)
        elif scenario.protocol == "nosmc":
            result = nosmc_round(secrets, net, trial)
        elif scenario.protocol == "stsmc":
            result = stsmc_round(secrets, rng, net, trial)
        elif scenario.protocol == "shamir":
            result = shamir_round(secrets, k, net, rng, trial)
        else:
            raise ValueError(f"Unknown protocol '{scenario.protocol}'")
        attempts.append(collude(scenario, result, secrets, graph, trial, k))
        net.clear_history()

    report = summarize(scenario, attempts)
    logger.info("%s over %d trials: %s", scenario.describe(), report.trials, report.verdict)
    return report


@dataclass
class UndeterminedReport:
    """Completions of k-1 shares with random candidate points."""

    candidates: int
    distinct_secrets: int
    consistent: int

    @property
    def undetermined(self) -> bool:
        """Every candidate gave a different secret consistent with the known shares."""
        return self.distinct_secrets == self.candidates == self.consistent


def _eval_at(point: int, xs: Sequence[int], ys: Sequence[FieldVector]) -> FieldVector:
    """Value at `point` of the polynomial through (xs, ys), by shifting the origin."""
    return vec_interpolate([(x - point) % FIELD_PRIME for x in xs], ys)


def shamir_undetermined(
    shares: dict[int, FieldVector],
    k: int,
    candidates: int = 100,
    rng: Optional[np.random.Generator] = None,
) -> UndeterminedReport:
    """
    Show that k-1 shares leave the secret undetermined.

    Each candidate adds a random value at an unused party's point, which
    completes the set to k points. The completion fixes a secret; it is
    consistent when the polynomial through (0, secret), the candidate and
    all but one known share also passes through the held-out share.

    Args:
        shares: {party: share vector} with exactly k-1 entries (k >= 2)
        k: Threshold
        candidates: Number of random completions
        rng: Source of candidate values
    """
    if len(shares) != k - 1 or k < 2:
        raise ValueError(f"Need exactly k-1={k - 1} shares, got {len(shares)}")
    rng = rng if rng is not None else np.random.default_rng(0)
    parties = sorted(shares)
    xs = [share_point(p) for p in parties]
    ys = [shares[p] for p in parties]
    free_point = max(xs) + 1
    secrets = set()
    consistent = 0
    for _ in range(candidates):
        y_free = rng.integers(0, FIELD_PRIME, size=ys[0].size, dtype=np.uint64)
        secret = vec_interpolate(xs + [free_point], ys + [y_free])
        secrets.add(secret.tobytes())
        check_xs = [0] + xs[1:] + [free_point]
        check_ys = [secret] + ys[1:] + [y_free]
        if np.array_equal(_eval_at(xs[0], check_xs, check_ys), ys[0]):
            consistent += 1
    report = UndeterminedReport(candidates, len(secrets), consistent)
    logger.info(
        "k-1=%d shares: %d candidates, %d distinct secrets, %d consistent",
        k - 1,
        candidates,
        report.distinct_secrets,
        report.consistent,
    )
    return report
