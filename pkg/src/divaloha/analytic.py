"""Closed-form interference model for two-copy asynchronous diversity Aloha.

Each packet sends two non-overlapping copies of one burst, with the first
copy start uniform over the frame. Seen from one tagged copy, every other
packet ("disturber") inflicts an aggregate overlap of 0..burst_len symbols;
this module builds the exact pmf of that overlap, composes independent
disturbers by discrete convolution, and folds the result into packet loss
ratio and throughput.

All single-disturber probabilities are assembled as integer event counts
over the common denominator A*B, where A is the number of admissible start
positions for a copy and B the number left for the disturber's second copy
once its first is placed. The counts partition the placement space, so they
sum to A*B exactly and nothing is ever renormalized; the one float division
per entry happens last. The counting is organized by what the disturber's
first copy does to the tagged copy: full overlap, partial overlap, distant
(clear of it by at least a burst), or a near miss (clear, but close enough
to constrain where the second copy may fall).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .config import SystemConfig
from .errors import (
    ConfigError,
    InsufficientSupportError,
    InvalidParameterError,
)
from .link import DecodeBudget, LinkModel

_SUM_TOL = 1e-9


def _require_analytic(config: SystemConfig) -> None:
    """The counting model is specific to two copies and needs room for every
    event class to have a nonnegative count."""
    if config.copies != 2:
        raise ConfigError(
            f"interference model is defined for 2 copies per packet, got {config.copies}"
        )
    if config.frame_len < 5 * config.burst_len - 2:
        raise ConfigError(
            f"frame_len ({config.frame_len}) must be >= 5*burst_len - 2 "
            f"({5 * config.burst_len - 2}) for the interference model"
        )


def _event_space(config: SystemConfig) -> tuple[int, int]:
    a = config.start_positions
    b = a - (2 * config.burst_len - 1)
    return a, b


@lru_cache(maxsize=128)
def _numerators_by_first_event(
    frame_len: int, burst_len: int
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Integer counts over the denominator A*B, split by first-copy event.

    Returns (full, partial, distant, near_miss), each a tuple of length
    burst_len + 1 indexed by the total overlap both copies together put on
    the tagged copy. The elementwise sum across groups is the single
    disturber pmf numerator; each group's own total matches the closed-form
    first-copy event probabilities.
    """
    tau = burst_len
    a = frame_len - tau + 1
    b = a - (2 * tau - 1)
    c = a - (4 * tau - 1)  # placements clear of the tagged copy by >= one burst

    n_full = [0] * (tau + 1)
    n_partial = [0] * (tau + 1)
    n_distant = [0] * (tau + 1)
    n_near = [0] * (tau + 1)

    # Total overlap tau: first copy exactly on top (second then cannot touch),
    # first copy clear with the second exactly on top, or two partial
    # overlaps that complement each other across the tagged copy.
    n_full[tau] = b
    n_distant[tau] = c
    n_near[tau] = 2 * tau
    n_partial[tau] = 2 * (tau - 1)

    for x in range(1, tau):
        # first copy overlaps by x and the second stays clear
        n_partial[x] += 2 * (b - (tau - x))
        # both copies overlap partially, summing to x
        n_partial[x] += 2 * (x - 1)
        # first copy distant, second overlaps by x: 2c placements
        n_distant[x] += 2 * c
        # first copy a near miss, second overlaps by x: of the 2x closer
        # offsets both sides of the tagged copy stay open, of the remaining
        # 2(tau - x) only one side does
        n_near[x] += 4 * x + 2 * (tau - x)

    # Total overlap zero: both copies clear.
    n_distant[0] = c * (a - 2 * (2 * tau - 1))
    n_near[0] = sum(2 * (a - (3 * tau + z - 1)) for z in range(tau))

    total = sum(n_full) + sum(n_partial) + sum(n_distant) + sum(n_near)
    if total != a * b:
        raise AssertionError(
            f"event counts cover {total} placements, expected {a * b}"
        )
    return tuple(n_full), tuple(n_partial), tuple(n_distant), tuple(n_near)


@lru_cache(maxsize=128)
def _single_dp_probs(frame_len: int, burst_len: int) -> np.ndarray:
    groups = _numerators_by_first_event(frame_len, burst_len)
    a = frame_len - burst_len + 1
    den = a * (a - (2 * burst_len - 1))
    # per-entry Python int division: correctly rounded, no accumulation
    probs = np.array([sum(cell) / den for cell in zip(*groups)], dtype=float)
    probs.setflags(write=False)
    return probs


@dataclass(frozen=True, eq=False)
class InterferencePmf:
    """Pmf of the aggregate overlap (symbols) a tagged copy suffers.

    ``dp_count`` is how many independent disturbers the pmf accounts for,
    so full support is 0..dp_count*burst_len. When ``truncated_at`` is set,
    ``probs`` holds only indices 0..truncated_at and the upper tail is
    dropped; every retained entry still equals its untruncated value.
    """

    config: SystemConfig
    dp_count: int
    probs: np.ndarray
    truncated_at: int | None = None

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if self.dp_count < 0:
            raise InvalidParameterError(f"dp_count must be >= 0, got {self.dp_count}")
        if probs.ndim != 1:
            raise InvalidParameterError("probs must be one-dimensional")
        if np.any(probs < 0.0):
            raise InvalidParameterError("pmf entries must be nonnegative")
        full_support = self.dp_count * self.config.burst_len
        if self.truncated_at is None:
            if probs.shape[0] != full_support + 1:
                raise InvalidParameterError(
                    f"untruncated pmf needs {full_support + 1} entries, "
                    f"got {probs.shape[0]}"
                )
            total = float(np.add.reduce(probs))
            if abs(total - 1.0) > _SUM_TOL:
                raise InvalidParameterError(f"pmf sums to {total}, expected 1")
        else:
            if not 0 <= self.truncated_at < full_support:
                raise InvalidParameterError(
                    f"truncated_at must be in [0, {full_support}), "
                    f"got {self.truncated_at}"
                )
            if probs.shape[0] != self.truncated_at + 1:
                raise InvalidParameterError(
                    f"truncated pmf needs {self.truncated_at + 1} entries, "
                    f"got {probs.shape[0]}"
                )
            if float(np.add.reduce(probs)) > 1.0 + _SUM_TOL:
                raise InvalidParameterError("truncated pmf mass exceeds 1")

    @property
    def support_len(self) -> int:
        return self.probs.shape[0]


def delta_pmf(config: SystemConfig) -> InterferencePmf:
    """Zero disturbers: all mass on zero overlap."""
    return InterferencePmf(config, 0, np.ones(1))


def single_dp_pmf(config: SystemConfig) -> InterferencePmf:
    """Aggregate-overlap pmf one disturbing packet inflicts on a tagged copy."""
    _require_analytic(config)
    return InterferencePmf(
        config, 1, _single_dp_probs(config.frame_len, config.burst_len)
    )


class EventSplit(NamedTuple):
    """One value per first-copy event class."""

    full_overlap: float | Fraction
    partial_overlap: float | Fraction
    distant: float | Fraction
    near_miss: float | Fraction


def first_copy_event_probabilities(config: SystemConfig) -> EventSplit:
    """Closed-form probability of each first-copy event class, as exact
    fractions over A; the four sum to 1 identically."""
    _require_analytic(config)
    tau = config.burst_len
    a, _ = _event_space(config)
    return EventSplit(
        full_overlap=Fraction(1, a),
        partial_overlap=Fraction(2 * (tau - 1), a),
        distant=Fraction(a - (4 * tau - 1), a),
        near_miss=Fraction(2 * tau, a),
    )


def pmf_mass_by_first_event(config: SystemConfig) -> EventSplit:
    """Single-disturber pmf mass grouped by first-copy event class.

    Summing each group's counts must reproduce first_copy_event_probabilities:
    conditioned on its first-copy event, the disturber's second copy always
    lands somewhere admissible, so no mass leaks between groups.
    """
    _require_analytic(config)
    groups = _numerators_by_first_event(config.frame_len, config.burst_len)
    a, b = _event_space(config)
    den = a * b
    return EventSplit(*(sum(g) / den for g in groups))


class FullOverlapBreakdown(NamedTuple):
    """The three disjoint routes to a completely interfered copy."""

    first_copy_full: float
    second_copy_full: float
    paired_partials: float


def full_overlap_breakdown(config: SystemConfig) -> FullOverlapBreakdown:
    """Split of the total-overlap probability by which copy (or pair) did it.

    The first two routes are symmetric: conditioning costs the first copy
    a factor B/A of freedom that the second copy's placement count restores.
    """
    _require_analytic(config)
    tau = config.burst_len
    a, b = _event_space(config)
    den = a * b
    c = a - (4 * tau - 1)
    return FullOverlapBreakdown(
        first_copy_full=b / den,
        second_copy_full=(c + 2 * tau) / den,
        paired_partials=2 * (tau - 1) / den,
    )


def _conv_prefix(a: np.ndarray, b: np.ndarray, out_len: int) -> np.ndarray:
    """First ``out_len`` entries of the discrete convolution of a and b.

    The summation order per output index is pinned (ascending index into
    ``a``, numpy pairwise reduction over the window), so a truncated run
    reproduces the matching prefix of an untruncated run bit for bit.
    np.convolve is no use here: it swaps operands by length, which changes
    the float summation order.
    """
    la = a.shape[0]
    lb = b.shape[0]
    br = np.ascontiguousarray(b[::-1])
    out = np.zeros(out_len)
    for k in range(out_len):
        i0 = k - lb + 1
        if i0 < 0:
            i0 = 0
        i1 = k if k < la - 1 else la - 1
        if i1 < i0:
            continue
        j0 = lb - 1 - k + i0
        window = a[i0 : i1 + 1] * br[j0 : j0 + (i1 - i0 + 1)]
        out[k] = np.add.reduce(window)
    return out


def convolve(
    a: InterferencePmf, b: InterferencePmf, trunc_len: int | None = None
) -> InterferencePmf:
    """Pmf of the summed overlap from the disturbers of ``a`` and ``b``.

    ``trunc_len`` caps the result support at that overlap value. A prefix of
    a convolution depends only on the operand prefixes, so every retained
    entry equals the untruncated value exactly; mass above the cap is
    dropped, not redistributed.
    """
    if a.config != b.config:
        raise ConfigError("cannot convolve pmfs built for different configs")
    if trunc_len is not None and trunc_len < 0:
        raise InvalidParameterError(f"trunc_len must be >= 0, got {trunc_len}")
    config = a.config
    dp_count = a.dp_count + b.dp_count
    full_support = dp_count * config.burst_len
    limit = full_support
    for cap in (a.truncated_at, b.truncated_at, trunc_len):
        if cap is not None and cap < limit:
            limit = cap
    out = _conv_prefix(a.probs, b.probs, limit + 1)
    return InterferencePmf(
        config, dp_count, out, None if limit == full_support else limit
    )


def interference_distribution(
    config: SystemConfig, n_dp: int, trunc_len: int | None = None
) -> InterferencePmf:
    """Overlap pmf from ``n_dp`` independent disturbers.

    Left fold of the single-disturber pmf; with ``trunc_len`` set, every
    intermediate is truncated as well, keeping the fold linear in the cap
    instead of quadratic in n_dp * burst_len.
    """
    if n_dp < 0:
        raise InvalidParameterError(f"n_dp must be >= 0, got {n_dp}")
    acc = delta_pmf(config)
    if n_dp == 0:
        return acc
    single = single_dp_pmf(config)
    for _ in range(n_dp):
        acc = convolve(acc, single, trunc_len)
    return acc


def p_copy_decoded(pmf: InterferencePmf, budget: DecodeBudget) -> float:
    """Probability one tagged copy decodes: overlap cdf at the budget."""
    if not budget.decodable:
        return 0.0
    x_dec = budget.max_interference
    if pmf.truncated_at is not None and pmf.truncated_at < x_dec:
        raise InsufficientSupportError(
            f"pmf truncated at {pmf.truncated_at} cannot answer a cdf query "
            f"at {x_dec}"
        )
    end = min(x_dec + 1, pmf.support_len)
    return float(np.add.reduce(pmf.probs[:end]))


def p_packet_decoded(p_ccd: float) -> float:
    """Probability at least one of a packet's two copies decodes.

    Copy failures are treated as independent, which the overlap model makes
    exact at the per-copy marginal level.
    """
    if not 0.0 <= p_ccd <= 1.0:
        raise InvalidParameterError(f"p_ccd must be in [0, 1], got {p_ccd}")
    return 1.0 - (1.0 - p_ccd) ** 2


def n_tx_for_load(config: SystemConfig, load: float) -> int:
    """Transmitter count giving normalized load ``load``.

    Ties round half away from zero so the analytic and simulated paths agree
    on the same packet count at every grid value.
    """
    if load < 0.0:
        raise InvalidParameterError(f"load must be >= 0, got {load}")
    return int(math.floor(load * config.frame_len / config.burst_len + 0.5))


@dataclass(frozen=True)
class CurvePoint:
    """Analytic operating point at one load."""

    load: float
    n_tx: int
    p_ccd: float
    plr: float
    throughput: float


def analytic_curve(
    config: SystemConfig, link: LinkModel, loads: Sequence[float]
) -> list[CurvePoint]:
    """Packet loss ratio and throughput at each load.

    The disturber pmf is folded once up to the largest needed count and
    sampled along the way, which reproduces the per-load fold exactly.
    Intermediates are truncated at the decode budget: the loss probability
    only ever reads the cdf up to it. An empty frame loses nothing, so
    n_tx = 0 reports plr 0 (and p_ccd 1 to keep the packet identity).
    """
    _require_analytic(config)
    n_by_load = [n_tx_for_load(config, g) for g in loads]

    budget = link.budget
    if not budget.decodable:
        return [
            CurvePoint(g, n, 1.0, 0.0, 0.0)
            if n == 0
            else CurvePoint(g, n, 0.0, 1.0, 0.0)
            for g, n in zip(loads, n_by_load)
        ]

    needed = {n - 1 for n in n_by_load if n >= 1}
    p_ccd_at: dict[int, float] = {}
    if needed:
        x_dec = budget.max_interference
        acc = delta_pmf(config)
        if 0 in needed:
            p_ccd_at[0] = p_copy_decoded(acc, budget)
        single = single_dp_pmf(config)
        for n_dp in range(1, max(needed) + 1):
            acc = convolve(acc, single, x_dec)
            if n_dp in needed:
                p_ccd_at[n_dp] = p_copy_decoded(acc, budget)

    points = []
    for g, n in zip(loads, n_by_load):
        if n == 0:
            points.append(CurvePoint(g, 0, 1.0, 0.0, 0.0))
            continue
        p_ccd = p_ccd_at[n - 1]
        plr = (1.0 - p_ccd) ** 2
        points.append(CurvePoint(g, n, p_ccd, plr, g * (1.0 - plr)))
    return points
