"""Dose-assignment rules for three interval designs and their boundary tables.

The three families (mTPI, Keyboard, BOIN) share one contract: given the DLT
tally at the current dose, return escalate / stay / de-escalate / eliminate.
All of them admit a pre-tabulated form: for each sample size n there is a
largest count still allowing escalation (E_n), a smallest count forcing
de-escalation (D_n), and optionally a smallest count eliminating the dose and
everything above it (T_n). ``boundary_table`` materialises those rows so hot
loops can decide by integer comparison.

Decision conventions, spelled out because they are easy to get subtly wrong:

- BOIN compares the raw DLT rate against two fixed thresholds derived from
  the proper-dosing interval; no posterior is involved at decision time.
- mTPI ranks the three interval regions by posterior mass per unit width
  (unit probability mass) under Beta(1 + n_dlt, 1 + n - n_dlt), then applies
  a de-escalation safety margin: whenever the posterior mean sits at least
  one posterior standard deviation above the target, the dose comes down
  regardless of which region won the ranking.
- Keyboard tiles keys of the interval's width outward from the target key,
  truncates the end keys at 0 and 1, and moves toward the strongest key by
  raw posterior mass (not mass per width).
- Ties prefer the safer action (de-escalate over stay over escalate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .mathcore import (
    BetaShape,
    DomainError,
    as_probability,
    beta_cdf,
    beta_sf,
)

__all__ = [
    "DesignKind",
    "Decision",
    "DesignParams",
    "BoundaryRow",
    "BoundaryTable",
    "boin_thresholds",
    "decide",
    "weighted_decision",
    "elimination_check",
    "boundary_table",
]


class DesignKind(str, Enum):
    MTPI = "mtpi"
    KEYBOARD = "keyboard"
    BOIN = "boin"


class Decision(str, Enum):
    ESCALATE = "escalate"
    STAY = "stay"
    DEESCALATE = "deescalate"
    ELIMINATE = "eliminate"


@dataclass(frozen=True)
class DesignParams:
    """Target DLT level, proper-dosing interval, and elimination settings."""

    target: float
    interval_lo: float
    interval_hi: float
    elimination_cutoff: float = 0.95
    elimination_min_n: int = 3

    def __post_init__(self) -> None:
        as_probability(self.target, "target")
        as_probability(self.interval_lo, "interval_lo")
        as_probability(self.interval_hi, "interval_hi")
        as_probability(self.elimination_cutoff, "elimination_cutoff")
        if not 0.0 < self.interval_lo < self.target < self.interval_hi < 1.0:
            raise DomainError(
                f"need 0 < interval_lo < target < interval_hi < 1, got "
                f"({self.interval_lo}, {self.target}, {self.interval_hi})"
            )
        if not 0.0 < self.elimination_cutoff < 1.0:
            raise DomainError("elimination_cutoff must lie strictly inside (0, 1)")
        if int(self.elimination_min_n) != self.elimination_min_n or self.elimination_min_n < 1:
            raise DomainError("elimination_min_n must be an integer >= 1")

    @classmethod
    def defaults_for(cls, kind: DesignKind, target: float = 0.3) -> "DesignParams":
        """Conventional interval for each family: target +/- 0.05 for the
        posterior-interval designs, (0.6, 1.4) x target for BOIN."""
        kind = DesignKind(kind)
        if kind is DesignKind.BOIN:
            return cls(target, 0.6 * target, 1.4 * target)
        return cls(target, target - 0.05, target + 0.05)


def boin_thresholds(params: DesignParams) -> tuple[float, float]:
    """BOIN escalation/de-escalation rate thresholds (lambda_e, lambda_d).

    Guarantees interval_lo < lambda_e < target < lambda_d < interval_hi.
    """
    phi, lo, hi = params.target, params.interval_lo, params.interval_hi
    lam_e = math.log((1.0 - lo) / (1.0 - phi)) / math.log(
        phi * (1.0 - lo) / (lo * (1.0 - phi))
    )
    lam_d = math.log((1.0 - phi) / (1.0 - hi)) / math.log(
        hi * (1.0 - phi) / (phi * (1.0 - hi))
    )
    return lam_e, lam_d


def elimination_check(n_dlt: int, n: int, params: DesignParams) -> bool:
    """Safety rule: drop the dose (and all above) when the posterior chance
    of exceeding the target is beyond the cutoff, given enough patients."""
    _check_counts(n_dlt, n, minimum_n=0)
    if n < params.elimination_min_n:
        return False
    shape = BetaShape(1.0 + n_dlt, 1.0 + n - n_dlt)
    return beta_sf(params.target, shape) > params.elimination_cutoff


def _check_counts(n_dlt: int, n: int, minimum_n: int = 1) -> None:
    if int(n) != n or int(n_dlt) != n_dlt:
        raise DomainError(f"counts must be integers, got n_dlt={n_dlt!r} n={n!r}")
    if n < minimum_n or not 0 <= n_dlt <= n:
        raise DomainError(f"need 0 <= n_dlt <= n and n >= {minimum_n}, got {n_dlt}/{n}")


def decide(kind: DesignKind, params: DesignParams, n_dlt: int, n: int) -> Decision:
    """Dose decision from fully assessed counts at the current dose."""
    _check_counts(n_dlt, n)
    if elimination_check(n_dlt, n, params):
        return Decision.ELIMINATE
    return weighted_decision(kind, params, float(n_dlt), float(n - n_dlt))


def weighted_decision(
    kind: DesignKind, params: DesignParams, n_dlt: float, n_e: float
) -> Decision:
    """Escalate/stay/de-escalate from a DLT count and an effective non-DLT
    count, which may be fractional. Does not apply the elimination rule.

    With complete assessments n_e = n - n_dlt and this reduces to the plain
    rule for all three families.
    """
    kind = DesignKind(kind)
    if not (n_dlt >= 0.0 and n_e >= 0.0 and n_dlt + n_e > 0.0):
        raise DomainError(
            f"need n_dlt >= 0, n_e >= 0, n_dlt + n_e > 0, got {n_dlt!r}, {n_e!r}"
        )
    if kind is DesignKind.BOIN:
        lam_e, lam_d = boin_thresholds(params)
        rate = n_dlt / (n_dlt + n_e)
        if rate <= lam_e:
            return Decision.ESCALATE
        if rate >= lam_d:
            return Decision.DEESCALATE
        return Decision.STAY
    shape = BetaShape(1.0 + n_dlt, 1.0 + n_e)
    if kind is DesignKind.MTPI:
        return _mtpi_decision(params, shape)
    return _keyboard_decision(params, shape)


def _mtpi_decision(params: DesignParams, shape: BetaShape) -> Decision:
    lo, hi = params.interval_lo, params.interval_hi
    # safety margin: a posterior mean a full posterior sd above target forces
    # de-escalation no matter how the interval masses rank
    if shape.mean - params.target >= shape.sd:
        return Decision.DEESCALATE
    cdf_lo = beta_cdf(lo, shape)
    cdf_hi = beta_cdf(hi, shape)
    under = cdf_lo / lo
    inside = (cdf_hi - cdf_lo) / (hi - lo)
    over = (1.0 - cdf_hi) / (1.0 - hi)
    best = max(under, inside, over)
    if over == best:
        return Decision.DEESCALATE
    if inside == best:
        return Decision.STAY
    return Decision.ESCALATE


def _keyboard_decision(params: DesignParams, shape: BetaShape) -> Decision:
    lo, hi = params.interval_lo, params.interval_hi
    width = hi - lo
    # key j spans (lo + j*width, hi + j*width); partial end keys keep their
    # truncated spans and raw mass
    j_first = -int(math.ceil(lo / width - 1e-12))
    j_last = int(math.ceil((1.0 - hi) / width - 1e-12))
    best_j = 0
    best_mass = -1.0
    for j in range(j_first, j_last + 1):
        a = max(0.0, lo + j * width)
        b = min(1.0, hi + j * width)
        if b <= a:
            continue
        mass = beta_cdf(b, shape) - beta_cdf(a, shape)
        if mass >= best_mass:  # >= so ties fall to the higher (safer) key
            best_mass, best_j = mass, j
    if best_j > 0:
        return Decision.DEESCALATE
    if best_j < 0:
        return Decision.ESCALATE
    return Decision.STAY


@dataclass(frozen=True)
class BoundaryRow:
    """Decision boundaries at a fixed number treated.

    escalate_max is -1 when no count allows escalation; deescalate_min is
    n + 1 when no count forces the dose down; eliminate_min is None when the
    sample is below the elimination minimum or no count triggers the rule.
    """

    n: int
    escalate_max: int
    deescalate_min: int
    eliminate_min: int | None


@dataclass(frozen=True)
class BoundaryTable:
    """Rows 1..n_max of decision boundaries for one design and params."""

    kind: DesignKind
    params: DesignParams
    rows: tuple[BoundaryRow, ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise DomainError("boundary table needs at least one row")
        prev: BoundaryRow | None = None
        for i, row in enumerate(self.rows, start=1):
            if row.n != i:
                raise DomainError(f"rows must cover n = 1..{len(self.rows)} in order")
            if not row.escalate_max < row.deescalate_min:
                raise DomainError(f"escalation boundary must sit below de-escalation at n={i}")
            if row.eliminate_min is not None and row.eliminate_min < row.deescalate_min:
                raise DomainError(f"elimination boundary below de-escalation boundary at n={i}")
            if prev is not None and (
                row.escalate_max < prev.escalate_max
                or row.deescalate_min < prev.deescalate_min
            ):
                raise DomainError(f"boundaries must be nondecreasing in n (at n={i})")
            prev = row

    @property
    def n_max(self) -> int:
        return len(self.rows)

    def row(self, n: int) -> BoundaryRow:
        if not 1 <= n <= len(self.rows):
            raise DomainError(f"no boundary row for n={n} (table covers 1..{len(self.rows)})")
        return self.rows[n - 1]

    def decision_for(self, n_dlt: int, n: int) -> Decision:
        """Table-lookup equivalent of decide(); used by hot simulation loops."""
        _check_counts(n_dlt, n)
        row = self.row(n)
        if row.eliminate_min is not None and n_dlt >= row.eliminate_min:
            return Decision.ELIMINATE
        if n_dlt >= row.deescalate_min:
            return Decision.DEESCALATE
        if n_dlt <= row.escalate_max:
            return Decision.ESCALATE
        return Decision.STAY

    def to_dict(self) -> dict:
        return {
            "design": self.kind.value,
            "target": self.params.target,
            "interval": [self.params.interval_lo, self.params.interval_hi],
            "elimination_cutoff": self.params.elimination_cutoff,
            "elimination_min_n": self.params.elimination_min_n,
            "rows": [
                {
                    "n": r.n,
                    "escalate_max": r.escalate_max,
                    "deescalate_min": r.deescalate_min,
                    "eliminate_min": r.eliminate_min,
                }
                for r in self.rows
            ],
        }


def boundary_table(kind: DesignKind, params: DesignParams, n_max: int) -> BoundaryTable:
    """Tabulate decide() for n = 1..n_max.

    De-escalation rows fold in the elimination override (a count that
    eliminates also forces the dose down), so decision_for reproduces
    decide() exactly.
    """
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be an integer >= 1, got {n_max!r}")
    kind = DesignKind(kind)
    rows = []
    for n in range(1, int(n_max) + 1):
        escalate_max = -1
        deescalate_min = n + 1
        eliminate_min: int | None = None
        for x in range(n + 1):
            d = decide(kind, params, x, n)
            if d is Decision.ESCALATE:
                escalate_max = x
            elif d in (Decision.DEESCALATE, Decision.ELIMINATE) and deescalate_min > n:
                deescalate_min = x
            if eliminate_min is None and elimination_check(x, n, params):
                eliminate_min = x
        rows.append(BoundaryRow(n, escalate_max, deescalate_min, eliminate_min))
    return BoundaryTable(kind, params, tuple(rows))
