"""Calibration factor, error metrics, and repeatability.

Errors are signed percentages throughout; "maximum error" reporting uses
the largest magnitude. The flow-weighted mean error weights each rate's
error by its flow relative to the largest tested flow.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import OutOfRangeError

TRIAL_CSV_HEADER = "segment_id,flow_label,q_ref_lps,q_meas_lps"


@dataclass(frozen=True)
class TrialRecord:
    """One measurement trial against the reference meter (flows in L/s)."""

    segment_id: int
    flow_label: str
    q_ref_lps: float
    q_meas_lps: float

    def __post_init__(self):
        if not self.q_ref_lps > 0:
            raise OutOfRangeError(f"reference flow must be positive, got {self.q_ref_lps!r}")


def percent_error(q_meas: float, q_ref: float) -> float:
    """Signed percent deviation of the measurement from the reference."""
    if not q_ref > 0:
        raise OutOfRangeError(f"reference flow must be positive, got {q_ref!r}")
    return 100.0 * (q_meas - q_ref) / q_ref


def fwme(errors: Iterable[tuple[float, float]]) -> float:
    """Flow-Weighted Mean Error over (q_ref, error_pct) pairs.

    Each error is weighted by q_ref / max(q_ref); a single entry's FWME is
    that entry's error, and equal flows reduce to the arithmetic mean.
    """
    pairs = list(errors)
    if not pairs:
        raise OutOfRangeError("FWME needs at least one (flow, error) pair")
    q_max = max(q for q, _ in pairs)
    if not q_max > 0:
        raise OutOfRangeError("all reference flows must be positive")
    weights = []
    for q, _ in pairs:
        if not q > 0:
            raise OutOfRangeError(f"reference flow must be positive, got {q!r}")
        weights.append(q / q_max)
    return sum(w * e for w, (_, e) in zip(weights, pairs)) / sum(weights)


def calibration_factor(trials: Sequence[TrialRecord]) -> float:
    """Single multiplicative k_cal: mean of q_ref/q_meas over the trials."""
    if not trials:
        raise OutOfRangeError("calibration needs at least one trial")
    ratios = []
    for t in trials:
        if not t.q_meas_lps > 0:
            raise OutOfRangeError(
                f"measured flow must be positive for calibration, got {t.q_meas_lps!r}"
            )
        ratios.append(t.q_ref_lps / t.q_meas_lps)
    return sum(ratios) / len(ratios)


def repeatability(samples: Sequence[float]) -> float:
    """Relative sample standard deviation in percent.

    R = 100 * sqrt(sum((Q_i - mean)^2) / (n - 1)) / mean, n >= 2.
    """
    n = len(samples)
    if n < 2:
        raise OutOfRangeError(f"repeatability needs at least 2 samples, got {n}")
    mean = sum(samples) / n
    if mean == 0:
        raise OutOfRangeError("repeatability undefined for zero mean flow")
    variance = sum((q - mean) ** 2 for q in samples) / (n - 1)
    return 100.0 * math.sqrt(variance) / abs(mean)


@dataclass(frozen=True)
class ErrorRow:
    flow_label: str
    q_ref_lps: float
    error_pct: float


@dataclass(frozen=True)
class ErrorTable:
    rows: tuple[ErrorRow, ...]
    fwme_pct: float
    max_abs_error_pct: float


def error_table(trials: Sequence[TrialRecord], k_cal: float = 1.0) -> ErrorTable:
    """Per-flow-rate mean percent error (after applying k_cal) plus FWME."""
    if not trials:
        raise OutOfRangeError("error table needs at least one trial")
    by_label: dict[str, list[TrialRecord]] = {}
    for t in trials:
        by_label.setdefault(t.flow_label, []).append(t)
    rows = []
    for label, group in by_label.items():
        q_ref = sum(t.q_ref_lps for t in group) / len(group)
        err = sum(percent_error(k_cal * t.q_meas_lps, t.q_ref_lps) for t in group) / len(group)
        rows.append(ErrorRow(label, q_ref, err))
    rows.sort(key=lambda r: r.q_ref_lps)
    return ErrorTable(
        rows=tuple(rows),
        fwme_pct=fwme((r.q_ref_lps, r.error_pct) for r in rows),
        max_abs_error_pct=max(abs(r.error_pct) for r in rows),
    )


def first_segments(trials: Sequence[TrialRecord]) -> list[TrialRecord]:
    """The earliest segment of each flow rate; the calibration subset."""
    firsts: dict[str, TrialRecord] = {}
    for t in trials:
        current = firsts.get(t.flow_label)
        if current is None or t.segment_id < current.segment_id:
            firsts[t.flow_label] = t
    return [firsts[label] for label in sorted(firsts, key=lambda lb: firsts[lb].q_ref_lps)]


def read_trials(lines: Iterable[str]) -> Iterator[TrialRecord]:
    """Parse the paired CSV ``segment_id,flow_label,q_ref_lps,q_meas_lps``."""
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower().replace(" ", "") == TRIAL_CSV_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise OutOfRangeError(
                f"trial CSV line {line_no}: expected 4 fields, got {len(parts)}"
            )
        try:
            yield TrialRecord(
                segment_id=int(parts[0]),
                flow_label=parts[1].strip(),
                q_ref_lps=float(parts[2]),
                q_meas_lps=float(parts[3]),
            )
        except ValueError as exc:
            raise OutOfRangeError(f"trial CSV line {line_no}: {exc}") from exc


def format_error_table(table: ErrorTable) -> str:
    """Aligned text rendering of the table."""
    lines = [f"{'flow':>8}  {'q_ref_lps':>10}  {'error_pct':>10}"]
    for row in table.rows:
        lines.append(f"{row.flow_label:>8}  {row.q_ref_lps:>10.4f}  {row.error_pct:>10.4f}")
    lines.append(f"{'FWME':>8}  {'':>10}  {table.fwme_pct:>10.4f}")
    lines.append(f"{'max|E|':>8}  {'':>10}  {table.max_abs_error_pct:>10.4f}")
    return "\n".join(lines)


def error_table_csv(table: ErrorTable) -> str:
    lines = ["flow_label,q_ref_lps,error_pct"]
    for row in table.rows:
        lines.append(f"{row.flow_label},{row.q_ref_lps!r},{row.error_pct!r}")
    lines.append(f"FWME,,{table.fwme_pct!r}")
    return "\n".join(lines) + "\n"
