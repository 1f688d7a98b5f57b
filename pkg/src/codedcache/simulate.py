"""Streaming-session simulation under high mobility.

One coded segment arrives per slot from the currently visited base station;
a fragment becomes playable once its share threshold is met; playback
consumes one segment per slot and stalls while the next segment's fragment
is still undecoded. The measured stall total is an independent check of the
closed-form delay model.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coding import CodedSegment, CodeSpec, decode, encode
from .delay import cumulative_delay
from .model import FragmentationPlan, InfeasibleError


@dataclass(frozen=True)
class MobilityPath:
    """The distinct base stations visited during one downloading session."""

    sbs_count: int
    sbs_sequence: tuple[int, ...]

    def __post_init__(self):
        seq = tuple(int(s) for s in self.sbs_sequence)
        if not seq:
            raise ValueError("a mobility path must visit at least one base station")
        if len(set(seq)) != len(seq):
            raise ValueError("a high-mobility path visits distinct base stations")
        if min(seq) < 1 or max(seq) > self.sbs_count:
            raise ValueError(f"base station indices must lie in [1, {self.sbs_count}]")
        object.__setattr__(self, "sbs_sequence", seq)

    def __len__(self) -> int:
        return len(self.sbs_sequence)


def generate_path(sbs_count: int, slots: int, rng: np.random.Generator) -> MobilityPath:
    """Sample ``slots`` distinct base stations uniformly.

    Cell adjacency is irrelevant here: with one coded segment per station
    the session outcome depends only on which stations are distinct.
    """
    if slots < 1:
        raise ValueError("slots must be at least 1")
    if sbs_count < slots:
        raise InfeasibleError(
            f"a path of {slots} distinct base stations needs sbs_count >= {slots}"
        )
    picks = rng.choice(sbs_count, size=slots, replace=False) + 1
    return MobilityPath(sbs_count=sbs_count, sbs_sequence=tuple(int(s) for s in picks))


@dataclass(frozen=True)
class SlotRecord:
    """What happened in one slot of a session."""

    slot: int
    sbs: int | None
    downloading_fragment: int | None
    decoded_fragment: int | None
    displayed_segment: int | None
    rebuffering: bool


@dataclass(frozen=True)
class SessionTrace:
    """Full per-slot record of one session plus the measured stall totals."""

    fragment_sizes: tuple[int, ...]
    path: tuple[int, ...]
    records: tuple[SlotRecord, ...]
    deltas: tuple[int, ...]
    cumulative: int
    displayed_payload: bytes | None

    def to_lines(self) -> list[str]:
        """Debug dump, one action per line (format not stability-guaranteed)."""
        lines = []
        for rec in self.records:
            station = str(rec.sbs) if rec.sbs is not None else "-"
            if rec.downloading_fragment is not None:
                lines.append(f"{rec.slot} {station} recv fragment={rec.downloading_fragment}")
            if rec.decoded_fragment is not None:
                lines.append(f"{rec.slot} {station} decode fragment={rec.decoded_fragment}")
            if rec.displayed_segment is not None:
                lines.append(f"{rec.slot} {station} display segment={rec.displayed_segment}")
            if rec.rebuffering:
                lines.append(f"{rec.slot} {station} stall")
        return lines


def _pattern_payload(total_bytes: int) -> bytes:
    return bytes(i % 251 for i in range(total_bytes))


def simulate_session(
    plan: FragmentationPlan | Sequence[int],
    path: MobilityPath,
    code_specs: Sequence[CodeSpec] | None = None,
    with_real_coding: bool = False,
    payload: bytes | None = None,
    slot_bits: int = 64,
) -> SessionTrace:
    """Run one downloading session and measure its stalls.

    Fragments download in order, one share per slot from the visited
    station. With ``with_real_coding`` the shares carry actual GF(256)
    payloads of ``slot_bits`` bits and every completed fragment is decoded
    from the collected shares; otherwise shares are counted only.
    """
    if isinstance(plan, FragmentationPlan):
        sizes = plan.fragment_sizes
    else:
        sizes = tuple(int(s) for s in plan)
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("fragment sizes must be positive")
    slots = sum(sizes)
    if len(path) != slots:
        raise ValueError(
            f"path length {len(path)} must equal the segment count {slots}"
        )
    fragment_count = len(sizes)
    if code_specs is None:
        code_specs = [CodeSpec(size, path.sbs_count) for size in sizes]
    else:
        code_specs = list(code_specs)
        if len(code_specs) != fragment_count:
            raise ValueError("need one code spec per fragment")
        for spec, size in zip(code_specs, sizes):
            if spec.source_count != size:
                raise ValueError("code spec thresholds must match fragment sizes")
            if spec.total_count < path.sbs_count:
                raise ValueError("code spec must cover every visitable base station")

    coded: list[dict[int, CodedSegment]] = []
    source_segments: list[list[bytes]] = []
    if with_real_coding:
        if slot_bits % 8 != 0:
            raise ValueError("slot_bits must be a multiple of 8 for real coding")
        seg_bytes = slot_bits // 8
        if payload is None:
            payload = _pattern_payload(slots * seg_bytes)
        if len(payload) != slots * seg_bytes:
            raise ValueError(f"payload must be {slots * seg_bytes} bytes")
        offset = 0
        for spec, size in zip(code_specs, sizes):
            segments = [
                payload[(offset + i) * seg_bytes : (offset + i + 1) * seg_bytes]
                for i in range(size)
            ]
            source_segments.append(segments)
            coded.append({seg.sbs_index: seg for seg in encode(spec, segments)})
            offset += size

    # fragment index (0-based) owning each 1-based segment
    segment_fragment = []
    for frag, size in enumerate(sizes):
        segment_fragment.extend([frag] * size)

    shares: list[list[CodedSegment]] = [[] for _ in sizes]
    share_count = [0] * fragment_count
    decoded_at: list[int | None] = [None] * fragment_count
    decoded_segments: list[list[bytes] | None] = [None] * fragment_count
    stalls = [0] * fragment_count
    records: list[SlotRecord] = []
    display_chunks: list[bytes] = []

    downloading = 0
    next_segment = 0  # 0-based index of the next segment to display
    slot = 0
    while next_segment < slots:
        slot += 1
        station = None
        recv_fragment = None
        decoded_fragment = None
        if slot <= slots:
            station = path.sbs_sequence[slot - 1]
            recv_fragment = downloading + 1
            share_count[downloading] += 1
            if with_real_coding:
                shares[downloading].append(coded[downloading][station])
            if share_count[downloading] == sizes[downloading]:
                decoded_at[downloading] = slot
                decoded_fragment = downloading + 1
                if with_real_coding:
                    decoded_segments[downloading] = decode(
                        code_specs[downloading], shares[downloading]
                    )
                downloading += 1

        fragment = segment_fragment[next_segment]
        ready = decoded_at[fragment] is not None and decoded_at[fragment] < slot
        displayed = None
        if ready:
            displayed = next_segment + 1
            if with_real_coding:
                within = next_segment - sum(sizes[:fragment])
                display_chunks.append(decoded_segments[fragment][within])
            next_segment += 1
        else:
            stalls[fragment] += 1
        records.append(
            SlotRecord(
                slot=slot,
                sbs=station,
                downloading_fragment=recv_fragment,
                decoded_fragment=decoded_fragment,
                displayed_segment=displayed,
                rebuffering=not ready,
            )
        )

    return SessionTrace(
        fragment_sizes=sizes,
        path=path.sbs_sequence,
        records=tuple(records),
        deltas=tuple(stalls),
        cumulative=sum(stalls),
        displayed_payload=b"".join(display_chunks) if with_real_coding else None,
    )


@dataclass(frozen=True)
class DelayStats:
    """Measured stall totals over independent sessions."""

    trials: int
    mean: float
    min: int
    max: int


def monte_carlo_delay(
    plan: FragmentationPlan | Sequence[int],
    sbs_count: int,
    trials: int,
    rng: np.random.Generator,
) -> DelayStats:
    """Measure the stall total over random paths.

    Placement is symmetric across stations, so the measurement cannot vary
    with the path; this function asserts that it indeed equals the
    closed-form value on every trial.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sizes = plan.fragment_sizes if isinstance(plan, FragmentationPlan) else tuple(plan)
    slots = sum(sizes)
    expected = cumulative_delay(sizes)
    measured = []
    for _ in range(trials):
        path = generate_path(sbs_count, slots, rng)
        trace = simulate_session(sizes, path)
        if trace.cumulative != expected:
            raise RuntimeError(
                f"measured stall total {trace.cumulative} deviates from the "
                f"closed form {expected} on path {path.sbs_sequence}"
            )
        measured.append(trace.cumulative)
    return DelayStats(
        trials=trials,
        mean=float(np.mean(measured)),
        min=int(min(measured)),
        max=int(max(measured)),
    )
