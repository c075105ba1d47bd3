"""Deterministic search for (constrained) proper Tverberg tuples.

Candidates are ordered part-tuples of disjoint nonempty index subsets;
the stream is generated in lexicographic order of the sequence of sorted
parts, so ``({0},{1},{2})`` with everything else leftover comes first.
Canonical mode keeps exactly one relabeling per unordered partition by
requiring min(I_1) < ... < min(I_r).

Searches are exhaustive within a size gate and return the first feasible
candidate in stream order; with several worker threads, disjoint chunks
race and the earliest feasible candidate is still the one returned, so
results are identical at any worker count.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice
from typing import Iterable, Iterator, Optional, Sequence

from fandist.errors import (
    GuaranteeViolation,
    PreconditionError,
    SearchTimeout,
    SizeGateExceeded,
)
from fandist.feaslp import (
    ExactWeightSolver,
    WeightWitness,
    realify_if_needed,
)
from fandist.galedual import PointConfig
from fandist.kneser import (
    ColoringCertificate,
    SetFamily,
    m_eligible,
    verify_certificate,
)

__all__ = [
    "SearchConstraint",
    "TverbergTuple",
    "enumerate_candidates",
    "search_colored_tuple",
    "search_tuple",
    "search_two_tuples",
]

DEFAULT_LP_GATE = 50_000_000
DEFAULT_PAIR_GATE = 1_000_000
DEFAULT_TUPLE_GATE = 200_000
SEARCH_CHUNK = 1024


@dataclass(frozen=True)
class TverbergTuple:
    """Ordered disjoint parts with an exact positive-weight witness."""

    r: int
    parts: tuple[tuple[int, ...], ...]
    witness: WeightWitness

    def support(self) -> tuple[int, ...]:
        out = []
        for p in self.parts:
            out.extend(p)
        return tuple(sorted(out))

    def validate(self, config: PointConfig) -> None:
        if len(self.parts) != self.r:
            raise PreconditionError("wrong number of parts")
        seen: set[int] = set()
        for p in self.parts:
            if not p:
                raise PreconditionError("empty part")
            if seen.intersection(p):
                raise PreconditionError("parts overlap")
            seen.update(p)
        real = realify_if_needed(config)
        if not self.witness.verify(real.points, self.parts):
            raise PreconditionError("witness fails exact re-verification")

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "parts": [list(p) for p in self.parts],
            "witness": self.witness.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "TverbergTuple":
        return cls(int(obj["r"]),
                   tuple(tuple(int(i) for i in p) for p in obj["parts"]),
                   WeightWitness.from_json(obj["witness"]))


class SearchConstraint:
    """Filter on candidate part-tuples, with incremental pruning.

    Variants: none, family-avoid (no family member inside any part),
    color-cap (per-class per-part cardinality caps), rainbow (all caps 1).
    """

    def __init__(self, kind: str, *, family: Optional[SetFamily] = None,
                 caps: Optional[dict[int, int]] = None,
                 coloring: Optional[Sequence[int]] = None):
        self.kind = kind
        self.family = family
        self.caps = dict(caps) if caps else None
        self.coloring = tuple(coloring) if coloring is not None else None
        self._members_by_elem: dict[int, list[frozenset]] = {}
        if family is not None:
            for m in family.members:
                fs = frozenset(m)
                for i in m:
                    self._members_by_elem.setdefault(i, []).append(fs)

    @classmethod
    def none(cls) -> "SearchConstraint":
        return cls("none")

    @classmethod
    def family_avoid(cls, family: SetFamily) -> "SearchConstraint":
        return cls("family-avoid", family=family)

    @classmethod
    def color_cap(cls, caps: dict[int, int],
                  coloring: Sequence[int]) -> "SearchConstraint":
        return cls("color-cap", caps=caps, coloring=coloring)

    @classmethod
    def rainbow(cls, coloring: Sequence[int]) -> "SearchConstraint":
        caps = {k: 1 for k in range(max(coloring) + 1)}
        return cls("rainbow", caps=caps, coloring=coloring)

    # incremental interface: may index i extend the part currently `part`?
    def may_add(self, part: list[int], counts: dict[int, int], i: int) -> bool:
        if self.caps is not None:
            c = self.coloring[i] if self.coloring is not None else 0
            if counts.get(c, 0) + 1 > self.caps.get(c, len(part) + 2):
                return False
        if self.family is not None:
            new = set(part)
            new.add(i)
            for member in self._members_by_elem.get(i, ()):
                if member <= new:
                    return False
        return True

    def admits(self, parts: Iterable[Sequence[int]]) -> bool:
        """Full (non-incremental) check of a candidate."""
        for part in parts:
            ps = set(part)
            if self.caps is not None:
                counts: dict[int, int] = {}
                for i in part:
                    c = self.coloring[i] if self.coloring is not None else 0
                    counts[c] = counts.get(c, 0) + 1
                for c, cnt in counts.items():
                    if cnt > self.caps.get(c, cnt):
                        return False
            if self.family is not None:
                for member in self.family.members:
                    if len(member) <= len(ps) and set(member) <= ps:
                        return False
        return True


def _candidate_stream(indices: Sequence[int], r: int, canonical_only: bool,
                      constraint: Optional[SearchConstraint],
                      max_part_size: Optional[int]) -> Iterator[tuple]:
    """Part-tuples in lexicographic order of the sorted-parts sequence."""
    idx = sorted(indices)
    n = len(idx)

    def build(parts, used, prev_min):
        depth = len(parts)
        remaining = [i for i in idx if i not in used]
        if depth == r:
            yield tuple(tuple(p) for p in parts)
            return
        if len(remaining) < r - depth:
            return

        def extend(part, counts, start):
            # a completed nonempty part is emitted before its extensions
            if part:
                yield list(part)
            if max_part_size is not None and len(part) >= max_part_size:
                return
            for k in range(start, len(remaining)):
                i = remaining[k]
                if not part and canonical_only and prev_min is not None \
                        and i <= prev_min:
                    continue
                if constraint is not None and not constraint.may_add(
                        part, counts, i):
                    continue
                c = None
                if constraint is not None and constraint.caps is not None:
                    c = constraint.coloring[i] if constraint.coloring \
                        is not None else 0
                    counts[c] = counts.get(c, 0) + 1
                part.append(i)
                yield from extend(part, counts, k + 1)
                part.pop()
                if c is not None:
                    counts[c] -= 1

        for sub in extend([], {}, 0):
            yield from build(parts + [sub], used.union(sub), sub[0])

    yield from build([], frozenset(), None)


def enumerate_candidates(n: int, r: int,
                         canonical_only: bool = False) -> Iterator[tuple]:
    """Every assignment of [n] into r nonempty parts plus leftovers.

    Ordered lexicographically by the sequence of sorted parts; canonical
    mode suppresses relabelings by requiring increasing part minima.
    """
    if n < r:
        raise PreconditionError("need at least r indices")
    return _candidate_stream(range(n), r, canonical_only, None, None)


def _evaluate_chunk(chunk, solver):
    """First feasible candidate in a chunk: (local index, parts, witness)."""
    for k, parts in enumerate(chunk):
        witness = solver.solve(parts)
        if witness is not None:
            return k, parts, witness
    return None


def search_tuple(config: PointConfig, r: int,
                 constraint: Optional[SearchConstraint] = None, *,
                 allowed: Optional[Sequence[int]] = None,
                 canonical_only: bool = True,
                 max_part_size: Optional[int] = None,
                 lp_gate: int = DEFAULT_LP_GATE,
                 workers: int = 1,
                 guarantee: Optional[str] = None) -> Optional[TverbergTuple]:
    """First proper tuple in canonical order passing the constraint.

    Returns None after exhausting the stream; raises SizeGateExceeded when
    the gate fires first (a distinct outcome), and GuaranteeViolation when
    ``guarantee`` names a satisfied theorem hypothesis yet the exhaustive
    search came up empty (that is a bug signal, not a data error).
    """
    if config.n < r:
        raise PreconditionError("need at least r points")
    real = realify_if_needed(config)
    solver = ExactWeightSolver(real.points)
    indices = list(range(config.n)) if allowed is None else sorted(allowed)
    stream = _candidate_stream(indices, r, canonical_only, constraint,
                               max_part_size)

    lp_calls = 0
    found = None
    if workers <= 1:
        for parts in stream:
            lp_calls += 1
            if lp_calls > lp_gate:
                raise SizeGateExceeded(f"LP-call gate {lp_gate} exceeded")
            witness = solver.solve(parts)
            if witness is not None:
                found = (parts, witness)
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pending = []
            exhausted = False
            while True:
                while not exhausted and len(pending) < workers * 2:
                    chunk = list(islice(stream, SEARCH_CHUNK))
                    if not chunk:
                        exhausted = True
                        break
                    pending.append(
                        (len(chunk), pool.submit(_evaluate_chunk, chunk,
                                                 solver)))
                if not pending:
                    break
                size, fut = pending.pop(0)
                hit = fut.result()
                if hit is not None:
                    k, parts, witness = hit
                    lp_calls += k + 1
                    if lp_calls > lp_gate:
                        raise SizeGateExceeded(
                            f"LP-call gate {lp_gate} exceeded")
                    found = (parts, witness)
                    break
                lp_calls += size
                if lp_calls > lp_gate:
                    raise SizeGateExceeded(f"LP-call gate {lp_gate} exceeded")

    if found is None:
        if guarantee:
            raise GuaranteeViolation(
                f"search exhausted although {guarantee} guarantees a tuple")
        return None
    parts, witness = found
    tup = TverbergTuple(r, parts, witness)
    tup.validate(config)
    if constraint is not None and not constraint.admits(parts):
        raise AssertionError("pruned stream emitted a violating candidate")
    return tup


def search_colored_tuple(config: PointConfig, r: int, *,
                         allowed: Optional[Sequence[int]] = None,
                         lp_gate: int = DEFAULT_LP_GATE,
                         workers: int = 1,
                         guarantee: Optional[str] = None
                         ) -> Optional[TverbergTuple]:
    """Rainbow-constrained search: at most one point per class per part."""
    if config.coloring is None:
        raise PreconditionError("a coloring is required")
    sizes = config.class_sizes()
    if any(s < r for s in sizes):
        raise PreconditionError(
            f"every class needs at least r={r} points, sizes {sizes}")
    constraint = SearchConstraint.rainbow(config.coloring)
    return search_tuple(config, r, constraint, allowed=allowed,
                        lp_gate=lp_gate, workers=workers, guarantee=guarantee)


# --------------------------------------------------------------------------
# two-tuple search

def _part_masks(parts) -> list[int]:
    out = []
    for p in parts:
        m = 0
        for i in p:
            m |= 1 << i
        out.append(m)
    return out


class _CellCheck:
    """Exact check of the cell condition for a pair of tuples."""

    def __init__(self, *, caps: Optional[dict[int, int]] = None,
                 coloring: Optional[Sequence[int]] = None,
                 family: Optional[SetFamily] = None):
        self.caps = caps
        self.family = family
        self.class_masks: Optional[list[int]] = None
        if caps is not None:
            ncls = max(coloring) + 1
            masks = [0] * ncls
            for i, c in enumerate(coloring):
                masks[c] |= 1 << i
            self.class_masks = masks
        self.member_masks = None
        if family is not None:
            self.member_masks = [_mask_of(m) for m in family.members]

    def admits(self, masks1: list[int], masks2: list[int]) -> bool:
        for m1 in masks1:
            for m2 in masks2:
                cell = m1 & m2
                if not cell:
                    continue
                if self.class_masks is not None:
                    for c, cm in enumerate(self.class_masks):
                        if (cell & cm).bit_count() > self.caps.get(c, 0):
                            return False
                if self.member_masks is not None:
                    for mm in self.member_masks:
                        if mm & cell == mm:
                            return False
        return True


def _mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def search_two_tuples(config: PointConfig, r: int, *,
                      family: Optional[SetFamily] = None,
                      certificate: Optional[ColoringCertificate] = None,
                      cell_caps: Optional[dict[int, int]] = None,
                      coloring: Optional[Sequence[int]] = None,
                      allowed: Optional[Sequence[int]] = None,
                      seed: int = 0,
                      tuple_gate: int = DEFAULT_TUPLE_GATE,
                      pair_gate: int = DEFAULT_PAIR_GATE,
                      time_budget: Optional[float] = None,
                      workers: int = 1
                      ) -> Optional[tuple[TverbergTuple, TverbergTuple]]:
    """Two individually proper tuples jointly satisfying a cell condition.

    Cell condition: either no family member inside any Ver-intersection
    I_i ∩ J_j (family mode, certified for the r^2-uniform Kneser
    hypergraph), or per-class caps on every cell (caps mode).  Exhaustive
    pair enumeration under the gates, then seeded randomized restarts;
    an emitted pair is always exactly verified, exhaustion returns None,
    and running out of budget in best-effort mode raises SearchTimeout.
    """
    if r < 3 or r % 2 == 0 or any(r % f == 0 for f in range(3, r, 2)):
        raise PreconditionError("r must be an odd prime")
    if family is not None:
        if certificate is None:
            raise PreconditionError(
                "family mode needs a chromatic certificate")
        if certificate.family != family or certificate.r != r * r:
            raise PreconditionError(
                "certificate must cover this family for r^2")
        ok, bad = verify_certificate(certificate)
        if not ok:
            raise PreconditionError(f"invalid certificate: {bad}")
        m = certificate.num_classes
        check = _CellCheck(family=family)
    elif cell_caps is not None:
        if coloring is None:
            raise PreconditionError("caps mode needs the coloring")
        m = max(coloring) + 1
        check = _CellCheck(caps=cell_caps, coloring=coloring)
    else:
        raise PreconditionError("either a family or cell caps are required")
    eligible, digits = m_eligible(m, r)
    if not eligible:
        raise PreconditionError(
            f"m={m} fails the digit condition: base-{r} digits {digits}")

    real = realify_if_needed(config)
    solver = ExactWeightSolver(real.points)
    cara = real.dim + 1  # restricting part sizes preserves pair existence
    indices = list(range(config.n)) if allowed is None else sorted(allowed)

    collected: list[TverbergTuple] = []
    exhaustive = True
    stream = _candidate_stream(indices, r, True, None, cara)
    for parts in stream:
        witness = solver.solve(parts)
        if witness is not None:
            collected.append(TverbergTuple(r, parts, witness))
            if len(collected) >= tuple_gate:
                exhaustive = False
                break
    masks = [_part_masks(t.parts) for t in collected]

    pairs_seen = 0
    gated = not exhaustive
    k = len(collected)
    for i in range(k):
        if gated:
            break
        mi = masks[i]
        for j in range(k):
            pairs_seen += 1
            if pairs_seen > pair_gate:
                gated = True
                break
            if check.admits(mi, masks[j]):
                pair = (collected[i], collected[j])
                _validate_pair(pair, config, check)
                return pair
    if not gated:
        return None
    if not collected:
        raise SearchTimeout("no individually proper tuples were found")

    # best-effort: seeded random pair sampling until the budget runs out
    if time_budget is None:
        time_budget = 60.0
    rng = random.Random(seed)
    deadline = time.monotonic() + time_budget
    while time.monotonic() < deadline:
        for _ in range(256):
            i = rng.randrange(k)
            j = rng.randrange(k)
            if check.admits(masks[i], masks[j]):
                pair = (collected[i], collected[j])
                _validate_pair(pair, config, check)
                return pair
    raise SearchTimeout("two-tuple search budget exhausted")


def _validate_pair(pair, config, check) -> None:
    for t in pair:
        t.validate(config)
    if not check.admits(_part_masks(pair[0].parts),
                        _part_masks(pair[1].parts)):
        raise AssertionError("emitted pair fails its cell condition")
