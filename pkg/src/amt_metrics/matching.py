"""Maximum bipartite matching of target and output notes.

Two admissibility rules are supported:

* ``onset``: same pitch and onsets less than 50 ms apart;
* ``onset-offset``: as above, and offsets less than
  ``max(50 ms, 0.2 * target duration)`` apart.

Every comparison is strict.
"""
from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass

from .model import Note, NoteList

ONSET = "onset"
ONSET_OFFSET = "onset-offset"

ONSET_TOLERANCE = 0.050
OFFSET_RATIO = 0.2
OFFSET_MIN_TOLERANCE = 0.050


def admissible_onset_only(target: Note, output: Note,
                          onset_tolerance: float = ONSET_TOLERANCE) -> bool:
    return abs(output.onset - target.onset) < onset_tolerance and output.pitch == target.pitch


def admissible_onset_offset(target: Note, output: Note,
                            onset_tolerance: float = ONSET_TOLERANCE,
                            offset_ratio: float = OFFSET_RATIO,
                            offset_min_tolerance: float = OFFSET_MIN_TOLERANCE) -> bool:
    if not admissible_onset_only(target, output, onset_tolerance):
        return False
    tolerance = max(offset_min_tolerance, offset_ratio * (target.offset - target.onset))
    return abs(output.offset - target.offset) < tolerance


@dataclass(frozen=True)
class Matching:
    """A set of ``(target_index, output_index)`` pairs.

    ``n_targets``/``n_outputs`` are the sizes of the matched lists, so that
    unmatched notes (false negatives and false positives) can be listed.
    """

    pairs: tuple
    criterion: str
    n_targets: int
    n_outputs: int

    def __len__(self):
        return len(self.pairs)

    @property
    def matched_targets(self) -> frozenset:
        return frozenset(t for t, _ in self.pairs)

    @property
    def matched_outputs(self) -> frozenset:
        return frozenset(o for _, o in self.pairs)

    @property
    def false_negatives(self) -> list:
        matched = self.matched_targets
        return [i for i in range(self.n_targets) if i not in matched]

    @property
    def false_positives(self) -> list:
        matched = self.matched_outputs
        return [j for j in range(self.n_outputs) if j not in matched]


def candidate_graph(targets: NoteList, outputs: NoteList, criterion: str = ONSET,
                    onset_tolerance: float = ONSET_TOLERANCE,
                    offset_ratio: float = OFFSET_RATIO,
                    offset_min_tolerance: float = OFFSET_MIN_TOLERANCE) -> list:
    """Admissible output indices per target, nearest onset first."""
    if criterion == ONSET:
        def ok(t, o):
            return admissible_onset_only(t, o, onset_tolerance)
    elif criterion == ONSET_OFFSET:
        def ok(t, o):
            return admissible_onset_offset(t, o, onset_tolerance, offset_ratio,
                                           offset_min_tolerance)
    else:
        raise ValueError(f"unknown matching criterion {criterion!r}")

    by_pitch: dict = {}
    for j, o in enumerate(outputs.notes):
        by_pitch.setdefault(o.pitch, ([], []))
        by_pitch[o.pitch][0].append(o.onset)
        by_pitch[o.pitch][1].append(j)

    graph = []
    for t in targets.notes:
        edges = []
        if t.pitch in by_pitch:
            onsets, idx = by_pitch[t.pitch]
            lo = bisect.bisect_left(onsets, t.onset - onset_tolerance)
            hi = bisect.bisect_right(onsets, t.onset + onset_tolerance)
            for k in range(lo, hi):
                o = outputs.notes[idx[k]]
                if ok(t, o):
                    edges.append((abs(o.onset - t.onset), idx[k]))
        edges.sort()
        graph.append([j for _, j in edges])
    return graph


def hopcroft_karp(graph: list, n_right: int) -> list:
    """Maximum matching on a bipartite graph given as left adjacency lists.

    Returns ``match_left`` where ``match_left[u]`` is the right vertex paired
    with ``u`` or -1.  Left vertices and adjacency lists are visited in the
    given order, which makes the result deterministic.
    """
    n_left = len(graph)
    match_left = [-1] * n_left
    match_right = [-1] * n_right
    inf = n_left + 1

    while True:
        dist = [inf] * n_left
        queue = deque()
        for u in range(n_left):
            if match_left[u] == -1:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in graph[u]:
                w = match_right[v]
                if w == -1:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            return match_left

        # Iterative layered DFS from every free left vertex.
        pointer = [0] * n_left
        for root in range(n_left):
            if match_left[root] != -1:
                continue
            stack = [root]
            while stack:
                u = stack[-1]
                advanced = False
                while pointer[u] < len(graph[u]):
                    v = graph[u][pointer[u]]
                    pointer[u] += 1
                    w = match_right[v]
                    if w == -1:
                        # augment along the stack
                        for depth in range(len(stack) - 1, -1, -1):
                            uu = stack[depth]
                            vv = graph[uu][pointer[uu] - 1]
                            match_right[vv] = uu
                            match_left[uu] = vv
                        stack = []
                        advanced = True
                        break
                    if dist[w] == dist[u] + 1:
                        stack.append(w)
                        advanced = True
                        break
                if not advanced:
                    dist[u] = inf
                    stack.pop()


def max_match(targets: NoteList, outputs: NoteList, criterion: str = ONSET,
              **tolerances) -> Matching:
    """Maximum-cardinality matching between target and output notes.

    Targets are processed in ``(onset, pitch)`` order and candidates by
    increasing onset distance, so the reported pairs are reproducible.
    """
    graph = candidate_graph(targets, outputs, criterion, **tolerances)
    match_left = hopcroft_karp(graph, len(outputs))
    pairs = tuple((i, j) for i, j in enumerate(match_left) if j != -1)
    return Matching(pairs, criterion, len(targets), len(outputs))
