"""Independent brute-force implementations used as test oracles.

Everything here is written from the metric definitions with plain Python
loops and lookup tables, deliberately sharing no code with the package, so
agreement is evidence of correctness rather than of shared bugs.
"""

from __future__ import annotations

import math


def phi(pc: int) -> list[float]:
    """Tonal-centroid basis vector for one pitch class (lookup-table style)."""
    r1, r2, r3 = 1.0, 1.0, 0.5
    return [
        r1 * math.sin(pc * 7.0 * math.pi / 6.0),
        r1 * math.cos(pc * 7.0 * math.pi / 6.0),
        r2 * math.sin(pc * 3.0 * math.pi / 2.0),
        r2 * math.cos(pc * 3.0 * math.pi / 2.0),
        r3 * math.sin(pc * 2.0 * math.pi / 3.0),
        r3 * math.cos(pc * 2.0 * math.pi / 3.0),
    ]


def centroid_of_pcs(pcs: set[int]) -> list[float]:
    total = [0.0] * 6
    for pc in pcs:
        for i, v in enumerate(phi(pc)):
            total[i] += v
    return [v / len(pcs) for v in total]


def euclid(a: list[float], b: list[float]) -> float:
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def brute_che(chords: list[int], durations: list[float]) -> float:
    weights: dict[int, float] = {}
    for c, d in zip(chords, durations):
        if c == 0:
            continue
        weights[c] = weights.get(c, 0.0) + d
    total = sum(weights.values())
    if total == 0:
        return 0.0
    entropy = 0.0
    for w in weights.values():
        entropy -= (w / total) * math.log(w / total)
    return entropy


def brute_cc(chords: list[int]) -> int:
    return len({c for c in chords if c != 0})


def brute_ctd(chords: list[int], chroma_of: dict[int, set[int]]) -> float:
    usable = [c for c in chords if c != 0]
    if len(usable) < 2:
        raise ValueError("need two usable chords")
    distances = []
    for a, b in zip(usable[:-1], usable[1:]):
        distances.append(euclid(centroid_of_pcs(chroma_of[a]), centroid_of_pcs(chroma_of[b])))
    return sum(distances) / len(distances)


def brute_ctnctr(
    melody: list[list[int]], chords: list[int], chroma_of: dict[int, set[int]]
) -> float:
    n_c = n_n = n_p = 0
    t_count = len(chords)
    for t in range(t_count):
        if chords[t] == 0:
            continue
        chord_pcs = chroma_of[chords[t]]
        pcs = [pc for pc in range(12) if melody[t][pc]]
        next_pcs: list[int] = []
        for t2 in range(t + 1, t_count):
            next_pcs = [pc for pc in range(12) if melody[t2][pc]]
            if next_pcs:
                break
        for pc in pcs:
            if pc in chord_pcs:
                n_c += 1
            else:
                n_n += 1
                if next_pcs:
                    step = min(min((pc - q) % 12, (q - pc) % 12) for q in next_pcs)
                    if step <= 2:
                        n_p += 1
    if n_c + n_n == 0:
        return 1.0
    return (n_c + n_p) / (n_c + n_n)


def brute_pcs(
    melody: list[list[int]],
    chords: list[int],
    chroma_of: dict[int, set[int]],
    durations: list[float],
) -> float:
    num = den = 0.0
    for t in range(len(chords)):
        if chords[t] == 0:
            continue
        for m in [pc for pc in range(12) if melody[t][pc]]:
            for c in sorted(chroma_of[chords[t]]):
                interval = (m - c) % 12
                if interval in (0, 3, 4, 7, 8, 9):
                    score = 1
                elif interval == 5:
                    score = 0
                else:
                    score = -1
                num += durations[t] * score
                den += durations[t]
    if den == 0:
        raise ValueError("nothing to score")
    return num / den


def brute_mctd(
    melody: list[list[int]],
    chords: list[int],
    chroma_of: dict[int, set[int]],
    durations: list[float],
) -> float:
    num = den = 0.0
    for t in range(len(chords)):
        if chords[t] == 0 or not chroma_of[chords[t]]:
            continue
        chord_centroid = centroid_of_pcs(chroma_of[chords[t]])
        for m in [pc for pc in range(12) if melody[t][pc]]:
            num += durations[t] * euclid(centroid_of_pcs({m}), chord_centroid)
            den += durations[t]
    if den == 0:
        raise ValueError("no usable frames")
    return num / den


def brute_transition_counts(sequences: list[list[int]], n: int):
    counts = [[0] * n for _ in range(n)]
    initial = [0] * n
    for seq in sequences:
        if not seq:
            continue
        initial[seq[0]] += 1
        for a, b in zip(seq[:-1], seq[1:]):
            counts[a][b] += 1
    return counts, initial


def brute_surprise(
    sequences: list[list[int]], n: int, alpha: float, target: list[int]
) -> list[float]:
    counts, initial = brute_transition_counts(sequences, n)
    values = []
    init_total = sum(initial) + alpha * n
    values.append(-math.log((initial[target[0]] + alpha) / init_total))
    for a, b in zip(target[:-1], target[1:]):
        row_total = sum(counts[a]) + alpha * n
        values.append(-math.log((counts[a][b] + alpha) / row_total))
    return values
