"""Canonical labeling of finite relational structures.

Refinement-based canonical search: color refinement generalized to
arbitrary-arity relations, then individualization on the first
non-singleton cell.  Among all discrete labelings reached, the one whose
relabeled table encoding is lexicographically least wins (ties on the
encoding are broken by the lexicographically least permutation), so the
output is reproducible bit for bit and equal across isomorphic inputs.

Not meant to compete with specialized graph-isomorphism tools; structures
here are small and correctness plus determinism come first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .structures import FinStructure


@dataclass(frozen=True)
class CanonicalForm:
    structure: FinStructure
    relabel: tuple[int, ...]  # old index -> new index


def _refine(s: FinStructure, colors: tuple[int, ...]) -> tuple[int, ...]:
    """Iterate relational color refinement to a fixpoint.

    The signature of a point collects, per relation symbol, the colors of
    every tuple it appears in together with its positions in that tuple.
    Colors are re-ranked by sorted signature, so the result is independent
    of the input labeling.
    """
    n = s.size
    while True:
        sigs = []
        for v in range(n):
            per_point = []
            for si, table in enumerate(s.tables):
                for t in table:
                    if v in t:
                        positions = tuple(i for i, x in enumerate(t) if x == v)
                        per_point.append((si, tuple(colors[x] for x in t), positions))
            sigs.append((colors[v], tuple(sorted(per_point))))
        ranking = {sig: i for i, sig in enumerate(sorted(set(sigs)))}
        new = tuple(ranking[sig] for sig in sigs)
        if new == colors:
            return new
        colors = new


def _cells(colors: tuple[int, ...]) -> list[list[int]]:
    out: dict[int, list[int]] = {}
    for v, c in enumerate(colors):
        out.setdefault(c, []).append(v)
    return [out[c] for c in sorted(out)]


def _encode(s: FinStructure, perm: tuple[int, ...]):
    return tuple(
        tuple(sorted(tuple(perm[x] for x in t) for t in table))
        for table in s.tables
    )


@lru_cache(maxsize=None)
def canonical_form(s: FinStructure) -> CanonicalForm:
    """Canonical representative of the isomorphism class of s.

    canonical_form(s1).structure == canonical_form(s2).structure iff
    s1 and s2 are isomorphic; the relabel permutation witnesses
    s.relabel(relabel) == structure.  Idempotent.
    """
    n = s.size
    if n == 0:
        return CanonicalForm(s, ())

    best: list = [None, None]  # encoding, perm

    def consider(colors: tuple[int, ...]):
        # Discrete partition: point v goes to position colors[v].
        perm = colors
        enc = _encode(s, perm)
        key = (enc, perm)
        if best[0] is None or key < (best[0], best[1]):
            best[0], best[1] = enc, perm

    def search(colors: tuple[int, ...]):
        cells = _cells(colors)
        target = next((cell for cell in cells if len(cell) > 1), None)
        if target is None:
            consider(colors)
            return
        for v in target:
            # Individualize v: split it off below the rest of its cell.
            split = tuple(
                2 * c if (x != v) else 2 * c - 1
                for x, c in enumerate(colors)
            )
            ranking = {c: i for i, c in enumerate(sorted(set(split)))}
            search(_refine(s, tuple(ranking[c] for c in split)))

    search(_refine(s, (0,) * n))
    canon = FinStructure(s.sig, n, best[0])
    return CanonicalForm(canon, best[1])


def canonical_key(s: FinStructure):
    """Hashable total invariant: equal iff isomorphic (same signature)."""
    c = canonical_form(s).structure
    return (s.sig, s.size, c.tables)


def is_isomorphic(a: FinStructure, b: FinStructure) -> bool:
    if a.sig != b.sig or a.size != b.size:
        return False
    return canonical_form(a).structure == canonical_form(b).structure
