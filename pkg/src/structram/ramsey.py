"""Arrow relations and Ramsey degrees by adversarial-coloring search.

The arrow relation holds iff no "bad" coloring exists, where a bad
coloring makes every copy of the middle structure see too many colors on
its small-structure copies.  We decide the complement problem: a
backtracking search over color assignments with per-copy propagation and
lex-leader symmetry pruning under the automorphisms of the large
structure.  Verdicts carry re-checkable certificates: a No comes with the
lexicographically least bad coloring, and small Yes instances are
cross-validated against an independent exhaustive oracle.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from .fraisse import Chain, ClassSpec
from .structures import (
    Embedding,
    FinStructure,
    automorphisms,
    compose,
    emb_list,
    induced_substructure,
)


class RamseyInstanceError(ValueError):
    """Violated arrow-instance precondition (A <= B <= C, colors, sizes)."""


@dataclass(frozen=True)
class Coloring:
    """A total coloring of the embeddings of a into c, stored densely in
    canonical embedding order."""

    a: FinStructure
    c: FinStructure
    r: int
    colors: tuple[int, ...]

    def __post_init__(self):
        if self.r < 0:
            raise RamseyInstanceError("negative color count")
        if len(self.colors) != len(emb_list(self.a, self.c)):
            raise RamseyInstanceError(
                f"coloring length {len(self.colors)} does not match "
                f"|Emb(A,C)| = {len(emb_list(self.a, self.c))}"
            )
        if any(not (0 <= x < self.r) for x in self.colors):
            raise RamseyInstanceError("color out of range")

    @property
    def domain(self) -> tuple[Embedding, ...]:
        return emb_list(self.a, self.c)


@dataclass(frozen=True)
class JointColoring:
    """Simultaneous colorings, one per tuple family, over a common target.

    Block i colors the embeddings of family i's support structure into c,
    in canonical order; blocks are concatenated in family order.
    """

    supports: tuple[FinStructure, ...]
    c: FinStructure
    r: int
    colors: tuple[int, ...]

    def __post_init__(self):
        want = sum(len(emb_list(a, self.c)) for a in self.supports)
        if len(self.colors) != want:
            raise RamseyInstanceError("joint coloring length mismatch")
        if any(not (0 <= x < self.r) for x in self.colors):
            raise RamseyInstanceError("color out of range")

    def block(self, i: int) -> Coloring:
        start = sum(len(emb_list(a, self.c)) for a in self.supports[:i])
        width = len(emb_list(self.supports[i], self.c))
        return Coloring(self.supports[i], self.c, self.r, self.colors[start : start + width])


@dataclass(frozen=True)
class SearchStats:
    nodes: int
    elapsed: float


@dataclass(frozen=True)
class ArrowVerdict:
    kind: str  # "yes" | "no" | "unknown"
    bad_coloring: Coloring | JointColoring | None = None
    good_copy: Embedding | None = None
    stats: SearchStats | None = field(default=None, compare=False)


@dataclass(frozen=True)
class DegreeBounds:
    max_b: int
    max_r: int
    max_c: int


@dataclass(frozen=True)
class DegreeVerdict:
    """Least k that worked for every (B, r) within the bounds.

    `k` means "at most k at these bounds, at least k at these bounds":
    larger structures could still lower nothing and raise nothing here;
    no claim beyond the bounds is made.
    """

    k: int
    bounds: DegreeBounds
    evidence_upper: tuple  # ((b, r, c_witness), ...)
    evidence_lower: tuple  # ((b, r, ((c, bad_coloring), ...)),) for k-1, empty when k == 1


# --- instance compilation ---------------------------------------------------


def _copy_constraints(
    c: FinStructure, b: FinStructure, families: list[tuple[FinStructure, int]]
) -> tuple[list[int], int, list[list[tuple[tuple[int, ...], int]]]]:
    """Compile the per-copy constraint table.

    Returns (offsets, total, constraints) where offsets[i] is the start of
    family i's variable block (variables = colors of Emb(a_i, c) in
    canonical order) and constraints has, per copy g in Emb(b, c), a list
    of (global slot indices, k) pairs, one per family.  Identical
    constraint rows are collapsed; they constrain colorings identically.
    """
    offsets: list[int] = []
    total = 0
    fam_index: list[dict[tuple[int, ...], int]] = []
    for a, _ in families:
        offsets.append(total)
        embs = emb_list(a, c)
        fam_index.append({e.map: i for i, e in enumerate(embs)})
        total += len(embs)
    rows: list[list[tuple[tuple[int, ...], int]]] = []
    seen = set()
    for g in emb_list(b, c):
        row = []
        for fi, (a, k) in enumerate(families):
            slots = tuple(
                offsets[fi] + fam_index[fi][compose(g, e).map] for e in emb_list(a, b)
            )
            row.append((slots, k))
        key = tuple(row)
        if key not in seen:
            seen.add(key)
            rows.append(row)
    return offsets, total, rows


def _symmetry_perms(
    c: FinStructure, families: list[tuple[FinStructure, int]], offsets: list[int], total: int
) -> list[tuple[int, ...]]:
    """Variable permutations induced by the automorphisms of c.

    Sound for pruning: each automorphism permutes the copies of every
    family and the copies of b compatibly, so it maps bad colorings to bad
    colorings.
    """
    perms = []
    for sigma in automorphisms(c):
        if sigma.map == tuple(range(c.size)):
            continue
        perm = [0] * total
        for fi, (a, _) in enumerate(families):
            embs = emb_list(a, c)
            index = {e.map: i for i, e in enumerate(embs)}
            for i, e in enumerate(embs):
                perm[offsets[fi] + i] = offsets[fi] + index[compose(sigma, e).map]
        perms.append(tuple(perm))
    return perms


class _BadColoringSearch:
    """DFS for a coloring under which every copy row has some family
    exceeding its color budget k (seeing at least k+1 distinct colors)."""

    def __init__(self, total: int, r: int, rows, perms):
        self.total = total
        self.r = r
        self.rows = rows
        self.perms = perms
        self.full = (1 << r) - 1
        # var -> list of (row index, family position) memberships
        self.members: list[list[tuple[int, int]]] = [[] for _ in range(total)]
        for ri, row in enumerate(rows):
            for fp, (slots, _) in enumerate(row):
                for v in slots:
                    self.members[v].append((ri, fp))
        self.nodes = 0

    def _row_state(self, row, assignment):
        """Per family: (distinct-color mask, unassigned slot list)."""
        out = []
        for slots, k in row:
            mask = 0
            unassigned = []
            for v in slots:
                col = assignment[v]
                if col < 0:
                    unassigned.append(v)
                else:
                    mask |= 1 << col
            out.append((mask, unassigned, k))
        return out

    def _consistent(self, assignment, domains) -> bool:
        """Prune rows that can no longer exceed any budget; tighten domains
        on rows where exactly one family can still exceed and only by
        taking fresh colors."""
        for row in self.rows:
            state = self._row_state(row, assignment)
            alive = []
            for mask, unassigned, k in state:
                if bin(mask).count("1") + len(unassigned) > k:
                    alive.append((mask, unassigned, k))
            if not alive:
                return False
            if len(alive) == 1:
                mask, unassigned, k = alive[0]
                if unassigned and bin(mask).count("1") + len(unassigned) == k + 1:
                    # Every remaining slot must bring a brand-new color.
                    for v in unassigned:
                        domains[v] &= ~mask
                        if domains[v] == 0:
                            return False
        return True

    def _lex_ok(self, assignment) -> bool:
        """Partial lex-leader check: reject assignments already strictly
        greater than one of their symmetric images."""
        for perm in self.perms:
            for i in range(self.total):
                x = assignment[i]
                if x < 0:
                    break
                y = assignment[perm[i]]
                if y < 0:
                    break
                if x < y:
                    break
                if x > y:
                    return False
        return True

    def search(self, use_symmetry: bool = True, collect: list | None = None, limit: int | None = None):
        """First (lexicographically least) bad coloring, or None.

        With `collect`, gathers all bad colorings in lex order instead
        (symmetry pruning disabled by the caller in that case) up to
        `limit`.
        """
        assignment = [-1] * self.total
        domains = [self.full] * self.total

        def rec(pos: int, domains: list[int]):
            self.nodes += 1
            if pos == self.total:
                found = tuple(assignment)
                if collect is None:
                    return found
                collect.append(found)
                if limit is not None and len(collect) >= limit:
                    return found
                return None
            for color in range(self.r):
                if not (domains[pos] >> color) & 1:
                    continue
                assignment[pos] = color
                child = list(domains)
                ok = self._consistent(assignment, child)
                if ok and use_symmetry and not self._lex_ok(assignment):
                    ok = False
                if ok:
                    hit = rec(pos + 1, child)
                    if hit is not None:
                        return hit
                assignment[pos] = -1
            return None

        return rec(0, domains)


def _check_instance(c: FinStructure, b: FinStructure, a: FinStructure, r: int, k: int = 1):
    if a.sig != b.sig or b.sig != c.sig:
        raise RamseyInstanceError("arrow instance across different signatures")
    if k < 1:
        raise RamseyInstanceError("color budget k must be at least 1")
    if r < 0:
        raise RamseyInstanceError("negative color count")
    if not emb_list(a, b):
        raise RamseyInstanceError("precondition A <= B fails (no embeddings)")
    if not emb_list(b, c):
        raise RamseyInstanceError("precondition B <= C fails (no embeddings)")
    if r == 0 and emb_list(a, c):
        raise RamseyInstanceError("r = 0 with a nonempty embedding set")


def degree_arrows(c: FinStructure, b: FinStructure, a: FinStructure, r: int, k: int) -> ArrowVerdict:
    """Yes iff every r-coloring of Emb(a, c) admits a copy of b whose
    a-copies carry at most k colors; No exhibits the lexicographically
    least bad coloring."""
    _check_instance(c, b, a, r, k)
    start = time.perf_counter()
    total = len(emb_list(a, c))
    if total == 0 or k >= r:
        # The only coloring is empty, or budgets can never be exceeded.
        return ArrowVerdict("yes", stats=SearchStats(0, time.perf_counter() - start))
    families = [(a, k)]
    offsets, total, rows = _copy_constraints(c, b, families)
    perms = _symmetry_perms(c, families, offsets, total)
    engine = _BadColoringSearch(total, r, rows, perms)
    hit = engine.search(use_symmetry=True)
    if hit is None:
        return ArrowVerdict("yes", stats=SearchStats(engine.nodes, time.perf_counter() - start))
    # The lex-least bad coloring is a lex-leader of its own orbit, so the
    # symmetry-pruned DFS in index order found exactly it.
    bad = Coloring(a, c, r, hit)
    return ArrowVerdict("no", bad_coloring=bad, stats=SearchStats(engine.nodes, time.perf_counter() - start))


def arrows(c: FinStructure, b: FinStructure, a: FinStructure, r: int) -> ArrowVerdict:
    """The arrow relation: every r-coloring of Emb(a, c) admits a copy of
    b monochromatic on its a-copies (budget k = 1)."""
    return degree_arrows(c, b, a, r, 1)


def good_copy(c: FinStructure, b: FinStructure, a: FinStructure, coloring: Coloring, k: int = 1) -> Embedding | None:
    """First copy of b (canonical order) whose a-copies carry at most k
    colors under the given coloring; None if the coloring is bad."""
    _check_instance(c, b, a, coloring.r, k)
    if coloring.a != a or coloring.c != c:
        raise RamseyInstanceError("coloring does not match the instance")
    index = {e.map: i for i, e in enumerate(emb_list(a, c))}
    for g in emb_list(b, c):
        seen = {coloring.colors[index[compose(g, e).map]] for e in emb_list(a, b)}
        if len(seen) <= k:
            return g
    return None


def is_bad_coloring(c: FinStructure, b: FinStructure, a: FinStructure, coloring: Coloring, k: int = 1) -> bool:
    """Re-check a bad-coloring certificate: every copy of b must see at
    least k+1 colors on its a-copies.  Independent of the search engine."""
    return good_copy(c, b, a, coloring, k) is None


# --- independent exhaustive oracle ------------------------------------------


def exhaustive_arrows(
    c: FinStructure, b: FinStructure, a: FinStructure, r: int, k: int = 1, guard: int = 1 << 22
) -> ArrowVerdict:
    """Decide the arrow relation by full enumeration of all r^|Emb(a,c)|
    colorings.  No propagation, no symmetry: the cross-validation oracle."""
    _check_instance(c, b, a, r, k)
    embs_a = emb_list(a, c)
    m = len(embs_a)
    if m == 0 or k >= r:
        return ArrowVerdict("yes", stats=SearchStats(0, 0.0))
    if r**m > guard:
        raise RamseyInstanceError(f"exhaustion guard exceeded: {r}^{m} colorings")
    index = {e.map: i for i, e in enumerate(embs_a)}
    copy_slots = [
        [index[compose(g, e).map] for e in emb_list(a, b)] for g in emb_list(b, c)
    ]
    nodes = 0
    start = time.perf_counter()
    for colors in itertools.product(range(r), repeat=m):
        nodes += 1
        if all(len({colors[s] for s in slots}) > k for slots in copy_slots):
            bad = Coloring(a, c, r, colors)
            return ArrowVerdict("no", bad_coloring=bad, stats=SearchStats(nodes, time.perf_counter() - start))
    return ArrowVerdict("yes", stats=SearchStats(nodes, time.perf_counter() - start))


def enumerate_bad_colorings(
    c: FinStructure, b: FinStructure, a: FinStructure, r: int, k: int = 1, limit: int | None = None
) -> list[Coloring]:
    """All bad colorings in lexicographic order (symmetry breaking off)."""
    _check_instance(c, b, a, r, k)
    total = len(emb_list(a, c))
    if total == 0 or k >= r:
        return []
    families = [(a, k)]
    _, total, rows = _copy_constraints(c, b, families)
    engine = _BadColoringSearch(total, r, rows, [])
    found: list[tuple[int, ...]] = []
    engine.search(use_symmetry=False, collect=found, limit=limit)
    return [Coloring(a, c, r, colors) for colors in found]


# --- class-level scans -------------------------------------------------------


@dataclass(frozen=True)
class WitnessVerdict:
    kind: str  # "yes" | "unknown"
    c: FinStructure | None
    verdict: ArrowVerdict | None
    size_bound: int
    largest_refuted: tuple[FinStructure, Coloring] | None = None


def find_ramsey_witness(
    k: ClassSpec, a: FinStructure, b: FinStructure, r: int, size_bound: int
) -> WitnessVerdict:
    """Scan class members by size and canonical order for the first C with
    arrows(C, b, a, r) = Yes.  Exhausting the bound yields Unknown, never
    a refutation: the class may simply need a larger witness."""
    if not emb_list(a, b):
        raise RamseyInstanceError("precondition A <= B fails (no embeddings)")
    largest = None
    for n in range(b.size, size_bound + 1):
        for c in k.members(n):
            if not emb_list(b, c):
                continue
            v = arrows(c, b, a, r)
            if v.kind == "yes":
                return WitnessVerdict("yes", c, v, size_bound)
            largest = (c, v.bad_coloring)
    return WitnessVerdict("unknown", None, None, size_bound, largest)


def compute_degree(
    k: ClassSpec, a: FinStructure, abar: tuple[int, ...], bounds: DegreeBounds
) -> DegreeVerdict:
    """Least color budget that succeeded for every middle structure and
    color count within the bounds.

    The tuple abar (repetitions allowed) is reduced to the structure
    induced on its distinct coordinates: copies of the tuple correspond
    to embeddings of that structure.  Budgets at most max_r always
    terminate the loop, since a budget of r colors can never be exceeded
    by an r-coloring.
    """
    support, _ = induced_substructure(a, set(abar))
    if not k.contains(support):
        raise RamseyInstanceError("the tuple does not enumerate a member of the class")
    bs = [
        m
        for n in range(max(support.size, 1), bounds.max_b + 1)
        for m in k.members(n)
        if emb_list(support, m)
    ]
    previous_failure = None
    for budget in range(1, bounds.max_r + 1):
        upper = []
        lower = None
        for b in bs:
            for r in range(1, bounds.max_r + 1):
                witness = None
                refutations = []
                for n in range(b.size, bounds.max_c + 1):
                    for c in k.members(n):
                        if not emb_list(b, c):
                            continue
                        v = degree_arrows(c, b, support, r, budget)
                        if v.kind == "yes":
                            witness = c
                            break
                        refutations.append((c, v.bad_coloring))
                    if witness is not None:
                        break
                if witness is None:
                    lower = (b, r, tuple(refutations))
                    break
                upper.append((b, r, witness))
            if lower is not None:
                break
        if lower is None:
            evidence_lower = (previous_failure,) if previous_failure is not None else ()
            return DegreeVerdict(budget, bounds, tuple(upper), evidence_lower)
        previous_failure = lower
    raise AssertionError("unreachable: budget max_r always succeeds")


def joint_degree_witness(
    k: ClassSpec,
    a_set: FinStructure,
    b: FinStructure,
    r: int,
    degrees: list[tuple[tuple[int, ...], int]],
    size_bound: int,
    recheck_guard: int = 1 << 20,
) -> WitnessVerdict:
    """One C making every family of simultaneous colorings balanceable on
    a single copy of b: each tuple family stays within its color budget.

    Found by the iterated witness search (resolve the last family over b,
    then the next family over that witness, and so on), then re-checked as
    one joint constraint system.
    """
    families = []
    for abar, budget in degrees:
        support, _ = induced_substructure(a_set, set(abar))
        families.append((support, budget))
    if not families:
        return WitnessVerdict("yes", b, ArrowVerdict("yes"), size_bound)
    current = b
    for support, budget in reversed(families):
        if not emb_list(support, current):
            raise RamseyInstanceError("a tuple family does not embed into the middle structure")
        found = None
        for n in range(current.size, size_bound + 1):
            for c in k.members(n):
                if not emb_list(current, c):
                    continue
                if degree_arrows(c, current, support, r, budget).kind == "yes":
                    found = c
                    break
            if found is not None:
                break
        if found is None:
            return WitnessVerdict("unknown", None, None, size_bound)
        current = found
    verdict = joint_degree_arrows(current, b, families, r, recheck_guard)
    if verdict.kind != "yes":
        # The iterated construction guarantees a witness; a failed re-check
        # would mean the single-family witnesses were wrong.
        return WitnessVerdict("unknown", None, verdict, size_bound)
    return WitnessVerdict("yes", current, verdict, size_bound)


def joint_degree_arrows(
    c: FinStructure,
    b: FinStructure,
    families: list[tuple[FinStructure, int]],
    r: int,
    guard: int = 1 << 20,
) -> ArrowVerdict:
    """Decide the joint arrow: for all simultaneous colorings (one per
    family) some copy of b keeps every family within its budget.  Searches
    for a joint bad coloring with the same engine as the single-family
    case; the constraint per copy is a disjunction over families."""
    start = time.perf_counter()
    for support, budget in families:
        _check_instance(c, b, support, r, budget)
    offsets, total, rows = _copy_constraints(c, b, families)
    if total == 0 or all(budget >= r for _, budget in families):
        return ArrowVerdict("yes", stats=SearchStats(0, time.perf_counter() - start))
    if r**total > guard:
        return ArrowVerdict("unknown", stats=SearchStats(0, time.perf_counter() - start))
    perms = _symmetry_perms(c, families, offsets, total)
    engine = _BadColoringSearch(total, r, rows, perms)
    hit = engine.search(use_symmetry=True)
    elapsed = time.perf_counter() - start
    if hit is None:
        return ArrowVerdict("yes", stats=SearchStats(engine.nodes, elapsed))
    joint = JointColoring(tuple(a for a, _ in families), c, r, hit)
    return ArrowVerdict("no", bad_coloring=joint, stats=SearchStats(engine.nodes, elapsed))


# --- coherent bad-coloring threads -------------------------------------------


def extend_bad_colorings(
    chain: Chain, a: FinStructure, b: FinStructure, r: int, k: int = 1, limit: int = 1 << 16
) -> list[Coloring]:
    """A coherent thread of bad colorings along a chain of structures:
    stage i+1's coloring restricts to stage i's along the inclusion.

    The inverse system here is finite with total restriction maps, so the
    lexicographically least thread is the one induced by the top coloring
    minimizing the tuple of its successive restrictions.  Raises if some
    stage has no bad colorings.
    """
    stages = chain.stages
    bad_sets = []
    for c in stages:
        bads = enumerate_bad_colorings(c, b, a, r, k, limit=limit)
        if not bads:
            raise RamseyInstanceError(
                f"stage of size {c.size} has an empty bad set; precondition fails"
            )
        bad_sets.append(bads)

    restrictions = []  # restrictions[i]: index map Emb(a, C_i) -> Emb(a, C_{i+1})
    for i in range(len(stages) - 1):
        inc = chain.inclusions[i]
        target = {e.map: j for j, e in enumerate(emb_list(a, stages[i + 1]))}
        restrictions.append([target[compose(inc, e).map] for e in emb_list(a, stages[i])])

    def restrict(colors: tuple[int, ...], level: int) -> tuple[int, ...]:
        # Restriction of a level+1 coloring to level.
        idx = restrictions[level]
        return tuple(colors[j] for j in idx)

    # Restrictions of bad colorings are bad (a monochromatic copy downstairs
    # would be one upstairs); verify as a stated precondition.
    for i in range(len(stages) - 1):
        lower = {col.colors for col in bad_sets[i]}
        for upper in bad_sets[i + 1]:
            if restrict(upper.colors, i) not in lower:
                raise RamseyInstanceError(
                    "restriction of a bad coloring is not bad: inconsistent chain"
                )

    def thread_of(top: tuple[int, ...]) -> list[tuple[int, ...]]:
        out = [top]
        for level in range(len(stages) - 2, -1, -1):
            out.append(restrict(out[-1], level))
        return list(reversed(out))

    best = min((thread_of(col.colors) for col in bad_sets[-1]), key=tuple)
    return [Coloring(a, stages[i], r, colors) for i, colors in enumerate(best)]
