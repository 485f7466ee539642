"""Amalgamation-class checks at a size bound and limit approximants.

Verdicts are always bound-relative: "holds up to the bound" is the
strongest claim any finite sweep can make, and failures come with a
concrete counterexample that re-checks.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .structures import (
    Embedding,
    FinStructure,
    StructureError,
    compose,
    enumerate_embeddings,
    induced_substructure,
    one_point_extensions,
    structure,
)


class ClassSpecError(ValueError):
    """Missing generator, failed spot-check, or inconsistent class data."""


@dataclass
class ClassSpec:
    """A class of finite structures with decidable membership.

    `generator(n)` must yield all members of size n up to isomorphism
    (canonical representatives, canonical order); it is required by the
    quantifier sweeps but not by single-instance checks.
    """

    name: str
    sig: object
    membership: Callable[[FinStructure], bool]
    size_bound: int
    generator: Optional[Callable[[int], list[FinStructure]]] = None

    def contains(self, s: FinStructure) -> bool:
        return bool(self.membership(s))

    def members(self, n: int) -> list[FinStructure]:
        if self.generator is None:
            raise ClassSpecError(f"class {self.name!r} has no generator")
        return list(self.generator(n))

    def members_up_to(self, bound: int) -> list[FinStructure]:
        out = []
        for n in range(1, bound + 1):
            out.extend(self.members(n))
        return out

    def spot_check_iso_invariance(self, seed: int, trials: int = 32) -> None:
        """Membership predicates are trusted but must be iso-invariant;
        check on random relabelings of generated members and abort with
        the reproducible seed on violation."""
        if self.generator is None:
            return
        rng = random.Random(seed)
        pool = self.members_up_to(min(self.size_bound, 4))
        if not pool:
            return
        for _ in range(trials):
            s = rng.choice(pool)
            perm = list(s.points)
            rng.shuffle(perm)
            relabeled = s.relabel(tuple(perm))
            if self.membership(s) != self.membership(relabeled):
                raise ClassSpecError(
                    f"membership of class {self.name!r} is not iso-invariant "
                    f"(seed {seed}, size {s.size}, perm {tuple(perm)})"
                )


@dataclass(frozen=True)
class Chain:
    """Nested stages with inclusion embeddings stage[i] -> stage[i+1]."""

    stages: tuple[FinStructure, ...]
    inclusions: tuple[Embedding, ...]

    def __post_init__(self):
        if len(self.inclusions) != max(len(self.stages) - 1, 0):
            raise StructureError("chain inclusion count mismatch")
        for i, inc in enumerate(self.inclusions):
            if inc.src != self.stages[i] or inc.dst != self.stages[i + 1]:
                raise StructureError(f"inclusion {i} does not link consecutive stages")

    def inclusion_into_last(self, i: int) -> Embedding:
        from .structures import identity_embedding

        e = identity_embedding(self.stages[i])
        for inc in self.inclusions[i:]:
            e = compose(inc, e)
        return e


# --- axiom sweeps ---------------------------------------------------------

@dataclass(frozen=True)
class HpVerdict:
    holds: bool
    bound: int
    member: FinStructure | None = None
    subset: tuple[int, ...] | None = None


def check_hp(k: ClassSpec, bound: int | None = None) -> HpVerdict:
    """Every induced substructure of every member up to the bound must be
    a member; otherwise report the violating (member, subset)."""
    bound = k.size_bound if bound is None else bound
    for n in range(1, bound + 1):
        for m in k.members(n):
            for r in range(1, n):
                for subset in itertools.combinations(range(n), r):
                    sub, _ = induced_substructure(m, subset)
                    if not k.contains(sub):
                        return HpVerdict(False, bound, m, subset)
    return HpVerdict(True, bound)


@dataclass(frozen=True)
class JepVerdict:
    holds: bool
    bound: int
    search_bound: int
    stuck_pair: tuple[FinStructure, FinStructure] | None = None
    witnesses: dict = field(default_factory=dict, compare=False)


def check_jep(k: ClassSpec, bound: int | None = None, search_bound: int | None = None) -> JepVerdict:
    """For every pair of members up to the bound, find a joint embedding
    target among members up to the search bound."""
    bound = k.size_bound if bound is None else bound
    members = [m for n in range(1, bound + 1) for m in k.members(n)]
    sb = search_bound if search_bound is not None else 2 * bound
    witnesses = {}
    for i, a in enumerate(members):
        for j in range(i, len(members)):
            b = members[j]
            found = None
            for n in range(max(a.size, b.size), sb + 1):
                for c in k.members(n):
                    if enumerate_embeddings(a, c) and enumerate_embeddings(b, c):
                        found = c
                        break
                if found is not None:
                    break
            if found is None:
                return JepVerdict(False, bound, sb, (a, b))
            witnesses[(i, j)] = found
    return JepVerdict(True, bound, sb, None, witnesses)


# --- amalgamation ---------------------------------------------------------

@dataclass(frozen=True)
class Amalgam:
    c: FinStructure
    g1: Embedding
    g2: Embedding

    def __post_init__(self):
        # Embedding construction already re-checked preserve/reflect.
        if self.g1.dst != self.c or self.g2.dst != self.c:
            raise StructureError("amalgam maps do not land in c")

    def commutes_over(self, f1: Embedding, f2: Embedding) -> bool:
        return compose(self.g1, f1).map == compose(self.g2, f2).map


@dataclass(frozen=True)
class AmalgamationFailure:
    a: FinStructure
    b1: FinStructure
    b2: FinStructure
    f1: Embedding
    f2: Embedding
    search_bound: int


def free_amalgam(f1: Embedding, f2: Embedding) -> Amalgam:
    """Union of b1 and b2 over the shared image of a, with no relations
    beyond those inherited from b1 and b2."""
    a, b1, b2 = f1.src, f1.dst, f2.dst
    if f2.src != a:
        raise StructureError("span maps have different sources")
    g1_map = tuple(range(b1.size))
    shared = {f2.map[p]: f1.map[p] for p in a.points}
    g2_map = []
    nxt = b1.size
    for q in b2.points:
        if q in shared:
            g2_map.append(shared[q])
        else:
            g2_map.append(nxt)
            nxt += 1
    tables: dict[str, list[tuple[int, ...]]] = {name: [] for name, _ in a.sig.symbols}
    for (name, _), table in zip(b1.sig.symbols, b1.tables):
        tables[name].extend(tuple(g1_map[x] for x in t) for t in table)
    for (name, _), table in zip(b2.sig.symbols, b2.tables):
        tables[name].extend(tuple(g2_map[x] for x in t) for t in table)
    c = structure(a.sig, nxt, tables)
    return Amalgam(c, Embedding(b1, c, g1_map), Embedding(b2, c, tuple(g2_map)))


def amalgamate(
    a: FinStructure,
    b1: FinStructure,
    b2: FinStructure,
    f1: Embedding,
    f2: Embedding,
    k: ClassSpec,
    search_bound: int | None = None,
) -> Amalgam | AmalgamationFailure:
    """Complete the span (f1: a->b1, f2: a->b2) inside the class.

    The free amalgam is tried first; when it is not a member, members are
    scanned by size and canonical order for a commuting pair of
    embeddings.  Exhaustion up to the search bound is reported, never
    interpreted as a class-level failure.
    """
    if f1.src != a or f2.src != a or f1.dst != b1 or f2.dst != b2:
        raise StructureError("span maps do not match the given structures")
    for s in (a, b1, b2):
        if not k.contains(s):
            raise ClassSpecError(f"span structure of size {s.size} is not a member of {k.name!r}")
    bound = search_bound if search_bound is not None else b1.size + b2.size - a.size
    free = free_amalgam(f1, f2)
    if k.contains(free.c):
        return free
    if k.generator is None:
        return AmalgamationFailure(a, b1, b2, f1, f2, bound)
    for n in range(max(b1.size, b2.size), bound + 1):
        for c in k.members(n):
            embs2 = enumerate_embeddings(b2, c)
            if not embs2:
                continue
            for g1 in enumerate_embeddings(b1, c):
                want = compose(g1, f1).map
                for g2 in embs2:
                    if compose(g2, f2).map == want:
                        return Amalgam(c, g1, g2)
    return AmalgamationFailure(a, b1, b2, f1, f2, bound)


@dataclass(frozen=True)
class ApVerdict:
    holds: bool
    bound: int
    failure: AmalgamationFailure | None = None


def check_ap(k: ClassSpec, bound: int | None = None, search_bound: int | None = None) -> ApVerdict:
    """Quantify amalgamate over all spans with nonempty a up to the bound.

    Spans with empty a are joint-embedding instances and are covered by
    check_jep instead.
    """
    bound = k.size_bound if bound is None else bound
    members = [m for n in range(1, bound + 1) for m in k.members(n)]
    for a in members:
        sides = []
        for b in members:
            for f in enumerate_embeddings(a, b):
                sides.append((b, f))
        for i, (b1, f1) in enumerate(sides):
            for b2, f2 in sides[i:]:
                result = amalgamate(a, b1, b2, f1, f2, k, search_bound)
                if isinstance(result, AmalgamationFailure):
                    return ApVerdict(False, bound, result)
    return ApVerdict(True, bound)


# --- limit approximants ----------------------------------------------------

def one_point_extensions_in_class(a: FinStructure, k: ClassSpec) -> list[FinStructure]:
    """One-point extensions of a that lie in the class, in deterministic
    order.  Extensions fix a pointwise (the new point is last), and an
    isomorphism over a must send new point to new point, so distinct table
    assignments are exactly the distinct extension types over a."""
    return [x for x in one_point_extensions(a, a.sig) if k.contains(x)]


def _extension_requests(stage: FinStructure, k: ClassSpec, horizon: int):
    """(subset, extension) pairs to resolve, in canonical schedule order."""
    requests = []
    for r in range(0, min(horizon, stage.size) + 1):
        for subset in itertools.combinations(range(stage.size), r):
            sub, _ = induced_substructure(stage, subset)
            if not k.contains(sub):
                continue
            for ext in one_point_extensions_in_class(sub, k):
                requests.append((subset, sub, ext))
    return requests


def _realized(target: FinStructure, subset: tuple[int, ...], sub: FinStructure, ext: FinStructure) -> bool:
    """Does some embedding of ext into target extend the inclusion of subset?
    Extensions keep the base as an identity prefix, so the test is a prefix
    condition on the map."""
    base = tuple(sorted(subset))
    for e in enumerate_embeddings(ext, target):
        if e.map[: len(base)] == base:
            return True
    return False


def build_limit_approximant(
    k: ClassSpec,
    steps: int,
    start: FinStructure | None = None,
    horizon: int | None = None,
) -> Chain:
    """Chain whose next stage resolves, via amalgamation, every one-point
    extension request of every substructure (up to the horizon) of the
    current stage.  Deterministic given the class, start, and step count.
    """
    from .structures import identity_embedding

    if start is None:
        ones = k.members(1)
        if not ones:
            raise ClassSpecError(f"class {k.name!r} has no members of size 1")
        start = ones[0]
    if not k.contains(start):
        raise ClassSpecError("start structure is not a member")
    horizon = k.size_bound - 1 if horizon is None else horizon
    stages = [start]
    inclusions: list[Embedding] = []
    for _ in range(steps):
        stage = stages[-1]
        current = stage
        into_current = identity_embedding(stage)
        for subset, sub, ext in _extension_requests(stage, k, horizon):
            mapped = tuple(sorted(into_current.map[p] for p in subset))
            if _realized(current, mapped, sub, ext):
                continue
            sub_now, incl_now = induced_substructure(current, mapped)
            f2 = Embedding(sub_now, ext, tuple(range(sub_now.size)))
            result = amalgamate(sub_now, current, ext, incl_now, f2, k)
            if isinstance(result, AmalgamationFailure):
                raise ClassSpecError(
                    f"class {k.name!r} failed to amalgamate an extension request "
                    f"at stage size {current.size}; not an amalgamation class at this bound"
                )
            into_current = compose(result.g1, into_current)
            current = result.c
        stages.append(current)
        inclusions.append(into_current)
    return Chain(tuple(stages), tuple(inclusions))


@dataclass(frozen=True)
class ExtensionVerdict:
    holds: bool
    checked_size: int
    missing_subset: tuple[int, ...] | None = None
    missing_extension: FinStructure | None = None


def check_extension_property(mn: FinStructure, k: ClassSpec, size: int) -> ExtensionVerdict:
    """One-point extension property of mn itself: every substructure on at
    most `size` points, and every one-point extension of it in the class,
    must be realized inside mn over the identity inclusion.

    Finite stages of a growing chain generally fail this (a finite chain
    has no point below its minimum); the chain-relative variant below is
    what stage construction guarantees.
    """
    for r in range(0, min(size, mn.size) + 1):
        for subset in itertools.combinations(range(mn.size), r):
            sub, _ = induced_substructure(mn, subset)
            if not k.contains(sub):
                continue
            for ext in one_point_extensions_in_class(sub, k):
                if not _realized(mn, subset, sub, ext):
                    return ExtensionVerdict(False, size, subset, ext)
    return ExtensionVerdict(True, size)


def check_chain_extensions(chain: Chain, k: ClassSpec, size: int) -> ExtensionVerdict:
    """Chain-relative extension property: every request of stage i is
    realized in stage i+1 along the chain inclusion."""
    for i in range(len(chain.stages) - 1):
        stage, nxt = chain.stages[i], chain.stages[i + 1]
        inc = chain.inclusions[i]
        for subset, sub, ext in _extension_requests(stage, k, size):
            mapped = tuple(sorted(inc.map[p] for p in subset))
            if not _realized(nxt, mapped, sub, ext):
                return ExtensionVerdict(False, size, subset, ext)
    return ExtensionVerdict(True, size)


# --- cofinal families ------------------------------------------------------

COFINAL_KINDS = ("all", "initial", "even")


def cofinal_family(k: ClassSpec, window: FinStructure, kind: str = "all") -> list[frozenset[int]]:
    """A family of subsets of the window in which every small subset is
    contained in some member.

    Kinds: every subset; initial segments (natural for chain windows);
    even-sized subsets (cofinal once the window is large enough).
    """
    n = window.size
    if kind == "all":
        return [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(n), r)]
    if kind == "initial":
        return [frozenset(range(m)) for m in range(n + 1)]
    if kind == "even":
        return [
            frozenset(c)
            for r in range(0, n + 1, 2)
            for c in itertools.combinations(range(n), r)
        ]
    raise ValueError(f"unknown cofinal family kind {kind!r}; expected one of {COFINAL_KINDS}")


def is_cofinal(family: list[frozenset[int]], universe_size: int, bound: int) -> bool:
    """Every subset of size at most `bound` is contained in a member."""
    members = list(family)
    for r in range(bound + 1):
        for c in itertools.combinations(range(universe_size), r):
            s = frozenset(c)
            if not any(s <= m for m in members):
                return False
    return True
