"""Einstein puzzles: generation, exhaustive solution counting, greedy solving.

A puzzle is a K x M grid (houses x attributes). Each attribute assigns its K
sampled values to houses as a permutation. Clues are natural-language
constraints over value positions; the basic vocabulary is found_at,
same_house, direct_left and besides, with not_at, left_of and
two_house_between available as hard kinds.

The greedy solver repeatedly fills the cell(s) derivable from the smallest
clue subset (size <= 3): a subset first forces positions of the values it
references (over all completions consistent with the current table, the
per-attribute permutation constraint and the subset's clues), then the
Unique Values closure fills any last remaining value per attribute. Its
trace is the puzzle's computation graph: clue sources feeding a chain of
partial-table nodes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Any, Mapping, Sequence

from ..graph import (
    ComputationGraph,
    Node,
    NodeValue,
    register_op,
    register_order_key,
)

TASK = "puzzle"

ORDINALS = ("first", "second", "third", "fourth", "fifth", "sixth", "seventh")

BASIC_KINDS = ("found_at", "same_house", "direct_left", "besides")
HARD_KINDS = ("not_at", "left_of", "two_house_between")


class PuzzleError(ValueError):
    pass


class SearchSpaceError(PuzzleError):
    """Exhaustive counting refused: K and M both above the practical bound."""


class GreedyStuckError(PuzzleError):
    """No clue subset of size <= 3 fills a cell from the current table."""

    def __init__(self, table: dict[str, list[str | None]], steps_done: int) -> None:
        super().__init__(f"greedy solver stuck after {steps_done} steps")
        self.table = table
        self.steps_done = steps_done


# ---------------------------------------------------------------------------
# Attribute catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttributeDef:
    key: str
    column: str
    bullet: str
    values: tuple[str, ...]
    phrases: Mapping[str, str]  # value -> noun phrase used in clue text
    shorts: Mapping[str, str]  # value -> short display for the final table

    def trimmed(self, values: Sequence[str]) -> "AttributeDef":
        return AttributeDef(self.key, self.column, self.bullet, tuple(values), self.phrases, self.shorts)


def _attr(key: str, column: str, bullet: str, entries: Sequence[tuple[str, str, str]]) -> AttributeDef:
    values = tuple(v for v, _, _ in entries)
    phrases = {v: p for v, p, _ in entries}
    shorts = {v: s for v, _, s in entries}
    return AttributeDef(key, column, bullet, values, phrases, shorts)


CATALOG: tuple[AttributeDef, ...] = (
    _attr(
        "Name",
        "Name",
        "Each person has a unique name: {values}",
        [(n, n.capitalize(), n.capitalize()) for n in ("peter", "eric", "arnold", "alice", "bob", "carol", "david")],
    ),
    _attr(
        "FavoriteSport",
        "Sports",
        "People have different favorite sports: {values}",
        [
            (s, f"the person who loves {s}", s.capitalize())
            for s in ("soccer", "tennis", "basketball", "swimming", "baseball", "volleyball", "golf")
        ],
    ),
    _attr(
        "CarModel",
        "Car",
        "People own different car models: {values}",
        [
            ("tesla model 3", "the person who owns a Tesla Model 3", "Tesla"),
            ("ford f150", "the person who owns a Ford F-150", "Ford"),
            ("toyota camry", "the person who owns a Toyota Camry", "Camry"),
            ("honda civic", "the person who owns a Honda Civic", "Civic"),
            ("bmw 3 series", "the person who owns a BMW 3 Series", "BMW"),
            ("nissan leaf", "the person who owns a Nissan Leaf", "Leaf"),
            ("chevrolet silverado", "the person who owns a Chevrolet Silverado", "Silverado"),
        ],
    ),
    _attr(
        "Color",
        "Color",
        "Each house has a different color: {values}",
        [
            (c, f"the person who lives in a {c} house", c.capitalize())
            for c in ("red", "green", "blue", "yellow", "white", "purple", "brown")
        ],
    ),
    _attr(
        "Pet",
        "Pet",
        "People have different pets: {values}",
        [
            (p, f"the person who has a {p} as a pet", p.capitalize())
            for p in ("dog", "cat", "fish", "bird", "hamster", "rabbit", "horse")
        ],
    ),
    _attr(
        "PhoneModel",
        "Phone",
        "People use different phone models: {values}",
        [
            ("iphone 13", "the person who uses an iPhone 13", "iPhone"),
            ("samsung galaxy s21", "the person who uses a Samsung Galaxy S21", "Samsung"),
            ("google pixel 6", "the person who uses a Google Pixel 6", "Pixel"),
            ("oneplus 9", "the person who uses a OnePlus 9", "OnePlus"),
            ("huawei p50", "the person who uses a Huawei P50", "Huawei"),
            ("sony xperia 5", "the person who uses a Sony Xperia 5", "Sony"),
            ("motorola edge", "the person who uses a Motorola Edge", "Motorola"),
        ],
    ),
    _attr(
        "Drink",
        "Drink",
        "People drink different beverages: {values}",
        [
            (d, f"the person who drinks {d}", d.capitalize())
            for d in ("tea", "coffee", "milk", "water", "juice", "soda", "lemonade")
        ],
    ),
)

_CATALOG_BY_KEY = {a.key: a for a in CATALOG}


@dataclass(frozen=True)
class PuzzleSpec:
    k: int
    m: int
    seed: int
    use_hard_clues: bool = False

    def __post_init__(self) -> None:
        if not (1 <= self.k <= 7 and 1 <= self.m <= 7):
            raise ValueError(f"puzzle sizes limited to 7x7: {self}")


@dataclass(frozen=True)
class Clue:
    kind: str
    args: tuple  # found_at/not_at: ((attr, value), house); pair kinds: ((a, va), (b, vb))
    text: str

    def refs(self) -> tuple[tuple[str, str], ...]:
        if self.kind in ("found_at", "not_at"):
            return (self.args[0],)
        return (self.args[0], self.args[1])

    def to_value(self) -> NodeValue:
        flat: list[Any] = []
        for a in self.args:
            if isinstance(a, tuple):
                flat.extend(a)
            else:
                flat.append(a)
        return NodeValue.clue(self.kind, flat)


def clue_from_value(value: NodeValue) -> Clue:
    kind, flat = value.payload
    if kind in ("found_at", "not_at"):
        args: tuple = ((flat[0], flat[1]), flat[2])
    else:
        args = ((flat[0], flat[1]), (flat[2], flat[3]))
    return Clue(kind, args, "")


@dataclass
class PuzzleInstance:
    k: int
    m: int
    attributes: tuple[AttributeDef, ...]  # sampled values, bullet order
    solution: dict[str, tuple[str, ...]]  # attr key -> value per house (index 0 = house 1)
    clues: tuple[Clue, ...]
    seed: int | None = None

    @property
    def instance_id(self) -> str:
        return f"puzzle-{self.k}x{self.m}-{self.seed}"


# ---------------------------------------------------------------------------
# Clue text and semantics
# ---------------------------------------------------------------------------


def _cap(phrase: str) -> str:
    return phrase[0].upper() + phrase[1:]


def render_clue(kind: str, args: tuple, attributes: Sequence[AttributeDef]) -> str:
    phrases = {a.key: a.phrases for a in attributes}

    def phrase(ref: tuple[str, str]) -> str:
        return phrases[ref[0]][ref[1]]

    if kind == "found_at":
        ref, house = args
        return f"{_cap(phrase(ref))} is in the {ORDINALS[house - 1]} house."
    if kind == "not_at":
        ref, house = args
        return f"{_cap(phrase(ref))} is not in the {ORDINALS[house - 1]} house."
    a, b = args
    if kind == "same_house":
        return f"{_cap(phrase(a))} is {phrase(b)}."
    if kind == "direct_left":
        return f"{_cap(phrase(a))} is directly left of {phrase(b)}."
    if kind == "besides":
        return f"{_cap(phrase(a))} and {phrase(b)} are next to each other."
    if kind == "left_of":
        return f"{_cap(phrase(a))} is somewhere to the left of {phrase(b)}."
    if kind == "two_house_between":
        return f"There are two houses between {phrase(a)} and {phrase(b)}."
    raise PuzzleError(f"unknown clue kind {kind!r}")


def make_clue(kind: str, args: tuple, attributes: Sequence[AttributeDef]) -> Clue:
    return Clue(kind, args, render_clue(kind, args, attributes))


def clue_holds(clue: Clue, position_of) -> bool:
    """Truth of a clue given ``position_of((attr, value)) -> house``."""
    if clue.kind in ("found_at", "not_at"):
        ref, house = clue.args
        at = position_of(ref) == house
        return at if clue.kind == "found_at" else not at
    pa, pb = (position_of(r) for r in clue.args)
    if clue.kind == "same_house":
        return pa == pb
    if clue.kind == "direct_left":
        return pa + 1 == pb
    if clue.kind == "besides":
        return abs(pa - pb) == 1
    if clue.kind == "left_of":
        return pa < pb
    if clue.kind == "two_house_between":
        return abs(pa - pb) == 3
    raise PuzzleError(f"unknown clue kind {clue.kind!r}")


def clue_satisfied_by_solution(clue: Clue, solution: Mapping[str, Sequence[str]]) -> bool:
    pos = {(key, v): h + 1 for key, col in solution.items() for h, v in enumerate(col)}
    return clue_holds(clue, lambda ref: pos[ref])


# ---------------------------------------------------------------------------
# Sampling and clue generation
# ---------------------------------------------------------------------------


def _derived_rng(seed: int, attempt: int) -> random.Random:
    return random.Random(f"puzzle:{seed}:{attempt}")


def sample_solution(spec: PuzzleSpec, attempt: int = 0) -> tuple[tuple[AttributeDef, ...], dict[str, tuple[str, ...]]]:
    """Sample M attributes (Name always included) and a K x M solution.

    Deterministic under (seed, attempt). Each attribute's bullet order is the
    sampled value order; the solution column is an independent permutation.
    """
    rng = _derived_rng(spec.seed, attempt)
    others = [a for a in CATALOG if a.key != "Name"]
    chosen = [_CATALOG_BY_KEY["Name"]] + rng.sample(others, spec.m - 1)
    attributes: list[AttributeDef] = []
    solution: dict[str, tuple[str, ...]] = {}
    for attr in chosen:
        if len(attr.values) < spec.k:
            raise PuzzleError(f"attribute {attr.key} has fewer than {spec.k} values")
        sampled = rng.sample(list(attr.values), spec.k)
        attributes.append(attr.trimmed(sampled))
        solution[attr.key] = tuple(rng.sample(sampled, spec.k))
    return tuple(attributes), solution


def generate_all_clues(
    attributes: Sequence[AttributeDef],
    solution: Mapping[str, Sequence[str]],
    rng: random.Random,
    include_hard: bool = False,
) -> list[Clue]:
    """Every true clue of the enabled kinds, with seeded pair directions."""
    k = len(next(iter(solution.values())))
    keys = [a.key for a in attributes]
    at = {key: solution[key] for key in keys}  # house index -> value

    clues: list[Clue] = []
    for key in keys:
        for h in range(k):
            clues.append(make_clue("found_at", ((key, at[key][h]), h + 1), attributes))

    for h in range(k):
        for ka, kb in combinations(keys, 2):
            a, b = (ka, at[ka][h]), (kb, at[kb][h])
            if rng.random() < 0.5:
                a, b = b, a
            clues.append(make_clue("same_house", (a, b), attributes))

    for h in range(k - 1):
        for ka in keys:
            for kb in keys:
                clues.append(make_clue("direct_left", ((ka, at[ka][h]), (kb, at[kb][h + 1])), attributes))
                if (ka, kb) <= (kb, ka):  # one besides clue per unordered house-adjacent pair
                    clues.append(make_clue("besides", ((ka, at[ka][h]), (kb, at[kb][h + 1])), attributes))

    if include_hard:
        for key in keys:
            for h in range(k):
                for other in range(1, k + 1):
                    if other != h + 1:
                        clues.append(make_clue("not_at", ((key, at[key][h]), other), attributes))
        for ka in keys:
            for kb in keys:
                for ha in range(k):
                    for hb in range(k):
                        a, b = (ka, at[ka][ha]), (kb, at[kb][hb])
                        if a == b:
                            continue
                        if ha < hb and not (ka == kb and ha + 1 == hb):
                            clues.append(make_clue("left_of", (a, b), attributes))
                        if hb - ha == 3:
                            clues.append(make_clue("two_house_between", (a, b), attributes))

    return clues


def generate_clues(
    solution: Mapping[str, Sequence[str]],
    attributes: Sequence[AttributeDef],
    seed: int,
    include_hard: bool = False,
) -> list[Clue]:
    """Over-generate all valid clues, then drop redundant ones at random until
    no clue can be removed without losing uniqueness (fixpoint)."""
    rng = random.Random(f"clues:{seed}")
    k = len(next(iter(solution.values())))
    clues = generate_all_clues(attributes, solution, rng, include_hard)
    if count_solutions(clues, attributes, k, cap=2) != 1:
        raise PuzzleError("full clue set does not pin a unique solution")

    keep = list(clues)
    changed = True
    while changed:
        changed = False
        order = list(keep)
        rng.shuffle(order)
        for clue in order:
            if clue not in keep:
                continue
            remainder = [c for c in keep if c is not clue]
            if count_solutions(remainder, attributes, k, cap=2) == 1:
                keep = remainder
                changed = True
    return keep


def generate(spec: PuzzleSpec, max_attempts: int = 64) -> PuzzleInstance:
    """Generate a unique-solution puzzle whose clue set the greedy solver can
    finish. Attempts are deterministic under the spec seed; a draw whose
    surviving clues defeat the subset-size-3 greedy search is rejected and
    regenerated from the next derived seed."""
    for attempt in range(max_attempts):
        attributes, solution = sample_solution(spec, attempt)
        clues = generate_clues(solution, attributes, seed=spec.seed * 1009 + attempt, include_hard=spec.use_hard_clues)
        instance = PuzzleInstance(spec.k, spec.m, attributes, solution, tuple(clues), seed=spec.seed)
        try:
            graph = greedy_solve(instance)
        except GreedyStuckError:
            continue
        sink_cells = graph.nodes[graph.sink].value
        if sink_cells == solution_value(instance):
            return instance
    raise PuzzleError(f"could not generate a greedy-solvable puzzle for {spec}")


def solution_value(instance: PuzzleInstance) -> NodeValue:
    cells = [
        (h + 1, key, instance.solution[key][h])
        for key in (a.key for a in instance.attributes)
        for h in range(instance.k)
    ]
    return NodeValue.table(cells)


# ---------------------------------------------------------------------------
# Exhaustive solution counting (independent oracle for uniqueness)
# ---------------------------------------------------------------------------


def _column_perms(values: Sequence[str], filled: Sequence[str | None]) -> list[tuple[str, ...]]:
    out = []
    for p in permutations(values):
        if all(f is None or f == p[h] for h, f in enumerate(filled)):
            out.append(p)
    return out


def count_solutions(
    clues: Sequence[Clue],
    attributes: Sequence[AttributeDef],
    k: int,
    cap: int = 2,
    table: Mapping[str, Sequence[str | None]] | None = None,
) -> int:
    """Exact number of full tables satisfying all clues, counted up to ``cap``.

    Backtracks over per-attribute permutations with early clue checks.
    Refuses K > 5 with M > 4 (the exhaustive-mode practical bound).
    """
    if k > 5 and len(attributes) > 4:
        raise SearchSpaceError(f"exhaustive counting refused for {k}x{len(attributes)}")
    if cap < 1:
        raise ValueError("cap must be >= 1")

    keys = [a.key for a in attributes]
    filled = {key: list(table[key]) if table is not None else [None] * k for key in keys}
    domains = {a.key: _column_perms(a.values, filled[a.key]) for a in attributes}

    # Pre-filter domains with clues confined to a single attribute.
    multi: list[Clue] = []
    for clue in clues:
        ckeys = {r[0] for r in clue.refs()}
        if len(ckeys) == 1:
            key = next(iter(ckeys))
            domains[key] = [p for p in domains[key] if _clue_ok_single(clue, p)]
        else:
            multi.append(clue)

    order = sorted(keys, key=lambda key: (len(domains[key]), keys.index(key)))
    # Clues checkable once all their attributes are assigned.
    check_at: list[list[Clue]] = [[] for _ in order]
    for clue in multi:
        ckeys = {r[0] for r in clue.refs()}
        depth = max(order.index(_k) for _k in ckeys)
        check_at[depth].append(clue)

    count = 0
    assigned: dict[str, dict[str, int]] = {}

    def recurse(depth: int) -> bool:
        nonlocal count
        if depth == len(order):
            count += 1
            return count >= cap
        key = order[depth]
        for perm in domains[key]:
            assigned[key] = {v: h + 1 for h, v in enumerate(perm)}
            ok = True
            for clue in check_at[depth]:
                if not clue_holds(clue, lambda ref: assigned[ref[0]][ref[1]]):
                    ok = False
                    break
            if ok and recurse(depth + 1):
                return True
        assigned.pop(key, None)
        return False

    recurse(0)
    return count


def _clue_ok_single(clue: Clue, perm: tuple[str, ...]) -> bool:
    pos = {v: h + 1 for h, v in enumerate(perm)}
    return clue_holds(clue, lambda ref: pos[ref[1]])


# ---------------------------------------------------------------------------
# Greedy elimination
# ---------------------------------------------------------------------------


def empty_table(attributes: Sequence[AttributeDef], k: int) -> dict[str, list[str | None]]:
    return {a.key: [None] * k for a in attributes}


def deduce_fills(
    table: Mapping[str, Sequence[str | None]],
    subset: Sequence[Clue],
    attributes: Sequence[AttributeDef],
    k: int,
) -> tuple[list[tuple[int, str, str]], list[tuple[int, str, str]]]:
    """Cells forced by a clue subset, plus the Unique Values closure fills.

    Phase A forces positions of the values the subset references, quantifying
    over all completions of the involved attributes consistent with the
    current table, the permutation constraint, and the subset's clues.
    Contradictory inputs (possible on claimed tables) force nothing.
    """
    attrs_by_key = {a.key: a for a in attributes}
    refs: list[tuple[str, str]] = []
    for clue in subset:
        for ref in clue.refs():
            if ref not in refs:
                refs.append(ref)
    involved = []
    for key, _ in refs:
        if key not in involved:
            involved.append(key)

    domains = {key: _column_perms(attrs_by_key[key].values, table[key]) for key in involved}
    if any(not d for d in domains.values()):
        return [], []

    check_at: list[list[Clue]] = [[] for _ in involved]
    for clue in subset:
        ckeys = {r[0] for r in clue.refs()}
        if not ckeys.issubset(set(involved)):
            return [], []
        depth = max(involved.index(_k) for _k in ckeys)
        check_at[depth].append(clue)

    forced: dict[tuple[str, str], int | None] = {}  # ref -> house, absent until seen
    dead: set[tuple[str, str]] = set()
    solutions_seen = 0
    assigned: dict[str, dict[str, int]] = {}

    def recurse(depth: int) -> bool:
        nonlocal solutions_seen
        if depth == len(involved):
            solutions_seen += 1
            for ref in refs:
                if ref in dead:
                    continue
                pos = assigned[ref[0]][ref[1]]
                if ref not in forced:
                    forced[ref] = pos
                elif forced[ref] != pos:
                    dead.add(ref)
            return len(dead) == len(refs)  # nothing left to force
        key = involved[depth]
        for perm in domains[key]:
            assigned[key] = {v: h + 1 for h, v in enumerate(perm)}
            ok = all(clue_holds(c, lambda ref: assigned[ref[0]][ref[1]]) for c in check_at[depth])
            if ok and recurse(depth + 1):
                return True
        assigned.pop(key, None)
        return False

    recurse(0)
    if solutions_seen == 0:
        return [], []

    work = {key: list(col) for key, col in table.items()}
    fills_a: list[tuple[int, str, str]] = []
    for ref in refs:
        if ref in dead or ref not in forced:
            continue
        key, value = ref
        house = forced[ref]
        if work[key][house - 1] is None:
            work[key][house - 1] = value
            fills_a.append((house, key, value))

    fills_b = closure_fills(work, attributes, k)
    return fills_a, fills_b


def closure_fills(
    table: dict[str, list[str | None]], attributes: Sequence[AttributeDef], k: int
) -> list[tuple[int, str, str]]:
    """Unique Values rule: fill the last remaining value of any attribute.

    Mutates ``table``; returns the fills made.
    """
    fills: list[tuple[int, str, str]] = []
    changed = True
    while changed:
        changed = False
        for attr in attributes:
            col = table[attr.key]
            missing = [h for h in range(k) if col[h] is None]
            if len(missing) == 1:
                used = {v for v in col if v is not None}
                remaining = [v for v in attr.values if v not in used]
                if len(remaining) == 1:
                    col[missing[0]] = remaining[0]
                    fills.append((missing[0] + 1, attr.key, remaining[0]))
                    changed = True
    return fills


@dataclass(frozen=True)
class GreedyStep:
    clue_ids: tuple[int, ...]  # 1-based indices into the instance clue list
    fills: tuple[tuple[int, str, str], ...]
    closure: tuple[tuple[int, str, str], ...]

    @property
    def all_fills(self) -> tuple[tuple[int, str, str], ...]:
        return self.fills + self.closure


def greedy_trace(instance: PuzzleInstance, max_subset: int = 3) -> list[GreedyStep]:
    attributes, k = instance.attributes, instance.k
    attr_order = {a.key: i for i, a in enumerate(attributes)}
    table = empty_table(attributes, k)
    total = k * len(attributes)
    steps: list[GreedyStep] = []

    def placed(ref: tuple[str, str]) -> bool:
        return ref[1] in table[ref[0]]

    while sum(v is not None for col in table.values() for v in col) < total:
        found: tuple[tuple[int, ...], list, list] | None = None
        for size in range(1, max_subset + 1):
            for combo in combinations(range(len(instance.clues)), size):
                subset = [instance.clues[i] for i in combo]
                if all(placed(ref) for c in subset for ref in c.refs()):
                    continue  # nothing new to force
                fills_a, fills_b = deduce_fills(table, subset, attributes, k)
                if fills_a or fills_b:
                    found = (combo, fills_a, fills_b)
                    break
            if found:
                break
        if found is None:
            raise GreedyStuckError(table, len(steps))
        combo, fills_a, fills_b = found
        for house, key, value in fills_a + fills_b:
            table[key][house - 1] = value
        order_key = lambda f: (f[0], attr_order[f[1]])  # noqa: E731
        steps.append(
            GreedyStep(
                tuple(i + 1 for i in combo),
                tuple(sorted(fills_a, key=order_key)),
                tuple(sorted(fills_b, key=order_key)),
            )
        )
    return steps


def greedy_solve(instance: PuzzleInstance) -> ComputationGraph:
    """Computation graph of the greedy elimination run.

    Sources are the clues the run uses; each step node holds the cumulative
    partial table; the sink is the fully-filled table.
    """
    if not instance.clues:
        # Degenerate: only possible when every attribute has K = 1.
        value = solution_value(instance)
        node = Node("step[1]", value, "SOURCE")
        return ComputationGraph(TASK, {node.id: node}, "step[1]", meta=_instance_meta(instance, []))

    steps = greedy_trace(instance)
    nodes: dict[str, Node] = {}
    used = sorted({i for s in steps for i in s.clue_ids})
    for i in used:
        nodes[f"clue[{i}]"] = Node(f"clue[{i}]", instance.clues[i - 1].to_value(), "SOURCE")

    cells: list[tuple[int, str, str]] = []
    prev: str | None = None
    for t, step in enumerate(steps, start=1):
        cells = cells + [(h, key, v) for h, key, v in step.all_fills]
        parents = tuple([prev] if prev else []) + tuple(f"clue[{i}]" for i in step.clue_ids)
        nid = f"step[{t}]"
        nodes[nid] = Node(nid, NodeValue.table(cells), "puzzle.eliminate", parents)
        prev = nid

    return ComputationGraph(TASK, nodes, prev, meta=_instance_meta(instance, steps))


def _instance_meta(instance: PuzzleInstance, steps: Sequence[GreedyStep]) -> dict[str, Any]:
    return {
        "k": instance.k,
        "m": instance.m,
        "seed": instance.seed,
        "attributes": [
            {
                "key": a.key,
                "column": a.column,
                "bullet": a.bullet,
                "values": list(a.values),
                "phrases": {v: a.phrases[v] for v in a.values},
                "shorts": {v: a.shorts[v] for v in a.values},
            }
            for a in instance.attributes
        ],
        "clues": [{"kind": c.kind, "args": _flat_args(c), "text": c.text} for c in instance.clues],
        "steps": [
            {"clues": list(s.clue_ids), "fills": [list(f) for f in s.fills], "closure": [list(f) for f in s.closure]}
            for s in steps
        ],
    }


def _flat_args(clue: Clue) -> list[Any]:
    flat: list[Any] = []
    for a in clue.args:
        if isinstance(a, tuple):
            flat.extend(a)
        else:
            flat.append(a)
    return flat


def instance_from_meta(meta: Mapping[str, Any]) -> PuzzleInstance:
    """Rebuild enough of an instance from graph meta to render and parse."""
    attributes = tuple(
        AttributeDef(
            a["key"],
            a["column"],
            a["bullet"],
            tuple(a["values"]),
            dict(a["phrases"]),
            dict(a["shorts"]),
        )
        for a in meta["attributes"]
    )
    clues = []
    for c in meta["clues"]:
        flat = c["args"]
        if c["kind"] in ("found_at", "not_at"):
            args: tuple = ((flat[0], flat[1]), flat[2])
        else:
            args = ((flat[0], flat[1]), (flat[2], flat[3]))
        clues.append(Clue(c["kind"], args, c["text"]))
    solution = dict(meta.get("solution", {}))
    return PuzzleInstance(
        meta["k"],
        meta["m"],
        attributes,
        {k: tuple(v) for k, v in solution.items()},
        tuple(clues),
        seed=meta.get("seed"),
    )


# ---------------------------------------------------------------------------
# Op registration and canonical ordering
# ---------------------------------------------------------------------------


def _op_eliminate(args: list[NodeValue], _param, graph: ComputationGraph) -> NodeValue:
    from ..graph import KIND_TABLE

    meta = graph.meta
    attributes = tuple(
        AttributeDef(a["key"], a["column"], a["bullet"], tuple(a["values"]), dict(a["phrases"]), dict(a["shorts"]))
        for a in meta["attributes"]
    )
    k = meta["k"]
    if args and args[0].kind == KIND_TABLE:
        prev_cells, clue_values = args[0].payload, args[1:]
    else:
        prev_cells, clue_values = (), args
    table = empty_table(attributes, k)
    for house, key, value in prev_cells:
        table[key][house - 1] = value
    subset = [clue_from_value(v) for v in clue_values]
    fills_a, fills_b = deduce_fills(table, subset, attributes, k)
    cells = list(prev_cells) + [tuple(f) for f in fills_a + fills_b]
    return NodeValue.table(cells)


register_op("puzzle.eliminate", None, _op_eliminate)


def _order_key(node_id: str) -> tuple:
    name, rest = node_id.split("[", 1)
    idx = int(rest.rstrip("]"))
    return (0 if name == "clue" else 1, idx)


register_order_key(TASK, _order_key)
