"""Oriented link diagrams as PD codes with an explicit rotation system.

A diagram is a set of 4-valent crossings plus a set of crossingless free
loops.  Each crossing stores its four incident arc labels in counterclockwise
order starting at the incoming under-strand, so the code carries a full
rotation system and planarity is a checkable Euler-formula invariant rather
than an assumption.

Strand orientations are not written in the code; they are recovered by
constraint propagation (under-slots force directions, over-slots are tied in
opposite pairs).  Components whose orientation is genuinely free (e.g. a
circle that only ever passes over) get a deterministic default.

Diagrams are immutable after construction and compare equal exactly when
their canonical serializations agree.  There is no Reidemeister engine:
equality is code-level.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

from .errors import (
    DanglingArc,
    IncoherentOrientation,
    MalformedCode,
    NonPlanar,
    NotAKnotComponent,
)

# Slot roles: slot 0 is the incoming under-strand, slot 2 the outgoing
# under-strand.  The over-strand occupies slots 1 and 3; which of the two is
# incoming is resolved by orientation propagation.
_UNDER_IN, _UNDER_OUT = 0, 2

# Strand partner of each slot (the slot where the same strand exits/enters).
_PARTNER = {0: 2, 2: 0, 1: 3, 3: 1}


class Crossing:
    """One crossing: 4 arc labels, counterclockwise from the under-in slot."""

    __slots__ = ("slots", "sign", "over_in_slot")

    def __init__(self, slots: tuple[int, int, int, int], over_in_slot: int):
        self.slots = slots
        self.over_in_slot = over_in_slot  # 1 or 3
        # Over entering at slot 3 travels slot3->slot1; with the under strand
        # travelling slot0->slot2 that is a positive crossing.
        self.sign = 1 if over_in_slot == 3 else -1

    def __repr__(self):
        return f"Crossing{self.slots}({'+' if self.sign > 0 else '-'})"


class LinkDiagram:
    """Oriented link diagram; immutable once constructed."""

    def __init__(self, crossings: Sequence[Crossing], free_loops: Sequence[int]):
        self.crossings: tuple[Crossing, ...] = tuple(crossings)
        self.free_loops: tuple[int, ...] = tuple(sorted(free_loops))
        self._occ: dict[int, list[tuple[int, int]]] = {}
        for ci, c in enumerate(self.crossings):
            for s, a in enumerate(c.slots):
                self._occ.setdefault(a, []).append((ci, s))
        self.arcs: frozenset[int] = frozenset(self._occ)
        self._validate_occurrences()
        self.successor: dict[int, int] = self._build_successor()
        self._cycles: tuple[tuple[int, ...], ...] = self._trace_components()
        # Component order: arc cycles sorted by minimal arc, then free loops.
        self.components: tuple[tuple[int, ...], ...] = tuple(
            sorted(self._cycles, key=lambda cyc: min(cyc))
        )
        self.comp_of_arc: dict[int, int] = {}
        for idx, cyc in enumerate(self.components):
            for a in cyc:
                self.comp_of_arc[a] = idx
        self.comp_of_loop: dict[int, int] = {
            loop: len(self.components) + i for i, loop in enumerate(self.free_loops)
        }
        self._check_planarity()
        self._canonical_text: str | None = None

    # -- construction helpers ---------------------------------------------

    def _validate_occurrences(self) -> None:
        if any(a <= 0 for a in self.arcs):
            raise MalformedCode("arc labels must be positive integers")
        for a, occ in self._occ.items():
            if len(occ) != 2:
                raise DanglingArc(f"arc {a} occurs {len(occ)} time(s), expected 2")
        bad = self.arcs.intersection(self.free_loops)
        if bad:
            raise MalformedCode(f"free loop id(s) {sorted(bad)} collide with arc labels")
        if len(set(self.free_loops)) != len(self.free_loops):
            raise MalformedCode("duplicate free loop ids")
        if any(n <= 0 for n in self.free_loops):
            raise MalformedCode("free loop ids must be positive integers")

    def _build_successor(self) -> dict[int, int]:
        """Resolve slot directions, derive crossing signs and the successor map."""
        role: dict[tuple[int, int], bool] = {}  # True = incoming (arc ends here)
        # Constraint graph: nodes are occurrences, every edge joins occurrences
        # of opposite role (the two ends of an arc; the two over slots).
        adj: dict[tuple[int, int], list[tuple[int, int]]] = {}

        def link(x, y):
            adj.setdefault(x, []).append(y)
            adj.setdefault(y, []).append(x)

        for a, occ in self._occ.items():
            link(occ[0], occ[1])
        for ci in range(len(self.crossings)):
            link((ci, 1), (ci, 3))

        seeds = []
        for ci in range(len(self.crossings)):
            seeds.append(((ci, _UNDER_IN), True))
            seeds.append(((ci, _UNDER_OUT), False))

        def paint(node, value):
            stack = [(node, value)]
            while stack:
                n, v = stack.pop()
                if n in role:
                    if role[n] != v:
                        raise IncoherentOrientation(
                            f"crossing {n[0]} slot {n[1]} cannot be oriented consistently"
                        )
                    continue
                role[n] = v
                for m in adj.get(n, []):
                    stack.append((m, not v))

        for node, value in seeds:
            paint(node, value)
        # Over-only clusters (components that never go under) are free; give
        # the smallest unresolved occurrence a deterministic direction.
        for ci in range(len(self.crossings)):
            for s in (1, 3):
                if (ci, s) not in role:
                    paint((ci, s), True)

        over_in = {}
        for ci in range(len(self.crossings)):
            if role[(ci, 1)] == role[(ci, 3)]:
                raise IncoherentOrientation(f"crossing {ci} over-strand direction clash")
            over_in[ci] = 1 if role[(ci, 1)] else 3

        # Rebuild crossings with resolved over direction (sign).
        self.crossings = tuple(
            Crossing(c.slots, over_in[ci]) for ci, c in enumerate(self.crossings)
        )

        succ: dict[int, int] = {}
        for ci, c in enumerate(self.crossings):
            for s in range(4):
                if role[(ci, s)]:  # incoming: strand continues at partner slot
                    a_in = c.slots[s]
                    a_out = c.slots[_PARTNER[s]]
                    if a_in in succ:
                        raise IncoherentOrientation(f"arc {a_in} enters two crossings")
                    succ[a_in] = a_out
        self._role = role
        return succ

    def _trace_components(self) -> tuple[tuple[int, ...], ...]:
        seen: set[int] = set()
        cycles = []
        for a in sorted(self.arcs):
            if a in seen:
                continue
            cyc = [a]
            seen.add(a)
            b = self.successor[a]
            while b != a:
                cyc.append(b)
                seen.add(b)
                b = self.successor[b]
            cycles.append(tuple(cyc))
        return tuple(cycles)

    def _check_planarity(self) -> None:
        """Each connected 4-valent piece must satisfy V - E + F = 2."""
        n = len(self.crossings)
        if n == 0:
            return
        # Union crossings sharing an arc.
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for occ in self._occ.values():
            r1, r2 = find(occ[0][0]), find(occ[1][0])
            if r1 != r2:
                parent[r1] = r2

        # Face orbits of the map permutation rotate-after-arc-involution.
        darts = [(ci, s) for ci in range(n) for s in range(4)]
        other: dict[tuple[int, int], tuple[int, int]] = {}
        for occ in self._occ.values():
            other[occ[0]] = occ[1]
            other[occ[1]] = occ[0]

        def face_next(d):
            cj, t = other[d]
            return (cj, (t + 1) % 4)

        faces_of: dict[int, int] = {}
        seen: set[tuple[int, int]] = set()
        for d in darts:
            if d in seen:
                continue
            piece = find(d[0])
            faces_of[piece] = faces_of.get(piece, 0) + 1
            e = d
            while e not in seen:
                seen.add(e)
                e = face_next(e)

        verts: dict[int, int] = {}
        arcs_of: dict[int, int] = {}
        for ci in range(n):
            verts[find(ci)] = verts.get(find(ci), 0) + 1
        for a, occ in self._occ.items():
            arcs_of[find(occ[0][0])] = arcs_of.get(find(occ[0][0]), 0) + 1

        for piece, v in verts.items():
            euler = v - arcs_of[piece] + faces_of[piece]
            if euler != 2:
                raise NonPlanar(
                    f"connected piece has V-E+F = {euler}, expected 2 (genus > 0)"
                )

    # -- basic queries ------------------------------------------------------

    @property
    def component_count(self) -> int:
        return len(self.components) + len(self.free_loops)

    def all_component_ids(self) -> list[int]:
        return list(range(self.component_count))

    def component_arcs(self, comp: int) -> tuple[int, ...]:
        """Arc cycle of component `comp`; empty tuple for a free loop."""
        if comp < len(self.components):
            return self.components[comp]
        return ()

    def is_free_loop_component(self, comp: int) -> bool:
        return comp >= len(self.components)

    def loop_id_of_component(self, comp: int) -> int:
        return self.free_loops[comp - len(self.components)]

    def component_of(self, label: int) -> int:
        """Component id for an arc label or free-loop id."""
        if label in self.comp_of_arc:
            return self.comp_of_arc[label]
        if label in self.comp_of_loop:
            return self.comp_of_loop[label]
        raise MalformedCode(f"unknown arc or loop label {label}")

    def arc_endpoints(self, a: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """((crossing, slot) where arc starts, (crossing, slot) where it ends)."""
        occ = self._occ[a]
        if self._role[occ[0]]:
            return occ[1], occ[0]
        return occ[0], occ[1]

    def occurrences(self, a: int) -> list[tuple[int, int]]:
        return list(self._occ[a])

    def is_incoming(self, ci: int, slot: int) -> bool:
        return self._role[(ci, slot)]

    def crossingless(self) -> bool:
        return not self.crossings

    def is_crossingless_unlink(self) -> bool:
        return not self.crossings and bool(self.free_loops)

    # -- canonical form -------------------------------------------------------

    def _piece_partition(self) -> list[list[int]]:
        n = len(self.crossings)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for occ in self._occ.values():
            r1, r2 = find(occ[0][0]), find(occ[1][0])
            if r1 != r2:
                parent[r1] = r2
        pieces: dict[int, list[int]] = {}
        for ci in range(n):
            pieces.setdefault(find(ci), []).append(ci)
        return list(pieces.values())

    def _encode_piece_from(self, start_arc: int) -> tuple[tuple, dict[int, int], list[int]]:
        """Deterministic relabelled encoding of the piece containing start_arc.

        Walks components strand-wise beginning at start_arc, assigning new arc
        labels in traversal order; further components of the piece start at the
        first unlabelled arc seen at already-visited crossings.
        """
        new_arc: dict[int, int] = {}
        cross_order: list[int] = []
        cross_seen: set[int] = set()
        passage_slots: list[tuple[int, int]] = []

        def walk(a0: int):
            a = a0
            while a not in new_arc:
                new_arc[a] = len(new_arc) + 1
                _, (ci, s) = self.arc_endpoints(a)
                if ci not in cross_seen:
                    cross_seen.add(ci)
                    cross_order.append(ci)
                passage_slots.append((ci, s))
                a = self.successor[a]

        walk(start_arc)
        while True:
            nxt = None
            for ci, _ in passage_slots:
                for s in range(4):
                    a = self.crossings[ci].slots[s]
                    if a not in new_arc:
                        nxt = a
                        break
                if nxt is not None:
                    break
            if nxt is None:
                break
            walk(nxt)

        code = tuple(
            tuple(new_arc[a] for a in self.crossings[ci].slots) for ci in cross_order
        )
        return code, new_arc, cross_order

    def canonical_form(self) -> "LinkDiagram":
        """Relabelled copy: arcs 1..E assigned by the minimal deterministic walk."""
        piece_best = []
        for piece in self._piece_partition():
            arcs_here = sorted(
                {a for ci in piece for a in self.crossings[ci].slots}
            )
            best = None
            for a0 in arcs_here:
                cand = self._encode_piece_from(a0)
                if best is None or cand[0] < best[0]:
                    best = cand
            piece_best.append(best)
        piece_best.sort(key=lambda b: (len(b[0]), b[0]))

        offset = 0
        new_crossings: list[tuple[int, int, int, int]] = []
        for code, _, _ in piece_best:
            for slots in code:
                new_crossings.append(tuple(x + offset for x in slots))
            offset += 2 * len(code)
        loops = tuple(range(offset + 1, offset + 1 + len(self.free_loops)))
        return LinkDiagram(
            [Crossing(slots, 1) for slots in new_crossings], loops
        )

    def canonical_arc_map(self) -> dict[int, int]:
        """Map from this diagram's labels (arcs and loop ids) to canonical labels."""
        piece_best = []
        for piece in self._piece_partition():
            arcs_here = sorted({a for ci in piece for a in self.crossings[ci].slots})
            best = None
            for a0 in arcs_here:
                cand = self._encode_piece_from(a0)
                if best is None or cand[0] < best[0]:
                    best = cand
            piece_best.append(best)
        piece_best.sort(key=lambda b: (len(b[0]), b[0]))
        mapping: dict[int, int] = {}
        offset = 0
        for code, new_arc, _ in piece_best:
            for old, new in new_arc.items():
                mapping[old] = new + offset
            offset += 2 * len(code)
        for i, loop in enumerate(self.free_loops):
            mapping[loop] = offset + 1 + i
        return mapping

    def serialize(self) -> str:
        """Canonical PD text: sorted canonical form, newline-terminated."""
        if self._canonical_text is None:
            canon = self.canonical_form() if (self.crossings or self.free_loops) else self
            lines = [
                "X " + " ".join(str(a) for a in c.slots) for c in canon.crossings
            ]
            lines += [f"O {n}" for n in canon.free_loops]
            self._canonical_text = "\n".join(lines) + ("\n" if lines else "")
        return self._canonical_text

    def __eq__(self, other):
        return isinstance(other, LinkDiagram) and self.serialize() == other.serialize()

    def __hash__(self):
        return hash(self.serialize())

    def __repr__(self):
        return (
            f"<LinkDiagram {len(self.crossings)} crossings, "
            f"{self.component_count} component(s)>"
        )


# -- parsing ----------------------------------------------------------------

_TOKEN_CLEAN = re.compile(r"[\[\](),]")


def parse_diagram(text: str) -> LinkDiagram:
    """Parse PD-code text into a validated LinkDiagram.

    Format: one record per line.  "X a b c d" is a crossing with arc labels
    counterclockwise from the incoming under-strand; "O n" is a crossingless
    free loop with id n; "#" starts a comment.
    """
    crossings: list[Crossing] = []
    loops: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = _TOKEN_CLEAN.sub(" ", line).split()
        kind = toks[0].upper()
        if kind == "X":
            if len(toks) != 5:
                raise MalformedCode(f"line {lineno}: crossing needs 4 arc labels")
            try:
                slots = tuple(int(t) for t in toks[1:])
            except ValueError:
                raise MalformedCode(f"line {lineno}: non-integer arc label") from None
            crossings.append(Crossing(slots, 1))
        elif kind == "O":
            if len(toks) != 2:
                raise MalformedCode(f"line {lineno}: free loop needs one id")
            try:
                loops.append(int(toks[1]))
            except ValueError:
                raise MalformedCode(f"line {lineno}: non-integer loop id") from None
        else:
            raise MalformedCode(f"line {lineno}: unknown record {toks[0]!r}")
    return LinkDiagram(crossings, loops)


def from_slots(slot_tuples: Iterable[tuple[int, int, int, int]],
               free_loops: Iterable[int] = ()) -> LinkDiagram:
    return LinkDiagram([Crossing(tuple(s), 1) for s in slot_tuples], list(free_loops))


# -- elementary constructions -------------------------------------------------


def component_count(d: LinkDiagram) -> int:
    return d.component_count


def mirror_inverse(d: LinkDiagram) -> LinkDiagram:
    """The reflected inverse -k*: swap over/under everywhere and reverse all
    orientations.  The planar rotation system is unchanged."""
    new = []
    for c in d.crossings:
        # After mirroring, the old over strand goes under; after reversing,
        # its old outgoing slot becomes the new under-in.  The cyclic slot
        # order is preserved (reflection through the projection plane).
        over_out = 1 if c.over_in_slot == 3 else 3
        s = c.slots
        rot = (s[over_out], s[(over_out + 1) % 4], s[(over_out + 2) % 4], s[(over_out + 3) % 4])
        new.append(rot)
    return from_slots(new, d.free_loops)


def _relabel(d: LinkDiagram, offset: int) -> list[tuple[int, int, int, int]]:
    return [tuple(a + offset for a in c.slots) for c in d.crossings]


def split_sum(d1: LinkDiagram, d2: LinkDiagram) -> LinkDiagram:
    d, _, _ = split_sum_with_maps(d1, d2)
    return d


def split_sum_with_maps(
    d1: LinkDiagram, d2: LinkDiagram
) -> tuple[LinkDiagram, dict[int, int], dict[int, int]]:
    """Disjoint union plus the label maps from each summand into the result."""
    max1 = max([*d1.arcs, *d1.free_loops], default=0)
    slots = [tuple(c.slots) for c in d1.crossings] + _relabel(d2, max1)
    loops = list(d1.free_loops) + [n + max1 for n in d2.free_loops]
    out = from_slots(slots, loops)
    map1 = {a: a for a in [*d1.arcs, *d1.free_loops]}
    map2 = {a: a + max1 for a in [*d2.arcs, *d2.free_loops]}
    return out, map1, map2


def connected_sum(
    d1: LinkDiagram, c1: int, d2: LinkDiagram, c2: int
) -> LinkDiagram:
    """Connected sum of knot component c1 of d1 with knot component c2 of d2,
    joined at each component's minimal arc respecting orientation."""
    for d, c in ((d1, c1), (d2, c2)):
        if not (0 <= c < d.component_count):
            raise NotAKnotComponent(f"no component {c}")
    if d1.component_count == 0 or d2.component_count == 0:
        raise NotAKnotComponent("cannot sum with an empty diagram")

    # A free-loop summand component contributes nothing: the sum is the other
    # diagram with remaining components carried along.
    if d1.is_free_loop_component(c1):
        loops1 = [n for n in d1.free_loops if n != d1.loop_id_of_component(c1)]
        rest = from_slots([c.slots for c in d1.crossings], loops1)
        return split_sum(rest, d2)
    if d2.is_free_loop_component(c2):
        loops2 = [n for n in d2.free_loops if n != d2.loop_id_of_component(c2)]
        rest = from_slots([c.slots for c in d2.crossings], loops2)
        return split_sum(d1, rest)

    merged, m1, m2 = split_sum_with_maps(d1, d2)
    x = m1[min(d1.components[c1])]
    y = m2[min(d2.components[c2])]

    # Cut x and y in the middle and cross-join: the half leaving x's start
    # continues into the half entering y's end (keeps label x), and the half
    # leaving y's start continues into x's end (label y).  Incoming slots of
    # x and y therefore swap labels.
    def rewrite(slots: tuple[int, ...], ci: int, diagram: LinkDiagram):
        out = []
        for s, a in enumerate(slots):
            if a == x:
                out.append(y if diagram.is_incoming(ci, s) else x)
            elif a == y:
                out.append(x if diagram.is_incoming(ci, s) else y)
            else:
                out.append(a)
        return tuple(out)

    slots = []
    for ci, c in enumerate(merged.crossings):
        slots.append(rewrite(c.slots, ci, merged))
    return from_slots(slots, merged.free_loops)


def linking_matrix(d: LinkDiagram) -> list[list[int]]:
    """Symmetric matrix of pairwise linking numbers (diagonal zero)."""
    n = d.component_count
    mat = [[0] * n for _ in range(n)]
    for c in d.crossings:
        under = d.comp_of_arc[c.slots[0]]
        over = d.comp_of_arc[c.slots[1]]
        if under != over:
            mat[under][over] += c.sign
            mat[over][under] += c.sign
    for i in range(n):
        for j in range(n):
            if i != j:
                q, r = divmod(mat[i][j], 2)
                if r:
                    raise NonPlanar("odd inter-component crossing sum")  # unreachable
                mat[i][j] = q
    return mat


class DeleteResult:
    """Surviving diagram plus label/position translation for the survivors."""

    def __init__(self):
        self.diagram: LinkDiagram | None = None
        self._arc_to: dict[int, tuple[int, int]] = {}  # old arc -> (new label, chain idx)
        self._loop_to: dict[int, int] = {}

    def translate_site(self, label: int, pos):
        from fractions import Fraction

        pos = Fraction(pos) if not isinstance(pos, Fraction) else pos
        if label in self._loop_to:
            return self._loop_to[label], pos
        if label not in self._arc_to:
            raise MalformedCode(f"label {label} did not survive the deletion")
        new_label, k = self._arc_to[label]
        squash = Fraction(1, 2) + pos / (2 * (1 + abs(pos)))
        return new_label, k + squash


def delete_components(d: LinkDiagram, comps: Iterable[int]) -> LinkDiagram:
    return delete_components_ex(d, comps).diagram


def delete_components_ex(d: LinkDiagram, comps: Iterable[int]) -> DeleteResult:
    """Remove whole components; strands that crossed them pass straight
    through, their arcs merging across the removed crossings."""
    res = DeleteResult()
    kill = set(comps)
    dead_arcs = {a for a in d.arcs if d.comp_of_arc[a] in kill}
    kept_loops = [n for n in d.free_loops if d.comp_of_loop[n] not in kill]

    def crossing_dies(ci: int) -> bool:
        c = d.crossings[ci]
        return c.slots[0] in dead_arcs or c.slots[1] in dead_arcs

    survivors = [a for a in sorted(d.arcs) if a not in dead_arcs]
    # Chains of surviving arcs merged across dying crossings, in strand order.
    merges_into_next: dict[int, int] = {}
    has_pred: set[int] = set()
    for a in survivors:
        _, (ci, _) = d.arc_endpoints(a)
        if crossing_dies(ci):
            b = d.successor[a]
            if b not in dead_arcs:
                merges_into_next[a] = b
                has_pred.add(b)

    chains: list[list[int]] = []
    chain_of: dict[int, tuple[int, int]] = {}
    seen: set[int] = set()
    for a in survivors:
        if a in seen or a in has_pred:
            continue
        chain = [a]
        seen.add(a)
        cur = a
        while cur in merges_into_next:
            cur = merges_into_next[cur]
            if cur in seen:
                break
            chain.append(cur)
            seen.add(cur)
        chains.append(chain)
    for a in survivors:  # cyclic chains (fully spliced components)
        if a in seen:
            continue
        chain = [a]
        seen.add(a)
        cur = merges_into_next[a]
        while cur != a:
            chain.append(cur)
            seen.add(cur)
            cur = merges_into_next[cur]
        chains.append(chain)

    raw_label: dict[int, tuple[int, int]] = {}
    for li, chain in enumerate(chains, start=1):
        for k, a in enumerate(chain):
            raw_label[a] = (li, k)

    new_slots = []
    for ci, c in enumerate(d.crossings):
        if crossing_dies(ci):
            continue
        new_slots.append(tuple(raw_label[a][0] for a in c.slots))
    touched = {x for slots in new_slots for x in slots}
    loop_raw: dict[int, int] = {}
    next_label = len(chains) + 1
    for li, chain in enumerate(chains, start=1):
        if li not in touched:
            loop_raw[li] = li  # spliced-away component becomes a free loop
    raw_loops = sorted(loop_raw.values())
    for n in kept_loops:
        loop_raw[("kept", n)] = next_label  # type: ignore[index]
        raw_loops.append(next_label)
        next_label += 1

    raw = from_slots(new_slots, raw_loops)
    cmap = raw.canonical_arc_map()
    res.diagram = raw.canonical_form()
    for a, (lbl, k) in raw_label.items():
        res._arc_to[a] = (cmap[lbl], k)
    for n in kept_loops:
        res._loop_to[n] = cmap[loop_raw[("kept", n)]]  # type: ignore[index]
    return res
