"""Bands as framed arcs and band surgery as a PD-code rewrite.

A band is combinatorial: two attach sites (arc, position key, side), an
ordered core route (which arcs the core crosses, over or under, from which
side), and a signed half-twist count.  Surgery cuts the two attach intervals
and reroutes the link along the band's two parallel boundary edges; every
route event becomes two crossings (one per edge), every half twist one
crossing between the edges.

Positions are exact Fractions and only their relative order along an arc
matters.  Twist crossings are emitted after the last route event of their
band.  Inter-band core crossings are not expressible: band systems applied
together must have disjoint cores (their marks may share arcs but not
positions).

The rewrite returns rich provenance (ApplyResult): component images, site
translators into the surgered diagram, and the dual band of each applied
band (route-free, attached across the band's own edges next to end 0), which
is what undoes the surgery and what fission steps are built from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .diagram import LinkDiagram, from_slots
from .errors import (
    IncoherentBandOrientation,
    InvalidAttachSite,
    NotAFusion,
    NotTrivialPattern,
    OverlappingBands,
)


def _as_frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise InvalidAttachSite(f"bad position value {x!r}")


def _squash(p: Fraction) -> Fraction:
    """Monotone map from all of Q into (0, 1); used to nest position keys."""
    return Fraction(1, 2) + p / (2 * (1 + abs(p)))


@dataclass(frozen=True)
class AttachSite:
    arc: int
    pos: Fraction
    side: str  # "L" or "R" of the oriented strand

    def __post_init__(self):
        object.__setattr__(self, "pos", _as_frac(self.pos))
        if self.side not in ("L", "R"):
            raise InvalidAttachSite(f"side must be L or R, got {self.side!r}")

    def to_json(self) -> dict:
        return {"arc": self.arc, "pos": _frac_json(self.pos), "side": self.side}


@dataclass(frozen=True)
class RouteEvent:
    arc: int
    over: bool  # True: band core passes over the crossed arc
    pos: Fraction
    side: str  # side of the crossed arc the core arrives from

    def __post_init__(self):
        object.__setattr__(self, "pos", _as_frac(self.pos))
        if self.side not in ("L", "R"):
            raise InvalidAttachSite(f"side must be L or R, got {self.side!r}")

    def to_json(self) -> dict:
        return {
            "arc": self.arc,
            "over": self.over,
            "pos": _frac_json(self.pos),
            "side": self.side,
        }


@dataclass(frozen=True)
class Band:
    end0: AttachSite
    end1: AttachSite
    core: tuple[RouteEvent, ...] = ()
    half_twists: int = 0

    def __post_init__(self):
        object.__setattr__(self, "core", tuple(self.core))

    @property
    def orientation_coherent(self) -> bool:
        """Attachment is compatible with the link orientations iff the two
        sides agree exactly when the twist count is even."""
        return (self.end0.side == self.end1.side) == (self.half_twists % 2 == 0)

    def to_json(self) -> dict:
        return {
            "ends": [self.end0.to_json(), self.end1.to_json()],
            "core": [e.to_json() for e in self.core],
            "half_twists": self.half_twists,
        }

    @staticmethod
    def from_json(obj: dict) -> "Band":
        ends = obj["ends"]
        sites = []
        for i, e in enumerate(ends):
            sites.append(
                AttachSite(
                    arc=int(e["arc"]),
                    pos=_frac_parse(e.get("pos", i)),
                    side=e.get("side", "L"),
                )
            )
        core = []
        for i, e in enumerate(obj.get("core", [])):
            core.append(
                RouteEvent(
                    arc=int(e["arc"]),
                    over=bool(e["over"]),
                    pos=_frac_parse(e.get("pos", i)),
                    side=e.get("side", "L"),
                )
            )
        return Band(sites[0], sites[1], tuple(core), int(obj.get("half_twists", 0)))


def _frac_json(p: Fraction):
    return int(p) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def _frac_parse(x) -> Fraction:
    return _as_frac(x)


def _flip(side: str) -> str:
    return "R" if side == "L" else "L"


# -- the rewrite -------------------------------------------------------------


class ApplyResult:
    """Surgered diagram plus the provenance needed by everything downstream."""

    def __init__(self):
        self.diagram: LinkDiagram | None = None
        self._arc_pieces: dict[int, list[int]] = {}
        self._arc_marks: dict[int, list[Fraction]] = {}
        self._loop_cyclic: set[int] = set()
        self._piece_chain: dict[int, tuple[int, int]] = {}  # piece -> (label, index)
        self._label_map: dict[int, int] = {}  # raw label -> canonical label
        self._untouched: dict[int, int] = {}  # untouched input label -> canonical
        self._comp_pre: dict[int, set[int]] = {}  # out comp -> in comps
        self._comp_bands: dict[int, set[int]] = {}  # out comp -> band indexes
        self._band_feet_comps: dict[int, set[int]] = {}
        self._dual_sites: dict[int, tuple] = {}
        self._piece_tag: list[tuple] = []

    # translation ----------------------------------------------------------

    def translate_site(self, arc: int, pos: Fraction) -> tuple[int, Fraction]:
        """Image of a point (arc, pos) of the input in the output diagram."""
        pos = _as_frac(pos)
        if arc in self._untouched:
            return self._untouched[arc], pos
        if arc not in self._arc_pieces:
            raise InvalidAttachSite(f"label {arc} not in the surgered diagram")
        marks = self._arc_marks[arc]
        pieces = self._arc_pieces[arc]
        if arc in self._loop_cyclic:
            # pieces[j] covers (marks[j], marks[j+1]); the last wraps around.
            idx = None
            for j in range(len(marks) - 1):
                if marks[j] < pos < marks[j + 1]:
                    idx = j
                    break
            if idx is None:
                if pos == marks[0] or pos in marks:
                    raise OverlappingBands(f"position {pos} collides with a mark")
                idx = len(marks) - 1
                if pos > marks[-1]:
                    local = (_squash(pos) - _squash(marks[-1])) / 2
                else:
                    local = Fraction(1, 2) + _squash(pos) / 2
                label, k = self._piece_chain[pieces[idx]]
                return label, k + local
        else:
            idx = 0
            while idx < len(marks) and pos > marks[idx]:
                idx += 1
            if idx < len(marks) and pos == marks[idx]:
                raise OverlappingBands(f"position {pos} collides with a mark")
        label, k = self._piece_chain[pieces[idx]]
        return label, k + _squash(pos)

    def translate_attach(self, site: AttachSite) -> AttachSite:
        arc, pos = self.translate_site(site.arc, site.pos)
        return AttachSite(arc, pos, site.side)

    def translate_event(self, ev: RouteEvent) -> RouteEvent:
        arc, pos = self.translate_site(ev.arc, ev.pos)
        return RouteEvent(arc, ev.over, pos, ev.side)

    # components -------------------------------------------------------------

    def comp_preimage(self, out_comp: int) -> set[int]:
        return set(self._comp_pre.get(out_comp, set()))

    def comp_image(self, in_comp: int) -> set[int]:
        return {c for c, pre in self._comp_pre.items() if in_comp in pre}

    def comp_bands(self, out_comp: int) -> set[int]:
        return set(self._comp_bands.get(out_comp, set()))

    def band_feet_comps(self, bi: int) -> set[int]:
        return set(self._band_feet_comps[bi])

    def dual_band(self, bi: int) -> Band:
        """Route-free band across the applied band's edges, next to end 0.

        Applying it to the surgered diagram undoes the fusion or fission up
        to crossingless wiggles on the end-0 side.
        """
        (arc_l, pos_l, side_l), (arc_r, pos_r, side_r) = self._dual_sites[bi]
        return Band(AttachSite(arc_l, pos_l, side_l), AttachSite(arc_r, pos_r, side_r))

    def pullback_site(self, label: int, pos: Fraction):
        """Inverse of translate_site at interval resolution.

        Returns (input label, representative position) for a point of the
        output diagram that descends from an input arc or free loop, or None
        if the point lies on a band edge.  The representative position is any
        fresh position inside the same inter-mark interval of the source.
        """
        pos = _as_frac(pos)
        for n, lbl in self._untouched.items():
            if lbl == label:
                return n, pos
        k = None
        piece = None
        for p, (lbl, idx) in self._piece_chain.items():
            if lbl == label and idx == int(pos):
                piece = p
                k = idx
                break
        if piece is None:
            raise InvalidAttachSite(f"no piece at ({label}, {pos})")
        tag = self._piece_tag[piece]
        if tag[0] == "band":
            return None
        if tag[0] == "mid":
            return None
        kind, x, j = tag
        ms = self._arc_marks[x]
        if kind == "arc":
            if not ms:
                return x, Fraction(0)
            if j == 0:
                return x, ms[0] - 1
            if j == len(ms):
                return x, ms[-1] + 1
            return x, (ms[j - 1] + ms[j]) / 2
        # free loop piece j covers (ms[j], ms[j+1]); the last wraps
        if j == len(ms) - 1:
            return x, ms[-1] + 1
        return x, (ms[j] + ms[j + 1]) / 2


def apply_bands(d: LinkDiagram, bands: Sequence[Band]) -> LinkDiagram:
    return apply_bands_ex(d, bands).diagram


def apply_bands_ex(d: LinkDiagram, bands: Sequence[Band]) -> ApplyResult:
    bands = list(bands)
    for b in bands:
        if not b.orientation_coherent:
            raise IncoherentBandOrientation(
                "band sides/twists incompatible with link orientations"
            )

    # ---- collect marks per label -----------------------------------------
    # mark = (pos, kind, payload); kind "attach": payload (bi, end_index)
    #                              kind "route":  payload (bi, event_index)
    marks: dict[int, list[tuple[Fraction, str, tuple]]] = {}
    labels_ok = set(d.arcs) | set(d.free_loops)

    def add_mark(label, pos, kind, payload):
        if label not in labels_ok:
            raise InvalidAttachSite(f"label {label} not in the diagram")
        marks.setdefault(label, []).append((pos, kind, payload))

    for bi, b in enumerate(bands):
        add_mark(b.end0.arc, b.end0.pos, "attach", (bi, 0))
        add_mark(b.end1.arc, b.end1.pos, "attach", (bi, 1))
        for ei, ev in enumerate(b.core):
            add_mark(ev.arc, ev.pos, "route", (bi, ei))
    for label, ms in marks.items():
        ms.sort(key=lambda m: m[0])
        for a, b2 in zip(ms, ms[1:]):
            if a[0] == b2[0]:
                raise OverlappingBands(
                    f"two marks share position {a[0]} on label {label}"
                )

    res = ApplyResult()

    # ---- pieces, ports, joins ---------------------------------------------
    n_old = len(d.crossings)
    slots_matrix: list[list[int | None]] = [[None] * 4 for _ in range(n_old)]
    piece_tag: list[tuple] = []

    def new_piece(tag) -> int:
        piece_tag.append(tag)
        return len(piece_tag) - 1

    head_join: dict[int, int] = {}  # head of piece glued to tail of value
    tail_join: dict[int, int] = {}
    head_port: dict[int, tuple[int, int]] = {}
    tail_port: dict[int, tuple[int, int]] = {}

    def join(a: int, b: int):
        if a in head_join or a in head_port or b in tail_join or b in tail_port:
            raise OverlappingBands("conflicting junction wiring")
        head_join[a] = b
        tail_join[b] = a

    def set_head_port(p: int, ci: int, slot: int):
        head_port[p] = (ci, slot)
        slots_matrix[ci][slot] = p

    def set_tail_port(p: int, ci: int, slot: int):
        tail_port[p] = (ci, slot)
        slots_matrix[ci][slot] = p

    def new_crossing() -> int:
        slots_matrix.append([None] * 4)
        return len(slots_matrix) - 1

    # route-mark crossings: (bi, ei) -> {"L": (ci, ports), "R": ...}
    route_cross: dict[tuple[int, int], dict[str, int]] = {}
    # junction endpoints per (bi, end): ("minus": piece whose head feeds in,
    #                                    "plus": piece whose tail flows out)
    cut_minus: dict[tuple[int, int], int] = {}
    cut_plus: dict[tuple[int, int], int] = {}

    forward_copy: dict[int, str] = {}
    for bi, b in enumerate(bands):
        forward_copy[bi] = "L" if b.end0.side == "L" else "R"
        res._band_feet_comps[bi] = {
            d.component_of(b.end0.arc),
            d.component_of(b.end1.arc),
        }

    def route_tuple(o: bool, sd_eff: str):
        """Slot roles counterclockwise from under-in, in the strand frames.

        Roles: "xi"/"xo" = crossed arc in/out, "bi"/"bo" = band edge in/out.
        """
        if sd_eff == "L":
            return ("xi", "bo", "xo", "bi") if o else ("bi", "xi", "bo", "xo")
        return ("xi", "bi", "xo", "bo") if o else ("bi", "xo", "bo", "xi")

    def expand_arc(label: int, ms, cyclic: bool, strand_comp: int):
        """Subdivide one marked label into pieces and wire route crossings."""
        q = len(ms)
        if cyclic:
            pieces = [new_piece(("loop", label, j)) for j in range(q)]
        else:
            pieces = [new_piece(("arc", label, j)) for j in range(q + 1)]
        res._arc_pieces[label] = pieces
        res._arc_marks[label] = [m[0] for m in ms]
        if cyclic:
            res._loop_cyclic.add(label)

        def before(j):  # piece whose head meets mark j
            return pieces[j - 1] if not cyclic else pieces[j - 1]

        def after(j):  # piece whose tail leaves mark j
            return pieces[j] if not cyclic else pieces[j % q]

        for j, (pos, kind, payload) in enumerate(ms, start=1):
            p_before = before(j) if not cyclic else pieces[j - 2] if q > 1 else pieces[0]
            p_after = after(j) if not cyclic else pieces[j - 1]
            if kind == "attach":
                cut_minus[payload] = p_before
                cut_plus[payload] = p_after
            else:
                bi, ei = payload
                ev = bands[bi].core[ei]
                c_first, c_second = new_crossing(), new_crossing()
                mid = new_piece(("mid", label, ei))
                # order of the copies along the crossed strand
                first_copy = "R" if ev.side == "L" else "L"
                second_copy = "L" if ev.side == "L" else "R"
                route_cross[(bi, ei)] = {
                    first_copy: c_first,
                    second_copy: c_second,
                }
                for ci, (pb, pa) in ((c_first, (p_before, mid)), (c_second, (mid, p_after))):
                    copy = first_copy if ci == c_first else second_copy
                    fwd = forward_copy[bi] == copy
                    sd_eff = ev.side if fwd else _flip(ev.side)
                    roles = route_tuple(ev.over, sd_eff)
                    set_head_port(pb, ci, roles.index("xi"))
                    set_tail_port(pa, ci, roles.index("xo"))

    for label, ms in marks.items():
        if label in d.free_loops:
            expand_arc(label, ms, True, d.component_of(label))
        else:
            expand_arc(label, ms, False, d.component_of(label))

    # untouched arcs become single pieces; untouched loops pass through
    for a in sorted(d.arcs):
        if a not in marks:
            p = new_piece(("arc", a, 0))
            res._arc_pieces[a] = [p]
            res._arc_marks[a] = []
    passthrough_loops = [n for n in d.free_loops if n not in marks]

    # old crossing ports
    for a in sorted(d.arcs):
        pieces = res._arc_pieces[a]
        (ci0, s0), (ci1, s1) = d.arc_endpoints(a)
        set_tail_port(pieces[0], ci0, s0)
        set_head_port(pieces[-1], ci1, s1)

    # ---- band copies --------------------------------------------------------
    for bi, b in enumerate(bands):
        n_twists = abs(b.half_twists)
        fwd = forward_copy[bi]

        twist_cross = [new_crossing() for _ in range(n_twists)]
        seg_count = len(b.core) + n_twists + 1
        segs = {
            "L": [new_piece(("band", bi, "L", j)) for j in range(seg_count)],
            "R": [new_piece(("band", bi, "R", j)) for j in range(seg_count)],
        }

        def wire_copy_through(copy: str, j: int, ci: int, roles_in: int, roles_out: int):
            """Connect walk-segments j-1.. wait handled inline."""

        # Walk both copies through their crossings, wiring segment ends.
        # Segment j of a copy sits between crossing j-1 and crossing j in walk
        # order.  For the forward copy strand direction == walk direction;
        # for the backward copy every port role is reversed.
        for copy in ("L", "R"):
            is_fwd = copy == fwd
            cross_seq: list[tuple[int, int, int]] = []  # (ci, in_slot, out_slot)
            for ei, ev in enumerate(b.core):
                ci = route_cross[(bi, ei)][copy]
                sd_eff = ev.side if is_fwd else _flip(ev.side)
                roles = route_tuple(ev.over, sd_eff)
                cross_seq.append((ci, roles.index("bi"), roles.index("bo")))
            # Twist crossings are wired once below (they involve both copies).
            for j, (ci, s_in, s_out) in enumerate(cross_seq):
                seg_a, seg_b = segs[copy][j], segs[copy][j + 1]
                if is_fwd:
                    set_head_port(seg_a, ci, s_in)
                    set_tail_port(seg_b, ci, s_out)
                else:
                    # walk passes strand-out first
                    set_tail_port(seg_a, ci, s_out)
                    set_head_port(seg_b, ci, s_in)

        # twist crossings: walkers swap sides at each
        left_walker = "L"
        for j, ci in enumerate(twist_cross):
            right_walker = "R" if left_walker == "L" else "L"
            case_a = forward_copy[bi] == left_walker  # left walker is forward
            positive = b.half_twists > 0
            # Ports by compass: NW/SE belong to the left walker, SW/NE right.
            if case_a:
                tuple_ports = ("NE", "NW", "SW", "SE") if positive else ("NW", "SW", "SE", "NE")
            else:
                tuple_ports = ("SW", "SE", "NE", "NW") if positive else ("SE", "NE", "NW", "SW")
            slot_of = {p: s for s, p in enumerate(tuple_ports)}
            k = len(b.core) + j
            for walker, (p_in, p_out) in (
                (left_walker, ("NW", "SE")),
                (right_walker, ("SW", "NE")),
            ):
                # p_in / p_out are the walker's walk-entry and walk-exit port
                # positions; for the backward copy the strand leaves through
                # the walk-entry side.
                seg_a, seg_b = segs[walker][k], segs[walker][k + 1]
                if walker == forward_copy[bi]:
                    set_head_port(seg_a, ci, slot_of[p_in])
                    set_tail_port(seg_b, ci, slot_of[p_out])
                else:
                    set_tail_port(seg_a, ci, slot_of[p_in])
                    set_head_port(seg_b, ci, slot_of[p_out])
            left_walker = right_walker

        # end-0 junctions
        if b.end0.side == "L":
            start_into, start_outof = "L", "R"  # copyL receives the strand
        else:
            start_into, start_outof = "R", "L"
        join(cut_minus[(bi, 0)], segs[start_into][0])
        join(segs[start_outof][0], cut_plus[(bi, 0)])

        # end-1 junctions: after the twists the walkers may have swapped
        final_left = "L" if n_twists % 2 == 0 else "R"
        final_right = "R" if final_left == "L" else "L"
        if b.end1.side == "L":
            into_plus, outof_minus = final_left, final_right
        else:
            into_plus, outof_minus = final_right, final_left
        join(segs[into_plus][-1], cut_plus[(bi, 1)])
        join(cut_minus[(bi, 1)], segs[outof_minus][-1])

        # dual band sites sit on segment 0 of each copy
        dual_info = []
        for copy in ("L", "R"):
            is_fwd = copy == fwd
            if copy == "L":
                side = "R" if is_fwd else "L"
            else:
                side = "L" if is_fwd else "R"
            dual_info.append((segs[copy][0], side))
        res._dual_sites[bi] = tuple(dual_info)  # finalized after chain labels

    # ---- assemble chains ----------------------------------------------------
    n_pieces = len(piece_tag)
    for p in range(n_pieces):
        if (p in head_join) == (p in head_port) or (p in tail_join) == (p in tail_port):
            raise OverlappingBands("piece wiring incomplete")  # internal check

    label_of_piece: dict[int, tuple[int, int]] = {}
    raw_slots: list[list[int]] = []
    next_label = 1
    free_out: list[int] = []

    visited: set[int] = set()
    for p in range(n_pieces):
        if p in visited or p in tail_join:
            continue
        # chain start: piece whose tail is a port
        chain = [p]
        visited.add(p)
        cur = p
        while cur in head_join:
            cur = head_join[cur]
            chain.append(cur)
            visited.add(cur)
        label = next_label
        next_label += 1
        for k, piece in enumerate(chain):
            label_of_piece[piece] = (label, k)
    closed_chains = []
    for p in range(n_pieces):
        if p in visited:
            continue
        chain = [p]
        visited.add(p)
        cur = head_join[p]
        while cur != p:
            chain.append(cur)
            visited.add(cur)
            cur = head_join[cur]
        closed_chains.append(chain)

    # crossing slot tuples in raw labels
    slot_tuples = []
    for ci, row in enumerate(slots_matrix):
        if any(x is None for x in row):
            raise OverlappingBands("crossing port left unwired")  # internal check
        slot_tuples.append(tuple(label_of_piece[p][0] for p in row))

    # closed chains and passthrough loops become free loops
    loop_labels = []
    for chain in closed_chains:
        label = next_label
        next_label += 1
        for k, piece in enumerate(chain):
            label_of_piece[piece] = (label, k)
        loop_labels.append(label)
    pass_map = {}
    for n in passthrough_loops:
        label = next_label
        next_label += 1
        loop_labels.append(label)
        pass_map[n] = label

    raw = from_slots(slot_tuples, loop_labels)
    canon_map = raw.canonical_arc_map()
    out = raw.canonical_form()
    res.diagram = out

    # compose provenance maps
    res._piece_chain = {
        p: (canon_map[lbl], k) for p, (lbl, k) in label_of_piece.items()
    }
    res._piece_tag = piece_tag
    res._untouched = {n: canon_map[lbl] for n, lbl in pass_map.items()}

    # dual sites: (arc, pos, side) per copy
    for bi in list(res._dual_sites):
        info = []
        for piece, side in res._dual_sites[bi]:
            label, k = res._piece_chain[piece]
            info.append((label, Fraction(2 * k + 1, 2), side))
        res._dual_sites[bi] = tuple(info)

    # component provenance
    comp_pre: dict[int, set[int]] = {}
    comp_bands: dict[int, set[int]] = {}
    for p, tag in enumerate(piece_tag):
        label, _ = res._piece_chain[p]
        oc = out.component_of(label)
        if tag[0] in ("arc", "mid"):
            comp_pre.setdefault(oc, set()).add(d.component_of(tag[1]))
        elif tag[0] == "loop":
            comp_pre.setdefault(oc, set()).add(d.component_of(tag[1]))
        else:
            comp_bands.setdefault(oc, set()).add(tag[1])
            comp_pre.setdefault(oc, set())
    for n, lbl in res._untouched.items():
        oc = out.component_of(lbl)
        comp_pre.setdefault(oc, set()).add(d.component_of(n))
    # bands connect their feet components within their surface piece
    for oc, bis in comp_bands.items():
        for bi in bis:
            comp_pre[oc] |= res._band_feet_comps[bi]
    res._comp_pre = comp_pre
    res._comp_bands = comp_bands
    return res


# -- classification -----------------------------------------------------------


def predict_component_delta(d: LinkDiagram, b: Band) -> int:
    """-1 if the ends sit on distinct components, +1 for a coherent self-band."""
    if not b.orientation_coherent:
        raise IncoherentBandOrientation("incoherent band")
    c0 = d.component_of(b.end0.arc)
    c1 = d.component_of(b.end1.arc)
    return -1 if c0 != c1 else 1


def classify_step(d: LinkDiagram, bands: Sequence[Band], result: ApplyResult | None = None) -> str:
    """Fusion / Fission / GenusAddition / Mixed per the component-count rules."""
    if result is None:
        result = apply_bands_ex(d, bands)
    r = d.component_count
    r2 = result.diagram.component_count
    m = len(bands)
    if r2 == r - m:
        return "fusion"
    if r2 == r + m:
        return "fission"
    if r2 == r:
        # genus addition: every band on a single component, and each input
        # component maps onto exactly one output component
        for bi, b in enumerate(bands):
            feet = result.band_feet_comps(bi)
            if len(feet) != 1:
                return "mixed"
        for c in range(r):
            if len(result.comp_image(c)) != 1:
                return "mixed"
        return "genus-addition"
    return "mixed"


def band_sum(
    d: LinkDiagram,
    o: LinkDiagram,
    bands: Sequence[Band],
) -> LinkDiagram:
    return band_sum_ex(d, o, bands)[0].diagram


def band_sum_ex(
    d: LinkDiagram, o: LinkDiagram, bands: Sequence[Band]
) -> tuple[ApplyResult, LinkDiagram, list[Band]]:
    """Fusion of the split sum d + o along one band per component of o.

    Band coordinates: end0 on a free loop of o (o's own labels), end1 and all
    route events in the labels of d.  Returns the apply provenance, the split
    sum, and the remapped bands.
    """
    from .diagram import split_sum_with_maps

    if o.crossings:
        raise NotTrivialPattern("band-sum pattern link must be crossingless")
    if len(bands) != len(o.free_loops):
        raise NotAFusion("need exactly one band per pattern circle")
    merged, m1, m2 = split_sum_with_maps(d, o)
    seen = set()
    remapped = []
    for b in bands:
        if b.end0.arc not in o.free_loops:
            raise NotAFusion("band end 0 must attach to the pattern circle")
        if b.end0.arc in seen:
            raise NotAFusion("two bands attach to one pattern circle")
        seen.add(b.end0.arc)
        end0 = AttachSite(m2[b.end0.arc], b.end0.pos, b.end0.side)
        end1 = AttachSite(m1[b.end1.arc], b.end1.pos, b.end1.side)
        core = tuple(
            RouteEvent(
                m1[e.arc] if e.arc in m1 else m2[e.arc], e.over, e.pos, e.side
            )
            for e in b.core
        )
        remapped.append(Band(end0, end1, core, b.half_twists))
    result = apply_bands_ex(merged, remapped)
    if classify_step(merged, remapped, result) != "fusion":
        raise NotAFusion("band sum must classify as a fusion")
    return result, merged, remapped


def mirror_band(b: Band) -> Band:
    """Image of a band under mirror_inverse: the planar picture is unchanged,
    so strand-relative sides flip with the orientations, over/under flips
    with the reflection, and twist handedness negates."""
    def flip_site(s: AttachSite) -> AttachSite:
        return AttachSite(s.arc, s.pos, _flip(s.side))

    core = tuple(
        RouteEvent(e.arc, not e.over, e.pos, _flip(e.side)) for e in b.core
    )
    return Band(flip_site(b.end0), flip_site(b.end1), core, -b.half_twists)
