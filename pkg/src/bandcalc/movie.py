"""Realizing surfaces as level-set movies in R^3 x [s, u].

A movie is a band sequence laid out over an interval: constant diagram on
product regions, one band event per step at the midpoint of its sub-interval,
optional cap-disk systems at the bottom/top.  Times are exact rationals.

Surface topology is computed combinatorially: union-find over
(level, link-component) pieces merged at band events, Euler characteristic
caps - bands, boundary circles are the uncapped ends, genus per component
from chi = 2 - 2g - b.  Nothing here needs the planar data of the level
diagrams beyond cap validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .bands import Band
from .diagram import LinkDiagram, parse_diagram
from .errors import EmptySequence, EpsilonTooLarge, NotTrivialAtLevel
from .sequences import BandSequence, SurgeryStep


@dataclass(frozen=True)
class SurfaceTopology:
    euler: int
    components: int
    boundary_circles: int
    orientable: bool
    genus_per_component: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "euler": self.euler,
            "components": self.components,
            "boundary_circles": self.boundary_circles,
            "orientable": self.orientable,
            "genus_per_component": list(self.genus_per_component),
        }


class SurfaceMovie:
    def __init__(
        self,
        seq: BandSequence,
        s: Fraction,
        u: Fraction,
        bottom_caps: tuple[int, ...] = (),
        top_caps: tuple[int, ...] = (),
        epsilon: Fraction | None = None,
    ):
        if s >= u:
            raise EmptySequence("need s < u")
        self.seq = seq
        self.s = Fraction(s)
        self.u = Fraction(u)
        self.bottom_caps = tuple(sorted(bottom_caps))
        self.top_caps = tuple(sorted(top_caps))
        self.epsilon = None if epsilon is None else Fraction(epsilon)
        if self.epsilon is not None and not self.bottom_caps:
            raise NotTrivialAtLevel("epsilon set without bottom caps")

    # -- structure ------------------------------------------------------------

    @property
    def levels(self) -> list[tuple[Fraction, LinkDiagram]]:
        diagrams = self.seq.diagrams
        n = max(1, len(self.seq.steps))
        width = (self.u - self.s) / n
        out = []
        for k, d in enumerate(diagrams):
            out.append((self.s + min(k, n) * width, d))
        return out

    @property
    def band_event_times(self) -> list[Fraction]:
        n = len(self.seq.steps)
        if n == 0:
            return []
        width = (self.u - self.s) / n
        return [self.s + width * Fraction(2 * k + 1, 2) for k in range(n)]

    @property
    def first_event_time(self) -> Fraction | None:
        times = self.band_event_times
        return times[0] if times else None

    def events(self) -> list[dict]:
        out = []
        if self.bottom_caps:
            t = self.s if self.epsilon is None else self.s + self.epsilon
            out.append(
                {"t": t, "kind": "caps_bottom", "components": list(self.bottom_caps)}
            )
        for t, step in zip(self.band_event_times, self.seq.steps):
            out.append(
                {
                    "t": t,
                    "kind": "bands",
                    "reversed": step.reversed,
                    "bands": [b.to_json() for b in step.bands],
                }
            )
        if self.top_caps:
            out.append({"t": self.u, "kind": "caps_top", "components": list(self.top_caps)})
        return out

    # -- operations -------------------------------------------------------------

    def with_caps(self, bottom: Iterable[int], top: Iterable[int]) -> "SurfaceMovie":
        bottom = tuple(sorted(set(self.bottom_caps) | set(bottom)))
        top = tuple(sorted(set(self.top_caps) | set(top)))
        _check_cappable(self.seq.initial, bottom)
        _check_cappable(self.seq.final, top)
        return SurfaceMovie(self.seq, self.s, self.u, bottom, top, self.epsilon)

    def with_epsilon(self, eps: Fraction) -> "SurfaceMovie":
        eps = Fraction(eps)
        if not self.bottom_caps:
            raise NotTrivialAtLevel("no bottom caps to raise")
        first = self.first_event_time
        gap = (first - self.s) if first is not None else (self.u - self.s)
        if not (0 < eps < gap):
            raise EpsilonTooLarge(f"need 0 < eps < {gap}")
        return SurfaceMovie(self.seq, self.s, self.u, self.bottom_caps, self.top_caps, eps)

    # -- topology -----------------------------------------------------------------

    def topology(self) -> SurfaceTopology:
        diagrams = self.seq.diagrams
        L = len(diagrams) - 1

        parent: dict[tuple[int, int], tuple[int, int]] = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        for lvl, d in enumerate(diagrams):
            for c in d.all_component_ids():
                find((lvl, c))
        for i, step in enumerate(self.seq.steps):
            for c2 in diagrams[i + 1].all_component_ids():
                for c in step.comp_preimage(c2):
                    union((i, c), (i + 1, c2))

        chi: dict[tuple[int, int], int] = {}
        boundary: dict[tuple[int, int], int] = {}
        bands_per: dict[tuple[int, int], int] = {}

        for i, step in enumerate(self.seq.steps):
            base_lvl = i + 1 if step.reversed else i
            for bi in range(len(step.bands)):
                feet = step.band_base_feet(bi)
                root = find((base_lvl, next(iter(feet))))
                bands_per[root] = bands_per.get(root, 0) + 1

        for c in diagrams[0].all_component_ids():
            root = find((0, c))
            if c in self.bottom_caps:
                chi[root] = chi.get(root, 0) + 1
            else:
                boundary[root] = boundary.get(root, 0) + 1
        for c in diagrams[L].all_component_ids():
            root = find((L, c))
            if c in self.top_caps:
                chi[root] = chi.get(root, 0) + 1
            else:
                boundary[root] = boundary.get(root, 0) + 1

        roots = sorted({find(x) for x in parent})
        total_chi = 0
        total_boundary = 0
        genus = []
        for r in roots:
            x = chi.get(r, 0) - bands_per.get(r, 0)
            b = boundary.get(r, 0)
            total_chi += x
            total_boundary += b
            g2 = 2 - b - x
            if g2 % 2:
                raise NotTrivialAtLevel("non-orientable bookkeeping")  # unreachable
            genus.append(g2 // 2)
        return SurfaceTopology(
            euler=total_chi,
            components=len(roots),
            boundary_circles=total_boundary,
            orientable=True,
            genus_per_component=tuple(sorted(genus)),
        )

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        obj = {
            "interval": [_frac(self.s), _frac(self.u)],
            "levels": [
                {"t": _frac(t), "diagram": d.serialize()} for t, d in self.levels
            ],
            "events": [
                {**e, "t": _frac(e["t"])} for e in self.events()
            ],
            "sequence": self.seq.to_json(),
        }
        if self.epsilon is not None:
            obj["epsilon"] = _frac(self.epsilon)
        return obj

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(obj: dict) -> "SurfaceMovie":
        seq = BandSequence.from_json(obj["sequence"])
        s = Fraction(str(obj["interval"][0]))
        u = Fraction(str(obj["interval"][1]))
        bottom: tuple[int, ...] = ()
        top: tuple[int, ...] = ()
        for e in obj.get("events", []):
            if e["kind"] == "caps_bottom":
                bottom = tuple(e["components"])
            elif e["kind"] == "caps_top":
                top = tuple(e["components"])
        eps = Fraction(str(obj["epsilon"])) if "epsilon" in obj else None
        movie = SurfaceMovie(seq, s, u, bottom, top, eps)
        # levels and band events are derived data; verify they match
        expect = [{**e, "t": _frac(e["t"])} for e in movie.events()]
        got = obj.get("events", [])
        if expect != got:
            raise EmptySequence("movie events do not match its sequence")
        return movie

    @staticmethod
    def loads(text: str) -> "SurfaceMovie":
        return SurfaceMovie.from_json(json.loads(text))


def _frac(x: Fraction):
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# -- operations of the movie module ------------------------------------------


def realize(seq: BandSequence, s: Fraction = 0, u: Fraction = 1) -> SurfaceMovie:
    """Realizing surface of a sequence over [s, u]: uniform sub-intervals,
    band events at their midpoints, no caps."""
    return SurfaceMovie(seq, Fraction(s), Fraction(u))


def semi_close(
    m: SurfaceMovie, bottom: Iterable[int] = (), top: Iterable[int] = ()
) -> SurfaceMovie:
    """Cap trivial sublinks at the bottom/top with disk systems."""
    return m.with_caps(bottom, top)


def modify_semi_close(m: SurfaceMovie, eps: Fraction) -> SurfaceMovie:
    """Raise the bottom cap disks by eps (the scl+ modification)."""
    return m.with_epsilon(eps)


def topology(m: SurfaceMovie) -> SurfaceTopology:
    return m.topology()


def export_movie(m: SurfaceMovie) -> str:
    return m.dumps()


def import_movie(text: str) -> SurfaceMovie:
    return SurfaceMovie.loads(text)


def _check_cappable(d: LinkDiagram, comps: Sequence[int]) -> None:
    """Capped components must form a crossingless unlink among themselves and
    each must cross every other strand uniformly (all over or all under), so
    flat disjoint disks exist at that level."""
    comp_set = set(comps)
    for c in comp_set:
        if not (0 <= c < d.component_count):
            raise NotTrivialAtLevel(f"no component {c}")
    flags: dict[int, set[str]] = {c: set() for c in comp_set}
    for x in d.crossings:
        under_c = d.comp_of_arc[x.slots[0]]
        over_c = d.comp_of_arc[x.slots[1]]
        if under_c in comp_set and over_c in comp_set:
            raise NotTrivialAtLevel(
                "capped components are not a crossingless unlink sub-diagram"
            )
        if under_c in comp_set:
            flags[under_c].add("under")
        elif over_c in comp_set:
            flags[over_c].add("over")
    for c, fl in flags.items():
        if len(fl) > 1:
            raise NotTrivialAtLevel(
                f"component {c} passes other strands on both sides; "
                "no flat disk exists at this level"
            )
