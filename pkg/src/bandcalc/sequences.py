"""Surgery steps and band-surgery sequences.

A step stores the band system on the diagram it literally attaches to.  A
forward step computes after = apply_bands(before, bands); a reversed step
computes before = apply_bands(after, bands) and represents the inverse
surgery.  Reversed steps exist because a PD rewrite never removes crossings:
any sequence that ends at a crossingless unlink (the shape every ribbon
certificate needs) must be constructed from the trivial end downward, which
is also how the paper manipulates inverse sequences.

A chain is a "fan": one seed diagram, reversed steps to its left, forward
steps to its right; every other diagram is derived by exactly one apply.
Chaining is literal canonical-form equality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .bands import ApplyResult, Band, apply_bands_ex, classify_step
from .diagram import LinkDiagram, parse_diagram
from .errors import EmptySequence, MalformedCode

_REVERSE_KIND = {"fusion": "fission", "fission": "fusion"}


class SurgeryStep:
    """One band surgery between two diagrams.

    kind always describes the before -> after direction.
    """

    def __init__(self, bands: Sequence[Band], base: LinkDiagram, reversed_: bool):
        self.bands: tuple[Band, ...] = tuple(bands)
        self.reversed: bool = reversed_
        self.apply_result: ApplyResult = apply_bands_ex(base, self.bands)
        stored_kind = classify_step(base, self.bands, self.apply_result)
        if reversed_:
            self.after = base
            self.before = self.apply_result.diagram
            self.kind = _REVERSE_KIND.get(stored_kind, stored_kind)
        else:
            self.before = base
            self.after = self.apply_result.diagram
            self.kind = stored_kind

    @property
    def base(self) -> LinkDiagram:
        return self.after if self.reversed else self.before

    @property
    def derived(self) -> LinkDiagram:
        return self.before if self.reversed else self.after

    def comp_image(self, before_comp: int) -> set[int]:
        """Components of `after` the given component of `before` feeds into."""
        if self.reversed:
            return self.apply_result.comp_preimage(before_comp)
        return self.apply_result.comp_image(before_comp)

    def comp_preimage(self, after_comp: int) -> set[int]:
        if self.reversed:
            return self.apply_result.comp_image(after_comp)
        return self.apply_result.comp_preimage(after_comp)

    def band_before_comps(self, bi: int) -> set[int]:
        """Components of `before` the band touches."""
        feet = self.apply_result.band_feet_comps(bi)
        if not self.reversed:
            return feet
        # feet live on `after`; pull them back through the surgery
        out = set()
        for c in feet:
            out |= self.comp_preimage(c)
        return out

    def band_base_feet(self, bi: int) -> set[int]:
        return self.apply_result.band_feet_comps(bi)

    def __repr__(self):
        arrow = "<-" if self.reversed else "->"
        return f"<SurgeryStep {self.kind} {len(self.bands)} band(s) {arrow}>"


class BandSequence:
    """Chain of surgery steps with literal endpoint matching."""

    def __init__(self, steps: Sequence[SurgeryStep], initial: LinkDiagram | None = None):
        self.steps: tuple[SurgeryStep, ...] = tuple(steps)
        if not self.steps:
            if initial is None:
                raise EmptySequence("a sequence needs steps or an initial diagram")
            self._initial = initial
        else:
            self._initial = self.steps[0].before
            for a, b in zip(self.steps, self.steps[1:]):
                if a.after != b.before:
                    raise MalformedCode("sequence endpoints do not chain")
            seen_forward = False
            for s in self.steps:
                if not s.reversed:
                    seen_forward = True
                elif seen_forward:
                    raise MalformedCode("reversed step after a forward step")

    @property
    def diagrams(self) -> list[LinkDiagram]:
        if not self.steps:
            return [self._initial]
        return [self.steps[0].before] + [s.after for s in self.steps]

    @property
    def initial(self) -> LinkDiagram:
        return self.diagrams[0]

    @property
    def final(self) -> LinkDiagram:
        return self.diagrams[-1]

    @property
    def total_bands(self) -> int:
        return sum(len(s.bands) for s in self.steps)

    def __len__(self):
        return len(self.steps)

    # -- construction -------------------------------------------------------

    @staticmethod
    def forward(initial: LinkDiagram, band_systems: Iterable[Sequence[Band]]) -> "BandSequence":
        steps = []
        cur = initial
        for bands in band_systems:
            step = SurgeryStep(bands, cur, reversed_=False)
            steps.append(step)
            cur = step.after
        return BandSequence(steps, initial=initial)

    @staticmethod
    def reversed_from(final: LinkDiagram, band_systems: Iterable[Sequence[Band]]) -> "BandSequence":
        """Build backward from the final diagram; band_systems are listed in
        sequence order (step 0 first) but each attaches to the later diagram."""
        systems = list(band_systems)
        steps: list[SurgeryStep] = []
        cur = final
        for bands in reversed(systems):
            step = SurgeryStep(bands, cur, reversed_=True)
            steps.insert(0, step)
            cur = step.before
        return BandSequence(steps, initial=cur if steps else final)

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        if not self.steps:
            return {"seed_index": 0, "seed": self._initial.serialize(), "steps": []}
        seed_index = len(self.steps)
        for i, s in enumerate(self.steps):
            if not s.reversed:
                seed_index = i
                break
        seed = self.diagrams[seed_index]
        return {
            "seed_index": seed_index,
            "seed": seed.serialize(),
            "steps": [
                {"bands": [b.to_json() for b in s.bands], "reversed": s.reversed}
                for s in self.steps
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "BandSequence":
        seed = parse_diagram(obj["seed"])
        seed_index = int(obj.get("seed_index", 0))
        specs = obj.get("steps", [])
        if not specs:
            return BandSequence((), initial=seed)
        steps_rev: list[SurgeryStep] = []
        cur = seed
        for spec in reversed(specs[:seed_index]):
            if not spec.get("reversed", False):
                raise MalformedCode("steps left of the seed must be reversed")
            step = SurgeryStep([Band.from_json(b) for b in spec["bands"]], cur, True)
            steps_rev.insert(0, step)
            cur = step.before
        steps_fwd: list[SurgeryStep] = []
        cur = seed
        for spec in specs[seed_index:]:
            if spec.get("reversed", False):
                raise MalformedCode("steps right of the seed must be forward")
            step = SurgeryStep([Band.from_json(b) for b in spec["bands"]], cur, False)
            steps_fwd.append(step)
            cur = step.after
        return BandSequence(steps_rev + steps_fwd)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def loads(text: str) -> "BandSequence":
        return BandSequence.from_json(json.loads(text))
