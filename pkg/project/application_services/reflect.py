"""
Reflection-equation verification by exhaustive diagram enumeration.

Each side of the reflection equation is a four-slot diagram (two boundary plaquettes at x and y, two
bulk plaquettes at x+y and y-x). Every choice of plaquette templates with matching edge states is one
term; strands are glued across shared edges, closed loops and boundary-anchored strands receive their
fugacities, and the open strands reaching the four terminal edges define the terminal class. The
equation holds when both sides agree class by class.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from enum import IntEnum, StrEnum
from functools import cache
from types import MappingProxyType
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from project.data_accessors.weights import (
    Branch,
    WeightSet,
    c2_boundary,
    c2_bulk_weights,
    on_boundary,
    on_bulk_weights,
    on_generalized_boundary,
)
from project.settings import settings

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence

    from project.data_accessors.params import C2Params, GenOnParams, OnParams


class CatalogMismatchError(Exception):
    """Exception raised when a plaquette catalog is malformed or cannot realize a terminal class."""


class EdgeState(IntEnum):
    """Occupancy of a lattice edge; the O(n) model uses a single colour."""

    EMPTY = 0
    COLOUR1 = 1
    COLOUR2 = 2


class SlotKind(StrEnum):
    BULK = "bulk"
    BOUNDARY = "boundary"


class Argument(StrEnum):
    """Spectral argument carried by a diagram slot."""

    X = "x"
    Y = "y"
    X_PLUS_Y = "x+y"
    Y_MINUS_X = "y-x"


TOP_ANCHOR = "@T"
BOTTOM_ANCHOR = "@B"
UNTYPED_ANCHOR = "@"
EMPTY_LINK = "-"

# Plaquette boundary edges in cyclic order; chords of a planar template do not interleave
BULK_CYCLE = ("UL", "UR", "LR", "LL")
BOUNDARY_CYCLE = ("top", TOP_ANCHOR, BOTTOM_ANCHOR, "bot")
BULK_EDGES = frozenset(BULK_CYCLE)
BOUNDARY_EDGES = frozenset(("top", "bot"))

TERMINALS = ("alpha", "beta", "gamma", "delta")
_FLIPPED_LINK = {
    "alpha": "gamma",
    "gamma": "alpha",
    "beta": "delta",
    "delta": "beta",
    TOP_ANCHOR: BOTTOM_ANCHOR,
    BOTTOM_ANCHOR: TOP_ANCHOR,
}


@dataclass(frozen=True)
class Strand:
    """A strand joining two plaquette edges (or an edge and a boundary anchor)."""

    ends: tuple[str, str]
    colour: int = 1


@dataclass(frozen=True)
class PlaquetteTemplate:
    """One local loop pattern of a plaquette, labelled by its weight symbol."""

    symbol: str
    kind: SlotKind
    strands: tuple[Strand, ...] = ()

    def occupancy(self) -> dict[str, int]:
        """Return the colour on each occupied plaquette edge (anchors excluded)."""
        return {end: strand.colour for strand in self.strands for end in strand.ends if not end.startswith("@")}

    def validate(self, colours: int) -> None:
        """
        Check that the strands form a planar matching on valid edges and anchors.

        Args:
            colours: Number of strand colours of the model

        Raises:
            CatalogMismatchError: If the template is malformed

        """
        valid = BULK_EDGES if self.kind is SlotKind.BULK else BOUNDARY_EDGES | {TOP_ANCHOR, BOTTOM_ANCHOR}
        cycle = BULK_CYCLE if self.kind is SlotKind.BULK else BOUNDARY_CYCLE
        used = [end for strand in self.strands for end in strand.ends]
        if len(used) != len(set(used)):
            msg = f"Template {self.symbol}: an edge or anchor is used twice"
            raise CatalogMismatchError(msg)
        for strand in self.strands:
            if not set(strand.ends) <= valid:
                msg = f"Template {self.symbol}: invalid strand ends {strand.ends} for a {self.kind} plaquette"
                raise CatalogMismatchError(msg)
            if all(end.startswith("@") for end in strand.ends):
                msg = f"Template {self.symbol}: a strand cannot join two anchors"
                raise CatalogMismatchError(msg)
            if not 1 <= strand.colour <= colours:
                msg = f"Template {self.symbol}: colour {strand.colour} outside 1..{colours}"
                raise CatalogMismatchError(msg)

        for first, second in itertools.combinations(self.strands, 2):
            a, b = sorted(cycle.index(end) for end in first.ends)
            crossing = sum(a < cycle.index(end) < b for end in second.ends) == 1
            if crossing and first.colour == second.colour:
                msg = f"Template {self.symbol}: strands of equal colour cross"
                raise CatalogMismatchError(msg)


@dataclass(frozen=True)
class Catalog:
    """All plaquette templates of one model."""

    name: str
    colours: int
    bulk: tuple[PlaquetteTemplate, ...]
    boundary: tuple[PlaquetteTemplate, ...]
    dense: bool = False  # every edge carries a strand

    def templates(self, kind: SlotKind) -> tuple[PlaquetteTemplate, ...]:
        return self.bulk if kind is SlotKind.BULK else self.boundary

    def validate(self) -> None:
        """
        Validate every template and check that the bulk templates cover each colour-conserving edge pattern.

        Raises:
            CatalogMismatchError: On a malformed template or an uncovered bulk pattern

        """
        for template in (*self.bulk, *self.boundary):
            template.validate(self.colours)

        states = range(1 if self.dense else 0, self.colours + 1)
        covered = {tuple(t.occupancy().get(edge, 0) for edge in BULK_CYCLE) for t in self.bulk}
        for pattern in itertools.product(states, repeat=len(BULK_CYCLE)):
            counts = Counter(state for state in pattern if state)
            if all(count % 2 == 0 for count in counts.values()) and pattern not in covered:
                edges = dict(zip(BULK_CYCLE, pattern, strict=True))
                msg = f"Catalog {self.name}: no bulk template for edge pattern {edges}"
                raise CatalogMismatchError(msg)


def _template(symbol: str, kind: SlotKind, *strands: tuple[str, str, int]) -> PlaquetteTemplate:
    return PlaquetteTemplate(symbol, kind, tuple(Strand((a, b), colour) for a, b, colour in strands))


def on_catalog(generalized: bool = False) -> Catalog:
    """
    Build the dilute O(n) catalog.

    Args:
        generalized: Add the two single-anchor beta4 plaquettes of the asymmetric model

    Returns:
        Validated Catalog

    """
    bulk, boundary = SlotKind.BULK, SlotKind.BOUNDARY
    bulk_templates = (
        _template("t", bulk),
        _template("u1", bulk, ("UR", "LR", 1)),
        _template("u1", bulk, ("UL", "LL", 1)),
        _template("u2", bulk, ("UL", "UR", 1)),
        _template("u2", bulk, ("LL", "LR", 1)),
        _template("v", bulk, ("UL", "LR", 1)),
        _template("v", bulk, ("UR", "LL", 1)),
        _template("w1", bulk, ("UR", "LR", 1), ("UL", "LL", 1)),
        _template("w2", bulk, ("UL", "UR", 1), ("LL", "LR", 1)),
    )
    boundary_templates = [
        _template("beta1", boundary),
        _template("beta2", boundary, ("top", "bot", 1)),
        _template("beta3", boundary, ("top", TOP_ANCHOR, 1), ("bot", BOTTOM_ANCHOR, 1)),
    ]
    if generalized:
        boundary_templates += [
            _template("beta4", boundary, ("top", TOP_ANCHOR, 1)),
            _template("beta4", boundary, ("bot", BOTTOM_ANCHOR, 1)),
        ]
    catalog = Catalog("on-generalized" if generalized else "on", 1, bulk_templates, tuple(boundary_templates))
    catalog.validate()
    return catalog


def c2_catalog() -> Catalog:
    """
    Build the colour-symmetric C2(1) catalog.

    Arcs of equal colour give w1 (left/right) and w2 (top/bottom), arcs of different colours give u1 and
    u2, and v is the crossing of two different colours. beta3 and beta4 anchor both boundary edges in
    colour 1 and colour 2 respectively.
    """
    bulk, boundary = SlotKind.BULK, SlotKind.BOUNDARY
    bulk_templates: list[PlaquetteTemplate] = []
    for a, b in itertools.product((1, 2), repeat=2):
        bulk_templates.append(_template("w1" if a == b else "u1", bulk, ("UL", "LL", a), ("UR", "LR", b)))
        bulk_templates.append(_template("w2" if a == b else "u2", bulk, ("UL", "UR", a), ("LL", "LR", b)))
        if a != b:
            bulk_templates.append(_template("v", bulk, ("UL", "LR", a), ("UR", "LL", b)))
    boundary_templates = (
        _template("beta1", boundary, ("top", "bot", 1)),
        _template("beta2", boundary, ("top", "bot", 2)),
        _template("beta3", boundary, ("top", TOP_ANCHOR, 1), ("bot", BOTTOM_ANCHOR, 1)),
        _template("beta4", boundary, ("top", TOP_ANCHOR, 2), ("bot", BOTTOM_ANCHOR, 2)),
    )
    catalog = Catalog("c2", 2, tuple(bulk_templates), boundary_templates, dense=True)
    catalog.validate()
    return catalog


@dataclass(frozen=True)
class Slot:
    """A plaquette position in a reflection diagram; edges map plaquette edges to diagram edge labels."""

    kind: SlotKind
    argument: Argument
    edges: tuple[tuple[str, str], ...]

    def label(self, edge: str) -> str:
        return dict(self.edges)[edge]


@dataclass(frozen=True)
class ReflectionDiagram:
    """One side of the reflection equation, slots listed top to bottom."""

    side: str
    slots: tuple[Slot, ...]
    terminals: tuple[str, ...] = TERMINALS

    def validate(self) -> None:
        counts = Counter(label for slot in self.slots for _, label in slot.edges)
        for label, count in counts.items():
            expected = 1 if label in self.terminals else 2
            if count != expected:
                msg = f"{self.side} diagram: edge {label!r} appears in {count} slots, expected {expected}"
                raise ValueError(msg)
        missing = set(self.terminals) - set(counts)
        if missing:
            msg = f"{self.side} diagram: terminals {sorted(missing)} are not attached"
            raise ValueError(msg)
        for slot in self.slots:
            valid = BULK_EDGES if slot.kind is SlotKind.BULK else BOUNDARY_EDGES
            if {edge for edge, _ in slot.edges} != valid:
                msg = f"{self.side} diagram: slot {slot.argument} does not use the {slot.kind} edges"
                raise ValueError(msg)

    @property
    def edge_labels(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(label for slot in self.slots for _, label in slot.edges))


def _slot(kind: SlotKind, argument: Argument, **edges: str) -> Slot:
    return Slot(kind, argument, tuple(edges.items()))


LEFT = ReflectionDiagram(
    "left",
    (
        _slot(SlotKind.BOUNDARY, Argument.X, top="beta", bot="nu"),
        _slot(SlotKind.BULK, Argument.X_PLUS_Y, UL="alpha", UR="nu", LL="nu'", LR="mu"),
        _slot(SlotKind.BOUNDARY, Argument.Y, top="mu", bot="mu'"),
        _slot(SlotKind.BULK, Argument.Y_MINUS_X, UL="nu'", UR="mu'", LL="gamma", LR="delta"),
    ),
)

RIGHT = ReflectionDiagram(
    "right",
    (
        _slot(SlotKind.BULK, Argument.Y_MINUS_X, UL="alpha", UR="beta", LL="nu'", LR="nu"),
        _slot(SlotKind.BOUNDARY, Argument.Y, top="nu", bot="mu"),
        _slot(SlotKind.BULK, Argument.X_PLUS_Y, UL="nu'", UR="mu", LL="gamma", LR="mu'"),
        _slot(SlotKind.BOUNDARY, Argument.X, top="mu'", bot="delta"),
    ),
)


@dataclass(frozen=True)
class TerminalState:
    """Colour of a terminal edge and what its strand reaches: another terminal, an anchor, or nothing."""

    colour: int = 0
    link: str = EMPTY_LINK


@dataclass(frozen=True)
class TerminalClass:
    """Occupancy and connectivity of the four terminals (alpha, beta, gamma, delta)."""

    states: tuple[TerminalState, TerminalState, TerminalState, TerminalState]
    colours: int = 1

    @property
    def label(self) -> str:
        if self.colours == 1:
            return ",".join(state.link for state in self.states)
        return ",".join(f"{state.colour}:{state.link}" for state in self.states)

    def flipped(self) -> TerminalClass:
        """Swap top and bottom: alpha <-> gamma, beta <-> delta, top anchor <-> bottom anchor."""
        alpha, beta, gamma, delta = (
            TerminalState(state.colour, _FLIPPED_LINK.get(state.link, state.link)) for state in self.states
        )
        return TerminalClass((gamma, delta, alpha, beta), self.colours)

    def recoloured(self) -> TerminalClass:
        """Exchange colours 1 and 2."""
        swap = {0: 0, 1: 2, 2: 1}
        alpha, beta, gamma, delta = (TerminalState(swap[state.colour], state.link) for state in self.states)
        return TerminalClass((alpha, beta, gamma, delta), self.colours)

    @property
    def is_flip_invariant(self) -> bool:
        return self.flipped() == self

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class DiagramTerm:
    """A product of four weights (slot order) times the fugacities of its closed and anchored loops."""

    factors: tuple[tuple[str, Argument], ...]
    fugacities: tuple[str, ...] = ()
    multiplicity: int = 1

    def value(self, weights: ReflectionWeights) -> float:
        product = float(self.multiplicity)
        for symbol, argument in self.factors:
            product *= weights.factor(symbol, argument)
        for symbol in self.fugacities:
            product *= weights.fugacities[symbol]
        return product

    def describe(self) -> str:
        body = " ".join(f"{symbol}({argument})" for symbol, argument in self.factors)
        prefix = "".join(f"{symbol}*" for symbol in self.fugacities)
        count = f"{self.multiplicity}*" if self.multiplicity != 1 else ""
        return f"{count}{prefix}{body}"

    def sort_key(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        """Factor symbols in sorted order plus fugacities; equal keys mean equal values at every point."""
        return tuple(sorted(f"{s}({a})" for s, a in self.factors)), self.fugacities


def classify_loop(profile: Sequence[str]) -> str:
    """
    Return the fugacity symbol of a loop from the anchor types it touches, listed top to bottom.

    Args:
        profile: Anchor types ("T" for a top-edge anchor, "B" for a bottom-edge anchor)

    Returns:
        "n" without anchors; "n1" when the topmost of two mixed anchors is a top-edge anchor, "n2" when
        it is a bottom-edge anchor; "n3" for two anchors of equal type

    Raises:
        ValueError: On a single anchor (an open strand), more than two anchors or an unknown type

    """
    if any(kind not in ("T", "B") for kind in profile):
        msg = f"Unknown anchor types in profile {list(profile)}"
        raise ValueError(msg)
    if not profile:
        return "n"
    if len(profile) != 2:
        msg = f"A boundary loop touches exactly two anchors, got {len(profile)}"
        raise ValueError(msg)
    first, second = profile
    if first == second:
        return "n3"
    return "n1" if first == "T" else "n2"


def _anchor_key(node: tuple[int, str]) -> tuple[int, int]:
    slot_index, kind = node
    return slot_index, 0 if kind == "T" else 1


def _anchor_link(kind: str, typed_anchors: bool) -> str:
    if not typed_anchors:
        return UNTYPED_ANCHOR
    return TOP_ANCHOR if kind == "T" else BOTTOM_ANCHOR


def _edge_states(diagram: ReflectionDiagram, chosen: Sequence[PlaquetteTemplate]) -> dict[str, int] | None:
    """Return the state of every diagram edge, or None when two slots disagree on a shared edge."""
    states: dict[str, int] = {}
    for slot, template in zip(diagram.slots, chosen, strict=True):
        occupancy = template.occupancy()
        for edge, label in slot.edges:
            state = occupancy.get(edge, EdgeState.EMPTY)
            if states.setdefault(label, state) != state:
                return None
    return states


@cache
def enumerate_diagram(
    diagram: ReflectionDiagram,
    catalog: Catalog,
    typed_anchors: bool = True,
    slot_order: tuple[int, ...] | None = None,
) -> Mapping[TerminalClass, tuple[DiagramTerm, ...]]:
    """
    Enumerate every consistent template assignment of one diagram side.

    Args:
        diagram: Side of the reflection equation
        catalog: Plaquette templates of the model
        typed_anchors: Record whether a terminal strand ends on a top or bottom anchor
        slot_order: Order in which slots are iterated (results do not depend on it)

    Returns:
        Read-only map from terminal class to merged terms, terms sorted by description

    """
    diagram.validate()
    order = tuple(range(len(diagram.slots))) if slot_order is None else slot_order
    if sorted(order) != list(range(len(diagram.slots))):
        msg = f"slot_order {order} is not a permutation of the slots"
        raise ValueError(msg)

    edge_nodes = {label: index for index, label in enumerate(diagram.edge_labels)}
    anchor_nodes: dict[tuple[int, str], int] = {}
    for slot_index, slot in enumerate(diagram.slots):
        if slot.kind is SlotKind.BOUNDARY:
            for kind in ("T", "B"):
                anchor_nodes[(slot_index, kind)] = len(edge_nodes) + len(anchor_nodes)
    anchor_of = {node: key for key, node in anchor_nodes.items()}
    size = len(edge_nodes) + len(anchor_nodes)
    terminal_of = {edge_nodes[t]: t for t in diagram.terminals}

    counts: dict[TerminalClass, Counter[tuple[tuple[tuple[str, Argument], ...], tuple[str, ...]]]] = defaultdict(
        Counter
    )
    choices = [catalog.templates(diagram.slots[index].kind) for index in order]
    for picked in itertools.product(*choices):
        chosen: list[PlaquetteTemplate] = [picked[0]] * len(order)
        for position, index in enumerate(order):
            chosen[index] = picked[position]

        states = _edge_states(diagram, chosen)
        if states is None:
            continue

        rows: list[int] = []
        cols: list[int] = []
        for slot_index, (slot, template) in enumerate(zip(diagram.slots, chosen, strict=True)):
            for strand in template.strands:
                a, b = (
                    anchor_nodes[(slot_index, end[1])] if end.startswith("@") else edge_nodes[slot.label(end)]
                    for end in strand.ends
                )
                rows += [a, b]
                cols += [b, a]
        degree = np.bincount(rows, minlength=size)
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size)).tocsr()
        _, component = connected_components(graph, directed=False)

        links = dict.fromkeys(diagram.terminals, EMPTY_LINK)
        fugacities: list[str] = []
        for comp in np.unique(component[degree > 0]):
            ends = [int(node) for node in np.flatnonzero(component == comp) if degree[node] == 1]
            terminals = [terminal_of[node] for node in ends if node in terminal_of]
            anchors = sorted((anchor_of[node] for node in ends if node in anchor_of), key=_anchor_key)
            if len(terminals) == 2:
                links[terminals[0]], links[terminals[1]] = terminals[1], terminals[0]
            elif len(terminals) == 1:
                links[terminals[0]] = _anchor_link(anchors[0][1], typed_anchors)
            else:
                fugacities.append(classify_loop([kind for _, kind in anchors]))

        alpha, beta, gamma, delta = (TerminalState(states[t], links[t]) for t in diagram.terminals)
        terminal_class = TerminalClass((alpha, beta, gamma, delta), catalog.colours)
        factors = tuple((template.symbol, slot.argument) for slot, template in zip(diagram.slots, chosen, strict=True))
        counts[terminal_class][(factors, tuple(sorted(fugacities)))] += 1

    result = {
        terminal_class: tuple(
            sorted(
                (DiagramTerm(factors, fugacities, count) for (factors, fugacities), count in merged.items()),
                key=DiagramTerm.describe,
            )
        )
        for terminal_class, merged in sorted(counts.items(), key=lambda item: item[0].label)
    }
    logger.debug(f"{catalog.name}/{diagram.side}: {sum(map(len, result.values()))} terms in {len(result)} classes")
    return MappingProxyType(result)


def enumerate_side(
    diagram: ReflectionDiagram,
    terminal_class: TerminalClass,
    catalog: Catalog,
    typed_anchors: bool = True,
) -> tuple[DiagramTerm, ...]:
    """
    Return the merged terms of one terminal class on one side.

    Raises:
        CatalogMismatchError: If the class is realized on neither side of the equation with this catalog

    """
    if terminal_class not in realizable_classes(catalog, typed_anchors):
        msg = f"Terminal class {terminal_class.label} is not realizable with catalog {catalog.name}"
        raise CatalogMismatchError(msg)
    return enumerate_diagram(diagram, catalog, typed_anchors).get(terminal_class, ())


def realizable_classes(catalog: Catalog, typed_anchors: bool = True) -> tuple[TerminalClass, ...]:
    classes = {c for diagram in (LEFT, RIGHT) for c in enumerate_diagram(diagram, catalog, typed_anchors)}
    return tuple(sorted(classes, key=lambda c: c.label))


def nontrivial_classes(catalog: Catalog, typed_anchors: bool = True) -> tuple[TerminalClass, ...]:
    """
    Return one class per non-trivial orbit of the top-bottom swap.

    Swap-invariant classes hold term by term, and so do orbits whose swap equals the colour exchange
    when the weights are colour symmetric. The representative is the class with the smallest label.
    """
    classes = realizable_classes(catalog, typed_anchors)
    chosen: list[TerminalClass] = []
    seen: set[TerminalClass] = set()
    for terminal_class in classes:
        if terminal_class in seen:
            continue
        partner = terminal_class.flipped()
        seen.update({terminal_class, partner})
        if partner == terminal_class:
            continue
        if catalog.colours > 1 and partner == terminal_class.recoloured():
            continue
        chosen.append(terminal_class)
    return tuple(chosen)


def fugacity_census(catalog: Catalog, typed_anchors: bool = True) -> Counter[str]:
    """Count loop fugacity symbols over every enumerated assignment on both sides."""
    census: Counter[str] = Counter()
    for diagram in (LEFT, RIGHT):
        for terms in enumerate_diagram(diagram, catalog, typed_anchors).values():
            for term in terms:
                for symbol in term.fugacities:
                    census[symbol] += term.multiplicity
    return census


@dataclass(frozen=True)
class ReflectionWeights:
    """Weights entering the reflection diagram at one (x, y) point."""

    boundary_x: WeightSet
    boundary_y: WeightSet
    bulk_sum: WeightSet  # at x + y
    bulk_diff: WeightSet  # at y - x
    fugacities: Mapping[str, float] = field(default_factory=dict)

    def weight_set(self, argument: Argument) -> WeightSet:
        return {
            Argument.X: self.boundary_x,
            Argument.Y: self.boundary_y,
            Argument.X_PLUS_Y: self.bulk_sum,
            Argument.Y_MINUS_X: self.bulk_diff,
        }[argument]

    def factor(self, symbol: str, argument: Argument) -> float:
        """Weight of a template; boundary symbols absent from a set (diagonal boundaries) read as 0."""
        weights = self.weight_set(argument)
        if argument in (Argument.X, Argument.Y):
            return weights.get(symbol, 0.0)
        return weights[symbol]

    def scale(self) -> float:
        """Product over the four slots of the largest weight magnitude in each slot's set."""
        return math.prod(
            float(np.max(np.abs(self.weight_set(argument).vector()))) for argument in Argument
        )

    def perturbed(self, symbol: str, delta: float) -> ReflectionWeights:
        """Add delta to the symbol wherever it appears (both boundary sets or both bulk sets)."""
        changes = {}
        for name, weights in (
            ("boundary_x", self.boundary_x),
            ("boundary_y", self.boundary_y),
            ("bulk_sum", self.bulk_sum),
            ("bulk_diff", self.bulk_diff),
        ):
            if symbol in weights.entries:
                changes[name] = weights.perturbed(symbol, delta)
        if not changes:
            msg = f"Weight symbol {symbol!r} does not occur in the reflection weights"
            raise KeyError(msg)
        return replace(self, **changes)


def on_reflection_weights(p: OnParams, y: float, branch: Branch) -> ReflectionWeights:
    return ReflectionWeights(
        boundary_x=on_boundary(p, branch),
        boundary_y=on_boundary(replace(p, x=y), branch),
        bulk_sum=on_bulk_weights(p.lam, p.x + y),
        bulk_diff=on_bulk_weights(p.lam, y - p.x),
        fugacities=p.fugacities(),
    )


def c2_reflection_weights(p: C2Params, y: float, branch: Branch) -> ReflectionWeights:
    return ReflectionWeights(
        boundary_x=c2_boundary(p, branch),
        boundary_y=c2_boundary(replace(p, x=y), branch),
        bulk_sum=c2_bulk_weights(p.lam, p.x + y),
        bulk_diff=c2_bulk_weights(p.lam, y - p.x),
        fugacities=p.fugacities(),
    )


def gen_reflection_weights(
    g: GenOnParams, y: float, fugacities: Mapping[str, float] | None = None
) -> ReflectionWeights:
    """
    Build the weights of the asymmetric O(n) model.

    Args:
        g: Parameter point of the one-parameter family
        y: Second spectral parameter
        fugacities: Optional loop fugacities replacing n1 = n2 = n3 = g.n1 (negative controls)

    Returns:
        ReflectionWeights

    """
    return ReflectionWeights(
        boundary_x=on_generalized_boundary(g),
        boundary_y=on_generalized_boundary(replace(g, x=y)),
        bulk_sum=on_bulk_weights(g.lam, g.x + y),
        bulk_diff=on_bulk_weights(g.lam, y - g.x),
        fugacities=dict(g.fugacities() if fugacities is None else fugacities),
    )


def re_residual(
    weights: ReflectionWeights,
    terminal_class: TerminalClass,
    catalog: Catalog,
    typed_anchors: bool = True,
) -> float:
    """
    Return |LHS - RHS| / max(sum|LHS terms|, sum|RHS terms|, W, eps) for one terminal class.

    W is ReflectionWeights.scale(); it keeps classes whose terms are all round-off (for instance where a
    boundary weight vanishes identically) from producing O(1) ratios.
    """
    left = [term.value(weights) for term in enumerate_side(LEFT, terminal_class, catalog, typed_anchors)]
    right = [term.value(weights) for term in enumerate_side(RIGHT, terminal_class, catalog, typed_anchors)]
    difference = abs(math.fsum(left) - math.fsum(right))
    denominator = max(
        math.fsum(map(abs, left)),
        math.fsum(map(abs, right)),
        weights.scale(),
        settings.singular_eps,
    )
    return difference / denominator


def re_residuals(
    weights: ReflectionWeights,
    catalog: Catalog,
    typed_anchors: bool = True,
    classes: Iterable[TerminalClass] | None = None,
) -> dict[str, float]:
    """Return residuals keyed by class label, over the non-trivial classes unless classes is given."""
    selected = nontrivial_classes(catalog, typed_anchors) if classes is None else tuple(classes)
    return {c.label: re_residual(weights, c, catalog, typed_anchors) for c in selected}


def re_residual_generalized(
    g: GenOnParams, y: float, *, fugacities: Mapping[str, float] | None = None
) -> dict[str, float]:
    """
    Check the asymmetric O(n) family against the reflection equation.

    With the common fugacity n1 = n2 = n3 a terminal strand is not asked which anchor type it reached;
    unequal fugacities keep the anchor type, which the family does not solve.
    """
    weights = gen_reflection_weights(g, y, fugacities)
    values = weights.fugacities
    typed = not math.isclose(values["n1"], values["n2"]) or not math.isclose(values["n1"], values["n3"])
    return re_residuals(weights, on_catalog(generalized=True), typed_anchors=typed)
