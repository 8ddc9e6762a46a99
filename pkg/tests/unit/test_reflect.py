"""
Unit tests for the reflection-equation enumeration.
"""

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import replace

import numpy as np
import pytest

from project.application_services.reflect import (
    BOTTOM_ANCHOR,
    LEFT,
    RIGHT,
    TERMINALS,
    TOP_ANCHOR,
    Catalog,
    CatalogMismatchError,
    PlaquetteTemplate,
    ReflectionWeights,
    SlotKind,
    Strand,
    TerminalClass,
    TerminalState,
    c2_catalog,
    c2_reflection_weights,
    classify_loop,
    enumerate_diagram,
    enumerate_side,
    fugacity_census,
    gen_reflection_weights,
    nontrivial_classes,
    on_catalog,
    on_reflection_weights,
    re_residual,
    re_residual_generalized,
    re_residuals,
    realizable_classes,
)
from project.data_accessors.params import GenOnParams, OnParams, c2_params, gen_on_params, on_params
from project.data_accessors.weights import (
    FOUR_BOUNDARY_SYMBOLS,
    ON_BULK_SYMBOLS,
    Branch,
    WeightModel,
    WeightSet,
)


def _class_by_label(catalog: Catalog, label: str, typed_anchors: bool = True) -> TerminalClass:
    return next(c for c in realizable_classes(catalog, typed_anchors) if c.label == label)


def _assignments(catalog: Catalog, side: str, typed_anchors: bool = True) -> int:
    diagram = LEFT if side == "left" else RIGHT
    terms = enumerate_diagram(diagram, catalog, typed_anchors).values()
    return sum(term.multiplicity for class_terms in terms for term in class_terms)


def _raw_assignments(catalog: Catalog, side: str) -> int:
    """Count template choices whose shared edges agree, without classifying or merging them."""
    diagram = LEFT if side == "left" else RIGHT
    count = 0
    for chosen in itertools.product(*(catalog.templates(slot.kind) for slot in diagram.slots)):
        seen: defaultdict[str, set[int]] = defaultdict(set)
        for slot, template in zip(diagram.slots, chosen, strict=True):
            occupancy = template.occupancy()
            for edge, label in slot.edges:
                seen[label].add(occupancy.get(edge, 0))
        count += all(len(colours) == 1 for colours in seen.values())
    return count


def _arbitrary_weights(seed: int) -> ReflectionWeights:
    rng = np.random.default_rng(seed)

    def boundary() -> WeightSet:
        return WeightSet.from_vector(FOUR_BOUNDARY_SYMBOLS, rng.uniform(0.5, 1.5, 4), WeightModel.GEN_ON_BOUNDARY)

    def bulk() -> WeightSet:
        return WeightSet.from_vector(ON_BULK_SYMBOLS, rng.uniform(0.5, 1.5, 6), WeightModel.ON_BULK)

    return ReflectionWeights(boundary(), boundary(), bulk(), bulk(), {"n": 0.3, "n1": 1.0, "n2": 2.0, "n3": 3.0})


class TestClassifyLoop:
    """Test cases for the boundary-loop fugacity rule."""

    @pytest.mark.parametrize(
        ("profile", "expected"),
        [([], "n"), (["T", "T"], "n3"), (["B", "B"], "n3"), (["T", "B"], "n1"), (["B", "T"], "n2")],
    )
    def test_fugacity(self, profile: list[str], expected: str) -> None:
        """Test the fugacity assigned to each anchor profile."""
        assert classify_loop(profile) == expected

    def test_single_anchor(self) -> None:
        """Test that an open strand has no loop fugacity."""
        with pytest.raises(ValueError, match="exactly two anchors"):
            classify_loop(["T"])

    def test_unknown_type(self) -> None:
        """Test that unknown anchor types are rejected."""
        with pytest.raises(ValueError, match="Unknown anchor types"):
            classify_loop(["T", "X"])


class TestCatalog:
    """Test cases for plaquette catalogs."""

    def test_builtin_catalogs_validate(self) -> None:
        """Test that the shipped catalogs pass validation."""
        assert len(on_catalog().bulk) == 9
        assert len(on_catalog(generalized=True).boundary) == 5
        assert len(c2_catalog().bulk) == 10
        assert len(c2_catalog().boundary) == 4

    @pytest.mark.parametrize(
        ("strands", "message"),
        [
            ((Strand(("UL", "UR")), Strand(("UR", "LR"))), "used twice"),
            ((Strand(("UL", "top")),), "invalid strand ends"),
            ((Strand(("UL", "LR")), Strand(("UR", "LL"))), "equal colour cross"),
            ((Strand(("UL", "UR"), colour=2),), "outside 1..1"),
        ],
    )
    def test_malformed_bulk_template(self, strands: tuple[Strand, ...], message: str) -> None:
        """Test that malformed bulk templates are rejected."""
        with pytest.raises(CatalogMismatchError, match=message):
            PlaquetteTemplate("bad", SlotKind.BULK, strands).validate(1)

    def test_anchor_to_anchor(self) -> None:
        """Test that a boundary strand may not join two anchors."""
        template = PlaquetteTemplate("bad", SlotKind.BOUNDARY, (Strand((TOP_ANCHOR, BOTTOM_ANCHOR)),))

        with pytest.raises(CatalogMismatchError, match="cannot join two anchors"):
            template.validate(1)

    def test_crossing_of_different_colours(self) -> None:
        """Test that strands of different colours may cross."""
        PlaquetteTemplate("v", SlotKind.BULK, (Strand(("UL", "LR"), 1), Strand(("UR", "LL"), 2))).validate(2)

    def test_incomplete_bulk_cover(self) -> None:
        """Test that a catalog missing a bulk edge pattern is rejected."""
        full = on_catalog()
        catalog = Catalog("partial", 1, full.bulk[1:], full.boundary)

        with pytest.raises(CatalogMismatchError, match="no bulk template"):
            catalog.validate()


class TestEnumeration:
    """Test cases for the diagram enumeration."""

    def test_on_counts(self) -> None:
        """Test the class and assignment counts of the O(n) model."""
        catalog = on_catalog()

        assert len(realizable_classes(catalog)) == 19
        assert len(nontrivial_classes(catalog)) == 5
        assert _assignments(catalog, "left") == 54
        assert _assignments(catalog, "right") == 54

    def test_c2_counts(self) -> None:
        """Test the class and assignment counts of the C2(1) model."""
        catalog = c2_catalog()

        assert len(realizable_classes(catalog)) == 36
        assert len(nontrivial_classes(catalog)) == 6
        assert _assignments(catalog, "left") == 104
        assert _assignments(catalog, "right") == 104

    def test_generalized_counts(self) -> None:
        """Test the generalized catalog with untyped and typed anchors."""
        catalog = on_catalog(generalized=True)

        assert len(realizable_classes(catalog, typed_anchors=False)) == 35
        assert _assignments(catalog, "left", typed_anchors=False) == 139
        assert _assignments(catalog, "right", typed_anchors=False) == 139
        assert len(realizable_classes(catalog, typed_anchors=True)) == 64

    @pytest.mark.parametrize("side", ["left", "right"])
    @pytest.mark.parametrize(
        ("catalog", "typed_anchors"),
        [(on_catalog(), True), (c2_catalog(), True), (on_catalog(generalized=True), False)],
        ids=["on", "c2", "generalized"],
    )
    def test_recount(self, catalog: Catalog, typed_anchors: bool, side: str) -> None:
        """Test that the merged terms account for every raw consistent assignment."""
        assert _assignments(catalog, side, typed_anchors) == _raw_assignments(catalog, side)

    def test_all_empty_class(self) -> None:
        """Test the class with four empty terminals."""
        catalog = on_catalog()
        empty = TerminalClass((TerminalState(),) * 4)
        restricted = Catalog("empty", 1, catalog.bulk[:1], catalog.boundary[:1])

        assert empty in realizable_classes(catalog)
        assert "beta1(x) t(x+y) beta1(y) t(y-x)" in {term.describe() for term in enumerate_side(LEFT, empty, catalog)}
        assert [term.describe() for term in enumerate_side(LEFT, empty, restricted)] == [
            "beta1(x) t(x+y) beta1(y) t(y-x)"
        ]
        assert [term.describe() for term in enumerate_side(RIGHT, empty, restricted)] == [
            "t(y-x) beta1(y) t(x+y) beta1(x)"
        ]
        assert re_residual(_arbitrary_weights(0), empty, catalog) < 1e-12

    def test_multiplicities(self) -> None:
        """Test that no two O(n) assignments share a term."""
        for terms in enumerate_diagram(LEFT, on_catalog()).values():
            assert all(term.multiplicity == 1 for term in terms)

    def test_fugacity_census(self) -> None:
        """Test the number of loops of each fugacity over both sides."""
        assert fugacity_census(on_catalog()) == Counter({"n": 12, "n1": 12, "n2": 10})
        assert fugacity_census(c2_catalog()) == Counter({"n": 32, "n1": 32, "n2": 20})

    def test_golden_class(self) -> None:
        """Test the terms of the class with strands from beta to the top anchor and from gamma to the bottom."""
        catalog = on_catalog()
        terminal_class = _class_by_label(catalog, f"-,{TOP_ANCHOR},{BOTTOM_ANCHOR},-")

        left = {term.describe() for term in enumerate_side(LEFT, terminal_class, catalog)}
        right = {term.describe() for term in enumerate_side(RIGHT, terminal_class, catalog)}

        assert left == {
            "beta2(x) u1(x+y) beta3(y) v(y-x)",
            "beta3(x) u1(x+y) beta2(y) v(y-x)",
            "n2*beta3(x) u1(x+y) beta3(y) v(y-x)",
            "beta3(x) v(x+y) beta1(y) u1(y-x)",
        }
        assert right == {"u1(y-x) beta3(y) v(x+y) beta1(x)"}
        assert terminal_class in nontrivial_classes(catalog)

    def test_slot_order_invariance(self) -> None:
        """Test that the iteration order of the slots does not change the result."""
        catalog = on_catalog()

        assert dict(enumerate_diagram(LEFT, catalog, True, (3, 1, 0, 2))) == dict(enumerate_diagram(LEFT, catalog))
        with pytest.raises(ValueError, match="not a permutation"):
            enumerate_diagram(LEFT, catalog, True, (0, 0, 1, 2))

    def test_unrealizable_class(self) -> None:
        """Test that a class no assignment reaches raises CatalogMismatchError."""
        impossible = TerminalClass((TerminalState(1, TOP_ANCHOR),) * 4)

        with pytest.raises(CatalogMismatchError, match="not realizable"):
            enumerate_side(LEFT, impossible, on_catalog())

    def test_diagram_validation(self) -> None:
        """Test that a terminal attached to no slot is reported."""
        broken = replace(LEFT, terminals=(*TERMINALS, "omega"))

        with pytest.raises(ValueError, match="not attached"):
            broken.validate()

    @pytest.mark.parametrize(("generalized", "seed"), [(False, 1), (False, 2), (True, 3)])
    def test_flip_symmetry(self, generalized: bool, seed: int) -> None:
        """Test that each class on the left equals its top-bottom mirror on the right for arbitrary weights."""
        catalog = on_catalog(generalized=generalized)
        weights = _arbitrary_weights(seed)
        left = enumerate_diagram(LEFT, catalog)
        right = enumerate_diagram(RIGHT, catalog)

        for terminal_class in realizable_classes(catalog):
            lhs = math.fsum(term.value(weights) for term in left.get(terminal_class, ()))
            rhs = math.fsum(term.value(weights) for term in right.get(terminal_class.flipped(), ()))
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestTerminalClass:
    """Test cases for terminal-class symmetries."""

    def test_flip(self) -> None:
        """Test that the flip swaps the terminals and the anchor types."""
        terminal_class = TerminalClass(
            (TerminalState(), TerminalState(1, TOP_ANCHOR), TerminalState(1, "delta"), TerminalState(1, "gamma"))
        )

        assert terminal_class.flipped().label == f"beta,alpha,-,{BOTTOM_ANCHOR}"
        assert terminal_class.flipped().flipped() == terminal_class
        assert not terminal_class.is_flip_invariant

    def test_recolour(self) -> None:
        """Test the colour exchange and the two-colour label."""
        terminal_class = TerminalClass(
            (TerminalState(1, "beta"), TerminalState(1, "alpha"), TerminalState(2, "-"), TerminalState()),
            colours=2,
        )

        assert terminal_class.recoloured().label == "2:beta,2:alpha,1:-,0:-"


class TestResiduals:
    """Test cases for the reflection residuals of the integrable weights."""

    @pytest.mark.parametrize("branch", list(Branch))
    @pytest.mark.parametrize(("lam", "lam1", "x"), [(0.2, 0.1, 0.15), (0.3, 0.2, 0.4), (0.45, 0.2, 0.7)])
    @pytest.mark.parametrize("y", [0.1, 0.25])
    def test_on(self, lam: float, lam1: float, x: float, y: float, branch: Branch) -> None:
        """Test the O(n) boundary weights on both branches."""
        weights = on_reflection_weights(on_params(lam, lam1, x), y, branch)
        residuals = re_residuals(weights, on_catalog())

        assert len(residuals) == 5
        assert max(residuals.values()) < 1e-10

    @pytest.mark.parametrize("branch", list(Branch))
    @pytest.mark.parametrize(("lam", "lam1", "x"), [(0.2, 0.1, 0.15), (0.3, 0.2, 0.4), (0.45, 0.2, 0.7)])
    def test_c2(self, lam: float, lam1: float, x: float, branch: Branch) -> None:
        """Test the C2(1) boundary weights on both branches."""
        weights = c2_reflection_weights(c2_params(lam, lam1, x), 0.25, branch)
        residuals = re_residuals(weights, c2_catalog())

        assert len(residuals) == 6
        assert max(residuals.values()) < 1e-10

    def test_perturbed_weights_fail(self, on_point: OnParams) -> None:
        """Test that shifted boundary and bulk weights violate the equation."""
        weights = on_reflection_weights(on_point, 0.1, Branch.REAL).perturbed("beta1", 0.1).perturbed("u1", 0.1)

        assert max(re_residuals(weights, on_catalog()).values()) > 1e-4

    def test_perturbation_of_absent_symbol(self, on_point: OnParams) -> None:
        """Test that perturbing a symbol absent from every set raises KeyError."""
        with pytest.raises(KeyError, match="does not occur"):
            on_reflection_weights(on_point, 0.1, Branch.REAL).perturbed("beta4", 0.1)

    def test_single_class(self, on_point: OnParams) -> None:
        """Test the residual of one explicitly chosen class."""
        catalog = on_catalog()
        terminal_class = _class_by_label(catalog, f"-,{TOP_ANCHOR},{BOTTOM_ANCHOR},-")
        weights = on_reflection_weights(on_point, 0.25, Branch.IMAGINARY)

        assert re_residual(weights, terminal_class, catalog) < 1e-10

    @pytest.mark.parametrize("k", [0.0, 0.5, 2.0])
    @pytest.mark.parametrize(("lam", "x"), [(0.3, 0.4), (0.45, 0.7), (0.2, 0.15)])
    def test_generalized(self, lam: float, x: float, k: float) -> None:
        """Test the asymmetric O(n) family with a common boundary fugacity."""
        for y in (0.1, 0.25):
            residuals = re_residual_generalized(gen_on_params(lam, x, k, 0.7), y)
            assert len(residuals) > 0
            assert max(residuals.values()) < 1e-10

    def test_generalized_unequal_fugacities(self, gen_point: GenOnParams) -> None:
        """Test that the family fails once the anchor type changes the loop fugacity."""
        n = gen_point.fugacities()["n"]
        fugacities = {"n": n, "n1": 1.0, "n2": 2.0, "n3": math.sqrt(5.0 - 2.0 * n)}

        residuals = re_residual_generalized(gen_point, 0.1, fugacities=fugacities)

        assert max(residuals.values()) > 1e-3

    def test_generalized_weights_carry_fugacities(self, gen_point: GenOnParams) -> None:
        """Test that the override replaces the common fugacity."""
        weights = gen_reflection_weights(gen_point, 0.1, {"n": 0.0, "n1": 1.0, "n2": 2.0, "n3": 3.0})

        assert dict(weights.fugacities) == {"n": 0.0, "n1": 1.0, "n2": 2.0, "n3": 3.0}
        assert weights.boundary_x.model is WeightModel.GEN_ON_BOUNDARY
