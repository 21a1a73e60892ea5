"""Base-category paths, relations, polygon types and marked squares."""

import pytest

from strandcheck.base import (
    BasePresentation,
    Path,
    PolygonType,
    compose_paths,
    empty_path,
    opposite,
    paste_polygon_types,
    path_of,
    paths_equal,
    validate_polygon_type,
)
from strandcheck.errors import (
    InvalidBinding,
    NonComposable,
    NotParallel,
    ValueEqualityNotProven,
)


@pytest.fixture
def descent_base():
    """The kernel-pair base: f with its first and second kernel pairs."""
    base = BasePresentation()
    A, B, Q, R = (base.object(n) for n in "ABQR")
    f = base.arrow("f", B, A)
    f1 = base.arrow("f1", Q, B)
    f2 = base.arrow("f2", Q, B)
    delta = base.arrow("delta", B, Q)
    pi1 = base.arrow("pi1", R, Q)
    pi2 = base.arrow("pi2", R, Q)
    pi = base.arrow("pi", R, Q)
    base.relate(path_of(f1, f), path_of(f2, f))
    base.relate(path_of(pi2, f2), path_of(pi1, f1))
    base.relate(path_of(pi, f1), path_of(pi2, f1))
    base.relate(path_of(pi, f2), path_of(pi1, f2))
    base.relate(path_of(delta, f1), empty_path(B))
    base.relate(path_of(delta, f2), empty_path(B))
    return base


def test_path_composability_enforced(descent_base):
    f = descent_base.arrow_by_name("f")
    f1 = descent_base.arrow_by_name("f1")
    with pytest.raises(NonComposable):
        path_of(f, f1)  # f ends at A, f1 starts at Q
    p = path_of(f1, f)
    assert p.src.name == "Q" and p.dst.name == "A"


def test_compose_paths_unit_and_assoc(descent_base):
    f = descent_base.arrow_by_name("f")
    f1 = descent_base.arrow_by_name("f1")
    pi1 = descent_base.arrow_by_name("pi1")
    p = path_of(pi1)
    q = path_of(f1)
    r = path_of(f)
    assert compose_paths(p, empty_path(p.dst)) == p
    assert compose_paths(empty_path(p.src), p) == p
    assert compose_paths(compose_paths(p, q), r) == compose_paths(p, compose_paths(q, r))


def test_paths_equal_direct_relation(descent_base):
    f = descent_base.arrow_by_name("f")
    f1 = descent_base.arrow_by_name("f1")
    f2 = descent_base.arrow_by_name("f2")
    assert paths_equal(descent_base, path_of(f1, f), path_of(f2, f))


def test_paths_equal_to_identity(descent_base):
    delta = descent_base.arrow_by_name("delta")
    f1 = descent_base.arrow_by_name("f1")
    B = descent_base.object_by_name("B")
    assert paths_equal(descent_base, path_of(delta, f1), empty_path(B))


def test_paths_equal_negative(descent_base):
    f1 = descent_base.arrow_by_name("f1")
    f2 = descent_base.arrow_by_name("f2")
    assert not paths_equal(descent_base, path_of(f1), path_of(f2))


def test_paths_equal_needs_parallel(descent_base):
    f = descent_base.arrow_by_name("f")
    f1 = descent_base.arrow_by_name("f1")
    with pytest.raises(NotParallel):
        paths_equal(descent_base, path_of(f), path_of(f1, f))


def test_paths_equal_chained(descent_base):
    # pi;f1;f = pi1;f1;f needs two rewrite steps through pi2
    pi = descent_base.arrow_by_name("pi")
    pi1 = descent_base.arrow_by_name("pi1")
    f1 = descent_base.arrow_by_name("f1")
    f = descent_base.arrow_by_name("f")
    assert paths_equal(descent_base, path_of(pi, f1, f), path_of(pi1, f1, f))


def test_polygon_type_validation(descent_base):
    f = descent_base.arrow_by_name("f")
    f1 = descent_base.arrow_by_name("f1")
    f2 = descent_base.arrow_by_name("f2")
    pt = PolygonType(path_of(f1, f), path_of(f2, f))
    validate_polygon_type(descent_base, pt)
    with pytest.raises(ValueEqualityNotProven):
        validate_polygon_type(descent_base, PolygonType(path_of(f1), path_of(f2)))


def test_degenerate_polygon_type(descent_base):
    delta = descent_base.arrow_by_name("delta")
    f2 = descent_base.arrow_by_name("f2")
    B = descent_base.object_by_name("B")
    validate_polygon_type(descent_base, PolygonType(path_of(delta, f2), empty_path(B)))
    validate_polygon_type(descent_base, PolygonType(empty_path(B), empty_path(B)))


def test_opposite_involutive(descent_base):
    f = descent_base.arrow_by_name("f")
    f1 = descent_base.arrow_by_name("f1")
    f2 = descent_base.arrow_by_name("f2")
    pt = PolygonType(path_of(f1, f), path_of(f2, f))
    assert opposite(opposite(pt)) == pt
    assert opposite(pt).top == pt.bottom


def test_paste_vertical(descent_base):
    f = descent_base.arrow_by_name("f")
    f1 = descent_base.arrow_by_name("f1")
    f2 = descent_base.arrow_by_name("f2")
    pt1 = PolygonType(path_of(f1, f), path_of(f2, f))
    pt2 = PolygonType(path_of(f2, f), path_of(f1, f))
    pasted = paste_polygon_types("vertical", pt1, pt2)
    assert pasted == PolygonType(path_of(f1, f), path_of(f1, f))
    with pytest.raises(NotParallel):
        paste_polygon_types("vertical", pt1, pt1)


def test_paste_horizontal(descent_base):
    pi1 = descent_base.arrow_by_name("pi1")
    pi2 = descent_base.arrow_by_name("pi2")
    f1 = descent_base.arrow_by_name("f1")
    f2 = descent_base.arrow_by_name("f2")
    left = PolygonType(path_of(pi2), path_of(pi1))
    right = PolygonType(path_of(f2), path_of(f1))
    pasted = paste_polygon_types("horizontal", left, right)
    assert pasted == PolygonType(path_of(pi2, f2), path_of(pi1, f1))


def test_mark_square_requires_derivable_commutativity(descent_base):
    f = descent_base.arrow_by_name("f")
    f1 = descent_base.arrow_by_name("f1")
    f2 = descent_base.arrow_by_name("f2")
    sq = descent_base.mark_square("P1", f1, f2, f, f)
    assert sq.commutativity() == PolygonType(path_of(f1, f), path_of(f2, f))
    with pytest.raises(InvalidBinding):
        descent_base.mark_square("bad", f1, f1, f, f1)  # edges do not meet


def test_mark_square_rejects_unproven(descent_base):
    pi1 = descent_base.arrow_by_name("pi1")
    pi2 = descent_base.arrow_by_name("pi2")
    f1 = descent_base.arrow_by_name("f1")
    f2 = descent_base.arrow_by_name("f2")
    # pi1;f2 = pi2;f1 is not derivable from the declared relations
    with pytest.raises(ValueEqualityNotProven):
        descent_base.mark_square("bad", pi1, pi2, f2, f1)


def test_duplicate_names_rejected(descent_base):
    B = descent_base.object_by_name("B")
    A = descent_base.object_by_name("A")
    with pytest.raises(InvalidBinding):
        descent_base.arrow("f", B, A)
    with pytest.raises(InvalidBinding):
        descent_base.object_by_name("Z")


def test_empty_path_repr_and_identity():
    base = BasePresentation()
    X = base.object("X")
    e = empty_path(X)
    assert e.is_empty
    assert compose_paths(e, e) == e
