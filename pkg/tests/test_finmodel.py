"""The finite-set families model and its extensional oracle."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strandcheck.calculus import (
    Counit,
    Layer,
    MacroCell,
    Shriek,
    Star,
    Unit,
    cells,
    exchange_canonical,
    fiber,
    from_layers,
    identity_cells,
    identity_diagram,
    single,
    vcompose,
)
from strandcheck.descent import (
    _Names,
    axiom_equations,
    builtin_descent_base,
    bundled_scripts,
    etaprime,
    muprime,
    signature_for,
    substitute_descent,
    translate_H,
)
from strandcheck.errors import (
    BoundaryMismatch,
    EnvMissing,
    InvalidGenerator,
    RelationViolated,
    TypeMismatch,
)
from strandcheck.finmodel import (
    Family,
    compose_maps,
    free_algebra_env,
    identity_map,
    interpret_diagram,
    interpret_path,
    interpret_token,
    make_instance,
    oracle_equal,
    random_family,
    random_instance,
    terminal_family,
    validate_instance,
)
from strandcheck.rewrite import bc_expansion


@pytest.fixture(scope="module")
def base():
    return builtin_descent_base()


@pytest.fixture(scope="module")
def names(base):
    return _Names(base)


@pytest.fixture(scope="module")
def inst():
    return make_instance(("a",), ("b1", "b2"), {"b1": "a", "b2": "a"})


def _obj(inst, name):
    return inst.base.object_by_name(name)


# ---------------------------------------------------------------------------
# instances


def test_constant_f_pullback_sizes(inst):
    assert len(inst.carrier[_obj(inst, "Q")]) == 4
    assert len(inst.carrier[_obj(inst, "R")]) == 8


def test_empty_b_instance():
    empty = make_instance(("a",), (), {})
    assert empty.carrier[_obj(empty, "B")] == ()
    assert empty.carrier[_obj(empty, "Q")] == ()
    assert empty.carrier[_obj(empty, "R")] == ()


def test_injective_f_collapses_q():
    one = make_instance(("a1", "a2"), ("b1", "b2"), {"b1": "a1", "b2": "a2"})
    q = one.carrier[_obj(one, "Q")]
    assert set(q) == {("b1", "b1"), ("b2", "b2")}
    f1 = one.base.arrow_by_name("f1")
    f2 = one.base.arrow_by_name("f2")
    assert all(one.apply_arrow(f1, e) == one.apply_arrow(f2, e) for e in q)


def test_non_total_f_rejected():
    with pytest.raises(RelationViolated):
        make_instance(("a",), ("b1", "b2"), {"b1": "a"})


def test_validate_instance_catches_tampering(inst):
    broken = make_instance(("a",), ("b1", "b2"), {"b1": "a", "b2": "a"})
    pi = broken.base.arrow_by_name("pi")
    r0 = broken.carrier[_obj(broken, "R")][0]
    q_other = broken.carrier[_obj(broken, "Q")][-1]
    broken.action[pi] = dict(broken.action[pi])
    broken.action[pi][r0] = q_other
    with pytest.raises(RelationViolated):
        validate_instance(broken)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 1_000_000))
def test_random_instances_validate(seed):
    inst = random_instance(random.Random(seed), 4)
    validate_instance(inst)


# ---------------------------------------------------------------------------
# tokens


def test_shriek_tags_and_counts(inst, names):
    b = _obj(inst, "B")
    x = Family(b, (("b1", ("x",)), ("b2", ("y", "z"))))
    pushed = interpret_token(Shriek(names.f), inst, x)
    assert pushed.over == _obj(inst, "A")
    assert set(pushed.fiber("a")) == {("b1", "x"), ("b2", "y"), ("b2", "z")}


def test_star_is_strictly_functorial(inst, names):
    b = _obj(inst, "B")
    y = Family(b, (("b1", ("u",)), ("b2", ("v",))))
    one = interpret_token(Star(names.f1), inst, y)
    two = interpret_token(Star(names.pi1), inst, one)
    composite = interpret_path(cells(fiber(names.B), Star(names.f1),
                                     Star(names.pi1)), inst, y)
    assert composite == two
    assert two.over == _obj(inst, "R")


def test_star_on_empty_family(inst, names):
    b = _obj(inst, "B")
    empty = Family(b, (("b1", ()), ("b2", ())))
    pulled = interpret_token(Star(names.f1), inst, empty)
    assert pulled.total_size() == 0


def test_objtok_needs_env(inst, names):
    with pytest.raises(EnvMissing):
        interpret_token(names.x, inst, terminal_family())


def test_objtok_wrong_fiber_rejected(inst, names):
    a = _obj(inst, "A")
    with pytest.raises(TypeMismatch):
        interpret_token(names.x, inst, terminal_family(),
                        {names.x: Family(a, (("a", ()),))})


# ---------------------------------------------------------------------------
# diagrams


def _family_over_b(inst, sizes=("x", "yz")):
    b = _obj(inst, "B")
    return Family(b, (("b1", tuple(sizes[0])), ("b2", tuple(sizes[1]))))


def test_identity_diagram_is_identity_map(inst, names):
    x = _family_over_b(inst)
    d = identity_diagram(cells(fiber(names.B), Shriek(names.f)))
    m = interpret_diagram(d, inst, input_family=x)
    assert m == identity_map(m.src)


def test_shriek_triangle_is_identity(inst, names):
    eB, eA = fiber(names.B), fiber(names.f.dst)
    zig = from_layers([
        Layer(identity_cells(eB), Unit(names.f), cells(eB, Shriek(names.f))),
        Layer(cells(eB, Shriek(names.f)), Counit(names.f), identity_cells(eA)),
    ])
    x = _family_over_b(inst)
    m = interpret_diagram(zig, inst, input_family=x)
    assert m == identity_map(m.src)


def test_star_triangle_is_identity(inst, names):
    eB, eA = fiber(names.B), fiber(names.f.dst)
    zig = from_layers([
        Layer(cells(eA, Star(names.f)), Unit(names.f), identity_cells(eB)),
        Layer(identity_cells(eA), Counit(names.f), cells(eA, Star(names.f))),
    ])
    a = _obj(inst, "A")
    y = Family(a, (("a", ("p", "q")),))
    m = interpret_diagram(zig, inst, input_family=y)
    assert m == identity_map(m.src)


def test_comparison_roundtrips_are_identities(inst, names):
    from strandcheck.calculus import SquareInv

    fwd = bc_expansion(names.P1)
    bwd = single(SquareInv(names.P1))
    b = _obj(inst, "B")
    for trip in (vcompose(fwd, bwd), vcompose(bwd, fwd)):
        dom_obj = trip.source.dom.obj
        x = random_family(random.Random(5), inst, dom_obj, 2) if dom_obj != b \
            else _family_over_b(inst)
        m = interpret_diagram(trip, inst, input_family=x)
        assert m == identity_map(m.src)


def test_interpretation_invariant_under_exchange(inst, names):
    d = muprime(names.base)
    x = _family_over_b(inst)
    m1 = interpret_diagram(d, inst, input_family=x)
    m2 = interpret_diagram(exchange_canonical(d), inst, input_family=x)
    assert m1 == m2


def test_interpretation_is_functorial(inst, names):
    d1 = etaprime(names.base)
    d2 = from_layers([
        Layer(identity_cells(fiber(names.B)), Unit(names.delta),
              cells(fiber(names.B), Star(names.f1), Shriek(names.f2))),
    ])
    x = _family_over_b(inst)
    m1 = interpret_diagram(d1, inst, input_family=x)
    m2 = interpret_diagram(d2, inst, input_family=x)
    composite = interpret_diagram(vcompose(d1, d2), inst, input_family=x)
    assert composite == compose_maps(m1, m2)


def test_macro_cell_not_interpretable(inst, names):
    mac = MacroCell("mystery", (), cells(fiber(names.B)),
                    cells(fiber(names.B)))
    d = single(mac)
    with pytest.raises(InvalidGenerator):
        interpret_diagram(d, inst, input_family=_family_over_b(inst))


def test_missing_input_family(inst, names):
    d = identity_diagram(cells(fiber(names.B), Shriek(names.f)))
    with pytest.raises(EnvMissing):
        interpret_diagram(d, inst)


# ---------------------------------------------------------------------------
# the free environment and the oracle


def test_free_env_satisfies_all_axiom_systems(inst, names):
    rng = random.Random(11)
    for trial in range(5):
        env = free_algebra_env(rng, inst, 3)
        for kind in ("TA", "DD", "AC"):
            for eq in axiom_equations(kind, names.base):
                lhs = interpret_diagram(eq.lhs, inst, env)
                rhs = interpret_diagram(eq.rhs, inst, env)
                assert lhs == rhs, f"{eq.name} fails extensionally"


def test_oracle_rejects_non_parallel(names):
    with pytest.raises(BoundaryMismatch):
        oracle_equal(single(Unit(names.f)), single(Unit(names.f2)))


def test_oracle_eta_trans_claim():
    script = {s.name: s for s in bundled_scripts()}["eta_trans"]
    report = oracle_equal(script.claim_lhs, script.claim_rhs,
                          inst_count=100, max_size=3, seed=7, max_fiber=2)
    assert report.verdict == "Verified"
    assert report.stats == {"samples": 100, "mismatches": 0}


def test_oracle_all_bundled_claims():
    for script in bundled_scripts():
        report = oracle_equal(script.claim_lhs, script.claim_rhs,
                              inst_count=25, max_size=3, seed=7, max_fiber=2)
        assert report.verdict == "Verified", script.name


def test_oracle_ta2_with_translated_action(names):
    beta = single(signature_for("AC", names.base).descent_generator())
    alpha_impl = translate_H(beta, names.base)
    ta2 = axiom_equations("TA", names.base)[1]
    report = oracle_equal(substitute_descent(ta2.lhs, alpha_impl),
                          substitute_descent(ta2.rhs, alpha_impl),
                          inst_count=30, max_size=3, seed=3, max_fiber=2)
    assert report.verdict == "Verified"


def test_oracle_detects_distinct_counit_placements(names):
    eA = fiber(names.f.dst)
    pair = cells(eA, Star(names.f), Shriek(names.f))
    inner = from_layers([Layer(identity_cells(eA), Counit(names.f), pair)])
    outer = from_layers([Layer(pair, Counit(names.f), identity_cells(eA))])
    report = oracle_equal(inner, outer, inst_count=50, max_size=3,
                          seed=1, max_fiber=2)
    assert report.verdict == "Failed"
    assert report.stats["mismatches"] > 0
    assert "sample" in report.reason


def test_oracle_deterministic_per_seed(names):
    d = single(Unit(names.f))
    r1 = oracle_equal(d, d, inst_count=10, max_size=3, seed=9)
    r2 = oracle_equal(d, d, inst_count=10, max_size=3, seed=9)
    assert r1.verdict == r2.verdict == "Verified"
    assert r1.stats == r2.stats


def test_empty_instance_evaluates(names):
    empty = make_instance(("a",), (), {})
    d = muprime(names.base)
    b = _obj(empty, "B")
    x = Family(b, ())
    m = interpret_diagram(d, empty, input_family=x)
    assert m.components == {}
    env = free_algebra_env(random.Random(0), empty, 2)
    for eq in axiom_equations("AC", names.base):
        assert interpret_diagram(eq.lhs, empty, env) == \
            interpret_diagram(eq.rhs, empty, env)
