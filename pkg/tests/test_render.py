"""Deterministic diagram rendering in SVG and TikZ."""

import pytest

from strandcheck.base import BasePresentation
from strandcheck.calculus import (
    Counit,
    Layer,
    Shriek,
    Star,
    TERMINAL,
    Unit,
    cells,
    fiber,
    from_layers,
    identity_diagram,
    single,
)
from strandcheck.descent import (
    _Names,
    builtin_descent_base,
    bundled_scripts,
    signature_for,
    translate_F,
)
from strandcheck.errors import StrandcheckError
from strandcheck.render import layout, render, render_svg, render_tikz


@pytest.fixture(scope="module")
def names():
    return _Names(builtin_descent_base())


def test_identity_is_single_unbroken_strand(names):
    d = identity_diagram(cells(fiber(names.B), Shriek(names.f)))
    scene = layout(d)
    assert scene.nodes == []
    assert len(scene.curves) == 1
    c = scene.curves[0]
    assert c.x0 == c.x1
    assert (c.y0, c.y1) == (0.0, scene.height)


def test_empty_identity_is_blank_region():
    d = identity_diagram(cells(TERMINAL))
    scene = layout(d)
    assert scene.curves == [] and scene.nodes == []
    svg = render_svg(d)
    assert "<path" not in svg
    assert svg.count("<rect") == 1


def test_unit_renders_as_cap(names):
    d = single(Unit(names.f))
    scene = layout(d)
    assert len(scene.nodes) == 1
    node = scene.nodes[0]
    assert node.label == "eta(f)"
    outgoing = [c for c in scene.curves
                if (c.x0, c.y0) == (node.x, node.y) and c.y1 > node.y]
    assert len(outgoing) == 2
    assert outgoing[0].x1 != outgoing[1].x1


def test_counit_has_two_incoming_strands(names):
    d = single(Counit(names.f))
    scene = layout(d)
    node = scene.nodes[0]
    incoming = [c for c in scene.curves
                if (c.x1, c.y1) == (node.x, node.y) and c.y0 < node.y]
    assert len(incoming) == 2


def test_whiskered_unit_keeps_neighbours_straight(names):
    # a unit whiskered between strands: the neighbours stay vertical at
    # their positions and the new pair fans out of the node between them
    d = from_layers([
        Layer(cells(fiber(names.f.dst), Star(names.f)), Unit(names.delta),
              cells(fiber(names.B), Shriek(names.f))),
    ])
    scene = layout(d)
    node = scene.nodes[0]
    fan = [c for c in scene.curves if (c.x0, c.y0) == (node.x, node.y)]
    assert len(fan) == 2
    passing = [c for c in scene.curves
               if c.y0 < node.y < c.y1 and (c.x0, c.y0) != (node.x, node.y)]
    for c in passing:
        assert c.x0 == c.x1
        assert abs(c.x0 - node.x) > node.half_w


def test_translated_action_diagram_renders(names):
    alpha = signature_for("TA", names.base).descent_generator()
    d = translate_F(single(alpha), names.base)
    svg = render_svg(d)
    tikz = render_tikz(d)
    assert svg.startswith("<?xml")
    assert "\\begin{tikzpicture}" in tikz


def test_all_bundled_claims_render(names):
    for script in bundled_scripts():
        for side in (script.claim_lhs, script.claim_rhs):
            assert render_svg(side).endswith("</svg>\n")


def test_output_is_deterministic(names):
    alpha = signature_for("TA", names.base).descent_generator()
    d = translate_F(single(alpha), names.base)
    assert render_svg(d) == render_svg(d)
    assert render_tikz(d) == render_tikz(d)


def test_builtin_palette_colours(names):
    d = identity_diagram(cells(fiber(names.f.dst), Star(names.f)))
    svg = render_svg(d)
    # E_B regions are DustyRed at 40 percent, E_A regions SageGreen at 40
    assert 'fill="#e1bbbb"' in svg and "DustyRed" in svg
    assert 'fill="#d7dfcf"' in svg and "SageGreen" in svg
    tikz = render_tikz(d)
    assert "\\definecolor{DustyRed}{RGB}{180,85,85}" in tikz
    assert "DustyRed!40" in tikz


def test_terminal_region_colour():
    svg = render_svg(identity_diagram(cells(TERMINAL)))
    assert "EggShell" in svg


def test_extension_palette_for_user_bases():
    base = BasePresentation()
    z = base.object("Z")
    w = base.object("W")
    g = base.arrow("g", z, w)
    d = identity_diagram(cells(fiber(w), Star(g)))
    svg = render_svg(d)
    assert "Apricot" in svg and "Celadon" in svg
    assert render_svg(d) == render_svg(d)


def test_unknown_format_rejected(names):
    d = single(Unit(names.f))
    render(d, "svg")
    render(d, "tikz")
    with pytest.raises(StrandcheckError):
        render(d, "pdf")


def test_node_count_matches_layers(names):
    for script in bundled_scripts()[:4]:
        d = script.claim_lhs
        assert len(layout(d).nodes) == len(d.layers)
