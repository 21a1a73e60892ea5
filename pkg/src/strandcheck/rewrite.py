"""Rule schemas, macros, normalization, and the proof-script checker.

The rules are the defining relations of the pseudofunctorial and
bifibrational term calculi (coherence collapse, adjunction triangles,
comparison-cell invertibility) together with three derived rules
(coherence invertibility, generalized whiskering, horizontal pasting).
Proof scripts rewrite a claim's left-hand side step by step into its
right-hand side; every step is re-validated against the stated rule,
position, and result, modulo planar isotopy only.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .base import (
    ArrowGen,
    Path,
    PolygonType,
    PullbackSquare,
    compose_paths,
    opposite,
    paste_polygon_types,
    path_of,
    validate_polygon_type,
)
from .calculus import (
    Coherence,
    Counit,
    Diagram,
    Layer,
    MacroCell,
    OneCellPath,
    Shriek,
    Signature,
    SquareInv,
    Star,
    Unit,
    cells,
    concat_cells,
    exchange_canonical,
    fiber,
    from_layers,
    generator_boundary,
    identity_cells,
    identity_diagram,
    isotopic,
    shriek_lift,
    single,
    slice_cells,
    star_lift,
    unstar,
    validate_diagram,
    vcompose,
    whisker,
)
from .errors import (
    BoundaryChanged,
    InvalidBinding,
    InvalidGenerator,
    NotFibFragment,
    PatternNotFound,
    RegionNotPureChi,
    ResultMismatch,
    SideConditionFailed,
    UnprovenDependency,
)

RULE_NAMES = ("R1", "R2", "R3.1", "R3.2", "R4.1", "R4.2", "R5.1", "R5.2",
              "L1a", "L1b", "L1c")

AXIOM_NAMES = ("TA1", "TA2", "DD1", "DD2", "AC1", "AC2")


# ---------------------------------------------------------------------------
# rule instantiation


def _triangle_shriek(h: ArrowGen) -> Diagram:
    """The unit/counit zig-zag on the direct-image string of ``h``."""
    string = cells(fiber(h.src), Shriek(h))
    l1 = Layer(identity_cells(fiber(h.src)), Unit(h), string)
    l2 = Layer(string, Counit(h), identity_cells(fiber(h.dst)))
    return Diagram(string, string, (l1, l2))


def _triangle_star(h: ArrowGen) -> Diagram:
    """The unit/counit zig-zag on the pullback string of ``h``."""
    string = cells(fiber(h.dst), Star(h))
    l1 = Layer(string, Unit(h), identity_cells(fiber(h.src)))
    l2 = Layer(identity_cells(fiber(h.dst)), Counit(h), string)
    return Diagram(string, string, (l1, l2))


def bc_expansion(square: PullbackSquare) -> Diagram:
    """The forward comparison cell of a marked square as a unit/coherence/counit
    composite; boundary [a*, c_!] => [d_!, b*]."""
    a, c, d, b = square.a, square.c, square.d, square.b
    src = cells(fiber(a.dst), Star(a), Shriek(c))
    l1 = Layer(identity_cells(fiber(d.src)), Unit(d), src)
    pt = PolygonType(path_of(a, d), path_of(c, b))
    l2 = Layer(cells(fiber(d.src), Shriek(d)), Coherence(pt),
               cells(fiber(c.src), Shriek(c)))
    l3 = Layer(cells(fiber(d.src), Shriek(d), Star(b)), Counit(c),
               identity_cells(fiber(c.dst)))
    return from_layers([l1, l2, l3])


def _boundary_chi(src: OneCellPath, tgt: OneCellPath) -> Diagram:
    """Single coherence layer (or identity) spanning the given star strings."""
    if src == tgt:
        return identity_diagram(src)
    return single(Coherence(PolygonType(unstar(src), unstar(tgt))))


def instantiate_rule(sig: Signature, name: str, binding: dict) -> tuple[Diagram, Diagram]:
    """The (lhs, rhs) diagram pair of a rule instance.

    Bindings by rule:
      R1: pt (polygon with syntactically equal sides)
      R2: pt1, pt2 (vertically composable polygons)
      R3.1 / R3.2: pt, arrow  (right / left whiskering absorption)
      R4.1 / R4.2: arrow      (triangle on the direct-image / pullback string)
      R5.1 / R5.2: square     (comparison followed by inverse and conversely)
      L1a: pt                 (coherence invertibility)
      L1b: pt, left, right    (generalized whiskering by base paths)
      L1c: pt1, pt2           (horizontal pasting of coherences)
    """
    try:
        return _RULES[name](sig, binding)
    except KeyError as exc:
        if name not in _RULES:
            raise InvalidBinding(f"unknown rule {name}") from None
        raise InvalidBinding(f"rule {name}: missing parameter {exc}") from None


def _rule_r1(sig, binding):
    pt = binding["pt"]
    if pt.top != pt.bottom:
        raise SideConditionFailed(f"R1 needs equal sides, got {pt!r}")
    validate_polygon_type(sig.base, pt)
    lhs = single(Coherence(pt))
    return lhs, identity_diagram(lhs.source)


def _rule_r2(sig, binding):
    pt1, pt2 = binding["pt1"], binding["pt2"]
    for pt in (pt1, pt2):
        validate_polygon_type(sig.base, pt)
    pasted = paste_polygon_types("vertical", pt1, pt2)
    lhs = vcompose(single(Coherence(pt1)), single(Coherence(pt2)))
    return lhs, single(Coherence(pasted))


def _rule_r31(sig, binding):
    pt, arrow = binding["pt"], binding["arrow"]
    validate_polygon_type(sig.base, pt)
    lhs = whisker("right", cells(fiber(arrow.dst), Star(arrow)), single(Coherence(pt)))
    return lhs, _boundary_chi(lhs.source, lhs.target)


def _rule_r32(sig, binding):
    pt, arrow = binding["pt"], binding["arrow"]
    validate_polygon_type(sig.base, pt)
    lhs = whisker("left", cells(fiber(arrow.dst), Star(arrow)), single(Coherence(pt)))
    return lhs, _boundary_chi(lhs.source, lhs.target)


def _rule_r41(sig, binding):
    h = binding["arrow"]
    lhs = _triangle_shriek(h)
    return lhs, identity_diagram(lhs.source)


def _rule_r42(sig, binding):
    h = binding["arrow"]
    lhs = _triangle_star(h)
    return lhs, identity_diagram(lhs.source)


def _require_marked(sig, square):
    if square not in sig.base.squares:
        raise SideConditionFailed(
            f"square {square.label} is not marked in the base presentation"
        )


def _rule_r51(sig, binding):
    square = binding["square"]
    _require_marked(sig, square)
    lhs = vcompose(bc_expansion(square), single(SquareInv(square)))
    return lhs, identity_diagram(lhs.source)


def _rule_r52(sig, binding):
    square = binding["square"]
    _require_marked(sig, square)
    lhs = vcompose(single(SquareInv(square)), bc_expansion(square))
    return lhs, identity_diagram(lhs.source)


def _rule_l1a(sig, binding):
    pt = binding["pt"]
    validate_polygon_type(sig.base, pt)
    lhs = vcompose(single(Coherence(pt)), single(Coherence(opposite(pt))))
    return lhs, identity_diagram(lhs.source)


def _rule_l1b(sig, binding):
    pt = binding["pt"]
    left, right = binding.get("left"), binding.get("right")
    validate_polygon_type(sig.base, pt)
    lhs = single(Coherence(pt))
    if right is not None:
        lhs = whisker("right", star_lift(right), lhs)
    if left is not None:
        lhs = whisker("left", star_lift(left), lhs)
    return lhs, _boundary_chi(lhs.source, lhs.target)


def _rule_l1c(sig, binding):
    """Horizontal pasting: pt1 and pt2 base-composable (pt1 then pt2); the
    string of pt2 sits left of the string of pt1 in diagram order."""
    pt1, pt2 = binding["pt1"], binding["pt2"]
    for pt in (pt1, pt2):
        validate_polygon_type(sig.base, pt)
    if pt1.dst != pt2.src:
        raise SideConditionFailed("L1c needs base-composable polygons")
    upper = whisker("right", star_lift(pt1.top), single(Coherence(pt2)))
    lower = whisker("left", star_lift(pt2.bottom), single(Coherence(pt1)))
    lhs = vcompose(upper, lower)
    return lhs, _boundary_chi(lhs.source, lhs.target)


_RULES: dict[str, Callable] = {
    "R1": _rule_r1, "R2": _rule_r2, "R3.1": _rule_r31, "R3.2": _rule_r32,
    "R4.1": _rule_r41, "R4.2": _rule_r42, "R5.1": _rule_r51, "R5.2": _rule_r52,
    "L1a": _rule_l1a, "L1b": _rule_l1b, "L1c": _rule_l1c,
}


# ---------------------------------------------------------------------------
# macros


def _eps_cascade(q: Path) -> list[Layer]:
    """Layers collapsing star_lift(q) ++ shriek_lift(q) to the empty string.

    Counits fire innermost-first: for q = <q1,...,qm> the string is
    [qm*, ..., q1*, q1!, ..., qm!] and eps(q1) fires at the center first.
    """
    layers = []
    at = concat_cells(star_lift(q), shriek_lift(q))
    for i, arrow in enumerate(q.arrows):
        k = len(q.arrows) - 1 - i
        layers.append(Layer(slice_cells(at, 0, k), Counit(arrow),
                            slice_cells(at, k + 2)))
        at = layers[-1].boundary()[1]
    return layers


def mate_expansion(pt: PolygonType) -> Diagram:
    """The mate of the coherence cell over ``pt``.

    Both sides must end with an arrow: top = p.<f>, bottom = q.<h>. The
    result runs star_lift(p) ++ shriek_lift(q)  =>  [f_!, h*].
    """
    if not pt.top.arrows or not pt.bottom.arrows:
        raise InvalidBinding("mate needs a final arrow on both polygon sides")
    f = pt.top.arrows[-1]
    h = pt.bottom.arrows[-1]
    p = Path(pt.top.src, pt.top.arrows[:-1], f.src)
    q = Path(pt.bottom.src, pt.bottom.arrows[:-1], h.src)
    src = concat_cells(star_lift(p), shriek_lift(q))
    l1 = Layer(identity_cells(fiber(f.src)), Unit(f), src)
    l2 = Layer(cells(fiber(f.src), Shriek(f)), Coherence(pt), shriek_lift(q))
    mid = l2.boundary()[1]
    tail = [Layer(concat_cells(slice_cells(mid, 0, 2), l.left), l.gen, l.right)
            for l in _eps_cascade(q)]
    return from_layers([l1, l2] + tail)


def mate2_expansion(pt: PolygonType) -> Diagram:
    """The two-fold mate of the coherence cell over a two-arrow polygon.

    For top = <g, f>, bottom = <k, h> the result runs
    [k_!, h_!]  =>  [g_!, f_!].
    """
    if len(pt.top.arrows) != 2 or len(pt.bottom.arrows) != 2:
        raise InvalidBinding("two-fold mate needs two arrows on both sides")
    g, f = pt.top.arrows
    k, h = pt.bottom.arrows
    src = shriek_lift(pt.bottom)
    l1 = Layer(identity_cells(fiber(g.src)), Unit(g), src)
    inner = mate_expansion(pt)
    mid = whisker("right", cells(fiber(h.src), Shriek(h)),
                  whisker("left", cells(fiber(g.src), Shriek(g)), inner))
    last = Layer(cells(fiber(g.src), Shriek(g), Shriek(f)), Counit(h),
                 identity_cells(fiber(h.dst)))
    return vcompose(vcompose(from_layers([l1]), mid), from_layers([last]))


_MACROS: dict[str, Callable] = {}


def macro(name):
    def register(fn):
        _MACROS[name] = fn
        return fn
    return register


@macro("BC")
def _macro_bc(sig, binding):
    square = binding["square"]
    _require_marked(sig, square)
    return bc_expansion(square)


@macro("mate")
def _macro_mate(sig, binding):
    pt = binding["pt"]
    validate_polygon_type(sig.base, pt)
    return mate_expansion(pt)


@macro("mate2")
def _macro_mate2(sig, binding):
    pt = binding["pt"]
    validate_polygon_type(sig.base, pt)
    return mate2_expansion(pt)


@macro("mu")
def _macro_mu(sig, binding):
    """Monad multiplication: the counit whiskered inside the monad string."""
    f = binding["arrow"]
    return from_layers([Layer(cells(fiber(f.src), Shriek(f)), Counit(f),
                              cells(fiber(f.dst), Star(f)))])


def expand_macro(sig: Signature, name: str, binding: dict) -> Diagram:
    try:
        fn = _MACROS[name]
    except KeyError:
        raise InvalidBinding(f"unknown macro {name}") from None
    try:
        return fn(sig, binding)
    except KeyError as exc:
        raise InvalidBinding(f"macro {name}: missing parameter {exc}") from None


def fold_macro(sig: Signature, name: str, binding: dict) -> Diagram:
    """The single-layer diagram holding the folded macro cell."""
    expansion = expand_macro(sig, name, binding)
    args = tuple(sorted(binding.items()))
    return single(MacroCell(name, args, expansion.source, expansion.target))


# ---------------------------------------------------------------------------
# normalization of the coherence-only fragment


def _require_pure_chi(d: Diagram) -> None:
    for layer in d.layers:
        if not isinstance(layer.gen, Coherence):
            raise NotFibFragment(f"non-coherence generator {layer.gen!r}")


def normalize_fib(d: Diagram) -> Diagram:
    """Unique normal form of a coherence-only diagram.

    By the coherence theorem for this fragment, the normal form is fully
    determined by the boundary: the identity when source and target strings
    coincide, else the single coherence cell of the boundary polygon type.
    """
    _require_pure_chi(d)
    if d.source == d.target:
        return identity_diagram(d.source)
    try:
        pt = PolygonType(unstar(d.source), unstar(d.target))
    except InvalidGenerator as exc:
        raise NotFibFragment(str(exc)) from None
    return Diagram(d.source, d.target, single(Coherence(pt)).layers)


def decide_fib_equal(d1: Diagram, d2: Diagram, debug: bool = False) -> bool:
    """Two-thinness decision: parallel coherence-only diagrams are equal."""
    _require_pure_chi(d1)
    _require_pure_chi(d2)
    same = d1.source == d2.source and d1.target == d2.target
    if debug and same:
        assert normalize_fib(d1) == normalize_fib(d2)
    return same


# ---------------------------------------------------------------------------
# oriented rewriting (used by the confluence probe)


def _oriented_successors_one(d: Diagram):
    """Single oriented rule applications on this exact layer presentation."""
    layers = d.layers
    for i, layer in enumerate(layers):
        pt = layer.gen.pt
        # R1: delete a trivial coherence cell
        if pt.top == pt.bottom:
            yield Diagram(d.source, d.target, layers[:i] + layers[i + 1 :])
        # R3.1: absorb the innermost right-whisker strand
        if layer.right.tokens and isinstance(layer.right.tokens[0], Star):
            a = layer.right.tokens[0].arrow
            ext = path_of(a)
            new_pt = PolygonType(compose_paths(ext, pt.top), compose_paths(ext, pt.bottom))
            new = Layer(layer.left, Coherence(new_pt), slice_cells(layer.right, 1))
            yield Diagram(d.source, d.target, layers[:i] + (new,) + layers[i + 1 :])
        # R3.2: absorb the innermost left-whisker strand
        if layer.left.tokens and isinstance(layer.left.tokens[-1], Star):
            a = layer.left.tokens[-1].arrow
            ext = path_of(a)
            new_pt = PolygonType(compose_paths(pt.top, ext), compose_paths(pt.bottom, ext))
            new = Layer(slice_cells(layer.left, 0, len(layer.left) - 1),
                        Coherence(new_pt), layer.right)
            yield Diagram(d.source, d.target, layers[:i] + (new,) + layers[i + 1 :])
        # R2: merge with the next layer when aligned
        if i + 1 < len(layers):
            nxt = layers[i + 1]
            if (nxt.left == layer.left and nxt.right == layer.right
                    and nxt.gen.pt.top == pt.bottom):
                merged = Layer(layer.left,
                               Coherence(paste_polygon_types("vertical", pt, nxt.gen.pt)),
                               layer.right)
                yield Diagram(d.source, d.target,
                              layers[:i] + (merged,) + layers[i + 2 :])


_CLASS_CACHE: dict = {}


class _LazyClass:
    """Exchange class of a diagram, expanded to layers only on demand."""

    def __init__(self, d: Diagram):
        from .calculus import class_words, compact_word

        self.source = d.source
        self.target = d.target
        self.words = class_words(compact_word(d.layers))
        self.diagrams: list[Diagram] = []

    def __iter__(self):
        from .calculus import expand_word

        for i in range(len(self.words)):
            if i >= len(self.diagrams):
                self.diagrams.append(Diagram(
                    self.source, self.target,
                    expand_word(self.source, self.words[i])))
            yield self.diagrams[i]


def _isotopy_class(d: Diagram):
    """All exchange-reachable layer presentations, in discovery order."""
    from .calculus import compact_word

    key = (d.source, compact_word(d.layers))
    hit = _CLASS_CACHE.get(key)
    if hit is None:
        if len(_CLASS_CACHE) > 64:
            _CLASS_CACHE.clear()
        hit = _LazyClass(d)
        _CLASS_CACHE[key] = hit
    return hit


def oriented_successors(d: Diagram) -> set[Diagram]:
    """All one-step oriented rewrites modulo isotopy, canonicalized."""
    out = set()
    for rep in _isotopy_class(d):
        for nxt in _oriented_successors_one(rep):
            out.add(exchange_canonical(nxt))
    return out


def absorb_closure(d: Diagram) -> Diagram:
    """Apply whisker-absorption steps until none applies, canonically.

    Absorption steps strictly commute with each other and with deletion and
    merging of other layers (statewise diamonds, checked by property tests),
    so the closure is well defined and the set of reachable terminal forms
    is unchanged when exploration is restricted to closed diagrams.
    """
    layers = list(d.layers)
    changed = True
    while changed:
        changed = False
        for i, layer in enumerate(layers):
            if not isinstance(layer.gen, Coherence):
                continue
            pt = layer.gen.pt
            if layer.right.tokens and isinstance(layer.right.tokens[0], Star):
                a = layer.right.tokens[0].arrow
                ext = path_of(a)
                layers[i] = Layer(
                    layer.left,
                    Coherence(PolygonType(compose_paths(ext, pt.top),
                                          compose_paths(ext, pt.bottom))),
                    slice_cells(layer.right, 1))
                changed = True
                break
            if layer.left.tokens and isinstance(layer.left.tokens[-1], Star):
                a = layer.left.tokens[-1].arrow
                ext = path_of(a)
                layers[i] = Layer(
                    slice_cells(layer.left, 0, len(layer.left) - 1),
                    Coherence(PolygonType(compose_paths(pt.top, ext),
                                          compose_paths(pt.bottom, ext))),
                    layer.right)
                changed = True
                break
    return exchange_canonical(Diagram(d.source, d.target, tuple(layers)))


def normal_forms(d: Diagram, limit: int = 10000) -> set[Diagram]:
    """All terminal diagrams reachable by oriented rewriting, modulo isotopy.

    Exploration is breadth-first over deletion and merge redex choices,
    with absorption applied up to closure between steps; the commutation
    diamonds recorded at ``absorb_closure`` make this reach exactly the
    terminals of the unrestricted system.
    """
    _require_pure_chi(d)
    start = absorb_closure(exchange_canonical(d))
    seen = {start}
    frontier = deque([start])
    terminals = set()
    while frontier:
        if len(seen) > limit:
            raise RuntimeError("rewrite state space exceeded the exploration limit")
        cur = frontier.popleft()
        succs = {absorb_closure(nxt) for nxt in oriented_successors(cur)}
        if not succs:
            terminals.add(cur)
            continue
        for nxt in succs:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return terminals


# ---------------------------------------------------------------------------
# random coherence diagrams and the confluence probe


def random_chi_diagram(sig: Signature, rng: random.Random,
                       max_layers: int, max_path_len: int) -> Diagram:
    """A random coherence-only diagram built by rewriting a random base path.

    Each layer replaces a relation-instance subpath of the current base
    path, so every generated polygon type is valid by construction.
    """
    base = sig.base
    arrows = sorted(base.arrows)
    if not arrows:
        raise InvalidBinding("the base has no arrows to sample from")
    # random composable path
    start = rng.choice(arrows)
    path_arrows = [start]
    while len(path_arrows) < max_path_len and rng.random() < 0.7:
        nxt = [a for a in arrows if a.src == path_arrows[-1].dst]
        if not nxt:
            break
        path_arrows.append(rng.choice(nxt))
    cur = path_of(*path_arrows)
    layers = []
    source = star_lift(cur)
    n_layers = rng.randrange(max_layers + 1)
    for _ in range(n_layers):
        options = []
        arr = cur.arrows
        # trivial polygons over any subpath (rule R1 shapes) and relation steps
        for i in range(len(arr) + 1):
            for j in range(i, len(arr) + 1):
                at_src = arr[i - 1].dst if i > 0 else cur.src
                at_dst = arr[j - 1].dst if j > 0 else cur.src
                sub = Path(at_src, arr[i:j], at_dst)
                if rng.random() < 0.15:
                    options.append((i, j, sub, sub))
        for rel in base.relations:
            for lhs, rhs in ((rel.lhs, rel.rhs), (rel.rhs, rel.lhs)):
                k = len(lhs.arrows)
                if len(arr) - k + len(rhs.arrows) > max_path_len:
                    continue  # keep every intermediate path within the bound
                for i in range(len(arr) - k + 1):
                    if arr[i : i + k] == lhs.arrows:
                        at = arr[i - 1].dst if i > 0 else cur.src
                        if lhs.src != at:
                            continue
                        options.append((i, i + k, lhs, rhs))
        if not options:
            break
        i, j, top, bottom = rng.choice(options)
        prefix = Path(cur.src, cur.arrows[:i], top.src)
        suffix = Path(top.dst, cur.arrows[j:], cur.dst)
        layer = Layer(star_lift(suffix), Coherence(PolygonType(top, bottom)),
                      star_lift(prefix))
        layers.append(layer)
        cur = compose_paths(compose_paths(prefix, bottom), suffix)
    return from_layers(layers, source=source)


@dataclass
class CheckReport:
    name: str
    verdict: str  # "Verified" or "Failed"
    failed_step: Optional[int] = None
    reason: Optional[str] = None
    stats: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.verdict == "Verified"

    def as_dict(self):
        out = {"name": self.name, "verdict": self.verdict}
        if self.failed_step is not None:
            out["failed_step"] = self.failed_step
        if self.reason is not None:
            out["reason"] = self.reason
        if self.stats:
            out["stats"] = self.stats
        return out


def confluence_probe(sig: Signature, size: tuple[int, int] = (5, 4),
                     samples: int = 100, seed: int = 0) -> CheckReport:
    """Exhaustively rewrite random coherence diagrams and check unique
    normal forms matching ``normalize_fib``."""
    max_layers, max_path_len = size
    rng = random.Random(seed)
    violations = []
    checked = 0
    for idx in range(samples):
        d = random_chi_diagram(sig, rng, max_layers, max_path_len)
        terminals = normal_forms(d)
        expected = exchange_canonical(normalize_fib(d))
        if len(terminals) != 1 or next(iter(terminals)) != expected:
            violations.append(idx)
        checked += 1
    report = CheckReport(
        name="confluence-probe",
        verdict="Verified" if not violations else "Failed",
        stats={"samples": checked, "violations": len(violations)},
    )
    if violations:
        report.failed_step = violations[0]
        report.reason = f"non-unique or unexpected normal form at sample {violations[0]}"
    return report


# ---------------------------------------------------------------------------
# proof steps and the script checker


@dataclass(frozen=True)
class Region:
    """A contiguous sub-block location inside a canonical layer sequence.

    Layers ``lo..hi`` (half-open) with the block's strand interval starting
    at ``strand`` and spanning ``width`` tokens at its top boundary.
    """

    lo: int
    hi: int
    strand: int
    width: int


@dataclass(frozen=True)
class Rule:
    name: str
    binding: tuple  # sorted (key, value) pairs
    direction: str  # "fwd" or "bwd"


@dataclass(frozen=True)
class MacroUnfold:
    name: str
    binding: tuple


@dataclass(frozen=True)
class MacroFold:
    name: str
    binding: tuple


@dataclass(frozen=True)
class FibCoherence:
    result_region: Region


@dataclass(frozen=True)
class Axiom:
    name: str
    direction: str


@dataclass(frozen=True)
class PriorEquality:
    script: str
    direction: str


@dataclass(frozen=True)
class Canonical:
    pass


Justification = Rule | MacroUnfold | MacroFold | FibCoherence | Axiom | PriorEquality | Canonical


@dataclass(frozen=True)
class ProofStep:
    justification: Justification
    region: Optional[Region]  # None only for Canonical
    result: Diagram


@dataclass
class ProofScript:
    name: str
    signature: Signature
    claim_lhs: Diagram
    claim_rhs: Diagram
    steps: list[ProofStep]
    deps: tuple[str, ...] = ()


def binding_dict(pairs: tuple) -> dict:
    return dict(pairs)


def binding_key(binding: dict) -> tuple:
    return tuple(sorted(binding.items(), key=lambda kv: kv[0]))


def _chain_boundary(layers, source):
    at = source
    for l in layers:
        at = l.boundary()[1]
    return at


def extract_block(d: Diagram, region: Region) -> tuple[Diagram, list[OneCellPath]]:
    """Cut the sub-diagram at ``region`` out of a layer sequence.

    Returns the block (with stripped whiskers) and, for each of its layers,
    the outer left whisker needed to splice a replacement back in. Raises
    PatternNotFound when any generator in the range sticks out of the
    block's strand interval.
    """
    if not (0 <= region.lo <= region.hi <= len(d.layers)):
        raise PatternNotFound(f"layer range {region.lo}..{region.hi} out of bounds")
    top = _chain_boundary(d.layers[: region.lo], d.source)
    if region.strand < 0 or region.strand + region.width > len(top):
        raise PatternNotFound("strand interval out of bounds")
    cur_lo = region.strand
    cur_hi = region.strand + region.width
    block_layers = []
    outer_lefts = []
    for i in range(region.lo, region.hi):
        layer = d.layers[i]
        s_w, t_w = layer.gen_widths()
        off = layer.offset
        if off < cur_lo or off + s_w > cur_hi:
            raise PatternNotFound(
                f"layer {i} acts outside the block's strand interval"
            )
        pre = layer.boundary()[0]
        outer_lefts.append(slice_cells(pre, 0, cur_lo))
        block_layers.append(Layer(
            slice_cells(pre, cur_lo, off), layer.gen,
            slice_cells(pre, off + s_w, cur_hi),
        ))
        cur_hi += t_w - s_w
    block_src = slice_cells(top, region.strand, region.strand + region.width)
    block = from_layers(block_layers, source=block_src)
    return block, outer_lefts


def splice_block(d: Diagram, region: Region, replacement: Diagram) -> Diagram:
    """Replace the block at ``region`` with an equal-boundary diagram."""
    block, _ = extract_block(d, region)
    if (replacement.source != block.source or replacement.target != block.target):
        raise BoundaryChanged(
            f"replacement boundary {replacement.source!r} => {replacement.target!r} "
            f"does not match the block"
        )
    top = _chain_boundary(d.layers[: region.lo], d.source)
    outer_l = slice_cells(top, 0, region.strand)
    outer_r = slice_cells(top, region.strand + region.width)
    new_mid = [Layer(concat_cells(outer_l, l.left), l.gen,
                     concat_cells(l.right, outer_r))
               for l in replacement.layers]
    layers = d.layers[: region.lo] + tuple(new_mid) + d.layers[region.hi :]
    return Diagram(d.source, d.target, layers)


@dataclass
class CheckerSession:
    """Append-only checking context: axiom table and verified equalities."""

    signature: Signature
    axioms: dict = field(default_factory=dict)  # name -> (lhs, rhs)
    verified: dict = field(default_factory=dict)  # script name -> (lhs, rhs)
    disabled_axioms: set = field(default_factory=set)

    def pattern_pair(self, just: Justification) -> tuple[Diagram, Diagram]:
        """The (pattern, replacement) pair named by a justification."""
        if isinstance(just, Rule):
            lhs, rhs = instantiate_rule(self.signature, just.name,
                                        binding_dict(just.binding))
        elif isinstance(just, MacroUnfold):
            lhs = fold_macro(self.signature, just.name, binding_dict(just.binding))
            rhs = expand_macro(self.signature, just.name, binding_dict(just.binding))
        elif isinstance(just, MacroFold):
            rhs = fold_macro(self.signature, just.name, binding_dict(just.binding))
            lhs = expand_macro(self.signature, just.name, binding_dict(just.binding))
        elif isinstance(just, Axiom):
            if just.name not in AXIOM_NAMES:
                raise InvalidBinding(f"unknown axiom {just.name}")
            if just.name in self.disabled_axioms:
                raise UnprovenDependency(f"axiom {just.name} is disabled in this session")
            if just.name not in self.axioms:
                raise UnprovenDependency(f"axiom {just.name} not available for this signature")
            lhs, rhs = self.axioms[just.name]
        elif isinstance(just, PriorEquality):
            if just.script not in self.verified:
                raise UnprovenDependency(
                    f"equality {just.script} has not been verified in this session"
                )
            lhs, rhs = self.verified[just.script]
        else:
            raise InvalidBinding(f"no pattern pair for {just!r}")
        if getattr(just, "direction", "fwd") == "bwd":
            lhs, rhs = rhs, lhs
        return lhs, rhs


def _blocks_at(d: Diagram, region: Region):
    """(representative, block) pairs where the region extracts cleanly.

    Positions refer to a contiguous sub-block in some presentation of the
    diagram's isotopy class; matching quantifies over representatives.
    """
    for rep in _isotopy_class(exchange_canonical(d)):
        try:
            block, _ = extract_block(rep, region)
        except PatternNotFound:
            continue
        yield rep, block


def apply_step(session: CheckerSession, d: Diagram, step: ProofStep) -> Diagram:
    """Validate one proof step against ``d`` and return its result."""
    c = exchange_canonical(d)
    if step.result.source != d.source or step.result.target != d.target:
        raise BoundaryChanged("step result changed the claim boundary")
    just = step.justification
    if isinstance(just, Canonical):
        if not isotopic(c, step.result):
            raise ResultMismatch("canonical step result is not isotopic to the diagram")
        return step.result
    if step.region is None:
        raise PatternNotFound("step needs a position")
    if isinstance(just, FibCoherence):
        extracted = pure = False
        new_blocks = []
        for _, nb in _blocks_at(step.result, just.result_region):
            if all(isinstance(l.gen, Coherence) for l in nb.layers):
                new_blocks.append(nb)
        for rep, block in _blocks_at(c, step.region):
            extracted = True
            if not all(isinstance(l.gen, Coherence) for l in block.layers):
                continue
            pure = True
            for nb in new_blocks:
                if nb.source != block.source or nb.target != block.target:
                    continue
                if isotopic(splice_block(rep, step.region, nb), step.result):
                    return step.result
        if not extracted:
            raise PatternNotFound(f"no block at {step.region}")
        if not pure:
            raise RegionNotPureChi(f"region {step.region} is not coherence-only")
        raise ResultMismatch("coherence replacement does not yield the stated result")
    pattern, replacement = session.pattern_pair(just)
    pattern = exchange_canonical(pattern)
    matched = False
    for rep, block in _blocks_at(c, step.region):
        if not isotopic(block, pattern):
            continue
        matched = True
        if isotopic(splice_block(rep, step.region, replacement), step.result):
            return step.result
    if matched:
        raise ResultMismatch("stated result differs from the rewritten diagram")
    raise PatternNotFound(
        f"pattern for {just!r} does not occur at {step.region}"
    )


def _require_pure_chi_region(block: Diagram) -> None:
    for layer in block.layers:
        if not isinstance(layer.gen, Coherence):
            raise RegionNotPureChi(f"region contains {layer.gen!r}")


def check_script(session: CheckerSession, script: ProofScript) -> CheckReport:
    """Validate a proof script; on success record it in the session."""
    stats = {"steps": len(script.steps), "rules": {}}
    try:
        validate_diagram(session.signature, script.claim_lhs)
        validate_diagram(session.signature, script.claim_rhs)
        if (script.claim_lhs.source != script.claim_rhs.source
                or script.claim_lhs.target != script.claim_rhs.target):
            raise BoundaryChanged("claim sides are not parallel")
    except Exception as exc:
        return CheckReport(script.name, "Failed", failed_step=-1,
                           reason=f"claim validation: {exc}", stats=stats)
    cur = script.claim_lhs
    for i, step in enumerate(script.steps):
        try:
            validate_diagram(session.signature, step.result)
            cur = apply_step(session, cur, step)
        except Exception as exc:
            return CheckReport(script.name, "Failed", failed_step=i,
                               reason=str(exc), stats=stats)
        label = type(step.justification).__name__
        stats["rules"][label] = stats["rules"].get(label, 0) + 1
    if not isotopic(cur, script.claim_rhs):
        return CheckReport(script.name, "Failed", failed_step=len(script.steps),
                           reason="final diagram is not the claimed right-hand side",
                           stats=stats)
    session.verified[script.name] = (script.claim_lhs, script.claim_rhs)
    return CheckReport(script.name, "Verified", stats=stats)


# ---------------------------------------------------------------------------
# derivation builder (used to author the bundled scripts)


class DerivationBuilder:
    """Constructs a proof script by searching step positions automatically.

    Each tactic finds the first position (scanning layer ranges
    top-to-bottom, strands left-to-right) where the requested pattern
    occurs in the current canonical diagram, applies it, and records the
    fully positioned step for later re-checking.
    """

    def __init__(self, session: CheckerSession, name: str,
                 claim_lhs: Diagram, claim_rhs: Diagram, deps: tuple[str, ...] = ()):
        self.session = session
        self.name = name
        self.claim_lhs = claim_lhs
        self.claim_rhs = claim_rhs
        self.deps = deps
        self.steps: list[ProofStep] = []
        self.current = claim_lhs

    def _find_and_apply(self, just: Justification, skip: int = 0):
        pattern, replacement = self.session.pattern_pair(just)
        pattern = exchange_canonical(pattern)
        c = exchange_canonical(self.current)
        n = len(pattern.layers)
        width = len(pattern.source)
        seen_results = []
        for rep in _isotopy_class(c):
            for lo in range(len(rep.layers) - n + 1):
                top = _chain_boundary(rep.layers[:lo], rep.source)
                for strand in range(len(top) - width + 1):
                    region = Region(lo, lo + n, strand, width)
                    try:
                        block, _ = extract_block(rep, region)
                    except PatternNotFound:
                        continue
                    if not isotopic(block, pattern):
                        continue
                    result = exchange_canonical(splice_block(rep, region, replacement))
                    if result in seen_results:
                        continue
                    seen_results.append(result)
                    if len(seen_results) <= skip:
                        continue
                    step = ProofStep(just, region, result)
                    self.current = apply_step(self.session, self.current, step)
                    self.steps.append(step)
                    return self
        raise PatternNotFound(
            f"{self.name}: no occurrence of the pattern for {just!r} "
            f"(skip={skip}) in\n{c!r}"
        )

    def rule(self, name: str, direction: str = "fwd", skip: int = 0, **binding):
        return self._find_and_apply(Rule(name, binding_key(binding), direction), skip)

    def axiom(self, name: str, direction: str = "fwd", skip: int = 0):
        return self._find_and_apply(Axiom(name, direction), skip)

    def prior(self, script: str, direction: str = "fwd", skip: int = 0):
        return self._find_and_apply(PriorEquality(script, direction), skip)

    def unfold(self, name: str, skip: int = 0, **binding):
        return self._find_and_apply(MacroUnfold(name, binding_key(binding)), skip)

    def fold(self, name: str, skip: int = 0, **binding):
        return self._find_and_apply(MacroFold(name, binding_key(binding)), skip)

    def canonical(self):
        result = exchange_canonical(self.current)
        step = ProofStep(Canonical(), None, result)
        self.current = apply_step(self.session, self.current, step)
        self.steps.append(step)
        return self

    def coherence(self, region: Region, replacement: Diagram):
        """Replace the pure-coherence block at ``region`` by ``replacement``."""
        c = exchange_canonical(self.current)
        spliced = None
        for rep, block in _blocks_at(c, region):
            if not all(isinstance(l.gen, Coherence) for l in block.layers):
                continue
            if (block.source != replacement.source
                    or block.target != replacement.target):
                continue
            spliced = splice_block(rep, region, replacement)
            break
        if spliced is None:
            raise PatternNotFound(
                f"{self.name}: no coherence block of that shape at {region}"
            )
        result = exchange_canonical(spliced)
        repl_c = exchange_canonical(replacement)
        n = len(replacement.layers)
        width = len(replacement.source)
        for rep in _isotopy_class(result):
            for lo in range(len(rep.layers) - n + 1):
                top = _chain_boundary(rep.layers[:lo], rep.source)
                for strand in range(len(top) - width + 1):
                    cand = Region(lo, lo + n, strand, width)
                    try:
                        blk, _ = extract_block(rep, cand)
                    except PatternNotFound:
                        continue
                    if not isotopic(blk, repl_c):
                        continue
                    step = ProofStep(FibCoherence(cand), region, result)
                    self.current = apply_step(self.session, self.current, step)
                    self.steps.append(step)
                    return self
        raise PatternNotFound(f"{self.name}: replacement block lost in the result")

    def coherence_swap(self, replacement: Diagram, skip: int = 0):
        """Swap some pure-coherence block for a parallel decomposition.

        Scans representatives for a contiguous coherence-only block whose
        boundary matches the replacement and whose substitution changes the
        diagram; ``skip`` passes over earlier distinct outcomes.
        """
        c = exchange_canonical(self.current)
        width = len(replacement.source)
        seen = []
        for rep in _isotopy_class(c):
            n_l = len(rep.layers)
            for lo in range(n_l):
                if not isinstance(rep.layers[lo].gen, Coherence):
                    continue
                top_w = len(_chain_boundary(rep.layers[:lo], rep.source))
                for hi in range(lo + 1, n_l + 1):
                    if not isinstance(rep.layers[hi - 1].gen, Coherence):
                        break
                    for strand in range(top_w - width + 1):
                        region = Region(lo, hi, strand, width)
                        try:
                            block, _ = extract_block(rep, region)
                        except PatternNotFound:
                            continue
                        if (block.source != replacement.source
                                or block.target != replacement.target):
                            continue
                        result = exchange_canonical(
                            splice_block(rep, region, replacement))
                        if result == c or result in seen:
                            continue
                        seen.append(result)
                        if len(seen) <= skip:
                            continue
                        return self.coherence(region, replacement)
        raise PatternNotFound(
            f"{self.name}: no replaceable coherence block matches the "
            f"replacement boundary (skip={skip})"
        )

    def simplify_coherence(self):
        """Collapse pure-coherence blocks to their normal forms, repeatedly.

        Finds the largest contiguous coherence-only block (in any isotopy
        representative) whose normal form has strictly fewer layers and
        records the replacement as a coherence step; stops at a fixpoint.
        """
        while True:
            best = None
            for rep in _isotopy_class(exchange_canonical(self.current)):
                n_l = len(rep.layers)
                for lo in range(n_l):
                    if not isinstance(rep.layers[lo].gen, Coherence):
                        continue
                    top_w = len(_chain_boundary(rep.layers[:lo], rep.source))
                    for hi in range(lo + 1, n_l + 1):
                        if not all(isinstance(rep.layers[i].gen, Coherence)
                                   for i in range(lo, hi)):
                            break
                        for strand in range(top_w + 1):
                            for width in range(top_w - strand + 1):
                                region = Region(lo, hi, strand, width)
                                try:
                                    block, _ = extract_block(rep, region)
                                    nf = normalize_fib(block)
                                except (PatternNotFound, NotFibFragment):
                                    continue
                                gain = (hi - lo) - len(nf.layers)
                                if gain <= 0:
                                    continue
                                if best is None or gain > best[0]:
                                    best = (gain, region, nf)
                if best is not None:
                    break
            if best is None:
                return self
            _, region, nf = best
            self.coherence(region, nf)

    def coherence_collapse(self, region: Region):
        """Replace the pure-coherence block at ``region`` by its normal form."""
        for _, block in _blocks_at(self.current, region):
            if all(isinstance(l.gen, Coherence) for l in block.layers):
                return self.coherence(region, normalize_fib(block))
        raise PatternNotFound(
            f"{self.name}: no coherence-only block at {region}"
        )

    def finish(self) -> ProofScript:
        if not isotopic(self.current, self.claim_rhs):
            raise ResultMismatch(
                f"{self.name}: derivation ends at\n{exchange_canonical(self.current)!r}\n"
                f"but the claim is\n{exchange_canonical(self.claim_rhs)!r}"
            )
        return ProofScript(self.name, self.session.signature, self.claim_lhs,
                           self.claim_rhs, self.steps, self.deps)
