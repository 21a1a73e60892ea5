"""Layered string-diagram terms over a bifibrational signature.

A two-cell is a ``Diagram``: an ordered list of layers read top to bottom,
each layer a single generator flanked by identity whiskers. Planar isotopy
is captured exactly by the exchange relation (sliding generators past each
other on disjoint strands); ``exchange_canonical`` computes the unique
greedy-leftmost representative of each isotopy class.

Token order convention: in a one-cell string the leftmost token is the first
applied. ``star_lift`` therefore reverses a base path, ``shriek_lift``
preserves it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .base import (
    ArrowGen,
    BasePresentation,
    ObjectId,
    Path,
    PolygonType,
    PullbackSquare,
    empty_path,
    validate_polygon_type,
)
from .errors import (
    BoundaryMismatch,
    InvalidGenerator,
    NonComposable,
)


# ---------------------------------------------------------------------------
# fiber symbols and one-cell tokens


@dataclass(frozen=True, order=True)
class FiberSym:
    """A zero-cell: the fiber over a base object, or the terminal symbol."""

    obj: Optional[ObjectId]  # None encodes the terminal symbol 1

    @property
    def is_terminal(self):
        return self.obj is None

    def __repr__(self):
        return "1" if self.obj is None else f"E_{self.obj}"


TERMINAL = FiberSym(None)


def fiber(obj: ObjectId) -> FiberSym:
    return FiberSym(obj)


@dataclass(frozen=True)
class Star:
    """Pullback one-cell f^* for a base arrow f: A -> B; runs E_B -> E_A."""

    arrow: ArrowGen

    @property
    def dom(self):
        return fiber(self.arrow.dst)

    @property
    def cod(self):
        return fiber(self.arrow.src)

    def __repr__(self):
        return f"{self.arrow.name}*"


@dataclass(frozen=True)
class Shriek:
    """Direct-image one-cell f_! for a base arrow f: A -> B; runs E_A -> E_B."""

    arrow: ArrowGen

    @property
    def dom(self):
        return fiber(self.arrow.src)

    @property
    def cod(self):
        return fiber(self.arrow.dst)

    def __repr__(self):
        return f"{self.arrow.name}!"


@dataclass(frozen=True)
class ObjTok:
    """An object of a fiber, seen as a one-cell out of the terminal symbol."""

    name: str
    fiber_obj: ObjectId

    @property
    def dom(self):
        return TERMINAL

    @property
    def cod(self):
        return fiber(self.fiber_obj)

    def __repr__(self):
        return f"{self.name}@{self.fiber_obj}"


OneCellToken = Star | Shriek | ObjTok


@dataclass(frozen=True)
class OneCellPath:
    """A composable left-to-right string of one-cell tokens.

    An object token may only appear leftmost (the terminal region is always
    the leftmost region in a diagram).
    """

    dom: FiberSym
    tokens: tuple[OneCellToken, ...]

    def __post_init__(self):
        at = self.dom
        for i, t in enumerate(self.tokens):
            if isinstance(t, ObjTok) and i > 0:
                raise NonComposable("object token only allowed leftmost")
            if t.dom != at:
                raise NonComposable(f"token {t!r} expects {t.dom!r}, found {at!r}")
            at = t.cod
        object.__setattr__(self, "_cod", at)

    @property
    def cod(self) -> FiberSym:
        return self._cod

    def __len__(self):
        return len(self.tokens)

    def __repr__(self):
        if not self.tokens:
            return f"<{self.dom!r}>"
        return ".".join(repr(t) for t in self.tokens)


def _trusted_cells(dom: FiberSym, tokens: tuple, cod: FiberSym) -> OneCellPath:
    """Construct a path known valid, skipping the composability walk."""
    p = object.__new__(OneCellPath)
    object.__setattr__(p, "dom", dom)
    object.__setattr__(p, "tokens", tokens)
    object.__setattr__(p, "_cod", cod)
    return p


def cells(dom: FiberSym, *tokens: OneCellToken) -> OneCellPath:
    return OneCellPath(dom, tokens)


def identity_cells(at: FiberSym) -> OneCellPath:
    return _trusted_cells(at, (), at)


def concat_cells(p: OneCellPath, q: OneCellPath) -> OneCellPath:
    if p.cod != q.dom:
        raise NonComposable(f"cannot concatenate {p!r} with {q!r}")
    if not p.tokens:
        return q
    if not q.tokens:
        return p
    if isinstance(q.tokens[0], ObjTok):
        raise NonComposable("object token only allowed leftmost")
    return _trusted_cells(p.dom, p.tokens + q.tokens, q.cod)


def slice_cells(p: OneCellPath, start: int, stop: Optional[int] = None) -> OneCellPath:
    """The sub-string of tokens [start:stop], with the induced domain."""
    stop = len(p) if stop is None else stop
    tokens = p.tokens[start:stop]
    if start >= len(p.tokens):
        return _trusted_cells(p.cod, (), p.cod)
    dom = p.dom if start == 0 else p.tokens[start - 1].cod
    cod = p.cod if stop >= len(p.tokens) else tokens[-1].cod if tokens else dom
    return _trusted_cells(dom, tokens, cod)


def star_lift(p: Path) -> OneCellPath:
    """Contravariant lift of a base path: <g1,...,gn> -> [gn*, ..., g1*]."""
    return OneCellPath(fiber(p.dst), tuple(Star(a) for a in reversed(p.arrows)))


def shriek_lift(p: Path) -> OneCellPath:
    """Covariant lift of a base path: <g1,...,gn> -> [g1!, ..., gn!]."""
    return OneCellPath(fiber(p.src), tuple(Shriek(a) for a in p.arrows))


def unstar(p: OneCellPath) -> Path:
    """Invert ``star_lift``: recover the base path from a pure-star string."""
    arrows = []
    for t in p.tokens:
        if not isinstance(t, Star):
            raise InvalidGenerator(f"not a pullback-only string: {p!r}")
        arrows.append(t.arrow)
    arrows.reverse()
    src = arrows[0].src if arrows else p.cod.obj
    if src is None:
        raise InvalidGenerator("pullback string cannot start at the terminal symbol")
    return Path(src, tuple(arrows), p.dom.obj)


# ---------------------------------------------------------------------------
# two-cell generators


@dataclass(frozen=True)
class Coherence:
    """Pseudofunctoriality two-cell indexed by a polygon type."""

    pt: PolygonType

    def __repr__(self):
        return f"chi{self.pt!r}"


@dataclass(frozen=True)
class Unit:
    """Adjunction unit for an arrow h: identity => h* h_!."""

    arrow: ArrowGen

    def __repr__(self):
        return f"eta({self.arrow.name})"


@dataclass(frozen=True)
class Counit:
    """Adjunction counit for an arrow h: h_! h* => identity."""

    arrow: ArrowGen

    def __repr__(self):
        return f"eps({self.arrow.name})"


@dataclass(frozen=True)
class SquareInv:
    """Backward comparison cell of a marked pullback square: b* d_! => c_! a*."""

    square: PullbackSquare

    def __repr__(self):
        return f"bcbar({self.square.label})"


@dataclass(frozen=True)
class DescentCell:
    """The single extra generator of a descent extension.

    ``name`` is one of ``alpha`` (algebra structure, system TA), ``phi``
    (gluing isomorphism, system DD) or ``beta`` (internal action, system AC).
    ``aux`` carries the kernel-pair projections needed by phi and beta.
    """

    name: str
    obj: ObjTok
    f: ArrowGen
    aux: tuple[ArrowGen, ...] = ()

    @property
    def system(self):
        return {"alpha": "TA", "phi": "DD", "beta": "AC"}[self.name]

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class MacroCell:
    """A folded occurrence of a named macro, with its declared boundary.

    Folded macros exist only inside proof scripts (the non-primitive
    vertices of a derivation); unfold steps replace them by their expansion.
    """

    name: str
    args: tuple
    src: OneCellPath
    tgt: OneCellPath

    def __repr__(self):
        shown = ",".join(_macro_arg_repr(a) for a in self.args)
        return f"{self.name}({shown})" if shown else self.name


def _macro_arg_repr(a):
    if isinstance(a, PullbackSquare):
        return a.label
    if isinstance(a, ArrowGen):
        return a.name
    return repr(a)


GenTwoCell = Coherence | Unit | Counit | SquareInv | DescentCell | MacroCell


_GEN_BOUNDARY_MEMO: dict = {}


def generator_boundary(g: GenTwoCell) -> tuple[OneCellPath, OneCellPath]:
    """Source and target one-cell strings of a generator."""
    cached = _GEN_BOUNDARY_MEMO.get(g)
    if cached is None:
        cached = _GEN_BOUNDARY_MEMO[g] = _generator_boundary(g)
    return cached


def _generator_boundary(g: GenTwoCell) -> tuple[OneCellPath, OneCellPath]:
    if isinstance(g, Coherence):
        return star_lift(g.pt.top), star_lift(g.pt.bottom)
    if isinstance(g, Unit):
        h = g.arrow
        return identity_cells(fiber(h.src)), cells(fiber(h.src), Shriek(h), Star(h))
    if isinstance(g, Counit):
        h = g.arrow
        return cells(fiber(h.dst), Star(h), Shriek(h)), identity_cells(fiber(h.dst))
    if isinstance(g, SquareInv):
        s = g.square
        return (
            cells(fiber(s.d.src), Shriek(s.d), Star(s.b)),
            cells(fiber(s.a.dst), Star(s.a), Shriek(s.c)),
        )
    if isinstance(g, DescentCell):
        x = g.obj
        if g.name == "alpha":
            return cells(TERMINAL, x, Shriek(g.f), Star(g.f)), cells(TERMINAL, x)
        if g.name == "phi":
            f1, f2 = g.aux
            return cells(TERMINAL, x, Star(f1)), cells(TERMINAL, x, Star(f2))
        if g.name == "beta":
            f1, f2 = g.aux
            return cells(TERMINAL, x, Star(f1), Shriek(f2)), cells(TERMINAL, x)
        raise InvalidGenerator(f"unknown descent cell {g.name}")
    if isinstance(g, MacroCell):
        return g.src, g.tgt
    raise InvalidGenerator(f"unknown generator {g!r}")


def gen_sort_key(g: GenTwoCell) -> str:
    """A deterministic total order on generators, used only to break ties."""
    return repr(g)


# ---------------------------------------------------------------------------
# signatures


EXTENSION_GENERATOR = {"TA": "alpha", "DD": "phi", "AC": "beta"}


@dataclass
class Signature:
    """A base presentation plus an optional one-generator descent extension.

    ``extension`` is None (the plain bifibrational signature) or one of
    "TA", "DD", "AC"; the extension is parameterized by the distinguished
    arrow ``f`` and object generator ``obj``, with ``pair`` holding the
    kernel-pair projections (f1, f2) required by the DD and AC generators.
    """

    base: BasePresentation
    extension: Optional[str] = None
    f: Optional[ArrowGen] = None
    obj: Optional[ObjTok] = None
    pair: Optional[tuple[ArrowGen, ArrowGen]] = None

    def __post_init__(self):
        if self.extension is not None:
            if self.extension not in EXTENSION_GENERATOR:
                raise InvalidGenerator(f"unknown extension {self.extension!r}")
            if self.f is None or self.obj is None:
                raise InvalidGenerator("an extension needs its arrow and object")
            if self.extension in ("DD", "AC") and self.pair is None:
                raise InvalidGenerator(f"extension {self.extension} needs kernel-pair projections")

    def descent_generator(self) -> DescentCell:
        name = EXTENSION_GENERATOR[self.extension]
        aux = () if name == "alpha" else self.pair
        return DescentCell(name, self.obj, self.f, aux)


def validate_generator(sig: Signature, g: GenTwoCell) -> None:
    """Raise unless the generator is licensed by the signature."""
    if isinstance(g, Coherence):
        validate_polygon_type(sig.base, g.pt)
    elif isinstance(g, (Unit, Counit)):
        if g.arrow not in sig.base.arrows:
            raise InvalidGenerator(f"arrow {g.arrow!r} not in the base")
    elif isinstance(g, SquareInv):
        if g.square not in sig.base.squares:
            raise InvalidGenerator(
                f"square {g.square.label} is not marked in the base presentation"
            )
    elif isinstance(g, DescentCell):
        if sig.extension is None or EXTENSION_GENERATOR[sig.extension] != g.name:
            raise InvalidGenerator(
                f"generator {g.name} requires the {g.system} extension"
            )
        if g != sig.descent_generator():
            raise InvalidGenerator(f"generator {g!r} does not match the extension parameters")
    elif isinstance(g, MacroCell):
        pass  # folded macros are validated when unfolded
    else:
        raise InvalidGenerator(f"unknown generator {g!r}")


def validate_diagram(sig: Signature, d: "Diagram") -> None:
    for layer in d.layers:
        validate_generator(sig, layer.gen)


# ---------------------------------------------------------------------------
# layers and diagrams


@dataclass(frozen=True)
class Layer:
    """One generator with identity whiskers on either side."""

    left: OneCellPath
    gen: GenTwoCell
    right: OneCellPath

    def __post_init__(self):
        # compute and cache the whiskered boundary; malformed layers fail early
        gs, gt = generator_boundary(self.gen)
        top = concat_cells(concat_cells(self.left, gs), self.right)
        bottom = concat_cells(concat_cells(self.left, gt), self.right)
        object.__setattr__(self, "_boundary", (top, bottom))

    def boundary(self) -> tuple[OneCellPath, OneCellPath]:
        return self._boundary

    @property
    def offset(self) -> int:
        return len(self.left)

    def gen_widths(self) -> tuple[int, int]:
        gs, gt = generator_boundary(self.gen)
        return len(gs), len(gt)

    def __repr__(self):
        return f"[{self.left!r} | {self.gen!r} | {self.right!r}]"


@dataclass(frozen=True)
class Diagram:
    """A two-cell term: boundary strings plus layers read top to bottom."""

    source: OneCellPath
    target: OneCellPath
    layers: tuple[Layer, ...]

    def __post_init__(self):
        at = self.source
        for i, layer in enumerate(self.layers):
            top, bottom = layer.boundary()
            if top != at:
                raise BoundaryMismatch(
                    f"layer {i} expects source {top!r}, chain gives {at!r}"
                )
            at = bottom
        if at != self.target:
            raise BoundaryMismatch(f"layer chain ends at {at!r}, target is {self.target!r}")
        if self.source.dom != self.target.dom or self.source.cod != self.target.cod:
            raise BoundaryMismatch("diagram boundary strings are not parallel")

    def generators(self):
        return tuple(layer.gen for layer in self.layers)

    def is_identity(self):
        return not self.layers

    def __repr__(self):
        body = "; ".join(repr(l) for l in self.layers) or "id"
        return f"<{self.source!r} => {self.target!r} : {body}>"


def identity_diagram(p: OneCellPath) -> Diagram:
    return Diagram(p, p, ())


def from_layers(layers, source: Optional[OneCellPath] = None) -> Diagram:
    """Assemble a diagram from a layer chain, inferring the boundary."""
    layers = tuple(layers)
    if not layers:
        if source is None:
            raise BoundaryMismatch("an empty layer list needs an explicit boundary")
        return identity_diagram(source)
    src = layers[0].boundary()[0] if source is None else source
    tgt = layers[-1].boundary()[1]
    return Diagram(src, tgt, layers)


def single(gen: GenTwoCell, left: Optional[OneCellPath] = None,
           right: Optional[OneCellPath] = None) -> Diagram:
    """The diagram consisting of one whiskered generator."""
    gs, gt = generator_boundary(gen)
    left = identity_cells(gs.dom) if left is None else left
    right = identity_cells(gs.cod) if right is None else right
    return from_layers([Layer(left, gen, right)])


def vcompose(d1: Diagram, d2: Diagram) -> Diagram:
    """Top-to-bottom pasting."""
    if d1.target != d2.source:
        raise BoundaryMismatch(f"vcompose: {d1.target!r} != {d2.source!r}")
    return Diagram(d1.source, d2.target, d1.layers + d2.layers)


def whisker(side: str, p: OneCellPath, d: Diagram) -> Diagram:
    """Extend every layer (and the boundary) by an identity string ``p``."""
    if side == "left":
        layers = [Layer(concat_cells(p, l.left), l.gen, l.right) for l in d.layers]
        return Diagram(concat_cells(p, d.source), concat_cells(p, d.target), tuple(layers))
    if side == "right":
        layers = [Layer(l.left, l.gen, concat_cells(l.right, p)) for l in d.layers]
        return Diagram(concat_cells(d.source, p), concat_cells(d.target, p), tuple(layers))
    raise BoundaryMismatch(f"unknown whisker side {side!r}")


def hcompose(d1: Diagram, d2: Diagram) -> Diagram:
    """Left-to-right pasting, realized via the interchange identity."""
    if d1.source.cod != d2.source.dom:
        raise BoundaryMismatch(f"hcompose: {d1.source.cod!r} != {d2.source.dom!r}")
    upper = whisker("right", d2.source, d1)
    lower = whisker("left", d1.target, d2)
    return exchange_canonical(vcompose(upper, lower))


# ---------------------------------------------------------------------------
# the exchange relation and its canonical form


def _swap_adjacent(l1: Layer, l2: Layer) -> Optional[tuple[Layer, Layer]]:
    """Swap two adjacent layers if their strand intervals are disjoint.

    ``l1`` sits above ``l2``; the returned pair is (new upper, new lower)
    after sliding ``l2`` above ``l1``. ``None`` if the generators interact.
    """
    a, (s1, t1) = l1.offset, l1.gen_widths()
    c, (s2, t2) = l2.offset, l2.gen_widths()
    pre = l1.boundary()[0]
    if c + s2 <= a:
        new_upper_off, new_lower_off = c, a - s2 + t2
    elif c >= a + t1:
        new_upper_off, new_lower_off = c - t1 + s1, a
    else:
        return None
    up = Layer(
        slice_cells(pre, 0, new_upper_off),
        l2.gen,
        slice_cells(pre, new_upper_off + s2),
    )
    mid = up.boundary()[1]
    low = Layer(
        slice_cells(mid, 0, new_lower_off),
        l1.gen,
        slice_cells(mid, new_lower_off + s1),
    )
    return up, low


def _bubble_to_top(layers: list[Layer], j: int) -> Optional[list[Layer]]:
    """Move layer ``j`` to position 0 by adjacent swaps, or ``None``."""
    work = list(layers)
    for i in range(j, 0, -1):
        swapped = _swap_adjacent(work[i - 1], work[i])
        if swapped is None:
            return None
        work[i - 1], work[i] = swapped
    return work


def _layer_key(layer: Layer):
    return (layer.offset, gen_sort_key(layer.gen))


# Layers carry whisker paths, which makes swapping and hashing them costly.
# The exchange search therefore runs on compact words of (generator id,
# offset) pairs; a word plus the top boundary determines the layer sequence.
# Generators are interned to small integers so that word hashing is cheap.

_GEN_IDS: dict = {}
_GEN_LIST: list = []
_GEN_W: list = []


def _gen_id(gen) -> int:
    gid = _GEN_IDS.get(gen)
    if gid is None:
        gid = len(_GEN_LIST)
        _GEN_IDS[gen] = gid
        _GEN_LIST.append(gen)
        gs, gt = generator_boundary(gen)
        _GEN_W.append((len(gs), len(gt)))
    return gid


def _swap_compact(i1, i2):
    g1, a = i1
    g2, c = i2
    s1, t1 = _GEN_W[g1]
    s2, t2 = _GEN_W[g2]
    if c + s2 <= a:
        return (g2, c), (g1, a - s2 + t2)
    if c >= a + t1:
        return (g2, c - t1 + s1), (g1, a)
    return None


def compact_word(layers: tuple[Layer, ...]) -> tuple:
    return tuple((_gen_id(l.gen), l.offset) for l in layers)


def class_words(word: tuple) -> list:
    """All exchange-reachable words, in breadth-first discovery order."""
    seen = {word}
    order = [word]
    frontier = deque([word])
    while frontier:
        cur = frontier.popleft()
        for i in range(len(cur) - 1):
            sw = _swap_compact(cur[i], cur[i + 1])
            if sw is None:
                continue
            nxt = cur[:i] + sw + cur[i + 2 :]
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                frontier.append(nxt)
    return order


def expand_word(source: OneCellPath, word: tuple) -> tuple[Layer, ...]:
    layers = []
    top = source
    for gid, off in word:
        s, _ = _GEN_W[gid]
        layer = Layer(slice_cells(top, 0, off), _GEN_LIST[gid],
                      slice_cells(top, off + s))
        layers.append(layer)
        top = layer.boundary()[1]
    return tuple(layers)


def _key_seq(layers):
    return tuple(_layer_key(l) for l in layers)


def _canonical_layers(layers: tuple[Layer, ...], memo: dict) -> tuple[Layer, ...]:
    """Lexicographically minimal exchange-equivalent layer sequence.

    The minimum is taken over every presentation reachable by adjacent
    swaps. Level-by-level greedy emission is not sound here: a zero-width
    generator sitting at the edge of a deletion interval can slide through
    the deletion, which changes which other layers it overlaps, so the set
    of layers movable to the top depends on the chosen presentation. The
    exchange moves are symmetric, so breadth-first closure enumerates the
    whole class and its key-sequence minimum is presentation-independent.
    Every visited presentation is memoized to the shared result.
    """
    if not layers:
        return ()
    source = layers[0].boundary()[0]
    word = compact_word(layers)
    cached = memo.get((source, word))
    if cached is not None:
        return cached
    words = class_words(word)
    genkeys = {}
    for g, _ in word:
        if g not in genkeys:
            genkeys[g] = gen_sort_key(_GEN_LIST[g])
    best = min(words, key=lambda w: tuple((o, genkeys[g]) for g, o in w))
    result = expand_word(source, best)
    for w in words:
        memo[(source, w)] = result
    return result


_CANON_MEMO: dict = {}


def exchange_canonical(d: Diagram) -> Diagram:
    """The unique greedy-leftmost representative of a diagram's isotopy class."""
    if len(_CANON_MEMO) > 400000:
        _CANON_MEMO.clear()
    return Diagram(d.source, d.target, _canonical_layers(d.layers, _CANON_MEMO))


def isotopic(d1: Diagram, d2: Diagram) -> bool:
    """Boundary equality plus structural equality of canonical forms."""
    if d1.source != d2.source or d1.target != d2.target:
        return False
    return exchange_canonical(d1) == exchange_canonical(d2)
