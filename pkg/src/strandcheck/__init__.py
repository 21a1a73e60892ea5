"""String-diagram term calculus and proof checker for bifibrational signatures."""

from .base import (
    BasePresentation,
    PolygonType,
    PullbackSquare,
    empty_path,
    path_of,
    paths_equal,
)
from .calculus import (
    Coherence,
    Counit,
    DescentCell,
    Diagram,
    Layer,
    Shriek,
    Signature,
    SquareInv,
    Star,
    TERMINAL,
    Unit,
    cells,
    exchange_canonical,
    fiber,
    from_layers,
    hcompose,
    identity_diagram,
    shriek_lift,
    single,
    star_lift,
    vcompose,
    whisker,
)
from .descent import (
    axiom_equations,
    builtin_descent_base,
    bundled_scripts,
    signature_for,
    verify_theorem,
)
from .finmodel import (
    Family,
    FinInstance,
    interpret_diagram,
    make_instance,
    oracle_equal,
    validate_instance,
)
from .parser import ScriptFile, format_script_file, parse_script_file, \
    script_file_for
from .render import render, render_svg, render_tikz
from .rewrite import (
    CheckerSession,
    CheckReport,
    ProofScript,
    ProofStep,
    check_script,
    confluence_probe,
    decide_fib_equal,
    normalize_fib,
)

__version__ = "0.1.0"

__all__ = [
    "BasePresentation",
    "PolygonType",
    "PullbackSquare",
    "empty_path",
    "path_of",
    "paths_equal",
    "Coherence",
    "Counit",
    "DescentCell",
    "Diagram",
    "Layer",
    "Shriek",
    "Signature",
    "SquareInv",
    "Star",
    "TERMINAL",
    "Unit",
    "cells",
    "exchange_canonical",
    "fiber",
    "from_layers",
    "hcompose",
    "identity_diagram",
    "shriek_lift",
    "single",
    "star_lift",
    "vcompose",
    "whisker",
    "axiom_equations",
    "builtin_descent_base",
    "bundled_scripts",
    "signature_for",
    "verify_theorem",
    "Family",
    "FinInstance",
    "interpret_diagram",
    "make_instance",
    "oracle_equal",
    "validate_instance",
    "ScriptFile",
    "format_script_file",
    "parse_script_file",
    "script_file_for",
    "render",
    "render_svg",
    "render_tikz",
    "CheckerSession",
    "CheckReport",
    "ProofScript",
    "ProofStep",
    "check_script",
    "confluence_probe",
    "decide_fib_equal",
    "normalize_fib",
]
