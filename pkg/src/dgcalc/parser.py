"""Model files and the expression language.

A .dgm file is line oriented; statements end at a newline or ';' and '#'
starts a comment.  Statements:

    model NAME                      dim N
    gen NAME : DEGREE               d NAME = EXPR
    fiber NAME : DEGREE             F = EXPR | Fbar = | H = | Theta = | F4 = | F7 =
    let NAME = EXPR
    vec NAME : GEN = EXPR [, GEN = EXPR ...]
    sym NAME : deg = INT [, KEY = EXPR ...]   (KEY in X a b abar f c fbar h
                                               s2 s5 eta1 c4 d3 a3 b6 eta)

Expressions: sums of rational-coefficient products of generator powers;
'*' or juxtaposition multiplies, '^' takes powers, parentheses group.
Every statement failure carries its line and column.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .cohomology import validate_formal_dimension
from .derivations import BundleError, Derivation, DgBundle
from .graded import Element, GradedError, Model
from .symmetries import SymElement, SymmetryError, symmetry

STRUCTURAL_KEYS = ("F", "Fbar", "H", "Theta", "F4", "F7")
SYM_KEYS = ("a", "b", "abar", "f", "c", "fbar", "h", "s2", "s5", "eta1", "c4", "d3", "a3", "b6", "eta")


class ModelFileError(Exception):
    """A diagnostic with a source position and a machine-checkable kind."""

    def __init__(self, kind: str, line: int, col: int, message: str, witness: str = ""):
        self.kind = kind
        self.line = line
        self.col = col
        self.message = message
        self.witness = witness
        where = f"line {line}, col {col}: " if line else ""
        suffix = f" [{witness}]" if witness else ""
        super().__init__(f"{where}{kind}: {message}{suffix}")


# -- expression scanner and parser ----------------------------------------------


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _scan(text: str, line: int, col0: int) -> List[_Token]:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        col = col0 + i
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] == "/" and j + 1 < len(text) and text[j + 1].isdigit():
                j += 1
                while j < len(text) and text[j].isdigit():
                    j += 1
            out.append(_Token("number", text[i:j], line, col))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(_Token("ident", text[i:j], line, col))
            i = j
            continue
        if ch in "+-*^()":
            out.append(_Token(ch, ch, line, col))
            i += 1
            continue
        raise ModelFileError("syntax", line, col, f"unexpected character {ch!r}")
    out.append(_Token("end", "", line, col0 + len(text)))
    return out


class _ExprParser:
    def __init__(self, tokens: List[_Token], model: Model):
        self.tokens = tokens
        self.pos = 0
        self.model = model

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Element:
        value = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ModelFileError("syntax", tok.line, tok.col, f"unexpected {tok.text!r}")
        return value

    def expr(self) -> Element:
        negate = False
        if self.peek().kind == "-":
            self.next()
            negate = True
        value = self.term()
        if negate:
            value = -value
        while self.peek().kind in ("+", "-"):
            op = self.next()
            rhs = self.term()
            value = value + rhs if op.kind == "+" else value - rhs
        return value

    def term(self) -> Element:
        value = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "*":
                self.next()
                value = value * self.factor()
            elif tok.kind in ("ident", "number", "("):
                value = value * self.factor()
            else:
                return value

    def factor(self) -> Element:
        tok = self.next()
        if tok.kind == "number":
            return self.model.scalar(Fraction(tok.text))
        if tok.kind == "(":
            inner = self.expr()
            closing = self.next()
            if closing.kind != ")":
                raise ModelFileError("syntax", closing.line, closing.col, "expected ')'")
            return self._power(inner)
        if tok.kind == "ident":
            if tok.text not in self.model.index:
                raise ModelFileError(
                    "unknown-generator", tok.line, tok.col, f"unknown generator {tok.text!r}"
                )
            return self._power(self.model.gen(tok.text))
        raise ModelFileError("syntax", tok.line, tok.col, f"expected a factor, got {tok.text!r}")

    def _power(self, value: Element) -> Element:
        if self.peek().kind == "^":
            self.next()
            tok = self.next()
            if tok.kind != "number" or "/" in tok.text:
                raise ModelFileError("syntax", tok.line, tok.col, "exponent must be a natural number")
            return value ** int(tok.text)
        return value


def parse_expression(text: str, model: Model, line: int = 0, col: int = 1) -> Element:
    return _ExprParser(_scan(text, line, col), model).parse()


# -- statement splitting ----------------------------------------------------------


def _statements(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        col = 1
        for chunk in body.split(";"):
            stripped = chunk.strip()
            if stripped:
                yield lineno, col + chunk.index(stripped[0]), stripped
            col += len(chunk) + 1


class ModelFile:
    """A parsed and validated model: base, optional bundle, named values."""

    def __init__(self):
        self.name = ""
        self.model: Optional[Model] = None
        self.bundle: Optional[DgBundle] = None
        self.elements: Dict[str, Element] = {}
        self.vectors: Dict[str, Derivation] = {}
        self.symmetries: Dict[str, SymElement] = {}

    @property
    def space(self):
        return self.bundle if self.bundle is not None else self.model


def _split_decl(stmt: str, sep: str, kind: str, line: int, col: int) -> Tuple[str, str]:
    if sep not in stmt:
        raise ModelFileError("syntax", line, col, f"expected {sep!r} in {kind} statement")
    left, right = stmt.split(sep, 1)
    return left.strip(), right.strip()


def parse_model(text: str, validate: bool = True, check_dimension: bool = True) -> ModelFile:
    """Parse a .dgm document and run the load-time checks.

    validate=False skips the bundle Maurer-Cartan requirement (used by the
    mc-check command, which reports the residue instead of failing the load).
    """
    header_name = ""
    formal_dim: Optional[int] = None
    dim_pos = (0, 1)
    gen_decls: List[Tuple[str, int, int, int]] = []
    diff_decls: Dict[str, Tuple[str, int, int]] = {}
    fiber_decls: List[Tuple[str, int, int, int]] = []
    structural_decls: Dict[str, Tuple[str, int, int]] = {}
    let_decls: List[Tuple[str, str, int, int]] = []
    vec_decls: List[Tuple[str, str, int, int]] = []
    sym_decls: List[Tuple[str, str, int, int]] = []

    for line, col, stmt in _statements(text):
        head, _, rest = stmt.partition(" ")
        rest = rest.strip()
        if head == "model":
            header_name = rest
        elif head == "dim":
            try:
                formal_dim = int(rest)
            except ValueError:
                raise ModelFileError("syntax", line, col, f"bad dimension {rest!r}")
            dim_pos = (line, col)
        elif head == "gen" or head == "fiber":
            name, degree_text = _split_decl(rest, ":", head, line, col)
            try:
                degree = int(degree_text)
            except ValueError:
                raise ModelFileError("syntax", line, col, f"bad degree {degree_text!r}")
            target = gen_decls if head == "gen" else fiber_decls
            target.append((name, degree, line, col))
        elif head == "d":
            name, expr = _split_decl(rest, "=", "differential", line, col)
            diff_decls[name] = (expr, line, col)
        elif head == "let":
            name, expr = _split_decl(rest, "=", "let", line, col)
            let_decls.append((name, expr, line, col))
        elif head == "vec":
            name, spec = _split_decl(rest, ":", "vec", line, col)
            vec_decls.append((name, spec, line, col))
        elif head == "sym":
            name, spec = _split_decl(rest, ":", "sym", line, col)
            sym_decls.append((name, spec, line, col))
        elif stmt.split("=", 1)[0].strip() in STRUCTURAL_KEYS:
            key, expr = _split_decl(stmt, "=", "structural", line, col)
            structural_decls[key] = (expr, line, col)
        else:
            raise ModelFileError("syntax", line, col, f"unrecognized statement {stmt!r}")

    out = ModelFile()
    out.name = header_name

    # base model: two passes so differential expressions can mention any generator
    try:
        algebra = Model([(n, d) for n, d, _, _ in gen_decls], formal_dimension=formal_dim or 0)
    except GradedError as e:
        line, col = (gen_decls[0][2], gen_decls[0][3]) if gen_decls else (0, 1)
        raise ModelFileError("syntax", line, col, str(e))
    diff_values: Dict[str, Element] = {}
    for name, (expr, line, col) in diff_decls.items():
        if name not in algebra.index:
            raise ModelFileError("unknown-generator", line, col, f"unknown generator {name!r}")
        value = parse_expression(expr, algebra, line, col)
        want = algebra.generator_named(name).degree + 1
        if not value.is_zero() and value.degree() != want:
            raise ModelFileError(
                "degree-mismatch",
                line,
                col,
                f"d({name}) must have degree {want}, got {value.degree()}",
                witness=expr,
            )
        diff_values[name] = value

    def rebuild(model: Model) -> Dict[str, Element]:
        return {
            name: Element(model, dict(v.terms)) for name, v in diff_values.items() if not v.is_zero()
        }

    try:
        base = Model(
            [(n, d) for n, d, _, _ in gen_decls],
            formal_dimension=formal_dim or 0,
            differential=rebuild,
            name=header_name,
        )
    except GradedError as e:
        witness = str(e)
        line, col = dim_pos
        for name, (_, dline, dcol) in diff_decls.items():
            if f"{name!r}" in witness:
                line, col = dline, dcol
        raise ModelFileError("d-squared", line, col, "differential does not square to zero", witness)
    out.model = base

    if check_dimension and formal_dim is not None:
        try:
            validate_formal_dimension(base)
        except GradedError as e:
            raise ModelFileError("formal-dimension", dim_pos[0], dim_pos[1], str(e))

    # bundle assembly
    if fiber_decls or structural_decls:
        out.bundle = _build_bundle(base, fiber_decls, structural_decls, validate)

    scope = out.bundle.base if out.bundle else base
    for name, expr, line, col in let_decls:
        out.elements[name] = parse_expression(expr, scope, line, col)
    for name, spec, line, col in vec_decls:
        out.vectors[name] = _build_vector(scope, spec, line, col)
    for name, spec, line, col in sym_decls:
        if not isinstance(out.bundle, DgBundle):
            raise ModelFileError("shape", line, col, "sym declarations need a validated bundle")
        out.symmetries[name] = _build_symmetry(out, spec, line, col)
    return out


def _build_bundle(base, fiber_decls, structural_decls, validate):
    structural: Dict[str, Element] = {}
    for key, (expr, line, col) in structural_decls.items():
        structural[key] = parse_expression(expr, base, line, col)
    fline, fcol = (fiber_decls[0][2], fiber_decls[0][3]) if fiber_decls else (0, 1)
    fibers = {name: degree for name, degree, _, _ in fiber_decls}
    names = list(fibers)
    keys = set(structural)
    try:
        if keys <= {"F", "Fbar", "H"} and len(fibers) == 2:
            q, t = names
            if fibers[q] != 1 or fibers[t] != 2:
                raise ModelFileError(
                    "shape", fline, fcol, "two-step bundles need fibers of degree 1 and 2"
                )
            return DgBundle.two_step(
                base,
                structural.get("F", base.zero()),
                structural.get("Fbar", base.zero()),
                structural.get("H", base.zero()),
                q=q,
                t=t,
                name=base.name,
            )
        if keys <= {"F4", "F7"} and len(fibers) == 2:
            q, t = names
            if fibers[q] != 3 or fibers[t] != 6:
                raise ModelFileError(
                    "shape", fline, fcol, "flux bundles need fibers of degree 3 and 6"
                )
            return DgBundle.flux(
                base,
                structural.get("F4", base.zero()),
                structural.get("F7", base.zero()),
                q=q,
                t=t,
                name=base.name,
            )
        if len(fibers) == 1 and keys <= {"Theta", "F"}:
            (fiber, degree), = fibers.items()
            theta = structural.get("Theta", structural.get("F", base.zero()))
            return DgBundle.line(base, theta, fiber=fiber, degree=degree, name=base.name)
    except BundleError as e:
        if validate:
            raise ModelFileError("maurer-cartan", fline, fcol, "structural data fails Maurer-Cartan", str(e))
        return _unvalidated_bundle(base, fibers, structural)
    except GradedError as e:
        raise ModelFileError("degree-mismatch", fline, fcol, str(e))
    raise ModelFileError(
        "shape",
        fline,
        fcol,
        f"cannot infer a bundle shape from fibers {sorted(fibers.items())} and forms {sorted(keys)}",
    )


class UnvalidatedBundle:
    """Carrier for mc-check: the extended algebra plus the candidate field."""

    def __init__(self, carrier: DgBundle, field: Derivation, structural):
        self.carrier = carrier
        self.field = field
        self.structural = structural

    @property
    def base(self):
        return self.carrier.base


def _unvalidated_bundle(base, fibers, structural):
    from .derivations import candidate_line, candidate_two_step

    names = list(fibers)
    if len(fibers) == 2 and set(structural) <= {"F", "Fbar", "H"}:
        q, t = names
        carrier, field = candidate_two_step(
            base,
            structural.get("F", base.zero()),
            structural.get("Fbar", base.zero()),
            structural.get("H", base.zero()),
            q=q,
            t=t,
        )
        return UnvalidatedBundle(carrier, field, structural)
    (fiber, degree), = fibers.items()
    theta = structural.get("Theta", structural.get("F", base.zero()))
    carrier, field = candidate_line(base, theta, fiber=fiber, degree=degree)
    return UnvalidatedBundle(carrier, field, structural)


def _build_vector(base: Model, spec: str, line: int, col: int) -> Derivation:
    values: Dict[str, Element] = {}
    for clause in spec.split(","):
        clause = clause.strip()
        if not clause:
            continue
        name, expr = _split_decl(clause, "=", "vec", line, col)
        if name not in base.index:
            raise ModelFileError("unknown-generator", line, col, f"unknown generator {name!r}")
        values[name] = parse_expression(expr, base, line, col)
    try:
        return Derivation(base, -1, values)
    except Exception as e:
        raise ModelFileError("degree-mismatch", line, col, str(e))


def _build_symmetry(out: ModelFile, spec: str, line: int, col: int) -> SymElement:
    degree = None
    parts: Dict[str, object] = {}
    for clause in spec.split(","):
        clause = clause.strip()
        if not clause:
            continue
        key, value = _split_decl(clause, "=", "sym", line, col)
        if key == "deg":
            degree = int(value)
        elif key == "X":
            if value not in out.vectors:
                raise ModelFileError("unknown-generator", line, col, f"unknown vec {value!r}")
            parts["iota"] = out.vectors[value]
        elif key in SYM_KEYS:
            parts[key] = parse_expression(value, out.bundle.base, line, col)
        else:
            raise ModelFileError("syntax", line, col, f"unknown sym key {key!r}")
    if degree is None:
        raise ModelFileError("syntax", line, col, "sym statements need deg = <int>")
    try:
        return symmetry(out.bundle, degree, **parts)
    except (SymmetryError, GradedError) as e:
        raise ModelFileError("degree-mismatch", line, col, str(e))


def load_path(path: str, validate: bool = True, check_dimension: bool = True) -> ModelFile:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model(handle.read(), validate=validate, check_dimension=check_dimension)
