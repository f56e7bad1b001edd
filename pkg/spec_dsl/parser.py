"""
Spec Parser
===========
Recursive-descent parser (one-token lookahead) and validation pass for spec files.

    spec   := decl*
    decl   := KEY NAME '{' field* '}'
    field  := NAME ':' value [',' | ';']
    value  := NUMBER | STRING | NAME | '[' [value (',' value)* [',']] ']'

parse() is total: it never raises on any input text, recovers at the next
field or declaration after a syntax error, and reports every problem as a
Diagnostic.

Usage:
    outcome = parse(source)
    if outcome.ok:
        records = eval_spec(outcome.ast)
"""

from dataclasses import dataclass, field
from typing import Optional, Union

from probe_helpers.engineLevers import MAX_LIST_NESTING
from .diagnostics import Diagnostic, error, has_errors, warning
from .lexer import Token, TokenKind, tokenize

DECLARATION_KEYS = ("space", "atom", "region", "probe", "bc", "glue", "query")
BACKENDS = ("quantum", "classical", "generic")
CONE_NAMES = ("orthant", "psd", "generators")
QUERY_KINDS = ("value", "cond_prob", "bc_prob", "expectation", "compatibility")
PROBE_PAYLOADS = ("kraus", "unitary", "hamiltonian", "kernel", "tensor", "null", "compose")
BC_PAYLOADS = ("matrix", "weights", "coords")

KNOWN_FIELDS = {
    "space": ("backend", "n", "states", "gram", "cone", "generators"),
    "atom": ("space",),
    "region": ("atoms", "slice", "mirror"),
    "probe": ("region", "primitive", "duration", "glue") + PROBE_PAYLOADS,
    "bc": ("atom",) + BC_PAYLOADS,
    "glue": ("regions",),
    "query": ("kind", "probe", "given", "bcs", "check"),
}

# Space fields each backend reads; the rest are warned about as ignored
SPACE_FIELDS_BY_BACKEND = {
    "quantum": ("backend", "n"),
    "classical": ("backend", "states"),
    "generic": ("backend", "gram", "cone", "generators"),
}


# =============================================================================
# AST
# =============================================================================

@dataclass(frozen=True)
class Name:
    """Identifier used as a value (a reference or an enum word)."""

    text: str
    line: int
    column: int

    def __str__(self) -> str:
        return self.text


Value = Union[float, complex, str, Name, list]


@dataclass(frozen=True)
class Field:
    name: str
    value: Value
    line: int
    column: int


@dataclass(frozen=True)
class Declaration:
    """One `key name { ... }` block."""

    key: str
    name: str
    fields: dict[str, Field]
    line: int
    column: int

    def get(self, name: str, default=None):
        f = self.fields.get(name)
        return default if f is None else f.value

    def has(self, name: str) -> bool:
        return name in self.fields


@dataclass(frozen=True)
class SpecAst:
    declarations: tuple[Declaration, ...] = ()

    def of_key(self, key: str) -> list[Declaration]:
        return [d for d in self.declarations if d.key == key]

    @property
    def query_names(self) -> list[str]:
        return [d.name for d in self.of_key("query")]


@dataclass(frozen=True)
class ParseOutcome:
    ast: SpecAst
    diagnostics: tuple[Diagnostic, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not has_errors(self.diagnostics)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


class _SyntaxError(Exception):
    def __init__(self, token: Token, message: str):
        super().__init__(message)
        self.token = token
        self.message = message


# =============================================================================
# PARSER
# =============================================================================

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    def peek(self, offset: int = 0) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.peek()
        if token.kind != TokenKind.EOF:
            self.pos += 1
        return token

    def report(self, token: Token, message: str) -> None:
        self.diagnostics.append(error(token.line, token.column, message))

    def at_declaration_start(self) -> bool:
        return (
            self.peek().kind == TokenKind.IDENT
            and self.peek().text in DECLARATION_KEYS
            and self.peek(1).kind == TokenKind.IDENT
            and self.peek(2).kind == TokenKind.LBRACE
        )

    # -------------------------------------------------------------------------
    # Declarations
    # -------------------------------------------------------------------------

    def parse_spec(self) -> list[Declaration]:
        declarations = []
        while self.peek().kind != TokenKind.EOF:
            token = self.peek()
            if token.kind == TokenKind.IDENT and token.text in DECLARATION_KEYS:
                decl = self.parse_declaration()
                if decl is not None:
                    declarations.append(decl)
                continue
            self.report(token, f"expected a declaration ({', '.join(DECLARATION_KEYS)}), got {_describe(token)}")
            self.advance()
            self.skip_to_declaration()
        return declarations

    def skip_to_declaration(self) -> None:
        while self.peek().kind != TokenKind.EOF and not self.at_declaration_start():
            self.advance()

    def parse_declaration(self) -> Optional[Declaration]:
        key_token = self.advance()
        name_token = self.peek()
        if name_token.kind != TokenKind.IDENT:
            self.report(name_token, f"expected a name after '{key_token.text}', got {_describe(name_token)}")
            self.skip_to_declaration()
            return None
        self.advance()
        if self.peek().kind != TokenKind.LBRACE:
            self.report(self.peek(), f"expected '{{' after '{key_token.text} {name_token.text}', got {_describe(self.peek())}")
            self.skip_to_declaration()
            return None
        self.advance()

        fields: dict[str, Field] = {}
        while True:
            token = self.peek()
            if token.kind == TokenKind.RBRACE:
                self.advance()
                break
            if token.kind == TokenKind.EOF or self.at_declaration_start():
                self.report(token, f"missing '}}' to close '{key_token.text} {name_token.text}'")
                break
            if token.kind != TokenKind.IDENT:
                self.report(token, f"expected a field name, got {_describe(token)}")
                self.advance()
                continue
            parsed = self.parse_field()
            if parsed is None:
                continue
            if parsed.name in fields:
                self.report(token, f"duplicate field '{parsed.name}' in '{name_token.text}'")
                continue
            fields[parsed.name] = parsed

        return Declaration(key_token.text, name_token.text, fields, key_token.line, key_token.column)

    def parse_field(self) -> Optional[Field]:
        name_token = self.advance()
        try:
            if self.peek().kind != TokenKind.COLON:
                raise _SyntaxError(self.peek(), f"expected ':' after field '{name_token.text}', got {_describe(self.peek())}")
            self.advance()
            value = self.parse_value(0)
        except _SyntaxError as exc:
            self.report(exc.token, exc.message)
            self.skip_to_field()
            return None
        if self.peek().kind in (TokenKind.COMMA, TokenKind.SEMICOLON):
            self.advance()
        return Field(name_token.text, value, name_token.line, name_token.column)

    def skip_to_field(self) -> None:
        # Stop at the next field, the closing brace, or the next declaration
        depth = 0
        while True:
            token = self.peek()
            if token.kind == TokenKind.EOF or (depth == 0 and self.at_declaration_start()):
                return
            if depth == 0:
                if token.kind == TokenKind.RBRACE:
                    return
                if token.kind in (TokenKind.COMMA, TokenKind.SEMICOLON):
                    self.advance()
                    return
                if token.kind == TokenKind.IDENT and self.peek(1).kind == TokenKind.COLON:
                    return
            if token.kind == TokenKind.LBRACKET:
                depth += 1
            elif token.kind == TokenKind.RBRACKET and depth > 0:
                depth -= 1
            self.advance()

    # -------------------------------------------------------------------------
    # Values
    # -------------------------------------------------------------------------

    def parse_value(self, depth: int) -> Value:
        token = self.peek()
        if token.kind == TokenKind.NUMBER:
            self.advance()
            return token.value
        if token.kind == TokenKind.STRING:
            self.advance()
            return token.value
        if token.kind == TokenKind.IDENT:
            self.advance()
            return Name(token.text, token.line, token.column)
        if token.kind == TokenKind.LBRACKET:
            if depth >= MAX_LIST_NESTING:
                raise _SyntaxError(token, f"lists nested deeper than {MAX_LIST_NESTING} levels")
            return self.parse_list(depth)
        raise _SyntaxError(token, f"expected a value, got {_describe(token)}")

    def parse_list(self, depth: int) -> list:
        self.advance()
        items: list = []
        if self.peek().kind == TokenKind.RBRACKET:
            self.advance()
            return items
        while True:
            items.append(self.parse_value(depth + 1))
            token = self.peek()
            if token.kind == TokenKind.COMMA:
                self.advance()
                if self.peek().kind == TokenKind.RBRACKET:
                    self.advance()
                    return items
                continue
            if token.kind == TokenKind.RBRACKET:
                self.advance()
                return items
            raise _SyntaxError(token, f"expected ',' or ']' in list, got {_describe(token)}")


def _describe(token: Token) -> str:
    if token.kind == TokenKind.EOF:
        return "end of file"
    return f"{token.kind.value} '{token.text}'"


# =============================================================================
# VALIDATION
# =============================================================================

# What each declaration key makes its name refer to
_ENTITY_OF_KEY = {
    "space": "space",
    "atom": "atom",
    "region": "region",
    "glue": "region",
    "probe": "probe",
    "bc": "bc",
    "query": "query",
}


class _Validator:
    def __init__(self, ast: SpecAst):
        self.ast = ast
        self.diagnostics: list[Diagnostic] = []
        self.declared: dict[str, str] = {}
        self.gluings: set[str] = set()
        self.later = {d.name for d in ast.declarations}

    def report(self, line: int, column: int, message: str) -> None:
        self.diagnostics.append(error(line, column, message))

    def run(self) -> list[Diagnostic]:
        for decl in self.ast.declarations:
            for name, f in decl.fields.items():
                if name not in KNOWN_FIELDS[decl.key]:
                    self.diagnostics.append(warning(f.line, f.column, f"unknown field '{name}' in {decl.key} '{decl.name}'"))
            getattr(self, f"check_{decl.key}")(decl)
            self.declare(decl.name, _ENTITY_OF_KEY[decl.key], decl.line, decl.column)
            if decl.key == "glue":
                self.gluings.add(decl.name)
        return self.diagnostics

    def declare(self, name: str, entity: str, line: int, column: int) -> None:
        if name in self.declared:
            self.report(line, column, f"duplicate name '{name}'")
            return
        self.declared[name] = entity

    # -------------------------------------------------------------------------
    # Field helpers
    # -------------------------------------------------------------------------

    def require(self, decl: Declaration, name: str) -> Optional[Field]:
        f = decl.fields.get(name)
        if f is None:
            self.report(decl.line, decl.column, f"{decl.key} '{decl.name}' is missing field '{name}'")
        return f

    def reference(self, value: Value, entity: str, f: Field) -> Optional[str]:
        if not isinstance(value, Name):
            self.report(f.line, f.column, f"field '{f.name}' expects the name of a {entity}")
            return None
        found = self.declared.get(value.text)
        if found is None:
            if value.text in self.later:
                self.report(value.line, value.column, f"identifier '{value.text}' is used before its declaration")
            else:
                self.report(value.line, value.column, f"undeclared identifier '{value.text}'")
            return None
        if found != entity:
            self.report(value.line, value.column, f"'{value.text}' is a {found}, expected a {entity}")
            return None
        return value.text

    def reference_list(self, f: Field, entity: str, length: Optional[int] = None) -> list[str]:
        if not isinstance(f.value, list) or not f.value:
            self.report(f.line, f.column, f"field '{f.name}' expects a list of {entity} names")
            return []
        if length is not None and len(f.value) != length:
            self.report(f.line, f.column, f"field '{f.name}' expects exactly {length} {entity} names")
        return [n for n in (self.reference(v, entity, f) for v in f.value) if n is not None]

    def word(self, f: Field, allowed: tuple[str, ...]) -> Optional[str]:
        text = f.value.text if isinstance(f.value, Name) else f.value if isinstance(f.value, str) else None
        if text not in allowed:
            self.report(f.line, f.column, f"field '{f.name}' must be one of {', '.join(allowed)}")
            return None
        return text

    def numeric(self, f: Field, allow_complex: bool = False) -> bool:
        stack = [f.value]
        while stack:
            v = stack.pop()
            if isinstance(v, list):
                stack.extend(v)
            elif isinstance(v, complex) and not allow_complex:
                self.report(f.line, f.column, f"field '{f.name}' must hold real numbers")
                return False
            elif not isinstance(v, (float, complex)):
                self.report(f.line, f.column, f"field '{f.name}' must hold numbers only")
                return False
        return True

    def exactly_one(self, decl: Declaration, options: tuple[str, ...]) -> Optional[str]:
        present = [o for o in options if o in decl.fields]
        if len(present) != 1:
            self.report(decl.line, decl.column, f"{decl.key} '{decl.name}' needs exactly one of {', '.join(options)}")
            return None
        return present[0]

    # -------------------------------------------------------------------------
    # Declaration checks
    # -------------------------------------------------------------------------

    def check_space(self, decl: Declaration) -> None:
        backend_field = self.require(decl, "backend")
        if backend_field is None:
            return
        backend = self.word(backend_field, BACKENDS)
        if backend == "quantum":
            n = self.require(decl, "n")
            if n is not None and not (isinstance(n.value, float) and n.value >= 1 and n.value.is_integer()):
                self.report(n.line, n.column, "field 'n' must be a positive integer")
        elif backend == "classical":
            states = self.require(decl, "states")
            if states is not None:
                if not isinstance(states.value, list) or not states.value or any(isinstance(s, list) for s in states.value):
                    self.report(states.line, states.column, "field 'states' expects a non-empty list of state names")
        elif backend == "generic":
            gram = self.require(decl, "gram")
            if gram is not None:
                self.numeric(gram)
            cone = decl.fields.get("cone")
            cone_name = self.word(cone, CONE_NAMES) if cone is not None else "orthant"
            if cone_name == "generators":
                generators = self.require(decl, "generators")
                if generators is not None:
                    self.numeric(generators)
            elif cone_name is not None and "generators" in decl.fields:
                f = decl.fields["generators"]
                self.diagnostics.append(warning(f.line, f.column, f"field 'generators' is ignored by {cone_name} cones"))
        if backend is not None:
            for name, f in decl.fields.items():
                if name in KNOWN_FIELDS["space"] and name not in SPACE_FIELDS_BY_BACKEND[backend]:
                    self.diagnostics.append(warning(f.line, f.column, f"field '{name}' is ignored by {backend} spaces"))

    def check_atom(self, decl: Declaration) -> None:
        f = self.require(decl, "space")
        if f is not None:
            self.reference(f.value, "space", f)

    def check_region(self, decl: Declaration) -> None:
        kind = self.exactly_one(decl, ("atoms", "slice"))
        if kind == "atoms":
            f = decl.fields["atoms"]
            names = self.reference_list(f, "atom")
            seen = set()
            for name in names:
                if name in seen:
                    self.report(f.line, f.column, f"repeated atom '{name}' in region '{decl.name}'")
                seen.add(name)
        elif kind == "slice":
            f = decl.fields["slice"]
            self.reference(f.value, "atom", f)
            mirror = decl.fields.get("mirror")
            if mirror is not None:
                if isinstance(mirror.value, Name):
                    self.declare(mirror.value.text, "atom", mirror.line, mirror.column)
                else:
                    self.report(mirror.line, mirror.column, "field 'mirror' expects a new atom name")

    def check_glue(self, decl: Declaration) -> None:
        f = self.require(decl, "regions")
        if f is not None:
            names = self.reference_list(f, "region", length=2)
            if len(names) == 2 and names[0] == names[1]:
                self.report(f.line, f.column, f"glue '{decl.name}' joins region '{names[0]}' to itself")

    def check_probe(self, decl: Declaration) -> None:
        region = self.require(decl, "region")
        if region is not None:
            self.reference(region.value, "region", region)
        payload = self.exactly_one(decl, PROBE_PAYLOADS)
        if payload in ("kraus", "unitary", "hamiltonian"):
            self.numeric(decl.fields[payload], allow_complex=True)
        elif payload in ("kernel", "tensor"):
            self.numeric(decl.fields[payload])
        elif payload == "compose":
            self.reference_list(decl.fields["compose"], "probe", length=2)
            glue = self.require(decl, "glue")
            if glue is not None:
                name = self.reference(glue.value, "region", glue)
                if name is not None and name not in self.gluings:
                    self.report(glue.line, glue.column, f"'{name}' is not a glue declaration")
        if "duration" in decl.fields:
            duration = decl.fields["duration"]
            if payload != "hamiltonian":
                self.report(duration.line, duration.column, "field 'duration' only applies to a hamiltonian")
            elif not isinstance(duration.value, float):
                self.report(duration.line, duration.column, "field 'duration' must be a real number")
        if "primitive" in decl.fields:
            self.word(decl.fields["primitive"], ("true", "false"))

    def check_bc(self, decl: Declaration) -> None:
        atom = self.require(decl, "atom")
        if atom is not None:
            self.reference(atom.value, "atom", atom)
        payload = self.exactly_one(decl, BC_PAYLOADS)
        if payload is not None:
            self.numeric(decl.fields[payload], allow_complex=payload == "matrix")

    def check_query(self, decl: Declaration) -> None:
        kind_field = self.require(decl, "kind")
        kind = self.word(kind_field, QUERY_KINDS) if kind_field is not None else None
        probe = self.require(decl, "probe")
        if probe is not None:
            self.reference(probe.value, "probe", probe)
        bcs = self.require(decl, "bcs")
        if bcs is not None:
            self.reference_list(bcs, "bc")
        given = decl.fields.get("given")
        if kind in ("cond_prob", "expectation"):
            given = self.require(decl, "given")
            if given is not None:
                self.reference(given.value, "probe", given)
        elif kind == "bc_prob":
            given = self.require(decl, "given")
            if given is not None:
                self.reference_list(given, "bc")
        elif kind is not None and given is not None:
            self.diagnostics.append(warning(given.line, given.column, f"field 'given' is ignored by {kind} queries"))
        if "check" in decl.fields:
            self.word(decl.fields["check"], ("true", "false"))


def validate(ast: SpecAst) -> list[Diagnostic]:
    """Name resolution, duplicate names, repeated atoms and required fields."""
    return _Validator(ast).run()


def parse(source: Union[str, bytes]) -> ParseOutcome:
    """
    Parse and validate spec text.

    Args:
        source: Spec text (bytes are decoded as UTF-8 with replacement)

    Returns:
        ParseOutcome holding the declarations that parsed and all diagnostics,
        sorted by position
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8", errors="replace")
    tokens, diagnostics = tokenize(source)
    parser = _Parser(tokens)
    ast = SpecAst(tuple(parser.parse_spec()))
    diagnostics = diagnostics + parser.diagnostics
    if not has_errors(diagnostics):
        diagnostics += validate(ast)
    diagnostics.sort(key=lambda d: (d.line, d.column))
    return ParseOutcome(ast, tuple(diagnostics))
