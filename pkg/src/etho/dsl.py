"""ethoscript: a small language for defining behaviors as composable rules.

Grammar (keywords case-insensitive, names with spaces must be quoted):

    program   := def+
    def       := "define" NAME "as" expr post*
    expr      := seq
    seq       := conj ("then" ["within" INT] conj)*
    conj      := unary ("and" unary)*
    unary     := "not" unary | atom
    atom      := "(" expr ")" | objectp | socialp | statep | NAME
    objectp   := "object" "(" STRING "," REL ["," CMP]
                 ["," "bodyparts" "=" list] ")"
    socialp   := "social" "(" REL CMPOP NUMBER | REL ("=="|"!=") ORIENT
                 ["," "bodyparts" "=" list] ["," "other_bodyparts" "=" list] ")"
    statep    := "state" "(" ("speed"|"acceleration") CMPOP NUMBER ")"
    post      := "smooth" INT | "min" INT

"and" composes simultaneously (frame-wise conjunction), "then" sequentially
(a bout of the left followed by a bout of the right, optionally "within K"
frames), "not" complements. A bare NAME references another definition or a
built-in program. "#" starts a line comment.

Every parse failure is an EthoSyntaxError carrying 1-based line:col and the
expected-token set; the tokenizer and parser never raise anything else.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import behaviors
from .errors import CycleError, EthoError, EthoSyntaxError, UnknownNameError
from .events import (
    EventDict,
    EventSeq,
    PostProcessSpec,
    add_sequential_events,
    add_simultaneous_events,
    negate_events,
    postprocess,
)
from .relations import (
    BOOLEAN_KINDS,
    OBJECT_KINDS,
    SOCIAL_KINDS,
    ComparisonSpec,
    OrientationKind,
    RelationKind,
    _format_number,
)

# --- tokens -----------------------------------------------------------------

_KEYWORDS = frozenset(
    "define as and then not within smooth min object social state bodyparts other_bodyparts".split()
)

_CMP_OPS = ("<=", ">=", "==", "!=", "<", ">")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUMBER STRING CMPOP punctuation EOF
    value: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_col = col
        two = source[i : i + 2]
        if two in ("<=", ">=", "==", "!="):
            tokens.append(Token("CMPOP", two, line, start_col))
            i += 2
            col += 2
            continue
        if ch in "<>":
            tokens.append(Token("CMPOP", ch, line, start_col))
            i += 1
            col += 1
            continue
        if ch in "()[],=":
            tokens.append(Token(ch, ch, line, start_col))
            i += 1
            col += 1
            continue
        if ch in "\"'":
            quote = ch
            j = i + 1
            while j < n and source[j] not in (quote, "\n"):
                j += 1
            if j >= n or source[j] == "\n":
                raise EthoSyntaxError("unterminated string", line, start_col, (f"closing {quote}",))
            tokens.append(Token("STRING", source[i + 1 : j], line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        m = re.match(r"-?\d+(\.\d+)?([eE][+-]?\d+)?", source[i:])
        if m:
            tokens.append(Token("NUMBER", m.group(0), line, start_col))
            i += m.end()
            col += m.end()
            continue
        m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", source[i:])
        if m:
            tokens.append(Token("IDENT", m.group(0), line, start_col))
            i += m.end()
            col += m.end()
            continue
        raise EthoSyntaxError(f"unexpected character {ch!r}", line, start_col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# --- AST --------------------------------------------------------------------


@dataclass(frozen=True)
class OrientationComparison:
    op: str  # == or !=
    side: OrientationKind

    def __str__(self) -> str:
        return f"{self.op}{self.side.value}"


@dataclass(frozen=True)
class ObjectPred:
    object_name: str
    relation: RelationKind
    comparison: ComparisonSpec | None = None
    bodyparts: tuple = ("all",)


@dataclass(frozen=True)
class SocialPred:
    relation: RelationKind
    comparison: ComparisonSpec | OrientationComparison
    bodyparts: tuple = ("all",)
    other_bodyparts: tuple = ("all",)


@dataclass(frozen=True)
class StatePred:
    state: str
    comparison: ComparisonSpec


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Then:
    first: object
    second: object
    max_gap: int = 0


@dataclass(frozen=True)
class Not:
    expr: object


@dataclass(frozen=True)
class BehaviorDef:
    name: str
    expr: object
    post: PostProcessSpec = PostProcessSpec()


# --- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def _fail(self, expected: tuple[str, ...]):
        tok = self.cur
        got = "end of input" if tok.kind == "EOF" else repr(tok.value)
        raise EthoSyntaxError(f"unexpected {got}", tok.line, tok.col, expected)

    def _advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    def _at_keyword(self, word: str) -> bool:
        return self.cur.kind == "IDENT" and self.cur.value.lower() == word

    def _expect_keyword(self, word: str) -> Token:
        if not self._at_keyword(word):
            self._fail((f"'{word}'",))
        return self._advance()

    def _expect(self, kind: str, what: str | None = None) -> Token:
        if self.cur.kind != kind:
            self._fail((what or kind,))
        return self._advance()

    def _name(self) -> str:
        if self.cur.kind == "STRING":
            return self._advance().value
        if self.cur.kind == "IDENT" and self.cur.value.lower() not in _KEYWORDS:
            return self._advance().value
        self._fail(("name", "quoted name"))

    def _int(self) -> int:
        tok = self._expect("NUMBER", "integer")
        try:
            return int(tok.value)
        except ValueError:
            raise EthoSyntaxError(f"expected an integer, got {tok.value!r}", tok.line, tok.col) from None

    def _number(self) -> float:
        tok = self._expect("NUMBER", "number")
        return float(tok.value)

    def program(self) -> list[BehaviorDef]:
        defs = []
        names: dict[str, Token] = {}
        if self.cur.kind == "EOF":
            self._fail(("'define'",))
        while self.cur.kind != "EOF":
            name_tok = self.cur
            d = self.definition()
            if d.name in names:
                raise EthoSyntaxError(
                    f"duplicate definition name {d.name!r}", name_tok.line, name_tok.col
                )
            names[d.name] = name_tok
            defs.append(d)
        return defs

    def definition(self) -> BehaviorDef:
        self._expect_keyword("define")
        name = self._name()
        self._expect_keyword("as")
        expr = self.expr()
        smooth = 0
        min_w = 0
        while self._at_keyword("smooth") or self._at_keyword("min"):
            word = self._advance().value.lower()
            value = self._int()
            if value < 0:
                tok = self.tokens[self.pos - 1]
                raise EthoSyntaxError(f"{word} window must be non-negative", tok.line, tok.col)
            if word == "smooth":
                smooth = value
            else:
                min_w = value
        return BehaviorDef(name, expr, PostProcessSpec(smooth, min_w))

    def expr(self):
        return self.seq()

    def seq(self):
        left = self.conj()
        while self._at_keyword("then"):
            self._advance()
            gap = 0
            if self._at_keyword("within"):
                self._advance()
                gap = self._int()
            right = self.conj()
            left = Then(left, right, gap)
        return left

    def conj(self):
        items = [self.unary()]
        while self._at_keyword("and"):
            self._advance()
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self):
        if self._at_keyword("not"):
            self._advance()
            return Not(self.unary())
        return self.atom()

    def atom(self):
        if self.cur.kind == "(":
            self._advance()
            inner = self.expr()
            self._expect(")", "')'")
            return inner
        if self._at_keyword("object"):
            return self.object_pred()
        if self._at_keyword("social"):
            return self.social_pred()
        if self._at_keyword("state"):
            return self.state_pred()
        if self.cur.kind == "STRING" or (
            self.cur.kind == "IDENT" and self.cur.value.lower() not in _KEYWORDS
        ):
            return Ref(self._advance().value)
        self._fail(("'('", "'object'", "'social'", "'state'", "'not'", "behavior name"))

    def _relation(self, allowed) -> RelationKind:
        tok = self.cur
        if tok.kind not in ("IDENT", "STRING"):
            self._fail(("relation name",))
        try:
            kind = RelationKind(tok.value.lower())
        except ValueError:
            raise EthoSyntaxError(
                f"unknown relation {tok.value!r}",
                tok.line,
                tok.col,
                tuple(sorted(k.value for k in allowed)),
            ) from None
        if kind not in allowed:
            raise EthoSyntaxError(
                f"relation {kind.value!r} not allowed here",
                tok.line,
                tok.col,
                tuple(sorted(k.value for k in allowed)),
            )
        self._advance()
        return kind

    def _comparison(self) -> ComparisonSpec:
        op = self._expect("CMPOP", "comparison operator").value
        return ComparisonSpec(op, self._number())

    def _part_list(self) -> tuple:
        self._expect("[", "'['")
        parts = []
        if self.cur.kind != "]":
            while True:
                if self.cur.kind in ("IDENT", "STRING"):
                    parts.append(self._advance().value)
                else:
                    self._fail(("bodypart name",))
                if self.cur.kind == ",":
                    self._advance()
                    continue
                break
        self._expect("]", "']'")
        return tuple(parts)

    def _named_lists(self, allowed: tuple[str, ...]) -> dict:
        out = {}
        while self.cur.kind == ",":
            self._advance()
            key_tok = self.cur
            if not any(self._at_keyword(k) for k in allowed):
                self._fail(tuple(f"'{k}'" for k in allowed))
            key = self._advance().value.lower()
            if key in out:
                raise EthoSyntaxError(f"duplicate {key} list", key_tok.line, key_tok.col)
            self._expect("=", "'='")
            out[key] = self._part_list()
        return out

    def object_pred(self) -> ObjectPred:
        self._expect_keyword("object")
        self._expect("(", "'('")
        obj_tok = self.cur
        if obj_tok.kind == "STRING":
            obj_name = self._advance().value
        elif obj_tok.kind in ("IDENT", "NUMBER") and obj_tok.value.lower() not in _KEYWORDS:
            obj_name = self._advance().value
        else:
            self._fail(("object name",))
        self._expect(",", "','")
        rel_tok = self.cur
        relation = self._relation(OBJECT_KINDS)
        comparison = None
        if self.cur.kind == "," and self.tokens[self.pos + 1].kind == "CMPOP":
            self._advance()
            comparison = self._comparison()
        lists = self._named_lists(("bodyparts",))
        self._expect(")", "')'")
        _check_typing(relation, comparison, rel_tok)
        return ObjectPred(obj_name, relation, comparison, lists.get("bodyparts", ("all",)))

    def social_pred(self) -> SocialPred:
        self._expect_keyword("social")
        self._expect("(", "'('")
        rel_tok = self.cur
        relation = self._relation(SOCIAL_KINDS)
        if relation == RelationKind.ORIENTATION:
            op = self._expect("CMPOP", "'==' or '!='").value
            if op not in ("==", "!="):
                raise EthoSyntaxError(
                    "orientation comparison must use == or !=", rel_tok.line, rel_tok.col
                )
            side_tok = self.cur
            if side_tok.kind != "IDENT" or side_tok.value.lower() not in ("front", "behind"):
                self._fail(("'front'", "'behind'"))
            self._advance()
            comparison = OrientationComparison(op, OrientationKind(side_tok.value.lower()))
        else:
            comparison = self._comparison()
        lists = self._named_lists(("bodyparts", "other_bodyparts"))
        self._expect(")", "')'")
        return SocialPred(
            relation,
            comparison,
            lists.get("bodyparts", ("all",)),
            lists.get("other_bodyparts", ("all",)),
        )

    def state_pred(self) -> StatePred:
        self._expect_keyword("state")
        self._expect("(", "'('")
        tok = self.cur
        if tok.kind != "IDENT" or tok.value.lower() not in ("speed", "acceleration"):
            self._fail(("'speed'", "'acceleration'"))
        state = self._advance().value.lower()
        comparison = self._comparison()
        self._expect(")", "')'")
        return StatePred(state, comparison)


def _check_typing(relation: RelationKind, comparison, tok: Token) -> None:
    numeric = relation not in BOOLEAN_KINDS
    if numeric and comparison is None:
        raise EthoSyntaxError(
            f"numeric relation {relation.value!r} needs a comparison", tok.line, tok.col
        )
    if not numeric and comparison is not None:
        raise EthoSyntaxError(
            f"boolean relation {relation.value!r} takes no comparison", tok.line, tok.col
        )


def parse(source: str) -> list[BehaviorDef]:
    """Parse ethoscript source into behavior definitions."""
    if not isinstance(source, str):
        raise EthoSyntaxError("source must be text", 1, 1)
    return _Parser(tokenize(source)).program()


# --- printer ----------------------------------------------------------------


def _print_name(name: str) -> str:
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) and name.lower() not in _KEYWORDS:
        return name
    return '"' + name + '"'


def _print_parts(key: str, parts: tuple) -> str:
    if tuple(parts) == ("all",):
        return ""
    return f", {key}=[" + ", ".join(_print_name(p) for p in parts) + "]"


def _print_expr(expr, parent: str = "top") -> str:
    if isinstance(expr, Then):
        gap = f" within {expr.max_gap}" if expr.max_gap else ""
        s = f"{_print_expr(expr.first, 'then')} then{gap} {_print_expr(expr.second, 'then')}"
        return f"({s})" if parent in ("and", "not") else s
    if isinstance(expr, And):
        s = " and ".join(_print_expr(item, "and") for item in expr.items)
        return f"({s})" if parent == "not" else s
    if isinstance(expr, Not):
        return f"not {_print_expr(expr.expr, 'not')}"
    if isinstance(expr, ObjectPred):
        cmp_s = f", {expr.comparison}" if expr.comparison is not None else ""
        return (
            f'object("{expr.object_name}", {expr.relation.value}{cmp_s}'
            + _print_parts("bodyparts", expr.bodyparts)
            + ")"
        )
    if isinstance(expr, SocialPred):
        return (
            f"social({expr.relation.value} {expr.comparison.op} "
            + (
                expr.comparison.side.value
                if isinstance(expr.comparison, OrientationComparison)
                else _format_number(expr.comparison.value)
            )
            + _print_parts("bodyparts", expr.bodyparts)
            + _print_parts("other_bodyparts", expr.other_bodyparts)
            + ")"
        )
    if isinstance(expr, StatePred):
        return f"state({expr.state} {expr.comparison.op} {_format_number(expr.comparison.value)})"
    if isinstance(expr, Ref):
        return _print_name(expr.name)
    raise TypeError(f"not an expression: {expr!r}")


def to_source(defs) -> str:
    """Canonical ethoscript text; parse(to_source(parse(s))) is a fixpoint."""
    lines = []
    for d in defs:
        line = f"define {_print_name(d.name)} as {_print_expr(d.expr)}"
        if d.post.smooth_window:
            line += f" smooth {d.post.smooth_window}"
        if d.post.min_window:
            line += f" min {d.post.min_window}"
        lines.append(line)
    return "\n".join(lines) + "\n"


# --- compiler and registry ---------------------------------------------------


@dataclass(frozen=True)
class BehaviorProgram:
    """A compiled definition: executing it is a pure function of the inputs."""

    name: str
    expr: object
    post: PostProcessSpec
    source: str

    def execute(self, d, objects, registry: "BehaviorRegistry") -> EventDict:
        result = _eval_expr(self.expr, d, objects, registry)
        return postprocess(result, self.post)


@dataclass(frozen=True)
class BehaviorRegistry:
    """Compiled programs plus the built-in task programs."""

    programs: dict = field(default_factory=dict)

    def known_names(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.programs) | set(behaviors.BUILTIN_NAMES)))

    def __contains__(self, name: str) -> bool:
        return name in self.programs or name in behaviors.BUILTIN_DEFAULTS

    def run(self, name: str, d, objects=None, overrides=None) -> EventDict:
        if objects is None:
            from .trackdata import ObjectSet

            objects = ObjectSet({})
        if name in self.programs:
            if overrides:
                raise EthoError(
                    f"behavior {name!r} is a compiled definition; parameter overrides "
                    "only apply to built-ins"
                )
            return self.programs[name].execute(d, objects, self)
        if name in behaviors.BUILTIN_DEFAULTS:
            return behaviors.run_builtin(name, d, objects, overrides)
        raise UnknownNameError("behavior", name, self.known_names())

    def sources(self) -> list[str]:
        return [self.programs[name].source for name in self.programs]


def compile_defs(defs, registry: BehaviorRegistry | None = None) -> BehaviorRegistry:
    """Type-check and link definitions into a new registry.

    References may point at earlier or later definitions in the same batch,
    at already-compiled programs, or at built-ins; cycles are rejected.
    """
    registry = registry or BehaviorRegistry()
    by_name = {d.name: d for d in defs}

    def refs_of(expr, acc):
        if isinstance(expr, Ref):
            acc.append(expr.name)
        elif isinstance(expr, And):
            for item in expr.items:
                refs_of(item, acc)
        elif isinstance(expr, Then):
            refs_of(expr.first, acc)
            refs_of(expr.second, acc)
        elif isinstance(expr, Not):
            refs_of(expr.expr, acc)
        return acc

    # resolve every reference, then reject cycles within the batch
    for d in defs:
        for ref in refs_of(d.expr, []):
            if ref not in by_name and ref not in registry:
                raise UnknownNameError("behavior", ref, tuple(sorted(by_name)) + registry.known_names())

    state: dict[str, int] = {}  # 1 visiting, 2 done

    def visit(name: str, stack: tuple):
        if name not in by_name:
            return
        if state.get(name) == 1:
            cycle = stack[stack.index(name) :] + (name,)
            raise CycleError(cycle)
        if state.get(name) == 2:
            return
        state[name] = 1
        for ref in refs_of(by_name[name].expr, []):
            visit(ref, stack + (name,))
        state[name] = 2

    for d in defs:
        visit(d.name, ())

    programs = dict(registry.programs)
    for d in defs:
        programs[d.name] = BehaviorProgram(d.name, d.expr, d.post, to_source([d]))
    return BehaviorRegistry(programs)


def compile_source(source: str, registry: BehaviorRegistry | None = None) -> BehaviorRegistry:
    return compile_defs(parse(source), registry)


def _lift_to_pairs(evdict: EventDict, pair_keys) -> EventDict:
    """View an animal-keyed EventDict under pair keys via the focal animal."""
    entries = {}
    for key in pair_keys:
        focal = key[0]
        entries[key] = evdict.entries.get(focal, EventSeq())
    return EventDict(evdict.n_frames, entries)


def _align_keys(dicts: list[EventDict]) -> list[EventDict]:
    """If any operand is pair-keyed, lift animal-keyed operands to the shared
    pair keys (state predicates gate the focal animal of each pair)."""
    pair_sets = [
        set(dd.entries) for dd in dicts if any(isinstance(k, tuple) for k in dd.entries)
    ]
    if not pair_sets:
        return dicts
    shared = set.intersection(*pair_sets)
    return [
        dd if any(isinstance(k, tuple) for k in dd.entries) else _lift_to_pairs(dd, shared)
        for dd in dicts
    ]


def _eval_expr(expr, d, objects, registry: BehaviorRegistry) -> EventDict:
    if isinstance(expr, ObjectPred):
        return behaviors.animals_object_events(
            d, objects, expr.object_name, expr.relation, expr.comparison, list(expr.bodyparts)
        )
    if isinstance(expr, SocialPred):
        return behaviors.animals_social_events(
            d,
            [expr.relation],
            [str(expr.comparison)],
            bodyparts=list(expr.bodyparts),
            other_bodyparts=list(expr.other_bodyparts),
        )
    if isinstance(expr, StatePred):
        return behaviors.animals_state_events(d, expr.state, expr.comparison)
    if isinstance(expr, Ref):
        return registry.run(expr.name, d, objects)
    if isinstance(expr, Not):
        return negate_events(_eval_expr(expr.expr, d, objects, registry))
    if isinstance(expr, And):
        parts = [_eval_expr(item, d, objects, registry) for item in expr.items]
        return add_simultaneous_events(*_align_keys(parts))
    if isinstance(expr, Then):
        a = _eval_expr(expr.first, d, objects, registry)
        b = _eval_expr(expr.second, d, objects, registry)
        a, b = _align_keys([a, b])
        return add_sequential_events(a, b, expr.max_gap)
    raise TypeError(f"not an expression: {expr!r}")


# --- memory symbol scanning ---------------------------------------------------

_WRITE_RE = re.compile(r"<\|([^<>|]+)\|>")
_READ_RE = re.compile(r"<([^<>|]+)>")


def scan_symbols(text: str, known=()) -> tuple[list[str], list[str]]:
    """Extract memory symbols from an utterance.

    Writes are names inside <|...|>. Reads are names inside <...> that match
    an already-known symbol exactly, so comparison text like "<40" can never
    trigger a read. Both lists preserve first-appearance order.
    """
    known = set(known)
    writes = []
    for m in _WRITE_RE.finditer(text):
        name = m.group(1).strip()
        if name and name not in writes:
            writes.append(name)
    stripped = _WRITE_RE.sub(" ", text)
    reads = []
    for m in _READ_RE.finditer(stripped):
        name = m.group(1).strip()
        if name in known and name not in reads:
            reads.append(name)
    return writes, reads


def scan_unknown_reads(text: str, known=()) -> list[str]:
    """Bracketed spans that are not known symbols (reported as warnings)."""
    known = set(known)
    stripped = _WRITE_RE.sub(" ", text)
    out = []
    for m in _READ_RE.finditer(stripped):
        name = m.group(1).strip()
        if name and name not in known and name not in out:
            out.append(name)
    return out
