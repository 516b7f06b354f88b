"""Recursive-descent parser for ``.tm`` model files.

Grammar (paths are absolute, comments run from ``#`` to end of line)::

    model   := "model" STRING "{" item* "}"
    item    := machine | flow | trigger
    machine := "machine" IDENT "{" (state | stage | machine | flow)* "}"
    state   := "state" ("counter" IDENT "=" INT
                       | "table" IDENT ("=" record_list)?
                       | "rules" IDENT "=" record_list)
    stage   := "stage" KIND IDENT block?
    block   := "{" (action | branch)* "}"
    branch  := ("when" expr | "else") "->" path ("do" action_list)?
    flow    := "flow" path "->" path
    trigger := "trigger" path "->" path ("when" expr)? ("emit" IDENT record)?

Parsing happens in two passes. The first builds the model and records the
source span of every name and expression; the second reports duplicate
names, reserved words and type errors against those spans.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..model.errors import ParseError
from ..model.expr import (
    ORDERINGS,
    Action,
    AttrRef,
    BoolOp,
    Compare,
    Drop,
    Expr,
    HasAttr,
    Incr,
    Insert,
    Literal,
    Log,
    Member,
    NoOp,
    Not,
    Record,
    SetAttr,
    StoreRead,
    ThingTemplate,
)
from ..model.paths import StagePath
from ..model.types import (
    Branch,
    FlowArc,
    Machine,
    Model,
    Row,
    Stage,
    StageKind,
    StateDecl,
    StateKind,
    TriggerArc,
)
from .diagnostics import ParseDiagnostic, SourceSpan
from .lexer import CMP_TOKENS, T, Token, tokenize

logger = logging.getLogger(__name__)

MAX_DEPTH = 64

RESERVED = frozenset({"and", "or", "not", "in", "has", "true", "false", "thing"})
STAGE_KINDS = {k.value: k for k in StageKind}
STATE_KINDS = {k.value: k for k in StateKind}
ACTION_WORDS = ("incr", "insert", "set", "drop", "log", "noop")


class _Abort(Exception):
    def __init__(self, diagnostic: ParseDiagnostic):
        self.diagnostic = diagnostic


class Parser:
    """Single-use parser over a token list."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.depth = 0
        self.spans: Dict[int, SourceSpan] = {}
        # objects must stay alive for the id() keys above to remain unique
        self._keep: List[object] = []

    # -- token helpers -------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind is not T.EOF:
            self.pos += 1
        return token

    def error(self, message: str, token: Optional[Token] = None, expected: Sequence[str] = ()):
        token = token or self.tok
        raise _Abort(ParseDiagnostic(message, token.span, tuple(expected)))

    def expect(self, kind: T) -> Token:
        if self.tok.kind is not kind:
            self.error(f"expected {kind.value}, found {self.tok.describe()}", expected=[kind.value])
        return self.advance()

    def at_word(self, *words: str) -> bool:
        return self.tok.kind is T.IDENT and self.tok.value in words

    def expect_word(self, word: str) -> Token:
        if not self.at_word(word):
            self.error(f"expected `{word}`, found {self.tok.describe()}", expected=[f"`{word}`"])
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind is not T.IDENT:
            self.error(f"expected {what}, found {self.tok.describe()}", expected=[T.IDENT.value])
        return self.advance()

    def mark(self, obj, span: SourceSpan):
        self.spans[id(obj)] = span
        self._keep.append(obj)
        return obj

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.error(f"nesting deeper than {MAX_DEPTH} levels")

    def leave(self):
        self.depth -= 1

    # -- declarations --------------------------------------------------

    def parse_model(self) -> Model:
        self.expect_word("model")
        name = self.expect(T.STRING)
        self.expect(T.LBRACE)
        model = Model(name=str(name.value))
        while self.tok.kind is not T.RBRACE:
            if self.at_word("machine"):
                model.machines.append(self.parse_machine(model))
            elif self.at_word("flow"):
                model.flows.append(self.parse_flow())
            elif self.at_word("trigger"):
                model.triggers.append(self.parse_trigger())
            elif self.tok.kind is T.IDENT:
                self.error(
                    f"unknown keyword `{self.tok.value}`",
                    expected=["`machine`", "`flow`", "`trigger`", "'}'"],
                )
            else:
                self.error(
                    f"expected a declaration, found {self.tok.describe()}",
                    expected=["`machine`", "`flow`", "`trigger`", "'}'"],
                )
        self.expect(T.RBRACE)
        if self.tok.kind is not T.EOF:
            self.error(f"unexpected {self.tok.describe()} after the model", expected=[T.EOF.value])
        return model

    def parse_machine(self, model: Model) -> Machine:
        self.enter()
        self.expect_word("machine")
        name = self.ident("machine name")
        machine = self.mark(Machine(name=str(name.value)), name.span)
        self.expect(T.LBRACE)
        while self.tok.kind is not T.RBRACE:
            if self.at_word("state"):
                machine.state.append(self.parse_state())
            elif self.at_word("stage"):
                machine.stages.append(self.parse_stage())
            elif self.at_word("machine"):
                machine.submachines.append(self.parse_machine(model))
            elif self.at_word("flow"):
                model.flows.append(self.parse_flow())
            elif self.tok.kind is T.IDENT:
                self.error(
                    f"unknown keyword `{self.tok.value}`",
                    expected=["`state`", "`stage`", "`machine`", "`flow`", "'}'"],
                )
            else:
                self.error(
                    f"expected a machine member, found {self.tok.describe()}",
                    expected=["`state`", "`stage`", "`machine`", "`flow`", "'}'"],
                )
        self.expect(T.RBRACE)
        self.leave()
        return machine

    def parse_state(self) -> StateDecl:
        self.expect_word("state")
        kind_tok = self.ident("state kind")
        kind = STATE_KINDS.get(str(kind_tok.value))
        if kind is None:
            self.error(
                f"unknown state kind `{kind_tok.value}`",
                kind_tok,
                expected=[f"`{k}`" for k in STATE_KINDS],
            )
        name = self.ident("state name")
        if kind is StateKind.COUNTER:
            self.expect(T.EQ)
            value = self.expect(T.INT)
            decl = StateDecl(str(name.value), kind, value=int(value.value))
        elif kind is StateKind.TABLE:
            rows: Tuple[Row, ...] = ()
            if self.tok.kind is T.EQ:
                self.advance()
                rows = self.parse_rows()
            decl = StateDecl(str(name.value), kind, rows=rows)
        else:
            self.expect(T.EQ)
            decl = StateDecl(str(name.value), kind, rows=self.parse_rows())
        return self.mark(decl, name.span)

    def parse_rows(self) -> Tuple[Row, ...]:
        self.expect(T.LBRACKET)
        rows: List[Row] = []
        if self.tok.kind is not T.RBRACKET:
            while True:
                start = self.tok
                record = self.parse_record()
                fields = []
                for key, value in record.fields:
                    if not isinstance(value, Literal):
                        self.error("state rows may only hold literal values", start)
                    fields.append((key, value.value))
                rows.append(tuple(fields))
                if self.tok.kind is not T.COMMA:
                    break
                self.advance()
        self.expect(T.RBRACKET)
        return tuple(rows)

    def parse_stage(self) -> Stage:
        self.expect_word("stage")
        kind_tok = self.ident("stage kind")
        kind = STAGE_KINDS.get(str(kind_tok.value))
        if kind is None:
            self.error(
                f"unknown stage kind `{kind_tok.value}`",
                kind_tok,
                expected=[f"`{k}`" for k in STAGE_KINDS],
            )
        name = self.ident("stage name")
        stage = self.mark(Stage(name=str(name.value), kind=kind), name.span)
        if self.tok.kind is T.LBRACE:
            self.advance()
            while self.tok.kind is not T.RBRACE:
                if self.at_word("when", "else"):
                    stage.branches.append(self.parse_branch())
                elif self.at_word(*ACTION_WORDS):
                    stage.actions.append(self.parse_action())
                else:
                    self.error(
                        f"expected an action or branch, found {self.tok.describe()}",
                        expected=[f"`{w}`" for w in ("when", "else") + ACTION_WORDS] + ["'}'"],
                    )
            self.expect(T.RBRACE)
        return stage

    def parse_branch(self) -> Branch:
        guard: Optional[Expr] = None
        if self.at_word("when"):
            self.advance()
            guard = self.parse_expr()
        else:
            self.expect_word("else")
        self.expect(T.ARROW)
        target = self.parse_path()
        actions: Tuple[Action, ...] = ()
        if self.at_word("do"):
            self.advance()
            actions = self.parse_action_list()
        return Branch(guard, target, actions)

    def parse_flow(self) -> FlowArc:
        self.expect_word("flow")
        src = self.parse_path()
        self.expect(T.ARROW)
        dst = self.parse_path()
        return FlowArc(src, dst)

    def parse_trigger(self) -> TriggerArc:
        self.expect_word("trigger")
        src = self.parse_path()
        self.expect(T.ARROW)
        dst = self.parse_path()
        guard = None
        template = None
        if self.at_word("when"):
            self.advance()
            guard = self.parse_expr()
        if self.at_word("emit"):
            self.advance()
            type_tok = self.ident("thing type")
            record = self.parse_record()
            template = self.mark(ThingTemplate(str(type_tok.value), record.fields), type_tok.span)
        return TriggerArc(src, dst, guard, template)

    def parse_path(self) -> StagePath:
        segments = [str(self.ident("path").value)]
        while self.tok.kind is T.DOT:
            self.advance()
            segments.append(str(self.ident("path segment").value))
        return StagePath(tuple(segments))

    # -- actions -------------------------------------------------------

    def parse_action_list(self) -> Tuple[Action, ...]:
        actions = [self.parse_action()]
        while self.tok.kind is T.COMMA:
            self.advance()
            actions.append(self.parse_action())
        return tuple(actions)

    def parse_action(self) -> Action:
        word = self.tok
        if not self.at_word(*ACTION_WORDS):
            self.error(
                f"expected an action, found {word.describe()}",
                expected=[f"`{w}`" for w in ACTION_WORDS],
            )
        self.advance()
        if word.value == "incr":
            action: Action = Incr(str(self.ident("counter name").value))
        elif word.value == "insert":
            store = self.ident("table name")
            action = Insert(str(store.value), self.parse_record())
        elif word.value == "set":
            self.expect_word("thing")
            self.expect(T.DOT)
            attr = self.ident("attribute name")
            self.expect(T.EQ)
            action = SetAttr(str(attr.value), self.parse_expr())
        elif word.value == "drop":
            action = Drop()
        elif word.value == "log":
            action = Log(self.parse_expr())
        else:
            action = NoOp()
        return self.mark(action, word.span)

    # -- expressions ---------------------------------------------------

    def parse_expr(self) -> Expr:
        self.enter()
        start = self.tok
        args = [self.parse_and()]
        while self.at_word("or"):
            self.advance()
            args.append(self.parse_and())
        self.leave()
        if len(args) == 1:
            return args[0]
        return self.mark(BoolOp("or", tuple(args)), start.span)

    def parse_and(self) -> Expr:
        start = self.tok
        args = [self.parse_not()]
        while self.at_word("and"):
            self.advance()
            args.append(self.parse_not())
        if len(args) == 1:
            return args[0]
        return self.mark(BoolOp("and", tuple(args)), start.span)

    def parse_not(self) -> Expr:
        if self.at_word("not"):
            start = self.advance()
            self.enter()
            arg = self.parse_not()
            self.leave()
            return self.mark(Not(arg), start.span)
        return self.parse_compare()

    def parse_compare(self) -> Expr:
        start = self.tok
        left = self.parse_operand()
        if self.tok.kind in CMP_TOKENS:
            op = CMP_TOKENS[self.advance().kind]
            right = self.parse_operand()
            return self.mark(Compare(op, left, right), start.span)
        if self.at_word("in"):
            self.advance()
            store = self.ident("table or rules name")
            return self.mark(Member(left, str(store.value)), start.span)
        return left

    def parse_operand(self) -> Expr:
        tok = self.tok
        if tok.kind is T.STRING:
            self.advance()
            return self.mark(Literal(str(tok.value)), tok.span)
        if tok.kind is T.INT:
            self.advance()
            return self.mark(Literal(int(tok.value)), tok.span)
        if tok.kind is T.LPAREN:
            self.advance()
            inner = self.parse_expr()
            self.expect(T.RPAREN)
            return inner
        if tok.kind is T.LBRACE:
            return self.parse_record()
        if tok.kind is T.IDENT:
            word = tok.value
            if word in ("true", "false"):
                self.advance()
                return self.mark(Literal(word == "true"), tok.span)
            if word == "thing":
                self.advance()
                self.expect(T.DOT)
                attr = self.ident("attribute name")
                return self.mark(AttrRef(str(attr.value)), tok.span)
            if word == "has":
                self.advance()
                self.expect_word("thing")
                self.expect(T.DOT)
                attr = self.ident("attribute name")
                return self.mark(HasAttr(str(attr.value)), tok.span)
            if word in RESERVED:
                self.error(f"unexpected `{word}` in expression")
            self.advance()
            return self.mark(StoreRead(str(word)), tok.span)
        self.error(
            f"expected an expression, found {tok.describe()}",
            expected=[T.STRING.value, T.INT.value, "`true`", "`false`", "`thing`", "`has`", T.IDENT.value, "'('", "'{'"],
        )

    def parse_record(self) -> Record:
        start = self.expect(T.LBRACE)
        self.enter()
        fields: List[Tuple[str, Expr]] = []
        if self.tok.kind is not T.RBRACE:
            while True:
                key = self.ident("field name")
                self.expect(T.COLON)
                fields.append((str(key.value), self.parse_expr()))
                if self.tok.kind is not T.COMMA:
                    break
                self.advance()
        self.expect(T.RBRACE)
        self.leave()
        return self.mark(Record(tuple(fields)), start.span)


class _Checker:
    """Second pass: names and types."""

    def __init__(self, model: Model, spans: Dict[int, SourceSpan]):
        self.model = model
        self.spans = spans
        self.diagnostics: List[ParseDiagnostic] = []

    def span(self, obj) -> SourceSpan:
        return self.spans.get(id(obj), SourceSpan(1, 1, 0))

    def report(self, message: str, obj):
        self.diagnostics.append(ParseDiagnostic(message, self.span(obj)))

    def run(self) -> List[ParseDiagnostic]:
        self.check_names(self.model.machines, "machine", "top level")
        for segs, machine in self.model.iter_machines():
            where = ".".join(segs)
            self.check_names(machine.submachines, "machine", where)
            self.check_names(machine.stages, "stage", where)
            self.check_names(machine.state, "state", where)
            for stage in machine.stages:
                for action in stage.actions:
                    self.check_action(action)
                for branch in stage.branches:
                    if branch.guard is not None:
                        self.check_guard(branch.guard)
                    for action in branch.actions:
                        self.check_action(action)
        for trigger in self.model.triggers:
            if trigger.guard is not None:
                self.check_guard(trigger.guard)
            if trigger.template is not None:
                self.check_fields(trigger.template.attrs, trigger.template)
                for _, value in trigger.template.attrs:
                    if self.infer(value) == "record":
                        self.report("thing attributes cannot hold records", value)
        self.diagnostics.sort(key=lambda d: (d.span.line, d.span.column))
        return self.diagnostics

    def check_names(self, items, what: str, where: str):
        seen = set()
        for item in items:
            if item.name in RESERVED:
                self.report(f"`{item.name}` is a reserved word and cannot name a {what}", item)
            if item.name in seen:
                self.report(f"duplicate {what} name `{item.name}` in {where}", item)
            seen.add(item.name)

    def check_fields(self, fields, owner):
        seen = set()
        for key, _ in fields:
            if key in seen:
                self.report(f"duplicate field `{key}`", owner)
            seen.add(key)

    def check_guard(self, expr: Expr):
        kind = self.infer(expr)
        if kind not in ("bool", "any"):
            self.report(f"guard must be boolean, found {kind}", expr)

    def check_action(self, action: Action):
        if isinstance(action, Insert):
            self.infer(action.record)
        elif isinstance(action, SetAttr):
            if self.infer(action.value) == "record":
                self.report("thing attributes cannot hold records", action)
        elif isinstance(action, Log):
            if self.infer(action.message) == "record":
                self.report("log message cannot be a record", action)

    def infer(self, expr: Expr) -> str:
        if isinstance(expr, Literal):
            if isinstance(expr.value, bool):
                return "bool"
            return "int" if isinstance(expr.value, int) else "str"
        if isinstance(expr, AttrRef):
            return "any"
        if isinstance(expr, HasAttr):
            return "bool"
        if isinstance(expr, StoreRead):
            return "int"
        if isinstance(expr, Record):
            self.check_fields(expr.fields, expr)
            for _, value in expr.fields:
                if self.infer(value) == "record":
                    self.report("records cannot nest", value)
            return "record"
        if isinstance(expr, Member):
            if self.infer(expr.record) not in ("record", "any"):
                self.report("left side of `in` must be a record", expr)
            return "bool"
        if isinstance(expr, Compare):
            left, right = self.infer(expr.left), self.infer(expr.right)
            if "record" in (left, right):
                self.report("records cannot be compared", expr)
            elif expr.op in ORDERINGS:
                if any(k not in ("int", "any") for k in (left, right)):
                    self.report(f"`{expr.op}` needs integer operands", expr)
            elif "any" not in (left, right) and left != right:
                self.report(f"cannot compare {left} with {right}", expr)
            return "bool"
        if isinstance(expr, BoolOp):
            for arg in expr.args:
                kind = self.infer(arg)
                if kind not in ("bool", "any"):
                    self.report(f"`{expr.op}` needs boolean operands, found {kind}", arg)
            return "bool"
        if isinstance(expr, Not):
            kind = self.infer(expr.arg)
            if kind not in ("bool", "any"):
                self.report(f"`not` needs a boolean operand, found {kind}", expr)
            return "bool"
        return "any"


def parse(text: str) -> Model:
    """Parse ``.tm`` source into a Model.

    Declaration order in the model equals textual order.

    Raises:
        ParseError: with one diagnostic for a syntax error, or every name and
            type diagnostic found by the second pass
    """
    try:
        parser = Parser(text)
        model = parser.parse_model()
    except _Abort as abort:
        raise ParseError([abort.diagnostic])
    diagnostics = _Checker(model, parser.spans).run()
    if diagnostics:
        raise ParseError(diagnostics)
    logger.debug(f"Parsed model {model.name!r}: {len(model.flows)} flows, {len(model.triggers)} triggers")
    return model


def parse_file(path: Union[str, Path]) -> Model:
    return parse(Path(path).read_text(encoding="utf-8"))
