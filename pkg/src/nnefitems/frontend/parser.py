"""Recursive-descent parser for the NNEF subset and its multi-item extension.

Grammar::

    program      := "graph" id "(" idlist ")" "->" "(" idlist ")"
                    [graphitem] "{" {instruction} "}"
    graphitem    := "graphitem" id id "(" idlist ")" "->" "(" idlist ")"
    instruction  := id "=" id "(" arglist ")" ";"
    arg          := [id "="] value
    value        := id | number | string | "[" [value {"," value}] "]"
                  | "(" number "," number ")"
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..errors import ArityError, DuplicateWriterError, ParseError
from .lexer import Token, tokenize
from .program import (
    SIGNATURES,
    SYNC_OPS,
    Instruction,
    ItemProgram,
    ItemRef,
    Kind,
    NnefProgram,
    SyncRef,
    VarRef,
)


@dataclass(frozen=True)
class _Ident:
    name: str


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        if not tokens or tokens[-1].kind != "eof":
            tokens = list(tokens) + [Token("eof", "", 0, 0)]
        self._tokens = tokens
        self._pos = 0

    # -- token helpers ------------------------------------------------------

    def _peek(self, offset: int = 0) -> Token:
        return self._tokens[min(self._pos + offset, len(self._tokens) - 1)]

    def _advance(self) -> Token:
        tok = self._peek()
        self._pos += 1
        return tok

    def _error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self._peek()
        return ParseError(message, tok.line, tok.column)

    def _expect(self, kind: str, text: str | None = None) -> Token:
        tok = self._peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            wanted = text or kind
            found = tok.text or tok.kind
            raise self._error(f"expected {wanted!r}, found {found!r}")
        return self._advance()

    def _at(self, kind: str, text: str | None = None) -> bool:
        tok = self._peek()
        return tok.kind == kind and (text is None or tok.text == text)

    # -- structure ----------------------------------------------------------

    def _idlist(self) -> tuple[str, ...]:
        self._expect("(")
        names: list[str] = []
        if not self._at(")"):
            names.append(self._expect("ident").text)
            while self._at(","):
                self._advance()
                names.append(self._expect("ident").text)
        self._expect(")")
        return tuple(names)

    def header(self) -> tuple[str, tuple[str, ...], tuple[str, ...]]:
        self._expect("ident", "graph")
        name = self._expect("ident").text
        inputs = self._idlist()
        self._expect("->")
        outputs = self._idlist()
        return name, inputs, outputs

    def item_header(self) -> tuple[str, str, tuple[str, ...], tuple[str, ...]] | None:
        if not self._at("ident", "graphitem"):
            return None
        self._advance()
        item_id = self._expect("ident").text
        node = self._expect("ident").text
        inputs = self._idlist()
        self._expect("->")
        outputs = self._idlist()
        return item_id, node, inputs, outputs

    def body(self) -> list[Instruction]:
        self._expect("{")
        body: list[Instruction] = []
        while not self._at("}"):
            if self._at("eof"):
                raise self._error("unexpected end of input inside graph body")
            body.append(self.instruction())
        self._expect("}")
        self._expect("eof")
        return body

    def instruction(self) -> Instruction:
        result = self._expect("ident").text
        self._expect("=")
        op_tok = self._expect("ident")
        op = op_tok.text
        if op not in SIGNATURES:
            raise self._error(f"unknown operation {op!r}", op_tok)
        self._expect("(")
        positional: list[tuple[Any, Token]] = []
        named: dict[str, tuple[Any, Token]] = {}
        if not self._at(")"):
            while True:
                tok = self._peek()
                if tok.kind == "ident" and self._peek(1).kind == "=":
                    self._advance()
                    self._advance()
                    if tok.text in named:
                        raise ArityError(f"{op}: parameter {tok.text!r} given twice", tok.line, tok.column)
                    named[tok.text] = (self.value(), tok)
                else:
                    if named:
                        raise self._error(f"{op}: positional argument after named argument")
                    positional.append((self.value(), tok))
                if not self._at(","):
                    break
                self._advance()
        self._expect(")")
        self._expect(";")
        return Instruction(result, op, _bind(op, positional, named, op_tok))

    def value(self) -> Any:
        tok = self._peek()
        if tok.kind == "ident":
            self._advance()
            return _Ident(tok.text)
        if tok.kind in ("int", "float", "string"):
            self._advance()
            return tok.value
        if tok.kind == "[":
            self._advance()
            items: list[Any] = []
            if not self._at("]"):
                items.append(self.value())
                while self._at(","):
                    self._advance()
                    items.append(self.value())
            self._expect("]")
            return items
        if tok.kind == "(":
            self._advance()
            first = self._expect("int").value
            self._expect(",")
            second = self._expect("int").value
            self._expect(")")
            return (first, second)
        raise self._error(f"unexpected token {tok.text or tok.kind!r} in argument")


def _bind(
    op: str,
    positional: list[tuple[Any, Token]],
    named: dict[str, tuple[Any, Token]],
    op_tok: Token,
) -> tuple[tuple[str, Any], ...]:
    signature = SIGNATURES[op]
    names = [name for name, _ in signature]
    if len(positional) > len(signature):
        raise ArityError(f"{op}: too many arguments", op_tok.line, op_tok.column)
    bound: dict[str, tuple[Any, Token]] = {}
    for (value, tok), name in zip(positional, names):
        bound[name] = (value, tok)
    for name, entry in named.items():
        if name not in names:
            raise ArityError(f"{op}: unknown parameter {name!r}", entry[1].line, entry[1].column)
        if name in bound:
            raise ArityError(f"{op}: parameter {name!r} given twice", entry[1].line, entry[1].column)
        bound[name] = entry
    missing = [n for n in names if n not in bound]
    if missing:
        raise ArityError(f"{op}: missing parameter(s) {', '.join(missing)}", op_tok.line, op_tok.column)
    return tuple((name, _coerce(op, name, kind, *bound[name])) for name, kind in signature)


def _coerce(op: str, name: str, kind: Kind, raw: Any, tok: Token) -> Any:
    def bad() -> ParseError:
        return ParseError(f"{op}: parameter {name!r} expects {kind.value}", tok.line, tok.column)

    if kind in (Kind.VAR, Kind.ITEM, Kind.SYNC):
        if not isinstance(raw, _Ident):
            raise bad()
        return {Kind.VAR: VarRef, Kind.ITEM: ItemRef, Kind.SYNC: SyncRef}[kind](raw.name)
    if kind is Kind.INT:
        if type(raw) is not int:
            raise bad()
        return raw
    if kind is Kind.STR:
        if not isinstance(raw, str):
            raise bad()
        return raw
    if not isinstance(raw, list):
        raise bad()
    if kind is Kind.INTS:
        if not all(type(v) is int for v in raw):
            raise bad()
        return tuple(raw)
    if kind is Kind.PADS:
        if not all(isinstance(v, tuple) for v in raw):
            raise bad()
        return tuple(raw)
    if kind in (Kind.VARS, Kind.ITEMS):
        if not all(isinstance(v, _Ident) for v in raw):
            raise bad()
        ref = VarRef if kind is Kind.VARS else ItemRef
        return tuple(ref(v.name) for v in raw)
    raise AssertionError(kind)


def parse_program(tokens: list[Token]) -> NnefProgram:
    """Parse a single-item model description."""
    p = _Parser(tokens)
    name, inputs, outputs = p.header()
    if p._at("ident", "graphitem"):
        raise p._error("unexpected graphitem header; use parse_item_program")
    body = p.body()
    for inst in body:
        if inst.op in SYNC_OPS:
            raise ParseError(f"{inst.op} is only allowed inside a graphitem description")
    return NnefProgram(name, inputs, outputs, tuple(body))


def parse_item_program(tokens: list[Token]) -> ItemProgram:
    """Parse one item's description (graph header followed by a graphitem header)."""
    p = _Parser(tokens)
    name, inputs, outputs = p.header()
    item = p.item_header()
    if item is None:
        raise p._error("expected 'graphitem' header")
    item_id, node, item_inputs, item_outputs = item
    body = p.body()
    written: set[str] = set()
    for inst in body:
        if inst.op == "send_var":
            if inst.result in written:
                raise DuplicateWriterError(
                    f"item {item_id}: variablesync {inst.result!r} written by more than one send_var"
                )
            written.add(inst.result)
    return ItemProgram(
        graph_name=name,
        inputs=item_inputs,
        outputs=item_outputs,
        instructions=tuple(body),
        item_id=item_id,
        node_name=node,
        graph_inputs=inputs,
        graph_outputs=outputs,
    )


def parse(source: str) -> NnefProgram | ItemProgram:
    """Parse text, returning an ItemProgram when a graphitem header is present."""
    tokens = tokenize(source)
    probe = _Parser(tokens)
    probe.header()
    if probe._at("ident", "graphitem"):
        return parse_item_program(tokens)
    return parse_program(tokens)
