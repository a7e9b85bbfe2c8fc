from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError

PUNCTUATION = ("->", "=", "(", ")", "[", "]", "{", "}", ",", ";")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "float" | "string" | punctuation text | "eof"
    text: str
    line: int
    column: int

    @property
    def value(self):
        if self.kind == "int":
            return int(self.text)
        if self.kind == "float":
            return float(self.text)
        if self.kind == "string":
            return self.text[1:-1]
        return self.text


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<float>-?\d+\.\d*(?:[eE][-+]?\d+)?|-?\d+[eE][-+]?\d+)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'[^'\n]*')
  | (?P<punct>->|[=()\[\]{},;])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens, dropping whitespace and ``#`` comments.

    The returned list always ends with an ``eof`` token.
    """
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        column = pos - line_start + 1
        if m is None:
            if source[pos] == "'":
                raise LexError("unterminated string literal", line, column)
            raise LexError(f"unexpected character {source[pos]!r}", line, column)
        kind = m.lastgroup
        text = m.group()
        if kind == "punct":
            tokens.append(Token(text, text, line, column))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, column))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens
