"""Tokenizer shared by both specification syntaxes.

Keywords are the fixed text fragments of a linguistic style; each frontend
passes its own keyword set. Words may contain internal hyphens (``Roll-up``,
``x-axis``) and apostrophes (``institution's``) so that those fragments and
prose descriptions lex as single tokens; a ``-`` with whitespace around it is
still punctuation, which keeps arithmetic expressions unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .diagnostics import Diagnostic, Span, error


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "ident"
    STRING = "string"
    NUMBER = "number"
    PUNCT = "punct"
    COMMENT = "comment"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: Span
    value: object = None  # decoded payload for STRING / NUMBER tokens

    def is_word(self) -> bool:
        return self.kind in (TokenKind.KEYWORD, TokenKind.IDENT)


PUNCT_CHARS = "()[]{},.:;=+-*/"


def _is_word_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(
    source: str,
    keywords: frozenset[str] = frozenset(),
    file: str = "<input>",
    code_prefix: str = "CNL",
    block_comments: bool = False,
    string_quotes: str = '"',
) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    i = 0
    line = 1
    line_start = 0
    n = len(source)

    def span(start: int, start_line: int, start_linestart: int, length: int) -> Span:
        return Span(file, start_line, start - start_linestart + 1, start, length)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            line_start = i
            continue
        if ch.isspace():
            i += 1
            continue

        start, start_line, start_ls = i, line, line_start

        # Line comment.
        if ch == "/" and source.startswith("//", i):
            end = source.find("\n", i)
            end = n if end == -1 else end
            text = source[i:end]
            tokens.append(Token(TokenKind.COMMENT, text, span(start, start_line, start_ls, end - i)))
            i = end
            continue

        # Block comment (ASL only).
        if block_comments and source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end == -1:
                diagnostics.append(
                    error(f"{code_prefix}003", "unterminated block comment", span(start, start_line, start_ls, n - i))
                )
                text = source[i:]
                i = n
            else:
                text = source[i : end + 2]
                i = end + 2
            line += text.count("\n")
            if "\n" in text:
                line_start = start + text.rfind("\n") + 1
            tokens.append(Token(TokenKind.COMMENT, text, span(start, start_line, start_ls, len(text))))
            continue

        # Quoted string.
        if ch in string_quotes:
            quote = ch
            j = i + 1
            buf: list[str] = []
            closed = False
            while j < n:
                c = source[j]
                if c == "\\" and j + 1 < n and source[j + 1] in (quote, "\\"):
                    buf.append(source[j + 1])
                    j += 2
                    continue
                if c == quote:
                    closed = True
                    j += 1
                    break
                if c == "\n":
                    break
                buf.append(c)
                j += 1
            if not closed:
                diagnostics.append(
                    error(f"{code_prefix}001", "unterminated string literal", span(start, start_line, start_ls, j - i))
                )
            tokens.append(
                Token(TokenKind.STRING, source[i:j], span(start, start_line, start_ls, j - i), "".join(buf))
            )
            i = j
            continue

        # Number.
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            is_float = False
            if j < n - 1 and source[j] == "." and source[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            text = source[i:j]
            value: object = float(text) if is_float else int(text)
            tokens.append(Token(TokenKind.NUMBER, text, span(start, start_line, start_ls, j - i), value))
            i = j
            continue

        # Word: identifier or keyword.
        if _is_word_start(ch):
            j = i + 1
            while j < n:
                c = source[j]
                if _is_word_char(c):
                    j += 1
                elif c in "-'" and j + 1 < n and _is_word_char(source[j + 1]):
                    j += 2
                else:
                    break
            text = source[i:j]
            kind = TokenKind.KEYWORD if text in keywords else TokenKind.IDENT
            tokens.append(Token(kind, text, span(start, start_line, start_ls, j - i)))
            i = j
            continue

        if ch in PUNCT_CHARS:
            tokens.append(Token(TokenKind.PUNCT, ch, span(start, start_line, start_ls, 1)))
            i += 1
            continue

        diagnostics.append(
            error(f"{code_prefix}002", f"invalid character {ch!r}", span(start, start_line, start_ls, 1))
        )
        i += 1

    eof_span = Span(file, line, n - line_start + 1, n, 0)
    tokens.append(Token(TokenKind.EOF, "", eof_span))
    return tokens, diagnostics


class Cursor:
    """Forward-only view over a token list; comments are skipped transparently."""

    def __init__(self, tokens: list[Token]):
        self._tokens = [t for t in tokens if t.kind is not TokenKind.COMMENT]
        self._all = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        idx = min(self.pos + ahead, len(self._tokens) - 1)
        return self._tokens[idx]

    def next(self) -> Token:
        tok = self._tokens[self.pos]
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def at_eof(self) -> bool:
        return self.peek().kind is TokenKind.EOF

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind is TokenKind.PUNCT and tok.text == text

    def at_word(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.is_word() and tok.text in texts

    def eat_punct(self, text: str) -> Token | None:
        if self.at_punct(text):
            return self.next()
        return None

    def eat_word(self, *texts: str) -> Token | None:
        if self.at_word(*texts):
            return self.next()
        return None
