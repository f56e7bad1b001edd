"""
Spec Lexer
==========
Turns spec-file text into tokens. Never raises: characters that cannot
start a token are reported as diagnostics and skipped.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .diagnostics import Diagnostic, error


class TokenKind(str, Enum):
    IDENT = "identifier"
    NUMBER = "number"
    STRING = "string"
    LBRACE = "'{'"
    RBRACE = "'}'"
    LBRACKET = "'['"
    RBRACKET = "']'"
    COLON = "':'"
    COMMA = "','"
    SEMICOLON = "';'"
    EOF = "end of file"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    value: Union[float, complex, str, None]
    line: int
    column: int


_UNSIGNED = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"[+-]?{_UNSIGNED}[+-]{_UNSIGNED}j")
_IMAGINARY_RE = re.compile(rf"[+-]?{_UNSIGNED}j")
_REAL_RE = re.compile(rf"[+-]?{_UNSIGNED}")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")

_PUNCTUATION = {
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    ":": TokenKind.COLON,
    ",": TokenKind.COMMA,
    ";": TokenKind.SEMICOLON,
}


def tokenize(source: str) -> tuple[list[Token], list[Diagnostic]]:
    """
    Split source text into tokens.

    Args:
        source: Spec text

    Returns:
        (tokens ending with an EOF token, lexical diagnostics)
    """
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    pos = 0
    line = 1
    line_start = 0
    length = len(source)

    while pos < length:
        ch = source[pos]
        column = pos - line_start + 1

        if ch == "\n":
            pos += 1
            line += 1
            line_start = pos
            continue
        if ch in " \t\r\f\v":
            pos += 1
            continue
        if ch == "#":
            end = source.find("\n", pos)
            pos = length if end < 0 else end
            continue
        if ch in _PUNCTUATION:
            tokens.append(Token(_PUNCTUATION[ch], ch, None, line, column))
            pos += 1
            continue
        if ch == '"':
            pos = _read_string(source, pos, line, column, tokens, diagnostics)
            continue

        number = _COMPLEX_RE.match(source, pos) or _IMAGINARY_RE.match(source, pos) or _REAL_RE.match(source, pos)
        if number:
            text = number.group(0)
            value = complex(text) if text.endswith("j") else float(text)
            tokens.append(Token(TokenKind.NUMBER, text, value, line, column))
            pos = number.end()
            continue

        ident = _IDENT_RE.match(source, pos)
        if ident:
            text = ident.group(0)
            tokens.append(Token(TokenKind.IDENT, text, text, line, column))
            pos = ident.end()
            continue

        diagnostics.append(error(line, column, f"unexpected character {ch!r}"))
        pos += 1

    tokens.append(Token(TokenKind.EOF, "", None, line, length - line_start + 1))
    return tokens, diagnostics


def _read_string(source, pos, line, column, tokens, diagnostics) -> int:
    # Strings stay on one line; \" and \\ are the only escapes
    chars = []
    i = pos + 1
    while i < len(source):
        ch = source[i]
        if ch == "\n":
            break
        if ch == "\\" and i + 1 < len(source) and source[i + 1] in '"\\':
            chars.append(source[i + 1])
            i += 2
            continue
        if ch == '"':
            text = "".join(chars)
            tokens.append(Token(TokenKind.STRING, source[pos:i + 1], text, line, column))
            return i + 1
        chars.append(ch)
        i += 1
    diagnostics.append(error(line, column, "unterminated string"))
    return i
