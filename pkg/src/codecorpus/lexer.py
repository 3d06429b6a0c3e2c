"""Lexer for the supported Java-like subset, plus token-string encodings.

Token kinds: keyword, identifier, int_literal, string_literal, char_literal,
bool_literal, null_literal, operator, separator. Comments and whitespace are
consumed and never appear in the token stream (raw text keeps them; token
representations do not). Annotations are not special here: `@Override` lexes
as a separator `@` followed by an identifier.

Number literals are plain decimal digit runs; float/hex forms are outside the
subset. Generic angle brackets lex as ordinary `<` / `>` operators and are
dealt with by the parser.

Two flat token-string encodings live here as well:

* TKNA: lexemes joined by single spaces. Not invertible when a string
  literal itself contains a space; callers that need exact token recovery
  should use TKNB.
* TKNB: lexemes joined by commas. Commas inside literal lexemes are replaced
  by <LITCOMMA>; the comma separator token is emitted quoted as `","` so the
  payload splits on unquoted commas into exactly one item per token.
"""

import re
from dataclasses import dataclass

from .errors import LexError

KIND_KEYWORD = "keyword"
KIND_IDENTIFIER = "identifier"
KIND_INT = "int_literal"
KIND_STRING = "string_literal"
KIND_CHAR = "char_literal"
KIND_BOOL = "bool_literal"
KIND_NULL = "null_literal"
KIND_OPERATOR = "operator"
KIND_SEPARATOR = "separator"

TOKEN_KINDS = frozenset({
    KIND_KEYWORD, KIND_IDENTIFIER, KIND_INT, KIND_STRING, KIND_CHAR,
    KIND_BOOL, KIND_NULL, KIND_OPERATOR, KIND_SEPARATOR,
})

LITERAL_KINDS = frozenset({KIND_INT, KIND_STRING, KIND_CHAR, KIND_BOOL, KIND_NULL})

KEYWORDS = frozenset("""
    abstract boolean byte char class double else extends final float for if
    implements import int interface long new package private protected public
    return short static super this void while
""".split())

LITCOMMA = "<LITCOMMA>"


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    line: int  # 1-based
    col: int   # 1-based, in characters


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<line_comment>//[^\n]*)
    | (?P<block_comment>/\*.*?\*/)
    | (?P<string>"(?:\\.|[^"\\\n])*")
    | (?P<char>'(?:\\.|[^'\\\n])')
    | (?P<number>[0-9]+)
    | (?P<word>[A-Za-z_$][A-Za-z0-9_$]*)
    | (?P<op>&&|\|\||\+\+|--|<=|>=|==|!=|\+=|-=|\*=|/=|%=|[=<>!?:+\-*/%&|^~])
    | (?P<sep>[(){}\[\];,.@])
    """,
    re.VERBOSE | re.DOTALL,
)

_WORD_KINDS = {"true": KIND_BOOL, "false": KIND_BOOL, "null": KIND_NULL}

_GROUP_KINDS = {
    "string": KIND_STRING,
    "char": KIND_CHAR,
    "number": KIND_INT,
    "op": KIND_OPERATOR,
    "sep": KIND_SEPARATOR,
}


def lex(source: str) -> list[Token]:
    """Tokenize source text; raises LexError with position on illegal input."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    col = 1
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            ch = source[pos]
            if ch == '"':
                raise LexError("unterminated string literal", line, col)
            if ch == "'":
                raise LexError("unterminated or malformed char literal", line, col)
            if source.startswith("/*", pos):
                raise LexError("unterminated block comment", line, col)
            raise LexError(f"illegal character {ch!r}", line, col)
        if source.startswith("/*", pos) and m.lastgroup != "block_comment":
            raise LexError("unterminated block comment", line, col)
        text = m.group()
        group = m.lastgroup
        if group == "word":
            if text in _WORD_KINDS:
                kind = _WORD_KINDS[text]
            elif text in KEYWORDS:
                kind = KIND_KEYWORD
            else:
                kind = KIND_IDENTIFIER
            tokens.append(Token(kind, text, line, col))
        elif group in _GROUP_KINDS:
            tokens.append(Token(_GROUP_KINDS[group], text, line, col))
        # ws and comments fall through: position bookkeeping only
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    return tokens


# ---------------------------------------------------------------------------
# Token-string encodings
# ---------------------------------------------------------------------------

def tkna_text(tokens: list[Token]) -> str:
    """Space-joined lexemes. Lossy when literals contain spaces."""
    return " ".join(t.lexeme for t in tokens)


def tknb_text(tokens: list[Token]) -> str:
    """Comma-joined lexemes with comma-safety: `f(a,b)` -> `f,(,a,",",b,)`."""
    items = []
    for t in tokens:
        lx = t.lexeme
        if t.kind in LITERAL_KINDS and "," in lx:
            lx = lx.replace(",", LITCOMMA)
        elif t.kind == KIND_SEPARATOR and lx == ",":
            lx = '","'
        items.append(lx)
    return ",".join(items)


def tknb_split(payload: str) -> list[str]:
    """Split a TKNB payload on unquoted commas.

    Quote state tracks both double and single quotes with backslash escapes,
    so literal lexemes (which keep their own quote characters) never leak a
    split point. Yields exactly one item per original token.
    """
    if not payload:
        return []
    items: list[str] = []
    buf: list[str] = []
    in_dq = False
    in_sq = False
    escape = False
    for ch in payload:
        if escape:
            buf.append(ch)
            escape = False
            continue
        if (in_dq or in_sq) and ch == "\\":
            buf.append(ch)
            escape = True
            continue
        if ch == '"' and not in_sq:
            in_dq = not in_dq
            buf.append(ch)
            continue
        if ch == "'" and not in_dq:
            in_sq = not in_sq
            buf.append(ch)
            continue
        if ch == "," and not in_dq and not in_sq:
            items.append("".join(buf))
            buf = []
            continue
        buf.append(ch)
    items.append("".join(buf))
    return items


def tknb_decode(payload: str) -> list[str]:
    """Recover the original lexeme list from a TKNB payload."""
    out = []
    for item in tknb_split(payload):
        if item == '","':
            out.append(",")
        else:
            out.append(item.replace(LITCOMMA, ","))
    return out
