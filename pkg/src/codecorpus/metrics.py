"""Per-method source metrics.

Size and shape metrics come straight off the token stream and the method
subtree:

* TLOC  total lines, end - start + 1
* SLOC  lines carrying at least one lexical token
* CMPX  1 + decision points (if, while, for, &&, ||, ternary)
* MXIN  max depth of nested blocks below the method body (body = 0)
* NPTH  Nejmeh-style path recurrence, see npath() below
* NMTK  token count; NMPR parameter count; NUID distinct identifiers
* NMOP  operator tokens; NMLT literal tokens; NMRT return statements
* NAME  the method's simple name (text-valued)

NPTH follows the classical recurrence: a statement sequence multiplies, an
`if` contributes NP(then) + 1 + sc(cond), if/else NP(then) + NP(else) +
sc(cond), while/for NP(body) + 1 + sc(cond), anything else 1, where sc
counts `&&`/`||` inside the condition. Ternaries raise CMPX but not NPTH
(a deliberate deviation from PMD's NPATH, which recurses into expressions).
"""

from .lexer import (
    KIND_IDENTIFIER, KIND_OPERATOR, KIND_SEPARATOR, KIND_KEYWORD,
    LITERAL_KINDS, lex,
)
from .parser import (
    Ast, MethodSource, NT_BLOCK, NT_FOR, NT_IF, NT_RETURN, NT_WHILE,
    for_parts, if_parts, while_parts,
)

DECISION_KEYWORDS = ("if", "while", "for")

_STMT_TYPES = frozenset({NT_IF, NT_WHILE, NT_FOR})


def _method_body(ast: Ast) -> int | None:
    """Index of the method's body block, or None for abstract declarations."""
    for c in ast.children[0]:
        if ast.node_types[c] == NT_BLOCK:
            return c
    return None


def cmpx(ast: Ast) -> int:
    """Cyclomatic complexity: 1 + branching keywords + short-circuit ops + ?:."""
    count = 1
    for i in ast.terminals():
        tok = ast.token(i)
        if tok.kind == KIND_KEYWORD and tok.lexeme in DECISION_KEYWORDS:
            count += 1
        elif tok.kind == KIND_OPERATOR and tok.lexeme in ("&&", "||", "?"):
            count += 1
    return count


def mxin(ast: Ast) -> int:
    """Max block nesting below the method body; counts braces, not indentation."""
    body = _method_body(ast)
    if body is None:
        return 0
    best = 0
    stack = [(c, 0) for c in ast.nonterminal_children(body)]
    while stack:
        node, depth = stack.pop()
        here = depth + 1 if ast.node_types[node] == NT_BLOCK else depth
        best = max(best, here)
        for c in ast.nonterminal_children(node):
            stack.append((c, here))
    return best


def _short_circuits(ast: Ast, expr: int) -> int:
    return sum(1 for i in ast.terminals(expr)
               if ast.token(i).kind == KIND_OPERATOR
               and ast.lexeme(i) in ("&&", "||"))


def _npath_stmt(ast: Ast, stmt: int) -> int:
    nt = ast.node_types[stmt]
    if nt == NT_BLOCK:
        return _npath_seq(ast, stmt)
    if nt == NT_IF:
        cond, then, els = if_parts(ast, stmt)
        sc = _short_circuits(ast, cond)
        if els is None:
            return _npath_stmt(ast, then) + 1 + sc
        return _npath_stmt(ast, then) + _npath_stmt(ast, els) + sc
    if nt == NT_WHILE:
        cond, body = while_parts(ast, stmt)
        return _npath_stmt(ast, body) + 1 + _short_circuits(ast, cond)
    if nt == NT_FOR:
        _, cond, _, body = for_parts(ast, stmt)
        sc = _short_circuits(ast, cond) if cond is not None else 0
        return _npath_stmt(ast, body) + 1 + sc
    return 1


def _npath_seq(ast: Ast, block: int) -> int:
    product = 1
    for c in ast.nonterminal_children(block):
        product *= _npath_stmt(ast, c)
    return product


def npath(ast: Ast) -> int:
    body = _method_body(ast)
    return 1 if body is None else _npath_seq(ast, body)


def compute_metrics(method: MethodSource) -> dict[str, int | str]:
    """All metric properties for one method, keyed by property code."""
    tokens = lex(method.text)
    token_lines = {t.line for t in tokens}
    identifiers = {t.lexeme for t in tokens if t.kind == KIND_IDENTIFIER}
    ast = method.ast
    return {
        "TLOC": method.end_line - method.start_line + 1,
        "SLOC": len(token_lines),
        "CMPX": cmpx(ast),
        "MXIN": mxin(ast),
        "NPTH": npath(ast),
        "NMTK": len(tokens),
        "NMPR": len(method.param_types),
        "NUID": len(identifiers),
        "NMOP": sum(1 for t in tokens if t.kind == KIND_OPERATOR),
        "NMLT": sum(1 for t in tokens if t.kind in LITERAL_KINDS),
        "NMRT": len(ast.find(NT_RETURN)),
        "NAME": method.name,
    }


def token_census(method: MethodSource) -> dict[str, int]:
    """Token-kind partition; operators + literals + identifiers + structural
    tokens always total NMTK."""
    tokens = lex(method.text)
    return {
        "operators": sum(1 for t in tokens if t.kind == KIND_OPERATOR),
        "literals": sum(1 for t in tokens if t.kind in LITERAL_KINDS),
        "identifiers": sum(1 for t in tokens if t.kind == KIND_IDENTIFIER),
        "structural": sum(1 for t in tokens
                          if t.kind in (KIND_KEYWORD, KIND_SEPARATOR)),
        "total": len(tokens),
    }
