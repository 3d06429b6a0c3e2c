"""Recursive-descent parser for the supported Java-like subset.

Supported shapes: one package declaration, imports (dotted, optional `.*`),
top-level classes and interfaces with extends/implements, fields, methods and
constructors with modifiers and annotations. Statements: local declaration
(single declarator), expression statement, if/else, while, classic for,
return, block. Expressions: literals, identifiers, field access, `this`,
`new T(...)`, method calls in the four receiver shapes (implicit, `this.m`,
`expr.m`, `Type.m`), binary/unary operators including `&&`/`||`, ternary
`?:`, compound assignment, `++`/`--`, parentheses.

Generic type arguments are consumed and attached as raw leaves under the
Type node ("erased": they contribute no structure and no signature text).
Lambdas, anonymous classes, arrays, try/catch and switch are outside the
subset and raise ParseError; the cataloger turns that into a per-file
diagnostic and skips the file.

The Ast is a flat preorder table: node i's children are exactly the nodes
whose parent is i, in index order. Because flattening is preorder, a
subtree occupies a contiguous index range and terminal leaves read off in
source order — the in-order leaf walk reproduces the token stream of the
parsed region exactly.
"""

from dataclasses import dataclass, field

from .errors import ParseError
from .lexer import (
    KIND_BOOL, KIND_CHAR, KIND_IDENTIFIER, KIND_INT, KIND_KEYWORD,
    KIND_NULL, KIND_OPERATOR, KIND_SEPARATOR, KIND_STRING, Token, lex,
)

# Nonterminal vocabulary. Terminal nodes use their token kind as node_type.
NT_COMPILATION_UNIT = "CompilationUnit"
NT_PACKAGE = "PackageDecl"
NT_IMPORT = "ImportDecl"
NT_CLASS = "ClassDecl"
NT_INTERFACE = "InterfaceDecl"
NT_ANNOTATION = "Annotation"
NT_FIELD = "FieldDecl"
NT_METHOD = "MethodDecl"
NT_CTOR = "ConstructorDecl"
NT_PARAM = "Param"
NT_TYPE = "Type"
NT_BLOCK = "Block"
NT_LOCAL = "LocalDecl"
NT_EXPR_STMT = "ExprStmt"
NT_IF = "IfStmt"
NT_WHILE = "WhileStmt"
NT_FOR = "ForStmt"
NT_FOR_INIT = "ForInit"
NT_FOR_UPDATE = "ForUpdate"
NT_RETURN = "ReturnStmt"
NT_ASSIGN = "Assign"
NT_TERNARY = "Ternary"
NT_BINARY = "Binary"
NT_UNARY = "Unary"
NT_POSTFIX = "PostfixOp"
NT_PAREN = "Paren"
NT_CALL = "Call"
NT_FIELD_ACCESS = "FieldAccess"
NT_NEW = "New"

MODIFIER_WORDS = frozenset({"public", "private", "protected", "static", "final", "abstract"})
PRIMITIVE_WORDS = frozenset({"boolean", "byte", "char", "double", "float", "int", "long", "short"})
STMT_KEYWORDS = frozenset({"if", "while", "for", "return"})


class _Node:
    """Mutable build-time tree node; flattened into Ast afterwards."""

    __slots__ = ("node_type", "token_index", "children")

    def __init__(self, node_type: str, token_index: int | None = None):
        self.node_type = node_type
        self.token_index = token_index
        self.children: list["_Node"] = []

    def add(self, child: "_Node") -> "_Node":
        self.children.append(child)
        return child


@dataclass
class Ast:
    """Flat preorder AST over a token list."""

    node_types: list[str]
    token_indices: list[int | None]
    parents: list[int]              # -1 at the root
    lines: list[int]
    cols: list[int]
    tokens: list[Token]
    children: list[list[int]] = field(default_factory=list)
    subtree_sizes: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.children:
            self.children = [[] for _ in self.node_types]
            for i, p in enumerate(self.parents):
                if p >= 0:
                    self.children[p].append(i)
        if not self.subtree_sizes:
            sizes = [1] * len(self.node_types)
            for i in range(len(self.node_types) - 1, 0, -1):
                sizes[self.parents[i]] += sizes[i]
            self.subtree_sizes = sizes

    def __len__(self) -> int:
        return len(self.node_types)

    def is_terminal(self, i: int) -> bool:
        return self.token_indices[i] is not None

    def token(self, i: int) -> Token:
        ti = self.token_indices[i]
        if ti is None:
            raise ParseError(f"node {i} ({self.node_types[i]}) is not a terminal")
        return self.tokens[ti]

    def lexeme(self, i: int) -> str:
        return self.token(i).lexeme

    def terminals(self, root: int = 0) -> list[int]:
        """Terminal node indices of a subtree, in source order."""
        end = root + self.subtree_sizes[root]
        return [i for i in range(root, end) if self.token_indices[i] is not None]

    def find(self, node_type: str, root: int = 0) -> list[int]:
        """Preorder indices of nodes with the given type inside a subtree."""
        end = root + self.subtree_sizes[root]
        return [i for i in range(root, end) if self.node_types[i] == node_type]

    def nonterminal_children(self, i: int) -> list[int]:
        return [c for c in self.children[i] if self.token_indices[c] is None]

    def subtree(self, root: int) -> "Ast":
        """Re-rooted copy of a subtree with rebased token indices."""
        end = root + self.subtree_sizes[root]
        term_idx = [self.token_indices[i] for i in range(root, end)
                    if self.token_indices[i] is not None]
        t0 = min(term_idx)
        t1 = max(term_idx)
        tokens = self.tokens[t0:t1 + 1]
        offset = root
        return Ast(
            node_types=self.node_types[root:end],
            token_indices=[None if ti is None else ti - t0
                           for ti in self.token_indices[root:end]],
            parents=[-1 if i == root else self.parents[i] - offset
                     for i in range(root, end)],
            lines=self.lines[root:end],
            cols=self.cols[root:end],
            tokens=tokens,
        )


def _flatten(root: _Node, tokens: list[Token]) -> Ast:
    node_types: list[str] = []
    token_indices: list[int | None] = []
    parents: list[int] = []
    order: list[_Node] = []
    stack = [(root, -1)]
    while stack:
        node, parent = stack.pop()
        idx = len(node_types)
        node_types.append(node.node_type)
        token_indices.append(node.token_index)
        parents.append(parent)
        order.append(node)
        for child in reversed(node.children):
            stack.append((child, idx))
    # positions: terminals from their token; nonterminals from first leaf below
    lines = [0] * len(node_types)
    cols = [0] * len(node_types)
    for i in range(len(node_types) - 1, -1, -1):
        ti = token_indices[i]
        if ti is not None:
            lines[i] = tokens[ti].line
            cols[i] = tokens[ti].col
        else:
            # preorder: first child is at i+1 when it exists
            lines[i] = lines[i + 1]
            cols[i] = cols[i + 1]
    return Ast(node_types, token_indices, parents, lines, cols, tokens)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # -- token plumbing -----------------------------------------------------

    def _peek(self, ahead: int = 0) -> Token | None:
        j = self.i + ahead
        return self.toks[j] if j < len(self.toks) else None

    def _at(self, kind: str, lexeme: str | None = None, ahead: int = 0) -> bool:
        t = self._peek(ahead)
        return t is not None and t.kind == kind and (lexeme is None or t.lexeme == lexeme)

    def _at_word(self, lexeme: str, ahead: int = 0) -> bool:
        return self._at(KIND_KEYWORD, lexeme, ahead)

    def _error(self, message: str) -> ParseError:
        t = self._peek()
        if t is None:
            last = self.toks[-1] if self.toks else None
            return ParseError(f"{message}, found end of input",
                              last.line if last else 0, last.col if last else 0)
        return ParseError(f"{message}, found {t.lexeme!r}", t.line, t.col)

    def take(self, parent: _Node) -> Token:
        """Consume the current token and attach it as a leaf of parent."""
        t = self._peek()
        if t is None:
            raise self._error("unexpected end of input")
        parent.add(_Node(t.kind, self.i))
        self.i += 1
        return t

    def expect(self, parent: _Node, kind: str, lexeme: str | None = None) -> Token:
        if not self._at(kind, lexeme):
            want = lexeme if lexeme is not None else kind
            raise self._error(f"expected {want!r}")
        return self.take(parent)

    # -- top level ------------------------------------------------------------

    def compilation_unit(self) -> _Node:
        unit = _Node(NT_COMPILATION_UNIT)
        if self._at_word("package"):
            pkg = unit.add(_Node(NT_PACKAGE))
            self.take(pkg)
            self._dotted_name(pkg)
            self.expect(pkg, KIND_SEPARATOR, ";")
        while self._at_word("import"):
            imp = unit.add(_Node(NT_IMPORT))
            self.take(imp)
            self._dotted_name(imp, allow_star=True)
            self.expect(imp, KIND_SEPARATOR, ";")
        while self._peek() is not None:
            unit.add(self.type_decl())
        if not any(c.node_type in (NT_CLASS, NT_INTERFACE) for c in unit.children):
            raise ParseError("no type declaration in file", 1, 1)
        return unit

    def _dotted_name(self, parent: _Node, allow_star: bool = False) -> str:
        parts = [self.expect(parent, KIND_IDENTIFIER).lexeme]
        while self._at(KIND_SEPARATOR, "."):
            self.take(parent)
            if allow_star and self._at(KIND_OPERATOR, "*"):
                self.take(parent)
                parts.append("*")
                break
            parts.append(self.expect(parent, KIND_IDENTIFIER).lexeme)
        return ".".join(parts)

    def _annotations_and_modifiers(self, parent: _Node) -> None:
        while True:
            if self._at(KIND_SEPARATOR, "@"):
                ann = parent.add(_Node(NT_ANNOTATION))
                self.take(ann)
                self.expect(ann, KIND_IDENTIFIER)
                if self._at(KIND_SEPARATOR, "("):
                    depth = 0
                    while True:
                        t = self._peek()
                        if t is None:
                            raise self._error("unterminated annotation arguments")
                        if t.kind == KIND_SEPARATOR and t.lexeme == "(":
                            depth += 1
                        elif t.kind == KIND_SEPARATOR and t.lexeme == ")":
                            depth -= 1
                        self.take(ann)
                        if depth == 0:
                            break
            elif self._peek() is not None and self._peek().kind == KIND_KEYWORD \
                    and self._peek().lexeme in MODIFIER_WORDS:
                self.take(parent)
            else:
                return

    def type_decl(self) -> _Node:
        decl = _Node("_pending")
        self._annotations_and_modifiers(decl)
        if self._at_word("class"):
            decl.node_type = NT_CLASS
        elif self._at_word("interface"):
            decl.node_type = NT_INTERFACE
        else:
            raise self._error("expected 'class' or 'interface'")
        self.take(decl)
        name = self.expect(decl, KIND_IDENTIFIER).lexeme
        if self._at(KIND_OPERATOR, "<"):
            self._raw_generics(decl)
        if self._at_word("extends"):
            self.take(decl)
            decl.add(self.type_node())
        if self._at_word("implements"):
            self.take(decl)
            decl.add(self.type_node())
            while self._at(KIND_SEPARATOR, ","):
                self.take(decl)
                decl.add(self.type_node())
        self.expect(decl, KIND_SEPARATOR, "{")
        while not self._at(KIND_SEPARATOR, "}"):
            decl.add(self.member_decl(class_name=name))
        self.expect(decl, KIND_SEPARATOR, "}")
        return decl

    def member_decl(self, class_name: str) -> _Node:
        member = _Node("_pending")
        self._annotations_and_modifiers(member)
        if self._at(KIND_IDENTIFIER, class_name) and self._at(KIND_SEPARATOR, "(", ahead=1):
            member.node_type = NT_CTOR
            self.take(member)                      # constructor name
            self._params(member)
            member.add(self.block())
            return member
        member.add(self.type_node(allow_void=True))
        self.expect(member, KIND_IDENTIFIER)
        if self._at(KIND_SEPARATOR, "("):
            member.node_type = NT_METHOD
            self._params(member)
            if self._at(KIND_SEPARATOR, ";"):
                self.take(member)                  # abstract / interface method
            else:
                member.add(self.block())
        else:
            member.node_type = NT_FIELD
            if self._at(KIND_OPERATOR, "="):
                self.take(member)
                member.add(self.expression())
            self.expect(member, KIND_SEPARATOR, ";")
        return member

    def _params(self, parent: _Node) -> None:
        self.expect(parent, KIND_SEPARATOR, "(")
        if not self._at(KIND_SEPARATOR, ")"):
            parent.add(self._param())
            while self._at(KIND_SEPARATOR, ","):
                self.take(parent)
                parent.add(self._param())
        self.expect(parent, KIND_SEPARATOR, ")")

    def _param(self) -> _Node:
        p = _Node(NT_PARAM)
        self._annotations_and_modifiers(p)
        p.add(self.type_node())
        self.expect(p, KIND_IDENTIFIER)
        return p

    def type_node(self, allow_void: bool = False) -> _Node:
        ty = _Node(NT_TYPE)
        t = self._peek()
        if t is None:
            raise self._error("expected a type")
        if t.kind == KIND_KEYWORD and (t.lexeme in PRIMITIVE_WORDS
                                       or (allow_void and t.lexeme == "void")):
            self.take(ty)
        elif t.kind == KIND_IDENTIFIER:
            self.take(ty)
            while self._at(KIND_SEPARATOR, ".") and self._at(KIND_IDENTIFIER, ahead=1):
                self.take(ty)
                self.take(ty)
        else:
            raise self._error("expected a type")
        if self._at(KIND_OPERATOR, "<"):
            self._raw_generics(ty)
        if self._at(KIND_SEPARATOR, "["):
            raise self._error("array types are outside the supported subset")
        return ty

    def _raw_generics(self, parent: _Node) -> None:
        """Consume a balanced `<...>` run as raw leaves (type erasure)."""
        depth = 0
        while True:
            t = self._peek()
            if t is None:
                raise self._error("unterminated type arguments")
            if t.kind == KIND_OPERATOR and t.lexeme == "<":
                depth += 1
            elif t.kind == KIND_OPERATOR and t.lexeme == ">":
                depth -= 1
            elif t.kind == KIND_SEPARATOR and t.lexeme in "(){};":
                raise self._error("unterminated type arguments")
            self.take(parent)
            if depth == 0:
                return

    # -- statements -----------------------------------------------------------

    def block(self) -> _Node:
        b = _Node(NT_BLOCK)
        self.expect(b, KIND_SEPARATOR, "{")
        while not self._at(KIND_SEPARATOR, "}"):
            b.add(self.statement())
        self.expect(b, KIND_SEPARATOR, "}")
        return b

    def statement(self) -> _Node:
        t = self._peek()
        if t is None:
            raise self._error("expected a statement")
        if t.kind == KIND_SEPARATOR and t.lexeme == "{":
            return self.block()
        if t.kind == KIND_KEYWORD:
            if t.lexeme == "if":
                return self._if_stmt()
            if t.lexeme == "while":
                return self._while_stmt()
            if t.lexeme == "for":
                return self._for_stmt()
            if t.lexeme == "return":
                return self._return_stmt()
            if t.lexeme in PRIMITIVE_WORDS or t.lexeme == "final":
                return self._local_decl(want_semi=True)
            if t.lexeme in ("this", "new"):
                stmt = _Node(NT_EXPR_STMT)
                stmt.add(self.expression())
                self.expect(stmt, KIND_SEPARATOR, ";")
                return stmt
            raise self._error("statement form outside the supported subset")
        if t.kind == KIND_IDENTIFIER and self._looks_like_decl():
            return self._local_decl(want_semi=True)
        stmt = _Node(NT_EXPR_STMT)
        stmt.add(self.expression())
        self.expect(stmt, KIND_SEPARATOR, ";")
        return stmt

    def _looks_like_decl(self) -> bool:
        """Lookahead: identifier-led statement that is really `Type name ...`."""
        j = self.i
        toks = self.toks

        def at(k, lx=None, off=0):
            t = toks[j + off] if j + off < len(toks) else None
            return t is not None and t.kind == k and (lx is None or t.lexeme == lx)

        if not at(KIND_IDENTIFIER):
            return False
        j += 1
        while at(KIND_SEPARATOR, ".") and at(KIND_IDENTIFIER, off=1):
            j += 2
        if at(KIND_OPERATOR, "<"):
            depth = 0
            while j < len(toks):
                t = toks[j]
                if t.kind == KIND_OPERATOR and t.lexeme == "<":
                    depth += 1
                elif t.kind == KIND_OPERATOR and t.lexeme == ">":
                    depth -= 1
                    if depth == 0:
                        j += 1
                        break
                elif not (t.kind == KIND_IDENTIFIER
                          or (t.kind == KIND_KEYWORD and t.lexeme in PRIMITIVE_WORDS)
                          or (t.kind == KIND_SEPARATOR and t.lexeme in ".,")):
                    return False
                j += 1
            else:
                return False
        t = toks[j] if j < len(toks) else None
        return t is not None and t.kind == KIND_IDENTIFIER

    def _local_decl(self, want_semi: bool) -> _Node:
        decl = _Node(NT_LOCAL)
        if self._at_word("final"):
            self.take(decl)
        decl.add(self.type_node())
        self.expect(decl, KIND_IDENTIFIER)
        if self._at(KIND_OPERATOR, "="):
            self.take(decl)
            decl.add(self.expression())
        if want_semi:
            self.expect(decl, KIND_SEPARATOR, ";")
        return decl

    def _if_stmt(self) -> _Node:
        node = _Node(NT_IF)
        self.take(node)
        self.expect(node, KIND_SEPARATOR, "(")
        node.add(self.expression())
        self.expect(node, KIND_SEPARATOR, ")")
        node.add(self.statement())
        if self._at_word("else"):
            self.take(node)
            node.add(self.statement())
        return node

    def _while_stmt(self) -> _Node:
        node = _Node(NT_WHILE)
        self.take(node)
        self.expect(node, KIND_SEPARATOR, "(")
        node.add(self.expression())
        self.expect(node, KIND_SEPARATOR, ")")
        node.add(self.statement())
        return node

    def _for_stmt(self) -> _Node:
        node = _Node(NT_FOR)
        self.take(node)
        self.expect(node, KIND_SEPARATOR, "(")
        if not self._at(KIND_SEPARATOR, ";"):
            init = node.add(_Node(NT_FOR_INIT))
            t = self._peek()
            if (t.kind == KIND_KEYWORD and (t.lexeme in PRIMITIVE_WORDS or t.lexeme == "final")) \
                    or (t.kind == KIND_IDENTIFIER and self._looks_like_decl()):
                init.add(self._local_decl(want_semi=False))
            else:
                init.add(self.expression())
        self.expect(node, KIND_SEPARATOR, ";")
        if not self._at(KIND_SEPARATOR, ";"):
            node.add(self.expression())
        self.expect(node, KIND_SEPARATOR, ";")
        if not self._at(KIND_SEPARATOR, ")"):
            upd = node.add(_Node(NT_FOR_UPDATE))
            upd.add(self.expression())
        self.expect(node, KIND_SEPARATOR, ")")
        node.add(self.statement())
        return node

    def _return_stmt(self) -> _Node:
        node = _Node(NT_RETURN)
        self.take(node)
        if not self._at(KIND_SEPARATOR, ";"):
            node.add(self.expression())
        self.expect(node, KIND_SEPARATOR, ";")
        return node

    # -- expressions ------------------------------------------------------------

    def expression(self) -> _Node:
        return self._assignment()

    def _assignment(self) -> _Node:
        left = self._ternary()
        t = self._peek()
        if t is not None and t.kind == KIND_OPERATOR \
                and t.lexeme in ("=", "+=", "-=", "*=", "/=", "%="):
            if left.node_type not in (NT_FIELD_ACCESS,) and not (
                    left.token_index is not None and left.node_type == KIND_IDENTIFIER):
                raise self._error("assignment target must be a name or field access")
            node = _Node(NT_ASSIGN)
            node.add(left)
            self.take(node)
            node.add(self._assignment())
            return node
        return left

    def _ternary(self) -> _Node:
        cond = self._or_expr()
        if self._at(KIND_OPERATOR, "?"):
            node = _Node(NT_TERNARY)
            node.add(cond)
            self.take(node)
            node.add(self.expression())
            self.expect(node, KIND_OPERATOR, ":")
            node.add(self._ternary())
            return node
        return cond

    def _binary_level(self, sub, lexemes: tuple[str, ...]) -> _Node:
        left = sub()
        while True:
            t = self._peek()
            if t is None or t.kind != KIND_OPERATOR or t.lexeme not in lexemes:
                return left
            node = _Node(NT_BINARY)
            node.add(left)
            self.take(node)
            node.add(sub())
            left = node

    def _or_expr(self) -> _Node:
        return self._binary_level(self._and_expr, ("||",))

    def _and_expr(self) -> _Node:
        return self._binary_level(self._equality, ("&&",))

    def _equality(self) -> _Node:
        return self._binary_level(self._relational, ("==", "!="))

    def _relational(self) -> _Node:
        return self._binary_level(self._additive, ("<", ">", "<=", ">="))

    def _additive(self) -> _Node:
        return self._binary_level(self._multiplicative, ("+", "-"))

    def _multiplicative(self) -> _Node:
        return self._binary_level(self._unary, ("*", "/", "%"))

    def _unary(self) -> _Node:
        t = self._peek()
        if t is not None and t.kind == KIND_OPERATOR and t.lexeme in ("!", "-", "+", "++", "--"):
            node = _Node(NT_UNARY)
            self.take(node)
            node.add(self._unary())
            return node
        return self._postfix()

    def _postfix(self) -> _Node:
        expr = self._primary()
        while True:
            if self._at(KIND_SEPARATOR, "."):
                if not self._at(KIND_IDENTIFIER, ahead=1):
                    raise self._error("expected a member name after '.'")
                if self._at(KIND_SEPARATOR, "(", ahead=2):
                    node = _Node(NT_CALL)
                    node.add(expr)
                    self.take(node)              # '.'
                    self.take(node)              # name
                    self._args(node)
                    expr = node
                else:
                    node = _Node(NT_FIELD_ACCESS)
                    node.add(expr)
                    self.take(node)
                    self.take(node)
                    expr = node
            elif self._at(KIND_OPERATOR, "++") or self._at(KIND_OPERATOR, "--"):
                node = _Node(NT_POSTFIX)
                node.add(expr)
                self.take(node)
                expr = node
            else:
                return expr

    def _args(self, call: _Node) -> None:
        self.expect(call, KIND_SEPARATOR, "(")
        if not self._at(KIND_SEPARATOR, ")"):
            call.add(self.expression())
            while self._at(KIND_SEPARATOR, ","):
                self.take(call)
                call.add(self.expression())
        self.expect(call, KIND_SEPARATOR, ")")

    def _primary(self) -> _Node:
        t = self._peek()
        if t is None:
            raise self._error("expected an expression")
        if t.kind in (KIND_INT, KIND_STRING, KIND_CHAR, KIND_BOOL, KIND_NULL):
            holder = _Node("_lit")
            self.take(holder)
            return holder.children[0]
        if t.kind == KIND_KEYWORD and t.lexeme == "this":
            holder = _Node("_this")
            self.take(holder)
            return holder.children[0]
        if t.kind == KIND_KEYWORD and t.lexeme == "new":
            node = _Node(NT_NEW)
            self.take(node)
            node.add(self.type_node())
            self._args(node)
            return node
        if t.kind == KIND_SEPARATOR and t.lexeme == "(":
            node = _Node(NT_PAREN)
            self.take(node)
            node.add(self.expression())
            self.expect(node, KIND_SEPARATOR, ")")
            return node
        if t.kind == KIND_IDENTIFIER:
            if self._at(KIND_SEPARATOR, "(", ahead=1):
                node = _Node(NT_CALL)
                self.take(node)                  # implicit-this callee name
                self._args(node)
                return node
            holder = _Node("_name")
            self.take(holder)
            return holder.children[0]
        raise self._error("expression form outside the supported subset")


def parse(source: str) -> Ast:
    """Lex + parse a compilation unit into a flat Ast."""
    tokens = lex(source)
    if not tokens:
        raise ParseError("empty source", 1, 1)
    parser = _Parser(tokens)
    root = parser.compilation_unit()
    return _flatten(root, tokens)


# ---------------------------------------------------------------------------
# Structure accessors shared by downstream modules
# ---------------------------------------------------------------------------

def type_text(ast: Ast, type_node: int) -> str:
    """Erased type text: dotted base name without generic arguments."""
    parts = []
    for c in ast.children[type_node]:
        tok = ast.token(c)
        if tok.kind == KIND_OPERATOR and tok.lexeme == "<":
            break
        parts.append(tok.lexeme)
    return "".join(parts)


def type_simple_name(ast: Ast, type_node: int) -> str:
    return type_text(ast, type_node).rsplit(".", 1)[-1]


def if_parts(ast: Ast, i: int) -> tuple[int, int, int | None]:
    """(condition root, then statement, else statement or None)."""
    kids = ast.children[i]
    # shape: 'if' '(' cond ')' then ['else' else_stmt]
    cond = kids[2]
    then = kids[4]
    els = kids[6] if len(kids) > 5 else None
    return cond, then, els


def while_parts(ast: Ast, i: int) -> tuple[int, int]:
    kids = ast.children[i]
    return kids[2], kids[4]


def for_parts(ast: Ast, i: int) -> tuple[int | None, int | None, int | None, int]:
    """(init, condition, update, body); the first three may be absent."""
    init = cond = update = None
    semis = 0
    for c in ast.children[i][1:]:
        nt = ast.node_types[c]
        if ast.is_terminal(c):
            tok = ast.token(c)
            if tok.kind == KIND_SEPARATOR and tok.lexeme == ";":
                semis += 1
            continue
        if nt == NT_FOR_INIT:
            init = ast.nonterminal_children(c)[0] if ast.nonterminal_children(c) \
                else ast.children[c][0]
        elif nt == NT_FOR_UPDATE:
            update = ast.children[c][0]
        elif semis == 1 and cond is None:
            cond = c
    body = ast.children[i][-1]
    return init, cond, update, body


def assign_parts(ast: Ast, i: int) -> tuple[int, str, int]:
    kids = ast.children[i]
    return kids[0], ast.lexeme(kids[1]), kids[2]


def local_decl_parts(ast: Ast, i: int) -> tuple[int, int, int | None]:
    """(type node, name terminal, init expression or None)."""
    kids = ast.children[i]
    ty = next(c for c in kids if ast.node_types[c] == NT_TYPE)
    name = kids[kids.index(ty) + 1]
    init = None
    for j, c in enumerate(kids):
        if ast.is_terminal(c) and ast.token(c).kind == KIND_OPERATOR \
                and ast.lexeme(c) == "=":
            init = kids[j + 1]
            break
    return ty, name, init


def call_parts(ast: Ast, i: int) -> tuple[int | None, int, list[int]]:
    """(receiver node or None, callee-name terminal, argument roots)."""
    kids = ast.children[i]
    lparen = next(j for j, c in enumerate(kids)
                  if ast.is_terminal(c) and ast.token(c).kind == KIND_SEPARATOR
                  and ast.lexeme(c) == "(")
    name = kids[lparen - 1]
    receiver = kids[0] if lparen >= 3 else None
    args = [c for c in kids[lparen + 1:]
            if not (ast.is_terminal(c) and ast.token(c).kind == KIND_SEPARATOR)]
    return receiver, name, args


def new_parts(ast: Ast, i: int) -> tuple[int, list[int]]:
    """(type node, argument roots) of a `new T(...)` expression."""
    kids = ast.children[i]
    ty = next(c for c in kids if ast.node_types[c] == NT_TYPE)
    lparen = next(j for j, c in enumerate(kids)
                  if ast.is_terminal(c) and ast.token(c).kind == KIND_SEPARATOR
                  and ast.lexeme(c) == "(")
    args = [c for c in kids[lparen + 1:]
            if not (ast.is_terminal(c) and ast.token(c).kind == KIND_SEPARATOR)]
    return ty, args


# ---------------------------------------------------------------------------
# File views: the syntactic summary consumed by cataloging and resolution
# ---------------------------------------------------------------------------

@dataclass
class MethodSource:
    """One method or constructor declaration with its text and subtree."""

    name: str
    signature: str
    start_line: int
    end_line: int
    text: str
    ast: Ast
    param_types: list[str]
    param_names: list[str]
    return_type: str
    is_constructor: bool
    modifiers: frozenset[str]
    class_name: str = ""
    method_id: str = ""


@dataclass
class ClassView:
    name: str
    kind: str                      # "class" | "interface"
    extends: str | None
    implements: list[str]
    fields: dict[str, str]         # field name -> erased simple type text
    methods: list[MethodSource]
    node_index: int


@dataclass
class FileView:
    path: str
    source: str
    ast: Ast
    package_name: str
    imports: list[tuple[str, bool]]  # (dotted name, is_wildcard)
    classes: list[ClassView]


def slice_lines(source: str, start_line: int, end_line: int) -> str:
    """Whole-line slice, 1-based inclusive, preserving original line endings."""
    lines = source.splitlines(keepends=True)
    return "".join(lines[start_line - 1:end_line])


def _member_span(ast: Ast, member: int) -> tuple[int, int]:
    terms = ast.terminals(member)
    return ast.tokens[ast.token_indices[terms[0]]].line, \
        ast.tokens[ast.token_indices[terms[-1]]].line


def _method_source(ast: Ast, source: str, member: int, class_name: str) -> MethodSource:
    kids = ast.children[member]
    is_ctor = ast.node_types[member] == NT_CTOR
    modifiers = frozenset(
        ast.lexeme(c) for c in kids
        if ast.is_terminal(c) and ast.token(c).kind == KIND_KEYWORD
        and ast.lexeme(c) in MODIFIER_WORDS)
    if is_ctor:
        name_node = next(c for c in kids if ast.is_terminal(c)
                         and ast.token(c).kind == KIND_IDENTIFIER)
        return_type = class_name
    else:
        ty = next(c for c in kids if ast.node_types[c] == NT_TYPE)
        name_node = kids[kids.index(ty) + 1]
        return_type = type_simple_name(ast, ty)
    name = ast.lexeme(name_node)
    params = [c for c in kids if ast.node_types[c] == NT_PARAM]
    param_types = []
    param_names = []
    for p in params:
        pty = next(c for c in ast.children[p] if ast.node_types[c] == NT_TYPE)
        param_types.append(type_simple_name(ast, pty))
        param_names.append(ast.lexeme(ast.children[p][ast.children[p].index(pty) + 1]))
    signature = f"{name}({','.join(param_types)})"
    start, end = _member_span(ast, member)
    return MethodSource(
        name=name,
        signature=signature,
        start_line=start,
        end_line=end,
        text=slice_lines(source, start, end),
        ast=ast.subtree(member),
        param_types=param_types,
        param_names=param_names,
        return_type=return_type,
        is_constructor=is_ctor,
        modifiers=modifiers,
        class_name=class_name,
    )


def file_view(source: str, path: str = "<source>") -> FileView:
    """Parse a file and summarize packages, imports, classes, and methods."""
    ast = parse(source)
    package_name = ""
    imports: list[tuple[str, bool]] = []
    classes: list[ClassView] = []
    for child in ast.children[0]:
        nt = ast.node_types[child]
        if nt == NT_PACKAGE:
            names = [ast.lexeme(c) for c in ast.children[child]
                     if ast.is_terminal(c) and ast.token(c).kind == KIND_IDENTIFIER]
            package_name = ".".join(names)
        elif nt == NT_IMPORT:
            parts = [ast.lexeme(c) for c in ast.children[child]
                     if ast.is_terminal(c)
                     and ast.token(c).kind in (KIND_IDENTIFIER, KIND_OPERATOR)]
            wildcard = parts and parts[-1] == "*"
            dotted = ".".join(p for p in parts if p != "*")
            imports.append((dotted, bool(wildcard)))
        elif nt in (NT_CLASS, NT_INTERFACE):
            kids = ast.children[child]
            kw = next(c for c in kids if ast.is_terminal(c)
                      and ast.token(c).kind == KIND_KEYWORD
                      and ast.lexeme(c) in ("class", "interface"))
            name = ast.lexeme(kids[kids.index(kw) + 1])
            extends = None
            implements = []
            seen_extends = seen_implements = False
            for c in kids:
                if ast.is_terminal(c) and ast.token(c).kind == KIND_KEYWORD:
                    if ast.lexeme(c) == "extends":
                        seen_extends = True
                    elif ast.lexeme(c) == "implements":
                        seen_implements = True
                        seen_extends = False
                elif ast.node_types[c] == NT_TYPE:
                    if seen_extends and extends is None:
                        extends = type_text(ast, c)
                    elif seen_implements:
                        implements.append(type_text(ast, c))
            fields: dict[str, str] = {}
            methods: list[MethodSource] = []
            for c in kids:
                nt_c = ast.node_types[c]
                if nt_c == NT_FIELD:
                    fty, fname, _ = local_decl_parts(ast, c)
                    fields[ast.lexeme(fname)] = type_simple_name(ast, fty)
                elif nt_c in (NT_METHOD, NT_CTOR):
                    methods.append(_method_source(ast, source, c, name))
            classes.append(ClassView(
                name=name,
                kind="interface" if nt == NT_INTERFACE else "class",
                extends=extends,
                implements=implements,
                fields=fields,
                methods=methods,
                node_index=child,
            ))
    return FileView(path=path, source=source, ast=ast,
                    package_name=package_name, imports=imports, classes=classes)
