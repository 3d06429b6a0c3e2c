"""Independent reference implementations used to derive expected values.

Each oracle recomputes a quantity the library also computes, using a
different algorithmic shape:

* `npath_enumerator` counts execution paths by enumerating short-circuit
  outcomes of conditions, instead of the closed-form recurrence.
* `flow_edges_saturated` enumerates concrete execution paths (loops
  unrolled up to a bound that is raised until the answer stops changing)
  and scans each path for def/use events, instead of abstract fixpoint
  states.
* `all_path_contexts` enumerates terminal pairs through root paths,
  instead of ancestor-chain walking.

The event extraction conventions (evaluation order, which occurrences
count as reads/writes) mirror the library's documented semantics; the
flow semantics on top of them are computed from scratch.
"""

from dataclasses import dataclass, field

from codecorpus.lexer import KIND_IDENTIFIER, KIND_KEYWORD, KIND_SEPARATOR
from codecorpus.parser import (
    Ast, MethodSource, NT_ASSIGN, NT_BINARY, NT_BLOCK, NT_CALL,
    NT_EXPR_STMT, NT_FIELD_ACCESS, NT_FOR, NT_IF, NT_LOCAL, NT_NEW,
    NT_PARAM, NT_PAREN, NT_POSTFIX, NT_RETURN, NT_TERNARY, NT_UNARY,
    NT_WHILE, assign_parts, call_parts, for_parts, if_parts,
    local_decl_parts, new_parts, while_parts,
)

# ---------------------------------------------------------------------------
# Path-count oracle for NPTH
# ---------------------------------------------------------------------------


def _cond_ways(ast: Ast, node: int) -> tuple[int, int]:
    """(ways to evaluate true, ways to evaluate false) for a condition."""
    if ast.is_terminal(node):
        return (1, 1)
    nt = ast.node_types[node]
    if nt == NT_PAREN:
        inner = [c for c in ast.children[node]
                 if not (ast.is_terminal(c)
                         and ast.token(c).kind == KIND_SEPARATOR)]
        return _cond_ways(ast, inner[0]) if inner else (1, 1)
    if nt == NT_UNARY:
        op = ast.lexeme(ast.children[node][0])
        t, f = _cond_ways(ast, ast.children[node][1])
        return (f, t) if op == "!" else (t, f)
    if nt == NT_BINARY:
        lhs, op_t, rhs = ast.children[node][0], ast.children[node][1], \
            ast.children[node][2]
        op = ast.lexeme(op_t)
        if op == "&&":
            ta, fa = _cond_ways(ast, lhs)
            tb, fb = _cond_ways(ast, rhs)
            return (ta * tb, fa + ta * fb)
        if op == "||":
            ta, fa = _cond_ways(ast, lhs)
            tb, fb = _cond_ways(ast, rhs)
            return (ta + fa * tb, fa * fb)
        return (1, 1)
    return (1, 1)


def _stmt_path_count(ast: Ast, stmt: int) -> int:
    nt = ast.node_types[stmt]
    if nt == NT_BLOCK:
        n = 1
        for c in ast.nonterminal_children(stmt):
            n *= _stmt_path_count(ast, c)
        return n
    if nt == NT_IF:
        cond, then, els = if_parts(ast, stmt)
        t, f = _cond_ways(ast, cond)
        if els is None:
            return t * _stmt_path_count(ast, then) + f
        return t * _stmt_path_count(ast, then) + f * _stmt_path_count(ast, els)
    if nt == NT_WHILE:
        cond, body = while_parts(ast, stmt)
        t, f = _cond_ways(ast, cond)
        return f + t * _stmt_path_count(ast, body)
    if nt == NT_FOR:
        _init, cond, _update, body = for_parts(ast, stmt)
        t, f = _cond_ways(ast, cond) if cond is not None else (1, 1)
        return f + t * _stmt_path_count(ast, body)
    return 1


def npath_enumerator(ast: Ast) -> int:
    """Execution paths through the method, loops taken at most once."""
    body = next((c for c in ast.children[0]
                 if ast.node_types[c] == NT_BLOCK), None)
    if body is None:
        return 1
    return _stmt_path_count(ast, body)


# ---------------------------------------------------------------------------
# Data-flow oracle: path enumeration + event scan
# ---------------------------------------------------------------------------


@dataclass
class Ev:
    kind: str                  # 'r' | 'w' | 'rw'
    key: str
    term: int
    name: str
    guards: tuple              # ((cond_root, cond_names, negated), ...)


@dataclass
class Seq:
    items: list = field(default_factory=list)


@dataclass
class Branch:
    cond: Seq
    then: Seq
    els: "Seq | None"


@dataclass
class Loop:
    cond: "Seq | None"
    body: Seq


class _TreeBuilder:
    """Turns a method body into the nested event structure above."""

    def __init__(self, ast: Ast, fields: dict[str, str]):
        self.ast = ast
        self.fields = fields
        self.locals: set[str] = set()
        self.computed_from: set[tuple[int, int]] = set()

    def key_of(self, name: str) -> str | None:
        if name in self.locals:
            return name
        if name in self.fields:
            return f"this.{name}"
        return None

    def _ev(self, out: Seq, kind: str, term: int, name: str, guards) -> None:
        key = self.key_of(name)
        if key is not None:
            out.items.append(Ev(kind, key, term, name, tuple(guards)))

    def expr(self, node: int, out: Seq, guards) -> None:
        ast = self.ast
        if ast.is_terminal(node):
            if ast.token(node).kind == KIND_IDENTIFIER:
                self._ev(out, "r", node, ast.lexeme(node), guards)
            return
        nt = ast.node_types[node]
        if nt == NT_ASSIGN:
            lhs, op, rhs = assign_parts(ast, node)
            rhs_seq = Seq()
            self.expr(rhs, rhs_seq, guards)
            out.items.extend(rhs_seq.items)
            rhs_terms = [e.term for e in _flat_events(rhs_seq)]
            target = self._target(lhs)
            if target is None:
                if ast.node_types[lhs] == NT_FIELD_ACCESS:
                    self.expr(lhs, out, guards)
                return
            term, name = target
            self._ev(out, "w" if op == "=" else "rw", term, name, guards)
            for src in rhs_terms:
                self.computed_from.add((term, src))
        elif nt in (NT_BINARY, NT_TERNARY, NT_PAREN):
            for c in ast.children[node]:
                if not ast.is_terminal(c) \
                        or ast.token(c).kind == KIND_IDENTIFIER:
                    self.expr(c, out, guards)
        elif nt == NT_UNARY:
            op = ast.lexeme(ast.children[node][0])
            operand = ast.children[node][1]
            if op in ("++", "--"):
                self._incdec(operand, out, guards)
            else:
                self.expr(operand, out, guards)
        elif nt == NT_POSTFIX:
            self._incdec(ast.children[node][0], out, guards)
        elif nt == NT_CALL:
            receiver, _name, args = call_parts(ast, node)
            if receiver is not None:
                self.expr(receiver, out, guards)
            for a in args:
                self.expr(a, out, guards)
        elif nt == NT_NEW:
            _ty, args = new_parts(ast, node)
            for a in args:
                self.expr(a, out, guards)
        elif nt == NT_FIELD_ACCESS:
            recv, name_term = ast.children[node][0], ast.children[node][2]
            if ast.is_terminal(recv) and ast.lexeme(recv) == "this" \
                    and ast.token(recv).kind == KIND_KEYWORD:
                name = ast.lexeme(name_term)
                if name in self.fields:
                    out.items.append(Ev("r", f"this.{name}", name_term,
                                        name, tuple(guards)))
            else:
                self.expr(recv, out, guards)

    def _incdec(self, operand: int, out: Seq, guards) -> None:
        target = self._target(operand)
        if target is None:
            self.expr(operand, out, guards)
            return
        term, name = target
        self._ev(out, "rw", term, name, guards)

    def _target(self, node: int) -> tuple[int, str] | None:
        ast = self.ast
        if ast.is_terminal(node) and ast.token(node).kind == KIND_IDENTIFIER:
            name = ast.lexeme(node)
            return (node, name) if self.key_of(name) else None
        if ast.node_types[node] == NT_FIELD_ACCESS:
            recv, name_term = ast.children[node][0], ast.children[node][2]
            if ast.is_terminal(recv) and ast.lexeme(recv) == "this" \
                    and ast.token(recv).kind == KIND_KEYWORD:
                name = ast.lexeme(name_term)
                if name in self.fields:
                    return (name_term, name)
        return None

    def _cond_names(self, cond: int) -> frozenset[str]:
        out = set()
        for t in self.ast.terminals(cond):
            tok = self.ast.token(t)
            if tok.kind == KIND_IDENTIFIER and self.key_of(tok.lexeme):
                out.add(tok.lexeme)
        return frozenset(out)

    def stmt(self, node: int, out: Seq, guards) -> None:
        ast = self.ast
        nt = ast.node_types[node]
        if nt == NT_BLOCK:
            for c in ast.nonterminal_children(node):
                self.stmt(c, out, guards)
        elif nt == NT_LOCAL:
            _ty, name_term, init = local_decl_parts(ast, node)
            name = ast.lexeme(name_term)
            init_seq = Seq()
            if init is not None:
                self.expr(init, init_seq, guards)
            out.items.extend(init_seq.items)
            self.locals.add(name)
            self._ev(out, "w", name_term, name, guards)
            for e in _flat_events(init_seq):
                self.computed_from.add((name_term, e.term))
        elif nt == NT_EXPR_STMT:
            self.expr(ast.children[node][0], out, guards)
        elif nt == NT_RETURN:
            for c in ast.children[node]:
                if ast.is_terminal(c) and ast.token(c).kind in (
                        KIND_KEYWORD, KIND_SEPARATOR):
                    continue
                self.expr(c, out, guards)
        elif nt == NT_IF:
            cond, then, els = if_parts(ast, node)
            cond_seq = Seq()
            self.expr(cond, cond_seq, guards)
            names = self._cond_names(cond)
            then_seq = Seq()
            self.stmt(then, then_seq, guards + [(cond, names, False)])
            els_seq = None
            if els is not None:
                els_seq = Seq()
                self.stmt(els, els_seq, guards + [(cond, names, True)])
            out.items.append(Branch(cond_seq, then_seq, els_seq))
        elif nt == NT_WHILE:
            cond, body = while_parts(ast, node)
            cond_seq = Seq()
            self.expr(cond, cond_seq, guards)
            body_seq = Seq()
            self.stmt(body, body_seq, guards)
            out.items.append(Loop(cond_seq, body_seq))
        elif nt == NT_FOR:
            init, cond, update, body = for_parts(ast, node)
            if init is not None:
                if ast.node_types[init] == NT_LOCAL:
                    self.stmt(init, out, guards)
                else:
                    self.expr(init, out, guards)
            cond_seq = None
            if cond is not None:
                cond_seq = Seq()
                self.expr(cond, cond_seq, guards)
            body_seq = Seq()
            self.stmt(body, body_seq, guards)
            if update is not None:
                self.expr(update, body_seq, guards)
            out.items.append(Loop(cond_seq, body_seq))
        else:
            for c in ast.nonterminal_children(node):
                self.expr(c, out, guards)


def _flat_events(node) -> list[Ev]:
    """Every event anywhere under the structure, in construction order."""
    if isinstance(node, Ev):
        return [node]
    if isinstance(node, Seq):
        return [e for item in node.items for e in _flat_events(item)]
    if isinstance(node, Branch):
        out = _flat_events(node.cond) + _flat_events(node.then)
        if node.els is not None:
            out += _flat_events(node.els)
        return out
    if isinstance(node, Loop):
        out = _flat_events(node.cond) if node.cond else []
        return out + _flat_events(node.body)
    raise TypeError(type(node))


_PATH_CAP = 500_000


def _enum(node, bound: int) -> list[list[Ev]]:
    """All event sequences through the structure, loops run 0..bound times."""
    if isinstance(node, Ev):
        return [[node]]
    if isinstance(node, Seq):
        paths = [[]]
        for item in node.items:
            sub = _enum(item, bound)
            paths = [p + s for p in paths for s in sub]
            if len(paths) > _PATH_CAP:
                raise RuntimeError("path explosion; shrink the fixture")
        return paths
    if isinstance(node, Branch):
        cond = _enum(node.cond, bound)
        then = _enum(node.then, bound)
        els = _enum(node.els, bound) if node.els is not None else [[]]
        return [c + t for c in cond for t in then] + \
               [c + e for c in cond for e in els]
    if isinstance(node, Loop):
        cond = _enum(node.cond, bound) if node.cond is not None else [[]]
        body = _enum(node.body, bound)
        out = []
        for k in range(bound + 1):
            # cond, body, cond, body, ..., cond   (k bodies, k+1 conds)
            rounds = [cond] + [body, cond] * k
            partial = [[]]
            for r in rounds:
                partial = [p + s for p in partial for s in r]
                if len(partial) > _PATH_CAP:
                    raise RuntimeError("path explosion; shrink the fixture")
            out.extend(partial)
        return out
    raise TypeError(type(node))


def _scan(path: list[Ev], init: dict) -> set[tuple[str, int, int]]:
    state = {k: (set(r), set(w)) for k, (r, w) in init.items()}
    edges = set()
    for ev in path:
        reads, writes = state.get(ev.key, (set(), set()))
        if ev.kind in ("r", "rw"):
            for tgt in reads:
                edges.add(("LastRead", ev.term, tgt))
            for tgt in writes:
                edges.add(("LastWrite", ev.term, tgt))
        if ev.kind == "r":
            state[ev.key] = ({ev.term}, writes)
        elif ev.kind == "w":
            state[ev.key] = (reads, {ev.term})
        else:
            state[ev.key] = ({ev.term}, {ev.term})
    return edges


def flow_oracle(method: MethodSource, fields: dict[str, str] | None = None,
                loop_bound: int = 1) -> dict[str, set[tuple[int, int]]]:
    """LastRead/LastWrite/ComputedFrom/Guarded* edges by path enumeration."""
    ast = method.ast
    fields = dict(fields or {})
    tb = _TreeBuilder(ast, fields)

    terminals = [i for i in range(len(ast)) if ast.is_terminal(i)]
    mentioned = {ast.lexeme(t) for t in terminals
                 if ast.token(t).kind == KIND_IDENTIFIER}
    used_fields = sorted(set(fields) & mentioned)
    field_node = {f: len(ast) + k for k, f in enumerate(used_fields)}

    init: dict[str, tuple[set, set]] = {}
    for p in ast.find(NT_PARAM):
        name_term = ast.children[p][-1]
        pname = ast.lexeme(name_term)
        tb.locals.add(pname)
        init[pname] = (set(), {name_term})
    for f in used_fields:
        init[f"this.{f}"] = (set(), {field_node[f]})

    root = Seq()
    body = next((c for c in ast.children[0]
                 if ast.node_types[c] == NT_BLOCK), None)
    if body is not None:
        tb.stmt(body, root, [])

    flow: set[tuple[str, int, int]] = set()
    for path in _enum(root, loop_bound):
        flow |= _scan(path, init)

    out: dict[str, set[tuple[int, int]]] = {
        "LastRead": set(), "LastWrite": set(), "ComputedFrom": set(),
        "GuardedBy": set(), "GuardedByNegation": set(),
    }
    for etype, src, dst in flow:
        out[etype].add((src, dst))
    out["ComputedFrom"] = set(tb.computed_from)
    for ev in _flat_events(root):
        for cond_root, cond_names, negated in ev.guards:
            if ev.name in cond_names:
                kind = "GuardedByNegation" if negated else "GuardedBy"
                out[kind].add((ev.term, cond_root))
    return out


def flow_edges_saturated(method: MethodSource,
                         fields: dict[str, str] | None = None,
                         max_bound: int = 8
                         ) -> tuple[dict[str, set[tuple[int, int]]], int]:
    """Raise the loop bound until the edge sets stop changing."""
    prev = flow_oracle(method, fields, loop_bound=0)
    for bound in range(1, max_bound + 1):
        cur = flow_oracle(method, fields, loop_bound=bound)
        if cur == prev:
            return cur, bound - 1
        prev = cur
    raise RuntimeError(f"flow oracle did not saturate by bound {max_bound}")


# ---------------------------------------------------------------------------
# All-pairs path-context oracle
# ---------------------------------------------------------------------------


def _root_path(ast: Ast, node: int) -> list[int]:
    out = [node]
    while out[-1] != 0:
        out.append(ast.parents[out[-1]])
    return list(reversed(out))


def all_path_contexts(ast: Ast, max_length: int | None = None,
                      max_width: int | None = None
                      ) -> set[tuple[int, int, str]]:
    """(start, end, rendered path) for every admissible terminal pair."""
    terms = [i for i in range(len(ast)) if ast.is_terminal(i)]
    pos = {}
    for parent, kids in enumerate(ast.children):
        for k, c in enumerate(kids):
            pos[c] = k
    out = set()
    for ai, a in enumerate(terms):
        pa = _root_path(ast, a)
        for b in terms[ai + 1:]:
            pb = _root_path(ast, b)
            c = 0
            while c < len(pa) and c < len(pb) and pa[c] == pb[c]:
                c += 1
            lca = pa[c - 1]
            up = pa[c:-1]        # below lca down to just above a
            down = pb[c:-1]
            length = len(up) + 1 + len(down)
            if max_length is not None and length > max_length:
                continue
            branch_a = pa[c] if c < len(pa) else a
            branch_b = pb[c] if c < len(pb) else b
            width = abs(pos[branch_b] - pos[branch_a])
            if max_width is not None and width > max_width:
                continue
            pieces = []
            for n in reversed(up):
                pieces.append(ast.node_types[n])
                pieces.append("↑")
            pieces.append(ast.node_types[lca])
            for n in down:
                pieces.append("↓")
                pieces.append(ast.node_types[n])
            out.add((a, b, "".join(pieces)))
    return out


# ---------------------------------------------------------------------------
# Recount helpers
# ---------------------------------------------------------------------------


def recount_distribution(edges) -> dict[str, float]:
    """Call-type fractions recomputed from raw edge rows."""
    from collections import Counter
    counts = Counter(e.call_type for e in edges)
    total = sum(counts.values())
    return {t: counts.get(t, 0) / total
            for t in ("Local", "Package", "Project", "API")}


def recount_fit(records, thresholds) -> dict[tuple[str, str], list[float]]:
    """Window-fit fractions recomputed directly from size records."""
    groups: dict[tuple[str, str], list[int]] = {}
    for r in records:
        groups.setdefault((r.granularity, r.tokenizer_tag),
                          []).append(r.subtoken_count)
    return {key: [sum(1 for n in sizes if n <= tau) / len(sizes)
                  for tau in thresholds]
            for key, sizes in sorted(groups.items())}
