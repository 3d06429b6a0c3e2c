"""AST path contexts between pairs of leaf terminals.

A path context connects two terminals of a method subtree through the tree:
up from the start terminal to the lowest common ancestor, then down to the
end terminal. Two record flavors share the extraction:

    C2VC  terminals kept whole, the node path replaced by a short stable hash
    C2SQ  terminals split into lowercase subtokens, the node path spelled out
          with direction markers

Pairs are enumerated with start before end in token order, filtered by path
length (nodes on the path, terminals excluded) and by width (distance of the
two child branches at the ancestor), then down-sampled without replacement
when a method produces more than `max_contexts`.
"""

import hashlib
import random
import re
from dataclasses import dataclass

from .errors import InvalidArgumentError
from .parser import Ast, MethodSource

MAX_LENGTH_DEFAULT = 8
MAX_WIDTH_DEFAULT = 2
MAX_CONTEXTS_DEFAULT = 200

_SUBTOKEN_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z0-9]*|[a-z0-9]+")


@dataclass(frozen=True)
class RawPath:
    start_terminal: int
    end_terminal: int
    up_nodes: tuple[str, ...]     # node types from just above start to below lca
    lca: str
    down_nodes: tuple[str, ...]   # node types from just below lca to just above end

    @property
    def length(self) -> int:
        return len(self.up_nodes) + 1 + len(self.down_nodes)


def subtokens(lexeme: str) -> list[str]:
    """Lowercase camelCase/underscore pieces; the lexeme itself if none."""
    found = _SUBTOKEN_RE.findall(lexeme)
    return [p.lower() for p in found] if found else [lexeme.lower()]


def render_path(p: RawPath) -> str:
    """Direction-marked node-type sequence, e.g. `Binary↑ReturnStmt↓Call`."""
    out = []
    for nt in p.up_nodes:
        out.append(nt)
        out.append("↑")
    out.append(p.lca)
    for nt in p.down_nodes:
        out.append("↓")
        out.append(nt)
    return "".join(out)


def path_hash(p: RawPath) -> str:
    return hashlib.sha256(render_path(p).encode("utf-8")).hexdigest()[:16]


def extract_paths(ast: Ast,
                  max_length: int = MAX_LENGTH_DEFAULT,
                  max_width: int = MAX_WIDTH_DEFAULT,
                  max_contexts: int = MAX_CONTEXTS_DEFAULT,
                  seed: int = 0) -> list[RawPath]:
    """All admissible terminal pairs, sampled down to max_contexts.

    Pairs are ordered by token position (start strictly before end). When
    more than max_contexts survive the length/width filters, a uniform
    sample without replacement is drawn with `seed` and returned in the
    original source order.
    """
    if max_length < 1 or max_width < 1 or max_contexts < 1:
        raise InvalidArgumentError("path limits must be >= 1")
    terminals = [i for i in range(len(ast)) if ast.is_terminal(i)]
    if len(terminals) < 2:
        return []

    # ancestor chain (node -> root) per terminal, plus position-in-parent
    chains: dict[int, list[int]] = {}
    for t in terminals:
        chain = []
        n = t
        while n != 0:
            n = ast.parents[n]
            chain.append(n)
        chains[t] = chain
    depth = {t: len(chains[t]) for t in terminals}
    pos_in_parent = {}
    for parent, kids in enumerate(ast.children):
        for k, c in enumerate(kids):
            pos_in_parent[c] = k

    paths: list[RawPath] = []
    for ai in range(len(terminals)):
        a = terminals[ai]
        chain_a = chains[a]
        set_a = {n: d for d, n in enumerate(chain_a)}
        for bi in range(ai + 1, len(terminals)):
            b = terminals[bi]
            chain_b = chains[b]
            lca = None
            d_b = 0
            for d, n in enumerate(chain_b):
                if n in set_a:
                    lca = n
                    d_b = d
                    break
            d_a = set_a[lca]
            if d_a + 1 + d_b > max_length:
                continue
            branch_a = chain_a[d_a - 1] if d_a > 0 else a
            branch_b = chain_b[d_b - 1] if d_b > 0 else b
            if abs(pos_in_parent[branch_b] - pos_in_parent[branch_a]) > max_width:
                continue
            up = tuple(ast.node_types[n] for n in chain_a[:d_a])
            down = tuple(ast.node_types[n] for n in reversed(chain_b[:d_b]))
            paths.append(RawPath(a, b, up, ast.node_types[lca], down))

    if len(paths) > max_contexts:
        rng = random.Random(seed)
        keep = sorted(rng.sample(range(len(paths)), max_contexts))
        paths = [paths[k] for k in keep]
    return paths


def to_c2vc(method: MethodSource, paths: list[RawPath]) -> str:
    """`label left,pathhash,right ...` with raw terminal text."""
    ast = method.ast
    parts = [method.name]
    for p in paths:
        left = ast.lexeme(p.start_terminal)
        right = ast.lexeme(p.end_terminal)
        parts.append(f"{left},{path_hash(p)},{right}")
    return " ".join(parts)


def to_c2sq(method: MethodSource, paths: list[RawPath]) -> str:
    """`sub|toks left,Node↑..↓Node,right ...` with subtokenized terminals."""
    ast = method.ast
    parts = ["|".join(subtokens(method.name))]
    for p in paths:
        left = "|".join(subtokens(ast.lexeme(p.start_terminal)))
        right = "|".join(subtokens(ast.lexeme(p.end_terminal)))
        parts.append(f"{left},{render_path(p)},{right}")
    return " ".join(parts)
