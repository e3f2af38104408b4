"""Plane bipartite trees: representation, canonical codes, enumeration, symmetry.

A plane tree is a tree together with a cyclic (counterclockwise) order of the
edges around every vertex.  Vertices are properly 2-colored white/black.  The
canonical code is the minimal balanced-parenthesis walk over all rootings,
prefixed by the root color; equal codes mean orientation-preserving,
color-preserving plane isomorphism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

WHITE = "W"
BLACK = "B"


class PlaneTreeError(ValueError):
    pass


class ParseError(PlaneTreeError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass
class PlaneTree:
    """Bipartite tree with counterclockwise neighbor order at each vertex."""

    colors: list  # 'W' or 'B' per vertex
    neighbors: list  # list of neighbor id lists, ccw order

    @property
    def n_vertices(self):
        return len(self.colors)

    @property
    def n_edges(self):
        return sum(len(nb) for nb in self.neighbors) // 2

    def degree(self, v):
        return len(self.neighbors[v])

    def validate(self):
        n = self.n_vertices
        if n < 2:
            raise PlaneTreeError("tree needs at least one edge")
        if len(self.neighbors) != n:
            raise PlaneTreeError("colors/neighbors length mismatch")
        if self.n_edges != n - 1:
            raise PlaneTreeError("vertex count must equal edge count + 1")
        for v, nb in enumerate(self.neighbors):
            if self.colors[v] not in (WHITE, BLACK):
                raise PlaneTreeError(f"bad color at vertex {v}")
            for u in nb:
                if not 0 <= u < n:
                    raise PlaneTreeError(f"neighbor {u} of {v} out of range")
                if self.colors[u] == self.colors[v]:
                    raise PlaneTreeError(f"edge {v}-{u} joins equal colors")
                if nb.count(u) != 1 or self.neighbors[u].count(v) != 1:
                    raise PlaneTreeError(f"edge {v}-{u} not symmetric/simple")
        # connectivity (acyclicity then follows from the edge count)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u in self.neighbors[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != n:
            raise PlaneTreeError("tree is not connected")
        return self


@dataclass(frozen=True)
class Passport:
    """Sorted degree lists of the two color classes, white lexicographically
    not less than black; ``swapped`` records whether the colors were exchanged
    to meet that normalization."""

    white: tuple
    black: tuple
    swapped: bool = False

    def __post_init__(self):
        if tuple(sorted(self.white, reverse=True)) != self.white:
            raise PlaneTreeError("white degrees must be non-increasing")
        if tuple(sorted(self.black, reverse=True)) != self.black:
            raise PlaneTreeError("black degrees must be non-increasing")
        if sum(self.white) != sum(self.black):
            raise PlaneTreeError("degree sums differ")
        if self.white < self.black:
            raise PlaneTreeError("white list must be lexicographically >= black")

    @property
    def n_edges(self):
        return sum(self.white)

    def __str__(self):
        w = ",".join(map(str, self.white))
        b = ",".join(map(str, self.black))
        return f"{w}|{b}"

    @classmethod
    def parse(cls, text):
        try:
            w, b = text.split("|")
            white = tuple(sorted((int(x) for x in w.split(",")), reverse=True))
            black = tuple(sorted((int(x) for x in b.split(",")), reverse=True))
        except ValueError as exc:
            raise PlaneTreeError(f"bad passport {text!r}: {exc}") from None
        if any(d < 1 for d in white + black):
            raise PlaneTreeError("degrees must be positive")
        if white < black:
            white, black = black, white
        return cls(white, black)


def _rooted_walk(tree, root, start):
    """Parenthesis walk rooted at ``root``, subtrees ccw from neighbor slot
    ``start``.  Iterative to survive path-like trees."""
    nb = tree.neighbors[root]
    order = nb[start:] + nb[:start]
    out = []
    # stack of (vertex, parent, iterator over remaining children)
    stack = [(root, None, iter(order))]
    while stack:
        v, parent, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            if parent is not None:
                out.append(")")
            continue
        out.append("(")
        cnb = tree.neighbors[child]
        i = cnb.index(v)
        corder = cnb[i + 1:] + cnb[:i]
        stack.append((child, v, iter(corder)))
    return "".join(out)


def _code_key(walk, color):
    return (walk, 0 if color == WHITE else 1)


def plane_code(tree):
    """Canonical code: minimal rooted walk over all (root, start edge)
    choices; ties between root colors resolved in favor of white."""
    best = None
    for v in range(tree.n_vertices):
        deg = tree.degree(v)
        for s in range(max(deg, 1)):
            key = _code_key(_rooted_walk(tree, v, s), tree.colors[v])
            if best is None or key < best:
                best = key
    walk, c = best
    return (WHITE if c == 0 else BLACK) + walk


def parse_plane_code(text):
    """Parse a root-color-prefixed balanced-parenthesis code into a tree.

    Vertex 0 is the root; children keep the ccw order of the string, and a
    non-root vertex lists its parent first.
    """
    if not text or text[0] not in (WHITE, BLACK):
        raise ParseError("code must start with 'W' or 'B'", 0)
    colors = [text[0]]
    neighbors = [[]]
    stack = [0]
    for pos, ch in enumerate(text[1:], start=1):
        if ch == "(":
            parent = stack[-1]
            v = len(colors)
            colors.append(WHITE if colors[parent] == BLACK else BLACK)
            neighbors.append([parent])
            neighbors[parent].append(v)
            stack.append(v)
        elif ch == ")":
            stack.pop()
            if not stack:
                raise ParseError("unbalanced ')'", pos)
        else:
            raise ParseError(f"unexpected character {ch!r}", pos)
    if len(stack) != 1:
        raise ParseError("unbalanced '(' left open", len(text))
    if len(colors) < 2:
        raise ParseError("code encodes no edge", len(text))
    return PlaneTree(colors, neighbors).validate()


def passport_of(tree):
    white = tuple(sorted((tree.degree(v) for v in range(tree.n_vertices)
                          if tree.colors[v] == WHITE), reverse=True))
    black = tuple(sorted((tree.degree(v) for v in range(tree.n_vertices)
                          if tree.colors[v] == BLACK), reverse=True))
    if white < black:
        return Passport(black, white, swapped=True)
    return Passport(white, black, swapped=False)


def invert_colors(tree):
    flip = {WHITE: BLACK, BLACK: WHITE}
    return PlaneTree([flip[c] for c in tree.colors],
                     [list(nb) for nb in tree.neighbors])


def mirror(tree):
    """Reflection: all cyclic orders reversed."""
    return PlaneTree(list(tree.colors),
                     [list(reversed(nb)) for nb in tree.neighbors])


def symmetry_flags(tree):
    """rotational: some vertex admits a nontrivial rotation automorphism;
    mirror: tree is plane-isomorphic to its reflection (colors kept)."""
    rotational = False
    for v in range(tree.n_vertices):
        deg = tree.degree(v)
        if deg < 2:
            continue
        walks = {_rooted_walk(tree, v, s) for s in range(deg)}
        if len(walks) < deg:
            rotational = True
            break
    return {
        "rotational": rotational,
        "mirror": plane_code(mirror(tree)) == plane_code(tree),
    }


@lru_cache(maxsize=None)
def _rooted_shapes(n_edges):
    """All rooted plane tree shapes with n edges as parenthesis strings."""
    if n_edges == 0:
        return ("",)
    shapes = []
    for first in range(1, n_edges + 1):
        # first subtree carries `first` edges (one to its root), rest follow
        for inner in _rooted_shapes(first - 1):
            head = "(" + inner + ")"
            for rest in _rooted_shapes(n_edges - first):
                shapes.append(head + rest)
    return tuple(shapes)


def enumerate_trees(n_edges, dedup_color_swap=True):
    """One representative per plane-isomorphism class with ``n_edges`` edges,
    deduplicated across the color-swap pair, sorted by canonical code.

    Practical for n_edges up to about 10; 12 is a hard soft-limit.
    """
    if not 1 <= n_edges <= 12:
        raise PlaneTreeError("n_edges must be in 1..12")
    canon = {}
    for shape in _rooted_shapes(n_edges):
        for color in (WHITE, BLACK):
            tree = parse_plane_code(color + shape)
            code = plane_code(tree)
            if code not in canon:
                canon[code] = tree
    if dedup_color_swap:
        keep = {}
        for code, tree in canon.items():
            icode = plane_code(invert_colors(tree))
            pp = passport_of(tree)
            if pp.swapped:
                continue
            if not passport_of(canon[icode]).swapped and icode < code:
                # self-dual passport: keep the smaller code of the pair
                continue
            keep[code] = tree
        canon = keep
    return [parse_plane_code(code) for code in sorted(canon)]
