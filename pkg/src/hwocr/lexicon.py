"""Dictionary machinery: minimal acyclic word graphs, wordlists, ambiguity table.

The DAWG builder uses incremental construction over a sorted wordlist with
suffix sharing, so the result is the minimal deterministic acyclic
automaton for the word set. Serialized form: magic "SDWG", version byte,
little-endian node records.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "ALPHABET",
    "WordList",
    "Dawg",
    "DawgNode",
    "AmbigRule",
    "AmbigTable",
    "DawgFormatError",
    "build_dawg",
    "dawg_lookup",
    "serialize_dawg",
    "deserialize_dawg",
    "parse_wordlist",
    "serialize_wordlist",
    "parse_ambigs",
    "serialize_ambigs",
]

ALPHABET = "abcdefghijklmnopqrstuvwxyz"
_MAGIC = b"SDWG"
_VERSION = 1


class DawgFormatError(ValueError):
    """Corrupt or unsupported serialized dawg."""


@dataclass(frozen=True)
class WordList:
    """Deduplicated sorted words, lowercase a-z only."""

    words: tuple[str, ...] = ()

    def __post_init__(self):
        for w in self.words:
            if not w:
                raise ValueError("empty word in wordlist")
            if any(c not in ALPHABET for c in w):
                raise ValueError(f"word {w!r} contains characters outside a-z")
        object.__setattr__(self, "words", tuple(sorted(set(self.words))))

    def __len__(self):
        return len(self.words)


@dataclass(frozen=True)
class DawgNode:
    final: bool
    edges: tuple[tuple[str, int], ...]  # (label, target index), sorted by label


@dataclass(frozen=True)
class Dawg:
    """Minimal acyclic automaton; node 0 is the root."""

    nodes: tuple[DawgNode, ...]

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(n.edges) for n in self.nodes)

    @property
    def is_empty(self) -> bool:
        return self.node_count == 1 and not self.nodes[0].final and not self.nodes[0].edges

    def step(self, state: int, label: str) -> int | None:
        for c, target in self.nodes[state].edges:
            if c == label:
                return target
            if c > label:
                return None
        return None

    def accepts(self, word: str) -> bool:
        state = 0
        for ch in word:
            nxt = self.step(state, ch)
            if nxt is None:
                return False
            state = nxt
        return self.nodes[state].final

    def iter_words(self):
        """All accepted words, lexicographic order."""
        stack = [(0, "")]
        while stack:
            state, prefix = stack.pop()
            node = self.nodes[state]
            if node.final:
                yield prefix
            for label, target in reversed(node.edges):
                stack.append((target, prefix + label))


EMPTY_DAWG = Dawg(nodes=(DawgNode(final=False, edges=()),))


# ---------------------------------------------------------------------------
# Construction

class _BuildNode:
    __slots__ = ("final", "edges")

    def __init__(self):
        self.final = False
        self.edges: dict[str, "_BuildNode"] = {}


def _signature(node: _BuildNode):
    return (node.final, tuple((c, id(t)) for c, t in sorted(node.edges.items())))


def build_dawg(words: WordList | Iterable[str]) -> Dawg:
    """Minimal DAWG accepting exactly the given word set."""
    wl = words if isinstance(words, WordList) else WordList(tuple(words))
    if not wl.words:
        return EMPTY_DAWG

    register: dict[tuple, _BuildNode] = {}
    root = _BuildNode()
    # path of not-yet-minimized states for the previous word
    unchecked: list[tuple[_BuildNode, str, _BuildNode]] = []
    previous = ""

    def minimize(down_to: int):
        for parent, label, child in reversed(unchecked[down_to:]):
            sig = _signature(child)
            found = register.get(sig)
            if found is not None:
                parent.edges[label] = found
            else:
                register[sig] = child
        del unchecked[down_to:]

    for word in wl.words:
        common = 0
        limit = min(len(word), len(previous))
        while common < limit and word[common] == previous[common]:
            common += 1
        minimize(common)
        node = unchecked[-1][2] if unchecked else root
        for ch in word[common:]:
            nxt = _BuildNode()
            node.edges[ch] = nxt
            unchecked.append((node, ch, nxt))
            node = nxt
        node.final = True
        previous = word
    minimize(0)

    # freeze: breadth-first numbering from the root, edges in label order
    index: dict[int, int] = {id(root): 0}
    ordered = [root]
    queue = [root]
    while queue:
        node = queue.pop(0)
        for _, child in sorted(node.edges.items()):
            if id(child) not in index:
                index[id(child)] = len(ordered)
                ordered.append(child)
                queue.append(child)
    nodes = tuple(
        DawgNode(
            final=n.final,
            edges=tuple((c, index[id(t)]) for c, t in sorted(n.edges.items())),
        )
        for n in ordered
    )
    return Dawg(nodes=nodes)


def dawg_lookup(dawg: Dawg, word: str) -> bool:
    return dawg.accepts(word)


# ---------------------------------------------------------------------------
# Serialization

def serialize_dawg(dawg: Dawg) -> bytes:
    out = [_MAGIC, bytes([_VERSION]), struct.pack("<I", dawg.node_count)]
    for node in dawg.nodes:
        out.append(bytes([1 if node.final else 0, len(node.edges)]))
        for label, target in node.edges:
            out.append(bytes([ord(label)]))
            out.append(struct.pack("<I", target))
    return b"".join(out)


def deserialize_dawg(data: bytes) -> Dawg:
    """Parse and validate: magic, bounds, edge ordering and acyclicity."""
    if len(data) < 11:
        raise DawgFormatError("truncated dawg: missing header")
    if data[:4] != _MAGIC:
        raise DawgFormatError(f"bad magic {data[:4]!r}")
    if data[4] != _VERSION:
        raise DawgFormatError(f"unsupported version {data[4]}")
    (count,) = struct.unpack_from("<I", data, 5)
    pos = 9
    nodes = []
    for i in range(count):
        if pos + 2 > len(data):
            raise DawgFormatError(f"truncated dawg at node {i}")
        final, n_edges = data[pos], data[pos + 1]
        if final not in (0, 1):
            raise DawgFormatError(f"node {i}: bad final flag {final}")
        pos += 2
        edges = []
        for j in range(n_edges):
            if pos + 5 > len(data):
                raise DawgFormatError(f"truncated dawg at node {i} edge {j}")
            label = chr(data[pos])
            (target,) = struct.unpack_from("<I", data, pos + 1)
            if label not in ALPHABET:
                raise DawgFormatError(f"node {i}: label {label!r} outside a-z")
            if target >= count:
                raise DawgFormatError(f"node {i}: dangling edge target {target}")
            if edges and label <= edges[-1][0]:
                raise DawgFormatError(f"node {i}: edges not strictly sorted")
            edges.append((label, target))
            pos += 5
        nodes.append(DawgNode(final=bool(final), edges=tuple(edges)))
    if pos != len(data):
        raise DawgFormatError(f"{len(data) - pos} trailing bytes after node records")
    if count == 0:
        raise DawgFormatError("dawg must have at least the root node")

    # acyclicity: peel nodes with zero in-degree
    indegree = [0] * count
    for node in nodes:
        for _, target in node.edges:
            indegree[target] += 1
    frontier = [i for i in range(count) if indegree[i] == 0]
    seen = 0
    while frontier:
        i = frontier.pop()
        seen += 1
        for _, target in nodes[i].edges:
            indegree[target] -= 1
            if indegree[target] == 0:
                frontier.append(target)
    if seen != count:
        raise DawgFormatError("cycle detected in dawg")
    return Dawg(nodes=tuple(nodes))


# ---------------------------------------------------------------------------
# Wordlists and the ambiguity table

def parse_wordlist(data: bytes | str) -> WordList:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    return WordList(tuple(ln for ln in text.split("\n") if ln != ""))


def serialize_wordlist(wl: WordList) -> bytes:
    return "".join(w + "\n" for w in wl.words).encode("utf-8")


@dataclass(frozen=True)
class AmbigRule:
    wrong: str
    right: str

    def __post_init__(self):
        if not self.wrong or not self.right:
            raise ValueError("ambiguity rule sides must be non-empty")


@dataclass(frozen=True)
class AmbigTable:
    """Confusable-sequence table; advisory only, never rewrites output."""

    rules: tuple[AmbigRule, ...] = ()

    def __len__(self):
        return len(self.rules)


def parse_ambigs(data: bytes | str) -> AmbigTable:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rules = []
    seen = set()
    for line_no, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValueError(f"line {line_no}: expected 'wrong<TAB>right', got {line!r}")
        pair = (parts[0], parts[1])
        if pair not in seen:
            seen.add(pair)
            rules.append(AmbigRule(*pair))
    return AmbigTable(rules=tuple(rules))


def serialize_ambigs(table: AmbigTable) -> bytes:
    return "".join(f"{r.wrong}\t{r.right}\n" for r in table.rules).encode("utf-8")
