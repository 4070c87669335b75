"""Coreference chains: link sets, partitions, and transitive closure."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

CONSECUTIVE = "consecutive"
ALL_PAIRS = "all-pairs"
STRATEGIES = (CONSECUTIVE, ALL_PAIRS)


class ChainError(ValueError):
    """Malformed link or partition, or an endpoint outside the universe."""


def canon_link(a: str, b: str) -> tuple[str, str]:
    """Canonical form of an undirected link. Self links are invalid."""
    if a == b:
        raise ChainError(f"self link not allowed: {a!r}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class LinkSet:
    """Set of undirected coreference links between phrase ids."""

    links: frozenset[tuple[str, str]]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "LinkSet":
        return cls(frozenset(canon_link(a, b) for a, b in pairs))

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(sorted(self.links))

    def __len__(self) -> int:
        return len(self.links)

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return canon_link(*pair) in self.links

    def endpoints(self) -> frozenset[str]:
        return frozenset(itertools.chain.from_iterable(self.links))


EMPTY_LINKS = LinkSet(frozenset())


@dataclass(frozen=True)
class ChainPartition:
    """Partition of a document's phrases into coreference chains.

    Members of a chain are listed in document order; chains are listed by
    the position of their first member.
    """

    chains: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        index: dict[str, int] = {}
        for i, chain in enumerate(self.chains):
            if not chain:
                raise ChainError("empty chain")
            for pid in chain:
                if pid in index:
                    raise ChainError(f"phrase {pid!r} appears in more than one chain")
                index[pid] = i
        object.__setattr__(self, "_index", index)

    @property
    def members(self) -> frozenset[str]:
        return frozenset(self._index)

    def chain_of(self, phrase_id: str) -> tuple[str, ...]:
        try:
            return self.chains[self._index[phrase_id]]
        except KeyError:
            raise ChainError(f"unknown phrase {phrase_id!r}") from None

    def same_chain(self, a: str, b: str) -> bool:
        try:
            return self._index[a] == self._index[b]
        except KeyError as exc:
            raise ChainError(f"unknown phrase {exc.args[0]!r}") from None

    def as_sets(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(chain) for chain in self.chains)


class _UnionFind:
    """Dict-based union-find with path compression."""

    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def add(self, x: str) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def close(links: LinkSet | Iterable[tuple[str, str]], universe: Iterable[str]) -> ChainPartition:
    """Transitive closure of a link set over `universe`.

    `universe` supplies the phrase ids and their document order; ids that
    appear in no link become singleton chains.  Unordered universes are
    sorted so the result is deterministic.
    """
    if not isinstance(links, LinkSet):
        links = LinkSet.from_pairs(links)
    order = sorted(universe) if isinstance(universe, (set, frozenset)) else list(universe)
    known = set(order)
    if len(known) != len(order):
        raise ChainError("duplicate phrase id in universe")
    uf = _UnionFind()
    for pid in order:
        uf.add(pid)
    for a, b in links:
        if a not in known:
            raise ChainError(f"link endpoint {a!r} outside universe")
        if b not in known:
            raise ChainError(f"link endpoint {b!r} outside universe")
        uf.union(a, b)
    groups: dict[str, list[str]] = {}
    for pid in order:
        groups.setdefault(uf.find(pid), []).append(pid)
    return ChainPartition(tuple(tuple(g) for g in groups.values()))


def explicit_links(partition: ChainPartition, strategy: str = CONSECUTIVE) -> LinkSet:
    """Explicit links carried by a partition.

    CONSECUTIVE yields |chain| - 1 links between document-order-adjacent
    members; ALL_PAIRS yields every within-chain pair.
    """
    if strategy == CONSECUTIVE:
        pairs = (
            (chain[i], chain[i + 1])
            for chain in partition.chains
            for i in range(len(chain) - 1)
        )
    elif strategy == ALL_PAIRS:
        pairs = (
            pair for chain in partition.chains for pair in itertools.combinations(chain, 2)
        )
    else:
        raise ChainError(f"unknown strategy {strategy!r}")
    return LinkSet.from_pairs(pairs)


def in_closure(partition: ChainPartition, link: tuple[str, str]) -> bool:
    """True iff the link's endpoints share a chain.  Self links are rejected."""
    a, b = canon_link(*link)
    return partition.same_chain(a, b)
