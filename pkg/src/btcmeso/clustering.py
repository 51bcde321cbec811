"""Address-to-user clustering and user-graph construction.

Two heuristics merge addresses into users while processing transactions in
chronological order: all inputs of one transaction belong to one user, and a
lone fresh output paid strictly less than every input is treated as change
returning to the sender. Ambiguous cases merge nothing.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from .digraph import UserGraph
from .errors import ContractViolationError
from .records import TimeWindow, TransactionRecord


class UserPartition:
    """Disjoint sets of addresses, growing monotonically as records arrive.

    `seen_addresses` holds every address observed in strictly earlier
    transactions; the change heuristic relies on it. A user's stable key is
    the lexicographically smallest address it contains.
    """

    def __init__(self):
        self._parent: dict[str, str] = {}
        self._size: dict[str, int] = {}
        self._min_addr: dict[str, str] = {}
        self._members: dict[str, list[str]] = {}
        self.seen_addresses: set[str] = set()

    def __len__(self) -> int:
        return len(self._parent)

    @property
    def n_users(self) -> int:
        return len(self._members)

    def add(self, addr: str) -> None:
        if addr not in self._parent:
            self._parent[addr] = addr
            self._size[addr] = 1
            self._min_addr[addr] = addr
            self._members[addr] = [addr]

    def find(self, addr: str) -> str:
        self.add(addr)
        root = addr
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[addr] != root:
            self._parent[addr], addr = root, self._parent[addr]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size.pop(rb)
        self._min_addr[ra] = min(self._min_addr[ra], self._min_addr.pop(rb))
        self._members[ra].extend(self._members.pop(rb))

    def user_key(self, addr: str) -> str:
        """Stable user id: smallest address in the cluster."""
        return self._min_addr[self.find(addr)]

    def user_addresses(self, addr: str) -> tuple[str, ...]:
        return tuple(sorted(self._members[self.find(addr)]))

    def user_keys(self) -> list[str]:
        return sorted(self._min_addr[root] for root in self._members)

    def observe(self, tx: TransactionRecord) -> None:
        """Register every address of `tx` and mark it as seen."""
        for addr in tx.addresses():
            self.add(addr)
            self.seen_addresses.add(addr)


def apply_multi_input(partition: UserPartition, tx: TransactionRecord) -> UserPartition:
    """Merge all input addresses of `tx` into one user."""
    first = None
    for addr, _ in tx.inputs:
        partition.add(addr)
        if first is None:
            first = addr
        else:
            partition.union(first, addr)
    return partition


def apply_change_address(
    partition: UserPartition,
    tx: TransactionRecord,
    seen_addresses: set[str] | None = None,
) -> UserPartition:
    """Merge a change-like output with the input user.

    Fires only when exactly one output address is new (never seen in a
    strictly earlier transaction) and the amount paid to it is strictly lower
    than every input amount. The merge target is the first input's user, so
    run after `apply_multi_input` when both heuristics are enabled.
    """
    if not tx.inputs:
        return partition
    seen = partition.seen_addresses if seen_addresses is None else seen_addresses

    totals: dict[str, int] = {}
    for addr, amount in tx.outputs:
        totals[addr] = totals.get(addr, 0) + amount
    new_addrs = [addr for addr in totals if addr not in seen]
    if len(new_addrs) != 1:
        return partition
    candidate = new_addrs[0]
    if totals[candidate] < min(amount for _, amount in tx.inputs):
        partition.add(candidate)
        partition.union(tx.inputs[0][0], candidate)
    return partition


def process_transactions(
    records: Sequence[TransactionRecord],
    multi_input: bool = True,
    change_address: bool = True,
    partition: UserPartition | None = None,
) -> UserPartition:
    """Run the enabled heuristics over `records` in chronological order.

    Coinbase transactions are carried through (their outputs become singleton
    users) but trigger no merges. Pass an existing partition to continue a
    cumulative run across windows.
    """
    for prev, cur in zip(records, records[1:]):
        if (prev.timestamp, prev.tx_id) > (cur.timestamp, cur.tx_id):
            raise ContractViolationError("records must be processed in chronological order")
    if partition is None:
        partition = UserPartition()
    for tx in records:
        if tx.inputs:
            if multi_input:
                apply_multi_input(partition, tx)
            if change_address:
                apply_change_address(partition, tx)
        partition.observe(tx)
    return partition


def build_user_graph(
    records: Iterable[TransactionRecord],
    partition: UserPartition,
    window: TimeWindow | None = None,
) -> UserGraph:
    """Directed, unweighted user graph for one window.

    Nodes are the users touched by the window's transactions; an edge u->v
    exists when some transaction spends from u and pays v. Self-loops
    (change or intra-user transfers) are dropped; parallel transactions
    collapse to one edge. The partition must already reflect every record up
    to the window's end.
    """
    touched: set[str] = set()
    edge_keys: set[tuple[str, str]] = set()
    for tx in records:
        in_users = {partition.user_key(a) for a, _ in tx.inputs}
        out_users = {partition.user_key(a) for a, _ in tx.outputs}
        touched |= in_users
        touched |= out_users
        for u in in_users:
            for v in out_users:
                if u != v:
                    edge_keys.add((u, v))
    users = tuple(sorted(touched))
    index = {key: i for i, key in enumerate(users)}
    edges = {(index[u], index[v]) for u, v in edge_keys}
    return UserGraph(len(users), edges, users=users, window=window)


def format_edge_list(g: UserGraph) -> str:
    """Edge-list text export: node count, edge count, then `u v` lines."""
    lines = [str(g.n), str(g.m)]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def write_edge_list(g: UserGraph, path) -> None:
    Path(path).write_text(format_edge_list(g), encoding="utf-8", newline="\n")


def write_user_map(g: UserGraph, partition: UserPartition, path) -> None:
    """JSON sidecar mapping node id to the user's address list."""
    mapping = {str(i): list(partition.user_addresses(key)) for i, key in enumerate(g.users)}
    Path(path).write_text(
        json.dumps(mapping, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )
