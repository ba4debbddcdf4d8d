"""Union-find over dense integer ids, used to quotient graphs."""
from typing import Dict, List


class UnionFind:
    def __init__(self, size: int = 0):
        self.parent: List[int] = list(range(size))

    def make_set(self) -> int:
        # fresh id at the end
        new_id = len(self.parent)
        self.parent.append(new_id)
        return new_id

    def find(self, item: int) -> int:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        # path compression
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        # lower id wins so renumbering stays stable
        if ra < rb:
            self.parent[rb] = ra
            return ra
        self.parent[ra] = rb
        return rb

    def dense_labels(self) -> Dict[int, int]:
        """Map every id to a class number 0..k-1, ordered by smallest member"""
        labels: Dict[int, int] = {}
        result: Dict[int, int] = {}
        for item in range(len(self.parent)):
            root = self.find(item)
            if root not in labels:
                labels[root] = len(labels)
            result[item] = labels[root]
        return result
