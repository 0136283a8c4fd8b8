class UnionFind:
    """Disjoint sets over the integers ``0..n-1`` (path halving, union by size)."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, i):
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return ri
        if self.size[ri] < self.size[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        self.size[ri] += self.size[rj]
        return ri

    def union_all(self, items):
        items = list(items)
        for other in items[1:]:
            self.union(items[0], other)

    def labels(self, members):
        """Dense component labels for ``members``, numbered by first appearance."""
        seen = {}
        out = []
        for i in members:
            root = self.find(i)
            if root not in seen:
                seen[root] = len(seen)
            out.append(seen[root])
        return out
