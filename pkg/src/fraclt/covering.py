"""Adaptive k-ary covering of a cube by mass threshold, family grouping and exclusion functionals."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .density import Density
from .errors import InternalError, InvalidParameterError, NonTerminationError, PreconditionError
from .geometry import Cube, lattice_center_relation, lattice_offsets, subdivide
from .quadrature import ErrorEstimate
from .reports import InequalityReport

EPS = np.finfo(float).eps


@dataclass
class CoveringNode:
    cube: Cube
    mass: ErrorEstimate
    parent: int | None
    index: tuple
    children: list = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class FamilyGroup:
    members: list          # leaf positions in CoveringPartition.leaf_nodes
    min_volume: float
    seed: int              # node id whose children are the smallest members

    def to_dict(self):
        return {"members": list(self.members), "min_volume": self.min_volume, "seed": self.seed}


@dataclass
class CoveringPartition:
    root: Cube
    k: int
    lam: float
    nodes: list
    leaf_nodes: list
    families: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.root.dim

    @property
    def leaves(self) -> list:
        return [(self.nodes[i].cube, self.nodes[i].mass) for i in self.leaf_nodes]

    def leaf_masses(self) -> np.ndarray:
        return np.array([float(self.nodes[i].mass) for i in self.leaf_nodes])

    def leaf_stderr(self) -> np.ndarray:
        return np.array([self.nodes[i].mass.stderr for i in self.leaf_nodes])

    def leaf_volumes(self) -> np.ndarray:
        # exact depth-based volume avoids drift from repeated division of the side
        d = self.dim
        return np.array([self.root.volume * float(self.k) ** (-d * self.nodes[i].cube.depth)
                         for i in self.leaf_nodes])

    def leaf_depths(self) -> np.ndarray:
        return np.array([self.nodes[i].cube.depth for i in self.leaf_nodes])

    def center_property(self) -> dict:
        """Exact lattice check of the odd-k center property."""
        sharing = 0
        far = 0
        for i in self.leaf_nodes:
            node = self.nodes[i]
            shares, ok = lattice_center_relation(node.index, node.cube.depth - self.root.depth, self.k)
            sharing += shares
            far += (not shares) and ok
        n = len(self.leaf_nodes)
        holds = sharing == 1 and far == n - 1
        return {"applicable": self.k % 2 == 1, "center_leaves": sharing, "far_leaves": far,
                "holds": bool(holds)}

    def to_dict(self) -> dict:
        leaves = []
        for i in self.leaf_nodes:
            node = self.nodes[i]
            leaves.append({"center": list(node.cube.center), "side": node.cube.side,
                           "depth": node.cube.depth, "mass": float(node.mass),
                           "stderr": node.mass.stderr})
        return {"root": self.root.to_dict(), "k": self.k, "lambda": self.lam, "leaves": leaves,
                "families": [f.members for f in self.families]}


def build_covering(f: Density, Q0: Cube, lam: float, k: int, max_depth: int = 40,
                   group: bool = True) -> CoveringPartition:
    """Split cubes whose mass reaches lam until every leaf carries mass below lam.

    A cube splits when its mass plus the mass error estimate is >= lam, so each
    leaf satisfies mass + stderr < lam.
    """
    if not lam > 0:
        raise InvalidParameterError("lambda must be positive")
    if int(k) != k or k < 2:
        raise InvalidParameterError("k must be an integer >= 2")
    k = int(k)
    m0 = f.mass(Q0)
    if float(m0) < lam:
        raise PreconditionError(f"mass of the root cube {float(m0):.6g} is below lambda={lam}")
    nodes = [CoveringNode(Q0, m0, None, (0,) * Q0.dim)]
    offsets = lattice_offsets(k, Q0.dim)
    frontier = [0]
    level = 0
    while frontier:
        to_split = [i for i in frontier if float(nodes[i].mass) + nodes[i].mass.stderr >= lam]
        if not to_split:
            break
        if level >= max_depth:
            bad = nodes[to_split[0]]
            raise NonTerminationError(
                f"max_depth={max_depth} reached with cube mass {float(bad.mass):.6g} >= lambda",
                cube=bad.cube)
        new_cubes, parents, indices = [], [], []
        for i in to_split:
            node = nodes[i]
            for child, off in zip(subdivide(node.cube, k), offsets):
                new_cubes.append(child)
                parents.append(i)
                indices.append(tuple(k * a + b for a, b in zip(node.index, off)))
        masses = f.masses(new_cubes)
        frontier = []
        for cube, m, p, idx in zip(new_cubes, masses, parents, indices):
            nodes.append(CoveringNode(cube, m, p, idx))
            nid = len(nodes) - 1
            nodes[p].children.append(nid)
            frontier.append(nid)
        level += 1
    leaf_nodes = [i for i, n in enumerate(nodes) if n.is_leaf]
    partition = CoveringPartition(Q0, k, float(lam), nodes, leaf_nodes)
    if group:
        partition.families = group_families(partition)
    return partition


def group_families(partition: CoveringPartition) -> list:
    """Bottom-up greedy grouping of leaves into families.

    Seeds are internal nodes whose children are all leaves, deepest first.  A
    family takes the seed's children and then, climbing towards the root, the
    leaf children of each ancestor not yet visited by an earlier family.
    """
    nodes = partition.nodes
    position = {nid: pos for pos, nid in enumerate(partition.leaf_nodes)}
    seeds = [i for i, n in enumerate(nodes)
             if n.children and all(nodes[c].is_leaf for c in n.children)]
    seeds.sort(key=lambda i: (-nodes[i].cube.depth, nodes[i].index))
    consumed = set()
    assigned = set()
    families = []
    for seed in seeds:
        if seed in consumed:
            raise InternalError("seed node visited twice")
        members = list(nodes[seed].children)
        consumed.add(seed)
        node = nodes[seed].parent
        while node is not None and node not in consumed:
            members.extend(c for c in nodes[node].children if nodes[c].is_leaf and c not in assigned)
            consumed.add(node)
            node = nodes[node].parent
        if assigned.intersection(members):
            raise InternalError("leaf assigned to two families")
        assigned.update(members)
        min_volume = nodes[nodes[seed].children[0]].cube.volume
        families.append(FamilyGroup(sorted(position[m] for m in members), min_volume, seed))
    if len(assigned) != len(partition.leaf_nodes):
        raise InternalError("family grouping left leaves unassigned")
    return families


def covering_constant_a(k: int, d: int, alpha: float) -> float:
    """Constant a of the covering guarantee."""
    if not alpha > 0:
        raise InvalidParameterError("alpha must be positive")
    if k < 2:
        raise InvalidParameterError("k must be >= 2")
    kd = float(k) ** d
    denom = float(k) ** (d * alpha) - 1.0
    return kd / 2 * (1 + math.sqrt(1 + (1 - 1 / kd) / denom))


def covering_constant_b(k: int, d: int, alpha: float, q: float, lam: float) -> float:
    """Constant b of the weak covering guarantee; nonpositive values are returned with a warning."""
    if not lam > 0:
        raise InvalidParameterError("lambda must be positive")
    if q < 0:
        raise InvalidParameterError("q must be nonnegative")
    kd = float(k) ** d
    kda = float(k) ** (d * alpha)
    b = (1 - q * kd / lam) * (kda - 1) / (kda + kd - 2)
    if b <= 0:
        warnings.warn(f"b = {b:.4g} is not positive because lambda <= q k^d", RuntimeWarning)
    return b


@dataclass(frozen=True)
class CoveringConstants:
    k: int
    d: int
    alpha: float
    q: float
    lam: float
    a: float
    b: float

    @property
    def b_positive(self) -> bool:
        return self.b > 0


def covering_constants(k, d, alpha, q, lam) -> CoveringConstants:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        b = covering_constant_b(k, d, alpha, q, lam)
    return CoveringConstants(k, d, alpha, q, lam, covering_constant_a(k, d, alpha), b)


def _leaf_arrays(partition):
    return partition.leaf_masses(), partition.leaf_stderr(), partition.leaf_volumes()


def _sum_report(name, terms, errs, details) -> InequalityReport:
    value = math.fsum(terms)
    tol = math.fsum(errs) + 8 * EPS * math.fsum(abs(t) for t in terms)
    return InequalityReport(name, value, 0.0, tol, details)


def exclusion_terms(partition, alpha, a):
    m, err, vol = _leaf_arrays(partition)
    w = vol ** (-alpha)
    c = partition.lam / a
    return w * (m * m - c * m), w * (np.abs(2 * m - c) * err + err * err)


def exclusion_functional(partition: CoveringPartition, alpha: float, a: float) -> InequalityReport:
    """sum_Q |Q|^-alpha (m_Q^2 - (lam/a) m_Q), expected to be >= 0."""
    terms, errs = exclusion_terms(partition, alpha, a)
    return _sum_report("exclusion_functional", terms, errs,
                       {"alpha": alpha, "a": a, "lambda": partition.lam, "leaves": len(terms)})


def weak_exclusion_functional(partition: CoveringPartition, alpha: float, q: float,
                              b: float) -> InequalityReport:
    """sum_Q |Q|^-alpha ([m_Q - q]_+ - b m_Q), expected to be >= 0."""
    m, err, vol = _leaf_arrays(partition)
    w = vol ** (-alpha)
    terms = w * (np.maximum(m - q, 0.0) - b * m)
    errs = w * err * (1 + abs(b))
    return _sum_report("weak_exclusion_functional", terms, errs,
                       {"alpha": alpha, "q": q, "b": b, "lambda": partition.lam, "leaves": len(terms)})


def local_exclusion_rhs(partition: CoveringPartition, s: float, d: int | None = None) -> float:
    """sum_Q [m_Q^2 - m_Q]_+ / (2 d^s |Q|^(2s/d))."""
    if not s > 0:
        raise InvalidParameterError("s must be positive")
    d = partition.dim if d is None else d
    m, _, vol = _leaf_arrays(partition)
    return math.fsum(np.maximum(m * m - m, 0.0) / (2 * d ** s * vol ** (2 * s / d)))


def family_totals(partition: CoveringPartition, alpha: float, a: float) -> list:
    """Exclusion functional restricted to each family, as (total, tol) pairs."""
    terms, errs = exclusion_terms(partition, alpha, a)
    out = []
    for fam in partition.families:
        t = terms[fam.members]
        out.append((math.fsum(t), math.fsum(errs[fam.members]) + 8 * EPS * math.fsum(np.abs(t))))
    return out


def check_family_invariants(partition: CoveringPartition, alpha: float, a: float) -> dict:
    """Verify the three structural family properties plus nonnegative family totals."""
    k_d = partition.k ** partition.dim
    depths = partition.leaf_depths()
    masses = partition.leaf_masses()
    errs = partition.leaf_stderr()
    failures = []
    for n, fam in enumerate(partition.families):
        fam_depths = depths[fam.members]
        deepest = fam_depths.max()
        smallest = [i for i in fam.members if depths[i] == deepest]
        if len(smallest) != k_d:
            failures.append((n, "smallest count", len(smallest)))
        union = math.fsum(masses[smallest])
        if union + math.fsum(errs[smallest]) < partition.lam:
            failures.append((n, "smallest union mass", union))
        for depth in set(fam_depths.tolist()) - {deepest}:
            count = int(np.sum(fam_depths == depth))
            if count > k_d - 1:
                failures.append((n, f"members at depth {depth}", count))
    totals = family_totals(partition, alpha, a)
    for n, (tot, tol) in enumerate(totals):
        if tot < -tol:
            failures.append((n, "family total", tot))
    return {"families": len(partition.families), "failures": failures, "holds": not failures,
            "min_family_total": min((t for t, _ in totals), default=0.0)}
