"""Weighted simplicial complexes with PL metrics, subdivision, balls, volumes.

A complex is specified by its maximal simplices and a global edge-length map.
Each maximal simplex carries the flat metric determined by its edge lengths;
sharing the lengths globally makes the metrics agree on common faces.  The
distance on the complex is approximated by shortest paths on a metric graph
whose nodes are the vertices of the k-fold barycentric subdivision and whose
arcs are straight chords between nodes lying in a common maximal simplex
(chords are exact path lengths, so graph distances never underestimate the
PL distance and converge to it under refinement).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DimensionMismatch, NondegenerateViolation

_FULL_MATRIX_LIMIT = 6000


def _pair_index(d):
    """Lexicographic (i, j) pairs for the edges of a d-simplex."""
    return list(itertools.combinations(range(d + 1), 2))


def simplex_volume(edge_lengths):
    """Euclidean d-volume of a simplex given its edge lengths.

    The lengths are listed in lexicographic vertex-pair order
    (d01, d02, ..., d0d, d12, ...).  Raises NondegenerateViolation when the
    lengths satisfy no positive-volume embedding (Cayley-Menger test).
    """
    m = len(edge_lengths)
    d = (math.isqrt(1 + 8 * m) - 1) // 2
    if d < 1 or d * (d + 1) // 2 != m:
        raise ValueError(f"{m} lengths match no d-simplex edge pattern")
    lengths = [float(x) for x in edge_lengths]
    if any(x <= 0 for x in lengths):
        raise NondegenerateViolation("edge lengths must be positive")
    cm = np.ones((d + 2, d + 2))
    cm[0, 0] = 0.0
    np.fill_diagonal(cm[1:, 1:], 0.0)
    for (i, j), length in zip(_pair_index(d), lengths):
        cm[i + 1, j + 1] = cm[j + 1, i + 1] = length * length
    det = np.linalg.det(cm)
    vol2 = (-1) ** (d + 1) * det / (2**d * math.factorial(d) ** 2)
    scale = max(lengths) ** (2 * d)
    if vol2 <= 1e-14 * scale:
        raise NondegenerateViolation(
            f"degenerate simplex: squared volume {vol2:.3e} from lengths {lengths}"
        )
    return math.sqrt(vol2)


def _embed_simplex(d, length_of):
    """Coordinates in R^d for a d-simplex, vertex 0 at the origin.

    ``length_of(i, j)`` returns the edge length between local vertices.
    """
    gram = np.empty((d, d))
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            between = 0.0 if i == j else length_of(i, j)
            gram[i - 1, j - 1] = 0.5 * (
                length_of(0, i) ** 2 + length_of(0, j) ** 2 - between**2
            )
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        # Cayley-Menger validation has already passed; absorb tiny negative
        # eigenvalue drift instead of failing.
        w, v = np.linalg.eigh(gram)
        if w.min() < -1e-9 * max(w.max(), 1.0):
            raise NondegenerateViolation("Gram matrix is not positive semidefinite")
        chol = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
    coords = np.zeros((d + 1, d))
    coords[1:] = chol
    return coords


class WeightedComplex:
    """Pure n-dimensional complex: maximal simplices plus an edge-length map."""

    def __init__(self, dimension, simplices, edge_lengths, metadata=None):
        if dimension < 1:
            raise ValueError("dimension must be at least 1")
        self.dimension = int(dimension)
        seen = set()
        normalized = []
        for simplex in simplices:
            cell = tuple(sorted(int(v) for v in simplex))
            if len(cell) != dimension + 1 or len(set(cell)) != dimension + 1:
                raise ValueError(f"simplex {simplex} is not a {dimension}-simplex")
            if cell not in seen:
                seen.add(cell)
                normalized.append(cell)
        if not normalized:
            raise ValueError("a complex needs at least one maximal simplex")
        self.simplices = tuple(normalized)
        self.edge_lengths = {}
        for key, value in dict(edge_lengths).items():
            u, v = sorted(key)
            if float(value) <= 0:
                raise ValueError(f"edge ({u}, {v}) has nonpositive length")
            self.edge_lengths[(int(u), int(v))] = float(value)
        self.vertices = tuple(sorted({v for cell in self.simplices for v in cell}))
        self.metadata = dict(metadata or {})
        for cell in self.simplices:
            # raises NondegenerateViolation for impossible metrics
            simplex_volume(self.simplex_edge_lengths(cell))
        self._geometries = {}

    def edge_length(self, u, v):
        key = (u, v) if u < v else (v, u)
        try:
            return self.edge_lengths[key]
        except KeyError:
            raise ValueError(f"missing length for edge {key}") from None

    def simplex_edge_lengths(self, simplex):
        return [
            self.edge_length(simplex[i], simplex[j])
            for i, j in _pair_index(len(simplex) - 1)
        ]

    def geometry(self, depth=2):
        """The subdivided metric realization at the given refinement depth."""
        if depth < 0:
            raise ValueError("subdivision depth must be nonnegative")
        if depth not in self._geometries:
            self._geometries[depth] = ComplexGeometry(self, depth)
        return self._geometries[depth]

    def to_json(self):
        return {
            "dimension": self.dimension,
            "simplices": [list(cell) for cell in self.simplices],
            "edge_lengths": [
                [u, v, length] for (u, v), length in sorted(self.edge_lengths.items())
            ],
            "metadata": dict(sorted(self.metadata.items())),
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            data["dimension"],
            [tuple(cell) for cell in data["simplices"]],
            {(u, v): length for u, v, length in data["edge_lengths"]},
            metadata=data.get("metadata"),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_json(), handle, indent=2, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as handle:
            return cls.from_json(json.load(handle))


class MetricGraph:
    """Shortest-path metric on the sample nodes of a subdivided complex."""

    def __init__(self, n_nodes, arcs):
        self.n_nodes = n_nodes
        rows, cols, data = [], [], []
        neighbors = [[] for _ in range(n_nodes)]
        for (a, b), length in arcs.items():
            rows.extend((a, b))
            cols.extend((b, a))
            data.extend((length, length))
            neighbors[a].append(b)
            neighbors[b].append(a)
        self._matrix = csr_matrix(
            (np.asarray(data), (np.asarray(rows), np.asarray(cols))),
            shape=(n_nodes, n_nodes),
        )
        self.neighbors = [np.array(sorted(adj), dtype=np.int64) for adj in neighbors]
        self._rows = {}
        self._full = None

    def distances_from(self, node):
        """Distances from one node to every node (cached)."""
        if self._full is not None:
            return self._full[node]
        row = self._rows.get(node)
        if row is None:
            row = dijkstra(self._matrix, indices=node)
            self._rows[node] = row
        return row

    def all_distances(self):
        """The full distance matrix; only sensible for small node counts."""
        if self._full is None:
            if self.n_nodes > _FULL_MATRIX_LIMIT:
                raise MemoryError(
                    f"{self.n_nodes} nodes exceed the all-pairs limit"
                )
            self._full = dijkstra(self._matrix)
            self._rows = {}
        return self._full

    def distance(self, a, b):
        return float(self.distances_from(a)[b])

    def diameter(self):
        return float(self.all_distances().max())


@dataclass(frozen=True)
class Ball:
    """Nodes within graph distance r of the center and fully-inside cells."""

    center: int
    radius: float
    nodes: frozenset
    cells: tuple


def _support_key(support):
    return tuple(sorted(support.items()))


class ComplexGeometry:
    """A weighted complex subdivided k times, with metric graph and volumes.

    Nodes are the vertices of the k-fold barycentric subdivision, identified
    by their exact barycentric coordinates over the original vertices.  Cells
    are the maximal simplices of the subdivision.
    """

    def __init__(self, base: WeightedComplex, depth: int):
        self.base = base
        self.depth = depth
        self.dim = base.dimension
        n = self.dim

        # embed every original maximal simplex
        self._orig_coords = []
        for cell in base.simplices:
            lengths = {
                (i, j): base.edge_length(cell[i], cell[j])
                for i, j in _pair_index(n)
            }
            self._orig_coords.append(
                _embed_simplex(n, lambda i, j, L=lengths: L[(min(i, j), max(i, j))])
            )

        # node registry keyed by exact barycentric coordinates
        self._node_key_to_id = {}
        self._node_supports = []

        def register(support):
            key = _support_key(support)
            node = self._node_key_to_id.get(key)
            if node is None:
                node = len(self._node_supports)
                self._node_key_to_id[key] = node
                self._node_supports.append(support)
            return node

        for vertex in base.vertices:
            register({vertex: Fraction(1)})

        cells = []
        cell_orig = []
        for index, cell in enumerate(base.simplices):
            cells.append(tuple(register({v: Fraction(1)}) for v in cell))
            cell_orig.append(index)

        # Beyond depth 2 the chord graph is restricted to node pairs sharing
        # a cell of this coarser scope depth, which keeps the arc count near
        # linear while still refining the metric.
        scope_depth = max(0, depth - 2)
        cell_scope = list(range(len(cells))) if scope_depth == 0 else None

        for round_index in range(depth):
            new_cells = []
            new_orig = []
            new_scope = [] if cell_scope is not None else None
            for index, (cell, orig) in enumerate(zip(cells, cell_orig)):
                scope = cell_scope[index] if cell_scope is not None else None
                sub = {}
                for size in range(1, n + 2):
                    for subset in itertools.combinations(cell, size):
                        support = {}
                        for node in subset:
                            for vertex, frac in self._node_supports[node].items():
                                support[vertex] = (
                                    support.get(vertex, Fraction(0)) + frac
                                )
                        share = Fraction(1, size)
                        sub[subset] = register(
                            {v: f * share for v, f in support.items()}
                        )
                for perm in itertools.permutations(cell):
                    flag = tuple(
                        sub[tuple(sorted(perm[: j + 1]))] for j in range(n + 1)
                    )
                    new_cells.append(tuple(sorted(flag)))
                    new_orig.append(orig)
                    if new_scope is not None:
                        new_scope.append(scope)
            cells, cell_orig = new_cells, new_orig
            if new_scope is not None:
                cell_scope = new_scope
            elif round_index + 1 == scope_depth:
                cell_scope = list(range(len(cells)))

        if cell_scope is None:
            cell_scope = list(range(len(cells)))

        self.cells = tuple(cells)
        self.cell_orig = np.asarray(cell_orig, dtype=np.int64)
        self.cells_array = np.asarray(cells, dtype=np.int64)
        self.n_nodes = len(self._node_supports)

        # nodes per original simplex, with their embedded positions
        orig_vertex_index = [
            {v: i for i, v in enumerate(cell)} for cell in base.simplices
        ]
        orig_nodes = [dict() for _ in base.simplices]
        for cell, orig in zip(self.cells, self.cell_orig):
            table = orig_nodes[orig]
            for node in cell:
                if node not in table:
                    support = self._node_supports[node]
                    position = np.zeros(n)
                    lookup = orig_vertex_index[orig]
                    for vertex, frac in support.items():
                        position += float(frac) * self._orig_coords[orig][lookup[vertex]]
                    table[node] = position
        self._orig_nodes = orig_nodes

        self._node_origs = [[] for _ in range(self.n_nodes)]
        for orig, table in enumerate(orig_nodes):
            for node in table:
                self._node_origs[node].append(orig)

        scope_nodes = {}
        for cell, orig, scope in zip(self.cells, self.cell_orig, cell_scope):
            group = scope_nodes.setdefault(scope, (int(orig), set()))[1]
            group.update(cell)
        arcs = {}
        for scope in sorted(scope_nodes):
            orig, group = scope_nodes[scope]
            table = orig_nodes[orig]
            members = sorted(group)
            points = np.array([table[node] for node in members])
            for i, a in enumerate(members):
                deltas = points[i + 1 :] - points[i]
                lengths = np.sqrt((deltas * deltas).sum(axis=1))
                for b, length in zip(members[i + 1 :], lengths):
                    arcs[(a, b)] = float(length)
        self.graph = MetricGraph(self.n_nodes, arcs)

        self.cell_volumes = np.array(
            [self._cell_volume(cell, orig) for cell, orig in zip(cells, cell_orig)]
        )
        self.max_cell_diameter = max(
            max(
                float(np.linalg.norm(orig_nodes[orig][a] - orig_nodes[orig][b]))
                for a, b in itertools.combinations(cell, 2)
            )
            for cell, orig in zip(cells, cell_orig)
        )
        self._face_volume_cache = {}
        self._face_sets = {}

    # -- basic queries ----------------------------------------------------

    @property
    def root(self):
        return self

    @property
    def cell_tuples(self):
        return self.cells

    def node_position(self, node, orig=None):
        if orig is None:
            orig = self._node_origs[node][0]
        return self._orig_nodes[orig][node]

    def node_barycentric(self, node):
        """Exact barycentric coordinates of a node over the original vertices."""
        return dict(self._node_supports[node])

    def _cell_volume(self, cell, orig):
        table = self._orig_nodes[orig]
        pts = np.array([table[node] for node in cell])
        diffs = pts[1:] - pts[0]
        gram = diffs @ diffs.T
        det = float(np.linalg.det(gram)) if len(diffs) else 1.0
        return math.sqrt(max(det, 0.0)) / math.factorial(len(cell) - 1)

    def face_volume(self, face):
        """k-volume of a face of the subdivision; 0-faces count as 1 each."""
        face = tuple(face)
        if len(face) == 1:
            return 1.0
        cached = self._face_volume_cache.get(face)
        if cached is None:
            common = set(self._node_origs[face[0]])
            for node in face[1:]:
                common &= set(self._node_origs[node])
            if not common:
                raise DimensionMismatch(f"{face} does not lie in one simplex")
            orig = min(common)
            table = self._orig_nodes[orig]
            pts = np.array([table[node] for node in face])
            diffs = pts[1:] - pts[0]
            gram = diffs @ diffs.T
            det = float(np.linalg.det(gram))
            cached = math.sqrt(max(det, 0.0)) / math.factorial(len(face) - 1)
            self._face_volume_cache[face] = cached
        return cached

    def faces(self, dim):
        """All dim-faces of the maximal cells, as sorted vertex tuples."""
        if dim not in self._face_sets:
            faces = set()
            for cell in self.cells:
                faces.update(itertools.combinations(cell, dim + 1))
            self._face_sets[dim] = faces
        return self._face_sets[dim]

    def total_area(self):
        return float(self.cell_volumes.sum())

    # -- balls -------------------------------------------------------------

    def ball(self, center, r):
        """Nodes within graph distance r, and cells all of whose nodes are."""
        if r <= 0:
            raise ValueError("ball radius must be positive")
        dist = self.graph.distances_from(center)
        node_ids = np.nonzero(dist <= r)[0]
        full = (dist[self.cells_array] <= r).all(axis=1)
        return Ball(
            center=center,
            radius=float(r),
            nodes=frozenset(int(v) for v in node_ids),
            cells=tuple(self.cells[i] for i in np.nonzero(full)[0]),
        )

    def ball_volume_detail(self, center, r):
        """(volume, boundary credit) of the graph ball around a node.

        Cells with every node inside count fully; cells with some nodes
        inside count by node fraction.  The boundary credit (total volume of
        partially counted cells) bounds the crediting error.
        """
        dist = self.graph.distances_from(center)
        inside = dist[self.cells_array] <= r
        counts = inside.sum(axis=1)
        size = self.dim + 1
        full = counts == size
        partial = (counts > 0) & ~full
        volume = float(self.cell_volumes[full].sum())
        volume += float((self.cell_volumes[partial] * counts[partial] / size).sum())
        boundary = float(self.cell_volumes[partial].sum())
        return volume, boundary

    def ball_volume(self, center, r):
        return self.ball_volume_detail(center, r)[0]

    # -- export -------------------------------------------------------------

    def as_weighted_complex(self):
        """Flatten the current subdivision into a depth-0 weighted complex.

        Node ids are preserved: node k of this geometry becomes vertex k of
        the returned complex, and vertex k of the result is node k of its
        own depth-0 geometry.
        """
        edge_lengths = {}
        for cell, orig in zip(self.cells, self.cell_orig):
            table = self._orig_nodes[orig]
            for a, b in itertools.combinations(cell, 2):
                edge_lengths[(a, b)] = float(np.linalg.norm(table[a] - table[b]))
        return WeightedComplex(
            self.dim, self.cells, edge_lengths, metadata=dict(self.base.metadata)
        )


class Subpolyhedron:
    """A pure (d-1)-dimensional set of faces of a parent's d-cells."""

    def __init__(self, parent, cells):
        self.parent = parent
        self.dim = parent.dim - 1
        if self.dim < 0:
            raise DimensionMismatch("parent is already 0-dimensional")
        normalized = sorted({tuple(sorted(cell)) for cell in cells})
        allowed = parent_faces(parent)
        for cell in normalized:
            if len(cell) != self.dim + 1:
                raise DimensionMismatch(
                    f"cell {cell} is not a {self.dim}-cell of the parent"
                )
            if cell not in allowed:
                raise DimensionMismatch(f"cell {cell} is not a face of the parent")
        self.cells = tuple(normalized)

    @property
    def root(self) -> ComplexGeometry:
        parent = self.parent
        while isinstance(parent, Subpolyhedron):
            parent = parent.parent
        return parent

    @property
    def cell_tuples(self):
        return self.cells

    def total_area(self):
        root = self.root
        return float(sum(root.face_volume(cell) for cell in self.cells))

    def __len__(self):
        return len(self.cells)

    def __contains__(self, cell):
        return tuple(sorted(cell)) in set(self.cells)


def parent_faces(parent):
    """The facet set of a geometry or subpolyhedron (cells one dim down)."""
    if isinstance(parent, ComplexGeometry):
        return parent.faces(parent.dim - 1)
    facets = set()
    for cell in parent.cell_tuples:
        facets.update(itertools.combinations(cell, len(cell) - 1))
    return facets


def total_area(obj):
    """d-volume of a geometry or subpolyhedron (counting measure in dim 0)."""
    if isinstance(obj, (ComplexGeometry, Subpolyhedron)):
        return obj.total_area()
    raise TypeError(f"cannot measure {type(obj).__name__}")
