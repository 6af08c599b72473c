"""
Periodic framework fragments: labelled joints, unit bars, lattice generators
and the integer relations among generators.

A fragment is exchanged as JSON (lossless) or written as a Wavefront-style
OBJ polyline file (labels dropped).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geom3 import GEOM_TOL

DEFAULT_RANK_TOL = 1e-9


class StructureError(ValueError):
    """Edge or relation indices do not fit the realization."""


class FrameworkParseError(ValueError):
    """A framework document does not follow the JSON schema.

    ``path`` names the offending field, e.g. ``vertices[2].pos[1]``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class PeriodicRealization:
    vertices: tuple[tuple[str, np.ndarray], ...]
    edges: tuple[tuple[int, int], ...] = ()
    generators: tuple[tuple[str, np.ndarray], ...] = ()
    relations: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(
            (str(lab), _frozen(pos)) for lab, pos in self.vertices))
        object.__setattr__(self, "edges", tuple((int(i), int(j)) for i, j in self.edges))
        object.__setattr__(self, "generators", tuple(
            (str(lab), _frozen(vec)) for lab, vec in self.generators))
        object.__setattr__(self, "relations", tuple(
            tuple(int(c) for c in row) for row in self.relations))

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _ in self.vertices]

    @property
    def positions(self) -> np.ndarray:
        """Vertex positions as an (n, 3) array."""
        if not self.vertices:
            return np.zeros((0, 3))
        return np.array([pos for _, pos in self.vertices])

    def vertex(self, label: str) -> np.ndarray:
        for lab, pos in self.vertices:
            if lab == label:
                return pos
        raise KeyError(label)

    def generator(self, label: str) -> np.ndarray:
        for lab, vec in self.generators:
            if lab == label:
                return vec
        raise KeyError(label)

    def generator_matrix(self) -> np.ndarray:
        """Generators as the columns of a 3 x k matrix."""
        if not self.generators:
            return np.zeros((3, 0))
        return np.array([vec for _, vec in self.generators]).T

    def edge_lengths(self) -> np.ndarray:
        self.check_structure()
        pos = self.positions
        return np.array([np.linalg.norm(pos[j] - pos[i]) for i, j in self.edges])

    def relation_residuals(self) -> np.ndarray:
        self.check_structure()
        G = self.generator_matrix()
        return np.array([np.linalg.norm(G @ np.asarray(row, dtype=float))
                         for row in self.relations])

    def check_structure(self):
        n = len(self.vertices)
        for k, (i, j) in enumerate(self.edges):
            if not (0 <= i < n and 0 <= j < n):
                raise StructureError(f"edge {k} = ({i}, {j}) out of range for {n} vertices")
        k = len(self.generators)
        for r, row in enumerate(self.relations):
            if len(row) != k:
                raise StructureError(
                    f"relation {r} has {len(row)} coefficients for {k} generators")


def _frozen(v) -> np.ndarray:
    a = np.array(v, dtype=float).reshape(3)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ValidationReport:
    max_edge_length_error: float
    max_relation_residual: float
    lattice_rank: int
    smallest_lattice_singular_value: float
    passed: bool
    tol: float = GEOM_TOL

    def summary(self) -> str:
        return (f"edge_error={self.max_edge_length_error:.3e} "
                f"relation_residual={self.max_relation_residual:.3e} "
                f"lattice_rank={self.lattice_rank} "
                f"sigma_min={self.smallest_lattice_singular_value:.3e} "
                f"pass={'true' if self.passed else 'false'}")


def lattice_singular_values(generators: np.ndarray) -> np.ndarray:
    """Singular values (descending, always 3 of them) of a 3 x k generator matrix."""
    G = np.asarray(generators, dtype=float).reshape(3, -1)
    s = np.linalg.svd(G, compute_uv=False) if G.shape[1] else np.zeros(0)
    return np.concatenate([s, np.zeros(3 - len(s))]) if len(s) < 3 else s[:3]


def lattice_rank(generators: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    return int(np.sum(lattice_singular_values(generators) > tol))


def validate(realization: PeriodicRealization, tol: float = GEOM_TOL,
             rank_tol: float = DEFAULT_RANK_TOL) -> ValidationReport:
    """Check unit edges, generator relations, and that the lattice has rank 3.

    ``tol`` bounds edge-length and relation errors. The rank threshold is
    kept separate (``rank_tol``) so that a looser ``tol`` never turns a
    passing realization into a failing one.
    """
    realization.check_structure()
    lengths = realization.edge_lengths()
    edge_err = float(np.max(np.abs(lengths - 1.0))) if len(lengths) else 0.0
    res = realization.relation_residuals()
    rel_err = float(np.max(res)) if len(res) else 0.0
    sv = lattice_singular_values(realization.generator_matrix())
    rank = int(np.sum(sv > rank_tol))
    ok = edge_err < tol and rel_err < tol and rank == 3
    return ValidationReport(edge_err, rel_err, rank, float(sv[-1]), ok, tol)


def determinant_triples(generators: np.ndarray) -> list[tuple[tuple[int, int, int], float]]:
    """Determinants of every 3-subset of generator columns, in lexicographic order."""
    G = np.asarray(generators, dtype=float).reshape(3, -1)
    return [(idx, float(np.linalg.det(G[:, list(idx)])))
            for idx in combinations(range(G.shape[1]), 3)]


# --- serialization -------------------------------------------------------

def format_float(x: float) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValueError("non-finite value cannot be serialized")
    return f"{x:.17g}"


def dumps(obj) -> str:
    """Compact JSON writer with 17 significant digits for every float.

    Handles dicts (key order kept), lists/tuples, numpy arrays, str, bool,
    int and float.
    """
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + dumps(v) for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_document(realization: PeriodicRealization) -> dict:
    return {
        "vertices": [{"label": lab, "pos": [float(c) for c in pos]}
                     for lab, pos in realization.vertices],
        "edges": [[i, j] for i, j in realization.edges],
        "generators": [{"label": lab, "vec": [float(c) for c in vec]}
                       for lab, vec in realization.generators],
        "relations": [list(row) for row in realization.relations],
    }


def export_json(realization: PeriodicRealization) -> bytes:
    return dumps(to_document(realization)).encode("utf-8")


def export_obj(realization: PeriodicRealization) -> bytes:
    lines = ["v " + " ".join(format_float(c) for c in pos) for _, pos in realization.vertices]
    lines += [f"l {i + 1} {j + 1}" for i, j in realization.edges]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _expect(cond: bool, path: str, message: str):
    if not cond:
        raise FrameworkParseError(path, message)


def _number(x, path: str) -> float:
    _expect(isinstance(x, (int, float)) and not isinstance(x, bool), path, "expected a number")
    _expect(bool(np.isfinite(x)), path, "expected a finite number")
    return float(x)


def _integer(x, path: str) -> int:
    _expect(isinstance(x, int) and not isinstance(x, bool), path, "expected an integer")
    return x


def _triple(x, path: str) -> list[float]:
    _expect(isinstance(x, list) and len(x) == 3, path, "expected a list of 3 numbers")
    return [_number(c, f"{path}[{k}]") for k, c in enumerate(x)]


def _labelled(items, key: str, vec_key: str) -> list:
    _expect(isinstance(items, list), key, "expected a list")
    out = []
    for k, item in enumerate(items):
        path = f"{key}[{k}]"
        _expect(isinstance(item, dict), path, "expected an object")
        _expect("label" in item, f"{path}.label", "missing field")
        _expect(isinstance(item["label"], str), f"{path}.label", "expected a string")
        _expect(vec_key in item, f"{path}.{vec_key}", "missing field")
        out.append((item["label"], _triple(item[vec_key], f"{path}.{vec_key}")))
    return out


def from_document(doc) -> PeriodicRealization:
    _expect(isinstance(doc, dict), "$", "expected a JSON object")
    for key in ("vertices", "edges", "generators", "relations"):
        _expect(key in doc, key, "missing field")
    vertices = _labelled(doc["vertices"], "vertices", "pos")
    generators = _labelled(doc["generators"], "generators", "vec")
    _expect(isinstance(doc["edges"], list), "edges", "expected a list")
    edges = []
    for k, e in enumerate(doc["edges"]):
        _expect(isinstance(e, list) and len(e) == 2, f"edges[{k}]", "expected [i, j]")
        edges.append((_integer(e[0], f"edges[{k}][0]"), _integer(e[1], f"edges[{k}][1]")))
    _expect(isinstance(doc["relations"], list), "relations", "expected a list")
    relations = []
    for k, row in enumerate(doc["relations"]):
        _expect(isinstance(row, list), f"relations[{k}]", "expected a list of integers")
        relations.append([_integer(c, f"relations[{k}][{n}]") for n, c in enumerate(row)])
    real = PeriodicRealization(vertices, edges, generators, relations)
    try:
        real.check_structure()
    except StructureError as exc:
        raise FrameworkParseError("$", str(exc)) from exc
    return real


def import_json(data) -> PeriodicRealization:
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FrameworkParseError("$", f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise FrameworkParseError("$", f"invalid JSON: {exc}") from exc
    return from_document(doc)


def single_tetrahedron(labels=("P0", "P1", "P2", "P3"), corners=None) -> PeriodicRealization:
    """A lone regular unit tetrahedron, mostly useful for tests and demos."""
    if corners is None:
        corners = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0),
                   (0.5, np.sqrt(3) / 2, 0.0), (0.5, np.sqrt(3) / 6, np.sqrt(6) / 3)]
    return PeriodicRealization(list(zip(labels, corners)), tetrahedron_edges(range(4)))


def tetrahedron_edges(indices) -> list[tuple[int, int]]:
    return list(combinations(list(indices), 2))
