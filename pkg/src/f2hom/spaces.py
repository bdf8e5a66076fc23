"""Small standard triangulations used by tests, the CLI suites and examples."""

from __future__ import annotations

from .simplicial import SimplicialComplex


def point() -> SimplicialComplex:
    return SimplicialComplex.from_facets(1, [])


def interval() -> SimplicialComplex:
    return SimplicialComplex.from_facets(2, [(0, 1)])


def circle(n: int = 3) -> SimplicialComplex:
    if n < 3:
        raise ValueError("a simplicial circle needs at least 3 vertices")
    return SimplicialComplex.from_facets(n, [(i, (i + 1) % n) for i in range(n)])


def filled_triangle() -> SimplicialComplex:
    return SimplicialComplex.from_facets(3, [(0, 1, 2)])


def sphere() -> SimplicialComplex:
    """Boundary of the tetrahedron."""
    return SimplicialComplex.from_facets(4, [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])


RP2_TRIANGLES = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
    (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3),
]


def rp2() -> SimplicialComplex:
    """Six-vertex projective plane (quotient of the icosahedron by the antipodal map)."""
    return SimplicialComplex.from_facets(6, RP2_TRIANGLES)


def torus() -> SimplicialComplex:
    """Seven-vertex torus: triangles {i,i+1,i+3} and {i,i+2,i+3} mod 7."""
    tris = []
    for i in range(7):
        tris.append((i, (i + 1) % 7, (i + 3) % 7))
        tris.append((i, (i + 2) % 7, (i + 3) % 7))
    return SimplicialComplex.from_facets(7, tris)


def standard_spaces() -> dict[str, SimplicialComplex]:
    return {
        "point": point(),
        "interval": interval(),
        "circle": circle(),
        "triangle": filled_triangle(),
        "sphere": sphere(),
        "rp2": rp2(),
        "torus": torus(),
    }
