"""Upper half-plane model: points, real Mobius maps, Busemann functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

from hypercrit.errors import InvalidInputError

TOL = 1e-9
DET_TOL = 1e-12

INF = math.inf


@dataclass(frozen=True, slots=True)
class PlanePoint:
    re: float
    im: float

    def __post_init__(self) -> None:
        if not (self.im > 0) or not math.isfinite(self.re) or not math.isfinite(self.im):
            raise InvalidInputError(f"plane point needs finite coordinates and im > 0, got ({self.re}, {self.im})")

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def from_complex(cls, z: complex) -> "PlanePoint":
        return cls(z.real, z.imag)


@dataclass(frozen=True, slots=True)
class PlaneIsometry:
    """z -> (az + b)/(cz + d) with ad - bc = 1, identified with its negation."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > DET_TOL:
            raise InvalidInputError(f"determinant must be 1 (got {det!r})")

    @classmethod
    def normalized(cls, a: float, b: float, c: float, d: float) -> "PlaneIsometry":
        det = a * d - b * c
        if det <= 0:
            raise InvalidInputError("orientation-preserving maps need a positive determinant")
        s = math.sqrt(det)
        return cls(a / s, b / s, c / s, d / s)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "PlaneIsometry") -> "PlaneIsometry":
        return PlaneIsometry(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "PlaneIsometry":
        return PlaneIsometry(self.d, -self.b, -self.c, self.a)

    def is_identity(self, tol: float = TOL) -> bool:
        for s in (1.0, -1.0):
            if (
                abs(self.a - s) <= tol
                and abs(self.d - s) <= tol
                and abs(self.b) <= tol
                and abs(self.c) <= tol
            ):
                return True
        return False

    def close_to(self, other: "PlaneIsometry", tol: float = TOL) -> bool:
        mine = (self.a, self.b, self.c, self.d)
        theirs = (other.a, other.b, other.c, other.d)
        return any(
            all(abs(x - s * y) <= tol for x, y in zip(mine, theirs)) for s in (1.0, -1.0)
        )

    def apply(self, p: PlanePoint) -> PlanePoint:
        z = p.z
        return PlanePoint.from_complex((self.a * z + self.b) / (self.c * z + self.d))

    def apply_boundary(self, x: float) -> float:
        """Action on the real line with the point at infinity."""
        if x == INF or x == -INF:
            return INF if self.c == 0 else self.a / self.c
        den = self.c * x + self.d
        if den == 0:
            return INF
        return (self.a * x + self.b) / den

    def to_list(self) -> list[float]:
        return [self.a, self.b, self.c, self.d]


def dist(p: PlanePoint, q: PlanePoint) -> float:
    dz = abs(p.z - q.z)
    # 2 asinh(|p - q| / (2 sqrt(Im p Im q))) is stable for nearby points
    return 2.0 * math.asinh(dz / (2.0 * math.sqrt(p.im * q.im)))


def gromov_product(p: PlanePoint, q: PlanePoint, base: PlanePoint) -> float:
    return 0.5 * (dist(p, base) + dist(q, base) - dist(p, q))


def _to_infinity(xi: float) -> PlaneIsometry:
    """A map sending the boundary point xi to infinity."""
    return PlaneIsometry(0.0, -1.0, 1.0, -xi)


def busemann(xi: float, p: PlanePoint, q: PlanePoint) -> float:
    if xi == INF or xi == -INF:
        return math.log(q.im) - math.log(p.im)
    if not math.isfinite(xi):
        raise InvalidInputError(f"invalid boundary point {xi!r}")
    g = _to_infinity(xi)
    return busemann(INF, g.apply(p), g.apply(q))


def classify(g: PlaneIsometry) -> str:
    if g.is_identity():
        return "identity"
    t = abs(g.trace)
    if t > 2.0 + TOL:
        return "hyperbolic"
    if t >= 2.0 - TOL:
        return "parabolic"
    return "elliptic"


def _boundary_derivative(g: PlaneIsometry, x: float) -> float:
    if x == INF:
        # multiplier at infinity in the chart w = -1/z, valid when c = 0
        return g.d / g.a
    return 1.0 / (g.c * x + g.d) ** 2


def axis_endpoints(g: PlaneIsometry) -> tuple[float, float]:
    """(repelling, attracting) fixed points on the boundary."""
    if classify(g) != "hyperbolic":
        raise InvalidInputError("axis endpoints need a hyperbolic isometry")
    a, b, c, d = g.a, g.b, g.c, g.d
    if abs(c) <= TOL * max(1.0, abs(a), abs(d)):
        fixed = [INF, b / (d - a)]
    else:
        disc = math.sqrt((d - a) ** 2 + 4.0 * b * c)
        fixed = [((a - d) - disc) / (2.0 * c), ((a - d) + disc) / (2.0 * c)]
    f0, f1 = fixed
    if abs(_boundary_derivative(g, f0)) < 1.0:
        return f1, f0
    return f0, f1


def translation_length(g: PlaneIsometry) -> float:
    if classify(g) != "hyperbolic":
        raise InvalidInputError("translation length needs a hyperbolic isometry")
    return 2.0 * math.acosh(abs(g.trace) / 2.0)
