"""Boundary curves, domains and spectrally accurate boundary quadrature.

Curves are trigonometric polynomials ``z(t) = sum_k c_k exp(ikt)``.  Hole
curves are authored counterclockwise and reversed on construction so that
the domain always lies to the left of its boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DomainSpecError, GeometryError, ProximityError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class Curve:
    coeffs: np.ndarray
    kmin: int
    role: str = "outer"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self.role not in ("outer", "hole"):
            raise GeometryError(f"unknown curve role {self.role!r}")
        if c.size == 0 or not np.all(np.isfinite(c)):
            raise GeometryError("curve needs finite Fourier coefficients")

    @property
    def modes(self):
        return np.arange(self.kmin, self.kmin + self.coeffs.size)

    def __call__(self, t):
        return self.derivative(t, 0)

    def derivative(self, t, order=1):
        t = np.asarray(t, dtype=float)
        k = self.modes
        c = self.coeffs * (1j * k) ** order
        return np.exp(1j * np.multiply.outer(t, k)) @ c

    def reversed(self):
        """Same point set traversed backwards: z(t) -> z(-t)."""
        kmin = -(self.kmin + self.coeffs.size - 1)
        return Curve(self.coeffs[::-1], kmin, self.role)

    def signed_area(self):
        return math.pi * float(np.sum(self.modes * np.abs(self.coeffs) ** 2))

    @property
    def center(self):
        k = self.modes
        return complex(self.coeffs[k == 0].sum()) if np.any(k == 0) else 0j


@dataclass(frozen=True, eq=False)
class Domain:
    """A bounded finitely connected domain.

    ``holes`` are stored clockwise.  ``hole_anchors[j]`` is a point inside the
    j-th hole; it is the center of the negative-power Hardy basis functions and
    of the logarithmic charges in the Dirichlet solver.
    """

    outer: Curve
    holes: tuple = ()
    hole_anchors: tuple = ()
    name: str = "custom"

    @classmethod
    def from_curves(cls, outer, holes=(), anchors=(), name="custom", validate=True):
        """Build from counterclockwise ``outer`` and ``holes`` (as authored)."""
        outer = Curve(outer.coeffs, outer.kmin, "outer")
        if outer.signed_area() <= 0:
            raise GeometryError("outer curve must be counterclockwise")
        rev = []
        for j, h in enumerate(holes):
            h = Curve(h.coeffs, h.kmin, "hole")
            if h.signed_area() <= 0:
                raise GeometryError(f"hole {j} must be authored counterclockwise")
            rev.append(h.reversed())
        if len(anchors) != len(rev):
            raise GeometryError("need exactly one anchor per hole")
        dom = cls(outer, tuple(rev), tuple(complex(a) for a in anchors), name)
        if validate:
            dom.validate()
        return dom

    @property
    def curves(self):
        return (self.outer,) + self.holes

    @property
    def n(self):
        """Connectivity."""
        return 1 + len(self.holes)

    @cached_property
    def _polygon(self):
        return _polygon(self, 512)

    @cached_property
    def diameter(self):
        z = self._polygon[0]
        return float(np.max(np.abs(z[:, None] - z[None, :])))

    @property
    def eps_geom(self):
        return 1e-8 * self.diameter

    @cached_property
    def bbox(self):
        z = self._polygon[0]
        return (z.real.min(), z.real.max(), z.imag.min(), z.imag.max())

    def validate(self, M=512):
        eps = self.eps_geom
        t = TWO_PI * np.arange(M) / M
        pts = []
        for j, c in enumerate(self.curves):
            speed = np.abs(c.derivative(t))
            if speed.min() < eps:
                raise GeometryError(f"curve {j} has a degenerate parameterization")
            z = c(t)
            d = np.abs(z[:, None] - z[None, :])
            d[np.arange(M), np.arange(M)] = np.inf
            if d.min() < eps:
                raise GeometryError(f"curve {j} is not simple")
            pts.append(z)
        outer = pts[0]
        for j, z in enumerate(pts[1:]):
            if not np.all(_polygon_winding(outer, z) == 1):
                raise GeometryError(f"hole {j} is not strictly inside the outer curve")
            for i, other in enumerate(pts[1:]):
                if i != j and np.any(_polygon_winding(other, z) != 0):
                    raise GeometryError(f"holes {i} and {j} intersect or nest")
            a = np.array([self.hole_anchors[j]])
            # hole curves are clockwise, so the winding about their anchor is -1
            if _polygon_winding(z, a)[0] != -1:
                raise GeometryError(f"anchor of hole {j} is not inside the hole")

    def contains(self, p):
        return contains(self, p)

    def distance_to_boundary(self, p):
        z = self._polygon[0]
        p = np.asarray(p, dtype=complex)
        return np.min(np.abs(np.subtract.outer(p, z)), axis=-1)

    def default_point(self):
        """Deterministic interior point of (nearly) maximal boundary clearance."""
        x0, x1, y0, y1 = self.bbox
        xs = np.linspace(x0, x1, 41)[1:-1]
        ys = np.linspace(y0, y1, 41)[1:-1]
        P = (xs[None, :] + 1j * ys[:, None]).ravel()
        P = P[contains(self, P, strict=False)]
        d = self.distance_to_boundary(P)
        return complex(P[int(np.argmax(d))])

    def to_json(self):
        def enc(c, anchor=None):
            out = {"fourier": [[float(v.real), float(v.imag)] for v in c.coeffs], "kmin": int(c.kmin)}
            if anchor is not None:
                out["anchor"] = [anchor.real, anchor.imag]
            return out

        holes = [enc(h.reversed(), a) for h, a in zip(self.holes, self.hole_anchors)]
        return json.dumps({"outer": enc(self.outer), "holes": holes})


def _polygon(domain, M):
    t = TWO_PI * np.arange(M) / M
    z = np.concatenate([c(t) for c in domain.curves])
    idx = np.repeat(np.arange(domain.n), M)
    return z, idx


def _polygon_winding(poly, points):
    """Integer winding number of a closed polygon about each point."""
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    d = poly[None, :] - points[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        # a point on a vertex gives nan here; callers screen such points first
        ang = np.angle(np.roll(d, -1, axis=1) / d)
    return np.rint(ang.sum(axis=1) / TWO_PI).astype(int)


@dataclass(frozen=True, eq=False)
class BoundaryGrid:
    """Equispaced-parameter quadrature on every boundary curve.

    ``weights`` are arc-length trapezoid weights |z'(t_i)| dt and ``dz`` the
    complex line elements z'(t_i) dt, so that  sum f_i dz_i  approximates the
    contour integral of f over the positively oriented boundary.
    """

    domain: Domain
    M: int
    t: np.ndarray
    nodes: np.ndarray
    tangents: np.ndarray
    weights: np.ndarray
    dz: np.ndarray
    d2z: np.ndarray
    curve_index: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def N(self):
        return self.nodes.size

    @property
    def dt(self):
        return TWO_PI / self.M

    @property
    def spacing(self):
        return float(self.weights.max())

    def curve_slice(self, j):
        return slice(j * self.M, (j + 1) * self.M)

    @property
    def normals(self):
        """Outward unit normals."""
        return -1j * self.tangents

    def refined(self, factor):
        if factor == 1:
            return self
        if factor not in self._cache:
            self._cache[factor] = sample_boundary(self.domain, self.M * factor)
        return self._cache[factor]

    def upsample(self, samples, factor):
        """Trigonometric interpolation of per-curve samples onto ``refined(factor)``."""
        if factor == 1:
            return np.asarray(samples)
        f = np.asarray(samples).reshape(self.domain.n, self.M)
        F = np.fft.fft(f, axis=1)
        Mf = self.M * factor
        G = np.zeros((f.shape[0], Mf), dtype=complex)
        h = self.M // 2
        G[:, :h] = F[:, :h]
        G[:, -h + 1:] = F[:, -h + 1:]
        # split the Nyquist mode symmetrically
        G[:, h] = 0.5 * F[:, h]
        G[:, -h] = 0.5 * F[:, h]
        out = np.fft.ifft(G, axis=1) * factor
        if np.isrealobj(samples):
            out = out.real
        return out.ravel()

    def d_dt(self, samples, order=1):
        """Spectral derivative in the curve parameter, per curve."""
        f = np.asarray(samples, dtype=complex).reshape(self.domain.n, self.M)
        k = np.fft.fftfreq(self.M, d=1.0 / self.M)
        k[self.M // 2] = 0.0
        out = np.fft.ifft((1j * k) ** order * np.fft.fft(f, axis=1), axis=1)
        return out.ravel()

    def d_dz(self, samples):
        """Complex derivative along the boundary of a holomorphic trace."""
        return self.d_dt(samples) * self.dt / self.dz

    def check_same(self, other):
        from .errors import GridMismatchError

        if other is not self and not (
            other.M == self.M and other.domain is self.domain
        ):
            raise GridMismatchError("boundary functions live on different grids")


def sample_boundary(domain: Domain, M: int) -> BoundaryGrid:
    if M < 16 or M % 2:
        raise GeometryError(f"nodes per curve must be even and >= 16, got {M}")
    t = TWO_PI * np.arange(M) / M
    dt = TWO_PI / M
    nodes, d1, d2 = [], [], []
    for j, c in enumerate(domain.curves):
        zp = c.derivative(t)
        if np.min(np.abs(zp)) < domain.eps_geom:
            raise GeometryError(f"curve {j} is degenerate (|z'| vanishes)")
        nodes.append(c(t))
        d1.append(zp)
        d2.append(c.derivative(t, 2))
    zp = np.concatenate(d1)
    speed = np.abs(zp)
    grid = BoundaryGrid(
        domain=domain,
        M=M,
        t=np.tile(t, domain.n),
        nodes=np.concatenate(nodes),
        tangents=zp / speed,
        weights=speed * dt,
        dz=zp * dt,
        d2z=np.concatenate(d2) * dt,
        curve_index=np.repeat(np.arange(domain.n), M),
    )
    for a in ("t", "nodes", "tangents", "weights", "dz", "d2z", "curve_index"):
        getattr(grid, a).setflags(write=False)
    return grid


def contains(domain: Domain, p, strict=True):
    """True where the oriented boundary winds once around ``p``.

    The winding number is the angle sum over an inscribed polygon, refined
    until its spacing is small against the distance from ``p`` to the curve.
    With ``strict`` a point within ``eps_geom`` of the boundary raises
    :class:`ProximityError`; otherwise it is reported as outside.
    """
    scalar = np.ndim(p) == 0
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    out = np.zeros(p.shape, dtype=bool)
    todo = np.ones(p.shape, dtype=bool)
    M = 256
    while np.any(todo):
        poly, _ = _polygon(domain, M)
        h = np.max(np.abs(np.diff(poly[:M])))
        d = np.min(np.abs(p[todo][:, None] - poly[None, :]), axis=1)
        near = d < domain.eps_geom
        if np.any(near):
            if strict:
                raise ProximityError(f"point {p[todo][near][0]} lies on the boundary")
        ok = (d > 2 * h) | (M >= 1 << 16) | near
        idx = np.flatnonzero(todo)[ok]
        w = sum(_polygon_winding(poly[j * M:(j + 1) * M], p[idx]) for j in range(domain.n))
        out[idx] = (w == 1) & ~near[ok]
        todo[idx] = False
        M *= 4
    return bool(out[0]) if scalar else out


def winding_number(domain: Domain, p, M=1024):
    poly, _ = _polygon(domain, M)
    return sum(_polygon_winding(poly[j * M:(j + 1) * M], p) for j in range(domain.n))


# catalog ---------------------------------------------------------------


def _circle(center, radius):
    return Curve(np.array([center, radius], dtype=complex), 0)


def builtin_domain(name: str, *params) -> Domain:
    """Catalog domains: disc, ellipse(b), annulus(rho), three_connected(r, s)."""
    if name == "disc":
        if params:
            raise DomainSpecError("disc takes no parameters")
        return Domain.from_curves(Curve(np.array([1.0]), 1), name="disc")
    if name == "ellipse":
        (b,) = params or (0.6,)
        if not 0 < b:
            raise DomainSpecError("ellipse needs b > 0")
        c = np.array([(1 - b) / 2, 0.0, (1 + b) / 2])
        return Domain.from_curves(Curve(c, -1), name=f"ellipse:{b:g}")
    if name == "annulus":
        (rho,) = params or (0.3,)
        if not 0 < rho < 1:
            raise DomainSpecError("annulus needs 0 < rho < 1")
        return Domain.from_curves(
            Curve(np.array([1.0]), 1), [Curve(np.array([rho]), 1)], [0.0], name=f"annulus:{rho:g}"
        )
    if name == "three_connected":
        r, s = params or (0.2, 0.5)
        if not (0 < r < s and s + r < 1):
            raise DomainSpecError("three_connected needs 0 < r < s and r + s < 1")
        holes = [_circle(-s, r), _circle(s, r)]
        return Domain.from_curves(
            Curve(np.array([1.0]), 1), holes, [-s, s], name=f"three_connected:{r:g},{s:g}"
        )
    raise DomainSpecError(f"unknown catalog domain {name!r}")


def parse_domain(spec: str) -> Domain:
    """Catalog name with optional ``:p1,p2`` parameters, or a JSON file path."""
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        return load_domain(path)
    name, _, args = spec.partition(":")
    try:
        params = [float(x) for x in args.split(",")] if args else []
    except ValueError:
        raise DomainSpecError(f"bad domain parameters in {spec!r}") from None
    return builtin_domain(name, *params)


def _decode_curve(obj, what):
    try:
        coeffs = np.array([complex(re, im) for re, im in obj["fourier"]])
        kmin = int(obj["kmin"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainSpecError(f"malformed {what}: {exc}") from None
    return Curve(coeffs, kmin)


def load_domain(path) -> Domain:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DomainSpecError(f"cannot read domain file {path}: {exc}") from None
    if not isinstance(data, dict) or "outer" not in data:
        raise DomainSpecError("domain file needs an 'outer' curve")
    outer = _decode_curve(data["outer"], "outer curve")
    holes, anchors = [], []
    for j, h in enumerate(data.get("holes", [])):
        holes.append(_decode_curve(h, f"hole {j}"))
        try:
            re, im = h["anchor"]
        except (KeyError, TypeError, ValueError):
            raise DomainSpecError(f"hole {j} needs an 'anchor'") from None
        anchors.append(complex(re, im))
    return Domain.from_curves(outer, holes, anchors, name=Path(path).stem)
