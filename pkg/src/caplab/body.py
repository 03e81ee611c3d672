"""Closed convex boundary curves: supporting lines, caps, and covering numbers.

A body is an ordered, counterclockwise list of smooth boundary pieces (arcs,
graph segments, straight segments, support-function arcs) closing up to a
convex loop.  Cap extraction works piece-analytically: the contact point of a
supporting line is located exactly, and cap endpoints are found by monotone
bisection along the boundary, so cap lengths stay accurate down to distances
of 1e-12 where a fixed polyline would lose everything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBodyError, DegenerateCapError, DomainError, ResolutionError
from .numerics import cumulative_gauss, gauss_rule, golden_max

_TWO_PI = 2.0 * math.pi


def _unit(theta):
    v = np.asarray(theta, dtype=float).reshape(2)
    n = math.hypot(v[0], v[1])
    if n == 0:
        raise DomainError("direction must be a nonzero vector")
    return v / n


@dataclass(frozen=True)
class Frame:
    """Similarity transform p -> scale * R(angle) p + shift."""

    scale: float = 1.0
    angle: float = 0.0
    shift: tuple = (0.0, 0.0)

    def apply(self, pts):
        c, s = math.cos(self.angle), math.sin(self.angle)
        x, y = pts[..., 0], pts[..., 1]
        out = np.empty_like(pts)
        out[..., 0] = self.scale * (c * x - s * y) + self.shift[0]
        out[..., 1] = self.scale * (s * x + c * y) + self.shift[1]
        return out

    def apply_vec(self, vec):
        c, s = math.cos(self.angle), math.sin(self.angle)
        x, y = vec[..., 0], vec[..., 1]
        out = np.empty_like(vec)
        out[..., 0] = self.scale * (c * x - s * y)
        out[..., 1] = self.scale * (s * x + c * y)
        return out

    def pull_direction(self, theta):
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([c * theta[0] + s * theta[1], -s * theta[0] + c * theta[1]])

    def compose(self, scale, angle, shift):
        c, s = math.cos(angle), math.sin(angle)
        sx, sy = self.shift
        new_shift = (
            scale * (c * sx - s * sy) + shift[0],
            scale * (s * sx + c * sy) + shift[1],
        )
        return Frame(self.scale * scale, self.angle + angle, new_shift)


class Piece:
    """One smooth boundary piece, parametrized by u in [0, 1], oriented CCW."""

    def point(self, u):
        raise NotImplementedError

    def velocity(self, u):
        raise NotImplementedError

    def transformed(self, scale=1.0, angle=0.0, shift=(0.0, 0.0)):
        raise NotImplementedError

    def support_max(self, theta):
        """(u*, value) maximizing point(u) . theta over the piece."""
        raise NotImplementedError

    def speed(self, u):
        v = self.velocity(np.atleast_1d(np.asarray(u, dtype=float)))
        return np.hypot(v[..., 0], v[..., 1])

    def arclength(self, u0=0.0, u1=1.0, order=24):
        x, w = gauss_rule(order)
        us = u0 + (u1 - u0) * x
        return float(np.dot(self.speed(us), w) * (u1 - u0))

    def _golden_support(self, theta, iters=60):
        th = np.asarray(theta, dtype=float)

        def val(u):
            p = self.point(np.array([u]))
            return float(p[0, 0] * th[0] + p[0, 1] * th[1])

        u, v = golden_max(val, 0.0, 1.0, iters=iters)
        for ue in (0.0, 1.0):
            ve = val(ue)
            if ve > v:
                u, v = ue, ve
        return u, v


class SegmentPiece(Piece):
    def __init__(self, p0, p1):
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)

    def point(self, u):
        u = np.asarray(u, dtype=float)[..., None]
        return self.p0 + u * (self.p1 - self.p0)

    def velocity(self, u):
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(self.p1 - self.p0, u.shape + (2,)).copy()

    def support_max(self, theta):
        v0 = float(self.p0 @ theta)
        v1 = float(self.p1 @ theta)
        return (0.0, v0) if v0 >= v1 else (1.0, v1)

    def transformed(self, scale=1.0, angle=0.0, shift=(0.0, 0.0)):
        f = Frame(scale, angle, shift)
        return SegmentPiece(f.apply(self.p0[None, :])[0], f.apply(self.p1[None, :])[0])


class ArcPiece(Piece):
    """Circular arc, CCW from angle a0 to a1 (span kept <= pi/2 by builders)."""

    def __init__(self, center, radius, a0, a1):
        if a1 <= a0:
            raise DomainError("arc angles must be increasing")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.a0 = float(a0)
        self.a1 = float(a1)

    def _phi(self, u):
        return self.a0 + np.asarray(u, dtype=float) * (self.a1 - self.a0)

    def point(self, u):
        phi = self._phi(u)
        return self.center + self.radius * np.stack([np.cos(phi), np.sin(phi)], axis=-1)

    def velocity(self, u):
        phi = self._phi(u)
        span = self.a1 - self.a0
        return self.radius * span * np.stack([-np.sin(phi), np.cos(phi)], axis=-1)

    def support_max(self, theta):
        alpha = math.atan2(theta[1], theta[0])
        # bring alpha into [a0, a0 + 2pi) and test membership in the span
        rel = (alpha - self.a0) % _TWO_PI
        base = float(self.center @ theta)
        if rel <= self.a1 - self.a0:
            return rel / (self.a1 - self.a0), base + self.radius
        v0 = base + self.radius * math.cos(self.a0 - alpha)
        v1 = base + self.radius * math.cos(self.a1 - alpha)
        return (0.0, v0) if v0 >= v1 else (1.0, v1)

    def transformed(self, scale=1.0, angle=0.0, shift=(0.0, 0.0)):
        f = Frame(scale, angle, shift)
        return ArcPiece(
            f.apply(self.center[None, :])[0],
            self.radius * scale,
            self.a0 + angle,
            self.a1 + angle,
        )


class EllipsePiece(Piece):
    """Arc of an axis-aligned ellipse under a similarity frame."""

    def __init__(self, semi_x, semi_y, phi0, phi1, frame=Frame()):
        self.semi_x = float(semi_x)
        self.semi_y = float(semi_y)
        self.phi0 = float(phi0)
        self.phi1 = float(phi1)
        self.frame = frame

    def _phi(self, u):
        return self.phi0 + np.asarray(u, dtype=float) * (self.phi1 - self.phi0)

    def point(self, u):
        phi = self._phi(u)
        q = np.stack([self.semi_x * np.cos(phi), self.semi_y * np.sin(phi)], axis=-1)
        return self.frame.apply(q)

    def velocity(self, u):
        phi = self._phi(u)
        span = self.phi1 - self.phi0
        q = np.stack(
            [-self.semi_x * np.sin(phi), self.semi_y * np.cos(phi)], axis=-1
        )
        return self.frame.apply_vec(q) * span

    def support_max(self, theta):
        tp = self.frame.pull_direction(theta)
        phi_star = math.atan2(self.semi_y * tp[1], self.semi_x * tp[0])
        rel = (phi_star - self.phi0) % _TWO_PI
        if rel <= self.phi1 - self.phi0:
            u = rel / (self.phi1 - self.phi0)
            p = self.point(np.array([u]))[0]
            return u, float(p @ theta)
        v0 = float(self.point(np.array([0.0]))[0] @ theta)
        v1 = float(self.point(np.array([1.0]))[0] @ theta)
        return (0.0, v0) if v0 >= v1 else (1.0, v1)

    def transformed(self, scale=1.0, angle=0.0, shift=(0.0, 0.0)):
        return EllipsePiece(
            self.semi_x, self.semi_y, self.phi0, self.phi1,
            self.frame.compose(scale, angle, shift),
        )


class GraphPiece(Piece):
    """Graph segment (x, gamma(|x|)) for x in [x0, x1], under a frame.

    x0 and x1 must not straddle 0, so the profile sign is fixed per piece;
    flat-spot bodies use one mirrored and one direct piece meeting at 0.
    """

    def __init__(self, curve, x0, x1, frame=Frame()):
        if x0 >= x1 or x0 * x1 < 0:
            raise DomainError("graph piece needs x0 < x1 with x0*x1 >= 0")
        self.curve = curve
        self.x0 = float(x0)
        self.x1 = float(x1)
        self.frame = frame

    def _x(self, u):
        return self.x0 + np.asarray(u, dtype=float) * (self.x1 - self.x0)

    def point(self, u):
        x = self._x(u)
        q = np.stack([x, self.curve.eval(np.abs(x), 0)], axis=-1)
        return self.frame.apply(q)

    def velocity(self, u):
        x = self._x(u)
        dx = self.x1 - self.x0
        slope = np.sign(x) * self.curve.eval(np.abs(x), 1)
        q = np.stack([np.full_like(x, dx), slope * dx], axis=-1)
        return self.frame.apply_vec(q)

    def support_max(self, theta):
        # scalar path: the generic array machinery is too slow for the
        # golden search this piece type needs
        f = self.frame
        c, s = math.cos(f.angle), math.sin(f.angle)
        tpx = c * theta[0] + s * theta[1]
        tpy = -s * theta[0] + c * theta[1]
        base = f.shift[0] * theta[0] + f.shift[1] * theta[1]
        x0, span = self.x0, self.x1 - self.x0
        curve = self.curve

        def val(u):
            x = x0 + u * span
            return f.scale * (x * tpx + curve.eval(abs(x), 0) * tpy) + base

        u, v = golden_max(val, 0.0, 1.0, iters=48)
        for ue in (0.0, 1.0):
            ve = val(ue)
            if ve > v:
                u, v = ue, ve
        return u, v

    def transformed(self, scale=1.0, angle=0.0, shift=(0.0, 0.0)):
        return GraphPiece(
            self.curve, self.x0, self.x1, self.frame.compose(scale, angle, shift)
        )


class SupportArcPiece(Piece):
    """Boundary patch recovered from a support function h and its derivative."""

    def __init__(self, h, hp, phi0, phi1):
        self.h = h
        self.hp = hp
        self.phi0 = float(phi0)
        self.phi1 = float(phi1)

    def _phi(self, u):
        return self.phi0 + np.asarray(u, dtype=float) * (self.phi1 - self.phi0)

    def point(self, u):
        phi = self._phi(u)
        n = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        t = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
        h = np.asarray(self.h(phi), dtype=float)[..., None]
        hp = np.asarray(self.hp(phi), dtype=float)[..., None]
        return h * n + hp * t

    def velocity(self, u):
        phi = self._phi(u)
        span = self.phi1 - self.phi0
        eps = 1e-6
        hpp = (np.asarray(self.hp(phi + eps)) - np.asarray(self.hp(phi - eps))) / (2 * eps)
        radius = np.asarray(self.h(phi), dtype=float) + hpp
        t = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
        return radius[..., None] * t * span

    def support_max(self, theta):
        alpha = math.atan2(theta[1], theta[0])
        rel = (alpha - self.phi0) % _TWO_PI
        if rel <= self.phi1 - self.phi0:
            u = rel / (self.phi1 - self.phi0)
            return u, float(self.point(np.array([u]))[0] @ theta)
        v0 = float(self.point(np.array([0.0]))[0] @ theta)
        v1 = float(self.point(np.array([1.0]))[0] @ theta)
        return (0.0, v0) if v0 >= v1 else (1.0, v1)

    def transformed(self, scale=1.0, angle=0.0, shift=(0.0, 0.0)):
        h0, hp0 = self.h, self.hp
        sx, sy = shift

        def h_new(phi):
            return scale * np.asarray(h0(phi - angle)) + sx * np.cos(phi) + sy * np.sin(phi)

        def hp_new(phi):
            return scale * np.asarray(hp0(phi - angle)) - sx * np.sin(phi) + sy * np.cos(phi)

        return SupportArcPiece(h_new, hp_new, self.phi0 + angle, self.phi1 + angle)


@dataclass(frozen=True)
class SupportLine:
    """The line {x . theta = offset}."""

    theta: tuple
    offset: float
    contact_piece: int
    contact_u: float


@dataclass(frozen=True)
class Cap:
    """A boundary cap: the arcs within distance delta of a supporting line."""

    theta: tuple
    delta: float
    sign: int
    arcs: tuple  # (piece index, u0, u1)
    length: float
    whole_curve: bool = False


@dataclass(frozen=True)
class DisjointnessThreshold:
    value: float
    theta_grid: int


@dataclass(frozen=True)
class CoveringReport:
    rho_grid: tuple
    counts: tuple
    fitted_codim: float


class ConvexBody:
    """A closed convex boundary curve assembled from smooth pieces."""

    def __init__(self, pieces, rotation_invariant=False, special_normals=(),
                 validate=True):
        if not pieces:
            raise DomainError("a body needs at least one piece")
        self.pieces = list(pieces)
        self.rotation_invariant = bool(rotation_invariant)
        self.special_normals = tuple(np.asarray(v, dtype=float) for v in special_normals)
        self._lengths = np.array([p.arclength() for p in self.pieces])
        self._polyline_cache = {}
        self._delta0_cache = {}
        if validate:
            self._validate()
        self.origin_interior = self._origin_interior()

    # -- construction checks ---------------------------------------------------

    def _validate(self):
        pts = self.boundary_points(4096)
        scale = float(np.max(np.abs(pts))) + 1e-300
        # closure of consecutive pieces (and wrap-around)
        for i, piece in enumerate(self.pieces):
            end = piece.point(np.array([1.0]))[0]
            start = self.pieces[(i + 1) % len(self.pieces)].point(np.array([0.0]))[0]
            if np.hypot(*(end - start)) > 1e-8 * scale:
                raise DegenerateBodyError(f"pieces {i} and {i+1} do not meet")
        edges = np.diff(np.vstack([pts, pts[:1]]), axis=0)
        nxt = np.roll(edges, -1, axis=0)
        cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
        if np.any(cross < -1e-9 * scale * scale):
            raise DegenerateBodyError("boundary polyline is not convex/CCW")
        turning = float(np.sum(np.arctan2(cross, np.sum(edges * nxt, axis=1))))
        if abs(turning - _TWO_PI) > 0.1:
            raise DegenerateBodyError(f"total turning {turning} is not 2*pi")

    def _origin_interior(self):
        pts = self.boundary_points(1024)
        nxt = np.roll(pts, -1, axis=0)
        cross = (nxt[:, 0] - pts[:, 0]) * (-pts[:, 1]) - (nxt[:, 1] - pts[:, 1]) * (-pts[:, 0])
        return bool(np.all(cross > 0))

    # -- basic geometry ----------------------------------------------------------

    def arclength(self):
        return float(self._lengths.sum())

    def boundary_points(self, n):
        if n in self._polyline_cache:
            return self._polyline_cache[n]
        total = self._lengths.sum()
        counts = np.maximum(2, np.round(n * self._lengths / total).astype(int))
        parts = [
            piece.point(np.linspace(0.0, 1.0, c, endpoint=False))
            for piece, c in zip(self.pieces, counts)
        ]
        pts = np.vstack(parts)
        if len(self._polyline_cache) < 8:
            self._polyline_cache[n] = pts
        return pts

    def diameter(self):
        pts = self.boundary_points(1024)
        d2 = np.sum((pts[None, :, :] - pts[:, None, :]) ** 2, axis=-1)
        return float(np.sqrt(d2.max()))

    def transformed(self, scale=1.0, angle=0.0, shift=(0.0, 0.0)):
        c, s = math.cos(angle), math.sin(angle)
        normals = tuple(
            np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])
            for v in self.special_normals
        )
        return ConvexBody(
            [p.transformed(scale, angle, shift) for p in self.pieces],
            rotation_invariant=self.rotation_invariant,
            special_normals=normals,
            validate=False,
        )

    def rotated(self, angle):
        return self.transformed(angle=angle)

    # -- supporting lines and caps ----------------------------------------------

    def _support_plus(self, theta):
        best_piece, best_u, best_val = -1, 0.0, -np.inf
        for i, piece in enumerate(self.pieces):
            u, v = piece.support_max(theta)
            if v > best_val:
                best_piece, best_u, best_val = i, u, v
        return best_piece, best_u, best_val

    def support(self, theta, sign=1):
        """Supporting line with theta an outer (sign=+1) or inner normal."""
        theta = _unit(theta)
        if sign >= 0:
            ci, u, off = self._support_plus(theta)
            return SupportLine(tuple(theta), off, ci, u)
        ci, u, off = self._support_plus(-theta)
        return SupportLine(tuple(theta), -off, ci, u)

    def width(self, theta):
        theta = _unit(theta)
        return self._support_plus(theta)[2] + self._support_plus(-theta)[2]

    def _height_fn(self, piece_idx, theta):
        piece = self.pieces[piece_idx]

        def f(u):
            p = piece.point(np.asarray(u, dtype=float))
            return p[..., 0] * theta[0] + p[..., 1] * theta[1]

        return f

    def _walk_crossings(self, theta, offset, ci, u_star, deltas, forward):
        """Arclengths from the contact point to the level crossings.

        deltas must be ascending; the projection p . theta decreases strictly
        along the walk away from the contact (convexity), so crossings appear
        in delta order.  Returns (lengths, arcs_per_delta_end) where arcs are
        only materialized when requested by cap().
        """
        m = len(self.pieces)
        levels = offset - np.asarray(deltas, dtype=float)
        lengths = np.zeros(len(levels))
        ends = [None] * len(levels)
        unresolved = np.arange(len(levels))
        acc = 0.0
        idx, enter = ci, u_star
        for _ in range(m + 1):
            piece = self.pieces[idx]
            f = self._height_fn(idx, theta)
            exit_u = 1.0 if forward else 0.0
            # scan the piece; the projection decreases along the walk up to
            # the antipodal turning point, so the running minimum brackets
            # every crossing, including one inside the turning piece
            grid = np.linspace(enter, exit_u, 65)
            fg = np.minimum.accumulate(f(grid))
            here = levels[unresolved] > fg[-1]
            if np.any(here):
                sel = unresolved[here]
                lv = levels[sel]
                cell = np.clip(np.searchsorted(-fg, -lv, side="right") - 1, 0, 63)
                a = grid[cell]
                b = grid[cell + 1]
                for _ in range(34):
                    mid = 0.5 * (a + b)
                    above = f(mid) >= lv
                    a = np.where(above, mid, a)
                    b = np.where(above, b, mid)
                u_cross = 0.5 * (a + b)
                breaks = np.concatenate([[enter], u_cross])
                segs = np.abs(cumulative_gauss(lambda uu: piece.speed(uu), breaks))
                lengths[sel] = acc + np.cumsum(segs)
                for j, s in enumerate(sel):
                    ends[s] = (idx, float(u_cross[j]))
                unresolved = unresolved[~here]
            if unresolved.size == 0:
                return lengths, ends
            acc += piece.arclength(min(enter, exit_u), max(enter, exit_u))
            idx = (idx + 1) % m if forward else (idx - 1) % m
            enter = 0.0 if forward else 1.0
        raise DegenerateBodyError("cap walk wrapped the whole curve")

    def cap_side_lengths(self, theta, deltas, sign=1, _support=None):
        """Lengths of the caps C^sign(theta, delta) for an ascending delta array."""
        theta = _unit(theta)
        th = theta if sign >= 0 else -theta
        deltas = np.asarray(deltas, dtype=float)
        if np.any(np.diff(deltas) < 0):
            raise DomainError("deltas must be ascending")
        if np.any(deltas <= 0):
            raise DomainError("deltas must be positive")
        if _support is None:
            ci, u_star, off = self._support_plus(th)
            w = self.width(th)
        else:
            ci, u_star, off, w = _support
        inside = deltas < w * (1 - 1e-12)
        out = np.full(len(deltas), self.arclength())
        if np.any(inside):
            d = deltas[inside]
            fw, _ = self._walk_crossings(th, off, ci, u_star, d, forward=True)
            bw, _ = self._walk_crossings(th, off, ci, u_star, d, forward=False)
            out[inside] = fw + bw
        return out

    def cap(self, theta, delta, sign=1):
        """The cap C^sign(theta, delta) with explicit parameter arcs."""
        theta = _unit(theta)
        if delta <= 0:
            raise DomainError("delta must be positive")
        th = theta if sign >= 0 else -theta
        ci, u_star, off = self._support_plus(th)
        if delta >= self.width(th) * (1 - 1e-12):
            arcs = tuple((i, 0.0, 1.0) for i in range(len(self.pieces)))
            return Cap(tuple(theta), delta, sign, arcs, self.arclength(), True)
        d = np.array([delta])
        fw_len, fw_end = self._walk_crossings(th, off, ci, u_star, d, forward=True)
        bw_len, bw_end = self._walk_crossings(th, off, ci, u_star, d, forward=False)
        arcs = self._assemble_arcs(ci, u_star, fw_end[0], bw_end[0])
        return Cap(
            tuple(theta), float(delta), sign, arcs, float(fw_len[0] + bw_len[0]), False
        )

    def _assemble_arcs(self, ci, u_star, fw_end, bw_end):
        m = len(self.pieces)
        arcs = []
        # backward side: from bw_end up to the contact
        idx, u = bw_end
        if idx == ci and u <= u_star:
            arcs.append((ci, u, u_star))
        else:
            arcs.append((idx, u, 1.0))
            j = (idx + 1) % m
            while j != ci:
                arcs.append((j, 0.0, 1.0))
                j = (j + 1) % m
            arcs.append((ci, 0.0, u_star))
        # forward side: from the contact to fw_end
        idx, u = fw_end
        if idx == ci and u >= u_star:
            arcs.append((ci, u_star, u))
        else:
            arcs.append((ci, u_star, 1.0))
            j = (ci + 1) % m
            while j != idx:
                arcs.append((j, 0.0, 1.0))
                j = (j + 1) % m
            arcs.append((idx, 0.0, u))
        return tuple((i, a, b) for i, a, b in arcs if b > a)

    def cap_function(self, theta, delta):
        """The cap function: the longer of the two cap lengths at distance delta."""
        lens = self.cap_profile(theta, np.array([float(delta)]))
        return float(lens[0])

    def cap_profile(self, theta, deltas):
        """max(C+, C-) cap lengths over an ascending array of deltas."""
        theta = _unit(theta)
        cp, up, op = self._support_plus(theta)
        cm, um, om = self._support_plus(-theta)
        width = op + om
        plus = self.cap_side_lengths(theta, deltas, 1, _support=(cp, up, op, width))
        minus = self.cap_side_lengths(theta, deltas, -1, _support=(cm, um, om, width))
        return np.maximum(plus, minus)

    # -- global quantities --------------------------------------------------------

    def disjointness_threshold(self, theta_grid=720):
        """Largest delta with C+(theta,d), C-(theta,d) disjoint for grid thetas.

        The caps are slabs in the projection on theta, so they are disjoint
        exactly when delta < width(theta)/2; the threshold is half the minimal
        width, refined locally around the grid minimizer.
        """
        cached = self._delta0_cache.get(theta_grid)
        if cached is not None:
            return cached
        angles = np.linspace(0.0, math.pi, theta_grid, endpoint=False)
        widths = np.array(
            [self.width((math.cos(a), math.sin(a))) for a in angles]
        )
        i = int(np.argmin(widths))
        span = math.pi / theta_grid

        def negw(a):
            return -self.width((math.cos(a), math.sin(a)))

        a_best, neg = golden_max(negw, angles[i] - span, angles[i] + span, iters=60)
        wmin = min(float(widths.min()), -neg)
        if wmin < 1e-12:
            raise DegenerateBodyError("body has (numerically) zero width")
        result = DisjointnessThreshold(value=0.5 * wmin, theta_grid=theta_grid)
        self._delta0_cache[theta_grid] = result
        return result


# -- covering numbers ---------------------------------------------------------


def box_count(body_or_points, rho):
    """Greedy cover count of the boundary (<= 2x the minimal number of balls)."""
    if rho <= 0:
        raise DomainError("rho must be positive")
    if isinstance(body_or_points, np.ndarray):
        pts = np.atleast_2d(np.asarray(body_or_points, dtype=float))
        alive = np.ones(len(pts), dtype=bool)
        count = 0
        while alive.any():
            center = pts[np.argmax(alive)]
            d2 = np.sum((pts - center) ** 2, axis=1)
            alive &= d2 > rho * rho
            count += 1
        return count
    body = body_or_points
    n = int(min(4e6, max(4096, math.ceil(body.arclength() / (rho / 24.0)))))
    spacing = body.arclength() / n
    if spacing > rho / 8.0:
        raise ResolutionError(f"rho={rho} below achievable polyline resolution")
    pts = body.boundary_points(n)
    npts = len(pts)
    count = 0
    i = 0
    limit = npts
    while i < limit:
        center = pts[i % npts]
        count += 1
        step = max(1, int(rho / (2 * spacing)))
        j = i + step
        while j < i + npts:
            d = np.hypot(*(pts[j % npts] - center))
            if d > rho:
                lo, hi = max(i + 1, j - step), j
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    if np.hypot(*(pts[mid % npts] - center)) > rho:
                        hi = mid
                    else:
                        lo = mid
                j = hi
                break
            j += step
        i = j
    return count


def codim_fit(body_or_points, rho_grid):
    """Covering counts over a rho grid and the fitted codimension d - s."""
    rho_grid = sorted(float(r) for r in rho_grid)
    counts = [box_count(body_or_points, r) for r in rho_grid]
    if len(rho_grid) >= 2 and max(counts) > min(counts):
        slope = np.polyfit(np.log(1.0 / np.array(rho_grid)), np.log(counts), 1)[0]
    else:
        slope = 0.0
    return CoveringReport(tuple(rho_grid), tuple(counts), float(slope))


# -- body factories -------------------------------------------------------------


def _split_arcs(center, radius, a0, a1, max_span=math.pi / 2):
    n = max(1, math.ceil((a1 - a0) / max_span))
    edges = np.linspace(a0, a1, n + 1)
    return [ArcPiece(center, radius, e0, e1) for e0, e1 in zip(edges[:-1], edges[1:])]


def circle(radius=1.0, center=(0.0, 0.0)):
    if radius <= 0:
        raise DomainError("radius must be positive")
    return ConvexBody(
        _split_arcs(center, radius, 0.0, _TWO_PI),
        rotation_invariant=True,
    )


def ellipse(semi_x, semi_y, center=(0.0, 0.0), angle=0.0):
    if semi_x <= 0 or semi_y <= 0:
        raise DomainError("semi-axes must be positive")
    frame = Frame(1.0, angle, tuple(center))
    edges = np.linspace(0.0, _TWO_PI, 9)
    pieces = [
        EllipsePiece(semi_x, semi_y, e0, e1, frame)
        for e0, e1 in zip(edges[:-1], edges[1:])
    ]
    return ConvexBody(pieces)


def support_function_body(h, hp, n_pieces=8):
    edges = np.linspace(0.0, _TWO_PI, n_pieces + 1)
    pieces = [SupportArcPiece(h, hp, e0, e1) for e0, e1 in zip(edges[:-1], edges[1:])]
    return ConvexBody(pieces)


def flat_spot_body(curve, corner_tangent=None, scale=1.0, center=(0.0, 0.0)):
    """Closed strictly convex loop whose bottom is the mirrored graph curve.

    The graph y = gamma(|x|) on [-T, T] is closed by a circular arc through
    both endpoints; the joins are convex corners (straight closure sides
    would create directions whose caps have positive length at delta -> 0,
    wrecking every cap integral).  The flat point's outer normal is recorded
    as a special direction.
    """
    T = curve.domain_end
    gT = curve.eval(T)
    phi_g = math.atan(curve.eval(T, 1))
    psi = corner_tangent if corner_tangent is not None else 0.5 * (phi_g + math.pi / 2)
    if not phi_g < psi < math.pi / 2:
        raise DomainError(f"corner tangent must lie in ({phi_g}, pi/2)")
    y_c = gT + T / math.tan(psi)
    radius = T / math.sin(psi)
    a0 = psi - math.pi / 2
    a1 = 3 * math.pi / 2 - psi
    pieces = [GraphPiece(curve, -T, 0.0), GraphPiece(curve, 0.0, T)]
    pieces += _split_arcs((0.0, y_c), radius, a0, a1)
    raw = ConvexBody(pieces, special_normals=[(0.0, -1.0)])
    top = y_c + radius
    shift = (
        center[0],
        center[1] - scale * 0.5 * top,
    )
    return ConvexBody(
        [p.transformed(scale, 0.0, shift) for p in raw.pieces],
        special_normals=[(0.0, -1.0)],
    )


# -- TOML ----------------------------------------------------------------------


def body_from_table(table):
    """Build a body from a parsed TOML table."""
    from .curve import curve_from_table

    if "kind" not in table:
        raise DomainError("body table needs a 'kind' key")
    kind = table["kind"]
    known = {
        "circle": {"radius", "center"},
        "ellipse": {"semi_x", "semi_y", "center", "angle"},
        "flat_spot": {"curve", "corner_tangent", "scale", "center"},
    }
    if kind not in known:
        raise DomainError(f"unknown body kind {kind!r}")
    unknown = set(table) - known[kind] - {"kind"}
    if unknown:
        raise DomainError(f"unknown body keys: {sorted(unknown)}")
    if kind == "circle":
        return circle(table.get("radius", 1.0), tuple(table.get("center", (0.0, 0.0))))
    if kind == "ellipse":
        return ellipse(
            table["semi_x"], table["semi_y"],
            tuple(table.get("center", (0.0, 0.0))), table.get("angle", 0.0),
        )
    spec = dict(table["curve"])
    return flat_spot_body(
        curve_from_table(spec),
        corner_tangent=table.get("corner_tangent"),
        scale=table.get("scale", 1.0),
        center=tuple(table.get("center", (0.0, 0.0))),
    )
