"""Independent oracles used by the tests.

Each oracle reaches the quantity under test by a different construction than
the library: rotation matrices instead of arctangents, law of cosines instead
of vector algebra, finite differences instead of closed forms, and dense
placement sweeps instead of trigonometric root finding.
"""

import numpy as np

from trigrip.quick_return import FingerGeometry


def tip_position_rotation(g: FingerGeometry, theta_ip: float) -> np.ndarray:
    """Fingertip center built by rotating the pin-to-pin direction.

    The tip direction is the (inner pin -> outer pin) unit vector turned by
    +(180 deg - phi2); no arctangent is involved.
    """
    p_ip = g.r_ip * np.array([np.cos(theta_ip), np.sin(theta_ip)])
    p_op = np.array([0.0, g.r_op])
    u = (p_op - p_ip) / np.linalg.norm(p_op - p_ip)
    a = np.pi - g.phi2
    rot = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    return p_ip + g.l_ft * (rot @ u)


def radial_distance_lawcos(g: FingerGeometry, theta_ip: float) -> float:
    """Radial fingertip distance via two law-of-cosines triangles."""
    d2 = g.r_ip**2 + g.r_op**2 - 2.0 * g.r_ip * g.r_op * np.sin(theta_ip)
    d = np.sqrt(d2)
    beta = np.arccos(np.clip((g.r_ip**2 + d2 - g.r_op**2) / (2.0 * g.r_ip * d), -1, 1))
    p_ip = g.r_ip * np.array([np.cos(theta_ip), np.sin(theta_ip)])
    ray_c = -np.array([np.cos(theta_ip), np.sin(theta_ip)])
    ray_op = np.array([0.0, g.r_op]) - p_ip
    ray_op = ray_op / np.linalg.norm(ray_op)
    s = np.sign(ray_c[0] * ray_op[1] - ray_c[1] * ray_op[0]) or 1.0
    delta = s * beta + (np.pi - g.phi2)
    delta = abs((delta + np.pi) % (2.0 * np.pi) - np.pi)
    return float(np.sqrt(g.r_ip**2 + g.l_ft**2 - 2.0 * g.r_ip * g.l_ft * np.cos(delta)))


def speed_ratio_analytic(g: FingerGeometry, theta_ip: float) -> float:
    """Hand-derived Jacobian magnitude of the fingertip position."""
    c, s = np.cos(theta_ip), np.sin(theta_ip)
    p_ip = g.r_ip * np.array([c, s])
    v = p_ip - np.array([0.0, g.r_op])
    d2 = float(v @ v)
    phi1 = np.arctan2(v[1], v[0])
    dphi1 = g.r_ip * (g.r_ip - g.r_op * s) / d2
    a = phi1 - g.phi2
    dp = g.r_ip * np.array([-s, c]) + g.l_ft * dphi1 * np.array([-np.sin(a), np.cos(a)])
    return float(np.hypot(dp[0], dp[1]))


def spans_sweep(n1, n2, n3, steps: int = 360) -> bool:
    """Half-plane sweep: the triple fails to span iff some direction has
    nonnegative products with all three normals (strict for at least one)."""
    dirs = np.array([n1, n2, n3], dtype=float)
    for k in range(steps):
        a = 2.0 * np.pi * k / steps
        d = np.array([np.cos(a), np.sin(a)])
        dots = dirs @ d
        if np.all(dots >= -1e-12) and np.any(dots > 1e-9):
            return False
    return True


def virtual_work_tip_force(g: FingerGeometry, tau_out: float, r_ob: float) -> float:
    """Power-balance force: drive torque over the radial-speed gain."""
    from trigrip import quick_return

    theta = quick_return.theta_for_radius(g, r_ob + g.r_ft)
    h = 1e-6
    dr = (
        float(quick_return.radial_distance(g, theta + h, extrapolate=True))
        - float(quick_return.radial_distance(g, theta - h, extrapolate=True))
    ) / (2.0 * h)
    return tau_out / dr


def eps_finite_difference(gc, theta_in: float, lin_v: float, h: float = 1e-7) -> float:
    """d theta_in / d theta_out via central differences of the closure."""
    from trigrip import ls_cvt

    a = ls_cvt.solve_output_angle(gc, theta_in + h, lin_v)
    b = ls_cvt.solve_output_angle(gc, theta_in - h, lin_v)
    return (2.0 * h) / (a - b)


def place_equilateral_sweep(lines, psi_step_deg: float = 0.25):
    """All concurrent-normal equilateral placements with one vertex per line.

    ``lines`` is a list of (point, inward_normal). Sweeps the triangle
    orientation for both vertex-to-line cyclic orders, solving the linear
    incidence system for the center and circumradius, then refines the
    orientations where the three normal lines become concurrent by bisection
    on the signed distance of the third normal line from the first two's
    intersection. Returns a list of (3, 2) contact arrays.
    """
    def solve_at(psi, order):
        rows, rhs = [], []
        for m, idx in enumerate(order):
            point, normal = lines[idx]
            u = np.array([np.cos(psi + 2 * np.pi * m / 3), np.sin(psi + 2 * np.pi * m / 3)])
            rows.append([normal[0], normal[1], float(normal @ u)])
            rhs.append(float(normal @ point))
        mat = np.array(rows)
        if abs(np.linalg.det(mat)) < 1e-9:
            return None
        cx, cy, radius = np.linalg.solve(mat, rhs)
        if radius <= 1e-9:
            return None
        c = np.array([cx, cy])
        verts = np.array(
            [c + radius * np.array([np.cos(psi + 2 * np.pi * m / 3),
                                    np.sin(psi + 2 * np.pi * m / 3)]) for m in range(3)]
        )
        return verts

    def concurrency_residual(psi, order):
        verts = solve_at(psi, order)
        if verts is None:
            return None
        n = [lines[idx][1] for idx in order]
        denom = n[0][0] * n[1][1] - n[0][1] * n[1][0]
        if abs(denom) < 1e-12:
            return None
        # intersection of normal lines 0 and 1
        t = ((verts[1] - verts[0])[0] * n[1][1] - (verts[1] - verts[0])[1] * n[1][0]) / denom
        q = verts[0] + t * np.asarray(n[0])
        # signed offset of q from normal line 2
        w = q - verts[2]
        return float(n[2][0] * w[1] - n[2][1] * w[0])

    found = []
    psis = np.radians(np.arange(0.0, 360.0, psi_step_deg))
    for order in ((0, 1, 2), (0, 2, 1)):
        vals = [concurrency_residual(p, order) for p in psis]
        for i in range(len(psis)):
            a, b = vals[i], vals[(i + 1) % len(psis)]
            if a is None or b is None or np.sign(a) == np.sign(b):
                continue
            lo, hi = psis[i], psis[i] + np.radians(psi_step_deg)
            fa = a
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = concurrency_residual(mid, order)
                if fm is None:
                    break
                if np.sign(fm) == np.sign(fa):
                    lo, fa = mid, fm
                else:
                    hi = mid
            verts = solve_at(0.5 * (lo + hi), order)
            if verts is not None:
                found.append(verts)
    return found


def match_contact_sets(a: np.ndarray, b: np.ndarray) -> float:
    """Smallest max-distance over vertex permutations between two triangles."""
    from itertools import permutations

    best = np.inf
    for perm in permutations(range(3)):
        d = max(float(np.linalg.norm(a[i] - b[p])) for i, p in enumerate(perm))
        best = min(best, d)
    return best
