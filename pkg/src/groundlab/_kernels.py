"""Jitted batch simulation kernel.

Each batch row is an independent rollout: separate initial state, body
radii, segment endpoints and material parameters, but shared topology
(body count, flags) and shared world constants (gravity, drag, dt).
Rows never interact, so the per-row arithmetic is bit-identical whether a
row is simulated alone or inside a larger batch.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# Solver constants. Contact restitution/friction are combined as the
# product of the two bodies' coefficients.
SOLVER_ITERATIONS = 10
BAUMGARTE = 0.2
PENETRATION_SLOP = 0.01
RESTITUTION_THRESHOLD = 0.5  # approach speed below which contacts are inelastic

# Goal condition codes understood by the kernel.
GOAL_NONE = 0
GOAL_CONTACT_RUN = 1
GOAL_REGION_ENTRY = 2

# Event kind codes.
EVENT_NEW = 1
EVENT_PERSISTING = 0

_COS_30 = np.cos(np.pi / 6.0)


@njit(cache=True)
def _detect_pair_bb(px, py, radius, i, j, out):
    """Circle-circle contact test. Writes (active, nx, ny, pen, cpx, cpy)."""
    dx = px[j] - px[i]
    dy = py[j] - py[i]
    rsum = radius[i] + radius[j]
    d2 = dx * dx + dy * dy
    if d2 >= rsum * rsum:
        out[0] = 0.0
        return
    dist = np.sqrt(d2)
    if dist > 1e-12:
        nx = dx / dist
        ny = dy / dist
    else:
        nx = 0.0
        ny = 1.0
    pen = rsum - dist
    out[0] = 1.0
    out[1] = nx
    out[2] = ny
    out[3] = pen
    out[4] = px[i] + nx * (radius[i] - 0.5 * pen)
    out[5] = py[i] + ny * (radius[i] - 0.5 * pen)


@njit(cache=True)
def _detect_pair_cs(px, py, radius, sx1, sy1, sx2, sy2, shalf, c, s, out):
    """Circle-segment contact test. Normal points from segment to circle."""
    ex = sx2[s] - sx1[s]
    ey = sy2[s] - sy1[s]
    qx = px[c] - sx1[s]
    qy = py[c] - sy1[s]
    elen2 = ex * ex + ey * ey
    if elen2 > 1e-12:
        t = (qx * ex + qy * ey) / elen2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    else:
        t = 0.0
    cx = sx1[s] + t * ex
    cy = sy1[s] + t * ey
    dx = px[c] - cx
    dy = py[c] - cy
    rr = radius[c] + shalf[s]
    d2 = dx * dx + dy * dy
    if d2 >= rr * rr:
        out[0] = 0.0
        return
    dist = np.sqrt(d2)
    if dist > 1e-12:
        nx = dx / dist
        ny = dy / dist
    else:
        nx = 0.0
        ny = 1.0
    pen = rr - dist
    out[0] = 1.0
    out[1] = nx
    out[2] = ny
    out[3] = pen
    out[4] = px[c] - nx * (radius[c] - 0.5 * pen)
    out[5] = py[c] - ny * (radius[c] - 0.5 * pen)


@njit(cache=True)
def simulate_batch(
    # circle state (B, nc), mutated in place to the final state
    px, py, vx, vy, ang, om,
    # circle parameters (B, nc)
    radius, inv_m, inv_i, fric_c, rest_c,
    # circle flags (nc,)
    dynamic_c, ball_c,
    # segment geometry (B, ns) and parameters
    sx1, sy1, sx2, sy2,
    shalf, fric_s, rest_s, floor_s,
    # pair index tables
    bb_i, bb_j, cs_c, cs_s,
    # environment scalars
    gx, gy, damp_step, dt,
    # schedule
    max_steps, observe_every,
    # goal condition
    goal_kind, goal_a, goal_b, goal_run, goal_x0, goal_x1, goal_y0, goal_y1,
    # outputs
    frames_pos, frames_vel, frames_ang, frame_steps, frame_counts,
    goal_steps, best_runs, bb_new_counts, impact_counts, rolling_steps,
    diverged_step, diverged_body,
    ev_step, ev_a, ev_b, ev_imp, ev_new, ev_counts,
    record_full, record_contacts,
):
    B, nc = px.shape
    ns = sx1.shape[1]
    n_bb = bb_i.shape[0]
    n_cs = cs_c.shape[0]
    n_pairs = n_bb + n_cs

    for b in range(B):
        # per-contact slots
        active = np.zeros(n_pairs, dtype=np.uint8)
        prev = np.zeros(n_pairs, dtype=np.uint8)
        nx = np.zeros(n_pairs)
        ny = np.zeros(n_pairs)
        pen = np.zeros(n_pairs)
        rax = np.zeros(n_pairs)
        ray = np.zeros(n_pairs)
        rbx = np.zeros(n_pairs)
        rby = np.zeros(n_pairs)
        inv_kn = np.zeros(n_pairs)
        inv_kt = np.zeros(n_pairs)
        bias = np.zeros(n_pairs)
        mu = np.zeros(n_pairs)
        acc_n = np.zeros(n_pairs)
        acc_t = np.zeros(n_pairs)
        det = np.zeros(6)

        # initial contact mask from the starting geometry, so that bodies
        # placed already touching report persisting contacts on step 1
        for p in range(n_bb):
            _detect_pair_bb(px[b], py[b], radius[b], bb_i[p], bb_j[p], det)
            prev[p] = np.uint8(1) if det[0] > 0.0 else np.uint8(0)
        for q in range(n_cs):
            _detect_pair_cs(px[b], py[b], radius[b], sx1[b], sy1[b], sx2[b],
                            sy2[b], shalf, cs_c[q], cs_s[q], det)
            prev[n_bb + q] = np.uint8(1) if det[0] > 0.0 else np.uint8(0)

        # frame 0: initial state
        fcount = 0
        frame_steps[b, fcount] = 0
        for c in range(nc):
            frames_pos[b, fcount, c, 0] = px[b, c]
            frames_pos[b, fcount, c, 1] = py[b, c]
            if record_full:
                frames_vel[b, fcount, c, 0] = vx[b, c]
                frames_vel[b, fcount, c, 1] = vy[b, c]
                frames_ang[b, fcount, c, 0] = ang[b, c]
                frames_ang[b, fcount, c, 1] = om[b, c]
        fcount += 1

        run = 0
        best_run = 0
        n_events = 0
        goal_hit = -1
        div_step = -1
        div_body = -1

        for step in range(1, max_steps + 1):
            # integrate forces, then drag
            for c in range(nc):
                if dynamic_c[c]:
                    vx[b, c] = (vx[b, c] + gx * dt) * damp_step
                    vy[b, c] = (vy[b, c] + gy * dt) * damp_step

            # narrow phase
            for p in range(n_bb):
                i = bb_i[p]
                j = bb_j[p]
                im_sum = inv_m[b, i] + inv_m[b, j]
                if im_sum <= 0.0:
                    active[p] = np.uint8(0)
                    continue
                _detect_pair_bb(px[b], py[b], radius[b], i, j, det)
                if det[0] == 0.0:
                    active[p] = np.uint8(0)
                    continue
                active[p] = np.uint8(1)
                nx[p] = det[1]
                ny[p] = det[2]
                pen[p] = det[3]
                rax[p] = det[4] - px[b, i]
                ray[p] = det[5] - py[b, i]
                rbx[p] = det[4] - px[b, j]
                rby[p] = det[5] - py[b, j]
                cr_an = rax[p] * ny[p] - ray[p] * nx[p]
                cr_bn = rbx[p] * ny[p] - rby[p] * nx[p]
                kn = im_sum + inv_i[b, i] * cr_an * cr_an + inv_i[b, j] * cr_bn * cr_bn
                tx = -ny[p]
                ty = nx[p]
                cr_at = rax[p] * ty - ray[p] * tx
                cr_bt = rbx[p] * ty - rby[p] * tx
                kt = im_sum + inv_i[b, i] * cr_at * cr_at + inv_i[b, j] * cr_bt * cr_bt
                inv_kn[p] = 1.0 / kn
                inv_kt[p] = 1.0 / kt
                mu[p] = fric_c[b, i] * fric_c[b, j]
                e = rest_c[b, i] * rest_c[b, j]
                rvx = (vx[b, j] - om[b, j] * rby[p]) - (vx[b, i] - om[b, i] * ray[p])
                rvy = (vy[b, j] + om[b, j] * rbx[p]) - (vy[b, i] + om[b, i] * rax[p])
                vn0 = rvx * nx[p] + rvy * ny[p]
                bias[p] = -e * vn0 if vn0 < -RESTITUTION_THRESHOLD else 0.0
                acc_n[p] = 0.0
                acc_t[p] = 0.0
            for q in range(n_cs):
                p = n_bb + q
                c = cs_c[q]
                s = cs_s[q]
                if inv_m[b, c] <= 0.0:
                    active[p] = np.uint8(0)
                    continue
                _detect_pair_cs(px[b], py[b], radius[b], sx1[b], sy1[b],
                                sx2[b], sy2[b], shalf, c, s, det)
                if det[0] == 0.0:
                    active[p] = np.uint8(0)
                    continue
                active[p] = np.uint8(1)
                nx[p] = det[1]
                ny[p] = det[2]
                pen[p] = det[3]
                rbx[p] = det[4] - px[b, c]
                rby[p] = det[5] - py[b, c]
                cr_bn = rbx[p] * ny[p] - rby[p] * nx[p]
                kn = inv_m[b, c] + inv_i[b, c] * cr_bn * cr_bn
                tx = -ny[p]
                ty = nx[p]
                cr_bt = rbx[p] * ty - rby[p] * tx
                kt = inv_m[b, c] + inv_i[b, c] * cr_bt * cr_bt
                inv_kn[p] = 1.0 / kn
                inv_kt[p] = 1.0 / kt
                mu[p] = fric_c[b, c] * fric_s[b, s]
                e = rest_c[b, c] * rest_s[b, s]
                rvx = vx[b, c] - om[b, c] * rby[p]
                rvy = vy[b, c] + om[b, c] * rbx[p]
                vn0 = rvx * nx[p] + rvy * ny[p]
                bias[p] = -e * vn0 if vn0 < -RESTITUTION_THRESHOLD else 0.0
                acc_n[p] = 0.0
                acc_t[p] = 0.0

            # sequential impulses
            for _ in range(SOLVER_ITERATIONS):
                for p in range(n_bb):
                    if not active[p]:
                        continue
                    i = bb_i[p]
                    j = bb_j[p]
                    rvx = (vx[b, j] - om[b, j] * rby[p]) - (vx[b, i] - om[b, i] * ray[p])
                    rvy = (vy[b, j] + om[b, j] * rbx[p]) - (vy[b, i] + om[b, i] * rax[p])
                    vn = rvx * nx[p] + rvy * ny[p]
                    lam = (bias[p] - vn) * inv_kn[p]
                    new_acc = acc_n[p] + lam
                    if new_acc < 0.0:
                        new_acc = 0.0
                    dlam = new_acc - acc_n[p]
                    acc_n[p] = new_acc
                    ix = dlam * nx[p]
                    iy = dlam * ny[p]
                    vx[b, i] -= ix * inv_m[b, i]
                    vy[b, i] -= iy * inv_m[b, i]
                    om[b, i] -= inv_i[b, i] * (rax[p] * iy - ray[p] * ix)
                    vx[b, j] += ix * inv_m[b, j]
                    vy[b, j] += iy * inv_m[b, j]
                    om[b, j] += inv_i[b, j] * (rbx[p] * iy - rby[p] * ix)

                    rvx = (vx[b, j] - om[b, j] * rby[p]) - (vx[b, i] - om[b, i] * ray[p])
                    rvy = (vy[b, j] + om[b, j] * rbx[p]) - (vy[b, i] + om[b, i] * rax[p])
                    tx = -ny[p]
                    ty = nx[p]
                    vt = rvx * tx + rvy * ty
                    lam_t = -vt * inv_kt[p]
                    max_t = mu[p] * acc_n[p]
                    new_t = acc_t[p] + lam_t
                    if new_t > max_t:
                        new_t = max_t
                    elif new_t < -max_t:
                        new_t = -max_t
                    dlam = new_t - acc_t[p]
                    acc_t[p] = new_t
                    ix = dlam * tx
                    iy = dlam * ty
                    vx[b, i] -= ix * inv_m[b, i]
                    vy[b, i] -= iy * inv_m[b, i]
                    om[b, i] -= inv_i[b, i] * (rax[p] * iy - ray[p] * ix)
                    vx[b, j] += ix * inv_m[b, j]
                    vy[b, j] += iy * inv_m[b, j]
                    om[b, j] += inv_i[b, j] * (rbx[p] * iy - rby[p] * ix)
                for q in range(n_cs):
                    p = n_bb + q
                    if not active[p]:
                        continue
                    c = cs_c[q]
                    rvx = vx[b, c] - om[b, c] * rby[p]
                    rvy = vy[b, c] + om[b, c] * rbx[p]
                    vn = rvx * nx[p] + rvy * ny[p]
                    lam = (bias[p] - vn) * inv_kn[p]
                    new_acc = acc_n[p] + lam
                    if new_acc < 0.0:
                        new_acc = 0.0
                    dlam = new_acc - acc_n[p]
                    acc_n[p] = new_acc
                    ix = dlam * nx[p]
                    iy = dlam * ny[p]
                    vx[b, c] += ix * inv_m[b, c]
                    vy[b, c] += iy * inv_m[b, c]
                    om[b, c] += inv_i[b, c] * (rbx[p] * iy - rby[p] * ix)

                    rvx = vx[b, c] - om[b, c] * rby[p]
                    rvy = vy[b, c] + om[b, c] * rbx[p]
                    tx = -ny[p]
                    ty = nx[p]
                    vt = rvx * tx + rvy * ty
                    lam_t = -vt * inv_kt[p]
                    max_t = mu[p] * acc_n[p]
                    new_t = acc_t[p] + lam_t
                    if new_t > max_t:
                        new_t = max_t
                    elif new_t < -max_t:
                        new_t = -max_t
                    dlam = new_t - acc_t[p]
                    acc_t[p] = new_t
                    ix = dlam * tx
                    iy = dlam * ty
                    vx[b, c] += ix * inv_m[b, c]
                    vy[b, c] += iy * inv_m[b, c]
                    om[b, c] += inv_i[b, c] * (rbx[p] * iy - rby[p] * ix)

            # positional correction (split from the velocity solve so that
            # restitution stays exact)
            for p in range(n_pairs):
                if not active[p]:
                    continue
                depth = pen[p] - PENETRATION_SLOP
                if depth <= 0.0:
                    continue
                if p < n_bb:
                    i = bb_i[p]
                    j = bb_j[p]
                    im_sum = inv_m[b, i] + inv_m[b, j]
                    corr = BAUMGARTE * depth / im_sum
                    px[b, i] -= corr * inv_m[b, i] * nx[p]
                    py[b, i] -= corr * inv_m[b, i] * ny[p]
                    px[b, j] += corr * inv_m[b, j] * nx[p]
                    py[b, j] += corr * inv_m[b, j] * ny[p]
                else:
                    c = cs_c[p - n_bb]
                    corr = BAUMGARTE * depth
                    px[b, c] += corr * nx[p]
                    py[b, c] += corr * ny[p]

            # integrate positions
            for c in range(nc):
                if dynamic_c[c]:
                    px[b, c] += vx[b, c] * dt
                    py[b, c] += vy[b, c] * dt
                    ang[b, c] += om[b, c] * dt

            # divergence check
            for c in range(nc):
                if dynamic_c[c]:
                    if not (np.isfinite(px[b, c]) and np.isfinite(py[b, c])
                            and np.isfinite(vx[b, c]) and np.isfinite(vy[b, c])
                            and np.isfinite(om[b, c])):
                        div_step = step
                        div_body = c
                        break
            if div_step >= 0:
                break

            # contact bookkeeping: events, counters, rolling
            for p in range(n_pairs):
                if not active[p]:
                    prev[p] = np.uint8(0)
                    continue
                is_new = prev[p] == np.uint8(0)
                if p < n_bb:
                    a_id = bb_i[p]
                    b_id = bb_j[p]
                    if is_new and ball_c[a_id] and ball_c[b_id]:
                        bb_new_counts[b] += 1
                        impact_counts[b] += 1
                else:
                    q = p - n_bb
                    a_id = cs_c[q]
                    b_id = nc + cs_s[q]
                    if floor_s[cs_s[q]]:
                        if (not is_new) and ball_c[a_id] and ny[p] >= _COS_30:
                            rolling_steps[b, a_id] += 1
                    elif is_new and ball_c[a_id]:
                        impact_counts[b] += 1
                if record_contacts:
                    ev_step[b, n_events] = step
                    ev_a[b, n_events] = a_id
                    ev_b[b, n_events] = b_id
                    ev_imp[b, n_events] = acc_n[p]
                    ev_new[b, n_events] = np.uint8(1) if is_new else np.uint8(0)
                    n_events += 1
                prev[p] = np.uint8(1)

            # goal evaluation
            if goal_kind == GOAL_CONTACT_RUN:
                touching = False
                for p in range(n_bb):
                    if active[p] and ((bb_i[p] == goal_a and bb_j[p] == goal_b)
                                      or (bb_i[p] == goal_b and bb_j[p] == goal_a)):
                        touching = True
                        break
                if touching:
                    run += 1
                    if run > best_run:
                        best_run = run
                else:
                    run = 0
                if run >= goal_run and goal_hit < 0:
                    goal_hit = step
            elif goal_kind == GOAL_REGION_ENTRY:
                bx = px[b, goal_a]
                by = py[b, goal_a]
                if goal_x0 <= bx <= goal_x1 and goal_y0 <= by <= goal_y1 and goal_hit < 0:
                    goal_hit = step

            if (step % observe_every == 0) or goal_hit >= 0 or step == max_steps:
                frame_steps[b, fcount] = step
                for c in range(nc):
                    frames_pos[b, fcount, c, 0] = px[b, c]
                    frames_pos[b, fcount, c, 1] = py[b, c]
                    if record_full:
                        frames_vel[b, fcount, c, 0] = vx[b, c]
                        frames_vel[b, fcount, c, 1] = vy[b, c]
                        frames_ang[b, fcount, c, 0] = ang[b, c]
                        frames_ang[b, fcount, c, 1] = om[b, c]
                fcount += 1

            if goal_hit >= 0:
                break

        frame_counts[b] = fcount
        goal_steps[b] = goal_hit
        best_runs[b] = best_run
        diverged_step[b] = div_step
        diverged_body[b] = div_body
        if record_contacts:
            ev_counts[b] = n_events
