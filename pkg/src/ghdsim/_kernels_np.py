"""Vectorized pure-numpy render kernel (fallback backend).

One call traces one sample per pixel and accumulates contributions.
The numba kernel in _kernels_nb.py performs the same floating-point
operations per ray in the same order; keep the two in lockstep so both
backends produce identical images.
"""

import numpy as np

_EPS_T = 1e-9


def render_pass(
    accum, count, jx, jy, px, py,
    cam, lens_p, proj_p, flags,
    c_center, c_uax, c_vax, c_norm, c_hw, c_hh,
    tex_off, tex_w, tex_h, tex_rgba,
    p_pos, p_col, point_radius, bg,
):
    h, w = jx.shape
    (cx, cy, cz, rix, riy, riz, upx, upy, upz,
     bax, bay, baz, sr, sv) = cam
    pz, d1, d2, ppx, ppy, aw, ah = lens_p
    pjx, pjy, pjz, pjr2 = proj_p
    micro, keep_ghosts = flags

    cols = np.arange(w, dtype=np.float64)[None, :]
    rows = np.arange(h, dtype=np.float64)[None, :].reshape(-1, 1)

    u = 2.0 * (cols + jx) / w - 1.0
    v = 1.0 - 2.0 * (rows + jy) / h
    a = sr * u
    b = sv * v
    fx = bax + a * rix + b * upx
    fy = bay + a * riy + b * upy
    fz = baz + a * riz + b * upz
    ox = cx + px * rix + py * upx
    oy = cy + px * riy + py * upy
    oz = cz + px * riz + py * upz
    dx = fx - ox
    dy = fy - oy
    dz = fz - oz
    inv_n = 1.0 / np.sqrt(dx * dx + dy * dy + dz * dz)
    dx = dx * inv_n
    dy = dy * inv_n
    dz = dz * inv_n

    down = dz < 0.0
    dzs = np.where(down, dz, -1.0)

    z_top = pz + d2 if micro else pz
    t_e = (z_top - oz) / dzs
    ok = down & (t_e > 0.0)
    ax_ = ox + t_e * dx
    ay_ = oy + t_e * dy
    ok &= (np.abs(ax_) <= aw) & (np.abs(ay_) <= ah)

    if micro:
        inv = -1.0 / dzs
        sx = dx * inv
        sy = dy * inv
        # layer 2: strips normal to y, slab [pz, pz + d2]
        ky = np.floor(ay_ / ppy)
        ey = ay_ - ky * ppy
        adj = ey >= ppy
        ey = np.where(adj, ey - ppy, ey)
        ky = np.where(adj, ky + 1.0, ky)
        ey = np.where(ey < 0.0, 0.0, ey)
        wy = ey + sy * d2
        fly = np.floor(wy / ppy)
        odd2 = (fly - 2.0 * np.floor(fly / 2.0)) == 1.0
        my = wy - 2.0 * ppy * np.floor(wy / (2.0 * ppy))
        eoy = np.where(my <= ppy, my, 2.0 * ppy - my)
        by_ = ky * ppy + eoy
        bx_ = ax_ + sx * d2
        sy2 = np.where(odd2, -sy, sy)
        # layer 1: strips normal to x, slab [pz - d1, pz]
        kx = np.floor(bx_ / ppx)
        ex = bx_ - kx * ppx
        adj = ex >= ppx
        ex = np.where(adj, ex - ppx, ex)
        kx = np.where(adj, kx + 1.0, kx)
        ex = np.where(ex < 0.0, 0.0, ex)
        wx = ex + sx * d1
        flx = np.floor(wx / ppx)
        odd1 = (flx - 2.0 * np.floor(flx / 2.0)) == 1.0
        mx = wx - 2.0 * ppx * np.floor(wx / (2.0 * ppx))
        eox = np.where(mx <= ppx, mx, 2.0 * ppx - mx)
        vcx = kx * ppx + eox
        vcy = by_ + sy2 * d1
        vcz = pz - d1
        gx = np.where(odd1, -dx, dx)
        gy = np.where(odd2, -dy, dy)
        imaging = odd1 & odd2
        kept = imaging | bool(keep_ghosts)
    else:
        vcx = ax_
        vcy = ay_
        vcz = pz
        gx = -dx
        gy = -dy
        kept = np.ones((h, w), dtype=bool)
    gz = dz

    excluded = ok & ~kept

    # gate: extend the device-side ray to the projector plane
    sq = (pjz - vcz) / dzs
    qx = vcx + sq * gx - pjx
    qy = vcy + sq * gy - pjy
    gate = qx * qx + qy * qy <= pjr2
    visible = ok & kept & gate

    # visibility line: mirror of the device-side ray across the mid-plane
    vx = vcx
    vy = vcy
    vz = 2.0 * pz - vcz
    hx = gx
    hy = gy
    hz = -gz

    best_t = np.full((h, w), np.inf)
    best_c = np.empty((h, w, 3))
    best_c[:, :] = bg

    for i in range(c_center.shape[0]):
        ccx, ccy, ccz = c_center[i]
        nx, ny, nz = c_norm[i]
        uax, uay, uaz = c_uax[i]
        vax, vay, vaz = c_vax[i]
        chw = c_hw[i]
        chh = c_hh[i]
        tw = int(tex_w[i])
        th = int(tex_h[i])
        off = int(tex_off[i])

        den = hx * nx + hy * ny + hz * nz
        dens = np.where(np.abs(den) > 1e-12, den, 1.0)
        tt = ((ccx - vx) * nx + (ccy - vy) * ny + (ccz - vz) * nz) / dens
        xx = vx + tt * hx
        xy = vy + tt * hy
        xz = vz + tt * hz
        lu = (xx - ccx) * uax + (xy - ccy) * uay + (xz - ccz) * uaz
        lv = (xx - ccx) * vax + (xy - ccy) * vay + (xz - ccz) * vaz
        t_eye = (xx - ox) * dx + (xy - oy) * dy + (xz - oz) * dz
        cand = (
            visible
            & (np.abs(den) > 1e-12)
            & (np.abs(lu) <= chw)
            & (np.abs(lv) <= chh)
            & (t_eye > _EPS_T)
            & (t_eye < best_t)
        )
        ti = np.clip(
            np.floor((lu + chw) / (2.0 * chw) * tw).astype(np.int64), 0, tw - 1
        )
        tj = np.clip(
            np.floor((chh - lv) / (2.0 * chh) * th).astype(np.int64), 0, th - 1
        )
        texel = tex_rgba[off + tj * tw + ti]
        cand &= texel[:, :, 3] >= 0.5
        best_t = np.where(cand, t_eye, best_t)
        best_c = np.where(cand[:, :, None], texel[:, :, :3], best_c)

    r2 = point_radius * point_radius
    for i in range(p_pos.shape[0]):
        ocx = vx - p_pos[i, 0]
        ocy = vy - p_pos[i, 1]
        ocz = vz - p_pos[i, 2]
        bq = ocx * hx + ocy * hy + ocz * hz
        cq = ocx * ocx + ocy * ocy + ocz * ocz - r2
        disc = bq * bq - cq
        has = disc >= 0.0
        root = np.sqrt(np.where(has, disc, 0.0))
        for sign in (-1.0, 1.0):
            tt = -bq + sign * root
            xx = vx + tt * hx
            xy = vy + tt * hy
            xz = vz + tt * hz
            t_eye = (xx - ox) * dx + (xy - oy) * dy + (xz - oz) * dz
            cand = visible & has & (t_eye > _EPS_T) & (t_eye < best_t)
            best_t = np.where(cand, t_eye, best_t)
            best_c = np.where(
                cand[:, :, None], p_col[i][None, None, :], best_c
            )

    # accumulate deltas from the background: samples that see no content
    # only bump the count, so an all-background pixel stays exactly the
    # background after averaging
    hit = visible & np.isfinite(best_t)
    accum += np.where(hit[:, :, None], best_c - bg[None, None, :], 0.0)
    count += (~excluded).astype(np.int32)
