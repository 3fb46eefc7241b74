"""Numba @njit render kernel (default backend).

Scalar per-pixel twin of _kernels_np.render_pass: identical formulas in
identical order, so both backends produce identical images. Rows are
processed in parallel; every pixel only writes its own accumulator slot.
"""

import numpy as np
from numba import njit, prange

_EPS_T = 1e-9


@njit(cache=True, parallel=True, nogil=True)
def render_pass(
    accum, count, jx, jy, px, py,
    cam, lens_p, proj_p, flags,
    c_center, c_uax, c_vax, c_norm, c_hw, c_hh,
    tex_off, tex_w, tex_h, tex_rgba,
    p_pos, p_col, point_radius, bg,
):
    h, w = jx.shape
    cx = cam[0]; cy = cam[1]; cz = cam[2]
    rix = cam[3]; riy = cam[4]; riz = cam[5]
    upx = cam[6]; upy = cam[7]; upz = cam[8]
    bax = cam[9]; bay = cam[10]; baz = cam[11]
    sr = cam[12]; sv = cam[13]
    pz = lens_p[0]; d1 = lens_p[1]; d2 = lens_p[2]
    ppx = lens_p[3]; ppy = lens_p[4]; aw = lens_p[5]; ah = lens_p[6]
    pjx = proj_p[0]; pjy = proj_p[1]; pjz = proj_p[2]; pjr2 = proj_p[3]
    micro = flags[0] != 0
    keep_ghosts = flags[1] != 0
    z_top = pz + d2 if micro else pz
    n_cards = c_center.shape[0]
    n_points = p_pos.shape[0]
    r2 = point_radius * point_radius

    for i in prange(h):
        for j in range(w):
            u = 2.0 * (j + jx[i, j]) / w - 1.0
            v = 1.0 - 2.0 * (i + jy[i, j]) / h
            a = sr * u
            b = sv * v
            fx = bax + a * rix + b * upx
            fy = bay + a * riy + b * upy
            fz = baz + a * riz + b * upz
            ox = cx + px[i, j] * rix + py[i, j] * upx
            oy = cy + px[i, j] * riy + py[i, j] * upy
            oz = cz + px[i, j] * riz + py[i, j] * upz
            dx = fx - ox
            dy = fy - oy
            dz = fz - oz
            inv_n = 1.0 / np.sqrt(dx * dx + dy * dy + dz * dz)
            dx = dx * inv_n
            dy = dy * inv_n
            dz = dz * inv_n

            excluded = False
            hit = False
            col_r = 0.0
            col_g = 0.0
            col_b = 0.0

            while dz < 0.0:  # single-pass block; break = ray sees background
                t_e = (z_top - oz) / dz
                if t_e <= 0.0:
                    break
                ax_ = ox + t_e * dx
                ay_ = oy + t_e * dy
                if np.abs(ax_) > aw or np.abs(ay_) > ah:
                    break

                if micro:
                    inv = -1.0 / dz
                    sx = dx * inv
                    sy = dy * inv
                    ky = np.floor(ay_ / ppy)
                    ey = ay_ - ky * ppy
                    if ey >= ppy:
                        ey = ey - ppy
                        ky = ky + 1.0
                    if ey < 0.0:
                        ey = 0.0
                    wy = ey + sy * d2
                    fly = np.floor(wy / ppy)
                    odd2 = (fly - 2.0 * np.floor(fly / 2.0)) == 1.0
                    my = wy - 2.0 * ppy * np.floor(wy / (2.0 * ppy))
                    eoy = my if my <= ppy else 2.0 * ppy - my
                    by_ = ky * ppy + eoy
                    bx_ = ax_ + sx * d2
                    sy2 = -sy if odd2 else sy
                    kx = np.floor(bx_ / ppx)
                    ex = bx_ - kx * ppx
                    if ex >= ppx:
                        ex = ex - ppx
                        kx = kx + 1.0
                    if ex < 0.0:
                        ex = 0.0
                    wx = ex + sx * d1
                    flx = np.floor(wx / ppx)
                    odd1 = (flx - 2.0 * np.floor(flx / 2.0)) == 1.0
                    mx = wx - 2.0 * ppx * np.floor(wx / (2.0 * ppx))
                    eox = mx if mx <= ppx else 2.0 * ppx - mx
                    vcx = kx * ppx + eox
                    vcy = by_ + sy2 * d1
                    vcz = pz - d1
                    gx = -dx if odd1 else dx
                    gy = -dy if odd2 else dy
                    kept = (odd1 and odd2) or keep_ghosts
                    if not kept:
                        excluded = True
                        break
                else:
                    vcx = ax_
                    vcy = ay_
                    vcz = pz
                    gx = -dx
                    gy = -dy
                gz = dz

                sq = (pjz - vcz) / dz
                qx = vcx + sq * gx - pjx
                qy = vcy + sq * gy - pjy
                if qx * qx + qy * qy > pjr2:
                    break

                vx = vcx
                vy = vcy
                vz = 2.0 * pz - vcz
                hx = gx
                hy = gy
                hz = -gz

                best_t = np.inf
                for k in range(n_cards):
                    nx = c_norm[k, 0]; ny = c_norm[k, 1]; nz = c_norm[k, 2]
                    den = hx * nx + hy * ny + hz * nz
                    if np.abs(den) <= 1e-12:
                        continue
                    ccx = c_center[k, 0]; ccy = c_center[k, 1]; ccz = c_center[k, 2]
                    tt = ((ccx - vx) * nx + (ccy - vy) * ny + (ccz - vz) * nz) / den
                    xx = vx + tt * hx
                    xy = vy + tt * hy
                    xz = vz + tt * hz
                    lu = ((xx - ccx) * c_uax[k, 0] + (xy - ccy) * c_uax[k, 1]
                          + (xz - ccz) * c_uax[k, 2])
                    lv = ((xx - ccx) * c_vax[k, 0] + (xy - ccy) * c_vax[k, 1]
                          + (xz - ccz) * c_vax[k, 2])
                    chw = c_hw[k]
                    chh = c_hh[k]
                    if np.abs(lu) > chw or np.abs(lv) > chh:
                        continue
                    t_eye = (xx - ox) * dx + (xy - oy) * dy + (xz - oz) * dz
                    if t_eye <= _EPS_T or t_eye >= best_t:
                        continue
                    tw = tex_w[k]
                    th = tex_h[k]
                    ti = np.int64(np.floor((lu + chw) / (2.0 * chw) * tw))
                    if ti < 0:
                        ti = 0
                    elif ti > tw - 1:
                        ti = tw - 1
                    tj = np.int64(np.floor((chh - lv) / (2.0 * chh) * th))
                    if tj < 0:
                        tj = 0
                    elif tj > th - 1:
                        tj = th - 1
                    idx = tex_off[k] + tj * tw + ti
                    if tex_rgba[idx, 3] < 0.5:
                        continue
                    best_t = t_eye
                    col_r = tex_rgba[idx, 0]
                    col_g = tex_rgba[idx, 1]
                    col_b = tex_rgba[idx, 2]

                for k in range(n_points):
                    ocx = vx - p_pos[k, 0]
                    ocy = vy - p_pos[k, 1]
                    ocz = vz - p_pos[k, 2]
                    bq = ocx * hx + ocy * hy + ocz * hz
                    cq = ocx * ocx + ocy * ocy + ocz * ocz - r2
                    disc = bq * bq - cq
                    if disc < 0.0:
                        continue
                    root = np.sqrt(disc)
                    for s in range(2):
                        tt = -bq - root if s == 0 else -bq + root
                        xx = vx + tt * hx
                        xy = vy + tt * hy
                        xz = vz + tt * hz
                        t_eye = (xx - ox) * dx + (xy - oy) * dy + (xz - oz) * dz
                        if t_eye > _EPS_T and t_eye < best_t:
                            best_t = t_eye
                            col_r = p_col[k, 0]
                            col_g = p_col[k, 1]
                            col_b = p_col[k, 2]
                hit = best_t < np.inf
                break

            if not excluded:
                if hit:
                    accum[i, j, 0] += col_r - bg[0]
                    accum[i, j, 1] += col_g - bg[1]
                    accum[i, j, 2] += col_b - bg[2]
                count[i, j] += 1
