# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop for Monte Carlo trajectories of the sector walk.

Semantics are shared bit-for-bit with qwalklab.sector._fallback: each
trajectory consumes one uniform per step from its own substream, the
move index is the bisect-right position of the uniform in the
cumulative-probability table, and the exponent vector is folded by an
in-place descending sort followed by rebasing to 0.
"""

DEF MAXD = 16


cdef inline Py_ssize_t _bisect_right(const double[::1] cum, double u) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = cum.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def run_trajectory(
    const long long[:, ::1] gammas,
    const double[::1] cum,
    const long long[::1] r_inc,
    const long long[::1] weights,
    const long long[::1] start_alpha,
    const double[::1] uniforms,
    const long long[::1] checkpoints,
    long long[::1] rho_out,
    long long[::1] hist,
    long long hist_offset,
):
    """Run one trajectory; returns (boundary_visits, last_boundary_step, final_R).

    rho_out receives the R-norm at each checkpoint time; hist accumulates
    interior-step R-increments at index increment + hist_offset.
    """
    cdef Py_ssize_t d = start_alpha.shape[0]
    cdef Py_ssize_t horizon = uniforms.shape[0]
    cdef Py_ssize_t ncp = checkpoints.shape[0]
    cdef long long alpha[MAXD]
    cdef Py_ssize_t i, t, j, z
    cdef long long visits = 0, last_b = -1, r_cur = 0, base, tmp
    cdef bint boundary
    cdef Py_ssize_t cp_i = 0

    if d > MAXD:
        raise ValueError("rank too large for the compiled kernel")
    for i in range(d):
        alpha[i] = start_alpha[i]
    for i in range(d - 1):
        r_cur += weights[i] * (alpha[i] - alpha[i + 1])

    with nogil:
        for t in range(horizon):
            while cp_i < ncp and checkpoints[cp_i] == t:
                rho_out[cp_i] = r_cur
                cp_i += 1
            boundary = False
            for i in range(d - 1):
                if alpha[i] == alpha[i + 1]:
                    boundary = True
                    break
            if boundary:
                visits += 1
                last_b = t
            j = _bisect_right(cum, uniforms[t])
            for i in range(d):
                alpha[i] += gammas[j, i]
            # insertion sort, descending; input is nearly sorted already
            for i in range(1, d):
                tmp = alpha[i]
                z = i
                while z > 0 and alpha[z - 1] < tmp:
                    alpha[z] = alpha[z - 1]
                    z -= 1
                alpha[z] = tmp
            base = alpha[d - 1]
            if base != 0:
                for i in range(d):
                    alpha[i] -= base
            if boundary:
                r_cur = 0
                for i in range(d - 1):
                    r_cur += weights[i] * (alpha[i] - alpha[i + 1])
            else:
                r_cur += r_inc[j]
                hist[r_inc[j] + hist_offset] += 1
        boundary = False
        for i in range(d - 1):
            if alpha[i] == alpha[i + 1]:
                boundary = True
                break
        if boundary:
            last_b = horizon
    while cp_i < ncp and checkpoints[cp_i] == horizon:
        rho_out[cp_i] = r_cur
        cp_i += 1
    return visits, last_b, r_cur
