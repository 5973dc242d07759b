"""Pure-numpy twin of the compiled walk kernel.

Vectorizes trajectories in chunks while consuming exactly the same
per-trajectory uniform streams as qwalklab.sector._kernel, so both
backends produce bit-identical statistics for a given seed.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 1024
_BLOCK = 512


def run_walks(gammas, cum, r_inc, weights, start_alpha, horizon, checkpoints, n_traj, make_generator):
    """Run all trajectories; returns (rho_cp, visits, last_b, hist, rho_final)."""
    ncp = checkpoints.shape[0]
    hist_offset = int(np.abs(r_inc).max(initial=0))
    hist = np.zeros(2 * hist_offset + 1, dtype=np.int64)
    rho_cp = np.zeros((n_traj, ncp), dtype=np.int64)
    visits = np.zeros(n_traj, dtype=np.int64)
    last_b = np.full(n_traj, -1, dtype=np.int64)
    rho_final = np.zeros(n_traj, dtype=np.int64)

    for lo in range(0, n_traj, _CHUNK):
        hi = min(lo + _CHUNK, n_traj)
        c = hi - lo
        gens = [make_generator(i) for i in range(lo, hi)]
        alpha = np.tile(start_alpha, (c, 1)).astype(np.int64)
        r_cur = (alpha[:, :-1] - alpha[:, 1:]) @ weights
        c_visits = np.zeros(c, dtype=np.int64)
        c_last = np.full(c, -1, dtype=np.int64)
        cp_i = 0
        t = 0
        while t < horizon:
            block = min(_BLOCK, horizon - t)
            u_block = np.empty((c, block))
            for ci, g in enumerate(gens):
                u_block[ci] = g.random(block)
            for tb in range(block):
                while cp_i < ncp and checkpoints[cp_i] == t:
                    rho_cp[lo:hi, cp_i] = r_cur
                    cp_i += 1
                boundary = (alpha[:, :-1] == alpha[:, 1:]).any(axis=1)
                c_visits += boundary
                c_last[boundary] = t
                j = np.searchsorted(cum, u_block[:, tb], side="right")
                alpha += gammas[j]
                alpha.sort(axis=1)
                alpha = alpha[:, ::-1].copy()
                alpha -= alpha[:, -1:]
                r_cur = (alpha[:, :-1] - alpha[:, 1:]) @ weights
                interior_inc = r_inc[j[~boundary]]
                if interior_inc.size:
                    hist += np.bincount(interior_inc + hist_offset, minlength=hist.size)
                t += 1
        boundary = (alpha[:, :-1] == alpha[:, 1:]).any(axis=1)
        c_last[boundary] = horizon
        while cp_i < ncp and checkpoints[cp_i] == horizon:
            rho_cp[lo:hi, cp_i] = r_cur
            cp_i += 1
        visits[lo:hi] = c_visits
        last_b[lo:hi] = c_last
        rho_final[lo:hi] = r_cur
    return rho_cp, visits, last_b, hist, rho_final
