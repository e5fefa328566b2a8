"""Numba inner loops for the simulation engines.

All randomness is drawn outside (numpy per-trial Generators); kernels only
scan pre-drawn arrays.  Per-urn state lives in caller-owned scratch arrays
stamped with a globally unique trial id, so nothing is cleared between
trials or between the blocks of one trial.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def build_alias_tables(scaled, prob, alias):
    """Walker/Vose table construction over pre-scaled masses (sum = n)."""
    n = scaled.shape[0]
    small = np.empty(n, np.int64)
    large = np.empty(n, np.int64)
    ns = nl = 0
    for i in range(n):
        prob[i] = 1.0
        alias[i] = i
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        nl -= 1
        l = large[nl]
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small[ns] = l
            ns += 1
        else:
            large[nl] = l
            nl += 1


@njit(cache=True)
def scan_repeat(urns, urn_stamp, trial_id):
    """Index of the first draw whose urn was already hit this trial, else -1."""
    for k in range(urns.shape[0]):
        u = urns[k]
        if urn_stamp[u] == trial_id:
            return k
        urn_stamp[u] = trial_id
    return -1


@njit(cache=True)
def scan_two_color(urns, colors, urn_color, urn_stamp, trial_id):
    """Index of the first ball entering an urn holding a different color, else -1."""
    for k in range(urns.shape[0]):
        u = urns[k]
        if urn_stamp[u] != trial_id:
            urn_stamp[u] = trial_id
            urn_color[u] = colors[k]
        elif urn_color[u] != colors[k]:
            return k
    return -1


@njit(cache=True)
def scan_joint(urns, colors, offset, urn_color, urn_stamp, trial_id, out, found, m_target):
    """Collect collision draw indices (offset + k) until m_target are found.

    Once an urn holds two distinct colors it is marked with -2 and every
    later ball entering it counts as a collision (urns are never reset).
    Returns the updated found count.
    """
    for k in range(urns.shape[0]):
        u = urns[k]
        if urn_stamp[u] != trial_id:
            urn_stamp[u] = trial_id
            urn_color[u] = colors[k]
        elif urn_color[u] == -2 or urn_color[u] != colors[k]:
            urn_color[u] = -2
            out[found] = offset + k
            found += 1
            if found == m_target:
                return found
    return found


@njit(cache=True)
def scan_mfold(urns, colors, q, m, cell_count, cell_stamp, ready, urn_stamp, trial_id):
    """Index of the ball completing m-of-each for two colors in one urn, else -1."""
    for k in range(urns.shape[0]):
        u = urns[k]
        cell = u * q + colors[k]
        if urn_stamp[u] != trial_id:
            urn_stamp[u] = trial_id
            ready[u] = 0
        if cell_stamp[cell] != trial_id:
            cell_stamp[cell] = trial_id
            cell_count[cell] = 0
        cell_count[cell] += 1
        if cell_count[cell] == m:
            ready[u] += 1
            if ready[u] >= 2:
                return k
    return -1


@njit(cache=True)
def scan_run(colors, m, last_color, run_len):
    """First index completing a run of m equal colors, plus carried state.

    Returns (k, last_color, run_len); k = -1 when the block ends mid-run.
    """
    for k in range(colors.shape[0]):
        c = colors[k]
        if c == last_color:
            run_len += 1
        else:
            last_color = c
            run_len = 1
        if run_len >= m:
            return k, last_color, run_len
    return -1, last_color, run_len


@njit(cache=True)
def run_pa_vertices(u01, m, pal_prob, pal_alias, v_start, v_stop,
                    ends, ends_len, colors):
    """Grow a preferential-attachment multigraph from vertex v_start to v_stop.

    ``ends`` is the flat endpoint array (each edge contributes two entries,
    self-loops both); degree-proportional attachment with the newest vertex
    weighted (d+1) falls out of drawing j uniform on {0..M} and mapping
    j == M to the new vertex.  Each vertex consumes exactly m + 2 entries of
    ``u01`` (two for its palette draw, m for its edges), so the stream
    position is v-determined.  Vertex colors are assigned on arrival; returns
    (collision vertex or -1, new ends_len).
    """
    npal = pal_prob.shape[0]
    pos = 0
    for v in range(v_start, v_stop):
        idx = np.int64(u01[pos] * npal)
        if u01[pos + 1] >= pal_prob[idx]:
            idx = pal_alias[idx]
        colors[v] = idx
        pos += 2
        hit = False
        for _ in range(m):
            mtot = ends_len
            j = np.int64(u01[pos] * (mtot + 1))
            pos += 1
            if j == mtot:
                vi = v
            else:
                vi = ends[j]
            ends[ends_len] = v
            ends[ends_len + 1] = vi
            ends_len += 2
            if vi != v and colors[vi] == colors[v]:
                hit = True
        if hit:
            return v, ends_len
    return -1, ends_len
