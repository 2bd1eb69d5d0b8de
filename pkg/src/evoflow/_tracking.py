"""Compiled per-step update of the tracker counters.

Shared by :meth:`evoflow.trackers.Trackers.observe` and the chain engine so
both paths apply identical bookkeeping.
"""
import numpy as np
from numba import njit

EV_BIRTH = 0
EV_DEATH = 1
EV_NULL = 2

# core counter slots
N = 0
T_N = 1
K_N = 2
BIRTHS = 3
DEATHS = 4
NULL_DEATHS = 5
L_SIZE = 6
PARTIAL_G = 7
PARTIAL_E = 8
SUM_G = 9
COUNT_G = 10
SUM_E = 11
COUNT_E = 12
G_PENDING = 13
E_PENDING = 14
REPLICATES = 15
N_CORE = 16


@njit(cache=True)
def observe_event(core, intervals, births_in, hist, hist_lo, hist_hi,
                  gbuf, ebuf, kind, x, l_after):
    core[N] += 1
    if kind == EV_BIRTH:
        core[BIRTHS] += 1
        for j in range(intervals.shape[0]):
            if intervals[j, 0] < x < intervals[j, 1]:
                births_in[j] += 1
        nbins = hist.shape[0] - 2
        if nbins > 0:
            if x < hist_lo:
                hist[0] += 1
            elif x >= hist_hi:
                hist[nbins + 1] += 1
            else:
                k = int((x - hist_lo) / (hist_hi - hist_lo) * nbins)
                if k >= nbins:
                    k = nbins - 1
                hist[k + 1] += 1
    elif kind == EV_DEATH:
        core[DEATHS] += 1
    else:
        core[NULL_DEATHS] += 1

    l_prev = core[L_SIZE]
    if l_prev > 0:
        # inside a nonempty stretch (an E record)
        core[PARTIAL_E] += 1
        if l_after == 0:
            e = core[PARTIAL_E]
            ebuf[core[E_PENDING]] = e
            core[E_PENDING] += 1
            core[SUM_E] += e
            core[COUNT_E] += 1
            core[PARTIAL_E] = 0
            if l_prev == 1:
                core[K_N] += 1
    else:
        core[PARTIAL_G] += 1
        if l_after > 0:
            g = core[PARTIAL_G]
            gbuf[core[G_PENDING]] = g
            core[G_PENDING] += 1
            core[SUM_G] += g
            core[COUNT_G] += 1
            core[PARTIAL_G] = 0
    if l_after == 0:
        core[T_N] += 1
    core[L_SIZE] = l_after


def empty_core() -> np.ndarray:
    return np.zeros(N_CORE, dtype=np.int64)
