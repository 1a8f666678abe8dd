"""Compiled inner loops for running whole circuits on a state vector.

A circuit is flattened to arrays (see ``gates.CompiledCircuit``):

* ``kind[g]``  0 = controlled 2x2 on one target, 1 = 4x4 on a qubit pair
* ``cmask[g]`` bitmask of control bits (kind 0)
* ``tbit[g]``  bitmask of the target (kind 0) or high qubit (kind 1)
* ``tbit2[g]`` bitmask of the low qubit (kind 1)
* ``m2[g]``    2x2 target-block matrix (kind 0)
* ``m4[aux[g]]`` 4x4 matrix (kind 1)

The static-imperfection kick ``exp(i sum eta_l Z_l) prod exp(i mu_l X_l X_l+1)``
is applied after every gate when ``kick`` is true.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _apply_cu(psi, cmask, tbit, u00, u01, u10, u11):
    n = psi.shape[0]
    if u01 == 0 and u10 == 0:
        for i in range(n):
            if (i & cmask) == cmask:
                if i & tbit:
                    psi[i] *= u11
                else:
                    psi[i] *= u00
        return
    for i0 in range(n):
        if i0 & tbit:
            continue
        if (i0 & cmask) != cmask:
            continue
        i1 = i0 | tbit
        a = psi[i0]
        b = psi[i1]
        psi[i0] = u00 * a + u01 * b
        psi[i1] = u10 * a + u11 * b


@njit(cache=True)
def _apply_2q(psi, hbit, lbit, m):
    n = psi.shape[0]
    for i in range(n):
        if i & hbit or i & lbit:
            continue
        j0 = i
        j1 = i | lbit
        j2 = i | hbit
        j3 = i | hbit | lbit
        a0 = psi[j0]
        a1 = psi[j1]
        a2 = psi[j2]
        a3 = psi[j3]
        psi[j0] = m[0, 0] * a0 + m[0, 1] * a1 + m[0, 2] * a2 + m[0, 3] * a3
        psi[j1] = m[1, 0] * a0 + m[1, 1] * a1 + m[1, 2] * a2 + m[1, 3] * a3
        psi[j2] = m[2, 0] * a0 + m[2, 1] * a1 + m[2, 2] * a2 + m[2, 3] * a3
        psi[j3] = m[3, 0] * a0 + m[3, 1] * a1 + m[3, 2] * a2 + m[3, 3] * a3


@njit(cache=True)
def _apply_gate(psi, g, kind, cmask, tbit, tbit2, m2, m4, aux):
    if kind[g] == 0:
        _apply_cu(psi, cmask[g], tbit[g], m2[g, 0, 0], m2[g, 0, 1], m2[g, 1, 0], m2[g, 1, 1])
    else:
        _apply_2q(psi, tbit[g], tbit2[g], m4[aux[g]])


@njit(cache=True)
def _static_kick(psi, zphase, xx_masks, xx_cos, xx_isin):
    n = psi.shape[0]
    for i in range(n):
        psi[i] *= zphase[i]
    for l in range(xx_masks.shape[0]):
        mask = xx_masks[l]
        c = xx_cos[l]
        s = xx_isin[l]
        for i in range(n):
            j = i ^ mask
            if j < i:
                continue
            a = psi[i]
            b = psi[j]
            psi[i] = c * a + s * b
            psi[j] = c * b + s * a


@njit(cache=True)
def run_circuit(psi, kind, cmask, tbit, tbit2, m2, m4, aux, kick, zphase, xx_masks, xx_cos, xx_isin):
    """Apply all gates in order; optionally kick after each. Returns kick count."""
    kicks = 0
    for g in range(kind.shape[0]):
        _apply_gate(psi, g, kind, cmask, tbit, tbit2, m2, m4, aux)
        if kick:
            _static_kick(psi, zphase, xx_masks, xx_cos, xx_isin)
            kicks += 1
    return kicks


@njit(cache=True)
def run_pair_traced(
    psi_ref, psi, kind, cmask, tbit, tbit2, m2_ref, m2, m4_ref, m4, aux,
    kick, zphase, xx_masks, xx_cos, xx_isin,
):
    """Advance an ideal and an imperfect state gate by gate.

    Returns the fidelity ``|<ref|psi>|^2`` after each gate.
    """
    ng = kind.shape[0]
    out = np.empty(ng)
    n = psi.shape[0]
    for g in range(ng):
        _apply_gate(psi_ref, g, kind, cmask, tbit, tbit2, m2_ref, m4_ref, aux)
        _apply_gate(psi, g, kind, cmask, tbit, tbit2, m2, m4, aux)
        if kick:
            _static_kick(psi, zphase, xx_masks, xx_cos, xx_isin)
        re = 0.0
        im = 0.0
        for i in range(n):
            a = psi_ref[i]
            b = psi[i]
            re += a.real * b.real + a.imag * b.imag
            im += a.real * b.imag - a.imag * b.real
        out[g] = re * re + im * im
    return out
