"""Adaptive Dormand-Prince 5(4) stepper for the meridian ODE.

State y = (r, z, psi, vol); independent variable is inward arc length, so

    dr   = -cos(psi)
    dz   = -sin(psi)
    dpsi = lam + sin(psi)/r
    dvol = 2*pi*r*z*cos(psi)

The arc-length form keeps psi = +-pi/2 regular; only r -> 0 needs a guard,
handled by capping the step as r approaches the stop radius.

Status codes: 0 axis reached, 1 psi left (-psi_max, psi_max), 2 step
underflow, 3 step/sample budget exhausted.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit, pick

STATUS_REACHED = 0
STATUS_BLOWUP = 1
STATUS_UNDERFLOW = 2
STATUS_MAXSTEPS = 3

_TWO_PI = 2.0 * math.pi


def _integrate_py(lam, r0, z0, psi0, r_stop, psi_max, rtol, atol, max_steps, h_max, out):
    # Dormand-Prince coefficients
    a21 = 1.0 / 5.0
    a31, a32 = 3.0 / 40.0, 9.0 / 40.0
    a41, a42, a43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
    a51, a52, a53, a54 = (
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    )
    a61, a62, a63, a64, a65 = (
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    )
    b1, b3, b4, b5, b6 = (
        35.0 / 384.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    )
    e1, e3, e4, e5, e6, e7 = (
        71.0 / 57600.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    )

    y = np.empty(4)
    y[0], y[1], y[2], y[3] = r0, z0, psi0, 0.0
    out[0, 0], out[0, 1], out[0, 2], out[0, 3] = r0, z0, psi0, 0.0
    n = 1

    k = np.empty((7, 4))
    ytmp = np.empty(4)
    ynew = np.empty(4)

    def deriv(yy, kk):
        cp = math.cos(yy[2])
        sp = math.sin(yy[2])
        kk[0] = -cp
        kk[1] = -sp
        kk[2] = lam + sp / yy[0]
        kk[3] = _TWO_PI * yy[0] * yy[1] * cp

    deriv(y, k[0])
    h = 1e-4
    h_min = 1e-15
    status = STATUS_MAXSTEPS
    steps = 0
    while steps < max_steps:
        steps += 1
        if y[0] - r_stop <= 1e-6 * max(r_stop, 1e-30):
            status = STATUS_REACHED
            break
        # keep stages safely away from the axis
        h_cap = max(0.75 * (y[0] - r_stop), 0.25 * r_stop)
        if h_cap > h_max:
            h_cap = h_max
        if h > h_cap:
            h = h_cap
        accepted = False
        while not accepted:
            if h < h_min:
                status = STATUS_UNDERFLOW
                steps = max_steps + 1
                break
            for i in range(4):
                ytmp[i] = y[i] + h * a21 * k[0, i]
            deriv(ytmp, k[1])
            for i in range(4):
                ytmp[i] = y[i] + h * (a31 * k[0, i] + a32 * k[1, i])
            deriv(ytmp, k[2])
            for i in range(4):
                ytmp[i] = y[i] + h * (a41 * k[0, i] + a42 * k[1, i] + a43 * k[2, i])
            deriv(ytmp, k[3])
            for i in range(4):
                ytmp[i] = y[i] + h * (
                    a51 * k[0, i] + a52 * k[1, i] + a53 * k[2, i] + a54 * k[3, i]
                )
            deriv(ytmp, k[4])
            for i in range(4):
                ytmp[i] = y[i] + h * (
                    a61 * k[0, i]
                    + a62 * k[1, i]
                    + a63 * k[2, i]
                    + a64 * k[3, i]
                    + a65 * k[4, i]
                )
            deriv(ytmp, k[5])
            for i in range(4):
                ynew[i] = y[i] + h * (
                    b1 * k[0, i] + b3 * k[2, i] + b4 * k[3, i] + b5 * k[4, i] + b6 * k[5, i]
                )
            if ynew[0] <= 0.2 * r_stop:
                h *= 0.5
                continue
            deriv(ynew, k[6])
            errnorm = 0.0
            for i in range(4):
                err_i = h * (
                    e1 * k[0, i]
                    + e3 * k[2, i]
                    + e4 * k[3, i]
                    + e5 * k[4, i]
                    + e6 * k[5, i]
                    + e7 * k[6, i]
                )
                sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
                w = err_i / sc
                errnorm += w * w
            errnorm = math.sqrt(errnorm / 4.0)
            if errnorm <= 1.0:
                accepted = True
            else:
                fac = 0.9 * errnorm ** (-0.2)
                if fac < 0.2:
                    fac = 0.2
                h *= fac
        if steps > max_steps:
            break
        for i in range(4):
            y[i] = ynew[i]
            k[0, i] = k[6, i]  # FSAL
        if n < out.shape[0]:
            out[n, 0], out[n, 1], out[n, 2], out[n, 3] = y[0], y[1], y[2], y[3]
            n += 1
        else:
            status = STATUS_MAXSTEPS
            break
        if abs(y[2]) >= psi_max:
            status = STATUS_BLOWUP
            break
        fac = 5.0 if errnorm == 0.0 else min(5.0, 0.9 * errnorm ** (-0.2))
        h *= max(fac, 0.2)
    return status, n


_integrate_numba = njit(cache=True)(_integrate_py)


def integrate_meridian_raw(
    lam: float,
    r0: float,
    z0: float,
    psi0: float,
    r_stop: float,
    psi_max: float = math.pi / 2 - 1e-9,
    rtol: float = 1e-12,
    atol: float = 1e-13,
    max_steps: int = 200000,
    h_max: float = 1e9,
):
    """Run the stepper; returns (status, samples (n,4) array)."""
    out = np.empty((max_steps + 1, 4))
    impl = pick(_integrate_numba, _integrate_py)
    status, n = impl(
        float(lam),
        float(r0),
        float(z0),
        float(psi0),
        float(r_stop),
        float(psi_max),
        float(rtol),
        float(atol),
        int(max_steps),
        float(h_max),
        out,
    )
    return int(status), out[:n].copy()
