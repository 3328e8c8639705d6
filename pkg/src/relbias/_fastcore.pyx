# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled backend for the training kernels.

Same contract as :mod:`relbias._slowcore.train_epochs`; the whole
epochs x batches x layers loop runs in C. All parameter and state arrays
must be C-contiguous float64 and are updated in place.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, isfinite, log, pow, sqrt, tanh
from libc.string cimport memset

cnp.import_array()

NAME = "fast"

DEF MAXL = 32

cdef double BETA1 = 0.9
cdef double BETA2 = 0.999
cdef double ADAM_EPS = 1e-8
cdef double CLAMP_EPS = 1e-7


cdef inline double _sigmoid(double z) noexcept nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


cdef inline double _activate(double z, int act_id) noexcept nogil:
    if act_id == 0:
        return z if z > 0.0 else 0.0
    if act_id == 1:
        return _sigmoid(z)
    return tanh(z)


cdef inline double _dactivate(double z, double a, int act_id) noexcept nogil:
    if act_id == 0:
        return 1.0 if z > 0.0 else 0.0
    if act_id == 1:
        return a * (1.0 - a)
    return 1.0 - a * a


cdef inline double* _data(object arr, Py_ssize_t expect) except NULL:
    a = <cnp.ndarray> arr
    if cnp.PyArray_TYPE(a) != cnp.NPY_FLOAT64 or not cnp.PyArray_IS_C_CONTIGUOUS(a):
        raise TypeError("kernel arrays must be C-contiguous float64")
    if cnp.PyArray_SIZE(a) != expect:
        raise ValueError("kernel array has unexpected size")
    return <double*> cnp.PyArray_DATA(a)


def train_epochs(list ws, list bs, list m_w, list v_w, list m_b, list v_b,
                 object x, object mid_extra, object y, object perms,
                 Py_ssize_t batch_size, double lr, int act_id, long step0):
    """Minibatch Adam training; see the NumPy twin for the full contract."""
    cdef Py_ssize_t n_layers = len(ws)
    if n_layers < 1 or n_layers > MAXL:
        raise ValueError(f"layer count must be in 1..{MAXL}")

    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] x_arr = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] y_arr = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2, mode="c"] perm_arr = np.ascontiguousarray(perms, dtype=np.int64)

    cdef Py_ssize_t n_items = x_arr.shape[0]
    cdef Py_ssize_t din = x_arr.shape[1]
    cdef Py_ssize_t n_epochs = perm_arr.shape[0]
    if y_arr.shape[0] != n_items or perm_arr.shape[1] != n_items:
        raise ValueError("x, y and perms disagree on the number of items")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")

    cdef bint has_mid = mid_extra is not None
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] mid_arr
    cdef Py_ssize_t ndr = 0
    cdef double* mid_p = NULL
    if has_mid:
        mid_arr = np.ascontiguousarray(mid_extra, dtype=np.float64)
        if mid_arr.shape[0] != n_items:
            raise ValueError("mid_extra row count mismatch")
        ndr = mid_arr.shape[1]
        mid_p = <double*> cnp.PyArray_DATA(mid_arr)

    # Layer geometry. wfull is the width layer l exposes to the next layer
    # (first hidden layer gains the DR block under mid fusion).
    cdef Py_ssize_t wout[MAXL]
    cdef Py_ssize_t win[MAXL]
    cdef Py_ssize_t wfull[MAXL]
    cdef double* w_p[MAXL]
    cdef double* b_p[MAXL]
    cdef double* mw_p[MAXL]
    cdef double* vw_p[MAXL]
    cdef double* mb_p[MAXL]
    cdef double* vb_p[MAXL]
    cdef Py_ssize_t l
    for l in range(n_layers):
        shape = np.shape(ws[l])
        wout[l] = shape[0]
        win[l] = shape[1]
        wfull[l] = wout[l] + (ndr if (l == 0 and has_mid and n_layers > 1) else 0)
        w_p[l] = _data(ws[l], wout[l] * win[l])
        b_p[l] = _data(bs[l], wout[l])
        mw_p[l] = _data(m_w[l], wout[l] * win[l])
        vw_p[l] = _data(v_w[l], wout[l] * win[l])
        mb_p[l] = _data(m_b[l], wout[l])
        vb_p[l] = _data(v_b[l], wout[l])
    if win[0] != din:
        raise ValueError("first layer fan-in does not match the input width")
    if wout[n_layers - 1] != 1:
        raise ValueError("output layer must have a single unit")
    for l in range(1, n_layers):
        if win[l] != wfull[l - 1]:
            raise ValueError("layer fan-in does not match the previous layer width")

    # Workspaces (kept alive via this list).
    keep = []

    cdef double* z_p[MAXL]
    cdef double* a_p[MAXL]
    cdef double* d_p[MAXL]
    cdef double* gw_p[MAXL]
    cdef double* gb_p[MAXL]
    for l in range(n_layers):
        z = np.zeros(batch_size * wout[l]); keep.append(z)
        z_p[l] = <double*> cnp.PyArray_DATA(<cnp.ndarray> z)
        a = np.zeros(batch_size * wfull[l]); keep.append(a)
        a_p[l] = <double*> cnp.PyArray_DATA(<cnp.ndarray> a)
        d = np.zeros(batch_size * wout[l]); keep.append(d)
        d_p[l] = <double*> cnp.PyArray_DATA(<cnp.ndarray> d)
        gw = np.zeros(wout[l] * win[l]); keep.append(gw)
        gw_p[l] = <double*> cnp.PyArray_DATA(<cnp.ndarray> gw)
        gb = np.zeros(wout[l]); keep.append(gb)
        gb_p[l] = <double*> cnp.PyArray_DATA(<cnp.ndarray> gb)

    xb_buf = np.zeros(batch_size * din); keep.append(xb_buf)
    yb_buf = np.zeros(batch_size); keep.append(yb_buf)
    eb_buf = np.zeros(batch_size * max(ndr, 1)); keep.append(eb_buf)
    cdef double* xb = <double*> cnp.PyArray_DATA(<cnp.ndarray> xb_buf)
    cdef double* yb = <double*> cnp.PyArray_DATA(<cnp.ndarray> yb_buf)
    cdef double* eb = <double*> cnp.PyArray_DATA(<cnp.ndarray> eb_buf)

    losses_arr = np.zeros(n_epochs)
    cdef double* losses = <double*> cnp.PyArray_DATA(<cnp.ndarray> losses_arr)

    cdef double* x_p = <double*> cnp.PyArray_DATA(x_arr)
    cdef double* y_p = <double*> cnp.PyArray_DATA(y_arr)
    cdef long* perm_p = <long*> cnp.PyArray_DATA(perm_arr)

    cdef long step = step0
    cdef long diverged = -1
    cdef Py_ssize_t e, start, b, i, o, k, r, last
    cdef double total, s, d_val, p, pc, g, bc1, bc2
    cdef double* inp
    cdef Py_ssize_t inw
    cdef double* wp
    cdef double* gp
    cdef double* mp
    cdef double* vp

    last = n_layers - 1
    with nogil:
        for e in range(n_epochs):
            total = 0.0
            start = 0
            while start < n_items:
                b = batch_size if start + batch_size <= n_items else n_items - start
                # gather the batch
                for i in range(b):
                    r = perm_p[e * n_items + start + i]
                    for k in range(din):
                        xb[i * din + k] = x_p[r * din + k]
                    yb[i] = y_p[r]
                    if has_mid:
                        for k in range(ndr):
                            eb[i * ndr + k] = mid_p[r * ndr + k]

                # forward
                inp = xb
                inw = din
                for l in range(n_layers):
                    if l == last:
                        for i in range(b):
                            s = b_p[last][0]
                            for k in range(inw):
                                s += w_p[last][k] * inp[i * inw + k]
                            p = _sigmoid(s)
                            pc = p
                            if pc < CLAMP_EPS:
                                pc = CLAMP_EPS
                            elif pc > 1.0 - CLAMP_EPS:
                                pc = 1.0 - CLAMP_EPS
                            if yb[i] != 0.0:
                                total -= log(pc)
                            else:
                                total -= log(1.0 - pc)
                            d_p[last][i] = (p - yb[i]) / b
                    else:
                        for i in range(b):
                            for o in range(wout[l]):
                                s = b_p[l][o]
                                for k in range(inw):
                                    s += w_p[l][o * inw + k] * inp[i * inw + k]
                                z_p[l][i * wout[l] + o] = s
                                a_p[l][i * wfull[l] + o] = _activate(s, act_id)
                            if l == 0 and has_mid:
                                for k in range(ndr):
                                    a_p[0][i * wfull[0] + wout[0] + k] = eb[i * ndr + k]
                        inp = a_p[l]
                        inw = wfull[l]

                # backward + gradients
                for l in range(last, -1, -1):
                    if l == 0:
                        inp = xb
                        inw = din
                    else:
                        inp = a_p[l - 1]
                        inw = wfull[l - 1]
                    memset(gw_p[l], 0, sizeof(double) * wout[l] * win[l])
                    for o in range(wout[l]):
                        s = 0.0
                        for i in range(b):
                            s += d_p[l][i * wout[l] + o]
                        gb_p[l][o] = s
                    for i in range(b):
                        for o in range(wout[l]):
                            d_val = d_p[l][i * wout[l] + o]
                            if d_val != 0.0:
                                for k in range(inw):
                                    gw_p[l][o * inw + k] += d_val * inp[i * inw + k]
                    if l > 0:
                        # delta for the previous layer; DR columns (if any)
                        # belong to fixed wiring and receive no gradient.
                        for i in range(b):
                            for k in range(wout[l - 1]):
                                s = 0.0
                                for o in range(wout[l]):
                                    s += d_p[l][i * wout[l] + o] * w_p[l][o * win[l] + k]
                                d_p[l - 1][i * wout[l - 1] + k] = s * _dactivate(
                                    z_p[l - 1][i * wout[l - 1] + k],
                                    a_p[l - 1][i * wfull[l - 1] + k],
                                    act_id,
                                )

                # Adam
                step += 1
                bc1 = 1.0 - pow(BETA1, <double> step)
                bc2 = 1.0 - pow(BETA2, <double> step)
                for l in range(n_layers):
                    wp = w_p[l]; gp = gw_p[l]; mp = mw_p[l]; vp = vw_p[l]
                    for k in range(wout[l] * win[l]):
                        g = gp[k]
                        mp[k] += (1.0 - BETA1) * (g - mp[k])
                        vp[k] += (1.0 - BETA2) * (g * g - vp[k])
                        wp[k] -= lr * (mp[k] / bc1) / (sqrt(vp[k] / bc2) + ADAM_EPS)
                    wp = b_p[l]; gp = gb_p[l]; mp = mb_p[l]; vp = vb_p[l]
                    for k in range(wout[l]):
                        g = gp[k]
                        mp[k] += (1.0 - BETA1) * (g - mp[k])
                        vp[k] += (1.0 - BETA2) * (g * g - vp[k])
                        wp[k] -= lr * (mp[k] / bc1) / (sqrt(vp[k] / bc2) + ADAM_EPS)

                start += b

            losses[e] = total / n_items
            if not isfinite(losses[e]):
                diverged = e
                break

    return losses_arr, int(step), int(diverged)
