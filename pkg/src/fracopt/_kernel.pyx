# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch evaluator for expression programs (see expr.compile_program).

Semantics match _kernel_py exactly; do not build with -ffast-math.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, fabs, sin, cos, pow, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef int _run(const long long[:, ::1] code, const double[::1] consts,
              const double[:, ::1] X, Py_ssize_t row, double* stack,
              double* out) noexcept nogil:
    cdef Py_ssize_t k, top = 0
    cdef long long op, arg
    cdef double a, b, x
    for k in range(code.shape[0]):
        op = code[k, 0]
        arg = code[k, 1]
        if op == 0:
            x = consts[arg]
        elif op == 1:
            x = X[row, arg]
        elif op <= 8:
            top -= 1
            a = stack[top]
            if op == 2:
                x = -a
            elif op == 3:
                x = exp(a)
            elif op == 4:
                if a <= 0.0:
                    return 1
                x = log(a)
            elif op == 5:
                if a < 0.0:
                    return 1
                x = sqrt(a)
            elif op == 6:
                x = fabs(a)
            elif op == 7:
                x = sin(a)
            else:
                x = cos(a)
        else:
            top -= 1
            b = stack[top]
            top -= 1
            a = stack[top]
            if op == 9:
                x = a + b
            elif op == 10:
                x = a - b
            elif op == 11:
                x = a * b
            elif op == 12:
                if b == 0.0:
                    return 1
                x = a / b
            elif op == 13:
                x = pow(a, b)
            elif op == 14:
                x = b if b < a else a
            else:
                x = b if b > a else a
        if not isfinite(x):
            return 1
        stack[top] = x
        top += 1
    out[0] = stack[top - 1]
    return 0


def eval_batch(code, consts, Py_ssize_t stack_size, X):
    cdef const long long[:, ::1] c = np.ascontiguousarray(code, dtype=np.int64)
    cdef const double[::1] cs = np.ascontiguousarray(consts, dtype=np.float64)
    cdef const double[:, ::1] xs = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], i
    values = np.zeros(n, dtype=np.float64)
    status = np.zeros(n, dtype=np.int8)
    cdef double[::1] vv = values
    cdef signed char[::1] ss = status
    cdef double* stack = <double*> malloc(max(stack_size, 1) * sizeof(double))
    cdef double v
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                if _run(c, cs, xs, i, stack, &v):
                    ss[i] = 1
                else:
                    vv[i] = v
    finally:
        free(stack)
    return values, status


def eval_ratio(code_a, consts_a, code_b, consts_b, Py_ssize_t stack_size, X,
               double sign, double zero_tol):
    cdef const long long[:, ::1] ca = np.ascontiguousarray(code_a, dtype=np.int64)
    cdef const double[::1] csa = np.ascontiguousarray(consts_a, dtype=np.float64)
    cdef const long long[:, ::1] cb = np.ascontiguousarray(code_b, dtype=np.int64)
    cdef const double[::1] csb = np.ascontiguousarray(consts_b, dtype=np.float64)
    cdef const double[:, ::1] xs = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], i
    values = np.zeros(n, dtype=np.float64)
    status = np.zeros(n, dtype=np.int8)
    cdef double[::1] vv = values
    cdef signed char[::1] ss = status
    cdef double* stack = <double*> malloc(max(stack_size, 1) * sizeof(double))
    cdef double a, b, c
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                if _run(cb, csb, xs, i, stack, &b):
                    ss[i] = 2
                    continue
                if not (b * sign > 0.0) or fabs(b) < zero_tol:
                    ss[i] = 3
                    continue
                if _run(ca, csa, xs, i, stack, &a):
                    ss[i] = 1
                    continue
                c = a / b
                if not isfinite(c):
                    ss[i] = 1
                    continue
                vv[i] = c
    finally:
        free(stack)
    return values, status
