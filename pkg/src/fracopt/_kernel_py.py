"""Pure-Python batch evaluator for compiled expression programs.

Mirrors ``_kernel.pyx`` operation for operation; both go through the platform
libm so results agree bit for bit.
"""

import math

import numpy as np

OK, FAIL_A, FAIL_B, BAD_SIGN = 0, 1, 2, 3


def _run(code, consts, row):
    stack = []
    push = stack.append
    pop = stack.pop
    for op, arg in code:
        if op == 0:
            x = consts[arg]
        elif op == 1:
            x = row[arg]
        elif op <= 8:
            a = pop()
            if op == 2:
                x = -a
            elif op == 3:
                try:
                    x = math.exp(a)
                except OverflowError:
                    return None
            elif op == 4:
                if a <= 0.0:
                    return None
                x = math.log(a)
            elif op == 5:
                if a < 0.0:
                    return None
                x = math.sqrt(a)
            elif op == 6:
                x = math.fabs(a)
            elif op == 7:
                x = math.sin(a)
            else:
                x = math.cos(a)
        else:
            b = pop()
            a = pop()
            if op == 9:
                x = a + b
            elif op == 10:
                x = a - b
            elif op == 11:
                x = a * b
            elif op == 12:
                if b == 0.0:
                    return None
                x = a / b
            elif op == 13:
                try:
                    x = math.pow(a, b)
                except (ValueError, OverflowError):
                    return None
            elif op == 14:
                x = b if b < a else a
            else:
                x = b if b > a else a
        if x - x != 0.0:  # NaN or +-inf
            return None
        push(x)
    return stack[-1]


def _as_code(code):
    return [(int(op), int(arg)) for op, arg in np.asarray(code)]


def eval_batch(code, consts, stack_size, X):
    """Evaluate one program on every row of ``X``; status 1 marks a domain failure."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    prog = _as_code(code)
    cs = [float(c) for c in consts]
    n = X.shape[0]
    values = np.zeros(n, dtype=np.float64)
    status = np.zeros(n, dtype=np.int8)
    for i, row in enumerate(X.tolist()):
        v = _run(prog, cs, row)
        if v is None:
            status[i] = 1
        else:
            values[i] = v
    return values, status


def eval_ratio(code_a, consts_a, code_b, consts_b, stack_size, X, sign, zero_tol):
    """Evaluate C = A/B on every row of ``X``.

    ``sign`` is +1 or -1 (declared sign of B). Status: 0 ok, 1 A failed or the
    ratio overflowed, 2 B failed, 3 B has the wrong sign or |B| < zero_tol.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    pa, pb = _as_code(code_a), _as_code(code_b)
    ca = [float(c) for c in consts_a]
    cb = [float(c) for c in consts_b]
    n = X.shape[0]
    values = np.zeros(n, dtype=np.float64)
    status = np.zeros(n, dtype=np.int8)
    for i, row in enumerate(X.tolist()):
        b = _run(pb, cb, row)
        if b is None:
            status[i] = FAIL_B
            continue
        if not (b * sign > 0.0) or math.fabs(b) < zero_tol:
            status[i] = BAD_SIGN
            continue
        a = _run(pa, ca, row)
        if a is None:
            status[i] = FAIL_A
            continue
        c = a / b
        if c - c != 0.0:
            status[i] = FAIL_A
            continue
        values[i] = c
    return values, status
