"""Compiled numeric core shared by the network, trainer and metrics modules.

Every arithmetic path that must be reproducible bit-for-bit lives here once:
the public single-step operations and the whole-epoch / whole-rollout loops
call the same compiled functions, so repeating a step by hand gives the exact
same bits as running it inside a loop.

Packed layout: a network with units u = 0..n_units-1 (blocks concatenated in
order) is a single float64 matrix ``wb`` of shape (n_units, 1 + n_in) whose
column 0 is the bias and columns 1..n_in are the input weights. ``starts`` is
the int64 prefix array of block boundaries (block i owns rows starts[i] to
starts[i+1]). Evaluation order is fixed: bias first, inputs in index order,
units multiplied in index order, blocks summed in index order.
"""

import math

import numpy as np
from numba import njit

# status codes returned instead of exceptions (numba cannot raise rich errors)
OK = 0
DIVERGED = 1  # block product overflow or non-finite sum
DEAD_EPOCH = 2  # output derivative underflowed to zero on every step of an epoch

# a block product beyond this bound is treated as divergence
PRODUCT_LIMIT = 1e100

GRAD_PAPER = 0
GRAD_EXACT = 1


@njit(cache=True)
def sigmoid(x):
    # two-branch form avoids overflow of exp at large |x|
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    t = math.exp(x)
    return t / (1.0 + t)


@njit(cache=True)
def assemble(x, prev_error, prev_output, has_error, has_output, z):
    """Fill z with the external inputs followed by the active feedbacks
    (error first, then output)."""
    m = x.size
    for g in range(m):
        z[g] = x[g]
    pos = m
    if has_error:
        z[pos] = prev_error
        pos += 1
    if has_output:
        z[pos] = prev_output


@njit(cache=True)
def forward(wb, starts, z, h, p):
    """Fill the per-unit net sums h and per-block products p; return the
    squashed output."""
    n_units = wb.shape[0]
    n_in = z.size
    for u in range(n_units):
        acc = wb[u, 0]
        for g in range(n_in):
            acc += wb[u, 1 + g] * z[g]
        h[u] = acc
    k = starts.size - 1
    s = 0.0
    for i in range(k):
        prod = 1.0
        for u in range(starts[i], starts[i + 1]):
            prod *= h[u]
        p[i] = prod
        s += prod
    return sigmoid(s)


@njit(cache=True)
def rtrl_step(wb, starts, unit_block, first_trainable, x, target,
              has_error, has_output, err_col, out_col,
              prev_error, prev_output, dy, prev_delta,
              eta, mu, grad_mode, z, h, p):
    """One online training step on a single pattern.

    Mutates the trainable rows of wb, and dy / prev_delta, in place.
    z, h, p are scratch buffers of sizes n_in, n_units and k.
    Returns (e, y, yprime, status); on a DIVERGED status nothing has been
    updated beyond the scratch buffers.
    """
    assemble(x, prev_error, prev_output, has_error, has_output, z)
    y = forward(wb, starts, z, h, p)
    k = starts.size - 1
    for i in range(k):
        if not (abs(p[i]) <= PRODUCT_LIMIT):  # also catches NaN
            return 0.0, y, 0.0, DIVERGED
    if not math.isfinite(y):
        return 0.0, y, 0.0, DIVERGED
    e = target - y
    yp = y * (1.0 - y)

    ncols = wb.shape[1]
    n_tr = dy.shape[0]

    # Exact mode: the sensitivity carried over from the previous step flows
    # back in through the feedback inputs of every unit of every block
    # (frozen blocks included), so the carry coefficient is a single scalar
    # shared by all weights.
    a_fb = 0.0
    if grad_mode == GRAD_EXACT:
        for u in range(wb.shape[0]):
            b = unit_block[u]
            loo = 1.0
            for v in range(starts[b], starts[b + 1]):
                if v != u:
                    loo *= h[v]
            c = 0.0
            if out_col >= 0:
                c += wb[u, out_col]
            if err_col >= 0:
                c -= wb[u, err_col]
            a_fb += loo * c

    for r in range(n_tr):
        u = first_trainable + r
        b = unit_block[u]
        loo = 1.0
        for v in range(starts[b], starts[b + 1]):
            if v != u:
                loo *= h[v]
        if grad_mode == GRAD_EXACT:
            for col in range(ncols):
                zg = 1.0 if col == 0 else z[col - 1]
                dy[r, col] = yp * loo * zg + yp * a_fb * dy[r, col]
        else:
            # recursion attached to the differentiated unit only; the error
            # path enters with a minus sign (its sensitivity is -dy)
            c = 0.0
            if out_col >= 0:
                c += wb[u, out_col]
            if err_col >= 0:
                c -= wb[u, err_col]
            for col in range(ncols):
                zg = 1.0 if col == 0 else z[col - 1]
                dy[r, col] = yp * loo * (zg + dy[r, col] * c)

    if eta != 0.0 or mu != 0.0:
        for r in range(n_tr):
            u = first_trainable + r
            for col in range(ncols):
                dw = eta * e * dy[r, col] + mu * prev_delta[r, col]
                wb[u, col] += dw
                prev_delta[r, col] = dw

    return e, y, yp, OK


@njit(cache=True)
def train_epoch(wb, starts, unit_block, first_trainable, xs, targets,
                has_error, has_output, err_col, out_col,
                prev_error, prev_output, dy, prev_delta,
                eta, mu, grad_mode, step_errors):
    """Run rtrl_step over the pattern sequence in temporal order.

    Returns (sse, prev_error, prev_output, status, bad_step). sse accumulates
    half the squared step error. step_errors is filled with e(t) per step.
    """
    n = xs.shape[0]
    n_in = wb.shape[1] - 1
    z = np.empty(n_in)
    h = np.empty(wb.shape[0])
    p = np.empty(starts.size - 1)
    sse = 0.0
    dead = 0
    for t in range(n):
        e, y, yp, status = rtrl_step(
            wb, starts, unit_block, first_trainable, xs[t], targets[t],
            has_error, has_output, err_col, out_col,
            prev_error, prev_output, dy, prev_delta,
            eta, mu, grad_mode, z, h, p)
        if status != OK:
            return sse, prev_error, prev_output, status, t
        step_errors[t] = e
        sse += 0.5 * e * e
        if yp == 0.0:
            dead += 1
        prev_error = e
        prev_output = y
    if dead == n:
        return sse, prev_error, prev_output, DEAD_EPOCH, n - 1
    return sse, prev_error, prev_output, OK, -1


@njit(cache=True)
def rollout(wb, starts, xs, targets, has_error, has_output, forecasts):
    """Forward-only sequential pass with feedback state and fixed weights.

    Feedback state starts at the training reset values (0.5 / 0.5); the error
    feedback uses the recorded desired value of the previous step. Returns
    (status, bad_step) and fills forecasts.
    """
    n = xs.shape[0]
    n_in = wb.shape[1] - 1
    z = np.empty(n_in)
    h = np.empty(wb.shape[0])
    p = np.empty(starts.size - 1)
    prev_error = 0.5
    prev_output = 0.5
    k = starts.size - 1
    for t in range(n):
        assemble(xs[t], prev_error, prev_output, has_error, has_output, z)
        y = forward(wb, starts, z, h, p)
        for i in range(k):
            if not (abs(p[i]) <= PRODUCT_LIMIT):
                return DIVERGED, t
        forecasts[t] = y
        prev_error = targets[t] - y
        prev_output = y
    return OK, -1
