"""A from-scratch LSTM over padded batches, with its exact backward pass.

One weight matrix holds everything: row 0 is the bias, the next rows map the
input, the rest map the previous hidden state; columns are the four gates in
i, f, o, g order. Padded steps carry state through unchanged, so the state
at the last time step is the state after each sequence's real tokens,
whatever its length.
"""

from __future__ import annotations

import numpy as np


def lstm_init(input_size: int, hidden_size: int, rng: np.random.Generator) -> np.ndarray:
    fan_in = 1 + input_size + hidden_size
    bound = 1.0 / np.sqrt(fan_in)
    weights = rng.uniform(-bound, bound, size=(fan_in, 4 * hidden_size))
    weights[0, :] = 0.0  # bias row
    return weights


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_forward(x: np.ndarray, mask: np.ndarray, weights: np.ndarray):
    """Run the cell over (T, B, D) inputs with a (T, B) validity mask.

    Returns (h_last, cache); ``h_last`` is (B, H), the hidden state after
    each sequence's final valid step.
    """
    steps, batch, input_size = x.shape
    hidden = weights.shape[1] // 4
    h_prev = np.zeros((batch, hidden))
    c_prev = np.zeros((batch, hidden))
    inputs = np.empty((steps, batch, weights.shape[0]))
    gates = np.empty((steps, batch, 4 * hidden))
    cells = np.empty((steps, batch, hidden))
    cell_tanh = np.empty((steps, batch, hidden))
    hiddens = np.empty((steps, batch, hidden))
    prev_cells = np.empty((steps, batch, hidden))

    for t in range(steps):
        inp = inputs[t]
        inp[:, 0] = 1.0
        inp[:, 1 : 1 + input_size] = x[t]
        inp[:, 1 + input_size :] = h_prev
        raw = inp @ weights
        g = gates[t]
        g[:, : 3 * hidden] = _sigmoid(raw[:, : 3 * hidden])
        g[:, 3 * hidden :] = np.tanh(raw[:, 3 * hidden :])
        i_g = g[:, :hidden]
        f_g = g[:, hidden : 2 * hidden]
        o_g = g[:, 2 * hidden : 3 * hidden]
        z_g = g[:, 3 * hidden :]
        prev_cells[t] = c_prev
        c_new = i_g * z_g + f_g * c_prev
        tanh_c = np.tanh(c_new)
        h_new = o_g * tanh_c
        m = mask[t][:, None]
        cells[t] = m * c_new + (1.0 - m) * c_prev
        cell_tanh[t] = tanh_c
        hiddens[t] = m * h_new + (1.0 - m) * h_prev
        h_prev = hiddens[t]
        c_prev = cells[t]

    cache = (x, mask, weights, inputs, gates, cells, cell_tanh, hiddens, prev_cells)
    return h_prev, cache


def lstm_backward(d_h_last: np.ndarray, cache):
    """Gradients of a scalar loss through :func:`lstm_forward`.

    Takes the loss gradient w.r.t. the final hidden state and returns
    (d_x, d_weights).
    """
    x, mask, weights, inputs, gates, cells, cell_tanh, hiddens, prev_cells = cache
    steps, batch, input_size = x.shape
    hidden = weights.shape[1] // 4

    d_weights = np.zeros_like(weights)
    d_x = np.zeros_like(x)
    d_h = d_h_last.copy()
    d_c = np.zeros((batch, hidden))

    for t in range(steps - 1, -1, -1):
        m = mask[t][:, None]
        # padded steps pass gradients straight through to the previous step
        d_h_new = m * d_h
        d_c_new = m * d_c
        d_h_skip = (1.0 - m) * d_h
        d_c_skip = (1.0 - m) * d_c

        g = gates[t]
        i_g = g[:, :hidden]
        f_g = g[:, hidden : 2 * hidden]
        o_g = g[:, 2 * hidden : 3 * hidden]
        z_g = g[:, 3 * hidden :]
        tanh_c = cell_tanh[t]

        d_o = tanh_c * d_h_new
        d_c_new = d_c_new + o_g * (1.0 - tanh_c**2) * d_h_new
        d_i = z_g * d_c_new
        d_z = i_g * d_c_new
        d_f = prev_cells[t] * d_c_new
        d_c_prev = f_g * d_c_new

        d_raw = np.empty((batch, 4 * hidden))
        d_raw[:, :hidden] = i_g * (1.0 - i_g) * d_i
        d_raw[:, hidden : 2 * hidden] = f_g * (1.0 - f_g) * d_f
        d_raw[:, 2 * hidden : 3 * hidden] = o_g * (1.0 - o_g) * d_o
        d_raw[:, 3 * hidden :] = (1.0 - z_g**2) * d_z

        d_weights += inputs[t].T @ d_raw
        d_inp = d_raw @ weights.T
        d_x[t] = d_inp[:, 1 : 1 + input_size]
        d_h = d_inp[:, 1 + input_size :] + d_h_skip
        d_c = d_c_prev + d_c_skip

    return d_x, d_weights
