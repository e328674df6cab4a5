"""Numpy reference implementation of the distress-cascade kernel."""

import numpy as np

STATE_UNDISTRESSED = 0
STATE_DISTRESSED = 1
STATE_INACTIVE = 2


def cascade(W, h0, distressed0):
    """Propagate distress synchronously until no node remains distressed.

    Each round, every currently distressed node j adds ``W[j, i] * h[j]`` to
    every node i (h values taken from the start of the round), h is capped
    at 1, distressed nodes go inactive and undistressed nodes with positive
    h become distressed. A node is distressed for exactly one round, so the
    loop runs at most ``b + 1`` times.

    Parameters
    ----------
    W : (b, b) float64 array, entries in [0, 1]
    h0 : (b,) float64 array, initial distress in [0, 1]
    distressed0 : (b,) bool array, nodes initially distressed

    Returns
    -------
    (h, states, rounds) : final distress, final state codes, round count
    """
    h = np.array(h0, dtype=float)
    states = np.where(distressed0, STATE_DISTRESSED, STATE_UNDISTRESSED).astype(
        np.uint8
    )
    rounds = 0
    while True:
        firing = states == STATE_DISTRESSED
        if not firing.any():
            break
        h_new = np.minimum(1.0, h + h[firing] @ W[firing])
        states[firing] = STATE_INACTIVE
        states[(states == STATE_UNDISTRESSED) & (h_new > 0.0)] = STATE_DISTRESSED
        h = h_new
        rounds += 1
    return h, states, rounds
