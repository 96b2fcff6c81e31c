import numpy as np


def logsumexp(x, axis, keepdims=False):
    """Stable log-sum-exp for finite inputs.

    scipy.special.logsumexp pays per-call validation that dominates the
    small arrays used in the inner loops here.
    """
    top = x.max(axis=axis, keepdims=True)
    out = np.log(np.exp(x - top).sum(axis=axis, keepdims=True)) + top
    return out if keepdims else out.squeeze(axis)
