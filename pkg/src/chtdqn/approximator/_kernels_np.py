"""Pure-numpy MLP kernels: batched forward pass and fused forward/backward.

These are the reference kernels; the compiled `_ckernels` extension implements
the same two entry points with identical semantics.
"""

import numpy as np


def forward(weights, biases, x):
    """Forward pass. x is (batch, in_dim); ReLU hiddens, identity output."""
    h = x
    for W, b in zip(weights[:-1], biases[:-1]):
        h = np.maximum(h @ W + b, 0.0)
    return h @ weights[-1] + biases[-1]


def backward(weights, biases, x, actions, targets):
    """Masked-MSE loss and its exact gradients.

    Loss is the mean over the batch of (q[i, actions[i]] - targets[i])**2;
    only the taken action's output contributes.  Returns (loss, grad_weights,
    grad_biases) with gradients shaped like the parameters.
    """
    n_layers = len(weights)
    hs = [x]
    zs = []
    h = x
    for W, b in zip(weights[:-1], biases[:-1]):
        z = h @ W + b
        h = np.maximum(z, 0.0)
        zs.append(z)
        hs.append(h)
    q = h @ weights[-1] + biases[-1]

    batch = x.shape[0]
    idx = np.arange(batch)
    resid = q[idx, actions] - targets
    loss = float(np.mean(resid * resid))

    dq = np.zeros_like(q)
    dq[idx, actions] = 2.0 * resid / batch

    grad_w = [None] * n_layers
    grad_b = [None] * n_layers
    d = dq
    for layer in range(n_layers - 1, -1, -1):
        grad_w[layer] = hs[layer].T @ d
        grad_b[layer] = d.sum(axis=0)
        if layer > 0:
            d = (d @ weights[layer].T) * (zs[layer - 1] > 0.0)
    return loss, grad_w, grad_b
