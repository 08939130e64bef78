"""Recurrent spiking networks of balanced resonate-and-fire neurons.

Subpackages:

- ``dynamics``: stateless neuron step functions and closed-form helpers.
- ``network``:  recurrent single-hidden-layer network, init, checkpoints.
- ``learning``: losses, surrogate gradient, manual BPTT, gradient checking.
- ``optim``:    Adam / RAdam / RMSprop and the linear LR schedule.
- ``datasets``: S-MNIST / PS-MNIST / ECG / SHD encoders and the cache format.
- ``analysis``: frequency response, boundary curves, noise robustness, exports.
- ``cli``:      command-line entry point (encode / train / eval / analyze).
"""

from . import dynamics, network, learning, optim, datasets, analysis

__version__ = "0.1.0"

__all__ = ["dynamics", "network", "learning", "optim", "datasets", "analysis", "__version__"]
