"""Class-similarity weight matrices, weighted cross-entropy, and explicability scores.

Subpackage map:

* :mod:`wcce.taxonomy` - hypernym-tree parsing and path similarity
* :mod:`wcce.weights` - weight-matrix construction and persistence
* :mod:`wcce.loss` - the weighted loss, its gradient, and the swap/shift checks
* :mod:`wcce.trainer` - desk-scale softmax classifiers and SGD
* :mod:`wcce.metrics` - Hard/Soft explicability scores and cross-loss tables
* :mod:`wcce.simulation` - three-class loss sweeps and regime verdicts
* :mod:`wcce.labeling` - the rating-collection HTTP service
* :mod:`wcce.cli` - the ``wcce`` command-line entry point

The batched numeric kernels live in a compiled extension with a NumPy
fallback; ``wcce.backend.BACKEND_NAME`` reports which one is active.
"""

from .backend import BACKEND_NAME

__version__ = "0.1.0"

__all__ = ["BACKEND_NAME", "__version__"]
