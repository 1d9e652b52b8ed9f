"""qLST: query-based latent space traversal explanations for ECG classifiers.

The package is organised as a small stack:

- ``qlst.numcore``   dense float32 arrays with reverse-mode autodiff, the
  layers shared by every network, and the Adam optimizer
- ``qlst.synthecg``  parametric synthetic median-beat ECGs with ground-truth
  morphology, threshold labels, and a rule-based morphology estimator
- ``qlst.models``    VAE, black-box classifiers, the traversal attention
  module, and the checkpoint format
- ``qlst.training``  the three training stages (classifier, VAE, traversal)
- ``qlst.explain``   traversal bundles, calibration reports, exports
- ``qlst.service``   JSON-over-HTTP inference endpoints
- ``qlst.cli``       the ``qlst`` command-line entry point
"""

__version__ = "0.1.0"
