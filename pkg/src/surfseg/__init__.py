"""
surfseg: globally optimal terrain-like surface segmentation.

The pipeline turns an image into a per-column probability map (predictor),
fits a Gaussian to every column (d2c), and finds the surface minimizing a
convex quadratic energy with one tridiagonal solve (smoothing). The
smoothness weight is learned end to end (finetune).
"""

__version__ = "1.0.0"
