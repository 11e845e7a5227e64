"""Hierarchical network intrusion detection on NSL-KDD.

Stage 1 screens connections with an autoencoder trained on normal
traffic only (reconstruction error above a calibrated threshold flags
an attack); stage 2 types flagged attacks as DoS / Probe / R2L / U2R
with a small dense network, optionally trained on SVM-SMOTE-balanced
data. Classical baselines, metrics, and data-exploration exports round
out the toolkit.
"""

__version__ = "0.1.0"
