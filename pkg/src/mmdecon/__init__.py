"""Multimodal training-corpus decontamination.

A two-stage cascade removes training documents that leak evaluation data:
an image-recall gate over embedding similarity feeds a text-precision gate
over directional n-gram containment. Companion modules calibrate the text
threshold, account for removal volume, and compare models on training and
response compute.
"""

__version__ = "0.1.0"
