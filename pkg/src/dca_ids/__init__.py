"""Immune-inspired intrusion-detection experiments on KDD-format data.

Core pieces: connection-record ingestion (:mod:`dca_ids.dataset`), signal
and antigen stream derivation (:mod:`dca_ids.signals`), the dendritic-cell
population algorithm (:mod:`dca_ids.dca`), a real-valued negative-selection
baseline (:mod:`dca_ids.nsa`), evaluation utilities
(:mod:`dca_ids.evaluation`) and the experiment runner
(:mod:`dca_ids.experiments`, :mod:`dca_ids.cli`).
"""

__version__ = "0.1.0"
