"""Multipath link-state routing laboratory.

Subpackages cover the weighted-digraph routing core (`netgraph`), the
link-state neighborhood protocol (`olsr`), source routing with recovery
(`routing`), Mojette multiple-description coding (`mojette`, `filecodec`),
redundancy allocation (`redundancy`), and a deterministic discrete-event
simulator (`simulator`) driven by scenario files (`scenario`) and a CLI
(`cli`).
"""

__version__ = "0.1.0"
