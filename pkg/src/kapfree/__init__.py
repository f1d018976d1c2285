"""Desk-scale machinery for dense k-AP-free sets with random difference sets.

Modules, bottom up: ``gf_core`` (F_p arithmetic, characters, seeded
sampling), ``linalg_fp`` (exact linear algebra), ``tensor_core`` (bias and
analytic rank), ``rank_lab`` (partition rank), ``veronese``, ``construction``
(the witness-set pipeline), ``probability_lab``, ``bounds`` and
``harness_cli``.
"""

__version__ = "0.1.0"
