"""Tools for testing whether accentual-syllabic meters carry a semantic halo.

The package covers the full pipeline: corpus IO and filtering, stress-based
meter labeling, rare-lemma simplification over PPMI/SVD embeddings, topic
modeling via collapsed Gibbs sampling, the clustering/classification
experiments themselves, and a synthetic corpus generator used as the
end-to-end oracle.
"""

__version__ = "0.1.0"
