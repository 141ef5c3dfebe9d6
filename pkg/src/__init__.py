"""
llvkit: distances between softmax models and dissimilarities between their representations.
"""
__version__ = "0.1.0"
