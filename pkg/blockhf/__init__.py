"""
blockhf: block-diagonal Hessian-free training for neural networks.
"""

__version__ = "0.1.0"
