"""
IRRCNN engine - CPU deep-learning engine for inception recurrent residual networks.
"""
__version__ = "0.1.0"
