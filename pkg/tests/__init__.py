"""
Test suite for visual search project.
"""

