"""
Utility functions for label files and report/benchmark exports.
"""
