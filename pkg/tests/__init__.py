"""
Tests for the chkpi package.
"""
