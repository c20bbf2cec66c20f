"""Tests related modules."""
