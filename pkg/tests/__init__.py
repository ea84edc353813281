"""Tests for graded-connections."""
