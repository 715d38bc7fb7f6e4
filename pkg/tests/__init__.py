"""Tests for the rationalsketch package."""
