"""Tests for the loop-witness services and CLI."""
