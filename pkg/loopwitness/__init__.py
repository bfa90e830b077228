"""Core data package for the loop-witness decision tool."""
