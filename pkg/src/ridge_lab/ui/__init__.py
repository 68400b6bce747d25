"""Console rendering and artifact persistence."""
