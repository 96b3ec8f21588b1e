"""Domain modules of the torus observability laboratory."""
