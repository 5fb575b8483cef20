"""spexlab: random walks, evolving sets and small-set expansion experiments."""
