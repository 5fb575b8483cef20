# Noisy hypercube model and the local-partitioning counterexample
