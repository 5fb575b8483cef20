# Curves, random walks and the evolving set process
