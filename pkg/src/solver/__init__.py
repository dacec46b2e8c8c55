# Solver package: spanning tree, tree DP and exhaustive oracles
