# Metric package: distance matrices and perturbations
