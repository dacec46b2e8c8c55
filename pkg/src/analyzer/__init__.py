# Analyzer package: center proximity and perturbation resilience
